"""Scratch validation of the engine (not part of the package)."""
import math
import time

import numpy as np

from pulsespec import (
    DensityMatrix, DetuningModel, EmitterParams, PulseSequence,
    TimeGrid, evolve, spectrum_single, ensemble_spectrum,
    uncontrolled_reference, default_grid, free_decay_grid,
    mhz_to_angular, angular_to_mhz,
)

GAMMA = 1.0 / 12.3e-9
params = EmitterParams(decay_rate=GAMMA)

# ---- 1. free decay spectrum vs analytic oracle ----
def analytic_p1(freqs_hz, delta, gamma, T):
    om = 2 * math.pi * freqs_hz
    z = 1j * delta - gamma / 2 - 1j * om
    term = (np.exp(z * T) * (1 - np.exp(-(gamma + z) * T)) / (gamma + z)
            - (1 - np.exp(-gamma * T)) / gamma)
    return np.real(term / z)

def analytic_p2(freqs_hz, delta, gamma, T):
    om = 2 * math.pi * freqs_hz
    z = 1j * delta - gamma / 2 - 1j * om
    # C2(t,th) = (1 - e^{-G t}) e^{z th}; inner over th: (e^{z(T-t)}-1)/z
    # I = int_0^T (1-e^{-Gt}) (e^{z(T-t)}-1)/z dt
    a = (np.exp(z * T) - 1.0) / z - T  # int of (e^{z(T-t)}-1) dt
    b = (np.exp(z * T) * (1 - np.exp(-(gamma + z) * T)) / (gamma + z)
         - (1 - np.exp(-gamma * T)) / gamma)  # int of e^{-Gt}(e^{z(T-t)}-1) dt
    return np.real((a - b) / z)

delta_mhz = 10.0
delta = mhz_to_angular(delta_mhz)
freqs = np.linspace(-70e6, 90e6, 321)
grid = free_decay_grid(params, freqs)
t0 = time.monotonic()
spec = spectrum_single(delta, None, params, grid, freqs)
t1 = time.monotonic()
p1_ref = analytic_p1(freqs, delta, GAMMA, grid.horizon)
p2_ref = analytic_p2(freqs, delta, GAMMA, grid.horizon)
err1 = np.max(np.abs(spec.p1 - p1_ref)) / np.max(np.abs(p1_ref))
err2 = np.max(np.abs(spec.p2 - p2_ref)) / np.max(np.abs(p2_ref))
print(f"free decay: {t1-t0:.2f}s  p1 rel err {err1:.2e}  p2 rel err {err2:.2e}")

# FWHM of p1 via half-max crossing
pk = np.argmax(spec.p1)
half = spec.p1[pk] / 2
above = spec.p1 >= half
lo = freqs[above][0]; hi = freqs[above][-1]
print(f"p1 peak at {freqs[pk]/1e6:.2f} MHz (want {delta_mhz}), FWHM ~{(hi-lo)/1e6:.2f} MHz (want {GAMMA/2/math.pi/1e6:.3f})")

# ---- 2. pi pulse train inversion ----
seq = PulseSequence.calibrated(4, 10e-9, 1.6e-9)
gfree = TimeGrid.for_sequence(seq, t_start=-seq.support_halfwidth, t_end=3.5 * 10e-9)
par0 = EmitterParams(decay_rate=0.0)
traj = evolve(DensityMatrix.ground(), gfree, 0.0, seq, par0)
for k in range(4):
    t_probe = k * 10e-9 + 5e-9
    i = np.argmin(np.abs(traj.times - t_probe))
    print(f"  after pulse {k}: rho_ee = {traj.rho_ee[i]:.6f}")

# ---- 3. controlled spectrum structure, single realization delta=0 ----
seq12 = PulseSequence.calibrated(12, 10e-9, 1.6e-9)
freqs12 = np.linspace(-150e6, 150e6, 401)
g12 = default_grid(seq12, freqs12)
t0 = time.monotonic()
s12 = spectrum_single(0.0, seq12, params, g12, freqs12)
t1 = time.monotonic()
print(f"single controlled realization: {t1-t0:.3f}s")
q = s12.q
i0 = np.argmin(np.abs(freqs12))
print(f"  Q(0) = {q[i0]:.4g} (local min? {q[i0] < q[i0-1] and q[i0] < q[i0+1]})")
for n in (1, 2, 3):
    f_sat = n * 1.0 / (2 * 10e-9)
    i = np.argmin(np.abs(freqs12 - f_sat))
    w = 8
    seg = q[i - w:i + w + 1]
    print(f"  near +{f_sat/1e6:.0f} MHz: min {seg.min():.4g} at {freqs12[i-w+np.argmin(seg)]/1e6:.1f} MHz")

# ---- 4. ensemble run timing ----
model = DetuningModel(mean=0.0, sigma=mhz_to_angular(30.0) / 2.3548, n_realizations=20, seed=7)
t0 = time.monotonic()
ens = ensemble_spectrum(model, seq12, params, g12, freqs12)
t1 = time.monotonic()
print(f"ensemble 20 realizations: {t1-t0:.2f}s -> per realization {(t1-t0)/20*1000:.0f} ms")
i0 = np.argmin(np.abs(freqs12))
print(f"  ensemble Q(0) = {ens.q[i0]:.4g}, stderr {ens.stderr[i0]:.3g}")

# ---- 5. uncontrolled reference Gaussian width ----
t0 = time.monotonic()
ref = uncontrolled_reference(DetuningModel(0.0, mhz_to_angular(30.0)/2.3548, 64, 11), params, freqs12, mode="gauss-hermite")
t1 = time.monotonic()
pk = np.argmax(ref.q)
half = ref.q[pk] / 2
above = ref.q >= half
lo = freqs12[above][0]; hi = freqs12[above][-1]
print(f"uncontrolled GH: {t1-t0:.2f}s, peak {freqs12[pk]/1e6:.1f} MHz, FWHM ~{(hi-lo)/1e6:.1f} MHz (want ~>=30)")
