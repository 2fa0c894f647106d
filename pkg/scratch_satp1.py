import math
import time
import numpy as np
from pulsespec import DensityMatrix, EmitterParams, PulseSequence, spectrum_single, default_grid, mhz_to_angular
from pulsespec.dynamics import _build_axis, _rk4_transfer
from pulsespec.fitkit import ModelSpec, fit, extract_satellites, seed_lorentzians

GAMMA = 1.0 / 12.3e-9
params = EmitterParams(decay_rate=GAMMA)


def prep_state(seq, delta):
    s = seq.support_halfwidth
    axis = _build_axis(-s, 0.0, seq, seq.interpulse_delay / 200, seq.envelope_fwhm / 40)
    Ms = _rk4_transfer(axis, seq, delta, GAMMA)
    u = DensityMatrix.ground().as_vector()
    for M in Ms:
        u = M @ u
    return DensityMatrix.from_vector(u)


def p1_ensemble(tau, N, inh_fwhm_mhz, n_freq):
    seq = PulseSequence.calibrated(N, tau, 1.6e-9)
    span = 1.5 / tau
    freqs = np.linspace(-span, span, n_freq)
    grid = default_grid(seq, freqs)
    nodes, gh_w = np.polynomial.hermite.hermgauss(13)
    sigma = mhz_to_angular(inh_fwhm_mhz) / 2.3548
    deltas = math.sqrt(2) * sigma * nodes
    weights = gh_w / math.sqrt(math.pi)
    P1 = np.zeros_like(freqs)
    for w, d in zip(weights, deltas):
        s = spectrum_single(d, seq, params, grid, freqs, rho0=prep_state(seq, d))
        P1 += w * s.p1
    return freqs, P1


for tau_ns, N in ((5, 24), (7, 17), (10, 12), (14, 9)):
    tau = tau_ns * 1e-9
    t0 = time.monotonic()
    freqs, P1 = p1_ensemble(tau, N, 30.0, 401)
    t1 = time.monotonic()
    init = seed_lorentzians(freqs, P1, 5, tau)
    spec = ModelSpec("lorentzian_sum", n_peaks=5)
    res = fit(spec, freqs, P1, init=init)
    step = freqs[1] - freqs[0]
    line = f"tau={tau_ns}ns N={N}: {t1-t0:.1f}s conv={res.converged} it={res.iterations}"
    if res.converged:
        sats = extract_satellites(res, spec, tau)
        for s in sats:
            ok = "OK" if abs(s.residual_hz) < step else "BAD"
            line += f"\n   n={s.order:+d}: {s.fitted_hz/1e6:8.2f} vs {s.predicted_hz/1e6:8.2f} resid {s.residual_hz/1e6:+5.2f} MHz (step {step/1e6:.2f}) {ok}"
    print(line)

# same with 7 components to absorb order-3 weight, tau=10
tau = 10e-9
freqs, P1 = p1_ensemble(tau, 12, 30.0, 401)
init = seed_lorentzians(freqs, P1, 7, tau)
spec = ModelSpec("lorentzian_sum", n_peaks=7)
res = fit(spec, freqs, P1, init=init)
print(f"tau=10ns with 7 comps: conv={res.converged}")
if res.converged:
    for s in extract_satellites(res, spec, tau):
        print(f"   n={s.order:+d}: resid {s.residual_hz/1e6:+5.2f} MHz")
