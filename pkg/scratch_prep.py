import math
import numpy as np
from pulsespec import (
    DensityMatrix, DetuningModel, EmitterParams, PulseSequence,
    spectrum_single, default_grid, mhz_to_angular,
)
from pulsespec.dynamics import _build_axis, _rk4_transfer
from pulsespec.spectra import _interval_transfers

GAMMA = 1.0 / 12.3e-9
params = EmitterParams(decay_rate=GAMMA)
seq12 = PulseSequence.calibrated(12, 10e-9, 1.6e-9)
freqs = np.linspace(-150e6, 150e6, 401)
g12 = default_grid(seq12, freqs)


def prep_state(delta):
    s = seq12.support_halfwidth
    axis = _build_axis(-s, 0.0, seq12, 10e-9 / 200, 1.6e-9 / 40)
    Ms = _rk4_transfer(axis, seq12, delta, GAMMA)
    u = DensityMatrix.ground().as_vector()
    for M in Ms:
        u = M @ u
    return u


def single_prepped(delta):
    u0 = prep_state(delta)
    rho0 = DensityMatrix.from_vector(u0)
    return spectrum_single(delta, seq12, params, g12, freqs, rho0=rho0)


# Gauss-Hermite ensemble with prep, 30 MHz FWHM, several delta0
nodes, gh_w = np.polynomial.hermite.hermgauss(21)
sigma = mhz_to_angular(30.0) / 2.3548

for d0_mhz in (0.0, 10.0, 20.0, 30.0):
    d0 = mhz_to_angular(d0_mhz)
    deltas = d0 + math.sqrt(2) * sigma * nodes
    weights = gh_w / math.sqrt(math.pi)
    acc_q = None
    for w, d in zip(weights, deltas):
        s = single_prepped(d)
        acc_q = w * s.q if acc_q is None else acc_q + w * s.q
    q = acc_q
    scale = np.max(np.abs(q))
    i0 = np.argmin(np.abs(freqs))
    is_min = q[i0] < q[i0 - 1] and q[i0] < q[i0 + 1]
    print(f"delta0={d0_mhz:5.1f} MHz: Q(0)/max|Q| = {q[i0]/scale:+.3f} local-min={is_min}")
    mins = [i for i in range(1, 400) if q[i] < q[i-1] and q[i] < q[i+1] and abs(q[i]) > 0.03*scale]
    print("   minima:", [round(freqs[i]/1e6, 1) for i in mins])
    for i in range(0, 401, 25):
        bar = "#" * int(30 * (q[i] / scale + 1) / 2)
        print(f"   {freqs[i]/1e6:8.1f}  {q[i]/scale:+.3f} {bar}")
