import math
import numpy as np
from pulsespec import DensityMatrix, EmitterParams, PulseSequence, spectrum_single, default_grid, mhz_to_angular
from pulsespec.dynamics import _build_axis, _rk4_transfer
from pulsespec.fitkit import ModelSpec, fit, extract_satellites, seed_lorentzians


def prep_state(seq, delta, gamma):
    s = seq.support_halfwidth
    axis = _build_axis(-s, 0.0, seq, seq.interpulse_delay / 200, seq.envelope_fwhm / 40)
    Ms = _rk4_transfer(axis, seq, delta, gamma)
    u = DensityMatrix.ground().as_vector()
    for M in Ms:
        u = M @ u
    return DensityMatrix.from_vector(u)


tau = 10e-9
N = 12
seq = PulseSequence.calibrated(N, tau, 1.6e-9)
freqs = np.linspace(-150e6, 150e6, 401)

for inv_gamma_ns in (12.3, 25.0, 50.0, 123.0, 1000.0):
    gamma = 1.0 / (inv_gamma_ns * 1e-9)
    params = EmitterParams(decay_rate=gamma)
    grid = default_grid(seq, freqs)
    nodes, gh_w = np.polynomial.hermite.hermgauss(13)
    sigma = mhz_to_angular(30.0) / 2.3548
    deltas = math.sqrt(2) * sigma * nodes
    weights = gh_w / math.sqrt(math.pi)
    P1 = np.zeros_like(freqs)
    for w, d in zip(weights, deltas):
        s = spectrum_single(d, seq, params, grid, freqs, rho0=prep_state(seq, d, gamma))
        P1 += w * s.p1
    init = seed_lorentzians(freqs, P1, 5, tau)
    res = fit(ModelSpec("lorentzian_sum", n_peaks=5), freqs, P1, init=init)
    sats = extract_satellites(res, ModelSpec("lorentzian_sum", n_peaks=5), tau)
    r1 = [s.residual_hz / 1e6 for s in sats if abs(s.order) == 1]
    r2 = [s.residual_hz / 1e6 for s in sats if abs(s.order) == 2]
    print(f"1/G={inv_gamma_ns:7.1f} ns conv={res.converged}: |n|=1 resid {r1} MHz, |n|=2 resid {r2} MHz")
