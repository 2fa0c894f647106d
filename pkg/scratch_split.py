import math
import numpy as np
from pulsespec import (
    DensityMatrix, EmitterParams, PulseSequence,
    spectrum_single, default_grid, mhz_to_angular,
)
from pulsespec.dynamics import _build_axis, _rk4_transfer


def prep_state(seq, delta, gamma):
    s = seq.support_halfwidth
    axis = _build_axis(-s, 0.0, seq, seq.interpulse_delay / 200, seq.envelope_fwhm / 40)
    Ms = _rk4_transfer(axis, seq, delta, gamma)
    u = DensityMatrix.ground().as_vector()
    for M in Ms:
        u = M @ u
    return DensityMatrix.from_vector(u)


def peak_pos(freqs, y, f_center, halfwin):
    m = np.abs(freqs - f_center) <= halfwin
    idx = np.where(m)[0]
    i = idx[np.argmax(y[m])]
    # parabolic refinement
    if 0 < i < len(freqs) - 1:
        a, b, c = y[i - 1], y[i], y[i + 1]
        denom = a - 2 * b + c
        if denom != 0:
            return freqs[i] + 0.5 * (a - c) / denom * (freqs[1] - freqs[0])
    return freqs[i]


tau = 10e-9
for gamma_inv_ns, N in ((12.3, 12), (12.3, 24), (12.3, 48), (24.6, 12), (24.6, 24)):
    gamma = 1.0 / (gamma_inv_ns * 1e-9)
    params = EmitterParams(decay_rate=gamma)
    seq = PulseSequence.calibrated(N, tau, 1.6e-9)
    freqs = np.linspace(-150e6, 150e6, 1201)
    grid = default_grid(seq, freqs)
    nodes, gh_w = np.polynomial.hermite.hermgauss(13)
    sigma = mhz_to_angular(30.0) / 2.3548
    deltas = math.sqrt(2) * sigma * nodes
    weights = gh_w / math.sqrt(math.pi)
    P1 = np.zeros_like(freqs)
    P2 = np.zeros_like(freqs)
    for w, d in zip(weights, deltas):
        s = spectrum_single(d, seq, params, grid, freqs, rho0=prep_state(seq, d, gamma))
        P1 += w * s.p1
        P2 += w * s.p2
    p1_sat = peak_pos(freqs, P1, 50e6, 12e6)
    p2_sat = peak_pos(freqs, P2, 50e6, 12e6)
    q = P2 - P1
    qmin_sat = peak_pos(freqs, -q, 45e6, 15e6)
    qmax_sat = peak_pos(freqs, q, 55e6, 15e6)
    print(
        f"1/G={gamma_inv_ns} ns N={N:3d}: P1 sat {p1_sat/1e6:7.2f}  P2 sat {p2_sat/1e6:7.2f}"
        f"  Q lobes {qmin_sat/1e6:7.2f}/{qmax_sat/1e6:7.2f} MHz"
    )
