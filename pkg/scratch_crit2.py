"""Prototype of the criterion-2 procedure at its intended parameters."""
import math
import time
import numpy as np
from pulsespec import DensityMatrix, DetuningModel, EmitterParams, PulseSequence, spectrum_single, default_grid, mhz_to_angular
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


def p1_mc(tau, N, gamma, inh_fwhm_mhz, n_real, seed, n_freq=401):
    params = EmitterParams(decay_rate=gamma)
    seq = PulseSequence.calibrated(N, tau, 1.6e-9)
    span = 1.5 / tau
    freqs = np.linspace(-span, span, n_freq)
    grid = default_grid(seq, freqs)
    model = DetuningModel(0.0, mhz_to_angular(inh_fwhm_mhz) / 2.3548, n_real, seed)
    P1 = np.zeros_like(freqs)
    for d in model.draws():
        s = spectrum_single(d, seq, params, grid, freqs, rho0=prep_state(seq, d, gamma))
        P1 += s.p1
    return freqs, P1 / n_real


plan = ((5e-9, 24), (7e-9, 17), (10e-9, 12), (14e-9, 9))
for inv_g_ns in (50.0, 12.3):
    gamma = 1.0 / (inv_g_ns * 1e-9)
    print(f"--- 1/Gamma = {inv_g_ns} ns ---")
    total = 0.0
    for tau, N in plan:
        t0 = time.monotonic()
        freqs, P1 = p1_mc(tau, N, gamma, 107.0, 200, seed=1234)
        t1 = time.monotonic()
        total += t1 - t0
        init = seed_lorentzians(freqs, P1, 5, tau, width=max(gamma / (2 * math.pi), 0.05 / (2 * tau)))
        spec = ModelSpec("lorentzian_sum", n_peaks=5)
        res = fit(spec, freqs, P1, init=init)
        step = freqs[1] - freqs[0]
        msg = f"tau={tau*1e9:.0f}ns N={N} ({t1-t0:.1f}s) conv={res.converged}:"
        if res.converged:
            for s in extract_satellites(res, spec, tau):
                flag = "OK" if abs(s.residual_hz) < step else "BAD"
                msg += f" n{s.order:+d}:{s.residual_hz/1e6:+.2f}MHz/{step/1e6:.2f} {flag};"
        print(msg)
    print(f"   total ensemble time {total:.0f}s")
