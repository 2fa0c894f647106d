import math
import time
import numpy as np
from pulsespec import PulseSequence, mhz_to_angular
from pulsespec.fitkit import ModelSpec, fit, extract_satellites
from scratch_probe import batched_trace_windows

GAMMA = 1.0 / 12.3e-9
phases = np.array([0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi])


def controlled_scan(tau, N, inh_fwhm_mhz, n_real, n_freq, omega_p_rel=0.3, seed=42):
    seq = PulseSequence.calibrated(N, tau, 1.6e-9)
    span = 1.5 / tau
    freqs = np.linspace(-span, span, n_freq)
    sigma = mhz_to_angular(inh_fwhm_mhz) / 2.3548
    rng = np.random.default_rng(seed)
    deltas = sigma * rng.standard_normal(n_real)
    om_f = 2 * math.pi * freqs
    F, D, P = np.meshgrid(om_f, deltas, phases, indexing="ij")
    means = batched_trace_windows(
        seq, D.ravel(), np.full(F.size, omega_p_rel * GAMMA), F.ravel(), P.ravel(),
        GAMMA, -seq.support_halfwidth, N * tau,
        [(2 * tau, N * tau)], tau / 100, 1.6e-9 / 40, turn_on=0.0,
    )
    curve = means[0].reshape(n_freq, n_real, 4).mean(axis=(1, 2))
    return freqs, curve


def fit_satellites(freqs, curve, tau, inh_fwhm_mhz, n_sat_orders=2):
    spacing = 1.0 / (2.0 * tau)
    edge = max(3, len(freqs) // 20)
    base = float(np.median(np.concatenate([curve[:edge], curve[-edge:]])))
    comps = [(float(np.interp(0, freqs, curve)) - base, 0.0, inh_fwhm_mhz * 1e6)]
    comps.append((-abs(curve.max() - curve.min()) / 3, 0.0, 15e6))
    for n in range(1, n_sat_orders + 1):
        for s in (+1, -1):
            c = s * n * spacing
            comps.append((-abs(curve.max() - curve.min()) / 4, c, 10e6))
    init = [base]
    for a, c, w in comps:
        init += [a, c, w]
    spec = ModelSpec("lorentzian_sum", n_peaks=len(comps))
    res = fit(spec, freqs, curve, init=np.array(init))
    return res, spec


for tau_ns, N, inh in ((10, 12, 104.0), (10, 12, 30.0), (5, 24, 107.0), (14, 9, 30.0)):
    tau = tau_ns * 1e-9
    t0 = time.monotonic()
    freqs, curve = controlled_scan(tau, N, inh, n_real=32, n_freq=161)
    t1 = time.monotonic()
    res, spec = fit_satellites(freqs, curve, tau, inh)
    sats = extract_satellites(res, spec, tau)
    step = freqs[1] - freqs[0]
    print(f"tau={tau_ns}ns N={N} inh={inh}MHz  scan {t1-t0:.1f}s, fit conv={res.converged} it={res.iterations}")
    for s in sats:
        ok = "OK " if abs(s.residual_hz) < step else "BAD"
        print(f"   n={s.order:+d}: fitted {s.fitted_hz/1e6:8.2f} MHz  predicted {s.predicted_hz/1e6:8.2f}  resid {s.residual_hz/1e6:+6.2f} MHz  (step {step/1e6:.2f}) {ok}")
