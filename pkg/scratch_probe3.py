import math
import numpy as np
from pulsespec import PulseSequence, mhz_to_angular
from scratch_probe import batched_trace_windows

GAMMA = 1.0 / 12.3e-9
tau = 10e-9
N = 12
seq = PulseSequence.calibrated(N, tau, 1.6e-9)
phases = np.array([0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi])

for om_rel, label in ((0.3, "0.3G"), (0.05, "0.05G")):
    omega_p = om_rel * GAMMA
    freqs = np.linspace(38e6, 62e6, 49)
    om_f = 2 * math.pi * freqs
    F, P = np.meshgrid(om_f, phases, indexing="ij")
    det_b, phi_b = F.ravel(), P.ravel()
    delta_b = np.zeros_like(det_b)
    om_b = np.full_like(det_b, omega_p)
    means = batched_trace_windows(
        seq, delta_b, om_b, det_b, phi_b, GAMMA,
        -seq.support_halfwidth, N * tau,
        [(2 * tau, 12 * tau)], tau / 100, 1.6e-9 / 40, turn_on=0.0,
    )
    curve = means[0].reshape(len(freqs), 4).mean(axis=1)
    i = np.argmin(curve)
    a, b, c = curve[i - 1], curve[i], curve[i + 1]
    off = 0.5 * (a - c) / (a - 2 * b + c) * (freqs[1] - freqs[0])
    print(f"single delta=0, probe {label}: satellite dip at {(freqs[i]+off)/1e6:.2f} MHz, depth {(np.median(curve)-b):.2e}")

# Dependence on which window (later windows = more echo periods)
omega_p = 0.3 * GAMMA
freqs = np.linspace(38e6, 62e6, 49)
om_f = 2 * math.pi * freqs
F, P = np.meshgrid(om_f, phases, indexing="ij")
det_b, phi_b = F.ravel(), P.ravel()
delta_b = np.zeros_like(det_b)
om_b = np.full_like(det_b, omega_p)
means = batched_trace_windows(
    seq, delta_b, om_b, det_b, phi_b, GAMMA,
    -seq.support_halfwidth, N * tau,
    [(2 * tau, 6 * tau), (6 * tau, 12 * tau), (4 * tau, 12 * tau)],
    tau / 100, 1.6e-9 / 40, turn_on=0.0,
)
for w, lab in enumerate(["2-6tau", "6-12tau", "4-12tau"]):
    curve = means[w].reshape(len(freqs), 4).mean(axis=1)
    i = np.argmin(curve)
    a, b, c = curve[i - 1], curve[i], curve[i + 1]
    off = 0.5 * (a - c) / (a - 2 * b + c) * (freqs[1] - freqs[0])
    print(f"window {lab}: satellite dip at {(freqs[i]+off)/1e6:.2f} MHz")
