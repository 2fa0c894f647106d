import math
import time
import numpy as np
from pulsespec import DensityMatrix, EmitterParams, PulseSequence, mhz_to_angular
from pulsespec.dynamics import _build_axis, pulse_envelope

GAMMA = 1.0 / 12.3e-9


def batched_trace_windows(seq, delta_b, omega_p_b, det_p_b, phi_b, gamma,
                          t_start, t_end, windows, base_step, pulse_substep,
                          turn_on=0.0):
    """RK4 over a shared axis for a batch of parameter tuples.

    Returns per-window trapezoid means of rho_ee (no dark factor here).
    """
    axis = _build_axis(t_start, t_end, seq, base_step, pulse_substep)
    n_b = len(delta_b)
    ee = np.zeros(n_b)
    eg = np.zeros(n_b, complex)
    ge = np.zeros(n_b, complex)
    gg = np.ones(n_b)

    win_acc = np.zeros((len(windows), n_b))
    win_len = [0.0] * len(windows)

    def omega_at(t):
        om = pulse_envelope(t, seq)
        probe = np.where(t >= turn_on, 2.0 * omega_p_b * np.cos(det_p_b * t + phi_b), 0.0)
        return om + probe

    def rhs(t, ee, eg, ge, gg):
        om = omega_at(t)
        dee = 0.5j * om * (eg - ge) - gamma * ee
        dgg = -0.5j * om * (eg - ge) + gamma * ee
        deg = (-1j * delta_b - 0.5 * gamma) * eg + 0.5j * om * (ee - gg)
        dge = (1j * delta_b - 0.5 * gamma) * ge - 0.5j * om * (ee - gg)
        return dee, deg, dge, dgg

    for i in range(len(axis) - 1):
        t = axis[i]
        h = axis[i + 1] - t
        k1 = rhs(t, ee, eg, ge, gg)
        k2 = rhs(t + 0.5 * h, ee + 0.5 * h * k1[0], eg + 0.5 * h * k1[1], ge + 0.5 * h * k1[2], gg + 0.5 * h * k1[3])
        k3 = rhs(t + 0.5 * h, ee + 0.5 * h * k2[0], eg + 0.5 * h * k2[1], ge + 0.5 * h * k2[2], gg + 0.5 * h * k2[3])
        k4 = rhs(t + h, ee + h * k3[0], eg + h * k3[1], ge + h * k3[2], gg + h * k3[3])
        ee_n = ee + h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        eg_n = eg + h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        ge_n = ge + h / 6 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        gg_n = gg + h / 6 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
        for w, (ws, we) in enumerate(windows):
            if t >= ws and axis[i + 1] <= we + 1e-15:
                win_acc[w] += 0.5 * h * (np.real(ee) + np.real(ee_n))
                win_len[w] += h
        ee, eg, ge, gg = ee_n, eg_n, ge_n, gg_n
    return win_acc / np.array(win_len)[:, None]


tau = 10e-9
N = 12
seq = PulseSequence.calibrated(N, tau, 1.6e-9)
freqs = np.linspace(-160e6, 160e6, 81)
omega_p = 0.3 * GAMMA
phases = np.array([0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi])

# single realization delta=0, batch over freq x phase
F, P = np.meshgrid(mhz_to_angular(freqs / 1e6), phases, indexing="ij")
det_b = F.ravel()
phi_b = P.ravel()
delta_b = np.zeros_like(det_b)
om_b = np.full_like(det_b, omega_p)

t0 = time.monotonic()
means = batched_trace_windows(
    seq, delta_b, om_b, det_b, phi_b, GAMMA,
    -seq.support_halfwidth, N * tau,
    [(2 * tau, 12 * tau)], tau / 100, 1.6e-9 / 40, turn_on=0.0,
)
t1 = time.monotonic()
curve = means[0].reshape(len(freqs), 4).mean(axis=1)
print(f"batched probe scan (81 freq x 4 phases): {t1-t0:.2f}s")
base = np.median(curve)
for i in range(0, 81, 2):
    bar = "#" * int(60 * curve[i] / curve.max())
    print(f"  {freqs[i]/1e6:7.1f} MHz  {curve[i]:.5f} {bar}")
