"""Stimulated-emission, direct-absorption and net absorption spectra.

Two-time correlators are propagated with the quantum regression theorem:
the master-equation generator is linear, so a correlation seed (a general
2x2 complex matrix) evolves in the delay coordinate theta through exactly
the same per-step transfer matrices as the density matrix itself.  The
observation window [0, T] is discretized on a recording grid of spacing
``theta_step``; every recording point seeds one correlator row and all
active rows advance together, so a full (t, theta) field costs one sweep
over the axis.

The spectra are the windowed transforms

    P_i(omega) = Re  integral_0^T dt  integral_0^(T-t) dtheta
                     C_i(t, theta) exp(-i omega theta)

evaluated as a theta-collapsed sum D(theta) = integral C(t, theta) dt
followed by a direct transform on the requested frequency list.  Both
sums use trapezoid end weights.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import DensityMatrix, DetuningModel, EmitterParams, PulseSequence, Spectrum
from .dynamics import Trajectory, _build_axis, _check_populations, _rk4_transfer

_GRID_REL_TOL = 1e-9


@dataclass(frozen=True)
class CorrelatorGrid:
    """Discretization of the (t, theta) correlation domain.

    Attributes
    ----------
    horizon : float
        Total observation time T in seconds (typically n_pulses * tau).
    theta_max : float
        Largest delay kept in the transform, <= horizon.
    theta_step : float
        Recording step of the delay coordinate; must resolve the fastest
        requested frequency (theta_step <= 1 / (10 f_max)).
    t_step : float
        Spacing of correlator seed times; an integer multiple of theta_step.
    base_step, pulse_substep : float or None
        Integration substeps between recording points; None picks
        tau/200 and fwhm/40 from the sequence (or horizon/2000 without one).
    """

    horizon: float
    theta_max: float
    theta_step: float
    t_step: float
    base_step: float | None = None
    pulse_substep: float | None = None

    def __post_init__(self):
        if self.horizon <= 0 or self.theta_step <= 0 or self.t_step <= 0:
            raise ValueError("horizon and steps must be > 0")
        if self.theta_max > self.horizon * (1.0 + _GRID_REL_TOL):
            raise ValueError("theta_max must not exceed horizon")
        m = self.t_step / self.theta_step
        if abs(m - round(m)) > 1e-6 or round(m) < 1:
            raise ValueError("t_step must be a positive integer multiple of theta_step")
        k = self.horizon / self.theta_step
        if abs(k - round(k)) > 1e-6:
            raise ValueError("horizon must be an integer number of theta_steps")

    @property
    def n_recording(self) -> int:
        """Number of recording intervals K; recording points are 0..K."""
        return int(round(self.horizon / self.theta_step))

    @property
    def seed_stride(self) -> int:
        return int(round(self.t_step / self.theta_step))

    @property
    def recording_times(self) -> np.ndarray:
        return np.arange(self.n_recording + 1) * self.theta_step

    @property
    def seed_times(self) -> np.ndarray:
        return self.recording_times[:: self.seed_stride]

    def check_resolves(self, freqs_hz: np.ndarray) -> None:
        f_max = float(np.max(np.abs(freqs_hz)))
        if f_max > 0 and self.theta_step > 0.1 / f_max * (1.0 + _GRID_REL_TOL):
            raise ValueError(
                f"theta_step {self.theta_step:.3e} s too coarse for "
                f"frequencies up to {f_max:.3e} Hz (need <= {0.1 / f_max:.3e} s)"
            )


def default_grid(
    seq: PulseSequence,
    freqs_hz,
    horizon: float | None = None,
    theta_step: float | None = None,
    t_step: float | None = None,
) -> CorrelatorGrid:
    """Correlator grid for a pulse train, sized to the frequency list."""
    tau = seq.interpulse_delay
    if horizon is None:
        horizon = seq.duration
    if theta_step is None:
        f_max = float(np.max(np.abs(np.asarray(freqs_hz, dtype=float))))
        target = tau / 20.0
        if f_max > 0:
            target = min(target, 0.1 / f_max)
        theta_step = horizon / math.ceil(horizon / target - 1e-12)
    if t_step is None:
        t_step = theta_step
    return CorrelatorGrid(
        horizon=horizon,
        theta_max=horizon,
        theta_step=theta_step,
        t_step=t_step,
        base_step=tau / 200.0,
        pulse_substep=seq.envelope_fwhm / 40.0,
    )


def free_decay_grid(
    params: EmitterParams,
    freqs_hz,
    horizon: float | None = None,
) -> CorrelatorGrid:
    """Correlator grid for undriven evolution, horizon ~ 10 lifetimes."""
    if horizon is None:
        if params.decay_rate <= 0:
            raise ValueError("free-decay horizon needs decay_rate > 0 or explicit value")
        horizon = 10.0 / params.decay_rate
    f_max = float(np.max(np.abs(np.asarray(freqs_hz, dtype=float))))
    target = horizon / 200.0
    if f_max > 0:
        target = min(target, 0.1 / f_max)
    theta_step = horizon / math.ceil(horizon / target - 1e-12)
    return CorrelatorGrid(
        horizon=horizon,
        theta_max=horizon,
        theta_step=theta_step,
        t_step=theta_step,
        base_step=theta_step / 4.0,
        pulse_substep=theta_step / 4.0,
    )


@dataclass(frozen=True)
class CorrelatorField:
    """Two-time correlator samples C(t, theta) on the recording grid.

    ``values[i, j]`` holds C(ts[i], thetas[j]); entries with
    ts[i] + thetas[j] > horizon lie outside the observation window and
    are zero (see :meth:`valid`).
    """

    ts: np.ndarray
    thetas: np.ndarray
    values: np.ndarray
    horizon: float

    def valid(self) -> np.ndarray:
        return (
            self.ts[:, None] + self.thetas[None, :]
            <= self.horizon * (1.0 + _GRID_REL_TOL)
        )


def _interval_transfers(grid: CorrelatorGrid, seq, delta: float, gamma: float):
    """Composed transfer matrix for each recording interval.

    Integrates with the dual-step axis inside each interval and collapses
    the substeps into a single 4x4 matrix per interval; intervals with the
    same substep count are folded in one batched pass.
    """
    rec = grid.recording_times
    base = grid.base_step
    psub = grid.pulse_substep
    if base is None:
        base = (
            seq.interpulse_delay / 200.0 if seq is not None else grid.horizon / 2000.0
        )
    if psub is None:
        psub = seq.envelope_fwhm / 40.0 if seq is not None else base
    psub = min(psub, base)

    sub_axes = [
        _build_axis(a, b, seq, base, psub) for a, b in zip(rec[:-1], rec[1:])
    ]
    counts = np.array([len(ax) - 1 for ax in sub_axes])
    full_axis = np.concatenate([ax[:-1] for ax in sub_axes] + [rec[-1:]])
    transfers = _rk4_transfer(full_axis, seq, delta, gamma)

    composed = np.empty((len(sub_axes), 4, 4), dtype=complex)
    offsets = np.concatenate([[0], np.cumsum(counts)])
    for n in np.unique(counts):
        idx = np.where(counts == n)[0]
        group = np.stack([transfers[offsets[i] : offsets[i] + n] for i in idx])
        acc = group[:, 0]
        for j in range(1, n):
            acc = group[:, j] @ acc
        composed[idx] = acc
    return composed


def _propagate_recorded(composed: np.ndarray, rho0_vec: np.ndarray) -> np.ndarray:
    """Density-matrix 4-vectors at every recording point."""
    out = np.empty((len(composed) + 1, 4), dtype=complex)
    u = rho0_vec.astype(complex)
    out[0] = u
    for i in range(len(composed)):
        u = composed[i] @ u
        out[i + 1] = u
    _check_populations(out)
    return out


def _scan_correlator_pair(
    composed: np.ndarray, rho_rec: np.ndarray, stride: int, j_max: int
):
    """C1 and C2 fields from one sweep over the recording axis.

    Each seed row starts where the trajectory stands; all rows advance
    through the same interval transfer, and the sigma_+ readout is the
    (g, e) component of the propagated seed.
    """
    n_rec = len(composed)
    n_rows = n_rec // stride + 1
    c1 = np.zeros((n_rows, j_max + 1), dtype=complex)
    c2 = np.zeros((n_rows, j_max + 1), dtype=complex)
    active = np.zeros((4, 2 * n_rows), dtype=complex)

    for k in range(n_rec + 1):
        if k % stride == 0:
            i = k // stride
            ee, eg, ge, gg = rho_rec[k]
            # C2 seed rho * sigma_-, C1 seed sigma_- * rho
            active[:, 2 * i] = (eg, 0.0, gg, 0.0)
            active[:, 2 * i + 1] = (0.0, 0.0, ee, eg)
        rows = np.arange(k // stride + 1)
        js = k - rows * stride
        keep = js <= j_max
        rows, js = rows[keep], js[keep]
        c2[rows, js] = active[2, 2 * rows]
        c1[rows, js] = active[2, 2 * rows + 1]
        if k < n_rec:
            active = composed[k] @ active
    return c1, c2


def _transform(c: np.ndarray, grid: CorrelatorGrid, freqs_hz: np.ndarray) -> np.ndarray:
    """Windowed double-integral transform of one correlator field."""
    stride = grid.seed_stride
    n_rec = grid.n_recording
    n_rows, n_th = c.shape

    # Trapezoid weights in t; the upper limit T - theta shrinks with theta.
    last_row = (n_rec - np.arange(n_th)) // stride
    rows = np.arange(n_rows)[:, None]
    w_t = np.where(rows <= last_row[None, :], grid.t_step, 0.0)
    w_t = np.where((rows == 0) | (rows == last_row[None, :]), 0.5 * w_t, w_t)
    w_t[:, last_row == 0] = 0.0
    collapsed = (w_t * c).sum(axis=0)

    w_th = np.full(n_th, grid.theta_step)
    w_th[0] *= 0.5
    w_th[-1] *= 0.5
    omega = 2.0 * math.pi * np.asarray(freqs_hz, dtype=float)
    phases = np.exp(-1j * omega[:, None] * _thetas(grid)[None, :])
    return np.real(phases @ (collapsed * w_th))


def _thetas(grid: CorrelatorGrid) -> np.ndarray:
    j_max = int(round(grid.theta_max / grid.theta_step))
    return np.arange(min(j_max, grid.n_recording) + 1) * grid.theta_step


def evolve_for_correlators(
    rho0: DensityMatrix,
    delta: float,
    seq: PulseSequence | None,
    params: EmitterParams,
    grid: CorrelatorGrid,
) -> Trajectory:
    """Trajectory over the observation window sampled at recording points."""
    composed = _interval_transfers(grid, seq, delta, params.decay_rate)
    rho_rec = _propagate_recorded(composed, rho0.as_vector())
    return Trajectory(times=grid.recording_times, values=rho_rec)


def _fields_from_rho(delta, seq, params, grid, rho_rec):
    composed = _interval_transfers(grid, seq, delta, params.decay_rate)
    j_max = len(_thetas(grid)) - 1
    c1, c2 = _scan_correlator_pair(composed, rho_rec, grid.seed_stride, j_max)
    return c1, c2


def _rho_at_seed_times(traj: Trajectory, grid: CorrelatorGrid) -> np.ndarray:
    rec = grid.recording_times
    if traj.times[0] > rec[0] + _GRID_REL_TOL or traj.times[-1] < rec[-1] * (
        1.0 - _GRID_REL_TOL
    ) - _GRID_REL_TOL:
        raise ValueError("trajectory does not cover the correlation horizon")
    idx = [traj.index_of(t) for t in rec]
    return traj.values[idx]


def correlator_p2(
    traj: Trajectory,
    delta: float,
    seq: PulseSequence | None,
    params: EmitterParams,
    grid: CorrelatorGrid,
) -> CorrelatorField:
    """Absorption-side correlator <sigma_-(t) sigma_+(t + theta)>.

    Seeds rho(t) * sigma_- at every seed time of ``grid`` and propagates
    it in theta with the master-equation generator; the readout is
    Tr[sigma_+ Lambda].  At theta = 0 this equals rho_gg(t).
    """
    rho_rec = _rho_at_seed_times(traj, grid)
    _, c2 = _fields_from_rho(delta, seq, params, grid, rho_rec)
    return CorrelatorField(grid.seed_times, _thetas(grid), c2, grid.horizon)


def correlator_p1(
    traj: Trajectory,
    delta: float,
    seq: PulseSequence | None,
    params: EmitterParams,
    grid: CorrelatorGrid,
) -> CorrelatorField:
    """Emission-side correlator <sigma_+(t + theta) sigma_-(t)>.

    Same propagation as :func:`correlator_p2` with seed sigma_- * rho(t);
    at theta = 0 this equals rho_ee(t).
    """
    rho_rec = _rho_at_seed_times(traj, grid)
    c1, _ = _fields_from_rho(delta, seq, params, grid, rho_rec)
    return CorrelatorField(grid.seed_times, _thetas(grid), c1, grid.horizon)


def spectrum_single(
    delta: float,
    seq: PulseSequence | None,
    params: EmitterParams,
    grid: CorrelatorGrid,
    freqs_hz,
    rho0: DensityMatrix | None = None,
) -> Spectrum:
    """P1, P2 and Q for a single static detuning realization.

    The system starts in the excited state at t = 0 (the first pulse
    center) unless ``rho0`` overrides it.  Frequencies are detunings from
    the pulse carrier in Hz.
    """
    freqs = np.asarray(freqs_hz, dtype=float)
    grid.check_resolves(freqs)
    if rho0 is None:
        rho0 = DensityMatrix.excited()
    composed = _interval_transfers(grid, seq, delta, params.decay_rate)
    rho_rec = _propagate_recorded(composed, rho0.as_vector())
    j_max = len(_thetas(grid)) - 1
    c1, c2 = _scan_correlator_pair(composed, rho_rec, grid.seed_stride, j_max)
    p1 = _transform(c1, grid, freqs)
    p2 = _transform(c2, grid, freqs)
    return Spectrum(freqs, p1, p2, p2 - p1)


def _spectrum_worker(args):
    delta, seq, params, grid, freqs = args
    s = spectrum_single(delta, seq, params, grid, freqs)
    return np.stack([s.p1, s.p2])


def _run_realizations(deltas, seq, params, grid, freqs, n_workers):
    jobs = [(float(d), seq, params, grid, freqs) for d in deltas]
    if n_workers <= 1 or len(jobs) == 1:
        return [_spectrum_worker(j) for j in jobs]
    chunk = max(1, len(jobs) // (4 * n_workers))
    with ProcessPoolExecutor(max_workers=n_workers) as ex:
        return list(ex.map(_spectrum_worker, jobs, chunksize=chunk))


def ensemble_spectrum(
    model: DetuningModel,
    seq: PulseSequence | None,
    params: EmitterParams,
    grid: CorrelatorGrid,
    freqs_hz,
    mode: str = "mc",
    quadrature_order: int = 21,
    n_workers: int = 1,
) -> Spectrum:
    """Spectrum averaged over the spectral-diffusion ensemble.

    Parameters
    ----------
    model : DetuningModel
        Gaussian detuning distribution and draw count.
    mode : {"mc", "gauss-hermite"}
        Seeded Monte-Carlo draws (default) or deterministic Gauss-Hermite
        quadrature over the Gaussian; the latter returns zero stderr.
    quadrature_order : int
        Node count for the quadrature mode.
    n_workers : int
        Process count for the realization loop.  Results are reduced in
        realization order, so the output is identical for any value.

    Returns
    -------
    Spectrum
        Pointwise ensemble mean with the standard error of q.
    """
    freqs = np.asarray(freqs_hz, dtype=float)
    if model.sigma == 0.0:
        return spectrum_single(model.mean, seq, params, grid, freqs)

    if mode == "gauss-hermite":
        nodes, gh_w = np.polynomial.hermite.hermgauss(quadrature_order)
        deltas = model.mean + math.sqrt(2.0) * model.sigma * nodes
        weights = gh_w / math.sqrt(math.pi)
        results = _run_realizations(deltas, seq, params, grid, freqs, n_workers)
        stack = np.stack(results)
        mean = np.tensordot(weights, stack, axes=(0, 0))
        stderr = np.zeros_like(freqs)
    elif mode == "mc":
        deltas = model.draws()
        results = _run_realizations(deltas, seq, params, grid, freqs, n_workers)
        stack = np.stack(results)
        mean = stack.mean(axis=0)
        qs = stack[:, 1, :] - stack[:, 0, :]
        n = len(deltas)
        if n > 1:
            stderr = qs.std(axis=0, ddof=1) / math.sqrt(n)
        else:
            stderr = np.zeros_like(freqs)
    else:
        raise ValueError(f"unknown ensemble mode {mode!r}")

    p1, p2 = mean[0], mean[1]
    return Spectrum(freqs, p1, p2, p2 - p1, stderr)


def uncontrolled_reference(
    model: DetuningModel,
    params: EmitterParams,
    freqs_hz,
    grid: CorrelatorGrid | None = None,
    mode: str = "mc",
    quadrature_order: int = 21,
    n_workers: int = 1,
) -> Spectrum:
    """Ensemble spectrum with the drive switched off.

    The system still starts excited; for sigma well above the natural
    width the net absorption approaches a Gaussian of FWHM
    2 sqrt(2 ln 2) sigma centered on the mean detuning.
    """
    if grid is None:
        grid = free_decay_grid(params, freqs_hz)
    return ensemble_spectrum(
        model,
        None,
        params,
        grid,
        freqs_hz,
        mode=mode,
        quadrature_order=quadrature_order,
        n_workers=n_workers,
    )
