"""Drive envelope evaluation and master-equation integration.

The four coupled equations for (rho_ee, rho_eg, rho_ge, rho_gg) are linear,
so one fixed time step maps states through a 4x4 transfer matrix.  All
integration here is explicit fourth-order Runge-Kutta on a dual-step axis:
a fine substep inside the pulse support (the only fast feature) and a
coarser base step elsewhere.  The same transfer matrices propagate the
two-time correlation seeds in the spectra module, which is what makes the
ensemble runs cheap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core import DensityMatrix, EmitterParams, PulseSequence, fwhm_to_sigma

_POPULATION_TOL = 1e-6
_MIN_FWHM_SUBSTEPS = 20


class IntegrationError(RuntimeError):
    """Raised when a step leaves the physically admissible state region."""


def pulse_envelope(t, seq: PulseSequence | None):
    """Instantaneous Rabi amplitude of the pulse train at time(s) ``t``.

    Pulse supports never overlap (guaranteed by the PulseSequence
    invariant), so only the nearest pulse center contributes.

    Parameters
    ----------
    t : float or ndarray
        Time(s) in seconds.
    seq : PulseSequence or None
        None (or a zero-amplitude sequence) means no drive.

    Returns
    -------
    float or ndarray
        Amplitude in rad/s, zero outside the truncated supports.
    """
    t_arr = np.asarray(t, dtype=float)
    if seq is None or seq.peak_amplitude == 0.0:
        out = np.zeros_like(t_arr)
        return out if t_arr.ndim else 0.0
    k = np.clip(np.round(t_arr / seq.interpulse_delay), 0, seq.n_pulses - 1)
    dt = t_arr - k * seq.interpulse_delay
    inside = np.abs(dt) <= seq.support_halfwidth
    env = np.where(
        inside,
        seq.peak_amplitude * np.exp(-0.5 * (dt / seq.sigma_t) ** 2),
        0.0,
    )
    return env if t_arr.ndim else float(env)


def calibrate_pulse_amplitude(
    envelope_fwhm: float, rotation_angle: float, support_halfwidth: float
) -> float:
    """Peak amplitude for which the truncated pulse area equals the target angle.

    The area of a Gaussian truncated at +-s is
    peak * sigma_t * sqrt(2 pi) * erf(s / (sigma_t sqrt(2))), so the peak
    follows in closed form; truncation makes it slightly larger than the
    untruncated value.

    Parameters
    ----------
    envelope_fwhm : float
        Envelope FWHM in seconds.
    rotation_angle : float
        Target pulse area in radians.
    support_halfwidth : float
        Truncation half-width in seconds.

    Returns
    -------
    float
        Peak Rabi amplitude in rad/s.
    """
    if envelope_fwhm <= 0:
        raise ValueError("envelope_fwhm must be > 0")
    if rotation_angle <= 0:
        raise ValueError("rotation_angle must be > 0")
    if support_halfwidth <= 0:
        raise ValueError("support_halfwidth must be > 0")
    sigma_t = fwhm_to_sigma(envelope_fwhm)
    full_area = sigma_t * math.sqrt(2.0 * math.pi)
    covered = math.erf(support_halfwidth / (sigma_t * math.sqrt(2.0)))
    return rotation_angle / (full_area * covered)


@dataclass(frozen=True)
class TimeGrid:
    """Dual-resolution integration axis.

    ``pulse_substep`` is used wherever the pulse envelope is nonzero,
    ``base_step`` elsewhere.
    """

    t_start: float
    t_end: float
    base_step: float
    pulse_substep: float

    def __post_init__(self):
        if self.t_end <= self.t_start:
            raise ValueError("t_end must exceed t_start")
        if self.base_step <= 0 or self.pulse_substep <= 0:
            raise ValueError("steps must be > 0")
        if self.pulse_substep > self.base_step:
            raise ValueError("pulse_substep must not exceed base_step")

    @classmethod
    def for_sequence(
        cls,
        seq: PulseSequence,
        t_start: float = 0.0,
        t_end: float | None = None,
        base_step: float | None = None,
        pulse_substep: float | None = None,
    ) -> "TimeGrid":
        """Default grid for a pulse train: base tau/200, substep fwhm/40."""
        if t_end is None:
            t_end = seq.duration
        if base_step is None:
            base_step = seq.interpulse_delay / 200.0
        if pulse_substep is None:
            pulse_substep = seq.envelope_fwhm / 40.0
        pulse_substep = min(pulse_substep, base_step)
        return cls(t_start, t_end, base_step, pulse_substep)

    def check_resolves(self, seq: PulseSequence | None) -> None:
        if seq is None or seq.peak_amplitude == 0.0:
            return
        if seq.envelope_fwhm / self.pulse_substep < _MIN_FWHM_SUBSTEPS:
            raise ValueError(
                "pulse_substep too coarse: need at least "
                f"{_MIN_FWHM_SUBSTEPS} substeps per envelope FWHM"
            )


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered density-matrix samples along one integration run.

    ``values`` holds rows (rho_ee, rho_eg, rho_ge, rho_gg); ``states``
    materializes them as DensityMatrix objects on demand.
    """

    times: np.ndarray
    values: np.ndarray

    @property
    def rho_ee(self) -> np.ndarray:
        return self.values[:, 0].real

    @property
    def rho_eg(self) -> np.ndarray:
        return self.values[:, 1]

    @cached_property
    def states(self) -> tuple:
        return tuple(DensityMatrix.from_vector(v) for v in self.values)

    def index_of(self, t: float) -> int:
        """Index of the sample at time ``t`` (must lie on the axis)."""
        i = int(np.searchsorted(self.times, t))
        for j in (i - 1, i, i + 1):
            if 0 <= j < len(self.times) and abs(self.times[j] - t) <= 1e-12 + 1e-9 * abs(t):
                return j
        raise ValueError(f"time {t} not on the trajectory axis")


def _generator_parts(delta: float, gamma: float):
    """Drift and drive parts of the linear generator on (ee, eg, ge, gg)."""
    drift = np.array(
        [
            [-gamma, 0.0, 0.0, 0.0],
            [0.0, -1j * delta - 0.5 * gamma, 0.0, 0.0],
            [0.0, 0.0, 1j * delta - 0.5 * gamma, 0.0],
            [gamma, 0.0, 0.0, 0.0],
        ],
        dtype=complex,
    )
    drive = 0.5j * np.array(
        [
            [0.0, 1.0, -1.0, 0.0],
            [1.0, 0.0, 0.0, -1.0],
            [-1.0, 0.0, 0.0, 1.0],
            [0.0, -1.0, 1.0, 0.0],
        ],
        dtype=complex,
    )
    return drift, drive


def _rk4_transfer(times: np.ndarray, seq, delta: float, gamma: float) -> np.ndarray:
    """Per-step RK4 transfer matrices for the axis ``times``.

    Returns an (n_steps, 4, 4) array M with u(times[i+1]) = M[i] @ u(times[i]).
    Valid for any 2x2 complex matrix flattened to (ee, eg, ge, gg): the
    generator is linear, so correlation seeds propagate with the same M.
    """
    t0 = times[:-1]
    h = np.diff(times)
    drift, drive = _generator_parts(delta, gamma)

    def local_generator(t):
        om = np.asarray(pulse_envelope(t, seq), dtype=float)
        return drift[None, :, :] + om[:, None, None] * drive[None, :, :]

    lb = local_generator(t0)
    lm = local_generator(t0 + 0.5 * h)
    le = local_generator(t0 + h)
    eye = np.eye(4, dtype=complex)[None, :, :]
    hh = h[:, None, None]
    k1 = lb
    k2 = lm @ (eye + 0.5 * hh * k1)
    k3 = lm @ (eye + 0.5 * hh * k2)
    k4 = le @ (eye + hh * k3)
    return eye + (hh / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _build_axis(
    t_start: float,
    t_end: float,
    seq: PulseSequence | None,
    base_step: float,
    pulse_substep: float,
) -> np.ndarray:
    """Integration axis with fine steps across every pulse support."""
    windows = []
    if seq is not None and seq.peak_amplitude > 0.0:
        for c in seq.centers:
            a = c - seq.support_halfwidth
            b = c + seq.support_halfwidth
            if b <= t_start or a >= t_end:
                continue
            windows.append((max(a, t_start), min(b, t_end)))
    bounds = sorted({t_start, t_end, *(x for w in windows for x in w)})
    pieces = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        if b - a <= 0.0:
            continue
        mid = 0.5 * (a + b)
        step = pulse_substep if any(wa <= mid <= wb for wa, wb in windows) else base_step
        n = max(1, math.ceil((b - a) / step - 1e-12))
        pieces.append(np.linspace(a, b, n + 1)[:-1])
    pieces.append(np.array([bounds[-1]]))
    return np.concatenate(pieces)


def _check_populations(values: np.ndarray) -> None:
    pops = values[:, (0, 3)].real
    if pops.min() < -_POPULATION_TOL or pops.max() > 1.0 + _POPULATION_TOL:
        raise IntegrationError(
            f"population left [0, 1]: min {pops.min():.3e}, max {pops.max():.3e}"
        )


def step(
    rho: DensityMatrix,
    t: float,
    dt: float,
    delta: float,
    seq: PulseSequence | None,
    params: EmitterParams,
) -> DensityMatrix:
    """One RK4 step of the master equation.

    The returned state is re-symmetrized (rho_ge = conj(rho_eg)) and has
    its trace restored to one; a step whose populations leave
    [-1e-6, 1 + 1e-6] raises IntegrationError.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    transfer = _rk4_transfer(np.array([t, t + dt]), seq, delta, params.decay_rate)[0]
    u = transfer @ rho.as_vector()
    _check_populations(u[None, :])
    return DensityMatrix.from_vector(u)


def evolve(
    rho0: DensityMatrix,
    grid: TimeGrid,
    delta: float,
    seq: PulseSequence | None,
    params: EmitterParams,
) -> Trajectory:
    """Integrate the master equation across ``grid`` for one static detuning.

    Parameters
    ----------
    rho0 : DensityMatrix
        State at ``grid.t_start``.
    grid : TimeGrid
        Integration axis specification.
    delta : float
        Static detuning of this realization in rad/s.
    seq : PulseSequence or None
        Drive; None integrates free evolution.
    params : EmitterParams
        Decay rate (the dark channel is ignored here).

    Returns
    -------
    Trajectory
        Sampled at every integration point, deterministic for fixed inputs.
    """
    grid.check_resolves(seq)
    times = _build_axis(grid.t_start, grid.t_end, seq, grid.base_step, grid.pulse_substep)
    transfers = _rk4_transfer(times, seq, delta, params.decay_rate)
    values = np.empty((len(times), 4), dtype=complex)
    u = rho0.as_vector()
    values[0] = u
    for i in range(len(transfers)):
        u = transfers[i] @ u
        values[i + 1] = u
    _check_populations(values)
    return Trajectory(times=times, values=values)


def echo_check(
    delta: float,
    tau: float,
    params: EmitterParams,
    envelope_fwhm: float | None = None,
) -> float:
    """Phase residual of a two-interval echo around a single inverting pulse.

    An equal superposition evolves freely for one interval, is flipped by
    a calibrated pulse, and evolves for a second interval; the detuning
    phase picked up before the flip is unwound after it.  Returns
    arg(rho_eg) at the end minus arg(rho_eg) at the start, which vanishes
    for instantaneous pulses.  Requires decay switched off.
    """
    if params.decay_rate != 0.0:
        raise ValueError("echo_check requires decay_rate == 0")
    if envelope_fwhm is None:
        envelope_fwhm = tau / 1000.0
    seq = PulseSequence.calibrated(
        n_pulses=1,
        interpulse_delay=tau,
        envelope_fwhm=envelope_fwhm,
        rotation_angle=math.pi,
    )
    # Single pulse centered at t = 0; run from -tau to +tau so the flip
    # sits exactly between the two free intervals.
    grid = TimeGrid(
        t_start=-tau,
        t_end=tau,
        base_step=tau / 400.0,
        pulse_substep=envelope_fwhm / 40.0,
    )
    rho0 = DensityMatrix.superposition()
    traj = evolve(rho0, grid, delta, seq, params)
    phase = np.angle(traj.values[-1, 1]) - np.angle(traj.values[0, 1])
    return float((phase + math.pi) % (2.0 * math.pi) - math.pi)
