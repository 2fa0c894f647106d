"""Shared domain types and unit conventions.

All internal quantities are angular frequencies (rad/s) and times in
seconds.  MHz and ns appear only at external interfaces (config files,
CSV output, CLI flags); convert once at the boundary with the helpers
below to avoid stray factors of 2*pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

GAUSSIAN_FWHM_FACTOR = 2.0 * math.sqrt(2.0 * math.log(2.0))

# Tolerances baked into the type invariants.
_TRACE_TOL = 1e-9
_POSITIVITY_TOL = 1e-9
_POPULATION_TOL = 1e-6


def mhz_to_angular(f_mhz):
    """Convert a frequency in MHz to an angular frequency in rad/s."""
    return 2.0 * math.pi * 1e6 * f_mhz


def angular_to_mhz(omega):
    """Convert an angular frequency in rad/s to MHz."""
    return omega / (2.0 * math.pi * 1e6)


def ns_to_s(t_ns):
    """Convert nanoseconds to seconds."""
    return t_ns * 1e-9


def s_to_ns(t_s):
    """Convert seconds to nanoseconds."""
    return t_s * 1e9


def fwhm_to_sigma(fwhm):
    """Standard deviation of a Gaussian with the given full width at half maximum.

    Parameters
    ----------
    fwhm : float
        Full width at half maximum (any unit; the result carries the same unit).

    Returns
    -------
    float
        fwhm / (2 * sqrt(2 * ln 2)).
    """
    if fwhm < 0:
        raise ValueError(f"fwhm must be >= 0, got {fwhm}")
    return fwhm / GAUSSIAN_FWHM_FACTOR


def sigma_to_fwhm(sigma):
    """Inverse of :func:`fwhm_to_sigma`."""
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    return sigma * GAUSSIAN_FWHM_FACTOR


def lifetime_limit_fwhm(gamma):
    """FWHM in Hz of the natural Lorentzian line of a decaying transition.

    Parameters
    ----------
    gamma : float
        Population decay rate in 1/s.

    Returns
    -------
    float
        gamma / (2 * pi), the narrowest linewidth the transition supports.
    """
    if gamma <= 0:
        raise ValueError(f"decay rate must be > 0, got {gamma}")
    return gamma / (2.0 * math.pi)


@dataclass(frozen=True)
class DensityMatrix:
    """2x2 density matrix of the two-level system.

    Only the excited population and the e-g coherence are stored; the
    ground population and the g-e coherence follow from trace one and
    Hermiticity, which therefore hold by construction.
    """

    rho_ee: float
    rho_eg: complex

    def __post_init__(self):
        ee = float(self.rho_ee)
        if not (-_POPULATION_TOL <= ee <= 1.0 + _POPULATION_TOL):
            raise ValueError(f"rho_ee = {ee} outside [0, 1]")
        ee_c = min(max(ee, 0.0), 1.0)
        mag2 = abs(complex(self.rho_eg)) ** 2
        if mag2 > ee_c * (1.0 - ee_c) + _POSITIVITY_TOL:
            raise ValueError(
                f"positivity violated: |rho_eg|^2 = {mag2} > "
                f"rho_ee * rho_gg = {ee_c * (1.0 - ee_c)}"
            )
        object.__setattr__(self, "rho_ee", ee)
        object.__setattr__(self, "rho_eg", complex(self.rho_eg))

    @property
    def rho_gg(self) -> float:
        return 1.0 - self.rho_ee

    @property
    def rho_ge(self) -> complex:
        return self.rho_eg.conjugate()

    @classmethod
    def excited(cls) -> "DensityMatrix":
        return cls(1.0, 0.0)

    @classmethod
    def ground(cls) -> "DensityMatrix":
        return cls(0.0, 0.0)

    @classmethod
    def superposition(cls, phase: float = 0.0) -> "DensityMatrix":
        """Equal-weight coherent superposition with coherence phase `phase`."""
        return cls(0.5, 0.5 * complex(math.cos(phase), math.sin(phase)))

    def as_vector(self) -> np.ndarray:
        """Flatten to the (rho_ee, rho_eg, rho_ge, rho_gg) component order."""
        return np.array(
            [self.rho_ee, self.rho_eg, self.rho_ge, self.rho_gg], dtype=complex
        )

    @classmethod
    def from_vector(cls, u) -> "DensityMatrix":
        """Build from a 4-vector, re-symmetrizing and restoring trace one."""
        ee = float(np.real(u[0]))
        trace = float(np.real(u[0] + u[3]))
        ee = ee + 0.5 * (1.0 - trace)
        eg = 0.5 * (complex(u[1]) + complex(u[2]).conjugate())
        return cls(ee, eg)


@dataclass(frozen=True)
class PulseSequence:
    """Periodic train of truncated-Gaussian drive pulses in the carrier frame.

    Pulse centers sit at k * interpulse_delay for k = 0 .. n_pulses - 1.
    The envelope is Omega_peak * exp(-(t - t_k)^2 / (2 sigma_t^2)) inside
    |t - t_k| <= support_halfwidth and zero outside, with
    sigma_t = envelope_fwhm / (2 sqrt(2 ln 2)).

    Attributes
    ----------
    n_pulses : int
        Number of pulses in the train.
    interpulse_delay : float
        Pulse period tau in seconds.
    envelope_fwhm : float
        FWHM of the Gaussian envelope in seconds.
    peak_amplitude : float
        Peak Rabi amplitude in rad/s.  Use :func:`dynamics.calibrate_pulse_amplitude`
        or :meth:`calibrated` so the pulse area matches ``rotation_angle``.
    rotation_angle : float
        Target time-integrated pulse area in radians.
    support_halfwidth : float
        Truncation half-width of the envelope in seconds.
    """

    n_pulses: int
    interpulse_delay: float
    envelope_fwhm: float
    peak_amplitude: float
    rotation_angle: float = math.pi
    support_halfwidth: float = 0.0

    def __post_init__(self):
        if self.n_pulses < 1:
            raise ValueError("n_pulses must be >= 1")
        if self.envelope_fwhm <= 0:
            raise ValueError("envelope_fwhm must be > 0")
        if self.support_halfwidth <= 0:
            object.__setattr__(
                self, "support_halfwidth", 3.0 * fwhm_to_sigma(self.envelope_fwhm)
            )
        if self.interpulse_delay <= 2.0 * self.support_halfwidth:
            raise ValueError(
                "interpulse_delay must exceed the envelope support width "
                f"({self.interpulse_delay} <= {2.0 * self.support_halfwidth})"
            )
        if self.peak_amplitude < 0:
            raise ValueError("peak_amplitude must be >= 0")

    @property
    def sigma_t(self) -> float:
        return fwhm_to_sigma(self.envelope_fwhm)

    @property
    def centers(self) -> np.ndarray:
        return np.arange(self.n_pulses) * self.interpulse_delay

    @property
    def duration(self) -> float:
        """Nominal sequence horizon n_pulses * tau."""
        return self.n_pulses * self.interpulse_delay

    @classmethod
    def calibrated(
        cls,
        n_pulses: int,
        interpulse_delay: float,
        envelope_fwhm: float,
        rotation_angle: float = math.pi,
        support_sigmas: float = 3.0,
    ) -> "PulseSequence":
        """Build a sequence whose truncated pulse area equals ``rotation_angle``."""
        from .dynamics import calibrate_pulse_amplitude

        support = support_sigmas * fwhm_to_sigma(envelope_fwhm)
        if rotation_angle == 0.0:
            peak = 0.0
        else:
            peak = calibrate_pulse_amplitude(envelope_fwhm, rotation_angle, support)
        return cls(
            n_pulses=n_pulses,
            interpulse_delay=interpulse_delay,
            envelope_fwhm=envelope_fwhm,
            peak_amplitude=peak,
            rotation_angle=rotation_angle,
            support_halfwidth=support,
        )


@dataclass(frozen=True)
class DetuningModel:
    """Static-per-realization detuning drawn from a Gaussian distribution.

    Spectral diffusion is slow compared to one pulse sequence, so each
    realization sees a single constant detuning; the ensemble is the set
    of draws from Normal(mean, sigma).

    Attributes
    ----------
    mean : float
        Center detuning Delta_0 in rad/s.
    sigma : float
        Standard deviation sigma_Delta in rad/s (0 for a deterministic model).
    n_realizations : int
        Number of Monte-Carlo draws.  Ignored (treated as 1) when sigma == 0.
    seed : int
        Seed for the per-realization random substreams.
    """

    mean: float = 0.0
    sigma: float = 0.0
    n_realizations: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")

    def draws(self) -> np.ndarray:
        """Detuning per realization, reproducible and order-independent.

        Each realization gets its own seed substream, so the draws do not
        depend on how work is later distributed over workers.
        """
        if self.sigma == 0.0:
            return np.array([self.mean])
        seqs = np.random.SeedSequence(self.seed).spawn(self.n_realizations)
        return np.array(
            [
                self.mean + self.sigma * np.random.default_rng(s).standard_normal()
                for s in seqs
            ]
        )


@dataclass(frozen=True)
class EmitterParams:
    """Emitter constants: spontaneous decay rate and optional dark-state loss.

    The dark-state channel is not part of the coherent dynamics; it enters
    only as a multiplicative signal envelope in the trace model.
    """

    decay_rate: float
    dark_decay_time: float | None = None

    def __post_init__(self):
        # Zero is allowed so the closed-form rotation and echo checks can
        # switch spontaneous decay off.
        if self.decay_rate < 0:
            raise ValueError("decay_rate must be >= 0")
        if self.dark_decay_time is not None and self.dark_decay_time <= 0:
            raise ValueError("dark_decay_time must be > 0 when present")

    @classmethod
    def from_lifetime(
        cls, lifetime: float, dark_decay_time: float | None = None
    ) -> "EmitterParams":
        return cls(decay_rate=1.0 / lifetime, dark_decay_time=dark_decay_time)


@dataclass(frozen=True)
class Spectrum:
    """Frequency-resolved result of one spectrum computation.

    Attributes
    ----------
    frequencies : ndarray
        Detuning from the pulse carrier in Hz, strictly increasing.
    p1 : ndarray
        Stimulated-emission spectrum.
    p2 : ndarray
        Direct-absorption spectrum.
    q : ndarray
        Net absorption, q = p2 - p1.
    stderr : ndarray
        Ensemble standard error of q (zeros for deterministic runs).
    """

    frequencies: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    q: np.ndarray
    stderr: np.ndarray = field(default=None)

    def __post_init__(self):
        freqs = np.asarray(self.frequencies, dtype=float)
        object.__setattr__(self, "frequencies", freqs)
        for name in ("p1", "p2", "q"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != freqs.shape:
                raise ValueError(f"{name} length does not match frequencies")
            object.__setattr__(self, name, arr)
        err = self.stderr
        err = np.zeros_like(freqs) if err is None else np.asarray(err, dtype=float)
        if err.shape != freqs.shape:
            raise ValueError("stderr length does not match frequencies")
        object.__setattr__(self, "stderr", err)
        if freqs.size > 1 and not np.all(np.diff(freqs) > 0):
            raise ValueError("frequencies must be strictly increasing")

    @property
    def grid_step(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])

    def scaled(self, factor: float) -> "Spectrum":
        """Return a copy with all spectral values multiplied by `factor`."""
        return Spectrum(
            self.frequencies,
            self.p1 * factor,
            self.p2 * factor,
            self.q * factor,
            self.stderr * abs(factor),
        )
