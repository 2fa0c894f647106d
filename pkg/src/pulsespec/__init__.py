"""Pulsed spectral control of a noisy two-level emitter.

Simulates the driven-dissipative dynamics of a two-level system under a
periodic train of optical pi-pulses, computes stimulated-emission /
direct-absorption / net absorption spectra from two-time correlators,
averages over a spectral-diffusion ensemble, models the time-resolved
fluorescence of the probing sequence, and fits the resulting curves.
"""

from .core import (
    DensityMatrix,
    DetuningModel,
    EmitterParams,
    PulseSequence,
    Spectrum,
    angular_to_mhz,
    fwhm_to_sigma,
    lifetime_limit_fwhm,
    mhz_to_angular,
    ns_to_s,
    s_to_ns,
    sigma_to_fwhm,
)
from .dynamics import (
    IntegrationError,
    TimeGrid,
    Trajectory,
    calibrate_pulse_amplitude,
    echo_check,
    evolve,
    pulse_envelope,
    step,
)
from .spectra import (
    CorrelatorField,
    CorrelatorGrid,
    correlator_p1,
    correlator_p2,
    default_grid,
    ensemble_spectrum,
    evolve_for_correlators,
    free_decay_grid,
    spectrum_single,
    uncontrolled_reference,
)

__version__ = "0.1.0"
