"""Achievable-rate lower bounds for the oversampled discrete-time Wiener phase-noise channel."""

from .amp_rate import amp_asymptote, estimate_amp_rate, log_aux_v, log_marginal_v, statistic_v
from .channel import ChannelParams, OutputBlock, PhasePath, make_params, sample_phase_path, simulate
from .modulation import InputSymbol, amp_sq_density, sample_input, sample_inputs, validate_power
from .montecarlo import RateEstimate
from .phase_rate import (
    AlphaPolicy,
    NotApplicableError,
    analytic_phase_bound,
    ecos_lower_bound,
    estimate_phase_rate,
    log_bessel_i0,
    phase_asymptote,
    phase_rate_bound,
    select_alpha,
    statistic_phase,
    tikhonov_logpdf,
)
from .sweep import SlopeFit, SweepConfig, SweepPoint, fit_prelog, run_point, run_sweep

__version__ = "0.1.0"
