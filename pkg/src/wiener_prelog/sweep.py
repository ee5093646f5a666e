"""SNR sweeps, rate aggregation and pre-log slope fits.

Seeds are derived hierarchically: master seed -> point index (position in
the sorted SNR list) -> replicate index.  One simulation pass per
replicate feeds both the amplitude and the phase estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import amp_rate as amp
from . import phase_rate as ph
from .channel import ChannelParams, make_params, simulate_statistics
from .modulation import sample_inputs
from .montecarlo import RateEstimate, child_sequence, map_replicates, replicate_rng

DEFAULT_SNR_DB = (40.0, 50.0, 60.0, 70.0, 80.0)


@dataclass(frozen=True)
class SweepConfig:
    beta: float = 1.0
    snr_db_list: tuple = DEFAULT_SNR_DB
    n_symbols: int = 2000
    replicates: int = 8
    seed: int = 0
    alpha_policy: ph.AlphaPolicy = field(default_factory=ph.AlphaPolicy)
    oversampling: int | str = "schedule"
    workers: int = 1

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if len(self.snr_db_list) == 0:
            raise ValueError("need at least one SNR point")
        if self.n_symbols < 2:
            raise ValueError("n_symbols must be >= 2")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def params(self, snr_db: float) -> ChannelParams:
        return make_params(self.beta, snr_db, self.oversampling)


@dataclass(frozen=True)
class SweepPoint:
    snr_db: float
    snr: float
    L: int
    delta: float
    alpha_used: float
    amp_rate: RateEstimate
    phase_rate: RateEstimate
    total_rate_nats: float
    ecos: float
    ecos_stderr: float
    ecos_bound: float
    amp_analytic: float
    phase_analytic_paper_alpha: float
    phase_asymptote: float
    amp_asymptote: float
    # phase bound re-scored at alpha = SNR * Delta, for the analytic comparison
    phase_rate_paper_alpha: RateEstimate
    flagged: int = 0


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    stderr_slope: float
    points_used: int
    halfwidth95: float


def _replicate(params: ChannelParams, n_symbols: int, seed, index: int):
    rng = replicate_rng(seed, index)
    x = sample_inputs(params, n_symbols, rng)
    st = simulate_statistics(params, x, rng)
    amp_terms = amp.amp_log_ratios(st.energy, np.abs(x), params)
    cos, flagged = ph.cos_errors(x, st.first, st.last, params.delta)
    return amp_terms, cos, flagged


def _or_nan(fn, *args):
    try:
        return fn(*args)
    except ph.NotApplicableError:
        return math.nan


def run_point(config: SweepConfig, snr_db: float, master_seed=None, point_index: int = 0) -> SweepPoint:
    """Estimate all rates and reference values at one SNR."""
    params = config.params(snr_db)
    seed = child_sequence(config.seed if master_seed is None else master_seed, point_index)
    n = config.n_symbols
    reps = map_replicates(lambda i: _replicate(params, n, seed, i), config.replicates, config.workers)

    amp_est = amp.rate_from_terms([r[0] for r in reps], n)
    phase = ph.phase_result([r[1] for r in reps], n, config.alpha_policy, params, sum(r[2] for r in reps))
    paper_alpha = phase.at_alpha(params.snr_delta)

    return SweepPoint(
        snr_db=float(snr_db),
        snr=params.snr,
        L=params.oversampling,
        delta=params.delta,
        alpha_used=phase.alpha,
        amp_rate=amp_est,
        phase_rate=phase.rate,
        total_rate_nats=amp_est.mean_nats + phase.rate.mean_nats,
        ecos=phase.ecos,
        ecos_stderr=phase.ecos_stderr,
        ecos_bound=_or_nan(ph.ecos_lower_bound, params),
        amp_analytic=amp.aux_channel_information(params),
        phase_analytic_paper_alpha=_or_nan(ph.analytic_phase_bound, params, params.snr_delta),
        phase_asymptote=ph.phase_asymptote(params.snr, params.beta),
        amp_asymptote=amp.amp_asymptote(params.snr),
        phase_rate_paper_alpha=paper_alpha.rate,
        flagged=phase.flagged,
    )


def sweep_plan(config: SweepConfig):
    """(point_index, snr_db) pairs in emission order."""
    return list(enumerate(sorted(float(s) for s in config.snr_db_list)))


def run_sweep(config: SweepConfig) -> list[SweepPoint]:
    return [run_point(config, snr_db, config.seed, i) for i, snr_db in sweep_plan(config)]


_FIELDS = {
    "amp": lambda p: p.amp_rate.mean_nats,
    "phase": lambda p: p.phase_rate.mean_nats,
    "total": lambda p: p.total_rate_nats,
}


def fit_prelog(points, field: str = "total") -> SlopeFit:
    """OLS slope of a rate (nats) against ln SNR."""
    if field not in _FIELDS:
        raise ValueError(f"unknown field {field!r}; expected one of {sorted(_FIELDS)}")
    points = list(points)
    if len(points) < 3:
        raise ValueError("need at least 3 points to fit a slope")
    x = np.log([p.snr for p in points])
    y = np.array([_FIELDS[field](p) for p in points])
    return fit_line(x, y)


def fit_line(x, y) -> SlopeFit:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise ValueError("need at least 3 points to fit a slope")
    res = stats.linregress(x, y)
    t = stats.t.ppf(0.975, len(x) - 2)
    return SlopeFit(float(res.slope), float(res.intercept), float(res.stderr), len(x), float(t * res.stderr))
