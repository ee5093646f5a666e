"""Phase-modulation rate via a differential-phase statistic.

For k >= 2 the receiver forms

    Ytilde_k = (Y_{(k-1)L+1} / sqrt(Delta)) * conj(Y_{(k-1)L} / (X_{k-1} Delta)),

i.e. the first sample of block k de-rotated by a one-sample phase estimate
taken from the last sample of block k-1.  Scoring angle(Ytilde_k) with a
Tikhonov (von Mises) auxiliary channel of concentration alpha and a uniform
marginal gives the per-symbol bound

    -ln I0(alpha) + alpha * E[cos(angle(Ytilde_k) - Phi_{X,k})].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, simulate_statistics
from .modulation import sample_inputs
from .montecarlo import RateEstimate, map_replicates, replicate_rng

SERIES_CUTOFF = 25.0
_ASYMPTOTIC_TERMS = 12
_LOG_2PI = math.log(2.0 * math.pi)


class NotApplicableError(ValueError):
    """The closed-form bound requires SNR * Delta > 2."""


def _log_i0_series(x: float) -> float:
    # ln(sum_k (x^2/4)^k / (k!)^2), dropping the leading 1 for precision near 0
    q = 0.25 * x * x
    term, tail = 1.0, 0.0
    k = 0
    while True:
        k += 1
        term *= q / (k * k)
        tail += term
        if term <= 1e-17 * (1.0 + tail):
            return math.log1p(tail)


def _log_i0_asymptotic(x: float) -> float:
    # I0(x) ~ e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! 8^k x^k)
    term, tail = 1.0, 0.0
    for k in range(1, _ASYMPTOTIC_TERMS + 1):
        term *= (2 * k - 1) ** 2 / (8.0 * k * x)
        tail += term
    return x - 0.5 * (_LOG_2PI + math.log(x)) + math.log1p(tail)


def log_bessel_i0(alpha):
    """ln I0(alpha) for alpha >= 0, relative error ~1e-15.

    Power series below ``SERIES_CUTOFF``, large-argument expansion above.
    Accepts scalars or arrays.
    """
    a = np.asarray(alpha, dtype=float)
    if np.any(a < 0) or np.any(np.isnan(a)):
        raise ValueError("log_bessel_i0 needs alpha >= 0")
    out = np.empty_like(a)
    for idx, x in np.ndenumerate(a):
        if x == 0.0:
            out[idx] = 0.0
        elif math.isinf(x):
            out[idx] = math.inf
        elif x < SERIES_CUTOFF:
            out[idx] = _log_i0_series(x)
        else:
            out[idx] = _log_i0_asymptotic(x)
    return float(out) if out.ndim == 0 else out


def tikhonov_logpdf(phi_y, phi_x, alpha):
    """log of exp(alpha cos(phi_y - phi_x)) / (2 pi I0(alpha))."""
    if not np.all(np.asarray(alpha) > 0):
        raise ValueError("alpha must be positive")
    return alpha * np.cos(np.asarray(phi_y) - np.asarray(phi_x)) - _LOG_2PI - log_bessel_i0(alpha)


@dataclass(frozen=True)
class PhaseStatistic:
    phi_tilde: float
    cos_err: float


def phase_statistics(last_prev, x_prev, first, phase_cur, delta: float):
    """Vectorized differential-phase statistic.

    Returns ``(ytilde, cos_err, valid)``.  ``cos_err`` is
    Re(Ytilde e^{-j Phi_X}) / |Ytilde|; samples with Ytilde == 0 are marked
    invalid and carry NaN.
    """
    estimate = np.asarray(last_prev) / (np.asarray(x_prev) * delta)
    ytilde = np.asarray(first) / math.sqrt(delta) * np.conj(estimate)
    mag = np.abs(ytilde)
    valid = mag > 0
    with np.errstate(invalid="ignore", divide="ignore"):
        cos_err = np.where(valid, (ytilde * np.exp(-1j * np.asarray(phase_cur))).real / mag, np.nan)
    return ytilde, cos_err, valid


def statistic_phase(prev_last_sample, prev_symbol, first_sample, current_phase, params: ChannelParams) -> PhaseStatistic:
    """Statistic for a single symbol pair.

    ``prev_symbol`` is the complex input X_{k-1}; ``current_phase`` is
    Phi_{X,k}, used only to form ``cos_err``.
    """
    if prev_symbol == 0:
        raise ValueError("previous symbol must be nonzero")
    yt, c, valid = phase_statistics(prev_last_sample, prev_symbol, first_sample, current_phase, params.delta)
    if not valid:
        raise ZeroDivisionError("differential statistic is exactly zero")
    return PhaseStatistic(float(np.angle(yt)), float(c))


def phase_rate_bound(alpha, ecos):
    """-ln I0(alpha) + alpha * ecos, in nats."""
    if not np.all(np.asarray(alpha) > 0):
        raise ValueError("alpha must be positive")
    return -log_bessel_i0(alpha) + alpha * ecos


def phase_bound_terms(alpha, sigma_w_sq, snr_delta):
    """(1/2) ln alpha - alpha sigma_W^2 / 2 - 4 alpha / (SNR Delta)."""
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    if not snr_delta > 2:
        raise NotApplicableError(f"bound needs SNR*Delta > 2, got {snr_delta}")
    return 0.5 * math.log(alpha) - alpha * sigma_w_sq / 2.0 - 4.0 * alpha / snr_delta


def analytic_phase_bound(params: ChannelParams, alpha: float) -> float:
    return phase_bound_terms(alpha, params.sigma_w_sq, params.snr_delta)


def ecos_bound_terms(sigma_w_sq, snr_delta):
    if not snr_delta > 2:
        raise NotApplicableError(f"bound needs SNR*Delta > 2, got {snr_delta}")
    return 1.0 - sigma_w_sq / 2.0 - 4.0 / snr_delta


def ecos_lower_bound(params: ChannelParams) -> float:
    """1 - sigma_W^2/2 - 4/(SNR Delta), valid for SNR*Delta > 2."""
    return ecos_bound_terms(params.sigma_w_sq, params.snr_delta)


def phase_asymptote(snr: float, beta: float) -> float:
    """(1/4) ln SNR + ln(1/beta) - pi/beta - 4, in nats."""
    if not snr > 0 or not beta > 0:
        raise ValueError("snr and beta must be positive")
    return 0.25 * math.log(snr) - math.log(beta) - math.pi / beta - 4.0


# --- choice of alpha -------------------------------------------------------

@dataclass(frozen=True)
class AlphaPolicy:
    """How the Tikhonov concentration is chosen: paper, fixed or auto."""

    mode: str = "auto"
    value: float | None = None

    def __post_init__(self):
        if self.mode not in ("paper", "fixed", "auto"):
            raise ValueError(f"unknown alpha policy {self.mode!r}")
        if self.mode == "fixed" and not (self.value is not None and self.value > 0):
            raise ValueError("fixed alpha needs a positive value")

    @classmethod
    def parse(cls, text: str) -> "AlphaPolicy":
        text = text.strip()
        if text.startswith("fixed:"):
            try:
                value = float(text.split(":", 1)[1])
            except ValueError:
                raise ValueError(f"malformed alpha policy {text!r}") from None
            return cls("fixed", value)
        return cls(text)

    def __str__(self):
        return f"fixed:{self.value!r}" if self.mode == "fixed" else self.mode


def golden_section_max(f, lo: float, hi: float, rtol: float = 1e-6, max_iter: int = 500) -> float:
    """Maximizer of a unimodal ``f`` on [lo, hi]."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if abs(b - a) <= rtol * max(1.0, abs(a) + abs(b)) * 0.5:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def optimal_alpha(ecos: float, log_lo: float = math.log(1e-3), log_hi: float = math.log(1e9)) -> float:
    """Concentration maximizing the phase bound for a given mean cosine.

    The bound is concave in alpha, so golden-section search on ln(alpha)
    finds the global maximum inside the bracket.
    """
    t = golden_section_max(lambda s: phase_rate_bound(math.exp(s), ecos), log_lo, log_hi, rtol=1e-9)
    return math.exp(t)


def select_alpha(policy: AlphaPolicy, params: ChannelParams, ecos_estimate: float | None = None) -> float:
    if policy.mode == "paper":
        return params.snr_delta
    if policy.mode == "fixed":
        return float(policy.value)
    if ecos_estimate is None or not math.isfinite(ecos_estimate):
        raise ValueError("auto alpha needs a finite ecos estimate")
    return optimal_alpha(ecos_estimate)


# --- Monte Carlo -----------------------------------------------------------

@dataclass(frozen=True)
class PhaseRateResult:
    """Phase-rate estimate plus the ingredients it was built from.

    ``rate`` carries the delta-method standard error (alpha times the
    standard error of ecos, scaled by (n-1)/n); ``resampled_stderr`` is the
    spread of per-replicate bounds at the same alpha, as a cross-check.
    """

    rate: RateEstimate
    alpha: float
    ecos: float
    ecos_stderr: float
    resampled_stderr: float
    replicate_ecos: tuple
    flagged: int = 0

    def at_alpha(self, alpha: float) -> "PhaseRateResult":
        """Same statistics, re-scored at another concentration."""
        return _score(self.replicate_ecos, self.ecos_stderr, alpha, self.rate.symbols_per_replicate, self.flagged)


def _score(replicate_ecos, ecos_se, alpha, n_symbols, flagged=0) -> PhaseRateResult:
    means = np.asarray(replicate_ecos, dtype=float)
    R = len(means)
    ecos = float(np.mean(means))
    scale = (n_symbols - 1) / n_symbols
    resampled = math.nan
    if R > 1:
        resampled = float(np.std(scale * phase_rate_bound(alpha, means), ddof=1) / math.sqrt(R))
    rate = RateEstimate(scale * phase_rate_bound(alpha, ecos), scale * alpha * ecos_se, R, n_symbols)
    return PhaseRateResult(rate, float(alpha), ecos, ecos_se, resampled, tuple(means.tolist()), flagged)


def cos_errors(inputs, first, last, delta: float):
    """cos_err for k = 2..n from per-block first/last samples."""
    _, c, valid = phase_statistics(last[:-1], inputs[:-1], first[1:], np.angle(inputs[1:]), delta)
    return c[valid], int(np.count_nonzero(~valid))


def cos_errors_from_blocks(inputs, blocks, delta: float):
    """Same as :func:`cos_errors`, from full output blocks (n x L samples)."""
    y = np.asarray([b.samples if hasattr(b, "samples") else b for b in blocks])
    return cos_errors(np.asarray(inputs), y[:, 0], y[:, -1], delta)


def phase_result(replicate_cos, n_symbols: int, policy: AlphaPolicy, params: ChannelParams, flagged: int = 0) -> PhaseRateResult:
    """Aggregate per-replicate cos_err arrays into a phase-rate estimate."""
    R = len(replicate_cos)
    means = np.array([np.mean(c) for c in replicate_cos])
    if R > 1:
        ecos_se = float(np.std(means, ddof=1) / math.sqrt(R))
    else:
        c = replicate_cos[0]
        ecos_se = float(np.std(c, ddof=1) / math.sqrt(len(c))) if len(c) > 1 else math.nan
    alpha = select_alpha(policy, params, float(np.mean(means)))
    return _score(means, ecos_se, alpha, n_symbols, flagged)


def _replicate_cos(params, n_symbols, seed, index):
    rng = replicate_rng(seed, index)
    x = sample_inputs(params, n_symbols, rng)
    st = simulate_statistics(params, x, rng)
    return cos_errors(x, st.first, st.last, params.delta)


def estimate_phase_rate(
    params: ChannelParams,
    n_symbols: int,
    replicates: int,
    policy: AlphaPolicy,
    seed,
    workers: int = 1,
) -> PhaseRateResult:
    """Monte Carlo auxiliary-channel bound on I(Phi_X; Y | X_A), nats/symbol."""
    if n_symbols < 2:
        raise ValueError("n_symbols must be >= 2 (the first symbol has no reference)")
    out = map_replicates(lambda i: _replicate_cos(params, n_symbols, seed, i), replicates, workers)
    return phase_result([c for c, _ in out], n_symbols, policy, params, sum(f for _, f in out))
