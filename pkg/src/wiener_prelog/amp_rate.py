"""Amplitude-modulation rate via the block energy statistic.

The receiver keeps only V_k = sum_l |Y_{(k-1)L+l}|^2 and scores it with a
Gaussian auxiliary channel

    Q(v | x_A) = N(v; x_A^2 Delta + sigma_N^2, 2 x_A^2 Delta^2 sigma_N^2).

E[log Q(V|X_A)] - E[log Q_V(V)] under the true channel law lower-bounds
I(X_A; V), where Q_V is the auxiliary channel driven by the true input law.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .channel import ChannelParams, OutputBlock, simulate_statistics
from .modulation import sample_inputs
from .montecarlo import RateEstimate, map_replicates, replicate_rng

LOG_2PI = math.log(2.0 * math.pi)


class QuadratureError(RuntimeError):
    """Raised when a quadrature fails to reach its accuracy target."""


def statistic_v(block) -> float:
    """Energy of one output block, sum of |Y|^2 over its L samples."""
    y = block.samples if isinstance(block, OutputBlock) else np.asarray(block)
    return float(np.sum(y.real**2 + y.imag**2))


def _aux_noise(params: ChannelParams) -> float:
    return params.sigma_n_sq if params.additive_noise else 0.0


def aux_moments(x_a_sq, params: ChannelParams):
    """Mean and variance of V under the auxiliary channel given x_A^2."""
    s2 = _aux_noise(params)
    d = params.delta
    return x_a_sq * d + s2, 2.0 * x_a_sq * d * d * s2


def log_aux_v(v, x_a, params: ChannelParams):
    """log Q(v | x_A) for the Gaussian auxiliary channel."""
    x_a = np.asarray(x_a, dtype=float)
    mean, var = aux_moments(x_a**2, params)
    if np.any(var <= 0):
        raise ValueError("auxiliary channel has zero variance (x_A = 0 or noise disabled)")
    v = np.asarray(v, dtype=float)
    out = -0.5 * (LOG_2PI + np.log(var)) - (v - mean) ** 2 / (2.0 * var)
    return out[()] if np.ndim(out) == 0 else out


def _log_mixture_integrand(a, v, params: ChannelParams):
    # log of amp_sq_density(a) * Q(v | sqrt(a)) for a >= P/2
    P = params.power
    mean, var = aux_moments(a, params)
    return (
        math.log(2.0 / P) + 1.0 - 2.0 * a / P
        - 0.5 * (LOG_2PI + np.log(var))
        - (v - mean) ** 2 / (2.0 * var)
    )


def _mixture_window(v, params: ChannelParams, drop=40.0, width=12.0):
    """Integration window in |X|^2 holding all but e^-drop of the integrand."""
    P = params.power
    s2 = _aux_noise(params)
    d = params.delta
    edge = 0.5 * P
    # stationary point ignoring the log-variance term
    mode = np.maximum(edge, (v - s2) / (d * math.sqrt(1.0 + 8.0 * s2 / P)))
    scale = np.sqrt(2.0 * mode * s2)
    top = _log_mixture_integrand(mode, v, params)

    hi = mode + width * scale
    for _ in range(200):
        wide = _log_mixture_integrand(hi, v, params) > top - drop
        if not wide.any():
            break
        hi = np.where(wide, mode + 2.0 * (hi - mode), hi)
    else:
        raise QuadratureError("could not bracket the upper tail of the marginal integrand")

    lo = np.maximum(edge, mode - width * scale)
    for _ in range(200):
        wide = (lo > edge) & (_log_mixture_integrand(lo, v, params) > top - drop)
        if not wide.any():
            break
        lo = np.where(wide, np.maximum(edge, mode - 2.0 * (mode - lo)), lo)
    else:
        raise QuadratureError("could not bracket the lower tail of the marginal integrand")
    return lo, hi


def _gauss_legendre_logint(v, lo, hi, params, n):
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (hi - lo)
    a = half[:, None] * x + (0.5 * (hi + lo))[:, None]
    g = _log_mixture_integrand(a, v[:, None], params)
    return special.logsumexp(g, b=w, axis=1) + np.log(half)


def log_marginal_v(v, params: ChannelParams, rtol=1e-8, nodes=64, max_nodes=1024):
    """log Q_V(v): the auxiliary channel averaged over the true |X|^2 law.

    Gauss-Legendre on a window around the integrand's mode, evaluated in
    the log domain; node counts double until successive results agree to
    ``rtol`` (relative error of Q_V).
    """
    if _aux_noise(params) <= 0:
        raise ValueError("auxiliary channel has zero variance (noise disabled)")
    v_in = np.asarray(v, dtype=float)
    v = np.atleast_1d(v_in).ravel()
    lo, hi = _mixture_window(v, params)

    out = np.empty_like(v)
    todo = np.arange(len(v))
    n = nodes
    coarse = _gauss_legendre_logint(v, lo, hi, params, n)
    while todo.size:
        if 2 * n > max_nodes:
            raise QuadratureError(
                f"marginal of V did not converge to rtol={rtol} with {n} nodes "
                f"for {todo.size} point(s), e.g. v={v[todo[0]]!r}"
            )
        fine = _gauss_legendre_logint(v[todo], lo[todo], hi[todo], params, 2 * n)
        ok = np.abs(fine - coarse) <= rtol
        out[todo[ok]] = fine[ok]
        todo, coarse = todo[~ok], fine[~ok]
        n *= 2
    out = out.reshape(v_in.shape)
    return out[()] if out.ndim == 0 else out


def amp_log_ratios(energy, amplitude, params: ChannelParams) -> np.ndarray:
    """Per-symbol log Q(V|X_A) - log Q_V(V)."""
    return log_aux_v(energy, amplitude, params) - log_marginal_v(energy, params)


def _replicate_amp_terms(params, n_symbols, seed, index):
    rng = replicate_rng(seed, index)
    x = sample_inputs(params, n_symbols, rng)
    st = simulate_statistics(params, x, rng)
    return amp_log_ratios(st.energy, np.abs(x), params)


def estimate_amp_rate(params: ChannelParams, n_symbols: int, replicates: int, seed, workers: int = 1) -> RateEstimate:
    """Monte Carlo auxiliary-channel bound on I(X_A; Y) in nats per symbol."""
    if n_symbols < 1:
        raise ValueError("n_symbols must be >= 1")
    terms = map_replicates(lambda i: _replicate_amp_terms(params, n_symbols, seed, i), replicates, workers)
    return rate_from_terms(terms, n_symbols)


def rate_from_terms(terms, n_symbols: int) -> RateEstimate:
    means = [float(np.mean(t)) for t in terms]
    fallback = math.nan
    if len(terms) == 1 and len(terms[0]) > 1:
        # symbols are i.i.d. for the amplitude term
        fallback = float(np.std(terms[0], ddof=1) / math.sqrt(len(terms[0])))
    return RateEstimate.from_replicates(means, n_symbols, fallback)


def amp_asymptote(snr: float) -> float:
    """High-SNR reference (1/2) ln SNR - 2 - (1/2) ln(8 pi), in nats."""
    if not snr > 0:
        raise ValueError("snr must be positive")
    return 0.5 * math.log(snr) - 2.0 - 0.5 * math.log(8.0 * math.pi)


def aux_channel_information(params: ChannelParams, nodes=64, hermite_nodes=48) -> float:
    """I(X_A; V) if V were exactly distributed as the auxiliary channel.

    Deterministic finite-SNR counterpart of the Monte Carlo estimate.  The
    outer average over u = 2|X|^2/P - 1 ~ Exp(1) is split into a
    Gauss-Legendre panel near the support edge, where E[log Q_V] bends on a
    scale of ~sqrt(P), and a Gauss-Laguerre tail.
    """
    P = params.power
    _, var_edge = aux_moments(0.5 * P, params)
    edge_scale = math.sqrt(var_edge) / (0.5 * P * params.delta)
    split = min(30.0, 40.0 * edge_scale)

    xl, wl = np.polynomial.legendre.leggauss(nodes)
    u_near = 0.5 * split * (xl + 1.0)
    w_near = 0.5 * split * wl * np.exp(-u_near)
    xg, wg = special.roots_laguerre(nodes)
    u = np.concatenate([u_near, split + xg])
    w = np.concatenate([w_near, math.exp(-split) * wg])

    a = 0.5 * P * (1.0 + u)
    mean, var = aux_moments(a, params)
    th, wh = special.roots_hermite(hermite_nodes)
    vv = mean[:, None] + np.sqrt(2.0 * var)[:, None] * th
    e_log_marg = (log_marginal_v(vv, params) @ wh) / math.sqrt(math.pi)
    e_log_cond = -0.5 * (LOG_2PI + 1.0 + np.log(var))
    return float(np.sum(w * (e_log_cond - e_log_marg)))


@dataclass(frozen=True)
class ToyBounds:
    """Exhaustive-enumeration values for a discretized energy channel."""

    matched: float
    mismatched: float
    true_channel: np.ndarray
    aux_channel: np.ndarray
    edges: np.ndarray


def _log_bin_probs(log_cdf_lo, log_cdf_hi):
    # log(F(hi) - F(lo)) from log-CDFs
    with np.errstate(divide="ignore"):
        return log_cdf_hi + np.log1p(-np.exp(log_cdf_lo - log_cdf_hi))


def discretized_energy_bounds(
    amp_sq_levels,
    probs,
    oversampling: int = 2,
    n_bins: int = 64,
    sigma_n_sq: float = 1.0,
    span: float = 6.0,
) -> ToyBounds:
    """Auxiliary-channel bounds of a quantized energy channel by enumeration.

    The exact law of V given |X|^2 = a is (sigma^2 Delta / 2) times a
    noncentral chi-square with 2L degrees of freedom and noncentrality
    2a/sigma^2.  V is quantized to ``n_bins`` bins (the outer two are
    half-infinite).  ``matched`` scores with the exact bin law (it equals
    the mutual information of the quantized channel); ``mismatched`` scores
    with the quantized Gaussian auxiliary channel.
    """
    a = np.asarray(amp_sq_levels, dtype=float)
    p = np.asarray(probs, dtype=float)
    if a.shape != p.shape or np.any(p <= 0) or not math.isclose(p.sum(), 1.0, rel_tol=0, abs_tol=1e-12):
        raise ValueError("probs must be positive, sum to one and match the levels")
    L = int(oversampling)
    d = 1.0 / L
    mean = a * d + sigma_n_sq
    sd = np.sqrt(2.0 * a * d * d * sigma_n_sq + d * sigma_n_sq**2)
    lo = max(0.0, float(np.min(mean - span * sd)))
    hi = float(np.max(mean + span * sd))
    inner = np.linspace(lo, hi, n_bins - 1)
    edges = np.concatenate([[-np.inf], inner, [np.inf]])

    scale = sigma_n_sq * d / 2.0
    nc = 2.0 * a / sigma_n_sq
    z = np.clip(edges[None, :] / scale, 0.0, np.inf)
    cdf = stats.ncx2.cdf(z, 2 * L, nc[:, None])
    sf = stats.ncx2.sf(z, 2 * L, nc[:, None])
    # pick the better-conditioned tail per edge
    true_p = np.where(cdf[:, 1:] < 0.5, cdf[:, 1:] - cdf[:, :-1], sf[:, :-1] - sf[:, 1:])
    true_p = np.clip(true_p, 0.0, None)
    true_p /= true_p.sum(axis=1, keepdims=True)

    aux_mean, aux_var = a * d + sigma_n_sq, 2.0 * a * d * d * sigma_n_sq
    t = (edges[None, :] - aux_mean[:, None]) / np.sqrt(aux_var)[:, None]
    lower = t[:, :-1]
    upper = t[:, 1:]
    log_q = np.where(
        upper <= 0,
        _log_bin_probs(special.log_ndtr(lower), special.log_ndtr(upper)),
        _log_bin_probs(special.log_ndtr(-upper), special.log_ndtr(-lower)),
    )

    joint = p[:, None] * true_p
    with np.errstate(divide="ignore", invalid="ignore"):
        log_pb = np.log(joint.sum(axis=0))
        matched_terms = np.where(joint > 0, joint * (np.log(true_p) - log_pb[None, :]), 0.0)
    matched = float(matched_terms.sum())

    log_qb = special.logsumexp(np.log(p)[:, None] + log_q, axis=0)
    mism_terms = np.where(joint > 0, joint * (log_q - log_qb[None, :]), 0.0)
    mismatched = float(mism_terms.sum())
    return ToyBounds(matched, mismatched, true_p, np.exp(log_q), edges)
