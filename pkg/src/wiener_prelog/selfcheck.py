"""Shippable numerical self-checks: special functions, normalizations, bound ordering."""

from __future__ import annotations

import math

import numpy as np
from scipy import integrate, special

from .amp_rate import discretized_energy_bounds, log_marginal_v
from .channel import make_params
from .modulation import amp_sq_density
from .phase_rate import log_bessel_i0, phase_rate_bound, tikhonov_logpdf

BESSEL_GRID = (0.1, 1.0, 10.0, 100.0, 500.0, 5000.0)


def check_log_bessel():
    worst = 0.0
    for a in BESSEL_GRID:
        ref = math.log(special.i0e(a)) + a
        worst = max(worst, abs(log_bessel_i0(a) - ref) / abs(ref))
    return worst <= 1e-10, f"max rel err vs scipy i0e = {worst:.2e}"


def check_bessel_inequality():
    z = np.geomspace(0.1, 1e4, 200)
    gap = z - 0.5 * np.log(z) - log_bessel_i0(z)
    return bool(np.all(gap >= 0)), f"min of z - ln(z)/2 - ln I0(z) = {gap.min():.3e}"


def tikhonov_mass(alpha):
    val, _ = integrate.quad(lambda t: math.exp(tikhonov_logpdf(t, 0.0, alpha)), -math.pi, math.pi,
                            epsabs=1e-13, epsrel=1e-13, limit=200, points=[0.0])
    return val


def check_tikhonov():
    worst = max(abs(tikhonov_mass(a) - 1.0) for a in (0.1, 1.0, 10.0, 100.0))
    return worst <= 1e-9, f"max |mass - 1| = {worst:.2e}"


def marginal_mass(params):
    """Integral of Q_V over v, split at the support edge of the signal part."""
    P, d = params.power, params.delta
    edge = 0.5 * P * d + 1.0
    sd = math.sqrt(2.0 * 0.5 * P * d * d)
    decay = 0.5 * P * d
    f = lambda v: math.exp(log_marginal_v(v, params))
    pieces = [edge - 60 * sd, edge, edge + 60 * sd, edge + 60 * sd + 60 * decay]
    total = 0.0
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        total += integrate.quad(f, lo, hi, epsabs=0, epsrel=1e-11, limit=400)[0]
    return total


def check_marginal():
    worst = 0.0
    for snr_db in (40.0, 60.0):
        worst = max(worst, abs(marginal_mass(make_params(1.0, snr_db)) - 1.0))
    return worst <= 1e-6, f"max |mass - 1| = {worst:.2e}"


def check_input_density():
    P = 3.0
    u, w = special.roots_laguerre(64)
    mass = float(np.sum(w * amp_sq_density(0.5 * P * (1 + u), P) * np.exp(u)) * 0.5 * P)
    return abs(mass - 1.0) <= 1e-10, f"|mass - 1| = {abs(mass - 1):.2e}"


def toy_instance():
    P = 100.0
    levels = 0.5 * P * (1.0 + np.array([0.2, 1.0, 2.5]))
    return discretized_energy_bounds(levels, np.full(3, 1.0 / 3.0), oversampling=2, n_bins=64)


def check_toy_ordering():
    t = toy_instance()
    return t.matched >= t.mismatched, f"matched {t.matched:.9f} >= mismatched {t.mismatched:.9f}"


def check_concavity():
    a = np.geomspace(1e-2, 1e6, 400)
    worst = -math.inf
    for ecos in (0.5, 0.9, 0.999):
        f = phase_rate_bound(a, ecos)
        # second differences on a non-uniform grid
        h1, h2 = np.diff(a)[:-1], np.diff(a)[1:]
        d2 = 2 * (h1 * f[2:] - (h1 + h2) * f[1:-1] + h2 * f[:-2]) / (h1 * h2 * (h1 + h2))
        worst = max(worst, float((d2 / np.maximum(1.0, np.abs(f[1:-1]))).max()))
    return worst <= 1e-9, f"max scaled second difference = {worst:.2e}"


CHECKS = (
    ("ln I0 accuracy", check_log_bessel),
    ("I0 upper bound e^z/sqrt(z)", check_bessel_inequality),
    ("Tikhonov normalization", check_tikhonov),
    ("marginal of V normalization", check_marginal),
    ("input density normalization", check_input_density),
    ("toy bound ordering", check_toy_ordering),
    ("phase bound concave in alpha", check_concavity),
)


def run_selfcheck():
    """Yield ``(name, passed, detail)`` for each check."""
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # noqa: BLE001 - a crash is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        yield name, bool(ok), detail
