"""Input law: uniform phase, shifted-exponential squared amplitude.

|X|^2 - P/2 is exponential with mean P/2 and arg X is uniform on
[-pi, pi), independent of |X|.  E|X|^2 = P, so the average power
constraint holds with equality in expectation.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class InputSymbol:
    amplitude: float
    phase: float

    @property
    def value(self) -> complex:
        return self.amplitude * complex(math.cos(self.phase), math.sin(self.phase))


def sample_amplitude_sq(power: float, n: int, rng: np.random.Generator) -> np.ndarray:
    # inverse CDF of the shifted exponential
    u = rng.random(n)
    return 0.5 * power * (1.0 - np.log1p(-u))


def sample_inputs(params: ChannelParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` i.i.d. complex input symbols."""
    amp_sq = sample_amplitude_sq(params.power, n, rng)
    phase = rng.uniform(-np.pi, np.pi, n)
    return np.sqrt(amp_sq) * np.exp(1j * phase)


def sample_input(params: ChannelParams, rng: np.random.Generator) -> InputSymbol:
    x = sample_inputs(params, 1, rng)[0]
    return InputSymbol(abs(x), float(np.angle(x)))


def amp_sq_density(a, power: float):
    """Density of |X|^2: (2/P) exp(1 - 2a/P) on a >= P/2, zero below."""
    if not power > 0:
        raise ValueError("power must be positive")
    a = np.asarray(a, dtype=float)
    with np.errstate(over="ignore"):
        dens = np.where(a >= 0.5 * power, (2.0 / power) * np.exp(1.0 - 2.0 * a / power), 0.0)
    return dens[()] if dens.ndim == 0 else dens


def validate_power(symbols, power: float | None = None) -> float:
    """Empirical mean power (1/n) sum |X_m|^2.

    Accepts complex values or :class:`InputSymbol` objects.  This is a
    diagnostic; nothing is enforced.
    """
    symbols = list(symbols) if not isinstance(symbols, np.ndarray) else symbols
    if len(symbols) == 0:
        raise ValueError("cannot validate power of an empty sequence")
    if isinstance(symbols[0], InputSymbol):
        sq = np.array([s.amplitude**2 for s in symbols])
    else:
        sq = np.abs(np.asarray(symbols, dtype=np.complex128)) ** 2
    mean = float(np.mean(sq))
    if power is not None:
        log.debug("empirical power %.6g vs constraint %.6g", mean, power)
    return mean
