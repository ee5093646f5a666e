"""Oversampled discrete-time Wiener phase-noise channel.

Each input symbol X_m is observed through L output samples

    Y_k = X_{ceil(k/L)} * Delta * exp(j Theta_k) + N_k,   Delta = 1/L,

where Theta is a Gaussian random walk with increment variance
2*pi*beta*Delta started uniformly on [-pi, pi), and N_k is circularly
symmetric complex Gaussian with E|N_k|^2 = sigma_N^2 * Delta.  The noise
variance is normalized to one, so the input power P equals the SNR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Samples generated per chunk when streaming a long replicate.
CHUNK_SAMPLES = 1 << 21


@dataclass(frozen=True)
class ChannelParams:
    """Single source of truth for one simulation point.

    ``phase_noise`` and ``additive_noise`` are diagnostic switches; the
    model itself always has both enabled.
    """

    beta: float
    snr: float
    oversampling: int
    phase_noise: bool = True
    additive_noise: bool = True
    sigma_n_sq: float = field(default=1.0, init=False)

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if not self.snr > 0 or not math.isfinite(self.snr):
            raise ValueError(f"snr must be positive and finite, got {self.snr}")
        if int(self.oversampling) != self.oversampling or self.oversampling < 1:
            raise ValueError(f"oversampling must be an integer >= 1, got {self.oversampling}")
        object.__setattr__(self, "oversampling", int(self.oversampling))

    @property
    def power(self) -> float:
        return self.snr * self.sigma_n_sq

    @property
    def delta(self) -> float:
        return 1.0 / self.oversampling

    @property
    def sigma_w_sq(self) -> float:
        return 2.0 * math.pi * self.beta * self.delta

    @property
    def snr_delta(self) -> float:
        return self.snr * self.delta

    @property
    def increment_std(self) -> float:
        """Standard deviation actually used for phase increments."""
        return math.sqrt(self.sigma_w_sq) if self.phase_noise else 0.0

    @property
    def noise_var(self) -> float:
        """Per-sample additive noise variance actually used (E|N_k|^2)."""
        return self.sigma_n_sq * self.delta if self.additive_noise else 0.0


def paper_oversampling(beta: float, snr: float) -> int:
    """L = ceil(beta * sqrt(SNR))."""
    # guard against sqrt round-off pushing an exact integer over the edge
    x = beta * math.sqrt(snr)
    r = round(x)
    if abs(x - r) <= 1e-9 * max(1.0, x):
        return max(1, int(r))
    return max(1, math.ceil(x))


def make_params(beta: float, snr_db: float, oversampling: int | str = "schedule", **flags) -> ChannelParams:
    """Build :class:`ChannelParams` from an SNR in dB.

    ``oversampling`` is either ``"schedule"`` (L = ceil(beta*sqrt(SNR))) or
    an explicit integer L >= 1.
    """
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if not math.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite, got {snr_db}")
    snr = 10.0 ** (snr_db / 10.0)
    if oversampling == "schedule":
        L = paper_oversampling(beta, snr)
    else:
        L = oversampling
        if isinstance(L, bool) or int(L) != L or L < 1:
            raise ValueError(f"explicit oversampling must be an integer >= 1, got {L}")
    return ChannelParams(beta=beta, snr=snr, oversampling=int(L), **flags)


@dataclass(frozen=True)
class PhasePath:
    """Unwrapped phase trajectory Theta_1..Theta_{nL}."""

    theta: np.ndarray

    def __len__(self):
        return len(self.theta)

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.theta)

    def wrapped(self) -> np.ndarray:
        return wrap_phase(self.theta)


@dataclass(frozen=True)
class OutputBlock:
    """The L output samples belonging to one input symbol."""

    samples: np.ndarray

    def __len__(self):
        return len(self.samples)


def wrap_phase(theta):
    """Map angles to [-pi, pi)."""
    return np.mod(np.asarray(theta) + np.pi, 2 * np.pi) - np.pi


def _phase_segment(params: ChannelParams, start: float, n: int, rng: np.random.Generator) -> np.ndarray:
    # start followed by n - 1 random-walk steps
    steps = rng.standard_normal(n - 1) * params.increment_std
    out = np.empty(n)
    out[0] = start
    np.cumsum(steps, out=out[1:])
    out[1:] += start
    return out


def sample_phase_path(params: ChannelParams, n_symbols: int, rng: np.random.Generator) -> PhasePath:
    """Draw one Wiener phase trajectory of ``n_symbols * L`` samples."""
    if n_symbols < 1:
        raise ValueError("n_symbols must be >= 1")
    theta1 = rng.uniform(-np.pi, np.pi)
    return PhasePath(_phase_segment(params, theta1, n_symbols * params.oversampling, rng))


def _complex_noise(params: ChannelParams, shape, rng: np.random.Generator) -> np.ndarray:
    n = int(np.prod(shape))
    z = rng.standard_normal(2 * n).view(np.complex128).reshape(shape)
    return z * math.sqrt(params.noise_var / 2.0)


def _outputs(params: ChannelParams, inputs: np.ndarray, theta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    L = params.oversampling
    shape = (len(inputs), L)
    # noise is drawn even in noise-off mode so the stream layout does not change
    noise = _complex_noise(params, shape, rng)
    carrier = np.exp(1j * theta.reshape(shape))
    return (inputs[:, None] * params.delta) * carrier + noise


def simulate(params: ChannelParams, inputs, path: PhasePath, rng: np.random.Generator) -> list[OutputBlock]:
    """Pass ``inputs`` through the channel along a given phase path."""
    inputs = np.asarray(inputs, dtype=np.complex128).reshape(-1)
    if len(path) != len(inputs) * params.oversampling:
        raise ValueError(
            f"phase path has {len(path)} samples, expected {len(inputs)} * {params.oversampling}"
        )
    y = _outputs(params, inputs, path.theta, rng)
    return [OutputBlock(row) for row in y]


@dataclass(frozen=True)
class BlockStatistics:
    """Per-symbol summaries of one simulated replicate.

    ``energy`` is sum_l |Y_{(k-1)L+l}|^2; ``first`` / ``last`` are the first
    and last samples of each block.  ``theta_marks`` holds the unwrapped
    phase at samples 1, L and nL.
    """

    inputs: np.ndarray
    energy: np.ndarray
    first: np.ndarray
    last: np.ndarray
    theta_marks: tuple


def chunk_symbols(params: ChannelParams) -> int:
    return max(1, CHUNK_SAMPLES // params.oversampling)


def simulate_statistics(
    params: ChannelParams,
    inputs,
    rng: np.random.Generator,
    chunk: int | None = None,
) -> BlockStatistics:
    """Simulate a whole replicate in bounded memory and keep per-block statistics.

    The phase path is streamed chunk by chunk, carrying the last phase value
    across chunk boundaries.  With a single chunk the random stream is
    consumed in the same order as ``sample_phase_path`` followed by
    ``simulate``, so both routes give identical samples.
    """
    inputs = np.asarray(inputs, dtype=np.complex128).reshape(-1)
    n = len(inputs)
    if n < 1:
        raise ValueError("need at least one input symbol")
    L = params.oversampling
    chunk = chunk or chunk_symbols(params)

    energy = np.empty(n)
    first = np.empty(n, dtype=np.complex128)
    last = np.empty(n, dtype=np.complex128)
    theta_first = theta_L = None

    theta_prev = None
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        m = (stop - start) * L
        if theta_prev is None:
            theta = _phase_segment(params, rng.uniform(-np.pi, np.pi), m, rng)
            theta_first, theta_L = theta[0], theta[L - 1]
        else:
            # one extra step links this chunk to the previous sample
            theta = _phase_segment(params, theta_prev, m + 1, rng)[1:]
        theta_prev = theta[-1]
        y = _outputs(params, inputs[start:stop], theta, rng)
        energy[start:stop] = np.einsum("ij,ij->i", y.real, y.real) + np.einsum("ij,ij->i", y.imag, y.imag)
        first[start:stop] = y[:, 0]
        last[start:stop] = y[:, -1]

    return BlockStatistics(inputs, energy, first, last, (theta_first, theta_L, theta_prev))
