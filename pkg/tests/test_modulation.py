import math

import numpy as np
import pytest
from scipy import special

from wiener_prelog.channel import make_params
from wiener_prelog.modulation import (
    InputSymbol,
    amp_sq_density,
    sample_input,
    sample_inputs,
    validate_power,
)


@pytest.fixture(scope="module")
def draws():
    p = make_params(1.0, 30.0)
    return p, sample_inputs(p, 1_000_000, np.random.default_rng(0))


def test_mean_power(draws):
    p, x = draws
    assert np.mean(np.abs(x) ** 2) == pytest.approx(p.power, rel=0.01)


def test_support(draws):
    p, x = draws
    assert np.min(np.abs(x) ** 2) >= p.power / 2 * (1 - 1e-12)


def test_cdf_at_power(draws):
    p, x = draws
    # P(|X|^2 <= P) = 1 - e^-1 for the shifted exponential
    frac = np.mean(np.abs(x) ** 2 <= p.power)
    assert frac == pytest.approx(1 - math.exp(-1), abs=5 * math.sqrt(0.25 / len(x)))


def test_phase_uniform_and_independent(draws):
    p, x = draws
    phase = np.angle(x)
    assert np.mean(np.cos(phase)) == pytest.approx(0, abs=0.005)
    a = np.abs(x)
    for g in (np.cos(phase), np.sin(phase), np.cos(2 * phase)):
        r = np.corrcoef(a, g)[0, 1]
        assert abs(r) < 3 / math.sqrt(len(x))


def test_single_symbol():
    p = make_params(1.0, 30.0)
    s = sample_input(p, np.random.default_rng(1))
    assert s.amplitude**2 >= p.power / 2
    assert -math.pi <= s.phase < math.pi


def test_density_edge_and_below():
    P = 7.0
    assert amp_sq_density(P / 2, P) == pytest.approx(2 / P, rel=1e-15)
    assert amp_sq_density(P / 2 - 1e-9, P) == 0.0
    assert amp_sq_density(0.0, P) == 0.0


def test_density_normalization():
    P = 5.0
    u, w = special.roots_laguerre(64)
    a = P / 2 * (1 + u)
    mass = np.sum(w * np.exp(u) * amp_sq_density(a, P)) * P / 2
    assert abs(mass - 1) < 1e-10


def test_density_rejects_bad_power():
    with pytest.raises(ValueError):
        amp_sq_density(1.0, 0.0)


class TestValidatePower:
    def test_constant(self):
        P = 4.0
        assert validate_power([InputSymbol(2.0, 0.3)] * 5, P) == pytest.approx(P)

    def test_single_half_power(self):
        assert validate_power([InputSymbol(math.sqrt(2.0), -1.0)], 4.0) == pytest.approx(2.0)

    def test_complex_values(self, draws):
        p, x = draws
        assert validate_power(x, p.power) == pytest.approx(p.power, rel=0.01)

    def test_empty(self):
        with pytest.raises(ValueError):
            validate_power([], 1.0)
