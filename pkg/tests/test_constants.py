import math

import numpy as np
import pytest

from ggmorrey.constants import (
    ConstantConfig,
    Interval,
    admissible_sigma,
    cz_constant,
    dominance_constant,
    dominance_factor,
    embedding_constant,
    maximal_constant,
    reduction_constant,
    sup_shifted_constant,
)
from ggmorrey.norms import ParameterError, SpaceParams, s_max


def test_maximal_constant_values():
    assert maximal_constant(2, 0, 1) == pytest.approx(1 + math.sqrt(2), abs=1e-12)
    assert maximal_constant(2, 0.5, 2, ConstantConfig(c0=3.0)) == pytest.approx(
        2 ** 0.5 * 3 * math.sqrt(2) + 1, rel=1e-15
    )
    assert maximal_constant(3, 0.2, 1, ConstantConfig(c0=0.0)) == 1.0
    with pytest.raises(ParameterError):
        maximal_constant(1.0, 0.0, 1)
    with pytest.raises(ParameterError):
        maximal_constant(2.0, 1.0, 1)


def test_maximal_constant_blows_up_near_one():
    vals = [maximal_constant(1 + 10.0**-k, 0.0, 1) for k in range(1, 6)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_cz_constant_values():
    assert cz_constant(1.5, 0.5) == 10.0
    assert cz_constant(3.0, 0.5) == pytest.approx(3 + 3 + 3.5 / 0.5, rel=1e-15)
    assert cz_constant(1.5, 0.5, ConstantConfig(c=2.0)) == 20.0
    with pytest.raises(ParameterError, match="p = 2"):
        cz_constant(2.0, 0.3)
    with pytest.raises(ParameterError):
        cz_constant(1.0, 0.3)


def test_cz_constant_blows_up_at_both_sides_of_two():
    assert cz_constant(2 - 1e-6, 0.0) > 1e6
    assert cz_constant(2 + 1e-6, 0.0) > 1e6


@pytest.mark.parametrize(
    "n, d, expected",
    [(1, 1.0, 2.0), (1, 0.25, 1.0), (2, 1.0, math.pi), (2, 0.5, 1.0), (2, math.sqrt(2), 2 * math.pi)],
)
def test_dominance_constant(n, d, expected):
    assert dominance_constant(n, d) == pytest.approx(expected, rel=1e-15)


def test_dominance_factor():
    params = SpaceParams(2, 0.5, 1, 0.3)
    assert dominance_factor(params, 0.5, 0.25) == pytest.approx(0.5 ** (1 / 1.5) * 0.25 ** (-1 / 1.75))
    with pytest.raises(ParameterError):
        dominance_factor(params, 0.2, 0.2)


def test_reduction_constant():
    params = SpaceParams(2, 0.5, 1, 1)
    cfg = ConstantConfig(C0=2.0)
    assert reduction_constant(params, 0.25, 3.0, cfg) == pytest.approx(2 * 0.25 ** (-1 / 1.75) * 3)
    for sigma in (0.0, 0.5, 0.7):
        with pytest.raises(ParameterError):
            reduction_constant(params, sigma, 1.0)
    with pytest.raises(ParameterError):
        reduction_constant(params, 0.25, math.inf)


def test_constant_config_validation():
    with pytest.raises(ParameterError):
        ConstantConfig(c0=-1.0)
    with pytest.raises(ParameterError):
        ConstantConfig(C0=math.nan)


def test_admissible_sigma_random_tuples():
    rng = np.random.default_rng(2024)
    checked = 0
    while checked < 100:
        p = float(rng.uniform(1.05, 4.0))
        lam = float(rng.uniform(0.01, 0.95))
        alpha = float(rng.choice([0.0, rng.uniform(0.0, 3.0)]))
        params = SpaceParams(p, lam, float(rng.uniform(0.2, 3.0)), alpha)
        top = p - 1 if alpha == 0 else min(p - 1, lam / alpha)
        assert admissible_sigma(params, "maximal") == Interval(0.0, min(p - 1, top))
        if abs(p - 2) > 1e-9:
            hi = min(p - 1, top) if p < 2 else min(p - 2, top)
            got = admissible_sigma(params, "singular")
            assert got == Interval(0.0, hi)
            # every admissible shift keeps the singular exponent on one side of 2
            for sigma in np.linspace(0, hi, 7)[1:-1]:
                q = p - sigma
                assert (q - 2) * (p - 2) > 0 and q > 1
        checked += 1


def test_admissible_sigma_errors_and_membership():
    with pytest.raises(ParameterError):
        admissible_sigma(SpaceParams(2, 0.5, 1, 1), "singular")
    with pytest.raises(ParameterError):
        admissible_sigma(SpaceParams(3, 0.5, 1, 1), "fractional")
    iv = admissible_sigma(SpaceParams(2, 0.5, 1, 1), "maximal")
    assert 0.25 in iv and 0.0 not in iv and 0.5 not in iv


def test_sup_shifted_constant_is_max_over_shifts():
    params = SpaceParams(2, 0.5, 1, 1)
    eps = np.linspace(0.01, 0.25, 10)
    expected = max(maximal_constant(2 - e, 0.5 - e, 1) for e in eps)
    assert sup_shifted_constant("maximal", params, eps) == expected
    params = SpaceParams(1.5, 0.3, 1, 0)
    expected = max(cz_constant(1.5 - e, 0.3) for e in eps)
    assert sup_shifted_constant("singular", params, eps) == expected
    with pytest.raises(ParameterError):
        sup_shifted_constant("other", params, eps)


def test_sup_shifted_constant_clamps_roundoff_lambda():
    params = SpaceParams(2, 0.3, 1, 3.0)
    top = s_max(params)
    assert math.isfinite(sup_shifted_constant("maximal", params, [top]))


def test_embedding_constant():
    params = SpaceParams(2, 0, 1, 0)
    eps = np.array([0.1, 0.5, 0.9])
    assert embedding_constant(params, eps, 1.0) == pytest.approx(np.max(eps ** (1 / (2 - eps))))
    assert embedding_constant(params, eps, 4.0) > embedding_constant(params, eps, 1.0)
