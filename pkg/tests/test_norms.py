import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ggmorrey.dsl import FamilySpec
from ggmorrey.grid import Domain, Grading, GridFunction, default_ball_family, make_grid
from ggmorrey.norms import (
    ParameterError,
    SpaceParams,
    SweepGrids,
    delta_exponent,
    delta_exponent_direct,
    eps_grid,
    grand_grand_norm,
    grand_lebesgue_norm,
    lebesgue_norm,
    make_sweeps,
    morrey_norm,
    phi,
    phi_terms,
    s_max,
    shifted_morrey_norms,
)

UNIT = Domain.interval(0.0, 1.0)


def power_fn(beta, cells=2**12, levels=80):
    grid = make_grid(UNIT, cells, [Grading((0.0,), levels=levels)])
    return GridFunction.from_callable(grid, FamilySpec.power(beta))


@pytest.mark.parametrize(
    "kw",
    [
        dict(p=1.0),
        dict(p=0.5),
        dict(p=2, lam=1.0),
        dict(p=2, lam=-0.1),
        dict(p=2, theta=0.0),
        dict(p=2, alpha=-1.0),
        dict(p=2, lam=0.0, alpha=0.5),
        dict(p=float("nan")),
    ],
)
def test_space_params_rejects(kw):
    with pytest.raises(ParameterError):
        SpaceParams(**kw)


def test_degenerate_s_max_message():
    with pytest.raises(ParameterError, match="degenerate s_max"):
        SpaceParams(2.0, 0.0, 1.0, 0.3)


@pytest.mark.parametrize(
    "params, expected",
    [
        (SpaceParams(2, 0.5, 1, 0.3), 1.0),
        (SpaceParams(2, 0.5, 1, 1.0), 0.5),
        (SpaceParams(3, 0.0, 1, 0.0), 2.0),
        (SpaceParams(1.5, 0.3, 1, 0.0), 0.5),
        (SpaceParams(4, 0.9, 2, 3.0), 0.3),
    ],
)
def test_s_max(params, expected):
    assert s_max(params) == pytest.approx(expected, rel=1e-15)


def test_eps_grid_crowds_both_ends():
    e = eps_grid(0.5, approach_count=20, uniform_count=64)
    assert np.all((e > 0) & (e < 0.5))
    assert np.all(np.diff(e) > 0)
    assert e[0] == pytest.approx(0.5 * 2.0**-20)
    assert e[-1] == pytest.approx(0.5 * (1 - 2.0**-20))
    with pytest.raises(ParameterError):
        eps_grid(0.0)


def test_lebesgue_norm_constant_and_errors():
    g = make_grid(UNIT, 16)
    f = GridFunction(g, np.full(g.size, 3.0))
    assert lebesgue_norm(f, 2.5) == pytest.approx(3.0, rel=1e-14)
    with pytest.raises(ParameterError):
        lebesgue_norm(f, 0.5)


@pytest.mark.parametrize("beta, q", [(0.3, 1.5), (0.3, 3.0), (0.45, 2.0), (0.45, 1.1)])
def test_lebesgue_power_oracle(beta, q):
    exact = (1 - beta * q) ** (-1 / q)
    assert lebesgue_norm(power_fn(beta), q) == pytest.approx(exact, rel=5e-3)


def test_lebesgue_holder_on_probability_space():
    g = make_grid(UNIT, 300, [Grading((0.0,), levels=10)])
    f = GridFunction(g, np.random.default_rng(3).exponential(size=g.size))
    qs = [1.0, 1.3, 2.0, 2.7, 5.0]
    norms = [lebesgue_norm(f, q) for q in qs]
    assert all(a <= b * (1 + 1e-12) for a, b in zip(norms, norms[1:]))


def test_morrey_with_zero_lambda_is_lebesgue():
    f = power_fn(0.3, cells=512, levels=20)
    balls = default_ball_family(f.grid)
    for q in (1.2, 2.0, 3.0):
        assert morrey_norm(f, q, 0.0, balls) == pytest.approx(lebesgue_norm(f, q), rel=1e-12)


def test_morrey_of_constant():
    g = make_grid(UNIT, 1024)
    f = GridFunction(g, np.ones(g.size))
    balls = default_ball_family(g)
    for lam in (0.0, 0.3, 0.8):
        # sup of (|B ∩ Ω| / |B|^lam)^(1/p) is 1, attained by B(1/2, 1/2)
        assert morrey_norm(f, 2.0, lam, balls) == pytest.approx(1.0, abs=2 * g.h)


def test_morrey_witness_is_finite_and_stable():
    # |x|^{-(1-lam)/p} is the scale-invariant Morrey function
    p, lam = 2.0, 0.5
    vals = []
    for cells in (512, 1024, 2048):
        f = power_fn((1 - lam) / p, cells=cells, levels=30)
        vals.append(morrey_norm(f, p, lam, default_ball_family(f.grid)))
    assert max(vals) / min(vals) < 1.05


def test_morrey_rejects_bad_lambda_and_clamps_roundoff():
    f = power_fn(0.3, cells=64, levels=4)
    balls = default_ball_family(f.grid)
    with pytest.raises(ParameterError):
        morrey_norm(f, 2.0, 1.0, balls)
    with pytest.raises(ParameterError):
        morrey_norm(f, 2.0, -0.01, balls)
    assert morrey_norm(f, 2.0, -1e-15, balls) == morrey_norm(f, 2.0, 0.0, balls)


@pytest.mark.parametrize("dim", [1, 2])
def test_shifted_norms_match_scalar_path(dim):
    dom = UNIT if dim == 1 else Domain.box([(0, 1), (0, 1)])
    g = make_grid(dom, 256 if dim == 1 else 24, [Grading((0.0,) * dim, levels=6)])
    f = GridFunction.from_callable(g, FamilySpec.power(0.4 * dim, (0.0,) * dim))
    balls = default_ball_family(g)
    q = np.linspace(1.1, 3.0, 9)
    lam = np.linspace(0.0, 0.8, 9)
    ref = np.array([morrey_norm(f, a, b, balls) for a, b in zip(q, lam)])
    np.testing.assert_allclose(shifted_morrey_norms(f, q, lam, balls), ref, rtol=1e-13)
    chunked = shifted_morrey_norms(f, q, lam, balls, chunk_elements=1)
    np.testing.assert_array_equal(chunked, shifted_morrey_norms(f, q, lam, balls))


def test_phi_nondecreasing_and_bounded_by_grand_grand():
    params = SpaceParams(2.0, 0.5, 1.0, 0.3)
    f = power_fn(0.25, cells=512, levels=20)
    grids = make_sweeps(f.grid, s_max(params))
    gg = grand_grand_norm(f, params, grids)
    prev = 0.0
    for s in np.linspace(0.01, s_max(params), 25):
        val = phi(f, params, s, grids)
        assert val >= prev
        assert val <= gg
        prev = val
    terms = phi_terms(f, params, grids.eps, grids.balls)
    assert terms.max() == pytest.approx(gg, rel=1e-15)


def test_phi_rejects_bad_s():
    params = SpaceParams(2.0, 0.5, 1.0, 1.0)
    f = power_fn(0.25, cells=64, levels=4)
    grids = make_sweeps(f.grid, s_max(params))
    for s in (0.0, -0.1, 0.6):
        with pytest.raises(ParameterError):
            phi(f, params, s, grids)
    with pytest.raises(ParameterError):
        phi(f, params, 1e-9, grids)  # no grid shift below s


def test_sweep_grids_sanitize():
    g = make_grid(UNIT, 32)
    balls = default_ball_family(g)
    sw = SweepGrids([0.3, 0.1, 0.3], balls)
    assert list(sw.eps) == [0.1, 0.3]
    assert list(sw.below(0.3)) == [0.1]
    assert list(sw.union([0.2]).eps) == [0.1, 0.2, 0.3]
    with pytest.raises(ParameterError):
        SweepGrids([], balls)
    with pytest.raises(ParameterError):
        SweepGrids([0.0, 0.1], balls)


def test_grand_lebesgue_matches_grand_grand_when_unshifted():
    params = SpaceParams(2.0, 0.0, 1.0, 0.0)
    f = power_fn(0.5, cells=1024, levels=60)
    grids = make_sweeps(f.grid, s_max(params))
    gl = grand_lebesgue_norm(f, 2.0, 1.0, grids.eps)
    assert grand_grand_norm(f, params, grids) == pytest.approx(gl, rel=1e-12)
    # borderline function: finite grand norm near 2 although not in L^2
    assert gl == pytest.approx(2.0, rel=0.03)
    with pytest.raises(ParameterError):
        grand_lebesgue_norm(f, 2.0, 1.0, [0.5, 1.0])


def test_delta_examples():
    params = SpaceParams(2.0, 0.5, 1.0, 0.3)
    assert delta_exponent(0.4, 0.4, params) == 0.0
    expected = (1 - 0.5 + 0.6) * 0.3 / (1.9 * 1.6)
    assert delta_exponent(0.4, 0.1, params) == pytest.approx(expected, rel=1e-15)
    with pytest.raises(ParameterError):
        delta_exponent(0.1, 0.4, params)
    with pytest.raises(ParameterError):
        delta_exponent(1.0, 0.1, params)
    with pytest.raises(ParameterError):
        delta_exponent_direct(0.2, -0.1, params)


@st.composite
def delta_tuples(draw):
    p = draw(st.floats(1.01, 6.0))
    lam = draw(st.one_of(st.just(0.0), st.floats(1e-3, 0.99)))
    alpha = 0.0 if lam == 0 else draw(st.floats(0.0, 5.0))
    params = SpaceParams(p, lam, draw(st.floats(0.1, 5.0)), alpha)
    top = s_max(params)
    a, b = sorted(draw(st.lists(st.floats(0.0, 1.0, exclude_max=True), min_size=2, max_size=2)))
    return params, b * top, a * top


@settings(max_examples=500, deadline=None)
@given(delta_tuples())
def test_delta_closed_form_equals_difference(t):
    params, eps, sigma = t
    d = delta_exponent(eps, sigma, params)
    assert d == pytest.approx(delta_exponent_direct(eps, sigma, params), abs=1e-12)
    assert 0.0 <= d <= 1.0


def test_delta_vectorized():
    params = SpaceParams(2.5, 0.4, 1.0, 0.2)
    eps = np.array([0.5, 1.0, 1.4])
    sig = np.array([0.1, 0.5, 1.0])
    np.testing.assert_allclose(
        delta_exponent(eps, sig, params), delta_exponent_direct(eps, sig, params), atol=1e-15
    )
    assert math.isfinite(float(delta_exponent(1.4, 0.0, params)))
