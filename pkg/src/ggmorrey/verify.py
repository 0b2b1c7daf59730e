"""Inequality suites over a corpus of test functions.

Each suite evaluates both sides of an inequality on grids and returns a
:class:`Report`. Inequalities that hold exactly at the grid level (a max
dominates each of its terms, Holder on a discrete measure) are checked at
``EXACT_TOL``; inequalities comparing independently discretized sides are
checked at ``QUAD_TOL`` and must hold at two refinement levels.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import constants as K
from .dsl import FamilySpec, evaluate, family_to_ast, parse
from .grid import Domain, Grading, GridFunction, default_ball_family, make_grid
from .norms import (
    ParameterError,
    SweepGrids,
    eps_grid,
    grand_grand_norm,
    grand_lebesgue_norm,
    lebesgue_norm,
    morrey_norm,
    phi,
    s_max,
)
from .operators import (
    DiniDivergence,
    Kernel,
    ModulusW,
    dini_integral,
    doubling_check,
    kernel_conditions,
    maximal,
    singular,
)

__all__ = [
    "EXACT_TOL",
    "QUAD_TOL",
    "Case",
    "Report",
    "CorpusItem",
    "default_corpus",
    "Discretization",
    "RefineResult",
    "refine_until",
    "NORM_KINDS",
    "norm_computation",
    "run_embedding_suite",
    "run_dominance_suite",
    "run_reduction_suite",
    "run_operator_oracle_suite",
    "run_kernel_suite",
]

EXACT_TOL = 1e-10
QUAD_TOL = 1e-2


def _ratio(lhs, rhs):
    if rhs == 0:
        return 0.0 if lhs == 0 else math.inf
    return lhs / rhs


@dataclass
class Case:
    id: str
    params: dict
    lhs: float
    rhs: float
    tol: float
    grid: dict = field(default_factory=dict)
    passed: bool | None = None

    def __post_init__(self):
        self.lhs, self.rhs = float(self.lhs), float(self.rhs)
        if self.passed is None:
            self.passed = bool(self.ratio <= 1 + self.tol)

    @property
    def ratio(self):
        return _ratio(self.lhs, self.rhs)

    def to_dict(self):
        return {
            "id": self.id,
            "params": self.params,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "pass": self.passed,
            "grid": self.grid,
        }


@dataclass
class Report:
    """Outcome of one suite. ``informational`` reports never count as failed."""

    suite: str
    params: dict
    cases: list = field(default_factory=list)
    calibrated: dict = field(default_factory=dict)
    informational: bool = False

    @property
    def failures(self):
        return [c for c in self.cases if not c.passed]

    @property
    def passed(self):
        return self.informational or not self.failures

    @property
    def max_ratio(self):
        return max((c.ratio for c in self.cases), default=0.0)

    def to_dict(self):
        return {
            "suite": self.suite,
            "params": self.params,
            "cases": [c.to_dict() for c in self.cases],
            "summary": {
                "max_ratio": self.max_ratio,
                "n_fail": len(self.failures),
                "informational": self.informational,
                "calibrated": self.calibrated,
            },
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    def lines(self):
        """One ``PASS``/``FAIL`` line per case."""
        for c in self.cases:
            tag = "PASS" if c.passed else "FAIL"
            yield f"{tag} {self.suite}/{c.id}: lhs={c.lhs:.6g} rhs={c.rhs:.6g} ratio={c.ratio:.6g}"


@dataclass(frozen=True)
class CorpusItem:
    """A test function with the points where it blows up like ``|x-s|**-blowup``."""

    label: str
    ast: object
    singular_points: tuple = ()
    blowup: float = 0.0

    @classmethod
    def from_family(cls, label, spec, dim=1):
        blowup = spec.params["beta"] if spec.name == "power" else 0.0
        return cls(label, family_to_ast(spec, dim), tuple(spec.singular_points), max(blowup, 0.0))

    @classmethod
    def from_expr(cls, label, text, dim=1, singular_points=(), blowup=0.0):
        return cls(label, parse(text, dim), tuple(tuple(p) for p in singular_points), blowup)

    def sample(self, grid):
        return GridFunction(grid, evaluate(self.ast, grid.centers))

    def in_lebesgue(self, q, n=1):
        """Whether the function lies in ``L^q`` (finite measure domain)."""
        return self.blowup * q < n


def default_corpus(params, domain=None):
    """Constant, jump, integrable singularity, grand witness, Morrey witness and
    an oscillating singular function, all anchored at the lower domain corner."""
    domain = domain or Domain.interval(0.0, 1.0)
    n = domain.dim
    corner = tuple(a for a, _ in domain.boxes[0])
    p, lam = params.p, params.lam
    box0 = domain.boxes[0]
    half = tuple((a, a + 0.5 * (b - a)) if i == 0 else (a, b) for i, (a, b) in enumerate(box0))
    power = lambda beta: FamilySpec.power(beta, corner)
    items = [
        CorpusItem.from_family("const1", FamilySpec.constant(1.0), n),
        CorpusItem.from_family("indicator_half", FamilySpec.indicator(*half), n),
        CorpusItem.from_family("power_0.3", power(0.3 * n), n),
        CorpusItem.from_family("grand_witness", power(n / p), n),
        CorpusItem.from_family("morrey_witness", power(n * (1 - lam) / p), n),
    ]
    var = "x" if n == 1 else "x1"
    s0 = corner[0]
    dist = f"abs({var}-({s0!r}))" if n == 1 else f"(({var}-({s0!r}))^2+(x2-({corner[1]!r}))^2)^0.5"
    expr = f"sin({8 * math.pi!r}*{var})*{dist}^(-0.2)"
    items.append(CorpusItem.from_expr("osc_singular", expr, n, [corner], 0.2))
    return items


@dataclass(frozen=True)
class Discretization:
    """How grids and sweeps are built, and how they refine with ``level``.

    Each level doubles the cells per axis and the number of uniformly
    spaced shifts in the eps grid.
    """

    domain: Domain = field(default_factory=lambda: Domain.interval(0.0, 1.0))
    cells: int = 2**12
    grading_levels: int = 12
    grading_ratio: float = 0.5
    grading_subdivisions: int = 4
    approach_count: int = 20
    uniform_count: int = 64
    stride: int | None = None
    per_octave: int = 8
    min_radius_cells: float = 2.0

    def at(self, level):
        return replace(self, cells=self.cells * 2**level, uniform_count=self.uniform_count * 2**level)

    def grid(self, singular_points=(), graded=True):
        grading = None
        if graded and singular_points:
            grading = [
                Grading(pt, self.grading_levels, self.grading_ratio, self.grading_subdivisions)
                for pt in singular_points
            ]
        return make_grid(self.domain, self.cells, grading)

    def balls(self, grid, centers="auto"):
        return default_ball_family(
            grid, stride=self.stride, per_octave=self.per_octave,
            min_radius_cells=self.min_radius_cells, centers=centers,
        )

    def eps(self, s):
        return eps_grid(s, self.approach_count, self.uniform_count)

    def meta(self, grid, levels):
        return {"cells": grid.size, "levels": levels}


@dataclass(frozen=True)
class RefineResult:
    value: float
    converged: bool
    level: int
    history: tuple


def refine_until(compute: Callable[[int], float], rel_tol, max_levels=6):
    """Evaluate ``compute(level)`` for level = 0, 1, ... until two consecutive
    values agree to ``rel_tol``.

    Returns the finer value of the agreeing pair; ``level`` is the coarser
    level of that pair (so an exact computation converges at level 0). At
    most ``max_levels + 1`` evaluations are made.
    """
    if not rel_tol > 0:
        raise ValueError("rel_tol must be positive")
    history = [compute(0)]
    for level in range(1, max_levels + 1):
        history.append(compute(level))
        prev, cur = history[-2], history[-1]
        if abs(cur - prev) <= rel_tol * max(abs(cur), abs(prev)):
            return RefineResult(cur, True, level - 1, tuple(history))
    return RefineResult(history[-1], False, max_levels, tuple(history))


NORM_KINDS = ("lebesgue", "morrey", "grand_lebesgue", "grand_grand")


def norm_computation(kind, item, params, disc=Discretization()):
    """``level -> value`` for one norm of one function, for :func:`refine_until`.

    ``lebesgue`` and ``morrey`` use the unshifted exponents ``p`` and ``lam``;
    ``grand_lebesgue`` ignores ``lam`` and ``alpha``.
    """
    if kind not in NORM_KINDS:
        raise ValueError(f"unknown norm kind {kind!r}; choose from {NORM_KINDS}")

    def compute(level):
        d = disc.at(level)
        grid = d.grid(item.singular_points)
        f = item.sample(grid)
        if kind == "lebesgue":
            return lebesgue_norm(f, params.p)
        if kind == "grand_lebesgue":
            return grand_lebesgue_norm(f, params.p, params.theta, d.eps(params.p - 1))
        balls = d.balls(grid)
        if kind == "morrey":
            return morrey_norm(f, params.p, params.lam, balls)
        return grand_grand_norm(f, params, SweepGrids(d.eps(s_max(params)), balls))

    return compute


def _space(params):
    return {"p": params.p, "lambda": params.lam, "theta": params.theta, "alpha": params.alpha}


def run_embedding_suite(corpus, params, disc=Discretization()):
    """``||f||_{p-eps} <= eps**(-theta/(p-eps)) ||f||_{p)}`` for every grid eps, and
    ``||f||_{p)} <= embedding_constant * ||f||_p`` when ``f`` is in ``L^p``."""
    if params.alpha != 0 or params.lam != 0:
        raise ParameterError("the embedding suite needs alpha = 0 and lambda = 0")
    p, th = params.p, params.theta
    report = Report("embedding", _space(params))
    for item in corpus:
        grid = disc.grid(item.singular_points)
        f = item.sample(grid)
        eps = disc.eps(p - 1)
        grand = grand_lebesgue_norm(f, p, th, eps)
        meta = disc.meta(grid, 0)
        for e in eps:
            report.cases.append(
                Case(
                    f"{item.label}/lower/eps={e:.6g}",
                    {"f": item.label, "eps": float(e)},
                    lebesgue_norm(f, p - e),
                    e ** (-th / (p - e)) * grand,
                    EXACT_TOL,
                    meta,
                )
            )
        if item.in_lebesgue(p, grid.dim):
            c = K.embedding_constant(params, eps, grid.domain.measure)
            report.cases.append(
                Case(f"{item.label}/upper", {"f": item.label}, grand, c * lebesgue_norm(f, p), EXACT_TOL, meta)
            )
    return report


def _dominance_sides(f, params, s, sigma, disc, grid):
    balls = disc.balls(grid)
    eps_sigma = disc.eps(sigma)
    lhs = phi(f, params, s, SweepGrids(np.union1d(disc.eps(s), eps_sigma), balls))
    c = K.dominance_constant(grid.dim, grid.domain.diameter)
    rhs = c * K.dominance_factor(params, s, sigma) * phi(f, params, sigma, SweepGrids(eps_sigma, balls))
    return lhs, rhs


def run_dominance_suite(corpus, params, s, sigma, disc=Discretization(), levels=(0, 1)):
    """``phi(f, s) <= C s**(theta/(p-s)) sigma**(-theta/(p-sigma)) phi(f, sigma)``."""
    if not 0 < sigma < s < s_max(params):
        raise ParameterError(f"need 0 < sigma < s < s_max = {s_max(params)}")
    report = Report("dominance", {**_space(params), "s": s, "sigma": sigma})
    for item in corpus:
        per_level = []
        for level in levels:
            d = disc.at(level)
            grid = d.grid(item.singular_points)
            lhs, rhs = _dominance_sides(item.sample(grid), params, s, sigma, d, grid)
            per_level.append((lhs, rhs, grid))
        ok = all(_ratio(l, r) <= 1 + QUAD_TOL for l, r, _ in per_level)
        lhs, rhs, grid = per_level[-1]
        report.cases.append(
            Case(
                item.label,
                {"f": item.label, "ratios": [_ratio(l, r) for l, r, _ in per_level]},
                lhs, rhs, QUAD_TOL, disc.meta(grid, len(levels)), passed=ok,
            )
        )
    return report


def _apply(kind, f, disc, grid, kernel, delta_factor):
    if kind == "maximal":
        return maximal(f, disc.balls(grid, centers="all"))
    return singular(f, kernel, delta_factor)


def run_reduction_suite(
    kind,
    corpus,
    params,
    sigma,
    disc=Discretization(),
    cfg=K.ConstantConfig(),
    calibrate=True,
    levels=(0, 1),
    kernel="hilbert",
    delta_factor=0.5,
):
    """Morrey-layer ratios for shifts up to ``sigma``, then
    ``||Uf||_gg <= reduction_constant * ||f||_gg`` for each corpus member.

    With ``calibrate`` the free constant (``c0`` for ``maximal``, ``c`` for
    ``singular``) is set to the largest Morrey-layer ratio seen on the
    corpus at that level; otherwise the report is informational.
    """
    if sigma not in K.admissible_sigma(params, kind):
        raise ParameterError(f"sigma = {sigma} not admissible for {kind}")
    report = Report(
        f"reduction/{kind}",
        {**_space(params), "sigma": sigma, "kernel": kernel if kind == "singular" else None},
        informational=not calibrate,
    )
    top = s_max(params)
    outcome = {item.label: [] for item in corpus}
    layer_cases = []
    for li, level in enumerate(levels):
        d = disc.at(level)
        eps_sigma = np.append(d.eps(sigma), sigma)
        data = []
        worst = 0.0
        for item in corpus:
            grid = d.grid(item.singular_points, graded=(kind == "maximal"))
            f = item.sample(grid)
            uf = _apply(kind, f, d, grid, kernel, delta_factor)
            balls = d.balls(grid)
            pairs = []
            for e in eps_sigma:
                q, lam = params.shifted(e)
                pairs.append((e, morrey_norm(uf, q, lam, balls), morrey_norm(f, q, lam, balls)))
            worst = max([worst] + [_ratio(a, b) for _, a, b in pairs])
            sweeps = SweepGrids(d.eps(top), balls)
            data.append((item, grid, pairs, grand_grand_norm(uf, params, sweeps), grand_grand_norm(f, params, sweeps)))
        used = cfg
        if calibrate:
            used = replace(cfg, c0=worst) if kind == "maximal" else replace(cfg, c=worst)
            report.calibrated = {"c0": used.c0, "c": used.c}
        sup_c = K.sup_shifted_constant(kind, params, eps_sigma, d.domain.dim, used)
        bound = K.reduction_constant(params, sigma, sup_c, used)
        for item, grid, pairs, gg_u, gg_f in data:
            outcome[item.label].append((gg_u, bound * gg_f, grid))
            if li == len(levels) - 1:
                for e, a, b in pairs:
                    q, lam = params.shifted(e)
                    c_eps = K.sup_shifted_constant(kind, params, [e], d.domain.dim, used)
                    layer_cases.append(
                        Case(
                            f"{item.label}/morrey/eps={e:.6g}",
                            {"f": item.label, "layer": "morrey", "eps": float(e)},
                            a, c_eps * b, EXACT_TOL, d.meta(grid, len(levels)),
                        )
                    )
    for item in corpus:
        rows = outcome[item.label]
        ok = all(_ratio(l, r) <= 1 + QUAD_TOL for l, r, _ in rows)
        lhs, rhs, grid = rows[-1]
        report.cases.append(
            Case(
                f"{item.label}/grand_grand",
                {"f": item.label, "layer": "grand_grand", "ratios": [_ratio(l, r) for l, r, _ in rows]},
                lhs, rhs, QUAD_TOL, disc.meta(grid, len(levels)), passed=ok,
            )
        )
    report.cases.extend(layer_cases)
    return report


def maximal_oracle_error(cells):
    """Sup error of M(indicator(0, 1/2)) on (0,1) outside ``|x - 1/2| < 2h``."""
    grid = make_grid(Domain.interval(0.0, 1.0), cells)
    f = GridFunction.from_callable(grid, FamilySpec.indicator(0.0, 0.5))
    x = grid.centers[:, 0]
    exact = np.where(x < 0.5, 1.0, 0.5)
    mf = maximal(f).values
    keep = np.abs(x - 0.5) >= 2 * grid.h
    return float(np.max(np.abs(mf - exact)[keep] / exact[keep]))


def singular_oracle_error(cells):
    """Max relative error of the Hilbert transform of indicator(0,1) against
    ln(x/(1-x)) on [0.1, 0.9]."""
    grid = make_grid(Domain.interval(0.0, 1.0), cells)
    f = GridFunction.from_callable(grid, FamilySpec.indicator(0.0, 1.0))
    x = grid.centers[:, 0]
    keep = (x >= 0.1) & (x <= 0.9)
    exact = np.log(x[keep] / (1 - x[keep]))
    tf = singular(f, "hilbert").values[keep]
    return float(np.max(np.abs(tf - exact) / np.abs(exact)))


def run_operator_oracle_suite(cells=(2**12, 2**13, 2**14), max_tol=0.01, singular_tol=0.02, slack=0.1):
    """Operators against closed forms, plus monotone error decay across levels."""
    report = Report("operator_oracle", {"cells": list(cells)})
    for name, err_fn, tol in (
        ("maximal", maximal_oracle_error, max_tol),
        ("singular", singular_oracle_error, singular_tol),
    ):
        errs = [err_fn(n) for n in cells]
        for n, e in zip(cells, errs):
            report.cases.append(Case(f"{name}/cells={n}", {"operator": name, "tol": tol}, e, tol, 0.0, {"cells": n, "levels": 1}))
        for (n0, e0), (n1, e1) in zip(zip(cells, errs), zip(cells[1:], errs[1:])):
            report.cases.append(
                Case(
                    f"{name}/decay/{n0}->{n1}",
                    {"operator": name},
                    e1, (1 + slack) * e0, 0.0, {"cells": n1, "levels": 2},
                )
            )
    return report


def run_kernel_suite(kernel="hilbert", gamma=1.0, sample_count=10_000, seed=0):
    """Size and smoothness constants of a kernel and the doubling and Dini
    quantities of ``w(t) = t**gamma``; a case fails only when its value is
    infinite."""
    k = Kernel.get(kernel)
    rep = kernel_conditions(k, ModulusW(gamma), sample_count, seed)
    report = Report("kernel", {"kernel": kernel, "gamma": gamma, "samples": sample_count, "seed": seed})
    w = ModulusW(gamma)
    try:
        dini = dini_integral(w, method="quadrature")
    except DiniDivergence:
        dini = math.inf
    checks = (("size", rep.c_size), ("smooth", rep.c_smooth), ("doubling", doubling_check(w)), ("dini", dini))
    for name, value in checks:
        report.cases.append(
            Case(name, {"constant": name}, value, math.inf, 0.0, {"cells": 0, "levels": 0}, passed=math.isfinite(value))
        )
    return report
