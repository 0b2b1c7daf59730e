"""Lebesgue, Morrey, grand Lebesgue and grand grand Morrey norms on grids.

Suprema over the exponent shift ``eps`` and over balls ``(x, r)`` are
maxima over finite sweep grids, so every returned value is a lower bound
of the continuous supremum that converges as the sweeps are refined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import BallFamily, default_ball_family

__all__ = [
    "ParameterError",
    "SpaceParams",
    "SweepGrids",
    "eps_grid",
    "make_sweeps",
    "lebesgue_norm",
    "morrey_norm",
    "shifted_morrey_norms",
    "s_max",
    "eps_weight",
    "phi",
    "phi_terms",
    "grand_grand_norm",
    "grand_lebesgue_norm",
    "delta_exponent",
    "delta_exponent_direct",
]


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class SpaceParams:
    """Exponents ``(p, lam, theta, alpha)`` of a grand grand Morrey space."""

    p: float
    lam: float = 0.0
    theta: float = 1.0
    alpha: float = 0.0

    def __post_init__(self):
        for name in ("p", "lam", "theta", "alpha"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ParameterError(f"{name} must be a finite real, got {v!r}")
        if not self.p > 1:
            raise ParameterError("p must exceed 1")
        if not 0 <= self.lam < 1:
            raise ParameterError("lambda must lie in [0, 1)")
        if not self.theta > 0:
            raise ParameterError("theta must be positive")
        if not self.alpha >= 0:
            raise ParameterError("alpha must be nonnegative")
        if self.lam == 0 and self.alpha > 0:
            raise ParameterError("degenerate s_max: lambda = 0 with alpha > 0 leaves an empty eps range")

    def shifted(self, eps):
        """Morrey exponents ``(p - eps, lam - alpha*eps)`` at shift ``eps``."""
        return self.p - eps, self.lam - self.alpha * eps


def s_max(params):
    """``min(p - 1, lam/alpha)`` with ``lam/alpha = inf`` when ``alpha == 0``."""
    if params.alpha == 0:
        return params.p - 1
    return min(params.p - 1, params.lam / params.alpha)


def eps_grid(s, approach_count=20, uniform_count=64):
    """Shifts in ``(0, s)`` crowding both endpoints.

    Union of ``s*2**-i`` and ``s*(1 - 2**-i)`` for i = 1..approach_count and
    ``uniform_count`` evenly spaced interior points.
    """
    if not s > 0:
        raise ParameterError(f"sweep limit must be positive, got {s}")
    i = np.arange(1, approach_count + 1)
    pts = np.concatenate(
        [
            s * 2.0**-i,
            s * (1 - 2.0**-i),
            s * np.arange(1, uniform_count + 1) / (uniform_count + 1),
        ]
    )
    pts = np.unique(pts)
    return pts[(pts > 0) & (pts < s)]


@dataclass(frozen=True, eq=False)
class SweepGrids:
    """Finite stand-ins for the sup over ``eps`` and the sup over balls."""

    eps: np.ndarray
    balls: BallFamily

    def __post_init__(self):
        eps = np.unique(np.asarray(self.eps, dtype=float))
        if eps.size == 0 or np.any(eps <= 0):
            raise ParameterError("eps grid must be nonempty and positive")
        eps.flags.writeable = False
        object.__setattr__(self, "eps", eps)

    def below(self, s):
        return self.eps[self.eps < s]

    def union(self, other_eps):
        return SweepGrids(np.union1d(self.eps, other_eps), self.balls)


def make_sweeps(grid, s, approach_count=20, uniform_count=64, balls=None, **ball_kw):
    if balls is None:
        balls = default_ball_family(grid, **ball_kw)
    return SweepGrids(eps_grid(s, approach_count, uniform_count), balls)


def lebesgue_norm(f, p):
    """``(sum |f|^p * measure)^(1/p)``."""
    if not p >= 1:
        raise ParameterError(f"p must be at least 1, got {p}")
    return float(np.sum(np.abs(f.values) ** p * f.grid.measures) ** (1.0 / p))


def _morrey_check(p, lam):
    if not p >= 1:
        raise ParameterError(f"p must be at least 1, got {p}")
    if not 0 <= lam < 1:
        # lam - alpha*eps may round a hair below zero at the eps limit
        if -1e-12 < lam < 0:
            return 0.0
        raise ParameterError(f"lambda must lie in [0, 1), got {lam}")
    return lam


def morrey_norm(f, p, lam, balls):
    """``max over balls of (|B(x,r)|^-lam * int_{B(x,r) ∩ Ω} |f|^p)^(1/p)``.

    The denominator is the full ball measure ``v_n r^n`` even when the ball
    sticks out of the domain.
    """
    lam = _morrey_check(p, lam)
    sums = balls.sums(np.abs(f.values) ** p * f.grid.measures)
    vals = sums / balls.full_measure[None, :] ** lam
    return float(vals.max() ** (1.0 / p))


def eps_weight(eps, params):
    """``eps**(theta / (p - eps))``."""
    return eps ** (params.theta / (params.p - eps))


def shifted_morrey_norms(f, q, lam, balls, chunk_elements=2**24):
    """Morrey norms ``||f||_{L^{q_k, lam_k}}`` for arrays of exponent pairs.

    Ball sums for several exponents are computed together, in chunks of
    about ``chunk_elements`` ball values.
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    lam = np.broadcast_to(np.asarray(lam, dtype=float), q.shape)
    lam = np.array([_morrey_check(a, b) for a, b in zip(q, lam)])
    absf = np.abs(f.values)
    m = f.grid.measures
    out = np.empty(q.shape)
    step = max(1, chunk_elements // max(1, balls.shape[0] * balls.shape[1]))
    for start in range(0, len(q), step):
        qs, ls = q[start : start + step], lam[start : start + step]
        sums = balls.sums(absf[None, :] ** qs[:, None] * m[None, :])
        vals = sums / balls.full_measure[None, None, :] ** ls[:, None, None]
        out[start : start + step] = vals.max(axis=(1, 2)) ** (1.0 / qs)
    return out


def phi_terms(f, params, eps, balls):
    """``eps**(theta/(p-eps)) * ||f||_{L^{p-eps, lam-alpha*eps}}`` for each eps."""
    eps = np.atleast_1d(np.asarray(eps, dtype=float))
    q, lam = params.shifted(eps)
    return eps_weight(eps, params) * shifted_morrey_norms(f, q, lam, balls)


def phi(f, params, s, grids):
    """``sup_{0<eps<s} eps**(theta/(p-eps)) ||f||_{L^{p-eps, lam-alpha*eps}}``
    over the grid shifts below ``s``."""
    smax = s_max(params)
    if not 0 < s <= smax * (1 + 1e-12):
        raise ParameterError(f"s = {s} outside (0, s_max = {smax}]")
    eps = grids.below(s)
    if eps.size == 0:
        raise ParameterError(f"eps grid has no points below s = {s}")
    return float(phi_terms(f, params, eps, grids.balls).max())


def grand_grand_norm(f, params, grids):
    """The functional ``phi`` at ``s = s_max``."""
    return phi(f, params, s_max(params), grids)


def grand_lebesgue_norm(f, p, theta, eps):
    """``max over eps of eps**(theta/(p-eps)) ||f||_{L^{p-eps}}``; eps in (0, p-1)."""
    eps = np.asarray(eps, dtype=float)
    if np.any((eps <= 0) | (eps >= p - 1)):
        raise ParameterError("grand Lebesgue shifts must lie in (0, p-1)")
    return float(max(e ** (theta / (p - e)) * lebesgue_norm(f, p - e) for e in eps))


def _delta_check(eps, sigma, params):
    eps, sigma = np.asarray(eps, dtype=float), np.asarray(sigma, dtype=float)
    upper = s_max(params)
    if np.any(sigma < 0) or np.any(eps < sigma) or np.any(eps >= upper):
        raise ParameterError(f"need 0 <= sigma <= eps < {upper}")
    return eps, sigma


def delta_exponent(eps, sigma, params):
    """``(1 - lam + alpha*p)(eps - sigma) / ((p - sigma)(p - eps))``."""
    eps, sigma = _delta_check(eps, sigma, params)
    p, lam, a = params.p, params.lam, params.alpha
    out = (1 - lam + a * p) * (eps - sigma) / ((p - sigma) * (p - eps))
    return float(out) if out.ndim == 0 else out


def delta_exponent_direct(eps, sigma, params):
    """The same exponent as the difference ``e(eps) - e(sigma)`` with
    ``e(t) = (1 + alpha*t - lam)/(p - t)``."""
    eps, sigma = _delta_check(eps, sigma, params)
    p, lam, a = params.p, params.lam, params.alpha
    out = (1 + a * eps - lam) / (p - eps) - (1 + a * sigma - lam) / (p - sigma)
    return float(out) if out.ndim == 0 else out
