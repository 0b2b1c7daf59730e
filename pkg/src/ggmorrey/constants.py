"""Explicit constants of the Morrey-space bounds and of the reduction to them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .grid import UNIT_BALL_VOLUME
from .norms import ParameterError, s_max

__all__ = [
    "ConstantConfig",
    "Interval",
    "dominance_constant",
    "maximal_constant",
    "cz_constant",
    "reduction_constant",
    "admissible_sigma",
    "sup_shifted_constant",
    "dominance_factor",
    "embedding_constant",
]


@dataclass(frozen=True)
class ConstantConfig:
    """Unspecified multiplicative constants; ``c0`` for the maximal bound,
    ``c`` for the singular-integral bound, ``C0`` in front of the reduction
    constant."""

    c0: float = 1.0
    c: float = 1.0
    C0: float = 1.0

    def __post_init__(self):
        for name in ("c0", "c", "C0"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise ParameterError(f"constant {name} must be a finite nonnegative real, got {v}")


class Interval(NamedTuple):
    """Open interval ``(lo, hi)``."""

    lo: float
    hi: float

    def __contains__(self, x):
        return self.lo < x < self.hi


def dominance_constant(n, d):
    """``max(1, v_n d^n)``: bounds ``|B(x,r)|**delta`` for r <= d and delta in [0, 1]."""
    if not d > 0:
        raise ParameterError("diameter must be positive")
    return max(1.0, UNIT_BALL_VOLUME[n] * d**n)


def dominance_factor(params, s, sigma):
    """``s**(theta/(p-s)) * sigma**(-theta/(p-sigma))`` for ``0 < sigma < s``."""
    if not 0 < sigma < s:
        raise ParameterError(f"need 0 < sigma < s, got sigma={sigma}, s={s}")
    th, p = params.theta, params.p
    return s ** (th / (p - s)) * sigma ** (-th / (p - sigma))


def embedding_constant(params, eps, measure):
    """``max over eps of eps**(theta/(p-eps)) * measure**(eps/(p(p-eps)))``.

    Holder on a set of finite measure turns an ``L^p`` bound into a bound
    on every shifted ``L^{p-eps}`` norm, hence on the grand Lebesgue norm.
    """
    eps = np.asarray(eps, dtype=float)
    p, th = params.p, params.theta
    return float(np.max(eps ** (th / (p - eps)) * measure ** (eps / (p * (p - eps)))))


def maximal_constant(p, lam, n, cfg=ConstantConfig()):
    """``2**(n lam/p) * c0 * (p/(p-1))**(1/p) + 1``."""
    if not p > 1:
        raise ParameterError("p must exceed 1")
    if not 0 <= lam < 1:
        raise ParameterError("lambda must lie in [0, 1)")
    return 2.0 ** (n * lam / p) * cfg.c0 * (p / (p - 1)) ** (1.0 / p) + 1.0


def cz_constant(p, lam, cfg=ConstantConfig()):
    """Bound on the Morrey operator norm of a Calderon-Zygmund operator.

    ``c*(p/(p-1) + p/(2-p) + (p-lam+1)/(1-lam))`` for 1 < p < 2 and
    ``c*(p + p/(p-2) + (p-lam+1)/(1-lam))`` for p > 2. Undefined at p = 2.
    """
    if not p > 1:
        raise ParameterError("p must exceed 1")
    if p == 2:
        raise ParameterError("no bound is given at p = 2")
    if not 0 <= lam < 1:
        raise ParameterError("lambda must lie in [0, 1)")
    tail = (p - lam + 1) / (1 - lam)
    if p < 2:
        return cfg.c * (p / (p - 1) + p / (2 - p) + tail)
    return cfg.c * (p + p / (p - 2) + tail)


def reduction_constant(params, sigma, sup_c, cfg=ConstantConfig()):
    """``C0 * sigma**(-theta/(p-sigma)) * sup_c``."""
    upper = s_max(params)
    if not 0 < sigma < upper:
        raise ParameterError(f"sigma = {sigma} outside (0, {upper})")
    if not (math.isfinite(sup_c) and sup_c >= 0):
        raise ParameterError("sup_c must be finite and nonnegative")
    return cfg.C0 * sigma ** (-params.theta / (params.p - sigma)) * sup_c


def admissible_sigma(params, kind):
    """Open interval of sigma keeping the shifted operator constants bounded.

    maximal: ``(0, min(p-1, s_max))``; singular: ``(0, min(p-1, s_max))`` for
    p < 2 and ``(0, min(p-2, s_max))`` for p > 2.
    """
    top = s_max(params)
    p = params.p
    if kind == "maximal":
        return Interval(0.0, min(p - 1, top))
    if kind == "singular":
        if p == 2:
            raise ParameterError("no singular-integral bound is given at p = 2")
        return Interval(0.0, min(p - 1 if p < 2 else p - 2, top))
    raise ParameterError(f"unknown operator kind {kind!r}")


def sup_shifted_constant(kind, params, eps, n=1, cfg=ConstantConfig()):
    """``max over eps of C_{p-eps, lam-alpha*eps}`` for the given operator kind."""
    vals = []
    for e in np.atleast_1d(eps):
        q, lam = params.shifted(e)
        lam = max(lam, 0.0) if lam > -1e-12 else lam
        if kind == "maximal":
            vals.append(maximal_constant(q, lam, n, cfg))
        elif kind == "singular":
            vals.append(cz_constant(q, lam, cfg))
        else:
            raise ParameterError(f"unknown operator kind {kind!r}")
    return float(max(vals))
