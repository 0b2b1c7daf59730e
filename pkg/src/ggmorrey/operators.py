"""Maximal and singular integral operators on grids, and kernel checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, signal

from .grid import GridFunction, default_ball_family

__all__ = [
    "Kernel",
    "ModulusW",
    "KernelReport",
    "KERNELS",
    "maximal",
    "singular",
    "kernel_conditions",
    "doubling_check",
    "dini_integral",
    "DiniDivergence",
]


def _hilbert(diff):
    return 1.0 / diff[..., 0]


def _riesz(j):
    def k(diff):
        r = np.sqrt((diff**2).sum(axis=-1))
        return diff[..., j] / r**3

    return k


@dataclass(frozen=True)
class Kernel:
    """Convolution-type kernel ``K(x, y) = k(x - y)``."""

    name: str
    dim: int

    def __call__(self, x, y):
        diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
        return KERNELS[self.name][1](diff)

    @classmethod
    def get(cls, name):
        if name not in KERNELS:
            raise ValueError(f"unknown kernel {name!r}; choose from {sorted(KERNELS)}")
        return cls(name, KERNELS[name][0])


KERNELS = {
    "hilbert": (1, _hilbert),
    "riesz1": (2, _riesz(0)),
    "riesz2": (2, _riesz(1)),
}


@dataclass(frozen=True)
class ModulusW:
    """Smoothness modulus ``w(t) = coefficient * t**gamma``."""

    gamma: float
    coefficient: float = 1.0

    def __post_init__(self):
        if not self.coefficient > 0:
            raise ValueError("modulus coefficient must be positive")
        if self.gamma < 0:
            raise ValueError("modulus must be nondecreasing (gamma >= 0)")

    def __call__(self, t):
        return self.coefficient * np.asarray(t, dtype=float) ** self.gamma


def maximal(f, balls=None):
    """Centered maximal function ``max_r (1/|B~|) int_{B~(x,r)} |f|`` at every cell.

    ``balls`` must be centered at every cell center of ``f.grid`` in grid
    order; by default it is the full-center family with geometric radii.
    """
    grid = f.grid
    if balls is None:
        balls = default_ball_family(grid, centers="all")
    if len(balls.centers) != grid.size or not np.array_equal(balls.centers, grid.centers):
        raise ValueError("maximal operator needs a ball at every cell center")
    sums = balls.sums(np.abs(f.values) * grid.measures)
    # a ball around a center always holds that center's cell, so no zero divisors
    avg = sums / balls.intersected
    return GridFunction(grid, avg.max(axis=1))


def singular(f, kernel, delta_factor=0.5, method="auto"):
    """Truncated sum ``sum_{|x - y| > delta*h} K(x, y) f(y) |cell|`` at every center.

    On a uniform grid only the self cell is excluded when ``delta_factor <
    1``, and for odd kernels the symmetric pairs around ``x`` cancel as in
    the principal value. ``method`` is ``"direct"`` (chunked O(N^2)),
    ``"fft"`` (single-box uniform grids) or ``"auto"``.
    """
    grid = f.grid
    if isinstance(kernel, str):
        kernel = Kernel.get(kernel)
    if kernel.dim != grid.dim:
        raise ValueError(f"kernel {kernel.name} is {kernel.dim}-dimensional, grid is {grid.dim}-dimensional")
    if not grid.uniform:
        raise ValueError("singular operator requires a uniform grid")
    if not 0 < delta_factor < 1:
        raise ValueError("delta_factor must lie in (0, 1)")
    if method == "auto":
        method = "fft" if len(grid.domain.boxes) == 1 else "direct"
    if method == "fft":
        return GridFunction(grid, _singular_fft(f, kernel, delta_factor))
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    return GridFunction(grid, _singular_direct(f, kernel, delta_factor))


def _singular_direct(f, kernel, delta_factor, chunk=512):
    grid = f.grid
    c = grid.centers
    w = f.values * grid.measures
    cut2 = (delta_factor * grid.h) ** 2
    out = np.empty(grid.size)
    for start in range(0, grid.size, chunk):
        x = c[start : start + chunk]
        diff = x[:, None, :] - c[None, :, :]
        keep = (diff**2).sum(axis=-1) > cut2
        with np.errstate(divide="ignore", invalid="ignore"):
            k = KERNELS[kernel.name][1](diff)
        out[start : start + chunk] = np.where(keep, k, 0.0) @ w
    return out


def _singular_fft(f, kernel, delta_factor):
    grid = f.grid
    (box,) = grid.domain.boxes
    shape = tuple(int(round((b - a) / grid.h)) for a, b in box)
    if math.prod(shape) != grid.size:
        raise ValueError("grid is not a single tensor-product box")
    w = (f.values * grid.measures).reshape(shape)
    # kernel sampled on all center offsets (-(n-1)..n-1) * h per axis
    offs = np.meshgrid(*[np.arange(-(n - 1), n) * grid.h for n in shape], indexing="ij")
    diff = np.stack(offs, axis=-1)
    keep = (diff**2).sum(axis=-1) > (delta_factor * grid.h) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(keep, KERNELS[kernel.name][1](diff), 0.0)
    full = signal.fftconvolve(k, w, mode="full")
    idx = tuple(slice(n - 1, 2 * n - 1) for n in shape)
    return full[idx].ravel()


@dataclass(frozen=True)
class KernelReport:
    kernel: str
    gamma: float
    samples: int
    c_size: float
    c_smooth: float

    @property
    def passed(self):
        return math.isfinite(self.c_size) and math.isfinite(self.c_smooth)


def kernel_conditions(kernel, w, sample_count=10_000, seed=0, cone=2.0):
    """Empirical size and smoothness constants of ``kernel`` on the unit box.

    Triples ``(x1, x2, y)`` are drawn with ``|x2 - y| > cone * |x1 - x2|``.
    ``c_size = max |K(x,y)| |x-y|^n`` and ``c_smooth = max (|K(x1,y) -
    K(x2,y)| + |K(y,x1) - K(y,x2)|) |x2-y|^n / w(|x2-x1|/|x2-y|)``.
    """
    if isinstance(kernel, str):
        kernel = Kernel.get(kernel)
    if sample_count < 1:
        raise ValueError("sample_count must be positive")
    rng = np.random.default_rng(seed)
    n = kernel.dim
    x2 = rng.random((sample_count, n))
    y = rng.random((sample_count, n))
    dist = np.sqrt(((x2 - y) ** 2).sum(axis=1))
    u = rng.normal(size=(sample_count, n))
    u /= np.sqrt((u**2).sum(axis=1, keepdims=True))
    t = rng.random(sample_count)
    x1 = x2 + (t * dist / cone)[:, None] * u
    ok = (dist > 0) & (t > 0)
    x1, x2, y, dist = x1[ok], x2[ok], y[ok], dist[ok]
    with np.errstate(all="ignore"):
        size = np.concatenate(
            [
                np.abs(kernel(x2, y)) * dist**n,
                np.abs(kernel(x1, y)) * np.sqrt(((x1 - y) ** 2).sum(axis=1)) ** n,
            ]
        )
        lhs = np.abs(kernel(x1, y) - kernel(x2, y)) + np.abs(kernel(y, x1) - kernel(y, x2))
        ratio = np.sqrt(((x2 - x1) ** 2).sum(axis=1)) / dist
        smooth = lhs * dist**n / w(ratio)
    c_size = float(np.max(size)) if np.all(np.isfinite(size)) else math.inf
    c_smooth = float(np.max(smooth)) if np.all(np.isfinite(smooth)) else math.inf
    return KernelReport(kernel.name, w.gamma, int(ok.sum()), c_size, c_smooth)


def doubling_check(w, t_samples=None):
    """``max w(2t)/w(t)`` over the samples (geometric grid in (0, 1) by default)."""
    if t_samples is None:
        t_samples = 2.0 ** -np.linspace(0.5, 40, 80)
    t = np.asarray(t_samples, dtype=float)
    if t.size == 0:
        raise ValueError("need at least one sample")
    return float(np.max(w(2 * t) / w(t)))


class DiniDivergence(ArithmeticError):
    pass


def dini_integral(w, method="closed"):
    """``int_0^1 w(t)/t dt``; closed form ``coefficient/gamma`` or adaptive quadrature."""
    if w.gamma <= 0:
        raise DiniDivergence(f"int_0^1 w(t)/t dt diverges for gamma = {w.gamma}")
    if method == "closed":
        return w.coefficient / w.gamma
    if method != "quadrature":
        raise ValueError(f"unknown method {method!r}")
    value, _ = integrate.quad(lambda t: w(t) / t, 0.0, 1.0, limit=200)
    return float(value)
