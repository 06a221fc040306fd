"""Derivative-free optimization: grid scans and Nelder-Mead refinement."""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

import numpy as np

from .model import SampleSeries, chirp_phase


@dataclass(frozen=True)
class SimplexConfig:
    """Nelder-Mead settings.

    f_tolerance is a relative function-spread threshold and x_tolerance an
    absolute simplex-diameter threshold; the search stops once both hold
    simultaneously.  A function-spread test alone would stop at symmetric
    ties (equal values at distant vertices), a diameter test alone would
    grind on flat plateaus.
    """

    max_iterations: int = 2000
    f_tolerance: float = 1e-12
    x_tolerance: float = 1e-10
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.f_tolerance < 0 or self.x_tolerance < 0:
            raise ValueError("tolerances must be nonnegative")
        if not self.reflection > 0:
            raise ValueError("reflection coefficient must be positive")
        if not self.expansion > 1:
            raise ValueError("expansion coefficient must exceed 1")
        if not 0 < self.contraction < 1:
            raise ValueError("contraction coefficient must lie in (0, 1)")
        if not 0 < self.shrink < 1:
            raise ValueError("shrink coefficient must lie in (0, 1)")


@dataclass(frozen=True)
class NelderMeadResult:
    x: np.ndarray
    fun: float
    iterations: int
    converged: bool
    fevals: int
    nonfinite_evals: int


def nelder_mead(
    f,
    x0,
    config: SimplexConfig | None = None,
    steps=None,
) -> NelderMeadResult:
    """Minimize `f` by the downhill simplex method from starting point `x0`.

    The initial simplex is x0 plus one vertex per coordinate, displaced by
    `steps` (default max(|x0_i| * 0.05, 1e-4), scale-aware for coordinates of
    very different magnitude).  Non-finite objective values after the start
    are treated as worst-possible and counted in the result; a non-finite
    value at x0 itself is an error.
    """
    cfg = config or SimplexConfig()
    x0 = np.asarray(x0, dtype=np.float64).ravel()
    d = x0.size
    if d < 1:
        raise ValueError("x0 must have at least one coordinate")
    if steps is None:
        steps = np.maximum(np.abs(x0) * 0.05, 1e-4)
    else:
        steps = np.asarray(steps, dtype=np.float64).ravel()
        if steps.shape != x0.shape:
            raise ValueError("steps must match the dimension of x0")

    state = {"fevals": 0, "nonfinite": 0}

    def evaluate(x):
        state["fevals"] += 1
        val = f(x)
        if not np.isfinite(val):
            state["nonfinite"] += 1
            return np.inf
        return float(val)

    f0 = f(x0)
    state["fevals"] += 1
    if not np.isfinite(f0):
        raise ValueError(f"objective is not finite at the initial point: {f0!r}")

    verts = np.tile(x0, (d + 1, 1))
    for i in range(d):
        verts[i + 1, i] += steps[i]
    fvals = np.array([float(f0)] + [evaluate(v) for v in verts[1:]])

    rho, chi, gam, sig = cfg.reflection, cfg.expansion, cfg.contraction, cfg.shrink
    converged = False
    iterations = 0
    tiny = np.finfo(np.float64).tiny

    for iterations in range(1, cfg.max_iterations + 1):
        order = np.argsort(fvals, kind="stable")
        verts, fvals = verts[order], fvals[order]

        f_best, f_worst = fvals[0], fvals[-1]
        spread = 2.0 * abs(f_worst - f_best) / (abs(f_worst) + abs(f_best) + tiny)
        diameter = np.max(np.abs(verts[1:] - verts[0]))
        if spread <= cfg.f_tolerance and diameter <= cfg.x_tolerance:
            converged = True
            break

        centroid = verts[:-1].mean(axis=0)
        xr = centroid + rho * (centroid - verts[-1])
        fr = evaluate(xr)

        if fr < fvals[0]:
            xe = centroid + rho * chi * (centroid - verts[-1])
            fe = evaluate(xe)
            if fe < fr:
                verts[-1], fvals[-1] = xe, fe
            else:
                verts[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            verts[-1], fvals[-1] = xr, fr
        else:
            if fr < fvals[-1]:
                xc = centroid + gam * rho * (centroid - verts[-1])
            else:
                xc = centroid - gam * (centroid - verts[-1])
            fc = evaluate(xc)
            if fc < min(fr, fvals[-1]):
                verts[-1], fvals[-1] = xc, fc
            else:
                for i in range(1, d + 1):
                    verts[i] = verts[0] + sig * (verts[i] - verts[0])
                    fvals[i] = evaluate(verts[i])

    order = np.argsort(fvals, kind="stable")
    verts, fvals = verts[order], fvals[order]
    return NelderMeadResult(
        x=verts[0].copy(),
        fun=float(fvals[0]),
        iterations=iterations,
        converged=converged,
        fevals=state["fevals"],
        nonfinite_evals=state["nonfinite"],
    )


@dataclass(frozen=True)
class GridSpec:
    """Rectangular evaluation grid: inclusive per-dimension linspace."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        counts = tuple(int(v) for v in np.atleast_1d(self.counts))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "counts", counts)
        if not len(lower) == len(upper) == len(counts):
            raise ValueError("lower/upper/counts must have the same length")
        if len(lower) == 0:
            raise ValueError("grid must have at least one dimension")
        if any(lo >= hi for lo, hi in zip(lower, upper)):
            raise ValueError("grid bounds must satisfy lower < upper")
        if any(c < 2 for c in counts):
            raise ValueError("each dimension needs at least 2 points")

    @property
    def ndim(self) -> int:
        return len(self.counts)

    @property
    def size(self) -> int:
        out = 1
        for c in self.counts:
            out *= c
        return out

    def axes(self) -> list[np.ndarray]:
        return [
            np.linspace(lo, hi, c)
            for lo, hi, c in zip(self.lower, self.upper, self.counts)
        ]


def interior_grid(lower: float, upper: float, count: int, ndim: int) -> GridSpec:
    """Grid of `count` points per dimension strictly inside (lower, upper).

    Points sit at lower + j*(upper-lower)/(count+1) for j = 1..count, which
    keeps chirp parameters away from the invalid endpoints {0, pi}.
    """
    step = (upper - lower) / (count + 1)
    return GridSpec(
        lower=(lower + step,) * ndim,
        upper=(upper - step,) * ndim,
        counts=(count,) * ndim,
    )


def grid_search(f, grid: GridSpec, top_m: int) -> list[tuple[tuple[float, ...], float]]:
    """Evaluate `f` on every grid point; return the best `top_m` ascending.

    Ties are broken by the lowest flattened index (row-major over the axes),
    so the result is deterministic.
    """
    if top_m < 1:
        raise ValueError("top_m must be positive")
    if grid.size < top_m:
        raise ValueError(f"grid has {grid.size} points, fewer than top_m={top_m}")
    axes = grid.axes()
    # min-heap on (-value, -flat_index) keeps the top_m smallest values and
    # prefers the lowest flattened (row-major) index on ties
    heap: list[tuple[float, int, tuple[float, ...]]] = []
    for flat, idx in enumerate(itertools.product(*(range(c) for c in grid.counts))):
        point = tuple(float(ax[i]) for ax, i in zip(axes, idx))
        entry = (-float(f(np.array(point))), -flat, point)
        if len(heap) < top_m:
            heapq.heappush(heap, entry)
        elif entry > heap[0]:
            heapq.heapreplace(heap, entry)
    ranked = sorted(((-nv, -nf, p) for nv, nf, p in heap), key=lambda t: (t[0], t[1]))
    return [(p, v) for v, _, p in ranked]


def dechirp_scan(y: SampleSeries, theta2: float, n_freq: int) -> np.ndarray:
    """Chirp periodogram I(theta1_j, theta2) on the Fourier grid via one FFT.

    The series is de-chirped by exp(-i*theta2*t^2) and transformed; entry j
    equals the direct periodogram at theta1_j = 2*pi*j/n_freq to rounding
    error.  Requires n_freq >= n and a power of two.
    """
    n = y.n
    if n_freq < n:
        raise ValueError(f"n_freq={n_freq} must be at least the series length {n}")
    if n_freq & (n_freq - 1) != 0:
        raise ValueError(f"n_freq={n_freq} must be a power of two")
    phi2 = chirp_phase(0.0, theta2, n)
    buf = np.zeros(n_freq, dtype=np.complex128)
    buf[1 : n + 1] = y.values * np.exp(-1j * phi2)
    spectrum = np.fft.fft(buf)
    return (2.0 / n) * np.abs(spectrum) ** 2
