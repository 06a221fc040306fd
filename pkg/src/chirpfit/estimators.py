"""Least squares (LSE) and approximate least squares (ALSE) chirp estimators.

The LSE minimizes the residual sum of squares; the linear amplitudes are
profiled out in closed form (separable regression), leaving a 2p-dimensional
nonlinear search over the frequency/rate pairs.  The ALSE maximizes the chirp
periodogram

    I(theta) = (2/n) |sum_t y(t) exp(-i(theta1 t + theta2 t^2))|^2

and recovers amplitudes from the corresponding projection sums.  Multiple
components are handled sequentially for the ALSE (estimate, subtract, repeat)
and jointly for the LSE.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import ChirpComponent, SampleSeries, chirp_phase
from .optim import NelderMeadResult, SimplexConfig, dechirp_scan, nelder_mead

MAX_DESIGN_CONDITION = 1e12

# blind-mode scan defaults: 4n points per axis over (0, pi), 5 refinement
# starts (the rate axis has a much narrower main lobe than the grid pitch,
# so several starts hedge against straddling; cost/robustness trade-off)
BLIND_POINTS_FACTOR = 4
BLIND_TOP_M = 5


class DegenerateDesignError(ValueError):
    """The regression design is numerically singular for the requested theta."""


class EstimateRangeError(RuntimeError):
    """A refined frequency/rate left the open interval (0, pi)."""


@dataclass(frozen=True)
class EstimationResult:
    """Estimates plus optimizer diagnostics.

    `objective` is the profiled residual sum of squares at the solution for
    the LSE, and the total periodogram height (summed over sequential stages)
    for the ALSE.  Components are ordered by decreasing A^2 + B^2.
    """

    components: tuple[ChirpComponent, ...]
    method: str
    objective: float
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "components": [
                {"A": c.A, "B": c.B, "theta1": c.theta1, "theta2": c.theta2}
                for c in self.components
            ],
            "objective": self.objective,
            "diagnostics": self.diagnostics,
        }


def design_matrix(theta: Sequence[float], n: int) -> np.ndarray:
    """n x 2 regression design: row t is (cos(phi_t), sin(phi_t))."""
    phi = chirp_phase(theta[0], theta[1], n)
    return np.column_stack([np.cos(phi), np.sin(phi)])


def periodogram(y: SampleSeries, theta: Sequence[float]) -> float:
    """Chirp periodogram (2/n) |sum_t y(t) e^{-i phi_t}|^2."""
    phi = chirp_phase(theta[0], theta[1], y.n)
    zr = float(y.values @ np.cos(phi))
    zi = float(y.values @ np.sin(phi))
    return (2.0 / y.n) * (zr * zr + zi * zi)


def alse_amplitudes(y: SampleSeries, theta: Sequence[float]) -> tuple[float, float]:
    """Projection-sum amplitude estimates (2/n) sum y cos, (2/n) sum y sin."""
    phi = chirp_phase(theta[0], theta[1], y.n)
    a = (2.0 / y.n) * float(y.values @ np.cos(phi))
    b = (2.0 / y.n) * float(y.values @ np.sin(phi))
    return a, b


def profile_rss(theta: Sequence[float], y: SampleSeries) -> tuple[float, tuple[float, float]]:
    """Profiled residual sum of squares and the minimizing amplitudes.

    For fixed theta the amplitudes enter linearly, so the optimum is the
    normal-equations solution of the n x 2 design; the returned value is the
    residual sum of squares at those amplitudes.  The 2 x 2 system is solved
    in closed form with a condition-number guard.
    """
    n = y.n
    phi = chirp_phase(theta[0], theta[1], n)
    c, s = np.cos(phi), np.sin(phi)
    cc, ss, cs = float(c @ c), float(s @ s), float(c @ s)
    trace, det = cc + ss, cc * ss - cs * cs
    # symmetric 2x2 eigenvalues give the exact condition number
    root = np.sqrt(max(trace * trace - 4.0 * det, 0.0))
    lam_min = (trace - root) / 2.0
    lam_max = (trace + root) / 2.0
    if lam_min <= 0 or lam_max / lam_min > MAX_DESIGN_CONDITION:
        raise DegenerateDesignError(
            f"design matrix is near-singular at theta={tuple(theta)}"
        )
    cy, sy = float(c @ y.values), float(s @ y.values)
    a = (ss * cy - cs * sy) / det
    b = (cc * sy - cs * cy) / det
    r = y.values - a * c - b * s
    return float(r @ r), (a, b)


def stacked_profile_rss(
    thetas: Sequence[Sequence[float]], y: SampleSeries
) -> tuple[float, np.ndarray]:
    """Profiled residual sum of squares for p components jointly.

    Stacks the per-component designs into an n x 2p matrix, solves the
    normal equations for all amplitudes at once, and returns the residual
    sum of squares plus the amplitude vector (A_1, B_1, ..., A_p, B_p).
    """
    cols = []
    for theta in thetas:
        phi = chirp_phase(theta[0], theta[1], y.n)
        cols.append(np.cos(phi))
        cols.append(np.sin(phi))
    X = np.column_stack(cols)
    XtX = X.T @ X
    if np.linalg.cond(XtX) > MAX_DESIGN_CONDITION:
        raise DegenerateDesignError(
            f"stacked design is near-singular at thetas={[tuple(t) for t in thetas]}"
        )
    psi = np.linalg.solve(XtX, X.T @ y.values)
    r = y.values - X @ psi
    return float(r @ r), psi


def _interior(theta: np.ndarray) -> bool:
    return bool(np.all(theta > 0.0) and np.all(theta < np.pi))


def _refine_thetas(
    objective,
    thetas0: np.ndarray,
    n: int,
    config: SimplexConfig,
) -> tuple[np.ndarray, NelderMeadResult]:
    """Local simplex refinement of stacked (theta1, theta2) pairs.

    Works in rescaled coordinates u = (theta1, n*theta2) per component so
    that both axes have comparable main-lobe widths.  The start is first
    polished on a small per-component grid spanning one main lobe, and the
    simplex runs behind a barrier a few lobes wide around that start:
    refinement is a local operation, and without the barrier a descent
    direction through a sidelobe occasionally walks the simplex to a distant
    spurious optimum.  Outside (0, pi) the objective is +inf as well.
    """
    thetas0 = np.asarray(thetas0, dtype=np.float64).reshape(-1, 2)
    p = thetas0.shape[0]
    scale = np.tile([1.0, float(n)], p)
    lobe = np.pi / n  # main-lobe half-width in u units, both axes

    # one pass of per-component polishing: 9x9 lobe-wide grid, other
    # components held fixed
    u = thetas0.ravel() * scale
    offsets = np.linspace(-1.0, 1.0, 9) * lobe
    for k in range(p):
        best_val, best_pair = np.inf, (u[2 * k], u[2 * k + 1])
        for d1 in offsets:
            for d2 in offsets:
                candidate = u.copy()
                candidate[2 * k] += d1
                candidate[2 * k + 1] += d2
                theta = candidate / scale
                if not _interior(theta):
                    continue
                val = objective(theta.reshape(p, 2))
                if val < best_val:
                    best_val = val
                    best_pair = (candidate[2 * k], candidate[2 * k + 1])
        u[2 * k], u[2 * k + 1] = best_pair

    lo, hi = u - 4.0 * lobe, u + 4.0 * lobe

    def wrapped(uu):
        theta = uu / scale
        if not _interior(theta) or np.any(uu < lo) or np.any(uu > hi):
            return np.inf
        return objective(theta.reshape(p, 2))

    steps = np.full(2 * p, np.pi / (8.0 * n))
    res = nelder_mead(wrapped, u, config, steps=steps)
    return (res.x / scale).reshape(p, 2), res


def blind_candidates(
    y: SampleSeries,
    n_theta1: int | None = None,
    n_theta2: int | None = None,
    top_m: int = BLIND_TOP_M,
) -> list[tuple[float, float]]:
    """Coarse periodogram scan returning the top_m (theta1, theta2) cells.

    theta2 runs over `n_theta2` interior points of (0, pi) (default 4n); for
    each, an FFT de-chirp scan covers at least `n_theta1` frequencies
    (default 4n).  Candidates are ordered by decreasing periodogram value
    with deterministic index tie-breaks.
    """
    n = y.n
    n_theta1 = n_theta1 or BLIND_POINTS_FACTOR * n
    n_theta2 = n_theta2 or BLIND_POINTS_FACTOR * n
    n_freq = 1
    while n_freq < 2 * n_theta1 or n_freq < n:
        n_freq *= 2
    theta2_step = np.pi / (n_theta2 + 1)
    entries = []
    j_lo, j_hi = 1, n_freq // 2  # Fourier bins strictly inside (0, pi)
    for i2 in range(1, n_theta2 + 1):
        theta2 = i2 * theta2_step
        row = dechirp_scan(y, theta2, n_freq)[j_lo:j_hi]
        top = np.argsort(-row, kind="stable")[:top_m]
        for j in top:
            theta1 = 2.0 * np.pi * (j + j_lo) / n_freq
            entries.append((-row[j], i2, int(j), theta1, theta2))
    entries.sort()
    return [(th1, th2) for _, _, _, th1, th2 in entries[:top_m]]


def _refine_best(
    objective, candidates, n: int, config: SimplexConfig
) -> tuple[np.ndarray, NelderMeadResult]:
    best = None
    for cand in candidates:
        thetas, res = _refine_thetas(objective, np.asarray(cand), n, config)
        if best is None or res.fun < best[1].fun:
            best = (thetas, res)
    return best


def _stage_diag(name: str, res: NelderMeadResult, thetas: np.ndarray) -> dict:
    return {
        "stage": name,
        "iterations": res.iterations,
        "fevals": res.fevals,
        "converged": bool(res.converged),
        "nonfinite_evals": res.nonfinite_evals,
        "theta": [float(v) for v in np.asarray(thetas).ravel()],
    }


def _check_range(thetas: np.ndarray) -> None:
    if not _interior(np.asarray(thetas)):
        raise EstimateRangeError(
            f"refined parameters left (0, pi): {np.asarray(thetas).ravel().tolist()}"
        )


def _sort_components(comps: list[ChirpComponent]) -> tuple[ChirpComponent, ...]:
    return tuple(sorted(comps, key=lambda c: -c.power))


def estimate_multi(
    y: SampleSeries,
    p: int,
    method: str = "lse",
    inits: Sequence[Sequence[float]] | None = None,
    simplex: SimplexConfig | None = None,
) -> EstimationResult:
    """Estimate p chirp components by the requested method.

    ALSE: maximize the periodogram sequentially; after each component the
    fitted signal (projection amplitudes and phase) is subtracted before the
    next maximization, and the reported amplitudes are recomputed on the
    original series.  LSE: minimize the jointly profiled residual sum of
    squares over all 2p nonlinear parameters, initialized either from the
    provided per-component starting points or from a sequential blind ALSE.

    `inits`, when given, supplies one (theta1, theta2) starting point per
    component ("window" initialization); otherwise a coarse periodogram scan
    proposes starting cells ("blind").
    """
    if method not in ("lse", "alse"):
        raise ValueError(f"method must be 'lse' or 'alse', got {method!r}")
    if p < 1:
        raise ValueError("p must be at least 1")
    if y.n < 8 * p:
        raise ValueError(f"need n >= 8p samples, got n={y.n} for p={p}")
    if inits is not None and len(inits) != p:
        raise ValueError(f"expected {p} starting points, got {len(inits)}")
    cfg = simplex or SimplexConfig()
    init_mode = "window" if inits is not None else "blind"
    stages: list[dict] = []

    # sequential periodogram stage: needed by the ALSE always, and by the
    # LSE as initialization when no starting points were provided
    seq_thetas: list[np.ndarray] = []
    seq_peaks: list[float] = []
    if method == "alse" or inits is None:
        residual = np.array(y.values)
        for k in range(p):
            work = SampleSeries(values=residual)
            if inits is not None:
                candidates = [np.asarray(inits[k], dtype=np.float64)]
            else:
                candidates = [np.asarray(c) for c in blind_candidates(work)]

            def neg_periodogram(thetas, _series=work):
                return -periodogram(_series, thetas[0])

            thetas, res = _refine_best(neg_periodogram, candidates, y.n, cfg)
            _check_range(thetas)
            stages.append(_stage_diag(f"periodogram_{k + 1}", res, thetas))
            seq_thetas.append(thetas[0])
            seq_peaks.append(-res.fun)
            a_k, b_k = alse_amplitudes(work, thetas[0])
            phi = chirp_phase(thetas[0][0], thetas[0][1], y.n)
            residual = residual - a_k * np.cos(phi) - b_k * np.sin(phi)

    if method == "alse":
        comps = []
        for theta in seq_thetas:
            a, b = alse_amplitudes(y, theta)
            comps.append(ChirpComponent(A=a, B=b, theta1=float(theta[0]), theta2=float(theta[1])))
        objective = float(sum(seq_peaks))
    else:
        start = np.array(seq_thetas) if inits is None else np.asarray(inits, dtype=np.float64)

        if p == 1:

            def rss_objective(thetas):
                return profile_rss(thetas[0], y)[0]

        else:

            def rss_objective(thetas):
                try:
                    return stacked_profile_rss(thetas, y)[0]
                except DegenerateDesignError:
                    return np.inf

        thetas, res = _refine_thetas(rss_objective, start, y.n, cfg)
        _check_range(thetas)
        stages.append(_stage_diag("lse_joint", res, thetas))
        if p == 1:
            objective, (a, b) = profile_rss(thetas[0], y)
            amps = np.array([a, b])
        else:
            objective, amps = stacked_profile_rss(thetas, y)
        comps = [
            ChirpComponent(
                A=float(amps[2 * k]),
                B=float(amps[2 * k + 1]),
                theta1=float(thetas[k][0]),
                theta2=float(thetas[k][1]),
            )
            for k in range(p)
        ]

    return EstimationResult(
        components=_sort_components(comps),
        method=method,
        objective=float(objective),
        diagnostics={"init_mode": init_mode, "stages": stages},
    )


def lse_single(
    y: SampleSeries,
    init: Sequence[float],
    simplex: SimplexConfig | None = None,
) -> EstimationResult:
    """LSE for a single chirp from an explicit starting point."""
    return estimate_multi(y, 1, method="lse", inits=[init], simplex=simplex)


def alse_single(
    y: SampleSeries,
    init: Sequence[float] | None = None,
    simplex: SimplexConfig | None = None,
) -> EstimationResult:
    """ALSE for a single chirp; blind scan when no starting point is given."""
    inits = None if init is None else [init]
    return estimate_multi(y, 1, method="alse", inits=inits, simplex=simplex)
