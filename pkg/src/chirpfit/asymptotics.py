"""Asymptotic machinery for the chirp estimators under SaS noise.

Provides the alpha-dependent diagonal scaling matrices, the limit matrix of
the scaled least-squares Hessian and its closed-form inverse, the K/tau
functions whose Cesaro limit drives the exponent of the limiting stable
characteristic function, and numerical checks of the trigonometric averages
those limits rest on.
"""
from __future__ import annotations

import numpy as np

from .model import ChirpComponent, ChirpModel, SampleSeries, chirp_phase


def _check_alpha(alpha: float) -> None:
    if not 1.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (1, 2], got {alpha!r}")


def scaling_d1(n: int, alpha: float) -> np.ndarray:
    """Diagonal of D1 = diag(n^{-1/a}, n^{-1/a}, n^{-(1+a)/a}, n^{-(1+2a)/a})."""
    if n < 1:
        raise ValueError("n must be at least 1")
    _check_alpha(alpha)
    nf = float(n)
    return np.array(
        [
            nf ** (-1.0 / alpha),
            nf ** (-1.0 / alpha),
            nf ** (-(1.0 + alpha) / alpha),
            nf ** (-(1.0 + 2.0 * alpha) / alpha),
        ]
    )


def scaling_d2(n: int, alpha: float) -> np.ndarray:
    """Diagonal of D2 = diag(n^{-(a-1)/a}, ., n^{-(2a-1)/a}, n^{-(3a-1)/a}).

    D2^{-1} gives the convergence rates of (A, B, theta1, theta2) errors.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    _check_alpha(alpha)
    nf = float(n)
    return np.array(
        [
            nf ** (-(alpha - 1.0) / alpha),
            nf ** (-(alpha - 1.0) / alpha),
            nf ** (-(2.0 * alpha - 1.0) / alpha),
            nf ** (-(3.0 * alpha - 1.0) / alpha),
        ]
    )


def scaling_delta1(n: int, alpha: float, p: int) -> np.ndarray:
    """4p x 4p block-diagonal repeat of D1 for p components."""
    if p < 1:
        raise ValueError("p must be at least 1")
    return np.diag(np.tile(scaling_d1(n, alpha), p))


def scaling_delta2(n: int, alpha: float, p: int) -> np.ndarray:
    """4p x 4p block-diagonal repeat of D2 for p components."""
    if p < 1:
        raise ValueError("p must be at least 1")
    return np.diag(np.tile(scaling_d2(n, alpha), p))


def _check_power(A: float, B: float) -> float:
    S = A * A + B * B
    if not S > 0:
        raise ValueError("need A^2 + B^2 > 0")
    return S


def gamma_matrix(A: float, B: float) -> np.ndarray:
    """Limit of the scaled least-squares Hessian, as a 4x4 symmetric matrix."""
    S = _check_power(A, B)
    return np.array(
        [
            [1.0, 0.0, B / 2.0, B / 3.0],
            [0.0, 1.0, -A / 2.0, -A / 3.0],
            [B / 2.0, -A / 2.0, S / 3.0, S / 4.0],
            [B / 3.0, -A / 3.0, S / 4.0, S / 5.0],
        ]
    )


def gamma_inverse(A: float, B: float) -> np.ndarray:
    """Closed-form inverse of `gamma_matrix`, not a numeric inversion.

    Derived by block inversion: the lower-right Schur complement is
    (A^2+B^2) * [[1/12, 1/12], [1/12, 4/45]], whose inverse carries the
    192/-180/180 pattern; the off-diagonal blocks follow from it.
    """
    S = _check_power(A, B)
    return (
        np.array(
            [
                [A * A + 9.0 * B * B, -8.0 * A * B, -36.0 * B, 30.0 * B],
                [-8.0 * A * B, 9.0 * A * A + B * B, 36.0 * A, -30.0 * A],
                [-36.0 * B, 36.0 * A, 192.0, -180.0],
                [30.0 * B, -30.0 * A, -180.0, 180.0],
            ]
        )
        / S
    )


def v_transform(t4, A: float, B: float) -> np.ndarray:
    """The four linear forms v_k(t; A, B) mapping t to the CF argument.

    Equals `gamma_inverse(A, B) @ t4`; written out explicitly so the two can
    be cross-checked entrywise.
    """
    S = _check_power(A, B)
    t = np.asarray(t4, dtype=np.float64)
    if t.shape != (4,):
        raise ValueError("t4 must be a 4-vector")
    return (
        np.array(
            [
                (A * A + 9.0 * B * B) * t[0] - 8.0 * A * B * t[1] - 36.0 * B * t[2] + 30.0 * B * t[3],
                -8.0 * A * B * t[0] + (9.0 * A * A + B * B) * t[1] + 36.0 * A * t[2] - 30.0 * A * t[3],
                -36.0 * B * t[0] + 36.0 * A * t[1] + 192.0 * t[2] - 180.0 * t[3],
                30.0 * B * t[0] - 30.0 * A * t[1] - 180.0 * t[2] + 180.0 * t[3],
            ]
        )
        / S
    )


def _g_values(xi: ChirpComponent, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    phi = chirp_phase(xi.theta1, xi.theta2, n)
    c, s = np.cos(phi), np.sin(phi)
    return c, s, xi.A * s - xi.B * c


def _k_values(t4, xi: ChirpComponent, n: int) -> np.ndarray:
    """K_t(r) for r = 1..n as one vector."""
    t = np.asarray(t4, dtype=np.float64)
    c, s, g = _g_values(xi, n)
    x = np.arange(1, n + 1, dtype=np.float64) / n
    return -t[0] * c - t[1] * s + (x * t[2] + x * x * t[3]) * g


def k_function(t4, r: int, n: int, xi: ChirpComponent) -> float:
    """-t1 cos(phi_r) - t2 sin(phi_r) + (r t3/n + r^2 t4/n^2) g(r).

    g(r) = A sin(phi_r) - B cos(phi_r) and phi_r = theta1 r + theta2 r^2.
    """
    if not 1 <= r <= n:
        raise ValueError(f"index r={r} must lie in 1..{n}")
    return float(_k_values(t4, xi, n)[r - 1])


def tau(t4, xi: ChirpComponent, alpha: float, n_approx: int = 100_000) -> float:
    """Truncated Cesaro limit (1/n) sum_{r<=n} |K_t(r)|^alpha at n = n_approx.

    The limit itself has no closed form; the truncation error is assessed by
    recomputing at a second n_approx (see `tau_self_consistency`).
    """
    if n_approx < 1000:
        raise ValueError("n_approx must be at least 1000")
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha!r}")
    K = _k_values(t4, xi, n_approx)
    return float(np.mean(np.abs(K) ** alpha))


def tau_self_consistency(
    t4, xi: ChirpComponent, alpha: float, n_approx: int = 100_000
) -> tuple[float, float]:
    """tau at n_approx and at n_approx // 10, as a truncation diagnostic."""
    return (
        tau(t4, xi, alpha, n_approx),
        tau(t4, xi, alpha, max(n_approx // 10, 1000)),
    )


def limiting_cf(
    t4,
    xi: ChirpComponent,
    alpha: float,
    sigma: float,
    n_approx: int = 100_000,
) -> float:
    """Limiting characteristic function of the D2^{-1}-scaled LSE errors.

    phi(t) = exp(-2^alpha sigma^alpha tau_v) with v = v_transform(t, A, B);
    the value is real because the limit law is symmetric.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma!r}")
    v = v_transform(t4, xi.A, xi.B)
    return float(np.exp(-(2.0**alpha) * sigma**alpha * tau(v, xi, alpha, n_approx)))


def limiting_cf_multi(
    t_blocks,
    model: ChirpModel,
    alpha: float,
    sigma: float,
    n_approx: int = 100_000,
) -> float:
    """Joint limiting CF for p components: the blocks are asymptotically
    independent, so the joint CF is the product of the per-component ones."""
    t_blocks = np.asarray(t_blocks, dtype=np.float64).reshape(-1, 4)
    if len(t_blocks) != model.p:
        raise ValueError(f"expected {model.p} blocks of 4, got {len(t_blocks)}")
    out = 1.0
    for tb, comp in zip(t_blocks, model.components):
        out *= limiting_cf(tb, comp, alpha, sigma, n_approx)
    return float(out)


def trig_limit_check(theta, n: int, k: int) -> dict[str, dict[str, float]]:
    """Finite-n trigonometric averages against their asymptotic limits.

    For the given k returns, keyed by name, the value/limit/absolute gap of
      - (1/n^{k+1}) sum t^k cos^2(phi), sin^2(phi)    -> 1/(2(k+1))
      - (1/n^{k+1}) sum t^k cos(phi) sin(phi)         -> 0
      - (1/n^{k+1}) sum t^k cos(phi), sin(phi)        -> 0
      - (1/n^{k+1/2}) sum t^k cos(phi), sin(phi)      -> 0   (slow)
    """
    if k not in (0, 1, 2):
        raise ValueError("k must be 0, 1, or 2")
    if n < 100:
        raise ValueError("n must be at least 100")
    phi = chirp_phase(theta[0], theta[1], n)
    t = np.arange(1, n + 1, dtype=np.float64)
    w = t**k
    c, s = np.cos(phi), np.sin(phi)
    full = float(n) ** (k + 1)
    half = float(n) ** (k + 0.5)
    square_limit = 1.0 / (2.0 * (k + 1))
    entries = {
        "cos_sq": (float((w * c * c).sum() / full), square_limit),
        "sin_sq": (float((w * s * s).sum() / full), square_limit),
        "cross": (float((w * c * s).sum() / full), 0.0),
        "cos_plain": (float((w * c).sum() / full), 0.0),
        "sin_plain": (float((w * s).sum() / full), 0.0),
        "cos_half": (float((w * c).sum() / half), 0.0),
        "sin_half": (float((w * s).sum() / half), 0.0),
    }
    return {
        name: {"value": value, "limit": limit, "gap": abs(value - limit)}
        for name, (value, limit) in entries.items()
    }


def rss_hessian(xi: ChirpComponent, y: SampleSeries) -> np.ndarray:
    """Analytic 4x4 Hessian of the residual sum of squares at xi.

    Q''_{ij} = 2 sum_t [ (dm/dxi_i)(dm/dxi_j) - (y - m) d2m/dxi_i dxi_j ]
    with m(t) the model value; transcribed once here and cross-checked by a
    finite-difference test rather than recomputed numerically in production.
    """
    n = y.n
    c, s, g = _g_values(xi, n)
    t = np.arange(1, n + 1, dtype=np.float64)
    m = xi.A * c + xi.B * s
    resid = y.values - m
    J = np.column_stack([c, s, -t * g, -t * t * g])
    H = 2.0 * (J.T @ J)
    # second-derivative terms weighted by the residuals
    rt = resid * t
    rt2 = rt * t
    rt3 = rt2 * t
    rt4 = rt3 * t
    H[0, 2] -= 2.0 * float(-(rt @ s))
    H[0, 3] -= 2.0 * float(-(rt2 @ s))
    H[1, 2] -= 2.0 * float(rt @ c)
    H[1, 3] -= 2.0 * float(rt2 @ c)
    H[2, 2] -= 2.0 * float(-(rt2 @ m))
    H[2, 3] -= 2.0 * float(-(rt3 @ m))
    H[3, 3] -= 2.0 * float(-(rt4 @ m))
    H[2, 0], H[3, 0] = H[0, 2], H[0, 3]
    H[2, 1], H[3, 1] = H[1, 2], H[1, 3]
    H[3, 2] = H[2, 3]
    return H


def hessian_limit_check(xi: ChirpComponent, n: int) -> tuple[np.ndarray, float]:
    """Scaled Hessian D2 Q'' D1 on noiseless data with alpha = 2 scalings.

    Returns the 4x4 scaled matrix and its max-abs entry gap to
    gamma_matrix(A, B).  The oscillatory remainders decay like 1/sqrt(n), so
    the gap shrinks slowly and non-monotonically.
    """
    if n < 100:
        raise ValueError("n must be at least 100")
    y = SampleSeries(values=ChirpModel(components=(xi,)).values(n))
    H = rss_hessian(xi, y)
    d1 = scaling_d1(n, 2.0)
    d2 = scaling_d2(n, 2.0)
    scaled = (d2[:, None] * H) * d1[None, :]
    gap = float(np.abs(scaled - gamma_matrix(xi.A, xi.B)).max())
    return scaled, gap
