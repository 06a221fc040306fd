"""Chirp signal model: components, synthesis, and residual sums of squares.

The observation model is

    y(t) = sum_k [ A_k cos(theta1_k t + theta2_k t^2)
                 + B_k sin(theta1_k t + theta2_k t^2) ] + e(t),   t = 1..n,

with frequencies theta1_k and frequency rates theta2_k both restricted to
the open interval (0, pi).
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

TWO_PI = 2.0 * np.pi
_LD_TWO_PI = np.longdouble(TWO_PI)


@lru_cache(maxsize=64)
def _time_index(n: int):
    """Extended-precision time index t = 1..n and its square.

    This is the single place where the 1-based time convention meets 0-based
    array storage: t = 1..n lives at array positions 0..n-1.
    """
    t = np.arange(1, n + 1, dtype=np.longdouble)
    t.setflags(write=False)
    t2 = t * t
    t2.setflags(write=False)
    return t, t2


def chirp_phase(theta1: float, theta2: float, n: int) -> np.ndarray:
    """Phase theta1*t + theta2*t^2 for t = 1..n, reduced mod 2*pi.

    The product and reduction are carried out in extended precision: t^2
    reaches 1e6 at n = 1000 and the phase itself reaches ~1e5 radians, so a
    plain float64 product loses digits before the trig call.
    """
    t, t2 = _time_index(int(n))
    phi = np.mod(np.longdouble(theta1) * t + np.longdouble(theta2) * t2, _LD_TWO_PI)
    return phi.astype(np.float64)


def _check_theta(name: str, value: float) -> None:
    if not np.isfinite(value) or not 0.0 < value < np.pi:
        raise ValueError(f"{name} must lie strictly inside (0, pi), got {value!r}")


@dataclass(frozen=True)
class ChirpComponent:
    """One chirp component (A, B, theta1, theta2).

    Amplitudes are unconstrained reals; theta1 (frequency, rad/sample) and
    theta2 (frequency rate, rad/sample^2) must be interior points of (0, pi).
    Values exactly on {0, pi} are rejected rather than clamped.
    """

    A: float
    B: float
    theta1: float
    theta2: float

    def __post_init__(self):
        for name in ("A", "B"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"amplitude {name} must be finite")
        _check_theta("theta1", self.theta1)
        _check_theta("theta2", self.theta2)

    @property
    def power(self) -> float:
        """Squared amplitude A^2 + B^2."""
        return self.A * self.A + self.B * self.B

    def values(self, n: int) -> np.ndarray:
        """Noiseless component signal at t = 1..n."""
        phi = chirp_phase(self.theta1, self.theta2, n)
        return self.A * np.cos(phi) + self.B * np.sin(phi)


@dataclass(frozen=True)
class ChirpModel:
    """Ordered collection of chirp components.

    All (theta1, theta2) pairs must be pairwise distinct.  Component order is
    not constrained at construction; `validate_amplitude_order` checks the
    strictly-decreasing A^2+B^2 ordering that true simulation models must
    satisfy (estimates are sorted that way but need not be constructed here).
    """

    components: tuple[ChirpComponent, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        object.__setattr__(self, "components", comps)
        if len(comps) < 1:
            raise ValueError("a chirp model needs at least one component")
        thetas = [(c.theta1, c.theta2) for c in comps]
        if len(set(thetas)) != len(thetas):
            raise ValueError("components must have pairwise distinct (theta1, theta2)")

    @property
    def p(self) -> int:
        return len(self.components)

    def validate_amplitude_order(self, max_amplitude: float | None = None) -> None:
        """Check strictly decreasing component power, optionally bounded above.

        `max_amplitude` is the upper bound M on sqrt(A^2 + B^2); it applies
        only to true models used for data generation, never to estimates.
        """
        powers = [c.power for c in self.components]
        if any(p <= 0 for p in powers):
            raise ValueError("every component needs A^2 + B^2 > 0")
        if any(a <= b for a, b in zip(powers, powers[1:])):
            raise ValueError(f"component powers must strictly decrease, got {powers}")
        if max_amplitude is not None and powers[0] >= max_amplitude**2:
            raise ValueError(f"component amplitude exceeds bound {max_amplitude}")

    def values(self, n: int) -> np.ndarray:
        """Noiseless model signal at t = 1..n."""
        out = np.zeros(n)
        for comp in self.components:
            out += comp.values(n)
        return out


@dataclass(frozen=True)
class SampleSeries:
    """Real-valued observations y(1..n) at unit-spaced times.

    values[i] holds y(t = i + 1).
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("a sample series must be a nonempty 1-D array")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n(self) -> int:
        return len(self.values)

    def to_csv(self, path_or_file) -> None:
        """Write as CSV with header ``t,y``; floats round-trip bit-exactly."""
        if hasattr(path_or_file, "write"):
            self._write(path_or_file)
        else:
            with open(path_or_file, "w", newline="") as fh:
                self._write(fh)

    def _write(self, fh) -> None:
        fh.write("t,y\n")
        for i, v in enumerate(self.values, start=1):
            fh.write(f"{i},{float(v)!r}\n")

    @classmethod
    def from_csv(cls, path_or_file) -> "SampleSeries":
        if hasattr(path_or_file, "read"):
            return cls._read(path_or_file)
        with open(path_or_file, "r", newline="") as fh:
            return cls._read(fh)

    @classmethod
    def _read(cls, fh) -> "SampleSeries":
        header = fh.readline().strip()
        if header != "t,y":
            raise ValueError(f"expected CSV header 't,y', got {header!r}")
        values = []
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            t_str, y_str = line.split(",")
            if int(t_str) != len(values) + 1:
                raise ValueError(f"non-contiguous time index at line {line_no}")
            values.append(float(y_str))
        return cls(values=np.array(values))


def synthesize(model: ChirpModel, n: int, noise: np.ndarray | None = None) -> SampleSeries:
    """Evaluate the model at t = 1..n, optionally adding a noise vector."""
    if n < 1:
        raise ValueError("n must be at least 1")
    y = model.values(n)
    if noise is not None:
        noise = np.asarray(noise, dtype=np.float64)
        if noise.shape != (n,):
            raise ValueError(f"noise length {noise.shape} does not match n={n}")
        y = y + noise
    return SampleSeries(values=y)


def rss(candidate: ChirpModel, y: SampleSeries) -> float:
    """Residual sum of squares of `y` against the candidate model."""
    r = y.values - candidate.values(y.n)
    return float(r @ r)


def series_to_csv_string(series: SampleSeries) -> str:
    buf = io.StringIO()
    series.to_csv(buf)
    return buf.getvalue()
