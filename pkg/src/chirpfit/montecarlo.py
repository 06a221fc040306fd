"""Monte Carlo harness: replication loop, AVE/MAD summaries, rate slopes.

Each experiment cell is an (alpha, sigma, n) combination; every replication
draws a fresh SaS noise vector, synthesizes the series, and runs each
requested estimator on the same data.  Replication streams derive from
(master seed, cell contents, replication index) with a counter-based
generator, so cells are independent of their ordering in the config and the
whole run is reproducible bit for bit.
"""
from __future__ import annotations

import struct
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .estimators import EstimationResult, estimate_multi
from .model import ChirpComponent, ChirpModel, synthesize
from .noise import make_generator, standard_sas
from .optim import SimplexConfig

# replication-scale simplex settings: statistical error dominates well before
# these tolerances bind, and the iteration cap keeps worst cases bounded
MC_SIMPLEX = SimplexConfig(max_iterations=500, f_tolerance=1e-10, x_tolerance=1e-9)

ABORT_ERROR_FRACTION = 0.2


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one simulation run."""

    model: ChirpModel
    alphas: tuple[float, ...]
    sigmas: tuple[float, ...]
    ns: tuple[int, ...]
    replications: int = 500
    methods: tuple[str, ...] = ("lse", "alse")
    init_mode: str = "window"
    master_seed: int = 0
    threads: int = 1
    simplex: SimplexConfig = field(default_factory=lambda: MC_SIMPLEX)
    max_amplitude: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "sigmas", tuple(float(s) for s in self.sigmas))
        object.__setattr__(self, "ns", tuple(int(n) for n in self.ns))
        object.__setattr__(self, "methods", tuple(self.methods))
        if self.replications < 2:
            raise ValueError("replications must be at least 2")
        if not self.alphas or any(not 1.0 < a <= 2.0 for a in self.alphas):
            raise ValueError("every alpha must lie in (1, 2]")
        # sigma = 0 is admitted as the degenerate noise-free case
        if not self.sigmas or any(s < 0 for s in self.sigmas):
            raise ValueError("every sigma must be nonnegative")
        if not self.ns or any(n < 8 * self.model.p for n in self.ns):
            raise ValueError(f"every n must be at least 8p = {8 * self.model.p}")
        if not self.methods or any(m not in ("lse", "alse") for m in self.methods):
            raise ValueError("methods must be a nonempty subset of {'lse', 'alse'}")
        if self.init_mode not in ("window", "blind"):
            raise ValueError("init_mode must be 'window' or 'blind'")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        self.model.validate_amplitude_order(self.max_amplitude)


@dataclass(frozen=True)
class SummaryRow:
    method: str
    alpha: float
    sigma: float
    n: int
    parameter: str
    ave: float
    mad: float
    failures: int


@dataclass(frozen=True)
class RawRecord:
    method: str
    alpha: float
    sigma: float
    n: int
    replication: int
    parameter: str
    estimate: float
    converged: bool


@dataclass(frozen=True)
class CellAbort:
    method: str
    alpha: float
    sigma: float
    n: int
    errors: int
    replications: int
    message: str


@dataclass(frozen=True)
class SummaryTable:
    """AVE/MAD rows per (method, alpha, sigma, n, parameter) cell."""

    rows: tuple[SummaryRow, ...]
    aborted: tuple[CellAbort, ...] = ()

    CSV_HEADER = "method,alpha,sigma,n,parameter,ave,mad,failures"

    def select(self, **filters) -> list[SummaryRow]:
        out = []
        for row in self.rows:
            if all(getattr(row, key) == val for key, val in filters.items()):
                out.append(row)
        return out

    def lookup(self, method: str, alpha: float, sigma: float, n: int, parameter: str) -> SummaryRow:
        rows = self.select(method=method, alpha=alpha, sigma=sigma, n=n, parameter=parameter)
        if len(rows) != 1:
            raise KeyError(f"no unique row for {(method, alpha, sigma, n, parameter)}")
        return rows[0]

    def to_csv(self, path_or_file) -> None:
        if hasattr(path_or_file, "write"):
            self._write(path_or_file)
        else:
            with open(path_or_file, "w", newline="") as fh:
                self._write(fh)

    def _write(self, fh) -> None:
        fh.write(self.CSV_HEADER + "\n")
        for r in self.rows:
            fh.write(
                f"{r.method},{r.alpha!r},{r.sigma!r},{r.n},{r.parameter},"
                f"{r.ave!r},{r.mad!r},{r.failures}\n"
            )

    @classmethod
    def from_csv(cls, path_or_file) -> "SummaryTable":
        if hasattr(path_or_file, "read"):
            fh = path_or_file
            return cls._read(fh)
        with open(path_or_file, "r", newline="") as fh:
            return cls._read(fh)

    @classmethod
    def _read(cls, fh) -> "SummaryTable":
        header = fh.readline().strip()
        if header != cls.CSV_HEADER:
            raise ValueError(f"unexpected summary header {header!r}")
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            method, alpha, sigma, n, parameter, ave, mad, failures = line.split(",")
            rows.append(
                SummaryRow(
                    method=method,
                    alpha=float(alpha),
                    sigma=float(sigma),
                    n=int(n),
                    parameter=parameter,
                    ave=float(ave),
                    mad=float(mad),
                    failures=int(failures),
                )
            )
        return cls(rows=tuple(rows))


@dataclass(frozen=True)
class ExperimentResult:
    table: SummaryTable
    raw: tuple[RawRecord, ...]

    def write_raw_csv(self, path_or_file) -> None:
        header = "method,alpha,sigma,n,replication,parameter,estimate,converged\n"
        if hasattr(path_or_file, "write"):
            fh = path_or_file
            fh.write(header)
            for r in self.raw:
                fh.write(
                    f"{r.method},{r.alpha!r},{r.sigma!r},{r.n},{r.replication},"
                    f"{r.parameter},{r.estimate!r},{int(r.converged)}\n"
                )
        else:
            with open(path_or_file, "w", newline="") as fh:
                self.write_raw_csv(fh)


def parameter_names(p: int) -> list[str]:
    """A/B/theta1/theta2, suffixed by the 1-based component index when p > 1."""
    if p == 1:
        return ["A", "B", "theta1", "theta2"]
    names = []
    for k in range(1, p + 1):
        names.extend([f"A_{k}", f"B_{k}", f"theta1_{k}", f"theta2_{k}"])
    return names


def summarize(estimates, truth: float) -> tuple[float, float]:
    """(AVE, MAD): mean estimate and mean absolute deviation from the truth.

    The deviation reference is the true parameter value, not the sample
    mean; both variants can be recomputed from the raw replication dump.
    """
    arr = np.asarray(estimates, dtype=np.float64)
    if arr.size == 0:
        raise ValueError("estimates must be nonempty")
    return float(np.mean(arr)), float(np.mean(np.abs(arr - truth)))


def _float_bits(x: float) -> int:
    return struct.unpack("<Q", struct.pack("<d", float(x)))[0]


def _result_estimates(result: EstimationResult, p: int) -> dict[str, float]:
    names = parameter_names(p)
    values = []
    for comp in result.components:
        values.extend([comp.A, comp.B, comp.theta1, comp.theta2])
    return dict(zip(names, values))


def _run_replication(args) -> tuple[int, dict]:
    (model_params, alpha, sigma, n, rep, master_seed, methods, init_mode, simplex) = args
    model = ChirpModel(
        components=tuple(ChirpComponent(*params) for params in model_params)
    )
    rng = make_generator(master_seed, n, _float_bits(alpha), _float_bits(sigma), rep)
    noise = sigma * standard_sas(alpha, n, rng) if sigma > 0 else np.zeros(n)
    y = synthesize(model, n, noise)

    inits = None
    if init_mode == "window":
        inits = []
        for comp in model.components:
            t1 = comp.theta1 + rng.uniform(-np.pi / n, np.pi / n)
            t2 = comp.theta2 + rng.uniform(-np.pi / n**2, np.pi / n**2)
            eps = 1e-9
            inits.append((float(np.clip(t1, eps, np.pi - eps)), float(np.clip(t2, eps, np.pi - eps))))

    out: dict[str, dict] = {}
    for method in methods:
        try:
            result = estimate_multi(y, model.p, method=method, inits=inits, simplex=simplex)
        except Exception as exc:  # noqa: BLE001 - per-replication fault isolation
            out[method] = {"error": f"{type(exc).__name__}: {exc}"}
            continue
        converged = all(stage["converged"] for stage in result.diagnostics["stages"])
        out[method] = {
            "estimates": _result_estimates(result, model.p),
            "converged": converged,
        }
    return rep, out


def run_experiment(cfg: ExperimentConfig, progress=None) -> ExperimentResult:
    """Run every (alpha, sigma, n) cell of the config and summarize.

    Non-converged replications are kept in the summaries and counted in the
    `failures` column together with replications that raised; a cell/method
    whose error fraction exceeds 20% is reported as aborted instead of
    summarized.  The output is a pure function of the config.
    """
    model_params = tuple(
        (c.A, c.B, c.theta1, c.theta2) for c in cfg.model.components
    )
    names = parameter_names(cfg.model.p)
    truths = dict(zip(names, [v for c in cfg.model.components for v in (c.A, c.B, c.theta1, c.theta2)]))

    rows: list[SummaryRow] = []
    aborted: list[CellAbort] = []
    raw: list[RawRecord] = []

    for alpha in cfg.alphas:
        for sigma in cfg.sigmas:
            for n in cfg.ns:
                cell_args = [
                    (model_params, alpha, sigma, n, rep, cfg.master_seed,
                     cfg.methods, cfg.init_mode, cfg.simplex)
                    for rep in range(cfg.replications)
                ]
                results: dict[int, dict] = {}
                if cfg.threads > 1:
                    with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
                        chunk = max(1, cfg.replications // (cfg.threads * 4))
                        for rep, res in pool.map(_run_replication, cell_args, chunksize=chunk):
                            results[rep] = res
                            if progress:
                                progress(f"alpha={alpha} sigma={sigma} n={n}", len(results), cfg.replications)
                else:
                    for args in cell_args:
                        rep, res = _run_replication(args)
                        results[rep] = res
                        if progress:
                            progress(f"alpha={alpha} sigma={sigma} n={n}", len(results), cfg.replications)

                for method in cfg.methods:
                    estimates: dict[str, list[float]] = {name: [] for name in names}
                    errors = 0
                    nonconverged = 0
                    for rep in range(cfg.replications):
                        res = results[rep][method]
                        if "error" in res:
                            errors += 1
                            continue
                        if not res["converged"]:
                            nonconverged += 1
                        for name in names:
                            estimates[name].append(res["estimates"][name])
                            raw.append(
                                RawRecord(
                                    method=method, alpha=alpha, sigma=sigma, n=n,
                                    replication=rep, parameter=name,
                                    estimate=res["estimates"][name],
                                    converged=res["converged"],
                                )
                            )
                    if errors > ABORT_ERROR_FRACTION * cfg.replications:
                        aborted.append(
                            CellAbort(
                                method=method, alpha=alpha, sigma=sigma, n=n,
                                errors=errors, replications=cfg.replications,
                                message=(
                                    f"{errors}/{cfg.replications} replications raised; "
                                    "cell aborted"
                                ),
                            )
                        )
                        continue
                    failures = errors + nonconverged
                    for name in names:
                        ave, mad = summarize(estimates[name], truths[name])
                        rows.append(
                            SummaryRow(
                                method=method, alpha=alpha, sigma=sigma, n=n,
                                parameter=name, ave=ave, mad=mad, failures=failures,
                            )
                        )

    return ExperimentResult(table=SummaryTable(rows=tuple(rows), aborted=tuple(aborted)), raw=tuple(raw))


def rate_check(
    table: SummaryTable, parameter: str, method: str, alpha: float, sigma: float
) -> float:
    """Least-squares slope of log(MAD) against log(n) for one parameter."""
    rows = table.select(method=method, alpha=alpha, sigma=sigma, parameter=parameter)
    pairs = sorted({(row.n, row.mad) for row in rows})
    if len(pairs) < 2:
        raise ValueError("need at least 2 distinct sample sizes for a rate fit")
    ns = np.array([n for n, _ in pairs], dtype=np.float64)
    mads = np.array([m for _, m in pairs], dtype=np.float64)
    if np.any(mads <= 0):
        raise ValueError("MAD values must be positive for a log-log fit")
    slope = np.polyfit(np.log(ns), np.log(mads), 1)[0]
    return float(slope)


def preset_model(name: str) -> ChirpModel:
    """Simulation presets: the single- and two-component study models."""
    if name == "model1":
        return ChirpModel(components=(ChirpComponent(A=2.5, B=2.5, theta1=1.5, theta2=0.1),))
    if name == "model2":
        return ChirpModel(
            components=(
                ChirpComponent(A=4.0, B=4.0, theta1=1.5, theta2=0.1),
                ChirpComponent(A=3.0, B=3.0, theta1=2.5, theta2=0.2),
            )
        )
    raise ValueError(f"unknown model preset {name!r}")
