"""Data generating processes, missing-pattern generators, and the MC harness.

Three noise/factor settings are supported: fully uncorrelated draws (S1),
entrywise AR(1) temporal dependence for factors and noise (S2), and
equicorrelated noise rows/columns (S3).  Missing pattern I observes each cell
independently with a fixed rate; pattern II drops a random subset of rows
permanently from a fixed time onward.

Replication seeds derive from the root seed through ``SeedSequence`` spawn
keys, so replications can run in any order (or in parallel) and still produce
bitwise-identical aggregates.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .covariance import REWEIGHTED, direct_covariances, reweighted_covariances
from .errors import InvalidPsi, MatfactorError
from .estimator import FactorFit, default_k_max, fit_from_covariances, rank_pair
from .evaluation import factor_error, rotations, space_distance
from .panel import MaskedSeries, overlap_counts

SETTINGS = ("S1", "S2", "S3")
PATTERNS = ("I", "II")
NOISE_AR_COEF = 0.1  # S2 noise recursion; innovation variance 1 - 0.1**2


@dataclass(frozen=True)
class SimConfig:
    """One Monte-Carlo design point."""

    n_rows: int = 50
    n_cols: int = 50
    n_periods: int = 50
    rank_rows: int = 3
    rank_cols: int = 3
    setting: str = "S1"
    psi: float = 0.5
    pattern: str = "I"
    obs_rate: float = 0.75
    drop_frac: float = 0.25
    drop_time_frac: float = 0.75
    reps: int = 1
    seed: int = 0
    burn_in: int = 0

    def __post_init__(self):
        if self.setting not in SETTINGS:
            raise ValueError(f"setting must be one of {SETTINGS}, got {self.setting!r}")
        if self.pattern not in PATTERNS:
            raise ValueError(f"pattern must be one of {PATTERNS}, got {self.pattern!r}")
        if self.setting == "S2" and not abs(self.psi) < 1:
            raise InvalidPsi(f"|psi| must be < 1, got {self.psi}")
        if self.reps < 1:
            raise ValueError("reps must be >= 1")
        if not 0 < self.obs_rate <= 1:
            raise ValueError("obs_rate must be in (0, 1]")
        if not 0 <= self.drop_frac < 1:
            raise ValueError("drop_frac must be in [0, 1)")
        if not 0 < self.drop_time_frac < 1:
            raise ValueError("drop_time_frac must be in (0, 1)")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        for name in ("n_rows", "n_cols", "n_periods", "rank_rows", "rank_cols"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class GroundTruth:
    """A fully generated instance: loadings, factors, noise, assembled panel."""

    row_loadings: np.ndarray
    col_loadings: np.ndarray
    factors: np.ndarray
    noise: np.ndarray
    series: MaskedSeries


def _ar1_path(rng, shape: tuple[int, ...], t_len: int, coef: float, burn_in: int) -> np.ndarray:
    """Entrywise stationary AR(1) path with unit marginal variance.

    Innovation variance 1 - coef**2 keeps the marginal variance at one, so
    the recursion can start from the stationary distribution directly.
    """
    innov_sd = math.sqrt(1.0 - coef * coef)
    x = rng.standard_normal(shape)
    path = np.empty((t_len,) + shape)
    for t in range(burn_in + t_len):
        x = coef * x + innov_sd * rng.standard_normal(shape)
        if t >= burn_in:
            path[t - burn_in] = x
    return path


def _equicorr_sqrt(n: int, off: float) -> np.ndarray:
    """Symmetric square root of the matrix with unit diagonal and ``off`` off-diagonal."""
    alpha = 1.0 - off
    s_ones = math.sqrt(alpha + n * off)
    s_rest = math.sqrt(alpha)
    return s_rest * np.eye(n) + (s_ones - s_rest) / n * np.ones((n, n))


def generate_truth(config: SimConfig, rng: np.random.Generator) -> GroundTruth:
    """Draw loadings, factors and noise, and assemble the fully observed panel.

    Loading entries are i.i.d. normal with mean 1 and variance 1.  Draw order
    is fixed (row loadings, column loadings, factors, noise) so a given rng
    state always produces the same instance.
    """
    a, b, t_len = config.n_rows, config.n_cols, config.n_periods
    k, r = config.rank_rows, config.rank_cols
    row_loadings = rng.normal(1.0, 1.0, size=(a, k))
    col_loadings = rng.normal(1.0, 1.0, size=(b, r))

    if config.setting == "S1":
        factors = rng.standard_normal((t_len, k, r))
        noise = rng.standard_normal((t_len, a, b))
    elif config.setting == "S2":
        factors = _ar1_path(rng, (k, r), t_len, config.psi, config.burn_in)
        noise = _ar1_path(rng, (a, b), t_len, NOISE_AR_COEF, config.burn_in)
    else:  # S3: equicorrelated noise rows (1/a) and columns (1/b)
        factors = rng.standard_normal((t_len, k, r))
        z = rng.standard_normal((t_len, a, b))
        noise = _equicorr_sqrt(a, 1.0 / a) @ z @ _equicorr_sqrt(b, 1.0 / b)

    values = row_loadings @ factors @ col_loadings.T + noise
    series = MaskedSeries(values, np.ones((t_len, a, b), dtype=np.uint8))
    return GroundTruth(
        row_loadings=row_loadings,
        col_loadings=col_loadings,
        factors=factors,
        noise=noise,
        series=series,
    )


def generate_mask(config: SimConfig, rng: np.random.Generator) -> np.ndarray:
    """T x a x b binary observation mask for the configured missing pattern.

    Pattern I: each cell observed independently with probability
    ``obs_rate``.  Pattern II: ``floor(drop_frac * a)`` rows chosen uniformly
    without replacement are unobserved for all 0-based t >=
    ``ceil(drop_time_frac * T)``; every other cell is observed.
    """
    a, b, t_len = config.n_rows, config.n_cols, config.n_periods
    if config.pattern == "I":
        return (rng.random((t_len, a, b)) < config.obs_rate).astype(np.uint8)
    mask = np.ones((t_len, a, b), dtype=np.uint8)
    n_drop = int(config.drop_frac * a)
    if n_drop > 0:
        dropped = rng.choice(a, size=n_drop, replace=False)
        t0 = math.ceil(config.drop_time_frac * t_len)
        mask[t0:, dropped, :] = 0
    return mask


@dataclass
class MethodResult:
    """Per-method accumulated metrics across replications."""

    rank_counts: dict = field(default_factory=dict)
    d_row: list = field(default_factory=list)
    d_col: list = field(default_factory=list)
    factor_mean: list = field(default_factory=list)
    factor_sum: float = 0.0
    factor_sumsq: float = 0.0
    factor_n: int = 0
    loading_draws: list = field(default_factory=list)

    def rank_frequencies(self) -> dict:
        total = sum(self.rank_counts.values())
        if total == 0:
            return {}
        return {pair: count / total for pair, count in sorted(self.rank_counts.items())}

    def summary(self) -> dict:
        d_row = np.asarray(self.d_row)
        d_col = np.asarray(self.d_col)
        out = {
            "d_row_mean": float(d_row.mean()) if d_row.size else math.nan,
            "d_row_sd": float(d_row.std(ddof=1)) if d_row.size > 1 else math.nan,
            "d_col_mean": float(d_col.mean()) if d_col.size else math.nan,
            "d_col_sd": float(d_col.std(ddof=1)) if d_col.size > 1 else math.nan,
        }
        if self.factor_n > 1:
            mean = self.factor_sum / self.factor_n
            var = (self.factor_sumsq - self.factor_n * mean * mean) / (self.factor_n - 1)
            out["factor_mean"] = mean
            out["factor_sd"] = math.sqrt(max(var, 0.0))
        else:
            out["factor_mean"] = math.nan
            out["factor_sd"] = math.nan
        return out


@dataclass
class McReport:
    """Aggregated Monte-Carlo results for one configuration."""

    config: SimConfig
    methods: tuple
    results: dict          # method -> MethodResult
    failures: list         # (rep index, method, message)

    def rank_frequencies(self, method: str) -> dict:
        return self.results[method].rank_frequencies()

    def summary(self, method: str) -> dict:
        return self.results[method].summary()

    def loading_draws(self, method: str) -> np.ndarray:
        return np.asarray(self.results[method].loading_draws)


def _replication_seed(seed: int, rep: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(entropy=seed, spawn_key=(rep,))


def run_replication(config: SimConfig, rep: int, methods: tuple) -> dict:
    """One replication: generate, fit every method twice (auto and forced ranks).

    Auto-rank fits feed the rank-frequency table; forced-rank fits (pinned at
    the true ranks) feed the space-distance, factor-error and loading-error
    metrics, mirroring how the oracle rotations are defined.
    """
    truth_ss, mask_ss = _replication_seed(config.seed, rep).spawn(2)
    truth = generate_truth(config, np.random.default_rng(truth_ss))
    mask = generate_mask(config, np.random.default_rng(mask_ss))
    observed = truth.series.with_mask(mask)

    out = {"rep": rep, "methods": {}, "errors": {}}
    k_max = (default_k_max(config.n_rows), default_k_max(config.n_cols))
    for method in methods:
        try:
            if method == REWEIGHTED:
                cov = reweighted_covariances(observed, overlap_counts(observed))
            else:
                cov = direct_covariances(observed)
            selected = rank_pair(cov, k_max=k_max)
            fitted = fit_from_covariances(
                observed, cov, ranks=(config.rank_rows, config.rank_cols)
            )
            rot = rotations(truth.row_loadings, truth.col_loadings, truth.factors, fitted)
            errs = factor_error(fitted, truth.factors, rot)
            delta = fitted.row_loadings - truth.row_loadings @ rot.row_rotation
            out["methods"][method] = {
                "ranks": selected,
                "d_row": space_distance(fitted.row_loadings, truth.row_loadings),
                "d_col": space_distance(fitted.col_loadings, truth.col_loadings),
                "factor_errors_sum": float(errs.sum()),
                "factor_errors_sumsq": float((errs**2).sum()),
                "factor_errors_n": int(errs.size),
                "factor_errors_mean": float(errs.mean()),
                "loading_draw": delta[0].tolist(),
            }
        except MatfactorError as exc:
            out["errors"][method] = f"{type(exc).__name__}: {exc}"
    return out


def run_monte_carlo(
    config: SimConfig,
    methods: tuple = (REWEIGHTED,),
    workers: int = 1,
) -> McReport:
    """Run the full campaign; aggregation order is fixed by replication index."""
    rep_results: list[dict | None] = [None] * config.reps
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {
                pool.submit(run_replication, config, rep, methods): rep
                for rep in range(config.reps)
            }
            for future, rep in futures.items():
                rep_results[rep] = future.result()
    else:
        for rep in range(config.reps):
            rep_results[rep] = run_replication(config, rep, methods)

    results = {method: MethodResult() for method in methods}
    failures = []
    for rep, rep_out in enumerate(rep_results):
        for method, message in rep_out["errors"].items():
            failures.append((rep, method, message))
        for method, metrics in rep_out["methods"].items():
            acc = results[method]
            pair = tuple(metrics["ranks"])
            acc.rank_counts[pair] = acc.rank_counts.get(pair, 0) + 1
            acc.d_row.append(metrics["d_row"])
            acc.d_col.append(metrics["d_col"])
            acc.factor_mean.append(metrics["factor_errors_mean"])
            acc.factor_sum += metrics["factor_errors_sum"]
            acc.factor_sumsq += metrics["factor_errors_sumsq"]
            acc.factor_n += metrics["factor_errors_n"]
            acc.loading_draws.append(metrics["loading_draw"])
    return McReport(config=config, methods=tuple(methods), results=results, failures=failures)


def scaled_config(config: SimConfig, **overrides) -> SimConfig:
    """Convenience for sweeps: a copy of ``config`` with fields replaced."""
    return replace(config, **overrides)
