"""Data generation, Monte Carlo harness, cross-validation over nu, diagnostics.

The simulation design: rows of ``X`` are drawn from ``N(0, Sigma)`` with
``Sigma_ij = c^|i-j|``; the coefficient vector alternates ``-A, A, A`` over
its first ``k`` entries and is zero after; ``y = X beta + sigma * eps``.
Three stock transforms are supported (identity, first differences on a
line, and their vertical stack). Every replicate draws from its own
counter-based substream, so runs are reproducible for a fixed seed
regardless of worker scheduling.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from ._cd import lasso_grid_cd
from .augment import (
    AugmentedSystem,
    SplitKnockoffCopy,
    StructuralProblem,
    build_augmented,
    build_split_knockoff,
    equicorrelated_s,
)
from .baseline import baseline_knockoff_select
from .errors import InfeasibleDimensionError, InvalidArgumentError
from .filters import Selection, compute_w_statistics, knockoff_threshold, select_and_evaluate
from .linalg import (
    DEFAULT_TOLS,
    Tolerances,
    constrained_least_squares,
    matrix_rank,
    pseudo_inverse,
)
from .path import (
    MAGNITUDE,
    PATH_ORDER,
    LambdaGrid,
    SignificanceStats,
    SplitPath,
    make_lambda_grid,
    solve_split_lasso_path,
    stage1_statistics,
    stage2_statistics,
)

__all__ = [
    "SimConfig",
    "Dataset",
    "PipelineResult",
    "CvResult",
    "ReplicateOutcome",
    "RunSummary",
    "DiagnosticsReport",
    "make_D",
    "resolve_D",
    "substream",
    "gen_dataset",
    "run_split_pipeline",
    "cross_validate_nu",
    "auto_folds",
    "run_simulation",
    "write_outputs",
    "diagnostics",
]

_D_KINDS = ("D1", "D2", "D3")
_STREAM_TAGS = {"design": 1, "noise": 2, "cv": 3}


def substream(seed: int, replicate: int, tag: str) -> np.random.Generator:
    """Counter-based generator for one (seed, replicate, purpose) triple."""
    ss = np.random.SeedSequence([int(seed), int(replicate), _STREAM_TAGS[tag]])
    return np.random.Generator(np.random.Philox(ss))


def make_D(kind: str, p: int) -> np.ndarray:
    """Stock transforms: D1 = I_p, D2 = line-graph differences, D3 = [D1; D2]."""
    p = int(p)
    if p < 1:
        raise InvalidArgumentError(f"p must be >= 1, got {p}")
    key = str(kind).upper()
    if key not in _D_KINDS:
        raise InvalidArgumentError(f"unknown D kind {kind!r}; expected one of {_D_KINDS}")
    if key == "D1":
        return np.eye(p)
    if p < 2:
        raise InvalidArgumentError(f"difference operators need p >= 2, got {p}")
    d2 = np.eye(p - 1, p) - np.eye(p - 1, p, k=1)
    if key == "D2":
        return d2
    return np.vstack([np.eye(p), d2])


def resolve_D(d_kind: str, p: int) -> np.ndarray:
    """Map a config D_kind to a matrix: a stock kind or a CSV file path."""
    if str(d_kind).upper() in _D_KINDS:
        return make_D(d_kind, p)
    path = Path(d_kind)
    if not path.exists():
        raise InvalidArgumentError(
            f"D_kind {d_kind!r} is neither one of {_D_KINDS} nor an existing CSV file"
        )
    d = np.loadtxt(path, delimiter=",", ndmin=2)
    if d.shape[1] != p:
        raise InvalidArgumentError(f"D read from {d_kind!r} has {d.shape[1]} columns, expected {p}")
    return d


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo configuration; the defaults match the reference design."""

    n: int = 350
    p: int = 100
    k: int = 20
    A: float = 1.0
    c: float = 0.5
    sigma: float = 1.0
    D_kind: str = "D2"
    q: float = 0.2
    nu_grid: tuple[float, float, float] = (-1.0, 3.0, 0.2)  # log10 (min, max, step)
    lambda_grid: tuple[float, float, float] = (0.0, -6.0, 0.01)  # log10 (max, min, step)
    replicates: int = 20
    seed: int = 0
    eta: float = 0.1
    mode: str = PATH_ORDER
    plus: bool = False

    def __post_init__(self):
        if self.n < 1 or self.p < 1 or not 0 <= self.k <= self.p:
            raise InvalidArgumentError("need n >= 1, p >= 1 and 0 <= k <= p")
        if not 0 <= self.c < 1:
            raise InvalidArgumentError(f"feature correlation c must lie in [0, 1), got {self.c}")
        if self.sigma < 0:
            raise InvalidArgumentError("sigma must be nonnegative")
        if not 0 < self.q < 1:
            raise InvalidArgumentError(f"q must lie in (0, 1), got {self.q}")
        if not 0 < self.eta < 2:
            raise InvalidArgumentError(f"eta must lie in (0, 2), got {self.eta}")
        if self.mode not in (PATH_ORDER, MAGNITUDE):
            raise InvalidArgumentError(f"mode must be {PATH_ORDER!r} or {MAGNITUDE!r}")
        if self.replicates < 1:
            raise InvalidArgumentError("replicates must be >= 1")
        if self.seed < 0:
            raise InvalidArgumentError("seed must be a nonnegative integer")
        if len(self.nu_grid) != 3 or len(self.lambda_grid) != 3:
            raise InvalidArgumentError("nu_grid and lambda_grid must have three entries")
        object.__setattr__(self, "nu_grid", tuple(float(v) for v in self.nu_grid))
        object.__setattr__(self, "lambda_grid", tuple(float(v) for v in self.lambda_grid))

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InvalidArgumentError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def nu_values(self) -> np.ndarray:
        lo, hi, step = self.nu_grid
        if hi < lo or step <= 0:
            raise InvalidArgumentError(f"bad nu grid {self.nu_grid}")
        count = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return 10.0 ** (lo + step * np.arange(count))

    def lambdas(self) -> LambdaGrid:
        return make_lambda_grid(*self.lambda_grid)


@dataclass(frozen=True)
class Dataset:
    """One simulated replicate, with the ground truth kept for scoring."""

    X: np.ndarray
    beta_star: np.ndarray
    gamma_star: np.ndarray
    y: np.ndarray
    S1: np.ndarray  # 0-based nonnull indices of gamma_star
    epsilon: np.ndarray


def gen_dataset(config: SimConfig, replicate_index: int) -> Dataset:
    """Draw one replicate from the (seed, replicate) substreams."""
    p, n, k, amp = config.p, config.n, config.k, config.A
    idx = np.arange(p)
    cov = config.c ** np.abs(idx[:, None] - idx[None, :]) if config.c > 0 else np.eye(p)
    chol = np.linalg.cholesky(cov)
    rng_x = substream(config.seed, replicate_index, "design")
    x = rng_x.standard_normal((n, p)) @ chol.T
    ones = idx + 1  # coefficient pattern is stated 1-based
    beta = np.where(ones <= k, np.where(ones % 3 == 1, -amp, amp), 0.0)
    rng_eps = substream(config.seed, replicate_index, "noise")
    eps = rng_eps.standard_normal(n)
    y = x @ beta + config.sigma * eps
    d = resolve_D(config.D_kind, p)
    gamma = d @ beta
    return Dataset(x, beta, gamma, y, np.flatnonzero(gamma != 0.0), eps)


@dataclass(frozen=True)
class PipelineResult:
    """End-to-end split-knockoff output for one (problem, nu) pair."""

    nu: float
    stats: SignificanceStats
    W: np.ndarray
    W_s: np.ndarray
    T_q: float
    selection: Selection
    s: np.ndarray
    path: SplitPath
    copy: SplitKnockoffCopy
    aug: AugmentedSystem


def _stats_and_select(
    path: SplitPath,
    aug: AugmentedSystem,
    copy: SplitKnockoffCopy,
    problem: StructuralProblem,
    q: float,
    plus: bool,
    mode: str,
    lambda_hat: float | None,
    truth,
) -> PipelineResult:
    z, r = stage1_statistics(path, problem, mode=mode, lambda_hat=lambda_hat)
    z_prime, r_prime, z_tilde = stage2_statistics(
        path, aug, copy, r, mode=mode, lambda_hat=lambda_hat
    )
    stats = SignificanceStats(z, r, z_prime, r_prime, z_tilde, mode, lambda_hat)
    ws = compute_w_statistics(z, z_tilde)
    t_q = knockoff_threshold(ws.W, q, plus)
    selection = select_and_evaluate(ws.W, t_q, truth=truth, m=aug.m, q=q, plus=plus)
    return PipelineResult(
        path.nu, stats, ws.W, ws.W_s, t_q, selection, copy.s, path, copy, aug
    )


def run_split_pipeline(
    problem: StructuralProblem,
    nu: float,
    grid: LambdaGrid,
    q: float = 0.2,
    plus: bool = False,
    eta: float = 0.1,
    mode: str = PATH_ORDER,
    lambda_hat: float | None = None,
    truth=None,
    tol: float = DEFAULT_TOLS.kkt_residual,
    max_sweeps: int = 100_000,
    tols: Tolerances = DEFAULT_TOLS,
) -> PipelineResult:
    """Copy construction, path solve, stage statistics, filter and selection."""
    if problem.n < problem.m + problem.p:
        raise InfeasibleDimensionError(
            f"split knockoffs require n >= m + p, got n={problem.n}, "
            f"m={problem.m}, p={problem.p}"
        )
    aug = build_augmented(problem, nu, tols)
    s = equicorrelated_s(aug.C_nu, nu, eta, tols)
    copy = build_split_knockoff(aug, s, eta, tols)
    path = solve_split_lasso_path(problem, nu, grid, tol=tol, max_sweeps=max_sweeps, tols=tols)
    return _stats_and_select(path, aug, copy, problem, q, plus, mode, lambda_hat, truth)


@dataclass(frozen=True)
class CvResult:
    """Validation losses per nu and the minimizer."""

    nu_star: float
    nu_values: np.ndarray
    losses: np.ndarray
    fold_losses: np.ndarray  # (n_nu, folds)
    lambda_hats: np.ndarray | None  # per nu, magnitude mode only


def _prediction_loss_curve(path: SplitPath, x_val, y_val) -> np.ndarray:
    pred = path.beta_path @ x_val.T  # (n_lambda, n_val)
    resid = pred - y_val[np.newaxis, :]
    return 0.5 * np.sum(resid * resid, axis=1) / x_val.shape[0]


def cross_validate_nu(
    problem: StructuralProblem,
    nu_values,
    folds: int = 5,
    q: float = 0.2,
    grid: LambdaGrid | None = None,
    plus: bool = False,
    eta: float = 0.1,
    mode: str = PATH_ORDER,
    rng: np.random.Generator | None = None,
    tol: float = DEFAULT_TOLS.kkt_residual,
    max_sweeps: int = 100_000,
    tols: Tolerances = DEFAULT_TOLS,
) -> CvResult:
    """K-fold selection of the relaxation parameter.

    For each nu and fold, the split-knockoff pipeline runs on the training
    rows to produce a support estimate, and a constrained least-squares
    refit on those same rows (supp(D beta) restricted to the estimate) is
    scored on the held-out rows, ``||y_val - X_val beta_hat||^2 / (2 n_val)``.
    The returned ``nu_star`` minimizes the fold-averaged loss.

    In magnitude mode the per-fold ``lambda_hat`` is the grid point
    minimizing the validation prediction loss of the training path, and
    ``lambda_hats`` reports the fold-averaged minimizer per nu for reuse on
    the full data.
    """
    nu_values = np.asarray(nu_values, dtype=float).ravel()
    if nu_values.size == 0 or np.any(nu_values <= 0):
        raise InvalidArgumentError("nu_values must be positive")
    folds = int(folds)
    if folds < 2:
        raise InvalidArgumentError(f"folds must be >= 2, got {folds}")
    if folds > problem.n:
        raise InvalidArgumentError("more folds than rows")
    grid = grid if grid is not None else make_lambda_grid()
    rng = rng if rng is not None else np.random.default_rng(0)
    perm = rng.permutation(problem.n)
    chunks = np.array_split(perm, folds)
    min_train = problem.n - max(chunk.size for chunk in chunks)
    if min_train < problem.m + problem.p:
        raise InfeasibleDimensionError(
            f"{folds}-fold training parts have {min_train} rows, "
            f"need at least m + p = {problem.m + problem.p}"
        )

    n_nu = nu_values.size
    fold_losses = np.empty((n_nu, folds))
    pred_curves = np.zeros((n_nu, len(grid))) if mode == MAGNITUDE else None
    for j, nu in enumerate(nu_values):
        for f, val_idx in enumerate(chunks):
            train_idx = np.setdiff1d(perm, val_idx)
            sub = StructuralProblem(problem.X[train_idx], problem.y[train_idx], problem.D)
            x_val, y_val = problem.X[val_idx], problem.y[val_idx]
            aug = build_augmented(sub, nu, tols)
            s = equicorrelated_s(aug.C_nu, nu, eta, tols)
            copy = build_split_knockoff(aug, s, eta, tols)
            path = solve_split_lasso_path(sub, nu, grid, tol=tol, max_sweeps=max_sweeps, tols=tols)
            lam_hat = None
            if mode == MAGNITUDE:
                curve = _prediction_loss_curve(path, x_val, y_val)
                pred_curves[j] += curve
                lam_hat = float(grid.values[int(np.argmin(curve))])
            result = _stats_and_select(
                path, aug, copy, sub, q, plus, mode, lam_hat, truth=None
            )
            beta_hat = constrained_least_squares(
                sub.X, sub.y, problem.D, result.selection.S_hat, tols.rank_rtol
            )
            resid = y_val - x_val @ beta_hat
            fold_losses[j, f] = 0.5 * float(resid @ resid) / x_val.shape[0]

    losses = fold_losses.mean(axis=1)
    lambda_hats = None
    if mode == MAGNITUDE:
        lambda_hats = grid.values[np.argmin(pred_curves, axis=1)]
    nu_star = float(nu_values[int(np.argmin(losses))])
    return CvResult(nu_star, nu_values, losses, fold_losses, lambda_hats)


def auto_folds(n: int, m: int, p: int, minimum: int = 5) -> int:
    """Smallest fold count >= minimum whose training parts keep n_train >= m + p."""
    if n <= m + p:
        raise InfeasibleDimensionError(
            f"cross-validation needs n > m + p, got n={n}, m={m}, p={p}"
        )
    k = minimum
    while k <= n and n - math.ceil(n / k) < m + p:
        k += 1
    if k > n:
        raise InfeasibleDimensionError("no fold count keeps training parts feasible")
    return k


@dataclass(frozen=True)
class ReplicateOutcome:
    """Everything recorded for one replicate."""

    replicate: int
    per_nu: list
    nu_star: float
    selected: dict
    baseline: dict | None
    error: str | None = None


@dataclass(frozen=True)
class RunSummary:
    """Aggregate of a Monte Carlo run."""

    config: SimConfig
    folds: int
    nu_values: np.ndarray
    per_nu: list
    replicates: list
    selected_summary: dict
    baseline_summary: dict | None
    errors: list


def _mean_sd(values) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean()) if arr.size else float("nan")
    sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return mean, sd


def _replicate_task(args) -> ReplicateOutcome:
    config, replicate, folds, run_baseline = args
    data = gen_dataset(config, replicate)
    d = resolve_D(config.D_kind, config.p)
    problem = StructuralProblem(data.X, data.y, d)
    grid = config.lambdas()
    nu_values = config.nu_values()
    cv = cross_validate_nu(
        problem,
        nu_values,
        folds=folds,
        q=config.q,
        grid=grid,
        plus=config.plus,
        eta=config.eta,
        mode=config.mode,
        rng=substream(config.seed, replicate, "cv"),
    )
    per_nu = []
    star_record = None
    for j, nu in enumerate(nu_values):
        lam_hat = None if cv.lambda_hats is None else float(cv.lambda_hats[j])
        res = run_split_pipeline(
            problem,
            nu,
            grid,
            q=config.q,
            plus=config.plus,
            eta=config.eta,
            mode=config.mode,
            lambda_hat=lam_hat,
            truth=data.S1,
        )
        record = {
            "nu": float(nu),
            "fdp": res.selection.fdp,
            "power": res.selection.power,
            "cv_loss": float(cv.losses[j]),
            "n_selected": int(res.selection.S_hat.size),
            "W": res.W,
            "W_s": res.W_s,
        }
        per_nu.append(record)
        if nu == cv.nu_star:
            star_record = record
    selected = {
        "nu_star": cv.nu_star,
        "fdp": star_record["fdp"],
        "power": star_record["power"],
        "n_selected": star_record["n_selected"],
    }
    baseline = None
    if run_baseline:
        base = baseline_knockoff_select(
            problem, grid, q=config.q, plus=config.plus, truth=data.S1
        )
        baseline = {
            "fdp": base.selection.fdp,
            "power": base.selection.power,
            "n_selected": int(base.selection.S_hat.size),
        }
    return ReplicateOutcome(replicate, per_nu, cv.nu_star, selected, baseline)


def run_simulation(
    config: SimConfig, out_dir: str | Path | None = None, workers: int = 1
) -> RunSummary:
    """Run the Monte Carlo harness: per-nu curves, CV-selected runs, baseline.

    A replicate that raises is recorded and excluded from the aggregates;
    the run fails outright when more than 10% of replicates error. With
    ``out_dir`` set, plot-ready CSVs and an aggregate JSON are written.
    """
    d = resolve_D(config.D_kind, config.p)
    m, p = d.shape
    folds = auto_folds(config.n, m, p)
    run_baseline = m <= p and matrix_rank(d) == m
    # Warm the compiled kernel in the parent so forked workers inherit it.
    lasso_grid_cd(np.eye(2), np.zeros(2), np.array([1.0]), 1e-7, 10)

    tasks = [(config, rep, folds, run_baseline) for rep in range(config.replicates)]
    outcomes: list[ReplicateOutcome] = []
    if workers > 1 and config.replicates > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            iterator = pool.map(_run_task_safely, tasks)
            outcomes = list(iterator)
    else:
        outcomes = [_run_task_safely(t) for t in tasks]

    errors = [o.error for o in outcomes if o.error is not None]
    if len(errors) > 0.1 * config.replicates:
        raise RuntimeError(
            f"{len(errors)} of {config.replicates} replicates failed: {errors[:3]}"
        )
    good = [o for o in outcomes if o.error is None]

    nu_values = config.nu_values()
    per_nu = []
    for j, nu in enumerate(nu_values):
        fdps = [o.per_nu[j]["fdp"] for o in good]
        powers = [o.per_nu[j]["power"] for o in good]
        cv_losses = [o.per_nu[j]["cv_loss"] for o in good]
        mean_fdr, sd_fdr = _mean_sd(fdps)
        mean_power, sd_power = _mean_sd(powers)
        per_nu.append(
            {
                "nu": float(nu),
                "mean_fdr": mean_fdr,
                "sd_fdr": sd_fdr,
                "mean_power": mean_power,
                "sd_power": sd_power,
                "mean_cv_loss": float(np.mean(cv_losses)),
            }
        )
    sel_fdr, sel_fdr_sd = _mean_sd([o.selected["fdp"] for o in good])
    sel_pow, sel_pow_sd = _mean_sd([o.selected["power"] for o in good])
    selected_summary = {
        "mean_fdr": sel_fdr,
        "sd_fdr": sel_fdr_sd,
        "mean_power": sel_pow,
        "sd_power": sel_pow_sd,
    }
    baseline_summary = None
    if run_baseline and good:
        b_fdr, b_fdr_sd = _mean_sd([o.baseline["fdp"] for o in good])
        b_pow, b_pow_sd = _mean_sd([o.baseline["power"] for o in good])
        baseline_summary = {
            "mean_fdr": b_fdr,
            "sd_fdr": b_fdr_sd,
            "mean_power": b_pow,
            "sd_power": b_pow_sd,
        }
    summary = RunSummary(
        config, folds, nu_values, per_nu, outcomes, selected_summary, baseline_summary, errors
    )
    if out_dir is not None:
        write_outputs(summary, out_dir)
    return summary


def _run_task_safely(args) -> ReplicateOutcome:
    try:
        return _replicate_task(args)
    except Exception as exc:  # noqa: BLE001 - partial-failure policy
        return ReplicateOutcome(args[1], [], float("nan"), {}, None, error=repr(exc))


def _g17(x) -> str:
    return "%.17g" % float(x)


def write_outputs(summary: RunSummary, out_dir: str | Path) -> None:
    """Write summary.csv, replicates.csv, selected.csv, baseline.csv, summary.json."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    lines = ["nu,mean_fdr,sd_fdr,mean_power,sd_power,mean_cv_loss"]
    for row in summary.per_nu:
        lines.append(
            ",".join(
                _g17(row[key])
                for key in ("nu", "mean_fdr", "sd_fdr", "mean_power", "sd_power", "mean_cv_loss")
            )
        )
    (out / "summary.csv").write_text("\n".join(lines) + "\n")

    lines = ["replicate,nu,fdp,power,cv_loss,n_selected"]
    for o in summary.replicates:
        if o.error is not None:
            continue
        for row in o.per_nu:
            lines.append(
                f"{o.replicate},{_g17(row['nu'])},{_g17(row['fdp'])},"
                f"{_g17(row['power'])},{_g17(row['cv_loss'])},{row['n_selected']}"
            )
    (out / "replicates.csv").write_text("\n".join(lines) + "\n")

    lines = ["replicate,nu_star,fdp,power,n_selected"]
    for o in summary.replicates:
        if o.error is not None:
            continue
        sel = o.selected
        lines.append(
            f"{o.replicate},{_g17(o.nu_star)},{_g17(sel['fdp'])},"
            f"{_g17(sel['power'])},{sel['n_selected']}"
        )
    (out / "selected.csv").write_text("\n".join(lines) + "\n")

    if summary.baseline_summary is not None:
        lines = ["replicate,fdp,power,n_selected"]
        for o in summary.replicates:
            if o.error is not None or o.baseline is None:
                continue
            lines.append(
                f"{o.replicate},{_g17(o.baseline['fdp'])},"
                f"{_g17(o.baseline['power'])},{o.baseline['n_selected']}"
            )
        (out / "baseline.csv").write_text("\n".join(lines) + "\n")

    payload = {
        "config": asdict(summary.config),
        "folds": summary.folds,
        "per_nu": summary.per_nu,
        "selected_summary": summary.selected_summary,
        "baseline_summary": summary.baseline_summary,
        "errors": summary.errors,
    }
    (out / "summary.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


@dataclass(frozen=True)
class DiagnosticsReport:
    """Path-consistency diagnostics at one nu."""

    nu: float
    lambda_min_H11: float
    incoherence_norm: float
    sign_relation_agreement: float | None = None
    n_null_nonzero_w: int | None = None


def _h_nu(problem: StructuralProblem, nu: float, tols: Tolerances) -> np.ndarray:
    sigma_x = problem.X.T @ problem.X / problem.n
    a = sigma_x + problem.D.T @ problem.D / nu
    try:
        g = np.linalg.solve(a, problem.D.T)
    except np.linalg.LinAlgError:
        g = pseudo_inverse(a, tols.rank_rtol) @ problem.D.T
    return np.eye(problem.m) - problem.D @ g / nu


def diagnostics(
    problem: StructuralProblem,
    nu: float,
    s1=None,
    eta: float = 0.1,
    grid: LambdaGrid | None = None,
    epsilon=None,
    q: float = 0.2,
    plus: bool = False,
    tols: Tolerances = DEFAULT_TOLS,
) -> DiagnosticsReport:
    """Restricted eigenvalue, incoherence norm, and the sign-relation check.

    ``s1`` holds the 0-based nonnull indices (defaults to all coordinates,
    which makes the incoherence norm vacuously zero). When the true noise
    ``epsilon`` is supplied, the pipeline runs at ``nu`` and the fraction of
    null coordinates with nonzero W for which ``{W_i < 0}`` coincides with
    ``{zeta_i r_i > 0}`` is reported, ``zeta`` being the knockoff-noise
    projection of ``epsilon``.
    """
    nu = float(nu)
    if nu <= 0:
        raise InvalidArgumentError(f"nu must be positive, got {nu}")
    m = problem.m
    s1 = np.arange(m) if s1 is None else np.asarray(s1, dtype=int).ravel()
    if s1.size and (s1.min() < 0 or s1.max() >= m):
        raise InvalidArgumentError("s1 indices out of range")
    s0 = np.setdiff1d(np.arange(m), s1)
    h = _h_nu(problem, nu, tols)
    if s1.size:
        h11 = h[np.ix_(s1, s1)]
        lam_min = float(np.linalg.eigvalsh((h11 + h11.T) / 2.0)[0])
    else:
        lam_min = float("nan")
    if s0.size and s1.size:
        h01 = h[np.ix_(s0, s1)]
        coef = np.linalg.solve(h[np.ix_(s1, s1)], h01.T).T
        incoherence = float(np.max(np.abs(coef).sum(axis=1)))
    else:
        incoherence = 0.0

    agreement = None
    n_qualifying = None
    if epsilon is not None:
        epsilon = np.asarray(epsilon, dtype=float).ravel()
        if epsilon.shape[0] != problem.n:
            raise InvalidArgumentError("epsilon length must equal n")
        grid = grid if grid is not None else make_lambda_grid()
        res = run_split_pipeline(
            problem, nu, grid, q=q, plus=plus, eta=eta, mode=PATH_ORDER, tols=tols
        )
        zeta = res.copy.A_gamma_tilde[: problem.n].T @ epsilon / np.sqrt(problem.n)
        nulls = s0[res.W[s0] != 0.0]
        n_qualifying = int(nulls.size)
        if nulls.size:
            negative_w = res.W[nulls] < 0.0
            positive_zr = zeta[nulls] * res.stats.r[nulls] > 0.0
            agreement = float(np.mean(negative_w == positive_zr))
    return DiagnosticsReport(nu, lam_min, incoherence, agreement, n_qualifying)
