"""Command-line interface.

Matrices travel as headerless comma-separated CSV (one matrix row per
line; vectors are single-column files). Selection results and diagnostics
are written as JSON; indices in JSON files are 1-based. Exit codes:
0 success, 2 invalid arguments or config, 3 infeasible dimensions,
4 solver convergence failure.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .augment import StructuralProblem
from .errors import ConvergenceError, InfeasibleDimensionError, InvalidArgumentError
from .experiments import (
    SimConfig,
    cross_validate_nu,
    diagnostics,
    make_D,
    run_simulation,
    run_split_pipeline,
    substream,
)
from .path import MAGNITUDE, PATH_ORDER, make_lambda_grid

EXIT_INVALID = 2
EXIT_INFEASIBLE = 3
EXIT_CONVERGENCE = 4


def _load_matrix(path: str, name: str) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2)
    except Exception as exc:
        raise InvalidArgumentError(f"could not read {name} from {path!r}: {exc}") from exc


def _load_vector(path: str, name: str) -> np.ndarray:
    arr = _load_matrix(path, name)
    if 1 not in arr.shape:
        raise InvalidArgumentError(f"{name} in {path!r} must be a single-column CSV")
    return arr.ravel()


def _parse_grid(spec: str, name: str) -> tuple[float, float, float]:
    parts = spec.split(":")
    if len(parts) != 3:
        raise InvalidArgumentError(f"{name} must look like a:b:step, got {spec!r}")
    try:
        return tuple(float(v) for v in parts)
    except ValueError as exc:
        raise InvalidArgumentError(f"{name} has non-numeric parts: {spec!r}") from exc


def _write_json(path: str, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _jsonify(value):
    if isinstance(value, np.ndarray):
        return [_jsonify(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return "inf" if value == float("inf") else value
    if isinstance(value, np.integer):
        return int(value)
    return value


def exit_codes(func):
    """Map package exceptions onto the documented exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except InfeasibleDimensionError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INFEASIBLE)
        except ConvergenceError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_CONVERGENCE)
        except (InvalidArgumentError, ValueError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_INVALID)

    return wrapper


@click.group()
def main():
    """Split-knockoff selection toolkit."""


@main.command("make-d")
@click.option("--kind", type=click.Choice(["d1", "d2", "d3"]), required=True)
@click.option("--p", "p", type=int, required=True)
@click.option("--out", "out", type=click.Path(), required=True)
@exit_codes
def make_d_cmd(kind: str, p: int, out: str):
    """Write one of the stock transform matrices as CSV."""
    np.savetxt(out, make_D(kind, p), fmt="%.17g", delimiter=",")
    click.echo(f"wrote {kind.upper()} ({p} columns) to {out}")


@main.command("select")
@click.option("--x", "x_path", type=click.Path(exists=True), required=True)
@click.option("--y", "y_path", type=click.Path(exists=True), required=True)
@click.option("--d", "d_path", type=click.Path(exists=True), required=True)
@click.option("--nu", type=float, required=True)
@click.option("--q", type=float, required=True)
@click.option("--plus", is_flag=True, default=False)
@click.option("--mode", type=click.Choice(["path", "magnitude"]), default="path")
@click.option("--lambda-grid", "lambda_grid", default="0:-6:0.01", show_default=True)
@click.option("--lambda-hat", "lambda_hat", type=float, default=None,
              help="Grid point at which magnitude-mode statistics are read.")
@click.option("--eta", type=float, default=0.1, show_default=True)
@click.option("--out", "out", type=click.Path(), required=True)
@exit_codes
def select_cmd(x_path, y_path, d_path, nu, q, plus, mode, lambda_grid, lambda_hat, eta, out):
    """Run split-knockoff selection on CSV inputs and write a result JSON."""
    problem = StructuralProblem(
        _load_matrix(x_path, "X"), _load_vector(y_path, "y"), _load_matrix(d_path, "D")
    )
    gmax, gmin, gstep = _parse_grid(lambda_grid, "--lambda-grid")
    grid = make_lambda_grid(gmax, gmin, gstep)
    mode_name = PATH_ORDER if mode == "path" else MAGNITUDE
    if mode_name == MAGNITUDE and lambda_hat is None:
        raise InvalidArgumentError("--mode magnitude requires --lambda-hat")
    res = run_split_pipeline(
        problem, nu, grid, q=q, plus=plus, eta=eta, mode=mode_name, lambda_hat=lambda_hat
    )
    payload = {
        "nu": float(nu),
        "q": float(q),
        "plus": bool(plus),
        "T_q": _jsonify(res.T_q),
        "selected": [int(i) + 1 for i in res.selection.S_hat],
        "W": _jsonify(res.W),
        "Z": _jsonify(res.stats.Z),
        "Z_tilde": _jsonify(res.stats.Z_tilde),
    }
    _write_json(out, payload)
    click.echo(f"selected {len(payload['selected'])} of {problem.m} coordinates -> {out}")


@main.command("cv")
@click.option("--x", "x_path", type=click.Path(exists=True), required=True)
@click.option("--y", "y_path", type=click.Path(exists=True), required=True)
@click.option("--d", "d_path", type=click.Path(exists=True), required=True)
@click.option("--nu-grid", "nu_grid", default="-1:3:0.4", show_default=True,
              help="log10 min:max:step for the nu grid.")
@click.option("--folds", type=int, default=5, show_default=True)
@click.option("--q", type=float, required=True)
@click.option("--plus", is_flag=True, default=False)
@click.option("--mode", type=click.Choice(["path", "magnitude"]), default="path")
@click.option("--lambda-grid", "lambda_grid", default="0:-6:0.01", show_default=True)
@click.option("--eta", type=float, default=0.1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for the fold permutation.")
@click.option("--out", "out", type=click.Path(), required=True)
@exit_codes
def cv_cmd(x_path, y_path, d_path, nu_grid, folds, q, plus, mode, lambda_grid, eta, seed, out):
    """Cross-validate the relaxation parameter nu and write the loss table."""
    problem = StructuralProblem(
        _load_matrix(x_path, "X"), _load_vector(y_path, "y"), _load_matrix(d_path, "D")
    )
    lo, hi, step = _parse_grid(nu_grid, "--nu-grid")
    if hi < lo or step <= 0:
        raise InvalidArgumentError(f"bad --nu-grid {nu_grid!r}")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    nu_values = 10.0 ** (lo + step * np.arange(count))
    gmax, gmin, gstep = _parse_grid(lambda_grid, "--lambda-grid")
    grid = make_lambda_grid(gmax, gmin, gstep)
    mode_name = PATH_ORDER if mode == "path" else MAGNITUDE
    result = cross_validate_nu(
        problem,
        nu_values,
        folds=folds,
        q=q,
        grid=grid,
        plus=plus,
        eta=eta,
        mode=mode_name,
        rng=substream(seed, 0, "cv"),
    )
    payload = {
        "nu_star": result.nu_star,
        "folds": int(folds),
        "losses": [
            {"nu": float(nu), "loss": float(loss)}
            for nu, loss in zip(result.nu_values, result.losses)
        ],
    }
    if result.lambda_hats is not None:
        payload["lambda_hats"] = _jsonify(result.lambda_hats)
    _write_json(out, payload)
    click.echo(f"nu_star = {result.nu_star:g} -> {out}")


@main.command("simulate")
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--out-dir", "out_dir", type=click.Path(), required=True)
@click.option("--workers", type=int, default=1, show_default=True)
@exit_codes
def simulate_cmd(config_path, out_dir, workers):
    """Run the Monte Carlo harness from a TOML config."""
    with open(config_path, "rb") as fh:
        try:
            raw = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise InvalidArgumentError(f"could not parse {config_path!r}: {exc}") from exc
    config = SimConfig.from_dict(raw)
    summary = run_simulation(config, out_dir=out_dir, workers=workers)
    sel = summary.selected_summary
    click.echo(
        f"CV-selected nu: mean FDR {sel['mean_fdr']:.4f} "
        f"({sel['sd_fdr']:.4f}), mean power {sel['mean_power']:.4f} "
        f"({sel['sd_power']:.4f}) over {config.replicates} replicates -> {out_dir}"
    )


@main.command("diag")
@click.option("--x", "x_path", type=click.Path(exists=True), required=True)
@click.option("--d", "d_path", type=click.Path(exists=True), required=True)
@click.option("--nu", type=float, required=True)
@click.option("--s1", "s1_path", type=click.Path(exists=True), default=None,
              help="Single-column CSV of 1-based nonnull indices.")
@click.option("--out", "out", type=click.Path(), required=True)
@exit_codes
def diag_cmd(x_path, d_path, nu, s1_path, out):
    """Report restricted eigenvalue and incoherence diagnostics at one nu."""
    x = _load_matrix(x_path, "X")
    d = _load_matrix(d_path, "D")
    problem = StructuralProblem(x, np.zeros(x.shape[0]), d)
    s1 = None
    if s1_path is not None:
        raw = _load_vector(s1_path, "s1")
        s1 = np.asarray(np.rint(raw), dtype=int) - 1
    report = diagnostics(problem, nu, s1=s1)
    payload = {
        "nu": float(report.nu),
        "lambda_min_H11": _jsonify(report.lambda_min_H11),
        "incoherence_norm": _jsonify(report.incoherence_norm),
    }
    _write_json(out, payload)
    click.echo(
        f"lambda_min(H11) = {report.lambda_min_H11:g}, "
        f"incoherence = {report.incoherence_norm:g} -> {out}"
    )


if __name__ == "__main__":
    main()
