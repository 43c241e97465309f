#!/usr/bin/env python3
"""
EigenNet - eigenpairs of the 1-D Laplacian learned by a small neural network

Command-line interface for training runs, the oracle suite and analytic dumps.
"""

import logging
import os
import sys
from pathlib import Path
from typing import Optional, Tuple

import click
import numpy as np

from . import __version__
from .config import parse_config, write_template
from .errors import AbortedRunError, EigenNetError
from .experiment import run_experiment
from .models import ProblemMode
from .oracle import FIXED_LAMBDA_CASES, PRESETS, analytic_eigenpair, analytic_fixed_lambda
from .output_generator import write_oracle_dump
from .sampling import EVAL_GRID_POINTS
from .utils.file_utils import ensure_directory, resolve_output_dir
from .verifier import run_verification

OUTPUT_ROOT_ENV = "EIGENNET_OUTPUT_ROOT"


def _output_root() -> Optional[str]:
    return os.environ.get(OUTPUT_ROOT_ENV) or None


@click.group()
@click.version_option(version=__version__)
@click.option("--verbose", "-v", is_flag=True, help="Enable verbose output")
@click.pass_context
def main(ctx: click.Context, verbose: bool) -> None:
    """EigenNet - learn Laplacian eigenpairs with a neural network."""
    ctx.ensure_object(dict)
    ctx.obj["verbose"] = verbose
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.argument("config_file", type=click.Path(exists=True, dir_okay=False, path_type=Path),
                required=False)
@click.option("--set", "overrides", multiple=True, metavar="SECTION.KEY=VALUE",
              help="Override one configuration value (repeatable)")
@click.option("--preset", type=click.Choice(PRESETS), help="Problem preset")
@click.option("--mode", type=click.Choice([m.value for m in ProblemMode]), help="Problem mode")
@click.option("--num-outputs", "-m", type=int, help="Number of eigenpairs to learn")
@click.option("--epochs", type=int, help="Number of training epochs")
@click.option("--seed", type=int, help="Random seed")
@click.option("--output-dir", "-o", type=click.Path(path_type=Path), help="Output directory")
def run(config_file: Optional[Path], overrides: Tuple[str, ...], preset: Optional[str],
        mode: Optional[str], num_outputs: Optional[int], epochs: Optional[int],
        seed: Optional[int], output_dir: Optional[Path]) -> None:
    """Train a network and write metrics, function dumps and a summary.

    Without a config file the Dirichlet problem on [0, pi] is used with every
    default. Values are taken, lowest priority first, from the defaults, the
    preset, the config file, --set overrides and the dedicated flags.

    Example: eigennet run configs/multi.yaml --set training.epochs=500 --seed 1
    """
    try:
        cfg = parse_config(
            str(config_file) if config_file else None,
            overrides,
            output_dir=str(output_dir) if output_dir else None,
            preset=preset,
            mode=mode,
            num_outputs=num_outputs,
            epochs=epochs,
            seed=seed,
        )
        cfg.output_dir = resolve_output_dir(cfg.output_dir, _output_root())

        click.echo(f"🚀 Training {cfg.problem.name} ({cfg.problem.mode.value}, "
                   f"m={cfg.problem.num_outputs}) for {cfg.training.epochs} epochs...")
        summary = run_experiment(cfg)

        for pair in summary.pairs:
            line = f"   #{pair.rank}: lambda = {pair.eigenvalue:.6g}"
            if pair.reference_eigenvalue is not None:
                line += f" (exact {pair.reference_eigenvalue:.6g}, L2 error {pair.l2_error:.3e})"
            click.echo(line)
        if summary.max_ortho is not None:
            click.echo(f"📐 Max |<u_i, u_j>|: {summary.max_ortho:.3e}")
        click.echo(f"✅ Finished {summary.epochs_run} epochs in {summary.wall_clock:.1f}s")
        click.echo(f"📁 Results saved in: {cfg.output_dir}")

    except AbortedRunError as e:
        click.echo(f"❌ Run aborted: {e}", err=True)
        sys.exit(2)
    except EigenNetError as e:
        click.echo(f"❌ Error: {e}", err=True)
        sys.exit(1)
    except OSError as e:
        click.echo(f"❌ Cannot write results: {e}", err=True)
        sys.exit(1)


@main.command()
@click.argument("config_file", type=click.Path(exists=True, dir_okay=False, path_type=Path),
                required=False)
@click.option("--set", "overrides", multiple=True, metavar="SECTION.KEY=VALUE",
              help="Override one configuration value (repeatable)")
@click.option("--seed", type=int, help="Seed for the random points and networks")
def verify(config_file: Optional[Path], overrides: Tuple[str, ...], seed: Optional[int]) -> None:
    """Run the oracle suite without training.

    Checks network derivatives and gradients against finite differences,
    quadrature and Rayleigh quotients against exact eigenfunctions, and the
    finite-difference spectrum against k^2. Exits nonzero if any check fails.

    Example: eigennet verify --seed 3
    """
    try:
        cfg = parse_config(str(config_file) if config_file else None, overrides, seed=seed)
        click.echo("🔍 Running oracle checks...")
        report = run_verification(cfg)
        click.echo(report.format_table())
    except EigenNetError as e:
        click.echo(f"❌ Error: {e}", err=True)
        sys.exit(1)

    if not report.passed:
        click.echo(f"❌ {len(report.failures)} check(s) failed", err=True)
        sys.exit(1)
    click.echo(f"✅ All {len(report.checks)} checks passed")


@main.command(name="dump-oracle")
@click.argument("problem", type=click.Choice(PRESETS))
@click.option("--count", "-k", default=5, show_default=True,
              help="Number of eigenpairs (dirichlet only)")
@click.option("--points", default=EVAL_GRID_POINTS, show_default=True, help="Grid points")
@click.option("--output", "-o", type=click.Path(dir_okay=False, path_type=Path),
              help="Output CSV file")
def dump_oracle(problem: str, count: int, points: int, output: Optional[Path]) -> None:
    """Write the analytic solution(s) of a problem on a uniform grid.

    Example: eigennet dump-oracle dirichlet --count 3
    """
    try:
        if problem in FIXED_LAMBDA_CASES:
            solutions = [analytic_fixed_lambda(problem)]
        else:
            if count < 1:
                raise click.BadParameter("must be at least 1", param_hint="--count")
            solutions = [analytic_eigenpair(k) for k in range(1, count + 1)]

        if output is None:
            root = ensure_directory(resolve_output_dir(None, _output_root()))
            output = root / f"oracle_{problem}.csv"
        else:
            ensure_directory(str(output.parent))

        first = solutions[0]
        x = np.linspace(first.a, first.b, points)
        write_oracle_dump(str(output), x, solutions)
        click.echo(f"✅ Wrote {len(solutions)} analytic function(s) to {output}")

    except EigenNetError as e:
        click.echo(f"❌ Error: {e}", err=True)
        sys.exit(1)


@main.command()
@click.argument("config_file", type=click.Path(dir_okay=False, path_type=Path))
@click.option("--preset", type=click.Choice(PRESETS), default="dirichlet", show_default=True,
              help="Problem preset")
@click.option("--num-outputs", "-m", type=int, help="Number of eigenpairs to learn")
def init(config_file: Path, preset: str, num_outputs: Optional[int]) -> None:
    """Write a starter configuration with every default spelled out.

    Example: eigennet init multi.yaml --preset dirichlet -m 3
    """
    try:
        if config_file.exists():
            click.echo(f"❌ {config_file} already exists", err=True)
            sys.exit(1)
        ensure_directory(str(config_file.parent))
        cfg = write_template(str(config_file), preset, num_outputs)
        click.echo(f"✅ Created config for {cfg.problem.name} "
                   f"({cfg.problem.mode.value}, m={cfg.problem.num_outputs})")
        click.echo(f"📄 Config saved at: {config_file}")
    except EigenNetError as e:
        click.echo(f"❌ Error: {e}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
