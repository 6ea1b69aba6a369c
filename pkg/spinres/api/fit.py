"""
spinres fit / extract - parameter extraction from measured sweeps
"""
import logging
import math
from pathlib import Path
from typing import Dict, Tuple

import click

from spinres.api.options import config_option, gnuplot_option, load, out_option, output_dir, status
from spinres.models.sweep import S21Sweep
from spinres.services.fitting import linewidths_from_s21
from spinres.services.sweep_file_service import read_sweep, write_sweep
from spinres.utils.errors import ConfigError, FitNotConvergedError, SchemaError
from spinres.workers.fit_worker import FitWorker

logger = logging.getLogger(__name__)


def parse_fixes(values: Tuple[str, ...]) -> Dict[str, float]:
    """name=value pairs from repeated --fix flags"""
    fixes = {}
    for item in values:
        name, sep, text = item.partition("=")
        name = name.strip()
        if not sep or not name:
            raise ConfigError(f"--fix expects name=value, got '{item}'")
        try:
            value = float(text)
        except ValueError:
            raise ConfigError(f"--fix {name}: '{text.strip()}' is not a number")
        minimum_ok = value >= 0 if name.endswith(".g_coll") else value > 0
        if not (math.isfinite(value) and minimum_ok):
            raise ConfigError(f"--fix {name}: value {value} is out of range")
        fixes[name] = value
    return fixes


@click.command()
@click.argument("sweep_files", nargs=-1, required=True, type=click.Path(dir_okay=False, path_type=Path))
@config_option
@out_option
@gnuplot_option
@click.option("--fix", "fix_values", multiple=True, help="Pin a parameter, e.g. kappa=7.746 or 1a.g_factor=8.37")
@click.option("--peaks", type=click.IntRange(min=1), default=None,
              help="Number of lines to fit (defaults to the lines configured with gamma and g_coll)")
@click.option("--allow-nonconverged", is_flag=True, help="Exit 0 even when a fit hits the iteration cap")
@click.option("--relative-sigma", is_flag=True, help="Scale the covariance by the reduced chi-square")
def fit(sweep_files, config_path, out_dir, gnuplot, fix_values, peaks, allow_nonconverged, relative_sigma):
    """Fit kappa and (g, gamma, g_coll) per line to linewidth sweeps."""
    config = load(config_path)
    worker = FitWorker(out_dir=output_dir(out_dir, config), config=config, fixes=parse_fixes(fix_values),
                       peaks=peaks, gnuplot=gnuplot, absolute_sigma=not relative_sigma)
    results = worker.run(list(sweep_files))

    failure = None
    for result in results:
        if not result["success"]:
            failure = failure or result
            continue
        if len(results) > 1:
            click.echo(f"# {result['path']}")
        click.echo(result["report"], nl=False)
        status(f"wrote {result['report_path']}")
        status(f"wrote {result['plot_path']}")

    if failure is not None:
        click.echo(failure["error"], err=True)
        raise click.exceptions.Exit(failure["exit_code"])

    stalled = [r["path"] for r in results if not r["converged"]]
    if stalled:
        if not allow_nonconverged:
            raise FitNotConvergedError(f"Fit did not converge for {', '.join(stalled)}")
        status(f"not converged: {', '.join(stalled)}", ok=False)


@click.command()
@click.argument("s21_files", nargs=-1, required=True, type=click.Path(dir_okay=False, path_type=Path))
@out_option
def extract(s21_files, out_dir):
    """Linewidth sweeps from S21 sweeps (FWHM of each transmission trace)."""
    out = output_dir(out_dir, None)
    for path in s21_files:
        sweep = read_sweep(path)
        if not isinstance(sweep, S21Sweep):
            raise SchemaError(f"{path.name}: extract needs a schema=s21 sweep, got schema=fwhm")
        stem = path.name[:-len(path.suffix)] if path.suffix else path.name
        written = write_sweep(linewidths_from_s21(sweep), out / f"{stem}.fwhm.csv")
        status(f"wrote {written}")
