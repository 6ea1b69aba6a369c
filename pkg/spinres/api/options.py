"""
Options and helpers shared by the command modules
"""
from pathlib import Path
from typing import Optional

import click

from spinres.models.config import ExperimentConfig
from spinres.services.config_service import load_config
from spinres.utils.errors import DataError
from spinres.utils.units import UnitError, parse_number, parse_quantity, split_unit

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
DEFAULT_CONFIG = DATA_DIR / "er_yso.cfg"

config_option = click.option(
    "--config", "config_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
    help="Experiment config (defaults to the bundled Er:YSO example)")
out_option = click.option(
    "--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=None,
    help="Output directory (defaults to output.dir of the config)")
gnuplot_option = click.option(
    "--gnuplot", is_flag=True, help="Also write a gnuplot script next to each SVG")


def load(config_path: Optional[Path]) -> ExperimentConfig:
    return load_config(config_path or DEFAULT_CONFIG)


def output_dir(out_dir: Optional[Path], config: Optional[ExperimentConfig]) -> Path:
    if out_dir is not None:
        return out_dir
    return Path(config.output.dir) if config is not None else Path("out")


def parse_field(text: str) -> float:
    """'37.7 mT' -> 0.0377; a bare number is Tesla"""
    try:
        _, unit = split_unit(text)
        value = parse_quantity(text, "field", "T") if unit else parse_number(text)
    except UnitError as e:
        raise DataError(f"--field: {e}")
    if value < 0:
        raise DataError(f"--field must be >= 0, got {text}")
    return value


def status(message: str, ok: bool = True):
    """Coloured progress line on stderr; colour follows --no-color/SPINRES_NO_COLOR"""
    ctx = click.get_current_context(silent=True)
    color = ctx.obj.get("color") if ctx is not None and ctx.obj else None
    click.secho(message, fg="green" if ok else "yellow", err=True, color=color)
