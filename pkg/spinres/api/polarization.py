"""
spinres polarization - thermal polarization and temperature-scaled coupling
"""
import logging
from pathlib import Path

import click
import numpy as np

from spinres.api.options import out_option, status
from spinres.services import plot_service
from spinres.services.report_service import format_polarization_table
from spinres.services.sweep_file_service import read_thermal_points
from spinres.services.thermal import extrapolate_zero_T, g_coll_at_temperature, polarization as polarization_of
from spinres.utils.errors import DataError

logger = logging.getLogger(__name__)

# 70 mK to 500 mK in 10 mK steps
DEFAULT_TEMPERATURES = tuple(round(0.07 + 0.01 * k, 2) for k in range(44))


@click.command()
@click.option("--frequency", type=float, default=4.4, show_default=True, help="Transition frequency in GHz")
@click.option("-T", "--temperature", "temperatures", type=float, multiple=True,
              help="Temperature in K (repeatable; default 70-500 mK)")
@click.option("--g0", type=float, default=None, help="Zero-temperature coupling in MHz")
@click.option("--points", "points_path", type=click.Path(dir_okay=False, path_type=Path), default=None,
              help="CSV of T_K,g_coll_MHz measurements to extrapolate to T = 0")
@out_option
def polarization(frequency, temperatures, g0, points_path, out_dir):
    """Polarization tanh(hf/2kT) and g_coll(T) = g0 sqrt(polarization)."""
    if not frequency > 0:
        raise DataError(f"--frequency must be > 0 GHz, got {frequency}")

    if points_path is not None:
        points = read_thermal_points(points_path)
        g0, rms = extrapolate_zero_T(points, frequency)
        click.echo(f"g0 = {g0:.6f} MHz")
        click.echo(f"rms_residual = {rms:.6g}")
        if not temperatures:
            temperatures = tuple(p.temperature for p in points)

    temperatures = tuple(temperatures) or DEFAULT_TEMPERATURES
    for T in temperatures:
        if not T > 0:
            raise DataError(f"Temperature must be > 0 K, got {T}")
    if g0 is not None and not g0 >= 0:
        raise DataError(f"--g0 must be >= 0 MHz, got {g0}")

    grid = np.array(temperatures, dtype=float)
    p = np.atleast_1d(polarization_of(frequency, grid))
    couplings = np.atleast_1d(g_coll_at_temperature(g0, frequency, grid)) if g0 is not None else None
    table = format_polarization_table(temperatures, p, couplings)
    click.echo(table, nl=False)

    if out_dir is not None:
        order = np.argsort(grid)
        plot = plot_service.LinePlot(x_label="T (mK)",
                                     y_label="g_coll (MHz)" if couplings is not None else "polarization")
        plot.add(1000.0 * grid[order], (couplings if couplings is not None else p)[order], markers=grid.size < 12)
        status(f"wrote {plot_service.write_text(out_dir / 'polarization.csv', table)}")
        status(f"wrote {plot_service.write_text(out_dir / 'polarization.svg', plot.svg())}")
