"""
spinres sweep / synth - forward simulation of linewidth (or S21) sweeps
"""
import logging
from pathlib import Path

import click

from spinres.api.options import config_option, gnuplot_option, load, out_option, output_dir, status
from spinres.api.spectrum import coupling_report
from spinres.models.sweep import FieldSweep, SweepSchema
from spinres.services import plot_service
from spinres.services.experiment_service import ExperimentService
from spinres.services.report_service import format_resonances
from spinres.services.sweep_file_service import write_sweep
from spinres.services.synth_service import simulate_linewidths, synthesize_linewidths, synthesize_s21
from spinres.utils.constants import MT_PER_T

logger = logging.getLogger(__name__)


def write_linewidth_outputs(sweep: FieldSweep, out: Path, stem: str, gnuplot: bool):
    csv_path = write_sweep(sweep, out / f"{stem}.csv")
    plot = plot_service.LinePlot(x_label="B (mT)", y_label="FWHM (MHz)")
    plot.add(sweep.fields * MT_PER_T, sweep.fwhm)
    svg_path = plot_service.write_text(out / f"{stem}.svg", plot.svg())
    status(f"wrote {csv_path}")
    status(f"wrote {svg_path}")
    if gnuplot:
        script = plot_service.gnuplot_script(csv_path.name, "B (mT)", "FWHM (MHz)",
                                             [("($1*1000):2", stem)], f"{stem}.gp.svg")
        status(f"wrote {plot_service.write_text(out / f'{stem}.gp', script)}")


@click.command()
@config_option
@out_option
@gnuplot_option
def sweep(config_path, out_dir, gnuplot):
    """Resonator linewidth over the configured field grid."""
    config = load(config_path)
    service = ExperimentService(config)
    result = simulate_linewidths(service)
    out = output_dir(out_dir, config)

    click.echo("\n".join(format_resonances(service.resonance_fields(), service.cavity.f_r) + coupling_report(service)))
    write_linewidth_outputs(result, out, "sweep", gnuplot)


@click.command()
@config_option
@out_option
@gnuplot_option
@click.option("--noise", type=float, default=0.0, show_default=True,
              help="Relative Gaussian noise on each sample")
@click.option("--seed", type=int, default=None, help="Random seed (recorded in the file header)")
@click.option("--schema", type=click.Choice([s.value for s in SweepSchema]), default=SweepSchema.FWHM.value,
              show_default=True, help="fwhm: linewidth vs field; s21: transmission traces per field")
def synth(config_path, out_dir, gnuplot, noise, seed, schema):
    """Synthetic sweep with seeded noise, for testing fits."""
    config = load(config_path)
    service = ExperimentService(config)
    out = output_dir(out_dir, config)

    if schema == SweepSchema.S21.value:
        path = write_sweep(synthesize_s21(service, noise, seed), out / "synth.csv")
        status(f"wrote {path}")
        return
    write_linewidth_outputs(synthesize_linewidths(service, noise, seed), out, "synth", gnuplot)
