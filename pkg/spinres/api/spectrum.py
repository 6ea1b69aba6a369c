"""
spinres spectrum - transitions of every site subclass at one field
"""
import logging
from typing import List

import click

from spinres.api.options import config_option, load, out_option, parse_field, status
from spinres.services.cavity_model import cooperativity, is_strong_coupling
from spinres.services.experiment_service import ExperimentService
from spinres.services.plot_service import write_text
from spinres.services.report_service import (format_coupling, format_resonances,
                                             format_transition_table)
from spinres.services.spin_hamiltonian import effective_g, transitions

logger = logging.getLogger(__name__)


def coupling_report(service: ExperimentService) -> List[str]:
    """Cooperativity and coupling regime of every configured line"""
    ensemble = service.ensemble_transitions()
    if not ensemble:
        return []
    kappa = service.cavity.kappa
    return format_coupling(ensemble, kappa,
                           [cooperativity(t, kappa) for t in ensemble],
                           [is_strong_coupling(t, kappa) for t in ensemble])


def spectrum_report(service: ExperimentService, field: float) -> str:
    B = service.field_at(field)
    direction = service.field_direction
    drive = service.drive_direction

    lines = []
    for sub in service.site_subclasses():
        table = transitions(sub.system, B, drive)
        lines.extend(format_transition_table(sub.label, table, effective_g(sub.system.g, direction), field))
        lines.append("")

    lines.extend(format_resonances(service.resonance_fields(), service.cavity.f_r))
    coupling = coupling_report(service)
    if coupling:
        lines.append("")
        lines.extend(coupling)
    return "\n".join(lines) + "\n"


@click.command()
@config_option
@out_option
@click.option("--field", "field_text", required=True, help="Field magnitude, e.g. '37.7 mT' (bare numbers are Tesla)")
def spectrum(config_path, out_dir, field_text):
    """Transition table of every site and subclass at one field."""
    config = load(config_path)
    field = parse_field(field_text)
    report = spectrum_report(ExperimentService(config), field)
    click.echo(report, nl=False)

    if out_dir is not None:
        path = write_text(out_dir / "spectrum.txt", report)
        status(f"wrote {path}")
