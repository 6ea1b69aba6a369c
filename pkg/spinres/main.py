"""
spinres command line: spectrum, sweep, synth, fit, extract, polarization
"""
import logging
import sys

import click

from spinres.api import fit, polarization, spectrum, sweep
from spinres.utils import settings
from spinres.utils.errors import SpinresError

logger = logging.getLogger("spinres")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(verbose: int):
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        level = getattr(logging, str(settings.LOG_LEVEL).upper(), logging.WARNING)
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


class SpinresGroup(click.Group):
    """Turns SpinresError into a one-line `CODE: message` on stderr and its exit code"""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except SpinresError as e:
            logger.debug(f"{type(e).__name__}: {e.message}")
            click.echo(e.diagnostic(), err=True)
            ctx.exit(e.exit_code)


@click.group(cls=SpinresGroup)
@click.option("-v", "--verbose", count=True, help="-v for progress, -vv for debug output")
@click.option("--no-color", is_flag=True, help="Disable ANSI colour (also SPINRES_NO_COLOR)")
@click.pass_context
def cli(ctx, verbose, no_color):
    """Er spin ensemble and superconducting resonator toolkit."""
    configure_logging(verbose)
    ctx.ensure_object(dict)
    ctx.obj["color"] = False if (no_color or settings.NO_COLOR) else None


cli.add_command(spectrum.spectrum)
cli.add_command(sweep.sweep)
cli.add_command(sweep.synth)
cli.add_command(fit.fit)
cli.add_command(fit.extract)
cli.add_command(polarization.polarization)


def main():
    cli(prog_name="spinres")


if __name__ == "__main__":
    main()
