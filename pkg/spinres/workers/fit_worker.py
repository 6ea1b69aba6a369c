"""
Fit Worker - fits linewidth sweep files, several at once, each with its own state
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from spinres.models.config import ExperimentConfig
from spinres.models.sweep import FieldSweep
from spinres.services import fitting, plot_service
from spinres.services.cavity_model import resonance_field
from spinres.services.experiment_service import ExperimentService
from spinres.services.report_service import format_fit_report
from spinres.services.sweep_file_service import read_sweep, write_sweep
from spinres.utils import settings
from spinres.utils.constants import MT_PER_T
from spinres.utils.errors import ConfigError, DataError, SchemaError, SpinresError

logger = logging.getLogger(__name__)

OVERLAY_POINTS = 2000


class FitWorker:
    def __init__(self, out_dir: Path, config: Optional[ExperimentConfig] = None,
                 fixes: Optional[Dict[str, float]] = None, peaks: Optional[int] = None,
                 gnuplot: bool = False, absolute_sigma: bool = True):
        self.out_dir = Path(out_dir)
        self.config = config
        self.fixes = dict(fixes or {})
        self.peaks = peaks
        self.gnuplot = gnuplot
        self.absolute_sigma = absolute_sigma

    def run(self, paths: Sequence[Path]) -> List[dict]:
        """Fit every file; results come back in input order"""
        workers = max(1, min(settings.WORKERS, len(paths)))
        logger.info(f"Fitting {len(paths)} sweep file(s) with {workers} worker(s)")
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda p: self.handle_fit_request({"path": str(p)}), paths))

    def handle_fit_request(self, message: dict) -> dict:
        """Fit one sweep file and write its report and overlay plot"""
        path = Path(message["path"])
        logger.info(f"Fitting {path}")
        try:
            sweep = read_sweep(path)
            if not isinstance(sweep, FieldSweep):
                raise SchemaError(f"{path.name}: fit needs a schema=fwhm sweep, got schema=s21 "
                                  f"(run `spinres extract` first)")

            spec = self.build_spec(sweep)
            result = fitting.fit(sweep, spec, absolute_sigma=self.absolute_sigma)

            stem = path.name[:-len(path.suffix)] if path.suffix else path.name
            report_path = plot_service.write_text(self.out_dir / f"{stem}.fit.txt",
                                                  format_fit_report(result, source=path.name))
            model = self.model_curve(sweep, result)
            plot_path = plot_service.write_text(self.out_dir / f"{stem}.fit.svg", self.overlay(sweep, model))
            if self.gnuplot:
                model_path = write_sweep(model, self.out_dir / f"{stem}.fit.model.csv")
                plot_service.write_text(self.out_dir / f"{stem}.fit.gp", plot_service.gnuplot_script(
                    str(path), "B (mT)", "FWHM (MHz)", [("($1*1000):2", "data")], f"{stem}.fit.gp.svg",
                    curves=[(model_path.name, "($1*1000):2", "fit")]))

            return {
                "path": str(path),
                "success": True,
                "converged": result.converged,
                "report_path": str(report_path),
                "plot_path": str(plot_path),
                "report": format_fit_report(result),
                "message": result.message,
            }

        except SpinresError as e:
            return self._failure(path, e)
        except ValidationError as e:
            error = e.errors()[0]
            location = ".".join(str(p) for p in error["loc"])
            return self._failure(path, DataError(f"{path.name}: {location}: {error['msg']}"))

    def _failure(self, path: Path, error: SpinresError) -> dict:
        logger.debug(f"Fit of {path} failed: {error.message}")
        return {
            "path": str(path),
            "success": False,
            "converged": False,
            "error": error.diagnostic(),
            "exit_code": error.exit_code,
        }

    def _expected_lines(self, f_r: float) -> List[str]:
        """Configured line labels ordered by resonance field"""
        if self.config is None:
            return []
        lines = ExperimentService(self.config).ensemble_transitions()
        return [t.label for t in sorted(lines, key=lambda t: resonance_field(t, f_r))]

    def build_spec(self, sweep: FieldSweep):
        f_r = sweep.f_r
        if f_r is None and self.config is not None:
            f_r = self.config.cavity.f_r
        if f_r is None:
            raise DataError("Resonator frequency unknown: the sweep header has no f_r and no config was given")

        labels = self._expected_lines(f_r)
        n_peaks = self.peaks if self.peaks is not None else len(labels)
        if n_peaks < 1:
            raise ConfigError("Number of lines to fit unknown: give --peaks or a config with gamma/g_coll per site")

        spec = fitting.initial_guess(sweep, n_peaks, f_r=f_r, labels=labels if len(labels) == n_peaks else None)
        for name, value in self.fixes.items():
            try:
                spec = spec.with_fixed(name, value)
            except KeyError:
                known = ", ".join(n for n, _ in spec.parameters())
                raise ConfigError(f"Unknown parameter '{name}' in --fix (known: {known})")
        return spec

    def model_curve(self, sweep: FieldSweep, result) -> FieldSweep:
        """Fitted linewidth on a dense grid spanning the sweep"""
        dense = np.linspace(sweep.fields[0], sweep.fields[-1], OVERLAY_POINTS)
        model = np.atleast_1d(fitting.model_fwhm(result.parameters, dense))
        return FieldSweep(fields=dense, fwhm=model, f_r=sweep.f_r, metadata={"source": "fit"})

    def overlay(self, sweep: FieldSweep, model: FieldSweep) -> str:
        plot = plot_service.LinePlot(x_label="B (mT)", y_label="FWHM (MHz)")
        plot.add(sweep.fields * MT_PER_T, sweep.fwhm, label="data", markers=True)
        plot.add(model.fields * MT_PER_T, model.fwhm, label="fit")
        return plot.svg()
