"""
Extraction of (g, gamma, g_coll) per line and kappa from linewidth-vs-field sweeps.

The forward model is cavity_model.total_linewidth itself. The minimizer is
Levenberg-Marquardt with Marquardt diagonal scaling on

    chi^2 = sum(((model - fwhm) / sigma)^2),   sigma = 1 MHz when absent

    damping: lambda_0 = 1e-3, x2 on a rejected step, /3 on an accepted step
    converged: two consecutive iterations with relative cost decrease
               < 1e-10 or gradient inf-norm < 1e-8
"""
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.ndimage import median_filter
from scipy.signal import find_peaks

from spinres.models.cavity import CavityParams
from spinres.models.fitting import FitModelSpec, FitParameter, FitResult, ModelParameters, TransitionGuess
from spinres.models.sweep import FieldSweep, S21Sweep
from spinres.services.cavity_model import detuning, total_linewidth, trace_fwhm
from spinres.utils import settings
from spinres.utils.constants import MHZ_PER_GHZ, MT_PER_T, MU_B_OVER_H_MHZ_PER_T
from spinres.utils.errors import DataError, InsufficientDataError, PeakDetectionError, RankDeficiencyError

logger = logging.getLogger(__name__)

MIN_SAMPLES = 8
DEFAULT_SIGMA = 1.0  # MHz, scales the covariance only

LAMBDA_INITIAL = 1e-3
LAMBDA_UP = 2.0
LAMBDA_DOWN = 1.0 / 3.0
LAMBDA_RANGE = (1e-15, 1e15)
FTOL = 1e-10
GTOL = 1e-8
RANK_TOLERANCE = 1e-10
SIGNIFICANCE = 6.0  # standard errors of excess a peak region must carry


def model_fwhm(params: ModelParameters, B):
    """Forward model of the fitter"""
    return total_linewidth(params.cavity, params.transitions, B)


def jacobian(params: ModelParameters, B) -> np.ndarray:
    """d(model)/d(kappa, g_factor, gamma, g_coll per line), one row per field"""
    field = np.atleast_1d(np.asarray(B, dtype=float))
    c = MU_B_OVER_H_MHZ_PER_T

    columns = [np.ones_like(field)]
    for t in params.transitions:
        delta = detuning(params.cavity, t, field)
        denominator = delta ** 2 + t.gamma ** 2
        coupling2 = t.g_coll ** 2
        columns.append(4.0 * coupling2 * t.gamma * delta * c * field / denominator ** 2)
        columns.append(2.0 * coupling2 * (delta ** 2 - t.gamma ** 2) / denominator ** 2)
        columns.append(4.0 * t.g_coll * t.gamma / denominator)
    return np.column_stack(columns)


def _noise_level(values: np.ndarray) -> float:
    """Robust per-sample noise estimate from first differences"""
    if values.size < 3:
        return 0.0
    diffs = np.diff(values)
    mad = np.median(np.abs(diffs - np.median(diffs)))
    return float(1.4826 * mad / np.sqrt(2.0))


def _half_max_width(fields: np.ndarray, values: np.ndarray, peak: int, level: float) -> float:
    def crossing(indices):
        previous = peak
        for k in indices:
            if values[k] < level:
                fraction = (values[previous] - level) / (values[previous] - values[k])
                return fields[previous] + fraction * (fields[k] - fields[previous])
            previous = k
        return None

    left = crossing(range(peak - 1, -1, -1))
    right = crossing(range(peak + 1, fields.size))
    if left is not None and right is not None:
        return float(right - left)
    if left is not None:
        return float(2.0 * (fields[peak] - left))
    if right is not None:
        return float(2.0 * (right - fields[peak]))
    spacing = np.median(np.diff(fields)) if fields.size > 1 else 0.01 * fields[peak]
    return float(2.0 * spacing)


def _peak_regions(smoothed: np.ndarray, raw: np.ndarray, baseline: float, noise: float) -> List[tuple]:
    """
    Half-max regions of the local maxima of a smoothed sweep, tallest first.

    A maximum whose region overlaps a taller one belongs to the same line.
    With noise present a region must carry at least SIGNIFICANCE standard
    errors of excess over the baseline.
    """
    candidates, _ = find_peaks(smoothed)
    floor = 1e-9 * max(abs(baseline), 1.0)
    claimed = np.zeros(smoothed.size, dtype=bool)
    regions = []

    for k in sorted(candidates, key=lambda c: smoothed[c], reverse=True):
        height = smoothed[k] - baseline
        if height <= floor:
            break
        if claimed[k]:
            continue

        level = baseline + 0.5 * height
        below_left = np.flatnonzero(smoothed[:k] <= level)
        below_right = np.flatnonzero(smoothed[k + 1:] <= level)
        left = int(below_left[-1]) + 1 if below_left.size else 0
        right = k + int(below_right[0]) if below_right.size else smoothed.size - 1

        if claimed[left:right + 1].any():
            continue
        if noise > 0:
            count = right - left + 1
            excess = float(np.mean(raw[left:right + 1])) - baseline
            if excess * np.sqrt(count) < SIGNIFICANCE * noise:
                continue

        claimed[left:right + 1] = True
        regions.append((int(k), left, right))
    return regions


def initial_guess(sweep: FieldSweep, n_peaks: int, f_r: Optional[float] = None,
                  labels: Optional[Sequence[str]] = None) -> FitModelSpec:
    """Heuristic starting point: baseline kappa, peak positions, half-max widths and heights"""
    if n_peaks < 1:
        raise DataError(f"n_peaks must be >= 1, got {n_peaks}")
    f_r = sweep.f_r if f_r is None else f_r
    if f_r is None:
        raise DataError("Resonator frequency unknown: give f_r in the sweep header or the config")
    if labels is not None and len(labels) != n_peaks:
        raise DataError(f"Expected {n_peaks} labels, got {len(labels)}")

    fields, fwhm = sweep.fields, sweep.fwhm
    cavity_mhz = MHZ_PER_GHZ * f_r

    # heights and widths come from a wider window than detection
    window = max(3, (fwhm.size // 200) | 1)
    profile = median_filter(fwhm, size=window, mode="nearest")

    # Baseline from the lowest decile
    lowest = np.sort(profile)[:max(1, profile.size // 10)]
    kappa0 = float(np.median(lowest))

    smoothed = median_filter(fwhm, size=3, mode="nearest")
    regions = _peak_regions(smoothed, fwhm, kappa0, _noise_level(fwhm))

    if len(regions) < n_peaks:
        found = sorted(float(MT_PER_T * fields[k]) for k, _, _ in regions)
        listing = ", ".join(f"{b:.4g} mT" for b in found) or "none"
        raise PeakDetectionError(f"Found {len(found)} peak(s) ({listing}), expected {n_peaks}", found=found)

    guesses = []
    chosen = sorted(regions[:n_peaks], key=lambda region: region[0])
    for index, (_, left, right) in enumerate(chosen):
        k = left + int(np.argmax(profile[left:right + 1]))
        peak_field = float(fields[k])
        if peak_field <= 0:
            raise PeakDetectionError(f"Peak at non-positive field {peak_field} T", found=[peak_field])
        g0 = cavity_mhz / (MU_B_OVER_H_MHZ_PER_T * peak_field)
        height = max(float(profile[k]) - kappa0, 1e-12)
        width = _half_max_width(fields, profile, k, kappa0 + 0.5 * height)

        # half-width in field -> detuning via dDelta/dB = g mu_B / h
        gamma0 = max(0.5 * g0 * MU_B_OVER_H_MHZ_PER_T * width, 1e-6)
        g_coll0 = float(np.sqrt(0.5 * height * gamma0))

        label = labels[index] if labels is not None else f"peak{index + 1}"
        guesses.append(TransitionGuess(
            label=label,
            g_factor=FitParameter(value=g0, lower=1e-6),
            gamma=FitParameter(value=gamma0, lower=1e-6),
            g_coll=FitParameter(value=g_coll0, lower=0.0),
        ))
        logger.info(f"Initial guess {label}: B = {MT_PER_T * peak_field:.4g} mT, g = {g0:.4g}, "
                    f"gamma = {gamma0:.4g} MHz, g_coll = {g_coll0:.4g} MHz")

    return FitModelSpec(
        cavity=CavityParams(f_r=f_r, kappa=kappa0),
        kappa=FitParameter(value=kappa0, lower=1e-9),
        transitions=guesses,
    )


def _check_rank(J: np.ndarray, names: List[str]):
    norms = np.linalg.norm(J, axis=0)
    scale = norms.max() if norms.size else 0.0
    dead = [name for name, norm in zip(names, norms) if not norm > 1e-14 * scale]
    if dead:
        combination = " ".join(f"+1*{name}" for name in dead)
        raise RankDeficiencyError(f"Parameters {', '.join(dead)} do not affect the model", combination)

    singular, vt = np.linalg.svd(J / norms, full_matrices=False)[1:]
    if singular[-1] < RANK_TOLERANCE * singular[0]:
        direction = vt[-1] / vt[-1][np.argmax(np.abs(vt[-1]))]
        combination = " ".join(f"{coef:+.3g}*{name}" for coef, name in zip(direction, names) if abs(coef) > 0.05)
        raise RankDeficiencyError(f"Jacobian is rank deficient; unidentifiable combination: {combination}",
                                  combination)


def _parameter_floors(names: List[str]) -> np.ndarray:
    floors = []
    for name in names:
        floors.append(0.0 if name.endswith(".g_coll") else 1e-9)
    return np.array(floors, dtype=float)


def fit(sweep: FieldSweep, spec: FitModelSpec, absolute_sigma: bool = True,
        max_iterations: Optional[int] = None) -> FitResult:
    """Levenberg-Marquardt least squares of the linewidth model against a sweep"""
    cap = settings.MAX_ITERATIONS if max_iterations is None else max_iterations
    names = spec.free_names
    free = spec.free_indices

    if not names:
        raise DataError("Every parameter is fixed; nothing to fit")
    if len(sweep) < MIN_SAMPLES:
        raise InsufficientDataError(f"Fitting needs at least {MIN_SAMPLES} samples, got {len(sweep)}")
    if len(names) >= len(sweep):
        raise InsufficientDataError(f"{len(names)} free parameters need more than {len(sweep)} samples")

    fields, observed = sweep.fields, sweep.fwhm
    sigma = sweep.sigma if sweep.sigma is not None else np.full(len(sweep), DEFAULT_SIGMA)

    lower, upper = spec.free_bounds()
    lower = np.maximum(lower, _parameter_floors(names))
    x = np.clip(spec.free_values(), lower, upper)

    def evaluate(values):
        params = spec.model_parameters(values)
        residual = (model_fwhm(params, fields) - observed) / sigma
        return params, residual

    def weighted_jacobian(params):
        return jacobian(params, fields)[:, free] / sigma[:, None]

    params, r = evaluate(x)
    J = weighted_jacobian(params)
    _check_rank(J, names)

    cost = float(r @ r)
    damping = LAMBDA_INITIAL
    streak = 0
    converged = False
    iterations = 0
    logger.info(f"Fitting {len(names)} free parameters to {len(sweep)} samples (initial chi2 {cost:.6g})")

    while iterations < cap:
        iterations += 1
        gradient = J.T @ r
        small_gradient = np.max(np.abs(gradient)) < GTOL

        normal = J.T @ J
        scaling = np.diag(np.maximum(np.diag(normal), 1e-30 * max(np.diag(normal).max(), 1.0)))
        try:
            step = np.linalg.solve(normal + damping * scaling, -gradient)
        except np.linalg.LinAlgError as e:
            raise RankDeficiencyError(f"Normal equations are singular: {e}")

        trial = np.clip(x + step, lower, upper)
        trial_params, trial_r = evaluate(trial)
        trial_cost = float(trial_r @ trial_r)

        if trial_cost <= cost:
            decrease = (cost - trial_cost) / cost if cost > 0 else 0.0
            x, params, r, cost = trial, trial_params, trial_r, trial_cost
            J = weighted_jacobian(params)
            damping = max(damping * LAMBDA_DOWN, LAMBDA_RANGE[0])
            small = decrease < FTOL or np.max(np.abs(J.T @ r)) < GTOL
            streak = streak + 1 if small else 0
            logger.debug(f"iteration {iterations}: accepted, chi2 {cost:.10g}, lambda {damping:.3g}")
        else:
            damping = min(damping * LAMBDA_UP, LAMBDA_RANGE[1])
            if small_gradient:
                streak += 1
            logger.debug(f"iteration {iterations}: rejected, lambda {damping:.3g}")

        if streak >= 2:
            converged = True
            break

    _check_rank(J, names)
    covariance = np.linalg.inv(J.T @ J)
    covariance = 0.5 * (covariance + covariance.T)
    if not absolute_sigma:
        covariance = covariance * cost / (len(sweep) - len(names))

    rms = float(np.sqrt(np.mean((r * sigma) ** 2)))
    message = "converged" if converged else f"iteration cap of {cap} reached"
    fixed: Dict[str, float] = {name: p.value for name, p in spec.parameters() if not p.free}

    if converged:
        logger.info(f"Fit converged after {iterations} iterations, rms residual {rms:.4g} MHz")
    else:
        logger.info(f"Fit did not converge within {cap} iterations (rms residual {rms:.4g} MHz)")

    return FitResult(
        parameters=params,
        names=names,
        values=x.copy(),
        covariance=covariance,
        rms_residual=rms,
        iterations=iterations,
        converged=converged,
        cost=cost,
        message=message,
        fixed=fixed,
    )


def linewidths_from_s21(sweep: S21Sweep) -> FieldSweep:
    """FWHM of the transmission peak at every field of an S21 sweep"""
    fields, widths = [], []
    for rows in sweep.traces():
        fields.append(float(sweep.fields[rows.start]))
        widths.append(trace_fwhm(sweep.probe_frequencies[rows], sweep.magnitude_db[rows]))
    logger.info(f"Extracted {len(widths)} linewidths from {len(sweep)} S21 rows")

    metadata = dict(sweep.metadata)
    metadata["schema"] = "fwhm"
    return FieldSweep(fields=np.array(fields), fwhm=np.array(widths), f_r=sweep.f_r,
                      temperature=sweep.temperature, metadata=metadata)
