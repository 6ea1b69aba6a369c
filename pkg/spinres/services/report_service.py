"""
Plain-text reports: fit results, transition tables and polarization tables.
"""
from typing import List, Optional, Sequence, Tuple

from spinres.models.cavity import EnsembleTransition
from spinres.models.fitting import FitResult
from spinres.models.spin import TransitionTable
from spinres.utils.constants import MT_PER_T


def format_fit_report(result: FitResult, source: Optional[str] = None) -> str:
    """One `name = value ± sigma` line per parameter, then converged/rms_residual/iterations"""
    lines = []
    if source:
        lines.append(f"# source={source}")
    uncertainties = result.uncertainties
    names = ["kappa"] + [f"{t.label}.{attr}" for t in result.parameters.transitions
                         for attr in ("g_factor", "gamma", "g_coll")]
    for name in names:
        value = result.value_of(name)
        if name in uncertainties:
            lines.append(f"{name} = {value:.10g} ± {uncertainties[name]:.3g}")
        else:
            lines.append(f"{name} = {value:.10g} (fixed)")
    lines.append(f"converged = {'true' if result.converged else 'false'}")
    lines.append(f"rms_residual = {result.rms_residual:.6g}")
    lines.append(f"iterations = {result.iterations}")
    return "\n".join(lines) + "\n"


def format_transition_table(label: str, table: TransitionTable, g_eff: float, field: float) -> List[str]:
    lines = [f"[{label}] |B| = {field * MT_PER_T:.6g} mT, g_eff = {g_eff:.6g}",
             f"{'i':>3} {'j':>3} {'frequency_MHz':>16} {'strength':>12}"]
    for t in table:
        lines.append(f"{t.level_i:>3} {t.level_j:>3} {t.frequency:>16.6f} {t.dipole_strength:>12.6g}")
    return lines


def format_resonances(resonances: Sequence[Tuple[str, Sequence[float]]], f_r: float) -> List[str]:
    lines = [f"resonance fields at f_r = {f_r:.6g} GHz:"]
    for label, fields in resonances:
        listing = ", ".join(f"{b * MT_PER_T:.4g} mT" for b in fields) or "none in range"
        lines.append(f"  {label}: {listing}")
    return lines


def format_coupling(lines_: Sequence[EnsembleTransition], kappa: float,
                    cooperativities: Sequence[float], strong: Sequence[bool]) -> List[str]:
    lines = [f"coupling (kappa = {kappa:.6g} MHz):"]
    for t, c, s in zip(lines_, cooperativities, strong):
        regime = "strong" if s else "weak"
        lines.append(f"  {t.label}: g = {t.g_factor:.6g}, gamma = {t.gamma:.6g} MHz, "
                     f"g_coll = {t.g_coll:.6g} MHz, C = {c:.4g}, {regime}")
    return lines


def format_polarization_table(temperatures: Sequence[float], polarizations: Sequence[float],
                              couplings: Optional[Sequence[float]] = None) -> str:
    header = "T_K,polarization" + (",g_coll_MHz" if couplings is not None else "")
    rows = [header]
    for k, (T, p) in enumerate(zip(temperatures, polarizations)):
        row = f"{T!r},{p:.6f}"
        if couplings is not None:
            row += f",{couplings[k]:.6f}"
        rows.append(row)
    return "\n".join(rows) + "\n"
