"""
Minimal SVG line plots (axes, ticks, polylines, markers) written directly as
markup, plus an optional gnuplot script for the same data.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from spinres.utils.errors import StorageError

logger = logging.getLogger(__name__)

NS_SVG = "http://www.w3.org/2000/svg"
WIDTH, HEIGHT = 640, 420
MARGIN = (72, 24, 24, 56)  # left, right, top, bottom
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
FONT = "font-family=\"sans-serif\" font-size=\"12\""


def rounder(x: float) -> str:
    text = f"{x:.2f}".rstrip("0").rstrip(".")
    return "0" if text == "-0" else text


def props_repr(props: Dict[str, object]) -> str:
    return " ".join(f'{k.replace("_", "-")}="{v}"' for k, v in props.items())


def escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


@dataclass
class Series:
    x: Sequence[float]
    y: Sequence[float]
    label: str = ""
    markers: bool = False
    color: Optional[str] = None


def nice_ticks(lo: float, hi: float, target: int = 6) -> List[float]:
    """Ticks at 1, 2 or 5 times a power of ten covering [lo, hi]"""
    span = hi - lo
    raw = span / max(target - 1, 1)
    magnitude = 10.0 ** math.floor(math.log10(raw))
    step = next(m * magnitude for m in (1.0, 2.0, 5.0, 10.0) if m * magnitude >= raw)
    first = math.ceil(lo / step - 1e-9) * step
    ticks = []
    value = first
    while value <= hi + 1e-9 * step:
        ticks.append(0.0 if abs(value) < 1e-12 * step else value)
        value += step
    return ticks


def _limits(values: np.ndarray) -> Tuple[float, float]:
    lo, hi = float(np.min(values)), float(np.max(values))
    if hi - lo <= 1e-12 * max(abs(lo), abs(hi), 1.0):
        pad = 0.05 * abs(lo) if lo != 0 else 0.5
        return lo - pad, hi + pad
    return lo, hi


def _tick_label(value: float, step: float) -> str:
    digits = max(0, -int(math.floor(math.log10(step)))) if step > 0 else 0
    return f"{value:.{digits}f}"


@dataclass
class LinePlot:
    x_label: str
    y_label: str
    title: str = ""
    series: List[Series] = field(default_factory=list)

    def add(self, x, y, label: str = "", markers: bool = False) -> "LinePlot":
        self.series.append(Series(list(x), list(y), label, markers))
        return self

    def svg(self) -> str:
        if not self.series:
            raise ValueError("Nothing to plot")
        xs = np.concatenate([np.asarray(s.x, dtype=float) for s in self.series])
        ys = np.concatenate([np.asarray(s.y, dtype=float) for s in self.series])
        x_lo, x_hi = _limits(xs)
        y_lo, y_hi = _limits(ys)

        left, right, top, bottom = MARGIN
        plot_w, plot_h = WIDTH - left - right, HEIGHT - top - bottom

        def px(x):
            return left + (x - x_lo) / (x_hi - x_lo) * plot_w

        def py(y):
            return top + (y_hi - y) / (y_hi - y_lo) * plot_h

        parts = [
            f'<svg xmlns="{NS_SVG}" {props_repr({"width": WIDTH, "height": HEIGHT, "viewBox": f"0 0 {WIDTH} {HEIGHT}"})}>',
            f'<rect {props_repr({"x": left, "y": top, "width": plot_w, "height": plot_h, "fill": "none", "stroke": "black"})}/>',
        ]

        x_ticks = nice_ticks(x_lo, x_hi)
        x_step = x_ticks[1] - x_ticks[0] if len(x_ticks) > 1 else 1.0
        for t in x_ticks:
            x = rounder(px(t))
            parts.append(f'<line {props_repr({"x1": x, "y1": top + plot_h, "x2": x, "y2": top + plot_h + 5, "stroke": "black"})}/>')
            parts.append(f'<text {props_repr({"x": x, "y": top + plot_h + 20, "text_anchor": "middle"})} {FONT}>'
                         f'{_tick_label(t, x_step)}</text>')

        y_ticks = nice_ticks(y_lo, y_hi)
        y_step = y_ticks[1] - y_ticks[0] if len(y_ticks) > 1 else 1.0
        for t in y_ticks:
            y = rounder(py(t))
            parts.append(f'<line {props_repr({"x1": left - 5, "y1": y, "x2": left, "y2": y, "stroke": "black"})}/>')
            parts.append(f'<text {props_repr({"x": left - 8, "y": y, "text_anchor": "end", "dominant_baseline": "middle"})} {FONT}>'
                         f'{_tick_label(t, y_step)}</text>')

        parts.append(f'<text {props_repr({"x": rounder(left + plot_w / 2), "y": HEIGHT - 12, "text_anchor": "middle"})} {FONT}>'
                     f'{escape(self.x_label)}</text>')
        parts.append(f'<text {props_repr({"x": 18, "y": rounder(top + plot_h / 2), "text_anchor": "middle", "transform": f"rotate(-90 18 {rounder(top + plot_h / 2)})"})} {FONT}>'
                     f'{escape(self.y_label)}</text>')
        if self.title:
            parts.append(f'<text {props_repr({"x": rounder(left + plot_w / 2), "y": 16, "text_anchor": "middle"})} {FONT}>'
                         f'{escape(self.title)}</text>')

        for index, s in enumerate(self.series):
            color = s.color or PALETTE[index % len(PALETTE)]
            points = [(rounder(px(x)), rounder(py(y))) for x, y in zip(s.x, s.y)]
            if s.markers or len(points) == 1:
                for x, y in points:
                    parts.append(f'<circle {props_repr({"cx": x, "cy": y, "r": 2, "fill": color})}/>')
            else:
                coords = " ".join(f"{x},{y}" for x, y in points)
                parts.append(f'<polyline {props_repr({"points": coords, "fill": "none", "stroke": color, "stroke_width": 1.5})}/>')
            if s.label:
                legend_y = top + 16 + 16 * index
                parts.append(f'<text {props_repr({"x": left + plot_w - 8, "y": legend_y, "text_anchor": "end", "fill": color})} {FONT}>'
                             f'{escape(s.label)}</text>')

        parts.append("</svg>")
        return "\n".join(parts) + "\n"


def gnuplot_script(data_file: str, x_label: str, y_label: str, columns: Sequence[Tuple[str, str]],
                   output: str, curves: Sequence[Tuple[str, str, str]] = ()) -> str:
    """
    Script plotting `using` expressions from a comma-separated data file into an SVG.

    curves are extra (file, using, title) triples read from other files.
    """
    sources = [(data_file, using, title) for using, title in columns] + list(curves)
    plots = ", \\\n     ".join(f"'{source}' using {using} with lines title '{title}'"
                               for source, using, title in sources)
    return (
        "set datafile separator ','\n"
        "set datafile commentschars '#'\n"
        f"set terminal svg size {WIDTH},{HEIGHT}\n"
        f"set output '{output}'\n"
        f"set xlabel '{x_label}'\n"
        f"set ylabel '{y_label}'\n"
        f"plot {plots}\n"
    )


def write_text(path: Union[str, Path], content: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(content, encoding="utf-8")
    except OSError as e:
        logger.debug(f"Cannot write {path}: {e}")
        raise StorageError(f"Cannot write {path}: {e.strerror or e}")
    logger.info(f"Wrote {path}")
    return path
