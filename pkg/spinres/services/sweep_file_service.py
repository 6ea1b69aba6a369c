"""
Sweep CSV files.

Layout:

    # schema=fwhm            (or s21)
    # field_unit=T           (T or mT)
    # f_r=4.4 GHz            optional
    # temperature=0.07 K     optional
    # <key>=<value>          any further metadata, kept verbatim
    0.0375,7.746,1.0         B,fwhm[,sigma]  or  B,f,mag_dB,phase_rad

Numbers are written as the shortest decimal that reads back to the same
double, so write -> read -> write reproduces the file byte for byte.
"""
import io
import logging
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from spinres.models.cavity import ThermalPoint
from spinres.models.sweep import FieldSweep, S21Sweep, SweepSchema
from spinres.utils.errors import DataError, SchemaError, StorageError
from spinres.utils.units import UnitError, convert, parse_quantity

logger = logging.getLogger(__name__)

Sweep = Union[FieldSweep, S21Sweep]

COLUMNS = {
    SweepSchema.FWHM: ("B", "fwhm", "sigma"),
    SweepSchema.S21: ("B", "f", "mag_dB", "phase_rad"),
}
# header keys rebuilt from the sweep attributes on write
RESERVED_KEYS = ("schema", "field_unit", "f_r", "temperature")


def format_number(value: float) -> str:
    return repr(float(value))


def _split_header(text: str) -> Tuple[Dict[str, str], str]:
    metadata: Dict[str, str] = {}
    lines = text.splitlines(keepends=True)
    index = 0
    while index < len(lines) and lines[index].lstrip().startswith("#"):
        entry = lines[index].lstrip()[1:].strip()
        if "=" in entry:
            key, value = entry.split("=", 1)
            metadata[key.strip()] = value.strip()
        index += 1
    return metadata, "".join(lines[index:])


def _to_float(text: str) -> float:
    try:
        return float(text)
    except (TypeError, ValueError):
        return np.nan


def _read_rows(body: str, width: Tuple[int, ...]) -> np.ndarray:
    try:
        frame = pd.read_csv(io.StringIO(body), header=None, comment="#", dtype=str,
                            skip_blank_lines=True, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise DataError("Sweep file has no data rows")
    except pd.errors.ParserError as e:
        raise DataError(f"Malformed sweep rows: {e}")

    if frame.shape[1] not in width:
        expected = " or ".join(str(w) for w in width)
        raise SchemaError(f"Expected {expected} columns per row, found {frame.shape[1]}")

    values = frame.map(_to_float)
    array = values.to_numpy(dtype=float, na_value=np.nan)
    bad = ~np.isfinite(array)
    if bad.any():
        row, col = np.argwhere(bad)[0]
        raise DataError(f"Row {row + 1}, column {col + 1}: '{frame.iat[row, col]}' is not a finite number")
    return array


def parse_sweep(text: str) -> Sweep:
    """Parse sweep file content into a FieldSweep or S21Sweep according to its schema"""
    metadata, body = _split_header(text)

    if "schema" not in metadata:
        raise SchemaError("Sweep header does not declare schema=fwhm or schema=s21")
    try:
        schema = SweepSchema(metadata["schema"])
    except ValueError:
        raise SchemaError(f"Unknown schema '{metadata['schema']}' (expected fwhm or s21)")

    field_unit = metadata.get("field_unit", "T")
    try:
        f_r = parse_quantity(metadata["f_r"], "frequency", "GHz") if "f_r" in metadata else None
        temperature = parse_quantity(metadata["temperature"], "temperature", "K") \
            if "temperature" in metadata else None
        convert(1.0, field_unit, "field", "T")
    except UnitError as e:
        raise DataError(f"Sweep header: {e}")
    for key, value in (("f_r", f_r), ("temperature", temperature)):
        if value is not None and not (np.isfinite(value) and value > 0):
            raise DataError(f"Sweep header: {key} must be positive, got '{metadata[key]}'")

    extra = {k: v for k, v in metadata.items() if k not in RESERVED_KEYS}

    if schema == SweepSchema.FWHM:
        rows = _read_rows(body, (2, 3))
        fields = np.array([convert(b, field_unit, "field", "T") for b in rows[:, 0]])
        sweep = FieldSweep(fields=fields, fwhm=rows[:, 1], sigma=rows[:, 2] if rows.shape[1] == 3 else None,
                           f_r=f_r, temperature=temperature, metadata=extra)
    else:
        rows = _read_rows(body, (4,))
        fields = np.array([convert(b, field_unit, "field", "T") for b in rows[:, 0]])
        sweep = S21Sweep(fields=fields, probe_frequencies=rows[:, 1], magnitude_db=rows[:, 2],
                         phase=rows[:, 3], f_r=f_r, temperature=temperature, metadata=extra)

    logger.debug(f"Parsed {schema.value} sweep with {len(sweep)} rows")
    return sweep


def schema_of(sweep: Sweep) -> SweepSchema:
    return SweepSchema.FWHM if isinstance(sweep, FieldSweep) else SweepSchema.S21


def format_sweep(sweep: Sweep) -> str:
    """File content for a sweep; fields are always written in Tesla"""
    schema = schema_of(sweep)
    header: List[str] = [f"schema={schema.value}", "field_unit=T"]
    if sweep.f_r is not None:
        header.append(f"f_r={format_number(sweep.f_r)} GHz")
    if sweep.temperature is not None:
        header.append(f"temperature={format_number(sweep.temperature)} K")
    header.extend(f"{k}={v}" for k, v in sweep.metadata.items() if k not in RESERVED_KEYS)

    if schema == SweepSchema.FWHM:
        columns = [sweep.fields, sweep.fwhm] + ([sweep.sigma] if sweep.sigma is not None else [])
    else:
        columns = [sweep.fields, sweep.probe_frequencies, sweep.magnitude_db, sweep.phase]

    frame = pd.DataFrame({name: column for name, column in zip(COLUMNS[schema], columns)})
    body = frame.map(format_number).to_csv(header=False, index=False, lineterminator="\n")
    return "".join(f"# {line}\n" for line in header) + body


def read_sweep(path: Union[str, Path]) -> Sweep:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        logger.debug(f"Cannot read sweep {path}: {e}")
        raise StorageError(f"Cannot read sweep {path}: {e.strerror or e}")
    try:
        return parse_sweep(text)
    except DataError as e:
        e.message = f"{path.name}: {e.message}"
        raise


def write_sweep(sweep: Sweep, path: Union[str, Path]) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(format_sweep(sweep), encoding="utf-8")
    except OSError as e:
        logger.debug(f"Cannot write sweep {path}: {e}")
        raise StorageError(f"Cannot write sweep {path}: {e.strerror or e}")
    logger.info(f"Wrote {len(sweep)} rows to {path}")
    return path


def read_thermal_points(path: Union[str, Path]) -> List[ThermalPoint]:
    """Rows of `T_K,g_coll_MHz`; '#' lines are comments"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        logger.debug(f"Cannot read thermal points {path}: {e}")
        raise StorageError(f"Cannot read thermal points {path}: {e.strerror or e}")

    _, body = _split_header(text)
    rows = _read_rows(body, (2,))
    try:
        points = [ThermalPoint(temperature=T, g_coll_measured=g) for T, g in rows]
    except ValidationError as e:
        error = e.errors()[0]
        raise DataError(f"{path.name}: {'.'.join(str(p) for p in error['loc'])}: {error['msg']}")
    logger.debug(f"Read {len(points)} thermal points from {path}")
    return points
