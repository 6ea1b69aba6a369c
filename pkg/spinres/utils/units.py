"""
Unit suffix handling for config values and sweep headers.

Each dimension has a set of accepted suffixes with factors relative to a
common reference; values are returned in the unit the caller asks for.
"""
import math
import re
from typing import Dict, List, Optional, Tuple

from scipy import constants

UNITS: Dict[str, Dict[str, float]] = {
    "field": {"T": 1.0, "mT": constants.milli, "uT": constants.micro},
    "frequency": {"GHz": constants.giga, "MHz": constants.mega, "kHz": constants.kilo, "Hz": 1.0},
    "temperature": {"K": 1.0, "mK": constants.milli},
    "angle": {"deg": 1.0, "rad": 180.0 / math.pi},
    "level": {"dB": 1.0},
    "ramp": {"T/s": 1.0, "mT/s": constants.milli},
}

_TRAILING_UNIT = re.compile(r"^(?P<body>.*?)\s*(?P<unit>[A-Za-z][A-Za-z/]*)\s*$")


class UnitError(ValueError):
    pass


def _number(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise UnitError(f"'{text}' is not a number")
    if not math.isfinite(value):
        raise UnitError(f"'{text}' is not finite")
    return value


def convert(value: float, unit: str, dimension: str, target: str) -> float:
    table = UNITS[dimension]
    if unit not in table:
        raise UnitError(f"Unknown {dimension} unit '{unit}' (expected one of {', '.join(table)})")
    if unit == target:
        return value
    return value * table[unit] / table[target]


def split_unit(text: str) -> Tuple[str, Optional[str]]:
    """Separate a trailing unit suffix from a value expression"""
    match = _TRAILING_UNIT.match(text)
    if match and match.group("body").strip():
        return match.group("body").strip(), match.group("unit")
    return text.strip(), None


def parse_quantity(text: str, dimension: str, target: str) -> float:
    """'4.4 GHz' -> value in target unit; the suffix is mandatory"""
    body, unit = split_unit(text)
    if unit is None:
        raise UnitError(f"Missing {dimension} unit in '{text.strip()}' (expected one of {', '.join(UNITS[dimension])})")
    return convert(_number(body), unit, dimension, target)


def parse_number(text: str) -> float:
    """Dimensionless value; a unit suffix is an error"""
    body, unit = split_unit(text)
    if unit is not None:
        raise UnitError(f"Unexpected unit '{unit}' on a dimensionless value")
    return _number(body)


def parse_numbers(text: str, dimension: Optional[str] = None, target: Optional[str] = None) -> List[List[float]]:
    """Rows of whitespace-separated numbers separated by ';', with an optional shared unit"""
    body, unit = split_unit(text)
    if dimension is None and unit is not None:
        raise UnitError(f"Unexpected unit '{unit}' on a dimensionless value")
    if dimension is not None and unit is None:
        raise UnitError(f"Missing {dimension} unit in '{text.strip()}'")

    rows = []
    for chunk in body.split(";"):
        row = [_number(token) for token in chunk.split()]
        if not row:
            raise UnitError(f"Empty row in '{text.strip()}'")
        if dimension is not None:
            row = [convert(v, unit, dimension, target) for v in row]
        rows.append(row)
    return rows
