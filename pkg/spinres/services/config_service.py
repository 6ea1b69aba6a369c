"""
Experiment config reader.

Format: one `section.key = value [unit]` assignment per line, `#` starts a
comment. Site keys carry the site label: `sites.<label>.<key>`. Tensors are
three rows separated by ';' with one unit suffix for the whole value.
"""
import logging
import re
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

from pydantic import ValidationError

from spinres.models.config import ExperimentConfig
from spinres.utils.errors import ConfigError, StorageError
from spinres.utils.units import UnitError, parse_number, parse_numbers, parse_quantity

logger = logging.getLogger(__name__)

# key -> (kind, dimension, unit the model stores)
CAVITY_KEYS = {
    "f_r": ("quantity", "frequency", "GHz"),
    "Q": ("number", None, None),
    "kappa": ("quantity", "frequency", "MHz"),
}
SITE_KEYS = {
    "g": ("tensor", None, None),
    "A": ("tensor", "frequency", "MHz"),
    "Q": ("matrix", "frequency", "MHz"),
    "S": ("number", None, None),
    "I": ("number", None, None),
    "gamma": ("quantity", "frequency", "MHz"),
    "g_coll": ("quantity", "frequency", "MHz"),
    "subclass_axis": ("vector", None, None),
}
SWEEP_KEYS = {
    "B_start": ("quantity", "field", "T"),
    "B_stop": ("quantity", "field", "T"),
    "B_step": ("quantity", "field", "T"),
    "temperature": ("quantity", "temperature", "K"),
    "direction": ("vector", None, None),
    "misalignment": ("quantity", "angle", "deg"),
    "tilt_axis": ("vector", None, None),
    "drive_direction": ("vector", None, None),
    "ramp_rate": ("quantity", "ramp", "T/s"),
    "probe_span": ("quantity", "frequency", "MHz"),
    "probe_points": ("integer", None, None),
}
OUTPUT_KEYS = {
    "dir": ("text", None, None),
    "db_offset": ("quantity", "level", "dB"),
}
SECTIONS = {"cavity": CAVITY_KEYS, "sweep": SWEEP_KEYS, "output": OUTPUT_KEYS}
REQUIRED_SECTIONS = ("cavity", "sites")

_ASSIGNMENT = re.compile(r"^(?P<key>[^=]*?)\s*=\s*(?P<value>.*?)\s*$")
_LABEL = re.compile(r"^[A-Za-z0-9_\-]+$")


def _convert(kind: str, dimension: Optional[str], target: Optional[str], text: str) -> Any:
    if kind == "text":
        if not text:
            raise UnitError("Empty value")
        return text
    if kind == "quantity":
        return parse_quantity(text, dimension, target)
    if kind == "number":
        return parse_number(text)
    if kind == "integer":
        value = parse_number(text)
        if value != int(value):
            raise UnitError(f"'{text}' is not an integer")
        return int(value)

    rows = parse_numbers(text, dimension, target)
    if kind == "vector":
        if len(rows) != 1 or len(rows[0]) != 3:
            raise UnitError(f"Expected three components, got '{text}'")
        return tuple(rows[0])
    if len(rows) == 1 and len(rows[0]) == 1 and kind == "tensor":
        return rows[0][0]
    if len(rows) != 3 or any(len(row) != 3 for row in rows):
        raise UnitError(f"Expected 3 rows of 3 numbers separated by ';', got '{text}'")
    return tuple(tuple(row) for row in rows)


def _resolve(key: str, line: int, column: int) -> Tuple[Tuple[str, ...], tuple]:
    """Split a dotted key into its model path and value kind"""
    parts = key.split(".")
    section = parts[0]

    if section == "sites":
        if len(parts) != 3:
            raise ConfigError(f"Site keys have the form sites.<label>.<key>, got '{key}'", line, column)
        label, name = parts[1], parts[2]
        if not _LABEL.match(label):
            raise ConfigError(f"Invalid site label '{label}'", line, column)
        if name not in SITE_KEYS:
            raise ConfigError(f"Unknown key '{name}' for site '{label}'", line, column)
        return ("sites", label, name), SITE_KEYS[name]

    if section not in SECTIONS:
        raise ConfigError(f"Unknown section '{section}'", line, column)
    if len(parts) != 2:
        raise ConfigError(f"Keys in section '{section}' have the form {section}.<key>, got '{key}'", line, column)
    if parts[1] not in SECTIONS[section]:
        raise ConfigError(f"Unknown key '{parts[1]}' in section '{section}'", line, column)
    return (section, parts[1]), SECTIONS[section][parts[1]]


def _locate(loc: tuple, lines: Dict[Tuple[str, ...], int]) -> Optional[int]:
    """Line of the closest assignment to a pydantic error location"""
    path = tuple(str(part) for part in loc)
    while path:
        candidates = [line for key, line in lines.items() if key[:len(path)] == path]
        if candidates:
            return min(candidates)
        path = path[:-1]
    return None


def parse_config(text: str) -> ExperimentConfig:
    """Parse config text; every error names its line and column"""
    data: Dict[str, Any] = {}
    lines: Dict[Tuple[str, ...], int] = {}

    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0]
        if not content.strip():
            continue

        match = _ASSIGNMENT.match(content)
        indent = len(content) - len(content.lstrip())
        if match is None:
            raise ConfigError("Expected 'section.key = value'", number, indent + 1)
        key = match.group("key").strip()
        if not key:
            raise ConfigError("Missing key before '='", number, indent + 1)

        path, (kind, dimension, target) = _resolve(key, number, indent + 1)
        if path in lines:
            raise ConfigError(f"Duplicate key '{key}' (first set on line {lines[path]})", number, indent + 1)

        try:
            value = _convert(kind, dimension, target, match.group("value"))
        except UnitError as e:
            raise ConfigError(f"{key}: {e}", number, match.start("value") + 1)

        node = data
        for part in path[:-1]:
            node = node.setdefault(part, {})
        node[path[-1]] = value
        lines[path] = number

    for section in REQUIRED_SECTIONS:
        if section not in data:
            raise ConfigError(f"Missing section '{section}'")

    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise _config_error(e, (), lines)
    try:
        config.cavity.params()
    except ValidationError as e:
        raise _config_error(e, ("cavity",), lines)
    for label, site in config.sites.items():
        try:
            site.spin_system()
        except ValidationError as e:
            raise _config_error(e, ("sites", label), lines)

    logger.info(f"Parsed config with {len(config.sites)} site(s)")
    return config


def _config_error(e: ValidationError, prefix: Tuple[str, ...], lines: Dict[Tuple[str, ...], int]) -> ConfigError:
    error = e.errors()[0]
    loc = prefix + tuple(str(part) for part in error.get("loc", ()))
    where = ".".join(loc)
    message = error.get("msg", str(e))
    return ConfigError(f"{where}: {message}" if where else message, _locate(loc, lines))


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read and parse a config file"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        logger.debug(f"Cannot read config {path}: {e}")
        raise StorageError(f"Cannot read config {path}: {e.strerror or e}")
    logger.debug(f"Loaded config {path}")
    return parse_config(text)
