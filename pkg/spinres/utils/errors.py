"""
Error hierarchy shared by services and the command line.

Each error carries the process exit code and a short machine-readable code
that prefixes the single-line diagnostic printed by the CLI.
"""
from typing import List, Optional


class SpinresError(Exception):
    exit_code = 1
    code = "ERROR"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message

    def diagnostic(self) -> str:
        """Single-line `CODE: message` form"""
        text = " ".join(str(self.message).split())
        return f"{self.code}: {text}"


class ConfigError(SpinresError):
    exit_code = 2
    code = "CONFIG"

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        if line is not None:
            location = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{location}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


class DataError(SpinresError):
    exit_code = 3
    code = "DATA"


class InvalidSpinError(DataError):
    pass


class CapacityError(DataError):
    pass


class HermiticityError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


class SchemaError(DataError):
    code = "SCHEMA"


class PeakDetectionError(DataError):
    code = "PEAKS"

    def __init__(self, message: str, found: Optional[List[float]] = None):
        super().__init__(message)
        self.found = list(found or [])


class RankDeficiencyError(DataError):
    code = "RANK"

    def __init__(self, message: str, combination: str = ""):
        super().__init__(message)
        self.combination = combination


class FitNotConvergedError(SpinresError):
    exit_code = 4
    code = "FIT"


class StorageError(SpinresError):
    exit_code = 5
    code = "IO"
