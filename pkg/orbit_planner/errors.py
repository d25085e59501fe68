"""
Exception hierarchy shared by every layer of the planner.

Each family carries the process exit code the command line reports for it:
1 for usage/config problems, 2 for bad input data, 3 for training failures.
"""

from typing import Any, Dict, Optional


class OrbitPlannerError(Exception):
    """Base exception for the planner"""

    exit_code: int = 1
    kind: str = "error"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.details = details or {}
        super().__init__(self.message)


class ConfigError(OrbitPlannerError):
    """Invalid mission/trainer configuration or command usage"""

    exit_code = 1
    kind = "config"


class UsageError(ConfigError):
    kind = "usage"


class DataError(OrbitPlannerError):
    """Bad or unusable input data (catalogs, checkpoints)"""

    exit_code = 2
    kind = "data"


class TrainingError(OrbitPlannerError):
    """Numerical failure during training"""

    exit_code = 3
    kind = "training"


# TLE parsing


class TleError(DataError):
    """Base class for per-record TLE errors"""

    kind = "tle"


class ChecksumMismatch(TleError):
    def __init__(self, line_number: int, expected: int, computed: int):
        self.line_number = line_number
        self.expected = expected
        self.computed = computed
        super().__init__(
            f"line {line_number} checksum mismatch: stored {expected}, computed {computed}",
            details={"line": line_number, "expected": expected, "computed": computed},
        )


class MalformedField(TleError):
    def __init__(self, field: str, columns: str, content: str):
        self.field = field
        self.columns = columns
        self.content = content
        super().__init__(
            f"malformed {field} in columns {columns}: {content!r}",
            details={"field": field, "columns": columns, "content": content},
        )


class LineIdentifierError(TleError):
    def __init__(self, line_number: int, content: str):
        self.line_number = line_number
        self.content = content
        super().__init__(
            f"line {line_number} must start with '{line_number}', got {content[:1]!r}",
            details={"line": line_number},
        )


class NonPositiveMeanMotion(OrbitPlannerError, ValueError):
    exit_code = 2
    kind = "data"

    def __init__(self, mean_motion: float):
        self.mean_motion = mean_motion
        super().__init__(f"mean motion must be positive, got {mean_motion}")


# Catalog fetching


class CatalogFetchError(DataError):
    """Base class for catalog download failures"""

    kind = "fetch"

    def __init__(self, message: str, url: str, status_code: Optional[int] = None):
        self.url = url
        self.status_code = status_code
        super().__init__(message, details={"url": url, "status_code": status_code})


class NetworkError(CatalogFetchError):
    pass


class CatalogTimeout(CatalogFetchError):
    pass


class NonSuccessStatus(CatalogFetchError):
    def __init__(self, url: str, status_code: int):
        super().__init__(f"catalog request returned HTTP {status_code}", url, status_code)


# Environment / learning


class StepBeforeReset(OrbitPlannerError, RuntimeError):
    def __init__(self):
        super().__init__("step() called before reset()")


class RolloutShapeError(OrbitPlannerError, ValueError):
    pass


class NonFiniteActivation(TrainingError):
    pass


class NonFiniteLoss(TrainingError):
    pass


class CheckpointMismatch(DataError):
    kind = "checkpoint"


class IOFailure(DataError):
    """A file or directory could not be read or written"""

    kind = "io"

    @classmethod
    def from_os_error(cls, exc: OSError) -> "IOFailure":
        target = exc.filename if exc.filename is not None else "?"
        return cls(f"{exc.strerror or exc}: {target}", details={"errno": exc.errno, "path": target})
