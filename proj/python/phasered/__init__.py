"""Phase reduction of limit-cycle oscillators."""

from ._core import *  # noqa: F401,F403
from ._core import (
    ConvergenceError,
    Error,
    InvalidArgument,
    make_model,
    find_limit_cycle,
)

__all__ = [
    "ConvergenceError",
    "Error",
    "InvalidArgument",
    "make_model",
    "find_limit_cycle",
]
