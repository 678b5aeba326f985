"""Memory budget guard for dense operator work.

Every dense assembly and diagonalization routes through this module so the
single knob ERGOSCOPE_BUDGET_BYTES (default 2 GiB) is the only scale guard.
"""

import os

DEFAULT_BUDGET_BYTES = 2 * 1024**3
_ENV_VAR = "ERGOSCOPE_BUDGET_BYTES"

COMPLEX_BYTES = 16


class BudgetError(MemoryError):
    """Requested dense object would exceed the configured memory budget."""


def budget_bytes() -> int:
    raw = os.environ.get(_ENV_VAR)
    if raw is None:
        return DEFAULT_BUDGET_BYTES
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{_ENV_VAR} must be an integer, got {raw!r}") from exc
    if value <= 0:
        raise ValueError(f"{_ENV_VAR} must be positive, got {value}")
    return value


def check_matrix(dim: int, what: str = "dense operator") -> None:
    """Fail if a dim x dim complex matrix would not fit in the budget."""
    need = dim * dim * COMPLEX_BYTES
    limit = budget_bytes()
    if need > limit:
        raise BudgetError(
            f"{what}: {dim}x{dim} needs {need} bytes, budget is {limit} "
            f"(override with {_ENV_VAR})"
        )


def check_vector(dim: int, what: str = "state vector") -> None:
    need = dim * COMPLEX_BYTES
    limit = budget_bytes()
    if need > limit:
        raise BudgetError(
            f"{what}: length {dim} needs {need} bytes, budget is {limit} "
            f"(override with {_ENV_VAR})"
        )
