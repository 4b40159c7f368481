from typing import Any, Dict, Optional, Sequence

# Exit codes shared by the command line front end
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class QuadScreenError(Exception):
    """Base error. Carries an exit code and a ``detail`` dict with a stable
    machine-readable ``code`` and a human ``message``."""

    exit_code = EXIT_DATA

    def __init__(self, code: str, message: str, **extra: Any):
        self.detail: Dict[str, Any] = {"code": code, "message": message, **extra}
        super().__init__(message)

    @property
    def code(self) -> str:
        return self.detail["code"]

    def __str__(self) -> str:
        extras = ", ".join(
            f"{k}={v}" for k, v in self.detail.items() if k not in ("code", "message")
        )
        base = f"[{self.code}] {self.detail['message']}"
        return f"{base} ({extras})" if extras else base


class UsageError(QuadScreenError):
    exit_code = EXIT_USAGE


class ModelError(QuadScreenError):
    """Invalid polynomial, alphabet, pmf or model parameter."""


class DataFormatError(QuadScreenError):
    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        line: Optional[int] = None,
        code: str = "MALFORMED_INPUT",
        **extra: Any,
    ):
        super().__init__(code, message, path=path, line=line, **extra)

    @property
    def line(self) -> Optional[int]:
        return self.detail.get("line")


class EnumerationBudgetError(QuadScreenError):
    def __init__(self, num_assignments: int, budget: int):
        super().__init__(
            "ENUMERATION_BUDGET",
            f"exact enumeration needs {num_assignments} assignments, budget is {budget}",
            num_assignments=num_assignments,
            budget=budget,
        )


class HypothesisViolation(QuadScreenError):
    """A theory precondition does not hold for the given model."""

    def __init__(self, message: str, signs: Optional[Sequence[int]] = None, **extra: Any):
        super().__init__(
            "HYPOTHESIS_VIOLATED",
            message,
            signs=list(signs) if signs is not None else None,
            **extra,
        )


class NumericWarning(QuadScreenError):
    """Soft numeric condition escalated by ``--strict``."""

    exit_code = EXIT_NUMERIC
