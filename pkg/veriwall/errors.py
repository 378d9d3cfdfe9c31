from __future__ import annotations

from dataclasses import dataclass


class VeriwallError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1


class InputError(VeriwallError, ValueError):
    """Malformed input or a violated precondition."""

    exit_code = 2


class CapacityError(VeriwallError):
    """A desk-scale budget was exceeded; carries the offending size."""

    exit_code = 3

    def __init__(self, message: str, size: int = 0) -> None:
        super().__init__(message)
        self.size = size


class ContractError(VeriwallError, AssertionError):
    """An internal post-condition did not hold."""

    exit_code = 1


class VerificationFailure(VeriwallError):
    exit_code = 1


@dataclass(frozen=True)
class Check:
    """Outcome of a validator. Truthy iff the checked object is valid."""

    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def require(self) -> None:
        if not self.ok:
            raise ContractError(self.reason)


PASS = Check(True)


def fail(reason: str) -> Check:
    return Check(False, reason)


def require_input(cond: bool, message: str) -> None:
    if not cond:
        raise InputError(message)
