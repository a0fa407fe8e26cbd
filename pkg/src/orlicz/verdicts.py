"""Three-valued analysis verdicts carrying certificates and witnesses."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional


class Status(Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class Verdict:
    """Result of a decidable-or-not analysis.

    ``certificate`` explains why the verdict holds; ``witness`` identifies the
    offending atom (or value) when the verdict is FAILS.
    """

    status: Status
    certificate: str = ""
    witness: Optional[Any] = None

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def fails(self) -> bool:
        return self.status is Status.FAILS

    @property
    def inconclusive(self) -> bool:
        return self.status is Status.INCONCLUSIVE

    def to_dict(self) -> dict:
        d: dict = {"status": self.status.value, "certificate": self.certificate}
        if self.witness is not None:
            d["witness"] = self.witness
        return d


class ConsistencyError(AssertionError):
    """Two independently computed facets that must agree came out different."""


class PreconditionError(ValueError):
    """An operation was invoked outside its stated preconditions."""
