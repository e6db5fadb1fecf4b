"""Outcome records shared by the certification and membership tests."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Optional


class CertificateStatus(str, enum.Enum):
    CERTIFIED_AT_RESOLUTION = "certified_at_resolution"
    FALSIFIED = "falsified"
    #: the test's standing assumption failed (e.g. an unbounded profile)
    NOT_APPLICABLE = "not_applicable"


@dataclass(frozen=True)
class Certificate:
    """Result of a dent-falsification or membership test.

    ``params`` records the resolution the verdict holds at (dent depth,
    probe count, tolerance, direction count). A ``FALSIFIED`` certificate
    names in ``witness`` the single dent or direction that reproduces it.
    """

    status: CertificateStatus
    witness: Optional[dict] = None
    params: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return self.status is CertificateStatus.CERTIFIED_AT_RESOLUTION

    @property
    def falsified(self) -> bool:
        return self.status is CertificateStatus.FALSIFIED

    def to_dict(self) -> dict:
        return {"status": self.status.value, "witness": self.witness, "params": dict(self.params)}


@dataclass(frozen=True)
class Check:
    """Boolean test result with an optional witness; truthy iff ``ok``."""

    ok: bool
    witness: Any = None
    info: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return bool(self.ok)

    def to_dict(self) -> dict:
        return {"ok": bool(self.ok), "witness": self.witness, "info": dict(self.info)}
