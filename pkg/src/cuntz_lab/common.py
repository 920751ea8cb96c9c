"""Small shared value types: three-valued decisions and check reports."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any


class Decision(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNDECIDED = "undecided"

    @classmethod
    def of(cls, flag):
        return cls.TRUE if flag else cls.FALSE

    def __bool__(self):
        return self is Decision.TRUE

    def __and__(self, other):
        if self is Decision.FALSE or other is Decision.FALSE:
            return Decision.FALSE
        if self is Decision.UNDECIDED or other is Decision.UNDECIDED:
            return Decision.UNDECIDED
        return Decision.TRUE

    def __or__(self, other):
        if self is Decision.TRUE or other is Decision.TRUE:
            return Decision.TRUE
        if self is Decision.UNDECIDED or other is Decision.UNDECIDED:
            return Decision.UNDECIDED
        return Decision.FALSE

    def __invert__(self):
        if self is Decision.UNDECIDED:
            return self
        return Decision.of(self is Decision.FALSE)


def all_of(decisions):
    out = Decision.TRUE
    for d in decisions:
        out = out & d
        if out is Decision.FALSE:
            return out
    return out


def any_of(decisions):
    out = Decision.FALSE
    for d in decisions:
        out = out | d
        if out is Decision.TRUE:
            return out
    return out


@dataclass
class Check:
    """Outcome of a verification: pass, fail with a witness, or undecided."""

    status: Decision
    failed_at: str | None = None
    witness: Any = None
    notes: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.status is Decision.TRUE

    def __bool__(self):
        return self.passed

    @classmethod
    def ok(cls, **notes):
        return cls(Decision.TRUE, notes=notes)

    @classmethod
    def fail(cls, where, witness=None, **notes):
        return cls(Decision.FALSE, where, witness, notes)

    @classmethod
    def undecided(cls, where, witness=None, **notes):
        return cls(Decision.UNDECIDED, where, witness, notes)
