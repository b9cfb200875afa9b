"""Structured results shared by the protocol runners and the CLI."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Any


@dataclass
class Claim:
    """A numerical statement checked against a tolerance."""

    name: str
    value: float
    bound: float
    relation: str = "<="
    passed: bool = field(init=False)

    def __post_init__(self):
        v, b = float(self.value), float(self.bound)
        ops = {"<=": v <= b, ">=": v >= b, "==": v == b}
        if self.relation not in ops:
            raise ValueError(f"unknown relation {self.relation!r}")
        self.value, self.bound = v, b
        self.passed = bool(ops[self.relation])


@dataclass
class ProtocolReport:
    protocol: str
    seed: int | None
    trials: int
    outcomes: list = field(default_factory=list)
    result: dict = field(default_factory=dict)
    oracle_calls: int = 0
    probabilities: dict = field(default_factory=dict)
    claims: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    def add_claim(self, name: str, value: float, bound: float, relation: str = "<=") -> Claim:
        c = Claim(name, value, bound, relation)
        self.claims.append(c)
        return c

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.claims)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)
