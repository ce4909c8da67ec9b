"""Call/token budget with reserve-commit accounting.

Spend never exceeds the configured maxima at any instant: headroom is
reserved before a backend is contacted and the reservation is settled to
actual usage afterwards. An invocation whose actual usage would overshoot
is refused (its response withheld) rather than silently truncated.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any

from ..errors import BudgetExceededError

# Reserved per invocation before the response size is known.
DEFAULT_RESPONSE_TOKEN_ESTIMATE = 256


@dataclass
class Budget:
    max_calls: int
    max_tokens: int
    spent_calls: int = 0
    spent_tokens: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)
    _reserved_calls: int = field(default=0, repr=False, compare=False)
    _reserved_tokens: int = field(default=0, repr=False, compare=False)

    def reserve(self, tokens: int) -> "Reservation":
        with self._lock:
            if self.spent_calls + self._reserved_calls + 1 > self.max_calls:
                raise BudgetExceededError(
                    f"call budget exhausted ({self.spent_calls}/{self.max_calls})")
            if self.spent_tokens + self._reserved_tokens + tokens > self.max_tokens:
                raise BudgetExceededError(
                    f"token budget exhausted ({self.spent_tokens}/{self.max_tokens})")
            self._reserved_calls += 1
            self._reserved_tokens += tokens
            return Reservation(budget=self, tokens=tokens)

    def _settle(self, reservation: "Reservation", actual_tokens: int) -> None:
        with self._lock:
            self._reserved_calls -= 1
            self._reserved_tokens -= reservation.tokens
            overshoot = self.spent_tokens + actual_tokens > self.max_tokens
            charge = min(actual_tokens, self.max_tokens - self.spent_tokens)
            self.spent_calls += 1
            self.spent_tokens += charge
            if overshoot:
                raise BudgetExceededError(
                    f"response pushed token spend past {self.max_tokens}; response refused")

    def _cancel(self, reservation: "Reservation") -> None:
        with self._lock:
            self._reserved_calls -= 1
            self._reserved_tokens -= reservation.tokens

    def to_dict(self) -> dict[str, Any]:
        return {
            "max_calls": self.max_calls,
            "max_tokens": self.max_tokens,
            "spent_calls": self.spent_calls,
            "spent_tokens": self.spent_tokens,
        }

    @classmethod
    def from_dict(cls, payload: dict[str, Any]) -> "Budget":
        return cls(
            max_calls=int(payload["max_calls"]),
            max_tokens=int(payload["max_tokens"]),
            spent_calls=int(payload.get("spent_calls", 0)),
            spent_tokens=int(payload.get("spent_tokens", 0)),
        )


@dataclass
class Reservation:
    budget: Budget
    tokens: int
    settled: bool = False

    def commit(self, actual_tokens: int) -> None:
        if not self.settled:
            self.settled = True
            self.budget._settle(self, actual_tokens)

    def cancel(self) -> None:
        if not self.settled:
            self.settled = True
            self.budget._cancel(self)


def unlimited() -> Budget:
    return Budget(max_calls=10**9, max_tokens=10**12)
