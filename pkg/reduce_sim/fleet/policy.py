"""Retraining policies: resilience-driven budgets or a fixed epoch count."""

from __future__ import annotations

from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, model_validator

from reduce_sim.errors import PolicyError
from reduce_sim.resilience.budget import Statistic


class PolicyKind(str, Enum):
    REDUCE = "reduce"
    FIXED = "fixed"


class Policy(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    kind: PolicyKind
    statistic: Statistic | None = None
    epochs: int | None = Field(default=None, ge=0)

    @model_validator(mode="after")
    def _variant_fields(self) -> Policy:
        if self.kind is PolicyKind.REDUCE and (self.statistic is None or self.epochs is not None):
            raise ValueError("a reduce policy takes a statistic and no epochs")
        if self.kind is PolicyKind.FIXED and (self.epochs is None or self.statistic is not None):
            raise ValueError("a fixed policy takes epochs and no statistic")
        return self

    @classmethod
    def reduce(cls, statistic: Statistic | str = Statistic.MAX) -> Policy:
        return cls(kind=PolicyKind.REDUCE, statistic=Statistic(statistic))

    @classmethod
    def fixed(cls, epochs: int) -> Policy:
        return cls(kind=PolicyKind.FIXED, epochs=epochs)

    @classmethod
    def parse(cls, text: str) -> Policy:
        """Parse ``reduce:<min|mean|max>`` or ``fixed:<epochs>``."""
        kind, _, arg = text.strip().lower().partition(":")
        try:
            if kind == PolicyKind.REDUCE.value:
                return cls.reduce(arg or Statistic.MAX)
            if kind == PolicyKind.FIXED.value:
                return cls.fixed(int(arg))
        except ValueError as exc:
            raise PolicyError(f"invalid policy {text!r}: {exc}") from exc
        raise PolicyError(f"invalid policy {text!r}: expected reduce:<statistic> or fixed:<epochs>")

    @property
    def label(self) -> str:
        if self.kind is PolicyKind.REDUCE:
            return f"reduce:{self.statistic.value}"
        return f"fixed:{self.epochs}"

    def check_epoch_limit(self, max_epochs: int) -> None:
        if self.kind is PolicyKind.FIXED and self.epochs > max_epochs:
            raise PolicyError(f"{self.label} exceeds the configured maximum of {max_epochs} epochs")
