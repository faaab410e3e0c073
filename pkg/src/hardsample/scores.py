"""Per-edge score vectors with a semantics tag."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError

TAGS = ("G_eff", "R_eff", "Z", "Y", "B", "Z_hat", "hardness", "rate")
_UNIT_RANGE_TAGS = ("Z", "rate")


@dataclass
class ScoreVector:
    """Scores aligned to the edge index of a BipartiteGraph."""

    values: np.ndarray
    tag: str

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.tag not in TAGS:
            raise ContractError(f"unknown score tag {self.tag!r}; expected one of {TAGS}")
        if self.values.ndim != 1:
            raise ContractError("score vector must be one-dimensional")
        if not np.all(np.isfinite(self.values)):
            raise ContractError("score values must be finite")
        if self.tag in _UNIT_RANGE_TAGS:
            if self.values.size and (self.values.min() < -1e-12 or self.values.max() > 1 + 1e-12):
                raise ContractError(f"{self.tag}-tagged scores must lie in [0, 1]")

    def __len__(self):
        return len(self.values)
