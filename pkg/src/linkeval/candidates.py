"""Corruption candidate sets for a positive sample, with filtering.

A corruption of a positive pair keeps one endpoint fixed (the anchor) and
replaces the other. The filter removes the anchor itself, the positive
sample, and known positive edges: train edges always, plus valid edges
when building test negatives. Dynamic collaboration-style graphs disable
the positive-edge exclusions entirely, because a past edge does not imply
a future one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .graph import EdgeSplit
from .validation import check_node, check_stage

__all__ = ["FilterPolicy", "CandidateSet", "MembershipIndex", "corruption_candidates"]

SIDES = ("left", "right")


@dataclass(frozen=True)
class FilterPolicy:
    """Which positive edges are excluded from corruption candidates."""

    exclude_train: bool = True
    exclude_valid_for_test: bool = True
    dynamic_mode: bool = False

    def excludes_train(self) -> bool:
        return self.exclude_train and not self.dynamic_mode

    def excludes_valid(self, stage: str) -> bool:
        return (
            self.exclude_valid_for_test
            and stage == "test"
            and not self.dynamic_mode
        )


class MembershipIndex:
    """O(1) membership over unordered positive pairs, split by section.

    Built once per run; also answers per-node partner lookups, which is
    what candidate filtering actually consumes.
    """

    def __init__(self, num_nodes: int, train_edges, valid_edges) -> None:
        self.num_nodes = int(num_nodes)
        self._train = self._build(train_edges)
        self._valid = self._build(valid_edges)

    @classmethod
    def from_split(cls, split: EdgeSplit) -> "MembershipIndex":
        return cls(split.num_nodes, split.train, split.valid)

    def _build(self, edges) -> dict[int, set[int]]:
        partners: dict[int, set[int]] = {}
        for u, v in np.asarray(edges, dtype=np.int64).reshape(-1, 2):
            u, v = int(u), int(v)
            partners.setdefault(u, set()).add(v)
            partners.setdefault(v, set()).add(u)
        return partners

    def train_partners(self, u: int) -> set[int]:
        return self._train.get(int(u), set())

    def valid_partners(self, u: int) -> set[int]:
        return self._valid.get(int(u), set())

    def in_train(self, u: int, v: int) -> bool:
        return int(v) in self._train.get(int(u), ())

    def in_valid(self, u: int, v: int) -> bool:
        return int(v) in self._valid.get(int(u), ())


@dataclass(frozen=True)
class CandidateSet:
    """Admissible replacement nodes for one endpoint of a positive pair."""

    anchor: int
    partner: int
    side: str  # which endpoint of the positive stays fixed
    nodes: np.ndarray  # sorted ascending

    def __len__(self) -> int:
        return len(self.nodes)

    def pairs(self) -> np.ndarray:
        """Oriented corruption pairs: (anchor, v) on the left side, (v, anchor) on the right."""
        col = np.full(len(self.nodes), self.anchor, dtype=np.int64)
        if self.side == "left":
            return np.column_stack([col, self.nodes])
        return np.column_stack([self.nodes, col])


def corruption_candidates(
    index: MembershipIndex,
    positive,
    side: str,
    policy: FilterPolicy,
    stage: str,
) -> CandidateSet:
    """All nodes that may replace one endpoint of ``positive``.

    ``side='left'`` keeps the left endpoint fixed and corrupts the right
    one; ``side='right'`` the reverse. An empty candidate set is a valid
    return.
    """
    check_stage(stage)
    if side not in SIDES:
        raise ValidationError(f"side must be one of {SIDES}, got {side!r}")
    u, v = (int(positive[0]), int(positive[1]))
    check_node(index.num_nodes, u)
    check_node(index.num_nodes, v)
    anchor, partner = (u, v) if side == "left" else (v, u)
    excluded: set[int] = {anchor, partner}
    if policy.excludes_train():
        excluded |= index.train_partners(anchor)
    if policy.excludes_valid(stage):
        excluded |= index.valid_partners(anchor)
    nodes = np.setdiff1d(
        np.arange(index.num_nodes, dtype=np.int64),
        np.fromiter(excluded, dtype=np.int64, count=len(excluded)),
        assume_unique=True,
    )
    return CandidateSet(anchor=anchor, partner=partner, side=side, nodes=nodes)
