"""Immutable undirected sparse graph, node features, and edge splits.

The graph is stored CSR-style: one offsets array and one flat array of
neighbor ids, sorted ascending within each node. Construction normalizes
messy input (duplicate edges, both orientations, self-loops) instead of
rejecting it, logging what was dropped.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, RangeError, ValidationError

log = logging.getLogger(__name__)

__all__ = [
    "Graph",
    "FeatureMatrix",
    "EdgeSplit",
    "load_edge_list",
    "load_features",
    "make_split",
    "training_graph",
    "load_split",
    "save_split",
]


def _as_edge_array(edges) -> np.ndarray:
    arr = np.asarray(edges, dtype=np.int64)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError(f"expected an (m, 2) edge array, got shape {arr.shape}")
    return arr


class Graph:
    """Undirected simple graph with sorted CSR adjacency.

    Parameters
    ----------
    num_nodes : int
        Number of nodes; ids are dense integers in [0, num_nodes).
    edges : array-like of shape (m, 2)
        Edge list in either orientation. Duplicates and reversed copies
        collapse to one undirected edge; self-loops are dropped with a
        logged count.
    """

    __slots__ = ("num_nodes", "indptr", "indices", "degrees", "_row_ids")

    def __init__(self, num_nodes: int, edges) -> None:
        num_nodes = int(num_nodes)
        if num_nodes < 0:
            raise ValidationError("num_nodes must be nonnegative")
        edges = _as_edge_array(edges)
        if edges.size and (edges.min() < 0 or edges.max() >= num_nodes):
            raise RangeError(f"edge endpoint out of range [0, {num_nodes})")
        if edges.size:
            loops = int((edges[:, 0] == edges[:, 1]).sum())
            if loops:
                log.warning("dropped %d self-loop(s) while building graph", loops)
                edges = edges[edges[:, 0] != edges[:, 1]]
        if edges.size:
            both = np.concatenate([edges, edges[:, ::-1]])
            both = np.unique(both, axis=0)  # lexsort groups by source, sorts targets
            src, dst = both[:, 0], both[:, 1]
        else:
            src = dst = np.empty(0, dtype=np.int64)
        counts = np.bincount(src, minlength=num_nodes)
        self.num_nodes = num_nodes
        self.indptr = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)
        self.indices = np.ascontiguousarray(dst)
        self.degrees = np.diff(self.indptr)
        self._row_ids = None
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)
        self.degrees.setflags(write=False)

    @property
    def num_edges(self) -> int:
        return self.indices.size // 2

    def neighbors(self, u: int) -> np.ndarray:
        """Sorted neighbor ids of ``u`` (a read-only view)."""
        if not 0 <= u < self.num_nodes:
            raise RangeError(f"node {u} out of range [0, {self.num_nodes})")
        return self.indices[self.indptr[u] : self.indptr[u + 1]]

    def degree(self, u: int) -> int:
        if not 0 <= u < self.num_nodes:
            raise RangeError(f"node {u} out of range [0, {self.num_nodes})")
        return int(self.degrees[u])

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return bool(i < nb.size and nb[i] == v)

    def edge_array(self) -> np.ndarray:
        """All edges once, as (m, 2) pairs with u < v."""
        src = np.repeat(np.arange(self.num_nodes, dtype=np.int64), self.degrees)
        mask = src < self.indices
        return np.column_stack([src[mask], self.indices[mask]])

    def adj_matvec(self, vec: np.ndarray) -> np.ndarray:
        """Adjacency-matrix product ``A @ vec`` (symmetric A)."""
        if self._row_ids is None:
            self._row_ids = np.repeat(
                np.arange(self.num_nodes, dtype=np.int64), self.degrees
            )
        if self.indices.size == 0:
            return np.zeros(self.num_nodes)
        return np.bincount(
            self._row_ids, weights=vec[self.indices], minlength=self.num_nodes
        )

    def validate(self) -> None:
        """Check structural invariants; raises ValidationError on breakage."""
        if self.indptr[0] != 0 or self.indptr[-1] != self.indices.size:
            raise ValidationError("corrupt offsets array")
        for u in range(self.num_nodes):
            nb = self.neighbors(u)
            if nb.size and (np.any(np.diff(nb) <= 0)):
                raise ValidationError(f"neighbor list of {u} not sorted/unique")
            if np.any(nb == u):
                raise ValidationError(f"self-loop at node {u}")
            for v in nb:
                if not self.has_edge(int(v), u):
                    raise ValidationError(f"asymmetric edge ({u}, {v})")
        if int(self.degrees.sum()) != 2 * self.num_edges:
            raise ValidationError("degree sum does not match edge count")

    def __repr__(self) -> str:  # pragma: no cover
        return f"Graph(num_nodes={self.num_nodes}, num_edges={self.num_edges})"


@dataclass(frozen=True)
class FeatureMatrix:
    """Dense per-node feature rows."""

    values: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise ValidationError("feature matrix must be 2-dimensional")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("feature matrix contains non-finite entries")
        object.__setattr__(self, "values", arr)

    @property
    def num_nodes(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def row(self, u: int) -> np.ndarray:
        if not 0 <= u < self.num_nodes:
            raise RangeError(f"node {u} out of range [0, {self.num_nodes})")
        return self.values[u]


@dataclass(frozen=True)
class EdgeSplit:
    """Train/valid/test positive edges over a fixed node universe.

    ``years`` optionally carries a per-edge integer timestamp for each
    section (dynamic collaboration-style graphs); it is carried through
    file round-trips but not used in any computation here.
    """

    num_nodes: int
    train: np.ndarray
    valid: np.ndarray
    test: np.ndarray
    years: dict[str, np.ndarray] | None = None

    def __post_init__(self) -> None:
        for name in ("train", "valid", "test"):
            arr = _as_edge_array(getattr(self, name))
            if arr.size and (arr.min() < 0 or arr.max() >= self.num_nodes):
                raise RangeError(f"{name} edge endpoint out of range")
            object.__setattr__(self, name, arr)
        if self.years is not None:
            for name, ts in self.years.items():
                if len(ts) != len(getattr(self, name)):
                    raise ValidationError(f"timestamp count mismatch in {name}")

    def section(self, name: str) -> np.ndarray:
        if name not in ("train", "valid", "test"):
            raise ValidationError(f"unknown split section {name!r}")
        return getattr(self, name)

    def check_disjoint(self) -> None:
        """Raise unless the three sections are disjoint as unordered pairs.

        Dynamic graphs may legitimately repeat a pair across sections with
        different timestamps, so this is a helper rather than a constructor
        invariant.
        """
        seen: set[tuple[int, int]] = set()
        for name in ("train", "valid", "test"):
            for u, v in self.section(name):
                key = (int(min(u, v)), int(max(u, v)))
                if key in seen:
                    raise ValidationError(f"pair {key} appears in two sections")
                seen.add(key)


def _parse_int(token: str, lineno: int, path) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"{path}:{lineno}: expected an integer, got {token!r}") from None


def _iter_edge_lines(path):
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, line


def load_edge_list(path, num_nodes: int | None = None) -> Graph:
    """Load an undirected graph from a whitespace-separated edge list.

    Each data line is ``u v`` or ``u v year`` (the year column is ignored
    here); ``#`` starts a comment line. Ids are dense 0-based integers.
    When ``num_nodes`` is omitted it is inferred as ``max id + 1``.
    """
    edges = []
    max_id = -1
    for lineno, line in _iter_edge_lines(path):
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(f"{path}:{lineno}: expected 2 or 3 columns, got {len(parts)}")
        u = _parse_int(parts[0], lineno, path)
        v = _parse_int(parts[1], lineno, path)
        if u < 0 or v < 0:
            raise ParseError(f"{path}:{lineno}: negative node id")
        if num_nodes is not None and (u >= num_nodes or v >= num_nodes):
            raise RangeError(f"{path}:{lineno}: node id >= num_nodes ({num_nodes})")
        max_id = max(max_id, u, v)
        edges.append((u, v))
    n = num_nodes if num_nodes is not None else max_id + 1
    return Graph(n, np.array(edges, dtype=np.int64).reshape(-1, 2))


def load_features(path) -> FeatureMatrix:
    """Load a dense feature matrix from a CSV of floats, one row per node."""
    rows: list[list[float]] = []
    width = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh):
            line = raw.strip()
            if not line:
                continue
            parts = line.split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise ParseError(
                    f"{path}: ragged row {lineno}: expected {width} columns, got {len(parts)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise ParseError(f"{path}: parse error at row {lineno}") from None
    if not rows:
        raise ParseError(f"{path}: empty feature file")
    return FeatureMatrix(np.array(rows, dtype=np.float64))


def make_split(edges, ratios, seed: int, num_nodes: int | None = None) -> EdgeSplit:
    """Partition ``edges`` into train/valid/test by seeded shuffle.

    Valid and test sizes are floored (``floor(m * ratio)``); train absorbs
    the remainder, so the partition is total. Deterministic for a fixed
    seed.
    """
    from .validation import check_ratios

    check_ratios(ratios)
    edges = _as_edge_array(edges)
    m = len(edges)
    if m == 0:
        raise ValidationError("cannot split an empty edge list")
    if num_nodes is None:
        num_nodes = int(edges.max()) + 1
    rng = np.random.default_rng(int(seed) % 2**64)
    shuffled = edges[rng.permutation(m)]
    # the 1e-9 nudge mirrors the tolerance allowed on the ratio sum
    n_valid = int(math.floor(m * ratios[1] + 1e-9))
    n_test = int(math.floor(m * ratios[2] + 1e-9))
    n_train = m - n_valid - n_test
    return EdgeSplit(
        num_nodes=num_nodes,
        train=shuffled[:n_train],
        valid=shuffled[n_train : n_train + n_valid],
        test=shuffled[n_train + n_valid :],
    )


def training_graph(split: EdgeSplit, include_valid: bool = False) -> Graph:
    """Graph over the train edges, plus valid edges when the flag is set.

    The flag implements the protocol where validation edges join the
    scoring graph at test time.
    """
    parts = [split.train]
    if include_valid:
        parts.append(split.valid)
    edges = np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)
    if len(edges) == 0:
        log.warning("training graph has no edges")
    return Graph(split.num_nodes, edges)


_SECTIONS = ("train", "valid", "test")


def save_split(split: EdgeSplit, path) -> None:
    """Write the three-section split file (``#train`` / ``#valid`` / ``#test``)."""
    with open(path, "w", encoding="utf-8") as fh:
        for name in _SECTIONS:
            fh.write(f"#{name}\n")
            edges = split.section(name)
            years = (split.years or {}).get(name)
            for i, (u, v) in enumerate(edges):
                if years is not None:
                    fh.write(f"{u} {v} {int(years[i])}\n")
                else:
                    fh.write(f"{u} {v}\n")


def load_split(path, num_nodes: int | None = None) -> EdgeSplit:
    """Load a three-section split file written by :func:`save_split`."""
    sections: dict[str, list[tuple[int, int]]] = {s: [] for s in _SECTIONS}
    years: dict[str, list[int]] = {s: [] for s in _SECTIONS}
    current = None
    max_id = -1
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                name = line[1:].strip()
                if name not in _SECTIONS:
                    raise ParseError(f"{path}:{lineno}: unknown section {name!r}")
                current = name
                continue
            if current is None:
                raise ParseError(f"{path}:{lineno}: edge before any section header")
            parts = line.split()
            if len(parts) not in (2, 3):
                raise ParseError(f"{path}:{lineno}: expected 2 or 3 columns")
            u = _parse_int(parts[0], lineno, path)
            v = _parse_int(parts[1], lineno, path)
            max_id = max(max_id, u, v)
            sections[current].append((u, v))
            if len(parts) == 3:
                years[current].append(_parse_int(parts[2], lineno, path))
    if num_nodes is None:
        num_nodes = max_id + 1
    has_years = any(years[s] for s in _SECTIONS)
    if has_years:
        for s in _SECTIONS:
            if sections[s] and len(years[s]) != len(sections[s]):
                raise ParseError(f"{path}: section {s} mixes timestamped and plain edges")
    return EdgeSplit(
        num_nodes=num_nodes,
        train=np.array(sections["train"], dtype=np.int64).reshape(-1, 2),
        valid=np.array(sections["valid"], dtype=np.int64).reshape(-1, 2),
        test=np.array(sections["test"], dtype=np.int64).reshape(-1, 2),
        years={s: np.array(years[s], dtype=np.int64) for s in _SECTIONS}
        if has_years
        else None,
    )
