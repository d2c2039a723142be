"""Input validation helpers used across the estimator API and samplers."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, RangeError, ValidationError

__all__ = ["check_node", "check_pairs", "check_features", "check_ratios", "check_stage"]


def check_node(num_nodes: int, u: int) -> int:
    u = int(u)
    if not 0 <= u < num_nodes:
        raise RangeError(f"node {u} out of range [0, {num_nodes})")
    return u


def check_pairs(pairs, num_nodes: int | None = None) -> np.ndarray:
    """Coerce to an (m, 2) int64 array, optionally range-checking ids."""
    arr = np.asarray(pairs, dtype=np.int64)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError(f"expected (m, 2) node pairs, got shape {arr.shape}")
    if num_nodes is not None and (arr.min() < 0 or arr.max() >= num_nodes):
        raise RangeError(f"pair endpoint out of range [0, {num_nodes})")
    return arr


def check_features(features, num_nodes: int):
    if features is None:
        raise ConfigError("this heuristic requires node features, none attached")
    if features.num_nodes != num_nodes:
        raise ValidationError(
            f"feature rows ({features.num_nodes}) do not match graph nodes ({num_nodes})"
        )
    return features


def check_ratios(ratios) -> tuple[float, float, float]:
    if len(ratios) != 3:
        raise ConfigError("expected exactly three split ratios")
    r = tuple(float(x) for x in ratios)
    if any(x < 0 for x in r):
        raise ConfigError("split ratios must be nonnegative")
    if abs(sum(r) - 1.0) > 1e-9:
        raise ConfigError(f"split ratios must sum to 1, got {sum(r)!r}")
    return r


def check_stage(stage: str) -> str:
    if stage not in ("valid", "test"):
        raise ConfigError(f"stage must be 'valid' or 'test', got {stage!r}")
    return stage
