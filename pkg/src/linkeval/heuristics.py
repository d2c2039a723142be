"""Heuristic link predictors over an immutable graph.

Pair scorers: common neighbors (cn), Adamic-Adar (aa), resource allocation
(ra), truncated reciprocal shortest path, truncated Katz index, approximate
personalized PageRank via forward push, and feature cosine similarity. All
share a "greater score means more likely link" orientation.

Each heuristic also has an estimator-style wrapper (fit on a graph, predict
scores for node pairs) so scoring composes with scikit-learn tooling.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from .errors import ConfigError, LinkEvalError, ParseError, ValidationError
from .graph import FeatureMatrix, Graph
from .validation import check_features, check_node, check_pairs

log = logging.getLogger(__name__)

__all__ = [
    "cn",
    "aa",
    "ra",
    "shortest_path_score",
    "katz",
    "ppr",
    "feature_cosine",
    "score_pairs",
    "ScoreTable",
    "save_scores",
    "load_scores",
    "HeuristicScorer",
    "CommonNeighbors",
    "AdamicAdar",
    "ResourceAllocation",
    "ShortestPathScorer",
    "KatzIndex",
    "PersonalizedPageRank",
    "FeatureCosine",
    "make_scorer",
    "SCORERS",
]


# ---------------------------------------------------------------------------
# per-pair scoring functions


def _common(g: Graph, u: int, v: int) -> np.ndarray:
    return np.intersect1d(g.neighbors(u), g.neighbors(v), assume_unique=True)


def cn(g: Graph, u: int, v: int) -> float:
    """Number of common neighbors of u and v."""
    u, v = check_node(g.num_nodes, u), check_node(g.num_nodes, v)
    return float(_common(g, u, v).size)


def aa(g: Graph, u: int, v: int) -> float:
    """Adamic-Adar: sum of 1/ln(deg(w)) over common neighbors w.

    Common neighbors with degree <= 1 contribute 0; that cannot happen for
    u != v in a simple graph but guards the u == v case.
    """
    u, v = check_node(g.num_nodes, u), check_node(g.num_nodes, v)
    degs = g.degrees[_common(g, u, v)]
    degs = degs[degs > 1]
    if degs.size == 0:
        return 0.0
    return float(np.sum(1.0 / np.log(degs)))


def ra(g: Graph, u: int, v: int) -> float:
    """Resource allocation: sum of 1/deg(w) over common neighbors w."""
    u, v = check_node(g.num_nodes, u), check_node(g.num_nodes, v)
    degs = g.degrees[_common(g, u, v)]
    if degs.size == 0:
        return 0.0
    return float(np.sum(1.0 / degs))


def shortest_path_score(g: Graph, u: int, v: int, cutoff: int = 6) -> float:
    """Reciprocal shortest-path distance, 0 when unreachable within cutoff.

    Distance comes from a bidirectional BFS truncated at ``cutoff``. The
    degenerate u == v case returns the sentinel maximum 1.0 rather than an
    infinite score.
    """
    u, v = check_node(g.num_nodes, u), check_node(g.num_nodes, v)
    if cutoff < 1:
        raise ConfigError("cutoff must be >= 1")
    if u == v:
        return 1.0
    d = _bidirectional_distance(g, u, v, cutoff)
    return 0.0 if d is None else 1.0 / d


def _bidirectional_distance(g: Graph, u: int, v: int, cutoff: int) -> int | None:
    """Unweighted distance d(u, v) if d <= cutoff, else None."""
    dist_u = {u: 0}
    dist_v = {v: 0}
    frontier_u = [u]
    frontier_v = [v]
    depth_u = depth_v = 0
    best: int | None = None
    while frontier_u and frontier_v:
        if depth_u + depth_v >= (cutoff if best is None else min(best, cutoff)):
            break
        # expand the smaller frontier one level
        if len(frontier_u) <= len(frontier_v):
            frontier_u, depth_u, best = _expand(
                g, frontier_u, dist_u, dist_v, depth_u, best
            )
        else:
            frontier_v, depth_v, best = _expand(
                g, frontier_v, dist_v, dist_u, depth_v, best
            )
    if best is not None and best <= cutoff:
        return best
    return None


def _expand(g, frontier, dist_here, dist_other, depth, best):
    nxt = []
    new_depth = depth + 1
    for x in frontier:
        for y in g.neighbors(x):
            y = int(y)
            if y in dist_here:
                continue
            dist_here[y] = new_depth
            if y in dist_other:
                total = new_depth + dist_other[y]
                if best is None or total < best:
                    best = total
            nxt.append(y)
    return nxt, new_depth, best


def _bfs_distances(g: Graph, source: int, cutoff: int) -> np.ndarray:
    """Single-source BFS distances, -1 beyond cutoff or unreachable."""
    dist = np.full(g.num_nodes, -1, dtype=np.int64)
    dist[source] = 0
    frontier = np.array([source], dtype=np.int64)
    d = 0
    while frontier.size and d < cutoff:
        d += 1
        nxt = np.concatenate(
            [g.neighbors(int(x)) for x in frontier]
        ) if frontier.size else np.empty(0, dtype=np.int64)
        nxt = np.unique(nxt)
        nxt = nxt[dist[nxt] < 0]
        dist[nxt] = d
        frontier = nxt
    return dist


def katz(g: Graph, u: int, v: int, beta: float = 0.05, max_len: int = 5) -> float:
    """Truncated Katz index: sum over l of beta^l * (#walks of length l u->v).

    Computed by iterating adjacency products on the seed vector of ``u``;
    ``beta * max_degree < 1`` keeps the series well behaved but is not
    enforced.
    """
    u, v = check_node(g.num_nodes, u), check_node(g.num_nodes, v)
    if beta <= 0:
        raise ConfigError("beta must be positive")
    if max_len < 1:
        raise ConfigError("max_len must be >= 1")
    return float(_katz_vector(g, u, beta, max_len)[v])


def _katz_vector(g: Graph, source: int, beta: float, max_len: int) -> np.ndarray:
    vec = np.zeros(g.num_nodes)
    vec[source] = 1.0
    out = np.zeros(g.num_nodes)
    scale = 1.0
    for _ in range(max_len):
        vec = g.adj_matvec(vec)
        scale *= beta
        out += scale * vec
    return out


def ppr(g: Graph, source: int, alpha: float = 0.15, epsilon: float = 1e-5) -> dict[int, float]:
    """Approximate personalized PageRank from ``source`` by forward push.

    Residual mass is pushed until every node's residual drops below
    ``epsilon * deg(node)``. Returns the nonzero entries; values are
    nonnegative and sum to at most 1 (restart mass stranded at zero-degree
    nodes is dropped, so an isolated source keeps exactly ``alpha``).
    """
    source = check_node(g.num_nodes, source)
    p, _ = _forward_push(g, source, alpha, epsilon)
    nz = np.flatnonzero(p)
    return {int(i): float(p[i]) for i in nz}


def _forward_push(
    g: Graph, source: int, alpha: float, epsilon: float
) -> tuple[np.ndarray, np.ndarray]:
    """Forward push returning (estimate, residual) full vectors.

    Synchronous variant: every node above its threshold is pushed in one
    sweep, which keeps the arithmetic vectorized and the result
    deterministic. Termination guarantee is the usual one: on exit every
    residual is below epsilon * degree.
    """
    if not 0 < alpha <= 1:
        raise ConfigError("alpha must be in (0, 1]")
    if epsilon <= 0:
        raise ConfigError("epsilon must be positive")
    n = g.num_nodes
    deg = g.degrees.astype(np.float64)
    threshold = epsilon * deg
    p = np.zeros(n)
    r = np.zeros(n)
    r[source] = 1.0
    inv_deg = np.where(deg > 0, 1.0 / np.maximum(deg, 1.0), 0.0)
    while True:
        active = (r >= threshold) & (r > 0)
        if not active.any():
            break
        res = np.where(active, r, 0.0)
        p += alpha * res
        r -= res
        if alpha < 1.0:
            # mass leaving zero-degree nodes is dropped, not redistributed
            r += g.adj_matvec((1.0 - alpha) * res * inv_deg)
    return p, r


def feature_cosine(x: FeatureMatrix, u: int, v: int) -> float:
    """Cosine similarity of the feature rows of u and v, in [-1, 1].

    A zero-norm row yields score 0 with a warning instead of an error.
    """
    xu, xv = x.row(u), x.row(v)
    nu, nv = np.linalg.norm(xu), np.linalg.norm(xv)
    if nu == 0.0 or nv == 0.0:
        log.warning("zero-norm feature row in cosine of (%d, %d); scoring 0", u, v)
        return 0.0
    return float(np.dot(xu, xv) / (nu * nv))


# ---------------------------------------------------------------------------
# score tables


@dataclass
class ScoreTable:
    """Parallel (u, v) pairs and finite scores, with a label for file headers."""

    pairs: np.ndarray
    scores: np.ndarray
    label: str = ""

    def __post_init__(self) -> None:
        self.pairs = check_pairs(self.pairs)
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if len(self.pairs) != len(self.scores):
            raise ValidationError("pairs and scores differ in length")
        if self.scores.size and not np.all(np.isfinite(self.scores)):
            raise ValidationError("scores contain non-finite values")

    def __len__(self) -> int:
        return len(self.scores)

    def as_dict(self) -> dict[tuple[int, int], float]:
        return {
            (int(u), int(v)): float(s)
            for (u, v), s in zip(self.pairs, self.scores)
        }


def save_scores(table: ScoreTable, path) -> None:
    """Write a score table as TSV with a one-line ``#`` header."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {table.label or 'scores'}\n")
        for (u, v), s in zip(table.pairs, table.scores):
            fh.write(f"{u}\t{v}\t{s!r}\n")


def load_scores(path) -> ScoreTable:
    """Read a TSV score table; a leading ``#`` line is taken as the label."""
    pairs: list[tuple[int, int]] = []
    scores: list[float] = []
    label = ""
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line.startswith("#"):
                if lineno == 1:
                    label = line[1:].strip()
                    continue
                raise ParseError(f"{path}:{lineno}: unexpected comment line")
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(f"{path}:{lineno}: expected 3 tab-separated columns")
            try:
                pairs.append((int(parts[0]), int(parts[1])))
                scores.append(float(parts[2]))
            except ValueError:
                raise ParseError(f"{path}:{lineno}: malformed score record") from None
    return ScoreTable(
        np.array(pairs, dtype=np.int64).reshape(-1, 2),
        np.array(scores, dtype=np.float64),
        label=label,
    )


# ---------------------------------------------------------------------------
# estimator-style scorers


class HeuristicScorer(BaseEstimator):
    """Base scorer: bind a graph with fit(), score node pairs with predict().

    Subclasses set ``name`` and implement either ``pair_score`` or
    ``score_from`` (a full score vector against one fixed anchor, used by
    the batched paths and the negative sampler).
    """

    name: str = ""
    needs_features = False

    def fit(self, graph: Graph, features: FeatureMatrix | None = None):
        if self.needs_features:
            features = check_features(features, graph.num_nodes)
        elif features is not None and features.num_nodes != graph.num_nodes:
            raise ValidationError("feature rows do not match graph nodes")
        self.graph_ = graph
        self.features_ = features
        return self

    def _check_fitted(self) -> Graph:
        if not hasattr(self, "graph_"):
            raise LinkEvalError(f"{type(self).__name__} is not fitted")
        return self.graph_

    def pair_score(self, u: int, v: int) -> float:
        g = self._check_fitted()
        return float(self.score_from(u)[check_node(g.num_nodes, v)])

    def score_from(self, anchor: int) -> np.ndarray:
        """Scores of (anchor, v) for every node v, as a dense vector."""
        raise NotImplementedError

    def predict(self, pairs) -> np.ndarray:
        """Score each (u, v) pair; identical to per-pair ``pair_score`` calls."""
        g = self._check_fitted()
        pairs = check_pairs(pairs, g.num_nodes)
        out = np.empty(len(pairs))
        for i, (u, v) in enumerate(pairs):
            out[i] = self.pair_score(int(u), int(v))
        return out

    def label(self) -> str:
        params = self.get_params()
        if not params:
            return self.name
        inner = " ".join(f"{k}={v}" for k, v in sorted(params.items()))
        return f"{self.name} {inner}"


class CommonNeighbors(HeuristicScorer):
    name = "cn"

    def pair_score(self, u, v):
        return cn(self._check_fitted(), u, v)

    def score_from(self, anchor):
        g = self._check_fitted()
        out = np.zeros(g.num_nodes)
        for w in g.neighbors(anchor):
            out[g.neighbors(int(w))] += 1.0
        return out


class AdamicAdar(HeuristicScorer):
    name = "aa"

    def pair_score(self, u, v):
        return aa(self._check_fitted(), u, v)

    def score_from(self, anchor):
        g = self._check_fitted()
        out = np.zeros(g.num_nodes)
        for w in g.neighbors(anchor):
            d = g.degrees[w]
            if d > 1:
                out[g.neighbors(int(w))] += 1.0 / np.log(d)
        return out


class ResourceAllocation(HeuristicScorer):
    name = "ra"

    def pair_score(self, u, v):
        return ra(self._check_fitted(), u, v)

    def score_from(self, anchor):
        g = self._check_fitted()
        out = np.zeros(g.num_nodes)
        for w in g.neighbors(anchor):
            out[g.neighbors(int(w))] += 1.0 / g.degrees[w]
        return out


class ShortestPathScorer(HeuristicScorer):
    name = "sp"

    def __init__(self, cutoff: int = 6):
        self.cutoff = cutoff

    def pair_score(self, u, v):
        return shortest_path_score(self._check_fitted(), u, v, cutoff=self.cutoff)

    def score_from(self, anchor):
        g = self._check_fitted()
        dist = _bfs_distances(g, check_node(g.num_nodes, anchor), self.cutoff)
        out = np.zeros(g.num_nodes)
        reached = dist > 0
        out[reached] = 1.0 / dist[reached]
        out[anchor] = 1.0  # sentinel for the degenerate self pair
        return out

    def predict(self, pairs):
        # distances come from the per-pair bidirectional search
        g = self._check_fitted()
        pairs = check_pairs(pairs, g.num_nodes)
        return np.array([self.pair_score(int(u), int(v)) for u, v in pairs])


class KatzIndex(HeuristicScorer):
    name = "katz"

    def __init__(self, beta: float = 0.05, max_len: int = 5):
        self.beta = beta
        self.max_len = max_len

    def pair_score(self, u, v):
        return katz(self._check_fitted(), u, v, beta=self.beta, max_len=self.max_len)

    def score_from(self, anchor):
        g = self._check_fitted()
        if self.beta <= 0:
            raise ConfigError("beta must be positive")
        if self.max_len < 1:
            raise ConfigError("max_len must be >= 1")
        return _katz_vector(g, check_node(g.num_nodes, anchor), self.beta, self.max_len)

    def predict(self, pairs):
        return _grouped_predict(self, pairs)


class PersonalizedPageRank(HeuristicScorer):
    """Forward-push PPR; directional, scored from the anchor by default.

    ``direction='to_anchor'`` scores ppr(v -> anchor) instead, at the cost
    of one push per distinct candidate.
    """

    name = "ppr"

    def __init__(self, alpha: float = 0.15, epsilon: float = 1e-5, direction: str = "from_anchor"):
        self.alpha = alpha
        self.epsilon = epsilon
        self.direction = direction

    def fit(self, graph, features=None):
        super().fit(graph, features)
        if self.direction not in ("from_anchor", "to_anchor"):
            raise ConfigError(f"unknown ppr direction {self.direction!r}")
        self._cache: dict[int, np.ndarray] = {}
        return self

    def _push_vector(self, source: int) -> np.ndarray:
        vec = self._cache.get(source)
        if vec is None:
            vec, _ = _forward_push(self.graph_, source, self.alpha, self.epsilon)
            self._cache[source] = vec
        return vec

    def pair_score(self, u, v):
        g = self._check_fitted()
        u, v = check_node(g.num_nodes, u), check_node(g.num_nodes, v)
        if self.direction == "to_anchor":
            u, v = v, u
        return float(self._push_vector(u)[v])

    def score_from(self, anchor):
        g = self._check_fitted()
        anchor = check_node(g.num_nodes, anchor)
        if self.direction == "from_anchor":
            return self._push_vector(anchor).copy()
        out = np.empty(g.num_nodes)
        for v in range(g.num_nodes):
            out[v] = self._push_vector(v)[anchor]
        return out

    def predict(self, pairs):
        return _grouped_predict(self, pairs)


class FeatureCosine(HeuristicScorer):
    name = "cos"
    needs_features = True

    def fit(self, graph, features=None):
        super().fit(graph, features)
        norms = np.linalg.norm(self.features_.values, axis=1)
        zero = int((norms == 0).sum())
        if zero:
            log.warning("%d zero-norm feature row(s); their cosine scores are 0", zero)
        self._norms = norms
        return self

    def pair_score(self, u, v):
        self._check_fitted()
        return feature_cosine(self.features_, u, v)

    def score_from(self, anchor):
        g = self._check_fitted()
        anchor = check_node(g.num_nodes, anchor)
        xa = self.features_.values[anchor]
        na = self._norms[anchor]
        if na == 0.0:
            return np.zeros(g.num_nodes)
        denom = self._norms * na
        safe = np.where(denom > 0, denom, 1.0)
        out = (self.features_.values @ xa) / safe
        out[denom == 0] = 0.0
        return out


def _grouped_predict(scorer: HeuristicScorer, pairs) -> np.ndarray:
    """Group pairs by left endpoint and reuse one score vector per group."""
    g = scorer._check_fitted()
    pairs = check_pairs(pairs, g.num_nodes)
    out = np.empty(len(pairs))
    if scorer.name == "ppr" and scorer.direction == "to_anchor":
        group_col, read_col = 1, 0
    else:
        group_col, read_col = 0, 1
    for u in np.unique(pairs[:, group_col]):
        mask = pairs[:, group_col] == u
        if scorer.name == "ppr":
            vec = scorer._push_vector(int(u))
        else:
            vec = scorer.score_from(int(u))
        out[mask] = vec[pairs[mask, read_col]]
    return out


SCORERS: dict[str, type[HeuristicScorer]] = {
    "cn": CommonNeighbors,
    "aa": AdamicAdar,
    "ra": ResourceAllocation,
    "sp": ShortestPathScorer,
    "shortest-path": ShortestPathScorer,
    "katz": KatzIndex,
    "ppr": PersonalizedPageRank,
    "cos": FeatureCosine,
    "cosine": FeatureCosine,
}


def make_scorer(name: str, **params) -> HeuristicScorer:
    """Instantiate a scorer by short name, e.g. ``make_scorer('katz', beta=0.1)``."""
    key = name.strip().lower()
    if key not in SCORERS:
        raise ConfigError(f"unknown heuristic {name!r}; choose from {sorted(set(SCORERS))}")
    return SCORERS[key](**params)


def score_pairs(
    graph: Graph,
    features: FeatureMatrix | None,
    kind: HeuristicScorer | str,
    pairs,
    threads: int = 1,
) -> ScoreTable:
    """Score a batch of pairs with one heuristic, as a ScoreTable.

    ``kind`` is a scorer instance or short name. Output order matches the
    input pair order and is independent of ``threads``.
    """
    scorer = kind if isinstance(kind, HeuristicScorer) else make_scorer(kind)
    scorer.fit(graph, features)
    pairs = check_pairs(pairs, graph.num_nodes)
    if len(pairs) == 0:
        return ScoreTable(pairs, np.empty(0), label=scorer.label())
    threads = max(1, int(threads))
    if threads == 1 or len(pairs) < 2 * threads:
        scores = scorer.predict(pairs)
    else:
        chunks = np.array_split(np.arange(len(pairs)), threads)
        scores = np.empty(len(pairs))
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for idx, part in zip(
                chunks, pool.map(lambda c: scorer.predict(pairs[c]), chunks)
            ):
                scores[idx] = part
    return ScoreTable(pairs, scores, label=scorer.label())
