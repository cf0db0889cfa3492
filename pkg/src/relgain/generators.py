"""Synthetic uncertain-graph families with seeded probability models.

Four undirected topology families (Erdos-Renyi, random k-regular,
Watts-Strogatz small world, Barabasi-Albert preferential attachment) paired
with two edge-probability models: uniform on (lo, hi] and an exponential cdf
applied to a Poisson interaction count.  Everything is deterministic in the
spec's seed, so exports are byte-stable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import UncertainGraph

__all__ = [
    "FAMILIES",
    "PROB_MODELS",
    "GenSpec",
    "generate",
    "erdos_renyi",
    "k_regular",
    "small_world",
    "scale_free",
    "prob_from_count",
]

FAMILIES = ("erdos_renyi", "k_regular", "small_world", "scale_free")
PROB_MODELS = ("uniform", "exponential_count")

_REGULAR_ATTEMPTS = 1000


@dataclass(frozen=True)
class GenSpec:
    """Family, size, family parameter, and probability model for one graph.

    param means: edge probability (erdos_renyi), degree (k_regular), rewire
    probability (small_world), attachments per node or a cycle of them
    (scale_free).  lo/hi bound the uniform model; mu is the mean of the
    exponential-count model.
    """

    family: str
    n: int
    param: object = None
    prob_model: str = "uniform"
    lo: float = 0.0
    hi: float = 0.6
    mu: float = 20.0
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r} (expected one of {FAMILIES})")
        if self.prob_model not in PROB_MODELS:
            raise ValueError(
                f"unknown prob_model {self.prob_model!r} (expected one of {PROB_MODELS})")
        if self.n < 2:
            raise ValueError("n must be at least 2")


def prob_from_count(t, mu: float):
    """Map an interaction count to a probability via 1 - exp(-t / mu)."""
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    arr = np.asarray(t, dtype=np.float64)
    if (arr < 0).any():
        raise ValueError("counts must be non-negative")
    out = 1.0 - np.exp(-arr / mu)
    return float(out) if np.isscalar(t) or arr.ndim == 0 else out


def _assign_probs(m: int, spec: GenSpec, rng: np.random.Generator) -> np.ndarray:
    if spec.prob_model == "uniform":
        lo, hi = spec.lo, spec.hi
        if not 0.0 <= lo < hi <= 1.0:
            raise ValueError(f"uniform bounds must satisfy 0 <= lo < hi <= 1, got ({lo}, {hi})")
        # hi - span * U[0,1) lands in (lo, hi]
        return hi - (hi - lo) * rng.random(m)
    t = np.maximum(1, rng.poisson(spec.mu, size=m))
    return prob_from_count(t, spec.mu)


# ---------------------------------------------------------------------------
# topologies (undirected, simple, no self loops)
# ---------------------------------------------------------------------------


def _er_pairs(n: int, p: float, rng: np.random.Generator):
    if not 0.0 < p <= 1.0:
        raise ValueError(f"edge probability must be in (0, 1], got {p}")
    limit = n * (n - 1) // 2
    count = int(rng.binomial(limit, p))
    # rejection-sample distinct pair indices; cheap while count << limit
    chosen: set = set()
    order: list = []
    while len(order) < count:
        batch = rng.integers(0, limit, size=max(32, 2 * (count - len(order))))
        for x in batch.tolist():
            if x not in chosen:
                chosen.add(x)
                order.append(x)
                if len(order) == count:
                    break
    idx = np.asarray(order, dtype=np.int64)
    # decode a lexicographic pair index into (u, v) with u < v
    starts = np.concatenate([[0], np.cumsum(np.arange(n - 1, 0, -1))])
    u = np.searchsorted(starts, idx, side="right") - 1
    v = idx - starts[u] + u + 1
    return u, v


def _regular_pairs(n: int, k: int, rng: np.random.Generator):
    if k < 1 or k >= n:
        raise ValueError(f"degree must satisfy 1 <= k < n, got k={k}, n={n}")
    if (n * k) % 2:
        raise ValueError(f"n*k must be even to realize a {k}-regular graph on {n} nodes")
    stubs = np.repeat(np.arange(n), k)
    for _ in range(_REGULAR_ATTEMPTS):
        perm = rng.permutation(stubs)
        a, b = perm[0::2], perm[1::2]
        if (a == b).any():
            continue
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        keys = lo * n + hi
        if len(np.unique(keys)) != len(keys):
            continue
        return a, b
    raise ValueError(
        f"failed to realize a simple {k}-regular graph after {_REGULAR_ATTEMPTS} pairings")


def _ring_key(n, u, v):
    lo, hi = (u, v) if u < v else (v, u)
    return lo * n + hi


def _small_world_pairs(n: int, rewire: float, rng: np.random.Generator):
    if not 0.0 <= rewire <= 1.0:
        raise ValueError(f"rewire probability must be in [0, 1], got {rewire}")
    if n < 10:
        raise ValueError("small_world needs at least 10 nodes")
    pairs: set = set()
    src: list = []
    dst: list = []
    # ring lattice with 2 neighbours per side, each edge rewired independently
    for offset in (1, 2):
        for u in range(n):
            v = (u + offset) % n
            if rng.random() < rewire or _ring_key(n, u, v) in pairs:
                v = -1
                for _ in range(100):
                    w = int(rng.integers(n))
                    if w != u and _ring_key(n, u, w) not in pairs:
                        v = w
                        break
                if v < 0:
                    for w in range(n):  # saturated draw, scan deterministically
                        if w != u and _ring_key(n, u, w) not in pairs:
                            v = w
                            break
                if v < 0:
                    continue
            pairs.add(_ring_key(n, u, v))
            src.append(u)
            dst.append(v)
    return np.asarray(src), np.asarray(dst)


def _scale_free_pairs(n: int, attach, rng: np.random.Generator):
    seq = (attach,) if isinstance(attach, (int, np.integer)) else tuple(attach)
    if not seq or any(int(m) < 1 for m in seq):
        raise ValueError(f"attachment counts must be positive, got {attach}")
    seq = tuple(int(m) for m in seq)
    m0 = max(seq) + 1
    if n <= m0:
        raise ValueError(f"n must exceed {m0} for attachments {seq}")
    src: list = []
    dst: list = []
    endpoints: list = []  # node multiset; degree-proportional sampling
    for u in range(m0):
        for v in range(u + 1, m0):
            src.append(u)
            dst.append(v)
            endpoints.extend((u, v))
    for u in range(m0, n):
        m = seq[(u - m0) % len(seq)]
        targets: set = set()
        while len(targets) < m:
            targets.add(endpoints[int(rng.integers(len(endpoints)))])
        for v in sorted(targets):
            src.append(u)
            dst.append(v)
            endpoints.extend((u, v))
    return np.asarray(src), np.asarray(dst)


_DEFAULT_PARAM = {"small_world": 0.3, "scale_free": (2, 3)}


def generate(spec: GenSpec) -> UncertainGraph:
    """Build the requested family and draw its edge probabilities."""
    rng = np.random.default_rng(spec.seed)
    param = spec.param if spec.param is not None else _DEFAULT_PARAM.get(spec.family)
    if param is None:
        raise ValueError(f"family {spec.family!r} needs an explicit param")
    if spec.family == "erdos_renyi":
        src, dst = _er_pairs(spec.n, float(param), rng)
    elif spec.family == "k_regular":
        src, dst = _regular_pairs(spec.n, int(param), rng)
    elif spec.family == "small_world":
        src, dst = _small_world_pairs(spec.n, float(param), rng)
    else:
        src, dst = _scale_free_pairs(spec.n, param, rng)
    prob = _assign_probs(len(src), spec, rng)
    return UncertainGraph(spec.n, src, dst, prob, directed=False)


def erdos_renyi(n: int, p: float, prob_model: str = "uniform", seed: int = 0,
                **model_params) -> UncertainGraph:
    return generate(GenSpec("erdos_renyi", n, p, prob_model, seed=seed, **model_params))


def k_regular(n: int, k: int, prob_model: str = "uniform", seed: int = 0,
              **model_params) -> UncertainGraph:
    return generate(GenSpec("k_regular", n, k, prob_model, seed=seed, **model_params))


def small_world(n: int, rewire: float = 0.3, prob_model: str = "uniform",
                seed: int = 0, **model_params) -> UncertainGraph:
    return generate(GenSpec("small_world", n, rewire, prob_model, seed=seed, **model_params))


def scale_free(n: int, attach=(2, 3), prob_model: str = "uniform", seed: int = 0,
               **model_params) -> UncertainGraph:
    return generate(GenSpec("scale_free", n, attach, prob_model, seed=seed, **model_params))
