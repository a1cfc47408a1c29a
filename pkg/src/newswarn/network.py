"""Social-graph ingestion and simulation on explicit graphs.

Edge lists are read in the common two-column text form ('#' comments),
re-indexed densely, and stored as a compressed sparse adjacency that
both kernel backends consume directly.  Graphs are treated as read-only
inputs: cleaning drops self-loops and repeated edges, and a binary cache
avoids re-parsing large files.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import InputError
from .params import DegreeModel, ModelParams, WarningPolicy, check_tag_probabilities
from .simulate import (
    _MAX_CAP,
    _INITIAL_CAP,
    SimulationTrace,
    StopRule,
    _seed_label,
    _seed_sequence,
)
from ._backend import get_backend

__all__ = [
    "SocialGraph",
    "DegreeStats",
    "load_edge_list",
    "degree_stats",
    "save_cache",
    "load_cache",
    "subsample",
    "network_simulate",
]

_CACHE_MAGIC = b"NWSGRAPH"
_CACHE_VERSION = 1


@dataclass(frozen=True)
class SocialGraph:
    """Directed graph in compressed sparse row form.

    Node ids are dense 0..n_nodes-1; ``orig_ids[i]`` is the id node i had
    in the source file (sorted ascending, so re-indexing is reproducible
    regardless of edge order).  Neighbor lists are ascending and contain
    no self-loops or repeats; the cleaning counters record what the
    source contained beyond that.
    """

    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)
    orig_ids: np.ndarray = field(repr=False)
    input_edges: int
    dropped_self_loops: int
    dropped_duplicates: int

    @property
    def n_nodes(self) -> int:
        return int(self.indptr.shape[0] - 1)

    @property
    def n_edges(self) -> int:
        """Distinct directed non-loop edges stored in the adjacency."""
        return int(self.indices.shape[0])

    @property
    def out_degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, node: int) -> np.ndarray:
        return self.indices[self.indptr[node]:self.indptr[node + 1]]


@dataclass(frozen=True)
class DegreeStats:
    """Exact out-degree statistics of a graph.

    Means are exact rationals (integer sums over node count);
    ``undirected_mean`` counts each linked node pair once regardless of
    direction.  ``histogram[d]`` is the number of nodes with out-degree d.
    """

    n_nodes: int
    n_edges: int
    mean: Fraction
    second_moment: Fraction
    undirected_mean: Fraction
    max_degree: int
    histogram: np.ndarray = field(repr=False)

    def to_degree_model(self) -> DegreeModel:
        """Empirical degree model with exactly this histogram."""
        degrees = np.nonzero(self.histogram)[0]
        return DegreeModel.empirical(degrees, self.histogram[degrees])

    def as_dict(self) -> dict:
        return {
            "n_nodes": self.n_nodes,
            "n_edges": self.n_edges,
            "mean": float(self.mean),
            "mean_exact": str(self.mean),
            "second_moment": float(self.second_moment),
            "second_moment_exact": str(self.second_moment),
            "undirected_mean": float(self.undirected_mean),
            "undirected_mean_exact": str(self.undirected_mean),
            "max_degree": self.max_degree,
            "histogram": {
                str(d): int(self.histogram[d])
                for d in np.nonzero(self.histogram)[0]
            },
        }


# ---------------------------------------------------------------------------
# ingestion
# ---------------------------------------------------------------------------

def _graph_from_pairs(src: np.ndarray, dst: np.ndarray, input_edges: int) -> SocialGraph:
    orig_ids = np.unique(np.concatenate([src, dst]))
    n = int(orig_ids.shape[0])
    if n >= 1 << 31:
        raise InputError(f"graph too large for 32-bit ids: {n} nodes")
    si = np.searchsorted(orig_ids, src)
    di = np.searchsorted(orig_ids, dst)

    loops = si == di
    dropped_loops = int(loops.sum())
    si, di = si[~loops], di[~loops]

    packed = si * np.int64(n) + di
    packed_unique = np.unique(packed)
    dropped_dups = int(packed.shape[0] - packed_unique.shape[0])
    si = packed_unique // n
    di = packed_unique % n

    counts = np.bincount(si, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = di.astype(np.int32)
    for arr in (indptr, indices, orig_ids):
        arr.flags.writeable = False
    return SocialGraph(
        indptr=indptr,
        indices=indices,
        orig_ids=orig_ids,
        input_edges=input_edges,
        dropped_self_loops=dropped_loops,
        dropped_duplicates=dropped_dups,
    )


def load_edge_list(path) -> SocialGraph:
    """Parse a two-column directed edge list ('#' starts a comment)."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"edge list not found: {path}")
    src_list: list[int] = []
    dst_list: list[int] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise InputError(
                    f"{path}:{lineno}: expected two node ids, got {raw.strip()!r}"
                )
            try:
                src_list.append(int(parts[0]))
                dst_list.append(int(parts[1]))
            except ValueError:
                raise InputError(
                    f"{path}:{lineno}: non-integer node id in {raw.strip()!r}"
                ) from None
    if not src_list:
        raise InputError(f"{path}: empty edge list")
    src = np.array(src_list, dtype=np.int64)
    dst = np.array(dst_list, dtype=np.int64)
    if src.min() < 0 or dst.min() < 0:
        raise InputError(f"{path}: negative node ids are not supported")
    return _graph_from_pairs(src, dst, input_edges=int(src.shape[0]))


def degree_stats(graph: SocialGraph) -> DegreeStats:
    """Exact-arithmetic out-degree statistics."""
    degrees = graph.out_degrees
    n = graph.n_nodes
    total = int(degrees.sum())
    total_sq = int(np.dot(degrees, degrees))
    src = np.repeat(np.arange(n, dtype=np.int64), degrees)
    dst = graph.indices.astype(np.int64)
    lo = np.minimum(src, dst)
    hi = np.maximum(src, dst)
    undirected = int(np.unique(lo * np.int64(n) + hi).shape[0])
    return DegreeStats(
        n_nodes=n,
        n_edges=graph.n_edges,
        mean=Fraction(total, n),
        second_moment=Fraction(total_sq, n),
        undirected_mean=Fraction(2 * undirected, n),
        max_degree=int(degrees.max()) if n else 0,
        histogram=np.bincount(degrees),
    )


# ---------------------------------------------------------------------------
# binary cache
# ---------------------------------------------------------------------------

def save_cache(graph: SocialGraph, path) -> None:
    """Write the adjacency as a little-endian binary cache.

    Layout: magic "NWSGRAPH", uint32 version, uint64 node count, uint64
    edge count, uint32 out-degree per node, uint32 neighbor ids
    concatenated in node order.  Original ids are not stored; a reloaded
    cache is the same graph up to the dense relabeling.
    """
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<I", _CACHE_VERSION))
        fh.write(struct.pack("<Q", graph.n_nodes))
        fh.write(struct.pack("<Q", graph.n_edges))
        fh.write(graph.out_degrees.astype("<u4").tobytes())
        fh.write(graph.indices.astype("<u4").tobytes())


def load_cache(path) -> SocialGraph:
    """Read a cache written by ``save_cache``."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"graph cache not found: {path}")
    blob = path.read_bytes()
    head = len(_CACHE_MAGIC) + 4 + 8 + 8
    if len(blob) < head or blob[: len(_CACHE_MAGIC)] != _CACHE_MAGIC:
        raise InputError(f"{path}: not a graph cache (bad magic)")
    version, = struct.unpack_from("<I", blob, len(_CACHE_MAGIC))
    if version != _CACHE_VERSION:
        raise InputError(f"{path}: unsupported cache version {version}")
    n_nodes, = struct.unpack_from("<Q", blob, len(_CACHE_MAGIC) + 4)
    n_edges, = struct.unpack_from("<Q", blob, len(_CACHE_MAGIC) + 12)
    need = head + 4 * n_nodes + 4 * n_edges
    if len(blob) != need:
        raise InputError(f"{path}: truncated cache ({len(blob)} bytes, expected {need})")
    degrees = np.frombuffer(blob, dtype="<u4", count=n_nodes, offset=head)
    indices = np.frombuffer(blob, dtype="<u4", count=n_edges, offset=head + 4 * n_nodes)
    indptr = np.zeros(n_nodes + 1, dtype=np.int64)
    np.cumsum(degrees.astype(np.int64), out=indptr[1:])
    graph = SocialGraph(
        indptr=indptr,
        indices=indices.astype(np.int32),
        orig_ids=np.arange(n_nodes, dtype=np.int64),
        input_edges=int(n_edges),
        dropped_self_loops=0,
        dropped_duplicates=0,
    )
    for arr in (graph.indptr, graph.indices, graph.orig_ids):
        arr.flags.writeable = False
    return graph


def subsample(graph: SocialGraph, k: int, seed) -> SocialGraph:
    """Uniform node-induced subgraph with k nodes (for desk-scale runs).

    All k chosen nodes are kept, including those left isolated; edges
    survive when both endpoints were chosen.
    """
    n = graph.n_nodes
    if not 1 <= k <= n:
        raise InputError(f"subsample size must lie in [1, {n}], got {k}")
    rng = np.random.default_rng(seed)
    chosen = np.sort(rng.choice(n, size=k, replace=False))
    member = np.zeros(n, dtype=bool)
    member[chosen] = True
    src = np.repeat(np.arange(n, dtype=np.int64), graph.out_degrees)
    dst = graph.indices.astype(np.int64)
    keep = member[src] & member[dst]
    new_src = np.searchsorted(chosen, src[keep])
    new_dst = np.searchsorted(chosen, dst[keep])
    counts = np.bincount(new_src, minlength=k)
    indptr = np.zeros(k + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    indices = new_dst.astype(np.int32)
    orig_ids = graph.orig_ids[chosen].copy()
    for arr in (indptr, indices, orig_ids):
        arr.flags.writeable = False
    return SocialGraph(
        indptr=indptr,
        indices=indices,
        orig_ids=orig_ids,
        input_edges=int(keep.sum()),
        dropped_self_loops=0,
        dropped_duplicates=0,
    )


# ---------------------------------------------------------------------------
# simulation on the graph
# ---------------------------------------------------------------------------

def _init_nodes(init, n_nodes: int, gen: np.random.Generator):
    """Resolve initial copies: counts are placed on uniform random nodes."""
    x_given, y_given = init
    if np.isscalar(x_given) != np.isscalar(y_given):
        raise InputError("init must be two counts or two node arrays, not a mix")
    if np.isscalar(x_given):
        x0, y0 = int(x_given), int(y_given)
        if x0 < 0 or y0 < 0 or x0 + y0 < 1:
            raise InputError(f"initial counts must be nonnegative with a positive total, got {init}")
        x_nodes = gen.integers(0, n_nodes, size=x0).astype(np.int32)
        y_nodes = gen.integers(0, n_nodes, size=y0).astype(np.int32)
        return x_nodes, y_nodes
    x_nodes = np.asarray(x_given, dtype=np.int64)
    y_nodes = np.asarray(y_given, dtype=np.int64)
    if x_nodes.size + y_nodes.size < 1:
        raise InputError("need at least one initial copy")
    for arr in (x_nodes, y_nodes):
        if arr.size and (arr.min() < 0 or arr.max() >= n_nodes):
            raise InputError(f"initial node ids must lie in [0, {n_nodes})")
    return x_nodes.astype(np.int32), y_nodes.astype(np.int32)


def network_simulate(
    graph: SocialGraph,
    params: ModelParams,
    policy: WarningPolicy,
    stop: StopRule,
    seed,
    init=(0, 1),
    backend: str | None = None,
) -> SimulationTrace:
    """Run one path on an explicit graph.

    Copies sit at concrete nodes; a share reaches each out-neighbor of
    the sharing node independently.  ``params.degree_model`` is unused
    here — the graph provides the contact structure.  ``init`` gives
    (fake-tagged, real-tagged) counts, placed on uniformly drawn nodes
    from the run's own stream, or two explicit node-id arrays.
    """
    check_tag_probabilities(params, policy)
    ss = _seed_sequence(seed)
    kern = get_backend(backend)
    horizon = float("inf") if stop.horizon is None else float(stop.horizon)

    cap = stop.max_events if stop.max_events is not None else _INITIAL_CAP
    pool_cap = 1 << 12
    while True:
        bitgen = np.random.PCG64(ss)
        gen = np.random.Generator(bitgen)
        x_nodes, y_nodes = _init_nodes(init, graph.n_nodes, gen)
        total0 = int(x_nodes.size + y_nodes.size)
        pool_cap = max(pool_cap, 4 * total0)
        t_out = np.empty(cap)
        wake_out = np.empty(cap, dtype=np.uint8)
        tag_out = np.empty(cap, dtype=np.uint8)
        off_out = np.empty(cap, dtype=np.int64)
        x_out = np.empty(cap, dtype=np.int64)
        y_out = np.empty(cap, dtype=np.int64)
        x_pool = np.empty(pool_cap, dtype=np.int32)
        y_pool = np.empty(pool_cap, dtype=np.int32)
        n, extinct, hit_cap, overflow = kern.run_network(
            bitgen,
            graph.indptr, graph.indices,
            params.wake_rate, params.alpha_fake, params.alpha_real,
            policy.w, policy.b, policy.epsilon, params.eta, params.eta_c,
            x_nodes, y_nodes, horizon,
            t_out, wake_out, tag_out, off_out, x_out, y_out,
            x_pool, y_pool,
        )
        if overflow:
            if pool_cap >= 1 << 30:
                raise RuntimeError("copy pool exceeded the supported size")
            pool_cap *= 4
            continue
        if not hit_cap:
            break
        if cap >= _MAX_CAP:
            raise RuntimeError(f"run exceeded {_MAX_CAP} events before the horizon")
        cap *= 4

    if n == 0:
        raise InputError(
            "no event fits the stop rule (empty trace); increase the budget or horizon"
        )
    return SimulationTrace(
        t=t_out[:n].copy(),
        waker_is_x=wake_out[:n].copy(),
        tag_fake=tag_out[:n].copy(),
        offspring=off_out[:n].copy(),
        x=x_out[:n].copy(),
        y=y_out[:n].copy(),
        x0=int(x_nodes.size),
        y0=int(y_nodes.size),
        mode="network",
        seed=_seed_label(ss),
        extinction_epoch=int(n) if extinct else None,
        params=params,
        policy=policy,
    )
