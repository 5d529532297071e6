"""Graph algorithms on conflict graphs.

Everything here exploits the inductive structure exposed by the sensitivity
elimination order: each vertex's later neighbors are coverable by a bounded
number of cliques, which drives the coloring and independent-set guarantees.
Exact brute-force counterparts live at the bottom for use as test oracles on
small graphs; they deliberately share no code with the fast paths.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .conflict import ConflictGraph
from .errors import InternalError, UsageError
from .model import validate_subset


@dataclass(frozen=True)
class Coloring:
    """A proper coloring: color[v] is a 0-based color index."""

    color: dict[int, int]
    num_colors: int

    def classes(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.num_colors)]
        for v in sorted(self.color):
            out[self.color[v]].append(v)
        return out


@dataclass(frozen=True)
class CliqueCover:
    """A partition of a vertex set into cliques."""

    parts: tuple[tuple[int, ...], ...]

    @property
    def size(self) -> int:
        return len(self.parts)


def simplicial_order(g: ConflictGraph) -> tuple[int, ...]:
    """The elimination order the graph was built with."""
    return g.order


def inductiveness(g: ConflictGraph, s: Iterable[int] | None = None) -> int:
    """Max number of later neighbors over the order, restricted to s."""
    ss = set(range(g.n)) if s is None else set(validate_subset(s, g.n))
    best = 0
    for v in ss:
        best = max(best, sum(1 for u in g.post_neighbors(v) if u in ss))
    return best


def postneighbor_clique_cover(g: ConflictGraph, v: int) -> CliqueCover:
    """Greedy clique cover of v's later neighbors.

    Repeatedly seeds a clique with the uncovered later neighbor of smallest
    sensitivity, then absorbs every remaining uncovered later neighbor that is
    adjacent to all current members, scanning in sensitivity order.
    """
    if not 0 <= v < g.n:
        raise UsageError(f"vertex id out of range: {v}")
    post = sorted(g.post_neighbors(v), key=lambda u: (g.sens[u], u))
    uncovered = list(post)
    parts: list[tuple[int, ...]] = []
    while uncovered:
        seed = uncovered.pop(0)
        clique = [seed]
        rest = []
        for u in uncovered:
            if all(g.adjacent(u, w) for w in clique):
                clique.append(u)
            else:
                rest.append(u)
        uncovered = rest
        parts.append(tuple(clique))
    for part in parts:  # each part must really be a clique
        for a_i, a in enumerate(part):
            for b in part[a_i + 1 :]:
                if not g.adjacent(a, b):
                    raise InternalError("clique cover produced a non-clique part")
    return CliqueCover(parts=tuple(parts))


def max_clique_cover_size(g: ConflictGraph, s: Iterable[int] | None = None) -> int:
    """Largest greedy post-neighbor cover over the given vertices."""
    ss = range(g.n) if s is None else validate_subset(s, g.n)
    return max((postneighbor_clique_cover(g, v).size for v in ss), default=0)


def greedy_color(
    g: ConflictGraph, s: Iterable[int] | None = None, order: Sequence[int] | None = None
) -> Coloring:
    """First-fit coloring along the given order (default: elimination order),
    restricted to the vertex set s."""
    ss = set(range(g.n)) if s is None else set(validate_subset(s, g.n))
    seq = g.order if order is None else list(order)
    seen = [v for v in seq if v in ss]
    if len(seen) != len(ss):
        raise UsageError("order must cover the vertex set")
    color: dict[int, int] = {}
    for v in seen:
        used = {color[u] for u in g.neighbors[v] if u in color}
        c = 0
        while c in used:
            c += 1
        color[v] = c
    num = max(color.values()) + 1 if color else 0
    return Coloring(color=color, num_colors=num)


def online_color(stream: Iterable[tuple[int, Iterable[int]]]) -> Coloring:
    """First-fit coloring of an adjacency stream.

    Each stream element is (vertex id, ids of earlier-arrived neighbors).
    No lookahead: each vertex takes the smallest color unused among its
    already-colored neighbors.
    """
    color: dict[int, int] = {}
    for v, prev in stream:
        if v in color:
            raise UsageError(f"vertex {v} arrived twice")
        used = set()
        for u in prev:
            if u not in color:
                raise UsageError(f"vertex {v} lists unseen neighbor {u}")
            used.add(color[u])
        c = 0
        while c in used:
            c += 1
        color[v] = c
    num = max(color.values()) + 1 if color else 0
    return Coloring(color=color, num_colors=num)


@dataclass(frozen=True)
class LocalRatioResult:
    selected: frozenset[int]
    stacked: tuple[int, ...]
    k_observed: int


def local_ratio_mwis(
    g: ConflictGraph,
    weights: Sequence[float] | dict[int, float],
    s: Iterable[int] | None = None,
) -> LocalRatioResult:
    """Two-phase local-ratio maximum-weight independent set.

    Forward pass walks the elimination order; every vertex with positive
    residual weight is stacked and its residual is subtracted from itself and
    all its later neighbors.  The backward pass pops the stack and keeps any
    vertex with no selected neighbor.  The output weight is at least OPT / k,
    where k is the largest greedy clique-cover size over stacked vertices
    (reported as k_observed, at least 1).
    """
    ss = set(range(g.n)) if s is None else set(validate_subset(s, g.n))
    if isinstance(weights, dict):
        w = {v: float(weights.get(v, 0.0)) for v in ss}
    else:
        if len(weights) != g.n:
            raise UsageError("weights must cover every vertex")
        w = {v: float(weights[v]) for v in ss}
    if any(x < 0 for x in w.values()):
        raise UsageError("weights must be nonnegative")

    residual = dict(w)
    stack: list[int] = []
    k_observed = 1
    for v in g.order:
        if v not in ss or residual[v] <= 0.0:
            continue
        rv = residual[v]
        stack.append(v)
        cover = postneighbor_clique_cover(g, v)
        in_s = sum(1 for part in cover.parts if any(u in ss for u in part))
        k_observed = max(k_observed, max(in_s, 1))
        residual[v] = 0.0
        for u in g.post_neighbors(v):
            if u in ss:
                residual[u] -= rv

    selected: set[int] = set()
    for v in reversed(stack):
        if not any(u in selected for u in g.neighbors[v]):
            selected.add(v)
    return LocalRatioResult(
        selected=frozenset(selected), stacked=tuple(stack), k_observed=k_observed
    )


# ----------------------------------------------------------------------
# exact oracles for small graphs (test reference paths)


def brute_force_mwis(
    g: ConflictGraph,
    weights: Sequence[float] | dict[int, float],
    s: Iterable[int] | None = None,
) -> tuple[float, frozenset[int]]:
    """Exact maximum-weight independent set by memoized branch and bound.
    Usable up to roughly 24 vertices."""
    verts = sorted(set(range(g.n)) if s is None else set(validate_subset(s, g.n)))
    if len(verts) > 24:
        raise UsageError("brute_force_mwis is limited to 24 vertices")
    pos = {v: i for i, v in enumerate(verts)}
    if isinstance(weights, dict):
        w = [float(weights.get(v, 0.0)) for v in verts]
    else:
        w = [float(weights[v]) for v in verts]
    adj_mask = [0] * len(verts)
    for v in verts:
        for u in g.neighbors[v]:
            if u in pos:
                adj_mask[pos[v]] |= 1 << pos[u]

    memo: dict[int, tuple[float, int]] = {}

    def rec(avail: int) -> tuple[float, int]:
        if avail == 0:
            return 0.0, 0
        if avail in memo:
            return memo[avail]
        i = (avail & -avail).bit_length() - 1
        skip_w, skip_set = rec(avail & ~(1 << i))
        take_w, take_set = rec(avail & ~((1 << i) | adj_mask[i]))
        take_w += w[i]
        take_set |= 1 << i
        out = (take_w, take_set) if take_w >= skip_w else (skip_w, skip_set)
        memo[avail] = out
        return out

    best_w, best_mask = rec((1 << len(verts)) - 1)
    chosen = frozenset(verts[i] for i in range(len(verts)) if best_mask >> i & 1)
    return best_w, chosen


def brute_force_chromatic(g: ConflictGraph, s: Iterable[int] | None = None) -> int:
    """Exact chromatic number by backtracking; up to about 14 vertices."""
    verts = sorted(set(range(g.n)) if s is None else set(validate_subset(s, g.n)))
    if len(verts) > 14:
        raise UsageError("brute_force_chromatic is limited to 14 vertices")
    if not verts:
        return 0
    vset = set(verts)
    nbrs = {v: [u for u in g.neighbors[v] if u in vset] for v in verts}
    # order by degree descending helps pruning
    verts.sort(key=lambda v: -len(nbrs[v]))

    def colorable(k: int) -> bool:
        assignment: dict[int, int] = {}

        def place(i: int) -> bool:
            if i == len(verts):
                return True
            v = verts[i]
            used = {assignment[u] for u in nbrs[v] if u in assignment}
            cap = min(k, i + 1)  # symmetry break: at most one fresh color
            for c in range(cap):
                if c not in used:
                    assignment[v] = c
                    if place(i + 1):
                        return True
                    del assignment[v]
            return False

        return place(0)

    k = 1
    while not colorable(k):
        k += 1
    return k


def brute_force_clique_cover(g: ConflictGraph, s: Iterable[int]) -> int:
    """Minimum clique cover of the induced subgraph, via coloring the
    complement.  Up to about 14 vertices."""
    verts = sorted(set(validate_subset(s, g.n)))
    if len(verts) > 14:
        raise UsageError("brute_force_clique_cover is limited to 14 vertices")
    if not verts:
        return 0
    comp_neighbors: list[tuple[int, ...]] = []
    index = {v: i for i, v in enumerate(verts)}
    for v in verts:
        comp_neighbors.append(
            tuple(index[u] for u in verts if u != v and not g.adjacent(u, v))
        )
    comp = ConflictGraph(
        n=len(verts),
        neighbors=tuple(comp_neighbors),
        f=g.f,
        order=tuple(range(len(verts))),
        uniform_mode=g.uniform_mode,
        sens=tuple(g.sens[v] for v in verts),
    )
    return brute_force_chromatic(comp)


def verify_proper_coloring(g: ConflictGraph, coloring: Coloring) -> bool:
    for v, c in coloring.color.items():
        for u in g.neighbors[v]:
            if u in coloring.color and coloring.color[u] == c:
                return False
    return True


def random_maximal_independent_set(g: ConflictGraph, rng) -> list[int]:
    """Greedy maximal independent set over a uniformly random vertex order."""
    chosen: set[int] = set()
    for v in rng.permutation(g.n):
        v = int(v)
        if not any(u in chosen for u in g.neighbors[v]):
            chosen.add(v)
    return sorted(chosen)
