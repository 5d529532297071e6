"""Conflict graph construction over link instances.

Two links conflict when they are too close relative to their sensitivities,
scaled by a sublinear function of the sensitivity diversity.  The family of
graphs produced here sandwiches physical feasibility: the f == 1 graph is a
subgraph of every other member, and independent sets of suitably scaled
members admit feasibility certificates under oblivious power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import PreconditionError, UsageError
from .model import Instance, validate_subset

_BISECT_ABS_TOL = 1e-9
_ITERATION_CAP = 1_000_000
_RANGE_CAP = 1e300


@dataclass(frozen=True)
class SublinearF:
    """A nondecreasing sublinear scaling function on [1, oo).

    Kinds:
      one      f(x) = 1
      power    f(x) = gamma * x**delta          (0 < delta < 1)
      polylog  f(x) = gamma * max(log2(x)**t, 1)
      hatlog   f(x) = gamma * max(log2(x)**(2/(alpha-m)), 1)

    gamma >= 1 is required for every kind except 'one' so that f(x) >= 1 on
    the whole domain.  The hatlog exponent depends on the ambient alpha and m
    and is resolved at evaluation time.
    """

    kind: str
    gamma: float = 1.0
    delta: float | None = None
    t: float | None = None

    def __post_init__(self):
        if self.kind == "one":
            if self.gamma != 1.0:
                raise UsageError("kind 'one' is the constant function, gamma must be 1")
        elif self.kind == "power":
            if not (self.gamma >= 1.0 and math.isfinite(self.gamma)):
                raise UsageError("power: gamma must be >= 1 and finite")
            if self.delta is None or not (0.0 < self.delta < 1.0):
                raise UsageError("power: delta must lie strictly between 0 and 1")
        elif self.kind == "polylog":
            if not (self.gamma >= 1.0 and math.isfinite(self.gamma)):
                raise UsageError("polylog: gamma must be >= 1 and finite")
            if self.t is None or not (self.t > 0.0 and math.isfinite(self.t)):
                raise UsageError("polylog: exponent t must be positive")
        elif self.kind == "hatlog":
            if not (self.gamma >= 1.0 and math.isfinite(self.gamma)):
                raise UsageError("hatlog: gamma must be >= 1 and finite")
        else:
            raise UsageError(f"unknown sublinear kind {self.kind!r}")

    def _exponent(self, alpha: float | None, m: float | None) -> float:
        if self.kind == "polylog":
            return float(self.t)
        if alpha is None or m is None:
            raise UsageError("hatlog needs alpha and m to resolve its exponent")
        if not alpha > m:
            raise UsageError("hatlog needs alpha > m")
        return 2.0 / (alpha - m)

    def evaluate(self, x: float, alpha: float | None = None, m: float | None = None) -> float:
        if x < 1.0:
            raise UsageError("sublinear functions are defined on [1, oo)")
        if self.kind == "one":
            return 1.0
        if self.kind == "power":
            return self.gamma * x ** self.delta
        e = self._exponent(alpha, m)
        lg = math.log2(x) if x > 1.0 else 0.0
        return self.gamma * max(lg ** e if lg > 0 else 0.0, 1.0)

    def evaluate_array(
        self, x: np.ndarray, alpha: float | None = None, m: float | None = None
    ) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if np.any(x < 1.0):
            raise UsageError("sublinear functions are defined on [1, oo)")
        if self.kind == "one":
            return np.ones_like(x)
        if self.kind == "power":
            return self.gamma * x ** self.delta
        e = self._exponent(alpha, m)
        with np.errstate(divide="ignore"):
            lg = np.log2(x)
        return self.gamma * np.maximum(lg ** e, 1.0)

    def with_gamma(self, gamma: float) -> "SublinearF":
        return SublinearF(kind=self.kind, gamma=gamma, delta=self.delta, t=self.t)

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind, "gamma": self.gamma}
        if self.delta is not None:
            out["delta"] = self.delta
        if self.t is not None:
            out["t"] = self.t
        return out

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "SublinearF":
        return cls(
            kind=data.get("kind", "one"),
            gamma=float(data.get("gamma", 1.0)),
            delta=float(data["delta"]) if data.get("delta") is not None else None,
            t=float(data["t"]) if data.get("t") is not None else None,
        )

    def describe(self) -> str:
        if self.kind == "one":
            return "1"
        if self.kind == "power":
            return f"{self.gamma:g}*x^{self.delta:g}"
        if self.kind == "polylog":
            return f"{self.gamma:g}*log^{self.t:g}(x)"
        return f"{self.gamma:g}*log^(2/(a-m))(x)"


F_ONE = SublinearF(kind="one")


def f_star(
    f: SublinearF, x: float, alpha: float | None = None, m: float | None = None
) -> int:
    """Iterated-application count of f needed to drop x below f's fixed-point
    threshold.  Returns 1 when x is already at or below the threshold.

    The threshold is one plus the largest solution of f(y) = y on [1, oo),
    located by doubling and bisection and rounded conservatively upward.
    """
    if not (math.isfinite(x) and x >= 1.0):
        raise UsageError("f_star needs a finite argument x >= 1")
    x0 = _fixed_point_threshold(f, alpha, m)
    if x <= x0:
        return 1
    count = 0
    y = x
    while y > x0:
        y_next = f.evaluate(y, alpha, m)
        count += 1
        if count > _ITERATION_CAP:
            raise UsageError("f_star failed to converge; f is not usefully sublinear")
        if y_next >= y and y > x0:
            raise UsageError("f is not sublinear at scale; f_star diverges")
        y = y_next
    return max(count, 1)


def _fixed_point_threshold(
    f: SublinearF, alpha: float | None = None, m: float | None = None
) -> float:
    """One plus the supremum of {y >= 1 : f(y) >= y}."""
    if f.evaluate(1.0, alpha, m) < 1.0:
        return 2.0
    hi = 2.0
    while f.evaluate(hi, alpha, m) >= hi:
        hi *= 2.0
        if hi > _RANGE_CAP:
            raise UsageError("f is not sublinear on [1, oo)")
    lo = max(1.0, hi / 2.0)
    while hi - lo > _BISECT_ABS_TOL:
        mid = 0.5 * (lo + hi)
        if f.evaluate(mid, alpha, m) >= mid:
            lo = mid
        else:
            hi = mid
    return hi + 1.0


@dataclass(frozen=True)
class ConflictGraph:
    """A conflict graph over the links of one instance.

    neighbors[i] is a sorted tuple of ids adjacent to i.  order is the
    elimination order (nondecreasing sensitivity, ties by id); sens keeps the
    sensitivities the order was derived from so graph algorithms can seed
    cliques without the instance at hand.
    """

    n: int
    neighbors: tuple[tuple[int, ...], ...]
    f: SublinearF
    order: tuple[int, ...]
    uniform_mode: bool
    sens: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "_nbr_sets", tuple(frozenset(nb) for nb in self.neighbors)
        )
        rank = [0] * self.n
        for pos, v in enumerate(self.order):
            rank[v] = pos
        object.__setattr__(self, "_rank", tuple(rank))

    def adjacent(self, i: int, j: int) -> bool:
        return j in self._nbr_sets[i]

    def degree(self, i: int) -> int:
        return len(self.neighbors[i])

    def rank(self, i: int) -> int:
        """Position of link i in the elimination order."""
        return self._rank[i]

    def post_neighbors(self, v: int) -> list[int]:
        """Neighbors of v that come after v in the elimination order."""
        rv = self._rank[v]
        return [u for u in self.neighbors[v] if self._rank[u] > rv]

    def edge_count(self) -> int:
        return sum(len(nb) for nb in self.neighbors) // 2

    def subgraph_neighbors(self, s: Sequence[int]) -> dict[int, list[int]]:
        ss = set(s)
        return {v: [u for u in self.neighbors[v] if u in ss] for v in ss}

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "n": self.n,
            "f": self.f.to_json_dict(),
            "uniform_mode": self.uniform_mode,
            "order": list(self.order),
            "adjacency": [list(nb) for nb in self.neighbors],
        }


def sensitivity_order(sens: np.ndarray) -> tuple[int, ...]:
    """Ids sorted by nondecreasing sensitivity, ties broken by id."""
    n = len(sens)
    return tuple(int(v) for v in np.lexsort((np.arange(n), np.asarray(sens))))


def build_graph(
    inst: Instance, f: SublinearF = F_ONE, uniform_mode: bool = False
) -> ConflictGraph:
    """Build the conflict graph of inst under scaling function f.

    Default rule: links i, j are adjacent iff
        d(s_i, r_j) * d(s_j, r_i) < sens_i * sens_j * f(diversity of {i, j}).
    Uniform mode replaces the product test by a single-distance test
        d(i, j) < min(sens_i, sens_j) * f(diversity),
    intended for instances with near-uniform sensitivities.

    Ties (equality) are non-edges.  Overflowing products fall back to a log
    space comparison so enormous length ranges still build correctly.
    """
    n = inst.n
    alpha, m = inst.metric.alpha, inst.metric.m
    sens = inst.sens
    if n == 0:
        return ConflictGraph(0, (), f, (), uniform_mode, ())

    ratio = np.maximum.outer(sens, sens) / np.minimum.outer(sens, sens)
    np.fill_diagonal(ratio, 1.0)
    fvals = f.evaluate_array(ratio, alpha, m)

    with np.errstate(over="ignore"):
        if uniform_mode:
            lhs = inst.dmin
            rhs = np.minimum.outer(sens, sens) * fvals
        else:
            lhs = inst.dsr * inst.dsr.T
            rhs = np.outer(sens, sens) * fvals
        edges = lhs < rhs

    overflow = ~np.isfinite(lhs) | ~np.isfinite(rhs)
    np.fill_diagonal(overflow, False)
    if np.any(overflow):
        with np.errstate(divide="ignore"):
            if uniform_mode:
                log_lhs = np.log(inst.dmin)
                log_rhs = np.log(np.minimum.outer(sens, sens)) + np.log(fvals)
            else:
                log_lhs = np.log(inst.dsr) + np.log(inst.dsr.T)
                log_rhs = np.log(sens)[:, None] + np.log(sens)[None, :] + np.log(fvals)
        edges = np.where(overflow, log_lhs < log_rhs, edges)

    np.fill_diagonal(edges, False)
    neighbors = tuple(
        tuple(int(j) for j in np.flatnonzero(edges[i])) for i in range(n)
    )
    return ConflictGraph(
        n=n,
        neighbors=neighbors,
        f=f,
        order=sensitivity_order(sens),
        uniform_mode=uniform_mode,
        sens=tuple(float(v) for v in sens),
    )


def is_independent(g: ConflictGraph, s: Iterable[int]) -> bool:
    ss = validate_subset(s, g.n)
    sset = set(ss)
    for v in ss:
        if sset.intersection(g._nbr_sets[v]):
            return False
    return True


def measure_tightness(
    inst: Instance, f_hi: SublinearF, s: Iterable[int]
) -> dict[str, Any]:
    """Color G_hi restricted to a G_lo-independent set and compare against the
    iterated-f bound on its sensitivity diversity.

    Returns chi_hi (greedy colors used, sensitivity order), fstar_bound, and
    their ratio.  Precondition: s is independent in the f == 1 graph.
    """
    from .graphalg import greedy_color

    ss = validate_subset(s, inst.n)
    if not ss:
        raise UsageError("tightness of an empty set is undefined")
    g_lo = build_graph(inst, F_ONE)
    if not is_independent(g_lo, ss):
        raise PreconditionError("set is not independent in the baseline conflict graph")
    g_hi = build_graph(inst, f_hi)
    coloring = greedy_color(g_hi, ss)
    delta = inst.sensitivity_diversity(ss)
    bound = f_star(f_hi, delta, inst.metric.alpha, inst.metric.m)
    return {
        "chi_hi": coloring.num_colors,
        "fstar_bound": bound,
        "delta": delta,
        "ratio": coloring.num_colors / bound,
    }
