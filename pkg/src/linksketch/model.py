"""Core data model: metric contexts, links, and immutable link instances.

An instance is a set of directed communication links embedded either in a
euclidean space (1, 2 or 3 dimensions) or in an explicit finite metric given
by a distance matrix.  Each link has a sender node, a receiver node, an SIR
threshold beta, a weight, and an additive noise term.  All geometry queries
go through the instance so distance matrices can be memoized once and shared.
"""

from __future__ import annotations

import json
import math
import threading
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import PreconditionError, UsageError

# Explicit-matrix validation: full cubic triangle check up to this many nodes,
# sampled triples beyond.
_EXACT_TRIANGLE_LIMIT = 512
_SAMPLED_TRIPLES = 100_000
_TRIANGLE_RTOL = 1e-9

# Sensitivity floor multiplier: nothing below four times the link length.
SENSITIVITY_FLOOR_FACTOR = 4.0

# Largest admissible coordinate magnitude: squared differences must stay
# finite in distance computations (up to three dimensions).
COORD_CAP = 1e153


@dataclass(frozen=True)
class MetricContext:
    """Ambient metric parameters for an instance.

    kind is 'euclidean' (nodes are coordinate tuples) or 'matrix' (distances
    come from an explicit symmetric matrix).  alpha is the path-loss exponent
    and m the declared doubling dimension; alpha > m is required throughout.
    The doubling dimension is taken on trust for matrix metrics, never
    inferred.  noise_model records whether any link carries positive noise.
    """

    kind: str
    alpha: float
    m: float
    dim: int | None = None
    noise_model: str = "zero"

    def __post_init__(self):
        if self.kind not in ("euclidean", "matrix"):
            raise UsageError(f"unknown metric kind {self.kind!r}")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise UsageError("alpha must be a positive finite real")
        if not (self.m > 0 and math.isfinite(self.m)):
            raise UsageError("m must be a positive finite real")
        if not self.alpha > self.m:
            raise UsageError(
                f"alpha must exceed the doubling dimension (alpha={self.alpha}, m={self.m})"
            )
        if self.kind == "euclidean":
            if self.dim not in (1, 2, 3):
                raise UsageError("euclidean metrics need dim in {1, 2, 3}")
            if float(self.dim) != self.m:
                raise UsageError("euclidean metrics require m == dim")
        if self.noise_model not in ("zero", "per-link"):
            raise UsageError(f"unknown noise model {self.noise_model!r}")


@dataclass(frozen=True)
class Link:
    """One directed link: sender node index, receiver node index, threshold,
    weight and additive noise at the receiver."""

    id: int
    s: int
    r: int
    beta: float
    weight: float = 1.0
    noise: float = 0.0

    def __post_init__(self):
        if self.beta < 1.0 or not math.isfinite(self.beta):
            raise UsageError(f"link {self.id}: beta must be >= 1 and finite")
        if self.weight < 0.0 or not math.isfinite(self.weight):
            raise UsageError(f"link {self.id}: weight must be >= 0 and finite")
        if self.noise < 0.0 or not math.isfinite(self.noise):
            raise UsageError(f"link {self.id}: noise must be >= 0 and finite")


def _validate_matrix(dmat: np.ndarray, rng_seed: int = 0) -> None:
    """Check symmetry, zero diagonal and the triangle inequality.

    Exact cubic sweep for small node counts, sampled triples above the limit.
    Tolerance on the triangle inequality is relative (1e-9).
    """
    n = dmat.shape[0]
    if dmat.ndim != 2 or dmat.shape[0] != dmat.shape[1]:
        raise UsageError("distance matrix must be square")
    if not np.all(np.isfinite(dmat)):
        raise UsageError("distance matrix entries must be finite")
    if np.any(dmat < 0):
        raise UsageError("distance matrix entries must be nonnegative")
    if np.any(np.diag(dmat) != 0.0):
        raise UsageError("distance matrix must have a zero diagonal")
    if not np.array_equal(dmat, dmat.T):
        raise UsageError("distance matrix must be symmetric")
    if n <= _EXACT_TRIANGLE_LIMIT:
        for k in range(n):
            through_k = dmat[:, k, None] + dmat[None, k, :]
            if np.any(dmat > through_k * (1.0 + _TRIANGLE_RTOL)):
                raise UsageError("distance matrix violates the triangle inequality")
    else:
        rng = np.random.default_rng(rng_seed)
        i = rng.integers(0, n, _SAMPLED_TRIPLES)
        j = rng.integers(0, n, _SAMPLED_TRIPLES)
        k = rng.integers(0, n, _SAMPLED_TRIPLES)
        if np.any(dmat[i, j] > (dmat[i, k] + dmat[k, j]) * (1.0 + _TRIANGLE_RTOL)):
            raise UsageError("distance matrix violates the triangle inequality (sampled)")


class Instance:
    """An immutable set of links over a shared metric.

    Distance matrices between link endpoints are computed lazily on first use
    and cached behind a lock, so instances are safe to share across threads.
    Mutation is not supported; derive new instances instead.
    """

    def __init__(
        self,
        metric: MetricContext,
        links: Sequence[Link],
        nodes: Sequence[Sequence[float]] | np.ndarray | None = None,
        dmatrix: Sequence[Sequence[float]] | np.ndarray | None = None,
        sensitivity_floor: bool = True,
        provenance: dict[str, Any] | None = None,
    ):
        self.metric = metric
        self.links = tuple(links)
        self.sensitivity_floor = bool(sensitivity_floor)
        self.provenance = dict(provenance) if provenance else None

        ids = [lk.id for lk in self.links]
        if ids != list(range(len(ids))):
            raise UsageError("link ids must be exactly 0..n-1 in order")

        if metric.kind == "euclidean":
            if nodes is None:
                raise UsageError("euclidean instances need a node coordinate array")
            arr = np.asarray(nodes, dtype=float)
            if arr.ndim == 1:
                arr = arr.reshape(-1, 1)
            if arr.ndim != 2 or arr.shape[1] != metric.dim:
                raise UsageError(f"node coordinates must be {metric.dim}-dimensional")
            if not np.all(np.isfinite(arr)):
                raise UsageError("node coordinates must be finite")
            if arr.size and float(np.max(np.abs(arr))) > COORD_CAP:
                raise UsageError(
                    f"node coordinates must not exceed {COORD_CAP:g} in magnitude"
                )
            self.nodes = arr
            self.nodes.setflags(write=False)
            self.dmatrix = None
            n_nodes = arr.shape[0]
        elif metric.kind == "matrix":
            if dmatrix is None:
                raise UsageError("matrix instances need an explicit distance matrix")
            dm = np.asarray(dmatrix, dtype=float)
            _validate_matrix(dm)
            self.nodes = None
            self.dmatrix = dm
            self.dmatrix.setflags(write=False)
            n_nodes = dm.shape[0]
        else:  # pragma: no cover - MetricContext already rejects this
            raise UsageError(f"unknown metric kind {metric.kind!r}")

        for lk in self.links:
            if not (0 <= lk.s < n_nodes and 0 <= lk.r < n_nodes):
                raise UsageError(f"link {lk.id}: node index out of range")

        noisy = any(lk.noise > 0 for lk in self.links)
        expected = "per-link" if noisy else "zero"
        if metric.noise_model != expected:
            # Rebuild the frozen context rather than erroring: the noise model
            # is derived from the links, not independent data.
            self.metric = MetricContext(
                kind=metric.kind,
                alpha=metric.alpha,
                m=metric.m,
                dim=metric.dim,
                noise_model=expected,
            )

        self._lengths = np.array(
            [self.node_distance(lk.s, lk.r) for lk in self.links], dtype=float
        )
        if len(self.links) and not np.all(self._lengths > 0):
            bad = int(np.argmin(self._lengths))
            raise UsageError(f"link {bad}: sender and receiver coincide (zero length)")
        self._betas = np.array([lk.beta for lk in self.links], dtype=float)
        self._weights = np.array([lk.weight for lk in self.links], dtype=float)
        self._noises = np.array([lk.noise for lk in self.links], dtype=float)

        exact = self._betas ** (1.0 / self.metric.alpha) * self._lengths
        if self.sensitivity_floor:
            self._sens = np.maximum(exact, SENSITIVITY_FLOOR_FACTOR * self._lengths)
        else:
            self._sens = exact

        self._lock = threading.Lock()
        self._dsr: np.ndarray | None = None
        self._dss: np.ndarray | None = None
        self._drr: np.ndarray | None = None
        self._dmin: np.ndarray | None = None

    # ------------------------------------------------------------------
    # basic accessors

    @property
    def n(self) -> int:
        return len(self.links)

    @property
    def alpha(self) -> float:
        return self.metric.alpha

    @property
    def lengths(self) -> np.ndarray:
        return self._lengths

    @property
    def betas(self) -> np.ndarray:
        return self._betas

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    @property
    def noises(self) -> np.ndarray:
        return self._noises

    @property
    def sens(self) -> np.ndarray:
        """Per-link sensitivity: beta^(1/alpha) * length, floored at four
        times the length unless the floor is disabled."""
        return self._sens

    def node_distance(self, u: int, v: int) -> float:
        if self.nodes is not None:
            return float(np.linalg.norm(self.nodes[u] - self.nodes[v]))
        return float(self.dmatrix[u, v])

    # ------------------------------------------------------------------
    # memoized endpoint distance matrices

    def _cross(self, a_idx: np.ndarray, b_idx: np.ndarray) -> np.ndarray:
        if self.nodes is not None:
            a = self.nodes[a_idx]
            b = self.nodes[b_idx]
            diff = a[:, None, :] - b[None, :, :]
            return np.sqrt(np.sum(diff * diff, axis=2))
        return self.dmatrix[np.ix_(a_idx, b_idx)]

    def _ensure_matrices(self) -> None:
        if self._dmin is not None:
            return
        with self._lock:
            if self._dmin is not None:
                return
            s_idx = np.array([lk.s for lk in self.links], dtype=int)
            r_idx = np.array([lk.r for lk in self.links], dtype=int)
            dsr = self._cross(s_idx, r_idx)
            dss = self._cross(s_idx, s_idx)
            drr = self._cross(r_idx, r_idx)
            dmin = np.minimum(np.minimum(dss, drr), np.minimum(dsr, dsr.T))
            self._dsr, self._dss, self._drr, self._dmin = dsr, dss, drr, dmin

    @property
    def dsr(self) -> np.ndarray:
        """Matrix D with D[i, j] = d(sender of i, receiver of j)."""
        self._ensure_matrices()
        return self._dsr

    @property
    def dmin(self) -> np.ndarray:
        """Matrix of minimum distances over the four endpoint pairs."""
        self._ensure_matrices()
        return self._dmin

    # ------------------------------------------------------------------
    # public geometry queries

    def _check_pair(self, i: int, j: int) -> None:
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise UsageError(f"link id out of range: ({i}, {j})")
        if i == j:
            raise UsageError("distance queries need two distinct links")

    def distance_asym(self, i: int, j: int) -> float:
        """d(sender of i, receiver of j).  Not symmetric in general."""
        self._check_pair(i, j)
        return float(self.dsr[i, j])

    def distance_min(self, i: int, j: int) -> float:
        """Minimum distance over the four endpoint pairs of links i and j."""
        self._check_pair(i, j)
        return float(self.dmin[i, j])

    def sensitivity(self, i: int) -> float:
        if not 0 <= i < self.n:
            raise UsageError(f"link id out of range: {i}")
        return float(self._sens[i])

    def sensitivity_diversity(self, subset: Iterable[int] | None = None) -> float:
        """Ratio of the largest to the smallest sensitivity over the subset
        (whole instance when subset is None)."""
        if subset is None:
            vals = self._sens
        else:
            idx = _as_index_array(subset, self.n)
            vals = self._sens[idx]
        if vals.size == 0:
            raise UsageError("sensitivity diversity of an empty set is undefined")
        return float(np.max(vals) / np.min(vals))

    # ------------------------------------------------------------------
    # serialization

    def to_json_dict(self) -> dict[str, Any]:
        metric: dict[str, Any] = {
            "kind": self.metric.kind,
            "alpha": self.metric.alpha,
            "m": self.metric.m,
        }
        if self.metric.kind == "euclidean":
            metric["dim"] = self.metric.dim
        out: dict[str, Any] = {"metric": metric}
        if self.nodes is not None:
            out["nodes"] = [[float(x) for x in row] for row in self.nodes]
        else:
            out["dmatrix"] = [[float(x) for x in row] for row in self.dmatrix]
        out["links"] = [
            {
                "s": lk.s,
                "r": lk.r,
                "beta": lk.beta,
                "weight": lk.weight,
                "noise": lk.noise,
            }
            for lk in self.links
        ]
        if not self.sensitivity_floor:
            out["sensitivity_floor"] = False
        if self.provenance is not None:
            out["provenance"] = self.provenance
        return out

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_json_dict(), indent=indent, sort_keys=True)

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "Instance":
        try:
            md = data["metric"]
            metric = MetricContext(
                kind=md["kind"],
                alpha=float(md["alpha"]),
                m=float(md["m"]),
                dim=int(md["dim"]) if "dim" in md and md["dim"] is not None else None,
            )
            links = [
                Link(
                    id=i,
                    s=int(ld["s"]),
                    r=int(ld["r"]),
                    beta=float(ld["beta"]),
                    weight=float(ld.get("weight", 1.0)),
                    noise=float(ld.get("noise", 0.0)),
                )
                for i, ld in enumerate(data["links"])
            ]
        except KeyError as exc:
            raise UsageError(f"instance JSON missing field: {exc}") from exc
        return cls(
            metric=metric,
            links=links,
            nodes=data.get("nodes"),
            dmatrix=data.get("dmatrix"),
            sensitivity_floor=bool(data.get("sensitivity_floor", True)),
            provenance=data.get("provenance"),
        )

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"invalid instance JSON: {exc}") from exc
        return cls.from_json_dict(data)

    def __repr__(self) -> str:
        return (
            f"Instance(n={self.n}, kind={self.metric.kind!r}, "
            f"alpha={self.metric.alpha}, m={self.metric.m})"
        )


def _as_index_array(subset: Iterable[int], n: int) -> np.ndarray:
    idx = np.array(sorted(set(int(i) for i in subset)), dtype=int)
    if idx.size and (idx[0] < 0 or idx[-1] >= n):
        raise UsageError("link id out of range in subset")
    return idx


def validate_subset(subset: Iterable[int], n: int) -> list[int]:
    """Normalize a collection of link ids into a sorted duplicate-free list."""
    return _as_index_array(subset, n).tolist()
