"""Instance generators: random ensembles and adversarial constructions.

The constructions realize the known lower-bound geometries: a chain whose
conflict graph is complete yet alternating links are mutually feasible, a
recursive copies-next-to-a-long-link family that is conflict-free under a
matched polylog scaling but still needs several slots, a uniform-power
near-feasible ladder with doubly exponential length spread, and a star
metric showing that bounded feasible sets can sit inside one conflict clique
in general (non-doubling) metrics.

Every generator is deterministic given (kind, params, seed) and stamps a
provenance block onto the instance it returns.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .conflict import SublinearF
from .errors import InternalError, SizeError, UsageError
from .model import COORD_CAP, Instance, Link, MetricContext

_LENGTH_CAP = 1e300


def _provenance(kind: str, params: dict[str, Any], seed: int | None, **extra: Any) -> dict:
    out = {"kind": kind, "params": params, "seed": seed}
    out.update(extra)
    return out


# ----------------------------------------------------------------------
# random euclidean ensembles


def gen_random(
    n: int,
    area_side: float = 100.0,
    length_range: tuple[float, float] = (1.0, 10.0),
    beta_range: tuple[float, float] = (1.0, 4.0),
    alpha: float = 3.0,
    m: int = 2,
    seed: int = 0,
    noise: float = 0.0,
    sensitivity_floor: bool = True,
) -> Instance:
    """Uniform random senders in a box, log-uniform lengths and thresholds,
    isotropic directions."""
    if n < 0:
        raise UsageError("n must be nonnegative")
    if m not in (1, 2, 3):
        raise UsageError("random euclidean instances need m in {1, 2, 3}")
    lo, hi = length_range
    if not (0 < lo <= hi):
        raise UsageError("length_range must satisfy 0 < lo <= hi")
    blo, bhi = beta_range
    if not (1.0 <= blo <= bhi):
        raise UsageError("beta_range must satisfy 1 <= lo <= hi")
    dim = int(m)
    rng = np.random.default_rng(seed)
    senders = rng.uniform(0.0, area_side, size=(n, dim))
    lengths = np.exp(rng.uniform(math.log(lo), math.log(hi), size=n))
    betas = np.exp(rng.uniform(math.log(blo), math.log(bhi), size=n))
    if dim == 1:
        dirs = rng.choice([-1.0, 1.0], size=(n, 1))
    else:
        g = rng.normal(size=(n, dim))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        dirs = g / norms
    receivers = senders + lengths[:, None] * dirs

    nodes: list[list[float]] = []
    links: list[Link] = []
    for i in range(n):
        nodes.append([float(c) for c in senders[i]])
        nodes.append([float(c) for c in receivers[i]])
        links.append(
            Link(id=i, s=2 * i, r=2 * i + 1, beta=float(betas[i]), noise=noise)
        )
    return Instance(
        metric=MetricContext(kind="euclidean", alpha=alpha, m=float(m), dim=dim),
        links=links,
        nodes=np.array(nodes, dtype=float).reshape(2 * n, dim),
        sensitivity_floor=sensitivity_floor,
        provenance=_provenance(
            "random-euclidean",
            {
                "n": n,
                "area_side": area_side,
                "length_range": list(length_range),
                "beta_range": list(beta_range),
                "alpha": alpha,
                "m": m,
                "noise": noise,
            },
            seed,
        ),
    )


# ----------------------------------------------------------------------
# chain construction: complete conflict graph, feasible alternating half


def _min_arg_with_f_at_least(
    f: SublinearF, q: float, alpha: float, m: float
) -> float:
    """Least y >= 1 with f(y) >= q, by doubling and bisection (relative
    1e-12); returns the upper bracket endpoint so the inequality holds."""
    if f.evaluate(1.0, alpha, m) >= q:
        return 1.0
    hi = 2.0
    while f.evaluate(hi, alpha, m) < q:
        hi *= 2.0
        if hi > _LENGTH_CAP:
            raise SizeError("sublinear function never reaches the required value")
    lo = hi / 2.0
    while hi - lo > 1e-12 * hi:
        mid = 0.5 * (lo + hi)
        if f.evaluate(mid, alpha, m) >= q:
            hi = mid
        else:
            lo = mid
    return hi


def gen_ndependence(
    n: int,
    f: SublinearF,
    c: float = 2.0,
    beta: float = 1.0,
    alpha: float = 2.0,
) -> Instance:
    """Consecutive touching links on a line with minimally fast growth.

    Each new length is the least value that (a) grows by at least factor c
    and (b) keeps twice the distance back to every earlier receiver below
    that receiver's length scaled by f of the length ratio.  Under (b) every
    pair conflicts, so the conflict graph under f is complete; under (a) the
    alternating half of the chain is feasible with power control.  Lengths
    grow like an iterated exponential, so n stays small before the float
    range runs out; the witness half is recorded in the provenance block.
    """
    if n < 1:
        raise UsageError("chain construction needs n >= 1")
    if f.kind == "one":
        raise UsageError("chain construction needs an unbounded scaling function")
    if c < 2.0:
        raise UsageError("growth factor c must be at least 2")
    if beta < 1.0:
        raise UsageError("beta must be at least 1")
    if not alpha > 1.0:
        raise UsageError("line instances need alpha > 1")
    m = 1.0

    lengths = [1.0]
    span = 1.0
    for i in range(1, n):
        candidate = c * lengths[-1]
        # gap back to receiver j is the total length strictly between them
        gap = 0.0
        for j in range(i - 2, -1, -1):
            gap += lengths[j + 1]
            q = 2.0 * gap / lengths[j]
            try:
                y = _min_arg_with_f_at_least(f, q, alpha, m)
            except SizeError as exc:
                raise SizeError(
                    f"chain length overflow at link {i}; achieved {i} links",
                    achieved=i,
                ) from exc
            candidate = max(candidate, lengths[j] * y)
        span += candidate
        # the span is a coordinate, so it is the binding limit, not the cap
        # on individual lengths
        if span > COORD_CAP or not math.isfinite(span):
            raise SizeError(
                f"chain span overflow at link {i}; achieved {i} links", achieved=i
            )
        lengths.append(candidate)

    positions = [0.0]
    for l in lengths:
        positions.append(positions[-1] + l)

    nodes: list[list[float]] = []
    links: list[Link] = []
    for i in range(n):
        nodes.append([positions[i]])
        nodes.append([positions[i + 1]])
        links.append(Link(id=i, s=2 * i, r=2 * i + 1, beta=beta))

    witness = list(range(0, n, 2))
    return Instance(
        metric=MetricContext(kind="euclidean", alpha=alpha, m=m, dim=1),
        links=links,
        nodes=nodes,
        sensitivity_floor=False,
        provenance=_provenance(
            "ndependence-chain",
            {"n": n, "f": f.to_json_dict(), "c": c, "beta": beta, "alpha": alpha},
            None,
            witness=witness,
        ),
    )


# ----------------------------------------------------------------------
# recursive hard instance: conflict-free under matched polylog scaling


def _hard_gap(ell_s: float, l_long: float, C: float, alpha: float) -> float:
    """Separation of a scaled copy from the long link: 9 * ell * g(ratio)
    with g(x) = C * log2(x)**(1/alpha)."""
    ratio = l_long / ell_s
    return 9.0 * ell_s * C * math.log2(ratio) ** (1.0 / alpha)


def _verify_hard_separations(
    segments: list[tuple[float, float]], C: float, alpha: float, t_max: int
) -> None:
    """Check the finished coordinates still satisfy every pairwise
    separation the construction promises.

    With thresholds 3**alpha the no-conflict requirement for a pair is
    d_ij * d_ji >= 9 * l_i * l_j * C * max(log2(li/lj)**(1/alpha), 1); the
    placement makes this hold with near-equality at copy boundaries, so any
    quantization loss from the absolute coordinate grid shows up here."""
    n = len(segments)
    for i in range(n):
        a_i, b_i = segments[i]
        l_i = b_i - a_i
        if not l_i > 0:
            raise SizeError(
                f"float64 cannot hold level-{t_max} scales: link {i} collapsed; "
                "reduce t_max, c, or scale_cap",
                achieved=t_max - 1,
            )
    for i in range(n):
        a_i, b_i = segments[i]
        l_i = b_i - a_i
        for j in range(i + 1, n):
            a_j, b_j = segments[j]
            l_j = b_j - a_j
            d_ij = abs(a_i - b_j)
            d_ji = abs(a_j - b_i)
            ratio = max(l_i, l_j) / min(l_i, l_j)
            needed = 9.0 * l_i * l_j * C * max(math.log2(ratio) ** (1.0 / alpha), 1.0)
            if d_ij * d_ji < needed:
                raise SizeError(
                    f"float64 quantization broke the separation of links {i} and "
                    f"{j} at level {t_max}; reduce t_max, c, or scale_cap",
                    achieved=t_max - 1,
                )


def gen_hardinstance(
    t_max: int,
    C: float = 1.0,
    alpha: float = 2.0,
    c: float = 4.0,
    scale_cap: int = 16,
) -> Instance:
    """Recursive copies-beside-a-long-link construction on a line.

    Level t+1 places one long link and k = 2**(c * diam_t) copies of level t,
    scaled by successive powers of 8 and separated from the long link by
    9 * diam * C * log2(ratio)**(1/alpha).  The copy count is truncated at
    scale_cap; truncation weakens only the multi-slot property of deep
    levels, which is therefore not asserted for truncated output.  Thresholds
    are 3**alpha so the scaled-distance reasoning matches sensitivities
    exactly (sensitivity floor off).

    The required separations are tight by design, so gaps get a few ulps of
    padding and the finished coordinates are re-verified pair by pair; when
    the scale spread exceeds what float64 can hold (depth 3 and beyond needs
    a small scale_cap) the generator refuses with a size error rather than
    emit a quantization-broken instance.
    """
    if t_max < 1:
        raise UsageError("t_max must be at least 1")
    if C < 1.0:
        raise UsageError("C must be at least 1")
    if not alpha > 1.0:
        raise UsageError("line instances need alpha > 1")
    if c <= 0 or scale_cap < 1:
        raise UsageError("c must be positive and scale_cap at least 1")

    truncated = False
    k_per_level: list[int] = []
    lineage: list[str] = ["t1"]
    segments: list[tuple[float, float]] = [(0.0, 1.0)]
    diam = 1.0

    for level in range(2, t_max + 1):
        exponent = c * diam
        if exponent >= 60.0:
            k = scale_cap
            truncated = True
        else:
            k = int(math.floor(2.0 ** exponent))
            if k > scale_cap:
                k = scale_cap
                truncated = True
        k = max(k, 1)
        k_per_level.append(k)

        l_long = 8.0 ** (k + 1) * diam
        if not math.isfinite(l_long) or l_long > COORD_CAP:
            raise SizeError(f"hard instance overflow at level {level}", achieved=level - 1)
        new_segments: list[tuple[float, float]] = [(0.0, l_long)]
        new_lineage: list[str] = [f"t{level}.long"]
        for s in range(1, k + 1):
            scale = 8.0 ** s
            ell_s = scale * diam
            gap = _hard_gap(ell_s, l_long, C, alpha)
            # separations are tight at the copy boundary; pad past the
            # absolute rounding grid so stored distances never fall short
            offset = l_long + gap + 8.0 * np.spacing(l_long + gap)
            if not offset + scale * diam <= COORD_CAP:
                raise SizeError(
                    f"hard instance overflow at level {level}", achieved=level - 1
                )
            for (a, b), tag in zip(segments, lineage):
                new_segments.append((a * scale + offset, b * scale + offset))
                new_lineage.append(f"t{level}.copy{s}.{tag}")
        segments = new_segments
        lineage = new_lineage
        hi = max(max(seg) for seg in segments)
        lo = min(min(seg) for seg in segments)
        diam = hi - lo

    _verify_hard_separations(segments, C, alpha, t_max)

    # long link ids collected during the loop would be positional;
    # recompute from lineage tags instead (the bare "t1" base case is its
    # own long link)
    long_ids = [
        i for i, tag in enumerate(lineage) if tag.endswith(".long") or tag == "t1"
    ]

    beta = 3.0 ** alpha
    nodes: list[list[float]] = []
    links: list[Link] = []
    for i, (a, b) in enumerate(segments):
        nodes.append([a])
        nodes.append([b])
        links.append(Link(id=i, s=2 * i, r=2 * i + 1, beta=beta))

    return Instance(
        metric=MetricContext(kind="euclidean", alpha=alpha, m=1.0, dim=1),
        links=links,
        nodes=nodes,
        sensitivity_floor=False,
        provenance=_provenance(
            "hardinstance-recursive",
            {"t_max": t_max, "C": C, "alpha": alpha, "c": c, "scale_cap": scale_cap},
            None,
            truncated=truncated,
            k_per_level=k_per_level,
            long_links=long_ids,
            lineage=lineage,
            diameter=diam,
        ),
    )


# ----------------------------------------------------------------------
# uniform-power ladder: doubly exponential spread, still one slot


def gen_uniform_power_clique(n: int, h: int, alpha: float = 2.0) -> Instance:
    """Ladder of links with lengths n, n^2, ..., n^k (k about n / log2 n)
    spaced so that every pairwise interference-to-signal ratio under uniform
    power is at most 1/n.  The whole instance is feasible in one uniform
    power slot while its length diversity is about 2^n."""
    if h < 1:
        raise UsageError("h must be at least 1")
    if n <= 4 * (h + 1) ** 2:
        raise UsageError(f"n must exceed 4*(h+1)^2 = {4 * (h + 1) ** 2}")
    if not alpha > 1.0:
        raise UsageError("line instances need alpha > 1")
    k = max(2, int(math.floor(n / math.log2(n))))
    # the rightmost gap is about n**(k+1), a coordinate
    if (k + 1) * math.log10(n) > math.log10(COORD_CAP) - 1.0:
        raise SizeError("uniform-power ladder overflows the coordinate range", achieved=k)

    lengths = [float(n) ** i for i in range(1, k + 1)]
    gaps = []
    for i in range(k - 1):
        d = lengths[i + 1] ** 2 / ((h + 1) * lengths[i]) - (h + 1) * lengths[i]
        if d <= 0:
            raise InternalError("ladder spacing collapsed; parameter check is broken")
        gaps.append(d)

    positions = [0.0]
    for i in range(k):
        positions.append(positions[-1] + lengths[i])
        if i < k - 1:
            positions[-1] += 0.0  # receiver position; gap applied to next sender
    # rebuild positions explicitly: s_i, r_i pairs
    nodes: list[list[float]] = []
    links: list[Link] = []
    cursor = 0.0
    for i in range(k):
        s_pos = cursor
        r_pos = s_pos + lengths[i]
        nodes.append([s_pos])
        nodes.append([r_pos])
        links.append(Link(id=i, s=2 * i, r=2 * i + 1, beta=1.0))
        cursor = r_pos + (gaps[i] if i < k - 1 else 0.0)

    inst = Instance(
        metric=MetricContext(kind="euclidean", alpha=alpha, m=1.0, dim=1),
        links=links,
        nodes=nodes,
        sensitivity_floor=False,
        provenance=_provenance(
            "uniform-power-clique",
            {"n": n, "h": h, "alpha": alpha},
            None,
            k=k,
            diversity_log2=(k - 1) * math.log2(n),
        ),
    )

    # contract: every pairwise interference-to-signal ratio is at most 1/n
    dmin = inst.dmin
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            isr = (lengths[max(i, j)] / dmin[i, j]) ** alpha
            if isr > 1.0 / n:
                raise InternalError("ladder interference-to-signal ratio exceeds 1/n")
    return inst


# ----------------------------------------------------------------------
# star metric: one conflict clique, bounded feasible subsets


def gen_general_metric_star(
    n: int,
    f_at_1: float,
    beta: float = 1.0,
    alpha: float = 1.0,
    m: float = 0.5,
) -> Instance:
    """Unit links whose senders sit pairwise at distance 2 * beta * f(1) in
    an explicit star-shaped metric (receivers hang one unit off their
    senders).  Every pair is conflict-free at scaling value f(1), yet any
    feasible subset has at most about (2 f(1) + 1)^2 / beta^2 members.  The
    metric is far from doubling as n grows; the declared m is nominal."""
    if n < 1:
        raise UsageError("star construction needs n >= 1")
    if f_at_1 < 1.0:
        raise UsageError("f(1) must be at least 1")
    if beta < 1.0:
        raise UsageError("beta must be at least 1")
    if not alpha > m:
        raise UsageError("alpha must exceed m")

    hub = 2.0 * beta * f_at_1  # sender-to-sender distance
    size = 2 * n
    dmat = np.zeros((size, size))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            dmat[i, j] = hub
            dmat[i, n + j] = hub + 1.0
            dmat[n + i, j] = hub + 1.0
            dmat[n + i, n + j] = hub + 2.0
        dmat[i, n + i] = 1.0
        dmat[n + i, i] = 1.0

    links = [Link(id=i, s=i, r=n + i, beta=beta) for i in range(n)]
    bound = (2.0 * f_at_1 + 1.0) ** 2 / beta ** 2 + 1.0
    return Instance(
        metric=MetricContext(kind="matrix", alpha=alpha, m=m),
        links=links,
        dmatrix=dmat,
        sensitivity_floor=False,
        provenance=_provenance(
            "general-metric-star",
            {"n": n, "f_at_1": f_at_1, "beta": beta, "alpha": alpha, "m": m},
            None,
            feasible_size_bound=bound,
        ),
    )


# ----------------------------------------------------------------------
# generation specs: serializable recipes for the CLI and the harness


_KINDS = {
    "random-euclidean",
    "ndependence-chain",
    "hardinstance-recursive",
    "uniform-power-clique",
    "general-metric-star",
}


@dataclass(frozen=True)
class GenSpec:
    """A serializable instance recipe: kind, parameters, seed."""

    kind: str
    params: dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise UsageError(f"unknown generator kind {self.kind!r}")

    def with_seed(self, seed: int) -> "GenSpec":
        return GenSpec(kind=self.kind, params=dict(self.params), seed=seed)

    def canonical_json(self) -> str:
        return json.dumps(
            {"kind": self.kind, "params": self.params, "seed": self.seed},
            sort_keys=True,
        )

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]

    def to_json_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "params": dict(self.params), "seed": self.seed}

    @classmethod
    def from_json_dict(cls, data: dict[str, Any]) -> "GenSpec":
        if "kind" not in data:
            raise UsageError("generation spec needs a 'kind' field")
        return cls(
            kind=data["kind"],
            params=dict(data.get("params", {})),
            seed=int(data.get("seed", 0)),
        )

    def generate(self) -> Instance:
        p = dict(self.params)
        try:
            if self.kind == "random-euclidean":
                if "length_range" in p:
                    p["length_range"] = tuple(p["length_range"])
                if "beta_range" in p:
                    p["beta_range"] = tuple(p["beta_range"])
                inst = gen_random(seed=self.seed, **p)
            elif self.kind == "ndependence-chain":
                if "f" in p:
                    p["f"] = SublinearF.from_json_dict(p["f"])
                inst = gen_ndependence(**p)
            elif self.kind == "hardinstance-recursive":
                inst = gen_hardinstance(**p)
            elif self.kind == "uniform-power-clique":
                inst = gen_uniform_power_clique(**p)
            else:
                inst = gen_general_metric_star(**p)
        except TypeError as exc:
            raise UsageError(f"bad parameters for {self.kind}: {exc}") from exc
        if inst.provenance is not None:
            inst.provenance["genspec_hash"] = self.digest()
            if self.kind != "random-euclidean":
                inst.provenance["seed"] = self.seed
        return inst
