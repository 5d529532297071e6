"""Scheduling on conflict graphs with physical-model certification.

Coloring a suitably scaled conflict graph gives candidate slots; each slot is
then certified feasible under the selected power policy, and slots that fail
are split first-fit until every piece certifies.  The same certify-or-split
loop backs the weighted independent set solver, the online scheduler, and
the multi-channel / multi-antenna and rate-control reductions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .conflict import ConflictGraph, SublinearF, build_graph
from .errors import InternalError, UsageError
from .graphalg import greedy_color, local_ratio_mwis
from .model import Instance, Link
from .sinr import (
    FeasibilityReport,
    PowerAssignment,
    default_delta,
    default_tau,
    delta_lower_bound,
    is_p_feasible,
    kesselheim_I,
    kesselheim_threshold,
    oblivious_power,
    spectral_feasibility_oracle,
)

POWER_MODES = ("oblivious-tau", "global")


@dataclass(frozen=True)
class Slot:
    """One scheduling slot: its links, the power policy used to certify, and
    the certification report."""

    links: tuple[int, ...]
    power: PowerAssignment | None
    report: FeasibilityReport | None

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "links": list(self.links),
            "power": self.power.to_json_dict() if self.power else None,
            "report": self.report.to_json_dict() if self.report else None,
        }


@dataclass(frozen=True)
class Schedule:
    slots: tuple[Slot, ...]
    meta: dict[str, Any] = field(default_factory=dict)

    @property
    def num_slots(self) -> int:
        return len(self.slots)

    def covered(self) -> set[int]:
        out: set[int] = set()
        for slot in self.slots:
            out.update(slot.links)
        return out

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "slots": [s.to_json_dict() for s in self.slots],
            "meta": dict(self.meta),
        }


def resolve_tau(inst: Instance, f_hi: SublinearF, tau: float | None) -> float:
    """Pick the power-balance exponent: explicit value wins; otherwise use
    f's decay exponent when admissible, else the default midpoint."""
    if tau is not None:
        if not 0.0 < tau < 1.0:
            raise UsageError("tau must lie strictly between 0 and 1")
        return tau
    alpha, m = inst.metric.alpha, inst.metric.m
    delta = None
    if f_hi.kind == "power" and f_hi.delta is not None:
        d0 = delta_lower_bound(alpha, m)
        if d0 < f_hi.delta < 1.0:
            delta = f_hi.delta
    if delta is None:
        delta = default_delta(alpha, m)
    return default_tau(alpha, m, delta)


def make_certifier(
    inst: Instance, power_mode: str, tau: float | None = None, f_hi: SublinearF | None = None
) -> tuple[Callable[[Sequence[int]], FeasibilityReport], PowerAssignment | None]:
    """Build the per-slot certification function for a power mode.

    'oblivious-tau' certifies by direct SIR under the local power rule;
    'global' first tries the interference-functional certificate and falls
    back to the exact spectral oracle.
    """
    if power_mode == "oblivious-tau":
        t = resolve_tau(inst, f_hi if f_hi is not None else SublinearF(kind="one"), tau)
        p = oblivious_power(t)

        def certify(links: Sequence[int]) -> FeasibilityReport:
            return is_p_feasible(inst, links, p)

        return certify, p

    if power_mode == "global":

        def certify(links: Sequence[int]) -> FeasibilityReport:
            try:
                value = kesselheim_I(inst, links)
            except UsageError:
                value = None  # zero-distance pairs: functional undefined
            if value is not None and value < kesselheim_threshold(inst.metric.alpha):
                return FeasibilityReport(
                    feasible=True,
                    method="interference-functional",
                    detail=f"I={value:.6g}",
                )
            return spectral_feasibility_oracle(inst, links)

        return certify, None

    raise UsageError(f"unknown power mode {power_mode!r}; use one of {POWER_MODES}")


def split_until_certified(
    inst: Instance,
    links: Sequence[int],
    certify: Callable[[Sequence[int]], FeasibilityReport],
) -> list[tuple[list[int], FeasibilityReport]]:
    """First-fit split of a link set into certified subsets.

    Links are scanned in nondecreasing sensitivity; each goes into the first
    subset that stays certified with it added.  A singleton that fails to
    certify is a broken invariant, not a user error.
    """
    order = sorted(links, key=lambda i: (inst.sens[i], i))
    subsets: list[list[int]] = []
    reports: list[FeasibilityReport] = []
    for v in order:
        placed = False
        for si, members in enumerate(subsets):
            rep = certify(members + [v])
            if rep.feasible is True:
                members.append(v)
                reports[si] = rep
                placed = True
                break
        if not placed:
            rep = certify([v])
            if rep.feasible is not True:
                raise InternalError(
                    f"link {v} cannot be certified alone; splitting cannot terminate"
                )
            subsets.append([v])
            reports.append(rep)
    return list(zip(subsets, reports))


def tdma_schedule(
    inst: Instance,
    f_hi: SublinearF,
    power_mode: str = "oblivious-tau",
    tau: float | None = None,
    uniform_mode: bool = False,
) -> Schedule:
    """Color the scaled conflict graph in sensitivity order, then certify
    every color class, splitting the ones that fail.

    The slot count is the greedy chromatic number plus the number of extra
    slots forced by certification splits (both recorded in meta).
    """
    if inst.n == 0:
        return Schedule(slots=(), meta={"chi": 0, "splits": 0, "power_mode": power_mode})
    g = build_graph(inst, f_hi, uniform_mode=uniform_mode)
    coloring = greedy_color(g)
    certify, power = make_certifier(inst, power_mode, tau, f_hi)

    slots: list[Slot] = []
    splits = 0
    for cls in coloring.classes():
        if not cls:
            continue
        rep = certify(cls)
        if rep.feasible is True:
            slots.append(Slot(links=tuple(cls), power=power, report=rep))
            continue
        pieces = split_until_certified(inst, cls, certify)
        splits += len(pieces) - 1
        for members, prep in pieces:
            slots.append(Slot(links=tuple(members), power=power, report=prep))

    sched = Schedule(
        slots=tuple(slots),
        meta={
            "chi": coloring.num_colors,
            "splits": splits,
            "power_mode": power_mode,
            "f": f_hi.to_json_dict(),
            "uniform_mode": uniform_mode,
        },
    )
    covered = sched.covered()
    if covered != set(range(inst.n)):
        raise InternalError("schedule does not cover every link exactly once")
    return sched


@dataclass(frozen=True)
class MwislResult:
    selected: frozenset[int]
    report: FeasibilityReport
    degraded: bool
    k_observed: int

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "selected": sorted(self.selected),
            "report": self.report.to_json_dict(),
            "degraded": self.degraded,
            "k_observed": self.k_observed,
        }


def mwisl_solve(
    inst: Instance,
    f_hi: SublinearF,
    weights: Sequence[float] | None = None,
    power_mode: str = "oblivious-tau",
    tau: float | None = None,
    uniform_mode: bool = False,
) -> MwislResult:
    """Maximum-weight independent set of links with a feasibility
    certificate.

    Runs local-ratio on the scaled conflict graph; if the winning set fails
    certification it is split first-fit and the heaviest certified piece is
    returned with the degraded flag set."""
    if inst.n == 0:
        raise UsageError("cannot solve on an empty instance")
    w = inst.weights if weights is None else np.asarray(list(weights), dtype=float)
    if len(w) != inst.n:
        raise UsageError("weights must cover every link")
    g = build_graph(inst, f_hi, uniform_mode=uniform_mode)
    result = local_ratio_mwis(g, list(map(float, w)))
    certify, _power = make_certifier(inst, power_mode, tau, f_hi)
    chosen = sorted(result.selected)
    if not chosen:
        # all weights zero: fall back to the single heaviest link
        chosen = [int(np.argmax(w))]
    rep = certify(chosen)
    if rep.feasible is True:
        return MwislResult(
            selected=frozenset(chosen),
            report=rep,
            degraded=False,
            k_observed=result.k_observed,
        )
    pieces = split_until_certified(inst, chosen, certify)
    best_members, best_rep = max(
        pieces, key=lambda pr: sum(w[i] for i in pr[0])
    )
    return MwislResult(
        selected=frozenset(best_members),
        report=best_rep,
        degraded=True,
        k_observed=result.k_observed,
    )


# ----------------------------------------------------------------------
# multi-channel, multi-antenna expansion


@dataclass(frozen=True)
class VirtualLink:
    """A (channel, sender antenna, receiver antenna) replica of a link."""

    id: int
    original: int
    tx_antenna: int
    rx_antenna: int
    channel: str


def mcma_expand(
    inst: Instance,
    antennas: Sequence[int],
    channels: Sequence[Iterable[str]],
    f_hi: SublinearF,
    uniform_mode: bool = False,
) -> tuple[ConflictGraph, list[VirtualLink]]:
    """Expand links into virtual links over antenna pairs and shared
    channels.

    antennas[u] and channels[u] are per node.  Replicas of one original are
    never adjacent; virtual links of distinct originals conflict when they
    use the same antenna of the same node on the same channel, or when they
    share a channel and their originals conflict.  The elimination order
    refines the originals' sensitivity order by (original id, channel,
    antennas).  With one antenna per node the post-neighborhood cover grows
    by at most two cliques over the originals' bound (the two endpoint
    antenna slots); with multiple antennas per endpoint the replica groups
    of one original stop being cliques and the bound degrades, which callers
    relying on the cover structure should keep in mind."""
    n_nodes = inst.nodes.shape[0] if inst.nodes is not None else inst.dmatrix.shape[0]
    if len(antennas) != n_nodes or len(channels) != n_nodes:
        raise UsageError("antennas and channels must be given per node")
    ants = [int(a) for a in antennas]
    if any(a < 1 for a in ants):
        raise UsageError("every node needs at least one antenna")
    chans = [sorted(str(c) for c in cs) for cs in channels]

    g_orig = build_graph(inst, f_hi, uniform_mode=uniform_mode)

    virtuals: list[VirtualLink] = []
    for lk in inst.links:
        shared = sorted(set(chans[lk.s]) & set(chans[lk.r]))
        if not shared:
            warnings.warn(
                f"link {lk.id} has no common channel; it contributes no virtual links",
                stacklevel=2,
            )
            continue
        for ch in shared:
            for tx in range(ants[lk.s]):
                for rx in range(ants[lk.r]):
                    virtuals.append(
                        VirtualLink(
                            id=len(virtuals),
                            original=lk.id,
                            tx_antenna=tx,
                            rx_antenna=rx,
                            channel=ch,
                        )
                    )

    nv = len(virtuals)
    neighbors: list[set[int]] = [set() for _ in range(nv)]
    # Antenna slots are channel-qualified: one antenna serves one channel
    # at a time, and cross-channel use never conflicts through the antenna.
    slots = [
        (
            (inst.links[v.original].s, v.tx_antenna, v.channel),
            (inst.links[v.original].r, v.rx_antenna, v.channel),
        )
        for v in virtuals
    ]
    for a in range(nv):
        va = virtuals[a]
        for b in range(a + 1, nv):
            vb = virtuals[b]
            if va.original == vb.original:
                continue
            share_antenna = bool(set(slots[a]) & set(slots[b]))
            share_channel = va.channel == vb.channel
            if share_antenna or (
                share_channel and g_orig.adjacent(va.original, vb.original)
            ):
                neighbors[a].add(b)
                neighbors[b].add(a)

    order = sorted(
        range(nv),
        key=lambda i: (
            inst.sens[virtuals[i].original],
            virtuals[i].original,
            virtuals[i].channel,
            virtuals[i].tx_antenna,
            virtuals[i].rx_antenna,
        ),
    )
    graph = ConflictGraph(
        n=nv,
        neighbors=tuple(tuple(sorted(nb)) for nb in neighbors),
        f=f_hi,
        order=tuple(order),
        uniform_mode=uniform_mode,
        sens=tuple(float(inst.sens[v.original]) for v in virtuals),
    )
    return graph, virtuals


# ----------------------------------------------------------------------
# rate control by dyadic replication


def _step_table_min_arg(table: list[tuple[float, float]], level: float) -> float | None:
    """Least SIR at which the step utility reaches `level`; None if never.
    May fall below one; the caller zero-weights such replicas."""
    for x, u in table:
        if u >= level:
            return x
    return None


def _normalize_utility(
    util: Any,
) -> list[tuple[float, float]] | Callable[[float], float]:
    """Accept a step table [(sir, value), ...] or a callable.  Utilities are
    clamped to zero below SIR 1 and must be nondecreasing."""
    if callable(util):
        probe = [1.0 + 0.5 * k for k in range(8)]
        vals = [float(util(x)) for x in probe]
        if any(b < a - 1e-12 for a, b in zip(vals, vals[1:])):
            raise UsageError("utility function must be nondecreasing")
        return util
    table = [(float(x), float(u)) for x, u in util]
    if not table:
        raise UsageError("utility table must be nonempty")
    if any(b[0] <= a[0] for a, b in zip(table, table[1:])):
        raise UsageError("utility table must have increasing SIR values")
    if any(b[1] < a[1] for a, b in zip(table, table[1:])):
        raise UsageError("utility table must be nondecreasing")
    return table


def _utility_min_arg(util: Any, level: float, hi_cap: float = 1e18) -> float | None:
    if isinstance(util, list):
        return _step_table_min_arg(util, level)
    # continuous nondecreasing callable: bracket then bisect
    f = util
    if float(f(hi_cap)) < level:
        return None
    lo, hi = 1.0, 2.0
    if float(f(lo)) >= level:
        return 1.0
    while float(f(hi)) < level:
        hi *= 2.0
        if hi > hi_cap:
            return None
    while hi - lo > 1e-9 * hi:
        mid = 0.5 * (lo + hi)
        if float(f(mid)) >= level:
            hi = mid
        else:
            lo = mid
    return hi


def rate_control_replicas(
    inst: Instance, utilities: Any, levels: int
) -> tuple[Instance, dict[int, float], list[dict[str, Any]]]:
    """Replace each link by co-located replicas at dyadic utility levels.

    Replica k of a link carries weight 2**(k-1) and threshold equal to the
    least SIR at which the link's utility reaches that weight.  Replicas
    whose threshold would fall below one get weight zero (the threshold is
    clamped to one); replicas at identical thresholds collapse to the
    heaviest.  At most `levels` replicas per link are kept, preferring the
    heaviest, since only the top logarithmically many matter.  Co-location
    plus thresholds >= 1 make any feasible set use at most one replica per
    original."""
    if inst.metric.kind != "euclidean":
        raise UsageError("rate-control replication needs coordinates to co-locate replicas")
    if levels < 1:
        raise UsageError("levels must be at least 1")
    if isinstance(utilities, dict):
        missing = set(range(inst.n)) - set(utilities)
        if missing:
            raise UsageError(f"no utility given for links {sorted(missing)}")
        per_link = [_normalize_utility(utilities[i]) for i in range(inst.n)]
    else:
        shared = _normalize_utility(utilities)
        per_link = [shared] * inst.n

    nodes: list[list[float]] = []
    links: list[Link] = []
    weights: dict[int, float] = {}
    replica_map: list[dict[str, Any]] = []
    for lk in inst.links:
        util = per_link[lk.id]
        found: dict[float, tuple[float, int]] = {}  # beta -> (weight, level k)
        k = 1
        while True:
            level_value = 2.0 ** (k - 1)
            x = _utility_min_arg(util, level_value)
            if x is None:
                break
            beta_k, w_k = x, level_value
            if beta_k < 1.0:
                beta_k, w_k = 1.0, 0.0
            prev = found.get(beta_k)
            if prev is None or w_k > prev[0]:
                found[beta_k] = (w_k, k)
            k += 1
            if k > 60:
                break
        if not found:
            continue
        entries = sorted(found.items(), key=lambda kv: -kv[1][0])[:levels]
        entries.sort(key=lambda kv: kv[1][1])
        s_node = len(nodes)
        nodes.append([float(c) for c in inst.nodes[lk.s]])
        nodes.append([float(c) for c in inst.nodes[lk.r]])
        for beta_k, (w_k, kk) in entries:
            vid = len(links)
            links.append(
                Link(
                    id=vid,
                    s=s_node,
                    r=s_node + 1,
                    beta=max(beta_k, 1.0),
                    weight=w_k,
                    noise=lk.noise,
                )
            )
            weights[vid] = w_k
            replica_map.append({"original": lk.id, "level": kk, "weight": w_k})

    out = Instance(
        metric=inst.metric,
        links=links,
        nodes=np.array(nodes, dtype=float) if nodes else np.zeros((0, inst.metric.dim)),
        sensitivity_floor=inst.sensitivity_floor,
        provenance={"transform": "rate-control-replicas", "levels": levels},
    )
    return out, weights, replica_map


# ----------------------------------------------------------------------
# online arrivals


def online_schedule(
    inst: Instance,
    f_hi: SublinearF,
    arrival_order: Sequence[int] | None = None,
    power_mode: str = "oblivious-tau",
    tau: float | None = None,
    uniform_mode: bool = False,
) -> Schedule:
    """First-fit slot assignment under adversarial arrivals.

    Each arriving link takes the first slot where it has no conflict-graph
    neighbor and the slot stays certified; otherwise it opens a new slot.
    Links are never moved once placed."""
    order = (
        list(range(inst.n))
        if arrival_order is None
        else [int(v) for v in arrival_order]
    )
    if sorted(order) != list(range(inst.n)):
        raise UsageError("arrival order must be a permutation of the link ids")
    g = build_graph(inst, f_hi, uniform_mode=uniform_mode)
    certify, power = make_certifier(inst, power_mode, tau, f_hi)

    slots: list[list[int]] = []
    for v in order:
        placed = False
        for members in slots:
            if any(g.adjacent(v, u) for u in members):
                continue
            rep = certify(members + [v])
            if rep.feasible is True:
                members.append(v)
                placed = True
                break
        if not placed:
            rep = certify([v])
            if rep.feasible is not True:
                raise InternalError(f"arriving link {v} cannot be certified alone")
            slots.append([v])

    final: list[Slot] = []
    for members in slots:
        rep = certify(members)
        if rep.feasible is not True:
            raise InternalError("online slot lost certification at the end state")
        final.append(Slot(links=tuple(members), power=power, report=rep))
    return Schedule(
        slots=tuple(final),
        meta={
            "power_mode": power_mode,
            "f": f_hi.to_json_dict(),
            "online": True,
            "uniform_mode": uniform_mode,
        },
    )
