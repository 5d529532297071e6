"""Physical-model feasibility: SIR checks, oblivious power, interference
functionals, an exact spectral feasibility oracle, signal-strengthening
partitions, and the weak-link stretching transform.

A set of links is feasible under a power assignment when every link's
signal-to-interference ratio strictly exceeds its threshold.  Feasibility
with arbitrary power control reduces to a spectral radius condition on the
normalized gain matrix, which is what the oracle checks.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from .errors import InternalError, PreconditionError, UsageError
from .model import Instance, Link, MetricContext, validate_subset

SPECTRAL_MARGIN = 1e-12
_POWER_ITER_MAX = 10_000
_POWER_ITER_TOL = 1e-10
_SPECTRAL_SIZE_CAP = 2000


# ----------------------------------------------------------------------
# power assignments


@dataclass(frozen=True)
class PowerAssignment:
    """Transmit power policy.

    kind 'uniform': every link sends at `level`.
    kind 'oblivious': link i sends at sens_i ** (tau * alpha), a local rule
    depending only on the link's own sensitivity.
    kind 'explicit': per-link levels, given as a mapping id -> power.
    """

    kind: str
    level: float = 1.0
    tau: float | None = None
    levels: tuple[tuple[int, float], ...] | None = None

    def __post_init__(self):
        if self.kind == "uniform":
            if not (self.level > 0 and math.isfinite(self.level)):
                raise UsageError("uniform power needs a positive finite level")
        elif self.kind == "oblivious":
            if self.tau is None or not (0.0 < self.tau < 1.0):
                raise UsageError("oblivious power needs tau strictly between 0 and 1")
        elif self.kind == "explicit":
            if not self.levels:
                raise UsageError("explicit power needs per-link levels")
            for _, p in self.levels:
                if not (p > 0 and math.isfinite(p)):
                    raise UsageError("explicit power levels must be positive and finite")
        else:
            raise UsageError(f"unknown power kind {self.kind!r}")

    def powers(self, inst: Instance, s: Sequence[int]) -> np.ndarray:
        if self.kind == "uniform":
            return np.full(len(s), self.level, dtype=float)
        if self.kind == "oblivious":
            exp = self.tau * inst.metric.alpha
            return inst.sens[np.asarray(s, dtype=int)] ** exp
        table = dict(self.levels)
        try:
            return np.array([table[i] for i in s], dtype=float)
        except KeyError as exc:
            raise UsageError(f"explicit power missing link {exc}") from exc

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"kind": self.kind}
        if self.kind == "uniform":
            out["level"] = self.level
        elif self.kind == "oblivious":
            out["tau"] = self.tau
        else:
            out["levels"] = {str(i): p for i, p in self.levels}
        return out


def uniform_power(level: float = 1.0) -> PowerAssignment:
    return PowerAssignment(kind="uniform", level=level)


def oblivious_power(tau: float) -> PowerAssignment:
    return PowerAssignment(kind="oblivious", tau=tau)


def explicit_power(levels: dict[int, float]) -> PowerAssignment:
    return PowerAssignment(
        kind="explicit", levels=tuple(sorted((int(k), float(v)) for k, v in levels.items()))
    )


# ----------------------------------------------------------------------
# feasibility reports


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of a feasibility check.

    feasible is None when the method could not decide (oracle
    non-convergence).  per_link_sir is populated by direct checks and by the
    oracle when a witness power exists; with method 'direct-sir' and
    feasible=True, every recorded SIR strictly exceeds its link threshold.
    """

    feasible: bool | None
    method: str
    per_link_sir: dict[int, float] | None = None
    witness_power: dict[int, float] | None = None
    radius: float | None = None
    detail: str = ""

    def to_json_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {"feasible": self.feasible, "method": self.method}
        if self.per_link_sir is not None:
            out["per_link_sir"] = {str(k): v for k, v in sorted(self.per_link_sir.items())}
        if self.witness_power is not None:
            out["witness_power"] = {str(k): v for k, v in sorted(self.witness_power.items())}
        if self.radius is not None:
            out["radius"] = self.radius
        if self.detail:
            out["detail"] = self.detail
        return out


# ----------------------------------------------------------------------
# direct SIR


def sir(inst: Instance, s: Iterable[int], p: PowerAssignment, i: int) -> float:
    """Signal-to-interference-and-noise ratio of link i inside the set s
    under power assignment p.  Infinite when nothing interferes and the
    receiver is noiseless."""
    ss = validate_subset(s, inst.n)
    if i not in ss:
        raise UsageError(f"link {i} is not a member of the set")
    alpha = inst.metric.alpha
    pw = p.powers(inst, ss)
    idx = ss.index(i)
    signal = pw[idx] / inst.lengths[i] ** alpha
    others = [j for j in ss if j != i]
    denom = float(inst.noises[i])
    if others:
        d = inst.dsr[np.asarray(others), i]
        if np.any(d == 0.0):
            return 0.0  # an interferer sits on the receiver
        denom += float(np.sum(pw[[ss.index(j) for j in others]] / d ** alpha))
    if denom == 0.0:
        return math.inf
    return signal / denom


def _sir_vector(inst: Instance, ss: list[int], pw: np.ndarray) -> np.ndarray:
    """SIR of every link of ss under per-link powers pw (aligned with ss)."""
    alpha = inst.metric.alpha
    idx = np.asarray(ss, dtype=int)
    k = len(ss)
    signal = pw / inst.lengths[idx] ** alpha
    if k == 1:
        denom = inst.noises[idx].astype(float)
    else:
        d = inst.dsr[np.ix_(idx, idx)]
        with np.errstate(divide="ignore"):
            gains = pw[:, None] / d ** alpha  # [j, i]: interference of j on i
        np.fill_diagonal(gains, 0.0)
        denom = np.sum(gains, axis=0) + inst.noises[idx]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(denom > 0, signal / denom, np.inf)
    return out


def is_p_feasible(inst: Instance, s: Iterable[int], p: PowerAssignment) -> FeasibilityReport:
    """Direct SIR check: feasible iff every link's SIR strictly exceeds its
    threshold under p."""
    ss = validate_subset(s, inst.n)
    if not ss:
        raise UsageError("feasibility of an empty set is undefined")
    pw = p.powers(inst, ss)
    sirs = _sir_vector(inst, ss, pw)
    betas = inst.betas[np.asarray(ss)]
    ok = bool(np.all(sirs > betas))
    return FeasibilityReport(
        feasible=ok,
        method="direct-sir",
        per_link_sir={i: float(v) for i, v in zip(ss, sirs)},
        witness_power={i: float(v) for i, v in zip(ss, pw)},
    )


# ----------------------------------------------------------------------
# oblivious power parameterization


def delta_lower_bound(alpha: float, m: float) -> float:
    """Smallest usable length-decay exponent for the given ambient
    parameters; the admissible range is open above this value."""
    if not alpha > m:
        raise UsageError("alpha must exceed m")
    return (alpha - m + 1.0) / (2.0 * (alpha - m) + 1.0)


def default_delta(alpha: float, m: float) -> float:
    """Midpoint of the admissible (delta_lower_bound, 1) range."""
    return 0.5 * (delta_lower_bound(alpha, m) + 1.0)


def tau_interval(alpha: float, m: float, delta: float) -> tuple[float, float]:
    """Open interval of power-balance exponents tau for which independent
    sets of the power-law conflict graph with exponent delta admit an
    oblivious-power certificate."""
    d0 = delta_lower_bound(alpha, m)
    if not (d0 < delta < 1.0):
        raise UsageError(
            f"delta must lie strictly between {d0} and 1 for alpha={alpha}, m={m}"
        )
    b = 1.0 - delta * (alpha - m) / alpha
    e = 1.0 - (1.0 - delta) * (alpha - m + 1.0) / alpha
    if not b < e:
        raise InternalError("tau interval is empty; parameter validation is broken")
    return b, e


def default_tau(alpha: float, m: float, delta: float | None = None) -> float:
    if delta is None:
        delta = default_delta(alpha, m)
    b, e = tau_interval(alpha, m, delta)
    return 0.5 * (b + e)


# ----------------------------------------------------------------------
# affectance under oblivious power


def affectance_tau(inst: Instance, j: int, i: int, tau: float) -> float:
    """Normalized interference of link j on link i under oblivious power with
    balance exponent tau.  Zero on the diagonal.

    The normalization folds the threshold into the sensitivity: with the
    sensitivity floor disabled, sens_i**alpha equals beta_i * l_i**alpha, so
    a sum below one is exactly the SIR condition under this power rule.
    """
    if i == j:
        return 0.0
    if not (0 <= i < inst.n and 0 <= j < inst.n):
        raise UsageError("link id out of range")
    a = inst.metric.alpha
    d = inst.dsr[j, i]
    if d == 0.0:
        return math.inf
    return float(inst.sens[j] ** (tau * a) * inst.sens[i] ** ((1.0 - tau) * a) / d ** a)


def affectance_tau_sum(inst: Instance, s: Iterable[int], i: int, tau: float) -> float:
    ss = validate_subset(s, inst.n)
    if i not in ss:
        raise UsageError(f"link {i} is not a member of the set")
    return float(_affectance_matrix(inst, ss, tau)[:, ss.index(i)].sum())


def _affectance_matrix(inst: Instance, ss: list[int], tau: float) -> np.ndarray:
    """A[j, i] = affectance of ss[j] on ss[i]; zero diagonal."""
    a = inst.metric.alpha
    idx = np.asarray(ss, dtype=int)
    sens = inst.sens[idx]
    d = inst.dsr[np.ix_(idx, idx)]
    with np.errstate(divide="ignore"):
        out = (
            (sens ** (tau * a))[:, None]
            * (sens ** ((1.0 - tau) * a))[None, :]
            / d ** a
        )
    np.fill_diagonal(out, 0.0)
    return out


def is_tau_feasible(inst: Instance, s: Iterable[int], tau: float) -> bool:
    """Affectance form of feasibility under oblivious power: every in-set
    affectance sum strictly below one (noise scaled into the same frame)."""
    ss = validate_subset(s, inst.n)
    if not ss:
        raise UsageError("feasibility of an empty set is undefined")
    a = inst.metric.alpha
    idx = np.asarray(ss, dtype=int)
    sums = _affectance_matrix(inst, ss, tau).sum(axis=0)
    noise_term = inst.noises[idx] * inst.sens[idx] ** ((1.0 - tau) * a)
    return bool(np.all(sums + noise_term < 1.0))


def is_bidirectionally_p_feasible(inst: Instance, s: Iterable[int], tau: float) -> bool:
    """Conservative orientation-free feasibility under oblivious power.

    Uses the minimum endpoint distance between each pair in the interference
    estimate, so a True answer certifies feasibility no matter how the links
    of s are individually reversed.
    """
    ss = validate_subset(s, inst.n)
    if not ss:
        raise UsageError("feasibility of an empty set is undefined")
    a = inst.metric.alpha
    idx = np.asarray(ss, dtype=int)
    sens = inst.sens[idx]
    d = inst.dmin[np.ix_(idx, idx)]
    with np.errstate(divide="ignore"):
        aff = (
            (sens ** (tau * a))[:, None]
            * (sens ** ((1.0 - tau) * a))[None, :]
            / d ** a
        )
    np.fill_diagonal(aff, 0.0)
    sums = aff.sum(axis=0)
    noise_term = inst.noises[idx] * sens ** ((1.0 - tau) * a)
    return bool(np.all(sums + noise_term < 1.0))


def bidirectional_feasible_exact(inst: Instance, s: Iterable[int], tau: float) -> bool:
    """Exhaustive orientation check (test oracle): the set must be feasible
    under oblivious power for every one of the 2^|s| reversal patterns."""
    ss = validate_subset(s, inst.n)
    if len(ss) > 15:
        raise UsageError("exact orientation enumeration is limited to 15 links")
    if not ss:
        raise UsageError("feasibility of an empty set is undefined")
    a = inst.metric.alpha
    k = len(ss)
    pw = inst.sens[np.asarray(ss)] ** (tau * a)
    betas = inst.betas[np.asarray(ss)]
    lengths = inst.lengths[np.asarray(ss)]
    noises = inst.noises[np.asarray(ss)]
    endpoints = [(inst.links[i].s, inst.links[i].r) for i in ss]

    for pattern in range(1 << k):
        senders = [
            endpoints[t][1] if pattern >> t & 1 else endpoints[t][0] for t in range(k)
        ]
        receivers = [
            endpoints[t][0] if pattern >> t & 1 else endpoints[t][1] for t in range(k)
        ]
        ok = True
        for ti in range(k):
            denom = noises[ti]
            for tj in range(k):
                if tj == ti:
                    continue
                d = inst.node_distance(senders[tj], receivers[ti])
                if d == 0.0:
                    ok = False
                    break
                denom += pw[tj] / d ** a
            if not ok:
                break
            signal = pw[ti] / lengths[ti] ** a
            if denom > 0 and signal / denom <= betas[ti]:
                ok = False
                break
            # denom == 0 means no interference and no noise: feasible
        if not ok:
            return False
    return True


# ----------------------------------------------------------------------
# length-weighted interference functional (uniform-threshold certificate)


def kesselheim_I(inst: Instance, L: Iterable[int]) -> float:
    """Maximum, over links i of L, of the summed normalized interference of
    the links of L no longer than i on i, measured with minimum endpoint
    distances.  Equal-length links count toward each other.

    Small values certify feasibility with power control; feasible sets with
    thresholds at least 3**alpha always have bounded values.
    """
    ss = validate_subset(L, inst.n)
    if not ss:
        raise UsageError("interference functional of an empty set is undefined")
    a = inst.metric.alpha
    idx = np.asarray(ss, dtype=int)
    sens = inst.sens[idx]
    lengths = inst.lengths[idx]
    d = inst.dmin[np.ix_(idx, idx)]
    k = len(ss)
    # shorter[j, i]: j counts toward i's sum; equal lengths count both ways
    lj = lengths[:, None]
    li = lengths[None, :]
    idj = idx[:, None]
    idi = idx[None, :]
    shorter = (lj <= li) & (idj != idi)
    if np.any(shorter & (d == 0.0)):
        raise UsageError("coincident endpoints across distinct links: distance zero")
    with np.errstate(divide="ignore"):
        contrib = sens[:, None] ** a / d ** a
    contrib = np.where(shorter, contrib, 0.0)
    return float(np.max(contrib.sum(axis=0)))


def kesselheim_threshold(alpha: float) -> float:
    return 1.0 / (12.0 * 3.0 ** alpha)


def kesselheim_sufficient(inst: Instance, L: Iterable[int]) -> bool:
    """True when the interference functional is below the constant that
    guarantees feasibility with power control."""
    return kesselheim_I(inst, L) < kesselheim_threshold(inst.metric.alpha)


def necessary_interference_bound(inst: Instance, L: Iterable[int]) -> float:
    """The same functional, exposed for the converse direction: for feasible
    sets with thresholds >= 3**alpha it stays below an absolute constant, so
    recording it gives an empirical necessity gauge."""
    return kesselheim_I(inst, L)


# ----------------------------------------------------------------------
# spectral feasibility oracle


def _gain_matrix(inst: Instance, ss: list[int]) -> np.ndarray | None:
    """B[a, b] = beta_i * l_i**alpha / d(s_j, r_i)**alpha for i = ss[a],
    j = ss[b], zero diagonal.  None when an interferer sits at distance zero
    (immediately infeasible)."""
    a = inst.metric.alpha
    idx = np.asarray(ss, dtype=int)
    d_ji = inst.dsr[np.ix_(idx, idx)].T  # [i, j] = d(s_j, r_i)
    off = ~np.eye(len(ss), dtype=bool)
    if np.any((d_ji == 0.0) & off):
        return None
    with np.errstate(divide="ignore"):
        B = (inst.betas[idx] * inst.lengths[idx] ** a)[:, None] / d_ji ** a
    np.fill_diagonal(B, 0.0)
    return B


def spectral_feasibility_oracle(inst: Instance, s: Iterable[int]) -> FeasibilityReport:
    """Exact feasibility with arbitrary power control, zero noise.

    The set is feasible iff the spectral radius of the normalized gain matrix
    is strictly below one.  The radius is estimated by power iteration with
    two-sided bounds; a strictly positive witness power vector is recovered
    by solving the linear system when feasible.
    """
    ss = validate_subset(s, inst.n)
    if not ss:
        raise UsageError("feasibility of an empty set is undefined")
    if len(ss) > _SPECTRAL_SIZE_CAP:
        raise UsageError(f"spectral oracle is limited to {_SPECTRAL_SIZE_CAP} links")
    if np.any(inst.noises[np.asarray(ss)] > 0):
        raise PreconditionError("spectral oracle requires zero noise on the set")

    if len(ss) == 1:
        i = ss[0]
        return FeasibilityReport(
            feasible=True,
            method="spectral-oracle",
            per_link_sir={i: math.inf},
            witness_power={i: 1.0},
            radius=0.0,
        )

    B = _gain_matrix(inst, ss)
    if B is None:
        return FeasibilityReport(
            feasible=False,
            method="spectral-oracle",
            radius=math.inf,
            detail="an interfering sender coincides with a receiver",
        )

    if len(ss) == 2:
        # the two-link radius is exact: eigenvalues are +-sqrt(B01 * B10)
        radius = math.sqrt(B[0, 1] * B[1, 0])
        lo = hi = radius
        converged = True
    else:
        radius, lo, hi, converged = _power_iteration_radius(B)
    threshold = 1.0 - SPECTRAL_MARGIN
    if not converged:
        # undecided only if the two-sided bounds straddle the threshold
        if hi < threshold:
            feasible = True
        elif lo >= threshold:
            feasible = False
        else:
            return FeasibilityReport(
                feasible=None,
                method="spectral-oracle",
                radius=radius,
                detail="power iteration did not converge",
            )
    else:
        feasible = radius < threshold

    if not feasible:
        return FeasibilityReport(feasible=False, method="spectral-oracle", radius=radius)

    k = len(ss)
    witness = np.linalg.solve(np.eye(k) - B, np.ones(k))
    if np.any(witness <= 0) or not np.all(np.isfinite(witness)):
        # entries spanning many decades can wreck the direct solve even at
        # radius < 1; the series sum is positive by construction instead
        witness = _neumann_witness(B)
    if witness is None:
        return FeasibilityReport(
            feasible=True,
            method="spectral-oracle",
            radius=radius,
            detail="feasible, but no witness recoverable at this conditioning",
        )
    sirs = _sir_vector(inst, ss, witness)
    return FeasibilityReport(
        feasible=True,
        method="spectral-oracle",
        per_link_sir={i: float(v) for i, v in zip(ss, sirs)},
        witness_power={i: float(v) for i, v in zip(ss, witness)},
        radius=radius,
    )


def _neumann_witness(B: np.ndarray, max_iter: int = 200_000) -> np.ndarray | None:
    """Positive solution of (I - B) P = 1 by iterating P <- B P + 1.

    Monotone increasing partial sums, so every iterate is strictly positive;
    converges whenever the radius is below one, at its rate."""
    n = B.shape[0]
    p = np.ones(n)
    for _ in range(max_iter):
        q = B @ p + 1.0
        if not np.all(np.isfinite(q)):
            return None
        if np.all(np.abs(q - p) <= 1e-14 * q):
            return q
        p = q
    return None


def _power_iteration_radius(B: np.ndarray) -> tuple[float, float, float, bool]:
    """Spectral radius of a nonnegative matrix via power iteration on B + I.

    The identity shift keeps the iterate strictly positive and the iteration
    aperiodic; two-sided bounds come from the min and max of the per-entry
    growth ratios, which bracket the radius at every step.
    """
    n = B.shape[0]
    M = B + np.eye(n)
    v = np.full(n, 1.0 / n)
    lo_best, hi_best = 0.0, math.inf
    for _ in range(_POWER_ITER_MAX):
        w = M @ v
        ratios = w / v
        lo = float(np.min(ratios)) - 1.0
        hi = float(np.max(ratios)) - 1.0
        lo_best = max(lo_best, lo)
        hi_best = min(hi_best, hi)
        if hi - lo < _POWER_ITER_TOL:
            return 0.5 * (lo + hi), lo_best, hi_best, True
        total = float(np.sum(w))
        if not math.isfinite(total) or total <= 0:
            return math.inf, lo_best, math.inf, False
        v = w / total
    mid = 0.5 * (lo_best + min(hi_best, lo_best + 1.0))
    return mid, lo_best, hi_best, False


def fixed_point_feasibility_oracle(
    inst: Instance, s: Iterable[int], iterations: int = 2000
) -> bool:
    """Independent reference oracle: iterate the minimal-power fixed point
    P <- B P + 1.  The iteration converges exactly when the set is feasible
    and diverges otherwise; with a finite budget the answer is only reliable
    away from the boundary (roughly 1e-3 in spectral radius at the default).
    Small sets only; used to cross-check the spectral oracle."""
    ss = validate_subset(s, inst.n)
    if not ss:
        raise UsageError("feasibility of an empty set is undefined")
    if len(ss) == 1:
        return True
    B = _gain_matrix(inst, ss)
    if B is None:
        return False
    p = np.ones(len(ss))
    bound = 1e150
    delta = math.inf
    for _ in range(iterations):
        nxt = B @ p + 1.0
        if not np.all(np.isfinite(nxt)) or np.max(nxt) > bound:
            return False
        delta = float(np.max(np.abs(nxt - p)))
        p = nxt
        if delta <= 1e-12 * max(1.0, float(np.max(p))):
            return True
    # contraction too slow to certify: fall back to comparing the last
    # increment; radii within about 1e-3 of one may need more iterations
    return bool(delta < 1e-6 * max(1.0, float(np.max(p))))


# ----------------------------------------------------------------------
# t-strong sets and signal strengthening


def is_t_strong(
    inst: Instance, s: Iterable[int], p: PowerAssignment, t: float
) -> bool:
    """A set is t-strong when every link's received signal, normalized by its
    sensitivity, strictly beats t times the in-set interference plus noise."""
    if t <= 0:
        raise UsageError("strength factor t must be positive")
    ss = validate_subset(s, inst.n)
    if not ss:
        raise UsageError("strength of an empty set is undefined")
    a = inst.metric.alpha
    idx = np.asarray(ss, dtype=int)
    pw = p.powers(inst, ss)
    lhs = pw / inst.sens[idx] ** a
    if len(ss) == 1:
        return bool(lhs[0] > inst.noises[idx][0])
    d = inst.dsr[np.ix_(idx, idx)]
    with np.errstate(divide="ignore"):
        gains = pw[:, None] / d ** a
    np.fill_diagonal(gains, 0.0)
    rhs = t * gains.sum(axis=0) + inst.noises[idx]
    return bool(np.all(lhs > rhs))


def t_strong_partition(
    inst: Instance, s: Iterable[int], p: PowerAssignment, t: float
) -> list[list[int]]:
    """Partition a 1-strong set into t-strong parts.

    Greedy: walk links in nondecreasing sensitivity and place each into the
    first-qualifying part of least combined in/out affectance, opening a new
    part when none qualifies.  The expected part count is about 2t; exceeding
    ceil(2t) only raises a warning since the greedy rule carries no hard
    bound.
    """
    ss = validate_subset(s, inst.n)
    if not ss:
        raise UsageError("cannot partition an empty set")
    if t <= 0:
        raise UsageError("strength factor t must be positive")
    if not is_t_strong(inst, ss, p, 1.0):
        raise PreconditionError("input set is not 1-strong under the given power")

    a = inst.metric.alpha
    order = sorted(ss, key=lambda i: (inst.sens[i], i))
    pw = {i: float(v) for i, v in zip(ss, p.powers(inst, ss))}
    parts: list[list[int]] = []

    def part_is_t_strong(members: list[int]) -> bool:
        return is_t_strong(inst, members, p, t)

    def affectance_score(v: int, members: list[int]) -> float:
        score = 0.0
        for j in members:
            d_jv = inst.dsr[j, v]
            d_vj = inst.dsr[v, j]
            incoming = (pw[j] / d_jv ** a) / (pw[v] / inst.sens[v] ** a) if d_jv > 0 else math.inf
            outgoing = (pw[v] / d_vj ** a) / (pw[j] / inst.sens[j] ** a) if d_vj > 0 else math.inf
            score += incoming + outgoing
        return score

    for v in order:
        best = None
        best_score = math.inf
        for pi, members in enumerate(parts):
            if part_is_t_strong(members + [v]):
                sc = affectance_score(v, members)
                if sc < best_score:
                    best, best_score = pi, sc
        if best is None:
            parts.append([v])
        else:
            parts[best].append(v)

    for members in parts:
        if not part_is_t_strong(members):
            raise InternalError("t-strong partition produced a weak part")
    expected = math.ceil(2 * t)
    if len(parts) > expected:
        warnings.warn(
            f"t-strong partition used {len(parts)} parts (expected at most {expected})",
            stacklevel=2,
        )
    return parts


# ----------------------------------------------------------------------
# weak links and the stretching transform


def max_servable_length(p_max: float, noise: float, alpha: float) -> float:
    """Length at which full power exactly meets the noise floor."""
    if not (p_max > 0 and noise > 0):
        raise UsageError("p_max and noise must be positive")
    return (p_max / noise) ** (1.0 / alpha)


def weak_length_threshold(p_max: float, noise: float, alpha: float) -> float:
    """Links at least this long are weak: full power at most twice noise."""
    return max_servable_length(p_max, noise, alpha) / 2.0 ** (1.0 / alpha)


def is_weak_link(inst: Instance, i: int, p_max: float, noise: float) -> bool:
    if not 0 <= i < inst.n:
        raise UsageError(f"link id out of range: {i}")
    return p_max <= 2.0 * noise * inst.lengths[i] ** inst.metric.alpha


def length_stretch(x: float, l_max: float, alpha: float) -> float:
    """Effective length of a noisy link of true length x when the noise
    eats into the power budget: x / (1 - (x / l_max)**alpha)**(1/alpha).
    Increasing on [0, l_max), diverging at l_max."""
    if not 0.0 <= x < l_max:
        raise UsageError("length_stretch is defined on [0, l_max)")
    u = (x / l_max) ** alpha
    return x / (1.0 - u) ** (1.0 / alpha)


def length_stretch_inverse(y: float, l_max: float, alpha: float) -> float:
    """Inverse of length_stretch by bisection; the returned value x satisfies
    length_stretch(x) >= y (upper bracket endpoint), so weakness checks done
    downstream never fail to rounding."""
    if y <= 0:
        raise UsageError("length_stretch_inverse needs a positive argument")
    lo, hi = 0.0, l_max
    # shrink hi into the domain: g(hi') >= y for some representable hi' < l_max
    hi = np.nextafter(l_max, 0.0)
    if length_stretch(hi, l_max, alpha) < y:
        return hi
    while hi - lo > 1e-13 * hi:
        mid = 0.5 * (lo + hi)
        if length_stretch(mid, l_max, alpha) >= y:
            hi = mid
        else:
            lo = mid
    return hi


def weak_link_transform(inst: Instance, p_max: float, noise: float) -> Instance:
    """Map an all-strong instance onto an all-weak one preserving scheduling
    structure: senders are scaled out by the ratio of the maximum servable
    length to the shortest link, and every length is re-stretched so the
    noise-adjusted effective length scales by exactly that ratio.
    """
    if inst.metric.kind != "euclidean":
        raise PreconditionError("weak-link transform requires a euclidean instance")
    if inst.n == 0:
        raise UsageError("cannot transform an empty instance")
    if np.any(inst.betas != 1.0):
        raise PreconditionError("weak-link transform requires beta == 1 everywhere")
    alpha = inst.metric.alpha
    l_max = max_servable_length(p_max, noise, alpha)
    threshold = weak_length_threshold(p_max, noise, alpha)
    if np.any(inst.lengths >= threshold):
        raise PreconditionError("weak-link transform requires every input link strong")

    l_min = float(np.min(inst.lengths))
    X = l_max / l_min

    nodes: list[list[float]] = []
    links: list[Link] = []
    for lk in inst.links:
        s_old = inst.nodes[lk.s]
        r_old = inst.nodes[lk.r]
        length = inst.lengths[lk.id]
        s_new = X * s_old
        new_len = length_stretch_inverse(X * length, l_max, alpha)
        direction = (r_old - s_old) / length
        r_new = s_new + new_len * direction
        si = len(nodes)
        nodes.append([float(c) for c in s_new])
        nodes.append([float(c) for c in r_new])
        links.append(
            Link(id=lk.id, s=si, r=si + 1, beta=1.0, weight=lk.weight, noise=noise)
        )

    out = Instance(
        metric=MetricContext(
            kind="euclidean",
            alpha=alpha,
            m=inst.metric.m,
            dim=inst.metric.dim,
            noise_model="per-link",
        ),
        links=links,
        nodes=nodes,
        sensitivity_floor=inst.sensitivity_floor,
        provenance={
            "transform": "weak-link-stretch",
            "p_max": p_max,
            "noise": noise,
            "scale": X,
        },
    )
    for i in range(out.n):
        if not is_weak_link(out, i, p_max, noise):
            raise InternalError("weak-link transform produced a strong link")
    return out
