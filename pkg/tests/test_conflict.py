"""Scaling functions, iterated-application counts, and conflict graphs."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linksketch.conflict import (
    F_ONE,
    ConflictGraph,
    SublinearF,
    build_graph,
    f_star,
    is_independent,
    measure_tightness,
    sensitivity_order,
)
from linksketch.errors import PreconditionError, UsageError

from conftest import line_instance, plane_instance


# ----------------------------------------------------------------------
# scaling function validation and evaluation


def test_sublinear_kinds_validate():
    with pytest.raises(UsageError):
        SublinearF(kind="one", gamma=2.0)
    with pytest.raises(UsageError):
        SublinearF(kind="power", gamma=0.5, delta=0.5)  # gamma < 1
    with pytest.raises(UsageError):
        SublinearF(kind="power", gamma=2.0, delta=1.0)  # delta not < 1
    with pytest.raises(UsageError):
        SublinearF(kind="power", gamma=2.0, delta=0.0)
    with pytest.raises(UsageError):
        SublinearF(kind="polylog", gamma=2.0, t=0.0)
    with pytest.raises(UsageError):
        SublinearF(kind="warp", gamma=1.0)


def test_evaluation_hand_values():
    one = F_ONE
    assert one.evaluate(7.0) == 1.0

    p = SublinearF(kind="power", gamma=2.0, delta=0.5)
    assert p.evaluate(16.0) == pytest.approx(8.0)  # 2 * sqrt(16)

    # polylog floors at gamma: log2(2)^2 = 1, log2(16)^2 = 16
    pl = SublinearF(kind="polylog", gamma=3.0, t=2.0)
    assert pl.evaluate(2.0) == pytest.approx(3.0)
    assert pl.evaluate(16.0) == pytest.approx(48.0)
    assert pl.evaluate(1.0) == pytest.approx(3.0)  # max(log^t, 1) at x = 1

    # hatlog exponent is 2/(alpha - m): at alpha=3, m=2 it is 2
    hl = SublinearF(kind="hatlog", gamma=1.0)
    assert hl.evaluate(4.0, alpha=3.0, m=2) == pytest.approx(4.0)  # log2(4)^2
    with pytest.raises(UsageError):
        hl.evaluate(4.0)  # needs alpha, m
    with pytest.raises(UsageError):
        hl.evaluate(4.0, alpha=2.0, m=2.0)

    with pytest.raises(UsageError):
        p.evaluate(0.5)  # domain is [1, oo)


@given(
    st.floats(1.0, 1e12),
    st.floats(1.0, 50.0),
    st.floats(0.05, 0.95),
)
@settings(max_examples=100, deadline=None)
def test_scalar_and_array_evaluation_agree(x, gamma, delta):
    f = SublinearF(kind="power", gamma=gamma, delta=delta)
    arr = f.evaluate_array(np.array([x, x]))
    assert arr[0] == pytest.approx(f.evaluate(x), rel=1e-12)


def test_json_round_trip():
    for f in (
        F_ONE,
        SublinearF(kind="power", gamma=3.0, delta=0.25),
        SublinearF(kind="polylog", gamma=2.0, t=0.5),
        SublinearF(kind="hatlog", gamma=9.0),
    ):
        back = SublinearF.from_json_dict(f.to_json_dict())
        assert back == f


# ----------------------------------------------------------------------
# iterated application count, against a direct reference implementation


def iterate_until_threshold(fn, x, x0, cap=10000):
    """Reference for f_star: apply fn until the value is at most x0."""
    if x <= x0:
        return 1
    count = 0
    while x > x0:
        x = fn(x)
        count += 1
        assert count < cap
    return count


def test_fstar_power_matches_direct_iteration():
    # f(x) = sqrt(x): fixed point threshold is 1 + 1 = 2
    f = SublinearF(kind="power", gamma=1.0, delta=0.5)
    for x, expect in [(1.5, 1), (2.0, 1), (256.0, 3), (2.0 ** 64, 6)]:
        ref = iterate_until_threshold(math.sqrt, x, 2.0)
        assert ref == expect
        assert f_star(f, x) == expect


def test_fstar_scaled_power_matches_direct_iteration():
    # f(x) = 2 sqrt(x): f(x) >= x up to x = 4, so the threshold is 5
    f = SublinearF(kind="power", gamma=2.0, delta=0.5)
    for x in [1.0, 5.0, 30.0, 1e6, 1e30]:
        ref = iterate_until_threshold(lambda y: 2.0 * math.sqrt(y), x, 5.0)
        assert f_star(f, x) == ref


def test_fstar_polylog_matches_direct_iteration():
    # f(x) = max(log2(x), 1): fixed points are 1..2, threshold about 3
    f = SublinearF(kind="polylog", gamma=1.0, t=1.0)

    def step(y):
        return max(math.log2(y), 1.0) if y > 1 else 1.0

    # find the threshold the same way the library defines it
    y = 2.0
    while step(y) >= y:
        y *= 2
    lo, hi = y / 2, y
    while hi - lo > 1e-9:
        mid = (lo + hi) / 2
        if step(mid) >= mid:
            lo = mid
        else:
            hi = mid
    x0 = hi + 1.0
    for x in [1.0, 4.0, 100.0, 2.0 ** 40, 2.0 ** 512]:
        assert f_star(f, x) == iterate_until_threshold(step, x, x0)


def test_fstar_constant_function_is_one_step():
    assert f_star(F_ONE, 1e12) == 1  # f == 1 drops anything at once... once
    assert f_star(F_ONE, 1.0) == 1


def test_fstar_rejects_bad_arguments():
    f = SublinearF(kind="power", gamma=1.0, delta=0.5)
    with pytest.raises(UsageError):
        f_star(f, 0.5)
    with pytest.raises(UsageError):
        f_star(f, math.inf)


# ----------------------------------------------------------------------
# graph construction: hand-checked adjacency


def test_pairwise_rule_on_a_line():
    # two unit links with beta 1 and the default floor: sensitivities 4, 4.
    # reversed second link so both cross distances equal x, the gap:
    #   link 0: 0 -> 1, link 1: x+1 -> x.
    # edge iff x * x < 16 under f == 1.
    def gap_graph(x):
        inst = line_instance([(0.0, 1.0), (x + 1.0, x)])
        return build_graph(inst, F_ONE)

    g_close = gap_graph(3.0)  # 9 < 16: edge
    assert g_close.adjacent(0, 1)
    g_tie = gap_graph(4.0)  # 16 == 16: ties are non-edges
    assert not g_tie.adjacent(0, 1)
    g_far = gap_graph(5.0)  # 25 > 16: non-edge
    assert not g_far.adjacent(0, 1)


def test_scaling_function_widens_adjacency():
    # same geometry, lengths 1 and 8 so the diversity is 8.
    # f = power(1, 1/2): rhs factor sqrt(8) = 2.83 vs f == 1.
    inst = line_instance([(0.0, 1.0), (30.0, 38.0)])
    assert not build_graph(inst, F_ONE).adjacent(0, 1)
    f = SublinearF(kind="power", gamma=1.0, delta=0.5)
    # cross products: d(s0, r1) = 38, d(s1, r0) = 29 -> 1102
    # sens product 4 * 32 = 128; 128 * sqrt(8) = 362 < 1102: still no edge
    assert not build_graph(inst, f).adjacent(0, 1)
    f_big = SublinearF(kind="power", gamma=9.0, delta=0.5)
    # 128 * 9 * sqrt(8) = 3258 > 1102: now an edge
    assert build_graph(inst, f_big).adjacent(0, 1)


def test_uniform_mode_uses_min_distance_and_min_sensitivity():
    # lengths 1 and 2, gap between nearest endpoints = 5
    inst = line_instance([(0.0, 1.0), (6.0, 8.0)])
    # sens: 4 and 8; min sens * f(2) with f == 1 gives 4 < 5: no edge
    assert not build_graph(inst, F_ONE, uniform_mode=True).adjacent(0, 1)
    # f = power(1.3, 0.5): 4 * 1.3 * sqrt(2) = 7.35 > 5: edge
    f = SublinearF(kind="power", gamma=1.3, delta=0.5)
    assert build_graph(inst, f, uniform_mode=True).adjacent(0, 1)


def test_adjacency_is_symmetric_and_irreflexive(rng):
    inst = plane_instance(rng, n=12, side=12.0)
    g = build_graph(inst, SublinearF(kind="power", gamma=2.0, delta=0.5))
    for i in range(g.n):
        assert not g.adjacent(i, i)
        for j in g.neighbors[i]:
            assert g.adjacent(j, i)


def test_order_is_by_sensitivity_then_id(rng):
    inst = plane_instance(rng, n=10, length_range=(1.0, 9.0))
    g = build_graph(inst, F_ONE)
    sens = [inst.sens[v] for v in g.order]
    assert sens == sorted(sens)
    assert sorted(g.order) == list(range(g.n))
    # all ties broken by id
    assert sensitivity_order(np.array([2.0, 1.0, 2.0])) == (1, 0, 2)


def test_baseline_graph_is_subgraph_of_scaled_graph(rng):
    for _ in range(20):
        inst = plane_instance(rng, n=10, side=15.0, length_range=(0.5, 4.0))
        g_lo = build_graph(inst, F_ONE)
        g_hi = build_graph(inst, SublinearF(kind="power", gamma=3.0, delta=0.5))
        for i in range(inst.n):
            assert set(g_lo.neighbors[i]) <= set(g_hi.neighbors[i])


def test_overflowing_products_fall_back_to_log_comparison():
    # matrix metrics admit distances near the float64 ceiling, where the
    # pairwise products overflow to inf on both sides of the rule.  the
    # two links below have length 1e300 each.
    from linksketch.model import Instance, Link, MetricContext

    def giant(cross, floor):
        big = 1e300
        dm = [
            [0.0, big, cross, cross],
            [big, 0.0, cross, cross],
            [cross, cross, 0.0, big],
            [cross, cross, big, 0.0],
        ]
        links = [Link(id=0, s=0, r=1, beta=1.0), Link(id=1, s=2, r=3, beta=1.0)]
        inst = Instance(
            MetricContext(kind="matrix", alpha=3.0, m=2),
            links,
            dmatrix=dm,
            sensitivity_floor=floor,
        )
        return build_graph(inst, F_ONE)

    # floored sensitivities 4e300: rhs = 1.6e601 beats cross product 1e600
    assert giant(1e300, True).adjacent(0, 1)
    # exact sensitivities 1e300: rhs = 1e600 loses to cross product 4e600
    assert not giant(2e300, False).adjacent(0, 1)


def test_empty_and_single_instances():
    inst = line_instance([(0.0, 1.0)])
    g = build_graph(inst, F_ONE)
    assert g.n == 1 and g.neighbors == ((),)
    assert g.edge_count() == 0


# ----------------------------------------------------------------------
# independence and tightness measurement


def test_is_independent():
    inst = line_instance([(0.0, 1.0), (1.5, 2.5), (40.0, 41.0)])
    g = build_graph(inst, F_ONE)
    assert g.adjacent(0, 1)
    assert not is_independent(g, [0, 1])
    assert is_independent(g, [0, 2])
    assert is_independent(g, [])


def test_measure_tightness_requires_baseline_independence(rng):
    inst = plane_instance(rng, n=8, side=8.0)
    g_lo = build_graph(inst, F_ONE)
    # find an adjacent pair; the dense side square guarantees one
    pair = next(
        ((i, j) for i in range(8) for j in g_lo.neighbors[i] if i < j), None
    )
    assert pair is not None
    with pytest.raises(PreconditionError):
        measure_tightness(inst, SublinearF(kind="power", gamma=2.0, delta=0.5), list(pair))


def test_measure_tightness_reports_ratio(rng):
    from linksketch.graphalg import random_maximal_independent_set

    inst = plane_instance(rng, n=20, side=30.0, length_range=(0.5, 8.0))
    g_lo = build_graph(inst, F_ONE)
    s = random_maximal_independent_set(g_lo, rng)
    out = measure_tightness(inst, SublinearF(kind="power", gamma=2.0, delta=0.5), s)
    assert out["chi_hi"] >= 1
    assert out["fstar_bound"] >= 1
    assert out["ratio"] == pytest.approx(out["chi_hi"] / out["fstar_bound"])
