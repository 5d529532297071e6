"""Certified schedules, the virtual-link expansion, and rate replication."""
import numpy as np
import pytest

from linksketch.conflict import SublinearF, build_graph, is_independent
from linksketch.errors import UsageError
from linksketch.generators import gen_general_metric_star, gen_ndependence
from linksketch.graphalg import max_clique_cover_size
from linksketch.scheduling import (
    Schedule,
    mcma_expand,
    mwisl_solve,
    online_schedule,
    rate_control_replicas,
    resolve_tau,
    tdma_schedule,
)
from linksketch.sinr import default_tau, spectral_feasibility_oracle

from conftest import line_instance, plane_instance, shared_node_instance

SQRT = SublinearF(kind="power", gamma=1.0, delta=0.5)
F_HI = SublinearF(kind="power", gamma=2.0, delta=5.0 / 6.0)


# ----------------------------------------------------------------------
# tau resolution


def test_resolve_tau_explicit_value_wins(two_far_links):
    assert resolve_tau(two_far_links, SQRT, 0.77) == 0.77
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(UsageError):
            resolve_tau(two_far_links, SQRT, bad)


def test_resolve_tau_follows_admissible_decay(two_far_links):
    # decay 0.9 is admissible at alpha=3, m=2 and selects its own midpoint
    steep = SublinearF(kind="power", gamma=2.0, delta=0.9)
    assert resolve_tau(two_far_links, steep, None) == pytest.approx(
        default_tau(3.0, 2.0, 0.9)
    )
    # decay 0.5 sits below the admissible window: fall back to the default
    assert resolve_tau(two_far_links, SQRT, None) == pytest.approx(29.0 / 36.0)
    polylog = SublinearF(kind="polylog", gamma=3.0, t=1.0)
    assert resolve_tau(two_far_links, polylog, None) == pytest.approx(29.0 / 36.0)


# ----------------------------------------------------------------------
# TDMA scheduling


def test_tdma_partitions_and_certifies(rng):
    inst = plane_instance(rng, n=10, side=30.0, floor=True)
    sched = tdma_schedule(inst, F_HI)
    g = build_graph(inst, F_HI)

    assert sched.covered() == set(range(10))
    assert sum(len(s.links) for s in sched.slots) == 10  # disjoint cover
    for slot in sched.slots:
        assert slot.report.feasible is True
        assert slot.report.method == "direct-sir"
        for a in slot.links:
            for b in slot.links:
                assert a == b or not g.adjacent(a, b)
    assert sched.num_slots == sched.meta["chi"] + sched.meta["splits"]
    assert sched.meta["power_mode"] == "oblivious-tau"


def test_tdma_empty_instance():
    from linksketch.model import Instance, MetricContext

    inst = Instance(
        MetricContext(kind="euclidean", alpha=3.0, m=2, dim=2),
        [],
        nodes=np.zeros((0, 2)),
    )
    sched = tdma_schedule(inst, F_HI)
    assert sched.num_slots == 0
    assert sched.meta["chi"] == 0


def test_tdma_splits_when_the_graph_misses_conflicts():
    # the star is one big color class, but only three links fit per slot
    star = gen_general_metric_star(16, 1.0)
    sched = tdma_schedule(star, SQRT, power_mode="global")
    assert sched.meta["chi"] == 1
    assert sched.meta["splits"] == 5
    assert sched.num_slots == 6
    assert sched.covered() == set(range(16))
    for slot in sched.slots:
        assert len(slot.links) <= 3
        assert slot.report.feasible is True


def test_tdma_chain_needs_a_slot_per_link():
    # complete conflict graph: the schedule degenerates to TDMA proper even
    # though half the chain is feasible simultaneously
    chain = gen_ndependence(5, SQRT, alpha=2.0)
    sched = tdma_schedule(chain, SQRT)
    assert sched.num_slots == 5
    assert sched.meta["splits"] == 0
    assert all(len(s.links) == 1 for s in sched.slots)


# ----------------------------------------------------------------------
# online scheduling


def test_online_schedule_requires_a_permutation(two_far_links):
    with pytest.raises(UsageError):
        online_schedule(two_far_links, F_HI, arrival_order=[0, 0])
    with pytest.raises(UsageError):
        online_schedule(two_far_links, F_HI, arrival_order=[1])


def test_online_schedule_slots_are_independent_and_certified(rng):
    inst = plane_instance(rng, n=9, side=25.0, floor=True)
    g = build_graph(inst, F_HI)
    for order in (None, list(reversed(range(9)))):
        sched = online_schedule(inst, F_HI, arrival_order=order)
        assert sched.covered() == set(range(9))
        assert sched.meta["online"] is True
        for slot in sched.slots:
            assert slot.report.feasible is True
            for a in slot.links:
                for b in slot.links:
                    assert a == b or not g.adjacent(a, b)


def test_online_clique_stream_opens_a_slot_each():
    chain = gen_ndependence(4, SQRT, alpha=2.0)
    sched = online_schedule(chain, SQRT, arrival_order=[3, 1, 2, 0])
    assert sched.num_slots == 4


# ----------------------------------------------------------------------
# weighted independent sets


def test_mwisl_selects_independent_certified_set(rng):
    inst = plane_instance(rng, n=10, side=20.0, floor=True)
    res = mwisl_solve(inst, F_HI)
    g = build_graph(inst, F_HI)
    assert is_independent(g, res.selected)
    assert res.report.feasible is True
    assert res.k_observed >= 1
    assert not res.degraded


def test_mwisl_prefers_the_heavier_conflicting_link():
    inst = line_instance([(0.0, 1.0), (3.0, 2.0)])
    res = mwisl_solve(inst, F_HI, weights=[1.0, 5.0])
    assert res.selected == frozenset({1})


def test_mwisl_zero_weights_fall_back_to_heaviest_single():
    inst = line_instance([(0.0, 1.0), (40.0, 41.0)])
    res = mwisl_solve(inst, F_HI, weights=[0.0, 0.0])
    assert res.selected == frozenset({0})
    assert res.report.feasible is True


def test_mwisl_degrades_to_a_certified_piece_on_the_star():
    star = gen_general_metric_star(16, 1.0)
    res = mwisl_solve(star, SQRT, power_mode="global")
    assert res.degraded is True
    assert len(res.selected) == 3
    assert res.report.feasible is True


def test_mwisl_validation(two_far_links):
    with pytest.raises(UsageError):
        mwisl_solve(line_instance([]), F_HI)
    with pytest.raises(UsageError):
        mwisl_solve(two_far_links, F_HI, weights=[1.0])


# ----------------------------------------------------------------------
# multi-channel / multi-antenna expansion


def _three_node_line():
    """Two links sharing the middle node: A->B and B->C."""
    from linksketch.model import Instance, Link, MetricContext

    return Instance(
        MetricContext(kind="euclidean", alpha=3.0, m=2, dim=2),
        [Link(id=0, s=0, r=1, beta=1.0), Link(id=1, s=1, r=2, beta=1.0)],
        nodes=[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
    )


def test_mcma_virtual_link_counts():
    inst = _three_node_line()
    g, virtuals = mcma_expand(
        inst,
        antennas=[2, 1, 3],
        channels=[["c1", "c2"], ["c1"], ["c1", "c2"]],
        f_hi=F_HI,
    )
    # link 0 shares only c1: 2*1 replicas; link 1 shares c1: 1*3 replicas
    assert g.n == len(virtuals) == 5
    assert [v.original for v in virtuals] == [0, 0, 1, 1, 1]
    assert all(v.channel == "c1" for v in virtuals)
    assert [v.id for v in virtuals] == list(range(5))


def test_mcma_warns_and_drops_channelless_links():
    inst = _three_node_line()
    with pytest.warns(UserWarning, match="no common channel"):
        g, virtuals = mcma_expand(
            inst,
            antennas=[1, 1, 1],
            channels=[["c1"], ["c2"], ["c2"]],
            f_hi=F_HI,
        )
    assert [v.original for v in virtuals] == [1]


def test_mcma_replicas_of_one_original_stay_independent():
    inst = _three_node_line()
    g, virtuals = mcma_expand(
        inst,
        antennas=[2, 2, 2],
        channels=[["c1", "c2"], ["c1", "c2"], ["c1", "c2"]],
        f_hi=F_HI,
    )
    for a in range(g.n):
        for b in range(a + 1, g.n):
            if virtuals[a].original == virtuals[b].original:
                assert not g.adjacent(a, b)


def test_mcma_antenna_slots_are_channel_qualified():
    inst = _three_node_line()
    g, virtuals = mcma_expand(
        inst,
        antennas=[1, 1, 1],
        channels=[["c1", "c2"], ["c1", "c2"], ["c1", "c2"]],
        f_hi=F_HI,
    )
    by_key = {(v.original, v.channel): v.id for v in virtuals}
    # same channel: the shared middle antenna forces a conflict
    assert g.adjacent(by_key[(0, "c1")], by_key[(1, "c1")])
    assert g.adjacent(by_key[(0, "c2")], by_key[(1, "c2")])
    # different channels: the antenna serves them at different times anyway
    assert not g.adjacent(by_key[(0, "c1")], by_key[(1, "c2")])
    assert not g.adjacent(by_key[(0, "c2")], by_key[(1, "c1")])


def test_mcma_far_links_on_one_channel_stay_independent(two_far_links):
    g, virtuals = mcma_expand(
        two_far_links,
        antennas=[1, 1, 1, 1],
        channels=[["c1"]] * 4,
        f_hi=SQRT,
    )
    assert g.n == 2
    assert not g.adjacent(0, 1)


def test_mcma_degenerate_expansion_is_isomorphic(rng):
    inst = shared_node_instance(rng)
    n_nodes = inst.nodes.shape[0]
    g_orig = build_graph(inst, F_HI)
    g_exp, virtuals = mcma_expand(
        inst, antennas=[1] * n_nodes, channels=[["c1"]] * n_nodes, f_hi=F_HI
    )
    assert g_exp.n == inst.n
    assert [v.original for v in virtuals] == list(range(inst.n))
    for a in range(inst.n):
        for b in range(a + 1, inst.n):
            assert g_exp.adjacent(a, b) == g_orig.adjacent(a, b)


def test_mcma_order_refines_sensitivity_order():
    inst = line_instance([(0.0, 3.0), (10.0, 11.0)])  # sens 12 and 4
    g, virtuals = mcma_expand(
        inst,
        antennas=[1, 1, 1, 1],
        channels=[["c1", "c2"]] * 4,
        f_hi=F_HI,
    )
    assert [v.original for v in virtuals] == [0, 0, 1, 1]
    # the short link (higher rank) goes first, channels in sorted order
    assert [(virtuals[i].original, virtuals[i].channel) for i in g.order] == [
        (1, "c1"),
        (1, "c2"),
        (0, "c1"),
        (0, "c2"),
    ]


@pytest.mark.filterwarnings("ignore:link .* has no common channel")
def test_mcma_single_antenna_cover_grows_by_at_most_two():
    pool = ["a", "b", "c", "d"]
    for trial in range(5):
        rng = np.random.default_rng(500 + trial)
        inst = shared_node_instance(rng)
        n_nodes = inst.nodes.shape[0]
        chans = []
        for _ in range(n_nodes):
            k = int(rng.integers(1, len(pool) + 1))
            chans.append(list(rng.choice(pool, size=k, replace=False)))
        g_exp, virtuals = mcma_expand(inst, [1] * n_nodes, chans, F_HI)
        k_orig = max_clique_cover_size(build_graph(inst, F_HI))
        assert max_clique_cover_size(g_exp) <= k_orig + 2


def test_mcma_validation(two_far_links):
    with pytest.raises(UsageError):
        mcma_expand(two_far_links, [1, 1], [["c1"]] * 4, F_HI)
    with pytest.raises(UsageError):
        mcma_expand(two_far_links, [1, 1, 0, 1], [["c1"]] * 4, F_HI)


# ----------------------------------------------------------------------
# rate-control replication


def test_rate_replicas_dyadic_doubling(two_far_links):
    table = [(1.0, 1.0), (2.0, 2.0), (4.0, 4.0), (8.0, 8.0)]
    out, weights, rmap = rate_control_replicas(two_far_links, table, levels=8)
    assert out.n == 8  # four replicas per link
    first = [r for r in rmap if r["original"] == 0]
    assert [r["weight"] for r in first] == [1.0, 2.0, 4.0, 8.0]
    assert list(out.betas[:4]) == [1.0, 2.0, 4.0, 8.0]
    # replicas are co-located with their original
    assert np.allclose(out.nodes[out.links[0].s], out.nodes[out.links[3].s])
    assert weights[3] == 8.0


def test_rate_replicas_constant_utility(two_far_links):
    out, weights, rmap = rate_control_replicas(two_far_links, [(1.0, 3.0)], levels=8)
    # levels 1 and 2 share the threshold and collapse to the heavier
    assert out.n == 2
    assert all(w == 2.0 for w in weights.values())
    assert list(out.betas) == [1.0, 1.0]


def test_rate_replicas_sub_one_thresholds_get_zero_weight(two_far_links):
    out, weights, rmap = rate_control_replicas(
        two_far_links, [(0.5, 1.0), (4.0, 2.0)], levels=8
    )
    per_link = [r for r in rmap if r["original"] == 0]
    assert [(r["weight"]) for r in per_link] == [0.0, 2.0]
    assert list(out.betas[:2]) == [1.0, 4.0]


def test_rate_replicas_callable_with_level_cap(two_far_links):
    out, weights, rmap = rate_control_replicas(
        two_far_links, lambda x: min(x, 8.0), levels=2
    )
    # reachable weights 1,2,4,8; the cap keeps the two heaviest
    per_link = sorted(w for i, w in weights.items() if rmap[i]["original"] == 0)
    assert per_link == [4.0, 8.0]
    assert sorted(out.betas[:2]) == [pytest.approx(4.0), pytest.approx(8.0)]


def test_rate_replicas_feasible_sets_use_one_replica_per_original(two_far_links):
    table = [(1.0, 1.0), (2.0, 2.0)]
    out, weights, rmap = rate_control_replicas(two_far_links, table, levels=4)
    assert out.n == 4
    by_orig = {}
    for vid, entry in enumerate(rmap):
        by_orig.setdefault(entry["original"], []).append(vid)
    # two replicas of one original can never be simultaneously feasible
    for ids in by_orig.values():
        rep = spectral_feasibility_oracle(out, ids)
        assert rep.feasible is False
    # weights never overstate the utility available at the threshold
    def table_value(x):
        best = 0.0
        for xi, u in table:
            if xi <= x:
                best = u
        return best

    for vid, entry in enumerate(rmap):
        assert entry["weight"] <= table_value(out.betas[vid]) + 1e-12


def test_rate_replicas_validation(two_far_links):
    with pytest.raises(UsageError):
        rate_control_replicas(two_far_links, [(1.0, 1.0)], levels=0)
    with pytest.raises(UsageError):
        rate_control_replicas(two_far_links, [], levels=2)
    with pytest.raises(UsageError):
        rate_control_replicas(two_far_links, [(1.0, 2.0), (2.0, 1.0)], levels=2)
    with pytest.raises(UsageError):
        rate_control_replicas(two_far_links, [(2.0, 1.0), (1.0, 2.0)], levels=2)
    with pytest.raises(UsageError):
        rate_control_replicas(two_far_links, {0: [(1.0, 1.0)]}, levels=2)
    with pytest.raises(UsageError):
        rate_control_replicas(two_far_links, lambda x: -x, levels=2)
    star = gen_general_metric_star(4, 1.0)
    with pytest.raises(UsageError):
        rate_control_replicas(star, [(1.0, 1.0)], levels=2)
