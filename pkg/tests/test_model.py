"""Data model: metric contexts, links, instances, distance matrices."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from linksketch.errors import UsageError
from linksketch.model import (
    SENSITIVITY_FLOOR_FACTOR,
    Instance,
    Link,
    MetricContext,
    validate_subset,
)

from conftest import line_instance


# ----------------------------------------------------------------------
# validation


def test_metric_context_rejects_bad_parameters():
    with pytest.raises(UsageError):
        MetricContext(kind="spherical", alpha=3.0, m=2, dim=2)
    with pytest.raises(UsageError):
        MetricContext(kind="euclidean", alpha=2.0, m=2, dim=2)  # alpha == m
    with pytest.raises(UsageError):
        MetricContext(kind="euclidean", alpha=3.0, m=2, dim=4)
    with pytest.raises(UsageError):
        MetricContext(kind="euclidean", alpha=3.0, m=3, dim=2)  # m != dim


def test_link_rejects_bad_fields():
    with pytest.raises(UsageError):
        Link(id=0, s=0, r=1, beta=0.5)
    with pytest.raises(UsageError):
        Link(id=0, s=0, r=1, beta=1.0, weight=-1.0)
    with pytest.raises(UsageError):
        Link(id=0, s=0, r=1, beta=1.0, noise=-0.1)
    with pytest.raises(UsageError):
        Link(id=0, s=0, r=1, beta=math.inf)


def test_instance_requires_contiguous_ids():
    m = MetricContext(kind="euclidean", alpha=3.0, m=2, dim=2)
    links = [Link(id=1, s=0, r=1, beta=1.0)]
    with pytest.raises(UsageError):
        Instance(m, links, nodes=[[0, 0], [1, 0]])


def test_instance_rejects_zero_length_link():
    m = MetricContext(kind="euclidean", alpha=3.0, m=2, dim=2)
    links = [Link(id=0, s=0, r=1, beta=1.0)]
    with pytest.raises(UsageError):
        Instance(m, links, nodes=[[2.0, 3.0], [2.0, 3.0]])


def test_instance_rejects_out_of_range_node():
    m = MetricContext(kind="euclidean", alpha=3.0, m=2, dim=2)
    links = [Link(id=0, s=0, r=5, beta=1.0)]
    with pytest.raises(UsageError):
        Instance(m, links, nodes=[[0, 0], [1, 0]])


def test_instance_rejects_oversized_coordinates():
    # beyond this, squared differences overflow inside distance computations
    m = MetricContext(kind="euclidean", alpha=3.0, m=2, dim=2)
    links = [Link(id=0, s=0, r=1, beta=1.0)]
    with pytest.raises(UsageError):
        Instance(m, links, nodes=[[0.0, 0.0], [1e160, 0.0]])
    Instance(m, links, nodes=[[0.0, 0.0], [1e150, 0.0]])


def test_matrix_metric_validation():
    m = MetricContext(kind="matrix", alpha=3.0, m=2)
    links = [Link(id=0, s=0, r=1, beta=1.0)]
    # asymmetric
    with pytest.raises(UsageError):
        Instance(m, links, dmatrix=[[0, 1], [2, 0]])
    # nonzero diagonal
    with pytest.raises(UsageError):
        Instance(m, links, dmatrix=[[1, 1], [1, 0]])
    # triangle violation: d(0,2)=10 > d(0,1)+d(1,2)=2
    bad = [[0, 1, 10], [1, 0, 1], [10, 1, 0]]
    with pytest.raises(UsageError):
        Instance(m, [Link(id=0, s=0, r=1, beta=1.0)], dmatrix=bad)
    # a valid 3-point metric goes through
    ok = [[0, 1, 2], [1, 0, 1], [2, 1, 0]]
    inst = Instance(m, [Link(id=0, s=0, r=2, beta=1.0)], dmatrix=ok)
    assert inst.lengths[0] == 2.0


# ----------------------------------------------------------------------
# geometry: hand-checked values


def test_asymmetric_cross_distances_on_a_line():
    # link 0: 0 -> 1, link 1: 5 -> 6, both unit length
    inst = line_instance([(0.0, 1.0), (5.0, 6.0)])
    assert inst.lengths.tolist() == [1.0, 1.0]
    # sender of 0 at 0, receiver of 1 at 6
    assert inst.distance_asym(0, 1) == 6.0
    # sender of 1 at 5, receiver of 0 at 1
    assert inst.distance_asym(1, 0) == 4.0
    # minimum over the four endpoint pairs: |1 - 5| = 4
    assert inst.distance_min(0, 1) == 4.0
    assert inst.distance_min(1, 0) == 4.0


def test_dmin_is_min_of_four_endpoint_distances(rng):
    from conftest import plane_instance

    inst = plane_instance(rng, n=6)
    for i in range(inst.n):
        for j in range(inst.n):
            if i == j:
                continue
            si, ri = inst.links[i].s, inst.links[i].r
            sj, rj = inst.links[j].s, inst.links[j].r
            expect = min(
                inst.node_distance(si, sj),
                inst.node_distance(ri, rj),
                inst.node_distance(si, rj),
                inst.node_distance(sj, ri),
            )
            assert inst.dmin[i, j] == pytest.approx(expect, rel=1e-12)


def test_sensitivity_floor_and_exact_values():
    # beta = 8, alpha = 3: exact sensitivity = 8^(1/3) * length = 2 * length
    inst = line_instance([(0.0, 1.5)], betas=[8.0], floor=False)
    assert inst.sens[0] == pytest.approx(3.0)
    # with the floor on, 4 * 1.5 = 6 dominates 2 * 1.5 = 3
    inst2 = line_instance([(0.0, 1.5)], betas=[8.0], floor=True)
    assert inst2.sens[0] == pytest.approx(SENSITIVITY_FLOOR_FACTOR * 1.5)
    # beta = 5^3 = 125 at alpha 3 beats the floor: 5 * 1.5 = 7.5
    inst3 = line_instance([(0.0, 1.5)], betas=[125.0], floor=True)
    assert inst3.sens[0] == pytest.approx(7.5)


def test_sensitivity_diversity():
    inst = line_instance([(0.0, 1.0), (10.0, 12.0)])  # lengths 1 and 2
    assert inst.sensitivity_diversity() == pytest.approx(2.0)
    assert inst.sensitivity_diversity([0]) == pytest.approx(1.0)
    with pytest.raises(UsageError):
        inst.sensitivity_diversity([])


def test_noise_model_derived_from_links():
    inst = line_instance([(0.0, 1.0)], noises=[0.5])
    assert inst.metric.noise_model == "per-link"
    inst2 = line_instance([(0.0, 1.0)])
    assert inst2.metric.noise_model == "zero"


# ----------------------------------------------------------------------
# subsets


def test_validate_subset_normalizes():
    assert validate_subset([3, 1, 1, 2], 5) == [1, 2, 3]
    assert validate_subset([], 5) == []
    with pytest.raises(UsageError):
        validate_subset([5], 5)
    with pytest.raises(UsageError):
        validate_subset([-1], 5)


def test_validate_subset_returns_plain_ints():
    # ids must serialize to JSON without help, so no numpy scalars
    out = validate_subset(np.array([2, 0], dtype=np.int64), 5)
    assert all(type(v) is int for v in out)


# ----------------------------------------------------------------------
# serialization


def test_json_round_trip_euclidean(rng):
    from conftest import plane_instance

    inst = plane_instance(rng, n=5, beta=2.0)
    back = Instance.from_json(inst.to_json())
    assert back.n == inst.n
    assert np.allclose(back.lengths, inst.lengths)
    assert np.allclose(back.betas, inst.betas)
    assert back.metric == inst.metric
    assert back.sensitivity_floor == inst.sensitivity_floor


def test_json_round_trip_matrix():
    m = MetricContext(kind="matrix", alpha=3.0, m=2)
    dm = [[0, 2, 3], [2, 0, 2], [3, 2, 0]]
    inst = Instance(m, [Link(id=0, s=0, r=1, beta=1.0)], dmatrix=dm)
    back = Instance.from_json(inst.to_json())
    assert back.metric.kind == "matrix"
    assert np.array_equal(back.dmatrix, inst.dmatrix)


def test_from_json_reports_missing_fields():
    with pytest.raises(UsageError):
        Instance.from_json("{}")
    with pytest.raises(UsageError):
        Instance.from_json("not json")


# ----------------------------------------------------------------------
# properties over random geometry


@given(st.integers(0, 2 ** 31 - 1), st.integers(2, 10))
@settings(max_examples=60, deadline=None)
def test_cross_distance_matrices_satisfy_triangle_inequality(seed, n):
    from conftest import plane_instance

    inst = plane_instance(np.random.default_rng(seed), n=n)
    # d(s_i, r_j) <= d(s_i, r_i) + d(r_i, r_j) for any bridging endpoint
    dsr = inst.dsr
    for i in range(n):
        for j in range(n):
            ri_rj = inst.node_distance(inst.links[i].r, inst.links[j].r)
            assert dsr[i, j] <= dsr[i, i] + ri_rj + 1e-9


@given(st.integers(0, 2 ** 31 - 1), st.floats(0.1, 100.0))
@settings(max_examples=40, deadline=None)
def test_scaling_coordinates_scales_lengths(seed, scale):
    from conftest import plane_instance

    inst = plane_instance(np.random.default_rng(seed), n=4)
    m = inst.metric
    scaled = Instance(
        m,
        inst.links,
        nodes=inst.nodes * scale,
        sensitivity_floor=inst.sensitivity_floor,
    )
    assert np.allclose(scaled.lengths, inst.lengths * scale, rtol=1e-9)
    assert np.allclose(scaled.sens, inst.sens * scale, rtol=1e-9)
