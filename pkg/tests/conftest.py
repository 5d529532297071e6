"""Shared fixtures: small hand-built instances with known geometry."""
import numpy as np
import pytest

from linksketch.model import Instance, Link, MetricContext


def line_instance(positions, betas=None, alpha=3.0, m=2, floor=True, noises=None):
    """Links on the x-axis. positions is a list of (sender_x, receiver_x)."""
    nodes = []
    links = []
    for i, (sx, rx) in enumerate(positions):
        nodes.append([float(sx), 0.0])
        nodes.append([float(rx), 0.0])
        links.append(
            Link(
                id=i,
                s=2 * i,
                r=2 * i + 1,
                beta=1.0 if betas is None else float(betas[i]),
                noise=0.0 if noises is None else float(noises[i]),
            )
        )
    return Instance(
        MetricContext(kind="euclidean", alpha=alpha, m=m, dim=2),
        links,
        nodes=nodes,
        sensitivity_floor=floor,
    )


def plane_instance(rng, n=8, length_range=(1.0, 2.0), side=50.0, beta=1.0,
                   alpha=3.0, floor=False):
    """n random links in a square, disjoint node pairs."""
    nodes = []
    links = []
    for i in range(n):
        s = rng.uniform(0.0, side, 2)
        ln = rng.uniform(*length_range)
        th = rng.uniform(0.0, 2 * np.pi)
        r = s + ln * np.array([np.cos(th), np.sin(th)])
        nodes += [s.tolist(), r.tolist()]
        links.append(Link(id=i, s=2 * i, r=2 * i + 1, beta=beta))
    return Instance(
        MetricContext(kind="euclidean", alpha=alpha, m=2, dim=2),
        links,
        nodes=nodes,
        sensitivity_floor=floor,
    )


def shared_node_instance(rng, n_nodes=10, n_links=8, side=50.0, alpha=3.0):
    """Random links over a common node pool, so endpoints are shared."""
    while True:
        pts = rng.uniform(0.0, side, size=(n_nodes, 2))
        pairs = set()
        while len(pairs) < n_links:
            s, r = rng.integers(0, n_nodes, 2)
            if s != r:
                pairs.add((int(s), int(r)))
        links = [Link(id=i, s=s, r=r, beta=1.0) for i, (s, r) in enumerate(sorted(pairs))]
        try:
            return Instance(
                MetricContext(kind="euclidean", alpha=alpha, m=2, dim=2),
                links,
                nodes=pts,
            )
        except Exception:
            continue


@pytest.fixture
def two_far_links():
    """Unit links 40 apart: independent and comfortably feasible."""
    return line_instance([(0.0, 1.0), (40.0, 41.0)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
