import numpy as np
import pytest

from gossip_age.topology import (
    ConfigError,
    NodeSubset,
    TopologySpec,
    build_network,
    grid_coords,
    grid_node,
    lambda0_of_set,
    lambda_into_set,
    neighbors_of_set,
)


def test_torus_2d_rates():
    net = build_network(TopologySpec("torus-grid", side=10, lam=1.0, lam_e=1.0))
    assert net.n == 100
    assert all(len(nbrs) == 4 for nbrs in net.out_neighbors)
    assert all(r == 0.25 for rates in net.out_rates for r in rates)
    assert all(s == 0.01 for s in net.source_rates)


def test_complete_n2_rates():
    net = build_network(TopologySpec("complete", n=2, lam=1.0))
    assert net.rate(0, 1) == 1.0
    assert net.rate(1, 0) == 1.0
    assert net.source_rates == (0.5, 0.5)


def test_torus_3d():
    net = build_network(TopologySpec("torus-grid", side=3, dimension=3, lam=1.0))
    assert net.n == 27
    assert all(len(nbrs) == 6 for nbrs in net.out_neighbors)
    assert all(r == pytest.approx(1 / 6) for rates in net.out_rates for r in rates)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="torus-grid", side=2),
        dict(kind="complete", n=0),
        dict(kind="ring", n=2),
        dict(kind="torus-grid", side=4, lam=0.0),
        dict(kind="torus-grid", side=4, lam_e=-1.0),
        dict(kind="torus-grid", n=10),  # not a perfect square
        dict(kind="nonsense", n=4),
    ],
)
def test_spec_rejections(kwargs):
    with pytest.raises(ConfigError):
        TopologySpec(**kwargs)


def test_out_rate_sums_equal_lambda():
    lam = 0.7
    for spec in (
        TopologySpec("torus-grid", side=4, lam=lam),
        TopologySpec("torus-grid", side=3, dimension=3, lam=lam),
        TopologySpec("ring", n=5, lam=lam),
        TopologySpec("complete", n=6, lam=lam),
    ):
        net = build_network(spec)
        for i in range(net.n):
            assert net.total_out_rate(i) == pytest.approx(lam, rel=1e-12)


def test_line_end_nodes_keep_half_rate():
    net = build_network(TopologySpec("line", n=5, lam=1.0))
    # end nodes push lambda/2 to their single neighbor, the rest is idle
    assert net.total_out_rate(0) == pytest.approx(0.5)
    assert net.total_out_rate(4) == pytest.approx(0.5)
    for i in (1, 2, 3):
        assert net.total_out_rate(i) == pytest.approx(1.0)


def test_source_rate_of_full_set_is_lambda_exactly():
    for n in (3, 7, 9, 12):
        net = build_network(TopologySpec("complete", n=n, lam=1.0))
        full = NodeSubset.of(range(n))
        assert lambda0_of_set(net, full) == 1.0


def test_connectivity_of_builders():
    for spec in (
        TopologySpec("torus-grid", side=3),
        TopologySpec("ring", n=7),
        TopologySpec("line", n=6),
        TopologySpec("complete", n=5),
    ):
        net = build_network(spec)
        seen = {0}
        frontier = [0]
        while frontier:
            i = frontier.pop()
            for j in net.out_neighbors[i]:
                if j not in seen:
                    seen.add(j)
                    frontier.append(j)
        assert len(seen) == net.n


def test_neighbors_of_singleton_on_torus():
    net = build_network(TopologySpec("torus-grid", side=10))
    nbrs = neighbors_of_set(net, NodeSubset.of([0]))
    assert nbrs.size == 4
    assert nbrs.members == set(net.out_neighbors[0])


def test_neighbors_complete():
    net = build_network(TopologySpec("complete", n=5))
    assert neighbors_of_set(net, NodeSubset.of([0, 1])).members == {2, 3, 4}


def test_neighbors_reject_empty():
    net = build_network(TopologySpec("complete", n=3))
    with pytest.raises(ValueError):
        neighbors_of_set(net, NodeSubset.of([]))


def _incoming_sources(net, members):
    # independent adjacency scan oracle
    found = set()
    for i in range(net.n):
        if i in members:
            continue
        if any(j in members for j in net.out_neighbors[i]):
            found.add(i)
    return found


def test_boundary_hugging_fixture_has_13_sources():
    from gossip_age.bounds import staircase_subset

    net = build_network(TopologySpec("torus-grid", side=6))
    subset = staircase_subset(6, 15)
    assert subset.size == 15
    oracle = _incoming_sources(net, subset.members)
    got = neighbors_of_set(net, subset)
    assert got.members == oracle
    assert got.size == 13


def test_lambda_into_set_values():
    net = build_network(TopologySpec("torus-grid", side=5, lam=1.0))
    single = NodeSubset.of([0])
    i = net.out_neighbors[0][0]
    assert lambda_into_set(net, i, single) == pytest.approx(0.25)
    assert lambda_into_set(net, 0, single) == 0.0
    # U-shaped pocket: node (1,1) sees three members
    pocket = NodeSubset.of(
        [grid_node(5, 2, c) for c in ((0, 0), (1, 0), (2, 0), (0, 1), (2, 1))]
    )
    center = grid_node(5, 2, (1, 1))
    assert lambda_into_set(net, center, pocket) == pytest.approx(0.75)


def test_inflow_rates_quantized_on_torus():
    net = build_network(TopologySpec("torus-grid", side=5, lam=1.0))
    rng = np.random.default_rng(42)
    for _ in range(50):
        # grow a random connected subset
        members = {int(rng.integers(net.n))}
        while len(members) < int(rng.integers(2, 12)):
            i = int(rng.choice(sorted(members)))
            members.add(int(rng.choice(net.out_neighbors[i])))
        subset = NodeSubset.of(members)
        nbrs = neighbors_of_set(net, subset)
        assert not (nbrs.members & subset.members)
        for i in nbrs.members:
            rate = lambda_into_set(net, i, subset)
            assert min(abs(rate - x) for x in (0.25, 0.5, 0.75, 1.0)) < 1e-12


def test_torus_translation_isomorphism():
    side = 5
    net = build_network(TopologySpec("torus-grid", side=side))
    for shift in ((1, 0), (2, 3)):
        perm = {}
        for node in range(net.n):
            r, c = grid_coords(side, 2, node)
            perm[node] = grid_node(side, 2, ((r + shift[0]) % side, (c + shift[1]) % side))
        for i in range(net.n):
            for j in range(net.n):
                assert net.rate(i, j) == net.rate(perm[i], perm[j])
    multisets = {tuple(sorted(r)) for r in net.out_rates}
    assert len(multisets) == 1


def test_grid_coords_roundtrip():
    for side, dim in ((4, 2), (3, 3)):
        for node in range(side**dim):
            assert grid_node(side, dim, grid_coords(side, dim, node)) == node


def test_spec_config_roundtrip():
    spec = TopologySpec("torus-grid", side=4, dimension=2, lam=0.5, lam_e=2.0)
    again = TopologySpec.from_config(spec.to_config())
    assert again == spec
    with pytest.raises(ConfigError):
        TopologySpec.from_config({"kind": "torus-grid", "side": "4", "bogus": "1"})


def test_node_subset_mask_roundtrip():
    s = NodeSubset.of([0, 3, 5])
    assert s.size == 3
    assert NodeSubset.from_mask(s.mask) == s
    assert list(s) == [0, 3, 5]
