"""Gossip network construction and subset rate queries.

Networks are built from a small set of topology kinds (wrap-around grids in
any dimension, rings, lines, complete graphs). Every node gossips with total
rate lambda split over its out-edges, and the source updates each node with
rate lambda/n, so the whole network receives source pushes at rate lambda.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Mapping

TOPOLOGY_KINDS = ("torus-grid", "ring", "line", "complete")

# keys used by the flat key=value config format
_CONFIG_KEYS = ("kind", "d", "side", "n", "lambda", "lambda_e")


class ConfigError(ValueError):
    """Invalid topology or simulation configuration."""


@dataclass(frozen=True)
class TopologyTag:
    """Compact descriptor of how a network was built."""

    kind: str
    dimension: int
    side: int

    def __str__(self) -> str:
        if self.kind == "torus-grid":
            return f"torus-grid-d{self.dimension}-L{self.side}"
        return f"{self.kind}-n{self.side}"


@dataclass(frozen=True)
class TopologySpec:
    """Declarative description of a gossip network.

    For torus grids, ``n`` must equal ``side ** dimension`` (either may be
    omitted and is derived from the other). Rings, lines and complete graphs
    are sized by ``n`` alone.
    """

    kind: str
    n: int | None = None
    dimension: int = 2
    side: int | None = None
    lam: float = 1.0
    lam_e: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in TOPOLOGY_KINDS:
            raise ConfigError(f"unknown topology kind {self.kind!r}; expected one of {TOPOLOGY_KINDS}")
        if self.lam <= 0 or self.lam_e <= 0:
            raise ConfigError(f"rates must be positive, got lambda={self.lam}, lambda_e={self.lam_e}")
        if self.kind == "torus-grid":
            if self.dimension < 1:
                raise ConfigError(f"grid dimension must be >= 1, got {self.dimension}")
            side = self.side
            if side is None:
                if self.n is None:
                    raise ConfigError("torus-grid needs side or n")
                side = round(self.n ** (1.0 / self.dimension))
                # the rounded root must reproduce n exactly
                if side**self.dimension != self.n:
                    raise ConfigError(f"n={self.n} is not a perfect {self.dimension}-dim grid size")
                object.__setattr__(self, "side", side)
            if side < 3:
                raise ConfigError(
                    f"torus side must be >= 3 (side {side} would collapse wrap-around neighbors into parallel edges)"
                )
            n = side**self.dimension
            if self.n is None:
                object.__setattr__(self, "n", n)
            elif self.n != n:
                raise ConfigError(f"n={self.n} inconsistent with side={side}, dimension={self.dimension}")
        else:
            if self.n is None:
                raise ConfigError(f"{self.kind} needs n")
            if self.n < 1:
                raise ConfigError(f"n must be >= 1, got {self.n}")
            if self.kind == "ring" and self.n < 3:
                raise ConfigError(f"ring needs n >= 3, got {self.n}")

    def to_config(self) -> dict[str, str]:
        """Serialize to the flat key=value form (kind, d, side, n, lambda, lambda_e)."""
        out = {
            "kind": self.kind,
            "d": str(self.dimension),
            "n": str(self.n),
            "lambda": repr(self.lam),
            "lambda_e": repr(self.lam_e),
        }
        if self.side is not None:
            out["side"] = str(self.side)
        return out

    @classmethod
    def from_config(cls, items: Mapping[str, str]) -> "TopologySpec":
        unknown = set(items) - set(_CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown topology config keys: {sorted(unknown)}")
        if "kind" not in items:
            raise ConfigError("topology config needs a 'kind' entry")
        try:
            return cls(
                kind=items["kind"],
                n=int(items["n"]) if "n" in items else None,
                dimension=int(items.get("d", 2)),
                side=int(items["side"]) if "side" in items else None,
                lam=float(items.get("lambda", 1.0)),
                lam_e=float(items.get("lambda_e", 1.0)),
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"malformed topology config: {exc}") from exc


@dataclass(frozen=True)
class NodeSubset:
    """Immutable set of node indices, the key type for subset ages and edge counts."""

    members: frozenset[int]
    size: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "size", len(self.members))

    @classmethod
    def of(cls, nodes: Iterable[int]) -> "NodeSubset":
        return cls(frozenset(int(i) for i in nodes))

    @classmethod
    def from_mask(cls, mask: int) -> "NodeSubset":
        nodes = []
        i = 0
        while mask:
            if mask & 1:
                nodes.append(i)
            mask >>= 1
            i += 1
        return cls(frozenset(nodes))

    @property
    def mask(self) -> int:
        m = 0
        for i in self.members:
            m |= 1 << i
        return m

    def __contains__(self, node: int) -> bool:
        return node in self.members

    def __iter__(self):
        return iter(sorted(self.members))


@dataclass(frozen=True, eq=False)
class GossipNetwork:
    """Immutable gossip network with directed per-edge rates.

    ``out_neighbors[i]`` and ``out_rates[i]`` are parallel tuples giving the
    targets node i pushes to and the Poisson rate on each directed edge.
    Construction is the only mutation point; instances are safe to share
    across workers.
    """

    n: int
    out_neighbors: tuple[tuple[int, ...], ...]
    out_rates: tuple[tuple[float, ...], ...]
    source_rates: tuple[float, ...]
    source_self_rate: float
    lam: float
    tag: TopologyTag

    @property
    def network_id(self) -> str:
        return f"{self.tag}-n{self.n}-lam{self.lam!r}-lame{self.source_self_rate!r}"

    def rate(self, i: int, j: int) -> float:
        """Directed gossip rate lambda_ij (0 when no edge)."""
        for k, nbr in enumerate(self.out_neighbors[i]):
            if nbr == j:
                return self.out_rates[i][k]
        return 0.0

    def total_out_rate(self, i: int) -> float:
        return sum(self.out_rates[i])

    def total_gossip_rate(self) -> float:
        return sum(sum(r) for r in self.out_rates)

    def neighbor_masks(self) -> list[int]:
        """Per-node bitmask of out-neighbors; usable for subsets only when n <= 63."""
        masks = []
        for nbrs in self.out_neighbors:
            m = 0
            for j in nbrs:
                m |= 1 << j
            masks.append(m)
        return masks


def _torus_neighbors(side: int, dim: int) -> list[list[int]]:
    n = side**dim
    # row-major over coordinates, last axis fastest
    strides = [side ** (dim - 1 - a) for a in range(dim)]
    nbrs: list[list[int]] = []
    for coords in product(range(side), repeat=dim):
        here = []
        for axis in range(dim):
            for step in (1, -1):
                c = list(coords)
                c[axis] = (c[axis] + step) % side
                here.append(sum(ci * si for ci, si in zip(c, strides)))
        nbrs.append(sorted(set(here)))
        assert len(nbrs[-1]) == 2 * dim, "wrap-around produced coincident neighbors"
    assert len(nbrs) == n
    return nbrs


def build_network(spec: TopologySpec) -> GossipNetwork:
    """Construct the gossip network described by ``spec``.

    Grid nodes split lambda equally over their 2d wrap-around neighbors, a
    ring is the 1-dim grid (lambda/2 per side), a complete graph sends
    lambda/(n-1) to every other node, and a line is the ring with the closing
    edge removed: end nodes keep lambda/2 toward their single neighbor and
    leave the other half idle.
    """
    n = spec.n
    assert n is not None
    lam, lam_e = spec.lam, spec.lam_e

    if spec.kind == "torus-grid":
        nbrs = _torus_neighbors(spec.side, spec.dimension)
        per_edge = lam / (2 * spec.dimension)
        out_n = tuple(tuple(b) for b in nbrs)
        out_r = tuple(tuple(per_edge for _ in b) for b in nbrs)
        tag = TopologyTag("torus-grid", spec.dimension, spec.side)
    elif spec.kind == "ring":
        out_n = tuple(tuple(sorted(((i - 1) % n, (i + 1) % n))) for i in range(n))
        out_r = tuple((lam / 2, lam / 2) for _ in range(n))
        tag = TopologyTag("ring", 1, n)
    elif spec.kind == "line":
        neigh = []
        for i in range(n):
            here = [j for j in (i - 1, i + 1) if 0 <= j < n]
            neigh.append(tuple(here))
        out_n = tuple(neigh)
        out_r = tuple(tuple(lam / 2 for _ in b) for b in out_n)
        tag = TopologyTag("line", 1, n)
    elif spec.kind == "complete":
        out_n = tuple(tuple(j for j in range(n) if j != i) for i in range(n))
        per_edge = lam / (n - 1) if n > 1 else 0.0
        out_r = tuple(tuple(per_edge for _ in b) for b in out_n)
        tag = TopologyTag("complete", 1, n)
    else:  # pragma: no cover - guarded by TopologySpec
        raise ConfigError(f"unknown kind {spec.kind!r}")

    return GossipNetwork(
        n=n,
        out_neighbors=out_n,
        out_rates=out_r,
        source_rates=tuple(lam / n for _ in range(n)),
        source_self_rate=lam_e,
        lam=lam,
        tag=tag,
    )


def custom_network(
    out_rates: Mapping[int, Mapping[int, float]],
    n: int,
    lam: float,
    lam_e: float,
    kind: str = "custom",
) -> GossipNetwork:
    """Build a network from an explicit rate map. Test fixture helper."""
    out_n = []
    out_r = []
    for i in range(n):
        row = sorted(out_rates.get(i, {}).items())
        out_n.append(tuple(j for j, _ in row))
        out_r.append(tuple(r for _, r in row))
    return GossipNetwork(
        n=n,
        out_neighbors=tuple(out_n),
        out_rates=tuple(out_r),
        source_rates=tuple(lam / n for _ in range(n)),
        source_self_rate=lam_e,
        lam=lam,
        tag=TopologyTag(kind, 1, n),
    )


def _check_subset(net: GossipNetwork, subset: NodeSubset) -> None:
    if subset.size == 0:
        raise ValueError("empty node subset")
    bad = [i for i in subset.members if not 0 <= i < net.n]
    if bad:
        raise ValueError(f"subset members out of range [0, {net.n}): {sorted(bad)}")


def neighbors_of_set(net: GossipNetwork, subset: NodeSubset) -> NodeSubset:
    """Nodes outside ``subset`` with at least one edge into it."""
    _check_subset(net, subset)
    members = subset.members
    found = set()
    for j in members:
        # edges are symmetric in sparsity for every builder, so scanning
        # out-neighbors of members finds all inbound sources
        for i in net.out_neighbors[j]:
            if i not in members:
                found.add(i)
    return NodeSubset(frozenset(found))


def lambda_into_set(net: GossipNetwork, i: int, subset: NodeSubset) -> float:
    """Total rate of information flow from node i into ``subset`` (0 if i is inside)."""
    _check_subset(net, subset)
    if not 0 <= i < net.n:
        raise ValueError(f"node {i} out of range [0, {net.n})")
    if i in subset.members:
        return 0.0
    return sum(r for j, r in zip(net.out_neighbors[i], net.out_rates[i]) if j in subset.members)


def lambda0_of_set(net: GossipNetwork, subset: NodeSubset) -> float:
    """Total source push rate into ``subset``."""
    _check_subset(net, subset)
    first = net.source_rates[0]
    if all(r == first for r in net.source_rates):
        # uniform split: lam * |S| / n avoids accumulating lam/n roundoff
        return net.lam * subset.size / net.n
    return math.fsum(net.source_rates[j] for j in subset.members)


def grid_coords(side: int, dim: int, node: int) -> tuple[int, ...]:
    """Inverse of the row-major grid indexing."""
    coords = []
    for axis in range(dim):
        stride = side ** (dim - 1 - axis)
        coords.append((node // stride) % side)
    return tuple(coords)


def grid_node(side: int, dim: int, coords: Iterable[int]) -> int:
    node = 0
    for c in coords:
        node = node * side + (c % side)
    return node
