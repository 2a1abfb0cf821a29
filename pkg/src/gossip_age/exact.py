"""Exact version ages for every connected subset of a small network.

The long-run age of a connected subset satisfies a recursion over its
one-node expansions:

    v_S = (lambda_e + sum_i lambda_i(S) v_{S+i}) / (lambda_0(S) + sum_i lambda_i(S))

with i ranging over the neighbors of S. Each right-hand side only references
subsets one node larger, so processing subsets by decreasing size solves the
whole table without a linear system. The full set is seeded with
v = lambda_e / lambda_0(full) = lambda_e / lambda.

Subsets are keyed by bitmask; the solver is capped (default 16 nodes) so the
table stays within 2**16 entries.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from .topology import GossipNetwork, NodeSubset

CSV_HEADER = "# gossip-age v1"


@dataclass(frozen=True)
class SolverLimits:
    """Hard cap on network size for exact enumeration."""

    max_nodes: int = 16

    def __post_init__(self) -> None:
        if self.max_nodes < 1:
            raise ValueError(f"max_nodes must be >= 1, got {self.max_nodes}")


DEFAULT_LIMITS = SolverLimits()


class AgeTable:
    """Mapping from connected subset (bitmask) to its exact average version age."""

    def __init__(self, ages: dict[int, float], n: int, network_id: str):
        self.ages = ages
        self.n = n
        self.network_id = network_id

    def __len__(self) -> int:
        return len(self.ages)

    def __getitem__(self, mask: int) -> float:
        return self.ages[mask]

    def get(self, subset: NodeSubset) -> float:
        mask = subset.mask
        if mask not in self.ages:
            raise KeyError(f"subset {sorted(subset.members)} is not a connected subset of this network")
        return self.ages[mask]

    def masks_by_size(self) -> list[int]:
        return sorted(self.ages, key=lambda m: (m.bit_count(), m))

    def singleton_ages(self) -> list[float]:
        return [self.ages[1 << i] for i in range(self.n)]

    def to_csv(self, target: str | Path | IO[str]) -> None:
        """Write rows subset(hex),size,v_S ordered by (size, mask)."""
        if hasattr(target, "write"):
            self._write_csv(target)
        else:
            with open(target, "w", encoding="utf-8") as fh:
                self._write_csv(fh)

    def _write_csv(self, fh: IO[str]) -> None:
        fh.write(CSV_HEADER + "\n")
        fh.write("subset,size,v_S\n")
        for mask in self.masks_by_size():
            fh.write(f"{mask:#x},{mask.bit_count()},{self.ages[mask]!r}\n")


def _require_small(net: GossipNetwork, limits: SolverLimits) -> None:
    if net.n > limits.max_nodes:
        raise ValueError(
            f"network has {net.n} nodes, above the exact-solver cap of {limits.max_nodes} "
            f"(raise SolverLimits.max_nodes to override)"
        )


def _connected(mask: int, nbr_masks: list[int]) -> bool:
    reach = mask & (-mask)
    while True:
        grow = reach
        m = reach
        i = 0
        while m:
            if m & 1:
                grow |= nbr_masks[i]
            m >>= 1
            i += 1
        grow &= mask
        if grow == reach:
            return reach == mask
        reach = grow


def _connected_masks(net: GossipNetwork) -> list[int]:
    """All connected subset masks, found by frontier growth from each node."""
    nbr_masks = net.neighbor_masks()
    seen: set[int] = set()
    stack = [1 << i for i in range(net.n)]
    seen.update(stack)
    while stack:
        mask = stack.pop()
        ext = 0
        m = mask
        i = 0
        while m:
            if m & 1:
                ext |= nbr_masks[i]
            m >>= 1
            i += 1
        ext &= ~mask
        while ext:
            bit = ext & (-ext)
            ext ^= bit
            grown = mask | bit
            if grown not in seen:
                seen.add(grown)
                stack.append(grown)
    return sorted(seen, key=lambda m: (m.bit_count(), m))


def enumerate_connected_subsets(
    net: GossipNetwork, limits: SolverLimits = DEFAULT_LIMITS
) -> list[NodeSubset]:
    """Every connected induced subset exactly once, ordered by (size, mask)."""
    _require_small(net, limits)
    return [NodeSubset.from_mask(m) for m in _connected_masks(net)]


def solve_version_ages(net: GossipNetwork, limits: SolverLimits = DEFAULT_LIMITS) -> AgeTable:
    """Solve the age recursion for every connected subset of ``net``."""
    _require_small(net, limits)
    n = net.n
    nbr_masks = net.neighbor_masks()
    rate_to = [dict(zip(nbrs, rates)) for nbrs, rates in zip(net.out_neighbors, net.out_rates)]
    lam_e = net.source_self_rate
    full = (1 << n) - 1

    masks = _connected_masks(net)
    ages: dict[int, float] = {}
    for mask in sorted(masks, key=lambda m: (-m.bit_count(), m)):
        if mask == full:
            # lambda_0(full) = lambda exactly; avoid accumulating lam/n roundoff
            ages[mask] = lam_e / net.lam
            continue
        lam0 = sum(net.source_rates[i] for i in range(n) if mask >> i & 1)
        num = lam_e
        den = lam0
        outside = ~mask & full
        i = 0
        m = outside
        while m:
            if m & 1:
                inward = nbr_masks[i] & mask
                if inward:
                    lam_i = 0.0
                    mm = inward
                    j = 0
                    while mm:
                        if mm & 1:
                            lam_i += rate_to[i][j]
                        mm >>= 1
                        j += 1
                    grown = mask | (1 << i)
                    assert grown in ages, "superset age missing; size ordering violated"
                    num += lam_i * ages[grown]
                    den += lam_i
            m >>= 1
            i += 1
        ages[mask] = num / den
    return AgeTable(ages, n, net.network_id)


def _bound_ingredients(net: GossipNetwork, subset: NodeSubset, table: AgeTable):
    mask = subset.mask
    if mask not in table.ages:
        raise ValueError(f"subset {sorted(subset.members)} is not a connected subset of this network")
    full = (1 << net.n) - 1
    if mask == full:
        raise ValueError("bounds need a proper subset; the full set has no neighbors")
    nbr_masks = net.neighbor_masks()
    rate_to = [dict(zip(nbrs, rates)) for nbrs, rates in zip(net.out_neighbors, net.out_rates)]
    rates = []
    sup_ages = []
    for i in range(net.n):
        if mask >> i & 1:
            continue
        inward = nbr_masks[i] & mask
        if not inward:
            continue
        lam_i = sum(rate_to[i][j] for j in range(net.n) if inward >> j & 1)
        rates.append(lam_i)
        sup_ages.append(table.ages[mask | (1 << i)])
    lam0 = sum(net.source_rates[i] for i in range(net.n) if mask >> i & 1)
    return rates, sup_ages, lam0


def subset_age_upper_bound(net: GossipNetwork, subset: NodeSubset, table: AgeTable) -> float:
    """Upper bound on v_S from the weakest inflow and the oldest expansion:

    (lambda_e + |N(S)| min_i lambda_i(S) max_i v_{S+i})
    / (lambda_0(S) + |N(S)| min_i lambda_i(S))
    """
    rates, sup_ages, lam0 = _bound_ingredients(net, subset, table)
    k = len(rates)
    r = min(rates)
    v = max(sup_ages)
    return (net.source_self_rate + k * r * v) / (lam0 + k * r)


def subset_age_lower_bound(net: GossipNetwork, subset: NodeSubset, table: AgeTable) -> float:
    """Mirror of the upper bound with the strongest inflow and freshest expansion."""
    rates, sup_ages, lam0 = _bound_ingredients(net, subset, table)
    k = len(rates)
    r = max(rates)
    v = min(sup_ages)
    return (net.source_self_rate + k * r * v) / (lam0 + k * r)


def complete_graph_oracle(n: int, lam_e: float = 1.0, lam: float = 1.0) -> np.ndarray:
    """Subset ages on the complete graph, by subset size.

    All size-j subsets share one age, so the recursion collapses to a size
    recursion with |N(S)| = n - j, lambda_i(S) = j lam / (n-1) and
    lambda_0(S) = j lam / n. Returns v[0..n-1] where v[j-1] is the age of any
    size-j subset. Runs in O(n), so it doubles as a large-n scaling oracle.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    v = np.empty(n, dtype=np.float64)
    v[n - 1] = lam_e / lam
    for j in range(n - 1, 0, -1):
        lam_i = j * lam / (n - 1)
        inflow = (n - j) * lam_i
        lam0 = j * lam / n
        v[j - 1] = (lam_e + inflow * v[j]) / (lam0 + inflow)
    return v
