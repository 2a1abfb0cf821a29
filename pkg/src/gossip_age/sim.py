"""Event-driven Monte Carlo estimation of version age.

A single merged Poisson clock with total rate lambda_e + lambda + G drives
three event categories: source self-updates (every age rises by one), source
pushes to a uniform node (its version jumps to the latest), and gossip along
a rate-weighted directed edge (receiver keeps the fresher version). G is the
sum of all directed edge rates. Estimates are time-weighted averages over
[warmup, horizon], aggregated over independent replications whose seeds are
split from the master seed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import _kernels
from .topology import ConfigError, GossipNetwork, TopologySpec, build_network

ESTIMATORS = ("single-node", "symmetry-averaged", "network-min")

EVENT_KINDS = ("source-self", "source-push", "gossip-accepted", "gossip-rejected")

_CHUNK_ROWS = 1 << 17

# versions are held in int64 and version*dt products in float64; keep the
# expected counter total far below 2**53
_MAX_EXPECTED_VERSIONS = 1e12


@dataclass(frozen=True)
class SimConfig:
    """Simulation run parameters.

    ``horizon`` defaults to 200 * n / lambda simulated time units (mixing
    slows down as n grows) and ``warmup`` to 10% of the horizon; both can be
    set explicitly.
    """

    horizon: float | None = None
    warmup: float | None = None
    seed: int = 1
    replications: int = 3
    estimator: str = "symmetry-averaged"

    def resolve(self, net: GossipNetwork) -> tuple[float, float]:
        if self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        if self.estimator not in ESTIMATORS:
            raise ConfigError(f"unknown estimator {self.estimator!r}; expected one of {ESTIMATORS}")
        horizon = self.horizon if self.horizon is not None else 200.0 * net.n / net.lam
        warmup = self.warmup if self.warmup is not None else 0.1 * horizon
        if not np.isfinite(horizon) or horizon <= 0:
            raise ConfigError(f"horizon must be positive and finite, got {horizon}")
        if not 0 <= warmup < horizon:
            raise ConfigError(f"need 0 <= warmup < horizon, got warmup={warmup}, horizon={horizon}")
        if net.source_self_rate * horizon > _MAX_EXPECTED_VERSIONS:
            raise ConfigError(
                f"lambda_e * horizon = {net.source_self_rate * horizon:.3g} exceeds the "
                f"version counter guard ({_MAX_EXPECTED_VERSIONS:.0e})"
            )
        return horizon, warmup


@dataclass
class SimResult:
    """Aggregated estimate with replication statistics and event counts."""

    estimate: float
    stderr: float
    per_node: np.ndarray | None
    events: dict[str, int]


@dataclass
class VersionState:
    """Update counters of one replication at a point in simulated time.

    Node ages are ``source_version - node_version``; they are nonnegative
    because nodes only ever copy versions the source already produced.
    """

    source_version: int
    node_version: np.ndarray
    clock: float

    def ages(self) -> np.ndarray:
        return self.source_version - self.node_version

    def check(self) -> None:
        if self.clock < 0:
            raise AssertionError(f"negative clock {self.clock}")
        if (self.node_version > self.source_version).any():
            raise AssertionError("a node version exceeds the source version")


def _alias_table(weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Walker alias table; picking k = floor(u1*m) then testing u2 against
    cut[k] draws index k with probability weights[k]/sum."""
    m = len(weights)
    scaled = weights * (m / weights.sum())
    cut = np.ones(m, dtype=np.float64)
    alias = np.arange(m, dtype=np.int64)
    small = [i for i in range(m) if scaled[i] < 1.0]
    large = [i for i in range(m) if scaled[i] >= 1.0]
    scaled = scaled.copy()
    while small and large:
        s = small.pop()
        g = large.pop()
        cut[s] = scaled[s]
        alias[s] = g
        scaled[g] = scaled[g] - (1.0 - scaled[s])
        if scaled[g] < 1.0:
            small.append(g)
        else:
            large.append(g)
    return cut, alias


def _edge_arrays(net: GossipNetwork) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    src, dst, rate = [], [], []
    for i, (nbrs, rates) in enumerate(zip(net.out_neighbors, net.out_rates)):
        for j, r in zip(nbrs, rates):
            if r > 0:
                src.append(i)
                dst.append(j)
                rate.append(r)
    return (
        np.asarray(src, dtype=np.int64),
        np.asarray(dst, dtype=np.int64),
        np.asarray(rate, dtype=np.float64),
    )


def _run_replication(
    net: GossipNetwork,
    horizon: float,
    warmup: float,
    seed_seq: np.random.SeedSequence,
    edge_src: np.ndarray,
    edge_dst: np.ndarray,
    alias_cut: np.ndarray,
    alias_idx: np.ndarray,
    total_rate: float,
    cut_self: float,
    cut_push: float,
) -> tuple[np.ndarray, float, dict[str, int]]:
    n = net.n
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    kernel = _kernels.sim_chunk
    fstate = np.zeros(3, dtype=np.float64)
    istate = np.zeros(6, dtype=np.int64)
    node_version = np.zeros(n, dtype=np.int64)
    node_last_t = np.zeros(n, dtype=np.float64)
    node_acc = np.zeros(n, dtype=np.float64)
    while fstate[0] < horizon:
        u = rng.random((_CHUNK_ROWS, 4))
        kernel(
            u,
            fstate,
            istate,
            node_version,
            node_last_t,
            node_acc,
            edge_src,
            edge_dst,
            alias_cut,
            alias_idx,
            n,
            total_rate,
            cut_self,
            cut_push,
            warmup,
            horizon,
        )
    # flush the final per-node segments up to the horizon
    lo = np.maximum(node_last_t, warmup)
    node_acc += node_version * np.maximum(horizon - lo, 0.0)
    window = horizon - warmup
    per_node = (fstate[1] - node_acc) / window
    min_avg = fstate[2] / window
    events = dict(zip(EVENT_KINDS, (int(c) for c in istate[2:6])))
    return per_node, min_avg, events


def simulate(net: GossipNetwork, cfg: SimConfig) -> SimResult:
    """Run ``cfg.replications`` independent replications and aggregate.

    Deterministic: the same (net, cfg) produces bitwise-identical results on
    either kernel backend, because all randomness is pre-drawn from a PCG64
    stream per replication.
    """
    horizon, warmup = cfg.resolve(net)
    edge_src, edge_dst, edge_rate = _edge_arrays(net)
    gossip_total = float(edge_rate.sum()) if len(edge_rate) else 0.0
    lam_e = net.source_self_rate
    lam = net.lam
    total_rate = lam_e + lam + gossip_total
    cut_self = lam_e / total_rate
    cut_push = (lam_e + lam) / total_rate
    if len(edge_rate):
        alias_cut, alias_idx = _alias_table(edge_rate)
    else:
        # no gossip edges (n = 1); the gossip branch is unreachable since
        # the category draw is < cut_push = 1
        edge_src = np.zeros(1, dtype=np.int64)
        edge_dst = np.zeros(1, dtype=np.int64)
        alias_cut = np.ones(1, dtype=np.float64)
        alias_idx = np.zeros(1, dtype=np.int64)

    children = np.random.SeedSequence(cfg.seed).spawn(cfg.replications)
    rep_estimates = np.empty(cfg.replications, dtype=np.float64)
    per_node_sum = np.zeros(net.n, dtype=np.float64)
    events_total = dict.fromkeys(EVENT_KINDS, 0)
    for r, child in enumerate(children):
        per_node, min_avg, events = _run_replication(
            net, horizon, warmup, child, edge_src, edge_dst,
            alias_cut, alias_idx, total_rate, cut_self, cut_push,
        )
        if cfg.estimator == "network-min":
            rep_estimates[r] = min_avg
        elif cfg.estimator == "single-node":
            rep_estimates[r] = per_node[0]
        else:
            rep_estimates[r] = per_node.mean()
        per_node_sum += per_node
        for k, v in events.items():
            events_total[k] += v

    estimate = float(rep_estimates.mean())
    if cfg.replications > 1:
        stderr = float(rep_estimates.std(ddof=1) / np.sqrt(cfg.replications))
    else:
        stderr = 0.0
    return SimResult(
        estimate=estimate,
        stderr=stderr,
        per_node=per_node_sum / cfg.replications,
        events=events_total,
    )


def replay_replication(net: GossipNetwork, cfg: SimConfig, replication: int = 0, observer=None):
    """Step one replication event by event in plain Python.

    Consumes exactly the uniform stream the kernel would, so the visited
    states match a ``simulate`` run with the same config. ``observer`` is
    called as ``observer(state, kind)`` after every applied event. Returns
    (final VersionState, event counts). Debug and validation aid; far
    slower than the kernel, so keep horizons short.
    """
    horizon, _ = cfg.resolve(net)
    if not 0 <= replication < cfg.replications:
        raise ConfigError(f"replication index {replication} outside [0, {cfg.replications})")
    edge_src, edge_dst, edge_rate = _edge_arrays(net)
    gossip_total = float(edge_rate.sum()) if len(edge_rate) else 0.0
    lam_e = net.source_self_rate
    total_rate = lam_e + net.lam + gossip_total
    cut_self = lam_e / total_rate
    cut_push = (lam_e + net.lam) / total_rate
    if len(edge_rate):
        alias_cut, alias_idx = _alias_table(edge_rate)
    n_edges = len(edge_rate)

    child = np.random.SeedSequence(cfg.seed).spawn(cfg.replications)[replication]
    rng = np.random.Generator(np.random.PCG64(child))
    state = VersionState(0, np.zeros(net.n, dtype=np.int64), 0.0)
    counts = dict.fromkeys(EVENT_KINDS, 0)
    while state.clock < horizon:
        u = rng.random((_CHUNK_ROWS, 4))
        for row in u:
            t_next = state.clock - float(np.log1p(-row[0])) / total_rate
            if t_next >= horizon:
                state.clock = horizon
                break
            state.clock = t_next
            if row[1] < cut_self:
                state.source_version += 1
                kind = "source-self"
            elif row[1] < cut_push:
                k = min(int(row[2] * net.n), net.n - 1)
                state.node_version[k] = state.source_version
                kind = "source-push"
            else:
                k = min(int(row[2] * n_edges), n_edges - 1)
                if row[3] >= alias_cut[k]:
                    k = int(alias_idx[k])
                src, dst = int(edge_src[k]), int(edge_dst[k])
                if state.node_version[src] > state.node_version[dst]:
                    state.node_version[dst] = state.node_version[src]
                    kind = "gossip-accepted"
                else:
                    kind = "gossip-rejected"
            counts[kind] += 1
            if observer is not None:
                observer(state, kind)
        else:
            continue
        break
    return state, counts


def estimate_single_node_age(net: GossipNetwork, cfg: SimConfig) -> SimResult:
    """Estimate the long-run version age of a typical node.

    Vertex-transitive networks (grids, rings, complete graphs) share one
    per-node age, so the symmetry-averaged estimator is used there as a
    variance-reduced estimate; other networks fall back to tracking node 0.
    """
    if net.tag.kind in ("torus-grid", "ring", "complete"):
        est = "symmetry-averaged"
    else:
        est = "single-node"
    return simulate(net, replace(cfg, estimator=est))


def replicate_sweep(specs: Sequence[TopologySpec], cfg: SimConfig) -> list[SimResult]:
    """Simulate each spec with the same config; results keep input order."""
    if not specs:
        raise ValueError("replicate_sweep needs at least one topology spec")
    results = []
    for spec in specs:
        try:
            results.append(simulate(build_network(spec), cfg))
        except Exception as exc:
            raise RuntimeError(f"simulation failed for {spec}: {exc}") from exc
    return results
