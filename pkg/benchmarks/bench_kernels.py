"""Benchmark the jitted kernels against their numpy/Python fallbacks.

Run from the repository root:

    python benchmarks/bench_kernels.py            # quick comparison
    python benchmarks/bench_kernels.py --full     # adds the 5x5 mask scan

The event kernel shares one source between backends, so this measures pure
compilation benefit; the scan and sweep kernels compare algorithmically
equivalent implementations.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from gossip_age import _kernels
from gossip_age.sim import SimConfig, simulate
from gossip_age.topology import TopologySpec, build_network


def _time(fn, *args, repeat=3):
    best = np.inf
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def bench_event_kernel() -> None:
    net = build_network(TopologySpec("torus-grid", side=20))
    cfg = SimConfig(horizon=400.0, seed=3, replications=1)
    events = None

    def run():
        return simulate(net, cfg)

    if _kernels.NUMBA_ENABLED:
        simulate(net, SimConfig(horizon=5.0, seed=1, replications=1))  # compile
        t_jit, r = _time(run)
        events = sum(r.events.values())
    else:
        t_jit = None

    saved = _kernels.sim_chunk
    try:
        _kernels.sim_chunk = _kernels.sim_chunk_py
        t_py, r = _time(run, repeat=1)
        events = sum(r.events.values())
    finally:
        _kernels.sim_chunk = saved

    print(f"event kernel    torus 20x20, {events:.2e} events")
    print(f"  python/numpy  {t_py:8.3f} s  ({events / t_py:.2e} events/s)")
    if t_jit is not None:
        print(f"  numba         {t_jit:8.3f} s  ({events / t_jit:.2e} events/s)  speedup {t_py / t_jit:.1f}x")


def bench_boundary_scan(full: bool) -> None:
    for side in (4, 5) if full else (4,):
        net = build_network(TopologySpec("torus-grid", side=side))
        masks = np.asarray(net.neighbor_masks(), dtype=np.int64)
        t_np, (b_np, _) = _time(_kernels.boundary_scan_numpy, masks, net.n, repeat=1)
        line = f"boundary scan   {side}x{side} torus ({(1 << net.n) - 1:.2e} masks)\n"
        line += f"  numpy         {t_np:8.3f} s"
        if _kernels.NUMBA_ENABLED:
            _kernels.boundary_scan_jit(masks[:9] % 512, 9)  # compile on a small instance
            t_jit, (b_jit, _) = _time(_kernels.boundary_scan_jit, masks, net.n, repeat=1)
            assert (b_jit == b_np).all()
            line += f"\n  numba         {t_jit:8.3f} s  speedup {t_np / t_jit:.1f}x"
        print(line)


def bench_floor_sweep() -> None:
    n_max = 3000
    alpha = np.sqrt(3.0)
    t_np, ref = _time(_kernels.floor_margins_numpy, n_max, alpha, repeat=1)
    print(f"floor sweep     n = 1..{n_max}")
    print(f"  numpy         {t_np:8.3f} s")
    if _kernels.NUMBA_ENABLED:
        _kernels.floor_margins_jit(10, alpha)  # compile
        t_jit, got = _time(_kernels.floor_margins_jit, n_max, alpha)
        assert np.allclose(got, ref, atol=1e-12)
        print(f"  numba         {t_jit:8.3f} s  speedup {t_np / t_jit:.1f}x")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--full", action="store_true", help="include the 5x5 mask scan")
    args = parser.parse_args()
    print(f"active backend: {_kernels.backend_name()}")
    bench_event_kernel()
    bench_boundary_scan(args.full)
    bench_floor_sweep()


if __name__ == "__main__":
    main()
