import os
import subprocess
import sys

import numpy as np
import pytest

from gossip_age import _kernels
from gossip_age.sim import SimConfig, simulate
from gossip_age.topology import TopologySpec, build_network


def test_backend_name():
    assert _kernels.backend_name() in ("numba", "numpy")


@pytest.mark.skipif(not _kernels.NUMBA_ENABLED, reason="numba disabled")
def test_sim_kernel_paths_are_bitwise_identical(monkeypatch):
    net = build_network(TopologySpec("torus-grid", side=3))
    cfg = SimConfig(horizon=400.0, seed=77, replications=2)
    jit_result = simulate(net, cfg)
    monkeypatch.setattr(_kernels, "sim_chunk", _kernels.sim_chunk_py)
    py_result = simulate(net, cfg)
    assert py_result.estimate == jit_result.estimate
    assert py_result.stderr == jit_result.stderr
    assert (py_result.per_node == jit_result.per_node).all()
    assert py_result.events == jit_result.events


@pytest.mark.skipif(not _kernels.NUMBA_ENABLED, reason="numba disabled")
def test_boundary_scan_backends_agree():
    net = build_network(TopologySpec("torus-grid", side=4))
    masks = np.asarray(net.neighbor_masks(), dtype=np.int64)
    b_jit, w_jit = _kernels.boundary_scan_jit(masks, net.n)
    b_np, w_np = _kernels.boundary_scan_numpy(masks, net.n)
    assert (b_jit == b_np).all()
    assert (w_jit == w_np).all()


@pytest.mark.skipif(not _kernels.NUMBA_ENABLED, reason="numba disabled")
def test_floor_margin_backends_agree():
    jit = _kernels.floor_margins_jit(60, np.sqrt(3.0))
    ref = _kernels.floor_margins_numpy(60, np.sqrt(3.0))
    assert np.allclose(jit, ref, rtol=0, atol=1e-12)


def test_env_flag_selects_numpy_backend():
    code = (
        "from gossip_age import _kernels\n"
        "from gossip_age.sim import SimConfig, simulate\n"
        "from gossip_age.topology import TopologySpec, build_network\n"
        "assert not _kernels.NUMBA_ENABLED\n"
        "assert _kernels.backend_name() == 'numpy'\n"
        "net = build_network(TopologySpec('torus-grid', side=3))\n"
        "r = simulate(net, SimConfig(horizon=300.0, seed=5, replications=2))\n"
        "print(repr(r.estimate))\n"
    )
    env = dict(os.environ, GOSSIP_AGE_NO_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True
    )
    fallback_estimate = float(out.stdout.strip())
    net = build_network(TopologySpec("torus-grid", side=3))
    here = simulate(net, SimConfig(horizon=300.0, seed=5, replications=2))
    assert fallback_estimate == here.estimate
