"""Hot numeric kernels with numba-compiled and pure numpy/Python twins.

Set ``GOSSIP_AGE_NO_NUMBA=1`` to force the fallback path (or it is selected
automatically when numba is unavailable). The event kernel shares one source
for both paths and consumes pre-drawn uniforms, so results are bitwise
identical regardless of backend. The mask-scan and floor-sweep kernels have
separate vectorized numpy fallbacks that return the same exact values.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.getenv("GOSSIP_AGE_NO_NUMBA", "").strip() in ("1", "true", "yes")

if not _DISABLED:
    try:
        import numba
    except ImportError:
        numba = None
else:
    numba = None

NUMBA_ENABLED = numba is not None


def backend_name() -> str:
    return "numba" if NUMBA_ENABLED else "numpy"


# ---------------------------------------------------------------------------
# event kernel
# ---------------------------------------------------------------------------

def _sim_chunk(
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
):
    """Advance one replication through a chunk of pre-drawn uniforms.

    Each event consumes one row of ``u``: inter-arrival draw, category draw,
    and two selection draws. Per-node version integrals are accumulated
    lazily in ``node_acc`` (flushed when a node's version changes), while the
    window-clipped integrals of the source counter and of the minimum age are
    kept in ``fstate``. Returns the number of rows consumed; the replication
    is finished once ``fstate[0]`` reaches ``horizon``.

    fstate: [t, integral(N_s dt), integral(min age dt)]
    istate: [N_s, max node version, self-update count, push count,
             gossip-accept count, gossip-reject count]
    """
    t = fstate[0]
    acc_src = fstate[1]
    acc_min = fstate[2]
    n_src = istate[0]
    max_v = istate[1]
    c_self = istate[2]
    c_push = istate[3]
    c_acc = istate[4]
    c_rej = istate[5]
    n_edges = edge_src.shape[0]
    rows = u.shape[0]
    e = 0
    while e < rows:
        dt = -np.log1p(-u[e, 0]) / total_rate
        t_next = t + dt
        lo = t if t > warmup else warmup
        hi = t_next if t_next < horizon else horizon
        if hi > lo:
            acc_src += n_src * (hi - lo)
            acc_min += (n_src - max_v) * (hi - lo)
        if t_next >= horizon:
            t = horizon
            e += 1
            break
        t = t_next
        cat = u[e, 1]
        if cat < cut_self:
            n_src += 1
            c_self += 1
        elif cat < cut_push:
            k = int(u[e, 2] * n)
            if k >= n:
                k = n - 1
            if node_version[k] != n_src:
                lo = node_last_t[k] if node_last_t[k] > warmup else warmup
                if t > lo:
                    node_acc[k] += node_version[k] * (t - lo)
                node_version[k] = n_src
                node_last_t[k] = t
                max_v = n_src
            c_push += 1
        else:
            k = int(u[e, 2] * n_edges)
            if k >= n_edges:
                k = n_edges - 1
            if u[e, 3] >= alias_cut[k]:
                k = alias_idx[k]
            src = edge_src[k]
            dst = edge_dst[k]
            if node_version[src] > node_version[dst]:
                lo = node_last_t[dst] if node_last_t[dst] > warmup else warmup
                if t > lo:
                    node_acc[dst] += node_version[dst] * (t - lo)
                node_version[dst] = node_version[src]
                node_last_t[dst] = t
                if node_version[dst] > max_v:
                    max_v = node_version[dst]
                c_acc += 1
            else:
                c_rej += 1
        e += 1
    fstate[0] = t
    fstate[1] = acc_src
    fstate[2] = acc_min
    istate[0] = n_src
    istate[1] = max_v
    istate[2] = c_self
    istate[3] = c_push
    istate[4] = c_acc
    istate[5] = c_rej
    return e


sim_chunk_py = _sim_chunk
sim_chunk_jit = numba.njit(cache=True)(_sim_chunk) if NUMBA_ENABLED else None
sim_chunk = sim_chunk_jit if NUMBA_ENABLED else sim_chunk_py


# ---------------------------------------------------------------------------
# exhaustive minimum-boundary scan over subset bitmasks
# ---------------------------------------------------------------------------

def _boundary_scan_source(nbr_masks, n):
    """Minimum incoming-edge count over connected subsets, per subset size.

    Scans every nonempty subset mask of [0, n); returns (min_e, witness)
    arrays indexed by size, with -1/0 where a size has no connected subset.
    Witnesses are the smallest masks attaining the minimum.
    """
    full = (1 << n) - 1
    best = np.full(n + 1, -1, dtype=np.int64)
    witness = np.zeros(n + 1, dtype=np.int64)
    for mask in range(1, full + 1):
        size = 0
        e_in2 = 0  # twice the internal edge count
        deg = 0
        m = mask
        i = 0
        while m:
            if m & 1:
                size += 1
                deg += _popcount(nbr_masks[i])
                e_in2 += _popcount(nbr_masks[i] & mask)
            m >>= 1
            i += 1
        e_total = deg - e_in2
        if best[size] != -1 and e_total >= best[size]:
            continue
        # connectivity by mask dilation from the lowest member
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
                break
            reach = grow
        if reach == mask:
            best[size] = e_total
            witness[size] = mask
    return best, witness


def _popcount_py(x):
    c = 0
    while x:
        x &= x - 1
        c += 1
    return c


if NUMBA_ENABLED:

    @numba.njit(inline="always")
    def _popcount(x):
        c = 0
        while x:
            x &= x - 1
            c += 1
        return c

    boundary_scan_jit = numba.njit(cache=True)(_boundary_scan_source)
else:
    _popcount = _popcount_py
    boundary_scan_jit = None


def boundary_scan_numpy(nbr_masks, n, chunk=1 << 20):
    """Vectorized twin of the mask scan.

    Computes sizes and edge counts for blocks of masks with `bitwise_count`,
    then connectivity-checks only candidate improvements in Python.
    """
    nbrs = np.asarray(nbr_masks, dtype=np.int64)
    degs = np.bitwise_count(nbrs).astype(np.int64)
    best = np.full(n + 1, -1, dtype=np.int64)
    witness = np.zeros(n + 1, dtype=np.int64)
    full = (1 << n) - 1
    nbrs_list = [int(x) for x in nbrs]
    for start in range(1, full + 1, chunk):
        stop = min(start + chunk, full + 1)
        masks = np.arange(start, stop, dtype=np.int64)
        size = np.bitwise_count(masks).astype(np.int64)
        deg = np.zeros(masks.shape, dtype=np.int64)
        e_in2 = np.zeros(masks.shape, dtype=np.int64)
        for i in range(n):
            inside = (masks >> i) & 1
            deg += inside * degs[i]
            e_in2 += inside * np.bitwise_count(masks & nbrs[i]).astype(np.int64)
        e_total = deg - e_in2
        thresh = np.where(best[size] == -1, np.iinfo(np.int64).max, best[size])
        cand = np.nonzero(e_total < thresh)[0]
        for idx in cand:
            mask = int(masks[idx])
            s = int(size[idx])
            e = int(e_total[idx])
            if best[s] != -1 and e >= best[s]:
                continue
            reach = mask & (-mask)
            while True:
                grow = reach
                m = reach
                i = 0
                while m:
                    if m & 1:
                        grow |= nbrs_list[i]
                    m >>= 1
                    i += 1
                grow &= mask
                if grow == reach:
                    break
                reach = grow
            if reach == mask:
                best[s] = e
                witness[s] = mask
    return best, witness


def boundary_scan(nbr_masks, n):
    if NUMBA_ENABLED:
        return boundary_scan_jit(np.asarray(nbr_masks, dtype=np.int64), n)
    return boundary_scan_numpy(nbr_masks, n)


# ---------------------------------------------------------------------------
# floor-inequality margin sweep
# ---------------------------------------------------------------------------

def _floor_margins_source(n_max, alpha):
    """Margin rhs - lhs of the floor product-sum inequality for n = 1..n_max."""
    out = np.empty(n_max + 1, dtype=np.float64)
    out[0] = 0.0
    for n in range(1, n_max + 1):
        lhs = 0.0
        rhs = 0.0
        pl = 1.0
        pr = 1.0
        for j in range(1, n + 1):
            fj = np.floor(np.sqrt(j))
            fj1 = np.floor(np.sqrt(j + 1.0))
            pl *= fj / (fj1 + j / n)
            pr *= np.sqrt(j) / (np.sqrt(j + 1.0) + j / n)
            lhs += pl
            rhs += pr
        out[n] = alpha * rhs - lhs
    return out


floor_margins_jit = numba.njit(cache=True)(_floor_margins_source) if NUMBA_ENABLED else None


def floor_margins_numpy(n_max, alpha):
    out = np.empty(n_max + 1, dtype=np.float64)
    out[0] = 0.0
    for n in range(1, n_max + 1):
        j = np.arange(1, n + 1, dtype=np.float64)
        fl = np.floor(np.sqrt(j))
        fl1 = np.floor(np.sqrt(j + 1.0))
        lhs = np.cumprod(fl / (fl1 + j / n)).sum()
        rhs = np.cumprod(np.sqrt(j) / (np.sqrt(j + 1.0) + j / n)).sum()
        out[n] = alpha * rhs - lhs
    return out


def floor_margins(n_max, alpha):
    if NUMBA_ENABLED:
        return floor_margins_jit(n_max, alpha)
    return floor_margins_numpy(n_max, alpha)
