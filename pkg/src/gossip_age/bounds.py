"""Grid-specific analytic bounds and their numeric verification.

Covers the incoming-edge machinery on the 2-d wrap-around grid (edge
partitions, spiral and boundary-hugging extremal sets, an exhaustive
minimum-boundary oracle), the floor-product inequality used to smooth the
age recursion, the finite-sum upper bounds whose leading term grows like
n**(1/3), and the constants behind the closed-form coefficient 6.5188.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate, special

from . import _kernels
from .topology import GossipNetwork, NodeSubset, TopologySpec, build_network

EULER_GAMMA = float(np.euler_gamma)
SQRT3 = math.sqrt(3.0)
CLOSED_FORM_COEFF = 6.5188

_BRUTEFORCE_MAX_SIDE = 5
_SCAN_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


# ---------------------------------------------------------------------------
# edge partitions and extremal subsets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EdgePartition:
    """Neighbors of a subset grouped by how many edges they send into it."""

    a: int  # neighbors with 1 edge into the set
    b: int  # 2 edges
    c: int  # 3 edges
    d: int  # 4 edges

    @property
    def e_total(self) -> int:
        return self.a + 2 * self.b + 3 * self.c + 4 * self.d

    @property
    def n_neighbors(self) -> int:
        return self.a + self.b + self.c + self.d


def _require_2d_torus(net: GossipNetwork) -> int:
    if net.tag.kind != "torus-grid" or net.tag.dimension != 2:
        raise ValueError(f"edge partition is defined on the 2-d torus grid, got {net.tag}")
    return net.tag.side


def _subset_connected(net: GossipNetwork, members: frozenset[int]) -> bool:
    start = next(iter(members))
    seen = {start}
    frontier = [start]
    while frontier:
        i = frontier.pop()
        for j in net.out_neighbors[i]:
            if j in members and j not in seen:
                seen.add(j)
                frontier.append(j)
    return len(seen) == len(members)


def edge_partition(net: GossipNetwork, subset: NodeSubset) -> EdgePartition:
    """Count neighbors of ``subset`` by incoming-edge multiplicity (1..4)."""
    _require_2d_torus(net)
    members = subset.members
    if not members:
        raise ValueError("empty subset")
    if len(members) >= net.n:
        raise ValueError("edge partition needs a proper subset")
    if not _subset_connected(net, members):
        raise ValueError("subset is not connected")
    counts = [0, 0, 0, 0, 0]
    for i in range(net.n):
        if i in members:
            continue
        m = sum(1 for j in net.out_neighbors[i] if j in members)
        counts[m] += 1
    return EdgePartition(a=counts[1], b=counts[2], c=counts[3], d=counts[4])


def spiral_cells(j: int) -> list[tuple[int, int]]:
    """First j cells of the square spiral accretion order.

    Prefixes of this order minimize the incoming-edge count among size-j
    subsets of the unbounded grid, where it equals 2*ceil(2*sqrt(j)).
    """
    if j < 1:
        raise ValueError(f"spiral size must be >= 1, got {j}")
    cells = [(0, 0)]
    x = y = 0
    step = 1
    directions = ((1, 0), (0, 1), (-1, 0), (0, -1))
    d = 0
    while len(cells) < j:
        for _ in range(2):
            dx, dy = directions[d % 4]
            for _ in range(step):
                x += dx
                y += dy
                cells.append((x, y))
                if len(cells) == j:
                    return cells
            d += 1
        step += 1
    return cells


def spiral_boundary_formula(j: int) -> int:
    """2*ceil(2*sqrt(j)), evaluated in exact integer arithmetic."""
    k = math.isqrt(4 * j)
    if k * k < 4 * j:
        k += 1
    return 2 * k


def spiral_subset(side: int, j: int) -> NodeSubset:
    """Embed the size-j spiral on an side x side torus.

    The spiral keeps its unbounded-grid shape only while it fits inside the
    torus; a bounding box larger than the side would self-wrap and is
    rejected. With the box strictly inside the side the torus incoming-edge
    count equals the unwrapped one.
    """
    cells = spiral_cells(j)
    xs = [c[0] for c in cells]
    ys = [c[1] for c in cells]
    w = max(xs) - min(xs) + 1
    h = max(ys) - min(ys) + 1
    if w > side or h > side:
        raise ValueError(f"spiral of {j} cells ({w}x{h} box) would wrap on an {side}x{side} torus")
    x0, y0 = min(xs), min(ys)
    return NodeSubset.of((y - y0) * side + (x - x0) for x, y in cells)


def staircase_subset(side: int, j: int) -> NodeSubset:
    """Boundary-hugging set: full top row, then rows shrinking by one.

    Spanning the whole width makes the side edges internal through the
    wrap-around, which is how finite-grid sets undercut the spiral's
    incoming-edge count. The 15-node instance on the 6x6 torus has 13
    distinct incoming-edge sources.
    """
    if not 1 <= j <= side * (side + 1) // 2:
        raise ValueError(f"staircase size must be in [1, {side * (side + 1) // 2}], got {j}")
    cells = []
    row = 0
    remaining = j
    while remaining > 0:
        take = min(side - row, remaining)
        cells.extend(row * side + c for c in range(take))
        remaining -= take
        row += 1
    return NodeSubset.of(cells)


def _torus_scan(side: int) -> tuple[np.ndarray, np.ndarray]:
    if side not in _SCAN_CACHE:
        net = build_network(TopologySpec("torus-grid", side=side))
        masks = np.asarray(net.neighbor_masks(), dtype=np.int64)
        _SCAN_CACHE[side] = _kernels.boundary_scan(masks, net.n)
    return _SCAN_CACHE[side]


def min_boundary_bruteforce(side: int, j: int) -> tuple[int, NodeSubset]:
    """Exhaustive minimum incoming-edge count over connected size-j subsets.

    Scans all subsets of the side x side torus, so the side is capped at
    5 (2**25 masks). Returns the minimum and the smallest-mask witness.
    """
    if side < 3:
        raise ValueError(f"torus side must be >= 3, got {side}")
    if side > _BRUTEFORCE_MAX_SIDE:
        raise ValueError(
            f"exhaustive subset scan is limited to side <= {_BRUTEFORCE_MAX_SIDE} "
            f"(2**{side * side} masks is beyond the enumeration guard)"
        )
    n = side * side
    if not 1 <= j <= n - 1:
        raise ValueError(f"subset size must be in [1, {n - 1}], got {j}")
    best, witness = _torus_scan(side)
    return int(best[j]), NodeSubset.from_mask(int(witness[j]))


def min_incoming_edges_bound(n: int, j: int) -> int:
    """Piecewise lower bound on incoming edges of a connected size-j subset:
    2*floor(sqrt(j)) up to j = 3n/4, then 4*floor(sqrt(n-j))."""
    if not 1 <= j <= n - 1:
        raise ValueError(f"subset size must be in [1, {n - 1}], got {j}")
    if 4 * j <= 3 * n:
        return 2 * math.isqrt(j)
    return 4 * math.isqrt(n - j)


# ---------------------------------------------------------------------------
# recursion bounds
# ---------------------------------------------------------------------------

def grid_age_bound(v_max: float, j: int, n: int, lam_e: float = 1.0, lam: float = 1.0) -> float:
    """Grid upper bound on the age of a connected size-j subset:

    (2 lambda_e / lambda + floor(sqrt(j)) * v_max) / (j/n + floor(sqrt(j)))

    where v_max bounds the ages of all one-node expansions. Only valid for
    j <= 3n/4; larger sets need the complement form with floor(sqrt(n-j)).
    """
    if not 1 <= j <= n:
        raise ValueError(f"subset size must be in [1, {n}], got {j}")
    if 4 * j > 3 * n:
        raise ValueError(
            f"bound covers j <= 3n/4 = {3 * n / 4:g}; for larger sets use the "
            f"complement regime with 4*floor(sqrt(n-j)) incoming edges"
        )
    fl = math.isqrt(j)
    return (2.0 * lam_e / lam + fl * v_max) / (j / n + fl)


@dataclass(frozen=True)
class FloorInequality:
    lhs: float
    rhs: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs


def floor_inequality_check(n: int, alpha: float = SQRT3) -> FloorInequality:
    """Evaluate both sides of the floor-product inequality

    sum_i prod_j floor(sqrt(j)) / (floor(sqrt(j+1)) + j/n)
        <= alpha * sum_i prod_j sqrt(j) / (sqrt(j+1) + j/n)

    with i, j running from 1 to n, via running products.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    j = np.arange(1, n + 1, dtype=np.float64)
    fl = np.floor(np.sqrt(j))
    fl1 = np.floor(np.sqrt(j + 1.0))
    lhs = float(np.cumprod(fl / (fl1 + j / n)).sum())
    rhs = alpha * float(np.cumprod(np.sqrt(j) / (np.sqrt(j + 1.0) + j / n)).sum())
    return FloorInequality(lhs=lhs, rhs=rhs)


def floor_inequality_margins(n_max: int, alpha: float = SQRT3) -> np.ndarray:
    """rhs - lhs of the floor-product inequality for every n in 1..n_max.

    Index 0 is unused. All margins nonnegative means the inequality holds on
    the whole range.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    return _kernels.floor_margins(n_max, alpha)


@dataclass(frozen=True)
class RatioCheckReport:
    """Numeric verification of the two functions behind the floor inequality.

    f(x) = 1 - (1 + 1/x^2)^x sqrt((x-1)/(x+1)) should be nonnegative and
    decreasing toward 0 for x >= 2; g (the per-factor ratio as a function of
    position inside a square block) should be decreasing on each block.
    """

    f_min: float
    f_max_increase: float
    f_tail: float
    g_max_slope: float

    @property
    def f_nonnegative(self) -> bool:
        return self.f_min >= 0.0

    @property
    def f_decreasing(self) -> bool:
        return self.f_max_increase <= 1e-12

    @property
    def g_decreasing(self) -> bool:
        return self.g_max_slope < 0.0

    @property
    def ok(self) -> bool:
        return self.f_nonnegative and self.f_decreasing and self.g_decreasing


def _f_ratio(x: np.ndarray) -> np.ndarray:
    return 1.0 - np.exp(x * np.log1p(x**-2.0)) * np.sqrt((x - 1.0) / (x + 1.0))


def _g_ratio(x: np.ndarray, k: int, n: float) -> np.ndarray:
    return (np.sqrt(1.0 + 1.0 / x) + np.sqrt(x) / n) / (1.0 + x / (k * n))


def ratio_function_checks(
    x_grid: np.ndarray | None = None,
    k_values: Iterable[int] = range(2, 21),
    n_values: Sequence[float] = (1e2, 1e4),
) -> RatioCheckReport:
    """Check f on ``x_grid`` (default geometric grid on [2, 1e4]) and g by
    finite differences on each block [k^2, (k+1)^2 - 1)."""
    if x_grid is None:
        x_grid = np.geomspace(2.0, 1e4, 4001)
    x = np.asarray(x_grid, dtype=np.float64)
    if x.min() < 2.0:
        raise ValueError("f is checked on x >= 2")
    f = _f_ratio(x)
    g_max_slope = -np.inf
    for k in k_values:
        lo, hi = k * k, (k + 1) * (k + 1) - 1
        xs = np.linspace(lo, hi, 200, endpoint=False)
        for n in n_values:
            g = _g_ratio(xs, k, n)
            slope = np.diff(g) / np.diff(xs)
            g_max_slope = max(g_max_slope, float(slope.max()))
    return RatioCheckReport(
        f_min=float(f.min()),
        f_max_increase=float(np.diff(f).max()) if len(f) > 1 else 0.0,
        f_tail=float(f[-1]),
        g_max_slope=g_max_slope,
    )


def decay_product(n: int, i: int) -> tuple[float, float]:
    """Running attenuation product of the smoothed recursion and its log
    approximation.

    The product multiplies 1 / (1 + 1/(2j) - 1/(8j^2) + sqrt(j)/n) over
    j = 1..i. The approximation replaces the harmonic part by
    (log i + gamma)/2, keeps the exact partial sum of 1/(8j^2) (capped by
    pi^2/48), and integrates the sqrt(j)/n part to 2 i^(3/2) / (3n).
    Returns (a_i, log_approx).
    """
    if not 1 <= i <= n:
        raise ValueError(f"need 1 <= i <= n, got i={i}, n={n}")
    j = np.arange(1, i + 1, dtype=np.float64)
    factors = 1.0 / (1.0 + 0.5 / j - 0.125 / j**2 + np.sqrt(j) / n)
    a_i = float(np.prod(factors))
    delta = float((0.125 / j**2).sum())
    log_approx = -(0.5 * (math.log(i) + EULER_GAMMA) - delta + 2.0 * i**1.5 / (3.0 * n))
    return a_i, log_approx


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------

def beta_constant() -> tuple[float, float]:
    """The tail integral int_0^inf t^(-1/2) exp(-(2/3) t^(3/2)) dt.

    Returns (quadrature, closed_form). The substitution u = sqrt(t) removes
    the integrable singularity at 0; the closed form is
    (2/3)^(2/3) * Gamma(1/3).
    """
    quad, _ = integrate.quad(lambda u: 2.0 * math.exp(-(2.0 / 3.0) * u**3), 0.0, np.inf)
    closed = (2.0 / 3.0) ** (2.0 / 3.0) * float(special.gamma(1.0 / 3.0))
    return quad, closed


def beta_prime_constant() -> float:
    """sqrt(3) * exp(-gamma/2) * exp(pi^2/48) * beta, about 3.259."""
    _, beta = beta_constant()
    return SQRT3 * math.exp(-EULER_GAMMA / 2.0) * math.exp(math.pi**2 / 48.0) * beta


# ---------------------------------------------------------------------------
# finite-sum age bounds
# ---------------------------------------------------------------------------

def cube_root_sum_bound(n: int, lam_e: float = 1.0, lam: float = 1.0) -> tuple[float, float]:
    """Finite-sum age bound for the subsets below 3n/4, exact and relaxed.

    exact   = (2 lam_e/lam) (1/(1+1/n)) (1 + sum_i prod_j floor(sqrt(j)) / (floor(sqrt(j+1)) + (j+1)/n))
    relaxed = same with the floors smoothed and a sqrt(3) prefactor on the sum

    Sums run to 3n/4 - 1 (floored for n not divisible by 4). The exact value
    never exceeds the relaxed one, and the relaxed one grows like n**(1/3).
    """
    if n < 4:
        raise ValueError(f"n must be >= 4, got {n}")
    top = 3 * n // 4 - 1
    i = np.arange(1, top + 1, dtype=np.float64)
    pref = (2.0 * lam_e / lam) / (1.0 + 1.0 / n)
    exact_ratios = np.floor(np.sqrt(i)) / (np.floor(np.sqrt(i + 1.0)) + (i + 1.0) / n)
    exact = pref * (1.0 + float(np.cumprod(exact_ratios).sum()))
    relaxed_ratios = np.sqrt(i) / (np.sqrt(i + 1.0) + i / n)
    relaxed = pref * (1.0 + SQRT3 * float(np.cumprod(relaxed_ratios).sum()))
    return exact, relaxed


def harmonic_tail_bound(n: int, lam_e: float = 1.0, lam: float = 1.0) -> float:
    """Finite-sum age bound for the subsets above 3n/4:

    lam_e/lam * (2 + sum_{l=1}^{n/4 - 1} 1/l)

    The limit is floored for n not divisible by 4. Grows like log n.
    """
    if n < 8:
        raise ValueError(f"n must be >= 8, got {n}")
    top = n // 4 - 1
    ell = np.arange(1, top + 1, dtype=np.float64)
    return lam_e / lam * (2.0 + float((1.0 / ell).sum()))


def closed_form_bound(n: int, lam_e: float = 1.0, lam: float = 1.0) -> float:
    """Closed-form single-node age bound 6.5188 (lam_e/lam) n^(1/3)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return CLOSED_FORM_COEFF * (lam_e / lam) * n ** (1.0 / 3.0)


# ---------------------------------------------------------------------------
# report assembly
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundReport:
    """Evaluated bounds for one (n, lambda_e, lambda), optionally with a
    subset size j for the size-dependent entries."""

    n: int
    lam_e: float
    lam: float
    x_sum: float
    x_sum_relaxed: float
    y_sum: float
    closed_form: float
    beta: float
    beta_prime: float
    j: int | None = None
    grid_bound: float | None = None
    e_lower: int | None = None

    def to_json_dict(self) -> dict:
        out: dict = {"n": self.n}
        if self.j is not None:
            out["j"] = self.j
        out["lambda_e"] = self.lam_e
        out["lambda"] = self.lam
        if self.grid_bound is not None:
            out["lemma3"] = self.grid_bound
        if self.e_lower is not None:
            out["E_lower"] = self.e_lower
        out.update(
            X_sum=self.x_sum,
            X_sum_relaxed=self.x_sum_relaxed,
            Y_sum=self.y_sum,
            closed_form=self.closed_form,
            beta=self.beta,
            beta_prime=self.beta_prime,
        )
        return out


def build_bound_report(
    n: int,
    lam_e: float = 1.0,
    lam: float = 1.0,
    j: int | None = None,
    v_max: float | None = None,
) -> BoundReport:
    """Assemble the standard bound report; the size-dependent entries are
    filled when j (and, for the recursion bound, v_max) is given."""
    x_sum, x_relaxed = cube_root_sum_bound(n, lam_e, lam)
    e_lower = min_incoming_edges_bound(n, j) if j is not None else None
    grid_bound = None
    if j is not None and v_max is not None:
        grid_bound = grid_age_bound(v_max, j, n, lam_e, lam)
    _, beta = beta_constant()
    return BoundReport(
        n=n,
        lam_e=lam_e,
        lam=lam,
        x_sum=x_sum,
        x_sum_relaxed=x_relaxed,
        y_sum=harmonic_tail_bound(n, lam_e, lam),
        closed_form=closed_form_bound(n, lam_e, lam),
        beta=beta,
        beta_prime=beta_prime_constant(),
        j=j,
        grid_bound=grid_bound,
        e_lower=e_lower,
    )
