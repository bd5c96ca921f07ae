"""Exact probability metrics on atomic measures.

Prohorov distance is computed through its coupling characterization: for a
threshold ``d``, let ``deficit(d)`` be the probability mass that cannot be
transported between the two measures using only atom pairs within distance
``d``.  The distance is ``min over candidate thresholds d of
max(d, deficit(d))`` where the candidates are 0 and all pairwise atom
distances.  Two conventions make this scan exact and finite:

* closed balls everywhere (the infimum is the same as with the open-ball
  definition, and the deficit becomes a step function of ``d``);
* masses are scaled by 10**12 and rounded to integers summing exactly to
  the scale (largest-remainder rounding), so transport feasibility is
  decided in integer arithmetic.  The induced distortion of any reported
  mass or distance is below 1e-11.

Because atoms are sorted, the pairs within distance ``d`` form contiguous
column windows whose endpoints are nondecreasing in the row index.  On such
a staircase bipartite graph the leftmost-first greedy assignment attains
the maximum flow (exchange argument: a later row can always take over a
right column from an earlier row, never the converse), which is what
``_greedy_transport`` implements in O(rows + cols) after the window scan.

``prohorov_oracle`` is the independent verification path: it enumerates
subsets of the supports and bisects on the defining inequalities directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import LabError
from .measures import DiscreteMeasure, MixedNormal

MASS_SCALE = 10**12
ORACLE_MAX_ATOMS = 14

_KS_GRID_LO = -10.0
_KS_GRID_HI = 10.0
_KS_GRID_STEP = 1e-4


@dataclass(frozen=True)
class Coupling:
    """Joint mass matrix with the two atomic marginals it couples."""

    row_positions: tuple[float, ...]
    row_masses: tuple[float, ...]
    col_positions: tuple[float, ...]
    col_masses: tuple[float, ...]
    matrix: np.ndarray

    def __post_init__(self):
        self.matrix.flags.writeable = False

    def violation(self, eps: float) -> float:
        """Total mass of pairs further apart than eps."""
        x = np.asarray(self.row_positions)[:, None]
        y = np.asarray(self.col_positions)[None, :]
        return float(self.matrix[np.abs(x - y) > eps].sum())

    def max_marginal_error(self) -> float:
        row_err = np.abs(self.matrix.sum(axis=1) - np.asarray(self.row_masses)).max()
        col_err = np.abs(self.matrix.sum(axis=0) - np.asarray(self.col_masses)).max()
        return float(max(row_err, col_err))


def _integer_masses(mass: np.ndarray, scale: int = MASS_SCALE) -> np.ndarray:
    """Scale masses to integers summing exactly to ``scale`` (largest remainder)."""
    exact = mass * float(scale)
    base = np.floor(exact).astype(np.int64)
    remainder = exact - base
    short = scale - int(base.sum())
    while short > 0:
        order = np.argsort(-remainder, kind="stable")
        k = min(short, len(base))
        base[order[:k]] += 1
        remainder[order[:k]] -= 1.0
        short -= k
    while short < 0:
        eligible = np.flatnonzero(base >= 1)
        order = eligible[np.argsort(remainder[eligible], kind="stable")]
        k = min(-short, len(order))
        base[order[:k]] -= 1
        remainder[order[:k]] += 1.0
        short += k
    return base


def _windows(dist: np.ndarray, d: float) -> tuple[np.ndarray, np.ndarray]:
    """Per-row index range [lo, hi] of columns with dist[i, j] <= d.

    The bounds come from the same rounded distance matrix that supplies the
    candidate thresholds and the violation counts, so a pair at distance
    exactly d is never misclassified by re-rounding x +- d.  Each row's
    allowed set is contiguous and the bounds are nondecreasing down the
    rows (rounding is monotone, exact distances are unimodal per row).
    """
    mask = dist <= d
    lo = mask.argmax(axis=1)
    hi = dist.shape[1] - 1 - mask[:, ::-1].argmax(axis=1)
    empty = ~mask.any(axis=1)
    lo[empty] = 1
    hi[empty] = 0
    return lo, hi


def _greedy_transport(
    ia: np.ndarray,
    ib: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    collect: bool = False,
):
    """Maximum in-window integer transport; optionally the assignment triples."""
    remaining = [int(v) for v in ib]
    ncols = len(remaining)
    # nxt[j]: first column >= j with remaining capacity (path-compressed)
    nxt = list(range(ncols + 1))

    def find(j: int) -> int:
        root = j
        while nxt[root] != root:
            root = nxt[root]
        while nxt[j] != root:
            nxt[j], j = root, nxt[j]
        return root

    flow = 0
    triples: list[tuple[int, int, int]] = [] if collect else None
    for i in range(len(ia)):
        left = int(ia[i])
        h = int(hi[i])
        j = int(lo[i])
        while left > 0 and j <= h:
            j = find(j)
            if j > h:
                break
            cap = remaining[j]
            t = cap if cap < left else left
            remaining[j] = cap - t
            left -= t
            flow += t
            if collect:
                triples.append((i, j, t))
            if remaining[j] == 0:
                nxt[j] = j + 1
    return (flow, triples) if collect else flow


def _prepare(mu: DiscreteMeasure, nu: DiscreteMeasure):
    x = mu.positions
    y = nu.positions
    if x.size * y.size > 2 * 10**8:
        raise LabError("too-large", "atom count product too large for exact scan")
    dist = np.abs(x[:, None] - y[None, :])
    ia = _integer_masses(mu.masses)
    ib = _integer_masses(nu.masses)
    return dist, ia, ib


def _deficit_int(dist, ia, ib, d: float) -> int:
    lo, hi = _windows(dist, d)
    return MASS_SCALE - _greedy_transport(ia, ib, lo, hi)


def prohorov_distance(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Prohorov distance between two atomic measures, exact up to 1e-11.

    Scans ``max(d, deficit(d))`` over the candidate thresholds; since the
    deficit is nonincreasing and the candidates increase, the minimum sits
    at the first candidate where ``deficit(d) <= d``, located by bisection.
    """
    dist, ia, ib = _prepare(mu, nu)
    cands = np.unique(np.concatenate(([0.0], dist.ravel())))

    def deficit(d: float) -> float:
        return _deficit_int(dist, ia, ib, d) / MASS_SCALE

    lo_i, hi_i = 0, len(cands) - 1
    # invariant: predicate deficit(c) <= c is False before lo_i, True at hi_i
    if deficit(float(cands[0])) <= float(cands[0]):
        return float(cands[0])
    while hi_i - lo_i > 1:
        mid = (lo_i + hi_i) // 2
        if deficit(float(cands[mid])) <= float(cands[mid]):
            hi_i = mid
        else:
            lo_i = mid
    return float(min(deficit(float(cands[lo_i])), float(cands[hi_i])))


def prohorov_oracle(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Independent Prohorov evaluation by subset enumeration and bisection.

    Checks both one-sided inequalities (closed neighborhoods) for every
    subset of each support and bisects on eps to 1e-10.  Only for small
    instances; raises ``oracle-size`` beyond 14 combined atoms.
    """
    n_total = len(mu.atoms) + len(nu.atoms)
    if n_total > ORACLE_MAX_ATOMS:
        raise LabError("oracle-size", f"{n_total} atoms exceeds oracle limit")

    def side_tables(a: DiscreteMeasure, b: DiscreteMeasure):
        # all subsets A of supp(a): masses a(A), and distances of b-atoms to A
        na = len(a.atoms)
        masks = (np.arange(1 << na)[:, None] >> np.arange(na)[None, :]) & 1
        masks = masks.astype(bool)
        mass_a = masks @ a.masses
        d = np.abs(a.positions[:, None] - b.positions[None, :])
        dist = np.where(masks[:, :, None], d[None, :, :], np.inf).min(axis=1)
        return mass_a, dist, b.masses

    side1 = side_tables(mu, nu)
    side2 = side_tables(nu, mu)

    def feasible(eps: float) -> bool:
        for mass_a, dist, mass_b in (side1, side2):
            covered = (dist <= eps) @ mass_b
            if np.any(mass_a > covered + eps + 1e-15):
                return False
        return True

    lo, hi = 0.0, 1.0
    if feasible(0.0):
        return 0.0
    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            hi = mid
        else:
            lo = mid
    return hi


def strassen_coupling(
    mu: DiscreteMeasure, nu: DiscreteMeasure, eps: float
) -> Coupling | None:
    """A coupling whose mass outside distance eps is at most eps, or None.

    When feasible, the returned coupling ships the maximal in-range mass;
    the residual is matched northwest-style so the marginals are exact to
    the integer scale (error < 1e-12 per atom).
    """
    if eps < 0:
        raise LabError("bad-eps", "eps must be >= 0")
    dist, ia, ib = _prepare(mu, nu)
    lo, hi = _windows(dist, eps)
    flow, triples = _greedy_transport(ia, ib, lo, hi, collect=True)
    deficit = MASS_SCALE - flow
    if deficit / MASS_SCALE > eps:
        return None

    grid = np.zeros(dist.shape, dtype=np.int64)
    for i, j, t in triples:
        grid[i, j] += t
    res_row = ia - grid.sum(axis=1)
    res_col = ib - grid.sum(axis=0)
    i = j = 0
    nrows, ncols = dist.shape
    while i < nrows and j < ncols:
        if res_row[i] == 0:
            i += 1
            continue
        if res_col[j] == 0:
            j += 1
            continue
        t = min(int(res_row[i]), int(res_col[j]))
        grid[i, j] += t
        res_row[i] -= t
        res_col[j] -= t
    matrix = grid.astype(float) / MASS_SCALE
    return Coupling(
        tuple(float(v) for v in mu.positions),
        tuple(float(v) for v in mu.masses),
        tuple(float(v) for v in nu.positions),
        tuple(float(v) for v in nu.masses),
        matrix,
    )


def wasserstein2(mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    """Quadratic transport distance via the quantile coupling on (0, 1).

    Both quantile functions are step functions; the integral is evaluated
    exactly on the merged breakpoint partition.
    """
    cum_mu = np.cumsum(mu.masses)[:-1]
    cum_nu = np.cumsum(nu.masses)[:-1]
    bk = np.unique(np.concatenate((cum_mu, cum_nu, [0.0, 1.0])))
    bk = bk[(bk >= 0.0) & (bk <= 1.0)]
    widths = np.diff(bk)
    mids = 0.5 * (bk[:-1] + bk[1:])
    keep = widths > 0
    q_mu = mu.quantile_many(mids[keep])
    q_nu = nu.quantile_many(mids[keep])
    return float(math.sqrt(np.dot(widths[keep], (q_mu - q_nu) ** 2)))


CdfEvaluable = DiscreteMeasure | MixedNormal


def _is_continuous(f: CdfEvaluable) -> bool:
    return isinstance(f, MixedNormal) and f.has_continuous_part


def ks_distance(f: CdfEvaluable, g: CdfEvaluable) -> float:
    """Sup-distance of two CDFs over jump points (plus a grid when needed).

    Exact when at most one side has a continuous part: between jumps a step
    CDF is constant and the other CDF is monotone, so the supremum is
    attained at a jump point or its left limit.  When both sides are
    continuous the sup is refined on a fixed grid of step 1e-4 over
    [-10, 10]; this under-approximates by at most the local CDF modulus
    over one grid step.
    """
    anchors = [np.asarray(f.jump_points(), dtype=float), np.asarray(g.jump_points(), dtype=float)]
    if _is_continuous(f) and _is_continuous(g):
        n_steps = int(round((_KS_GRID_HI - _KS_GRID_LO) / _KS_GRID_STEP)) + 1
        anchors.append(np.linspace(_KS_GRID_LO, _KS_GRID_HI, n_steps))
    ts = np.unique(np.concatenate([a for a in anchors if a.size]))
    if ts.size == 0:
        return 0.0
    d_right = np.abs(f.cdf_many(ts) - g.cdf_many(ts))
    d_left = np.abs(f.cdf_left_many(ts) - g.cdf_left_many(ts))
    return float(max(d_right.max(), d_left.max()))


def mixture_bound_check(
    pairs: list[tuple[float, DiscreteMeasure, DiscreteMeasure]], eps: float
) -> tuple[float, bool]:
    """Check the mixture stability bound: close components give 2*eps mixtures.

    ``pairs`` are (weight, mu_i, nu_i); requires weights summing to 1 and
    the total weight of pairs with prohorov(mu_i, nu_i) >= eps to be at
    most eps.  Returns the Prohorov distance between the two mixtures and
    whether it is <= 2*eps (+1e-9 slack).
    """
    cs = np.array([c for c, _, _ in pairs], dtype=float)
    if np.any(cs < 0) or abs(cs.sum() - 1.0) > 1e-9:
        raise LabError("bad-weights", "weights must be >= 0 and sum to 1")
    heavy = sum(
        c for c, m, n in pairs if c > 0 and prohorov_distance(m, n) >= eps
    )
    if heavy > eps + 1e-12:
        raise LabError(
            "mixture-bound-precondition",
            f"weight {heavy!r} of far pairs exceeds eps={eps!r}",
        )
    mix_mu = [(p, c * m) for c, a, _ in pairs if c > 0 for p, m in a.atoms]
    mix_nu = [(p, c * m) for c, _, b in pairs if c > 0 for p, m in b.atoms]
    lhs = prohorov_distance(
        DiscreteMeasure.from_pairs(mix_mu), DiscreteMeasure.from_pairs(mix_nu)
    )
    return lhs, lhs <= 2.0 * eps + 1e-9


def random_measure_bound_check(rm1, rm2, eps: float) -> tuple[float, bool]:
    """Check the random-measure stability bound on two coupled mixtures.

    The components must live on the same atom index set with the same
    weights; requires the total weight of atoms where the component laws
    are >= eps apart to be at most eps.  Returns the Prohorov distance of
    the two mean measures and whether it is <= 2*eps (+1e-9 slack).
    """
    if len(rm1.components) != len(rm2.components):
        raise LabError("atom-mismatch", "component counts differ")
    w1 = np.array([w for w, _ in rm1.components])
    w2 = np.array([w for w, _ in rm2.components])
    if np.max(np.abs(w1 - w2)) > 1e-12:
        raise LabError("atom-mismatch", "component weights differ")
    heavy = sum(
        w
        for (w, a), (_, b) in zip(rm1.components, rm2.components)
        if prohorov_distance(a, b) >= eps
    )
    if heavy > eps + 1e-12:
        raise LabError(
            "random-measure-bound-precondition",
            f"weight {heavy!r} of far atoms exceeds eps={eps!r}",
        )
    lhs = prohorov_distance(rm1.flatten(), rm2.flatten())
    return lhs, lhs <= 2.0 * eps + 1e-9
