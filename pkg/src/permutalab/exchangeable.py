"""Conditionally-i.i.d. mixture models and permuted-statistic experiments.

An :class:`ExchangeableModel` is a finite family of atoms (probability,
law); a drawn sequence first picks an atom, then draws i.i.d. values Z
from its law, perturbs each value with a two-valued noise (0, or plus or
minus ``outlier_size`` with probability ``outlier_prob``) and snaps the
result to a quantization grid.  By construction the perturbed values take
finitely many values and stay within any level eps of Z except with
probability at most ``outlier_prob <= eps``.

``bad_mass`` designates a prefix of atoms (by cumulative probability) as
the exceptional class: on those atoms the drawn values are shifted by a
unit offset, so the i.i.d. approximation deliberately fails there.  All
distribution-level checks absorb that class through its small total mass.

Atom choice, values, noise flags and noise signs are separate columns of
one counter-based stream per run, so runs are reproducible per (seed, run
index) and results never depend on chunking.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import LabError
from .framework import RegularLimitTheorem, ThinningPlan, mc_tolerance, simulate_fk
from .measures import (
    DiscreteMeasure,
    EmpiricalSample,
    MixedNormal,
    RandomMeasure,
    empirical_measure,
    measure_from_csv,
    measure_to_csv,
)
from .metrics import ks_distance, prohorov_distance, random_measure_bound_check
from .parallel import map_chunks
from .rng import Stream, derive_seed, derive_seed_vec, uniform_columns
from .sequences import Permutation, random_permutation

DEFAULT_GRID = 2.0**-20

_BAD_ATOM_SHIFT = 1.0


@dataclass(frozen=True)
class PerturbSpec:
    """Two-valued noise with decreasing target levels eps_m."""

    eps_levels: tuple[float, ...]
    outlier_prob: float
    outlier_size: float

    def __post_init__(self):
        if len(self.eps_levels) < 1:
            raise LabError("bad-perturb", "need at least one eps level")
        if any(e <= 0 for e in self.eps_levels):
            raise LabError("bad-perturb", "eps levels must be positive")
        if any(e1 > e0 for e0, e1 in zip(self.eps_levels, self.eps_levels[1:])):
            raise LabError("bad-perturb", "eps levels must be decreasing")
        if not 0.0 <= self.outlier_prob <= min(self.eps_levels):
            raise LabError("bad-perturb", "outlier probability must be <= every eps level")
        if self.outlier_size < 0:
            raise LabError("bad-perturb", "outlier size must be >= 0")


@dataclass(frozen=True)
class ExchangeableModel:
    """Finite mixture of conditionally-i.i.d. laws with optional noise."""

    atoms: tuple[tuple[float, DiscreteMeasure], ...]
    bad_mass: float = 0.0
    perturb: PerturbSpec | None = None
    grid: float = DEFAULT_GRID

    def __post_init__(self):
        if len(self.atoms) < 1:
            raise LabError("bad-model", "need at least one atom")
        probs = [p for p, _ in self.atoms]
        if any(p <= 0 for p in probs):
            raise LabError("bad-model", "atom probabilities must be positive")
        if abs(sum(probs) - 1.0) > 1e-12:
            raise LabError("bad-model", "atom probabilities must sum to 1")
        if self.bad_mass < 0:
            raise LabError("bad-model", "bad mass must be >= 0")
        if self.perturb is not None and self.bad_mass > min(self.perturb.eps_levels):
            raise LabError("bad-model", "bad mass must be <= every eps level")
        if self.grid < 0:
            raise LabError("bad-model", "grid must be >= 0")

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for p, _ in self.atoms])

    @property
    def n_bad(self) -> int:
        """Number of leading atoms in the exceptional class."""
        cum = 0.0
        n = 0
        for p, _ in self.atoms:
            if cum + p <= self.bad_mass + 1e-12:
                cum += p
                n += 1
            else:
                break
        return n

    def as_random_measure(self) -> RandomMeasure:
        return RandomMeasure(self.atoms)

    def flatten(self) -> DiscreteMeasure:
        return self.as_random_measure().flatten()

    def tail_bound(self, t: float) -> float:
        """Upper bound for sup_j P(|X_j| >= t) under this model."""
        margin = self.grid / 2.0
        if self.perturb is not None:
            margin += self.perturb.outlier_size
        if self.n_bad > 0:
            margin += _BAD_ATOM_SHIFT
        return self.flatten().tail_prob(t - margin)

    def limit_mixed_normal(self) -> MixedNormal:
        """The mixture of centered normals with the atom variances."""
        acc: dict[float, float] = {}
        for p, law in self.atoms:
            v = law.mean_var()[1]
            acc[v] = acc.get(v, 0.0) + p
        return MixedNormal(tuple(sorted(acc.items())))


@dataclass(frozen=True)
class DrawnSequence:
    """One realized run: the atom, the i.i.d. values, the observed values."""

    atom_index: int
    z: np.ndarray
    x: np.ndarray


def _quantize(values: np.ndarray, grid: float) -> np.ndarray:
    if grid <= 0.0:
        return values
    return np.round(values / grid) * grid


def _noise(model: ExchangeableModel, flags: np.ndarray, signs: np.ndarray, bad: bool):
    if bad:
        return np.full(flags.shape, _BAD_ATOM_SHIFT)
    if model.perturb is None or model.perturb.outlier_prob == 0.0:
        return np.zeros(flags.shape)
    hit = flags < model.perturb.outlier_prob
    return hit * np.where(signs < 0.5, -1.0, 1.0) * model.perturb.outlier_size


def draw_sequence(
    model: ExchangeableModel, m: int, eps_index: int, seed: int
) -> DrawnSequence:
    """Sample an atom, then m conditionally-i.i.d. perturbed values."""
    if m < 1:
        raise LabError("bad-count", "need m >= 1")
    if model.perturb is not None:
        if not 1 <= eps_index <= len(model.perturb.eps_levels):
            raise LabError("eps-level", "eps index out of range")
    stream = Stream(derive_seed(seed, "draw"))
    cum = np.cumsum(model.probs)
    atom = int(np.searchsorted(cum, stream.uniform(), side="left"))
    atom = min(atom, len(model.atoms) - 1)
    law = model.atoms[atom][1]
    z = law.quantile_many(stream.uniform_block(m))
    eta = _noise(model, stream.uniform_block(m), stream.uniform_block(m), atom < model.n_bad)
    x = _quantize(z + eta, model.grid)
    return DrawnSequence(atom, z, x)


def permuted_statistic(
    model: ExchangeableModel,
    T: RegularLimitTheorem,
    k: int,
    perm: Permutation,
    m: int,
    seed: int,
    threads: int = 1,
) -> EmpiricalSample:
    """Law of f_k over the window of the permuted drawn sequence.

    Each of the m runs draws its own atom and sequence; f_k is evaluated on
    coordinates p_k..q_k of the permuted sequence with the drawn atom's law
    as the measure argument.
    """
    p, q = T.window(k)
    if len(perm) < q:
        raise LabError("perm-size", "permutation shorter than the window end")
    length = len(perm)
    window_idx = np.array([perm.image[i - 1] - 1 for i in range(p, q + 1)])
    width = len(window_idx)
    # per-run column layout: 0 atom, 1..L values, L+1..2L flags, 2L+1..3L signs
    cols = np.concatenate(
        ([0], 1 + window_idx, 1 + length + window_idx, 1 + 2 * length + window_idx)
    )
    cum = np.cumsum(model.probs)
    n_bad = model.n_bad

    def run(start: int, count: int) -> np.ndarray:
        seeds = derive_seed_vec(seed, np.arange(start, start + count), "perm-stat")
        u = uniform_columns(seeds, cols)
        atom = np.searchsorted(cum, u[:, 0], side="left")
        atom = np.minimum(atom, len(model.atoms) - 1)
        out = np.empty(count)
        for a in range(len(model.atoms)):
            rows = atom == a
            if not rows.any():
                continue
            law = model.atoms[a][1]
            z = law.quantile_many(u[rows, 1 : 1 + width])
            eta = _noise(
                model,
                u[rows, 1 + width : 1 + 2 * width],
                u[rows, 1 + 2 * width :],
                a < n_bad,
            )
            x = _quantize(z + eta, model.grid)
            out[rows] = T.evaluate(x, law, k)
        return out

    values = map_chunks(m, run, threads)
    return EmpiricalSample(tuple(float(v) for v in values), tag=f"perm-{T.name}-k{k}", seed=seed)


@dataclass(frozen=True)
class PermutationInvarianceReport:
    """Permutation-invariance check: distances to the limit and to each other."""

    ks_to_limit: tuple[float, ...]
    max_pairwise_ks: float
    tol_limit: float
    tol_pairwise: float
    holds: bool


def permutation_invariance_check(
    model: ExchangeableModel,
    T: RegularLimitTheorem,
    k: int,
    perms: list[Permutation],
    m: int,
    seed: int,
    tol_limit: float = 0.05,
    tol_pairwise: float = 0.05,
    threads: int = 1,
) -> PermutationInvarianceReport:
    """Check that every permuted law matches the mixed-normal limit and peers."""
    if len(perms) < 2:
        raise LabError("bad-count", "need at least two permutations")
    limit = model.limit_mixed_normal()
    samples = [
        permuted_statistic(model, T, k, perm, m, derive_seed(seed, "perm-invariance", i), threads)
        for i, perm in enumerate(perms)
    ]
    empirics = [empirical_measure(s) for s in samples]
    ks_lim = tuple(ks_distance(e, limit) for e in empirics)
    pairwise = 0.0
    for i in range(len(empirics)):
        for j in range(i + 1, len(empirics)):
            pairwise = max(pairwise, ks_distance(empirics[i], empirics[j]))
    holds = all(v <= tol_limit for v in ks_lim) and pairwise <= tol_pairwise
    return PermutationInvarianceReport(ks_lim, pairwise, tol_limit, tol_pairwise, holds)


def mixture_approximation_check(
    model: ExchangeableModel,
    T: RegularLimitTheorem,
    k: int,
    plan: ThinningPlan,
    m: int,
    seed: int,
    perm: Permutation | None = None,
    threads: int = 1,
) -> tuple[float, float, bool]:
    """Distance of a permuted statistic law to the atomwise mixture law.

    lhs: Prohorov distance between the empirical law of f_k on a permuted
    drawn window and the P(A)-weighted mixture of per-atom simulated f_k
    laws.  rhs: ``3 eps_{r_k}^alpha q_k + 1/r_k`` evaluated exactly from
    the plan.  holds allows the fixed Monte Carlo slack.
    """
    r_k = plan.r_at(k)
    eps_rk = plan.eps_at(r_k)
    _, q = T.window(k)
    if plan.alpha == 1.0:
        rhs = float(3 * Fraction(eps_rk) * q + Fraction(1, r_k))
    else:
        rhs = 3.0 * eps_rk**plan.alpha * q + 1.0 / r_k
    if perm is None:
        perm = random_permutation(q, derive_seed(seed, "prop-perm"))
    emp = empirical_measure(
        permuted_statistic(model, T, k, perm, m, derive_seed(seed, "prop-x"), threads)
    )
    comps = []
    for a, (p_a, law) in enumerate(model.atoms):
        sample = simulate_fk(T, k, law, m, derive_seed(seed, "prop-mix", a), threads)
        comps.append((p_a, empirical_measure(sample)))
    mixture = RandomMeasure(tuple(comps)).flatten()
    lhs = prohorov_distance(emp, mixture)
    return lhs, rhs, lhs <= rhs + mc_tolerance(m)


def conditional_noise_check(
    model: ExchangeableModel, eps_n: float, seed: int
) -> tuple[float, bool]:
    """Exercise the noisy-conditional-law variant of the stability bound.

    Builds a coupled random measure whose component laws differ from the
    model's by less than eps_n except on atoms of total weight <= eps_n,
    then delegates to :func:`random_measure_bound_check`.
    """
    if eps_n <= 0:
        raise LabError("bad-eps", "eps_n must be positive")
    stream = Stream(derive_seed(seed, "cond-noise"))
    base = model.as_random_measure()
    noisy = []
    budget = eps_n
    for p, law in model.atoms:
        if p <= budget:
            budget -= p
            shift = 3.0 * eps_n  # a genuinely far component, allowed by its weight
        else:
            shift = eps_n * 0.4 * stream.uniform()
        noisy.append((p, DiscreteMeasure(tuple((x + shift, w) for x, w in law.atoms))))
    return random_measure_bound_check(base, RandomMeasure(tuple(noisy)), eps_n)


def strong_law_trajectory(
    model: ExchangeableModel, p: float, n: int, seed: int, eps_index: int = 1
) -> tuple[tuple[int, float], ...]:
    """Running strong-law statistic along one drawn sequence.

    p = 1: running means n^-1 sum X_k (approaches the drawn atom's mean);
    p in (0, 2) otherwise: n^(-1/p) sum (X_k - mean).  p = 2 is accepted
    as the out-of-theorem boundary; no assertion is attached to it.
    """
    if not 0.0 < p <= 2.0:
        raise LabError("bad-p", "need 0 < p <= 2")
    if n < 1:
        raise LabError("bad-count", "need N >= 1")
    drawn = draw_sequence(model, n, eps_index, seed)
    mean = model.atoms[drawn.atom_index][1].mean_var()[0]
    idx = np.arange(1, n + 1, dtype=float)
    sums = np.cumsum(drawn.x)
    if p == 1.0:
        vals = sums / idx
    else:
        vals = (sums - idx * mean) / idx ** (1.0 / p)
    return tuple((int(i), float(v)) for i, v in zip(idx, vals))


# -- model (de)serialization -------------------------------------------


def model_to_json(model: ExchangeableModel) -> str:
    obj = {
        "atoms": [
            {"prob": p, "law_csv": measure_to_csv(law)} for p, law in model.atoms
        ],
        "bad_mass": model.bad_mass,
        "perturb": None
        if model.perturb is None
        else {
            "eps": list(model.perturb.eps_levels),
            "outlier_prob": model.perturb.outlier_prob,
            "outlier_size": model.perturb.outlier_size,
        },
        "grid": model.grid,
    }
    return json.dumps(obj, indent=2)


def model_from_json(text: str) -> ExchangeableModel:
    obj = json.loads(text)
    atoms = tuple(
        (float(a["prob"]), measure_from_csv(a["law_csv"])) for a in obj["atoms"]
    )
    perturb = None
    if obj.get("perturb"):
        perturb = PerturbSpec(
            tuple(float(e) for e in obj["perturb"]["eps"]),
            float(obj["perturb"]["outlier_prob"]),
            float(obj["perturb"]["outlier_size"]),
        )
    return ExchangeableModel(
        atoms,
        float(obj.get("bad_mass", 0.0)),
        perturb,
        float(obj.get("grid", DEFAULT_GRID)),
    )
