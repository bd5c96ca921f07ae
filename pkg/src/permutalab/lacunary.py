"""Lacunary trigonometric sums in fixed-point arithmetic, with CLT/LIL runs.

The sample point x lives on [0, 1) as a B-bit fixed-point value, so
``n * x mod 1`` is a single integer multiply-and-mask.  When x is itself a
B-bit value (the case for all Monte Carlo draws here: uniforms are sampled
by drawing B raw bits), the reduction is exact; when x rounds an external
real, the absolute error after multiplying by n is at most
``2**-(B - ceil(log2 n))``.  A call with ``ceil(log2 n) >= B - 64`` raises
``precision-exhausted``: fewer than 64 significant fractional bits would
survive.  ``required_bits`` picks the smallest sufficient multiple of 64
for a given maximal frequency, which the Monte Carlo drivers use as their
default.

Summation order in all sums is canonicalized (frequencies sorted
ascending), so the floating-point value is exactly invariant under
permuting the summands, isolating distributional questions from float
noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import LabError
from .measures import EmpiricalSample
from .parallel import map_chunks
from .rng import GOLDEN, Stream, derive_seed, derive_seed_vec, mix64_vec
from .sequences import IndexSequence, Permutation

TWO_PI = 2.0 * math.pi
DEFAULT_BITS = 256

_U = np.uint64


def ceil_log2(n: int) -> int:
    if n < 1:
        raise LabError("bad-count", "need n >= 1")
    return (n - 1).bit_length()


def required_bits(max_n: int, floor: int = DEFAULT_BITS) -> int:
    """Smallest multiple of 64 (and >= floor) usable with frequency max_n."""
    need = ceil_log2(max_n) + 65
    return max(floor, ((need + 63) // 64) * 64)


@dataclass(frozen=True)
class FixedPointX:
    """Point of [0, 1) with ``bits`` fractional bits: x = value / 2**bits."""

    value: int
    bits: int = DEFAULT_BITS

    def __post_init__(self):
        if self.bits < 64:
            raise LabError("bad-bits", "need at least 64 fractional bits")
        if not 0 <= self.value < (1 << self.bits):
            raise LabError("bad-bits", "value outside [0, 2**bits)")

    @classmethod
    def from_fraction(cls, num: int, den: int, bits: int = DEFAULT_BITS) -> "FixedPointX":
        """Nearest fixed-point neighbor of the rational num/den in [0, 1)."""
        if den <= 0:
            raise LabError("bad-bits", "denominator must be positive")
        num %= den
        value = ((num << bits) + den // 2) // den
        return cls(value & ((1 << bits) - 1), bits)

    @classmethod
    def from_float(cls, x: float, bits: int = DEFAULT_BITS) -> "FixedPointX":
        frac = Fraction(x) % 1
        return cls.from_fraction(frac.numerator, frac.denominator, bits)

    @classmethod
    def random(cls, stream: Stream, bits: int = DEFAULT_BITS) -> "FixedPointX":
        return cls(stream.bits(bits), bits)

    def to_float(self) -> float:
        """Leading 64 bits as a double (error <= 2**-53)."""
        return float(self.value >> (self.bits - 64)) * 2.0**-64

    def to_fraction(self) -> Fraction:
        return Fraction(self.value, 1 << self.bits)


def frac_mul(x: FixedPointX, n: int) -> FixedPointX:
    """Fractional part of n*x at the same precision."""
    if n < 1:
        raise LabError("bad-count", "need n >= 1")
    if ceil_log2(n) >= x.bits - 64:
        raise LabError(
            "precision-exhausted",
            f"frequency needs {ceil_log2(n)} bits, x has only {x.bits}",
        )
    return FixedPointX((n * x.value) & ((1 << x.bits) - 1), x.bits)


def trig_sum(seq_prefix, x: FixedPointX) -> float:
    """Sum of sin(2 pi n x) over the prefix, in canonical (sorted) order."""
    total = 0.0
    for n in sorted(seq_prefix):
        total += math.sin(TWO_PI * frac_mul(x, n).to_float())
    return total


@dataclass(frozen=True)
class FourierFunction:
    """Mean-zero 1-periodic trigonometric polynomial given by coefficients."""

    cos_coeffs: tuple[float, ...] = ()
    sin_coeffs: tuple[float, ...] = ()

    def __call__(self, t: float) -> float:
        val = 0.0
        for j, a in enumerate(self.cos_coeffs, start=1):
            val += a * math.cos(TWO_PI * j * t)
        for j, b in enumerate(self.sin_coeffs, start=1):
            val += b * math.sin(TWO_PI * j * t)
        return val

    def l2_norm_sq(self) -> float:
        """Integral of f^2 over one period."""
        return 0.5 * (
            sum(a * a for a in self.cos_coeffs) + sum(b * b for b in self.sin_coeffs)
        )


def f_sum(f: FourierFunction, seq_prefix, x: FixedPointX) -> float:
    """Sum of f(n x mod 1) over the prefix, in canonical (sorted) order."""
    total = 0.0
    for n in sorted(seq_prefix):
        total += f(frac_mul(x, n).to_float())
    return total


def _assemble_xs(seed: int, start: int, count: int, words: int, bits: int) -> list[int]:
    """Fixed-point sample values for sample indices [start, start+count)."""
    seeds = derive_seed_vec(seed, np.arange(start, start + count), "clt-x")
    cols = (np.arange(1, words + 1, dtype=np.uint64)) * _U(GOLDEN)
    u = mix64_vec(seeds[:, None] + cols[None, :])
    mask = (1 << bits) - 1
    out = []
    for row in u:
        v = 0
        for w in range(words):
            v |= int(row[w]) << (64 * w)
        out.append(v & mask)
    return out


def clt_sample(
    seq: IndexSequence,
    n: int,
    m: int,
    norm: str = "sqrtN_over_2",
    perm: Permutation | None = None,
    seed: int = 0,
    bits: int | None = None,
    threads: int = 1,
) -> EmpiricalSample:
    """Monte Carlo law of the normalized trigonometric sum.

    Each of the m samples draws its own uniform x (a fresh B-bit value from
    the stream of its sample index) and evaluates
    ``sum sin(2 pi n_sigma(k) x) / norm`` over the first n terms of the
    (optionally permuted) sequence.
    """
    if n < 1 or n > len(seq):
        raise LabError("bad-count", "need 1 <= N <= len(seq)")
    if m < 1:
        raise LabError("bad-count", "need M >= 1")
    if norm == "sqrtN_over_2":
        divisor = math.sqrt(n / 2.0)
    elif norm == "sqrtN":
        divisor = math.sqrt(float(n))
    else:
        raise LabError("bad-norm", f"unknown normalization {norm!r}")
    if perm is None:
        indices = range(1, n + 1)
    else:
        if n > len(perm):
            raise LabError("perm-size", "N exceeds permutation length")
        indices = perm.image[:n]
        if max(indices) > len(seq):
            raise LabError("perm-size", "permutation reaches past the sequence")
    freqs = sorted(seq.values[i - 1] for i in indices)
    b = bits if bits is not None else required_bits(freqs[-1])
    if ceil_log2(freqs[-1]) >= b - 64:
        raise LabError("precision-exhausted", "bits too small for max frequency")
    words = (b + 63) // 64
    mask = (1 << b) - 1
    shift = b - 64

    def run(start: int, count: int) -> np.ndarray:
        xs = _assemble_xs(seed, start, count, words, b)
        acc = np.zeros(count)
        for f in freqs:
            tops = np.fromiter(
                (((f * x) & mask) >> shift for x in xs), dtype=np.float64, count=count
            )
            acc += np.sin(TWO_PI * (tops * 2.0**-64))
        return acc / divisor

    values = map_chunks(m, run, threads)
    return EmpiricalSample(tuple(float(v) for v in values), tag="clt", seed=seed)


@dataclass(frozen=True)
class LilTrajectory:
    """Running law-of-the-iterated-logarithm statistic along one sample point."""

    points: tuple[tuple[int, float], ...]
    max_value: float


def lil_trajectory(seq: IndexSequence, x: FixedPointX, n_max: int) -> LilTrajectory:
    """L_N = S_N / sqrt(N log log N) for N = 3..n_max, plus its maximum."""
    if n_max < 3:
        raise LabError("bad-count", "need N_max >= 3 for log log N")
    if n_max > len(seq):
        raise LabError("bad-count", "N_max exceeds sequence length")
    s = 0.0
    points = []
    best = -math.inf
    for k in range(1, n_max + 1):
        s += math.sin(TWO_PI * frac_mul(x, seq.values[k - 1]).to_float())
        if k >= 3:
            l_k = s / math.sqrt(k * math.log(math.log(k)))
            points.append((k, l_k))
            if l_k > best:
                best = l_k
    return LilTrajectory(tuple(points), best)
