"""Loop-less, exact output-radix exponent computation for both directions.

The binary-to-decimal exponent is F = floor(log10(2**E * m)) - p10 + 1.  With
the mantissa folded into the value's binade V = E + bitlen(m) - 1 and scaled
into [1, 4) (so floor(log10) of the mantissa part is 0), the floor decomposes
into a multiply-shift by a stored constant plus a 0/1 correction gamma decided
by one stored threshold per (halved) binade.  The decimal-to-binary direction
is symmetric with the mantissa re-encoded exactly into kappa bits.

No logarithm is ever evaluated: the constants and thresholds are certified
against the big-integer oracle at generation time, and the lookups here are
pure integer multiply/shift/compare.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fxcore import FormatParams
from .oracle import ExponentRangeError


@dataclass(frozen=True, slots=True)
class MulShiftConstant:
    """floor(E * log) via one multiply and one arithmetic right shift.

    c = floor(log_base(source) * 2**shift) for (base, source) = (10, 2) or
    (2, 10).  Certified exhaustively over [lo, hi] at generation time; the
    arithmetic (sign-propagating) shift makes the result a true floor for
    negative exponents.
    """

    rbase: int  # 10: floor(E*log10(2));  2: floor(F*log2(10))
    c: int
    shift: int
    lo: int
    hi: int

    def apply(self, e: int) -> int:
        if not self.lo <= e <= self.hi:
            raise ExponentRangeError(
                f"exponent {e} outside certified range [{self.lo}, {self.hi}]"
            )
        return (e * self.c) >> self.shift


def floor_log10_pow2(e: int, c: MulShiftConstant) -> int:
    """Exact floor(E * log10(2)) for E in the constant's certified range."""
    assert c.rbase == 10
    return c.apply(e)


def floor_log2_pow10(f: int, c: MulShiftConstant) -> int:
    """Exact floor(F * log2(10)) for F in the constant's certified range."""
    assert c.rbase == 2
    return c.apply(f)


@dataclass(frozen=True, slots=True)
class ThresholdTable:
    """Per-exponent critical mantissa values deciding the gamma correction.

    direction "b2d": indexed by the even binade exponent V' = V - (V mod 2)
    (step 2, the factor-two table reduction), thresholds on the mantissa
    scaled into [1, 4) with t = p2 + 2 fractional bits.

    direction "d2b": indexed by the decimal exponent F directly (step 1),
    thresholds on the kappa-bit re-encoded mantissa scaled into [1, 2) with
    t = kappa + 2 fractional bits.

    An entry equal to `never` (the fixed-point top of the mantissa range)
    means gamma = 0 for every representable mantissa at that exponent.
    """

    direction: str
    t: int
    start: int
    step: int
    entries: tuple[int, ...]
    mant_bits: int  # p2 for b2d, kappa for d2b

    def __post_init__(self):
        if self.direction not in ("b2d", "d2b"):
            raise ValueError("direction must be b2d or d2b")
        if self.step not in (1, 2):
            raise ValueError("step must be 1 or 2")
        if self.step == 2 and self.start % 2:
            raise ValueError("parity-halved table must start on an even exponent")

    @property
    def never(self) -> int:
        # supremum of the scaled mantissa interval: 4.0 for b2d, 2.0 for d2b
        return (4 if self.direction == "b2d" else 2) << self.t

    @property
    def stop(self) -> int:
        return self.start + self.step * (len(self.entries) - 1)

    def entry_for(self, exp: int) -> int:
        r = exp & 1 if self.step == 2 else 0
        idx = (exp - r - self.start) // self.step
        if not 0 <= idx < len(self.entries):
            raise ExponentRangeError(
                f"exponent {exp} outside table range "
                f"[{self.start}, {self.stop + self.step - 1}]"
            )
        return self.entries[idx]


def gamma(exp: int, mant: int, tbl: ThresholdTable) -> int:
    """The 0/1 carry of the two fractional parts past 1.

    `exp` is the binade exponent V for direction b2d (any mantissa bit length
    up to p2) or the decimal exponent F for d2b (any positive mantissa up to
    kappa bits).  Returns 1 exactly when the true floor-log gains one over
    the exponent-only term, i.e. when the scaled mantissa reaches the stored
    threshold.
    """
    entry = tbl.entry_for(exp)
    r = exp & 1 if tbl.step == 2 else 0
    # mant / 2**(bitlen-1) in [1,2), times 2**r, at t fractional bits
    shift = tbl.t - mant.bit_length() + 1 + r
    return 1 if (mant << shift) >= entry else 0


def gamma_split(exp: int, mant_bits: int, tbl: ThresholdTable) -> int | None:
    """Smallest `mant_bits`-bit integer mantissa with gamma = 1, or None.

    The threshold in integer-mantissa units for a fixed bit length; used by
    certification and the exhaustive verifier.
    """
    entry = tbl.entry_for(exp)
    r = exp & 1 if tbl.step == 2 else 0
    shift = tbl.t - mant_bits + 1 + r
    split = -((-entry) >> shift)  # ceil(entry / 2**shift)
    if split >= 1 << mant_bits:
        return None
    return split


def reduce_binade(v: int, m_fixed: int, p2: int) -> tuple[int, int]:
    """Fold the low bit of the binade exponent into the mantissa.

    Input: binade exponent v with mantissa fixed-point at p2-1 fractional
    bits in [1, 2).  Output (v', m') with v' even, m' in [1, 4) at p2+1
    fractional bits, and 2**v' * m' == 2**v * m exactly.
    """
    if not (1 << (p2 - 1)) <= m_fixed < (1 << p2):
        raise ValueError("mantissa must be normalized to [1, 2) at p2-1 bits")
    r = v & 1
    return v - r, m_fixed << (2 + r)


def decimal_exponent(
    e: int, m: int, fmt: FormatParams, ms: MulShiftConstant, thr: ThresholdTable
) -> int:
    """F = floor(log10(2**e * m)) - p10 + 1, exactly, for any m >= 1.

    Subnormal (short) mantissas are folded in through the binade exponent
    V = e + bitlen(m) - 1, so no separate scaling pass is needed.
    """
    if m <= 0:
        raise ValueError("mantissa must be positive")
    v = e + m.bit_length() - 1
    k = floor_log10_pow2(v - (v & 1), ms)
    return k + gamma(v, m, thr) + 1 - fmt.p10


def binary_exponent(
    f: int, n: int, fmt: FormatParams, ms: MulShiftConstant, thr: ThresholdTable
) -> int:
    """E = floor(log2(10**f * n)) - p2 + 1, exactly, for any n >= 1.

    n is re-encoded as 2**ehat * mhat with mhat of exactly kappa bits (a left
    shift, hence exact); floor(log2 mhat) = kappa - 1 is then a constant and
    one table serves the whole format.
    """
    if n <= 0:
        raise ValueError("mantissa must be positive")
    kappa = thr.mant_bits
    if n.bit_length() > kappa:
        raise ValueError(f"mantissa needs {n.bit_length()} bits, table has {kappa}")
    ehat = n.bit_length() - kappa
    j = floor_log2_pow10(f, ms)
    return j + (kappa - 1) + ehat + gamma(f, n, thr) + 1 - fmt.p2
