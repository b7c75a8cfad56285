"""End-to-end two-step radix conversions with rounding-mode support.

The pipeline per direction: the output exponent comes exactly from the
table-driven step, then the mantissa is assembled as one truncated multiply
of the input mantissa with the power-of-five engine value, and rounded.

All truncations along the chain are floors, so the computed mantissa is a
one-sided underestimate of the exact one.  Rounding therefore works on the
interval (computed, computed * (1 + budget)]: when no rounding boundary lies
inside, the decision is certain; when one does, it is resolved exactly if
the interval is provably narrower than the smallest possible nonzero gap
between the exact value and a boundary (an integer certificate computed per
conversion), and flagged uncertain otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache

from . import exponent as expmod
from .fxcore import (
    FormatParams,
    RoundingMode,
    ScaledInteger,
    magnitude_mode,
    mul_trunc,
)
from .oracle import ConversionOverflow, ConversionUnderflow, ceil_div
from .pow5 import DEFAULT_SHIFTS, pow5_signed
from .tablegen import TableSet


class Special(Enum):
    FINITE = "finite"
    ZERO = "zero"
    INF = "inf"
    NAN = "nan"


class Status(Enum):
    EXACT = "exact"
    INEXACT = "inexact"
    UNCERTAIN = "uncertain"


@dataclass(frozen=True, slots=True)
class BinaryFP:
    """sign * 2**e * m with integer mantissa; subnormals carry short m."""

    sign: int
    e: int
    m: int
    special: Special = Special.FINITE

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.special is Special.FINITE and self.m <= 0:
            raise ValueError("finite mantissa must be positive")


@dataclass(frozen=True, slots=True)
class DecimalFP:
    """sign * 10**f * n with integer mantissa."""

    sign: int
    f: int
    n: int
    special: Special = Special.FINITE

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        if self.special is Special.FINITE and self.n <= 0:
            raise ValueError("finite mantissa must be positive")


@dataclass(frozen=True, slots=True)
class ConversionResult:
    output: object  # BinaryFP or DecimalFP
    status: Status
    error_budget: Fraction


# ---------------------------------------------------------------------------
# IEEE interchange codecs


def _decode(bits: int, ebits: int, fbits: int) -> BinaryFP:
    sign = -1 if bits >> (ebits + fbits) & 1 else 1
    eb = (bits >> fbits) & ((1 << ebits) - 1)
    frac = bits & ((1 << fbits) - 1)
    bias = (1 << (ebits - 1)) - 1
    if eb == (1 << ebits) - 1:
        return BinaryFP(sign, 0, 0, Special.NAN if frac else Special.INF)
    if eb == 0:
        if frac == 0:
            return BinaryFP(sign, 0, 0, Special.ZERO)
        return BinaryFP(sign, 1 - bias - fbits, frac)
    return BinaryFP(sign, eb - bias - fbits, (1 << fbits) | frac)


def _encode(x: BinaryFP, ebits: int, fbits: int) -> int:
    sbit = (0 if x.sign > 0 else 1) << (ebits + fbits)
    bias = (1 << (ebits - 1)) - 1
    if x.special is Special.NAN:
        return sbit | (((1 << ebits) - 1) << fbits) | (1 << (fbits - 1))
    if x.special is Special.INF:
        return sbit | (((1 << ebits) - 1) << fbits)
    if x.special is Special.ZERO:
        return sbit
    emin = 1 - bias - fbits
    if x.m < (1 << fbits):
        if x.e != emin:
            raise ValueError("short mantissa only representable at emin")
        return sbit | x.m
    if x.m >= (1 << (fbits + 1)):
        raise ValueError("mantissa too wide for format")
    eb = x.e + bias + fbits
    if not 1 <= eb <= (1 << ebits) - 2:
        raise ConversionOverflow(x.e, (1 << ebits) - 2 - bias - fbits)
    return sbit | (eb << fbits) | (x.m - (1 << fbits))


def decode_binary32(bits: int) -> BinaryFP:
    return _decode(bits, 8, 23)


def encode_binary32(x: BinaryFP) -> int:
    return _encode(x, 8, 23)


def decode_binary64(bits: int) -> BinaryFP:
    return _decode(bits, 11, 52)


def encode_binary64(x: BinaryFP) -> int:
    return _encode(x, 11, 52)


# ---------------------------------------------------------------------------
# Window rounding


def window_width(budget_n: int, work_bits: int, eps_den_log2: int) -> int:
    """Integer W with true <= computed * (1 + W / 2**work_bits) guaranteed,
    for a chain of budget_n truncated multiplies with per-step relative error
    below 2**-eps_den_log2.  Constant per conversion class."""
    eps = Fraction(1, 1 << eps_den_log2)
    bound = (1 + eps) ** budget_n - 1
    rel = bound / (1 - bound)  # computed*(1+rel) >= computed/(1-bound) >= true
    return ceil_div(rel.numerator << work_bits, rel.denominator)


def _round_window(
    v: int,
    scale: int,
    mode: RoundingMode,
    chain_inexact: bool,
    wnum: int,
    gap_ok: bool,
) -> tuple[int, Status]:
    """Round the true value known to lie in (v, v + wnum] * 2**-scale (or to
    equal v * 2**-scale when the chain was exact) to an integer.

    mode applies to a magnitude.  Returns (q, status); status UNCERTAIN means
    a rounding boundary fell inside the window and gap_ok could not certify
    snapping to it.
    """
    if scale < 1:
        v <<= 1 - scale
        wnum <<= 1 - scale
        scale = 1
    q, r = v >> scale, v & ((1 << scale) - 1)
    half = 1 << (scale - 1)
    if not chain_inexact:
        if r == 0:
            return q, Status.EXACT
        if mode is RoundingMode.DOWN:
            return q, Status.INEXACT
        if mode is RoundingMode.UP:
            return q + 1, Status.INEXACT
        if r > half:
            return q + 1, Status.INEXACT
        if r < half:
            return q, Status.INEXACT
        return q + (q & 1), Status.INEXACT
    if wnum >= half:
        # window sanity: never triggered by the shipped precisions
        return q, Status.UNCERTAIN
    boundary = (r // half + 1) * half  # smallest half-grid point above r
    if boundary <= r + wnum:
        if gap_ok:
            # exact value sits on the boundary: resolve as an exact case
            if boundary == half:
                if mode is RoundingMode.DOWN:
                    return q, Status.INEXACT
                if mode is RoundingMode.UP:
                    return q + 1, Status.INEXACT
                return q + (q & 1), Status.INEXACT  # true tie
            return q + 1, Status.EXACT  # true value is the integer q + 1
        guess = q if mode is RoundingMode.DOWN or (
            mode is RoundingMode.NEAREST_EVEN and r < half
        ) else q + 1
        return guess, Status.UNCERTAIN
    # no boundary inside the window: the true value shares q and the side
    # of the halfway point with v, and cannot be an integer or a tie
    if mode is RoundingMode.DOWN:
        return q, Status.INEXACT
    if mode is RoundingMode.UP:
        return q + 1, Status.INEXACT
    return (q + 1 if r >= half else q), Status.INEXACT


def _gap_certificate(wnum: int, scale: int, pow5_exp: int, shift_exp: int) -> bool:
    """True when any nonzero distance from the exact mantissa to a half-grid
    point exceeds the window width, i.e. wnum * 2**-scale < 1 / (2 * 5**a * 2**b)
    with a = max(pow5_exp, 0), b = max(shift_exp, 0)."""
    a, b = max(pow5_exp, 0), max(shift_exp, 0)
    d = 5**a
    # wnum * d * 2**(b+1) < 2**scale, with a cheap bit-length screen first
    lhs_bits = wnum.bit_length() + d.bit_length() + b + 1
    if lhs_bits < scale:
        return True
    if lhs_bits > scale + 1:
        return False
    return (wnum * d) << (b + 1) < (1 << scale)


# ---------------------------------------------------------------------------
# Default tables


@lru_cache(maxsize=1)
def default_tables() -> TableSet:
    import importlib.resources as res
    import os

    from .tablegen import deserialize

    path = os.environ.get("RDX_TABLE_PATH")
    if path:
        with open(path, "rb") as fh:
            return deserialize(fh.read())
    data = res.files("radixcast").joinpath("tables/standard.rdx").read_bytes()
    return deserialize(data)


# ---------------------------------------------------------------------------
# Conversions


def _budget(n_err: int, fmt: FormatParams) -> Fraction:
    eps = Fraction(1, 1 << (2 * fmt.w - 2 - fmt.lam))
    return (1 + eps) ** n_err - 1


def bin_to_dec(
    x: BinaryFP,
    fmt: FormatParams,
    mode: RoundingMode = RoundingMode.NEAREST_EVEN,
    tables: TableSet | None = None,
) -> ConversionResult:
    """Convert sign * 2**e * m to the p10-digit decimal (sign, F, n)."""
    ts = tables or default_tables()
    if x.special is not Special.FINITE:
        return ConversionResult(
            DecimalFP(x.sign, 0, 0, x.special), Status.EXACT, Fraction(0)
        )
    mmode = magnitude_mode(mode, x.sign)
    thr = ts.threshold_b2d(fmt.p2)
    f = expmod.decimal_exponent(x.e, x.m, fmt, ts.mulshift(10), thr)
    subnormal_out = f < fmt.fmin
    if subnormal_out:
        f = fmt.fmin
    work = 2 * fmt.w - fmt.lam
    p5 = pow5_signed(-f, ts.pow5, DEFAULT_SHIFTS, work)
    m_s = ScaledInteger.from_int(x.m, work)
    v, e2, mul_inexact = mul_trunc(m_s, p5.value, work)
    scale = -(e2 + x.e - f)
    n_err = p5.mul_count + 1 + (1 if p5.offset_used else 0)
    wnum = window_width(n_err, work, 2 * fmt.w - 2 - fmt.lam)
    chain_inexact = p5.inexact or mul_inexact
    gap_ok = _gap_certificate(wnum, scale, f, f - x.e)
    n, status = _round_window(v, scale, mmode, chain_inexact, wnum, gap_ok)
    if n == 10**fmt.p10:
        n = 10 ** (fmt.p10 - 1)
        f += 1
    if n == 0:
        raise ConversionUnderflow()
    if f > fmt.fmax:
        raise ConversionOverflow(f, fmt.fmax)
    if not subnormal_out:
        assert 10 ** (fmt.p10 - 1) <= n < 10**fmt.p10
    return ConversionResult(
        DecimalFP(x.sign, f, n), status, _budget(n_err, fmt)
    )


def dec_to_bin(
    x: DecimalFP,
    fmt: FormatParams,
    mode: RoundingMode = RoundingMode.NEAREST_EVEN,
    tables: TableSet | None = None,
) -> ConversionResult:
    """Convert sign * 10**f * n to the p2-bit binary (sign, E, m).

    Values below the normal range round on the fixed 2**emin grid
    (subnormal output); total underflow and exponent overflow raise.
    """
    ts = tables or default_tables()
    if x.special is not Special.FINITE:
        return ConversionResult(
            BinaryFP(x.sign, 0, 0, x.special), Status.EXACT, Fraction(0)
        )
    mmode = magnitude_mode(mode, x.sign)
    thr = ts.threshold_d2b(fmt.p10)
    e = expmod.binary_exponent(x.f, x.n, fmt, ts.mulshift(2), thr)
    subnormal_out = e < fmt.emin
    if subnormal_out:
        e = fmt.emin
    if e > fmt.emax:
        raise ConversionOverflow(e, fmt.emax)
    work = 2 * fmt.w - fmt.lam
    p5 = pow5_signed(x.f, ts.pow5, DEFAULT_SHIFTS, work)
    n_s = ScaledInteger.from_int(x.n, work)
    v, e2, mul_inexact = mul_trunc(n_s, p5.value, work)
    scale = -(e2 + x.f - e)
    n_err = p5.mul_count + 1 + (1 if p5.offset_used else 0)
    wnum = window_width(n_err, work, 2 * fmt.w - 2 - fmt.lam)
    chain_inexact = p5.inexact or mul_inexact
    gap_ok = _gap_certificate(wnum, scale, -x.f, e - x.f)
    m, status = _round_window(v, scale, mmode, chain_inexact, wnum, gap_ok)
    if m == 1 << fmt.p2:
        m = 1 << (fmt.p2 - 1)
        e += 1
    if m == 0:
        raise ConversionUnderflow()
    if e > fmt.emax:
        raise ConversionOverflow(e, fmt.emax)
    if not subnormal_out:
        assert (1 << (fmt.p2 - 1)) <= m < (1 << fmt.p2)
    return ConversionResult(
        BinaryFP(x.sign, e, m), status, _budget(n_err, fmt)
    )
