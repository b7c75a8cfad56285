"""Exact reference implementation of everything the fast path approximates.

All results here are produced by arbitrary-precision integer comparisons and
divisions; no floating point participates in any returned value.  The code is
deliberately slow and simple (schoolbook) so it can be trusted as the oracle
for table generation and for the acceptance suites.  It shares nothing with
the fast path except the value types.
"""

from __future__ import annotations

from .fxcore import RoundingMode, ScaledInteger, FormatParams

# floor(log10(2) * 10**20), used only to seed the verify-and-adjust loops
# below; every returned floor is established by integer comparison.
_LOG10_2_SCALED = 30102999566398119521
_POW5_CAP = 10**6


class ExponentRangeError(ValueError):
    """An exponent fell outside a table's certified range."""


class ConversionOverflow(ArithmeticError):
    def __init__(self, exponent, limit):
        super().__init__(f"output exponent {exponent} exceeds format limit {limit}")
        self.exponent = exponent
        self.limit = limit


class ConversionUnderflow(ArithmeticError):
    def __init__(self, detail="value rounds below the smallest representable"):
        super().__init__(detail)


def ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


def _cmp_pow(base: int, d: int, e: int, m: int) -> bool:
    """True iff base**d <= 2**e * m (base=10) or <= 10**e * m (base=2)."""
    lhs, rhs = 1, m
    if base == 10:
        if e >= 0:
            rhs <<= e
        else:
            lhs <<= -e
    else:
        if e >= 0:
            rhs *= 10**e
        else:
            lhs *= 10**-e
    if d >= 0:
        lhs *= base**d
    else:
        rhs *= base**-d
    return lhs <= rhs


def exact_floor_log(base: int, exponent: int, mantissa: int) -> int:
    """Exact floor(log10(2**E * m)) for base 10, floor(log2(10**F * n)) for base 2.

    The integer estimate below is only a starting point; the result is pinned
    by big-integer comparisons against powers of the base.
    """
    if base not in (2, 10):
        raise ValueError("base must be 2 or 10")
    if mantissa <= 0:
        raise ValueError("mantissa must be positive")
    if base == 2:
        if exponent >= 0:
            return (10**exponent * mantissa).bit_length() - 1
        # floor(log2 m) - F*log2(10) estimate; log2(10) = 1/log10(2)
        d = mantissa.bit_length() - 1 + (exponent * 10**20) // _LOG10_2_SCALED
    else:
        d = ((exponent + mantissa.bit_length() - 1) * _LOG10_2_SCALED) // 10**20
    # establish base**d <= value < base**(d+1) exactly
    for _ in range(64):
        if not _cmp_pow(base, d, exponent, mantissa):
            d -= 1
        elif _cmp_pow(base, d + 1, exponent, mantissa):
            d += 1
        else:
            return d
    raise AssertionError("floor-log estimate failed to converge")


def exact_pow5(b: int, width: int) -> tuple[ScaledInteger, bool]:
    """Leading `width` bits of 5**b, truncated toward zero.

    Returns (value, inexact).  When inexact is set the discarded part is
    positive, so the returned value is strictly below 5**b.
    """
    if abs(b) > _POW5_CAP:
        raise ValueError(f"|b| exceeds sanity cap {_POW5_CAP}")
    if b >= 0:
        v = 5**b
        bl = v.bit_length()
        if bl <= width:
            return ScaledInteger(v << (width - bl), bl - width, width), False
        cut = bl - width
        return ScaledInteger(v >> cut, cut, width), (v >> cut) << cut != v
    d = 5**-b
    s = width + d.bit_length() - 1
    mant = (1 << s) // d
    return ScaledInteger(mant, -s, width), mant * d != (1 << s)


def _round_quotient(
    num: int, den: int, mode: RoundingMode
) -> tuple[int, bool]:
    """Round num/den (both positive) to an integer; mode acts on a magnitude."""
    q, r = divmod(num, den)
    if r == 0:
        return q, False
    if mode in (RoundingMode.DOWN, RoundingMode.TOWARD_ZERO):
        return q, True
    if mode is RoundingMode.UP:
        return q + 1, True
    twice = 2 * r
    if twice > den:
        return q + 1, True
    if twice < den:
        return q, True
    return q + (q & 1), True


def exact_bin_to_dec(
    e: int, m: int, fmt: FormatParams, mode: RoundingMode
) -> tuple[int, int, bool]:
    """Correctly round 2**e * m to a p10-digit decimal (F, n, inexact).

    mode must already be mapped onto the magnitude.  Decimal exponents below
    fmt.fmin round on the fixed 10**fmin grid (subnormal-style output).
    """
    if m <= 0:
        raise ValueError("mantissa must be positive")
    f = exact_floor_log(10, e, m) - fmt.p10 + 1
    subnormal = f < fmt.fmin
    if subnormal:
        f = fmt.fmin
    num, den = m, 1
    if e - f >= 0:
        num <<= e - f
    else:
        den <<= f - e
    if f >= 0:
        den *= 5**f
    else:
        num *= 5**-f
    n, inexact = _round_quotient(num, den, mode)
    if n == 10**fmt.p10:
        n = 10 ** (fmt.p10 - 1)
        f += 1
    if n == 0:
        raise ConversionUnderflow()
    if f > fmt.fmax:
        raise ConversionOverflow(f, fmt.fmax)
    if not subnormal:
        assert 10 ** (fmt.p10 - 1) <= n < 10**fmt.p10
    return f, n, inexact


def exact_dec_to_bin(
    f: int, n: int, fmt: FormatParams, mode: RoundingMode
) -> tuple[int, int, bool]:
    """Correctly round 10**f * n to a p2-bit binary (E, m, inexact).

    Outputs below the normal range round on the fixed 2**emin grid
    (subnormals); rounding to zero raises ConversionUnderflow.
    """
    if n <= 0:
        raise ValueError("mantissa must be positive")
    e = exact_floor_log(2, f, n) - fmt.p2 + 1
    if e < fmt.emin:
        e = fmt.emin
    num, den = n, 1
    if f - e >= 0:
        num <<= f - e
    else:
        den <<= e - f
    if f >= 0:
        num *= 5**f
    else:
        den *= 5**-f
    m, inexact = _round_quotient(num, den, mode)
    if m == 1 << fmt.p2:
        m = 1 << (fmt.p2 - 1)
        e += 1
    if m == 0:
        raise ConversionUnderflow()
    if e > fmt.emax:
        raise ConversionOverflow(e, fmt.emax)
    return e, m, inexact


def exact_convert(
    direction: str,
    exponent: int,
    mantissa: int,
    fmt: FormatParams,
    mode: RoundingMode = RoundingMode.NEAREST_EVEN,
) -> tuple[int, int, bool]:
    """Dispatch: direction "b2d" converts 2**E*m, "d2b" converts 10**F*n."""
    if direction == "b2d":
        return exact_bin_to_dec(exponent, mantissa, fmt, mode)
    if direction == "d2b":
        return exact_dec_to_bin(exponent, mantissa, fmt, mode)
    raise ValueError(f"unknown direction {direction!r}")
