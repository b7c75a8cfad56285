"""Fixed-point scaled-integer arithmetic and rounding primitives.

Everything downstream works on one value shape: an unsigned mantissa of a
known bit width, normalized into [2^(w-1), 2^w), together with a signed
binary scale, so the represented real is ``mant * 2**exp2``.  All operations
are pure; values are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction


class RoundingMode(Enum):
    NEAREST_EVEN = "nearest"
    DOWN = "down"          # toward -infinity
    UP = "up"              # toward +infinity
    TOWARD_ZERO = "zero"

    @classmethod
    def from_name(cls, name: str) -> "RoundingMode":
        for mode in cls:
            if mode.value == name or mode.name.lower() == name.lower():
                return mode
        raise ValueError(f"unknown rounding mode: {name!r}")


#: Modes applied to a nonnegative magnitude.  For a negative value the
#: directed modes swap (DOWN on the value is UP on the magnitude).
def magnitude_mode(mode: RoundingMode, sign: int) -> RoundingMode:
    if sign >= 0 or mode in (RoundingMode.NEAREST_EVEN, RoundingMode.TOWARD_ZERO):
        if mode is RoundingMode.TOWARD_ZERO:
            return RoundingMode.DOWN
        return mode
    if mode is RoundingMode.DOWN:
        return RoundingMode.UP
    return RoundingMode.DOWN


@dataclass(frozen=True, slots=True)
class ScaledInteger:
    """A w-bit normalized mantissa with a binary scale: value = mant * 2**exp2."""

    mant: int
    exp2: int
    width: int

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("width must be positive")
        if not (1 << (self.width - 1)) <= self.mant < (1 << self.width):
            raise ValueError(
                f"mantissa {self.mant:#x} not normalized to {self.width} bits"
            )

    def as_fraction(self) -> Fraction:
        return Fraction(self.mant) * Fraction(2) ** self.exp2

    @classmethod
    def from_int(cls, value: int, width: int) -> "ScaledInteger":
        """Exactly embed a positive integer of at most `width` bits."""
        if value <= 0:
            raise ValueError("value must be positive")
        shift = width - value.bit_length()
        if shift < 0:
            raise ValueError(f"{value} does not fit in {width} bits exactly")
        return cls(value << shift, -shift, width)


@dataclass(frozen=True, slots=True)
class FormatParams:
    """Parameters of one conversion pairing: a binary format (p2 bits of
    mantissa, integer-mantissa exponent range [emin, emax]) against a decimal
    precision (p10 digits, exponent range [fmin, fmax]), plus the working
    precision ``w`` and truncation shift ``lam`` of the mantissa engine.
    """

    p2: int
    p10: int
    emin: int
    emax: int
    fmin: int
    fmax: int
    w: int = 128
    lam: int = 64

    def __post_init__(self):
        if self.p2 < 1 or self.p10 < 1:
            raise ValueError("precisions must be >= 1")
        if self.emin >= self.emax or self.fmin >= self.fmax:
            raise ValueError("exponent ranges must be nonempty")
        if self.lam > self.w:
            raise ValueError("lam must not exceed w")

    @property
    def work_bits(self) -> int:
        """Width of the running value in the multiplication chains.

        The first multiply takes two w-bit inputs and drops lam bits, leaving
        2w - lam; keeping that width (each later multiply drops its own input
        width) gives every step the same relative error bound 2**(-2w+2+lam).
        """
        return 2 * self.w - self.lam

    @property
    def kappa(self) -> int:
        """Bits needed to re-encode a p10-digit decimal mantissa exactly."""
        return (10**self.p10 - 1).bit_length()


# Shipped conversion pairings.  Decimal exponent bounds are the exact range
# reachable from the binary side (verified in tests against the oracle) with
# a one-unit margin for the rounding carry.
BINARY32 = FormatParams(p2=24, p10=9, emin=-149, emax=104, fmin=-54, fmax=32)
BINARY64 = FormatParams(p2=53, p10=17, emin=-1074, emax=971, fmin=-341, fmax=293)
# Decimal interchange formats converting toward the binary format of equal width.
DECIMAL32 = FormatParams(p2=24, p10=7, emin=-149, emax=104, fmin=-101, fmax=90)
DECIMAL64 = FormatParams(p2=53, p10=16, emin=-1074, emax=971, fmin=-398, fmax=369)

FORMATS = {
    "binary32": BINARY32,
    "binary64": BINARY64,
    "decimal32": DECIMAL32,
    "decimal64": DECIMAL64,
}


def normalize(mant: int, exp2: int, width: int) -> ScaledInteger:
    """Normalize an arbitrary positive integer mantissa to `width` bits.

    Bits shifted below position 0 are truncated (floor), so the result may
    be smaller than the input value by a relative error < 2**(-width+1).
    """
    if mant <= 0:
        raise ValueError("zero has no normalized form")
    shift = width - mant.bit_length()
    if shift >= 0:
        return ScaledInteger(mant << shift, exp2 - shift, width)
    return ScaledInteger(mant >> -shift, exp2 - shift, width)


def mul_trunc(a: ScaledInteger, b: ScaledInteger, lam: int) -> tuple[int, int, bool]:
    """Truncated product: v = floor(a.mant * b.mant / 2**lam).

    Returns (v, exp2, inexact).  v spans a.width + b.width - lam bits (within
    one bit); exp2 = a.exp2 + b.exp2 + lam.  The discarded low bits make the
    relative error of v * 2**exp2 against the exact product lie in
    (-2**(-(a.width + b.width) + 2 + lam), 0].
    """
    if lam < 0 or lam > min(a.width, b.width):
        raise ValueError("lam must satisfy 0 <= lam <= min(widths)")
    raw = a.mant * b.mant
    if lam == 0:
        return raw, a.exp2 + b.exp2, False
    v = raw >> lam
    return v, a.exp2 + b.exp2 + lam, (v << lam) != raw


def mul_trunc_norm(
    a: ScaledInteger, b: ScaledInteger, lam: int
) -> tuple[ScaledInteger, int, bool]:
    """mul_trunc followed by the conditional one-bit renormalizing shift.

    The product of two normalized inputs is within one bit of the top of its
    (a.width + b.width - lam)-bit range, so a single left shift restores
    normalization.  Returns (value, shift_taken, inexact); shift_taken is the
    sigma increment of the squaring algorithm.
    """
    v, e, inexact = mul_trunc(a, b, lam)
    width = a.width + b.width - lam
    s = 1 if v < (1 << (width - 1)) else 0
    return ScaledInteger(v << s, e - s, width), s, inexact


def round_integer(
    mant: int, exp2: int, mode: RoundingMode
) -> tuple[int, bool, bool]:
    """Round the exact value mant * 2**exp2 to an integer.

    Returns (q, inexact, was_tie).  mode applies to a nonnegative magnitude
    (DOWN == TOWARD_ZERO here); ties in NEAREST_EVEN pick the even integer.
    """
    if exp2 >= 0:
        return mant << exp2, False, False
    s = -exp2
    q, r = mant >> s, mant & ((1 << s) - 1)
    if r == 0:
        return q, False, False
    if mode in (RoundingMode.DOWN, RoundingMode.TOWARD_ZERO):
        return q, True, False
    if mode is RoundingMode.UP:
        return q + 1, True, False
    half = 1 << (s - 1)
    if r > half:
        return q + 1, True, False
    if r < half:
        return q, True, False
    return q + (q & 1), True, True


def round_scaled(
    value: ScaledInteger, target: int, radix: int, mode: RoundingMode
) -> tuple[int, bool, bool]:
    """Round a normalized value to `target` digits in `radix` (2 or 10).

    The value must round into [radix**(target-1), radix**target]; hitting the
    top renormalizes to radix**(target-1) and reports carry=True, in which
    case the caller increments the output exponent.  Returns
    (mant, carry, inexact).
    """
    if radix not in (2, 10):
        raise ValueError("radix must be 2 or 10")
    if target < 1:
        raise ValueError("target must be >= 1")
    q, inexact, _ = round_integer(value.mant, value.exp2, mode)
    lo, hi = radix ** (target - 1), radix**target
    if q == hi:
        return lo, True, inexact
    if not lo <= q < hi:
        raise ValueError(
            f"value rounds to {q}, outside the {target}-digit radix-{radix} range"
        )
    return q, False, inexact
