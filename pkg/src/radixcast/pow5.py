"""Raising five to a large natural power in fixed precision.

The exponent B is split by Euclidean divisions into B = 2**n_k * q_k + ... +
2**n_1 * q_1 + q_0 with small quotients, so 5**B becomes a product of table
values 5**q_i squared n_i times each.  Every multiplication is a truncated
fixed-point multiply that drops the low `lam` bits of the double-width
product; a conditional one-bit left shift after each step keeps the running
value normalized, with the shift count tracked exactly in the binary scale.

With table entries of width `lam` the running value keeps the constant width
`lam` and every multiply has relative error in (-2**(-lam+2), 0]; starting
the chains from w-bit entries with a first shift of lam < w widens the value
to 2w - lam and gives the uniform per-step bound 2**(-2w+2+lam).
"""

from __future__ import annotations

from dataclasses import dataclass

from .fxcore import ScaledInteger, mul_trunc_norm

DEFAULT_SHIFTS = (4, 8)


@dataclass(frozen=True, slots=True)
class Decomposition:
    """B = sum(2**shifts[i] * quotients[i+1]) + quotients[0], all quotients
    sharing the range [0, 2**shifts[0] - 1]."""

    shifts: tuple[int, ...]
    quotients: tuple[int, ...]  # (q_0, q_1, ..., q_k), low to high

    def reconstruct(self) -> int:
        total = self.quotients[0]
        for n_i, q_i in zip(self.shifts, self.quotients[1:]):
            total += q_i << n_i
        return total


@dataclass(frozen=True, slots=True)
class Pow5Table:
    """Exact table of 5**q for q in [0, 2**index_bits), plus the offset
    constant 5**(-offset_power) used to shift negative exponents into the
    natural range."""

    index_bits: int
    width: int
    entries: tuple[ScaledInteger, ...]
    offset_power: int
    offset_const: ScaledInteger
    offset_inexact: bool

    def entry(self, q: int) -> ScaledInteger:
        return self.entries[q]


@dataclass(frozen=True, slots=True)
class SquareChainResult:
    value: ScaledInteger
    sigma: int           # accumulated one-bit renormalization shifts
    consumed_scale: int  # lam-scale folded in by the squarings
    inexact: bool
    mul_count: int


@dataclass(frozen=True, slots=True)
class Pow5Result:
    value: ScaledInteger
    mul_count: int       # truncated multiplies actually performed
    inexact: bool
    decomposition: Decomposition | None
    offset_used: bool
    chain_sigmas: tuple[int, ...] = ()
    final_shifts: tuple[int, ...] = ()


def decompose(b: int, shifts: tuple[int, ...] = DEFAULT_SHIFTS) -> Decomposition:
    """Euclidean-division expansion of B over the configured bit positions."""
    if b < 0:
        raise ValueError("B must be nonnegative")
    if not shifts or list(shifts) != sorted(set(shifts)):
        raise ValueError("shifts must be strictly increasing and nonempty")
    if any(n % shifts[0] for n in shifts):
        raise ValueError("shifts must be multiples of the smallest shift")
    qmax = (1 << shifts[0]) - 1
    rem = b
    high_first = []
    for n_i in reversed(shifts):
        q_i = rem >> n_i
        rem -= q_i << n_i
        high_first.append(q_i)
    quotients = (rem, *reversed(high_first))
    if any(q > qmax for q in quotients):
        raise ValueError(f"B={b} too large for shifts {shifts}")
    d = Decomposition(tuple(shifts), quotients)
    assert d.reconstruct() == b
    return d


def square_chain(v0: ScaledInteger, n: int, lam: int) -> SquareChainResult:
    """Square v0 n times, dropping lam bits of each double-width square.

    Fixed trip count, no data-dependent control flow beyond the one-bit
    renormalizing shift; the scale is tracked incrementally in exp2 and the
    sigma/consumed-scale bookkeeping of the closed-form result line is
    returned for cross-checking.
    """
    v = v0
    sigma = 0
    consumed = 0
    inexact = False
    for _ in range(n):
        v, s, step_inexact = mul_trunc_norm(v, v, lam)
        inexact |= step_inexact
        sigma = 2 * sigma + s
        consumed = 2 * consumed + lam
    return SquareChainResult(v, sigma, consumed, inexact, n)


def _one(width: int) -> ScaledInteger:
    return ScaledInteger(1 << (width - 1), -(width - 1), width)


def pow5_nat(
    b: int,
    tbl: Pow5Table,
    shifts: tuple[int, ...] = DEFAULT_SHIFTS,
    lam: int | None = None,
) -> Pow5Result:
    """5**B for natural B: per-quotient squaring chains, then the final
    multiplication pass from the largest factor down.

    Factors with q_i = 0 are the exact value 1 and are skipped without
    consuming a multiplication or an error term.
    """
    if lam is None:
        lam = tbl.width
    d = decompose(b, shifts)
    mul = 0
    inexact = False
    sigmas = []
    final_shifts = []
    acc: ScaledInteger | None = None
    for n_i, q_i in zip(reversed(d.shifts), reversed(d.quotients[1:])):
        if q_i == 0:
            continue
        chain = square_chain(tbl.entry(q_i), n_i, lam)
        mul += chain.mul_count
        inexact |= chain.inexact
        sigmas.append(chain.sigma)
        if acc is None:
            acc = chain.value
        else:
            acc, s, step_inexact = mul_trunc_norm(acc, chain.value, lam)
            mul += 1
            inexact |= step_inexact
            final_shifts.append(s)
    if d.quotients[0]:
        f0 = tbl.entry(d.quotients[0])
        if acc is None:
            acc = f0
        else:
            acc, s, step_inexact = mul_trunc_norm(acc, f0, lam)
            mul += 1
            inexact |= step_inexact
            final_shifts.append(s)
    if acc is None:
        acc = _one(tbl.width)
    return Pow5Result(
        acc, mul, inexact, d, False, tuple(sigmas), tuple(final_shifts)
    )


def pow5_signed(
    b: int,
    tbl: Pow5Table,
    shifts: tuple[int, ...] = DEFAULT_SHIFTS,
    lam: int | None = None,
) -> Pow5Result:
    """5**B for signed B: negative exponents are shifted into the natural
    range by the table's offset and compensated with the stored 5**(-offset)
    constant (one extra multiply)."""
    if b >= 0:
        return pow5_nat(b, tbl, shifts, lam)
    if lam is None:
        lam = tbl.width
    if b + tbl.offset_power < 0:
        raise ValueError(
            f"B={b} below the offset range (offset power {tbl.offset_power})"
        )
    base = pow5_nat(b + tbl.offset_power, tbl, shifts, lam)
    acc, s, step_inexact = mul_trunc_norm(base.value, tbl.offset_const, lam)
    return Pow5Result(
        acc,
        base.mul_count + 1,
        base.inexact | step_inexact | tbl.offset_inexact,
        base.decomposition,
        True,
        base.chain_sigmas,
        base.final_shifts + (s,),
    )
