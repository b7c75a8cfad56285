"""Error model of the truncated multiplication chains, and the accuracy
experiment reproducing the precision sweep.

Per truncated multiply of two p-bit values with a lam-bit shift the relative
error lies in (-2**(-2p+2+lam), 0]; a chain of N such steps stays within
|prod(1+eps_i) - 1| <= (1+eps_bar)**N - 1.  Everything here is evaluated in
exact rational arithmetic so the bounds are rigorous, not floating-point
approximations.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction

from .oracle import exact_pow5
from .pow5 import Decomposition, pow5_nat
from .tablegen import gen_pow5_table


def eps_bar(w: int, lam: int) -> Fraction:
    """Per-multiplication relative error bound 2**(-2w+2+lam), exactly."""
    if lam > w:
        raise ValueError("lam must not exceed w")
    return Fraction(1, 1 << (2 * w - 2 - lam))


def total_bound(n: int, eps: Fraction) -> Fraction:
    """(1 + eps)**n - 1 in exact rationals (a true upper bound)."""
    if n < 1 or not 0 <= eps < 1:
        raise ValueError("need n >= 1 and 0 <= eps < 1")
    return (1 + eps) ** n - 1


@dataclass(frozen=True, slots=True)
class ErrorBudget:
    w: int
    lam: int
    n: int
    eps: Fraction
    total: Fraction

    @classmethod
    def build(cls, w: int, lam: int, n: int) -> "ErrorBudget":
        eps = eps_bar(w, lam)
        total = total_bound(n, eps)
        assert total >= n * eps
        assert total < 1
        return cls(w, lam, n, eps, total)


def mult_count(d: Decomposition, signed_offset: bool = False) -> int:
    """Truncated multiplies the engine performs for this decomposition.

    Sum of the squaring counts over nonzero quotients, plus one multiply per
    final-pass factor beyond the first, plus one for the offset constant.
    With every quotient nonzero this is the familiar sum(n_i) + k.
    """
    used = [n for n, q in zip(d.shifts, d.quotients[1:]) if q > 0]
    factors = len(used) + (1 if d.quotients[0] > 0 else 0)
    return sum(used) + max(factors - 1, 0) + (1 if signed_offset else 0)


def lemma_violations(
    trials: int, n_max: int, eps_log2: int, seed: int = 0
) -> int:
    """Count violations of |prod(1+eps_i) - 1| <= (1+eps_bar)**N - 1 over
    random eps_i in [-eps_bar, eps_bar], eps_bar = 2**-eps_log2.

    Exact check: with eps_i = e_i * 2**-K on a dyadic grid the inequality
    becomes one between integers.
    """
    rng = random.Random(seed)
    grid = 30  # e_i in [-2**grid, 2**grid], K = eps_log2 + grid
    k = eps_log2 + grid
    ebar = 1 << grid
    violations = 0
    for _ in range(trials):
        n = rng.randint(3, n_max)
        prod = 1
        for _ in range(n):
            prod *= (1 << k) + rng.randint(-ebar, ebar)
        centre = 1 << (k * n)
        bound = ((1 << k) + ebar) ** n - centre
        if abs(prod - centre) > bound:
            violations += 1
    return violations


def rel_error(mant: int, exp2: int, b: int) -> Fraction:
    """Exact |mant * 2**exp2 / 5**b - 1|."""
    val = Fraction(mant) * Fraction(2) ** exp2
    return abs(val / 5**b - 1)


def frac_log2(x: Fraction) -> float:
    """log2 of a positive rational, safe for huge numerators/denominators."""
    if x == 0:
        return float("-inf")
    num, den = x.numerator, x.denominator
    shift = num.bit_length() - den.bit_length()
    if shift > 0:
        den <<= shift
    else:
        num <<= -shift
    # num/den now in [0.5, 2); the float division is safe at this scale
    return shift + math.log2(num / den)


SWEEP_HEADER = "w,t,lambda,max_rel_err_log2,bound_log2"


def sweep(
    w_list=(64, 96, 128, 160),
    t_list=(3, 4, 5),
    b_range=range(0, 512),
    lam: int | None = None,
) -> list[dict]:
    """Measure max |pow5(B)/5**B - 1| over b_range for each working precision
    and table index size, next to the rigorous chain bound.

    By default each multiply truncates back to the working precision
    (lam = w), which is what makes accuracy scale linearly with w; lam = 0
    disables truncation entirely (exact, growing-width chains).
    """
    rows = []
    for w in w_list:
        for t in t_list:
            tbl = gen_pow5_table(t, w, 0)
            shifts = (t, 2 * t)
            lam_row = w if lam is None else lam
            n_max = 3 * t + 2
            bound = total_bound(n_max, eps_bar(w, lam_row) if lam_row else Fraction(0))
            worst = Fraction(0)
            for b in b_range:
                r = pow5_nat(b, tbl, shifts, lam_row)
                err = rel_error(r.value.mant, r.value.exp2, b)
                if err > worst:
                    worst = err
            rows.append(
                {
                    "w": w,
                    "t": t,
                    "lambda": lam_row,
                    "max_rel_err": worst,
                    "bound": bound,
                    "max_rel_err_log2": _frac_log2(worst) if worst else float("-inf"),
                    "bound_log2": _frac_log2(bound) if bound else float("-inf"),
                }
            )
    return rows


def sweep_csv(rows: list[dict]) -> str:
    lines = [SWEEP_HEADER]
    for r in rows:
        lines.append(
            f"{r['w']},{r['t']},{r['lambda']},"
            f"{r['max_rel_err_log2']:.4f},{r['bound_log2']:.4f}"
        )
    return "\n".join(lines) + "\n"


def slope_bits_per_bit(rows: list[dict], t: int = 4) -> float:
    """Least-squares slope of -log2(max_rel_err) against w at fixed t."""
    pts = [
        (r["w"], -r["max_rel_err_log2"]) for r in rows if r["t"] == t
    ]
    if len(pts) < 2:
        raise ValueError("need at least two sweep rows at this t")
    n = len(pts)
    sx = sum(p[0] for p in pts)
    sy = sum(p[1] for p in pts)
    sxx = sum(p[0] * p[0] for p in pts)
    sxy = sum(p[0] * p[1] for p in pts)
    return (n * sxy - sx * sy) / (n * sxx - sx * sx)
