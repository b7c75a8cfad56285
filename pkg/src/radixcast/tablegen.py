"""Generation, certification, serialization and reporting of lookup tables.

Every table is certified against the big-integer oracle while it is being
generated: threshold entries are checked at the two representable mantissas
straddling each threshold (plus the grid ends), and multiply-shift constants
are checked exhaustively over their exponent range.  The serialized file
carries a checksum over all preceding bytes, so a table that loads is a table
that was certified.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

from .exponent import MulShiftConstant, ThresholdTable, gamma, gamma_split
from .fxcore import (
    BINARY32,
    BINARY64,
    DECIMAL32,
    DECIMAL64,
    FormatParams,
    ScaledInteger,
)
from .oracle import ceil_div, exact_floor_log, exact_pow5
from .pow5 import Pow5Table

MAGIC = b"RDXTBL01"

_KIND_THRESHOLD = 1
_KIND_MULSHIFT = 2
_KIND_POW5 = 3


class TableGenError(ValueError):
    """A generated entry failed oracle certification or a size constraint."""


class TableFileError(ValueError):
    """A serialized table file is structurally invalid or corrupted."""


def _cmp_pow10_pow2(a: int, b: int) -> int:
    """Sign of 10**a - 2**b, exactly, for any signed a, b."""
    lhs = 10 ** max(a, 0) << max(-b, 0)
    rhs = 10 ** max(-a, 0) << max(b, 0)
    return (lhs > rhs) - (lhs < rhs)


# ---------------------------------------------------------------------------
# Threshold tables


def _oracle_gamma_b2d(v: int, bits: int, m: int) -> int:
    """Exact gamma for value binade v and integer mantissa m of `bits` bits."""
    g = exact_floor_log(10, v - bits + 1, m) - exact_floor_log(10, v - (v & 1), 1)
    if g not in (0, 1):
        raise TableGenError(f"oracle gamma {g} out of {{0,1}} at binade {v}")
    return g


def _oracle_gamma_d2b(f: int, n: int) -> int:
    g = exact_floor_log(2, f, n) - exact_floor_log(2, f, 1) - n.bit_length() + 1
    if g not in (0, 1):
        raise TableGenError(f"oracle gamma {g} out of {{0,1}} at exponent {f}")
    return g


def _certify_entry(tbl: ThresholdTable, exp: int, bits: int, oracle_gamma) -> None:
    """Check gamma() against the oracle at the mantissas straddling the
    threshold and at both ends of the representable grid."""
    lo, hi = 1 << (bits - 1), (1 << bits) - 1
    probes = {lo, hi}
    split = gamma_split(exp, bits, tbl)
    if split is not None:
        probes.update(m for m in (split - 1, split) if lo <= m <= hi)
    for m in probes:
        if gamma(exp, m, tbl) != oracle_gamma(exp, bits, m):
            raise TableGenError(
                f"threshold certification failed at exponent {exp}, mantissa {m}"
            )


def gen_threshold_b2d(
    p2: int, v_lo: int, v_hi: int, grid_emin: int | None = None
) -> ThresholdTable:
    """Thresholds m*(V') for the binary-to-decimal direction.

    Indexed by the even binade exponent V' (two binades per entry); an entry
    is ceil(m* * 2**t) with t = p2 + 2 so the inclusive integer compare in
    gamma() is equivalent to the real compare against m* = 10**(k+1) / 2**V'.
    `grid_emin` is the smallest integer-mantissa exponent of the format;
    binades only reachable by short (subnormal) mantissas are certified on
    their actual grid.
    """
    t = p2 + 2
    start = v_lo - (v_lo & 1)
    stop = v_hi - (v_hi & 1)
    entries = []
    for v2 in range(start, stop + 1, 2):
        k = exact_floor_log(10, v2, 1)
        if _cmp_pow10_pow2(k + 1, v2 + 2) >= 0:  # m* >= 4: unreachable in [1,4)
            entries.append(4 << t)
        else:
            num = 10 ** max(k + 1, 0) << max(t - v2, 0)
            den = 10 ** max(-(k + 1), 0) << max(v2 - t, 0)
            entries.append(ceil_div(num, den))
    tbl = ThresholdTable("b2d", t, start, 2, tuple(entries), p2)
    for v in range(v_lo, v_hi + 1):
        bits = p2 if grid_emin is None else min(p2, v - grid_emin + 1)
        _certify_entry(tbl, v, bits, lambda e, b, m: _oracle_gamma_b2d(e, b, m))
    return tbl


def gen_threshold_d2b(p10: int, f_lo: int, f_hi: int) -> ThresholdTable:
    """Thresholds for the decimal-to-binary direction, one entry per decimal
    exponent F, on the kappa-bit re-encoded mantissa grid."""
    kappa = (10**p10 - 1).bit_length()
    t = kappa + 2
    entries = []
    for f in range(f_lo, f_hi + 1):
        j = exact_floor_log(2, f, 1)
        # m* scaled into [1,2]: threshold = ceil(2**(j+t+1) / 10**f)
        num = 1 << max(j + t + 1, 0)
        num *= 10 ** max(-f, 0)
        den = 10 ** max(f, 0) << max(-(j + t + 1), 0)
        entry = ceil_div(num, den)
        if entry > 2 << t:
            raise TableGenError(f"threshold above mantissa range at F={f}")
        entries.append(entry)
    tbl = ThresholdTable("d2b", t, f_lo, 1, tuple(entries), kappa)
    for f in range(f_lo, f_hi + 1):
        _certify_entry(tbl, f, kappa, lambda e, b, m: _oracle_gamma_d2b(e, m))
    return tbl


# ---------------------------------------------------------------------------
# Multiply-shift constants


def gen_mulshift(rbase: int, lo: int, hi: int, shift_cap: int = 26) -> MulShiftConstant:
    """Smallest shift L whose constant floor(log * 2**L) reproduces the exact
    floor over every exponent in [lo, hi] (checked exhaustively)."""
    if rbase not in (2, 10):
        raise ValueError("rbase must be 2 or 10")
    floors = {e: exact_floor_log(rbase, e, 1) for e in range(lo, hi + 1)}
    for shift in range(1, shift_cap + 1):
        # floor(log10(2)*2**L) = floor(log10(2**(2**L))); same for base 2.
        c = exact_floor_log(rbase, 1 << shift, 1)
        if all((e * c) >> shift == floors[e] for e in range(lo, hi + 1)):
            return MulShiftConstant(rbase, c, shift, lo, hi)
    raise TableGenError(
        f"no certified shift <= {shift_cap} for rbase={rbase} over [{lo}, {hi}]"
    )


# ---------------------------------------------------------------------------
# Power-of-five table


def gen_pow5_table(index_bits: int, width: int, offset_power: int) -> Pow5Table:
    """Exact 5**q entries for q < 2**index_bits, normalized to `width` bits,
    plus the leading bits of 5**(-offset_power)."""
    if index_bits < 1:
        raise ValueError("index_bits must be >= 1")
    top = 5 ** ((1 << index_bits) - 1)
    if top.bit_length() > width:
        raise TableGenError(
            f"width {width} too small for exact 5**{(1 << index_bits) - 1} "
            f"({top.bit_length()} bits)"
        )
    entries = tuple(
        ScaledInteger.from_int(5**q, width) for q in range(1 << index_bits)
    )
    offset_const, offset_inexact = exact_pow5(-offset_power, width)
    return Pow5Table(
        index_bits, width, entries, offset_power, offset_const, offset_inexact
    )


# ---------------------------------------------------------------------------
# Table set and standard generation


@dataclass
class TableSet:
    """All tables one process needs, keyed the way conversions look them up."""

    thresholds_b2d: dict[int, ThresholdTable]  # by p2
    thresholds_d2b: dict[int, ThresholdTable]  # by p10
    mulshifts: dict[int, MulShiftConstant]  # by rbase
    pow5: Pow5Table
    params: FormatParams

    def threshold_b2d(self, p2: int) -> ThresholdTable:
        return self.thresholds_b2d[p2]

    def threshold_d2b(self, p10: int) -> ThresholdTable:
        return self.thresholds_d2b[p10]

    def mulshift(self, rbase: int) -> MulShiftConstant:
        return self.mulshifts[rbase]


#: Conversion pairings the standard table file serves.
STANDARD_PAIRINGS = (BINARY32, BINARY64, DECIMAL32, DECIMAL64)


def gen_standard_tables(w: int = 128, lam: int = 64) -> TableSet:
    """Generate the full certified table set for the shipped pairings.

    The binary-direction tables extend below the normal binade range so that
    exactly pre-scaled subnormal mantissas stay in range; the power-of-five
    table is shared by every pairing, with the offset sized for the most
    negative exponent of five any of them requests.
    """
    thr_b2d = {}
    thr_d2b = {}
    v_lo = {}
    v_hi = {}
    for fmt in STANDARD_PAIRINGS:
        lo, hi = fmt.emin, fmt.emax + fmt.p2 - 1
        if fmt.p2 in v_lo:
            lo, hi = min(lo, v_lo[fmt.p2]), max(hi, v_hi[fmt.p2])
        v_lo[fmt.p2], v_hi[fmt.p2] = lo, hi
    for p2 in sorted(v_lo):
        emin = min(f.emin for f in STANDARD_PAIRINGS if f.p2 == p2)
        thr_b2d[p2] = gen_threshold_b2d(p2, v_lo[p2], v_hi[p2], grid_emin=emin)
    for fmt in STANDARD_PAIRINGS:
        if fmt.p10 not in thr_d2b:
            thr_d2b[fmt.p10] = gen_threshold_d2b(fmt.p10, fmt.fmin, fmt.fmax)
    ms10 = gen_mulshift(10, min(v_lo.values()) - 1, max(v_hi.values()) + 1)
    ms2 = gen_mulshift(
        2,
        min(f.fmin for f in STANDARD_PAIRINGS) - 1,
        max(f.fmax for f in STANDARD_PAIRINGS) + 1,
    )
    offset = max(max(f.fmax, -f.fmin, 0) for f in STANDARD_PAIRINGS)
    pow5 = gen_pow5_table(4, 2 * w - lam, offset)
    params = FormatParams(
        BINARY64.p2, BINARY64.p10, BINARY64.emin, BINARY64.emax,
        BINARY64.fmin, BINARY64.fmax, w, lam,
    )
    return TableSet(thr_b2d, thr_d2b, {10: ms10, 2: ms2}, pow5, params)


# ---------------------------------------------------------------------------
# Serialization

_PARAMS = struct.Struct("<8i")
_THR_HEAD = struct.Struct("<BHiBHIH")
_MS_HEAD = struct.Struct("<BQBii")
_POW5_HEAD = struct.Struct("<BHIHiB")


def _entry_bytes(t: int, direction: str) -> int:
    bits = t + (3 if direction == "b2d" else 2)  # sentinel 4<<t resp. 2<<t
    return (bits + 7) // 8


def _pack_section(kind: int, name: str, body: bytes) -> bytes:
    nb = name.encode()
    return bytes([kind, len(nb)]) + nb + body


def serialize(ts: TableSet) -> bytes:
    out = [MAGIC]
    p = ts.params
    out.append(_PARAMS.pack(p.p2, p.p10, p.emin, p.emax, p.fmin, p.fmax, p.w, p.lam))
    sections = []
    for p2, tbl in sorted(ts.thresholds_b2d.items()):
        sections.append((f"thr-b2d-p{p2}", tbl))
    for p10, tbl in sorted(ts.thresholds_d2b.items()):
        sections.append((f"thr-d2b-d{p10}", tbl))
    n_sections = len(sections) + len(ts.mulshifts) + 1
    out.append(struct.pack("<H", n_sections))
    for name, tbl in sections:
        ew = _entry_bytes(tbl.t, tbl.direction)
        body = _THR_HEAD.pack(
            0 if tbl.direction == "b2d" else 1,
            tbl.t, tbl.start, tbl.step, tbl.mant_bits, len(tbl.entries), ew,
        )
        body += b"".join(e.to_bytes(ew, "little") for e in tbl.entries)
        out.append(_pack_section(_KIND_THRESHOLD, name, body))
    for rbase, ms in sorted(ts.mulshifts.items()):
        body = _MS_HEAD.pack(rbase, ms.c, ms.shift, ms.lo, ms.hi)
        out.append(_pack_section(_KIND_MULSHIFT, f"ms-{rbase}", body))
    t5 = ts.pow5
    mb = (t5.width + 7) // 8
    body = _POW5_HEAD.pack(
        t5.index_bits, t5.width, t5.offset_power, mb,
        t5.offset_const.exp2, int(t5.offset_inexact),
    )
    body += t5.offset_const.mant.to_bytes(mb, "little")
    for e in t5.entries:
        body += e.mant.to_bytes(mb, "little") + struct.pack("<i", e.exp2)
    out.append(_pack_section(_KIND_POW5, "pow5", body))
    data = b"".join(out)
    return data + hashlib.sha256(data).digest()[:8]


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise TableFileError("truncated table file")
        b = self.data[self.pos : self.pos + n]
        self.pos += n
        return b

    def unpack(self, st: struct.Struct):
        return st.unpack(self.take(st.size))


def deserialize(data: bytes) -> TableSet:
    if len(data) < len(MAGIC) + _PARAMS.size + 2 + 8:
        raise TableFileError("truncated table file")
    if data[: len(MAGIC)] != MAGIC:
        raise TableFileError("bad magic")
    if hashlib.sha256(data[:-8]).digest()[:8] != data[-8:]:
        raise TableFileError("checksum mismatch")
    rd = _Reader(data[:-8])
    rd.take(len(MAGIC))
    params = FormatParams(*rd.unpack(_PARAMS))
    (n_sections,) = rd.unpack(struct.Struct("<H"))
    thr_b2d, thr_d2b, mulshifts, pow5 = {}, {}, {}, None
    for _ in range(n_sections):
        kind, name_len = rd.take(1)[0], rd.take(1)[0]
        rd.take(name_len)
        if kind == _KIND_THRESHOLD:
            direction, t, start, step, mant_bits, count, ew = rd.unpack(_THR_HEAD)
            dirname = "b2d" if direction == 0 else "d2b"
            if ew != _entry_bytes(t, dirname):
                raise TableFileError("entry width does not match parameters")
            raw = rd.take(count * ew)
            entries = tuple(
                int.from_bytes(raw[i * ew : (i + 1) * ew], "little")
                for i in range(count)
            )
            tbl = ThresholdTable(dirname, t, start, step, entries, mant_bits)
            if dirname == "b2d":
                thr_b2d[mant_bits] = tbl
            else:
                thr_d2b[_p10_from_kappa(mant_bits)] = tbl
        elif kind == _KIND_MULSHIFT:
            rbase, c, shift, lo, hi = rd.unpack(_MS_HEAD)
            mulshifts[rbase] = MulShiftConstant(rbase, c, shift, lo, hi)
        elif kind == _KIND_POW5:
            index_bits, width, offset_power, mb, off_exp2, off_inx = rd.unpack(
                _POW5_HEAD
            )
            off_mant = int.from_bytes(rd.take(mb), "little")
            entries = []
            for _ in range(1 << index_bits):
                mant = int.from_bytes(rd.take(mb), "little")
                (exp2,) = struct.unpack("<i", rd.take(4))
                entries.append(ScaledInteger(mant, exp2, width))
            pow5 = Pow5Table(
                index_bits, width, tuple(entries), offset_power,
                ScaledInteger(off_mant, off_exp2, width), bool(off_inx),
            )
        else:
            raise TableFileError(f"unknown section kind {kind}")
    if rd.pos != len(rd.data):
        raise TableFileError("trailing bytes after sections")
    if pow5 is None:
        raise TableFileError("missing power-of-five section")
    return TableSet(thr_b2d, thr_d2b, mulshifts, pow5, params)


def _p10_from_kappa(kappa: int) -> int:
    p10 = 1
    while (10**p10 - 1).bit_length() != kappa:
        p10 += 1
        if p10 > 40:
            raise TableFileError(f"no decimal precision has kappa={kappa}")
    return p10


# ---------------------------------------------------------------------------
# Size report

#: Published exponent-table sizes, bytes, for context only: the paper does
#: not state its entry encoding, so no tolerance is asserted against these.
PAPER_TABLE_SIZES = {
    "binary32": 554,
    "binary64": 8392,
    "binary128": 263024,
    "decimal32": 792,
    "decimal64": 6294,
    "decimal128": 19713,
}

_REPORT_FORMATS = {
    # binary: (p2, emin, emax) integer-mantissa convention, normal range
    "binary32": (24, -149, 104),
    "binary64": (53, -1074, 971),
    "binary128": (113, -16494, 16271),
    # decimal: (p10, fmin, fmax)
    "decimal32": (7, -101, 90),
    "decimal64": (16, -398, 369),
    "decimal128": (34, -6176, 6111),
}


def report_sizes(formats=None) -> list[dict]:
    """Generate the exponent-step threshold table for each format at its
    interchange range and report entry counts and byte sizes next to the
    published figures."""
    rows = []
    for name in formats or _REPORT_FORMATS:
        spec = _REPORT_FORMATS[name]
        if name.startswith("binary"):
            p2, emin, emax = spec
            tbl = gen_threshold_b2d(p2, emin + p2 - 1, emax + p2 - 1)
        else:
            p10, fmin, fmax = spec
            tbl = gen_threshold_d2b(p10, fmin, fmax)
        ew = _entry_bytes(tbl.t, tbl.direction)
        rows.append(
            {
                "format": name,
                "entries": len(tbl.entries),
                "entry_bytes": ew,
                "our_bytes": len(tbl.entries) * ew + _THR_HEAD.size,
                "paper_bytes": PAPER_TABLE_SIZES[name],
            }
        )
    return rows
