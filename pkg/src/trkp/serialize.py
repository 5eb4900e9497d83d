"""Line-oriented exact serialization for omega tensors and tau functions.

Formats are versioned and carry the kernel convention tag plus the curve
fingerprint, so a cache written under one sign convention can never be
read back under another.  Every scalar is rendered as an exact rational
string (or a comma-joined coefficient vector for field elements); no
floating point appears anywhere.
"""

from __future__ import annotations

from fractions import Fraction

from .scalars import AlgebraicNum, is_rational, rat, rat_str
from .recursion import CONVENTION_TAG, CorrelationDifferential

OMEGA_MAGIC = "trkp-omega 1"
TAU_MAGIC = "trkp-tau 1"


def scalar_str(c) -> str:
    if is_rational(c):
        return rat_str(c)
    if isinstance(c, AlgebraicNum):
        return ",".join(rat_str(x) for x in c.coeffs)
    raise TypeError(f"cannot serialize scalar of type {type(c).__name__}")


def parse_scalar(text: str, field=None):
    if "," not in text:
        return rat(Fraction(text))
    if field is None:
        raise ValueError("field element encountered but no field supplied")
    return field.element([rat(Fraction(p)) for p in text.split(",")])


def _field_line(field) -> str:
    if field is None:
        return "field rational"
    return "field " + ",".join(rat_str(c) for c in field.monic)


def render_omega(om: CorrelationDifferential, curve) -> str:
    lines = [
        OMEGA_MAGIC,
        f"convention {CONVENTION_TAG}",
        f"curve {curve.fingerprint()}",
        _field_line(curve.ram_field),
        f"g {om.g}",
        f"n {om.n}",
        f"entries {len(om.entries)}",
    ]
    for key in sorted(om.entries):
        slots = " ".join(f"{i}:{k}" for i, k in key)
        lines.append(f"{slots}\t{scalar_str(om.entries[key])}")
    return "\n".join(lines) + "\n"


def _expect(line: str, prefix: str) -> str:
    if not line.startswith(prefix + " "):
        raise ValueError(f"expected '{prefix} ...', got {line!r}")
    return line[len(prefix) + 1 :]


def parse_omega(text: str, curve) -> CorrelationDifferential:
    lines = text.splitlines()
    if len(lines) < 7 or lines[0] != OMEGA_MAGIC:
        raise ValueError("not an omega file")
    if _expect(lines[1], "convention") != CONVENTION_TAG:
        raise ValueError("convention tag mismatch")
    if _expect(lines[2], "curve") != curve.fingerprint():
        raise ValueError("curve fingerprint mismatch")
    if lines[3] != _field_line(curve.ram_field):
        raise ValueError("field mismatch")
    g = int(_expect(lines[4], "g"))
    n = int(_expect(lines[5], "n"))
    count = int(_expect(lines[6], "entries"))
    body = lines[7:]
    if len(body) != count:
        raise ValueError("entry count mismatch")
    entries = {}
    for line in body:
        slots, _, coeff = line.partition("\t")
        key = []
        for part in slots.split():
            i, _, k = part.partition(":")
            key.append((int(i), int(k)))
        if len(key) != n:
            raise ValueError("slot arity mismatch")
        entries[tuple(key)] = parse_scalar(coeff, curve.ram_field)
    return CorrelationDifferential(g, n, entries)


def render_tau(tau) -> str:
    """Serialize a TruncatedTau as sparse (hbar-exponent, p-monomial, coeff) rows."""
    poly = tau.poly
    try:
        hpos = poly.vars.index("h")
    except ValueError:
        hpos = None
    pidx = [
        (pos, int(name[1:]))
        for pos, name in enumerate(poly.vars)
        if name.startswith("p")
    ]
    rows = []
    for expo, coeff in poly.terms.items():
        hdeg = expo[hpos] if hpos is not None else 0
        mono = ",".join(f"{k}:{expo[pos]}" for pos, k in pidx if expo[pos])
        rows.append((hdeg, tuple(sorted((k, expo[pos]) for pos, k in pidx if expo[pos])), mono or "1", coeff))
    rows.sort(key=lambda r: (r[0], r[1]))
    lines = [
        TAU_MAGIC,
        f"pcap {tau.pcap}",
        f"hcap {tau.hcap}",
        f"entries {len(rows)}",
    ]
    for hdeg, _, mono, coeff in rows:
        if not is_rational(coeff):
            raise TypeError("tau files carry rational coefficients only")
        lines.append(f"{hdeg} {mono} {rat_str(coeff)}")
    return "\n".join(lines) + "\n"


def parse_tau(text: str):
    from .expansion import TruncatedTau
    from .multipoly import MultiPoly

    lines = text.splitlines()
    if len(lines) < 4 or lines[0] != TAU_MAGIC:
        raise ValueError("not a tau file")
    pcap = int(_expect(lines[1], "pcap"))
    hcap = int(_expect(lines[2], "hcap"))
    count = int(_expect(lines[3], "entries"))
    body = lines[4:]
    if len(body) != count:
        raise ValueError("entry count mismatch")
    names = ("h",) + tuple(f"p{k}" for k in range(1, pcap + 1))
    terms = {}
    for line in body:
        hdeg, mono, coeff = line.split()
        expo = [0] * len(names)
        expo[0] = int(hdeg)
        if mono != "1":
            for part in mono.split(","):
                k, _, e = part.partition(":")
                k = int(k)
                if not 1 <= k <= pcap:
                    raise ValueError(f"p-index {k} outside declared pcap {pcap}")
                expo[k] = int(e)
        terms[tuple(expo)] = rat(Fraction(coeff))
    return TruncatedTau(MultiPoly(names, terms), pcap=pcap, hcap=hcap)
