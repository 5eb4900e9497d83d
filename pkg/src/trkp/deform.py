"""Deformation flows of the correlation differentials.

Two flows are verified against exact dual-number derivatives. A y-flow
keeps x fixed, so the ramification points and with them the whole pole
basis stay put and the derivative acts entry-wise on the tensors. A joint
(x, y)-flow moves the ramification points; there the derivative is taken
at fixed global coordinate z (any tau-independent meromorphic function
would do, and for a fixed curve they all agree, so we pin the affine
coordinate once and for all) and both sides are compared by evaluation.

The residue side of the y-flow is

    sum_i Res_{z=q_i} omega(g, n+1)(z_[n], z) * int_{q_i}^z (dy/dtau) dx,

with the primitive anchored at q_i itself: the integrand is regular there
because dx vanishes, and the anchoring constant cannot matter because
pole-basis entries carry no residue. The joint flow replaces the single
product by W0 against the primitive of d(y dx)/dtau minus the unrestricted
u^1 insertion against dx/dtau, summed over the same residues.
"""

from __future__ import annotations

from math import comb

from .curves import SpectralCurve
from .kpsym import omega_leading, w_tilde1
from .ratfun import RationalFunction
from .recursion import CorrelationDifferential, Engine, eval_tensor, kmax
from .scalars import Dual, rat, rat_str


class FamilyDegenerate(Exception):
    """A parameter value violates the recursion hypotheses."""

    def __init__(self, message, tau=None):
        super().__init__(message)
        self.tau = tau


def _poly_at(coeffs, tau):
    acc = RationalFunction.const(rat(0))
    for c in reversed(coeffs):
        acc = acc * tau + c
    return acc


class CurveFamily:
    """One-parameter spectral curve family, polynomial in tau.

    x_tau and y_tau are tau-coefficient sequences of rational functions in
    z, lowest degree first. The logarithmic part of x, if any, is held
    fixed along the family; the Bergman kernel is always the standard one.
    """

    def __init__(self, x_tau, y_tau, x_log=(), name="family"):
        self.x_tau = tuple(x_tau)
        self.y_tau = tuple(y_tau)
        if not self.x_tau or not self.y_tau:
            raise ValueError("need x and y data at tau = 0")
        self.x_log = tuple(x_log)
        self.name = name
        self._base = None

    @property
    def fixed_x(self) -> bool:
        return all(c.is_zero() for c in self.x_tau[1:])

    @property
    def base(self) -> SpectralCurve:
        if self._base is None:
            self._base = self.curve_at(rat(0))
        return self._base

    def curve_at(self, tau) -> SpectralCurve:
        return SpectralCurve(
            x_rat=_poly_at(self.x_tau, tau),
            y=_poly_at(self.y_tau, tau),
            x_log=self.x_log,
            name=f"{self.name}@{rat_str(tau)}")

    def rebase(self, tau0) -> CurveFamily:
        """The same family re-parametrized so that tau0 becomes 0."""

        def shift(coeffs):
            out = []
            for j in range(len(coeffs)):
                acc = RationalFunction.const(rat(0))
                for k in range(j, len(coeffs)):
                    acc = acc + coeffs[k] * (comb(k, j) * tau0 ** (k - j))
                out.append(acc)
            return out

        return CurveFamily(shift(self.x_tau), shift(self.y_tau),
                           x_log=self.x_log,
                           name=f"{self.name}@{rat_str(tau0)}")

    def delta_x(self) -> RationalFunction:
        if len(self.x_tau) > 1:
            return self.x_tau[1]
        return RationalFunction.const(rat(0))

    def delta_y(self) -> RationalFunction:
        if len(self.y_tau) > 1:
            return self.y_tau[1]
        return RationalFunction.const(rat(0))

    def dual_curve(self) -> SpectralCurve:
        """The curve at tau = eps over Q[eps]/(eps^2).

        Running the recursion over this curve carries every first
        derivative along for free; for moving x the ramification points
        are lifted by one exact Newton step inside find_ramification.
        """
        eps = RationalFunction.const(Dual(rat(0), rat(1)))
        return SpectralCurve(
            x_rat=self.x_tau[0] + eps * self.delta_x(),
            y=self.y_tau[0] + eps * self.delta_y(),
            x_log=self.x_log,
            name=f"{self.name}@dual")


def _stable(g: int, n: int):
    if n < 1 or 2 * g - 2 + n <= 0:
        raise ValueError("stable (g, n) with n >= 1 required")


def rhs_var_y(family: CurveFamily, g: int, n: int,
              engine: Engine | None = None) -> CorrelationDifferential:
    """Residue side of the y-flow at tau = 0 of the family.

    Contracts one slot of omega(g, n+1) against the local primitive of
    (dy/dtau) dx at each ramification point. The output shares the pole
    basis of the base curve, so callers can compare it entry-wise with the
    dual-number derivative.
    """
    _stable(g, n)
    if not family.fixed_x:
        raise ValueError("the y-flow needs fixed x")
    curve = family.base
    dy = family.delta_y()
    out = CorrelationDifferential(g, n)
    if dy.is_zero():
        return out
    eng = engine if engine is not None else Engine(curve)
    om = eng.omega(g, n + 1)
    top = kmax(g, n + 1)
    prims = []
    for pt in curve.ram:
        q = pt.location
        if dy.order_at(q) < 0:
            raise FamilyDegenerate(
                f"dy/dtau singular at ramification point {pt.index}",
                tau=rat(0))
        integrand = dy.local_expand(q, top + 2) * curve.dx.local_expand(q, top + 2)
        prims.append(integrand.integrate())
    for key, c in om.entries.items():
        i, k = key[0]
        w = prims[i].coeff(k - 1)
        if w:
            out.add(key[1:], c * w)
    return out


def omega_tau_derivative(family: CurveFamily, g: int, n: int,
                         engine: Engine | None = None) -> CorrelationDifferential:
    """Entry-wise dual-number derivative of omega(g, n) at tau = 0.

    Only meaningful when x is fixed: then the basis differentials do not
    move and the eps part of each entry is the derivative of that entry.
    """
    _stable(g, n)
    if not family.fixed_x:
        raise ValueError("entry-wise derivatives need fixed x")
    eng = engine if engine is not None else Engine(family.dual_curve())
    om = eng.omega(g, n)
    out = CorrelationDifferential(g, n)
    for key, c in om.entries.items():
        out.add(key, c.b if isinstance(c, Dual) else rat(0))
    return out


def omega_dual_eval(family: CurveFamily, g: int, n: int, points,
                    engine: Engine | None = None):
    """d/dtau of omega(g, n)/(dz_1 ... dz_n) at fixed probe coordinates."""
    _stable(g, n)
    eng = engine if engine is not None else Engine(family.dual_curve())
    v = eval_tensor(eng.omega(g, n), eng.curve, points)
    return v.b if isinstance(v, Dual) else rat(0)


def _compositions(total: int, k: int):
    if k == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, k - 1):
            yield (first,) + rest


def _contract(out, marks, base, qi, sign):
    """Add Res_t of base times the re-expanded diagonal markers.

    base is the local Laurent series at q of R(z) times the partner
    (primitive or dx/dtau). A diagonal marker 1/(z - z_j)^2 re-expands at
    z = q + t into sum_m (m+1) t^m / (z_j - q)^{m+2}, so every term lands
    back in the ordinary pole basis with slot order 2 + m.
    """
    if base.is_zero():
        return
    cap = -1 - base.low
    if cap < 0:
        return
    fixed = {}
    diags = []
    for slot, mk in marks:
        if isinstance(mk[0], str):
            diags.append(slot)
        else:
            fixed[slot] = mk
    nslots = len(marks)
    for s in range(cap + 1):
        c0 = base.coeff(-1 - s)
        if not c0:
            continue
        for mvec in _compositions(s, len(diags)):
            c = c0
            key = [None] * nslots
            for slot, mk in fixed.items():
                key[slot] = mk
            for slot, m in zip(diags, mvec):
                key[slot] = (qi, 2 + m)
                c = c * (m + 1)
            out.add(tuple(key), sign * c)


def rhs_xy(family: CurveFamily, g: int, n: int,
           engine: Engine | None = None) -> CorrelationDifferential:
    """Residue side of the joint (x, y)-flow at tau = 0, B fixed.

    Both tau-derivatives below are taken with the global coordinate z held
    fixed. The primitive of d(y dx)/dtau is anchored at the ramification
    point of the residue it feeds, the same choice as in the y-flow; the
    B-variation terms are identically absent because the kernel is the
    fixed standard one, so nothing is computed for them. Extra first-order
    zeros of dx live away from the q_j and never enter these residues;
    dual_curve() counts how many were discarded.
    """
    _stable(g, n)
    curve = family.base
    if curve.y is None:
        raise ValueError("needs a globally rational y")
    eng = engine if engine is not None else Engine(curve)
    dx_tau = family.delta_x()
    dy_tau = family.delta_y()
    d_ydx = dy_tau * curve.dx + curve.y * dx_tau.deriv()
    w0 = omega_leading(eng, g, n)
    w1 = w_tilde1(eng, g, n)
    out = CorrelationDifferential(g, n)
    for pt in curve.ram:
        q = pt.location
        depth = 2
        for group in (w0.entries, w1.entries):
            for r in group.values():
                depth = max(depth, -r.order_at(q))
        if not d_ydx.is_zero():
            if d_ydx.order_at(q) < 0:
                raise FamilyDegenerate(
                    f"d(y dx)/dtau singular at ramification point {pt.index}",
                    tau=rat(0))
            lam = d_ydx.local_expand(q, depth + 2).integrate()
            for marks, r in w0.entries.items():
                _contract(out, marks, r.local_expand(q, 2) * lam, pt.index, rat(1))
        if not dx_tau.is_zero():
            dxs = dx_tau.local_expand(q, depth + 2)
            for marks, r in w1.entries.items():
                _contract(out, marks, r.local_expand(q, 2) * dxs, pt.index, rat(-1))
    return out


class OmegaStable2:
    """Half-sum of splittings with two extra slots and no unstable legs.

    terms is a list of (coeff, zmark, ztmark, spect): zmark and ztmark are
    pole markers (i, k), or None when that leg sits inside a kept Bergman
    factor; spect assigns each spectator slot (i, k), ("z", 2) for
    1/(z - z_j)^2, or ("zt", 2) for 1/(zt - z_j)^2.
    """

    def __init__(self, g, n, terms):
        self.g = g
        self.n = n
        self.terms = [t for t in terms if t[0]]

    def is_zero(self) -> bool:
        return not self.terms

    def eval_at(self, curve: SpectralCurve, z, zt, points):
        locs = [p.location for p in curve.ram]
        total = rat(0)
        for c, zm, ztm, spect in self.terms:
            v = c
            if zm is not None:
                i, k = zm
                v = v * _invp(z - locs[i], k)
            if ztm is not None:
                i, k = ztm
                v = v * _invp(zt - locs[i], k)
            for slot, mk in enumerate(spect):
                if mk[0] == "z":
                    v = v * _invp(z - points[slot], mk[1])
                elif mk[0] == "zt":
                    v = v * _invp(zt - points[slot], mk[1])
                else:
                    v = v * _invp(points[slot] - locs[mk[0]], mk[1])
            total = total + v
        return total


def _invp(d, k: int):
    if isinstance(d, int):
        d = rat(d)
    inv = (rat(1) / d) if not hasattr(d, "inverse") else d.inverse()
    return inv ** k


def omega_stable2(source, g: int, n: int) -> OmegaStable2:
    """Direct enumeration of the two-extra-slot splitting sum.

    Kept terms: the genus-lowered omega(g-1, n+2) when stable, and every
    split omega(g1)(z, z_I) * omega(g2)(zt, z_J) whose legs avoid (0, 1);
    a (0, 2) leg survives as a Bergman factor tying an extra slot to a
    spectator, while the genus-lowered (0, 2) head, which would put a pole
    on the diagonal of the two extra slots, is dropped.
    """
    if g < 0 or n < 0:
        raise ValueError("need g, n >= 0")
    eng = source if isinstance(source, Engine) else Engine(source)
    half = rat(1, 2)
    terms = []
    if g >= 1 and 2 * (g - 1) - 2 + (n + 2) > 0:
        om = eng.omega(g - 1, n + 2)
        for key, c in om.entries.items():
            terms.append((c * half, key[0], key[1], key[2:]))

    def leg(g1, idx):
        """(zmark, spect-assignments, coeff) triples for one split factor."""
        if g1 == 0 and len(idx) == 0:
            return None
        if g1 == 0 and len(idx) == 1:
            return [(None, {idx[0]: "B"}, rat(1))]
        om = eng.omega(g1, len(idx) + 1)
        got = []
        for key, c in om.entries.items():
            got.append((key[0], dict(zip(idx, key[1:])), c))
        return got

    for mask in range(1 << n):
        i1 = tuple(j for j in range(n) if mask & (1 << j))
        i2 = tuple(j for j in range(n) if not mask & (1 << j))
        for g1 in range(g + 1):
            t1 = leg(g1, i1)
            t2 = leg(g - g1, i2)
            if t1 is None or t2 is None:
                continue
            for zm, a1, c1 in t1:
                for ztm, a2, c2 in t2:
                    spect = []
                    for j in range(n):
                        mk = a1.get(j, a2.get(j))
                        if mk == "B":
                            mk = ("z" if j in a1 else "zt", 2)
                        spect.append(mk)
                    terms.append((c1 * c2 * half, zm, ztm, tuple(spect)))
    return OmegaStable2(g, n, terms)


class FlowReport:
    """Per-sample, per-(g, n) comparison listing for one family."""

    def __init__(self, mode: str):
        self.mode = mode
        self.checks: list[tuple[str, bool, str]] = []
        self.notes: list[str] = []

    def add(self, label: str, ok: bool, detail: str = ""):
        self.checks.append((label, ok, detail))

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def lines(self):
        for note in self.notes:
            yield f"note  {note}"
        for label, ok, detail in self.checks:
            status = "pass" if ok else "FAIL"
            yield f"{status}  {label}" + (f": {detail}" if detail else "")

    def __repr__(self):
        return "\n".join(self.lines())


def _stable_pairs(euler_max: int):
    out = []
    for g in range(euler_max + 2):
        for n in range(1, euler_max + 3):
            e = 2 * g - 2 + n
            if 0 < e <= euler_max:
                out.append((g, n))
    return sorted(out, key=lambda gn: (2 * gn[0] - 2 + gn[1], gn[0]))


def flow_check(family: CurveFamily, euler_max: int,
               samples=(rat(0), rat(1, 2), rat(1))) -> FlowReport:
    """Compare the y-flow residue formula with dual-number derivatives.

    At each sample tau the family is re-based so the derivative is again
    taken at 0, the re-based curve is validated, and for every stable
    (g, n) within the Euler bound the two tensors are compared entry-wise.
    A validation failure raises FamilyDegenerate carrying the sample.
    """
    if not family.fixed_x:
        raise ValueError("flow_check drives y-flows; use xy_check")
    rep = FlowReport("y")
    for tau in samples:
        fam = family.rebase(tau)
        val = fam.base.validate()
        if not val.ok:
            bad = "; ".join(line for line in val.lines() if line.startswith("FAIL"))
            raise FamilyDegenerate(
                f"family degenerates at tau = {rat_str(tau)}: {bad}", tau=tau)
        eng = Engine(fam.base)
        dual_eng = Engine(fam.dual_curve())
        for g, n in _stable_pairs(euler_max):
            lhs = omega_tau_derivative(fam, g, n, engine=dual_eng)
            rhs = rhs_var_y(fam, g, n, engine=eng)
            rep.add(f"tau={rat_str(tau)} (g,n)=({g},{n})", rhs == lhs)
    return rep


def xy_check(family: CurveFamily, euler_max: int, probes=None) -> FlowReport:
    """Compare the joint-flow residue formula with dual-number derivatives.

    Moving ramification points take the pole basis with them, so the two
    sides are compared by exact evaluation at rational probe tuples instead
    of entry-wise. Extra first-order zeros of dx are reported and ignored.
    """
    rep = FlowReport("xy")
    dual = family.dual_curve()
    if dual.ignored_far_zeros:
        rep.notes.append(
            f"extra dx zeros ignored at first order: {dual.ignored_far_zeros}")
    eng = Engine(family.base)
    dual_eng = Engine(dual)
    if probes is None:
        probes = [tuple(rat(v) for v in (2, 3, 5, 7, 11)),
                  tuple(rat(v, 2) for v in (-5, 7, 9, 13, 17))]
    for g, n in _stable_pairs(euler_max):
        rhs = rhs_xy(family, g, n, engine=eng)
        ok = True
        for probe in probes:
            pts = probe[:n]
            lhs_v = omega_dual_eval(family, g, n, pts, engine=dual_eng)
            rhs_v = eval_tensor(rhs, family.base, pts)
            if lhs_v != rhs_v:
                ok = False
        rep.add(f"(g,n)=({g},{n})", ok)
    return rep
