"""Associates phi(x,z) = e^{z p(x) d/dx} x and the projection pi_phi.

An Associate caches the z-expansion of phi as Laurent-series-in-x
coefficients.  BivarFunction represents elements of the fraction field
C_*((x1,x2)) as (Laurent numerator) / (product of factors x1 - a*x2) with
per-factor expansion directions.  pi_phi substitutes x1 -> phi(x,z),
x2 -> x and checks the result is x-independent.

``p`` is treated as exactly given data: its stored support is its true
support, so windows can be widened freely before iteration.
"""

from __future__ import annotations

from math import factorial

from .errors import EmptyWindow, NotXIndependent, UnsupportedExpansionDirection, ZeroP
from .scalars import mpq
from .series import LaurentSeries, BiSeries, X1_MAJOR, X2_MAJOR, binom_frac, binom_int


class VarSeries:
    """Truncated Laurent series in one more variable over a coefficient ring.

    Coefficients must support +, *, unary -, ``is_zero`` and (for division)
    ``inverse``; LaurentSeries and VarSeries itself qualify, so these nest.
    Exact for exponents <= zmax.
    """

    __slots__ = ("c", "zmax")

    def __init__(self, coeffs, zmax):
        self.c = {e: v for e, v in coeffs.items() if not v.is_zero() and e <= zmax}
        self.zmax = zmax

    def is_zero(self):
        return not self.c

    def valuation(self, default=0):
        return min(self.c) if self.c else default

    def coeff(self, e):
        return self.c.get(e)

    def __add__(self, other):
        zmax = min(self.zmax, other.zmax)
        out = dict(self.c)
        for e, v in other.c.items():
            out[e] = out[e] + v if e in out else v
        return VarSeries(out, zmax)

    def __neg__(self):
        return VarSeries({e: -v for e, v in self.c.items()}, self.zmax)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        zmax = min(self.zmax + other.valuation(), other.zmax + self.valuation())
        out = {}
        for e1, v1 in self.c.items():
            for e2, v2 in other.c.items():
                e = e1 + e2
                if e <= zmax:
                    out[e] = out[e] + v1 * v2 if e in out else v1 * v2
        return VarSeries(out, zmax)

    def scale(self, coeff_factor):
        return VarSeries({e: v * coeff_factor for e, v in self.c.items()}, self.zmax)

    def inverse(self, coeff_hi=None):
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero series")
        v = self.valuation()
        lead = self.c[v]
        lead_inv = lead.inverse(coeff_hi)
        depth = self.zmax - v
        # self = z^v * lead * (1 + u) with u of positive valuation
        u = {e - v: lead_inv * val for e, val in self.c.items() if e != v}
        acc = {0: lead_inv * lead}  # the ring one, carrying the right window
        term = dict(acc)
        for _ in range(depth):
            nxt = {}
            for e1, v1 in term.items():
                for e2, v2 in u.items():
                    e = e1 + e2
                    if e <= depth:
                        p = -(v1 * v2)
                        nxt[e] = nxt[e] + p if e in nxt else p
            term = {e: val for e, val in nxt.items() if not val.is_zero()}
            if not term:
                break
            for e, val in term.items():
                acc[e] = acc[e] + val if e in acc else val
        out = {e - v: val * lead_inv for e, val in acc.items()}
        return VarSeries(out, self.zmax - 2 * v)

    def ring_one(self):
        sample = next(iter(self.c.values()))
        return VarSeries({0: sample.ring_one()}, self.zmax)

    def pow_int(self, n: int, coeff_hi=None):
        if n < 0:
            return self.inverse(coeff_hi).pow_int(-n)
        if n == 0:
            return self.ring_one()
        out = None
        for _ in range(n):
            out = self if out is None else out * self
        return out

    def subst_neg(self):
        """z -> -z."""
        return VarSeries({e: (v if e % 2 == 0 else -v) for e, v in self.c.items()}, self.zmax)

    def __repr__(self):
        return "{" + ", ".join(f"z^{e}: {self.c[e]!r}" for e in sorted(self.c)) + "}"


class Associate:
    """phi(x,z) = e^{z p(x) d/dx} x, cached through z-order Z on x-window W."""

    def __init__(self, p: LaurentSeries, table, Z: int, W):
        self.p = p
        self.table = table  # table[n] = coefficient of z^n, a LaurentSeries
        self.Z = Z
        self.W = tuple(W)

    def phi(self, sign: int = 1) -> VarSeries:
        """phi(x, sign*z) as a z-series over LaurentSeries coefficients."""
        out = {}
        for n, coeff in enumerate(self.table):
            if not coeff.is_zero():
                out[n] = coeff if (sign > 0 or n % 2 == 0) else -coeff
        return VarSeries(out, self.Z)

    def eval_series(self, g: LaurentSeries, sign: int = 1) -> VarSeries:
        """g(phi(x, sign*z)) for exactly-given Laurent data g."""
        ph = self.phi(sign)
        out = None
        cache = {}
        for e, c in g.c.items():
            if e not in cache:
                cache[e] = ph.pow_int(e)
            term = cache[e]._scale_scalar(c)
            out = term if out is None else out + term
        return out if out is not None else VarSeries({}, self.Z)


def _vs_scale_scalar(self, c):
    out = {}
    for e, v in self.c.items():
        out[e] = v._scale_scalar(c) if isinstance(v, VarSeries) else v * c
    return VarSeries(out, self.zmax)


VarSeries._scale_scalar = _vs_scale_scalar


def associate_expand(p: LaurentSeries, Z: int, W) -> Associate:
    """Iterated application of p(x) d/dx to x; exact on W through z-order Z."""
    if p.is_zero():
        raise ZeroP("associate requires p != 0")
    p_exact = LaurentSeries(p.var, dict(p.c), p.lo, p.hi, complete=True)
    u = LaurentSeries.monomial(p.var, 1, mpq(1))
    table = [u]
    for n in range(1, Z + 1):
        u = p_exact * u.derive()
        table.append(u * mpq(1, factorial(n)))
    return Associate(p, table, Z, W)


def phi_r_closed(r: int, Z: int, W) -> Associate:
    """Closed form x(1-r z x^r)^(-1/r) for r != 0, x e^z for r = 0."""
    lo, hi = W
    var = "x"
    p = LaurentSeries.from_poly(var, {r + 1: mpq(1)})
    table = []
    if r == 0:
        for n in range(Z + 1):
            table.append(LaurentSeries.monomial(var, 1, mpq(1, factorial(n))))
    else:
        for n in range(Z + 1):
            c = binom_frac(mpq(-1, r), n) * _ipow(mpq(-r), n)
            table.append(LaurentSeries.from_poly(var, {1 + r * n: c}))
    return Associate(p, table, Z, W)


class BivarFunction:
    """Element of C_*((x1,x2)): prefactor * numerator / prod (x1 - a_k x2)^m_k.

    The numerator is a Laurent polynomial given by its exact support; each
    denominator factor carries an expansion direction used by ``expand``.
    """

    def __init__(self, numerator, factors=(), prefactor=mpq(1), vars=("x1", "x2")):
        self.num = {k: v for k, v in numerator.items() if v}
        self.factors = tuple((alpha, int(mult), direction) for alpha, mult, direction in factors)
        self.pre = prefactor
        self.vars = tuple(vars)
        if any(mult < 1 for _, mult, _ in self.factors):
            raise ValueError("factor multiplicities must be >= 1")
        if any(not alpha for alpha, _, _ in self.factors):
            raise ValueError("factor x1 - a*x2 requires a != 0; absorb pure powers in the numerator")

    def scale_vars(self, lam):
        """F(lam*x1, lam*x2); denominators scale by lam, folded into the prefactor."""
        num = {}
        for (e1, e2), v in self.num.items():
            num[(e1, e2)] = v * _ipow(lam, e1 + e2)
        total_mult = sum(m for _, m, _ in self.factors)
        pre = self.pre * _ipow(lam, -total_mult)
        return BivarFunction(num, self.factors, pre, self.vars)

    def expand(self, w1, w2) -> BiSeries:
        """Direction-tagged BiSeries expansion on the given window."""
        out = BiSeries(self.vars, {k: v * self.pre for k, v in self.num.items()},
                       w1, w2, complete=True)
        for alpha, mult, direction in self.factors:
            out = out * _factor_expansion(self.vars, alpha, direction, w1, w2).pow_factor(mult)
        return out

    def mul(self, other: "BivarFunction") -> "BivarFunction":
        num = {}
        for (a1, a2), v in self.num.items():
            for (b1, b2), w in other.num.items():
                k = (a1 + b1, a2 + b2)
                s = num.get(k, 0) + v * w
                if s:
                    num[k] = s
                elif k in num:
                    del num[k]
        return BivarFunction(num, self.factors + other.factors, self.pre * other.pre,
                             self.vars)

    def p_d1(self, p: LaurentSeries) -> "BivarFunction":
        """p(x1) * d/dx1 of a factor-free function (Laurent numerator only)."""
        if self.factors:
            raise ValueError("p_d1 supports factor-free functions only")
        num = {}
        for (e1, e2), v in self.num.items():
            if not e1:
                continue
            for d, pc in p.c.items():
                k = (e1 - 1 + d, e2)
                s = num.get(k, 0) + v * e1 * pc
                if s:
                    num[k] = s
                elif k in num:
                    del num[k]
        return BivarFunction(num, (), self.pre, self.vars)


def _ipow(x, e: int):
    out = mpq(1)
    for _ in range(abs(e)):
        out = out * x
    return out if e >= 0 else mpq(1) / out


class _FactorExpansion:
    """(x1 - alpha x2)^(-1) expanded in the tagged direction, with powers."""

    def __init__(self, series: BiSeries):
        self.series = series

    def pow_factor(self, mult: int) -> BiSeries:
        out = self.series
        for _ in range(mult - 1):
            out = out * self.series
        return out


def _factor_expansion(vars, alpha, direction, w1, w2) -> _FactorExpansion:
    coeffs = {}
    if direction == X1_MAJOR:
        # x1^-1 sum_k (alpha x2 / x1)^k
        for k in range(0, max(w2[1], 0) + 1):
            e = (-1 - k, k)
            if w1[0] <= e[0] <= w1[1] and w2[0] <= e[1] <= w2[1]:
                coeffs[e] = _ipow(alpha, k)
        bs = BiSeries(vars, coeffs, w1, w2, direction=X1_MAJOR, bounded=(False, True))
    elif direction == X2_MAJOR:
        # -(alpha x2)^-1 sum_k (x1/(alpha x2))^k
        for k in range(0, max(w1[1], 0) + 1):
            e = (k, -1 - k)
            if w1[0] <= e[0] <= w1[1] and w2[0] <= e[1] <= w2[1]:
                coeffs[e] = -_ipow(alpha, -k - 1)
        bs = BiSeries(vars, coeffs, w1, w2, direction=X2_MAJOR, bounded=(True, False))
    else:
        raise UnsupportedExpansionDirection(f"unknown direction {direction!r}")
    return _FactorExpansion(bs)


def subst_phi(F, slot: str, a: Associate, sign: int = 1) -> VarSeries:
    """Two-step substitution x_slot -> phi(x, sign*z), other slot -> x.

    Returns a z-series with LaurentSeries-in-x coefficients.
    """
    ph = a.phi(sign)
    ident = VarSeries({0: LaurentSeries.monomial(a.p.var, 1, mpq(1))}, a.Z)
    if slot == "x1":
        s1, s2 = ph, ident
    elif slot == "x2":
        s1, s2 = ident, ph
    else:
        raise ValueError("slot must be 'x1' or 'x2'")
    depth = max(abs(a.W[0]), abs(a.W[1])) + a.Z + 2
    return _eval_bivar(F, s1, s2, a.Z, coeff_hi=depth)


def _eval_bivar(F: BivarFunction, s1: VarSeries, s2: VarSeries, zmax: int,
                coeff_hi=None) -> VarSeries:
    pow1, pow2 = {}, {}

    def p1(e):
        if e not in pow1:
            pow1[e] = s1.pow_int(e, coeff_hi)
        return pow1[e]

    def p2(e):
        if e not in pow2:
            pow2[e] = s2.pow_int(e, coeff_hi)
        return pow2[e]

    num = None
    for (e1, e2), c in F.num.items():
        term = (p1(e1) * p2(e2))._scale_scalar(c * F.pre)
        num = term if num is None else num + term
    if num is None:
        return VarSeries({}, zmax)
    out = num
    for alpha, mult, _direction in F.factors:
        den = p1(1) - p2(1)._scale_scalar(alpha)
        inv = den.inverse(coeff_hi)
        for _ in range(mult):
            out = out * inv
    return out


def cphi_member(F: BivarFunction, a: Associate, w1, w2):
    """Check p(x1) d1 F = -p(x2) d2 F coefficientwise on the window.

    Returns (ok, violations); each violation names an offending coefficient.
    """
    exp = F.expand(w1, w2)
    p1 = _embed_poly(a.p, 0, F.vars, w1, w2)
    p2 = _embed_poly(a.p, 1, F.vars, w1, w2)
    lhs = p1 * exp.derive(0)
    rhs = -(p2 * exp.derive(1))
    ww1 = (max(lhs.w1[0], rhs.w1[0]), min(lhs.w1[1], rhs.w1[1]))
    ww2 = (max(lhs.w2[0], rhs.w2[0]), min(lhs.w2[1], rhs.w2[1]))
    if ww1[0] > ww1[1] or ww2[0] > ww2[1]:
        raise EmptyWindow("window too small for the membership test")
    bad = []
    for k in sorted(set(lhs.c) | set(rhs.c)):
        if ww1[0] <= k[0] <= ww1[1] and ww2[0] <= k[1] <= ww2[1]:
            if lhs.coeff(*k) != rhs.coeff(*k):
                bad.append((k, lhs.coeff(*k), rhs.coeff(*k)))
    return (not bad, bad)


def _embed_poly(p: LaurentSeries, which: int, vars, w1, w2) -> BiSeries:
    coeffs = {}
    for e, v in p.c.items():
        key = (e, 0) if which == 0 else (0, e)
        coeffs[key] = v
    return BiSeries(vars, coeffs, w1, w2, complete=True)


def pi_phi(F: BivarFunction, a: Associate, zorder: int | None = None):
    """F(phi(x,z), x) as a z-Laurent series, checked to be x-independent.

    Also verifies the two-variable identity F(phi(x,z1), phi(x,z2)) =
    f(z1 - z2).  Raises NotXIndependent naming the offending coefficient.
    """
    zs = subst_phi(F, "x1", a)
    zorder = a.Z if zorder is None else min(zorder, zs.zmax)
    out = {}
    for e, coeff in zs.c.items():
        if e > zorder:
            continue
        const = coeff.coeff(0)
        rest = coeff - LaurentSeries.monomial(coeff.var, 0, const, coeff.lo, coeff.hi)
        if not rest.is_zero():
            bad = sorted(rest.c)[0]
            raise NotXIndependent(
                f"z^{e} coefficient depends on x: x^{bad} term {rest.c[bad]}")
        if const:
            out[e] = const
    f = LaurentSeries("z", out, min(min(out, default=0), 0), zorder)
    _check_two_variable(F, a, f)
    return f


def _check_two_variable(F: BivarFunction, a: Associate, f: LaurentSeries):
    """iota_{x,z1,z2} F(phi(x,z1), phi(x,z2)) == f(z1-z2), z1-major."""
    ph1 = VarSeries({0: a.phi(1)}, a.Z)       # phi(x,z1): inner layer z1, at z2^0
    ph2 = _lift_coeffwise(a.phi(1), a.Z)      # phi(x,z2): outer layer z2
    depth = max(abs(a.W[0]), abs(a.W[1])) + a.Z + 2
    lhs = _eval_bivar(F, ph1, ph2, a.Z, coeff_hi=depth)
    rhs = _expand_f_z1_minus_z2(f, a, a.Z)
    for e2 in range(0, min(lhs.zmax, rhs.zmax) + 1):
        l = lhs.c.get(e2)
        r = rhs.c.get(e2)
        inner_zmax = min(l.zmax if l else a.Z, r.zmax if r else a.Z)
        keys = set(l.c if l else ()) | set(r.c if r else ())
        for e1 in keys:
            # f is exact through total order f.hi only
            if e1 > inner_zmax or e1 + e2 > f.hi:
                continue
            if not _coeff_eq(l.c.get(e1) if l else None, r.c.get(e1) if r else None):
                raise NotXIndependent(f"two-variable identity fails at z2^{e2} z1^{e1}")


def _coeff_eq(a, b):
    if a is None and b is None:
        return True
    if a is None:
        return b.is_zero()
    if b is None:
        return a.is_zero()
    try:
        return (a - b).is_zero()
    except EmptyWindow:
        return a.eq_on_common_window(b)


def _lift_coeffwise(vs: VarSeries, Z: int) -> VarSeries:
    """Re-layer a z-series so its variable becomes the outer of two z-layers."""
    return VarSeries({e: VarSeries({0: coeff}, Z) for e, coeff in vs.c.items()}, vs.zmax)


def two_sided_symmetry(F: BivarFunction, a: Associate) -> bool:
    """F(phi(x1,z), x2) == F(x1, phi(x2,-z)) in cross-multiplied polynomial form.

    Writing F = pre * N / Q with N Laurent and Q the factor product, clear all
    denominators (including the Laurent tails of N), so both sides become
    polynomial expressions in phi powers; exact through z-order Z.
    """
    A = max(0, -min((e1 for (e1, _) in F.num), default=0))
    B = max(0, -min((e2 for (_, e2) in F.num), default=0))
    ph1 = _phi_in_var(a, 0, 1)     # phi(x1, z)
    ph2 = _phi_in_var(a, 1, -1)    # phi(x2, -z)
    x1 = _mono_bivar(a, (1, 0))
    x2 = _mono_bivar(a, (0, 1))

    def numer(s1, s2):
        out = None
        for (e1, e2), c in F.num.items():
            term = (s1.pow_int(e1 + A) * s2.pow_int(e2 + B))._scale_scalar(c)
            out = term if out is None else out + term
        return out

    def denom(s1, s2):
        out = s1.pow_int(A) * s2.pow_int(B)
        for alpha, mult, _d in F.factors:
            fac = s1 - s2._scale_scalar(alpha)
            for _ in range(mult):
                out = out * fac
        return out

    lhs = numer(ph1, x2) * denom(x1, ph2)
    rhs = numer(x1, ph2) * denom(ph1, x2)
    diff = lhs - rhs
    return all(v.is_zero() for v in diff.c.values())


def _phi_in_var(a: Associate, which: int, sign: int) -> VarSeries:
    out = {}
    for n, g in enumerate(a.table):
        coeffs = {}
        for e, v in g.c.items():
            key = (e, 0) if which == 0 else (0, e)
            coeffs[key] = v if (sign > 0 or n % 2 == 0) else -v
        if coeffs:
            out[n] = BiSeries(("x1", "x2"), coeffs, (0, 0), (0, 0), complete=True)
    return VarSeries(out, a.Z)


def _mono_bivar(a: Associate, key) -> VarSeries:
    b = BiSeries(("x1", "x2"), {key: mpq(1)}, (0, 0), (0, 0), complete=True)
    return VarSeries({0: b}, a.Z)


def _expand_f_z1_minus_z2(f: LaurentSeries, a: Associate, Z: int) -> VarSeries:
    """f(z1 - z2) expanded z1-major: outer z2 power series, inner z1 Laurent."""
    out = {}
    for n, c in f.c.items():
        for k in range(0, Z + 1):
            b = binom_int(n, k) * (-1) ** k
            if not b:
                continue
            e1, e2 = n - k, k
            inner = out.setdefault(e2, {})
            cur = inner.get(e1)
            add = LaurentSeries.monomial(a.p.var, 0, c * b)
            inner[e1] = add if cur is None else cur + add
    return VarSeries({e2: VarSeries(inner, Z) for e2, inner in out.items()}, Z)
