"""Deformation machinery on V_L and B_{L,eps}.

Builds the compatible B_L-module structures Y_M (exponentials of the
pseudo-endomorphisms Phi), the comodule map rho, their convolution, the
smash-product field, the deformed fields D(Y), the Yang-Baxter operator
S(x), the group action chi(g)^{L(0)} g, and the equivariant averaging of
deformation maps.

Polynomials in the formal variable are plain dicts {exponent: scalar}; all
Phi outputs have finite support and are exact everywhere, so only the
exponential pieces need a truncation order.
"""

from __future__ import annotations

from math import factorial

from .errors import NotFormallyNilpotent, ScalarNotRepresentable
from .fock import State, coproduct, mono_weight, vacuum_mono
from .lattice import Isometry, Lattice, vec_add
from .scalars import mpq
from .series import binom_int
from .vertex import Engine, SeriesState, _heis_mono, _xd_add, _xd_clean

# ---- polynomial helpers (dict exponent -> scalar) -------------------------


def poly_derive(p, k=1):
    out = dict(p)
    for _ in range(k):
        out = {e - 1: e * v for e, v in out.items() if e}
    return {e: v for e, v in out.items() if v}


def poly_neg(p):
    return {e: -v for e, v in p.items()}


def poly_add(p, q):
    out = dict(p)
    for e, v in q.items():
        w = out.get(e, 0) + v
        if w:
            out[e] = w
        elif e in out:
            del out[e]
    return out


def poly_scale(p, c):
    return {e: c * v for e, v in p.items()} if c else {}


def poly_scale_var(p, c):
    """x -> c*x on a polynomial with nonnegative exponents."""
    out = {}
    for e, v in p.items():
        f = v
        for _ in range(e):
            f = f * c
        out[e] = f
    return out


def poly_at_zero(p):
    return p.get(0, 0)


class DeformationMap:
    """Linear map h -> h (x) xC[x], stored as an r x r matrix of polynomials.

    entries[(i, j)] is the coefficient polynomial of a_j in f(a_i, x); all
    exponents are >= 1 (zero constant term) and finite (polynomial support).
    """

    def __init__(self, rank: int, entries=None, allow_constant=False):
        self.rank = rank
        self.entries = {}
        for key, poly in (entries or {}).items():
            p = {int(e): v for e, v in poly.items() if v}
            if not allow_constant and any(e < 1 for e in p):
                raise ValueError("deformation map entries must lie in x*C[x]")
            if p:
                self.entries[key] = p
        self._key = None

    def key(self):
        """Hashable identity used for caching."""
        if self._key is None:
            self._key = (self.rank, tuple(sorted(
                (i, j, e, v) for (i, j), p in self.entries.items() for e, v in p.items())))
        return self._key

    @classmethod
    def zero(cls, rank: int):
        return cls(rank)

    def is_zero(self):
        return not self.entries

    def neg(self):
        return DeformationMap(self.rank, {k: poly_neg(p) for k, p in self.entries.items()},
                              allow_constant=True)

    def derive(self, k: int = 1):
        out = {key: poly_derive(p, k) for key, p in self.entries.items()}
        return DeformationMap(self.rank, out, allow_constant=True)

    def add(self, other):
        keys = set(self.entries) | set(other.entries)
        out = {k: poly_add(self.entries.get(k, {}), other.entries.get(k, {})) for k in keys}
        return DeformationMap(self.rank, out, allow_constant=True)

    def of(self, alphavec):
        """f(alpha, x) as a list of (basis index j, polynomial)."""
        acc = {}
        for i, a in enumerate(alphavec):
            if not a:
                continue
            for (ii, j), p in self.entries.items():
                if ii == i:
                    acc[j] = poly_add(acc.get(j, {}), poly_scale(p, a))
        return [(j, p) for j, p in sorted(acc.items()) if p]

    def pair(self, lat: Lattice, alphavec, betavec):
        """<f(alpha, x), beta> as a polynomial."""
        out = {}
        for j, p in self.of(alphavec):
            c = sum(lat.gram[j][k] * betavec[k] for k in range(self.rank))
            if c:
                out = poly_add(out, poly_scale(p, mpq(c)))
        return out

    def is_symmetric(self, lat: Lattice) -> bool:
        """<f(a,x), b> == <f(b,-x), a> on basis pairs."""
        for i in range(self.rank):
            ei = tuple(1 if k == i else 0 for k in range(self.rank))
            for j in range(self.rank):
                ej = tuple(1 if k == j else 0 for k in range(self.rank))
                lhs = self.pair(lat, ei, ej)
                rhs = {e: (v if e % 2 == 0 else -v) for e, v in self.pair(lat, ej, ei).items()}
                if lhs != rhs:
                    return False
        return True


# ---- module structures -----------------------------------------------------


class ModuleStructure:
    """A compatible B_L-module vertex-algebra structure on V_L or B_{L,eps}.

    kind 'f'     : Y_M^f, exp(Phi(f(gamma,x))) on group-likes (on V_L)
    kind 'eps'   : the counit action (convolution identity)
    kind 'bleps' : E^+(-gamma,x) x^{gamma(0)} on B_{L,eps}
    kind 'conv'  : convolution M1 * M2 via the coproduct
    """

    def __init__(self, kind: str, f: DeformationMap | None = None, parts=None):
        self.kind = kind
        self.f = f
        self.parts = parts

    @classmethod
    def ymf(cls, f: DeformationMap):
        return cls("f", f=f)

    @classmethod
    def ym_eps(cls):
        return cls("eps")

    @classmethod
    def ym_bleps(cls):
        return cls("bleps")

    @classmethod
    def convolve(cls, m1, m2):
        return cls("conv", parts=(m1, m2))

    def inverse(self):
        if self.kind == "f":
            return ModuleStructure.ymf(self.f.neg())
        if self.kind == "eps":
            return self
        raise ValueError(f"no convolution inverse for kind {self.kind!r}")

    def key(self):
        if self.kind == "f":
            return ("f", self.f.key())
        if self.kind == "conv":
            return ("conv", self.parts[0].key(), self.parts[1].key())
        return (self.kind,)


class Deformer:
    """Deformation operations bound to a vertex engine."""

    def __init__(self, eng: Engine):
        self.eng = eng
        self.lat = eng.lat
        self.rank = eng.rank
        self._ym_cache = {}
        self._def_cache = {}
        self._s_cache = {}

    # -- pseudo-endomorphism building blocks --------------------------

    def phi_apply_xd(self, G, xd):
        """Phi(G)(z) on an x-dict; G is a list of (basis index, polynomial).

        Output has finite support and is exact at every exponent.
        """
        out = {}
        lat = self.lat
        for e, row in xd.items():
            for mono, c in row.items():
                pairs, beta = mono
                for j, p in G:
                    # n = 0 term: <a_j, beta> g(z)
                    pair0 = sum(lat.gram[j][k] * beta[k] for k in range(self.rank))
                    if pair0:
                        for d, g in p.items():
                            _xd_add(out, e + d, mono, c * g * pair0)
                    # n >= 1 terms hit mode factors
                    for n in {n for ((jj, n), _m) in pairs if lat.gram[j][jj]}:
                        gd = poly_derive(p, n)
                        if not gd:
                            continue
                        sgn = mpq((-1) ** (n % 2), factorial(n))
                        for m2, fct in _heis_mono(lat, j, n, mono):
                            for d, g in gd.items():
                                _xd_add(out, e + d, m2, c * g * fct * sgn)
        return _xd_clean(out)

    def phi_apply(self, G, v: State, lo: int, hi: int) -> SeriesState:
        xd = self.phi_apply_xd(G, {0: dict(v.terms)})
        return SeriesState("z", {e: State(r) for e, r in xd.items() if lo <= e <= hi}, lo, hi)

    def exp_phi_xd(self, G, xd, zhi: int):
        """exp(Phi(G))(z) on an x-dict, exact through z-exponent zhi.

        Requires every polynomial in G to have strictly positive support; the
        commuting family argument makes the exponential well defined.
        """
        for _, p in G:
            if any(e <= 0 for e in p):
                raise NotFormallyNilpotent("exp(Phi) needs strictly positive exponents")
        total = {e: dict(row) for e, row in xd.items()}
        layer = xd
        k = 0
        while layer:
            k += 1
            nxt = self.phi_apply_xd(G, layer)
            nxt = {e: {m: v / k for m, v in row.items()}
                   for e, row in nxt.items() if e <= zhi}
            layer = _xd_clean(nxt)
            for e, row in layer.items():
                for mono, c in row.items():
                    _xd_add(total, e, mono, c)
        return _xd_clean(total)

    def exp_phi_apply(self, G, v: State, zhi: int) -> SeriesState:
        xd = self.exp_phi_xd(G, {0: dict(v.terms)}, zhi)
        lo = min(xd, default=0)
        return SeriesState("z", {e: State(r) for e, r in xd.items()}, min(lo, 0), zhi)

    # -- comodule map ---------------------------------------------------

    def rho(self, v: State, source: str = "VL") -> State:
        """rho(s e_b) = Delta(s) (e_b (x) e^b); tensor state over (V, B_L)."""
        out = coproduct(v)
        out.tags = ("V_L" if source == "VL" else "B_L_eps", "B_L")
        return out

    # -- Y_M applications -----------------------------------------------

    def ym_mono_xd(self, M: ModuleStructure, a_mono, xd, zhi: int):
        """Y_M(a, x) applied to an x-dict for a single B_L monomial a."""
        pairs, gamma = a_mono
        if M.kind == "eps":
            return xd if not pairs else {}
        if M.kind == "conv":
            m1, m2 = M.parts
            out = {}
            cp = coproduct(State.monomial(a_mono))
            for (left, right), c in cp.terms.items():
                cur = self.ym_mono_xd(m2, right, xd, zhi)
                cur = self.ym_mono_xd(m1, left, cur, zhi)
                for e, row in cur.items():
                    for mono, cc in row.items():
                        _xd_add(out, e, mono, cc * c)
            return _xd_clean(out)
        if M.kind == "f":
            cur = xd
            if any(gamma):
                cur = self.exp_phi_xd(M.f.of(gamma), cur, zhi)
            for (i, n), mult in pairs:
                ei = tuple(1 if k == i else 0 for k in range(self.rank))
                G = [(j, poly_scale(p, mpq(1, factorial(n - 1))))
                     for j, p in M.f.derive(n).of(ei)]
                for _ in range(mult):
                    cur = self.phi_apply_xd(G, cur)
                    if not cur:
                        return {}
            return {e: row for e, row in cur.items() if e <= zhi}
        if M.kind == "bleps":
            eng = self.eng
            cur = xd
            if any(gamma):
                cur = eng._x_beta(gamma, cur)
                cur = eng._e_plus(tuple(-g for g in gamma), cur)
            for (i, n), mult in pairs:
                for _ in range(mult):
                    cur = eng._ann_stage(i, n, cur)
                    if not cur:
                        return {}
            return cur
        raise ValueError(f"unknown module structure kind {M.kind!r}")

    def ym_single(self, M: ModuleStructure, a_mono, v_mono, zhi: int):
        """Cached Y_M(a,x) on a single monomial, exact through zhi."""
        key = (M.key(), a_mono, v_mono)
        hit = self._ym_cache.get(key)
        if hit is not None and hit[0] >= zhi:
            return hit[1]
        xd = self.ym_mono_xd(M, a_mono, {0: {v_mono: mpq(1)}}, zhi)
        self._ym_cache[key] = (zhi, xd)
        return xd

    def ym_apply_xd(self, M: ModuleStructure, a: State, v: State, zhi: int):
        out = {}
        for a_mono, ca in a.terms.items():
            for v_mono, cv in v.terms.items():
                cur = self.ym_single(M, a_mono, v_mono, zhi)
                c0 = ca * cv
                for e, row in cur.items():
                    if e > zhi:
                        continue
                    for mono, c in row.items():
                        _xd_add(out, e, mono, c * c0)
        return _xd_clean(out)

    def ym_apply(self, M: ModuleStructure, a: State, v: State, lo: int, hi: int) -> SeriesState:
        xd = self.ym_apply_xd(M, a, v, hi)
        return SeriesState("x", {e: State(r) for e, r in xd.items() if lo <= e <= hi}, lo, hi)

    # -- smash product field ----------------------------------------------

    def smash_apply_xd(self, M: ModuleStructure, u_mono, h_mono, v: State, k: State,
                       hi: int, left_alg: str = "VL"):
        """Y#(u (x) h, x)(v (x) k): tensor-state x-dict, exact through hi."""
        eng = self.eng
        out = {}
        cp = coproduct(State.monomial(h_mono))
        top = max((self._top_bound(State.monomial(u_mono), v, left_alg)), 0)
        for (h1, h2), c in cp.terms.items():
            inner = self.ym_mono_xd(M, h1, {0: dict(v.terms)}, hi + top + 1)
            right = eng.apply_field("BL", State.monomial(h2), k, hi)
            for e1, row1 in inner.items():
                left = eng.apply_field(left_alg, State.monomial(u_mono), State(row1), hi - min(e1, 0))
                for e2, row2 in left.items():
                    for e3, row3 in right.items():
                        e = e1 + e2 + e3
                        if e > hi:
                            continue
                        for mL, cL in row2.items():
                            for mR, cR in row3.items():
                                _xd_add(out, e, (mL, mR), c * cL * cR)
        return _xd_clean(out)

    def _top_bound(self, u: State, v: State, alg: str) -> int:
        """Upper bound for the x-support of Y_alg(u, x)(anything built from v)."""
        return max(self.eng.product_top(u, v, alg) + 1, 0)

    # -- deformed vertex operators -----------------------------------------

    def deformed_xd(self, M: ModuleStructure, u: State, v: State, hi: int,
                    base: str = "VL", base_apply=None):
        """D(Y)(u, x)v = sum Y(u_(1), x) Y_M(u_(2), x) v, exact through hi."""
        out = {}
        cacheable = base_apply is None
        for u_mono, cu in u.terms.items():
            for v_mono, cv in v.terms.items():
                xd = self._deformed_single(M, u_mono, v_mono, hi, base, base_apply) \
                    if cacheable else \
                    self._deformed_single_raw(M, u_mono, v_mono, hi, base, base_apply)
                c0 = cu * cv
                for e, row in xd.items():
                    if e > hi:
                        continue
                    for mono, cc in row.items():
                        _xd_add(out, e, mono, cc * c0)
        return _xd_clean(out)

    def _deformed_single(self, M, u_mono, v_mono, hi, base, base_apply):
        key = (M.key(), u_mono, v_mono, base)
        hit = self._def_cache.get(key)
        if hit is not None and hit[0] >= hi:
            return hit[1]
        xd = self._deformed_single_raw(M, u_mono, v_mono, hi, base, base_apply)
        self._def_cache[key] = (hi, xd)
        return xd

    def _deformed_single_raw(self, M, u_mono, v_mono, hi, base, base_apply):
        eng = self.eng
        apply_base = base_apply or (lambda a, w, h: eng.apply_field(base, a, w, h))
        v = State.monomial(v_mono)
        out = {}
        cp = coproduct(State.monomial(u_mono))
        for (u1, u2), c in cp.terms.items():
            top = self._top_bound(State.monomial(u1), v, base)
            inner = self.ym_single(M, u2, v_mono, hi + top)
            for e2, row in inner.items():
                if e2 > hi + top:
                    continue
                left = apply_base(State.monomial(u1), State(row), hi - e2)
                for e1, row1 in left.items():
                    e = e1 + e2
                    if e > hi:
                        continue
                    for mono, cc in row1.items():
                        _xd_add(out, e, mono, cc * c)
        return _xd_clean(out)

    def deformed_series(self, M: ModuleStructure, u: State, v: State, lo: int, hi: int,
                        base: str = "VL") -> SeriesState:
        xd = self.deformed_xd(M, u, v, hi, base=base)
        return SeriesState("x", {e: State(r) for e, r in xd.items() if lo <= e <= hi}, lo, hi)

    def deformed_n_product(self, M: ModuleStructure, u: State, n: int, v: State,
                           base: str = "VL") -> State:
        xd = self.deformed_xd(M, u, v, -n - 1, base=base)
        return State(xd.get(-n - 1, {}))

    def deformed_top(self, u: State, v: State) -> int:
        """n-support bound for deformed products: u^f_m v = 0 for m > bound."""
        # Y_M never raises weight and preserves labels, so the undeformed
        # weight bound applies to the deformed field as well.
        return self.eng.product_top(u, v)

    # -- Yang-Baxter operator ----------------------------------------------

    def s_apply_xd(self, f: DeformationMap, tensor: State, hi: int):
        """S(x) on a tensor state over V (x) V, exact through hi (support >= 0)."""
        out = {}
        for (mv, mu), c in tensor.terms.items():
            xd = self._s_single(f, mv, mu, hi)
            for e, row in xd.items():
                if e > hi:
                    continue
                for key, cc in row.items():
                    _xd_add(out, e, key, cc * c)
        return _xd_clean(out)

    def _s_single(self, f: DeformationMap, mv, mu, hi: int):
        key = (f.key(), mv, mu)
        hit = self._s_cache.get(key)
        if hit is not None and hit[0] >= hi:
            return hit[1]
        M = ModuleStructure.ymf(f)
        Minv = M.inverse()
        out = {}
        rv = coproduct(State.monomial(mv))
        ru = coproduct(State.monomial(mu))
        for (v1, v2), cv in rv.terms.items():
            for (u1, u2), cu in ru.terms.items():
                a = self.ym_single(M, u2, v1, hi)
                if not a:
                    continue
                b = self.ym_single(Minv, v2, u1, hi)
                for e1, row1 in a.items():
                    if e1 > hi:
                        continue
                    sgn = mpq((-1) ** (e1 % 2))  # Y_M at -x
                    for e2, row2 in b.items():
                        e = e1 + e2
                        if e > hi:
                            continue
                        for m1, c1 in row1.items():
                            for m2, c2 in row2.items():
                                _xd_add(out, e, (m1, m2), cv * cu * sgn * c1 * c2)
        out = _xd_clean(out)
        self._s_cache[key] = (hi, out)
        return out

    def s_apply(self, f: DeformationMap, tensor: State, lo: int, hi: int):
        xd = self.s_apply_xd(f, tensor, hi)
        coeffs = {e: State(r, tags=tensor.tags) for e, r in xd.items() if lo <= e <= hi}
        return SeriesState("x", coeffs, lo, hi)


# ---- group action and averaging -------------------------------------------


def r_apply(lat: Lattice, g: Isometry, v: State, field=None) -> State:
    """R(g) = chi(g)^{L(0)} g: matrix action on modes, e_b -> e_{gb}, weight scaling."""
    out = {}
    chi = g.chi
    for (pairs, beta), c in v.terms.items():
        wt = mono_weight(lat, ((pairs, beta)))
        scale = _pow_signed(chi, wt)
        images = [((), scale * c)]
        for (i, n), mult in pairs:
            col = [g.matrix[j][i] for j in range(lat.rank)]
            for _ in range(mult):
                nxt = []
                for mods, coeff in images:
                    for j, gj in enumerate(col):
                        if gj:
                            nxt.append((mods + ((j, n),), coeff * gj))
                images = nxt
        gb = g.apply(beta)
        for mods, coeff in images:
            d = {}
            for key in mods:
                d[key] = d.get(key, 0) + 1
            mono = (tuple(sorted(d.items())), gb)
            out[mono] = out.get(mono, 0) + coeff
    return State({m: c for m, c in out.items() if c})


def _pow_signed(x, k: int):
    if k >= 0:
        out = mpq(1)
        for _ in range(k):
            out = out * x
        return out
    inv = mpq(1) / x if not hasattr(x, "field") else x.field.one() / x
    return _pow_signed(inv, -k)


def _int_matrix_inverse(m):
    """Inverse of a unimodular integer matrix via adjugate."""
    n = len(m)
    from .lattice import _det
    det = _det([list(r) for r in m])
    if det not in (1, -1):
        raise ScalarNotRepresentable("isometry matrix is not unimodular")
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[m[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            cof = _det(minor) * (-1) ** (i + j) if minor else 1
            adj[j][i] = cof * det  # det is +-1
    return tuple(tuple(row) for row in adj)


def eta_average(raw: DeformationMap, group: list, lat: Lattice) -> DeformationMap:
    """Average a raw map into a G-equivariant one:

    eta(a, x) = sum_sigma (sigma (x) 1) raw(sigma^{-1} a, chi(sigma^{-1}) x).
    """
    rank = raw.rank
    acc = {}
    for sigma in group:
        inv = _int_matrix_inverse(sigma.matrix)
        chi_inv = mpq(1) / sigma.chi if not hasattr(sigma.chi, "field") \
            else sigma.chi.field.one() / sigma.chi
        for i in range(rank):
            # sigma^{-1} a_i = sum_k inv[k][i] a_k
            for k in range(rank):
                cki = inv[k][i]
                if not cki:
                    continue
                for (src, j), p in raw.entries.items():
                    if src != k:
                        continue
                    q = poly_scale_var(p, chi_inv)
                    # apply sigma to the target basis vector a_j
                    for l in range(rank):
                        slj = sigma.matrix[l][j]
                        if slj:
                            key = (i, l)
                            acc[key] = poly_add(acc.get(key, {}),
                                                poly_scale(q, mpq(cki * slj)))
    return DeformationMap(rank, acc)


def eta_equivariant(f: DeformationMap, group: list, lat: Lattice) -> bool:
    """Check (sigma (x) 1) f(h, x) = f(sigma h, chi(sigma) x) on basis vectors."""
    rank = f.rank
    for sigma in group:
        for i in range(rank):
            lhs = {}
            for (src, j), p in f.entries.items():
                if src != i:
                    continue
                for l in range(rank):
                    slj = sigma.matrix[l][j]
                    if slj:
                        lhs[l] = poly_add(lhs.get(l, {}), poly_scale(p, mpq(slj)))
            rhs = {}
            for k in range(rank):
                cki = sigma.matrix[k][i]
                if not cki:
                    continue
                for (src, j), p in f.entries.items():
                    if src != k:
                        continue
                    q = poly_scale_var(poly_scale(p, mpq(cki)), sigma.chi)
                    rhs[j] = poly_add(rhs.get(j, {}), q)
            lhs = {k: v for k, v in lhs.items() if v}
            rhs = {k: v for k, v in rhs.items() if v}
            if lhs != rhs:
                return False
    return True
