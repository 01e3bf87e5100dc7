"""Identity suites: coefficientwise verification over configured samples.

Every check compares exactly computed coefficients; a failing record carries
the first offending coefficient (monomial and exponents).  Suites draw their
samples deterministically from the configured pools, so reports are
byte-identical across runs.
"""

from __future__ import annotations

import random
import time
from math import factorial

from .deform import (DeformationMap, Deformer, ModuleStructure, eta_average,
                     eta_equivariant, r_apply)
from .errors import ConfigInvalid
from .fock import (State, basis_states, coproduct, counit, derive_b,
                   mono_weight, mul_bl, mul_bleps, render_mono, render_state,
                   vacuum_mono, weight_decompose)
from .lattice import Isometry, isometry_validate, vec_add, vec_neg
from .phicalc import (BivarFunction, associate_expand, cphi_member,
                      phi_r_closed, pi_phi, subst_phi, two_sided_symmetry)
from .scalars import mpq, render_scalar
from .series import LaurentSeries, X1_MAJOR, binom_int
from .vertex import Engine, _xd_add, _xd_clean


class Check:
    __slots__ = ("suite", "instance", "status", "expected", "actual", "location", "ms")

    def __init__(self, suite, instance, status, expected="", actual="", location="", ms=0.0):
        self.suite = suite
        self.instance = instance
        self.status = status
        self.expected = expected
        self.actual = actual
        self.location = location
        self.ms = ms


def _ok(suite, instance):
    return Check(suite, instance, "pass")


def _fail(suite, instance, expected, actual, location):
    return Check(suite, instance, "fail",
                 expected=render_state(expected) if isinstance(expected, State) else str(expected),
                 actual=render_state(actual) if isinstance(actual, State) else str(actual),
                 location=location)


class Context:
    """Everything a suite needs: lattice, engines, maps, pools, truncations."""

    def __init__(self, lat, field, fmaps, group, trunc, samples):
        self.lat = lat
        self.field = field
        self.eng = Engine(lat)
        self.D = Deformer(self.eng)
        self.fmaps = fmaps          # name -> DeformationMap
        self.group = group          # list of Isometry
        self.trunc = trunc          # xlo, xhi, zorder, maxWeight, coordBox
        self.samples = samples      # seed, pairs, triples, tensorTriples
        self.pool = [State.monomial(m)
                     for m in basis_states(lat, trunc["maxWeight"], trunc["coordBox"])]
        self.gens = self._generators()
        self.core_gens = self._core_generators()

    def _generators(self):
        lat = self.lat
        out = []
        for i in range(lat.rank):
            mono = ((((i, 1), 1),), (0,) * lat.rank)
            out.append((f"h{i + 1}", State.monomial(mono)))
        for beta in lat.coord_box(self.trunc["coordBox"]):
            if any(beta) and lat.norm2(beta) // 2 <= self.trunc["maxWeight"]:
                out.append((f"e{list(beta)}", State.monomial(((), beta))))
        return out

    def _core_generators(self):
        lat = self.lat
        out = []
        for i in range(lat.rank):
            mono = ((((i, 1), 1),), (0,) * lat.rank)
            out.append((f"h{i + 1}", State.monomial(mono)))
        for i in range(lat.rank):
            for sgn in (1, -1):
                beta = tuple(sgn if k == i else 0 for k in range(lat.rank))
                out.append((f"e{list(beta)}", State.monomial(((), beta))))
        return out

    def rng(self):
        return random.Random(self.samples.get("seed", 0))

    def window(self):
        return self.trunc["xlo"], self.trunc["xhi"]

    def sample_pairs(self, count, pool=None):
        pool = pool if pool is not None else self.pool
        rng = self.rng()
        return [(rng.randrange(len(pool)), rng.randrange(len(pool))) for _ in range(count)]

    def sample_triples(self, count, pool=None):
        pool = pool if pool is not None else self.pool
        rng = self.rng()
        return [(rng.randrange(len(pool)), rng.randrange(len(pool)), rng.randrange(len(pool)))
                for _ in range(count)]


# ---------------------------------------------------------------------------
# shared 2-variable helpers


class OpProd:
    """Y(u,x1)Y(v,x2)w with exact lazy coefficients (per algebra/field)."""

    def __init__(self, eng, u, v, w, hi1, hi2, apply_u=None, apply_v=None):
        self.eng = eng
        self.hi1 = hi1
        ap_v = apply_v or (lambda a, s, h: eng.apply_field("VL", a, s, h))
        self.apply_u = apply_u or (lambda a, s, h: eng.apply_field("VL", a, s, h))
        self.u = u
        self.inner = ap_v(v, w, hi2)
        self.outer = {}

    def x2_support(self):
        return sorted(self.inner)

    def coeff(self, i, j):
        if j not in self.inner:
            return State()
        if j not in self.outer:
            self.outer[j] = self.apply_u(self.u, State(self.inner[j]), self.hi1)
        return State(self.outer[j].get(i, {}))


def _first_diff(lhs: State, rhs: State):
    for mono in sorted(set(lhs.terms) | set(rhs.terms)):
        a = lhs.terms.get(mono, 0)
        b = rhs.terms.get(mono, 0)
        if a != b:
            return mono, b, a
    return None


def _compare_states(suite, instance, got: State, want: State, location):
    d = _first_diff(got, want)
    if d is None:
        return None
    mono, w, g = d
    return Check(suite, instance, "fail",
                 expected=render_scalar(w), actual=render_scalar(g),
                 location=f"{location} monomial {render_mono(mono)}")


# ---------------------------------------------------------------------------
# suite: heisenberg


def suite_heisenberg(ctx: Context):
    out = []
    lat = ctx.lat
    bound = min(4, max(2, ctx.trunc["maxWeight"]))
    basis = [tuple(1 if k == i else 0 for k in range(lat.rank)) for i in range(lat.rank)]
    samples = ctx.pool[: max(24, len(ctx.pool) // 4)]
    from .fock import heis_act
    for i, hi in enumerate(basis):
        for j, hj in enumerate(basis):
            inst = f"[h{i + 1}(m), h{j + 1}(n)] = m delta <h,h> on {len(samples)} states"
            bad = None
            for m in range(-bound, bound + 1):
                for n in range(-bound, bound + 1):
                    for v in samples:
                        lhs = heis_act(lat, hi, m, heis_act(lat, hj, n, v)) - \
                            heis_act(lat, hj, n, heis_act(lat, hi, m, v))
                        want = v.scale(mpq(m * lat.gram[i][j])) if m + n == 0 else State()
                        bad = _compare_states("heisenberg", inst, lhs, want,
                                              f"m={m} n={n}")
                        if bad:
                            out.append(bad)
                            break
                    if bad:
                        break
                if bad:
                    break
            if not bad:
                out.append(_ok("heisenberg", inst))
    return out


# ---------------------------------------------------------------------------
# suite: cocycle


def suite_cocycle(ctx: Context):
    out = []
    lat = ctx.lat
    box = lat.coord_box(min(3, max(2, ctx.trunc["coordBox"] + 1)))
    ok = True
    inst = "2-cocycle identity eps(a,b+c)eps(b,c) = eps(a+b,c)eps(a,b)"
    for a in box:
        for b in box:
            for c in box:
                l = lat.epsilon_sign(a, vec_add(b, c)) * lat.epsilon_sign(b, c)
                r = lat.epsilon_sign(vec_add(a, b), c) * lat.epsilon_sign(a, b)
                if l != r:
                    out.append(Check("cocycle", inst, "fail", str(r), str(l),
                                     f"a={a} b={b} c={c}"))
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            break
    if ok:
        out.append(_ok("cocycle", inst))
    inst = "commutator condition eps(a,b)/eps(b,a) = (-1)^<a,b>"
    ok = True
    for a in box:
        for b in box:
            want = (-1) ** (lat.pairing(a, b) % 2)
            got = lat.epsilon_sign(a, b) * lat.epsilon_sign(b, a)
            if got != want:
                out.append(Check("cocycle", inst, "fail", str(want), str(got), f"a={a} b={b}"))
                ok = False
                break
        if not ok:
            break
    if ok:
        out.append(_ok("cocycle", inst))
    zero = (0,) * lat.rank
    inst = "eps(a,0) = eps(0,a) = 1"
    bad = [a for a in box if lat.epsilon_sign(a, zero) != 1 or lat.epsilon_sign(zero, a) != 1]
    out.append(_ok("cocycle", inst) if not bad else
               Check("cocycle", inst, "fail", "1", "-1", f"a={bad[0]}"))
    return out


# ---------------------------------------------------------------------------
# suite: va-axioms


def suite_va_axioms(ctx: Context):
    out = []
    eng = ctx.eng
    lat = ctx.lat
    one = State.vacuum(lat.rank)
    xlo, xhi = ctx.window()

    inst = f"vacuum/creation on {len(ctx.pool)} basis states"
    bad = None
    for v in ctx.pool:
        xd = eng.apply_field("VL", v, one, max(2, ctx.trunc["maxWeight"]))
        if any(e < 0 for e in xd):
            e = min(xd)
            bad = Check("va-axioms", inst, "fail", "0", render_state(State(xd[e])),
                        f"Y(v,x)1 at x^{e}, v={render_state(v)}")
            break
        got = State(xd.get(0, {}))
        if got != v:
            bad = _compare_states("va-axioms", inst, got, v, f"x^0 of Y(v,x)1, v={render_state(v)}")
            break
    out.append(bad or _ok("va-axioms", inst))

    rng = ctx.rng()
    pairs = [(rng.randrange(len(ctx.pool)), rng.randrange(len(ctx.pool)))
             for _ in range(min(12, len(ctx.pool) ** 2))]
    inst = f"D-bracket [D, Y(v,x)]w = d/dx Y(v,x)w on {len(pairs)} pairs"
    bad = None
    for iv, iw in pairs:
        v, w = ctx.pool[iv], ctx.pool[iw]
        xd = eng.apply_field("VL", v, w, xhi + 1)
        dv_w = eng.apply_field("VL", v, eng.d_vl(w), xhi)
        for e in range(min(xd, default=0), xhi):
            lhs = eng.d_vl(State(xd.get(e, {}))) - State(dv_w.get(e, {}))
            rhs = State(xd.get(e + 1, {})).scale(mpq(e + 1))
            bad = _compare_states("va-axioms", inst, lhs, rhs,
                                  f"x^{e}, v={render_state(v)}, w={render_state(w)}")
            if bad:
                break
        if bad:
            break
    out.append(bad or _ok("va-axioms", inst))

    inst = f"skew symmetry Y(u,x)v = exp(xD) Y(v,-x)u on {len(pairs)} pairs"
    bad = None
    for iu, iv in pairs:
        u, v = ctx.pool[iu], ctx.pool[iv]
        for e in range(xlo, xhi + 1):
            lhs = eng.n_product(u, -e - 1, v)
            rhs = State()
            kmax = e + eng.product_top(v, u) + 1
            for k in range(0, max(kmax, 0) + 1):
                t = eng.n_product(v, -(e - k) - 1, u)
                if not t.is_zero():
                    sgn = mpq((-1) ** ((e - k) % 2), factorial(k))
                    t = t.scale(sgn)
                    for _ in range(k):
                        t = eng.d_vl(t)
                    rhs = rhs + t
            bad = _compare_states("va-axioms", inst, lhs, rhs,
                                  f"x^{e}, u={render_state(u)}, v={render_state(v)}")
            if bad:
                break
        if bad:
            break
    out.append(bad or _ok("va-axioms", inst))

    # locality on generator pairs, two witness states
    wits = _witnesses(ctx, 2)
    bad = None
    count = 0
    inst_all = "generator locality (x1-x2)^k [Y(u,x1),Y(v,x2)]w = 0"
    for (nu, u) in ctx.gens:
        for (nv, v) in ctx.gens:
            k = _locality_order(ctx, u, v)
            for w in wits:
                count += 1
                bad = _check_locality(ctx, u, v, w, k, "va-axioms",
                                      f"{inst_all}: k={k} u={nu} v={nv}")
                if bad:
                    break
            if bad:
                break
        if bad:
            break
    out.append(bad or _ok("va-axioms", f"{inst_all} on {count} instances"))

    # weak associativity on sampled triples
    ntr = ctx.samples.get("triples", 50)
    triples = ctx.sample_triples(ntr)
    inst = f"weak associativity with computed pole order on {len(triples)} triples"
    bad = None
    for it, (iu, iv, iw) in enumerate(triples):
        u, v, w = ctx.pool[iu], ctx.pool[iv], ctx.pool[iw]
        bad = _check_weak_assoc(ctx, u, v, w, "va-axioms", inst)
        if bad:
            break
    out.append(bad or _ok("va-axioms", inst))
    return out


def _witnesses(ctx, n):
    """Deterministic witness states, lowest weights first, vacuum excluded."""
    out = [v for v in ctx.pool if list(v.terms)[0][0] or any(list(v.terms)[0][1])]
    return out[:n] if out else ctx.pool[:1]


def _locality_order(ctx, u, v):
    """k = max(0, -<a,b>) for lattice generator pairs, 2 for h-h, 1 for h-e."""
    mu = list(u.terms)[0]
    mv = list(v.terms)[0]
    hu, hv = bool(mu[0]), bool(mv[0])
    if hu and hv:
        return 2
    if hu or hv:
        return 1
    return max(0, -ctx.lat.pairing(mu[1], mv[1]))


def _op_grid(eng, alg, u, v, w, hi_outer, hi_inner):
    """{(outer exp, inner exp): row} for Y(u,x1)Y(v,x2)w, exact and complete
    for outer <= hi_outer, inner <= hi_inner."""
    inner = eng.apply_field(alg, v, w, hi_inner)
    grid = {}
    for j, row in inner.items():
        outer = eng.apply_field(alg, u, State(row), hi_outer)
        for i, r in outer.items():
            grid[(i, j)] = r
    return grid


def _check_locality(ctx, u, v, w, k, suite, inst):
    """(x1-x2)^k [Y(u,x1)Y(v,x2) - Y(v,x2)Y(u,x1)] w = 0 on the window."""
    eng = ctx.eng
    xlo, xhi = ctx.window()
    lhs = {}
    for sign, grid in ((1, _op_grid(eng, "VL", u, v, w, xhi, xhi)),
                       (-1, _op_grid(eng, "VL", v, u, w, xhi, xhi))):
        for (i, j), row in grid.items():
            x1e, x2e = (i, j) if sign == 1 else (j, i)
            for t in range(k + 1):
                c = binom_int(k, t) * (-1) ** t * sign
                if not c:
                    continue
                a, b = x1e + k - t, x2e + t
                if xlo <= a <= xhi and xlo <= b <= xhi:
                    for mono, cc in row.items():
                        _xd_add(lhs, (a, b), mono, cc * c)
    lhs = _xd_clean(lhs)
    if lhs:
        (a, b) = sorted(lhs)[0]
        mono = sorted(lhs[(a, b)])[0]
        return Check(suite, inst, "fail", "0", render_scalar(lhs[(a, b)][mono]),
                     f"x1^{a} x2^{b} monomial {render_mono(mono)} w={render_state(w)}")
    return None


def _check_weak_assoc(ctx, u, v, w, suite, inst):
    """(x0+x2)^l Y(u,x0+x2)Y(v,x2)w = (x0+x2)^l Y(Y(u,x0)v,x2)w, l = pole order.

    Binomials expand in nonnegative powers of the second summand.  Both sides
    are assembled by walking the exact operator-product grids once.  The
    substituted side is built from product data on the configured rectangle,
    so (per the conservative window recomputation rules for substitutions)
    the comparison window is the part of the rectangle with x0-exponent +
    x2-exponent <= xhi + l + (inner support minimum).
    """
    eng = ctx.eng
    xlo, xhi = ctx.window()
    topuw = eng.product_top(u, w)
    xd = eng.apply_field("VL", u, w, max(0, topuw) + 1)
    l = max(0, -min(xd, default=0))

    inner = eng.apply_field("VL", v, w, xhi)
    jmin = min(inner, default=0)
    # the rectangle corner needs states of weight ~ (total weight + 2*xhi);
    # bound the total degree so every checked coefficient stays affordable
    total_cap = min(xhi + l + jmin, xhi + 2)

    lhs = {}
    for jp, row in inner.items():
        outer = eng.apply_field("VL", u, State(row), total_cap - l - jp)
        for ap, r in outer.items():
            total = l + ap + jp  # every contribution lands on a + b = total
            for t in range(l + 1):
                cl = binom_int(l, t)
                for b in range(max(xlo, jp + t), xhi + 1):
                    a = total - b
                    if not (xlo <= a <= xhi):
                        continue
                    c = cl * binom_int(ap, b - t - jp)
                    if not c:
                        continue
                    for mono, cc in r.items():
                        _xd_add(lhs, (a, b), mono, cc * c)
    lhs = _xd_clean(lhs)

    rhs = {}
    prods = eng.apply_field("VL", u, v, xhi)
    for m, row in prods.items():
        fld = eng.apply_field("VL", State(row), w, xhi)
        for e2, r in fld.items():
            for t in range(l + 1):
                c = binom_int(l, t)
                a, b = m + l - t, e2 + t
                if xlo <= a <= xhi and xlo <= b <= xhi and c:
                    for mono, cc in r.items():
                        _xd_add(rhs, (a, b), mono, cc * c)
    rhs = _xd_clean(rhs)

    keys = {k for k in set(lhs) | set(rhs) if k[0] + k[1] <= total_cap}
    for keypair in sorted(keys):
        a, b = keypair
        bad = _compare_states(suite, inst, State(lhs.get(keypair, {})),
                              State(rhs.get(keypair, {})),
                              f"x0^{a} x2^{b} u={render_state(u)} v={render_state(v)} "
                              f"w={render_state(w)}")
        if bad:
            return bad
    return None


# ---------------------------------------------------------------------------
# suite: AL1-7


def suite_al(ctx: Context):
    out = []
    eng = ctx.eng
    lat = ctx.lat
    xlo, xhi = ctx.window()
    wits = _witnesses(ctx, 2)
    basis = [tuple(1 if k == i else 0 for k in range(lat.rank)) for i in range(lat.rank)]
    hstates = [State.monomial(((((i, 1), 1),), (0,) * lat.rank)) for i in range(lat.rank)]
    estates = [(beta, State.monomial(((), beta)))
               for beta in lat.coord_box(ctx.trunc["coordBox"])
               if lat.norm2(beta) // 2 <= ctx.trunc["maxWeight"]]

    # AL1: the zero-label lattice field is the identity
    inst = "e_0[z] = 1"
    bad = None
    e0 = State.monomial(((), (0,) * lat.rank))
    for w in wits:
        xd = eng.apply_field("VL", e0, w, xhi)
        got = State(xd.get(0, {}))
        if got != w or any(e != 0 for e in xd):
            bad = Check("AL1-7", inst, "fail", render_state(w),
                        render_state(got), "x^0")
            break
    out.append(bad or _ok("AL1-7", inst))

    # AL2: [h[z1], h'[z2]] = <h,h'> d/dz2 z1^-1 delta(z2/z1)
    inst = "[h[z1],h'[z2]] = <h,h'> d_z2 delta"
    bad = None
    for i, hi_ in enumerate(hstates):
        for j, hj in enumerate(hstates):
            for w in wits[:1]:
                A = OpProd(eng, hi_, hj, w, xhi + 1, xhi + 1)
                B = OpProd(eng, hj, hi_, w, xhi + 1, xhi + 1)
                for a in range(xlo, xhi + 1):
                    for b in range(xlo, xhi + 1):
                        lhs = A.coeff(a, b) - B.coeff(b, a)
                        if b == -a - 2:
                            want = w.scale(mpq((-a - 1) * lat.gram[i][j]))
                        else:
                            want = State()
                        bad = _compare_states("AL1-7", inst, lhs, want,
                                              f"z1^{a} z2^{b} h{i+1} h{j+1}")
                        if bad:
                            break
                    if bad:
                        break
                if bad:
                    break
            if bad:
                break
        if bad:
            break
    out.append(bad or _ok("AL1-7", inst))

    # AL3: [h[z1], e_a[z2]] = <a,h> e_a[z2] z1^-1 delta(z2/z1)
    inst = "[h[z1],e_a[z2]] = <a,h> e_a[z2] delta"
    bad = None
    for i, hi_ in enumerate(hstates):
        for beta, eb in estates[: 6]:
            pair = lat.pairing(beta, basis[i])
            for w in wits[:1]:
                A = OpProd(eng, hi_, eb, w, xhi + 1, xhi + 1)
                B = OpProd(eng, eb, hi_, w, xhi + 1, xhi + 1)
                ef = eng.apply_field("VL", eb, w, 2 * xhi + 2)
                for a in range(xlo, xhi + 1):
                    for b in range(xlo, xhi + 1):
                        lhs = A.coeff(a, b) - B.coeff(b, a)
                        want = State(ef.get(a + b + 1, {})).scale(mpq(pair))
                        bad = _compare_states("AL1-7", inst, lhs, want,
                                              f"z1^{a} z2^{b} h{i+1} e{list(beta)}")
                        if bad:
                            break
                    if bad:
                        break
                if bad:
                    break
            if bad:
                break
        if bad:
            break
    out.append(bad or _ok("AL1-7", inst))

    # AL4 / AL5: lattice-lattice locality at the stated order
    inst = "(z1-z2)^max(0,-<a,b>) [e_a[z1], e_b[z2]] = 0"
    bad = None
    npairs = 0
    for beta, eb in estates:
        for gamma, eg in estates:
            k = max(0, -lat.pairing(beta, gamma))
            npairs += 1
            bad = _check_locality(ctx, eb, eg, wits[0], k, "AL1-7",
                                  f"{inst}: a={list(beta)} b={list(gamma)}")
            if bad:
                break
        if bad:
            break
    out.append(bad or _ok("AL1-7", f"{inst} on {npairs} pairs"))

    # AL6: d_z e_a[z] = a[z]^+ e_a[z] + e_a[z] a[z]^-
    inst = "d_z e_a[z] = :a[z] e_a[z]:"
    bad = None
    for beta, eb in estates[: 8]:
        if not any(beta):
            continue
        for w in wits:
            xd = eng.apply_field("VL", eb, w, xhi + 2)
            for e in range(xlo, xhi + 1):
                lhs = State(xd.get(e + 1, {})).scale(mpq(e + 1))
                rhs = State()
                # a[z]^+ e_a[z]: creation exponents e1 >= 0
                for e2, row in xd.items():
                    e1 = e - e2
                    if e1 >= 0:
                        from .fock import heis_act
                        rhs = rhs + heis_act(lat, beta, -(e1 + 1), State(row))
                # e_a[z] a[z]^-: annihilation first
                from .fock import heis_act
                ann = {}
                for n in range(0, ctx.trunc["maxWeight"] + 1):
                    s = heis_act(lat, beta, n, w)
                    if not s.is_zero():
                        ann[-n - 1] = s
                for e2, s in ann.items():
                    sub = eng.apply_field("VL", eb, s, e - e2)
                    rhs = rhs + State(sub.get(e - e2, {}))
                bad = _compare_states("AL1-7", inst, lhs, rhs,
                                      f"z^{e} a={list(beta)} w={render_state(w)}")
                if bad:
                    break
            if bad:
                break
        if bad:
            break
    out.append(bad or _ok("AL1-7", inst))

    # AL7: Res_x[(x-z)^{-<a,b>-1} e_a[x] e_b[z] - (-z+x)^{-<a,b>-1} e_b[z] e_a[x]]
    #      = eps(a,b) e_{a+b}[z]
    inst = "residue extraction recovers eps(a,b) e_{a+b}[z]"
    bad = None
    npairs = 0
    for beta, eb in estates:
        for gamma, eg in estates:
            npairs += 1
            bad = _check_al7(ctx, beta, gamma, wits[0], inst)
            if bad:
                break
        if bad:
            break
    out.append(bad or _ok("AL1-7", f"{inst} on {npairs} pairs"))
    return out


def _check_al7(ctx, beta, gamma, w, inst):
    eng = ctx.eng
    lat = ctx.lat
    xlo, xhi = ctx.window()
    n = -lat.pairing(beta, gamma) - 1
    eb = State.monomial(((), beta))
    eg = State.monomial(((), gamma))
    ebg = State.monomial(((), vec_add(beta, gamma)))
    target = eng.apply_field("VL", ebg, w, xhi)
    eps = lat.epsilon_sign(beta, gamma)
    lhs = {}
    # first term: Res_x (x-z)^n e_a[x] e_b[z] w, x-major expansion
    inner = eng.apply_field("VL", eg, w, xhi)
    jmin = min(inner, default=0)
    hi_x = max(-1 - n + (xhi - jmin), 0)
    for j, row in inner.items():
        outer = eng.apply_field("VL", eb, State(row), hi_x)
        for i, r in outer.items():
            t = i + n + 1   # x exponent: i + (n - t) = -1
            b = j + t
            if t < 0 or not (xlo <= b <= xhi):
                continue
            c = binom_int(n, t) * (-1) ** (t % 2)
            if not c:
                continue
            for mono, cc in r.items():
                _xd_add(lhs, b, mono, cc * c)
    # second term: -Res_x (-z+x)^n e_b[z] e_a[x] w, nonnegative powers of x
    inner2 = eng.apply_field("VL", eb, w, -1)   # only x exponents <= -1 matter
    jmin2 = min(inner2, default=0)
    hi_z = max(xhi - n - 1 - jmin2, 0)
    for j1, row in inner2.items():
        t = -1 - j1
        if t < 0:
            continue
        c = binom_int(n, t) * (-1) ** ((n - t) % 2)
        if not c:
            continue
        outer = eng.apply_field("VL", eg, State(row), hi_z)
        for i2, r in outer.items():
            b = i2 + n - t
            if xlo <= b <= xhi:
                for mono, cc in r.items():
                    _xd_add(lhs, b, mono, -cc * c)
    lhs = _xd_clean(lhs)
    for b in range(xlo, xhi + 1):
        want = State(target.get(b, {})).scale(mpq(eps))
        bad = _compare_states("AL1-7", inst, State(lhs.get(b, {})), want,
                              f"z^{b} a={list(beta)} b={list(gamma)}")
        if bad:
            return bad
    return None


# ---------------------------------------------------------------------------
# suite: comodule (bialgebra + rho)


def suite_comodule(ctx: Context):
    out = []
    lat = ctx.lat
    eng = ctx.eng
    D = ctx.D
    pool = ctx.pool
    xlo, xhi = ctx.window()

    inst = f"differential bialgebra laws on {len(pool)} states"
    bad = None
    for v in pool:
        cp = coproduct(v)
        # counit laws
        left = State()
        for (m1, m2), c in cp.terms.items():
            left = left + State.monomial(m2, c * counit(State.monomial(m1)))
        if left != v:
            bad = _compare_states("comodule", inst, left, v, f"(counit⊗id)Δ v={render_state(v)}")
            break
        # cocommutativity
        flip = State({(m2, m1): c for (m1, m2), c in cp.terms.items()})
        if flip != cp:
            bad = Check("comodule", inst, "fail", "symmetric", "asymmetric",
                        f"cocommutativity v={render_state(v)}")
            break
        # coassociativity
        l3 = {}
        for (m1, m2), c in cp.terms.items():
            for (m11, m12), c2 in coproduct(State.monomial(m1)).terms.items():
                k = (m11, m12, m2)
                l3[k] = l3.get(k, 0) + c * c2
        r3 = {}
        for (m1, m2), c in cp.terms.items():
            for (m21, m22), c2 in coproduct(State.monomial(m2)).terms.items():
                k = (m1, m21, m22)
                r3[k] = r3.get(k, 0) + c * c2
        if {k: v2 for k, v2 in l3.items() if v2} != {k: v2 for k, v2 in r3.items() if v2}:
            bad = Check("comodule", inst, "fail", "equal", "unequal",
                        f"coassociativity v={render_state(v)}")
            break
        # differential compatibility
        dl = coproduct(derive_b(v))
        dr = State()
        for (m1, m2), c in cp.terms.items():
            for (mm, cc) in derive_b(State.monomial(m1)).terms.items():
                dr = dr + State({(mm, m2): c * cc})
            for (mm, cc) in derive_b(State.monomial(m2)).terms.items():
                dr = dr + State({(m1, mm): c * cc})
        if dl != dr:
            bad = Check("comodule", inst, "fail", "equal", "unequal",
                        f"Delta d = (d⊗1+1⊗d) Delta v={render_state(v)}")
            break
        if counit(derive_b(v)):
            bad = Check("comodule", inst, "fail", "0", "nonzero",
                        f"counit(d v) v={render_state(v)}")
            break
    out.append(bad or _ok("comodule", inst))

    inst = f"comodule axioms on {len(pool)} states"
    bad = None
    for v in pool:
        rho_v = D.rho(v)
        back = State()
        for (m1, m2), c in rho_v.terms.items():
            back = back + State.monomial(m1, c * counit(State.monomial(m2)))
        if back != v:
            bad = _compare_states("comodule", inst, back, v, f"(1⊗counit)rho v={render_state(v)}")
            break
        l3 = {}
        for (m1, m2), c in rho_v.terms.items():
            for (m11, m12), c2 in D.rho(State.monomial(m1)).terms.items():
                k = (m11, m12, m2)
                l3[k] = l3.get(k, 0) + c * c2
        r3 = {}
        for (m1, m2), c in rho_v.terms.items():
            for (m21, m22), c2 in coproduct(State.monomial(m2)).terms.items():
                k = (m1, m21, m22)
                r3[k] = r3.get(k, 0) + c * c2
        if {k: x for k, x in l3.items() if x} != {k: x for k, x in r3.items() if x}:
            bad = Check("comodule", inst, "fail", "equal", "unequal",
                        f"(rho⊗1)rho = (1⊗Delta)rho v={render_state(v)}")
            break
    out.append(bad or _ok("comodule", inst))

    npairs = ctx.samples.get("pairs", 20)
    pairs = ctx.sample_pairs(npairs)
    for name, alg in (("V_L", "VL"), ("B_L_eps", "BLeps")):
        inst = f"rho is a homomorphism into {name} ⊗ B_L on {len(pairs)} pairs"
        bad = None
        for iu, iv in pairs:
            u, v = pool[iu], pool[iv]
            bad = _check_rho_hom(ctx, u, v, alg, inst)
            if bad:
                break
        out.append(bad or _ok("comodule", inst))

    inst = "weight additivity and grading of Delta"
    bad = None
    for iu, iv in pairs[:10]:
        u, v = pool[iu], pool[iv]
        wu = mono_weight(lat, list(u.terms)[0])
        wv = mono_weight(lat, list(v.terms)[0])
        prod = mul_bl(u, v)
        for m in prod.terms:
            if mono_weight(lat, m) != wu + wv:
                bad = Check("comodule", inst, "fail", str(wu + wv),
                            str(mono_weight(lat, m)), render_mono(m))
                break
        if bad:
            break
    out.append(bad or _ok("comodule", inst))
    return out


def _check_rho_hom(ctx, u, v, alg, inst):
    """rho(Y(u,x)v) = (Y_alg ⊗ Y_BL)(rho u, x) rho v coefficientwise."""
    eng = ctx.eng
    D = ctx.D
    xlo, xhi = ctx.window()
    lhs_xd = eng.apply_field(alg, u, v, xhi)
    rho_u = D.rho(u, source=alg)
    rho_v = D.rho(v, source=alg)
    rhs = {}
    for (u1, u2), cu in rho_u.terms.items():
        for (v1, v2), cv in rho_v.terms.items():
            left = eng.apply_field(alg, State.monomial(u1), State.monomial(v1), xhi)
            if not left:
                continue
            right = eng.apply_field("BL", State.monomial(u2), State.monomial(v2),
                                    xhi - min(left))
            for e1, r1 in left.items():
                for e2, r2 in right.items():
                    e = e1 + e2
                    if e > xhi:
                        continue
                    for mL, cL in r1.items():
                        for mR, cR in r2.items():
                            _xd_add(rhs, e, (mL, mR), cu * cv * cL * cR)
    rhs = _xd_clean(rhs)
    for e in range(xlo, xhi + 1):
        want = State(rhs.get(e, {}))
        got = D.rho(State(lhs_xd.get(e, {})), source=alg)
        got = State(got.terms)
        d = _first_diff(got, want)
        if d:
            mono, wv, gv = d
            return Check("comodule", inst, "fail", render_scalar(wv), render_scalar(gv),
                         f"x^{e} tensor {render_mono(mono[0])} ⊗ {render_mono(mono[1])} "
                         f"u={render_state(u)} v={render_state(v)}")
    return None


# ---------------------------------------------------------------------------
# suite: module (per deformation map)


def _bl_generator_pool(ctx):
    """Small B_L elements: group-likes, modes, and products."""
    lat = ctx.lat
    out = []
    for i in range(lat.rank):
        out.append(State.monomial(((((i, 1), 1),), (0,) * lat.rank)))
        out.append(State.monomial(((((i, 2), 1),), (0,) * lat.rank)))
    for beta in lat.coord_box(1):
        if any(beta):
            out.append(State.monomial(((), beta)))
            out.append(State.monomial(((((0, 1), 1),), beta)))
    out.append(State.monomial(((((0, 1), 2),), (0,) * lat.rank)))
    return out


def suite_module(ctx: Context):
    out = []
    lat = ctx.lat
    one = State.vacuum(lat.rank)
    zorder = ctx.trunc["zorder"]
    xlo, xhi = ctx.window()
    bl_pool = _bl_generator_pool(ctx)
    vs = _witnesses(ctx, 3)

    for fname, f in ctx.fmaps.items():
        M = ModuleStructure.ymf(f)
        inst = f"[{fname}] vacuum: Y_M(a,x)1 = counit(a) 1"
        bad = None
        for a in bl_pool:
            xd = ctx.D.ym_apply_xd(M, a, one, zorder)
            got = State(xd.get(0, {}))
            rest = {e: row for e, row in xd.items() if e != 0}
            want = one.scale(counit(a))
            if rest or got != want:
                bad = _compare_states("module", inst, got, want, f"a={render_state(a)}")
                break
        out.append(bad or _ok("module", inst))

        inst = f"[{fname}] module axiom Y_M(Y_BL(a,z)b,x) = Y_M(a,x+z)Y_M(b,x)"
        bad = None
        for a in bl_pool[:4]:
            for b in bl_pool[:4]:
                for v in vs[:1]:
                    bad = _check_module_axiom(ctx, M, a, b, v, inst)
                    if bad:
                        break
                if bad:
                    break
            if bad:
                break
        out.append(bad or _ok("module", inst))

        inst = f"[{fname}] H-module axiom on generator triples"
        bad = None
        for a in bl_pool[:3]:
            for (nu, u) in ctx.core_gens[: 3]:
                for v in vs[:1]:
                    bad = _check_hmodule_axiom(ctx, M, a, u, v, inst)
                    if bad:
                        break
                if bad:
                    break
            if bad:
                break
        out.append(bad or _ok("module", inst))

        inst = f"[{fname}] convolution inverse Y_M^f * Y_M^-f = Y_M^eps"
        bad = None
        conv = ModuleStructure.convolve(M, M.inverse())
        for a in bl_pool:
            for v in vs[:2]:
                xd = ctx.D.ym_apply_xd(conv, a, v, zorder)
                want = v.scale(counit(a))
                got = State(xd.get(0, {}))
                rest = {e: row for e, row in xd.items() if e != 0 and row}
                if rest:
                    e = sorted(rest)[0]
                    bad = Check("module", inst, "fail", "0",
                                render_state(State(rest[e])), f"x^{e} a={render_state(a)}")
                    break
                bad = _compare_states("module", inst, got, want, f"a={render_state(a)}")
                if bad:
                    break
            if bad:
                break
        out.append(bad or _ok("module", inst))
    return out


def _check_module_axiom(ctx, M, a, b, v, inst):
    """Y_M(Y_BL(a,z)b, x)v = Y_M(a,x+z)Y_M(b,x)v on the (x,z) grid."""
    eng = ctx.eng
    D = ctx.D
    xlo, xhi = ctx.window()
    zorder = ctx.trunc["zorder"]
    lhs = {}
    prod = eng.apply_field("BL", a, b, zorder)
    for ez, row in prod.items():
        xd = D.ym_apply_xd(M, State(row), v, xhi)
        for ex, r in xd.items():
            for mono, c in r.items():
                _xd_add(lhs, (ex, ez), mono, c)
    lhs = _xd_clean(lhs)
    rhs = {}
    inner = D.ym_apply_xd(M, b, v, xhi + zorder + 2)
    for ex0, row in inner.items():
        outer = D.ym_apply_xd(M, a, State(row), xhi + zorder + 2 - min(ex0, 0))
        for c_exp, r in outer.items():
            # substitute t -> x+z in nonnegative powers of z
            for i in range(0, zorder + 1):
                coef = binom_int(c_exp, i)
                if not coef:
                    continue
                key = (c_exp - i + ex0, i)
                for mono, c in r.items():
                    _xd_add(rhs, key, mono, c * coef)
    rhs = _xd_clean(rhs)
    for ex in range(xlo, xhi + 1):
        for ez in range(0, ctx.trunc["zorder"] + 1):
            got = State(lhs.get((ex, ez), {}))
            want = State(rhs.get((ex, ez), {}))
            bad = _compare_states("module", inst, got, want,
                                  f"x^{ex} z^{ez} a={render_state(a)} b={render_state(b)} "
                                  f"v={render_state(v)}")
            if bad:
                return bad
    return None


def _check_hmodule_axiom(ctx, M, h, u, v, inst):
    """Y_M(h,x1)Y(u,x2)v = sum Y(Y_M(h1,x1-x2)u,x2)Y_M(h2,x1)v.

    The module series have nonnegative support, so the substituted side is
    exact on the part of the window rectangle with x1-exp + x2-exp <= xhi.
    """
    eng = ctx.eng
    D = ctx.D
    xlo, xhi = ctx.window()
    total_cap = xhi
    inner = eng.apply_field("VL", u, v, xhi)
    lhs = {}
    for e2, row in inner.items():
        xd = D.ym_apply_xd(M, h, State(row), xhi)
        for e1, r in xd.items():
            for mono, c in r.items():
                _xd_add(lhs, (e1, e2), mono, c)
    lhs = _xd_clean(lhs)
    rhs = {}
    cp = coproduct(h)
    for (h1, h2), chh in cp.terms.items():
        S2 = D.ym_apply_xd(M, State.monomial(h2), v, xhi)
        if not S2:
            continue
        dmin = min(S2)
        t_hi = total_cap - dmin + 2
        F = D.ym_apply_xd(M, State.monomial(h1), u, t_hi)
        for c_exp, Frow in F.items():
            uprime = State(Frow)
            for d, S2row in S2.items():
                # x1 = (c_exp - s) + d, x2 = base + s; a+b <= cap bounds depth
                base = eng.apply_field("VL", uprime, State(S2row),
                                       total_cap - c_exp - d)
                for s in range(0, c_exp + 1) if c_exp >= 0 else ():
                    coef = binom_int(c_exp, s) * (-1) ** (s % 2)
                    if not coef:
                        continue
                    for b2, r2 in base.items():
                        key = (c_exp - s + d, b2 + s)
                        for mono, c in r2.items():
                            _xd_add(rhs, key, mono, c * coef * chh)
    rhs = _xd_clean(rhs)
    for a in range(xlo, xhi + 1):
        for b in range(xlo, xhi + 1):
            if a + b > total_cap:
                continue
            got = State(lhs.get((a, b), {}))
            want = State(rhs.get((a, b), {}))
            bad = _compare_states("module", inst, got, want,
                                  f"x1^{a} x2^{b} h={render_state(h)} u={render_state(u)} "
                                  f"v={render_state(v)}")
            if bad:
                return bad
    return None


def _label(s: State):
    return list(s.terms)[0][1]


def _wt(ctx, s: State):
    return max(mono_weight(ctx.lat, m) for m in s.terms)


# ---------------------------------------------------------------------------
# suite: compat


def suite_compat(ctx: Context):
    out = []
    zorder = ctx.trunc["zorder"]
    bl_pool = _bl_generator_pool(ctx)
    for fname, f in ctx.fmaps.items():
        M = ModuleStructure.ymf(f)
        inst = f"[{fname}] rho(Y_M(h,x)v) = (Y_M(h,x)⊗1) rho(v)"
        bad = None
        for h in bl_pool:
            for v in ctx.pool[: 20]:
                xd = ctx.D.ym_apply_xd(M, h, v, zorder)
                rv = ctx.D.rho(v)
                rhs = {}
                for (v1, v2), c in rv.terms.items():
                    sub = ctx.D.ym_apply_xd(M, h, State.monomial(v1), zorder)
                    for e, row in sub.items():
                        for mono, cc in row.items():
                            _xd_add(rhs, e, (mono, v2), c * cc)
                rhs = _xd_clean(rhs)
                for e in set(xd) | set(rhs):
                    got = ctx.D.rho(State(xd.get(e, {})))
                    want = State(rhs.get(e, {}))
                    d = _first_diff(State(got.terms), want)
                    if d:
                        mono, wv, gv = d
                        bad = Check("compat", inst, "fail", render_scalar(wv),
                                    render_scalar(gv),
                                    f"x^{e} h={render_state(h)} v={render_state(v)}")
                        break
                if bad:
                    break
            if bad:
                break
        out.append(bad or _ok("compat", inst))
    return out


# ---------------------------------------------------------------------------
# suite: convolution


def suite_convolution(ctx: Context):
    out = []
    zorder = ctx.trunc["zorder"]
    bl_pool = _bl_generator_pool(ctx)
    names = list(ctx.fmaps)
    # identity law
    inst = "Y_M^eps is the convolution identity"
    bad = None
    Meps = ModuleStructure.ym_eps()
    for fname in names[:2]:
        M = ModuleStructure.ymf(ctx.fmaps[fname])
        for a in bl_pool[:6]:
            for v in ctx.pool[:6]:
                l = ctx.D.ym_apply_xd(ModuleStructure.convolve(Meps, M), a, v, zorder)
                r = ctx.D.ym_apply_xd(M, a, v, zorder)
                if _xd_clean(l) != _xd_clean(r):
                    bad = Check("convolution", inst, "fail", "equal", "unequal",
                                f"f={fname} a={render_state(a)} v={render_state(v)}")
                    break
            if bad:
                break
        if bad:
            break
    out.append(bad or _ok("convolution", inst))

    # group-like factorization: (Ymf(f) * Ymf(g))(e^a) = e^{<b, f+g>}
    if len(names) >= 2:
        inst = "group-like convolution adds deformation maps"
        bad = None
        f1 = ctx.fmaps[names[1]]
        for fname2 in names[1:]:
            f2 = ctx.fmaps[fname2]
            conv = ModuleStructure.convolve(ModuleStructure.ymf(f1), ModuleStructure.ymf(f2))
            Msum = ModuleStructure.ymf(f1.add(f2))
            for beta in ctx.lat.coord_box(1):
                if not any(beta):
                    continue
                ea = State.monomial(((), beta))
                for v in ctx.pool[:6]:
                    l = _xd_clean(ctx.D.ym_apply_xd(conv, ea, v, zorder))
                    r = _xd_clean(ctx.D.ym_apply_xd(Msum, ea, v, zorder))
                    if l != r:
                        bad = Check("convolution", inst, "fail", "equal", "unequal",
                                    f"f={names[1]}+{fname2} e{list(beta)} v={render_state(v)}")
                        break
                if bad:
                    break
            if bad:
                break
        out.append(bad or _ok("convolution", inst))
    return out


# ---------------------------------------------------------------------------
# suite: deform-thm59


def suite_deform(ctx: Context):
    out = []
    lat = ctx.lat
    eng = ctx.eng
    D = ctx.D
    one = State.vacuum(lat.rank)
    basis = [tuple(1 if k == i else 0 for k in range(lat.rank)) for i in range(lat.rank)]
    hstates = [State.monomial(((((i, 1), 1),), (0,) * lat.rank)) for i in range(lat.rank)]
    elabels = [beta for beta in lat.coord_box(ctx.trunc["coordBox"])
               if lat.norm2(beta) // 2 <= ctx.trunc["maxWeight"]]

    for fname, f in ctx.fmaps.items():
        M = ModuleStructure.ymf(f)

        inst = f"[{fname}] h-h commutator coefficient family"
        bad = None
        for i, a in enumerate(hstates):
            for j, b in enumerate(hstates):
                top = D.deformed_top(a, b)
                for n in range(0, max(top, 1) + 1):
                    got = D.deformed_n_product(M, a, n, b)
                    want = one.scale(mpq(lat.gram[i][j])) if n == 1 else State()
                    bad = _compare_states("deform-thm59", inst, got, want,
                                          f"product index {n} h{i+1} h{j+1}")
                    if bad:
                        break
                if bad:
                    break
            if bad:
                break
        out.append(bad or _ok("deform-thm59", inst))

        inst = f"[{fname}] h-e coefficient family"
        bad = None
        for i, a in enumerate(hstates):
            for beta in elabels[: 8]:
                eb = State.monomial(((), beta))
                top = D.deformed_top(a, eb)
                for n in range(0, max(top, 1) + 1):
                    got = D.deformed_n_product(M, a, n, eb)
                    want = eb.scale(mpq(lat.pairing(basis[i], beta))) if n == 0 else State()
                    bad = _compare_states("deform-thm59", inst, got, want,
                                          f"product index {n} h{i+1} e{list(beta)}")
                    if bad:
                        break
                if bad:
                    break
            if bad:
                break
        out.append(bad or _ok("deform-thm59", inst))

        inst = f"[{fname}] h-e residue identity"
        bad = None
        for beta in elabels:
            if not any(beta):
                continue
            eb = State.monomial(((), beta))
            a = State()
            for i, c in enumerate(beta):
                if c:
                    a = a + State.monomial(((((i, 1), 1),), (0,) * lat.rank), mpq(c))
            got = D.deformed_n_product(M, a, -1, eb)
            fp = f.derive(1).pair(lat, beta, beta)
            want = eng.d_vl(eb) + eb.scale(fp.get(0, 0))
            bad = _compare_states("deform-thm59", inst, got, want, f"e{list(beta)}")
            if bad:
                break
        out.append(bad or _ok("deform-thm59", inst))

        inst = f"[{fname}] e-e coefficient family"
        bad = None
        cnt = 0
        for beta in elabels:
            for gamma in elabels:
                cnt += 1
                ea = State.monomial(((), beta))
                eb = State.monomial(((), gamma))
                n0 = -lat.pairing(beta, gamma) - 1
                top = D.deformed_top(ea, eb)
                for n in range(n0, max(top, n0) + 1):
                    got = D.deformed_n_product(M, ea, n, eb)
                    if n == n0:
                        want = State.monomial(((), vec_add(beta, gamma)),
                                              lat.epsilon(beta, gamma))
                    else:
                        want = State()
                    bad = _compare_states("deform-thm59", inst, got, want,
                                          f"product index {n} e{list(beta)} e{list(gamma)}")
                    if bad:
                        break
                if bad:
                    break
            if bad:
                break
        out.append(bad or _ok("deform-thm59", f"{inst} on {cnt} pairs"))

        # S-locality with explicit twist on generator pairs
        inst = f"[{fname}] S-locality with explicit twist on generator pairs"
        bad = None
        wit = _witnesses(ctx, 1)[0]
        for (nu, u) in ctx.core_gens:
            for (nv, v) in ctx.core_gens:
                k = _locality_order(ctx, u, v)
                bad = _check_s_locality(ctx, M, f, u, v, wit, k, inst)
                if bad:
                    break
            if bad:
                break
        out.append(bad or _ok("deform-thm59", inst))

    # f = 0 reduces the deformation to the plain lattice field
    inst = "zero map deformation equals the undeformed field"
    bad = None
    M0 = ModuleStructure.ymf(DeformationMap.zero(lat.rank))
    xlo, xhi = ctx.window()
    for iu, iv in ctx.sample_pairs(ctx.samples.get("pairs", 20)):
        u, v = ctx.pool[iu], ctx.pool[iv]
        l = D.deformed_xd(M0, u, v, xhi)
        r = eng.apply_field("VL", u, v, xhi)
        if _xd_clean(l) != _xd_clean(r):
            bad = Check("deform-thm59", inst, "fail", "equal", "unequal",
                        f"u={render_state(u)} v={render_state(v)}")
            break
    out.append(bad or _ok("deform-thm59", inst))

    # composition and reconstruction
    names = [n for n in ctx.fmaps if not ctx.fmaps[n].is_zero()]
    if len(names) >= 2:
        f1, f2 = ctx.fmaps[names[0]], ctx.fmaps[names[1]]
    elif names:
        f1 = f2 = ctx.fmaps[names[0]]
    else:
        f1 = f2 = DeformationMap.zero(lat.rank)
    M1, M2 = ModuleStructure.ymf(f1), ModuleStructure.ymf(f2)
    pairs = ctx.sample_pairs(ctx.samples.get("pairs", 20))

    inst = f"deformation composition [{names[:2]}]"
    bad = None
    conv = ModuleStructure.convolve(M1, M2)
    for iu, iv in pairs:
        u, v = ctx.pool[iu], ctx.pool[iv]
        base2 = lambda a, w, h: D.deformed_xd(M2, a, w, h)
        l = D.deformed_xd(M1, u, v, xhi, base_apply=base2)
        r = D.deformed_xd(conv, u, v, xhi)
        if _xd_clean(l) != _xd_clean(r):
            bad = Check("deform-thm59", inst, "fail", "equal", "unequal",
                        f"u={render_state(u)} v={render_state(v)}")
            break
    out.append(bad or _ok("deform-thm59", inst))

    inst = "inverse reconstruction of the undeformed field"
    bad = None
    Minv = M1.inverse()
    for iu, iv in pairs:
        u, v = ctx.pool[iu], ctx.pool[iv]
        rhs = {}
        for (u1, u2), c in coproduct(u).terms.items():
            inner = D.ym_apply_xd(Minv, State.monomial(u2), v, xhi + _wt(ctx, u) + _wt(ctx, v) + 4)
            for e2, row in inner.items():
                sub = D.deformed_xd(M1, State.monomial(u1), State(row), xhi - e2)
                for e1, r in sub.items():
                    for mono, cc in r.items():
                        _xd_add(rhs, e1 + e2, mono, c * cc)
        rhs = _xd_clean(rhs)
        lhs = eng.apply_field("VL", u, v, xhi)
        for e in range(xlo, xhi + 1):
            bad = _compare_states("deform-thm59", inst, State(rhs.get(e, {})),
                                  State(lhs.get(e, {})),
                                  f"x^{e} u={render_state(u)} v={render_state(v)}")
            if bad:
                break
        if bad:
            break
    out.append(bad or _ok("deform-thm59", inst))

    # S-Jacobi on composite pairs (engine-computed data, both routes)
    inst = "delta-coefficient identity on composite pairs"
    bad = None
    fmain = ctx.fmaps[names[0]] if names else DeformationMap.zero(lat.rank)
    Mmain = ModuleStructure.ymf(fmain)
    wit = _witnesses(ctx, 1)[0]
    cnt = 0
    for iu, iv in pairs:
        u, v = ctx.pool[iu], ctx.pool[iv]
        k = _search_locality_order(ctx, Mmain, fmain, u, v, wit)
        if k is None:
            bad = Check("deform-thm59", inst, "fail", "some k <= bound", "none found",
                        f"u={render_state(u)} v={render_state(v)}")
            break
        cnt += 1
        bad = _check_s_locality(ctx, Mmain, fmain, u, v, wit, 0, inst, with_delta=True)
        if bad:
            break
    out.append(bad or _ok("deform-thm59", f"{inst} on {cnt} pairs"))
    return out


def _twist_data(ctx, f, u, v, hi):
    """S(t)(v ⊗ u) as a list of (v', u', series dict exp->scalar)."""
    tensor = State({(mv, mu): cu * cv
                    for mv, cv in v.terms.items() for mu, cu in u.terms.items()})
    xd = ctx.D.s_apply_xd(f, tensor, hi)
    per = {}
    for e, row in xd.items():
        for (m1, m2), c in row.items():
            per.setdefault((m1, m2), {})[e] = c
    return [(State.monomial(m1), State.monomial(m2), g) for (m1, m2), g in sorted(per.items())]


def _check_s_locality(ctx, M, f, u, v, w, order, inst, with_delta=False):
    """Order-n twisted commutator check for the deformed field applied to w:

        (x1-x2)^n D(Y)(u,x1)D(Y)(v,x2)w
            - (-x2+x1)^n sum_i g_i(x2-x1) D(Y)(v_i,x2)D(Y)(u_i,x1)w
        = [delta side built from the product family, or 0]

    where the twist data (v_i, u_i, g_i) is read off S(t)(v (x) u).  With
    with_delta=False the right side is 0 (pure S-locality at order n >= the
    locality order); with_delta=True it is the delta-function expansion with
    coefficients D(Y)-products u_{n+j} v.
    """
    eng = ctx.eng
    D = ctx.D
    lat = ctx.lat
    xlo, xhi = ctx.window()
    wsum = _wt(ctx, u) + _wt(ctx, v) + _wt(ctx, w)
    floor = lat.norm2(vec_add(vec_add(_label(u), _label(v)), _label(w))) // 2
    hiS = max(2 * xhi - order + wsum - floor + 4, 4)
    twist = _twist_data(ctx, f, u, v, hiS)
    ap = lambda a, s, h: D.deformed_xd(M, a, s, h)

    def full_grid(uu, vv):
        """All exact cells {(x1 exp, x2 exp): row} with both exponents <= xhi."""
        inner = ap(vv, w, xhi)
        grid = {}
        for j, row in inner.items():
            outer = ap(uu, State(row), xhi)
            for i, r in outer.items():
                grid[(i, j)] = r
        return grid

    # left side: (x1-x2)^order * D(Y)(u,x1)D(Y)(v,x2)w
    lhs = {}
    for (i, j), row in full_grid(u, v).items():
        for t in range(order + 1):
            c = binom_int(order, t) * (-1) ** t
            if not c:
                continue
            a, b = i + order - t, j + t
            if xlo <= a <= xhi and xlo <= b <= xhi:
                for mono, cc in row.items():
                    _xd_add(lhs, (a, b), mono, cc * c)
    # twist side: (-x2+x1)^order * sum g_m(x2-x1) D(Y)(v_m,x2)D(Y)(u_m,x1)w
    for vp, up, g in twist:
        grid = full_grid(vp, up)   # keys: (x2 exp, x1 exp)
        for (i2, j1), row in grid.items():
            for s, gs in g.items():
                for t2 in range(0, min(s, xhi - j1) + 1):
                    c2 = binom_int(s, t2) * (-1) ** (t2 % 2)
                    if not c2:
                        continue
                    aa, bb = j1 + t2, i2 + s - t2
                    for t in range(order + 1):
                        cbin = binom_int(order, t) * (-1) ** ((order - t) % 2)
                        if not cbin:
                            continue
                        a, b = aa + t, bb + order - t
                        if xlo <= a <= xhi and xlo <= b <= xhi:
                            cc = mpq(-cbin * c2) * gs
                            for mono, cv in row.items():
                                _xd_add(lhs, (a, b), mono, cv * cc)
    lhs = _xd_clean(lhs)
    want = {}
    if with_delta:
        top = D.deformed_top(u, v)
        for j in range(0, max(top - order, 0) + 1):
            wj = D.deformed_n_product(M, u, order + j, v)
            if wj.is_zero():
                continue
            fld = D.deformed_xd(M, wj, w, 2 * xhi + abs(top) + 4)
            for a in range(xlo, xhi + 1):
                cb = binom_int(-a - 1, j)
                if not cb:
                    continue
                for b in range(xlo, xhi + 1):
                    row = fld.get(b + a + 1 + j)
                    if row:
                        for mono, cc in row.items():
                            _xd_add(want, (a, b), mono, cc * cb)
    want = _xd_clean(want)
    for key in sorted(set(lhs) | set(want)):
        a, b = key
        bad = _compare_states("deform-thm59", inst, State(lhs.get(key, {})),
                              State(want.get(key, {})),
                              f"x1^{a} x2^{b} u={render_state(u)} v={render_state(v)}")
        if bad:
            return bad
    return None


def _search_locality_order(ctx, M, f, u, v, w, kmax=None):
    """Smallest k for which deformed S-locality holds on the window."""
    if kmax is None:
        kmax = 2 * ctx.trunc["maxWeight"] + 4
    for k in range(0, kmax + 1):
        if _check_s_locality(ctx, M, f, u, v, w, k, "search") is None:
            return k
    return None


# ---------------------------------------------------------------------------
# suite: s-operator


def suite_s_operator(ctx: Context):
    out = []
    lat = ctx.lat
    D = ctx.D
    xlo, xhi = ctx.window()
    zorder = ctx.trunc["zorder"]
    hiS = xhi + zorder + 4
    names = [n for n in ctx.fmaps]
    basis = [tuple(1 if k == i else 0 for k in range(lat.rank)) for i in range(lat.rank)]

    for fname in names:
        f = ctx.fmaps[fname]
        gens = ctx.core_gens

        inst = f"[{fname}] generator values of S(x)"
        bad = None
        for (nb, b) in gens:
            for (na, a) in gens:
                tensor = State({(mb, ma): cb * ca for mb, cb in b.terms.items()
                                for ma, ca in a.terms.items()})
                got = D.s_apply_xd(f, tensor, hiS)
                want = _s_generator_value(ctx, f, b, a, hiS)
                if _xd_clean(got) != _xd_clean(want):
                    bad = Check("s-operator", inst, "fail", "closed form", "engine value",
                                f"S(x)({nb} ⊗ {na})")
                    break
            if bad:
                break
        out.append(bad or _ok("s-operator", inst))

        inst = f"[{fname}] unitarity"
        bad = None
        samples = [(b, a) for (_, b) in gens for (_, a) in gens]
        comps = [(ctx.pool[i], ctx.pool[j]) for i, j in ctx.sample_pairs(
            ctx.samples.get("tensorTriples", 10))]
        for b, a in samples + comps:
            tensor = State({(mb, ma): cb * ca for mb, cb in b.terms.items()
                            for ma, ca in a.terms.items()})
            if not _check_unitarity(ctx, f, tensor, hiS):
                bad = Check("s-operator", inst, "fail", "identity", "other",
                            f"{render_state(b)} ⊗ {render_state(a)}")
                break
        out.append(bad or _ok("s-operator", inst))

        inst = f"[{fname}] shift [D⊗1, S(x)] = -dS/dx"
        bad = None
        for b, a in samples:
            tensor = State({(mb, ma): cb * ca for mb, cb in b.terms.items()
                            for ma, ca in a.terms.items()})
            if not _check_shift(ctx, f, tensor, hiS):
                bad = Check("s-operator", inst, "fail", "equal", "unequal",
                            f"{render_state(b)} ⊗ {render_state(a)}")
                break
        out.append(bad or _ok("s-operator", inst))

        inst = f"[{fname}] quantum Yang-Baxter equation"
        bad = None
        trips = [(u, v, w) for (_, u) in gens for (_, v) in gens for (_, w) in gens]
        comp_trips = [(ctx.pool[i], ctx.pool[j], ctx.pool[k])
                      for i, j, k in ctx.sample_triples(ctx.samples.get("tensorTriples", 10))]
        for u, v, w in trips + comp_trips:
            if not _check_qybe(ctx, f, u, v, w, zorder + xhi + 2):
                bad = Check("s-operator", inst, "fail", "equal", "unequal",
                            f"{render_state(u)} ⊗ {render_state(v)} ⊗ {render_state(w)}")
                break
        out.append(bad or _ok("s-operator", inst))

        inst = f"[{fname}] hexagon"
        bad = None
        hex_trips = [(u, v, w) for (_, u) in gens[:4] for (_, v) in gens[:4]
                     for (_, w) in gens[:4]]
        for u, v, w in hex_trips + comp_trips[:4]:
            if not _check_hexagon(ctx, f, u, v, w):
                bad = Check("s-operator", inst, "fail", "equal", "unequal",
                            f"{render_state(u)} ⊗ {render_state(v)} ⊗ {render_state(w)}")
                break
        out.append(bad or _ok("s-operator", inst))

        if f.is_symmetric(lat):
            inst = f"[{fname}] symmetric map gives the identity S on generators"
            bad = None
            for (nb, b) in gens:
                for (na, a) in gens:
                    tensor = State({(mb, ma): cb * ca for mb, cb in b.terms.items()
                                    for ma, ca in a.terms.items()})
                    got = _xd_clean(D.s_apply_xd(f, tensor, hiS))
                    want = {0: dict(tensor.terms)} if tensor.terms else {}
                    if got != want:
                        bad = Check("s-operator", inst, "fail", "identity", "twisted",
                                    f"S(x)({nb} ⊗ {na})")
                        break
                if bad:
                    break
            out.append(bad or _ok("s-operator", inst))
    return out


def _s_generator_value(ctx, f, b, a, hi):
    """Closed-form S(x)(b ⊗ a) for generators: scalar-series twists."""
    lat = ctx.lat
    mb, ma = list(b.terms)[0], list(a.terms)[0]
    hb, ha = mb[0], ma[0]
    out = {}

    def add_series(tensor_mono, series):
        for e, c in series.items():
            if e <= hi and c:
                _xd_add(out, e, tensor_mono, c)

    if hb and ha:
        i = hb[0][0][0]
        j = ha[0][0][0]
        ei = tuple(1 if k == i else 0 for k in range(lat.rank))
        ej = tuple(1 if k == j else 0 for k in range(lat.rank))
        f2 = f.derive(2)
        term = _poly_sub(f2.pair(lat, ej, ei), _poly_neg_var(f2.pair(lat, ei, ej)))
        add_series((mb, ma), {0: mpq(1)})
        vac = vacuum_mono(lat.rank)
        add_series((vac, vac), term)
    elif hb and not ha:
        i = hb[0][0][0]
        ei = tuple(1 if k == i else 0 for k in range(lat.rank))
        alpha = ma[1]
        f1 = f.derive(1)
        term = _poly_sub({}, _poly_add(_poly_neg_var(f1.pair(lat, alpha, ei)),
                                       f1.pair(lat, ei, alpha)))
        add_series((mb, ma), {0: mpq(1)})
        add_series((vacuum_mono(lat.rank), ma), term)
    elif ha and not hb:
        j = ha[0][0][0]
        ej = tuple(1 if k == j else 0 for k in range(lat.rank))
        beta = mb[1]
        f1 = f.derive(1)
        term = _poly_add(f1.pair(lat, beta, ej), _poly_neg_var(f1.pair(lat, ej, beta)))
        add_series((mb, ma), {0: mpq(1)})
        add_series((mb, vacuum_mono(lat.rank)), term)
    else:
        beta, alpha = mb[1], ma[1]
        expo = _poly_sub(_poly_neg_var(f.pair(lat, alpha, beta)), f.pair(lat, beta, alpha))
        series = _poly_exp(expo, hi)
        add_series((mb, ma), series)
    return out


def _poly_neg_var(p):
    return {e: (v if e % 2 == 0 else -v) for e, v in p.items()}


def _poly_sub(p, q):
    out = dict(p)
    for e, v in q.items():
        w = out.get(e, 0) - v
        if w:
            out[e] = w
        elif e in out:
            del out[e]
    return out


def _poly_add(p, q):
    out = dict(p)
    for e, v in q.items():
        w = out.get(e, 0) + v
        if w:
            out[e] = w
        elif e in out:
            del out[e]
    return out


def _poly_exp(p, hi):
    out = {0: mpq(1)}
    term = {0: mpq(1)}
    k = 0
    while term:
        k += 1
        nxt = {}
        for e1, v1 in term.items():
            for e2, v2 in p.items():
                e = e1 + e2
                if e <= hi:
                    nxt[e] = nxt.get(e, 0) + v1 * v2
        term = {e: v / k for e, v in nxt.items() if v}
        for e, v in term.items():
            out[e] = out.get(e, 0) + v
    return {e: v for e, v in out.items() if v}


def _tensor_flip(xd):
    return {e: {(m2, m1): c for (m1, m2), c in row.items()} for e, row in xd.items()}


def _check_unitarity(ctx, f, tensor, hi):
    """S21(x) S12(-x) = 1 on a tensor state."""
    D = ctx.D
    first = D.s_apply_xd(f, tensor, hi)
    first = {e: {m: (c if e % 2 == 0 else -c) for m, c in row.items()}
             for e, row in first.items()}   # S12 at -x
    acc = {}
    for e1, row in first.items():
        flipped = State({(m2, m1): c for (m1, m2), c in row.items()})
        part = D.s_apply_xd(f, flipped, hi - e1)
        for e2, row2 in part.items():
            for (m1, m2), c in row2.items():
                _xd_add(acc, e1 + e2, (m2, m1), c)
    acc = _xd_clean(acc)
    return acc == ({0: dict(tensor.terms)} if tensor.terms else {})


def _check_shift(ctx, f, tensor, hi):
    """[D⊗1, S(x)] = -d/dx S(x)."""
    D = ctx.D
    eng = ctx.eng
    s = D.s_apply_xd(f, tensor, hi)
    # D⊗1 after S
    left = {}
    for e, row in s.items():
        for (m1, m2), c in row.items():
            dv = eng.d_vl(State.monomial(m1, c))
            for mm, cc in dv.terms.items():
                _xd_add(left, e, (mm, m2), cc)
    # S after D⊗1
    dten = State()
    for (m1, m2), c in tensor.terms.items():
        dv = eng.d_vl(State.monomial(m1, c))
        for mm, cc in dv.terms.items():
            dten = dten + State({(mm, m2): cc})
    right = D.s_apply_xd(f, dten, hi)
    comm = dict(left)
    comm = {e: dict(row) for e, row in comm.items()}
    for e, row in right.items():
        for m, c in row.items():
            _xd_add(comm, e, m, -c)
    want = {}
    for e, row in s.items():
        if e:
            for m, c in row.items():
                _xd_add(want, e - 1, m, -c * e)
    comm = {e: row for e, row in _xd_clean(comm).items() if e < hi}
    want = {e: row for e, row in _xd_clean(want).items() if e < hi}
    return comm == want


def _apply_s_leg(ctx, f, xd3, legs, hi, var_index, subst_xz=False, zcap=None):
    """Apply S to two legs of a 3-tensor series dict {(ex,ez): {3-mono: c}}.

    With subst_xz the operator argument is x+z (expanded in nonnegative powers
    of z); otherwise it contributes to the variable var_index (0 = x, 1 = z).
    """
    D = ctx.D
    out = {}
    p, q = legs
    for key, row in xd3.items():
        for monos, c in row.items():
            tensor = State({(monos[p], monos[q]): c})
            sres = D.s_apply_xd(f, tensor, hi)
            for et, srow in sres.items():
                for (mp, mq), cc in srow.items():
                    new = list(monos)
                    new[p], new[q] = mp, mq
                    if subst_xz:
                        for i in range(0, (zcap if zcap is not None else hi) - 0 + 1):
                            cb = binom_int(et, i)
                            if not cb:
                                continue
                            k2 = (key[0] + et - i, key[1] + i)
                            _xd_add(out, k2, tuple(new), cc * cb)
                    else:
                        k2 = (key[0] + et, key[1]) if var_index == 0 else (key[0], key[1] + et)
                        _xd_add(out, k2, tuple(new), cc)
    return _xd_clean(out)


def _check_qybe(ctx, f, u, v, w, H):
    """S12(x)S13(x+z)S23(z) = S23(z)S13(x+z)S12(x) on u ⊗ v ⊗ w."""
    start = {}
    for mu, cu in u.terms.items():
        for mv, cv in v.terms.items():
            for mw, cw in w.terms.items():
                _xd_add(start, (0, 0), (mu, mv, mw), cu * cv * cw)
    zcap = ctx.trunc["zorder"]
    lhs = _apply_s_leg(ctx, f, start, (1, 2), H, 1)
    lhs = _apply_s_leg(ctx, f, lhs, (0, 2), H, None, subst_xz=True, zcap=zcap)
    lhs = _apply_s_leg(ctx, f, lhs, (0, 1), H, 0)
    rhs = _apply_s_leg(ctx, f, start, (0, 1), H, 0)
    rhs = _apply_s_leg(ctx, f, rhs, (0, 2), H, None, subst_xz=True, zcap=zcap)
    rhs = _apply_s_leg(ctx, f, rhs, (1, 2), H, 1)
    xcap = ctx.trunc["xhi"]
    for key in set(lhs) | set(rhs):
        ex, ez = key
        if ex + ez > min(H - zcap, xcap + zcap) or ez > zcap:
            continue
        if lhs.get(key, {}) != rhs.get(key, {}):
            return False
    return True


def _check_hexagon(ctx, f, u, v, w):
    """S(x)(D(Y)(z)⊗1) = (D(Y)(z)⊗1) S23(x) S13(x+z) on u ⊗ v ⊗ w."""
    D = ctx.D
    lat = ctx.lat
    M = ModuleStructure.ymf(f)
    xlo, xhi = ctx.window()
    zorder = ctx.trunc["zorder"]
    # the deformed field's pole depth on this pair bounds how far below zero
    # z-exponents reach; truncations are sized from it
    pole = max(0, -(-D.deformed_top(u, v) - 1))
    zcap_f = zorder + 2
    tcap = xhi + zorder + pole + 2
    # lhs: deformed field on legs (1,2) producing z-series, then S(x)
    field = D.deformed_xd(M, u, v, zcap_f)
    lhs = {}
    for ez, row in field.items():
        for mono, c in row.items():
            tensor = State({(mono, mw): c * cw for mw, cw in w.terms.items()})
            sres = D.s_apply_xd(f, tensor, xhi)
            for ex, srow in sres.items():
                for (m1, m2), cc in srow.items():
                    _xd_add(lhs, (ex, ez), (m1, m2), cc)
    lhs = _xd_clean(lhs)
    # rhs: S13(x+z), then S23(x), then the deformed field on legs (1,2)
    start = {}
    for mu, cu in u.terms.items():
        for mv, cv in v.terms.items():
            for mw, cw in w.terms.items():
                _xd_add(start, (0, 0), (mu, mv, mw), cu * cv * cw)
    cur = _apply_s_leg(ctx, f, start, (0, 2), tcap, None, subst_xz=True,
                       zcap=zorder + pole)
    cur = _apply_s_leg(ctx, f, cur, (1, 2), xhi, 0)
    rhs = {}
    for (ex, ez), row in cur.items():
        if ex > xhi:
            continue
        for (m1, m2, m3), c in row.items():
            fld = D.deformed_xd(M, State.monomial(m1), State.monomial(m2), zcap_f - ez)
            for ez2, r2 in fld.items():
                key = (ex, ez + ez2)
                for mono, cc in r2.items():
                    _xd_add(rhs, key, (mono, m3), c * cc)
    rhs = _xd_clean(rhs)
    for key in set(lhs) | set(rhs):
        ex, ez = key
        if not (0 <= ex <= xhi) or not (-pole <= ez <= zorder):
            continue
        if lhs.get(key, {}) != rhs.get(key, {}):
            return False
    return True


# ---------------------------------------------------------------------------
# suite: equivariance


def suite_equivariance(ctx: Context):
    out = []
    lat = ctx.lat
    if not ctx.group:
        return [_ok("equivariance", "no group configured (skipped trivially)")]
    inst = "group elements validate as eps-preserving isometries"
    bad = None
    for g in ctx.group:
        rep = isometry_validate(lat, g)
        if rep:
            bad = Check("equivariance", inst, "fail", "valid", "; ".join(rep), str(g.matrix))
            break
    out.append(bad or _ok("equivariance", inst))
    if bad:
        return out

    raw_name = next((n for n in ctx.fmaps if not ctx.fmaps[n].is_zero()), None)
    raw = ctx.fmaps[raw_name] if raw_name else DeformationMap.zero(lat.rank)
    eta = eta_average(raw, ctx.group, lat)
    inst = f"averaged map is equivariant (raw = {raw_name})"
    out.append(_ok("equivariance", inst) if eta_equivariant(eta, ctx.group, lat)
               else Check("equivariance", inst, "fail", "equivariant", "not", ""))

    M = ModuleStructure.ymf(eta)
    xlo, xhi = ctx.window()
    inst = "R(g) D(Y)(v,x) R(g)^-1 = D(Y)(R(g)v, chi(g)x)"
    bad = None
    for g in ctx.group:
        ginv = Isometry(_matrix_inv(g.matrix), _inv_scalar(g.chi))
        for v in ctx.pool[: 24]:
            for w in ctx.pool[: 6]:
                winv = r_apply(lat, ginv, w)
                mid = ctx.D.deformed_xd(M, v, winv, xhi)
                gv = r_apply(lat, g, v)
                tgt = ctx.D.deformed_xd(M, gv, w, xhi)
                for e in range(xlo, xhi + 1):
                    lhs = r_apply(lat, g, State(mid.get(e, {})))
                    rhs = State(tgt.get(e, {})).scale(_pow(g.chi, e))
                    bad = _compare_states("equivariance", inst, lhs, rhs,
                                          f"x^{e} g={g.matrix} v={render_state(v)} "
                                          f"w={render_state(w)}")
                    if bad:
                        break
                if bad:
                    break
            if bad:
                break
        if bad:
            break
    out.append(bad or _ok("equivariance", inst))
    return out


def _matrix_inv(m):
    from .deform import _int_matrix_inverse
    return _int_matrix_inverse(m)


def _inv_scalar(x):
    return mpq(1) / x if not hasattr(x, "field") else x.field.one() / x


def _pow(x, e):
    out = mpq(1)
    for _ in range(abs(e)):
        out = out * x
    return out if e >= 0 else _inv_scalar(out)


# ---------------------------------------------------------------------------
# suite: bleps-recovery


def suite_bleps_recovery(ctx: Context):
    out = []
    eng = ctx.eng
    D = ctx.D
    xlo, xhi = ctx.window()
    M = ModuleStructure.ym_bleps()
    inst = "deformed twisted-group field equals the lattice field on generators"
    bad = None
    for (nu, u) in ctx.gens:
        for (nv, v) in ctx.gens:
            l = _xd_clean(D.deformed_xd(M, u, v, xhi, base="BLeps"))
            r = _xd_clean(eng.apply_field("VL", u, v, xhi))
            if l != r:
                bad = Check("bleps-recovery", inst, "fail", "equal", "unequal",
                            f"u={nu} v={nv}")
                break
        if bad:
            break
    out.append(bad or _ok("bleps-recovery", inst))

    pairs = ctx.sample_pairs(ctx.samples.get("pairs", 20))
    inst = f"recovery on {len(pairs)} composite pairs"
    bad = None
    for iu, iv in pairs:
        u, v = ctx.pool[iu], ctx.pool[iv]
        l = _xd_clean(D.deformed_xd(M, u, v, xhi, base="BLeps"))
        r = _xd_clean(eng.apply_field("VL", u, v, xhi))
        if l != r:
            bad = Check("bleps-recovery", inst, "fail", "equal", "unequal",
                        f"u={render_state(u)} v={render_state(v)}")
            break
    out.append(bad or _ok("bleps-recovery", inst))
    return out


# ---------------------------------------------------------------------------
# suite: phi-calc


def suite_phi(ctx: Context):
    out = []
    Z = ctx.trunc["zorder"]
    W = ctx.window()

    inst = "associate law phi(phi(x,y),z) = phi(x,y+z) for p in {1,x,x^2,1/x,1+x}"
    bad = None
    for pc in ({0: mpq(1)}, {1: mpq(1)}, {2: mpq(1)}, {-1: mpq(1)}, {0: mpq(1), 1: mpq(1)}):
        p = LaurentSeries.from_poly("x", dict(pc))
        a = associate_expand(p, Z, W)
        err = _associate_law_violation(a, Z)
        if err:
            bad = Check("phi-calc", inst, "fail", "equal", "unequal", f"p={p!r} at {err}")
            break
    out.append(bad or _ok("phi-calc", inst))

    inst = "closed forms match the expansion for r = -2..2"
    bad = None
    for r in range(-2, 3):
        closed = phi_r_closed(r, Z, W)
        exp = associate_expand(LaurentSeries.from_poly("x", {r + 1: mpq(1)}), Z, W)
        for n in range(Z + 1):
            if not closed.table[n].eq_on_common_window(exp.table[n]):
                bad = Check("phi-calc", inst, "fail", repr(exp.table[n]),
                            repr(closed.table[n]), f"r={r} z^{n}")
                break
        if bad:
            break
    out.append(bad or _ok("phi-calc", inst))

    inst = "pi projects the standard bivariate family to its one-variable form"
    bad = None
    for r in range(-2, 3):
        a = phi_r_closed(r, Z, W)
        F = _f_r(r)
        want = _f_r_value(r, Z)
        got = pi_phi(F, a)
        if not got.eq_on_common_window(want):
            bad = Check("phi-calc", inst, "fail", repr(want), repr(got), f"r={r}")
            break
    out.append(bad or _ok("phi-calc", inst))

    inst = "membership test: positive and negative instances"
    bad = None
    a0 = phi_r_closed(0, Z, W)
    a1 = associate_expand(LaurentSeries.from_poly("x", {0: mpq(1)}), Z, W)
    pos = [(_f_r(0), a0), (BivarFunction({(1, 0): mpq(1), (0, 1): mpq(-1)}), a1)]
    neg = [(BivarFunction({(1, 0): mpq(1), (0, 1): mpq(1)}), a1),
           (BivarFunction({(1, 0): mpq(1), (0, 1): mpq(-1)}), a0)]
    w6 = (-6, 6)
    for F, a in pos:
        ok, viol = cphi_member(F, a, w6, w6)
        if not ok:
            bad = Check("phi-calc", inst, "fail", "member", f"violation {viol[0][0]}", "")
            break
    if not bad:
        for F, a in neg:
            ok, viol = cphi_member(F, a, w6, w6)
            if ok:
                bad = Check("phi-calc", inst, "fail", "non-member", "member", "")
                break
    out.append(bad or _ok("phi-calc", inst))

    inst = "two-sided substitution symmetry for members"
    bad = None
    from .series import X1_MAJOR as D1
    cases = [(_f_r(0), a0), (BivarFunction({(1, 0): mpq(1), (0, 1): mpq(-1)}), a1),
             (BivarFunction({(0, 0): mpq(1)}, factors=[(mpq(1), 1, D1)]), a1)]
    for F, a in cases:
        if not two_sided_symmetry(F, a):
            bad = Check("phi-calc", inst, "fail", "symmetric", "not", "")
            break
    if not bad and two_sided_symmetry(BivarFunction({(1, 0): mpq(1), (0, 1): mpq(1)}), a1):
        bad = Check("phi-calc", inst, "fail", "asymmetric for x1+x2", "symmetric", "")
    out.append(bad or _ok("phi-calc", inst))

    inst = "pi is a differential-algebra map"
    bad = None
    F0 = _f_r(0)
    G0 = BivarFunction({(2, -2): mpq(1)})
    pf, pg = pi_phi(F0, a0), pi_phi(G0, a0)
    if not pi_phi(F0.mul(G0), a0).eq_on_common_window(pf * pg):
        bad = Check("phi-calc", inst, "fail", "multiplicative", "not", "")
    elif not pi_phi(F0.p_d1(a0.p), a0).eq_on_common_window(pf.derive()):
        bad = Check("phi-calc", inst, "fail", "derivation-compatible", "not", "")
    out.append(bad or _ok("phi-calc", inst))

    inst = "scaling: pi(F(lx1,lx2))(z) = pi(F)(l mu^-1 z) for p = x^(r+1)"
    bad = None
    for r in range(-2, 3):
        F = _f_r(r)
        a = phi_r_closed(r, Z, W)
        for lam in (mpq(-1), mpq(2)):
            factor = mpq(1)
            for _ in range(abs(r)):
                factor = factor * lam
            factor = mpq(1) / factor if r > 0 else factor
            left = pi_phi(F.scale_vars(lam), a)
            right = pi_phi(F, a).subst_scale(factor)
            if not left.eq_on_common_window(right):
                bad = Check("phi-calc", inst, "fail", repr(right), repr(left),
                            f"r={r} lambda={lam}")
                break
        if bad:
            break
    out.append(bad or _ok("phi-calc", inst))
    return out


def _f_r(r: int) -> BivarFunction:
    if r == 0:
        return BivarFunction({(1, -1): mpq(1)})
    return BivarFunction({(-r, 0): mpq(-1, r), (0, -r): mpq(1, r)})


def _f_r_value(r: int, Z: int) -> LaurentSeries:
    if r == 0:
        return LaurentSeries("z", {n: mpq(1, factorial(n)) for n in range(Z + 1)}, 0, Z)
    return LaurentSeries("z", {1: mpq(1)}, 0, Z)


def _associate_law_violation(a, Z):
    lhs = {}
    for n, g in enumerate(a.table):
        if n > Z:
            break
        ev = a.eval_series(g, 1)
        for ey, coeff in ev.c.items():
            key = (ey, n)
            lhs[key] = coeff if key not in lhs else lhs[key] + coeff
    rhs = {}
    for n, g in enumerate(a.table):
        if n > Z:
            break
        for k in range(0, n + 1):
            key = (n - k, k)
            add = g * mpq(binom_int(n, k))
            rhs[key] = add if key not in rhs else rhs[key] + add
    for key in set(lhs) | set(rhs):
        ey, ez = key
        if ey + ez > Z or ey < 0 or ez < 0:
            continue
        l, r = lhs.get(key), rhs.get(key)
        if l is None and (r is None or r.is_zero()):
            continue
        if r is None and l.is_zero():
            continue
        if l is None or r is None or not l.eq_on_common_window(r):
            return key
    return None


# ---------------------------------------------------------------------------
# registry


SUITES = {
    "heisenberg": suite_heisenberg,
    "cocycle": suite_cocycle,
    "va-axioms": suite_va_axioms,
    "AL1-7": suite_al,
    "comodule": suite_comodule,
    "module": suite_module,
    "compat": suite_compat,
    "convolution": suite_convolution,
    "deform-thm59": suite_deform,
    "s-operator": suite_s_operator,
    "equivariance": suite_equivariance,
    "phi-calc": suite_phi,
    "bleps-recovery": suite_bleps_recovery,
}


def run_suites(ctx: Context, selected):
    records = []
    for name in selected:
        if name not in SUITES:
            raise ConfigInvalid(f"unknown suite {name!r}")
        t0 = time.perf_counter()
        recs = SUITES[name](ctx)
        dt = (time.perf_counter() - t0) * 1000.0
        for r in recs:
            r.ms = dt / max(len(recs), 1)
        records.extend(recs)
    return records
