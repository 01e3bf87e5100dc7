"""Vertex operators on V_L, B_L and B_{L,eps}.

The engine computes Y(u,x)w coefficientwise.  Generator fields follow the
defining formulas (h(x) for Heisenberg vectors, E^-(-a,x)E^+(-a,x)e_a x^a
for lattice vectors); a general monomial u = a1(-n1)...am(-nm) e_b acts by
the normal-ordered product of the derived generator fields with every
annihilation half (including a(0) and x^b) ordered to the right of e_b.

Series of states are handled as plain dicts {exponent: {monomial: scalar}}
internally; results exposed to callers are wrapped in SeriesState, whose
window records which coefficients are exact.  All internal computations are
exact for every exponent <= the requested upper bound - lower ends need no
truncation because each fixed pair has a computable support bound.
"""

from __future__ import annotations

from math import comb, factorial

from .errors import EmptyWindow
from .fock import (State, derive_b_pow, mono_weight, mul_bl, mul_bleps,
                   vacuum_mono)
from .lattice import Lattice, vec_add
from .scalars import mpq
from .series import binom_int

NEG_INF = -(10 ** 9)


class SeriesState:
    """State-valued Laurent series in one variable, exact on [lo, hi]."""

    __slots__ = ("var", "c", "lo", "hi")

    def __init__(self, var, coeffs, lo, hi):
        if lo > hi:
            raise EmptyWindow(f"window [{lo},{hi}] is empty")
        self.var = var
        self.c = {e: s for e, s in coeffs.items() if not s.is_zero()}
        self.lo = lo
        self.hi = hi

    def coeff(self, e) -> State:
        return self.c.get(e, State())

    def support(self):
        return sorted(self.c)

    def __repr__(self):
        terms = [f"{self.var}^{e}: {self.c[e]!r}" for e in sorted(self.c)]
        return "{" + ", ".join(terms) + "}"

    def eq_on_common_window(self, other) -> bool:
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise EmptyWindow("no common window")
        for e in range(lo, hi + 1):
            if self.coeff(e) != other.coeff(e):
                return False
        return True


def _xd_add(xd, e, mono, c):
    row = xd.get(e)
    if row is None:
        row = {}
        xd[e] = row
    v = row.get(mono, 0) + c
    if v:
        row[mono] = v
    elif mono in row:
        del row[mono]


def _xd_clean(xd):
    return {e: row for e, row in xd.items() if row}


def _pairs_insert(pairs, key):
    """Insert one mode factor into a sorted multiplicity tuple."""
    for idx, (k, m) in enumerate(pairs):
        if k == key:
            return pairs[:idx] + ((k, m + 1),) + pairs[idx + 1:]
        if k > key:
            return pairs[:idx] + ((key, 1),) + pairs[idx:]
    return pairs + ((key, 1),)


def _pairs_merge(a, b):
    """Merge two sorted multiplicity tuples."""
    if not a:
        return b
    if not b:
        return a
    out = []
    ia = ib = 0
    while ia < len(a) and ib < len(b):
        ka, ma = a[ia]
        kb, mb = b[ib]
        if ka == kb:
            out.append((ka, ma + mb))
            ia += 1
            ib += 1
        elif ka < kb:
            out.append(a[ia])
            ia += 1
        else:
            out.append(b[ib])
            ib += 1
    out.extend(a[ia:])
    out.extend(b[ib:])
    return tuple(out)


def _heis_mono(lat, i, n, mono):
    """alpha_i(n) on a single monomial; n != 0; returns list of (mono, scalar)."""
    pairs, beta = mono
    if n < 0:
        return [((_pairs_insert(pairs, (i, -n)), beta), 1)]
    out = []
    for idx, ((j, mode), mult) in enumerate(pairs):
        if mode != n or lat.gram[i][j] == 0:
            continue
        if mult == 1:
            rest = pairs[:idx] + pairs[idx + 1:]
        else:
            rest = pairs[:idx] + (((j, mode), mult - 1),) + pairs[idx + 1:]
        out.append(((rest, beta), mult * n * lat.gram[i][j]))
    return out


class Engine:
    """Caching vertex-operator engine bound to one lattice."""

    def __init__(self, lat: Lattice):
        self.lat = lat
        self.rank = lat.rank
        self._field_cache = {}
        self._cre_cache = {}

    # ---- support bounds ----------------------------------------------

    def wt_floor(self, beta) -> int:
        return self.lat.norm2(beta) // 2

    def product_top(self, u: State, w: State, alg: str = "VL") -> int:
        """An n with u_m w = 0 for all m > n (exact weight/label bound)."""
        if alg in ("BL", "BLeps"):
            return -1
        top = NEG_INF
        for mu in u.terms:
            for mw in w.terms:
                label = vec_add(mu[1], mw[1])
                bound = mono_weight(self.lat, mu) + mono_weight(self.lat, mw) \
                    - 1 - self.wt_floor(label)
                top = max(top, bound)
        return top

    # ---- generator half-fields on x-dicts ------------------------------

    def _ann_stage(self, i, nk, xd):
        """Annihilation half of the nk-th derived field of a_i, applied to xd."""
        lat = self.lat
        out = {}
        for e, row in xd.items():
            for mono, c in row.items():
                beta = mono[1]
                pair0 = sum(lat.gram[i][j] * beta[j] for j in range(self.rank))
                if pair0:
                    b = binom_int(-1, nk - 1)
                    _xd_add(out, e - nk, mono, c * b * pair0)
                seen = {n for ((j, n), _m) in mono[0] if lat.gram[i][j]}
                for n in seen:
                    b = binom_int(-n - 1, nk - 1)
                    for m2, f in _heis_mono(lat, i, n, mono):
                        _xd_add(out, e - n - nk, m2, c * b * f)
        return _xd_clean(out)

    def _cre_stage(self, i, nk, xd, hi):
        """Creation half of the nk-th derived field of a_i, truncated above hi."""
        out = {}
        for e, row in xd.items():
            for m in range(1, hi - e + nk + 1):  # exponent e + m - nk <= hi
                b = binom_int(m - 1, nk - 1)
                if not b:
                    continue
                for mono, c in row.items():
                    for m2, f in _heis_mono(self.lat, i, -m, mono):
                        _xd_add(out, e + m - nk, m2, c * b * f)
        return _xd_clean(out)

    def _e_plus(self, mu, xd):
        """E^+(mu, x) = exp(sum_{n>0} mu(n)/n x^-n) on xd; terminates exactly."""
        lat = self.lat
        total = {e: dict(row) for e, row in xd.items()}
        layer = xd
        k = 0
        while layer:
            k += 1
            nxt = {}
            for e, row in layer.items():
                for mono, c in row.items():
                    modes = {n for ((j, n), _m) in mono[0]
                             if any(mu[i] and lat.gram[i][j] for i in range(self.rank))}
                    for n in modes:
                        for i in range(self.rank):
                            if not mu[i]:
                                continue
                            for m2, f in _heis_mono(lat, i, n, mono):
                                _xd_add(nxt, e - n, m2, c * f * mu[i] / n)
            layer = {e: {m: v / k for m, v in row.items()}
                     for e, row in _xd_clean(nxt).items()}
            for e, row in layer.items():
                for mono, c in row.items():
                    _xd_add(total, e, mono, c)
        return _xd_clean(total)

    def _e_minus(self, mu, xd, hi):
        """E^-(mu, x) = exp(sum_{n>0} mu(-n)/(-n) x^n) on xd, exact through hi."""
        total = {e: dict(row) for e, row in xd.items()}
        layer = xd
        k = 0
        while layer:
            k += 1
            nxt = {}
            for e, row in layer.items():
                for n in range(1, hi - e + 1):
                    for mono, c in row.items():
                        for i in range(self.rank):
                            if not mu[i]:
                                continue
                            for m2, f in _heis_mono(self.lat, i, -n, mono):
                                _xd_add(nxt, e + n, m2, -c * f * mu[i] / n)
            # divide layer k by k via accumulating exp recursion:
            # exp = sum_k B^k/k!; we build terms T_k = B T_{k-1} / k
            layer = {e: {m: v / k for m, v in row.items()} for e, row in _xd_clean(nxt).items()}
            for e, row in layer.items():
                for mono, c in row.items():
                    _xd_add(total, e, mono, c)
        return _xd_clean(total)

    def _x_beta(self, beta, xd):
        out = {}
        lat = self.lat
        for e, row in xd.items():
            for mono, c in row.items():
                shift = lat.pairing(beta, mono[1])
                _xd_add(out, e + shift, mono, c)
        return _xd_clean(out)

    def _e_beta_mul(self, beta, xd):
        out = {}
        lat = self.lat
        for e, row in xd.items():
            for (pairs, lbl), c in row.items():
                sign = lat.epsilon_sign(beta, lbl)
                _xd_add(out, e, (pairs, vec_add(beta, lbl)), c * sign)
        return _xd_clean(out)

    # ---- full fields ----------------------------------------------------

    def _field_mono(self, alg, u_mono, w_mono, hi):
        key = (alg, u_mono, w_mono)
        cached = self._field_cache.get(key)
        if cached is not None and cached[0] >= hi:
            return cached[1]
        hi += (-hi) % 4  # bucket requests so the cache converges
        w = State.monomial(w_mono)
        if alg == "VL":
            out = self._y_vl_full(u_mono, w, hi)
        elif alg == "BL":
            out = self._y_b(u_mono, w, hi, eps=False)
        elif alg == "BLeps":
            out = self._y_b(u_mono, w, hi, eps=True)
        else:
            raise ValueError(f"unknown algebra {alg!r}")
        self._field_cache[key] = (hi, out)
        return out

    def _y_b(self, u_mono, w: State, hi: int, eps: bool):
        """Y(a,x)b = (e^{x d} a) b on B_L / B_{L,eps}; nonnegative powers only."""
        out = {}
        u = State.monomial(u_mono)
        mul = (lambda a, b: mul_bleps(self.lat, a, b)) if eps else mul_bl
        for k in range(0, max(hi, 0) + 1):
            term = derive_b_pow(u, k)
            if term.is_zero():
                break
            prod = mul(term.scale(mpq(1, factorial(k))), w)
            if not prod.is_zero():
                out[k] = dict(prod.terms)
        return out

    def _creation_table(self, beta, cre_factors, hi):
        """Combined creation series E^-(-beta,x) * prod C_k(x)^cnt as a table
        {exponent: {mode multiset: coeff}}; all factors commute."""
        key = (beta, cre_factors)
        cached = self._cre_cache.get(key)
        if cached is not None and cached[0] >= hi:
            return cached[1]
        hi += (-hi) % 8  # bucket requests so the cache converges
        table = {0: {(): mpq(1)}}
        if any(beta):
            # layered exponential of sum_{n>=1} x^n/n * beta(-n)
            layer = table
            k = 0
            while layer:
                k += 1
                nxt = {}
                for e, row in layer.items():
                    for n in range(1, hi - e + 1):
                        for i, bi in enumerate(beta):
                            if not bi:
                                continue
                            c0 = mpq(bi, n)
                            for pairs, c in row.items():
                                p2 = _pairs_insert(pairs, (i, n))
                                r2 = nxt.setdefault(e + n, {})
                                r2[p2] = r2.get(p2, 0) + c * c0
                layer = {}
                for e, row in nxt.items():
                    row = {p: c / k for p, c in row.items() if c}
                    if row:
                        layer[e] = row
                        dst = table.setdefault(e, {})
                        for p, c in row.items():
                            dst[p] = dst.get(p, 0) + c
        for (i, nk, cnt) in cre_factors:
            for _ in range(cnt):
                nxt = {}
                for e, row in table.items():
                    for m in range(1, hi - e + nk + 1):
                        b = binom_int(m - 1, nk - 1)
                        if not b:
                            continue
                        e2 = e + m - nk
                        for pairs, c in row.items():
                            p2 = _pairs_insert(pairs, (i, m))
                            r2 = nxt.setdefault(e2, {})
                            r2[p2] = r2.get(p2, 0) + c * b
                table = {}
                for e, row in nxt.items():
                    row = {p: c for p, c in row.items() if c}
                    if row:
                        table[e] = row
        self._cre_cache[key] = (hi, table)
        return table

    def _y_vl_full(self, u_mono, w: State, hi: int):
        """Normal-ordered Y(u,x)w on V_L, exact through hi."""
        pairs, beta = u_mono
        factors = [(i, n, mult) for ((i, n), mult) in pairs]
        acc = {}
        neg = tuple(-b for b in beta)
        has_beta = any(beta)

        def finish(xd, coeff, cre_plan):
            if has_beta:
                xd = self._x_beta(beta, xd)
                xd = self._e_beta_mul(beta, xd)
                xd = self._e_plus(neg, xd)
            if not xd:
                return
            emin = min(xd)
            table = self._creation_table(beta, tuple(cre_plan), hi - emin)
            for e, row in xd.items():
                for d, trow in table.items():
                    e2 = e + d
                    if e2 > hi:
                        continue
                    dst = acc.setdefault(e2, {})
                    for (mpairs, mlabel), c in row.items():
                        c0 = c * coeff
                        for tpairs, tc in trow.items():
                            mono = (_pairs_merge(mpairs, tpairs), mlabel)
                            v = dst.get(mono, 0) + c0 * tc
                            if v:
                                dst[mono] = v
                            elif mono in dst:
                                del dst[mono]

        def rec(k, xd, coeff, cre_plan):
            if not xd:
                return
            if k == len(factors):
                finish(xd, coeff, cre_plan)
                return
            i, n, mult = factors[k]
            cur = xd
            for j in range(mult + 1):
                if j > 0:
                    cur = self._ann_stage(i, n, cur)
                    if not cur:
                        # higher j only adds more annihilation: all zero
                        break
                plan = cre_plan + [(i, n, mult - j)] if mult - j else cre_plan
                rec(k + 1, cur, coeff * comb(mult, j), plan)

        rec(0, {0: dict(w.terms)}, mpq(1), [])
        return _xd_clean(acc)

    # ---- public operations ----------------------------------------------

    def apply_field(self, alg, u: State, w: State, hi: int):
        """x-dict of Y_alg(u,x)w, exact for every exponent <= hi."""
        total = {}
        for mu, cu in u.terms.items():
            for mw, cw in w.terms.items():
                xd = self._field_mono(alg, mu, mw, hi)
                c = cu * cw
                for e, row in xd.items():
                    if e <= hi:
                        for mono, cc in row.items():
                            _xd_add(total, e, mono, cc * c)
        return _xd_clean(total)

    def field_series(self, alg, u: State, w: State, lo: int, hi: int) -> SeriesState:
        xd = self.apply_field(alg, u, w, hi)
        coeffs = {e: State(row) for e, row in xd.items() if lo <= e <= hi}
        return SeriesState("x", coeffs, lo, hi)

    def n_product(self, u: State, n: int, w: State, alg: str = "VL") -> State:
        """u_n w: the coefficient of x^{-n-1} in the chosen algebra's field."""
        xd = self.apply_field(alg, u, w, -n - 1)
        return State(xd.get(-n - 1, {}))

    def d_vl(self, v: State) -> State:
        """Translation operator D(v) = v_{-2} vacuum, by coefficient extraction."""
        return self.n_product(v, -2, State.vacuum(self.rank), "VL")

    def e_apply(self, sign: str, alpha, v: State, lo: int, hi: int) -> SeriesState:
        """E^{sign}(alpha, x) v, exact on [lo, hi]."""
        xd = {0: dict(v.terms)}
        if sign == "+":
            out = self._e_plus(alpha, xd)
        elif sign == "-":
            out = self._e_minus(alpha, xd, hi)
        else:
            raise ValueError("sign must be '+' or '-'")
        coeffs = {e: State(row) for e, row in out.items() if lo <= e <= hi}
        return SeriesState("x", coeffs, lo, hi)
