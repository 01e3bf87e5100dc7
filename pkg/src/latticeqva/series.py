"""Truncated Laurent series in one and two formal variables.

Every series carries an explicit validity window: stored coefficients are
exact for all exponents inside the window, and in-window exponents without a
stored entry are exactly zero.  Multiplication additionally relies on the
window's lower end being a support bound of the true series (all constructors
here guarantee that); addition uses the plain window intersection.
"""

from __future__ import annotations

from math import comb, factorial

from .errors import EmptyWindow, NotFormallyNilpotent, UnsupportedExpansionDirection
from .scalars import mpq, ONE

X1_MAJOR = "x1-major"
X2_MAJOR = "x2-major"


def binom_int(n: int, k: int) -> int:
    """Binomial coefficient with arbitrary integer top, nonnegative k."""
    if k < 0:
        return 0
    if n >= 0:
        return comb(n, k)
    return (-1) ** k * comb(k - n - 1, k)


def binom_frac(a, k: int):
    """Binomial coefficient with rational top (for formal (1+t)^a expansions)."""
    if k < 0:
        return mpq(0)
    out = mpq(1)
    for i in range(k):
        out = out * (a - i)
    return out / factorial(k)


def _is_scalar(x):
    return not isinstance(x, (LaurentSeries, BiSeries))


class LaurentSeries:
    """Laurent series in one variable, exact on the window [lo, hi].

    ``complete`` marks exactly-given data (true support = stored support),
    for which window arithmetic never discards information.
    """

    __slots__ = ("var", "c", "lo", "hi", "complete")

    def __init__(self, var, coeffs, lo, hi, complete=False):
        self.var = var
        self.complete = complete
        if complete:
            support = [e for e, v in coeffs.items() if v]
            if support:
                lo = min(lo, min(support))
                hi = max(hi, max(support))
        if lo > hi:
            raise EmptyWindow(f"window [{lo},{hi}] is empty")
        self.lo = lo
        self.hi = hi
        self.c = {e: v for e, v in coeffs.items() if v and lo <= e <= hi}

    @classmethod
    def zero(cls, var, lo, hi):
        return cls(var, {}, lo, hi)

    @classmethod
    def monomial(cls, var, e, coeff, lo=None, hi=None):
        lo = e if lo is None else lo
        hi = e if hi is None else hi
        return cls(var, {e: coeff}, lo, hi, complete=(lo == hi == e))

    @classmethod
    def from_poly(cls, var, coeffs, lo=None, hi=None):
        """Exactly-given Laurent polynomial; window defaults to the support hull."""
        support = [e for e, v in coeffs.items() if v]
        if not support:
            return cls(var, {}, 0 if lo is None else lo, 0 if hi is None else hi,
                       complete=True)
        return cls(var, coeffs,
                   min(support) if lo is None else lo,
                   max(support) if hi is None else hi, complete=True)

    def coeff(self, e):
        return self.c.get(e, 0)

    def support_min(self):
        return min(self.c) if self.c else None

    def is_zero(self):
        return not self.c

    def same_window(self, other):
        return self.lo == other.lo and self.hi == other.hi

    def __add__(self, other):
        if _is_scalar(other):
            other = LaurentSeries(self.var, {0: other}, self.lo, self.hi,
                                  complete=self.complete)
        if self.var != other.var:
            raise ValueError("variable mismatch")
        both = self.complete and other.complete
        if both:
            lo, hi = min(self.lo, other.lo), max(self.hi, other.hi)
        else:
            lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise EmptyWindow("empty window in series addition")
        out = {}
        for e in set(self.c) | set(other.c):
            if lo <= e <= hi:
                v = self.c.get(e, 0) + other.c.get(e, 0)
                if v:
                    out[e] = v
        return LaurentSeries(self.var, out, lo, hi, complete=both)

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(self.var, {e: -v for e, v in self.c.items()},
                             self.lo, self.hi, complete=self.complete)

    def __sub__(self, other):
        if _is_scalar(other):
            other = LaurentSeries(self.var, {0: other}, self.lo, self.hi)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if _is_scalar(other):
            return LaurentSeries(self.var, {e: v * other for e, v in self.c.items()},
                                 self.lo, self.hi, complete=self.complete)
        if self.var != other.var:
            raise ValueError("variable mismatch")
        both = self.complete and other.complete
        lo = self.lo + other.lo
        if both:
            hi = self.hi + other.hi
        else:
            hi = min(self.hi + other.lo, self.lo + other.hi)
        if lo > hi:
            raise EmptyWindow("empty window in series multiplication")
        out = {}
        for e1, v1 in self.c.items():
            for e2, v2 in other.c.items():
                e = e1 + e2
                if lo <= e <= hi:
                    out[e] = out.get(e, 0) + v1 * v2
        return LaurentSeries(self.var, out, lo, hi, complete=both)

    __rmul__ = __mul__

    def derive(self, k: int = 1):
        """k-th formal derivative; window shifts down by k."""
        out = self
        for _ in range(k):
            out = LaurentSeries(out.var, {e - 1: e * v for e, v in out.c.items() if e},
                                out.lo - 1, out.hi - 1, complete=out.complete)
        return out

    def exp(self, hi=None):
        """exp(f) for f in x*C[[x]]; exact on [min(lo,0), hi].

        ``hi`` may exceed the window only for complete (exactly-given) input.
        """
        if any(e <= 0 for e in self.c):
            raise NotFormallyNilpotent("exp requires strictly positive support")
        if hi is None or not self.complete:
            hi = self.hi
        lo = min(self.lo, 0)
        acc = {0: ONE}
        term = {0: ONE}
        k = 1
        while k <= max(hi, 0):
            nxt = {}
            for e1, v1 in term.items():
                for e2, v2 in self.c.items():
                    e = e1 + e2
                    if e <= hi:
                        nxt[e] = nxt.get(e, 0) + v1 * v2
            term = {e: v / k for e, v in nxt.items() if v}
            if not term:
                break
            for e, v in term.items():
                acc[e] = acc.get(e, 0) + v
            k += 1
        return LaurentSeries(self.var, acc, lo, hi)

    def inverse(self, hi=None):
        """Inverse assuming the lowest in-window exponent is the true valuation.

        ``hi`` (output upper bound) may exceed the default only for complete input.
        """
        v = self.support_min()
        if v is None:
            raise ZeroDivisionError("inverse of zero series")
        lead = self.c[v]
        if hi is None or not self.complete:
            hi = self.hi - 2 * v
        lo = -v
        if lo > hi:
            raise EmptyWindow("window too small for series inverse")
        single = len(self.c) == 1
        # f = lead*x^v (1+u)  =>  1/f = lead^-1 x^-v sum (-u)^k
        u = {e - v: val / lead for e, val in self.c.items() if e != v}
        acc = {0: ONE}
        term = {0: ONE}
        depth = hi + v
        for _ in range(max(depth, 0)):
            nxt = {}
            for e1, v1 in term.items():
                for e2, v2 in u.items():
                    e = e1 + e2
                    if e <= depth:
                        nxt[e] = nxt.get(e, 0) - v1 * v2
            term = {e: val for e, val in nxt.items() if val}
            if not term:
                break
            for e, val in term.items():
                acc[e] = acc.get(e, 0) + val
        out = {e - v: val / lead for e, val in acc.items()}
        return LaurentSeries(self.var, out, lo, hi, complete=(self.complete and single))

    def ring_one(self):
        return LaurentSeries(self.var, {0: ONE}, 0, 0, complete=True)

    def pow_int(self, n: int, coeff_hi=None):
        if n < 0:
            return self.inverse(coeff_hi).pow_int(-n)
        if n == 0:
            return self.ring_one()
        out = None
        for _ in range(n):
            out = self if out is None else out * self
        return out

    def subst_scale(self, factor):
        """x -> factor*x for an invertible scalar factor."""
        out = {e: v * _pow_scalar(factor, e) for e, v in self.c.items()}
        return LaurentSeries(self.var, out, self.lo, self.hi, complete=self.complete)

    def subst_neg(self):
        return LaurentSeries(self.var, {e: (v if e % 2 == 0 else -v) for e, v in self.c.items()},
                             self.lo, self.hi, complete=self.complete)

    def rename(self, var):
        return LaurentSeries(var, dict(self.c), self.lo, self.hi, complete=self.complete)

    def truncate(self, lo, hi):
        if lo > hi:
            raise EmptyWindow("empty truncation window")
        kept = {e: v for e, v in self.c.items() if lo <= e <= hi}
        still = self.complete and len(kept) == len(self.c)
        return LaurentSeries(self.var, kept, lo, hi, complete=still)

    def eval_at_zero(self):
        """Constant term; requires 0 inside the window."""
        if not (self.lo <= 0 <= self.hi):
            raise EmptyWindow("0 outside window")
        return self.c.get(0, 0)

    def __eq__(self, other):
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return (self.var, self.lo, self.hi, self.c) == (other.var, other.lo, other.hi, other.c)

    def eq_on_common_window(self, other):
        if self.is_zero() and other.is_zero():
            return True
        lo, hi = max(self.lo, other.lo), min(self.hi, other.hi)
        if lo > hi:
            raise EmptyWindow("no common window to compare on")
        return all(self.coeff(e) == other.coeff(e) for e in range(lo, hi + 1))

    def __repr__(self):
        if not self.c:
            return "0"
        terms = []
        for e in sorted(self.c):
            v = self.c[e]
            if e == 0:
                terms.append(f"{v}")
            elif e == 1:
                terms.append(f"{v}*{self.var}")
            else:
                terms.append(f"{v}*{self.var}^{e}")
        return " + ".join(terms)


def _pow_scalar(x, e: int):
    if e >= 0:
        out = ONE
        for _ in range(e):
            out = out * x
        return out
    return ONE / _pow_scalar(x, -e)


class BiSeries:
    """Laurent series in two variables with a rectangular validity window.

    ``direction`` records how negative binomial powers were expanded;
    ``bounded`` records, per variable, whether the window's lower end is a
    support bound of the true series (needed for substitution).
    """

    __slots__ = ("vars", "c", "w1", "w2", "direction", "bounded", "complete")

    def __init__(self, vars, coeffs, w1, w2, direction=None, bounded=(True, True),
                 complete=False):
        self.vars = tuple(vars)
        self.direction = direction
        self.bounded = tuple(bounded)
        self.complete = complete
        if complete:
            # a complete series knows its true support; widen the window to hold it
            support = [k for k, v in coeffs.items() if v]
            if support:
                w1 = (min(w1[0], min(k[0] for k in support)),
                      max(w1[1], max(k[0] for k in support)))
                w2 = (min(w2[0], min(k[1] for k in support)),
                      max(w2[1], max(k[1] for k in support)))
        if w1[0] > w1[1] or w2[0] > w2[1]:
            raise EmptyWindow("empty window in 2-variable series")
        self.w1 = tuple(w1)
        self.w2 = tuple(w2)
        self.c = {k: v for k, v in coeffs.items()
                  if v and w1[0] <= k[0] <= w1[1] and w2[0] <= k[1] <= w2[1]}

    @classmethod
    def zero(cls, vars, w1, w2):
        return cls(vars, {}, w1, w2)

    def coeff(self, e1, e2):
        return self.c.get((e1, e2), 0)

    def is_zero(self):
        return not self.c

    def ring_one(self):
        from .scalars import ONE
        return BiSeries(self.vars, {(0, 0): ONE}, (0, 0), (0, 0), complete=True)

    def inverse(self, _hint=None):
        raise NotImplementedError("general 2-variable series inversion is not supported")

    def __add__(self, other):
        if _is_scalar(other):
            other = BiSeries(self.vars, {(0, 0): other}, self.w1, self.w2, complete=True)
        if self.vars != other.vars:
            raise ValueError("variable mismatch")
        both_complete = self.complete and other.complete
        if both_complete:
            w1 = (min(self.w1[0], other.w1[0]), max(self.w1[1], other.w1[1]))
            w2 = (min(self.w2[0], other.w2[0]), max(self.w2[1], other.w2[1]))
        else:
            w1 = (max(self.w1[0], other.w1[0]), min(self.w1[1], other.w1[1]))
            w2 = (max(self.w2[0], other.w2[0]), min(self.w2[1], other.w2[1]))
        out = {}
        for k in set(self.c) | set(other.c):
            v = self.c.get(k, 0) + other.c.get(k, 0)
            if v:
                out[k] = v
        return BiSeries(self.vars, out, w1, w2,
                        direction=self.direction or other.direction,
                        bounded=(self.bounded[0] and other.bounded[0],
                                 self.bounded[1] and other.bounded[1]),
                        complete=both_complete)

    def __neg__(self):
        return BiSeries(self.vars, {k: -v for k, v in self.c.items()},
                        self.w1, self.w2, self.direction, self.bounded, self.complete)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if _is_scalar(other):
            return BiSeries(self.vars, {k: v * other for k, v in self.c.items()},
                            self.w1, self.w2, self.direction, self.bounded, self.complete)
        if self.vars != other.vars:
            raise ValueError("variable mismatch")
        both_complete = self.complete and other.complete
        if both_complete:
            w1 = (self.w1[0] + other.w1[0], self.w1[1] + other.w1[1])
            w2 = (self.w2[0] + other.w2[0], self.w2[1] + other.w2[1])
        else:
            w1 = (self.w1[0] + other.w1[0],
                  min(self.w1[1] + other.w1[0], self.w1[0] + other.w1[1]))
            w2 = (self.w2[0] + other.w2[0],
                  min(self.w2[1] + other.w2[0], self.w2[0] + other.w2[1]))
        out = {}
        for (a1, a2), v1 in self.c.items():
            for (b1, b2), v2 in other.c.items():
                k = (a1 + b1, a2 + b2)
                if w1[0] <= k[0] <= w1[1] and w2[0] <= k[1] <= w2[1]:
                    out[k] = out.get(k, 0) + v1 * v2
        dirn = self.direction or other.direction
        return BiSeries(self.vars, out, w1, w2, direction=dirn,
                        bounded=(self.bounded[0] and other.bounded[0],
                                 self.bounded[1] and other.bounded[1]),
                        complete=both_complete)

    __rmul__ = __mul__

    def derive(self, which: int, k: int = 1):
        out = self
        for _ in range(k):
            c = {}
            for (e1, e2), v in out.c.items():
                if which == 0 and e1:
                    c[(e1 - 1, e2)] = e1 * v
                elif which == 1 and e2:
                    c[(e1, e2 - 1)] = e2 * v
            w1 = (out.w1[0] - (which == 0), out.w1[1] - (which == 0))
            w2 = (out.w2[0] - (which == 1), out.w2[1] - (which == 1))
            out = BiSeries(out.vars, c, w1, w2, out.direction, out.bounded, out.complete)
        return out

    def eq_on_common_window(self, other):
        w1 = (max(self.w1[0], other.w1[0]), min(self.w1[1], other.w1[1]))
        w2 = (max(self.w2[0], other.w2[0]), min(self.w2[1], other.w2[1]))
        if w1[0] > w1[1] or w2[0] > w2[1]:
            raise EmptyWindow("no common window to compare on")
        keys = {k for k in list(self.c) + list(other.c)
                if w1[0] <= k[0] <= w1[1] and w2[0] <= k[1] <= w2[1]}
        return all(self.coeff(*k) == other.coeff(*k) for k in keys)

    def __repr__(self):
        if not self.c:
            return "0"
        v1, v2 = self.vars
        terms = []
        for (e1, e2) in sorted(self.c):
            terms.append(f"{self.c[(e1, e2)]}*{v1}^{e1}*{v2}^{e2}")
        return " + ".join(terms)


def iota_binom(n: int, direction: str, w1, w2, vars=("x1", "x2")):
    """Expansion of (x1-x2)^n (x1-major) or (-x2+x1)^n (x2-major) on a window.

    For n >= 0 both directions give the same polynomial.  For n < 0 the
    x1-major form has nonnegative powers of x2 and unboundedly negative
    powers of x1 (and vice versa); the escaping variable is marked unbounded.
    """
    coeffs = {}
    if direction == X1_MAJOR:
        # sum_t C(n,t) (-1)^t x1^(n-t) x2^t
        for t in range(max(0, w2[0]), w2[1] + 1):
            e1 = n - t
            if w1[0] <= e1 <= w1[1]:
                c = binom_int(n, t) * (-1) ** t
                if c:
                    coeffs[(e1, t)] = mpq(c)
        bounded = (n >= 0, True)
    elif direction == X2_MAJOR:
        # (-x2+x1)^n = sum_t C(n,t) (-x2)^(n-t) x1^t
        for t in range(max(0, w1[0]), w1[1] + 1):
            e2 = n - t
            if w2[0] <= e2 <= w2[1]:
                c = binom_int(n, t) * (-1) ** (n - t)
                if c:
                    coeffs[(t, e2)] = mpq(c)
        bounded = (True, n >= 0)
    else:
        raise UnsupportedExpansionDirection(f"unknown direction {direction!r}")
    dirn = None if n >= 0 else direction
    return BiSeries(vars, coeffs, w1, w2, direction=dirn, bounded=bounded,
                    complete=(n >= 0))


def subst_affine(f: BiSeries, x0_hi: int | None = None, out_vars=("x0", "x2")):
    """Substitute x1 -> x2 + x0, expanding (x2+x0)^e in nonnegative powers of x0.

    Requires the true support of ``f`` to be bounded below in both variables
    by the window (elements of C((x1,x2)) restricted to their window).
    """
    if not (f.bounded[0] and f.bounded[1]):
        raise UnsupportedExpansionDirection(
            "substitution diverges: support unbounded below in the recorded direction")
    w1lo, w1hi = f.w1
    w2lo, w2hi = f.w2
    if f.complete:
        # every output coefficient is a finite exact sum over the true support
        all_nonneg_in = all(e >= 0 for (e, _) in f.c)
        if x0_hi is None:
            x0_hi = max(0, w1hi) if all_nonneg_in else max(0, w1hi - w1lo)
        out = {}
        for (e, j), v in f.c.items():
            top = x0_hi if e < 0 else min(e, x0_hi)
            for a in range(0, top + 1):
                c = binom_int(e, a)
                if c:
                    k = (a, e - a + j)
                    out[k] = out.get(k, 0) + v * c
        all_nonneg = all(e >= 0 for (e, _) in f.c)
        support = [k for k, v in out.items() if v]
        b_lo = min((k[1] for k in support), default=w1lo + w2lo)
        b_hi = max((k[1] for k in support), default=w1lo + w2lo)
        if not all_nonneg:
            b_hi = max(b_hi, w1hi + w2hi)
        return BiSeries(out_vars, out, (0, x0_hi), (min(b_lo, b_hi), b_hi),
                        complete=all_nonneg)
    total_hi = min(w1hi + w2lo, w2hi + w1lo)
    if x0_hi is None:
        x0_hi = max(0, min(w1hi - w1lo, w2hi - w2lo) // 2)
    out_w1 = (0, x0_hi)
    out_w2 = (w1lo + w2lo, total_hi - x0_hi)
    if out_w2[0] > out_w2[1]:
        raise EmptyWindow("windows too small for affine substitution")
    out = {}
    for (e, j), v in f.c.items():
        for a in range(out_w1[0], out_w1[1] + 1):
            b = e - a + j
            if out_w2[0] <= b <= out_w2[1]:
                c = binom_int(e, a)
                if c:
                    out[(a, b)] = out.get((a, b), 0) + v * c
    return BiSeries(out_vars, out, out_w1, out_w2)


def series_arith(f: LaurentSeries, g: LaurentSeries, op: str) -> LaurentSeries:
    if op == "add":
        return f + g
    if op == "mul":
        return f * g
    raise ValueError(f"unknown op {op!r}")
