"""Exact scalar arithmetic in cyclotomic fields Q(zeta_m).

Scalars are either raw rationals (``mpq``, used whenever the field degree is
one, i.e. m <= 2) or ``Cyc`` elements: coefficient vectors over the power
basis 1, z, ..., z^(d-1) with z a primitive m-th root of unity and d the
degree of the m-th cyclotomic polynomial.  ``Cyc`` interoperates with int
and mpq through coercion, so engine code can mix them freely.
"""

from __future__ import annotations

try:
    from gmpy2 import mpq
except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
    from fractions import Fraction as mpq

from .errors import DivisionByZero, ScalarNotRepresentable

QQ = mpq
ZERO = mpq(0)
ONE = mpq(1)


def _poly_trim(p):
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _poly_trim(out)


def _poly_sub(a, b):
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]
    return _poly_trim(out)


def _poly_divmod(a, b):
    # exact division over Q; b monic not required
    a = list(a)
    q = [0] * max(0, len(a) - len(b) + 1)
    inv = mpq(1) / mpq(b[-1])
    for i in range(len(a) - len(b), -1, -1):
        c = a[i + len(b) - 1] * inv
        if c:
            q[i] = c
            for j, y in enumerate(b):
                a[i + j] -= c * y
    return _poly_trim(q), _poly_trim(a)


def cyclotomic_polynomial(m: int) -> list:
    """Coefficients (low to high, exact rationals) of the m-th cyclotomic polynomial."""
    if m < 1:
        raise ValueError("m must be positive")
    poly = [mpq(-1)] + [mpq(0)] * (m - 1) + [mpq(1)]  # x^m - 1
    for d in range(1, m):
        if m % d == 0:
            q, r = _poly_divmod(poly, cyclotomic_polynomial(d))
            assert not r
            poly = q
    return poly


class CyclotomicField:
    """Q(zeta_m) with a fixed power basis; m is fixed per session."""

    def __init__(self, m: int = 2):
        if m < 1:
            raise ValueError("cyclotomic order must be >= 1")
        self.m = m
        self.phi = cyclotomic_polynomial(m)
        self.degree = len(self.phi) - 1
        # reduction rows for z^k, k = degree .. 2*degree-2
        self._red = []
        if self.degree > 1:
            base = [-c for c in self.phi[:-1]]  # z^degree in the power basis
            self._red.append(base)
            for _ in range(self.degree - 2):
                prev = self._red[-1]
                top = prev[-1]
                shifted = [ZERO] + prev[:-1]  # multiply by z
                if top:
                    shifted = [s + top * b for s, b in zip(shifted, base)]
                self._red.append(shifted)

    # -- constructors -------------------------------------------------

    def zero(self):
        return ZERO if self.degree == 1 else Cyc(self, (ZERO,) * self.degree)

    def one(self):
        return self.from_rational(1)

    def from_rational(self, num, den=1):
        if den == 0:
            raise DivisionByZero("rational with zero denominator")
        q = mpq(num, den)
        if self.degree == 1:
            return q
        return Cyc(self, (q,) + (ZERO,) * (self.degree - 1))

    def zeta(self):
        """A primitive m-th root of unity."""
        if self.m == 1:
            return ONE
        if self.m == 2:
            return mpq(-1)
        c = [ZERO] * self.degree
        c[1] = ONE
        return Cyc(self, tuple(c))

    def coerce(self, x):
        if isinstance(x, Cyc):
            if x.field.m != self.m:
                raise ScalarNotRepresentable("mixed cyclotomic orders")
            return x
        if isinstance(x, int) or type(x) is type(ZERO):
            return self.from_rational(x)
        raise ScalarNotRepresentable(f"cannot coerce {x!r} into Q(zeta_{self.m})")

    def root_of_unity(self, k: int):
        """zeta^k, any integer k."""
        z = self.zeta()
        k %= self.m
        out = self.one()
        for _ in range(k):
            out = out * z
        return out

    # -- reduction helper used by Cyc ---------------------------------

    def _reduce(self, coeffs):
        d = self.degree
        out = list(coeffs[:d]) + [ZERO] * (d - min(d, len(coeffs)))
        for k in range(d, len(coeffs)):
            c = coeffs[k]
            if c:
                row = self._red[k - d]
                for i in range(d):
                    if row[i]:
                        out[i] += c * row[i]
        return tuple(out)


class Cyc:
    """Element of Q(zeta_m) for degree > 1."""

    __slots__ = ("field", "c")

    def __init__(self, field, c):
        self.field = field
        self.c = c

    def _co(self, other):
        if isinstance(other, Cyc):
            return other
        if isinstance(other, int) or type(other) is type(ZERO):
            d = self.field.degree
            return Cyc(self.field, (mpq(other),) + (ZERO,) * (d - 1))
        return None

    def __add__(self, other):
        o = self._co(other)
        if o is None:
            return NotImplemented
        return Cyc(self.field, tuple(a + b for a, b in zip(self.c, o.c)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._co(other)
        if o is None:
            return NotImplemented
        return Cyc(self.field, tuple(a - b for a, b in zip(self.c, o.c)))

    def __rsub__(self, other):
        o = self._co(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return Cyc(self.field, tuple(-a for a in self.c))

    def __mul__(self, other):
        o = self._co(other)
        if o is None:
            return NotImplemented
        prod = _poly_mul(list(self.c), list(o.c))
        return Cyc(self.field, self.field._reduce(prod))

    __rmul__ = __mul__

    def _inverse(self):
        if not any(self.c):
            raise DivisionByZero("inverse of zero in cyclotomic field")
        # extended Euclid in Q[x]: s1*self = gcd (mod phi), gcd a nonzero constant
        r0, r1 = list(self.field.phi), _poly_trim(list(self.c))
        s0, s1 = [], [ONE]
        while len(r1) > 1:
            q, r = _poly_divmod(r0, r1)
            r0, r1 = r1, r
            qs = _poly_mul(q, s1)
            s0, s1 = s1, _poly_sub(s0, qs)
        inv = mpq(1) / r1[0]
        return Cyc(self.field, self.field._reduce([inv * c for c in s1]))

    def __truediv__(self, other):
        o = self._co(other)
        if o is None:
            return NotImplemented
        return self * o._inverse()

    def __rtruediv__(self, other):
        o = self._co(other)
        if o is None:
            return NotImplemented
        return o * self._inverse()

    def __eq__(self, other):
        o = self._co(other)
        if o is None:
            return NotImplemented
        return self.c == o.c

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash((self.field.m, self.c))

    def __bool__(self):
        return any(self.c)

    def __repr__(self):
        return render_scalar(self)


def is_zero(x) -> bool:
    return not x


def render_scalar(x) -> str:
    """Exact string form: rationals as 'a/b', cyclotomics as sums of 'a/b*z^k'."""
    if not isinstance(x, Cyc):
        return str(x)
    parts = []
    for k, c in enumerate(x.c):
        if not c:
            continue
        mag = c if c > 0 else -c
        if k == 0:
            body = str(mag)
        else:
            zk = "z" if k == 1 else f"z^{k}"
            body = zk if mag == 1 else f"{mag}*{zk}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if c > 0 else f"- {body}")
    return " ".join(parts) if parts else "0"


def parse_scalar(text: str, field: CyclotomicField):
    """Parse the render_scalar format back into a scalar."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ValueError("empty scalar")
    out = field.zero()
    i = 0
    sign = 1
    term = ""
    chunks = []
    while i < len(s):
        ch = s[i]
        if ch in "+-" and term:
            chunks.append((sign, term))
            sign = 1 if ch == "+" else -1
            term = ""
        elif ch in "+-" and not term:
            sign = sign if ch == "+" else -sign
        else:
            term += ch
        i += 1
    if term:
        chunks.append((sign, term))
    for sign, term in chunks:
        if "z" in term:
            coefpart, _, zpart = term.partition("z")
            coefpart = coefpart.rstrip("*")
            k = 1 if not zpart else int(zpart.lstrip("^"))
            coef = mpq(coefpart) if coefpart else ONE
            out = out + sign * coef * field.root_of_unity(k)
        else:
            out = out + sign * mpq(term) * field.one()
    return out


def scalar_arith(a, b, op: str, field: CyclotomicField | None = None):
    """Field arithmetic dispatch: op in {add, mul, div}; exact, canonical."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "div":
        if not b:
            raise DivisionByZero("division by zero scalar")
        return a / b
    raise ValueError(f"unknown op {op!r}")
