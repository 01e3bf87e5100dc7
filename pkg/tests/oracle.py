"""Independent brute-force oracle for the derived fixtures.

Everything here is computed from first principles with its own data layout:
states are dicts keyed by (modes, label) where ``modes`` is a descending
tuple of (n, i) factors WITH repetition (no multiplicities) and scalars are
``fractions.Fraction``.  No code is shared with the package under test;
expansions are direct term-by-term sums over explicitly enumerated
partitions and exponential orders.
"""

from fractions import Fraction as Fr
from itertools import product
from math import factorial


def key(modes, label):
    return (tuple(sorted(modes, reverse=True)), tuple(label))


def sadd(a, b):
    out = dict(a)
    for k, c in b.items():
        out[k] = out.get(k, 0) + c
        if not out[k]:
            del out[k]
    return out


def sscale(a, c):
    return {k: v * c for k, v in a.items()} if c else {}


def gram_pair(gram, x, y):
    return sum(x[i] * gram[i][j] * y[j] for i in range(len(gram)) for j in range(len(gram)))


def eps_sign(gram, table, a, b):
    e = 0
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            if table[i][j] == -1:
                e += ai * bj
    return -1 if e % 2 else 1


def default_table(gram):
    n = len(gram)
    return [[(-1) ** gram[i][j] if i > j else 1 for j in range(n)] for i in range(n)]


def heis(gram, i, n, state):
    """alpha_i(n) acting on a state; recursive commutator bookkeeping."""
    out = {}
    for (modes, label), c in state.items():
        if n < 0:
            k2 = key(modes + ((-n, i),), label)
            out[k2] = out.get(k2, 0) + c
        elif n == 0:
            pairing = sum(gram[i][j] * label[j] for j in range(len(gram)))
            if pairing:
                k2 = (modes, label)
                out[k2] = out.get(k2, 0) + c * pairing
        else:
            # move alpha_i(n) right past every creation factor
            for pos, (m, j) in enumerate(modes):
                if m == n and gram[i][j]:
                    rest = modes[:pos] + modes[pos + 1:]
                    k2 = key(rest, label)
                    out[k2] = out.get(k2, 0) + c * n * gram[i][j]
    return {k: v for k, v in out.items() if v}


def heis_vec(gram, vec, n, state):
    out = {}
    for i, ci in enumerate(vec):
        if ci:
            out = sadd(out, sscale(heis(gram, i, n, state), Fr(ci)))
    return out


def partitions_of(n):
    """All multisets of positive integers summing to n, descending tuples."""
    if n == 0:
        yield ()
        return
    def rec(n, maxpart):
        if n == 0:
            yield ()
            return
        for p in range(min(n, maxpart), 0, -1):
            for rest in rec(n - p, p):
                yield (p,) + rest
    yield from rec(n, n)


def colored_partitions(n, rank):
    """Partitions of n with each part assigned a basis color."""
    for part in partitions_of(n):
        for colors in product(range(rank), repeat=len(part)):
            yield tuple(zip(part, colors))


def e_minus_coefficient(gram, mu, d, state):
    """Coefficient of x^d in exp(sum_{n>=1} mu(-n)/n x^n) applied to state.

    Direct partition sum: for each partition of d, multiply the creation
    operators with symmetry factor 1/(prod parts * prod multiplicities!).
    """
    out = {}
    for part in partitions_of(d):
        mult = {}
        for p in part:
            mult[p] = mult.get(p, 0) + 1
        denom = 1
        for p, m in mult.items():
            denom *= (p ** m) * factorial(m)
        cur = state
        for p in part:
            cur = heis_vec(gram, mu, -p, cur)
        out = sadd(out, sscale(cur, Fr(1, denom)))
    return out


def e_plus_terms(gram, mu, state, dmax=40):
    """All coefficients of exp(sum_{n>=1} mu(n)/n x^-n) applied to state.

    Returns {exponent: state}; terminates because annihilation is nilpotent.
    """
    out = {0: dict(state)}
    layer = {0: dict(state)}
    order = 0
    while layer:
        order += 1
        nxt = {}
        for e, st in layer.items():
            for n in range(1, dmax):
                moved = heis_vec(gram, mu, n, st)
                if moved:
                    moved = sscale(moved, Fr(1, n))
                    nxt[e - n] = sadd(nxt.get(e - n, {}), moved)
        layer = {}
        for e, st in nxt.items():
            st = {k: v / order for k, v in st.items()}
            if st:
                layer[e] = st
                out[e] = sadd(out.get(e, {}), st)
        layer = {e: st for e, st in layer.items() if st}
    return {e: st for e, st in out.items() if st}


def y_elattice(gram, table, alpha, state, lo, hi):
    """Y(e_alpha, x) on a state: E^-(-a,x)E^+(-a,x) e_a x^a, term by term."""
    neg = tuple(-a for a in alpha)
    out = {}
    for (modes, label), c in state.items():
        base = {(modes, label): c}
        shift = gram_pair(gram, alpha, label)
        sign = eps_sign(gram, table, alpha, label)
        newlabel = tuple(a + b for a, b in zip(alpha, label))
        moved = {}
        for (m2, _l2), c2 in base.items():
            moved[key(m2, newlabel)] = c2 * sign
        plus = e_plus_terms(gram, neg, moved)
        for e1, st1 in plus.items():
            for d in range(0, hi - (e1 + shift) + 1):
                st2 = e_minus_coefficient(gram, neg, d, st1)
                e = e1 + shift + d
                if lo <= e <= hi and st2:
                    out[e] = sadd(out.get(e, {}), st2)
    return {e: st for e, st in out.items() if st}


def y_heis(gram, vec, state, lo, hi):
    """Y(h, x) = sum h(n) x^{-n-1} on a state."""
    out = {}
    for e in range(lo, hi + 1):
        st = heis_vec(gram, vec, -e - 1, state)
        if st:
            out[e] = st
    return out


def bl_derivation(gram, state):
    """d: a_i(-n) -> n a_i(-n-1), label contributes label(-1)."""
    out = {}
    for (modes, label), c in state.items():
        for pos, (n, i) in enumerate(modes):
            rest = modes[:pos] + modes[pos + 1:]
            k2 = key(rest + ((n + 1, i),), label)
            out[k2] = out.get(k2, 0) + c * n
        for i, li in enumerate(label):
            if li:
                k2 = key(modes + ((1, i),), label)
                out[k2] = out.get(k2, 0) + c * li
    return {k: v for k, v in out.items() if v}


def bl_product(state_a, state_b, gram=None, table=None):
    """Product on the symmetric algebra times (twisted) group algebra."""
    out = {}
    for (ma, la), ca in state_a.items():
        for (mb, lb), cb in state_b.items():
            sign = eps_sign(gram, table, la, lb) if table is not None else 1
            k2 = key(ma + mb, tuple(a + b for a, b in zip(la, lb)))
            out[k2] = out.get(k2, 0) + ca * cb * sign
    return {k: v for k, v in out.items() if v}


def y_b(gram, state_a, state_b, hi, table=None):
    """Y(a,x)b = (e^{x d} a) b on the commutative or twisted algebra."""
    out = {}
    cur = state_a
    k = 0
    while cur and k <= hi:
        prod = bl_product(cur, state_b, gram, table)
        if prod:
            out[k] = prod
        cur = bl_derivation(gram, cur)
        cur = {kk: v / (k + 1) for kk, v in cur.items()}
        k += 1
    return out


def coproduct(state):
    """Splitting sum over subsets of the mode multiset; labels are group-like."""
    out = {}
    for (modes, label), c in state.items():
        n = len(modes)
        for mask in range(1 << n):
            left = tuple(modes[i] for i in range(n) if mask & (1 << i))
            right = tuple(modes[i] for i in range(n) if not mask & (1 << i))
            k2 = (key(left, label), key(right, label))
            out[k2] = out.get(k2, 0) + c
    return {k: v for k, v in out.items() if v}


def scalar_exp_series(poly, hi):
    """exp of a polynomial {exp: Fraction} with positive exponents."""
    out = {0: Fr(1)}
    term = {0: Fr(1)}
    k = 0
    while term:
        k += 1
        nxt = {}
        for e1, v1 in term.items():
            for e2, v2 in poly.items():
                if e1 + e2 <= hi:
                    nxt[e1 + e2] = nxt.get(e1 + e2, 0) + v1 * v2
        term = {e: v / k for e, v in nxt.items() if v}
        for e, v in term.items():
            out[e] = out.get(e, 0) + v
    return {e: v for e, v in out.items() if v}
