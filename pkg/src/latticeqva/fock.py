"""The shared Fock space S(h^-) (x) C[L] underlying V_L, B_L and B_{L,eps}.

A monomial is a pair ``(pairs, beta)`` where ``pairs`` is a sorted tuple of
``((i, n), mult)`` entries representing prod a_i(-n)^mult (0-based basis
index i, mode n >= 1) and ``beta`` is the integer coordinate tuple of the
lattice label.  A State maps monomials to nonzero scalars.  The algebra
structure (plain, eps-twisted, vertex) lives in the operations, not the data.
"""

from __future__ import annotations

import re
from math import comb

from .lattice import Lattice, vec_add
from .scalars import mpq, render_scalar


def vacuum_mono(rank: int):
    return ((), (0,) * rank)


class State:
    """Finite linear combination of Fock monomials; immutable by convention."""

    __slots__ = ("terms", "tags")

    def __init__(self, terms=None, tags=None):
        self.terms = {} if terms is None else {m: c for m, c in terms.items() if c}
        self.tags = tags

    @classmethod
    def monomial(cls, mono, coeff=mpq(1)):
        return cls({mono: coeff})

    @classmethod
    def vacuum(cls, rank: int):
        return cls({vacuum_mono(rank): mpq(1)})

    def is_zero(self):
        return not self.terms

    def __add__(self, other):
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m, 0) + c
            if v:
                out[m] = v
            elif m in out:
                del out[m]
        return State(out, self.tags or other.tags)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        if not c:
            return State({}, self.tags)
        return State({m: c * v for m, v in self.terms.items()}, self.tags)

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        if not isinstance(other, State):
            return NotImplemented
        return self.terms == other.terms

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        return render_state(self)

    def __iter__(self):
        return iter(self.terms.items())


def mono_mul_modes(pairs_a, pairs_b):
    """Merge two sorted multisets of mode factors."""
    if not pairs_a:
        return pairs_b
    if not pairs_b:
        return pairs_a
    d = dict(pairs_a)
    for k, m in pairs_b:
        d[k] = d.get(k, 0) + m
    return tuple(sorted(d.items()))


def mono_weight(lat: Lattice, mono) -> int:
    pairs, beta = mono
    wt = sum(n * m for (_, n), m in pairs)
    return wt + lat.norm2(beta) // 2


def max_mode(mono) -> int:
    pairs, _ = mono
    return max((n for (_, n), _m in pairs), default=0)


def weight_decompose(lat: Lattice, v: State) -> dict:
    """Split into L(0)-homogeneous parts: wt -> State."""
    out = {}
    for m, c in v.terms.items():
        w = mono_weight(lat, m)
        out.setdefault(w, {})[m] = c
    return {w: State(d) for w, d in sorted(out.items())}


def heis_act(lat: Lattice, hvec, n: int, v: State) -> State:
    """Action of h(n) on the level-1 Fock module.

    hvec is a coordinate tuple over the lattice basis (scalar entries allowed).
    n < 0 creates, n > 0 annihilates with factor n*<h, a_i>, n = 0 scales by
    <h, beta>.
    """
    out = {}
    gram = lat.gram
    r = lat.rank
    if n < 0:
        for (pairs, beta), c in v.terms.items():
            for i in range(r):
                hi = hvec[i]
                if hi:
                    m2 = (mono_mul_modes(pairs, (((i, -n), 1),)), beta)
                    out[m2] = out.get(m2, 0) + c * hi
    elif n == 0:
        for (pairs, beta), c in v.terms.items():
            s = sum(hvec[i] * sum(gram[i][j] * beta[j] for j in range(r)) for i in range(r))
            if s:
                m = (pairs, beta)
                out[m] = out.get(m, 0) + c * s
    else:
        for (pairs, beta), c in v.terms.items():
            for idx, ((i, mode), mult) in enumerate(pairs):
                if mode != n:
                    continue
                pair_h = sum(hvec[j] * gram[j][i] for j in range(r))
                if not pair_h:
                    continue
                if mult == 1:
                    rest = pairs[:idx] + pairs[idx + 1:]
                else:
                    rest = pairs[:idx] + (((i, mode), mult - 1),) + pairs[idx + 1:]
                m2 = (rest, beta)
                out[m2] = out.get(m2, 0) + c * mult * n * pair_h
    return State({m: c for m, c in out.items() if c})


def mul_bl(a: State, b: State) -> State:
    """Commutative product of B_L: symmetric algebra times group algebra."""
    out = {}
    for (pa, ba), ca in a.terms.items():
        for (pb, bb), cb in b.terms.items():
            m = (mono_mul_modes(pa, pb), vec_add(ba, bb))
            v = out.get(m, 0) + ca * cb
            if v:
                out[m] = v
            elif m in out:
                del out[m]
    return State(out)


def mul_bleps(lat: Lattice, a: State, b: State) -> State:
    """Product of B_{L,eps}: as mul_bl but twisted by the cocycle sign."""
    out = {}
    for (pa, ba), ca in a.terms.items():
        for (pb, bb), cb in b.terms.items():
            m = (mono_mul_modes(pa, pb), vec_add(ba, bb))
            v = out.get(m, 0) + ca * cb * lat.epsilon_sign(ba, bb)
            if v:
                out[m] = v
            elif m in out:
                del out[m]
    return State(out)


def coproduct(v: State) -> State:
    """Delta of B_L: group-like on e^beta, primitive on the mode generators.

    Returns a State over tensor monomials (mono_left, mono_right).
    """
    out = {}
    for (pairs, beta), c in v.terms.items():
        splits = [((), (), c)]
        for (key, mult) in pairs:
            nxt = []
            for left, right, coeff in splits:
                for j in range(mult + 1):
                    l2 = left + ((key, j),) if j else left
                    r2 = right + ((key, mult - j),) if mult - j else right
                    nxt.append((l2, r2, coeff * comb(mult, j)))
            splits = nxt
        for left, right, coeff in splits:
            key = ((tuple(sorted(left)), beta), (tuple(sorted(right)), beta))
            out[key] = out.get(key, 0) + coeff
    return State(out, tags=("B_L", "B_L"))


def counit(v: State):
    """eps of B_L: kills all mode factors, sends every e^beta to 1."""
    out = 0
    for (pairs, _beta), c in v.terms.items():
        if not pairs:
            out = out + c
    return out


def derive_b(v: State) -> State:
    """The derivation of B_L / B_{L,eps}: a(-n) -> n a(-n-1), e^b -> b(-1) e^b.

    The two displayed generator rules coincide on the identified spaces, so a
    single implementation serves both variants.
    """
    out = {}
    for (pairs, beta), c in v.terms.items():
        for idx, ((i, n), mult) in enumerate(pairs):
            if mult == 1:
                rest = pairs[:idx] + pairs[idx + 1:]
            else:
                rest = pairs[:idx] + (((i, n), mult - 1),) + pairs[idx + 1:]
            m2 = (mono_mul_modes(rest, (((i, n + 1), 1),)), beta)
            out[m2] = out.get(m2, 0) + c * mult * n
        for i, bi in enumerate(beta):
            if bi:
                m2 = (mono_mul_modes(pairs, (((i, 1), 1),)), beta)
                out[m2] = out.get(m2, 0) + c * bi
    return State({m: c for m, c in out.items() if c})


def derive_b_pow(v: State, k: int) -> State:
    out = v
    for _ in range(k):
        out = derive_b(out)
    return out


def basis_states(lat: Lattice, max_weight: int, coord_box: int):
    """All basis monomials of weight <= max_weight with labels in |c| <= box."""
    out = []
    for beta in lat.coord_box(coord_box):
        base = lat.norm2(beta) // 2
        budget = max_weight - base
        if budget < 0:
            continue
        for pairs in _mode_multisets(lat.rank, budget):
            out.append((pairs, beta))
    out.sort(key=lambda m: (mono_weight(lat, m), m))
    return out


def _mode_multisets(rank: int, budget: int):
    """Multisets of (i, n) factors with total sum(n * mult) <= budget."""
    factors = [(i, n) for n in range(1, budget + 1) for i in range(rank)]

    def rec(idx, remaining):
        if idx == len(factors):
            yield ()
            return
        i, n = factors[idx]
        max_mult = remaining // n
        for mult in range(max_mult + 1):
            for rest in rec(idx + 1, remaining - mult * n):
                yield ((((i, n), mult),) if mult else ()) + rest
    for pairs in rec(0, budget):
        yield tuple(sorted(pairs))


# -- canonical text rendering and parsing ---------------------------------


def render_mono(mono) -> str:
    pairs, beta = mono
    parts = []
    for (i, n), mult in pairs:
        s = f"a{i + 1}(-{n})"
        if mult > 1:
            s += f"^{mult}"
        parts.append(s)
    if any(beta):
        parts.append("e[" + ",".join(str(b) for b in beta) + "]")
    return " ".join(parts) if parts else "1"


def _mono_sort_key(lat_mono):
    pairs, beta = lat_mono
    return (beta, pairs)


def render_state(v: State) -> str:
    if not v.terms:
        return "0"
    parts = []
    for mono in sorted(v.terms, key=_mono_sort_key):
        c = v.terms[mono]
        cs = render_scalar(c)
        ms = render_mono(mono)
        if ms == "1":
            body = cs if " " not in cs else f"({cs})"
        elif cs == "1":
            body = ms
        elif cs == "-1":
            body = f"-{ms}"
        else:
            body = (f"{cs}*{ms}" if " " not in cs else f"({cs})*{ms}")
        if not parts:
            parts.append(body)
        elif body.startswith("-"):
            parts.append(f"- {body[1:]}")
        else:
            parts.append(f"+ {body}")
    return " ".join(parts)


_FACTOR_RE = re.compile(r"a(\d+)\(-(\d+)\)(?:\^(\d+))?|e\[([-\d,\s]*)\]|(-?\d+(?:/\d+)?)")


def parse_state(text: str, rank: int) -> State:
    """Parse the canonical rendering, e.g. '2*a1(-2)^2 e[1] - 1/2*e[-1]'."""
    out = State()
    for piece, sign in _split_terms(text):
        pairs = {}
        beta = (0,) * rank
        coeff = mpq(sign)
        pos = 0
        for tok in piece.replace("*", " ").split():
            m = _FACTOR_RE.fullmatch(tok.strip())
            if not m:
                raise ValueError(f"cannot parse state factor {tok!r}")
            if m.group(1):
                i, n = int(m.group(1)) - 1, int(m.group(2))
                mult = int(m.group(3) or 1)
                if not (0 <= i < rank):
                    raise ValueError(f"basis index out of range in {tok!r}")
                pairs[(i, n)] = pairs.get((i, n), 0) + mult
            elif m.group(4) is not None:
                coords = [int(x) for x in m.group(4).split(",") if x.strip()]
                if len(coords) != rank:
                    raise ValueError(f"label length {len(coords)} != rank {rank}")
                beta = tuple(coords)
            else:
                coeff = coeff * mpq(m.group(5))
            pos += 1
        if piece.strip() in ("1", ""):
            mono = ((), beta)
        else:
            mono = (tuple(sorted(pairs.items())), beta)
        out = out + State.monomial(mono, coeff)
    return out


def _split_terms(text: str):
    """Split on top-level + and - (respecting e[...] brackets)."""
    terms = []
    depth = 0
    cur = ""
    sign = 1
    for ch in text:
        if ch in "[(":
            depth += 1
        elif ch in "])":
            depth -= 1
        if ch in "+-" and depth == 0:
            if cur.strip():
                terms.append((cur, sign))
            cur = ""
            sign = 1 if ch == "+" else -1
        else:
            cur += ch
    if cur.strip():
        terms.append((cur, sign))
    return terms
