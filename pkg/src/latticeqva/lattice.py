"""Even nondegenerate lattices, the sign 2-cocycle, and isometries."""

from __future__ import annotations

from .scalars import mpq


def _det(rows):
    n = len(rows)
    if n == 1:
        return rows[0][0]
    out = 0
    for j in range(n):
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        out += (-1) ** j * rows[0][j] * _det(minor)
    return out


class Lattice:
    """Free abelian group of finite rank with an even Z-valued Gram matrix.

    The cocycle is stored as a sign table on ordered basis pairs and extended
    bimultiplicatively.  The default table sets eps(a_i, a_j) = (-1)^<a_i,a_j>
    for i > j and +1 otherwise, which satisfies eps(a,b)/eps(b,a) =
    (-1)^<a,b> because the diagonal Gram entries are even.
    """

    def __init__(self, gram, cocycle_table=None):
        self.rank = len(gram)
        self.gram = tuple(tuple(int(x) for x in row) for row in gram)
        if cocycle_table is None:
            cocycle_table = [[(-1) ** self.gram[i][j] if i > j else 1
                              for j in range(self.rank)] for i in range(self.rank)]
        self.table = tuple(tuple(int(x) for x in row) for row in cocycle_table)

    def pairing(self, alpha, beta) -> int:
        """<alpha, beta> = alpha^T A beta for integer coordinate vectors."""
        g = self.gram
        return sum(a * g[i][j] * b
                   for i, a in enumerate(alpha) if a
                   for j, b in enumerate(beta) if b)

    def pair_vec(self, alpha):
        """A*alpha, for repeated pairings against a fixed vector."""
        g = self.gram
        return tuple(sum(g[i][j] * a for j, a in enumerate(alpha)) for i in range(self.rank))

    def norm2(self, alpha) -> int:
        return self.pairing(alpha, alpha)

    def epsilon_sign(self, alpha, beta) -> int:
        """The cocycle value as +-1 (bimultiplicative extension of the table)."""
        e = 0
        for i, a in enumerate(alpha):
            if not a:
                continue
            for j, b in enumerate(beta):
                if b and self.table[i][j] == -1:
                    e += a * b
        return -1 if e % 2 else 1

    def epsilon(self, alpha, beta):
        return mpq(self.epsilon_sign(alpha, beta))

    def validate(self) -> list:
        """Structural checks; returns a list of violation strings (empty = valid)."""
        out = []
        n = self.rank
        if any(len(row) != n for row in self.gram):
            out.append("gram matrix is not square")
            return out
        for i in range(n):
            for j in range(n):
                if self.gram[i][j] != self.gram[j][i]:
                    out.append(f"gram not symmetric at ({i},{j})")
        for i in range(n):
            if self.gram[i][i] % 2 != 0:
                out.append(f"odd diagonal at {i}")
        if _det([list(r) for r in self.gram]) == 0:
            out.append("det=0 (degenerate)")
        for i in range(n):
            for j in range(n):
                if self.table[i][j] not in (1, -1):
                    out.append(f"cocycle entry ({i},{j}) not a sign")
        # generator-level commutator condition
        for i in range(n):
            for j in range(n):
                lhs = self.table[i][j] * self.table[j][i]
                if lhs != (-1) ** (self.gram[i][j] % 2):
                    out.append(f"cocycle commutator condition fails at ({i},{j})")
        return out

    def basis_vector(self, i):
        return tuple(1 if k == i else 0 for k in range(self.rank))

    def coord_box(self, bound: int):
        """All coordinate vectors with |c_i| <= bound, in lexicographic order."""
        def rec(i):
            if i == self.rank:
                yield ()
                return
            for rest in rec(i + 1):
                for c in range(-bound, bound + 1):
                    yield (c,) + rest
        return sorted(rec(0))


class Isometry:
    """Integer matrix g with g^T A g = A, plus a character value chi(g)."""

    def __init__(self, matrix, chi):
        self.matrix = tuple(tuple(int(x) for x in row) for row in matrix)
        self.chi = chi

    def apply(self, alpha):
        m = self.matrix
        return tuple(sum(m[i][j] * a for j, a in enumerate(alpha)) for i in range(len(m)))


def isometry_validate(lat: Lattice, g: Isometry) -> list:
    """Checks g^T A g = A and eps-invariance on basis pairs (needed for lambda=1)."""
    out = []
    n = lat.rank
    if len(g.matrix) != n or any(len(r) != n for r in g.matrix):
        out.append("matrix shape mismatch")
        return out
    if not g.chi:
        out.append("character value is zero")
    basis = [lat.basis_vector(i) for i in range(n)]
    for i in range(n):
        for j in range(n):
            if lat.pairing(g.apply(basis[i]), g.apply(basis[j])) != lat.gram[i][j]:
                out.append(f"pairing not preserved at ({i},{j})")
            if lat.epsilon_sign(g.apply(basis[i]), g.apply(basis[j])) != \
                    lat.epsilon_sign(basis[i], basis[j]):
                out.append(f"cocycle not preserved at ({i},{j})")
    return out


def vec_add(a, b):
    return tuple(x + y for x, y in zip(a, b))


def vec_neg(a):
    return tuple(-x for x in a)


def vec_is_zero(a):
    return all(x == 0 for x in a)
