"""Finitely generated abelian groups over exact integers.

A group is a presentation ``Z^n / L`` where ``L`` is spanned by relation rows.
Everything reduces to a Smith normal form with a fixed pivot rule, so results
are reproducible bit for bit.

>>> G = FgAbGroup(2, [[2, 0], [0, 4]])
>>> G.invariant_factors, G.free_rank
((2, 4), 0)
>>> d0 = GroupHom(FgAbGroup.free(3), FgAbGroup.free(1), [[1, -1, 0]])
>>> kernel(d0)[0].free_rank, cokernel(d0)[0].is_trivial()
(2, True)
"""
from __future__ import annotations

from functools import reduce
from itertools import product
from math import gcd, prod

from .errors import BadModulus, IllFormedHom, ShapeMismatch


class IntMatrix:
    """Immutable row-major integer matrix."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, data, rows=None, cols=None):
        data = tuple(tuple(int(v) for v in row) for row in data)
        if rows is None:
            rows = len(data)
        if cols is None:
            cols = len(data[0]) if data else 0
        if len(data) != rows or any(len(r) != cols for r in data):
            raise ShapeMismatch(f"expected {rows}x{cols} entries")
        self.rows = rows
        self.cols = cols
        self._data = data

    @classmethod
    def zeros(cls, rows, cols):
        return cls([[0] * cols for _ in range(rows)], rows, cols)

    @classmethod
    def identity(cls, n):
        return cls([[int(i == j) for j in range(n)] for i in range(n)], n, n)

    @classmethod
    def block_diag(cls, blocks):
        rows = sum(b.rows for b in blocks)
        cols = sum(b.cols for b in blocks)
        out = [[0] * cols for _ in range(rows)]
        r0 = c0 = 0
        for b in blocks:
            for i in range(b.rows):
                out[r0 + i][c0:c0 + b.cols] = b._data[i]
            r0 += b.rows
            c0 += b.cols
        return cls(out, rows, cols)

    @classmethod
    def hstack(cls, blocks, rows=None):
        if rows is None:
            rows = blocks[0].rows
        if any(b.rows != rows for b in blocks):
            raise ShapeMismatch("hstack row counts differ")
        out = [sum((b._data[i] for b in blocks), ()) for i in range(rows)]
        return cls(out, rows, sum(b.cols for b in blocks))

    @classmethod
    def vstack(cls, blocks, cols=None):
        if cols is None:
            cols = blocks[0].cols
        if any(b.cols != cols for b in blocks):
            raise ShapeMismatch("vstack column counts differ")
        out = [r for b in blocks for r in b._data]
        return cls(out, len(out), cols)

    def __getitem__(self, ij):
        i, j = ij
        return self._data[i][j]

    def row(self, i):
        return self._data[i]

    def col(self, j):
        return tuple(r[j] for r in self._data)

    def to_lists(self):
        return [list(r) for r in self._data]

    @property
    def T(self):
        return IntMatrix([self.col(j) for j in range(self.cols)], self.cols, self.rows)

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ShapeMismatch(f"{self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        cols = [other.col(j) for j in range(other.cols)]
        return IntMatrix(
            [[sum(a * b for a, b in zip(r, c)) for c in cols] for r in self._data],
            self.rows,
            other.cols,
        )

    def apply(self, vec):
        vec = tuple(vec)
        if len(vec) != self.cols:
            raise ShapeMismatch(f"vector of length {len(vec)} for {self.cols} columns")
        return tuple(sum(a * b for a, b in zip(r, vec)) for r in self._data)

    def scaled(self, k):
        return IntMatrix([[k * v for v in r] for r in self._data], self.rows, self.cols)

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ShapeMismatch("matrix sum shapes differ")
        return IntMatrix(
            [[a + b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)],
            self.rows,
            self.cols,
        )

    def is_zero(self):
        return all(v == 0 for r in self._data for v in r)

    def det(self):
        """Bareiss fraction-free determinant (square matrices only)."""
        if self.rows != self.cols:
            raise ShapeMismatch("det of non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        a = self.to_lists()
        sign, prev = 1, 1
        for k in range(n - 1):
            if a[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
                if swap is None:
                    return 0
                a[k], a[swap] = a[swap], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def __eq__(self, other):
        return isinstance(other, IntMatrix) and self._data == other._data and (
            self.rows, self.cols) == (other.rows, other.cols)

    def __hash__(self):
        return hash((self.rows, self.cols, self._data))

    def __repr__(self):
        return f"IntMatrix({self.to_lists()!r})"


def _as_matrix(m, rows=None, cols=None):
    if isinstance(m, IntMatrix):
        return m
    return IntMatrix(m, rows, cols)


# -- Smith normal form ------------------------------------------------------

def _pick_pivot(a, t, m, n):
    best = None
    for i in range(t, m):
        row = a[i]
        for j in range(t, n):
            v = row[j]
            if v and (best is None or abs(v) < best[0]):
                best = (abs(v), i, j)
                if best[0] == 1:
                    return i, j
    return None if best is None else best[1:]


def _snf(a, m, n):
    """In-place Smith reduction of list-of-lists ``a``.

    Returns (U, V, Vinv) as lists of lists, with U·M·V equal to the final ``a``.
    Pivot: smallest nonzero absolute value in the active block, row-major ties.
    """
    U = [[int(i == j) for j in range(m)] for i in range(m)]
    V = [[int(i == j) for j in range(n)] for i in range(n)]
    Vi = [[int(i == j) for j in range(n)] for i in range(n)]
    for t in range(min(m, n)):
        while True:
            piv = _pick_pivot(a, t, m, n)
            if piv is None:
                return U, V, Vi
            i, j = piv
            if i != t:
                a[t], a[i] = a[i], a[t]
                U[t], U[i] = U[i], U[t]
            if j != t:
                for row in a:
                    row[t], row[j] = row[j], row[t]
                for row in V:
                    row[t], row[j] = row[j], row[t]
                Vi[t], Vi[j] = Vi[j], Vi[t]
            p = a[t][t]
            clean = True
            for i in range(t + 1, m):
                if a[i][t]:
                    q = a[i][t] // p
                    ri, rt = a[i], a[t]
                    for k in range(t, n):
                        ri[k] -= q * rt[k]
                    ui, ut = U[i], U[t]
                    for k in range(m):
                        ui[k] -= q * ut[k]
                    if ri[t]:
                        clean = False
            rt = a[t]
            for j in range(t + 1, n):
                if rt[j]:
                    q = rt[j] // p
                    for row in a:
                        row[j] -= q * row[t]
                    for row in V:
                        row[j] -= q * row[t]
                    vt, vj = Vi[t], Vi[j]
                    for k in range(n):
                        vt[k] += q * vj[k]
                    if rt[j]:
                        clean = False
            if not clean:
                continue
            bad = next(
                (i for i in range(t + 1, m) for j in range(t + 1, n) if a[i][j] % p),
                None,
            )
            if bad is None:
                break
            for k in range(t, n):
                a[t][k] += a[bad][k]
            for k in range(m):
                U[t][k] += U[bad][k]
        if a[t][t] < 0:
            a[t] = [-v for v in a[t]]
            U[t] = [-v for v in U[t]]
    return U, V, Vi


def smith_normal_form(M):
    """Return (U, D, V) with U·M·V = D, U and V unimodular, d1 | d2 | ...

    >>> U, D, V = smith_normal_form(IntMatrix([[2, 4], [6, 8]]))
    >>> D.to_lists()
    [[2, 0], [0, 4]]
    """
    M = _as_matrix(M)
    m, n = M.rows, M.cols
    a = M.to_lists()
    U, V, _ = _snf(a, m, n)
    return IntMatrix(U, m, m), IntMatrix(a, m, n), IntMatrix(V, n, n)


def _diag(a, m, n):
    return [a[i][i] for i in range(min(m, n))]


def integer_nullspace(M):
    """Basis (list of tuples) of {x in Z^n : M x = 0}."""
    M = _as_matrix(M)
    m, n = M.rows, M.cols
    a = M.to_lists()
    _, V, _ = _snf(a, m, n)
    r = sum(1 for d in _diag(a, m, n) if d)
    return [tuple(V[i][j] for i in range(n)) for j in range(r, n)]


def solve_integer(M, b):
    """One integer solution x of M x = b, or None."""
    M = _as_matrix(M)
    m, n = M.rows, M.cols
    b = tuple(b)
    if len(b) != m:
        raise ShapeMismatch("right-hand side length differs from row count")
    a = M.to_lists()
    U, V, _ = _snf(a, m, n)
    ub = [sum(U[i][k] * b[k] for k in range(m)) for i in range(m)]
    diag = _diag(a, m, n)
    w = [0] * n
    for i in range(m):
        d = diag[i] if i < len(diag) else 0
        if d == 0:
            if ub[i] != 0:
                return None
        else:
            if ub[i] % d:
                return None
            w[i] = ub[i] // d
    return tuple(sum(V[i][k] * w[k] for k in range(n)) for i in range(n))


# -- groups -------------------------------------------------------------------

class FgAbGroup:
    """``Z^n`` modulo the row span of ``relations``; immutable.

    The Smith form is computed once at construction.  Canonical coordinates
    (coordinates in the Smith basis, reduced modulo each invariant factor)
    decide equality of elements.
    """

    def __init__(self, num_generators, relations=()):
        n = int(num_generators)
        rel = [tuple(int(v) for v in r) for r in relations]
        if any(len(r) != n for r in rel):
            raise ShapeMismatch("relation length differs from generator count")
        rel = [r for r in rel if any(r)]
        self.num_generators = n
        self.relations = IntMatrix(rel, len(rel), n)
        a = self.relations.to_lists()
        k = len(rel)
        _, V, Vi = _snf(a, k, n)
        diag = _diag(a, k, n) + [0] * (n - min(k, n))
        self._V = V
        self._Vi = Vi
        self._diag = tuple(diag)
        self.invariant_factors = tuple(d for d in diag if d >= 2)
        self.free_rank = sum(1 for d in diag if d == 0)
        self._slots = tuple(i for i, d in enumerate(diag) if d != 1)

    @classmethod
    def free(cls, rank):
        return cls(rank)

    @classmethod
    def cyclic(cls, d):
        return cls(1, [[d]])

    @classmethod
    def from_invariants(cls, free_rank=0, factors=()):
        factors = [f for f in factors if f != 1]
        n = free_rank + len(factors)
        rel = []
        for i, f in enumerate(factors):
            row = [0] * n
            row[i] = f
            rel.append(row)
        return cls(n, rel)

    def normal_form(self):
        return self.free_rank, self.invariant_factors

    def is_trivial(self):
        return self.free_rank == 0 and not self.invariant_factors

    def is_finite(self):
        return self.free_rank == 0

    def order(self):
        return prod(self.invariant_factors) if self.free_rank == 0 else None

    def is_isomorphic(self, other):
        return self.normal_form() == other.normal_form()

    def canonical(self, coords):
        """Canonical key of the class of ``coords``; equal keys mean equal classes."""
        coords = tuple(coords)
        if len(coords) != self.num_generators:
            raise ShapeMismatch("coordinate length differs from generator count")
        n = self.num_generators
        V = self._V
        out = []
        for i in self._slots:
            c = sum(coords[k] * V[k][i] for k in range(n))
            d = self._diag[i]
            out.append(c % d if d else c)
        return tuple(out)

    def from_canonical(self, key):
        """Generator coordinates of the element with canonical key ``key``."""
        n = self.num_generators
        c = [0] * n
        for i, v in zip(self._slots, key):
            c[i] = v
        Vi = self._Vi
        return tuple(sum(c[k] * Vi[k][j] for k in range(n)) for j in range(n))

    def element(self, coords):
        return GroupElement(self, coords)

    def zero(self):
        return GroupElement(self, (0,) * self.num_generators)

    def generator(self, i):
        return GroupElement(self, tuple(int(i == j) for j in range(self.num_generators)))

    def generators(self):
        return [self.generator(i) for i in range(self.num_generators)]

    def contains_relation(self, vec):
        return all(v == 0 for v in self.canonical(vec))

    def elements(self):
        """All elements of a finite group, in canonical-key order."""
        if self.free_rank:
            raise ValueError("group is infinite")
        ranges = [range(self._diag[i]) for i in self._slots]
        return [GroupElement(self, self.from_canonical(key)) for key in product(*ranges)]

    def sample(self, radius=1):
        """Deterministic finite sample; all elements when the group is finite."""
        ranges = [
            range(self._diag[i]) if self._diag[i] else range(-radius, radius + 1)
            for i in self._slots
        ]
        return [GroupElement(self, self.from_canonical(key)) for key in product(*ranges)]

    def smith_basis(self):
        """(S, to_s, from_s): S diagonal presentation, mutually inverse homs."""
        S = FgAbGroup.from_invariants(self.free_rank, self.invariant_factors)
        # Smith slots are ordered: factors >= 2 first, then free ones.
        order = [i for i in self._slots if self._diag[i] != 0] + [
            i for i in self._slots if self._diag[i] == 0]
        n = self.num_generators
        to_rows = [[self._V[k][i] for k in range(n)] for i in order]
        from_cols = [[self._Vi[i][j] for j in range(n)] for i in order]
        to_s = GroupHom(self, S, IntMatrix(to_rows, len(order), n), check=False)
        from_s = GroupHom(S, self, IntMatrix(from_cols, len(order), n).T, check=False)
        return S, to_s, from_s

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, FgAbGroup) or other.num_generators != self.num_generators:
            return False
        if self.normal_form() != other.normal_form():
            return False
        return all(other.contains_relation(r) for r in self.relations.to_lists()) and all(
            self.contains_relation(r) for r in other.relations.to_lists())

    def __hash__(self):
        return hash((self.num_generators, self.normal_form()))

    def describe(self):
        parts = ["Z"] * self.free_rank + [f"Z_{d}" for d in self.invariant_factors]
        return " + ".join(parts) if parts else "0"

    def __repr__(self):
        return f"FgAbGroup({self.describe()})"


class GroupElement:
    """Element of a presented group; equality is modulo the relation lattice."""

    __slots__ = ("group", "coords", "_key")

    def __init__(self, group, coords):
        coords = tuple(int(c) for c in coords)
        self.group = group
        self.coords = coords
        self._key = group.canonical(coords)

    @property
    def key(self):
        return self._key

    def _check(self, other):
        if other.group is not self.group and other.group != self.group:
            raise ShapeMismatch("elements of different groups")

    def __add__(self, other):
        self._check(other)
        return GroupElement(self.group, [a + b for a, b in zip(self.coords, other.coords)])

    def __sub__(self, other):
        self._check(other)
        return GroupElement(self.group, [a - b for a, b in zip(self.coords, other.coords)])

    def __neg__(self):
        return GroupElement(self.group, [-a for a in self.coords])

    def __rmul__(self, k):
        return GroupElement(self.group, [k * a for a in self.coords])

    def is_zero(self):
        return all(v == 0 for v in self._key)

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self._key == other._key and (
            other.group is self.group or other.group == self.group)

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"GroupElement({list(self.coords)} in {self.group.describe()})"


def direct_sum(*groups):
    """(S, inclusions, projections) for the external direct sum."""
    n = sum(g.num_generators for g in groups)
    rels = []
    offset = 0
    for g in groups:
        for r in g.relations.to_lists():
            rels.append([0] * offset + r + [0] * (n - offset - g.num_generators))
        offset += g.num_generators
    S = FgAbGroup(n, rels)
    incs, projs = [], []
    offset = 0
    for g in groups:
        k = g.num_generators
        inc = [[int(i == offset + j) for j in range(k)] for i in range(n)]
        incs.append(GroupHom(g, S, IntMatrix(inc, n, k), check=False))
        projs.append(GroupHom(S, g, IntMatrix(inc, n, k).T, check=False))
        offset += k
    return S, incs, projs


class GroupHom:
    """Homomorphism given by an integer matrix (target coords x source generators)."""

    def __init__(self, source, target, matrix, check=True):
        M = _as_matrix(matrix, target.num_generators, source.num_generators)
        if (M.rows, M.cols) != (target.num_generators, source.num_generators):
            raise ShapeMismatch(
                f"matrix {M.rows}x{M.cols} for hom with {source.num_generators} "
                f"source and {target.num_generators} target generators")
        self.source = source
        self.target = target
        self.matrix = M
        if check and not self.is_well_defined():
            raise IllFormedHom("matrix does not respect the source relations")

    def is_well_defined(self):
        return all(
            self.target.contains_relation(self.matrix.apply(r))
            for r in self.source.relations.to_lists())

    def __call__(self, x):
        coords = x.coords if isinstance(x, GroupElement) else tuple(x)
        return GroupElement(self.target, self.matrix.apply(coords))

    @classmethod
    def zero(cls, source, target):
        return cls(source, target, IntMatrix.zeros(target.num_generators, source.num_generators),
                   check=False)

    @classmethod
    def identity(cls, group):
        return cls(group, group, IntMatrix.identity(group.num_generators), check=False)

    @classmethod
    def scalar(cls, group, k):
        return cls(group, group, IntMatrix.identity(group.num_generators).scaled(k), check=False)

    def __matmul__(self, other):
        return hom_compose(self, other)

    def __add__(self, other):
        if not (_same(self.source, other.source) and _same(self.target, other.target)):
            raise ShapeMismatch("sum of homs with different endpoints")
        return GroupHom(self.source, self.target, self.matrix + other.matrix, check=False)

    def is_zero(self):
        return all(self(g).is_zero() for g in self.source.generators())

    def __eq__(self, other):
        if not isinstance(other, GroupHom):
            return NotImplemented
        return hom_equal(self, other)

    __hash__ = None

    def __repr__(self):
        return (f"GroupHom({self.source.describe()} -> {self.target.describe()}, "
                f"{self.matrix.to_lists()})")


def _same(g, h):
    return g is h or g == h


def hom_compose(g, f):
    """g after f."""
    if not _same(f.target, g.source):
        raise ShapeMismatch("hom_compose: target of f is not the source of g")
    return GroupHom(f.source, g.target, g.matrix @ f.matrix, check=False)


def hom_equal(f, g):
    if not (_same(f.source, g.source) and _same(f.target, g.target)):
        raise ShapeMismatch("hom_equal: homs have different endpoints")
    return all(f(e) == g(e) for e in f.source.generators())


def element_image(h, x):
    return h(x)


def _require_well_defined(h):
    if not h.is_well_defined():
        raise IllFormedHom("hom does not respect the source relations")


def _subgroup(G, gens):
    """Subgroup of G spanned by coordinate vectors; returns (S, inclusion) in Smith form."""
    n = G.num_generators
    gens = [tuple(g) for g in gens if not G.contains_relation(g)]
    s = len(gens)
    if s == 0:
        S = FgAbGroup(0)
        return S, GroupHom(S, G, IntMatrix.zeros(n, 0), check=False)
    rel = G.relations
    block = IntMatrix.hstack(
        [IntMatrix(gens, s, n).T, rel.T.scaled(-1)] if rel.rows else [IntMatrix(gens, s, n).T],
        rows=n)
    rows = [v[:s] for v in integer_nullspace(block)]
    P = FgAbGroup(s, rows)
    inc = GroupHom(P, G, IntMatrix(gens, s, n).T, check=False)
    Ps, _, from_s = P.smith_basis()
    return Ps, hom_compose(inc, from_s)


def kernel(h):
    """(K, inclusion) with image(inclusion) = {x : h(x) = 0}."""
    _require_well_defined(h)
    M = h.matrix
    R = h.target.relations
    m = h.target.num_generators
    n = h.source.num_generators
    blocks = [M] + ([R.T.scaled(-1)] if R.rows else [])
    block = IntMatrix.hstack(blocks, rows=m) if m else IntMatrix.zeros(0, n + R.rows)
    gens = [v[:n] for v in integer_nullspace(block)]
    return _subgroup(h.source, gens)


def image(h):
    """(Im, inclusion into target)."""
    _require_well_defined(h)
    return _subgroup(h.target, [h.matrix.col(j) for j in range(h.source.num_generators)])


def cokernel(h):
    """(Q, projection) with Q = target / image(h)."""
    _require_well_defined(h)
    T = h.target
    rels = T.relations.to_lists() + [list(h.matrix.col(j)) for j in range(h.matrix.cols)]
    Q = FgAbGroup(T.num_generators, rels)
    Qs, to_s, _ = Q.smith_basis()
    return Qs, GroupHom(T, Qs, to_s.matrix, check=False)


def _check_modulus(n):
    if int(n) < 2:
        raise BadModulus(f"modulus must be at least 2, got {n}")


def tensor_zn(G, n):
    """G tensor Z_n, on the same generators as G."""
    _check_modulus(n)
    k = G.num_generators
    rels = G.relations.to_lists() + [[n * int(i == j) for j in range(k)] for i in range(k)]
    return FgAbGroup(k, rels)


def n_torsion(G, n):
    """(T, inclusion) where T = {g : n g = 0}."""
    _check_modulus(n)
    return kernel(GroupHom.scalar(G, n))


def tor_zn(G, n):
    """Tor(G, Z_n), realised as the n-torsion subgroup of G."""
    return n_torsion(G, n)[0]


def solve_preimage(h, y):
    """Source coordinates x with h(x) = y, or None when y is not in the image."""
    T = h.target
    coords = y.coords if isinstance(y, GroupElement) else tuple(y)
    if len(coords) != T.num_generators:
        raise ShapeMismatch("element does not live in the target")
    if T.num_generators == 0:
        return (0,) * h.source.num_generators
    blocks = [h.matrix] + ([T.relations.T] if T.relations.rows else [])
    A = IntMatrix.hstack(blocks, rows=T.num_generators)
    sol = solve_integer(A, coords)
    return None if sol is None else sol[: h.source.num_generators]


def subgroup_membership(h, y):
    """Is y in the image of h?"""
    return solve_preimage(h, y) is not None


def lift_through(inj, f):
    """Matrix-level lift of ``f`` through an injective ``inj`` (image(f) inside image(inj))."""
    cols = []
    for e in f.source.generators():
        x = solve_preimage(inj, f(e))
        if x is None:
            raise IllFormedHom("image does not lie in the subgroup")
        cols.append(x)
    M = IntMatrix(cols, len(cols), inj.source.num_generators).T if cols else IntMatrix.zeros(
        inj.source.num_generators, 0)
    return GroupHom(f.source, inj.source, M)


def is_injective(h):
    return kernel(h)[0].is_trivial()


def is_surjective(h):
    return cokernel(h)[0].is_trivial()


def is_exact_at(f, g):
    """image(f) = kernel(g), checked by double inclusion on generators."""
    if not _same(f.target, g.source):
        raise ShapeMismatch("maps are not composable")
    if not all(g(f(e)).is_zero() for e in f.source.generators()):
        return False
    _, inc = kernel(g)
    return all(subgroup_membership(f, inc(e)) for e in inc.source.generators())


# -- Grothendieck groups --------------------------------------------------------

class MonoidToGroup:
    """The natural map rho from a monoid into its Grothendieck group."""

    def __init__(self, monoid, group, word_of):
        self.monoid = monoid
        self.group = group
        self._word_of = word_of

    def __call__(self, x):
        return GroupElement(self.group, self._word_of(x))


def grothendieck_group(M):
    """(Gr(M), rho) for a monoid exposing ``presentation()`` and ``word_of``.

    ``presentation()`` returns (generators, relations) where relations are
    pairs of non-negative exponent vectors; ``word_of(x)`` writes x as such a
    vector.
    """
    gens, relations = M.presentation()
    k = len(gens)
    rows = [[a - b for a, b in zip(lhs, rhs)] for lhs, rhs in relations]
    G = FgAbGroup(k, rows)
    return G, MonoidToGroup(M, G, M.word_of)


def hom_count_to_cyclic(G, k):
    """|Hom(G, Z_k)|, from the normal form."""
    return k ** G.free_rank * reduce(lambda acc, d: acc * gcd(d, k), G.invariant_factors, 1)
