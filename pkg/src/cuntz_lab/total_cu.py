"""Unitary and total Cuntz semigroups assembled from ideal-lattice data.

An :class:`AlgebraDescriptor` records, for a model ``cu`` of the Cuntz
semigroup, the principal ideals (each with a compact generator), the total
K-theory of each ideal, the maps delta_IJ between them for I inside J, and a
map k0 from Gr of the compacts of ``cu`` to K_0 of the top ideal.

The total semigroup is the disjoint union over ideals I of
Cu_f(I) x F(I), where the fiber F(I) is K_1(I) plus all mod-p groups
K_*(I; Z_p) (only K_1(I) for the unitary version).  An element is stored as
``(x, key)`` with ``key`` the canonical key of its fiber coordinate in F(I_x).

    (x, f) + (y, g) = (x + y, delta(f) + delta(g))
    (x, f) <= (y, g)  iff  x <= y and delta_{I_x I_y}(f) = g
    (x, f) << (y, g)  iff  x << y and delta_{I_x I_y}(f) = g
"""
from __future__ import annotations

from itertools import permutations, product

from .abelian import (
    FgAbGroup,
    GroupHom,
    IntMatrix,
    _subgroup,
    direct_sum,
    grothendieck_group,
    hom_compose,
    hom_equal,
    image,
    is_exact_at,
    is_injective,
    is_surjective,
    lift_through,
    solve_preimage,
    subgroup_membership,
)
from .bockstein import LambdaHom, build_total_k, check_lambda_linear, induced_lambda_hom
from .common import Check, Decision
from .cu_core import (
    Chain,
    CuMap,
    CuObject,
    FiniteMonoid,
    PresentedMonoid,
    compacts,
    find_isomorphism,
    ideal_lattice,
    infinity_times,
    is_algebraic,
    positively_directed,
)
from .errors import (
    IllFormedHom,
    IncompatibleSquares,
    MissingFlags,
    MissingQuotientData,
    NotAlgebraic,
    NotIncreasing,
    NotInCuU,
    NotUnital,
    ShapeMismatch,
    SizeExceeded,
    UnsupportedKind,
    ValidationError,
)

MODES = ("total", "cu1")


class IdealData:
    """A principal ideal: compact generator plus its total K-theory."""

    def __init__(self, name, generator, K):
        self.name = name
        self.generator = generator
        self.K = K

    def __repr__(self):
        return f"IdealData({self.name!r}, {self.generator!r})"


class QuotientData:
    """K-theory of A/I with the map from the total K-theory of A."""

    def __init__(self, K, pi):
        self.K = K
        self.pi = pi


class AlgebraDescriptor:
    """Invariant-level stand-in for a C*-algebra of stable rank one.

    ``deltas`` maps index pairs (i, j) of ideals to LambdaHoms; at least the
    covering pairs must be present and other comparable pairs are composed
    along a path.  ``k0`` is a GroupHom from Gr(compacts(cu)) to K_0 of the top
    ideal.
    """

    def __init__(self, name, cu, ideals, deltas, k0, unit=None, flags=None, support=(),
                 quotients=None):
        self.name = name
        self.cu = cu
        self.ideals = list(ideals)
        self.deltas = dict(deltas)
        self.k0 = k0
        self.unit = unit
        self.flags = {"stable_rank_one": True, "real_rank_zero": False, "k_pure": False,
                      "unital": unit is not None}
        self.flags.update(flags or {})
        self.support = tuple(sorted(support))
        self.quotients = dict(quotients or {})
        self._tops = [infinity_times(cu, I.generator) for I in self.ideals]
        n = len(self.ideals)
        self.order = [[cu.leq(self._tops[i], self._tops[j]) is Decision.TRUE for j in range(n)]
                      for i in range(n)]
        self._ideal_cache = {}
        self._composite = {}
        self.gr, self.rho = grothendieck_group(compacts(cu))

    # -- lattice -------------------------------------------------------------
    def __len__(self):
        return len(self.ideals)

    def index(self, name):
        for i, I in enumerate(self.ideals):
            if I.name == name:
                return i
        raise KeyError(name)

    @property
    def top(self):
        n = len(self.ideals)
        for i in range(n):
            if all(self.order[j][i] for j in range(n)):
                return i
        raise ValidationError("the ideal list has no largest element")

    @property
    def bottom(self):
        n = len(self.ideals)
        for i in range(n):
            if all(self.order[i][j] for j in range(n)):
                return i
        raise ValidationError("the ideal list has no smallest element")

    def ideal_of(self, x):
        """Index of the listed ideal generated by x (recomputed, never trusted)."""
        try:
            return self._ideal_cache[x]
        except (KeyError, TypeError):
            pass
        top = infinity_times(self.cu, x)
        for i, t in enumerate(self._tops):
            if self.cu.equal(top, t) is Decision.TRUE:
                try:
                    self._ideal_cache[x] = i
                except TypeError:
                    pass
                return i
        raise ValidationError(f"the ideal generated by {x!r} is not listed")

    def covers(self):
        n = len(self.ideals)
        out = []
        for i in range(n):
            for j in range(n):
                if i != j and self.order[i][j] and not any(
                        k not in (i, j) and self.order[i][k] and self.order[k][j]
                        for k in range(n)):
                    out.append((i, j))
        return out

    def delta(self, i, j):
        """delta_{I_i I_j}: given, identity on the diagonal, or composed along covers."""
        if i == j:
            return LambdaHom.identity(self.ideals[i].K)
        if (i, j) in self.deltas:
            return self.deltas[(i, j)]
        if not self.order[i][j]:
            raise ShapeMismatch(f"{self.ideals[i].name} is not inside {self.ideals[j].name}")
        if (i, j) not in self._composite:
            for a, b in self.covers():
                if a == i and self.order[b][j]:
                    self._composite[(i, j)] = self.delta(b, j) @ self.delta(i, b)
                    break
            else:
                raise ValidationError(f"no path of deltas from {self.ideals[i].name} to "
                                      f"{self.ideals[j].name}")
        return self._composite[(i, j)]

    def k0_of(self, x):
        return self.k0(self.rho(x))

    @property
    def top_K(self):
        return self.ideals[self.top].K


# -- validation -------------------------------------------------------------------

def validate_descriptor(d, budget=200):
    """Check the descriptor invariants; the Check lists every named failure."""
    failures = []

    def fail(name, witness=None):
        failures.append((name, witness))

    if not d.flags.get("stable_rank_one", False):
        fail("stable rank one", d.name)
    try:
        top = d.top
        d.bottom
    except ValidationError as exc:
        return Check.fail("lattice", str(exc), failures=[("lattice", str(exc))])
    for i, I in enumerate(d.ideals):
        if I.K.support != d.support:
            fail("support", I.name)
        if d.cu.is_compact(I.generator) is not Decision.TRUE:
            fail("compact generator", I.name)
    for i in range(len(d)):
        for j in range(len(d)):
            if i != j and d.order[i][j] and d.order[j][i]:
                fail("duplicate ideal", (d.ideals[i].name, d.ideals[j].name))
    elems = d.cu.all_elements() if d.cu.is_finite else d.cu.sample(budget)
    for x in elems:
        try:
            d.ideal_of(x)
        except ValidationError:
            fail("lattice completeness", x)
            break
    if d.cu.is_finite:
        if len(ideal_lattice(d.cu)) != len(d):
            fail("lattice completeness", len(ideal_lattice(d.cu)))
    for (i, j), h in d.deltas.items():
        if not d.order[i][j]:
            fail("delta direction", (d.ideals[i].name, d.ideals[j].name))
        elif i == j and not h.equals(LambdaHom.identity(d.ideals[i].K)):
            fail("delta identity", d.ideals[i].name)
        elif not check_lambda_linear(h):
            fail("delta lambda-linear", (d.ideals[i].name, d.ideals[j].name))
    if not failures:
        try:
            n = len(d)
            for i, j, k in product(range(n), repeat=3):
                if d.order[i][j] and d.order[j][k]:
                    if not (d.delta(j, k) @ d.delta(i, j)).equals(d.delta(i, k)):
                        fail("functoriality",
                             (d.ideals[i].name, d.ideals[j].name, d.ideals[k].name))
                        break
        except ValidationError as exc:
            fail("functoriality", str(exc))
    if d.k0.source.num_generators != d.gr.num_generators or d.k0.target != d.top_K.K0:
        fail("k0 shape", None)
    elif not d.k0.is_well_defined():
        fail("k0 well-defined", None)
    if d.unit is not None:
        if d.cu.is_compact(d.unit) is not Decision.TRUE:
            fail("unit compact", d.unit)
        if d.ideal_of(d.unit) != top:
            fail("unit fullness", d.unit)
    elif d.flags.get("unital"):
        fail("unit missing", None)
    if d.flags.get("real_rank_zero") and is_algebraic(d.cu) is not Decision.TRUE:
        fail("real rank zero algebraic", None)
    if failures:
        return Check.fail(failures[0][0], failures[0][1], failures=failures)
    return Check.ok(ideals=len(d))


def require_valid(d):
    report = validate_descriptor(d)
    if not report:
        raise ValidationError(f"invalid descriptor {d.name!r}: {report.failed_at}",
                              report.notes.get("failures", ()))
    return d


# -- fibers ---------------------------------------------------------------------

def _fiber_group(K, mode):
    if mode == "cu1":
        return K.K1
    return direct_sum(*[G for _, G in K.components()])[0]


def _fiber_matrix(h, mode):
    if mode == "cu1":
        return h.f[1].matrix
    return IntMatrix.block_diag([c.matrix for c in h.components()])


class TotalCu(CuObject):
    """The total semigroup (mode "total") or its unitary reduction (mode "cu1").

    With ``image`` every fiber F(I) is replaced by its image under delta_{I, top}
    inside F(top), and transport becomes the identity.
    """

    kind = "total"

    def __init__(self, d, mode="total", image=False):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        self.d = d
        self.mode = mode
        self.image = image
        self.cu = d.cu
        self.depth = d.cu.depth
        n = len(d)
        self.top = d.top
        self.base_fibers = [_fiber_group(I.K, mode) for I in d.ideals]
        self._to_top = [GroupHom(self.base_fibers[i], self.base_fibers[self.top],
                                 _fiber_matrix(d.delta(i, self.top), mode), check=False)
                        for i in range(n)]
        if image:
            self.fibers = [self.base_fibers[self.top]] * n
        else:
            self.fibers = list(self.base_fibers)
        self._homs = {}
        self._moved = {}
        self._sums = {}
        self._members = {}
        b = d.ideal_of(self.cu.zero)
        self.zero = (self.cu.zero, self.fibers[b].zero().key)
        self.is_finite = self.cu.is_finite and all(F.is_finite() for F in self.base_fibers)

    # -- fiber transport ----------------------------------------------------
    def fiber_hom(self, i, j):
        """GroupHom F(I_i) -> F(I_j) induced by delta (identity for the image variant)."""
        if (i, j) not in self._homs:
            if self.image:
                h = GroupHom.identity(self.fibers[i])
            else:
                h = GroupHom(self.fibers[i], self.fibers[j],
                             _fiber_matrix(self.d.delta(i, j), self.mode), check=False)
            self._homs[(i, j)] = h
        return self._homs[(i, j)]

    def transport(self, i, j, key):
        if i == j or self.image:
            return key
        memo = (i, j, key)
        if memo not in self._moved:
            self._moved[memo] = self.fiber_hom(i, j)(self.fibers[i].from_canonical(key)).key
        return self._moved[memo]

    def to_top(self, i, key):
        """delta_{I_i, top} of a fiber key, as a key of F(top)."""
        if self.image:
            return key
        return self._to_top[i](self.fibers[i].from_canonical(key)).key

    def element(self, x, coords=None):
        """(x, f) with f given by generator coordinates of F(I_x) (default 0).

        For the image variant ``coords`` are coordinates of the base fiber and
        are pushed into the top fiber.
        """
        i = self.d.ideal_of(x)
        F = self.base_fibers[i]
        coords = (0,) * F.num_generators if coords is None else tuple(coords)
        if self.image:
            return (x, self._to_top[i](F.element(coords).coords).key)
        return (x, F.canonical(coords))

    def _admissible(self, i, key):
        if not self.image:
            return True
        return subgroup_membership(self._to_top[i], self.fibers[i].from_canonical(key))

    # -- structure -------------------------------------------------------------
    def contains(self, z):
        try:
            return self._members[z]
        except (KeyError, TypeError):
            pass
        out = self._contains(z)
        try:
            self._members[z] = out
        except TypeError:
            pass
        return out

    def _contains(self, z):
        if not (isinstance(z, tuple) and len(z) == 2 and isinstance(z[1], tuple)):
            return False
        if not self.cu.contains(z[0]):
            return False
        try:
            i = self.d.ideal_of(z[0])
        except ValidationError:
            return False
        F = self.fibers[i]
        if len(z[1]) != len(F.zero().key):
            return False
        if F.canonical(F.from_canonical(z[1])) != z[1]:
            return False
        return self._admissible(i, z[1])

    def add(self, a, b):
        try:
            return self._sums[(a, b)]
        except (KeyError, TypeError):
            pass
        self._check(a, b)
        (x, f), (y, g) = a, b
        s = self.cu.add(x, y)
        i, j, k = self.d.ideal_of(x), self.d.ideal_of(y), self.d.ideal_of(s)
        F = self.fibers[k]
        u = F.element(F.from_canonical(self.transport(i, k, f)))
        v = F.element(F.from_canonical(self.transport(j, k, g)))
        out = (s, (u + v).key)
        try:
            self._sums[(a, b)] = out
        except TypeError:
            pass
        return out

    def _fiber_match(self, a, b):
        (x, f), (y, g) = a, b
        i, j = self.d.ideal_of(x), self.d.ideal_of(y)
        if not self.d.order[i][j]:
            return Decision.FALSE
        return Decision.of(self.transport(i, j, f) == g)

    def leq(self, a, b):
        self._check(a, b)
        base = self.cu.leq(a[0], b[0])
        if base is Decision.FALSE:
            return base
        return base & self._fiber_match(a, b)

    def way_below(self, a, b):
        self._check(a, b)
        base = self.cu.way_below(a[0], b[0])
        if base is Decision.FALSE:
            return base
        return base & self._fiber_match(a, b)

    def is_compact(self, z):
        self._check(z)
        return self.cu.is_compact(z[0])

    def _lift(self, a, target, key):
        """A fiber over a that is transported onto ``key``, or None."""
        i = self.d.ideal_of(a)
        if i == target or self.image:
            return key if self._admissible(i, key) else None
        pre = solve_preimage(self.fiber_hom(i, target),
                             self.fibers[target].from_canonical(key))
        return None if pre is None else self.fibers[i].canonical(pre)

    def approximants(self, z, depth=None):
        x, key = z
        i = self.d.ideal_of(x)
        out = []
        for a in self.cu.approximants(x, depth):
            lifted = self._lift(a, i, key)
            if lifted is not None:
                out.append((a, lifted))
        return out

    def approximant_chain(self, z):
        x, key = z
        i = self.d.ideal_of(x)
        base = self.cu.approximant_chain(x)
        if base.eventually_constant:
            return Chain.of(self.approximants(z))
        offset = next((n for n in range(self.depth)
                       if self._lift(base.term(n), i, key) is not None), 0)

        def term(n):
            a = base.term(n + offset)
            return (a, self._lift(a, i, key))

        return Chain.generated(term)

    def sup_chain(self, chain, depth=None):
        depth = depth or self.depth
        if not isinstance(chain, Chain):
            chain = Chain.of(chain)
        terms = chain.prefix(depth)
        for a, b in zip(terms, terms[1:]):
            if self.leq(a, b) is Decision.FALSE:
                raise NotIncreasing(f"{a!r} is not below {b!r}")
        s = self.cu.sup_chain(Chain(lambda n: chain.term(n)[0], chain.stable_after), depth)
        x, key = terms[-1]
        return (s, self.transport(self.d.ideal_of(x), self.d.ideal_of(s), key))

    def fiber_keys(self, i, radius=1):
        """Fiber keys over ideal i: all of them when finite, else a box sample."""
        if self.image:
            Im, inc = image(self._to_top[i])
            elems = Im.elements() if Im.is_finite() else Im.sample(radius)
            return [inc(e).key for e in elems]
        F = self.fibers[i]
        elems = F.elements() if F.is_finite() else F.sample(radius)
        return sorted((e.key for e in elems), key=_small_first)

    def all_elements(self):
        if not self.is_finite:
            raise UnsupportedKind("this total semigroup is not finite")
        out = []
        for x in self.cu.all_elements():
            out.extend((x, k) for k in self.fiber_keys(self.d.ideal_of(x)))
        return out

    def sample(self, budget=50):
        if self.is_finite:
            return self.all_elements()
        out = []
        for x in self.cu.sample(max(4, budget // 4)):
            out.extend((x, k) for k in self.fiber_keys(self.d.ideal_of(x))[:8])
        return out[:budget]

    def compact_elements(self, budget=200):
        """Compact elements: all of them when finite, else those over a cu sample."""
        xs = self.cu.all_elements() if self.cu.is_finite else self.cu.sample(budget)
        out = []
        for x in xs:
            if self.cu.is_compact(x) is Decision.TRUE:
                out.extend((x, k) for k in self.fiber_keys(self.d.ideal_of(x)))
        return out

    def __repr__(self):
        tag = " image" if self.image else ""
        return f"TotalCu({self.d.name!r}, {self.mode}{tag})"


def _small_first(key):
    return (sum(abs(v) for v in key), tuple((abs(v), v < 0) for v in key))


def assemble_total_cu(d, check=True):
    if check:
        require_valid(d)
    return TotalCu(d, "total")


def assemble_cu1(d, check=True):
    if check:
        require_valid(d)
    return TotalCu(d, "cu1")


def assemble_total_cu_image_variant(d, mode="total", check=True):
    if check:
        require_valid(d)
    return TotalCu(d, mode, image=True)


# -- total K-theory of the top ideal as one group --------------------------------

class KGroup:
    """K(A) = K_0(A) + F(top) as one group."""

    def __init__(self, T):
        self.T = T
        self.K0 = T.d.top_K.K0
        self.F = T.base_fibers[T.top]
        self.group, self.incs, self.projs = direct_sum(self.K0, self.F)

    def pack(self, k0_elem, fiber_key):
        return self.group.element(tuple(k0_elem.coords) + self.F.from_canonical(fiber_key))

    def split(self, g):
        n0 = self.K0.num_generators
        return self.K0.element(g.coords[:n0]), self.F.element(g.coords[n0:])


def kgroup(T):
    if not hasattr(T, "_kgroup"):
        T._kgroup = KGroup(T)
    return T._kgroup


def alpha(T, z):
    """alpha(x, f) = (k0(x), delta_{I_x, top}(f))."""
    x, key = z
    return kgroup(T).pack(T.d.k0_of(x), T.to_top(T.d.ideal_of(x), key))


def _require_algebraic(T):
    if is_algebraic(T.cu) is not Decision.TRUE:
        raise NotAlgebraic(f"{T.d.name}: the compact elements do not determine cu")


def _cu_compacts(d, budget):
    xs = d.cu.all_elements() if d.cu.is_finite else d.cu.sample(budget)
    return [x for x in xs if d.cu.is_compact(x) is Decision.TRUE]


def cone_contains(T, g, budget=200):
    """Is g in K(A)_+, i.e. g = ([e], phi) with e compact and phi in delta(F(I_e))?"""
    d = T.d
    g0, gf = kgroup(T).split(g)
    for x in _cu_compacts(d, budget):
        if d.k0_of(x) == g0 and subgroup_membership(T._to_top[d.ideal_of(x)], gf.coords):
            return True
    return False


def alpha_map(T, budget=200):
    """Evaluate alpha on the compacts and report injectivity and surjectivity.

    Exhaustive when cu is finite; otherwise over a sample of compacts of cu
    and a box of fiber elements.  Surjectivity is checked constructively: for
    every cone element ([e], phi) over a checked e, a preimage is solved for.
    """
    _require_algebraic(T)
    d = T.d
    K = kgroup(T)
    values = {}
    collision = None
    zs = T.compact_elements(budget)
    for z in zs:
        a = alpha(T, z).key
        if a in values and collision is None and T.equal(values[a], z) is not Decision.TRUE:
            collision = (values[a], z)
        values.setdefault(a, z)
    missing = None
    for x in _cu_compacts(d, budget):
        i = d.ideal_of(x)
        Im, inc = image(T._to_top[i])
        for t in (Im.elements() if Im.is_finite() else Im.sample(1)):
            phi = inc(t)
            pre = solve_preimage(T._to_top[i], phi)
            z = T.element(x, pre)
            if alpha(T, z) != K.pack(d.k0_of(x), phi.key):
                missing = (x, phi.key)
                break
        if missing:
            break
    zero_ok = alpha(T, T.zero).is_zero()
    return {
        "injective": collision is None,
        "surjective": missing is None,
        "zero": zero_ok,
        "collision": collision,
        "missing": missing,
        "checked": len(zs),
        "exhaustive": T.is_finite,
    }


def k0_positive(d, g, budget=200):
    """Is g in K_0^+ (the class of a compact element)?"""
    return any(d.k0_of(x) == g for x in _cu_compacts(d, budget))


def check_alpha_order_iso(T, budget=60):
    """alpha is additive, injective, unit preserving and an order isomorphism.

    On the cone, alpha(z) <= alpha(w) means that the K_0 parts differ by a
    positive class and the fiber parts agree.
    """
    d = T.d
    zs = T.compact_elements(budget)
    vals = {z: alpha(T, z) for z in zs}
    K = kgroup(T)
    for z in zs:
        for w in zs:
            s = T.add(z, w)
            if alpha(T, s) != vals[z] + vals[w]:
                return Check.fail("additive", (z, w))
            if vals[z] == vals[w] and z != w:
                return Check.fail("injective", (z, w))
            a0, af = K.split(vals[z])
            b0, bf = K.split(vals[w])
            rhs = af == bf and k0_positive(d, b0 - a0, budget)
            if (T.leq(z, w) is Decision.TRUE) != rhs:
                return Check.fail("order", (z, w))
    if d.unit is not None:
        if alpha(T, T.element(d.unit)) != K.pack(d.k0_of(d.unit), T.base_fibers[T.top].zero().key):
            return Check.fail("unit", d.unit)
    return Check.ok(checked=len(zs))


# -- Grothendieck group of the compacts -------------------------------------------

class GrReport:
    """Gr(compacts) presented as Gr(cu_c) + F(top), with rho and the unit class."""

    def __init__(self, T):
        self.T = T
        d = T.d
        self.base, self.base_rho = d.gr, d.rho
        self.F = T.base_fibers[T.top]
        self.group, self.incs, self.projs = direct_sum(self.base, self.F)

    def rho(self, z):
        x, key = z
        T = self.T
        fk = T.to_top(T.d.ideal_of(x), key)
        return self.group.element(tuple(self.base_rho(x).coords) + self.F.from_canonical(fk))

    def unit_class(self):
        d = self.T.d
        if d.unit is None:
            raise NotUnital(d.name)
        return self.rho(self.T.element(d.unit))

    def to_k(self):
        """Gr -> K(A): k0 on the first summand, identity on the fiber."""
        d = self.T.d
        K = KGroup(self.T)
        M = IntMatrix.block_diag([d.k0.matrix, IntMatrix.identity(self.F.num_generators)])
        return GroupHom(self.group, K.group, M)


def gr_compacts(T, check=True):
    """Gr of the compacts, as the colimit over ideals of Gr(Cu_f(I)_c) x F(I).

    Every listed ideal has a compact generator, so the fiber colimit is F(top)
    and rho(x, f) = (rho(x), delta_{I_x, top}(f)).  With ``check`` the induced
    map to K(A) is verified to be an isomorphism carrying [unit] to [1_A].
    """
    _require_algebraic(T)
    d = T.d
    if d.unit is None:
        raise NotUnital(d.name)
    report = GrReport(T)
    if check:
        phi = report.to_k()
        if not (is_injective(phi) and is_surjective(phi)):
            raise ValidationError("k0 does not identify Gr(cu_c) with K_0 of the top ideal")
    return report


def brute_force_gr(T):
    """Gr of the finite compact monoid of T straight from its addition table."""
    zs = [z for z in T.all_elements() if T.is_compact(z) is Decision.TRUE]
    M = FiniteMonoid.from_functions(zs, T.add, lambda a, b: bool(T.leq(a, b)), T.zero)
    G, rho = grothendieck_group(M)
    return G, rho, M


def compare_gr(T):
    """The colimit description of Gr agrees with the brute-force one (finite T)."""
    G, _, M = brute_force_gr(T)
    rep = GrReport(T)
    cols = [rep.rho(z).coords for z in M.elements]
    mat = IntMatrix(cols, len(cols), rep.group.num_generators).T
    h = GroupHom(G, rep.group, mat, check=False)
    if not h.is_well_defined():
        return Check.fail("well-defined")
    if not is_injective(h):
        return Check.fail("injective")
    if not is_surjective(h):
        return Check.fail("surjective")
    return Check.ok(group=rep.group.describe())


def symmetric_part(rho, elems):
    """Subgroup of rho(S_c) meeting -rho(S_c), with the first witness pair (a, b)."""
    vals = [(a, rho(a)) for a in elems]
    by_key = {}
    for a, ra in vals:
        by_key.setdefault(ra.key, a)
    gens, witness = [], None
    for a, ra in vals:
        b = by_key.get((-ra).key)
        if b is not None and not ra.is_zero():
            gens.append(ra.coords)
            if witness is None:
                witness = (a, b)
    if not vals:
        return FgAbGroup(0), None
    H, _ = _subgroup(vals[0][1].group, gens)
    return H, witness


def gr_report_for(S, budget=50):
    """Gr of the compacts of a Cu object and the part rho(S_c) meets -rho(S_c) in."""
    M = compacts(S)
    G, rho = grothendieck_group(M)
    elems = M.all_elements() if M.is_finite else M.sample(budget)
    H, witness = symmetric_part(rho, elems)
    return {"group": G.describe(), "symmetric_part": H.describe(), "trivial": H.is_trivial(),
            "witness": witness}


def check_cu_u(T, budget=60):
    """Positively directed, rho(S_c) meets -rho(S_c) only in 0, compact order unit.

    The order unit is tested on the positive part {(x, 0)}: every compact x
    lies below a multiple of the unit.
    """
    pd = positively_directed(T, budget)
    if pd.status is Decision.FALSE:
        raise NotInCuU("positively directed", pd.witness)
    rep = GrReport(T)
    zs = T.compact_elements(budget)
    _, witness = symmetric_part(rep.rho, zs)
    if witness is not None:
        raise NotInCuU("rho(S_c) meets -rho(S_c)", witness)
    d = T.d
    if d.unit is None or T.cu.is_compact(d.unit) is not Decision.TRUE:
        raise NotInCuU("compact order unit", d.unit)
    for x in _cu_compacts(d, budget):
        if not any(T.cu.leq(x, T.cu.multiple(n, d.unit)) is Decision.TRUE
                   for n in range(1, 65)):
            raise NotInCuU("compact order unit", x)
    return rep


def recover_total_k(T, budget=60):
    """(Gr(S_c), rho(S_c), [u]) and its verified isomorphism to (K(A), K(A)_+, [1_A])."""
    rep = check_cu_u(T, budget)
    gr_compacts(T, check=True)
    phi = rep.to_k()
    d = T.d
    K = KGroup(T)
    unit_ok = phi(rep.unit_class()) == K.pack(d.k0_of(d.unit), K.F.zero().key)
    zs = T.compact_elements(budget)
    cone_ok = all(cone_contains(T, phi(rep.rho(z)), budget) for z in zs)
    onto_ok = all(phi(rep.rho(z)) == alpha(T, z) for z in zs)
    return {
        "group": rep.group,
        "rho": rep.rho,
        "unit": rep.unit_class(),
        "iso": phi,
        "unit_preserved": unit_ok,
        "cone_preserved": cone_ok and onto_ok,
        "matches": unit_ok and cone_ok and onto_ok,
    }


def recover_kstar(d, budget=60):
    """Unitary version: compares Gr(Cu_1(A)_c) with (K_0 + K_1, K_*^+, [1])."""
    return recover_total_k(TotalCu(d, "cu1"), budget)


# -- morphisms -------------------------------------------------------------------

class DescriptorMorphism:
    """A cu map plus, per ideal i of the source, a LambdaHom K(I_i) -> K(I'_i)."""

    def __init__(self, cu_map, lambdas):
        self.cu_map = cu_map
        self.lambdas = dict(lambdas)


def gr_of_cu_map(dA, dB, psi):
    """Gr(psi_c): Gr(cu_A,c) -> Gr(cu_B,c) on presentation generators."""
    M = compacts(dA.cu)
    gens, _ = M.presentation()
    if isinstance(M, PresentedMonoid):
        k = len(gens)
        gens = [tuple(int(i == j) for j in range(k)) for i in range(k)]
    cols = [dB.rho(psi(g)).coords for g in gens]
    n = dB.gr.num_generators
    M = IntMatrix(cols, len(cols), n).T if cols else IntMatrix.zeros(n, 0)
    return GroupHom(dA.gr, dB.gr, M)


def _check_squares(dA, dB, phi):
    psi = phi.cu_map
    target = {i: dB.ideal_of(psi(I.generator)) for i, I in enumerate(dA.ideals)}
    for i, I in enumerate(dA.ideals):
        h = phi.lambdas.get(i)
        if h is None:
            raise IncompatibleSquares(f"no LambdaHom for ideal {I.name}")
        if h.source is not I.K or h.target is not dB.ideals[target[i]].K:
            if not (h.source.support == I.K.support and
                    h.target.K0 == dB.ideals[target[i]].K.K0 and
                    h.target.K1 == dB.ideals[target[i]].K.K1 and
                    h.source.K0 == I.K.K0 and h.source.K1 == I.K.K1):
                raise IncompatibleSquares(f"LambdaHom on {I.name} has the wrong ends")
        if not check_lambda_linear(h):
            raise IncompatibleSquares(f"LambdaHom on {I.name} is not Lambda-linear")
    for i in range(len(dA)):
        for j in range(len(dA)):
            if i != j and dA.order[i][j]:
                lhs = dB.delta(target[i], target[j]) @ phi.lambdas[i]
                rhs = phi.lambdas[j] @ dA.delta(i, j)
                if not lhs.equals(rhs):
                    raise IncompatibleSquares(
                        f"delta square {dA.ideals[i].name} -> {dA.ideals[j].name}")
    g = gr_of_cu_map(dA, dB, psi)
    top = dA.top
    up = dB.delta(target[top], dB.top).f[0]
    lhs = hom_compose(dB.k0, g)
    rhs = hom_compose(up, hom_compose(phi.lambdas[top].f[0], dA.k0))
    if not hom_equal(lhs, rhs):
        raise IncompatibleSquares("the K_0 part disagrees with Gr of the cu map")
    return target


def induced_morphism(dA, dB, phi, mode="total", check=True):
    """(x, f) -> (psi(x), Lambda_{I_x}(f)) as a CuMap, after verifying every square."""
    target = _check_squares(dA, dB, phi) if check else {
        i: dB.ideal_of(phi.cu_map(I.generator)) for i, I in enumerate(dA.ideals)}
    psi = phi.cu_map
    SA, SB = TotalCu(dA, mode), TotalCu(dB, mode)
    mids = {i: GroupHom(SA.fibers[i], SB.fibers[target[i]],
                        _fiber_matrix(phi.lambdas[i], mode), check=False)
            for i in range(len(dA))}

    def fn(z):
        x, key = z
        i = dA.ideal_of(x)
        y = psi(x)
        v = mids[i](SA.fibers[i].from_canonical(key))
        return (y, SB.transport(target[i], dB.ideal_of(y), v.key))

    return CuMap(SA, SB, fn, "induced")


def identity_morphism(d):
    return DescriptorMorphism(CuMap.identity(d.cu),
                              {i: LambdaHom.identity(I.K) for i, I in enumerate(d.ideals)})


# -- positivity and purity -------------------------------------------------------

def _full_group(K):
    return direct_sum(K.K0, *[G for _, G in K.components()])[0]


def _full_matrix(h):
    return IntMatrix.block_diag([h.f[0].matrix] + [c.matrix for c in h.components()])


def check_positivity_equivalence(dA, dB, phi, budget=60):
    """Evaluate (i) phi(K(A)_+) inside K(B)_+ and (ii) K_0^+ plus ideal preservation.

    ``phi`` is a LambdaHom between the top total K-theories.  Each condition
    is evaluated on its own: (i) over cone elements of A, (ii) over compact
    classes and the generators of each ideal's image.
    """
    for d in (dA, dB):
        if not (d.flags.get("real_rank_zero") and d.flags.get("stable_rank_one")):
            raise MissingFlags(f"{d.name} must be flagged real rank zero and stable rank one")
    TA, TB = TotalCu(dA), TotalCu(dB)
    KA, KB = KGroup(TA), KGroup(TB)
    full = GroupHom(KA.group, KB.group, _full_matrix(phi), check=False)
    # images can leave a box of the source's size, so search B more widely
    wide = 4 * budget
    xs = _cu_compacts(dA, budget)
    ys = _cu_compacts(dB, wide)

    cond_i, witness_i = True, None
    for z in TA.compact_elements(budget):
        if not cone_contains(TB, full(alpha(TA, z)), wide):
            cond_i, witness_i = False, z
            break

    cond_ii, witness_ii = True, None
    for x in xs:
        image0 = phi.f[0](dA.k0_of(x))
        match = next((y for y in ys if dB.k0_of(y) == image0), None)
        if match is None:
            cond_ii, witness_ii = False, ("K0+", x)
            break
        i, j = dA.ideal_of(x), dB.ideal_of(match)
        src = GroupHom(_full_group(dA.ideals[i].K), KA.group,
                       _full_matrix(dA.delta(i, dA.top)), check=False)
        dst = GroupHom(_full_group(dB.ideals[j].K), KB.group,
                       _full_matrix(dB.delta(j, dB.top)), check=False)
        if not all(subgroup_membership(dst, full(src(e)).coords)
                   for e in src.source.generators()):
            cond_ii, witness_ii = False, ("ideal", x)
            break
    return {"i": cond_i, "ii": cond_ii, "agree": cond_i == cond_ii,
            "witness_i": witness_i, "witness_ii": witness_ii}


def check_k_pure_exactness(d):
    """0 -> K_*(I; Z_p) -> K_*(A; Z_p) -> K_*(A/I; Z_p) -> 0 for every ideal and p.

    The zero ideal and the top ideal are exact without quotient data.
    """
    top, bottom = d.top, d.bottom
    checked = 0
    for i, I in enumerate(d.ideals):
        if i not in d.quotients:
            if i in (top, bottom):
                continue
            raise MissingQuotientData(f"no quotient data for ideal {I.name}")
        pi = d.quotients[i].pi
        delta = d.delta(i, top)
        for p in d.support:
            for k in (0, 1):
                inc, proj = delta.component(k, p), pi.component(k, p)
                where = f"K{k}(;Z{p}) at {I.name}"
                if not is_injective(inc):
                    return Check.fail("injective", where)
                if not is_exact_at(inc, proj):
                    return Check.fail("middle", where)
                if not is_surjective(proj):
                    return Check.fail("surjective", where)
                checked += 1
    return Check.ok(checked=checked)


# -- isomorphism search ------------------------------------------------------------

def _signed_permutations(r):
    for perm in permutations(range(r)):
        for signs in product((1, -1), repeat=r):
            rows = [[0] * r for _ in range(r)]
            for i, (j, s) in enumerate(zip(perm, signs)):
                rows[j][i] = s
            yield IntMatrix(rows, r, r)


def group_isomorphisms(G, H, bound=10_000):
    """Isomorphisms G -> H: automorphisms of the torsion part times signed
    permutations of the free part, in Smith coordinates."""
    if G.normal_form() != H.normal_form():
        return []
    Gs, to_g, _ = G.smith_basis()
    Hs, _, from_h = H.smith_basis()
    t = len(Gs.invariant_factors)
    r = Gs.free_rank
    torsion = [e for e in Hs.sample(0)]
    if len(torsion) ** t > bound:
        raise SizeExceeded("too many candidate torsion maps")
    out = []
    for combo in product(torsion, repeat=t):
        tor_cols = [e.coords[:t] for e in combo]
        T = IntMatrix(tor_cols, t, t).T if t else IntMatrix.zeros(0, 0)
        for F in (_signed_permutations(r) if r else [IntMatrix.zeros(0, 0)]):
            M = IntMatrix.block_diag([T, F])
            h = GroupHom(Gs, Hs, M, check=False)
            if h.is_well_defined() and is_injective(h) and is_surjective(h):
                out.append(hom_compose(from_h, hom_compose(h, to_g)))
    return out


def _lambda_isomorphisms(KA, KB, bound):
    out = []
    for f0 in group_isomorphisms(KA.K0, KB.K0, bound):
        for f1 in group_isomorphisms(KA.K1, KB.K1, bound):
            out.append(induced_lambda_hom(f0, f1, KA, KB))
    return out


def _forced_lambda(dA, dB, i, j, top):
    """The LambdaHom on I_i forced by delta'_j lam = top delta_i, when delta'_j is injective."""
    src, dst = dA.delta(i, dA.top), dB.delta(j, dB.top)
    parts = {}
    for k in (0, 1):
        for n in (0,) + dA.support:
            inj = dst.component(k, n)
            if not is_injective(inj):
                return None
            f = hom_compose(top.component(k, n), src.component(k, n))
            try:
                parts[(k, n)] = lift_through(inj, f)
            except IllFormedHom:
                return None
    mods = {key: h for key, h in parts.items() if key[1]}
    return LambdaHom(dA.ideals[i].K, dB.ideals[j].K, parts[(0, 0)], parts[(1, 0)], mods)


def _cu_isomorphisms(dA, dB, bound, budget):
    """Unit-preserving isomorphisms of the cu models (generator images on compacts)."""
    SA, SB = dA.cu, dB.cu
    if SA.is_finite and SB.is_finite:
        EA, EB = SA.all_elements(), SB.all_elements()
        if len(EA) != len(EB):
            return []
        iso = find_isomorphism(EA, SA.add, lambda a, b: SA.leq(a, b) is Decision.TRUE,
                               SA.zero, EB, SB.add,
                               lambda a, b: SB.leq(a, b) is Decision.TRUE, SB.zero)
        if iso is None or (dA.unit is not None and iso[dA.unit] != dB.unit):
            return []
        return [CuMap(SA, SB, lambda x, m=iso: m[x], "sigma")]
    M = compacts(SA)
    gens, rels = M.presentation()
    cands = _cu_compacts(dB, budget)
    if len(cands) ** len(gens) > bound:
        raise SizeExceeded("too many candidate generator images")
    sample = _cu_compacts(dA, budget)
    out = []
    for combo in product(cands, repeat=len(gens)):
        def on_word(w, combo=combo):
            acc = SB.zero
            for g, k in zip(combo, w):
                if k:
                    acc = SB.add(acc, SB.multiple(k, g))
            return acc

        if any(SB.equal(on_word(l), on_word(r)) is not Decision.TRUE for l, r in rels):
            continue

        def fn(x, on_word=on_word):
            if SA.is_compact(x) is Decision.TRUE:
                return on_word(M.word_of(x))
            chain = SA.approximant_chain(x)
            return SB.sup_chain(Chain.generated(lambda n: on_word(M.word_of(chain.term(n)))))

        m = CuMap(SA, SB, fn, "sigma")
        if dA.unit is not None and SB.equal(m(dA.unit), dB.unit) is not Decision.TRUE:
            continue
        g = gr_of_cu_map(dA, dB, m)
        if not (is_injective(g) and is_surjective(g)):
            continue
        if all((SA.leq(a, b) is Decision.TRUE) == (SB.leq(m(a), m(b)) is Decision.TRUE)
               for a in sample for b in sample):
            out.append(m)
    return out


def _inverse(h):
    if not (is_injective(h) and is_surjective(h)):
        return None
    cols = [solve_preimage(h, e) for e in h.target.generators()]
    n = h.source.num_generators
    M = IntMatrix(cols, len(cols), n).T if cols else IntMatrix.zeros(n, 0)
    return GroupHom(h.target, h.source, M)


def total_cu_isomorphic(S, T, bound=10_000, budget=60):
    """Search for a unit-preserving isomorphism S -> T.

    For two semigroups assembled from descriptors the search runs over unit
    preserving isomorphisms sigma of the cu models and K_1 isomorphisms of the
    top ideals; the top Lambda-hom is induced by (k0 Gr(sigma) k0^-1, f1), the
    Lambda-homs on the other ideals are forced through injective deltas (or
    enumerated), and every square is verified.  Other finite objects are
    compared by a direct search over their elements.
    """
    if not (isinstance(S, TotalCu) and isinstance(T, TotalCu)):
        if not (S.is_finite and T.is_finite):
            return {"status": "undecided", "reason": "objects are not finite"}
        if len(S.all_elements()) > bound:
            return {"status": "undecided", "reason": "size exceeds the bound"}
        E1, E2 = S.all_elements(), T.all_elements()
        iso = find_isomorphism(E1, S.add, lambda a, b: S.leq(a, b) is Decision.TRUE, S.zero,
                               E2, T.add, lambda a, b: T.leq(a, b) is Decision.TRUE, T.zero)
        return {"status": "found" if iso else "not_found", "iso": iso, "lambda_checked": False}
    dA, dB = S.d, T.d
    if (S.mode, S.image) != (T.mode, T.image) or dA.support != dB.support or len(dA) != len(dB):
        return {"status": "not_found", "iso": None, "reason": "shape"}
    KA, KB = dA.top_K, dB.top_K
    if not (KA.K0.is_isomorphic(KB.K0) and KA.K1.is_isomorphic(KB.K1)):
        return {"status": "not_found", "iso": None, "reason": "top K-groups differ"}
    try:
        sigmas = _cu_isomorphisms(dA, dB, bound, budget)
        f1s = group_isomorphisms(KA.K1, KB.K1, bound)
    except SizeExceeded as exc:
        return {"status": "undecided", "reason": str(exc)}
    inv = _inverse(dA.k0)
    if inv is None:
        return {"status": "undecided", "reason": "k0 of the source is not invertible"}
    for sigma in sigmas:
        try:
            targets = {i: dB.ideal_of(sigma(I.generator)) for i, I in enumerate(dA.ideals)}
        except ValidationError:
            continue
        if sorted(targets.values()) != list(range(len(dB))) or targets[dA.top] != dB.top:
            continue
        f0 = hom_compose(dB.k0, hom_compose(gr_of_cu_map(dA, dB, sigma), inv))
        for f1 in f1s:
            top = induced_lambda_hom(f0, f1, KA, KB)
            options = []
            for i in range(len(dA)):
                if i == dA.top:
                    options.append([top])
                    continue
                forced = _forced_lambda(dA, dB, i, targets[i], top)
                try:
                    options.append([forced] if forced is not None else _lambda_isomorphisms(
                        dA.ideals[i].K, dB.ideals[targets[i]].K, bound))
                except SizeExceeded as exc:
                    return {"status": "undecided", "reason": str(exc)}
            for choice in product(*options):
                phi = DescriptorMorphism(sigma, dict(enumerate(choice)))
                try:
                    _check_squares(dA, dB, phi)
                except IncompatibleSquares:
                    continue
                return {"status": "found", "morphism": phi, "lambda_checked": True,
                        "iso": {"f0": f0.matrix.to_lists(), "f1": f1.matrix.to_lists()}}
    return {"status": "not_found", "iso": None}


# -- construction from presentations ----------------------------------------------

def _mat(m, rows, cols):
    if isinstance(m, IntMatrix):
        return m
    if m is None or rows == 0 or cols == 0:
        return IntMatrix.zeros(rows, cols)
    return IntMatrix([list(r) for r in m], rows, cols)


def make_descriptor(name, cu, ideals, deltas, k0_matrix, unit=None, flags=None, support=(),
                    quotients=None, mods=None):
    """Build a descriptor from K-group presentations.

    ``ideals``: list of (name, generator, K0, K1).  ``deltas``: {(name, name):
    (f0 matrix, f1 matrix)}, with the mod-n components induced on the split
    model unless ``mods[(name, name)]`` supplies {(k, n): matrix} overrides.
    ``quotients``: {name: (Q0, Q1, pi0 matrix, pi1 matrix)}.
    """
    support = tuple(sorted(support))
    data = [IdealData(n, g, build_total_k(K0, K1, support)) for n, g, K0, K1 in ideals]
    index = {I.name: i for i, I in enumerate(data)}
    mods = mods or {}
    lam = {}
    for (a, b), (m0, m1) in deltas.items():
        Ka, Kb = data[index[a]].K, data[index[b]].K
        f0 = GroupHom(Ka.K0, Kb.K0, _mat(m0, Kb.K0.num_generators, Ka.K0.num_generators))
        f1 = GroupHom(Ka.K1, Kb.K1, _mat(m1, Kb.K1.num_generators, Ka.K1.num_generators))
        h = induced_lambda_hom(f0, f1, Ka, Kb)
        for (k, n), m in mods.get((a, b), {}).items():
            Gs, Gt = Ka.groups[(k, n)], Kb.groups[(k, n)]
            h.mods[(k, n)] = GroupHom(Gs, Gt, _mat(m, Gt.num_generators, Gs.num_generators),
                                      check=False)
        lam[(index[a], index[b])] = h
    d = AlgebraDescriptor(name, cu, data, lam, None, unit, flags, support)
    K0 = d.top_K.K0
    d.k0 = GroupHom(d.gr, K0, _mat(k0_matrix, K0.num_generators, d.gr.num_generators),
                    check=False)
    for qname, (Q0, Q1, p0, p1) in (quotients or {}).items():
        QK = build_total_k(Q0, Q1, support)
        TK = d.top_K
        f0 = GroupHom(TK.K0, QK.K0, _mat(p0, Q0.num_generators, TK.K0.num_generators))
        f1 = GroupHom(TK.K1, QK.K1, _mat(p1, Q1.num_generators, TK.K1.num_generators))
        d.quotients[index[qname]] = QuotientData(QK, induced_lambda_hom(f0, f1, TK, QK))
    return d
