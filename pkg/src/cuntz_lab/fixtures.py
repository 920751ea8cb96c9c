"""Built-in examples: descriptors, Cu objects, diagrams and random generators."""
from __future__ import annotations

import random
from itertools import product

from .abelian import FgAbGroup, GroupHom, IntMatrix, cokernel, kernel, solve_preimage
from .bockstein import LambdaHom
from .common import Decision
from .cu_core import (
    INF,
    CuMap,
    DirectSum,
    Ek,
    ExtendedIntegers,
    FiniteCu,
    FiniteMonoid,
    Wedge,
    compacts,
)
from .cu_limits import Diagram, LimitObject, coordinate_diagram
from .total_cu import (
    DescriptorMorphism,
    TotalCu,
    induced_morphism,
    make_descriptor,
)

Z = FgAbGroup.free
ZERO = FgAbGroup(0)


def N_inf():
    return ExtendedIntegers(nonnegative=True)


# -- the Elliott-Thomsen algebra E -------------------------------------------------

def elliott_thomsen_groups():
    """K_*(E) from the boundary map delta_0 = (1, -1, 0): Z^3 -> Z.

    Returns (K0, inclusion of K0 into Z^3, K1).
    """
    d0 = GroupHom(Z(3), Z(1), IntMatrix([[1, -1, 0]], 1, 3))
    K0, inc = kernel(d0)
    K1, _ = cokernel(d0)
    return K0, inc, K1


def elliott_thomsen_E():
    """E with Cu(E)_c = N^2 spanned by [p] = (1, 0) and [q] = (0, 1), [1_E] = (1, 1).

    Coordinates of Z^3 are (lambda, nu, mu); [p] = (1, 1, 0), [q] = (0, 0, 1).
    The ideals are 0, I_p = {mu = 0}, I_q = {lambda = nu = 0} and E.
    """
    K0, inc, K1 = elliott_thomsen_groups()
    p = solve_preimage(inc, (1, 1, 0))
    q = solve_preimage(inc, (0, 0, 1))
    k0 = IntMatrix([p, q], 2, K0.num_generators).T
    to_mu = [list(row) for row in (IntMatrix([[0, 0, 1]], 1, 3) @ inc.matrix).to_lists()]
    to_ends = [list(row) for row in (IntMatrix([[1, 0, 0], [0, 1, 0]], 2, 3)
                                     @ inc.matrix).to_lists()]
    return make_descriptor(
        "elliott_thomsen_E",
        DirectSum([N_inf(), N_inf()]),
        [("0", (0, 0), ZERO, ZERO),
         ("I_p", (1, 0), Z(1), ZERO),
         ("I_q", (0, 1), Z(1), Z(1)),
         ("E", (1, 1), K0, K1)],
        {("0", "I_p"): (None, None), ("0", "I_q"): (None, None),
         ("I_p", "E"): ([[v] for v in k0.col(0)], None),
         ("I_q", "E"): ([[v] for v in k0.col(1)], None)},
        k0,
        unit=(1, 1),
        flags={"real_rank_zero": False, "k_pure": False},
        support=(2,),
        quotients={"I_p": (Z(1), ZERO, to_mu, None),
                   "I_q": (Z(2), ZERO, to_ends, None)},
    )


# -- synthetic finite descriptors -------------------------------------------------

def ek_descriptor(k):
    """E_k with K_0 = 0 and K_1 = Z_2 on the top ideal (synthetic, finite)."""
    cu = Ek(k)
    return make_descriptor(
        f"e_{k}",
        cu,
        [("0", 0, ZERO, ZERO), ("top", 1, ZERO, FgAbGroup.cyclic(2))],
        {("0", "top"): (None, None)},
        None,
        unit=1,
        support=(2,),
    )


def wedge_descriptor():
    """E_1 v E_1 with K_1 = Z_2 on the left leg and the top, 0 on the right leg."""
    cu = Wedge([Ek(1), Ek(1)])
    Z2 = FgAbGroup.cyclic(2)
    return make_descriptor(
        "wedge_e1",
        cu,
        [("0", ("zero",), ZERO, ZERO), ("L", (0, 1), ZERO, Z2), ("R", (1, 1), ZERO, ZERO),
         ("top", ("top",), ZERO, Z2)],
        {("0", "L"): (None, None), ("0", "R"): (None, None),
         ("L", "top"): (None, [[1]]), ("R", "top"): (None, None)},
        None,
        unit=("top",),
        support=(2,),
    )


def finite_descriptors():
    return [ek_descriptor(k) for k in range(1, 4)] + [wedge_descriptor()]


# -- real rank zero, K-pure descriptors ------------------------------------------------

def _subsets(r):
    return sorted((s for s in product((0, 1), repeat=r)), key=lambda s: (sum(s), s[::-1]))


def block_descriptor(r, name=None, unit=None, support=(2,), twist=None):
    """N^r with K_0 = Z^r and K_1 = 0: a direct sum of r matrix algebras.

    Ideals are the coordinate subsets; deltas are coordinate inclusions.  With
    ``twist`` = (a, b) the delta a -> b is doubled, which breaks functoriality.
    """
    cu = DirectSum([N_inf() for _ in range(r)])
    subsets = _subsets(r)
    label = lambda s: "{" + ",".join(str(i) for i, v in enumerate(s) if v) + "}"
    ideals = [(label(s), tuple(s), Z(sum(s)), ZERO) for s in subsets]
    deltas = {}
    for a in subsets:
        for b in subsets:
            if a != b and all(x <= y for x, y in zip(a, b)) and sum(b) == sum(a) + 1:
                deltas[(label(a), label(b))] = (_coordinate_inclusion(a, b), None)
    if twist is not None:
        a, b = twist
        m = _coordinate_inclusion(a, b)
        deltas[(label(a), label(b))] = ([[2 * v for v in row] for row in m], None)
    full = tuple(1 for _ in range(r))
    quotients = {}
    for s in subsets:
        if 0 < sum(s) < r:
            rest = tuple(1 - v for v in s)
            quotients[label(s)] = (Z(sum(rest)), ZERO, _coordinate_projection(full, rest), None)
    return make_descriptor(
        name or f"blocks_{r}",
        cu,
        ideals,
        deltas,
        [[int(i == j) for j in range(r)] for i in range(r)],
        unit=unit if unit is not None else full,
        flags={"real_rank_zero": True, "k_pure": True},
        support=support,
        quotients=quotients,
    )


def _coordinate_inclusion(a, b):
    src = [i for i, v in enumerate(a) if v]
    dst = [i for i, v in enumerate(b) if v]
    return [[int(d == s) for s in src] for d in dst]


def _coordinate_projection(a, b):
    """Projection onto the coordinates of b, from those of a (b inside a)."""
    return _coordinate_inclusion(a, b)


def circle_descriptor(torsion=2, name=None, alt=False):
    """Simple real rank zero model with K_0 = Z, K_1 = Z_torsion, Cu = N u {inf}.

    With ``alt`` K_1 is presented as Z^2 / <(1, 1), (0, torsion)> and the
    K_0 class of the unit is -1, giving a Lambda-isomorphic but differently
    presented invariant.
    """
    K1 = FgAbGroup(2, [[1, 1], [0, torsion]]) if alt else FgAbGroup.cyclic(torsion)
    return make_descriptor(
        name or (f"circle_z{torsion}" + ("_alt" if alt else "")),
        N_inf(),
        [("0", 0, ZERO, ZERO), ("A", 1, Z(1), K1)],
        {("0", "A"): (None, None)},
        [[-1]] if alt else [[1]],
        unit=1,
        flags={"real_rank_zero": True, "k_pure": True},
        support=(2,),
    )


def kpure_fixtures():
    return [block_descriptor(2), circle_descriptor(2), circle_descriptor(2, alt=True)]


def functoriality_breaker():
    """N^3 blocks with delta_{{0},{0,1}} doubled: composites into the top disagree."""
    return block_descriptor(3, name="broken_functoriality", twist=((1, 0, 0), (1, 1, 0)))


def unit_not_full():
    return block_descriptor(2, name="unit_not_full", unit=(1, 0))


# -- morphisms and diagrams of descriptors ---------------------------------------------

def scaling_map(S, T, m):
    """The additive map S -> T sending 1 to m, for S and T among E_k and N u {inf}."""
    def fn(x):
        if x is INF:
            return INF
        return T.multiple(x, m) if x else T.zero
    return CuMap(S, T, fn, f"1->{m}")


def ek_chain(ks=(1, 2, 3), m=2):
    """Descriptors e_k1 -> e_k2 -> ... joined by 1 -> m, with identity Lambda-homs."""
    ds = [ek_descriptor(k) for k in ks]
    morphisms = []
    for a, b in zip(ds, ds[1:]):
        lam = {i: _same_k(a.ideals[i].K, b.ideals[i].K) for i in range(len(a))}
        morphisms.append(DescriptorMorphism(scaling_map(a.cu, b.cu, m), lam))
    return ds, morphisms


def _same_k(S, T):
    ident = LambdaHom.identity(S)
    mods = {key: GroupHom(S.groups[key], T.groups[key], h.matrix, check=False)
            for key, h in ident.mods.items()}
    return LambdaHom(S, T, GroupHom(S.K0, T.K0, ident.f[0].matrix, check=False),
                     GroupHom(S.K1, T.K1, ident.f[1].matrix, check=False), mods)


def continuity_fixture(ks=(1, 2, 3), m=2):
    """(diagram of total semigroups, last descriptor's total semigroup)."""
    ds, morphisms = ek_chain(ks, m)
    stages = [TotalCu(d) for d in ds]
    maps = [induced_morphism(a, b, phi) for a, b, phi in zip(ds, ds[1:], morphisms)]
    for f, S, T in zip(maps, stages, stages[1:]):
        f.source, f.target = S, T
    return Diagram(stages, maps), stages[-1]


def materialize_limit(D, depth=None):
    """The limit of a finite identity-tail diagram as a FiniteCu on class labels."""
    L = LimitObject(D, depth)
    classes = L.classes()

    def label(c):
        for k, o in enumerate(classes):
            if L.equal(c, o) is Decision.TRUE:
                return k
        raise ValueError("class not found")

    n = len(classes)
    table = [[label(L.add(a, b)) for b in classes] for a in classes]
    order = [[L.leq(a, b) is Decision.TRUE for b in classes] for a in classes]
    zero = label(L.zero)
    return FiniteCu(FiniteMonoid(list(range(n)), table, order, zero)), classes


# -- random finite objects ----------------------------------------------------------------

def saturating_chain(n):
    """{0, ..., n} with truncated addition and the usual order."""
    elems = list(range(n + 1))
    return FiniteCu(FiniteMonoid.from_functions(
        elems, lambda a, b: min(a + b, n), lambda a, b: a <= b, 0))


def random_finite_cu(rng, max_size=12):
    """A random E_k, sum of two small pieces, or wedge of two, with at most max_size elements."""
    while True:
        kind = rng.choice(["ek", "sum", "wedge", "chain"])
        if kind == "ek":
            S = Ek(rng.randint(1, 5))
        elif kind == "chain":
            S = saturating_chain(rng.randint(1, 6))
        elif kind == "sum":
            S = DirectSum([Ek(rng.randint(1, 2)), rng.choice([Ek(1), saturating_chain(1)])])
        else:
            S = Wedge([Ek(rng.randint(1, 4)), Ek(rng.randint(1, 4))])
        if len(S.all_elements()) <= max_size:
            return S


def random_pom(rng, max_size=12):
    """A random positively ordered finite monoid: a submonoid of a random finite object."""
    while True:
        S = random_finite_cu(rng, 16)
        elems = S.all_elements()
        gens = rng.sample(elems, rng.randint(1, min(3, len(elems))))
        closed = {S.zero}
        frontier = [S.zero]
        while frontier:
            new = []
            for a in frontier:
                for g in gens:
                    s = S.add(a, g)
                    if s not in closed:
                        closed.add(s)
                        new.append(s)
            frontier = new
        if len(closed) <= max_size:
            ordered = [x for x in elems if x in closed]
            return FiniteMonoid.from_functions(ordered, S.add,
                                               lambda a, b: S.leq(a, b) is Decision.TRUE,
                                               S.zero)


def random_morphism(S, T, rng, tries=20):
    """A random Cu morphism between finite objects: generator images extended additively.

    Falls back to the zero map when no random choice survives the checks.
    """
    M = compacts(S)
    gens = [M.elements[i] for i in M.generating_set()]
    targets = T.all_elements()
    for _ in range(tries):
        img = {S.zero: T.zero}
        for g in gens:
            img[g] = rng.choice(targets)
        ok = True
        frontier = list(img)
        while frontier and ok:
            new = []
            for a in frontier:
                for g in gens:
                    s, v = S.add(a, g), T.add(img[a], img[g])
                    if s in img:
                        if img[s] != v:
                            ok = False
                            break
                    else:
                        img[s] = v
                        new.append(s)
                if not ok:
                    break
            frontier = new
        if ok and len(img) == len(S.all_elements()):
            m = CuMap.from_table(S, T, img)
            if m.check():
                return m
    return CuMap(S, T, lambda x: T.zero, "zero")


def random_diagram(rng, max_stages=5):
    """A random finite diagram with identity tail, plus the stage maps."""
    n = rng.randint(1, max_stages)
    stages = [random_finite_cu(rng) for _ in range(n)]
    maps = [random_morphism(a, b, rng) for a, b in zip(stages, stages[1:])]
    return Diagram(stages, maps)


def random_cone(D, rng):
    """(target, psi) with psi_i = psi_N after beta_{iN}."""
    T = random_finite_cu(rng)
    last = random_morphism(D.stage(D.N), T, rng)

    def psi(i):
        j = min(i, D.N)
        return CuMap(D.stage(j), T, lambda x, j=j: last(D.push(j, D.N, x)))

    return T, psi


# -- plain Cu objects -------------------------------------------------------------------

def z_infty():
    return ExtendedIntegers(nonnegative=False)


def algebraic_fixtures():
    return [Ek(k) for k in range(1, 6)] + [
        z_infty(), N_inf(), DirectSum([N_inf(), N_inf()]), Wedge([Ek(1), Ek(2)]),
        saturating_chain(4)]


def coordinate_fixture(N=6):
    return coordinate_diagram(N)


def seeded(seed=0):
    return random.Random(seed)
