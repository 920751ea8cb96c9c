import random
from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuntz_lab.abelian import (
    FgAbGroup,
    GroupHom,
    IntMatrix,
    cokernel,
    element_image,
    grothendieck_group,
    hom_compose,
    hom_count_to_cyclic,
    hom_equal,
    image,
    is_exact_at,
    kernel,
    smith_normal_form,
    subgroup_membership,
    tensor_zn,
    tor_zn,
)
from cuntz_lab.cu_core import FiniteMonoid, PresentedMonoid
from cuntz_lab.errors import BadModulus, IllFormedHom
from cuntz_lab.fixtures import random_pom

Z = FgAbGroup.free
C = FgAbGroup.cyclic

matrices = st.integers(1, 4).flatmap(lambda m: st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-9, 9), min_size=n, max_size=n),
                       min_size=m, max_size=m)))
factors = st.lists(st.integers(2, 8), max_size=3)


def _check_snf(M):
    U, D, V = smith_normal_form(M)
    assert (U @ M @ V) == D
    assert abs(U.det()) == 1 and abs(V.det()) == 1
    diag = [D[i, i] for i in range(min(D.rows, D.cols))]
    for i in range(D.rows):
        for j in range(D.cols):
            if i != j:
                assert D[i, j] == 0
    nz = [d for d in diag if d]
    assert nz == diag[:len(nz)]
    assert all(d > 0 for d in nz)
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
    return diag


def test_snf_examples():
    assert _check_snf(IntMatrix([[2, 4], [6, 8]])) == [2, 4]
    U, D, V = smith_normal_form(IntMatrix.zeros(2, 3))
    assert D.is_zero()
    assert U == IntMatrix.identity(2) and V == IntMatrix.identity(3)
    assert smith_normal_form(IntMatrix([[1, -1, 0]]))[1].to_lists() == [[1, 0, 0]]


@given(matrices)
def test_snf_property(rows):
    _check_snf(IntMatrix(rows))


def test_delta0_kernel_and_cokernel():
    d0 = GroupHom(Z(3), Z(1), [[1, -1, 0]])
    K, inc = kernel(d0)
    assert K.normal_form() == (2, ())
    assert all(d0(inc(g)).is_zero() for g in K.generators())
    assert cokernel(d0)[0].is_trivial()


def test_kernel_examples():
    assert kernel(GroupHom.identity(C(6)))[0].is_trivial()
    K, inc = kernel(GroupHom.scalar(C(4), 2))
    assert K.normal_form() == (0, (2,))
    assert sorted(inc(x).key[0] for x in K.elements()) == [0, 2]


def test_cokernel_examples():
    assert cokernel(GroupHom.zero(Z(1), Z(1)))[0].normal_form() == (1, ())
    assert cokernel(GroupHom.scalar(Z(1), 6))[0].normal_form() == (0, (6,))


def test_tensor_and_tor_examples():
    G = FgAbGroup.from_invariants(1, [4])
    assert tensor_zn(G, 2).normal_form() == (0, (2, 2))
    assert tensor_zn(C(3), 2).is_trivial()
    assert tensor_zn(FgAbGroup(0), 5).is_trivial()
    assert tor_zn(C(4), 6).normal_form() == (0, (2,))
    assert tor_zn(Z(1), 7).is_trivial()
    assert tor_zn(FgAbGroup.from_invariants(0, [2, 8]), 4).normal_form() == (0, (2, 4))
    with pytest.raises(BadModulus):
        tensor_zn(Z(1), 1)


def test_compose_and_membership():
    assert hom_equal(hom_compose(GroupHom.scalar(Z(1), 2), GroupHom.scalar(Z(1), 3)),
                     GroupHom.scalar(Z(1), 6))
    h = GroupHom(Z(2), Z(2), [[2, 0], [0, 3]])
    assert subgroup_membership(h, (2, 0))
    assert not subgroup_membership(h, (1, 0))
    assert element_image(h, (1, 1)).coords == (2, 3)


def test_ill_formed_hom_rejected():
    with pytest.raises(IllFormedHom):
        GroupHom(C(2), C(3), [[1]])


def _finite_group(fs, rng):
    """A finite group presented with a scrambled relation matrix."""
    n = len(fs)
    rel = [[f * int(i == j) for j in range(n)] for i, f in enumerate(fs)]
    for _ in range(3):
        i, j = rng.randrange(n), rng.randrange(n)
        if i != j:
            k = rng.randint(-2, 2)
            rel[i] = [a + k * b for a, b in zip(rel[i], rel[j])]
    return FgAbGroup(n, rel)


def _random_hom(G, H, rng):
    """A well-defined hom G -> H between finite diagonal-presented groups."""
    cols = []
    for g in G.generators():
        order = next(k for k in range(1, 200) if (k * g).is_zero())
        choices = [h for h in H.elements() if (order * h).is_zero()]
        cols.append(rng.choice(choices).coords)
    M = IntMatrix(cols, len(cols), H.num_generators).T
    return GroupHom(G, H, M)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(2, 6), min_size=1, max_size=2),
       st.lists(st.integers(2, 6), min_size=1, max_size=2), st.integers(0, 10**6))
def test_kernel_image_cokernel_against_enumeration(fa, fb, seed):
    rng = random.Random(seed)
    G = FgAbGroup.from_invariants(0, fa)
    H = FgAbGroup.from_invariants(0, fb)
    h = _random_hom(G, H, rng)
    zeros = [x for x in G.elements() if h(x).is_zero()]
    values = {h(x).key for x in G.elements()}
    K, inc = kernel(h)
    assert K.order() == len(zeros)
    assert {inc(k).key for k in K.elements()} == {z.key for z in zeros}
    assert image(h)[0].order() == len(values)
    assert cokernel(h)[0].order() * len(values) == H.order()
    assert is_exact_at(inc, h)


@settings(max_examples=40, deadline=None)
@given(factors, st.integers(2, 12), st.integers(0, 10**6))
def test_tensor_tor_against_enumeration(fs, n, seed):
    G = _finite_group(fs or [1], random.Random(seed))
    elems = G.elements()
    torsion = [x for x in elems if (n * x).is_zero()]
    multiples = {(n * x).key for x in elems}
    assert tor_zn(G, n).order() == len(torsion)
    assert tensor_zn(G, n).order() == len(elems) // len(multiples)


@given(factors, st.integers(0, 2), st.integers(0, 10**6))
def test_normal_form_presentation_invariant(fs, r, seed):
    rng = random.Random(seed)
    G = FgAbGroup.from_invariants(r, fs)
    n = G.num_generators
    if n == 0:
        return
    U = IntMatrix.identity(n).to_lists()
    for _ in range(4):
        i, j = rng.randrange(n), rng.randrange(n)
        if i != j:
            k = rng.randint(-3, 3)
            U = [row[:] for row in U]
            for c in range(n):
                U[i][c] += k * U[j][c]
    rel = (G.relations @ IntMatrix(U)).to_lists()
    assert FgAbGroup(n, rel).normal_form() == G.normal_form()


def test_grothendieck_examples():
    integers = PresentedMonoid(["+1", "-1"], [((1, 1), (0, 0))])
    assert grothendieck_group(integers)[0].normal_form() == (1, ())
    assert grothendieck_group(PresentedMonoid(["1"]))[0].normal_form() == (1, ())
    n_inf = PresentedMonoid(["1", "inf"], [((0, 2), (0, 1)), ((1, 1), (0, 1))])
    assert grothendieck_group(n_inf)[0].is_trivial()


def _brute_hom_count(M, k):
    """Monoid maps M -> Z_k, by enumerating every assignment."""
    E = M.elements
    count = 0
    for vals in product(range(k), repeat=len(E) - 1):
        f = dict(zip([x for x in E if x != M.zero], vals))
        f[M.zero] = 0
        if all((f[a] + f[b]) % k == f[M.add(a, b)] for a in E for b in E):
            count += 1
    return count


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.integers(2, 4))
def test_grothendieck_universal_property(seed, k):
    M = random_pom(random.Random(seed), max_size=6)
    G, rho = grothendieck_group(M)
    assert hom_count_to_cyclic(G, k) == _brute_hom_count(M, k)
    for a in M.elements:
        for b in M.elements:
            assert rho(M.add(a, b)) == rho(a) + rho(b)


def test_finite_monoid_gr_is_trivial_when_absorbing():
    M = FiniteMonoid.from_functions([0, "inf"], lambda a, b: "inf" if "inf" in (a, b) else 0,
                                    lambda a, b: a == b or b == "inf", 0)
    assert grothendieck_group(M)[0].is_trivial()
