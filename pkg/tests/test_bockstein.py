import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuntz_lab.abelian import FgAbGroup, GroupHom, IntMatrix, hom_equal
from cuntz_lab.bockstein import (
    LambdaHom,
    TotalK,
    build_total_k,
    check_lambda_linear,
    check_second_sequence,
    check_six_term,
    induced_lambda_hom,
    six_term_maps,
)
from cuntz_lab.errors import BadModulus

Z = FgAbGroup.free
C = FgAbGroup.cyclic

groups = st.builds(FgAbGroup.from_invariants, st.integers(0, 1),
                   st.lists(st.integers(2, 12), max_size=2))
supports = st.lists(st.integers(2, 12), min_size=1, max_size=3, unique=True)


def test_build_examples():
    T = build_total_k(Z(1), FgAbGroup(0), [2])
    assert T.group(0, 2).normal_form() == (0, (2,))
    assert T.group(1, 2).is_trivial()
    assert T.beta[(0, 2)].is_zero()
    T = build_total_k(Z(1), C(2), [2])
    assert T.group(0, 2).normal_form() == (0, (2, 2))
    assert T.group(1, 2).normal_form() == (0, (2,))
    T = build_total_k(Z(2), FgAbGroup(0), [3])
    assert T.group(0, 3).normal_form() == (0, (3, 3))
    assert T.group(1, 3).is_trivial()
    assert T.group(0, 0) is T.K0 and T.group(1, 1).is_trivial()
    with pytest.raises(BadModulus):
        build_total_k(Z(1), Z(1), [1])


def test_six_term_examples():
    T = build_total_k(Z(1), Z(1), [5])
    assert check_six_term(T, 5)
    assert T.group(0, 5).normal_form() == (0, (5,))
    assert T.group(1, 5).normal_form() == (0, (5,))


def test_six_term_detects_zero_beta():
    T = build_total_k(C(2), C(2), [2])
    beta = dict(T.beta)
    beta[(0, 2)] = GroupHom.zero(T.groups[(0, 2)], T.K1)
    broken = TotalK(T.K0, T.K1, T.support, T.groups, T.rho, beta, T.kappa_up, T.kappa_down)
    report = check_six_term(broken, 2)
    assert not report
    assert report.failed_at == "K0(;Z2)"


def _exact_by_enumeration(f, g):
    """im f = ker g for finite groups, by listing elements."""
    im = {f(x).key for x in f.source.elements()}
    ker = {y.key for y in g.source.elements() if g(y).is_zero()}
    return im == ker


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(2, 12), max_size=2), st.lists(st.integers(2, 12), max_size=2),
       supports)
def test_six_term_matches_enumeration(f0, f1, support):
    K0 = FgAbGroup.from_invariants(0, f0)
    K1 = FgAbGroup.from_invariants(0, f1)
    T = build_total_k(K0, K1, support)
    for n in T.support:
        assert check_six_term(T, n)
        for _, f, g in six_term_maps(T, n):
            assert _exact_by_enumeration(f, g)


@settings(max_examples=60, deadline=None)
@given(groups, groups, supports)
def test_second_sequence(K0, K1, support):
    T = build_total_k(K0, K1, set(support) | {2, 3, 6})
    for m, n in [(2, 3), (3, 2)]:
        report = check_second_sequence(T, m, n)
        assert report, report.failed_at
    for (i, m, M) in T.kappa_up:
        n = M // m
        if n in T.support:
            assert hom_equal(T.beta_mn(i, m, n),
                             T.rho[(1 - i, m)] @ T.beta[(i, n)])


def test_lambda_linear_examples():
    T = build_total_k(C(2), C(2), [2])
    assert check_lambda_linear(LambdaHom.identity(T))
    h = induced_lambda_hom(GroupHom.identity(T.K0), GroupHom.identity(T.K1), T, T)
    assert h.equals(LambdaHom.identity(T))
    assert check_lambda_linear(h)
    mods = {k: GroupHom.identity(G) for k, G in T.groups.items()}
    mods[(0, 2)] = GroupHom(T.groups[(0, 2)], T.groups[(0, 2)], [[0, 1], [1, 0]])
    swapped = LambdaHom(T, T, GroupHom.identity(T.K0), GroupHom.identity(T.K1), mods)
    report = check_lambda_linear(swapped)
    assert not report
    assert report.failed_at.startswith("rho square")


def test_induced_examples():
    T = build_total_k(Z(1), FgAbGroup(0), [2])
    h = induced_lambda_hom(GroupHom.scalar(Z(1), 2), GroupHom.identity(T.K1), T, T)
    assert h.component(0, 2).is_zero()
    S = build_total_k(Z(1), C(2), [2])
    h = induced_lambda_hom(GroupHom.zero(Z(1), Z(1)), GroupHom.identity(C(2)), S, S)
    G = S.groups[(0, 2)]
    tensor_gen, tor_gen = G.generators()
    assert h.component(0, 2)(tensor_gen).is_zero()
    assert h.component(0, 2)(tor_gen) == tor_gen


def _random_hom(G, H, rng):
    cols = []
    for g in G.generators():
        if G.is_finite() and H.free_rank == 0:
            order = next(k for k in range(1, 500) if (k * g).is_zero())
            cols.append(rng.choice([h for h in H.elements() if (order * h).is_zero()]).coords)
        else:
            cols.append(tuple(rng.randint(-2, 2) for _ in range(H.num_generators)))
    M = IntMatrix(cols, len(cols), H.num_generators).T if cols else IntMatrix.zeros(
        H.num_generators, 0)
    h = GroupHom(G, H, M, check=False)
    return h if h.is_well_defined() else GroupHom.zero(G, H)


@settings(max_examples=40, deadline=None)
@given(st.lists(groups, min_size=6, max_size=6), supports, st.integers(0, 10**6))
def test_induced_is_functorial(gs, support, seed):
    rng = random.Random(seed)
    A = build_total_k(gs[0], gs[1], support)
    B = build_total_k(gs[2], gs[3], support)
    Cg = build_total_k(gs[4], gs[5], support)
    f = [_random_hom(A.K[i], B.K[i], rng) for i in (0, 1)]
    g = [_random_hom(B.K[i], Cg.K[i], rng) for i in (0, 1)]
    hf = induced_lambda_hom(f[0], f[1], A, B)
    hg = induced_lambda_hom(g[0], g[1], B, Cg)
    assert check_lambda_linear(hf)
    whole = induced_lambda_hom(g[0] @ f[0], g[1] @ f[1], A, Cg)
    assert whole.equals(hg @ hf)
