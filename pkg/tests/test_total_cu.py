import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cuntz_lab.abelian import GroupHom, IntMatrix
from cuntz_lab.bockstein import LambdaHom, induced_lambda_hom
from cuntz_lab.common import Decision
from cuntz_lab.cu_core import CuMap, check_axioms, weak_cancellation
from cuntz_lab.errors import (
    IncompatibleSquares,
    MissingQuotientData,
    NotInCuU,
    NotUnital,
    ValidationError,
)
from cuntz_lab.fixtures import (
    block_descriptor,
    circle_descriptor,
    continuity_fixture,
    ek_descriptor,
    elliott_thomsen_E,
    elliott_thomsen_groups,
    finite_descriptors,
    functoriality_breaker,
    kpure_fixtures,
    materialize_limit,
    unit_not_full,
    wedge_descriptor,
)
from cuntz_lab.total_cu import (
    DescriptorMorphism,
    TotalCu,
    alpha,
    alpha_map,
    assemble_cu1,
    assemble_total_cu,
    assemble_total_cu_image_variant,
    check_alpha_order_iso,
    check_k_pure_exactness,
    check_positivity_equivalence,
    compare_gr,
    gr_compacts,
    identity_morphism,
    induced_morphism,
    kgroup,
    recover_kstar,
    recover_total_k,
    require_valid,
    total_cu_isomorphic,
    validate_descriptor,
)

FINITE = {d.name: d for d in finite_descriptors()}
KPURE = {d.name: d for d in kpure_fixtures()}
# circle fibers are large, so they get a smaller sample
BUDGET = {"blocks_2": 30, "circle_z2": 10, "circle_z2_alt": 10}


def finite_objects():
    for d in FINITE.values():
        for mode in ("total", "cu1"):
            yield TotalCu(d, mode)


# -- the Elliott-Thomsen fixture ------------------------------------------------------

def test_elliott_thomsen_groups():
    K0, _, K1 = elliott_thomsen_groups()
    assert K0.normal_form() == (2, ())
    assert K1.is_trivial()


def test_elliott_thomsen_validates():
    d = elliott_thomsen_E()
    assert validate_descriptor(d)
    assert d.ideals[d.index("I_q")].K.K1.normal_form() == (1, ())
    assert d.top_K.K1.is_trivial()


def test_elliott_thomsen_non_cancellation():
    T = assemble_cu1(elliott_thomsen_E())
    q0, q1 = T.element((0, 1), (0,)), T.element((0, 1), (1,))
    u = T.element((1, 1))
    assert T.add(q0, u) == T.add(q1, u) == T.element((1, 2))
    assert T.equal(q0, q1) is Decision.FALSE


def test_elliott_thomsen_alpha_not_injective():
    T = assemble_cu1(elliott_thomsen_E())
    q0, q1 = T.element((0, 1), (0,)), T.element((0, 1), (1,))
    assert alpha(T, q0) == alpha(T, q1)
    report = alpha_map(T, budget=50)
    assert not report["injective"] and report["surjective"] and report["zero"]
    assert T.equal(*report["collision"]) is Decision.FALSE


def test_elliott_thomsen_not_k_pure():
    report = check_k_pure_exactness(elliott_thomsen_E())
    assert not report
    assert report.failed_at == "surjective"


def test_image_variant_collapses_fiber():
    d = elliott_thomsen_E()
    T = assemble_total_cu_image_variant(d, mode="cu1")
    assert T.fiber_keys(d.index("I_q")) == [T.fibers[d.index("I_q")].zero().key]


# -- validation -----------------------------------------------------------------------

def test_functoriality_breaker_is_rejected():
    report = validate_descriptor(functoriality_breaker())
    assert not report
    assert report.failed_at == "functoriality"
    assert len(report.witness) == 3
    with pytest.raises(ValidationError):
        require_valid(functoriality_breaker())


def test_unit_fullness_is_checked():
    report = validate_descriptor(unit_not_full())
    assert report.failed_at == "unit fullness"


@pytest.mark.parametrize("d", list(FINITE.values()) + list(KPURE.values()), ids=lambda d: d.name)
def test_fixtures_validate(d):
    assert validate_descriptor(d)


# -- structure on finite fixtures --------------------------------------------------

@pytest.mark.parametrize("T", list(finite_objects()), ids=repr)
def test_axioms_and_gr_on_finite_fixtures(T):
    assert check_axioms(T)
    assert compare_gr(T)


@pytest.mark.parametrize("T", list(finite_objects()), ids=repr)
def test_positive_part_is_cu(T):
    pos = [z for z in T.all_elements() if T.leq(T.zero, z) is Decision.TRUE]
    cu = [x for x in T.cu.all_elements() if T.cu.leq(T.cu.zero, x) is Decision.TRUE]
    assert sorted(map(repr, (x for x, _ in pos))) == sorted(map(repr, cu))
    assert all(key == T.fibers[T.d.ideal_of(x)].zero().key for x, key in pos)


@pytest.mark.parametrize("T", list(finite_objects()), ids=repr)
def test_zero_is_neutral(T):
    for z in T.all_elements():
        assert T.add(T.zero, z) == z


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(sorted(FINITE)), st.lists(st.integers(0, 10**6), min_size=4,
                                                 max_size=4))
def test_order_compatible_with_addition(name, picks):
    T = TotalCu(FINITE[name])
    E = T.all_elements()
    a, b, c, d = (E[p % len(E)] for p in picks)
    if T.leq(a, b) is Decision.TRUE and T.leq(c, d) is Decision.TRUE:
        assert T.leq(T.add(a, c), T.add(b, d)) is Decision.TRUE
    assert T.add(T.add(a, b), c) == T.add(a, T.add(b, c))
    assert T.add(a, b) == T.add(b, a)


def test_weak_cancellation_on_real_rank_zero_fixture():
    T = assemble_total_cu(block_descriptor(2))
    assert weak_cancellation(T, budget=4000).status is not Decision.FALSE


# -- alpha, Gr and recovery ---------------------------------------------------------

@pytest.mark.parametrize("d", list(KPURE.values()), ids=lambda d: d.name)
def test_alpha_bijective_on_k_pure(d):
    for mode in ("total", "cu1"):
        T = TotalCu(d, mode)
        report = alpha_map(T, budget=BUDGET[d.name])
        assert report["injective"] and report["surjective"]
        assert alpha(T, T.zero).is_zero()
    assert check_alpha_order_iso(TotalCu(d), budget=BUDGET[d.name])


@pytest.mark.parametrize("d", list(KPURE.values()), ids=lambda d: d.name)
def test_recovery_on_k_pure(d):
    T = TotalCu(d)
    rec = recover_total_k(T, budget=BUDGET[d.name])
    assert rec["matches"]
    assert rec["unit"] == gr_compacts(T).unit_class()
    assert recover_kstar(d, budget=BUDGET[d.name])["matches"]
    assert check_k_pure_exactness(d)


def test_recovery_rejects_symmetric_cone():
    with pytest.raises(NotInCuU) as err:
        recover_total_k(TotalCu(ek_descriptor(2)))
    assert err.value.condition == "rho(S_c) meets -rho(S_c)"


def test_gr_needs_unit():
    d = circle_descriptor(2)
    d.unit = None
    with pytest.raises(NotUnital):
        gr_compacts(TotalCu(d))


def test_k_pure_check_needs_quotients():
    with pytest.raises(MissingQuotientData):
        check_k_pure_exactness(wedge_descriptor())


@pytest.mark.parametrize("d", list(KPURE.values()), ids=lambda d: d.name)
def test_image_variant_matches_total_on_k_pure(d):
    S, T = TotalCu(d), TotalCu(d, image=True)
    zs = S.compact_elements(BUDGET[d.name])
    image = {z: (z[0], S.to_top(d.ideal_of(z[0]), z[1])) for z in zs}
    assert len(set(image.values())) == len(zs)
    assert all(T.contains(w) for w in image.values())
    for a in zs:
        for b in zs:
            assert S.leq(a, b) == T.leq(image[a], image[b])
            if S.add(a, b) in image:
                assert image[S.add(a, b)] == T.add(image[a], image[b])


# -- morphisms ---------------------------------------------------------------------------

def test_identity_morphism():
    d = wedge_descriptor()
    f = induced_morphism(d, d, identity_morphism(d))
    for z in TotalCu(d).all_elements():
        assert f(z) == z


def test_non_lambda_linear_morphism_rejected():
    d = circle_descriptor(2)
    phi = identity_morphism(d)
    K = d.top_K
    mods = dict(phi.lambdas[d.top].mods)
    mods[(0, 2)] = GroupHom(K.groups[(0, 2)], K.groups[(0, 2)], [[0, 1], [1, 0]])
    phi.lambdas[d.top] = LambdaHom(K, K, phi.lambdas[d.top].f[0], phi.lambdas[d.top].f[1],
                                   mods)
    with pytest.raises(IncompatibleSquares):
        induced_morphism(d, d, phi)


def test_scaling_morphism_preserves_unit_up_to_order():
    d = ek_descriptor(1)
    e = ek_descriptor(2)
    lam = {i: identity_morphism(e).lambdas[i] for i in range(len(e))}
    S = TotalCu(d)
    f = induced_morphism(d, e, DescriptorMorphism(CuMap(d.cu, e.cu, lambda x: x), lam))
    T = TotalCu(e)
    u = S.element(d.unit)
    assert T.leq(f(u), T.element(e.unit)) is Decision.TRUE
    assert f(S.zero) == T.zero


def _top_hom(d, m0):
    K = d.top_K
    return induced_lambda_hom(GroupHom(K.K0, K.K0, IntMatrix(m0)), GroupHom.identity(K.K1), K, K)


@pytest.mark.parametrize("m0, expected", [
    ([[1, 0], [0, 1]], True),
    ([[1, 0], [0, -1]], False),
    ([[1, 1], [0, 1]], True),
])
def test_positivity_equivalence(m0, expected):
    d = block_descriptor(2)
    report = check_positivity_equivalence(d, d, _top_hom(d, m0), budget=20)
    assert report["agree"]
    assert report["i"] is expected and report["ii"] is expected


# -- isomorphism search -----------------------------------------------------------

def test_isomorphism_examples():
    a, b = circle_descriptor(2), circle_descriptor(2, alt=True)
    assert total_cu_isomorphic(TotalCu(a), TotalCu(a))["status"] == "found"
    assert total_cu_isomorphic(TotalCu(a), TotalCu(b))["status"] == "found"
    assert total_cu_isomorphic(TotalCu(a), TotalCu(circle_descriptor(3)))["status"] == \
        "not_found"
    E = elliott_thomsen_E()
    assert total_cu_isomorphic(TotalCu(E), TotalCu(E))["status"] == "found"


def test_finite_isomorphism_by_search():
    S, T = TotalCu(ek_descriptor(2)), TotalCu(ek_descriptor(3))
    assert total_cu_isomorphic(S, S)["status"] == "found"
    assert total_cu_isomorphic(S, T)["status"] == "not_found"


def test_continuity_on_ek_chain():
    D, last = continuity_fixture()
    L, classes = materialize_limit(D)
    assert len(classes) == len(last.all_elements())
    assert total_cu_isomorphic(L, last)["status"] == "found"
    assert kgroup(last).group.normal_form() == (0, (2, 2, 2))
