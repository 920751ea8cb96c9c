"""Total K-theory of a pair (K0, K1) with Bockstein operations.

Mod-n groups use the split model

    K_i(;Z_n) = (K_i (x) Z_n) + Tor(K_{i+1}, Z_n)

where rho reduces into the first summand and beta includes the second summand
as n-torsion of K_{i+1}.  The tensor summand shares its generators with K_i, so
rho is the identity on coordinates.
"""
from __future__ import annotations

from .abelian import (
    FgAbGroup,
    GroupHom,
    IntMatrix,
    direct_sum,
    hom_compose,
    hom_equal,
    is_exact_at,
    lift_through,
    n_torsion,
    tensor_zn,
)
from .common import Check
from .errors import BadModulus, ShapeMismatch


def _other(i):
    return 1 - i


class TotalK:
    """Graded group K_* + sum over n of K_*(;Z_n), with rho, beta, kappa.

    ``groups[(i, n)]`` is K_i(;Z_n); ``rho[(i, n)]`` maps K_i into it,
    ``beta[(i, n)]`` maps it into K_{1-i}; ``kappa_up[(i, m, M)]`` and
    ``kappa_down[(i, n, M)]`` are the coefficient changes Z_m -> Z_M and
    Z_M -> Z_n for divisors m, n of M.
    """

    def __init__(self, K0, K1, support, groups, rho, beta, kappa_up, kappa_down,
                 beta_mn=None):
        self.K = (K0, K1)
        self.support = tuple(sorted(set(support)))
        for n in self.support:
            if n < 2:
                raise BadModulus(f"modulus must be at least 2, got {n}")
        self.groups = dict(groups)
        self.rho = dict(rho)
        self.beta = dict(beta)
        self.kappa_up = dict(kappa_up)
        self.kappa_down = dict(kappa_down)
        self._beta_mn = dict(beta_mn or {})

    @property
    def K0(self):
        return self.K[0]

    @property
    def K1(self):
        return self.K[1]

    def group(self, i, n):
        """K_i(;Z_n); n = 0 gives K_i and n = 1 the zero group."""
        if n == 0:
            return self.K[i]
        if n == 1:
            return FgAbGroup(0)
        return self.groups[(i, n)]

    def beta_mn(self, i, m, n):
        """beta_{m,n}^i : K_i(;Z_n) -> K_{i+1}(;Z_m)."""
        key = (i, m, n)
        if key in self._beta_mn:
            return self._beta_mn[key]
        return hom_compose(self.rho[(_other(i), m)], self.beta[(i, n)])

    def kappa_pairs(self):
        return [(m, M) for M in self.support for m in self.support if m < M and M % m == 0]

    def components(self):
        """Labelled groups in the fixed order K1, then (K0;Z_n, K1;Z_n) per n."""
        out = [("K1", self.K1)]
        for n in self.support:
            out.append((f"K0;Z{n}", self.groups[(0, n)]))
            out.append((f"K1;Z{n}", self.groups[(1, n)]))
        return out

    def __repr__(self):
        parts = [f"K0={self.K0.describe()}", f"K1={self.K1.describe()}"]
        for n in self.support:
            parts.append(f"K*(;Z{n})=({self.groups[(0, n)].describe()}, "
                         f"{self.groups[(1, n)].describe()})")
        return "TotalK(" + ", ".join(parts) + ")"


def build_total_k(K0, K1, support):
    """TotalK in the split model.

    >>> Z, Z2 = FgAbGroup.free(1), FgAbGroup.cyclic(2)
    >>> T = build_total_k(Z, Z2, [2])
    >>> T.group(0, 2).describe(), T.group(1, 2).describe()
    ('Z_2 + Z_2', 'Z_2')
    """
    support = tuple(sorted(set(int(n) for n in support)))
    for n in support:
        if n < 2:
            raise BadModulus(f"modulus must be at least 2, got {n}")
    K = (K0, K1)
    groups, rho, beta, tors = {}, {}, {}, {}
    for n in support:
        for i in (0, 1):
            tens = tensor_zn(K[i], n)
            T, iota = n_torsion(K[_other(i)], n)
            G, incs, projs = direct_sum(tens, T)
            groups[(i, n)] = G
            tors[(i, n)] = (T, iota)
            rho[(i, n)] = GroupHom(K[i], G, incs[0].matrix, check=False)
            beta[(i, n)] = hom_compose(iota, projs[1])
    kappa_up, kappa_down = {}, {}
    for M in support:
        for m in support:
            if m >= M or M % m:
                continue
            q = M // m
            for i in (0, 1):
                k = K[i].num_generators
                iota_m = tors[(i, m)][1]
                iota_M = tors[(i, M)][1]
                # Z_m -> Z_M is [1] -> q[1]; on torsion it is the inclusion.
                up_tor = lift_through(iota_M, iota_m)
                kappa_up[(i, m, M)] = GroupHom(
                    groups[(i, m)], groups[(i, M)],
                    IntMatrix.block_diag([IntMatrix.identity(k).scaled(q), up_tor.matrix]))
                # Z_M -> Z_m is [1] -> [1]; on torsion it is multiplication by q.
                down_tor = lift_through(iota_m, hom_compose(GroupHom.scalar(K[_other(i)], q),
                                                            iota_M))
                kappa_down[(i, m, M)] = GroupHom(
                    groups[(i, M)], groups[(i, m)],
                    IntMatrix.block_diag([IntMatrix.identity(k), down_tor.matrix]))
    return TotalK(K0, K1, support, groups, rho, beta, kappa_up, kappa_down)


def six_term_maps(T, n):
    """The six maps of the Bockstein sequence, each tagged with the position it enters."""
    mul = [GroupHom.scalar(T.K[i], n) for i in (0, 1)]
    return [
        ("K0 (after x n)", mul[0], T.rho[(0, n)]),
        (f"K0(;Z{n})", T.rho[(0, n)], T.beta[(0, n)]),
        ("K1 (after beta)", T.beta[(0, n)], mul[1]),
        ("K1 (after x n)", mul[1], T.rho[(1, n)]),
        (f"K1(;Z{n})", T.rho[(1, n)], T.beta[(1, n)]),
        ("K0 (after beta)", T.beta[(1, n)], mul[0]),
    ]


def check_six_term(T, n):
    """Exactness of K_i -n-> K_i -rho-> K_i(;Z_n) -beta-> K_{i+1} -n-> K_{i+1}."""
    if n not in T.support:
        raise BadModulus(f"{n} is not in the support {T.support}")
    for where, f, g in six_term_maps(T, n):
        if not is_exact_at(f, g):
            return Check.fail(where)
    return Check.ok(n=n)


def check_second_sequence(T, m, n):
    """Exactness of the kappa sequence and the identity beta_{m,n} = rho_m beta_n."""
    M = m * n
    for k in (m, n, M):
        if k not in T.support:
            raise BadModulus(f"{k} is not in the support {T.support}")
    for i in (0, 1):
        j = _other(i)
        composed = hom_compose(T.rho[(j, m)], T.beta[(i, n)])
        if not hom_equal(T.beta_mn(i, m, n), composed):
            return Check.fail(f"beta_{{{m},{n}}}^{i} != rho_{m} beta_{n}")
    for i in (0, 1):
        j = _other(i)
        up_i = T.kappa_up[(i, m, M)]
        down_i = T.kappa_down[(i, n, M)]
        b = T.beta_mn(i, m, n)
        up_j = T.kappa_up[(j, m, M)]
        steps = [
            (f"K{i}(;Z{M})", up_i, down_i),
            (f"K{i}(;Z{n})", down_i, b),
            (f"K{j}(;Z{m})", b, up_j),
        ]
        for where, f, g in steps:
            if not is_exact_at(f, g):
                return Check.fail(where)
    return Check.ok(m=m, n=n)


class LambdaHom:
    """Graded morphism of total K-theories: f[i] on K_i and f[(i, n)] on K_i(;Z_n)."""

    def __init__(self, source, target, f0, f1, mods):
        if source.support != target.support:
            raise ShapeMismatch("Lambda-homs need a shared support")
        self.source = source
        self.target = target
        self.f = (f0, f1)
        self.mods = dict(mods)
        for i in (0, 1):
            for n in source.support:
                if (i, n) not in self.mods:
                    raise ShapeMismatch(f"missing component K{i}(;Z{n})")

    def component(self, i, n=0):
        return self.f[i] if n == 0 else self.mods[(i, n)]

    def components(self):
        """Component homs in the order of TotalK.components()."""
        out = [self.f[1]]
        for n in self.source.support:
            out.append(self.mods[(0, n)])
            out.append(self.mods[(1, n)])
        return out

    @classmethod
    def identity(cls, T):
        mods = {key: GroupHom.identity(G) for key, G in T.groups.items()}
        return cls(T, T, GroupHom.identity(T.K0), GroupHom.identity(T.K1), mods)

    def __matmul__(self, other):
        """self after other."""
        mods = {key: hom_compose(self.mods[key], other.mods[key]) for key in self.mods}
        return LambdaHom(other.source, self.target, hom_compose(self.f[0], other.f[0]),
                         hom_compose(self.f[1], other.f[1]), mods)

    def equals(self, other):
        return all(hom_equal(a, b) for a, b in zip(
            [self.f[0]] + self.components(), [other.f[0]] + other.components()))


def check_lambda_linear(h):
    """Every rho, beta and kappa square commutes; reports the first failing square."""
    S, T = h.source, h.target
    for n in S.support:
        for i in (0, 1):
            lhs = hom_compose(h.mods[(i, n)], S.rho[(i, n)])
            rhs = hom_compose(T.rho[(i, n)], h.f[i])
            if not hom_equal(lhs, rhs):
                return Check.fail(f"rho square K{i} -> K{i}(;Z{n})")
    for n in S.support:
        for i in (0, 1):
            lhs = hom_compose(h.f[_other(i)], S.beta[(i, n)])
            rhs = hom_compose(T.beta[(i, n)], h.mods[(i, n)])
            if not hom_equal(lhs, rhs):
                return Check.fail(f"beta square K{i}(;Z{n}) -> K{_other(i)}")
    for (i, m, M), up in S.kappa_up.items():
        lhs = hom_compose(h.mods[(i, M)], up)
        rhs = hom_compose(T.kappa_up[(i, m, M)], h.mods[(i, m)])
        if not hom_equal(lhs, rhs):
            return Check.fail(f"kappa square K{i}(;Z{m}) -> K{i}(;Z{M})")
    for (i, m, M), down in S.kappa_down.items():
        lhs = hom_compose(h.mods[(i, m)], down)
        rhs = hom_compose(T.kappa_down[(i, m, M)], h.mods[(i, M)])
        if not hom_equal(lhs, rhs):
            return Check.fail(f"kappa square K{i}(;Z{M}) -> K{i}(;Z{m})")
    return Check.ok()


def induced_lambda_hom(f0, f1, src, dst):
    """Lambda-hom induced by (f0, f1) on split-model total K-theories.

    The tensor summand carries f_i itself; the torsion summand carries the
    restriction of f_{i+1} to n-torsion.
    """
    f = (f0, f1)
    for i in (0, 1):
        if not (f[i].source == src.K[i] and f[i].target == dst.K[i]):
            raise ShapeMismatch(f"f{i} does not map K{i} to K{i}")
    if src.support != dst.support:
        raise ShapeMismatch("Lambda-homs need a shared support")
    mods = {}
    for n in src.support:
        for i in (0, 1):
            j = _other(i)
            _, iota_s = n_torsion(src.K[j], n)
            _, iota_t = n_torsion(dst.K[j], n)
            tor_part = lift_through(iota_t, hom_compose(f[j], iota_s))
            mods[(i, n)] = GroupHom(
                src.groups[(i, n)], dst.groups[(i, n)],
                IntMatrix.block_diag([f[i].matrix, tor_part.matrix]))
    return LambdaHom(src, dst, f0, f1, mods)
