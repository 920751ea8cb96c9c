"""Inductive limits of sequences of Cu objects via eventually increasing sequences.

A class in the limit is represented by a sequence (s_i) with s_i in the i-th
stage which is increasing under the connecting maps from some index on.  Two
sequences are compared through the canonical approximants of their entries:
f <= g when every approximant x of every f_i is eventually way-below g_j
after being pushed to stage j.

When the diagram is identity from stage N on and both sequences are
push-forwards of a last explicit entry, every comparison is exact: nothing
changes past the horizon max(N, M) + 2.  Otherwise quantifiers are truncated
at ``depth`` and a failed existential search is reported as UNDECIDED.
"""
from __future__ import annotations

from itertools import product

from .common import Check, Decision, all_of
from .cu_core import DEFAULT_DEPTH, INF, Chain, CuMap, CuObject
from .errors import IncompatibleCone, NotIncreasing, StageMismatch, UndecidedError


class Diagram:
    """S_1 -> S_2 -> ... given by an explicit prefix and a tail rule.

    ``maps[i - 1]`` is the connecting map S_i -> S_{i+1}.  With ``tail=None``
    the diagram is constant from the last stage on; otherwise ``tail(i)``
    returns the pair (S_i, map S_{i-1} -> S_i) for i beyond the prefix.
    """

    def __init__(self, stages, maps, tail=None, depth=DEFAULT_DEPTH, check=False):
        self.prefix = list(stages)
        if len(maps) != len(self.prefix) - 1:
            raise StageMismatch("need one connecting map per consecutive pair of stages")
        self.maps = list(maps)
        self.tail = tail
        self.depth = depth
        self._lazy = {}
        if check:
            for i, m in enumerate(self.maps, start=1):
                report = m.check()
                if not report:
                    raise StageMismatch(f"connecting map {i} -> {i + 1}: {report.failed_at}")

    @property
    def N(self):
        return len(self.prefix)

    @property
    def identity_tail(self):
        return self.tail is None

    def _tail(self, i):
        if i not in self._lazy:
            self._lazy[i] = self.tail(i)
        return self._lazy[i]

    def stage(self, i):
        if i < 1:
            raise StageMismatch(f"stages are numbered from 1, got {i}")
        if i <= self.N:
            return self.prefix[i - 1]
        if self.tail is None:
            return self.prefix[-1]
        return self._tail(i)[0]

    def step(self, i):
        """The connecting map S_i -> S_{i+1}, or None for an identity step."""
        if i < self.N:
            return self.maps[i - 1]
        if self.tail is None:
            return None
        return self._tail(i + 1)[1]

    def push(self, i, j, x):
        """beta_{ij}(x) for i <= j."""
        if j < i:
            raise StageMismatch(f"cannot push from stage {i} back to stage {j}")
        for k in range(i, j):
            if self.tail is None and k >= self.N:
                break
            x = self.step(k)(x)
        return x

    def composite(self, i, j):
        return CuMap(self.stage(i), self.stage(j), lambda x: self.push(i, j, x))


class EvSeq:
    """Sequence over a diagram: zero before ``start``, explicit entries, then a tail.

    ``entries[0]`` sits at stage ``start``.  Past the explicit entries the
    sequence continues by pushing the last entry forward, unless a generator
    ``tail(j)`` is given.
    """

    def __init__(self, diagram, start, entries, tail=None):
        if start < 1:
            raise StageMismatch("sequences start at stage 1 or later")
        self.diagram = diagram
        self.start = start
        self.entries = list(entries)
        if not self.entries and tail is None:
            raise StageMismatch("a sequence needs at least one entry or a tail")
        self.tail = tail
        for offset, x in enumerate(self.entries):
            S = diagram.stage(start + offset)
            if not S.contains(x):
                raise StageMismatch(f"{x!r} is not in stage {start + offset}")
        self._memo = {}

    @property
    def last(self):
        return self.start + len(self.entries) - 1

    @property
    def pushes_forward(self):
        return self.tail is None

    def term(self, i):
        if i < self.start:
            return self.diagram.stage(i).zero
        if i <= self.last:
            return self.entries[i - self.start]
        if i not in self._memo:
            if self.tail is not None:
                self._memo[i] = self.tail(i)
            else:
                self._memo[i] = self.diagram.push(self.last, i, self.entries[-1])
        return self._memo[i]

    def __repr__(self):
        shown = [self.term(i) for i in range(1, min(self.last, 6) + 1)]
        return f"EvSeq(start={self.start}, {shown}, ...)"


def _exact(f, g=None):
    D = f.diagram
    return D.identity_tail and f.pushes_forward and (g is None or g.pushes_forward)


def horizon(f, g=None):
    D = f.diagram
    last = max(D.N, f.last, g.last if g is not None else 0)
    if _exact(f, g):
        return last + 2
    return max(last + 2, D.depth)


def is_eventually_increasing(seq, depth=None):
    """Check push(s_i) <= s_j for start <= i < j up to the horizon; Check with witness."""
    D = seq.diagram
    H = horizon(seq) if depth is None else depth
    undecided = None
    for i in range(seq.start, H):
        for j in range(i + 1, H + 1):
            d = D.stage(j).leq(D.push(i, j, seq.term(i)), seq.term(j))
            if d is Decision.FALSE:
                return Check.fail("eventually increasing", (i, j))
            if d is Decision.UNDECIDED and undecided is None:
                undecided = (i, j)
    if undecided is not None:
        return Check.undecided("eventually increasing", undecided, depth=H)
    return Check.ok(horizon=H, exact=_exact(seq))


def seq_leq(f, g, depth=None):
    """Class order: each approximant x of f_i is eventually way-below g_j.

    In the exact case both sequences are constant past the horizon H, and the
    condition reduces to push(f_i) <= g_H, because pushes preserve
    way-below and suprema.  Otherwise universal quantifiers run to half the
    depth, leaving the other half for the existential search over j.
    """
    if f.diagram is not g.diagram:
        raise StageMismatch("sequences live over different diagrams")
    D = f.diagram
    depth = depth or D.depth
    if _exact(f, g):
        H = horizon(f, g)
        S = D.stage(H)
        return all_of(S.leq(D.push(i, H, f.term(i)), g.term(H)) for i in range(f.start, H + 1))
    half = max(2, depth // 2)
    result = Decision.TRUE
    for i in range(f.start, max(f.start, g.start) + half + 1):
        j = max(i, g.start) + half
        for x in D.stage(i).approximants(f.term(i), half):
            d = D.stage(j).way_below(D.push(i, j, x), g.term(j))
            if d is not Decision.TRUE:
                result = Decision.UNDECIDED
    return result


def seq_equiv(f, g, depth=None):
    return seq_leq(f, g, depth) & seq_leq(g, f, depth)


def embed_stage(D, i, s):
    """The class of (0, ..., 0, s, beta(s), beta(beta(s)), ...) starting at stage i."""
    if not D.stage(i).contains(s):
        raise StageMismatch(f"{s!r} is not in stage {i}")
    return EvSeq(D, i, [s])


def rapidize(f, depth=None):
    """Equivalent sequence that is way-below increasing from its start.

    g_i is the first canonical approximant of f_i, at position at least
    i - start, that the pushed g_{i-1} is way-below.
    """
    D = f.diagram
    depth = depth or D.depth
    memo = {}

    def term(i):
        if i in memo:
            return memo[i]
        S = D.stage(i)
        approx = S.approximants(f.term(i), depth + i)
        if len(approx) == 1:
            pick = approx[0]
            if i > f.start:
                prev = D.push(i - 1, i, term(i - 1))
                if S.way_below(prev, pick) is not Decision.TRUE:
                    raise UndecidedError(f"no approximant at stage {i} dominates the previous "
                                         f"term", depth)
        else:
            pick = None
            prev = D.push(i - 1, i, term(i - 1)) if i > f.start else None
            for x in approx[min(i - f.start, len(approx) - 1):]:
                if prev is None or S.way_below(prev, x) is Decision.TRUE:
                    pick = x
                    break
            if pick is None:
                raise UndecidedError(f"approximant search at stage {i} exceeded depth", depth)
        memo[i] = pick
        return pick

    if _exact(f):
        H = horizon(f)
        if all(len(D.stage(i).approximants(f.term(i), depth)) == 1 for i in range(f.start, H + 1)):
            return EvSeq(D, f.start, [term(i) for i in range(f.start, H + 1)])
    return EvSeq(D, f.start, [term(f.start)], tail=term)


def sup_of_classes(classes, depth=None):
    """Staircase supremum of an increasing list (or Chain) of classes.

    The result follows f^1 until index i_2, then f^2 until i_3, and so on;
    i_{m+1} is the least index past i_m where f^{m+1} has started and the
    pushed previous term lies below f^{m+1}.
    """
    if isinstance(classes, Chain):
        chain = classes
    else:
        classes = list(classes)
        if not classes:
            raise ValueError("empty list of classes")
        chain = Chain.of(classes)
    first = chain.term(0)
    D = first.diagram
    depth = depth or D.depth
    finite = chain.eventually_constant
    if finite:
        items = chain.prefix(chain.stable_after + 1)
        for a, b in zip(items, items[1:]):
            if seq_leq(a, b, depth) is Decision.FALSE:
                raise ValueError("classes are not increasing")
        if len(items) == 1:
            return items[0]
    values, switches = [], [first.start]

    def advance():
        j = first.start + len(values)
        m = len(switches) - 1
        if not (finite and m >= chain.stable_after) and j > switches[-1]:
            nxt = chain.term(m + 1)
            if j >= nxt.start and values and \
                    D.stage(j).leq(D.push(j - 1, j, values[-1]), nxt.term(j)) is Decision.TRUE:
                switches.append(j)
                m += 1
            elif j - switches[-1] > depth:
                raise UndecidedError("staircase index not found within depth", depth)
        values.append(chain.term(m).term(j))

    def term(j):
        if j < first.start:
            return D.stage(j).zero
        while first.start + len(values) <= j:
            advance()
        return values[j - first.start]

    if finite and all(c.pushes_forward for c in items) and D.identity_tail:
        while len(switches) - 1 < chain.stable_after:
            advance()
        H = max(switches[-1], horizon(items[-1]))
        return EvSeq(D, first.start, [term(j) for j in range(first.start, H + 1)])
    return EvSeq(D, first.start, [term(first.start)], tail=term)


class LimitObject(CuObject):
    """The limit of a diagram, with classes of eventually increasing sequences."""

    kind = "limit"

    def __init__(self, diagram, depth=None):
        self.diagram = diagram
        self.depth = depth or diagram.depth
        self.zero = EvSeq(diagram, 1, [diagram.stage(1).zero])

    def contains(self, x):
        return isinstance(x, EvSeq) and x.diagram is self.diagram

    def embed(self, i, s):
        return embed_stage(self.diagram, i, s)

    def add(self, a, b):
        self._check(a, b)
        D = self.diagram
        start = min(a.start, b.start)
        if a.pushes_forward and b.pushes_forward:
            last = max(a.last, b.last)
            entries = [D.stage(i).add(a.term(i), b.term(i)) for i in range(start, last + 1)]
            return EvSeq(D, start, entries)
        return EvSeq(D, start, [D.stage(start).add(a.term(start), b.term(start))],
                     tail=lambda j: D.stage(j).add(a.term(j), b.term(j)))

    def leq(self, a, b):
        self._check(a, b)
        return seq_leq(a, b, self.depth)

    def way_below(self, a, b):
        """a << [t] iff a <= embed(i, x) for some stage i and some x << t_i.

        Exact case: this is a_H << t_H at the horizon.
        """
        self._check(a, b)
        D = self.diagram
        if _exact(a, b):
            H = horizon(a, b)
            return D.stage(H).way_below(a.term(H), b.term(H))
        half = max(2, self.depth // 2)
        for i in range(b.start, b.start + half + 1):
            S = D.stage(i)
            ti = b.term(i)
            for x in S.approximants(ti, half):
                if S.way_below(x, ti) is Decision.TRUE and \
                        seq_leq(a, self.embed(i, x), self.depth) is Decision.TRUE:
                    return Decision.TRUE
        return Decision.UNDECIDED

    def approximants(self, x, depth=None):
        g = rapidize(x, depth or self.depth)
        last = g.last if g.pushes_forward else g.start + (depth or self.depth)
        return [self.embed(i, g.term(i)) for i in range(g.start, last + 1)]

    def sup_chain(self, chain, depth=None):
        return sup_of_classes(chain, depth or self.depth)

    def classes(self, stage=None):
        """Distinct classes embedded from the last explicit stage (finite stages only)."""
        D = self.diagram
        i = stage or D.N
        out = []
        for s in D.stage(i).all_elements():
            c = self.embed(i, s)
            if not any(self.equal(c, o) is Decision.TRUE for o in out):
                out.append(c)
        return out

    def __repr__(self):
        return f"lim({self.diagram.N} stages)"


def limit_object(D, depth=None):
    return LimitObject(D, depth)


def verify_cone(D, T, psi, budget=2_000):
    """psi(j) after beta_{ij} agrees with psi(i) on stage elements; raises IncompatibleCone."""
    last = D.N + 1 if D.identity_tail else D.depth
    for i in range(1, last):
        S = D.stage(i)
        elems = S.all_elements() if S.is_finite else S.sample(min(budget, 64))
        for x in elems:
            lhs = psi(i + 1)(D.push(i, i + 1, x))
            rhs = psi(i)(x)
            if T.equal(lhs, rhs) is not Decision.TRUE:
                raise IncompatibleCone(f"cone squares fail at stage {i} on {x!r}")


def universal_map(D, T, psi, depth=None, check=True):
    """omega([s]) = sup of psi_i(s_i) over i past the start of s."""
    depth = depth or D.depth
    if check:
        verify_cone(D, T, psi)
    L = LimitObject(D, depth)

    def omega(s):
        if _exact(s):
            H = horizon(s)
            terms = [psi(i)(s.term(i)) for i in range(s.start, H + 1)]
            return T.sup_chain(Chain.of(terms), depth)
        return T.sup_chain(Chain.generated(lambda n: psi(s.start + n)(s.term(s.start + n))),
                           depth)

    return CuMap(L, T, omega, "omega")


def check_factorisation(D, omega, psi, stages=None, budget=2_000):
    """omega(embed(i, x)) = psi_i(x) for every listed stage and stage element."""
    T = omega.target
    stages = stages or range(1, D.N + 1)
    for i in stages:
        S = D.stage(i)
        elems = S.all_elements() if S.is_finite else S.sample(min(budget, 64))
        for x in elems:
            if T.equal(omega(embed_stage(D, i, x)), psi(i)(x)) is not Decision.TRUE:
                return Check.fail("factorisation", (i, x))
    return Check.ok()


def forced_values(D, T, psi, classes, stages=None):
    """Brute force: the values any factorising map must take on each class.

    A map w with w(embed(i, x)) = psi_i(x) is pinned on class c by every pair
    (i, x) with embed(i, x) equivalent to c.  Returns, per class, the set of
    target values consistent with all such pairs.
    """
    stages = stages or range(1, D.N + 1)
    out = []
    for c in classes:
        allowed = None
        for i in stages:
            for x in D.stage(i).all_elements():
                if seq_equiv(embed_stage(D, i, x), c) is Decision.TRUE:
                    v = psi(i)(x)
                    if allowed is None:
                        allowed = [t for t in T.all_elements()]
                    allowed = [t for t in allowed if T.equal(t, v) is Decision.TRUE]
        out.append(allowed if allowed is not None else list(T.all_elements()))
    return out


def check_uniqueness(D, T, psi, omega, candidate=None):
    """omega agrees with the brute-forced forced values, and with ``candidate`` if given."""
    L = LimitObject(D)
    classes = L.classes()
    forced = forced_values(D, T, psi, classes)
    for c, vals in zip(classes, forced):
        if len(vals) != 1:
            return Check.fail("uniqueness", (c, vals))
        if T.equal(vals[0], omega(c)) is not Decision.TRUE:
            return Check.fail("omega", (c, vals[0], omega(c)))
        if candidate is not None and T.equal(candidate(c), omega(c)) is not Decision.TRUE:
            return Check.fail("candidate", (c,))
    return Check.ok(classes=len(classes))


# -- the coordinate diagram -----------------------------------------------------------

class CoordinateStage(CuObject):
    """S_i: the zero tuple and tuples (m_1, ..., m_i), m_1 in {1, 2, ..., inf}, m_k in Z.

    a <= b when a_1 <= b_1 and the later coordinates agree (the zero tuple has
    m_1 = 0).  Addition is coordinatewise; an element is compact when m_1 is
    finite.
    """

    kind = "combinator"

    def __init__(self, i, box=2, depth=DEFAULT_DEPTH):
        self.i = i
        self.box = box
        self.depth = depth
        self.zero = (0,) * i

    def contains(self, x):
        if not isinstance(x, tuple) or len(x) != self.i:
            return False
        if x == self.zero:
            return True
        head, rest = x[0], x[1:]
        ok_head = head is INF or (isinstance(head, int) and head >= 1)
        return ok_head and all(isinstance(v, int) and v is not INF for v in rest)

    def add(self, a, b):
        self._check(a, b)
        head = INF if a[0] is INF or b[0] is INF else a[0] + b[0]
        return (head,) + tuple(x + y for x, y in zip(a[1:], b[1:]))

    def leq(self, a, b):
        self._check(a, b)
        if a[1:] != b[1:]:
            return Decision.FALSE
        return Decision.of(b[0] is INF or (a[0] is not INF and a[0] <= b[0]))

    def way_below(self, a, b):
        return self.leq(a, b) & Decision.of(a[0] is not INF)

    def approximants(self, x, depth=None):
        self._check(x)
        if x[0] is INF:
            return [(n,) + x[1:] for n in range(1, (depth or self.depth) + 1)]
        return [x]

    def approximant_chain(self, x):
        if x[0] is INF:
            return Chain.generated(lambda n: (n + 1,) + x[1:])
        return Chain.of([x])

    def sup_chain(self, chain, depth=None):
        depth = depth or self.depth
        if not isinstance(chain, Chain):
            chain = Chain.of(chain)
        terms = chain.prefix(depth)
        for a, b in zip(terms, terms[1:]):
            if self.leq(a, b) is not Decision.TRUE:
                raise NotIncreasing(f"{a!r} is not below {b!r}")
        if chain.eventually_constant or terms[-1][0] is INF:
            return terms[-1]
        tail = terms[len(terms) // 2:]
        if all(t == tail[0] for t in tail):
            return tail[0]
        return (INF,) + terms[-1][1:]

    def all_elements(self):
        """Elements inside the box: m_1 in 1..box or inf, other coordinates in [-box, box]."""
        heads = list(range(1, self.box + 1)) + [INF]
        rest = list(product(range(-self.box, self.box + 1), repeat=self.i - 1))
        return [self.zero] + [(h,) + r for h in heads for r in rest]

    def sample(self, budget=50):
        return self.all_elements()[:budget]

    def __repr__(self):
        return f"S_{self.i}"


def _pad(x):
    return x + (0,)


def coordinate_diagram(N=None, box=2, depth=DEFAULT_DEPTH):
    """S_1 -> S_2 -> ... with maps padding by a zero coordinate.

    With ``N`` the diagram is truncated at S_N and continues by identities.
    """
    if N is None:
        first = CoordinateStage(1, box, depth)

        def tail(i):
            S = CoordinateStage(i, box, depth)
            return S, CuMap(CoordinateStage(i - 1, box, depth), S, _pad)

        return Diagram([first], [], tail=tail, depth=depth)
    stages = [CoordinateStage(i, box, depth) for i in range(1, N + 1)]
    maps = [CuMap(stages[i], stages[i + 1], _pad) for i in range(N - 1)]
    return Diagram(stages, maps, depth=depth)


def frozen_target(j):
    """s_j = (1, 0, ..., 0, 1) in S_j."""
    return (1,) + (0,) * (j - 2) + (1,)


def unreachable_from_earlier_stages(D, j, s):
    """Brute force over the box: no element of an earlier stage is pushed below or above s."""
    for i in range(1, j):
        for x in D.stage(i).all_elements():
            y = D.push(i, j, x)
            if D.stage(j).leq(y, s) is not Decision.FALSE:
                return Check.fail("down-set", (i, x))
            if D.stage(j).leq(s, y) is not Decision.FALSE:
                return Check.fail("up-set", (i, x))
    return Check.ok()


def increasing_sequences_reaching(D, j, s):
    """All genuinely increasing sequences t_1, ..., t_j = s over the box (brute force)."""
    found = []

    def extend(i, prefix):
        if i == j:
            if D.stage(j).leq(D.push(j - 1, j, prefix[-1]), s) is Decision.TRUE:
                found.append(tuple(prefix) + (s,))
            return
        for x in D.stage(i).all_elements():
            if prefix and D.stage(i).leq(D.push(i - 1, i, prefix[-1]), x) is not Decision.TRUE:
                continue
            extend(i + 1, prefix + [x])

    if j == 1:
        return [(s,)]
    extend(1, [])
    return found
