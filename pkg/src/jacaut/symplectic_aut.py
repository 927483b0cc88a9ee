"""Isomorphisms of principally polarized tori and their groups.

For principal forms E_1, E_2 the Rosati-type trace form
``R -> tr(E_1^{-1} R^t E_2 R)`` is positive definite on the homomorphism
lattice, and every isomorphism of polarized tori has value 2g. So the
isomorphisms are among the finitely many lattice vectors of that length,
which Fincke-Pohst enumerates exactly; the symplectic condition
``R^t E_2 R = E_1`` then picks out the actual isomorphisms.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt, lcm

import numpy as np

from . import exact_linalg as xl
from .torus import HomBasis

log = logging.getLogger(__name__)

class AutError(ValueError):
    pass


# -- trace form --------------------------------------------------------------

@dataclass
class TraceGram:
    Q: list
    target: int
    doubled: bool = False


def _inverse_principal(E):
    if abs(xl.det(E)) != 1:
        raise AutError("trace form needs principal (unimodular) forms")
    return xl.inverse_unimodular(E)


def trace_gram(hb: HomBasis, E1, E2) -> TraceGram:
    """Gram matrix of ``tr(E_1^{-1} R^t E_2 R)`` on the basis of ``hb``.

    Entries are symmetrized; if that produces halves, everything (target
    included) is doubled so the Gram stays integral.
    """
    n = len(E1)
    g = n // 2
    E1i = np.array(_inverse_principal(E1), dtype=object)
    E2a = np.array(E2, dtype=object)
    Bs = [np.array(B, dtype=object) for B in hb.rational_reps]
    # tr(A^t E2 B) with A_i = B_i E1^{-T}: precompute left and right factors
    left = [E1i.dot(B.T).dot(E2a) for B in Bs]
    r = len(Bs)
    raw = [[int(np.sum(left[i].T * Bs[j])) for j in range(r)] for i in range(r)]
    halves = [[Fraction(raw[i][j] + raw[j][i], 2) for j in range(r)] for i in range(r)]
    if all(x.denominator == 1 for row in halves for x in row):
        Q, target, doubled = [[int(x) for x in row] for row in halves], 2 * g, False
    else:
        Q, target, doubled = [[raw[i][j] + raw[j][i] for j in range(r)] for i in range(r)], 4 * g, True
    if r and not xl.is_positive_definite(Q):
        raise AutError("trace form is not positive definite; polarization data is inconsistent")
    return TraceGram(Q, target, doubled)


# -- Fincke-Pohst ------------------------------------------------------------

def fincke_pohst(Q, target: int, reduce: bool = True) -> list:
    """All integer vectors x with ``x^t Q x == target``, sorted lexicographically.

    Exact: the LDL decomposition is done over Q and then scaled to integers,
    so every bound in the search is an integer comparison. With ``reduce``
    the Gram matrix is LLL-reduced first (the solutions are mapped back).
    """
    r = len(Q)
    if r == 0:
        return [[]] if target == 0 else []
    T = None
    if reduce and r > 1:
        Q, T = xl.gram_lll(Q)
    dec = xl.ldl(Q)
    if dec is None:
        raise AutError("Gram matrix is not positive definite")
    mu, d = dec
    # y_i = m_i x_i + sum_{j>i} a_ij x_j and w_i y_i^2 summed gives L * Q(x)
    m = [lcm(*(mu[i][j].denominator for j in range(i + 1, r))) if i < r - 1 else 1 for i in range(r)]
    a = [[int(mu[i][j] * m[i]) for j in range(r)] for i in range(r)]
    wq = [d[i] / (m[i] * m[i]) for i in range(r)]
    L = lcm(*(w.denominator for w in wq))
    w = [int(x * L) for x in wq]
    budget = L * target

    sols = []
    x = [0] * r

    def descend(i, rem):
        N = sum(a[i][j] * x[j] for j in range(i + 1, r))
        mi, wi = m[i], w[i]
        if i == 0:
            if rem % wi:
                return
            s = xl.exact_sqrt(rem // wi)
            if s is None:
                return
            for y in sorted({s, -s}):
                if (y - N) % mi == 0:
                    x[0] = (y - N) // mi
                    sols.append(list(x))
            x[0] = 0
            return
        b = isqrt(rem // wi)
        lo = -((b + N) // mi)  # ceil((-b - N) / m)
        hi = (b - N) // mi
        for xi in range(lo, hi + 1):
            y = mi * xi + N
            x[i] = xi
            descend(i - 1, rem - wi * y * y)
        x[i] = 0

    descend(r - 1, budget)
    if T is not None:
        sols = [xl.vecmat(s, T) for s in sols]
    sols.sort()
    return sols


def brute_force_norm(Q, target, box):
    """Reference enumeration over the box ``|x_i| <= box`` (tests only)."""
    from itertools import product
    r = len(Q)
    out = []
    for x in product(range(-box, box + 1), repeat=r):
        if sum(x[i] * Q[i][j] * x[j] for i in range(r) for j in range(r)) == target:
            out.append(list(x))
    return out


# -- isomorphisms and groups -------------------------------------------------

@dataclass
class SymplecticSet:
    elements: list
    trace_solutions: int = 0


def is_symplectic(R, E1, E2) -> bool:
    """``R^t E_2 R == E_1``."""
    return xl.matmul(xl.matmul(xl.transpose(R), E2), R) == [list(row) for row in E1]


def isomorphisms(hb: HomBasis, E1, E2) -> SymplecticSet:
    tg = trace_gram(hb, E1, E2)
    sols = fincke_pohst(tg.Q, tg.target)
    n = len(E1)
    Bs = np.array(hb.rational_reps, dtype=np.int64).reshape(len(hb.rational_reps), n, n)
    E1a = np.array(E1, dtype=np.int64)
    E2a = np.array(E2, dtype=np.int64)
    out = []
    if sols:
        lam = np.array(sols, dtype=np.int64)
        Rs = np.tensordot(lam, Bs, axes=(1, 0))
        ok = np.all(np.einsum("kji,jl,klm->kim", Rs, E2a, Rs) == E1a, axis=(1, 2))
        for R in Rs[ok]:
            Rl = R.tolist()
            if is_symplectic(Rl, E1, E2) and abs(xl.det(Rl)) == 1:
                out.append(Rl)
    out.sort()
    return SymplecticSet(out, len(sols))


def _key(R):
    return np.asarray(R, dtype=np.int64).tobytes()


@dataclass
class MatrixGroup:
    """A finite group of integer matrices with its Cayley table."""
    elements: list
    table: np.ndarray
    generators: list = field(default_factory=list)
    identity: int = 0

    @property
    def order(self):
        return len(self.elements)

    def index_of(self, R):
        return self._index[_key(R)]

    def __post_init__(self):
        self._index = {_key(R): i for i, R in enumerate(self.elements)}


def cayley_table(elements) -> np.ndarray:
    """``T[i, j] = index(elements[i] @ elements[j])``; raises if the set is not closed."""
    arr = np.array(elements, dtype=np.int64)
    N = len(arr)
    index = {R.tobytes(): i for i, R in enumerate(arr)}
    if len(index) != N:
        raise AutError("duplicate elements")
    T = np.empty((N, N), dtype=np.int64)
    for i in range(N):
        prods = np.matmul(arr[i], arr)
        for j, P in enumerate(prods):
            k = index.get(P.tobytes())
            if k is None:
                raise AutError("set is not closed under multiplication")
            T[i, j] = k
    return T


def generated(table, gens, identity) -> set:
    """Indices of the subgroup generated by ``gens`` (finite group, so inverses come for free)."""
    seen = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for h in frontier:
            for s in gens:
                k = int(table[h, s])
                if k not in seen:
                    seen.add(k)
                    nxt.append(k)
        frontier = nxt
    return seen


def group_closure(S, max_generators: int = 3, seed: int = 0) -> MatrixGroup:
    """Check that S is a group and find a small generating set.

    Generators are chosen greedily among the smallest elements (by entry
    size) and redundant ones dropped; if more than ``max_generators`` remain
    we look for a smaller set by random search.
    """
    elements = S.elements if isinstance(S, SymplecticSet) else list(S)
    if not elements:
        raise AutError("empty set")
    n = len(elements[0])
    ident = xl.identity(n)
    elements = sorted(elements)
    try:
        e = elements.index(ident)
    except ValueError:
        raise AutError("identity missing; the set is not a group") from None
    table = cayley_table(elements)
    N = len(elements)
    by_size = sorted(range(N), key=lambda i: (sum(abs(x) for row in elements[i] for x in row), elements[i]))
    gens = []
    span = {e}
    for i in by_size:
        if len(span) == N:
            break
        if i not in span:
            gens.append(i)
            span = generated(table, gens, e)
    if len(span) != N:
        raise AutError("generated group differs from the input set")
    # drop redundant generators
    for s in list(gens):
        rest = [t for t in gens if t != s]
        if rest and len(generated(table, rest, e)) == N:
            gens = rest
    if len(gens) > max_generators:
        rng = np.random.default_rng(seed)
        for k in range(2, max_generators + 1):
            for _ in range(200):
                cand = [int(c) for c in rng.choice(N, size=k, replace=False)]
                if len(generated(table, cand, e)) == N:
                    gens = cand
                    break
            if len(gens) <= max_generators:
                break
    G = MatrixGroup(elements, table, [elements[i] for i in gens], e)
    return G


def automorphism_group(hb: HomBasis, E) -> MatrixGroup:
    return group_closure(isomorphisms(hb, E, E))


def torelli_adjust(G: MatrixGroup, hyperelliptic: bool):
    """Curve automorphism order and group from the polarized Jacobian's group.

    For a hyperelliptic curve -I is the hyperelliptic involution, so nothing
    changes; otherwise the curve group is the quotient by {+-I}.
    """
    n = len(G.elements[0])
    minus = xl.scale(-1, xl.identity(n))
    try:
        m = G.index_of(minus)
    except KeyError:
        raise AutError("-I is not in the group; not the canonical polarization") from None
    if hyperelliptic:
        return G.order, quotient_table(G.table, [G.identity])
    return G.order // 2, quotient_table(G.table, [G.identity, m])


def quotient_table(table, normal) -> np.ndarray:
    """Cayley table of G/K for a normal subgroup K given by its indices."""
    N = table.shape[0]
    coset_of = np.full(N, -1, dtype=np.int64)
    reps = []
    for i in range(N):
        if coset_of[i] < 0:
            c = len(reps)
            reps.append(i)
            for k in normal:
                coset_of[table[i, k]] = c
    if len(reps) * len(normal) != N:
        raise AutError("subgroup does not partition the group")
    M = len(reps)
    Tq = np.empty((M, M), dtype=np.int64)
    for a, ra in enumerate(reps):
        Tq[a] = coset_of[table[ra, reps]]
    # well-definedness on a second representative of every coset
    for a, ra in enumerate(reps):
        for k in normal:
            if not np.array_equal(coset_of[table[table[ra, k], reps]], Tq[a]):
                raise AutError("subgroup is not normal")
    return Tq
