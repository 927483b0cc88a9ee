"""Finite groups by Cayley table, isomorphism-invariant fingerprints and reference groups.

A fingerprint is a bundle of invariants (order, element-order histogram,
abelianization, center, derived subgroup, class number, exponent). Equal
fingerprints do not prove isomorphism; ``match`` reports candidates whose
fingerprints agree, nothing more.

Reference names::

    Cn  Dn (order 2n)  Sn  An  GL(n,p)  SL(n,p)  Cn^k  CnwrC2
    A x B (written AxB)  and the literals  C4^2:S3  C4.A4
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import reduce
from itertools import permutations, product
from math import factorial, lcm, prod

import numpy as np

from . import exact_linalg as xl

ORDER_CAP = 10000


class GroupError(ValueError):
    pass


class FiniteGroup:
    """Group given by its multiplication table on ``0..N-1``."""

    def __init__(self, table, name=None):
        self.table = np.asarray(table, dtype=np.int64)
        N = self.table.shape[0]
        if N > ORDER_CAP:
            raise GroupError(f"group order {N} exceeds the cap {ORDER_CAP}")
        self.name = name
        ident = [i for i in range(N) if np.array_equal(self.table[i], np.arange(N))]
        if len(ident) != 1:
            raise GroupError("table has no identity")
        self.identity = ident[0]
        inv = np.nonzero(self.table == self.identity)
        self.inverse = np.empty(N, dtype=np.int64)
        self.inverse[inv[0]] = inv[1]

    @property
    def order(self):
        return self.table.shape[0]

    @classmethod
    def from_elements(cls, elements, mul, name=None):
        """Build from hashable elements and a multiplication function."""
        elements = list(elements)
        index = {e: i for i, e in enumerate(elements)}
        N = len(elements)
        T = np.empty((N, N), dtype=np.int64)
        for i, a in enumerate(elements):
            for j, b in enumerate(elements):
                T[i, j] = index[mul(a, b)]
        return cls(T, name)

    @classmethod
    def generate(cls, gens, mul, identity, name=None):
        elems = [identity]
        seen = {identity}
        frontier = [identity]
        while frontier:
            nxt = []
            for h in frontier:
                for s in gens:
                    k = mul(h, s)
                    if k not in seen:
                        if len(seen) >= ORDER_CAP:
                            raise GroupError("generated group exceeds the order cap")
                        seen.add(k)
                        elems.append(k)
                        nxt.append(k)
            frontier = nxt
        return cls.from_elements(elems, mul, name)

    def element_orders(self):
        N = self.order
        orders = np.ones(N, dtype=np.int64)
        cur = np.arange(N)
        k = 1
        todo = cur != self.identity
        while todo.any():
            cur = self.table[cur, np.arange(N)]
            k += 1
            hit = todo & (cur == self.identity)
            orders[hit] = k
            todo &= ~hit
        return orders

    def subgroup(self, gens):
        seen = {self.identity}
        frontier = [self.identity]
        while frontier:
            nxt = []
            for h in frontier:
                for s in gens:
                    k = int(self.table[h, s])
                    if k not in seen:
                        seen.add(k)
                        nxt.append(k)
            frontier = nxt
        return sorted(seen)

    def center(self):
        return [a for a in range(self.order) if np.array_equal(self.table[a], self.table[:, a])]

    def conjugacy_classes(self):
        N = self.order
        # conj[g, a] = g a g^-1
        conj = self.table[self.table, self.inverse[:, None]]
        label = np.full(N, -1, dtype=np.int64)
        classes = []
        for a in range(N):
            if label[a] < 0:
                members = np.unique(conj[:, a])
                label[members] = len(classes)
                classes.append(members.tolist())
        return classes

    def derived_subgroup(self):
        N = self.order
        ab = self.table[np.arange(N)[:, None], np.arange(N)[None, :]]
        comm = self.table[self.table[ab, self.inverse[:, None]], self.inverse[None, :]]
        return self.subgroup(sorted(set(np.unique(comm).tolist())))

    def quotient(self, normal):
        from .symplectic_aut import quotient_table
        return FiniteGroup(quotient_table(self.table, normal))


def abelian_invariants(G: FiniteGroup):
    """Invariant factors d_1 | d_2 | ... of an abelian group (from element-order counts)."""
    N = G.order
    if N == 1:
        return ()
    orders = G.element_orders()
    primes = [p for p in range(2, N + 1) if N % p == 0 and all(p % q for q in range(2, p))]
    per_prime = {}
    for p in primes:
        # count of x with x^(p^k) = 1 is p^(sum_i min(k, e_i))
        e = 0
        while N % p ** (e + 1) == 0:
            e += 1
        s = [sum(1 for o in orders if (p ** k) % o == 0) for k in range(e + 1)]
        logs = [round(np.log(c) / np.log(p)) for c in s]
        # number of cyclic factors with exponent >= k is logs[k] - logs[k-1]
        ge = [logs[k] - logs[k - 1] for k in range(1, e + 1)] + [0]
        exps = []
        for k in range(1, e + 1):
            exps += [k] * (ge[k - 1] - ge[k])
        per_prime[p] = sorted(exps, reverse=True)
    width = max((len(v) for v in per_prime.values()), default=0)
    factors = [1] * width
    for p, exps in per_prime.items():
        for i, k in enumerate(exps):
            factors[i] *= p ** k
    return tuple(sorted(f for f in factors if f > 1))


@dataclass(frozen=True)
class GroupFingerprint:
    order: int
    histogram: tuple        # ((element order, count), ...)
    abelianization: tuple
    center: int
    derived: int
    classes: int
    exponent: int

    def as_dict(self):
        return {"order": self.order, "histogram": {str(k): v for k, v in self.histogram},
                "abelianization": list(self.abelianization), "center": self.center,
                "derived": self.derived, "classes": self.classes, "exponent": self.exponent}


def as_finite_group(G) -> FiniteGroup:
    if isinstance(G, FiniteGroup):
        return G
    if hasattr(G, "table"):
        return FiniteGroup(G.table)
    return FiniteGroup(np.asarray(G))


def fingerprint(G) -> GroupFingerprint:
    G = as_finite_group(G)
    orders = G.element_orders()
    vals, counts = np.unique(orders, return_counts=True)
    D = G.derived_subgroup()
    A = G.quotient(D)
    return GroupFingerprint(
        order=G.order,
        histogram=tuple((int(v), int(c)) for v, c in zip(vals, counts)),
        abelianization=abelian_invariants(A),
        center=len(G.center()),
        derived=len(D),
        classes=len(G.conjugacy_classes()),
        exponent=int(reduce(lcm, (int(v) for v in vals), 1)),
    )


# -- reference groups --------------------------------------------------------

def _perm_mul(p, q):
    # apply p then q
    return tuple(q[i] for i in p)


def cyclic(n):
    return FiniteGroup([[(i + j) % n for j in range(n)] for i in range(n)], f"C{n}")


def dihedral(n):
    """Symmetries of the n-gon, order 2n."""
    r = tuple((i + 1) % n for i in range(n))
    s = tuple((-i) % n for i in range(n))
    if n <= 2:
        # D1 = C2, D2 = C2 x C2 do not act faithfully on n points
        return direct_product(cyclic(2), cyclic(n)) if n == 2 else cyclic(2)
    return FiniteGroup.generate([r, s], _perm_mul, tuple(range(n)), f"D{n}")


def symmetric(n):
    return FiniteGroup.from_elements(permutations(range(n)), _perm_mul, f"S{n}")


def _sign(p):
    s, seen = 1, set()
    for i in range(len(p)):
        if i not in seen:
            j, L = i, 0
            while j not in seen:
                seen.add(j)
                j = p[j]
                L += 1
            s *= (-1) ** (L - 1)
    return s


def alternating(n):
    return FiniteGroup.from_elements([p for p in permutations(range(n)) if _sign(p) == 1],
                                     _perm_mul, f"A{n}")


def _matmul_mod(p):
    def mul(A, B):
        n = int(round(len(A) ** 0.5))
        return tuple(sum(A[i * n + k] * B[k * n + j] for k in range(n)) % p
                     for i in range(n) for j in range(n))
    return mul


def general_linear(n, p, special=False):
    if p ** (n * n) > 4 * 10 ** 6:
        raise GroupError(f"GL({n},{p}) is too large to enumerate")
    elems = []
    for entries in product(range(p), repeat=n * n):
        d = xl.det([list(entries[i * n:(i + 1) * n]) for i in range(n)]) % p
        if d and (not special or d == 1):
            elems.append(tuple(entries))
    if len(elems) > ORDER_CAP:
        raise GroupError("group exceeds the order cap")
    return FiniteGroup.from_elements(elems, _matmul_mod(p), f"{'SL' if special else 'GL'}({n},{p})")


def direct_product(*groups) -> FiniteGroup:
    N = prod(G.order for G in groups)
    if N > ORDER_CAP:
        raise GroupError("direct product exceeds the order cap")
    T = groups[0].table
    for G in groups[1:]:
        M = G.order
        T = (T[:, None, :, None] * M + G.table[None, :, None, :]).reshape(T.shape[0] * M, -1)
    return FiniteGroup(T, "x".join(G.name or "?" for G in groups))


def wreath_c2(n):
    """C_n wr C_2 = (C_n x C_n) : C_2 with the swap action, order 2n^2."""
    def mul(x, y):
        a, b, s = x
        c, d, t = y
        if s:
            c, d = d, c
        return ((a + c) % n, (b + d) % n, s ^ t)
    elems = [(a, b, s) for s in (0, 1) for a in range(n) for b in range(n)]
    return FiniteGroup.from_elements(elems, mul, f"C{n}wrC2")


def _c4sq_s3():
    """(C_4)^2 : S_3, with S_3 permuting coordinates of (Z/4)^3 modulo the diagonal."""
    def norm(v):
        return tuple((x - v[2]) % 4 for x in v)

    def mul(x, y):
        (u, p), (v, q) = x, y
        # act by p then translate: (u, p)(v, q) = (u + p.v, p q)
        pv = tuple(v[p.index(i)] for i in range(3))
        return (norm(tuple(a + b for a, b in zip(u, pv))), tuple(p[q[i]] for i in range(3)))
    elems = [((a, b, 0), p) for a in range(4) for b in range(4) for p in permutations(range(3))]
    return FiniteGroup.from_elements(elems, mul, "C4^2:S3")


def _c4_a4():
    """Central extension C4 . A4 = <SL(2,3), scalar of order 4> inside GL(2,5)."""
    mul = _matmul_mod(5)
    # binary tetrahedral group in SL(2,5) and the scalar 2 (order 4 mod 5)
    a = (0, 4, 1, 0)
    b = (1, 1, 2, 3)
    gens = [a, b, (2, 0, 0, 2)]
    return FiniteGroup.generate(gens, mul, (1, 0, 0, 1), "C4.A4")


LITERALS = {"C4^2:S3": _c4sq_s3, "C4.A4": _c4_a4}

_GRAMMAR = "Cn, Dn, Sn, An, GL(n,p), SL(n,p), Cn^k, CnwrC2, products AxB, literals " + \
    ", ".join(LITERALS)


def _split_product(name):
    parts, depth, cur = [], 0, ""
    for ch in name:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "x" and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return parts


def _atom(name):
    if name in LITERALS:
        return LITERALS[name]()
    m = re.fullmatch(r"C(\d+)wrC2", name)
    if m:
        return wreath_c2(int(m.group(1)))
    m = re.fullmatch(r"C(\d+)\^(\d+)", name)
    if m:
        k = int(m.group(2))
        G = direct_product(*[cyclic(int(m.group(1)))] * k)
        G.name = name
        return G
    m = re.fullmatch(r"([CDSA])(\d+)", name)
    if m:
        kind, n = m.group(1), int(m.group(2))
        if kind in "SA" and n > 7:
            raise GroupError(f"{name} exceeds the order cap")
        return {"C": cyclic, "D": dihedral, "S": symmetric, "A": alternating}[kind](n)
    m = re.fullmatch(r"(GL|SL)\((\d+),(\d+)\)", name)
    if m:
        return general_linear(int(m.group(2)), int(m.group(3)), special=m.group(1) == "SL")
    raise GroupError(f"unsupported group name {name!r}; grammar: {_GRAMMAR}")


def reference(name: str) -> FiniteGroup:
    name = name.replace(" ", "").replace("×", "x")
    parts = _split_product(name)
    if any(not p for p in parts):
        raise GroupError(f"malformed group name {name!r}; grammar: {_GRAMMAR}")
    groups = [_atom(p) for p in parts]
    G = groups[0] if len(groups) == 1 else direct_product(*groups)
    G.name = name
    return G


def expected_order(name: str):
    """Closed-form order of a named group, or None for literals."""
    total = 1
    for part in _split_product(name.replace(" ", "")):
        m = re.fullmatch(r"([CDSA])(\d+)", part)
        g = re.fullmatch(r"(GL|SL)\((\d+),(\d+)\)", part)
        w = re.fullmatch(r"C(\d+)wrC2", part)
        pw = re.fullmatch(r"C(\d+)\^(\d+)", part)
        if m:
            n = int(m.group(2))
            total *= {"C": n, "D": 2 * n, "S": factorial(n), "A": max(1, factorial(n) // 2)}[m.group(1)]
        elif g:
            n, p = int(g.group(2)), int(g.group(3))
            o = prod(p ** n - p ** i for i in range(n))
            total *= o // (p - 1) if g.group(1) == "SL" else o
        elif w:
            total *= 2 * int(w.group(1)) ** 2
        elif pw:
            total *= int(pw.group(1)) ** int(pw.group(2))
        else:
            return None
    return total


def match(G, candidates) -> list:
    """Names of candidate groups whose fingerprint equals that of G."""
    fp = fingerprint(G)
    out = []
    for c in candidates:
        H = reference(c) if isinstance(c, str) else c
        if H.order == fp.order and fingerprint(H) == fp:
            out.append(H.name if not isinstance(c, str) else c)
    return out


def conjugate_group(elements, C):
    """``C^-1 g C`` for every element (C unimodular); used to test invariance."""
    Ci = xl.inverse_unimodular(C)
    return [xl.matmul(xl.matmul(Ci, g), C) for g in elements]

