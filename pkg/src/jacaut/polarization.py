"""Integral alternating forms on a lattice and principal polarizations.

An integral alternating form E on the lattice is the Chern class of a line
bundle exactly when it is invariant under the complex structure,
``J^t E J = E``. It is a polarization when in addition the symmetric form
``S = E J`` is positive definite, and principal when ``det E = 1``.

With this convention the standard form ``[[0, 1], [-1, 0]]`` on the square
lattice ``Pi = (1, i)`` is positive.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import exact_linalg as xl
from .torus import ComplexStructure, PeriodMatrix

log = logging.getLogger(__name__)

DEFAULT_BUDGET = 2
_CHUNK = 1 << 16


class PolarizationError(ValueError):
    pass


@dataclass
class Polarization:
    E: list
    positive: bool
    principal: bool
    frobenius_transform: list | None = None
    elementary_divisors: tuple = ()
    coefficients: tuple | None = None  # coordinates over the compatible-form basis

    def key(self):
        return xl.as_tuple(self.E)


def standard_form(D):
    """``[[0, D], [-D, 0]]`` for a tuple of elementary divisors."""
    g = len(D)
    E = xl.zeros(2 * g, 2 * g)
    for i, d in enumerate(D):
        E[i][g + i] = d
        E[g + i][i] = -d
    return E


def _skew_from(v, n):
    E = xl.zeros(n, n)
    it = iter(v)
    for k in range(n):
        for l in range(k + 1, n):
            c = next(it)
            E[k][l], E[l][k] = c, -c
    return E


# -- compatibility -----------------------------------------------------------

def compat_residual(E, cs: ComplexStructure):
    with mpmath.workdps(cs.precision_digits + 10):
        Em = mpmath.matrix(E)
        return mpmath.mnorm(cs.J.T * Em * cs.J - Em, "inf")


def is_compatible(E, cs: ComplexStructure) -> bool:
    if not xl.is_skew(E):
        return False
    if cs.exact is not None:
        Jt = xl.transpose(cs.exact)
        return xl.matmul(xl.matmul(Jt, E), cs.exact) == [[Fraction(x) for x in r] for r in E]
    return compat_residual(E, cs) < mpmath.mpf(10) ** (-(cs.precision_digits // 2))


def _exact_compat_basis(J, n):
    # unknowns E_kl, k < l; constraint J^t E J - E = 0 (entries i < j suffice)
    pairs = [(k, l) for k in range(n) for l in range(k + 1, n)]
    rows = []
    for k, l in pairs:
        # contribution of E_kl (and E_lk = -E_kl) to (J^t E J)_ij = sum J_ai E_ab J_bj
        row = []
        for i in range(n):
            for j in range(i + 1, n):
                c = J[k][i] * J[l][j] - J[l][i] * J[k][j]
                c -= int((i, j) == (k, l))
                row.append(c)
        rows.append(row)
    return xl.integer_left_kernel(rows)


def _numeric_compat_basis(pm: PeriodMatrix, scale=None):
    # E is of type (1,1) iff X^t E X = 0 for X the holomorphic half of P^{-1}
    g = pm.g
    n = 2 * g
    prec = pm.precision_digits
    with mpmath.workdps(prec + 10):
        Pinv = pm.stacked_inverse()
        X = [[Pinv[k, i] for i in range(g)] for k in range(n)]
        pairs = [(k, l) for k in range(n) for l in range(k + 1, n)]
        cols = [[X[k][i] * X[l][j] - X[l][i] * X[k][j] for k, l in pairs]
                for i in range(g) for j in range(i + 1, g)]
        if not cols:
            # g = 1: every alternating form is compatible
            return xl.identity(len(pairs))
        return xl.integer_kernel(cols, prec=prec, scale=scale)


def compat_basis(pm: PeriodMatrix, cs: ComplexStructure, method: str = "auto", scale=None) -> list:
    """Z-basis of the integral alternating forms invariant under J (the Neron-Severi lattice).

    ``method="exact"`` uses the rational J and an exact kernel, ``"lll"`` the
    numerical route through the period matrix; ``"auto"`` picks exact when J
    is rational.
    """
    n = 2 * pm.g
    if method == "auto":
        method = "exact" if cs.exact is not None else "lll"
    if method == "exact":
        if cs.exact is None:
            raise PolarizationError("J is not rational at this precision; use the lattice route")
        vecs = _exact_compat_basis(cs.exact, n)
    elif method == "lll":
        vecs = _numeric_compat_basis(pm, scale)
    else:
        raise ValueError(f"unknown method {method!r}")
    basis = [_skew_from(v, n) for v in vecs]
    for E in basis:
        if not is_compatible(E, cs):
            raise PolarizationError("compatible-form basis failed verification; increase the precision")
    return basis


# -- positivity --------------------------------------------------------------

def symmetrized(E, cs: ComplexStructure):
    """``S = E J`` (exact when J is rational, else an mpmath matrix)."""
    if cs.exact is not None:
        return xl.matmul(E, cs.exact)
    with mpmath.workdps(cs.precision_digits + 10):
        return mpmath.matrix(E) * cs.J


def is_positive(E, cs: ComplexStructure) -> bool:
    S = symmetrized(E, cs)
    n = len(E)
    if cs.exact is not None:
        if any(S[i][j] != S[j][i] for i in range(n) for j in range(n)):
            raise PolarizationError("E J is not symmetric; E is not compatible with J")
        return xl.is_positive_definite(S)
    with mpmath.workdps(cs.precision_digits + 10):
        asym = max(abs(S[i, j] - S[j, i]) for i in range(n) for j in range(n))
        if asym > mpmath.mpf(10) ** (-(cs.precision_digits // 2)):
            raise PolarizationError("E J is not symmetric; E is not compatible with J")
        return xl.cholesky(S) is not None


def make_polarization(E, cs: ComplexStructure, coefficients=None) -> Polarization:
    pos = is_positive(E, cs)
    C, D = frobenius_form(E)
    return Polarization(E, pos, pos and all(d == 1 for d in D), C, tuple(D), coefficients)


# -- enumeration -------------------------------------------------------------

def _coeff_block(start, stop, r, budget):
    idx = np.arange(start, stop, dtype=np.int64)
    base = 2 * budget + 1
    C = np.empty((len(idx), r), dtype=np.int64)
    for k in range(r - 1, -1, -1):
        C[:, k] = idx % base - budget
        idx //= base
    return C


def _pfaffians(E, terms):
    pf = np.zeros(E.shape[0], dtype=E.dtype)
    for sign, match in terms:
        t = np.full(E.shape[0], sign, dtype=E.dtype)
        for i, j in match:
            t = t * E[:, i, j]
        pf += t
    return pf


def cull_pb(basis, cs: ComplexStructure, budget: int = DEFAULT_BUDGET, limit: int | None = None) -> list:
    """Principal polarizations among small combinations of the compatible basis.

    Every coefficient vector with entries in ``[-budget, budget]`` is tried.
    Vectors c and -c give E and -E, so only one of each pair is enumerated;
    a unimodular E is kept with whichever sign makes ``E J`` positive
    definite (for odd g both signs have Pfaffian of opposite sign, for even g
    the same sign, so the Pfaffian alone cannot pick the representative).
    The result is sorted lexicographically by matrix entries.
    """
    if not basis:
        raise PolarizationError("empty compatible-form basis")
    r, n = len(basis), len(basis[0])
    total = (2 * budget + 1) ** r
    if limit is not None and total > limit:
        raise PolarizationError(f"{total} coefficient vectors exceed the limit {limit}; lower the budget")
    B = np.array(basis, dtype=np.int64)
    terms = xl.pfaffian_terms(n)
    entry_cap = budget * int(np.abs(B).sum(axis=0).max())
    # every Pfaffian term is a product of n/2 entries; stay well inside int64
    use_int64 = len(terms) * entry_cap ** (n // 2) < 2 ** 62
    Jf = cs.as_float()
    found = {}
    for start in range(total // 2 + 1, total, _CHUNK):
        C = _coeff_block(start, min(total, start + _CHUNK), r, budget)
        E = np.tensordot(C, B, axes=(1, 0))
        if not use_int64:
            E = E.astype(object)
        pf = _pfaffians(E, terms)
        for k in np.nonzero(np.abs(pf) == 1)[0]:
            Ek = E[k].astype(np.int64)
            S = Ek @ Jf
            ev = np.linalg.eigvalsh((S + S.T) / 2)
            if ev.min() > -1e-6:
                sign = 1
            elif ev.max() < 1e-6:
                sign = -1
            else:
                continue
            cand = (sign * Ek).tolist()
            if is_positive(cand, cs):
                coeffs = tuple(sign * int(x) for x in C[k])
                found[xl.as_tuple(cand)] = make_polarization(cand, cs, coeffs)
    log.info("cull: %d coefficient vectors, %d principal polarizations", total, len(found))
    return [found[k] for k in sorted(found)]


# -- Frobenius normal form ---------------------------------------------------

def frobenius_form(E):
    """Symplectic basis change: returns ``(C, D)`` with ``C^t E C = [[0, D], [-D, 0]]``.

    C is unimodular and ``d_1 | d_2 | ... | d_g`` are positive.
    """
    if not xl.is_skew(E):
        raise PolarizationError("form is not alternating")
    n = len(E)
    if n % 2:
        raise PolarizationError("odd dimension")
    A = [list(map(int, row)) for row in E]
    C = xl.identity(n)

    def add(i, j, q):  # v_i += q v_j
        if not q:
            return
        for row in C:
            row[i] += q * row[j]
        A[i] = [a + q * b for a, b in zip(A[i], A[j])]
        for row in A:
            row[i] += q * row[j]

    def swap(i, j):
        if i == j:
            return
        for row in C:
            row[i], row[j] = row[j], row[i]
        A[i], A[j] = A[j], A[i]
        for row in A:
            row[i], row[j] = row[j], row[i]

    def negate(i):
        for row in C:
            row[i] = -row[i]
        A[i] = [-a for a in A[i]]
        for row in A:
            row[i] = -row[i]

    D = []
    for k in range(0, n, 2):
        while True:
            nz = [(abs(A[i][j]), i, j) for i in range(k, n) for j in range(i + 1, n) if A[i][j]]
            if not nz:
                raise PolarizationError("form is degenerate")
            _, i, j = min(nz)
            swap(k, i)
            swap(k + 1, j)
            if A[k][k + 1] < 0:
                negate(k + 1)
            p = A[k][k + 1]
            clean = True
            for l in range(k + 2, n):
                add(l, k + 1, -(A[k][l] // p))
                add(l, k, A[k + 1][l] // p)
                clean = clean and A[k][l] == 0 and A[k + 1][l] == 0
            if not clean:
                continue
            bad = next((i for i in range(k + 2, n) for j in range(k + 2, n) if A[i][j] % p), None)
            if bad is None:
                break
            add(k, bad, 1)
        D.append(A[k][k + 1])
    order = list(range(0, n, 2)) + list(range(1, n, 2))
    C = [[row[c] for c in order] for row in C]
    return C, D


def check_frobenius(E, C, D) -> bool:
    return xl.matmul(xl.matmul(xl.transpose(C), E), C) == standard_form(D) and abs(xl.det(C)) == 1


def from_intersection(M, pm: PeriodMatrix, cs: ComplexStructure) -> Polarization:
    """Use an intersection matrix as the canonical principal polarization.

    The sign is flipped when ``-M`` is the positive one.
    """
    if not xl.is_skew(M):
        raise PolarizationError("intersection matrix is not alternating")
    if abs(xl.pfaffian(M)) != 1:
        raise PolarizationError("intersection matrix is not unimodular")
    if not is_compatible(M, cs):
        raise PolarizationError("intersection matrix is not compatible with the complex structure "
                                "(wrong homology basis?)")
    for sign in (1, -1):
        E = xl.scale(sign, M)
        if is_positive(E, cs):
            return make_polarization(E, cs)
    raise PolarizationError("neither sign of the intersection matrix is positive")


# -- Riemann relations -------------------------------------------------------

@dataclass
class RiemannCheck:
    symmetric_residual: mpmath.mpf
    positive: bool
    details: dict = field(default_factory=dict)

    def ok(self, tol):
        return self.positive and self.symmetric_residual < tol


def riemann_check(pm: PeriodMatrix, pol: Polarization) -> RiemannCheck:
    """Riemann relations for Q = Pi C in the symplectic basis of ``pol``.

    With ``Q = (Q1 | Q2)`` we need ``Q1 Q2^t`` symmetric and
    ``i (Q1 conj(Q2)^t - Q2 conj(Q1)^t)`` positive definite Hermitian.
    """
    if pol.frobenius_transform is None:
        raise PolarizationError("polarization has no Frobenius transform")
    g = pm.g
    with mpmath.workdps(pm.precision_digits + 10):
        Q = pm.times_integer(pol.frobenius_transform)
        Q1 = mpmath.matrix([[Q[i, j] for j in range(g)] for i in range(g)])
        Q2 = mpmath.matrix([[Q[i, g + j] for j in range(g)] for i in range(g)])
        sym = mpmath.mnorm(Q1 * Q2.T - Q2 * Q1.T, "inf")
        H = 1j * (Q1 * Q2.H - Q2 * Q1.H)
        # Hermitian H > 0 iff the real form [[Re, -Im], [Im, Re]] is
        R = mpmath.matrix(2 * g, 2 * g)
        for i in range(g):
            for j in range(g):
                a, b = mpmath.re(H[i, j]), mpmath.im(H[i, j])
                R[i, j] = R[g + i, g + j] = a
                R[i, g + j] = -b
                R[g + i, j] = b
        pos = xl.cholesky(R) is not None
    return RiemannCheck(sym, pos)
