"""Complex tori C^g / Pi Z^2g: complex structure and homomorphism lattices.

A homomorphism between tori is a pair (M, R), M a complex g x g matrix and R
an integral 2g x 2g matrix, with ``M Pi_1 = Pi_2 R``. We search for R only:
writing ``P = [Pi; conj(Pi)]``, the condition becomes ``Pi_2 R W = 0`` where
W is the right half of ``P_1^{-1}``, a linear condition with complex
coefficients on the 4g^2 integer entries of R.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction

import flint
import mpmath

from . import exact_linalg as xl

log = logging.getLogger(__name__)


class TorusError(ValueError):
    pass


@dataclass
class PeriodMatrix:
    entries: mpmath.matrix
    precision_digits: int = xl.DEFAULT_PREC
    label: str | None = None
    hyperelliptic: bool | None = None

    def __post_init__(self):
        if not isinstance(self.entries, mpmath.matrix):
            with mpmath.workdps(self.precision_digits + 10):
                self.entries = mpmath.matrix(self.entries)
        if self.entries.cols != 2 * self.entries.rows:
            raise TorusError(f"period matrix must be g x 2g, got {self.entries.rows} x {self.entries.cols}")
        if self.precision_digits < 30:
            raise TorusError("precision must be at least 30 digits")

    @property
    def g(self) -> int:
        return self.entries.rows

    def stacked(self):
        """The 2g x 2g matrix ``[Pi; conj(Pi)]``."""
        g = self.g
        P = mpmath.matrix(2 * g, 2 * g)
        for i in range(g):
            for k in range(2 * g):
                P[i, k] = self.entries[i, k]
                P[i + g, k] = mpmath.conj(self.entries[i, k])
        return P

    def stacked_inverse(self):
        with mpmath.workdps(self.precision_digits + 10):
            P = self.stacked()
            if abs(mpmath.det(P)) < mpmath.mpf(10) ** (-self.precision_digits // 2):
                raise TorusError("columns of the period matrix are not R-linearly independent")
            return P ** -1

    def times_integer(self, C):
        """``Pi C`` for an integer 2g x k matrix C."""
        with mpmath.workdps(self.precision_digits + 10):
            return self.entries * mpmath.matrix(C)

    def __repr__(self):
        return f"PeriodMatrix(g={self.g}, prec={self.precision_digits}, label={self.label!r})"


def elliptic(tau, prec=xl.DEFAULT_PREC, label=None) -> PeriodMatrix:
    with mpmath.workdps(prec + 10):
        return PeriodMatrix(mpmath.matrix([[1, mpmath.mpmathify(tau)]]), prec, label or f"(1,{tau})")


def block_diagonal(*pms: PeriodMatrix, label=None) -> PeriodMatrix:
    """Period matrix of a product of tori (homology basis = concatenation of the factors' bases)."""
    prec = min(p.precision_digits for p in pms)
    g = sum(p.g for p in pms)
    with mpmath.workdps(prec + 10):
        M = mpmath.matrix(g, 2 * g)
        r = 0
        for p in pms:
            for i in range(p.g):
                for k in range(p.g):
                    M[r + i, r + k] = p.entries[i, k]
                    M[r + i, g + r + k] = p.entries[i, p.g + k]
            r += p.g
    # columns ordered (first halves of all factors, then second halves) so that
    # product of standard forms is the standard form again
    return PeriodMatrix(M, prec, label)


# -- complex structure -------------------------------------------------------

@dataclass
class ComplexStructure:
    """Multiplication by i on the lattice, ``Pi J = i Pi``.

    ``J`` is the real matrix at working precision. ``exact`` holds a rational
    form when the entries are recognisably rational (denominators below
    10^12); for many cyclic covers they are not (Klein's quartic has entries
    in Q(sqrt 7)), in which case ``exact`` is None.
    """
    J: mpmath.matrix
    residual: mpmath.mpf
    precision_digits: int
    exact: list | None = None

    @property
    def n(self):
        return self.J.rows

    def as_float(self):
        import numpy as np
        return np.array([[float(self.J[i, j]) for j in range(self.n)] for i in range(self.n)])


def complex_structure(pm: PeriodMatrix, strict: bool = False) -> ComplexStructure:
    g, prec = pm.g, pm.precision_digits
    with mpmath.workdps(prec + 10):
        P = pm.stacked()
        rhs = mpmath.matrix(2 * g, 2 * g)
        for i in range(g):
            for k in range(2 * g):
                rhs[i, k] = 1j * pm.entries[i, k]
                rhs[i + g, k] = -1j * mpmath.conj(pm.entries[i, k])
        Jc = pm.stacked_inverse() * rhs
        imag = max(abs(mpmath.im(x)) for x in Jc)
        J = mpmath.matrix(2 * g, 2 * g)
        for i in range(2 * g):
            for j in range(2 * g):
                J[i, j] = mpmath.re(Jc[i, j])
        resid = mpmath.mnorm(pm.entries * J - 1j * pm.entries, "inf")
        tol = mpmath.mpf(10) ** (-(prec // 2))
        if imag > tol or resid > tol:
            raise TorusError("complex structure does not converge; increase the precision")
        exact = None
        try:
            exact = [[xl.to_rational(J[i, j]) for j in range(2 * g)] for i in range(2 * g)]
            sq = xl.matmul(exact, exact)
            if sq != [[-int(i == j) for j in range(2 * g)] for i in range(2 * g)]:
                exact = None
        except xl.LinalgError:
            if strict:
                raise
    return ComplexStructure(J, resid, prec, exact)


# -- homomorphisms -----------------------------------------------------------

@dataclass
class HomBasis:
    source: PeriodMatrix
    target: PeriodMatrix
    rational_reps: list = field(default_factory=list)
    tangent_reps: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    scale: int = 0

    @property
    def rank(self):
        return len(self.rational_reps)

    def combine(self, coeffs):
        """``sum c_i R_i`` as an integer matrix."""
        n = 2 * self.source.g
        out = [[0] * n for _ in range(n)]
        for c, R in zip(coeffs, self.rational_reps):
            if c:
                for i in range(n):
                    Ri, oi = R[i], out[i]
                    for j in range(n):
                        oi[j] += c * Ri[j]
        return out


def tangent_of(R, pm1: PeriodMatrix, pm2: PeriodMatrix, Pinv=None):
    """Analytic representation M with ``M Pi_1 = Pi_2 R`` (least-squares via the stacked inverse)."""
    g = pm1.g
    with mpmath.workdps(pm1.precision_digits + 10):
        if Pinv is None:
            Pinv = pm1.stacked_inverse()
        X = mpmath.matrix([[Pinv[i, j] for j in range(g)] for i in range(2 * g)])
        M = pm2.entries * mpmath.matrix(R) * X
        resid = mpmath.mnorm(M * pm1.entries - pm2.entries * mpmath.matrix(R), "inf")
    return M, resid


def hom_basis(pm1: PeriodMatrix, pm2: PeriodMatrix, scale: int | None = None) -> HomBasis:
    if pm1.g != pm2.g:
        return HomBasis(pm1, pm2)
    g = pm1.g
    n = 2 * g
    prec = min(pm1.precision_digits, pm2.precision_digits)
    if scale is None:
        scale = prec - 10
    with mpmath.workdps(prec + 10):
        Pinv = pm1.stacked_inverse()
        W = [[Pinv[l, g + j] for j in range(g)] for l in range(n)]
        Pi2 = pm2.entries
        # column (i, j) of the constraint: coefficient of R[k][l] is Pi2[i,k] W[l][j]
        cols = [[Pi2[i, k] * W[l][j] for k in range(n) for l in range(n)]
                for i in range(g) for j in range(g)]
        vecs = xl.integer_kernel(cols, prec=prec, scale=scale)
        hb = HomBasis(pm1, pm2, scale=scale)
        tol = mpmath.mpf(10) ** (-(scale // 2))
        for v in vecs:
            R = [v[r * n:(r + 1) * n] for r in range(n)]
            M, res = tangent_of(R, pm1, pm2, Pinv)
            if res >= tol:
                raise TorusError(f"homomorphism residual {mpmath.nstr(res, 5)} above tolerance")
            hb.rational_reps.append(R)
            hb.tangent_reps.append(M)
            hb.residuals.append(res)
    log.debug("hom lattice %s -> %s: rank %d", pm1.label, pm2.label, hb.rank)
    return hb


@dataclass
class ClosureReport:
    rank: int
    contains_identity: bool
    table: list            # table[i][j] = coefficients of R_i R_j
    max_tangent_residual: mpmath.mpf


class _Decomposer:
    """Exact coordinates of integer matrices in the span of a list of integer matrices."""

    def __init__(self, mats):
        self.rows = [[x for row in R for x in row] for R in mats]
        r = len(self.rows)
        A = flint.fmpz_mat(self.rows)
        rref, _, rank = A.rref()
        if rank != r:
            raise TorusError("basis matrices are linearly dependent")
        piv = []
        for i in range(r):
            piv.append(next(j for j in range(A.ncols()) if rref[i, j] != 0))
        self.piv = piv
        sub = flint.fmpq_mat([[self.rows[i][j] for j in piv] for i in range(r)])
        self.inv = sub.inv()

    def coords(self, R):
        v = [x for row in R for x in row]
        sv = flint.fmpq_mat([[v[j] for j in self.piv]])
        c = (sv * self.inv).tolist()[0]
        c = [Fraction(int(x.p), int(x.q)) for x in c]
        back = [sum(ci * row[j] for ci, row in zip(c, self.rows)) for j in range(len(v))]
        if back != v:
            return None
        return c


def end_ring_check(hb: HomBasis) -> ClosureReport:
    if hb.source is not hb.target and hb.source.g != hb.target.g:
        raise TorusError("closure check needs an endomorphism basis")
    if hb.rank == 0:
        raise TorusError("empty endomorphism basis; increase the precision")
    n = 2 * hb.source.g
    dec = _Decomposer(hb.rational_reps)
    ident = dec.coords(xl.identity(n))
    has_id = ident is not None and all(c.denominator == 1 for c in ident)
    table = []
    worst = mpmath.mpf(0)
    with mpmath.workdps(hb.source.precision_digits + 10):
        for Ri, Mi in zip(hb.rational_reps, hb.tangent_reps):
            row = []
            for Rj, Mj in zip(hb.rational_reps, hb.tangent_reps):
                c = dec.coords(xl.matmul(Ri, Rj))
                if c is None or any(x.denominator != 1 for x in c):
                    raise TorusError("endomorphism basis is not closed under products; "
                                     "increase the precision")
                c = [int(x) for x in c]
                Mp = Mi * Mj
                for ck, Mk in zip(c, hb.tangent_reps):
                    if ck:
                        Mp -= ck * Mk
                worst = max(worst, mpmath.mnorm(Mp, "inf"))
                row.append(c)
            table.append(row)
    tol = mpmath.mpf(10) ** (-(hb.scale // 4))
    if worst > tol:
        raise TorusError(f"tangent products disagree ({mpmath.nstr(worst, 5)}); increase the precision")
    return ClosureReport(hb.rank, has_id, table, worst)
