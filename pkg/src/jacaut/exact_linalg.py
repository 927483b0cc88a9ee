"""Exact integer/rational matrix kernels and the high-precision bridge to them.

Integer matrices are plain row-major lists of Python ints, rational ones
lists of :class:`fractions.Fraction`. Complex high-precision data lives in
:class:`mpmath.matrix` objects; callers pick the working precision with
``mpmath.workdps``.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd, isqrt, lcm

import flint
import mpmath

DEFAULT_PREC = 100
DEFAULT_DELTA = Fraction(99, 100)
RECON_DENOMINATOR = 10**12


class LinalgError(ValueError):
    pass


# -- basic helpers -----------------------------------------------------------

def identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def zeros(r, c):
    return [[0] * c for _ in range(r)]


def transpose(A):
    return [list(row) for row in zip(*A)]


def matmul(A, B):
    Bt = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def matvec(A, v):
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def vecmat(v, A):
    return [sum(x * A[i][j] for i, x in enumerate(v)) for j in range(len(A[0]))]


def scale(c, A):
    return [[c * x for x in row] for row in A]


def add(A, B):
    return [[x + y for x, y in zip(r, s)] for r, s in zip(A, B)]


def as_tuple(A):
    return tuple(tuple(row) for row in A)


def is_skew(E):
    n = len(E)
    return all(len(row) == n for row in E) and all(
        E[i][j] == -E[j][i] for i in range(n) for j in range(n))


def det(M):
    """Exact determinant (Bareiss elimination for ints, Gauss for rationals)."""
    n = len(M)
    if n == 0:
        return 1
    if any(isinstance(x, Fraction) for row in M for x in row):
        A = [[Fraction(x) for x in row] for row in M]
        sign, result = 1, Fraction(1)
        for k in range(n):
            p = next((i for i in range(k, n) if A[i][k] != 0), None)
            if p is None:
                return Fraction(0)
            if p != k:
                A[k], A[p] = A[p], A[k]
                sign = -sign
            result *= A[k][k]
            for i in range(k + 1, n):
                f = A[i][k] / A[k][k]
                if f:
                    A[i] = [a - f * b for a, b in zip(A[i], A[k])]
        return sign * result
    A = [list(map(int, row)) for row in M]
    sign, prev = 1, 1
    for k in range(n - 1):
        if A[k][k] == 0:
            p = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if p is None:
                return 0
            A[k], A[p] = A[p], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def inverse_unimodular(U):
    """Integer inverse of a matrix with determinant +-1."""
    inv = flint.fmpz_mat(U).inv()
    out = [[Fraction(int(x.p), int(x.q)) for x in row] for row in inv.tolist()]
    if any(x.denominator != 1 for row in out for x in row):
        raise LinalgError("matrix is not unimodular")
    return [[int(x) for x in row] for row in out]


# -- normal forms ------------------------------------------------------------

def _xgcd(a, b):
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a - (a // b) * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0


def hnf(M):
    """Row Hermite normal form. Returns ``(H, U)`` with ``U M = H``, U unimodular.

    H is in row echelon form with positive pivots, entries above each pivot
    reduced into ``[0, pivot)`` and zero rows at the bottom.
    """
    if not M or not M[0]:
        raise LinalgError("hnf of an empty matrix")
    m, n = len(M), len(M[0])
    H = [list(map(int, row)) for row in M]
    U = identity(m)
    r = 0
    for c in range(n):
        if r == m:
            break
        rows = [i for i in range(r, m) if H[i][c] != 0]
        if not rows:
            continue
        # fold every nonzero entry of column c into row r
        for i in rows:
            if i == r:
                continue
            a, b = H[r][c], H[i][c]
            g, x, y = _xgcd(a, b)
            p, q = a // g, b // g
            H[r], H[i] = ([x * u + y * v for u, v in zip(H[r], H[i])],
                          [p * v - q * u for u, v in zip(H[r], H[i])])
            U[r], U[i] = ([x * u + y * v for u, v in zip(U[r], U[i])],
                          [p * v - q * u for u, v in zip(U[r], U[i])])
        if H[r][c] == 0:
            # happens only when the first nonzero row got swapped out
            k = next(i for i in range(r, m) if H[i][c] != 0)
            H[r], H[k] = H[k], H[r]
            U[r], U[k] = U[k], U[r]
        if H[r][c] < 0:
            H[r] = [-x for x in H[r]]
            U[r] = [-x for x in U[r]]
        piv = H[r][c]
        for i in range(r):
            q = H[i][c] // piv
            if q:
                H[i] = [u - q * v for u, v in zip(H[i], H[r])]
                U[i] = [u - q * v for u, v in zip(U[i], U[r])]
        r += 1
    return H, U


def snf(M):
    """Smith normal form. Returns ``(D, U, V)`` with ``U M V = D``.

    D is diagonal with nonnegative entries d1 | d2 | ...; U, V unimodular.
    """
    if not M or not M[0]:
        raise LinalgError("snf of an empty matrix")
    m, n = len(M), len(M[0])
    D = [list(map(int, row)) for row in M]
    U, V = identity(m), identity(n)

    def row_op(i, j, q):  # row i -= q * row j
        D[i] = [a - q * b for a, b in zip(D[i], D[j])]
        U[i] = [a - q * b for a, b in zip(U[i], U[j])]

    def col_op(i, j, q):  # col i -= q * col j
        for row in D:
            row[i] -= q * row[j]
        for row in V:
            row[i] -= q * row[j]

    def swap_rows(i, j):
        D[i], D[j] = D[j], D[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in D:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    for t in range(min(m, n)):
        while True:
            nz = [(abs(D[i][j]), i, j) for i in range(t, m) for j in range(t, n) if D[i][j]]
            if not nz:
                break
            _, i, j = min(nz)
            swap_rows(t, i)
            swap_cols(t, j)
            p = D[t][t]
            done = True
            for i in range(t + 1, m):
                if D[i][t]:
                    row_op(i, t, D[i][t] // p)
                    done = done and D[i][t] == 0
            for j in range(t + 1, n):
                if D[t][j]:
                    col_op(j, t, D[t][j] // p)
                    done = done and D[t][j] == 0
            if not done:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if D[i][j] % p), None)
            if bad is None:
                break
            # pull a non-divisible entry into row t; the next pass shrinks the pivot
            D[t] = [a + b for a, b in zip(D[t], D[bad[0]])]
            U[t] = [a + b for a, b in zip(U[t], U[bad[0]])]
        if t < m and t < n and D[t][t] < 0:
            D[t] = [-x for x in D[t]]
            U[t] = [-x for x in U[t]]
    return D, U, V


def integer_left_kernel(C):
    """Z-basis of ``{v in Z^m : v C = 0}`` for an integer or rational m x k matrix C.

    The basis is saturated (it spans the kernel over Q intersected with Z^m)
    and LLL-reduced.
    """
    m = len(C)
    if m == 0:
        return []
    if not C[0]:
        return identity(m)
    den = 1
    for row in C:
        for x in row:
            den = lcm(den, Fraction(x).denominator)
    Ci = [[int(Fraction(x) * den) for x in row] for row in C]
    H, U = hnf(Ci)
    kern = [U[i] for i in range(m) if not any(H[i])]
    return lll(kern) if kern else []


# -- lattice reduction -------------------------------------------------------

def lll(B, delta=DEFAULT_DELTA):
    """delta-LLL reduced basis of the lattice spanned by the rows of B.

    Rational input is scaled to integers and back. Linearly dependent rows
    reduce to zero and are dropped, so the result is a basis of the span.
    """
    if not B:
        return []
    den = 1
    for row in B:
        for x in row:
            den = lcm(den, Fraction(x).denominator)
    Bi = flint.fmpz_mat([[int(Fraction(x) * den) for x in row] for row in B])
    R = Bi.lll(delta=float(delta))
    rows = [[int(x) for x in row] for row in R.tolist()]
    rows = [row for row in rows if any(row)]
    if den == 1:
        return rows
    return [[Fraction(x, den) for x in row] for row in rows]


def gram_lll(G, delta=DEFAULT_DELTA):
    """LLL on a positive-definite integer Gram matrix. Returns ``(G', T)`` with G' = T G T^t."""
    Gf = flint.fmpz_mat([list(map(int, row)) for row in G])
    R, T = Gf.lll(transform=True, rep="gram", delta=float(delta))
    return ([[int(x) for x in row] for row in R.tolist()],
            [[int(x) for x in row] for row in T.tolist()])


def gram_schmidt(B):
    """Exact Gram-Schmidt data: squared norms ``b*_i . b*_i`` and coefficients mu."""
    n = len(B)
    Bs = []
    mu = [[Fraction(0)] * n for _ in range(n)]
    norms = []
    for i in range(n):
        v = [Fraction(x) for x in B[i]]
        for j in range(i):
            mu[i][j] = sum(Fraction(a) * b for a, b in zip(B[i], Bs[j])) / norms[j]
            v = [a - mu[i][j] * b for a, b in zip(v, Bs[j])]
        Bs.append(v)
        norms.append(sum(a * a for a in v))
    return norms, mu


def is_lll_reduced(B, delta=DEFAULT_DELTA, eta=Fraction(51, 100)):
    """Exact check of size reduction (``|mu| <= eta``) and the Lovasz condition.

    The default eta is the slack that floating-point LLL implementations use.
    """
    norms, mu = gram_schmidt(B)
    n = len(B)
    for i in range(n):
        for j in range(i):
            if abs(mu[i][j]) > eta:
                return False
    for k in range(1, n):
        if norms[k] < (Fraction(delta) - mu[k][k - 1] ** 2) * norms[k - 1]:
            return False
    return True


# -- numerical to exact bridge ----------------------------------------------

def _as_columns(A):
    if isinstance(A, mpmath.matrix):
        return [[A[i, j] for i in range(A.rows)] for j in range(A.cols)]
    return [list(col) for col in A]


def integer_kernel(A, prec=DEFAULT_PREC, scale=None):
    """Integer row vectors v with ``v A`` numerically zero.

    ``A`` is an n x m complex matrix (an ``mpmath.matrix`` or a list of m
    columns of length n). Real and imaginary parts of every column are scaled
    by ``10**scale``, rounded, and appended to an identity block; LLL then
    exposes the short relations. A candidate is kept when its height is below
    ``10**(scale/4)`` and its unscaled residual ``||v A||_inf`` is below
    ``10**(-scale/2)``. The height bound rejects spurious approximations to
    irrational kernel directions, which balance height against residual near
    ``10**(scale/2)``.
    """
    if prec < 30:
        raise LinalgError("precision must be at least 30 digits")
    if scale is None:
        scale = prec - 10
    cols = _as_columns(A)
    if not cols:
        raise LinalgError("integer_kernel needs at least one column")
    n = len(cols[0])
    with mpmath.workdps(prec):
        S = mpmath.mpf(10) ** scale
        blocks = []
        for c in cols:
            re = [int(mpmath.nint(S * mpmath.re(x))) for x in c]
            im = [int(mpmath.nint(S * mpmath.im(x))) for x in c]
            for part in (re, im):
                if any(part):
                    blocks.append(part)
        rows = [[int(i == j) for j in range(n)] + [b[i] for b in blocks] for i in range(n)]
        reduced = flint.fmpz_mat(rows).lll() if blocks else flint.fmpz_mat(rows)
        height_cap = 10 ** (scale // 4)
        tol = mpmath.mpf(10) ** (-(scale // 2))
        found = []
        for row in reduced.tolist():
            v = [int(x) for x in row[:n]]
            if not any(v) or max(map(abs, v)) >= height_cap:
                continue
            if kernel_residual(v, cols) < tol:
                found.append(v)
    return lll(found) if found else []


def kernel_residual(v, cols):
    """``max_j |sum_i v_i A_ij|`` at the current mpmath precision."""
    return max((abs(mpmath.fsum(x * y for x, y in zip(v, c) if x)) for c in cols),
               default=mpmath.mpf(0))


def to_rational(x, max_den=RECON_DENOMINATOR, tol=None):
    """Continued-fraction reconstruction of a real mpmath number.

    Raises LinalgError when the best approximation with denominator below
    ``max_den`` misses ``x`` by more than ``tol`` (default ``10**(-dps/2)``).
    """
    x = mpmath.mpf(x)
    if tol is None:
        tol = mpmath.mpf(10) ** (-(mpmath.mp.dps // 2))
    man, exp = mpmath.frexp(x)
    exact = Fraction(int(mpmath.ldexp(man, mpmath.mp.prec)), 1) * Fraction(2) ** (int(exp) - mpmath.mp.prec)
    q = exact.limit_denominator(max_den)
    if abs(x - mpmath.mpf(q.numerator) / q.denominator) > tol:
        raise LinalgError(f"no rational with denominator <= {max_den} matches {mpmath.nstr(x, 20)}; "
                          "increase the precision")
    return q


# -- Pfaffian ----------------------------------------------------------------

def _pf_expand(E, idx):
    if not idx:
        return 1
    i0, rest = idx[0], idx[1:]
    total = 0
    for k, j in enumerate(rest):
        a = E[i0][j]
        if a:
            total += (-1) ** k * a * _pf_expand(E, rest[:k] + rest[k + 1:])
    return total


def pfaffian(E):
    """Pfaffian of a skew-symmetric integer (or rational) matrix; ``Pf(E)**2 == det(E)``."""
    n = len(E)
    if n % 2:
        raise LinalgError("Pfaffian needs an even dimension")
    if not is_skew(E):
        raise LinalgError("Pfaffian needs a skew-symmetric matrix")
    if n <= 8:
        return _pf_expand(E, tuple(range(n)))
    A = [[Fraction(x) for x in row] for row in E]
    result = Fraction(1)
    for k in range(0, n, 2):
        piv = next((j for j in range(k + 1, n) if A[k][j] != 0), None)
        if piv is None:
            return 0
        if piv != k + 1:
            A[k + 1], A[piv] = A[piv], A[k + 1]
            for row in A:
                row[k + 1], row[piv] = row[piv], row[k + 1]
            result = -result
        p = A[k][k + 1]
        result *= p
        for i in range(k + 2, n):
            a, b = A[i][k], A[i][k + 1]
            if a or b:
                for j in range(k + 2, n):
                    A[i][j] += (a * A[k + 1][j] - b * A[k][j]) / p
    if result.denominator != 1:
        return result
    return int(result)


def pfaffian_terms(n):
    """Signed perfect matchings of ``range(n)``; Pf(E) = sum(sign * prod E[i][j])."""
    def rec(idx):
        if not idx:
            yield 1, ()
            return
        i0, rest = idx[0], idx[1:]
        for k, j in enumerate(rest):
            for s, m in rec(rest[:k] + rest[k + 1:]):
                yield (-1) ** k * s, ((i0, j),) + m
    return list(rec(tuple(range(n))))


# -- definiteness ------------------------------------------------------------

def ldl(Q):
    """Exact ``Q = L^t diag(d) L`` with L unit upper-triangular, or None if Q is not positive definite.

    Returns ``(mu, d)`` where ``Q(x) = sum_i d[i] * (x_i + sum_{j>i} mu[i][j] x_j)**2``.
    """
    n = len(Q)
    A = [[Fraction(x) for x in row] for row in Q]
    mu = [[Fraction(0)] * n for _ in range(n)]
    d = [Fraction(0)] * n
    for i in range(n):
        d[i] = A[i][i]
        if d[i] <= 0:
            return None
        for j in range(i + 1, n):
            mu[i][j] = A[i][j] / d[i]
        for j in range(i + 1, n):
            for k in range(j, n):
                A[j][k] -= mu[i][j] * A[i][k]
                A[k][j] = A[j][k]
    return mu, d


def is_positive_definite(Q):
    """Exact positive-definiteness test for symmetric rational/integer matrices."""
    return ldl(Q) is not None


def cholesky(Q):
    """Upper-triangular R with ``R^t R = Q`` at the working mpmath precision, or None.

    Accepts rational, integer or mpmath entries. None is returned when a pivot
    is not positive, which makes this the positive-definiteness test for
    matrices known only numerically.
    """
    n = len(Q) if not isinstance(Q, mpmath.matrix) else Q.rows
    get = (lambda i, j: Q[i, j]) if isinstance(Q, mpmath.matrix) else (lambda i, j: Q[i][j])

    def num(x):
        if isinstance(x, Fraction):
            return mpmath.mpf(x.numerator) / x.denominator
        return mpmath.mpf(x) if not isinstance(x, mpmath.mpc) else mpmath.re(x)

    R = mpmath.matrix(n, n)
    for i in range(n):
        s = num(get(i, i)) - mpmath.fsum(R[k, i] ** 2 for k in range(i))
        if s <= 0:
            return None
        R[i, i] = mpmath.sqrt(s)
        for j in range(i + 1, n):
            R[i, j] = (num(get(i, j)) - mpmath.fsum(R[k, i] * R[k, j] for k in range(i))) / R[i, i]
    return R


def minors(M, k):
    """All k x k minors of M (small matrices only); used by tests and diagnostics."""
    rows, cols = range(len(M)), range(len(M[0]))
    return [det([[M[i][j] for j in cj] for i in ri])
            for ri in combinations(rows, k) for cj in combinations(cols, k)]


def content(v):
    g = 0
    for x in v:
        g = gcd(g, int(x))
    return g


def exact_sqrt(n):
    r = isqrt(n)
    return r if r * r == n else None
