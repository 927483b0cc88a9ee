"""Cyclic branched covers d(d_1, ..., d_n) of the n-punctured sphere.

A cover is given by its degree ``d`` and branching indices ``d_i``. From that
data alone we get the genus, the multipliers (which index a basis of
holomorphic 1-forms when n = 3), the divisors of those forms, the Weierstrass
weights at the branch preimages and, for n = 3, a period matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd

import mpmath

from .torus import PeriodMatrix


class CoverError(ValueError):
    """Invalid branching data or an operation outside the supported range."""


@dataclass(frozen=True)
class BranchingData:
    d: int
    indices: tuple

    @property
    def n(self) -> int:
        return len(self.indices)

    @property
    def connected(self) -> bool:
        """False when d and all indices share a factor: the cover then splits into copies."""
        return gcd(self.d, *self.indices) == 1

    def __str__(self):
        return f"{self.d}({','.join(map(str, self.indices))})"


@dataclass
class DivisorTerm:
    branch: int      # 0-based branch point index
    preimages: int   # number of points over the branch point
    order: int       # vanishing order at each of them

    def as_tuple(self):
        return (self.branch, self.preimages, self.order)


@dataclass
class BranchWeight:
    branch: int
    preimages: int
    orders: tuple    # vanishing orders of a basis adapted to the point
    weight: int      # weight at each single preimage


@dataclass
class CoverAnalysis:
    data: BranchingData
    genus: int
    multipliers: list
    divisors: dict = field(default_factory=dict)
    branch_weights: list = field(default_factory=list)
    residual_weight: int = 0
    tiles: int | None = None


def validate(d, indices) -> BranchingData:
    d = int(d)
    indices = tuple(int(x) for x in indices)
    if d < 2:
        raise CoverError(f"degree must be at least 2, got {d}")
    if len(indices) < 3:
        raise CoverError("need at least three branch points")
    bad = [x for x in indices if not 1 <= x <= d - 1]
    if bad:
        raise CoverError(f"branching indices must lie in [1, {d - 1}], got {bad}")
    r = sum(indices) % d
    if r:
        raise CoverError(f"not closed: sum of indices is {r} mod {d}, must be 0")
    b = BranchingData(d, indices)
    if not b.connected:
        raise CoverError(f"{b} is disconnected: d and the indices share the factor {gcd(d, *indices)}")
    return b


def genus(b: BranchingData) -> int:
    # Riemann-Hurwitz: 2 - 2g = d(2 - n) + sum gcd(d, d_i)
    twice = b.d * (b.n - 2) + 2 - sum(gcd(b.d, x) for x in b.indices)
    assert twice % 2 == 0
    return twice // 2


def _angles(b, a):
    return [a * x % b.d for x in b.indices]


def is_admissible(b: BranchingData, a: int) -> bool:
    """Whether ``a`` defines an admissible cone metric: all scaled indices positive with sum d(n-2)."""
    if not 1 <= a <= b.d - 1:
        return False
    angles = _angles(b, a)
    return all(angles) and sum(angles) == b.d * (b.n - 2)


def multipliers(b: BranchingData) -> list:
    if b.n != 3:
        raise CoverError(f"multipliers are only implemented for three branch points, got n={b.n}")
    return [a for a in range(1, b.d) if is_admissible(b, a)]


def form_divisor(b: BranchingData, a: int) -> list:
    """Divisor of the 1-form attached to the multiplier ``a``.

    The form vanishes to order ``(a d_i mod d)/gcd(d, d_i) - 1`` at each of the
    ``gcd(d, d_i)`` points over the i-th branch point. Admissible multipliers
    for n >= 4 are accepted too (the matrix for those covers comes from
    elsewhere, but the divisor formula is the same).
    """
    if not is_admissible(b, a):
        raise CoverError(f"{a} is not a multiplier of {b}")
    out = []
    for i, (x, ax) in enumerate(zip(b.indices, _angles(b, a))):
        k = gcd(b.d, x)
        out.append(DivisorTerm(i, k, ax // k - 1))
    return out


def divisor_degree(terms) -> int:
    return sum(t.preimages * t.order for t in terms)


def branch_weights(b: BranchingData):
    """Weierstrass weights at the branch preimages, plus the weight left for other points.

    Near a point over branch point i the deck group acts on a local parameter
    through a character of order ``e = d / gcd(d, d_i)``. Forms whose
    multipliers agree mod ``e`` lie in the same eigenspace, so only one of
    them keeps the leading order m; suitable combinations of the others
    vanish to orders ``m + e, m + 2e, ...``. The weight is the sum of the
    sorted orders minus ``0 + 1 + ... + (g-1)``.
    """
    g = genus(b)
    if g == 0:
        return [], 0
    mults = multipliers(b)
    weights = []
    total = 0
    for i, x in enumerate(b.indices):
        k = gcd(b.d, x)
        e = b.d // k
        classes = {}
        for a in mults:
            m = (a * x % b.d) // k - 1
            classes.setdefault(m, []).append(a)
        orders = sorted(m + j * e for m, members in classes.items() for j in range(len(members)))
        w = sum(o - j for j, o in enumerate(orders))
        weights.append(BranchWeight(i, k, tuple(orders), w))
        total += k * w
    residual = (g - 1) * g * (g + 1) - total
    return weights, residual


def base_tile_count(b: BranchingData) -> int:
    """Number of base triangles (n-gons) tiling the flat-metric surface.

    Comes from comparing areas: ``4 pi (g-1) = N ((n-2) pi - 2 pi n / d)``.
    """
    g = genus(b)
    if g <= 1:
        raise CoverError("tile count needs genus at least 2")
    num = 4 * (g - 1) * b.d
    den = (b.n - 2) * b.d - 2 * b.n
    if den <= 0 or num % den:
        raise CoverError(f"{b} has no base tessellation (4(g-1)d / ((n-2)d - 2n) = {num}/{den})")
    return num // den


def period_matrix(b: BranchingData, prec: int = 100, label: str | None = None,
                  hyperelliptic: bool | None = None) -> PeriodMatrix:
    """Period matrix with rows ``zeta_d^(a k)``, a over the sorted multipliers, k = 0..2g-1."""
    if b.n != 3:
        raise CoverError("period matrices are synthesized only for three branch points")
    mults = multipliers(b)
    g = len(mults)
    if g < 1:
        raise CoverError(f"{b} has genus 0")
    with mpmath.workdps(prec + 10):
        roots = [mpmath.expjpi(mpmath.mpf(2 * j) / b.d) for j in range(b.d)]
        entries = mpmath.matrix(g, 2 * g)
        for m, a in enumerate(mults):
            for k in range(2 * g):
                entries[m, k] = roots[a * k % b.d]
    return PeriodMatrix(entries, prec, label or str(b), hyperelliptic)


def analyze(b: BranchingData) -> CoverAnalysis:
    g = genus(b)
    rep = CoverAnalysis(b, g, [])
    if b.n == 3:
        rep.multipliers = multipliers(b)
        rep.divisors = {a: form_divisor(b, a) for a in rep.multipliers}
        rep.branch_weights, rep.residual_weight = branch_weights(b)
    else:
        rep.multipliers = [a for a in range(1, b.d) if is_admissible(b, a)]
        rep.divisors = {a: form_divisor(b, a) for a in rep.multipliers}
    try:
        rep.tiles = base_tile_count(b)
    except CoverError:
        rep.tiles = None
    return rep
