import random

import mpmath
import pytest

from jacaut import catalog as cat
from jacaut import exact_linalg as xl
from jacaut import polarization as pz
from jacaut import torus

J2 = [[0, 1], [-1, 0]]


def generic_tau():
    with mpmath.workdps(120):
        return mpmath.mpc(mpmath.e / 3, mpmath.pi / 2)


def setup(pm):
    return pm, torus.complex_structure(pm)


def same_lattice(A, B):
    fa = [[x for r in E for x in r] for E in A]
    fb = [[x for r in E for x in r] for E in B]
    ha = [r for r in xl.hnf(fa)[0] if any(r)]
    hb = [r for r in xl.hnf(fb)[0] if any(r)]
    return ha == hb


def test_standard_form():
    assert pz.standard_form((1,)) == J2
    assert pz.standard_form((1, 2)) == [[0, 0, 1, 0], [0, 0, 0, 2], [-1, 0, 0, 0], [0, -2, 0, 0]]


def test_elliptic_compat_basis():
    for tau in ("1j", "0.3+1.7j"):
        pm, cs = setup(torus.elliptic(tau))
        for method in ("exact", "lll"):
            basis = pz.compat_basis(pm, cs, method)
            assert len(basis) == 1 and basis[0] in (J2, xl.scale(-1, J2))


def test_exact_route_needs_rational_structure():
    pm, cs = setup(cat.get("klein").period_matrix(60))
    with pytest.raises(pz.PolarizationError):
        pz.compat_basis(pm, cs, "exact")


def test_positivity_examples():
    pm, cs = setup(torus.elliptic("1j"))
    assert pz.is_positive(J2, cs)
    assert not pz.is_positive(xl.scale(-1, J2), cs)
    prod = torus.block_diagonal(torus.elliptic("1j"), torus.elliptic("1j"))
    csp = torus.complex_structure(prod)
    assert pz.is_positive(pz.standard_form((1, 1)), csp)
    assert not pz.is_positive(pz.standard_form((1, -1)), csp)


def test_positivity_irrational_structure():
    pm, cs = setup(torus.block_diagonal(torus.elliptic("1j"), torus.elliptic(generic_tau())))
    assert cs.exact is None
    assert pz.is_positive(pz.standard_form((1, 1)), cs)
    assert not pz.is_positive(pz.standard_form((1, -1)), cs)


def test_incompatible_form_is_an_error():
    pm, cs = setup(torus.block_diagonal(torus.elliptic("1j"), torus.elliptic("2j")))
    E = [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]]
    assert not pz.is_compatible(E, cs)
    with pytest.raises(pz.PolarizationError):
        pz.is_positive(E, cs)


def test_product_of_non_isogenous_curves():
    pm, cs = setup(torus.block_diagonal(torus.elliptic("1j"), torus.elliptic(generic_tau())))
    basis = pz.compat_basis(pm, cs)
    assert len(basis) == 2
    assert same_lattice(basis, [pz.standard_form((1, 0)), pz.standard_form((0, 1))])


def test_product_with_cm_factor_has_larger_ns():
    # (3 + 17i)/10 lies in Q(i), so the two factors are isogenous and there are cross pairings
    pm, cs = setup(torus.block_diagonal(torus.elliptic("1j"), torus.elliptic("0.3+1.7j")))
    assert len(pz.compat_basis(pm, cs, "exact")) == len(pz.compat_basis(pm, cs, "lll")) == 4


@pytest.mark.parametrize("key", ["fermat", "12156"])
def test_exact_and_lattice_routes_agree(key):
    pm, cs = setup(cat.get(key).period_matrix(100))
    assert cs.exact is not None
    exact = pz.compat_basis(pm, cs, "exact")
    lll = pz.compat_basis(pm, cs, "lll")
    assert same_lattice(exact, lll)
    for E in exact:
        assert pz.is_compatible(E, cs)


def test_klein_basis_is_stable():
    lo = cat.get("klein").period_matrix(60)
    hi = cat.get("klein").period_matrix(100)
    b_lo = pz.compat_basis(lo, torus.complex_structure(lo))
    b_hi = pz.compat_basis(hi, torus.complex_structure(hi))
    assert same_lattice(b_lo, b_hi)
    cs = torus.complex_structure(hi)
    assert all(pz.compat_residual(E, cs) < mpmath.mpf(10) ** -80 for E in b_hi)


def test_cull_elliptic():
    pm, cs = setup(torus.elliptic("1j"))
    pols = pz.cull_pb([J2], cs, budget=2)
    assert [p.E for p in pols] == [J2]
    assert pols[0].principal and pols[0].positive


def test_cull_limit():
    pm, cs = setup(torus.elliptic("1j"))
    with pytest.raises(pz.PolarizationError):
        pz.cull_pb([J2], cs, budget=2, limit=3)
    with pytest.raises(pz.PolarizationError):
        pz.cull_pb([], cs)


def test_cull_finds_nothing_at_budget_zero():
    pm, cs = setup(torus.elliptic("1j"))
    assert pz.cull_pb([J2], cs, budget=0) == []


def test_cull_results_are_principal():
    pm, cs = setup(cat.get("8134").period_matrix(60))
    pols = pz.cull_pb(pz.compat_basis(pm, cs), cs, budget=2)
    assert len(pols) == 10
    for p in pols:
        assert xl.pfaffian(p.E) in (1, -1)
        assert pz.is_positive(p.E, cs) and p.principal
        assert pz.check_frobenius(p.E, p.frobenius_transform, (1, 1))
    assert len({p.key() for p in pols}) == len(pols)


def test_frobenius_examples():
    assert pz.frobenius_form(pz.standard_form((1, 1))) == (xl.identity(4), [1, 1])
    C, D = pz.frobenius_form([[0, 2], [-2, 0]])
    assert D == [2]
    C, D = pz.frobenius_form([[0, 2, 0, 0], [-2, 0, 0, 0], [0, 0, 0, 3], [0, 0, -3, 0]])
    assert D == [1, 6]
    assert pz.check_frobenius([[0, 2, 0, 0], [-2, 0, 0, 0], [0, 0, 0, 3], [0, 0, -3, 0]], C, D)


def test_frobenius_errors():
    with pytest.raises(pz.PolarizationError):
        pz.frobenius_form([[0, 1], [1, 0]])
    with pytest.raises(pz.PolarizationError):
        pz.frobenius_form([[0, 0], [0, 0]])


def test_frobenius_random_forms():
    rng = random.Random(2)
    for _ in range(30):
        g = rng.randint(1, 3)
        n = 2 * g
        E = xl.zeros(n, n)
        for i in range(n):
            for j in range(i + 1, n):
                E[i][j] = rng.randint(-4, 4)
                E[j][i] = -E[i][j]
        if xl.det(E) == 0:
            continue
        C, D = pz.frobenius_form(E)
        assert pz.check_frobenius(E, C, D)
        assert all(b % a == 0 for a, b in zip(D, D[1:]))
        prod = 1
        for d in D:
            prod *= d
        assert abs(xl.pfaffian(E)) == prod


def test_from_intersection():
    pm, cs = setup(torus.elliptic("1j"))
    assert pz.from_intersection(J2, pm, cs).E == J2
    assert pz.from_intersection(xl.scale(-1, J2), pm, cs).E == J2
    with pytest.raises(pz.PolarizationError):
        pz.from_intersection(xl.scale(2, J2), pm, cs)


def test_from_intersection_klein():
    pm = cat.get("klein").period_matrix(60)
    cs = torus.complex_structure(pm)
    pol = pz.from_intersection(cat.KLEIN_INTERSECTION, pm, cs)
    assert pol.principal
    assert pz.riemann_check(pm, pol).ok(1e-40)


def test_riemann_elliptic():
    pm, cs = setup(torus.elliptic("0.3+1.7j"))
    pol = pz.make_polarization(J2, cs)
    rc = pz.riemann_check(pm, pol)
    assert rc.positive and rc.symmetric_residual < 1e-80
    bad = pz.Polarization(xl.scale(-1, J2), False, False, [[0, 1], [1, 0]])
    assert not pz.riemann_check(pm, bad).positive
