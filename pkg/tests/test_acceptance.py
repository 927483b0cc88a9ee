"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

The end-to-end runs are cached per module, so criterion 10 reuses the
reports of criteria 6 to 9.
"""

import json
import os
import random
import time

import mpmath
import numpy as np
import pytest

from conftest import record
from jacaut import catalog as cat
from jacaut import cli
from jacaut import cyclic_cover as cc
from jacaut import exact_linalg as xl
from jacaut import group_id as gid
from jacaut import pipeline as pl
from jacaut import polarization as pz
from jacaut import symplectic_aut as sa
from jacaut import torus

PREC = 100
IWP_ORDERS = {16, 24, 32, 48, 96, 144, 288, 576, 864}


@pytest.fixture(scope="module")
def runs():
    return {}


def run_entry(runs, key, budget):
    if key not in runs:
        entry = cat.get(key)
        t = time.perf_counter()
        rep = pl.run_aut(entry.period_matrix(PREC), budget, entry=entry)
        runs[key] = (rep, time.perf_counter() - t)
    return runs[key]


# -- 1 -----------------------------------------------------------------------

TABLE_GENERA = [
    ((8, (1, 3, 4)), 2), ((6, (1, 1, 4)), 2), ((7, (1, 2, 4)), 3), ((8, (1, 2, 5)), 3),
    ((12, (1, 3, 8)), 3), ((8, (1, 1, 6)), 3), ((12, (1, 5, 6)), 3), ((4, (1, 3, 3, 1)), 3),
    ((5, (1, 2, 4, 3)), 4), ((12, (1, 4, 7)), 4),
]


def test_criterion_1_genus_table():
    t = time.perf_counter()
    got = [cc.genus(cc.validate(*b)) for b, _ in TABLE_GENERA]
    dt = time.perf_counter() - t
    want = [g for _, g in TABLE_GENERA]
    ok = got == want and dt < 1
    record(1, ok, f"genera {got} vs {want} in {dt:.3f}s")
    assert ok


# -- 2 -----------------------------------------------------------------------

def test_criterion_2_multipliers():
    t = time.perf_counter()
    klein = cc.multipliers(cc.validate(7, (1, 2, 4))) == [1, 2, 4]
    bad = []
    count = 0
    for d in range(2, 51):
        for i in range(1, d):
            for j in range(1, d):
                k = (-i - j) % d
                if not k:
                    continue
                try:
                    b = cc.validate(d, (i, j, k))
                except cc.CoverError:
                    continue  # disconnected data
                count += 1
                if len(cc.multipliers(b)) != cc.genus(b):
                    bad.append(str(b))
    dt = time.perf_counter() - t
    ok = klein and not bad and dt < 5
    record(2, ok, f"Klein multipliers {'ok' if klein else 'wrong'}; {count} covers scanned, "
                  f"{len(bad)} mismatches, {dt:.2f}s")
    assert ok


# -- 3 -----------------------------------------------------------------------

def orders(d, idx, a):
    return [(t.preimages, t.order) for t in cc.form_divisor(cc.validate(d, idx), a)]


def test_criterion_3_divisors():
    checks = {
        # Klein: p2 + 3 p3, p1 + 3 p2, 3 p1 + p3
        "klein": [orders(7, (1, 2, 4), a) for a in (1, 2, 4)]
        == [[(1, 0), (1, 1), (1, 3)], [(1, 1), (1, 3), (1, 0)], [(1, 3), (1, 0), (1, 1)]],
        # 12(1,3,8): the four points over p3; p1 plus the three over p2; 4 p1
        "12(1,3,8)": [orders(12, (1, 3, 8), a) for a in (1, 2, 5)]
        == [[(1, 0), (3, 0), (4, 1)], [(1, 1), (3, 1), (4, 0)], [(1, 4), (3, 0), (4, 0)]],
        # 4g(1,2g-1,2g) at g = 2: (2i - 2) p1 + (2g - 2i) p2
        "8(1,3,4)": [orders(8, (1, 3, 4), a) for a in (1, 3)]
        == [[(1, 0), (1, 2), (4, 0)], [(1, 2), (1, 0), (4, 0)]],
        # 2g+2(1,1,2g) at g = 2: (i-1) p1 + (i-1) p2 + (g-i) on both points over p3
        "6(1,1,4)": [orders(6, (1, 1, 4), a) for a in (1, 2)]
        == [[(1, 0), (1, 0), (2, 1)], [(1, 1), (1, 1), (2, 0)]],
        # 4(1,3,3,1): 2 p2 + 2 p3, p1 + p2 + p3 + p4, 2 p1 + 2 p4
        "4(1,3,3,1)": [[o for _, o in orders(4, (1, 3, 3, 1), a)] for a in (1, 2, 3)]
        == [[0, 2, 2, 0], [1, 1, 1, 1], [2, 0, 0, 2]],
    }
    ok = all(checks.values())
    record(3, ok, ", ".join(f"{k} {'ok' if v else 'MISMATCH'}" for k, v in checks.items()))
    assert ok


# -- 4 -----------------------------------------------------------------------

def displayed_matrices():
    """The displayed period matrices, entered by hand from their printed closed forms."""
    e = lambda q: mpmath.expjpi(mpmath.mpf(q))  # noqa: E731  e^{i pi q}
    z7 = lambda k: mpmath.expjpi(mpmath.mpf(2 * k) / 7)  # noqa: E731
    s2, s3 = mpmath.sqrt(2), mpmath.sqrt(3)
    F = mpmath.mpf
    return {
        (7, (1, 2, 4)): [[z7(k) for k in range(6)], [z7(2 * k) for k in range(6)],
                         [z7(4 * k) for k in range(6)]],
        (8, (1, 3, 4)): [[1, (1 + 1j) / s2, 1j, (-1 + 1j) / s2],
                         [1, (-1 + 1j) / s2, -1j, (1 + 1j) / s2]],
        (6, (1, 1, 4)): [[1, (1 + s3 * 1j) / 2, (-1 + s3 * 1j) / 2, -1],
                         [1, (-1 + s3 * 1j) / 2, (-1 - s3 * 1j) / 2, 1]],
        (12, (1, 5, 6)): [[e(F(k) / 6) for k in range(6)], [e(F(k) / 2) for k in range(6)],
                          [e(F(5 * k) / 6) for k in range(6)]],
        (8, (1, 1, 6)): [[1, e(F(1) / 4), 1j, e(F(3) / 4), -1, e(F(-3) / 4)],
                         [1, 1j, -1, -1j, 1, 1j],
                         [1, e(F(3) / 4), -1j, e(F(1) / 4), -1, e(F(-1) / 4)]],
        (12, (1, 3, 8)): [[1, e(F(1) / 6), e(F(1) / 3), 1j, e(F(2) / 3), e(F(5) / 6)],
                          [1, e(F(1) / 3), e(F(2) / 3), -1, e(F(-2) / 3), e(F(-1) / 3)],
                          [1, e(F(5) / 6), e(F(-1) / 3), 1j, e(F(-2) / 3), e(F(1) / 6)]],
        (12, (1, 4, 7)): [
            [1, e(F(1) / 6), e(F(1) / 3), 1j, e(F(2) / 3), e(F(5) / 6), -1, e(F(-5) / 6)],
            [1, e(F(1) / 3), e(F(2) / 3), -1, e(F(-2) / 3), e(F(-1) / 3), 1, e(F(1) / 3)],
            [1, e(F(2) / 3), e(F(-2) / 3), 1, e(F(2) / 3), e(F(-2) / 3), 1, e(F(2) / 3)],
            [1, e(F(-5) / 6), e(F(1) / 3), -1j, e(F(2) / 3), e(F(-1) / 6), -1, e(F(1) / 6)]],
    }


def test_criterion_4_period_matrices():
    with mpmath.workdps(PREC + 10):
        shown = displayed_matrices()
    tol = mpmath.mpf(10) ** -50
    errs = {}
    for (d, idx), rows in shown.items():
        pm = cc.period_matrix(cc.validate(d, idx), PREC)
        with mpmath.workdps(PREC + 10):
            errs[f"{d}{idx}"] = max(abs(pm.entries[i, k] - rows[i][k])
                                    for i in range(len(rows)) for k in range(len(rows[0])))
    ok = all(v < tol for v in errs.values())
    worst = max(errs.values())
    record(4, ok, f"{len(errs)} matrices, worst entry error {mpmath.nstr(worst, 3)} (tolerance 1e-50)")
    assert ok


# -- 5 -----------------------------------------------------------------------

def elliptic_summary(tau):
    pm = torus.elliptic(tau, PREC)
    hb = torus.hom_basis(pm, pm)
    rep = pl.run_aut(pm, 2, hyperelliptic=True)
    return hb.rank, rep


def test_criterion_5_square_lattice_and_aut_orders():
    t = time.perf_counter()
    rank_i, rep_i = elliptic_summary("1j")
    rank_t, rep_t = elliptic_summary("0.3+1.7j")
    dt = time.perf_counter() - t
    ok = (rank_i == 2 and len(rep_i.classes) == 1 and rep_i.orders == [4]
          and rep_t.orders == [2] and dt < 5)
    record("5a", ok, f"(1,i): End rank {rank_i}, {len(rep_i.classes)} class, Aut {rep_i.orders}; "
                     f"(1,0.3+1.7i): Aut {rep_t.orders}; {dt:.2f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="0.3+1.7i = (3+17i)/10 lies in Q(i): the curve has CM and "
                                       "End has rank 2, so the stated rank 1 cannot hold")
def test_criterion_5_end_rank_of_point_03_17():
    rank, _ = elliptic_summary("0.3+1.7j")
    record("5b", rank == 1, f"(1,0.3+1.7i): End rank {rank}, criterion expects 1 "
                            "(tau satisfies 50 tau^2 - 30 tau + 149 = 0)")
    assert rank == 1


# -- 6 -----------------------------------------------------------------------

def test_criterion_6_klein(runs):
    rep, dt = run_entry(runs, "klein", 2)
    by_order = {c.order: c for c in rep.classes}
    ref336 = gid.fingerprint(gid.reference("GL(3,2)xC2"))
    ref168 = gid.fingerprint(gid.reference("GL(3,2)"))
    c = rep.canonical
    ok = (len(rep.classes) >= 2 and {48, 336} <= set(by_order)
          and 336 in by_order and by_order[336].fingerprint == ref336
          and c.klass is not None and c.curve_order == 168 and c.curve_fingerprint == ref168
          and dt < 15 * 60)
    record(6, ok, f"orders {rep.orders}, {len(rep.polarizations)} polarizations, canonical "
                  f"{c.method} -> |Aut(C)| {c.curve_order}, {dt:.0f}s")
    assert ok


# -- 7 -----------------------------------------------------------------------

def test_criterion_7_fermat(runs):
    rep, dt = run_entry(runs, "fermat", 2)
    c = rep.canonical
    canon_order = rep.classes[c.klass].order if c.klass is not None else None
    ok = {64, 192} <= set(rep.orders) and canon_order == 192 and c.curve_order == 96 and dt < 15 * 60
    record(7, ok, f"orders {rep.orders}, canonical class order {canon_order} -> {c.curve_order}, {dt:.0f}s")
    assert ok


# -- 8 -----------------------------------------------------------------------

def test_criterion_8_12156(runs):
    rep, dt = run_entry(runs, "12156", 2)
    c = rep.canonical
    canon = rep.classes[c.klass] if c.klass is not None else None
    ref = gid.fingerprint(gid.reference("C4xS3"))
    others = {k.order for k in rep.classes} & {12, 32}
    ok = canon is not None and canon.order == 24 and canon.fingerprint == ref and bool(others)
    record(8, ok, f"orders {rep.orders}, canonical class order {canon.order if canon else None} "
                  f"({'matches' if canon and canon.fingerprint == ref else 'no match for'} C4xS3), "
                  f"other classes {sorted(others)}, budget 2")
    assert ok


# -- 9 -----------------------------------------------------------------------

def test_criterion_9_iwp_classes(runs):
    rep, dt = run_entry(runs, "iwp", 1)
    listed = [k for k in rep.classes if k.order in IWP_ORDERS]
    big = max(rep.orders)
    ok = len({k.order for k in listed}) >= 3 and big > 144 and dt < 60 * 60
    record("9a", ok, f"budget 1: {len(rep.polarizations)} polarizations, {len(rep.classes)} classes, "
                     f"orders {rep.orders}; largest {big} > 144; {dt:.0f}s")
    assert ok


@pytest.mark.xfail(strict=True, reason="budget 1 also finds a class of order 64 (exponent 4, center 4), "
                                       "which the listed orders do not contain")
def test_criterion_9_iwp_orders_within_list(runs):
    rep, _ = run_entry(runs, "iwp", 1)
    extra = sorted(set(rep.orders) - IWP_ORDERS)
    record("9b", not extra, f"orders outside the listed set: {extra}")
    assert not extra


# -- 10 ----------------------------------------------------------------------

def random_gram(rng, r):
    while True:
        A = [[rng.randint(-2, 2) for _ in range(r)] for _ in range(r)]
        if xl.det(A) == 0:
            continue
        return xl.matmul(xl.transpose(A), A)


def box_bound(Q, t):
    # every solution has |x_i| <= sqrt(t (Q^-1)_ii)
    Qi = np.linalg.inv(np.array(Q, dtype=float))
    return int(max(np.sqrt(t * Qi[i, i]) for i in range(len(Q)))) + 1


def brute_force(Q, t):
    Qa = np.array(Q, dtype=np.int64)
    r = len(Q)
    box = box_bound(Q, t)
    axes = [np.arange(-box, box + 1)] * r
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, r)
    vals = np.einsum("ki,ij,kj->k", pts, Qa, pts)
    return sorted(p.tolist() for p in pts[vals == t])


def random_unimodular(n, rng):
    U = xl.identity(n)
    for _ in range(3 * n):
        i, j = rng.sample(range(n), 2)
        q = rng.randint(-2, 2)
        for row in U:
            row[i] += q * row[j]
    return U


def closure_from_generators(gens):
    n = len(gens[0])
    seen = {xl.as_tuple(xl.identity(n))}
    frontier = [xl.identity(n)]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = xl.matmul(g, s)
                k = xl.as_tuple(h)
                if k not in seen:
                    seen.add(k)
                    nxt.append(h)
        frontier = nxt
    return [[list(r) for r in k] for k in seen]


def test_criterion_10_fincke_pohst_vs_brute_force():
    rng = random.Random(2024)
    bad = done = 0
    while done < 100:
        r = rng.randint(1, 4)
        Q = random_gram(rng, r)
        t = rng.randint(1, 20)
        if box_bound(Q, t) > 8:
            continue  # too skewed for the box enumeration; draw again
        done += 1
        if sa.fincke_pohst(Q, t) != brute_force(Q, t):
            bad += 1
    record("10a", bad == 0, f"Fincke-Pohst vs box enumeration: {100 - bad}/100 agree")
    assert bad == 0


def test_criterion_10_frobenius_round_trip():
    rng = random.Random(7)
    bad = 0
    for k in range(100):
        g = 1 + k % 4
        J = pz.standard_form((1,) * g)
        U = random_unimodular(2 * g, rng)
        E = xl.matmul(xl.matmul(xl.transpose(U), J), U)
        C, D = pz.frobenius_form(E)
        if D != [1] * g or xl.matmul(xl.matmul(xl.transpose(C), E), C) != J or abs(xl.det(C)) != 1:
            bad += 1
    record("10b", bad == 0, f"Frobenius round trip: {100 - bad}/100 exact")
    assert bad == 0


def test_criterion_10_riemann_relations(runs):
    worst, failures, total = 0.0, 0, 0
    for key, budget in (("klein", 2), ("fermat", 2), ("12156", 2), ("iwp", 1)):
        rep, _ = run_entry(runs, key, budget)
        for p in rep.polarizations:
            total += 1
            worst = max(worst, p.riemann_residual)
            failures += not (p.riemann_positive and p.riemann_residual < 1e-40)
    record("10c", failures == 0, f"Riemann relations on {total} polarizations, worst symmetric "
                                 f"residual {worst:.1e}, {failures} failures")
    assert failures == 0


def test_criterion_10_fingerprint_conjugation(runs):
    rng = random.Random(11)
    checked, bad = 0, 0
    for key in ("klein", "fermat", "12156"):
        rep, _ = run_entry(runs, key, 2)
        for c in rep.classes:
            P = rep.polarizations[c.members[0]]
            elements = closure_from_generators(P.generators) if P.generators else \
                [xl.identity(2 * rep.genus)]
            base = gid.fingerprint(sa.group_closure(elements))
            if base != c.fingerprint:
                bad += 1
            for _ in range(10):
                C = random_unimodular(2 * rep.genus, rng)
                conj = gid.conjugate_group(elements, C)
                checked += 1
                if gid.fingerprint(sa.group_closure(conj)) != base:
                    bad += 1
    record("10d", bad == 0, f"fingerprint conjugation invariance: {checked} conjugates, {bad} mismatches")
    assert bad == 0


# -- 11 ----------------------------------------------------------------------

def synthetic_genus5():
    with mpmath.workdps(PREC + 30):
        taus = [mpmath.mpc(mpmath.e / 3, mpmath.pi / 2),
                mpmath.mpc(mpmath.sqrt(3) / 5, mpmath.euler + 1),
                mpmath.mpc(mpmath.log(2), mpmath.sqrt(7) / 2)]
    parts = [cat.get("8134").period_matrix(PREC)] + [torus.elliptic(t, PREC) for t in taus]
    return torus.block_diagonal(*parts, label="synthetic genus 5")


def test_criterion_11_external_file(tmp_path, capsys):
    path = tmp_path / "g5.json"
    cat.write_period_matrix(synthetic_genus5(), path)
    code = cli.main(["aut", str(path), "--budget", "1", "--json"])
    data = json.loads(capsys.readouterr().out)
    ok = code == 0 and data["genus"] == 5 and len(data["classes"]) >= 2
    record("11a", ok, f"synthetic g=5 file: exit {code}, {len(data['classes'])} classes, "
                      f"orders {sorted(c['order'] for c in data['classes'])}")
    assert ok


@pytest.mark.skipif(not os.environ.get("JACAUT_X063_FILE"),
                    reason="set JACAUT_X063_FILE to a genuine X_0(63) period-matrix file")
def test_criterion_11_x0_63_orders(capsys):
    code = cli.main(["aut", os.environ["JACAUT_X063_FILE"], "--json"])
    data = json.loads(capsys.readouterr().out)
    found = {c["order"] for c in data["classes"]}
    ok = code == 0 and {32, 96} <= found
    record("11b", ok, f"X_0(63) orders {sorted(found)}")
    assert ok
