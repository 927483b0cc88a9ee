"""End-to-end run: period matrix -> polarizations -> automorphism groups -> classes."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

from . import exact_linalg as xl
from . import group_id as gid
from . import polarization as pz
from . import symplectic_aut as sa
from . import torus
from .catalog import CatalogEntry

log = logging.getLogger(__name__)


@dataclass
class PolarizationResult:
    E: list
    coefficients: tuple | None
    order: int
    fingerprint: gid.GroupFingerprint
    riemann_residual: float
    riemann_positive: bool
    generators: list
    source: str = "search"
    klass: int = -1


@dataclass
class EquivalenceClass:
    index: int
    order: int
    fingerprint: gid.GroupFingerprint
    members: list
    matches: list = field(default_factory=list)


@dataclass
class CanonicalInfo:
    klass: int | None
    method: str                  # "intersection matrix", "canonical (by matching)", "undetermined"
    curve_order: int | None = None
    curve_fingerprint: gid.GroupFingerprint | None = None
    curve_matches: list = field(default_factory=list)


@dataclass
class RunReport:
    label: str | None
    genus: int
    precision: int
    budget: int
    hom_rank: int
    ns_rank: int
    polarizations: list = field(default_factory=list)
    classes: list = field(default_factory=list)
    canonical: CanonicalInfo | None = None
    timings: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def orders(self):
        return sorted({c.order for c in self.classes})

    def to_dict(self):
        def fp(f):
            return None if f is None else f.as_dict()
        out = {
            "label": self.label, "genus": self.genus, "precision": self.precision,
            "budget": self.budget, "hom_rank": self.hom_rank, "ns_rank": self.ns_rank,
            "polarization_count": len(self.polarizations),
            "classes": [{"index": c.index, "order": c.order, "fingerprint": fp(c.fingerprint),
                         "size": len(c.members), "matches": c.matches,
                         "representative": self.polarizations[c.members[0]].E,
                         "generators": self.polarizations[c.members[0]].generators}
                        for c in self.classes],
            "timings": {k: round(v, 3) for k, v in self.timings.items()},
            "warnings": self.warnings,
        }
        if self.canonical is not None:
            c = self.canonical
            out["canonical"] = {"class": c.klass, "method": c.method, "curve_order": c.curve_order,
                                "curve_fingerprint": fp(c.curve_fingerprint),
                                "curve_matches": c.curve_matches}
        return out


def classify(results) -> list:
    """Group polarizations by the fingerprint of their automorphism groups."""
    by_fp = {}
    for i, r in enumerate(results):
        by_fp.setdefault(r.fingerprint, []).append(i)
    ordered = sorted(by_fp.items(), key=lambda kv: (kv[0].order, kv[1][0]))
    classes = []
    for k, (f, members) in enumerate(ordered):
        for i in members:
            results[i].klass = k
        classes.append(EquivalenceClass(k, f.order, f, members))
    return classes


def analyse_polarization(hb, pm, pol: pz.Polarization, source="search") -> tuple:
    S = sa.isomorphisms(hb, pol.E, pol.E)
    G = sa.group_closure(S)
    rc = pz.riemann_check(pm, pol)
    res = PolarizationResult(pol.E, pol.coefficients, G.order, gid.fingerprint(G),
                             float(rc.symmetric_residual), rc.positive, G.generators, source)
    return res, G


def run_aut(pm: torus.PeriodMatrix, budget: int = pz.DEFAULT_BUDGET, hyperelliptic: bool | None = None,
            entry: CatalogEntry | None = None, intersection=None, limit: int | None = None) -> RunReport:
    """Polarizations of the torus found at ``budget`` and their automorphism groups.

    Hyperelliptic status comes from the argument, the catalog entry or the
    file metadata, in that order. An intersection matrix, when known, is
    added as the canonical polarization.
    """
    t0 = time.perf_counter()
    if hyperelliptic is None:
        hyperelliptic = entry.hyperelliptic if entry is not None else pm.hyperelliptic
    if intersection is None and entry is not None:
        intersection = entry.intersection
    timings = {}
    cs = torus.complex_structure(pm)
    hb = torus.hom_basis(pm, pm)
    timings["hom"] = time.perf_counter() - t0
    basis = pz.compat_basis(pm, cs)
    pols = pz.cull_pb(basis, cs, budget, limit=limit) if basis else []
    timings["polarizations"] = time.perf_counter() - t0 - timings["hom"]
    report = RunReport(pm.label, pm.g, pm.precision_digits, budget, hb.rank, len(basis))
    canonical_E = None
    if intersection is not None:
        cp = pz.from_intersection(intersection, pm, cs)
        canonical_E = xl.as_tuple(cp.E)
        if all(xl.as_tuple(p.E) != canonical_E for p in pols):
            pols.append(cp)
    if not pols:
        report.warnings.append(f"no principal polarization found at budget {budget}")
    groups = []
    t1 = time.perf_counter()
    for pol in pols:
        source = "intersection" if xl.as_tuple(pol.E) == canonical_E else "search"
        res, G = analyse_polarization(hb, pm, pol, source)
        report.polarizations.append(res)
        groups.append(G)
    timings["groups"] = time.perf_counter() - t1
    report.classes = classify(report.polarizations)
    if entry is not None and entry.jacobian_groups:
        for c in report.classes:
            name = entry.jacobian_groups.get(c.order)
            if name is not None:
                c.matches = gid.match(groups[c.members[0]], [name])
    report.canonical = _canonical(report, groups, hyperelliptic, entry, canonical_E)
    timings["total"] = time.perf_counter() - t0
    report.timings = timings
    return report


def _canonical(report, groups, hyperelliptic, entry, canonical_E):
    if entry is not None and entry.canonical_undetermined and canonical_E is None:
        return CanonicalInfo(None, "undetermined")
    klass, method = None, None
    if canonical_E is not None:
        idx = next(i for i, r in enumerate(report.polarizations) if xl.as_tuple(r.E) == canonical_E)
        klass, method = report.polarizations[idx].klass, "intersection matrix"
    elif entry is not None and hyperelliptic is not None:
        want = entry.curve_aut_order * (1 if hyperelliptic else 2)
        hits = [c for c in report.classes if c.order == want]
        if len(hits) > 1 and entry.curve_group:
            # several classes of the right order: keep those whose curve group matches
            hits = [c for c in hits
                    if gid.match(gid.FiniteGroup(sa.torelli_adjust(groups[c.members[0]], hyperelliptic)[1]),
                                 [entry.curve_group])]
        if len(hits) == 1:
            klass, method = hits[0].index, "canonical (by matching)"
    if klass is None:
        return CanonicalInfo(None, "undetermined")
    if hyperelliptic is None:
        return CanonicalInfo(klass, method)
    G = groups[report.classes[klass].members[0]]
    order, Tq = sa.torelli_adjust(G, hyperelliptic)
    info = CanonicalInfo(klass, method, order, gid.fingerprint(Tq))
    if entry is not None and entry.curve_group:
        try:
            info.curve_matches = gid.match(gid.FiniteGroup(Tq), [entry.curve_group])
        except gid.GroupError as exc:
            log.warning("cannot build reference %s: %s", entry.curve_group, exc)
    return info


def riemann_ok(report: RunReport, tol=1e-40) -> bool:
    return all(r.riemann_positive and r.riemann_residual < tol for r in report.polarizations)


def precision_from_env(default=xl.DEFAULT_PREC) -> int:
    import os
    val = os.environ.get("JACAUT_PREC")
    if not val:
        return default
    try:
        p = int(val)
    except ValueError:
        raise ValueError(f"JACAUT_PREC must be an integer, got {val!r}") from None
    if p < 30:
        raise ValueError("JACAUT_PREC must be at least 30")
    return p

