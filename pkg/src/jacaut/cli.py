"""Command line interface: ``jacaut cover|endo|polarize|aut|table``.

Exit codes: 0 success, 1 internal or verification failure, 2 invalid input.
Period-matrix arguments are JSON files; a builtin catalog key (e.g. ``klein``)
is accepted wherever a file is expected.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import catalog as cat
from . import cyclic_cover as cc
from . import group_id as gid
from . import pipeline as pl
from . import polarization as pz
from . import torus

log = logging.getLogger("jacaut")

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _load(spec, prec):
    if Path(spec).exists():
        try:
            return cat.read_period_matrix(spec, prec)
        except cat.FormatError as exc:
            raise InputError(str(exc)) from None
    if spec in cat.CATALOG:
        try:
            return cat.get(spec).period_matrix(prec)
        except cat.FormatError as exc:
            raise InputError(str(exc)) from None
    raise InputError(f"{spec}: no such file or catalog key")


def _emit(obj, as_json, text):
    if as_json:
        print(json.dumps(obj, indent=1, default=str))
    else:
        print(text)


def cmd_cover(args):
    try:
        indices = [int(x) for x in args.indices.split(",") if x]
        b = cc.validate(args.d, indices)
    except (ValueError, cc.CoverError) as exc:
        raise InputError(str(exc)) from None
    rep = cc.analyze(b)
    data = {"cover": str(b), "genus": rep.genus, "multipliers": rep.multipliers,
            "divisors": {str(a): [t.as_tuple() for t in terms] for a, terms in rep.divisors.items()},
            "branch_weights": [{"branch": w.branch, "preimages": w.preimages, "orders": list(w.orders),
                                "weight": w.weight} for w in rep.branch_weights],
            "residual_weight": rep.residual_weight, "base_tiles": rep.tiles}
    lines = [f"cover {b}: genus {rep.genus}",
             f"multipliers: {', '.join(map(str, rep.multipliers)) or '-'}"]
    for a, terms in rep.divisors.items():
        parts = [f"{t.order}*p{t.branch + 1}" + (f" (x{t.preimages})" if t.preimages > 1 else "")
                 for t in terms if t.order]
        lines.append(f"  (w_{a}) = {' + '.join(parts) or '0'}")
    for w in rep.branch_weights:
        lines.append(f"  branch point {w.branch + 1}: orders {w.orders}, weight {w.weight}"
                     f" at each of {w.preimages} point(s)")
    if b.n == 3 and rep.genus:
        lines.append(f"residual weight: {rep.residual_weight}")
    lines.append(f"base tiles: {rep.tiles if rep.tiles is not None else 'none'}")
    if args.emit_period:
        if b.n != 3 or rep.genus < 1:
            raise InputError("period matrices are only synthesized for n = 3 and genus >= 1")
        pm = cc.period_matrix(b, args.prec)
        cat.write_period_matrix(pm, args.emit_period)
        lines.append(f"wrote {pm.g}x{2 * pm.g} period matrix to {args.emit_period}")
        data["period_file"] = args.emit_period
    _emit(data, args.json, "\n".join(lines))
    return EXIT_OK


def cmd_endo(args):
    pm1 = _load(args.file1, args.prec)
    pm2 = _load(args.file2, args.prec) if args.file2 else pm1
    hb = torus.hom_basis(pm1, pm2)
    data = {"source": pm1.label, "target": pm2.label, "rank": hb.rank}
    lines = [f"Hom({pm1.label}, {pm2.label}): rank {hb.rank}"]
    if hb.rank and args.file2 is None:
        rep = torus.end_ring_check(hb)
        data.update(closed=True, contains_identity=rep.contains_identity)
        lines.append(f"closed under products; identity in span: {rep.contains_identity}")
    if pm1.g != pm2.g:
        lines.append("genera differ: empty result")
    _emit(data, args.json, "\n".join(lines))
    return EXIT_OK


def cmd_polarize(args):
    pm = _load(args.file, args.prec)
    cs = torus.complex_structure(pm)
    basis = pz.compat_basis(pm, cs)
    pols = pz.cull_pb(basis, cs, args.budget) if basis else []
    data = {"label": pm.label, "ns_rank": len(basis), "budget": args.budget,
            "polarizations": [{"E": p.E, "frobenius_transform": p.frobenius_transform,
                               "elementary_divisors": list(p.elementary_divisors)} for p in pols]}
    lines = [f"{pm.label}: compatible forms of rank {len(basis)}, "
             f"{len(pols)} principal polarization(s) at budget {args.budget}"]
    for k, p in enumerate(pols):
        lines.append(f"[{k}] E = {p.E}")
        lines.append(f"    C = {p.frobenius_transform}")
    if not pols:
        print(f"warning: no principal polarization found at budget {args.budget}", file=sys.stderr)
    _emit(data, args.json, "\n".join(lines))
    return EXIT_OK


def _format_report(rep: pl.RunReport) -> str:
    lines = [f"{rep.label}: genus {rep.genus}, End rank {rep.hom_rank}, NS rank {rep.ns_rank}, "
             f"{len(rep.polarizations)} principal polarization(s) at budget {rep.budget}, "
             f"{rep.precision} digits"]
    for c in rep.classes:
        m = f"  ~ {', '.join(c.matches)}" if c.matches else ""
        lines.append(f"  class {c.index}: |Aut| = {c.order}, {len(c.members)} polarization(s){m}")
    if rep.canonical is not None:
        c = rep.canonical
        if c.klass is None:
            lines.append("  canonical class: undetermined")
        else:
            lines.append(f"  canonical class: {c.klass} ({c.method})")
            if c.curve_order is not None:
                m = f" ~ {', '.join(c.curve_matches)}" if c.curve_matches else ""
                lines.append(f"  |Aut(C)| = {c.curve_order}{m}")
    for w in rep.warnings:
        lines.append(f"  warning: {w}")
    lines.append(f"  time: {rep.timings.get('total', 0):.1f}s")
    return "\n".join(lines)


def cmd_aut(args):
    pm = _load(args.file, args.prec)
    entry = cat.CATALOG.get(args.file) if not Path(args.file).exists() else None
    if entry is None and pm.label in cat.CATALOG:
        entry = cat.CATALOG[pm.label]
    hyp = True if args.hyperelliptic else None
    rep = pl.run_aut(pm, args.budget, hyperelliptic=hyp, entry=entry)
    if not pl.riemann_ok(rep):
        print("error: Riemann relations failed for an accepted polarization", file=sys.stderr)
        return EXIT_FAIL
    _emit(rep.to_dict(), args.json, _format_report(rep))
    return EXIT_OK


def table_row(entry: cat.CatalogEntry, prec, budget=None) -> dict:
    row = {"key": entry.key, "label": entry.label, "expected_genus": entry.genus,
           "expected_curve_order": entry.curve_aut_order, "expected_jacobian_orders": list(entry.jacobian_orders)}
    if entry.branching is not None:
        row["genus"] = cc.genus(cc.validate(*entry.branching))
    if entry.file_only:
        row.update(status="SKIP", reason=entry.notes)
        return row
    b = entry.table_budget if budget is None else budget
    rep = pl.run_aut(entry.period_matrix(prec), b, entry=entry)
    row.update(budget=b, orders=rep.orders, classes=len(rep.classes),
               polarizations=len(rep.polarizations), seconds=round(rep.timings["total"], 1))
    c = rep.canonical
    row["canonical"] = c.method if c.klass is not None else "undetermined"
    row["curve_order"] = c.curve_order
    ok = row.get("genus", entry.genus) == entry.genus and pl.riemann_ok(rep)
    if entry.canonical_undetermined:
        ok = ok and bool(rep.orders) and set(rep.orders) <= set(entry.jacobian_orders)
    else:
        ok = ok and c.curve_order == entry.curve_aut_order
    row["status"] = "PASS" if ok else "FAIL"
    return row


def cmd_table(args):
    keys = [args.only] if args.only else list(cat.CATALOG)
    for k in keys:
        if k not in cat.CATALOG:
            raise InputError(f"unknown catalog key {k!r}; known: {', '.join(cat.CATALOG)}")
    rows = [table_row(cat.CATALOG[k], args.prec, args.budget) for k in keys]
    lines = []
    for r in rows:
        if r["status"] == "SKIP":
            lines.append(f"{r['status']}  {r['label']}: {r['reason']}")
            continue
        lines.append(f"{r['status']}  {r['label']}: genus {r.get('genus', '?')} (expected {r['expected_genus']}), "
                     f"|Aut(C)| {r['curve_order'] if r['curve_order'] is not None else r['canonical']} "
                     f"(expected {r['expected_curve_order']}), Jacobian orders {r['orders']} "
                     f"(listed {r['expected_jacobian_orders']}), budget {r['budget']}")
    _emit(rows, args.json, "\n".join(lines))
    return EXIT_OK if all(r["status"] != "FAIL" for r in rows) else EXIT_FAIL


def build_parser():
    default_prec = pl.precision_from_env()
    p = argparse.ArgumentParser(prog="jacaut", description=__doc__.splitlines()[0],
                                epilog="group names: " + gid._GRAMMAR)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--prec", type=int, default=default_prec, help="working precision in digits")
        sp.add_argument("--json", action="store_true", help="machine-readable output")

    s = sub.add_parser("cover", help="analyse a cyclic cover d(d1,...,dn)")
    s.add_argument("d", type=int)
    s.add_argument("indices", help="comma-separated branching indices")
    s.add_argument("--emit-period", metavar="FILE")
    common(s)
    s.set_defaults(func=cmd_cover)

    s = sub.add_parser("endo", help="homomorphism lattice between two tori")
    s.add_argument("file1")
    s.add_argument("file2", nargs="?")
    common(s)
    s.set_defaults(func=cmd_endo)

    s = sub.add_parser("polarize", help="principal polarizations found by the coefficient search")
    s.add_argument("file")
    s.add_argument("--budget", type=int, default=pz.DEFAULT_BUDGET)
    common(s)
    s.set_defaults(func=cmd_polarize)

    s = sub.add_parser("aut", help="automorphism groups for every principal polarization found")
    s.add_argument("file")
    s.add_argument("--budget", type=int, default=pz.DEFAULT_BUDGET)
    s.add_argument("--hyperelliptic", action="store_true")
    common(s)
    s.set_defaults(func=cmd_aut)

    s = sub.add_parser("table", help="reproduce the curve tables for the builtin catalog")
    s.add_argument("--only", metavar="KEY")
    s.add_argument("--budget", type=int, default=None, help="override the per-entry budget")
    common(s)
    s.set_defaults(func=cmd_table)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "prec", 100) < 30:
        print("error: precision must be at least 30 digits", file=sys.stderr)
        return EXIT_INPUT
    if getattr(args, "budget", None) is not None and args.budget < 0:
        print("error: budget must be nonnegative", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # verification failures and bugs alike end with status 1
        log.debug("failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
