"""Builtin curves and the JSON period-matrix format.

File format::

    {"g": 3, "cols": 6, "precision_digits": 100,
     "entries": [[{"re": "1.0", "im": "0.0"}, ...], ...],
     "label": "klein", "hyperelliptic": false}

Entries are decimal strings so that files carry their full precision.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import mpmath

from . import cyclic_cover as cc
from .torus import PeriodMatrix, TorusError


class FormatError(ValueError):
    pass


# -- JSON --------------------------------------------------------------------

def to_json(pm: PeriodMatrix) -> dict:
    digits = pm.precision_digits
    with mpmath.workdps(digits + 10):
        entries = [[{"re": mpmath.nstr(mpmath.re(pm.entries[i, k]), digits + 5),
                     "im": mpmath.nstr(mpmath.im(pm.entries[i, k]), digits + 5)}
                    for k in range(pm.entries.cols)] for i in range(pm.g)]
    return {"g": pm.g, "cols": pm.entries.cols, "precision_digits": digits,
            "entries": entries, "label": pm.label, "hyperelliptic": pm.hyperelliptic}


def from_json(data: dict, prec: int | None = None) -> PeriodMatrix:
    try:
        g, cols = int(data["g"]), int(data["cols"])
        digits = int(data.get("precision_digits", 100))
        rows = data["entries"]
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed period-matrix file: {exc}") from None
    if cols != 2 * g or len(rows) != g or any(len(r) != cols for r in rows):
        raise FormatError(f"expected a {g} x {2 * g} matrix")
    if prec is not None:
        digits = min(digits, prec) if data.get("precision_digits") else prec
    with mpmath.workdps(digits + 10):
        try:
            M = mpmath.matrix([[mpmath.mpc(e["re"], e["im"]) for e in row] for row in rows])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"bad matrix entry: {exc}") from None
    hyp = data.get("hyperelliptic")
    try:
        return PeriodMatrix(M, digits, data.get("label"), None if hyp is None else bool(hyp))
    except TorusError as exc:
        raise FormatError(str(exc)) from None


def write_period_matrix(pm: PeriodMatrix, path):
    Path(path).write_text(json.dumps(to_json(pm), indent=1))


def read_period_matrix(path, prec: int | None = None) -> PeriodMatrix:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise FormatError(f"cannot read {path}: {exc}") from None
    return from_json(data, prec)


# -- catalog -----------------------------------------------------------------

KLEIN_INTERSECTION = [
    [0, 1, 1, 0, 0, -1],
    [-1, 0, 1, 1, 0, 0],
    [-1, -1, 0, 1, 1, 0],
    [0, -1, -1, 0, 1, 1],
    [0, 0, -1, -1, 0, 1],
    [1, 0, 0, -1, -1, 0],
]

FERMAT_INTERSECTION = [
    [0, 1, 1, 0, 0, 0],
    [-1, 0, 1, 1, 0, 0],
    [-1, -1, 0, 1, 1, 0],
    [0, -1, -1, 0, 1, 1],
    [0, 0, -1, -1, 0, 1],
    [0, 0, 0, -1, -1, 0],
]


@dataclass
class CatalogEntry:
    key: str
    label: str
    hyperelliptic: bool
    genus: int
    curve_aut_order: int
    branching: tuple | None = None      # (d, indices)
    builder: object = None              # callable(prec) -> PeriodMatrix for literal matrices
    curve_group: str | None = None      # reference name when the grammar covers it
    jacobian_orders: tuple = ()         # orders listed for the principal polarizations
    jacobian_groups: dict = field(default_factory=dict)  # order -> reference name
    intersection: list | None = None
    file_only: bool = False
    canonical_undetermined: bool = False
    table_budget: int = 2               # search budget used by the table command
    notes: str = ""

    def period_matrix(self, prec=100) -> PeriodMatrix:
        if self.file_only:
            raise FormatError(f"{self.label}: no builtin period matrix; supply one as a file")
        if self.builder is not None:
            return self.builder(prec)
        b = cc.validate(*self.branching)
        return cc.period_matrix(b, prec, self.key, self.hyperelliptic)


def four_1331(prec=100, b=1, c=1) -> PeriodMatrix:
    """The 4(1,3,3,1) period matrix with trapezoid parameters b, c > 0."""
    with mpmath.workdps(prec + 10):
        b, c = mpmath.mpf(b), mpmath.mpf(c)
        s2 = mpmath.sqrt(2)
        e = lambda k: mpmath.expjpi(mpmath.mpf(k) / 4)  # noqa: E731  (e^{k pi i / 4})
        rows = [
            [1, 1j, -1, (b + s2) * e(1), (b + s2) * e(3), (b + s2) * e(-3)],
            [1, -1, 1, c * 1j, -c * 1j, c * 1j],
            [1, -1j, -1, b * e(3), b * e(9), b * e(15)],
        ]
        M = mpmath.matrix(rows)
    return PeriodMatrix(M, prec, "41331", True)


CATALOG = {
    "8134": CatalogEntry("8134", "8(1,3,4)", True, 2, 48, (8, (1, 3, 4)),
                         curve_group="GL(2,3)", jacobian_orders=(48,)),
    "6114": CatalogEntry("6114", "6(1,1,4)", True, 2, 24, (6, (1, 1, 4)), jacobian_orders=(24,)),
    "klein": CatalogEntry("klein", "7(1,2,4) Klein quartic", False, 3, 168, (7, (1, 2, 4)),
                          curve_group="GL(3,2)", jacobian_orders=(48, 336),
                          jacobian_groups={48: "S4xC2", 336: "GL(3,2)xC2"},
                          intersection=KLEIN_INTERSECTION),
    "fermat": CatalogEntry("fermat", "8(1,2,5) Fermat quartic", False, 3, 96, (8, (1, 2, 5)),
                           curve_group="C4^2:S3", jacobian_orders=(64, 192),
                           jacobian_groups={64: "C4wrC2xC2", 192: "C4^2:S3xC2"},
                           intersection=FERMAT_INTERSECTION),
    "12138": CatalogEntry("12138", "12(1,3,8)", False, 3, 48, (12, (1, 3, 8)), curve_group="C4.A4",
                          jacobian_orders=(96,)),
    "8116": CatalogEntry("8116", "8(1,1,6)", True, 3, 32, (8, (1, 1, 6)), jacobian_orders=(32,)),
    "12156": CatalogEntry("12156", "12(1,5,6)", True, 3, 24, (12, (1, 5, 6)), curve_group="C4xS3",
                          jacobian_orders=(12, 24, 32),
                          jacobian_groups={12: "D6", 24: "C4xS3", 32: "C4xD4"}),
    "41331": CatalogEntry("41331", "4(1,3,3,1)", True, 3, 16, (4, (1, 3, 3, 1)), builder=four_1331,
                          curve_group="C2xD4", jacobian_orders=(16,),
                          notes="literal matrix, b = c = 1"),
    "iwp": CatalogEntry("iwp", "12(1,4,7) I-WP", False, 4, 72, (12, (1, 4, 7)), curve_group="C3xS4",
                        jacobian_orders=(16, 24, 32, 48, 96, 144, 288, 576, 864),
                        jacobian_groups={16: "C2^4", 24: "C2^2xC6", 32: "C2^2xD4", 48: "C2^3xC6",
                                         96: "C2^2xS4", 144: "C6xS4"},
                        canonical_undetermined=True, table_budget=1),
    "bring": CatalogEntry("bring", "5(1,2,4,3) Bring's curve", False, 4, 120, (5, (1, 2, 4, 3)),
                          curve_group="S5", jacobian_orders=(32, 240),
                          jacobian_groups={32: "C2^2xD4", 240: "C2xS5"}, file_only=True,
                          notes="period matrix not builtin; supply it with a file"),
    "x0_63": CatalogEntry("x0_63", "X_0(63)", False, 5, 48, None, curve_group="C2xS4",
                          jacobian_orders=(32, 96), jacobian_groups={32: "C2^5", 96: "C2^2xS4"},
                          file_only=True, notes="period matrix not builtin; supply it with a file"),
}


def get(key: str) -> CatalogEntry:
    try:
        return CATALOG[key]
    except KeyError:
        raise KeyError(f"unknown catalog key {key!r}; known: {', '.join(CATALOG)}") from None
