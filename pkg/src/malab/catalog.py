"""Machine-readable catalog of one-end cohomogeneity-one compactifications.

Two families are listed: the eight canonical-form bundles of mixed type
(``G/G_Q``, fiber ``F``, image ``rho(G_Q)``) and the five compactifications
of tangent bundles of compact rank-one symmetric spaces.  Strings are kept
literally as published; entries whose group or dimension labels look
inconsistent carry a ``note`` instead of being silently corrected.
"""

from dataclasses import asdict, dataclass
import json
import re

__all__ = [
    "CatalogEntry",
    "SCHEMA_VERSION",
    "catalog",
    "check_entry",
    "rows_without_quadric_counterpart",
    "export_catalog",
    "load_catalog",
]

SCHEMA_VERSION = 1

FAMILIES = ("Type1", "MorimotoNagano", "MixedType")
MIXED_FIBER_DIMS = frozenset({2, 3, 5, 7, 9})


@dataclass(frozen=True)
class CatalogEntry:
    family: str
    base: str
    fiber: str
    rho_image: str
    fiber_dim: object  # int for MixedType rows, formula string in n otherwise
    source_row: str
    note: str = ""


_MIXED = [
    ("I1", "SU_n/S(U_2 x U_{n-2})", "CP^2", "SO_3"),
    ("I2", "SU_n/S(U_2 x U_{n-2})", "Q^2", "SO_3"),
    ("II", "(SU_p/S(U_2 x U_{p-2})) x (SU_q/S(U_2 x U_{q-2})), p+q > 4", "CP^3", "SO_4/Z_2"),
    ("III", "SU_n/S(U_4 x U_{n-4}), n > 4", "CP^5", "SO_6/Z_2"),
    ("IV1", "SO_10/SO_2 x SO_8", "CP^7", "SO_8/Z_2"),
    ("IV2", "SO_10/SO_2 x SO_8", "Q^7", "SO_8"),
    ("V1", "E_6/SO_2 x Spin_10", "CP^9", "SO_10/Z_2"),
    ("V2", "E_6/SO_2 x Spin_10", "Q^9", "SO_10"),
]

# (item, CROSS, compactification, invariance group as printed, complex dim of
# the compactification, real dim of the CROSS, note)
_MN = [
    ("a", "RP^n", "CP^n", "SO_n", "n", "n",
     "suspected typo: the acting group should be SO_{n+1}"),
    ("b", "S^n", "Q^n", "SO_n", "n", "n",
     "suspected typo: the acting group should be SO_{n+1}"),
    ("c", "CP^n", "CP^n x CP^n", "SO_n", "2*n", "2*n",
     "suspected typo: the acting group should be SU_{n+1}"),
    ("d", "HP^n", "Gr_{2,2n}(C)", "Sp_n", "4*n-4", "4*n",
     "suspected typo: dimensions match HP^{n-1} (real dim 4n-4), not HP^n"),
    ("e", "OP^2", "EIII = E_6/SO_2.Spin_10", "F_4", "16", "16", ""),
]

# corrected CROSS dimension for entries flagged above
_MN_CORRECTED_DIM = {"d": "4*n-4"}


def catalog():
    """All 8 mixed-type rows followed by the 5 compactifications (items a-e)."""
    out = [CatalogEntry("MixedType", base, fiber, rho, _fiber_dim(fiber), row)
           for row, base, fiber, rho in _MIXED]
    for item, cross, comp, group, cdim, _rdim, note in _MN:
        out.append(CatalogEntry("MorimotoNagano", f"T{cross}", comp, group, cdim,
                                f"MN-{item}", note))
    return out


def _fiber_dim(fiber):
    m = re.fullmatch(r"(CP|Q)\^(\d+)", fiber)
    if not m:
        raise ValueError(f"unparseable fiber {fiber!r}")
    return int(m.group(2))


def _eval_dim(expr, n):
    return int(eval(expr, {"__builtins__": {}}, {"n": n}))


def check_entry(entry, ns=range(2, 7)):
    """List of violated invariants for an entry (empty list when consistent).

    Mixed-type rows: the fiber parses as ``CP^s`` or ``Q^s`` with
    ``s == fiber_dim`` and ``s in {2, 3, 5, 7, 9}``.  Compactifications: the
    complex dimension of the compactification equals the real dimension of
    the CROSS, for ``n`` in ``ns``, using the corrected CROSS dimension where
    the entry is annotated.
    """
    problems = []
    if entry.family not in FAMILIES:
        problems.append(f"unknown family {entry.family!r}")
    if entry.family == "MixedType":
        s = _fiber_dim(entry.fiber)
        if s != entry.fiber_dim:
            problems.append(f"fiber {entry.fiber} has dimension {s} != {entry.fiber_dim}")
        if s not in MIXED_FIBER_DIMS:
            problems.append(f"fiber dimension {s} outside {sorted(MIXED_FIBER_DIMS)}")
    elif entry.family == "MorimotoNagano":
        item = entry.source_row.split("-")[1]
        rdim = next(r[5] for r in _MN if r[0] == item)
        rdim = _MN_CORRECTED_DIM.get(item, rdim)
        for n in ns:
            if _eval_dim(entry.fiber_dim, n) != _eval_dim(rdim, n):
                problems.append(f"dimension mismatch at n={n}")
                break
    return problems


def literal_dimension_mismatches(ns=range(2, 7)):
    """Items whose printed CROSS does not match the compactification dimension."""
    return [f"MN-{item}" for item, _c, _f, _g, cdim, rdim, _ in _MN
            if any(_eval_dim(cdim, n) != _eval_dim(rdim, n) for n in ns)]


def rows_without_quadric_counterpart(entries=None):
    """Mixed-type rows whose base carries no quadric-fibered row."""
    entries = catalog() if entries is None else entries
    mixed = [e for e in entries if e.family == "MixedType"]
    quadric_bases = {e.base for e in mixed if e.fiber.startswith("Q^")}
    return [e.source_row for e in mixed if e.base not in quadric_bases]


def export_catalog(path=None):
    """Versioned JSON table, one record per row.  Returns the JSON text."""
    text = json.dumps({"schema_version": SCHEMA_VERSION,
                       "fields": list(CatalogEntry.__dataclass_fields__),
                       "entries": [asdict(e) for e in catalog()]}, indent=2)
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    return text


def load_catalog(text):
    data = json.loads(text)
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported catalog schema {data.get('schema_version')!r}")
    return [CatalogEntry(**rec) for rec in data["entries"]]
