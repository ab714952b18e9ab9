"""JSON persistence for sequences and constructions.

Eigenvalue angles are written in two forms: an exact numerator/denominator
string, which is authoritative, and a 30-significant-digit decimal rendering
for human inspection.  Plain decimal storage would destroy the deep-level
placement (parent gaps shrink past 1e-20 by level 5), so the loader rebuilds
every construction from the exact angles and then recomputes the gap and
shift-weight tables; any disagreement with the stored floats means the file
was edited or truncated and raises :class:`ArtifactCorrupt`.
"""

from __future__ import annotations

import json
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

import numpy as np

from .construction import (
    LevelBudget,
    ShiftConstruction,
    WeightSchedule,
    _alphas_fiber1,
    _gaps_table,
)
from .errors import ArtifactCorrupt, ConfigInvalid
from .sequences import IndexSequence, TorusPoint

DECIMAL_DIGITS = 30

_BUDGET_KEYS = (
    "level",
    "gap_ratio_ok",
    "eigvec_budget_ok",
    "tail_sum_ok",
    "gap_value",
    "gap_bound",
    "eigvec_a",
    "eigvec_b",
    "eigvec_budget",
    "tail_max",
    "tail_budget",
    "eta_used",
)


def decimal_string(frac: Fraction, digits: int = DECIMAL_DIGITS) -> str:
    """Decimal rendering of an exact rational, rounded to `digits` significant digits."""
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(frac.numerator) / Decimal(frac.denominator))


def fraction_from_string(text: str) -> Fraction:
    """Parse the exact 'p/q' (or integer) form used in stored artifacts."""
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigInvalid(f"bad rational literal {text!r}: {exc}") from exc


def _json_default(obj):
    # numpy scalars: bools and ints are not subclasses of their Python kin
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"object of type {type(obj).__name__} is not JSON serializable")


def write_json(path, payload: dict) -> None:
    """Write a payload with sorted keys so identical runs give identical bytes."""
    text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default)
    Path(path).write_text(text + "\n", encoding="utf-8")


def read_json(path) -> dict:
    p = Path(path)
    try:
        obj = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(f"{p}: not valid JSON ({exc})") from exc
    if not isinstance(obj, dict):
        raise ConfigInvalid(f"{p}: expected a JSON object at top level")
    return obj


# --- sequences ---------------------------------------------------------------


def save_sequence(seq: IndexSequence, path) -> None:
    write_json(path, seq.to_json_dict())


def load_sequence(path) -> IndexSequence:
    return IndexSequence.from_json_dict(read_json(path))


# --- constructions -----------------------------------------------------------


def construction_to_json_dict(cons: ShiftConstruction, fibers: int = 2) -> dict:
    """Serializable payload: the construction's own dict plus exact-angle extras."""
    if fibers < 1:
        raise ConfigInvalid(f"fiber count {fibers} must be >= 1")
    obj = cons.to_json_dict()
    obj["thetas_decimal"] = [decimal_string(p.theta) for p in cons.lambdas]
    obj["fibers"] = int(fibers)
    return obj


def save_construction(cons: ShiftConstruction, path, fibers: int = 2) -> None:
    write_json(path, construction_to_json_dict(cons, fibers))


def _budget_from_dict(obj: dict) -> LevelBudget:
    kwargs = {key: obj[key] for key in _BUDGET_KEYS}
    raw_delta = obj["delta"]
    kwargs["delta"] = None if raw_delta is None else fraction_from_string(raw_delta)
    return LevelBudget(**kwargs)


def construction_from_json_dict(obj: dict) -> tuple:
    """Rebuild (construction, fibers) from a stored payload and check integrity.

    The exact angles are the source of truth.  Gap and shift-weight tables are
    recomputed from them and compared bit-for-bit against the stored floats
    (JSON round-trips doubles exactly), so a corrupted or hand-edited artifact
    cannot slip through into verification.
    """
    try:
        seq = IndexSequence.from_json_dict(obj["sequence"])
        thetas = tuple(TorusPoint(fraction_from_string(s)) for s in obj["thetas"])
        schedule = WeightSchedule(
            tuple(obj["weights"]),
            model_C=float(obj["model_C"]),
            model_M=tuple(obj["model_M"]),
            i_decay=float(obj["i_decay"]),
        )
        cons = ShiftConstruction(
            seq=seq,
            lambdas=thetas,
            schedule=schedule,
            horizon=int(obj["horizon"]),
            gaps=tuple(float(g) for g in obj["gaps"]),
            alphas1=tuple(float(a) for a in obj["alphas_fiber1"]),
            budgets=tuple(_budget_from_dict(b) for b in obj["budgets"]),
        )
        stored_floats = [float(x) for x in obj["thetas_float"]]
        stored_certified = bool(obj["certified"])
        stored_nuclear = float(obj["nuclear_partial_sum"])
        fibers = int(obj.get("fibers", 2))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigInvalid(f"bad construction payload: {exc!r}") from exc

    L = cons.levels
    gaps = _gaps_table(thetas, L)
    expected_gaps = tuple(gaps[l] for l in range(2, L + 1))
    expected_alphas = tuple(_alphas_fiber1(gaps, schedule, L - 1))
    if cons.gaps != expected_gaps:
        raise ArtifactCorrupt("stored gap table differs from recomputation over exact angles")
    if cons.alphas1 != expected_alphas:
        raise ArtifactCorrupt("stored shift-weight table differs from recomputation")
    if stored_floats != [p.as_float() for p in thetas]:
        raise ArtifactCorrupt("stored float angles differ from the exact angles")
    if stored_certified != cons.certified:
        raise ArtifactCorrupt("stored certification flag contradicts the budget records")
    if stored_nuclear != cons.nuclear_partial_sum:
        raise ArtifactCorrupt("stored nuclear partial sum differs from recomputation")
    return cons, fibers


def load_construction(path) -> tuple:
    """Load (construction, fibers) from disk; see construction_from_json_dict."""
    return construction_from_json_dict(read_json(path))
