"""Torus arithmetic and separation analysis for power sequences.

Angles live in turns (fractions of a full circle) and are carried as exact
`fractions.Fraction` values wherever a downstream computation could hinge on
cancellation: the searches in this module certify fractional parts far below
double-precision resolution.  Floats appear only inside vectorized grid scans,
and every winning point is re-checked in exact arithmetic before it is
reported.

The central quantity is f_K(theta) = max over the first K sequence terms t of
the distance from t*theta to the nearest integer.  A sequence "separates" when
f_K stays bounded away from zero; the searches below estimate that floor and
hunt for points where it is beaten.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import (
    ConfigInvalid,
    DegenerateInput,
    DepthExceedsSequence,
    EmptyHorizons,
    HorizonExceedsSequence,
    InvalidEta,
    InvalidResolution,
    OutOfDomain,
    PreconditionViolated,
)

Angle = Union[Fraction, float, int]

TWO_PI = 2.0 * math.pi

# Verdict labels for classify_jamison.
SEPARATED = "SEPARATED"
VANISHING = "VANISHING"
INCONCLUSIVE = "INCONCLUSIVE"


def torus_norm(theta: Angle):
    """Distance from ``theta`` (in turns) to the nearest integer.

    Exact for Fraction input (returns a Fraction); floats return a float.
    Total on finite inputs, result in [0, 1/2].
    """
    if isinstance(theta, Fraction):
        frac = theta % 1
        return min(frac, 1 - frac)
    x = float(theta) % 1.0
    return min(x, 1.0 - x)


def turns_to_radians(theta: Angle) -> float:
    return TWO_PI * float(theta)


def radians_to_turns(angle: float) -> float:
    return float(angle) / TWO_PI


def chord_from_torus(delta: Angle) -> float:
    """Chord length |e^{2 pi i delta} - 1| = 2 sin(pi * torus_norm(delta))."""
    return 2.0 * math.sin(math.pi * float(torus_norm(delta)))


@dataclass(frozen=True)
class TorusPoint:
    """A point of the unit circle, stored as an exact angle in [0, 1) turns."""

    theta: Fraction

    def __post_init__(self):
        if not isinstance(self.theta, Fraction):
            object.__setattr__(self, "theta", Fraction(self.theta))
        object.__setattr__(self, "theta", self.theta % 1)

    @classmethod
    def from_turns(cls, theta: Angle) -> "TorusPoint":
        return cls(Fraction(theta))

    @classmethod
    def from_radians(cls, angle: float) -> "TorusPoint":
        return cls(Fraction(angle / TWO_PI))

    def as_float(self) -> float:
        return float(self.theta)

    def complex_value(self) -> complex:
        phi = TWO_PI * float(self.theta)
        return complex(math.cos(phi), math.sin(phi))

    def scaled(self, n: Angle) -> "TorusPoint":
        """The point at angle n*theta (the n-th power of the circle point)."""
        return TorusPoint(self.theta * Fraction(n))

    def signed_angle_to(self, other: "TorusPoint") -> Fraction:
        """Exact representative of (self - other) in (-1/2, 1/2]."""
        d = (self.theta - other.theta + Fraction(1, 2)) % 1
        return d - Fraction(1, 2)


def chord_distance(a: TorusPoint, b: TorusPoint) -> float:
    """|e^{2 pi i a} - e^{2 pi i b}|, in [0, 2]."""
    return chord_from_torus(a.theta - b.theta)


def unit_diff(a: TorusPoint, b: TorusPoint) -> complex:
    """e^{2 pi i a} - e^{2 pi i b} without subtractive cancellation.

    The difference is written as e^{2 pi i b} * (e^{2 pi i d} - 1) with d the
    exact angle difference, and the bracket expanded in half-angle form, so the
    result keeps full relative accuracy even when d is far below 1e-16 turns.
    """
    d = float(a.signed_angle_to(b))
    s = math.sin(math.pi * d)
    c = math.cos(math.pi * d)
    phi = TWO_PI * float(b.theta)
    rot = complex(math.cos(phi), math.sin(phi))
    return rot * (2.0 * s) * complex(-s, c)


@dataclass(frozen=True)
class IndexSequence:
    """Strictly increasing index sequence with first term 1.

    kind "integer" keeps the terms as ints; kind "real" allows arbitrary
    reals >= 1, with floor views available through ``integer_parts``.
    """

    terms: tuple
    kind: str = "integer"

    def __post_init__(self):
        if self.kind not in ("integer", "real"):
            raise ConfigInvalid(f"unknown sequence kind {self.kind!r}")
        terms = tuple(self.terms)
        if not terms:
            raise ConfigInvalid("sequence needs at least one term")
        if self.kind == "integer":
            for t in terms:
                if float(t) != int(t):
                    raise PreconditionViolated(f"non-integer term {t!r} in integer sequence")
            terms = tuple(int(t) for t in terms)
        else:
            terms = tuple(float(t) for t in terms)
        if terms[0] != 1:
            raise PreconditionViolated("first term must equal 1")
        for prev, cur in zip(terms, terms[1:]):
            if not cur > prev:
                raise PreconditionViolated("terms must be strictly increasing")
        if terms[0] < 1:
            raise PreconditionViolated("terms must be >= 1")
        object.__setattr__(self, "terms", terms)

    def __len__(self) -> int:
        return len(self.terms)

    def prefix(self, K: int) -> tuple:
        """First K terms. K is 1-based: prefix(1) == (1,)."""
        if not 1 <= K <= len(self.terms):
            raise HorizonExceedsSequence(f"horizon {K} outside 1..{len(self.terms)}")
        return self.terms[:K]

    @property
    def integer_parts(self) -> tuple:
        """Floors of the terms, possibly with repeats (a view, not a sequence)."""
        return tuple(int(math.floor(t)) for t in self.terms)

    # ---- factories -----------------------------------------------------

    @classmethod
    def integers_up_to(cls, K: int) -> "IndexSequence":
        return cls(tuple(range(1, K + 1)), "integer")

    @classmethod
    def factorials(cls, max_n: int) -> "IndexSequence":
        """Deduplicated factorials 0!..max_n! (so max_n=8 gives 8 terms)."""
        vals = sorted({math.factorial(n) for n in range(max_n + 1)})
        return cls(tuple(vals), "integer")

    @classmethod
    def powers_of_two(cls, count: int) -> "IndexSequence":
        return cls(tuple(2 ** k for k in range(count)), "integer")

    @classmethod
    def from_json_dict(cls, obj: dict) -> "IndexSequence":
        try:
            return cls(tuple(obj["terms"]), obj.get("kind", "integer"))
        except (KeyError, TypeError) as exc:
            raise ConfigInvalid(f"bad sequence payload: {exc}") from exc

    def to_json_dict(self) -> dict:
        return {"kind": self.kind, "terms": list(self.terms)}


def d_metric(a: TorusPoint, b: TorusPoint, seq: IndexSequence, K: int) -> float:
    """sup over the first K terms t of |a^t - b^t| (chordal units).

    Symmetric, satisfies the triangle inequality, non-decreasing in K, and
    dominates chord_distance whenever the sequence starts with 1.
    """
    terms = seq.prefix(K)
    delta = a.theta - b.theta
    best = 0.0
    for t in terms:
        best = max(best, chord_from_torus(delta * Fraction(t)))
    return best


# ---------------------------------------------------------------------------
# grid kernels
# ---------------------------------------------------------------------------


def _f_grid(terms: np.ndarray, thetas: np.ndarray, prune_above: Optional[float] = None) -> np.ndarray:
    """f_K(theta) = max_k torus_norm(t_k * theta), vectorized over thetas.

    With prune_above set, a theta whose running maximum has already crossed
    the threshold stops accumulating; its final entry is then only a lower
    bound, which is sound for callers hunting minima below the threshold.
    """
    best = np.zeros(thetas.shape, dtype=float)
    if prune_above is None:
        for lo in range(0, terms.size, 64):
            chunk = terms[lo:lo + 64]
            p = np.multiply.outer(chunk, thetas)
            p -= np.floor(p)
            np.minimum(p, 1.0 - p, out=p)
            np.maximum(best, p.max(axis=0), out=best)
        return best
    alive = np.ones(thetas.shape, dtype=bool)
    for lo in range(0, terms.size, 64):
        idx = np.flatnonzero(alive)
        if idx.size == 0:
            break
        chunk = terms[lo:lo + 64]
        p = np.multiply.outer(chunk, thetas[idx])
        p -= np.floor(p)
        np.minimum(p, 1.0 - p, out=p)
        cand = np.maximum(best[idx], p.max(axis=0))
        best[idx] = cand
        alive[idx] = cand <= prune_above
    return best


def _f_exact(terms: Sequence, theta: Fraction) -> Fraction:
    """Exact f_K at an exact angle. Terms may be ints or floats (both exact)."""
    best = Fraction(0)
    for t in terms:
        val = torus_norm(Fraction(t) * theta)
        if val > best:
            best = val
    return best


def _f_float(terms: np.ndarray, theta: float) -> float:
    p = (terms * theta) % 1.0
    return float(np.minimum(p, 1.0 - p).max())


def _ternary_refine(terms: np.ndarray, lo: float, hi: float, steps: int):
    """Shrink [lo, hi] towards a local minimum of f; returns (theta, f)."""
    best_t = lo
    best_f = _f_float(terms, lo)
    for point in (hi, 0.5 * (lo + hi)):
        f = _f_float(terms, point)
        if f < best_f:
            best_t, best_f = point, f
    for _ in range(max(0, steps)):
        m1 = lo + (hi - lo) / 3.0
        m2 = hi - (hi - lo) / 3.0
        f1 = _f_float(terms, m1)
        f2 = _f_float(terms, m2)
        if f1 < best_f:
            best_t, best_f = m1, f1
        if f2 < best_f:
            best_t, best_f = m2, f2
        if f1 <= f2:
            hi = m2
        else:
            lo = m1
        if hi - lo <= 1e-18:
            break
    return best_t, best_f


# ---------------------------------------------------------------------------
# separation constant
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SeparationReport:
    """Estimate of inf f_K over the resolved part of (0, 1/2].

    epsilon_hat_torus is an upper bound on the true infimum over the searched
    domain [theta_min, 1/2] (it is the exact f value at the reported witness).
    lower_bound_torus is the certified grid lower bound for the same domain,
    from the Lipschitz constant n_K.  boundary_limited marks the degenerate
    case where the default domain floor collapses to the grid resolution.
    """

    horizon: int
    epsilon_hat: float
    epsilon_hat_torus: float
    witness: TorusPoint
    grid_resolution: float
    theta_min: float
    lower_bound_torus: float
    boundary_limited: bool
    refine_steps: int

    def to_json_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "epsilon_hat": self.epsilon_hat,
            "epsilon_hat_torus": self.epsilon_hat_torus,
            "witness_theta": str(self.witness.theta),
            "witness_theta_float": self.witness.as_float(),
            "grid_resolution": self.grid_resolution,
            "theta_min": self.theta_min,
            "lower_bound_torus": self.lower_bound_torus,
            "boundary_limited": self.boundary_limited,
            "refine_steps": self.refine_steps,
        }


_GRID_BLOCK = 1 << 20


def separation_constant(
    seq: IndexSequence,
    K: int,
    resolution: float = 1e-6,
    refine_steps: int = 48,
    theta_min: Optional[float] = None,
) -> SeparationReport:
    """Estimate inf of f_K(theta) = max_{k<=K} torus_norm(t_k * theta).

    At any finite horizon the infimum over all of (0, 1/2] is trivially zero
    (f_K(theta) <= t_K * theta near zero), so the search runs over the resolved
    domain [theta_min, 1/2], default theta_min = 1/(2 t_K), where the largest
    multiplier has wrapped at least half a turn.  Pass theta_min explicitly to
    pin the domain (for example when comparing horizons on a common grid).

    Uniform grid of the stated resolution, then ternary refinement around the
    grid minimum.  The returned estimate is the exact f value at the witness,
    hence an upper bound on the domain infimum; lower_bound_torus certifies
    grid_min - n_K * resolution / 2 from the Lipschitz constant.
    """
    if not (isinstance(K, int) and K >= 1):
        raise HorizonExceedsSequence(f"horizon must be a positive integer, got {K!r}")
    terms_exact = seq.prefix(K)
    if not (0.0 < resolution < 0.5):
        raise InvalidResolution(f"resolution {resolution!r} outside (0, 1/2)")
    if refine_steps < 0:
        raise ConfigInvalid("refine_steps must be >= 0")

    terms = np.asarray(terms_exact, dtype=float)
    n_K = float(terms[-1])

    boundary_limited = False
    if theta_min is None:
        if n_K <= 1.0:
            theta_min = resolution
            boundary_limited = True
        else:
            theta_min = 1.0 / (2.0 * n_K)
    else:
        theta_min = float(theta_min)
        if not (0.0 < theta_min < 0.5):
            raise OutOfDomain(f"theta_min {theta_min!r} outside (0, 1/2)")

    # Pilot pass seeds the pruning threshold cheaply.
    pilot = np.linspace(theta_min, 0.5, 4097)
    f_pilot = _f_grid(terms, pilot)
    i = int(np.argmin(f_pilot))
    best_val = float(f_pilot[i])
    best_theta = float(pilot[i])

    n_points = int(math.floor((0.5 - theta_min) / resolution)) + 1
    for start in range(0, n_points, _GRID_BLOCK):
        stop = min(start + _GRID_BLOCK, n_points)
        thetas = theta_min + resolution * np.arange(start, stop, dtype=float)
        thetas = thetas[thetas <= 0.5]
        if thetas.size == 0:
            continue
        f = _f_grid(terms, thetas, prune_above=best_val)
        j = int(np.argmin(f))
        if f[j] < best_val:
            best_val = float(f[j])
            best_theta = float(thetas[j])
    grid_min = best_val

    if refine_steps:
        lo = max(theta_min, best_theta - resolution)
        hi = min(0.5, best_theta + resolution)
        t_ref, f_ref = _ternary_refine(terms, lo, hi, refine_steps)
        if f_ref < best_val:
            best_val, best_theta = f_ref, t_ref

    witness = TorusPoint(Fraction(best_theta))
    eps_torus = float(_f_exact(terms_exact, witness.theta))
    lower = max(0.0, grid_min - n_K * resolution / 2.0)

    return SeparationReport(
        horizon=K,
        epsilon_hat=2.0 * math.sin(math.pi * eps_torus),
        epsilon_hat_torus=eps_torus,
        witness=witness,
        grid_resolution=resolution,
        theta_min=theta_min,
        lower_bound_torus=lower,
        boundary_limited=boundary_limited,
        refine_steps=refine_steps,
    )


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClassificationResult:
    """Decay table plus a heuristic verdict.

    The verdict speaks only about the sampled horizons: separation proper is a
    statement about the infinite sequence and is not decidable here.
    """

    verdict: str
    reports: tuple
    floor: Optional[float]
    decay_slope: Optional[float]

    def table(self) -> dict:
        return {r.horizon: r.epsilon_hat_torus for r in self.reports}

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "floor": self.floor,
            "decay_slope": self.decay_slope,
            "reports": [r.to_json_dict() for r in self.reports],
        }


def classify_jamison(
    seq: IndexSequence,
    horizons: Sequence[int],
    resolution: float = 1e-6,
    refine_steps: int = 48,
) -> ClassificationResult:
    """Estimate the separation floor at several horizons and call a verdict.

    SEPARATED: the last three estimates sit above 1e-2 and either agree within
    10% or never decrease (a floor that rises as the grid loses the deepest
    valleys is separation evidence, not decay).
    VANISHING: the last three strictly decrease and either the final estimate
    is below 1e-2 or the log-log decay slope across all horizons is <= -0.5
    (slow 1/K-style decay is still decay; demanding the absolute threshold
    alone would misread short horizon tables).
    Anything else, or fewer than three horizons, is INCONCLUSIVE.
    """
    horizons = list(horizons)
    if not horizons:
        raise EmptyHorizons("need at least one horizon")
    for prev, cur in zip(horizons, horizons[1:]):
        if not cur > prev:
            raise ConfigInvalid("horizons must be strictly increasing")

    reports = tuple(
        separation_constant(seq, K, resolution=resolution, refine_steps=refine_steps)
        for K in horizons
    )
    estimates = [r.epsilon_hat_torus for r in reports]

    verdict = INCONCLUSIVE
    floor = None
    slope = None
    if len(estimates) >= 3:
        tail = estimates[-3:]
        hi, lo = max(tail), min(tail)
        stable = hi > 0 and (hi - lo) / hi <= 0.10
        rising = all(b >= a * 0.98 for a, b in zip(tail, tail[1:]))
        if lo >= 1e-2 and (stable or rising):
            verdict = SEPARATED
            floor = lo
        else:
            decreasing = all(b < a for a, b in zip(tail, tail[1:]))
            if decreasing and all(e > 0 for e in estimates):
                logk = np.log(np.asarray(horizons, dtype=float))
                loge = np.log(np.asarray(estimates, dtype=float))
                slope = float(np.polyfit(logk, loge, 1)[0])
                if estimates[-1] < 1e-2 or slope <= -0.5:
                    verdict = VANISHING
    return ClassificationResult(verdict=verdict, reports=reports, floor=floor, decay_slope=slope)


# ---------------------------------------------------------------------------
# near-return search
# ---------------------------------------------------------------------------


@functools.lru_cache(maxsize=128)
def _separation_profile(terms_exact: tuple, K: int, resolution: float) -> tuple:
    """Separation estimates at sub-horizons ~K/4, K/2, K (cached)."""
    kind = "real" if any(isinstance(t, float) for t in terms_exact) else "integer"
    seq = IndexSequence(terms_exact, kind=kind)
    hs = sorted({max(1, math.ceil(K / 4)), max(1, math.ceil(K / 2)), K})
    ests = []
    for h in hs:
        rep = separation_constant(seq, h, resolution=resolution, refine_steps=24)
        ests.append(rep.epsilon_hat_torus)
    return tuple(zip(hs, ests))


def _profile_decays(profile: tuple) -> bool:
    ests = [e for _, e in profile]
    if len(ests) < 2:
        return False
    non_increasing = all(b <= a * 1.02 for a, b in zip(ests, ests[1:]))
    return non_increasing and ests[-1] <= 0.9 * ests[0]


def near_return_search(
    seq: IndexSequence,
    K: int,
    eta: float,
    max_candidates: int = 8,
    exclude: Iterable[TorusPoint] = (),
    arc: Optional[tuple] = None,
    profile_resolution: float = 1e-5,
) -> list:
    """Find angles theta with f_K(theta) <= eta (torus units), up to a budget.

    Runs a multi-resolution grid descent over the resolved domain
    [1/(2 n_K), 1/2] intersected with ``arc``.  When that comes up short, and
    only when the sequence's own separation profile at sub-horizons decays
    (evidence that small f values are a feature of the sequence rather than an
    artifact of theta being below the horizon's resolution), the search admits
    constructed sub-resolution witnesses theta = 1/(m * n_K * 2^j), each
    re-verified exactly.  Sequences with a flat profile get no such fallback,
    so a separated family returns an empty list rather than the vacuous tiny
    angles every sequence has below 1/(2 n_K).  This gate is a documented
    heuristic; every returned point satisfies f_K(theta) <= eta exactly.

    Returns at most max_candidates TorusPoints, none in ``exclude``, sorted by
    (exact f value, theta).
    """
    if not eta > 0:
        raise InvalidEta(f"eta must be positive, got {eta!r}")
    terms_exact = seq.prefix(K)
    if max_candidates < 1:
        return []

    arc_lo = Fraction(0)
    arc_hi = Fraction(1, 2)
    if arc is not None:
        arc_lo, arc_hi = Fraction(arc[0]), Fraction(arc[1])
        if not (0 <= arc_lo < arc_hi <= Fraction(1, 2)):
            raise OutOfDomain(f"arc {arc!r} is not a sub-interval of (0, 1/2]")

    excluded = {p.theta for p in exclude}
    eta_t = float(eta)
    eta_exact = Fraction(eta)

    def admit(found: list, theta: Fraction, f_exact: Fraction) -> None:
        if theta in excluded or any(theta == t for t, _ in found):
            return
        if not (arc_lo < theta <= arc_hi):
            return
        found.append((theta, f_exact))

    # Vacuous threshold: half the torus diameter, every point qualifies.
    if eta_t >= 0.5:
        found = []
        step = (arc_hi - arc_lo) / (max_candidates + 1)
        for i in range(1, max_candidates + 1):
            theta = arc_lo + step * i
            admit(found, theta, _f_exact(terms_exact, theta))
            if len(found) >= max_candidates:
                break
        return [TorusPoint(t) for t, _ in sorted(found, key=lambda p: (p[1], p[0]))]

    terms = np.asarray(terms_exact, dtype=float)
    n_K = float(terms[-1])
    floor = 1.0 / (2.0 * n_K) if n_K > 1.0 else 1e-6

    found: list = []

    # Pass 1: multi-resolution descent over the resolved domain.
    dlo = max(float(arc_lo), floor)
    dhi = min(float(arc_hi), 0.5)
    if dlo < dhi:
        band_lo = dlo
        while band_lo < dhi and len(found) < max_candidates:
            band_hi = min(band_lo * 2.0, dhi)
            grid = np.linspace(band_lo, band_hi, 4097)
            spacing = (band_hi - band_lo) / 4096.0
            f = _f_grid(terms, grid, prune_above=eta_t * 1.5)
            hits = np.flatnonzero(f <= eta_t * 1.25)
            order = hits[np.argsort(f[hits], kind="stable")]
            for idx in order:
                if len(found) >= max_candidates:
                    break
                t0 = float(grid[idx])
                if any(abs(t0 - float(t)) < 2.0 * spacing for t, _ in found):
                    continue
                t_ref, _ = _ternary_refine(terms, max(dlo, t0 - spacing), min(dhi, t0 + spacing), 60)
                if any(abs(t_ref - float(t)) < spacing for t, _ in found):
                    continue
                theta = Fraction(t_ref)
                f_exact = _f_exact(terms_exact, theta)
                if f_exact <= eta_exact:
                    admit(found, theta, f_exact)
            band_lo = band_hi

    # Pass 2: constructed witnesses below the resolved floor, profile-gated.
    if len(found) < max_candidates:
        profile = _separation_profile(terms_exact, K, profile_resolution)
        if _profile_decays(profile):
            m0 = 2 * math.ceil(1.0 / eta_t)
            base = m0 * int(math.ceil(terms_exact[-1]))
            for j in range(max_candidates * 2):
                if len(found) >= max_candidates:
                    break
                theta = Fraction(1, base * (1 << j))
                f_exact = _f_exact(terms_exact, theta)
                if f_exact <= eta_exact:
                    admit(found, theta, f_exact)

    found.sort(key=lambda p: (p[1], p[0]))
    return [TorusPoint(t) for t, _ in found[:max_candidates]]


# ---------------------------------------------------------------------------
# integer-part reduction and the shifted check
# ---------------------------------------------------------------------------


def integer_part_reduce(seq: IndexSequence) -> tuple:
    """Floors of a real sequence, and the companion shifted sequence.

    Returns ((n_k), (1, n_k + 1 for k >= 1)), both deduplicated, sorted, and
    valid index sequences starting at 1.
    """
    if seq.kind != "real":
        raise PreconditionViolated("integer_part_reduce expects a real-kind sequence")
    floors = sorted(set(seq.integer_parts))
    shifted = sorted({1} | {n + 1 for n in floors[1:]})
    first = IndexSequence(tuple(floors), "integer")
    second = IndexSequence(tuple(shifted), "integer")
    return first, second


@dataclass(frozen=True)
class ShiftedSeparationRecord:
    passed: bool
    min_slack: float
    slacks: tuple
    eps: float


def shifted_separation_check(seq: IndexSequence, lam: TorusPoint, eps: float) -> ShiftedSeparationRecord:
    """Term-by-term check that |lam^{n+1} - 1| >= |lam^n - 1| - eps/2.

    Requires |lam - 1| <= eps/2; under that hypothesis the inequality is an
    algebraic identity, so the minimal slack should never dip below -1e-12.
    """
    if seq.kind != "integer":
        raise PreconditionViolated("shifted_separation_check expects an integer sequence")
    base = TorusPoint(Fraction(0))
    if chord_distance(lam, base) > eps / 2.0 + 1e-15:
        raise PreconditionViolated("need |lam - 1| <= eps/2")
    slacks = []
    for n in seq.terms:
        lhs = chord_from_torus(lam.theta * (n + 1))
        rhs = chord_from_torus(lam.theta * n) - eps / 2.0
        slacks.append(lhs - rhs)
    min_slack = min(slacks)
    return ShiftedSeparationRecord(
        passed=min_slack >= -1e-12, min_slack=min_slack, slacks=tuple(slacks), eps=eps
    )


# ---------------------------------------------------------------------------
# chord / torus sandwich
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ChordTorusReport:
    all_ok: bool
    count: int
    min_lower_ratio: float   # min over samples of chord / (4 ||theta||), >= 1
    max_upper_ratio: float   # max over samples of chord / (2 pi ||theta||), <= 1


def chord_torus_bounds_check(samples: Sequence[float]) -> ChordTorusReport:
    """Check 4||theta|| <= |e^{2 pi i theta} - 1| <= 2 pi ||theta|| on samples.

    The inequalities are exact; the check allows 1e-14 floating slack.
    Samples must lie in (0, 1/2].
    """
    if len(samples) == 0:
        raise DegenerateInput("no samples")
    all_ok = True
    min_lower = math.inf
    max_upper = 0.0
    for theta in samples:
        t = float(theta)
        if not (0.0 < t <= 0.5):
            raise OutOfDomain(f"sample {theta!r} outside (0, 1/2]")
        tn = torus_norm(t)
        chord = 2.0 * math.sin(math.pi * tn)
        if not (4.0 * tn <= chord + 1e-14 and chord <= TWO_PI * tn + 1e-14):
            all_ok = False
        min_lower = min(min_lower, chord / (4.0 * tn))
        max_upper = max(max_upper, chord / (TWO_PI * tn))
    return ChordTorusReport(all_ok=all_ok, count=len(samples), min_lower_ratio=min_lower, max_upper_ratio=max_upper)


# ---------------------------------------------------------------------------
# packing and dimension probes
# ---------------------------------------------------------------------------


def separated_family(seq: IndexSequence, K: int, eps: float, budget: int) -> list:
    """Greedy maximal packing of circle points at pairwise d_metric >= eps.

    Iterates a uniform grid of ``budget`` candidate angles over the full
    circle and keeps every point at distance >= eps from all kept points.
    d_metric depends only on the angle difference, which keeps the rejection
    test a one-dimensional scan.  The comparison carries 1e-12 slack so exact
    boundary packings (chord exactly eps apart) are not lost to rounding.
    """
    if eps <= 0.0:
        raise OutOfDomain(f"eps {eps!r} must be positive")
    if budget < 1:
        raise ConfigInvalid("budget must be >= 1")
    terms = np.asarray(seq.prefix(K), dtype=float)

    def d_of_delta(delta: float) -> float:
        p = (terms * delta) % 1.0
        np.minimum(p, 1.0 - p, out=p)
        return float((2.0 * np.sin(math.pi * p)).max())

    kept: list = []
    kept_angles: list = []
    for i in range(budget):
        theta = i / budget
        if all(d_of_delta(theta - a) >= eps - 1e-12 for a in kept_angles):
            kept_angles.append(theta)
            kept.append(TorusPoint(Fraction(i, budget)))
    return kept


def box_dimension_estimate(points: Sequence[TorusPoint], scales: Sequence[float]) -> float:
    """Least-squares box-counting slope of the point set, clamped to [0, 1]."""
    angles = sorted({p.theta for p in points})
    if len(angles) < 2:
        raise DegenerateInput("need at least 2 distinct points")
    scales = list(scales)
    if not scales or any(not (0.0 < s < 1.0) for s in scales):
        raise DegenerateInput("scales must lie in (0, 1)")
    for a, b in zip(scales, scales[1:]):
        if not b < a:
            raise DegenerateInput("scales must be strictly decreasing")
    xs = np.asarray([float(a) for a in angles])
    counts = []
    for delta in scales:
        bins = np.unique(np.floor(xs / delta))
        counts.append(len(bins))
    slope = float(np.polyfit(np.log(1.0 / np.asarray(scales)), np.log(np.asarray(counts, dtype=float)), 1)[0])
    return min(1.0, max(0.0, slope))


def lacunary_digit_points(seq: IndexSequence, depth: int, count: int, rng_seed: int) -> list:
    """Binary-digit combinations theta = sum a_k / (n_k 2^k), a_k in {0, 1}.

    A deterministic, seeded generator of families that tend to sit d-close for
    fast-growing sequences; a probe input, with no dimension claim attached.
    """
    if depth > len(seq) - 1:
        raise DepthExceedsSequence(f"depth {depth} needs {depth + 1} terms, have {len(seq)}")
    if count < 1:
        raise ConfigInvalid("count must be >= 1")
    rng = np.random.default_rng(rng_seed)
    digits = rng.integers(0, 2, size=(count, max(depth, 0)))
    out = []
    for row in digits:
        theta = Fraction(0)
        for k in range(1, depth + 1):
            if row[k - 1]:
                theta += Fraction(1, 2 ** k) / Fraction(seq.terms[k])
        out.append(TorusPoint(theta))
    return out


@dataclass(frozen=True)
class TwoPointScanReport:
    pairs: int
    max_invariance_gap: float
    min_pair_distance: float


def two_point_separation_scan(seq: IndexSequence, K: int, samples: int, rng_seed: int) -> TwoPointScanReport:
    """Sample pairs and confirm d(a, b) equals d(a - b, 0) numerically.

    The power-sequence metric depends only on the angle difference, so the
    one-point separation estimate also governs arbitrary pairs; this scan
    records the observed identity gap and the smallest sampled separation.
    """
    if samples < 1:
        raise ConfigInvalid("samples must be >= 1")
    rng = np.random.default_rng(rng_seed)
    zero = TorusPoint(Fraction(0))
    max_gap = 0.0
    min_d = math.inf
    for _ in range(samples):
        a = TorusPoint(Fraction(float(rng.random())))
        b = TorusPoint(Fraction(float(rng.random())))
        if a.theta == b.theta:
            continue
        d_ab = d_metric(a, b, seq, K)
        d_diff = d_metric(TorusPoint(a.theta - b.theta), zero, seq, K)
        max_gap = max(max_gap, abs(d_ab - d_diff))
        min_d = min(min_d, d_ab)
    return TwoPointScanReport(pairs=samples, max_invariance_gap=max_gap, min_pair_distance=min_d)
