"""Finite truncations of a diagonal-plus-backward-shift operator.

The operator acts on coordinates indexed by (fiber i, level l).  Its diagonal
part carries unimodular entries e^(2 pi i theta_l), one angle per level, and
its shift part couples level l to level l-1 within each fiber with a small
weight alpha_{i,l-1}.  The angles are not free: each new level must sit so
close to an earlier one (its "parent" under a triangular-block index map)
that three quantitative budgets hold simultaneously.  When a sequence of
powers is too well separated on the circle, no placement works and the build
reports which budget failed first; when the sequence has fast-vanishing
separation (factorial-like growth), the adaptive search succeeds and the
resulting matrix keeps all powers T^{n_k} within distance 1 of the diagonal
part.

Everything here is deterministic: the near-return search is grid plus exact
rational witnesses, budgets are re-checked with exact-angle arithmetic after
every selection, and builds with identical inputs produce identical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.signal import lfilter

from .errors import (
    BudgetInfeasible,
    BudgetsNotCertified,
    ConfigInvalid,
    HorizonExceedsSequence,
    IndexOutOfRange,
    InvalidIndex,
    NegativeDegree,
    NonSquare,
    PreconditionViolated,
    SizeMismatch,
    WeightListTooShort,
)
from .sequences import IndexSequence, TorusPoint, chord_distance, near_return_search, unit_diff

__all__ = [
    "fiber_map",
    "WeightSchedule",
    "LevelBudget",
    "ShiftConstruction",
    "TruncatedOperator",
    "EigenvectorChain",
    "build_construction",
    "symmetric_sum",
    "power_coefficient",
    "assemble_operator",
    "eigenvector_chain",
    "chain_difference_norms",
    "product_difference",
    "operator_norm",
    "matrix_power",
    "verify_partial_power_bound",
    "PowerBoundReport",
    "PowerBoundRow",
]


# --- fiber (parent) index map -------------------------------------------------


@lru_cache(maxsize=None)
def fiber_map(n: int) -> int:
    """Parent level of coordinate n under the triangular-block enumeration.

    Levels n = 2, 3, 4, ... are grouped into consecutive blocks of lengths
    1, 2, 3, ...; within the block covering n the value is the 1-based offset.
    Block b starts at n = 2 + b(b-1)/2, so the table begins

        n : 2  3  4  5  6  7  8  9  10 11 12 ...
        j : 1  1  2  1  2  3  1  2  3  4  1 ...

    Every value m >= 1 recurs once in each later block of length >= m, and
    j(n) < n always, which is what the level-placement recursion needs.
    """
    if isinstance(n, bool) or not isinstance(n, int):
        raise InvalidIndex(f"level index must be an int, got {n!r}")
    if n < 2:
        raise InvalidIndex(f"fiber map is defined for n >= 2, got {n}")
    t = n - 2
    b = (math.isqrt(8 * t + 1) - 1) // 2  # 0-based block index via triangular root
    return t - b * (b + 1) // 2 + 1


# --- weight bookkeeping ---------------------------------------------------------


@dataclass(frozen=True)
class WeightSchedule:
    """Level weights plus the constants of the canonical coordinate model.

    The effective per-fiber weight is
        w_{i,l} = w_l * i_decay**i / (model_C * model_M[l+1])
    with model_C = 1 and all functional norms model_M = 1 in the canonical
    model, so only the geometric fiber decay is active.
    """

    w: tuple
    model_C: float = 1.0
    model_M: tuple | None = None
    i_decay: float = 0.5

    def __post_init__(self):
        w = tuple(float(x) for x in self.w)
        if not w:
            raise ConfigInvalid("weight list is empty")
        if any(not math.isfinite(x) or x <= 0.0 for x in w):
            raise ConfigInvalid("all level weights must be positive and finite")
        object.__setattr__(self, "w", w)
        mm = self.model_M
        if mm is None:
            mm = tuple(1.0 for _ in range(len(w) + 1))
        else:
            mm = tuple(float(x) for x in mm)
        if any(self.model_C * m < 1.0 - 1e-12 for m in mm):
            raise ConfigInvalid("model requires model_C * model_M >= 1 at every level")
        object.__setattr__(self, "model_M", mm)
        if not (0.0 < self.i_decay < 1.0):
            raise ConfigInvalid("i_decay must lie in (0, 1)")

    def level_weight(self, level: int) -> float:
        """Bare weight w_l, 1-based."""
        if level < 1 or level > len(self.w):
            raise IndexOutOfRange(f"weight index {level} outside 1..{len(self.w)}")
        return self.w[level - 1]

    def functional_norm(self, level: int) -> float:
        if 1 <= level <= len(self.model_M):
            return self.model_M[level - 1]
        return 1.0

    def fiber_weight(self, i: int, level: int) -> float:
        """Effective weight w_{i,l} for fiber i >= 1."""
        if i < 1:
            raise IndexOutOfRange(f"fiber index {i} must be >= 1")
        scale = self.model_C * self.functional_norm(level + 1)
        return self.level_weight(level) * self.i_decay ** i / scale


# --- budget certificates ---------------------------------------------------------


@dataclass(frozen=True)
class LevelBudget:
    """Measured values and pass flags for the three placement predicates.

    gap_ratio: g_l <= g_{l-1} / (2^l w_{l-1})            (levels >= 3)
    eigvec:    both chain-difference parts <= 2^-(l+1)    (levels >= 3)
    tail_sum:  max over sequence powers of the weighted
               coefficient tail <= 2^(1-l)                (levels >= 2)

    Level 2 has no gap or eigenvector predicate; those flags are vacuously
    true there and the measured fields are zero.
    """

    level: int
    gap_ratio_ok: bool
    eigvec_budget_ok: bool
    tail_sum_ok: bool
    gap_value: float
    gap_bound: float
    eigvec_a: float
    eigvec_b: float
    eigvec_budget: float
    tail_max: float
    tail_budget: float
    eta_used: float
    delta: Fraction | None

    @property
    def all_ok(self) -> bool:
        return self.gap_ratio_ok and self.eigvec_budget_ok and self.tail_sum_ok

    def failing_predicate(self) -> str | None:
        if not self.gap_ratio_ok:
            return "gap_ratio"
        if not self.eigvec_budget_ok:
            return "eigvec_budget"
        if not self.tail_sum_ok:
            return "tail_sum"
        return None

    def to_json_dict(self) -> dict:
        return {
            "level": self.level,
            "gap_ratio_ok": self.gap_ratio_ok,
            "eigvec_budget_ok": self.eigvec_budget_ok,
            "tail_sum_ok": self.tail_sum_ok,
            "gap_value": self.gap_value,
            "gap_bound": self.gap_bound,
            "eigvec_a": self.eigvec_a,
            "eigvec_b": self.eigvec_b,
            "eigvec_budget": self.eigvec_budget,
            "tail_max": self.tail_max,
            "tail_budget": self.tail_budget,
            "eta_used": self.eta_used,
            "delta": None if self.delta is None else f"{self.delta.numerator}/{self.delta.denominator}",
        }


# --- symmetric sums and coefficient rows -----------------------------------------

_DP_CUTOFF = 512  # above this degree the linear-filter evaluation is much faster


def symmetric_sum(lambdas, m: int) -> complex:
    """Complete homogeneous symmetric sum h_m over the given variables.

    Implements h_m(x_1..x_r) = h_m(x_1..x_{r-1}) + x_r h_{m-1}(x_1..x_r) by
    in-place dynamic programming; for large m each added variable is a single
    IIR filter pass, which keeps the factorial-scale degrees cheap.
    """
    if m < 0:
        raise NegativeDegree(f"degree {m} must be >= 0")
    xs = [complex(x) for x in lambdas]
    if not xs:
        raise PreconditionViolated("symmetric_sum needs at least one variable")
    if m == 0:
        return 1 + 0j
    if m <= _DP_CUTOFF:
        h = [1 + 0j] + [0j] * m
        for x in xs:
            for t in range(1, m + 1):
                h[t] += x * h[t - 1]
        return h[m]
    h = np.zeros(m + 1, dtype=complex)
    h[0] = 1.0
    for x in xs:
        h = lfilter([1.0 + 0j], [1.0 + 0j, -x], h)
    return complex(h[m])


def _abs_coefficient_row(lams: list, level: int, n: int) -> dict:
    """|h_{n-(level-k)}(lambda_k..lambda_level)| for k = max(1, level-n)..level-1.

    Shares one filter cascade across all k: starting from the single variable
    lambda_level, each step prepends one more variable, and the needed degree
    for that k is read off before the next extension.
    """
    kmin = max(1, level - n)
    maxdeg = n - 1
    base = np.empty(maxdeg + 1, dtype=complex)
    base[0] = 1.0
    if maxdeg >= 1:
        base[1:] = np.cumprod(np.full(maxdeg, lams[level - 1], dtype=complex))
    out = {}
    h = base
    for k in range(level - 1, kmin - 1, -1):
        h = lfilter([1.0 + 0j], [1.0 + 0j, -lams[k - 1]], h)
        out[k] = float(abs(h[n - (level - k)]))
    return out


def _suffix_weight_products(schedule: WeightSchedule, level: int) -> dict:
    """W(k) = w_k * w_{k+1} * ... * w_{level-1} for k = 1..level-1."""
    out = {}
    acc = 1.0
    for k in range(level - 1, 0, -1):
        acc *= schedule.level_weight(k)
        out[k] = acc
    return out


def _tail_sum(thetas, schedule: WeightSchedule, gaps: dict, level: int, n: int) -> float:
    """Weighted coefficient tail for one power n at one level, fiber-summed bound."""
    lams = [p.complex_value() for p in thetas[:level]]
    row = _abs_coefficient_row(lams, level, n)
    wprod = _suffix_weight_products(schedule, level)
    g_level = gaps[level]
    total = 0.0
    for k, s_abs in row.items():
        gk = 1.0 if k == 1 else gaps[k]
        total += wprod[k] * (g_level / gk) * s_abs
    return total


# --- stable product differences and eigenvector chains ----------------------------


def product_difference(x: TorusPoint, y: TorusPoint, nodes) -> complex:
    """prod(x - a_q) - prod(y - a_q), evaluated without catastrophic cancellation.

    Uses the telescoping identity
        prod(x-a) - prod(y-a) = (x-y) * sum_r prod_{q<r}(x-a_q) prod_{q>r}(y-a_q)
    where every factor, including x - y itself, comes from exact angle
    differences, so the result keeps full relative accuracy even when x and y
    are within 1e-80 of each other on the circle.
    """
    nodes = list(nodes)
    r = len(nodes)
    if r == 0:
        return 0j
    fx = [unit_diff(x, a) for a in nodes]
    fy = [unit_diff(y, a) for a in nodes]
    prefix = [1 + 0j] * (r + 1)
    for q in range(r):
        prefix[q + 1] = prefix[q] * fx[q]
    suffix = [1 + 0j] * (r + 1)
    for q in range(r - 1, -1, -1):
        suffix[q] = suffix[q + 1] * fy[q]
    total = 0j
    for q in range(r):
        total += prefix[q] * suffix[q + 1]
    return unit_diff(x, y) * total


def _alphas_fiber1(gaps: dict, schedule: WeightSchedule, upto: int) -> list:
    """Fiber-1 shift weights alpha_{1,l} for l = 1..upto."""
    out = []
    for l in range(1, upto + 1):
        fw = schedule.fiber_weight(1, l)
        if l == 1:
            out.append(fw * gaps[2])
        else:
            out.append(fw * gaps[l + 1] / gaps[l])
    return out


def _chain_coeffs(thetas, alphas1, n: int) -> list:
    """Fiber-1 eigenvector coefficients c_1..c_n for the level-n eigenvalue."""
    coeffs = [1 + 0j]
    lam_n = thetas[n - 1]
    for m in range(1, n):
        coeffs.append(coeffs[-1] * unit_diff(lam_n, thetas[m - 1]) / alphas1[m - 1])
    return coeffs


# --- per-level budget evaluation ----------------------------------------------------


def _gaps_table(thetas, upto: int) -> dict:
    return {
        l: chord_distance(thetas[l - 1], thetas[fiber_map(l) - 1])
        for l in range(2, upto + 1)
    }


def _evaluate_level_budget(
    seq: IndexSequence,
    thetas,
    schedule: WeightSchedule,
    K: int,
    level: int,
    eta_used: float = float("nan"),
    delta: Fraction | None = None,
) -> LevelBudget:
    """Measure all three placement predicates at one level against live angles."""
    terms = seq.prefix(K)
    gaps = _gaps_table(thetas, level)
    if level >= 3:
        gap_bound = gaps[level - 1] / (2 ** level * schedule.level_weight(level - 1))
        gap_ok = gaps[level] <= gap_bound
        alphas1 = _alphas_fiber1(gaps, schedule, level - 1)
        j = fiber_map(level)
        lam_l, lam_j = thetas[level - 1], thetas[j - 1]
        a_sq = 0.0
        for m in range(2, j + 1):
            denom_m = math.prod(alphas1[: m - 1], start=1 + 0j)
            diff = product_difference(lam_l, lam_j, thetas[: m - 1]) / denom_m
            a_sq += abs(diff) ** 2
        chain_l = _chain_coeffs(thetas, alphas1, level)
        b_sq = sum(abs(c) ** 2 for c in chain_l[j:])
        eig_a, eig_b = math.sqrt(a_sq), math.sqrt(b_sq)
        eig_budget = 2.0 ** -(level + 1)
        eig_ok = eig_a <= eig_budget and eig_b <= eig_budget
    else:
        gap_bound = math.inf
        gap_ok = True
        eig_a = eig_b = 0.0
        eig_budget = math.inf
        eig_ok = True
    tail_budget = 2.0 ** (1 - level)
    tail_max = max(_tail_sum(thetas, schedule, gaps, level, n) for n in terms)
    tail_ok = tail_max <= tail_budget
    return LevelBudget(
        level=level,
        gap_ratio_ok=gap_ok,
        eigvec_budget_ok=eig_ok,
        tail_sum_ok=tail_ok,
        gap_value=gaps[level],
        gap_bound=gap_bound,
        eigvec_a=eig_a,
        eigvec_b=eig_b,
        eigvec_budget=eig_budget,
        tail_max=tail_max,
        tail_budget=tail_budget,
        eta_used=eta_used,
        delta=delta,
    )


# --- the construction record ----------------------------------------------------------


@dataclass(frozen=True)
class ShiftConstruction:
    """All parameters of one truncated operator, with budget certificates.

    gaps[l-2] is the chord distance from level l to its parent level, for
    l = 2..L; alphas1[l-1] is the fiber-1 shift weight for l = 1..L-1.  The
    fiber-i weight follows by multiplying with i_decay**(i-1).
    """

    seq: IndexSequence
    lambdas: tuple
    schedule: WeightSchedule
    horizon: int
    gaps: tuple
    alphas1: tuple
    budgets: tuple

    def __post_init__(self):
        if len(set(p.theta for p in self.lambdas)) != len(self.lambdas):
            raise PreconditionViolated("eigenvalue angles must be pairwise distinct")
        if any(g <= 0.0 for g in self.gaps):
            raise PreconditionViolated("all parent gaps must be positive")

    @property
    def levels(self) -> int:
        return len(self.lambdas)

    @property
    def certified(self) -> bool:
        return len(self.budgets) == self.levels - 1 and all(b.all_ok for b in self.budgets)

    def gap(self, level: int) -> float:
        if level < 2 or level > self.levels:
            raise IndexOutOfRange(f"gap index {level} outside 2..{self.levels}")
        return self.gaps[level - 2]

    def gap_for_tail(self, k: int) -> float:
        # level 1 has no parent; the tail formula treats its gap as 1
        return 1.0 if k == 1 else self.gap(k)

    def alpha(self, i: int, level: int) -> float:
        if i < 1:
            raise IndexOutOfRange(f"fiber index {i} must be >= 1")
        if level < 1 or level > self.levels - 1:
            raise IndexOutOfRange(f"shift weight index {level} outside 1..{self.levels - 1}")
        return self.alphas1[level - 1] * self.schedule.i_decay ** (i - 1)

    def nuclear_terms(self) -> list:
        """(level, w_l g_{l+1} / g_l) pairs of the nuclear-series partial sum."""
        out = [(1, self.schedule.level_weight(1) * self.gap(2))]
        for l in range(2, self.levels):
            out.append((l, self.schedule.level_weight(l) * self.gap(l + 1) / self.gap(l)))
        return out

    @property
    def nuclear_partial_sum(self) -> float:
        return sum(t for _, t in self.nuclear_terms())

    @classmethod
    def from_parameters(cls, seq: IndexSequence, thetas, w, horizon: int) -> "ShiftConstruction":
        """Assemble a construction from explicit angles, measuring budgets honestly.

        No search happens here; the budgets simply record whether the supplied
        spectrum satisfies each predicate.  Synthetic well-separated spectra
        will come out uncertified, which is exactly what downstream gates need.
        """
        schedule = w if isinstance(w, WeightSchedule) else WeightSchedule(tuple(w))
        points = tuple(p if isinstance(p, TorusPoint) else TorusPoint(Fraction(p)) for p in thetas)
        L = len(points)
        if L < 2:
            raise ConfigInvalid("a construction needs at least two levels")
        if len(schedule.w) < L:
            raise WeightListTooShort(f"{len(schedule.w)} weights for {L} levels")
        if horizon < 1 or horizon > len(seq):
            raise HorizonExceedsSequence(f"horizon {horizon} outside 1..{len(seq)}")
        gaps = _gaps_table(points, L)
        budgets = tuple(
            _evaluate_level_budget(seq, points, schedule, horizon, level)
            for level in range(2, L + 1)
        )
        return cls(
            seq=seq,
            lambdas=points,
            schedule=schedule,
            horizon=horizon,
            gaps=tuple(gaps[l] for l in range(2, L + 1)),
            alphas1=tuple(_alphas_fiber1(gaps, schedule, L - 1)),
            budgets=budgets,
        )

    def to_json_dict(self) -> dict:
        return {
            "sequence": self.seq.to_json_dict(),
            "horizon": self.horizon,
            "thetas": [f"{p.theta.numerator}/{p.theta.denominator}" for p in self.lambdas],
            "thetas_float": [p.as_float() for p in self.lambdas],
            "weights": list(self.schedule.w),
            "model_C": self.schedule.model_C,
            "model_M": list(self.schedule.model_M),
            "i_decay": self.schedule.i_decay,
            "gaps": list(self.gaps),
            "alphas_fiber1": list(self.alphas1),
            "nuclear_partial_sum": self.nuclear_partial_sum,
            "certified": self.certified,
            "budgets": [b.to_json_dict() for b in self.budgets],
        }


# --- adaptive build ---------------------------------------------------------------------


def _eta_override(eta_schedule, level: int):
    if eta_schedule is None:
        return None
    if isinstance(eta_schedule, dict):
        return eta_schedule.get(level)
    idx = level - 2
    if 0 <= idx < len(eta_schedule):
        return eta_schedule[idx]
    return None


def _chord_to_eta(chord_bound: float) -> float:
    """Torus-norm search target guaranteeing a chord bound, with quarter margin.

    Since the index sequence starts at 1, any offset delta accepted at target
    eta satisfies |delta| <= eta on the torus, hence its chord is at most
    2 sin(pi eta).  Inverting and keeping a quarter of the slack absorbs grid
    granularity.
    """
    x = min(1.0, max(chord_bound, 0.0) / 2.0)
    return math.asin(x) / math.pi / 4.0


def _level_search_target(seq, thetas, schedule, K, level) -> float:
    """Back-solved eta target making all level predicates attainable."""
    terms = seq.prefix(K)
    if level == 2:
        w1 = schedule.level_weight(1)
        return _chord_to_eta(min(2.0, 1.0 / (2.0 * w1)))
    gaps = _gaps_table(thetas, level - 1)
    j = fiber_map(level)
    lam_j = thetas[j - 1]
    # (a) gap recursion
    g_a = gaps[level - 1] / (2 ** level * schedule.level_weight(level - 1))
    # (b) eigenvector budgets, linearized in the new gap with a 2x safety factor
    alphas1 = _alphas_fiber1(gaps, schedule, level - 2)
    budget = 2.0 ** -(level + 1)
    a_slope_sq = 0.0
    for m in range(2, j + 1):
        denom = abs(math.prod(alphas1[: m - 1], start=1 + 0j))
        s = 0.0
        for r in range(m - 1):
            part = 1.0
            for q in range(m - 1):
                if q != r:
                    part *= abs(unit_diff(lam_j, thetas[q]))
            s += part
        a_slope_sq += (s / denom) ** 2
    b_limit = 1.0
    for q in range(level - 1):
        if q != j - 1:
            b_limit *= abs(unit_diff(lam_j, thetas[q]))
    for q in range(1, level):
        b_limit /= schedule.fiber_weight(1, q)
    if b_limit > budget:
        raise BudgetInfeasible(
            level,
            "eigvec_budget",
            f"offset-independent chain coefficient {b_limit:.3e} exceeds budget {budget:.3e}",
        )
    b_slope_sq = 0.0
    for m in range(j + 1, level):
        denom = abs(math.prod(alphas1[: m - 1], start=1 + 0j))
        part = 1.0
        for q in range(m - 1):
            if q != j - 1:
                part *= abs(unit_diff(lam_j, thetas[q]))
        b_slope_sq += (part / denom) ** 2
    g_b = math.inf
    if a_slope_sq > 0.0:
        g_b = min(g_b, budget / (2.0 * math.sqrt(a_slope_sq)))
    headroom = budget ** 2 - b_limit ** 2
    if b_slope_sq > 0.0:
        g_b = min(g_b, math.sqrt(max(headroom, 0.0)) / (2.0 * math.sqrt(b_slope_sq)))
    # (c) weighted tail with the binomial estimate for the coefficient sums
    wprod = _suffix_weight_products(schedule, level)
    worst = 0.0
    for n in terms:
        kmin = max(1, level - n)
        tot = 0.0
        for k in range(kmin, level):
            gk = 1.0 if k == 1 else gaps[k]
            tot += wprod[k] * math.comb(n, level - k) / gk
        worst = max(worst, tot)
    g_c = (2.0 ** (1 - level)) / worst if worst > 0.0 else math.inf
    return _chord_to_eta(min(g_a, g_b, g_c))


def build_construction(
    seq: IndexSequence,
    L: int,
    K: int,
    w,
    eta_schedule=None,
    search_budget: int = 6,
) -> ShiftConstruction:
    """Adaptively place L eigenvalue angles for the given sequence horizon.

    The first angle is fixed with chord distance exactly 1/3 from the point 1
    (so the whole spectrum stays in the right half-plane and the construction
    lifts to a one-parameter matrix family later).  Every further level l
    searches for a near-return offset delta of the power sequence, places its
    angle at parent minus delta, and accepts the first candidate that passes
    all three budget predicates re-checked exactly.  Failing levels shrink the
    search target sixteen-fold up to search_budget rounds before giving up
    with the level and predicate that blocked.
    """
    if L < 2:
        raise ConfigInvalid(f"need at least 2 levels, got {L}")
    if seq.kind != "integer":
        raise PreconditionViolated("construction requires an integer sequence; reduce real input first")
    if K < 1 or K > len(seq):
        raise HorizonExceedsSequence(f"horizon {K} outside 1..{len(seq)}")
    if search_budget < 1:
        raise ConfigInvalid("search_budget must be >= 1")
    schedule = w if isinstance(w, WeightSchedule) else WeightSchedule(tuple(w))
    if len(schedule.w) < L:
        raise WeightListTooShort(f"{len(schedule.w)} weights supplied for {L} levels")

    theta1 = TorusPoint(Fraction(math.asin(1.0 / 6.0) / math.pi))
    thetas = [theta1]
    budgets = []
    for level in range(2, L + 1):
        j = fiber_map(level)
        parent = thetas[j - 1]
        eta = _eta_override(eta_schedule, level)
        if eta is None:
            eta = _level_search_target(seq, thetas, schedule, K, level)
        accepted = None
        last_failure = None
        for _ in range(search_budget):
            candidates = near_return_search(
                seq, K, eta, max_candidates=4, arc=(Fraction(0), parent.theta)
            )
            for point in candidates:
                delta = point.theta
                new_theta = parent.theta - delta
                if not 0 < new_theta < theta1.theta:
                    continue
                if any(new_theta == p.theta for p in thetas):
                    continue
                trial = thetas + [TorusPoint(new_theta)]
                record = _evaluate_level_budget(seq, trial, schedule, K, level, eta, delta)
                if record.all_ok:
                    accepted = (TorusPoint(new_theta), record)
                    break
                last_failure = record
            if accepted is not None:
                break
            eta /= 16.0
        if accepted is None:
            if last_failure is not None:
                raise BudgetInfeasible(
                    level,
                    last_failure.failing_predicate() or "tail_sum",
                    f"no candidate passed within {search_budget} search rounds",
                )
            raise BudgetInfeasible(
                level, "eta_search", "near-return search found no usable candidates"
            )
        thetas.append(accepted[0])
        budgets.append(accepted[1])

    gaps = _gaps_table(thetas, L)
    return ShiftConstruction(
        seq=seq,
        lambdas=tuple(thetas),
        schedule=schedule,
        horizon=K,
        gaps=tuple(gaps[l] for l in range(2, L + 1)),
        alphas1=tuple(_alphas_fiber1(gaps, schedule, L - 1)),
        budgets=tuple(budgets),
    )


# --- matrix assembly and powers ------------------------------------------------------


@dataclass(frozen=True)
class TruncatedOperator:
    """Dense matrix of one finite section, with its level/fiber layout.

    Basis slots are ordered level-major: slot(i, l) = (l-1)*fibers + (i-1).
    The matrix is upper triangular: unimodular diagonal plus one super-band
    linking (i, l) to (i, l-1).
    """

    levels: int
    fibers: int
    matrix: np.ndarray

    def slot(self, i: int, level: int) -> int:
        if not (1 <= i <= self.fibers and 1 <= level <= self.levels):
            raise IndexOutOfRange(f"slot ({i}, {level}) outside {self.fibers} fibers x {self.levels} levels")
        return (level - 1) * self.fibers + (i - 1)

    def diagonal_part(self) -> np.ndarray:
        return np.diag(np.diag(self.matrix))

    def shift_part(self) -> np.ndarray:
        return self.matrix - self.diagonal_part()


def assemble_operator(cons: ShiftConstruction, L: int, I: int) -> TruncatedOperator:
    """Materialize the L-level, I-fiber section as a dense complex matrix."""
    if L < 1 or L > cons.levels:
        raise SizeMismatch(f"requested {L} levels, construction has {cons.levels}")
    if I < 1:
        raise SizeMismatch(f"fiber count {I} must be >= 1")
    size = L * I
    M = np.zeros((size, size), dtype=complex)
    for l in range(1, L + 1):
        lam = cons.lambdas[l - 1].complex_value()
        if abs(abs(lam) - 1.0) > 1e-14:
            raise PreconditionViolated("diagonal entry drifted off the unit circle")
        for i in range(1, I + 1):
            M[(l - 1) * I + (i - 1), (l - 1) * I + (i - 1)] = lam
    for l in range(2, L + 1):
        for i in range(1, I + 1):
            M[(l - 2) * I + (i - 1), (l - 1) * I + (i - 1)] = cons.alpha(i, l - 1)
    M.flags.writeable = False
    return TruncatedOperator(levels=L, fibers=I, matrix=M)


def matrix_power(M: np.ndarray, n: int) -> np.ndarray:
    """Integer matrix power by binary exponentiation (n >= 0)."""
    if n < 0:
        raise ConfigInvalid("matrix powers here are for n >= 0")
    return np.linalg.matrix_power(np.asarray(M, dtype=complex), n)


def power_coefficient(cons: ShiftConstruction, k: int, l: int, i: int, n: int) -> complex:
    """Entry of T^n linking slot (i, k) to slot (i, l), in closed form.

    Zero when k > l or when the band offset l - k exceeds n; the diagonal case
    is the exact-angle power of the level eigenvalue; otherwise the product of
    band weights times a complete homogeneous sum of the spanned eigenvalues.
    """
    L = cons.levels
    if not (1 <= k <= L and 1 <= l <= L):
        raise IndexOutOfRange(f"indices ({k}, {l}) outside 1..{L}")
    if i < 1:
        raise IndexOutOfRange(f"fiber index {i} must be >= 1")
    if n < 0:
        raise IndexOutOfRange(f"power {n} must be >= 0")
    if k > l or l - k > n:
        return 0j
    if k == l:
        return cons.lambdas[k - 1].scaled(n).complex_value()
    alpha_prod = 1.0
    for q in range(k, l):
        alpha_prod *= cons.alpha(i, q)
    lams = [cons.lambdas[q - 1].complex_value() for q in range(k, l + 1)]
    return alpha_prod * symmetric_sum(lams, n - (l - k))


# --- eigenvector chains ------------------------------------------------------------


@dataclass(frozen=True)
class EigenvectorChain:
    """Fiber-1 eigenvector coefficients c_1..c_n for the level-n eigenvalue."""

    n: int
    coeffs: tuple

    def padded(self, levels: int) -> np.ndarray:
        out = np.zeros(levels, dtype=complex)
        out[: self.n] = self.coeffs
        return out

    def embed(self, op: TruncatedOperator) -> np.ndarray:
        vec = np.zeros(op.levels * op.fibers, dtype=complex)
        for m in range(1, self.n + 1):
            vec[op.slot(1, m)] = self.coeffs[m - 1]
        return vec


def eigenvector_chain(cons: ShiftConstruction, n: int) -> EigenvectorChain:
    """Closed-form chain c_{m+1} = c_m (lambda_n - lambda_m) / alpha_{1,m}, c_1 = 1."""
    if n < 1 or n > cons.levels:
        raise IndexOutOfRange(f"chain level {n} outside 1..{cons.levels}")
    coeffs = _chain_coeffs(cons.lambdas, cons.alphas1, n)
    return EigenvectorChain(n=n, coeffs=tuple(coeffs))


def chain_difference_norms(cons: ShiftConstruction, n: int) -> tuple:
    """(head, tail) 2-norm parts of u^(n) - u^(parent of n).

    The head compares shared coordinates through the stable product-difference
    form; the tail collects the coefficients the longer chain adds.  Their
    squared sum is the full squared distance between the two eigenvectors.
    """
    if n < 2 or n > cons.levels:
        raise IndexOutOfRange(f"difference needs 2 <= n <= {cons.levels}")
    j = fiber_map(n)
    lam_n, lam_j = cons.lambdas[n - 1], cons.lambdas[j - 1]
    a_sq = 0.0
    for m in range(2, j + 1):
        denom = math.prod(cons.alphas1[: m - 1], start=1 + 0j)
        diff = product_difference(lam_n, lam_j, cons.lambdas[: m - 1]) / denom
        a_sq += abs(diff) ** 2
    chain = _chain_coeffs(cons.lambdas, cons.alphas1, n)
    b_sq = sum(abs(c) ** 2 for c in chain[j:])
    return math.sqrt(a_sq), math.sqrt(b_sq)


# --- norms and verification -----------------------------------------------------------


def _two_norm_power_iteration(M: np.ndarray):
    """Largest singular value by power iteration on the Gram matrix.

    Returns None when the two-sided certificate (Rayleigh value below, value
    plus residual above, assuming the iterate overlaps the top eigenspace)
    fails to reach relative width 1e-10; callers then fall back to a dense
    decomposition, which at these matrix sizes is equally trustworthy.
    """
    A = M.conj().T @ M
    size = A.shape[0]
    v = np.ones(size, dtype=complex) + np.arange(size) / (10.0 * size)
    v /= np.linalg.norm(v)
    rho_prev = -1.0
    stable = 0
    for _ in range(2000):
        Av = A @ v
        norm_Av = np.linalg.norm(Av)
        if norm_Av == 0.0:
            return 0.0
        rho = float(np.real(np.vdot(v, Av)))
        resid = float(np.linalg.norm(Av - rho * v))
        scale = max(rho, 1e-300)
        if resid <= 1e-10 * scale and abs(rho - rho_prev) <= 1e-12 * scale:
            stable += 1
            if stable >= 3:
                return math.sqrt(max(rho, 0.0))
        else:
            stable = 0
        rho_prev = rho
        v = Av / norm_Av
    return None


def operator_norm(M, p) -> float:
    """Induced p-norm for p in {1, 2, inf}; 1 and inf are exact absolute sums."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise NonSquare(f"matrix of shape {M.shape} is not square")
    key = str(p).lower()
    if key == "1":
        return float(np.max(np.sum(np.abs(M), axis=0))) if M.size else 0.0
    if key == "inf":
        return float(np.max(np.sum(np.abs(M), axis=1))) if M.size else 0.0
    if key == "2":
        result = _two_norm_power_iteration(M)
        if result is None:
            result = float(np.linalg.norm(M, 2))
        return result
    raise ConfigInvalid(f"unsupported norm order {p!r}; use 1, 2, or inf")


@dataclass(frozen=True)
class PowerBoundRow:
    k: int
    n_k: int
    norm_diff: float
    norm_T: float
    analytic_bound: float
    diff_ok: bool
    t_ok: bool
    analytic_ok: bool

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "n_k": self.n_k,
            "norm_diff": self.norm_diff,
            "norm_T": self.norm_T,
            "analytic_bound": self.analytic_bound,
            "diff_ok": self.diff_ok,
            "t_ok": self.t_ok,
            "analytic_ok": self.analytic_ok,
        }


@dataclass(frozen=True)
class PowerBoundReport:
    p: str
    levels: int
    fibers: int
    rows: tuple
    fiber_truncation_bound: float

    @property
    def all_ok(self) -> bool:
        return all(r.diff_ok and r.t_ok and r.analytic_ok for r in self.rows)

    def csv_rows(self) -> list:
        return [(r.k, r.n_k, r.norm_diff, r.norm_T, r.analytic_bound) for r in self.rows]

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "levels": self.levels,
            "fibers": self.fibers,
            "all_ok": self.all_ok,
            "fiber_truncation_bound": self.fiber_truncation_bound,
            "rows": [r.to_json_dict() for r in self.rows],
        }


def analytic_power_bound(cons: ShiftConstruction, L: int, n: int) -> float:
    """Upper bound on ||T^n - D^n|| from the weighted coefficient tails.

    Sums the per-level tail bounds with measured coefficient magnitudes.  The
    fiber decay only shrinks individual entries, and the bound dominates the
    max column sum, the max row sum, and hence also the spectral norm.
    """
    gaps = {l: cons.gap(l) for l in range(2, L + 1)}
    total = 0.0
    for level in range(2, L + 1):
        total += _tail_sum(cons.lambdas, cons.schedule, gaps, level, n)
    return total


def verify_partial_power_bound(cons: ShiftConstruction, L: int, I: int, P: int, p) -> PowerBoundReport:
    """Measure ||T^{n_k} - D^{n_k}|| and ||T^{n_k}|| for k <= P against the bounds.

    Both powers ride the same binary-exponentiation route, so the diagonal of
    the difference cancels exactly and only the genuine band contribution is
    measured.  Each row also carries the analytic tail bound; a certified
    construction must come out with measured <= 1, operator power <= 2, and
    analytic bound at least the measured value.
    """
    if not cons.certified:
        raise BudgetsNotCertified("verification requires a construction whose budgets all passed")
    if P < 1 or P > cons.horizon:
        raise HorizonExceedsSequence(f"powers horizon {P} outside 1..{cons.horizon}")
    op = assemble_operator(cons, L, I)
    D = op.diagonal_part()
    rows = []
    for k in range(1, P + 1):
        n = cons.seq.terms[k - 1]
        Tn = matrix_power(op.matrix, n)
        Dn = matrix_power(D, n)
        norm_diff = operator_norm(Tn - Dn, p)
        norm_T = operator_norm(Tn, p)
        bound = analytic_power_bound(cons, L, n)
        rows.append(
            PowerBoundRow(
                k=k,
                n_k=n,
                norm_diff=norm_diff,
                norm_T=norm_T,
                analytic_bound=bound,
                diff_ok=norm_diff <= 1.0 + 1e-8,
                t_ok=norm_T <= 2.0 + 1e-8,
                analytic_ok=bound >= norm_diff - 1e-8,
            )
        )
    # levels truncated to I fibers: dropped entries shrink geometrically
    trunc = cons.schedule.i_decay ** I / (1.0 - cons.schedule.i_decay)
    trunc *= sum(cons.alphas1)
    return PowerBoundReport(
        p=str(p).lower(),
        levels=L,
        fibers=I,
        rows=tuple(rows),
        fiber_truncation_bound=trunc,
    )
