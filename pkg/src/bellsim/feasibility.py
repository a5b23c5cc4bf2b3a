"""Joint-distribution feasibility: can four context tables come from one spreadsheet?

The proofs bounding |S| by 2 tacitly assume a single joint distribution over
the sixteen deterministic assignments (a1, a2, b1, b2) in {+1,-1}^4 whose four
pairwise marginals reproduce the observed context distributions.  This module
decides that question exactly:

  * ``fine_feasible_lp`` -- phase-1 LP over the 16 assignment weights with
    3 independent probabilities per context plus total mass (13 equality
    rows; the 4th outcome of each context is implied).  Feasible results
    carry a witness joint distribution; infeasible ones carry the maximal
    violated CHSH form, or a marginal-inconsistency certificate when the
    input signals (possible off the no-signaling set, where the CHSH
    criterion is not exhaustive).
  * ``chsh_certificate`` -- the analytic route: maximum of the 8 signed CHSH
    forms; for no-signaling behaviors, feasibility holds iff it is <= 2.
  * ``reshuffle_feasible`` -- the count-level variant: can four N x 2 data
    tables be reordered into N consistent quadruples?  Solved by the same LP
    on count tables (real relaxation, optional per-context L1 slack), with an
    integer witness attempted by rounding plus greedy repair for N <= 10^4;
    results that only prove the real relaxation are labeled as such.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from ._simplex import phase1_solve
from .behaviors import Behavior, behavior_from_bundle
from .core import CANONICAL_CONTEXTS, Context, CounterfactualTable, ExperimentBundle, project_bundle
from .errors import DomainError

__all__ = [
    "ASSIGNMENTS",
    "Certificate",
    "FeasibilityResult",
    "JointDistribution",
    "ReshuffleProblem",
    "chsh_certificate",
    "chsh_certificate_detail",
    "fine_feasible_lp",
    "joint_from_table",
    "reshuffle_feasible",
    "reshuffle_problem_from_bundle",
    "reshuffle_problem_from_table",
]

LP_TOL = 1e-9
WITNESS_TOL = 1e-8

# All deterministic assignments (a1, a2, b1, b2), lexicographic with +1 first.
ASSIGNMENTS: tuple[tuple[int, int, int, int], ...] = tuple(
    itertools.product((1, -1), repeat=4)
)

# The 8 CHSH sign patterns: epsilon in {+1,-1}^4 with product -1 (one or three minus signs).
CHSH_SIGN_PATTERNS: tuple[tuple[int, int, int, int], ...] = tuple(
    eps for eps in itertools.product((1, -1), repeat=4) if eps[0] * eps[1] * eps[2] * eps[3] == -1
)


def _pair_to_outcome_index(a: int, b: int) -> int:
    return (1 - a) + (1 - b) // 2  # (+,+)->0, (+,-)->1, (-,+)->2, (-,-)->3


def _projection_tensor() -> np.ndarray:
    """0/1 tensor P[context, outcome, assignment]: assignment lands in that outcome cell."""
    tensor = np.zeros((4, 4, 16))
    for c, context in enumerate(CANONICAL_CONTEXTS):
        for k, (a1, a2, b1, b2) in enumerate(ASSIGNMENTS):
            a = (a1, a2)[context.alice - 1]
            b = (b1, b2)[context.bob - 1]
            tensor[c, _pair_to_outcome_index(a, b), k] = 1.0
    return tensor


PROJECTION = _projection_tensor()
PROJECTION.setflags(write=False)


@dataclass(frozen=True)
class JointDistribution:
    """Weights over the 16 deterministic assignments; the 'tacitly assumed' object."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (16,):
            raise DomainError(f"joint distribution needs 16 weights, got shape {w.shape}")
        if w.min() < -1e-12:
            raise DomainError(f"negative weight {w.min():.3e}")
        if abs(float(w.sum()) - 1.0) > 1e-10:
            raise DomainError(f"weights sum to {w.sum()!r}, not 1 within 1e-10")
        w = np.clip(w, 0.0, None)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def context_marginal(self, context: Context) -> np.ndarray:
        """Outcome-pair distribution this joint induces in the given context."""
        return PROJECTION[context.index] @ self.weights


def joint_from_table(table: CounterfactualTable) -> JointDistribution:
    """Empirical assignment frequencies of a counterfactual table (a constructive witness)."""
    index = {assignment: k for k, assignment in enumerate(ASSIGNMENTS)}
    weights = np.zeros(16)
    rows, counts = np.unique(table.outcomes, axis=0, return_counts=True)
    for row, count in zip(rows, counts):
        weights[index[tuple(int(v) for v in row)]] = count
    return JointDistribution(weights / table.n_rows)


@dataclass(frozen=True)
class Certificate:
    """Why no joint distribution exists: a violated CHSH form, or inconsistent marginals."""

    kind: str  # "chsh" | "marginal-inconsistency"
    value: float
    signs: tuple[int, int, int, int] | None = None

    def describe(self) -> str:
        if self.kind == "chsh":
            terms = "".join(
                f"{'+' if s > 0 else '-'}E{c.alice}{c.bob}"
                for s, c in zip(self.signs, CANONICAL_CONTEXTS)
            )
            return f"CHSH form {terms} = {self.value:.6f} > 2"
        return f"context marginals admit no joint distribution (violation mass {self.value:.3e})"


@dataclass(frozen=True)
class FeasibilityResult:
    """LP outcome: a witness joint distribution, or an infeasibility certificate."""

    status: str  # "feasible" | "infeasible"
    residual: float
    witness: JointDistribution | None = None
    certificate: Certificate | None = None
    witness_counts: np.ndarray | None = None
    integrality: str | None = None  # for count problems: "integer" | "relaxation"

    def __post_init__(self) -> None:
        if self.status not in ("feasible", "infeasible"):
            raise DomainError(f"status must be feasible|infeasible, got {self.status!r}")
        if (self.witness is None) == (self.certificate is None):
            raise DomainError("exactly one of witness/certificate must be present")
        if self.status == "feasible" and self.residual > WITNESS_TOL:
            raise DomainError(f"feasible result with residual {self.residual:.3e} > {WITNESS_TOL}")

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def chsh_certificate_detail(behavior: Behavior) -> tuple[float, tuple[int, int, int, int]]:
    """Max over the 8 signed CHSH forms, with the achieving sign pattern."""
    correlations = behavior.probs @ np.array([1.0, -1.0, -1.0, 1.0])
    best_value = -np.inf
    best_signs = CHSH_SIGN_PATTERNS[0]
    for signs in CHSH_SIGN_PATTERNS:
        value = float(np.dot(signs, correlations))
        if value > best_value:
            best_value = value
            best_signs = signs
    return best_value, best_signs


def chsh_certificate(behavior: Behavior) -> float:
    """Maximum of the eight signed CHSH correlation combinations."""
    return chsh_certificate_detail(behavior)[0]


def _marginal_system(targets: np.ndarray, mass: float) -> tuple[np.ndarray, np.ndarray]:
    """Equality system: 3 outcomes per context (4th implied) plus total mass."""
    rows = [PROJECTION[c, o] for c in range(4) for o in range(3)]
    rhs = [targets[c, o] for c in range(4) for o in range(3)]
    rows.append(np.ones(16))
    rhs.append(mass)
    return np.vstack(rows), np.array(rhs)


def _max_marginal_violation(weights: np.ndarray, targets: np.ndarray) -> float:
    projected = PROJECTION @ weights  # (4 contexts, 4 outcomes)
    return float(np.abs(projected - targets).max())


def fine_feasible_lp(behavior: Behavior) -> FeasibilityResult:
    """Decide whether one joint distribution reproduces all four context distributions."""
    a_eq, b_eq = _marginal_system(behavior.probs, 1.0)
    infeasibility, x = phase1_solve(a_eq, b_eq, tol=LP_TOL)
    if infeasibility <= LP_TOL:
        weights = np.clip(x, 0.0, None)
        weights /= weights.sum()
        witness = JointDistribution(weights)
        residual = _max_marginal_violation(witness.weights, behavior.probs)
        return FeasibilityResult("feasible", residual=residual, witness=witness)
    value, signs = chsh_certificate_detail(behavior)
    if value > 2.0 + LP_TOL:
        certificate = Certificate("chsh", value, signs)
    else:
        certificate = Certificate("marginal-inconsistency", infeasibility)
    return FeasibilityResult("infeasible", residual=infeasibility, certificate=certificate)


@dataclass(frozen=True)
class ReshuffleProblem:
    """Four context count tables plus an allowed per-context L1 deviation (in counts)."""

    counts: np.ndarray
    slack: float = 0.0

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts)
        if counts.shape != (4, 4):
            raise DomainError(f"counts must be (4, 4) per-context tables, got {counts.shape}")
        if not np.issubdtype(counts.dtype, np.integer):
            rounded = np.rint(counts)
            if not np.array_equal(rounded, counts):
                raise DomainError("count tables must hold integers")
            counts = rounded
        counts = counts.astype(np.int64)
        if counts.min() < 0:
            raise DomainError("counts must be nonnegative")
        if not (self.slack >= 0.0):
            raise DomainError(f"slack must be >= 0, got {self.slack}")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)


def reshuffle_problem_from_table(table: CounterfactualTable, slack: float = 0.0) -> ReshuffleProblem:
    """Count tables obtained by projecting one counterfactual table into all contexts."""
    behavior = behavior_from_bundle(project_bundle(table))
    return ReshuffleProblem(behavior.counts, slack)


def reshuffle_problem_from_bundle(bundle: ExperimentBundle, slack: float = 0.0) -> ReshuffleProblem:
    behavior = behavior_from_bundle(bundle)
    return ReshuffleProblem(behavior.counts, slack)


def _repair_integer_witness(
    weights: np.ndarray, counts: np.ndarray, max_steps: int = 1024
) -> np.ndarray | None:
    """Round the real witness and greedily swap unit counts until the tables match."""
    total = int(counts[0].sum())
    w = np.rint(weights).astype(np.int64)
    w = np.maximum(w, 0)
    # Restore the grand total first (swaps below preserve it).
    fractional = weights - w
    while w.sum() != total:
        if w.sum() < total:
            k = int(np.argmax(fractional))
            w[k] += 1
            fractional[k] -= 1.0
        else:
            candidates = np.where(w > 0, fractional, np.inf)
            k = int(np.argmin(candidates))
            w[k] -= 1
            fractional[k] += 1.0

    proj = PROJECTION.reshape(16, 16)  # rows: (context, outcome), cols: assignment

    def l1(vec: np.ndarray) -> int:
        return int(np.abs(counts.reshape(16) - proj @ vec).sum())

    current = l1(w)
    for _ in range(max_steps):
        if current == 0:
            return w
        best_gain = 0
        best_move = None
        residual = counts.reshape(16) - proj @ w
        for src in range(16):
            if w[src] == 0:
                continue
            for dst in range(16):
                if dst == src:
                    continue
                delta = proj[:, dst] - proj[:, src]
                gain = int(np.abs(residual).sum() - np.abs(residual - delta).sum())
                if gain > best_gain:
                    best_gain = gain
                    best_move = (src, dst)
        if best_move is None:
            return None
        src, dst = best_move
        w[src] -= 1
        w[dst] += 1
        current -= best_gain
    return None


def _slack_system(
    counts: np.ndarray, slack: float, mass: float, scale: float
) -> tuple[np.ndarray, np.ndarray]:
    """Variables [w(16), d(16), s(36)]: |P w - counts| <= d per cell, sum_o d <= slack per context.

    The witness total sum(w) is pinned to ``mass`` (= N, or the mean context
    total when they differ), matching the count-level reading of the problem.
    """
    proj = PROJECTION.reshape(16, 16)
    n_var = 16 + 16 + 36
    rows = []
    rhs = []
    for r in range(16):  # P w - d + s = counts
        row = np.zeros(n_var)
        row[:16] = proj[r]
        row[16 + r] = -1.0
        row[32 + r] = 1.0
        rows.append(row)
        rhs.append(counts.reshape(16)[r] / scale)
    for r in range(16):  # -P w - d + s = -counts
        row = np.zeros(n_var)
        row[:16] = -proj[r]
        row[16 + r] = -1.0
        row[48 + r] = 1.0
        rows.append(row)
        rhs.append(-counts.reshape(16)[r] / scale)
    for c in range(4):  # sum_o d_{c,o} + s = slack
        row = np.zeros(n_var)
        row[16 + 4 * c : 16 + 4 * (c + 1)] = 1.0
        row[64 + c] = 1.0
        rows.append(row)
        rhs.append(slack / scale)
    mass_row = np.zeros(n_var)
    mass_row[:16] = 1.0
    rows.append(mass_row)
    rhs.append(mass / scale)
    return np.vstack(rows), np.array(rhs)


def reshuffle_feasible(problem: ReshuffleProblem) -> FeasibilityResult:
    """Decide whether the four count tables can be reshuffled into consistent quadruples.

    The exact variant (slack 0, equal totals) asks for assignment counts whose
    projections reproduce every table; with slack > 0 each context table may
    deviate by up to ``slack`` in L1.  Real-relaxation feasibility is decided
    by the LP; for slack 0 and N <= 10^4 an integer witness is attempted and
    the result labeled "integer" or "relaxation" accordingly.
    """
    counts = problem.counts
    totals = problem.totals
    if counts.sum() == 0:
        raise DomainError("reshuffling undefined for all-empty count tables")
    if problem.slack == 0.0 and len(set(totals.tolist())) != 1:
        raise DomainError(
            f"exact reshuffling needs equal context totals, got {totals.tolist()}; "
            "set slack > 0 to allow deviations"
        )
    scale = float(max(1, counts.sum()))
    if problem.slack == 0.0:
        a_eq, b_eq = _marginal_system(counts / scale, totals[0] / scale)
        infeasibility, x = phase1_solve(a_eq, b_eq, tol=LP_TOL)
        witness_counts = x * scale
    else:
        mass = float(np.rint(totals.mean()))
        a_eq, b_eq = _slack_system(counts, problem.slack, mass, scale)
        infeasibility, x = phase1_solve(a_eq, b_eq, tol=LP_TOL)
        witness_counts = x[:16] * scale

    frequencies = counts / np.maximum(totals, 1)[:, None]
    if infeasibility <= LP_TOL:
        integrality = None
        if problem.slack == 0.0 and totals[0] <= 10_000:
            integral = _repair_integer_witness(witness_counts, counts)
            if integral is not None:
                witness_counts = integral.astype(np.float64)
                integrality = "integer"
            else:
                integrality = "relaxation"
        elif problem.slack == 0.0:
            integrality = "relaxation"
        mass = witness_counts.sum()
        witness = JointDistribution(np.clip(witness_counts, 0.0, None) / mass)
        if problem.slack == 0.0:
            residual = _max_marginal_violation(witness.weights, frequencies)
        else:
            residual = infeasibility
        return FeasibilityResult(
            "feasible",
            residual=residual,
            witness=witness,
            witness_counts=witness_counts,
            integrality=integrality,
        )

    behavior = Behavior(frequencies)
    value, signs = chsh_certificate_detail(behavior)
    if value > 2.0 + LP_TOL:
        certificate = Certificate("chsh", value, signs)
    else:
        certificate = Certificate("marginal-inconsistency", infeasibility * scale)
    return FeasibilityResult("infeasible", residual=infeasibility, certificate=certificate)
