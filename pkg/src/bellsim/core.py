"""The two incompatible data shapes of a Bell-type experiment, and their statistics.

A ``CounterfactualTable`` holds N rows of four jointly existing outcomes
(a1, a2, b1, b2), each in {+1, -1}.  The per-row combination

    C = a1*b1 + a1*b2 + a2*b1 - a2*b2 = a1*(b1+b2) + a2*(b1-b2)

is algebraically pinned to {-2, +2}, so the mean B = <C> cannot leave [-2, 2]
for any finite sample.  An ``ExperimentBundle`` holds four independent
per-context datasets of (a, b) pairs; the signed sum of their four empirical
correlations, S = E11 + E12 + E21 - E22, is only bounded by 4 a priori and can
exceed 2 in finite samples even when each context is generated by the same
predetermined-outcome model.

All types are immutable after construction and all operations are pure,
so everything here is safe to evaluate concurrently.

Context ordering is canonical everywhere: (1,1), (1,2), (2,1), (2,2).
The minus sign in S sits on the fixed (2,2) slot.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import DomainError

__all__ = [
    "CANONICAL_CONTEXTS",
    "CHSH_SIGNS",
    "Context",
    "ContextDataset",
    "CounterfactualRow",
    "CounterfactualTable",
    "ExperimentBundle",
    "b_statistic",
    "correlation",
    "project_bundle",
    "project_context",
    "row_c_value",
    "row_c_values",
    "s_statistic",
]

SETTINGS = (1, 2)

# Signs of (E11, E12, E21, E22) in S, canonical context order.
CHSH_SIGNS = (1.0, 1.0, 1.0, -1.0)


@dataclass(frozen=True, order=True)
class Context:
    """One of the four measurement contexts (i, j), i = Alice setting, j = Bob setting."""

    alice: int
    bob: int

    def __post_init__(self) -> None:
        if self.alice not in SETTINGS or self.bob not in SETTINGS:
            raise DomainError(f"settings must be in {SETTINGS}, got ({self.alice}, {self.bob})")

    @property
    def index(self) -> int:
        """Position in the canonical ordering (1,1), (1,2), (2,1), (2,2)."""
        return (self.alice - 1) * 2 + (self.bob - 1)

    def __str__(self) -> str:
        return f"({self.alice},{self.bob})"


CANONICAL_CONTEXTS = (Context(1, 1), Context(1, 2), Context(2, 1), Context(2, 2))


def _outcome_array(values: object, *, columns: int) -> np.ndarray:
    """Coerce to a read-only (n, columns) int8 array of strict +/-1 entries."""
    arr = np.asarray(values)
    if arr.size == 0:
        arr = arr.reshape(0, columns)
    if arr.ndim != 2 or arr.shape[1] != columns:
        raise DomainError(f"expected shape (n, {columns}), got {arr.shape}")
    if not np.issubdtype(arr.dtype, np.integer):
        as_int = np.asarray(arr, dtype=np.int64)
        if arr.dtype != object and not np.array_equal(as_int, arr):
            raise DomainError("outcomes must be integers +1 or -1")
        arr = as_int
    if arr.size and not (np.abs(arr) == 1).all():
        bad = arr[np.abs(arr) != 1][:4]
        raise DomainError(f"outcomes must be +1 or -1, found {bad.tolist()}")
    out = np.ascontiguousarray(arr, dtype=np.int8)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class CounterfactualRow:
    """One quadruple of jointly existing outcomes (a1, a2, b1, b2)."""

    a1: int
    a2: int
    b1: int
    b2: int

    def __post_init__(self) -> None:
        for name in ("a1", "a2", "b1", "b2"):
            if getattr(self, name) not in (-1, 1):
                raise DomainError(f"{name} must be +1 or -1, got {getattr(self, name)}")


@dataclass(frozen=True)
class CounterfactualTable:
    """N rows of four jointly existing +/-1 outcomes, columns (a1, a2, b1, b2)."""

    outcomes: np.ndarray
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "outcomes", _outcome_array(self.outcomes, columns=4))
        object.__setattr__(self, "metadata", dict(self.metadata))

    @classmethod
    def from_rows(
        cls, rows: Iterable[tuple[int, int, int, int] | CounterfactualRow], **metadata: Any
    ) -> CounterfactualTable:
        data = [
            (r.a1, r.a2, r.b1, r.b2) if isinstance(r, CounterfactualRow) else tuple(r)
            for r in rows
        ]
        return cls(np.array(data, dtype=np.int64).reshape(len(data), 4), metadata)

    @property
    def n_rows(self) -> int:
        return self.outcomes.shape[0]

    def row(self, k: int) -> CounterfactualRow:
        a1, a2, b1, b2 = (int(v) for v in self.outcomes[k])
        return CounterfactualRow(a1, a2, b1, b2)

    def __len__(self) -> int:
        return self.n_rows


@dataclass(frozen=True)
class ContextDataset:
    """Pairs (a, b) measured in one context; columns (a, b)."""

    context: Context
    pairs: np.ndarray
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "pairs", _outcome_array(self.pairs, columns=2))
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def n_pairs(self) -> int:
        return self.pairs.shape[0]

    def __len__(self) -> int:
        return self.n_pairs


@dataclass(frozen=True)
class ExperimentBundle:
    """Four context datasets, normalized to canonical context order on construction."""

    datasets: tuple[ContextDataset, ContextDataset, ContextDataset, ContextDataset]

    def __post_init__(self) -> None:
        datasets = tuple(self.datasets)
        if len(datasets) != 4:
            raise DomainError(f"a bundle needs exactly 4 datasets, got {len(datasets)}")
        contexts = {d.context for d in datasets}
        if contexts != set(CANONICAL_CONTEXTS):
            raise DomainError(f"datasets must cover all four contexts, got {sorted(contexts)}")
        ordered = tuple(sorted(datasets, key=lambda d: d.context.index))
        object.__setattr__(self, "datasets", ordered)

    def dataset(self, context: Context) -> ContextDataset:
        return self.datasets[context.index]


def row_c_value(row: CounterfactualRow) -> int:
    """C = a1*b1 + a1*b2 + a2*b1 - a2*b2 for one row; always +/-2."""
    return row.a1 * row.b1 + row.a1 * row.b2 + row.a2 * row.b1 - row.a2 * row.b2


def row_c_values(table: CounterfactualTable) -> np.ndarray:
    """Per-row C values as an int16 array (each entry is -2 or +2)."""
    a1, a2, b1, b2 = (table.outcomes[:, k].astype(np.int16) for k in range(4))
    return a1 * b1 + a1 * b2 + a2 * b1 - a2 * b2


def b_statistic(table: CounterfactualTable) -> float:
    """Mean of C over the table's rows; lies in [-2, 2] for every finite sample.

    Products of +/-1 outcomes are accumulated in int64, which is exact, so no
    floating-point compensation is needed at any N.
    """
    if table.n_rows == 0:
        raise DomainError("b_statistic undefined for N=0")
    return int(row_c_values(table).sum(dtype=np.int64)) / table.n_rows


def project_context(table: CounterfactualTable, context: Context) -> ContextDataset:
    """Select columns (a_i, b_j) of the table as if context (i, j) had been measured."""
    if table.n_rows == 0:
        raise DomainError("cannot project an empty table")
    cols = table.outcomes[:, [context.alice - 1, 2 + context.bob - 1]]
    meta = {**table.metadata, "projected_from": "counterfactual-table"}
    return ContextDataset(context, cols, meta)


def project_bundle(table: CounterfactualTable) -> ExperimentBundle:
    """Project one table into all four contexts (the same rows seen four ways)."""
    return ExperimentBundle(tuple(project_context(table, c) for c in CANONICAL_CONTEXTS))


def correlation(dataset: ContextDataset) -> float:
    """Empirical mean of a*b over the dataset's pairs; in [-1, 1]."""
    if dataset.n_pairs == 0:
        raise DomainError(f"correlation undefined for empty dataset in context {dataset.context}")
    products = dataset.pairs[:, 0].astype(np.int16) * dataset.pairs[:, 1]
    return int(products.sum(dtype=np.int64)) / dataset.n_pairs


def s_statistic(bundle: ExperimentBundle) -> float:
    """S = E11 + E12 + E21 - E22 from the four per-context correlations; in [-4, 4]."""
    total = 0.0
    for sign, dataset in zip(CHSH_SIGNS, bundle.datasets):
        total += sign * correlation(dataset)
    return total
