"""Text formats for tables, bundles, behaviors, models, states, and angles.

CSV files may start with ``# key: value`` comment lines (run metadata); all
readers skip them.  Floats are written with repr, which round-trips float64
exactly, so save/load cycles are lossless and byte-stable.

  counterfactual table   trial,a1,a2,b1,b2
  context dataset        trial,a,b
  bundle                 trial,context_i,context_j,a,b   (canonical context order)
  behavior               "context i j = p p p p" lines, optional "counts i j = ..."
  model specification    "key = value" lines with a "variant" key; unknown keys rejected
  density matrix         16 "re im" lines, row-major
  angle quadruple        one line: a1 a2 b1 b2 (radians)
"""

from __future__ import annotations

import io
import math
from collections.abc import Mapping
from pathlib import Path
from typing import Any

import numpy as np

from .behaviors import Behavior
from .core import (
    CANONICAL_CONTEXTS,
    Context,
    ContextDataset,
    CounterfactualTable,
    ExperimentBundle,
)
from .errors import ConfigError
from .lhv import LhvModel, model_from_mapping
from .quantum import AngleQuadruple, DensityMatrix

__all__ = [
    "read_angles",
    "read_behavior",
    "read_bundle_csv",
    "read_dataset_csv",
    "read_density",
    "read_keyvalue",
    "read_model",
    "read_table_csv",
    "write_angles",
    "write_behavior",
    "write_bundle_csv",
    "write_dataset_csv",
    "write_density",
    "write_table_csv",
]

TABLE_HEADER = "trial,a1,a2,b1,b2"
DATASET_HEADER = "trial,a,b"
BUNDLE_HEADER = "trial,context_i,context_j,a,b"


def _preamble_lines(preamble: Mapping[str, Any] | None) -> list[str]:
    if not preamble:
        return []
    return [f"# {key}: {value}" for key, value in preamble.items()]


def _data_lines(path: Path) -> list[str]:
    lines = Path(path).read_text().splitlines()
    return [ln.strip() for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]


def _read_int_csv(path: Path, header: str) -> np.ndarray:
    lines = _data_lines(path)
    if not lines or lines[0] != header:
        found = lines[0] if lines else "<empty>"
        raise ConfigError(f"{path}: expected header {header!r}, found {found!r}")
    body = "\n".join(lines[1:])
    if not body:
        return np.empty((0, header.count(",") + 1), dtype=np.int64)
    try:
        data = np.loadtxt(io.StringIO(body), delimiter=",", dtype=np.int64, ndmin=2)
    except ValueError as exc:
        raise ConfigError(f"{path}: malformed CSV body: {exc}") from exc
    if data.shape[1] != header.count(",") + 1:
        raise ConfigError(f"{path}: expected {header.count(',') + 1} columns, got {data.shape[1]}")
    return data


def write_table_csv(
    path: Path, table: CounterfactualTable, preamble: Mapping[str, Any] | None = None
) -> None:
    lines = _preamble_lines(preamble) + [TABLE_HEADER]
    lines.extend(
        f"{k},{row[0]},{row[1]},{row[2]},{row[3]}" for k, row in enumerate(table.outcomes)
    )
    Path(path).write_text("\n".join(lines) + "\n")


def read_table_csv(path: Path) -> CounterfactualTable:
    data = _read_int_csv(Path(path), TABLE_HEADER)
    return CounterfactualTable(data[:, 1:5], {"source": str(path)})


def write_dataset_csv(
    path: Path, dataset: ContextDataset, preamble: Mapping[str, Any] | None = None
) -> None:
    lines = _preamble_lines(preamble) + [DATASET_HEADER]
    lines.extend(f"{k},{a},{b}" for k, (a, b) in enumerate(dataset.pairs))
    Path(path).write_text("\n".join(lines) + "\n")


def read_dataset_csv(path: Path, context: Context) -> ContextDataset:
    data = _read_int_csv(Path(path), DATASET_HEADER)
    return ContextDataset(context, data[:, 1:3], {"source": str(path)})


def write_bundle_csv(
    path: Path, bundle: ExperimentBundle, preamble: Mapping[str, Any] | None = None
) -> None:
    lines = _preamble_lines(preamble) + [BUNDLE_HEADER]
    for dataset in bundle.datasets:
        i, j = dataset.context.alice, dataset.context.bob
        lines.extend(f"{k},{i},{j},{a},{b}" for k, (a, b) in enumerate(dataset.pairs))
    Path(path).write_text("\n".join(lines) + "\n")


def read_bundle_csv(path: Path) -> ExperimentBundle:
    data = _read_int_csv(Path(path), BUNDLE_HEADER)
    datasets = []
    for context in CANONICAL_CONTEXTS:
        mask = (data[:, 1] == context.alice) & (data[:, 2] == context.bob)
        pairs = data[mask][:, 3:5]
        if pairs.shape[0] == 0:
            raise ConfigError(f"{path}: no rows for context {context}")
        datasets.append(ContextDataset(context, pairs, {"source": str(path)}))
    if int(data.shape[0]) != sum(d.n_pairs for d in datasets):
        raise ConfigError(f"{path}: rows outside the four canonical contexts")
    return ExperimentBundle(tuple(datasets))


def write_behavior(
    path: Path, behavior: Behavior, preamble: Mapping[str, Any] | None = None
) -> None:
    lines = _preamble_lines(preamble)
    for context in CANONICAL_CONTEXTS:
        probs = " ".join(repr(float(p)) for p in behavior.probs[context.index])
        lines.append(f"context {context.alice} {context.bob} = {probs}")
    if behavior.counts is not None:
        for context in CANONICAL_CONTEXTS:
            counts = " ".join(str(int(c)) for c in behavior.counts[context.index])
            lines.append(f"counts {context.alice} {context.bob} = {counts}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_behavior(path: Path) -> Behavior:
    probs = np.full((4, 4), np.nan)
    counts = np.full((4, 4), -1, dtype=np.int64)
    for line in _data_lines(Path(path)):
        if "=" not in line:
            raise ConfigError(f"{path}: expected 'context i j = ...' lines, got {line!r}")
        head, _, tail = line.partition("=")
        fields = head.split()
        if len(fields) != 3 or fields[0] not in ("context", "counts"):
            raise ConfigError(f"{path}: unknown directive {head.strip()!r}")
        try:
            context = Context(int(fields[1]), int(fields[2]))
            values = [float(v) for v in tail.split()]
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{path}: malformed line {line!r}: {exc}") from exc
        if len(values) != 4:
            raise ConfigError(f"{path}: need 4 values per context, got {len(values)}")
        if fields[0] == "context":
            probs[context.index] = values
        else:
            counts[context.index] = np.asarray(values, dtype=np.int64)
    if np.isnan(probs).any():
        raise ConfigError(f"{path}: missing context lines (need all four)")
    has_counts = counts >= 0
    if has_counts.any() and not has_counts.all():
        raise ConfigError(f"{path}: counts given for only some contexts")
    return Behavior(probs, counts if has_counts.all() else None)


def _parse_scalar(text: str) -> Any:
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_keyvalue(path: Path) -> dict[str, str]:
    """Parse a 'key = value' file into raw strings, rejecting duplicates."""
    mapping: dict[str, str] = {}
    for line in _data_lines(Path(path)):
        if "=" not in line:
            raise ConfigError(f"{path}: expected 'key = value' lines, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"{path}: malformed line {line!r}")
        if key in mapping:
            raise ConfigError(f"{path}: duplicate key {key!r}")
        mapping[key] = value
    return mapping


def read_model(path: Path) -> LhvModel:
    """Parse a 'key = value' model file into a built-in LHV model."""
    mapping: dict[str, Any] = {}
    for key, value in read_keyvalue(Path(path)).items():
        if key == "strategies":
            try:
                mapping[key] = [
                    tuple(int(v) for v in chunk.replace(",", " ").split())
                    for chunk in value.split(";")
                ]
            except ValueError as exc:
                raise ConfigError(f"{path}: bad strategies {value!r}: {exc}") from exc
        elif key in ("weights", "outcomes"):
            mapping[key] = [_parse_scalar(v) for v in value.replace(",", " ").split()]
        else:
            mapping[key] = _parse_scalar(value)
    return model_from_mapping(mapping)


def write_density(
    path: Path, rho: DensityMatrix, preamble: Mapping[str, Any] | None = None
) -> None:
    lines = _preamble_lines(preamble)
    for value in rho.matrix.reshape(-1):
        lines.append(f"{float(value.real)!r} {float(value.imag)!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_density(path: Path) -> DensityMatrix:
    entries = []
    for line in _data_lines(Path(path)):
        parts = line.split()
        if len(parts) != 2:
            raise ConfigError(f"{path}: each line must hold 're im', got {line!r}")
        try:
            entries.append(complex(float(parts[0]), float(parts[1])))
        except ValueError as exc:
            raise ConfigError(f"{path}: malformed entry {line!r}: {exc}") from exc
    if len(entries) != 16:
        raise ConfigError(f"{path}: need 16 entries, got {len(entries)}")
    return DensityMatrix(np.array(entries, dtype=np.complex128).reshape(4, 4))


def write_angles(
    path: Path, angles: AngleQuadruple, preamble: Mapping[str, Any] | None = None
) -> None:
    lines = _preamble_lines(preamble)
    lines.append(" ".join(repr(a) for a in angles.as_tuple()))
    Path(path).write_text("\n".join(lines) + "\n")


def read_angles(path: Path) -> AngleQuadruple:
    lines = _data_lines(Path(path))
    if len(lines) != 1:
        raise ConfigError(f"{path}: expected a single line of four angles")
    try:
        values = [float(v) for v in lines[0].split()]
    except ValueError as exc:
        raise ConfigError(f"{path}: malformed angles: {exc}") from exc
    if len(values) != 4:
        raise ConfigError(f"{path}: need exactly 4 angles, got {len(values)}")
    if not all(math.isfinite(v) for v in values):
        raise ConfigError(f"{path}: angles must be finite")
    return AngleQuadruple(*values)
