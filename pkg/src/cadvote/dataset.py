"""Dataset schema, CSV ingestion, descriptive statistics, and correlations.

The canonical clinical schema ships as ``schema.cad12`` next to this module:
13 predictor features (the widely cited "12" undercounts its own list) plus
the binary ``Cath`` label.  Loading maps textual Y/N flags and Cad/Normal
labels to 1/0 and resolves source-column aliases such as
"Typical Chest Pain" -> "TypicalChestPain".
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError

_TRUE_STRINGS = {"y", "yes", "true"}
_FALSE_STRINGS = {"n", "no", "false"}


@dataclass(frozen=True)
class Feature:
    """One predictor column: canonical name, kind, unit, valid range, aliases."""

    name: str
    kind: str  # "numeric" | "binary" | "ordinal"
    unit: str = "-"
    valid_range: tuple[float, float] = (-math.inf, math.inf)
    aliases: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in ("numeric", "binary", "ordinal"):
            raise DataError(f"feature {self.name}: unknown kind {self.kind!r}")
        lo, hi = self.valid_range
        if not lo <= hi:
            raise DataError(f"feature {self.name}: empty range {self.valid_range}")

    def in_range(self, value: float) -> bool:
        lo, hi = self.valid_range
        if not lo <= value <= hi:
            return False
        # flags and ordinal scales only admit whole numbers
        if self.kind in ("binary", "ordinal") and value != int(value):
            return False
        return True


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature list plus label coding and polarity metadata."""

    features: tuple[Feature, ...]
    label_name: str = "Cath"
    positive_string: str = "Cad"
    negative_string: str = "Normal"
    positive_label_meaning: str = "CAD"
    version: int = 1

    def __post_init__(self) -> None:
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise DataError("duplicate feature names in schema")
        if self.label_name in names:
            raise DataError("label name collides with a feature name")

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)

    @property
    def numeric_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features if f.kind == "numeric")

    def index_of(self, name: str) -> int:
        for i, f in enumerate(self.features):
            if f.name == name:
                return i
        raise DataError(f"unknown feature {name!r}")

    def feature(self, name: str) -> Feature:
        return self.features[self.index_of(name)]

    def alias_map(self) -> dict[str, str]:
        """Source-column name -> canonical name, from the schema's alias lists."""
        out: dict[str, str] = {}
        for f in self.features:
            for a in f.aliases:
                out[a] = f.name
        return out

    def subset(self, names: Sequence[str]) -> "FeatureSchema":
        """New schema keeping only ``names``, in the order given."""
        feats = tuple(self.feature(n) for n in names)
        return FeatureSchema(
            features=feats,
            label_name=self.label_name,
            positive_string=self.positive_string,
            negative_string=self.negative_string,
            positive_label_meaning=self.positive_label_meaning,
            version=self.version,
        )


@dataclass(frozen=True)
class PatientRecord:
    """One row: raw-unit feature values plus an optional {0,1} label.

    ``out_of_range`` names features whose values fall outside the schema band;
    ingestion flags instead of clamping so nothing is silently altered.
    """

    values: np.ndarray
    label: int | None = None
    out_of_range: tuple[str, ...] = ()
    synthetic: bool = False

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        if self.label is not None and self.label not in (0, 1):
            raise DataError(f"label must be 0 or 1, got {self.label!r}")


class Dataset:
    """Immutable ordered record collection bound to one schema.

    ``X`` (n x p float matrix) and ``y`` (int vector, or None when any record
    is unlabeled) are materialized once at construction.
    """

    def __init__(
        self,
        schema: FeatureSchema,
        records: Iterable[PatientRecord],
        provenance: str = "",
    ) -> None:
        self.schema = schema
        self.records: tuple[PatientRecord, ...] = tuple(records)
        self.provenance = provenance
        p = len(schema.features)
        for r in self.records:
            if r.values.shape != (p,):
                raise DataError(
                    f"record has {r.values.shape[0]} values, schema has {p} features"
                )
        if self.records:
            self.X = np.vstack([r.values for r in self.records])
        else:
            self.X = np.empty((0, p), dtype=np.float64)
        self.X.flags.writeable = False
        if self.records and all(r.label is not None for r in self.records):
            self.y: np.ndarray | None = np.array(
                [r.label for r in self.records], dtype=np.int64
            )
            self.y.flags.writeable = False
        else:
            self.y = None

    def __len__(self) -> int:
        return len(self.records)

    def class_counts(self) -> dict[int, int]:
        if self.y is None:
            raise DataError("dataset has unlabeled records")
        return {0: int(np.sum(self.y == 0)), 1: int(np.sum(self.y == 1))}

    def with_provenance(self, note: str) -> "Dataset":
        joined = f"{self.provenance}; {note}" if self.provenance else note
        return Dataset(self.schema, self.records, joined)

    @staticmethod
    def from_arrays(
        schema: FeatureSchema,
        X: np.ndarray,
        y: np.ndarray | None,
        provenance: str = "",
        synthetic: np.ndarray | None = None,
    ) -> "Dataset":
        """Build a Dataset from matrices (no range re-validation: transformed
        values such as z-scores legitimately leave the raw-unit band)."""
        X = np.asarray(X, dtype=np.float64)
        recs = []
        for i in range(X.shape[0]):
            recs.append(
                PatientRecord(
                    values=X[i].copy(),
                    label=None if y is None else int(y[i]),
                    synthetic=bool(synthetic[i]) if synthetic is not None else False,
                )
            )
        return Dataset(schema, recs, provenance)


def cad12_schema() -> FeatureSchema:
    """Parse the bundled ``schema.cad12`` file into a FeatureSchema."""
    text = resources.files(__package__).joinpath("schema.cad12").read_text("utf-8")
    return parse_schema(text)


def parse_schema(text: str) -> FeatureSchema:
    feats: list[Feature] = []
    label_name, pos_s, neg_s, meaning = "Cath", "Cad", "Normal", "CAD"
    version = 1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("|")]
        tag = parts[0]
        if tag == "schema-version":
            version = int(parts[1])
        elif tag == "feature":
            if len(parts) != 7:
                raise DataError(f"schema line {lineno}: expected 7 fields")
            _, name, kind, unit, lo, hi, aliases = parts
            feats.append(
                Feature(
                    name=name,
                    kind=kind,
                    unit=unit,
                    valid_range=(float(lo), float(hi)),
                    aliases=tuple(a.strip() for a in aliases.split(";") if a.strip()),
                )
            )
        elif tag == "label":
            _, label_name, pos_s, neg_s, meaning = parts
        else:
            raise DataError(f"schema line {lineno}: unknown tag {tag!r}")
    if not feats:
        raise DataError("schema defines no features")
    return FeatureSchema(
        features=tuple(feats),
        label_name=label_name,
        positive_string=pos_s,
        negative_string=neg_s,
        positive_label_meaning=meaning,
        version=version,
    )


def _range_to_json(v: float) -> float | str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return float(v)


def schema_to_dict(s: FeatureSchema) -> dict:
    """JSON-safe schema serialization (bundles, /model/info)."""
    return {
        "version": s.version,
        "label_name": s.label_name,
        "positive_string": s.positive_string,
        "negative_string": s.negative_string,
        "positive_label_meaning": s.positive_label_meaning,
        "features": [
            {
                "name": f.name,
                "kind": f.kind,
                "unit": f.unit,
                "min": _range_to_json(f.valid_range[0]),
                "max": _range_to_json(f.valid_range[1]),
                "aliases": list(f.aliases),
            }
            for f in s.features
        ],
    }


def schema_from_dict(d: dict) -> FeatureSchema:
    feats = tuple(
        Feature(
            name=f["name"],
            kind=f["kind"],
            unit=f.get("unit", "-"),
            valid_range=(float(f["min"]), float(f["max"])),
            aliases=tuple(f.get("aliases", ())),
        )
        for f in d["features"]
    )
    return FeatureSchema(
        features=feats,
        label_name=d["label_name"],
        positive_string=d["positive_string"],
        negative_string=d["negative_string"],
        positive_label_meaning=d["positive_label_meaning"],
        version=int(d["version"]),
    )


def _parse_cell(text: str, column: str, row: int) -> float:
    s = text.strip()
    low = s.lower()
    if low in _TRUE_STRINGS:
        return 1.0
    if low in _FALSE_STRINGS:
        return 0.0
    try:
        return float(s)
    except ValueError:
        raise DataError(
            f"unparseable cell at row {row}, column {column!r}: {text!r}"
        ) from None


def _parse_label(text: str, schema: FeatureSchema, row: int) -> int:
    s = text.strip()
    if s.lower() == schema.positive_string.lower():
        return 1
    if s.lower() == schema.negative_string.lower():
        return 0
    v = _parse_cell(s, schema.label_name, row)
    if v not in (0.0, 1.0):
        raise DataError(
            f"label at row {row} must be 0/1 or "
            f"{schema.positive_string!r}/{schema.negative_string!r}, got {text!r}"
        )
    return int(v)


def _read_rows(path: str | Path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"empty file: {path}") from None
        rows = [row for row in reader if any(cell.strip() for cell in row)]
    return [h.strip() for h in header], rows


def load_dataset(
    path: str | Path,
    schema: FeatureSchema | None = None,
    alias_map: Mapping[str, str] | None = None,
    require_label: bool = True,
    impute_median: bool = False,
) -> Dataset:
    """Load a CSV against ``schema`` (cad12 by default).

    Source columns are matched by canonical name, then by schema aliases,
    then by ``alias_map`` (source name -> canonical name).  Y/N flags map to
    1/0; the label's Cad/Normal strings map to 1/0.  Missing cells are
    rejected unless ``impute_median`` fills them with the column median.
    Out-of-range values are flagged on the record, never clamped.
    """
    schema = schema or cad12_schema()
    header, rows = _read_rows(path)
    if not rows:
        raise DataError(f"empty dataset: {path} has a header but no records")

    resolve = schema.alias_map()
    if alias_map:
        resolve.update(alias_map)
    canonical = {resolve.get(h, h): i for i, h in enumerate(header)}

    col_idx: list[int] = []
    for f in schema.features:
        if f.name not in canonical:
            raise DataError(f"missing required column {f.name!r} in {path}")
        col_idx.append(canonical[f.name])
    label_idx = canonical.get(schema.label_name)
    if require_label and label_idx is None:
        raise DataError(f"missing required column {schema.label_name!r} in {path}")

    p = len(schema.features)
    values = np.full((len(rows), p), np.nan, dtype=np.float64)
    labels: list[int | None] = []
    missing: list[tuple[int, int]] = []
    for r, row in enumerate(rows):
        if len(row) < len(header):
            raise DataError(f"row {r + 2} has {len(row)} cells, header has {len(header)}")
        for j, f in enumerate(schema.features):
            cell = row[col_idx[j]]
            if cell.strip() == "":
                missing.append((r, j))
            else:
                values[r, j] = _parse_cell(cell, f.name, r + 2)
        if label_idx is not None and row[label_idx].strip() != "":
            labels.append(_parse_label(row[label_idx], schema, r + 2))
        else:
            labels.append(None)

    notes = [str(path)]
    if missing:
        if not impute_median:
            r, j = missing[0]
            raise DataError(
                f"missing cell at row {r + 2}, column {schema.features[j].name!r}"
                " (pass impute_median=True to fill with column medians)"
            )
        for j in sorted({j for _, j in missing}):
            col = values[:, j]
            med = float(np.nanmedian(col))
            col[np.isnan(col)] = med
        notes.append(f"imputed {len(missing)} missing cells with column medians")

    records = []
    for r in range(len(rows)):
        oor = tuple(
            f.name for j, f in enumerate(schema.features) if not f.in_range(values[r, j])
        )
        records.append(
            PatientRecord(values=values[r], label=labels[r], out_of_range=oor)
        )
    return Dataset(schema, records, provenance="; ".join(notes))


def load_table(path: str | Path, label_name: str = "Cath") -> Dataset:
    """Pass-through loader for wide files (e.g. the full 55-feature export).

    Builds an inferred schema: a column is ``binary`` when its values sit in
    {0,1} (or Y/N), ``ordinal`` when they are <= 10 distinct small integers,
    else ``numeric``; valid ranges are the observed min/max.  Feature
    selection consumes this, then hands a trimmed schema to the pipeline.
    """
    header, rows = _read_rows(path)
    if not rows:
        raise DataError(f"empty dataset: {path} has a header but no records")
    names = header
    if label_name not in names:
        raise DataError(f"missing required column {label_name!r} in {path}")
    li = names.index(label_name)

    n, p = len(rows), len(names) - 1
    values = np.empty((n, p), dtype=np.float64)
    labels: list[int] = []
    feat_cols = [i for i in range(len(names)) if i != li]
    for r, row in enumerate(rows):
        if len(row) < len(names):
            raise DataError(f"row {r + 2} has {len(row)} cells, header has {len(names)}")
        for j, c in enumerate(feat_cols):
            values[r, j] = _parse_cell(row[c], names[c], r + 2)
        labels.append(
            _parse_label(row[li], FeatureSchema(
                features=(Feature("x", "numeric"),), label_name=label_name
            ), r + 2)
        )

    feats = []
    for j, c in enumerate(feat_cols):
        col = values[:, j]
        distinct = np.unique(col)
        if set(distinct.tolist()) <= {0.0, 1.0}:
            kind = "binary"
        elif len(distinct) <= 10 and np.all(distinct == np.round(distinct)):
            kind = "ordinal"
        else:
            kind = "numeric"
        feats.append(
            Feature(
                name=names[c],
                kind=kind,
                valid_range=(float(col.min()), float(col.max())),
            )
        )
    schema = FeatureSchema(features=tuple(feats), label_name=label_name)
    records = [
        PatientRecord(values=values[r], label=labels[r]) for r in range(n)
    ]
    return Dataset(schema, records, provenance=str(path))


def _format_value(v: float) -> str:
    """Shortest string that round-trips: integers bare, reals via repr."""
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def save_csv(d: Dataset, path: str | Path) -> None:
    """Write a Dataset back to CSV; reloading yields identical records."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        names = list(d.schema.feature_names)
        has_label = d.y is not None
        writer.writerow(names + ([d.schema.label_name] if has_label else []))
        for r in d.records:
            row = [_format_value(v) for v in r.values]
            if has_label:
                row.append(str(r.label))
            writer.writerow(row)


@dataclass(frozen=True)
class SummaryRow:
    name: str
    count: int
    mean: float
    std: float | None  # None marks the undefined n=1 case
    min: float
    q25: float
    median: float
    q75: float
    max: float


@dataclass(frozen=True)
class SummaryTable:
    rows: tuple[SummaryRow, ...]

    def row(self, name: str) -> SummaryRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_csv(self) -> str:
        lines = ["feature,count,mean,std,min,q25,median,q75,max"]
        for r in self.rows:
            std = "NA" if r.std is None else f"{r.std:.6f}"
            lines.append(
                f"{r.name},{r.count},{r.mean:.6f},{std},"
                f"{_format_value(r.min)},{_format_value(r.q25)},"
                f"{_format_value(r.median)},{_format_value(r.q75)},"
                f"{_format_value(r.max)}"
            )
        return "\n".join(lines) + "\n"


def _summary_row(name: str, col: np.ndarray, quartile_method: str) -> SummaryRow:
    n = col.shape[0]
    q25, q50, q75 = np.quantile(col, [0.25, 0.5, 0.75], method=quartile_method)
    return SummaryRow(
        name=name,
        count=n,
        mean=float(np.mean(col)),
        std=None if n < 2 else float(np.std(col, ddof=1)),
        min=float(np.min(col)),
        q25=float(q25),
        median=float(q50),
        q75=float(q75),
        max=float(np.max(col)),
    )


def summarize(d: Dataset, quartile_method: str = "linear") -> SummaryTable:
    """Per-feature count/mean/std/min/quartiles/max, plus a label row.

    std uses the sample (n-1) denominator; quartiles default to linear
    interpolation between closest ranks (configurable via numpy's method
    names for summaries that used a different convention).
    """
    if len(d) == 0:
        raise DataError("cannot summarize an empty dataset")
    rows = [
        _summary_row(f.name, d.X[:, j], quartile_method)
        for j, f in enumerate(d.schema.features)
    ]
    if d.y is not None:
        rows.append(
            _summary_row(d.schema.label_name, d.y.astype(np.float64), quartile_method)
        )
    return SummaryTable(rows=tuple(rows))


def correlation_matrix(d: Dataset) -> tuple[tuple[str, ...], np.ndarray]:
    """Pearson correlations over all features (+ label when present).

    Zero-variance columns yield NaN entries (undefined, never reported as 0).
    The matrix is exactly symmetric with a unit diagonal and |rho| <= 1.
    """
    if len(d) < 2:
        raise DataError("correlation needs at least two records")
    cols = [d.X[:, j] for j in range(d.X.shape[1])]
    names = list(d.schema.feature_names)
    if d.y is not None:
        cols.append(d.y.astype(np.float64))
        names.append(d.schema.label_name)
    M = np.vstack(cols)
    centered = M - M.mean(axis=1, keepdims=True)
    norms = np.sqrt(np.sum(centered**2, axis=1))
    k = M.shape[0]
    out = np.full((k, k), np.nan, dtype=np.float64)
    for i in range(k):
        for j in range(i, k):
            if norms[i] == 0.0 or norms[j] == 0.0:
                continue  # undefined stays NaN
            r = float(np.dot(centered[i], centered[j]) / (norms[i] * norms[j]))
            r = min(1.0, max(-1.0, r))
            out[i, j] = r
            out[j, i] = r
    for i in range(k):
        if norms[i] > 0.0:
            out[i, i] = 1.0
    return tuple(names), out
