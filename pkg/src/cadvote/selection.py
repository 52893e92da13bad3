"""Gain-ratio attribute ranking and top-k selection.

GainRatio(Attr) = IG(Attr) / H(attr), where H(attr) is the entropy of the
attribute's own value distribution (not the Weka-style split information on
a candidate partition — the ranking operates on whole columns).  Numeric
attributes are equal-frequency discretized first, since the ratio is defined
over discrete value probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dataset import Dataset, FeatureSchema
from .errors import DataError


def entropy(probabilities: Sequence[float]) -> float:
    """Shannon entropy in bits, with 0*log2(0) := 0."""
    p = np.asarray(probabilities, dtype=np.float64)
    if p.size == 0 or np.any(p < 0):
        raise DataError("distribution probabilities must be >= 0")
    if abs(float(p.sum()) - 1.0) > 1e-9:
        raise DataError(f"distribution must sum to 1, got {float(p.sum())!r}")
    nz = p[p > 0]
    return float(-np.sum(nz * np.log2(nz)))


def entropy_of_counts(counts: np.ndarray) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    total = counts.sum()
    if total <= 0:
        return 0.0
    return entropy(counts / total)


def discretize(
    column: np.ndarray, bins: int = 10
) -> tuple[np.ndarray, np.ndarray]:
    """Equal-frequency binning into <= ``bins`` categories.

    Returns (codes, edges): integer bin codes per value and the internal cut
    points.  A value equal to a cut point goes to the lower bin.  Duplicate
    quantiles collapse, so heavy ties produce fewer bins; a constant column
    yields a single bin.
    """
    col = np.asarray(column, dtype=np.float64)
    if col.size == 0:
        raise DataError("cannot discretize an empty column")
    if bins < 1:
        raise DataError("bins must be a positive integer")
    qs = np.arange(1, bins) / bins
    edges = np.unique(np.quantile(col, qs)) if bins > 1 else np.empty(0)
    codes = np.searchsorted(edges, col, side="left").astype(np.int64)
    return codes, edges


@dataclass(frozen=True)
class FeatureScore:
    """gain_ratio is None when H(attr) = 0 (constant attribute): undefined,
    ranked after every defined score."""

    feature: str
    gain_ratio: float | None
    info_gain: float
    intrinsic_entropy: float


def _codes_for(d: Dataset, feature: str, bins: int) -> np.ndarray:
    j = d.schema.index_of(feature)
    col = d.X[:, j]
    if d.schema.features[j].kind == "numeric":
        codes, _ = discretize(col, bins)
        return codes
    _, codes = np.unique(col, return_inverse=True)
    return codes


def gain_ratio(d: Dataset, feature: str, bins: int = 10) -> FeatureScore:
    """Score one attribute against the label per the gain-ratio definition."""
    if d.y is None:
        raise DataError("gain_ratio needs a labeled dataset")
    codes = _codes_for(d, feature, bins)
    n = codes.shape[0]
    h_class = entropy_of_counts(np.bincount(d.y))

    cond = 0.0
    value_counts = []
    for v in np.unique(codes):
        mask = codes == v
        nv = int(mask.sum())
        value_counts.append(nv)
        cond += (nv / n) * entropy_of_counts(np.bincount(d.y[mask]))
    info_gain = max(0.0, h_class - cond)
    h_attr = entropy_of_counts(np.array(value_counts))
    ratio = None if h_attr == 0.0 else max(0.0, info_gain / h_attr)
    return FeatureScore(
        feature=feature,
        gain_ratio=ratio,
        info_gain=info_gain,
        intrinsic_entropy=h_attr,
    )


def score_features(d: Dataset, bins: int = 10) -> list[FeatureScore]:
    """All features scored and ranked: gain_ratio descending, ties by
    info_gain descending, then schema order; undefined scores last."""
    scores = [gain_ratio(d, f.name, bins) for f in d.schema.features]
    return sorted(
        scores,
        key=lambda s: (
            s.gain_ratio is None,
            -(s.gain_ratio or 0.0),
            -s.info_gain,
        ),
    )


def rank_and_select(d: Dataset, k: int = 12, bins: int = 10) -> FeatureSchema:
    """Schema of the top-k features, in rank order."""
    if not 1 <= k <= len(d.schema.features):
        raise DataError(
            f"k must be in 1..{len(d.schema.features)}, got {k}"
        )
    ranked = score_features(d, bins)
    return d.schema.subset([s.feature for s in ranked[:k]])


def scores_to_csv(scores: Sequence[FeatureScore]) -> str:
    lines = ["rank,feature,gain_ratio,info_gain,intrinsic_entropy"]
    for i, s in enumerate(scores, start=1):
        gr = "NA" if s.gain_ratio is None else f"{s.gain_ratio:.6f}"
        lines.append(
            f"{i},{s.feature},{gr},{s.info_gain:.6f},{s.intrinsic_entropy:.6f}"
        )
    return "\n".join(lines) + "\n"
