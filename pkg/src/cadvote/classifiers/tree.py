"""Gain-ratio decision tree (C4.5 style), the base learner for forest/boosting.

Splits are scored by gain ratio: information gain of the candidate partition
divided by the partition's own entropy.  Numeric features take the best
binary threshold at midpoints between consecutive distinct sorted values
(threshold chosen within the feature by information gain, lowest threshold on
ties); binary/ordinal features split multiway on their values.  The winning
feature is the one with the highest gain ratio among features whose gain is
at least the average gain of all admissible candidates — the C4.5 guard that
stops near-zero-entropy partitions (e.g. a sliver of one record) from winning
on ratio alone.  Nodes keep weighted class totals so boosting can reweight
records, and leaves carry Laplace-smoothed probabilities (w1 + 1)/(w + 2),
strictly inside (0, 1).

Induction splits while a node is impure and a structurally valid partition
exists (both threshold sides, or >= 2 branches, meeting min_leaf) — purity,
min_leaf, and max_depth are the stopping rules, not zero gain, so parity
concepts like XOR are still learnable.  Optional pessimistic pruning
(confidence 0.25) collapses subtrees whose upper-bound error estimate does
not beat the leaf replacement.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any

import numpy as np

from ..dataset import Dataset
from ..errors import TrainingError
from ..preprocess import ScalingParams
from .base import (
    Model,
    TrainingMeta,
    require_training_data,
    resolve_scaling,
    training_matrix,
)

# one-sided z for the default 0.25 pruning confidence
_Z_CF25 = 0.6744897501960817
_EPS_GAIN = 1e-12


@dataclass(frozen=True)
class TreeHyperparams:
    min_leaf: int = 2
    max_depth: int | None = None  # None = unlimited
    prune: bool = True

    def __post_init__(self) -> None:
        if self.min_leaf < 1:
            raise TrainingError("tree: min_leaf must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise TrainingError("tree: max_depth must be >= 0")


def _h2(p: np.ndarray | float) -> np.ndarray | float:
    """Binary entropy in bits, elementwise, with 0*log2(0) := 0."""
    p = np.clip(np.asarray(p, dtype=np.float64), 0.0, 1.0)
    out = np.zeros_like(p)
    m = (p > 0.0) & (p < 1.0)
    pm = p[m]
    out[m] = -pm * np.log2(pm) - (1.0 - pm) * np.log2(1.0 - pm)
    return out if out.ndim else float(out)


def _best_numeric_split(
    col: np.ndarray, y: np.ndarray, w: np.ndarray, min_leaf: int
) -> tuple[float, float, float] | None:
    """(gain_ratio, info_gain, threshold) of the best boundary, or None."""
    order = np.argsort(col, kind="stable")
    sc, sy, sw = col[order], y[order], w[order]
    n = sc.shape[0]
    boundaries = np.flatnonzero(sc[:-1] != sc[1:])
    if boundaries.size == 0:
        return None
    counts_left = boundaries + 1
    ok = (counts_left >= min_leaf) & (n - counts_left >= min_leaf)
    boundaries = boundaries[ok]
    if boundaries.size == 0:
        return None

    cum_w = np.cumsum(sw)
    cum_w1 = np.cumsum(sw * sy)
    W, W1 = cum_w[-1], cum_w1[-1]
    wl = cum_w[boundaries]
    wl1 = cum_w1[boundaries]
    wr, wr1 = W - wl, W1 - wl1
    with np.errstate(invalid="ignore", divide="ignore"):
        cond = (wl / W) * _h2(np.where(wl > 0, wl1 / np.maximum(wl, 1e-300), 0)) + (
            wr / W
        ) * _h2(np.where(wr > 0, wr1 / np.maximum(wr, 1e-300), 0))
    ig = np.maximum(0.0, float(_h2(W1 / W)) - cond)
    split_info = _h2(wl / W)
    best = int(np.argmax(ig))  # first max -> lowest threshold on ties
    ratio = float(ig[best] / split_info[best]) if split_info[best] > 0 else 0.0
    i = boundaries[best]
    threshold = float((sc[i] + sc[i + 1]) / 2.0)
    return ratio, float(ig[best]), threshold


def _best_categorical_split(
    col: np.ndarray, y: np.ndarray, w: np.ndarray, min_leaf: int
) -> tuple[float, float, list[float]] | None:
    """(gain_ratio, info_gain, values) for the multiway split, or None."""
    vals = np.unique(col)
    if vals.size < 2:
        return None
    W = float(w.sum())
    W1 = float(w[y == 1].sum())
    cond = 0.0
    branch_w = []
    for v in vals:
        m = col == v
        if int(m.sum()) < min_leaf:
            return None
        wv = float(w[m].sum())
        wv1 = float(w[m & (y == 1)].sum())
        branch_w.append(wv)
        if wv > 0:
            cond += (wv / W) * float(_h2(wv1 / wv))
    ig = max(0.0, float(_h2(W1 / W)) - cond)
    bw = np.asarray(branch_w) / W
    nz = bw[bw > 0]
    split_info = float(-np.sum(nz * np.log2(nz)))
    ratio = ig / split_info if split_info > 0 else 0.0
    return ratio, ig, [float(v) for v in vals]


def _build(
    X: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    kinds: tuple[str, ...],
    hp: TreeHyperparams,
    depth: int,
    rng: np.random.Generator | None,
    max_features: int | None,
) -> dict[str, Any]:
    W = float(w.sum())
    W1 = float(w[y == 1].sum())
    n = y.shape[0]
    node: dict[str, Any] = {
        "W": W,
        "E": min(W1, W - W1),
        "p": (W1 + 1.0) / (W + 2.0),
    }
    pure = bool(np.all(y == y[0]))
    at_depth = hp.max_depth is not None and depth >= hp.max_depth
    if pure or at_depth or n < 2 * hp.min_leaf:
        node["t"] = "leaf"
        return node

    p_total = X.shape[1]
    if rng is not None and max_features is not None and max_features < p_total:
        candidates = np.sort(rng.choice(p_total, size=max_features, replace=False))
    else:
        candidates = np.arange(p_total)

    # one candidate per feature: (ratio, ig, j, split descriptor)
    scored: list[tuple[float, float, int, tuple[str, Any]]] = []
    for j in candidates:
        col = X[:, j]
        if kinds[j] == "numeric":
            res = _best_numeric_split(col, y, w, hp.min_leaf)
            if res is not None:
                ratio, ig, thr = res
                scored.append((ratio, ig, int(j), ("num", thr)))
        else:
            res = _best_categorical_split(col, y, w, hp.min_leaf)
            if res is not None:
                ratio, ig, vals = res
                scored.append((ratio, ig, int(j), ("cat", vals)))

    if not scored:
        node["t"] = "leaf"
        return node

    # admissibility guard: gain must reach the average over candidates
    avg_gain = sum(s[1] for s in scored) / len(scored)
    best_j = -1
    best_split: tuple[str, Any] | None = None
    best_key: tuple[float, float] | None = None
    for ratio, ig, j, split in scored:
        if ig + _EPS_GAIN < avg_gain:
            continue
        key = (ratio, ig)
        if best_key is None or key > best_key:  # strict > keeps schema order on ties
            best_key, best_j, best_split = key, j, split

    if best_split is None:  # unreachable: the max-gain candidate always qualifies
        node["t"] = "leaf"
        return node

    node["j"] = best_j
    if best_split[0] == "num":
        thr = best_split[1]
        node["t"] = "num"
        node["thr"] = thr
        mask = X[:, best_j] <= thr
        node["lo"] = _build(
            X[mask], y[mask], w[mask], kinds, hp, depth + 1, rng, max_features
        )
        node["hi"] = _build(
            X[~mask], y[~mask], w[~mask], kinds, hp, depth + 1, rng, max_features
        )
    else:
        vals = best_split[1]
        node["t"] = "cat"
        node["vals"] = vals
        node["kids"] = []
        for v in vals:
            m = X[:, best_j] == v
            node["kids"].append(
                _build(X[m], y[m], w[m], kinds, hp, depth + 1, rng, max_features)
            )
    return node


def _pessimistic_errors(W: float, E: float, z: float = _Z_CF25) -> float:
    """Upper confidence bound on the error count of a leaf with weight W."""
    if W <= 0:
        return 0.0
    f = E / W
    var = max(f * (1.0 - f) / W + z * z / (4.0 * W * W), 0.0)
    upper = (f + z * z / (2.0 * W) + z * math.sqrt(var)) / (1.0 + z * z / W)
    return min(upper, 1.0) * W


def _prune(node: dict[str, Any]) -> float:
    """Bottom-up subtree replacement; returns the estimated error count."""
    leaf_est = _pessimistic_errors(node["W"], node["E"])
    if node["t"] == "leaf":
        return leaf_est
    if node["t"] == "num":
        subtree_est = _prune(node["lo"]) + _prune(node["hi"])
    else:
        subtree_est = sum(_prune(k) for k in node["kids"])
    if leaf_est <= subtree_est + 1e-9:
        for key in ("j", "thr", "lo", "hi", "vals", "kids"):
            node.pop(key, None)
        node["t"] = "leaf"
        return leaf_est
    return subtree_est


def _predict_into(
    node: dict[str, Any], X: np.ndarray, idx: np.ndarray, out: np.ndarray
) -> None:
    if idx.size == 0:
        return
    if node["t"] == "leaf":
        out[idx] = node["p"]
        return
    j = node["j"]
    if node["t"] == "num":
        mask = X[idx, j] <= node["thr"]
        _predict_into(node["lo"], X, idx[mask], out)
        _predict_into(node["hi"], X, idx[~mask], out)
        return
    remaining = np.ones(idx.shape[0], dtype=bool)
    for v, kid in zip(node["vals"], node["kids"]):
        m = X[idx, j] == v
        _predict_into(kid, X, idx[m], out)
        remaining &= ~m
    out[idx[remaining]] = node["p"]  # unseen category -> node-level estimate


class TreeModel(Model):
    kind = "tree"

    def __init__(self, schema, scaling, meta, root: dict[str, Any]) -> None:
        super().__init__(schema, scaling, meta)
        self.root = root

    def _proba_std(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape[0], dtype=np.float64)
        _predict_into(self.root, X, np.arange(X.shape[0]), out)
        return out

    def payload(self) -> dict[str, Any]:
        return {"root": self.root}

    @classmethod
    def from_payload(cls, payload, schema, scaling, meta) -> "TreeModel":
        return cls(schema, scaling, meta, payload["root"])

    def depth(self) -> int:
        def walk(node: dict[str, Any]) -> int:
            if node["t"] == "leaf":
                return 0
            if node["t"] == "num":
                return 1 + max(walk(node["lo"]), walk(node["hi"]))
            return 1 + max(walk(k) for k in node["kids"])

        return walk(self.root)


def build_root(
    X: np.ndarray,
    y: np.ndarray,
    kinds: tuple[str, ...],
    hp: TreeHyperparams,
    sample_weight: np.ndarray | None = None,
    rng: np.random.Generator | None = None,
    max_features: int | None = None,
) -> dict[str, Any]:
    """Induce (and optionally prune) a tree, returning its root node."""
    w = (
        np.ones(y.shape[0], dtype=np.float64)
        if sample_weight is None
        else np.asarray(sample_weight, dtype=np.float64)
    )
    if w.shape != (y.shape[0],) or np.any(w < 0):
        raise TrainingError("sample_weight must be non-negative, one per record")
    root = _build(X, y, w, kinds, hp, 0, rng, max_features)
    if hp.prune:
        _prune(root)
    return root


def train_tree(
    d: Dataset,
    hp: TreeHyperparams | None = None,
    scaling: ScalingParams | None = None,
    sample_weight: np.ndarray | None = None,
) -> TreeModel:
    hp = hp or TreeHyperparams()
    require_training_data(d)
    scaling = resolve_scaling(d, scaling, needed=False)
    kinds = tuple(f.kind for f in d.schema.features)
    root = build_root(
        training_matrix(d, scaling), d.y, kinds, hp, sample_weight=sample_weight
    )
    meta = TrainingMeta(seed=None, hyperparams=asdict(hp), train_size=len(d))
    return TreeModel(d.schema, scaling, meta, root)
