"""Stratified k-fold CV, confusion matrix, metric suite, grid search, and
Table-IV-style benchmark reports.

Metrics are pooled (micro-averaged) across folds: every held-out
(label, prediction, probability) triple lands in one pool, and the pooled
correct-count over n is the reported CV accuracy.  Zero-denominator metrics
come back as None — an explicit undefined marker, never 0 or NaN.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field, replace
from typing import Any, Iterable, Sequence

import numpy as np

from .classifiers.base import Model, TrainingMeta
from .dataset import Dataset, FeatureSchema
from .ensemble import VotingModel, train_voting
from .errors import CadError, DataError, TrainingError
from .preprocess import SmoteConfig, smote
from .registry import (
    MEMBER_TRAINERS,
    hyperparams_from_dict,
    hyperparams_to_dict,
)
from .selection import rank_and_select

DEFAULT_MEMBER_SPECS: tuple[tuple[str, Any], ...] = (
    ("mlp", None),
    ("forest", None),
    ("adaboost", None),
)

# Hyperparameters the shipped benchmark uses when not re-tuning: per-family
# grid-search winners on the bundled fixture.  The voting ensemble combines
# the mlp/forest/adaboost entries.
TUNED_HYPERPARAMS: dict[str, dict[str, Any]] = {
    "mlp": {},
    "forest": {"min_leaf": 2},
    "adaboost": {"weak_depth": 3, "n_rounds": 100},
    "tree": {},
    "naive_bayes": {},
    "knn": {},
}

# Small seeded grids for re-tuning each family (inner stratified CV); the
# ensemble is not tuned separately — it combines the family winners.
DEFAULT_GRIDS: dict[str, dict[str, list[Any]]] = {
    "mlp": {"learning_rate": [0.3, 0.6], "epochs": [500, 1000]},
    "forest": {"min_leaf": [1, 2]},
    "adaboost": {"weak_depth": [1, 2, 3], "n_rounds": [50, 100]},
    "tree": {"min_leaf": [2, 5]},
    "knn": {"k": [5, 7, 9, 11]},
}


def sub_seed(*parts: Any) -> int:
    """Stable 64-bit sub-seed from a path of ints/strings (platform-independent)."""
    digest = hashlib.sha256(repr(parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little")


# ---------------------------------------------------------------------------
# fold plans


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray  # record index -> fold id
    seed: int

    def __post_init__(self) -> None:
        a = np.asarray(self.assignments, dtype=np.int64)
        a.flags.writeable = False
        object.__setattr__(self, "assignments", a)
        if self.k < 2:
            raise DataError("fold plan needs k >= 2")
        if a.size and (a.min() < 0 or a.max() >= self.k):
            raise DataError("fold assignments out of range")
        sizes = np.bincount(a, minlength=self.k)
        if sizes.size and sizes.max() - sizes.min() > 1:
            raise DataError("fold sizes differ by more than 1")

    def fold_indices(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        test = np.flatnonzero(self.assignments == fold)
        train = np.flatnonzero(self.assignments != fold)
        return train, test


def stratified_folds(d: Dataset, k: int, seed: int = 0) -> FoldPlan:
    """Seeded shuffle within each class, then round-robin assignment with a
    fold cursor that runs on across classes, so both fold sizes and per-fold
    class counts stay within +-1 of perfect stratification."""
    if d.y is None:
        raise DataError("stratified folds need a labeled dataset")
    n = len(d)
    if not 2 <= k <= n:
        raise DataError(f"k must be in 2..{n}, got {k}")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    assignments = np.empty(n, dtype=np.int64)
    cursor = 0
    for c in (0, 1):
        idx = np.flatnonzero(d.y == c)
        rng.shuffle(idx)
        for i in idx:
            assignments[i] = cursor % k
            cursor += 1
    return FoldPlan(k=k, assignments=assignments, seed=seed)


# ---------------------------------------------------------------------------
# confusion + metrics


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise DataError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


def confusion(pairs: Iterable[tuple[int, int]]) -> ConfusionMatrix:
    """Counts with CAD (label 1) as positive: rows truth, columns prediction."""
    tp = fp = fn = tn = 0
    for truth, pred in pairs:
        if truth == 1:
            if pred == 1:
                tp += 1
            else:
                fn += 1
        else:
            if pred == 1:
                fp += 1
            else:
                tn += 1
    if tp + fp + fn + tn == 0:
        raise DataError("confusion needs at least one pair")
    return ConfusionMatrix(tp=tp, fp=fp, fn=fn, tn=tn)


def confusion_from_arrays(y_true: np.ndarray, y_pred: np.ndarray) -> ConfusionMatrix:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.size == 0:
        raise DataError("confusion needs matching non-empty label arrays")
    return ConfusionMatrix(
        tp=int(np.sum((y_true == 1) & (y_pred == 1))),
        fp=int(np.sum((y_true == 0) & (y_pred == 1))),
        fn=int(np.sum((y_true == 1) & (y_pred == 0))),
        tn=int(np.sum((y_true == 0) & (y_pred == 0))),
    )


@dataclass(frozen=True)
class MetricsReport:
    """None marks a metric whose denominator vanished (undefined)."""

    accuracy: float | None
    precision: float | None
    recall: float | None
    specificity: float | None
    f_measure: float | None
    mcc: float | None
    kappa: float | None
    rmse: float | None
    roc_auc: float | None
    confusion: ConfusionMatrix
    roc_points: tuple[tuple[float, float, float], ...] = ()


def _ratio(num: float, den: float) -> float | None:
    return None if den == 0 else num / den


def compute_metrics(
    cm: ConfusionMatrix,
    scored: Sequence[tuple[int, float]] | None = None,
) -> MetricsReport:
    """Full metric suite from a confusion matrix plus (label, p) pairs.

    accuracy = (tp+tn)/n; recall = tp/(tp+fn); specificity = tn/(tn+fp);
    precision = tp/(tp+fp); F = harmonic mean of precision and recall;
    MCC = (tp*tn - fp*fn)/sqrt((tp+fp)(tp+fn)(tn+fp)(tn+fn));
    kappa = (p_o - p_e)/(1 - p_e) with chance agreement from the marginals;
    RMSE over p_positive vs {0,1} truth; ROC/AUC over the scores.
    """
    tp, fp, fn, tn = cm.tp, cm.fp, cm.fn, cm.tn
    n = cm.total
    if scored is not None and len(scored) != n:
        raise DataError(
            f"scored length ({len(scored)}) inconsistent with confusion total ({n})"
        )
    accuracy = _ratio(tp + tn, n)
    precision = _ratio(tp, tp + fp)
    recall = _ratio(tp, tp + fn)
    specificity = _ratio(tn, tn + fp)
    if precision is None or recall is None or precision + recall == 0:
        f_measure = None
    else:
        f_measure = 2.0 * precision * recall / (precision + recall)
    mcc_den = (
        float(tp + fp) * float(tp + fn) * float(tn + fp) * float(tn + fn)
    )
    mcc = (
        None
        if mcc_den == 0
        else (float(tp) * tn - float(fp) * fn) / math.sqrt(mcc_den)
    )
    if n == 0:
        kappa = None
    else:
        p_o = (tp + tn) / n
        p_e = (
            float(tp + fp) * (tp + fn) + float(fn + tn) * (fp + tn)
        ) / (float(n) * n)
        kappa = None if p_e == 1.0 else (p_o - p_e) / (1.0 - p_e)

    rmse = None
    roc_points: tuple[tuple[float, float, float], ...] = ()
    auc = None
    if scored is not None and len(scored) > 0:
        truths = np.array([t for t, _ in scored], dtype=np.float64)
        ps = np.array([p for _, p in scored], dtype=np.float64)
        rmse = float(np.sqrt(np.mean((ps - truths) ** 2)))
        try:
            points, auc_val = roc_auc(scored)
            roc_points = tuple(points)
            auc = auc_val
        except DataError:
            auc = None  # single-class pool: curve undefined
    return MetricsReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        specificity=specificity,
        f_measure=f_measure,
        mcc=mcc,
        kappa=kappa,
        rmse=rmse,
        roc_auc=auc,
        confusion=cm,
        roc_points=roc_points,
    )


def roc_auc(
    scored: Sequence[tuple[int, float]],
) -> tuple[list[tuple[float, float, float]], float]:
    """ROC sweep over distinct scores descending (ties grouped), trapezoidal
    area.  Points run from (0,0) at threshold +inf to (1,1) at the minimum
    score; both coordinates are monotone non-decreasing."""
    truths = np.array([t for t, _ in scored], dtype=np.int64)
    ps = np.array([p for _, p in scored], dtype=np.float64)
    P = int(np.sum(truths == 1))
    N = int(np.sum(truths == 0))
    if P == 0 or N == 0:
        raise DataError("roc needs both classes present")
    order = np.argsort(-ps, kind="stable")
    st, sp = truths[order], ps[order]
    points: list[tuple[float, float, float]] = [(0.0, 0.0, math.inf)]
    tp = fp = 0
    i = 0
    n = len(sp)
    while i < n:
        j = i
        while j < n and sp[j] == sp[i]:
            j += 1
        tp += int(np.sum(st[i:j] == 1))
        fp += int(np.sum(st[i:j] == 0))
        points.append((fp / N, tp / P, float(sp[i])))
        i = j
    auc = 0.0
    for (x0, y0, _), (x1, y1, _) in zip(points[:-1], points[1:]):
        auc += (x1 - x0) * (y0 + y1) / 2.0
    return points, float(auc)


# ---------------------------------------------------------------------------
# pipelines + cross-validation


@dataclass(frozen=True)
class PipelineConfig:
    """Everything cross_validate needs: preprocessing flags, optional
    feature-selection k, and the model spec.

    kind "voting" reads ``member_specs``; other kinds read ``hyperparams``
    (a kind-specific dataclass, or None for defaults).  mode "paper" applies
    SMOTE and selection once, globally, before folding — the reproduction
    setting; mode "default" fits them inside each training fold.
    """

    name: str
    kind: str
    hyperparams: Any = None
    member_specs: tuple[tuple[str, Any], ...] = DEFAULT_MEMBER_SPECS
    tie_break: str = "confidence"
    fixed_label: int = 1
    use_smote: bool = True
    smote_k: int = 5
    selection_k: int | None = None
    mode: str = "default"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.mode not in ("default", "paper"):
            raise DataError(f"unknown mode {self.mode!r}")


@dataclass(frozen=True)
class CVResult:
    report: MetricsReport
    member_reports: dict[str, MetricsReport] = field(default_factory=dict)
    n_evaluated: int = 0
    selected_features: tuple[tuple[str, ...], ...] = ()  # per fold


class _MajorityModel(Model):
    """Testing/sanity baseline: always predicts the training majority class."""

    kind = "majority"

    def __init__(self, schema, scaling, meta, p: float) -> None:
        super().__init__(schema, scaling, meta)
        self.p = p

    def _proba_std(self, X: np.ndarray) -> np.ndarray:
        return np.full(X.shape[0], self.p, dtype=np.float64)

    def payload(self) -> dict[str, Any]:
        return {"p": self.p}


def _subset(d: Dataset, idx: np.ndarray) -> Dataset:
    return Dataset(d.schema, [d.records[i] for i in idx], provenance=d.provenance)


def _project(d: Dataset, schema: FeatureSchema) -> Dataset:
    cols = [d.schema.index_of(n) for n in schema.feature_names]
    return Dataset.from_arrays(schema, d.X[:, cols], d.y, provenance=d.provenance)


def _train_single(kind: str, d: Dataset, hp: Any, seed: int) -> Model:
    if kind == "majority":
        counts = d.class_counts()
        p = counts[1] / len(d)
        meta = TrainingMeta(seed=None, hyperparams={}, train_size=len(d))
        return _MajorityModel(d.schema, None, meta, p)
    if kind not in MEMBER_TRAINERS:
        raise TrainingError(f"unknown classifier kind {kind!r}")
    if hp is None:
        hp = hyperparams_from_dict(kind, None)
    if hasattr(hp, "seed"):
        hp = replace(hp, seed=seed)
    return MEMBER_TRAINERS[kind](d, hp)


def train_pipeline_model(
    pipeline: PipelineConfig, train_d: Dataset, seed: int
) -> Model:
    """Train the pipeline's model on an already-preprocessed dataset."""
    if pipeline.kind == "voting":
        return train_voting(
            train_d,
            pipeline.member_specs,
            tie_break=pipeline.tie_break,
            fixed_label=pipeline.fixed_label,
            seed=seed,
        )
    return _train_single(pipeline.kind, train_d, pipeline.hyperparams, seed)


def prepare_training_data(
    pipeline: PipelineConfig, d: Dataset, fold: int | None
) -> Dataset:
    """Selection first (scores computed on real records only), then SMOTE."""
    seed_path = ("smote", pipeline.seed) if fold is None else ("smote", pipeline.seed, fold)
    if pipeline.selection_k is not None:
        sub = rank_and_select(d, pipeline.selection_k)
        d = _project(d, sub)
    if pipeline.use_smote:
        d = smote(
            d,
            SmoteConfig(
                k_neighbors=pipeline.smote_k,
                target="balance",
                seed=sub_seed(*seed_path),
            ),
        )
    return d


def cross_validate(
    d: Dataset, pipeline: PipelineConfig, plan: FoldPlan
) -> CVResult:
    """Per fold: preprocess the training portion only (default mode), train,
    predict the held-out fold; pool all triples into one report.

    In paper mode, SMOTE + selection run once over the whole dataset first
    (the leakage the original figures imply) and folds are re-planned over
    the augmented records with the same k and seed as ``plan``.
    """
    if d.y is None:
        raise DataError("cross_validate needs a labeled dataset")
    if plan.assignments.shape[0] != len(d):
        raise DataError("fold plan does not match dataset size")

    if pipeline.mode == "paper":
        prepared = prepare_training_data(pipeline, d, fold=None)
        plan = stratified_folds(prepared, plan.k, plan.seed)
        work = prepared
        per_fold_prep = False
    else:
        work = d
        per_fold_prep = True

    y_true_all: list[np.ndarray] = []
    y_pred_all: list[np.ndarray] = []
    p_all: list[np.ndarray] = []
    member_keys: list[str] = []
    member_pred_all: dict[str, list[np.ndarray]] = {}
    member_p_all: dict[str, list[np.ndarray]] = {}
    selected: list[tuple[str, ...]] = []

    for t in range(plan.k):
        try:
            train_idx, test_idx = plan.fold_indices(t)
            train_d = _subset(work, train_idx)
            if per_fold_prep:
                train_d = prepare_training_data(pipeline, train_d, fold=t)
            selected.append(train_d.schema.feature_names)
            model = train_pipeline_model(
                pipeline, train_d, seed=sub_seed("train", pipeline.seed, t)
            )
            test_X_full = work.X[test_idx]
            cols = [work.schema.index_of(nm) for nm in model.schema.feature_names]
            test_X = test_X_full[:, cols]
            y_true = work.y[test_idx]
            if isinstance(model, VotingModel):
                labels, mean_p, m_labels, m_p = model.vote_batch(test_X)
                if not member_keys:
                    member_keys = [
                        f"{m.kind}" if sum(x.kind == m.kind for x in model.members) == 1
                        else f"{m.kind}_{i}"
                        for i, m in enumerate(model.members)
                    ]
                    for key in member_keys:
                        member_pred_all[key] = []
                        member_p_all[key] = []
                for mi, key in enumerate(member_keys):
                    member_pred_all[key].append(m_labels[mi])
                    member_p_all[key].append(m_p[mi])
                y_pred, p = labels, mean_p
            else:
                y_pred, p = model.predict_batch(test_X)
        except CadError as e:
            raise type(e)(f"fold {t}: {e}") from e
        y_true_all.append(y_true)
        y_pred_all.append(y_pred)
        p_all.append(p)

    y_true = np.concatenate(y_true_all)
    y_pred = np.concatenate(y_pred_all)
    p = np.concatenate(p_all)
    cm = confusion_from_arrays(y_true, y_pred)
    scored = list(zip(y_true.tolist(), p.tolist()))
    report = compute_metrics(cm, scored)

    member_reports = {}
    for key in member_keys:
        mp = np.concatenate(member_pred_all[key])
        mpp = np.concatenate(member_p_all[key])
        mcm = confusion_from_arrays(y_true, mp)
        member_reports[key] = compute_metrics(
            mcm, list(zip(y_true.tolist(), mpp.tolist()))
        )
    return CVResult(
        report=report,
        member_reports=member_reports,
        n_evaluated=int(y_true.shape[0]),
        selected_features=tuple(selected),
    )


# ---------------------------------------------------------------------------
# grid search


@dataclass(frozen=True)
class GridCell:
    params: dict[str, Any]
    accuracy: float | None
    error: str | None


def grid_search(
    d: Dataset,
    kind: str,
    grid: dict[str, list[Any]],
    inner_k: int = 5,
    seed: int = 0,
    base_pipeline: PipelineConfig | None = None,
) -> tuple[Any, list[GridCell]]:
    """Exhaustive Cartesian sweep scored by inner stratified-CV accuracy on
    the given (training) data; ties keep the first cell in grid order.
    Failed cells are recorded in the table and skipped."""
    if not grid:
        raise DataError("grid must not be empty")
    base = base_pipeline or PipelineConfig(
        name=f"grid-{kind}", kind=kind, use_smote=False
    )
    base_hp = hyperparams_to_dict(base.hyperparams) or {}
    plan = stratified_folds(d, inner_k, seed)
    names = list(grid)
    cells: list[GridCell] = []
    best: tuple[float, int] | None = None  # (accuracy, cell index)
    for idx, combo in enumerate(itertools.product(*(grid[n] for n in names))):
        params = dict(zip(names, combo))
        try:
            hp = hyperparams_from_dict(kind, {**base_hp, **params})
            pipe = replace(base, kind=kind, hyperparams=hp, name=f"{kind}#{idx}")
            res = cross_validate(d, pipe, plan)
            acc = res.report.accuracy
            cells.append(GridCell(params=params, accuracy=acc, error=None))
            if acc is not None and (best is None or acc > best[0]):
                best = (acc, idx)
        except CadError as e:
            cells.append(GridCell(params=params, accuracy=None, error=str(e)))
    if best is None:
        raise TrainingError(f"grid search for {kind}: every cell failed")
    winner = cells[best[1]].params
    return hyperparams_from_dict(kind, {**base_hp, **winner}), cells


def tune_families(
    d: Dataset,
    grids: dict[str, dict[str, list[Any]]] | None = None,
    inner_k: int = 5,
    seed: int = 0,
    base_pipeline: PipelineConfig | None = None,
) -> dict[str, Any]:
    """Grid-search each classifier family, returning kind -> winning
    hyperparams.  Families without a grid keep their defaults."""
    grids = DEFAULT_GRIDS if grids is None else grids
    if base_pipeline is None:
        base_pipeline = PipelineConfig(name="grid", kind="tree", seed=seed)
    tuned: dict[str, Any] = {}
    for kind, grid in grids.items():
        base = replace(base_pipeline, kind=kind, name=f"grid-{kind}", hyperparams=None)
        hp, _ = grid_search(d, kind, grid, inner_k=inner_k, seed=seed, base_pipeline=base)
        tuned[kind] = hp
    return tuned


def benchmark_pipelines(
    tuned: dict[str, Any] | None = None,
    mode: str = "default",
    seed: int = 0,
    use_smote: bool = True,
    smote_k: int = 5,
    selection_k: int | None = None,
) -> list[PipelineConfig]:
    """The benchmark roster: the voting ensemble of the three tuned members,
    then each single-family pipeline.  ``tuned`` maps kind -> hyperparams and
    falls back to the shipped fixture-tuned set."""
    hp: dict[str, Any] = {
        kind: hyperparams_from_dict(kind, dict(params))
        for kind, params in TUNED_HYPERPARAMS.items()
    }
    for kind, obj in (tuned or {}).items():
        hp[kind] = obj
    common = dict(
        mode=mode,
        seed=seed,
        use_smote=use_smote,
        smote_k=smote_k,
        selection_k=selection_k,
    )
    members = tuple((kind, hp[kind]) for kind in ("mlp", "forest", "adaboost"))
    pipelines = [
        PipelineConfig(name="voting", kind="voting", member_specs=members, **common)
    ]
    for kind in ("mlp", "forest", "adaboost", "tree", "naive_bayes", "knn"):
        pipelines.append(
            PipelineConfig(name=kind, kind=kind, hyperparams=hp[kind], **common)
        )
    return pipelines


# ---------------------------------------------------------------------------
# benchmark report


@dataclass(frozen=True)
class BenchmarkRow:
    name: str
    result: CVResult | None
    error: str | None


def _fmt_pct(v: float | None) -> str:
    return "NA" if v is None else f"{100.0 * v:.2f}"


def _fmt_coef(v: float | None) -> str:
    return "NA" if v is None else f"{v:.4f}"


def benchmark_report(
    d: Dataset, pipelines: Sequence[PipelineConfig], plan: FoldPlan
) -> list[BenchmarkRow]:
    """One row per pipeline, sorted by accuracy descending (failed rows last,
    in input order, with the error recorded in the row)."""
    if not pipelines:
        raise DataError("benchmark needs at least one pipeline")
    rows: list[BenchmarkRow] = []
    for pipe in pipelines:
        try:
            rows.append(BenchmarkRow(pipe.name, cross_validate(d, pipe, plan), None))
        except CadError as e:
            rows.append(BenchmarkRow(pipe.name, None, str(e)))
    order = sorted(
        range(len(rows)),
        key=lambda i: (
            rows[i].result is None,
            -(rows[i].result.report.accuracy or 0.0) if rows[i].result else 0.0,
            i,
        ),
    )
    return [rows[i] for i in order]


def report_to_dict(report: MetricsReport) -> dict[str, Any]:
    """JSON-safe metric mapping (None where the denominator vanished)."""
    cm = report.confusion
    return {
        "accuracy": report.accuracy,
        "precision": report.precision,
        "recall": report.recall,
        "specificity": report.specificity,
        "f_measure": report.f_measure,
        "mcc": report.mcc,
        "kappa": report.kappa,
        "rmse": report.rmse,
        "roc_auc": report.roc_auc,
        "confusion": {"tp": cm.tp, "fp": cm.fp, "tn": cm.tn, "fn": cm.fn},
    }


def report_csv(rows: Sequence[BenchmarkRow]) -> str:
    """Percentages to 2 decimals, coefficients to 4; NA for undefined."""
    lines = ["model,accuracy,precision,recall,f_measure,mcc,roc_area,kappa,rmse"]
    for row in rows:
        if row.result is None:
            lines.append(f"{row.name},NA,NA,NA,NA,NA,NA,NA,NA")
            continue
        r = row.result.report
        lines.append(
            f"{row.name},{_fmt_pct(r.accuracy)},{_fmt_pct(r.precision)},"
            f"{_fmt_pct(r.recall)},{_fmt_pct(r.f_measure)},{_fmt_coef(r.mcc)},"
            f"{_fmt_coef(r.roc_auc)},{_fmt_coef(r.kappa)},{_fmt_coef(r.rmse)}"
        )
    return "\n".join(lines) + "\n"


def roc_csv(report: MetricsReport) -> str:
    lines = ["fpr,tpr,threshold"]
    for fpr, tpr, thr in report.roc_points:
        thr_s = "inf" if math.isinf(thr) else f"{thr:.6f}"
        lines.append(f"{fpr:.6f},{tpr:.6f},{thr_s}")
    return "\n".join(lines) + "\n"


_SVG_COLORS = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
)


def roc_svg(rows: Sequence[BenchmarkRow]) -> str:
    """Unit-square ROC plot, one polyline per successful model."""
    size, margin = 480.0, 50.0
    span = size - 2 * margin

    def sx(fpr: float) -> float:
        return margin + fpr * span

    def sy(tpr: float) -> float:
        return size - margin - tpr * span

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" '
        f'height="{size:.0f}" viewBox="0 0 {size:.0f} {size:.0f}">',
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" '
        'fill="none" stroke="#333" stroke-width="1"/>',
        f'<line x1="{sx(0):.1f}" y1="{sy(0):.1f}" x2="{sx(1):.1f}" y2="{sy(1):.1f}" '
        'stroke="#bbb" stroke-dasharray="4 4"/>',
        f'<text x="{size / 2:.1f}" y="{size - 10:.1f}" text-anchor="middle" '
        'font-size="12">false positive rate</text>',
        f'<text x="14" y="{size / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {size / 2:.1f})">true positive rate</text>',
    ]
    drawn = 0
    for row in rows:
        if row.result is None or not row.result.report.roc_points:
            continue
        color = _SVG_COLORS[drawn % len(_SVG_COLORS)]
        pts = " ".join(
            f"{sx(fpr):.2f},{sy(tpr):.2f}"
            for fpr, tpr, _ in row.result.report.roc_points
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{margin + 8:.1f}" y="{margin + 16 + 14 * drawn:.1f}" '
            f'font-size="11" fill="{color}">{row.name}</text>'
        )
        drawn += 1
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
