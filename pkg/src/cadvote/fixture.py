"""Seeded synthetic dataset for running the suite without the real export.

Records are schema-conformant and carry the real data's broad shape: the
same marginals to first order, mutually exclusive chest-pain categories,
diabetes driving fasting blood sugar, hypertension driving blood pressure,
and wall-motion abnormality depressing ejection fraction.  Labels come from
a latent risk score thresholded at the exact 72/28 split, so class counts
are deterministic (300 records -> 216 positive / 84 negative)."""

from __future__ import annotations

import numpy as np

from .dataset import Dataset, PatientRecord, cad12_schema
from .errors import DataError


def synthetic_dataset(n: int = 300, seed: int = 0) -> Dataset:
    if n < 10:
        raise DataError("fixture needs n >= 10")
    schema = cad12_schema()
    rng = np.random.default_rng(np.random.SeedSequence((0xCADF1C, seed)))

    age = np.clip(np.round(rng.normal(59.0, 10.5, n)), 30, 86)

    # chest pain: one (or none) of typical/atypical/nonanginal per patient
    pain = rng.choice(4, size=n, p=[0.54, 0.26, 0.05, 0.15])
    typical = (pain == 0).astype(np.float64)
    atypical = (pain == 1).astype(np.float64)
    nonanginal = (pain == 2).astype(np.float64)

    dm = (rng.uniform(size=n) < 0.30).astype(np.float64)
    htn = (rng.uniform(size=n) < 0.59).astype(np.float64)
    tinv = (rng.uniform(size=n) < 0.30).astype(np.float64)

    fbs = np.where(
        dm == 1.0,
        rng.normal(170.0, 62.0, n),
        rng.normal(97.0, 11.0, n),
    )
    fbs = np.clip(np.round(fbs), 62, 400)

    bp = np.clip(np.round(rng.normal(120.0, 13.0, n) + 16.0 * htn), 90, 190)

    esr = np.clip(np.round(1.0 + rng.gamma(1.6, 12.0, n)), 1, 90)
    k = np.clip(np.round(rng.normal(4.23, 0.46, n), 1), 3.0, 6.6)

    rwma = rng.choice(5, size=n, p=[0.70, 0.12, 0.08, 0.06, 0.04]).astype(np.float64)
    ef = np.clip(np.round(rng.normal(50.0, 7.0, n) - 3.5 * rwma), 15, 60)

    noise = rng.normal(0.0, 0.9, n)
    # linear terms plus clinical threshold effects and interactions, so that
    # smooth and tree-based learners are on comparable footing
    risk = (
        0.030 * (age - 59.0)
        + 1.10 * typical
        - 0.35 * atypical
        - 0.45 * nonanginal
        + 0.50 * dm
        + 0.40 * htn
        + 0.55 * tinv
        + 0.008 * (fbs - 119.0)
        + 0.015 * (esr - 20.0)
        - 0.040 * (ef - 47.0)
        + 0.35 * rwma
        + 0.90 * ((fbs >= 126.0) & (dm == 1.0))  # uncontrolled diabetes step
        + 0.80 * (ef < 40.0)  # impaired ejection fraction step
        + 0.70 * (rwma >= 2.0)  # multi-region wall-motion abnormality step
        + 0.45 * typical * (age > 55.0)  # pain is more specific in older patients
        + noise
    )
    n_pos = int(round(0.72 * n))
    # exact class counts: the n_pos highest-risk records are positive
    order = np.argsort(-risk, kind="stable")
    y = np.zeros(n, dtype=np.int64)
    y[order[:n_pos]] = 1

    X = np.column_stack(
        [age, dm, htn, bp, typical, atypical, nonanginal, tinv, fbs, esr, k, ef, rwma]
    )
    records = [
        PatientRecord(values=X[i], label=int(y[i])) for i in range(n)
    ]
    return Dataset(schema, records, provenance=f"fixture(n={n}, seed={seed})")
