"""Record real service responses as JSON fixtures for the UI contract tests.

Run from the repository root (needs the Python package installed):

    python3 frontend/scripts/record_fixtures.py

Everything is seeded, so re-recording is reproducible; the UI tests then
assert against what the service actually returns, not against hand-written
approximations.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

from fastapi.testclient import TestClient

from cadvote.bundle import load_bundle, save_bundle
from cadvote.classifiers import train_tree
from cadvote.dataset import Dataset, Feature, PatientRecord
from cadvote.ensemble import train_voting
from cadvote.evaluation import DEFAULT_MEMBER_SPECS
from cadvote.fixture import synthetic_dataset
from cadvote.service import create_app

OUT = Path(__file__).resolve().parent.parent / "test" / "fixtures"


def _record(d: Dataset, i: int) -> dict[str, float]:
    return {
        f.name: float(d.X[i][j]) for j, f in enumerate(d.schema.features)
    }


def _save(name: str, payload) -> None:
    (OUT / name).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"recorded {name}")


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    d = synthetic_dataset(300, seed=0)
    model = train_voting(d, DEFAULT_MEMBER_SPECS, seed=5)
    bundle_path = OUT / "_voting.cadm"
    save_bundle(
        model,
        bundle_path,
        # median 10-fold CV accuracy over seeds 0..9, leakage-safe mode
        metrics={
            "accuracy": 0.8117,
            "cv": {"k": 10, "seeds": "0..9", "mode": "default", "statistic": "median"},
        },
    )
    client = TestClient(create_app(load_bundle(bundle_path)))

    _save("model_info.json", client.get("/model/info").json())

    # one record per verdict, plus one with a split (2-vs-1) vote
    split_i = cad_i = normal_i = None
    for i in range(300):
        body = client.post("/predict", json=_record(d, i)).json()
        labels = {v["label"] for v in body["votes"]}
        if len(labels) > 1 and split_i is None:
            split_i = i
        if body["label"] == "CAD" and cad_i is None:
            cad_i = i
        if body["label"] == "Normal" and normal_i is None:
            normal_i = i
        if None not in (split_i, cad_i, normal_i):
            break
    assert None not in (split_i, cad_i, normal_i), "fixture lacks vote variety"

    for name, idx in (
        ("predict_cad", cad_i),
        ("predict_normal", normal_i),
        ("predict_split_vote", split_i),
    ):
        record = _record(d, idx)
        _save(f"{name}_request.json", record)
        _save(f"{name}.json", client.post("/predict", json=record).json())

    base = _record(d, cad_i)
    _save(
        "whatif_ef_sweep.json",
        client.post(
            "/whatif",
            json={
                "base": base,
                "feature": "EF-TTE",
                "values": [float(v) for v in range(15, 61, 5)],
            },
        ).json(),
    )
    _save(
        "whatif_with_error.json",
        client.post(
            "/whatif",
            json={"base": base, "feature": "EF-TTE", "values": [30.0, 500.0, 50.0]},
        ).json(),
    )
    single = dict(base)
    single["EF-TTE"] = 42.0
    _save("predict_single_point.json", client.post("/predict", json=single).json())
    _save(
        "whatif_single_point.json",
        client.post(
            "/whatif", json={"base": base, "feature": "EF-TTE", "values": [42.0]}
        ).json(),
    )

    bad = dict(base)
    del bad["FBS"]
    resp = client.post("/predict", json=bad)
    _save("predict_missing_field.json", resp.json())
    assert resp.status_code == 400

    # same UI code must render different ranges for a different bundle schema
    altered = dataclasses.replace(
        d.schema,
        features=tuple(
            dataclasses.replace(f, valid_range=(f.valid_range[0] + 5, f.valid_range[1] + 10))
            if f.kind == "numeric"
            else f
            for f in d.schema.features
        ),
    )
    recs = [
        PatientRecord(values=r.values, label=r.label) for r in d.records
    ]
    tree = train_tree(Dataset(altered, recs))
    altered_path = OUT / "_altered.cadm"
    save_bundle(tree, altered_path)
    altered_client = TestClient(create_app(load_bundle(altered_path)))
    _save("model_info_altered.json", altered_client.get("/model/info").json())

    bundle_path.unlink()
    altered_path.unlink()


if __name__ == "__main__":
    main()
