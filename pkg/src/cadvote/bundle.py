"""Versioned single-file model container.

Layout (text, UTF-8; full reference in docs/bundle-format.md):

    line 1:  CADM <format-version> <sha256-hex-of-body>
    line 2+: canonical JSON body (sorted keys, compact separators)

The body holds the feature schema, the model (kind, scaling, meta, payload —
ensembles nest their members), optional training-run metrics, and a canary
record with its expected prediction.  Loading verifies magic, format
version, and checksum before parsing; the canary re-prediction is the
round-trip self-check services run at startup.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from . import __version__
from .classifiers.base import Model, predict
from .dataset import FeatureSchema, schema_from_dict, schema_to_dict
from .errors import BundleError, BundleVersionError
from .registry import (
    meta_from_dict,
    meta_to_dict,
    model_class,
    scaling_from_dict,
    scaling_to_dict,
)

MAGIC = "CADM"
FORMAT_VERSION = 1
SUPPORTED_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Bundle:
    model: Model
    schema: FeatureSchema
    metrics: dict[str, Any] | None
    canary: dict[str, Any]
    format_version: int
    tool_version: str
    body_sha: str = ""  # hex digest of the serialized body (set when loaded)

    @property
    def feature_list(self) -> tuple[str, ...]:
        return self.schema.feature_names


def _canary_record(schema: FeatureSchema) -> dict[str, float]:
    """A deterministic in-range record: numeric midpoints, integer midpoints
    for binary/ordinal scales."""
    fields: dict[str, float] = {}
    for f in schema.features:
        lo, hi = f.valid_range
        if f.kind == "numeric":
            fields[f.name] = (lo + hi) / 2.0
        else:
            fields[f.name] = float(int((lo + hi) // 2))
    return fields


def _body_dict(model: Model, metrics: dict[str, Any] | None) -> dict[str, Any]:
    fields = _canary_record(model.schema)
    label, p = predict(model, fields)
    return {
        "tool": "cadvote",
        "tool_version": __version__,
        "schema": schema_to_dict(model.schema),
        "model": {
            "kind": model.kind,
            "scaling": scaling_to_dict(model.scaling),
            "meta": meta_to_dict(model.meta),
            "payload": model.payload(),
        },
        "metrics": metrics,
        "canary": {"fields": fields, "label": label, "p_positive": p},
    }


def save_bundle(model: Model, path: str | Path, metrics: dict[str, Any] | None = None) -> None:
    body = json.dumps(
        _body_dict(model, metrics),
        sort_keys=True,
        separators=(",", ":"),
        allow_nan=False,
    )
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"{MAGIC} {FORMAT_VERSION} {digest}\n")
        fh.write(body)
        fh.write("\n")


def load_bundle(path: str | Path) -> Bundle:
    path = Path(path)
    if not path.exists():
        raise BundleError(f"bundle not found: {path}")
    raw = path.read_text("utf-8")
    newline = raw.find("\n")
    if newline < 0:
        raise BundleError(f"corrupt bundle {path}: missing body")
    header, body = raw[:newline], raw[newline + 1 :].rstrip("\n")
    parts = header.split()
    if len(parts) != 3 or parts[0] != MAGIC:
        raise BundleError(f"corrupt bundle {path}: bad header {header!r}")
    try:
        version = int(parts[1])
    except ValueError:
        raise BundleError(f"corrupt bundle {path}: bad format version {parts[1]!r}") from None
    if version > FORMAT_VERSION:
        raise BundleVersionError(
            f"bundle {path} uses format version {version}; "
            f"this build supports <= {FORMAT_VERSION}"
        )
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    if digest != parts[2]:
        raise BundleError(
            f"corrupt bundle {path}: checksum mismatch (truncated or edited file)"
        )
    try:
        doc = json.loads(body)
    except json.JSONDecodeError as e:
        raise BundleError(f"corrupt bundle {path}: unparseable body ({e})") from None

    schema = schema_from_dict(doc["schema"])
    if schema.version > SUPPORTED_SCHEMA_VERSION:
        raise BundleVersionError(
            f"bundle {path} uses schema version {schema.version}; "
            f"this build supports <= {SUPPORTED_SCHEMA_VERSION}"
        )
    md = doc["model"]
    model = model_class(md["kind"]).from_payload(
        md["payload"],
        schema,
        scaling_from_dict(md["scaling"]),
        meta_from_dict(md["meta"]),
    )
    return Bundle(
        model=model,
        schema=schema,
        metrics=doc.get("metrics"),
        canary=doc["canary"],
        format_version=version,
        tool_version=doc.get("tool_version", "unknown"),
        body_sha=digest,
    )


def verify_canary(b: Bundle) -> None:
    """Re-predict the embedded canary; any drift means the persisted model
    does not reproduce its own training-time behavior."""
    label, p = predict(b.model, {k: float(v) for k, v in b.canary["fields"].items()})
    if label != b.canary["label"] or abs(p - b.canary["p_positive"]) > 1e-12:
        raise BundleError(
            "bundle self-check failed: canary prediction "
            f"(label={label}, p={p!r}) != recorded "
            f"(label={b.canary['label']}, p={b.canary['p_positive']!r})"
        )
