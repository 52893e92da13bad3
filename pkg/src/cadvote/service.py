"""HTTP inference service over a saved model bundle.

Endpoints: GET /health, GET /model/info, POST /predict, POST /whatif.
Requests carry raw clinical units; the bundle's scaling parameters are
applied server-side.  Validation is manual (the schema is data, not code):
missing/extra/out-of-range fields give 400, non-numeric values give 422,
and every error body is {"error": text, "fields": [names]}.  A record is
accepted out of range only when the request carries
"allow_out_of_range": true, and then each violation is echoed in the
response's warnings.

The service never re-implements inference: /predict and /whatif call the
same library vote/predict entry points, so the served label is the library
label by construction.  The loaded model is immutable shared state; request
handling only appends to logs and bumps a counter.
"""

from __future__ import annotations

import logging
import math
import os
import sys
import time
from dataclasses import dataclass
from typing import Any, Iterable, Mapping

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .bundle import Bundle, load_bundle, verify_canary
from .classifiers.base import predict
from .dataset import FeatureSchema, schema_to_dict
from .ensemble import VotingModel
from .errors import BundleError

DEFAULT_BIND = "127.0.0.1:8080"
SWEEP_LIMIT = 200

logger = logging.getLogger("cadvote.service")


@dataclass(frozen=True)
class ServiceConfig:
    """Deployment knobs; CORS origins come from here, not from code."""

    allowed_origins: tuple[str, ...] = ()
    log_requests: bool = True


class _RequestError(Exception):
    def __init__(self, status: int, error: str, fields: Iterable[str] = ()) -> None:
        super().__init__(error)
        self.status = status
        self.error = error
        self.fields = list(fields)


def _fmt_bound(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else str(v)


def _fmt_range(lo: float, hi: float) -> str:
    return f"{_fmt_bound(lo)}..{_fmt_bound(hi)}"


def _require_object(body: Any, what: str) -> dict[str, Any]:
    if not isinstance(body, dict):
        raise _RequestError(400, f"{what} must be a JSON object")
    return body


def _allow_flag(body: Mapping[str, Any]) -> bool:
    flag = body.get("allow_out_of_range", False)
    if not isinstance(flag, bool):
        raise _RequestError(
            400, "allow_out_of_range must be true or false", ["allow_out_of_range"]
        )
    return flag


def _check_numeric(name: str, value: Any) -> float:
    """Booleans, strings, nulls and non-finite numbers are type errors (422)."""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _RequestError(
            422,
            f"feature '{name}' must be a number, got {type(value).__name__}",
            [name],
        )
    if not math.isfinite(value):
        raise _RequestError(422, f"feature '{name}' must be finite", [name])
    return float(value)


def _field_vector(
    schema: FeatureSchema,
    fields: Mapping[str, Any],
    allow_out_of_range: bool,
    skip: str | None = None,
) -> tuple[np.ndarray, list[str]]:
    """Validate a full record against the schema; returns (values, warnings).

    ``skip`` exempts one feature from presence/type/range checks — the
    what-if sweep overwrites it per point, so its base value never reaches
    the model.
    """
    names = schema.feature_names
    known = set(names) | {"allow_out_of_range"}
    missing = [n for n in names if n != skip and n not in fields]
    if missing:
        raise _RequestError(400, f"missing feature(s): {', '.join(missing)}", missing)
    extra = sorted(k for k in fields if k not in known)
    if extra:
        raise _RequestError(400, f"unknown field(s): {', '.join(extra)}", extra)

    values = np.zeros(len(names), dtype=np.float64)
    violations: list[tuple[str, float, float, float]] = []
    for j, feature in enumerate(schema.features):
        if feature.name == skip:
            continue
        v = _check_numeric(feature.name, fields[feature.name])
        values[j] = v
        if not feature.in_range(v):
            lo, hi = feature.valid_range
            violations.append((feature.name, v, lo, hi))
    if violations and not allow_out_of_range:
        raise _RequestError(
            400,
            "out-of-range value(s): "
            + ", ".join(
                f"{n} (valid {_fmt_range(lo, hi)})" for n, _, lo, hi in violations
            ),
            [n for n, *_ in violations],
        )
    warnings = [
        f"{n}={_fmt_bound(v)} is outside the valid range {_fmt_range(lo, hi)}; "
        "the prediction may be unreliable"
        for n, v, lo, hi in violations
    ]
    return values, warnings


def _label_strings(schema: FeatureSchema) -> tuple[str, str]:
    """(positive, negative) response labels, from schema polarity metadata."""
    return schema.positive_label_meaning, schema.negative_string


def _predict_payload(
    bundle: Bundle, values: np.ndarray, warnings: list[str]
) -> dict[str, Any]:
    positive, negative = _label_strings(bundle.schema)
    model = bundle.model
    if isinstance(model, VotingModel):
        labels, mean_p, member_labels, member_p = model.vote_batch(
            values.reshape(1, -1)
        )
        label, p = int(labels[0]), float(mean_p[0])
        votes = [
            {
                "member": member.kind,
                "label": positive if int(member_labels[m, 0]) else negative,
                "p_positive": float(member_p[m, 0]),
            }
            for m, member in enumerate(model.members)
        ]
    else:
        label, p = predict(model, values)
        votes = [
            {
                "member": model.kind,
                "label": positive if label else negative,
                "p_positive": p,
            }
        ]
    return {
        "label": positive if label else negative,
        "p_positive": p,
        "votes": votes,
        "model_version": model_version(bundle),
        "warnings": warnings,
    }


def model_version(bundle: Bundle) -> str:
    suffix = bundle.body_sha[:12] if bundle.body_sha else "unsaved"
    return f"{bundle.tool_version}+{suffix}"


def parse_bind(address: str) -> tuple[str, int]:
    host, sep, port = address.rpartition(":")
    if not sep or not host:
        raise ValueError(f"bind address must be host:port, got {address!r}")
    return host, int(port)


def create_app(bundle: Bundle, config: ServiceConfig | None = None) -> FastAPI:
    """Build the ASGI app around an already-verified bundle."""
    config = config or ServiceConfig()
    app = FastAPI(title="cadvote inference service", docs_url=None, redoc_url=None)
    app.state.bundle = bundle
    app.state.request_count = 0
    if config.allowed_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.allowed_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.middleware("http")
    async def _log_requests(request: Request, call_next):  # pragma: no cover - thin
        start = time.perf_counter()
        response = await call_next(request)
        app.state.request_count += 1
        if config.log_requests:
            logger.info(
                "method=%s path=%s status=%d ms=%.1f n=%d",
                request.method,
                request.url.path,
                response.status_code,
                (time.perf_counter() - start) * 1000.0,
                app.state.request_count,
            )
        return response

    @app.exception_handler(_RequestError)
    async def _request_error(_: Request, exc: _RequestError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status, content={"error": exc.error, "fields": exc.fields}
        )

    async def _json_body(request: Request) -> Any:
        try:
            return await request.json()
        except Exception:
            raise _RequestError(400, "request body must be valid JSON") from None

    @app.get("/health")
    async def health() -> dict[str, str]:
        return {"status": "ok"}

    @app.get("/model/info")
    async def model_info() -> dict[str, Any]:
        positive, negative = _label_strings(bundle.schema)
        model = bundle.model
        members = (
            [m.kind for m in model.members]
            if isinstance(model, VotingModel)
            else [model.kind]
        )
        return {
            "model_version": model_version(bundle),
            "model_kind": model.kind,
            "members": members,
            "features": list(bundle.schema.feature_names),
            "schema": schema_to_dict(bundle.schema),
            "labels": {"positive": positive, "negative": negative},
            "metrics": bundle.metrics,
            "training_meta": {
                "seed": model.meta.seed,
                "train_size": model.meta.train_size,
                "hyperparams": model.meta.hyperparams,
                "flags": list(model.meta.flags),
            },
        }

    @app.post("/predict")
    async def handle_predict(request: Request) -> JSONResponse:
        body = _require_object(await _json_body(request), "request body")
        allow = _allow_flag(body)
        values, warnings = _field_vector(bundle.schema, body, allow)
        return JSONResponse(_predict_payload(bundle, values, warnings))

    @app.post("/whatif")
    async def handle_whatif(request: Request) -> JSONResponse:
        body = _require_object(await _json_body(request), "request body")
        for key in ("base", "feature", "values"):
            if key not in body:
                raise _RequestError(400, f"missing field '{key}'", [key])
        extra = sorted(
            k
            for k in body
            if k not in {"base", "feature", "values", "allow_out_of_range"}
        )
        if extra:
            raise _RequestError(400, f"unknown field(s): {', '.join(extra)}", extra)
        feature_name = body["feature"]
        if not isinstance(feature_name, str) or feature_name not in bundle.schema.feature_names:
            raise _RequestError(
                400, f"unknown sweep feature {feature_name!r}", ["feature"]
            )
        sweep = body["values"]
        if not isinstance(sweep, list):
            raise _RequestError(400, "values must be a list", ["values"])
        if len(sweep) > SWEEP_LIMIT:
            raise _RequestError(
                400,
                f"sweep too large: {len(sweep)} values (limit {SWEEP_LIMIT})",
                ["values"],
            )
        base = _require_object(body["base"], "base")
        allow = _allow_flag(body) or _allow_flag(base)
        values, base_warnings = _field_vector(
            bundle.schema, base, allow, skip=feature_name
        )
        j = bundle.schema.index_of(feature_name)
        feature = bundle.schema.feature(feature_name)

        points: list[dict[str, Any]] = []
        for v in sweep:
            try:
                fv = _check_numeric(feature_name, v)
                warnings = list(base_warnings)
                if not feature.in_range(fv):
                    lo, hi = feature.valid_range
                    if not allow:
                        raise _RequestError(
                            400,
                            f"out-of-range value(s): {feature_name} "
                            f"(valid {_fmt_range(lo, hi)})",
                            [feature_name],
                        )
                    warnings.append(
                        f"{feature_name}={_fmt_bound(fv)} is outside the valid "
                        f"range {_fmt_range(lo, hi)}; the prediction may be "
                        "unreliable"
                    )
                point_values = values.copy()
                point_values[j] = fv
                points.append(
                    {
                        "value": v,
                        "prediction": _predict_payload(bundle, point_values, warnings),
                    }
                )
            except _RequestError as e:
                points.append({"value": v, "error": e.error, "fields": e.fields})
        return JSONResponse(
            {
                "feature": feature_name,
                "model_version": model_version(bundle),
                "points": points,
            }
        )

    return app


def load_verified_bundle(path: str) -> Bundle:
    """Load + canary self-check; any failure refuses service with diagnostics."""
    bundle = load_bundle(path)
    verify_canary(bundle)
    return bundle


def serve(
    bundle_path: str | None = None,
    bind_address: str | None = None,
    config: ServiceConfig | None = None,
) -> None:
    """Blocking entry point used by the CLI `serve` subcommand."""
    path = bundle_path or os.environ.get("CAD_BUNDLE")
    if not path:
        print(
            "serve: no bundle given (pass a path or set CAD_BUNDLE)", file=sys.stderr
        )
        raise SystemExit(2)
    try:
        bundle = load_verified_bundle(path)
    except BundleError as e:
        print(f"serve: refusing to start: {e}", file=sys.stderr)
        raise SystemExit(2) from None
    address = bind_address or os.environ.get("CAD_BIND") or DEFAULT_BIND
    try:
        host, port = parse_bind(address)
    except ValueError as e:
        print(f"serve: {e}", file=sys.stderr)
        raise SystemExit(1) from None

    import uvicorn

    logging.basicConfig(level=logging.INFO)
    logger.info(
        "serving bundle=%s model=%s version=%s on http://%s:%d",
        path,
        bundle.model.kind,
        model_version(bundle),
        host,
        port,
    )
    uvicorn.run(create_app(bundle, config), host=host, port=port, log_level="info")
