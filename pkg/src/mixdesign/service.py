"""HTTP facade over trained models for interactive partial inverse design.

Models are loaded read-only at startup; every request is stateless and
served from shared immutable state. JSON bodies use the same variable
vocabulary as the CSV schema.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import yaml
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import checkpoint, cooperative, dataio
from .dataio import DESIGN_VARS, TARGET, UNITS
from .errors import MixDesignError, QueryError

log = logging.getLogger(__name__)


class InferRequest(BaseModel):
    fixed: dict[str, float] = Field(default_factory=dict)
    target_strength: float
    model: str
    candidates: int = 1
    seed: int | None = None


class Candidate(BaseModel):
    design: dict[str, float]
    predicted_strength: float
    deviation: float


class InferResponse(BaseModel):
    candidates: list[Candidate]
    model: dict
    bounds: dict[str, dict]


@dataclass
class LoadedModel:
    model_id: str
    imputer: object
    surrogate: object
    meta: dict


def _scan_models(model_dir: Path) -> dict:
    models = {}
    candidates = [d for d in sorted(model_dir.iterdir()) if d.is_dir()]
    if (model_dir / "imputer.npz").exists():
        candidates.append(model_dir)
    for d in candidates:
        if not (d / "imputer.npz").exists():
            continue
        try:
            imp, sur = checkpoint.load_pair(d)
        except Exception as exc:
            log.warning("skipping malformed checkpoint %s: %s", d, exc)
            continue
        meta = {"id": d.name, "variant": imp.variant}
        snap = d / "config.yaml"
        if snap.exists():
            try:
                doc = yaml.safe_load(snap.read_text()) or {}
                meta["alpha"] = doc.get("alpha")
                meta["training_seed"] = doc.get("seed")
                meta["dataset"] = doc.get("dataset")
            except Exception as exc:
                log.warning("unreadable config snapshot in %s: %s", d, exc)
        models[d.name] = LoadedModel(d.name, imp, sur, meta)
    return models


def _bounds(stats) -> dict:
    out = {}
    for j, name in enumerate(DESIGN_VARS):
        out[name] = {"min": float(stats.mins[j]), "max": float(stats.maxs[j]),
                     "unit": UNITS[name]}
    j = dataio.N_DESIGN
    out[TARGET] = {"min": float(stats.mins[j]), "max": float(stats.maxs[j]),
                   "unit": UNITS[TARGET]}
    return out


def create_app(model_dir, cors_origin: str | None = None) -> FastAPI:
    app = FastAPI(title="mixdesign service")
    models = _scan_models(Path(model_dir))

    if cors_origin:
        from fastapi.middleware.cors import CORSMiddleware
        app.add_middleware(CORSMiddleware, allow_origins=[cors_origin],
                           allow_methods=["*"], allow_headers=["*"])

    @app.get("/api/health")
    def health():
        return {"status": "ok", "models": len(models)}

    @app.get("/api/models")
    def list_models():
        return [m.meta for m in models.values()]

    @app.get("/api/bounds")
    def bounds(model: str | None = None):
        if not models:
            raise HTTPException(404, detail="no models loaded")
        if model is None:
            entry = next(iter(models.values()))
        elif model in models:
            entry = models[model]
        else:
            raise HTTPException(404, detail=f"unknown model {model!r}")
        return _bounds(entry.imputer.stats)

    @app.post("/api/infer", response_model=InferResponse)
    def infer(req: InferRequest):
        if req.model not in models:
            raise HTTPException(404, detail=f"unknown model {req.model!r}")
        entry = models[req.model]
        field_errors = {}
        unknown = sorted(set(req.fixed) - set(DESIGN_VARS))
        for name in unknown:
            field_errors[name] = "unknown design variable"
        for name, value in req.fixed.items():
            if name in DESIGN_VARS and value < 0:
                field_errors[name] = "must be >= 0"
        if req.target_strength <= 0:
            field_errors["target_strength"] = "must be > 0"
        if req.candidates < 1:
            field_errors["candidates"] = "must be >= 1"
        if field_errors:
            raise HTTPException(400, detail=field_errors)
        if len(req.fixed) == len(DESIGN_VARS) and req.candidates > 1:
            raise HTTPException(
                422, detail="all variables fixed; only one candidate exists")
        try:
            query = cooperative.InverseQuery(
                fixed=dict(req.fixed), target_strength=req.target_strength,
                num_candidates=req.candidates,
                seed=req.seed if req.seed is not None else 0)
            results = cooperative.infer_partial(
                entry.imputer, entry.surrogate, entry.imputer.stats, query)
        except QueryError as exc:
            raise HTTPException(400, detail=str(exc)) from None
        except MixDesignError as exc:
            raise HTTPException(500, detail=str(exc)) from None
        return InferResponse(
            candidates=[
                Candidate(design=design, predicted_strength=pred,
                          deviation=pred - req.target_strength)
                for design, pred in results],
            model=entry.meta,
            bounds=_bounds(entry.imputer.stats),
        )

    return app
