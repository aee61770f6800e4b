"""Model checkpoints: a single .npz per model holding layer arrays, a JSON
metadata blob (sizes, activation tags, variant settings) and the NormStats
the model was trained against. Versioned with a format tag."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import nets
from .dataio import NormStats
from .errors import ValidationError
from .imputer import ImputerConfig, ImputerModel
from .surrogate import SurrogateConfig, SurrogateModel

FORMAT_TAG = "mixdesign-ckpt-v1"


def _mlp_arrays(prefix: str, mlp: nets.Mlp) -> dict:
    out = {}
    for i, (w, b) in enumerate(zip(mlp.weights, mlp.biases)):
        out[f"{prefix}_w{i}"] = w
        out[f"{prefix}_b{i}"] = b
    return out


def _load_mlp(prefix: str, data, activations) -> nets.Mlp:
    weights, biases = [], []
    i = 0
    while f"{prefix}_w{i}" in data:
        weights.append(np.array(data[f"{prefix}_w{i}"], dtype=np.float64))
        biases.append(np.array(data[f"{prefix}_b{i}"], dtype=np.float64))
        i += 1
    return nets.Mlp(weights, biases, list(activations))


def save_surrogate(model: SurrogateModel, path) -> None:
    meta = {
        "format": FORMAT_TAG,
        "kind": "surrogate",
        "activations": model.net.activations,
        "config": model.config.__dict__ | {"hidden": list(model.config.hidden)},
    }
    np.savez(
        path,
        meta=json.dumps(meta),
        norm_mins=model.stats.mins,
        norm_maxs=model.stats.maxs,
        **_mlp_arrays("net", model.net),
    )


def save_imputer(model: ImputerModel, path) -> None:
    cfg = model.config.__dict__ | {"hidden": list(model.config.hidden)}
    meta = {
        "format": FORMAT_TAG,
        "kind": "imputer",
        "enc_activations": model.encoder.activations,
        "dec_activations": model.decoder.activations,
        "config": cfg,
    }
    np.savez(
        path,
        meta=json.dumps(meta),
        norm_mins=model.stats.mins,
        norm_maxs=model.stats.maxs,
        **_mlp_arrays("enc", model.encoder),
        **_mlp_arrays("dec", model.decoder),
    )


def _read_meta(data) -> dict:
    meta = json.loads(str(data["meta"]))
    if meta.get("format") != FORMAT_TAG:
        raise ValidationError(f"unsupported checkpoint format {meta.get('format')!r}")
    return meta


def load_surrogate(path) -> SurrogateModel:
    with np.load(path, allow_pickle=False) as data:
        meta = _read_meta(data)
        if meta["kind"] != "surrogate":
            raise ValidationError(f"expected a surrogate checkpoint, got {meta['kind']}")
        stats = NormStats(data["norm_mins"], data["norm_maxs"])
        net = _load_mlp("net", data, meta["activations"])
        cfg_d = dict(meta["config"])
        cfg_d["hidden"] = tuple(cfg_d["hidden"])
        return SurrogateModel(net=net, stats=stats, config=SurrogateConfig(**cfg_d))


def load_imputer(path) -> ImputerModel:
    with np.load(path, allow_pickle=False) as data:
        meta = _read_meta(data)
        if meta["kind"] != "imputer":
            raise ValidationError(f"expected an imputer checkpoint, got {meta['kind']}")
        stats = NormStats(data["norm_mins"], data["norm_maxs"])
        enc = _load_mlp("enc", data, meta["enc_activations"])
        dec = _load_mlp("dec", data, meta["dec_activations"])
        cfg_d = dict(meta["config"])
        cfg_d["hidden"] = tuple(cfg_d["hidden"])
        return ImputerModel(config=ImputerConfig(**cfg_d), encoder=enc,
                            decoder=dec, stats=stats)


def save_pair(imp: ImputerModel, sur: SurrogateModel, run_dir) -> None:
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    save_imputer(imp, run_dir / "imputer.npz")
    save_surrogate(sur, run_dir / "surrogate.npz")


def load_pair(run_dir) -> tuple[ImputerModel, SurrogateModel]:
    run_dir = Path(run_dir)
    return (load_imputer(run_dir / "imputer.npz"),
            load_surrogate(run_dir / "surrogate.npz"))
