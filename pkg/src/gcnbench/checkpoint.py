"""Versioned JSON model checkpoints, lossless at full double precision.

Layout (version 1): a single JSON object with sorted keys and 2-space
indentation holding

    format       "model-checkpoint"
    version      1
    kind         "gcn" | "logreg"
    dims         {"in": ..., "hidden": ..., "classes": ...}   (no "hidden" for logreg)
    hyperparams  {"lr", "epochs", "seed", "hidden", "weight_decay"} or null
    parameters   kind "gcn":    "theta1", "theta2" as nested float lists
                 kind "logreg": "weights", "bias"

Floats are serialized with Python's shortest round-trip repr, so
write -> read -> write is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import asdict

from .baseline import LogRegModel
from .gcn import GcnModel, Hyperparams

FORMAT = "model-checkpoint"
VERSION = 1


def save_checkpoint(model, path, hyperparams: Hyperparams | None = None) -> None:
    """Serialize a trained GCN or logistic-regression model."""
    hp = None if hyperparams is None else asdict(hyperparams)
    if isinstance(model, GcnModel):
        L1, L2, C = model.dims
        payload = {
            "format": FORMAT,
            "version": VERSION,
            "kind": "gcn",
            "dims": {"in": L1, "hidden": L2, "classes": C},
            "hyperparams": hp,
            "theta1": model.theta1.tolist(),
            "theta2": model.theta2.tolist(),
        }
    elif isinstance(model, LogRegModel):
        payload = {
            "format": FORMAT,
            "version": VERSION,
            "kind": "logreg",
            "dims": {"in": model.W.shape[0], "classes": model.W.shape[1]},
            "hyperparams": hp,
            "weights": model.W.tolist(),
            "bias": model.b.tolist(),
        }
    else:
        raise ValueError(f"cannot checkpoint {type(model).__name__}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def load_checkpoint(path):
    """Read a checkpoint; returns (model, metadata dict with kind/dims/hyperparams)."""
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != FORMAT:
        raise ValueError(f"not a model checkpoint: {path}")
    if payload.get("version") != VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.get('version')!r}")
    kind = payload.get("kind")
    meta = {"kind": kind, "dims": payload.get("dims"), "hyperparams": payload.get("hyperparams")}
    if kind == "gcn":
        return GcnModel(theta1=payload["theta1"], theta2=payload["theta2"]), meta
    if kind == "logreg":
        return LogRegModel(W=payload["weights"], b=payload["bias"]), meta
    raise ValueError(f"unknown checkpoint kind {kind!r}")
