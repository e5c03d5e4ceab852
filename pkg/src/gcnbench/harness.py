"""Metrics, the label-budget experiment runner, and report rendering.

An experiment sweeps a list of label budgets over a dataset with ground
truth: for each (budget, repeat) cell it draws a fresh labeled/unlabeled
split from a seed derived deterministically from (base seed, budget,
repeat), trains every configured model, and scores it on all unlabeled
nodes.  The graph is built once per dataset since it only depends on X.

Everything a run produces is bit-reproducible given the config; the one
intentionally volatile field is the measured wall time per cell.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .baseline import LOGREG_DEFAULTS, predict_logreg, train_logreg
from .dataset import (
    EmbeddingDataset,
    build_label_matrix,
    full_truth,
    l2_normalize_rows,
    load_dataset,
    make_split,
    synth_blobs,
)
from .gcn import Hyperparams, forward, init_model, predict, train
from .graph import GraphBuildConfig, build_graph, normalize

MODEL_NAMES = ("gcn", "logreg")
REPORT_HEADER = "model,budget,repeat,seed,accuracy_pct,wall_ms"
AGGREGATE_HEADER = "model,budget,mean_pct,std_pct,repeats"

_MASK64 = (1 << 64) - 1


@dataclass
class ConfusionCounts:
    """One-vs-rest confusion counts against a chosen positive class."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


def confusion_counts(pred, truth, positive: int) -> ConfusionCounts:
    """Binarize multiclass predictions against ``positive`` and count TP/FP/TN/FN."""
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ValueError(f"length mismatch: {pred.shape} vs {truth.shape}")
    p = pred == positive
    t = truth == positive
    return ConfusionCounts(
        tp=int((p & t).sum()),
        fp=int((p & ~t).sum()),
        tn=int((~p & ~t).sum()),
        fn=int((~p & t).sum()),
    )


def accuracy(pred, truth) -> float:
    """Fraction of correct predictions as a percentage.

    For two classes this equals 100 * (TP + TN) / (TP + FP + TN + FN); the
    fraction-correct form is the standard multiclass generalization.
    """
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ValueError(f"length mismatch: {pred.shape} vs {truth.shape}")
    if len(pred) == 0:
        raise ValueError("cannot score an empty prediction vector")
    return 100.0 * int((pred == truth).sum()) / len(pred)


@dataclass
class ExperimentConfig:
    """A label-budget sweep: dataset, graph recipe, models, budgets, repeats.

    Exactly one of ``dataset_path`` and ``synth`` must be set; ``synth``
    holds {"n", "d", "classes", "sep", "seed"} for a generated dataset.
    """

    budgets: list[int]
    dataset_path: str | None = None
    synth: dict | None = None
    graph: GraphBuildConfig = field(default_factory=GraphBuildConfig)
    models: list[str] = field(default_factory=lambda: list(MODEL_NAMES))
    repeats: int = 10
    seed: int = 0
    stratified: bool = True
    normalize_features: bool = False
    gcn_hp: Hyperparams = field(default_factory=Hyperparams)
    logreg_hp: Hyperparams = field(default_factory=lambda: replace(LOGREG_DEFAULTS))

    def __post_init__(self):
        if (self.dataset_path is None) == (self.synth is None):
            raise ValueError("config needs exactly one of a dataset path or a synth spec")
        if not self.models:
            raise ValueError("config lists no models")
        for name in self.models:
            if name not in MODEL_NAMES:
                raise ValueError(f"unknown model {name!r}, expected one of {MODEL_NAMES}")
        if len(set(self.models)) != len(self.models):
            raise ValueError("duplicate model name")
        if not self.budgets:
            raise ValueError("config lists no label budgets")
        self.budgets = [int(l) for l in self.budgets]
        if self.repeats < 1:
            raise ValueError(f"need repeats >= 1, got {self.repeats}")


_SYNTH_KEYS = {"n", "d", "classes", "sep", "seed"}
_HP_KEYS = {"lr", "epochs", "seed", "hidden", "weight_decay"}
_GRAPH_KEYS = {"method", "k", "eps", "metric"}
_CONFIG_KEYS = {"version", "dataset", "graph", "models", "budgets", "repeats", "seed",
                "stratified", "normalize_features", "gcn", "logreg"}


def _check_keys(section, raw, allowed):
    extra = set(raw) - allowed
    if extra:
        raise ValueError(f"unknown {section} keys: {sorted(extra)}")
    return raw


def config_from_dict(raw: dict) -> ExperimentConfig:
    """Build a config from the JSON schema (version 1); unknown keys are rejected."""
    _check_keys("config", raw, _CONFIG_KEYS)
    if raw.get("version", 1) != 1:
        raise ValueError(f"unsupported config version {raw.get('version')!r}")
    dataset = raw.get("dataset")
    if not isinstance(dataset, dict):
        raise ValueError("config needs a 'dataset' object")
    _check_keys("dataset", dataset, {"path", "synth"})
    path, synth = dataset.get("path"), dataset.get("synth")
    if synth is not None:
        _check_keys("synth", synth, _SYNTH_KEYS)
    graph = GraphBuildConfig(**_check_keys("graph", dict(raw.get("graph", {})), _GRAPH_KEYS))
    return ExperimentConfig(
        budgets=raw.get("budgets", []),
        dataset_path=path,
        synth=synth,
        graph=graph,
        models=list(raw.get("models", MODEL_NAMES)),
        repeats=int(raw.get("repeats", 10)),
        seed=int(raw.get("seed", 0)),
        stratified=bool(raw.get("stratified", True)),
        normalize_features=bool(raw.get("normalize_features", False)),
        gcn_hp=Hyperparams(**_check_keys("gcn", raw.get("gcn", {}), _HP_KEYS)),
        logreg_hp=Hyperparams(**{"lr": 0.5, "epochs": 500, "weight_decay": 1e-4,
                                 **_check_keys("logreg", raw.get("logreg", {}), _HP_KEYS)}),
    )


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return config_from_dict(json.load(fh))


@dataclass
class CellResult:
    model: str
    budget: int
    repeat: int
    seed: int
    accuracy_pct: float
    wall_ms: float


@dataclass
class AggregateRow:
    model: str
    budget: int
    mean_pct: float
    std_pct: float
    repeats: int


@dataclass
class EvalReport:
    """Raw per-cell rows; aggregates are recomputed from them on demand."""

    rows: list[CellResult]

    def __post_init__(self):
        seen = set()
        for row in self.rows:
            key = (row.model, row.budget, row.repeat)
            if key in seen:
                raise ValueError(f"duplicate report row for {key}")
            seen.add(key)
            if not 0.0 <= row.accuracy_pct <= 100.0:
                raise ValueError(f"accuracy {row.accuracy_pct} outside [0, 100]")

    def models(self) -> list[str]:
        out = []
        for row in self.rows:
            if row.model not in out:
                out.append(row.model)
        return out

    def budgets(self) -> list[int]:
        out = []
        for row in self.rows:
            if row.budget not in out:
                out.append(row.budget)
        return out

    def aggregates(self) -> list[AggregateRow]:
        """Mean and population std of accuracy per (model, budget)."""
        out = []
        for model in self.models():
            for budget in self.budgets():
                accs = [r.accuracy_pct for r in self.rows
                        if r.model == model and r.budget == budget]
                if not accs:
                    continue
                out.append(AggregateRow(
                    model=model,
                    budget=budget,
                    mean_pct=float(np.mean(accs)),
                    std_pct=float(np.std(accs)),
                    repeats=len(accs),
                ))
        return out

    def mean_accuracy(self, model: str, budget: int) -> float:
        for agg in self.aggregates():
            if agg.model == model and agg.budget == budget:
                return agg.mean_pct
        raise KeyError(f"no rows for model {model!r} at budget {budget}")


def derive_seed(base: int, budget: int, repeat: int) -> int:
    """Per-cell split seed: base XOR a splitmix64-style mix of (budget, repeat).

    Pure integer arithmetic, fixed here so identical configs reproduce
    identical splits on any platform.
    """
    h = (budget * 0x9E3779B97F4A7C15 + repeat * 0xBF58476D1CE4E5B9 + 0x94D049BB133111EB) & _MASK64
    h ^= h >> 30
    h = (h * 0xBF58476D1CE4E5B9) & _MASK64
    h ^= h >> 27
    h = (h * 0x94D049BB133111EB) & _MASK64
    h ^= h >> 31
    return (base ^ h) & _MASK64


def _config_dataset(cfg: ExperimentConfig) -> EmbeddingDataset:
    if cfg.dataset_path is not None:
        return load_dataset(cfg.dataset_path)
    s = cfg.synth
    missing = {"n", "d", "classes"} - set(s)
    if missing:
        raise ValueError(f"synth spec is missing {sorted(missing)}")
    return synth_blobs(n=int(s["n"]), d=int(s["d"]), C=int(s["classes"]),
                       sep=float(s.get("sep", 1.0)), seed=int(s.get("seed", 0)))


def run_experiment(cfg: ExperimentConfig) -> EvalReport:
    """Run the full sweep; deterministic given the config (wall times aside)."""
    ds = _config_dataset(cfg)
    if cfg.normalize_features:
        ds = EmbeddingDataset(ids=ds.ids, X=l2_normalize_rows(ds.X), C=ds.C,
                              truth=ds.truth, class_names=ds.class_names)
    truth = full_truth(ds)
    for l in cfg.budgets:
        if not ds.C <= l < ds.n:
            raise ValueError(f"budget {l} outside [C={ds.C}, n={ds.n})")
    A = build_graph(ds, cfg.graph)
    S = normalize(A)
    rows = []
    for budget in cfg.budgets:
        for repeat in range(cfg.repeats):
            cell_seed = derive_seed(cfg.seed, budget, repeat)
            split = make_split(ds, budget, seed=cell_seed, stratified=cfg.stratified)
            Y = build_label_matrix(ds, split)
            for name in cfg.models:
                start = time.perf_counter()
                if name == "gcn":
                    model = init_model(ds.L1, cfg.gcn_hp.hidden, ds.C, cfg.gcn_hp.seed)
                    trained, _ = train(model, S, ds.X, Y, split.labeled, cfg.gcn_hp)
                    pred = predict(forward(trained, S, ds.X))[split.unlabeled]
                else:
                    trained, _ = train_logreg(ds.X[split.labeled], truth[split.labeled],
                                              ds.C, cfg.logreg_hp)
                    pred = predict_logreg(trained, ds.X[split.unlabeled])
                wall_ms = (time.perf_counter() - start) * 1000.0
                rows.append(CellResult(model=name, budget=budget, repeat=repeat,
                                       seed=cell_seed,
                                       accuracy_pct=accuracy(pred, truth[split.unlabeled]),
                                       wall_ms=wall_ms))
    return EvalReport(rows=rows)


def render_report(report: EvalReport, format: str) -> str:
    """Render the report: csv emits one row per cell, markdown the mean-accuracy table.

    The markdown table puts models on rows and budgets on columns, mirroring
    how such sweeps are usually tabulated.
    """
    if not report.rows:
        raise ValueError("cannot render an empty report")
    if format == "csv":
        lines = [REPORT_HEADER]
        for r in report.rows:
            lines.append(f"{r.model},{r.budget},{r.repeat},{r.seed},"
                         f"{float(r.accuracy_pct)!r},{float(r.wall_ms)!r}")
        return "\n".join(lines) + "\n"
    if format == "markdown":
        budgets = report.budgets()
        header = "| model | " + " | ".join(f"l={b}" for b in budgets) + " |"
        rule = "|" + "---|" * (len(budgets) + 1)
        lines = [header, rule]
        for model in report.models():
            cells = [f"{report.mean_accuracy(model, b):.2f}" for b in budgets]
            lines.append(f"| {model} | " + " | ".join(cells) + " |")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown report format {format!r}")


def aggregate_csv(report: EvalReport) -> str:
    """CSV of per-(model, budget) mean and population std of accuracy."""
    if not report.rows:
        raise ValueError("cannot render an empty report")
    lines = [AGGREGATE_HEADER]
    for agg in report.aggregates():
        lines.append(f"{agg.model},{agg.budget},{float(agg.mean_pct)!r},"
                     f"{float(agg.std_pct)!r},{agg.repeats}")
    return "\n".join(lines) + "\n"


def parse_report_csv(text: str) -> EvalReport:
    """Inverse of render_report(., "csv")."""
    lines = [ln for ln in text.split("\n") if ln != ""]
    if not lines or lines[0] != REPORT_HEADER:
        raise ValueError("not a report CSV: bad header")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != 6:
            raise ValueError(f"line {lineno}: expected 6 fields, got {len(cells)}")
        rows.append(CellResult(model=cells[0], budget=int(cells[1]), repeat=int(cells[2]),
                               seed=int(cells[3]), accuracy_pct=float(cells[4]),
                               wall_ms=float(cells[5])))
    return EvalReport(rows=rows)
