"""Acceptance suite: one test per criterion, each printing a pass line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines.  Tolerances and instance sizes are pinned here and are not meant to
be tuned.
"""

import time
from dataclasses import replace

import numpy as np

from gcnbench.baseline import train_logreg
from gcnbench.checkpoint import load_checkpoint, save_checkpoint
from gcnbench.dataset import (
    EmbeddingDataset,
    build_label_matrix,
    full_truth,
    load_dataset,
    make_split,
    save_dataset,
    synth_blobs,
)
from gcnbench.gcn import GcnModel, Hyperparams, backward, forward, init_model, loss, predict, train
from gcnbench.graph import SparseAdjacency, knn_graph, load_graph, normalize, save_graph
from gcnbench.harness import (
    EvalReport,
    ExperimentConfig,
    accuracy,
    aggregate_csv,
    confusion_counts,
    parse_report_csv,
    render_report,
    run_experiment,
)
from gcnbench.graph import GraphBuildConfig
from oracles import (
    assert_gradients_match,
    fd_gcn_gradients,
    forward_oracle_dense,
    knn_oracle_edges,
    normalize_oracle_dense,
)


def _pass(num, message):
    print(f"criterion {num}: PASS ({message})")


def _random_instance(seed, n=12, L1=7, L2=5, C=3, labeled=4):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, L1))
    S = normalize(knn_graph(X, k=min(5, n - 1)))
    ds = EmbeddingDataset(ids=[f"r{i}" for i in range(n)], X=X, C=C,
                          truth=[int(v) for v in rng.integers(0, C, size=n)])
    split = make_split(ds, labeled, seed=seed, stratified=False)
    Y = build_label_matrix(ds, split)
    model = init_model(L1, L2, C, seed=seed + 1000)
    return X, S, split, Y, model


def test_criterion_1_gradient_correctness():
    start = time.perf_counter()
    for seed in range(20):
        X, S, split, Y, model = _random_instance(seed)
        cache = forward(model, S, X)
        grads = backward(model, S, X, cache, Y, split.labeled)
        fd1, fd2 = fd_gcn_gradients(model, S, X, Y, split.labeled, h=1e-5)
        assert_gradients_match(grads.g_theta1, fd1, rel=1e-4, abs_small=1e-8, small=1e-4)
        assert_gradients_match(grads.g_theta2, fd2, rel=1e-4, abs_small=1e-8, small=1e-4)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    _pass(1, f"20 instances, both parameter matrices, {elapsed:.1f}s")


def test_criterion_2_forward_matches_dense_naive_oracle():
    rng = np.random.default_rng(7)
    worst = 0.0
    for trial in range(10):
        n = int(rng.integers(3, 51))
        L1, L2, C = int(rng.integers(2, 9)), int(rng.integers(2, 7)), int(rng.integers(2, 5))
        X = rng.standard_normal((n, L1))
        A = knn_graph(X, k=min(4, n - 1))
        model = init_model(L1, L2, C, seed=trial)
        Z = forward(model, normalize(A), X).Z
        S_dense = normalize_oracle_dense(n, A.edge_set())
        oracle = forward_oracle_dense(S_dense, X, model.theta1, model.theta2)
        worst = max(worst, float(np.abs(Z - oracle).max()))
    assert worst <= 1e-12
    _pass(2, f"10 instances up to n=50, max abs diff {worst:.2e}")


def test_criterion_3_knn_matches_brute_force_oracle():
    start = time.perf_counter()
    rng = np.random.default_rng(13)
    for n in (50, 200):
        for d in (2, 16):
            X = rng.standard_normal((n, d))
            for k in (1, 5, 10):
                assert knn_graph(X, k).edge_set() == knn_oracle_edges(X, k)
    # duplicate-point fixtures: coincident points force exact distance ties
    dup = rng.standard_normal((40, 3))
    dup[11] = dup[3]
    dup[25] = dup[3]
    dup[30] = dup[8]
    for k in (1, 5, 10):
        assert knn_graph(dup, k).edge_set() == knn_oracle_edges(dup, k)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0
    _pass(3, f"n in (50, 200), d in (2, 16), k in (1, 5, 10) plus duplicates, {elapsed:.1f}s")


def test_criterion_4_normalization_identity():
    rng = np.random.default_rng(21)
    worst = 0.0
    for trial in range(10):
        n = int(rng.integers(2, 60))
        X = rng.standard_normal((n, 3))
        A = knn_graph(X, k=min(int(rng.integers(1, 6)), n - 1))
        S = normalize(A)
        dense = S.to_dense()
        worst = max(worst, float(np.abs(dense - normalize_oracle_dense(n, A.edge_set())).max()))
        assert np.abs(dense - dense.T).max() <= 1e-12
        assert np.array_equal(np.diag(dense), 1.0 / (A.degrees() + 1))
    assert worst <= 1e-12
    _pass(4, f"10 random graphs, max abs deviation {worst:.2e}")


def test_criterion_5_loss_closed_forms():
    X, S, split, Y, model = _random_instance(31)
    uniform = GcnModel(theta1=model.theta1, theta2=np.zeros_like(model.theta2))
    value = loss(forward(uniform, S, X), Y, split.labeled)
    assert abs(value - split.l * np.log(3.0)) <= 1e-12

    empty = np.array([], dtype=np.int64)
    cache = forward(model, S, X)
    assert loss(cache, Y, empty) == 0.0
    grads = backward(model, S, X, cache, Y, empty)
    assert np.array_equal(grads.g_theta1, np.zeros_like(model.theta1))
    assert np.array_equal(grads.g_theta2, np.zeros_like(model.theta2))
    _pass(5, "uniform loss equals l*ln(C); empty labeled set gives zero loss and gradients")


def test_criterion_6_training_sanity():
    start = time.perf_counter()
    ds = synth_blobs(n=300, d=8, C=3, sep=6.0, seed=0)
    S = normalize(knn_graph(ds, k=5))
    split = make_split(ds, 9, seed=1, stratified=True)
    Y = build_label_matrix(ds, split)
    model = init_model(ds.L1, 16, ds.C, seed=2)
    trained, trace = train(model, S, ds.X, Y, split.labeled, Hyperparams(lr=0.2, epochs=200))
    assert len(trace) == 201
    assert max(np.diff(trace)) <= 1e-9, "loss trace must be non-increasing"
    truth = full_truth(ds)
    acc = accuracy(predict(forward(trained, S, ds.X))[split.unlabeled], truth[split.unlabeled])
    assert acc >= 95.0
    elapsed = time.perf_counter() - start
    assert elapsed < 30.0
    _pass(6, f"monotone trace, unlabeled accuracy {acc:.2f}%, {elapsed:.1f}s")


def test_criterion_7_gcn_beats_baseline_when_labels_scarce():
    start = time.perf_counter()
    cfg = ExperimentConfig(
        budgets=[9, 30],
        synth={"n": 300, "d": 8, "classes": 3, "sep": 6.0, "seed": 0},
        graph=GraphBuildConfig(method="knn", k=5),
        models=["gcn", "logreg"],
        repeats=10,
        seed=0,
    )
    report = run_experiment(cfg)
    gap_scarce = report.mean_accuracy("gcn", 9) - report.mean_accuracy("logreg", 9)
    gap_rich = report.mean_accuracy("gcn", 30) - report.mean_accuracy("logreg", 30)
    assert gap_scarce > 0.0, "gcn must beat the baseline at l=9"
    assert gap_rich < gap_scarce, "the advantage must shrink as labels grow"
    elapsed = time.perf_counter() - start
    assert elapsed < 120.0
    _pass(7, f"gap {gap_scarce:+.2f} points at l=9 vs {gap_rich:+.2f} at l=30, {elapsed:.0f}s")


def test_criterion_8_metric_identity():
    rng = np.random.default_rng(5)
    for _ in range(100):
        size = int(rng.integers(1, 60))
        pred = rng.integers(0, 2, size=size)
        truth = rng.integers(0, 2, size=size)
        c = confusion_counts(pred, truth, positive=1)
        assert 100.0 * (c.tp + c.tn) / c.total == accuracy(pred, truth)
    worked = 100.0 * (3 + 2) / (3 + 1 + 2 + 0)
    assert f"{worked:.2f}" == "83.33"
    _pass(8, "binary Q equals fraction-correct on 100 random vectors; worked example 83.33%")


def test_criterion_9_determinism():
    cfg_dict = dict(
        budgets=[9],
        synth={"n": 80, "d": 4, "classes": 3, "sep": 5.0, "seed": 3},
        graph=GraphBuildConfig(method="knn", k=5),
        models=["gcn", "logreg"],
        repeats=3,
        seed=11,
        gcn_hp=Hyperparams(lr=0.2, epochs=40, hidden=8),
        logreg_hp=Hyperparams(lr=0.5, epochs=150, weight_decay=1e-4),
    )
    report_a = run_experiment(ExperimentConfig(**cfg_dict))
    report_b = run_experiment(ExperimentConfig(**cfg_dict))
    # wall_ms is measured wall-clock time, the single intentionally volatile
    # report field; everything else must be byte-identical
    assert aggregate_csv(report_a).encode() == aggregate_csv(report_b).encode()

    def masked_csv(report):
        rows = [replace(r, wall_ms=0.0) for r in report.rows]
        return render_report(EvalReport(rows=rows), "csv").encode()

    assert masked_csv(report_a) == masked_csv(report_b)
    _pass(9, "two runs: aggregate CSV byte-identical; raw CSV byte-identical up to wall_ms")


def test_criterion_10_format_round_trips(tmp_path):
    # embedding CSV
    ds = synth_blobs(n=35, d=6, C=3, sep=4.0, seed=9)
    csv_1, csv_2 = tmp_path / "d1.csv", tmp_path / "d2.csv"
    save_dataset(ds, csv_1)
    save_dataset(load_dataset(csv_1), csv_2)
    assert csv_1.read_bytes() == csv_2.read_bytes()

    # edge list
    A = knn_graph(ds, 5)
    el_1, el_2 = tmp_path / "g1.edges", tmp_path / "g2.edges"
    save_graph(A, el_1)
    save_graph(load_graph(el_1), el_2)
    assert el_1.read_bytes() == el_2.read_bytes()

    # checkpoints, both kinds
    split = make_split(ds, 6, seed=0)
    hp = Hyperparams(lr=0.2, epochs=15, hidden=8)
    gcn_model, _ = train(init_model(ds.L1, 8, ds.C, 0), normalize(A), ds.X,
                         build_label_matrix(ds, split), split.labeled, hp)
    lr_model, _ = train_logreg(ds.X[split.labeled], full_truth(ds)[split.labeled], ds.C)
    for name, model, model_hp in (("gcn", gcn_model, hp), ("logreg", lr_model, None)):
        ck_1, ck_2 = tmp_path / f"{name}1.json", tmp_path / f"{name}2.json"
        save_checkpoint(model, ck_1, hyperparams=model_hp)
        loaded, meta = load_checkpoint(ck_1)
        restored_hp = None if meta["hyperparams"] is None else Hyperparams(**meta["hyperparams"])
        save_checkpoint(loaded, ck_2, hyperparams=restored_hp)
        assert ck_1.read_bytes() == ck_2.read_bytes()

    # report CSV
    cfg = ExperimentConfig(budgets=[6], synth={"n": 50, "d": 3, "classes": 3, "sep": 5.0, "seed": 2},
                           repeats=2, seed=1, gcn_hp=Hyperparams(epochs=20, hidden=8),
                           logreg_hp=Hyperparams(lr=0.5, epochs=80, weight_decay=1e-4))
    report = run_experiment(cfg)
    rep_1, rep_2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
    rep_1.write_text(render_report(report, "csv"), encoding="utf-8")
    rep_2.write_text(render_report(parse_report_csv(rep_1.read_text(encoding="utf-8")), "csv"),
                     encoding="utf-8")
    assert rep_1.read_bytes() == rep_2.read_bytes()
    _pass(10, "embedding CSV, edge list, both checkpoint kinds, report CSV")
