"""Embedding datasets: CSV ingest/emit, synthetic blobs, splits, label matrices.

All sampling goes through NumPy's default PCG64 generator, so a seed
reproduces the exact same split or dataset on any platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass
class EmbeddingDataset:
    """n embedding vectors with optional ground-truth class indices.

    ``truth`` is either None (no labels at all) or a length-n list whose
    entries are class indices in [0, C) or None for individually unlabeled
    rows.  ``class_names`` records the string-to-index mapping when the
    source file carried non-integer labels.
    """

    ids: list[str]
    X: np.ndarray
    C: int
    truth: list[int | None] | None = None
    class_names: list[str] | None = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        if self.X.ndim != 2:
            raise ValueError("X must be a 2-D matrix")
        n, d = self.X.shape
        if n < 1 or d < 1:
            raise ValueError(f"need at least one row and one column, got shape {self.X.shape}")
        if not np.isfinite(self.X).all():
            bad = int(np.argwhere(~np.isfinite(self.X))[0, 0])
            raise ValueError(f"non-finite embedding value in data row {bad + 1}")
        if len(self.ids) != n:
            raise ValueError(f"{len(self.ids)} ids for {n} rows")
        for i, text_id in enumerate(self.ids):
            if not text_id or "," in text_id or "\n" in text_id:
                raise ValueError(f"data row {i + 1}: id must be non-empty and comma-free")
        if not isinstance(self.C, int) or self.C < 2:
            raise ValueError(f"class count must be an integer >= 2, got {self.C!r}")
        if self.truth is not None:
            if len(self.truth) != n:
                raise ValueError(f"{len(self.truth)} truth entries for {n} rows")
            self.truth = [None if t is None else int(t) for t in self.truth]
            for i, t in enumerate(self.truth):
                if t is not None and not 0 <= t < self.C:
                    raise ValueError(f"data row {i + 1}: class index {t} outside [0, {self.C})")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def L1(self) -> int:
        return self.X.shape[1]


@dataclass
class LabeledSplit:
    """Partition of node indices 0..n-1 into labeled and unlabeled sets."""

    labeled: np.ndarray
    unlabeled: np.ndarray

    def __post_init__(self):
        self.labeled = np.asarray(self.labeled, dtype=np.int64)
        self.unlabeled = np.asarray(self.unlabeled, dtype=np.int64)
        if len(self.labeled) < 1:
            raise ValueError("labeled set must be non-empty")
        n = len(self.labeled) + len(self.unlabeled)
        merged = np.sort(np.concatenate([self.labeled, self.unlabeled]))
        if not np.array_equal(merged, np.arange(n)):
            raise ValueError("labeled and unlabeled must partition 0..n-1")

    @property
    def l(self) -> int:
        return len(self.labeled)

    @property
    def u(self) -> int:
        return len(self.unlabeled)


@dataclass
class LabelMatrix:
    """n-by-C 0/1 matrix: labeled rows one-hot, unlabeled rows all zero."""

    Y: np.ndarray

    def __post_init__(self):
        self.Y = np.asarray(self.Y, dtype=np.float64)
        if self.Y.ndim != 2:
            raise ValueError("Y must be a 2-D matrix")
        if not np.isin(self.Y, (0.0, 1.0)).all():
            raise ValueError("Y entries must be 0 or 1")
        row_sums = self.Y.sum(axis=1)
        if not np.isin(row_sums, (0.0, 1.0)).all():
            raise ValueError("each row of Y must sum to 0 (unlabeled) or 1 (one-hot)")


def full_truth(ds: EmbeddingDataset) -> np.ndarray:
    """Ground-truth class indices as an int array; every row must be labeled."""
    if ds.truth is None or any(t is None for t in ds.truth):
        raise ValueError("dataset lacks ground truth for some rows")
    return np.asarray(ds.truth, dtype=np.int64)


def l2_normalize_rows(X) -> np.ndarray:
    """Scale every row to unit Euclidean norm (off by default everywhere)."""
    X = np.asarray(X, dtype=np.float64)
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    if (norms == 0.0).any():
        raise ValueError("cannot L2-normalize a zero row")
    return X / norms


# --- CSV format -------------------------------------------------------------
#
#   #classes=<C>                       (writer always emits it; optional on read)
#   id,label,e0,e1,...,e{L1-1}         ("label" column optional)
#   t1,0,0.25,-1.5,...
#
# Labels are integers in [0, C) or empty.  Non-integer label strings are
# accepted on read and mapped to 0..C-1 through a sorted lexicographic
# dictionary recorded in ``class_names``; the writer always emits integers.
# Floats are written with the shortest decimal that round-trips float64
# (at most 17 significant digits), so load(save(ds)) reproduces X bit-exactly.


def load_dataset(path, format: str = "csv") -> EmbeddingDataset:
    """Read an embedding CSV file.

    C is taken from the ``#classes=`` comment when present, otherwise
    inferred as max class index + 1 (floored at 2).  Raises ValueError with
    the offending data-row number for malformed rows, non-numeric cells,
    and class indices outside the declared range.
    """
    if format != "csv":
        raise ValueError(f"unsupported format {format!r}")
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\r") for ln in fh.read().split("\n")]
    if lines and lines[-1] == "":
        lines.pop()

    declared_c = None
    pos = 0
    while pos < len(lines) and lines[pos].startswith("#"):
        comment = lines[pos]
        if not comment.startswith("#classes="):
            raise ValueError(f"unrecognized comment line before header: {comment!r}")
        if declared_c is not None:
            raise ValueError("duplicate #classes comment")
        try:
            declared_c = int(comment[len("#classes="):])
        except ValueError:
            raise ValueError(f"malformed #classes comment: {comment!r}") from None
        pos += 1
    if pos >= len(lines):
        raise ValueError("missing header line")

    header = lines[pos].split(",")
    if not header or header[0] != "id":
        raise ValueError("header must start with 'id'")
    has_label = len(header) > 1 and header[1] == "label"
    embed_cols = header[2:] if has_label else header[1:]
    if not embed_cols:
        raise ValueError("header declares no embedding columns")
    for j, name in enumerate(embed_cols):
        if name != f"e{j}":
            raise ValueError(f"embedding column {j} must be named 'e{j}', got {name!r}")
    L1 = len(embed_cols)
    width = 1 + int(has_label) + L1
    skip = 1 + int(has_label)

    ids = []
    raw_labels = []
    rows = []
    for r, line in enumerate(lines[pos + 1:], start=1):
        cells = line.split(",")
        if len(cells) != width:
            raise ValueError(f"data row {r}: expected {width} columns, got {len(cells)}")
        if not cells[0]:
            raise ValueError(f"data row {r}: empty id")
        ids.append(cells[0])
        if has_label:
            raw_labels.append(cells[1] if cells[1] != "" else None)
        try:
            rows.append(np.asarray(cells[skip:], dtype=np.float64))
        except ValueError:
            raise ValueError(f"data row {r}: non-numeric embedding cell") from None
    if not rows:
        raise ValueError("file contains no data rows")
    X = np.vstack(rows)
    bad = np.argwhere(~np.isfinite(X))
    if len(bad):
        raise ValueError(f"data row {int(bad[0, 0]) + 1}: non-finite embedding value")

    truth, class_names = _decode_labels(raw_labels if has_label else None)
    if truth is not None and class_names is None and declared_c is not None:
        for r, t in enumerate(truth, start=1):
            if t is not None and t >= declared_c:
                raise ValueError(f"data row {r}: class index {t} >= declared C={declared_c}")

    if declared_c is not None:
        C = declared_c
    elif truth is not None and any(t is not None for t in truth):
        C = max(2, max(t for t in truth if t is not None) + 1)
    else:
        raise ValueError("class count unknown: file has no labels and no #classes comment")
    if class_names is not None and len(class_names) > C:
        raise ValueError(f"{len(class_names)} distinct labels but declared C={C}")

    return EmbeddingDataset(ids=ids, X=X, C=C, truth=truth, class_names=class_names)


def _decode_labels(raw_labels):
    """Map raw label cells to class indices; strings go through a sorted dictionary."""
    if raw_labels is None:
        return None, None
    present = set(s for s in raw_labels if s is not None)
    if not present:
        return [None] * len(raw_labels), None
    try:
        as_int = {s: int(s) for s in present}
    except ValueError:
        names = sorted(present)
        index = {name: j for j, name in enumerate(names)}
        return [None if s is None else index[s] for s in raw_labels], names
    truth = [None if s is None else as_int[s] for s in raw_labels]
    for r, t in enumerate(truth, start=1):
        if t is not None and t < 0:
            raise ValueError(f"data row {r}: negative class index {t}")
    return truth, None


def save_dataset(ds: EmbeddingDataset, path) -> None:
    """Write the embedding CSV format; load(save(ds)) reproduces X bit-exactly."""
    lines = [f"#classes={ds.C}"]
    label_col = ds.truth is not None
    header = ["id"] + (["label"] if label_col else []) + [f"e{j}" for j in range(ds.L1)]
    lines.append(",".join(header))
    for i in range(ds.n):
        cells = [ds.ids[i]]
        if label_col:
            t = ds.truth[i]
            cells.append("" if t is None else str(t))
        cells.extend(repr(float(v)) for v in ds.X[i])
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def synth_blobs(n: int, d: int, C: int, sep: float, seed: int) -> EmbeddingDataset:
    """Sample n points from C isotropic unit-variance Gaussian clusters.

    Cluster centers are mutually ``sep`` apart: scaled standard-basis
    vectors when d >= C (every pair exactly ``sep`` apart), otherwise
    evenly spaced along the first axis.  Class sizes differ by at most 1
    and the ground truth is recorded.
    """
    if C < 2:
        raise ValueError(f"need C >= 2, got {C}")
    if n < C:
        raise ValueError(f"need n >= C, got n={n}, C={C}")
    if d < 1:
        raise ValueError(f"need d >= 1, got {d}")
    if sep < 0:
        raise ValueError(f"separation must be >= 0, got {sep}")

    centers = np.zeros((C, d))
    if d >= C:
        for c in range(C):
            centers[c, c] = sep / math.sqrt(2.0)
    else:
        centers[:, 0] = np.arange(C) * sep

    sizes = [n // C + (1 if c < n % C else 0) for c in range(C)]
    truth = [c for c in range(C) for _ in range(sizes[c])]
    rng = np.random.default_rng(seed)
    X = centers[truth] + rng.standard_normal((n, d))
    ids = [f"s{i}" for i in range(n)]
    return EmbeddingDataset(ids=ids, X=X, C=C, truth=truth)


def make_split(ds: EmbeddingDataset, l: int, seed: int, stratified: bool = True) -> LabeledSplit:
    """Sample l labeled indices without replacement; deterministic given seed.

    Stratified sampling (the default) keeps per-class labeled counts within
    1 of each other and requires full ground truth and l >= C.
    """
    n = ds.n
    if l < 1:
        raise ValueError(f"need l >= 1, got {l}")
    if l > n:
        raise ValueError(f"need l <= n={n}, got {l}")
    rng = np.random.default_rng(seed)
    if stratified:
        truth = full_truth(ds)
        if l < ds.C:
            raise ValueError(f"stratified split needs l >= C={ds.C}, got l={l}")
        base, extra = divmod(l, ds.C)
        bonus = set(rng.permutation(ds.C)[:extra].tolist())
        picks = []
        for c in range(ds.C):
            pool = np.flatnonzero(truth == c)
            quota = base + (1 if c in bonus else 0)
            if quota > len(pool):
                raise ValueError(f"class {c} has {len(pool)} points but the split needs {quota}")
            picks.append(rng.choice(pool, size=quota, replace=False))
        labeled = np.sort(np.concatenate(picks))
    else:
        labeled = np.sort(rng.choice(n, size=l, replace=False))
    mask = np.ones(n, dtype=bool)
    mask[labeled] = False
    return LabeledSplit(labeled=labeled, unlabeled=np.flatnonzero(mask))


def build_label_matrix(ds: EmbeddingDataset, split: LabeledSplit) -> LabelMatrix:
    """One-hot rows for labeled nodes, zero rows for unlabeled nodes."""
    if ds.truth is None:
        raise ValueError("dataset has no ground truth")
    Y = np.zeros((ds.n, ds.C))
    for i in split.labeled:
        t = ds.truth[int(i)]
        if t is None:
            raise ValueError(f"labeled node {int(i)} has no ground truth")
        Y[i, t] = 1.0
    return LabelMatrix(Y=Y)
