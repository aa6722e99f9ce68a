"""Supervised industry-prediction harness.

Stratified splitting, SMOTE oversampling plus random undersampling for class
balance, two classifiers (multinomial logistic regression trained by
full-batch gradient descent, and kNN), and top-N accuracy with confusion
matrices. Balancing touches training data only; the test partition always
stays as drawn.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .embed import EmbeddingMatrix
from .errors import FitError, InputError

SMOTE_K_NEIGHBORS = 5
DEFAULT_TEST_FRACTION = 0.2
KNN_K = 15
LOGR_L2 = 1e-4
LOGR_LEARNING_RATE = 0.5
LOGR_EPOCHS = 300


@dataclass
class LabeledDataset:
    """Embedding rows paired with industry labels at one granularity level."""

    X: np.ndarray  # (n, dim) float64
    y: list[str]
    ids: list[str]
    level: str  # "level1" or "level2"

    def __post_init__(self) -> None:
        self.X = np.asarray(self.X, dtype=np.float64)
        if self.X.ndim != 2 or self.X.shape[0] != len(self.y) or len(self.ids) != len(self.y):
            raise InputError(
                f"inconsistent dataset: X {self.X.shape}, {len(self.y)} labels, "
                f"{len(self.ids)} ids"
            )

    @property
    def size(self) -> int:
        return len(self.y)

    def class_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for label in self.y:
            counts[label] = counts.get(label, 0) + 1
        return counts

    def subset(self, indices: np.ndarray) -> "LabeledDataset":
        return LabeledDataset(
            X=self.X[indices],
            y=[self.y[int(i)] for i in indices],
            ids=[self.ids[int(i)] for i in indices],
            level=self.level,
        )


def labeled_dataset_from_matrix(
    matrix: EmbeddingMatrix,
    labels: list[str | None],
    level: str,
    min_class_size: int = 2,
) -> LabeledDataset:
    """Keep non-masked rows with a label, then drop classes rarer than
    min_class_size (the least-populated classes are not evaluable)."""
    if len(labels) != matrix.size:
        raise InputError(f"{len(labels)} labels for {matrix.size} matrix rows")
    keep = [
        i
        for i in range(matrix.size)
        if not matrix.empty_mask[i] and labels[i] is not None
    ]
    counts: dict[str, int] = {}
    for i in keep:
        counts[labels[i]] = counts.get(labels[i], 0) + 1
    keep = [i for i in keep if counts[labels[i]] >= min_class_size]
    if not keep:
        raise FitError("no labeled rows survive the class-size filter")
    return LabeledDataset(
        X=matrix.rows[keep].astype(np.float64),
        y=[labels[i] for i in keep],
        ids=[matrix.company_ids[i] for i in keep],
        level=level,
    )


def stratified_split(
    ds: LabeledDataset, test_fraction: float, seed: int
) -> tuple[LabeledDataset, LabeledDataset]:
    """Per-class proportional split with a seeded shuffle."""
    if not 0.0 < test_fraction < 1.0:
        raise InputError(f"test_fraction must be in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    by_class: dict[str, list[int]] = {}
    for i, label in enumerate(ds.y):
        by_class.setdefault(label, []).append(i)

    train_idx: list[int] = []
    test_idx: list[int] = []
    for label in sorted(by_class):
        members = np.asarray(by_class[label])
        if members.size < 2:
            raise FitError(
                f"class {label!r} has {members.size} member(s); cannot split"
            )
        rng.shuffle(members)
        n_test = int(np.floor(members.size * test_fraction + 0.5))
        n_test = min(n_test, members.size - 1)  # keep at least one training row
        test_idx.extend(members[:n_test].tolist())
        train_idx.extend(members[n_test:].tolist())
    return ds.subset(np.asarray(sorted(train_idx))), ds.subset(np.asarray(sorted(test_idx)))


def smote_oversample(
    train: LabeledDataset, k_neighbors: int = SMOTE_K_NEIGHBORS, seed: int = 0
) -> LabeledDataset:
    """Upsample every minority class to the majority count.

    Each synthetic point is x + lam * (x' - x) for a random member x, one of
    its k nearest same-class neighbors x', and lam uniform in [0, 1].
    """
    if k_neighbors < 1:
        raise InputError(f"k_neighbors must be >= 1, got {k_neighbors}")
    counts = train.class_counts()
    majority = max(counts.values())
    rng = np.random.default_rng(seed)

    new_rows: list[np.ndarray] = []
    new_labels: list[str] = []
    new_ids: list[str] = []
    serial = 0
    for label in sorted(counts):
        deficit = majority - counts[label]
        if deficit == 0:
            continue
        member_idx = [i for i, lab in enumerate(train.y) if lab == label]
        if len(member_idx) < 2:
            raise FitError(f"class {label!r} has a single member; SMOTE needs >= 2")
        members = train.X[member_idx]
        # pairwise distances within the class; self at +inf so it is never a neighbor
        diff = members[:, None, :] - members[None, :, :]
        dist = np.sqrt(np.sum(diff**2, axis=2))
        np.fill_diagonal(dist, np.inf)
        neighbor_order = np.argsort(dist, axis=1, kind="stable")
        usable = min(k_neighbors, len(member_idx) - 1)

        for _ in range(deficit):
            a = int(rng.integers(len(member_idx)))
            b = int(neighbor_order[a, int(rng.integers(usable))])
            lam = float(rng.uniform())
            new_rows.append(members[a] + lam * (members[b] - members[a]))
            new_labels.append(label)
            new_ids.append(f"smote_{label}_{serial}")
            serial += 1

    if not new_rows:
        return train
    return LabeledDataset(
        X=np.vstack([train.X, np.vstack(new_rows)]),
        y=train.y + new_labels,
        ids=train.ids + new_ids,
        level=train.level,
    )


def random_undersample(
    train: LabeledDataset, target_count: int, seed: int = 0
) -> LabeledDataset:
    """Reduce every class above target_count to it by seeded sampling
    without replacement; smaller classes pass through untouched."""
    if target_count < 1:
        raise InputError(f"target_count must be >= 1, got {target_count}")
    rng = np.random.default_rng(seed)
    counts = train.class_counts()
    keep: list[int] = []
    for label in sorted(counts):
        member_idx = np.asarray([i for i, lab in enumerate(train.y) if lab == label])
        if member_idx.size > target_count:
            member_idx = rng.choice(member_idx, size=target_count, replace=False)
        keep.extend(member_idx.tolist())
    return train.subset(np.asarray(sorted(keep)))


def balance_training_set(
    train: LabeledDataset, k_neighbors: int = SMOTE_K_NEIGHBORS, seed: int = 0
) -> LabeledDataset:
    """SMOTE first, then undersample to the post-SMOTE common count."""
    oversampled = smote_oversample(train, k_neighbors=k_neighbors, seed=seed)
    target = max(oversampled.class_counts().values())
    return random_undersample(oversampled, target_count=target, seed=seed + 1)


def _one_hot(y: list[str], class_list: list[str]) -> np.ndarray:
    index = {label: i for i, label in enumerate(class_list)}
    out = np.zeros((len(y), len(class_list)), dtype=np.float64)
    for row, label in enumerate(y):
        out[row, index[label]] = 1.0
    return out


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def logistic_loss_and_grad(
    weights: np.ndarray,
    bias: np.ndarray,
    X: np.ndarray,
    y_onehot: np.ndarray,
    l2: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Mean cross-entropy with an L2 penalty on the weights (bias exempt)."""
    n = X.shape[0]
    probs = _softmax(X @ weights + bias)
    eps = 1e-15
    loss = -float(np.sum(y_onehot * np.log(probs + eps))) / n
    loss += 0.5 * l2 * float(np.sum(weights**2))
    delta = (probs - y_onehot) / n
    grad_w = X.T @ delta + l2 * weights
    grad_b = delta.sum(axis=0)
    return loss, grad_w, grad_b


@dataclass
class LogisticRegressionModel:
    class_list: list[str]
    weights: np.ndarray  # (dim, n_classes)
    bias: np.ndarray  # (n_classes,)
    l2: float
    epochs_run: int

    kind: str = "logistic_regression"

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return _softmax(X @ self.weights + self.bias)


@dataclass
class KnnModel:
    class_list: list[str]
    train_X: np.ndarray
    train_y_idx: np.ndarray  # (n,) class indices
    k: int

    kind: str = "knn"

    def predict_scores(self, X: np.ndarray) -> np.ndarray:
        """Per-class neighbor-vote fractions among the k nearest rows."""
        X = np.asarray(X, dtype=np.float64)
        scores = np.zeros((X.shape[0], len(self.class_list)), dtype=np.float64)
        k = min(self.k, self.train_X.shape[0])
        for row in range(X.shape[0]):
            dist = np.linalg.norm(self.train_X - X[row], axis=1)
            nearest = np.argsort(dist, kind="stable")[:k]
            for t in nearest:
                scores[row, self.train_y_idx[int(t)]] += 1.0
        return scores / k


def fit_classifier(
    train: LabeledDataset,
    kind: str,
    l2: float = LOGR_L2,
    learning_rate: float = LOGR_LEARNING_RATE,
    epochs: int = LOGR_EPOCHS,
    k: int = KNN_K,
):
    """Train either classifier; the class list is the sorted label set."""
    class_list = sorted(set(train.y))
    if len(class_list) < 2:
        raise FitError(f"need >= 2 classes to fit, got {len(class_list)}")

    if kind == "logistic_regression":
        X = train.X
        y_onehot = _one_hot(train.y, class_list)
        weights = np.zeros((X.shape[1], len(class_list)), dtype=np.float64)
        bias = np.zeros(len(class_list), dtype=np.float64)
        for _ in range(epochs):
            _, grad_w, grad_b = logistic_loss_and_grad(weights, bias, X, y_onehot, l2)
            weights -= learning_rate * grad_w
            bias -= learning_rate * grad_b
        return LogisticRegressionModel(
            class_list=class_list, weights=weights, bias=bias, l2=l2, epochs_run=epochs
        )

    if kind == "knn":
        index = {label: i for i, label in enumerate(class_list)}
        return KnnModel(
            class_list=class_list,
            train_X=train.X.copy(),
            train_y_idx=np.asarray([index[label] for label in train.y], dtype=np.int64),
            k=k,
        )

    raise InputError(f"unknown classifier kind {kind!r}")


def _top_n_hits(model, test: LabeledDataset, n: int) -> np.ndarray:
    scores = model.predict_scores(test.X)
    # stable argsort on negated scores resolves score ties by class_list order
    order = np.argsort(-scores, axis=1, kind="stable")[:, :n]
    class_index = {label: i for i, label in enumerate(model.class_list)}
    hits = np.zeros(test.size, dtype=bool)
    for row, label in enumerate(test.y):
        idx = class_index.get(label)
        hits[row] = idx is not None and idx in order[row]
    return hits


def top_n_accuracy(model, test: LabeledDataset, n: int) -> float:
    """Fraction of test rows whose true label sits in the n best scores."""
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    n = min(n, len(model.class_list))
    return float(_top_n_hits(model, test, n).mean())


@dataclass
class EvalResult:
    top1: float
    top3: float
    confusion: np.ndarray  # (C, C) counts, rows = true class
    per_class_recall: list[float]
    class_list: list[str]


def evaluate_model(model, test: LabeledDataset) -> EvalResult:
    scores = model.predict_scores(test.X)
    predictions = np.argsort(-scores, axis=1, kind="stable")[:, 0]
    class_index = {label: i for i, label in enumerate(model.class_list)}
    c = len(model.class_list)
    confusion = np.zeros((c, c), dtype=np.int64)
    for row, label in enumerate(test.y):
        true_idx = class_index.get(label)
        if true_idx is not None:
            confusion[true_idx, int(predictions[row])] += 1
    row_sums = confusion.sum(axis=1)
    recall = [
        float(confusion[i, i] / row_sums[i]) if row_sums[i] > 0 else 0.0 for i in range(c)
    ]
    return EvalResult(
        top1=top_n_accuracy(model, test, 1),
        top3=top_n_accuracy(model, test, 3),
        confusion=confusion,
        per_class_recall=recall,
        class_list=list(model.class_list),
    )


def naive_baseline(y: list[str]) -> tuple[str, float]:
    """Most frequent label and its empirical frequency; ties pick the
    lexicographically smallest label."""
    if not y:
        raise InputError("cannot compute a baseline on empty labels")
    counts: dict[str, int] = {}
    for label in y:
        counts[label] = counts.get(label, 0) + 1
    top = max(counts.values())
    winner = sorted(label for label, cnt in counts.items() if cnt == top)[0]
    return winner, top / len(y)
