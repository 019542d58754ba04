"""Binary CART classifier with exhaustive threshold search.

Split candidates are the midpoints of consecutive distinct sorted values of
each allowed feature. A candidate's quality is the Gini impurity decrease

    dec = g(parent) - (nl/n) g(left) - (nr/n) g(right)
        = (n*nr*S_l + n*nl*S_r - nl*nr*S_p) / (n^2 * nl * nr)

where S_* are sums of squared class counts. The numerator is an integer, so
the decrease is a rational number; candidates whose float scores land within
1e-12 of the best are re-compared exactly (Fraction arithmetic) before the
tie rule - lower feature index, then lower threshold - is applied. That
keeps split selection bit-reproducible and lets an exhaustive reference
implementation agree with this one node for node.

Per-node split search across features is embarrassingly parallel; with
n_threads > 1 features are scored concurrently and reduced in ascending
feature order, which is guaranteed to match the serial result.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import ceil

import numpy as np

from .ingest import Dataset

__all__ = [
    "HyperParams",
    "Leaf",
    "Split",
    "TreeModel",
    "gini",
    "best_split",
    "fit_tree",
    "predict",
    "predict_many",
    "dump_tree",
]

# Relative width of the float-score band that triggers exact re-comparison.
_TIE_BAND = 1e-12


@dataclass(frozen=True)
class HyperParams:
    max_depth: int = 50
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features_fraction: float = 1.0

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if self.min_samples_split < 2:
            raise ValueError(f"min_samples_split must be >= 2, got {self.min_samples_split}")
        if self.min_samples_leaf < 1:
            raise ValueError(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")
        if not 0.0 < self.max_features_fraction <= 1.0:
            raise ValueError(
                f"max_features_fraction must be in (0, 1], got {self.max_features_fraction}"
            )


@dataclass(frozen=True)
class Leaf:
    counts: np.ndarray  # class counts of the rows routed here during fit
    majority: int       # argmax of counts; ties resolve to the lowest class id


@dataclass(frozen=True)
class Split:
    feature: int
    threshold: float
    left: "Leaf | Split"
    right: "Leaf | Split"


@dataclass(frozen=True)
class TreeModel:
    root: Leaf | Split
    n_features: int
    n_classes: int
    depth: int
    hp: HyperParams


def gini(counts) -> float:
    """1 - sum((c_i / sum(c))^2); 0 for a pure node."""
    c = np.asarray(counts, dtype=np.float64)
    if np.any(c < 0):
        raise ValueError("class counts must be non-negative")
    total = c.sum()
    if total < 1:
        raise ValueError("class counts sum to zero")
    p = c / total
    return float(1.0 - np.sum(p * p))


def _feature_candidates(x, y_onehot, n, min_leaf, sum_p2, feature):
    """Band of near-best candidates for one feature.

    Returns (feature_best_float, [(dec, feature, threshold, nl, counts_left)]),
    or None when the feature admits no positive-decrease split.
    """
    order = np.argsort(x, kind="stable")
    xs = x[order]
    cum = np.cumsum(y_onehot[order], axis=0)

    cut = np.flatnonzero(xs[:-1] != xs[1:])  # left part = sorted rows 0..cut
    if cut.size == 0:
        return None
    nl = cut + 1
    keep = (nl >= min_leaf) & (n - nl >= min_leaf)
    cut, nl = cut[keep], nl[keep]
    if cut.size == 0:
        return None

    cl = cum[cut].astype(np.float64)
    cr = cum[-1].astype(np.float64) - cl
    nlf = nl.astype(np.float64)
    nrf = n - nlf
    sl = np.einsum("ij,ij->i", cl, cl)
    sr = np.einsum("ij,ij->i", cr, cr)
    dec = (n * nrf * sl + n * nlf * sr - nlf * nrf * sum_p2) / (n * n * nlf * nrf)

    positive = dec > 0.0
    if not np.any(positive):
        return None
    fbest = float(dec[positive].max())
    band = _TIE_BAND * max(1.0, fbest)
    sel = np.flatnonzero(positive & (dec >= fbest - band))
    thresholds = (xs[cut[sel]] + xs[cut[sel] + 1]) / 2.0
    rows = [
        (float(dec[i]), feature, float(t), int(nl[i]), tuple(int(v) for v in cum[cut[i]]))
        for i, t in zip(sel, thresholds)
    ]
    return fbest, rows


def _exact_decrease(n: int, nl: int, counts_left, counts_parent) -> Fraction:
    sl = sum(c * c for c in counts_left)
    sr = sum((p - c) * (p - c) for p, c in zip(counts_parent, counts_left))
    sp = sum(p * p for p in counts_parent)
    nr = n - nl
    return Fraction(n * nr * sl + n * nl * sr - nl * nr * sp, n * n * nl * nr)


def best_split(
    X: np.ndarray,
    y: np.ndarray,
    hp: HyperParams,
    feature_subset,
    n_classes: int | None = None,
    pool: ThreadPoolExecutor | None = None,
) -> tuple[int, float, float] | None:
    """Best (feature, threshold, impurity decrease) over the allowed features,
    or None when no split has a strictly positive decrease or both children
    cannot reach min_samples_leaf."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n = y.shape[0]
    if n < hp.min_samples_split:
        return None
    if n_classes is None:
        n_classes = int(y.max()) + 1
    onehot = np.zeros((n, n_classes), dtype=np.int64)
    onehot[np.arange(n), y] = 1
    parent = onehot.sum(axis=0)
    sum_p2 = float(np.sum(parent.astype(np.float64) ** 2))

    features = sorted(int(f) for f in feature_subset)
    args = [(X[:, f], onehot, n, hp.min_samples_leaf, sum_p2, f) for f in features]
    if pool is not None:
        results = list(pool.map(lambda a: _feature_candidates(*a), args))
    else:
        results = [_feature_candidates(*a) for a in args]

    kept: list[tuple] = []
    best_float = -np.inf
    for res in results:  # ascending feature order
        if res is None:
            continue
        fbest, rows = res
        best_float = max(best_float, fbest)
        kept.extend(rows)
    if not kept:
        return None

    band = _TIE_BAND * max(1.0, best_float)
    finalists = [c for c in kept if c[0] >= best_float - band]
    if len(finalists) == 1:
        dec, f, thr, _, _ = finalists[0]
        return f, thr, dec

    parent_counts = tuple(int(v) for v in parent)
    best = None
    best_exact = None
    for dec, f, thr, nl, cl in finalists:  # already in (feature, threshold) order
        exact = _exact_decrease(n, nl, cl, parent_counts)
        if best_exact is None or exact > best_exact:
            best, best_exact = (f, thr, dec), exact
    if best_exact <= 0:
        return None
    return best


def fit_tree(train: Dataset, hp: HyperParams, seed: int, n_threads: int = 1) -> TreeModel:
    """Grow a tree by recursive greedy splitting.

    A node becomes a leaf when it is at max_depth, has fewer than
    min_samples_split rows, is pure, or admits no positive-decrease split.
    The per-node feature subset of size ceil(max_features_fraction * N) is
    drawn from one seeded generator in preorder (node, left subtree, right
    subtree), so the tree is a pure function of (data, hp, seed).
    """
    X, y = train.features, train.labels
    n_features = X.shape[1]
    n_classes = max(2, int(y.max()) + 1)
    m_feat = ceil(hp.max_features_fraction * n_features)
    rng = np.random.default_rng(seed)
    pool = ThreadPoolExecutor(max_workers=n_threads) if n_threads > 1 else None

    def grow(idx: np.ndarray, depth: int) -> tuple[Leaf | Split, int]:
        counts = np.bincount(y[idx], minlength=n_classes)
        counts.flags.writeable = False
        leaf = Leaf(counts=counts, majority=int(np.argmax(counts)))
        if depth >= hp.max_depth or idx.size < hp.min_samples_split or counts.max() == idx.size:
            return leaf, depth
        subset = np.sort(rng.choice(n_features, size=m_feat, replace=False))
        found = best_split(X[idx], y[idx], hp, subset, n_classes, pool)
        if found is None:
            return leaf, depth
        f, thr, _ = found
        mask = X[idx, f] <= thr
        if not 0 < int(mask.sum()) < idx.size:  # midpoint rounded onto a data value
            return leaf, depth
        left, dl = grow(idx[mask], depth + 1)
        right, dr = grow(idx[~mask], depth + 1)
        return Split(feature=f, threshold=thr, left=left, right=right), max(dl, dr)

    try:
        root, depth = grow(np.arange(y.shape[0]), 0)
    finally:
        if pool is not None:
            pool.shutdown()
    return TreeModel(root=root, n_features=n_features, n_classes=n_classes, depth=depth, hp=hp)


def predict(t: TreeModel, row) -> int:
    """Route one row to its leaf; values <= threshold go left."""
    row = np.asarray(row, dtype=np.float64).ravel()
    if row.shape[0] != t.n_features:
        raise ValueError(f"row has {row.shape[0]} features, tree was fit on {t.n_features}")
    node = t.root
    while isinstance(node, Split):
        node = node.left if row[node.feature] <= node.threshold else node.right
    return node.majority


def predict_many(t: TreeModel, X: np.ndarray) -> np.ndarray:
    """Vectorized batch prediction; equivalent to predict on each row."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != t.n_features:
        raise ValueError(f"matrix has shape {X.shape}, tree was fit on {t.n_features} features")
    out = np.empty(X.shape[0], dtype=np.int64)
    stack: list[tuple[Leaf | Split, np.ndarray]] = [(t.root, np.arange(X.shape[0]))]
    while stack:
        node, idx = stack.pop()
        if isinstance(node, Leaf):
            out[idx] = node.majority
        else:
            mask = X[idx, node.feature] <= node.threshold
            stack.append((node.left, idx[mask]))
            stack.append((node.right, idx[~mask]))
    return out


def dump_tree(t: TreeModel, feature_names=None) -> str:
    """Indented one-line-per-node text rendering for inspection."""
    names = feature_names or [f"f{i}" for i in range(t.n_features)]
    lines: list[str] = []

    def walk(node: Leaf | Split, indent: int) -> None:
        pad = "  " * indent
        if isinstance(node, Leaf):
            lines.append(f"{pad}leaf class={node.majority} counts={list(node.counts)}")
        else:
            lines.append(f"{pad}{names[node.feature]} <= {node.threshold!r}")
            walk(node.left, indent + 1)
            walk(node.right, indent + 1)

    walk(t.root, 0)
    return "\n".join(lines)
