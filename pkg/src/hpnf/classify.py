"""Classifiers over feature vectors, repeated holdout evaluation and Gini importance.

Labels are integers throughout: 1 = fake (the positive class), 0 = real.
All four learners are written against numpy only so that a (data, kind,
seed) triple pins down the fitted model exactly.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .features import FEATURE_NAMES

FAKE, REAL = 1, 0
KINDS = ("gnb", "dt", "lr", "rf")
MODEL_FORMAT = "hpnf-model"
MODEL_VERSION = 1

FEATURE_GROUPS = {
    "all": list(range(32)),
    "macro": list(range(0, 17)),
    "micro": list(range(17, 32)),
    "structural": [i for i, n in enumerate(FEATURE_NAMES) if n.startswith("S")],
    "temporal": [i for i, n in enumerate(FEATURE_NAMES) if n.startswith("T")],
    "linguistic": [i for i, n in enumerate(FEATURE_NAMES) if n.startswith("L")],
}


class SingleClassTraining(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class TooFewSamples(ValueError):
    pass


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if X.ndim != 2 or len(X) != len(y):
        raise LengthMismatch("X must be 2-D with one row per label")
    if not set(np.unique(y)) <= {FAKE, REAL}:
        raise ValueError("labels must be 0 (real) or 1 (fake)")
    if (y == FAKE).sum() == 0 or (y == REAL).sum() == 0:
        raise SingleClassTraining("training data needs both classes")
    return X, y


# -- Gaussian naive Bayes --------------------------------------------------

class GaussianNB:
    kind = "gnb"

    def __init__(self, var_floor_ratio=1e-9):
        self.var_floor_ratio = var_floor_ratio
        self.training_seed = 0

    def fit(self, X, y, seed=0):
        X, y = _check_xy(X, y)
        self.training_seed = int(seed)
        floor = self.var_floor_ratio * float(np.max(X.var(axis=0)))
        if floor <= 0.0:
            floor = self.var_floor_ratio
        self.var_floor_ = floor
        # rows: [real, fake]
        self.prior_ = np.array([np.mean(y == c) for c in (REAL, FAKE)])
        self.mean_ = np.array([X[y == c].mean(axis=0) for c in (REAL, FAKE)])
        self.var_ = np.maximum(np.array([X[y == c].var(axis=0) for c in (REAL, FAKE)]), floor)
        return self

    def joint_log_likelihood(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        out = np.empty((len(X), 2))
        for c in range(2):
            # scale before squaring so |x| up to 1e12 cannot overflow
            z = (X - self.mean_[c]) / np.sqrt(self.var_[c])
            out[:, c] = (math.log(self.prior_[c])
                         - 0.5 * np.sum(np.log(2.0 * np.pi * self.var_[c]))
                         - 0.5 * np.sum(z * z, axis=1))
        return out

    def predict(self, X):
        jll = self.joint_log_likelihood(X)
        return np.where(jll[:, 1] >= jll[:, 0], FAKE, REAL)

    def to_dict(self):
        return {"var_floor_ratio": self.var_floor_ratio, "var_floor": self.var_floor_,
                "prior": self.prior_.tolist(), "mean": self.mean_.tolist(), "var": self.var_.tolist()}

    @classmethod
    def from_dict(cls, d):
        m = cls(d["var_floor_ratio"])
        m.var_floor_ = d["var_floor"]
        m.prior_ = np.array(d["prior"])
        m.mean_ = np.array(d["mean"])
        m.var_ = np.array(d["var"])
        return m


# -- CART ------------------------------------------------------------------

LEAF = -1


def _best_split_on_feature(xs, ys):
    """Best Gini split of one feature column at a node.

    Returns (score, threshold) or None when the column is constant.
    ``score`` is the sum over children of (n_fake^2 + n_real^2) / n, which
    grows as the weighted child impurity shrinks.
    """
    order = np.argsort(xs, kind="stable")
    xs = xs[order]
    ys = ys[order]
    n = len(xs)
    cuts = np.nonzero(xs[1:] > xs[:-1])[0]
    if len(cuts) == 0:
        return None
    cum_fake = np.cumsum(ys)
    total_fake = cum_fake[-1]
    n_left = cuts + 1.0
    f_left = cum_fake[cuts].astype(float)
    n_right = n - n_left
    f_right = total_fake - f_left
    score = ((f_left ** 2 + (n_left - f_left) ** 2) / n_left
             + (f_right ** 2 + (n_right - f_right) ** 2) / n_right)
    k = int(np.argmax(score))
    lo, hi = xs[cuts[k]], xs[cuts[k] + 1]
    thr = 0.5 * (lo + hi)
    if not lo <= thr < hi:
        thr = lo
    return float(score[k]), float(thr)


class DecisionTree:
    """CART with Gini impurity, grown until leaves are pure or hold one sample.

    Splits send ``x <= threshold`` left. Among equally good splits the lowest
    feature index wins, then the lowest threshold. With ``max_features`` set,
    each node examines that many non-constant features in an order drawn
    from ``rng``.
    """

    kind = "dt"

    def __init__(self, max_features=None):
        self.max_features = max_features
        self.training_seed = 0

    def fit(self, X, y, seed=0, rng=None, sample_idx=None):
        X, y = _check_xy(X, y)
        self.training_seed = int(seed)
        self.n_features_ = X.shape[1]
        if sample_idx is None:
            sample_idx = np.arange(len(y))
        if self.max_features is not None and rng is None:
            rng = np.random.default_rng(seed)
        feature, threshold, left, right, n_node, n_fake = [], [], [], [], [], []

        def new_node(idx):
            feature.append(LEAF)
            threshold.append(0.0)
            left.append(LEAF)
            right.append(LEAF)
            n_node.append(len(idx))
            n_fake.append(int(y[idx].sum()))
            return len(feature) - 1

        root = new_node(sample_idx)
        stack = [(root, sample_idx)]
        while stack:
            node, idx = stack.pop()
            nf = n_fake[node]
            if len(idx) < 2 or nf == 0 or nf == len(idx):
                continue
            split = self._find_split(X, y, idx, rng)
            if split is None:
                continue
            j, thr = split
            go_left = X[idx, j] <= thr
            li = new_node(idx[go_left])
            ri = new_node(idx[~go_left])
            feature[node], threshold[node], left[node], right[node] = j, thr, li, ri
            # right pushed first so the left subtree gets the lower node ids
            stack.append((ri, idx[~go_left]))
            stack.append((li, idx[go_left]))

        self.feature_ = np.array(feature, dtype=int)
        self.threshold_ = np.array(threshold, dtype=float)
        self.left_ = np.array(left, dtype=int)
        self.right_ = np.array(right, dtype=int)
        self.n_node_ = np.array(n_node, dtype=int)
        self.n_fake_ = np.array(n_fake, dtype=int)
        return self

    def _find_split(self, X, y, idx, rng):
        d = X.shape[1]
        if self.max_features is None:
            candidates = range(d)
            budget = d
        else:
            candidates = rng.permutation(d)
            budget = self.max_features
        best = None
        ys = y[idx]
        for j in candidates:
            if budget == 0:
                break
            res = _best_split_on_feature(X[idx, j], ys)
            if res is None:
                continue
            budget -= 1
            score, thr = res
            key = (score, -j)
            if best is None or key > best[0]:
                best = (key, j, thr)
        return None if best is None else (best[1], best[2])

    def apply(self, X):
        """Leaf index reached by each row."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        node = np.zeros(len(X), dtype=int)
        active = self.feature_[node] != LEAF
        while active.any():
            rows = np.nonzero(active)[0]
            cur = node[rows]
            go_left = X[rows, self.feature_[cur]] <= self.threshold_[cur]
            node[rows] = np.where(go_left, self.left_[cur], self.right_[cur])
            active[rows] = self.feature_[node[rows]] != LEAF
        return node

    def leaf_label(self):
        # majority class, ties to fake
        return np.where(2 * self.n_fake_ >= self.n_node_, FAKE, REAL)

    def predict(self, X):
        return self.leaf_label()[self.apply(X)]

    def node_counts(self, X, y):
        """(samples, fakes) reaching every node when ``X`` is pushed down the tree."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        y = np.asarray(y, dtype=int)
        n_node = np.zeros(len(self.feature_), dtype=int)
        n_fake = np.zeros(len(self.feature_), dtype=int)
        stack = [(0, np.arange(len(X)))]
        while stack:
            node, rows = stack.pop()
            n_node[node] = len(rows)
            n_fake[node] = int(y[rows].sum())
            if self.feature_[node] == LEAF or len(rows) == 0:
                continue
            go_left = X[rows, self.feature_[node]] <= self.threshold_[node]
            stack.append((self.left_[node], rows[go_left]))
            stack.append((self.right_[node], rows[~go_left]))
        return n_node, n_fake

    def impurity_decrease(self, n_node=None, n_fake=None):
        """Per-feature total of n_t/N * Gini decrease over split nodes."""
        if n_node is None:
            n_node, n_fake = self.n_node_, self.n_fake_
        n = n_node.astype(float)
        f = n_fake.astype(float)
        with np.errstate(invalid="ignore", divide="ignore"):
            weighted = np.where(n > 0, n - (f ** 2 + (n - f) ** 2) / n, 0.0)
        out = np.zeros(self.n_features_)
        total = n[0]
        if total == 0:
            return out
        for node in np.nonzero(self.feature_ != LEAF)[0]:
            dec = weighted[node] - weighted[self.left_[node]] - weighted[self.right_[node]]
            out[self.feature_[node]] += max(dec, 0.0) / total
        return out

    def to_dict(self):
        return {
            "max_features": self.max_features, "n_features": self.n_features_,
            "feature": self.feature_.tolist(), "threshold": self.threshold_.tolist(),
            "left": self.left_.tolist(), "right": self.right_.tolist(),
            "n_node": self.n_node_.tolist(), "n_fake": self.n_fake_.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        m = cls(d["max_features"])
        m.n_features_ = d["n_features"]
        m.feature_ = np.array(d["feature"], dtype=int)
        m.threshold_ = np.array(d["threshold"], dtype=float)
        m.left_ = np.array(d["left"], dtype=int)
        m.right_ = np.array(d["right"], dtype=int)
        m.n_node_ = np.array(d["n_node"], dtype=int)
        m.n_fake_ = np.array(d["n_fake"], dtype=int)
        return m


# -- logistic regression ---------------------------------------------------

class LogisticRegression:
    """L2-regularized logistic regression on z-scored inputs.

    Minimizes mean log-loss + l2 / (2 n) * ||w||^2 (intercept unpenalized)
    by full-batch gradient descent with Armijo backtracking.
    """

    kind = "lr"

    def __init__(self, l2=1.0, tol=1e-6, max_iter=1000):
        self.l2 = l2
        self.tol = tol
        self.max_iter = max_iter
        self.training_seed = 0

    def _loss_grad(self, Z, y, w, b):
        n = len(y)
        z = Z @ w + b
        loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * self.l2 / n * float(w @ w)
        r = 0.5 * (1.0 + np.tanh(0.5 * z)) - y
        gw = Z.T @ r / n + self.l2 / n * w
        gb = float(np.mean(r))
        return float(loss), gw, gb

    def fit(self, X, y, seed=0):
        X, y = _check_xy(X, y)
        self.training_seed = int(seed)
        self.mu_ = X.mean(axis=0)
        sd = X.std(axis=0)
        self.sd_ = np.where(sd > 0, sd, 1.0)
        Z = (X - self.mu_) / self.sd_
        yf = y.astype(float)
        w = np.zeros(X.shape[1])
        b = 0.0
        loss, gw, gb = self._loss_grad(Z, yf, w, b)
        history = [loss]
        step = 1.0
        self.converged_ = False
        for _ in range(self.max_iter):
            gnorm2 = float(gw @ gw) + gb * gb
            if math.sqrt(gnorm2) <= self.tol:
                self.converged_ = True
                break
            step = min(step * 2.0, 1e6)
            while True:
                w_new = w - step * gw
                b_new = b - step * gb
                new_loss, new_gw, new_gb = self._loss_grad(Z, yf, w_new, b_new)
                if new_loss <= loss - 1e-4 * step * gnorm2 or step < 1e-12:
                    break
                step *= 0.5
            if new_loss > loss:
                break
            w, b, loss, gw, gb = w_new, b_new, new_loss, new_gw, new_gb
            history.append(loss)
        else:
            self.converged_ = math.sqrt(float(gw @ gw) + gb * gb) <= self.tol
        self.coef_ = w
        self.intercept_ = b
        self.loss_history_ = history
        self.grad_norm_ = math.sqrt(float(gw @ gw) + gb * gb)
        return self

    def decision_function(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return ((X - self.mu_) / self.sd_) @ self.coef_ + self.intercept_

    def predict(self, X):
        # decision value 0 is probability 0.5: ties to fake
        return np.where(self.decision_function(X) >= 0.0, FAKE, REAL)

    def to_dict(self):
        return {"l2": self.l2, "tol": self.tol, "max_iter": self.max_iter,
                "mu": self.mu_.tolist(), "sd": self.sd_.tolist(),
                "coef": self.coef_.tolist(), "intercept": self.intercept_}

    @classmethod
    def from_dict(cls, d):
        m = cls(d["l2"], d["tol"], d["max_iter"])
        m.mu_ = np.array(d["mu"])
        m.sd_ = np.array(d["sd"])
        m.coef_ = np.array(d["coef"])
        m.intercept_ = d["intercept"]
        return m


# -- random forest ---------------------------------------------------------

class RandomForest:
    """Bagged CART trees with sqrt(d) candidate features per split.

    Tree ``i`` draws its bootstrap sample and feature orders from
    ``numpy.random.default_rng(seed + i)`` only, so trees can be fitted in
    any order or in parallel with the same result.
    """

    kind = "rf"

    def __init__(self, n_trees=100, max_features=None, n_jobs=1):
        self.n_trees = n_trees
        self.max_features = max_features
        self.n_jobs = n_jobs
        self.training_seed = 0

    def _fit_tree(self, X, y, i):
        rng = np.random.default_rng(self.training_seed + i)
        boot = rng.integers(0, len(y), size=len(y))
        tree = DecisionTree(self.max_features_)
        if len(np.unique(y[boot])) < 2:
            # single-class bootstrap: a one-leaf tree
            tree.n_features_ = X.shape[1]
            tree.feature_ = np.array([LEAF])
            tree.threshold_ = np.zeros(1)
            tree.left_ = tree.right_ = np.array([LEAF])
            tree.n_node_ = np.array([len(boot)])
            tree.n_fake_ = np.array([int(y[boot].sum())])
            return tree
        return tree.fit(X, y, seed=self.training_seed + i, rng=rng, sample_idx=boot)

    def fit(self, X, y, seed=0):
        X, y = _check_xy(X, y)
        self.training_seed = int(seed)
        d = X.shape[1]
        self.max_features_ = self.max_features or max(1, int(math.sqrt(d)))
        if self.n_jobs > 1:
            with ThreadPoolExecutor(max_workers=self.n_jobs) as pool:
                self.trees_ = list(pool.map(lambda i: self._fit_tree(X, y, i), range(self.n_trees)))
        else:
            self.trees_ = [self._fit_tree(X, y, i) for i in range(self.n_trees)]
        return self

    def votes(self, X):
        """Number of trees voting fake, per row."""
        return np.sum([t.predict(X) for t in self.trees_], axis=0)

    def predict(self, X):
        return np.where(2 * self.votes(X) >= len(self.trees_), FAKE, REAL)

    def to_dict(self):
        return {"n_trees": self.n_trees, "max_features": self.max_features_,
                "trees": [t.to_dict() for t in self.trees_]}

    @classmethod
    def from_dict(cls, d):
        m = cls(d["n_trees"], d["max_features"])
        m.max_features_ = d["max_features"]
        m.trees_ = [DecisionTree.from_dict(t) for t in d["trees"]]
        return m


_MODELS = {"gnb": GaussianNB, "dt": DecisionTree, "lr": LogisticRegression, "rf": RandomForest}


def make_model(kind):
    if kind not in _MODELS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {KINDS}")
    return _MODELS[kind]()


def train_model(kind, X, y, seed=0):
    return make_model(kind).fit(X, y, seed=seed)


def predict(model, x):
    """Label (1 fake, 0 real) of a single feature vector."""
    return int(model.predict(np.asarray(x, dtype=float).reshape(1, -1))[0])


def model_to_dict(model):
    return {"format": MODEL_FORMAT, "version": MODEL_VERSION, "kind": model.kind,
            "training_seed": model.training_seed, "params": model.to_dict()}


def model_from_dict(d):
    if d.get("format") != MODEL_FORMAT or d.get("version") != MODEL_VERSION:
        raise ValueError("not a supported model file")
    model = _MODELS[d["kind"]].from_dict(d["params"])
    model.training_seed = d["training_seed"]
    return model


def save_model(model, path):
    Path(path).write_text(json.dumps(model_to_dict(model)), encoding="utf-8")


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


# -- evaluation ------------------------------------------------------------

@dataclass(frozen=True)
class Metrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    tp: int
    fp: int
    tn: int
    fn: int

    def as_dict(self):
        return {"acc": self.accuracy, "prec": self.precision, "rec": self.recall, "f1": self.f1}


def compute_metrics(predictions, labels):
    """Confusion counts and scores with fake as the positive class."""
    p = np.asarray(predictions, dtype=int)
    t = np.asarray(labels, dtype=int)
    if p.shape != t.shape:
        raise LengthMismatch(f"{len(p)} predictions for {len(t)} labels")
    if len(t) == 0:
        raise ValueError("no samples")
    tp = int(np.sum((p == FAKE) & (t == FAKE)))
    fp = int(np.sum((p == FAKE) & (t == REAL)))
    tn = int(np.sum((p == REAL) & (t == REAL)))
    fn = int(np.sum((p == REAL) & (t == FAKE)))
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * prec * rec / (prec + rec) if prec + rec > 0 else 0.0
    return Metrics((tp + tn) / len(t), prec, rec, f1, tp, fp, tn, fn)


def holdout_split(y, train_frac, rng, stratify=True):
    """(train_idx, test_idx), both sorted."""
    y = np.asarray(y)
    if stratify:
        train = []
        for c in (FAKE, REAL):
            idx = rng.permutation(np.nonzero(y == c)[0])
            k = min(max(int(round(train_frac * len(idx))), 1), len(idx) - 1)
            train.extend(idx[:k].tolist())
        train = np.array(sorted(train), dtype=int)
    else:
        perm = rng.permutation(len(y))
        k = min(max(int(round(train_frac * len(y))), 1), len(y) - 1)
        train = np.sort(perm[:k])
    test = np.setdiff1d(np.arange(len(y)), train)
    return train, test


@dataclass(frozen=True)
class HoldoutResult:
    kind: str
    per_run: list[Metrics]

    @property
    def mean(self):
        keys = ("accuracy", "precision", "recall", "f1")
        return {k: math.fsum(getattr(m, k) for m in self.per_run) / len(self.per_run) for k in keys}

    def as_dict(self):
        mean = self.mean
        return {
            "kind": self.kind,
            "runs": len(self.per_run),
            "per_run": [m.as_dict() for m in self.per_run],
            "mean": {"acc": mean["accuracy"], "prec": mean["precision"],
                     "rec": mean["recall"], "f1": mean["f1"]},
        }


def repeated_holdout(X, y, kind, runs=5, train_frac=0.8, seed=0, stratify=True):
    """Train/test on ``runs`` random splits; run ``r`` uses seed ``seed + r``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if min((y == FAKE).sum(), (y == REAL).sum()) < 5:
        raise TooFewSamples("need at least 5 samples of each class")
    if not 0.0 < train_frac < 1.0:
        raise ValueError("train_frac must lie in (0, 1)")
    per_run = []
    for r in range(runs):
        rng = np.random.default_rng(seed + r)
        train, test = holdout_split(y, train_frac, rng, stratify)
        if len(np.unique(y[train])) < 2:
            raise SingleClassTraining(f"run {r}: training fold has one class")
        model = train_model(kind, X[train], y[train], seed=seed + r)
        per_run.append(compute_metrics(model.predict(X[test]), y[test]))
    return HoldoutResult(kind, per_run)


@dataclass(frozen=True)
class ImportanceReport:
    importances: np.ndarray
    names: list[str]

    def ranked(self):
        """(name, importance) pairs, most important first; ties keep column order."""
        order = sorted(range(len(self.names)), key=lambda j: (-self.importances[j], j))
        return [(self.names[j], float(self.importances[j])) for j in order]

    def rank_of(self, name):
        return [n for n, _ in self.ranked()].index(name) + 1


def gini_importance(model, X_train=None, y_train=None, names=None):
    """Mean decrease in Gini impurity per feature, normalized to sum to 1.

    With training data the node statistics are recomputed by routing
    ``X_train`` through each tree; without it the fit-time (bootstrap) counts
    are used. Works on a forest or a single tree.
    """
    trees = model.trees_ if isinstance(model, RandomForest) else [model]
    total = np.zeros(trees[0].n_features_)
    for tree in trees:
        if X_train is not None:
            total += tree.impurity_decrease(*tree.node_counts(X_train, y_train))
        else:
            total += tree.impurity_decrease()
    total /= len(trees)
    s = total.sum()
    imp = total / s if s > 0 else np.zeros_like(total)
    if names is None:
        names = FEATURE_NAMES if len(imp) == len(FEATURE_NAMES) else [f"f{j}" for j in range(len(imp))]
    return ImportanceReport(imp, list(names))


def select_feature_subset(X, spec="all"):
    if spec not in FEATURE_GROUPS:
        raise ValueError(f"unknown feature subset {spec!r}")
    return np.asarray(X)[:, FEATURE_GROUPS[spec]]


def subset_names(spec="all"):
    return [FEATURE_NAMES[i] for i in FEATURE_GROUPS[spec]]
