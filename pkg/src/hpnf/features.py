"""The 32 hierarchical propagation network features.

Canonical order is macro structural S1-S9, macro temporal T1-T8, micro
structural S10-S14, micro temporal T9-T13, micro linguistic L1-L5. A feature
whose defining population is empty (no retweets, no replies, no bot scores)
is masked out and stored as 0.0.

Depth conventions differ on purpose: S1 counts edges from the news root, S5
counts retweet hops from the cascade's tweet (the tweet itself is 0), and S10
counts nodes on the conversation path with the replied-to post included.
All times are in seconds.
"""
from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .network import (
    RETWEET, build_network, deepest_macro_cascade, deepest_micro_cascade,
)
from .sentiment import SentimentScorer

MACRO_STRUCTURAL = [f"S{i}" for i in range(1, 10)]
MACRO_TEMPORAL = [f"T{i}" for i in range(1, 9)]
MICRO_STRUCTURAL = [f"S{i}" for i in range(10, 15)]
MICRO_TEMPORAL = [f"T{i}" for i in range(9, 14)]
MICRO_LINGUISTIC = [f"L{i}" for i in range(1, 6)]
FEATURE_NAMES = MACRO_STRUCTURAL + MACRO_TEMPORAL + MICRO_STRUCTURAL + MICRO_TEMPORAL + MICRO_LINGUISTIC
N_FEATURES = len(FEATURE_NAMES)
FEATURE_INDEX = {name: i for i, name in enumerate(FEATURE_NAMES)}

DEFAULT_BOT_THRESHOLD = 0.5
POSITIVE_CUTOFF = 0.05
NEGATIVE_CUTOFF = -0.05


class ExcludedItem(ValueError):
    """Item without tweets; it has no propagation network to describe."""


@dataclass(frozen=True)
class FeatureVector:
    news_id: str
    label: str
    values: tuple[float, ...]
    mask: tuple[bool, ...]

    def __getitem__(self, name):
        return self.values[FEATURE_INDEX[name]]

    def defined(self, name):
        return self.mask[FEATURE_INDEX[name]]

    def as_dict(self):
        return {n: (v if m else None) for n, v, m in zip(FEATURE_NAMES, self.values, self.mask)}

    @property
    def mask_string(self):
        return "".join("1" if m else "0" for m in self.mask)


def _mean(xs):
    return math.fsum(xs) / len(xs)


def _group(names, computed):
    """Ordered (values, mask) from a dict that omits undefined features."""
    values = [float(computed[n]) if n in computed else 0.0 for n in names]
    mask = [n in computed for n in names]
    return values, mask


def max_outdegree_node(net):
    """Tweet/retweet with the most children and its hop count below its tweet.

    Ties go to the fewest hops, then the earliest post, then the smaller id.
    """
    best = None
    for tweet in net.cascades:
        for n in tweet.walk():
            key = (-n.out_degree, n.level - tweet.level, n.ts, n.node_id)
            if best is None or key < best[0]:
                best = (key, n)
    return best[1], best[0][1]


def extract_macro_structural(net, users, bot_threshold=DEFAULT_BOT_THRESHOLD):
    nodes = net.macro_nodes()
    cascades = net.cascades
    out = {}
    out["S1"] = max(n.level for n in nodes)
    out["S2"] = len(nodes)
    hub, hops = max_outdegree_node(net)
    out["S3"] = hub.out_degree
    out["S4"] = len(cascades)
    out["S5"] = hops

    retweeted = sum(1 for t in cascades if t.children)
    out["S6"] = retweeted
    out["S7"] = retweeted / len(cascades)

    posting_users = {n.user_id for n in nodes}
    if any(users[u].bot_score is not None for u in posting_users if u in users):
        retweeters = {n.user_id for n in nodes if n.kind == RETWEET}
        bots = sum(1 for u in retweeters
                   if u in users and users[u].bot_score is not None and users[u].bot_score >= bot_threshold)
        out["S8"] = bots
        out["S9"] = bots / len(posting_users)
    return _group(MACRO_STRUCTURAL, out)


def extract_macro_temporal(net):
    nodes = net.macro_nodes()
    tweets = net.cascades
    retweets = [n for n in nodes if n.kind == RETWEET]
    first = min(t.ts for t in tweets)
    out = {}

    tweet_ts = sorted(t.ts for t in tweets)
    out["T4"] = tweet_ts[-1] - tweet_ts[0]
    gaps = [b - a for a, b in zip(tweet_ts, tweet_ts[1:])]
    out["T7"] = _mean(gaps) if gaps else 0.0

    if retweets:
        hub, _ = max_outdegree_node(net)
        out["T1"] = _mean([r.ts - r.parent.ts for r in retweets])
        out["T2"] = max(r.ts for r in retweets) - first
        out["T3"] = hub.ts - first
        out["T8"] = _mean([min(c.ts for c in t.walk() if c is not t) - t.ts for t in tweets if t.children])
        deepest = deepest_macro_cascade(net)
        deep_rts = [n for n in deepest.walk() if n is not deepest]
        if deep_rts:
            out["T5"] = max(r.ts for r in deep_rts) - deepest.ts
            out["T6"] = _mean([r.ts - r.parent.ts for r in deep_rts])
    return _group(MACRO_TEMPORAL, out)


def extract_micro_structural(forest, n_cascades):
    out = {}
    # a reply under a retweet counts toward that retweet's cascade
    with_replies = len({t.cascade_id for t in forest})
    out["S13"] = with_replies
    out["S14"] = with_replies / n_cascades
    if forest:
        out["S10"] = max(t.depth() for t in forest)
        out["S11"] = sum(len(t.replies) for t in forest)
        out["S12"] = max(len(r.children) for t in forest for r in t.replies)
    return _group(MICRO_STRUCTURAL, out)


def extract_micro_temporal(forest, net):
    out = {}
    if forest:
        first = min(t.ts for t in net.cascades)
        replies = [r for t in forest for r in t.replies]
        out["T9"] = _mean([r.ts - pts for t in forest for pts, r in t.edges()])
        out["T10"] = min(r.ts for r in replies) - first
        out["T11"] = max(r.ts for r in replies) - first
        deepest = deepest_micro_cascade(forest)
        out["T12"] = _mean([r.ts - pts for pts, r in deepest.edges()])
        out["T13"] = max(r.ts for r in deepest.replies) - first
    return _group(MICRO_TEMPORAL, out)


def extract_micro_linguistic(forest, scorer):
    out = {}
    if forest:
        scores = {r.node_id: scorer(r.text) for t in forest for r in t.replies}
        vals = list(scores.values())
        positive = sum(1 for c in vals if c > POSITIVE_CUTOFF)
        negative = sum(1 for c in vals if c < NEGATIVE_CUTOFF)
        out["L1"] = positive / max(negative, 1)
        out["L2"] = _mean(vals)
        out["L3"] = _mean([scores[r.node_id] for t in forest for r in t.first_level])
        deepest = deepest_micro_cascade(forest)
        out["L4"] = _mean([scores[r.node_id] for r in deepest.replies])
        earliest = min(deepest.first_level, key=lambda r: (r.ts, r.node_id))
        out["L5"] = scores[earliest.node_id]
    return _group(MICRO_LINGUISTIC, out)


def features_from_network(net, label, users, scorer=None, bot_threshold=DEFAULT_BOT_THRESHOLD):
    if scorer is None:
        scorer = SentimentScorer()
    s_macro, m1 = extract_macro_structural(net, users, bot_threshold)
    t_macro, m2 = extract_macro_temporal(net)
    s_micro, m3 = extract_micro_structural(net.micro, len(net.cascades))
    t_micro, m4 = extract_micro_temporal(net.micro, net)
    ling, m5 = extract_micro_linguistic(net.micro, scorer)
    return FeatureVector(
        net.news_id, label,
        tuple(s_macro + t_macro + s_micro + t_micro + ling),
        tuple(m1 + m2 + m3 + m4 + m5),
    )


def extract_hpnf(corpus, news_id, scorer=None, bot_threshold=DEFAULT_BOT_THRESHOLD):
    """Feature vector of one news item."""
    item = corpus[news_id]
    if not item.tweets:
        raise ExcludedItem(news_id)
    net = build_network(item, corpus.users)
    return features_from_network(net, item.label, corpus.users, scorer, bot_threshold)


def extract_all(corpus, scorer=None, bot_threshold=DEFAULT_BOT_THRESHOLD, threads=1):
    """Vectors for every included item, ordered by news id."""
    if scorer is None:
        scorer = SentimentScorer()
    ids = [it.news_id for it in corpus if it.tweets]

    def one(nid):
        return extract_hpnf(corpus, nid, scorer, bot_threshold)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, ids))
    return [one(nid) for nid in ids]


def to_arrays(vectors):
    """(X, mask, y) with y = 1 for fake, 0 for real."""
    X = np.array([v.values for v in vectors], dtype=float).reshape(-1, N_FEATURES)
    mask = np.array([v.mask for v in vectors], dtype=bool).reshape(-1, N_FEATURES)
    y = np.array([1 if v.label == "fake" else 0 for v in vectors], dtype=int)
    return X, mask, y


def format_float(x):
    return f"{x:.9g}"


def write_features_csv(vectors, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["news_id", "label", *FEATURE_NAMES, "mask"])
    for v in vectors:
        writer.writerow([v.news_id, v.label, *map(format_float, v.values), v.mask_string])


def read_features_csv(fh):
    reader = csv.reader(fh)
    header = next(reader)
    if header != ["news_id", "label", *FEATURE_NAMES, "mask"]:
        raise ValueError("unexpected features.csv header")
    out = []
    for row in reader:
        if not row:
            continue
        values = tuple(float(x) for x in row[2:2 + N_FEATURES])
        mask_str = row[-1]
        if len(mask_str) != N_FEATURES or set(mask_str) - {"0", "1"}:
            raise ValueError(f"bad mask for {row[0]!r}")
        out.append(FeatureVector(row[0], row[1], values, tuple(c == "1" for c in mask_str)))
    return out


def features_to_csv_string(vectors):
    buf = io.StringIO()
    write_features_csv(vectors, buf)
    return buf.getvalue()
