"""Seeded synthetic engagement corpora with fake-like and real-like presets.

Every item draws from its own numpy PCG64 stream seeded with
``SeedSequence((params.seed, label_code, item_index))``, so items can be
generated in any order. Each cascade is a Galton-Watson tree with Poisson
offspring, truncated at ``max_depth`` retweet hops. Friend lists are written
so that parent inference recovers the generated tree exactly: a retweeter
follows the author of its true parent and, under ``confound``, also users
whose retweets cannot win the latest-prior-friend rule.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace

import numpy as np

from .ingestion import (
    NewsRecord, ReplyRecord, RetweetRecord, TweetRecord, UserRecord, build_corpus, write_corpus,
)

BASE_TS = 1_500_000_000
ITEM_SPACING_S = 10_000_000
MAX_REPLY_DEPTH = 6
MAX_CASCADE_SIZE = 5000
BOT_SCORE, HUMAN_SCORE = 0.9, 0.1

POSITIVE_PHRASES = (
    "great reporting, thanks for sharing",
    "this is excellent news",
    "love this, really good work",
    "wonderful story, glad to see it",
    "amazing, i am so happy about this",
    "very informative and helpful article",
    "brilliant piece, well done",
    "fantastic update, congrats to everyone",
    "good to see honest journalism",
    "i trust this source, solid facts",
    "so proud of this outcome",
    "thanks, very useful and clear",
    "what a beautiful moment",
    "this is the best news today",
    "awesome, i enjoyed reading it",
    "really impressive and inspiring",
    "fair and accurate coverage, thank you",
    "hopeful news, finally some relief",
    "nice work, highly recommend this read",
    "celebrate this success, it is well deserved",
)

NEGATIVE_PHRASES = (
    "this is fake and misleading",
    "total lies, what a disgrace",
    "terrible reporting, pure propaganda",
    "what a stupid hoax",
    "this is wrong and dangerous",
    "awful, i hate this nonsense",
    "such a scam, shame on you",
    "disgusting and corrupt as usual",
    "worst article ever, garbage",
    "sad and pathetic story",
    "the author is a liar",
    "ridiculous conspiracy trash",
    "i am angry about this fraud",
    "this is a disaster and a crisis",
    "outrageous, people will get hurt",
    "biased and unfair coverage",
    "stop spreading this evil propaganda",
    "useless clickbait, total failure",
    "so upset, this is horrible",
    "scary lies meant to manipulate us",
)


class InvalidParams(ValueError):
    pass


@dataclass(frozen=True)
class GenParams:
    n_items: int = 100
    cascades_mean: float = 3.0
    retweet_offspring_mean: float = 1.0
    max_depth: int = 4
    tweet_interarrival_mean_s: float = 3600.0
    retweet_delay_mean_s: float = 1800.0
    reply_prob: float = 0.3
    reply_offspring_mean: float = 0.5
    reply_delay_mean_s: float = 1800.0
    bot_fraction: float = 0.1
    positive_reply_prob: float = 0.5
    seed: int = 0

    def validate(self):
        # offspring means may be 0 (no retweets / no nested replies)
        if self.n_items < 0:
            raise InvalidParams("n_items must be >= 0")
        if self.max_depth < 1:
            raise InvalidParams("max_depth must be >= 1")
        for name in ("cascades_mean", "tweet_interarrival_mean_s", "retweet_delay_mean_s",
                     "reply_delay_mean_s"):
            if not getattr(self, name) > 0:
                raise InvalidParams(f"{name} must be > 0")
        for name in ("retweet_offspring_mean", "reply_offspring_mean"):
            if not getattr(self, name) >= 0:
                raise InvalidParams(f"{name} must be >= 0")
        for name in ("reply_prob", "bot_fraction", "positive_reply_prob"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidParams(f"{name} must lie in [0, 1]")
        return self


# Fake-like spreads deeper and faster, dies sooner, draws more bots and more
# negative replies than real-like.
_PRESETS = {
    "fake_like": dict(
        cascades_mean=3.0, retweet_offspring_mean=1.05, max_depth=6,
        tweet_interarrival_mean_s=2000.0, retweet_delay_mean_s=1000.0,
        reply_prob=0.35, reply_offspring_mean=0.7, reply_delay_mean_s=1200.0,
        bot_fraction=0.25, positive_reply_prob=0.3,
    ),
    "real_like": dict(
        cascades_mean=3.0, retweet_offspring_mean=0.75, max_depth=3,
        tweet_interarrival_mean_s=5000.0, retweet_delay_mean_s=3000.0,
        reply_prob=0.25, reply_offspring_mean=0.5, reply_delay_mean_s=2400.0,
        bot_fraction=0.05, positive_reply_prob=0.6,
    ),
}


def preset_params(kind, seed=0, n_items=100):
    key = kind.replace("-", "_")
    if key not in _PRESETS:
        raise InvalidParams(f"unknown preset {kind!r}")
    return GenParams(n_items=n_items, seed=seed, **_PRESETS[key]).validate()


def _delay(rng, mean):
    # whole seconds, at least 1 so a child is always strictly later than its parent
    return max(1, int(math.ceil(rng.exponential(mean))))


@dataclass
class SyntheticItem:
    news: NewsRecord
    tweets: list
    retweets: list
    replies: list
    users: list
    macro_edges: set  # ground-truth (parent_id, child_id) pairs, news root included
    micro_edges: set


def generate_item(params, news_id, label, rng, confound=False, start_ts=BASE_TS):
    """One news item with its engagement records and ground-truth edges."""
    n_cascades = max(1, int(rng.poisson(params.cascades_mean)))
    tweets, retweets, replies, users = [], [], [], []
    macro_edges, micro_edges = set(), set()
    counter = 0

    def fresh_user():
        nonlocal counter
        counter += 1
        return f"{news_id}-u{counter}"

    ts = start_ts
    posts = []  # (post_id, ts) for reply generation
    for c in range(n_cascades):
        if c:
            ts += int(round(rng.exponential(params.tweet_interarrival_mean_s)))
        tid = f"{news_id}-t{c}"
        tuser = fresh_user()
        tweets.append(TweetRecord(tid, news_id, tuser, ts))
        users.append(UserRecord(tuser, (), HUMAN_SCORE))
        macro_edges.add((news_id, tid))
        posts.append((tid, ts))

        # breadth-first Galton-Watson growth
        cascade = []  # (retweet_id, user, ts, parent_id, parent_user, parent_ts)
        frontier = [(tid, tuser, ts, 0)]
        k = 0
        while frontier and len(cascade) < MAX_CASCADE_SIZE:
            nxt = []
            for pid, puser, pts, depth in frontier:
                if depth >= params.max_depth:
                    continue
                for _ in range(int(rng.poisson(params.retweet_offspring_mean))):
                    if len(cascade) >= MAX_CASCADE_SIZE:
                        break
                    rid = f"{tid}-r{k}"
                    k += 1
                    rts = pts + _delay(rng, params.retweet_delay_mean_s)
                    cascade.append((rid, fresh_user(), rts, pid, puser, pts))
                    nxt.append((rid, cascade[-1][1], rts, depth + 1))
            frontier = nxt

        for rid, ruser, rts, pid, puser, pts in cascade:
            retweets.append(RetweetRecord(rid, tid, ruser, rts))
            macro_edges.add((pid, rid))
            posts.append((rid, rts))
            friends = [puser]
            if confound:
                friends.extend(_confounders(rng, cascade, rid, rts, pid, pts, tid))
            bot = rng.random() < params.bot_fraction
            users.append(UserRecord(ruser, tuple(friends), BOT_SCORE if bot else HUMAN_SCORE))

    n_reply = 0
    for post_id, post_ts in posts:
        if rng.random() >= params.reply_prob:
            continue
        frontier = [(post_id, post_ts, 1 + int(rng.poisson(params.reply_offspring_mean)), 1)]
        while frontier:
            nxt = []
            for parent_id, parent_ts, n_children, depth in frontier:
                for _ in range(n_children):
                    pid = f"{news_id}-p{n_reply}"
                    n_reply += 1
                    pts = parent_ts + _delay(rng, params.reply_delay_mean_s)
                    pool = POSITIVE_PHRASES if rng.random() < params.positive_reply_prob else NEGATIVE_PHRASES
                    text = pool[int(rng.integers(len(pool)))]
                    replies.append(ReplyRecord(pid, news_id, parent_id, fresh_user(), pts, text))
                    micro_edges.add((parent_id, pid))
                    if depth < MAX_REPLY_DEPTH:
                        nxt.append((pid, pts, int(rng.poisson(params.reply_offspring_mean)), depth + 1))
            frontier = nxt

    return SyntheticItem(NewsRecord(news_id, label), tweets, retweets, replies, users,
                         macro_edges, micro_edges)


def _confounders(rng, cascade, rid, rts, pid, pts, tid):
    """Extra friends that the latest-prior-friend rule must see past.

    Authors of same-cascade retweets made at or after this one never qualify.
    When the true parent is itself a retweet, authors of retweets strictly
    older than it lose to it on recency. A dangling id is sometimes added too.
    """
    later = [c[1] for c in cascade if c[0] != rid and c[2] >= rts]
    older = [c[1] for c in cascade if c[2] < pts] if pid != tid else []
    extra = []
    for pool in (later, older):
        if pool:
            picks = rng.choice(len(pool), size=min(2, len(pool)), replace=False)
            extra.extend(pool[i] for i in sorted(picks))
    if rng.random() < 0.2:
        extra.append(f"ghost-{rid}")
    return extra


def generate_items(params_fake, params_real, n_fake, n_real, confound=False):
    """All synthetic items, fakes first, each from its own seeded substream."""
    params_fake.validate()
    params_real.validate()
    items = []
    for label, params, n, code, prefix in (("fake", params_fake, n_fake, 1, "F"),
                                           ("real", params_real, n_real, 0, "R")):
        for i in range(n):
            rng = np.random.default_rng(np.random.SeedSequence((params.seed, code, i)))
            start = BASE_TS + i * ITEM_SPACING_S
            items.append(generate_item(params, f"{prefix}{i:05d}", label, rng, confound, start))
    return items


def corpus_from_items(items):
    return build_corpus(
        [it.news for it in items],
        [t for it in items for t in it.tweets],
        [r for it in items for r in it.retweets],
        [p for it in items for p in it.replies],
        [u for it in items for u in it.users],
    )


def generate_corpus(params_fake, params_real, n_fake=None, n_real=None, out_dir=None, confound=False):
    """Build a labeled corpus; when ``out_dir`` is given also write the JSONL files there."""
    n_fake = params_fake.n_items if n_fake is None else n_fake
    n_real = params_real.n_items if n_real is None else n_real
    corpus = corpus_from_items(generate_items(params_fake, params_real, n_fake, n_real, confound))
    if out_dir is not None:
        write_corpus(corpus, out_dir)
    return corpus


def params_as_dict(params):
    return asdict(params)


def with_seed(params, seed):
    return replace(params, seed=seed)
