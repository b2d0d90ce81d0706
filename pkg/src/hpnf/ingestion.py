"""Loading and validation of the JSONL engagement corpus.

A corpus directory holds five files, one JSON object per line::

    news.jsonl      {news_id, label, title?}
    tweets.jsonl    {tweet_id, news_id, user_id, ts}
    retweets.jsonl  {retweet_id, tweet_id, user_id, ts}
    replies.jsonl   {reply_id, news_id, parent_id, user_id, ts, text}
    users.jsonl     {user_id, friends: [...], bot_score?}

Missing files are treated as empty. Unknown fields are ignored.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType
from typing import Mapping

logger = logging.getLogger(__name__)

LABELS = ("fake", "real")
CORPUS_FILES = ("news.jsonl", "tweets.jsonl", "retweets.jsonl", "replies.jsonl", "users.jsonl")


class CorpusError(Exception):
    """Base class for data errors in an engagement corpus."""


class MalformedLine(CorpusError):
    def __init__(self, file, line, reason=""):
        self.file = str(file)
        self.line = line
        self.reason = reason
        super().__init__(f"{self.file}:{line}: {reason}" if reason else f"{self.file}:{line}")


class DanglingReference(CorpusError):
    def __init__(self, kind, id):
        self.kind = kind
        self.id = id
        super().__init__(f"dangling {kind} reference from {id!r}")


class DuplicateId(CorpusError):
    def __init__(self, kind, id):
        self.kind = kind
        self.id = id
        super().__init__(f"duplicate {kind} id {id!r}")


class TimestampOrderError(CorpusError):
    """A retweet or reply is timestamped before the entity it responds to."""

    def __init__(self, kind, id):
        self.kind = kind
        self.id = id
        super().__init__(f"{kind} {id!r} is earlier than its parent")


@dataclass(frozen=True)
class NewsRecord:
    news_id: str
    label: str
    title: str | None = None


@dataclass(frozen=True)
class TweetRecord:
    tweet_id: str
    news_id: str
    user_id: str
    ts: int


@dataclass(frozen=True)
class RetweetRecord:
    retweet_id: str
    tweet_id: str
    user_id: str
    ts: int


@dataclass(frozen=True)
class ReplyRecord:
    reply_id: str
    news_id: str
    parent_id: str
    user_id: str
    ts: int
    text: str


@dataclass(frozen=True)
class UserRecord:
    user_id: str
    friends: tuple[str, ...] = ()
    bot_score: float | None = None


@dataclass(frozen=True)
class NewsItem:
    """All engagement records of one news piece, each collection sorted by (ts, id)."""

    news: NewsRecord
    tweets: tuple[TweetRecord, ...] = ()
    retweets: tuple[RetweetRecord, ...] = ()
    replies: tuple[ReplyRecord, ...] = ()

    @property
    def news_id(self):
        return self.news.news_id

    @property
    def label(self):
        return self.news.label


@dataclass(frozen=True)
class EngagementCorpus:
    items: Mapping[str, NewsItem]
    users: Mapping[str, UserRecord]

    def __iter__(self):
        return iter(self.items.values())

    def __len__(self):
        return len(self.items)

    def __getitem__(self, news_id):
        return self.items[news_id]

    def counts(self):
        return {
            "news": len(self.items),
            "tweets": sum(len(it.tweets) for it in self),
            "retweets": sum(len(it.retweets) for it in self),
            "replies": sum(len(it.replies) for it in self),
            "users": len(self.users),
        }


@dataclass(frozen=True)
class ItemReport:
    news_id: str
    label: str
    n_tweets: int
    n_retweets: int
    n_replies: int
    n_users: int

    @property
    def excluded(self):
        # no macro network without at least one tweet
        return self.n_tweets == 0


@dataclass
class ValidationReport:
    items: list[ItemReport] = field(default_factory=list)

    @property
    def excluded(self):
        return [r.news_id for r in self.items if r.excluded]

    @property
    def included(self):
        return [r.news_id for r in self.items if not r.excluded]

    def __len__(self):
        return len(self.items)


# -- parsing ---------------------------------------------------------------

def _read_jsonl(path):
    if not path.exists():
        return
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise MalformedLine(path.name, lineno, exc.msg) from None
            if not isinstance(obj, dict):
                raise MalformedLine(path.name, lineno, "expected a JSON object")
            yield lineno, obj


def _str_field(obj, key, fname, lineno):
    if key not in obj:
        raise MalformedLine(fname, lineno, f"missing field {key!r}")
    val = obj[key]
    if isinstance(val, bool) or not isinstance(val, (str, int)):
        raise MalformedLine(fname, lineno, f"field {key!r} must be a string")
    return str(val)


def _ts_field(obj, fname, lineno):
    if "ts" not in obj:
        raise MalformedLine(fname, lineno, "missing field 'ts'")
    val = obj["ts"]
    if isinstance(val, bool) or not isinstance(val, (int, float)) or not math.isfinite(val):
        raise MalformedLine(fname, lineno, "field 'ts' must be a number")
    # sub-second precision is dropped
    return int(math.floor(val))


def _parse_news(obj, lineno):
    news_id = _str_field(obj, "news_id", "news.jsonl", lineno)
    label = obj.get("label")
    if label not in LABELS:
        raise MalformedLine("news.jsonl", lineno, "label must be 'fake' or 'real'")
    title = obj.get("title")
    return NewsRecord(news_id, label, None if title is None else str(title))


def _parse_tweet(obj, lineno):
    f = "tweets.jsonl"
    return TweetRecord(
        _str_field(obj, "tweet_id", f, lineno),
        _str_field(obj, "news_id", f, lineno),
        _str_field(obj, "user_id", f, lineno),
        _ts_field(obj, f, lineno),
    )


def _parse_retweet(obj, lineno):
    f = "retweets.jsonl"
    return RetweetRecord(
        _str_field(obj, "retweet_id", f, lineno),
        _str_field(obj, "tweet_id", f, lineno),
        _str_field(obj, "user_id", f, lineno),
        _ts_field(obj, f, lineno),
    )


def _parse_reply(obj, lineno):
    f = "replies.jsonl"
    if not isinstance(obj.get("text"), str):
        raise MalformedLine(f, lineno, "missing or non-string field 'text'")
    return ReplyRecord(
        _str_field(obj, "reply_id", f, lineno),
        _str_field(obj, "news_id", f, lineno),
        _str_field(obj, "parent_id", f, lineno),
        _str_field(obj, "user_id", f, lineno),
        _ts_field(obj, f, lineno),
        obj["text"],
    )


def _parse_user(obj, lineno):
    f = "users.jsonl"
    user_id = _str_field(obj, "user_id", f, lineno)
    friends = obj.get("friends", [])
    if not isinstance(friends, list) or not all(isinstance(x, str) for x in friends):
        raise MalformedLine(f, lineno, "friends must be a list of strings")
    score = obj.get("bot_score")
    if score is not None:
        if isinstance(score, bool) or not isinstance(score, (int, float)) or not 0.0 <= score <= 1.0:
            raise MalformedLine(f, lineno, "bot_score must be a number in [0, 1]")
        score = float(score)
    return UserRecord(user_id, tuple(friends), score)


def _by_ts(rec_id):
    return lambda r: (r.ts, getattr(r, rec_id))


# -- assembly --------------------------------------------------------------

def build_corpus(news, tweets, retweets, replies, users):
    """Check referential integrity and index records by news item.

    Every tweet, retweet and reply id shares one namespace, since a reply's
    ``parent_id`` may point at any of them.
    """
    news_by_id = {}
    for n in news:
        if n.news_id in news_by_id:
            raise DuplicateId("news", n.news_id)
        news_by_id[n.news_id] = n

    user_by_id = {}
    for u in users:
        if u.user_id in user_by_id:
            raise DuplicateId("user", u.user_id)
        user_by_id[u.user_id] = u

    # id -> (news_id, ts)
    posts = {}

    def claim(kind, pid, news_id, ts):
        if pid in posts:
            raise DuplicateId(kind, pid)
        posts[pid] = (news_id, ts)

    tweets_of = {k: [] for k in news_by_id}
    for t in tweets:
        if t.news_id not in news_by_id:
            raise DanglingReference("tweet-news", t.tweet_id)
        claim("tweet", t.tweet_id, t.news_id, t.ts)
        tweets_of[t.news_id].append(t)

    tweet_by_id = {t.tweet_id: t for t in tweets}
    retweets_of = {k: [] for k in news_by_id}
    for r in retweets:
        root = tweet_by_id.get(r.tweet_id)
        if root is None:
            raise DanglingReference("retweet-tweet", r.retweet_id)
        if r.ts < root.ts:
            raise TimestampOrderError("retweet", r.retweet_id)
        claim("retweet", r.retweet_id, root.news_id, r.ts)
        retweets_of[root.news_id].append(r)

    replies_of = {k: [] for k in news_by_id}
    for p in replies:
        if p.news_id not in news_by_id:
            raise DanglingReference("reply-news", p.reply_id)
        claim("reply", p.reply_id, p.news_id, p.ts)
        replies_of[p.news_id].append(p)

    reply_parent = {p.reply_id: p.parent_id for p in replies}
    for p in replies:
        target = posts.get(p.parent_id)
        if target is None or target[0] != p.news_id:
            raise DanglingReference("reply-parent", p.reply_id)
        if p.ts < target[1]:
            raise TimestampOrderError("reply", p.reply_id)

    # equal timestamps would otherwise allow a reply cycle
    settled = set()
    for p in replies:
        seen = []
        cur = p.reply_id
        while cur in reply_parent and cur not in settled:
            if cur in seen:
                raise DanglingReference("reply-cycle", p.reply_id)
            seen.append(cur)
            cur = reply_parent[cur]
        settled.update(seen)

    items = {}
    for news_id in sorted(news_by_id):
        items[news_id] = NewsItem(
            news_by_id[news_id],
            tuple(sorted(tweets_of[news_id], key=_by_ts("tweet_id"))),
            tuple(sorted(retweets_of[news_id], key=_by_ts("retweet_id"))),
            tuple(sorted(replies_of[news_id], key=_by_ts("reply_id"))),
        )
    return EngagementCorpus(
        MappingProxyType(items),
        MappingProxyType(dict(sorted(user_by_id.items()))),
    )


def load_corpus(data_dir):
    """Load and validate the five JSONL files under ``data_dir``."""
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise CorpusError(f"not a directory: {data_dir}")
    parsers = {
        "news.jsonl": _parse_news,
        "tweets.jsonl": _parse_tweet,
        "retweets.jsonl": _parse_retweet,
        "replies.jsonl": _parse_reply,
        "users.jsonl": _parse_user,
    }
    records = {
        name: [parse(obj, lineno) for lineno, obj in _read_jsonl(data_dir / name)]
        for name, parse in parsers.items()
    }
    corpus = build_corpus(*(records[name] for name in CORPUS_FILES))
    logger.info("loaded corpus from %s: %s", data_dir, corpus.counts())
    return corpus


def validate_corpus(corpus):
    """Per-item counts; items without tweets are marked excluded."""
    report = ValidationReport()
    for item in corpus:
        users = {t.user_id for t in item.tweets}
        users.update(r.user_id for r in item.retweets)
        users.update(p.user_id for p in item.replies)
        report.items.append(ItemReport(
            item.news_id, item.label,
            len(item.tweets), len(item.retweets), len(item.replies), len(users),
        ))
    return report


# -- writing ---------------------------------------------------------------

def _dump(fh, obj):
    fh.write(json.dumps(obj, ensure_ascii=False, separators=(",", ":")))
    fh.write("\n")


def write_corpus(corpus, out_dir):
    """Serialize ``corpus`` back into the five JSONL files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "news.jsonl", "w", encoding="utf-8") as fh:
        for item in corpus:
            row = {"news_id": item.news_id, "label": item.label}
            if item.news.title is not None:
                row["title"] = item.news.title
            _dump(fh, row)
    with open(out_dir / "tweets.jsonl", "w", encoding="utf-8") as fh:
        for item in corpus:
            for t in item.tweets:
                _dump(fh, {"tweet_id": t.tweet_id, "news_id": t.news_id, "user_id": t.user_id, "ts": t.ts})
    with open(out_dir / "retweets.jsonl", "w", encoding="utf-8") as fh:
        for item in corpus:
            for r in item.retweets:
                _dump(fh, {"retweet_id": r.retweet_id, "tweet_id": r.tweet_id, "user_id": r.user_id, "ts": r.ts})
    with open(out_dir / "replies.jsonl", "w", encoding="utf-8") as fh:
        for item in corpus:
            for p in item.replies:
                _dump(fh, {"reply_id": p.reply_id, "news_id": p.news_id, "parent_id": p.parent_id,
                           "user_id": p.user_id, "ts": p.ts, "text": p.text})
    with open(out_dir / "users.jsonl", "w", encoding="utf-8") as fh:
        for u in corpus.users.values():
            row = {"user_id": u.user_id, "friends": list(u.friends)}
            if u.bot_score is not None:
                row["bot_score"] = u.bot_score
            _dump(fh, row)
    return out_dir
