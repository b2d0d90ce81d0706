import json

import pytest

from hpnf.ingestion import load_corpus

# Worked example: news N1 with tweets A (u1, t=0) and B (u2, t=100); retweets
# of A by u3 (t=50), u4 (t=80), u5 (t=90); replies P1 -> A, P2 -> P1, P3 -> B.
DESK = {
    "news.jsonl": [{"news_id": "N1", "label": "fake", "title": "desk example"}],
    "tweets.jsonl": [
        {"tweet_id": "A", "news_id": "N1", "user_id": "u1", "ts": 0},
        {"tweet_id": "B", "news_id": "N1", "user_id": "u2", "ts": 100},
    ],
    "retweets.jsonl": [
        {"retweet_id": "R1", "tweet_id": "A", "user_id": "u3", "ts": 50},
        {"retweet_id": "R2", "tweet_id": "A", "user_id": "u4", "ts": 80},
        {"retweet_id": "R3", "tweet_id": "A", "user_id": "u5", "ts": 90},
    ],
    "replies.jsonl": [
        {"reply_id": "P1", "news_id": "N1", "parent_id": "A", "user_id": "u3", "ts": 20,
         "text": "great story, thanks"},
        {"reply_id": "P2", "news_id": "N1", "parent_id": "P1", "user_id": "u1", "ts": 60,
         "text": "no, this is fake"},
        {"reply_id": "P3", "news_id": "N1", "parent_id": "B", "user_id": "u5", "ts": 150,
         "text": "terrible reporting"},
    ],
    "users.jsonl": [
        {"user_id": "u1", "friends": []},
        {"user_id": "u2", "friends": []},
        {"user_id": "u3", "friends": ["u1"]},
        {"user_id": "u4", "friends": ["u3"], "bot_score": 0.9},
        {"user_id": "u5", "friends": ["u3", "u4"]},
    ],
}

# compounds stipulated for the desk replies
DESK_SCORES = {"great story, thanks": 0.6, "no, this is fake": -0.5, "terrible reporting": -0.4}


def write_jsonl_dir(path, files):
    path.mkdir(parents=True, exist_ok=True)
    for name, rows in files.items():
        with open(path / name, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row) + "\n")
    return path


@pytest.fixture
def desk_dir(tmp_path):
    return write_jsonl_dir(tmp_path / "desk", DESK)


@pytest.fixture
def desk_corpus(desk_dir):
    return load_corpus(desk_dir)


@pytest.fixture
def desk_scorer():
    return DESK_SCORES.__getitem__
