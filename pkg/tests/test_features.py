import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hpnf.features import (
    FEATURE_INDEX, FEATURE_NAMES, ExcludedItem, extract_all, extract_hpnf, extract_macro_structural,
    extract_macro_temporal, extract_micro_linguistic, extract_micro_structural,
    extract_micro_temporal, read_features_csv, to_arrays, write_features_csv,
)
from hpnf.ingestion import (
    NewsRecord, ReplyRecord, RetweetRecord, TweetRecord, UserRecord, build_corpus,
)
from hpnf.network import build_network
from hpnf.sentiment import SentimentScorer
from hpnf.synthgen import corpus_from_items, generate_items, preset_params
from oracle import oracle_features

DESK_MACRO_S = [4, 5, 1, 2, 0, 1, 0.5, 1, 0.2]
DESK_MACRO_T = [30, 90, 0, 100, 90, 30, 100, 50]
DESK_MICRO_S = [3, 3, 1, 2, 1.0]
DESK_MICRO_T = [110 / 3, 20, 150, 30, 60]
DESK_LING = [0.5, -0.1, 0.1, 0.05, 0.6]


def desk_net(corpus):
    return build_network(corpus["N1"], corpus.users)


def test_desk_macro_structural(desk_corpus):
    values, mask = extract_macro_structural(desk_net(desk_corpus), desk_corpus.users, 0.5)
    assert values == DESK_MACRO_S
    assert all(mask)


def test_desk_macro_temporal(desk_corpus):
    values, mask = extract_macro_temporal(desk_net(desk_corpus))
    assert values == DESK_MACRO_T
    assert all(mask)


def test_desk_micro_structural(desk_corpus):
    net = desk_net(desk_corpus)
    values, mask = extract_micro_structural(net.micro, len(net.cascades))
    assert values == DESK_MICRO_S
    assert all(mask)


def test_desk_micro_temporal(desk_corpus):
    net = desk_net(desk_corpus)
    values, mask = extract_micro_temporal(net.micro, net)
    assert values == pytest.approx(DESK_MICRO_T, rel=1e-12)
    assert values[0] == pytest.approx(36.6667, abs=1e-4)
    assert all(mask)


def test_desk_micro_linguistic(desk_corpus, desk_scorer):
    values, mask = extract_micro_linguistic(desk_net(desk_corpus).micro, desk_scorer)
    assert values == pytest.approx(DESK_LING, abs=1e-12)
    assert all(mask)


def test_desk_full_vector(desk_corpus, desk_scorer):
    fv = extract_hpnf(desk_corpus, "N1", desk_scorer, 0.5)
    expected = DESK_MACRO_S + DESK_MACRO_T + DESK_MICRO_S + DESK_MICRO_T + DESK_LING
    assert list(fv.values) == pytest.approx(expected, abs=1e-12)
    assert fv.mask_string == "1" * 32
    assert fv.label == "fake"


def single_item(tweets, retweets=(), replies=(), users=(), news_id="N"):
    return build_corpus([NewsRecord(news_id, "real")], list(tweets), list(retweets), list(replies), list(users))


def test_tweets_only_item():
    corpus = single_item([TweetRecord("t", "N", "u", 0)])
    fv = extract_hpnf(corpus, "N")
    d = fv.as_dict()
    assert (d["S1"], d["S2"], d["S3"], d["S4"], d["S5"], d["S6"], d["S7"]) == (1, 1, 0, 1, 0, 0, 0)
    assert d["S8"] is None and d["S9"] is None
    assert d["T4"] == 0 and d["T7"] == 0
    assert d["S13"] == 0 and d["S14"] == 0
    masked = {"T1", "T2", "T3", "T5", "T6", "T8", "S8", "S9", "S10", "S11", "S12",
              "T9", "T10", "T11", "T12", "T13", "L1", "L2", "L3", "L4", "L5"}
    assert {n for n in FEATURE_NAMES if not fv.defined(n)} == masked
    assert all(fv[n] == 0.0 for n in masked)


@pytest.mark.parametrize("k", [1, 2, 7])
def test_star_cascade(k):
    rts = [RetweetRecord(f"r{i}", "t", f"v{i}", 10 + i) for i in range(k)]
    corpus = single_item([TweetRecord("t", "N", "u", 0)], rts)
    fv = extract_hpnf(corpus, "N")
    assert (fv["S1"], fv["S2"], fv["S3"], fv["S5"], fv["S6"], fv["S7"]) == (2, k + 1, k, 0, 1, 1)


def test_flat_replies():
    tweets = [TweetRecord("t", "N", "u", 0)]
    replies = [ReplyRecord(f"p{i}", "N", "t", "w", 5 + i, "x") for i in range(3)]
    fv = extract_hpnf(single_item(tweets, replies=replies), "N")
    assert (fv["S10"], fv["S11"], fv["S12"], fv["S13"]) == (2, 3, 0, 1)


def test_single_reply_at_root_time():
    tweets = [TweetRecord("t", "N", "u", 50)]
    fv = extract_hpnf(single_item(tweets, replies=[ReplyRecord("p", "N", "t", "w", 50, "x")]), "N")
    assert (fv["T9"], fv["T10"], fv["T11"]) == (0, 0, 0)


def test_single_positive_reply():
    tweets = [TweetRecord("t", "N", "u", 0)]
    replies = [ReplyRecord("p", "N", "t", "w", 1, "x")]
    values, _ = extract_micro_linguistic(build_network(single_item(tweets, replies=replies)["N"], {}).micro,
                                         lambda text: 0.9)
    assert values == pytest.approx([1, 0.9, 0.9, 0.9, 0.9])


def test_all_neutral_replies():
    tweets = [TweetRecord("t", "N", "u", 0)]
    replies = [ReplyRecord(f"p{i}", "N", "t", "w", 1, "x") for i in range(4)]
    net = build_network(single_item(tweets, replies=replies)["N"], {})
    values, mask = extract_micro_linguistic(net.micro, lambda text: 0.03)
    assert values[0] == 0.0 and mask[0]


def test_reply_under_retweet_counts_for_its_cascade():
    tweets = [TweetRecord("a", "N", "u", 0), TweetRecord("b", "N", "v", 1)]
    rts = [RetweetRecord("r", "a", "w", 5)]
    replies = [ReplyRecord("p1", "N", "r", "x", 6, "x"), ReplyRecord("p2", "N", "a", "x", 7, "x")]
    fv = extract_hpnf(single_item(tweets, rts, replies), "N")
    assert fv["S13"] == 1
    assert fv["S14"] == 0.5


def test_bot_mask_and_threshold():
    tweets = [TweetRecord("t", "N", "u", 0)]
    rts = [RetweetRecord("r1", "t", "b1", 5), RetweetRecord("r2", "t", "b2", 6)]
    users = [UserRecord("b1", (), 0.5), UserRecord("b2", (), 0.49)]
    fv = extract_hpnf(single_item(tweets, rts, users=users), "N", bot_threshold=0.5)
    assert fv["S8"] == 1 and fv["S9"] == pytest.approx(1 / 3)
    fv = extract_hpnf(single_item(tweets, rts, users=[UserRecord("b1", ())]), "N")
    assert not fv.defined("S8") and not fv.defined("S9")


def test_excluded_item():
    corpus = build_corpus([NewsRecord("N", "fake")], [], [], [], [])
    with pytest.raises(ExcludedItem):
        extract_hpnf(corpus, "N")
    assert extract_all(corpus) == []


def test_ids_do_not_enter_features(desk_corpus, desk_scorer):
    item = desk_corpus["N1"]
    ren = {k: "x" + k for k in ["A", "B", "R1", "R2", "R3", "P1", "P2", "P3", "N1"]}
    corpus = build_corpus(
        [NewsRecord("xN1", "fake")],
        [TweetRecord(ren[t.tweet_id], "xN1", t.user_id, t.ts) for t in item.tweets],
        [RetweetRecord(ren[r.retweet_id], ren[r.tweet_id], r.user_id, r.ts) for r in item.retweets],
        [ReplyRecord(ren[p.reply_id], "xN1", ren[p.parent_id], p.user_id, p.ts, p.text) for p in item.replies],
        list(desk_corpus.users.values()),
    )
    a = extract_hpnf(desk_corpus, "N1", desk_scorer)
    b = extract_hpnf(corpus, "xN1", desk_scorer)
    assert a.values == b.values and a.mask == b.mask


# -- synthetic items ------------------------------------------------------

@pytest.fixture(scope="module")
def synthetic():
    items = generate_items(preset_params("fake_like", 11), preset_params("real_like", 11), 40, 40,
                           confound=True)
    return items, corpus_from_items(items)


def shifted(items, c):
    out = []
    for it in items:
        out.append((
            [TweetRecord(t.tweet_id, t.news_id, t.user_id, t.ts + c) for t in it.tweets],
            [RetweetRecord(r.retweet_id, r.tweet_id, r.user_id, r.ts + c) for r in it.retweets],
            [ReplyRecord(p.reply_id, p.news_id, p.parent_id, p.user_id, p.ts + c, p.text) for p in it.replies],
        ))
    return out


def test_time_shift_invariance(synthetic):
    items, corpus = synthetic
    base = extract_all(corpus)
    moved = shifted(items, 987654)
    corpus2 = build_corpus([it.news for it in items],
                           [t for m in moved for t in m[0]], [r for m in moved for r in m[1]],
                           [p for m in moved for p in m[2]], [u for it in items for u in it.users])
    for a, b in zip(base, extract_all(corpus2)):
        assert a.values == b.values and a.mask == b.mask


def test_oracle_agreement_small(synthetic):
    items, corpus = synthetic
    scorer = SentimentScorer()
    for fv in extract_all(corpus, scorer):
        item = corpus[fv.news_id]
        expected = oracle_features(item.tweets, item.retweets, item.replies, corpus.users, scorer)
        assert {n for n in FEATURE_NAMES if fv.defined(n)} == set(expected)
        for name, v in expected.items():
            assert math.isclose(fv[name], v, rel_tol=1e-9, abs_tol=1e-12), (fv.news_id, name)


def check_invariants(fv):
    d = dict(zip(FEATURE_NAMES, fv.values))
    for n, v, m in zip(FEATURE_NAMES, fv.values, fv.mask):
        if not m:
            assert v == 0.0
    for n in ("S7", "S9", "S14"):
        assert 0.0 <= d[n] <= 1.0
    for n in FEATURE_NAMES:
        if n.startswith("T"):
            assert d[n] >= 0
    assert d["L1"] >= 0
    for n in ("L2", "L3", "L4", "L5"):
        assert -1.0 <= d[n] <= 1.0
    assert d["S4"] <= d["S2"]
    assert d["S6"] <= d["S4"]
    assert d["S13"] <= d["S4"]
    for n in ("S1", "S2", "S3", "S4", "S5", "S6", "S8", "S10", "S11", "S12", "S13"):
        assert float(d[n]).is_integer()


def test_feature_vector_invariants(synthetic):
    _, corpus = synthetic
    for fv in extract_all(corpus):
        check_invariants(fv)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_monotonicity_adding_retweet_and_reply(seed):
    items = generate_items(preset_params("fake_like", seed), preset_params("real_like", seed), 1, 0)
    it = items[0]
    corpus = corpus_from_items(items)
    before = extract_hpnf(corpus, it.news.news_id)
    last = max([t.ts for t in it.tweets] + [r.ts for r in it.retweets] + [p.ts for p in it.replies])
    extra_rt = RetweetRecord("extra-r", it.tweets[0].tweet_id, "extra-u", last + 1)
    extra_reply = ReplyRecord("extra-p", it.news.news_id, it.tweets[0].tweet_id, "extra-w", last + 1, "ok")
    corpus2 = build_corpus([it.news], it.tweets, it.retweets + [extra_rt], it.replies + [extra_reply], it.users)
    after = extract_hpnf(corpus2, it.news.news_id)
    assert after["S2"] >= before["S2"]
    assert after["S11"] >= before["S11"]
    check_invariants(after)


def test_csv_round_trip(desk_corpus, desk_scorer):
    vectors = extract_all(desk_corpus, desk_scorer)
    buf = io.StringIO()
    write_features_csv(vectors, buf)
    text = buf.getvalue()
    header = text.splitlines()[0].split(",")
    assert header == ["news_id", "label", *FEATURE_NAMES, "mask"]
    assert text.splitlines()[1].startswith("N1,fake,4,5,1,2,0,1,0.5,1,0.2,30,90,0,100,90,30,100,50,3,3,1,2,1,36.6666667,")
    back = read_features_csv(io.StringIO(text))
    assert back[0].mask == vectors[0].mask
    assert back[0].values == pytest.approx(vectors[0].values, rel=1e-8)


def test_to_arrays(desk_corpus):
    X, mask, y = to_arrays(extract_all(desk_corpus))
    assert X.shape == (1, 32) and mask.shape == (1, 32)
    assert y.tolist() == [1]
    assert X[0, FEATURE_INDEX["S1"]] == 4
    assert to_arrays([])[0].shape == (0, 32)


def test_threaded_extraction_matches_serial(synthetic):
    _, corpus = synthetic
    serial = extract_all(corpus, threads=1)
    threaded = extract_all(corpus, threads=4)
    assert [v.news_id for v in threaded] == sorted(v.news_id for v in threaded)
    assert serial == threaded
    assert np.array_equal(to_arrays(serial)[0], to_arrays(threaded)[0])
