"""Macro (retweet) and micro (reply) propagation networks for one news item.

Level convention: the synthetic news root is level 0, tweets are level 1 and
retweets are level 2 or deeper. Features measure depth relative to this in
their own ways, see :mod:`hpnf.features`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

NEWS_ROOT, TWEET, RETWEET = "news_root", "tweet", "retweet"


class EmptyItem(ValueError):
    """The news item has no tweets, so no macro network exists."""


class NoMicroNetwork(ValueError):
    """The micro forest is empty."""


@dataclass(eq=False)
class MacroNode:
    node_id: str
    kind: str
    user_id: str | None = None
    ts: int | None = None
    parent: MacroNode | None = field(default=None, repr=False)
    children: list[MacroNode] = field(default_factory=list, repr=False)
    level: int = 0

    def add_child(self, child):
        child.parent = self
        child.level = self.level + 1
        self.children.append(child)

    def walk(self):
        """Pre-order traversal, iterative so deep chains do not hit the recursion limit."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    @property
    def out_degree(self):
        return len(self.children)


@dataclass(eq=False)
class ReplyNode:
    node_id: str
    user_id: str
    ts: int
    text: str
    parent_id: str
    children: list[ReplyNode] = field(default_factory=list, repr=False)


@dataclass(eq=False)
class MicroTree:
    """Conversation under one tweet or retweet.

    ``replies`` lists every reply node in (ts, id) order; ``first_level`` are
    the direct replies to the root post.
    """

    root_id: str
    root_kind: str
    root_ts: int
    cascade_id: str
    first_level: list[ReplyNode] = field(default_factory=list)
    replies: list[ReplyNode] = field(default_factory=list)

    def depth(self):
        """Nodes on the longest root-to-leaf path, the root post counted."""
        best = 1
        stack = [(r, 2) for r in self.first_level]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            stack.extend((c, d + 1) for c in node.children)
        return best

    def edges(self):
        """(parent_ts, child) pairs for every reply edge."""
        ts_of = {self.root_id: self.root_ts}
        ts_of.update((r.node_id, r.ts) for r in self.replies)
        return [(ts_of[r.parent_id], r) for r in self.replies]


@dataclass(eq=False)
class PropagationNetwork:
    news_id: str
    root: MacroNode
    micro: list[MicroTree]

    @property
    def cascades(self):
        return self.root.children

    def macro_nodes(self):
        """Tweet and retweet nodes, news root excluded."""
        return [n for n in self.root.walk() if n.kind != NEWS_ROOT]

    def macro_edges(self):
        return [(n.parent.node_id, n.node_id) for n in self.root.walk() if n.parent is not None]

    def micro_edges(self):
        return [(r.parent_id, r.node_id) for tree in self.micro for r in tree.replies]


def infer_retweet_parent(rt, prior_retweets, friends):
    """Pick the node a retweet was most likely made from.

    The parent is the latest earlier retweet (ties: greatest id) of the same
    cascade whose author the retweeter follows. Retweets at the same second as
    ``rt`` do not count. Without such a friend retweet the parent is the
    cascade's original tweet.
    """
    best = None
    for p in prior_retweets:
        if p.ts >= rt.ts or p.user_id not in friends:
            continue
        if best is None or (p.ts, p.retweet_id) > (best.ts, best.retweet_id):
            best = p
    return rt.tweet_id if best is None else best.retweet_id


def _attach_cascade(tweet_node, retweets, users, nodes):
    """Same rule as :func:`infer_retweet_parent`, indexed by author.

    ``latest`` maps a user to their latest retweet strictly before the
    timestamp group currently being attached.
    """
    latest = {}
    i = 0
    while i < len(retweets):
        j = i
        while j < len(retweets) and retweets[j].ts == retweets[i].ts:
            j += 1
        group = retweets[i:j]
        for rt in group:
            user = users.get(rt.user_id)
            friends = user.friends if user is not None else ()
            best = None
            for f in friends:
                cand = latest.get(f)
                if cand is not None and (best is None or cand > best):
                    best = cand
            parent = tweet_node if best is None else nodes[best[1]]
            node = MacroNode(rt.retweet_id, RETWEET, rt.user_id, rt.ts)
            parent.add_child(node)
            nodes[rt.retweet_id] = node
        for rt in group:
            key = (rt.ts, rt.retweet_id)
            if key > latest.get(rt.user_id, (-float("inf"), "")):
                latest[rt.user_id] = key
        i = j


def build_macro_network(news, tweets, retweets, users):
    """Root -> tweets -> inferred retweet trees.

    ``tweets`` and ``retweets`` must be sorted by (ts, id), as ingestion
    guarantees. ``users`` maps user id to a record with a ``friends`` field.
    """
    if not tweets:
        raise EmptyItem(news.news_id)
    root = MacroNode(news.news_id, NEWS_ROOT)
    nodes = {}
    by_cascade = {}
    for t in tweets:
        node = MacroNode(t.tweet_id, TWEET, t.user_id, t.ts)
        root.add_child(node)
        nodes[t.tweet_id] = node
        by_cascade[t.tweet_id] = []
    for rt in retweets:
        by_cascade[rt.tweet_id].append(rt)
    for t in tweets:
        _attach_cascade(nodes[t.tweet_id], by_cascade[t.tweet_id], users, nodes)
    return root


def build_micro_network(tweets, retweets, replies):
    """One conversation tree per tweet/retweet that received replies.

    Trees are ordered by their root post's (ts, id).
    """
    posts = {t.tweet_id: (TWEET, t.ts, t.tweet_id) for t in tweets}
    posts.update((r.retweet_id, (RETWEET, r.ts, r.tweet_id)) for r in retweets)
    reply_nodes = {p.reply_id: ReplyNode(p.reply_id, p.user_id, p.ts, p.text, p.parent_id) for p in replies}

    trees = {}
    ordered = sorted(replies, key=lambda p: (p.ts, p.reply_id))
    for p in ordered:
        node = reply_nodes[p.reply_id]
        if p.parent_id in reply_nodes:
            reply_nodes[p.parent_id].children.append(node)
        else:
            kind, ts, cascade = posts[p.parent_id]
            tree = trees.get(p.parent_id)
            if tree is None:
                tree = trees[p.parent_id] = MicroTree(p.parent_id, kind, ts, cascade)
            tree.first_level.append(node)

    for tree in trees.values():
        stack = list(tree.first_level)
        while stack:
            node = stack.pop()
            tree.replies.append(node)
            stack.extend(node.children)
        tree.replies.sort(key=lambda r: (r.ts, r.node_id))
    return sorted(trees.values(), key=lambda t: (t.root_ts, t.root_id))


def build_network(item, users):
    """Both network levels for one :class:`~hpnf.ingestion.NewsItem`."""
    root = build_macro_network(item.news, item.tweets, item.retweets, users)
    micro = build_micro_network(item.tweets, item.retweets, item.replies)
    return PropagationNetwork(item.news_id, root, micro)


def subtree_stats(node):
    """(depth in edges below ``node``, node count) of its subtree."""
    depth, size = 0, 0
    stack = [(node, 0)]
    while stack:
        n, d = stack.pop()
        size += 1
        depth = max(depth, d)
        stack.extend((c, d + 1) for c in n.children)
    return depth, size


def deepest_macro_cascade(net):
    """Tweet whose retweet tree is deepest.

    Ties go to the larger tree, then the earlier tweet, then the smaller id.
    """
    cascades = net.cascades if isinstance(net, PropagationNetwork) else net.children
    if not cascades:
        raise EmptyItem("no cascades")

    def key(tweet):
        depth, size = subtree_stats(tweet)
        return (-depth, -size, tweet.ts, tweet.node_id)

    return min(cascades, key=key)


def deepest_micro_cascade(forest):
    """Conversation tree with the longest path, same tie-break chain as the macro level."""
    if not forest:
        raise NoMicroNetwork("no replies")
    return min(forest, key=lambda t: (-t.depth(), -len(t.replies), t.root_ts, t.root_id))
