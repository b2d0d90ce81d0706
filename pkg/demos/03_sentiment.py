"""
Scoring reply sentiment
=======================

The bundled scorer sums word valences from a small lexicon, flips words
that follow a negation, nudges words after an intensifier and squashes the
total into (-1, 1).
"""

from hpnf.sentiment import SentimentScorer, default_lexicon, parse_lexicon, tokenize, valence_sum

score = SentimentScorer()
lex = default_lexicon()
print(f"lexicon: {len(lex.valence)} words, {len(lex.boosters)} boosters, {len(lex.negations)} negations")

for text in [
    "good",
    "not good",
    "very good",
    "not a very good story",
    "this is fake and misleading",
    "thanks, great reporting!",
    "",
]:
    print(f"{text!r:32} tokens={tokenize(text)!s:45} sum={valence_sum(text, lex):+.3f} compound={score(text):+.4f}")

# A custom lexicon is plain TSV: "token<TAB>valence", with optional
# #boosters and #negations sections.
tiny = parse_lexicon(["hoax\t-2.5", "#negations", "not"])
print("custom:", SentimentScorer(tiny)("not a hoax"), SentimentScorer(tiny)("a hoax"))
