"""Hierarchical propagation network features for fake news detection.

Pipeline: :mod:`hpnf.ingestion` loads a JSONL engagement corpus,
:mod:`hpnf.network` rebuilds macro retweet trees and micro reply trees,
:mod:`hpnf.features` turns each item into a 32-feature vector,
:mod:`hpnf.stats` compares fake and real populations and
:mod:`hpnf.classify` trains and evaluates detectors. :mod:`hpnf.synthgen`
produces seeded synthetic corpora.
"""

__version__ = "0.1.0"
