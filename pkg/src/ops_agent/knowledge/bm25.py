"""Lexical BM25 ranking over small in-memory corpora.

Tokens are lowercase runs of letters and digits; no stemming, no stop words.
The inverse document frequency uses the non-negative variant
log(1 + (N - df + 0.5) / (df + 0.5)) so scores are always >= 0.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass

_TOKEN_RE = re.compile(r"[a-z0-9]+")

K1 = 1.2
B = 0.75


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class RankedHit:
    ref: int
    score: float


class Bm25Index:
    """Immutable index over {doc_id: text}; rebuild and swap to update."""

    def __init__(self, docs: dict[int, str], k1: float = K1, b: float = B):
        self.k1 = k1
        self.b = b
        self._doc_ids = sorted(docs)
        self._tf = {doc_id: Counter(tokenize(docs[doc_id])) for doc_id in self._doc_ids}
        self._dl = {doc_id: sum(tf.values()) for doc_id, tf in self._tf.items()}
        n = len(self._doc_ids)
        self._avgdl = (sum(self._dl.values()) / n) if n else 0.0
        df = Counter()
        for tf in self._tf.values():
            df.update(tf.keys())
        self._idf = {
            term: math.log(1.0 + (n - count + 0.5) / (count + 0.5))
            for term, count in df.items()
        }
        self._postings: dict[str, list[int]] = {}
        for doc_id, tf in self._tf.items():
            for term in tf:
                self._postings.setdefault(term, []).append(doc_id)

    def __len__(self) -> int:
        return len(self._doc_ids)

    def score(self, query: str, doc_id: int) -> float:
        tf = self._tf[doc_id]
        dl = self._dl[doc_id]
        norm = self.k1 * (1.0 - self.b + self.b * dl / self._avgdl) if self._avgdl else 0.0
        total = 0.0
        for term in tokenize(query):
            f = tf.get(term, 0)
            if f == 0:
                continue
            total += self._idf[term] * f * (self.k1 + 1.0) / (f + norm)
        return total

    def search(self, query: str, k: int) -> list[RankedHit]:
        """Top-k hits with score > 0, ordered by (score desc, id asc)."""
        if k < 1:
            raise ValueError("k must be >= 1")
        candidates: set[int] = set()
        for term in set(tokenize(query)):
            candidates.update(self._postings.get(term, ()))
        hits = [RankedHit(doc_id, self.score(query, doc_id)) for doc_id in candidates]
        hits = [h for h in hits if h.score > 0.0]
        hits.sort(key=lambda h: (-h.score, h.ref))
        return hits[:k]
