"""Independent brute-force BM25 scorer used as the retrieval oracle.

Deliberately written straight from the scoring formula with plain loops and
no shared code with the indexed implementation under test.
"""

import math
import re

_WORD = re.compile(r"[a-z0-9]+")


def brute_force_scores(docs: dict[int, str], query: str, k1: float = 1.2, b: float = 0.75) -> dict[int, float]:
    """Score every document against the query; returns {doc_id: score}."""
    tokenized = {doc_id: _WORD.findall(text.lower()) for doc_id, text in docs.items()}
    n = len(docs)
    if n == 0:
        return {}
    lengths = {doc_id: len(tokens) for doc_id, tokens in tokenized.items()}
    avg_len = sum(lengths.values()) / n
    query_terms = _WORD.findall(query.lower())
    doc_freq = {
        term: sum(1 for tokens in tokenized.values() if term in tokens)
        for term in set(query_terms)
    }

    scores = {}
    for doc_id, tokens in tokenized.items():
        score = 0.0
        for term in query_terms:
            f = tokens.count(term)
            if f == 0:
                continue
            df = doc_freq[term]
            idf = math.log(1.0 + (n - df + 0.5) / (df + 0.5))
            denom = f + k1 * (1.0 - b + b * lengths[doc_id] / avg_len)
            score += idf * f * (k1 + 1.0) / denom
        scores[doc_id] = score
    return scores


def brute_force_topk(docs: dict[int, str], query: str, k: int) -> list[tuple[int, float]]:
    scores = brute_force_scores(docs, query)
    ranked = sorted(
        ((doc_id, score) for doc_id, score in scores.items() if score > 0.0),
        key=lambda pair: (-pair[1], pair[0]),
    )
    return ranked[:k]
