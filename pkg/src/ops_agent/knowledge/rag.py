"""Disjunct-context retrieval answers.

Each call builds a fresh, isolated prompt from the top-k hits and the
question; only the condensed answer ever reaches the caller, so the agent's
own context never sees the raw retrieval results.
"""

from __future__ import annotations

from ..react.model import ModelClient, ModelUnavailable, complete
from ..react.tokens import cap_text
from .corpus import DocCorpus
from .errors import RetrievalEmpty

ANSWER_PROMPT = """You are the {corpus_name} retrieval expert for an accelerator operations assistant.
Answer the question using only the context below, concisely, in at most three sentences.

Context:
{context}

Question: {question}
Answer:"""


def answer_from_corpus(
    question: str,
    corpus: DocCorpus,
    model: ModelClient,
    k: int = 4,
    cap_chars: int = 2000,
) -> str:
    hits = corpus.search(question, k=k)
    if not hits:
        raise RetrievalEmpty(f"nothing in the {corpus.name} corpus matches {question!r}")
    if model is None:
        raise ModelUnavailable("no model configured for retrieval answers")
    blocks = []
    for i, hit in enumerate(hits, start=1):
        chunk = corpus.chunk(hit.ref)
        title = chunk.heading or chunk.source_path
        blocks.append(f"[{i}] {title}\n{chunk.body}")
    prompt = ANSWER_PROMPT.format(
        corpus_name=corpus.name,
        context="\n\n".join(blocks),
        question=question,
    )
    try:
        answer = complete(model, prompt, stop_sequences=[])
    except ModelUnavailable:
        raise
    except ConnectionError as exc:
        raise ModelUnavailable(str(exc)) from exc
    return cap_text(answer.strip(), cap_chars)
