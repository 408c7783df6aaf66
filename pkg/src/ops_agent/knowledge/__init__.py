from .bm25 import B, K1, Bm25Index, RankedHit, tokenize
from .corpus import MAX_CHUNK_TOKENS, DocChunk, DocCorpus, chunk_markdown
from .errors import EmptyBody, KnowledgeError, RetrievalEmpty, UnreadablePath
from .logbook import LogbookEntry, LogbookStore
from .rag import ANSWER_PROMPT, answer_from_corpus

__all__ = [
    "ANSWER_PROMPT",
    "B",
    "Bm25Index",
    "DocChunk",
    "DocCorpus",
    "EmptyBody",
    "K1",
    "KnowledgeError",
    "LogbookEntry",
    "LogbookStore",
    "MAX_CHUNK_TOKENS",
    "RankedHit",
    "RetrievalEmpty",
    "UnreadablePath",
    "answer_from_corpus",
    "chunk_markdown",
    "tokenize",
]
