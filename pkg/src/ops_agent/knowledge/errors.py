"""Errors raised by the knowledge stores."""


class KnowledgeError(Exception):
    pass


class EmptyBody(KnowledgeError):
    pass


class RetrievalEmpty(KnowledgeError):
    pass


class UnreadablePath(KnowledgeError):
    pass
