"""Operations assistant for a simulated accelerator control system.

Subpackages:
    controlsim  - deterministic machine simulator with a typed address space
    engine      - serial/parallel experiment procedures executed on the simulated clock
    knowledge   - logbook, document corpora, BM25 retrieval, disjunct-context RAG
    relay       - expert chat relay with scripted responders
    react       - the reasoning/tool-use agent loop and model client contract
    tools       - the multi-expert tool registry, including gated machine writes
    gateway     - session service, HTTP API, and the ops-agent CLI
"""

__version__ = "0.1.0"
