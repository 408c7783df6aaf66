"""Token accounting against the model context budget.

No tokenizer is pinned by the model contract, so sizes are estimated as
ceil(chars / 4) and the budget is enforced conservatively (see session).
"""

import math


def estimate_tokens(text: str) -> int:
    return math.ceil(len(text) / 4)


def cap_text(text: str, cap_chars: int, marker: str = " [truncated]") -> str:
    """Truncate to at most cap_chars, appending the marker when cut."""
    if len(text) <= cap_chars:
        return text
    keep = max(cap_chars - len(marker), 0)
    return (text[:keep] + marker)[:cap_chars]
