"""Shared text normalization.

One pipeline for everything that gets compared: seed-command templates,
gazetteer phrases, and live user input. Keeping these identical is what
makes template matching deterministic.
"""

_TRAILING = ".!?,;: \t\r\n"


def normalize(raw: str) -> list[str]:
    """Lowercase, strip terminal punctuation, split on whitespace."""
    return raw.lower().rstrip(_TRAILING).split()


def normalize_phrase(raw: str) -> str:
    """Normalize a value phrase to its canonical single-spaced form."""
    return " ".join(normalize(raw))
