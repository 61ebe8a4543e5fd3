"""Character n-gram extraction and bucket hashing for subword embeddings.

Tokens are wrapped in ``<`` and ``>`` boundary markers before n-grams are
taken, and the full wrapped token is always part of the n-gram list, so
even tokens shorter than ngram_min have at least one subword.
"""

from __future__ import annotations

BOUNDARY_START = "<"
BOUNDARY_END = ">"

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_U64 = 0xFFFFFFFFFFFFFFFF


def extract_ngrams(token: str, ngram_min: int, ngram_max: int) -> list[str]:
    """All boundary-wrapped substrings with length in [ngram_min, ngram_max],
    in position order, plus the whole wrapped token."""
    if not token:
        raise ValueError("token must be non-empty")
    wrapped = BOUNDARY_START + token + BOUNDARY_END
    ngrams = []
    for start in range(len(wrapped)):
        for size in range(ngram_min, ngram_max + 1):
            end = start + size
            if end > len(wrapped):
                break
            gram = wrapped[start:end]
            if gram != wrapped:
                ngrams.append(gram)
    ngrams.append(wrapped)
    return ngrams


def fnv1a_64(data: bytes) -> int:
    """FNV-1a 64-bit hash; stable across runs and platforms."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _U64
    return h


def hash_ngram(subword: str, bucket_count: int) -> int:
    """Bucket index in [0, bucket_count) for a subword string."""
    if not subword:
        raise ValueError("subword must be non-empty")
    return fnv1a_64(subword.encode("utf-8")) % bucket_count


def ngram_bucket_indices(
    token: str, ngram_min: int, ngram_max: int, bucket_count: int
) -> list[int]:
    """Bucket indices (with multiplicity) for all n-grams of a token."""
    return [
        hash_ngram(gram, bucket_count) for gram in extract_ngrams(token, ngram_min, ngram_max)
    ]
