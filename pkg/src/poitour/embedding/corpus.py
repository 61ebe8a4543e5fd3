"""Sentence corpus and vocabulary construction.

Trajectories become sentences: the ordered, whitespace-normalized POI names
of each day tour. Trajectories with fewer than two visits contribute no
training pairs and are skipped.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from ..errors import InsufficientDataError, UnknownEntityError
from ..ingest import Poi, Trajectory


@dataclass(frozen=True, slots=True)
class Corpus:
    sentences: tuple[tuple[str, ...], ...]
    n_users: int


@dataclass(frozen=True)
class Vocabulary:
    """Dense token/index maps with corpus frequencies.

    Indices are assigned by descending frequency, ties broken
    lexicographically, so a vocabulary is deterministic given its corpus.
    """

    index_to_token: tuple[str, ...]
    frequencies: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "_token_to_index", {t: i for i, t in enumerate(self.index_to_token)}
        )

    def __len__(self) -> int:
        return len(self.index_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self._token_to_index

    def index(self, token: str) -> int:
        try:
            return self._token_to_index[token]
        except KeyError:
            raise UnknownEntityError(f"token '{token}' not in vocabulary") from None

    def token(self, index: int) -> str:
        return self.index_to_token[index]


def build_corpus(trajectories: Sequence[Trajectory], pois: Mapping[str, Poi]) -> Corpus:
    """One sentence per trajectory with >= 2 visits, tokens in visit order."""
    sentences = []
    users = set()
    for trajectory in trajectories:
        if len(trajectory) < 2:
            continue
        tokens = []
        for poi_id in trajectory.poi_ids:
            poi = pois.get(poi_id)
            if poi is None:
                raise UnknownEntityError(f"trajectory references unknown POI '{poi_id}'")
            tokens.append(poi.token)
        sentences.append(tuple(tokens))
        users.add(trajectory.user_id)
    if not sentences:
        raise InsufficientDataError("no trajectory has two or more visits; corpus is empty")
    return Corpus(sentences=tuple(sentences), n_users=len(users))


def build_vocab(corpus: Corpus, min_count: int = 1) -> Vocabulary:
    """Vocabulary over corpus tokens, dropping those rarer than min_count."""
    counts = Counter(token for sentence in corpus.sentences for token in sentence)
    kept = [(token, count) for token, count in counts.items() if count >= min_count]
    if not kept:
        raise InsufficientDataError(f"vocabulary empty after min_count={min_count} filtering")
    kept.sort(key=lambda item: (-item[1], item[0]))
    return Vocabulary(
        index_to_token=tuple(token for token, _ in kept),
        frequencies=tuple(count for _, count in kept),
    )
