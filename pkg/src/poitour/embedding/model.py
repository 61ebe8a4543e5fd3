"""Trained embedding model: hyperparameters, vector lookup, cosine
similarity, and the text persistence format.

Model file: first line ``<vocab_size> <dim>``, then one line per token of
``token v1 ... vdim`` in index order. Subword models additionally write a
sidecar at ``<path>.ngrams`` with header
``<bucket_count> <dim> <ngram_min> <ngram_max>`` followed by one bucket
vector per line. The text format is inference-oriented: output vectors and
token frequencies are not persisted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigError, InputFormatError
from .corpus import Vocabulary
from .subword import ngram_bucket_indices

MODEL_KINDS = ("skipgram", "cbow", "fasttext_skipgram", "fasttext_cbow")

DEFAULT_SEED = 1


@dataclass(frozen=True, slots=True)
class HyperParams:
    """Training configuration; validated at construction."""

    model_kind: str = "skipgram"
    dim: int = 32
    window: int = 3
    epochs: int = 50
    learning_rate_initial: float = 0.025
    negative_samples: int = 5
    min_count: int = 1
    ngram_min: int = 3
    ngram_max: int = 6
    bucket_count: int = 2_000_000
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.model_kind not in MODEL_KINDS:
            raise ConfigError(f"model_kind must be one of {MODEL_KINDS}, got '{self.model_kind}'")
        for name in ("dim", "window", "epochs", "negative_samples", "min_count"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.learning_rate_initial <= 0:
            raise ConfigError(f"learning rate must be positive, got {self.learning_rate_initial}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits")
        if self.is_subword:
            if not 3 <= self.ngram_min <= self.ngram_max:
                raise ConfigError(
                    f"need 3 <= ngram_min <= ngram_max, got [{self.ngram_min}, {self.ngram_max}]"
                )
            if self.bucket_count <= 0:
                raise ConfigError(f"bucket_count must be positive, got {self.bucket_count}")

    @property
    def is_subword(self) -> bool:
        return self.model_kind.startswith("fasttext")


@dataclass
class EmbeddingModel:
    vocabulary: Vocabulary
    input_vectors: np.ndarray
    output_vectors: np.ndarray
    hyperparams: HyperParams
    ngram_vectors: np.ndarray | None = None
    epoch_losses: list[float] = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.input_vectors.shape[1]

    @property
    def is_subword(self) -> bool:
        return self.ngram_vectors is not None

    def _bucket_indices(self, token: str) -> list[int]:
        hp = self.hyperparams
        return ngram_bucket_indices(token, hp.ngram_min, hp.ngram_max, hp.bucket_count)

    def vector(self, token: str) -> np.ndarray:
        """Input vector for a token.

        Subword models compose: in-vocabulary tokens average their whole-token
        vector with their n-gram bucket vectors, unknown tokens average bucket
        vectors alone. Non-subword models raise for unknown tokens.
        """
        if not self.is_subword:
            return self.input_vectors[self.vocabulary.index(token)]
        buckets = self._bucket_indices(token)
        ngram_sum = self.ngram_vectors[buckets].sum(axis=0)
        if token in self.vocabulary:
            whole = self.input_vectors[self.vocabulary.index(token)]
            return (whole + ngram_sum) / (1 + len(buckets))
        return ngram_sum / len(buckets)

    def has_vector(self, token: str) -> bool:
        return self.is_subword or token in self.vocabulary


def cosine(v1: np.ndarray, v2: np.ndarray) -> float:
    """Cosine similarity clamped to [-1, 1]; zero vectors rank neutrally (0)."""
    v1 = np.asarray(v1)
    v2 = np.asarray(v2)
    if v1.shape != v2.shape:
        raise ValueError(f"dimension mismatch: {v1.shape} vs {v2.shape}")
    n1 = float(np.linalg.norm(v1))
    n2 = float(np.linalg.norm(v2))
    if n1 == 0.0 or n2 == 0.0:
        return 0.0
    value = float(np.dot(v1, v2)) / (n1 * n2)
    return max(-1.0, min(1.0, value))


def _format_vector(vector: np.ndarray) -> str:
    return " ".join(f"{x:.9g}" for x in vector)


def save_model(model: EmbeddingModel, path: str | Path) -> None:
    path = Path(path)
    vocab = model.vocabulary
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(vocab)} {model.dim}\n")
        for index, token in enumerate(vocab.index_to_token):
            fh.write(f"{token} {_format_vector(model.input_vectors[index])}\n")
    if model.is_subword:
        hp = model.hyperparams
        with open(ngram_sidecar_path(path), "w", encoding="utf-8") as fh:
            fh.write(f"{hp.bucket_count} {model.dim} {hp.ngram_min} {hp.ngram_max}\n")
            for row in model.ngram_vectors:
                fh.write(_format_vector(row) + "\n")


def ngram_sidecar_path(path: str | Path) -> Path:
    return Path(f"{path}.ngrams")


def _parse_header(line: str, n_fields: int, what: str) -> list[int]:
    parts = line.split()
    try:
        values = [int(p) for p in parts]
    except ValueError:
        values = []
    if len(values) != n_fields or any(v <= 0 for v in values):
        raise InputFormatError(f"bad {what} header: '{line.strip()}'", 1)
    return values


def load_model(path: str | Path) -> EmbeddingModel:
    """Load a text-format model; picks up the n-gram sidecar when present.

    The loaded model is inference-ready: output vectors are zero and token
    frequencies (unknown after persistence) are set to 1.
    """
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        vocab_size, dim = _parse_header(fh.readline(), 2, "model")
        tokens: list[str] = []
        rows = np.empty((vocab_size, dim), dtype=np.float32)
        count = 0
        for line_number, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            if count >= vocab_size:
                raise InputFormatError(f"more than {vocab_size} vector lines", line_number)
            parts = line.rstrip("\n").split(" ")
            if len(parts) != 1 + dim:
                raise InputFormatError(
                    f"expected token plus {dim} floats, got {len(parts)} fields", line_number
                )
            tokens.append(parts[0])
            try:
                rows[count] = [float(p) for p in parts[1:]]
            except ValueError:
                raise InputFormatError("non-numeric vector component", line_number) from None
            count += 1
    if count != vocab_size:
        raise InputFormatError(f"header declares {vocab_size} tokens, file has {count}")

    vocab = Vocabulary(index_to_token=tuple(tokens), frequencies=(1,) * vocab_size)

    sidecar = ngram_sidecar_path(path)
    if not sidecar.exists():
        hyperparams = HyperParams(model_kind="skipgram", dim=dim)
        return EmbeddingModel(vocab, rows, np.zeros_like(rows), hyperparams)

    with open(sidecar, encoding="utf-8") as fh:
        bucket_count, ngram_dim, ngram_min, ngram_max = _parse_header(
            fh.readline(), 4, "n-gram sidecar"
        )
        if ngram_dim != dim:
            raise InputFormatError(f"sidecar dim {ngram_dim} does not match model dim {dim}")
        ngram_vectors = np.empty((bucket_count, dim), dtype=np.float32)
        count = 0
        for line_number, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            if count >= bucket_count:
                raise InputFormatError(f"more than {bucket_count} bucket lines", line_number)
            parts = line.split()
            if len(parts) != dim:
                raise InputFormatError(f"expected {dim} floats", line_number)
            ngram_vectors[count] = [float(p) for p in parts]
            count += 1
    if count != bucket_count:
        raise InputFormatError(f"sidecar declares {bucket_count} buckets, file has {count}")

    hyperparams = HyperParams(
        model_kind="fasttext_skipgram",
        dim=dim,
        ngram_min=ngram_min,
        ngram_max=ngram_max,
        bucket_count=bucket_count,
    )
    return EmbeddingModel(vocab, rows, np.zeros_like(rows), hyperparams, ngram_vectors)
