"""POI embedding training and lookup."""

from .corpus import Corpus, Vocabulary, build_corpus, build_vocab
from .gradients import cbow_gradients, sgns_gradients, sigmoid
from .model import (
    MODEL_KINDS,
    EmbeddingModel,
    HyperParams,
    cosine,
    load_model,
    ngram_sidecar_path,
    save_model,
)
from .subword import extract_ngrams, fnv1a_64, hash_ngram, ngram_bucket_indices
from .training import NegativeSampler, generate_training_pairs, reduced_window, train

__all__ = [
    "Corpus",
    "Vocabulary",
    "build_corpus",
    "build_vocab",
    "sigmoid",
    "sgns_gradients",
    "cbow_gradients",
    "MODEL_KINDS",
    "EmbeddingModel",
    "HyperParams",
    "cosine",
    "save_model",
    "load_model",
    "ngram_sidecar_path",
    "extract_ngrams",
    "fnv1a_64",
    "hash_ngram",
    "ngram_bucket_indices",
    "NegativeSampler",
    "generate_training_pairs",
    "reduced_window",
    "train",
]
