"""Stochastic-gradient training of the embedding objectives.

Supported objectives: skip-gram and CBOW with negative sampling, plus the
subword ("fasttext_*") variants where a token's input vector is the mean of
its whole-token vector and its hashed n-gram bucket vectors.

Determinism: with threads=1 the update stream is strictly sequential and a
fixed seed reproduces models bit for bit. With threads>1 sentence shards

are trained hogwild-style over shared arrays; races are permitted and the
result is not deterministic, but the objective is the same.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

from ..errors import TrainingDivergedError
from .corpus import Corpus, Vocabulary, build_vocab
from .gradients import sgns_gradients
from .model import EmbeddingModel, HyperParams
from .subword import ngram_bucket_indices

log = logging.getLogger(__name__)

NOISE_POWER = 0.75


class NegativeSampler:
    """Draws noise token indices from the unigram^0.75 distribution."""

    def __init__(self, frequencies: Sequence[int]):
        weights = np.asarray(frequencies, dtype=np.float64) ** NOISE_POWER
        self._cdf = np.cumsum(weights / weights.sum())
        self._max_index = len(weights) - 1

    def draw(self, rng: np.random.Generator, count: int) -> np.ndarray:
        uniforms = rng.random(count)
        return np.minimum(np.searchsorted(self._cdf, uniforms, side="right"), self._max_index)


def reduced_window(window: int, rng: np.random.Generator | None) -> int:
    """Per-center window size: uniform in [1, window], or the full window
    when no rng is given."""
    if rng is None:
        return window
    return 1 + int(rng.random() * window)


def generate_training_pairs(
    sentence: Sequence[str],
    vocabulary: Vocabulary,
    window: int,
    rng: np.random.Generator | None = None,
) -> list[tuple[int, int]]:
    """(center, context) vocabulary-index pairs for one sentence.

    Out-of-vocabulary tokens are dropped before windowing, so contexts reach
    across them. One rng draw is consumed per surviving position regardless
    of the window size, which makes pair sets nest as the window grows.
    """
    indices = [vocabulary.index(t) for t in sentence if t in vocabulary]
    pairs = []
    for position, center in enumerate(indices):
        b = reduced_window(window, rng)
        lo = max(0, position - b)
        hi = min(len(indices), position + b + 1)
        for other in range(lo, hi):
            if other != position:
                pairs.append((center, indices[other]))
    return pairs


class _Trainer:
    """Owns the parameter tables and the per-sentence update loops."""

    def __init__(self, hp: HyperParams, vocabulary: Vocabulary, rng: np.random.Generator):
        self.hp = hp
        self.vocabulary = vocabulary
        dim = hp.dim
        scale = 0.5 / dim
        size = len(vocabulary)
        self.syn0 = rng.uniform(-scale, scale, (size, dim)).astype(np.float32)
        self.syn1 = np.zeros((size, dim), dtype=np.float32)
        self.sampler = NegativeSampler(vocabulary.frequencies)
        self._label_cache: dict[int, np.ndarray] = {}
        if hp.is_subword:
            self.ngram_vectors = rng.uniform(
                -scale, scale, (hp.bucket_count, dim)
            ).astype(np.float32)
            self.buckets = [
                np.asarray(
                    ngram_bucket_indices(token, hp.ngram_min, hp.ngram_max, hp.bucket_count),
                    dtype=np.intp,
                )
                for token in vocabulary.index_to_token
            ]
        else:
            self.ngram_vectors = None
            self.buckets = None

    def input_vector(self, index: int) -> np.ndarray:
        if self.ngram_vectors is None:
            return self.syn0[index]
        buckets = self.buckets[index]
        return (self.syn0[index] + self.ngram_vectors[buckets].sum(axis=0)) / (1 + len(buckets))

    def apply_input_grad(self, index: int, delta: np.ndarray) -> None:
        """Add ``delta`` to the input representation of a token, splitting it
        across the constituent rows for subword models."""
        if self.ngram_vectors is None:
            self.syn0[index] += delta
            return
        buckets = self.buckets[index]
        share = delta / (1 + len(buckets))
        self.syn0[index] += share
        np.add.at(self.ngram_vectors, buckets, share)

    def _labels_for(self, size: int) -> np.ndarray:
        labels = self._label_cache.get(size)
        if labels is None:
            labels = np.zeros(size, dtype=np.float32)
            labels[0] = 1.0
            self._label_cache[size] = labels
        return labels

    def _targets(self, positive: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        negatives = self.sampler.draw(rng, self.hp.negative_samples)
        negatives = negatives[negatives != positive]
        targets = np.empty(1 + len(negatives), dtype=np.intp)
        targets[0] = positive
        targets[1:] = negatives
        return targets, self._labels_for(len(targets))

    def _apply_output_grads(self, targets: np.ndarray, updates: np.ndarray) -> None:
        # targets may repeat (duplicate negative draws); sequential row adds
        # accumulate exactly like ufunc.at but are much cheaper at this size.
        syn1 = self.syn1
        for row, update in zip(targets, updates):
            syn1[row] += update

    def train_sentence_skipgram(
        self, indices: np.ndarray, alphas: np.ndarray, rng: np.random.Generator
    ) -> tuple[float, int]:
        loss_sum = 0.0
        n_updates = 0
        for position, center in enumerate(indices):
            alpha = alphas[position]
            b = reduced_window(self.hp.window, rng)
            lo = max(0, position - b)
            hi = min(len(indices), position + b + 1)
            for other in range(lo, hi):
                if other == position:
                    continue
                targets, labels = self._targets(indices[other], rng)
                center_vec = self.input_vector(center)
                grad_center, grad_targets, loss = sgns_gradients(
                    center_vec, self.syn1[targets], labels
                )
                self._apply_output_grads(targets, -alpha * grad_targets)
                self.apply_input_grad(center, -alpha * grad_center)
                loss_sum += loss
                n_updates += 1
        return loss_sum, n_updates

    def train_sentence_cbow(
        self, indices: np.ndarray, alphas: np.ndarray, rng: np.random.Generator
    ) -> tuple[float, int]:
        loss_sum = 0.0
        n_updates = 0
        for position, center in enumerate(indices):
            alpha = alphas[position]
            b = reduced_window(self.hp.window, rng)
            lo = max(0, position - b)
            hi = min(len(indices), position + b + 1)
            contexts = [indices[j] for j in range(lo, hi) if j != position]
            if not contexts:
                continue
            targets, labels = self._targets(center, rng)
            context_vecs = np.stack([self.input_vector(j) for j in contexts])
            hidden = context_vecs.mean(axis=0)
            grad_hidden, grad_targets, loss = sgns_gradients(hidden, self.syn1[targets], labels)
            self._apply_output_grads(targets, -alpha * grad_targets)
            context_delta = -alpha * grad_hidden / len(contexts)
            for j in contexts:
                self.apply_input_grad(j, context_delta)
            loss_sum += loss
            n_updates += 1
        return loss_sum, n_updates

    def check_finite(self) -> None:
        if not (np.isfinite(self.syn0).all() and np.isfinite(self.syn1).all()):
            raise TrainingDivergedError(
                "non-finite vector encountered during training; lower the learning rate"
            )


def _index_sentences(corpus: Corpus, vocabulary: Vocabulary) -> list[np.ndarray]:
    sentences = []
    for sentence in corpus.sentences:
        indices = [vocabulary.index(t) for t in sentence if t in vocabulary]
        if len(indices) >= 2:
            sentences.append(np.asarray(indices, dtype=np.intp))
    return sentences


def train(
    corpus: Corpus,
    hyperparams: HyperParams,
    threads: int = 1,
) -> EmbeddingModel:
    """Train an embedding model on a sentence corpus.

    The learning rate decays linearly from its initial value to zero over
    all center positions of the whole run. Input vectors start uniform in
    [-0.5/dim, 0.5/dim], output vectors at zero.
    """
    hp = hyperparams
    vocabulary = build_vocab(corpus, hp.min_count)
    rng = np.random.default_rng(hp.seed)
    trainer = _Trainer(hp, vocabulary, rng)
    sentences = _index_sentences(corpus, vocabulary)

    is_cbow = hp.model_kind.endswith("cbow")
    train_sentence = trainer.train_sentence_cbow if is_cbow else trainer.train_sentence_skipgram

    epoch_losses: list[float] = []
    # A diverging run overflows float32 long before the finite check fires;
    # the raised error is the diagnostic, not the interim warnings.
    with np.errstate(over="ignore", invalid="ignore"):
        if threads <= 1:
            total_positions = hp.epochs * sum(len(s) for s in sentences)
            done = 0
            for _ in range(hp.epochs):
                loss_sum = 0.0
                n_updates = 0
                for indices in sentences:
                    alphas = (
                        hp.learning_rate_initial
                        * (1.0 - (done + np.arange(len(indices))) / total_positions)
                    ).astype(np.float32)
                    done += len(indices)
                    sentence_loss, sentence_updates = train_sentence(indices, alphas, rng)
                    loss_sum += sentence_loss
                    n_updates += sentence_updates
                trainer.check_finite()
                epoch_losses.append(loss_sum / max(n_updates, 1))
        else:
            epoch_losses = _train_hogwild(trainer, sentences, train_sentence, hp, threads)

    model = EmbeddingModel(
        vocabulary=vocabulary,
        input_vectors=trainer.syn0,
        output_vectors=trainer.syn1,
        hyperparams=hp,
        ngram_vectors=trainer.ngram_vectors,
        epoch_losses=epoch_losses,
    )
    if model.ngram_vectors is not None and not np.isfinite(model.ngram_vectors).all():
        raise TrainingDivergedError(
            "non-finite n-gram vector after training; lower the learning rate"
        )
    return model


def _train_hogwild(trainer, sentences, train_sentence, hp: HyperParams, threads: int):
    """Shard sentences across threads; updates race over the shared tables."""
    shards = [sentences[i::threads] for i in range(threads)]
    shards = [s for s in shards if s]
    shard_rngs = [np.random.default_rng(hp.seed + 1 + i) for i in range(len(shards))]
    shard_totals = [hp.epochs * sum(len(s) for s in shard) for shard in shards]
    shard_done = [0] * len(shards)
    epoch_losses = []

    def run_shard(shard_id: int) -> tuple[float, int]:
        loss_sum = 0.0
        n_updates = 0
        rng = shard_rngs[shard_id]
        for indices in shards[shard_id]:
            alphas = (
                hp.learning_rate_initial
                * (1.0 - (shard_done[shard_id] + np.arange(len(indices))) / shard_totals[shard_id])
            ).astype(np.float32)
            shard_done[shard_id] += len(indices)
            sentence_loss, sentence_updates = train_sentence(indices, alphas, rng)
            loss_sum += sentence_loss
            n_updates += sentence_updates
        return loss_sum, n_updates

    with ThreadPoolExecutor(max_workers=len(shards)) as pool:
        for _ in range(hp.epochs):
            results = list(pool.map(run_shard, range(len(shards))))
            trainer.check_finite()
            loss_sum = sum(r[0] for r in results)
            n_updates = sum(r[1] for r in results)
            epoch_losses.append(loss_sum / max(n_updates, 1))
    return epoch_losses
