import numpy as np
import pytest

from poitour.embedding import (
    Corpus,
    HyperParams,
    NegativeSampler,
    build_vocab,
    cosine,
    generate_training_pairs,
    train,
)
from poitour.errors import ConfigError, TrainingDivergedError

from planted import cluster_poi_ids


def vocab_from_sentences(*sentences):
    return build_vocab(Corpus(sentences=tuple(tuple(s) for s in sentences), n_users=1))


def random_corpus(rng, n_sentences=200, vocab_size=20, min_len=4, max_len=8):
    tokens = [f"tok_{i:02d}" for i in range(vocab_size)]
    sentences = []
    for _ in range(n_sentences):
        length = int(rng.integers(min_len, max_len + 1))
        sentences.append(tuple(rng.choice(tokens, size=length, replace=False)))
    return Corpus(sentences=tuple(sentences), n_users=n_sentences)


def cluster_corpus(rng, n_clusters=2, per_cluster=10, sentences_per_cluster=100, length=6):
    clusters = cluster_poi_ids(n_clusters, per_cluster)
    sentences = []
    for _ in range(sentences_per_cluster):
        for cluster in clusters:
            sentences.append(tuple(rng.choice(cluster, size=length, replace=False)))
    return clusters, Corpus(sentences=tuple(sentences), n_users=len(sentences))


class TestHyperParams:
    def test_defaults_valid(self):
        hp = HyperParams()
        assert hp.model_kind == "skipgram"
        assert hp.dim == 32

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"dim": 0},
            {"window": -1},
            {"epochs": 0},
            {"learning_rate_initial": 0.0},
            {"negative_samples": 0},
            {"min_count": 0},
            {"model_kind": "glove"},
            {"model_kind": "fasttext_skipgram", "ngram_min": 2},
            {"model_kind": "fasttext_skipgram", "ngram_min": 5, "ngram_max": 4},
            {"model_kind": "fasttext_cbow", "bucket_count": 0},
        ],
    )
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ConfigError):
            HyperParams(**kwargs)

    def test_ngram_range_ignored_for_plain_models(self):
        HyperParams(model_kind="skipgram", ngram_min=1, ngram_max=2)


class TestGenerateTrainingPairs:
    def test_adjacent_pair(self):
        vocab = vocab_from_sentences(["A", "B"])
        a, b = vocab.index("A"), vocab.index("B")
        assert generate_training_pairs(["A", "B"], vocab, window=1) == [(a, b), (b, a)]

    def test_single_token_no_pairs(self):
        vocab = vocab_from_sentences(["A", "B"])
        assert generate_training_pairs(["A"], vocab, window=5) == []

    def test_three_tokens_window_one(self):
        vocab = vocab_from_sentences(["A", "B", "C"])
        a, b, c = (vocab.index(t) for t in "ABC")
        pairs = generate_training_pairs(["A", "B", "C"], vocab, window=1)
        assert pairs == [(a, b), (b, a), (b, c), (c, b)]

    def test_oov_tokens_skipped(self):
        vocab = vocab_from_sentences(["A", "B"])
        a, b = vocab.index("A"), vocab.index("B")
        pairs = generate_training_pairs(["A", "GHOST", "B"], vocab, window=1)
        assert pairs == [(a, b), (b, a)]

    def test_window_nesting_with_shared_stream(self):
        vocab = vocab_from_sentences([f"w{i}" for i in range(12)])
        sentence = [f"w{i}" for i in range(12)]
        for window in (1, 2, 3, 4):
            small = set(
                generate_training_pairs(sentence, vocab, window, np.random.default_rng(99))
            )
            large = set(
                generate_training_pairs(sentence, vocab, window + 1, np.random.default_rng(99))
            )
            assert small <= large

    def test_dynamic_window_bounded(self):
        vocab = vocab_from_sentences([f"w{i}" for i in range(30)])
        sentence = [f"w{i}" for i in range(30)]
        rng = np.random.default_rng(5)
        pairs = generate_training_pairs(sentence, vocab, window=3, rng=rng)
        positions = {vocab.index(t): i for i, t in enumerate(sentence)}
        for center, context in pairs:
            assert 1 <= abs(positions[center] - positions[context]) <= 3


class TestNegativeSampler:
    def test_distribution_matches_power_law(self):
        frequencies = [100, 50, 20, 10, 5, 2, 1, 1]
        sampler = NegativeSampler(frequencies)
        rng = np.random.default_rng(42)
        draws = sampler.draw(rng, 1_000_000)
        counts = np.bincount(draws, minlength=len(frequencies))
        empirical = counts / counts.sum()
        expected = np.asarray(frequencies, dtype=float) ** 0.75
        expected /= expected.sum()
        assert np.max(np.abs(empirical - expected)) < 0.01

    def test_range(self):
        sampler = NegativeSampler([3, 1])
        rng = np.random.default_rng(1)
        draws = sampler.draw(rng, 10_000)
        assert draws.min() >= 0 and draws.max() <= 1


class TestTrain:
    @pytest.mark.parametrize(
        "model_kind", ["skipgram", "cbow", "fasttext_skipgram", "fasttext_cbow"]
    )
    def test_deterministic_same_seed(self, model_kind):
        corpus = random_corpus(np.random.default_rng(8), n_sentences=30)
        hp = HyperParams(model_kind=model_kind, dim=12, epochs=3, seed=77, bucket_count=2000)
        m1 = train(corpus, hp)
        m2 = train(corpus, hp)
        assert np.array_equal(m1.input_vectors, m2.input_vectors)
        assert np.array_equal(m1.output_vectors, m2.output_vectors)
        assert m1.epoch_losses == m2.epoch_losses
        if m1.ngram_vectors is not None:
            assert np.array_equal(m1.ngram_vectors, m2.ngram_vectors)

    def test_different_seed_differs(self):
        corpus = random_corpus(np.random.default_rng(8), n_sentences=30)
        m1 = train(corpus, HyperParams(dim=12, epochs=3, seed=1))
        m2 = train(corpus, HyperParams(dim=12, epochs=3, seed=2))
        assert not np.array_equal(m1.input_vectors, m2.input_vectors)

    @pytest.mark.parametrize(
        "model_kind", ["skipgram", "cbow", "fasttext_skipgram", "fasttext_cbow"]
    )
    def test_loss_decreases(self, model_kind):
        corpus = random_corpus(np.random.default_rng(9), n_sentences=100, vocab_size=15)
        hp = HyperParams(
            model_kind=model_kind,
            dim=16,
            epochs=10,
            learning_rate_initial=0.05,
            bucket_count=2000,
        )
        model = train(corpus, hp)
        assert len(model.epoch_losses) == 10
        assert model.epoch_losses[-1] <= 0.95 * model.epoch_losses[0]

    def test_all_vectors_finite(self):
        corpus = random_corpus(np.random.default_rng(10), n_sentences=50)
        model = train(corpus, HyperParams(dim=16, epochs=3))
        assert np.isfinite(model.input_vectors).all()
        assert np.isfinite(model.output_vectors).all()

    def test_cluster_separation(self):
        clusters, corpus = cluster_corpus(np.random.default_rng(11), sentences_per_cluster=50)
        model = train(corpus, HyperParams(dim=16, epochs=20))
        intra, inter = [], []
        for i, a in enumerate(clusters[0]):
            for b in clusters[0][i + 1:]:
                intra.append(cosine(model.vector(a), model.vector(b)))
            for b in clusters[1]:
                inter.append(cosine(model.vector(a), model.vector(b)))
        assert np.mean(intra) > np.mean(inter)

    def test_divergence_aborts(self):
        corpus = random_corpus(np.random.default_rng(12), n_sentences=30)
        with pytest.raises(TrainingDivergedError):
            train(corpus, HyperParams(dim=8, epochs=5, learning_rate_initial=1e8))

    def test_initialization_ranges(self):
        corpus = random_corpus(np.random.default_rng(13), n_sentences=10)
        hp = HyperParams(dim=10, epochs=1, learning_rate_initial=1e-9)
        model = train(corpus, hp)
        # with a vanishing learning rate the tables stay at initialization
        assert np.all(np.abs(model.input_vectors) <= 0.5 / hp.dim)
        assert np.max(np.abs(model.output_vectors)) < 1e-6

    def test_hogwild_mode_trains(self):
        corpus = random_corpus(np.random.default_rng(14), n_sentences=60, vocab_size=12)
        model = train(corpus, HyperParams(dim=12, epochs=4), threads=3)
        assert np.isfinite(model.input_vectors).all()
        assert model.epoch_losses[-1] < model.epoch_losses[0]

    def test_subword_composition_used_in_training(self):
        # tokens sharing most n-grams end up closer than unrelated ones
        rng = np.random.default_rng(15)
        family = [f"harbor_walk_{i}" for i in range(4)]
        other = ["zoo", "gallery", "aquarium", "tramstop"]
        sentences = []
        for _ in range(60):
            sentences.append(tuple(rng.permutation(family)))
            sentences.append(tuple(rng.permutation(other)))
        corpus = Corpus(sentences=tuple(sentences), n_users=120)
        hp = HyperParams(model_kind="fasttext_skipgram", dim=16, epochs=10, bucket_count=3000)
        model = train(corpus, hp)
        held_out = model.vector("harbor_walk_9")  # unseen, shares n-grams with the family
        sims_family = [cosine(held_out, model.vector(t)) for t in family]
        sims_other = [cosine(held_out, model.vector(t)) for t in other]
        assert np.mean(sims_family) > np.mean(sims_other)
