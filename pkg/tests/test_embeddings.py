import numpy as np
import pytest

from emokit.embeddings import (
    CorpusStream,
    EmbeddingSpace,
    edit_distance,
    lookup,
    normalize_label,
    sgns_step,
    train_skipgram,
)
from emokit.errors import OutOfVocabularyError, ValidationError


def sgns_loss_oracle(w_in, w_out, center, context, negatives):
    """Negative-sampling loss for one (center, context, negatives) triple."""

    def sig(z):
        return 1.0 / (1.0 + np.exp(-z))

    v = w_in[center]
    loss = -np.log(sig(w_out[context] @ v))
    for n in negatives:
        loss += -np.log(sig(-(w_out[n] @ v)))
    return float(loss)


class TestGradient:
    def test_step_gradient_matches_finite_differences(self, rng):
        vocab, dim = 6, 4
        w_in = rng.normal(scale=0.5, size=(vocab, dim))
        w_out = rng.normal(scale=0.5, size=(vocab, dim))
        center, context = 0, 2
        negatives = np.array([3, 5])
        lr = 1e-3
        a_in, a_out = w_in.copy(), w_out.copy()
        loss = sgns_step(a_in, a_out, center, context, negatives, lr)
        # step loss carries a 1e-10 epsilon inside the logs; compare loosely
        assert loss == pytest.approx(sgns_loss_oracle(w_in, w_out, center, context, negatives), abs=1e-7)
        grad_in = (w_in - a_in) / lr
        grad_out = (w_out - a_out) / lr
        eps = 1e-6
        for i in range(vocab):
            for d in range(dim):
                for w, grad in ((w_in, grad_in), (w_out, grad_out)):
                    w[i, d] += eps
                    up = sgns_loss_oracle(w_in, w_out, center, context, negatives)
                    w[i, d] -= 2 * eps
                    dn = sgns_loss_oracle(w_in, w_out, center, context, negatives)
                    w[i, d] += eps
                    assert grad[i, d] == pytest.approx((up - dn) / (2 * eps), abs=1e-4)

    def test_negative_equal_to_context_skipped(self, rng):
        w_in = rng.normal(scale=0.5, size=(4, 3))
        w_out = rng.normal(scale=0.5, size=(4, 3))
        a_in, a_out = w_in.copy(), w_out.copy()
        b_in, b_out = w_in.copy(), w_out.copy()
        sgns_step(a_in, a_out, 0, 1, np.array([1, 2]), 0.01)
        sgns_step(b_in, b_out, 0, 1, np.array([2]), 0.01)
        assert np.allclose(a_in, b_in, atol=1e-15)
        assert np.allclose(a_out, b_out, atol=1e-15)


class TestTraining:
    def _corpus(self):
        # joy/happy share contexts (sun, day); fear/dark share (cold, night),
        # so their input vectors should align after training
        block_a = "sun joy day sun happy day".split()
        block_b = "cold fear night cold dark night".split()
        tokens = (block_a + block_b) * 20
        return CorpusStream(tokens=tuple(tokens), window=1, negatives=3, epochs=15, seed=0)

    def test_loss_decreases(self):
        space, losses = train_skipgram(self._corpus(), dim=8, return_loss=True)
        assert len(losses) == 15
        assert losses[-1] < losses[0]

    def test_related_tokens_closer_than_unrelated(self):
        space = train_skipgram(self._corpus(), dim=8)
        v = space.vector

        def cos(a, b):
            return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))

        assert cos(v("joy"), v("happy")) > cos(v("joy"), v("dark"))

    def test_deterministic(self):
        a = train_skipgram(self._corpus(), dim=6)
        b = train_skipgram(self._corpus(), dim=6)
        assert np.array_equal(a.vectors, b.vectors)

    def test_vocabulary_ordered_by_count_then_first_seen(self):
        c = CorpusStream(tokens=("b", "a", "b", "c", "a", "b"), window=1, epochs=1)
        space = train_skipgram(c, dim=4)
        assert space.tokens == ("b", "a", "c")

    def test_short_window_corpus_warns_and_returns_init(self):
        c = CorpusStream(tokens=("a", "b"), window=3, epochs=2)
        with pytest.warns(UserWarning):
            space = train_skipgram(c, dim=4)
        assert space.tokens == ("a", "b")

    def test_from_text(self):
        c = CorpusStream.from_text("Joy and  Fear\nand joy", window=1)
        assert c.tokens == ("joy", "and", "fear", "and", "joy")


class TestSpace:
    def test_oov_raises_with_suggestions(self, rng):
        space = EmbeddingSpace(("joy", "fear", "anger"), rng.normal(size=(3, 4)))
        with pytest.raises(OutOfVocabularyError) as err:
            space.vector("joyy")
        assert "joy" in err.value.suggestions

    def test_lookup_multiword_mean(self, rng):
        vecs = rng.normal(size=(2, 4))
        space = EmbeddingSpace(("happy", "tears"), vecs)
        got = lookup(space, "Happy-Tears")
        assert np.allclose(got, vecs.mean(axis=0), atol=1e-12)

    def test_normalize_label(self):
        assert normalize_label("  Happy-Tears ") == ("happy", "tears")
        assert normalize_label("JOY") == ("joy",)

    def test_edit_distance(self):
        assert edit_distance("joy", "joy") == 0
        assert edit_distance("joy", "joyy") == 1
        assert edit_distance("kitten", "sitting") == 3

    def test_duplicate_tokens_rejected(self, rng):
        with pytest.raises(ValidationError):
            EmbeddingSpace(("a", "a"), rng.normal(size=(2, 3)))
