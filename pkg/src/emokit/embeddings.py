"""Word-vector space: toy skip-gram trainer plus label lookup.

The trainer exists so the pipeline is self-contained at desk scale; real
runs load pretrained vectors through dataio's text loader. Training is
single-threaded and fully seeded: the same corpus and seed give
bit-identical embeddings.
"""

import re
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, OutOfVocabularyError, ValidationError


@dataclass(frozen=True)
class EmbeddingSpace:
    """Ordered vocabulary with one dense row vector per token."""

    tokens: tuple
    vectors: np.ndarray

    def __post_init__(self):
        if len(self.tokens) != self.vectors.shape[0]:
            raise ValidationError(f"{len(self.tokens)} tokens but {self.vectors.shape[0]} vector rows")
        if len(set(self.tokens)) != len(self.tokens):
            raise ValidationError("embedding tokens must be unique")
        if self.vectors.ndim != 2 or self.vectors.shape[1] < 2:
            raise ValidationError("embedding dim must be >= 2")
        if not np.all(np.isfinite(self.vectors)):
            raise ValidationError("embedding vectors must be finite")
        object.__setattr__(self, "_index", {t: k for k, t in enumerate(self.tokens)})

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    def has(self, token: str) -> bool:
        return token in self._index

    def index(self, token: str) -> int:
        if token not in self._index:
            raise OutOfVocabularyError(token, nearest_tokens(token, self.tokens))
        return self._index[token]

    def vector(self, token: str) -> np.ndarray:
        return self.vectors[self.index(token)].copy()


@dataclass(frozen=True)
class CorpusStream:
    """Token sequence plus the skip-gram hyperparameters that consume it."""

    tokens: tuple
    window: int = 5
    negatives: int = 5
    epochs: int = 5
    learning_rate: float = 0.025
    seed: int = 0

    def __post_init__(self):
        if len(self.tokens) == 0:
            raise ValidationError("corpus is empty")
        if self.window < 1 or self.negatives < 0 or self.epochs < 1:
            raise ValidationError("window >= 1, negatives >= 0, epochs >= 1 required")
        if self.learning_rate <= 0:
            raise ValidationError("learning rate must be positive")

    @classmethod
    def from_text(cls, text: str, **kwargs) -> "CorpusStream":
        # lowercase to match normalize_label so corpus and labels agree
        return cls(tokens=tuple(text.lower().split()), **kwargs)


def _vocabulary(tokens):
    """Tokens ordered by descending count, first occurrence breaking ties."""
    counts = {}
    first = {}
    for pos, tok in enumerate(tokens):
        counts[tok] = counts.get(tok, 0) + 1
        if tok not in first:
            first[tok] = pos
    vocab = sorted(counts, key=lambda t: (-counts[t], first[t]))
    return vocab, np.array([counts[t] for t in vocab], dtype=np.float64)


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -60.0, 60.0)))


def sgns_step(w_in, w_out, center: int, context: int, negative_idx, lr: float) -> float:
    """One negative-sampling update in place; returns the pair loss.

    Touches exactly one input row (center) and 1 + len(negatives) output
    rows. Negatives equal to the true context are skipped, not resampled.
    """
    v = w_in[center]
    targets = [context] + [int(n) for n in negative_idx if int(n) != context]
    signs = np.array([1.0] + [0.0] * (len(targets) - 1))
    rows = w_out[targets]
    scores = _sigmoid(rows @ v)
    err = scores - signs
    grad_v = err @ rows
    if not (np.all(np.isfinite(grad_v)) and np.all(np.isfinite(err))):
        raise NumericalError("skip-gram produced a non-finite gradient; lower the learning rate")
    w_out[targets] -= lr * err[:, None] * v[None, :]
    w_in[center] -= lr * grad_v
    eps = 1e-10
    loss = -np.log(scores[0] + eps) - np.log(1.0 - scores[1:] + eps).sum()
    return float(loss)


def train_skipgram(corpus: CorpusStream, dim: int = 500, return_loss: bool = False):
    """Train skip-gram with negative sampling on a small corpus.

    The full softmax objective is approximated by negative sampling from
    the unigram^0.75 distribution. Only positions with a complete window
    on both sides generate pairs, so corpora shorter than 2c+1 tokens
    train nothing (a warning is emitted).
    """
    if dim < 2:
        raise ValidationError("embedding dim must be >= 2")
    vocab, counts = _vocabulary(corpus.tokens)
    if len(vocab) < 2:
        raise ValidationError("vocabulary must contain at least 2 distinct tokens")
    index = {t: k for k, t in enumerate(vocab)}
    seq = np.array([index[t] for t in corpus.tokens], dtype=np.int64)

    rng = np.random.default_rng(corpus.seed)
    w_in = (rng.random((len(vocab), dim)) - 0.5) / dim
    w_out = np.zeros((len(vocab), dim))

    weights = counts ** 0.75
    cum = np.cumsum(weights / weights.sum())

    c = corpus.window
    positions = range(c, len(seq) - c)
    n_pairs_per_epoch = max(0, len(seq) - 2 * c) * 2 * c
    if n_pairs_per_epoch == 0:
        warnings.warn(f"corpus has {len(seq)} tokens, fewer than 2*window+1={2 * c + 1}; nothing to train")
        space = EmbeddingSpace(tokens=tuple(vocab), vectors=w_in)
        return (space, []) if return_loss else space

    total_steps = corpus.epochs * n_pairs_per_epoch
    step = 0
    epoch_losses = []
    for _ in range(corpus.epochs):
        loss_sum = 0.0
        for t in positions:
            center = int(seq[t])
            for off in range(-c, c + 1):
                if off == 0:
                    continue
                context = int(seq[t + off])
                lr = corpus.learning_rate * max(1.0 - step / total_steps, 1e-4)
                negs = np.searchsorted(cum, rng.random(corpus.negatives))
                loss_sum += sgns_step(w_in, w_out, center, context, negs, lr)
                step += 1
        epoch_losses.append(loss_sum / n_pairs_per_epoch)

    space = EmbeddingSpace(tokens=tuple(vocab), vectors=w_in)
    return (space, epoch_losses) if return_loss else space


def normalize_label(label: str):
    """Lowercase, trim, split on whitespace and hyphens."""
    parts = tuple(p for p in re.split(r"[\s\-]+", str(label).strip().lower()) if p)
    if not parts:
        raise ValidationError(f"label {label!r} contains no tokens")
    return parts


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance, small-string DP."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def nearest_tokens(token: str, vocabulary, n: int = 3):
    """The n vocabulary tokens closest by edit distance (ties: vocab order)."""
    scored = sorted(enumerate(vocabulary), key=lambda kv: (edit_distance(token, kv[1]), kv[0]))
    return tuple(t for _, t in scored[:n])


def lookup(space: EmbeddingSpace, emotion_label: str) -> np.ndarray:
    """Resolve a class name to a vector; multi-word labels average."""
    parts = normalize_label(emotion_label)
    rows = [space.vector(p) for p in parts]
    return np.mean(rows, axis=0)
