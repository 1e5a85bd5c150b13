"""Train word embeddings with skip-gram negative sampling.

Class prototypes for zero-shot recognition come from a word space.
Tokens that appear in the same contexts end up with aligned vectors,
so related emotion words become mutual nearest neighbors.
"""

import numpy as np

from emokit.embeddings import CorpusStream, lookup, train_skipgram

text = " ".join(
    [
        "sun joy day sun happy day",
        "cold fear night cold dread night",
    ]
    * 40
)
corpus = CorpusStream.from_text(text, window=1, negatives=3, epochs=20, seed=0)
space, losses = train_skipgram(corpus, dim=16, return_loss=True)

print(f"vocabulary: {space.tokens}")
print(f"loss first epoch {losses[0]:.4f}, last epoch {losses[-1]:.4f}")
assert losses[-1] < losses[0]


def cos(a, b):
    return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))


joy, happy, fear, dread = (lookup(space, w) for w in ("joy", "happy", "fear", "dread"))
print(f"\ncos(joy, happy) = {cos(joy, happy):.3f}   (shared contexts)")
print(f"cos(fear, dread) = {cos(fear, dread):.3f}   (shared contexts)")
print(f"cos(joy, dread) = {cos(joy, dread):.3f}   (different contexts)")

# cosine neighbors of 'joy' in the trained space
sims = space.vectors @ joy / (np.linalg.norm(space.vectors, axis=1) * np.linalg.norm(joy))
order = np.argsort(-sims)
print("\nnearest to 'joy':", [(space.tokens[i], round(float(sims[i]), 3)) for i in order[1:4]])

# unknown words fail with spelling suggestions instead of a silent miss
from emokit.embeddings import OutOfVocabularyError, normalize_label

try:
    lookup(space, "hapy")
except OutOfVocabularyError as exc:
    print(f"lookup('hapy') -> {exc}")

# labels are normalized before lookup: case, hyphens, stray spaces are fine
print("normalize_label(' Joy-Happy ') ->", normalize_label(" Joy-Happy "))
