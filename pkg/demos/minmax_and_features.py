"""Walkthrough: character-bigram tf-idf vectors and minmax similarity.

Builds a tiny feature model by hand, inspects the vocabulary and weights,
and shows why minmax (Ruzicka) similarity behaves well for sparse,
non-negative stylometric vectors.
"""

import numpy as np

from authverify import FeatureModel, SparseVector, minmax_similarity

# --- a corpus of four short "documents" --------------------------------------

texts = [
    "the cat sat on the mat",
    "the cat ate the fish",
    "a dog ran in the park",
    "a dog dug in the yard",
]

model = FeatureModel.fit(texts, n=2, max_size=50)
print(f"vocabulary: {len(model.vocab)} character bigrams")
print("ten most frequent:", list(model.vocab.index)[:10])

# vectors are L2-normalized tf-idf over the bigram counts
vec = model.transform("the cat sat")
print(f"\n'the cat sat' -> {vec.nnz} active features, norm = "
      f"{float(np.sqrt(np.dot(vec.weights, vec.weights))):.6f}")

# --- minmax similarity on hand-built vectors ----------------------------------

# sum of elementwise minima over sum of elementwise maxima:
# x = (1, 2, 0), y = (2, 1, 1) -> min sum 2, max sum 5 -> 0.4
x = SparseVector(indices=np.array([0, 1], dtype=np.int64), weights=np.array([1.0, 2.0]))
y = SparseVector(indices=np.array([0, 1, 2], dtype=np.int64), weights=np.array([2.0, 1.0, 1.0]))
print(f"\nminmax((1,2,0), (2,1,1)) = {minmax_similarity(x, y)}  (expected 0.4)")

# identical vectors score 1, disjoint supports score 0
print("identity:", minmax_similarity(x, x))
print("disjoint:", minmax_similarity(
    SparseVector(indices=np.array([0], dtype=np.int64), weights=np.array([1.0])),
    SparseVector(indices=np.array([5], dtype=np.int64), weights=np.array([3.0])),
))

# --- similarity reflects shared phrasing --------------------------------------

print("\npairwise minmax over the corpus:")
vectors = [model.transform(t) for t in texts]
for i, a in enumerate(texts):
    row = " ".join(f"{minmax_similarity(vectors[i], vectors[j]):.3f}" for j in range(len(texts)))
    print(f"  {row}   {a!r}")
print("\nnote the cat/cat and dog/dog blocks: shared bigrams drive the score.")
