"""Walkthrough: the Impostors Method on a controllable synthetic corpus.

Generates authors with distinct character-distribution signatures, builds
paragraph pairs in each category, and shows how the verifier's win-proportion
score separates same-author from different-author pairs, including the
degraded cross-era score for "perturbed" authors whose style shifts between
eras.
"""

from collections import defaultdict

import numpy as np

from authverify import (
    FeatureModel,
    ImpostorParams,
    PoolCandidate,
    SampleCategory,
    generate_pairs,
    generate_synthetic_corpus,
    run_testset,
)

corpus = generate_synthetic_corpus(n_authors=20, seed=42)
docs = corpus.documents
authors = {d.author_id for d in docs}
print(f"{len(docs)} documents by {len(authors)} authors; "
      f"{len(corpus.perturbed_authors)} authors change style between eras")

# training pairs supply the impostor pool and the tf-idf statistics;
# test pairs are what we verify
train_quotas = {c: 60 if c.label else 90 for c in SampleCategory}
test_quotas = {
    SampleCategory.SAME_DOC: 20,
    SampleCategory.SAME_AUTH_NEAR: 40,
    SampleCategory.SAME_AUTH_FAR: 40,
    SampleCategory.DIFF_AUTH_NEAR: 40,
    SampleCategory.DIFF_AUTH_FAR: 40,
}
train = generate_pairs(docs, authors, train_quotas, seed=1, min_tokens=200)
test = generate_pairs(docs, authors, test_quotas, seed=2, min_tokens=200)

model = FeatureModel.fit([t for s in train for t in (s.para1, s.para2)], n=2)

seen, pool = set(), []
for s in train:
    for author, doc, text in ((s.author1, s.doc1, s.para1), (s.author2, s.doc2, s.para2)):
        if (doc, text) not in seen:
            seen.add((doc, text))
            pool.append(PoolCandidate(text=text, author_id=author, doc_id=doc))
print(f"impostor pool: {len(pool)} paragraphs")

params = ImpostorParams(iterations=100, feature_fraction=0.9, pool_size=100,
                        impostors_per_iter=10, threshold=0.7)
results = run_testset(test, model, pool, params, seed=7)

by_id = {s.sample_id: s for s in test}
scores = defaultdict(list)
correct = defaultdict(list)
for r in results:
    s = by_id[r.sample_id]
    key = s.category.name
    if s.category is SampleCategory.SAME_AUTH_FAR:
        key += " (perturbed)" if s.author1 in corpus.perturbed_authors else " (stable)"
    scores[key].append(r.score)
    correct[key].append(r.label == r.truth)

print(f"\n{'category':28s} {'n':>4s} {'mean score':>11s} {'accuracy':>9s}")
for key in sorted(scores):
    print(f"{key:28s} {len(scores[key]):4d} {np.mean(scores[key]):11.3f} "
          f"{np.mean(correct[key]):9.3f}")

print("\nsame-author scores cluster near 1, different-author near 0;")
print("perturbed authors' cross-era pairs sit in between: the style shift")
print("makes old and new writing look like different hands.")
