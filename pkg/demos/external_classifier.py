"""Walkthrough: plugging an external classifier in over the verify/1 protocol.

The evaluation harness talks to any endpoint that speaks JSON lines on
standard streams: a handshake line, then one response per request. This demo
drives a throwaway length-parity "classifier" through the harness, and, if
the transformer-verifier package is installed, trains its pair classifier for
a few steps and evaluates it the same way.
"""

import shutil
import sys
import tempfile
from pathlib import Path

from authverify import (
    ConfusionMatrix,
    SampleCategory,
    generate_pairs,
    generate_synthetic_corpus,
    prf,
    run_external,
)

corpus = generate_synthetic_corpus(n_authors=20, seed=3)
docs = corpus.documents
authors = {d.author_id for d in docs}
quotas = {c: 20 for c in SampleCategory}
dataset = generate_pairs(docs, authors, quotas, seed=5, min_tokens=200)
print(f"evaluation set: {len(dataset)} pairs")

# --- a stub endpoint: any program that speaks the protocol works --------------

STUB = """\
import json, sys
print(json.dumps({"protocol": "verify/1"}), flush=True)
for line in sys.stdin:
    req = json.loads(line)
    label = 1 if len(req["text1"]) == len(req["text2"]) else 0
    print(json.dumps({"sample_id": req["sample_id"], "label": label,
                      "confidence": 0.5}), flush=True)
"""

results = run_external(dataset, [sys.executable, "-c", STUB], timeout=60)
p, r, f1 = prf(ConfusionMatrix.from_results(results))
print(f"stub endpoint:        P={p:.3f} R={r:.3f} F1={f1:.3f} "
      "(texts are equal length here, so it says 'same' to everything)")

# --- the transformer endpoint, if available -----------------------------------

try:
    from transformer_verifier import TrainConfig, fine_tune
    from transformer_verifier.data import Pair
except ImportError:
    print("transformer-verifier not installed; skipping the trained endpoint")
    sys.exit(0)

train_quotas = {c: 60 if c.label else 90 for c in SampleCategory}
train = generate_pairs(docs, authors, train_quotas, seed=6, min_tokens=200)
train_pairs = [Pair(s.sample_id, s.para1, s.para2, s.label) for s in train]

config = TrainConfig(learning_rate=1e-3, epochs=1, max_seq_len=128, seed=0)
artifact = fine_tune(train_pairs, [], config)

model_dir = Path(tempfile.mkdtemp(prefix="tv-demo-"))
artifact.save(model_dir)
endpoint = [sys.executable, "-m", "transformer_verifier.cli", "serve", "--model", str(model_dir)]
results = run_external(dataset, endpoint, timeout=300)
p, r, f1 = prf(ConfusionMatrix.from_results(results))
print(f"transformer endpoint: P={p:.3f} R={r:.3f} F1={f1:.3f} "
      "(one brief epoch; expect rough numbers)")
shutil.rmtree(model_dir, ignore_errors=True)
