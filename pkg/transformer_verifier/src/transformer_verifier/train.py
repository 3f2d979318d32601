"""Fine-tuning loop for the pair classifier."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
import torch.nn as nn

from transformer_verifier.data import CharTokenizer, DataError, Pair
from transformer_verifier.model import Artifact, TrainConfig, build_encoder


def make_batches(pairs: list[Pair], tokenizer: CharTokenizer, config: TrainConfig, order):
    """Yield (tokens, segments, labels) tensors, padded per batch."""
    for start in range(0, len(order), config.batch_size):
        chunk = [pairs[i] for i in order[start:start + config.batch_size]]
        encoded = [tokenizer.encode_pair(p.text1, p.text2, config.max_seq_len) for p in chunk]
        width = max(len(ids) for ids, _ in encoded)
        tokens = torch.zeros((len(chunk), width), dtype=torch.long)
        segments = torch.zeros((len(chunk), width), dtype=torch.long)
        for row, (ids, segs) in enumerate(encoded):
            tokens[row, : len(ids)] = torch.tensor(ids)
            segments[row, : len(segs)] = torch.tensor(segs)
        yield tokens, segments, torch.tensor([p.label for p in chunk])


def evaluate_accuracy(artifact: Artifact, pairs: list[Pair]) -> float:
    artifact.model.eval()
    correct = 0
    with torch.no_grad():
        order = np.arange(len(pairs))
        for tokens, segments, labels in make_batches(pairs, artifact.tokenizer, artifact.config, order):
            correct += int((artifact.model(tokens, segments).argmax(1) == labels).sum())
    return correct / len(pairs)


def fine_tune(train_pairs: list[Pair], dev_pairs: list[Pair], config: TrainConfig) -> Artifact:
    """Train the classifier for ``config.epochs`` epochs and return the artifact.

    ``dev_pairs`` are only used for the accuracy recorded in the artifact's
    metrics; they never influence the weights.
    """
    if not train_pairs:
        raise DataError("empty training dataset")
    torch.manual_seed(config.seed)
    if Path(config.base_model).is_dir():
        base = Artifact.load(config.base_model)
        tokenizer, model = base.tokenizer, base.model
    else:
        tokenizer = CharTokenizer.fit(t for p in train_pairs for t in (p.text1, p.text2))
        model = build_encoder(config, len(tokenizer))
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    loss_fn = nn.CrossEntropyLoss()
    rng = np.random.default_rng(config.seed)
    model.train()
    for _ in range(config.epochs):
        order = rng.permutation(len(train_pairs))
        for tokens, segments, labels in make_batches(train_pairs, tokenizer, config, order):
            optimizer.zero_grad()
            loss = loss_fn(model(tokens, segments), labels)
            loss.backward()
            optimizer.step()
    model.eval()
    artifact = Artifact(model=model, tokenizer=tokenizer, config=config)
    artifact.metrics = {
        "train_samples": len(train_pairs),
        "dev_samples": len(dev_pairs),
        "dev_accuracy": evaluate_accuracy(artifact, dev_pairs) if dev_pairs else None,
    }
    return artifact
