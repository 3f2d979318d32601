"""Pair classifier: a small bidirectional transformer encoder with a linear
head over the mean-pooled joint representation of "text1 [SEP] text2".

``base_model`` in the training config selects an architecture preset; if it
names a directory containing a previously saved artifact, training warm-starts
from those weights instead of a fresh initialization.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import torch
import torch.nn as nn

from transformer_verifier.data import PAD, CharTokenizer

PRESETS = {
    # name: (d_model, n_heads, n_layers, ffn_dim)
    "char-encoder-tiny": (64, 4, 2, 128),
    "char-encoder-small": (128, 4, 4, 256),
}


class ModelError(Exception):
    pass


@dataclass(frozen=True)
class TrainConfig:
    base_model: str = "char-encoder-tiny"
    learning_rate: float = 3e-6
    batch_size: int = 16
    epochs: int = 1
    max_seq_len: int = 512  # must match the pairgen truncation budget
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1 or self.epochs < 0 or self.max_seq_len < 4:
            raise ModelError(f"invalid training config: {self}")

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)


class PairEncoder(nn.Module):
    def __init__(self, vocab_size: int, max_seq_len: int, d_model: int,
                 n_heads: int, n_layers: int, ffn_dim: int):
        super().__init__()
        self.token_emb = nn.Embedding(vocab_size, d_model, padding_idx=PAD)
        self.position_emb = nn.Embedding(max_seq_len, d_model)
        self.segment_emb = nn.Embedding(2, d_model)
        layer = nn.TransformerEncoderLayer(
            d_model, n_heads, ffn_dim, batch_first=True, dropout=0.0
        )
        self.encoder = nn.TransformerEncoder(layer, n_layers)
        self.head = nn.Linear(d_model, 2)

    def forward(self, tokens: torch.Tensor, segments: torch.Tensor) -> torch.Tensor:
        pad_mask = tokens == PAD
        positions = torch.arange(tokens.shape[1], device=tokens.device)
        h = self.token_emb(tokens) + self.position_emb(positions) + self.segment_emb(segments)
        h = self.encoder(h, src_key_padding_mask=pad_mask)
        # mean pooling over non-pad positions
        h = h.masked_fill(pad_mask.unsqueeze(-1), 0.0).sum(1) / (~pad_mask).sum(1, keepdim=True)
        return self.head(h)


@dataclass
class Artifact:
    model: PairEncoder
    tokenizer: CharTokenizer
    config: TrainConfig
    metrics: dict = field(default_factory=dict)

    def save(self, out_dir: str | Path) -> Path:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        meta = {
            "config": asdict(self.config),
            "tokenizer": self.tokenizer.to_dict(),
            "metrics": self.metrics,
        }
        (out / "config.json").write_text(
            json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8"
        )
        torch.save(self.model.state_dict(), out / "weights.pt")
        return out

    @classmethod
    def load(cls, model_dir: str | Path) -> "Artifact":
        model_dir = Path(model_dir)
        meta_path = model_dir / "config.json"
        if not meta_path.exists():
            raise ModelError(f"not a model artifact (missing config.json): {model_dir}")
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        config = TrainConfig.from_dict(meta["config"])
        tokenizer = CharTokenizer.from_dict(meta["tokenizer"])
        model = build_encoder(config, len(tokenizer))
        model.load_state_dict(torch.load(model_dir / "weights.pt", weights_only=True))
        model.eval()
        return cls(model=model, tokenizer=tokenizer, config=config, metrics=meta.get("metrics", {}))


def build_encoder(config: TrainConfig, vocab_size: int) -> PairEncoder:
    name = config.base_model
    if name in PRESETS:
        preset = name
    elif Path(name).is_dir():
        # warm-start: adopt the checkpoint's preset; caller loads the weights
        prev = json.loads((Path(name) / "config.json").read_text(encoding="utf-8"))
        preset = prev["config"]["base_model"]
        if preset not in PRESETS:
            raise ModelError(f"checkpoint {name} has unknown preset {preset!r}")
    else:
        raise ModelError(
            f"unknown base_model {name!r}: expected one of {sorted(PRESETS)} "
            "or a path to a saved artifact"
        )
    d_model, n_heads, n_layers, ffn_dim = PRESETS[preset]
    return PairEncoder(vocab_size, config.max_seq_len, d_model, n_heads, n_layers, ffn_dim)
