"""Transformer pair classifier for authorship verification.

Consumes pair datasets in the verification toolkit's JSON-lines format and
serves predictions over the verify/1 protocol on standard streams.
"""

from transformer_verifier.data import CharTokenizer, DataError, Pair, load_pairs
from transformer_verifier.model import Artifact, ModelError, PairEncoder, TrainConfig, build_encoder
from transformer_verifier.serve import PROTOCOL_NAME, answer, handle_line, serve
from transformer_verifier.train import evaluate_accuracy, fine_tune

__version__ = "0.1.0"

__all__ = [
    "Artifact",
    "CharTokenizer",
    "DataError",
    "ModelError",
    "Pair",
    "PairEncoder",
    "PROTOCOL_NAME",
    "TrainConfig",
    "answer",
    "build_encoder",
    "evaluate_accuracy",
    "fine_tune",
    "handle_line",
    "load_pairs",
    "serve",
    "__version__",
]
