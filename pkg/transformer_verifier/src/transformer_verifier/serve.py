"""verify/1 endpoint: JSON-lines over standard streams.

On startup the server prints the handshake line {"protocol": "verify/1"},
then answers one request per input line:

    request:  {"sample_id": "...", "text1": "...", "text2": "..."}
    response: {"sample_id": "...", "label": 0|1, "confidence": p,
               "probabilities": [p0, p1]}

confidence is the softmax probability of the predicted class, so it lies in
[0.5, 1]. A malformed request line yields an error response and the loop
continues; it never kills the server.
"""

from __future__ import annotations

import json

import torch

from transformer_verifier.model import Artifact

PROTOCOL_NAME = "verify/1"


def answer(artifact: Artifact, sample_id: str, text1: str, text2: str) -> dict:
    ids, segments = artifact.tokenizer.encode_pair(text1, text2, artifact.config.max_seq_len)
    with torch.no_grad():
        logits = artifact.model(
            torch.tensor([ids], dtype=torch.long),
            torch.tensor([segments], dtype=torch.long),
        )[0]
        probs = torch.softmax(logits, dim=0)
    label = int(probs.argmax())
    return {
        "sample_id": sample_id,
        "label": label,
        "confidence": float(probs[label]),
        "probabilities": [float(probs[0]), float(probs[1])],
    }


def handle_line(artifact: Artifact, line: str) -> dict:
    try:
        req = json.loads(line)
    except json.JSONDecodeError as exc:
        return {"error": f"invalid JSON: {exc.msg}"}
    if not isinstance(req, dict):
        return {"error": "request must be a JSON object"}
    missing = [k for k in ("sample_id", "text1", "text2") if k not in req]
    if missing:
        return {"error": f"missing fields: {', '.join(missing)}",
                "sample_id": req.get("sample_id")}
    return answer(artifact, str(req["sample_id"]), str(req["text1"]), str(req["text2"]))


def serve(artifact: Artifact, stdin, stdout) -> None:
    artifact.model.eval()
    stdout.write(json.dumps({"protocol": PROTOCOL_NAME}) + "\n")
    stdout.flush()
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        stdout.write(json.dumps(handle_line(artifact, line), sort_keys=True) + "\n")
        stdout.flush()
