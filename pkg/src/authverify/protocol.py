"""verify/1 wire protocol for external classifiers.

Requests and responses are JSON objects, one per line:

    request:  {"sample_id": "...", "text1": "...", "text2": "..."}
    response: {"sample_id": "...", "label": 0|1, "confidence": 0.87}

A subprocess endpoint speaks the protocol on its standard streams and must
emit a handshake line {"protocol": "verify/1"} on startup. An HTTP endpoint
accepts the same request body via POST and returns the response body.
Responses may arrive out of order; the harness matches them by sample_id.
"""

from __future__ import annotations

import json
import subprocess
import threading
import urllib.request
from typing import Sequence

from authverify.impostors import VerificationResult
from authverify.pairgen import PairSample

PROTOCOL_NAME = "verify/1"


class ProtocolError(Exception):
    pass


def _parse_response(line: str, pending: dict[str, PairSample]) -> VerificationResult:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed response line: {line!r}") from exc
    sample_id = rec.get("sample_id")
    if sample_id not in pending:
        raise ProtocolError(f"response for unknown or duplicate sample_id {sample_id!r}")
    label = rec.get("label")
    confidence = rec.get("confidence")
    if label not in (0, 1):
        raise ProtocolError(f"sample {sample_id!r}: label must be 0 or 1, got {label!r}")
    if not isinstance(confidence, (int, float)) or not 0.0 <= confidence <= 1.0:
        raise ProtocolError(f"sample {sample_id!r}: confidence outside [0, 1]: {confidence!r}")
    sample = pending.pop(sample_id)
    return VerificationResult(
        sample_id=sample_id, truth=sample.label, label=int(label), confidence=float(confidence)
    )


def _request_line(sample: PairSample) -> str:
    return json.dumps(
        {"sample_id": sample.sample_id, "text1": sample.para1, "text2": sample.para2},
        ensure_ascii=False,
    )


def _run_subprocess(
    dataset: Sequence[PairSample], command: Sequence[str], timeout: float
) -> list[VerificationResult]:
    pending = {s.sample_id: s for s in dataset}
    proc = subprocess.Popen(
        list(command),
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        text=True,
        encoding="utf-8",
        bufsize=1,
    )
    results: list[VerificationResult] = []
    error: list[Exception] = []

    def feed():
        try:
            for sample in dataset:
                proc.stdin.write(_request_line(sample) + "\n")
            proc.stdin.close()
        except BrokenPipeError:
            pass

    def read():
        try:
            handshake = proc.stdout.readline()
            try:
                if json.loads(handshake).get("protocol") != PROTOCOL_NAME:
                    raise ProtocolError(f"bad handshake: {handshake!r}")
            except json.JSONDecodeError:
                raise ProtocolError(f"bad handshake: {handshake!r}") from None
            while pending:
                line = proc.stdout.readline()
                if not line:
                    missing = sorted(pending)
                    raise ProtocolError(
                        f"endpoint exited with {len(missing)} responses missing, "
                        f"first missing sample_id: {missing[0]!r}"
                    )
                results.append(_parse_response(line.strip(), pending))
        except Exception as exc:  # surfaced to the caller after join
            error.append(exc)

    writer = threading.Thread(target=feed, daemon=True)
    reader = threading.Thread(target=read, daemon=True)
    writer.start()
    reader.start()
    reader.join(timeout)
    if reader.is_alive():
        proc.kill()
        raise ProtocolError(f"endpoint timed out after {timeout} s")
    proc.stdin and proc.stdin.close()
    proc.wait(timeout=10)
    if error:
        raise error[0] if isinstance(error[0], ProtocolError) else ProtocolError(str(error[0]))
    return results


def _run_http(
    dataset: Sequence[PairSample], url: str, timeout: float
) -> list[VerificationResult]:
    pending = {s.sample_id: s for s in dataset}
    results = []
    for sample in dataset:
        body = _request_line(sample).encode("utf-8")
        req = urllib.request.Request(
            url, data=body, headers={"Content-Type": "application/json"}, method="POST"
        )
        try:
            with urllib.request.urlopen(req, timeout=timeout) as resp:
                line = resp.read().decode("utf-8")
        except OSError as exc:
            raise ProtocolError(f"HTTP endpoint error for {sample.sample_id!r}: {exc}") from exc
        results.append(_parse_response(line, pending))
    return results


def run_external(
    dataset: Sequence[PairSample],
    endpoint: str | Sequence[str],
    timeout: float = 300.0,
) -> list[VerificationResult]:
    """Send every sample to the endpoint and collect one response per request.

    ``endpoint`` is either an HTTP(S) URL or a command (string or argv list)
    spawned as a subprocess speaking verify/1 on its standard streams.
    The returned results follow dataset order regardless of response order.
    """
    ids = [s.sample_id for s in dataset]
    if len(set(ids)) != len(ids):
        raise ProtocolError("dataset contains duplicate sample_ids")
    if isinstance(endpoint, str) and endpoint.startswith(("http://", "https://")):
        results = _run_http(dataset, endpoint, timeout)
    else:
        command = endpoint.split() if isinstance(endpoint, str) else endpoint
        results = _run_subprocess(dataset, command, timeout)
    by_id = {r.sample_id: r for r in results}
    return [by_id[i] for i in ids]


def write_results(results: Sequence[VerificationResult], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in results:
            rec = {
                "sample_id": r.sample_id,
                "truth": r.truth,
                "label": r.label,
                "score": r.score,
                "confidence": r.confidence,
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def read_results(path) -> list[VerificationResult]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            out.append(
                VerificationResult(
                    sample_id=rec["sample_id"],
                    truth=rec["truth"],
                    label=rec["label"],
                    confidence=rec["confidence"],
                    score=rec.get("score"),
                )
            )
    return out
