"""The newline-delimited JSON serving loop.

One request object per line: {"id": str, "premise": str, "hypothesis": str}.
One response per request, in request order: {"id": str, "entailment": float}.
A line that cannot be scored produces {"id": ..., "error": ...} — keyed by
line number instead when no usable id can be read — and the stream carries
on. Whitespace-only lines are framing noise and are skipped.

Consecutive parsed requests are forwarded together in batches of at most
batch_size, and every response produced so far is flushed before the loop
blocks for more input, so a lockstep client (send one, read one) can never
deadlock against the internal batching.
"""

from __future__ import annotations

import json
import sys
from typing import BinaryIO

from .model import NliModel

_Request = tuple[str, str, str]  # id, premise, hypothesis


def parse_request(raw: bytes, line_no: int) -> tuple[_Request | None, dict | None]:
    """Decode one line into a request, or into an error record."""
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        return None, {"line": line_no, "error": "line is not valid UTF-8"}
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        return None, {"line": line_no, "error": f"invalid JSON: {exc.msg}"}
    if not isinstance(obj, dict):
        return None, {"line": line_no, "error": "request is not a JSON object"}
    request_id = obj.get("id")
    if not isinstance(request_id, str):
        return None, {"line": line_no, "error": "missing or non-string 'id'"}
    premise = obj.get("premise")
    if not isinstance(premise, str):
        return None, {"id": request_id, "error": "missing or non-string 'premise'"}
    hypothesis = obj.get("hypothesis")
    if not isinstance(hypothesis, str):
        return None, {"id": request_id, "error": "missing or non-string 'hypothesis'"}
    if not hypothesis:
        # An empty hypothesis always means a broken verbalization upstream;
        # an empty premise is merely a degenerate sentence and scores fine.
        return None, {"id": request_id, "error": "empty 'hypothesis'"}
    return (request_id, premise, hypothesis), None


def serve(model: NliModel, stdin: BinaryIO | None = None,
          stdout: BinaryIO | None = None) -> None:
    """Answer requests until EOF on stdin."""
    stdin = sys.stdin.buffer if stdin is None else stdin
    stdout = sys.stdout.buffer if stdout is None else stdout
    read = stdin.read1 if hasattr(stdin, "read1") else stdin.read

    line_no = 0

    def answer(lines: list[bytes]) -> None:
        nonlocal line_no
        responses: list[dict] = []
        pending: list[_Request] = []

        def flush_pending() -> None:
            if not pending:
                return
            scores = model.score_pairs([(p, h) for _, p, h in pending])
            responses.extend(
                {"id": request_id, "entailment": score}
                for (request_id, _, _), score in zip(pending, scores)
            )
            pending.clear()

        for raw in lines:
            line_no += 1
            if not raw.strip():
                continue
            request, error = parse_request(raw, line_no)
            if request is not None:
                pending.append(request)
                if len(pending) >= model.config.batch_size:
                    flush_pending()
            else:
                flush_pending()  # keep responses in request order
                responses.append(error)
        flush_pending()
        for record in responses:
            stdout.write(json.dumps(record, ensure_ascii=False).encode("utf-8") + b"\n")
        stdout.flush()

    buffer = b""
    while True:
        chunk = read(65536)
        if not chunk:
            break
        buffer += chunk
        if b"\n" not in buffer:
            continue
        *lines, buffer = buffer.split(b"\n")
        answer(lines)
    if buffer.strip():
        answer([buffer])  # final request without a trailing newline
