"""Client for external scorer endpoints speaking newline-delimited JSON.

One request object per line: {"id", "premise", "hypothesis"}; one response
per line: {"id", "entailment"} with the same id, in request order. A
response {"id"/"line", "error"} reports a per-request failure. Transport
is a spawned subprocess (stdio) or a TCP socket; either way UTF-8.

Requests are written in lockstep (send one, read one), which cannot
deadlock on pipe buffers regardless of batch size.
"""

from __future__ import annotations

import json
import select
import socket
import subprocess
from typing import Sequence

from ..errors import IdMismatch, ProtocolError, ScorerTimeout
from ..verbalizer import NliQuery

DEFAULT_TIMEOUT = 30.0


class _PipeTransport:
    def __init__(self, cmd: Sequence[str]):
        self.proc = subprocess.Popen(
            list(cmd),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=False,
        )
        self._buf = b""

    def send_line(self, line: str) -> None:
        assert self.proc.stdin is not None
        try:
            self.proc.stdin.write(line.encode("utf-8") + b"\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProtocolError(f"scorer process closed its stdin: {exc}") from exc

    def recv_line(self, timeout: float) -> str:
        assert self.proc.stdout is not None
        fd = self.proc.stdout.fileno()
        while b"\n" not in self._buf:
            ready, _, _ = select.select([fd], [], [], timeout)
            if not ready:
                raise ScorerTimeout(f"no response from scorer process within {timeout}s")
            chunk = self.proc.stdout.read1(65536)
            if not chunk:
                raise ProtocolError("scorer process closed its stdout mid-stream")
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line.decode("utf-8")

    def close(self) -> None:
        if self.proc.stdin is not None:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()
            self.proc.wait()


class _SocketTransport:
    def __init__(self, host: str, port: int, timeout: float):
        self.sock = socket.create_connection((host, port), timeout=timeout)
        self._buf = b""

    def send_line(self, line: str) -> None:
        try:
            self.sock.sendall(line.encode("utf-8") + b"\n")
        except OSError as exc:
            raise ProtocolError(f"scorer socket send failed: {exc}") from exc

    def recv_line(self, timeout: float) -> str:
        self.sock.settimeout(timeout)
        while b"\n" not in self._buf:
            try:
                chunk = self.sock.recv(65536)
            except socket.timeout as exc:
                raise ScorerTimeout(f"no response from scorer socket within {timeout}s") from exc
            if not chunk:
                raise ProtocolError("scorer socket closed mid-stream")
            self._buf += chunk
        line, self._buf = self._buf.split(b"\n", 1)
        return line.decode("utf-8")

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass


class ExternalScorer:
    """Scorer over a protocol endpoint; construct via from_command or from_address."""

    def __init__(self, transport, timeout: float = DEFAULT_TIMEOUT):
        self._transport = transport
        self.timeout = timeout

    @classmethod
    def from_command(cls, cmd: Sequence[str], timeout: float = DEFAULT_TIMEOUT) -> "ExternalScorer":
        return cls(_PipeTransport(cmd), timeout)

    @classmethod
    def from_address(cls, host: str, port: int, timeout: float = DEFAULT_TIMEOUT) -> "ExternalScorer":
        return cls(_SocketTransport(host, port, timeout), timeout)

    def score_batch(self, queries: Sequence[NliQuery]) -> list[tuple[str, float]]:
        out: list[tuple[str, float]] = []
        for q in queries:
            request = json.dumps(
                {"id": q.query_id, "premise": q.premise, "hypothesis": q.hypothesis},
                ensure_ascii=False,
            )
            self._transport.send_line(request)
            line = self._transport.recv_line(self.timeout)
            try:
                resp = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ProtocolError(f"scorer sent invalid JSON: {line!r}") from exc
            if not isinstance(resp, dict):
                raise ProtocolError(f"scorer sent a non-object response: {line!r}")
            if "error" in resp:
                raise ProtocolError(f"scorer reported an error for {resp.get('id', resp.get('line'))!r}: {resp['error']}")
            if resp.get("id") != q.query_id:
                raise IdMismatch(f"scorer answered id {resp.get('id')!r} for request {q.query_id!r}")
            if "entailment" not in resp or not isinstance(resp["entailment"], (int, float)):
                raise ProtocolError(f"scorer response lacks a numeric 'entailment': {line!r}")
            out.append((q.query_id, float(resp["entailment"])))
        return out

    def close(self) -> None:
        self._transport.close()

    def __enter__(self) -> "ExternalScorer":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
