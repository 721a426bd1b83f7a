"""Streaming augmentation server: stitch utterances over HTTP.

Endpoints:
    GET  /healthz      -> "ok"
    GET  /v1/bank      -> {"speakers": [...], "vocab_size": N, "sample_rate_hz": R}
    POST /v1/stitch    -> audio/wav (report in the X-Stitch-Report header)
    POST /v1/cs-stitch -> audio/wav, StitchRequest plus {"p": f, "n": k}
    POST /v1/batch     -> application/x-ndjson, one line per item

The bank is immutable and shared read-only across request threads; all
randomness is derived per request, so the server is stateless and identical
requests always return identical bytes.
"""

from __future__ import annotations

import base64
import json
import logging
import signal
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .audio import wav_bytes
from .bank import SpokenVocabBank
from .codeswitch import CsConfig, CsDictionary, cs_stitch, validate_cs_assets
from .errors import StitchVoxError
from .seeds import derive_seed
from .stitch import SpeakerPolicy, StitchConfig, stitch_sentence

log = logging.getLogger(__name__)

DEFAULT_HOST = "127.0.0.1"
DEFAULT_PORT = 8080
DEFAULT_MAX_BATCH = 256

BANK_ENV = "STITCHVOX_BANK"
ADDR_ENV = "STITCHVOX_ADDR"


class RequestError(Exception):
    """Maps a bad request to an HTTP status code."""

    def __init__(self, status: int, message: str) -> None:
        super().__init__(message)
        self.status = status


def _parse_request(payload: dict) -> tuple[str, SpeakerPolicy, StitchConfig, int]:
    if not isinstance(payload, dict):
        raise RequestError(400, "request body must be a JSON object")
    text = payload.get("text", "")
    if not isinstance(text, str) or not text.strip():
        raise RequestError(400, "empty text")
    speaker = payload.get("speaker")
    policy = SpeakerPolicy.fixed(speaker) if speaker else SpeakerPolicy.uniform()
    rate = payload.get("output_rate_hz")
    if rate is not None and (not isinstance(rate, int) or rate <= 0):
        raise RequestError(400, "output_rate_hz must be a positive integer")
    cfg = StitchConfig(
        distort=bool(payload.get("distort", False)),
        output_rate_hz=rate,
    )
    seed = payload.get("seed")
    if seed is None:
        seed = derive_seed(0, "request", text)  # stateless default per text
    elif not isinstance(seed, int):
        raise RequestError(400, "seed must be an integer")
    return text, policy, cfg, seed


class StitchService:
    """Request handling logic, independent of the HTTP plumbing."""

    def __init__(
        self,
        bank: SpokenVocabBank,
        cs_banks: dict[str, SpokenVocabBank] | None = None,
        cs_dictionary: CsDictionary | None = None,
        max_batch: int = DEFAULT_MAX_BATCH,
    ) -> None:
        self.bank = bank
        self.cs_banks = cs_banks
        self.cs_dictionary = cs_dictionary
        self.max_batch = max_batch
        if cs_banks is not None and cs_dictionary is not None:
            validate_cs_assets(cs_banks, cs_dictionary)

    def bank_info(self) -> dict:
        return {
            "speakers": list(self.bank.speakers),
            "vocab_size": len(self.bank.vocab),
            "sample_rate_hz": self.bank.bank_rate_hz,
        }

    def stitch(self, payload: dict) -> tuple[bytes, dict]:
        text, policy, cfg, seed = _parse_request(payload)
        try:
            buf, report = stitch_sentence(text, self.bank, policy, cfg, seed)
        except StitchVoxError as exc:
            raise RequestError(400, str(exc)) from exc
        return wav_bytes(buf), report.to_dict()

    def cs_stitch(self, payload: dict) -> tuple[bytes, dict]:
        if self.cs_banks is None or self.cs_dictionary is None:
            raise RequestError(400, "code-switching is not configured on this server")
        text, policy, cfg, seed = _parse_request(payload)
        try:
            cs_cfg = CsConfig(p=float(payload.get("p", 0.0)), n=int(payload.get("n", 0)))
            buf, report, cs_report = cs_stitch(
                text, self.cs_banks, self.cs_dictionary, cs_cfg, cfg, policy, seed
            )
        except StitchVoxError as exc:
            raise RequestError(400, str(exc)) from exc
        merged = report.to_dict()
        merged["code_switch"] = cs_report.to_dict()
        return wav_bytes(buf), merged

    def batch(self, payload: dict) -> bytes:
        if not isinstance(payload, dict):
            raise RequestError(400, "request body must be a JSON object")
        items = payload.get("items")
        if not isinstance(items, list):
            raise RequestError(400, "items must be a list of {id, text}")
        if len(items) > self.max_batch:
            raise RequestError(413, f"batch of {len(items)} exceeds limit {self.max_batch}")
        seed = payload.get("seed", 0)
        if not isinstance(seed, int):
            raise RequestError(400, "seed must be an integer")
        lines = []
        for item in items:
            item_id = item.get("id") if isinstance(item, dict) else None
            if item_id is None:
                lines.append(json.dumps({"id": None, "error": "item missing id"}))
                continue
            try:
                wav, report = self.stitch(
                    {"text": item.get("text", ""), "seed": derive_seed(seed, item_id)}
                )
                lines.append(
                    json.dumps(
                        {
                            "id": item_id,
                            "wav_base64": base64.b64encode(wav).decode("ascii"),
                            "n_frames": report["n_samples"],
                            "report": report,
                        },
                        ensure_ascii=False,
                    )
                )
            except RequestError as exc:
                lines.append(json.dumps({"id": item_id, "error": str(exc)}))
        return ("\n".join(lines) + "\n").encode("utf-8")


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    timeout = 2  # idle keep-alive connections release their threads
    service: StitchService  # set by the server factory

    def log_message(self, fmt: str, *args) -> None:  # route to logging, not stderr
        log.debug("%s %s", self.address_string(), fmt % args)

    def _send(self, status: int, body: bytes, content_type: str,
              extra: dict[str, str] | None = None) -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        for key, value in (extra or {}).items():
            self.send_header(key, value)
        self.end_headers()
        self.wfile.write(body)

    def _send_error_json(self, status: int, message: str) -> None:
        self._send(status, json.dumps({"error": message}).encode("utf-8"),
                   "application/json")

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length) if length else b""
        try:
            return json.loads(raw.decode("utf-8") or "{}")
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise RequestError(400, f"invalid JSON body: {exc}") from exc

    def do_GET(self) -> None:
        if self.path == "/healthz":
            self._send(200, b"ok", "text/plain")
        elif self.path == "/v1/bank":
            body = json.dumps(self.service.bank_info()).encode("utf-8")
            self._send(200, body, "application/json")
        else:
            self._send_error_json(404, f"unknown path {self.path}")

    def do_POST(self) -> None:
        try:
            payload = self._read_json()
            if self.path == "/v1/stitch":
                wav, report = self.service.stitch(payload)
                self._send(200, wav, "audio/wav",
                           {"X-Stitch-Report": json.dumps(report)})
            elif self.path == "/v1/cs-stitch":
                wav, report = self.service.cs_stitch(payload)
                self._send(200, wav, "audio/wav",
                           {"X-Stitch-Report": json.dumps(report)})
            elif self.path == "/v1/batch":
                body = self.service.batch(payload)
                self._send(200, body, "application/x-ndjson")
            else:
                self._send_error_json(404, f"unknown path {self.path}")
        except RequestError as exc:
            self._send_error_json(exc.status, str(exc))
        except Exception as exc:  # defensive: never kill the worker thread
            log.exception("unhandled error for %s", self.path)
            self._send_error_json(500, f"internal error: {exc}")


class _Server(ThreadingHTTPServer):
    daemon_threads = False  # finish in-flight requests on shutdown
    block_on_close = True


class StitchServer:
    """Embeddable HTTP server around a StitchService."""

    def __init__(self, service: StitchService, host: str = DEFAULT_HOST,
                 port: int = DEFAULT_PORT) -> None:
        handler = type("BoundHandler", (_Handler,), {"service": service})
        self._httpd = _Server((host, port), handler)
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        return self._httpd.server_address[:2]

    @property
    def base_url(self) -> str:
        host, port = self.address
        return f"http://{host}:{port}"

    def start(self) -> None:
        """Serve in a background thread (for tests and embedding)."""
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)
        self._thread.start()

    def serve_forever(self) -> None:
        self._httpd.serve_forever()

    def shutdown(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=10)
            self._thread = None


def parse_addr(addr: str) -> tuple[str, int]:
    host, _, port = addr.rpartition(":")
    if not host or not port.isdigit():
        raise StitchVoxError(f"bad address {addr!r}, want HOST:PORT")
    return host, int(port)


def serve(
    bank: SpokenVocabBank,
    addr: str = f"{DEFAULT_HOST}:{DEFAULT_PORT}",
    cs_banks: dict[str, SpokenVocabBank] | None = None,
    cs_dictionary: CsDictionary | None = None,
    max_batch: int = DEFAULT_MAX_BATCH,
) -> None:
    """Run the server until SIGINT/SIGTERM; in-flight requests complete."""
    host, port = parse_addr(addr)
    service = StitchService(bank, cs_banks, cs_dictionary, max_batch=max_batch)
    server = StitchServer(service, host, port)

    def _stop(signum, frame) -> None:
        log.info("signal %d: shutting down", signum)
        threading.Thread(target=server.shutdown, daemon=True).start()

    signal.signal(signal.SIGINT, _stop)
    signal.signal(signal.SIGTERM, _stop)
    log.info("serving bank (%d speakers, %d words) on %s",
             len(bank.speakers), len(bank.vocab), server.base_url)
    server.serve_forever()
