"""HTTP job client for remote backends, plus the bundled mock server.

Wire protocol (UTF-8 JSON, bitstrings with qubit 0 leftmost):

    POST /jobs   body {"circuits": [...], "shots": n, "seed": s,
                       "idempotency_key": str}
                 -> 201 {"job_id": str}; resubmitting a key returns the
                    existing id with 200.
    GET /jobs/{id}
                 -> 200 {"status": "queued"|"running"|"done"|"failed",
                         "results": [{"counts": {bitstring: int}}]}
                 -> 404 for unknown ids.

The client never submits without an idempotency key, and network-level
retries reuse the key, so a flaky link cannot double-execute a batch.  The
mock server wraps any local backend and is good enough to integration-test
every metric without hardware.
"""
from __future__ import annotations

import json
import threading
import time
import uuid
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import requests

from .backends import Backend, CapabilityError, JobNotFoundError, SubmitTimeout
from .circuits import Circuit
from .serialization import circuit_from_dict, circuit_to_dict
from .simulator import ShotTable


class RemoteBackend(Backend):
    """Client for the job protocol above."""

    def __init__(
        self,
        base_url: str,
        n_qubits: int,
        connectivity: frozenset[tuple[int, int]] | None = None,
        poll_interval_s: float = 0.05,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self._n = n_qubits
        self._connectivity = connectivity
        self.poll_interval_s = poll_interval_s
        self._session = requests.Session()
        self._context: dict[str, tuple[int, int]] = {}  # handle -> (shots, seed)

    @property
    def n_qubits(self) -> int:
        return self._n

    @property
    def connectivity(self) -> frozenset[tuple[int, int]] | None:
        return self._connectivity

    def metadata(self) -> dict:
        return {"kind": "RemoteBackend", "n_qubits": self._n, "url": self.base_url}

    def submit(self, circuits: list[Circuit], shots: int, seed: int) -> str:
        self.check_capabilities(circuits)
        body = {
            "circuits": [circuit_to_dict(c) for c in circuits],
            "shots": int(shots),
            "seed": int(seed),
            "idempotency_key": str(uuid.uuid4()),
        }
        last_err: Exception | None = None
        for _ in range(2):  # retry once, with the same idempotency key
            try:
                resp = self._session.post(f"{self.base_url}/jobs", json=body, timeout=30)
                break
            except requests.ConnectionError as err:
                last_err = err
                time.sleep(0.1)
        else:
            raise ConnectionError(f"submit failed: {last_err}")
        if resp.status_code not in (200, 201):
            raise CapabilityError(f"submit rejected: {resp.status_code} {resp.text}")
        handle = resp.json()["job_id"]
        self._context[handle] = (int(shots), int(seed))
        return handle

    def status(self, handle: str) -> dict:
        resp = self._session.get(f"{self.base_url}/jobs/{handle}", timeout=30)
        if resp.status_code == 404:
            raise JobNotFoundError(handle)
        resp.raise_for_status()
        return resp.json()

    def wait(self, handle: str, timeout_s: float = 60.0) -> None:
        deadline = time.monotonic() + timeout_s
        while True:
            doc = self.status(handle)
            if doc["status"] == "done":
                return
            if doc["status"] == "failed":
                raise RuntimeError(f"job {handle} failed: {doc.get('error', '')}")
            if time.monotonic() >= deadline:
                raise SubmitTimeout(handle)
            time.sleep(self.poll_interval_s)

    def result(self, handle: str) -> list[ShotTable]:
        doc = self.status(handle)
        if doc["status"] != "done":
            raise SubmitTimeout(handle, f"job {handle} is {doc['status']}")
        shots, seed = self._context.get(handle, (0, -1))
        tables = []
        for entry in doc["results"]:
            counts = {k: int(v) for k, v in entry["counts"].items()}
            n = len(next(iter(counts)))
            total = sum(counts.values())
            tables.append(ShotTable(counts=counts, shots=total, seed=seed, n_qubits=n))
        return tables


class MockServer:
    """In-process job server wrapping a local backend.

    Jobs execute synchronously on submission when ``auto_complete`` is on;
    otherwise they stay queued until :meth:`complete_all`, which is how the
    timeout path gets tested.
    """

    def __init__(self, backend: Backend, host: str = "127.0.0.1", auto_complete: bool = True) -> None:
        self.backend = backend
        self.auto_complete = auto_complete
        self._jobs: dict[str, dict] = {}
        self._by_key: dict[str, str] = {}
        self._pending: dict[str, dict] = {}
        self._lock = threading.Lock()

        server = self

        class Handler(BaseHTTPRequestHandler):
            def log_message(self, *args) -> None:
                pass

            def _reply(self, code: int, doc: dict) -> None:
                payload = json.dumps(doc).encode("utf-8")
                self.send_response(code)
                self.send_header("Content-Type", "application/json")
                self.send_header("Content-Length", str(len(payload)))
                self.end_headers()
                self.wfile.write(payload)

            def do_POST(self) -> None:
                if self.path != "/jobs":
                    self._reply(404, {"error": "unknown endpoint"})
                    return
                length = int(self.headers.get("Content-Length", 0))
                try:
                    body = json.loads(self.rfile.read(length))
                    code, doc = server.handle_submit(body)
                except (ValueError, KeyError) as err:
                    code, doc = 400, {"error": str(err)}
                self._reply(code, doc)

            def do_GET(self) -> None:
                if not self.path.startswith("/jobs/"):
                    self._reply(404, {"error": "unknown endpoint"})
                    return
                job_id = self.path[len("/jobs/"):]
                code, doc = server.handle_status(job_id)
                self._reply(code, doc)

        self._httpd = ThreadingHTTPServer((host, 0), Handler)
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    # -- protocol handlers -------------------------------------------------

    def handle_submit(self, body: dict) -> tuple[int, dict]:
        key = body["idempotency_key"]
        with self._lock:
            if key in self._by_key:
                return 200, {"job_id": self._by_key[key]}
            job_id = str(uuid.uuid4())
            self._by_key[key] = job_id
        circuits = [circuit_from_dict(d) for d in body["circuits"]]
        shots, seed = int(body["shots"]), int(body["seed"])
        try:
            self.backend.check_capabilities(circuits)
        except CapabilityError as err:
            with self._lock:
                self._jobs[job_id] = {"status": "failed", "error": str(err), "results": []}
            return 201, {"job_id": job_id}
        if self.auto_complete:
            self._execute(job_id, circuits, shots, seed)
        else:
            with self._lock:
                self._pending[job_id] = {"circuits": circuits, "shots": shots, "seed": seed}
                self._jobs[job_id] = {"status": "queued", "results": []}
        return 201, {"job_id": job_id}

    def handle_status(self, job_id: str) -> tuple[int, dict]:
        with self._lock:
            if job_id not in self._jobs:
                return 404, {"error": f"unknown job {job_id}"}
            return 200, dict(self._jobs[job_id])

    def _execute(self, job_id: str, circuits: list[Circuit], shots: int, seed: int) -> None:
        handle = self.backend.submit(circuits, shots, seed)
        tables = self.backend.result(handle)
        doc = {
            "status": "done",
            "results": [{"counts": dict(t.counts)} for t in tables],
        }
        with self._lock:
            self._jobs[job_id] = doc

    def complete_all(self) -> None:
        with self._lock:
            pending = dict(self._pending)
            self._pending.clear()
        for job_id, spec in pending.items():
            self._execute(job_id, spec["circuits"], spec["shots"], spec["seed"])

    # -- lifecycle -----------------------------------------------------------

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address
        return f"http://{host}:{port}"

    def start(self) -> "MockServer":
        self._thread.start()
        return self

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()

    def __enter__(self) -> "MockServer":
        return self.start()

    def __exit__(self, *exc) -> None:
        self.stop()
