"""JSON-over-HTTP front end for `DecisionService` (stdlib only).

Routes::

    POST /assets        RulUpdate JSON   -> 200 {"version": k} | 400 validation details
    GET  /assets                         -> 200 [AssetRecord, ...]
    POST /plans         options JSON     -> 200 PlanReport | 400 | 409 empty registry
    GET  /plans/{id}                     -> 200 PlanReport | 404
"""

from __future__ import annotations

import json
import logging
import threading
from http import HTTPStatus
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .model import ValidationError
from .service import DecisionService, EmptyRegistryError, NotFoundError, StorageError

log = logging.getLogger(__name__)


class _Handler(BaseHTTPRequestHandler):
    service: DecisionService  # set on the subclass built by make_server

    def log_message(self, fmt, *args):
        log.info("%s - " + fmt, self.address_string(), *args)

    def _send(self, status: int, payload) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _body(self):
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        return json.loads(raw.decode("utf-8")) if raw.strip() else {}

    def do_GET(self):
        path = self.path.rstrip("/")
        if path == "/assets":
            self._send(HTTPStatus.OK, [a.to_dict() for a in self.service.list_assets()])
        elif path.startswith("/plans/"):
            try:
                plan = self.service.get_plan(path[len("/plans/"):])
            except NotFoundError:
                self._send(HTTPStatus.NOT_FOUND, {"error": "plan not found"})
                return
            self._send(HTTPStatus.OK, plan.to_dict())
        else:
            self._send(HTTPStatus.NOT_FOUND, {"error": "no such route"})

    def do_POST(self):
        path = self.path.rstrip("/")
        if path not in ("/assets", "/plans"):
            self._send(HTTPStatus.NOT_FOUND, {"error": "no such route"})
            return
        try:
            body = self._body()
            if path == "/assets":
                self._send(HTTPStatus.OK, {"version": self.service.ingest_rul_update(body)})
            else:
                self._send(HTTPStatus.OK, self.service.request_plan(body).to_dict())
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            self._send(HTTPStatus.BAD_REQUEST, {"error": f"malformed JSON: {exc}"})
        except ValidationError as exc:
            self._send(HTTPStatus.BAD_REQUEST, {"error": "validation failed", "violations": exc.to_dict()})
        except EmptyRegistryError as exc:
            self._send(HTTPStatus.CONFLICT, {"error": str(exc)})
        except StorageError as exc:
            log.error("storage failure: %s", exc)
            self._send(HTTPStatus.INTERNAL_SERVER_ERROR, {"error": str(exc)})


def make_server(service: DecisionService, host: str = "127.0.0.1", port: int = 8080) -> ThreadingHTTPServer:
    """Bind a server; port 0 picks a free port (read it back from ``server_address``)."""
    handler = type("Handler", (_Handler,), {"service": service})
    server = ThreadingHTTPServer((host, port), handler)
    server.daemon_threads = True
    return server


def serve_in_thread(server: ThreadingHTTPServer) -> threading.Thread:
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return thread
