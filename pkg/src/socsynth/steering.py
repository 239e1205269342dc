"""Live steering: observe and retune a running simulation.

Transport is plain HTTP with JSON payloads (version-tagged) plus a
server-pushed Server-Sent-Events stream carrying one frame per message,
so any language - including a browser with no client library - can drive
a run.

Endpoints
---------
GET  /api/meta                run metadata, current tunables, ranges
POST /api/attach              {"role": "controller"|"observer"} -> token
POST /api/command             {"token", "kind", ...} -> acknowledgement
GET  /api/frames?every=k      SSE stream of LiveFrames
GET  /api/snapshot            latest full per-agent snapshot record
GET  /                        dashboard (when built) or a status page

Commands take effect at tick boundaries only, never mid-tick. Parameter
changes are logged as first-class events with the tick they apply from,
so a steered run's log replays to the identical final digest. Frame
delivery uses bounded per-client queues: a slow consumer back-pressures
the simulation loop instead of losing frames.
"""

from __future__ import annotations

import json
import queue
import secrets
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

from .config import TUNABLE_RANGES, config_to_flat
from .regions import RegionIndicators
from .roles import ValidationError
from .scheduler import Simulation, Sink, Snapshot, TickReport
from .stats import polarization_index, symmetric_histogram

PROTOCOL_VERSION = 1
FRAME_HISTOGRAM_BINS = 21
COMMAND_KINDS = ("pause", "resume", "step", "set_param", "snapshot_now", "stop")
_COMMAND_TIMEOUT_S = 30.0
_FRAME_QUEUE_SIZE = 256


@dataclass(frozen=True)
class ControlCommand:
    kind: str
    n: int = 1
    key: str = ""
    value: float = 0.0

    def __post_init__(self):
        if self.kind not in COMMAND_KINDS:
            raise ValidationError(f"unknown command kind {self.kind!r}")
        if self.kind == "step" and self.n < 1:
            raise ValidationError("step needs n >= 1")


def tunables_snapshot(cfg) -> dict:
    flat = config_to_flat(cfg)
    return {key: flat[key] for key in TUNABLE_RANGES}


def build_frame(sim: Simulation, window_reports: list) -> dict:
    """One LiveFrame: polarity histogram, window attacks, tunables."""
    from .roles import COL_POLICE_PRED, COL_TERROR_PRED

    signed = sim.society.tau[:, COL_POLICE_PRED] - sim.society.tau[:, COL_TERROR_PRED]
    hist = symmetric_histogram(signed, FRAME_HISTOGRAM_BINS)
    deaths = [a.deaths for report in window_reports for a in report.attacks]
    return {
        "v": PROTOCOL_VERSION,
        "type": "frame",
        "tick": sim.society.tick,
        "histogram": hist.to_dict(),
        "attack_count": len(deaths),
        "deaths": deaths,
        "polarization": polarization_index(sim.society),
        "params": tunables_snapshot(sim.cfg),
    }


class SteeringSession(Sink):
    """Command queue + frame fan-out wired between server and scheduler.

    Acts as both the scheduler control object (``at_boundary``) and a sink
    (tick/snapshot events). The simulation loop is the only thread that
    touches the Simulation; HTTP threads communicate through queues.
    """

    def __init__(self):
        self._commands: queue.Queue = queue.Queue()
        # client id -> [queue, every, window list]
        self._clients: dict[int, list] = {}
        self._next_client = 0
        self._clients_lock = threading.Lock()
        self.paused = False
        self._steps_pending = 0
        self.state = "starting"
        self.tick = 0
        self.latest_snapshot: dict | None = None
        self.controller_token: str | None = None
        self.observer_tokens: set = set()
        self.sim: Simulation | None = None
        self._shutdown = threading.Event()

    # -- session management -------------------------------------------------

    def attach(self, role: str) -> str:
        token = secrets.token_hex(16)
        if role == "controller":
            if self.controller_token is not None:
                raise ValidationError("a controller is already attached")
            self.controller_token = token
        elif role == "observer":
            self.observer_tokens.add(token)
        else:
            raise ValidationError(f"unknown role {role!r}")
        return token

    def detach(self, token: str):
        if token == self.controller_token:
            self.controller_token = None
        self.observer_tokens.discard(token)

    def submit(self, command: ControlCommand, token: str) -> dict:
        """Queue a command and wait for the loop to acknowledge it."""
        if self.controller_token is None or token != self.controller_token:
            raise ValidationError("command requires the controller token")
        if self.state == "done":
            raise ValidationError("run already finished")
        result: queue.Queue = queue.Queue(1)
        self._commands.put((command, result))
        try:
            ok, payload = result.get(timeout=_COMMAND_TIMEOUT_S)
        except queue.Empty:
            raise ValidationError("command was not processed in time")
        if not ok:
            raise ValidationError(payload)
        return payload

    # -- frame fan-out -------------------------------------------------------

    def register_client(self, every: int) -> queue.Queue:
        q: queue.Queue = queue.Queue(_FRAME_QUEUE_SIZE)
        with self._clients_lock:
            self._clients[self._next_client] = [q, every, []]
            self._next_client += 1
        return q

    def unregister_client(self, q: queue.Queue):
        with self._clients_lock:
            stale = [cid for cid, entry in self._clients.items() if entry[0] is q]
            for cid in stale:
                del self._clients[cid]

    def _deliver(self, q: queue.Queue, frame):
        while not self._shutdown.is_set():
            try:
                q.put(frame, timeout=0.25)  # back-pressure, not loss
                return
            except queue.Full:
                continue

    def close(self):
        self._shutdown.set()
        self.state = "done"
        with self._clients_lock:
            entries = list(self._clients.values())
        for entry in entries:
            try:
                entry[0].put_nowait(None)
            except queue.Full:
                pass

    # -- scheduler-facing hooks ----------------------------------------------

    def _process(self, command: ControlCommand, sim: Simulation) -> tuple:
        boundary = sim.society.tick
        if command.kind == "pause":
            self.paused = True
            self._steps_pending = 0
            self.state = "paused"
            return True, {"ok": True, "state": "paused", "applied_tick": boundary}
        if command.kind == "resume":
            self.paused = False
            self._steps_pending = 0
            self.state = "running"
            return True, {"ok": True, "state": "running", "applied_tick": boundary}
        if command.kind == "step":
            self._steps_pending += command.n
            self.state = "stepping"
            return True, {"ok": True, "state": "stepping", "applied_tick": boundary}
        if command.kind == "set_param":
            if command.key not in TUNABLE_RANGES:
                return False, f"parameter {command.key!r} is not tunable"
            lo, hi = TUNABLE_RANGES[command.key]
            if not lo <= command.value <= hi:
                return False, f"value {command.value} for {command.key!r} outside allowed range [{lo}, {hi}]"
            event = sim.apply_param_change(command.key, command.value)
            return True, {
                "ok": True,
                "key": command.key,
                "value": command.value,
                "applies_from_tick": event.applies_from_tick,
            }
        if command.kind == "snapshot_now":
            snap = sim.snapshot()
            self.latest_snapshot = snap.to_record()
            return True, {"ok": True, "tick": snap.tick}
        if command.kind == "stop":
            return True, {"ok": True, "state": "stopping", "applied_tick": boundary}
        return False, f"unknown command {command.kind!r}"

    def at_boundary(self, sim: Simulation) -> bool:
        """Scheduler control hook; runs in the simulation loop thread."""
        self.sim = sim
        self.tick = sim.society.tick
        stopping = False
        while True:
            block = self.paused and self._steps_pending == 0 and not stopping
            try:
                command, result = self._commands.get(block=block, timeout=0.25 if block else None)
            except queue.Empty:
                if self._shutdown.is_set():
                    return False
                if block:
                    continue
                break
            ok, payload = self._process(command, sim)
            if ok and command.kind == "stop":
                stopping = True
            result.put((ok, payload))
            if self._shutdown.is_set():
                return False
        if stopping:
            return False
        if self._steps_pending > 0:
            self._steps_pending -= 1
            if self._steps_pending == 0:
                self.paused = True
        self.state = "paused" if (self.paused and self._steps_pending == 0) else "running"
        return True

    # -- sink hooks ------------------------------------------------------

    def on_start(self, config_flat, region, meta):
        self.state = "running"

    def on_tick(self, report: TickReport):
        self.tick = report.tick
        if self.sim is None:
            return
        with self._clients_lock:
            entries = list(self._clients.values())
        frame_base = None
        for entry in entries:
            q, every, window = entry
            window.append(report)
            if report.tick % every != 0:
                continue
            if frame_base is None:
                frame_base = build_frame(self.sim, [])
            frame = dict(frame_base)
            deaths = [a.deaths for rep in window for a in rep.attacks]
            frame["deaths"] = deaths
            frame["attack_count"] = len(deaths)
            entry[2] = []
            self._deliver(q, frame)

    def on_snapshot(self, snapshot: Snapshot):
        self.latest_snapshot = snapshot.to_record()

    def on_finish(self, digest, completed_ticks):
        self.state = "done"
        self.tick = completed_ticks
        # Fail any commands still queued so submitters do not time out.
        while True:
            try:
                _, result = self._commands.get_nowait()
            except queue.Empty:
                break
            result.put((False, "run already finished"))
        with self._clients_lock:
            entries = list(self._clients.values())
        for entry in entries:
            try:
                entry[0].put(None, timeout=1.0)
            except queue.Full:
                pass


def _meta_payload(session: SteeringSession, cfg, region: RegionIndicators) -> dict:
    return {
        "v": PROTOCOL_VERSION,
        "state": session.state,
        "tick": session.tick,
        "n_ticks": cfg.n_ticks,
        "n_agents": cfg.graph.n_agents,
        "snapshot_every": cfg.snapshot_every,
        "region": region.name,
        "params": tunables_snapshot(session.sim.cfg if session.sim else cfg),
        "ranges": {key: list(bounds) for key, bounds in TUNABLE_RANGES.items()},
        "controller_attached": session.controller_token is not None,
    }


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "socsynth-steering/1"

    # Populated by make_server via class attributes.
    session: SteeringSession
    cfg = None
    region = None
    dashboard_dir: Path | None = None

    def log_message(self, fmt, *args):  # quiet by default
        pass

    def _send_json(self, payload: dict, status: int = 200):
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self) -> dict:
        length = int(self.headers.get("Content-Length", "0"))
        if length == 0:
            return {}
        return json.loads(self.rfile.read(length))

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        url = urlparse(self.path)
        if url.path == "/api/meta":
            self._send_json(_meta_payload(self.session, self.cfg, self.region))
        elif url.path == "/api/frames":
            self._stream_frames(url)
        elif url.path == "/api/snapshot":
            snap = self.session.latest_snapshot
            if snap is None:
                self._send_json({"v": PROTOCOL_VERSION, "error": "no snapshot yet"}, 404)
            else:
                self._send_json(snap)
        elif url.path == "/" or url.path.startswith("/assets/"):
            self._serve_dashboard(url.path)
        else:
            self._send_json({"v": PROTOCOL_VERSION, "error": "not found"}, 404)

    def do_POST(self):
        url = urlparse(self.path)
        try:
            body = self._read_json()
        except json.JSONDecodeError:
            self._send_json({"v": PROTOCOL_VERSION, "ok": False, "error": "invalid JSON"}, 400)
            return
        if url.path == "/api/attach":
            try:
                token = self.session.attach(body.get("role", "observer"))
            except ValidationError as exc:
                self._send_json({"v": PROTOCOL_VERSION, "ok": False, "error": str(exc)}, 409)
                return
            self._send_json({"v": PROTOCOL_VERSION, "ok": True, "token": token})
        elif url.path == "/api/detach":
            self.session.detach(body.get("token", ""))
            self._send_json({"v": PROTOCOL_VERSION, "ok": True})
        elif url.path == "/api/command":
            self._handle_command(body)
        else:
            self._send_json({"v": PROTOCOL_VERSION, "ok": False, "error": "not found"}, 404)

    def _handle_command(self, body: dict):
        try:
            command = ControlCommand(
                kind=body.get("kind", ""),
                n=int(body.get("n", 1)),
                key=body.get("key", ""),
                value=float(body.get("value", 0.0)),
            )
            payload = self.session.submit(command, body.get("token", ""))
        except ValidationError as exc:
            error: dict = {"v": PROTOCOL_VERSION, "ok": False, "error": str(exc)}
            if body.get("key") in TUNABLE_RANGES:
                error["range"] = list(TUNABLE_RANGES[body["key"]])
            self._send_json(error, 400)
            return
        payload["v"] = PROTOCOL_VERSION
        self._send_json(payload)

    def _stream_frames(self, url):
        params = parse_qs(url.query)
        every = max(1, int(params.get("every", ["1"])[0]))
        q = self.session.register_client(every)
        try:
            self.send_response(200)
            self.send_header("Content-Type", "text/event-stream")
            self.send_header("Cache-Control", "no-cache")
            self.send_header("Access-Control-Allow-Origin", "*")
            self.end_headers()
            while True:
                frame = q.get()
                if frame is None:
                    self.wfile.write(b"event: end\ndata: {}\n\n")
                    self.wfile.flush()
                    break
                data = json.dumps(frame, separators=(",", ":"))
                self.wfile.write(f"data: {data}\n\n".encode())
                self.wfile.flush()
        except (BrokenPipeError, ConnectionResetError):
            pass
        finally:
            self.session.unregister_client(q)

    def _serve_dashboard(self, path: str):
        root = self.dashboard_dir
        if root is None:
            body = (
                b"<!doctype html><title>socsynth</title>"
                b"<p>Simulation steering endpoint. No dashboard build configured; "
                b"see /api/meta for run state.</p>"
            )
            self.send_response(200)
            self.send_header("Content-Type", "text/html")
            self.send_header("Content-Length", str(len(body)))
            self.end_headers()
            self.wfile.write(body)
            return
        rel = "index.html" if path == "/" else path.lstrip("/")
        target = (root / rel).resolve()
        if not str(target).startswith(str(root.resolve())) or not target.is_file():
            self._send_json({"v": PROTOCOL_VERSION, "error": "not found"}, 404)
            return
        content_types = {
            ".html": "text/html",
            ".js": "text/javascript",
            ".css": "text/css",
            ".svg": "image/svg+xml",
            ".map": "application/json",
        }
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", content_types.get(target.suffix, "application/octet-stream"))
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)


class SteeringServer:
    """HTTP server wrapper around one SteeringSession."""

    def __init__(self, cfg, region: RegionIndicators, host: str = "127.0.0.1", port: int = 0,
                 dashboard_dir=None):
        self.session = SteeringSession()
        handler = type(
            "BoundHandler",
            (_Handler,),
            {
                "session": self.session,
                "cfg": cfg,
                "region": region,
                "dashboard_dir": Path(dashboard_dir) if dashboard_dir else None,
            },
        )
        self._httpd = ThreadingHTTPServer((host, port), handler)
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def url(self) -> str:
        host, port = self._httpd.server_address[:2]
        return f"http://{host}:{port}"

    def start(self):
        self._thread.start()

    def shutdown(self):
        self.session.close()
        self._httpd.shutdown()
        self._httpd.server_close()


def serve_run(cfg, region: RegionIndicators, host: str = "127.0.0.1", port: int = 0,
              extra_sinks: tuple = (), dashboard_dir=None, linger: bool = False,
              on_ready=None):
    """Run a simulation with the steering server attached.

    Blocks until the run finishes (plus forever when ``linger`` so a
    dashboard can keep inspecting the final state). Returns the
    SimulationLog.
    """
    from .scheduler import run as run_simulation

    server = SteeringServer(cfg, region, host=host, port=port, dashboard_dir=dashboard_dir)
    server.start()
    if on_ready is not None:
        on_ready(server)
    try:
        log = run_simulation(
            cfg,
            region,
            sinks=tuple(extra_sinks) + (server.session,),
            control=server.session,
        )
        if linger:
            try:
                while True:
                    threading.Event().wait(3600)
            except KeyboardInterrupt:
                pass
        return log
    finally:
        server.shutdown()
