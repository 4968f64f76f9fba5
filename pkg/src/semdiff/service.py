"""Session service: long-running interactive refinement sessions over HTTP.

Each session owns a variant space, a step-weight triple and a search state
(simple or tolerant).  Mutations are serialized per session; state is
event-sourced to an append-only line-delimited JSON log (one file per
session, schema_version field on every record), so a store reopened on the
same directory replays to exactly the same state.

The service performs no search arithmetic of its own: every modifier is
delegated to the step functions in `core` / `tolerant`, and the displayed
variant is the grid snap of the continuous position.  Undo restores the
exact prior state value (including the tolerant pair context).

HTTP surface (JSON bodies, machine-readable error codes):

  POST /sessions                     create; body as in `SessionStore.create`
  GET  /sessions/{id}                current state summary
  POST /sessions/{id}/modifiers      {"power": "slightly", "direction": "greater"}
  POST /sessions/{id}/undo | /confirm | /abandon
  GET  /sessions/{id}/history        ordered modifier trace
  GET  /sessions/{id}/updates        long-poll push channel:
                                     ?after_revision=R&timeout=s returns when
                                     the session revision exceeds R
"""

from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from .core import (
    Direction,
    InvalidArgument,
    Modifier,
    Power,
    SearchState,
    StateTerminated,
    StepWeights,
    VariantSpace,
    build_variant_space,
    initial_state,
    is_terminated,
    simple_step,
)
from .tolerant import initial_tolerant_state, tolerant_step

SCHEMA_VERSION = 1
UNDO_LIMIT = 64


class SessionError(Exception):
    """Service-level failure with a machine-readable code."""

    def __init__(self, code: str, message: str, http_status: int = 400):
        super().__init__(message)
        self.code = code
        self.http_status = http_status


@dataclass
class TraceEntry:
    step_index: int
    power: str
    direction: str
    position: float
    variant: float
    lower: float
    upper: float


@dataclass
class Session:
    id: str
    space: VariantSpace
    algorithm: str
    weights: StepWeights
    state: SearchState
    status: str = "active"
    created_at: float = 0.0
    updated_at: float = 0.0
    revision: int = 0
    undo_stack: List[SearchState] = field(default_factory=list)
    trace: List[TraceEntry] = field(default_factory=list)
    lock: threading.RLock = field(default_factory=threading.RLock, repr=False)
    changed: threading.Condition = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.changed is None:
            self.changed = threading.Condition(self.lock)

    @property
    def variant(self) -> float:
        movement = 0.0
        if self.state.history:
            movement = float(self.state.history[-1][0].direction.sign)
        return self.space.variant_of(self.state.position, movement)

    def summary(self) -> dict:
        return {
            "session_id": self.id,
            "status": self.status,
            "algorithm": self.algorithm,
            "step_index": self.state.step_index,
            "interval": [self.state.lower, self.state.upper],
            "position": self.state.position,
            "variant": self.variant,
            "converged": is_terminated(self.state),
            "epsilon": self.state.epsilon,
            "revision": self.revision,
            "space": {
                "base": self.space.base,
                "range": self.space.range,
                "step": self.space.step,
                "count": self.space.count,
            },
            "weights": {
                "slightly": self.weights.slightly,
                "moderately": self.weights.moderately,
                "significantly": self.weights.significantly,
            },
        }


def _parse_modifier(payload: dict) -> Modifier:
    if not isinstance(payload, dict):
        raise SessionError("invalid_argument", "modifier body must be an object")
    try:
        power = Power.from_name(str(payload["power"]))
        direction = Direction.from_name(str(payload["direction"]))
    except KeyError as exc:
        raise SessionError("invalid_argument", f"missing modifier field {exc}") from None
    except InvalidArgument as exc:
        raise SessionError("invalid_argument", str(exc)) from None
    return Modifier(power, direction)


class SessionStore:
    """In-memory session registry backed by per-session JSONL event logs."""

    def __init__(self, data_dir: str):
        self.data_dir = data_dir
        os.makedirs(data_dir, exist_ok=True)
        self._sessions: Dict[str, Session] = {}
        self._registry_lock = threading.Lock()
        self._load()

    # -- event log ----------------------------------------------------------

    def _log_path(self, session_id: str) -> str:
        return os.path.join(self.data_dir, f"{session_id}.jsonl")

    def _append(self, session_id: str, record: dict) -> None:
        record = {"schema_version": SCHEMA_VERSION, "session_id": session_id, **record}
        with open(self._log_path(session_id), "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record, sort_keys=True) + "\n")

    def _load(self) -> None:
        for name in sorted(os.listdir(self.data_dir)):
            if not name.endswith(".jsonl"):
                continue
            path = os.path.join(self.data_dir, name)
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    record = json.loads(line)
                    if record.get("schema_version") != SCHEMA_VERSION:
                        raise SessionError(
                            "schema_mismatch",
                            f"unsupported event schema {record.get('schema_version')!r} in {name}",
                            500,
                        )
                    self._replay(record)

    def _replay(self, record: dict) -> None:
        kind = record["type"]
        if kind == "created":
            payload = record["payload"]
            self._materialize(
                session_id=record["session_id"],
                base=payload["base"],
                range_=payload["range"],
                step=payload["step"],
                algorithm=payload["algorithm"],
                weights=StepWeights(**payload["weights"]),
                epsilon=payload.get("epsilon"),
                created_at=record["ts"],
                log=False,
            )
        elif kind == "modifier":
            payload = record["payload"]
            self._apply(
                record["session_id"],
                Modifier(Power.from_name(payload["power"]), Direction.from_name(payload["direction"])),
                ts=record["ts"],
                log=False,
            )
        elif kind == "lifecycle":
            self._lifecycle(record["session_id"], record["payload"]["action"], ts=record["ts"], log=False)
        else:
            raise SessionError("schema_mismatch", f"unknown event type {kind!r}", 500)

    # -- session access -----------------------------------------------------

    def _get(self, session_id: str) -> Session:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise SessionError("not_found", f"no session {session_id!r}", 404) from None

    def list_ids(self) -> List[str]:
        with self._registry_lock:
            return sorted(self._sessions)

    # -- operations ---------------------------------------------------------

    def _materialize(
        self,
        session_id: str,
        base: float,
        range_: float,
        step: float,
        algorithm: str,
        weights: StepWeights,
        epsilon: Optional[float],
        created_at: float,
        log: bool,
    ) -> Session:
        if algorithm not in ("simple", "tolerant"):
            raise SessionError("invalid_argument", f"unknown algorithm {algorithm!r}")
        try:
            space = build_variant_space(base, range_, step)
            weights.validate()
            if algorithm == "simple":
                state: SearchState = initial_state(space, epsilon)
            else:
                state = initial_tolerant_state(space, epsilon)
        except InvalidArgument as exc:
            raise SessionError("invalid_argument", str(exc)) from None
        session = Session(
            id=session_id,
            space=space,
            algorithm=algorithm,
            weights=weights,
            state=state,
            created_at=created_at,
            updated_at=created_at,
        )
        with self._registry_lock:
            self._sessions[session_id] = session
        if log:
            self._append(
                session_id,
                {
                    "type": "created",
                    "ts": created_at,
                    "payload": {
                        "base": base,
                        "range": range_,
                        "step": step,
                        "algorithm": algorithm,
                        "epsilon": epsilon,
                        "weights": {
                            "slightly": weights.slightly,
                            "moderately": weights.moderately,
                            "significantly": weights.significantly,
                        },
                    },
                },
            )
        return session

    def create(
        self,
        base: float,
        range_: float,
        step: float,
        algorithm: str = "tolerant",
        weights: StepWeights = StepWeights(0.25, 0.35, 0.45),
        epsilon: Optional[float] = None,
    ) -> Session:
        return self._materialize(
            session_id=uuid.uuid4().hex,
            base=base,
            range_=range_,
            step=step,
            algorithm=algorithm,
            weights=weights,
            epsilon=epsilon,
            created_at=time.time(),
            log=True,
        )

    def _apply(self, session_id: str, modifier: Modifier, ts: float, log: bool) -> Session:
        session = self._get(session_id)
        with session.lock:
            if session.status != "active":
                raise SessionError(
                    "session_not_active", f"session is {session.status}; modifiers rejected", 409
                )
            try:
                if session.algorithm == "simple":
                    new_state = simple_step(session.state, modifier, session.weights)
                else:
                    new_state = tolerant_step(session.state, modifier, session.weights)
            except StateTerminated as exc:
                raise SessionError("session_not_active", str(exc), 409) from None
            except InvalidArgument as exc:
                raise SessionError("invalid_argument", str(exc)) from None
            session.undo_stack.append(session.state)
            if len(session.undo_stack) > UNDO_LIMIT:
                session.undo_stack.pop(0)
            session.state = new_state
            session.status = "converged" if is_terminated(new_state) else "active"
            session.updated_at = ts
            session.revision += 1
            session.trace.append(
                TraceEntry(
                    step_index=new_state.step_index,
                    power=modifier.power.label,
                    direction=modifier.direction.label,
                    position=new_state.position,
                    variant=session.variant,
                    lower=new_state.lower,
                    upper=new_state.upper,
                )
            )
            if log:
                self._append(
                    session_id,
                    {
                        "type": "modifier",
                        "ts": ts,
                        "payload": {
                            "power": modifier.power.label,
                            "direction": modifier.direction.label,
                        },
                    },
                )
            session.changed.notify_all()
        return session

    def apply_modifier(self, session_id: str, modifier: Modifier) -> Session:
        return self._apply(session_id, modifier, ts=time.time(), log=True)

    def _lifecycle(self, session_id: str, action: str, ts: float, log: bool) -> Session:
        session = self._get(session_id)
        with session.lock:
            if action == "undo":
                if session.status in ("confirmed", "abandoned"):
                    raise SessionError(
                        "session_not_active", f"session is {session.status}; undo rejected", 409
                    )
                if not session.undo_stack:
                    raise SessionError("undo_empty", "nothing to undo", 409)
                session.state = session.undo_stack.pop()
                if session.trace:
                    session.trace.pop()
                session.status = "converged" if is_terminated(session.state) else "active"
            elif action == "confirm":
                if session.status in ("confirmed", "abandoned"):
                    raise SessionError(
                        "session_not_active", f"session is {session.status}; confirm rejected", 409
                    )
                session.status = "confirmed"
            elif action == "abandon":
                if session.status in ("confirmed", "abandoned"):
                    raise SessionError(
                        "session_not_active", f"session is {session.status}; abandon rejected", 409
                    )
                session.status = "abandoned"
            else:
                raise SessionError("invalid_argument", f"unknown lifecycle action {action!r}")
            session.updated_at = ts
            session.revision += 1
            if log:
                self._append(session_id, {"type": "lifecycle", "ts": ts, "payload": {"action": action}})
            session.changed.notify_all()
        return session

    def lifecycle(self, session_id: str, action: str) -> Session:
        return self._lifecycle(session_id, action, ts=time.time(), log=True)

    def history(self, session_id: str) -> List[dict]:
        session = self._get(session_id)
        with session.lock:
            return [
                {
                    "step_index": e.step_index,
                    "power": e.power,
                    "direction": e.direction,
                    "position": e.position,
                    "variant": e.variant,
                    "interval": [e.lower, e.upper],
                }
                for e in session.trace
            ]

    def wait_for_update(self, session_id: str, after_revision: int, timeout: float) -> Session:
        session = self._get(session_id)
        deadline = time.monotonic() + timeout
        with session.changed:
            while session.revision <= after_revision:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    break
                session.changed.wait(remaining)
        return session


# ---------------------------------------------------------------------------
# HTTP layer
# ---------------------------------------------------------------------------


def create_app(store: SessionStore):
    from fastapi import FastAPI, Request
    from fastapi.responses import JSONResponse

    app = FastAPI(title="semdiff session service")

    @app.exception_handler(SessionError)
    async def _session_error(_request: Request, exc: SessionError):
        return JSONResponse(
            status_code=exc.http_status,
            content={"error": {"code": exc.code, "message": str(exc)}},
        )

    @app.post("/sessions", status_code=201)
    def create_session(body: dict):
        for key in ("base", "range", "step"):
            if key not in body:
                raise SessionError("invalid_argument", f"missing field {key!r}")
        weights = body.get("weights") or {}
        try:
            w = StepWeights(
                float(weights.get("slightly", 0.25)),
                float(weights.get("moderately", 0.35)),
                float(weights.get("significantly", 0.45)),
            )
        except (TypeError, ValueError):
            raise SessionError("invalid_argument", "weights must be numeric") from None
        session = store.create(
            base=float(body["base"]),
            range_=float(body["range"]),
            step=float(body["step"]),
            algorithm=body.get("algorithm", "tolerant"),
            weights=w,
            epsilon=float(body["epsilon"]) if body.get("epsilon") is not None else None,
        )
        return session.summary()

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return store._get(session_id).summary()

    @app.post("/sessions/{session_id}/modifiers")
    def post_modifier(session_id: str, body: dict):
        session = store.apply_modifier(session_id, _parse_modifier(body))
        return session.summary()

    @app.post("/sessions/{session_id}/undo")
    def post_undo(session_id: str):
        return store.lifecycle(session_id, "undo").summary()

    @app.post("/sessions/{session_id}/confirm")
    def post_confirm(session_id: str):
        return store.lifecycle(session_id, "confirm").summary()

    @app.post("/sessions/{session_id}/abandon")
    def post_abandon(session_id: str):
        return store.lifecycle(session_id, "abandon").summary()

    @app.get("/sessions/{session_id}/history")
    def get_history(session_id: str):
        return {"session_id": session_id, "history": store.history(session_id)}

    @app.get("/sessions/{session_id}/updates")
    def get_updates(session_id: str, after_revision: int = 0, timeout: float = 25.0):
        session = store.wait_for_update(session_id, after_revision, min(timeout, 60.0))
        return session.summary()

    return app


def serve(data_dir: str, host: str = "127.0.0.1", port: int = 8764) -> None:
    """Run the service under uvicorn (blocking)."""
    import uvicorn

    store = SessionStore(data_dir)
    app = create_app(store)
    uvicorn.run(app, host=host, port=port, log_level="info")
