"""HTTP session service for the interactive teaching loop.

Sessions hold a mutable example list; inference runs asynchronously (one
job per session) and clients poll.  Candidate payloads carry, for every
candidate, the acceptance boolean against each current example so a UI
can show which examples each hypothesis explains.  Results are flagged
stale as soon as the example list changes.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field
from typing import Optional

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import inference
from .automata import RegexMatcher
from .corpus import Dataset
from .grammar import STANDARD_REGISTRY
from .scoring import STATUS_NO_CONSISTENT

IDLE = "idle"
RUNNING = "running"
DONE = "done"
FAILED = "failed"

UNINFORMATIVE_THRESHOLD = 0.9


class ExampleIn(BaseModel):
    string: str
    label: str  # "positive" | "negative"


class InferIn(BaseModel):
    seed: int = 0
    max_seconds: Optional[float] = None
    ensemble: Optional[dict] = None


@dataclass
class _Result:
    version: int
    status: str
    candidates: list  # scoring.Candidate, ranked
    accepts: list  # aligned list of {example_id: bool}


@dataclass
class _Session:
    id: str
    examples: list = field(default_factory=list)  # (example_id, string, label)
    version: int = 0
    next_example_id: int = 1
    inference_state: str = IDLE
    result: Optional[_Result] = None
    error: Optional[str] = None
    lock: threading.Lock = field(default_factory=threading.Lock)

    def dataset(self) -> Dataset:
        return Dataset(
            id=self.id,
            positives=tuple(s for _, s, label in self.examples if label == "positive"),
            negatives=tuple(s for _, s, label in self.examples if label == "negative"),
        )

    def view(self) -> dict:
        return {
            "id": self.id,
            "examples": [
                {"id": ex_id, "string": s, "label": label}
                for ex_id, s, label in self.examples
            ],
            "inference_state": self.inference_state,
            "stale": self.result is not None and self.result.version != self.version,
            "has_result": self.result is not None,
            "error": self.error,
        }


def create_app(max_budget: float = 60.0, registry=STANDARD_REGISTRY) -> FastAPI:
    app = FastAPI(title="regrow", version="0.1.0")
    sessions: dict[str, _Session] = {}
    store_lock = threading.Lock()

    def get_session(session_id: str) -> Optional[_Session]:
        with store_lock:
            return sessions.get(session_id)

    def not_found():
        return JSONResponse({"reason": "unknown-session"}, status_code=404)

    @app.post("/sessions", status_code=201)
    def create_session():
        session = _Session(id=uuid.uuid4().hex[:12])
        with store_lock:
            sessions[session.id] = session
        return session.view()

    @app.get("/sessions/{session_id}")
    def show_session(session_id: str):
        session = get_session(session_id)
        if session is None:
            return not_found()
        with session.lock:
            return session.view()

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        with store_lock:
            if session_id not in sessions:
                return not_found()
            del sessions[session_id]

    @app.post("/sessions/{session_id}/examples", status_code=201)
    def add_example(session_id: str, example: ExampleIn):
        session = get_session(session_id)
        if session is None:
            return not_found()
        if example.label not in ("positive", "negative"):
            return JSONResponse({"reason": "bad-label"}, status_code=422)
        bad = set(example.string) - set(registry.alphabet)
        if bad:
            return JSONResponse(
                {"reason": "outside-alphabet", "characters": sorted(bad)}, status_code=422
            )
        with session.lock:
            strings = {s for _, s, _ in session.examples}
            if example.string in strings:
                return JSONResponse({"reason": "duplicate-example"}, status_code=409)
            ex_id = session.next_example_id
            session.next_example_id += 1
            session.examples.append((ex_id, example.string, example.label))
            session.version += 1
            return session.view()

    @app.delete("/sessions/{session_id}/examples/{example_id}")
    def remove_example(session_id: str, example_id: int):
        session = get_session(session_id)
        if session is None:
            return not_found()
        with session.lock:
            before = len(session.examples)
            session.examples = [e for e in session.examples if e[0] != example_id]
            if len(session.examples) == before:
                return JSONResponse({"reason": "unknown-example"}, status_code=404)
            session.version += 1
            return session.view()

    def run_job(session: _Session, dataset: Dataset, examples, version: int, ensemble,
                budget: float):
        try:
            outcome = inference.run_ensemble(dataset, ensemble, budget_seconds=budget)
            accepts = []
            for cand in outcome.candidates:
                matcher = RegexMatcher(cand.ast, registry)
                accepts.append(
                    [
                        {"example_id": ex_id, "accepts": matcher.accepts(s)}
                        for ex_id, s, _ in examples
                    ]
                )
            with session.lock:
                session.result = _Result(
                    version=version,
                    status=outcome.status,
                    candidates=outcome.candidates,
                    accepts=accepts,
                )
                session.inference_state = DONE
        except Exception as exc:
            with session.lock:
                session.error = str(exc)
                session.inference_state = FAILED

    @app.post("/sessions/{session_id}/infer", status_code=202)
    def infer(session_id: str, body: InferIn | None = None):
        session = get_session(session_id)
        if session is None:
            return not_found()
        body = body or InferIn()
        with session.lock:
            if session.inference_state == RUNNING:
                return JSONResponse({"reason": "inference-running"}, status_code=409)
            dataset = session.dataset()
            if not dataset.runnable:
                return JSONResponse({"reason": "positives-required"}, status_code=422)
            if body.ensemble is not None:
                ensemble = inference.ensemble_from_dict(
                    dict(body.ensemble, seed=body.seed), registry
                )
            else:
                ensemble = inference.default_ensemble(seed=body.seed, registry=registry)
            budget = min(body.max_seconds or max_budget, max_budget)
            session.inference_state = RUNNING
            session.error = None
            version = session.version
            examples = list(session.examples)
        thread = threading.Thread(
            target=run_job, args=(session, dataset, examples, version, ensemble, budget),
            daemon=True,
        )
        thread.start()
        return {"state": RUNNING, "budget_seconds": budget}

    @app.get("/sessions/{session_id}/candidates")
    def candidates(session_id: str, k: int = 10):
        session = get_session(session_id)
        if session is None:
            return not_found()
        with session.lock:
            if session.result is None:
                return JSONResponse({"reason": "no-result-yet"}, status_code=404)
            result = session.result
            top = result.candidates[:k]
            payload = {
                "status": result.status,
                "stale": result.version != session.version,
                "k": k,
                "total_candidates": len(result.candidates),
                "uninformative": (
                    result.status != STATUS_NO_CONSISTENT
                    and bool(result.candidates)
                    and result.candidates[0].posterior < UNINFORMATIVE_THRESHOLD
                ),
                "candidates": [
                    {
                        "rank": i + 1,
                        "regex": cand.canonical,
                        "posterior": cand.posterior,
                        "accepts": result.accepts[i],
                    }
                    for i, cand in enumerate(top)
                ],
            }
            return payload

    return app
