"""HTTP JSON API for live advisor sessions.

Thin, stateless-numerics wrapper over the advisor: every response is
computed by the same pure library calls a script would make, so server
advice is bit-identical to a library replay of the same offers.
Sessions live in memory behind a per-session lock (mutations on one
session serialize; requests across sessions run in parallel) with an
optional JSON dump on shutdown. Errors use {code, message} bodies.
"""

from __future__ import annotations

import json
import math
import threading
import uuid
from contextlib import asynccontextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .belief import predictive
from .errors import DomainError, InfeasibleObservationError, NonConvergenceError
from .house_selling import AdvisorState, advise, make_advisor
from .serialize import belief_to_json, house_model_from_json, house_model_to_json
from .utility import eval_utility


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def _predictive_mean(belief) -> float:
    return float(predictive(belief).mean())


def _finite_or_none(x: float | None) -> float | None:
    """JSON-safe level: -inf (forced accept past the last stage) maps
    to null, since JSON numbers cannot carry infinities."""
    if x is None or not math.isfinite(x):
        return None
    return x


def _belief_summary(belief) -> dict:
    return {
        "belief": belief_to_json(belief),
        "predictive_mean": _predictive_mean(belief),
    }


@dataclass
class _Session:
    id: str
    state: AdvisorState
    created: str
    updated: str
    levels: list = field(default_factory=list)
    posteriors: list = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def status(self) -> str:
        return "stopped" if self.state.stopped else "active"


def _offer_payload(state: AdvisorState) -> dict:
    payload = {
        "advice": state.advice,
        "status": "stopped" if state.stopped else "active",
        "stage": state.stage,
        "reservation_level": _finite_or_none(state.level),
        "accumulated_cost": state.accumulated_cost,
        "posterior": _belief_summary(state.belief),
    }
    if state.stopped:
        wealth = state.realized_wealth
        payload["realized_wealth"] = wealth
        payload["realized_utility"] = _finite_or_none(
            eval_utility(state.model.utility, wealth)
        )
    return payload


def create_app(persist_path: str | None = None) -> FastAPI:
    sessions: dict[str, _Session] = {}
    store_lock = threading.Lock()

    def _dump_sessions() -> None:
        if persist_path is None:
            return
        with store_lock:
            dump = {
                s.id: {
                    "model": house_model_to_json(s.state.model),
                    "history": list(s.state.history),
                    "status": s.status,
                    "created": s.created,
                    "updated": s.updated,
                }
                for s in sessions.values()
            }
        with open(persist_path, "w", encoding="utf-8") as fh:
            json.dump(dump, fh, indent=2, sort_keys=True)

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        _dump_sessions()

    app = FastAPI(
        title="stopwise advisor", docs_url=None, redoc_url=None, lifespan=lifespan
    )
    # The browser front end is usually served from a different origin
    # (a static file server); the API carries no credentials, so a
    # permissive policy is fine.
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def _invalid_body(request: Request, exc: RequestValidationError):
        return _error(400, "invalid_json", "request body is not valid JSON")

    def _get(session_id: str) -> _Session | None:
        with store_lock:
            return sessions.get(session_id)

    def _parse_offer(body) -> float | JSONResponse:
        if not isinstance(body, dict) or "offer" not in body:
            return _error(400, "invalid_body", "body must be {\"offer\": number}")
        offer = body["offer"]
        if isinstance(offer, bool) or not isinstance(offer, (int, float)):
            return _error(400, "invalid_body", "offer must be a number")
        return float(offer)

    @app.post("/sessions", status_code=201)
    def create_session(body: dict):
        try:
            model = house_model_from_json(body)
        except DomainError as err:
            return _error(422, "domain_violation", str(err))
        except (ValueError, TypeError, KeyError) as err:
            return _error(400, "invalid_model", str(err))
        try:
            state = make_advisor(model)
        except DomainError as err:
            return _error(422, "domain_violation", str(err))
        except NonConvergenceError as err:
            return _error(422, "non_convergence", str(err))
        except ValueError as err:
            return _error(400, "invalid_model", str(err))
        session = _Session(
            id=uuid.uuid4().hex,
            state=state,
            created=_now(),
            updated=_now(),
        )
        session.levels.append(state.level)
        session.posteriors.append(_belief_summary(state.belief))
        with store_lock:
            sessions[session.id] = session
        return {
            "id": session.id,
            "status": "active",
            "stage": 0,
            "reservation_level": _finite_or_none(state.level),
            "horizon": model.horizon,
            "prior": _belief_summary(model.prior),
        }

    @app.get("/sessions")
    def list_sessions():
        with store_lock:
            items = list(sessions.values())
        return {
            "sessions": [
                {
                    "id": s.id,
                    "status": s.status,
                    "stage": s.state.stage,
                    "offers_seen": len(s.state.history),
                    "created": s.created,
                    "updated": s.updated,
                }
                for s in items
            ]
        }

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        session = _get(session_id)
        if session is None:
            return _error(404, "not_found", f"no session {session_id}")
        state = session.state
        payload = {
            "id": session.id,
            "status": session.status,
            "stage": state.stage,
            "advice": state.advice,
            "reservation_level": _finite_or_none(state.level),
            "accumulated_cost": state.accumulated_cost,
            "history": list(state.history),
            "levels": [_finite_or_none(lv) for lv in session.levels],
            "posteriors": list(session.posteriors),
            "model": house_model_to_json(state.model),
            "created": session.created,
            "updated": session.updated,
        }
        if state.stopped:
            wealth = state.realized_wealth
            payload["realized_wealth"] = wealth
            payload["realized_utility"] = _finite_or_none(
                eval_utility(state.model.utility, wealth)
            )
        return payload

    @app.post("/sessions/{session_id}/offers")
    def post_offer(session_id: str, body: dict):
        session = _get(session_id)
        if session is None:
            return _error(404, "not_found", f"no session {session_id}")
        offer = _parse_offer(body)
        if isinstance(offer, JSONResponse):
            return offer
        with session.lock:
            if session.state.stopped:
                return _error(409, "session_stopped", "session already stopped")
            try:
                new_state = advise(session.state, offer)
            except InfeasibleObservationError as err:
                return _error(422, "infeasible_offer", str(err))
            session.state = new_state
            session.updated = _now()
            if not new_state.stopped:
                session.levels.append(new_state.level)
                session.posteriors.append(_belief_summary(new_state.belief))
            return _offer_payload(new_state)

    @app.post("/sessions/{session_id}/whatif")
    def what_if(session_id: str, body: dict):
        session = _get(session_id)
        if session is None:
            return _error(404, "not_found", f"no session {session_id}")
        offer = _parse_offer(body)
        if isinstance(offer, JSONResponse):
            return offer
        with session.lock:
            if session.state.stopped:
                return _error(409, "session_stopped", "session already stopped")
            try:
                peek = advise(session.state, offer)
            except InfeasibleObservationError as err:
                return _error(422, "infeasible_offer", str(err))
        return {
            "advice": peek.advice,
            "hypothetical_stage": peek.stage,
            "hypothetical_level": _finite_or_none(peek.level),
            "hypothetical_posterior": _belief_summary(peek.belief),
        }

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        with store_lock:
            found = sessions.pop(session_id, None)
        if found is None:
            return _error(404, "not_found", f"no session {session_id}")
        return None

    return app
