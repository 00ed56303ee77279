"""HTTP session service exposing the live agent to a human seeker.

Humans need no persona, so sessions carry no profile; acceptance is an
explicit endpoint instead of token parsing, and per-item pre/post intention
ratings feed a human-grounded persuasiveness figure (the judge supplies the
full-information intention when a judge gateway is configured).
"""

from __future__ import annotations

import json
import logging
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .agent import ACTION_RECOMMEND, AgentConfig, CrsAgent
from .catalog import Catalog, render_item_card
from .dialogue import (
    SPEAKER_RECOMMENDER,
    SPEAKER_SEEKER,
    TERMINATION_ACCEPTED,
    DialogueState,
    Utterance,
    state_to_record,
)
from .errors import PccrsError
from .evaluation import IntentionTriple, judge_intention, persuasiveness
from .gateway import LlmGateway

logger = logging.getLogger(__name__)

RATING_STAGES = ("pre", "post")


class MessageIn(BaseModel):
    text: str


class RatingIn(BaseModel):
    item_id: str
    stage: str
    score: int


class AcceptIn(BaseModel):
    item_id: str


@dataclass
class Session:
    id: str
    state: DialogueState
    lock: threading.Lock = field(default_factory=threading.Lock)
    ratings: list[dict] = field(default_factory=list)
    human_persuasiveness: list[dict] = field(default_factory=list)

    def recommended_items(self) -> set[str]:
        return {
            u.item_id
            for u in self.state.utterances
            if u.speaker == SPEAKER_RECOMMENDER and u.item_id is not None
        }


def _action_payload(utterance: Utterance) -> dict:
    trace = utterance.refinement_trace
    return {
        "text": utterance.text,
        "action_kind": utterance.action_kind,
        "item_id": utterance.item_id,
        "strategy": utterance.strategy.primary.value if utterance.strategy else None,
        "refinement_trace": (
            {
                "candidates": list(trace.candidates),
                "candidate_count": len(trace.candidates),
                "critiques": [
                    {"evidence": c.evidence, "credible": c.credible} for c in trace.critiques
                ],
                "stop_reason": trace.stop_reason,
                "iterations_used": trace.iterations_used,
                "synthetic": trace.synthetic,
            }
            if trace
            else None
        ),
    }


def create_app(
    catalog: Catalog | None,
    gateway: LlmGateway | None,
    judge_gateway: LlmGateway | None = None,
    agent_config: AgentConfig | None = None,
    transcript_path: str | Path | None = None,
    static_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="pccrs chat service")
    sessions: dict[str, Session] = {}
    sessions_lock = threading.Lock()
    config = agent_config or AgentConfig()

    def get_session(session_id: str) -> Session:
        with sessions_lock:
            session = sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail="unknown session")
        return session

    def persist(session: Session) -> None:
        if transcript_path is None:
            return
        record = state_to_record(session.state)
        record["session_id"] = session.id
        record["ratings"] = list(session.ratings)
        record["human_persuasiveness"] = list(session.human_persuasiveness)
        with open(transcript_path, "a", encoding="utf-8") as handle:
            handle.write(json.dumps(record, sort_keys=True) + "\n")

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.post("/sessions")
    def create_session() -> dict:
        if catalog is None or gateway is None:
            raise HTTPException(status_code=503, detail="backend-unavailable")
        session = Session(id=uuid.uuid4().hex, state=DialogueState(profile=None))
        agent = CrsAgent(gateway, catalog, config)
        try:
            action = agent.decide(session.state)
        except PccrsError as exc:
            raise HTTPException(status_code=503, detail=f"backend-unavailable: {exc}") from exc
        session.state.utterances.append(
            Utterance(
                index=0,
                speaker=SPEAKER_RECOMMENDER,
                text=action.text,
                action_kind=action.kind,
                item_id=action.item_id,
                strategy=action.strategy,
                refinement_trace=action.trace,
                candidate_ids=list(action.candidate_ids),
            )
        )
        if action.kind == ACTION_RECOMMEND:
            session.state.current_item = action.item_id
        with sessions_lock:
            sessions[session.id] = session
        return {"session_id": session.id, "message": _action_payload(session.state.utterances[0])}

    @app.post("/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageIn) -> dict:
        session = get_session(session_id)
        with session.lock:
            if session.state.terminated:
                raise HTTPException(status_code=409, detail="session-terminated")
            if not body.text.strip():
                raise HTTPException(status_code=422, detail="empty message")
            state = session.state
            state.utterances.append(
                Utterance(index=len(state.utterances), speaker=SPEAKER_SEEKER, text=body.text)
            )
            agent = CrsAgent(gateway, catalog, config)
            try:
                action = agent.decide(state)
            except PccrsError as exc:
                state.utterances.pop()
                raise HTTPException(status_code=502, detail=f"agent failure: {exc}") from exc
            state.utterances.append(
                Utterance(
                    index=len(state.utterances),
                    speaker=SPEAKER_RECOMMENDER,
                    text=action.text,
                    action_kind=action.kind,
                    item_id=action.item_id,
                    strategy=action.strategy,
                    refinement_trace=action.trace,
                    candidate_ids=list(action.candidate_ids),
                )
            )
            if action.kind == ACTION_RECOMMEND:
                state.current_item = action.item_id
            state.exchanges += 1
            return _action_payload(state.utterances[-1])

    @app.post("/sessions/{session_id}/ratings")
    def rate_intention(session_id: str, body: RatingIn) -> dict:
        session = get_session(session_id)
        with session.lock:
            if session.state.terminated:
                raise HTTPException(status_code=409, detail="session-terminated")
            if body.stage not in RATING_STAGES:
                raise HTTPException(status_code=422, detail=f"stage must be one of {RATING_STAGES}")
            if not 1 <= body.score <= 5:
                raise HTTPException(status_code=422, detail="invalid-score: must be 1..5")
            if body.item_id not in session.recommended_items():
                raise HTTPException(status_code=422, detail="unknown-item-in-session")
            session.ratings.append(
                {"item_id": body.item_id, "stage": body.stage, "score": body.score}
            )
            return {"recorded": True, "count": len(session.ratings)}

    def _human_persuasiveness(session: Session) -> list[dict]:
        out = []
        by_item: dict[str, dict[str, int]] = {}
        for rating in session.ratings:
            by_item.setdefault(rating["item_id"], {})[rating["stage"]] = rating["score"]
        for item_id, stages in sorted(by_item.items()):
            if "pre" not in stages or "post" not in stages:
                continue
            entry: dict = {"item_id": item_id, "i_pre": stages["pre"], "i_post": stages["post"]}
            if judge_gateway is not None and catalog is not None and item_id in catalog:
                card = render_item_card(catalog.get(item_id))
                i_true, _evidence = judge_intention(judge_gateway, None, card.text, "full-info")
                entry["i_true"] = i_true
                result = persuasiveness(
                    IntentionTriple(i_pre=stages["pre"], i_post=stages["post"], i_true=i_true)
                )
                entry["persuasiveness"] = result.to_dict()
            out.append(entry)
        return out

    @app.post("/sessions/{session_id}/accept")
    def accept(session_id: str, body: AcceptIn) -> dict:
        session = get_session(session_id)
        with session.lock:
            if session.state.terminated:
                raise HTTPException(status_code=409, detail="session-terminated")
            if body.item_id not in session.recommended_items():
                raise HTTPException(status_code=422, detail="unknown-item-in-session")
            session.state.terminated = True
            session.state.termination = TERMINATION_ACCEPTED
            session.state.accepted_item = body.item_id
            session.human_persuasiveness = _human_persuasiveness(session)
            persist(session)
            return {
                "terminated": True,
                "accepted_item": body.item_id,
                "human_persuasiveness": session.human_persuasiveness,
            }

    @app.get("/sessions/{session_id}")
    def get_session_export(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            state = session.state
            return {
                "session_id": session.id,
                "terminated": state.terminated,
                "termination": state.termination,
                "accepted_item": state.accepted_item,
                "utterances": [
                    {
                        "index": u.index,
                        "speaker": u.speaker,
                        "text": u.text,
                        "action_kind": u.action_kind,
                        "item_id": u.item_id,
                        "strategy": u.strategy.primary.value if u.strategy else None,
                    }
                    for u in state.utterances
                ],
                "ratings": list(session.ratings),
                "human_persuasiveness": list(session.human_persuasiveness),
            }

    @app.get("/sessions/{session_id}/trace")
    def get_trace(session_id: str) -> dict:
        session = get_session(session_id)
        with session.lock:
            annotations = []
            for u in session.state.utterances:
                if u.speaker != SPEAKER_RECOMMENDER or u.refinement_trace is None:
                    continue
                payload = _action_payload(u)
                payload["utterance_index"] = u.index
                del payload["text"]
                annotations.append(payload)
            return {"session_id": session.id, "explanations": annotations}

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="webchat")

    return app
