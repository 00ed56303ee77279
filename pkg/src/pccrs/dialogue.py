"""Dialogue state, the conversation protocol, and transcript serialization.

One exchange is one recommender utterance followed by one seeker utterance;
a dialogue ends when the seeker accepts or the exchange budget runs out. The
alternative reading of the turn budget (counting single utterances) stays
selectable through ``turn_unit``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .errors import PccrsError
from .refiner import RefinementTrace
from .simulator import SeekerProfile, seeker_turn
from .strategies import Strategy, StrategyChoice

logger = logging.getLogger(__name__)

SPEAKER_RECOMMENDER = "recommender"
SPEAKER_SEEKER = "seeker"

TERMINATION_ACCEPTED = "accepted"
TERMINATION_MAX_TURNS = "max-turns"

DEFAULT_MAX_TURNS = 10

PROTOCOL_ERROR_ACCEPT_WITHOUT_REC = "accepted-without-recommendation"


@dataclass
class Utterance:
    index: int
    speaker: str
    text: str
    action_kind: str | None = None
    item_id: str | None = None
    strategy: StrategyChoice | None = None
    refinement_trace: RefinementTrace | None = None
    candidate_ids: list[str] | None = None
    feeling: str | None = None


@dataclass
class DialogueState:
    profile: SeekerProfile | None
    utterances: list[Utterance] = field(default_factory=list)
    current_item: str | None = None
    exchanges: int = 0
    terminated: bool = False
    termination: str | None = None
    accepted_item: str | None = None
    protocol_error: str | None = None
    failure: str | None = None


def render_history(state: DialogueState) -> str:
    """Visible texts only; feelings and traces never appear here."""
    labels = {SPEAKER_RECOMMENDER: "Recommender", SPEAKER_SEEKER: "Seeker"}
    return "\n".join(f"{labels[u.speaker]}: {u.text}" for u in state.utterances)


def _append(state: DialogueState, utterance: Utterance) -> None:
    state.utterances.append(utterance)


def run_dialogue(
    profile: SeekerProfile,
    agent,
    seeker_gateway,
    max_turns: int = DEFAULT_MAX_TURNS,
    turn_unit: str = "exchange",
) -> DialogueState:
    """Run one full recommender/seeker dialogue.

    The recommender opens. Module errors abort the dialogue and leave a
    failure note on the state; the partial transcript is retained.
    """
    if turn_unit not in ("exchange", "utterance"):
        raise ValueError(f"unknown turn_unit {turn_unit!r}")
    state = DialogueState(profile=profile)
    try:
        while True:
            action = agent.decide(state)
            _append(
                state,
                Utterance(
                    index=len(state.utterances),
                    speaker=SPEAKER_RECOMMENDER,
                    text=action.text,
                    action_kind=action.kind,
                    item_id=action.item_id,
                    strategy=action.strategy,
                    refinement_trace=action.trace,
                    candidate_ids=list(action.candidate_ids),
                ),
            )
            if action.kind == "recommend":
                state.current_item = action.item_id
            if turn_unit == "utterance" and len(state.utterances) >= max_turns:
                state.terminated = True
                state.termination = TERMINATION_MAX_TURNS
                break

            turn = seeker_turn(seeker_gateway, render_history(state), profile)
            _append(
                state,
                Utterance(
                    index=len(state.utterances),
                    speaker=SPEAKER_SEEKER,
                    text=turn.utterance,
                    feeling=turn.feeling,
                ),
            )
            state.exchanges += 1
            if turn.accepted:
                state.terminated = True
                state.termination = TERMINATION_ACCEPTED
                state.accepted_item = state.current_item
                if state.current_item is None:
                    state.protocol_error = PROTOCOL_ERROR_ACCEPT_WITHOUT_REC
                    logger.warning("seeker accepted before any recommendation (%s)", profile.key)
                break
            budget = len(state.utterances) if turn_unit == "utterance" else state.exchanges
            if budget >= max_turns:
                state.terminated = True
                state.termination = TERMINATION_MAX_TURNS
                break
    except PccrsError as exc:
        state.failure = f"{type(exc).__name__}: {exc}"
        logger.error("dialogue %s aborted: %s", profile.key, state.failure)
    return state


def strategy_to_dict(choice: StrategyChoice | None) -> dict | None:
    if choice is None:
        return None
    return {
        "primary": choice.primary.value,
        "full_list": [name.value for name in choice.full_list],
        "thinking": choice.thinking,
    }


def strategy_from_dict(data: dict | None) -> StrategyChoice | None:
    if data is None:
        return None
    return StrategyChoice(
        primary=Strategy(data["primary"]),
        full_list=tuple(Strategy(name) for name in data["full_list"]),
        thinking=data["thinking"],
    )


def utterance_to_dict(utterance: Utterance) -> dict:
    return {
        "index": utterance.index,
        "speaker": utterance.speaker,
        "text": utterance.text,
        "action_kind": utterance.action_kind,
        "item_id": utterance.item_id,
        "strategy": strategy_to_dict(utterance.strategy),
        "refinement_trace": (
            utterance.refinement_trace.to_dict() if utterance.refinement_trace else None
        ),
        "candidate_ids": utterance.candidate_ids,
        "feeling": utterance.feeling,
    }


def utterance_from_dict(data: dict) -> Utterance:
    trace = data.get("refinement_trace")
    return Utterance(
        index=int(data["index"]),
        speaker=data["speaker"],
        text=data["text"],
        action_kind=data.get("action_kind"),
        item_id=data.get("item_id"),
        strategy=strategy_from_dict(data.get("strategy")),
        refinement_trace=RefinementTrace.from_dict(trace) if trace else None,
        candidate_ids=data.get("candidate_ids"),
        feeling=data.get("feeling"),
    )


def profile_to_dict(profile: SeekerProfile | None) -> dict | None:
    if profile is None:
        return None
    return {
        "persona": profile.persona.name,
        "persona_description": profile.persona.description,
        "group": {"id": profile.group.id, "attributes": sorted(profile.group.attributes)},
    }


def profile_from_dict(data: dict | None) -> SeekerProfile | None:
    if data is None:
        return None
    from .catalog import AttributeGroup
    from .simulator import Persona

    return SeekerProfile(
        persona=Persona(data["persona"], data.get("persona_description", "")),
        group=AttributeGroup.of(data["group"]["id"], data["group"]["attributes"]),
    )


def state_to_record(state: DialogueState) -> dict:
    """Transcript record; the runner adds fingerprint and judgments on top."""
    return {
        "profile": profile_to_dict(state.profile),
        "utterances": [utterance_to_dict(u) for u in state.utterances],
        "exchanges": state.exchanges,
        "terminated": state.terminated,
        "termination": state.termination,
        "current_item": state.current_item,
        "accepted_item": state.accepted_item,
        "protocol_error": state.protocol_error,
        "failure": state.failure,
    }


def state_from_record(record: dict) -> DialogueState:
    return DialogueState(
        profile=profile_from_dict(record.get("profile")),
        utterances=[utterance_from_dict(u) for u in record.get("utterances", [])],
        current_item=record.get("current_item"),
        exchanges=int(record.get("exchanges", 0)),
        terminated=bool(record.get("terminated", False)),
        termination=record.get("termination"),
        accepted_item=record.get("accepted_item"),
        protocol_error=record.get("protocol_error"),
        failure=record.get("failure"),
    )


def seeker_texts(state: DialogueState, before_index: int | None = None) -> list[str]:
    """Seeker utterances, optionally only those preceding an utterance index."""
    out = []
    for u in state.utterances:
        if before_index is not None and u.index >= before_index:
            break
        if u.speaker == SPEAKER_SEEKER:
            out.append(u.text)
    return out
