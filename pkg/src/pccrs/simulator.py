"""Persona- and attribute-conditioned simulated seeker.

Each seeker turn is two completions: an internal feeling (kept as a hidden
annotation) and the outward reply. Acceptance is an [END] token in the reply,
detected case-insensitively anywhere in the text since models drift from the
"at the end" instruction.

Persona description texts are project-authored defaults; pass a definitions
file to substitute your own.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import yaml

from . import prompts
from .catalog import AttributeGroup
from .gateway import LlmGateway, user_request

PERSONA_NAMES = (
    "Anticipation",
    "Boredom",
    "Confusion",
    "Curiosity",
    "Delight",
    "Disappointment",
    "Excitement",
    "Frustration",
    "Indifference",
    "Satisfaction",
    "Surprise",
    "Trust",
)

_DEFAULT_DESCRIPTIONS = {
    "Anticipation": (
        "You eagerly look forward to new recommendations and speculate hopefully about "
        "how much you will enjoy them."
    ),
    "Boredom": (
        "You are listless and hard to impress, responding with little enthusiasm unless "
        "something truly grabs you."
    ),
    "Confusion": (
        "You get mixed up easily, often ask for clarification, and need things explained "
        "in simple terms."
    ),
    "Curiosity": (
        "You are inquisitive and ask lots of questions, wanting to uncover every "
        "interesting detail about a movie."
    ),
    "Delight": (
        "You take visible joy in pleasant discoveries and express warm appreciation when "
        "a suggestion fits you."
    ),
    "Disappointment": (
        "You have been let down by recommendations before and voice dissatisfaction when "
        "expectations are not met."
    ),
    "Excitement": (
        "You are energetic and expressive, reacting with bursts of enthusiasm to "
        "appealing suggestions."
    ),
    "Frustration": (
        "You are easily annoyed by irrelevant suggestions and let the recommender know "
        "when the conversation stalls."
    ),
    "Indifference": (
        "You are detached and noncommittal, rarely showing strong feelings about any "
        "suggestion."
    ),
    "Satisfaction": (
        "You are content and agreeable, acknowledging good suggestions calmly and "
        "positively."
    ),
    "Surprise": (
        "You react with astonishment to unexpected information and enjoy being caught "
        "off guard by novel picks."
    ),
    "Trust": (
        "You place confidence in the recommender's judgment and are inclined to believe "
        "what you are told."
    ),
}

ACCEPT_TOKEN = "[END]"
_ACCEPT_RE = re.compile(re.escape(ACCEPT_TOKEN), re.IGNORECASE)


@dataclass(frozen=True)
class Persona:
    name: str
    description: str


@dataclass(frozen=True)
class SeekerProfile:
    persona: Persona
    group: AttributeGroup

    @property
    def key(self) -> str:
        return f"{self.persona.name}|{self.group.id}"


@dataclass(frozen=True)
class SeekerTurn:
    feeling: str
    utterance: str
    accepted: bool


def persona_registry(definitions_file: str | Path | None = None) -> dict[str, Persona]:
    """The twelve personas, optionally with descriptions loaded from a file."""
    descriptions = dict(_DEFAULT_DESCRIPTIONS)
    if definitions_file is not None:
        raw = Path(definitions_file).read_text(encoding="utf-8")
        loaded = yaml.safe_load(raw) if str(definitions_file).endswith((".yaml", ".yml")) else json.loads(raw)
        for name, text in (loaded or {}).items():
            if name in descriptions:
                descriptions[name] = str(text)
    return {name: Persona(name, descriptions[name]) for name in PERSONA_NAMES}


def get_persona(name: str, definitions_file: str | Path | None = None) -> Persona:
    registry = persona_registry(definitions_file)
    if name not in registry:
        raise KeyError(f"unknown persona {name!r}; expected one of {PERSONA_NAMES}")
    return registry[name]


def contains_accept_token(text: str) -> bool:
    return bool(_ACCEPT_RE.search(text))


def feel(gateway: LlmGateway, history: str, profile: SeekerProfile) -> str:
    """First completion of a seeker turn: the internal monologue."""
    if not history.strip():
        raise ValueError("feeling step needs a non-empty history")
    prompt = prompts.build_feeling_prompt(
        profile.persona.description, profile.group.render(), history
    )
    return gateway.complete_text(user_request(prompt, call_site="seeker_feeling"))


def respond(gateway: LlmGateway, history: str, feeling: str, profile: SeekerProfile) -> SeekerTurn:
    """Second completion: the outward reply, with acceptance detection."""
    if not feeling.strip():
        raise ValueError("respond needs a non-empty feeling")
    prompt = prompts.build_response_prompt(
        profile.persona.description, profile.group.render(), history, feeling
    )
    utterance = gateway.complete_text(user_request(prompt, call_site="seeker_response"))
    return SeekerTurn(feeling=feeling, utterance=utterance, accepted=contains_accept_token(utterance))


def seeker_turn(gateway: LlmGateway, history: str, profile: SeekerProfile) -> SeekerTurn:
    """One full seeker turn: feeling then reply (exactly two completions)."""
    feeling = feel(gateway, history, profile)
    return respond(gateway, history, feeling, profile)
