"""The six credibility-aware persuasive strategies and stage one of the pipeline:
strategy selection followed by candidate explanation generation."""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Sequence

from . import prompts
from .catalog import ItemCard
from .errors import UnknownStrategyError
from .gateway import LlmGateway, user_request


class Route(str, Enum):
    CENTRAL = "central"
    PERIPHERAL = "peripheral"
    COMBINATION = "combination"


class Strategy(str, Enum):
    LOGICAL_APPEAL = "Logical Appeal"
    EMOTION_APPEAL = "Emotion Appeal"
    FRAMING = "Framing"
    EVIDENCE_BASED_PERSUASION = "Evidence-based Persuasion"
    SOCIAL_PROOF = "Social Proof"
    ANCHORING = "Anchoring"


@dataclass(frozen=True)
class StrategyCard:
    name: Strategy
    abbreviation: str
    route: Route
    definition: str
    credible_info: frozenset[str]
    example: str
    prompt_snippet: str


STRATEGY_CARDS: tuple[StrategyCard, ...] = (
    StrategyCard(
        name=Strategy.LOGICAL_APPEAL,
        abbreviation="L.A.",
        route=Route.CENTRAL,
        definition=(
            "Logical Appeal refers to faithfully presenting the logic and reasoning process "
            "of the system to influence people, e.g., describing how a movie's genre is "
            "consistent with user's preference."
        ),
        credible_info=frozenset({"genre"}),
        example=(
            "Since you enjoy romantic dramas, I think you'll like Titanic. As a classic film "
            "in the genre of romance, it's likely to resonate with your viewing preferences."
        ),
        prompt_snippet=(
            "Describe how the recommended movie's genre is consistent with the user's preference."
        ),
    ),
    StrategyCard(
        name=Strategy.EMOTION_APPEAL,
        abbreviation="E.A.",
        route=Route.CENTRAL,
        definition=(
            "Emotion Appeal refers to eliciting specific emotions and sharing credible and "
            "impactful stories to foster trust and deep connection with users, e.g., sharing "
            "a movie's plot to elicit user's emotion."
        ),
        credible_info=frozenset({"plot"}),
        example=(
            "Titanic tells the heart-wrenching love story of Jack and Rose, two young souls "
            "from different worlds who find each other on the ill-fated ship, only to be torn "
            "apart by class differences and a catastrophic event."
        ),
        prompt_snippet=(
            "Sharing the plot and stories in the recommended movie to elicit user's emotions "
            "or support the recommendation."
        ),
    ),
    StrategyCard(
        name=Strategy.FRAMING,
        abbreviation="Fr.",
        route=Route.CENTRAL,
        definition=(
            "Framing refers to emphasizing the positive aspects or outcomes of a decision in "
            "a trustworthy manner, e.g., highlighting the positive experience of watching the movie."
        ),
        credible_info=frozenset({"experience"}),
        example=(
            "You'll appreciate the uplifting and emotional experience that Titanic provides - "
            "a sweeping romance that will leave you feeling inspired and hopeful about the "
            "power of true love."
        ),
        prompt_snippet=(
            "Emphasize the positive aspects, outcomes of watching the recommended movie based "
            "on the genre that matches user's preference."
        ),
    ),
    StrategyCard(
        name=Strategy.EVIDENCE_BASED_PERSUASION,
        abbreviation="E.P.",
        route=Route.PERIPHERAL,
        definition=(
            "Evidence-based Persuasion refers to using empirical data or objective and "
            "verifiable facts to support a claim or decision, e.g., showing awards of a movie."
        ),
        credible_info=frozenset({"awards"}),
        example=(
            "Directed by acclaimed James Cameron and starring Leonardo DiCaprio and Kate "
            "Winslet, Titanic is a cinematic masterpiece that has won 11 Academy Awards and "
            "grossed over $2.1 billion at the box office."
        ),
        prompt_snippet=(
            "Using empirical data and facts such as movie directors and stars to support "
            "your recommendation."
        ),
    ),
    StrategyCard(
        name=Strategy.SOCIAL_PROOF,
        abbreviation="S.P.",
        route=Route.PERIPHERAL,
        definition=(
            "Social Proof refers to emphasizing the behaviors or endorsements of the majority "
            "in real world to support claims, e.g., presenting a movie's rating or reviews."
        ),
        credible_info=frozenset({"rating"}),
        example=(
            "With an incredible 7.9/10 rating from over 1.3 million user reviews on IMDB, and "
            "a 88% fresh rating on Rotten Tomatoes, it's clear that Titanic is a beloved "
            "classic that has captured the hearts of millions - don't miss out on this epic romance!"
        ),
        prompt_snippet=(
            "Highlighting what the majority believes in about the recommended movie by showing "
            "the movie rating and reviews by other users."
        ),
    ),
    StrategyCard(
        name=Strategy.ANCHORING,
        abbreviation="An.",
        route=Route.COMBINATION,
        definition=(
            "Anchoring refers to relying on an initial, credible piece of information as a "
            "reference point to gradually influence or persuade the user, e.g., first showing "
            "a movie's awards to attract users and then describing its genre and plot."
        ),
        credible_info=frozenset({"rating", "genre", "actor"}),
        example=(
            "System: Did you know that Titanic won 11 Academy Awards and grossed over $2.1 "
            "billion at the box office?\n"
            "User: Wow, that's impressive. I've heard great things about it.\n"
            "System: Yeah, and it's not just the box office success. The movie has an epic "
            "romance, stunning visual effects, and memorable performances from Leonardo "
            "DiCaprio and Kate Winslet. Plus, it's a classic romantic drama that has stood "
            "the test of time."
        ),
        prompt_snippet=(
            "Relying on the first piece of information as a reference point to gradually "
            "persuade the user, make sure all the information mentioned is truthful."
        ),
    ),
)

_CARDS_BY_NAME: dict[Strategy, StrategyCard] = {card.name: card for card in STRATEGY_CARDS}

# Canonical ordering used for tie-breaks in analysis tables.
STRATEGY_ORDER: tuple[Strategy, ...] = tuple(card.name for card in STRATEGY_CARDS)


def strategy_catalog() -> list[StrategyCard]:
    return list(STRATEGY_CARDS)


def card_for(name: Strategy) -> StrategyCard:
    return _CARDS_BY_NAME[name]


def _normalize(text: str) -> str:
    return re.sub(r"[^a-z]", "", text.lower())


_NAME_LOOKUP: dict[str, Strategy] = {}
for _card in STRATEGY_CARDS:
    _NAME_LOOKUP[_normalize(_card.name.value)] = _card.name
    _NAME_LOOKUP[_normalize(_card.abbreviation)] = _card.name


def normalize_strategy_name(raw: str) -> Strategy | None:
    """Map a model-produced name (any casing or punctuation) to a card name."""
    if not isinstance(raw, str):
        return None
    return _NAME_LOOKUP.get(_normalize(raw))


@dataclass(frozen=True)
class StrategyChoice:
    """Selector output: the operative strategy plus the full returned list."""

    primary: Strategy
    full_list: tuple[Strategy, ...]
    thinking: str

    def __post_init__(self) -> None:
        if not self.full_list or self.full_list[0] is not self.primary:
            raise ValueError("primary must equal full_list[0]")


def candidate_strategy_block() -> str:
    """The Candidate Strategy section of the selector prompt, all six cards."""
    blocks = [
        f"Strategy Name: {card.name.value}\nDefinition: {card.prompt_snippet}"
        for card in STRATEGY_CARDS
    ]
    return "\n\n".join(blocks)


def strategy_prompt_text(choice: StrategyChoice | None) -> str | None:
    """Text for the <SELECTED_STRATEGY> slot; None means no strategy guidance."""
    if choice is None:
        return None
    card = card_for(choice.primary)
    return f"{card.name.value}: {card.prompt_snippet}"


def select_strategy(gateway: LlmGateway, history: str, card: ItemCard) -> StrategyChoice:
    """Ask the selector for suitable strategies and validate the returned names.

    Only the first valid name becomes operative; the whole validated list is
    kept for analysis.
    """
    del card  # the selector prompt is built from strategies and history only
    prompt = prompts.build_selector_prompt(candidate_strategy_block(), history)
    value = gateway.complete_structured(
        user_request(prompt, call_site="strategy_selector"),
        required_keys=("Thinking", "Strategy"),
    )
    raw_names: Any = value["Strategy"]
    if isinstance(raw_names, str):
        raw_names = [raw_names]
    if not isinstance(raw_names, Sequence):
        raw_names = []
    valid: list[Strategy] = []
    for raw in raw_names:
        name = normalize_strategy_name(raw) if isinstance(raw, str) else None
        if name is not None and name not in valid:
            valid.append(name)
    if not valid:
        raise UnknownStrategyError(f"no valid strategy name in {raw_names!r}")
    return StrategyChoice(primary=valid[0], full_list=tuple(valid), thinking=str(value["Thinking"]))


def generate_candidate(
    gateway: LlmGateway,
    history: str,
    card: ItemCard,
    strategy: StrategyChoice | None,
) -> str:
    """Generate the initial explanation candidate, grounded in the item card."""
    prompt = prompts.build_generator_prompt(history, strategy_prompt_text(strategy), card.text)
    return gateway.complete_text(user_request(prompt, call_site="explanation_generator"))
