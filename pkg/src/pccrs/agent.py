"""The recommender's turn policy: ask for preferences, recommend an item from
the retrieved candidates, or explain the current recommendation through the
two-stage generation pipeline."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from . import prompts
from .catalog import Catalog, Item, render_item_card
from .dialogue import SPEAKER_SEEKER, DialogueState, render_history
from .errors import AmbiguousTitleError, NoCurrentItemError, UnresolvableTitleError
from .gateway import LlmGateway, user_request
from .refiner import DEFAULT_MAX_ITERATIONS, STOP_CRITIC_APPROVED, RefinementTrace, refine_loop
from .strategies import StrategyChoice, generate_candidate, select_strategy

REC_TOKEN = "[REC]"
EXP_TOKEN = "[EXP]"

ACTION_ASK = "ask"
ACTION_RECOMMEND = "recommend"
ACTION_EXPLAIN = "explain"

_YEAR_SUFFIX = re.compile(r"\s*\(\d{4}\)\s*$")


@dataclass
class AgentConfig:
    retrieval_k: int = 10
    enable_strategies: bool = True
    enable_refinement: bool = True
    max_refine_iterations: int = DEFAULT_MAX_ITERATIONS

    def __post_init__(self) -> None:
        if self.retrieval_k < 1:
            raise ValueError("retrieval_k must be >= 1")


@dataclass
class AgentAction:
    """One recommender turn with its full annotations."""

    kind: str
    text: str
    item_id: str | None = None
    strategy: StrategyChoice | None = None
    trace: RefinementTrace | None = None
    candidate_ids: list[str] = field(default_factory=list)


def trailing_token(text: str) -> str | None:
    stripped = text.rstrip()
    upper = stripped.upper()
    if upper.endswith(REC_TOKEN):
        return ACTION_RECOMMEND
    if upper.endswith(EXP_TOKEN):
        return ACTION_EXPLAIN
    return None


def strip_exp_token(text: str) -> str:
    stripped = text.rstrip()
    if stripped.upper().endswith(EXP_TOKEN):
        stripped = stripped[: -len(EXP_TOKEN)].rstrip()
    return stripped


def title_line(item: Item) -> str:
    return f"{item.title} ({item.year})" if item.year is not None else item.title


def resolve_title(mention: str, candidates: list[Item]) -> str:
    """Match a candidate title inside the mention; the longest title wins.

    Year suffixes like "(1997)" on catalog titles are ignored during matching.
    """
    if not candidates:
        raise ValueError("candidates must be non-empty")
    mention_cf = mention.casefold()
    matches: list[tuple[int, Item]] = []
    for item in candidates:
        stripped = _YEAR_SUFFIX.sub("", item.title).strip()
        if stripped and stripped.casefold() in mention_cf:
            matches.append((len(stripped), item))
    if not matches:
        raise UnresolvableTitleError(f"no candidate title found in {mention!r}")
    longest = max(length for length, _ in matches)
    top = [item for length, item in matches if length == longest]
    distinct_ids = {item.id for item in top}
    if len(distinct_ids) > 1:
        raise AmbiguousTitleError(
            f"titles {sorted(item.title for item in top)} all match {mention!r}"
        )
    return top[0].id


class CrsAgent:
    """One agent instance per dialogue session."""

    def __init__(self, gateway: LlmGateway, catalog: Catalog, config: AgentConfig | None = None):
        self.gateway = gateway
        self.catalog = catalog
        self.config = config or AgentConfig()

    def decide(self, state: DialogueState) -> AgentAction:
        """Run one recommender turn against the current dialogue state."""
        if state.terminated:
            raise ValueError("dialogue already terminated")
        query = " ".join(u.text for u in state.utterances if u.speaker == SPEAKER_SEEKER)
        candidate_ids = self.catalog.retrieve(query, self.config.retrieval_k)
        candidates = [self.catalog.get(item_id) for item_id in candidate_ids]
        item_list = "\n".join(title_line(item) for item in candidates)
        prompt = prompts.build_recommendation_prompt(item_list, render_history(state))
        text = self.gateway.complete_text(user_request(prompt, call_site="recommender"))

        kind = trailing_token(text)
        if kind == ACTION_RECOMMEND:
            item_id = resolve_title(text, candidates)
            return AgentAction(
                kind=ACTION_RECOMMEND, text=text, item_id=item_id, candidate_ids=candidate_ids
            )
        if kind == ACTION_EXPLAIN:
            if state.current_item is None:
                raise NoCurrentItemError("explanation requested before any recommendation")
            final, choice, trace = self.explain(state, self.catalog.get(state.current_item))
            return AgentAction(
                kind=ACTION_EXPLAIN,
                text=final,
                item_id=state.current_item,
                strategy=choice,
                trace=trace,
                candidate_ids=candidate_ids,
            )
        return AgentAction(kind=ACTION_ASK, text=text, candidate_ids=candidate_ids)

    def explain(
        self, state: DialogueState, item: Item
    ) -> tuple[str, StrategyChoice | None, RefinementTrace]:
        """Stage one plus stage two for the given item; text carries the [EXP] token."""
        card = render_item_card(item)
        history = render_history(state)
        choice: StrategyChoice | None = None
        if self.config.enable_strategies:
            choice = select_strategy(self.gateway, history, card)
        candidate = generate_candidate(self.gateway, history, card, choice)
        if self.config.enable_refinement:
            final, trace = refine_loop(
                self.gateway, history, card, choice, candidate, self.config.max_refine_iterations
            )
        else:
            final = candidate
            trace = RefinementTrace(
                candidates=[candidate],
                critiques=[],
                stop_reason=STOP_CRITIC_APPROVED,
                iterations_used=0,
                synthetic=True,
            )
        return f"{final} {EXP_TOKEN}", choice, trace
