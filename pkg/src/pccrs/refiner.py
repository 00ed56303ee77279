"""Stage two of the pipeline: iterative critique and refinement of explanation
candidates until the critic approves or the iteration cap is reached.

The critic sees only the candidate and the item card, never conversation
history, so its verdict is grounded purely in the factual source. The loop
critiques before each refinement; when the cap stops the loop after a
refinement, that last candidate's credibility is unknown, which the trace
exposes through ``final_candidate_critiqued``.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import prompts
from .catalog import ItemCard
from .errors import InvalidBooleanError
from .gateway import LlmGateway, parse_bool, user_request
from .strategies import StrategyChoice, strategy_prompt_text

DEFAULT_MAX_ITERATIONS = 2

STOP_CRITIC_APPROVED = "critic-approved"
STOP_MAX_ITERATIONS = "max-iterations"


@dataclass(frozen=True)
class Critique:
    evidence: str
    credible: bool


@dataclass
class RefinementTrace:
    """The candidate chain c_0..c_K with every critique and the stop reason."""

    candidates: list[str]
    critiques: list[Critique]
    stop_reason: str
    iterations_used: int
    synthetic: bool = False  # True when refinement was disabled and no critic ran

    @property
    def final_candidate_critiqued(self) -> bool:
        return not self.synthetic and len(self.critiques) == len(self.candidates)

    def to_dict(self) -> dict:
        return {
            "candidates": list(self.candidates),
            "critiques": [{"evidence": c.evidence, "credible": c.credible} for c in self.critiques],
            "stop_reason": self.stop_reason,
            "iterations_used": self.iterations_used,
            "synthetic": self.synthetic,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RefinementTrace":
        return cls(
            candidates=list(data["candidates"]),
            critiques=[Critique(c["evidence"], bool(c["credible"])) for c in data["critiques"]],
            stop_reason=data["stop_reason"],
            iterations_used=int(data["iterations_used"]),
            synthetic=bool(data.get("synthetic", False)),
        )


def critique(gateway: LlmGateway, candidate: str, card: ItemCard) -> Critique:
    """Judge whether a candidate contains misinformation relative to the card."""
    if not candidate.strip():
        raise ValueError("candidate must be non-empty")
    prompt = prompts.build_critic_prompt(candidate, card.text)
    value = gateway.complete_structured(
        user_request(prompt, call_site="critic"),
        required_keys=("Evidence", "Credibility"),
    )
    try:
        credible = parse_bool(value["Credibility"])
    except InvalidBooleanError as exc:
        raise InvalidBooleanError(f"critic verdict not boolean: {value['Credibility']!r}") from exc
    return Critique(evidence=str(value["Evidence"]), credible=credible)


def refine(
    gateway: LlmGateway,
    history: str,
    card: ItemCard,
    strategy: StrategyChoice | None,
    candidate: str,
    candidate_critique: Critique,
) -> str:
    """Produce a revised candidate with the critiqued misinformation removed."""
    if candidate_critique.credible:
        raise ValueError("refine requires a critique with credible=False")
    del history  # the refiner prompt grounds on card, candidate and critique only
    prompt = prompts.build_refiner_prompt(
        card.text, candidate, candidate_critique.evidence, strategy_prompt_text(strategy)
    )
    return gateway.complete_text(user_request(prompt, call_site="refiner"))


def refine_loop(
    gateway: LlmGateway,
    history: str,
    card: ItemCard,
    strategy: StrategyChoice | None,
    initial_candidate: str,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
) -> tuple[str, RefinementTrace]:
    """Alternate critique and refinement until approval or the cap.

    Issues at most ``max_iterations`` refine calls and ``max_iterations + 1``
    critic calls. The initial candidate is always critiqued once, even with
    ``max_iterations = 0``.
    """
    if not initial_candidate.strip():
        raise ValueError("initial candidate must be non-empty")
    if max_iterations < 0:
        raise ValueError("max_iterations must be >= 0")

    candidates = [initial_candidate]
    critiques: list[Critique] = []
    stop_reason = STOP_MAX_ITERATIONS
    while True:
        verdict = critique(gateway, candidates[-1], card)
        critiques.append(verdict)
        if verdict.credible:
            stop_reason = STOP_CRITIC_APPROVED
            break
        if len(candidates) - 1 >= max_iterations:
            break
        candidates.append(refine(gateway, history, card, strategy, candidates[-1], verdict))
        if len(candidates) - 1 >= max_iterations:
            # Cap reached right after a refinement; the new candidate goes out unjudged.
            break
    trace = RefinementTrace(
        candidates=candidates,
        critiques=critiques,
        stop_reason=stop_reason,
        iterations_used=len(candidates) - 1,
    )
    return candidates[-1], trace
