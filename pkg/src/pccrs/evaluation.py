"""LLM-as-judge scoring and all aggregate metrics.

Persuasiveness normalizes the lift between a title-only intention and the
post-explanation intention by the headroom up to the full-information
intention; triples outside the meaningful region are reported undefined
rather than clamped, so every defined value lies in [0, 1].
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from statistics import mean
from typing import Sequence

from . import prompts
from .agent import ACTION_EXPLAIN, ACTION_RECOMMEND, strip_exp_token
from .catalog import Catalog, ItemCard, attribute_match, render_item_card
from .dialogue import SPEAKER_RECOMMENDER, DialogueState
from .errors import ContractViolationError, NoRecommendationTurnError, OutOfRangeScoreError
from .gateway import LlmGateway, user_request
from .simulator import SeekerProfile

logger = logging.getLogger(__name__)

RUBRIC_STAGES = ("title-only", "explanation", "full-info")

RECALL_KS = (1, 5, 10)

EXCLUSION_NONE = "none"
EXCLUSION_POST_EXCEEDS_TRUE = "post-exceeds-true"
EXCLUSION_TRUE_EQUALS_PRE = "true-equals-pre"
EXCLUSION_POST_BELOW_PRE = "post-below-pre"

BAND_LOW = "low"
BAND_MID = "mid"
BAND_HIGH = "high"

_GENERIC_PROFILE = "A movie viewer with no fixed preferences."
_GENERIC_GROUP = "any genres you like"


@dataclass(frozen=True)
class IntentionTriple:
    i_pre: int
    i_post: int
    i_true: int
    evidence_pre: str = ""
    evidence_post: str = ""
    evidence_true: str = ""

    def __post_init__(self) -> None:
        for score in (self.i_pre, self.i_post, self.i_true):
            if not 1 <= score <= 5:
                raise ValueError(f"intention score {score} outside 1..5")


@dataclass(frozen=True)
class PersuasivenessResult:
    value: float | None
    defined: bool
    exclusion_reason: str = EXCLUSION_NONE

    def to_dict(self) -> dict:
        return {"value": self.value, "defined": self.defined, "exclusion_reason": self.exclusion_reason}


@dataclass(frozen=True)
class CredibilityScore:
    score: int
    evidence: str

    @property
    def band(self) -> str:
        return score_band(self.score)

    def to_dict(self) -> dict:
        return {"score": self.score, "evidence": self.evidence, "band": self.band}


def score_band(score: float) -> str:
    if score < 3:
        return BAND_LOW
    if score > 3:
        return BAND_HIGH
    return BAND_MID


def persuasiveness(triple: IntentionTriple) -> PersuasivenessResult:
    """Normalized intention lift; undefined outside its meaningful region."""
    if triple.i_post > triple.i_true:
        return PersuasivenessResult(None, False, EXCLUSION_POST_EXCEEDS_TRUE)
    if triple.i_true == triple.i_pre:
        return PersuasivenessResult(None, False, EXCLUSION_TRUE_EQUALS_PRE)
    if triple.i_post < triple.i_pre:
        return PersuasivenessResult(None, False, EXCLUSION_POST_BELOW_PRE)
    value = 1.0 - (triple.i_true - triple.i_post) / (triple.i_true - triple.i_pre)
    return PersuasivenessResult(value, True)


def _profile_texts(profile: SeekerProfile | None) -> tuple[str, str]:
    if profile is None:
        return _GENERIC_PROFILE, _GENERIC_GROUP
    return profile.persona.description, profile.group.render()


def judge_intention(
    gateway: LlmGateway,
    profile: SeekerProfile | None,
    stimulus: str,
    rubric_stage: str,
) -> tuple[int, str]:
    """Score watching intention (1..5) for a stage-appropriate stimulus.

    Out-of-range integers are clamped into 1..5 with a logged warning.
    """
    if rubric_stage not in RUBRIC_STAGES:
        raise ValueError(f"unknown rubric stage {rubric_stage!r}")
    if not stimulus.strip():
        raise ValueError("stimulus must be non-empty")
    profile_text, group_text = _profile_texts(profile)
    prompt = prompts.build_watching_intention_prompt(profile_text, group_text, stimulus)
    value = gateway.complete_structured(
        user_request(prompt, call_site="judge_intention"),
        required_keys=("Evidence", "Watching Intention"),
    )
    raw = value["Watching Intention"]
    try:
        score = int(raw)
    except (TypeError, ValueError) as exc:
        raise ContractViolationError(
            f"watching intention {raw!r} is not an integer", [str(value)]
        ) from exc
    clamped = max(1, min(5, score))
    if clamped != score:
        logger.warning("intention score %d clamped to %d (stage %s)", score, clamped, rubric_stage)
    return clamped, str(value["Evidence"])


def judge_credibility(gateway: LlmGateway, explanation: str, card: ItemCard) -> CredibilityScore:
    """Score explanation credibility (1..5) against the item card."""
    cleaned = strip_exp_token(explanation)
    if not cleaned.strip():
        raise ValueError("explanation must be non-empty")
    prompt = prompts.build_credibility_prompt(cleaned, card.text)
    value = gateway.complete_structured(
        user_request(prompt, call_site="judge_credibility"),
        required_keys=("Evidence", "Credibility"),
    )
    raw = value["Credibility"]
    try:
        score = int(raw)
    except (TypeError, ValueError) as exc:
        raise ContractViolationError(f"credibility {raw!r} is not an integer", [str(value)]) from exc
    if not 1 <= score <= 5:
        raise OutOfRangeScoreError(f"credibility score {score} outside 1..5")
    return CredibilityScore(score=score, evidence=str(value["Evidence"]))


@dataclass
class EvaluationRecord:
    """Per-explanation judgments."""

    utterance_index: int
    item_id: str
    triple: IntentionTriple
    persuasion: PersuasivenessResult
    credibility: CredibilityScore

    def to_dict(self) -> dict:
        return {
            "utterance_index": self.utterance_index,
            "item_id": self.item_id,
            "i_pre": self.triple.i_pre,
            "i_post": self.triple.i_post,
            "i_true": self.triple.i_true,
            "evidence_pre": self.triple.evidence_pre,
            "evidence_post": self.triple.evidence_post,
            "evidence_true": self.triple.evidence_true,
            "persuasiveness": self.persuasion.to_dict(),
            "credibility": self.credibility.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EvaluationRecord":
        triple = IntentionTriple(
            i_pre=int(data["i_pre"]),
            i_post=int(data["i_post"]),
            i_true=int(data["i_true"]),
            evidence_pre=data.get("evidence_pre", ""),
            evidence_post=data.get("evidence_post", ""),
            evidence_true=data.get("evidence_true", ""),
        )
        return cls(
            utterance_index=int(data["utterance_index"]),
            item_id=data["item_id"],
            triple=triple,
            persuasion=persuasiveness(triple),
            credibility=CredibilityScore(
                score=int(data["credibility"]["score"]), evidence=data["credibility"].get("evidence", "")
            ),
        )


@dataclass
class DialogueMetrics:
    """Judgments and derived per-dialogue quantities for one transcript."""

    profile_key: str | None
    records: list[EvaluationRecord]
    accepted: bool
    accepted_item: str | None
    accepted_item_match: bool
    has_recommendation: bool
    recall_hits: dict[int, bool]

    @property
    def credibility_mean(self) -> float | None:
        if not self.records:
            return None
        return mean(r.credibility.score for r in self.records)

    @property
    def persuasiveness_mean(self) -> float | None:
        defined = [r.persuasion.value for r in self.records if r.persuasion.defined]
        return mean(defined) if defined else None

    @property
    def accepted_item_credibility_mean(self) -> float | None:
        if self.accepted_item is None:
            return None
        scores = [r.credibility.score for r in self.records if r.item_id == self.accepted_item]
        return mean(scores) if scores else None

    def to_dict(self) -> dict:
        return {
            "profile_key": self.profile_key,
            "records": [r.to_dict() for r in self.records],
            "accepted": self.accepted,
            "accepted_item": self.accepted_item,
            "accepted_item_match": self.accepted_item_match,
            "has_recommendation": self.has_recommendation,
            "recall_hits": {str(k): v for k, v in sorted(self.recall_hits.items())},
            "credibility_mean": self.credibility_mean,
            "persuasiveness_mean": self.persuasiveness_mean,
            "accepted_item_credibility_mean": self.accepted_item_credibility_mean,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DialogueMetrics":
        return cls(
            profile_key=data.get("profile_key"),
            records=[EvaluationRecord.from_dict(r) for r in data.get("records", [])],
            accepted=bool(data["accepted"]),
            accepted_item=data.get("accepted_item"),
            accepted_item_match=bool(data.get("accepted_item_match", False)),
            has_recommendation=bool(data.get("has_recommendation", False)),
            recall_hits={int(k): bool(v) for k, v in data.get("recall_hits", {}).items()},
        )


def recall_hit(ranking: Sequence[str], catalog: Catalog, group, k: int) -> bool:
    """True iff any of the top-k ranked items covers all preferred attributes."""
    for item_id in ranking[:k]:
        if item_id in catalog and attribute_match(catalog.get(item_id), group):
            return True
    return False


def _last_recommendation_ranking(state: DialogueState) -> list[str] | None:
    ranking = None
    for utterance in state.utterances:
        if utterance.speaker == SPEAKER_RECOMMENDER and utterance.action_kind == ACTION_RECOMMEND:
            ranking = utterance.candidate_ids or []
    return ranking


def recall_at_k(state: DialogueState, catalog: Catalog, k: int) -> bool:
    """Hit test against the candidate ranking at the last recommendation turn."""
    ranking = _last_recommendation_ranking(state)
    if ranking is None:
        raise NoRecommendationTurnError("dialogue has no recommendation turn")
    if state.profile is None:
        raise ValueError("recall needs a seeker profile with an attribute group")
    return recall_hit(ranking, catalog, state.profile.group, k)


def evaluate_dialogue(
    state: DialogueState,
    catalog: Catalog,
    judge_gateway: LlmGateway,
    ks: Sequence[int] = RECALL_KS,
) -> DialogueMetrics:
    """Judge every explanation turn and derive the per-dialogue quantities.

    Title-only and full-information intentions are judged once per item and
    shared across that item's explanations.
    """
    profile = state.profile
    pre_cache: dict[str, tuple[int, str]] = {}
    true_cache: dict[str, tuple[int, str]] = {}
    records: list[EvaluationRecord] = []
    for utterance in state.utterances:
        if utterance.speaker != SPEAKER_RECOMMENDER or utterance.action_kind != ACTION_EXPLAIN:
            continue
        item = catalog.get(utterance.item_id)
        card = render_item_card(item)
        explanation = strip_exp_token(utterance.text)
        if item.id not in pre_cache:
            pre_cache[item.id] = judge_intention(judge_gateway, profile, item.title, "title-only")
        if item.id not in true_cache:
            true_cache[item.id] = judge_intention(judge_gateway, profile, card.text, "full-info")
        i_pre, evidence_pre = pre_cache[item.id]
        i_post, evidence_post = judge_intention(judge_gateway, profile, explanation, "explanation")
        i_true, evidence_true = true_cache[item.id]
        triple = IntentionTriple(
            i_pre=i_pre,
            i_post=i_post,
            i_true=i_true,
            evidence_pre=evidence_pre,
            evidence_post=evidence_post,
            evidence_true=evidence_true,
        )
        records.append(
            EvaluationRecord(
                utterance_index=utterance.index,
                item_id=item.id,
                triple=triple,
                persuasion=persuasiveness(triple),
                credibility=judge_credibility(judge_gateway, explanation, card),
            )
        )

    last_ranking = _last_recommendation_ranking(state)
    recall_hits: dict[int, bool] = {}
    if last_ranking is not None and profile is not None:
        recall_hits = {k: recall_hit(last_ranking, catalog, profile.group, k) for k in ks}

    accepted = state.termination == "accepted"
    accepted_item_match = False
    if state.accepted_item is not None and profile is not None and state.accepted_item in catalog:
        accepted_item_match = attribute_match(catalog.get(state.accepted_item), profile.group)

    return DialogueMetrics(
        profile_key=profile.key if profile else None,
        records=records,
        accepted=accepted,
        accepted_item=state.accepted_item,
        accepted_item_match=accepted_item_match,
        has_recommendation=last_ranking is not None,
        recall_hits=recall_hits,
    )


def convincing_acceptance(dialogues: Sequence[DialogueMetrics]) -> float | None:
    """Share of accepted dialogues whose accepted-item explanations kept a
    high-band mean credibility; undefined with zero acceptances."""
    accepted = [d for d in dialogues if d.accepted]
    if not accepted:
        return None
    convincing = 0
    for d in accepted:
        cred = d.accepted_item_credibility_mean
        if cred is not None and score_band(cred) == BAND_HIGH:
            convincing += 1
    return 100.0 * convincing / len(accepted)


def aggregate_recall(dialogues: Sequence[DialogueMetrics], k: int) -> tuple[float | None, int]:
    """Mean hit rate over dialogues with a recommendation turn.

    Returns the rate and the count of excluded dialogues (no recommendation).
    """
    eligible = [d for d in dialogues if d.has_recommendation]
    excluded = len(dialogues) - len(eligible)
    if not eligible:
        return None, excluded
    return mean(1.0 if d.recall_hits.get(k, False) else 0.0 for d in eligible), excluded


def success_rate(dialogues: Sequence[DialogueMetrics]) -> float | None:
    """Fraction of dialogues accepted with an item covering all preferred attributes."""
    if not dialogues:
        return None
    return mean(1.0 if (d.accepted and d.accepted_item_match) else 0.0 for d in dialogues)


def aggregate_metrics(dialogues: Sequence[DialogueMetrics], ks: Sequence[int] = RECALL_KS) -> dict:
    """The metrics-report payload, aggregating a full batch of dialogues."""
    all_records = [r for d in dialogues for r in d.records]
    defined_values = [r.persuasion.value for r in all_records if r.persuasion.defined]
    per_dialogue = [d.persuasiveness_mean for d in dialogues if d.persuasiveness_mean is not None]
    exclusions: dict[str, int] = {
        EXCLUSION_POST_EXCEEDS_TRUE: 0,
        EXCLUSION_TRUE_EQUALS_PRE: 0,
        EXCLUSION_POST_BELOW_PRE: 0,
    }
    for record in all_records:
        if not record.persuasion.defined:
            exclusions[record.persuasion.exclusion_reason] += 1
    recall: dict[str, float | None] = {}
    no_recommendation = 0
    for k in ks:
        rate, excluded = aggregate_recall(dialogues, k)
        recall[str(k)] = rate
        no_recommendation = excluded
    credibility_scores = [r.credibility.score for r in all_records]
    return {
        "persuasiveness": {
            "per_explanation_mean": mean(defined_values) if defined_values else None,
            "per_dialogue_mean": mean(per_dialogue) if per_dialogue else None,
        },
        "credibility_mean": mean(credibility_scores) if credibility_scores else None,
        "convincing_acceptance": convincing_acceptance(dialogues),
        "recall": recall,
        "success_rate": success_rate(dialogues),
        "counts": {
            "dialogues": len(dialogues),
            "accepted": sum(1 for d in dialogues if d.accepted),
            "explanations": len(all_records),
            "defined_persuasiveness": len(defined_values),
            "no_recommendation": no_recommendation,
        },
        "exclusions": exclusions,
    }
