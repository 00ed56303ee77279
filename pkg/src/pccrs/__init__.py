"""Persuasive and credible conversational recommender pipeline.

The package wires a strategy-guided explanation generator and an iterative
self-reflective refiner into a full dialogue agent, plus the simulator-based
evaluation harness (LLM-as-judge metrics, recall, success rate) that runs
against either a live chat-completion provider or a deterministic scripted
backend.
"""

__version__ = "0.1.0"

from .agent import AgentAction, AgentConfig, CrsAgent, resolve_title
from .catalog import (
    AttributeGroup,
    Catalog,
    Item,
    ItemCard,
    attribute_match,
    load_catalog,
    render_item_card,
)
from .dialogue import DialogueState, Utterance, render_history, run_dialogue
from .errors import PccrsError
from .evaluation import (
    CredibilityScore,
    DialogueMetrics,
    IntentionTriple,
    PersuasivenessResult,
    aggregate_metrics,
    convincing_acceptance,
    judge_credibility,
    judge_intention,
    persuasiveness,
    recall_at_k,
    success_rate,
)
from .gateway import (
    ChatMessage,
    LiveBackend,
    LlmGateway,
    LlmRequest,
    LlmResponse,
    ScriptedBackend,
    extract_json,
)
from .refiner import Critique, RefinementTrace, critique, refine, refine_loop
from .runner import ExperimentConfig, RunManifest, ablation, plan, run
from .simulator import Persona, SeekerProfile, SeekerTurn, persona_registry, seeker_turn
from .strategies import (
    StrategyCard,
    StrategyChoice,
    Strategy,
    generate_candidate,
    select_strategy,
    strategy_catalog,
)
from .textmetrics import bleu1, relevance_gap, rouge_l, tokenize

__all__ = [
    "AgentAction",
    "AgentConfig",
    "AttributeGroup",
    "Catalog",
    "ChatMessage",
    "CredibilityScore",
    "Critique",
    "CrsAgent",
    "DialogueMetrics",
    "DialogueState",
    "ExperimentConfig",
    "IntentionTriple",
    "Item",
    "ItemCard",
    "LiveBackend",
    "LlmGateway",
    "LlmRequest",
    "LlmResponse",
    "PccrsError",
    "Persona",
    "PersuasivenessResult",
    "RefinementTrace",
    "RunManifest",
    "ScriptedBackend",
    "SeekerProfile",
    "SeekerTurn",
    "Strategy",
    "StrategyCard",
    "StrategyChoice",
    "Utterance",
    "ablation",
    "aggregate_metrics",
    "attribute_match",
    "bleu1",
    "convincing_acceptance",
    "critique",
    "extract_json",
    "generate_candidate",
    "judge_credibility",
    "judge_intention",
    "load_catalog",
    "persona_registry",
    "persuasiveness",
    "plan",
    "recall_at_k",
    "refine",
    "refine_loop",
    "relevance_gap",
    "render_history",
    "render_item_card",
    "resolve_title",
    "rouge_l",
    "run",
    "run_dialogue",
    "seeker_turn",
    "select_strategy",
    "strategy_catalog",
    "success_rate",
    "tokenize",
]
