"""Shared fixtures: a tiny movie catalog, scripted gateways, and the golden
four-profile experiment script used by the determinism tests."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest
import yaml

from pccrs.catalog import AttributeGroup, Catalog, Item
from pccrs.gateway import LlmGateway, LlmRequest, LlmResponse, ScriptedBackend
from pccrs.runner import ExperimentConfig
from pccrs.simulator import Persona, SeekerProfile


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """Print one pass/fail line per acceptance criterion."""
    outcome = yield
    report = outcome.get_result()
    label = getattr(item.function, "_criterion", None)
    if label and report.when == "call":
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        print(f"[{status}] {label}", file=sys.stderr)


def criterion(label: str):
    def mark(fn):
        fn._criterion = label
        return fn

    return mark


def make_items() -> list[Item]:
    return [
        Item(
            id="m1",
            title="Titanic",
            year=1997,
            genres={"romance", "drama"},
            plot="A young couple from different classes fall in love aboard an ill-fated ship.",
            director="James Cameron",
            actors=["Leonardo DiCaprio", "Kate Winslet"],
            rating_value=7.9,
            rating_count=1300000,
            awards="Won 11 Academy Awards",
        ),
        Item(
            id="m2",
            title="Space Laughs",
            year=2020,
            genres={"comedy", "sci-fi"},
            plot="A crew of misfit astronauts bumbles through first contact.",
            rating_value=7.1,
        ),
        Item(
            id="m3",
            title="The Room",
            year=2003,
            genres={"drama"},
            plot="A banker's life unravels in baffling ways.",
        ),
        Item(
            id="m4",
            title="Room",
            year=2015,
            genres={"drama", "thriller"},
            plot="A mother and her son escape captivity.",
        ),
        Item(
            id="m5",
            title="Mission: Impossible",
            year=1996,
            genres={"action", "thriller"},
            plot="An agent goes rogue to uncover a mole.",
            rating_value=7.2,
        ),
    ]


@pytest.fixture
def items() -> list[Item]:
    return make_items()


@pytest.fixture
def catalog(items) -> Catalog:
    return Catalog(items)


@pytest.fixture
def catalog_file(tmp_path) -> Path:
    return write_catalog_file(tmp_path / "catalog.jsonl")


def write_catalog_file(path: Path) -> Path:
    records = []
    for item in make_items():
        records.append(
            {
                "id": item.id,
                "title": item.title,
                "year": item.year,
                "genres": sorted(item.genres),
                "plot": item.plot,
                "director": item.director,
                "actors": item.actors,
                "rating_value": item.rating_value,
                "rating_count": item.rating_count,
                "reviews": item.reviews,
                "awards": item.awards,
            }
        )
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")
    return path


class RecordingBackend:
    """Wraps another backend and keeps every request for prompt inspection."""

    def __init__(self, inner):
        self.inner = inner
        self.requests: list[LlmRequest] = []

    def complete(self, request: LlmRequest) -> LlmResponse:
        self.requests.append(request)
        return self.inner.complete(request)

    def prompts(self, call_site: str | None = None) -> list[str]:
        return [
            r.messages[-1].content
            for r in self.requests
            if call_site is None or r.call_site == call_site
        ]


def scripted_gateway(script: dict) -> LlmGateway:
    return LlmGateway(ScriptedBackend(script))


def recording_gateway(script: dict) -> tuple[LlmGateway, RecordingBackend]:
    backend = RecordingBackend(ScriptedBackend(script))
    return LlmGateway(backend), backend


@pytest.fixture
def profile() -> SeekerProfile:
    return SeekerProfile(
        persona=Persona("Curiosity", "You are inquisitive and ask lots of questions."),
        group=AttributeGroup.of("g1", ["romance", "drama"]),
    )


class ScriptBuilder:
    """Accumulates scripted responses per call site in execution order."""

    def __init__(self):
        self.script: dict[str, list[str]] = {}

    def add(self, call_site: str, *responses: str) -> "ScriptBuilder":
        self.script.setdefault(call_site, []).extend(responses)
        return self

    def write(self, path: Path) -> Path:
        path.write_text(yaml.safe_dump(self.script, sort_keys=True), encoding="utf-8")
        return path


SELECTOR_FRAMING = '{"Thinking":"the seeker responds to positive experiences","Strategy":["Framing","Logical Appeal"]}'
CRITIC_FALSE = '{"Evidence":"the awards claim is not supported by the card","Credibility":"False"}'
CRITIC_TRUE = '{"Evidence":"every claim is supported by the card","Credibility":"True"}'


def accepted_dialogue_script(builder: ScriptBuilder) -> ScriptBuilder:
    """Three-exchange dialogue: ask, recommend, explain (two candidates), accept."""
    builder.add(
        "recommender",
        "What kind of movies do you enjoy?",
        "I recommend Titanic (1997). [REC]",
        "Let me explain why it fits. [EXP]",
    )
    builder.add("strategy_selector", SELECTOR_FRAMING)
    builder.add(
        "explanation_generator",
        "You'll love the sweeping, award-winning romance of Titanic.",
    )
    builder.add("critic", CRITIC_FALSE, CRITIC_TRUE)
    builder.add("refiner", "You'll love the sweeping romance of Titanic.")
    builder.add(
        "seeker_feeling",
        "I am curious what it will suggest.",
        "A romance drama sounds promising, I want details.",
        "That matches everything I asked for.",
    )
    builder.add(
        "seeker_response",
        "I like romance dramas.",
        "Tell me more about it.",
        "Perfect, I'll watch it tonight! [END]",
    )
    return builder


def max_turns_dialogue_script(builder: ScriptBuilder, turns: int = 10) -> ScriptBuilder:
    """A dialogue that never recommends and runs out the exchange budget."""
    for i in range(turns):
        builder.add("recommender", f"Could you tell me more about what you like? ({i + 1})")
        builder.add("seeker_feeling", f"Still waiting for a real suggestion. ({i + 1})")
        builder.add("seeker_response", f"I enjoy funny space adventures. ({i + 1})")
    return builder


def quick_accept_dialogue_script(builder: ScriptBuilder, title_line: str) -> ScriptBuilder:
    """Opens with a recommendation that the seeker accepts immediately."""
    builder.add("recommender", f"I recommend {title_line}. [REC]")
    builder.add("seeker_feeling", "That actually sounds exactly right.")
    builder.add("seeker_response", "Great, I trust you, I'll take it! [END]")
    return builder


def golden_judge_script(builder: ScriptBuilder) -> ScriptBuilder:
    """Judgments for the single explained item: pre=2, true=5, post=4, cred=4."""
    builder.add(
        "judge_intention",
        '{"Evidence":"the title alone is mildly interesting","Watching Intention":2}',
        '{"Evidence":"the full information matches my taste strongly","Watching Intention":5}',
        '{"Evidence":"the explanation makes it appealing","Watching Intention":4}',
    )
    builder.add(
        "judge_credibility",
        '{"Evidence":"all claims match the provided information","Credibility":4}',
    )
    return builder


def build_golden_script(path: Path) -> Path:
    """Script for the four-profile golden experiment, in execution order."""
    builder = ScriptBuilder()
    accepted_dialogue_script(builder)  # (Curiosity, g1)
    max_turns_dialogue_script(builder)  # (Curiosity, g2)
    quick_accept_dialogue_script(builder, "Titanic (1997)")  # (Trust, g1)
    quick_accept_dialogue_script(builder, "Space Laughs (2020)")  # (Trust, g2)
    golden_judge_script(builder)
    return builder.write(path)


def golden_experiment(tmp_path: Path, out_name: str = "out") -> ExperimentConfig:
    """Two personas by two attribute groups against the scripted backend."""
    catalog_path = write_catalog_file(tmp_path / "catalog.jsonl")
    script_path = build_golden_script(tmp_path / "script.yaml")
    return ExperimentConfig(
        dataset="golden-demo",
        catalog_path=str(catalog_path),
        groups=[
            AttributeGroup.of("g1", ["romance", "drama"]),
            AttributeGroup.of("g2", ["comedy", "sci-fi"]),
        ],
        personas=["Curiosity", "Trust"],
        backend_spec=f"scripted:{script_path}",
        out_dir=str(tmp_path / out_name),
        parallelism=1,
    )
