"""Critique/refine loop tests: contracts, guards, bounds, and isolation from
conversation history."""

from __future__ import annotations

import json
import random

import pytest

from pccrs.catalog import render_item_card
from pccrs.errors import InvalidBooleanError
from pccrs.refiner import (
    STOP_CRITIC_APPROVED,
    STOP_MAX_ITERATIONS,
    Critique,
    RefinementTrace,
    critique,
    refine,
    refine_loop,
)
from pccrs.strategies import Strategy, StrategyChoice, card_for

from .conftest import CRITIC_TRUE, recording_gateway, scripted_gateway

CHOICE = StrategyChoice(primary=Strategy.FRAMING, full_list=(Strategy.FRAMING,), thinking="t")


def card(catalog, item_id="m1"):
    return render_item_card(catalog.get(item_id))


def critic_script(*verdicts: bool) -> list[str]:
    return [
        json.dumps({"Evidence": f"verdict {i}", "Credibility": "True" if v else "False"})
        for i, v in enumerate(verdicts)
    ]


def test_critique_parses_true(catalog):
    gateway = scripted_gateway({"critic": ['{"Evidence":"all claims supported","Credibility":"True"}']})
    verdict = critique(gateway, "Titanic is a romance.", card(catalog))
    assert verdict.credible is True
    assert verdict.evidence == "all claims supported"


def test_critique_parses_false(catalog):
    gateway = scripted_gateway({"critic": ['{"Evidence":"rating 9.9 unsupported","Credibility":"False"}']})
    verdict = critique(gateway, "Rated 9.9!", card(catalog))
    assert verdict.credible is False


def test_critique_invalid_boolean(catalog):
    gateway = scripted_gateway({"critic": ['{"Evidence":"e","Credibility":"Maybe"}']})
    with pytest.raises(InvalidBooleanError):
        critique(gateway, "text", card(catalog))


def test_critique_rejects_empty_candidate(catalog):
    gateway = scripted_gateway({"critic": []})
    with pytest.raises(ValueError):
        critique(gateway, "   ", card(catalog))


def test_critic_prompt_contains_candidate_and_card_only(catalog):
    gateway, backend = recording_gateway({"critic": [CRITIC_TRUE]})
    item_card = card(catalog)
    critique(gateway, "Titanic is a romance.", item_card)
    prompt = backend.prompts("critic")[0]
    assert "Titanic is a romance." in prompt
    assert item_card.text in prompt
    assert "Response the JSON only!" in prompt


def test_refine_passthrough_and_prompt_contract(catalog):
    gateway, backend = recording_gateway({"refiner": ["revised text without the award claim"]})
    item_card = card(catalog)
    bad = Critique(evidence="the award claim is unsupported", credible=False)
    revised = refine(gateway, "Seeker: hi", item_card, CHOICE, "candidate text", bad)
    assert revised == "revised text without the award claim"
    prompt = backend.prompts("refiner")[0]
    assert "candidate text" in prompt
    assert "the award claim is unsupported" in prompt
    assert card_for(Strategy.FRAMING).prompt_snippet in prompt
    assert item_card.text in prompt


def test_refine_guard_rejects_credible_critique_before_any_call(catalog):
    gateway, backend = recording_gateway({"refiner": ["should never be used"]})
    good = Critique(evidence="fine", credible=True)
    with pytest.raises(ValueError):
        refine(gateway, "h", card(catalog), CHOICE, "c", good)
    assert backend.requests == []


def test_refine_plain_variant_without_strategy(catalog):
    gateway, backend = recording_gateway({"refiner": ["revised"]})
    bad = Critique(evidence="unsupported", credible=False)
    refine(gateway, "h", card(catalog), None, "candidate", bad)
    prompt = backend.prompts("refiner")[0]
    assert "Persuasive Strategy=" not in prompt
    assert "candidate" in prompt


def test_loop_immediate_approval(catalog):
    gateway = scripted_gateway({"critic": critic_script(True)})
    final, trace = refine_loop(gateway, "h", card(catalog), CHOICE, "c0")
    assert final == "c0"
    assert trace.iterations_used == 0
    assert trace.stop_reason == STOP_CRITIC_APPROVED
    assert trace.candidates == ["c0"]
    assert trace.final_candidate_critiqued


def test_loop_single_refinement(catalog):
    gateway = scripted_gateway({"critic": critic_script(False, True), "refiner": ["c1"]})
    final, trace = refine_loop(gateway, "h", card(catalog), CHOICE, "c0")
    assert final == "c1"
    assert trace.iterations_used == 1
    assert trace.stop_reason == STOP_CRITIC_APPROVED
    assert trace.candidates == ["c0", "c1"]
    assert [c.credible for c in trace.critiques] == [False, True]


def test_loop_cap_two_refinements(catalog):
    gateway, backend = recording_gateway(
        {"critic": critic_script(False, False, False), "refiner": ["c1", "c2"]}
    )
    final, trace = refine_loop(gateway, "h", card(catalog), CHOICE, "c0", max_iterations=2)
    assert final == "c2"
    assert trace.stop_reason == STOP_MAX_ITERATIONS
    assert trace.iterations_used == 2
    assert len(backend.prompts("refiner")) == 2
    # the candidate produced by the last refinement goes out unjudged
    assert len(backend.prompts("critic")) == 2
    assert not trace.final_candidate_critiqued


def test_loop_zero_iterations_single_critique(catalog):
    gateway, backend = recording_gateway({"critic": critic_script(False)})
    final, trace = refine_loop(gateway, "h", card(catalog), CHOICE, "c0", max_iterations=0)
    assert final == "c0"
    assert trace.stop_reason == STOP_MAX_ITERATIONS
    assert trace.iterations_used == 0
    assert len(backend.prompts("critic")) == 1
    assert trace.final_candidate_critiqued  # c0 itself was judged


def test_loop_bounds_hold_across_fuzzed_scripts(catalog):
    rng = random.Random(4)
    item_card = card(catalog)
    for _ in range(100):
        verdicts = [rng.random() < 0.4 for _ in range(4)]
        gateway, backend = recording_gateway(
            {"critic": critic_script(*verdicts), "refiner": ["r1", "r2", "r3", "r4"]}
        )
        final, trace = refine_loop(gateway, "h", item_card, CHOICE, "c0", max_iterations=2)
        refine_calls = len(backend.prompts("refiner"))
        critic_calls = len(backend.prompts("critic"))
        assert refine_calls <= 2
        assert critic_calls <= 3
        assert trace.iterations_used == refine_calls
        assert final == trace.candidates[-1]
        consumed = verdicts[:critic_calls]
        if trace.stop_reason == STOP_CRITIC_APPROVED:
            assert consumed[-1] is True
        else:
            assert all(v is False for v in consumed)


def test_loop_history_never_reaches_critic(catalog):
    marker = "ZZHISTORYMARKERZZ unique utterance"
    gateway, backend = recording_gateway(
        {"critic": critic_script(False, True), "refiner": ["c1"]}
    )
    refine_loop(gateway, f"Seeker: {marker}", card(catalog), CHOICE, "c0")
    for prompt in backend.prompts("critic"):
        assert marker not in prompt


def test_loop_rejects_bad_arguments(catalog):
    gateway = scripted_gateway({"critic": critic_script(True)})
    with pytest.raises(ValueError):
        refine_loop(gateway, "h", card(catalog), CHOICE, "")
    with pytest.raises(ValueError):
        refine_loop(gateway, "h", card(catalog), CHOICE, "c0", max_iterations=-1)


def test_trace_round_trips_through_dict():
    trace = RefinementTrace(
        candidates=["c0", "c1"],
        critiques=[Critique("bad", False), Critique("good", True)],
        stop_reason=STOP_CRITIC_APPROVED,
        iterations_used=1,
    )
    restored = RefinementTrace.from_dict(trace.to_dict())
    assert restored == trace
