"""Protocol tests: exchange counting, termination, rendering, serialization,
and full-pipeline replay determinism."""

from __future__ import annotations

import json

import pytest

from pccrs.agent import CrsAgent
from pccrs.dialogue import (
    SPEAKER_RECOMMENDER,
    SPEAKER_SEEKER,
    TERMINATION_ACCEPTED,
    TERMINATION_MAX_TURNS,
    DialogueState,
    Utterance,
    render_history,
    run_dialogue,
    seeker_texts,
    state_from_record,
    state_to_record,
)
from pccrs.gateway import LlmGateway, ScriptedBackend

from .conftest import (
    ScriptBuilder,
    accepted_dialogue_script,
    max_turns_dialogue_script,
    scripted_gateway,
)


def run_scripted(script: dict, catalog, profile, max_turns=10, turn_unit="exchange"):
    gateway = LlmGateway(ScriptedBackend(script))
    agent = CrsAgent(gateway, catalog)
    return run_dialogue(profile, agent, gateway, max_turns=max_turns, turn_unit=turn_unit)


def test_accepted_dialogue_protocol(catalog, profile):
    script = accepted_dialogue_script(ScriptBuilder()).script
    state = run_scripted(script, catalog, profile)
    assert state.terminated
    assert state.termination == TERMINATION_ACCEPTED
    assert state.exchanges == 3
    assert state.accepted_item == "m1"
    assert state.failure is None
    assert len(state.utterances) == 6
    speakers = [u.speaker for u in state.utterances]
    assert speakers == [SPEAKER_RECOMMENDER, SPEAKER_SEEKER] * 3
    kinds = [u.action_kind for u in state.utterances if u.speaker == SPEAKER_RECOMMENDER]
    assert kinds == ["ask", "recommend", "explain"]


def test_max_turns_dialogue_protocol(catalog, profile):
    script = max_turns_dialogue_script(ScriptBuilder()).script
    state = run_scripted(script, catalog, profile)
    assert state.terminated
    assert state.termination == TERMINATION_MAX_TURNS
    assert state.exchanges == 10
    assert len(state.utterances) == 20
    assert state.accepted_item is None


def test_exchange_count_never_exceeds_budget(catalog, profile):
    script = max_turns_dialogue_script(ScriptBuilder(), turns=10).script
    state = run_scripted(script, catalog, profile, max_turns=4)
    assert state.exchanges == 4
    assert state.termination == TERMINATION_MAX_TURNS


def test_utterance_turn_unit_counts_single_utterances(catalog, profile):
    script = max_turns_dialogue_script(ScriptBuilder(), turns=10).script
    state = run_scripted(script, catalog, profile, max_turns=10, turn_unit="utterance")
    assert len(state.utterances) == 10
    assert state.termination == TERMINATION_MAX_TURNS


def test_accept_before_recommendation_records_protocol_error(catalog, profile):
    builder = ScriptBuilder()
    builder.add("recommender", "What do you enjoy?")
    builder.add("seeker_feeling", "I already know what I want.")
    builder.add("seeker_response", "Whatever you say, I'm done! [END]")
    state = run_scripted(builder.script, catalog, profile)
    assert state.termination == TERMINATION_ACCEPTED
    assert state.accepted_item is None
    assert state.protocol_error == "accepted-without-recommendation"


def test_module_error_aborts_with_partial_transcript(catalog, profile):
    builder = ScriptBuilder()
    builder.add("recommender", "What do you enjoy?")
    builder.add("seeker_feeling", "hmm")
    # seeker_response queue missing: the dialogue aborts mid-exchange
    state = run_scripted(builder.script, catalog, profile)
    assert state.failure is not None
    assert "ScriptExhaustedError" in state.failure
    assert not state.terminated
    assert len(state.utterances) == 1


def test_render_history_role_prefixes():
    state = DialogueState(profile=None)
    state.utterances = [
        Utterance(index=0, speaker=SPEAKER_RECOMMENDER, text="hello"),
        Utterance(index=1, speaker=SPEAKER_SEEKER, text="hi there"),
    ]
    assert render_history(state) == "Recommender: hello\nSeeker: hi there"


def test_render_history_empty_state():
    assert render_history(DialogueState(profile=None)) == ""


def test_render_history_excludes_annotations(catalog, profile):
    script = accepted_dialogue_script(ScriptBuilder()).script
    state = run_scripted(script, catalog, profile)
    rendered = render_history(state)
    for u in state.utterances:
        if u.feeling:
            assert u.feeling not in rendered
    assert "critic" not in rendered
    assert "Thinking" not in rendered


def test_record_round_trip(catalog, profile):
    script = accepted_dialogue_script(ScriptBuilder()).script
    state = run_scripted(script, catalog, profile)
    record = state_to_record(state)
    restored = state_from_record(record)
    assert state_to_record(restored) == record
    assert restored.termination == state.termination
    assert restored.utterances[-1].text == state.utterances[-1].text
    explain = [u for u in restored.utterances if u.action_kind == "explain"][0]
    assert explain.strategy is not None
    assert explain.refinement_trace is not None
    assert len(explain.refinement_trace.candidates) == 2


def test_replay_is_byte_identical(catalog, profile):
    script = accepted_dialogue_script(ScriptBuilder()).script
    first = run_scripted(script, catalog, profile)
    second = run_scripted(script, catalog, profile)
    dump1 = json.dumps(state_to_record(first), sort_keys=True)
    dump2 = json.dumps(state_to_record(second), sort_keys=True)
    assert dump1 == dump2


def test_accepted_final_utterance_contains_end_token(catalog, profile):
    script = accepted_dialogue_script(ScriptBuilder()).script
    state = run_scripted(script, catalog, profile)
    assert "[END]" in state.utterances[-1].text.upper()


def test_seeker_texts_slicing(catalog, profile):
    script = accepted_dialogue_script(ScriptBuilder()).script
    state = run_scripted(script, catalog, profile)
    all_texts = seeker_texts(state)
    assert len(all_texts) == 3
    before_exp = seeker_texts(state, before_index=4)
    assert len(before_exp) == 2


def test_run_dialogue_rejects_unknown_turn_unit(catalog, profile):
    with pytest.raises(ValueError):
        run_dialogue(profile, object(), scripted_gateway({}), turn_unit="tokens")
