"""Agent turn-policy tests: token classification, title resolution, and the
explanation pipeline wiring including both ablation arms."""

from __future__ import annotations

import pytest

from pccrs.agent import (
    AgentConfig,
    CrsAgent,
    resolve_title,
    strip_exp_token,
    title_line,
    trailing_token,
)
from pccrs.dialogue import SPEAKER_RECOMMENDER, SPEAKER_SEEKER, DialogueState, Utterance
from pccrs.errors import AmbiguousTitleError, NoCurrentItemError, UnresolvableTitleError
from pccrs.refiner import STOP_CRITIC_APPROVED

from .conftest import CRITIC_FALSE, CRITIC_TRUE, SELECTOR_FRAMING, recording_gateway, scripted_gateway


def state_with(*texts_by_speaker, profile=None, current_item=None) -> DialogueState:
    state = DialogueState(profile=profile, current_item=current_item)
    for i, (speaker, text) in enumerate(texts_by_speaker):
        state.utterances.append(Utterance(index=i, speaker=speaker, text=text))
    return state


def test_trailing_token_classification():
    assert trailing_token("What do you enjoy?") is None
    assert trailing_token("I recommend X. [REC]") == "recommend"
    assert trailing_token("Because... [EXP]") == "explain"
    assert trailing_token("lowercase token [rec]  ") == "recommend"
    assert trailing_token("[REC] is not trailing here") is None


def test_strip_exp_token():
    assert strip_exp_token("Great movie. [EXP]") == "Great movie."
    assert strip_exp_token("Great movie. [exp] ") == "Great movie."
    assert strip_exp_token("No token here") == "No token here"


def test_title_line_includes_year(items):
    assert title_line(items[0]) == "Titanic (1997)"
    from pccrs.catalog import Item

    assert title_line(Item(id="x", title="No Year")) == "No Year"


def test_resolve_title_containment(items):
    assert resolve_title("I suggest Mission: Impossible tonight", items) == "m5"


def test_resolve_title_longest_wins(items):
    # both "Room" and "The Room" are contained; the longer title wins
    assert resolve_title("you should try The Room", items) == "m3"


def test_resolve_title_unresolvable(items):
    with pytest.raises(UnresolvableTitleError):
        resolve_title("enjoy your evening", items)


def test_resolve_title_ambiguous():
    from pccrs.catalog import Item

    twins = [Item(id="a", title="Heat"), Item(id="b", title="Salt")]
    with pytest.raises(AmbiguousTitleError):
        resolve_title("watch Heat or Salt tonight", twins)


def test_resolve_title_ignores_year_suffix():
    from pccrs.catalog import Item

    dated = [Item(id="a", title="Titanic (1997)")]
    assert resolve_title("definitely Titanic, a classic", dated) == "a"


def test_resolve_title_requires_candidates():
    with pytest.raises(ValueError):
        resolve_title("anything", [])


def test_decide_ask_when_no_token(catalog):
    gateway = scripted_gateway({"recommender": ["What genres do you enjoy?"]})
    agent = CrsAgent(gateway, catalog)
    action = agent.decide(state_with())
    assert action.kind == "ask"
    assert action.text == "What genres do you enjoy?"
    assert action.item_id is None
    assert len(action.candidate_ids) == len(catalog)


def test_decide_recommend_resolves_item(catalog):
    gateway = scripted_gateway({"recommender": ["I recommend Titanic (1997). [REC]"]})
    agent = CrsAgent(gateway, catalog)
    action = agent.decide(state_with((SPEAKER_SEEKER, "I like romance")))
    assert action.kind == "recommend"
    assert action.item_id == "m1"
    assert action.text.endswith("[REC]")


def test_decide_recommend_unknown_title_fails(catalog):
    gateway = scripted_gateway({"recommender": ["I recommend Nonexistent Movie. [REC]"]})
    agent = CrsAgent(gateway, catalog)
    with pytest.raises(UnresolvableTitleError):
        agent.decide(state_with((SPEAKER_SEEKER, "hi")))


def test_decide_explain_before_recommend_fails(catalog):
    gateway = scripted_gateway({"recommender": ["It is a classic... [EXP]"]})
    agent = CrsAgent(gateway, catalog)
    with pytest.raises(NoCurrentItemError):
        agent.decide(state_with((SPEAKER_SEEKER, "why?")))


def test_decide_explain_runs_full_pipeline(catalog):
    gateway, backend = recording_gateway(
        {
            "recommender": ["It's a beloved classic... [EXP]"],
            "strategy_selector": [SELECTOR_FRAMING],
            "explanation_generator": ["You'll love the award-winning romance."],
            "critic": [CRITIC_FALSE, CRITIC_TRUE],
            "refiner": ["You'll love the romance."],
        }
    )
    agent = CrsAgent(gateway, catalog)
    state = state_with(
        (SPEAKER_RECOMMENDER, "I recommend Titanic (1997). [REC]"),
        (SPEAKER_SEEKER, "tell me more"),
        current_item="m1",
    )
    action = agent.decide(state)
    assert action.kind == "explain"
    assert action.item_id == "m1"
    assert action.strategy is not None
    assert action.strategy.primary.value == "Framing"
    assert action.trace.candidates == [
        "You'll love the award-winning romance.",
        "You'll love the romance.",
    ]
    assert action.text == "You'll love the romance. [EXP]"


def test_explain_text_equals_last_trace_candidate(catalog):
    gateway = scripted_gateway(
        {
            "strategy_selector": [SELECTOR_FRAMING],
            "explanation_generator": ["candidate zero"],
            "critic": [CRITIC_TRUE],
        }
    )
    agent = CrsAgent(gateway, catalog)
    state = state_with((SPEAKER_RECOMMENDER, "rec. [REC]"), (SPEAKER_SEEKER, "why"))
    text, _choice, trace = agent.explain(state, catalog.get("m1"))
    assert strip_exp_token(text) == trace.candidates[-1]
    assert trace.iterations_used == 0
    assert text.endswith("[EXP]")


def test_explain_without_refinement_issues_zero_critic_calls(catalog):
    gateway, backend = recording_gateway(
        {
            "strategy_selector": [SELECTOR_FRAMING],
            "explanation_generator": ["candidate zero"],
        }
    )
    config = AgentConfig(enable_refinement=False)
    agent = CrsAgent(gateway, catalog, config)
    state = state_with((SPEAKER_SEEKER, "why"))
    text, _choice, trace = agent.explain(state, catalog.get("m1"))
    assert backend.prompts("critic") == []
    assert trace.synthetic is True
    assert trace.stop_reason == STOP_CRITIC_APPROVED
    assert trace.candidates == ["candidate zero"]


def test_explain_without_strategies_never_calls_selector(catalog):
    gateway, backend = recording_gateway(
        {
            "explanation_generator": ["plain candidate"],
            "critic": [CRITIC_TRUE],
        }
    )
    config = AgentConfig(enable_strategies=False)
    agent = CrsAgent(gateway, catalog, config)
    state = state_with((SPEAKER_SEEKER, "why"))
    text, choice, _trace = agent.explain(state, catalog.get("m1"))
    assert backend.prompts("strategy_selector") == []
    assert choice is None
    assert text == "plain candidate [EXP]"


def test_full_ablation_still_produces_wellformed_turns(catalog):
    gateway = scripted_gateway(
        {
            "recommender": [
                "I recommend Space Laughs (2020). [REC]",
                "A funny space movie. [EXP]",
            ],
            "explanation_generator": ["A comedy set in space."],
        }
    )
    config = AgentConfig(enable_strategies=False, enable_refinement=False)
    agent = CrsAgent(gateway, catalog, config)
    state = state_with((SPEAKER_SEEKER, "something funny in space"))
    rec_action = agent.decide(state)
    assert rec_action.kind == "recommend"
    assert rec_action.text.endswith("[REC]")
    state.utterances.append(
        Utterance(index=1, speaker=SPEAKER_RECOMMENDER, text=rec_action.text, action_kind="recommend")
    )
    state.current_item = rec_action.item_id
    state.utterances.append(Utterance(index=2, speaker=SPEAKER_SEEKER, text="details please"))
    exp_action = agent.decide(state)
    assert exp_action.kind == "explain"
    assert exp_action.text.endswith("[EXP]")
    assert exp_action.strategy is None
    assert exp_action.trace.synthetic


def test_decide_refuses_terminated_state(catalog):
    gateway = scripted_gateway({"recommender": ["x"]})
    agent = CrsAgent(gateway, catalog)
    state = state_with()
    state.terminated = True
    with pytest.raises(ValueError):
        agent.decide(state)


def test_decide_recommend_only_from_candidates(catalog):
    # the resolver only sees retrieved candidates, so a recommend action can
    # never point outside them
    gateway = scripted_gateway({"recommender": ["I recommend Room (2015). [REC]"]})
    agent = CrsAgent(gateway, catalog, AgentConfig(retrieval_k=5))
    action = agent.decide(state_with((SPEAKER_SEEKER, "drama")))
    assert action.item_id in action.candidate_ids


def test_retrieval_query_concatenates_seeker_utterances(catalog):
    gateway, backend = recording_gateway({"recommender": ["ok?"]})
    agent = CrsAgent(gateway, catalog)
    state = state_with(
        (SPEAKER_SEEKER, "misfit astronauts"),
        (SPEAKER_RECOMMENDER, "noted"),
        (SPEAKER_SEEKER, "first contact comedy"),
    )
    action = agent.decide(state)
    # the concatenated seeker text points retrieval at the space comedy
    assert action.candidate_ids[0] == "m2"


def test_agent_config_validation():
    with pytest.raises(ValueError):
        AgentConfig(retrieval_k=0)
