"""Live session engine: decisions, reflection, dispatch, transitions."""

from __future__ import annotations

import json

import pytest

from stagecraft.gateway import (
    JUDGE_TEMPERATURE,
    InputClass,
    MockProvider,
    ReplyStrategy,
    chat_request,
    request_key,
)
from stagecraft.runtime import (
    Architecture,
    ArchitectureConfig,
    Session,
    SessionFinishedError,
    SessionStatus,
    TurnFailedError,
    classify_input,
    decide_one_for_all,
    inference_count,
    lint_chain_changes,
    parse_reflection_proposal,
    predicted_session_calls,
    record_from_json,
    record_to_json,
    reflect,
    step,
)
from stagecraft.runtime.prompts import classifier_prompt
from stagecraft.script import PlotOrigin
from stagecraft.simulation import WalkthroughPolicy, drama_stub


def make_session(script, kind=Architecture.ONE_FOR_ALL, k=5, budget=1, **kwargs) -> Session:
    return Session(
        script=script,
        config=ArchitectureConfig(kind=kind, reflection_period=k, reflection_budget=budget),
        **kwargs,
    )


def ofa_response(completed="", speaker="Sorrel", say="So it begins.", cls="InPlot", strategy=None):
    lines = [f"COMPLETED: [{completed}]", f"CLASS: {cls}", f"SPEAKER: {speaker}", "TO: player",
             f"SAY: {say}"]
    if strategy:
        lines.insert(2, f"STRATEGY: {strategy}")
    return "\n".join(lines)


def director_response(completed="", target="Petra", motivation="Answer plainly.",
                      cls="InPlot", strategy=None):
    lines = [f"COMPLETED: [{completed}]", f"CLASS: {cls}", f"TARGET: {target}",
             f"MOTIVATION: {motivation}"]
    if strategy:
        lines.insert(2, f"STRATEGY: {strategy}")
    return "\n".join(lines)


def actor_response(speaker="Petra", say="I photograph ice, nothing else."):
    return f"COMPLETED: []\nSPEAKER: {speaker}\nTO: player\nSAY: {say}"


class TestClassifyInput:
    def test_lookup_table_authored_against_bundled_script(self, example_script):
        session = make_session(example_script)
        table = {}
        for text, expected in [
            ("Who wrote the note?", "InPlot"),
            ("What's your favorite food?", "Daily"),
        ]:
            request = chat_request(
                "", classifier_prompt(session, text),
                temperature=JUDGE_TEMPERATURE, role="classifier",
            )
            table[request_key(request)] = f"CLASS: {expected}"
        provider = MockProvider(lookup=table)
        assert classify_input("Who wrote the note?", session, provider) is InputClass.IN_PLOT
        assert classify_input("What's your favorite food?", session, provider) is InputClass.DAILY

    def test_empty_input_is_breaking_without_any_call(self, example_script):
        session = make_session(example_script)
        provider = MockProvider(playlist=[])  # any call would blow up
        assert classify_input("   ", session, provider) is InputClass.BREAKING
        assert provider.call_count == 0


class TestReflection:
    def _due_session(self, example_script, **kwargs) -> Session:
        # 4 committed scene turns: the next processed turn is the 5th, k=5
        return make_session(example_script, scene_turn=4, turn=4, **kwargs)

    def test_accepted_adjustment_updates_text(self, example_script):
        session = self._due_session(example_script)
        provider = MockProvider(playlist=[
            "ADJUST: s1p4 := Ida, warming to the player's curiosity, recounts the letters she has written for years."
        ])
        record = reflect(session, provider, "Ida, what brought you up the mountain?")
        assert record.accepted
        assert record.modified[0][0] == "s1p4"
        chain = dict((p.id, p) for p in record.accepted_plots)
        assert "curiosity" in chain["s1p4"].description
        # completed flags untouched, nothing removed
        assert len(record.accepted_plots) == len(session.chain)

    def test_insertion_gets_fresh_reflected_id(self, example_script):
        session = self._due_session(example_script)
        provider = MockProvider(playlist=[
            "INSERT: 2 := A guest asks the apprentice what the storm means for the morning."
        ])
        record = reflect(session, provider, "How long will the storm last?")
        assert record.accepted
        position, plot_id, _desc = record.inserted[0]
        assert position == 2 and plot_id == "r1"
        inserted = [p for p in record.accepted_plots if p.id == "r1"]
        assert inserted[0].origin is PlotOrigin.REFLECTED

    def test_unknown_location_accepted_but_linted(self, example_script):
        # the bound is structural; entity leakage is a lint flag, not a rejection
        session = self._due_session(example_script)
        provider = MockProvider(playlist=[
            "INSERT: 1 := Somebody proposes a visit to the skating pond behind the station."
        ])
        record = reflect(session, provider, "Is there anywhere to skate?")
        assert record.accepted
        assert any("skating" in flag for flag in record.lint_flags)

    def test_future_scene_entity_linted(self, example_script):
        session = self._due_session(example_script)
        provider = MockProvider(playlist=[
            "INSERT: 1 := Somebody wonders aloud about the archive and its sealed shelf."
        ])
        record = reflect(session, provider, "What do you keep in the archive?")
        assert record.accepted
        assert any(flag.startswith("future-scene") and "archive" in flag
                   for flag in record.lint_flags)

    def test_two_edits_rejected_chain_unchanged(self, example_script):
        session = self._due_session(example_script)
        before = session.chain
        provider = MockProvider(playlist=[
            "ADJUST: s1p4 := changed one.\nADJUST: s1p5 := changed two."
        ])
        record = reflect(session, provider, "x")
        assert not record.accepted
        assert any("budget-exceeded" in v for v in record.violations)
        assert session.chain == before

    def test_nochange_is_accepted_noop(self, example_script):
        session = self._due_session(example_script)
        record = reflect(session, MockProvider(playlist=["NOCHANGE"]), "x")
        assert record.accepted
        assert record.modified == () and record.inserted == ()

    def test_provider_error_skips_reflection(self, example_script):
        from stagecraft.gateway import RetryPolicy

        session = self._due_session(example_script)
        provider = MockProvider(playlist=[{"error": "500"}] * 3,
                                retry=RetryPolicy(max_attempts=3, backoff_base=0.0))
        record = reflect(session, provider, "x")
        assert not record.accepted and record.error

    def test_not_due_raises(self, example_script):
        session = make_session(example_script, scene_turn=2, turn=2)
        with pytest.raises(ValueError, match="not due"):
            reflect(session, MockProvider(playlist=[]), "x")
        disabled = make_session(example_script, k=None, scene_turn=4, turn=4)
        with pytest.raises(ValueError, match="disabled"):
            reflect(disabled, MockProvider(playlist=[]), "x")

    def test_unknown_plot_id_rejected(self, example_script):
        session = self._due_session(example_script)
        record = reflect(session, MockProvider(playlist=["ADJUST: zz9 := nonsense"]), "x")
        assert not record.accepted
        assert any("unknown-plot" in v for v in record.violations)

    def test_malformed_proposal_rejected(self, example_script):
        proposal, errors = parse_reflection_proposal("I would rather not say.", None or make_session(example_script).chain)
        assert proposal is None and errors


class TestOneForAll:
    def test_single_call_updates_chain(self, example_script):
        session = make_session(example_script)
        provider = MockProvider(playlist=[ofa_response(completed="s1p1")])
        result = step(session, "Good evening, everyone.", provider)
        assert provider.call_count == 1
        assert session.ledger == {"director": 0, "actor": 0, "global": 1, "reflection": 0}
        assert session.chain.get("s1p1").completed
        assert result.decision.speaker == "Sorrel"
        assert session.turn == 1

    def test_unknown_completion_dropped_with_warning(self, example_script):
        session = make_session(example_script)
        provider = MockProvider(playlist=[ofa_response(completed="nope42")])
        result = step(session, "hello", provider)
        assert result.decision.utterance  # utterance still delivered
        assert result.record.dropped_completions == ("nope42",)
        assert any("nope42" in w for w in result.warnings)
        assert not any(p.completed for p in session.chain)

    def test_recompleting_completed_plot_is_noop(self, example_script):
        session = make_session(example_script)
        provider = MockProvider(playlist=[
            ofa_response(completed="s1p1"), ofa_response(completed="s1p1"),
        ])
        step(session, "one", provider)
        result = step(session, "two", provider)
        assert session.chain.get("s1p1").completed
        assert result.record.applied_completions == ()  # monotone, no re-apply


class TestDirectorActor:
    def test_two_calls_and_motivation_target(self, example_script):
        session = make_session(example_script, kind=Architecture.DIRECTOR_ACTOR)
        provider = MockProvider(playlist=[director_response(), actor_response()])
        result = step(session, "Petra, what did you see?", provider)
        assert provider.call_count == 2
        assert session.ledger == {"director": 1, "actor": 1, "global": 0, "reflection": 0}
        assert result.record.motivation.target_actor == "Petra"
        assert result.decision.speaker == "Petra"

    def test_absent_target_repaired_then_turn_fails(self, example_script):
        session = make_session(example_script, kind=Architecture.DIRECTOR_ACTOR)
        provider = MockProvider(playlist=[
            director_response(target="Ghost"), director_response(target="Phantom"),
        ])
        with pytest.raises(TurnFailedError):
            step(session, "hello", provider)
        assert provider.call_count == 2  # one repair attempt
        assert session.turn == 0

    def test_chain_updated_before_actor_speaks(self, example_script):
        session = make_session(example_script, kind=Architecture.DIRECTOR_ACTOR)
        chain_at_act_time = {}

        def stub(request):
            if request.role == "director":
                return director_response(completed="s1p1")
            chain_at_act_time["completed"] = session.chain.get("s1p1").completed
            return actor_response()

        step(session, "hello", MockProvider(stub=stub))
        assert chain_at_act_time["completed"] is True

    def test_actor_prompt_is_script_blind(self, example_script):
        session = make_session(example_script, kind=Architecture.DIRECTOR_ACTOR)
        provider = MockProvider(playlist=[director_response(), actor_response()])
        step(session, "Petra, tell me about the ridge.", provider)
        actor_prompts = [
            e.request.messages[-1].content
            for e in provider.log.entries() if e.request.role == "actor"
        ]
        assert actor_prompts
        for prompt in actor_prompts:
            for scene in example_script.scenes:
                for plot in scene.plot_chain:
                    assert plot.description not in prompt

    def test_actor_completions_have_no_authority(self, example_script):
        session = make_session(example_script, kind=Architecture.DIRECTOR_ACTOR)
        provider = MockProvider(playlist=[
            director_response(),
            "COMPLETED: [s1p1]\nSPEAKER: Petra\nTO: player\nSAY: Done, surely.",
        ])
        result = step(session, "hello", provider)
        assert not session.chain.get("s1p1").completed
        assert any("authority" in w for w in result.warnings)

    def test_actor_speaker_mismatch_repaired(self, example_script):
        session = make_session(example_script, kind=Architecture.DIRECTOR_ACTOR)
        provider = MockProvider(playlist=[
            director_response(target="Petra"),
            actor_response(speaker="Bram"),
            actor_response(speaker="Petra"),
        ])
        result = step(session, "hello", provider)
        assert result.decision.speaker == "Petra"
        assert result.record.repair_calls == 1

    def test_broadcast_addressee(self, example_script):
        session = make_session(example_script, kind=Architecture.DIRECTOR_ACTOR)
        provider = MockProvider(playlist=[
            director_response(),
            "COMPLETED: []\nSPEAKER: Petra\nTO: all\nSAY: Everyone, listen.",
        ])
        step(session, "hello", provider)
        assert session.memory[-1].addressee == "all"


class TestStrategyContract:
    def test_daily_without_strategy_repaired_then_fails(self, example_script):
        session = make_session(example_script)
        provider = MockProvider(playlist=[
            ofa_response(cls="Daily"), ofa_response(cls="Daily"),
        ])
        with pytest.raises(TurnFailedError):
            step(session, "What's for dinner?", provider)
        assert session.turn == 0

    def test_daily_with_strategy_accepted(self, example_script):
        session = make_session(example_script)
        provider = MockProvider(playlist=[ofa_response(cls="Daily", strategy="Avoid")])
        result = step(session, "What's for dinner?", provider)
        assert result.decision.input_class is InputClass.DAILY
        assert result.decision.strategy is ReplyStrategy.AVOID

    def test_inplot_with_spurious_strategy_dropped(self, example_script):
        session = make_session(example_script)
        provider = MockProvider(playlist=[ofa_response(cls="InPlot", strategy="Associate")])
        result = step(session, "Tell me about the note.", provider)
        assert result.decision.strategy is None
        assert any("dropped strategy" in w for w in result.warnings)

    def test_empty_input_preset_breaking_no_extra_call(self, example_script):
        session = make_session(example_script)
        provider = MockProvider(playlist=[ofa_response(cls="Breaking", strategy="IgnoreQuestion")])
        result = step(session, "   ", provider)
        assert provider.call_count == 1  # no separate classifier call
        assert result.decision.input_class is InputClass.BREAKING
        assert result.decision.strategy is ReplyStrategy.IGNORE_QUESTION


class TestStepPipeline:
    def test_reflection_fires_on_fifth_turn_director_actor(self, example_script):
        session = make_session(example_script, kind=Architecture.DIRECTOR_ACTOR, k=5)
        provider = MockProvider(stub=_da_walk(session))
        for turn in range(1, 6):
            result = step(session, "Tell me more.", provider)
        assert result.reflection is not None  # turn 5
        assert result.record.ledger_delta == {
            "director": 1, "actor": 1, "global": 0, "reflection": 1,
        }
        assert session.ledger["reflection"] == 1

    def test_turn_failure_leaves_session_replayable(self, example_script):
        session = make_session(example_script)
        bad = MockProvider(playlist=["gibberish", "more gibberish"])
        with pytest.raises(TurnFailedError):
            step(session, "hello", bad)
        assert (session.turn, session.scene_turn, len(session.memory)) == (0, 0, 0)
        assert session.ledger_total() == 0
        good = MockProvider(playlist=[ofa_response(completed="s1p1")])
        result = step(session, "hello", good)
        assert result.turn == 1 and session.chain.get("s1p1").completed

    def test_scene_transition_and_status_flow(self, example_script):
        session = make_session(example_script, k=None)
        ids = [p.id for p in example_script.scenes[0].plot_chain]
        provider = MockProvider(playlist=[ofa_response(completed=i) for i in ids]
                                + [ofa_response(speaker="Bram")])
        for plot_id in ids[:-1]:
            result = step(session, "go on", provider)
            assert result.transition is None
        result = step(session, "finish it", provider)
        assert result.transition is not None and result.transition.index == 2
        assert session.status is SessionStatus.SCENE_TRANSITION
        assert session.scene.index == 2 and session.scene_turn == 0
        step(session, "next", provider)
        assert session.status is SessionStatus.ACTIVE

    def test_finish_last_scene(self, example_script):
        session = make_session(example_script, k=None)
        provider = MockProvider(stub=_ofa_walk())
        while session.status is not SessionStatus.FINISHED:
            result = step(session, "onward", provider)
        assert result.finished
        assert session.status is SessionStatus.FINISHED
        with pytest.raises(SessionFinishedError):
            step(session, "encore", provider)

    def test_memory_turns_strictly_increase(self, example_script):
        session = make_session(example_script, k=None)
        provider = MockProvider(stub=_ofa_walk())
        for _ in range(5):
            step(session, "onward", provider)
        turns = [e.turn for e in session.memory]
        assert turns == sorted(turns)
        assert len(set(turns)) == 5  # player + npc entry per turn


def _ofa_walk():
    """Stub completing one plot per turn in one-for-all shape."""

    def stub(request):
        prompt = request.last_user_content()
        if request.role == "reflection":
            return "NOCHANGE"
        import re

        incomplete = re.findall(r"- \[ \] (\S+):", prompt)
        completed = incomplete[0] if incomplete else ""
        return ofa_response(completed=completed)

    return stub


def _da_walk(session):
    def stub(request):
        if request.role == "reflection":
            return "NOCHANGE"
        if request.role == "director":
            return director_response()
        return actor_response()

    return stub


class TestInferenceCount:
    def test_director_actor_three_by_ten(self):
        assert inference_count("director-actor", [10, 10, 10], 5) == 66

    def test_hybrid_with_narrative_first_scene(self):
        modes = ["narrative", "interactive", "interactive"]
        assert inference_count("hybrid", [10, 10, 10], 5, modes) == 56
        assert 66 / 56 == pytest.approx(1.179, abs=1e-3)

    def test_zero_turns(self):
        assert inference_count("one-for-all", [], 5) == 0
        assert inference_count("director-actor", [0, 0], 5) == 0

    def test_k_disabled(self):
        assert inference_count("one-for-all", [10, 10], None) == 20

    def test_hybrid_requires_modes(self):
        with pytest.raises(ValueError):
            inference_count("hybrid", [10], 5)

    def test_ledger_law_live(self, example_script):
        for kind in (Architecture.ONE_FOR_ALL, Architecture.DIRECTOR_ACTOR, Architecture.HYBRID):
            session = make_session(example_script, kind=kind, k=5)
            provider = drama_stub(WalkthroughPolicy(target_turns_per_scene=10))
            while session.status is not SessionStatus.FINISHED and session.turn < 40:
                step(session, "Tell me what you saw tonight.", provider)
            assert session.ledger_total() == predicted_session_calls(session), kind


class TestReplayAndEvents:
    def test_record_json_round_trip(self, example_script):
        session = make_session(example_script, kind=Architecture.DIRECTOR_ACTOR, k=2)
        provider = MockProvider(stub=_da_walk(session))
        for _ in range(4):
            step(session, "go", provider)
        for record in session.records:
            assert record_from_json(json.loads(json.dumps(record_to_json(record)))) == record

    def test_replay_reconstructs_identical_state(self, example_script):
        live = make_session(example_script, k=None)
        provider = MockProvider(stub=_ofa_walk())
        for _ in range(7):
            step(live, "onward", provider)
        replayed = make_session(example_script, k=None)
        for record in live.records:
            replayed.apply_record(record)
        assert replayed.chain == live.chain
        assert replayed.memory == live.memory
        assert replayed.ledger == live.ledger
        assert replayed.scene_pos == live.scene_pos
        assert replayed.status == live.status

    def test_identical_runs_produce_identical_logs(self, example_script):
        def run():
            session = make_session(example_script, kind=Architecture.HYBRID, k=5)
            provider = drama_stub(WalkthroughPolicy(target_turns_per_scene=10))
            transcript = [
                "Tell me what you saw tonight.", "Who do you think wrote it?",
            ] * 20
            i = 0
            while session.status is not SessionStatus.FINISHED and i < len(transcript):
                step(session, transcript[i], provider)
                i += 1
            return [record_to_json(r) for r in session.records]

        assert run() == run()


class TestLeakageLint:
    def test_unknown_entity_flagged(self, example_script):
        flags = lint_chain_changes(
            example_script, 1, ["Somebody proposes a trip to the skating pond."]
        )
        assert any("unknown-entity" in f and "skating" in f for f in flags)

    def test_future_scene_entity_flagged(self, example_script):
        flags = lint_chain_changes(example_script, 1, ["They whisper about the archive."])
        assert any(f.startswith("future-scene") and "archive" in f for f in flags)

    def test_current_scene_text_clean(self, example_script):
        flags = lint_chain_changes(
            example_script, 1, ["Sorrel hands out blankets against the storm."]
        )
        assert flags == ()
