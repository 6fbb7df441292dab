"""CLI surface: every path runs offline with mocks or built-in stubs."""

from __future__ import annotations

import json
import subprocess
import sys

import pytest

import stagecraft
from stagecraft.cli import EXIT_OK, EXIT_PROVIDER, EXIT_USAGE, EXIT_VALIDATION, main


@pytest.fixture()
def script_file(tmp_path, example_script_text):
    path = tmp_path / "script.json"
    path.write_text(example_script_text, encoding="utf-8")
    return path


@pytest.fixture()
def premise_file(tmp_path):
    path = tmp_path / "premise.txt"
    path.write_text(
        "A night train hoisting through the mountains loses its last carriage, and the "
        "only passenger who noticed is a retired signalwoman who no longer trusts her "
        "own memory. At the next station nobody believes her, except the conductor, "
        "who insists the train never had a last carriage at all.",
        encoding="utf-8",
    )
    return path


class TestValidate:
    def test_good_script_exits_zero(self, script_file, capsys):
        assert main(["validate", str(script_file)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "3 scenes" in out

    def test_bad_script_exits_one_with_schema_message(self, tmp_path, example_script_text, capsys):
        doc = json.loads(example_script_text)
        for entry in doc["roster"]:
            entry["is_player"] = False
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc), encoding="utf-8")
        assert main(["validate", str(bad)]) == EXIT_VALIDATION
        assert "player" in capsys.readouterr().err

    def test_syntax_error_exits_one(self, tmp_path, capsys):
        broken = tmp_path / "broken.json"
        broken.write_text("{not json", encoding="utf-8")
        assert main(["validate", str(broken)]) == EXIT_VALIDATION

    def test_unknown_flag_exits_64(self, script_file):
        assert main(["validate", str(script_file), "--frobnicate"]) == EXIT_USAGE

    def test_unknown_command_exits_64(self):
        assert main(["dance"]) == EXIT_USAGE


class TestPlaybookCommand:
    def test_list_prints_catalog(self, capsys):
        assert main(["playbook", "list"]) == EXIT_OK
        out = capsys.readouterr().out
        assert "Love" in out and "Suspense" in out and "Symbolism" in out


class TestGenerateCommand:
    def test_offline_generation_writes_script_and_report(self, premise_file, tmp_path, capsys):
        out = tmp_path / "generated.json"
        report = tmp_path / "report.json"
        code = main([
            "generate", "--premise", str(premise_file), "--seed", "5",
            "--out", str(out), "--report", str(report),
        ])
        assert code == EXIT_OK
        document = json.loads(out.read_text())
        assert 3 <= len(document["scenes"]) <= 5
        payload = json.loads(report.read_text())
        assert payload["call_count"] == 16
        assert main(["validate", str(out)]) == EXIT_OK

    def test_provider_failure_exits_two(self, premise_file, tmp_path):
        playlist = tmp_path / "playlist.json"
        playlist.write_text(json.dumps({"responses": ["no sections here"]}), encoding="utf-8")
        code = main(["generate", "--premise", str(premise_file), "--mock", str(playlist)])
        assert code == EXIT_PROVIDER

    def test_mock_and_endpoint_mutually_exclusive(self, premise_file):
        code = main([
            "generate", "--premise", str(premise_file),
            "--mock", "x.json", "--endpoint", "http://nowhere",
        ])
        assert code == EXIT_USAGE


class TestSimulateCommand:
    def test_report_written(self, script_file, tmp_path, capsys):
        report = tmp_path / "sim.json"
        code = main([
            "simulate", "--script", str(script_file), "--persona", "screenwriter",
            "--arch", "hybrid", "--max-turns", "60", "--report", str(report),
        ])
        assert code == EXIT_OK
        payload = json.loads(report.read_text())
        assert payload["finished"] is True
        assert payload["ledger_total"] == payload["predicted_calls"]

    def test_unknown_persona_exits_one(self, script_file, capsys):
        code = main(["simulate", "--script", str(script_file), "--persona", "nobody"])
        assert code == EXIT_VALIDATION


class TestCompareCommand:
    def test_table_printed(self, script_file, capsys):
        code = main([
            "compare", "--script", str(script_file),
            "--persona", "screenwriter", "--max-turns", "40",
        ])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "director-actor" in out and "hybrid-no-reflection" in out

    def test_requires_persona_selection(self, script_file, capsys):
        assert main(["compare", "--script", str(script_file)]) == EXIT_USAGE


class TestProviderSelection:
    def test_env_endpoint_builds_http_provider(self, monkeypatch):
        from stagecraft.cli import _build_cli_provider, build_parser
        from stagecraft.gateway import HttpOpenAiProvider, MockProvider

        args = build_parser().parse_args(["playbook", "list"])
        args.mock = None
        args.endpoint = None
        args.model = ""
        args.api_key = ""
        monkeypatch.delenv("STAGECRAFT_ENDPOINT", raising=False)
        assert isinstance(_build_cli_provider(args), MockProvider)  # offline default
        monkeypatch.setenv("STAGECRAFT_ENDPOINT", "http://llm.internal")
        monkeypatch.setenv("STAGECRAFT_MODEL", "house-model")
        provider = _build_cli_provider(args)
        assert isinstance(provider, HttpOpenAiProvider)
        assert provider.config.endpoint == "http://llm.internal"
        assert provider.config.model == "house-model"


class TestServeCommand:
    def test_serve_wires_config_into_uvicorn(self, tmp_path, monkeypatch):
        config_file = tmp_path / "stagecraft.conf"
        config_file.write_text(
            f"data_dir = {tmp_path / 'data'}\nport = 9311\nprovider = offline\n",
            encoding="utf-8",
        )
        captured = {}

        def fake_run(app, host, port, log_level):
            captured.update(app=app, host=host, port=port)

        import uvicorn

        monkeypatch.setattr(uvicorn, "run", fake_run)
        assert main(["serve", "--config", str(config_file)]) == EXIT_OK
        assert captured["port"] == 9311
        assert captured["app"].title == "stagecraft"


class TestPlayCommand:
    def test_scripted_stdin_session(self, script_file, tmp_path):
        log = tmp_path / "session.jsonl"
        lines = "Tell me what you saw tonight.\n" * 18 + "quit\n"
        process = subprocess.run(
            [sys.executable, "-m", "stagecraft.cli", "play", str(script_file),
             "--arch", "one-for-all", "--k", "5", "--session-log", str(log)],
            input=lines, capture_output=True, text=True, timeout=120,
        )
        assert process.returncode == EXIT_OK, process.stderr
        assert "== Scene 2:" in process.stdout
        assert "The drama has concluded." in process.stdout
        records = [json.loads(l) for l in log.read_text().splitlines()]
        assert len(records) == 18
        assert records[-1]["finished"] is True
