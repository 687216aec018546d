import json
import subprocess
import sys
from pathlib import Path

import pytest

from policysynth.cli import main, parse_seeds
from policysynth.errors import ConfigurationError
from policysynth.specgen import bundled_corpus_path

CORPUS = bundled_corpus_path()
REPLAY = Path(__file__).parent / "fixtures" / "replay"
ENTRY = CORPUS / "s3-public-read"


def run(*argv):
    return main([str(a) for a in argv])


class TestSeeds:
    @pytest.mark.parametrize(
        "text, seeds",
        [("1-3", [1, 2, 3]), ("4,2", [4, 2]), ("1-2,9", [1, 2, 9]), ("7", [7])],
    )
    def test_parse(self, text, seeds):
        assert parse_seeds(text) == seeds

    @pytest.mark.parametrize("text", ["", "a-b", "1-x"])
    def test_bad(self, text):
        with pytest.raises(ConfigurationError):
            parse_seeds(text)


class TestCommands:
    def test_gen_spec(self, tmp_path):
        out = tmp_path / "s.json"
        assert run("gen-spec", "--seed", 7, "--out", out) == 0
        data = json.loads(out.read_text())
        assert data["seed"] == 7
        assert 30 <= len(data["allowed"]) <= 150

    def test_compile_and_compare(self, tmp_path, capsys):
        out = tmp_path / "p.json"
        assert run("compile-dsl", "--in", ENTRY / "spec.fgs", "--out", out) == 0
        assert run("compare", "--p1", out, "--p2", ENTRY / "policy.json") == 0
        assert json.loads(capsys.readouterr().out)["relation"] == "Equivalent"

    def test_compare_difference_exits_one(self, capsys):
        code = run("compare", "--p1", ENTRY / "policy.json", "--p2", CORPUS / "s3-team-shared" / "policy.json", "--bound", 40)
        assert code == 1
        out = json.loads(capsys.readouterr().out)
        assert out["relation"] == "Incomparable"
        assert out["bound"] == 40
        assert out["witness_only_in_first"] is not None

    def test_bound_too_small_is_input_error(self, capsys):
        assert run("compare", "--p1", ENTRY / "policy.json", "--p2", ENTRY / "policy.json", "--bound", 3) == 2
        assert "bound" in capsys.readouterr().err

    def test_count(self, capsys):
        assert run("count", "--policy", ENTRY / "policy.json", "--bound", 40) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["bound"] == 40
        assert int(out["count"]) > 0

    def test_prompt_synthesize_eval(self, tmp_path, capsys):
        spec, prompt, policy = tmp_path / "s.json", tmp_path / "p.json", tmp_path / "pol.json"
        transcript = tmp_path / "t.jsonl"
        assert run("gen-spec", "--seed", 2, "--out", spec) == 0
        assert run("prompt", "--kind", "concrete", "--source", spec, "--out", prompt) == 0
        assert run("synthesize", "--prompt", prompt, "--backend", "oracle", "--out", policy, "--transcript", transcript) == 0
        assert len(transcript.read_text().splitlines()) == 1
        capsys.readouterr()
        assert run("eval", "--policy", policy, "--spec", spec) == 0
        assert json.loads(capsys.readouterr().out)["rate_decimal"] == "1.000000"
        assert run("eval", "--policy", ENTRY / "policy.json", "--spec", spec) == 1

    def test_prompt_raw_matches_golden(self, tmp_path):
        out = tmp_path / "fine.txt"
        assert run("prompt", "--kind", "fine", "--source", ENTRY, "--raw", "--out", out) == 0
        golden = Path(__file__).parent / "golden" / "prompts" / "fine.txt"
        assert out.read_bytes() == golden.read_bytes()

    def test_synthesize_extraction_failure(self, tmp_path, capsys):
        prompt = tmp_path / "p.json"
        run("prompt", "--kind", "coarse", "--source", CORPUS / "s3-yearly-reports", "--out", prompt)
        assert run("synthesize", "--prompt", prompt, "--backend", f"replay:{REPLAY}") == 1
        assert json.loads(capsys.readouterr().out)["failure"] == "NoJsonFound"

    def test_synthesize_bad_prompt_file(self, tmp_path):
        bad = tmp_path / "x.json"
        bad.write_text("not json")
        assert run("synthesize", "--prompt", bad) == 2

    def test_rq_commands(self, tmp_path, capsys):
        assert run("rq1", "--seeds", "1-3", "--backend", "oracle", "--report-dir", tmp_path) == 0
        assert run("rq2", "--backend", f"replay:{REPLAY}", "--report-dir", tmp_path) == 0
        assert run("rq3", "--backend", "oracle", "--report-dir", tmp_path, "--jobs", 4) == 0
        out = capsys.readouterr().out
        assert "rq1 [oracle]: 3/3 scored" in out
        assert "Equivalent=15" in out
        golden = Path(__file__).parent / "golden" / "replay" / "rq2.json"
        assert (tmp_path / "rq2.json").read_bytes() == golden.read_bytes()

    def test_validate_corpus(self, capsys):
        assert run("validate-corpus") == 0
        assert json.loads(capsys.readouterr().out)["failures"] == []

    def test_validate_corpus_failure(self, tmp_path, capsys):
        entry = tmp_path / "bad"
        entry.mkdir()
        for name in ("policy.json", "coarse.txt", "meta.json"):
            (entry / name).write_text((CORPUS / "s3-public-read" / name).read_text())
        (entry / "meta.json").write_text('{"id": "bad"}')
        (entry / "spec.fgs").write_text("ALLOW user:alice WRITE bucket:public-bucket/\n")
        assert run("validate-corpus", "--corpus", tmp_path) == 1
        assert "bad" in capsys.readouterr().err

    @pytest.mark.parametrize(
        "argv",
        [
            ["rq2", "--backend", "http"],
            ["rq2", "--backend", "nonsense"],
            ["rq3", "--backend", "replay:/no/such/dir"],
            ["eval", "--policy", "/no/such", "--spec", "/no/such"],
            ["validate-corpus", "--corpus", "/no/such"],
        ],
    )
    def test_configuration_errors(self, argv, monkeypatch):
        monkeypatch.delenv("POLICYSYNTH_ENDPOINT", raising=False)
        assert run(*argv) == 2

    def test_malformed_policy_input(self, tmp_path):
        bad = tmp_path / "p.json"
        bad.write_text("{")
        assert run("count", "--policy", bad) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "policysynth", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("policysynth ")
