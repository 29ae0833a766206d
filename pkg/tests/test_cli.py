import json
import subprocess
import sys
from pathlib import Path

from nlcmd import load_kb

from conftest import DEMO_CORPUS, DEMO_SPEC, GOLDEN


def run_cli(*args, stdin=None):
    return subprocess.run(
        [sys.executable, "-m", "nlcmd", *args],
        input=stdin,
        capture_output=True,
        text=True,
        timeout=120,
    )


def compiled_kb(tmp_path) -> Path:
    out = tmp_path / "kb.json"
    res = run_cli("compile", "--seed-spec", str(DEMO_SPEC), "--out", str(out))
    assert res.returncode == 0, res.stderr
    return out


class TestCompile:
    def test_compile_demo(self, tmp_path):
        out = compiled_kb(tmp_path)
        kb = load_kb(out.read_bytes())
        assert len(kb.apis) == 3
        assert kb.sc_count() == 6

    def test_compile_bad_spec(self, tmp_path):
        bad = tmp_path / "bad.scs"
        bad.write_text('api A(X1: ghost) "a"\n')
        res = run_cli("compile", "--seed-spec", str(bad), "--out", str(tmp_path / "o.json"))
        assert res.returncode == 2
        assert "ghost" in res.stderr

    def test_missing_spec_file(self, tmp_path):
        res = run_cli("compile", "--seed-spec", str(tmp_path / "no.scs"), "--out", "o.json")
        assert res.returncode == 2


class TestRepl:
    def test_reference_transcript_golden(self, tmp_path):
        kb = compiled_kb(tmp_path)
        stdin = "Turn off the light in the kitchen\n1\nTurn off the light in the kitchen\n:quit\n"
        res = run_cli("repl", "--kb", str(kb), stdin=stdin)
        assert res.returncode == 0, res.stderr
        assert res.stdout == (GOLDEN / "repl_transcript.txt").read_text()

    def test_save_meta_command(self, tmp_path):
        kb_path = compiled_kb(tmp_path)
        stdin = "Turn off the light in the kitchen\n1\n:save\n:quit\n"
        res = run_cli("repl", "--kb", str(kb_path), stdin=stdin)
        assert res.returncode == 0, res.stderr
        assert "Saved KB" in res.stdout
        kb = load_kb(kb_path.read_bytes())
        assert kb.learned_sc_count() == 1

    def test_kb_meta_command(self, tmp_path):
        kb = compiled_kb(tmp_path)
        res = run_cli("repl", "--kb", str(kb), stdin=":kb\n:quit\n")
        assert "3 APIs" in res.stdout
        assert "6 seed commands" in res.stdout

    def test_save_kb_flag_on_exit(self, tmp_path):
        kb = compiled_kb(tmp_path)
        learned = tmp_path / "learned.json"
        stdin = "Turn off the light in the kitchen\n1\n:quit\n"
        res = run_cli("repl", "--kb", str(kb), "--save-kb", str(learned), stdin=stdin)
        assert res.returncode == 0, res.stderr
        assert load_kb(learned.read_bytes()).learned_sc_count() == 1

    def test_missing_kb_file(self):
        res = run_cli("repl", "--kb", "/nonexistent/kb.json", stdin="")
        assert res.returncode == 2
        assert "cannot read KB file" in res.stderr

    def test_invalid_option_reprompts(self, tmp_path):
        kb = compiled_kb(tmp_path)
        stdin = "Turn off the light in the kitchen\n99\n1\n:quit\n"
        res = run_cli("repl", "--kb", str(kb), stdin=stdin)
        assert res.returncode == 0
        assert "Try again" in res.stdout
        assert "Done: SwitchOffLight(X1=kitchen)" in res.stdout


class TestEval:
    def test_eval_demo_corpus(self, tmp_path):
        kb = compiled_kb(tmp_path)
        report_path = tmp_path / "report.json"
        res = run_cli(
            "eval",
            "--kb", str(kb),
            "--corpus", str(DEMO_CORPUS),
            "--report-out", str(report_path),
        )
        assert res.returncode == 0, res.stderr
        assert "exec accuracy" in res.stdout
        doc = json.loads(report_path.read_text())
        assert doc["n"] == 5
        assert doc["pass2_accuracy"] >= doc["pass1_accuracy"]

    def test_eval_deterministic(self, tmp_path):
        kb = compiled_kb(tmp_path)
        out1 = tmp_path / "r1.json"
        out2 = tmp_path / "r2.json"
        for out in (out1, out2):
            res = run_cli(
                "eval", "--kb", str(kb), "--corpus", str(DEMO_CORPUS), "--report-out", str(out)
            )
            assert res.returncode == 0, res.stderr
        assert out1.read_bytes() == out2.read_bytes()

    def test_eval_bad_corpus(self, tmp_path):
        kb = compiled_kb(tmp_path)
        corpus = tmp_path / "bad.jsonl"
        corpus.write_text('{"utterance": "x", "gold_api": "Ghost"}\n')
        res = run_cli("eval", "--kb", str(kb), "--corpus", str(corpus))
        assert res.returncode == 1
        assert "Ghost" in res.stderr

    def test_eval_save_kb(self, tmp_path):
        kb = compiled_kb(tmp_path)
        learned = tmp_path / "learned.json"
        res = run_cli(
            "eval",
            "--kb", str(kb),
            "--corpus", str(DEMO_CORPUS),
            "--save-kb", str(learned),
        )
        assert res.returncode == 0, res.stderr
        assert load_kb(learned.read_bytes()).learned_sc_count() >= 1


def test_usage_error_exit_code():
    res = run_cli("repl")  # missing --kb
    assert res.returncode == 2
