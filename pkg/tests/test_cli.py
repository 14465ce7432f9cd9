"""Command line behavior, exercised through real subprocesses."""

from __future__ import annotations

import json
import os
import socket
import subprocess
import sys
import time
import urllib.request

import pytest

from conftest import DATA_DIR, FIXTURE_CORPUS


def run_cli(*args, stdin=None, env_extra=None, timeout=60):
    env = dict(os.environ)
    env.pop("HERITAGEBOT_PURE_PYTHON", None)
    if env_extra:
        env.update(env_extra)
    return subprocess.run(
        [sys.executable, "-m", "heritagebot", *args],
        input=stdin,
        capture_output=True,
        text=True,
        env=env,
        timeout=timeout,
    )


@pytest.fixture(scope="module")
def built_index(tmp_path_factory):
    index = tmp_path_factory.mktemp("cli") / "heritage.idx"
    result = run_cli("ingest", "--data", str(FIXTURE_CORPUS), "--index", str(index))
    assert result.returncode == 0, result.stderr
    return str(index)


class TestIngest:
    def test_summary_line(self, tmp_path):
        index = tmp_path / "idx.bin"
        result = run_cli("ingest", "--data", str(FIXTURE_CORPUS), "--index", str(index))
        assert result.returncode == 0
        assert "100 records" in result.stdout
        assert "local-hash" in result.stdout
        assert index.exists()

    def test_json_summary(self, tmp_path):
        index = tmp_path / "idx.bin"
        result = run_cli(
            "ingest", "--data", str(FIXTURE_CORPUS), "--index", str(index),
            "--format", "json",
        )
        body = json.loads(result.stdout)
        assert body["records"] == 100
        assert body["dim"] == 256
        assert body["provider_id"] == "local-hash"

    def test_csv_input(self, tmp_path):
        data = tmp_path / "sites.csv"
        data.write_text(
            "main_key,name_eng,h_eng_dong,h_eng_gu,h_eng_city\n"
            "1,Palace,Dong,Gu,Seoul\n",
            encoding="utf-8",
        )
        index = tmp_path / "idx.bin"
        result = run_cli("ingest", "--data", str(data), "--index", str(index))
        assert result.returncode == 0
        assert "1 records" in result.stdout

    def test_empty_dataset(self, tmp_path):
        data = tmp_path / "empty.jsonl"
        data.write_text("", encoding="utf-8")
        index = tmp_path / "idx.bin"
        result = run_cli("ingest", "--data", str(data), "--index", str(index))
        assert result.returncode == 0
        assert "0 records" in result.stdout

    def test_duplicate_key_exit_1_with_line(self, tmp_path):
        index = tmp_path / "idx.bin"
        result = run_cli(
            "ingest", "--data", str(DATA_DIR / "bad_duplicate_key.jsonl"),
            "--index", str(index),
        )
        assert result.returncode == 1
        assert "7" in result.stderr
        assert "line 3" in result.stderr
        assert not index.exists()

    def test_missing_field_exit_1_with_line(self, tmp_path):
        index = tmp_path / "idx.bin"
        result = run_cli(
            "ingest", "--data", str(DATA_DIR / "bad_missing_name.jsonl"),
            "--index", str(index),
        )
        assert result.returncode == 1
        assert "name_eng" in result.stderr
        assert "line 2" in result.stderr

    def test_missing_data_file_exit_2(self, tmp_path):
        result = run_cli(
            "ingest", "--data", str(tmp_path / "absent.jsonl"),
            "--index", str(tmp_path / "idx.bin"),
        )
        assert result.returncode == 2

    def test_unwritable_index_path_exit_2(self, tmp_path):
        result = run_cli(
            "ingest", "--data", str(FIXTURE_CORPUS),
            "--index", str(tmp_path / "no-dir" / "idx.bin"),
        )
        assert result.returncode == 2

    def test_unreachable_remote_provider_exit_3(self, tmp_path):
        result = run_cli(
            "ingest", "--data", str(FIXTURE_CORPUS),
            "--index", str(tmp_path / "idx.bin"), "--provider", "remote",
            env_extra={
                "RAG_API_BASE": "http://127.0.0.1:9/v1",
                "RAG_EMBED_MODEL": "embed-small",
                "RAG_API_KEY": "sk-test",
            },
        )
        assert result.returncode == 3


class TestQuery:
    def test_text_output(self, built_index):
        result = run_cli(
            "query", "Gyeongbokgung Palace",
            "--data", str(FIXTURE_CORPUS), "--index", built_index, "--k", "3",
        )
        assert result.returncode == 0
        lines = result.stdout.strip().split("\n")
        assert len(lines) == 3
        key, score, rendered = lines[0].split("\t")
        assert key == "1"
        assert "Gyeongbokgung Palace" in rendered
        assert float(score) > 0.3

    def test_json_output(self, built_index):
        result = run_cli(
            "query", "palace gate",
            "--data", str(FIXTURE_CORPUS), "--index", built_index,
            "--k", "5", "--format", "json",
        )
        body = json.loads(result.stdout)
        assert len(body["hits"]) == 5
        scores = [h["score"] for h in body["hits"]]
        assert scores == sorted(scores, reverse=True)
        assert set(body["hits"][0]["record"]) == {
            "main_key", "name_eng", "h_eng_dong", "h_eng_gu", "h_eng_city"
        }

    def test_missing_index_exit_2(self, tmp_path):
        result = run_cli(
            "query", "palace", "--data", str(FIXTURE_CORPUS),
            "--index", str(tmp_path / "absent.idx"),
        )
        assert result.returncode == 2

    def test_corrupt_index_exit_1(self, built_index, tmp_path):
        corrupt = tmp_path / "corrupt.idx"
        raw = bytearray(open(built_index, "rb").read())
        raw[len(raw) // 2] ^= 0xFF
        corrupt.write_bytes(bytes(raw))
        result = run_cli(
            "query", "palace", "--data", str(FIXTURE_CORPUS), "--index", str(corrupt)
        )
        assert result.returncode == 1


class TestRepl:
    def test_quit_immediately(self, built_index):
        result = run_cli(
            "repl", "--data", str(FIXTURE_CORPUS), "--index", built_index,
            "--backend", "echo", stdin=":q\n",
        )
        assert result.returncode == 0

    def test_eof_exits_zero(self, built_index):
        result = run_cli(
            "repl", "--data", str(FIXTURE_CORPUS), "--index", built_index,
            "--backend", "echo", stdin="",
        )
        assert result.returncode == 0

    def test_echo_turn_text_mode(self, built_index):
        result = run_cli(
            "repl", "--data", str(FIXTURE_CORPUS), "--index", built_index,
            "--backend", "echo", stdin="Gyeongbokgung Palace\n:q\n",
        )
        assert result.returncode == 0
        assert "bot> " in result.stdout
        assert "Gyeongbokgung Palace" in result.stdout
        assert "sources: " in result.stdout

    def test_unknown_command_keeps_loop_alive(self, built_index):
        result = run_cli(
            "repl", "--data", str(FIXTURE_CORPUS), "--index", built_index,
            "--backend", "echo", stdin=":wat\nGyeongbokgung Palace\n:q\n",
        )
        assert result.returncode == 0
        assert "unknown command" in result.stdout
        assert "bot> " in result.stdout

    def test_backend_error_keeps_loop_alive(self, built_index, tmp_path):
        script = tmp_path / "script.jsonl"
        script.write_text('"only one reply"\n', encoding="utf-8")
        stdin = "first question\nsecond question\nthird question\n:q\n"
        result = run_cli(
            "repl", "--data", str(FIXTURE_CORPUS), "--index", built_index,
            "--backend", "scripted", "--script", str(script), stdin=stdin,
        )
        assert result.returncode == 0
        assert result.stdout.count("bot> ") == 1
        assert result.stdout.count("error (") == 2

    def test_scripted_requires_script_flag(self, built_index):
        result = run_cli(
            "repl", "--data", str(FIXTURE_CORPUS), "--index", built_index,
            "--backend", "scripted", stdin=":q\n",
        )
        assert result.returncode == 1
        assert "--script" in result.stderr

    def test_json_turn_payload(self, built_index):
        result = run_cli(
            "repl", "--data", str(FIXTURE_CORPUS), "--index", built_index,
            "--backend", "echo", "--format", "json",
            stdin="Gyeongbokgung Palace\n:q\n",
        )
        assert result.returncode == 0
        payload = json.loads(result.stdout.strip().split("\n")[0])
        assert payload["mode"] == "answer"
        assert payload["hits"]
        assert payload["prompt"]["messages"][0]["role"] == "system"
        assert "ONLY" in payload["prompt"]["guideline"]

    def test_suggest_command_emits_suggestions(self, built_index, tmp_path):
        script = tmp_path / "script.jsonl"
        script.write_text(json.dumps("One?\nTwo?\nThree?") + "\n", encoding="utf-8")
        result = run_cli(
            "repl", "--data", str(FIXTURE_CORPUS), "--index", built_index,
            "--backend", "scripted", "--script", str(script), "--format", "json",
            stdin=":suggest palaces\n:q\n",
        )
        payload = json.loads(result.stdout.strip().split("\n")[0])
        assert payload["mode"] == "suggest_followups"
        assert payload["suggestions"] == ["One?", "Two?", "Three?"]


class TestGoldenTranscript:
    def test_fixed_session_reproduces_exact_bytes(self, built_index):
        result = run_cli(
            "repl", "--data", str(FIXTURE_CORPUS), "--index", built_index,
            "--backend", "scripted", "--script", str(DATA_DIR / "repl_replies.jsonl"),
            "--format", "json",
            stdin=(DATA_DIR / "repl_session_input.txt").read_text(encoding="utf-8"),
        )
        assert result.returncode == 0
        golden = (DATA_DIR / "golden_repl_transcript.jsonl").read_text(encoding="utf-8")
        assert result.stdout == golden


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class TestServe:
    def test_serves_http_api(self, built_index, tmp_path):
        port = free_port()
        env = dict(os.environ)
        proc = subprocess.Popen(
            [
                sys.executable, "-m", "heritagebot", "serve",
                "--data", str(FIXTURE_CORPUS), "--index", built_index,
                "--backend", "echo", "--listen", f"127.0.0.1:{port}",
            ],
            stdout=subprocess.DEVNULL,
            stderr=subprocess.DEVNULL,
            env=env,
        )
        base = f"http://127.0.0.1:{port}/v1"
        try:
            deadline = time.time() + 30
            health = None
            while time.time() < deadline:
                try:
                    with urllib.request.urlopen(f"{base}/health", timeout=1) as resp:
                        health = json.load(resp)
                    break
                except OSError:
                    time.sleep(0.2)
            assert health is not None, "service never became healthy"
            assert health["corpus_size"] == 100

            req = urllib.request.Request(
                f"{base}/sessions", data=b"{}", method="POST",
                headers={"content-type": "application/json"},
            )
            with urllib.request.urlopen(req, timeout=5) as resp:
                assert resp.status == 201
                sid = json.load(resp)["session_id"]

            body = json.dumps({"text": "Gyeongbokgung Palace"}).encode()
            req = urllib.request.Request(
                f"{base}/sessions/{sid}/messages", data=body, method="POST",
                headers={"content-type": "application/json"},
            )
            with urllib.request.urlopen(req, timeout=15) as resp:
                out = json.load(resp)
            assert "Gyeongbokgung" in out["reply"]
            assert out["hits"]
        finally:
            proc.terminate()
            proc.wait(timeout=10)
