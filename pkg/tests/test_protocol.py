import json
import random
import threading

import pytest

from atpgkit import corpus_path
from atpgkit.faults import enumerate_faults, format_fault
from atpgkit.protocol import (PROTOCOL_VERSION, EnvClient, RunContext, Session,
                              serve_stdio, serve_tcp)

from conftest import load


def rpc(session, **msg):
    reply, close = session.handle_line(json.dumps(msg))
    return json.loads(reply), close


def test_hello_ok():
    reply, close = rpc(Session(), cmd="hello", version=PROTOCOL_VERSION)
    assert reply == {"ok": True, "version": PROTOCOL_VERSION}
    assert not close


def test_hello_version_mismatch_refused():
    reply, close = rpc(Session(), cmd="hello", version=99)
    assert "error" in reply
    assert close  # connection refused


def test_step_before_reset():
    reply, close = rpc(Session(), cmd="step", action=0)
    assert reply["error"] == "no active episode"
    assert not close


def test_malformed_message_keeps_connection():
    session = Session()
    reply, close = session.handle_line("{not json")
    assert "malformed message" in json.loads(reply)["error"]
    assert not close
    reply, close = session.handle_line(json.dumps([1, 2]))
    assert "malformed message" in json.loads(reply)["error"]


def test_unknown_command():
    reply, _ = rpc(Session(), cmd="teleport")
    assert "unknown command" in reply["error"]


def test_invalid_action_keeps_episode():
    nl = load("stemreconv")
    session = Session()
    reply, _ = rpc(session, cmd="reset", bench=corpus_path("stemreconv"),
                   fault="g8 OUT SA1")
    assert reply["done"] is False
    bad = [i for i, ok in enumerate(reply["obs"]["mask"]) if not ok]
    reply2, _ = rpc(session, cmd="step", action=(bad[0] if bad else 99))
    assert "error" in reply2
    # the episode survives: a valid step still works
    good = [i for i, ok in enumerate(reply["obs"]["mask"]) if ok]
    reply3, _ = rpc(session, cmd="step", action=good[0])
    assert "reward" in reply3


def scripted_episode(session, bench, fault_line, seed):
    """Random-valid-action client; returns the transcript as JSON strings."""
    rng = random.Random(seed)
    transcript = []
    reply, _ = rpc(session, cmd="reset", bench=bench, fault=fault_line, seed=seed)
    transcript.append(json.dumps(reply, sort_keys=True))
    while not reply["done"]:
        cands = [i for i, ok in enumerate(reply["obs"]["mask"]) if ok]
        reply, _ = rpc(session, cmd="step", action=rng.choice(cands))
        assert "error" not in reply
        transcript.append(json.dumps(reply, sort_keys=True))
    return transcript


def test_scripted_random_client_completes_episodes():
    nl = load("rnd02")  # 20-gate circuit
    session = Session(backtrack_limit=50)
    bench = corpus_path("rnd02")
    for fault in enumerate_faults(nl)[:30]:
        scripted_episode(session, bench, format_fault(nl, fault), seed=3)
        metrics, _ = rpc(session, cmd="metrics")
        assert metrics["status"] in ("DETECTED", "UNTESTABLE", "ABORTED")
        assert "error" not in metrics


def test_transcript_replay_bit_identical():
    nl = load("rnd02")
    bench = corpus_path("rnd02")
    fault = format_fault(nl, enumerate_faults(nl)[9])
    t1 = scripted_episode(Session(), bench, fault, seed=42)
    t2 = scripted_episode(Session(), bench, fault, seed=42)
    assert t1 == t2


def test_inline_bench_text_reset():
    session = Session()
    reply, _ = rpc(session, cmd="reset",
                   bench_text="INPUT(a)\nINPUT(b)\nOUTPUT(c)\nc = AND(a, b)",
                   fault={"gate": "c", "pin": "OUT", "stuck": 0})
    assert reply["done"] is False or reply["status"]


def test_fault_object_with_input_pin():
    session = Session()
    reply, _ = rpc(session, cmd="reset", bench=corpus_path("c17"),
                   fault={"gate": "22", "pin": "IN:1", "stuck": 1})
    assert "error" not in reply


def test_reset_unknown_gate_reports_error():
    reply, _ = rpc(Session(), cmd="reset", bench=corpus_path("c17"),
                   fault="nosuchgate OUT SA0")
    assert "error" in reply


def test_tcp_roundtrip():
    stop = threading.Event()
    ready = threading.Event()
    t = threading.Thread(
        target=serve_tcp,
        args=("127.0.0.1", 0),
        kwargs=dict(backtrack_limit=50, ready_event=ready, stop_event=stop),
        daemon=True,
    )
    t.start()
    assert ready.wait(5)
    client = EnvClient("127.0.0.1", ready.port)
    try:
        nl = load("stemreconv")
        reply = client.reset(bench=corpus_path("stemreconv"), fault="g8 OUT SA1")
        while not reply["done"]:
            cands = [i for i, ok in enumerate(reply["obs"]["mask"]) if ok]
            reply = client.step(cands[0])
        metrics = client.metrics()
        assert metrics["status"] in ("DETECTED", "UNTESTABLE", "ABORTED")
    finally:
        client.close()
        stop.set()
        t.join(timeout=5)


def test_run_context_records_results():
    nl = load("c17")
    faults = enumerate_faults(nl)[:4]
    run = RunContext(corpus_path("c17"), nl, faults, 50)
    session = Session(run=run)
    info, _ = rpc(session, cmd="run-info")
    assert info["backtrack_limit"] == 50
    assert len(info["faults"]) == 4
    for line in info["faults"]:
        reply, _ = rpc(session, cmd="reset", fault=line)
        while not reply["done"]:
            cands = [i for i, ok in enumerate(reply["obs"]["mask"]) if ok]
            reply, _ = rpc(session, cmd="step", action=cands[0])
    assert run.complete.is_set()
    assert len(run.results) == 4


def test_stdio_server():
    import io

    nl = load("c17")
    fault = format_fault(nl, enumerate_faults(nl)[0])
    lines = [json.dumps({"cmd": "hello", "version": 1}),
             json.dumps({"cmd": "reset", "bench": corpus_path("c17"), "fault": fault})]
    stdin = io.StringIO("\n".join(lines) + "\n")
    stdout = io.StringIO()
    serve_stdio(stdin=stdin, stdout=stdout)
    replies = [json.loads(l) for l in stdout.getvalue().splitlines()]
    assert replies[0]["ok"] is True
    assert "obs" in replies[1]
