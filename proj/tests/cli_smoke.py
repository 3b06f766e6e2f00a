#!/usr/bin/env python3
"""End-to-end exercise of the georank CLI and its HTTP service.

Usage: cli_smoke.py <georank-binary> <work-dir>
"""
import json
import shutil
import subprocess
import sys
import time
import urllib.error
import urllib.request
from pathlib import Path

BIN = Path(sys.argv[1])
WORK = Path(sys.argv[2])

failures = []


def check(name, ok, detail=""):
    print(f"{'ok' if ok else 'FAIL'}  {name}  {detail}")
    if not ok:
        failures.append(name)


def run(*args, expect=0):
    proc = subprocess.run([str(BIN), *map(str, args)], capture_output=True, text=True)
    ok = proc.returncode == expect
    check(" ".join(map(str, args[:2])), ok,
          f"exit {proc.returncode} (want {expect})" + ("" if ok else f"\n{proc.stderr}"))
    return proc


def strip_config(obj):
    if isinstance(obj, dict):
        return {k: strip_config(v) for k, v in obj.items() if k != "config"}
    if isinstance(obj, list):
        return [strip_config(v) for v in obj]
    return obj


def main():
    shutil.rmtree(WORK, ignore_errors=True)
    WORK.mkdir(parents=True)
    store = WORK / "store"
    dataset = WORK / "dataset.jsonl"
    ckpt = WORK / "scorer.bin"
    report = WORK / "report.json"

    # pipeline: synth -> ingest -> build-dataset -> train -> rank -> eval -> report
    run("synth", "--out", store, "--seed", 3, "--candidates", 300,
        "--queries", 60, "--clusters", 6)
    run("ingest", "--store", store, "--adapter-steps", 20)
    run("build-dataset", "--store", store, "--dataset", dataset)
    run("train", "--store", store, "--dataset", dataset, "--checkpoint", ckpt,
        "--epochs", 1, "--hidden", 32)
    proc = run("rank", "--store", store, "--checkpoint", ckpt, "--n-retrieved", 5)
    lines = [l for l in proc.stdout.splitlines() if l.strip()]
    check("rank emits one JSON line per query", len(lines) == 60, f"{len(lines)} lines")
    first = json.loads(lines[0])
    check("rank line has chosen gps", "chosen" in first and "lat" in first["chosen"])
    check("rank scores match the pool", len(first["scores"]) == 5)
    run("eval", "--store", store, "--checkpoint", ckpt, "--report", report)
    check("eval wrote a report", report.exists())
    rep = json.loads(report.read_text())
    check("report embeds its config", "config" in rep and "oracle" in rep)
    run("report", report)

    # deterministic rerun: identical modulo the embedded output path
    report2 = WORK / "report2.json"
    run("eval", "--store", store, "--checkpoint", ckpt, "--report", report2)
    rep2 = json.loads(report2.read_text())
    check("eval reruns identically", strip_config(rep) == strip_config(rep2))

    # rank and serve agree on the same query (checked below once serve is up)

    # error contract: missing checkpoint -> exit 1, message names the path
    proc = subprocess.run(
        [str(BIN), "eval", "--store", str(store), "--checkpoint", str(WORK / "absent.bin"),
         "--report", str(WORK / "r.json")],
        capture_output=True, text=True)
    check("missing checkpoint exits 1", proc.returncode == 1, f"exit {proc.returncode}")
    check("missing checkpoint names the path", "absent.bin" in proc.stderr, proc.stderr.strip())

    # error contract: out-of-range lambda -> exit 1
    proc = subprocess.run(
        [str(BIN), "train", "--store", str(store), "--dataset", str(dataset),
         "--checkpoint", str(ckpt), "--lambda", "1.2"],
        capture_output=True, text=True)
    check("lambda 1.2 exits 1", proc.returncode == 1, f"exit {proc.returncode}")

    # HTTP service
    port = 18472
    srv = subprocess.Popen(
        [str(BIN), "serve", "--store", str(store), "--checkpoint", str(ckpt),
         "--port", str(port)],
        stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
    try:
        base = f"http://127.0.0.1:{port}"
        health = None
        for _ in range(50):
            if srv.poll() is not None:
                break
            try:
                with urllib.request.urlopen(base + "/health", timeout=1) as r:
                    health = json.loads(r.read())
                break
            except (urllib.error.URLError, ConnectionError):
                time.sleep(0.2)
        check("/health responds", health is not None,
              "" if health else (srv.stderr.read() if srv.poll() is not None else "timeout"))
        if health:
            check("/health reports candidate count", health.get("candidates") == 300, str(health))

            world = json.loads((store / "world.json").read_text())
            dim_img = world["dim_img"]

            def post(body, want_status=200):
                req = urllib.request.Request(base + "/rank", data=body.encode(),
                                             headers={"Content-Type": "application/json"})
                try:
                    with urllib.request.urlopen(req, timeout=10) as r:
                        return r.status, json.loads(r.read())
                except urllib.error.HTTPError as e:
                    return e.code, e.read().decode()

            status, body = post(json.dumps({"query_emb": [0.1] * dim_img, "n_retrieved": 5}))
            check("/rank succeeds", status == 200, f"{status} {body}")
            if status == 200:
                check("/rank returns scores + source",
                      len(body["scores"]) == 5 and body["source"] in ("retrieved", "generated"),
                      str(body))
                status2, body2 = post(json.dumps({"query_emb": [0.1] * dim_img, "n_retrieved": 5}))
                check("/rank is deterministic", body2 == body)

            status, body = post("{not json")
            check("malformed body -> 400", status == 400, f"{status} {body}")
            status, body = post(json.dumps({"n_retrieved": 5}))
            check("missing query_emb -> 400 naming the field",
                  status == 400 and "query_emb" in str(body), f"{status} {body}")
            status, body = post(json.dumps({"query_emb": [0.1] * (dim_img + 1), "n_retrieved": 5}))
            check("dim mismatch -> 422", status == 422, f"{status} {body}")
            status, body = post(json.dumps({"query_emb": [0.1] * dim_img, "n_retrieved": 0,
                                            "generated": []}))
            check("empty pool -> 422", status == 422, f"{status} {body}")
    finally:
        srv.terminate()
        try:
            srv.wait(timeout=5)
        except subprocess.TimeoutExpired:
            srv.kill()

    if failures:
        print(f"{len(failures)} checks failed: {failures}")
        return 1
    print("cli smoke passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
