#!/usr/bin/env python3
"""Runs every CLI command and validates its outputs against docs/schemas."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

BIN, SCHEMAS = pathlib.Path(sys.argv[1]), pathlib.Path(sys.argv[2])
SMALL = ["--horizon", "4096", "--K", "6", "--pitch", "1/64"]

COMMANDS = [
    ("analyze", ["analyze", "--seq", "char:powers2", "--ideal", "density-zero", *SMALL]),
    ("analyze", ["analyze", "--seq", "rationals", "--ideal", "fin", *SMALL]),
    ("analyze", ["analyze", "--seq", "char:evens", "--ideal", "Z", "--mode", "lambda", "--q", "1/4", *SMALL]),
    ("witness_build", ["witness", "build", "--ideal", "summable"]),
    ("witness_build", ["witness", "build", "--ideal", "fin-x-fin"]),
    ("witness_verify", ["witness", "verify", "--ideal", "density-zero", "--trials", "3"]),
    ("preserve", ["preserve", "sigma", "--seq", "char:evens", "--ideal", "Z", *SMALL]),
    ("preserve", ["preserve", "pi", "--seq", "char:powers2", "--ideal", "Z", "--mode", "add", "--ell", "1", *SMALL]),
    ("game", ["game", "run", "--seq", "char:evens", "--ideal", "Z", "--ell", "1", "--rounds", "5"]),
    ("game", ["game", "run", "--seq", "char:powers2", "--ideal", "Z", "--ell", "1", "--kind", "pi"]),
    ("sample", ["sample", "--seq", "cycle:3", "--ideal", "Z", "--trials", "2", *SMALL]),
    ("ideals_list", ["ideals", "list"]),
]


def schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def main():
    failures = 0
    with tempfile.TemporaryDirectory() as tmp:
        for i, (name, args) in enumerate(COMMANDS):
            base = pathlib.Path(tmp) / f"run{i}"
            proc = subprocess.run([str(BIN), *args, "--out", str(base)], capture_output=True, text=True)
            if proc.returncode != 0:
                print(f"FAIL {' '.join(args)}: exit {proc.returncode} {proc.stderr}")
                failures += 1
                continue
            try:
                report = json.loads(base.with_suffix(".json").read_text())
                jsonschema.validate(report, schema(name))
                jsonschema.validate(report["config"], schema("config"))
                jsonschema.validate(json.loads(pathlib.Path(f"{base}.meta.json").read_text()), schema("meta"))
                # The embedded config replays the run.
                cfg = pathlib.Path(tmp) / f"cfg{i}.json"
                cfg.write_text(json.dumps(dict(report["config"], out="")))
                again = subprocess.run([str(BIN), *args[: 2 if args[0] in ("witness", "preserve", "game", "ideals") else 1],
                                        "--config", str(cfg)], capture_output=True, text=True)
                replay = json.loads(again.stdout)
                replay["config"]["out"] = report["config"]["out"]
                if replay != report:
                    raise AssertionError("config replay differs")
                print(f"ok   {' '.join(args)}")
            except Exception as e:  # noqa: BLE001
                print(f"FAIL {' '.join(args)}: {e}")
                failures += 1
        for args in (["analyze", "--ideal", "nope"], ["preserve", "sigma", "--seq", "char:powers2", "--ideal", "Z", *SMALL]):
            proc = subprocess.run([str(BIN), *args], capture_output=True, text=True)
            try:
                jsonschema.validate(json.loads(proc.stderr), schema("error"))
                print(f"ok   error output of {' '.join(args)} (exit {proc.returncode})")
            except Exception as e:  # noqa: BLE001
                print(f"FAIL error output of {' '.join(args)}: {e}")
                failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
