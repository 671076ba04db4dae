#!/usr/bin/env python3
"""Validate the sample documents and the tool's JSON output against schemas/."""
import json
import pathlib
import subprocess
import sys

import jsonschema

ROOT = pathlib.Path(__file__).resolve().parent.parent
SCHEMAS = ROOT / "schemas"
SAMPLES = ROOT / "samples"

INPUTS = {
    "deterministic.json": "problem",
    "random_small.json": "problem",
    "delay.json": "problem",
    "delay_linear.json": "problem",
    "stopping.json": "stopping",
    "discounted.json": "generator",
    "discounted_two_mode.json": "generator",
    "discounted_stopping.json": "generator",
    "hydro_small.json": "hydro_config",
}


def validator(name):
    schema = json.loads((SCHEMAS / f"{name}.schema.json").read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    return jsonschema.Draft202012Validator(schema)


def run(tool, *args):
    out = subprocess.run([tool, *args], capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    tool = sys.argv[1]
    failures = 0

    def check(kind, doc, label):
        nonlocal failures
        errors = sorted(validator(kind).iter_errors(doc), key=str)
        for e in errors:
            print(f"{label}: {e.message}")
        failures += bool(errors)

    for name, kind in INPUTS.items():
        check(kind, json.loads((SAMPLES / name).read_text()), name)

    hydro = json.loads(subprocess.run([tool, "hydro", "--config", str(SAMPLES / "hydro_small.json"), "--simulate", "10"],
                                      capture_output=True, text=True, check=True).stdout)
    cfg = dict(hydro["config"], version=1)
    check("hydro_config", cfg, "hydro output config")

    problem = str(SAMPLES / "random_small.json")
    check("value_field", run(tool, "solve", problem), "solve output")
    triple = run(tool, "rbsde", problem)
    check("rbsde_triple", triple, "rbsde output")
    path = pathlib.Path(sys.argv[2] if len(sys.argv) > 2 else "triple_for_schema.json")
    path.write_text(json.dumps(triple))
    check("verification_report", run(tool, "rbsde", problem, "--verify", str(path)), "verification output")

    print("schema validation", "failed" if failures else "passed")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
