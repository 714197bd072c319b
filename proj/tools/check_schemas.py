#!/usr/bin/env python3
# Copyright 2026 The ftlab Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Checks sample configs, generated reports and error lines against schemas/."""

import argparse
import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema


def load(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


def validator(schema_dir, name):
    schema = load(schema_dir / name)
    cls = jsonschema.validators.validator_for(schema)
    cls.check_schema(schema)
    return cls(schema)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--cli", required=True)
    ap.add_argument("--schemas", required=True, type=pathlib.Path)
    ap.add_argument("--configs", required=True, type=pathlib.Path)
    args = ap.parse_args()

    config_v = validator(args.schemas, "config.schema.json")
    report_v = validator(args.schemas, "report.schema.json")
    error_v = validator(args.schemas, "error.schema.json")
    failures = 0

    def check(v, doc, label):
        nonlocal failures
        errors = sorted(v.iter_errors(doc), key=lambda e: list(e.path))
        if errors:
            failures += 1
            print(f"FAIL {label}: {errors[0].message} at {list(errors[0].path)}")
        else:
            print(f"ok   {label}")

    configs = sorted(args.configs.glob("*.json"))
    if not configs:
        print("no configs found")
        return 1
    with tempfile.TemporaryDirectory() as tmp:
        for path in configs:
            cfg = load(path)
            check(config_v, cfg, f"config {path.name}")
            out = pathlib.Path(tmp) / (path.stem + ".report.json")
            proc = subprocess.run(
                [args.cli, cfg["command"], "--config", str(path), "--out", str(out), "--format", "json"],
                capture_output=True, text=True, check=False)
            if proc.returncode == 0:
                check(report_v, load(out), f"report {path.name}")
            else:
                check(error_v, json.loads(proc.stderr.strip().splitlines()[-1]), f"error {path.name}")

        bad = pathlib.Path(tmp) / "bad.json"
        bad.write_text('{"command": "threshold", "params": {"L0": 5, "t": 1, "bogus": 1}}', encoding="utf-8")
        if not list(config_v.iter_errors(load(bad))):
            failures += 1
            print("FAIL schema accepts an unknown params key")
        proc = subprocess.run([args.cli, "threshold", "--config", str(bad)], capture_output=True, text=True, check=False)
        if proc.returncode != 2:
            failures += 1
            print(f"FAIL unknown key exit code {proc.returncode}")
        check(error_v, json.loads(proc.stderr.strip()), "error line for unknown key")

    print(f"{failures} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
