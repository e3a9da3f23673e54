"""End-to-end checks of the psrlab command line: schemas, exit codes, determinism.

Usage: test_cli.py <psrlab-binary> <source-dir> <scratch-dir> [unittest args]
"""

import csv
import json
import os
import pathlib
import shutil
import subprocess
import sys
import unittest

import jsonschema
from referencing import Registry, Resource

CLI = SOURCE = SCRATCH = None
REGISTRY = None


def load_registry(schema_dir):
    resources = []
    for path in sorted(schema_dir.glob("*.schema.json")):
        doc = json.loads(path.read_text())
        resources.append((doc["$id"], Resource.from_contents(doc)))
    return Registry().with_resources(resources)


def validate(instance, name):
    schema = REGISTRY.contents("https://psrlab.local/schemas/" + name)
    jsonschema.Draft202012Validator(schema, registry=REGISTRY).validate(instance)


def run(*args, env=None, check=True):
    full_env = dict(os.environ)
    full_env.pop("PSRLAB_BUDGET", None)
    if env:
        full_env.update(env)
    proc = subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, env=full_env)
    if check and proc.returncode != 0:
        raise AssertionError(f"{args} exited {proc.returncode}: {proc.stderr}")
    return proc


def read_trace(path):
    def cell(key, text):
        if text == "":
            return None
        if key in ("k", "conf_set_size", "fstar_in_set"):
            return int(text)
        return float(text)

    with open(path, newline="") as f:
        return [{k: cell(k, v) for k, v in row.items()} for row in csv.DictReader(f)]


class Base(unittest.TestCase):
    def setUp(self):
        self.dir = SCRATCH / self.id().split(".")[-1]
        shutil.rmtree(self.dir, ignore_errors=True)
        self.dir.mkdir(parents=True)

    def lock(self, alpha="0.1", horizon="3"):
        path = self.dir / f"lock_{alpha}_{horizon}.json"
        run("make-lock", "--alpha", alpha, "--actions", 2, "--horizon", horizon, "--seed", 1, "--out", path)
        return path


class Schemas(Base):
    def test_generated_models(self):
        validate(json.loads(self.lock().read_text()), "pomdp.schema.json")
        for family, extra in [
            ("random-revealing", ["--states", 2, "--obs", 3]),
            ("random-decodable", ["--states", 2, "--obs", 3]),
            ("random-lowrank", ["--states", 4, "--obs", 2, "--d-trans", 2]),
        ]:
            out = self.dir / f"{family}.json"
            run("make-random", "--family", family, *extra, "--horizon", 3, "--seed", 5, "--out", out)
            validate(json.loads(out.read_text()), "pomdp.schema.json")

    def test_lift_diagnose_plan(self):
        lock = self.lock()
        lift = self.dir / "lift.json"
        run("lift", "--pomdp", lock, "--m", 1, "--out", lift)
        report = json.loads(lift.read_text())
        validate(report, "lift_report.schema.json")
        psr = self.dir / "psr.json"
        psr.write_text(json.dumps(report["model"]))
        for model in (lock, psr):
            diag = json.loads(run("diagnose", "--model", model, "--m", 1).stdout)
            validate(diag, "diagnose_report.schema.json")
            plan = json.loads(run("plan", "--model", model, "--m", 1).stdout)
            validate(plan, "plan.schema.json")
            self.assertAlmostEqual(plan["value"], 1.0, places=12)

    def test_simulate_lines(self):
        lines = run("simulate", "--pomdp", self.lock(), "--episodes", 5, "--seed", 3).stdout.splitlines()
        self.assertEqual(len(lines), 5)
        for line in lines:
            validate(json.loads(line), "episode.schema.json")

    def test_experiment_artifacts(self):
        out = self.dir / "exp"
        cfg = json.loads((SOURCE / "configs" / "acceptance_lock.json").read_text())
        cfg["K"] = 20
        cfg["seeds"] = [1, 2, 3]
        path = self.dir / "cfg.json"
        path.write_text(json.dumps(cfg))
        run("run-experiment", "--config", path, "--out", out)
        validate(json.loads((out / "summary.json").read_text()), "summary.schema.json")
        validate(json.loads((out / "failures.json").read_text()), "failures.schema.json")
        validate(json.loads((out / "config.json").read_text()), "config.schema.json")
        for seed in cfg["seeds"]:
            rows = read_trace(out / f"trace_seed{seed}.csv")
            self.assertEqual(len(rows), 20)
            for row in rows:
                validate(row, "trace_row.schema.json")

    def test_run_crane_trace(self):
        out = self.dir / "trace.csv"
        run("run-crane", "--env", self.lock("0.2"), "--class", "lock-family", "--K", 10, "--seed", 4, "--diagnostics",
            "--out", out)
        rows = read_trace(out)
        self.assertEqual([r["k"] for r in rows], list(range(1, 11)))
        for row in rows:
            validate(row, "trace_row.schema.json")

    def test_shipped_configs(self):
        for path in sorted((SOURCE / "configs").glob("*.json")):
            validate(json.loads(path.read_text()), "config.schema.json")


class ExitCodes(Base):
    def test_success(self):
        self.assertEqual(run("make-lock", "--alpha", 0.1, "--out", self.dir / "l.json").returncode, 0)

    def test_cli_usage_errors(self):
        self.assertEqual(run("lift", "--bogus", check=False).returncode, 2)
        self.assertEqual(run("no-such-command", check=False).returncode, 2)

    def test_parse_errors(self):
        bad = self.dir / "bad.json"
        bad.write_text('{"S": 2,')
        self.assertEqual(run("lift", "--pomdp", bad, "--m", 1, check=False).returncode, 2)
        cfg = json.loads((SOURCE / "configs" / "acceptance_lock.json").read_text())
        cfg["betta"] = 1
        path = self.dir / "typo.json"
        path.write_text(json.dumps(cfg))
        proc = run("run-experiment", "--config", path, check=False)
        self.assertEqual(proc.returncode, 2)
        self.assertIn("betta", proc.stderr)
        self.assertEqual(run("run-experiment", "--config", self.dir / "missing.json", check=False).returncode, 2)
        self.assertEqual(run("make-lock", "--alpha", 0.5, "--out", self.dir / "x.json", check=False).returncode, 2)

    def test_budget(self):
        proc = run("diagnose", "--model", self.lock(horizon="4"), "--m", 1, env={"PSRLAB_BUDGET": "5"}, check=False)
        self.assertEqual(proc.returncode, 3)

    def test_invalid_models(self):
        lock = json.loads(self.lock().read_text())
        lock["mu1"] = [0.7, 0.7]
        bad = self.dir / "nonstochastic.json"
        bad.write_text(json.dumps(lock))
        self.assertEqual(run("lift", "--pomdp", bad, "--m", 1, check=False).returncode, 4)
        blind = json.loads(self.lock().read_text())
        for step in blind["Omission"]:
            for row in step:
                row[:] = [1.0] + [0.0] * (len(row) - 1)
        path = self.dir / "blind.json"
        path.write_text(json.dumps(blind))
        proc = run("lift", "--pomdp", path, "--m", 1, "--kind", "weakly-revealing", check=False)
        self.assertEqual(proc.returncode, 4)


class Determinism(Base):
    def test_run_crane_repeats(self):
        lock = self.lock("0.2")
        a, b = self.dir / "a.csv", self.dir / "b.csv"
        for out in (a, b):
            run("run-crane", "--env", lock, "--class", "lock-family", "--K", 30, "--seed", 9, "--out", out)
        self.assertEqual(a.read_bytes(), b.read_bytes())

    def test_simulate_repeats(self):
        lock = self.lock()
        first = run("simulate", "--pomdp", lock, "--episodes", 50, "--seed", 2).stdout
        self.assertEqual(first, run("simulate", "--pomdp", lock, "--episodes", 50, "--seed", 2).stdout)
        self.assertNotEqual(first, run("simulate", "--pomdp", lock, "--episodes", 50, "--seed", 3).stdout)

    def test_summarize_reproduces_summary(self):
        out = self.dir / "exp"
        run("run-experiment", "--config", SOURCE / "configs" / "acceptance_lock.json", "--out", out, "--workers", 2)
        original = (out / "summary.json").read_bytes()
        (out / "summary.json").unlink()
        run("summarize", "--dir", out)
        self.assertEqual((out / "summary.json").read_bytes(), original)


if __name__ == "__main__":
    CLI = sys.argv[1]
    SOURCE = pathlib.Path(sys.argv[2])
    SCRATCH = pathlib.Path(sys.argv[3])
    REGISTRY = load_registry(SOURCE / "schemas")
    unittest.main(argv=[sys.argv[0], *sys.argv[4:]], verbosity=2)
