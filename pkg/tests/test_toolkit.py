"""Generators, the game file format, CSV reports, and the CLI."""

import json
import subprocess
import sys

import pytest

from dynkin import (
    BehavioralProfile,
    GeneratorSpec,
    SchemaError,
    generate,
    load,
    save,
    validate_instance,
)
from dynkin.toolkit import instance_to_doc, write_report_csv
from dynkin.zerosum import check_convexity
from dynkin.cli import main

from helpers import dyadic_mixes, uniform_tree, constant_payoffs


class TestGenerator:
    def test_deterministic_bytes(self, tmp_path):
        for family in ("random", "war-of-attrition", "preemption"):
            spec = GeneratorSpec(family=family, depth=3, branching=3, seed=7)
            a, b = tmp_path / "a.json", tmp_path / "b.json"
            save(a, *generate(spec))
            save(b, *generate(spec))
            assert a.read_bytes() == b.read_bytes()

    def test_instances_are_valid(self):
        for seed in range(10):
            tree, payoffs = generate(GeneratorSpec(depth=4, branching=3, seed=seed))
            assert validate_instance(tree, payoffs) == []

    def test_zero_sum_complement(self):
        tree, payoffs = generate(GeneratorSpec(depth=0, zero_sum=True, seed=3))
        n = tree.root
        assert payoffs.x2[n] == -payoffs.x1[n]
        assert payoffs.z2[n] == -payoffs.z1[n]
        assert payoffs.xi2[n] == -payoffs.xi1[n]

    def test_convexity_clamp(self):
        for seed in range(8):
            tree, payoffs = generate(GeneratorSpec(depth=3, convexity=True, seed=seed))
            for player in (1, 2):
                check_convexity(payoffs, tree, player, tol=0.0)

    def test_war_of_attrition_pattern(self):
        tree, payoffs = generate(GeneratorSpec(family="war-of-attrition", depth=3, seed=1))
        assert all(payoffs.y1[n] > payoffs.x1[n] for n in tree.nodes)
        assert all(payoffs.y2[n] > payoffs.x2[n] for n in tree.nodes)

    def test_preemption_pattern(self):
        tree, payoffs = generate(GeneratorSpec(family="preemption", depth=3, seed=1))
        assert all(payoffs.x1[n] > payoffs.y1[n] for n in tree.nodes)

    @pytest.mark.parametrize(
        "kw", [{"depth": -1}, {"branching": 0}, {"payoff_range": 0.0}, {"family": "duel"}]
    )
    def test_rejects_bad_specs(self, kw):
        with pytest.raises(ValueError):
            generate(GeneratorSpec(**kw))


class TestFileFormat:
    def test_round_trip_identity(self, tmp_path):
        tree, payoffs = generate(GeneratorSpec(depth=3, branching=2, seed=11))
        path = tmp_path / "game.json"
        save(path, tree, payoffs)
        tree2, payoffs2, profile = load(path)
        assert profile is None
        assert tree2.nodes == tree.nodes and tree2.children == tree.children
        assert payoffs2 == payoffs

    def test_save_load_save_is_byte_stable(self, tmp_path):
        tree, payoffs = generate(GeneratorSpec(depth=3, branching=3, seed=13))
        first = tmp_path / "first.json"
        second = tmp_path / "second.json"
        save(first, tree, payoffs)
        save(second, *load(first)[:2])
        assert first.read_bytes() == second.read_bytes()

    def test_profile_round_trip_exact(self, tmp_path):
        tree, payoffs = generate(GeneratorSpec(depth=2, branching=2, seed=17))
        profile = BehavioralProfile(
            player1=dyadic_mixes(tree, 1), player2=dyadic_mixes(tree, 2)
        )
        path = tmp_path / "game.json"
        save(path, tree, payoffs, profile)
        _, _, loaded = load(path)
        assert loaded is not None
        assert loaded.player1 == profile.player1
        assert loaded.player2 == profile.player2

    def test_malformed_probability_names_the_field(self, tmp_path):
        tree, payoffs = generate(GeneratorSpec(depth=1, seed=1))
        doc = instance_to_doc(tree, payoffs)
        for entry in doc["nodes"]:
            if "prob" in entry:
                entry["prob"] = "half"
                break
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(SchemaError, match="prob"):
            load(path)

    def test_missing_payoff_field(self, tmp_path):
        tree, payoffs = generate(GeneratorSpec(depth=1, seed=1))
        doc = instance_to_doc(tree, payoffs)
        del doc["nodes"][0]["X1"]
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(SchemaError, match="X1"):
            load(path)

    def test_duplicate_id(self, tmp_path):
        tree, payoffs = generate(GeneratorSpec(depth=1, seed=1))
        doc = instance_to_doc(tree, payoffs)
        doc["nodes"].append(dict(doc["nodes"][-1]))
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(SchemaError, match="duplicate"):
            load(path)

    def test_wrong_horizon(self, tmp_path):
        tree, payoffs = generate(GeneratorSpec(depth=1, seed=1))
        doc = instance_to_doc(tree, payoffs)
        doc["horizon"] = 9
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(SchemaError, match="horizon"):
            load(path)

    def test_not_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("not json at all {")
        with pytest.raises(SchemaError):
            load(path)


class TestCsvReport:
    def test_columns_and_footer(self, tmp_path):
        tree = uniform_tree(1)
        path = tmp_path / "report.csv"
        v = {n: 0.5 for n in tree.nodes}
        write_report_csv(path, tree, v, v, {"n0"}, set(), cases={"n0": "A1"}, gaps=(0.1, 0.2))
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "node_id,depth,v1,v2,mu1_hit,mu2_hit,case"
        assert lines[1].startswith("n0,0,0.5,0.5,1,0,A1")
        assert lines[-1].startswith("gaps,")


class TestCli:
    def _run(self, *args):
        return main(list(args))

    def test_pipeline(self, tmp_path):
        inst = tmp_path / "game.json"
        csv_out = tmp_path / "values.csv"
        eq_out = tmp_path / "eq.json"
        assert self._run("generate", "--depth", "3", "--seed", "4", "--out", str(inst)) == 0
        assert self._run("solve", str(inst), "--out", str(csv_out)) == 0
        assert csv_out.read_text().splitlines()[0].startswith("node_id")
        assert self._run("equilibrium", str(inst), "--eta", "0.05", "--out", str(eq_out)) == 0
        report = json.loads(eq_out.read_text())
        split_inst = tmp_path / "split.json"
        split_inst.write_text(json.dumps(report["instance"]))
        prof = tmp_path / "profile.json"
        prof.write_text(json.dumps({"profile": report["profile"]}))
        assert self._run("verify", str(split_inst), "--profile", str(prof), "--eta", "0.05") == 0
        assert self._run("invariants", str(inst), "--eta", "0.1") == 0

    def test_pure_pipeline(self, tmp_path):
        inst = tmp_path / "game.json"
        eq_out = tmp_path / "eq.json"
        assert (
            self._run(
                "generate", "--depth", "2", "--convexity", "--seed", "9", "--out", str(inst)
            )
            == 0
        )
        assert self._run("equilibrium", str(inst), "--pure", "--out", str(eq_out)) == 0
        report = json.loads(eq_out.read_text())
        for side in report["profile"].values():
            for mix in side.values():
                assert all(p in (0.0, 1.0) for p in mix)

    def test_gap_threshold_exceeded_is_exit_4(self, tmp_path):
        # waiting forever is not an equilibrium when stopping pays more
        tree = uniform_tree(1)
        payoffs = constant_payoffs(tree, x=0.0, y=2.0, z=2.0, xi=1.0, zero_sum=False)
        profile = BehavioralProfile.waiting(tree)
        inst = tmp_path / "game.json"
        save(inst, tree, payoffs, profile)
        assert self._run("verify", str(inst), "--gap-threshold", "0.5") == 4

    def test_usage_error_is_exit_1(self):
        assert self._run("solve") == 1
        assert self._run() == 1

    def test_schema_error_is_exit_2(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{}")
        assert self._run("solve", str(bad), "--out", str(tmp_path / "x.csv")) == 2

    def test_console_script_installed(self):
        proc = subprocess.run(
            [sys.executable, "-m", "dynkin.cli", "--help"], capture_output=True, text=True
        )
        assert proc.returncode == 0
        assert "equilibrium" in proc.stdout
