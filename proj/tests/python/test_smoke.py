import json
import math
import subprocess

import pytest

import umm


def test_registries_list_builtins():
    reg = umm.registered()
    assert "toy-trainable" in reg["backbones"]
    assert "gedit" in reg["benchmarks"]
    assert {"sft", "reca", "irg", "unicot", "unigame"} <= set(reg["trainers"])


def test_edit_score_is_a_geometric_mean():
    sc, pq, o = umm.make_edit_score(4.0, 9.0)
    assert (sc, pq) == (4.0, 9.0)
    assert math.isclose(o, 6.0, abs_tol=1e-12)


def test_extract_choice():
    opts = {"A": "fruit", "B": "animal", "C": "color", "D": "tool"}
    assert umm.extract_choice("The answer is B.", opts) == "B"
    assert umm.extract_choice("It could be A or B", opts) is None
    assert umm.extract_choice("a tool, surely", ["fruit", "animal", "color", "tool"]) == "D"


def test_aggregate_rules():
    cats = [{"category": c, "n": 1, "value": v}
            for c, v in zip("abcdef", (99.38, 94.19, 78.75, 87.77, 51.00, 61.75))]
    assert round(umm.aggregate("mean", cats), 2) == 78.81
    mv = [{"category": "multi_choice", "n": 1, "value": 80.19}, {"category": "free_form", "n": 1, "value": 61.52}]
    assert round(umm.aggregate("weighted", mv, {"multi_choice": 0.54, "free_form": 0.46}), 2) == 71.60


def test_cosine():
    assert math.isclose(umm.cosine([1.0, 2.0], [2.0, 4.0]), 1.0)


def test_errors_carry_a_code(source_dir):
    with pytest.raises(umm.UmmError) as err:
        umm.load_config_text("inference:\n  backbne: echo-mock\n")
    assert err.value.code == "UnknownKey"
    assert "backbne" in str(err.value)


def test_validate_request_round_trip():
    req = {"prompt": "draw a cat", "images": [], "task": "generation", "params": {}, "sample_id": "g1", "seed": 3}
    assert umm.validate_request(req)["sample_id"] == "g1"
    with pytest.raises(umm.UmmError):
        umm.validate_request(dict(req, task="editing"))


def test_evaluate_toy_benchmark(source_dir, tmp_path):
    out = umm.evaluate("configs/eval_toy_mc.yaml", [f"eval.output_dir={tmp_path}"], run_id="py")
    assert math.isclose(out["report"]["overall"]["value"], 0.65)
    report = umm.parse_report(out["report_dir"] + "/report.json")
    assert report == out["report"]
    board = umm.leaderboard([out["report_dir"] + "/report.json"])
    assert "scripted-mock" in board


def test_config_helpers(source_dir):
    cfg = umm.load_config("configs/eval_toy_mc.yaml", ["inference.seed=5"])
    assert cfg["inference"]["seed"] == 5
    a = umm.config_fingerprint("configs/eval_toy_mc.yaml")
    assert a == umm.config_fingerprint("configs/eval_toy_mc.yaml")
    assert a != umm.config_fingerprint("configs/eval_toy_mc.yaml", ["inference.seed=5"])
    assert "inference.backbone" in umm.schema_reference()


def test_train_and_analyze(source_dir, tmp_path):
    t = umm.train("configs/train_sft.yaml",
                  [f"train.output_dir={tmp_path}", "train.optimizer.steps=20"], run_id="t")
    assert [c["step"] for c in t["checkpoints"]] == [10, 20]
    assert t["final_loss"] < t["initial_loss"]
    a = umm.analyze("configs/analyze_toy.yaml", [f"analysis.output_dir={tmp_path}", "analysis.max_samples=4"],
                    run_id="a")
    assert len(a["cosines"]) == 12


def run_cli(umm_bin, *args):
    return subprocess.run([umm_bin, *args], capture_output=True, text=True)


def test_cli_help_lists_registries(umm_bin):
    out = run_cli(umm_bin, "--help")
    assert out.returncode == 0
    assert "Registered backbones:" in out.stdout
    assert "toy-trainable" in out.stdout


def test_cli_exit_codes(umm_bin, source_dir, tmp_path):
    bad_key = run_cli(umm_bin, "eval", "-c", "configs/eval_toy_mc.yaml", "--set", "inference.backbne=x")
    assert bad_key.returncode == 1
    assert "backbne" in bad_key.stderr
    unknown = run_cli(umm_bin, "eval", "-c", "configs/eval_toy_mc.yaml", "--set", "eval.benchmark=nope",
                      "--set", f"eval.output_dir={tmp_path}")
    assert unknown.returncode == 1
    assert "UnknownBenchmark" in unknown.stderr
    ok = run_cli(umm_bin, "eval", "-c", "configs/eval_toy_mc.yaml", "--set", f"eval.output_dir={tmp_path}",
                 "--run-id", "cli")
    assert ok.returncode == 0, ok.stderr
    report = json.loads((tmp_path / "cli" / "report" / "report.json").read_text())
    assert math.isclose(report["overall"]["value"], 0.65)
