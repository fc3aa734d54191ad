import json

import pytest

from aspp.cli import build_parser, main
from aspp.life import asset_path


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def summary(out):
    lines = out.strip().splitlines()
    assert len(lines) == 1
    return json.loads(lines[0])


@pytest.fixture
def path4_file(tmp_path):
    p = tmp_path / "path4.edges"
    p.write_text("4 3 0\n0 1\n1 2\n2 3\n")
    return str(p)


@pytest.fixture
def k10_file(tmp_path):
    p = tmp_path / "k10.edges"
    body = [f"{i} {j}" for i in range(10) for j in range(10) if i != j]
    p.write_text("10 90 1\n" + "\n".join(body) + "\n")
    return str(p)


def test_validate_glider(capsys):
    code, out, _ = run(capsys, "life", "validate", "--pattern", str(asset_path("glider.rle")),
                       "--spec", str(asset_path("glider.spec")))
    assert code == 0 and summary(out)["passed"] is True


def test_validate_failure_exit_one(capsys, tmp_path):
    spec = tmp_path / "bad.spec"
    spec.write_text("kind = still-life\n")
    code, out, _ = run(capsys, "life", "validate", "--pattern", str(asset_path("glider.rle")), "--spec", str(spec))
    assert code == 1 and summary(out)["passed"] is False


def test_diameter(capsys, path4_file):
    code, out, _ = run(capsys, "graph", "diameter", "--graph", path4_file)
    assert code == 0 and summary(out)["diameter"] == 3


def test_disconnected_diameter(capsys, tmp_path):
    p = tmp_path / "g.edges"
    p.write_text("3 1 1\n0 1\n")
    code, out, _ = run(capsys, "graph", "diameter", "--graph", str(p))
    assert code == 0 and summary(out)["diameter"] == "inf"


def test_estimate_on_k10(capsys, k10_file, tmp_path):
    code, out, _ = run(capsys, "converge", "estimate", "--alpha", "0.76", "--graph", k10_file,
                       "--trials", "10000", "--seed", "1", "--out", str(tmp_path / "o"))
    assert code == 0 and summary(out)["estimated_c"] <= 0.76
    assert (tmp_path / "o" / "contraction.json").exists()


def test_uniqueness_and_decay(capsys, tmp_path):
    code, out, _ = run(capsys, "converge", "uniqueness")
    assert code == 0 and summary(out)["unique"]
    code, out, _ = run(capsys, "converge", "decay", "--out", str(tmp_path))
    assert code == 0 and abs(summary(out)["rate"] - 0.76) < 1e-6
    assert (tmp_path / "distances.csv").read_text().startswith("step,distance\n")


def test_color_commands(capsys, tmp_path):
    code, out, _ = run(capsys, "color", "gen", "--n", "10", "--out", str(tmp_path))
    assert code == 0 and (tmp_path / "instance.edges.witness").exists()
    code, out, _ = run(capsys, "color", "ablate", "--instances", "3", "--n", "10",
                       "--configs", "Full Model,Fixed K=10", "--out", str(tmp_path))
    assert code == 0 and [r["config"] for r in summary(out)["rows"]] == ["Full Model", "Fixed K=10"]
    assert (tmp_path / "ablation.csv").read_text().splitlines()[0] == "config,accuracy,violation_rate,convergence_steps"


def test_bad_config_name_is_usage_error(capsys):
    code, _, err = run(capsys, "color", "ablate", "--instances", "1", "--configs", "Nope")
    assert code == 2 and "unknown configuration" in err


def test_mpnn_commands(capsys, tmp_path):
    code, out, _ = run(capsys, "mpnn", "check", "--out", str(tmp_path))
    assert code == 0 and summary(out)["max_abs_deviation"] == 0.0
    code, out, _ = run(capsys, "mpnn", "check", "--params", str(tmp_path / "params.mpnn"),
                       "--graph", str(tmp_path / "graph.edges"))
    assert code == 0 and summary(out)["bitwise_equal"]
    code, out, _ = run(capsys, "mpnn", "influence")
    assert code == 0 and summary(out)["all_true"]


def test_distill(capsys, tmp_path):
    code, out, _ = run(capsys, "distill", "demo", "--iters", "20", "--out", str(tmp_path))
    assert code == 0 and summary(out)["final_loss"] < summary(out)["initial_loss"]
    assert len((tmp_path / "losses.csv").read_text().splitlines()) == 22


def test_life_run_render(capsys, tmp_path):
    code, out, err = run(capsys, "life", "run", "--pattern", str(asset_path("blinker.rle")), "--steps", "1",
                         "--margin", "1", "--render", "text", "--out", str(tmp_path))
    assert code == 0 and summary(out)["population"] == [3, 3]
    assert "t=1\n..#..\n..#..\n..#..\n" in err
    assert (tmp_path / "final.rle").read_text().endswith("!\n")


def test_soup_check(capsys):
    code, out, _ = run(capsys, "life", "soup-check", "--soups", "5", "--size", "8")
    assert code == 0 and summary(out)["mismatches"] == 0


def test_unknown_flag_is_usage_error(capsys):
    code, _, err = run(capsys, "graph", "diameter", "--bogus")
    assert code == 2 and "usage:" in err


def test_missing_file_is_usage_error(capsys, tmp_path):
    code, _, err = run(capsys, "graph", "diameter", "--graph", str(tmp_path / "nope"))
    assert code == 2 and "no such file" in err


def test_malformed_input_is_usage_error(capsys, tmp_path):
    bad = tmp_path / "bad.rle"
    bad.write_text("x = 1, y = 1\n2o!\n")
    code, _, err = run(capsys, "life", "run", "--pattern", str(bad))
    assert code == 2 and "line 2" in err


def test_bad_thread_count(capsys):
    code, _, _ = run(capsys, "--threads", "0", "mpnn", "check")
    assert code == 2


def _leaf_parsers(parser, trail=()):
    for action in parser._actions:
        if action.__class__.__name__ == "_SubParsersAction":
            for name, sub in action.choices.items():
                yield from _leaf_parsers(sub, trail + (name,))
            return
    yield trail, parser


LEAVES = list(_leaf_parsers(build_parser()))


def test_every_command_is_present():
    names = {" ".join(t) for t, _ in LEAVES}
    assert names == {"graph diameter", "life run", "life validate", "life soup-check", "converge estimate",
                     "converge uniqueness", "converge decay", "color ablate", "color gen", "mpnn check",
                     "mpnn influence", "distill demo"}


@pytest.mark.parametrize("trail", [t for t, _ in LEAVES], ids=" ".join)
def test_help_lists_every_flag_with_default(trail, capsys):
    assert main(list(trail) + ["--help"]) == 0
    text = " ".join(capsys.readouterr().out.split())
    for action in dict(LEAVES)[trail]._actions:
        long_flags = [f for f in action.option_strings if f.startswith("--") and f != "--help"]
        for flag in long_flags:
            assert flag in text
        if long_flags and not action.required:
            assert f"(default: {action.default})" in text, long_flags
