import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aspp.errors import ValidationError
from aspp.life import (
    GLIDERS,
    GridPattern,
    PatternSpec,
    RLEError,
    emit_rle,
    embed,
    frame,
    load_asset,
    naive_step,
    parse_rle,
    parse_spec,
    read_rle,
    run_life,
    shifted_step,
    simulate,
    validate_pattern,
    write_rle,
)
from aspp.life.machines import Rect

GLIDER = frozenset({(0, 1), (1, 2), (2, 0), (2, 1), (2, 2)})
ASSETS = ["glider", "lwss", "blinker", "toad", "block", "beehive", "eater", "gosper-gun", "and-gate", "or-gate"]


# -- RLE -------------------------------------------------------------------------

def test_parse_row():
    p = parse_rle("x = 3, y = 1\n3o!")
    assert p.cells == {(0, 0), (0, 1), (0, 2)}


def test_parse_glider():
    assert parse_rle("x = 3, y = 3\nbob$2bo$3o!").cells == GLIDER


def test_parse_comments_name_and_rule():
    p = parse_rle("#N tiny\n#C note\nx = 2, y = 2, rule = B3/S23\n2o$2o!")
    assert p.name == "tiny" and p.population == 4


def test_parse_multiline_and_row_gaps():
    p = parse_rle("x = 2, y = 4\no$\n2$bo!")
    assert p.cells == {(0, 0), (3, 1)}


@pytest.mark.parametrize("text, line", [
    ("x = 2, y = 1\n3o!", 2),
    ("x = 3\n3o!", 1),
    ("x = 3, y = 1\n3o", 2),
    ("x = 3, y = 1\n2q!", 2),
    ("x = 3, y = 1, rule = B36/S23\no!", 1),
    ("x = 1, y = 1\n$o!", 2),
])
def test_parse_errors_carry_location(text, line):
    with pytest.raises(RLEError) as err:
        parse_rle(text)
    assert err.value.line == line


def test_emit_goldens():
    assert emit_rle(GridPattern(1, 1, {(0, 0)})) == "x = 1, y = 1\no!"
    assert emit_rle(GridPattern(2, 2, set())) == "x = 2, y = 2\n!"
    assert emit_rle(GridPattern(3, 3, GLIDER)) == "x = 3, y = 3\nbo$2bo$3o!"


def test_emit_wraps_long_rows():
    p = GridPattern(200, 1, {(0, c) for c in range(0, 200, 2)})
    body = emit_rle(p).splitlines()[1:]
    assert max(map(len, body)) <= 70
    assert parse_rle(emit_rle(p)) == p


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 30), st.integers(1, 30), st.data())
def test_rle_round_trip(w, h, data):
    cells = data.draw(st.sets(st.tuples(st.integers(0, h - 1), st.integers(0, w - 1)), max_size=60))
    p = GridPattern(w, h, cells)
    assert parse_rle(emit_rle(p)) == p


def test_rle_file_round_trip(tmp_path):
    p = GridPattern(3, 3, GLIDER, "g")
    write_rle(p, tmp_path / "x.rle")
    back = read_rle(tmp_path / "x.rle")
    assert back == p and back.name == "g"
    (tmp_path / "anon.rle").write_text("x = 1, y = 1\no!\n")
    assert read_rle(tmp_path / "anon.rle").name == "anon"


def test_pattern_box_validation():
    with pytest.raises(ValidationError):
        GridPattern(2, 2, {(2, 0)})


# -- reference simulators --------------------------------------------------------

@pytest.mark.parametrize("boundary", ["dead", "toroidal"])
@pytest.mark.parametrize("shape", [(1, 1), (2, 2), (2, 5), (3, 3), (7, 9)])
def test_reference_simulators_agree(boundary, shape):
    rng = np.random.default_rng(sum(shape))
    for _ in range(5):
        grid = (rng.random(shape) < 0.5).astype(np.uint8)
        assert np.array_equal(shifted_step(grid, boundary), np.array(naive_step(grid.tolist(), boundary)))


def test_simulate_length():
    assert len(simulate(np.zeros((4, 4)), 3)) == 4


# -- running through the engine ------------------------------------------------

def test_blinker_returns_after_two_steps():
    p = GridPattern(3, 1, {(0, 0), (0, 1), (0, 2)})
    trace = run_life(p, 2, (5, 5), (2, 1))
    assert trace.final == trace.initial


def test_glider_translates():
    p = GridPattern(3, 3, GLIDER)
    trace = run_life(p, 4, (10, 10), (1, 1))
    start = frame(trace.initial, (10, 10))
    end = frame(trace.final, (10, 10))
    assert np.array_equal(end, np.roll(np.roll(start, 1, 0), 1, 1))


def test_zero_steps():
    trace = run_life(GridPattern(3, 3, GLIDER), 0, (5, 5))
    assert len(trace.states) == 1


def test_pattern_outside_arena():
    with pytest.raises(ValidationError):
        embed(GridPattern(3, 3, GLIDER), (4, 4), (2, 2))


@pytest.mark.parametrize("boundary", ["dead", "toroidal"])
def test_engine_matches_naive_oracle(boundary):
    rng = np.random.default_rng(11)
    for _ in range(10):
        grid = (rng.random((12, 12)) < 0.4).astype(np.uint8)
        p = GridPattern.from_array(grid)
        frames = [frame(H, (12, 12)) for H in run_life(p, 8, (12, 12), boundary=boundary).states]
        expected = simulate(grid, 8, boundary, method="naive")
        assert all(np.array_equal(a, b) for a, b in zip(frames, expected))


# -- validation ------------------------------------------------------------------

@pytest.mark.parametrize("stem", ASSETS)
def test_shipped_assets_validate(stem):
    p, spec = load_asset(stem)
    rep = validate_pattern(p, spec)
    assert rep.passed and rep.accuracy == 1.0


def test_gun_first_glider_within_sixty_steps():
    rep = validate_pattern(*load_asset("gosper-gun"))
    assert rep.details["first_detection"] <= 60
    assert rep.details["emissions"] >= 5


def test_gun_probe_counts_match_grid_oracle():
    p, spec = load_asset("gosper-gun")
    arena = (p.height + 40, p.width + 40)
    grid = frame(embed(p, arena, (20, 20)), arena)
    probe = spec.probe.shifted(20, 20)
    oracle = simulate(grid, 150, "dead")
    engine = [frame(H, arena) for H in run_life(p, 150, arena, (20, 20)).states]
    assert all(np.array_equal(a, b) for a, b in zip(engine, oracle))
    hits = [t for t in range(spec.t0, 151, spec.period) if probe.slice(oracle[t]).sum() == spec.signature]
    assert len(hits) >= 4


def test_and_gate_rows():
    rep = validate_pattern(*load_asset("and-gate"))
    assert [(r["inputs"], r["observed"]) for r in rep.rows] == [("00", 0), ("01", 0), ("10", 0), ("11", 1)]


def test_or_gate_rows():
    rep = validate_pattern(*load_asset("or-gate"))
    assert [(r["inputs"], r["observed"]) for r in rep.rows] == [("00", 0), ("01", 1), ("10", 1), ("11", 1)]


def test_wrong_truth_table_fails():
    p, spec = load_asset("and-gate")
    flipped = PatternSpec(**{**spec.__dict__, "truth_table": tuple((b, 1 - o) for b, o in spec.truth_table)})
    rep = validate_pattern(p, flipped)
    assert not rep.passed and rep.accuracy == 0.0


def test_wrong_period_fails():
    p, _ = load_asset("blinker")
    assert not validate_pattern(p, PatternSpec("oscillator", period=4)).passed
    assert not validate_pattern(p, PatternSpec("still-life")).passed


def test_glider_is_not_a_still_life():
    p, _ = load_asset("glider")
    assert not validate_pattern(p, PatternSpec("still-life")).passed


def test_wrong_displacement_fails():
    p, _ = load_asset("glider")
    assert not validate_pattern(p, PatternSpec("spaceship", period=4, displacement=(1, -1))).passed


def test_probe_outside_arena_is_error():
    p, spec = load_asset("and-gate")
    bad = PatternSpec(**{**spec.__dict__, "probe": Rect(500, 500, 501, 501)})
    with pytest.raises(ValidationError):
        validate_pattern(p, bad)


def test_report_json_stable():
    rep = validate_pattern(*load_asset("or-gate"))
    assert rep.to_json() == validate_pattern(*load_asset("or-gate")).to_json()


# -- spec files -------------------------------------------------------------------

def test_parse_gate_spec():
    spec = parse_spec("kind = gate-circuit\ninput = A 0 0 2 2 se\nprobe = 5 5 6 6\nread_time = 9\nrow = 1 -> 1\n")
    assert spec.inputs[0].cells() == GLIDERS["se"]
    assert spec.truth_table == (((1,), 1),)


@pytest.mark.parametrize("text", [
    "period = 2\n",
    "kind = gun\n",
    "kind = blob\n",
    "kind = oscillator\nperiod = x\n",
    "kind = oscillator\nspeed = 3\n",
    "kind = spaceship\nperiod = 4\n",
    "kind = gate-circuit\ninput = A 0 0 2 2 se\nprobe = 1 1 1 1\nread_time = 3\nrow = 10 -> 1\n",
    "kind = gate-circuit\ninput = A 0 0 3 3 se\nprobe = 1 1 1 1\nread_time = 3\nrow = 1 -> 1\n",
    "kind oscillator\n",
])
def test_bad_specs(text):
    with pytest.raises(ValidationError):
        parse_spec(text)
