import csv
import io
import json
from importlib import resources

import pytest

from riskplan.cli import EXIT_INVARIANT, EXIT_OK, EXIT_TRUNCATED, EXIT_USAGE, main
from riskplan.formats import check_result, parse_result

DATA = resources.files("riskplan") / "data"
DEMO_MAP = str(DATA / "demo_map.txt")
DEMO_CONFIG = str(DATA / "demo_config.json")


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_plan_demo_exact_vs_approx(tmp_path):
    outs = {}
    for mode in ("exact", "approx"):
        out = tmp_path / f"{mode}.json"
        assert main(["plan", "--map", DEMO_MAP, "--config", DEMO_CONFIG, "--mode", mode, "--out", str(out)]) == EXIT_OK
        outs[mode] = parse_result(out.read_text())
        assert check_result(outs[mode]) == []
    assert outs["exact"].mode == "exact" and outs["approx"].mode == "approximate"
    assert outs["approx"].result.utility.value <= outs["exact"].result.utility.value + 1e-9


def test_plan_walled_in_start(tmp_path):
    m = write(tmp_path, "m.txt", "...#.\n..#S#\n...#.\n")
    out = tmp_path / "r.json"
    assert main(["plan", "--map", m, "--out", str(out)]) == EXIT_OK
    obj = json.loads(out.read_text())
    assert obj["path"] == [[1, 3]]
    assert obj["planner"] == "stay"


def test_plan_malformed_map(tmp_path, capsys):
    m = write(tmp_path, "m.txt", "S..\n..S\n")
    assert main(["plan", "--map", m]) == EXIT_USAGE
    assert "more than one 'S'" in capsys.readouterr().err


def test_plan_bad_config_is_invariant_error(tmp_path, capsys):
    c = write(tmp_path, "c.json", '{"gamma": 2}')
    assert main(["plan", "--map", DEMO_MAP, "--config", c]) == EXIT_INVARIANT
    assert "gamma" in capsys.readouterr().err


def test_plan_truncation_exit_code(tmp_path):
    c = write(tmp_path, "c.json", '{"limits": {"max_paths": 10}}')
    out = tmp_path / "r.json"
    assert main(["plan", "--map", DEMO_MAP, "--config", c, "--mode", "exact", "--out", str(out)]) == EXIT_TRUNCATED
    assert json.loads(out.read_text())["truncated"] is True


def test_plan_with_reward_csv_and_gamma(tmp_path):
    m = write(tmp_path, "m.txt", "S..\n.#.\n")
    r = write(tmp_path, "r.csv", "0.0,0.2,0.9\n0.1,0,0.3\n")
    out = tmp_path / "r.json"
    assert main(["plan", "--map", m, "--rewards", r, "--gamma", "0.5", "--out", str(out)]) == EXIT_OK
    rf = parse_result(out.read_text())
    assert rf.config.gamma == 0.5
    assert list(rf.rewards.reward) == [0.0, 0.2, 0.9, 0.1, 0.3]
    assert check_result(rf) == []


def test_plan_bad_rewards(tmp_path):
    m = write(tmp_path, "m.txt", "S.\n")
    r = write(tmp_path, "r.csv", "0.0,2.0\n")
    assert main(["plan", "--map", m, "--rewards", r]) == EXIT_INVARIANT


def test_usage_error():
    assert main(["plan"]) == EXIT_USAGE
    assert main(["nope"]) == EXIT_USAGE


@pytest.mark.parametrize(
    "text, expected",
    [("S...\n....\n....\n....\n", 2110), ("S.\n", 1)],
)
def test_count(tmp_path, capsys, text, expected):
    m = write(tmp_path, "m.txt", text)
    assert main(["count", "--map", m]) == EXIT_OK
    assert f"simple paths from start: {expected}\n" in capsys.readouterr().out


def test_count_5x5(tmp_path, capsys):
    m = write(tmp_path, "m.txt", "S....\n" + ".....\n" * 4)
    assert main(["count", "--map", m]) == EXIT_OK
    line = capsys.readouterr().out.splitlines()[0]
    assert int(line.rsplit(" ", 1)[1]) > 10_000


def test_count_truncated(tmp_path, capsys):
    m = write(tmp_path, "m.txt", "S....\n" + ".....\n" * 4)
    c = write(tmp_path, "c.json", '{"limits": {"max_paths": 50}}')
    assert main(["count", "--map", m, "--config", c]) == EXIT_TRUNCATED
    assert "TRUNCATED" in capsys.readouterr().out


def read_bench(path):
    lines = open(path).read().splitlines()
    assert lines[0].startswith("# seed=")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def test_bench_zero_trials(tmp_path):
    out = tmp_path / "b.csv"
    assert main(["bench", "--trials", "0", "--out", str(out)]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert len(lines) == 2 and lines[1].startswith("trial,")


def test_bench_rows_and_determinism(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        assert main(["bench", "--trials", "25", "--seed", "7", "--no-timings", "--out", str(out)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    rows = read_bench(a)
    assert len(rows) == 25
    assert all(float(r["approx_utility"]) <= float(r["exact_utility"]) + 1e-9 for r in rows)
    assert all(r["ensemble_matches_oracle"] == "1" for r in rows)


def test_render_overlays_results(tmp_path):
    paths = []
    for mode in ("exact", "approx"):
        out = tmp_path / f"{mode}.json"
        main(["plan", "--map", DEMO_MAP, "--mode", mode, "--out", str(out)])
        paths += ["--result", str(out)]
    svg = tmp_path / "both.svg"
    assert main(["render", "--map", DEMO_MAP, "--svg", str(svg)] + paths) == EXIT_OK
    text = svg.read_text()
    assert text.count("<polyline") == 2
    assert 'data-label="exact"' in text and 'data-label="approximate"' in text


def test_negcycle_command(capsys):
    assert main(["negcycle"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "1 -> 2: -0.5000" in out
    assert "negative cycle: 1 -> 2 -> 1, total -0.3810" in out
