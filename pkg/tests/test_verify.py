import time

from kahler_torus.cli import main
from kahler_torus.verify import CRITERIA, LEVELS, run_verify


def test_all_criteria_are_registered():
    assert sorted(CRITERIA) == list(range(1, 12))
    assert (LEVELS["quick"].N, LEVELS["quick"].M) == (16, 8)
    assert (LEVELS["full"].N, LEVELS["full"].M) == (32, 16)


def test_subset_report():
    rep = run_verify("quick", 7, only=[9, 10])
    lines = rep.to_text().splitlines()
    assert lines[0] == "verify level = quick" and lines[1] == "seed = 7"
    assert [r.number for r in rep.results] == [9, 10]
    assert rep.passed and lines[-1] == "overall = PASS"


def test_determinism_criterion_replays():
    rep = run_verify("quick", 3, only=[12])
    assert [r.number for r in rep.results] == [12] and rep.passed


def test_quick_level_within_budget(tmp_path):
    start = time.perf_counter()
    code = main(["verify", "--out", str(tmp_path)])
    assert time.perf_counter() - start < 120
    assert code == 0
    assert (tmp_path / "verify.txt").read_text().endswith("overall = PASS\n")
