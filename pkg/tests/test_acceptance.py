"""End-to-end acceptance: eleven desk-scale criteria at pinned tolerances.

The suite runs once per pytest session into a fresh store and prints one
pass/fail line per criterion; each test asserts its criterion's flag, so a
red criterion fails its test with the full measured-vs-target line.
"""

import re

import pytest

from circlaw.harness.acceptance import acceptance


class _Suite:
    def __init__(self, results, status, lines):
        self.results = results
        self.status = status
        self.lines = lines

    def line(self, number):
        for ln in self.lines:
            if ln.startswith(f"[{number:2d}]"):
                return ln
        return f"criterion {number}: no output line"


@pytest.fixture(scope="module")
def suite(tmp_path_factory):
    lines = []

    def echo(msg):
        lines.append(str(msg))
        print(msg)

    out_dir = tmp_path_factory.mktemp("acceptance-store")
    results, status = acceptance(out_dir=str(out_dir), echo=echo)
    return _Suite(results, status, lines)


def test_criterion_01_w1_scale_window(suite):
    r = suite.results[0]
    assert r.number == 1
    assert r.passed, suite.line(1)


def test_criterion_02_rate_slopes(suite):
    r = suite.results[1]
    assert r.number == 2
    assert r.passed, suite.line(2)


def test_criterion_03_repulsion_beats_iid(suite):
    r = suite.results[2]
    assert r.number == 3
    assert r.passed, suite.line(3)


def test_criterion_04_mean_esd_asymptotic(suite):
    r = suite.results[3]
    assert r.number == 4
    assert r.passed, suite.line(4)


def test_criterion_05_solver_matches_oracle(suite):
    r = suite.results[4]
    assert r.number == 5
    assert r.passed, suite.line(5)


def test_criterion_06_ring_smoothing_inequality(suite):
    r = suite.results[5]
    assert r.number == 6
    assert r.passed, suite.line(6)


def test_criterion_07_dyadic_upper_bound(suite):
    r = suite.results[6]
    assert r.number == 7
    assert r.passed, suite.line(7)


def test_criterion_08_potential_concentration(suite):
    r = suite.results[7]
    assert r.number == 8
    assert r.passed, suite.line(8)


def test_criterion_09_pair_energy_constant(suite):
    r = suite.results[8]
    assert r.number == 9
    assert r.passed, suite.line(9)


def test_criterion_10_kolmogorov_ball_rate(suite):
    r = suite.results[9]
    assert r.number == 10
    assert r.passed, suite.line(10)


def test_criterion_11_numerics_backstops(suite):
    r = suite.results[10]
    assert r.number == 11
    assert r.passed, suite.line(11)


def test_one_line_per_criterion(suite):
    pattern = re.compile(
        r"^\[\s*(\d+)\]\s+(PASS|FAIL)\s+([\d.]+)s\s+.+\(target: .+\)$")
    matches = [pattern.match(ln) for ln in suite.lines]
    numbered = [m for m in matches if m]
    assert len(numbered) == 11
    assert [int(m.group(1)) for m in numbered] == list(range(1, 12))
    assert suite.lines[-1].startswith("acceptance: ")


def test_exit_status_reflects_failures(suite):
    assert (suite.status == 0) == all(r.passed for r in suite.results)
    assert suite.status in (0, 1)


def test_results_carry_walls_and_text(suite):
    assert [r.number for r in suite.results] == list(range(1, 12))
    for r in suite.results:
        assert r.wall_s >= 0.0
        assert r.measured
        assert r.target


def test_w1_window_is_not_vacuous(suite):
    # the cap must bind within one order of magnitude of the measurement,
    # so a solver inflating W1 tenfold would trip it
    m = re.search(r"n=256: mean=([\d.]+) \(cap ([\d.]+)\)",
                  suite.results[0].measured)
    assert m, suite.results[0].measured
    mean, cap = float(m.group(1)), float(m.group(2))
    assert mean <= cap
    assert 10.0 * mean > cap
