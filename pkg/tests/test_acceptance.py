"""The twelve acceptance criteria, run through the verification suites.

Each test prints one line, "criterion k: PASS|FAIL ...", and the lines are
repeated in a summary section at the end of the pytest run.
"""

import json

import pytest

from charpoly.cli import dumps, strip_runtime
from charpoly.verification import SUITES, run_suite

SEED = 20261018
# runtime budgets in seconds, per criterion
BUDGET = {1: 10, 2: 120, 6: 300, 8: 300}


@pytest.fixture(scope="module")
def reports():
    return {s: run_suite(s, SEED) for s in SUITES}


def _criterion(reports, k):
    for rep in reports.values():
        recs = rep.by_criterion().get(k)
        if recs:
            return recs
    raise AssertionError(f"no checks recorded for criterion {k}")


def _judge(reports, k, acceptance_line):
    recs = _criterion(reports, k)
    runtime = sum(r.runtime_ms for r in recs) / 1000.0
    failed = [r for r in recs if not r.passed]
    over = k in BUDGET and runtime > BUDGET[k]
    ok = not failed and not over
    detail = f"{len(recs) - len(failed)}/{len(recs)} checks, {runtime:.1f}s"
    if k in BUDGET:
        detail += f" (budget {BUDGET[k]}s)"
    if failed:
        detail += "; failed: " + ", ".join(f"{r.check_id} [{r.note}]" for r in failed)
    acceptance_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} {detail}")
    assert not failed, detail
    assert not over, f"runtime {runtime:.1f}s over budget {BUDGET[k]}s"


@pytest.mark.parametrize("k", range(1, 12))
def test_criterion(reports, k, acceptance_line):
    _judge(reports, k, acceptance_line)


def test_criterion_12_determinism(reports, acceptance_line):
    mismatched = []
    for s in SUITES:
        first = dumps(strip_runtime(reports[s].as_dict()))
        second = dumps(strip_runtime(run_suite(s, SEED).as_dict()))
        json.loads(first)
        if first != second:
            mismatched.append(s)
    ok = not mismatched
    acceptance_line(f"criterion 12: {'PASS' if ok else 'FAIL'} "
                    f"{len(SUITES) - len(mismatched)}/{len(SUITES)} suites byte-identical on rerun"
                    + (f"; differing: {', '.join(mismatched)}" if mismatched else ""))
    assert ok
