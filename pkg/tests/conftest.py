import sys

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    by_crit: dict[int, list] = {}
    for (crit, label), (ok, detail) in sorted(mod.RESULTS.items()):
        by_crit.setdefault(crit, []).append((label, ok, detail))
    for crit in sorted(by_crit):
        parts = by_crit[crit]
        status = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        body = "; ".join(f"{label}: {'ok' if ok else 'FAIL'} ({detail})" for label, ok, detail in parts)
        tr.write_line(f"[{status}] criterion {crit:2d}  {body}")
