"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line.

The default suite is run twice through the command line at seed 42.  Both
reports must be byte-identical; the first one also supplies the per-check
results, with runtimes taken from the progress lines on stderr.
"""

import json
import math
import re
import subprocess
import sys

import numpy as np
import pytest

from sandrenyi.divergences import sandwiched_renyi, umegaki
from sandrenyi.optimize import (
    Ensemble,
    OptimizerConfig,
    conditional_renyi_entropy,
    cq_output,
    holevo_information_at,
    minimax_value,
    mutual_info_dual,
    mutual_info_primal,
)
from sandrenyi.states import DensityMatrix, make_rng, partial_trace, random_channel, random_density

import oracles

PROGRESS = re.compile(r"^([\w-]+): (\d+) trials, (\d+) failures, (\d+) inconclusive, .*, ([\d.]+)s$")
FAST = OptimizerConfig(restarts=3)


def _run_suite(path):
    cmd = [sys.executable, "-m", "sandrenyi.cli", "verify", "all", "--seed", "42", "--reproducible",
           "--out", str(path)]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    times = {}
    for line in proc.stderr.splitlines():
        m = PROGRESS.match(line.strip())
        if m:
            times[m.group(1)] = float(m.group(5))
    return proc.returncode, path.read_bytes(), times


@pytest.fixture(scope="module")
def suite(tmp_path_factory):
    base = tmp_path_factory.mktemp("acceptance")
    code_a, bytes_a, times = _run_suite(base / "a.json")
    code_b, bytes_b, _ = _run_suite(base / "b.json")
    report = json.loads(bytes_a)
    return {
        "checks": {c["check"]: c for c in report["checks"]},
        "times": times,
        "codes": (code_a, code_b),
        "bytes": (bytes_a, bytes_b),
    }


def _summary(rep, t=None):
    s = f"{rep['check']}: {rep['trials']} trials, {rep['failures']} failures, worst margin {rep['worst_margin']:.3g}"
    return s if t is None else f"{s}, {t:.1f}s"


def _suite_criterion(suite, record, number, checks, trials, budget=None, max_inconclusive=0):
    ok, parts = True, []
    for name, n in zip(checks, trials):
        rep = suite["checks"][name]
        t = suite["times"].get(name)
        ok &= rep["trials"] == n and rep["failures"] == 0 and rep["inconclusive"] <= max_inconclusive
        if budget is not None:
            ok &= t is not None and t < budget
        parts.append(_summary(rep, t))
    assert record(number, ok, "; ".join(parts))


def test_criterion_01_positivity(suite, record_criterion):
    _suite_criterion(suite, record_criterion, 1, ["positivity"], [500], budget=60)


def test_criterion_02_data_processing(suite, record_criterion):
    _suite_criterion(suite, record_criterion, 2, ["dpi"], [200], budget=120)


def test_criterion_03_contraction(suite, record_criterion):
    _suite_criterion(suite, record_criterion, 3, ["contraction"], [100])


def test_criterion_04_monotonicity(suite, record_criterion):
    _suite_criterion(suite, record_criterion, 4, ["monotonicity-alpha"], [100])


def test_criterion_05_convexity(suite, record_criterion):
    _suite_criterion(suite, record_criterion, 5, ["convexity"], [100])


def test_criterion_06_interpolation_and_holder(suite, record_criterion):
    _suite_criterion(suite, record_criterion, 6, ["interpolation", "holder-family"], [200, 200])


def test_criterion_07_duality(suite, record_criterion):
    _suite_criterion(suite, record_criterion, 7, ["duality"], [30], budget=600, max_inconclusive=3)


def test_criterion_08_primal_dual_mutual_information(record_criterion):
    rng = make_rng(8)
    worst = 0.0
    for _ in range(30):
        rho = random_density(4, seed=int(rng.integers(1 << 31))).with_dims((2, 2))
        for a in (1.5, 2.0, 3.0):
            gap = abs(mutual_info_primal(rho, a, FAST).value - mutual_info_dual(rho, a, FAST).value)
            worst = max(worst, gap)
    assert record_criterion(8, worst <= 2e-5, f"90 primal/dual pairs, worst gap {worst:.2e}")


def test_criterion_09_additivity(suite, record_criterion):
    _suite_criterion(suite, record_criterion, 9, ["mi-additivity", "chi-superadditivity"], [20, 10])


def _designated_instances():
    """Twenty dim-2 instances as (label, optimizer value, oracle thunk)."""
    cases = []
    for i, seed in enumerate(range(301, 307)):
        a = (1.5, 2.0, 3.0)[i % 3]
        rho = random_density(4, seed=seed).with_dims((2, 2))
        cases.append((f"conditional seed={seed} a={a}", lambda rho=rho, a=a: conditional_renyi_entropy(rho, a, FAST).value,
                      lambda rho=rho, a=a: -oracles.bloch_minimize(oracles.conditional_objective(rho.matrix, 2, a))))
    bell = DensityMatrix(oracles.bell_state(), (2, 2))
    cases.append(("conditional bell a=2", lambda: conditional_renyi_entropy(bell, 2.0, FAST).value,
                  lambda: -oracles.bloch_minimize(oracles.conditional_objective(bell.matrix, 2, 2.0))))
    for i, seed in enumerate(range(311, 317)):
        a = (1.5, 2.0, 3.0)[i % 3]
        rho = random_density(4, seed=seed).with_dims((2, 2))
        rho_a = partial_trace(rho.matrix, [0], (2, 2))
        cases.append((f"mutual-info seed={seed} a={a}", lambda rho=rho, a=a: mutual_info_primal(rho, a, FAST).value,
                      lambda rho=rho, a=a, l=rho_a: oracles.bloch_minimize(oracles.product_objective(rho.matrix, l, a))))
    for i, seed in enumerate(range(321, 325)):
        a = (1.5, 2.0, 3.0, 2.0)[i]
        rho = random_density(4, seed=seed).with_dims((2, 2))
        cases.append((f"minimax seed={seed} a={a}", lambda rho=rho, a=a: minimax_value(rho, a, "infsup", FAST).value,
                      lambda rho=rho, a=a: oracles.bloch_minimize(oracles.infsup_objective(rho.matrix, 2, a))))
    rng = make_rng(10)
    for i in range(3):
        a = (1.5, 2.0, 3.0)[i]
        c = random_channel(2, 2, 2, seed=331 + i)
        g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        ens = Ensemble(np.array([0.4, 0.6]), g / np.linalg.norm(g, axis=1, keepdims=True))
        rho_xb, rho_x = cq_output(c, ens)
        cases.append((f"holevo-inner seed={331 + i} a={a}",
                      lambda c=c, ens=ens, a=a: holevo_information_at(c, ens, a, FAST).value,
                      lambda m=rho_xb, l=rho_x, a=a: oracles.bloch_minimize(oracles.product_objective(m, l, a))))
    return cases


def test_criterion_10_oracle_agreement(record_criterion):
    cases = _designated_instances()
    diffs = [(abs(opt() - ref()), label) for label, opt, ref in cases]
    worst, where = max(diffs)
    ok = len(cases) == 20 and worst <= 2e-3
    assert record_criterion(10, ok, f"{len(cases)} instances, worst |optimizer - oracle| {worst:.2e} ({where})")


def test_criterion_11_classical_reduction(suite, record_criterion):
    rng = make_rng(11)
    alphas = (0.5, 0.75, 1.5, 2.0, 3.0, math.inf)
    worst, ratios = 0.0, []
    for _ in range(100):
        d = int(rng.integers(2, 5))
        p, q = rng.dirichlet(np.ones(d)), rng.dirichlet(np.ones(d))
        for a in alphas:
            worst = max(worst, abs(sandwiched_renyi(np.diag(p), np.diag(q), a).value - oracles.classical_renyi(p, q, a)))
        ref = umegaki(np.diag(p), np.diag(q)).value
        gaps = [abs(sandwiched_renyi(np.diag(p), np.diag(q), 1 + h).value - ref) for h in (0.1, 0.05, 0.025)]
        if gaps[0] >= 1e-10:
            ratios += [gaps[1] / gaps[0], gaps[2] / gaps[1]]
    limit = suite["checks"]["limit-alpha1"]
    ok = worst <= 1e-9 and all(0.3 <= r <= 0.7 for r in ratios) and limit["failures"] == 0
    assert record_criterion(11, ok, f"600 diagonal values, worst deviation {worst:.2e}; "
                                    f"gap ratios in [{min(ratios):.3f}, {max(ratios):.3f}]; "
                                    f"{_summary(limit)}")


def test_criterion_12_determinism(suite, record_criterion):
    a, b = suite["bytes"]
    ok = a == b and suite["codes"] == (0, 0)
    assert record_criterion(12, ok, f"two runs of verify all --seed 42: {len(a)} bytes, "
                                    f"{'identical' if a == b else 'different'}, exit codes {suite['codes']}")
