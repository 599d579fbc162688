import math

import numpy as np
import pytest

from sandrenyi.divergences import (
    ONE,
    check_alpha,
    classical_renyi,
    nats_to_bits,
    renyi_entropy,
    sandwiched_renyi,
    sandwiched_renyi_trace_form,
    support_violation,
    umegaki,
)
from sandrenyi.states import haar_unitary, make_rng, random_density

import oracles

INF = math.inf
LN125 = math.log(1.25)
R = np.diag([0.75, 0.25])
S = np.eye(2) / 2


# orders

def test_check_alpha():
    assert check_alpha(2) == 2.0
    assert check_alpha("inf") == INF
    assert check_alpha("one") == ONE
    for bad in (0, -1, 1.0, 1 + 1e-7, float("nan")):
        with pytest.raises(ValueError):
            check_alpha(bad)
    assert check_alpha(1 + 2e-6) == 1 + 2e-6


# classical

def test_classical_examples():
    assert classical_renyi([0.3, 0.7], [0.3, 0.7], 2).value == pytest.approx(0.0, abs=1e-15)
    assert classical_renyi([0.75, 0.25], [0.5, 0.5], 2).value == pytest.approx(LN125, abs=1e-12)
    r = classical_renyi([1, 0], [0, 1], 2)
    assert r.value == INF and r.support_violated


def test_classical_limits():
    p, q = [0.75, 0.25], [0.5, 0.5]
    assert classical_renyi(p, q, INF).value == pytest.approx(math.log(1.5))
    assert classical_renyi(p, q, ONE).value == pytest.approx(0.75 * math.log(1.5) + 0.25 * math.log(0.5))


def test_classical_rejects_non_simplex():
    with pytest.raises(ValueError):
        classical_renyi([0.5, 0.6], [0.5, 0.5], 2)
    with pytest.raises(ValueError):
        classical_renyi([0.5, 0.5], [0.5, 0.5, 0.0], 2)


# sandwiched

def test_self_divergence_zero():
    rho = random_density(3, seed=1)
    for a in (0.5, 2, 5, INF):
        assert abs(sandwiched_renyi(rho, rho, a).value) <= 1e-9


def test_commuting_hand_value():
    v = sandwiched_renyi(R, S, 2)
    assert v.value == pytest.approx(LN125, abs=1e-12) and not v.support_violated


@pytest.mark.parametrize("a", [0.5, 2, 5, INF])
def test_pure_vs_maximally_mixed(a):
    assert sandwiched_renyi(np.diag([1.0, 0.0]), S, a).value == pytest.approx(math.log(2), abs=1e-12)


def test_support_violation_branches():
    rho, sigma = np.diag([0.5, 0.5]), np.diag([1.0, 0.0])
    assert support_violation(rho, sigma) == pytest.approx(0.5)
    hi = sandwiched_renyi(rho, sigma, 2)
    assert hi.value == INF and hi.support_violated
    assert sandwiched_renyi(rho, sigma, INF).value == INF
    lo = sandwiched_renyi(rho, sigma, 0.5)
    assert math.isfinite(lo.value) and lo.support_violated
    # sigma^(1/2) rho sigma^(1/2) = diag(0.5, 0): 2 log(0.5^0.5) = log 0.5
    assert lo.value == pytest.approx(-2 * math.log(math.sqrt(0.5)), abs=1e-12)


def test_orthogonal_pure_states():
    e0, e1 = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    assert sandwiched_renyi(e0, e1, 2).value == INF
    assert sandwiched_renyi(e0, e1, 0.5).value == INF


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        sandwiched_renyi(np.eye(2) / 2, np.eye(3) / 3, 2)


def test_one_routes_to_umegaki():
    rho, sigma = random_density(3, seed=2), random_density(3, seed=3)
    assert sandwiched_renyi(rho, sigma, ONE) == umegaki(rho, sigma)


def test_commuting_reduction():
    rng = make_rng(5)
    for trial in range(50):
        d = 2 + trial % 5
        p = rng.dirichlet(np.ones(d))
        q = rng.dirichlet(np.ones(d))
        for a in (0.5, 0.75, 1.5, 2, 3, INF):
            v = sandwiched_renyi(np.diag(p), np.diag(q), a).value
            assert abs(v - oracles.classical_renyi(p, q, a)) <= 1e-9


def test_trace_form_agrees_with_norm_form():
    for seed in range(30):
        d = 2 + seed % 3
        rho = random_density(d, 1 + seed % d, seed=seed)
        sigma = random_density(d, seed=100 + seed)
        for a in (0.5, 0.8, 1.5, 2, 7):
            assert abs(sandwiched_renyi(rho, sigma, a).value
                       - sandwiched_renyi_trace_form(rho, sigma, a).value) <= 1e-9


def test_trace_form_rejects_limits():
    with pytest.raises(ValueError):
        sandwiched_renyi_trace_form(R, S, INF)


def test_unitary_covariance():
    rng = make_rng(6)
    for seed in range(20):
        rho, sigma = random_density(3, seed=seed), random_density(3, seed=50 + seed)
        u = haar_unitary(3, rng)
        for a in (0.5, 2, INF):
            rot = sandwiched_renyi(u @ rho.matrix @ u.conj().T, u @ sigma.matrix @ u.conj().T, a).value
            assert abs(rot - sandwiched_renyi(rho, sigma, a).value) <= 1e-9


def test_tensor_additivity():
    for seed in range(20):
        r1, s1 = random_density(2, seed=seed), random_density(2, seed=seed + 30)
        r2, s2 = random_density(3, seed=seed + 60), random_density(3, seed=seed + 90)
        for a in (0.6, 1.5, 3, INF):
            joint = sandwiched_renyi(np.kron(r1.matrix, r2.matrix), np.kron(s1.matrix, s2.matrix), a).value
            parts = sandwiched_renyi(r1, s1, a).value + sandwiched_renyi(r2, s2, a).value
            assert abs(joint - parts) <= 1e-8


def test_alpha_one_continuity():
    for seed in range(20):
        rho, sigma = random_density(3, seed=seed), random_density(3, seed=seed + 40)
        ref = umegaki(rho, sigma).value
        gaps = [abs(sandwiched_renyi(rho, sigma, 1 + h).value - ref) for h in (0.1, 0.05, 0.025)]
        assert gaps[0] > gaps[1] > gaps[2]
        for g0, g1 in zip(gaps, gaps[1:]):
            assert 0.3 <= g1 / g0 <= 0.7


# umegaki and entropy

def test_umegaki_examples():
    assert umegaki(R, R).value == pytest.approx(0.0, abs=1e-14)
    assert umegaki(R, S).value == pytest.approx(0.130812, abs=1e-6)
    assert umegaki(np.diag([1.0, 0.0]), S).value == pytest.approx(math.log(2))
    assert umegaki(S, np.diag([1.0, 0.0])).value == INF


def test_entropy_examples():
    for a in (0.5, 2, INF, ONE):
        assert renyi_entropy(np.eye(3) / 3, a) == pytest.approx(math.log(3))
        assert abs(renyi_entropy(np.diag([1.0, 0, 0]), a)) <= 1e-12
    assert renyi_entropy(R, 2) == pytest.approx(0.470004, abs=1e-6)


def test_entropy_is_negative_divergence_from_identity():
    for seed in range(20):
        rho = random_density(3, 1 + seed % 3, seed=seed)
        for a in (0.5, 2, 4, INF):
            assert abs(renyi_entropy(rho, a) + sandwiched_renyi(rho, np.eye(3), a).value) <= 1e-9


def test_bits():
    assert nats_to_bits(LN125) == pytest.approx(0.321928, abs=1e-6)
