import math

import numpy as np
import pytest

from periodic_dirichlet.characters import character_matrix, enumerate_characters, trivial_character
from periodic_dirichlet.errors import (
    CertificationFailed,
    InfeasibleRadius,
    NoSolution,
    NotFound,
    SplitUnattainable,
)
from periodic_dirichlet.offzero import (
    GFamily,
    SolverConfig,
    ThetaAssignment,
    TwistedLogSum,
    block_split,
    build_targets,
    character_sums,
    choose_circle,
    class_sums,
    find_t,
    g_eval,
    lemma1_solve,
    lemma2_fixed_point,
    log_product,
    make_problem,
    prepare,
    rouche_certify,
    solve_two_angle,
    split_weights,
    theorem2_demo,
)
from periodic_dirichlet.primes import prime_power_tail, primes_in
from periodic_dirichlet.special import DirichletPolynomial, PeriodicSequence, dirichlet_poly_eval, l_function

CHARS4 = enumerate_characters(4)
CHI4 = CHARS4[1]
TRIV = trivial_character()


@pytest.fixture(scope="module")
def cfg4():
    return SolverConfig(q=4, sigma=1.2, y_prime=2, p_max=10**6, R=0.03, delta=0.08)


@pytest.fixture(scope="module")
def prep4(cfg4):
    return prepare(cfg4)


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(q=4, sigma=1.0)
    with pytest.raises(ValueError):
        SolverConfig(q=4, sigma=1.5, y_prime=100, p_max=50)


def test_class_sums_against_direct_summation():
    cfg = SolverConfig(q=4, sigma=1.2, y_prime=3, p_max=10**6, R=0.1)
    s = class_sums(cfg)
    ps = primes_in(3, 10**6).astype(float)
    for a in (1, 3):
        direct = float(np.sum(ps[ps % 4 == a] ** -1.2))
        assert s.sums[a] == pytest.approx(direct, rel=1e-12)
        assert s.sums[a] > 0
    assert abs(s.sums[1] - s.sums[3]) < 0.5
    assert s.feasible == (min(s.sums.values()) >= 10 * 1 * 0.1)
    assert s.max_feasible_R == pytest.approx(min(s.sums.values()) / 10)


def test_class_sums_edge_cases():
    assert class_sums(SolverConfig(q=4, sigma=1.2, R=0.0, p_max=10**4)).feasible
    with pytest.raises(InfeasibleRadius):
        class_sums(SolverConfig(q=4, sigma=1.2, y_prime=3, p_max=4))
    with pytest.raises(InfeasibleRadius) as err:
        class_sums(SolverConfig(q=4, sigma=1.2, R=1.0, p_max=10**4), strict=True)
    assert err.value.max_feasible_R > 0


def test_class_sums_monotone_in_budget():
    small = class_sums(SolverConfig(q=5, sigma=1.1, p_max=10**4))
    large = class_sums(SolverConfig(q=5, sigma=1.1, p_max=10**5))
    assert all(large.sums[a] >= small.sums[a] for a in small.sums)


def test_split_geometric_weights():
    w = 0.999 ** np.arange(20000)
    l0, l1, l2, d, i1, i2 = split_weights(w / w.sum(), 0.01)
    assert d <= 0.01
    assert l0 + l1 + l2 == pytest.approx(1, abs=1e-12)


def test_split_three_equal_weights():
    l0, l1, l2, d, *_ = split_weights([1 / 3, 1 / 3, 1 / 3], 0.0)
    assert (l0, l1, l2) == pytest.approx((1 / 3, 1 / 3, 1 / 3))
    assert d == pytest.approx(0, abs=1e-15)


def test_split_needs_three_blocks():
    with pytest.raises(SplitUnattainable):
        split_weights([0.5, 0.5])


def test_block_split_reports_best_delta(cfg4):
    s = class_sums(cfg4)
    with pytest.raises(SplitUnattainable) as err:
        block_split(s, 3, 0.01)
    assert 0.01 < err.value.best_delta < 0.08
    sp = block_split(s, 1, 0.08)
    assert sp.lambda0 + sp.lambda1 + sp.lambda2 == pytest.approx(1, abs=1e-12)
    assert abs(sp.lambda0 - 1 / 3) <= 0.08 and abs(sp.lambda1 - 1 / 3) <= 0.08
    assert sp.p1a < sp.p2a


def test_two_angle_examples():
    u1, u2 = solve_two_angle(1 / 3, 1 / 3, 1 / 3, 1 / 3)
    assert u1 == pytest.approx(math.pi / 3, abs=1e-13) and u2 == pytest.approx(math.pi / 3, abs=1e-13)
    for target in (1 / 3 + 0.05j, 1 / 3 + 0.1, 1 / 3 - 0.1, 1 / 3 + 0.1j, 1 / 3 - 0.1j):
        u1, u2 = solve_two_angle(1 / 3, 1 / 3, 1 / 3, target)
        assert 0 < u1 < math.pi / 2 and 0 < u2 < math.pi / 2
        assert abs((np.exp(1j * u1) + np.exp(-1j * u2)) / 3 - target) < 1e-12


def test_two_angle_random_disk():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        l0, l1 = rng.uniform(1 / 3, 1 / 3 + 0.01, size=2)
        l2 = 1 - l0 - l1
        target = l0 + 0.1 * math.sqrt(rng.uniform()) * np.exp(2j * math.pi * rng.uniform())
        u1, u2 = solve_two_angle(l0, l1, l2, target)
        assert abs(l1 * np.exp(1j * u1) + l2 * np.exp(-1j * u2) - target) < 1e-12


def test_two_angle_unreachable():
    with pytest.raises(NoSolution):
        solve_two_angle(1 / 3, 1 / 3, 1 / 3, 2.0)
    with pytest.raises(NoSolution):
        solve_two_angle(1 / 3, 1 / 3, 1 / 3, -0.5, lemma_region=True)
    u1, u2 = solve_two_angle(1 / 3, 1 / 3, 1 / 3, -0.5, lemma_region=False)
    assert abs((np.exp(1j * u1) + np.exp(-1j * u2)) / 3 + 0.5) < 1e-12


def test_change_of_variables_exact():
    rng = np.random.default_rng(1)
    for q in (3, 4, 5, 8, 12):
        C = character_matrix(q)
        z = rng.normal(size=C.entries.shape[0]) + 1j * rng.normal(size=C.entries.shape[0])
        assert np.max(np.abs(C.entries @ (C.inverse @ z) - z)) < 1e-12


def test_lemma1_zero_targets(cfg4, prep4):
    th = lemma1_solve(cfg4, CHARS4, [0, 0], prepared=prep4)
    assert th.residual < th.tail_allowance
    assert np.all(th.theta > -math.pi) and np.all(th.theta <= math.pi)


def test_lemma1_example_targets(cfg4, prep4):
    z = [0.05, 0.05j]
    th = lemma1_solve(cfg4, CHARS4, z, prepared=prep4)
    direct = character_sums(CHARS4, th.primes, th.theta, cfg4.sigma)
    assert np.max(np.abs(direct - z)) < 1e-8 + th.tail_allowance
    t = th.t_values()
    p = th.primes.astype(float)
    # phases recomputed from t_p
    assert np.allclose(np.angle(np.exp(-1j * t * np.log(p))), np.angle(np.exp(1j * th.theta)), atol=1e-9)


def test_lemma1_single_character():
    cfg = SolverConfig(q=1, sigma=1.3, p_max=10**5, R=0.01, delta=0.1)
    th = lemma1_solve(cfg, [TRIV], [-0.05])
    assert abs(character_sums([TRIV], th.primes, th.theta, cfg.sigma)[0] + 0.05) < 1e-8


def test_lemma2_trivial_sigma_two():
    cfg = SolverConfig(q=1, sigma=2.0, y_prime=30, p_max=10**5, delta=0.1)
    res = lemma2_fixed_point(cfg, [TRIV], [0.0])
    ps = res.theta.primes.astype(float)
    prod = np.prod(1 / (1 - ps**-2.0 * np.exp(1j * res.theta.theta)))
    assert abs(np.log(prod)) < 0.01


def test_lemma2_q4_targets(cfg4, prep4):
    z = 0.05 * np.array([np.exp(1j * math.pi), np.exp(2j * math.pi)])
    res = lemma2_fixed_point(cfg4, CHARS4, z, prepared=prep4)
    assert res.iterations < 50
    assert res.residual < 1e-6
    assert res.max_E < res.E_bound < 1
    assert np.max(np.abs(log_product(CHARS4, res.theta, cfg4.sigma) - z)) < 10 * cfg4.fix_tol + prep4.sums.tail


def test_build_targets():
    assert build_targets(2) == [-1, 1]
    assert build_targets(4) == [1j, -1, -1j, 1]
    assert abs(sum(build_targets(3))) < 1e-15
    with pytest.raises(ValueError):
        build_targets(1)


def test_twisted_log_sum_single_factor():
    s0 = 1.3
    ps = np.array([5])
    t5 = math.pi / math.log(5)
    L = TwistedLogSum(ps, np.exp(-1j * t5 * np.log(ps.astype(float))), s0, 0.1)
    assert abs(np.exp(L(s0)[0]) - 1 / (1 + 5**-s0)) < 1e-14


def test_twisted_log_sum_taylor_matches_direct():
    ps = primes_in(2, 10**5)
    rng = np.random.default_rng(3)
    coef = CHI4(ps) * np.exp(1j * rng.uniform(-math.pi, math.pi, ps.size))
    s0 = 1.15
    L = TwistedLogSum(ps, coef, s0, 0.08, direct_cut=100)
    pts = s0 + 0.08 * np.exp(1j * np.linspace(0, 6, 7))
    direct = [-np.sum(np.log(1 - coef * np.exp(-s * np.log(ps.astype(float))))) for s in pts]
    assert np.max(np.abs(L(pts) - direct)) < 1e-12
    with pytest.raises(ValueError):
        L(s0 + 0.2)


def test_g_eval_zero_twist_matches_f():
    prob = make_problem([(TRIV, {1: 1}), (CHI4, {1: 1})])
    ps = primes_in(prob.y, 10**6)
    theta = ThetaAssignment(ps, np.zeros(ps.size))
    fam = GFamily(prob, {}, theta, 1.5, 0.2, prime_power_tail(10**6, 1.5))
    s = 1.5 + 0.1j
    for j, psi in enumerate(prob.psis, start=1):
        val, tail = g_eval(j, s, fam)
        ref = dirichlet_poly_eval(prob.polys[j - 1], s) * l_function(psi, s)
        assert abs(np.log(ref / val)) < tail


def test_find_t_examples():
    phi = 1.234
    t = find_t({2: phi}, (0, 100), 0.1)
    assert abs(np.angle(np.exp(1j * (-t * math.log(2) - phi)))) < 1e-12
    assert find_t({2: 0.0, 3: 0.0}, (0, 10), 0.3) == pytest.approx(0, abs=0.3 / (2 * math.log(3)))
    rng = np.random.default_rng(7)
    targets = {p: float(rng.uniform(-math.pi, math.pi)) for p in (2, 3, 5, 7)}
    t = find_t(targets, (0, 1e5), 0.3)
    mism = max(abs(np.angle(np.exp(1j * (-t * math.log(p) - th)))) for p, th in targets.items())
    assert mism < 0.3
    with pytest.raises(NotFound):
        find_t(targets, (0, 1), 0.01)


def test_rouche_identical_functions():
    G = lambda s: (s - 1.1) * (s + 3)
    cert = rouche_certify(G, G, 1.1 + 0j, 0.05)
    assert cert.max_diff == 0 and cert.valid and cert.zeros_inside == 1


def test_rouche_perturbation():
    G = lambda s: (s - 1.1) * (s + 3)
    center, r = 1.1 + 0j, 0.05
    gamma = float(np.min(np.abs(G(center + r * np.exp(2j * math.pi * np.arange(4096) / 4096)))))
    F = lambda s: G(s) + gamma / 4
    cert = rouche_certify(F, G, center, r)
    assert cert.valid and cert.zeros_inside == 1
    with pytest.raises(CertificationFailed) as err:
        rouche_certify(lambda s: G(s) + 2 * gamma, G, center, r)
    assert err.value.report["stage"] == "rouche"


def test_choose_circle_simple_zero():
    G = lambda s: s - 1.1
    c = choose_circle(G, 1.02, 1.18)
    assert c.sigma0 == pytest.approx(1.1)
    assert c.r == pytest.approx(0.8 * 0.08)
    assert c.gamma > 0
    half = choose_circle(G, 1.02, 1.18, samples=256)
    assert abs(half.gamma_raw - c.gamma_raw) <= max(c.slack, half.slack)


def test_theorem2_rejects_single_character():
    with pytest.raises(ValueError):
        theorem2_demo([(CHI4, {1: 1})], 1.02, 1.2)
    with pytest.raises(ValueError):
        theorem2_demo([(TRIV, {1: 1}), (CHI4, {1: 1})], 1.3, 1.6)


def test_theorem2_headline_reports_structured_failure():
    rep = theorem2_demo([(TRIV, {1: 1}), (CHI4, {1: 1})], 1.02, 1.2, 1e4)
    assert rep.certificates == []
    assert rep.failure["stage"] == "lemma2"
    assert rep.failure["required_R"] > rep.failure["max_feasible_R"]
    with pytest.raises(CertificationFailed):
        theorem2_demo([(TRIV, {1: 1}), (CHI4, {1: 1})], 1.02, 1.2, 1e4, raise_on_empty=True)


def test_theorem2_budget_monotone():
    comps = [(TRIV, {1: -1, 2: 1}), (CHI4, {1: 1})]
    small = theorem2_demo(comps, 1.02, 1.2, 2000, p_max=10**6)
    large = theorem2_demo(comps, 1.02, 1.2, 4000, p_max=10**6)
    assert len(large.certificates) >= len(small.certificates)
    assert large.failure is None or large.failure["stage"] in {"rouche", "circle"}
