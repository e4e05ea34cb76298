import numpy as np
import pytest

from auctionlearn.dist import (
    ProductDistribution,
    SampleMatrix,
    make_discrete,
    product_of,
    sample_matrix,
    uniform_on,
)
from auctionlearn.errors import CostExceedsMean, TooLargeToEnumerate
from auctionlearn.pandora import (
    IndexPolicy,
    SearchInstance,
    opt_welfare,
    optimal_adaptive_oracle,
    pandora_from_samples,
    policy_payoff_exact,
    simulate_policy,
    truncation_budget,
    weitzman_index,
    weitzman_policy,
)

from conftest import random_search_instance

BERNOULLI = uniform_on([0.0, 1.0])


class TestWeitzmanIndex:
    def test_zero_cost_gives_bound(self):
        assert weitzman_index(BERNOULLI, 0.0, h=1.0) == 1.0

    def test_bernoulli_closed_form(self):
        # 0.5 * (1 - sigma) = 0.25
        assert weitzman_index(BERNOULLI, 0.25) == pytest.approx(0.5)

    def test_cost_at_mean_gives_zero(self):
        assert weitzman_index(BERNOULLI, 0.5) == pytest.approx(0.0)

    def test_cost_exceeds_mean(self):
        with pytest.raises(CostExceedsMean):
            weitzman_index(BERNOULLI, 0.6)

    def test_solves_defining_equation(self, rng):
        for _ in range(50):
            atoms = np.unique(rng.random(4))
            f = make_discrete(atoms.tolist(), (rng.random(len(atoms)) + 0.1).tolist())
            c = float(rng.random()) * f.mean()
            sigma = weitzman_index(f, c)
            assert f.expected_excess(sigma) == pytest.approx(c, abs=1e-12)

    def test_nonincreasing_in_cost(self, rng):
        atoms = np.unique(rng.random(4))
        f = make_discrete(atoms.tolist(), (rng.random(len(atoms)) + 0.1).tolist())
        costs = np.linspace(0.0, f.mean(), 8)
        sigmas = [weitzman_index(f, c, h=1.0) for c in costs]
        assert all(s2 <= s1 + 1e-12 for s1, s2 in zip(sigmas, sigmas[1:]))


class TestSimulatePolicy:
    def test_all_indices_negative(self):
        p = IndexPolicy((-0.5, -0.1), (0.1, 0.1))
        assert simulate_policy(p, [0.9, 0.9]) == 0.0

    def test_single_box(self):
        p = IndexPolicy((0.5,), (0.1,))
        assert simulate_policy(p, [0.7]) == pytest.approx(0.6)

    def test_threshold_stop(self):
        p = IndexPolicy((0.5, 0.3), (0.1, 0.1))
        # open box 0, see 0.4 >= 0.3, stop with 0.4 - 0.1
        assert simulate_policy(p, [0.4, 0.9]) == pytest.approx(0.3)

    def test_continues_below_threshold(self):
        p = IndexPolicy((0.5, 0.3), (0.1, 0.1))
        assert simulate_policy(p, [0.2, 0.9]) == pytest.approx(0.9 - 0.2)

    def test_budget_stops_opening(self):
        p = IndexPolicy((0.9, 0.8), (0.3, 0.3), truncation_budget=0.5)
        # second opening would cost 0.6 total > 0.5
        assert simulate_policy(p, [0.1, 0.9]) == pytest.approx(-0.2)


class TestPayoffExact:
    def test_single_bernoulli_box(self):
        inst = SearchInstance(product_of([BERNOULLI], 1.0), (0.25,))
        assert policy_payoff_exact(inst, weitzman_policy(inst)) == pytest.approx(0.25)

    def test_negative_indices_zero(self):
        inst = SearchInstance(product_of([BERNOULLI], 1.0), (0.25,))
        assert policy_payoff_exact(inst, IndexPolicy((-1.0,), (0.25,))) == 0.0

    def test_matches_brute_force(self, rng):
        for _ in range(60):
            inst = random_search_instance(rng)
            payoff = policy_payoff_exact(inst, weitzman_policy(inst))
            assert payoff == pytest.approx(optimal_adaptive_oracle(inst), abs=1e-9)

    def test_matches_opt_welfare(self, rng):
        for _ in range(60):
            inst = random_search_instance(rng, n_max=6, atoms_max=5)
            payoff = policy_payoff_exact(inst, weitzman_policy(inst))
            assert payoff == pytest.approx(opt_welfare(inst), abs=1e-10)

    def test_monte_carlo_consistency(self):
        inst = SearchInstance(
            product_of(
                [
                    make_discrete([0.1, 0.6, 0.9], [0.3, 0.4, 0.3]),
                    make_discrete([0.0, 0.8], [0.5, 0.5]),
                ],
                1.0,
            ),
            (0.05, 0.1),
        )
        policy = weitzman_policy(inst)
        exact = policy_payoff_exact(inst, policy)
        draws_values = sample_matrix(inst.boxes, 10**6, seed=123).values
        draws = np.fromiter(
            (simulate_policy(policy, row) for row in draws_values), dtype=float
        )
        se = draws.std(ddof=1) / np.sqrt(len(draws))
        assert abs(draws.mean() - exact) < 4 * se


class TestOracle:
    def test_single_box(self):
        inst = SearchInstance(product_of([BERNOULLI], 1.0), (0.25,))
        assert optimal_adaptive_oracle(inst) == pytest.approx(0.25)

    def test_equals_index_policy_on_two_bernoullis(self):
        inst = SearchInstance(product_of([BERNOULLI, BERNOULLI], 1.0), (0.1, 0.1))
        assert optimal_adaptive_oracle(inst) == pytest.approx(
            policy_payoff_exact(inst, weitzman_policy(inst)), abs=1e-9
        )

    def test_worthless_box_changes_nothing(self):
        good = make_discrete([0.2, 0.9], [0.5, 0.5])
        dead = make_discrete([0.0, 0.4], [0.5, 0.5])  # cost equals its mean
        with_dead = SearchInstance(product_of([dead, good], 1.0), (0.2, 0.05))
        without = SearchInstance(product_of([good], 1.0), (0.05,))
        assert optimal_adaptive_oracle(with_dead) == pytest.approx(
            optimal_adaptive_oracle(without), abs=1e-12
        )

    def test_size_limit(self):
        inst = SearchInstance(ProductDistribution.iid(BERNOULLI, 5, 1.0), (0.1,) * 5)
        with pytest.raises(TooLargeToEnumerate):
            optimal_adaptive_oracle(inst)


class TestOptWelfare:
    def test_zero_costs_expected_max(self):
        inst = SearchInstance(product_of([BERNOULLI, BERNOULLI], 1.0), (0.0, 0.0))
        assert opt_welfare(inst) == pytest.approx(0.75)  # E[max of two fair coins]

    def test_single_box_identity(self, rng):
        for _ in range(20):
            atoms = np.unique(rng.random(4))
            f = make_discrete(atoms.tolist(), (rng.random(len(atoms)) + 0.1).tolist())
            c = float(rng.random()) * f.mean()
            inst = SearchInstance(product_of([f], 1.0), (c,))
            assert opt_welfare(inst) == pytest.approx(f.mean() - c, abs=1e-12)


class TestTruncation:
    @pytest.mark.parametrize("eps", [0.1, 0.01])
    def test_loss_within_eps(self, rng, eps):
        budget = truncation_budget(1.0, eps)
        for _ in range(40):
            inst = random_search_instance(rng, n_max=6, atoms_max=4)
            full = policy_payoff_exact(inst, weitzman_policy(inst))
            trunc = policy_payoff_exact(inst, weitzman_policy(inst, budget))
            assert trunc <= full + 1e-12
            assert full - trunc <= eps

    def test_binding_budget_many_boxes(self):
        # 30 identical boxes with cost 0.4: cumulative cost crosses the budget
        f = make_discrete([0.0, 1.0], [0.4, 0.6])
        inst = SearchInstance(ProductDistribution.iid(f, 30, 1.0), (0.4,) * 30)
        budget = truncation_budget(1.0, 0.1)
        full = policy_payoff_exact(inst, weitzman_policy(inst))
        trunc = policy_payoff_exact(inst, weitzman_policy(inst, budget))
        assert trunc < full  # the budget actually binds here
        assert full - trunc <= 0.1

    def test_huge_budget_identical(self, rng):
        inst = random_search_instance(rng)
        full = policy_payoff_exact(inst, weitzman_policy(inst))
        capped = policy_payoff_exact(inst, weitzman_policy(inst, sum(inst.costs) + 1.0))
        assert capped == full


class TestLearning:
    def test_exact_support_enumeration_recovers_optimum(self):
        f = ProductDistribution.iid(BERNOULLI, 2, 1.0)
        rows = np.array([[a, b] for a in (0.0, 1.0) for b in (0.0, 1.0)])
        learned, opt = pandora_from_samples(SampleMatrix(rows), (0.1, 0.1), f, 0.01)
        assert learned == pytest.approx(opt, abs=1e-12)

    def test_median_regret_small(self):
        f = ProductDistribution.iid(BERNOULLI, 3, 1.0)
        costs = (0.1, 0.1, 0.1)
        regrets = []
        for k in range(30):
            s = sample_matrix(f, 10**4, seed=500 + k)
            learned, opt = pandora_from_samples(s, costs, f, 0.01)
            regrets.append(opt - learned)
        assert float(np.median(regrets)) <= 0.05

    def test_cost_exceeding_empirical_mean_raises(self):
        rows = np.array([[0.0], [0.0], [0.1], [0.1]])
        f = product_of([make_discrete([0.0, 0.1, 1.0], [0.3, 0.3, 0.4])], 1.0)
        with pytest.raises(CostExceedsMean):
            pandora_from_samples(SampleMatrix(rows), (0.3,), f, 0.01)
