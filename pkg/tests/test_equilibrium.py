import numpy as np
import pytest

from auctionlearn.auction import FPA_RANDOM
from auctionlearn.dist import (
    ProductDistribution,
    make_discrete,
    point_mass,
    product_of,
    sample_matrix,
    uniform_on,
)
from auctionlearn.equilibrium import (
    equilibrium_transfer_check,
    solve_bne,
    verify_bne,
)
from auctionlearn.errors import EmptyGrid
from auctionlearn.estimate import shade_family, sup_error
from auctionlearn.strategy import StrategyProfile, constant, shade

from conftest import random_product, random_profile

K = 20
GRID = [k / K for k in range(K + 1)]
UNIFORM2 = ProductDistribution.iid(uniform_on(GRID), 2, 1.0)


class TestVerify:
    def test_single_bidder_zero(self):
        f = product_of([uniform_on([0, 0.5, 1.0])], 1.0)
        cert = verify_bne(FPA_RANDOM, f, StrategyProfile((constant(0.0),)))
        assert cert.epsilon == 0.0

    def test_shade_half_anchor(self):
        profile = StrategyProfile((shade(GRID, 0.5), shade(GRID, 0.5)))
        cert = verify_bne(FPA_RANDOM, UNIFORM2, profile)
        assert cert.epsilon <= 2 / K

    def test_truthful_is_far(self):
        profile = StrategyProfile((shade(GRID, 1.0), shade(GRID, 1.0)))
        cert = verify_bne(FPA_RANDOM, UNIFORM2, profile)
        assert cert.epsilon >= 0.2

    def test_all_point_masses_at_zero(self, rng):
        f = product_of([point_mass(0.0)] * 3, 1.0)
        profile = StrategyProfile((constant(0.0),) * 3)
        assert verify_bne(FPA_RANDOM, f, profile).epsilon == 0.0

    def test_representation_invariance(self):
        a = make_discrete([0.0, 0.5, 0.5, 1.0], [0.25, 0.2, 0.3, 0.25])
        b = make_discrete([0.0, 0.5, 1.0], [0.25, 0.5, 0.25])
        profile = StrategyProfile((shade([0, 0.5, 1.0], 0.5),) * 2)
        e1 = verify_bne(FPA_RANDOM, product_of([a, a], 1.0), profile).epsilon
        e2 = verify_bne(FPA_RANDOM, product_of([b, b], 1.0), profile).epsilon
        assert e1 == e2

    def test_gaps_nonnegative(self, rng):
        for _ in range(20):
            f = random_product(rng, int(rng.integers(1, 4)))
            profile = random_profile(rng, f)
            cert = verify_bne(FPA_RANDOM, f, profile)
            assert all(g >= 0.0 for row in cert.gaps for _, g in row)
            assert cert.epsilon == max(g for row in cert.gaps for _, g in row)


class TestSolve:
    def test_single_bidder(self):
        f = product_of([uniform_on([0, 0.5, 1.0])], 1.0)
        profile, cert = solve_bne(FPA_RANDOM, f, [0.0, 0.1], max_iters=5)
        assert cert.epsilon == 0.0
        assert profile[0].eval(1.0) == 0.0

    def test_uniform_grid_anchor(self):
        grid = [k / 40 for k in range(41)]
        _, cert = solve_bne(FPA_RANDOM, UNIFORM2, grid, max_iters=60, seed=0)
        assert cert.epsilon <= 0.05

    def test_complete_information(self):
        f = product_of([point_mass(1.0), point_mass(0.5)], 1.0)
        grid = [k / 100 for k in range(101)]
        profile, cert = solve_bne(FPA_RANDOM, f, grid, max_iters=100, seed=0)
        assert cert.epsilon <= 0.02
        assert profile[0].eval(1.0) >= 0.48  # winner bids at the rival's value

    def test_refining_grid_never_hurts(self):
        coarse = [k / 20 for k in range(21)]
        fine = [k / 40 for k in range(41)]
        _, c1 = solve_bne(FPA_RANDOM, UNIFORM2, coarse, max_iters=40, seed=3)
        _, c2 = solve_bne(FPA_RANDOM, UNIFORM2, fine, max_iters=40, seed=3)
        assert c2.epsilon <= c1.epsilon

    def test_empty_grid(self):
        with pytest.raises(EmptyGrid):
            solve_bne(FPA_RANDOM, UNIFORM2, [])

    def test_target_eps_stops_early(self):
        grid = [k / 40 for k in range(41)]
        _, cert = solve_bne(FPA_RANDOM, UNIFORM2, grid, max_iters=500, target_eps=0.1)
        assert cert.epsilon <= 0.1


class TestTransfer:
    def test_exact_empirical_support_matches(self):
        f = ProductDistribution.iid(uniform_on([0.0, 1.0]), 2, 1.0)
        rows = np.array([[a, b] for a in (0.0, 1.0) for b in (0.0, 1.0)])
        from auctionlearn.dist import SampleMatrix

        s = SampleMatrix(rows)
        profile = StrategyProfile((shade([0, 1.0], 0.5),) * 2)
        eps_true, eps_emp = equilibrium_transfer_check(FPA_RANDOM, f, s, profile)
        assert eps_true == pytest.approx(eps_emp, abs=1e-12)

    def test_single_bidder_both_zero(self):
        f = product_of([uniform_on([0, 1.0])], 1.0)
        s = sample_matrix(f, 8, seed=0)
        profile = StrategyProfile((constant(0.0),))
        assert equilibrium_transfer_check(FPA_RANDOM, f, s, profile) == (0.0, 0.0)

    def test_transfer_bound_with_measured_error(self):
        # eps on truth <= eps on empirical + 2 * (measured product-form sup error)
        f = ProductDistribution.iid(uniform_on([0.0, 0.25, 0.5, 0.75, 1.0]), 2, 1.0)
        s = sample_matrix(f, 4000, seed=11)
        from auctionlearn.dist import empirical_marginals

        emp = empirical_marginals(s, h=f.h)
        grid = [k / 40 for k in range(41)]
        profile, cert = solve_bne(FPA_RANDOM, emp, grid, max_iters=40, seed=1)
        eps_true, eps_emp = equilibrium_transfer_check(
            FPA_RANDOM, f, s, profile, eps_prime=cert.epsilon
        )
        fam = shade_family(f, [k / 10 for k in range(11)]) + [profile]
        measured = sup_error(s, FPA_RANDOM, fam, f, "empp").sup_error
        assert eps_true <= eps_emp + 2 * measured + 1e-9
