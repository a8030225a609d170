import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sklearn.base import clone

from ctxstackelberg import (BlockHedgeLeader, ConfigurationError, Context, ExploreThenCommitLeader,
                            GreedyLeader, HedgeLeader, approx_extreme_points, follower_best_response,
                            make_leader)
from ctxstackelberg.environments import StochasticFollowers, build_olt_instance
from ctxstackelberg.instances import compromise_instance, random_tabular_instance
from ctxstackelberg.learners import PolicyClass, build_context_table, grid_size, weight_grid
from ctxstackelberg.learners.policies import default_resolution

Z = Context((0.3,))


# ---------------------------------------------------------------- grid and policies

def test_weight_grid_small():
    assert weight_grid(2, 2).tolist() == [[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]]
    assert weight_grid(5, 1).tolist() == [[1.0]]


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 12), st.integers(1, 4))
def test_weight_grid_size_and_sums(m, k):
    grid = weight_grid(m, k)
    assert len(grid) == grid_size(m, k) == math.comb(m + k - 1, k - 1)
    assert len(grid) <= max(m, 1) ** k or m == 1
    counts = np.rint(grid * m).astype(int)
    assert np.all(counts.sum(axis=1) == m)
    assert np.allclose(counts / m, grid)


def test_default_resolution():
    assert default_resolution(10, 2) == 10
    assert default_resolution(5000, 2) == 40
    assert grid_size(default_resolution(5000, 6), 6) <= 20000


def test_policy_for_first_type_plays_first_action():
    olt = build_olt_instance()
    table = build_context_table(olt, approx_extreme_points(olt, Z, 1e-3), Z)
    pol = PolicyClass([[1.0, 0.0], [0.0, 1.0]])
    ch = pol.choices(table)
    assert np.allclose(table.points[ch[0]], [1, 0])
    assert np.allclose(table.points[ch[1]], [0, 1])


def test_single_type_single_policy():
    game = random_tabular_instance(np.random.default_rng(0), 2, 2, 1)
    leader = HedgeLeader().fit(game, 10)
    assert len(leader.policies_) == 1
    z = game.context_space.contexts[0]
    table = leader._table(z)
    assert np.allclose(leader.predict(z), table.points[np.argmax(table.per_type[:, 0])])


# ---------------------------------------------------------------- greedy

def test_greedy_uniform_start_picks_first_point():
    olt = build_olt_instance()
    for est in ("type", "action"):
        leader = GreedyLeader(est).fit(olt, 10)
        assert np.allclose(leader.estimated_utilities(Z), [0.5, 0.5])
        assert np.allclose(leader.predict(Z), [1, 0])


def test_type_frequencies():
    olt = build_olt_instance()
    leader = GreedyLeader("type").fit(olt, 10)
    assert np.allclose(leader.type_distribution(), [0.5, 0.5])
    for i in (0, 0, 1):
        leader.partial_fit(Z, leader.predict(Z), follower_type=i)
    assert np.allclose(leader.type_distribution(), [2 / 3, 1 / 3])


def test_action_frequencies():
    game = random_tabular_instance(np.random.default_rng(4), 2, 3, 2)
    leader = GreedyLeader("action").fit(game, 10)
    assert np.allclose(leader.action_distribution([[0, 1]]), [[1 / 3] * 3])
    olt = build_olt_instance()
    leader = GreedyLeader("action").fit(olt, 10)
    leader.partial_fit(Z, [1, 0], follower_type=1)
    assert np.allclose(leader.action_distribution([[0, 1]]), [[0, 1]])


def test_greedy_matches_exhaustive_oracle():
    rng = np.random.default_rng(11)
    game = random_tabular_instance(rng, 2, 2, 2)
    z = game.context_space.contexts[0]
    leader = GreedyLeader("type").fit(game, 100)
    history = [0, 1, 1, 0, 1, 1, 1]
    for i in history:
        leader.partial_fit(z, leader.predict(z), follower_type=i)
    p = np.bincount(history, minlength=2) / len(history)
    eps = approx_extreme_points(game, z, leader.delta_)
    scores = []
    for x, sigma in eps:
        scores.append(sum(p[i] * (x @ game.leader_matrix(z))[follower_best_response(game, i, z, x)]
                          for i in range(2)))
    assert np.allclose(leader.predict(z), eps.points[int(np.argmax(scores))])


def test_estimators_agree_after_first_round():
    rng = np.random.default_rng(5)
    game = random_tabular_instance(rng, 3, 3, 2, n_contexts=2)
    a, b = GreedyLeader("type").fit(game, 50), GreedyLeader("action").fit(game, 50)
    for t in range(30):
        z = game.context_space.contexts[t % 2]
        xa, xb = a.predict(z), b.predict(z)
        if t:
            assert np.array_equal(xa, xb)
        i = int(rng.integers(2))
        a.partial_fit(z, xa, follower_type=i)
        b.partial_fit(z, xb, follower_type=i)


def test_full_feedback_leaders_need_types():
    olt = build_olt_instance()
    with pytest.raises(ValueError):
        GreedyLeader().fit(olt, 5).partial_fit(Z, [1, 0], follower_action=0)


def test_bad_estimator_name():
    with pytest.raises(ValueError):
        GreedyLeader("median").fit(build_olt_instance(), 5)


def test_type_frequency_converges():
    """TV(p, p_hat_t) stays within 2K sqrt(log(2T)/(t-1)) along stochastic runs."""
    game = random_tabular_instance(np.random.default_rng(0), 2, 2, 3)
    z = game.context_space.contexts[0]
    p = np.array([0.5, 0.3, 0.2])
    T = 1000
    bound = lambda t: 2 * 3 * math.sqrt(math.log(2 * T) / (t - 1))
    for seed in range(20):
        rng = np.random.default_rng(seed)
        leader = GreedyLeader("type").fit(game, T)
        for t in range(1, T + 1):
            if t in (10, 100, 1000):
                tv = 0.5 * np.abs(leader.type_distribution() - p).sum()
                assert tv <= bound(t)
            leader.partial_fit(z, [1.0, 0.0], follower_type=int(rng.choice(3, p=p)))


# ---------------------------------------------------------------- full-information Hedge

def test_hedge_leader_learns_constant_follower():
    olt = build_olt_instance()
    leader = HedgeLeader(grid_resolution=1, random_state=0).fit(olt, 100)
    assert leader.eta_ == pytest.approx(math.sqrt(math.log(2) / 100))
    first = [k for k, w in enumerate(leader.policies_.omegas) if w[0] == 1][0]
    prev = leader.policy_distribution()[first]
    for _ in range(20):
        x = leader.predict(Z)
        leader.partial_fit(Z, x, follower_type=0)
        now = leader.policy_distribution()[first]
        assert now > prev
        prev = now


def test_hedge_leader_losses_in_range():
    game = random_tabular_instance(np.random.default_rng(1), 3, 2, 2, n_contexts=2)
    leader = HedgeLeader(grid_resolution=4, random_state=3).fit(game, 30)
    for t in range(30):
        z = game.context_space.contexts[t % 2]
        leader.partial_fit(z, leader.predict(z), follower_type=t % 2)
    assert np.all(leader.hedge_.cum_loss <= 0) and np.all(leader.hedge_.cum_loss >= -30)


# ---------------------------------------------------------------- explore then commit

def test_explore_then_commit_deterministic_follower():
    olt = build_olt_instance()
    leader = ExploreThenCommitLeader(n_explore=5).fit(olt, 40)
    assert {tuple(v) for v in leader.spanner_.vectors.astype(int)} == {(1, 0), (0, 1)}
    for t in range(40):
        x = leader.predict(Z)
        a = follower_best_response(olt, 0, Z, x)
        leader.partial_fit(Z, x, follower_action=a)
        if t >= 10:
            assert np.allclose(x, [1, 0])
    hit = [k for k, b in enumerate(leader.spanner_.vectors) if tuple(b) == (1, 0)][0]
    assert leader.hits_[hit] / leader.n_explore_ == 1.0


def test_explore_estimates_track_type_probabilities():
    olt = build_olt_instance()
    leader = ExploreThenCommitLeader(n_explore=4000).fit(olt, 8000)
    src = StochasticFollowers([0.3, 0.7])
    src.reset(np.random.default_rng(0))
    for _ in range(8000):
        x = leader.predict(Z)
        i = src.next(0, None)
        leader.partial_fit(Z, x, follower_action=follower_best_response(olt, i, Z, x))
    est = leader.hits_ / leader.n_explore_
    for b, e in zip(leader.spanner_.vectors, est):
        target = 0.3 if tuple(b) == (1, 0) else 0.7
        assert abs(e - target) < 4 * math.sqrt(0.21 / 4000)


def test_explore_budget_checks():
    olt = build_olt_instance()
    with pytest.raises(ConfigurationError):
        ExploreThenCommitLeader(n_explore=6).fit(olt, 10)
    leader = ExploreThenCommitLeader().fit(olt, 1000)
    raw = (4 * 1000 ** 2 * math.log(1000) / 2) ** (1 / 3)
    assert leader.n_explore_ == min(math.ceil(raw), 1000 // 2)


def test_context_dependent_followers_rejected_in_bandit_mode():
    game = random_tabular_instance(np.random.default_rng(0), 2, 2, 2, n_contexts=2)
    with pytest.raises(ConfigurationError):
        ExploreThenCommitLeader().fit(game, 100)
    with pytest.raises(ConfigurationError):
        BlockHedgeLeader().fit(game, 100)


def test_bandit_leaders_need_actions():
    leader = ExploreThenCommitLeader(n_explore=1).fit(build_olt_instance(), 10)
    with pytest.raises(ValueError):
        leader.partial_fit(Z, [1, 0], follower_type=0)


def test_indicator_estimates_bounded():
    game = compromise_instance()
    leader = ExploreThenCommitLeader(n_explore=3).fit(game, 30)
    k = game.n_types
    for est in np.array(np.meshgrid(*[np.linspace(0, 1, 5)] * leader.n_spanner)).reshape(leader.n_spanner, -1).T:
        p = leader.indicator_estimates(est)
        assert p.min() >= -k - 1e-9 and p.max() <= k + 1 + 1e-9


def test_indicator_estimates_exact_at_true_probabilities():
    game = compromise_instance()
    leader = ExploreThenCommitLeader(n_explore=3).fit(game, 30)
    z = game.context_space.contexts[0]
    p = np.array([0.35, 0.65])
    true_b = []
    for b, x, a in zip(leader.spanner_.vectors, leader.spanner_.realizers, leader.spanner_.actions):
        true_b.append(sum(p[i] for i in range(2) if follower_best_response(game, i, z, x) == a))
    est = leader.indicator_estimates(true_b)
    for e, sigma in enumerate(leader.base_points_.sigmas):
        for a in range(2):
            assert est[e, a] == pytest.approx(sum(p[i] for i in range(2) if sigma[i] == a), abs=1e-12)


# ---------------------------------------------------------------- block hedge

def test_single_block_single_update():
    olt = build_olt_instance()
    leader = BlockHedgeLeader(n_blocks=1, grid_resolution=2, random_state=0).fit(olt, 12)
    assert leader.block_size_ == 12
    for t in range(12):
        x = leader.predict(Z)
        leader.partial_fit(Z, x, follower_action=follower_best_response(olt, t % 2, Z, x))
    assert leader.n_updates_ == 1


def test_block_schedule_checks():
    olt = build_olt_instance()
    with pytest.raises(ConfigurationError):
        BlockHedgeLeader(n_blocks=6).fit(olt, 12)
    leader = BlockHedgeLeader().fit(olt, 2000)
    assert leader.block_size_ >= leader.n_spanner + 1
    assert leader.eta_ == pytest.approx(math.sqrt(math.log(len(leader.policies_)) / leader.n_blocks_) / 4)


def test_explore_slots_distinct_and_realizers_played():
    olt = build_olt_instance()
    leader = BlockHedgeLeader(n_blocks=5, random_state=1).fit(olt, 50)
    for block in range(5):
        slots = dict(leader.explore_slots_)
        assert len(slots) == leader.n_spanner
        for pos in range(10):
            x = leader.predict(Z)
            if pos in slots:
                assert np.allclose(x, leader.spanner_.realizers[slots[pos]])
            leader.partial_fit(Z, x, follower_action=follower_best_response(olt, 0, Z, x))


def test_single_type_block_estimate_by_hand():
    game = random_tabular_instance(np.random.default_rng(8), 2, 2, 1, context_free_followers=True)
    leader = BlockHedgeLeader(n_blocks=1, grid_resolution=1, random_state=0).fit(game, 10)
    z = game.context_space.contexts[0]
    assert leader.n_spanner == 1 and tuple(leader.spanner_.vectors[0]) == (1,)
    table = leader._table(z)
    e = leader.policies_.choices(table)[0]
    for p_hat in (0.0, 1.0):
        # indicator 1{sigma_e = a} is (1) for the played action and (0) otherwise
        expected = -p_hat * table.values[e, table.sigmas[e, 0]]
        assert leader.block_loss_estimates(z, [p_hat])[0] == pytest.approx(expected)


def test_block_losses_within_bound():
    game = compromise_instance()
    leader = BlockHedgeLeader(random_state=0).fit(game, 400)
    for z in game.context_space.contexts:
        for est in ([0, 0], [0, 1], [1, 0], [1, 1]):
            losses = leader.block_loss_estimates(z, est)
            assert np.all(np.abs(losses) <= leader.loss_bound_)


# ---------------------------------------------------------------- estimator API

@pytest.mark.parametrize("name", ["greedy-typefreq", "greedy-actionfreq", "hedge", "bandit-greedy",
                                  "bandit-blockhedge"])
def test_make_leader_and_clone(name):
    leader = make_leader(name, delta=1e-3, M=4, seed=0)
    params = leader.get_params()
    assert clone(leader).get_params() == params
    if "delta" in params:
        assert params["delta"] == 1e-3


def test_unknown_algorithm():
    with pytest.raises(ValueError):
        make_leader("ucb")


def test_seeded_runs_are_identical():
    game = compromise_instance()

    def run(seed):
        leader = BlockHedgeLeader(random_state=seed).fit(game, 200)
        out = []
        for t in range(200):
            z = game.context_space.contexts[t % 4]
            x = leader.predict(z)
            leader.partial_fit(z, x, follower_action=follower_best_response(game, t % 2, z, x))
            out.append(x)
        return np.array(out)

    assert np.array_equal(run(3), run(3))
    assert not np.array_equal(run(3), run(4))


def test_refit_resets_state():
    olt = build_olt_instance()
    leader = GreedyLeader().fit(olt, 5)
    leader.partial_fit(Z, [1, 0], follower_type=0)
    leader.fit(olt, 5)
    assert leader.t_ == 0 and np.allclose(leader.type_distribution(), 0.5)
