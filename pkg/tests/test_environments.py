from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ctxstackelberg import ConfigurationError, Context, GreedyLeader
from ctxstackelberg.environments import (AdaptiveContexts, AdaptiveFollowers, ContextSequence, Environment,
                                         FollowerSequence, StochasticContexts, StochasticFollowers,
                                         ThresholdAdversary, build_olt_instance, make_environment,
                                         oblivious_follower_sequence, olt_environment)
from ctxstackelberg.game import follower_best_response
from ctxstackelberg.harness import run_episode
from ctxstackelberg.instances import mirrored_instance

ZA, ZB = Context.labelled("a"), Context.labelled("b")


def step(env, x=(1.0, 0.0)):
    z = env.next_context()
    return z, env.next_follower(x)


def test_sequence_sources():
    env = Environment(ContextSequence([ZA, ZB]), FollowerSequence([0, 1, 0]), n_types=2).reset(0)
    assert step(env) == (ZA, 0)
    assert step(env) == (ZB, 1)
    with pytest.raises(IndexError):
        env.next_context()


def test_stochastic_context_frequencies():
    src = StochasticContexts(contexts=[ZA, ZB])
    src.reset(np.random.default_rng(0))
    n = 100_000
    freq = sum(src.next(t, None) == ZA for t in range(n)) / n
    assert abs(freq - 0.5) <= 3 * 0.5 / np.sqrt(n)


def test_degenerate_stochastic_follower():
    src = StochasticFollowers([1.0, 0.0])
    src.reset(np.random.default_rng(0))
    assert {src.next(t, None) for t in range(200)} == {0}


def test_alternating_follower_sequence():
    env = Environment(ContextSequence([ZA] * 6), FollowerSequence([0, 1] * 3)).reset(0)
    assert [step(env)[1] for _ in range(6)] == [0, 1, 0, 1, 0, 1]


def test_invalid_distributions():
    with pytest.raises(ConfigurationError):
        StochasticFollowers([0.5, 0.6])
    with pytest.raises(ConfigurationError):
        StochasticContexts(contexts=[ZA], probs=[0.3])


def test_follower_before_context_is_an_error():
    env = Environment(ContextSequence([ZA]), FollowerSequence([0])).reset(0)
    with pytest.raises(RuntimeError):
        env.next_follower([1.0, 0.0])


def test_adaptive_follower_never_sees_current_context():
    seen = []

    def follower(view):
        seen.append(view)
        return len(view.past_contexts) % 2

    env = Environment(StochasticContexts(contexts=[ZA, ZB]), AdaptiveFollowers(follower), n_types=2).reset(1)
    contexts = [step(env)[0] for _ in range(5)]
    for t, view in enumerate(seen):
        assert view.context is None and view.strategy is None
        assert list(view.past_contexts) == contexts[:t]
    assert all("context" not in fields and "strategy" not in fields for _, _, fields in env.audit_log)
    assert len(env.audit_log) == 5


def test_adaptive_context_source_gets_history_only():
    views = []

    def ctx(view):
        views.append(view)
        return ZA

    env = Environment(AdaptiveContexts(ctx), FollowerSequence([1, 0, 1])).reset(0, learner_id="me")
    for _ in range(3):
        step(env, (0.25, 0.75))
    assert views[2].past_types == (1, 0)
    assert views[2].past_strategies == ((0.25, 0.75),) * 2
    assert views[0].learner_id == "me"
    assert not hasattr(views[0], "strategy")


def test_preset_firewall_in_adversarial_follower_scenario():
    game = mirrored_instance()
    env = make_environment("stoch-context-adv-follower", game, 30, rng=0)
    run_episode(game, env, GreedyLeader(), 30, np.random.default_rng(0), 0)
    follower_calls = [f for kind, _, f in env.audit_log if kind == "follower"]
    assert len(follower_calls) == 30
    assert all("context" not in f and "strategy" not in f for f in follower_calls)


def test_rotation_preset_cycles_eight_contexts():
    game = mirrored_instance(n_contexts=8)
    env = make_environment("stoch-follower-adv-context", game, 20).reset(0)
    labels = [step(env)[0].label for _ in range(20)]
    assert labels[:8] == [f"c{j}" for j in range(8)] and labels[8:16] == labels[:8]


def test_oblivious_sequence_is_fixed_up_front():
    a = oblivious_follower_sequence(2, 500, np.random.default_rng(3))
    b = oblivious_follower_sequence(2, 500, np.random.default_rng(3))
    assert np.array_equal(a, b)
    assert set(a) <= {0, 1}
    c = oblivious_follower_sequence(3, 3000, np.random.default_rng(0))
    assert set(c) == {0, 1, 2}


def test_unknown_scenario():
    with pytest.raises(ConfigurationError):
        make_environment("chaos", mirrored_instance(), 10)
    with pytest.raises(ConfigurationError):
        make_environment("olt-lower-bound", mirrored_instance(), 10)


# ---------------------------------------------------------------- threshold adversary

def test_first_context_is_midpoint():
    adv = ThresholdAdversary()
    assert adv.context().label == "1/2" and adv.context().vector == (0.5,)


def test_boundary_probability_labels_negative():
    adv = ThresholdAdversary()
    assert adv.label(0.5) == -1
    assert (adv.lo, adv.hi) == (Fraction(1, 2), Fraction(1))


def test_confident_first_action_is_punished():
    olt = build_olt_instance()
    env = olt_environment().reset(0)
    z = env.next_context()
    i = env.next_follower([0.9, 0.1])
    x = np.array([0.9, 0.1])
    utility = x @ olt.leader_matrix(z)[:, follower_best_response(olt, i, z, x)]
    assert utility == pytest.approx(0.1)


def test_olt_type_tracks_label():
    adv = ThresholdAdversary()
    env = olt_environment(adv).reset(0)
    env.next_context()
    assert env.next_follower([0.2, 0.8]) == 0 and adv.history[-1][1] == +1
    env.next_context()
    assert env.next_follower([0.7, 0.3]) == 1 and adv.history[-1][1] == -1


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=200))
def test_olt_consistency_and_utility_cap(gs):
    olt = build_olt_instance()
    adv = ThresholdAdversary()
    env = olt_environment(adv).reset(0)
    threshold = []
    for g in gs:
        z = env.next_context()
        x = np.array([g, 1 - g])
        i = env.next_follower(x)
        u = x @ olt.leader_matrix(z)[:, follower_best_response(olt, i, z, x)]
        assert u <= 0.5 + 1e-12
        threshold.append(z)
    assert adv.consistent()
    policy = adv.threshold_policy()
    for (w, y), z in zip(adv.history, threshold):
        x = policy(z)
        assert x[0] == (1.0 if y == +1 else 0.0)
        i = 0 if y == +1 else 1
        assert x @ olt.leader_matrix(z)[:, follower_best_response(olt, i, z, x)] == 1.0


def test_olt_reset_restarts_interval():
    adv = ThresholdAdversary()
    env = olt_environment(adv).reset(0)
    step(env, (0.9, 0.1))
    env.reset(0)
    assert (adv.lo, adv.hi) == (0, 1) and adv.history == []
