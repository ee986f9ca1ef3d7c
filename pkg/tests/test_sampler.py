"""Sampler tests: binning, schedules, the TD update, persistence, and
convergence on the toy MDP (full 10-seed sweep lives in acceptance)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import pytest

import toy_mdp
from rearguard.sampler import (
    BLINK,
    SKIP,
    QTable,
    SamplerConfig,
    SamplerState,
    SarsaSampler,
    bin_index,
    choose_action,
    epsilon,
    greedy_action,
    load_qtable,
    observe_state,
    reward,
    sarsa_update,
    save_qtable,
)

CFG = SamplerConfig()


@dataclass
class Snap:
    confidence: float
    range: float


# ----------------------------------------------------------------- states

def test_bin_edge_goes_to_higher_bin():
    assert bin_index(0.02, CFG.conf_edges) == 1
    assert bin_index(0.1, CFG.conf_edges) == 2
    assert bin_index(0.019, CFG.conf_edges) == 0
    assert bin_index(0.6, CFG.conf_edges) == 3


def test_observe_state_empty():
    s = observe_state([], 0.05, 0.0, CFG)
    assert s == SamplerState(CFG.no_tracks_bin, 3, 0)


def test_observe_state_uses_lowest_confidence_track():
    snaps = [Snap(0.4, 8.0), Snap(0.03, 18.0)]
    s = observe_state(snaps, 1.0, 0.7, CFG)
    assert s.conf_bin == 1      # 0.03 in (0.02, 0.1]
    assert s.dist_bin == 2      # 18 m in (10, 20]
    assert s.dt_bin == 1        # 0.3 s in (0.2, 0.5]


def test_observe_state_rejects_backwards_time():
    with pytest.raises(ValueError):
        observe_state([], 0.0, 1.0, CFG)


# -------------------------------------------------------------- schedules

def test_epsilon_schedule_values():
    assert epsilon(SamplerConfig(eta=0.1), 0) == 1.0
    assert epsilon(SamplerConfig(eta=0.1), 90) == pytest.approx(0.1)


def test_epsilon_strictly_decreasing_and_diverging():
    cfg = SamplerConfig(eta=0.1)
    eps = np.array([epsilon(cfg, t) for t in range(0, 1000)])
    assert np.all(np.diff(eps) < 0)
    # harmonic-like divergence: partial sum stays close to the log integral
    t = np.arange(1, 10**6 + 1, dtype=float)
    partial = float(np.sum(cfg.epsilon0 / (1.0 + cfg.eta * t)))
    bound = 0.99 * cfg.epsilon0 * math.log(1.0 + cfg.eta * 10**6) / cfg.eta
    assert partial > bound


def test_choose_action_pure_exploitation():
    q = QTable(tick=10**9)     # epsilon effectively zero
    s = SamplerState(1, 0, 0)
    q.values[(s, SKIP)] = 0.2
    q.values[(s, BLINK)] = 0.7
    rng = np.random.default_rng(0)
    assert choose_action(q, s, rng, CFG) == BLINK


def test_greedy_tie_prefers_blink():
    q = QTable()
    assert greedy_action(q, SamplerState(0, 0, 0)) == BLINK


def test_choose_action_explores_at_start():
    q = QTable()   # tick 0, epsilon = 1: every action is a coin flip
    s = SamplerState(1, 0, 0)
    q.values[(s, SKIP)] = 100.0
    rng = np.random.default_rng(1)
    picks = {choose_action(q, s, rng, CFG) for _ in range(50)}
    assert picks == {SKIP, BLINK}


# ----------------------------------------------------------------- update

def test_reward_formula():
    assert reward(1, 0.2, -0.05) == pytest.approx(0.15)
    assert reward(0, 0.0, -0.05) == 0.0
    assert reward(1, 0.0, -0.05) == -0.05


def test_sarsa_first_visit_adopts_target():
    q = QTable()
    s, s2 = SamplerState(0, 0, 0), SamplerState(1, 0, 0)
    sarsa_update(q, s, SKIP, 1.0, s2, SKIP, 0.9)
    assert q.values[(s, SKIP)] == 1.0
    assert q.visits[(s, SKIP)] == 1
    assert q.tick == 1


def test_sarsa_zero_everything_is_fixed_point():
    q = QTable()
    s = SamplerState(0, 0, 0)
    sarsa_update(q, s, SKIP, 0.0, s, SKIP, 0.9)
    assert q.values[(s, SKIP)] == 0.0


def test_sarsa_second_visit_hand_value():
    q = QTable()
    s, s2 = SamplerState(0, 0, 0), SamplerState(1, 0, 0)
    q.values[(s, BLINK)] = 1.0
    q.visits[(s, BLINK)] = 1
    q.values[(s2, SKIP)] = 1.0
    sarsa_update(q, s, BLINK, 0.0, s2, SKIP, 0.9)
    # 1 + (1/2)(0 + 0.9*1 - 1) = 0.95
    assert q.values[(s, BLINK)] == pytest.approx(0.95)
    assert q.visits[(s, BLINK)] == 2


def test_sarsa_leaves_other_entries_alone():
    q = QTable()
    s, other = SamplerState(0, 0, 0), SamplerState(2, 2, 2)
    q.values[(other, SKIP)] = 5.0
    sarsa_update(q, s, SKIP, 1.0, s, SKIP, 0.9)
    assert q.values[(other, SKIP)] == 5.0
    assert (other, SKIP) not in q.visits


def test_visit_counts_equal_update_calls():
    q = QTable()
    s = SamplerState(0, 0, 0)
    for _ in range(7):
        sarsa_update(q, s, SKIP, 0.1, s, SKIP, 0.9)
    assert q.visits[(s, SKIP)] == 7
    assert q.tick == 7


# ------------------------------------------------------------ persistence

def test_qtable_roundtrip_bit_exact(tmp_path):
    rng = np.random.default_rng(2)
    q = QTable(tick=4321)
    for cb in range(5):
        for a in (SKIP, BLINK):
            key = (SamplerState(cb, int(rng.integers(0, 4)), int(rng.integers(0, 4))), a)
            q.values[key] = float(rng.normal() * 10.0 ** rng.integers(-8, 3))
            q.visits[key] = int(rng.integers(0, 10**6))
    path = tmp_path / "q.txt"
    save_qtable(q, path)
    q2 = load_qtable(path)
    assert q2.values == q.values
    assert q2.visits == q.visits
    assert q2.tick == q.tick
    # and a second save is byte-identical
    path2 = tmp_path / "q2.txt"
    save_qtable(q2, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_qtable_load_rejects_foreign_file(tmp_path):
    path = tmp_path / "junk.txt"
    path.write_text("something else\n")
    with pytest.raises(ValueError):
        load_qtable(path)


# ----------------------------------------------------------- agent loop

def _scripted_snaps(i):
    if i % 7 < 3:
        return []
    return [Snap(confidence=1.0 / (1 + i % 11), range=4.0 + (i % 5) * 6.0)]


def test_agent_is_deterministic_given_seed():
    seqs = []
    for _ in range(2):
        agent = SarsaSampler(CFG, np.random.default_rng(99))
        seqs.append([agent.decide(_scripted_snaps(i), i * 0.1) for i in range(300)])
    assert seqs[0] == seqs[1]
    assert any(seqs[0])


def test_forced_blink_valve():
    cfg = SamplerConfig(dt_max=0.3)
    agent = SarsaSampler(cfg, np.random.default_rng(5), qtable=QTable(tick=10**9))
    # teach the table to always skip; the valve must still fire
    for cb in range(cfg.no_tracks_bin + 1):
        for db in range(4):
            for tb in range(4):
                s = SamplerState(cb, db, tb)
                agent.q.values[(s, SKIP)] = 10.0
                agent.q.values[(s, BLINK)] = -10.0
    gaps = []
    last = 0.0
    for i in range(1, 60):
        now = i * 0.1
        if agent.decide([], now):
            gaps.append(now - last)
            last = now
    assert gaps, "valve never fired"
    assert max(gaps) <= cfg.dt_max + 0.1001


# ----------------------------------------------------------- convergence

def test_toy_mdp_converges_to_value_iteration():
    q_star = toy_mdp.value_iteration(toy_mdp.TOY_CONFIG.beta)
    # sanity on the oracle itself: optimal policy is skip/skip/blink
    assert q_star[(toy_mdp.EMPTY, SKIP)] > q_star[(toy_mdp.EMPTY, BLINK)]
    assert q_star[(toy_mdp.GOOD, SKIP)] > q_star[(toy_mdp.GOOD, BLINK)]
    assert q_star[(toy_mdp.STALE, BLINK)] > q_star[(toy_mdp.STALE, SKIP)]

    for seed in (0, 1, 2):
        q = toy_mdp.run_sarsa(50_000, seed)
        err = max(abs(q.get(s, a) - q_star[(s, a)]) for s, a in q_star)
        assert err <= 0.05, f"seed {seed}: max Q error {err:.4f}"
        for s in toy_mdp.STATES:
            want = max((SKIP, BLINK), key=lambda a: q_star[(s, a)])
            assert greedy_action(q, s) == want, f"seed {seed}"


def test_trained_policy_behaviors():
    q = toy_mdp.run_sarsa(50_000, 7)
    # low-confidence object at 4 m: blink
    assert greedy_action(q, toy_mdp.STALE) == BLINK
    # idle with no tracks right after a blink: skip nearly always
    rng = np.random.default_rng(11)
    skips = sum(
        1 for _ in range(100) if choose_action(q, toy_mdp.EMPTY, rng, toy_mdp.TOY_CONFIG) == SKIP
    )
    assert skips > 80
