"""Monte-Carlo properties of the consensus simulator. The acceptance suite
reruns the recall bound at 10,000 trials; here smaller counts keep the
regular suite quick while still checking against 2-standard-error bands."""
from __future__ import annotations

import math

import pytest

from rwm.consensus import (
    CSV_HEADER,
    SimulationResult,
    simulate_consensus,
    support_quorum,
    write_simulation_csv,
)

TRIALS = 2500


def two_se(p: float, n: int) -> float:
    return 2 * math.sqrt(p * (1 - p) / n)


@pytest.mark.parametrize("k_agents,hit_rate", [(1, 0.3), (3, 0.3), (5, 0.3), (5, 0.5)])
def test_recall_matches_independent_agent_bound(k_agents, hit_rate):
    expected = 1 - (1 - hit_rate) ** k_agents
    result = simulate_consensus(k_agents, hit_rate, TRIALS, seed=7)
    assert abs(result.recall - expected) <= two_se(expected, TRIALS)


def test_mean_surviving_non_increasing_in_team_size():
    surviving = [simulate_consensus(k, 0.3, 1500, seed=5).mean_surviving
                 for k in (1, 3, 5, 7)]
    assert all(a >= b for a, b in zip(surviving, surviving[1:]))


def test_support_quorum_schedule():
    assert [support_quorum(k) for k in (1, 2, 3, 4, 5, 6, 7)] == [1, 2, 2, 2, 3, 3, 4]


def test_same_seed_is_bit_reproducible():
    a = simulate_consensus(3, 0.4, 300, seed=42)
    b = simulate_consensus(3, 0.4, 300, seed=42)
    assert a == b
    c = simulate_consensus(3, 0.4, 300, seed=43)
    assert a != c


def test_precision_counts_only_aligned_survivors():
    # with zero noise every survivor is the planted gap
    result = simulate_consensus(3, 0.5, 500, seed=9, noise_rate=0.0)
    assert result.precision in (0.0, 1.0)
    if result.mean_surviving > 0:
        assert result.precision == 1.0


def test_simulation_csv_format(tmp_path):
    results = [simulate_consensus(1, 0.3, 50, seed=1)]
    path = tmp_path / "sim.csv"
    write_simulation_csv(results, path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    fields = lines[1].split(",")
    assert fields[0] == "1" and fields[3] == "50"
    assert 0.0 <= float(fields[4]) <= 1.0
