import math

import numpy as np
import pytest

from razorkit.shapley import (
    Attribution,
    CoalitionalGame,
    additive_game,
    check_relaxed_topk_efficiency,
    coverage_game,
    exact_shapley,
    is_monotone,
    is_submodular,
    read_game_table,
    topk_shapley,
    xor_entropy_game,
)


def random_coverage_game(rng, max_players=8, universe=8):
    n = int(rng.integers(2, max_players + 1))
    covers = [
        [e for e in range(universe) if rng.random() < 0.4] for _ in range(n)
    ]
    return coverage_game(covers, universe)


class TestGameEngine:
    def test_empty_set_must_be_zero(self):
        with pytest.raises(ValueError, match="empty set"):
            CoalitionalGame(2, lambda s: 1.0)

    def test_memo_serves_repeats_without_counting(self):
        calls = []
        game = CoalitionalGame(3, lambda s: calls.append(s) or float(len(s)))
        before = game.evaluation_count
        game.value([0, 2])
        game.value([2, 0])
        game.value(0b101)
        assert game.evaluation_count == before + 1
        assert calls.count(frozenset({0, 2})) == 1

    def test_accepts_bitmask_and_iterable(self):
        game = additive_game([1.0, 2.0, 4.0])
        assert game.value(0b110) == game.value([1, 2]) == 6.0

    def test_rejects_out_of_range(self):
        game = additive_game([1.0, 2.0])
        with pytest.raises(ValueError):
            game.value([5])
        with pytest.raises(ValueError):
            game.value(0b1000)


class TestExactShapley:
    def test_additive_game(self):
        phi = exact_shapley(additive_game([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(phi, [1.0, 2.0, 3.0], atol=1e-12)

    def test_glove_game(self):
        game = CoalitionalGame(2, lambda s: 1.0 if len(s) == 2 else 0.0)
        np.testing.assert_allclose(exact_shapley(game), [0.5, 0.5], atol=1e-15)

    def test_symmetric_players_equal(self):
        game = coverage_game([[0, 1], [0, 1], [2]], universe_size=3)
        phi = exact_shapley(game)
        assert abs(phi[0] - phi[1]) <= 1e-12

    def test_large_n_rejected(self):
        game = CoalitionalGame(13, lambda s: float(len(s)))
        with pytest.raises(ValueError, match="exceeds"):
            exact_shapley(game)

    def test_null_player_gets_zero(self):
        game = coverage_game([[0, 1], [2], []], universe_size=3)
        assert exact_shapley(game)[2] == pytest.approx(0.0, abs=1e-15)


class TestTopkShapley:
    def test_additive_greedy_trace(self):
        att = topk_shapley(additive_game([1.0, 2.0, 3.0]))
        assert att.sigma == (2, 1, 0)
        np.testing.assert_allclose(att.phi, [1.0, 2.0, 3.0], atol=1e-15)

    def test_coverage_hand_trace(self):
        """Sets {a,b}, {b,c}, {c}: picks 0 (gain 2), 1 (gain 1), 2 (gain 0)."""
        game = coverage_game([[0, 1], [1, 2], [2]], universe_size=3)
        att = topk_shapley(game)
        assert att.sigma == (0, 1, 2)
        np.testing.assert_allclose(att.phi, [2.0, 1.0, 0.0])

    def test_null_player_gets_zero(self):
        game = coverage_game([[0, 1], [2], []], universe_size=3)
        assert topk_shapley(game).phi[2] == 0.0

    def test_efficiency_telescopes_exactly(self):
        rng = np.random.default_rng(60)
        for _ in range(30):
            game = random_coverage_game(rng)
            att = topk_shapley(game)
            assert abs(att.phi.sum() - game.value(game.full_mask)) <= 1e-12

    def test_ties_break_to_smallest_index(self):
        game = coverage_game([[0], [0], [0]], universe_size=1)
        att = topk_shapley(game)
        assert att.sigma == (0, 1, 2)
        np.testing.assert_array_equal(att.phi, [1.0, 0.0, 0.0])

    def test_symmetric_phi_multiset_invariant_under_swap(self):
        covers = [[0, 1], [0, 1], [1, 2], [3]]
        game = topk_shapley(coverage_game(covers, 4))
        swapped_covers = [covers[1], covers[0]] + covers[2:]
        swapped = topk_shapley(coverage_game(swapped_covers, 4))
        assert sorted(game.phi) == sorted(swapped.phi)

    def test_negative_gains_are_reported(self):
        game = CoalitionalGame(2, lambda s: {0: 0.0, 1: 1.0, 2: 2.0, 3: 0.5}[
            sum(1 << i for i in s)
        ])
        att = topk_shapley(game)
        assert att.sigma == (1, 0)
        np.testing.assert_allclose(att.phi, [-1.5, 2.0])
        assert att.phi.sum() == pytest.approx(game.value(0b11))


class TestPropertyCheckers:
    def test_coverage_is_monotone_submodular(self):
        rng = np.random.default_rng(61)
        for _ in range(20):
            game = random_coverage_game(rng, max_players=6, universe=6)
            assert is_monotone(game)
            assert is_submodular(game)

    def test_additive_is_submodular_with_equality(self):
        assert is_submodular(additive_game([3.0, 1.0, 2.0]))

    def test_xor_entropy_game_is_not_submodular(self):
        game = xor_entropy_game()
        assert not is_submodular(game)
        assert is_monotone(game)

    def test_xor_entropy_game_values(self):
        game = xor_entropy_game()
        assert game.value([0]) == pytest.approx(0.0, abs=1e-12)
        assert game.value([1]) == pytest.approx(0.0, abs=1e-12)
        assert game.value([0, 1]) == pytest.approx(math.log(2))

    def test_detects_non_monotone(self):
        game = CoalitionalGame(2, lambda s: -float(len(s)))
        assert not is_monotone(game)

    def test_relaxed_efficiency_on_coverage_games(self):
        rng = np.random.default_rng(62)
        for _ in range(40):
            game = random_coverage_game(rng)
            att = topk_shapley(game)
            assert check_relaxed_topk_efficiency(game, att)

    def test_relaxed_efficiency_catches_wrong_attribution(self):
        game = coverage_game([[0, 1], [1, 2], [2]], universe_size=3)
        bogus = Attribution(phi=np.zeros(3), sigma=(0, 1, 2))
        assert not check_relaxed_topk_efficiency(game, bogus)


class TestEvaluationCount:
    def test_small_bounds(self):
        game = additive_game([1.0, 2.0, 3.0])
        topk_shapley(game)
        assert game.evaluation_count <= 3 * 4 // 2 + 1
        single = additive_game([1.0])
        topk_shapley(single)
        assert single.evaluation_count <= 2

    def test_quadratic_growth(self):
        counts = {}
        for n in (8, 16, 32):
            game = CoalitionalGame(n, lambda s: float(len(s)))
            topk_shapley(game)
            counts[n] = game.evaluation_count
            assert counts[n] <= n * (n + 1) // 2 + 1
        assert 3.4 <= counts[16] / counts[8] <= 4.1
        assert 3.4 <= counts[32] / counts[16] <= 4.1


class TestGameTable:
    def test_reads_table_and_attributes(self, tmp_path):
        path = tmp_path / "game.txt"
        path.write_text("# glove\n0 0\n1 0\n2 0\n3 1\n")
        game = read_game_table(path)
        np.testing.assert_allclose(exact_shapley(game), [0.5, 0.5])

    def test_missing_subset_rejected(self, tmp_path):
        path = tmp_path / "game.txt"
        path.write_text("0 0\n3 1\n")
        with pytest.raises(ValueError, match="missing"):
            read_game_table(path)
