import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardsample import ace, auc, ndcg_at_k
from hardsample.errors import ContractError


class TestAuc:
    def test_perfect_ranking(self):
        assert auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1]) == 1.0

    def test_inverted_ranking(self):
        assert auc([0.9, 0.8, 0.2, 0.1], [0, 0, 1, 1]) == 0.0

    def test_all_tied_gives_half(self):
        assert auc([0.5, 0.5, 0.5, 0.5], [0, 1, 0, 1]) == 0.5

    def test_hand_example(self):
        # scores 0.8(1), 0.6(0), 0.4(1), 0.2(0): 3 of 4 pairs ordered right
        assert auc([0.8, 0.6, 0.4, 0.2], [1, 0, 1, 0]) == pytest.approx(0.75)

    def test_single_class_rejected(self):
        with pytest.raises(ContractError):
            auc([0.1, 0.2], [1, 1])

    def test_monotone_transform_invariance(self):
        rng = np.random.default_rng(0)
        s = rng.normal(size=200)
        y = rng.integers(2, size=200)
        assert auc(s, y) == pytest.approx(auc(np.exp(s), y))
        assert auc(s, y) == pytest.approx(auc(3 * s - 7, y))

    @given(st.integers(min_value=0, max_value=2**31))
    @settings(max_examples=30, deadline=None)
    def test_matches_pair_counting(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 30))
        s = rng.choice([0.1, 0.3, 0.5, 0.7], size=n)
        y = rng.integers(2, size=n)
        if y.min() == y.max():
            return
        pos, neg = s[y == 1], s[y == 0]
        wins = (pos[:, None] > neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
        assert auc(s, y) == pytest.approx(wins / (len(pos) * len(neg)))


class TestNdcg:
    def test_positive_at_rank_one(self):
        mean, excl = ndcg_at_k(["a", "a"], [0.9, 0.1], [1, 0], k=2)
        assert mean == 1.0 and excl == 0

    def test_positive_at_rank_three(self):
        mean, _ = ndcg_at_k(["a"] * 3, [0.9, 0.8, 0.1], [0, 0, 1], k=3)
        assert mean == pytest.approx(1.0 / np.log2(4.0))

    def test_positive_below_cutoff_scores_zero(self):
        mean, _ = ndcg_at_k(["a"] * 3, [0.9, 0.8, 0.1], [0, 0, 1], k=2)
        assert mean == 0.0

    def test_users_without_positive_excluded(self):
        mean, excl = ndcg_at_k(["a", "a", "b", "b"], [0.9, 0.1, 0.9, 0.1],
                               [1, 0, 0, 0], k=2)
        assert mean == 1.0 and excl == 1

    def test_mean_over_users(self):
        mean, _ = ndcg_at_k(["a", "a", "b", "b"], [0.9, 0.1, 0.1, 0.9],
                            [1, 0, 1, 0], k=2)
        assert mean == pytest.approx((1.0 + 1.0 / np.log2(3.0)) / 2)

    def test_all_excluded_rejected(self):
        with pytest.raises(ContractError):
            ndcg_at_k(["a", "b"], [0.5, 0.5], [0, 0], k=1)

    def test_nondecreasing_in_k_with_single_positive(self):
        # with one positive per user the ideal score is fixed at 1, so a
        # larger cutoff can only help
        rng = np.random.default_rng(3)
        users, scores, labels = [], [], []
        for u in range(12):
            size = int(rng.integers(2, 10))
            y = np.zeros(size, dtype=int)
            y[rng.integers(size)] = 1
            users.extend([f"u{u}"] * size)
            scores.extend(rng.random(size))
            labels.extend(y)
        vals = [ndcg_at_k(users, scores, labels, k)[0] for k in range(1, 12)]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_stabilizes_once_cutoff_covers_all_records(self):
        rng = np.random.default_rng(4)
        users = rng.integers(6, size=80).astype(str)
        scores = rng.random(80)
        labels = rng.integers(2, size=80)
        assert ndcg_at_k(users, scores, labels, 80)[0] == \
            pytest.approx(ndcg_at_k(users, scores, labels, 500)[0])

    def test_bounded_by_one(self):
        rng = np.random.default_rng(5)
        users = rng.integers(5, size=60).astype(str)
        mean, _ = ndcg_at_k(users, rng.random(60), rng.integers(2, size=60), 5)
        assert 0.0 <= mean <= 1.0


class TestAce:
    def test_perfectly_calibrated_constant(self):
        # scores equal the base rate in every bin
        scores = np.full(30, 0.5)
        labels = np.tile([0, 1], 15)
        assert ace(scores, labels, n_bins=3) == pytest.approx(0.0)

    def test_two_singleton_bins(self):
        assert ace([0.0, 1.0], [1, 0], n_bins=2) == pytest.approx(1.0)

    def test_remainder_goes_to_low_bins(self):
        # 5 records, 2 bins -> sizes (3, 2) by sorted score
        scores = np.array([0.1, 0.2, 0.3, 0.8, 0.9])
        labels = np.array([0, 0, 0, 1, 1])
        low = abs(0.0 - np.mean([0.1, 0.2, 0.3]))
        high = abs(1.0 - np.mean([0.8, 0.9]))
        assert ace(scores, labels, n_bins=2) == pytest.approx((low + high) / 2)

    def test_too_few_records_rejected(self):
        with pytest.raises(ContractError):
            ace([0.5] * 3, [1, 0, 1], n_bins=4)

    def test_calibrated_sigmoid_scores_near_zero(self):
        rng = np.random.default_rng(11)
        p = 1.0 / (1.0 + np.exp(-rng.normal(size=100_000)))
        y = (rng.random(100_000) < p).astype(int)
        assert ace(p, y) <= 0.01

    def test_shifted_scores_show_the_gap(self):
        rng = np.random.default_rng(12)
        p = 1.0 / (1.0 + np.exp(-rng.normal(size=50_000)))
        y = (rng.random(50_000) < p).astype(int)
        shifted = np.clip(p + 0.2, 0.0, 1.0)
        assert ace(shifted, y) >= 0.15
