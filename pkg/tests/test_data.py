"""Dataset loading, centering, sufficient statistics, splitting."""

import numpy as np
import pytest

from garrote.data import (
    CenteredDataset,
    DataError,
    Dataset,
    center,
    load_dataset,
    save_dataset,
    split,
    sufficient_stats,
)
from tests.conftest import random_dataset


class TestDataset:
    def test_shapes_and_properties(self):
        d = Dataset(x=np.ones((4, 3)), y=np.zeros(4))
        assert d.p == 4 and d.n == 3

    def test_rejects_mismatched_rows(self):
        with pytest.raises(DataError):
            Dataset(x=np.ones((4, 3)), y=np.zeros(5))

    def test_rejects_single_sample(self):
        with pytest.raises(DataError):
            Dataset(x=np.ones((1, 3)), y=np.zeros(1))

    def test_rejects_nonfinite(self):
        x = np.ones((3, 2))
        x[0, 0] = np.nan
        with pytest.raises(DataError):
            Dataset(x=x, y=np.zeros(3))

    def test_arrays_read_only(self):
        d = Dataset(x=np.ones((3, 2)), y=np.zeros(3))
        with pytest.raises(ValueError):
            d.x[0, 0] = 2.0


class TestCenter:
    def test_two_point_example(self):
        # [TRIVIAL] mean removal on x=[[1],[3]], y=[2,4]
        c = center(Dataset(x=np.array([[1.0], [3.0]]), y=np.array([2.0, 4.0])))
        assert np.allclose(c.x_c, [[-1.0], [1.0]])
        assert np.allclose(c.y_c, [-1.0, 1.0])
        assert np.allclose(c.x_mean, [2.0]) and c.y_mean == 3.0

    def test_idempotence(self, rng):
        # [TRIVIAL] already-centered data is unchanged
        c = center(random_dataset(rng, 8, 3))
        c2 = center(Dataset(x=c.x_c, y=c.y_c))
        assert np.allclose(c2.x_c, c.x_c) and np.allclose(c2.y_c, c.y_c)
        assert np.allclose(c2.x_mean, 0.0) and abs(c2.y_mean) < 1e-12

    def test_column_sums_vanish(self, rng):
        # [DERIVED] direct-summation oracle on a random 5x3 dataset
        c = center(random_dataset(rng, 5, 3))
        assert np.all(np.abs(c.x_c.sum(axis=0)) < 1e-12)
        assert abs(c.y_c.sum()) < 1e-12


class TestSufficientStats:
    def test_unit_two_point(self):
        # [TRIVIAL] x_c=[[1],[-1]], y_c=[1,-1] -> b=1, chi_diag=1, sigma_y2=1
        c = CenteredDataset(x_c=np.array([[1.0], [-1.0]]), y_c=np.array([1.0, -1.0]),
                            x_mean=np.zeros(1), y_mean=0.0)
        s = sufficient_stats(c, full_chi=True)
        assert np.allclose(s.b, [1.0])
        assert np.allclose(s.chi_diag, [1.0])
        assert s.sigma_y2 == pytest.approx(1.0)
        assert np.allclose(s.chi, [[1.0]])

    def test_zero_output(self):
        c = center(Dataset(x=np.arange(6.0).reshape(3, 2), y=np.full(3, 7.0)))
        s = sufficient_stats(c)
        assert np.allclose(s.b, 0.0) and s.sigma_y2 == 0.0

    def test_brute_force_moment_oracle(self, rng):
        # [DERIVED] naive double-loop moments on a random 10x4 instance
        c = center(random_dataset(rng, 10, 4))
        s = sufficient_stats(c, full_chi=True)
        p, n = c.p, c.n
        b_ref = np.zeros(n)
        chi_ref = np.zeros((n, n))
        for i in range(n):
            b_ref[i] = sum(c.x_c[mu, i] * c.y_c[mu] for mu in range(p)) / p
            for j in range(n):
                chi_ref[i, j] = sum(c.x_c[mu, i] * c.x_c[mu, j] for mu in range(p)) / p
        sig_ref = sum(v * v for v in c.y_c) / p
        assert np.allclose(s.b, b_ref, atol=1e-12)
        assert np.allclose(s.chi, chi_ref, atol=1e-12)
        assert np.allclose(np.diag(s.chi), s.chi_diag, atol=1e-12)
        assert s.sigma_y2 == pytest.approx(sig_ref, abs=1e-12)

    def test_mask_flags_constant_columns(self):
        x = np.column_stack([np.ones(5), np.arange(5.0)])
        c = center(Dataset(x=x, y=np.arange(5.0)))
        s = sufficient_stats(c)
        assert not s.mask[0] and s.mask[1]


class TestSplit:
    def test_partition(self, rng):
        d = random_dataset(rng, 100, 3)
        tr, va, te = split(d, 50, 50, 0, seed=1)
        assert tr.p == 50 and va.p == 50 and te is None
        rows = np.vstack([tr.x, va.x])
        assert rows.shape[0] == 100
        # disjoint cover: every original row appears exactly once
        orig = {tuple(r) for r in d.x}
        got = [tuple(r) for r in rows]
        assert set(got) == orig and len(got) == len(set(got))

    def test_determinism_and_seed_sensitivity(self, rng):
        d = random_dataset(rng, 40, 3)
        a1 = split(d, 20, 10, 10, seed=1)
        a2 = split(d, 20, 10, 10, seed=1)
        b = split(d, 20, 10, 10, seed=2)
        assert np.array_equal(a1[0].x, a2[0].x)
        assert not np.array_equal(a1[0].x, b[0].x)


class TestLoadSave:
    def test_round_trip(self, tmp_path, rng):
        d = random_dataset(rng, 7, 4)
        path = tmp_path / "d.csv"
        save_dataset(d, path)
        d2 = load_dataset(path)
        assert np.allclose(d.x, d2.x) and np.allclose(d.y, d2.y)

    def test_whitespace_delimited(self, tmp_path):
        path = tmp_path / "d.txt"
        path.write_text("# y x1\n1.0 2.0\n3.0 4.0\n")
        d = load_dataset(path)
        assert np.allclose(d.y, [1.0, 3.0]) and np.allclose(d.x, [[2.0], [4.0]])

    def test_empty_file_raises(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("")
        with pytest.raises(DataError):
            load_dataset(path)

    def test_garbage_raises(self, tmp_path):
        path = tmp_path / "g.csv"
        path.write_text("a,b,c\nnot,numbers,here\n")
        with pytest.raises(DataError):
            load_dataset(path)

    def test_single_column_raises(self, tmp_path):
        path = tmp_path / "s.csv"
        path.write_text("1.0\n2.0\n")
        with pytest.raises(DataError):
            load_dataset(path)
