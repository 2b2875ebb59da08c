import numpy as np
from django.test import SimpleTestCase

from market.exceptions import DataError, NonPositivePriceError
from market.returns import log_returns, nonlog_transform, portfolio_returns, prepare_windows


def sample_returns(T=100, d=3, seed=0):
    return np.random.default_rng(seed).normal(0.001, 0.02, size=(T, d))


class LogReturnTests(SimpleTestCase):
    def test_constant_prices(self):
        np.testing.assert_array_equal(log_returns(np.full((4, 2), 7.5)), np.zeros((3, 2)))

    def test_doubling(self):
        self.assertAlmostEqual(log_returns(np.array([[1.0], [2.0]]))[0, 0], np.log(2.0), places=15)

    def test_reconstruction(self):
        prices = np.exp(np.cumsum(sample_returns(), axis=0)) * 40.0

        rebuilt = prices[0] * np.exp(np.vstack([np.zeros(3), np.cumsum(log_returns(prices), axis=0)]))

        np.testing.assert_allclose(rebuilt, prices, rtol=1e-10)

    def test_non_positive_price_names_cell(self):
        prices = np.ones((3, 2))
        prices[2, 1] = -1.0

        with self.assertRaises(NonPositivePriceError) as raised:
            log_returns(prices, columns=["A", "B"])

        self.assertEqual((raised.exception.row, raised.exception.column), (2, "B"))


class NonlogTests(SimpleTestCase):
    def test_values(self):
        self.assertEqual(nonlog_transform(0.0), 0.0)
        self.assertAlmostEqual(nonlog_transform(np.log(2.0)), 1.0, places=15)

    def test_inverse(self):
        r = sample_returns()

        np.testing.assert_allclose(np.log1p(nonlog_transform(r)), r, atol=1e-12)

    def test_portfolio(self):
        self.assertEqual(portfolio_returns(np.zeros((5, 3))).tolist(), [0.0] * 5)
        self.assertAlmostEqual(portfolio_returns(np.array([[np.log(2.0), 0.0]]))[0], 0.5, places=15)
        r = sample_returns()
        np.testing.assert_allclose(portfolio_returns(r), nonlog_transform(r).mean(axis=1), atol=1e-12)


class PrepareWindowsTests(SimpleTestCase):
    def test_window_count(self):
        batch = prepare_windows(sample_returns(T=100), window=21)

        self.assertEqual(batch.windows.shape, (79, 21, 3))

    def test_windows_slide_by_one_row(self):
        batch = prepare_windows(sample_returns(T=40), window=5)

        np.testing.assert_array_equal(batch.windows[3], batch.standardized[3:8])
        np.testing.assert_array_equal(batch.windows[4, :-1], batch.windows[3, 1:])

    def test_training_rows_are_standardized(self):
        batch = prepare_windows(sample_returns(T=300), window=21)
        training = batch.standardized[:batch.train_rows]

        np.testing.assert_allclose(training.mean(axis=0), 0.0, atol=1e-10)
        np.testing.assert_allclose(training.std(axis=0), 1.0, atol=1e-10)

    def test_split_proportion(self):
        batch = prepare_windows(sample_returns(T=1000), window=21, train_frac=0.66)

        self.assertLess(abs(batch.n_train / len(batch) - 0.66), 0.01)
        self.assertEqual(len(batch.train_windows) + len(batch.test_windows), len(batch))

    def test_statistics_ignore_test_rows(self):
        returns = sample_returns(T=200)
        batch = prepare_windows(returns)
        perturbed = returns.copy()
        perturbed[batch.train_rows:] += 5.0

        other = prepare_windows(perturbed)

        np.testing.assert_array_equal(batch.mean, other.mean)
        np.testing.assert_array_equal(batch.std, other.std)

    def test_round_trip_standardization(self):
        returns = sample_returns()
        batch = prepare_windows(returns)

        np.testing.assert_allclose(batch.destandardize(batch.standardize(returns)), returns, atol=1e-15)

    def test_too_short_series(self):
        with self.assertRaises(DataError):
            prepare_windows(sample_returns(T=21), window=21)

    def test_constant_column(self):
        returns = sample_returns()
        returns[:, 1] = 0.01

        with self.assertRaises(DataError):
            prepare_windows(returns)
