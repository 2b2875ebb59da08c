import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from nncore.autograd import Tensor
from nncore.distributions import LOG_2PI, GaussianDiag, GaussianRank1
from nncore.exceptions import ShapeError
from nncore.gradcheck import check_gradients

st_small = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
st_scale = st.floats(min_value=0.1, max_value=3.0, allow_nan=False)


def sample_diag(**params):
    defaults = {"mean": np.zeros(2), "std": np.ones(2)}
    defaults.update(params)
    return GaussianDiag(**defaults)


def sample_rank1(**params):
    defaults = {
        "mean": np.zeros(2),
        "diag": np.ones(2),
        "perturb": np.array([1.0, 1.0]),
    }
    defaults.update(params)
    return GaussianRank1(**defaults)


def dense_logpdf(mean, covariance, x):
    delta = x - mean
    _, log_det = np.linalg.slogdet(covariance)
    return -0.5 * (len(x) * LOG_2PI + log_det + delta @ np.linalg.inv(covariance) @ delta)


class GaussianDiagTests(SimpleTestCase):
    def test_zero_std_returns_mean(self):
        dist = sample_diag(mean=np.array([1.5, -2.0]), std=np.zeros(2))

        sample = dist.sample(np.random.default_rng(0))

        np.testing.assert_array_equal(sample.data, [1.5, -2.0])

    def test_sample_moments(self):
        dist = sample_diag(mean=np.zeros(1), std=np.ones(1))

        draws = dist.sample(np.random.default_rng(1), sample_shape=(100000,)).data

        self.assertLess(abs(draws.mean()), 0.02)
        self.assertLess(abs(draws.var() - 1.0), 0.05)

    def test_sample_gradient_wrt_mean_is_identity(self):
        mean = Tensor(np.array([0.3, -0.1, 2.0]), requires_grad=True, name="mean")
        noise = np.random.default_rng(2).standard_normal(3)

        def loss():
            return (GaussianDiag(mean, np.full(3, 0.5)).sample(noise=noise) * np.array([1.0, 2.0, 3.0])).sum()

        check_gradients(loss, [("mean", mean)])

        np.testing.assert_allclose(mean.grad, [1.0, 2.0, 3.0])

    def test_standard_normal_mode(self):
        dist = sample_diag(mean=np.zeros(1), std=np.ones(1))

        self.assertAlmostEqual(dist.log_prob(np.zeros(1)).item(), -0.5 * np.log(2 * np.pi), places=12)
        self.assertAlmostEqual(dist.log_prob(np.zeros(1)).item(), -0.9189385332, places=9)

    def test_independent_dimensions_add(self):
        self.assertAlmostEqual(sample_diag().log_prob(np.zeros(2)).item(), -np.log(2 * np.pi), places=12)

    def test_density_integrates_to_one(self):
        dist = sample_diag(mean=np.array([0.4]), std=np.array([0.7]))
        grid = np.arange(-10.0, 10.0, 1e-3)

        density = np.exp(dist.log_prob(grid[:, None]).data)

        self.assertLess(abs(density.sum() * 1e-3 - 1.0), 1e-3)

    def test_non_positive_std_rejected(self):
        with self.assertRaises(ValueError):
            sample_diag(std=np.array([1.0, 0.0])).log_prob(np.zeros(2))

    def test_batched_log_prob_reduces_last_axis(self):
        dist = sample_diag(mean=np.zeros((4, 2)), std=np.ones((4, 2)))

        self.assertEqual(dist.log_prob(np.zeros((4, 2))).shape, (4,))


class KlDivergenceTests(SimpleTestCase):
    def test_identical_distributions(self):
        q = sample_diag(mean=np.array([0.2, -1.0]), std=np.array([0.5, 2.0]))

        self.assertEqual(q.kl(q).item(), 0.0)

    def test_unit_mean_shift(self):
        q = sample_diag(mean=np.ones(1), std=np.ones(1))
        p = sample_diag(mean=np.zeros(1), std=np.ones(1))

        self.assertAlmostEqual(q.kl(p).item(), 0.5, places=12)

    def test_matches_monte_carlo(self):
        q = sample_diag(mean=np.array([0.5, -0.3]), std=np.array([0.8, 1.4]))
        p = sample_diag(mean=np.array([-0.2, 0.1]), std=np.array([1.1, 0.9]))

        draws = q.sample(np.random.default_rng(3), sample_shape=(100000,))
        log_ratio = q.log_prob(draws).data - p.log_prob(draws).data
        standard_error = log_ratio.std() / np.sqrt(log_ratio.size)

        self.assertLess(abs(log_ratio.mean() - q.kl(p).item()), 3 * standard_error)

    def test_dimension_mismatch(self):
        with self.assertRaises(ShapeError):
            sample_diag().kl(sample_diag(mean=np.zeros(3), std=np.ones(3)))

    @settings(max_examples=60, deadline=None)
    @given(
        q_mean=hnp.arrays(np.float64, 3, elements=st_small),
        q_std=hnp.arrays(np.float64, 3, elements=st_scale),
        p_mean=hnp.arrays(np.float64, 3, elements=st_small),
        p_std=hnp.arrays(np.float64, 3, elements=st_scale),
    )
    def test_kl_is_non_negative(self, q_mean, q_std, p_mean, p_std):
        q = GaussianDiag(q_mean, q_std)
        p = GaussianDiag(p_mean, p_std)

        value = q.kl(p).item()

        self.assertGreaterEqual(value, -1e-12)
        if np.array_equal(q_mean, p_mean) and np.array_equal(q_std, p_std):
            self.assertLess(abs(value), 1e-12)


class GaussianRank1Tests(SimpleTestCase):
    def test_zero_perturbation_reduces_to_diagonal_sampling(self):
        rng = np.random.default_rng(4)
        eps, shared = rng.standard_normal(3), rng.standard_normal(1)
        dist = sample_rank1(mean=np.array([1.0, 2.0, 3.0]), diag=np.array([0.25, 1.0, 4.0]), perturb=np.zeros(3))

        sample = dist.sample(noise=(eps, shared))
        diagonal = GaussianDiag(dist.mean, np.sqrt(dist.diag.data)).sample(noise=eps)

        np.testing.assert_allclose(sample.data, diagonal.data)

    def test_sample_covariance(self):
        draws = sample_rank1().sample(np.random.default_rng(5), sample_shape=(100000,)).data

        covariance = np.cov(draws, rowvar=False)

        np.testing.assert_allclose(covariance, [[2.0, 1.0], [1.0, 2.0]], atol=0.05)

    def test_mean_shift(self):
        base = sample_rank1().sample(np.random.default_rng(6), sample_shape=(1000,)).data
        shifted = sample_rank1(mean=np.array([3.0, -1.0])).sample(
            np.random.default_rng(6), sample_shape=(1000,)
        ).data

        np.testing.assert_allclose(shifted.mean(axis=0) - base.mean(axis=0), [3.0, -1.0])

    def test_zero_perturbation_log_prob_equals_diagonal(self):
        diag = np.array([0.5, 2.0])
        x = np.array([0.3, -1.2])

        rank1 = sample_rank1(diag=diag, perturb=np.zeros(2)).log_prob(x).item()
        diagonal = sample_diag(std=np.sqrt(diag)).log_prob(x).item()

        self.assertAlmostEqual(rank1, diagonal, places=12)

    def test_log_det_uses_determinant_lemma(self):
        self.assertAlmostEqual(sample_rank1().log_det().item(), np.log(3.0), places=12)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            mean, perturb, x = rng.normal(size=3), rng.normal(size=3), rng.normal(size=3)
            diag = rng.uniform(0.2, 2.0, size=3)
            dist = GaussianRank1(mean, diag, perturb)

            expected = dense_logpdf(mean, np.diag(diag) + np.outer(perturb, perturb), x)

            self.assertLess(abs(dist.log_prob(x).item() - expected), 1e-10)
            np.testing.assert_allclose(dist.covariance(), np.diag(diag) + np.outer(perturb, perturb))

    def test_non_positive_diag_rejected(self):
        with self.assertRaises(ValueError):
            sample_rank1(diag=np.array([1.0, -0.1])).log_prob(np.zeros(2))

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeError):
            sample_rank1(perturb=np.zeros(3))

    @settings(max_examples=50, deadline=None)
    @given(
        perturb=hnp.arrays(np.float64, 4, elements=st_small),
        diag=hnp.arrays(np.float64, 4, elements=st_scale),
        x=hnp.arrays(np.float64, 4, elements=st_small),
    )
    def test_sign_flip_of_perturbation_is_invariant(self, perturb, diag, x):
        plus = GaussianRank1(np.zeros(4), diag, perturb).log_prob(x).item()
        minus = GaussianRank1(np.zeros(4), diag, -perturb).log_prob(x).item()

        self.assertAlmostEqual(plus, minus, places=10)

    def test_log_prob_gradient(self):
        mean = Tensor(np.array([0.1, -0.4]), requires_grad=True, name="mean")
        diag = Tensor(np.array([0.7, 1.3]), requires_grad=True, name="diag")
        perturb = Tensor(np.array([0.5, -0.2]), requires_grad=True, name="perturb")

        def loss():
            return GaussianRank1(mean, diag, perturb).log_prob(np.array([1.0, 0.5]))

        worst = check_gradients(loss, [("mean", mean), ("diag", diag), ("perturb", perturb)])

        self.assertLess(worst, 1e-4)
