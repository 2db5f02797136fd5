"""
Tests for the Koszul bracket and the metric contravariant connection
"""

import unittest

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from killing_poisson.contraconn import (
    D_pi_residual,
    basic_form_residuals,
    compatibility_sweep,
    curvature,
    f_connection_residual,
    formula1_residual,
    formula1_sweep,
    kernel_invariance_residual,
    kernel_orthogonality_residual,
    kernel_split,
    koszul_bracket,
    metric_compatibility_residual,
    metric_D,
    numerical_rank,
    probe_fields,
    torsion_residual,
    torsion_sweep,
)
from killing_poisson.errors import RankAmbiguityError
from killing_poisson.fields import ChartModel, bivector_pair
from killing_poisson.fixtures import list_fixtures, load_fixture
from killing_poisson.jet import values

XYZ = ["x", "y", "z"]
RADIUS = "sqrt(x^2 + y^2 + z^2)"

CURVED = ChartModel.build(
    XYZ,
    metric={(0, 0): "1 + x^2", (0, 1): "0.2*sin(y*z)", (2, 2): "exp(0.3*z)"},
    pi={(0, 1): "x*y + z^2", (0, 2): "sin(x) - y", (1, 2): "x*z^2 + 1"},
    scalars={"f": "x*y*z + cos(x)", "h": "exp(y) - z^3"},
    oneforms={"a": ["y*z", "x^2", "sin(x*y)"]},
)

SO3 = ChartModel.build(XYZ, pi={(0, 1): "z", (0, 2): "-y", (1, 2): "x"})

SQRT_SO3 = ChartModel.build(
    XYZ,
    pi={(0, 1): f"{RADIUS}*z", (0, 2): f"-{RADIUS}*y", (1, 2): f"{RADIUS}*x"},
    oneforms={"radial": ["x", "y", "z"], "rotation": ["-y", "x", "0"]},
)

SQRT_SO3_POINTS = ([1.0, 1.0, 1.0], [0.5, -1.0, 2.0], [-1.5, 0.3, 0.8])

coordinate = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
points = st.tuples(coordinate, coordinate, coordinate)


class TestKoszulBracket(unittest.TestCase):
    """Test cases for the Koszul bracket of 1-forms"""

    def test_exact_forms(self):
        """Test [df, dh]_pi = d{f, h}"""
        fr = CURVED.frame([0.4, -0.3, 0.9])
        df, dh = fr.scalar("f").d(), fr.scalar("h").d()
        poisson = bivector_pair(fr, df, dh).d()
        np.testing.assert_allclose(values(koszul_bracket(fr, df, dh)), values(poisson), atol=1e-12)

    def test_coordinate_forms(self):
        """Test [dx^a, dx^b]_pi = d pi^{ab}"""
        fr = SO3.frame([0.2, 0.5, -0.7])
        bracket = values(koszul_bracket(fr, fr.coordinate_covector(0), fr.coordinate_covector(1)))
        np.testing.assert_allclose(bracket, [0.0, 0.0, 1.0])

    def test_antisymmetry(self):
        """Test [a, b] = -[b, a]"""
        fr = CURVED.frame([0.1, 0.2, 0.3])
        a, b = fr.oneform("a"), fr.scalar("f").d()
        np.testing.assert_allclose(values(koszul_bracket(fr, a, b)), -values(koszul_bracket(fr, b, a)), atol=1e-12)


class TestMetricConnection(unittest.TestCase):
    """Test cases for the Levi-Civita contravariant connection"""

    @given(points)
    @settings(max_examples=10, deadline=None)
    def test_torsion_free_and_metric(self, point):
        """Test torsion and metric compatibility over the probe fields"""
        fr = CURVED.frame(point)
        fields = probe_fields(fr, [fr.oneform("a")])
        self.assertLess(torsion_sweep(fr, fields), 1e-9)
        self.assertLess(compatibility_sweep(fr, fields), 1e-9)

    def test_every_fixture_at_random_points(self):
        """Test torsion and metric compatibility at 100 random points of each chart fixture"""
        for fixture in list_fixtures():
            config = load_fixture(fixture.name)
            model, grid = config.to_model(), config.to_grid()
            point_in_box = st.tuples(
                *[st.floats(min_value=low, max_value=high, allow_nan=False) for low, high in grid.box]
            )

            @given(point_in_box)
            @settings(max_examples=100, deadline=None)
            def connection_axioms(point):
                assume(not grid.excluded(point))
                fr = model.frame(list(point))
                fields = probe_fields(fr, [fr.oneform(name) for name in model.oneforms])
                self.assertLessEqual(torsion_sweep(fr, fields), 1e-9, (fixture.name, point))
                self.assertLessEqual(compatibility_sweep(fr, fields), 1e-9, (fixture.name, point))

            with self.subTest(fixture=fixture.name):
                connection_axioms()

    def test_single_residuals(self):
        """Test torsion and compatibility for explicit 1-form fields"""
        fr = CURVED.frame([-0.6, 0.8, 0.25])
        a, b = fr.oneform("a"), fr.scalar("f").d()
        self.assertLess(torsion_residual(fr, a, b), 1e-9)
        self.assertLess(metric_compatibility_residual(fr, fr.scalar("h").d(), a, b), 1e-9)

    def test_tensorial_in_direction(self):
        """Test D_{2a} b = 2 D_a b"""
        fr = CURVED.frame([0.3, 0.3, 0.3])
        b = fr.oneform("a")
        direction = np.array([0.5, -1.0, 2.0])
        np.testing.assert_allclose(
            values(metric_D(fr, 2.0 * direction, b)), 2.0 * values(metric_D(fr, direction, b)), atol=1e-12
        )

    @given(points)
    @settings(max_examples=10, deadline=None)
    def test_lie_derivative_formula(self, point):
        """Test L_{#a} pi(b, c) = <D_c a, b> - <D_b a, c>"""
        fr = CURVED.frame(point)
        a = fr.oneform("a")
        for j, k in ((0, 1), (0, 2), (1, 2)):
            beta, gamma = np.eye(3)[j], np.eye(3)[k]
            self.assertLess(formula1_residual(fr, a, beta, gamma), 1e-8)
        self.assertLess(formula1_sweep(fr, probe_fields(fr, [a])), 1e-8)

    def test_zero_bivector(self):
        """Test that both sides vanish when pi = 0"""
        model = ChartModel.build(XYZ, oneforms={"a": ["x*y", "z", "1"]})
        fr = model.frame([1.0, 2.0, 3.0])
        a = fr.oneform("a")
        self.assertEqual(formula1_residual(fr, a, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]), 0.0)
        np.testing.assert_array_equal(values(metric_D(fr, [1.0, 0.0, 0.0], a)), np.zeros(3))

    def test_flat_curvature(self):
        """Test that a constant bivector on flat space has zero curvature"""
        model = ChartModel.build(XYZ, pi={(0, 1): "1", (1, 2): "2"})
        fr = model.frame([0.5, 0.5, 0.5])
        k = curvature(fr, fr.coordinate_covector(0), fr.coordinate_covector(1), fr.coordinate_covector(2))
        np.testing.assert_allclose(k, np.zeros(3))


class TestKernel(unittest.TestCase):
    """Test cases for the kernel of the anchor"""

    def test_rank_and_kernel(self):
        """Test that so(3) has rank 2 away from the origin with the radial kernel"""
        fr = SO3.frame([1.0, 2.0, 2.0])
        rank, kernel = kernel_split(fr)
        self.assertEqual(rank, 2)
        self.assertEqual(kernel.shape, (1, 3))
        np.testing.assert_allclose(np.abs(kernel[0]), [1.0 / 3.0, 2.0 / 3.0, 2.0 / 3.0], atol=1e-12)

    def test_rank_at_origin(self):
        """Test that so(3) vanishes at the origin"""
        self.assertEqual(numerical_rank(SO3.frame([0.0, 0.0, 0.0])), 0)

    def test_ambiguous_rank(self):
        """Test that a singular value just above the threshold is refused"""
        model = ChartModel.build(["x", "y", "z", "w"], pi={(0, 1): "1", (2, 3): "5e-8"})
        with self.assertRaises(RankAmbiguityError):
            kernel_split(model.frame([0.0, 0.0, 0.0, 0.0]))

    def test_tiny_values_count_as_kernel(self):
        """Test that singular values below the threshold are dropped"""
        model = ChartModel.build(["x", "y", "z", "w"], pi={(0, 1): "1", (2, 3): "1e-12"})
        self.assertEqual(numerical_rank(model.frame([0.0, 0.0, 0.0, 0.0])), 2)


class TestRegularConnection(unittest.TestCase):
    """Test cases for the F-connection condition and D pi"""

    def test_sqrt_so3_is_regular_connection(self):
        """Test D_a vanishes on Ker pi_# for the rescaled so(3) tensor"""
        for point in SQRT_SO3_POINTS:
            self.assertLess(f_connection_residual(SQRT_SO3.frame(point)), 1e-8, point)
        self.assertLessEqual(f_connection_residual(SQRT_SO3.frame([1.0, 1.0, 1.0])), 1e-9)

    def test_plain_so3_is_not(self):
        """Test that the so(3) tensor itself fails at (1, 0, 0)"""
        self.assertAlmostEqual(f_connection_residual(SO3.frame([1.0, 0.0, 0.0])), 0.5)

    def test_symplectic_kernel_is_trivial(self):
        """Test the vacuous case of an invertible bivector"""
        model = ChartModel.build(["x", "y"], pi={(0, 1): "1 + x^2"})
        self.assertEqual(f_connection_residual(model.frame([0.3, 0.1])), 0.0)

    def test_parallel_bivector(self):
        """Test D pi = 0 for the rescaled so(3) tensor and not for so(3)"""
        for point in SQRT_SO3_POINTS:
            self.assertLess(D_pi_residual(SQRT_SO3.frame(point)), 1e-8, point)
        self.assertLessEqual(D_pi_residual(SQRT_SO3.frame([1.0, 1.0, 1.0])), 1e-9)
        self.assertGreater(D_pi_residual(SO3.frame([1.0, 0.0, 0.0])), 0.1)

    def test_kernel_invariance(self):
        """Test that D preserves sections of Ker pi_#"""
        for point in SQRT_SO3_POINTS:
            fr = SQRT_SO3.frame(point)
            for k in range(3):
                self.assertLess(kernel_invariance_residual(fr, fr.oneform("radial"), np.eye(3)[k]), 1e-7)

    def test_kernel_orthogonality(self):
        """Test that D preserves sections orthogonal to Ker pi_#"""
        for point in SQRT_SO3_POINTS:
            fr = SQRT_SO3.frame(point)
            for k in range(3):
                self.assertLess(kernel_orthogonality_residual(fr, fr.oneform("rotation"), np.eye(3)[k]), 1e-7)

    def test_basic_form(self):
        """Test that dz is basic for d/dx ^ d/dy on flat R^3"""
        model = ChartModel.build(XYZ, pi={(0, 1): "1"})
        fr = model.frame([0.2, -0.4, 1.0])
        residuals = basic_form_residuals(fr, fr.coordinate_covector(2))
        self.assertEqual(set(residuals), {"anchor", "parallel", "poisson", "center"})
        for key, value in residuals.items():
            self.assertEqual(value, 0.0, key)


if __name__ == "__main__":
    unittest.main()
