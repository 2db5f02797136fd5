"""
Tests for grid checks and the shipped fixtures
"""

import unittest

from killing_poisson import contraconn as cc
from killing_poisson.checks import (
    FAIL,
    PASS,
    SKIPPED,
    ResidualSweep,
    SampleGrid,
    check_casimir,
    check_equation_e,
    check_jacobi,
    check_killing_poisson,
    check_killing_vector,
    check_kp_3d,
    check_liouville,
    check_liouville_identities,
    check_names,
    check_symplectic_density,
    check_unimodular,
    regular_points,
    run_check,
    skipped_report,
)
from killing_poisson.errors import DimensionError, SpecError, UndeclaredFieldError
from killing_poisson.fields import ChartModel
from killing_poisson.fixtures import get_fixture, list_fixtures, load_fixture

XYZ = ["x", "y", "z"]
SO3 = {(0, 1): "z", (0, 2): "-y", (1, 2): "x"}
UNIT = SampleGrid.cube(3, 0.0, 0.0, 1, exclusions=[((0, 0, 0), 0.1)], extra_points=[(1.0, 0.0, 0.0)])


def _run_fixture(name, abc=None):
    config = load_fixture(name, abc)
    model, grid, tol = config.to_model(), config.to_grid(), config.get_tolerance()
    return [run_check(spec, model, grid, tol) for spec in config.get_checks()]


class TestSampleGrid(unittest.TestCase):
    """Test cases for SampleGrid"""

    def test_tensor_grid(self):
        """Test the default grid size and ordering"""
        points = SampleGrid.cube(2).points()
        self.assertEqual(len(points), 25)
        self.assertEqual(points[0], (-2.0, -2.0))
        self.assertEqual(points[-1], (2.0, 2.0))

    def test_exclusion_and_extra_points(self):
        """Test that exclusion balls drop points and extra points are appended"""
        grid = SampleGrid.cube(3, -1.0, 1.0, 3, exclusions=[((0, 0, 0), 0.3)], extra_points=[(0.5, 0.5, 0.5)])
        points = grid.points()
        self.assertNotIn((0.0, 0.0, 0.0), points)
        self.assertEqual(len(points), 27)
        self.assertEqual(points[-1], (0.5, 0.5, 0.5))

    def test_single_point_axis(self):
        """Test that one point per axis samples the box centre"""
        self.assertEqual(SampleGrid.cube(2, -1.0, 3.0, 1).points(), [(1.0, 1.0)])

    def test_everything_excluded(self):
        """Test that an empty grid is an input error"""
        grid = SampleGrid.cube(2, 0.0, 0.0, 1, exclusions=[((0, 0), 1.0)])
        with self.assertRaises(SpecError):
            grid.points()


class TestBasicChecks(unittest.TestCase):
    """Test cases for Jacobi, unimodularity and Casimir checks"""

    def setUp(self):
        self.grid = SampleGrid.cube(3, -1.0, 1.0, 3)

    def test_jacobi(self):
        """Test that so(3) passes Jacobi and the non-Poisson tensor fails with 2|z|"""
        self.assertTrue(check_jacobi(ChartModel.build(XYZ, pi=SO3), self.grid).passed)
        report = check_jacobi(ChartModel.build(XYZ, pi={(0, 1): "z", (0, 2): "x"}), self.grid)
        self.assertEqual(report.status, FAIL)
        self.assertAlmostEqual(report.max_residual, 2.0)
        self.assertEqual(abs(report.worst_point[2]), 1.0)

    def test_unimodular(self):
        """Test unimodularity on the plane"""
        plane = SampleGrid.cube(2, -1.0, 1.0, 3)
        self.assertTrue(check_unimodular(ChartModel.build(["x", "y"], pi={(0, 1): "1"}), plane).passed)
        report = check_unimodular(ChartModel.build(["x", "y"], pi={(0, 1): "x"}), plane)
        self.assertFalse(report.passed)
        self.assertAlmostEqual(report.components["divergence"], 1.0)
        self.assertAlmostEqual(report.components["d_i_pi_mu"], 1.0)

    def test_so3_unimodular(self):
        """Test that so(3) is divergence free"""
        self.assertTrue(check_unimodular(ChartModel.build(XYZ, pi=SO3), self.grid).passed)

    def test_casimir(self):
        """Test that r^2 is a Casimir of so(3) whose gradient does not preserve pi"""
        model = ChartModel.build(XYZ, pi=SO3, scalars={"f": "x^2 + y^2 + z^2"})
        report = check_casimir(model, self.grid, f="f")
        self.assertEqual(report.name, "casimir:f")
        self.assertFalse(report.passed)
        self.assertEqual(report.components["casimir"], 0.0)
        self.assertGreater(report.components["gradient_preserves_pi"], 1.0)

    def test_undeclared_casimir(self):
        """Test that a missing scalar is a declaration error"""
        with self.assertRaises(UndeclaredFieldError):
            check_casimir(ChartModel.build(XYZ, pi=SO3), self.grid, f="f")

    def test_evaluation_errors_fail_the_check(self):
        """Test that a domain error at a grid point is recorded, not raised"""
        report = check_jacobi(ChartModel.build(["x", "y"], pi={(0, 1): "1/x"}), SampleGrid.cube(2, -1.0, 1.0, 3))
        self.assertFalse(report.passed)
        self.assertTrue(report.errors)
        self.assertEqual(len(report.points), 6)


class TestKillingPoisson(unittest.TestCase):
    """Test cases for the composite and three-dimensional verdicts"""

    def test_so3_kp3d_residual(self):
        """Test that so(3) misses the 1-form equation by exactly 1 at (1, 0, 0)"""
        report = check_kp_3d(ChartModel.build(XYZ, pi=SO3), UNIT)
        self.assertFalse(report.passed)
        self.assertAlmostEqual(report.components["equation"], 1.0, delta=1e-9)
        self.assertEqual(report.components["d_alpha"], 0.0)

    def test_equation_e_negative_control(self):
        """Test that f = r^2 / 2 misses the equation by exactly 1 at (1, 0, 0)"""
        model = ChartModel.build(XYZ, scalars={"f": "(x^2 + y^2 + z^2) / 2"})
        report = check_equation_e(model, UNIT)
        self.assertAlmostEqual(report.max_residual, 1.0, delta=1e-9)

    def test_equation_e_radial(self):
        """Test that f = r^3 solves the equation away from the origin"""
        model = ChartModel.build(XYZ, scalars={"f": "(x^2 + y^2 + z^2)^1.5"})
        grid = SampleGrid.cube(3, -2.0, 2.0, 5, exclusions=[((0, 0, 0), 0.3)])
        self.assertTrue(check_equation_e(model, grid).passed)

    def test_dimension_guard(self):
        """Test that the 3-dimensional checks reject other dimensions"""
        plane = ChartModel.build(["x", "y"], pi={(0, 1): "1"}, scalars={"f": "x"})
        with self.assertRaises(DimensionError):
            check_kp_3d(plane, SampleGrid.cube(2))
        with self.assertRaises(DimensionError):
            check_equation_e(plane, SampleGrid.cube(2))
        with self.assertRaises(DimensionError):
            check_symplectic_density(ChartModel.build(XYZ), SampleGrid.cube(3))

    def test_so3_fails_killing_poisson(self):
        """Test that so(3) fails through the regular connection route only"""
        report = check_killing_poisson(ChartModel.build(XYZ, pi=SO3), UNIT)
        self.assertFalse(report.passed)
        self.assertEqual(report.components["schouten"], 0.0)
        self.assertAlmostEqual(report.components["freg"], 0.5)
        self.assertTrue(any(note.startswith("rank profile") for note in report.notes))

    def test_conditional_note(self):
        """Test that a non-Poisson tensor flags the remaining routes"""
        model = ChartModel.build(XYZ, pi={(0, 1): "z", (0, 2): "x"})
        report = check_killing_poisson(model, SampleGrid.cube(3, -1.0, 1.0, 3))
        self.assertFalse(report.passed)
        self.assertTrue(any(note.startswith("conditional") for note in report.notes))

    def test_regular_points(self):
        """Test that the origin of so(3) is excluded as a non-modal rank"""
        regular, notes = regular_points(ChartModel.build(XYZ, pi=SO3), SampleGrid.cube(3, -1.0, 1.0, 3).points())
        self.assertEqual(len(regular), 26)
        self.assertNotIn((0.0, 0.0, 0.0), regular)
        self.assertIn("modal rank 2", notes[0])

    def test_three_routes_agree(self):
        """Test that D pi = 0, the composite route and the 1-form equation agree pointwise"""
        cases = [
            (load_fixture("sqrt-so3").to_model(), True),
            (load_fixture("radial-r32").to_model(), True),
            (load_fixture("quadratic-family").to_model(), True),
            (load_fixture("quadratic-family", [1, 2, 3]).to_model(), True),
            (load_fixture("so3-plain").to_model(), False),
        ]
        points = [(1.0, 0.0, 0.0), (1.0, 1.0, 1.0), (0.5, -1.0, 2.0)]
        tol = 1e-7
        for model, expected in cases:
            for point in points:
                grid = SampleGrid.cube(3, 0.0, 0.0, 1, extra_points=[point], exclusions=[((0, 0, 0), 0.1)])
                fr = model.frame(point)
                dpi = cc.D_pi_residual(fr) <= tol
                composite = check_killing_poisson(model, grid, tol).passed
                kp3d = check_kp_3d(model, grid, tol).passed
                self.assertEqual((dpi, composite, kp3d), (expected,) * 3, (model.name, point))


class TestFieldChecks(unittest.TestCase):
    """Test cases for Killing and Liouville vector fields"""

    def setUp(self):
        self.plane = SampleGrid.cube(2, -1.0, 1.0, 3)

    def test_killing_vector(self):
        """Test rotation passes and dilation fails with residual 2"""
        model = ChartModel.build(["x", "y"], vectors={"R": ["-y", "x"], "D": ["x", "0"]}, scalars={"r2": "x^2 + y^2"})
        rotation = check_killing_vector(model, self.plane, x="R")
        self.assertTrue(rotation.passed)
        self.assertEqual(rotation.name, "killing:R")
        self.assertEqual(rotation.informational["divergence"], 0.0)
        self.assertLess(rotation.informational["commutes_with_gradients"], 1e-12)
        dilation = check_killing_vector(model, self.plane, x="D")
        self.assertFalse(dilation.passed)
        self.assertAlmostEqual(dilation.max_residual, 2.0)
        self.assertAlmostEqual(dilation.informational["divergence"], 1.0)

    def test_killing_note_without_invariants(self):
        """Test the note when no invariant scalars are declared"""
        model = ChartModel.build(["x", "y"], vectors={"T": ["1", "0"]})
        report = check_killing_vector(model, self.plane, x="T")
        self.assertTrue(report.passed)
        self.assertTrue(report.notes)

    def test_liouville(self):
        """Test [X, pi] = pi for X = -x d/dx and failure for X = 0"""
        model = ChartModel.build(["x", "y"], pi={(0, 1): "1"}, vectors={"X": ["-x", "0"], "Z": ["0", "0"]})
        self.assertTrue(check_liouville(model, self.plane, x="X").passed)
        zero = check_liouville(model, self.plane, x="Z")
        self.assertFalse(zero.passed)
        self.assertAlmostEqual(zero.max_residual, 1.0)

    def test_liouville_identities(self):
        """Test the bracket and volume identities for a Liouville field"""
        model = ChartModel.build(["x", "y"], pi={(0, 1): "1"}, vectors={"X": ["-x", "0"]})
        report = check_liouville_identities(model, self.plane, x="X", n=1)
        self.assertTrue(report.passed, report.to_dict())
        self.assertEqual(set(report.components), {"hamiltonian_bracket", "lie_derivative", "cartan"})

    def test_liouville_identities_r4(self):
        """Test the volume identities with pi ^ pi in dimension four"""
        model = ChartModel.build(
            ["x", "y", "z", "w"], pi={(0, 1): "1", (2, 3): "1"}, vectors={"X": ["-x", "0", "-z", "0"]}
        )
        report = check_liouville_identities(model, SampleGrid.cube(4, -1.0, 1.0, 2), x="X", n=2)
        self.assertTrue(report.passed, report.to_dict())

    def test_liouville_identities_skipped(self):
        """Test that a failed precondition or wedge power skips the check"""
        model = ChartModel.build(["x", "y"], pi={(0, 1): "1"}, vectors={"X": ["x", "0"]})
        report = check_liouville_identities(model, self.plane, x="X", n=1)
        self.assertEqual(report.status, SKIPPED)
        self.assertFalse(report.passed)
        report = check_liouville_identities(model, self.plane, x="X", n=2)
        self.assertEqual(report.status, SKIPPED)


class TestResidualSweep(unittest.TestCase):
    """Test cases for the residual accumulator shared by chart and Lie algebra checks"""

    def test_worst_point_and_informational(self):
        """Test that informational components do not decide the verdict"""
        sweep = ResidualSweep("demo", 1e-3, informational=("size",))
        sweep.add((0.0,), {"main": 1e-4, "size": 5.0})
        sweep.add((1.0,), {"main": 2e-4, "size": 1.0})
        report = sweep.finish()
        self.assertEqual(report.status, PASS)
        self.assertEqual(report.max_residual, 2e-4)
        self.assertEqual(report.worst_point, (1.0,))
        self.assertEqual(report.informational, {"size": 5.0})

    def test_non_finite_residual(self):
        """Test that a non-finite residual is recorded as an error"""
        sweep = ResidualSweep("demo", 1e-3)
        sweep.add((0.0,), {"main": float("nan")})
        report = sweep.finish()
        self.assertEqual(report.status, FAIL)
        self.assertEqual(len(report.errors), 1)

    def test_skipped_report(self):
        """Test that a skipped check carries its reason and does not pass"""
        report = skipped_report("cybe", 1e-8, "no r-matrix")
        self.assertEqual(report.status, SKIPPED)
        self.assertFalse(report.passed)
        self.assertEqual(report.notes, ["no r-matrix"])


class TestRunCheck(unittest.TestCase):
    """Test cases for check dispatch by name"""

    def setUp(self):
        self.model = ChartModel.build(["x", "y"], pi={(0, 1): "1"}, vectors={"X": ["-x", "0"]})
        self.grid = SampleGrid.cube(2, -1.0, 1.0, 2)

    def test_dispatch(self):
        """Test plain, field and parameterised check names"""
        self.assertEqual(run_check("jacobi", self.model, self.grid).name, "jacobi")
        self.assertEqual(run_check("liouville:X", self.model, self.grid).name, "liouville:X")
        self.assertEqual(run_check("liouville_identities:X:1", self.model, self.grid).status, PASS)

    def test_bad_names(self):
        """Test unknown checks and missing arguments"""
        for spec in ("nope", "casimir", "jacobi:f", "liouville_identities:X:two"):
            with self.assertRaises(SpecError, msg=spec):
                run_check(spec, self.model, self.grid)

    def test_check_names(self):
        """Test that the listed names include field checks"""
        names = check_names()
        self.assertIn("killing_poisson", names)
        self.assertIn("casimir:<field>", names)


class TestFixtures(unittest.TestCase):
    """Test cases for the shipped chart fixtures"""

    def test_expected_verdicts(self):
        """Test that every chart fixture passes or fails as declared"""
        for fixture in list_fixtures():
            reports = _run_fixture(fixture.name)
            overall = all(report.passed for report in reports)
            self.assertEqual(overall, fixture.expect == PASS, (fixture.name, [r.to_dict() for r in reports]))

    def test_connection_axioms(self):
        """Test torsion, metric compatibility and the Lie derivative formula on every fixture"""
        for fixture in list_fixtures():
            config = load_fixture(fixture.name)
            model, grid = config.to_model(), config.to_grid(points_per_axis=3)
            for spec, tol in (("torsion", 1e-9), ("metric_compat", 1e-9), ("formula1", 1e-8)):
                report = run_check(spec, model, grid, tol)
                self.assertTrue(report.passed, (fixture.name, report.to_dict()))

    def test_so3_plain_values(self):
        """Test the so(3) negative control residuals at the unit points"""
        reports = {report.name: report for report in _run_fixture("so3-plain")}
        self.assertTrue(reports["jacobi"].passed)
        self.assertTrue(reports["unimodular"].passed)
        self.assertAlmostEqual(reports["kp3d"].max_residual, 1.0, delta=1e-9)
        self.assertAlmostEqual(reports["freg"].max_residual, 0.5, delta=1e-9)
        self.assertFalse(reports["dpi"].passed)
        self.assertFalse(reports["casimir:f"].passed)

    def test_quadratic_family_parameters(self):
        """Test other members of the degree-2 family"""
        for abc in ([1, 2, 3], [4, 1, 9]):
            reports = _run_fixture("quadratic-family", abc)
            self.assertTrue(all(report.passed for report in reports), (abc, [r.to_dict() for r in reports]))

    def test_quadratic_family_mixed_signs(self):
        """Test that parameters of mixed sign are rejected"""
        with self.assertRaises(SpecError):
            load_fixture("quadratic-family", [1, -1, 1])

    def test_descriptions(self):
        """Test that the rescaled so(3) fixture names its factor"""
        self.assertTrue(get_fixture("sqrt-so3").description.startswith("r = |(x,y,z)| times"))


if __name__ == "__main__":
    unittest.main()
