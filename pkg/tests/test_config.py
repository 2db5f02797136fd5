"""
Tests for chart and Lie algebra documents
"""

import json
import os
import tempfile
import unittest

from killing_poisson.config import ChartConfig, LieAlgebraConfig
from killing_poisson.errors import ExprSyntaxError, SpecError
from killing_poisson.jet import values

POLAR = {
    "name": "polar",
    "coords": ["r", "t"],
    "metric": {"2,2": "r^2"},
    "pi": {"2,1": "1/r"},
    "scalars": {"f": "r*cos(t)"},
    "vectors": {"X": {"2": "1"}},
    "oneforms": {"a": ["1", "0"]},
    "grid": {"box": [[0.5, 2], [0, 3]], "points_per_axis": 3},
    "checks": ["jacobi"],
}


class TestChartConfig(unittest.TestCase):
    """Test cases for ChartConfig"""

    def test_defaults(self):
        """Test default checks, tolerance and grid"""
        config = ChartConfig.from_dict({"coords": ["x", "y"], "pi": {"1,2": "1"}})
        self.assertEqual(config.get_checks(), ["jacobi", "unimodular", "killing_poisson"])
        self.assertEqual(config.get_tolerance(), 1e-8)
        self.assertIsNone(config.get_expect())
        self.assertEqual(config.name, "chart")
        grid = config.to_grid()
        self.assertEqual(grid.box, ((-2.0, 2.0), (-2.0, 2.0)))
        self.assertEqual(grid.points_per_axis, 5)

    def test_one_based_indices(self):
        """Test that document indices start at 1 and reversed pi keys are negated"""
        model = ChartConfig.from_dict(POLAR).to_model()
        fr = model.frame([2.0, 0.0])
        self.assertEqual(fr.g.value[1, 1], 4.0)
        self.assertEqual(fr.pi.value[0, 1], -0.5)
        self.assertEqual(list(values(fr.vector("X"))), [0.0, 1.0])
        self.assertEqual(model.name, "polar")

    def test_grid_per_axis_box(self):
        """Test a box given per coordinate and the points-per-axis override"""
        config = ChartConfig.from_dict(POLAR)
        grid = config.to_grid()
        self.assertEqual(grid.box, ((0.5, 2.0), (0.0, 3.0)))
        self.assertEqual(len(grid.points()), 9)
        self.assertEqual(config.to_grid(points_per_axis=2).points_per_axis, 2)

    def test_singular_centers(self):
        """Test that singular centers become exclusion balls"""
        config = ChartConfig.from_dict({"coords": ["x", "y"], "singular_centers": [[0, 0]]})
        grid = config.to_grid()
        self.assertEqual(grid.exclusions, (((0.0, 0.0), 0.3),))
        self.assertNotIn((0.0, 0.0), grid.points())

    def test_explicit_exclusions(self):
        """Test exclusion objects and extra points"""
        config = ChartConfig.from_dict(
            {
                "coords": ["x"],
                "grid": {
                    "box": [-1, 1],
                    "points_per_axis": 3,
                    "exclusions": [{"center": [1], "radius": 0.5}],
                    "extra_points": [[0.25]],
                },
            }
        )
        self.assertEqual(config.to_grid().points(), [(-1.0,), (0.0,), (0.25,)])

    def test_unknown_keys(self):
        """Test that misspelled keys are rejected at every level"""
        documents = [
            {"coords": ["x"], "metrc": {}},
            {"coords": ["x"], "grid": {"boxes": [0, 1]}},
            {"coords": ["x"], "grid": {"exclusions": [{"centre": [0]}]}},
        ]
        for document in documents:
            with self.assertRaises(SpecError, msg=document):
                ChartConfig.from_dict(document)

    def test_invalid_documents(self):
        """Test missing coordinates, bad expect values and bad indices"""
        with self.assertRaises(SpecError):
            ChartConfig.from_dict({"pi": {}})
        with self.assertRaises(SpecError):
            ChartConfig.from_dict({"coords": ["x"], "expect": "maybe"})
        with self.assertRaises(SpecError):
            ChartConfig.from_dict({"coords": ["x", "y"], "pi": {"0,1": "1"}}).to_model()
        with self.assertRaises(SpecError):
            ChartConfig.from_dict({"coords": ["x", "y"], "pi": {"1": "1"}}).to_model()
        with self.assertRaises(SpecError):
            ChartConfig.from_dict({"coords": ["x", "y"], "vectors": {"X": ["1"]}}).to_model()
        with self.assertRaises(SpecError):
            ChartConfig.from_dict({"coords": ["x"], "grid": {"box": [0, 1, 2]}}).to_grid()

    def test_wrong_types(self):
        """Test that values of the wrong JSON type are rejected as SpecError"""
        base = {"coords": ["x", "y", "z"], "pi": {"1,2": "z"}}
        for extra in (
            {"metric": ["1"]},
            {"pi": ["z"]},
            {"scalars": ["x"]},
            {"scalars": {"f": ["x"]}},
            {"vectors": ["1", "0", "0"]},
            {"vectors": {"X": "1"}},
            {"oneforms": {"a": [["1"], "0", "0"]}},
            {"grid": {"box": 3}},
            {"grid": {"box": [[0, 1], 2, [0, 1]]}},
            {"grid": {"box": [0, "1"]}},
            {"grid": {"points_per_axis": 2.5}},
            {"grid": {"exclusions": {"center": [0, 0, 0]}}},
            {"grid": {"exclusions": [{"center": [0, 0, 0], "radius": "small"}]}},
            {"grid": {"extra_points": [1, 0, 0]}},
            {"singular_centers": [0, 0, 0]},
        ):
            with self.assertRaises(SpecError, msg=extra):
                ChartConfig.from_dict(dict(base, **extra))

    def test_malformed_expression(self):
        """Test that expression errors surface with their offset"""
        config = ChartConfig.from_dict({"coords": ["x", "y"], "pi": {"1,2": "x +"}})
        with self.assertRaises(ExprSyntaxError) as ctx:
            config.to_model()
        self.assertEqual(ctx.exception.offset, 3)

    def test_tolerance(self):
        """Test tolerance override and validation"""
        config = ChartConfig.from_dict({"coords": ["x"], "tolerance": 1e-6})
        self.assertEqual(config.get_tolerance(), 1e-6)
        self.assertEqual(config.get_tolerance(1e-4), 1e-4)
        for bad in (0, -1e-3, "small"):
            with self.assertRaises(SpecError, msg=bad):
                config.get_tolerance(bad)

    def test_check_override(self):
        """Test that command-line checks replace the document's"""
        config = ChartConfig.from_dict(POLAR)
        self.assertEqual(config.get_checks(["unimodular"]), ["unimodular"])
        with self.assertRaises(SpecError):
            ChartConfig.from_dict({"coords": ["x"], "checks": "jacobi"}).get_checks()

    def test_save_and_load(self):
        """Test writing a document and reading it back from disk"""
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "nested", "polar.json")
            ChartConfig.from_dict(POLAR).save_config(path)
            with open(path, "r", encoding="utf-8") as f:
                self.assertEqual(json.load(f), POLAR)
            config = ChartConfig(path)
            self.assertEqual(config.to_dict(), POLAR)
            self.assertEqual(config.config_path, path)

    def test_name_from_file(self):
        """Test that an unnamed document is named after its file"""
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "plane.json")
            with open(path, "w", encoding="utf-8") as f:
                json.dump({"coords": ["x", "y"]}, f)
            self.assertEqual(ChartConfig(path).name, "plane")

    def test_load_errors(self):
        """Test missing files, invalid JSON and non-object documents"""
        with tempfile.TemporaryDirectory() as directory:
            with self.assertRaises(SpecError):
                ChartConfig(os.path.join(directory, "missing.json"))
            broken = os.path.join(directory, "broken.json")
            with open(broken, "w", encoding="utf-8") as f:
                f.write("{\"coords\": [")
            with self.assertRaises(SpecError):
                ChartConfig(broken)
            listed = os.path.join(directory, "list.json")
            with open(listed, "w", encoding="utf-8") as f:
                json.dump(["x"], f)
            with self.assertRaises(SpecError):
                ChartConfig(listed)


class TestLieAlgebraConfig(unittest.TestCase):
    """Test cases for LieAlgebraConfig"""

    HEISENBERG = {
        "name": "h3",
        "dim": 3,
        "brackets": {"1,2": {"3": 1}},
        "r": {"1,3": 1},
        "manifold": {"coords": ["x", "y", "z"], "metric": {"1,1": "1 + y^2", "1,3": "-y"}},
        "action": [["1", "0", "0"], ["0", "1", "x"], ["0", "0", "1"]],
    }

    def test_to_model(self):
        """Test structure constants, r-matrix and action from a document"""
        config = LieAlgebraConfig.from_dict(self.HEISENBERG)
        algebra = config.to_model()
        self.assertEqual(algebra.name, "h3")
        self.assertEqual(algebra.structure[0, 1, 2], 1.0)
        self.assertEqual(algebra.r[2, 0], -1.0)
        self.assertEqual(algebra.chart.dim, 3)
        self.assertEqual(len(algebra.action), 3)
        self.assertEqual(config.manifold.coords, ["x", "y", "z"])

    def test_manifold_rules(self):
        """Test that the manifold carries no pi and an action needs a manifold"""
        with_pi = dict(self.HEISENBERG, manifold={"coords": ["x", "y", "z"], "pi": {"1,2": "1"}})
        with self.assertRaises(SpecError):
            LieAlgebraConfig.from_dict(with_pi)
        without_manifold = {k: v for k, v in self.HEISENBERG.items() if k != "manifold"}
        with self.assertRaises(SpecError):
            LieAlgebraConfig.from_dict(without_manifold)

    def test_invalid_documents(self):
        """Test bad dimensions, unknown keys and bracket shapes"""
        for document in ({"dim": 0}, {"dim": True}, {"dim": 2, "bases": []}):
            with self.assertRaises(SpecError, msg=document):
                LieAlgebraConfig.from_dict(document)
        with self.assertRaises(SpecError):
            LieAlgebraConfig.from_dict({"dim": 2, "brackets": {"1,2": 1}}).to_model()
        with self.assertRaises(SpecError):
            LieAlgebraConfig.from_dict({"dim": 2, "brackets": {"1,3": {"1": 1}}}).to_model()

    def test_wrong_types(self):
        """Test that Lie algebra values of the wrong JSON type are rejected as SpecError"""
        for document in (
            {"dim": 2, "brackets": {"1,2": {"2": "one"}}},
            {"dim": 2, "brackets": [[1, 2]]},
            {"dim": 2, "r": {"1,2": "1"}},
            {"dim": 2, "r": [1]},
            {"dim": 2, "basis": "e1 e2"},
            {"dim": 2, "manifold": ["x", "y"]},
            {"dim": 2, "manifold": {"coords": ["x", "y"]}, "action": {"1": ["1", "0"]}},
            {"dim": 2, "manifold": {"coords": ["x", "y"]}, "action": [["1", None], ["0", "1"]]},
            {"dim": 2, "manifold": {"coords": ["x", "y"], "metric": ["1"]}},
        ):
            with self.assertRaises(SpecError, msg=document):
                LieAlgebraConfig.from_dict(document)

    def test_save_and_load(self):
        """Test a Lie algebra document round trip through a file"""
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "h3.json")
            LieAlgebraConfig.from_dict(self.HEISENBERG).save_config(path)
            config = LieAlgebraConfig(path)
            self.assertEqual(config.to_dict(), self.HEISENBERG)
            self.assertEqual(config.to_model().dim, 3)


if __name__ == "__main__":
    unittest.main()
