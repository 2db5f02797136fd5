"""
High-level verdicts over a sample grid

Every check evaluates residuals point by point and folds them into a
``CheckReport``. Evaluation errors at a point (domain errors, degenerate
metrics, ambiguous ranks) never escape a check: they are recorded in the
report, which then fails.
"""

import itertools
import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from . import contraconn as cc
from . import fields as fl
from .errors import DimensionError, EvaluationError, SpecError
from .fields import ChartModel, PointFrame
from .jet import Jet2, values

logger = logging.getLogger(__name__)

Point = Tuple[float, ...]

DEFAULT_TOLERANCE = 1e-8
DEFAULT_POINTS_PER_AXIS = 5
DEFAULT_BOX = (-2.0, 2.0)
DEFAULT_EXCLUSION_RADIUS = 0.3

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


@dataclass(frozen=True)
class SampleGrid:
    """Tensor grid over a box, minus exclusion balls, plus extra points"""

    box: Tuple[Tuple[float, float], ...]
    points_per_axis: int = DEFAULT_POINTS_PER_AXIS
    exclusions: Tuple[Tuple[Tuple[float, ...], float], ...] = ()
    extra_points: Tuple[Tuple[float, ...], ...] = ()

    @classmethod
    def cube(
        cls,
        dim: int,
        low: float = DEFAULT_BOX[0],
        high: float = DEFAULT_BOX[1],
        points_per_axis: int = DEFAULT_POINTS_PER_AXIS,
        exclusions: Iterable[Tuple[Sequence[float], float]] = (),
        extra_points: Iterable[Sequence[float]] = (),
    ) -> "SampleGrid":
        return cls(
            box=tuple((float(low), float(high)) for _ in range(dim)),
            points_per_axis=points_per_axis,
            exclusions=tuple((tuple(float(c) for c in center), float(r)) for center, r in exclusions),
            extra_points=tuple(tuple(float(c) for c in p) for p in extra_points),
        )

    @property
    def dim(self) -> int:
        return len(self.box)

    def excluded(self, point: Sequence[float]) -> bool:
        p = np.asarray(point, dtype=float)
        return any(np.linalg.norm(p - np.asarray(center)) < radius for center, radius in self.exclusions)

    def points(self) -> List[Point]:
        """Surviving sample points in deterministic order

        Raises:
            SpecError: the grid is malformed or every point is excluded
        """
        if self.points_per_axis < 1:
            raise SpecError(f"points_per_axis must be positive, got {self.points_per_axis}")
        for center, _ in self.exclusions:
            if len(center) != self.dim:
                raise SpecError(f"exclusion center {center} does not match dimension {self.dim}")
        axes = []
        for low, high in self.box:
            if high < low:
                raise SpecError(f"box bounds ({low}, {high}) are reversed")
            axes.append(np.linspace(low, high, self.points_per_axis) if self.points_per_axis > 1 else [0.5 * (low + high)])
        candidates = [tuple(float(c) for c in p) for p in itertools.product(*axes)]
        for extra in self.extra_points:
            if len(extra) != self.dim:
                raise SpecError(f"extra point {extra} does not match dimension {self.dim}")
            candidates.append(tuple(extra))
        points = [p for p in candidates if not self.excluded(p)]
        if not points:
            raise SpecError("no sample point survives the exclusions")
        return points


@dataclass
class CheckReport:
    """Outcome of one check over a grid"""

    name: str
    tolerance: float
    residuals: List[float] = field(default_factory=list)
    points: List[Point] = field(default_factory=list)
    max_residual: float = 0.0
    worst_point: Optional[Point] = None
    status: str = PASS
    components: Dict[str, float] = field(default_factory=dict)
    informational: Dict[str, float] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    errors: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def to_dict(self) -> Dict:
        """Serializable form with a fixed key order"""
        return {
            "name": self.name,
            "status": self.status,
            "pass": self.passed,
            "tolerance": self.tolerance,
            "max_residual": self.max_residual,
            "worst_point": None if self.worst_point is None else list(self.worst_point),
            "points_evaluated": len(self.points),
            "components": dict(self.components),
            "informational": dict(self.informational),
            "notes": list(self.notes),
            "errors": list(self.errors),
        }


class ResidualSweep:
    """Accumulates per-point residual components into a CheckReport"""

    def __init__(self, name: str, tolerance: float, informational: Iterable[str] = ()):
        self.report = CheckReport(name=name, tolerance=tolerance)
        self.informational = set(informational)

    def add(self, point: Point, components: Dict[str, float]) -> None:
        report = self.report
        verdict = 0.0
        for key, value in components.items():
            value = float(value)
            if not np.isfinite(value):
                self.error(point, f"{key} residual is not finite")
                return
            target = report.informational if key in self.informational else report.components
            target[key] = max(target.get(key, 0.0), value)
            if key not in self.informational:
                verdict = max(verdict, value)
        report.points.append(point)
        report.residuals.append(verdict)
        if report.worst_point is None or verdict > report.max_residual:
            report.max_residual = verdict
            report.worst_point = point
        logger.debug("%s at %s: %s", report.name, point, components)

    def error(self, point: Point, message) -> None:
        self.report.errors.append(f"{tuple(point)}: {message}")
        logger.warning("%s failed at %s: %s", self.report.name, point, message)

    def run(self, model: ChartModel, points: Sequence[Point], fn: Callable[[PointFrame], Dict[str, float]]) -> None:
        for point in points:
            try:
                components = fn(model.frame(point))
            except EvaluationError as e:
                self.error(point, e)
                continue
            self.add(point, components)

    def finish(self, notes: Iterable[str] = ()) -> CheckReport:
        report = self.report
        report.notes.extend(notes)
        ok = not report.errors and report.points and report.max_residual <= report.tolerance
        report.status = PASS if ok else FAIL
        if not report.points:
            report.notes.append("no point could be evaluated")
        return report


def skipped_report(name: str, tolerance: float, reason: str) -> CheckReport:
    """Report for a check that could not run; it counts as not passed"""
    logger.warning("%s skipped: %s", name, reason)
    return CheckReport(name=name, tolerance=tolerance, status=SKIPPED, notes=[reason])


def _require_dim(model: ChartModel, dim: int, what: str) -> None:
    if model.dim != dim:
        raise DimensionError(f"{what} needs a {dim}-dimensional chart, {model.name!r} has dimension {model.dim}")


# ----------------------------------------------------------------------
# regular points
# ----------------------------------------------------------------------


def regular_points(
    model: ChartModel, points: Sequence[Point], rank_tol: float = cc.DEFAULT_RANK_TOL
) -> Tuple[List[Point], List[str]]:
    """Points where the rank of pi equals the modal rank over the grid

    Returns:
        (regular points, notes describing the rank profile and exclusions)
    """
    ranks: Dict[Point, int] = {}
    notes: List[str] = []
    ambiguous: List[Point] = []
    for point in points:
        try:
            ranks[point] = cc.numerical_rank(model.frame(point), rank_tol)
        except EvaluationError as e:
            ambiguous.append(point)
            logger.warning("excluding %s from regular points: %s", point, e)
    if not ranks:
        return [], ["no point with a decidable rank"]
    counts = Counter(ranks.values())
    modal = max(counts.items(), key=lambda kv: (kv[1], kv[0]))[0]
    profile = ", ".join(f"rank {r}: {c}" for r, c in sorted(counts.items()))
    notes.append(f"rank profile ({profile}); modal rank {modal}")
    off = [p for p, r in ranks.items() if r != modal]
    if off:
        notes.append(f"excluded {len(off)} non-modal point(s): {off}")
        logger.warning("%d non-modal point(s) excluded from regular-set checks", len(off))
    if ambiguous:
        notes.append(f"excluded {len(ambiguous)} rank-ambiguous point(s): {ambiguous}")
    return [p for p, r in ranks.items() if r == modal], notes


# ----------------------------------------------------------------------
# per-point residual bundles
# ----------------------------------------------------------------------


def _jacobi(fr: PointFrame) -> Dict[str, float]:
    return {"schouten": float(np.max(np.abs(values(fl.jacobi_trivector(fr)))))}


def _unimodular(fr: PointFrame) -> Dict[str, float]:
    i_pi_mu = fl.interior_product(fr.pi, fr.volume)
    hamiltonian = max(
        fl.hamiltonian_volume_residual(fr, fr.coordinate_function(k)) for k in range(fr.n)
    )
    return {
        "divergence": fl.form_norm(fl.divergence(fr, fr.pi)),
        "d_i_pi_mu": fl.form_norm(fl.exterior_derivative(i_pi_mu)),
        "hamiltonian_volume": hamiltonian,
    }


def _probe_fields(fr: PointFrame) -> List[Jet2]:
    return cc.probe_fields(fr, [fr.oneform(name) for name in fr.model.oneforms])


# ----------------------------------------------------------------------
# checks
# ----------------------------------------------------------------------


def check_jacobi(model: ChartModel, grid: SampleGrid, tol: float = DEFAULT_TOLERANCE) -> CheckReport:
    """Sup-norm of the Schouten bracket [pi, pi] over the grid"""
    sweep = ResidualSweep("jacobi", tol)
    sweep.run(model, grid.points(), _jacobi)
    return sweep.finish()


def check_unimodular(model: ChartModel, grid: SampleGrid, tol: float = DEFAULT_TOLERANCE) -> CheckReport:
    """div pi, d(i_pi mu) and L_{H_f} mu for coordinate f; all must vanish"""
    sweep = ResidualSweep("unimodular", tol)
    sweep.run(model, grid.points(), _unimodular)
    report = sweep.finish()
    routes = [report.components.get(k, 0.0) <= tol for k in ("divergence", "d_i_pi_mu", "hamiltonian_volume")]
    if report.points and len(set(routes)) > 1:
        report.notes.append("divergence and volume routes disagree")
    return report


def check_casimir(model: ChartModel, grid: SampleGrid, tol: float = DEFAULT_TOLERANCE, f: str = "f") -> CheckReport:
    """f is a Casimir and its gradient preserves pi"""
    expr = model.scalar(f)

    def residuals(fr: PointFrame) -> Dict[str, float]:
        jet = fr.jet(expr)
        gradient = fl.raise_covector(fr, jet.d())
        return {
            "casimir": fl.form_norm(fl.anchor(fr, jet.d())),
            "gradient_preserves_pi": fl.form_norm(fl.lie_derivative_bivector(fr, gradient)),
        }

    sweep = ResidualSweep(f"casimir:{f}", tol)
    sweep.run(model, grid.points(), residuals)
    return sweep.finish()


def check_freg(
    model: ChartModel,
    grid: SampleGrid,
    tol: float = DEFAULT_TOLERANCE,
    rank_tol: float = cc.DEFAULT_RANK_TOL,
) -> CheckReport:
    """D_a = 0 for a in Ker pi_#, at the regular points of the grid"""
    regular, notes = regular_points(model, grid.points(), rank_tol)
    sweep = ResidualSweep("freg", tol)
    sweep.run(model, regular, lambda fr: {"freg": cc.f_connection_residual(fr, rank_tol)})
    return sweep.finish(notes)


def check_killing_poisson(
    model: ChartModel,
    grid: SampleGrid,
    tol: float = DEFAULT_TOLERANCE,
    rank_tol: float = cc.DEFAULT_RANK_TOL,
) -> CheckReport:
    """Poisson, unimodular, and an F^reg-connection on the regular set"""
    points = grid.points()
    regular, notes = regular_points(model, points, rank_tol)
    regular_set = set(regular)

    def residuals(fr: PointFrame) -> Dict[str, float]:
        components = _jacobi(fr)
        components.update(_unimodular(fr))
        if tuple(float(c) for c in fr.point) in regular_set:
            components["freg"] = cc.f_connection_residual(fr, rank_tol)
        return components

    sweep = ResidualSweep("killing_poisson", tol)
    sweep.run(model, points, residuals)
    report = sweep.finish(notes)
    if report.components.get("schouten", 0.0) > tol:
        report.notes.append("conditional: pi fails the Jacobi identity, the remaining routes are not meaningful")
    return report


def check_kp_3d(model: ChartModel, grid: SampleGrid, tol: float = DEFAULT_TOLERANCE) -> CheckReport:
    """a = i_pi mu satisfies da = 0 and d<a,a> + delta(a) a = 0"""
    _require_dim(model, 3, "kp3d")

    def residuals(fr: PointFrame) -> Dict[str, float]:
        alpha = fl.interior_product(fr.pi, fr.volume)
        codiff = -fl.divergence(fr, fl.raise_covector(fr, alpha))
        equation = fl.cometric(fr, alpha, alpha).d() + codiff * alpha
        return {
            "d_alpha": fl.form_norm(fl.exterior_derivative(alpha)),
            "equation": fl.form_norm(equation),
        }

    sweep = ResidualSweep("kp3d", tol)
    sweep.run(model, grid.points(), residuals)
    return sweep.finish()


def check_equation_e(model: ChartModel, grid: SampleGrid, tol: float = DEFAULT_TOLERANCE, f: str = "f") -> CheckReport:
    """d<df,df> + Lap(f) df = 0 with Lap(f) = -div(grad f)"""
    _require_dim(model, 3, "equation_e")
    expr = model.scalar(f)

    def residuals(fr: PointFrame) -> Dict[str, float]:
        jet = fr.jet(expr)
        df = jet.d()
        laplacian = -fl.divergence(fr, fl.raise_covector(fr, df))
        return {"equation": fl.form_norm(fl.cometric(fr, df, df).d() + laplacian * df)}

    sweep = ResidualSweep(f"equation_e:{f}", tol)
    sweep.run(model, grid.points(), residuals)
    return sweep.finish()


def check_killing_vector(
    model: ChartModel, grid: SampleGrid, tol: float = DEFAULT_TOLERANCE, x: str = "X"
) -> CheckReport:
    """L_X g = 0; div X and [X, grad f] for declared invariants are reported alongside"""
    components = model.vector(x)
    invariants = list(model.scalars.items())

    def residuals(fr: PointFrame) -> Dict[str, float]:
        field_jet = fr.jets(components)
        result = {
            "lie_derivative_metric": fl.tensor_norm(fl.lie_derivative_metric(fr, field_jet)),
            "divergence": abs(float(values(fl.divergence(fr, field_jet)))),
        }
        commuting = 0.0
        for _, expr in invariants:
            f = fr.jet(expr)
            if abs(float(values(fl.directional(field_jet, f)))) <= tol:
                gradient = fl.raise_covector(fr, f.d())
                commuting = max(commuting, fl.form_norm(fl.lie_bracket(field_jet, gradient)))
        result["commutes_with_gradients"] = commuting
        return result

    sweep = ResidualSweep(f"killing:{x}", tol, informational=("divergence", "commutes_with_gradients"))
    sweep.run(model, grid.points(), residuals)
    notes = []
    if not invariants:
        notes.append("no invariant scalars declared; commuting condition not sampled")
    return sweep.finish(notes)


def check_liouville(model: ChartModel, grid: SampleGrid, tol: float = DEFAULT_TOLERANCE, x: str = "X") -> CheckReport:
    """[X, pi] = pi"""
    components = model.vector(x)

    def residuals(fr: PointFrame) -> Dict[str, float]:
        lie = fl.lie_derivative_bivector(fr, fr.jets(components))
        return {"liouville": fl.form_norm(values(lie) - fr.pi.value)}

    sweep = ResidualSweep(f"liouville:{x}", tol)
    sweep.run(model, grid.points(), residuals)
    return sweep.finish()


def check_liouville_identities(
    model: ChartModel, grid: SampleGrid, tol: float = DEFAULT_TOLERANCE, x: str = "X", n: int = 1
) -> CheckReport:
    """[X,H_f] = H_f + H_{X(f)} and L_X w = d i_X w = (n + div X) w for w = i_{pi^n} mu"""
    name = f"liouville_identities:{x}:{n}"
    if n < 1 or 2 * n > model.dim:
        return skipped_report(name, tol, f"wedge power {n} is not available in dimension {model.dim}")
    precondition = check_liouville(model, grid, tol, x)
    if not precondition.passed:
        return skipped_report(name, tol, f"{x} is not a Liouville field (residual {precondition.max_residual:.3e})")
    components = model.vector(x)

    def residuals(fr: PointFrame) -> Dict[str, float]:
        field_jet = fr.jets(components)
        bracket_worst = 0.0
        for k in range(fr.n):
            f = fr.coordinate_function(k)
            h_f = fl.hamiltonian_field(fr, f)
            h_xf = fl.hamiltonian_field(fr, fl.directional(field_jet, f))
            lhs = values(fl.lie_bracket(field_jet, h_f))
            bracket_worst = max(bracket_worst, fl.form_norm(lhs - values(h_f) - values(h_xf)))
        omega = fl.interior_product(fl.wedge_power(fr, n), fr.volume)
        factor = n + float(values(fl.divergence(fr, field_jet)))
        target = factor * values(omega)
        if omega.ndim == 0:
            cartan = np.zeros(())
        else:
            cartan = values(fl.exterior_derivative(fl.interior_product(field_jet, omega)))
        return {
            "hamiltonian_bracket": bracket_worst,
            "lie_derivative": fl.form_norm(values(fl.lie_derivative_form(field_jet, omega)) - target),
            "cartan": fl.form_norm(cartan - target),
        }

    sweep = ResidualSweep(name, tol)
    sweep.run(model, grid.points(), residuals)
    return sweep.finish()


def check_dpi(model: ChartModel, grid: SampleGrid, tol: float = DEFAULT_TOLERANCE) -> CheckReport:
    """D pi = 0"""
    sweep = ResidualSweep("dpi", tol)
    sweep.run(model, grid.points(), lambda fr: {"dpi": cc.D_pi_residual(fr)})
    return sweep.finish()


def check_torsion(model: ChartModel, grid: SampleGrid, tol: float = DEFAULT_TOLERANCE) -> CheckReport:
    """D_a b - D_b a = [a, b]_pi over the probe fields"""
    sweep = ResidualSweep("torsion", tol)
    sweep.run(model, grid.points(), lambda fr: {"torsion": cc.torsion_sweep(fr, _probe_fields(fr))})
    return sweep.finish()


def check_metric_compat(model: ChartModel, grid: SampleGrid, tol: float = DEFAULT_TOLERANCE) -> CheckReport:
    """pi_#(a).<b,c> = <D_a b, c> + <b, D_a c> over the probe fields"""
    sweep = ResidualSweep("metric_compat", tol)
    sweep.run(model, grid.points(), lambda fr: {"metric_compat": cc.compatibility_sweep(fr, _probe_fields(fr))})
    return sweep.finish()


def check_formula1(model: ChartModel, grid: SampleGrid, tol: float = DEFAULT_TOLERANCE) -> CheckReport:
    """L_{#a} pi(b, c) = <D_c a, b> - <D_b a, c> over the probe fields"""
    sweep = ResidualSweep("formula1", tol)
    sweep.run(model, grid.points(), lambda fr: {"formula1": cc.formula1_sweep(fr, _probe_fields(fr))})
    return sweep.finish()


def check_parallel(model: ChartModel, grid: SampleGrid, tol: float = DEFAULT_TOLERANCE) -> CheckReport:
    """nabla pi = 0 (a Levi-Civita parallel bivector is Killing-Poisson)"""
    sweep = ResidualSweep("parallel", tol)
    sweep.run(model, grid.points(), lambda fr: {"parallel": fl.tensor_norm(fl.covariant_derivative_bivector(fr))})
    return sweep.finish()


def check_symplectic_density(model: ChartModel, grid: SampleGrid, tol: float = DEFAULT_TOLERANCE) -> CheckReport:
    """For invertible pi on a 2m-manifold, i_{pi^m} mu is constant"""
    if model.dim % 2:
        raise DimensionError(f"symplectic_density needs an even-dimensional chart, got {model.dim}")
    m = model.dim // 2

    def residuals(fr: PointFrame) -> Dict[str, float]:
        density = fl.interior_product(fl.wedge_power(fr, m), fr.volume)
        if abs(float(density.value)) <= tol:
            raise EvaluationError(f"pi is not invertible at {tuple(fr.point)}")
        return {"density_gradient": fl.form_norm(density.grad)}

    sweep = ResidualSweep("symplectic_density", tol)
    sweep.run(model, grid.points(), residuals)
    return sweep.finish()


def check_identities(model: ChartModel, grid: SampleGrid, tol: float = DEFAULT_TOLERANCE) -> CheckReport:
    """Divergence, volume and Schouten identities that hold for any (g, pi)"""
    scalars = list(model.scalars.values())
    vectors = list(model.vectors.values())
    points = grid.points()

    def residuals(fr: PointFrame) -> Dict[str, float]:
        n = fr.n
        fs = [fr.coordinate_function(k) for k in range(n)] + [fr.jet(e) for e in scalars]
        xs = [fr.jets(comps) for comps in vectors]
        xs.append(Jet2.stack([fr.coordinate_function((k + 1) % n) for k in range(n)]))
        volume_divergence = max(fl.volume_divergence_residual(fr, q) for q in [fr.pi] + xs)
        return {
            "volume_divergence": volume_divergence,
            "hamiltonian_divergence": max(fl.hamiltonian_divergence_residual(fr, f) for f in fs),
            "schouten_volume": fl.schouten_volume_residual(fr),
            "lie_volume": max(fl.lie_volume_residual(fr, x) for x in xs),
        }

    sweep = ResidualSweep("identities", tol)
    sweep.run(model, points, residuals)
    notes = []
    if model.dim == 2:
        try:
            div_zero, grad_zero = fl.surface_unimodular_agreement(model, points, tol)
        except EvaluationError as e:
            sweep.error(points[0], e)
        else:
            notes.append(f"surface criterion: div pi = 0 is {div_zero}, i_pi mu constant is {grad_zero}")
            if div_zero != grad_zero:
                sweep.report.errors.append("surface criterion: div pi and i_pi mu disagree")
    return sweep.finish(notes)


CHECKS: Dict[str, Callable[..., CheckReport]] = {
    "jacobi": check_jacobi,
    "unimodular": check_unimodular,
    "freg": check_freg,
    "killing_poisson": check_killing_poisson,
    "kp3d": check_kp_3d,
    "dpi": check_dpi,
    "torsion": check_torsion,
    "metric_compat": check_metric_compat,
    "formula1": check_formula1,
    "parallel": check_parallel,
    "symplectic_density": check_symplectic_density,
    "identities": check_identities,
}

FIELD_CHECKS: Dict[str, Callable[..., CheckReport]] = {
    "casimir": check_casimir,
    "equation_e": check_equation_e,
    "killing": check_killing_vector,
    "liouville": check_liouville,
    "liouville_identities": check_liouville_identities,
}

RANK_CHECKS = ("freg", "killing_poisson")


def check_names() -> List[str]:
    """Check names accepted by ``run_check``; field checks take ``:name``"""
    return list(CHECKS) + [f"{name}:<field>" for name in FIELD_CHECKS]


def run_check(
    spec: str,
    model: ChartModel,
    grid: SampleGrid,
    tol: float = DEFAULT_TOLERANCE,
    rank_tol: float = cc.DEFAULT_RANK_TOL,
) -> CheckReport:
    """Run a check given by name, e.g. ``jacobi`` or ``liouville_identities:X:1``

    Raises:
        SpecError: unknown check, missing or malformed field argument
        UndeclaredFieldError: the named field is not declared in the chart
        DimensionError: the check does not apply to the chart's dimension
    """
    base, _, argument = spec.strip().partition(":")
    if base in CHECKS:
        if argument:
            raise SpecError(f"check {base!r} takes no argument")
        if base in RANK_CHECKS:
            return CHECKS[base](model, grid, tol, rank_tol)
        return CHECKS[base](model, grid, tol)
    if base in FIELD_CHECKS:
        if not argument:
            raise SpecError(f"check {base!r} needs a field name, e.g. {base}:f")
        if base == "liouville_identities":
            name, _, power = argument.partition(":")
            try:
                n = int(power) if power else 1
            except ValueError:
                raise SpecError(f"wedge power {power!r} is not an integer") from None
            return check_liouville_identities(model, grid, tol, name, n)
        return FIELD_CHECKS[base](model, grid, tol, argument)
    raise SpecError(f"unknown check {spec!r}; available: {', '.join(check_names())}")
