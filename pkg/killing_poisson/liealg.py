"""
Finite-dimensional Lie algebras given by structure constants

Structure constants are stored as ``c[i, j, k] = c^k_{ij}``, so that
``[e_i, e_j] = sum_k c^k_{ij} e_k``. An r-matrix is an antisymmetric array
``r[i, j]`` acting on covectors by ``r(b)^i = r^{ij} b_j``.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .checks import (
    DEFAULT_TOLERANCE,
    FAIL,
    PASS,
    CheckReport,
    ResidualSweep,
    SampleGrid,
    check_killing_vector,
    run_check,
    skipped_report,
)
from .contraconn import DEFAULT_RANK_TOL
from .errors import LieAlgebraError
from .expr import ScalarExpr, linear_combination, variable_expr
from .fields import ChartModel, PointFrame, as_expr, form_norm, lie_bracket

logger = logging.getLogger(__name__)

JACOBI_TOL = 1e-12
IM_R_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class LieAlgebraModel:
    """Structure constants, optional r-matrix and optional action on a chart"""

    structure: np.ndarray
    r: Optional[np.ndarray] = None
    chart: Optional[ChartModel] = None
    action: Optional[Tuple[Tuple[ScalarExpr, ...], ...]] = None
    basis: Tuple[str, ...] = ()
    name: str = "algebra"

    def __post_init__(self):
        c = np.asarray(self.structure, dtype=float)
        if c.ndim != 3 or len(set(c.shape)) != 1:
            raise LieAlgebraError(f"structure constants must have shape (d, d, d), got {c.shape}")
        d = c.shape[0]
        if not np.array_equal(c, -np.swapaxes(c, 0, 1)):
            raise LieAlgebraError("structure constants are not antisymmetric in their lower indices")
        residual = structure_jacobi_residual(c)
        if residual > JACOBI_TOL * max(1.0, float(np.max(np.abs(c))) ** 2):
            raise LieAlgebraError(f"structure constants violate the Jacobi identity (residual {residual:.3e})")
        object.__setattr__(self, "structure", c)
        if self.r is not None:
            r = np.asarray(self.r, dtype=float)
            if r.shape != (d, d):
                raise LieAlgebraError(f"r must be a {d}x{d} matrix, got shape {r.shape}")
            if not np.array_equal(r, -r.T):
                raise LieAlgebraError("r is not antisymmetric")
            object.__setattr__(self, "r", r)
        if self.action is not None:
            if self.chart is None:
                raise LieAlgebraError("an action needs a chart")
            if len(self.action) != d:
                raise LieAlgebraError(f"action lists {len(self.action)} fields for a {d}-dimensional algebra")
            for i, comps in enumerate(self.action):
                if len(comps) != self.chart.dim:
                    raise LieAlgebraError(f"action field {i + 1} has {len(comps)} components, chart has {self.chart.dim}")
        if not self.basis:
            object.__setattr__(self, "basis", tuple(f"e{i + 1}" for i in range(d)))
        elif len(self.basis) != d:
            raise LieAlgebraError(f"{len(self.basis)} basis names for a {d}-dimensional algebra")

    @classmethod
    def build(
        cls,
        dim: int,
        brackets: Mapping[Tuple[int, int], Mapping[int, float]],
        r: Optional[Mapping[Tuple[int, int], float]] = None,
        chart: Optional[ChartModel] = None,
        action: Optional[Sequence[Sequence]] = None,
        basis: Sequence[str] = (),
        name: str = "algebra",
    ) -> "LieAlgebraModel":
        """Build from sparse brackets with 0-based indices

        Args:
            dim: Dimension of the algebra
            brackets: ``(i, j) -> {k: c^k_ij}``; ``(j, i)`` follows by antisymmetry
            r: ``(i, j) -> r^{ij}``; ``(j, i)`` follows by antisymmetry
            chart: Chart the action lives on
            action: One list of component expressions (text or ScalarExpr) per basis element
            basis: Basis names
            name: Label used in reports
        """
        c = np.zeros((dim, dim, dim))
        for (i, j), coefficients in brackets.items():
            if i == j:
                raise LieAlgebraError(f"bracket [e{i + 1}, e{i + 1}] must vanish")
            for k, value in coefficients.items():
                if not (0 <= i < dim and 0 <= j < dim and 0 <= k < dim):
                    raise LieAlgebraError(f"bracket index ({i}, {j}; {k}) out of range")
                if c[i, j, k] not in (0.0, value):
                    raise LieAlgebraError(f"bracket [e{i + 1}, e{j + 1}] given twice")
                c[i, j, k] = value
                c[j, i, k] = -value
        matrix = None
        if r is not None:
            matrix = np.zeros((dim, dim))
            for (i, j), value in r.items():
                if i == j or not (0 <= i < dim and 0 <= j < dim):
                    raise LieAlgebraError(f"r index ({i}, {j}) invalid")
                matrix[i, j] = value
                matrix[j, i] = -value
        fields = None
        if action is not None:
            if chart is None:
                raise LieAlgebraError("an action needs a chart")
            fields = tuple(
                tuple(as_expr(e, chart.coord_names) for e in comps)
                for comps in action
            )
        return cls(structure=c, r=matrix, chart=chart, action=fields, basis=tuple(basis), name=name)

    @property
    def dim(self) -> int:
        return self.structure.shape[0]

    def require_r(self) -> np.ndarray:
        if self.r is None:
            raise LieAlgebraError(f"algebra {self.name!r} has no r-matrix")
        return self.r

    def require_action(self) -> Tuple[Tuple[ScalarExpr, ...], ...]:
        if self.action is None:
            raise LieAlgebraError(f"algebra {self.name!r} has no action")
        return self.action

    def bracket(self, u: Sequence[float], v: Sequence[float]) -> np.ndarray:
        return np.einsum("i,j,ijk->k", u, v, self.structure)


def structure_jacobi_residual(c: np.ndarray) -> float:
    """max |sum_m c^m_ij c^l_mk + c^m_jk c^l_mi + c^m_ki c^l_mj|"""
    c = np.asarray(c, dtype=float)
    term = np.einsum("ijm,mkl->ijkl", c, c)
    # cyclic permutations of (i, j, k)
    total = term + term.transpose((2, 0, 1, 3)) + term.transpose((1, 2, 0, 3))
    return float(np.max(np.abs(total))) if total.size else 0.0


def ad_matrix(algebra: LieAlgebraModel, u: Sequence[float]) -> np.ndarray:
    """Matrix of ad_u in the basis: (ad_u v)^k = M[k, j] v^j"""
    return np.einsum("i,ijk->kj", np.asarray(u, dtype=float), algebra.structure)


def cybe_residual(algebra: LieAlgebraModel) -> np.ndarray:
    """Components [r, r]^{ijk} = e^i([r e^j, r e^k]) + cyclic"""
    r = algebra.require_r()
    term = np.einsum("aj,bk,abi->ijk", r, r, algebra.structure)
    return term + term.transpose((2, 0, 1)) + term.transpose((1, 2, 0))


def im_r_basis(r: np.ndarray, tol: float = IM_R_TOL) -> np.ndarray:
    """Basis of Im r taken from the columns of r, as rows

    Columns are kept greedily while they raise the rank, so the basis is
    made of actual images r(e^j) rather than a rotated orthonormal frame.
    """
    r = np.asarray(r, dtype=float)
    scale = float(np.max(np.abs(r))) if r.size else 0.0
    basis: List[np.ndarray] = []
    if scale == 0.0:
        return np.zeros((0, r.shape[0]))
    for column in r.T:
        candidate = np.array(basis + [column])
        if np.linalg.matrix_rank(candidate, tol=tol * scale) > len(basis):
            basis.append(column)
    return np.array(basis)


@dataclass
class UnimodularityReport:
    """Closure and trace data for Im r"""

    basis: np.ndarray
    closure_residual: float
    traces: List[float]
    tolerance: float
    notes: List[str] = field(default_factory=list)

    @property
    def closed(self) -> bool:
        return self.closure_residual <= self.tolerance

    @property
    def unimodular(self) -> bool:
        return all(abs(t) <= self.tolerance for t in self.traces)

    @property
    def passed(self) -> bool:
        return self.closed and self.unimodular

    @property
    def max_trace(self) -> float:
        return max((abs(t) for t in self.traces), default=0.0)

    @property
    def name(self) -> str:
        return "unimodularity"

    @property
    def status(self) -> str:
        return PASS if self.passed else FAIL

    @property
    def max_residual(self) -> float:
        return max(self.closure_residual, self.max_trace)

    @property
    def worst_point(self) -> None:
        return None

    def to_dict(self) -> Dict:
        return {
            "name": self.name,
            "status": self.status,
            "pass": self.passed,
            "tolerance": self.tolerance,
            "max_residual": self.max_residual,
            "im_r_dimension": int(self.basis.shape[0]),
            "closure_residual": self.closure_residual,
            "traces": list(self.traces),
            "notes": list(self.notes),
        }


def unimodularity_check(algebra: LieAlgebraModel, tol: float = IM_R_TOL) -> UnimodularityReport:
    """Im r is a subalgebra and every ad_u restricted to it is traceless"""
    basis = im_r_basis(algebra.require_r(), tol)
    k = basis.shape[0]
    closure = 0.0
    traces: List[float] = []
    notes: List[str] = []
    for a in range(k):
        trace = 0.0
        for b in range(k):
            image = algebra.bracket(basis[a], basis[b])
            coefficients, *_ = np.linalg.lstsq(basis.T, image, rcond=None)
            closure = max(closure, float(np.linalg.norm(basis.T @ coefficients - image)))
            trace += float(coefficients[b])
        traces.append(trace)
    if closure > tol:
        notes.append("Im r is not closed under the bracket; r cannot solve the CYBE")
        logger.warning("Im r of %s is not a subalgebra (residual %.3e)", algebra.name, closure)
    if k == 0:
        notes.append("r = 0: Im r is trivial")
    return UnimodularityReport(basis=basis, closure_residual=closure, traces=traces, tolerance=tol, notes=notes)


# ----------------------------------------------------------------------
# actions on a chart
# ----------------------------------------------------------------------


def action_chart(algebra: LieAlgebraModel) -> ChartModel:
    """The action's chart with one named vector field per basis element"""
    fields = algebra.require_action()
    vectors = {name: comps for name, comps in zip(algebra.basis, fields)}
    return algebra.chart.with_fields(vectors=vectors)


def action_homomorphism_residual(
    algebra: LieAlgebraModel, grid: SampleGrid, tol: float = DEFAULT_TOLERANCE
) -> CheckReport:
    """max || [G(e_i), G(e_j)] - sum_k c^k_ij G(e_k) || over i < j and the grid"""
    fields = algebra.require_action()
    c = algebra.structure
    d = algebra.dim

    def residuals(fr: PointFrame) -> Dict[str, float]:
        jets = [fr.jets(comps) for comps in fields]
        worst = 0.0
        for i, j in itertools.combinations(range(d), 2):
            expected = sum(c[i, j, k] * jets[k].value for k in range(d))
            worst = max(worst, form_norm(lie_bracket(jets[i], jets[j]).value - expected))
        return {"homomorphism": worst}

    sweep = ResidualSweep("action_homomorphism", tol)
    sweep.run(algebra.chart, grid.points(), residuals)
    return sweep.finish()


def killing_action_reports(
    algebra: LieAlgebraModel, grid: SampleGrid, tol: float = DEFAULT_TOLERANCE
) -> List[CheckReport]:
    """check_killing_vector for every generator of the action"""
    chart = action_chart(algebra)
    return [check_killing_vector(chart, grid, tol, name) for name in algebra.basis]


def induced_bivector(algebra: LieAlgebraModel) -> ChartModel:
    """The action's chart carrying pi = G(r)

    ``pi^{ab} = sum_{i<j} r^{ij} (G(e_i)^a G(e_j)^b - G(e_i)^b G(e_j)^a)``
    """
    r = algebra.require_r()
    fields = algebra.require_action()
    chart = algebra.chart
    n = chart.dim
    pairs = [(i, j) for i, j in itertools.combinations(range(algebra.dim), 2) if r[i, j] != 0.0]
    pi = {}
    for a, b in itertools.combinations(range(n), 2):
        terms = []
        for i, j in pairs:
            terms.append((r[i, j], (fields[i][a], fields[j][b])))
            terms.append((-r[i, j], (fields[i][b], fields[j][a])))
        pi[(a, b)] = linear_combination(terms, chart.coord_names)
    return chart.with_pi(pi, name=f"{algebra.name}-induced")


def lie_poisson(algebra: LieAlgebraModel, coords: Optional[Sequence[str]] = None) -> ChartModel:
    """Linear Poisson tensor pi^{ij}(x) = sum_k c^k_ij x_k on the dual, Euclidean metric"""
    d = algebra.dim
    coords = tuple(coords) if coords else tuple(f"x{i + 1}" for i in range(d))
    if len(coords) != d:
        raise LieAlgebraError(f"{len(coords)} coordinates for a {d}-dimensional dual")
    variables = [variable_expr(k, coords) for k in range(d)]
    pi = {}
    for i, j in itertools.combinations(range(d), 2):
        terms = [(algebra.structure[i, j, k], (variables[k],)) for k in range(d)]
        pi[(i, j)] = linear_combination(terms, coords)
    return ChartModel.build(coords, pi=pi, name=f"{algebra.name}-lie-poisson")


# ----------------------------------------------------------------------
# end-to-end pipeline
# ----------------------------------------------------------------------

StageReport = Union[CheckReport, UnimodularityReport]


def _value_report(name: str, residual: float, tol: float) -> CheckReport:
    return CheckReport(name=name, tolerance=tol, max_residual=residual, status=PASS if residual <= tol else FAIL)


def lie_pipeline(
    algebra: LieAlgebraModel,
    grid: Optional[SampleGrid] = None,
    tol: float = DEFAULT_TOLERANCE,
    checks: Sequence[str] = ("jacobi", "unimodular", "killing_poisson"),
    rank_tol: float = DEFAULT_RANK_TOL,
) -> List[StageReport]:
    """Structure constants, CYBE, unimodularity, action, Killing generators, then G(r)

    Stages whose inputs are missing (no r, no action) are reported as skipped.
    The checks named in ``checks`` run on the induced bivector.
    """
    reports: List[StageReport] = [
        _value_report("structure_jacobi", structure_jacobi_residual(algebra.structure), JACOBI_TOL)
    ]
    if algebra.r is None:
        reports.append(skipped_report("cybe", tol, "no r-matrix"))
        reports.append(skipped_report("unimodularity", tol, "no r-matrix"))
    else:
        cybe = cybe_residual(algebra)
        reports.append(_value_report("cybe", float(np.max(np.abs(cybe))) if cybe.size else 0.0, tol))
        reports.append(unimodularity_check(algebra))

    if algebra.action is None or grid is None:
        reports.append(skipped_report("action_homomorphism", tol, "no action on a chart"))
        return reports
    reports.append(action_homomorphism_residual(algebra, grid, tol))
    reports.extend(killing_action_reports(algebra, grid, tol))
    if algebra.r is None:
        return reports

    induced = induced_bivector(algebra)
    logger.info("induced bivector on %s: %s", induced.coord_names, {k: str(v) for k, v in induced.pi.items()})
    for spec in checks:
        report = run_check(spec, induced, grid, tol, rank_tol)
        report.name = f"induced:{report.name}"
        reports.append(report)
    return reports
