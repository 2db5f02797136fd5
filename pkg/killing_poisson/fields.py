"""
Tensor fields on a coordinate chart

Components follow one set of conventions throughout:

* a q-vector Q is stored as a fully antisymmetric array ``Q[i1,...,iq]``;
  a k-form w as ``w[j1,...,jk]`` with ``w = (1/k!) w_J dx^J``;
* the anchor is ``(pi_# a)^b = pi^{ab} a_a``, so ``b(pi_# a) = pi(a, b)``;
* interior products contract leading slots with a 1/q! factor, which makes
  ``i_{X^Y} = i_Y o i_X``;
* the volume form is ``mu = sqrt(det g) dx^1 ^ ... ^ dx^n``;
* divergence contracts the covariant derivative on the first slot.

Every operation takes and returns ``Jet2`` tensors, so results can be
differentiated again as long as the inputs carried enough orders.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field, replace
from functools import cached_property, lru_cache
from typing import Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import DimensionError, MetricError, SpecError, UndeclaredFieldError
from .expr import Const, ScalarExpr, Unary, constant_expr, eval_jet2, parse
from .jet import Jet2, contract, values

logger = logging.getLogger(__name__)

ExprLike = Union[str, float, int, ScalarExpr]
Covector = Union[Jet2, np.ndarray, Sequence[float]]

_LETTERS = "abcdefgh"


def as_expr(value: ExprLike, coords: Sequence[str]) -> ScalarExpr:
    if isinstance(value, ScalarExpr):
        if tuple(value.coords) != tuple(coords):
            raise SpecError(f"expression {value} is bound to {value.coords}, expected {tuple(coords)}")
        return value
    if isinstance(value, (int, float)):
        return constant_expr(value, coords)
    return parse(str(value), coords)


def _is_zero(expr: ScalarExpr) -> bool:
    return isinstance(expr.root, Const) and expr.root.value == 0.0


@dataclass(frozen=True)
class ChartModel:
    """Metric, bivector and named fields on a single coordinate chart

    ``metric`` is the full symmetric matrix of expressions; ``pi`` holds only
    the entries ``(i, j)`` with ``i < j``, the others follow by antisymmetry.
    """

    coord_names: Tuple[str, ...]
    metric: Tuple[Tuple[ScalarExpr, ...], ...]
    pi: Mapping[Tuple[int, int], ScalarExpr] = field(default_factory=dict)
    scalars: Mapping[str, ScalarExpr] = field(default_factory=dict)
    vectors: Mapping[str, Tuple[ScalarExpr, ...]] = field(default_factory=dict)
    oneforms: Mapping[str, Tuple[ScalarExpr, ...]] = field(default_factory=dict)
    name: str = "chart"

    def __post_init__(self):
        n = len(self.coord_names)
        if n == 0:
            raise SpecError("a chart needs at least one coordinate")
        if len(self.metric) != n or any(len(row) != n for row in self.metric):
            raise SpecError(f"metric must be a {n}x{n} matrix")
        for i in range(n):
            for j in range(i + 1, n):
                if self.metric[i][j] is not self.metric[j][i] and (
                    self.metric[i][j].to_source() != self.metric[j][i].to_source()
                ):
                    raise SpecError(f"metric entries ({i}, {j}) and ({j}, {i}) differ")
        for (i, j) in self.pi:
            if not (0 <= i < j < n):
                raise SpecError(f"bivector entry ({i}, {j}) must satisfy 0 <= i < j < {n}")
        for kind, table in (("vector", self.vectors), ("1-form", self.oneforms)):
            for key, comps in table.items():
                if len(comps) != n:
                    raise SpecError(f"{kind} {key!r} has {len(comps)} components, chart has {n}")
        exprs = [e for row in self.metric for e in row]
        exprs += list(self.pi.values()) + list(self.scalars.values())
        exprs += [e for comps in self.vectors.values() for e in comps]
        exprs += [e for comps in self.oneforms.values() for e in comps]
        for e in exprs:
            if tuple(e.coords) != tuple(self.coord_names):
                raise SpecError(f"expression {e} is not bound to coordinates {self.coord_names}")

    @classmethod
    def build(
        cls,
        coords: Sequence[str],
        metric: Optional[Mapping[Tuple[int, int], ExprLike]] = None,
        pi: Optional[Mapping[Tuple[int, int], ExprLike]] = None,
        scalars: Optional[Mapping[str, ExprLike]] = None,
        vectors: Optional[Mapping[str, Sequence[ExprLike]]] = None,
        oneforms: Optional[Mapping[str, Sequence[ExprLike]]] = None,
        name: str = "chart",
    ) -> "ChartModel":
        """Build a chart from expression text with 0-based index keys

        Args:
            coords: Coordinate names
            metric: Entries ``(i, j) -> expr``; missing diagonal entries are 1,
                missing off-diagonal entries 0, ``(j, i)`` mirrors ``(i, j)``
            pi: Bivector entries ``(i, j) -> expr``; ``(j, i)`` is stored negated
            scalars: Named scalar fields
            vectors: Named vector fields (component lists)
            oneforms: Named 1-forms (component lists)
            name: Label used in reports

        Returns:
            ChartModel
        """
        coords = tuple(coords)
        n = len(coords)
        one, zero = constant_expr(1.0, coords), constant_expr(0.0, coords)
        rows = [[one if i == j else zero for j in range(n)] for i in range(n)]
        seen: Dict[Tuple[int, int], ScalarExpr] = {}
        for (i, j), value in (metric or {}).items():
            if not (0 <= i < n and 0 <= j < n):
                raise SpecError(f"metric index ({i}, {j}) out of range for dimension {n}")
            expr = as_expr(value, coords)
            key = (min(i, j), max(i, j))
            if key in seen and seen[key].to_source() != expr.to_source():
                raise SpecError(f"metric entries ({i}, {j}) and ({j}, {i}) disagree")
            seen[key] = expr
            rows[i][j] = rows[j][i] = expr

        bivector: Dict[Tuple[int, int], ScalarExpr] = {}
        for (i, j), value in (pi or {}).items():
            if i == j or not (0 <= i < n and 0 <= j < n):
                raise SpecError(f"bivector index ({i}, {j}) invalid for dimension {n}")
            expr = as_expr(value, coords)
            if i > j:
                i, j = j, i
                expr = ScalarExpr(Unary("neg", expr.root), coords)
            if (i, j) in bivector:
                raise SpecError(f"bivector entry ({i}, {j}) given twice")
            if not _is_zero(expr):
                bivector[(i, j)] = expr

        return cls(
            coord_names=coords,
            metric=tuple(tuple(row) for row in rows),
            pi=bivector,
            scalars={k: as_expr(v, coords) for k, v in (scalars or {}).items()},
            vectors={k: tuple(as_expr(c, coords) for c in v) for k, v in (vectors or {}).items()},
            oneforms={k: tuple(as_expr(c, coords) for c in v) for k, v in (oneforms or {}).items()},
            name=name,
        )

    @property
    def dim(self) -> int:
        return len(self.coord_names)

    def with_pi(self, pi: Mapping[Tuple[int, int], ExprLike], name: Optional[str] = None) -> "ChartModel":
        """Same chart and metric with another bivector"""
        bivector = {}
        for key, value in pi.items():
            expr = as_expr(value, self.coord_names)
            if not _is_zero(expr):
                bivector[key] = expr
        return replace(self, pi=bivector, name=name or self.name)

    def with_fields(self, **tables) -> "ChartModel":
        """Same chart with extra named scalars, vectors or 1-forms merged in"""
        updates = {}
        for kind in ("scalars", "vectors", "oneforms"):
            if kind in tables:
                merged = dict(getattr(self, kind))
                for key, value in tables[kind].items():
                    if kind == "scalars":
                        merged[key] = as_expr(value, self.coord_names)
                    else:
                        merged[key] = tuple(as_expr(c, self.coord_names) for c in value)
                updates[kind] = merged
        return replace(self, **updates)

    def scalar(self, name: str) -> ScalarExpr:
        if name not in self.scalars:
            raise UndeclaredFieldError(f"scalar {name!r} is not declared in chart {self.name!r}")
        return self.scalars[name]

    def vector(self, name: str) -> Tuple[ScalarExpr, ...]:
        if name not in self.vectors:
            raise UndeclaredFieldError(f"vector field {name!r} is not declared in chart {self.name!r}")
        return self.vectors[name]

    def oneform(self, name: str) -> Tuple[ScalarExpr, ...]:
        if name not in self.oneforms:
            raise UndeclaredFieldError(f"1-form {name!r} is not declared in chart {self.name!r}")
        return self.oneforms[name]

    def frame(self, point: Sequence[float]) -> "PointFrame":
        return PointFrame(self, point)


class PointFrame:
    """Everything about a chart evaluated at one point

    Jets of g, g^-1, sqrt(det g), pi and the Christoffel symbols are computed
    on first access and cached. Construction validates that g(p) is positive
    definite and not degenerate.
    """

    DEGENERACY_RATIO = 1e-12

    def __init__(self, model: ChartModel, point: Sequence[float]):
        """Initialize frame

        Args:
            model: Chart the frame belongs to
            point: Coordinates of the point

        Raises:
            DimensionError: point does not have ``model.dim`` coordinates
            MetricError: g(p) is not positive definite or is degenerate
        """
        self.model = model
        self.point = np.asarray(point, dtype=float)
        if self.point.shape != (model.dim,):
            raise DimensionError(f"point {tuple(self.point)} does not match dimension {model.dim}")
        self.n = model.dim
        self._check_metric()

    def __repr__(self) -> str:
        return f"PointFrame({self.model.name!r}, {tuple(self.point)})"

    # ------------------------------------------------------------------
    # evaluation helpers
    # ------------------------------------------------------------------

    def jet(self, expr: ScalarExpr) -> Jet2:
        return eval_jet2(expr, self.point)

    def jets(self, exprs: Sequence[ScalarExpr]) -> Jet2:
        return Jet2.stack([self.jet(e) for e in exprs])

    def scalar(self, name: str) -> Jet2:
        return self.jet(self.model.scalar(name))

    def vector(self, name: str) -> Jet2:
        return self.jets(self.model.vector(name))

    def oneform(self, name: str) -> Jet2:
        return self.jets(self.model.oneform(name))

    def constant(self, value) -> Jet2:
        """Constant-coefficient field with the given components"""
        return Jet2.constant(value, self.n)

    def coordinate_covector(self, k: int) -> Jet2:
        return self.constant(np.eye(self.n)[k])

    def coordinate_function(self, k: int) -> Jet2:
        return Jet2.variable(self.point, k)

    # ------------------------------------------------------------------
    # cached geometric data
    # ------------------------------------------------------------------

    @cached_property
    def g(self) -> Jet2:
        n = self.n
        value = np.zeros((n, n))
        grad = np.zeros((n, n, n))
        hess = np.zeros((n, n, n, n))
        for i in range(n):
            for j in range(i, n):
                jet = self.jet(self.model.metric[i][j])
                for a, b in {(i, j), (j, i)}:
                    value[a, b] = jet.value
                    grad[a, b] = jet.grad
                    hess[a, b] = jet.hess
        return Jet2(value, grad, hess)

    @cached_property
    def pi(self) -> Jet2:
        n = self.n
        value = np.zeros((n, n))
        grad = np.zeros((n, n, n))
        hess = np.zeros((n, n, n, n))
        for (i, j), expr in self.model.pi.items():
            jet = self.jet(expr)
            value[i, j], value[j, i] = jet.value, -jet.value
            grad[i, j], grad[j, i] = jet.grad, -jet.grad
            hess[i, j], hess[j, i] = jet.hess, -jet.hess
        return Jet2(value, grad, hess)

    def _check_metric(self) -> None:
        g = self.g.value
        scale = max(1.0, float(np.max(np.abs(g)))) ** self.n
        try:
            np.linalg.cholesky(g)
        except np.linalg.LinAlgError:
            raise MetricError(f"metric is not positive definite at {tuple(self.point)}") from None
        det = float(np.linalg.det(g))
        if det <= self.DEGENERACY_RATIO * scale:
            raise MetricError(f"metric is degenerate at {tuple(self.point)} (det g = {det:.3e})")
        ginv = np.linalg.inv(g)
        error = float(np.max(np.abs(g @ ginv - np.eye(self.n))))
        if error > 1e-12 * max(1.0, float(np.linalg.cond(g))):
            raise MetricError(f"metric inverse is inaccurate at {tuple(self.point)} ({error:.3e})")
        self._ginv_value = ginv

    @cached_property
    def ginv(self) -> Jet2:
        """Jet of the inverse metric g^{ij}"""
        G = self._ginv_value
        dg, ddg = self.g.grad, self.g.hess
        dG = -np.einsum("ik,kla,lj->ija", G, dg, G)
        twice = np.einsum("ik,klb,lm,mpa,pj->ijab", G, dg, G, dg, G)
        ddG = twice + np.swapaxes(twice, -1, -2) - np.einsum("ik,klab,lj->ijab", G, ddg, G)
        ddG = 0.5 * (ddG + np.swapaxes(ddG, -1, -2))
        return Jet2(G, dG, ddG)

    @cached_property
    def density(self) -> Jet2:
        """Jet of sqrt(det g)"""
        G = self._ginv_value
        dg, ddg = self.g.grad, self.g.hess
        _, logdet = np.linalg.slogdet(self.g.value)
        dlog = np.einsum("ij,jia->a", G, dg)
        ddlog = np.einsum("ij,jiab->ab", G, ddg) - np.einsum("ij,jka,kl,lib->ab", G, dg, G, dg)
        half = Jet2(0.5 * logdet, 0.5 * dlog, 0.5 * (ddlog + ddlog.T) / 2.0)
        e = math.exp(float(half.value))
        return half.chain(e, e, e)

    @cached_property
    def christoffel(self) -> Jet2:
        """Jet (order 1) of Gamma^k_{ij}, symmetric in (i, j)"""
        dg = self.g.d()
        # T_{ijl} = d_i g_{jl} + d_j g_{il} - d_l g_{ij}
        t = dg.transpose((2, 0, 1)) + dg.transpose((0, 2, 1)) - dg
        return 0.5 * contract("kl,ijl->kij", self.ginv, t)

    @cached_property
    def volume(self) -> Jet2:
        return self.density * levi_civita_symbol(self.n)


# ----------------------------------------------------------------------
# small helpers
# ----------------------------------------------------------------------


@lru_cache(maxsize=None)
def _permutations(k: int) -> Tuple[Tuple[Tuple[int, ...], int], ...]:
    """All permutations of range(k) with their signs"""
    result = []
    for perm in itertools.permutations(range(k)):
        inversions = sum(1 for a in range(k) for b in range(a + 1, k) if perm[a] > perm[b])
        result.append((perm, -1 if inversions % 2 else 1))
    return tuple(result)


@lru_cache(maxsize=None)
def _levi_civita(n: int) -> np.ndarray:
    eps = np.zeros((n,) * n)
    for perm, sign in _permutations(n):
        eps[perm] = sign
    eps.setflags(write=False)
    return eps


def levi_civita_symbol(n: int) -> np.ndarray:
    return _levi_civita(n)


def _field(fr: PointFrame, x: Covector) -> Jet2:
    return x if isinstance(x, Jet2) else fr.constant(np.asarray(x, dtype=float))


def form_norm(x) -> float:
    """Euclidean norm over independent components of an antisymmetric tensor

    For a k-form or k-vector only entries with strictly increasing indices
    are counted; scalars and vectors get the plain norm.
    """
    arr = values(x)
    if arr.ndim < 2:
        return float(np.linalg.norm(arr))
    idx = [c for c in itertools.combinations(range(arr.shape[0]), arr.ndim)]
    if not idx:
        return 0.0
    return float(np.linalg.norm([arr[c] for c in idx]))


def tensor_norm(x) -> float:
    """Euclidean norm over all components"""
    return float(np.linalg.norm(values(x)))


# ----------------------------------------------------------------------
# musical maps and pairings
# ----------------------------------------------------------------------


def anchor(fr: PointFrame, alpha: Covector) -> Jet2:
    """pi_#(alpha), batched over leading axes of ``alpha``"""
    return contract("ab,...a->...b", fr.pi, alpha)


def raise_covector(fr: PointFrame, alpha: Covector) -> Jet2:
    return contract("ij,...j->...i", fr.ginv, alpha)


def lower_vector(fr: PointFrame, x: Covector) -> Jet2:
    return contract("ij,...j->...i", fr.g, x)


def cometric(fr: PointFrame, alpha: Covector, beta: Covector) -> Jet2:
    """<alpha, beta> = g^{ij} alpha_i beta_j"""
    return contract("ij,...i,...j->...", fr.ginv, alpha, beta)


def bivector_pair(fr: PointFrame, alpha: Covector, beta: Covector) -> Jet2:
    """pi(alpha, beta) = pi^{ij} alpha_i beta_j"""
    return contract("ij,...i,...j->...", fr.pi, alpha, beta)


def covector_length(fr: PointFrame, alpha: Covector) -> float:
    """Length of a covector measured by the metric"""
    a = values(alpha)
    return float(np.sqrt(max(0.0, a @ fr.ginv.value @ a)))


def directional(x: Covector, f: Jet2) -> Jet2:
    """X(f) for a vector field X and scalar jets f (batched over f)"""
    return contract("k,...k->...", x, f.d())


# ----------------------------------------------------------------------
# brackets and Lie derivatives
# ----------------------------------------------------------------------


def jacobi_trivector(fr: PointFrame) -> Jet2:
    """Schouten bracket [pi, pi]

    ``[pi,pi]^{ijk} = 2 sum_l (pi^{il} d_l pi^{jk} + pi^{jl} d_l pi^{ki}
    + pi^{kl} d_l pi^{ij})``, so that ``[pi,pi](df,dg,dh)`` is twice the
    Jacobiator of {f, g, h}.
    """
    term = contract("il,jkl->ijk", fr.pi, fr.pi.d())
    return 2.0 * (term + term.transpose((2, 0, 1)) + term.transpose((1, 2, 0)))


def jacobiator(fr: PointFrame, f: Jet2, g: Jet2, h: Jet2) -> float:
    """{f,{g,h}} + {g,{h,f}} + {h,{f,g}} evaluated with jets"""

    def bracket(u: Jet2, v: Jet2) -> Jet2:
        return bivector_pair(fr, u.d(), v.d())

    total = bracket(f, bracket(g, h)) + bracket(g, bracket(h, f)) + bracket(h, bracket(f, g))
    return float(total.value)


def hamiltonian_field(fr: PointFrame, f: Jet2) -> Jet2:
    """H_f = pi_#(df), so H_f(h) = {f, h}"""
    return anchor(fr, f.d())


def lie_bracket(x: Jet2, y: Jet2) -> Jet2:
    """[X, Y]^i = X^k d_k Y^i - Y^k d_k X^i"""
    return contract("k,ik->i", x, y.d()) - contract("k,ik->i", y, x.d())


def lie_derivative_bivector(fr: PointFrame, x: Jet2, p: Optional[Jet2] = None) -> Jet2:
    """[X, P] = L_X P for a bivector P (default: pi)"""
    p = fr.pi if p is None else p
    dx = x.d()
    return (
        contract("k,ijk->ij", x, p.d())
        - contract("kj,ik->ij", p, dx)
        - contract("ik,jk->ij", p, dx)
    )


def lie_derivative_metric(fr: PointFrame, x: Jet2) -> Jet2:
    """L_X g; vanishes exactly for Killing fields"""
    dx = x.d()
    return (
        contract("k,ijk->ij", x, fr.g.d())
        + contract("kj,ki->ij", fr.g, dx)
        + contract("ik,kj->ij", fr.g, dx)
    )


def lie_derivative_oneform(x: Covector, beta: Jet2) -> Jet2:
    """L_X beta, batched over leading axes of both arguments"""
    return contract("...m,...lm->...l", x, beta.d()) + contract("...m,...ml->...l", beta, x.d())


def lie_derivative_form(x: Jet2, omega: Jet2) -> Jet2:
    """L_X w = d i_X w + i_X dw for a form of any degree"""
    if omega.ndim == 0:
        return directional(x, omega)
    return exterior_derivative(interior_product(x, omega)) + interior_product(x, exterior_derivative(omega))


# ----------------------------------------------------------------------
# forms
# ----------------------------------------------------------------------


def volume_form(fr: PointFrame) -> Jet2:
    return fr.volume


def riemannian_volume(fr: PointFrame) -> Jet2:
    """Density sqrt(det g) of the Riemannian volume"""
    return fr.density


def interior_product(q: Covector, omega: Jet2) -> Jet2:
    """i_Q w for a q-vector Q and a p-form w, p >= q

    ``(i_Q w)_K = (1/q!) Q^I w_{IK}``
    """
    q_arr = values(q)
    qdeg, pdeg = q_arr.ndim, omega.ndim
    if qdeg > pdeg:
        raise DimensionError(f"cannot contract a {qdeg}-vector into a {pdeg}-form")
    if qdeg + pdeg > len(_LETTERS):
        raise DimensionError("tensor degree too large")
    inner = _LETTERS[:qdeg]
    outer = _LETTERS[qdeg:pdeg]
    result = contract(f"{inner},{inner}{outer}->{outer}", q, omega)
    return result * (1.0 / math.factorial(qdeg))


def exterior_derivative(omega: Jet2) -> Jet2:
    """d w for a k-form; k = 0 gives the gradient"""
    k = omega.ndim
    partial = omega.d()
    result = None
    for a in range(k + 1):
        term = partial.transpose(list(range(a)) + [k] + list(range(a, k)))
        term = term if a % 2 == 0 else -term
        result = term if result is None else result + term
    return result


def exterior_derivative_oneform(alpha: Jet2) -> Jet2:
    """(d alpha)_{ij} = d_i alpha_j - d_j alpha_i"""
    if alpha.ndim != 1:
        raise DimensionError("expected a 1-form")
    return exterior_derivative(alpha)


@lru_cache(maxsize=None)
def _shuffles(p: int, q: int) -> Tuple[Tuple[Tuple[int, ...], int], ...]:
    """(p, q)-shuffles as transpose orders with their signs"""
    n = p + q
    result = []
    for chosen in itertools.combinations(range(n), p):
        rest = [j for j in range(n) if j not in chosen]
        perm = [0] * n
        for axis, j in enumerate(chosen):
            perm[j] = axis
        for axis, j in enumerate(rest):
            perm[j] = p + axis
        inversions = sum(1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b])
        result.append((tuple(perm), -1 if inversions % 2 else 1))
    return tuple(result)


def wedge(a: Jet2, b: Jet2) -> Jet2:
    """Wedge product of multivectors (or forms) of degrees p and q

    Both factors are antisymmetric, so the sum runs over (p, q)-shuffles.
    """
    p, q = a.ndim, b.ndim
    if p == 0 or q == 0:
        return a * b
    if p + q > len(_LETTERS):
        raise DimensionError("tensor degree too large")
    left, right = _LETTERS[:p], _LETTERS[p:p + q]
    product = contract(f"{left},{right}->{left}{right}", a, b)
    total = None
    for perm, sign in _shuffles(p, q):
        term = product.transpose(perm)
        term = term if sign > 0 else -term
        total = term if total is None else total + term
    return total


def wedge_power(fr: PointFrame, k: int) -> Jet2:
    """pi ^ ... ^ pi with k factors"""
    if k < 1:
        raise ValueError(f"wedge power must be positive, got {k}")
    if 2 * k > fr.n:
        raise DimensionError(f"wedge power {k} of a bivector vanishes in dimension {fr.n}")
    result = fr.pi
    for _ in range(k - 1):
        result = wedge(fr.pi, result)
    return result


# ----------------------------------------------------------------------
# Levi-Civita data
# ----------------------------------------------------------------------


def christoffels(fr: PointFrame) -> Jet2:
    return fr.christoffel


def divergence(fr: PointFrame, q: Jet2) -> Jet2:
    """Levi-Civita divergence of a q-vector, contracted on the first slot"""
    deg = q.ndim
    if deg < 1:
        raise DimensionError("divergence needs a field of degree >= 1")
    rest = _LETTERS[:deg - 1]
    gamma = fr.christoffel
    result = contract(f"k{rest}k->{rest}", q.d())
    result = result + contract(f"kkl,l{rest}->{rest}", gamma, q)
    for m, letter in enumerate(rest):
        slots = rest[:m] + "l" + rest[m + 1:]
        result = result + contract(f"{letter}kl,k{slots}->{rest}", gamma, q)
    return result


def covariant_derivative_bivector(fr: PointFrame, p: Optional[Jet2] = None) -> Jet2:
    """(nabla_k P)^{ij}, indexed [i, j, k]"""
    p = fr.pi if p is None else p
    gamma = fr.christoffel
    return p.d() + contract("ikl,lj->ijk", gamma, p) + contract("jkl,il->ijk", gamma, p)


# ----------------------------------------------------------------------
# identity residuals
# ----------------------------------------------------------------------


def volume_divergence_residual(fr: PointFrame, q: Jet2) -> float:
    """|| d(i_Q mu) + (-1)^q i_{div Q} mu ||"""
    mu = fr.volume
    deg = q.ndim
    lhs = exterior_derivative(interior_product(q, mu))
    rhs = interior_product(divergence(fr, q), mu) * (-((-1.0) ** deg))
    return form_norm(values(lhs) - values(rhs))


def hamiltonian_divergence_residual(fr: PointFrame, f: Jet2) -> float:
    """| df(div pi) + div H_f |"""
    div_pi = divergence(fr, fr.pi)
    lhs = float(np.dot(values(div_pi), values(f.grad)))
    rhs = float(values(divergence(fr, hamiltonian_field(fr, f))))
    return abs(lhs + rhs)


def hamiltonian_volume_residual(fr: PointFrame, f: Jet2) -> float:
    """|| L_{H_f} mu ||, zero for every f iff pi is unimodular for mu"""
    mu = fr.volume
    return form_norm(exterior_derivative(interior_product(hamiltonian_field(fr, f), mu)))


def schouten_volume_residual(fr: PointFrame) -> float:
    """|| i_{[pi,pi]} mu - d i_{pi^pi} mu + 2 i_pi d i_pi mu ||"""
    n = fr.n
    if n < 3:
        return 0.0
    mu = fr.volume
    lhs = values(interior_product(jacobi_trivector(fr), mu))
    rhs = -2.0 * values(interior_product(fr.pi, exterior_derivative(interior_product(fr.pi, mu))))
    if n >= 4:
        rhs = rhs + values(exterior_derivative(interior_product(wedge(fr.pi, fr.pi), mu)))
    return form_norm(lhs - rhs)


def lie_volume_residual(fr: PointFrame, x: Jet2) -> float:
    """|| i_{[X,pi]} mu - i_X d i_pi mu - d i_X i_pi mu + (div X) i_pi mu ||"""
    mu = fr.volume
    i_pi_mu = interior_product(fr.pi, mu)
    lhs = values(interior_product(lie_derivative_bivector(fr, x), mu))
    rhs = values(interior_product(x, exterior_derivative(i_pi_mu)))
    if fr.n >= 3:
        rhs = rhs + values(exterior_derivative(interior_product(x, i_pi_mu)))
    rhs = rhs - float(values(divergence(fr, x))) * values(i_pi_mu)
    return form_norm(lhs - rhs)


def surface_unimodular_agreement(
    model: ChartModel, points: Sequence[Sequence[float]], tol: float
) -> Tuple[bool, bool]:
    """On a surface, div pi = 0 everywhere iff i_pi mu is constant

    Returns:
        (divergence vanishes at every point, i_pi mu has zero gradient at every point)
    """
    if model.dim != 2:
        raise DimensionError("the surface criterion needs a 2-dimensional chart")
    div_zero = grad_zero = True
    for point in points:
        fr = model.frame(point)
        div_zero &= form_norm(divergence(fr, fr.pi)) <= tol
        grad_zero &= form_norm(exterior_derivative(interior_product(fr.pi, fr.volume))) <= tol
    logger.debug("surface criterion on %s: div=%s grad=%s", model.name, div_zero, grad_zero)
    return bool(div_zero), bool(grad_zero)
