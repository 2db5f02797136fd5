"""
Koszul bracket and the metric contravariant connection of (pi, g)

``D`` is assembled from the Koszul formula

    2<D_a b, c> = pi_#(a).<b,c> + pi_#(b).<a,c> - pi_#(c).<a,b>
                  + <[c,a], b> + <[c,b], a> + <[a,b], c>

evaluated against the coordinate covectors c = dx^k all at once, inside jet
arithmetic. The result is a jet, so D can be applied again (curvature) or
differentiated without any symbolic work.
"""

import itertools
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import RankAmbiguityError
from .fields import (
    Covector,
    PointFrame,
    _field,
    anchor,
    bivector_pair,
    cometric,
    covector_length,
    form_norm,
    lie_derivative_bivector,
    lie_derivative_oneform,
    raise_covector,
)
from .jet import Jet2, contract, values

logger = logging.getLogger(__name__)

DEFAULT_RANK_TOL = 1e-8


def koszul_bracket(fr: PointFrame, alpha: Covector, beta: Covector) -> Jet2:
    """[a, b]_pi = L_{pi_# a} b - L_{pi_# b} a - d(pi(a, b))

    Either argument may carry leading batch axes.
    """
    alpha, beta = _field(fr, alpha), _field(fr, beta)
    return (
        lie_derivative_oneform(anchor(fr, alpha), beta)
        - lie_derivative_oneform(anchor(fr, beta), alpha)
        - bivector_pair(fr, alpha, beta).d()
    )


def metric_D(fr: PointFrame, alpha: Covector, beta: Covector) -> Jet2:
    """D_alpha beta as a covector jet

    ``alpha`` may be a bare covector (D is tensorial in it); ``beta`` must
    carry at least first-order jets for the result to have a value.
    """
    alpha, beta = _field(fr, alpha), _field(fr, beta)
    gamma = fr.constant(np.eye(fr.n))  # row k is dx^k

    def along(covector: Jet2, scalars: Jet2) -> Jet2:
        # pi_#(covector) applied to a batch of scalar functions
        return contract("a,...a->...", anchor(fr, covector), scalars.d())

    rhs = (
        along(alpha, raise_covector(fr, beta))
        + along(beta, raise_covector(fr, alpha))
        - contract("kb,b->k", fr.pi, cometric(fr, alpha, beta).d())
        + contract("ij,...i,j->...", fr.ginv, koszul_bracket(fr, gamma, alpha), beta)
        + contract("ij,...i,j->...", fr.ginv, koszul_bracket(fr, gamma, beta), alpha)
        + raise_covector(fr, koszul_bracket(fr, alpha, beta))
    )
    return 0.5 * contract("jk,k->j", fr.g, rhs)


def curvature(fr: PointFrame, alpha: Covector, beta: Covector, gamma: Covector) -> np.ndarray:
    """K(a, b)c = D_a D_b c - D_b D_a c - D_{[a,b]} c

    All three fields need second-order jets.
    """
    alpha, beta, gamma = _field(fr, alpha), _field(fr, beta), _field(fr, gamma)
    k = (
        metric_D(fr, alpha, metric_D(fr, beta, gamma))
        - metric_D(fr, beta, metric_D(fr, alpha, gamma))
        - metric_D(fr, values(koszul_bracket(fr, alpha, beta)), gamma)
    )
    return values(k)


def _coordinate_D(fr: PointFrame) -> np.ndarray:
    """Table D[i, j] = D_{dx^i} dx^j (values)"""
    n = fr.n
    table = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            table[i, j] = values(metric_D(fr, fr.coordinate_covector(i), fr.coordinate_covector(j)))
    return table


def D_pi_tensor(fr: PointFrame) -> np.ndarray:
    """(D pi)(dx^i; dx^j, dx^k) for all coordinate triples"""
    table = _coordinate_D(fr)
    pi = fr.pi.value
    # pi_#(dx^i).pi^{jk} = pi^{ib} d_b pi^{jk}
    along = np.einsum("ib,jkb->ijk", pi, fr.pi.grad)
    return along - np.einsum("ijl,lk->ijk", table, pi) - np.einsum("jl,ikl->ijk", pi, table)


def D_pi_residual(fr: PointFrame) -> float:
    """max |(D pi)(a; b, c)| over coordinate covectors"""
    return float(np.max(np.abs(D_pi_tensor(fr))))


# ----------------------------------------------------------------------
# kernel of the anchor
# ----------------------------------------------------------------------


def kernel_split(fr: PointFrame, rank_tol: float = DEFAULT_RANK_TOL) -> Tuple[int, np.ndarray]:
    """Numerical rank of pi(p) and a basis (rows) of Ker pi_#

    Raises:
        RankAmbiguityError: a singular value lies within a decade above
            the threshold ``rank_tol * sigma_max``
    """
    _, s, vt = np.linalg.svd(fr.pi.value)
    smax = float(s[0]) if s.size else 0.0
    threshold = rank_tol * smax
    ambiguous = s[(s > threshold) & (s < 10.0 * threshold)]
    if ambiguous.size:
        raise RankAmbiguityError(s, threshold)
    kernel = vt[s <= threshold]
    return fr.n - kernel.shape[0], kernel


def numerical_rank(fr: PointFrame, rank_tol: float = DEFAULT_RANK_TOL) -> int:
    return kernel_split(fr, rank_tol)[0]


def _metric_norm(fr: PointFrame, covector) -> float:
    return covector_length(fr, values(covector))


def f_connection_residual(fr: PointFrame, rank_tol: float = DEFAULT_RANK_TOL) -> float:
    """max ||D_a dx^k||_g over a in Ker pi_#(p); 0 when the kernel is trivial"""
    _, kernel = kernel_split(fr, rank_tol)
    worst = 0.0
    for alpha in kernel:
        for k in range(fr.n):
            worst = max(worst, _metric_norm(fr, metric_D(fr, alpha, fr.coordinate_covector(k))))
    return worst


def formula1_residual(fr: PointFrame, alpha: Jet2, beta: Covector, gamma: Covector) -> float:
    """| L_{#a}pi(b, c) - <D_c a, b> + <D_b a, c> |"""
    beta, gamma = np.asarray(values(beta), dtype=float), np.asarray(values(gamma), dtype=float)
    lie = values(lie_derivative_bivector(fr, raise_covector(fr, alpha)))
    lhs = float(beta @ lie @ gamma)
    right = float(values(cometric(fr, metric_D(fr, gamma, alpha), beta)))
    left = float(values(cometric(fr, metric_D(fr, beta, alpha), gamma)))
    return abs(lhs - right + left)


def torsion_residual(fr: PointFrame, alpha: Covector, beta: Covector) -> float:
    """|| D_a b - D_b a - [a, b]_pi ||"""
    t = metric_D(fr, alpha, beta) - metric_D(fr, beta, alpha) - koszul_bracket(fr, alpha, beta)
    return form_norm(t)


def metric_compatibility_residual(fr: PointFrame, alpha: Covector, beta: Covector, gamma: Covector) -> float:
    """| pi_#(a).<b, c> - <D_a b, c> - <b, D_a c> |"""
    alpha, beta, gamma = _field(fr, alpha), _field(fr, beta), _field(fr, gamma)
    along = contract("a,a->", anchor(fr, alpha), cometric(fr, beta, gamma).d())
    rhs = cometric(fr, metric_D(fr, alpha, beta), gamma) + cometric(fr, beta, metric_D(fr, alpha, gamma))
    return abs(float(values(along) - values(rhs)))


def kernel_invariance_residual(fr: PointFrame, alpha: Jet2, beta: Covector) -> float:
    """|| pi_#(D_b a) || for a field a with values in Ker pi_#"""
    return form_norm(anchor(fr, metric_D(fr, beta, alpha)))


def kernel_orthogonality_residual(
    fr: PointFrame, alpha: Jet2, beta: Covector, rank_tol: float = DEFAULT_RANK_TOL
) -> float:
    """max |<D_b a, c>| over c in Ker pi_#(p), for a field a orthogonal to the kernel"""
    _, kernel = kernel_split(fr, rank_tol)
    if not kernel.shape[0]:
        return 0.0
    d = values(metric_D(fr, beta, alpha))
    return float(np.max(np.abs(kernel @ fr.ginv.value @ d)))


def basic_form_residuals(fr: PointFrame, alpha: Jet2) -> Dict[str, float]:
    """Quantities whose joint vanishing characterises basic 1-forms

    Returns a dict with

    * ``anchor``: ||pi_# a||
    * ``parallel``: max_k ||D_{dx^k} a||
    * ``poisson``: ||L_{#a} pi||
    * ``center``: max_k ||[a, dx^k]_pi||
    """
    n = fr.n
    parallel = max(_metric_norm(fr, metric_D(fr, fr.coordinate_covector(k), alpha)) for k in range(n))
    center = max(form_norm(koszul_bracket(fr, alpha, fr.coordinate_covector(k))) for k in range(n))
    return {
        "anchor": form_norm(anchor(fr, alpha)),
        "parallel": parallel,
        "poisson": form_norm(lie_derivative_bivector(fr, raise_covector(fr, alpha))),
        "center": center,
    }


def probe_fields(fr: PointFrame, extra: Optional[Sequence[Jet2]] = None) -> List[Jet2]:
    """Covector fields used to sample the connection identities

    The coordinate covectors, the non-closed field ``sum_k x^{k+1} dx^k``
    (indices mod n) and any caller-supplied fields.
    """
    n = fr.n
    fields = [fr.coordinate_covector(k) for k in range(n)]
    shifted = Jet2.stack([fr.coordinate_function((k + 1) % n) for k in range(n)])
    fields.append(shifted)
    fields.extend(extra or [])
    return fields


def connection_table(fr: PointFrame, fields: Sequence[Jet2]) -> np.ndarray:
    """Values of D_{f_a} f_b for every ordered pair of fields, indexed [a, b]"""
    m = len(fields)
    table = np.zeros((m, m, fr.n))
    for a in range(m):
        for b in range(m):
            table[a, b] = values(metric_D(fr, fields[a], fields[b]))
    return table


def torsion_sweep(fr: PointFrame, fields: Sequence[Jet2], table: Optional[np.ndarray] = None) -> float:
    """max over field pairs of the torsion residual"""
    table = connection_table(fr, fields) if table is None else table
    worst = 0.0
    for a, b in itertools.combinations(range(len(fields)), 2):
        bracket = values(koszul_bracket(fr, fields[a], fields[b]))
        worst = max(worst, form_norm(table[a, b] - table[b, a] - bracket))
    return worst


def compatibility_sweep(fr: PointFrame, fields: Sequence[Jet2], table: Optional[np.ndarray] = None) -> float:
    """max over field triples of the metric-compatibility residual"""
    table = connection_table(fr, fields) if table is None else table
    ginv = fr.ginv.value
    worst = 0.0
    m = len(fields)
    for a in range(m):
        direction = anchor(fr, fields[a])
        for b in range(m):
            for c in range(b, m):
                along = values(contract("a,a->", direction, cometric(fr, fields[b], fields[c]).d()))
                rhs = table[a, b] @ ginv @ values(fields[c]) + values(fields[b]) @ ginv @ table[a, c]
                worst = max(worst, abs(float(along - rhs)))
    return worst


def formula1_sweep(fr: PointFrame, fields: Sequence[Jet2]) -> float:
    """max | L_{#a}pi(dx^j, dx^k) - <D_k a, dx^j> + <D_j a, dx^k> | over the fields and j < k"""
    n = fr.n
    ginv = fr.ginv.value
    worst = 0.0
    for alpha in fields:
        lie = values(lie_derivative_bivector(fr, raise_covector(fr, alpha)))
        cols = [values(metric_D(fr, fr.coordinate_covector(j), alpha)) @ ginv for j in range(n)]
        for j, k in itertools.combinations(range(n), 2):
            # <D_k a, dx^j> - <D_j a, dx^k>
            rhs = cols[k][j] - cols[j][k]
            worst = max(worst, abs(float(lie[j, k] - rhs)))
    return worst
