"""
Shipped example documents

Each fixture is a document builder; ``emit`` writes it as JSON so it can be
checked with ``pkt check`` or ``pkt lie``.
"""

import logging
import math
import os
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .config import ChartConfig, LieAlgebraConfig
from .errors import SpecError

logger = logging.getLogger(__name__)

CHART, LIE = "chart", "lie"

XYZ = ["x", "y", "z"]
RADIUS2 = "x^2 + y^2 + z^2"


def _num(value: float) -> str:
    value = float(value)
    if value.is_integer():
        return str(int(value))
    return repr(value)


def _polynomial(terms: Sequence[Tuple[float, str]]) -> str:
    """Render ``[(coefficient, monomial), ...]`` as expression text"""
    text = ""
    for coefficient, monomial in terms:
        if coefficient == 0:
            continue
        sign = "-" if coefficient < 0 else "+"
        magnitude = abs(coefficient)
        body = monomial if magnitude == 1 and monomial else "*".join(filter(None, [_num(magnitude), monomial]))
        if not text:
            text = body if sign == "+" else f"-{body}"
        else:
            text += f" {sign} {body}"
    return text or "0"


def bivector_from_potential(fx: str, fy: str, fz: str) -> Dict[str, str]:
    """pi = f_z dx^dy - f_y dx^dz + f_x dy^dz, as a document ``pi`` map"""
    return {"1,2": fz, "1,3": f"-({fy})", "2,3": fx}


def quadratic_family(a: float = 1.0, b: float = 1.0, c: float = 1.0) -> Dict[str, Any]:
    """Degree-2 solutions of d<df,df> + lap(f) df = 0 and their bivectors

    f = (a+c)x^2 + (a+b)y^2 + (b+c)z^2 - 2 sqrt(bc) xy + 2 sqrt(ab) xz + 2 sqrt(ac) yz

    Raises:
        SpecError: a, b, c do not share a sign
    """
    if min(a, b, c) < 0 < max(a, b, c):
        raise SpecError(f"a, b, c must share a sign, got ({a}, {b}, {c})")
    sbc, sab, sac = math.sqrt(b * c), math.sqrt(a * b), math.sqrt(a * c)
    f = _polynomial(
        [
            (a + c, "x^2"), (a + b, "y^2"), (b + c, "z^2"),
            (-2 * sbc, "x*y"), (2 * sab, "x*z"), (2 * sac, "y*z"),
        ]
    )
    fx = _polynomial([(2 * (a + c), "x"), (-2 * sbc, "y"), (2 * sab, "z")])
    fy = _polynomial([(-2 * sbc, "x"), (2 * (a + b), "y"), (2 * sac, "z")])
    fz = _polynomial([(2 * sab, "x"), (2 * sac, "y"), (2 * (b + c), "z")])
    return {
        "name": "quadratic-family",
        "coords": XYZ,
        "pi": bivector_from_potential(fx, fy, fz),
        "scalars": {"f": f},
        "checks": ["jacobi", "unimodular", "killing_poisson", "kp3d", "equation_e:f"],
        "expect": "pass",
    }


def _constant_symplectic_r2() -> Dict[str, Any]:
    return {
        "name": "constant-symplectic-r2",
        "coords": ["x", "y"],
        "pi": {"1,2": "1"},
        "checks": ["jacobi", "unimodular", "killing_poisson", "symplectic_density", "parallel", "torsion", "metric_compat"],
        "expect": "pass",
    }


def _radial_r32() -> Dict[str, Any]:
    root = f"sqrt({RADIUS2})"
    return {
        "name": "radial-r32",
        "coords": XYZ,
        "pi": bivector_from_potential(f"3*x*{root}", f"3*y*{root}", f"3*z*{root}"),
        "scalars": {"f": f"({RADIUS2})^1.5"},
        "singular_centers": [[0, 0, 0]],
        "checks": ["jacobi", "unimodular", "kp3d", "equation_e:f"],
        "expect": "pass",
    }


def _so3(factor: str = "") -> Dict[str, str]:
    prefix = f"{factor}*" if factor else ""
    return {"1,2": f"{prefix}z", "1,3": f"-{prefix}y", "2,3": f"{prefix}x"}


def _sqrt_so3() -> Dict[str, Any]:
    return {
        "name": "sqrt-so3",
        "coords": XYZ,
        "pi": _so3(f"sqrt({RADIUS2})"),
        "scalars": {"f": RADIUS2},
        "singular_centers": [[0, 0, 0]],
        "checks": ["jacobi", "unimodular", "freg", "kp3d", "killing_poisson", "casimir:f", "dpi"],
        "expect": "pass",
    }


def _so3_plain() -> Dict[str, Any]:
    # unit points on the axes; the origin (rank 0) is dropped
    axes = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, 0, 0], [0, -1, 0], [0, 0, -1]]
    return {
        "name": "so3-plain",
        "coords": XYZ,
        "pi": _so3(),
        "scalars": {"f": RADIUS2},
        "grid": {"box": [-1, 1], "points_per_axis": 1, "extra_points": axes},
        "singular_centers": [[0, 0, 0]],
        "checks": ["jacobi", "unimodular", "freg", "kp3d", "dpi", "casimir:f"],
        "expect": "fail",
    }


def _nonpoisson() -> Dict[str, Any]:
    return {
        "name": "nonpoisson",
        "coords": XYZ,
        "pi": {"1,2": "z", "1,3": "x"},
        "checks": ["jacobi", "unimodular"],
        "expect": "fail",
    }


def _heisenberg_metric() -> Dict[str, str]:
    # dx^2 + dy^2 + (dz - y dx)^2
    return {"1,1": "1 + y^2", "1,3": "-y"}


def _heisenberg_kp() -> Dict[str, Any]:
    return {
        "name": "heisenberg-kp",
        "coords": XYZ,
        "metric": _heisenberg_metric(),
        "pi": {"1,3": "1"},
        "vectors": {"Y1": ["1", "0", "0"], "Y2": ["0", "1", "x"], "Y3": ["0", "0", "1"]},
        "checks": [
            "jacobi", "unimodular", "killing_poisson", "killing:Y1", "killing:Y2", "killing:Y3",
            "torsion", "metric_compat",
        ],
        "expect": "pass",
    }


def _liouville_r2() -> Dict[str, Any]:
    return {
        "name": "liouville-r2",
        "coords": ["x", "y"],
        "pi": {"1,2": "1"},
        "vectors": {"X": ["-x", "0"]},
        "checks": ["jacobi", "unimodular", "liouville:X", "liouville_identities:X:1"],
        "expect": "pass",
    }


def _heisenberg_algebra() -> Dict[str, Any]:
    return {
        "name": "heisenberg",
        "dim": 3,
        "basis": ["e1", "e2", "e3"],
        "brackets": {"1,2": {"3": 1}},
        "r": {"1,3": 1},
        "manifold": {"coords": XYZ, "metric": _heisenberg_metric()},
        "action": [["1", "0", "0"], ["0", "1", "x"], ["0", "0", "1"]],
    }


def _aff1_algebra() -> Dict[str, Any]:
    return {
        "name": "aff1",
        "dim": 2,
        "brackets": {"1,2": {"2": 1}},
        "r": {"1,2": 1},
    }


def _abelian_r2_algebra() -> Dict[str, Any]:
    return {
        "name": "abelian-r2",
        "dim": 2,
        "brackets": {},
        "r": {"1,2": 1},
        "manifold": {"coords": ["x", "y"]},
        "action": [["1", "0"], ["0", "1"]],
    }


@dataclass(frozen=True)
class Fixture:
    """A shipped document"""

    name: str
    kind: str
    expect: str
    description: str
    build: Callable[[], Dict[str, Any]]


FIXTURES: Dict[str, Fixture] = {
    fixture.name: fixture
    for fixture in (
        Fixture("constant-symplectic-r2", CHART, "pass", "constant symplectic pi on flat R^2", _constant_symplectic_r2),
        Fixture("quadratic-family", CHART, "pass", "pi from a degree-2 solution f (parameters a, b, c)", quadratic_family),
        Fixture("radial-r32", CHART, "pass", "pi from f = r^3, r the Euclidean norm", _radial_r32),
        Fixture("sqrt-so3", CHART, "pass", "r = |(x,y,z)| times the so(3) Lie-Poisson tensor", _sqrt_so3),
        Fixture("so3-plain", CHART, "fail", "so(3) Lie-Poisson tensor (not Killing-Poisson)", _so3_plain),
        Fixture("nonpoisson", CHART, "fail", "bivector failing the Jacobi identity", _nonpoisson),
        Fixture("heisenberg-kp", CHART, "pass", "d/dx ^ d/dz with a Heisenberg-invariant metric", _heisenberg_kp),
        Fixture("liouville-r2", CHART, "pass", "d/dx ^ d/dy with the Liouville field -x d/dx", _liouville_r2),
        Fixture("heisenberg", LIE, "pass", "h3 acting on R^3 with r = e1 ^ e3", _heisenberg_algebra),
        Fixture("aff1", LIE, "fail", "aff(1) with r = e1 ^ e2 (Im r not unimodular)", _aff1_algebra),
        Fixture("abelian-r2", LIE, "pass", "R^2 acting by translations with r = e1 ^ e2", _abelian_r2_algebra),
    )
}


def list_fixtures(kind: Optional[str] = CHART) -> List[Fixture]:
    """Fixtures of one kind (``chart`` or ``lie``), or all of them for ``None``"""
    return [f for f in FIXTURES.values() if kind is None or f.kind == kind]


def get_fixture(name: str) -> Fixture:
    if name not in FIXTURES:
        raise SpecError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}")
    return FIXTURES[name]


def fixture_document(name: str, abc: Optional[Sequence[float]] = None) -> Dict[str, Any]:
    """Document of a fixture; ``abc`` parameterises ``quadratic-family``"""
    fixture = get_fixture(name)
    if abc is not None:
        if name != "quadratic-family":
            raise SpecError("only quadratic-family takes a, b, c")
        if len(abc) != 3:
            raise SpecError(f"expected three parameters a, b, c, got {len(abc)}")
        return quadratic_family(*abc)
    return fixture.build()


def load_fixture(name: str, abc: Optional[Sequence[float]] = None):
    """Fixture as a ChartConfig or LieAlgebraConfig"""
    document = fixture_document(name, abc)
    if get_fixture(name).kind == LIE:
        return LieAlgebraConfig.from_dict(document, name)
    return ChartConfig.from_dict(document, name)


def emit(name: str, directory: str, abc: Optional[Sequence[float]] = None) -> str:
    """Write a fixture to ``<directory>/<name>.json``

    Returns:
        Path of the written file
    """
    config = load_fixture(name, abc)
    path = os.path.join(directory, f"{name}.json")
    config.save_config(path)
    logger.info("wrote %s", path)
    return path
