"""
Chart and Lie algebra documents
"""

import json
import logging
import os
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from .checks import SampleGrid
from .errors import SpecError
from .fields import ChartModel
from .liealg import LieAlgebraModel

logger = logging.getLogger(__name__)

def _load_json(config_path: str) -> Dict[str, Any]:
    if not os.path.exists(config_path):
        raise SpecError(f"document not found: {config_path}")
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            document = json.load(f)
    except json.JSONDecodeError as e:
        raise SpecError(f"{config_path} is not valid JSON: {e}") from e
    except OSError as e:
        raise SpecError(f"could not read {config_path}: {e}") from e
    if not isinstance(document, dict):
        raise SpecError(f"{config_path} must hold a JSON object")
    return document

def _save_json(document: Mapping[str, Any], config_path: str) -> None:
    directory = os.path.dirname(config_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(config_path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2)
        f.write("\n")

def _reject_unknown(document: Mapping[str, Any], allowed: Sequence[str], where: str) -> None:
    for key in document:
        if key not in allowed:
            raise SpecError(f"unknown key {key!r} in {where}; allowed: {', '.join(allowed)}")

def _index(text: str, n: int, what: str) -> int:
    try:
        i = int(str(text).strip())
    except ValueError:
        raise SpecError(f"{what} index {text!r} is not an integer") from None
    if not 1 <= i <= n:
        raise SpecError(f"{what} index {i} out of range 1..{n}")
    return i - 1

def _pair(key: str, n: int, what: str) -> Tuple[int, int]:
    parts = str(key).split(",")
    if len(parts) != 2:
        raise SpecError(f"{what} key {key!r} must look like \"i,j\"")
    return _index(parts[0], n, what), _index(parts[1], n, what)

def _components(value: Any, n: int, what: str) -> List[Any]:
    """Component list from either a list or an ``{"i": expr}`` map"""
    if isinstance(value, list):
        if len(value) != n:
            raise SpecError(f"{what} has {len(value)} components, chart has {n}")
        return list(value)
    if isinstance(value, dict):
        comps: List[Any] = [0.0] * n
        for key, expr in value.items():
            comps[_index(key, n, what)] = expr
        return comps
    raise SpecError(f"{what} must be a list or a map of components")

def _point(value: Any, n: int, what: str) -> Tuple[float, ...]:
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise SpecError(f"{what} must be a list of {n} numbers")
    try:
        return tuple(float(c) for c in value)
    except (TypeError, ValueError):
        raise SpecError(f"{what} must be a list of {n} numbers") from None

def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)

def _is_expr(value: Any) -> bool:
    return isinstance(value, str) or _is_number(value)

def _expr_map(document: Mapping[str, Any], key: str) -> None:
    value = document.get(key, {})
    if not isinstance(value, Mapping) or not all(_is_expr(v) for v in value.values()):
        raise SpecError(f"'{key}' must map keys to expressions (text or numbers)")

def _field_map(document: Mapping[str, Any], key: str) -> None:
    value = document.get(key, {})
    if not isinstance(value, Mapping):
        raise SpecError(f"'{key}' must map names to component lists or objects")
    for name, comps in value.items():
        items = comps.values() if isinstance(comps, Mapping) else comps
        if not isinstance(comps, (list, Mapping)) or not all(_is_expr(c) for c in items):
            raise SpecError(f"{key} entry {name!r} must be a list or an object of expressions")

def _number_list(value: Any, what: str) -> None:
    if not isinstance(value, list) or not all(_is_number(c) for c in value):
        raise SpecError(f"{what} must be a list of numbers")

def _check_grid(grid: Mapping[str, Any]) -> None:
    box = grid.get("box", [0.0, 0.0])
    flat = isinstance(box, list) and len(box) == 2 and all(_is_number(b) for b in box)
    paired = isinstance(box, list) and all(
        isinstance(b, list) and len(b) == 2 and all(_is_number(c) for c in b) for b in box
    )
    if not (flat or paired):
        raise SpecError("grid box must be [low, high] or a list of [low, high] pairs")
    count = grid.get("points_per_axis", 1)
    if not isinstance(count, int) or isinstance(count, bool):
        raise SpecError(f"points_per_axis must be an integer, got {count!r}")
    exclusions = grid.get("exclusions", [])
    if not isinstance(exclusions, list):
        raise SpecError("grid exclusions must be a list")
    for exclusion in exclusions:
        if not isinstance(exclusion, Mapping):
            raise SpecError("grid exclusions must be objects with 'center' and 'radius'")
        _number_list(exclusion.get("center"), "exclusion center")
        if not _is_number(exclusion.get("radius", 0.0)):
            raise SpecError("exclusion radius must be a number")
    extra = grid.get("extra_points", [])
    if not isinstance(extra, list):
        raise SpecError("grid extra_points must be a list")
    for point in extra:
        _number_list(point, "extra point")

class ChartConfig:
    """Chart document: coordinates, metric, bivector, named fields, grid and checks"""

    DEFAULT_TOLERANCE = 1e-8
    DEFAULT_POINTS_PER_AXIS = 5
    DEFAULT_BOX = (-2.0, 2.0)
    DEFAULT_EXCLUSION_RADIUS = 0.3
    DEFAULT_CHECKS = ["jacobi", "unimodular", "killing_poisson"]

    KEYS = (
        "name", "coords", "metric", "pi", "scalars", "vectors", "oneforms",
        "grid", "tolerance", "checks", "singular_centers", "expect",
    )
    GRID_KEYS = ("box", "points_per_axis", "exclusions", "extra_points")
    EXCLUSION_KEYS = ("center", "radius")

    def __init__(self, config_path: Optional[str] = None):
        """Initialize chart configuration

        Args:
            config_path: Path to a chart document (JSON)

        Raises:
            SpecError: the file is missing, unreadable or invalid
        """
        self.config_path = config_path
        self.document: Dict[str, Any] = {}

        if config_path:
            self.load_config(config_path)

    @classmethod
    def from_dict(cls, document: Mapping[str, Any], where: str = "chart document") -> "ChartConfig":
        config = cls()
        config._set(document, where)
        return config

    def _set(self, document: Mapping[str, Any], where: str) -> None:
        if not isinstance(document, Mapping):
            raise SpecError(f"{where} must be a JSON object")
        _reject_unknown(document, self.KEYS, where)
        if "coords" not in document:
            raise SpecError(f"{where} needs a 'coords' list")
        coords = document["coords"]
        if not isinstance(coords, list) or not all(isinstance(c, str) for c in coords):
            raise SpecError("'coords' must be a list of names")
        grid = document.get("grid", {})
        if not isinstance(grid, Mapping):
            raise SpecError("'grid' must be an object")
        _reject_unknown(grid, self.GRID_KEYS, "grid")
        exclusions = grid.get("exclusions", [])
        for exclusion in exclusions if isinstance(exclusions, list) else []:
            if isinstance(exclusion, Mapping):
                _reject_unknown(exclusion, self.EXCLUSION_KEYS, "grid exclusion")
        _check_grid(grid)
        centers = document.get("singular_centers", [])
        if not isinstance(centers, list):
            raise SpecError("'singular_centers' must be a list of points")
        for center in centers:
            _number_list(center, "singular center")
        for key in ("metric", "pi", "scalars"):
            _expr_map(document, key)
        for key in ("vectors", "oneforms"):
            _field_map(document, key)
        expect = document.get("expect")
        if expect not in (None, "pass", "fail"):
            raise SpecError(f"'expect' must be \"pass\" or \"fail\", got {expect!r}")
        self.document = dict(document)

    def load_config(self, config_path: str) -> None:
        """Load a chart document from a JSON file

        Args:
            config_path: Path to the document
        """
        self._set(_load_json(config_path), config_path)
        self.config_path = config_path
        logger.debug("loaded chart document %s", config_path)

    def save_config(self, config_path: str) -> None:
        """Save the chart document to a JSON file

        Args:
            config_path: Path where to save the document
        """
        _save_json(self.document, config_path)

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.document)

    @property
    def coords(self) -> List[str]:
        return list(self.document.get("coords", []))

    @property
    def name(self) -> str:
        if "name" in self.document:
            return str(self.document["name"])
        if self.config_path:
            return os.path.splitext(os.path.basename(self.config_path))[0]
        return "chart"

    def get_expect(self) -> Optional[str]:
        return self.document.get("expect")

    def to_model(self) -> ChartModel:
        """Build the ChartModel described by the document

        Returns:
            ChartModel with 0-based index keys

        Raises:
            SpecError: bad indices, duplicate entries or unparsable expressions
        """
        coords = self.coords
        n = len(coords)
        doc = self.document

        metric = {}
        for key, expr in doc.get("metric", {}).items():
            metric[_pair(key, n, "metric")] = expr

        pi = {}
        for key, expr in doc.get("pi", {}).items():
            i, j = _pair(key, n, "pi")
            pi[(i, j)] = expr

        vectors = {
            name: _components(value, n, f"vector {name!r}") for name, value in doc.get("vectors", {}).items()
        }
        oneforms = {
            name: _components(value, n, f"1-form {name!r}") for name, value in doc.get("oneforms", {}).items()
        }
        return ChartModel.build(
            coords,
            metric=metric,
            pi=pi,
            scalars=dict(doc.get("scalars", {})),
            vectors=vectors,
            oneforms=oneforms,
            name=self.name,
        )

    def to_grid(self, points_per_axis: Optional[int] = None) -> SampleGrid:
        """Build the sample grid, with an optional points-per-axis override

        ``singular_centers`` become exclusion balls of the default radius.
        """
        n = len(self.coords)
        grid = self.document.get("grid", {})

        box = grid.get("box", list(self.DEFAULT_BOX))
        if len(box) == 2 and all(isinstance(b, (int, float)) for b in box):
            bounds = tuple((float(box[0]), float(box[1])) for _ in range(n))
        elif len(box) == n and all(isinstance(b, (list, tuple)) and len(b) == 2 for b in box):
            bounds = tuple((float(lo), float(hi)) for lo, hi in box)
        else:
            raise SpecError(f"grid box must be [low, high] or one [low, high] per coordinate ({n})")

        exclusions = []
        for k, exclusion in enumerate(grid.get("exclusions", [])):
            center = _point(exclusion.get("center"), n, f"exclusion {k + 1} center")
            radius = float(exclusion.get("radius", self.DEFAULT_EXCLUSION_RADIUS))
            exclusions.append((center, radius))
        for k, center in enumerate(self.document.get("singular_centers", [])):
            exclusions.append((_point(center, n, f"singular center {k + 1}"), self.DEFAULT_EXCLUSION_RADIUS))

        extra = [_point(p, n, f"extra point {k + 1}") for k, p in enumerate(grid.get("extra_points", []))]
        count = points_per_axis if points_per_axis is not None else grid.get("points_per_axis", self.DEFAULT_POINTS_PER_AXIS)
        if not isinstance(count, int) or isinstance(count, bool):
            raise SpecError(f"points_per_axis must be an integer, got {count!r}")
        return SampleGrid(box=bounds, points_per_axis=count, exclusions=tuple(exclusions), extra_points=tuple(extra))

    def get_checks(self, override: Optional[Sequence[str]] = None) -> List[str]:
        """Check names to run; ``override`` (from the command line) wins"""
        if override:
            return list(override)
        checks = self.document.get("checks", self.DEFAULT_CHECKS)
        if not isinstance(checks, list) or not all(isinstance(c, str) for c in checks):
            raise SpecError("'checks' must be a list of check names")
        return list(checks)

    def get_tolerance(self, override: Optional[float] = None) -> float:
        tol = override if override is not None else self.document.get("tolerance", self.DEFAULT_TOLERANCE)
        try:
            tol = float(tol)
        except (TypeError, ValueError):
            raise SpecError(f"tolerance must be a number, got {tol!r}") from None
        if not tol > 0:
            raise SpecError(f"tolerance must be positive, got {tol}")
        return tol

class LieAlgebraConfig:
    """Lie algebra document: structure constants, r-matrix and an action on a chart"""

    KEYS = ("name", "dim", "basis", "brackets", "r", "manifold", "action")

    def __init__(self, config_path: Optional[str] = None):
        """Initialize Lie algebra configuration

        Args:
            config_path: Path to a Lie algebra document (JSON)
        """
        self.config_path = config_path
        self.document: Dict[str, Any] = {}
        self.manifold: Optional[ChartConfig] = None

        if config_path:
            self.load_config(config_path)

    @classmethod
    def from_dict(cls, document: Mapping[str, Any], where: str = "Lie algebra document") -> "LieAlgebraConfig":
        config = cls()
        config._set(document, where)
        return config

    def _set(self, document: Mapping[str, Any], where: str) -> None:
        if not isinstance(document, Mapping):
            raise SpecError(f"{where} must be a JSON object")
        _reject_unknown(document, self.KEYS, where)
        dim = document.get("dim")
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
            raise SpecError(f"'dim' must be a positive integer, got {dim!r}")
        basis = document.get("basis", [])
        if not isinstance(basis, list) or not all(isinstance(b, str) for b in basis):
            raise SpecError("'basis' must be a list of names")
        brackets = document.get("brackets", {})
        if not isinstance(brackets, Mapping):
            raise SpecError("'brackets' must map \"i,j\" to coefficient objects")
        for key, coefficients in brackets.items():
            if not isinstance(coefficients, Mapping) or not all(_is_number(c) for c in coefficients.values()):
                raise SpecError(f"bracket {key!r} must map basis indices to numeric coefficients")
        r = document.get("r", {})
        if not isinstance(r, Mapping) or not all(_is_number(v) for v in r.values()):
            raise SpecError("'r' must map \"i,j\" to numbers")
        action = document.get("action", [])
        if not isinstance(action, list):
            raise SpecError("'action' must be a list with one component list per basis element")
        for k, comps in enumerate(action):
            items = comps.values() if isinstance(comps, Mapping) else comps
            if not isinstance(comps, (list, Mapping)) or not all(_is_expr(c) for c in items):
                raise SpecError(f"action field {k + 1} must be a list or an object of expressions")
        manifold = None
        if "manifold" in document:
            if not isinstance(document["manifold"], Mapping):
                raise SpecError("'manifold' must be a chart document object")
            if "pi" in document["manifold"]:
                raise SpecError("the manifold of a Lie algebra document must not declare 'pi'")
            manifold = ChartConfig.from_dict(document["manifold"], "manifold")
        if "action" in document and manifold is None:
            raise SpecError("'action' needs a 'manifold'")
        self.document = dict(document)
        self.manifold = manifold

    def load_config(self, config_path: str) -> None:
        """Load a Lie algebra document from a JSON file

        Args:
            config_path: Path to the document
        """
        self._set(_load_json(config_path), config_path)
        self.config_path = config_path
        logger.debug("loaded Lie algebra document %s", config_path)

    def save_config(self, config_path: str) -> None:
        """Save the Lie algebra document to a JSON file

        Args:
            config_path: Path where to save the document
        """
        _save_json(self.document, config_path)

    def to_dict(self) -> Dict[str, Any]:
        return dict(self.document)

    @property
    def name(self) -> str:
        if "name" in self.document:
            return str(self.document["name"])
        if self.config_path:
            return os.path.splitext(os.path.basename(self.config_path))[0]
        return "algebra"

    def to_model(self) -> LieAlgebraModel:
        """Build the LieAlgebraModel described by the document

        Raises:
            SpecError: bad indices or component counts
            LieAlgebraError: structure constants or r inconsistent
        """
        doc = self.document
        d = doc["dim"]
        brackets = {}
        for key, coefficients in doc.get("brackets", {}).items():
            i, j = _pair(key, d, "bracket")
            if not isinstance(coefficients, Mapping):
                raise SpecError(f"bracket {key!r} must map basis indices to coefficients")
            brackets[(i, j)] = {_index(k, d, "bracket"): float(c) for k, c in coefficients.items()}

        r = None
        if "r" in doc:
            r = {_pair(key, d, "r"): float(value) for key, value in doc["r"].items()}

        chart = self.manifold.to_model() if self.manifold is not None else None
        action = None
        if "action" in doc:
            n = len(self.manifold.coords)
            action = [_components(comps, n, f"action field {k + 1}") for k, comps in enumerate(doc["action"])]

        basis = doc.get("basis", ())
        return LieAlgebraModel.build(d, brackets, r=r, chart=chart, action=action, basis=basis, name=self.name)
