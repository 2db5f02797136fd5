"""
Second-order jets: value, gradient and Hessian propagated through arithmetic

A ``Jet2`` carries a tensor of component values together with their first
and second partial derivatives with respect to the chart coordinates. Scalar
jets (shape ``()``) are what expression evaluation returns; tensor jets are
what the field operations build by contracting scalar jets with ``contract``.

Taking a derivative with ``d()`` consumes one order: a jet known to order 2
yields a jet known to order 1, whose own derivative is known to order 0
(value only). Mixed-order arithmetic truncates to the lowest order present,
so nested differential operators stay exact as long as the inputs carried
enough derivatives.
"""

import string
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import EvaluationError

Operand = Union["Jet2", float, np.ndarray]


class Jet2:
    """Truncated Taylor jet of a tensor of scalar functions at a point"""

    __slots__ = ("value", "grad", "hess")

    # numpy must defer to our reflected operators instead of broadcasting us
    __array_ufunc__ = None

    def __init__(self, value, grad=None, hess=None):
        """Initialize jet

        Args:
            value: Component values, shape S
            grad: First derivatives, shape S + (n,), or None for an order-0 jet
            hess: Second derivatives, shape S + (n, n), or None for order <= 1
        """
        self.value = np.asarray(value, dtype=float)
        self.grad = None if grad is None else np.asarray(grad, dtype=float)
        self.hess = None if (hess is None or grad is None) else np.asarray(hess, dtype=float)

    # ------------------------------------------------------------------
    # construction
    # ------------------------------------------------------------------

    @classmethod
    def constant(cls, value, n: int, order: int = 2) -> "Jet2":
        """Jet of a constant tensor (all derivatives zero)"""
        value = np.asarray(value, dtype=float)
        grad = np.zeros(value.shape + (n,)) if order >= 1 else None
        hess = np.zeros(value.shape + (n, n)) if order >= 2 else None
        return cls(value, grad, hess)

    @classmethod
    def variable(cls, point: Sequence[float], index: int) -> "Jet2":
        """Jet of the coordinate function x^index at ``point``"""
        n = len(point)
        grad = np.zeros(n)
        grad[index] = 1.0
        return cls(float(point[index]), grad, np.zeros((n, n)))

    @classmethod
    def stack(cls, jets: Sequence["Jet2"], axis: int = 0) -> "Jet2":
        """Stack jets of equal shape along a new leading tensor axis"""
        jets = list(jets)
        order = min(j.order for j in jets)
        value = np.stack([j.value for j in jets], axis=axis)
        grad = np.stack([j.grad for j in jets], axis=axis) if order >= 1 else None
        hess = np.stack([j.hess for j in jets], axis=axis) if order >= 2 else None
        return cls(value, grad, hess)

    # ------------------------------------------------------------------
    # properties
    # ------------------------------------------------------------------

    @property
    def order(self) -> int:
        if self.hess is not None:
            return 2
        if self.grad is not None:
            return 1
        return 0

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    @property
    def n(self) -> Optional[int]:
        """Chart dimension, unknown for order-0 jets"""
        return None if self.grad is None else self.grad.shape[-1]

    def __repr__(self) -> str:
        return f"Jet2(shape={self.shape}, order={self.order}, value={self.value!r})"

    # ------------------------------------------------------------------
    # structural operations
    # ------------------------------------------------------------------

    def truncate(self, order: int) -> "Jet2":
        """Drop derivatives above ``order``"""
        return Jet2(
            self.value,
            self.grad if order >= 1 else None,
            self.hess if order >= 2 else None,
        )

    def d(self) -> "Jet2":
        """Jet of the partial derivatives, indexed by a new trailing axis"""
        if self.grad is None:
            raise EvaluationError("derivative requested from a jet known only to order 0")
        return Jet2(self.grad, self.hess, None)

    def transpose(self, axes: Sequence[int]) -> "Jet2":
        axes = tuple(axes)
        k = self.ndim
        grad = None if self.grad is None else self.grad.transpose(axes + (k,))
        hess = None if self.hess is None else self.hess.transpose(axes + (k, k + 1))
        return Jet2(self.value.transpose(axes), grad, hess)

    def __getitem__(self, index) -> "Jet2":
        grad = None if self.grad is None else self.grad[index]
        hess = None if self.hess is None else self.hess[index]
        return Jet2(self.value[index], grad, hess)

    def broadcast_to(self, shape: Sequence[int]) -> "Jet2":
        shape = tuple(shape)
        if self.value.shape == shape:
            return self
        lead = (1,) * (len(shape) - self.ndim)

        def expand(arr):
            if arr is None:
                return None
            arr = arr.reshape(lead + arr.shape)
            return np.broadcast_to(arr, shape + arr.shape[len(shape):])

        return Jet2(np.broadcast_to(self.value, shape), expand(self.grad), expand(self.hess))

    # ------------------------------------------------------------------
    # arithmetic
    # ------------------------------------------------------------------

    def _coerce(self, other: Operand) -> "Jet2":
        if isinstance(other, Jet2):
            return other
        n = self.n if self.n is not None else 0
        return Jet2.constant(other, n, self.order)

    @staticmethod
    def _align(a: "Jet2", b: "Jet2") -> Tuple["Jet2", "Jet2", int]:
        shape = np.broadcast_shapes(a.shape, b.shape)
        order = min(a.order, b.order)
        return a.truncate(order).broadcast_to(shape), b.truncate(order).broadcast_to(shape), order

    def __neg__(self) -> "Jet2":
        return Jet2(
            -self.value,
            None if self.grad is None else -self.grad,
            None if self.hess is None else -self.hess,
        )

    def __pos__(self) -> "Jet2":
        return self

    def __add__(self, other: Operand) -> "Jet2":
        a, b, order = Jet2._align(self, self._coerce(other))
        return Jet2(
            a.value + b.value,
            a.grad + b.grad if order >= 1 else None,
            a.hess + b.hess if order >= 2 else None,
        )

    __radd__ = __add__

    def __sub__(self, other: Operand) -> "Jet2":
        return self + (-self._coerce(other))

    def __rsub__(self, other: Operand) -> "Jet2":
        return self._coerce(other) + (-self)

    def __mul__(self, other: Operand) -> "Jet2":
        if not isinstance(other, Jet2):
            c = np.asarray(other, dtype=float)
            return Jet2(
                self.value * c,
                None if self.grad is None else self.grad * c[..., None],
                None if self.hess is None else self.hess * c[..., None, None],
            )
        a, b, order = Jet2._align(self, other)
        value = a.value * b.value
        grad = hess = None
        if order >= 1:
            grad = a.grad * b.value[..., None] + a.value[..., None] * b.grad
        if order >= 2:
            cross = a.grad[..., :, None] * b.grad[..., None, :]
            hess = (
                a.hess * b.value[..., None, None]
                + a.value[..., None, None] * b.hess
                + (cross + np.swapaxes(cross, -1, -2))
            )
        return Jet2(value, grad, hess)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet2":
        if np.any(self.value == 0.0):
            raise EvaluationError("division by a jet with zero value")
        v = self.value
        return self.chain(1.0 / v, -1.0 / v ** 2, 2.0 / v ** 3)

    def __truediv__(self, other: Operand) -> "Jet2":
        if not isinstance(other, Jet2):
            c = np.asarray(other, dtype=float)
            if np.any(c == 0.0):
                raise EvaluationError("division of a jet by zero")
            return self * (1.0 / c)
        return self * other.reciprocal()

    def __rtruediv__(self, other: Operand) -> "Jet2":
        return self.reciprocal() * other

    def chain(self, f, df, ddf) -> "Jet2":
        """Compose with a scalar function given its value and two derivatives

        Args:
            f: phi(value)
            df: phi'(value)
            ddf: phi''(value)
        """
        f = np.asarray(f, dtype=float)
        df = np.asarray(df, dtype=float)
        ddf = np.asarray(ddf, dtype=float)
        grad = hess = None
        if self.grad is not None:
            grad = df[..., None] * self.grad
        if self.hess is not None:
            outer = self.grad[..., :, None] * self.grad[..., None, :]
            hess = df[..., None, None] * self.hess + ddf[..., None, None] * outer
        return Jet2(f, grad, hess)


def _free_letters(spec: str, count: int) -> str:
    letters = [c for c in string.ascii_uppercase if c not in spec]
    return "".join(letters[:count])


def contract(spec: str, *operands: Operand) -> Jet2:
    """Einstein summation over jets with the product rule

    ``spec`` follows ``numpy.einsum`` (explicit ``->`` output, ellipsis
    allowed, lowercase letters only). Operands that are not ``Jet2`` are
    treated as constants.
    """
    inputs, output = spec.split("->")
    terms = inputs.split(",")
    if len(terms) != len(operands):
        raise ValueError(f"spec {spec!r} expects {len(terms)} operands, got {len(operands)}")
    jets = [op if isinstance(op, Jet2) else None for op in operands]
    if all(j is None for j in jets):
        raise TypeError("contract needs at least one Jet2 operand")
    values = [op.value if isinstance(op, Jet2) else np.asarray(op, dtype=float) for op in operands]
    order = min(j.order for j in jets if j is not None)
    y, z = _free_letters(spec, 2)

    def term(indexed: Iterable[Tuple[int, str, np.ndarray]], suffix: str) -> np.ndarray:
        ts = list(terms)
        args = list(values)
        for i, extra, arr in indexed:
            ts[i] = ts[i] + extra
            args[i] = arr
        return np.einsum(",".join(ts) + "->" + output + suffix, *args)

    value = np.einsum(spec, *values)
    grad = hess = None
    if order >= 1:
        grad = sum(term([(i, y, j.grad)], y) for i, j in enumerate(jets) if j is not None)
    if order >= 2:
        hess = sum(term([(i, y + z, j.hess)], y + z) for i, j in enumerate(jets) if j is not None)
        active = [i for i, j in enumerate(jets) if j is not None]
        cross = 0
        for a_pos, a in enumerate(active):
            for b in active[a_pos + 1:]:
                cross = cross + term([(a, y, jets[a].grad), (b, z, jets[b].grad)], y + z)
        if not isinstance(cross, int):
            hess = hess + (cross + np.swapaxes(cross, -1, -2))
    return Jet2(value, grad, hess)


def values(x: Operand) -> np.ndarray:
    """Plain component values of a jet or constant"""
    return x.value if isinstance(x, Jet2) else np.asarray(x, dtype=float)
