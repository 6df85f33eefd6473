"""Second-order forward-mode jets (truncated multivariate Taylor arithmetic)."""
from typing import Iterable, List, Sequence, Tuple, Union
import numpy as np

Scalar = Union[float, int, np.floating]


class Jet:
    """
    Value, gradient and Hessian of a scalar carried through arithmetic.

    A jet built from `variable` represents the coordinate function u^i
    at a base point; every arithmetic operation propagates the first and
    second derivatives with respect to all seeded coordinates.
    """

    __slots__ = ("value", "grad", "hess")
    # ndarray binary ops must defer to the reflected Jet methods.
    __array_ufunc__ = None

    def __init__(self, value: float, grad: np.ndarray, hess: np.ndarray):
        self.value = float(value)
        self.grad = grad
        self.hess = hess

    @classmethod
    def variable(cls, value: float, index: int, dim: int) -> "Jet":
        """
        Create the coordinate jet u^index.

        Args:
            value: Coordinate value at the base point
            index: Which coordinate this jet represents
            dim: Number of seeded coordinates

        Returns:
            Jet with unit gradient along `index` and zero Hessian
        """
        grad = np.zeros(dim)
        grad[index] = 1.0
        return cls(value, grad, np.zeros((dim, dim)))

    @classmethod
    def constant(cls, value: float, dim: int) -> "Jet":
        return cls(value, np.zeros(dim), np.zeros((dim, dim)))

    @property
    def dim(self) -> int:
        return self.grad.shape[0]

    def compose(self, f0: float, f1: float, f2: float) -> "Jet":
        """Chain rule for a scalar function with derivatives f0, f1, f2 at self.value."""
        return Jet(
            f0,
            f1 * self.grad,
            f1 * self.hess + f2 * np.outer(self.grad, self.grad),
        )

    def __repr__(self):
        return f"Jet(value={self.value!r}, grad={self.grad!r})"

    # Arithmetic

    def __neg__(self):
        return Jet(-self.value, -self.grad, -self.hess)

    def __pos__(self):
        return self

    def __add__(self, other):
        if isinstance(other, Jet):
            return Jet(self.value + other.value, self.grad + other.grad, self.hess + other.hess)
        return Jet(self.value + other, self.grad, self.hess)

    def __radd__(self, other):
        return Jet(other + self.value, self.grad, self.hess)

    def __sub__(self, other):
        if isinstance(other, Jet):
            return Jet(self.value - other.value, self.grad - other.grad, self.hess - other.hess)
        return Jet(self.value - other, self.grad, self.hess)

    def __rsub__(self, other):
        return Jet(other - self.value, -self.grad, -self.hess)

    def __mul__(self, other):
        if isinstance(other, Jet):
            cross = np.outer(self.grad, other.grad)
            return Jet(
                self.value * other.value,
                self.value * other.grad + other.value * self.grad,
                self.value * other.hess + other.value * self.hess + cross + cross.T,
            )
        return Jet(self.value * other, self.grad * other, self.hess * other)

    def __rmul__(self, other):
        return Jet(other * self.value, other * self.grad, other * self.hess)

    def reciprocal(self) -> "Jet":
        x = self.value
        return self.compose(1.0 / x, -1.0 / x**2, 2.0 / x**3)

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.value / other, self.grad / other, self.hess / other)

    def __rtruediv__(self, other):
        return other * self.reciprocal()

    def __pow__(self, power):
        if isinstance(power, Jet):
            return exp(power * log(self))
        if power == 0:
            return Jet.constant(1.0, self.dim)
        if power == 1:
            return self
        if power == 2:
            return self * self
        x = self.value
        return self.compose(
            x**power,
            power * x ** (power - 1),
            power * (power - 1) * x ** (power - 2),
        )

    def __rpow__(self, base):
        return exp(self * np.log(base))

    def __abs__(self):
        return -self if self.value < 0 else self

    # Comparisons act on the value only

    def __lt__(self, other):
        return self.value < value_of(other)

    def __le__(self, other):
        return self.value <= value_of(other)

    def __gt__(self, other):
        return self.value > value_of(other)

    def __ge__(self, other):
        return self.value >= value_of(other)

    def __float__(self):
        return self.value


def sin(x):
    if isinstance(x, Jet):
        s, c = np.sin(x.value), np.cos(x.value)
        return x.compose(s, c, -s)
    return np.sin(x)


def cos(x):
    if isinstance(x, Jet):
        s, c = np.sin(x.value), np.cos(x.value)
        return x.compose(c, -s, -c)
    return np.cos(x)


def tan(x):
    if isinstance(x, Jet):
        t = np.tan(x.value)
        sec2 = 1.0 + t * t
        return x.compose(t, sec2, 2.0 * t * sec2)
    return np.tan(x)


def exp(x):
    if isinstance(x, Jet):
        e = np.exp(x.value)
        return x.compose(e, e, e)
    return np.exp(x)


def log(x):
    if isinstance(x, Jet):
        return x.compose(np.log(x.value), 1.0 / x.value, -1.0 / x.value**2)
    return np.log(x)


def sqrt(x):
    if isinstance(x, Jet):
        r = np.sqrt(x.value)
        return x.compose(r, 0.5 / r, -0.25 / (r * x.value))
    return np.sqrt(x)


def arctan(x):
    if isinstance(x, Jet):
        d = 1.0 / (1.0 + x.value**2)
        return x.compose(np.arctan(x.value), d, -2.0 * x.value * d * d)
    return np.arctan(x)


def value_of(x) -> float:
    return x.value if isinstance(x, Jet) else float(x)


def seed(coords: Sequence[float]) -> List[Jet]:
    """Seed one coordinate jet per coordinate of a base point."""
    dim = len(coords)
    return [Jet.variable(c, i, dim) for i, c in enumerate(coords)]


def unpack_vector(entries: Iterable, dim: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Split a sequence of jets (or plain constants) into arrays.

    Args:
        entries: Sequence of Jet or float components V^i
        dim: Number of seeded coordinates

    Returns:
        Tuple (value[i], grad[i, k], hess[i, k, m]) with grad[i, k] = d_k V^i
    """
    entries = list(entries)
    size = len(entries)
    value = np.zeros(size)
    grad = np.zeros((size, dim))
    hess = np.zeros((size, dim, dim))
    for i, entry in enumerate(entries):
        if isinstance(entry, Jet):
            value[i] = entry.value
            grad[i] = entry.grad
            hess[i] = entry.hess
        else:
            value[i] = float(entry)
    return value, grad, hess


def unpack_matrix(rows: Iterable[Iterable], dim: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Split a nested sequence of jets into (value[i, j], grad[i, j, k], hess[i, j, k, m]).
    """
    rows = [list(row) for row in rows]
    flat_value, flat_grad, flat_hess = unpack_vector([e for row in rows for e in row], dim)
    shape = (len(rows), len(rows[0]))
    return (
        flat_value.reshape(shape),
        flat_grad.reshape(shape + (dim,)),
        flat_hess.reshape(shape + (dim, dim)),
    )


def values(entries: Iterable) -> np.ndarray:
    """Plain values of a (possibly nested) sequence of jets or floats."""
    return np.array([[value_of(e) for e in row] if isinstance(row, (list, tuple, np.ndarray)) else value_of(row) for row in entries])
