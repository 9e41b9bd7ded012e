"""Order-m real tensors and the multilinear products used by the solver.

Two storage layouts are supported:

* ``"dense"``: a full ``(n,) * m`` numpy array.
* ``"symmetric"``: a map from sorted 0-based multi-indices to values; every
  permutation of a stored key carries the same value.

Indices are 0-based in Python and 1-based in the JSON entry-list format.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Tensor",
    "SignDiagonal",
    "SpectralEstimate",
    "unit_tensor",
    "apply_vec",
    "apply_mat",
    "jacobian_vec",
    "sign_diag_product",
    "sign_power",
    "abs_power",
    "spectral_radius_bounds",
    "random_symmetric",
]

DENSE = "dense"
SYMMETRIC = "symmetric"

# dense expansion is used for products below this many entries
_DENSE_LIMIT = 4_000_000


def _multiplicity(key: Sequence[int]) -> int:
    """Number of distinct permutations of a sorted multi-index."""
    out = math.factorial(len(key))
    for _, grp in itertools.groupby(key):
        out //= math.factorial(len(list(grp)))
    return out


class Tensor:
    """An immutable order-``m``, dimension-``n`` real tensor.

    Use :meth:`from_dense` or :meth:`from_entries` rather than calling the
    constructor directly.
    """

    def __init__(self, order: int, dim: int, layout: str, array=None, sym=None):
        if order < 2:
            raise ValueError(f"tensor order must be >= 2, got {order}")
        if dim < 1:
            raise ValueError(f"tensor dimension must be >= 1, got {dim}")
        if layout not in (DENSE, SYMMETRIC):
            raise ValueError(f"unknown layout {layout!r}")
        self.order = int(order)
        self.dim = int(dim)
        self.layout = layout
        self._array = array
        self._sym = sym

    # -- construction -------------------------------------------------------

    @classmethod
    def from_dense(cls, array) -> "Tensor":
        arr = np.array(array, dtype=float)
        if arr.ndim < 2 or len(set(arr.shape)) != 1:
            raise ValueError(f"dense tensor must be a cube with ndim >= 2, got shape {arr.shape}")
        arr.setflags(write=False)
        return cls(arr.ndim, arr.shape[0], DENSE, array=arr)

    @classmethod
    def from_entries(
        cls,
        order: int,
        dim: int,
        entries: Mapping[tuple, float] | Iterable[tuple[tuple, float]],
        symmetric: bool = False,
    ) -> "Tensor":
        """Build a tensor from ``{0-based index tuple: value}``.

        With ``symmetric=True`` every key must be sorted and stands for all of
        its permutations; otherwise the result is dense and unlisted entries
        are zero.
        """
        items = entries.items() if isinstance(entries, Mapping) else entries
        seen: dict[tuple, float] = {}
        for idx, value in items:
            idx = tuple(int(i) for i in idx)
            if len(idx) != order:
                raise ValueError(f"index {idx} does not have {order} components")
            if any(i < 0 or i >= dim for i in idx):
                raise ValueError(f"index {idx} out of range for dimension {dim}")
            if symmetric and list(idx) != sorted(idx):
                raise ValueError(f"symmetric entry index {idx} is not sorted")
            if idx in seen:
                raise ValueError(f"duplicate entry index {idx}")
            seen[idx] = float(value)
        if symmetric:
            keys = sorted(k for k, v in seen.items() if v != 0.0)
            return cls._from_sym_dict(order, dim, {k: seen[k] for k in keys})
        arr = np.zeros((dim,) * order)
        for idx, value in seen.items():
            arr[idx] = value
        arr.setflags(write=False)
        return cls(order, dim, DENSE, array=arr)

    @classmethod
    def _from_sym_dict(cls, order, dim, sym: dict) -> "Tensor":
        return cls(order, dim, SYMMETRIC, sym=dict(sym))

    @classmethod
    def zeros(cls, order: int, dim: int) -> "Tensor":
        return cls._from_sym_dict(order, dim, {})

    # -- views ----------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.dim,) * self.order

    @cached_property
    def dense(self) -> np.ndarray:
        """Full array view (read-only); expanded on first use for symmetric storage."""
        if self.layout == DENSE:
            return self._array
        arr = np.zeros(self.shape)
        keys, values = self._sym_arrays
        if len(values):
            for perm in set(itertools.permutations(range(self.order))):
                arr[tuple(keys[:, list(perm)].T)] = values
        arr.setflags(write=False)
        return arr

    @cached_property
    def _sym_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        keys = np.array(list(self._sym.keys()), dtype=np.intp).reshape(-1, self.order)
        values = np.array(list(self._sym.values()), dtype=float)
        return keys, values

    @cached_property
    def _sym_weights(self) -> np.ndarray:
        # value times permutation multiplicity, per stored key
        keys, values = self._sym_arrays
        mult = np.array([_multiplicity(k) for k in keys.tolist()], dtype=float)
        return values * mult

    @cached_property
    def is_symmetric(self) -> bool:
        if self.layout == SYMMETRIC:
            return True
        arr = self._array
        if self.order == 2:
            return bool(np.array_equal(arr, arr.T))
        # a transposition and a full cycle generate the symmetric group
        swap = np.swapaxes(arr, 0, 1)
        cycle = np.moveaxis(arr, 0, -1)
        return bool(np.array_equal(arr, swap) and np.array_equal(arr, cycle))

    def to_dense(self) -> "Tensor":
        """Return the same tensor in dense layout."""
        if self.layout == DENSE:
            return self
        return Tensor(self.order, self.dim, DENSE, array=self.dense)

    def to_symmetric(self) -> "Tensor":
        """Collapse a permutation-invariant dense tensor to sorted-key storage."""
        if self.layout == SYMMETRIC:
            return self
        if not self.is_symmetric:
            raise ValueError("tensor is not symmetric; cannot compress")
        sym = {}
        for key in itertools.combinations_with_replacement(range(self.dim), self.order):
            v = float(self._array[key])
            if v != 0.0:
                sym[key] = v
        return Tensor._from_sym_dict(self.order, self.dim, sym)

    def entries(self) -> dict[tuple, float]:
        """Nonzero stored entries, 0-based. Sorted keys only for symmetric layout."""
        if self.layout == SYMMETRIC:
            return dict(self._sym)
        idx = np.argwhere(self._array != 0.0)
        return {tuple(int(i) for i in row): float(self._array[tuple(row)]) for row in idx}

    def __getitem__(self, idx) -> float:
        idx = tuple(idx)
        if self.layout == SYMMETRIC:
            return self._sym.get(tuple(sorted(idx)), 0.0)
        return float(self._array[idx])

    def diagonal(self) -> np.ndarray:
        """Entries t_{i...i} for i = 0..n-1."""
        return np.array([self[(i,) * self.order] for i in range(self.dim)])

    def is_nonnegative(self) -> bool:
        if self.layout == SYMMETRIC:
            return all(v >= 0.0 for v in self._sym.values())
        return bool(np.all(self._array >= 0.0))

    # -- arithmetic -----------------------------------------------------------

    def _check_compatible(self, other: "Tensor") -> None:
        if (self.order, self.dim) != (other.order, other.dim):
            raise ValueError(
                f"tensor shapes differ: T({self.order},{self.dim}) vs T({other.order},{other.dim})"
            )

    def __add__(self, other: "Tensor") -> "Tensor":
        if not isinstance(other, Tensor):
            return NotImplemented
        self._check_compatible(other)
        if self.layout == SYMMETRIC and other.layout == SYMMETRIC:
            sym = dict(self._sym)
            for k, v in other._sym.items():
                sym[k] = sym.get(k, 0.0) + v
            return Tensor._from_sym_dict(self.order, self.dim, {k: v for k, v in sym.items() if v != 0.0})
        return Tensor.from_dense(self.dense + other.dense)

    def __mul__(self, scalar: float) -> "Tensor":
        scalar = float(scalar)
        if self.layout == SYMMETRIC:
            sym = {k: scalar * v for k, v in self._sym.items() if scalar * v != 0.0}
            return Tensor._from_sym_dict(self.order, self.dim, sym)
        return Tensor.from_dense(scalar * self._array)

    __rmul__ = __mul__

    def __neg__(self) -> "Tensor":
        return self * -1.0

    def __sub__(self, other: "Tensor") -> "Tensor":
        if not isinstance(other, Tensor):
            return NotImplemented
        return self + (-other)

    def allclose(self, other: "Tensor", atol: float = 0.0, rtol: float = 0.0) -> bool:
        self._check_compatible(other)
        return bool(np.allclose(self.dense, other.dense, atol=atol, rtol=rtol))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tensor):
            return NotImplemented
        if (self.order, self.dim) != (other.order, other.dim):
            return False
        if self.layout == SYMMETRIC and other.layout == SYMMETRIC:
            return self._sym == other._sym
        return bool(np.array_equal(self.dense, other.dense))

    __hash__ = None

    def __repr__(self) -> str:
        nnz = len(self._sym) if self.layout == SYMMETRIC else int(np.count_nonzero(self._array))
        return f"Tensor(order={self.order}, dim={self.dim}, layout={self.layout!r}, nnz={nnz})"

    # -- JSON entry-list format ----------------------------------------------

    def to_json_dict(self) -> dict:
        symmetric = self.layout == SYMMETRIC
        items = sorted(self.entries().items())
        return {
            "order": self.order,
            "dim": self.dim,
            "symmetric": symmetric,
            "entries": [{"idx": [i + 1 for i in k], "value": v} for k, v in items],
        }

    @classmethod
    def from_json_dict(cls, data: Mapping) -> "Tensor":
        try:
            order = int(data["order"])
            dim = int(data["dim"])
            symmetric = bool(data.get("symmetric", False))
            raw = data["entries"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed tensor JSON: {exc}") from exc
        items = []
        for e in raw:
            try:
                idx = tuple(int(i) - 1 for i in e["idx"])
                value = float(e["value"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"malformed tensor entry {e!r}") from exc
            items.append((idx, value))
        return cls.from_entries(order, dim, items, symmetric=symmetric)


@dataclass(frozen=True)
class SignDiagonal:
    """Diagonal tensor whose diagonal entries are all +1 or -1."""

    signs: tuple[int, ...]

    def __post_init__(self):
        signs = tuple(int(s) for s in self.signs)
        if any(s not in (1, -1) for s in signs):
            raise ValueError(f"sign-diagonal entries must be +1 or -1, got {self.signs}")
        object.__setattr__(self, "signs", signs)

    @property
    def dim(self) -> int:
        return len(self.signs)

    def as_array(self) -> np.ndarray:
        return np.array(self.signs, dtype=float)

    @classmethod
    def from_index(cls, k: int, n: int) -> "SignDiagonal":
        """The ``k``-th of the ``2**n`` sign patterns; bit i set means entry i is -1."""
        return cls(tuple(-1 if (k >> i) & 1 else 1 for i in range(n)))

    @classmethod
    def of(cls, x) -> "SignDiagonal":
        """Signs of ``x``, with zero components mapped to +1."""
        return cls(tuple(-1 if v < 0 else 1 for v in np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class SpectralEstimate:
    upper_bound: float
    power_estimate: float | None
    iterations_used: int
    converged: bool
    power_lower: float | None = None


def unit_tensor(m: int, n: int) -> Tensor:
    """Order-m unit tensor: ones exactly on the diagonal (i, ..., i)."""
    return Tensor._from_sym_dict(m, n, {(i,) * m: 1.0 for i in range(n)})


def random_symmetric(m: int, n: int, rng: np.random.Generator, low=0.0, high=1.0) -> Tensor:
    """Symmetric tensor with one uniform draw per sorted multi-index."""
    keys = list(itertools.combinations_with_replacement(range(n), m))
    values = rng.uniform(low, high, size=len(keys))
    return Tensor._from_sym_dict(m, n, dict(zip(keys, values.tolist())))


def _as_vector(T: Tensor, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (T.dim,):
        raise ValueError(f"vector of length {T.dim} expected, got shape {x.shape}")
    return x


def _use_dense(T: Tensor, route: str) -> bool:
    if route == "dense" or T.layout == DENSE:
        return True
    if route == "compressed":
        return False
    return T.dim ** T.order <= _DENSE_LIMIT


def _contract(arr: np.ndarray, x: np.ndarray, times: int) -> np.ndarray:
    for _ in range(times):
        arr = arr @ x
    return arr


def apply_vec(T: Tensor, x, route: str = "auto") -> np.ndarray:
    """Tensor-vector product ``T x^{m-1}``.

    ``(T x^{m-1})_i = sum_{i2..im} t_{i i2 .. im} x_{i2} ... x_{im}``.

    ``route`` selects ``"dense"`` contraction or the ``"compressed"``
    sorted-key sum for symmetric tensors; ``"auto"`` picks dense for small
    tensors.
    """
    x = _as_vector(T, x)
    if _use_dense(T, route):
        return _contract(T.dense, x, T.order - 1)
    keys, _ = T._sym_arrays
    w = T._sym_weights / T.order
    out = np.zeros(T.dim)
    if not len(w):
        return out
    xk = x[keys]
    m = T.order
    for p in range(m):
        others = np.prod(np.delete(xk, p, axis=1), axis=1)
        np.add.at(out, keys[:, p], w * others)
    return out


def apply_mat(T: Tensor, x, route: str = "auto") -> np.ndarray:
    """The matrix ``T x^{m-2}`` with entries ``sum t_{i j i3..im} x_{i3}...x_{im}``.

    For ``m == 2`` this is the tensor's matrix itself.
    """
    x = _as_vector(T, x)
    if _use_dense(T, route):
        return np.array(_contract(T.dense, x, T.order - 2))
    keys, _ = T._sym_arrays
    m = T.order
    w = T._sym_weights / (m * (m - 1))
    out = np.zeros((T.dim, T.dim))
    if not len(w):
        return out
    xk = x[keys]
    for p, q in itertools.permutations(range(m), 2):
        others = np.prod(np.delete(xk, [p, q], axis=1), axis=1)
        np.add.at(out, (keys[:, p], keys[:, q]), w * others)
    return out


def jacobian_vec(T: Tensor, x, convention: str = "true", route: str = "auto") -> np.ndarray:
    """Jacobian of ``x -> T x^{m-1}``.

    Parameters
    ----------
    convention : {"true", "literal"}
        ``"true"`` is the exact derivative, a sum over the m-1 contracted
        modes; for symmetric ``T`` it equals ``(m-1) * apply_mat(T, x)``.
        ``"literal"`` returns ``apply_mat(T, x)`` with no mode factor.
    """
    if convention == "literal":
        return apply_mat(T, x, route=route)
    if convention != "true":
        raise ValueError(f"unknown Jacobian convention {convention!r}")
    if T.is_symmetric:
        return (T.order - 1) * apply_mat(T, x, route=route)
    x = _as_vector(T, x)
    arr = T.dense
    out = np.zeros((T.dim, T.dim))
    for k in range(1, T.order):
        out += _contract(np.moveaxis(arr, k, 1), x, T.order - 2)
    return out


def sign_diag_product(C: Tensor, D: SignDiagonal) -> Tensor:
    """Product ``C D``: entry ``c_{i1..im} d_{i2} ... d_{im}`` (even order only).

    The (m-1)-th root of a ±1 diagonal entry is the entry itself when m is even.
    """
    if C.order % 2:
        raise ValueError(f"sign-diagonal product needs even order, got m={C.order}")
    if D.dim != C.dim:
        raise ValueError(f"sign diagonal has dimension {D.dim}, tensor has {C.dim}")
    arr = np.array(C.dense)
    d = D.as_array()
    for axis in range(1, C.order):
        shape = [1] * C.order
        shape[axis] = C.dim
        arr = arr * d.reshape(shape)
    return Tensor.from_dense(arr)


def sign_power(x, k: int) -> np.ndarray:
    """Componentwise ``x_i ** k``.

    Formed as ``sign(x_i)^k |x_i|^k`` so that it agrees bit for bit with
    :func:`abs_power` up to sign; a plain ``x ** k`` need not.
    """
    x = np.asarray(x, dtype=float)
    out = np.abs(x) ** k
    return np.sign(x) * out if k % 2 else out


def abs_power(x, k: int) -> np.ndarray:
    """Componentwise ``|x_i| ** k``."""
    return np.abs(np.asarray(x, dtype=float)) ** k


def spectral_radius_bounds(B: Tensor, max_iters: int = 500, tol: float = 1e-10) -> SpectralEstimate:
    """Bounds on the spectral radius of a nonnegative tensor.

    ``upper_bound`` is ``max_i (B e^{m-1})_i`` for the all-ones ``e``. The
    power estimate iterates ``x <- (B x^{m-1})^{[1/(m-1)]}`` and tracks the
    min/max of ``(B x^{m-1})_i / x_i^{m-1}``; the smallest max seen is
    reported, so it never exceeds ``upper_bound``. No irreducibility check is
    made, so the estimate is heuristic.
    """
    if not B.is_nonnegative():
        raise ValueError("spectral radius bounds require a nonnegative tensor")
    m, n = B.order, B.dim
    e = np.ones(n)
    upper = float(np.max(apply_vec(B, e)))
    if upper == 0.0:
        return SpectralEstimate(0.0, 0.0, 0, True, 0.0)
    if max_iters <= 0:
        return SpectralEstimate(upper, None, 0, False)
    x = e
    best_hi, best_lo = math.inf, 0.0
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        y = apply_vec(B, x)
        ratio = y / x ** (m - 1)
        lo, hi = float(ratio.min()), float(ratio.max())
        best_hi = min(best_hi, hi)
        best_lo = max(best_lo, lo)
        if hi - lo <= tol * max(1.0, hi):
            converged = True
            break
        if not np.all(y > 0):
            break
        x = y ** (1.0 / (m - 1))
        x = x / x.max()
    return SpectralEstimate(upper, best_hi, it, converged, best_lo)
