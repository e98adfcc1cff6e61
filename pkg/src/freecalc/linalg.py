"""Dense complex matrix and matrix-tuple algebra.

Matrices are small dense ``numpy`` arrays of ``complex128``.  A point of the
calculus is a :class:`MatrixTuple`: an immutable d-tuple of square matrices
sharing one dimension n, normed by the maximum of the component operator
norms.  Operator norms are largest singular values computed by full SVD;
this module is meant for desk scale (n up to a few hundred), so exactness
wins over speed everywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import ConditioningError, InvalidInput

__all__ = [
    "COND_CAP",
    "MatrixTuple",
    "Embedding",
    "as_matrix",
    "op_norm",
    "singular_values",
    "svd_extremes",
    "tuple_norm",
    "direct_sum",
    "upper_block2",
    "conjugate",
    "random_unitary",
    "random_invertible",
    "random_tuple",
    "zero_tuple",
    "basis_tuple",
]

# Conjugations by maps worse conditioned than this are refused.
COND_CAP = 1e12

SeedLike = Union[int, np.random.Generator]


def _as_rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def as_matrix(a, square: bool = False) -> np.ndarray:
    """Validate ``a`` as a finite complex matrix and return a read-only copy."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim != 2:
        raise InvalidInput(f"expected a 2-d matrix, got ndim={m.ndim}")
    if m.size and not np.all(np.isfinite(m)):
        raise InvalidInput("matrix entries must be finite")
    if square and m.shape[0] != m.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {m.shape}")
    m.setflags(write=False)
    return m


def singular_values(m) -> np.ndarray:
    """All singular values of ``m``, descending."""
    m = as_matrix(m)
    if m.size == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def op_norm(m) -> float:
    """Operator norm (largest singular value)."""
    s = singular_values(m)
    return float(s[0]) if s.size else 0.0


def svd_extremes(m) -> tuple[float, float]:
    """(sigma_max, sigma_min) of ``m``."""
    s = singular_values(m)
    if not s.size:
        return 0.0, 0.0
    return float(s[0]), float(s[-1])


class MatrixTuple:
    """An immutable d-tuple of n x n complex matrices.

    Supports elementwise addition/subtraction, scalar multiplication, and
    indexing into the components.  The norm is the maximum component
    operator norm.
    """

    __slots__ = ("mats",)

    # Keep numpy from absorbing us into object arrays; scalar * tuple must
    # fall back to __rmul__.
    __array_ufunc__ = None

    def __init__(self, mats: Iterable):
        mats = tuple(as_matrix(m, square=True) for m in mats)
        if not mats:
            raise InvalidInput("a matrix tuple needs at least one component")
        n = mats[0].shape[0]
        if any(m.shape != (n, n) for m in mats):
            raise InvalidInput("all components must be square with one common dimension")
        object.__setattr__(self, "mats", mats)

    def __setattr__(self, name, value):
        raise AttributeError("MatrixTuple is immutable")

    @property
    def d(self) -> int:
        return len(self.mats)

    @property
    def n(self) -> int:
        return self.mats[0].shape[0]

    def __len__(self) -> int:
        return len(self.mats)

    def __getitem__(self, i) -> np.ndarray:
        return self.mats[i]

    def __iter__(self):
        return iter(self.mats)

    def norm(self) -> float:
        return tuple_norm(self)

    def _check_shape(self, other: "MatrixTuple"):
        if not isinstance(other, MatrixTuple):
            raise InvalidInput(f"expected a MatrixTuple, got {type(other).__name__}")
        if other.d != self.d or other.n != self.n:
            raise InvalidInput(
                f"shape mismatch: (d={self.d}, n={self.n}) vs (d={other.d}, n={other.n})"
            )

    def __add__(self, other):
        self._check_shape(other)
        return MatrixTuple(a + b for a, b in zip(self.mats, other.mats))

    def __sub__(self, other):
        self._check_shape(other)
        return MatrixTuple(a - b for a, b in zip(self.mats, other.mats))

    def __mul__(self, scalar):
        if not isinstance(
            scalar, (int, float, complex, np.integer, np.floating, np.complexfloating)
        ):
            return NotImplemented
        return MatrixTuple(complex(scalar) * m for m in self.mats)

    __rmul__ = __mul__

    def __neg__(self):
        return MatrixTuple(-m for m in self.mats)

    def __repr__(self):
        return f"MatrixTuple(d={self.d}, n={self.n})"


def tuple_norm(x: MatrixTuple) -> float:
    """Maximum of the component operator norms."""
    return max(op_norm(m) for m in x)


def _block_diag(blocks: Sequence[np.ndarray]) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=np.complex128)
    off = 0
    for b in blocks:
        k = b.shape[0]
        out[off:off + k, off:off + k] = b
        off += k
    return out


def direct_sum(xs: Sequence[MatrixTuple]) -> MatrixTuple:
    """Componentwise block-diagonal direct sum of matrix tuples.

    All tuples must share the arity d; dimensions may differ.  The result
    has dimension equal to the sum of the input dimensions.
    """
    xs = list(xs)
    if not xs:
        raise InvalidInput("direct_sum of an empty list")
    d = xs[0].d
    if any(x.d != d for x in xs):
        raise InvalidInput("direct_sum requires tuples of equal arity")
    return MatrixTuple(_block_diag([x[i] for x in xs]) for i in range(d))


def upper_block2(x: MatrixTuple, h: MatrixTuple) -> MatrixTuple:
    """Componentwise 2n x 2n upper-triangular dilation [[x, h], [0, x]]."""
    x._check_shape(h)
    z = np.zeros((x.n, x.n), dtype=np.complex128)
    return MatrixTuple(
        np.block([[xi, hi], [z, xi]]) for xi, hi in zip(x.mats, h.mats)
    )


@dataclass(frozen=True, eq=False)
class Embedding:
    """Invertible identification of C^(l*n) with l stacked copies of C^n.

    Represented as a square (l*n) x (l*n) matrix acting against the
    canonical block partition; l = 1 is an ordinary similarity.  Unitary
    embeddings must have orthonormal columns to 1e-12; general invertible
    ones must respect the condition cap.
    """

    n: int
    l: int
    mat: np.ndarray
    kind: str = "invertible"
    cond_cap: float = COND_CAP

    def __post_init__(self):
        if self.n < 1 or self.l < 1:
            raise InvalidInput("Embedding dimensions must be positive")
        if self.kind not in ("unitary", "invertible"):
            raise InvalidInput(f"unknown embedding kind {self.kind!r}")
        m = as_matrix(self.mat, square=True)
        size = self.l * self.n
        if m.shape != (size, size):
            raise InvalidInput(
                f"embedding matrix must be {size} x {size}, got {m.shape}"
            )
        object.__setattr__(self, "mat", m)
        if self.kind == "unitary":
            defect = op_norm(m.conj().T @ m - np.eye(size))
            if defect > 1e-12:
                raise InvalidInput(
                    f"unitary embedding defect {defect:.3e} exceeds 1e-12"
                )
        else:
            smax, smin = svd_extremes(m)
            if smin == 0.0 or smax / smin > self.cond_cap:
                raise ConditioningError(
                    "embedding exceeds the condition cap "
                    f"{self.cond_cap:.1e}"
                )

    @property
    def size(self) -> int:
        return self.l * self.n


def conjugate(s, z: MatrixTuple) -> MatrixTuple:
    """Componentwise conjugation s^{-1} z s.

    ``s`` may be an :class:`Embedding` or a plain square matrix of the same
    dimension as ``z``.  Singular or over-conditioned maps are refused.
    """
    if isinstance(s, Embedding):
        mat = s.mat
        unitary = s.kind == "unitary"
    else:
        mat = as_matrix(s, square=True)
        unitary = False
    if mat.shape[0] != z.n:
        raise InvalidInput(
            f"conjugating map is {mat.shape[0]} x {mat.shape[0]} "
            f"but the tuple has dimension {z.n}"
        )
    smax, smin = svd_extremes(mat)
    if smin == 0.0 or smax / smin > COND_CAP:
        raise ConditioningError("conjugating map is singular or over-conditioned")
    if unitary:
        sh = mat.conj().T
        return MatrixTuple(sh @ zi @ mat for zi in z)
    return MatrixTuple(np.linalg.solve(mat, zi @ mat) for zi in z)


def _haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    ph = np.diagonal(r).copy()
    mod = np.abs(ph)
    ph = np.where(mod > 0, ph / np.where(mod > 0, mod, 1.0), 1.0)
    return q * ph


def random_unitary(n: int, seed: SeedLike) -> np.ndarray:
    """Seeded approximately-Haar n x n unitary (QR of a Gaussian matrix
    with phase-normalized triangular factor)."""
    if n < 1:
        raise InvalidInput("dimension must be positive")
    return _haar_unitary(n, _as_rng(seed))


def random_invertible(n: int, cond_max: float, seed: SeedLike) -> np.ndarray:
    """Seeded invertible n x n matrix with condition number <= cond_max,
    built as U diag(s) V* with singular values log-uniform in [1, cond_max]."""
    if n < 1:
        raise InvalidInput("dimension must be positive")
    if not cond_max > 1.0:
        raise InvalidInput("cond_max must exceed 1")
    rng = _as_rng(seed)
    u = _haar_unitary(n, rng)
    v = _haar_unitary(n, rng)
    sv = np.exp(rng.uniform(0.0, np.log(cond_max), size=n))
    return (u * sv) @ v.conj().T


def random_tuple(d: int, n: int, seed: SeedLike, target_norm: float | None = None) -> MatrixTuple:
    """Seeded tuple with i.i.d. complex Gaussian entries, optionally scaled
    radially so the tuple norm equals ``target_norm``."""
    if d < 1 or n < 1:
        raise InvalidInput("d and n must be positive")
    rng = _as_rng(seed)
    mats = [
        (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        / np.sqrt(2.0 * n)
        for _ in range(d)
    ]
    x = MatrixTuple(mats)
    if target_norm is not None:
        cur = x.norm()
        if cur > 0.0:
            x = (target_norm / cur) * x
    return x


def zero_tuple(d: int, n: int) -> MatrixTuple:
    return MatrixTuple(np.zeros((n, n), dtype=np.complex128) for _ in range(d))


def basis_tuple(d: int, n: int, comp: int, row: int, col: int) -> MatrixTuple:
    """Canonical basis direction: zero everywhere except a single 1 entry at
    (row, col) of component ``comp`` (0-based)."""
    mats = [np.zeros((n, n), dtype=np.complex128) for _ in range(d)]
    mats[comp][row, col] = 1.0
    return MatrixTuple(mats)
