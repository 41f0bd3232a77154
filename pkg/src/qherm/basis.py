"""Truncated matrix model of L^2(R^n) in the scaled Hermite basis.

A :class:`BasisContext` fixes the scale lam > 0, the dimension n and the box
truncation N (multi-indices alpha with every component < N, ordered
graded-lexicographically).  On that space it carries the ladder matrices
A_j / A_j*, position/momentum Q_j / P_j, the Hermite operator H and its
semigroup, and the derivation calculus used throughout.

Truncation corrupts a band of rows/columns next to the edge (A* loses its
top transition), so every commutator identity is only claimed on the
*interior block* of indices at least ``margin`` away from N-1; each
derivation application widens the corrupted band by one index.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BasisContext",
    "TruncatedOperator",
    "build_context",
    "graded_indices",
    "heat_semigroup",
    "derivation",
    "d_operator",
    "hs_inner",
    "hs_norm",
]


def graded_indices(n: int, N: int) -> list[tuple[int, ...]]:
    """Multi-indices of the truncation box {0..N-1}^n in graded-lex order."""
    idx = list(itertools.product(range(N), repeat=n))
    idx.sort(key=lambda a: (sum(a), a))
    return idx


def graded_ball(d: int, M: int) -> list[tuple[int, ...]]:
    """Multi-indices mu in N^d with |mu| <= M, graded-lex order."""
    out = []
    for total in range(M + 1):
        out.extend(sorted(_compositions(total, d)))
    return out


def _compositions(total: int, d: int):
    if d == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, d - 1):
            yield (first,) + rest


class BasisContext:
    """Immutable bundle of (lam, n, N) and the standard matrices.

    Attributes
    ----------
    A, Astar, Q, P : lists of length n of TruncatedOperator
    H : TruncatedOperator, assembled as sum_j (A_j A_j* + A_j* A_j)/2
        (diagonal (2|alpha|+n) lam, exact on the interior block).
    """

    def __init__(self, lam: float, n: int, N: int, interior_margin: int = 2):
        if lam <= 0:
            raise ValueError(
                "scale must be positive; for negative scale use |lam| "
                "(all matrices here depend on the scale only through its modulus)")
        if n not in (1, 2):
            raise ValueError("dimension n must be 1 or 2")
        if N < 8:
            raise ValueError("truncation N must be at least 8")
        self.lam = float(lam)
        self.n = int(n)
        self.N = int(N)
        self.interior_margin = int(interior_margin)
        self.indices = graded_indices(n, N)
        self.index_of = {a: i for i, a in enumerate(self.indices)}
        self.dim = len(self.indices)
        self.audit: dict = {}

        self.A = [self._annihilator(j) for j in range(n)]
        self.Astar = [a.adjoint() for a in self.A]
        self.Q = [(self.A[j] + self.Astar[j]) * (0.5 / lam) for j in range(n)]
        self.P = [(self.A[j] - self.Astar[j]) * 0.5 for j in range(n)]
        H = None
        for j in range(n):
            term = (self.A[j] @ self.Astar[j] + self.Astar[j] @ self.A[j]) * 0.5
            H = term if H is None else H + term
        self.H = H
        self._eigs = np.array([(2 * sum(a) + n) * lam for a in self.indices])

    def _annihilator(self, j: int) -> "TruncatedOperator":
        mat = np.zeros((self.dim, self.dim), dtype=complex)
        for col, alpha in enumerate(self.indices):
            if alpha[j] > 0:
                lower = alpha[:j] + (alpha[j] - 1,) + alpha[j + 1:]
                mat[self.index_of[lower], col] = math.sqrt(2.0 * alpha[j] * self.lam)
        return TruncatedOperator(self, mat)

    @property
    def eigenvalues(self) -> np.ndarray:
        """Exact Hermite eigenvalues (2|alpha|+n) lam in basis order."""
        return self._eigs

    def interior(self, margin: int | None = None) -> np.ndarray:
        """Boolean mask of indices with every component <= N-1-margin."""
        m = self.interior_margin if margin is None else margin
        return np.array([all(c <= self.N - 1 - m for c in a) for a in self.indices])

    def __repr__(self):
        return f"BasisContext(lam={self.lam}, n={self.n}, N={self.N})"


@dataclass(frozen=True)
class TruncatedOperator:
    """Dense complex matrix on the truncated Hermite basis, tagged with its context."""

    ctx: BasisContext
    mat: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.asarray(self.mat, dtype=complex)
        if mat.shape != (self.ctx.dim, self.ctx.dim):
            raise ValueError(f"matrix shape {mat.shape} does not match context dim {self.ctx.dim}")
        mat.flags.writeable = False
        object.__setattr__(self, "mat", mat)

    def _check(self, other: "TruncatedOperator"):
        if other.ctx is not self.ctx:
            raise ValueError("operators belong to different basis contexts")

    def __add__(self, other):
        self._check(other)
        return TruncatedOperator(self.ctx, self.mat + other.mat)

    def __sub__(self, other):
        self._check(other)
        return TruncatedOperator(self.ctx, self.mat - other.mat)

    def __mul__(self, scalar):
        return TruncatedOperator(self.ctx, self.mat * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return TruncatedOperator(self.ctx, -self.mat)

    def __matmul__(self, other):
        self._check(other)
        return TruncatedOperator(self.ctx, self.mat @ other.mat)

    def adjoint(self) -> "TruncatedOperator":
        return TruncatedOperator(self.ctx, self.mat.conj().T)

    def norm_hs(self) -> float:
        return float(np.linalg.norm(self.mat))

    def trace(self) -> complex:
        return complex(np.trace(self.mat))

    def max_abs(self, margin: int | None = None) -> float:
        """Max entry modulus; with ``margin`` restricted to the interior block."""
        if margin is None:
            return float(np.abs(self.mat).max())
        keep = self.ctx.interior(margin)
        return float(np.abs(self.mat[np.ix_(keep, keep)]).max())

    # -- JSON exchange format ------------------------------------------------
    def to_json_dict(self) -> dict:
        return {
            "n": self.ctx.n,
            "N": self.ctx.N,
            "lambda": self.ctx.lam,
            "order": "graded-lex",
            "re": self.mat.real.tolist(),
            "im": self.mat.imag.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @staticmethod
    def from_json_dict(ctx: BasisContext, data: dict) -> "TruncatedOperator":
        if data.get("order") != "graded-lex":
            raise ValueError("unsupported index order in operator file")
        if int(data["n"]) != ctx.n or int(data["N"]) != ctx.N:
            raise ValueError("operator dimensions do not match context")
        if abs(float(data["lambda"]) - ctx.lam) > 1e-12:
            raise ValueError("operator scale does not match context")
        mat = np.array(data["re"], dtype=float) + 1j * np.array(data["im"], dtype=float)
        return TruncatedOperator(ctx, mat)


def build_context(lam: float, n: int, N: int, interior_margin: int = 2) -> BasisContext:
    """Construct the truncated basis context; rejects lam <= 0 and N < 8."""
    return BasisContext(lam, n, N, interior_margin)


def identity(ctx: BasisContext) -> TruncatedOperator:
    return TruncatedOperator(ctx, np.eye(ctx.dim, dtype=complex))


def heat_semigroup(ctx: BasisContext, t: float) -> TruncatedOperator:
    """Diagonal semigroup exp(-t H): entries exp(-(2|alpha|+n) lam t)."""
    if t <= 0:
        raise ValueError("semigroup time must be positive")
    return TruncatedOperator(ctx, np.diag(np.exp(-t * ctx.eigenvalues)).astype(complex))


def derivation(T: TruncatedOperator, A: TruncatedOperator) -> TruncatedOperator:
    """The derivation d_A(T) = [T, A] = T A - A T."""
    T._check(A)
    return T @ A - A @ T


def d_operator(ctx: BasisContext, j: int, T: TruncatedOperator) -> TruncatedOperator:
    """The j-th deformed derivation D_j, 1 <= j <= 2n.

    For 1 <= j <= n:   D_j     = i (cosh(lam/2) d_{P_j} - lam sinh(lam/2) d_{Q_j})
    for n < j <= 2n:   D_j     = lam cosh(lam/2) d_{Q_{j-n}} - sinh(lam/2) d_{P_{j-n}}.
    """
    if not 1 <= j <= 2 * ctx.n:
        raise ValueError(f"derivation index must be in 1..{2 * ctx.n}")
    ch = math.cosh(0.5 * ctx.lam)
    sh = math.sinh(0.5 * ctx.lam)
    if j <= ctx.n:
        k = j - 1
        return 1j * (ch * derivation(T, ctx.P[k]) - ctx.lam * sh * derivation(T, ctx.Q[k]))
    k = j - ctx.n - 1
    return ctx.lam * ch * derivation(T, ctx.Q[k]) - sh * derivation(T, ctx.P[k])


def hs_inner(S: TruncatedOperator, T: TruncatedOperator) -> complex:
    """Hilbert-Schmidt inner product (S, T) = tr(S T*), linear in S."""
    S._check(T)
    return complex(np.sum(S.mat * T.mat.conj()))


def hs_norm(T: TruncatedOperator) -> float:
    return T.norm_hs()
