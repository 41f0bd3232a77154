"""Stable Hermite/Laguerre evaluation, Gaussian heat kernels and Gauss-Hermite rules.

Everything downstream (matrix elements, quadrature transforms, Fock-space
integrals) is built on the evaluators in this module.  Hermite *functions*
(polynomial times Gaussian) are evaluated directly through a normalized
three-term recurrence so that degrees up to a few hundred stay finite;
evaluating H_k and the Gaussian separately overflows/underflows long before
that.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal

SQRT_PI = math.sqrt(math.pi)

__all__ = [
    "QuadratureRule",
    "gauss_hermite_rule",
    "hermite_eval",
    "hermite_all",
    "hermite_deriv",
    "hermite_scaled_eval",
    "laguerre_eval",
    "heat_kernel_twisted",
    "heat_kernel_euclidean",
    "cosh_scale",
]


# ---------------------------------------------------------------------------
# Gauss-Hermite quadrature (weight exp(-x^2) on the real line)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Hermite nodes/weights of a given order for the weight exp(-x^2).

    ``total_weights`` are w_i * exp(x_i^2); with those, a plain integral of a
    function h with Gaussian decay is  int h(x) dx ~= sum total_weights[i] * h(nodes[i])
    after rescaling nodes to h's own decay rate (see :meth:`points_weights`).
    """

    order: int
    nodes: np.ndarray
    weights: np.ndarray
    total_weights: np.ndarray = field(repr=False, default=None)

    def points_weights(self, rate: float = 1.0, center: float = 0.0):
        """Nodes/weights for integrating dx against a factor ~ exp(-rate*(x-center)^2).

        Returns (points, weights) such that  int h(x) dx ~= sum w_i h(p_i)
        is exact whenever h(x) * exp(rate*(x-center)^2) is a polynomial of
        degree <= 2*order - 1.
        """
        if rate <= 0:
            raise ValueError("decay rate must be positive")
        s = math.sqrt(rate)
        return center + self.nodes / s, self.total_weights / s


def gauss_hermite_rule(m: int) -> QuadratureRule:
    """Order-m Gauss-Hermite rule via the symmetric tridiagonal Jacobi matrix.

    Nodes are the eigenvalues of the Jacobi matrix (zero diagonal,
    off-diagonal sqrt(k/2)); weights come from the squared first components
    of the normalized eigenvectors, scaled so that sum(w) = sqrt(pi).
    """
    if not 1 <= m <= 512:
        raise ValueError(f"quadrature order must be in [1, 512], got {m}")
    if m == 1:
        nodes = np.zeros(1)
    else:
        off = np.sqrt(np.arange(1, m) / 2.0)
        nodes = eigh_tridiagonal(np.zeros(m), off, eigvals_only=True)
        # symmetrize exactly; eigh leaves ~1e-16 asymmetry
        nodes = 0.5 * (nodes - nodes[::-1])
    # Total weights w*exp(x^2) through the Hermite-function identity
    # 1/(m h_{m-1}(x_i)^2): the eigenvector first components lose all relative
    # accuracy in the tails (and underflow for large m), this form does not.
    total = 1.0 / (m * hermite_eval(m - 1, nodes) ** 2)
    total = 0.5 * (total + total[::-1])
    weights = total * np.exp(-nodes**2)
    scale = SQRT_PI / weights.sum()
    return QuadratureRule(order=m, nodes=nodes, weights=scale * weights,
                          total_weights=scale * total)


# ---------------------------------------------------------------------------
# Hermite functions
# ---------------------------------------------------------------------------

def hermite_eval(k: int, x):
    """Normalized 1-D Hermite function h_k(x), scalar or array, real or complex.

    h_0(x) = pi^(-1/4) exp(-x^2/2) and
    h_{k+1} = sqrt(2/(k+1)) x h_k - sqrt(k/(k+1)) h_{k-1}.
    """
    if k < 0:
        raise ValueError("degree must be nonnegative")
    x = np.asarray(x)
    h_prev = np.zeros_like(x, dtype=np.result_type(x.dtype, float))
    h = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    for j in range(k):
        h, h_prev = math.sqrt(2.0 / (j + 1)) * x * h - math.sqrt(j / (j + 1.0)) * h_prev, h
    return h if h.shape else h[()]


def hermite_all(max_degree: int, x) -> np.ndarray:
    """All h_0..h_max_degree at once; shape (max_degree+1,) + x.shape."""
    x = np.atleast_1d(np.asarray(x))
    out = np.empty((max_degree + 1,) + x.shape, dtype=np.result_type(x.dtype, float))
    out[0] = math.pi ** -0.25 * np.exp(-0.5 * x * x)
    if max_degree >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for j in range(1, max_degree):
        out[j + 1] = math.sqrt(2.0 / (j + 1)) * x * out[j] - math.sqrt(j / (j + 1.0)) * out[j - 1]
    return out


def hermite_deriv(k: int, x):
    """Derivative h_k'(x) = (sqrt(k) h_{k-1} - sqrt(k+1) h_{k+1}) / sqrt(2)."""
    lower = hermite_eval(k - 1, x) if k >= 1 else 0.0
    return (math.sqrt(k) * lower - math.sqrt(k + 1) * hermite_eval(k + 1, x)) / math.sqrt(2.0)


def hermite_scaled_eval(alpha, lam: float, x):
    """Scaled multi-dimensional Hermite function: |lam|^{d/4} * prod_j h_{alpha_j}(sqrt|lam| x_j).

    ``alpha`` is a multi-index over N^d and ``x`` a point of R^d (entries may
    be complex, in which case the analytic continuation is returned).
    """
    alpha = tuple(int(a) for a in alpha)
    if any(a < 0 for a in alpha):
        raise ValueError("multi-index components must be nonnegative")
    lam = abs(lam)
    d = len(alpha)
    s = math.sqrt(lam)
    val = lam ** (d / 4.0)
    for a, xj in zip(alpha, x):
        val = val * hermite_eval(a, s * xj)
    return val


# ---------------------------------------------------------------------------
# Laguerre functions
# ---------------------------------------------------------------------------

def laguerre_eval(k: int, a: float, t):
    """Generalized Laguerre polynomial L_k^a(t) by the three-term recurrence."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    if a < -1:
        raise ValueError("order parameter must be >= -1")
    t = np.asarray(t, dtype=float)
    prev = np.ones_like(t)
    if k == 0:
        return prev if prev.shape else prev[()]
    cur = 1.0 + a - t
    for j in range(1, k):
        cur, prev = (((2 * j + 1 + a - t) * cur - (j + a) * prev) / (j + 1.0), cur)
    return cur if cur.shape else cur[()]


# ---------------------------------------------------------------------------
# Heat kernels
# ---------------------------------------------------------------------------

def cosh_scale(lam: float) -> float:
    """The dilation constant c(lam) = (lam/2) * coth(lam/2)."""
    return 0.5 * lam / math.tanh(0.5 * lam)


def heat_kernel_twisted(t: float, lam: float, zeta) -> complex:
    """Twisted heat kernel p_t at a (possibly complex) point of C^{2n}.

    p_t(zeta) = (4 pi)^{-n} lam^n sinh(t lam)^{-n} exp(-(lam/4) coth(t lam) * zeta.zeta)
    with the holomorphic square zeta.zeta = sum zeta_j^2 (not |zeta|^2), which
    is the analytic continuation off the real subspace.
    """
    if t <= 0:
        raise ValueError("time parameter must be positive")
    if lam == 0:
        raise ValueError("scale parameter must be nonzero")
    zeta = np.asarray(zeta)
    if zeta.size % 2:
        raise ValueError("phase-space point must have even length")
    n = zeta.size // 2
    quad = np.sum(zeta * zeta)
    pref = (4.0 * math.pi) ** -n * (lam / math.sinh(t * lam)) ** n
    val = pref * np.exp(-0.25 * lam / math.tanh(t * lam) * quad)
    return complex(val) if np.iscomplexobj(zeta) else float(val.real)


def heat_kernel_euclidean(t: float, x) -> float:
    """Euclidean heat kernel q_t(x) = (4 pi t)^{-n/2} exp(-|x|^2 / (4t))."""
    if t <= 0:
        raise ValueError("time parameter must be positive")
    x = np.asarray(x, dtype=float)
    n = x.size
    return float((4.0 * math.pi * t) ** (-n / 2.0) * math.exp(-np.dot(x, x) / (4.0 * t)))
