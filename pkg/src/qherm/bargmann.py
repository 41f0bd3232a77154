"""Classical and twisted Bargmann transforms, the Fock-space deformation, and weights.

Points of C^{2n} are complex vectors zeta = (z, w) with z = zeta[:n],
w = zeta[n:].  The real coordinates used by the 4n-dimensional quadratures
are (Re z, Im z, Re w, Im w) interleaved per complex coordinate as
(x_1..x_n, y_1..y_n, u_1..u_n, v_1..v_n).

The Gaussian part of the twisted weight (its quadratic form in those real
coordinates, symplectic tilt included) drives every integral over C^{2n}:
nodes are Gauss-Hermite tensor grids mapped through the principal axes of
that form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .basis import BasisContext, TruncatedOperator, heat_semigroup
from .specfun import QuadratureRule, gauss_hermite_rule, hermite_all
from .weyl import schrodinger_matrices, twisted_convolution, unitary_scale

__all__ = [
    "c_lambda",
    "a_lambda",
    "p_kernel",
    "DeformationMap",
    "sigma_map",
    "t_lambda",
    "weight_w",
    "reproducing_kernel",
    "calibrate_d",
    "bargmann_classical",
    "bargmann_twisted",
    "gauss_bargmann",
    "weight_form",
    "gaussian_grid",
    "real_to_complex",
    "symplectic",
    "monomial",
]


def c_lambda(lam: float, n: int = 1) -> float:
    """The twisted heat-kernel constant (4 pi)^{-n} lam^n sinh(lam)^{-n}."""
    return (4.0 * math.pi) ** -n * (lam / math.sinh(lam)) ** n


def a_lambda(lam: float, n: int = 1) -> float:
    """Isometry constant pi^{n/2} sqrt(c_lambda) of the Fock deformation."""
    return math.pi ** (n / 2.0) * math.sqrt(c_lambda(lam, n))


def p_kernel(t: float, lam: float):
    """Vectorized twisted heat kernel (x, u) -> p_t(x, u) for n = 1; accepts complex args."""
    pref = (4.0 * math.pi) ** -1 * lam / math.sinh(t * lam)
    rate = 0.25 * lam / math.tanh(t * lam)
    return lambda x, u: pref * np.exp(-rate * (x * x + u * u))


def monomial(mu, zeta):
    """Normalized Fock monomial zeta_mu = pi^{-n/2} (2^{|mu|} mu!)^{-1/2} zeta^mu on C^{2n}.

    ``zeta`` may carry leading batch axes; the multi-index acts on the last one.
    """
    mu = tuple(int(m) for m in mu)
    n = len(mu) // 2
    fact = 1.0
    for m in mu:
        fact *= math.factorial(m)
    c = math.pi ** (-n / 2.0) / math.sqrt(2.0 ** sum(mu) * fact)
    zeta = np.asarray(zeta)
    val = c * np.ones(zeta.shape[:-1], dtype=complex)
    for k, m in enumerate(mu):
        if m:
            val = val * zeta[..., k] ** m
    return val if val.shape else complex(val[()])


# ---------------------------------------------------------------------------
# The deformation sigma and the isometry T
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeformationMap:
    """The linear map sigma(z, w) = delta (ch z - i sh w, ch w + i sh z) on C^{2n}.

    delta = sqrt(lam / sinh lam), ch = cosh(lam/2), sh = sinh(lam/2).  The
    inner map (without delta) has unit determinant as a real 4n x 4n matrix.
    """

    lam: float
    delta: float = field(init=False)
    chalf: float = field(init=False)
    shalf: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "delta", math.sqrt(self.lam / math.sinh(self.lam)))
        object.__setattr__(self, "chalf", math.cosh(0.5 * self.lam))
        object.__setattr__(self, "shalf", math.sinh(0.5 * self.lam))

    def sigma(self, zeta):
        """Apply sigma to zeta = (z, w) in C^{2n}; broadcasts over leading axes."""
        zeta = np.asarray(zeta, dtype=complex)
        n = zeta.shape[-1] // 2
        z, w = zeta[..., :n], zeta[..., n:]
        return self.delta * np.concatenate(
            [self.chalf * z - 1j * self.shalf * w, self.chalf * w + 1j * self.shalf * z], axis=-1)

    def sigma_bar(self, zeta):
        """The coefficient-conjugated map: conj(sigma(conj(zeta)))."""
        zeta = np.asarray(zeta, dtype=complex)
        n = zeta.shape[-1] // 2
        z, w = zeta[..., :n], zeta[..., n:]
        return self.delta * np.concatenate(
            [self.chalf * z + 1j * self.shalf * w, self.chalf * w - 1j * self.shalf * z], axis=-1)

    def real_matrix(self, n: int = 1) -> np.ndarray:
        """The 4n x 4n real matrix of sigma in coordinates (x, y, u, v) per n=1 block."""
        if n != 1:
            raise NotImplementedError("real form implemented for n=1")
        d, ch, sh = self.delta, self.chalf, self.shalf
        # columns act on (x, y, u, v): z = x+iy, w = u+iv
        return d * np.array([
            [ch, 0.0, 0.0, sh],
            [0.0, ch, -sh, 0.0],
            [0.0, -sh, ch, 0.0],
            [sh, 0.0, 0.0, ch],
        ])


def sigma_map(d: DeformationMap, zeta):
    return d.sigma(zeta)


def t_lambda(d: DeformationMap, F, zeta):
    """The isometry (T F)(zeta) = a_lambda F(sigma zeta) onto the twisted Fock space."""
    zeta = np.asarray(zeta, dtype=complex)
    n = zeta.shape[-1] // 2
    return a_lambda(d.lam, n) * F(d.sigma(zeta))


# ---------------------------------------------------------------------------
# Weight, reproducing kernel, calibration
# ---------------------------------------------------------------------------

def _split_real(zeta):
    zeta = np.asarray(zeta, dtype=complex)
    return zeta.real, zeta.imag


def symplectic(xi, eta):
    """[(x,u), (y,v)] = u.y - x.v on R^{2n} (entries may be complex)."""
    xi = np.asarray(xi)
    eta = np.asarray(eta)
    n = xi.shape[-1] // 2
    return (np.sum(xi[..., n:] * eta[..., :n], axis=-1)
            - np.sum(xi[..., :n] * eta[..., n:], axis=-1))


def weight_w(lam: float, zeta) -> float:
    """Twisted Fock weight 4^n c_lam exp(-(lam/2) coth(lam) |zeta|^2 + lam [Re zeta, Im zeta])."""
    zeta = np.asarray(zeta, dtype=complex)
    n = zeta.shape[-1] // 2
    re, im = _split_real(zeta)
    quad = -0.5 * lam / math.tanh(lam) * np.sum(np.abs(zeta) ** 2, axis=-1)
    return 4.0 ** n * c_lambda(lam, n) * np.exp(quad + lam * symplectic(re, im))


def reproducing_kernel(lam: float, zeta, zeta_p, d_const: float) -> complex:
    """K_zeta(zeta') = d * exp((lam/2) coth(lam) conj(zeta).zeta') * exp(i (lam/2) [conj(zeta), zeta'])."""
    zeta = np.asarray(zeta, dtype=complex)
    zeta_p = np.asarray(zeta_p, dtype=complex)
    zb = zeta.conj()
    dot = np.sum(zb * zeta_p, axis=-1)
    return d_const * np.exp(0.5 * lam / math.tanh(lam) * dot + 0.5j * lam * symplectic(zb, zeta_p))


def weight_form(lam: float, half: bool = False) -> np.ndarray:
    """Quadratic form Q of the weight's Gaussian part, -log(w/(4^n c)) = xi^T Q xi.

    Coordinates (x, y, u, v) for n=1; ``half=True`` halves the form (the
    envelope of square-root-of-weight integrands).
    """
    a = 0.5 * lam / math.tanh(lam)
    Q = a * np.eye(4)
    # tilt -lam (u y - x v): symmetric halves on the (u,y) and (x,v) pairs
    Q[2, 1] = Q[1, 2] = -0.5 * lam
    Q[0, 3] = Q[3, 0] = +0.5 * lam
    return 0.5 * Q if half else Q


def gaussian_grid(form: np.ndarray, order: int):
    """Tensor Gauss-Hermite nodes/weights for integrals over R^d against exp(-xi^T form xi).

    Returns (points (B, d), weights (B,)) such that
    int g(xi) d xi ~= sum_i weights_i g(points_i) whenever g decays like the
    form's Gaussian; the grid lies along the form's principal axes.
    """
    vals, vecs = np.linalg.eigh(np.asarray(form, dtype=float))
    if np.any(vals <= 0):
        raise ValueError("envelope form must be positive definite")
    rule = gauss_hermite_rule(order)
    d = form.shape[0]
    node_grids = np.meshgrid(*([rule.nodes] * d), indexing="ij")
    wt_grids = np.meshgrid(*([rule.total_weights] * d), indexing="ij")
    ys = np.stack([g.ravel() for g in node_grids], axis=-1)          # (B, d)
    wts = np.ones(ys.shape[0])
    for g in wt_grids:
        wts = wts * g.ravel()
    pts = (ys / np.sqrt(vals)) @ vecs.T
    wts = wts / math.sqrt(float(np.prod(vals)))
    return pts, wts


def real_to_complex(xi: np.ndarray) -> np.ndarray:
    """(x, y, u, v) -> (z, w) = (x+iy, u+iv) for n=1 point batches."""
    xi = np.atleast_2d(xi)
    return np.stack([xi[:, 0] + 1j * xi[:, 1], xi[:, 2] + 1j * xi[:, 3]], axis=-1)


def calibrate_d(lam: float, order: int = 16) -> float:
    """Calibrate the reproducing-kernel constant from the reproducing identity at zeta=0.

    With a constant test function the identity collapses to
    d = 1 / int w(zeta) d zeta over C^2 (n = 1); the integral is evaluated on
    two successive grid orders, and disagreement above 1e-4 (relative) raises.
    """
    form = weight_form(lam)
    vals = []
    for o in (order, order + 4):
        pts, wts = gaussian_grid(form, o)
        zw = real_to_complex(pts)
        vals.append(float(np.sum(wts * weight_w(lam, zw).real)))
    if abs(vals[1] - vals[0]) > 1e-4 * abs(vals[1]):
        raise RuntimeError("weight-mass quadrature did not converge")
    d = 1.0 / vals[1]
    if d <= 0:
        raise RuntimeError("calibrated reproducing constant is not positive")
    return d


# ---------------------------------------------------------------------------
# Transforms
# ---------------------------------------------------------------------------

def bargmann_classical(f, w, quad: QuadratureRule, decay: float = 0.5) -> complex:
    """Classical Bargmann transform pi^{-d/2} e^{w^2/4} int f(x) e^{-(x-w)^2/2} dx.

    ``w`` is a complex vector of length d; ``f`` maps d coordinate arrays to
    values and decays like exp(-decay*|x|^2).
    """
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    d = w.size
    rate = decay + 0.5
    axes = []
    wts1 = []
    for wj in w:
        pts_j, wts_j = quad.points_weights(rate=rate, center=wj.real / (2.0 * rate))
        axes.append(pts_j)
        wts1.append(wts_j)
    grids = np.meshgrid(*axes, indexing="ij")
    wall = np.ones_like(grids[0])
    expo = np.zeros_like(grids[0], dtype=complex)
    for j in range(d):
        wall = wall * wts1[j].reshape([-1 if k == j else 1 for k in range(d)])
        expo = expo - 0.5 * (grids[j] - w[j]) ** 2
    vals = f(*grids) * np.exp(expo)
    integral = np.sum(wall * vals)
    return math.pi ** (-d / 2.0) * np.exp(0.25 * np.sum(w * w)) * integral


def bargmann_twisted(lam: float, f, zeta, quad: QuadratureRule, decay: float) -> complex:
    """Twisted Bargmann transform c_lam p_1(zeta)^{-1} (f *_lam p_{1/2})(zeta), n = 1."""
    zeta = np.asarray(zeta, dtype=complex)
    p1 = p_kernel(1.0, lam)
    phalf = p_kernel(0.5, lam)
    conv = twisted_convolution(lam, f, phalf, zeta.reshape(-1, 2), quad,
                               decay_f=decay, decay_g=0.25 * lam / math.tanh(0.5 * lam))
    zs = zeta.reshape(-1, 2)
    vals = c_lambda(lam) * conv / p1(zs[:, 0], zs[:, 1])
    return vals if np.asarray(zeta).ndim > 1 else complex(vals[0])


def gauss_bargmann(ctx: BasisContext, T: TruncatedOperator, zeta,
                   quad: QuadratureRule) -> complex:
    """Gauss-Bargmann transform of an operator at (a batch of) points of C^2.

    G(T)(z,w) = (2 pi)^{-1/2} lam^{1/2} c_lam p_1(z,w)^{-1} tr(pi(-z,-w) T e^{-H/2});
    coincides with the twisted Bargmann transform of f when T is the unitary
    Weyl image of f.
    """
    if ctx.n != 1:
        raise NotImplementedError("Gauss-Bargmann transform is implemented for n=1")
    zts = np.atleast_2d(np.asarray(zeta, dtype=complex))
    lam = ctx.lam
    TE = T.mat @ heat_semigroup(ctx, 0.5).mat
    mats = schrodinger_matrices(ctx, -zts[:, 0], -zts[:, 1], quad)
    traces = np.einsum("kij,ji->k", mats, TE)
    p1 = p_kernel(1.0, lam)
    vals = unitary_scale(ctx) * c_lambda(lam) * traces / p1(zts[:, 0], zts[:, 1])
    return vals if np.asarray(zeta).ndim > 1 else complex(vals[0])
