"""Operator analogues of Hermite functions and their ladder/spectral calculus.

The family S_mu (mu in N^{2n}) is an orthonormal basis of the truncated
Hilbert-Schmidt space.  Three independent constructions are provided:

* ``family_ladder``     -- raise from the base member with the maps A_j,
* ``family_quadrature`` -- Weyl transforms of the deformed Hermite functions,
* the symbolic route    -- evaluate :func:`qherm.symbolic.p_mu` (tested against both).

All three are anchored to the same normalization: the base member is
kappa0 * exp(-H/2) with kappa0 fixed by unit Hilbert-Schmidt norm at the
truncation.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from .basis import (BasisContext, TruncatedOperator, graded_ball, heat_semigroup,
                    hs_inner)
from .specfun import QuadratureRule, cosh_scale, hermite_eval
from .weyl import weyl

__all__ = [
    "DeformedHermite",
    "QuantumHermiteFamily",
    "psi",
    "s_base",
    "ladder_raise",
    "ladder_lower",
    "family_ladder",
    "family_quadrature",
    "family_symbolic",
    "number_operator",
    "sobolev_norm",
    "schwartz_decay_report",
    "export_family",
]


# ---------------------------------------------------------------------------
# Deformed Hermite functions on phase space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeformedHermite:
    """Phase-space Hermite function at the deformed width c(lam) = (lam/2) coth(lam/2).

    Evaluates c^{n/2} * prod_j h_{mu_j}(sqrt(c) xi_j) on R^{2n}; a unit
    vector of L^2 for every mu.
    """

    mu: tuple
    lam: float
    c: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "mu", tuple(int(m) for m in self.mu))
        if len(self.mu) % 2 or any(m < 0 for m in self.mu):
            raise ValueError("multi-index must lie in N^{2n}")
        object.__setattr__(self, "c", cosh_scale(self.lam))

    @property
    def n(self) -> int:
        return len(self.mu) // 2

    @property
    def decay(self) -> float:
        """Gaussian decay rate per coordinate (for quadrature grids)."""
        return 0.5 * self.c

    def __call__(self, *coords):
        if len(coords) != 2 * self.n:
            raise ValueError(f"expected {2 * self.n} coordinate arrays")
        s = math.sqrt(self.c)
        val = self.c ** (self.n / 2.0)
        for m, x in zip(self.mu, coords):
            val = val * hermite_eval(m, s * np.asarray(x))
        return val


def psi(mu, lam: float) -> DeformedHermite:
    """Deformed Hermite function evaluator for the multi-index mu."""
    return DeformedHermite(tuple(mu), lam)


# ---------------------------------------------------------------------------
# Ladder maps on the operator side
# ---------------------------------------------------------------------------

def _ladder_d(ctx: BasisContext, j: int, T: TruncatedOperator, adjoint: bool) -> TruncatedOperator:
    """D_j (or its Hilbert-Schmidt adjoint) through the ladder derivations.

    D_j = (i/2)(e^{-lam/2} d_{A_j} - e^{lam/2} d_{A*_j}) for j <= n and
    D_{j+n} = (1/2)(e^{lam/2} d_{A*_j} + e^{-lam/2} d_{A_j}); the adjoint
    conjugates the coefficients and swaps d_A <-> d_{A*}.
    """
    lam = ctx.lam
    ep, em = math.exp(0.5 * lam), math.exp(-0.5 * lam)
    k = (j - 1) % ctx.n
    A, C = ctx.A[k], ctx.Astar[k]
    dA = T @ A - A @ T
    dC = T @ C - C @ T
    if j <= ctx.n:
        if adjoint:
            return 0.5j * (ep * dA - em * dC)
        return 0.5j * (em * dA - ep * dC)
    if adjoint:
        return 0.5 * (ep * dA + em * dC)
    return 0.5 * (ep * dC + em * dA)


def _m_matrix(ctx: BasisContext, j: int, adjoint: bool) -> TruncatedOperator:
    """The right-multiplication partner M_j (or its operator adjoint)."""
    sh = math.sinh(0.5 * ctx.lam)
    k = (j - 1) % ctx.n
    if j <= ctx.n:
        M = (1j * sh) * (ctx.A[k] + ctx.Astar[k])          # 2i sinh(lam/2) lam Q_j
        return -1.0 * M if adjoint else M
    if adjoint:
        return sh * (ctx.Astar[k] - ctx.A[k])
    return sh * (ctx.A[k] - ctx.Astar[k])                  # 2 sinh(lam/2) P_j


def ladder_raise(ctx: BasisContext, j: int, T: TruncatedOperator) -> TruncatedOperator:
    """Raising map A_j T = D_j T + T M_j (1 <= j <= 2n)."""
    if not 1 <= j <= 2 * ctx.n:
        raise ValueError(f"ladder index must be in 1..{2 * ctx.n}")
    return _ladder_d(ctx, j, T, adjoint=False) + T @ _m_matrix(ctx, j, adjoint=False)


def ladder_lower(ctx: BasisContext, j: int, T: TruncatedOperator) -> TruncatedOperator:
    """Lowering map: the Hilbert-Schmidt adjoint of :func:`ladder_raise`."""
    if not 1 <= j <= 2 * ctx.n:
        raise ValueError(f"ladder index must be in 1..{2 * ctx.n}")
    return _ladder_d(ctx, j, T, adjoint=True) + T @ _m_matrix(ctx, j, adjoint=True)


def s_base(ctx: BasisContext) -> TruncatedOperator:
    """Base family member kappa0 * exp(-H/2), unit Hilbert-Schmidt norm at truncation.

    kappa0 equals (2 sinh lam)^{n/2} up to the exponentially small truncation
    correction of the trace.
    """
    kappa0 = 1.0 / math.sqrt(np.exp(-ctx.eigenvalues).sum())
    ctx.audit.setdefault("kappa0", kappa0)
    return kappa0 * heat_semigroup(ctx, 0.5)


def number_operator(ctx: BasisContext, T: TruncatedOperator) -> TruncatedOperator:
    """The number-type map (1/2) sum_j (A_j A_j* + A_j* A_j) applied to T.

    Family members are eigenvectors with eigenvalues (lam sinh lam)(2|mu|+2n).
    """
    out = None
    for j in range(1, 2 * ctx.n + 1):
        term = ladder_raise(ctx, j, ladder_lower(ctx, j, T)) \
            + ladder_lower(ctx, j, ladder_raise(ctx, j, T))
        out = term if out is None else out + term
    return 0.5 * out


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------

@dataclass
class QuantumHermiteFamily:
    """Table of family members S_mu for |mu| <= M, tagged with the construction route."""

    ctx: BasisContext
    M: int
    table: dict
    construction: str
    audit: dict = field(default_factory=dict)

    @property
    def indices(self) -> list[tuple[int, ...]]:
        return graded_ball(2 * self.ctx.n, self.M)

    def __getitem__(self, mu) -> TruncatedOperator:
        return self.table[tuple(mu)]

    def coefficient(self, T: TruncatedOperator, mu) -> complex:
        return hs_inner(T, self.table[tuple(mu)])

    def coefficients(self, T: TruncatedOperator) -> np.ndarray:
        return np.array([hs_inner(T, self.table[mu]) for mu in self.indices])

    def project(self, T: TruncatedOperator) -> TruncatedOperator:
        out = None
        for mu, c in zip(self.indices, self.coefficients(T)):
            term = c * self.table[mu]
            out = term if out is None else out + term
        return out

    def gram(self) -> np.ndarray:
        ops = [self.table[mu] for mu in self.indices]
        flat = np.array([op.mat.ravel() for op in ops])
        return flat @ flat.conj().T

    def gram_max_err(self) -> float:
        G = self.gram()
        return float(np.abs(G - np.eye(len(G))).max())

    def eigenvalue(self, mu) -> float:
        """Sobolev weight (2|mu| + 2n) * lam of the member mu."""
        return (2 * sum(mu) + 2 * self.ctx.n) * self.ctx.lam


def family_ladder(ctx: BasisContext, M: int) -> QuantumHermiteFamily:
    """Build the family by raising from the base member.

    S_{mu+e_j} = ((lam sinh lam)(2 mu_j + 2))^{-1/2} A_j S_mu, filled in
    graded-lex order along the first nonzero coordinate.  Requires the
    truncation headroom M <= N/4.
    """
    if M > ctx.N // 4:
        raise ValueError(f"family order {M} exceeds truncation headroom N/4 = {ctx.N // 4}")
    ls = ctx.lam * math.sinh(ctx.lam)
    table = {}
    for mu in graded_ball(2 * ctx.n, M):
        if sum(mu) == 0:
            table[mu] = s_base(ctx)
            continue
        j = next(i for i, m in enumerate(mu) if m > 0)
        prev = mu[:j] + (mu[j] - 1,) + mu[j + 1:]
        table[mu] = ladder_raise(ctx, j + 1, table[prev]) * (1.0 / math.sqrt(ls * 2 * mu[j]))
    fam = QuantumHermiteFamily(ctx, M, table, "ladder")
    fam.audit["kappa0"] = ctx.audit["kappa0"]
    fam.audit["gram_max_err"] = fam.gram_max_err()
    return fam


def family_quadrature(ctx: BasisContext, M: int, quad: QuadratureRule) -> QuantumHermiteFamily:
    """Build the family as Weyl transforms of the deformed Hermite functions."""
    if quad.order < 2 * ctx.N:
        raise ValueError(f"quadrature order {quad.order} too small; need >= {2 * ctx.N}")
    table = {}
    for mu in graded_ball(2 * ctx.n, M):
        f = psi(mu, ctx.lam)
        table[mu] = weyl(ctx, f, quad, decay=f.decay)
    fam = QuantumHermiteFamily(ctx, M, table, "quadrature")
    fam.audit["gram_max_err"] = fam.gram_max_err()
    return fam


def family_symbolic(ctx: BasisContext, M: int) -> QuantumHermiteFamily:
    """Build the family by evaluating the normal-ordered polynomials."""
    from .symbolic import evaluate, p_mu
    table = {}
    for mu in graded_ball(2 * ctx.n, M):
        table[mu] = evaluate(p_mu(ctx.lam, mu), ctx)
    fam = QuantumHermiteFamily(ctx, M, table, "symbolic")
    fam.audit["gram_max_err"] = fam.gram_max_err()
    return fam


# ---------------------------------------------------------------------------
# Sobolev norms and decay diagnostics
# ---------------------------------------------------------------------------

def sobolev_norm(family: QuantumHermiteFamily, T: TruncatedOperator, s: float):
    """Partial Sobolev norm sum_mu ((2|mu|+2n) lam)^s |(T, S_mu)|^2 over stored mu.

    Returns ``(norm, tail_estimate)``; the tail estimate extrapolates the
    per-grade coefficient decay geometrically past the stored order and is a
    diagnostic, not a rigorous bound.
    """
    coeffs = family.coefficients(T)
    eigs = np.array([family.eigenvalue(mu) for mu in family.indices])
    norm = float(np.sqrt(np.sum(eigs ** s * np.abs(coeffs) ** 2)))

    n2 = 2 * family.ctx.n
    lam = family.ctx.lam
    grade_l2 = np.zeros(family.M + 1)
    for mu, c in zip(family.indices, coeffs):
        grade_l2[sum(mu)] += abs(c) ** 2
    grade_l2 = np.sqrt(grade_l2)
    nz = grade_l2 > 1e-300
    tail = 0.0
    if nz.sum() >= 2:
        ks = np.nonzero(nz)[0]
        ratios = grade_l2[ks[1:]] / grade_l2[ks[:-1]]
        rho = float(np.exp(np.mean(np.log(ratios)) / np.mean(np.diff(ks))))
        if rho < 1.0:
            b = grade_l2[ks[-1]]
            for k in range(family.M + 1, family.M + 400):
                b *= rho
                term = ((2 * k + n2) * lam) ** s * b * b
                tail += term
                if term < 1e-32 * max(tail, 1e-300):
                    break
            tail = math.sqrt(tail)
        else:
            tail = float("inf")
    return norm, tail


@dataclass
class SchwartzReport:
    """Per-order decay table c_k = max_mu |(T,S_mu)| ((2|mu|+2n) lam)^k and the fitted slope."""

    c_table: dict
    slope: float
    grade_max: dict


def schwartz_decay_report(family: QuantumHermiteFamily, T: TruncatedOperator,
                          k_max: int) -> SchwartzReport:
    """Coefficient-decay diagnostic behind the smoothness characterization.

    The slope is the least-squares fit of log(max coefficient per grade)
    against log of the grade eigenvalue; rapidly (super-polynomially)
    decaying coefficient tables give steeply negative slopes.
    """
    coeffs = np.abs(family.coefficients(T))
    eigs = np.array([family.eigenvalue(mu) for mu in family.indices])
    c_table = {k: float(np.max(coeffs * eigs ** k)) for k in range(k_max + 1)}

    grade_max: dict[int, float] = {}
    grade_eig: dict[int, float] = {}
    for mu, c in zip(family.indices, coeffs):
        g = sum(mu)
        if c > grade_max.get(g, 0.0):
            grade_max[g] = float(c)
        grade_eig[g] = family.eigenvalue(mu)
    floor = max(grade_max.values()) * 1e-14
    xs, ys = [], []
    for g, c in grade_max.items():
        if c > floor:
            xs.append(math.log(grade_eig[g]))
            ys.append(math.log(c))
    slope = float(np.polyfit(xs, ys, 1)[0]) if len(xs) >= 2 else 0.0
    return SchwartzReport(c_table=c_table, slope=slope, grade_max=grade_max)


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def export_family(family: QuantumHermiteFamily, outdir: str,
                  normalization_ratio: float | None = None) -> str:
    """Write every member as s_mu_<components>.json plus a manifest; returns manifest path."""
    os.makedirs(outdir, exist_ok=True)
    for mu in family.indices:
        name = "s_mu_" + "_".join(str(m) for m in mu) + ".json"
        with open(os.path.join(outdir, name), "w", encoding="utf-8") as fh:
            fh.write(family.table[mu].to_json())
    manifest = {
        "lambda": family.ctx.lam,
        "n": family.ctx.n,
        "N": family.ctx.N,
        "M": family.M,
        "construction": family.construction,
        "audit": {
            "kappa0": family.audit.get("kappa0", family.ctx.audit.get("kappa0")),
            "gram_max_err": family.audit.get("gram_max_err"),
            "normalization_ratio": normalization_ratio
            if normalization_ratio is not None
            else family.audit.get("normalization_ratio"),
        },
    }
    path = os.path.join(outdir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    return path
