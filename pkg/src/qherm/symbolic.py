"""Normal ordering for the CCR algebra generated by A_j, A*_j and the semigroup symbol.

Words are finite products of the symbols

    ('c', j)  creation A*_j          ('a', j)  annihilation A_j
    ('e', t)  semigroup factor E_t = exp(-t H)

with a complex coefficient.  Normal form puts all creations (sorted by index)
before all annihilations (sorted by index) with at most one semigroup symbol,
rightmost.  The rewrite rules are

    A_j A*_k  ->  A*_k A_j + 2 lam delta_jk
    E_t A_j   ->  exp(+2 t lam) A_j  E_t
    E_t A*_j  ->  exp(-2 t lam) A*_j E_t
    E_s E_t   ->  E_{s+t}

Coefficients are complex doubles (the exponential factors are transcendental,
so exact rational bookkeeping is not available); terms with |coeff| <= 1e-14
are pruned.  Negative semigroup times are allowed transiently (they cancel
against E_1 when peeling off exp(+H/2)) but are rejected at evaluation time.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from .basis import BasisContext, TruncatedOperator, heat_semigroup

PRUNE_TOL = 1e-14

Symbol = tuple  # ('c', j) | ('a', j) | ('e', t)

__all__ = [
    "NOWord",
    "NOPoly",
    "normal_order",
    "push_semigroup",
    "apply_derivation",
    "p_mu",
    "evaluate",
    "format_poly",
    "parse_poly",
]


def create(j: int) -> Symbol:
    return ("c", int(j))


def annihilate(j: int) -> Symbol:
    return ("a", int(j))


def semigroup(t: float) -> Symbol:
    return ("e", float(t))


@dataclass(frozen=True)
class NOWord:
    """A single word: ordered symbol factors with a complex coefficient."""

    factors: tuple
    coeff: complex = 1.0 + 0j

    def degree(self) -> int:
        return sum(1 for f in self.factors if f[0] in ("a", "c"))


class NOPoly:
    """Linear combination of words, stored as a map factors -> coefficient."""

    def __init__(self, terms: dict | None = None):
        self.terms: dict[tuple, complex] = {}
        if terms:
            for fac, c in terms.items():
                self._add(tuple(fac), complex(c))

    def _add(self, factors: tuple, coeff: complex):
        factors = tuple(f for f in factors if not (f[0] == "e" and f[1] == 0.0))
        c = self.terms.get(factors, 0j) + coeff
        if abs(c) <= PRUNE_TOL:
            self.terms.pop(factors, None)
        else:
            self.terms[factors] = c

    @staticmethod
    def from_words(words) -> "NOPoly":
        p = NOPoly()
        for w in words:
            p._add(w.factors, w.coeff)
        return p

    @staticmethod
    def scalar(c: complex) -> "NOPoly":
        return NOPoly({(): c})

    def words(self) -> list[NOWord]:
        return [NOWord(f, c) for f, c in sorted(self.terms.items(), key=_term_key)]

    def __add__(self, other: "NOPoly") -> "NOPoly":
        p = NOPoly(self.terms)
        for fac, c in other.terms.items():
            p._add(fac, c)
        return p

    def __sub__(self, other: "NOPoly") -> "NOPoly":
        return self + (other * (-1.0))

    def __mul__(self, other):
        if isinstance(other, NOPoly):
            # formal concatenation; call normal_order() to canonicalize
            p = NOPoly()
            for f1, c1 in self.terms.items():
                for f2, c2 in other.terms.items():
                    p._add(f1 + f2, c1 * c2)
            return p
        return NOPoly({f: c * other for f, c in self.terms.items()})

    __rmul__ = __mul__

    def is_normal(self) -> bool:
        return all(_find_redex(f) is None for f in self.terms)

    def max_degree(self) -> int:
        return max((sum(1 for s in f if s[0] in "ac") for f in self.terms), default=0)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        return isinstance(other, NOPoly) and self.terms == other.terms

    def allclose(self, other: "NOPoly", tol: float = 1e-12) -> bool:
        keys = set(self.terms) | set(other.terms)
        return all(abs(self.terms.get(k, 0j) - other.terms.get(k, 0j)) <= tol for k in keys)

    def __repr__(self):
        return f"NOPoly({format_poly(self)})"


def _term_key(item):
    factors = item[0]
    return (sum(1 for f in factors if f[0] in "ac"), factors)


# ---------------------------------------------------------------------------
# Rewriting
# ---------------------------------------------------------------------------

def _find_redex(factors: tuple) -> int | None:
    """Leftmost position i such that (factors[i], factors[i+1]) is reducible."""
    for i in range(len(factors) - 1):
        a, b = factors[i], factors[i + 1]
        if a[0] == "a" and b[0] == "c":
            return i
        if a[0] == "e" and b[0] in ("a", "c", "e"):
            return i
        if a[0] == b[0] and a[0] in ("a", "c") and a[1] > b[1]:
            return i
    return None


def _all_redexes(factors: tuple) -> list[int]:
    out = []
    for i in range(len(factors) - 1):
        a, b = factors[i], factors[i + 1]
        if (a[0] == "a" and b[0] == "c") or (a[0] == "e" and b[0] in ("a", "c", "e")) \
                or (a[0] == b[0] and a[0] in ("a", "c") and a[1] > b[1]):
            out.append(i)
    return out


def _rewrite_at(factors: tuple, coeff: complex, i: int, lam: float) -> list[NOWord]:
    """Apply the rewrite rule at position i, returning replacement words."""
    a, b = factors[i], factors[i + 1]
    head, tail = factors[:i], factors[i + 2:]
    if a[0] == "a" and b[0] == "c":
        out = [NOWord(head + (b, a) + tail, coeff)]
        if a[1] == b[1]:
            out.append(NOWord(head + tail, coeff * 2.0 * lam))
        return out
    if a[0] == "e":
        t = a[1]
        if b[0] == "e":
            return [NOWord(head + (semigroup(t + b[1]),) + tail, coeff)]
        scale = math.exp(2.0 * t * lam) if b[0] == "a" else math.exp(-2.0 * t * lam)
        return [NOWord(head + (b, a) + tail, coeff * scale)]
    # same-kind symbols out of index order commute freely
    return [NOWord(head + (b, a) + tail, coeff)]


def normal_order(p: NOPoly, lam: float, rng: np.random.Generator | None = None) -> NOPoly:
    """Rewrite every word of ``p`` to normal form.

    The result is independent of the rewrite order; pass ``rng`` to pick
    redexes at random instead of leftmost-first (used by the confluence
    tests).
    """
    out = NOPoly()
    stack = [NOWord(f, c) for f, c in p.terms.items()]
    while stack:
        w = stack.pop()
        if abs(w.coeff) <= PRUNE_TOL:
            continue
        if rng is None:
            i = _find_redex(w.factors)
        else:
            redexes = _all_redexes(w.factors)
            i = None if not redexes else int(rng.choice(redexes))
        if i is None:
            out._add(w.factors, w.coeff)
        else:
            stack.extend(_rewrite_at(w.factors, w.coeff, i, lam))
    return out


def push_semigroup(w: NOWord, lam: float) -> NOWord:
    """Move every semigroup symbol to the right end of the word, merging E_s E_t.

    Ladder symbols are left in place up to the exponential scaling factors
    exp(+-2 t lam) they pick up when a semigroup symbol passes them.
    """
    factors = list(w.factors)
    coeff = complex(w.coeff)
    changed = True
    while changed:
        changed = False
        for i in range(len(factors) - 1):
            a, b = factors[i], factors[i + 1]
            if a[0] == "e" and b[0] in ("a", "c"):
                scale = math.exp(2.0 * a[1] * lam) if b[0] == "a" else math.exp(-2.0 * a[1] * lam)
                factors[i], factors[i + 1] = b, a
                coeff *= scale
                changed = True
                break
            if a[0] == "e" and b[0] == "e":
                factors[i: i + 2] = [semigroup(a[1] + b[1])]
                changed = True
                break
    factors = [f for f in factors if not (f[0] == "e" and f[1] == 0.0)]
    return NOWord(tuple(factors), coeff)


# ---------------------------------------------------------------------------
# Derivations
# ---------------------------------------------------------------------------

def _ladder_partial(kind: str, k: int, p: NOPoly, lam: float) -> NOPoly:
    """d_X(p) for X = A_k (kind 'a') or A*_k (kind 'c'), by Leibniz expansion.

    Atomic rules: d_{A_k}(A*_m) = -2 lam delta_km, d_{A*_k}(A_m) = +2 lam delta_km,
    like-kind symbols are killed, and on semigroup symbols
    d_{A_k}(E_t) = (exp(2 t lam)-1) A_k E_t,  d_{A*_k}(E_t) = (exp(-2 t lam)-1) A*_k E_t.
    """
    out = NOPoly()
    for factors, coeff in p.terms.items():
        for i, f in enumerate(factors):
            head, tail = factors[:i], factors[i + 1:]
            if f[0] == "e":
                t = f[1]
                fac = math.exp(2.0 * t * lam) - 1.0 if kind == "a" else math.exp(-2.0 * t * lam) - 1.0
                sym = annihilate(k) if kind == "a" else create(k)
                out._add(head + (sym, f) + tail, coeff * fac)
            elif kind == "a" and f == ("c", k):
                out._add(head + tail, coeff * (-2.0 * lam))
            elif kind == "c" and f == ("a", k):
                out._add(head + tail, coeff * (2.0 * lam))
    return out


def apply_derivation(j: int, p: NOPoly, lam: float, n: int = 1) -> NOPoly:
    """Apply the deformed derivation D_j (1 <= j <= 2n) symbolically.

    D_j     = (i/2) (exp(-lam/2) d_{A_j} - exp(+lam/2) d_{A*_j})      for j <= n,
    D_{j+n} = (1/2) (exp(+lam/2) d_{A*_j} + exp(-lam/2) d_{A_j}).
    """
    if not 1 <= j <= 2 * n:
        raise ValueError(f"derivation index must be in 1..{2 * n}")
    k = j if j <= n else j - n
    da = _ladder_partial("a", k, p, lam)
    dc = _ladder_partial("c", k, p, lam)
    if j <= n:
        res = 0.5j * (math.exp(-0.5 * lam) * da - math.exp(0.5 * lam) * dc)
    else:
        res = 0.5 * (math.exp(0.5 * lam) * dc + math.exp(-0.5 * lam) * da)
    return normal_order(res, lam)


# ---------------------------------------------------------------------------
# The non-commutative polynomials behind the operator Hermite family
# ---------------------------------------------------------------------------

MAX_TERMS = 10 ** 6


def p_mu(lam: float, mu) -> NOPoly:
    """Normal-ordered polynomial (with trailing E_{1/2}) for the family member mu.

    Computed as D^mu E_1 followed by cancelling E_1 E_{-1/2} -> E_{1/2} and a
    scalar normalization anchored so that mu = 0 reproduces the unit-norm
    base operator kappa0 * E_{1/2} with kappa0 = (2 sinh lam)^{n/2}.
    """
    mu = tuple(int(m) for m in mu)
    if len(mu) % 2:
        raise ValueError("multi-index must have even length 2n")
    if any(m < 0 for m in mu):
        raise ValueError("multi-index components must be nonnegative")
    n = len(mu) // 2
    total = sum(mu)
    if total > 12:
        raise ValueError("family order above 12 not supported (term growth)")
    p = NOPoly({(semigroup(1.0),): 1.0})
    for j, m in enumerate(mu, start=1):
        for _ in range(m):
            p = apply_derivation(j, p, lam, n=n)
            if len(p) > MAX_TERMS:
                raise RuntimeError("term count overflow in symbolic construction")
    # peel off exp(+H/2): every term carries a rightmost E_1 which becomes E_{1/2}
    shifted = NOPoly()
    for factors, coeff in p.terms.items():
        if factors and factors[-1] == semigroup(1.0):
            shifted._add(factors[:-1] + (semigroup(0.5),), coeff)
        else:
            shifted._add(factors + (semigroup(-0.5),), coeff)
    kappa0 = (2.0 * math.sinh(lam)) ** (n / 2.0)
    fact = 1.0
    for m in mu:
        fact *= math.factorial(m)
    scale = kappa0 / math.sqrt(fact * (2.0 * lam * math.sinh(lam)) ** total)
    return shifted * scale


def evaluate(p: NOPoly, ctx: BasisContext) -> TruncatedOperator:
    """Substitute context matrices for the symbols (E_t -> heat semigroup).

    Words are multiplied in factor order; negative semigroup times are
    rejected since exp(+tH) is unbounded.
    """
    semis: dict[float, np.ndarray] = {}

    def semi(t: float) -> np.ndarray:
        if t < 0:
            raise ValueError("negative semigroup time cannot be evaluated as a matrix")
        if t not in semis:
            semis[t] = heat_semigroup(ctx, t).mat
        return semis[t]

    total = np.zeros((ctx.dim, ctx.dim), dtype=complex)
    for factors, coeff in p.terms.items():
        acc = None
        for f in factors:
            if f[0] == "a":
                m = ctx.A[f[1] - 1].mat
            elif f[0] == "c":
                m = ctx.Astar[f[1] - 1].mat
            else:
                m = semi(f[1])
            acc = m if acc is None else acc @ m
        if acc is None:
            total += coeff * np.eye(ctx.dim)
        else:
            total += coeff * acc
    return TruncatedOperator(ctx, total)


# ---------------------------------------------------------------------------
# Text form: (0.5+0i)*A*_1 A_1 E_{0.5}, terms joined by " + "
# ---------------------------------------------------------------------------

def _fmt_num(x: float) -> str:
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def _fmt_coeff(c: complex) -> str:
    im = c.imag
    sign = "+" if im >= 0 or math.isnan(im) else "-"
    return f"({_fmt_num(c.real)}{sign}{_fmt_num(abs(im))}i)"


def format_poly(p: NOPoly) -> str:
    """Render a polynomial in the textual grammar recognized by :func:`parse_poly`."""
    if not p.terms:
        return "(0+0i)"
    parts = []
    for factors, coeff in sorted(p.terms.items(), key=_term_key):
        toks = []
        for f in factors:
            if f[0] == "c":
                toks.append(f"A*_{f[1]}")
            elif f[0] == "a":
                toks.append(f"A_{f[1]}")
            else:
                toks.append(f"E_{{{_fmt_num(f[1])}}}")
        body = _fmt_coeff(coeff)
        if toks:
            body += "\N{MIDDLE DOT}" + " ".join(toks)
        parts.append(body)
    return " + ".join(parts)


_TOKEN = re.compile(r"A\*_(\d+)|A_(\d+)|E_\{([^}]+)\}")


def parse_poly(text: str) -> NOPoly:
    """Parse the textual grammar produced by :func:`format_poly`."""
    p = NOPoly()
    for term in text.split(" + "):
        term = term.strip()
        m = re.match(r"^\(([^)]*)\)", term)
        if not m:
            raise ValueError(f"cannot parse term coefficient in {term!r}")
        coeff = complex(m.group(1).replace(" ", "").replace("i", "j"))
        rest = term[m.end():].lstrip("\N{MIDDLE DOT}").strip()
        factors = []
        pos = 0
        while pos < len(rest):
            tok = _TOKEN.match(rest, pos)
            if not tok:
                if rest[pos].isspace():
                    pos += 1
                    continue
                raise ValueError(f"cannot parse symbol at {rest[pos:]!r}")
            if tok.group(1) is not None:
                factors.append(create(int(tok.group(1))))
            elif tok.group(2) is not None:
                factors.append(annihilate(int(tok.group(2))))
            else:
                factors.append(semigroup(float(tok.group(3))))
            pos = tok.end()
        p._add(tuple(factors), coeff)
    return p
