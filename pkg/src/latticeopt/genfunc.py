"""Rational generating functions for lattice-point sets.

A bounded polyhedron's lattice points are encoded as a short sum of terms

    sign * z^a / prod_j (1 - z^(b_j))

built by walking the vertices, taking supporting cones, triangulating,
and recursively splitting each simplicial cone against a short lattice
vector until every piece is unimodular.  Facet openness is decided once
against a reference direction shared by the whole recursion, which makes
the signed union count every lattice point exactly once with no
inclusion-exclusion over faces.

Specializing z -> 1 goes through the substitution z_i = (1+t)^(mu_i)
with mu chosen off every denominator hyperplane; counting and
polynomial-weighted summation then reduce to exact coefficient
extraction in truncated power series over Fraction.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .core import (
    det,
    dot,
    format_rat,
    kernel_basis,
    lll_reduce_with_transform,
    parse_rat,
    solve_integer,
    solve_rational,
    transpose,
    vadd,
    vscale,
)
from .polyhedra import (
    Polyhedron,
    SimplicialCone,
    enumerate_vertices,
    implicit_equality_rows,
    is_bounded,
    is_empty,
    open_facets_for,
    supporting_cone,
    triangulate,
)

IntVec = tuple[int, ...]
Monomial = tuple[Fraction, IntVec]


# ---------------------------------------------------------------------------
# terms

def _canon_numerator(num: Iterable[tuple]) -> tuple[Monomial, ...]:
    acc: dict[IntVec, Fraction] = {}
    for c, a in num:
        a = tuple(int(x) for x in a)
        acc[a] = acc.get(a, Fraction(0)) + Fraction(c)
    return tuple((c, a) for a, c in sorted(acc.items()) if c != 0)


@dataclass(frozen=True)
class GFTerm:
    """One summand sign * numerator / prod_j (1 - z^(b_j))^(m_j)."""

    sign: int
    numerator: tuple[Monomial, ...]
    denominator: tuple[tuple[IntVec, int], ...]

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")
        object.__setattr__(self, "numerator", _canon_numerator(self.numerator))
        den = []
        for b, m in self.denominator:
            b = tuple(int(x) for x in b)
            if all(x == 0 for x in b):
                raise ValueError("zero denominator vector")
            if m < 1:
                raise ValueError("denominator multiplicity must be >= 1")
            den.append((b, int(m)))
        object.__setattr__(self, "denominator", tuple(sorted(den)))

    @property
    def pole_order(self) -> int:
        return sum(m for _, m in self.denominator)


@dataclass(frozen=True)
class GeneratingFunction:
    dimension: int
    terms: tuple[GFTerm, ...]

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for t in self.terms:
            for _, a in t.numerator:
                if len(a) != self.dimension:
                    raise ValueError("numerator dimension mismatch")
            for b, _ in t.denominator:
                if len(b) != self.dimension:
                    raise ValueError("denominator dimension mismatch")


def monomial_gf(dimension: int, point: Sequence[int]) -> GeneratingFunction:
    """The generating function of a single lattice point."""
    term = GFTerm(1, ((Fraction(1), tuple(int(x) for x in point)),), ())
    return GeneratingFunction(dimension, (term,))


# ---------------------------------------------------------------------------
# unimodular cones

def unimodular_cone_gf(c: SimplicialCone) -> GFTerm:
    """Generating function of a half-open unimodular cone.

    The numerator exponent is the unique lattice point of the fundamental
    parallelepiped shifted to the apex: with B the generator matrix and
    lam = B^{-1} apex, the lowest admissible integer offset is ceil(lam_i)
    on closed facets and floor(lam_i) + 1 on open ones.
    """
    gens = c.generators
    if abs(det(gens)) != 1:
        raise ValueError("cone is not unimodular")
    lam = solve_rational(transpose(gens), tuple(Fraction(x) for x in c.apex))
    mstar = []
    for i, li in enumerate(lam):
        if i in c.open_facets:
            mstar.append(math.floor(li) + 1)
        else:
            mstar.append(math.ceil(li))
    d = len(c.apex)
    a = tuple(sum(mstar[j] * gens[j][i] for j in range(len(gens)))
              for i in range(d))
    return GFTerm(c.sign, ((Fraction(1), a),),
                  tuple((g, 1) for g in gens))


def _short_vector(gens) -> tuple[IntVec, tuple[Fraction, ...]]:
    """Lattice vector w with all |(B^{-1} w)_i| < 1, found via LLL.

    Works in the image lattice {A w : w in Z^d} with A = det(B) * B^{-1},
    an integer matrix, so the target is an image point of infinity norm
    below |det B|.
    """
    d = len(gens)
    D = abs(det(gens))
    B = transpose(gens)
    cols = []
    for i in range(d):
        e = tuple(Fraction(1) if j == i else Fraction(0) for j in range(d))
        col = solve_rational(B, e)
        cols.append(tuple(x * D for x in col))
    astar = transpose(cols)          # astar = D * B^{-1}, integer entries
    rows = []
    for r in astar:
        row = tuple(int(x) for x in r)
        assert all(Fraction(v) == orig for v, orig in zip(row, r))
        rows.append(row)
    lattice = transpose(rows)        # rows generate the image lattice
    reduced, U = lll_reduce_with_transform(lattice)

    rng = range(-2, 3) if d <= 4 else range(-1, 2)
    best = None
    for coeffs in itertools.product(rng, repeat=d):
        if all(c == 0 for c in coeffs):
            continue
        v = tuple(sum(c * reduced[i][j] for i, c in enumerate(coeffs))
                  for j in range(d))
        norm = max(abs(x) for x in v)
        if norm == 0 or norm >= D:
            continue
        w = tuple(sum(c * U[i][j] for i, c in enumerate(coeffs))
                  for j in range(d))
        key = (norm, v)
        if best is None or key < best[0]:
            best = (key, v, w)
    if best is None:
        raise RuntimeError("no admissible short vector found; "
                           "decomposition cannot proceed")
    _, v, w = best
    alpha = tuple(Fraction(x, D) for x in v)
    if all(a <= 0 for a in alpha):
        w = tuple(-x for x in w)
        alpha = tuple(-a for a in alpha)
    return w, alpha


def signed_decompose(c: SimplicialCone, reference=None
                     ) -> tuple[SimplicialCone, ...]:
    """Split a simplicial cone into signed half-open unimodular cones.

    `reference` is the apex-relative direction that decides facet
    openness at every node of the recursion; it defaults to the sum of
    the generators, which lies strictly inside and keeps a closed input
    fully closed.  The input's own open_facets must have been derived
    from the same reference (triangulate does this).
    """
    gens = c.generators
    d = len(gens)
    if reference is None:
        reference = tuple(sum(g[i] for g in gens) for i in range(d))
    if open_facets_for(gens, reference) != c.open_facets:
        raise ValueError("open facets inconsistent with reference direction")

    out = []
    stack = [(gens, c.sign)]
    while stack:
        g, sign = stack.pop()
        if abs(det(g)) == 1:
            out.append(SimplicialCone(c.apex, g, sign,
                                      open_facets_for(g, reference)))
            continue
        w, alpha = _short_vector(g)
        children = []
        for i, ai in enumerate(alpha):
            if ai == 0:
                continue
            child = g[:i] + (w,) + g[i + 1:]
            children.append((child, sign if ai > 0 else -sign))
        stack.extend(reversed(children))
    return tuple(out)


# ---------------------------------------------------------------------------
# Brion summation

def _affine_restriction_gf(P: Polyhedron, eq_rows: tuple[int, ...]
                           ) -> GeneratingFunction:
    """Generating function of a polyhedron whose affine hull is proper.

    Integer points on {A_E x = b_E} are x0 + L y with L a lattice basis
    of the integer kernel; the problem recurses in y-space and the
    resulting terms are pushed back through the affine map.
    """
    n = P.dim
    A_E = tuple(P.A[i] for i in eq_rows)
    b_E = tuple(P.b[i] for i in eq_rows)
    scale = math.lcm(*(Fraction(x).denominator
                       for row, beta in zip(A_E, b_E)
                       for x in row + (beta,)))
    A_int = tuple(tuple(int(x * scale) for x in row) for row in A_E)
    b_int = tuple(int(x * scale) for x in b_E)
    x0 = solve_integer(A_int, b_int)
    if x0 is None:
        return GeneratingFunction(n, ())
    basis = kernel_basis(A_int)
    if not basis:
        if P.contains(x0):
            return monomial_gf(n, x0)
        return GeneratingFunction(n, ())

    k = len(basis)
    rows, rhs = [], []
    for i in range(len(P.A)):
        a = P.A[i]
        new_row = tuple(dot(a, basis[r]) for r in range(k))
        new_b = P.b[i] - dot(a, x0)
        if all(x == 0 for x in new_row):
            if new_b < 0:
                return GeneratingFunction(n, ())
            continue
        rows.append(new_row)
        rhs.append(new_b)
    sub = polyhedron_gf(Polyhedron(tuple(rows), tuple(rhs)))

    def push(v: IntVec, shift: bool) -> IntVec:
        img = [x0[i] if shift else 0 for i in range(n)]
        for r in range(k):
            for i in range(n):
                img[i] += v[r] * basis[r][i]
        return tuple(img)

    terms = []
    for t in sub.terms:
        num = tuple((cf, push(a, True)) for cf, a in t.numerator)
        den = tuple((push(b, False), m) for b, m in t.denominator)
        terms.append(GFTerm(t.sign, num, den))
    return GeneratingFunction(n, tuple(terms))


def polyhedron_gf(P: Polyhedron) -> GeneratingFunction:
    """Brion sum over vertices of the decomposed supporting cones."""
    n = P.dim
    if is_empty(P):
        return GeneratingFunction(n, ())
    eq = implicit_equality_rows(P)
    if eq:
        return _affine_restriction_gf(P, eq)
    if not is_bounded(P):
        raise ValueError("polyhedron is unbounded")

    terms = []
    for v in enumerate_vertices(P):
        cone = supporting_cone(P, v)
        eta = tuple(sum(r[i] for r in cone.rays) for i in range(n))
        for piece in triangulate(cone, reference=eta):
            for uni in signed_decompose(piece, reference=eta):
                terms.append(unimodular_cone_gf(uni))
    return GeneratingFunction(n, tuple(terms))


# ---------------------------------------------------------------------------
# specialization at z = 1

def _binom(e: int, k: int) -> int:
    if k < 0:
        return 0
    if e >= 0:
        return math.comb(e, k) if k <= e else 0
    return (-1) ** k * math.comb(k - e - 1, k)


def _series_mul(a, b, L):
    out = [Fraction(0)] * (L + 1)
    for i, ai in enumerate(a):
        if ai == 0 or i > L:
            continue
        for j, bj in enumerate(b):
            if i + j > L:
                break
            if bj:
                out[i + j] += ai * bj
    return out


def _series_inv(a, L):
    if a[0] == 0:
        raise ZeroDivisionError("series has no inverse")
    inv0 = 1 / Fraction(a[0])
    out = [Fraction(0)] * (L + 1)
    out[0] = inv0
    for k in range(1, L + 1):
        s = Fraction(0)
        for i in range(1, min(k, len(a) - 1) + 1):
            if a[i]:
                s += a[i] * out[k - i]
        out[k] = -s * inv0
    return out


def _u_series(s: int, L: int):
    # (1 - (1+t)^s) / t, constant term -s
    return [Fraction(-_binom(s, k + 1)) for k in range(L + 1)]


def normalize_term(t: GFTerm) -> GFTerm:
    """Flip lex-negative denominator vectors via 1/(1-z^-b) = -z^b/(1-z^b)."""
    sign = t.sign
    num = list(t.numerator)
    den = []
    for b, m in t.denominator:
        first = next(x for x in b if x != 0)
        if first < 0:
            b = tuple(-x for x in b)
            sign *= (-1) ** m
            num = [(cf, vadd(a, vscale(m, b))) for cf, a in num]
        den.append((b, m))
    return GFTerm(sign, tuple(num), tuple(den))


def _moment_direction(vectors, d: int, limit: int = 10000) -> IntVec:
    if d == 0:
        return ()
    for M in range(1, limit + 1):
        mu = tuple(M ** i for i in range(d))
        if all(dot(mu, b) != 0 for b in vectors):
            return mu
    raise RuntimeError("no generic specialization direction found")


def specialize_at_one(g: GeneratingFunction, direction=None) -> Fraction:
    """Exact value of g at z = 1, finite for bounded lattice-point sets."""
    if not g.terms:
        return Fraction(0)
    terms = [normalize_term(t) for t in g.terms]
    vectors = {b for t in terms for b, _ in t.denominator}
    if direction is None:
        mu = _moment_direction(vectors, g.dimension)
    else:
        mu = tuple(int(x) for x in direction)
        if len(mu) != g.dimension:
            raise ValueError("direction dimension mismatch")
        bad = [b for b in vectors if dot(mu, b) == 0]
        if bad:
            raise ValueError(f"direction is orthogonal to {bad[0]}")

    total = Fraction(0)
    for t in terms:
        L = t.pole_order
        prod = [Fraction(1)] + [Fraction(0)] * L
        for b, m in t.denominator:
            u = _u_series(dot(mu, b), L)
            for _ in range(m):
                prod = _series_mul(prod, u, L)
        inv = _series_inv(prod, L)
        for cf, a in t.numerator:
            e = dot(mu, a)
            val = sum(_binom(e, L - k) * inv[k] for k in range(L + 1))
            total += t.sign * cf * val
    return total


# ---------------------------------------------------------------------------
# differential operators (weighted counting)

def _monomials_of(h) -> tuple[Monomial, ...]:
    mons = getattr(h, "monomials", h)
    return tuple((Fraction(c), tuple(int(x) for x in e)) for c, e in mons)


def _combine(terms: Iterable[GFTerm]) -> tuple[GFTerm, ...]:
    acc: dict[tuple, dict[IntVec, Fraction]] = {}
    for t in terms:
        bucket = acc.setdefault(t.denominator, {})
        for cf, a in t.numerator:
            bucket[a] = bucket.get(a, Fraction(0)) + t.sign * cf
    out = []
    for den in sorted(acc):
        num = tuple((cf, a) for a, cf in sorted(acc[den].items()) if cf != 0)
        if not num:
            continue
        if all(cf < 0 for cf, _ in num):
            out.append(GFTerm(-1, tuple((-cf, a) for cf, a in num), den))
        else:
            out.append(GFTerm(1, num, den))
    return tuple(out)


def _op_once(terms: tuple[GFTerm, ...], i: int) -> tuple[GFTerm, ...]:
    # z_i d/dz_i by the product rule: differentiate the numerator, then
    # bump each denominator factor's multiplicity
    out = []
    for t in terms:
        num = tuple((cf * a[i], a) for cf, a in t.numerator if a[i] != 0)
        if num:
            out.append(GFTerm(t.sign, num, t.denominator))
        for j, (b, m) in enumerate(t.denominator):
            if b[i] == 0:
                continue
            num_j = tuple((cf * m * b[i], vadd(a, b)) for cf, a in t.numerator)
            den_j = t.denominator[:j] + ((b, m + 1),) + t.denominator[j + 1:]
            out.append(GFTerm(t.sign, num_j, den_j))
    return _combine(out)


def apply_operator(g: GeneratingFunction, h) -> GeneratingFunction:
    """Weighted generating function: sum of h(alpha) z^alpha over the set.

    Each monomial x^gamma of h acts as the operator prod_i (z_i d/dz_i)
    applied gamma_i times; intermediate states are cached by prefix so
    monomials sharing low-index exponents reuse work.
    """
    mons = _monomials_of(h)
    d = g.dimension
    cache: dict[IntVec, tuple[GFTerm, ...]] = {(0,) * d: tuple(g.terms)}

    def state(gamma: IntVec) -> tuple[GFTerm, ...]:
        if gamma in cache:
            return cache[gamma]
        i = max(idx for idx in range(d) if gamma[idx] > 0)
        pred = gamma[:i] + (gamma[i] - 1,) + gamma[i + 1:]
        res = _op_once(state(pred), i)
        cache[gamma] = res
        return res

    pieces = []
    for cf, gamma in sorted(mons, key=lambda m: m[1]):
        for t in state(gamma):
            pieces.append(GFTerm(t.sign,
                                 tuple((cf * c, a) for c, a in t.numerator),
                                 t.denominator))
    return GeneratingFunction(d, _combine(pieces))


# ---------------------------------------------------------------------------
# fast weighted specialization

def _poly_mul(p: dict, q: dict) -> dict:
    out: dict[IntVec, Fraction] = {}
    for ea, ca in p.items():
        for eb, cb in q.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, Fraction(0)) + ca * cb
    return {e: c for e, c in out.items() if c != 0}


def _rebase_polynomial(mons, a: IntVec, bs: Sequence[IntVec]) -> dict:
    """Expand h(a + sum_j nu_j b_j) as a polynomial in nu."""
    k = len(bs)
    lin = []
    for i in range(len(a)):
        p = {(0,) * k: Fraction(a[i])}
        for j in range(k):
            if bs[j][i]:
                e = tuple(1 if r == j else 0 for r in range(k))
                p[e] = p.get(e, Fraction(0)) + bs[j][i]
        lin.append({e: c for e, c in p.items() if c != 0})
    out: dict[IntVec, Fraction] = {}
    pow_cache: dict[tuple[int, int], dict] = {}

    def lin_pow(i, e):
        if e == 0:
            return {(0,) * k: Fraction(1)}
        if (i, e) not in pow_cache:
            pow_cache[(i, e)] = _poly_mul(lin_pow(i, e - 1), lin[i])
        return pow_cache[(i, e)]

    for cf, beta in mons:
        p = {(0,) * k: cf}
        for i, bi in enumerate(beta):
            if bi:
                p = _poly_mul(p, lin_pow(i, bi))
        for e, c in p.items():
            out[e] = out.get(e, Fraction(0)) + c
    return {e: c for e, c in out.items() if c != 0}


def _geometric_moment_series(s: int, top: int, L: int) -> list:
    """H_m = t^(m+1) * sum_nu nu^m (1+t)^(s nu) for m = 0..top, truncated."""
    u = _u_series(s, L)
    H = [_series_inv(u, L)]
    for m in range(1, top + 1):
        prev = H[-1]
        v = [(k - m) * prev[k] for k in range(L + 1)]
        nxt = [Fraction(0)] * (L + 1)
        for kk in range(L + 1):
            w = v[kk] + (v[kk - 1] if kk else 0)
            nxt[kk] = Fraction(w, s)
        H.append(nxt)
    return H


def weighted_sum(g: GeneratingFunction, h, power: int = 1) -> Fraction:
    """Sum of h**power over the lattice points encoded by g.

    Requires freshly decomposed terms (single unit monomial numerators,
    multiplicity-one denominators): each such term is literally the
    geometric series over its own shifted orthant, so h is rewritten in
    orthant coordinates and summed factor by factor.  Raising to `power`
    happens after the rewrite, where the polynomial stays small.
    """
    mons = _monomials_of(h)
    if power < 1:
        raise ValueError("power must be >= 1")
    if not g.terms:
        return Fraction(0)
    vectors = {b for t in g.terms for b, _ in t.denominator}
    mu = _moment_direction(vectors, g.dimension)

    total = Fraction(0)
    for t in g.terms:
        if len(t.numerator) != 1 or any(m != 1 for _, m in t.denominator):
            raise ValueError("weighted_sum needs fresh decomposition terms")
        c0, a = t.numerator[0]
        bs = [b for b, _ in t.denominator]
        k = len(bs)
        base = _rebase_polynomial(mons, a, bs)
        poly = base
        for _ in range(power - 1):
            poly = _poly_mul(poly, base)
        if k == 0:
            total += t.sign * c0 * sum(poly.values())
            continue
        R = [max((e[j] for e in poly), default=0) for j in range(k)]
        E = k + sum(R)
        Hs = [_geometric_moment_series(dot(mu, bs[j]), R[j], E)
              for j in range(k)]

        def collapse(j: int, items: list) -> list:
            if j == k:
                out = [Fraction(0)] * (E + 1)
                out[0] = sum(c for _, c in items)
                return out
            groups: dict[int, list] = {}
            for e, c in items:
                groups.setdefault(e[j], []).append((e, c))
            acc = [Fraction(0)] * (E + 1)
            for m, sub in sorted(groups.items()):
                inner = collapse(j + 1, sub)
                shift = R[j] - m
                shifted = [Fraction(0)] * shift + Hs[j][m][:E + 1 - shift]
                prod = _series_mul(shifted, inner, E)
                for kk in range(E + 1):
                    acc[kk] += prod[kk]
            return acc

        C = collapse(0, list(poly.items()))
        e0 = dot(mu, a)
        val = sum(_binom(e0, E - kk) * C[kk] for kk in range(E + 1))
        total += t.sign * c0 * val
    return total


# ---------------------------------------------------------------------------
# serialization

def dumps(g: GeneratingFunction) -> str:
    """Canonical text form, one term per line, terms sorted."""
    lines = [f"gf dim={g.dimension} terms={len(g.terms)}"]
    rendered = []
    for t in g.terms:
        num = " + ".join(
            f"{format_rat(cf)}*z^({','.join(str(x) for x in a)})"
            for cf, a in t.numerator)
        den = " ".join(
            f"({','.join(str(x) for x in b)})^{m}"
            for b, m in t.denominator)
        rendered.append((t.denominator, t.numerator, t.sign,
                         f"{'+' if t.sign > 0 else '-'} ; {num} ; {den}"))
    lines.extend(line for *_, line in sorted(rendered))
    return "\n".join(lines) + "\n"


_TERM_RE = re.compile(r"^([+-]) ; (.*) ; (.*)$")
_MONO_RE = re.compile(r"^(-?\d+(?:/\d+)?)\*z\^\(([-\d,]*)\)$")
_DEN_RE = re.compile(r"^\(([-\d,]*)\)\^(\d+)$")


def loads(text: str) -> GeneratingFunction:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    head = re.match(r"^gf dim=(\d+) terms=(\d+)$", lines[0])
    if not head:
        raise ValueError("missing generating-function header")
    dim, count = int(head.group(1)), int(head.group(2))
    if len(lines) - 1 != count:
        raise ValueError("term count mismatch")
    terms = []
    for ln in lines[1:]:
        m = _TERM_RE.match(ln)
        if not m:
            raise ValueError(f"bad term line: {ln!r}")
        sign = 1 if m.group(1) == "+" else -1
        num = []
        for part in m.group(2).split(" + "):
            mm = _MONO_RE.match(part.strip())
            if not mm:
                raise ValueError(f"bad monomial: {part!r}")
            exps = tuple(int(x) for x in mm.group(2).split(",")) \
                if mm.group(2) else ()
            num.append((parse_rat(mm.group(1)), exps))
        den = []
        for part in m.group(3).split():
            dm = _DEN_RE.match(part)
            if not dm:
                raise ValueError(f"bad denominator factor: {part!r}")
            vec = tuple(int(x) for x in dm.group(1).split(",")) \
                if dm.group(1) else ()
            den.append((vec, int(dm.group(2))))
        terms.append(GFTerm(sign, tuple(num), tuple(den)))
    return GeneratingFunction(dim, tuple(terms))
