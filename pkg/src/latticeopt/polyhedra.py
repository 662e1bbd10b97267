"""Rational polyhedra in inequality form: vertices, supporting cones, and
deterministic triangulation of pointed cones.

Triangulations are produced half-open: each simplicial piece marks the
facets that are excluded, chosen by a fixed reference direction, so the
pieces partition the cone's points exactly (no shared boundaries and no
lower-dimensional correction terms).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .core import (
    LPProblem,
    clear_denominators,
    det,
    dot,
    kernel_basis,
    primitive,
    rational_rank,
    solve_lp,
    solve_rational,
    transpose,
    vneg,
)


class NotPointedError(ValueError):
    """The polyhedron or cone contains a line."""


@dataclass(frozen=True)
class Polyhedron:
    """{x : A x <= b} with rational data."""
    A: tuple
    b: tuple

    def __post_init__(self):
        A = tuple(tuple(Fraction(x) for x in row) for row in self.A)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", tuple(Fraction(x) for x in self.b))
        if A and any(len(row) != len(A[0]) for row in A):
            raise ValueError("ragged constraint matrix")
        if len(A) != len(self.b):
            raise ValueError("row/rhs count mismatch")

    @property
    def dim(self) -> int:
        if self.A:
            return len(self.A[0])
        raise ValueError("ambient dimension unknown for empty system")

    def contains(self, x) -> bool:
        return all(dot(row, x) <= rhs for row, rhs in zip(self.A, self.b))

    def tight_rows_at(self, x) -> frozenset:
        return frozenset(i for i, (row, rhs) in enumerate(zip(self.A, self.b))
                         if dot(row, x) == rhs)

    def intersect(self, other: "Polyhedron") -> "Polyhedron":
        return Polyhedron(self.A + other.A, self.b + other.b)


def box_polyhedron(lo: Sequence, hi: Sequence) -> Polyhedron:
    """Axis box {lo <= x <= hi} as an inequality system."""
    n = len(lo)
    rows = []
    rhs = []
    for i in range(n):
        e = [0] * n
        e[i] = 1
        rows.append(tuple(e))
        rhs.append(hi[i])
        e = [0] * n
        e[i] = -1
        rows.append(tuple(e))
        rhs.append(-Fraction(lo[i]))
    return Polyhedron(tuple(rows), tuple(rhs))


@dataclass(frozen=True)
class Vertex:
    point: tuple
    tight_rows: frozenset


@dataclass(frozen=True)
class Cone:
    """apex + cone(rays); rays are primitive integer vectors."""
    apex: tuple
    rays: tuple

    def __post_init__(self):
        object.__setattr__(self, "apex",
                           tuple(Fraction(x) for x in self.apex))
        object.__setattr__(self, "rays",
                           tuple(tuple(int(x) for x in r) for r in self.rays))


@dataclass(frozen=True)
class SimplicialCone:
    """apex + cone(generators) with linearly independent generators.

    sign carries the orientation inside signed decompositions.  open_facets
    lists generator indices i whose opposite facet {lambda_i = 0} is
    excluded from the cone.
    """
    apex: tuple
    generators: tuple
    sign: int = 1
    open_facets: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "apex",
                           tuple(Fraction(x) for x in self.apex))
        object.__setattr__(self, "generators",
                           tuple(tuple(int(x) for x in g)
                                 for g in self.generators))
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def index(self) -> int:
        """Absolute determinant of the generator matrix (1 = unimodular)."""
        return abs(det(transpose(self.generators)))


# ---------------------------------------------------------------------------
# feasibility, boundedness, boxes

def find_feasible_point(P: Polyhedron) -> Optional[tuple]:
    n = P.dim
    r = solve_lp(LPProblem(c=(0,) * n, A=P.A, b=P.b, senses=("<=",) * len(P.A)))
    return r.x if r.status == "optimal" else None


def is_empty(P: Polyhedron) -> bool:
    return find_feasible_point(P) is None


def is_bounded(P: Polyhedron) -> bool:
    """True when P (possibly empty) has no recession ray."""
    n = P.dim
    senses = ("<=",) * len(P.A)
    if is_empty(P):
        return True
    for i in range(n):
        c = tuple(1 if j == i else 0 for j in range(n))
        for mx in (True, False):
            r = solve_lp(LPProblem(c=c, A=P.A, b=P.b, senses=senses,
                                   maximize=mx))
            if r.status == "unbounded":
                return False
    return True


def bounding_box(P: Polyhedron) -> Optional[tuple]:
    """Smallest integer box containing P, as (lo, hi) int tuples.

    None for empty P; ValueError for unbounded P.
    """
    n = P.dim
    senses = ("<=",) * len(P.A)
    if is_empty(P):
        return None
    lo = []
    hi = []
    for i in range(n):
        c = tuple(1 if j == i else 0 for j in range(n))
        rmax = solve_lp(LPProblem(c=c, A=P.A, b=P.b, senses=senses))
        rmin = solve_lp(LPProblem(c=c, A=P.A, b=P.b, senses=senses,
                                  maximize=False))
        if rmax.status != "optimal" or rmin.status != "optimal":
            raise ValueError("polyhedron is unbounded")
        hi.append(math.floor(rmax.value))
        lo.append(math.ceil(rmin.value))
    return tuple(lo), tuple(hi)


def implicit_equality_rows(P: Polyhedron) -> tuple:
    """Indices of rows satisfied with equality by every point of P."""
    senses = ("<=",) * len(P.A)
    out = []
    for i, (row, rhs) in enumerate(zip(P.A, P.b)):
        r = solve_lp(LPProblem(c=row, A=P.A, b=P.b, senses=senses,
                               maximize=False))
        if r.status == "optimal" and r.value == rhs:
            out.append(i)
    return tuple(out)


# ---------------------------------------------------------------------------
# vertices

def enumerate_vertices(P: Polyhedron) -> tuple:
    """All vertices of a pointed polyhedron, sorted by point.

    Basis enumeration over tight-row subsets; exact and deterministic.
    Raises NotPointedError when {x : A x <= b} contains a line.
    """
    n = P.dim
    if rational_rank(P.A) < n:
        raise NotPointedError("constraint matrix has rank below dimension")
    seen = {}
    for subset in itertools.combinations(range(len(P.A)), n):
        M = [P.A[i] for i in subset]
        rhs = [P.b[i] for i in subset]
        x = solve_rational(M, rhs)
        if x is None or not P.contains(x):
            continue
        if x not in seen:
            seen[x] = Vertex(point=x, tight_rows=P.tight_rows_at(x))
    return tuple(sorted(seen.values(), key=lambda v: v.point))


def supporting_cone(P: Polyhedron, v) -> Cone:
    """Cone of feasible directions at a vertex, as apex + extreme rays."""
    if isinstance(v, Vertex):
        point, tight = v.point, v.tight_rows
    else:
        point = tuple(Fraction(x) for x in v)
        if not P.contains(point):
            raise ValueError("point not in polyhedron")
        tight = P.tight_rows_at(point)
    n = P.dim
    T = sorted(tight)
    AT = [P.A[i] for i in T]
    if rational_rank(AT) < n:
        raise ValueError("point is not a vertex")
    rays = set()
    if n == 1:
        candidates = [(1,), (-1,)]
    else:
        candidates = []
        for subset in itertools.combinations(range(len(AT)), n - 1):
            M = [AT[i] for i in subset]
            if rational_rank(M) != n - 1:
                continue
            null = kernel_basis(tuple(clear_denominators(row) for row in M))
            if len(null) != 1:
                continue
            candidates.append(primitive(null[0]))
    for d in candidates:
        if all(dot(row, d) <= 0 for row in AT):
            rays.add(d)
        elif all(dot(row, vneg(d)) <= 0 for row in AT):
            rays.add(vneg(d))
    return Cone(apex=point, rays=tuple(sorted(rays)))


# ---------------------------------------------------------------------------
# half-open bookkeeping

def halfopen_sign(normal, eta) -> int:
    """Sign of <normal, eta + (eps, eps^2, ...)> for all small eps > 0.

    eta is a rational reference direction; the moment-curve perturbation
    breaks ties exactly, so the result is never zero for nonzero normals.
    """
    s = dot(normal, eta)
    if s != 0:
        return 1 if s > 0 else -1
    for c in normal:
        if c != 0:
            return 1 if c > 0 else -1
    raise ValueError("zero normal")


def facet_normals(generators) -> tuple:
    """Inward facet normals of a full-dimensional simplicial cone.

    Row i is the primitive integer normal of facet {lambda_i = 0}, positive
    on the cone side: <a_i, g_j> = 0 for j != i and <a_i, g_i> > 0.
    """
    B = transpose(generators)          # generators as columns
    d = len(B)
    D = det(B)
    if D == 0:
        raise ValueError("generators are dependent")
    out = []
    for i in range(d):
        # row i of adj(B): cofactors along column i of B
        row = []
        for j in range(d):
            minor = [[B[r][c] for c in range(d) if c != i]
                     for r in range(d) if r != j]
            cof = (-1) ** (i + j) * (det(minor) if minor else 1)
            row.append(cof)
        if D < 0:
            row = [-x for x in row]
        out.append(primitive(row))
    return tuple(out)


def open_facets_for(generators, eta) -> frozenset:
    """Facets to exclude so that pieces sharing a boundary never overlap:
    facet i is open exactly when the reference direction lies strictly on
    its outer side."""
    return frozenset(i for i, a in enumerate(facet_normals(generators))
                     if halfopen_sign(a, eta) < 0)


# ---------------------------------------------------------------------------
# triangulation

def _is_pointed(rays) -> bool:
    """No line in cone(rays): 0 is not a convex combination of the rays."""
    if not rays:
        return True
    n = len(rays[0])
    k = len(rays)
    A_eq = [tuple(r[i] for r in rays) for i in range(n)]
    A_eq.append(tuple([1] * k))
    b = [0] * n + [1]
    res = solve_lp(LPProblem(c=(0,) * k, A=tuple(A_eq), b=tuple(b),
                             senses=("=",) * (n + 1), lower=(0,) * k))
    return res.status == "infeasible"


def _interior_functional(rays) -> tuple:
    """c with <c, r> > 0 for every ray of a pointed cone."""
    s = tuple(sum(col) for col in zip(*rays))
    if all(dot(s, r) > 0 for r in rays):
        return s
    n = len(rays[0])
    # max t s.t. <c, r_i> >= t, -1 <= c <= 1
    A = [tuple(list(vneg(r)) + [1]) for r in rays]
    res = solve_lp(LPProblem(
        c=(0,) * n + (1,), A=tuple(A), b=(0,) * len(rays),
        senses=("<=",) * len(rays),
        lower=(-1,) * n + (0,), upper=(1,) * n + (2,)))
    if res.status != "optimal" or res.value <= 0:
        raise NotPointedError("cone contains a line")
    c = clear_denominators(res.x[:n])
    return c


def _fan_2d(rays) -> list:
    """Consecutive pairs of the angularly sorted rays of a pointed 2-D cone.

    Interior rays are kept as subdivision points, so n rays give n-1 pieces.
    """
    uniq = sorted(set(primitive(r) for r in rays))
    if len(uniq) == 1:
        raise ValueError("need at least two distinct rays")
    c = _interior_functional(uniq)
    cperp = (-c[1], c[0])

    def slope(r):
        return Fraction(dot(cperp, r)) / Fraction(dot(c, r))

    ordered = sorted(uniq, key=slope)
    return [(ordered[i], ordered[i + 1]) for i in range(len(ordered) - 1)]


def _extreme_rays(rays) -> list:
    """Drop rays that are nonnegative combinations of the others."""
    rays = sorted(set(primitive(r) for r in rays))
    out = []
    for i, r in enumerate(rays):
        others = [s for j, s in enumerate(rays) if j != i]
        if not others:
            out.append(r)
            continue
        n = len(r)
        A = [tuple(s[k] for s in others) for k in range(n)]
        res = solve_lp(LPProblem(c=(0,) * len(others), A=tuple(A),
                                 b=tuple(r), senses=("=",) * n,
                                 lower=(0,) * len(others)))
        if res.status != "optimal":
            out.append(r)
    return out


def _facets_of(rays, dim) -> list:
    """Facets of a full-dimensional pointed cone as ray index sets."""
    m = len(rays)
    found = {}
    for subset in itertools.combinations(range(m), dim - 1):
        M = [rays[i] for i in subset]
        if rational_rank(M) != dim - 1:
            continue
        null = kernel_basis(tuple(M))
        if len(null) != 1:
            continue
        h = primitive(null[0])
        signs = [dot(h, r) for r in rays]
        if all(s >= 0 for s in signs):
            pass
        elif all(s <= 0 for s in signs):
            h = vneg(h)
            signs = [-s for s in signs]
        else:
            continue
        members = tuple(i for i, s in enumerate(signs) if s == 0)
        found[members] = h
    return sorted(found.keys())


def _coordinates_in_span(rays, span_rays):
    """Express rays in a basis chosen from span_rays; integer outputs."""
    basis = []
    for r in span_rays:
        if rational_rank(basis + [r]) > len(basis):
            basis.append(r)
    k = len(basis)
    Bt = transpose(basis)              # columns are basis vectors
    coords = []
    for r in rays:
        # solve sum_j c_j basis_j = r  (overdetermined, consistent)
        rows = [tuple(Bt[i]) for i in range(len(Bt))]
        sol = None
        for subset in itertools.combinations(range(len(rows)), k):
            M = [rows[i] for i in subset]
            rhs = [r[i] for i in subset]
            cand = solve_rational(M, rhs)
            if cand is not None:
                ok = all(dot(rows[i], cand) == r[i] for i in range(len(rows)))
                if ok:
                    sol = cand
                    break
        if sol is None:
            raise ValueError("ray outside span")
        coords.append(primitive(clear_denominators(sol)))
    return coords


def _pull(rays, dim) -> list:
    """Pulling triangulation of a pointed full-dimensional cone; returns
    tuples of rays.  Deterministic: recursion always pulls the smallest ray."""
    rays = sorted(rays)
    if len(rays) == dim:
        return [tuple(rays)]
    if dim == 1:
        return [(rays[0],)]
    if dim == 2:
        return _fan_2d(rays)
    v = rays[0]
    pieces = []
    for members in _facets_of(rays, dim):
        fac = [rays[i] for i in members]
        if v in fac:
            continue
        coords = _coordinates_in_span(fac, fac)
        sub = _pull(coords, dim - 1)
        index = {c: r for c, r in zip(coords, fac)}
        for simplex in sub:
            pieces.append(tuple(sorted([index[c] for c in simplex] + [v])))
    return pieces


def triangulate(cone: Cone, reference=None) -> tuple:
    """Split a pointed full-dimensional cone into half-open simplicial cones.

    The pieces partition the cone's points exactly: facets shared between
    pieces are kept by exactly one of them, decided by the reference
    direction (default: the sum of the cone's rays, which lies strictly
    inside, so the outer boundary stays closed).
    """
    rays = [primitive(r) for r in cone.rays]
    if not rays:
        raise ValueError("cone has no rays")
    if not _is_pointed(rays):
        raise NotPointedError("cone contains a line")
    d = len(rays[0])
    span = rational_rank(rays)
    if span < d:
        if len(set(rays)) == 1:
            return (SimplicialCone(apex=cone.apex, generators=(rays[0],)),)
        raise ValueError("cone is not full-dimensional")
    if reference is None:
        reference = tuple(sum(col) for col in zip(*sorted(set(rays))))
    if d == 1:
        return (SimplicialCone(apex=cone.apex, generators=(rays[0],)),)
    if d == 2:
        raw = _fan_2d(rays)
    else:
        raw = _pull(_extreme_rays(rays), d)
    out = []
    for gens in raw:
        out.append(SimplicialCone(
            apex=cone.apex, generators=tuple(gens), sign=1,
            open_facets=open_facets_for(gens, reference)))
    return tuple(out)
