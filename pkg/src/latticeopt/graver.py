"""Graver bases and separable convex minimization by augmentation.

The Graver basis of an integer matrix collects, over every orthant, the
minimal nonzero integer kernel vectors under the partial order
"sign-compatible and componentwise no larger".  Every integer kernel
vector is a sign-compatible nonnegative integer combination of basis
elements; that representation property makes the basis an optimality
certificate for separable convex objectives over {x : Ax = b, l <= x <= u}
and drives the greedy augmentation solver.

The basis is computed by completion: starting from a lattice basis of
the kernel and its negations, sums of cancelling pairs are reduced
against the current set and surviving remainders join it, until every
such sum reduces to zero.  The minimal elements of the completed set
form the basis.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .core import kernel_basis, mat_vec, rat, vadd, vneg, vscale, vsub

IntVec = tuple[int, ...]
IntMatrix = tuple[IntVec, ...]


def _as_matrix(A) -> IntMatrix:
    return tuple(tuple(int(x) for x in row) for row in A)


def _conforms(u: IntVec, v: IntVec) -> bool:
    """u lies in v's orthant with |u_i| <= |v_i| everywhere."""
    return all(a * b >= 0 and abs(a) <= abs(b) for a, b in zip(u, v))


def _canonical_sign(g: IntVec) -> IntVec:
    for a in g:
        if a > 0:
            return g
        if a < 0:
            return vneg(g)
    raise ValueError("zero vector")


def _reduce_once(r, G):
    for g in G:
        if _conforms(g, r):
            # largest multiple of g that still conforms
            lam = min(a // b for a, b in zip(r, g) if b != 0)
            return vsub(r, vscale(lam, g))
    return None


def _normal_form(r: IntVec, G: Sequence[IntVec]) -> IntVec:
    while any(r):
        nxt = _reduce_once(r, G)
        if nxt is None:
            break
        r = nxt
    return r


# ---------------------------------------------------------------------------
# Graver basis

@dataclass(frozen=True)
class GraverBasis:
    """Canonical-sign representatives; both orientations belong logically."""
    matrix: IntMatrix
    elements: tuple[IntVec, ...]

    def __post_init__(self):
        object.__setattr__(self, "matrix", _as_matrix(self.matrix))
        elems = tuple(tuple(int(x) for x in g) for g in self.elements)
        if list(elems) != sorted(set(elems)):
            raise ValueError("elements must be sorted and unique")
        for g in elems:
            if g != _canonical_sign(g):
                raise ValueError("element not in canonical sign")
            if any(mat_vec(self.matrix, g)):
                raise ValueError("element outside the kernel")
        object.__setattr__(self, "elements", elems)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    def signed_elements(self) -> tuple[IntVec, ...]:
        return tuple(sorted(self.elements
                            + tuple(vneg(g) for g in self.elements)))

    def __contains__(self, g) -> bool:
        g = tuple(int(x) for x in g)
        return any(g) and _canonical_sign(g) in set(self.elements)


def graver_basis(A) -> GraverBasis:
    """All sign-minimal nonzero integer kernel vectors of A, by completion."""
    A = _as_matrix(A)
    basis = [tuple(int(x) for x in v) for v in kernel_basis(A)]
    G: list[IntVec] = []
    seen = set()
    for v in basis:
        for w in (v, vneg(v)):
            if w not in seen:
                seen.add(w)
                G.append(w)
    queue: list[IntVec] = []

    def enqueue_pairs(new):
        for g in G:
            # only cancelling pairs can shorten a representation
            if any(a * b < 0 for a, b in zip(new, g)):
                s = vadd(new, g)
                if any(s):
                    queue.append(s)

    snapshot = list(G)
    for i, u in enumerate(snapshot):
        for v in snapshot[i + 1:]:
            if any(a * b < 0 for a, b in zip(u, v)):
                s = vadd(u, v)
                if any(s):
                    queue.append(s)
    head = 0
    while head < len(queue):
        s = queue[head]
        head += 1
        r = _normal_form(s, G)
        if any(r):
            enqueue_pairs(r)
            G.append(r)
            seen.add(r)
            if vneg(r) not in seen:
                queue.append(vneg(r))

    candidates = sorted({_canonical_sign(g) for g in G if any(g)})
    minimal = []
    for g in candidates:
        dominated = any(h != g and (_conforms(h, g) or _conforms(vneg(h), g))
                        for h in candidates)
        if not dominated:
            minimal.append(g)
    return GraverBasis(A, tuple(minimal))


# ---------------------------------------------------------------------------
# n-fold structure

@dataclass(frozen=True)
class NFoldSpec:
    """n copies of the column block [A1 / A2]: A1 rows sum across copies,
    A2 rows constrain each copy separately."""
    A1: IntMatrix
    A2: IntMatrix
    n: int
    b: IntVec

    def __post_init__(self):
        A1 = _as_matrix(self.A1)
        A2 = _as_matrix(self.A2)
        if not A1 or not A2:
            raise ValueError("A1 and A2 need at least one row each")
        t = len(A1[0])
        if any(len(r) != t for r in A1 + A2) or t == 0:
            raise ValueError("A1 and A2 must share a positive column count")
        if self.n < 1:
            raise ValueError("n must be positive")
        b = tuple(int(x) for x in self.b)
        if len(b) != len(A1) + self.n * len(A2):
            raise ValueError("right-hand side length must be r + n*s")
        object.__setattr__(self, "A1", A1)
        object.__setattr__(self, "A2", A2)
        object.__setattr__(self, "b", b)

    @property
    def r(self) -> int:
        return len(self.A1)

    @property
    def s(self) -> int:
        return len(self.A2)

    @property
    def t(self) -> int:
        return len(self.A1[0])


def nfold_matrix(spec: NFoldSpec) -> IntMatrix:
    """(r + n*s) x (n*t) block matrix: A1 repeated across the top, A2 on
    the block diagonal."""
    n, t = spec.n, spec.t
    rows = [row * n for row in spec.A1]
    for k in range(n):
        for row in spec.A2:
            rows.append((0,) * (k * t) + row + (0,) * ((n - 1 - k) * t))
    return tuple(rows)


# ---------------------------------------------------------------------------
# separable convex objectives

@dataclass(frozen=True)
class SeparableConvexFn:
    """Sum of per-coordinate convex functions, compared exactly.

    Evaluators map an integer to a Fraction.  Beyond direct evaluation
    the object acts as the comparison oracle the optimality certificate
    is stated for.
    """
    evaluators: tuple[Callable[[int], Fraction], ...]

    @property
    def dimension(self) -> int:
        return len(self.evaluators)

    def value(self, x: Sequence[int]) -> Fraction:
        if len(x) != self.dimension:
            raise ValueError("point dimension mismatch")
        return sum((f(int(v)) for f, v in zip(self.evaluators, x)),
                   Fraction(0))

    def compare(self, x: Sequence[int], y: Sequence[int]) -> int:
        """-1, 0, or 1 as f(x) compares to f(y)."""
        fx, fy = self.value(x), self.value(y)
        return (fx > fy) - (fx < fy)

    def validate_convex(self, l: Sequence[int], u: Sequence[int],
                        samples: int = 64) -> None:
        """Check f_i(m-1) + f_i(m+1) >= 2 f_i(m) on sampled integer m."""
        for i, f in enumerate(self.evaluators):
            lo, hi = int(l[i]), int(u[i])
            if hi - lo <= samples:
                points = range(lo, hi + 1)
            else:
                step = (hi - lo) // samples
                points = list(range(lo, hi + 1, step)) + [hi]
            for m in points:
                if f(m - 1) + f(m + 1) < 2 * f(m):
                    raise ValueError(
                        f"coordinate {i} fails convexity at {m}")

    @staticmethod
    def weighted_square(centers, weights=None) -> "SeparableConvexFn":
        centers = tuple(rat(c) for c in centers)
        weights = tuple(rat(w) for w in weights) if weights is not None \
            else (Fraction(1),) * len(centers)
        if len(weights) != len(centers) or any(w < 0 for w in weights):
            raise ValueError("need one nonnegative weight per center")
        return SeparableConvexFn(tuple(
            (lambda m, c=c, w=w: w * (m - c) ** 2)
            for c, w in zip(centers, weights)))

    @staticmethod
    def absolute_deviation(centers, weights=None) -> "SeparableConvexFn":
        centers = tuple(rat(c) for c in centers)
        weights = tuple(rat(w) for w in weights) if weights is not None \
            else (Fraction(1),) * len(centers)
        if len(weights) != len(centers) or any(w < 0 for w in weights):
            raise ValueError("need one nonnegative weight per center")
        return SeparableConvexFn(tuple(
            (lambda m, c=c, w=w: w * abs(m - c))
            for c, w in zip(centers, weights)))

    @staticmethod
    def linear(costs) -> "SeparableConvexFn":
        costs = tuple(rat(c) for c in costs)
        return SeparableConvexFn(tuple(
            (lambda m, c=c: c * m) for c in costs))

    @staticmethod
    def piecewise_max(pieces) -> "SeparableConvexFn":
        """Coordinate i evaluates max_j (a_j x + b_j) over its pieces;
        a maximum of affine functions is convex by construction."""
        fns = []
        for coord_pieces in pieces:
            cp = tuple((rat(a), rat(b)) for a, b in coord_pieces)
            if not cp:
                raise ValueError("each coordinate needs at least one piece")
            fns.append(lambda m, cp=cp: max(a * m + b for a, b in cp))
        return SeparableConvexFn(tuple(fns))


# ---------------------------------------------------------------------------
# optimality certificate and augmentation

def _check_point(A, b, l, u, x) -> bool:
    return all(l[i] <= x[i] <= u[i] for i in range(len(x))) \
        and tuple(mat_vec(A, x)) == tuple(b)


def _require_feasible(A, b, l, u, x0) -> IntVec:
    x0 = tuple(int(v) for v in x0)
    if not _check_point(A, b, l, u, x0):
        raise ValueError("starting point is not feasible")
    return x0


def check_optimality(x0, f: SeparableConvexFn, A, b, l, u,
                     G: GraverBasis) -> tuple[bool, Optional[IntVec]]:
    """Certificate test: x0 is optimal iff no basis direction improves.

    Returns (True, None) or (False, g) with x0 + g feasible and
    strictly better.
    """
    A = _as_matrix(A)
    x0 = _require_feasible(A, b, l, u, x0)
    for g in G.signed_elements():
        y = vadd(x0, g)
        if _check_point(A, b, l, u, y) and f.compare(y, x0) < 0:
            return False, g
    return True, None


def _alpha_max(x, g, l, u) -> Optional[int]:
    best = None
    for xi, gi, li, ui in zip(x, g, l, u):
        if gi > 0:
            cap = (ui - xi) // gi
        elif gi < 0:
            cap = (xi - li) // (-gi)
        else:
            continue
        best = cap if best is None else min(best, cap)
    return best


def _best_step_along(x, g, alpha_max, f):
    # convex in alpha: binary search for the first non-improving slope
    lo, hi = 1, alpha_max
    while lo < hi:
        mid = (lo + hi) // 2
        if f.compare(vadd(x, vscale(mid + 1, g)),
                     vadd(x, vscale(mid, g))) >= 0:
            hi = mid
        else:
            lo = mid + 1
    return lo


@dataclass(frozen=True)
class AugmentResult:
    x: IntVec
    steps: int


def greedy_augment(x0, f: SeparableConvexFn, A, b, l, u,
                   G: GraverBasis) -> AugmentResult:
    """Repeat the best feasible step alpha*g until no direction improves.

    Each step minimizes f(x + alpha*g) jointly over basis directions g
    and integer alpha >= 1; ties prefer the smallest alpha, then the
    lexicographically smallest g.
    """
    A = _as_matrix(A)
    x = _require_feasible(A, b, l, u, x0)
    f.validate_convex(l, u)
    directions = G.signed_elements()
    steps = 0
    while True:
        best = None          # (y, alpha, g)
        for g in directions:
            amax = _alpha_max(x, g, l, u)
            if amax is None or amax < 1:
                continue
            alpha = _best_step_along(x, g, amax, f)
            y = vadd(x, vscale(alpha, g))
            if best is None:
                if f.compare(y, x) < 0:
                    best = (y, alpha, g)
                continue
            c = f.compare(y, best[0])
            if c < 0 or (c == 0 and (alpha, g) < best[1:]):
                best = (y, alpha, g)
        if best is None:
            return AugmentResult(x, steps)
        x = best[0]
        steps += 1


# ---------------------------------------------------------------------------
# fiber enumeration and n-fold minimization

def enumerate_fiber(A, b, l, u):
    """Yield the integer points of {x : Ax = b, l <= x <= u} in
    lexicographic order.

    DFS over coordinates, pruning any prefix whose remaining columns
    cannot reach b by partial-sum intervals.
    """
    m, n = len(A), len(A[0]) if A else 0
    lo_tail = [[0] * m for _ in range(n + 1)]
    hi_tail = [[0] * m for _ in range(n + 1)]
    for j in range(n - 1, -1, -1):
        for i in range(m):
            a = A[i][j]
            lo_tail[j][i] = lo_tail[j + 1][i] + min(a * l[j], a * u[j])
            hi_tail[j][i] = hi_tail[j + 1][i] + max(a * l[j], a * u[j])

    def rec(j, partial):
        if j == n:
            if all(p == bi for p, bi in zip(partial, b)):
                yield ()
            return
        for v in range(l[j], u[j] + 1):
            nxt = [p + A[i][j] * v for i, p in enumerate(partial)]
            if all(nxt[i] + lo_tail[j + 1][i] <= b[i]
                   <= nxt[i] + hi_tail[j + 1][i] for i in range(m)):
                for rest in rec(j + 1, nxt):
                    yield (v,) + rest

    return rec(0, [0] * m)


@dataclass(frozen=True)
class NFoldResult:
    x: IntVec
    value: Fraction
    steps: int
    certified: bool
    basis_size: int


def nfold_minimize(spec: NFoldSpec, f: SeparableConvexFn, l, u,
                   x0=None) -> NFoldResult:
    """Minimize a separable convex f over the n-fold system's lattice
    points within bounds.

    Without a starting point, one is found by pruned enumeration over
    the box; ValueError if the system is infeasible.
    """
    A = nfold_matrix(spec)
    l = tuple(int(v) for v in l)
    u = tuple(int(v) for v in u)
    if len(l) != spec.n * spec.t or len(u) != spec.n * spec.t:
        raise ValueError("bounds must cover all n*t variables")
    if f.dimension != spec.n * spec.t:
        raise ValueError("objective dimension mismatch")
    if x0 is None:
        x0 = next(enumerate_fiber(A, spec.b, l, u), None)
        if x0 is None:
            raise ValueError("n-fold system is infeasible within bounds")
    G = graver_basis(A)
    result = greedy_augment(x0, f, A, spec.b, l, u, G)
    certified, _ = check_optimality(result.x, f, A, spec.b, l, u, G)
    return NFoldResult(result.x, f.value(result.x), result.steps,
                       certified, len(G))


# ---------------------------------------------------------------------------
# sign-compatible decomposition

def sign_compatible_decompose(z, G: GraverBasis) -> list[tuple[int, IntVec]]:
    """Write a kernel vector as sum(alpha_i * g_i) with every g_i in z's
    orthant, greedily consuming the largest basis direction first."""
    z = tuple(int(v) for v in z)
    if any(mat_vec(G.matrix, z)):
        raise ValueError("vector is not in the kernel")
    out: list[tuple[int, IntVec]] = []
    while any(z):
        fitting = [g for g in G.signed_elements() if _conforms(g, z)]
        if not fitting:
            raise ValueError("no sign-compatible basis direction fits; "
                             "basis is not a Graver basis")
        g = max(fitting, key=lambda h: (sum(abs(a) for a in h), h))
        alpha = min(a // b for a, b in zip(z, g) if b != 0)
        out.append((alpha, g))
        z = vsub(z, vscale(alpha, g))
    return out


# ---------------------------------------------------------------------------
# serialization

def dumps(G: GraverBasis) -> str:
    m = len(G.matrix)
    t = len(G.matrix[0]) if G.matrix else 0
    lines = [f"graver rows={m} cols={t} size={len(G.elements)}"]
    for row in G.matrix:
        lines.append("A " + " ".join(str(x) for x in row))
    for g in G.elements:
        lines.append("g " + " ".join(str(x) for x in g))
    return "\n".join(lines) + "\n"


def loads(text: str) -> GraverBasis:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("graver "):
        raise ValueError("not a graver basis block")
    fields = dict(part.split("=") for part in lines[0].split()[1:])
    rows, cols, size = (int(fields[k]) for k in ("rows", "cols", "size"))
    A, elems = [], []
    for ln in lines[1:]:
        tag, *vals = ln.split()
        vec = tuple(int(v) for v in vals)
        if len(vec) != cols:
            raise ValueError(f"expected {cols} entries per line: {ln!r}")
        if tag == "A":
            A.append(vec)
        elif tag == "g":
            elems.append(vec)
        else:
            raise ValueError(f"unknown line tag {tag!r}")
    if len(A) != rows or len(elems) != size:
        raise ValueError("header does not match the block body")
    return GraverBasis(tuple(A), tuple(elems))
