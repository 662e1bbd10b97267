"""Exact arithmetic kernel: rational vectors, integer linear algebra, lattice
reduction, and a fraction-exact simplex solver.

Everything downstream builds on this module.  All numbers are ints or
`fractions.Fraction`; nothing here ever touches floating point, so results
are reproducible bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Optional, Sequence


Rat = Fraction

# ---------------------------------------------------------------------------
# rationals

def rat(p, q=1) -> Fraction:
    """Reduced rational with positive denominator (Fraction guarantees both)."""
    return Fraction(p, q)


def parse_rat(text: str) -> Fraction:
    """Parse 'p' or 'p/q' into a Fraction."""
    return Fraction(text.strip())


def format_rat(x: Fraction) -> str:
    """Render a rational as 'p' or 'p/q', always reduced."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------
# vectors and matrices (tuples; entries int or Fraction)

def dot(u: Sequence, v: Sequence):
    if len(u) != len(v):
        raise ValueError("dimension mismatch")
    return sum(a * b for a, b in zip(u, v))


def vadd(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vsub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vneg(u):
    return tuple(-a for a in u)


def vscale(c, u):
    return tuple(c * a for a in u)


def is_zero_vector(u) -> bool:
    return all(a == 0 for a in u)


def mat_vec(M, x):
    return tuple(dot(row, x) for row in M)


def mat_mul(A, B):
    Bt = transpose(B)
    return tuple(tuple(dot(row, col) for col in Bt) for row in A)


def transpose(M):
    return tuple(zip(*M)) if M else ()


def identity_matrix(n: int):
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def vec_gcd(v) -> int:
    g = 0
    for a in v:
        g = gcd(g, abs(a))
    return g


def primitive(v) -> tuple:
    """Divide an integer vector by the gcd of its entries (direction kept)."""
    g = vec_gcd(v)
    if g == 0:
        raise ValueError("zero vector has no primitive form")
    return tuple(a // g for a in v)


def lex_canonical(v) -> tuple:
    """Primitive representative of the line through v whose first nonzero
    entry is positive."""
    p = primitive(v)
    for a in p:
        if a != 0:
            return p if a > 0 else vneg(p)
    raise ValueError("zero vector")


def clear_denominators(v) -> tuple:
    """Scale a rational vector by the positive lcm of denominators: integer tuple."""
    lcm = 1
    for x in v:
        f = Fraction(x)
        lcm = lcm * f.denominator // gcd(lcm, f.denominator)
    return tuple(int(Fraction(x) * lcm) for x in v)


# ---------------------------------------------------------------------------
# integer determinants, Hermite normal form, kernels

def det(M) -> int:
    """Determinant of a square integer matrix (fraction-free Bareiss)."""
    n = len(M)
    if any(len(row) != n for row in M):
        raise ValueError("matrix not square")
    a = [[int(x) for x in row] for row in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def rational_rank(M) -> int:
    """Rank over the rationals."""
    if not M:
        return 0
    rows = [[Fraction(x) for x in row] for row in M]
    ncols = len(rows[0])
    rank = 0
    col = 0
    while rank < len(rows) and col < ncols:
        piv = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        pv = rows[rank][col]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                f = rows[i][col] / pv
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        col += 1
    return rank


def solve_rational(M, b) -> Optional[tuple]:
    """Solve a square system M x = b exactly; None when M is singular."""
    n = len(M)
    aug = [[Fraction(x) for x in row] + [Fraction(bb)] for row, bb in zip(M, b)]
    for col in range(n):
        piv = next((i for i in range(col, n) if aug[i][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [a / pv for a in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [a - f * b2 for a, b2 in zip(aug[i], aug[col])]
    return tuple(aug[i][n] for i in range(n))


def hnf(M) -> tuple:
    """Row Hermite normal form with transform:  returns (H, U), H = U*M.

    H is in row echelon form with positive pivots, zeros below each pivot,
    and entries above a pivot reduced modulo it (0 <= entry < pivot).
    U is unimodular.  Zero rows of H sit at the bottom.
    """
    m = len(M)
    h = [[int(x) for x in row] for row in M]
    ncols = len(h[0]) if m else 0
    u = [list(row) for row in identity_matrix(m)]
    row = 0
    for col in range(ncols):
        if row == m:
            break
        # euclidean elimination below position (row, col)
        while True:
            nz = [i for i in range(row, m) if h[i][col] != 0]
            if not nz:
                break
            piv = min(nz, key=lambda i: abs(h[i][col]))
            h[row], h[piv] = h[piv], h[row]
            u[row], u[piv] = u[piv], u[row]
            if h[row][col] < 0:
                h[row] = [-x for x in h[row]]
                u[row] = [-x for x in u[row]]
            done = True
            for i in range(row + 1, m):
                if h[i][col] != 0:
                    q = h[i][col] // h[row][col]
                    h[i] = [a - q * b for a, b in zip(h[i], h[row])]
                    u[i] = [a - q * b for a, b in zip(u[i], u[row])]
                    if h[i][col] != 0:
                        done = False
            if done:
                break
        if h[row][col] != 0:
            # reduce entries above the pivot
            for i in range(row):
                q = h[i][col] // h[row][col]
                if q:
                    h[i] = [a - q * b for a, b in zip(h[i], h[row])]
                    u[i] = [a - q * b for a, b in zip(u[i], u[row])]
            row += 1
    return tuple(tuple(r) for r in h), tuple(tuple(r) for r in u)


def kernel_basis(M) -> tuple:
    """Lattice basis of the integer kernel {x in Z^n : M x = 0}.

    Rows of the result generate the kernel lattice (saturated, so every
    integer kernel vector is an integer combination of them).
    """
    Mt = transpose(M)
    if not Mt:
        n = len(M[0]) if M else 0
        return tuple(identity_matrix(n))
    h, u = hnf(Mt)
    out = []
    for hrow, urow in zip(h, u):
        if all(x == 0 for x in hrow):
            out.append(tuple(urow))
    return tuple(out)


def solve_integer(M, b) -> Optional[tuple]:
    """One integer solution of M x = b, or None if there is none."""
    n = len(M[0]) if M else 0
    h, u = hnf(transpose(M))          # h = u * M^T, so M = h^T u^{-T}
    ht = transpose(h)                 # lower-triangular-ish m x n
    # solve ht * y = b by forward substitution over pivot columns of h
    y = [0] * len(h)
    mrows = len(M)
    resid = [int(x) for x in b]
    for j in range(len(h)):
        pivot_col = next((c for c in range(mrows) if h[j][c] != 0), None)
        if pivot_col is None:
            continue
        if resid[pivot_col] % h[j][pivot_col] != 0:
            return None
        y[j] = resid[pivot_col] // h[j][pivot_col]
        if y[j]:
            for c in range(mrows):
                resid[c] -= y[j] * h[j][c]
    if any(resid):
        return None
    x = mat_vec(transpose(u), y)
    return tuple(int(v) for v in x)


# ---------------------------------------------------------------------------
# LLL lattice basis reduction

def lll_reduce(basis, delta: Fraction = Fraction(3, 4)) -> tuple:
    """LLL-reduce the rows of an integer basis (exact rational arithmetic).

    Raises ValueError on linearly dependent rows.  The output spans the same
    lattice, is size-reduced (|mu_ij| <= 1/2) and satisfies the Lovasz
    condition for the given delta.
    """
    reduced, _ = lll_reduce_with_transform(basis, delta)
    return reduced


def lll_reduce_with_transform(basis, delta: Fraction = Fraction(3, 4)) -> tuple:
    """Like lll_reduce but also returns unimodular U with  reduced = U * basis."""
    b = [list(map(int, row)) for row in basis]
    n = len(b)
    u = [list(row) for row in identity_matrix(n)]

    def gram_schmidt():
        star = []
        mu = [[Fraction(0)] * n for _ in range(n)]
        norms = []
        for i in range(n):
            v = [Fraction(x) for x in b[i]]
            for j in range(i):
                if norms[j] == 0:
                    raise ValueError("linearly dependent rows")
                mu[i][j] = Fraction(dot(b[i], star[j])) / norms[j]
                v = [a - mu[i][j] * s for a, s in zip(v, star[j])]
            star.append(v)
            norms.append(dot(v, v))
            if norms[i] == 0:
                raise ValueError("linearly dependent rows")
        return star, mu, norms

    star, mu, norms = gram_schmidt()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            if abs(mu[k][j]) > Fraction(1, 2):
                q = round(mu[k][j])
                b[k] = [a - q * c for a, c in zip(b[k], b[j])]
                u[k] = [a - q * c for a, c in zip(u[k], u[j])]
                star, mu, norms = gram_schmidt()
        if norms[k] >= (delta - mu[k][k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            u[k], u[k - 1] = u[k - 1], u[k]
            star, mu, norms = gram_schmidt()
            k = max(k - 1, 1)
    return tuple(tuple(r) for r in b), tuple(tuple(r) for r in u)


# ---------------------------------------------------------------------------
# linear programming (exact two-phase simplex, Bland's rule)

class LPError(Exception):
    pass


@dataclass(frozen=True)
class LPProblem:
    """max (or min) c.x subject to rows A x {<=,=,>=} b and optional bounds.

    senses is one string per row: '<=', '=', '>='.  lower/upper are per
    variable, None meaning unbounded on that side.  Empty constraint data is
    allowed: with no rows and no bounds the problem is unbounded unless the
    objective is zero, in which case the origin is reported optimal.
    """
    c: tuple
    A: tuple
    b: tuple
    senses: tuple
    lower: tuple = None
    upper: tuple = None
    maximize: bool = True

    def __post_init__(self):
        n = len(self.c)
        if self.lower is None:
            object.__setattr__(self, "lower", tuple([None] * n))
        if self.upper is None:
            object.__setattr__(self, "upper", tuple([None] * n))


@dataclass(frozen=True)
class LPResult:
    status: str          # 'optimal' | 'infeasible' | 'unbounded'
    x: Optional[tuple]
    value: Optional[Fraction]


def _pivot(tab, rhs, basis, r, col):
    pv = tab[r][col]
    tab[r] = [a / pv for a in tab[r]]
    rhs[r] = rhs[r] / pv
    for i in range(len(tab)):
        if i != r and tab[i][col] != 0:
            f = tab[i][col]
            tab[i] = [a - f * b2 for a, b2 in zip(tab[i], tab[r])]
            rhs[i] = rhs[i] - f * rhs[r]
    basis[r] = col


def _simplex_max(tab, rhs, basis, cost):
    """Maximize cost.x over the tableau (rows already basic-feasible).

    Returns 'optimal' or 'unbounded'.  Bland's rule throughout, so cycling
    is impossible.
    """
    m = len(tab)
    ncols = len(cost)
    while True:
        cb = [cost[basis[i]] for i in range(m)]
        entering = None
        for j in range(ncols):
            red = cost[j] - sum(cb[i] * tab[i][j] for i in range(m))
            if red > 0:
                entering = j
                break
        if entering is None:
            return "optimal"
        best = None
        leave = None
        for i in range(m):
            if tab[i][entering] > 0:
                ratio = rhs[i] / tab[i][entering]
                if best is None or ratio < best or (
                        ratio == best and basis[i] < basis[leave]):
                    best = ratio
                    leave = i
        if leave is None:
            return "unbounded"
        _pivot(tab, rhs, basis, leave, entering)


def solve_lp(problem: LPProblem) -> LPResult:
    """Exact simplex.  Splits free variables, two phases, Bland's rule."""
    n = len(problem.c)
    c = [Fraction(x) for x in problem.c]
    if not problem.maximize:
        c = [-x for x in c]

    rows = []
    for row, sense, rhs in zip(problem.A, problem.senses, problem.b):
        if sense not in ("<=", "=", ">="):
            raise LPError(f"unknown sense {sense!r}")
        rows.append(([Fraction(x) for x in row], sense, Fraction(rhs)))
    for j, lo in enumerate(problem.lower):
        if lo is not None:
            e = [Fraction(0)] * n
            e[j] = Fraction(1)
            rows.append((e, ">=", Fraction(lo)))
    for j, up in enumerate(problem.upper):
        if up is not None:
            e = [Fraction(0)] * n
            e[j] = Fraction(1)
            rows.append((e, "<=", Fraction(up)))

    if not rows:
        if all(x == 0 for x in c):
            zero = tuple(Fraction(0) for _ in range(n))
            return LPResult("optimal", zero, Fraction(0))
        return LPResult("unbounded", None, None)

    m = len(rows)
    nslack = sum(1 for _, sense, _ in rows if sense != "=")
    width = 2 * n + nslack + m          # u, v, slacks, artificials
    tab = []
    rhs = []
    si = 0
    for i, (row, sense, bb) in enumerate(rows):
        line = [Fraction(0)] * width
        for j in range(n):
            line[j] = row[j]
            line[n + j] = -row[j]
        if sense == "<=":
            line[2 * n + si] = Fraction(1)
            si += 1
        elif sense == ">=":
            line[2 * n + si] = Fraction(-1)
            si += 1
        if bb < 0:
            line = [-a for a in line]
            bb = -bb
        line[2 * n + nslack + i] = Fraction(1)
        tab.append(line)
        rhs.append(bb)

    basis = [2 * n + nslack + i for i in range(m)]

    # phase one: drive artificials to zero
    phase1 = [Fraction(0)] * width
    for i in range(m):
        phase1[2 * n + nslack + i] = Fraction(-1)
    _simplex_max(tab, rhs, basis, phase1)
    p1val = sum(phase1[basis[i]] * rhs[i] for i in range(m))
    if p1val != 0:
        return LPResult("infeasible", None, None)

    # pivot leftover artificials out of the basis (or drop redundant rows)
    drop = []
    for i in range(m):
        if basis[i] >= 2 * n + nslack:
            col = next((j for j in range(2 * n + nslack) if tab[i][j] != 0), None)
            if col is None:
                drop.append(i)
            else:
                _pivot(tab, rhs, basis, i, col)
    if drop:
        tab = [row for i, row in enumerate(tab) if i not in drop]
        rhs = [v for i, v in enumerate(rhs) if i not in drop]
        basis = [v for i, v in enumerate(basis) if i not in drop]

    # phase two on the real objective, artificial columns frozen
    cost = [Fraction(0)] * width
    for j in range(n):
        cost[j] = c[j]
        cost[n + j] = -c[j]
    # forbid artificial re-entry by truncating candidate columns
    for i in range(len(tab)):
        tab[i] = tab[i][: 2 * n + nslack]
    cost = cost[: 2 * n + nslack]

    status = _simplex_max(tab, rhs, basis, cost)
    if status == "unbounded":
        return LPResult("unbounded", None, None)
    xfull = [Fraction(0)] * (2 * n + nslack)
    for i, bi in enumerate(basis):
        if bi < len(xfull):
            xfull[bi] = rhs[i]
    x = tuple(xfull[j] - xfull[n + j] for j in range(n))
    value = dot([Fraction(v) for v in problem.c], x)
    return LPResult("optimal", x, value)


# ---------------------------------------------------------------------------
# integer roots and a certified ceiling of c*ln(N)

def iroot_floor(x: int, k: int) -> int:
    """Largest r >= 0 with r^k <= x (x >= 0)."""
    if x < 0:
        raise ValueError("negative radicand")
    if x == 0:
        return 0
    r = 1 << ((x.bit_length() + k - 1) // k)
    while True:
        nr = ((k - 1) * r + x // r ** (k - 1)) // k
        if nr >= r:
            break
        r = nr
    while r ** k > x:
        r -= 1
    while (r + 1) ** k <= x:
        r += 1
    return r


def kth_root_floor_rational(x: Fraction, k: int) -> int:
    """Largest integer r with r^k <= x."""
    x = Fraction(x)
    if x < 0:
        raise ValueError("negative radicand")
    r = iroot_floor(x.numerator // x.denominator, k)
    while (r + 1) ** k * x.denominator <= x.numerator:
        r += 1
    while r > 0 and r ** k * x.denominator > x.numerator:
        r -= 1
    return r


def kth_root_ceil_rational(x: Fraction, k: int) -> int:
    """Smallest integer r with r^k >= x."""
    x = Fraction(x)
    if x <= 0:
        return 0
    f = kth_root_floor_rational(x, k)
    if Fraction(f) ** k == x:
        return f
    return f + 1


def _atanh_bounds(num: int, den: int, terms: int) -> tuple:
    """Certified bounds on atanh(num/den) for 0 <= num/den <= 1/3."""
    y = Fraction(num, den)
    if y == 0:
        return Fraction(0), Fraction(0)
    y2 = y * y
    s = Fraction(0)
    t = y
    j = 1
    for _ in range(terms):
        s += t / j
        t *= y2
        j += 2
    # tail < (t/j) / (1 - y^2) <= (9/8) t / j for y <= 1/3
    return s, s + t * Fraction(9, 8) / j


def _ln_bounds(n: int, terms: int) -> tuple:
    """Certified rational bounds L < ln(n) < U for integer n >= 2.

    Splits off the power of two below n, so both series run at argument
    <= 1/3 and converge geometrically: ln n = s ln 2 + 2 atanh((n-2^s)/(n+2^s)).
    """
    s = n.bit_length() - 1
    lo2, hi2 = _atanh_bounds(1, 3, terms)          # atanh(1/3) = ln(2)/2
    lox, hix = _atanh_bounds(n - (1 << s), n + (1 << s), terms)
    return 2 * (s * lo2 + lox), 2 * (s * hi2 + hix)


def ceil_mul_ln(c: Fraction, n: int) -> int:
    """ceil(c * ln(n)) for rational c > 0 and integer n >= 1, certified.

    The log is sandwiched between rational bounds tightened until both
    ends share a ceiling, so the result is never undersized or oversized;
    c*ln(n) itself is irrational for n >= 2, so the loop terminates.
    """
    if n <= 1:
        return 0
    c = Fraction(c)
    terms = 16
    while True:
        lo, hi = _ln_bounds(n, terms)
        klo = math.ceil(c * lo)
        khi = math.ceil(c * hi)
        if klo == khi:
            return klo
        terms *= 2
