"""Graver basis completion, certificates, and greedy augmentation."""

import itertools
import math
import random
from fractions import Fraction

import pytest

from latticeopt.core import LPProblem, mat_vec, solve_lp, vadd, vneg, vsub
from latticeopt.graver import (
    AugmentResult,
    GraverBasis,
    NFoldSpec,
    SeparableConvexFn,
    check_optimality,
    dumps,
    graver_basis,
    greedy_augment,
    loads,
    nfold_matrix,
    nfold_minimize,
    sign_compatible_decompose,
)

F = Fraction


# ---------------------------------------------------------------------------
# oracles

def conforms(u, v):
    return all(a * b >= 0 and abs(a) <= abs(b) for a, b in zip(u, v))


def brute_graver(A, bound):
    """Sign-minimal kernel vectors with coordinates in [-bound, bound].

    Any dominator of an in-box vector is itself in the box, so the
    filter is exact there.
    """
    n = len(A[0])
    kernel = [v for v in itertools.product(range(-bound, bound + 1), repeat=n)
              if any(v) and not any(mat_vec(A, v))]
    out = set()
    for v in kernel:
        if not any(u != v and conforms(u, v) for u in kernel):
            first = next(a for a in v if a)
            out.add(v if first > 0 else vneg(v))
    return out


def box_points(l, u):
    return itertools.product(*(range(lo, hi + 1) for lo, hi in zip(l, u)))


def feasible_points(A, b, l, u):
    return [x for x in box_points(l, u) if tuple(mat_vec(A, x)) == tuple(b)]


def brute_minimum(A, b, l, u, f):
    pts = feasible_points(A, b, l, u)
    return min(f.value(x) for x in pts)


def random_matrix(rng, m, n):
    while True:
        A = tuple(tuple(rng.randint(-2, 2) for _ in range(n))
                  for _ in range(m))
        if all(any(row) for row in A):
            return A


# ---------------------------------------------------------------------------
# basis computation

def test_two_balanced_columns():
    G = graver_basis(((1, 1),))
    assert G.elements == ((1, -1),)
    assert set(G.signed_elements()) == {(1, -1), (-1, 1)}


def test_weighted_row_matches_brute_force():
    A = ((1, 2, 1),)
    G = graver_basis(A)
    bound = max(abs(a) for g in G for a in g)
    assert set(G.elements) == brute_graver(A, bound)


def test_zero_matrix_gives_unit_vectors():
    G = graver_basis(((0, 0),))
    assert set(G.elements) == {(1, 0), (0, 1)}


def test_trivial_kernel_gives_empty_basis():
    G = graver_basis(((1, 0), (0, 1)))
    assert G.elements == ()


def test_random_matrices_match_brute_force():
    rng = random.Random(3)
    for _ in range(8):
        m, n = rng.choice([(1, 3), (2, 4)])
        A = random_matrix(rng, m, n)
        G = graver_basis(A)
        bound = max((abs(a) for g in G for a in g), default=1)
        assert set(G.elements) == brute_graver(A, bound)


def test_no_element_dominates_another():
    for A in (((1, 2, 1),), ((2, -3, 1, 0), (1, 1, -2, 1))):
        G = graver_basis(A)
        signed = G.signed_elements()
        for g in signed:
            assert not any(h != g and conforms(h, g) for h in signed)


def test_basis_validation():
    with pytest.raises(ValueError):
        GraverBasis(((1, 1),), ((-1, 1),))     # sign not canonical
    with pytest.raises(ValueError):
        GraverBasis(((1, 1),), ((1, 0),))      # not in kernel
    with pytest.raises(ValueError):
        GraverBasis(((1, 1),), ((1, -1), (1, -1)))  # duplicate


def test_serialization_roundtrip():
    G = graver_basis(((1, 2, 1),))
    text = dumps(G)
    assert text.splitlines()[0] == f"graver rows=1 cols=3 size={len(G)}"
    H = loads(text)
    assert H == G
    assert dumps(loads(dumps(G))) == dumps(G)


# ---------------------------------------------------------------------------
# n-fold matrices

def test_nfold_two_scalars():
    spec = NFoldSpec(((1,),), ((1,),), 2, (0, 0, 0))
    assert nfold_matrix(spec) == ((1, 1), (1, 0), (0, 1))


def test_nfold_shape_and_blocks():
    A1 = ((1, 2, 3), (4, 5, 6))
    A2 = ((7, 8, 9),)
    spec = NFoldSpec(A1, A2, 3, (0,) * 5)
    M = nfold_matrix(spec)
    assert len(M) == 5 and all(len(r) == 9 for r in M)
    assert M[0] == (1, 2, 3) * 3
    assert M[2] == (7, 8, 9, 0, 0, 0, 0, 0, 0)
    assert M[4] == (0, 0, 0, 0, 0, 0, 7, 8, 9)


def test_nfold_single_copy_stacks():
    spec = NFoldSpec(((1, 1),), ((2, 0),), 1, (0, 0))
    assert nfold_matrix(spec) == ((1, 1), (2, 0))


def test_nfold_spec_validation():
    with pytest.raises(ValueError):
        NFoldSpec(((1, 1),), ((1,),), 2, (0, 0, 0))      # column mismatch
    with pytest.raises(ValueError):
        NFoldSpec(((1,),), ((1,),), 0, ())               # n < 1
    with pytest.raises(ValueError):
        NFoldSpec(((1,),), ((1,),), 2, (0, 0))           # b too short


# ---------------------------------------------------------------------------
# separable convex objectives

def test_builtin_objectives_evaluate():
    sq = SeparableConvexFn.weighted_square((3, 0), (1, 2))
    assert sq.value((5, 1)) == 4 + 2
    ab = SeparableConvexFn.absolute_deviation((1,))
    assert ab.value((-2,)) == 3
    lin = SeparableConvexFn.linear((F(1, 2), -1))
    assert lin.value((4, 3)) == -1
    pw = SeparableConvexFn.piecewise_max((((1, 0), (-1, 0)),))  # |x|
    assert pw.value((-7,)) == 7
    assert sq.compare((3, 0), (5, 1)) == -1
    assert sq.compare((2, 0), (4, 0)) == 0


def test_convexity_validation():
    for f in (SeparableConvexFn.weighted_square((0,)),
              SeparableConvexFn.absolute_deviation((2,)),
              SeparableConvexFn.linear((-3,)),
              SeparableConvexFn.piecewise_max((((2, -1), (-1, 4)),))):
        f.validate_convex((-5,), (5,))
    bad = SeparableConvexFn((lambda m: F(-m * m),))
    with pytest.raises(ValueError):
        bad.validate_convex((-5,), (5,))


def test_superadditivity_in_common_orthant():
    rng = random.Random(5)
    fs = [SeparableConvexFn.weighted_square((1, -2, 0), (1, 3, F(1, 2))),
          SeparableConvexFn.absolute_deviation((0, 2, -1)),
          SeparableConvexFn.piecewise_max(
              (((1, 0), (-2, 1)), ((0, 0), (3, -2)), ((-1, -1),)))]
    for _ in range(40):
        signs = [rng.choice([-1, 1]) for _ in range(3)]
        hs = [tuple(s * rng.randint(0, 3) for s in signs) for _ in range(3)]
        x = tuple(rng.randint(-4, 4) for _ in range(3))
        total = x
        for h in hs:
            total = vadd(total, h)
        for f in fs:
            lhs = f.value(total) - f.value(x)
            rhs = sum(f.value(vadd(x, h)) - f.value(x) for h in hs)
            assert lhs >= rhs


# ---------------------------------------------------------------------------
# optimality certificate

def setup_transport():
    A = ((1, 1),)
    b = (4,)
    l, u = (0, 0), (4, 4)
    f = SeparableConvexFn.weighted_square((3, 3))
    return A, b, l, u, f, graver_basis(A)


def test_certificate_accepts_optimum():
    A, b, l, u, f, G = setup_transport()
    assert min(f.value(x) for x in feasible_points(A, b, l, u)) \
        == f.value((2, 2))
    assert check_optimality((2, 2), f, A, b, l, u, G) == (True, None)


def test_certificate_rejects_suboptimal_point():
    A, b, l, u, f, G = setup_transport()
    ok, g = check_optimality((0, 4), f, A, b, l, u, G)
    assert not ok
    y = vadd((0, 4), g)
    assert f.value(y) < f.value((0, 4))
    assert tuple(mat_vec(A, y)) == b


def test_certificate_on_unique_point():
    A = ((1, 0), (0, 1))
    G = graver_basis(A)
    f = SeparableConvexFn.weighted_square((0, 0))
    assert check_optimality((1, 2), f, A, (1, 2), (0, 0), (3, 3), G) \
        == (True, None)


def test_certificate_requires_feasible_start():
    A, b, l, u, f, G = setup_transport()
    with pytest.raises(ValueError):
        check_optimality((1, 1), f, A, b, l, u, G)


# ---------------------------------------------------------------------------
# greedy augmentation

def test_augment_reaches_center():
    A, b, l, u, f, G = setup_transport()
    res = greedy_augment((4, 0), f, A, b, l, u, G)
    assert res.x == (2, 2) and res.steps >= 1
    assert check_optimality(res.x, f, A, b, l, u, G)[0]


def test_augment_keeps_optimum():
    A, b, l, u, f, G = setup_transport()
    assert greedy_augment((2, 2), f, A, b, l, u, G) == AugmentResult((2, 2), 0)


def test_augment_four_fold_matches_brute_force():
    spec = NFoldSpec(((1,),), ((1,),), 4, (6, 1, 2, 0, 3))
    A = nfold_matrix(spec)
    f = SeparableConvexFn.weighted_square((2, 2, 2, 2))
    l, u = (0,) * 4, (6,) * 4
    x0 = (1, 2, 0, 3)
    res = greedy_augment(x0, f, A, spec.b, l, u, graver_basis(A))
    assert f.value(res.x) == brute_minimum(A, spec.b, l, u, f)


def test_augment_step_counts_stay_modest():
    rng = random.Random(9)
    for _ in range(10):
        n = rng.choice([3, 4])
        A = random_matrix(rng, 1, n)
        l = tuple(0 for _ in range(n))
        u = tuple(rng.randint(2, 5) for _ in range(n))
        seed = tuple(rng.randint(l[i], u[i]) for i in range(n))
        b = tuple(mat_vec(A, seed))
        centers = tuple(rng.randint(-2, 6) for _ in range(n))
        f = SeparableConvexFn.weighted_square(centers)
        G = graver_basis(A)
        res = greedy_augment(seed, f, A, b, l, u, G)
        fstar = brute_minimum(A, b, l, u, f)
        assert f.value(res.x) == fstar
        gap = f.value(seed) - fstar
        allowance = (2 * n - 2) * (2 + math.log2(1 + float(gap)))
        assert res.steps <= allowance


# ---------------------------------------------------------------------------
# n-fold minimization

def test_nfold_minimize_unique_point():
    spec = NFoldSpec(((1,),), ((1,),), 2, (3, 1, 2))
    f = SeparableConvexFn.weighted_square((0, 0))
    res = nfold_minimize(spec, f, (0, 0), (5, 5))
    assert res.x == (1, 2) and res.certified
    assert res.value == brute_minimum(nfold_matrix(spec), spec.b,
                                      (0, 0), (5, 5), f)


def test_nfold_minimize_detects_infeasible():
    spec = NFoldSpec(((1,),), ((1,),), 2, (3, 1, 1))
    f = SeparableConvexFn.weighted_square((0, 0))
    with pytest.raises(ValueError):
        nfold_minimize(spec, f, (0, 0), (5, 5))


def test_nfold_minimize_linear_objective():
    # copies share one coupling row; second block row pins each x_i
    spec = NFoldSpec(((1, 1),), ((1, 0),), 2, (5, 1, 2))
    f = SeparableConvexFn.linear((0, 3, 0, 1))
    l, u = (0,) * 4, (5,) * 4
    res = nfold_minimize(spec, f, l, u)
    A = nfold_matrix(spec)
    assert res.value == brute_minimum(A, spec.b, l, u, f)
    assert res.certified
    assert tuple(mat_vec(A, res.x)) == spec.b


def test_nfold_minimize_quadratic_matches_brute_force():
    rng = random.Random(17)
    for _ in range(5):
        n = rng.choice([2, 3])
        b0 = rng.randint(2, 6)
        caps = tuple(rng.randint(1, 3) for _ in range(n))
        spec = NFoldSpec(((1,),), ((1,),), n, (b0,) + caps)
        if sum(caps) != b0:
            with pytest.raises(ValueError):
                nfold_minimize(spec,
                               SeparableConvexFn.weighted_square((0,) * n),
                               (0,) * n, (8,) * n)
            continue
        f = SeparableConvexFn.weighted_square(
            tuple(rng.randint(0, 4) for _ in range(n)))
        res = nfold_minimize(spec, f, (0,) * n, (8,) * n)
        assert res.value == brute_minimum(nfold_matrix(spec), spec.b,
                                          (0,) * n, (8,) * n, f)


# ---------------------------------------------------------------------------
# sign-compatible decomposition

def test_decompose_basis_element():
    G = graver_basis(((1, 1),))
    assert sign_compatible_decompose((1, -1), G) == [(1, (1, -1))]


def test_decompose_multiple():
    G = graver_basis(((1, 1),))
    assert sign_compatible_decompose((-2, 2), G) == [(2, (-1, 1))]


def test_decompose_random_kernel_vectors():
    rng = random.Random(21)
    done = 0
    while done < 50:
        A = random_matrix(rng, 2, 4)
        G = graver_basis(A)
        if not G.elements:
            continue
        coeffs = [rng.randint(-3, 3) for _ in G.elements]
        z = (0,) * 4
        for c, g in zip(coeffs, G.elements):
            z = vadd(z, tuple(c * a for a in g))
        if not any(z):
            continue
        parts = sign_compatible_decompose(z, G)
        resum = (0,) * 4
        for alpha, g in parts:
            assert alpha >= 1
            assert conforms(g, z)
            resum = vadd(resum, tuple(alpha * a for a in g))
        assert resum == z
        done += 1


def test_decompose_rejects_non_kernel_vector():
    G = graver_basis(((1, 1),))
    with pytest.raises(ValueError):
        sign_compatible_decompose((1, 0), G)


# ---------------------------------------------------------------------------
# certificate soundness against brute force

def test_certificate_soundness_randomized():
    rng = random.Random(29)
    for _ in range(60):
        n = rng.choice([3, 4])
        A = random_matrix(rng, 1, n)
        l = (0,) * n
        u = tuple(rng.randint(1, 4) for _ in range(n))
        seed = tuple(rng.randint(0, u[i]) for i in range(n))
        b = tuple(mat_vec(A, seed))
        f = SeparableConvexFn.weighted_square(
            tuple(rng.randint(-1, 5) for _ in range(n)),
            tuple(rng.choice([1, 1, 2, F(1, 2)]) for _ in range(n)))
        G = graver_basis(A)
        fstar = brute_minimum(A, b, l, u, f)
        ok, g = check_optimality(seed, f, A, b, l, u, G)
        if ok:
            assert f.value(seed) == fstar, "false optimality certificate"
        else:
            y = vadd(seed, g)
            assert f.value(y) < f.value(seed)


# ---------------------------------------------------------------------------
# edge directions of fibers

def hull_vertices(points):
    verts = []
    for i, p in enumerate(points):
        others = [q for j, q in enumerate(points) if j != i]
        n = len(others)
        # p in conv(others)?  feasibility via phase-I objective
        prob = LPProblem(
            c=(0,) * n,
            A=tuple(tuple(F(q[k]) for q in others) for k in range(len(p)))
            + ((1,) * n,),
            b=tuple(F(v) for v in p) + (1,),
            senses=("=",) * (len(p) + 1),
            lower=(0,) * n)
        if solve_lp(prob).status != "optimal":
            verts.append(p)
    return verts


def is_edge(p, q, verts):
    others = [r for r in verts if r not in (p, q)]
    d = len(p)
    rows = [tuple(F(a - b) for a, b in zip(p, q))]
    senses = ["="]
    rhs = [F(0)]
    for r in others:
        rows.append(tuple(F(a - b) for a, b in zip(p, r)))
        senses.append(">=")
        rhs.append(F(1))
    prob = LPProblem(c=(0,) * d, A=tuple(rows), b=tuple(rhs),
                     senses=tuple(senses))
    return solve_lp(prob).status == "optimal"


def test_basis_covers_fiber_edge_directions():
    rng = random.Random(31)
    for _ in range(6):
        n = 3
        A = (tuple(rng.randint(1, 3) for _ in range(n)),)
        b = (rng.randint(3, 7),)
        cap = b[0]
        pts = feasible_points(A, b, (0,) * n, (cap,) * n)
        if len(pts) < 2:
            continue
        verts = hull_vertices(pts)
        G = graver_basis(A)
        signed = set(G.signed_elements())
        for p, q in itertools.combinations(verts, 2):
            if not is_edge(p, q, verts):
                continue
            d = vsub(p, q)

            def parallel(h):
                # d a positive integer multiple of h?
                lam = None
                for a, hk in zip(d, h):
                    if hk == 0:
                        if a != 0:
                            return False
                        continue
                    if a % hk:
                        return False
                    q_, r_ = divmod(a, hk)
                    if lam is None:
                        lam = q_
                    elif lam != q_:
                        return False
                return lam is not None and lam > 0
            assert any(parallel(h) for h in signed), (A, b, p, q, d)
