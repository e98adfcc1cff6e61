"""Matrix and tuple algebra: norms, direct sums, dilations, conjugations,
seeded random generators."""

import numpy as np
import pytest

from freecalc import (
    ConditioningError,
    Embedding,
    InvalidInput,
    MatrixTuple,
    conjugate,
    direct_sum,
    op_norm,
    random_invertible,
    random_tuple,
    random_unitary,
    tuple_norm,
    upper_block2,
    zero_tuple,
)
from freecalc.linalg import singular_values, svd_extremes


def test_op_norm_identity():
    assert op_norm(np.eye(3)) == pytest.approx(1.0, rel=1e-12)


def test_op_norm_zero():
    assert op_norm(np.zeros((4, 4))) == 0.0


def test_op_norm_diagonal():
    # Singular values of a diagonal matrix are the absolute entries.
    assert op_norm(np.diag([0.5, -2.0])) == pytest.approx(2.0, rel=1e-12)


def test_op_norm_rejects_nonfinite():
    with pytest.raises(InvalidInput):
        op_norm(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_tuple_norm_zero():
    assert zero_tuple(2, 3).norm() == 0.0


def test_tuple_norm_componentwise_max():
    x = MatrixTuple([np.eye(2), 2.0 * np.eye(2)])
    assert tuple_norm(x) == pytest.approx(2.0, rel=1e-12)


def test_tuple_norm_nilpotent():
    x = MatrixTuple([np.array([[0.0, 1.0], [0.0, 0.0]])])
    assert x.norm() == pytest.approx(1.0, rel=1e-12)


def test_tuple_requires_square():
    with pytest.raises(InvalidInput):
        MatrixTuple([np.zeros((2, 3))])


def test_tuple_requires_common_dimension():
    with pytest.raises(InvalidInput):
        MatrixTuple([np.zeros((2, 2)), np.zeros((3, 3))])


def test_direct_sum_single():
    x = random_tuple(2, 3, seed=0)
    s = direct_sum([x])
    assert (s - x).norm() == 0.0


def test_direct_sum_scalars():
    a = MatrixTuple([[[2.0]]])
    b = MatrixTuple([[[3.0]]])
    s = direct_sum([a, b])
    assert np.array_equal(s[0], np.diag([2.0, 3.0]).astype(complex))


def test_direct_sum_norm_is_max():
    for seed in range(5):
        x = random_tuple(2, 2, seed=seed)
        y = random_tuple(2, 3, seed=seed + 100)
        assert direct_sum([x, y]).norm() == pytest.approx(
            max(x.norm(), y.norm()), rel=1e-12
        )


def test_direct_sum_associative_exact():
    x = random_tuple(2, 2, seed=1)
    y = random_tuple(2, 3, seed=2)
    z = random_tuple(2, 2, seed=3)
    a = direct_sum([x, direct_sum([y, z])])
    b = direct_sum([x, y, z])
    for ma, mb in zip(a, b):
        assert np.array_equal(ma, mb)


def test_direct_sum_errors():
    with pytest.raises(InvalidInput):
        direct_sum([])
    with pytest.raises(InvalidInput):
        direct_sum([random_tuple(1, 2, 0), random_tuple(2, 2, 0)])


def test_upper_block2_zero_direction():
    x = random_tuple(2, 3, seed=4)
    assert (upper_block2(x, zero_tuple(2, 3)) - direct_sum([x, x])).norm() == 0.0


def test_upper_block2_scalar():
    x = MatrixTuple([[[0.0]]])
    h = MatrixTuple([[[1.0]]])
    assert np.array_equal(
        upper_block2(x, h)[0], np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    )


def test_upper_block2_nested_layout():
    # Nesting the dilation and a doubled direction produces the 4n block
    # pattern: diag x, inner direction at (1,2) and (3,4), outer at (1,3)
    # and (2,4), zero at (1,4).
    n = 2
    x = random_tuple(1, n, seed=5)
    h = random_tuple(1, n, seed=6)
    k = random_tuple(1, n, seed=7)
    big = upper_block2(upper_block2(x, k), direct_sum([h, h]))[0]
    xm, hm, km = x[0], h[0], k[0]

    def blk(i, j):
        return big[i * n:(i + 1) * n, j * n:(j + 1) * n]

    for i in range(4):
        assert np.array_equal(blk(i, i), xm)
    assert np.array_equal(blk(0, 1), km)
    assert np.array_equal(blk(2, 3), km)
    assert np.array_equal(blk(0, 2), hm)
    assert np.array_equal(blk(1, 3), hm)
    assert np.array_equal(blk(0, 3), np.zeros((n, n), dtype=complex))
    assert np.array_equal(blk(1, 2), np.zeros((n, n), dtype=complex))


def test_upper_block2_shape_mismatch():
    with pytest.raises(InvalidInput):
        upper_block2(random_tuple(1, 2, 0), random_tuple(1, 3, 0))


def test_conjugate_identity():
    z = random_tuple(2, 3, seed=8)
    assert (conjugate(np.eye(3), z) - z).norm() <= 1e-14


def test_conjugate_permutation_swaps_blocks():
    a = MatrixTuple([[[2.0]]])
    b = MatrixTuple([[[3.0]]])
    perm = np.array([[0.0, 1.0], [1.0, 0.0]])
    swapped = conjugate(perm, direct_sum([a, b]))
    assert np.allclose(swapped[0], np.diag([3.0, 2.0]))


def test_conjugate_unitary_preserves_norm():
    for seed in range(5):
        z = random_tuple(2, 4, seed=seed)
        u = random_unitary(4, seed=seed + 50)
        assert conjugate(u, z).norm() == pytest.approx(z.norm(), abs=1e-12)


def test_conjugate_singular_raises():
    z = random_tuple(1, 2, seed=9)
    with pytest.raises(ConditioningError):
        conjugate(np.array([[1.0, 0.0], [1.0, 0.0]]), z)


def test_conjugate_block_permutation_singular_values():
    # Swapping direct summands by a block permutation permutes the singular
    # values, which as a set are unchanged componentwise.
    x = random_tuple(2, 2, seed=10)
    y = random_tuple(2, 2, seed=11)
    perm = np.zeros((4, 4))
    perm[0, 2] = perm[1, 3] = perm[2, 0] = perm[3, 1] = 1.0
    lhs = conjugate(perm, direct_sum([x, y]))
    rhs = direct_sum([y, x])
    for a, b in zip(lhs, rhs):
        assert np.allclose(singular_values(a), singular_values(b), atol=1e-10)


def test_svd_extremes_bound_random_vectors():
    rng = np.random.default_rng(12)
    m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    smax, smin = svd_extremes(m)
    assert smin <= smax
    for _ in range(100):
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        v /= np.linalg.norm(v)
        assert np.linalg.norm(m @ v) >= smin - 1e-10


def test_random_unitary_scalar_is_unit_modulus():
    u = random_unitary(1, seed=0)
    assert abs(abs(u[0, 0]) - 1.0) <= 1e-12


def test_random_unitary_deterministic():
    assert np.array_equal(random_unitary(5, seed=7), random_unitary(5, seed=7))


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_random_unitary_orthonormal(seed):
    u = random_unitary(8, seed=seed)
    assert op_norm(u.conj().T @ u - np.eye(8)) <= 1e-12


def test_random_invertible_condition_bound():
    m = random_invertible(2, cond_max=10.0, seed=3)
    smax, smin = svd_extremes(m)
    assert smax / smin <= 10.0 + 1e-9


def test_random_invertible_near_unitary_limit():
    m = random_invertible(3, cond_max=1.0 + 1e-9, seed=4)
    smax, smin = svd_extremes(m)
    assert smax / smin <= 1.0 + 1e-8


def test_random_invertible_deterministic():
    assert np.array_equal(
        random_invertible(4, 100.0, seed=5), random_invertible(4, 100.0, seed=5)
    )


def test_random_invertible_rejects_bad_cond():
    with pytest.raises(InvalidInput):
        random_invertible(2, cond_max=1.0, seed=0)


def test_embedding_unitary_validation():
    u = random_unitary(4, seed=6)
    emb = Embedding(n=2, l=2, mat=u, kind="unitary")
    assert emb.size == 4
    with pytest.raises(InvalidInput):
        Embedding(n=2, l=2, mat=1.5 * u, kind="unitary")


def test_embedding_invertible_cond_cap():
    with pytest.raises(ConditioningError):
        Embedding(n=1, l=2, mat=np.diag([1.0, 1e-15]), kind="invertible")


def test_embedding_conjugate_roundtrip():
    z = random_tuple(1, 4, seed=13)
    emb = Embedding(n=2, l=2, mat=random_unitary(4, seed=14), kind="unitary")
    back = conjugate(emb, z)
    assert back.norm() == pytest.approx(z.norm(), abs=1e-12)


def test_matrix_tuple_immutable():
    x = random_tuple(1, 2, seed=15)
    with pytest.raises(ValueError):
        x[0][0, 0] = 5.0
    with pytest.raises(AttributeError):
        x.mats = ()
