import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasitopo.errors import ConvergenceError
from quasitopo.tridiag import bisect_eigenvalues, sturm_count, tql2


def test_dimer():
    energies, vecs = tql2([0.0, 0.0], [0.8])
    assert np.allclose(energies, [-0.8, 0.8], atol=1e-15)
    assert np.allclose(np.abs(vecs), 1 / math.sqrt(2), atol=1e-15)
    assert vecs[0, 0] * vecs[1, 0] < 0 < vecs[0, 1] * vecs[1, 1]


def test_single_site():
    energies, vecs = tql2([2.5], [])
    assert energies.tolist() == [2.5] and vecs.tolist() == [[1.0]]


def test_general_diagonal_against_numpy(rng):
    d = rng.normal(size=30)
    e = rng.normal(size=29)
    energies, vecs = tql2(d, e)
    dense = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    assert np.allclose(energies, np.linalg.eigvalsh(dense), atol=1e-12)
    assert np.abs(dense @ vecs - vecs * energies).max() < 1e-12
    assert np.allclose(bisect_eigenvalues(d, e), energies, atol=1e-11)


def test_decoupled_blocks_give_degenerate_pairs():
    # two identical dimers joined by a zero bond: each level doubly degenerate
    energies, vecs = tql2(np.zeros(4), [1.0, 0.0, 1.0])
    assert np.allclose(energies, [-1, -1, 1, 1], atol=1e-15)
    assert np.allclose(vecs.T @ vecs, np.eye(4), atol=1e-14)


def test_convergence_failure_names_index():
    with pytest.raises(ConvergenceError, match="index 0") as info:
        tql2(np.zeros(6), np.ones(5), max_iter=0)
    assert info.value.index == 0


def test_shape_mismatch():
    with pytest.raises(ValueError):
        tql2(np.zeros(4), np.ones(4))


def test_sturm_count_uniform_chain():
    # eigenvalues of the N=5 uniform chain are 2cos(k pi/6)
    off = [1.0] * 4
    assert sturm_count([0.0] * 5, off, -2.0) == 0
    assert sturm_count([0.0] * 5, off, 0.5) == 3
    assert sturm_count([0.0] * 5, off, 2.0) == 5


@settings(max_examples=60, deadline=None)
@given(
    st.integers(2, 12).flatmap(
        lambda n: st.tuples(
            st.lists(st.floats(-3, 3), min_size=n, max_size=n),
            st.lists(st.floats(-2, 2), min_size=n - 1, max_size=n - 1),
        )
    )
)
def test_ql_matches_bisection(de):
    d, e = de
    energies, vecs = tql2(d, e)
    assert np.all(np.diff(energies) >= 0)
    assert np.allclose(energies, bisect_eigenvalues(d, e), atol=1e-8, rtol=0)
    dense = np.diag(d) + np.diag(e, 1) + np.diag(e, -1)
    res = np.linalg.norm(dense @ vecs - vecs * energies, axis=0)
    assert np.all(res <= 1e-10 * np.maximum(1, np.abs(energies)))
