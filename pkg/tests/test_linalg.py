import numpy as np
import pytest
from hypothesis import given

from gausscp.linalg import eigvalsh_2x2, hermitian_eigvalsh, hermiticity_defect, is_psd

from strategies import random_hermitian, seeds


@given(seeds)
def test_closed_form_matches_lapack(seed):
    h = random_hermitian(np.random.default_rng(seed), 2)
    assert np.allclose(eigvalsh_2x2(h), np.linalg.eigvalsh(h), atol=1e-12)


def test_stacked_input():
    rng = np.random.default_rng(0)
    stack = np.array([random_hermitian(rng, 2) for _ in range(5)])
    assert np.allclose(eigvalsh_2x2(stack), np.linalg.eigvalsh(stack), atol=1e-12)


def test_no_cancellation_near_degeneracy():
    # tr^2 - 4 det underflows below the ulp of 4 here; the hypot form keeps the split.
    h = np.diag([1.0, 1.0 + 2e-8])
    lo, hi = eigvalsh_2x2(h)
    assert (hi - lo) == pytest.approx(2e-8, rel=1e-7)


def test_larger_matrices_use_lapack():
    h = random_hermitian(np.random.default_rng(1), 4)
    assert np.allclose(hermitian_eigvalsh(h), np.linalg.eigvalsh(h))


def test_psd_helpers():
    assert is_psd(np.eye(2))
    assert not is_psd(np.diag([1.0, -1e-6]))
    assert hermiticity_defect(np.array([[0, 1j], [1j, 0]])) == 2.0
