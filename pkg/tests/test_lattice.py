import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasitopo.errors import ParameterError, SiteIndexError
from quasitopo.lattice import (
    GOLDEN_MEAN,
    LatticeParams,
    build_couplings,
    build_hamiltonian,
    coupling_strength,
    golden_mean,
    paper_params,
)

# mpmath, 50 digits: 0.5 * (1 + 0.5 * cos(2 pi g + 0.2 pi)), g = (sqrt5 + 1) / 2
J1_PAPER_PHI02 = 0.45012481988626929083994593552136461901923441606384
# same with n = 37, phi = 0.9 pi
J37_PAPER_PHI09 = 0.39746857967190604191593051165186621465888538166416

params_st = st.builds(
    LatticeParams,
    n_sites=st.integers(2, 150),
    t=st.floats(0.01, 10),
    lam=st.floats(-1, 1),
    b=st.floats(0.1, 5),
    phi=st.floats(-20, 20),
)


def test_golden_mean_value():
    assert golden_mean() == 1.6180339887498949 == GOLDEN_MEAN


def test_golden_mean_identities():
    g = golden_mean()
    assert abs(g * g - (g + 1)) <= 1e-15
    assert abs(1 / g - (g - 1)) <= 1e-15


def test_coupling_uniform_when_unmodulated():
    p = LatticeParams(n_sites=10, t=0.5, lam=0.0, b=3.7, phi=1.2)
    assert coupling_strength(p, 1) == 0.5


def test_coupling_matches_high_precision():
    assert coupling_strength(paper_params(100, 0.2), 1) == pytest.approx(J1_PAPER_PHI02, rel=1e-14)
    assert coupling_strength(paper_params(100, 0.9), 37) == pytest.approx(J37_PAPER_PHI09, rel=1e-13)


def test_coupling_full_cosine():
    assert coupling_strength(LatticeParams(n_sites=3, t=1, lam=1, b=1, phi=0), 1) == 2.0


@pytest.mark.parametrize("n", [0, 100, -1])
def test_coupling_index_range(n):
    with pytest.raises(SiteIndexError):
        coupling_strength(paper_params(100), n)


def test_build_couplings_dimer():
    p = LatticeParams(n_sites=2, t=0.7, lam=0.3, b=GOLDEN_MEAN, phi=0.4)
    prof = build_couplings(p)
    assert len(prof) == 1
    assert prof[1] == coupling_strength(p, 1)


def test_build_couplings_elementwise_paper():
    p = paper_params(100, 0.2)
    prof = build_couplings(p)
    assert len(prof) == 99
    for n in range(1, 100):
        assert prof[n] == coupling_strength(p, n)
    with pytest.raises(SiteIndexError):
        prof[100]


def test_build_couplings_uniform():
    prof = build_couplings(LatticeParams(n_sites=20, t=0.3, lam=0.0))
    assert np.all(prof.couplings == 0.3)


def test_hamiltonian_dimer():
    p = LatticeParams(n_sites=2, t=1.3, lam=0.0)
    assert np.array_equal(build_hamiltonian(p).to_dense(), [[0, 1.3], [1.3, 0]])


def test_hamiltonian_uniform_three_chain():
    h = build_hamiltonian(LatticeParams(n_sites=3, t=1.0, lam=0.0))
    assert list(h.off_diagonal) == [1.0, 1.0]
    evals = np.linalg.eigvalsh(h.to_dense())
    assert np.allclose(evals, [-math.sqrt(2), 0, math.sqrt(2)], atol=1e-14)


def test_hamiltonian_band_is_couplings_bitwise():
    p = paper_params(100, 0.2)
    h = build_hamiltonian(p)
    assert h.dimension == 100
    assert np.array_equal(h.off_diagonal, build_couplings(p).couplings)
    dense = h.to_dense()
    assert np.array_equal(dense, dense.T)
    assert np.all(np.diag(dense) == 0) and h.trace() == 0


def test_hamiltonian_matvec_matches_dense(rng):
    h = build_hamiltonian(paper_params(17, 0.3))
    v = rng.normal(size=17) + 1j * rng.normal(size=17)
    assert np.allclose(h.matvec(v), h.to_dense() @ v, atol=1e-15)


def test_phi_reduced_into_range():
    p = LatticeParams(n_sites=5, phi=-0.5)
    assert 0 <= p.phi < 2 * math.pi
    assert p.phi == pytest.approx(2 * math.pi - 0.5)
    assert LatticeParams(n_sites=5, phi=2 * math.pi).phi == 0.0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_sites": 1},
        {"n_sites": 5, "t": 0},
        {"n_sites": 5, "t": -1},
        {"n_sites": 5, "lam": 1.2},
        {"n_sites": 5, "b": 0},
        {"n_sites": 2.5},
        {"n_sites": 5, "phi": float("nan")},
    ],
)
def test_invalid_params_rejected(kwargs):
    with pytest.raises(ParameterError):
        LatticeParams(**kwargs)


def test_nonphysical_override():
    p = LatticeParams(n_sites=10, lam=1.5, allow_nonphysical=True)
    assert not p.physical
    assert paper_params().physical
    assert min(build_couplings(p).couplings) < 0


def test_config_block_roundtrip():
    p = paper_params(101, 0.9)
    assert LatticeParams.from_dict(p.to_dict()) == p
    q = LatticeParams.from_dict({"n_sites": 101, "t": 0.5, "lambda": 0.5, "phi_pi": 0.9})
    assert q == p


@pytest.mark.parametrize(
    "block",
    [
        {"n_sites": 10, "t": 0.5, "lambda": 0.5},
        {"n_sites": 10, "t": 0.5, "lambda": 0.5, "phi": 1, "phi_pi": 0.3},
        {"n_sites": 10, "t": 0.5, "phi": 1},
        {"n_sites": 10, "t": 0.5, "lambda": 0.5, "phi": 1, "colour": "red"},
    ],
)
def test_config_block_errors(block):
    with pytest.raises(ParameterError):
        LatticeParams.from_dict(block)


@settings(max_examples=200, deadline=None)
@given(params_st, st.data())
def test_coupling_bounded_by_modulation(p, data):
    n = data.draw(st.integers(1, p.n_sites - 1))
    j = coupling_strength(p, n)
    assert abs(j - p.t) <= p.t * abs(p.lam) * (1 + 1e-12) + 1e-15
    assert j >= -1e-15


@settings(max_examples=200, deadline=None)
@given(params_st, st.data())
def test_coupling_periodic_in_phi(p, data):
    n = data.draw(st.integers(1, p.n_sites - 1))
    shifted = LatticeParams(p.n_sites, p.t, p.lam, p.b, p.phi + 2 * math.pi)
    assert coupling_strength(shifted, n) == pytest.approx(coupling_strength(p, n), rel=1e-12, abs=1e-12 * p.t)


@settings(max_examples=200, deadline=None)
@given(params_st, st.data())
def test_site_shift_equals_phase_shift(p, data):
    n = data.draw(st.integers(1, p.n_sites - 2)) if p.n_sites > 2 else None
    if n is None:
        return
    moved = LatticeParams(p.n_sites, p.t, p.lam, p.b, p.phi + 2 * math.pi * p.b)
    # absolute slack: phases near 2*pi*b*n lose ~n*eps to argument rounding
    assert coupling_strength(p, n + 1) == pytest.approx(
        coupling_strength(moved, n), rel=1e-12, abs=1e-12 * p.t * max(1, n * p.b)
    )


@settings(max_examples=50, deadline=None)
@given(params_st)
def test_hamiltonian_structure_property(p):
    h = build_hamiltonian(p)
    assert np.array_equal(h.off_diagonal, build_couplings(p).couplings)
    assert np.all(h.diagonal == 0)
