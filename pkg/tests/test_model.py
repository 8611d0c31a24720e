import math
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairshift.model import (
    Boundary,
    KBlockMode,
    ModelParams,
    PairKind,
    Sector,
    SparseHermitianOperator,
    Statistics,
    build_k_block,
    build_real_space_hamiltonian,
    enumerate_basis,
    periodic_k_grid,
    translation_operator,
)
from pairshift.spectrum import solve_k_block

FERMI = Statistics.FERMI_SPIN_HALF


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(0.0, 1.0)
    with pytest.raises(ValueError):
        ModelParams(1.0, 1.0, v=0.5, n_sites=4, statistics=FERMI)
    with pytest.raises(ValueError):
        ModelParams(1.0, math.nan)
    p = ModelParams(1.0, 2.0, n_sites=4, boundary=Boundary.PERIODIC)
    assert (3, 0) in p.bonds() and len(p.bonds()) == 4
    assert len(p.replace(boundary=Boundary.OPEN).bonds()) == 3


def test_pair_kind_properties():
    assert PairKind.NN_BOSE.shift_distance == 2
    assert PairKind.ONSITE_BOSE.shift_distance == 1
    assert PairKind.FERMI_SINGLET.statistics is FERMI


@pytest.mark.parametrize(
    "n, stats, sector, dim",
    [
        (3, Statistics.BOSE, Sector.bose(2), 6),
        (3, FERMI, Sector.fermi(1, 1), 9),
        (5, Statistics.BOSE, Sector.bose(3), 35),
    ],
)
def test_basis_dimensions(n, stats, sector, dim):
    basis = enumerate_basis(ModelParams(1.0, 1.0, n_sites=n, statistics=stats), sector)
    assert basis.dim == dim


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 7), particles=st.integers(0, 3))
def test_bose_basis_bijective(n, particles):
    basis = enumerate_basis(ModelParams(1.0, 1.0, n_sites=n), Sector.bose(particles))
    assert basis.dim == comb(n + particles - 1, particles)
    for i, row in enumerate(basis.occupations):
        assert basis.index(row) == i
    assert np.array_equal(basis.lookup(basis.occupations), np.arange(basis.dim))


@settings(max_examples=30, deadline=None)
@given(n=st.integers(2, 6), up=st.integers(0, 3), down=st.integers(0, 3))
def test_fermi_basis_dimension(n, up, down):
    params = ModelParams(1.0, 1.0, n_sites=n, statistics=FERMI)
    if up > n or down > n:
        with pytest.raises(ValueError):
            enumerate_basis(params, Sector.fermi(up, down))
        return
    basis = enumerate_basis(params, Sector.fermi(up, down))
    assert basis.dim == comb(n, up) * comb(n, down)


def test_basis_rejects_single_site():
    with pytest.raises(ValueError):
        enumerate_basis(ModelParams(1.0, 1.0, n_sites=1), Sector.bose(2))


def test_basis_order_is_descending_lexicographic():
    basis = enumerate_basis(ModelParams(1.0, 1.0, n_sites=2), Sector.bose(2))
    assert basis.occupations.tolist() == [[2, 0], [1, 1], [0, 2]]


def test_two_site_hamiltonian():
    u = 3.0
    params = ModelParams(1.0, u, n_sites=2)
    h = build_real_space_hamiltonian(params, enumerate_basis(params, Sector.bose(2))).to_dense()
    s2 = math.sqrt(2)
    assert np.allclose(h, [[u, -s2, 0], [-s2, 0, -s2], [0, -s2, u]], atol=1e-15)
    want = sorted([u, (u + math.sqrt(u * u + 16)) / 2, (u - math.sqrt(u * u + 16)) / 2])
    assert np.allclose(np.linalg.eigvalsh(h), want, atol=1e-13)
    h0 = build_real_space_hamiltonian(params.replace(u=0.0), enumerate_basis(params, Sector.bose(2))).to_dense()
    assert np.allclose(np.linalg.eigvalsh(h0), [-2, 0, 2], atol=1e-14)


@pytest.mark.parametrize(
    "stats, sector",
    [(Statistics.BOSE, Sector.bose(3)), (FERMI, Sector.fermi(2, 1)), (FERMI, Sector.fermi(2, 2))],
)
@pytest.mark.parametrize("boundary", [Boundary.OPEN, Boundary.PERIODIC])
def test_hermitian_and_real_diagonal(stats, sector, boundary):
    v = 0.7 if stats is Statistics.BOSE else 0.0
    params = ModelParams(1.3, 4.0, v, n_sites=5, statistics=stats, boundary=boundary)
    h = build_real_space_hamiltonian(params, enumerate_basis(params, sector)).to_dense()
    assert np.max(np.abs(h - h.conj().T)) == 0
    assert np.all(np.diag(h).imag == 0)


@pytest.mark.parametrize(
    "stats, sector", [(Statistics.BOSE, Sector.bose(2)), (FERMI, Sector.fermi(1, 1)), (FERMI, Sector.fermi(2, 1))]
)
@pytest.mark.parametrize("n", [5, 7])
def test_translation_commutes(stats, sector, n):
    v = 0.5 if stats is Statistics.BOSE else 0.0
    params = ModelParams(1.0, 3.0, v, n_sites=n, statistics=stats, boundary=Boundary.PERIODIC)
    basis = enumerate_basis(params, sector)
    h = build_real_space_hamiltonian(params, basis).to_dense()
    t = translation_operator(basis).toarray()
    assert np.max(np.abs(h @ t - t @ h)) <= 1e-14


def test_fermi_single_pair_energy():
    # one up and one down fermion on two open sites: singlet energies (U +- sqrt(U^2 + 16))/2 and 0, U
    u = 5.0
    params = ModelParams(1.0, u, n_sites=2, statistics=FERMI)
    h = build_real_space_hamiltonian(params, enumerate_basis(params, Sector.fermi(1, 1))).to_dense()
    r = math.sqrt(u * u + 16)
    assert np.allclose(np.linalg.eigvalsh(h), sorted([0.0, u, (u - r) / 2, (u + r) / 2]), atol=1e-13)


def test_sparse_operator_algebra():
    op = SparseHermitianOperator.from_pairs(3, [1, 0], [0, 2], [2.0, 1j])
    dense = op.to_dense()
    assert np.allclose(dense, dense.conj().T)
    x = np.array([1.0, 2.0, 3.0])
    assert np.allclose(op @ x, dense @ x)
    assert np.allclose((op + op).to_dense(), 2 * dense)
    assert op.norm_bound() >= np.max(np.abs(np.linalg.eigvalsh(dense))) - 1e-12


def test_k_block_entries():
    params = ModelParams(1.0, 8.0, 0.5, n_sites=5, boundary=Boundary.PERIODIC)
    block = build_k_block(params, 2 * math.pi / 5, 2, KBlockMode.PERIODIC_EXACT)
    golden = (1 + math.sqrt(5)) / 2
    assert block.t_k == pytest.approx(-golden, abs=1e-14)
    assert block.boundary_t == pytest.approx(golden, abs=1e-14)
    m = block.matrix
    assert m[0, 0] == 8.0 and m[1, 1] == 0.5 + 0.0 and m[2, 2] == pytest.approx(golden)
    assert m[0, 1] == pytest.approx(math.sqrt(2) * block.t_k)
    assert np.array_equal(m, m.T)


def test_k_block_zero_hopping():
    # kappa must be nonzero in ModelParams; the hopping-free limit is reached through a tiny kappa
    block = build_k_block(ModelParams(1e-300, 8.0, 0.5), 0.3, 6)
    assert np.array_equal(np.diag(block.matrix), [8.0, 0.5, 0, 0, 0, 0, 0])
    assert np.allclose(solve_k_block(block)[0], sorted([8.0, 0.5, 0, 0, 0, 0, 0]))


def test_k_block_rejects_off_grid():
    params = ModelParams(1.0, 8.0, n_sites=5, boundary=Boundary.PERIODIC)
    with pytest.raises(ValueError):
        build_k_block(params, 0.3, 2, KBlockMode.PERIODIC_EXACT)
    with pytest.raises(ValueError):
        build_k_block(params, 0.0, 3, KBlockMode.PERIODIC_EXACT)
    with pytest.raises(ValueError):
        periodic_k_grid(6)


@pytest.mark.parametrize("n", [3, 5, 7, 9])
def test_block_union_equals_real_space(n):
    params = ModelParams(1.0, 8.0, 0.5, n_sites=n, boundary=Boundary.PERIODIC)
    real = np.linalg.eigvalsh(build_real_space_hamiltonian(params, enumerate_basis(params, Sector.bose(2))).to_dense())
    blocks = np.sort(np.concatenate(
        [solve_k_block(build_k_block(params, k, n // 2, KBlockMode.PERIODIC_EXACT))[0] for k in periodic_k_grid(n)]
    ))
    assert np.allclose(real, blocks, atol=1e-12, rtol=0)


@pytest.mark.parametrize("n", [5, 7])
def test_fermi_singlet_shares_bose_blocks(n):
    """Up-down pair spectrum = bosonic blocks (singlets) + spin-triplet partner states."""
    u = 6.0
    bose = ModelParams(1.0, u, n_sites=n, boundary=Boundary.PERIODIC)
    fermi = bose.replace(statistics=FERMI)
    singlet = np.concatenate(
        [solve_k_block(build_k_block(bose, k, n // 2, KBlockMode.PERIODIC_EXACT))[0] for k in periodic_k_grid(n)]
    )
    full = np.linalg.eigvalsh(build_real_space_hamiltonian(fermi, enumerate_basis(fermi, Sector.fermi(1, 1))).to_dense())
    remaining = list(full)
    for e in singlet:
        j = int(np.argmin(np.abs(np.array(remaining) - e)))
        assert abs(remaining[j] - e) <= 1e-10
        remaining.pop(j)
