import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairshift.effective import (
    EffectiveConfig,
    ImpurityChain,
    Side,
    build_effective_sector_hamiltonian,
    component_chain,
    map_configuration,
    reduce_to_impurity_chain,
)
from pairshift.model import ModelParams, PairKind, Statistics

FERMI = Statistics.FERMI_SPIN_HALF


def _params(kind, n=10, u=40.0, v=0.5):
    if kind is PairKind.NN_BOSE:
        return ModelParams(1.0, 0.0, 30.0, n)
    if kind is PairKind.FERMI_SINGLET:
        return ModelParams(1.0, u, 0.0, n, FERMI)
    return ModelParams(1.0, u, v, n)


def test_impurity_chain_reduction():
    chain = reduce_to_impurity_chain(ModelParams(1.0, 50.0, 0.5), PairKind.ONSITE_BOSE)
    assert chain.device_potentials == (1.0, 1.0)
    assert chain.device_hoppings[1] == -2.0
    assert chain.shift_distance == 1
    nn = reduce_to_impurity_chain(ModelParams(1.0, 0.0, 30.0), PairKind.NN_BOSE)
    assert nn.is_uniform and nn.shift_distance == 2
    fs = reduce_to_impurity_chain(ModelParams(1.0, 30.0, 0.0, statistics=FERMI), PairKind.FERMI_SINGLET)
    assert fs.is_uniform and fs.shift_distance == 1


def test_impurity_chain_validation():
    with pytest.raises(ValueError):
        ImpurityChain(-1.0, (0.0,), (-1.0,))
    h = ImpurityChain(-1.0, (2.0, 3.0), (-1.5, -2.0, -0.5)).finite_hamiltonian(2, 2)
    assert np.allclose(np.diag(h), [0, 0, 2, 3, 0, 0])
    assert np.allclose(np.diag(h, 1), [-1, -1.5, -2, -0.5, -1])


def test_map_configuration_examples():
    lab = map_configuration(PairKind.ONSITE_BOSE, (0, 0, -3))
    assert lab.side is Side.INCIDENT and lab.l == -3 and lab.component == 0
    lab = map_configuration(PairKind.ONSITE_BOSE, (-1, -1, 2))
    assert lab.side is Side.SHIFTED and lab.l == 2 and lab.component == 0
    lab = map_configuration(PairKind.NN_BOSE, (0, 1, 5))
    assert lab.side is Side.SHIFTED and lab.component == 2 and lab.l == 3
    lab = map_configuration(PairKind.NN_BOSE, (2, 3, -1))
    assert lab.side is Side.INCIDENT and lab.component == 2
    assert map_configuration(PairKind.ONSITE_BOSE, (0, 1, 2)).side is Side.PAIR_BROKEN
    assert map_configuration(PairKind.ONSITE_BOSE, (0, 0, 0)).side is Side.PAIR_BROKEN
    assert map_configuration(PairKind.NN_BOSE, (0, 1, 2)).side is Side.PAIR_BROKEN
    lab = map_configuration(PairKind.FERMI_SINGLET, [(4, 0), (4, 1), (1, 1)])
    assert lab.side is Side.INCIDENT and lab.spin == 1
    assert map_configuration(PairKind.FERMI_SINGLET, [(4, 0), (5, 1), (1, 1)]).side is Side.PAIR_BROKEN


@settings(max_examples=200, deadline=None)
@given(b=st.integers(-20, 20), j=st.integers(-20, 20))
def test_map_configuration_swap_continuity(b, j):
    """Incident |l=-1> of component c and shifted |l=0> of c are the two ends of one swap."""
    lab = map_configuration(PairKind.ONSITE_BOSE, (b, b, j))
    if j == b:
        assert lab.side is Side.PAIR_BROKEN
        return
    if lab.side is Side.INCIDENT:
        assert lab.l == j - b and lab.component == b
    else:
        assert lab.component == b + 1 and lab.l == j - b - 1


@pytest.mark.parametrize(
    "kind, dim",
    [(PairKind.ONSITE_BOSE, lambda n: n * (n - 1)), (PairKind.NN_BOSE, lambda n: (n - 3) * (n - 2)),
     (PairKind.FERMI_SINGLET, lambda n: 2 * n * (n - 1))],
)
def test_effective_dimensions(kind, dim):
    eff = build_effective_sector_hamiltonian(_params(kind), kind)
    assert eff.dim == dim(10)
    assert all(eff.index_of[c] == i for i, c in enumerate(eff.basis))


@pytest.mark.parametrize("kind", list(PairKind))
def test_effective_couplings(kind):
    params = _params(kind)
    eff = build_effective_sector_hamiltonian(params, kind)
    h = eff.operator.to_dense()
    assert np.array_equal(h, h.T)
    s = 0 if kind is PairKind.FERMI_SINGLET else None
    i = eff.index_of[EffectiveConfig(5, 1, s)]
    j = eff.index_of[EffectiveConfig(6, 1, s)]
    if kind is PairKind.NN_BOSE:
        hop = 1 / 30.0 + 2 / 30.0
        a, b = EffectiveConfig(5, 3, s), EffectiveConfig(3, 6, s)
        swap = -1.0
    else:
        hop = 2 / 40.0
        a, b = EffectiveConfig(5, 4, s), EffectiveConfig(4, 5, s)
        swap = -2.0 if kind is PairKind.ONSITE_BOSE else -1.0
    assert h[i, j] == pytest.approx(hop, abs=1e-15)
    assert h[eff.index_of[a], eff.index_of[b]] == swap


def test_onsite_contact_and_offset():
    eff = build_effective_sector_hamiltonian(ModelParams(1.0, 40.0, 0.5, 10), PairKind.ONSITE_BOSE)
    h = eff.operator.to_dense()
    i = eff.index_of[EffectiveConfig(5, 4)]
    assert h[i, i] == pytest.approx(1.0 - 7 / 80)
    assert eff.constant_offset == pytest.approx(40 + 4 / 40)


def test_regime_warning():
    with pytest.warns(UserWarning):
        build_effective_sector_hamiltonian(ModelParams(1.0, 3.0, 0.0, 8), PairKind.ONSITE_BOSE)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        build_effective_sector_hamiltonian(ModelParams(1.0, 30.0, 0.0, 8), PairKind.ONSITE_BOSE)


def test_rejects_tiny_chain():
    with pytest.raises(ValueError):
        build_effective_sector_hamiltonian(ModelParams(1.0, 0.0, 30.0, 4), PairKind.NN_BOSE)


@pytest.mark.parametrize("kind", list(PairKind))
def test_leading_order_spectrum_is_union_of_impurity_chains(kind):
    """Leading order decouples into one single-particle chain per scattering component."""
    params = _params(kind, n=9)
    eff = build_effective_sector_hamiltonian(params, kind, leading_order=True)
    h = eff.operator.to_dense()
    spins = (0, 1) if kind is PairKind.FERMI_SINGLET else (None,)
    comps = sorted({lab.component for lab in eff.labels()})
    pieces, covered = [], 0
    for s in spins:
        for c in comps:
            idx, ls = component_chain(eff, c, s)
            if not idx:
                continue
            covered += len(idx)
            sub = h[np.ix_(idx, idx)]
            # each component is itself a nearest-neighbour chain in l
            assert np.count_nonzero(np.triu(sub, 2)) == 0
            assert np.all(np.diff(ls) == 1)
            pieces.append(np.linalg.eigvalsh(sub))
    assert covered == eff.dim
    assert np.allclose(np.sort(np.concatenate(pieces)), np.linalg.eigvalsh(h), atol=1e-12)


def test_onsite_component_matches_impurity_chain():
    params = ModelParams(1.0, 40.0, 0.7, 12)
    eff = build_effective_sector_hamiltonian(params, PairKind.ONSITE_BOSE, leading_order=True)
    idx, ls = component_chain(eff, 6)
    sub = eff.operator.to_dense()[np.ix_(idx, idx)]
    n_left = -ls[0] - 1  # impurity sits at l = -1, 0
    chain = reduce_to_impurity_chain(params, PairKind.ONSITE_BOSE).finite_hamiltonian(n_left, len(idx) - n_left - 2)
    assert np.allclose(sub, chain, atol=1e-15)


def test_spin_blocks_identical():
    eff = build_effective_sector_hamiltonian(_params(PairKind.FERMI_SINGLET), PairKind.FERMI_SINGLET)
    h = eff.operator.to_dense()
    up = [i for i, c in enumerate(eff.basis) if c.spin == 0]
    down = [eff.index_of[EffectiveConfig(eff.basis[i].pair_site, eff.basis[i].particle_site, 1)] for i in up]
    assert np.array_equal(h[np.ix_(up, up)], h[np.ix_(down, down)])
    assert not np.any(h[np.ix_(up, down)])
    assert math.isclose(eff.constant_offset, 40 + 4 / 40)
