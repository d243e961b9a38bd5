"""The compiled kernels and their numpy fallback must agree."""

import numpy as np
import pytest

from scwave import kernels, named_ensemble
from scwave.codesim import ChannelModel, sample_erasures, sample_instance
from scwave.coupled_de import CoupledConfig, init_profile

needs_compiled = pytest.mark.skipif(kernels.compiled is None, reason="extension not built")


def test_backend_selected():
    assert kernels.BACKEND in ("cython", "numpy")
    assert kernels.active is (kernels.compiled or kernels.fallback)


@needs_compiled
@pytest.mark.parametrize("name, w, eps", [("reg-3-6", 3, 0.475), ("irr-five-fp", 4, 0.4), ("irr-deg4", 2, 0.47)])
def test_coupled_parity(name, w, eps):
    cfg = CoupledConfig(named_ensemble(name), 50, w, eps)
    args = (init_profile(cfg).x, w, eps, *cfg._kern, 300)
    a = kernels.compiled.coupled_de_trajectory(*args)
    b = kernels.fallback.coupled_de_trajectory(*args)
    assert np.max(np.abs(a - b)) < 1e-13
    np.testing.assert_allclose(kernels.compiled.coupled_de_advance(*args), b[-1], atol=1e-13)


def _graph(inst):
    var_ptr, var_edges, chk_ptr, chk_edges = inst.csr()
    return var_ptr, var_edges, chk_ptr, chk_edges


@needs_compiled
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_peeling_parity(seed):
    inst = sample_instance(named_ensemble("reg-3-6"), 200, seed, N=8, w=3)
    er = sample_erasures(inst, 0.45, seed + 10)
    sockets = np.full(inst.n_chk_positions, float(inst.sockets_per_check_position()))
    args = (*_graph(inst), inst.edge_var, inst.edge_chk, inst.edge_pos, er, sockets, 500)
    ta, na, oka = kernels.compiled.bec_peel(*args)
    tb, nb, okb = kernels.fallback.bec_peel(*args)
    assert (na, oka) == (nb, okb)
    np.testing.assert_allclose(ta, tb, atol=1e-15)


@needs_compiled
@pytest.mark.parametrize("kind, h, patience", [("BSC", 0.40, 0), ("AWGN", 0.42, 0), ("AWGN", 0.48, 5)])
def test_flooding_parity(kind, h, patience):
    inst = sample_instance(named_ensemble("reg-3-6"), 200, 3, N=6, w=3)
    ch = ChannelModel.from_entropy(kind, h)
    llr = np.clip(ch.llr(inst.n_vars, np.random.default_rng(4)), -30, 30)
    args = (*_graph(inst), inst.edge_var, llr, inst.var_pos, inst.n_var_positions, 60, 30.0, patience)
    ta, na, oka = kernels.compiled.llr_flood(*args)
    tb, nb, okb = kernels.fallback.llr_flood(*args)
    assert (na, oka) == (nb, okb)
    np.testing.assert_allclose(ta, tb, atol=1e-12)
