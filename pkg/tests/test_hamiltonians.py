import numpy as np
import pytest

from telegate.errors import InconsistentCoherenceError, LayoutError
from telegate.fock import HilbertSpaceLayout, basis_vector, product_state
from telegate.hamiltonians import (
    TWO_PI,
    CouplingParams,
    ModeParams,
    SystemParams,
    collapse_operators,
    coupling_hamiltonian,
    dispersive,
    kerr_oscillator,
    module_hamiltonian,
    paper_defaults,
)


def test_paper_defaults_table_values():
    s = paper_defaults()
    assert s.module1.data.freq == pytest.approx(5123.6)
    assert s.module1.data_comm.chi == pytest.approx(0.573)
    assert s.module2.data_comm.chi == pytest.approx(0.843)
    assert s.bus_comm1.chi == pytest.approx(0.319)
    assert s.bus_comm2.chi == pytest.approx(0.455)
    assert s.chi_q1q2 == pytest.approx(0.019)
    # midpoint coherences
    assert s.module1.comm.t1 == pytest.approx(67.0)
    assert s.module2.comm.t2_echo == pytest.approx(23.0)


def test_paper_defaults_coherence_band():
    lo = paper_defaults("low")
    hi = paper_defaults("high")
    assert lo.module1.comm.t1 == pytest.approx(65.0)
    assert hi.module1.comm.t1 == pytest.approx(69.0)


def test_kerr_oscillator_diagonal():
    mp = ModeParams(freq=5000.0, self_kerr=2.0)
    h = kerr_oscillator(mp, 4, rotating_frame=True).matrix
    n = np.arange(4)
    assert np.allclose(np.diag(h), -TWO_PI * 1.0 * n * (n - 1))
    h_lab = kerr_oscillator(mp, 4).matrix
    assert np.diag(h_lab)[1].real == pytest.approx(TWO_PI * 5000.0)


def test_dispersive_sign_and_units():
    layout = HilbertSpaceLayout((("c", 3), ("q", 2)))
    h = dispersive(CouplingParams(chi=0.5), "c", "q", layout).matrix
    # |n_c=1, e> element is -2*pi*chi
    idx = 1 * 2 + 1
    assert h[idx, idx] == pytest.approx(-TWO_PI * 0.5)
    # chi' adds +chi' n(n-1) n_q
    h2 = dispersive(CouplingParams(chi=0.0, chi_prime=0.1), "c", "q", layout).matrix
    idx2 = 2 * 2 + 1
    assert h2[idx2, idx2] == pytest.approx(TWO_PI * 0.1 * 2.0)


def test_dispersive_rejects_same_mode():
    layout = HilbertSpaceLayout((("c", 3), ("q", 2)))
    with pytest.raises(LayoutError):
        dispersive(CouplingParams(chi=0.5), "c", "c", layout)


def test_module_hamiltonian_is_hermitian_diagonal():
    s = paper_defaults()
    layout = HilbertSpaceLayout((("c1", 4), ("q1", 2)))
    h = module_hamiltonian(s, 1, layout).matrix
    assert np.allclose(h, h.conj().T)
    assert np.allclose(h, np.diag(np.diag(h)))


def test_module_hamiltonian_dispersive_shift():
    s = paper_defaults()
    layout = HilbertSpaceLayout((("c1", 4), ("q1", 2)))
    h = module_hamiltonian(s, 1, layout).matrix
    # shift per photon between qubit e and g
    def e(nc, nq):
        return h[nc * 2 + nq, nc * 2 + nq].real

    shift = (e(1, 1) - e(1, 0)) - (e(0, 1) - e(0, 0))
    assert shift == pytest.approx(-TWO_PI * 0.573, rel=1e-9)


def test_coupling_hamiltonian_labels():
    s = paper_defaults()
    layout = HilbertSpaceLayout((("q1", 2), ("q2", 2), ("bus", 3)))
    h = coupling_hamiltonian(s, layout).matrix
    assert np.allclose(h, h.conj().T)
    with pytest.raises(LayoutError):
        coupling_hamiltonian(s, HilbertSpaceLayout((("q1", 2),)))


def test_collapse_operators_rates():
    s = paper_defaults()
    layout = HilbertSpaceLayout((("q1", 2),))
    ops = collapse_operators(s, layout)
    rates = sorted(rate for _, rate in ops)
    t1 = s.module1.comm.t1
    t2 = s.module1.comm.t2_echo
    gamma_phi = 1.0 / t2 - 1.0 / (2 * t1)
    assert rates == pytest.approx(sorted([1.0 / t1, gamma_phi]))


def test_collapse_operators_ramsey_kind():
    s = paper_defaults()
    layout = HilbertSpaceLayout((("q1", 2),))
    ops = collapse_operators(s, layout, t2_kind="ramsey")
    t1 = s.module1.comm.t1
    t2 = s.module1.comm.t2_ramsey
    rates = sorted(rate for _, rate in ops)
    assert rates[1] == pytest.approx(1.0 / t2 - 1.0 / (2 * t1))


def test_inconsistent_coherence_rejected():
    with pytest.raises(InconsistentCoherenceError):
        ModeParams(freq=5000.0, t1=10.0, t2_ramsey=25.0)


def test_round_trip_serialization():
    s = paper_defaults()
    s2 = SystemParams.from_dict(s.to_dict())
    assert s2 == s


def test_mode_params_lookup():
    s = paper_defaults()
    assert s.mode_params("c2").freq == pytest.approx(5275.0)
    with pytest.raises(LayoutError):
        s.mode_params("nope")
