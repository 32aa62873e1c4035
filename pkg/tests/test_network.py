import numpy as np
import pytest

from edgesync import (EdgeGains, Topology, assemble_augmented, assemble_closed_loop,
                      build_fem, complete_topology, control_signal, laplacian_from_gains)
from edgesync.mateq import spectral_abscissa


def test_zero_gains_decouple(fem8):
    t = Topology(2, [(1, 2)])
    s = assemble_closed_loop(fem8, t, EdgeGains.uniform(t, 0.0))
    n = fem8.n
    assert not s.a_cl[:n, n:].any() and not s.a_cl[n:, :n].any()
    np.testing.assert_allclose(s.a_cl[:n, :n], fem8.a_closed)


def test_single_agent_is_a_closed(fem8):
    t = Topology(1, [])
    s = assemble_closed_loop(fem8, t, EdgeGains(t, {}))
    np.testing.assert_allclose(s.a_cl, fem8.a_closed)


def test_coupling_moves_deviation_modes_left(topo5):
    fem = build_fem(n=4)
    free = spectral_abscissa(assemble_closed_loop(fem, topo5, EdgeGains.uniform(topo5, 0.0)).a_cl)
    eig = np.linalg.eigvals(assemble_closed_loop(fem, topo5, EdgeGains.uniform(topo5, 1.0)).a_cl)
    # the synchronized modes (spectrum of A_c) are untouched by coupling
    sync = np.linalg.eigvals(fem.a_closed)
    dev = [e for e in eig if np.min(np.abs(sync - e)) > 1e-8]
    # only the modes seen by the centred actuator move: 4 nonzero Laplacian
    # eigenvalues times the 2 mirror-symmetric modes at n = 4
    assert len(dev) == 8
    assert eig.real.max() == pytest.approx(free)
    assert max(np.real(dev)) < free


def test_control_signal(fem8, topo5, rng):
    g = EdgeGains.from_vector(topo5, rng.random(10))
    assert control_signal(fem8, topo5, g, np.zeros((5, 8)), 1) == 0.0
    same = np.tile(rng.standard_normal(8), (5, 1))
    assert control_signal(fem8, topo5, g, same, 3) == pytest.approx(-fem8.k_vec @ same[0])
    X = rng.standard_normal((5, 8))
    s = assemble_closed_loop(fem8, topo5, g)
    U = -s.feedback @ X.ravel()
    for i in range(1, 6):
        assert control_signal(fem8, topo5, g, X, i) == pytest.approx(U[i - 1], rel=1e-12)
    with pytest.raises(IndexError):
        control_signal(fem8, topo5, g, X, 6)


def test_two_agent_control_difference(fem8, rng):
    t = Topology(2, [(1, 2)])
    g = EdgeGains.uniform(t, 1.0)
    X = rng.standard_normal((2, 8))
    d = X[0] - X[1]
    du = control_signal(fem8, t, g, X, 1) - control_signal(fem8, t, g, X, 2)
    assert du == pytest.approx(-(fem8.k_vec + 2 * fem8.f_vec) @ d, rel=1e-12)


def test_augmented_input(fem8, topo5, rng):
    a, b = assemble_augmented(fem8, topo5, np.zeros((5, 5)))
    assert not b[:, 5:].any()
    t1 = Topology(1, [])
    _, b1 = assemble_augmented(fem8, t1, np.array([[0.0]]))
    assert b1.shape == (8, 2)
    L = laplacian_from_gains(topo5, EdgeGains.from_vector(topo5, rng.random(10)))
    _, b = assemble_augmented(fem8, topo5, L)
    assert np.linalg.matrix_rank(b) <= 5
    with pytest.raises(ValueError):
        assemble_augmented(fem8, topo5, np.zeros((4, 4)))


def test_structured_law_reproduces_closed_loop(fem8, topo5, rng):
    from edgesync.designs import structured_gain
    L = laplacian_from_gains(topo5, EdgeGains.from_vector(topo5, rng.random(10)))
    a, b = assemble_augmented(fem8, topo5, L)
    from edgesync.network import assemble_from_laplacian
    s = assemble_from_laplacian(fem8, topo5, L)
    np.testing.assert_allclose(a - b @ structured_gain(fem8, topo5, L), s.a_cl, atol=1e-10)


def test_weight_is_spd(fem8):
    s = assemble_closed_loop(fem8, complete_topology(3), EdgeGains.uniform(complete_topology(3), 1))
    assert np.linalg.eigvalsh(s.q_weight)[0] > 0
