import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quadfloquet.floquet import (
    Method,
    PropagatorConfig,
    SambeConfig,
    SambeLeakageWarning,
    SambeTooLargeError,
    Sampling,
    build_sambe,
    converge_propagator,
    default_photon_cutoff,
    fold,
    fold_distance,
    fourier_components,
    one_period_propagator,
    quasi_energies,
    quasi_energies_propagator,
    quasi_energies_sambe,
)
from quadfloquet.lattice import DriveParams, HoppingProfile, LatticeParams, build_h0
from quadfloquet.linalg import expm
from quadfloquet.tolerances import Tolerances

from conftest import PANELS

SMALL = LatticeParams(3, 1.0, 1.0, 0.8, "periodic")
SMALL_NH = LatticeParams(3, 1.0, 1.4, 0.8, "periodic")


@given(x=st.floats(-1e3, 1e3), w=st.floats(0.1, 50))
def test_fold_range_and_idempotence(x, w):
    f = fold(x, w)
    assert -w / 2 < f <= w / 2
    assert fold(f, w) == f
    assert fold_distance([x + 0j], [f + 0j], w) < 1e-9


def test_fold_keeps_imaginary_part():
    np.testing.assert_allclose(fold(np.array([7.2 + 0.3j]), 5.0), [2.2 + 0.3j])
    assert fold(2.5, 5.0) == 2.5 and fold(-2.5, 5.0) == 2.5


def test_fold_distance_pairs_across_zone_edge():
    w = 4.0
    assert fold_distance([1.999 + 0j, 0.5], [-1.999 + 0j, 0.5], w) == pytest.approx(0.002)


def test_fourier_components():
    p = LatticeParams(1, 1.0, 2.0, 4.0)
    c = fourier_components(p)
    np.testing.assert_array_equal(c[1], np.diag([2.0, 0, 2.0]))
    np.testing.assert_array_equal(c[1], c[-1])
    np.testing.assert_array_equal(c[0], build_h0(p))
    z = fourier_components(LatticeParams(2, 1, 1, 0))
    assert not z[1].any() and not z[-1].any()


def test_sambe_structure():
    d = DriveParams(2.0)
    S0 = build_sambe(SMALL, d, SambeConfig(0))
    np.testing.assert_array_equal(S0, build_h0(SMALL))
    S = build_sambe(SMALL, d, SambeConfig(3))
    assert S.shape == (7 * 7, 7 * 7)
    with pytest.raises(SambeTooLargeError, match="dimension"):
        build_sambe(SMALL, d, SambeConfig(10), tol=Tolerances(sambe_max_dim=100))


def test_sambe_undriven_is_photon_copies():
    p = LatticeParams(3, 1.0, 1.0, 0.0)
    w = 1.7
    S = build_sambe(p, DriveParams(w), SambeConfig(2))
    e0 = np.linalg.eigvalsh(build_h0(p))
    ref = np.sort(np.concatenate([e0 + n * w for n in range(-2, 3)]))
    np.testing.assert_allclose(np.sort(np.linalg.eigvalsh(S)), ref, atol=1e-12)


@pytest.mark.parametrize("method", ["sambe", "propagator"])
@pytest.mark.parametrize("p", [LatticeParams(3, 1.0, 1.0, 0.0, "periodic"),
                               LatticeParams(3, 1.0, 1.5, 0.0, "periodic")])
def test_undriven_reduces_to_folded_h0(method, p):
    w = 2.3
    fr = quasi_energies(p, DriveParams(w), method)
    ref = fold(np.linalg.eigvals(build_h0(p)), w)
    assert fold_distance(fr.quasi_energies, ref, w) < 1e-9


def test_undriven_propagator_independent_of_Q():
    p = LatticeParams(3, 1.0, 1.0, 0.0)
    d = DriveParams(2.0)
    ref = expm(-1j * build_h0(p) * d.period)
    for Q in (1, 7, 64):
        np.testing.assert_allclose(one_period_propagator(p, d, PropagatorConfig(Q)), ref, atol=1e-12)


def test_result_invariants():
    d = DriveParams(3.0)
    for method in Method:
        fr = quasi_energies(SMALL_NH, d, method)
        assert fr.quasi_energies.size == SMALL_NH.N
        re = fr.quasi_energies.real
        assert np.all(re > -1.5) and np.all(re <= 1.5)
        assert np.all(np.diff(re) >= 0)
        np.testing.assert_allclose(np.linalg.norm(fr.modes, axis=0), 1.0, atol=1e-12)


def test_propagator_modes_are_eigenvectors_of_U():
    d = DriveParams(3.0)
    fr = quasi_energies_propagator(SMALL_NH, d)
    U = one_period_propagator(SMALL_NH, d)
    lam = np.exp(-1j * fr.quasi_energies * d.period)
    np.testing.assert_allclose(U @ fr.modes, fr.modes * lam, atol=1e-9)
    np.testing.assert_allclose(fr.left_modes.conj().T @ fr.modes, np.eye(7), atol=1e-9)


def test_hermitian_unitarity_and_real_spectrum():
    p, d = PANELS["a"], DriveParams(8.5)
    U = one_period_propagator(p, d, PropagatorConfig(1024))
    assert np.linalg.norm(U.conj().T @ U - np.eye(p.N)) <= 1e-10
    fr = quasi_energies(p, d, "propagator")
    assert np.abs(fr.quasi_energies.imag).max() <= 1e-9
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SambeLeakageWarning)
        fs = quasi_energies(p, d, "sambe", sambe=SambeConfig(12))
    assert np.abs(fs.quasi_energies.imag).max() <= 1e-9


@pytest.mark.parametrize("sampling,rate", [("left_endpoint", 2), ("midpoint", 2), ("cfm4", 4)])
def test_time_slicing_order(sampling, rate):
    p, d = PANELS["a"], DriveParams(8.5)
    ref, _ = converge_propagator(p, d, 1e-12, Q0=2048, Q_max=4096)
    errs = [fold_distance(quasi_energies_propagator(p, d, PropagatorConfig(Q, sampling)).quasi_energies,
                          ref.quasi_energies, d.omega) for Q in (128, 256)]
    observed = np.log2(errs[0] / errs[1])
    assert abs(observed - rate) < 0.35


def test_q_doubling_self_convergence():
    # left and midpoint slicing are second order: doubling Q from 2^10 moves
    # the spectrum by ~1e-5; the fourth-order scheme meets the 1e-8 target
    p, d = PANELS["a"], DriveParams(8.5)
    def change(sampling):
        a = quasi_energies_propagator(p, d, PropagatorConfig(1024, sampling))
        b = quasi_energies_propagator(p, d, PropagatorConfig(2048, sampling))
        return fold_distance(a.quasi_energies, b.quasi_energies, d.omega)
    assert change("cfm4") < 1e-8
    for s in ("left_endpoint", "midpoint"):
        assert 1e-7 < change(s) < 1e-4


def test_sambe_default_cutoff_and_leak_flag():
    p, d = SMALL, DriveParams(3.0)
    assert default_photon_cutoff(p, d) == int(np.ceil((2.0 + 0.8 * 9) / 3.0)) + 4
    with pytest.warns(SambeLeakageWarning):
        fr = quasi_energies_sambe(p, d, SambeConfig(1))
    assert fr.leaky
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        fr = quasi_energies_sambe(p, d, SambeConfig(12))
    assert not fr.leaky and fr.knobs["M"] == 12


@pytest.mark.parametrize("p", [SMALL, SMALL_NH])
def test_sambe_matches_propagator_small(p):
    d = DriveParams(2.5)
    fs = quasi_energies_sambe(p, d, SambeConfig(20))
    fp = quasi_energies_propagator(p, d, PropagatorConfig(1024, Sampling.CFM4))
    assert fold_distance(fs.quasi_energies, fp.quasi_energies, d.omega) < 1e-8
    # Sambe modes are Floquet states at t=0: eigenvectors of U(T, 0)
    U = one_period_propagator(p, d, PropagatorConfig(1024, Sampling.CFM4))
    lam = np.exp(-1j * fs.quasi_energies * d.period)
    np.testing.assert_allclose(U @ fs.modes, fs.modes * lam, atol=1e-7)


def test_high_frequency_limit_small():
    d = DriveParams(1e4)
    fr = quasi_energies(SMALL_NH, d, "propagator")
    ref = fold(np.linalg.eigvals(build_h0(SMALL_NH)), d.omega)
    assert fold_distance(fr.quasi_energies, ref, d.omega) < 1e-3


def test_zero_disorder_profile_bit_identical():
    p, d = SMALL_NH, DriveParams(2.0)
    a = quasi_energies(p, d, "propagator")
    b = quasi_energies(p, d, "propagator", profile=HoppingProfile.uniform(p))
    np.testing.assert_array_equal(a.quasi_energies, b.quasi_energies)
    np.testing.assert_array_equal(a.modes, b.modes)


def test_branch_cut_fallback_used_at_zone_edge():
    # three-site ring: levels -1, 0.5, 0.5; with omega = 2 the level -1 sits
    # exactly on the zone edge, so U has the eigenvalue -1
    p = LatticeParams(1, 0.5, 0.5, 0.0, "periodic")
    fr = quasi_energies_propagator(p, DriveParams(2.0))
    assert fr.knobs["branch_shifted"]
    np.testing.assert_allclose(fr.quasi_energies.real, [0.5, 0.5, 1.0], atol=1e-9)
