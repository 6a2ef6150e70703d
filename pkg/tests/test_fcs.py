import json

import numpy as np
import pytest
from hypothesis import given

from qht import ensembles, fcs, testing
from qht.fcs import FiniteSystem, OpenSystemSpec, Reservoir
from qht.models import PAULI_X, PAULI_Z
from qht.operators import HermitianOperator, commutator, kron
from qht.qstate import relative_entropy

from conftest import seeds
from helpers import measure_mismatch, random_system

T_VALUES = (0.5, 1.0, 2.0)


def thermal_system(gen, n=4, beta=0.7):
    h = ensembles.random_hermitian(gen, n)
    w, v = np.linalg.eigh(h)
    p = np.exp(-beta * w)
    return FiniteSystem(h, (v * (p / p.sum())) @ v.conj().T)


def two_qubit_toy(beta=1.3, coupling=0.6, mu=0.0):
    res = Reservoir(0.8 * PAULI_Z, (np.eye(2) - PAULI_Z) / 2, beta, mu)
    v = coupling * np.kron(PAULI_X, PAULI_X)
    return OpenSystemSpec(0.5 * PAULI_Z, (res,), (v,))


# -- closed systems ----------------------------------------------------------------------


def test_evolution_basics(gen):
    sys_ = thermal_system(gen)
    assert np.allclose(fcs.evolve(sys_, 1.7).op.matrix, sys_.omega.op.matrix, atol=1e-12)
    rnd = random_system(3)
    assert np.allclose(fcs.evolve(rnd, 0.0).op.matrix, rnd.omega.op.matrix, atol=1e-14)


def test_qubit_flip():
    sys_ = FiniteSystem(PAULI_X, np.diag([0.2, 0.8]))
    w = fcs.evolve(sys_, np.pi / 2).op.matrix
    assert np.abs(w - np.diag([0.8, 0.2])).max() < 1e-12


@given(seeds)
def test_evolution_preserves_spectrum(seed):
    sys_ = random_system(seed)
    w = fcs.evolve(sys_, 1.3)
    assert w.mass == pytest.approx(1.0, abs=1e-12)
    assert np.allclose(np.linalg.eigvalsh(w.op.matrix), np.linalg.eigvalsh(sys_.omega.op.matrix),
                       atol=1e-12)


def test_thermal_state_has_no_entropy_production(gen):
    sys_ = thermal_system(gen)
    assert np.abs(fcs.entropy_production_observable(sys_).matrix).max() < 1e-10
    assert fcs.mean_entropy_production(sys_, 1.0) == pytest.approx(0.0, abs=1e-12)


@given(seeds)
def test_entropy_production_has_zero_mean(seed):
    sys_ = random_system(seed)
    assert sys_.omega(fcs.entropy_production_observable(sys_)) == pytest.approx(0.0, abs=1e-11)


def test_time_reversal_flips_entropy_production():
    sys_ = random_system(11, 5, tri=True)
    sig = fcs.entropy_production_observable(sys_)
    assert np.allclose(fcs.time_reversal(sys_, sig).matrix, -sig.matrix, atol=1e-12)


def test_tri_basis_is_verified():
    g = ensembles.rng(1)
    with pytest.raises(ValueError, match="not real"):
        FiniteSystem(ensembles.random_hermitian(g, 3), ensembles.random_state(g, 3, real=True),
                     np.eye(3))


@given(seeds)
def test_entropy_balance(seed):
    sys_ = random_system(seed)
    for t in T_VALUES:
        m = fcs.mean_entropy_production(sys_, t)
        assert m == pytest.approx(fcs.entropy_balance(sys_, t), abs=1e-10)
        assert m >= -1e-10


# -- full counting statistics -----------------------------------------------------------


def test_commuting_system_gives_point_mass(gen):
    d = fcs.fcs_distribution(thermal_system(gen), 1.0)
    assert len(d.measure) == 1 and d.phi[0] == pytest.approx(0.0, abs=1e-10)
    assert d.weights[0] == pytest.approx(1.0)


@given(seeds)
def test_fcs_moments_and_mass(seed):
    sys_ = random_system(seed)
    for t in T_VALUES:
        d = fcs.fcs_distribution(sys_, t)
        assert d.measure.mass == pytest.approx(1.0, abs=1e-10)
        sig = fcs.mean_entropy_production_observable(sys_, t)
        mean = sys_.omega(sig)
        var = sys_.omega(HermitianOperator(sig.matrix @ sig.matrix)) - mean**2
        assert d.mean() == pytest.approx(mean, abs=1e-10)
        assert d.variance() == pytest.approx(var, abs=1e-10)


@given(seeds)
def test_fcs_is_modular_measure(seed):
    sys_ = random_system(seed)
    for t in T_VALUES:
        assert measure_mismatch(fcs.fcs_distribution(sys_, t).measure,
                                fcs.fcs_from_modular(sys_, t)) <= 1e-9


@given(seeds)
def test_generalized_evans_searles(seed):
    from qht.qstate import modular_spectral_measure

    sys_ = random_system(seed)
    for t in T_VALUES:
        back = modular_spectral_measure(fcs.evolve(sys_, -t), sys_.omega)
        fwd = modular_spectral_measure(fcs.evolve(sys_, t), sys_.omega)
        assert measure_mismatch(back, fwd.reflected().tilted(1.0)) <= 1e-10


@given(seeds)
def test_tri_fluctuation_relation(seed):
    sys_ = random_system(seed, tri=True)
    t = 1.0
    d = fcs.fcs_distribution(sys_, t).measure
    # dP(-phi) = exp(-t phi) dP(phi)
    assert measure_mismatch(d.reflected(), d.tilted(-t)) <= 1e-9


@given(seeds)
def test_renyi_time_reversal_symmetry(seed):
    sys_ = random_system(seed)
    for s in (0.0, 0.2, 0.5, 0.9):
        assert fcs.renyi_functional(sys_, -1.0, s) == pytest.approx(
            fcs.renyi_functional(sys_, 1.0, 1 - s), abs=1e-10)


def test_renyi_endpoints():
    sys_ = random_system(2)
    assert fcs.renyi_functional(sys_, 1.0, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert fcs.renyi_functional(sys_, 1.0, 1.0) == pytest.approx(0.0, abs=1e-12)


@given(seeds)
def test_transient_evans_searles(seed):
    sys_ = random_system(seed, tri=True)
    for s in np.linspace(0, 1, 11):
        assert fcs.renyi_functional(sys_, 2.0, s) == pytest.approx(
            fcs.renyi_functional(sys_, 2.0, 1 - s), abs=1e-9)


def test_cumulants_from_renyi():
    sys_ = random_system(5)
    t, h = 1.5, 1e-4
    d = fcs.fcs_distribution(sys_, t)
    g = lambda s: fcs.renyi_functional(sys_, t, 1 - s)
    d1 = (g(h) - g(-h)) / (2 * h)
    d2 = (g(h) - 2 * g(0) + g(-h)) / h**2
    assert -d1 == pytest.approx(t * d.mean(), abs=1e-6)
    assert d2 == pytest.approx(t**2 * d.variance(), abs=1e-5 * max(1, t**2 * d.variance()))
    assert d.cgf(0.3) == pytest.approx(fcs.renyi_functional(sys_, t, 0.7), abs=1e-10)


def test_renyi_table_shape():
    sys_ = random_system(1)
    tab = fcs.renyi_table(sys_, [0.5, 1.0], [0.0, 0.5, 1.0])
    assert tab.shape == (2, 3)
    assert tab[1, 1] == pytest.approx(fcs.renyi_functional(sys_, 1.0, 0.5))


# -- open systems -------------------------------------------------------------------------


def test_uncoupled_open_system_is_stationary():
    spec = OpenSystemSpec(PAULI_Z, (Reservoir(PAULI_Z, np.eye(2), 1.0),))
    sys_ = fcs.build_open_system(spec)
    assert np.abs(fcs.open_entropy_production(spec).matrix).max() == 0
    phis, js = fcs.currents(spec)
    assert np.abs(phis[0].matrix).max() == 0 and np.abs(js[0].matrix).max() == 0
    assert np.abs(fcs.entropy_production_observable(sys_).matrix).max() < 1e-12


def test_reservoir_charge_must_commute():
    with pytest.raises(fcs.CommutationError):
        Reservoir(PAULI_Z, PAULI_X, 1.0)


def test_entropy_observable_matches_minus_log_omega():
    spec = ensembles.random_open_spec(ensembles.rng(4), mus=(0.3, -0.2))
    sys_ = fcs.build_open_system(spec)
    assert np.allclose(fcs.open_entropy_observable(spec).matrix,
                       fcs.entropy_observable(sys_).matrix, atol=1e-10)


@given(seeds)
def test_open_entropy_production_two_ways(seed):
    spec = ensembles.random_open_spec(ensembles.rng(seed), mus=(0.4, -0.1), real=False)
    sys_ = fcs.build_open_system(spec)
    a = fcs.open_entropy_production(spec).matrix
    b = fcs.entropy_production_observable(sys_).matrix
    assert np.abs(a - b).max() <= 1e-10


def test_single_reservoir_entropy_production():
    spec = two_qubit_toy()
    phis, _ = fcs.currents(spec)
    sys_ = fcs.build_open_system(spec)
    beta = spec.reservoirs[0].beta
    assert np.allclose(fcs.entropy_production_observable(sys_).matrix, -beta * phis[0].matrix,
                       atol=1e-10)


def test_energy_balance_two_qubit_toy():
    spec = two_qubit_toy()
    sys_ = fcs.build_open_system(spec)
    phis, _ = fcs.currents(spec)
    h1 = spec.lift_reservoir(0, spec.reservoirs[0].H)
    for t in (0.4, 1.0, 3.0):
        lhs = fcs.evolve(sys_, t)(h1) - sys_.omega(h1)
        rhs = -fcs.time_integral(sys_, phis[0], t)
        assert lhs == pytest.approx(rhs, abs=1e-6)


def test_build_open_system_is_tri_for_real_data():
    assert fcs.build_open_system(two_qubit_toy()).is_tri


# -- joint FCS ---------------------------------------------------------------------------


def test_joint_fcs_single_observable_matches_fcs():
    sys_ = random_system(8, 4)
    t = 0.9
    j = fcs.joint_fcs(sys_, [fcs.entropy_observable(sys_)], t)
    assert measure_mismatch(j.marginal(0), fcs.fcs_distribution(sys_, t).measure) <= 1e-9


def test_joint_fcs_uncoupled_is_point_mass():
    spec = OpenSystemSpec(PAULI_Z, (Reservoir(PAULI_Z, np.eye(2), 1.0),
                                    Reservoir(0.5 * PAULI_Z, np.eye(2), 2.0)))
    sys_ = fcs.build_open_system(spec)
    j = fcs.joint_fcs(sys_, fcs.open_fcs_observables(spec)[:2], 1.0)
    assert j.points.shape[0] == 1 and np.allclose(j.points, 0.0)


def test_joint_fcs_means_follow_fluxes():
    spec = ensembles.random_open_spec(ensembles.rng(6))
    sys_ = fcs.build_open_system(spec)
    phis, _ = fcs.currents(spec)
    obs = fcs.open_fcs_observables(spec)[:2]
    t = 1.2
    j = fcs.joint_fcs(sys_, obs, t)
    for k, r in enumerate(spec.reservoirs):
        expect = -(r.beta / t) * fcs.time_integral(sys_, phis[k], t)
        assert j.mean()[k] == pytest.approx(expect, abs=1e-6)
    assert np.all(np.linalg.eigvalsh(j.covariance()) >= -1e-12)


def test_joint_fcs_rejects_non_commuting():
    sys_ = random_system(1, 4)
    g = ensembles.rng(2)
    with pytest.raises(fcs.CommutationError):
        fcs.joint_fcs(sys_, [ensembles.random_hermitian(g, 4), ensembles.random_hermitian(g, 4)], 1.0)


# -- arrow of time ------------------------------------------------------------------------


def test_arrow_trivial_for_stationary_state(gen):
    sys_ = thermal_system(gen)
    assert fcs.arrow_min_error(sys_, 1.0) == pytest.approx(1.0, abs=1e-10)


@given(seeds)
def test_arrow_unitary_invariance_and_sandwich(seed):
    sys_ = random_system(seed)
    for t in T_VALUES:
        d = fcs.arrow_min_error(sys_, t)
        w2 = fcs.evolve(sys_, 2 * t)
        assert d == pytest.approx(testing.optimal_test(w2, sys_.omega)[1], abs=1e-10)
        assert testing.modular_lower_bound(w2, sys_.omega) <= d + 1e-10
        assert d <= min(testing.chernoff_upper_bound(w2, sys_.omega, s)
                        for s in np.linspace(0, 1, 11)) + 1e-10


def test_arrow_table_rows():
    rows = fcs.arrow_exponent_estimate(fcs.build_open_system(two_qubit_toy()), [0.5, 1.0])
    for r in rows:
        assert r.lower_exponent <= r.exponent + 1e-10 <= r.upper_exponent + 2e-10
        assert r.min_error == pytest.approx(r.min_error_shifted, abs=1e-10)


# -- JSON ---------------------------------------------------------------------------------


def test_system_json_round_trip():
    sys_ = random_system(3, 4, tri=True)
    back = fcs.system_from_dict(json.loads(json.dumps(fcs.system_to_dict(sys_))))
    assert np.array_equal(back.H.matrix, sys_.H.matrix) and back.is_tri
    d = fcs.system_to_dict(sys_)
    d["tri_basis"] = True
    assert fcs.system_from_dict(d).is_tri


def test_open_spec_json_round_trip():
    spec = ensembles.random_open_spec(ensembles.rng(2), mus=(0.1, 0.2))
    back = fcs.open_spec_from_dict(json.loads(json.dumps(fcs.open_spec_to_dict(spec))))
    sys_, spec2 = fcs.load_system(fcs.open_spec_to_dict(back))
    assert spec2 is not None
    assert np.array_equal(sys_.H.matrix, fcs.build_open_system(spec).H.matrix)
