from fractions import Fraction as Q

import pytest
from hypothesis import given

from conftest import latent_laws
from survmart.model import NSD, U2, Observation, induce_observed
from survmart.oracle import HypothesisError, certify, verify_transform_martingale
from survmart.pathproc import (
    FUNCTIONALS,
    IntegrandProcess,
    centering_dagger,
    centering_dagger_sum,
    class_at_least,
    dag_dm_decomposition_check,
    evaluate_processes,
    martingale_paths,
    transform,
)

U2_OBS = induce_observed(U2)


def test_processes_at_a_tie():
    grid = U2_OBS.grid
    cens = evaluate_processes(Observation(1, 0), grid)
    fail = evaluate_processes(Observation(1, 1), grid)
    assert (cens.Y_sharp(1), cens.Y_dagger(1), cens.N_C(1), cens.N_T(1)) == (1, 1, 1, 0)
    assert (fail.Y_sharp(1), fail.Y_dagger(1), fail.N_T(1)) == (1, 0, 1)
    assert fail.Y_sharp_plus(1) == 0 and fail.N_C_minus(1) == 0
    assert cens.N_C_minus(2) == 1


def test_off_grid_observation_rejected():
    with pytest.raises(ValueError):
        evaluate_processes(Observation(Q(3, 2), 1), U2_OBS.grid)


def test_u2_martingale_values():
    mp = martingale_paths(Observation(1, 0), U2)
    assert mp.M_C_dagger(1) == Q(1, 2)
    assert mp.M_C_sharp(1) == Q(3, 4)
    assert mp.M_T_sharp(1) == Q(-1, 2)
    mp = martingale_paths(Observation(2, 1), U2)
    assert mp.M_T_sharp(1) == Q(-1, 2)
    # N_T(2) = 1 against a compensator of 1/2 + 1
    assert mp.M_T_sharp(2) == Q(-1, 2)


def test_u2_cross_moments():
    def moment(a, b):
        return U2_OBS.expect(lambda o: martingale_paths(o, U2)[a](1) * martingale_paths(o, U2)[b](1))

    assert moment("C_dagger", "T_sharp") == 0
    assert moment("C_sharp", "T_sharp") == Q(-1, 8)


@given(latent_laws())
def test_dagger_centering_closed_form(law):
    obs = induce_observed(law)
    for o in obs.atoms:
        assert centering_dagger(o, obs) == centering_dagger_sum(o, obs)
        assert dag_dm_decomposition_check(o, obs).ok


def test_nsd_martingales_coincide():
    for o in induce_observed(NSD).atoms:
        mp = martingale_paths(o, NSD)
        assert mp.M_C_sharp == mp.M_C_dagger


def test_integrand_bound_enforced():
    H = IntegrandProcess.functional("wild", lambda u, p: Q(10), 1, "F-predictable")
    with pytest.raises(ValueError, match="bound"):
        H(1, evaluate_processes(Observation(1, 1), U2_OBS.grid))


def test_transform_requires_certification():
    H = FUNCTIONALS["deltaNT"]()
    m = martingale_paths(Observation(1, 0), U2).M_C_dagger
    with pytest.raises(ValueError):
        transform(H, m, 1, evaluate_processes(Observation(1, 0), U2_OBS.grid))
    Hc = certify(H, U2_OBS)
    assert Hc.effective_class == "half-predictable"
    transform(Hc, m, 1, evaluate_processes(Observation(1, 0), U2_OBS.grid))


@pytest.mark.parametrize("key", sorted(FUNCTIONALS))
def test_registry_classes_measure_as_declared(key):
    H = FUNCTIONALS[key]()
    assert certify(H, U2_OBS).effective_class == H.declared


def test_deterministic_steps_are_predictable():
    H = IntegrandProcess.step({1: 2, 2: -1})
    assert H.effective_class == "F-predictable"
    assert class_at_least(H.effective_class, "half-predictable")
    assert not class_at_least("adapted-only", "half-predictable")


def test_adapted_only_is_refused():
    with pytest.raises(HypothesisError):
        verify_transform_martingale(FUNCTIONALS["deltaNC"](), "C_dagger", U2_OBS)
