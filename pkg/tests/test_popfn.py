from fractions import Fraction as Q

import pytest
from hypothesis import given

from conftest import independent_laws, latent_laws
from survmart.model import NSD, U2, LatentLaw, ObservedLaw, TimeGrid, induce_observed
from survmart.popfn import (
    check_identification,
    expected_increments,
    hazard_dagger_C,
    hazard_sharp_C,
    hazard_sharp_T,
    latent_hazards,
    ratio,
    shared_discontinuity_set,
    sharp_dagger_relation_check,
    support_check,
    survival_dagger,
    survival_factorization_check,
    survival_sharp,
)


def test_ratio_convention():
    assert ratio(Q(0), Q(0)) == 0
    assert ratio(Q(1), Q(4)) == Q(1, 4)
    with pytest.raises(ZeroDivisionError):
        ratio(Q(1), Q(0))


def test_u2_hand_values():
    obs = induce_observed(U2)
    m = expected_increments(obs)
    assert (m.EY_sharp(1), m.EY_dagger(1), m.EY_sharp_plus(1)) == (1, Q(1, 2), Q(1, 4))
    assert hazard_sharp_T(obs).jump(1) == Q(1, 2)
    assert hazard_sharp_T(obs).jump(2) == 1
    assert hazard_sharp_C(obs).jump(1) == Q(1, 4)
    assert hazard_dagger_C(obs).jump(1) == Q(1, 2)
    assert hazard_dagger_C(obs).jump(2) == 0
    assert survival_sharp(obs).values() == (Q(1, 2), 0)
    assert survival_dagger(obs).values() == (Q(1, 2), Q(1, 2))
    assert shared_discontinuity_set(obs) == {1}


def test_nsd_has_no_shared_discontinuity():
    obs = induce_observed(NSD)
    assert shared_discontinuity_set(obs) == frozenset()
    assert hazard_sharp_C(obs) == hazard_dagger_C(obs)
    assert hazard_dagger_C(obs).jump(2) == Q(1, 2)


def test_zero_over_zero_beyond_tau():
    obs = induce_observed(U2)
    m = expected_increments(obs)
    assert m.EY_dagger(2) == 0
    assert hazard_dagger_C(obs).jump(2) == 0


def test_identification_rejects_dependent_law():
    g = TimeGrid([1, 2])
    law = LatentLaw(g, g, {(1, 1): Q(1, 2), (2, 2): Q(1, 2)})
    with pytest.raises(ValueError):
        check_identification(law)


def test_dependence_breaks_identification_link():
    # C = T almost surely: failure hazard identified, latent C hazard not
    g = TimeGrid([1, 2])
    law = LatentLaw(g, g, {(1, 1): Q(1, 2), (2, 2): Q(1, 2)})
    obs = induce_observed(law)
    _, lam_C = latent_hazards(law)
    assert hazard_dagger_C(obs).jump(1) == 0
    assert lam_C.jump(1) == Q(1, 2)


@given(latent_laws())
def test_relation_and_factorization(law):
    obs = induce_observed(law)
    assert sharp_dagger_relation_check(obs).ok
    assert survival_factorization_check(obs).ok
    assert support_check(obs).ok


@given(independent_laws)
def test_identification(law):
    rep = check_identification(law)
    assert rep.ok, rep.violations
    assert rep.checked > 0


@given(latent_laws())
def test_hazard_increments_are_probabilities(law):
    obs = induce_observed(law)
    for h in (hazard_sharp_T(obs), hazard_sharp_C(obs), hazard_dagger_C(obs)):
        assert all(0 <= h.jump(u) <= 1 for u in obs.grid)
    F = survival_sharp(obs)
    assert all(a >= b for a, b in zip((1,) + F.values(), F.values()))


def test_observed_law_input():
    obs = ObservedLaw(TimeGrid([1, 2]), {(1, 1): Q(1, 2), (2, 0): Q(1, 2)})
    assert hazard_sharp_T(obs).jump(1) == Q(1, 2)
    assert hazard_dagger_C(obs).jump(2) == 1
