import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kklab.errors import NonPositiveDerivative, OutOfStateSpace
from kklab.model import (
    LOG_LAW,
    THIN_FILM,
    FluxLaw,
    InvariantState,
    State,
    available_flux_laws,
    classify_fields,
    eigensystem,
    flux,
    from_invariants,
    get_flux_law,
    jacobian,
    lambda1,
    lambda2,
    parse_state,
    register_flux_law,
    to_invariants,
    validate_flux_law,
)

from conftest import random_states

box = st.floats(min_value=0.5, max_value=4.0, allow_nan=False)
LAWS = [THIN_FILM, LOG_LAW]

NEGATIVE = FluxLaw("negative", lambda r: -r, lambda r: -1.0 + 0.0 * r, lambda r: 0.0 * r)


# ---- validate_flux_law


def test_thin_film_validates():
    rep = validate_flux_law(THIN_FILM, 0.25, 16.0, 100)
    assert rep.passed
    assert rep.min_dphi == 0.5
    assert rep.gnl_sign_changes == []


def test_negative_law_rejected():
    with pytest.raises(NonPositiveDerivative):
        validate_flux_law(NEGATIVE, 1.0, 4.0, 10)


def test_log_law_validates():
    rep = validate_flux_law(LOG_LAW, 1.0, 4.0, 100)
    assert rep.passed
    assert rep.min_dphi == pytest.approx(0.25, abs=1e-15)
    assert rep.gnl_sign_changes == []


def test_sign_change_is_reported_not_fatal():
    # phi = r - r^2/20: phi' = 1 - r/10 > 0 on [1, 4]; 3phi' + 2r phi'' = 3 - 0.5 r changes sign at 6
    law = FluxLaw("bent", lambda r: r - r * r / 20, lambda r: 1 - r / 10, lambda r: -0.1 + 0 * r)
    rep = validate_flux_law(law, 1.0, 9.0, 81)
    assert rep.passed
    assert len(rep.gnl_sign_changes) == 1
    lo, hi = rep.gnl_sign_changes[0]
    assert lo <= 6.0 <= hi


@pytest.mark.parametrize("args", [(0.0, 1.0, 10), (2.0, 1.0, 10), (1.0, 2.0, 1)])
def test_validate_rejects_bad_interval(args):
    with pytest.raises(ValueError):
        validate_flux_law(THIN_FILM, *args)


# ---- registry


def test_registry():
    assert {"thin_film", "log"} <= set(available_flux_laws())
    assert get_flux_law("thin_film") is THIN_FILM
    with pytest.raises(KeyError):
        get_flux_law("nope")
    with pytest.raises(ValueError):
        register_flux_law(THIN_FILM)


# ---- invariants


def test_to_invariants_simple():
    iv = to_invariants(State(1.0, 2.0))
    assert (iv.r, iv.xi) == (2.0, 0.5)


def test_corner_maps_back():
    m = 0.5
    s = from_invariants(InvariantState(m * m, 1.0))
    assert (s.u, s.v) == (m, m)


def test_round_trip_example():
    iv = to_invariants(State(3.0, 0.75), m=0.5)
    assert (iv.r, iv.xi) == (2.25, 4.0)
    s = from_invariants(iv)
    assert (s.u, s.v) == (3.0, 0.75)


@given(box, box)
def test_round_trip_property(u, v):
    s = from_invariants(to_invariants(State(u, v), m=0.5))
    assert s.u == pytest.approx(u, rel=4e-16, abs=0)
    assert s.v == pytest.approx(v, rel=4e-16, abs=0)


def test_out_of_state_space():
    with pytest.raises(OutOfStateSpace):
        to_invariants(State(0.1, 2.0), m=0.5)
    with pytest.raises(OutOfStateSpace):
        from_invariants(InvariantState(-1.0, 1.0))


# ---- eigensystem, flux, jacobian


def test_eigenvalues_thin_film():
    lam1, lam2, r1, r2 = eigensystem(THIN_FILM, State(1.0, 2.0))
    assert (lam1, lam2) == (1.0, 3.0)
    np.testing.assert_array_equal(r1, [-1.0, 2.0])
    np.testing.assert_array_equal(r2, [1.0, 2.0])
    lam1, lam2, _, _ = eigensystem(THIN_FILM, State(1.0, 1.0))
    assert (lam1, lam2) == (0.5, 1.5)


@pytest.mark.parametrize("law", LAWS, ids=lambda l: l.name)
@given(u=box, v=box)
def test_eigenvalue_gap(law, u, v):
    lam1, lam2, _, _ = eigensystem(law, State(u, v))
    r = u * v
    assert lam2 - lam1 == pytest.approx(2 * r * law.eval(r, 1), rel=1e-12)
    assert lam2 > lam1


def test_flux_and_jacobian_example():
    np.testing.assert_array_equal(flux(THIN_FILM, State(1.0, 2.0)), [1.0, 2.0])
    np.testing.assert_allclose(jacobian(THIN_FILM, State(1.0, 2.0)), [[2.0, 0.5], [2.0, 2.0]], rtol=0, atol=1e-15)


@pytest.mark.parametrize("law", LAWS, ids=lambda l: l.name)
def test_jacobian_eigen_consistency(law, rng):
    for u, v in random_states(rng, 20):
        s = State(u, v)
        lam1, lam2, r1, r2 = eigensystem(law, s)
        J = jacobian(law, s)
        np.testing.assert_allclose(np.sort(np.linalg.eigvals(J).real), [lam1, lam2], rtol=1e-12)
        np.testing.assert_allclose(J @ r1, lam1 * r1, atol=1e-12)
        np.testing.assert_allclose(J @ r2, lam2 * r2, atol=1e-12)


@pytest.mark.parametrize("law", LAWS, ids=lambda l: l.name)
def test_jacobian_matches_finite_differences(law, rng):
    h = 1e-6
    for u, v in random_states(rng, 10):
        J = jacobian(law, State(u, v))
        du = (flux(law, State(u + h, v)) - flux(law, State(u - h, v))) / (2 * h)
        dv = (flux(law, State(u, v + h)) - flux(law, State(u, v - h))) / (2 * h)
        np.testing.assert_allclose(J, np.column_stack([du, dv]), atol=1e-7)


def test_vectorised_eigenvalues():
    r = np.array([1.0, 4.0])
    np.testing.assert_array_equal(lambda1(THIN_FILM, r), [0.5, 2.0])
    np.testing.assert_array_equal(lambda2(THIN_FILM, r), [1.5, 6.0])


# ---- field classification


def test_field2_indicator_examples():
    assert classify_fields(THIN_FILM, State(1.0, 2.0))[1] == 6.0
    assert classify_fields(LOG_LAW, State(2.0, 2.0))[1] == pytest.approx(2.0, abs=1e-14)


@pytest.mark.parametrize("law", LAWS, ids=lambda l: l.name)
def test_first_field_linearly_degenerate_by_finite_differences(law, rng):
    h = 1e-6

    def lam1(u, v):
        return float(lambda1(law, u * v))

    for u, v in random_states(rng, 20):
        grad = np.array([(lam1(u + h, v) - lam1(u - h, v)) / (2 * h), (lam1(u, v + h) - lam1(u, v - h)) / (2 * h)])
        _, _, r1, _ = eigensystem(law, State(u, v))
        assert abs(grad @ r1) <= 1e-9
        assert classify_fields(law, State(u, v))[0] == 0.0


@pytest.mark.parametrize("law", LAWS, ids=lambda l: l.name)
def test_second_field_indicator_matches_finite_differences(law, rng):
    h = 1e-6

    def lam2(u, v):
        return float(lambda2(law, u * v))

    for u, v in random_states(rng, 10):
        grad = np.array([(lam2(u + h, v) - lam2(u - h, v)) / (2 * h), (lam2(u, v + h) - lam2(u, v - h)) / (2 * h)])
        _, _, _, r2 = eigensystem(law, State(u, v))
        assert grad @ r2 == pytest.approx(classify_fields(law, State(u, v))[1], rel=1e-7)


# ---- parsing


@pytest.mark.parametrize("text,expected", [("2,2", (2.0, 2.0)), (" 1.5 , 0.75", (1.5, 0.75)), ((3, 4), (3.0, 4.0))])
def test_parse_state(text, expected):
    s = parse_state(text)
    assert (s.u, s.v) == expected


@pytest.mark.parametrize("text", ["1", "1,2,3", "a,b"])
def test_parse_state_rejects(text):
    with pytest.raises(ValueError):
        parse_state(text)


def test_log_law_values():
    assert LOG_LAW.eval(math.e) == pytest.approx(1.0)
    assert LOG_LAW.eval(4.0, 1) == 0.25
    assert LOG_LAW.eval(4.0, 2) == -1 / 16
    with pytest.raises(ValueError):
        LOG_LAW.eval(1.0, 3)
