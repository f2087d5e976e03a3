"""
Tests for Jacobians, spectra, Routh-Hurwitz conditions and the
disease-free Lyapunov function.
"""
import numpy as np
import pytest

from app.exceptions import EigenSolverError, ThresholdDegenerateError
from app.models.parameters import ModelParameters, State
from app.models.reports import Classification
from app.models.trajectory import IntegrationMethod, IntegratorConfig
from app.services.bifurcation_service import BifurcationService
from app.services.equilibrium_service import EquilibriumService
from app.services.integrator_service import IntegratorService
from app.services.stability_service import StabilityService
from app.services.vector_field_service import VectorFieldService
from tests.conftest import closed_form_r0, disease_free_point, random_parameters


def subcritical_parameters(rng: np.random.Generator) -> ModelParameters:
    """Random draw rescaled so that both reproduction numbers lie in [0.1, 0.8]."""
    p = random_parameters(rng)
    r01, r02 = closed_form_r0(p)
    target1, target2 = rng.uniform(0.1, 0.8, size=2)
    return p.replace(beta1=p.beta1 * target1 / r01, beta2=p.beta2 * target2 / r02)


def dfe_eigenvalues(p: ModelParameters) -> np.ndarray:
    w = p.natural_death
    L = w + p.excess_death1 + p.mutation_rate + p.recovery1
    P = w + p.excess_death2 + p.recovery2
    r01, r02 = closed_form_r0(p)
    return np.array(
        [
            -w,
            -(w + p.vaccination_rate + p.vaccine_waning),
            -(w + p.natural_waning),
            L * (r01 - 1),
            P * (r02 - 1),
        ]
    )


def test_analytic_jacobian_matches_finite_differences(table_params, initial_state, rng):
    draws = [(table_params, initial_state)]
    for _ in range(100):
        draws.append((random_parameters(rng), State.from_array(rng.uniform(0.0, 1e8, size=5))))
    for p, x in draws:
        analytic = StabilityService.jacobian(p, x)
        numeric = StabilityService.numeric_jacobian(p, x)
        assert np.allclose(analytic, numeric, rtol=1e-6, atol=1e-6 * np.max(np.abs(analytic)))


def test_dfe_spectrum_matches_closed_forms(rng):
    for _ in range(100):
        p = random_parameters(rng)
        S0, V0 = disease_free_point(p)
        J = StabilityService.jacobian(p, State(S=S0, V=V0, I1=0.0, I2=0.0, R=0.0))
        numeric = np.sort(StabilityService.eigenvalues(J).real)
        expected = np.sort(dfe_eigenvalues(p))
        assert np.allclose(numeric, expected, rtol=1e-8, atol=1e-8 * np.max(np.abs(expected)))


def test_eigenvalues_sorted_by_real_part(table_params, dfe_state):
    values = StabilityService.eigenvalues(StabilityService.jacobian(table_params, dfe_state))
    assert np.all(np.diff(values.real) <= 0.0)


def test_eigenvalues_reject_non_finite_matrix():
    with pytest.raises(EigenSolverError):
        StabilityService.eigenvalues(np.array([[1.0, np.nan], [0.0, 1.0]]))


def test_char_poly_matches_numpy(rng):
    for _ in range(20):
        M = rng.normal(size=(5, 5))
        coeffs = StabilityService.char_poly(M)
        assert np.allclose(coeffs, np.poly(M)[1:], rtol=1e-9, atol=1e-9)


def test_char_poly_of_companion_matrix():
    # tau^3 + 6 tau^2 + 11 tau + 6 = (tau + 1)(tau + 2)(tau + 3)
    M = np.diag([-1.0, -2.0, -3.0])
    assert StabilityService.char_poly(M) == pytest.approx((6.0, 11.0, 6.0))


def test_hurwitz_minors_of_known_polynomials():
    # (tau + 1)^5: every minor positive
    stable = (5.0, 10.0, 10.0, 5.0, 1.0)
    assert all(d > 0 for d in StabilityService.hurwitz_minors(stable))
    # (tau - 1)(tau + 1)^4 has a positive root
    unstable = tuple(np.poly([1.0, -1.0, -1.0, -1.0, -1.0])[1:])
    assert not all(d > 0 for d in StabilityService.hurwitz_minors(unstable))


def test_hurwitz_minors_that_vanish_exactly_are_zero():
    # (tau - 1)(tau + 1)^4: the last two minors are exactly zero
    minors = StabilityService.hurwitz_minors((3.0, 2.0, -2.0, -3.0, -1.0))
    assert minors[:3] == pytest.approx([3.0, 8.0, 8.0])
    assert minors[3] == 0.0
    assert minors[4] == 0.0
    report = StabilityService.routh_hurwitz((3.0, 2.0, -2.0, -3.0, -1.0))
    assert not report.minors_positive
    assert not report.positivity_satisfied


def test_last_hurwitz_minor_is_kn_times_previous(rng):
    for _ in range(20):
        coeffs = tuple(np.poly(-rng.uniform(0.01, 2.0, size=5))[1:])
        minors = StabilityService.hurwitz_minors(coeffs)
        assert minors[4] == pytest.approx(coeffs[4] * minors[3], rel=1e-12)


def test_hurwitz_minors_keep_sign_across_scales():
    # eigenvalues spread over three decades, as at the disease-free state
    roots = np.array([-3.5e-5, -2.7e-3, -1.7e-2, -3.0e-2, -5.0e-2])
    minors = StabilityService.hurwitz_minors(tuple(np.poly(roots)[1:]))
    assert all(d > 0 for d in minors)


def test_fifth_power_satisfies_every_condition_group():
    report = StabilityService.routh_hurwitz((5.0, 10.0, 10.0, 5.0, 1.0))
    assert report.positivity_satisfied
    assert report.second_condition
    assert report.third_condition
    assert report.satisfied
    assert report.minors_positive


def test_negative_constant_coefficient_fails_positivity():
    report = StabilityService.routh_hurwitz((5.0, 10.0, 10.0, 5.0, -1.0))
    assert report.positivity == [True, True, True, True, False]
    assert not report.positivity_satisfied
    assert not report.satisfied
    assert not report.minors_positive


def test_routh_hurwitz_agrees_with_spectrum_at_endemic_state(table_params):
    point = EquilibriumService.endemic(table_params)
    report = StabilityService.classify(table_params, point)
    assert report.classification == Classification.STABLE
    assert report.routh_hurwitz.minors_positive
    if report.routh_hurwitz.satisfied:
        assert np.all(report.eigenvalues.real < 0)


def test_routh_hurwitz_conditions_are_sufficient(rng):
    checked = 0
    for _ in range(300):
        roots = -rng.uniform(0.01, 2.0, size=5) + (rng.uniform(-0.3, 0.3, size=5) if rng.random() < 0.3 else 0)
        coeffs = tuple(np.real(np.poly(roots)[1:]))
        report = StabilityService.routh_hurwitz(coeffs)
        all_negative = bool(np.all(np.real(np.roots(np.concatenate(([1.0], coeffs)))) < 0))
        assert report.minors_positive == all_negative
        if report.satisfied:
            assert all_negative
            checked += 1
    assert checked > 0


def test_expanded_coefficients_agree_at_disease_free_state(rng):
    for _ in range(50):
        p = random_parameters(rng)
        S0, V0 = disease_free_point(p)
        J = StabilityService.jacobian(p, State(S=S0, V=V0, I1=0.0, I2=0.0, R=0.0))
        coeffs = StabilityService.char_poly(J)
        assert all(StabilityService.check_expanded_coefficients(J, coeffs))


def test_expanded_leading_coefficients_agree_anywhere(table_params, initial_state):
    J = StabilityService.jacobian(table_params, initial_state)
    written = StabilityService.expanded_coefficients(J)
    coeffs = StabilityService.char_poly(J)
    assert written[0] == pytest.approx(coeffs[0], rel=1e-12)
    assert written[1] == pytest.approx(coeffs[1], rel=1e-10)


def test_classification_at_reference_parameters(table_params):
    report = StabilityService.classify(table_params, EquilibriumService.disease_free(table_params))
    assert report.classification == Classification.UNSTABLE
    assert not report.routh_hurwitz.minors_positive


def test_classification_when_both_strains_subcritical(table_params):
    p = table_params.replace(beta2=0.3 * table_params.beta2)
    report = StabilityService.classify(p, EquilibriumService.disease_free(p))
    assert report.classification == Classification.STABLE
    assert report.routh_hurwitz.minors_positive
    assert report.routh_hurwitz.positivity_satisfied


def test_classification_at_threshold_is_marginal(table_params):
    p = BifurcationService.at_threshold(table_params, 1)
    report = StabilityService.classify(p, EquilibriumService.disease_free(p))
    assert report.classification == Classification.MARGINAL


def test_supercritical_draws_have_unstable_disease_free_state(rng):
    found = 0
    while found < 100:
        p = random_parameters(rng)
        if max(closed_form_r0(p)) <= 1.0 + 1e-6:
            continue
        report = StabilityService.classify(p, EquilibriumService.disease_free(p))
        assert report.classification == Classification.UNSTABLE
        found += 1


def test_lyapunov_weights_closed_form(table_params):
    c1, c2 = StabilityService.dfe_lyapunov_weights(table_params)
    r01, _ = closed_form_r0(table_params)
    L = table_params.strain1_exit_rate
    P = table_params.strain2_exit_rate
    assert c1 == pytest.approx((1 + table_params.mutation_rate / (P * (1 - r01))) / L, rel=1e-12)
    assert c2 == pytest.approx(1 / P, rel=1e-15)


def test_lyapunov_weights_undefined_at_strain1_threshold(table_params):
    with pytest.raises(ThresholdDegenerateError):
        StabilityService.dfe_lyapunov_weights(BifurcationService.at_threshold(table_params, 1))


def test_disease_dies_out_and_lyapunov_function_decreases(rng):
    """Both reproduction numbers below one: infection vanishes from every start in the region."""
    for _ in range(100):
        p = subcritical_parameters(rng)
        r01, r02 = closed_form_r0(p)
        S0, V0 = disease_free_point(p)
        leak = 1 - p.vaccine_efficacy
        c1, c2 = StabilityService.dfe_lyapunov_weights(p)
        bound = VectorFieldService.region_bound(p)

        starts = []
        for _ in range(10):
            total = rng.uniform(0.5, 1.0) * bound
            starts.append(State.from_array(rng.dirichlet(np.ones(5)) * total))
        # slowest of: infection decay, S/V relaxation, loss of natural immunity
        rates = (
            p.strain1_exit_rate * (1 - r01),
            p.strain2_exit_rate * (1 - r02),
            p.natural_death + p.vaccination_rate + p.vaccine_waning,
            p.natural_death + p.natural_waning,
        )
        horizon = 20.0 / min(rates)
        cfg = IntegratorConfig(
            method=IntegrationMethod.DORMAND_PRINCE45, rel_tol=1e-6, t_end=horizon, output_step=horizon / 200.0
        )
        for start, trajectory in zip(starts, IntegratorService.integrate_ensemble(p, starts, cfg)):
            infected = trajectory.column("I1") + trajectory.column("I2")
            assert infected[-1] < 1e-6 * start.total

            for row in trajectory.states[::10]:
                x = State.from_array(row)
                derivative = StabilityService.dfe_lyapunov_derivative(p, x)
                excess = x.S + leak * x.V - (S0 + leak * V0)
                identity = (r01 - 1) * x.I1 + (r02 - 1) * x.I2 + (c1 * p.beta1 * x.I1 + c2 * p.beta2 * x.I2) * excess
                scale = abs(r01 - 1) * x.I1 + abs(r02 - 1) * x.I2 + abs((c1 * p.beta1 * x.I1 + c2 * p.beta2 * x.I2) * excess)
                assert derivative == pytest.approx(identity, rel=1e-8, abs=1e-8 * scale + 1e-300)
                if excess <= 0:
                    assert derivative <= 1e-9 * scale
