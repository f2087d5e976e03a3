"""
Shared fixtures for the SVIR toolkit tests.
"""
import numpy as np
import pytest

from app.models.parameters import DEFAULT_INITIAL_STATE, DEFAULT_PARAMETERS, ModelParameters, State


def closed_form_r0(p: ModelParameters):
    """Reproduction numbers written out from the raw rates."""
    w, mu, alpha, sigma = p.natural_death, p.vaccine_waning, p.vaccination_rate, p.vaccine_efficacy
    numerator = p.birth_rate * ((mu + w) + (1 - sigma) * alpha)
    denominator = w * (mu + w + alpha)
    r01 = p.beta1 * numerator / ((w + p.excess_death1 + p.mutation_rate + p.recovery1) * denominator)
    r02 = p.beta2 * numerator / ((w + p.excess_death2 + p.recovery2) * denominator)
    return r01, r02


def disease_free_point(p: ModelParameters):
    w, mu, alpha = p.natural_death, p.vaccine_waning, p.vaccination_rate
    denominator = w * (mu + w + alpha)
    return p.birth_rate * (mu + w) / denominator, alpha * p.birth_rate / denominator


def random_parameters(rng: np.random.Generator, **fixed) -> ModelParameters:
    """Admissible draw spread over a few decades around the reference values."""
    base = DEFAULT_PARAMETERS.model_dump()
    values = {}
    for name, value in base.items():
        if name == "vaccine_efficacy":
            values[name] = float(rng.uniform(0.0, 1.0))
        else:
            values[name] = float(value * 10 ** rng.uniform(-1.0, 1.0))
    values.update(fixed)
    return ModelParameters(**values)


@pytest.fixture
def table_params() -> ModelParameters:
    return DEFAULT_PARAMETERS


@pytest.fixture
def initial_state() -> State:
    return DEFAULT_INITIAL_STATE


@pytest.fixture
def dfe_state(table_params) -> State:
    S0, V0 = disease_free_point(table_params)
    return State(S=S0, V=V0, I1=0.0, I2=0.0, R=0.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)
