import numpy as np
import pytest

from stabcert.certifier import certify
from stabcert.scenarios import example1_manual_model, example1_system
from stabcert.synthesis import synthesize
from stabcert.sysmodel import PerturbationSpec, PolynomialVectorField, SystemDefinition

K_EX1 = np.array([[0.375, 1.25]])


def example1_field():
    # x1' = x1^3 + x2^2 u1 + x2,  x2' = u1
    return PolynomialVectorField.from_terms(2, 1, [
        (0, 1.0, (3, 0), (0,)),
        (0, 1.0, (0, 2), (1,)),
        (0, 1.0, (0, 1), (0,)),
        (1, 1.0, (0, 0), (1,)),
    ])


def example1_perturbation(sigma=0.0, c=0.001, gamma=-10.0, phase="cosine", params=None):
    if params is None and phase == "cosine":
        params = {"direction": [0.0, 1.0], "weights": [1.0, 1.0]}
    return PerturbationSpec(sigma=sigma, c=c, gamma=gamma, t0=0.0, phase=phase, params=params or {})


@pytest.fixture
def field1():
    return example1_field()


@pytest.fixture
def system1():
    return example1_system()


@pytest.fixture
def synth1(system1):
    return synthesize(system1)


@pytest.fixture
def cert1(system1, synth1):
    """Limiting certificate (margin 0, hand remainder bound)."""
    return certify(system1, example1_manual_model(synth1.k_norm), margin=0.0, synth=synth1)


@pytest.fixture
def strict_cert1(system1, synth1):
    return certify(system1, example1_manual_model(synth1.k_norm), margin=0.05, synth=synth1)


def make_system(field, perturbation=None, eigs=(), gain=None):
    return SystemDefinition(field=field, perturbation=perturbation or PerturbationSpec(),
                            desired_eigenvalues=tuple(eigs), gain_override=gain)
