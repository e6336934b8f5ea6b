import numpy as np
import pytest

from uqsd import StateEnsemble, SymmetrySpec, UnitaryGroup, reciprocal_states

from helpers import (
    sign_group_elements,
    sign_group_generator,
    three_state_matrix,
)


@pytest.fixture(scope="session")
def three_states_uniform() -> StateEnsemble:
    return StateEnsemble(three_state_matrix(), np.full(3, 1.0 / 3.0))


@pytest.fixture(scope="session")
def three_states_weighted() -> StateEnsemble:
    states = three_state_matrix()
    _, _, vh = np.linalg.svd(states)
    priors = np.abs(vh[-1, :]) ** 2
    return StateEnsemble(states, priors)


@pytest.fixture(scope="session")
def sign_group_spec() -> SymmetrySpec:
    group = UnitaryGroup(sign_group_elements())
    return SymmetrySpec(group=group, generators=sign_group_generator())


@pytest.fixture(scope="session")
def orthonormal_ensemble() -> StateEnsemble:
    return StateEnsemble(np.eye(3, dtype=complex), np.array([0.5, 0.3, 0.2]))


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def three_states_reciprocals(three_states_uniform):
    return reciprocal_states(three_states_uniform)
