import numpy as np
import pytest

from ptcavity import CoupledModeSystem, MechanicalMode


@pytest.fixture
def pt_system() -> CoupledModeSystem:
    """Gain-loss pair at the transducer operating point."""
    return CoupledModeSystem(delta=0.0, d1=20.0, d2=-16.0, g1=19.8, g=5.0)


@pytest.fixture
def ep_system() -> CoupledModeSystem:
    """Loss-loss pair with mirrored rate magnitudes."""
    return CoupledModeSystem(delta=0.0, d1=20.0, d2=16.0, g1=1.0, g=5.0)


@pytest.fixture
def mech() -> MechanicalMode:
    return MechanicalMode(omega_m=6.0, gamma_m=0.2, z0=0.2)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240917)
