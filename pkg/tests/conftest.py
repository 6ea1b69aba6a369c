"""
Shared fixtures: measured Er:YSO line parameters and a matching resonator
"""
from pathlib import Path

import numpy as np
import pytest

from spinres.models.cavity import CavityParams, EnsembleTransition
from spinres.models.spin import InteractionTensor, SpinSystem, TensorKind

F_R = 4.4        # GHz
KAPPA = 7.746    # MHz

TABLE1 = {
    "1a": (8.37, 74.9, 4.02),
    "1b": (7.25, 96.6, 4.98),
    "2a": (2.51, 101.0, 6.07),
    "2b": (2.04, 136.0, 6.16),
}

SITE1_G = ((2.873183, 0.0, 2.399049), (0.0, 1.5, 0.0), (2.399049, 0.0, 8.591326))
SITE2_G = ((1.524334, 0.0, 0.695539), (0.0, 0.8, 0.0), (0.695539, 0.0, 2.691585))

DATA_DIR = Path(__file__).resolve().parent.parent / "spinres" / "data"


def line(label: str) -> EnsembleTransition:
    g, gamma, g_coll = TABLE1[label]
    return EnsembleTransition(label=label, g_factor=g, gamma=gamma, g_coll=g_coll)


@pytest.fixture
def cavity():
    return CavityParams(f_r=F_R, kappa=KAPPA)


@pytest.fixture
def table1_lines():
    return [line(label) for label in TABLE1]


@pytest.fixture
def site1_lines():
    return [line("1a"), line("1b")]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def free_spin():
    return SpinSystem(S=0.5, I=0.0, g=InteractionTensor.isotropic(2.0, TensorKind.ZEEMAN_G))


@pytest.fixture
def site1_system():
    return SpinSystem(g=InteractionTensor(matrix=SITE1_G, kind=TensorKind.ZEEMAN_G))


@pytest.fixture
def site2_system():
    return SpinSystem(g=InteractionTensor(matrix=SITE2_G, kind=TensorKind.ZEEMAN_G))


@pytest.fixture
def example_config_path():
    return DATA_DIR / "er_yso.cfg"


@pytest.fixture
def tensor_config_path():
    return DATA_DIR / "er_yso_tensor.cfg"
