"""
Fixtures compartilhadas dos testes
"""

import os
import sys

import numpy as np
import pytest
from dotenv import load_dotenv

# Raiz do projeto no path para importar src.services
RAIZ = os.path.join(os.path.dirname(__file__), "..")
sys.path.insert(0, os.path.abspath(RAIZ))
load_dotenv(dotenv_path=os.path.join(RAIZ, ".env"))

from src.services.certificate_service import CertificateService  # noqa: E402
from src.services.measure_service import MeasureService  # noqa: E402
from src.services.settings_service import Settings  # noqa: E402
from src.services.solver_service import SolverService  # noqa: E402
from src.services.timescale_service import TimeScaleService  # noqa: E402

EXAMPLE2 = np.array([[-5.0, 2.0], [2.0, -2.0]])


@pytest.fixture
def settings():
    """Configurações padrão, independentes do .env"""
    return Settings()


@pytest.fixture
def coarse_settings():
    """Passo denso maior para testes de integração longos"""
    return Settings(dense_step=1e-2)


@pytest.fixture
def timescales(settings):
    return TimeScaleService(settings)


@pytest.fixture
def measures(settings):
    return MeasureService(settings)


@pytest.fixture
def solver(coarse_settings):
    return SolverService(coarse_settings)


@pytest.fixture
def certificates(coarse_settings):
    return CertificateService(coarse_settings)


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


def contracting_matrix(rng, n: int) -> np.ndarray:
    """−1.5·I mais parte antissimétrica e perturbação simétrica pequena (n ≤ 4, μ ≤ 0.24)"""
    K = rng.uniform(-0.25, 0.25, size=(n, n))
    S = rng.uniform(-0.1, 0.1, size=(n, n))
    return -1.5 * np.eye(n) + (K - K.T) + 0.5 * (S + S.T)
