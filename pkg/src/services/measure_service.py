import math
import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.linalg import expm

from .erros import DomainError, DimensionError, InvalidSpecError
from .linalg_service import (
    INF_NORM, NORM_BASES, ONE_NORM, TWO_NORM, LinalgService, as_matrix, as_square,
)
from .settings_service import Settings, get_settings
from .timescale_service import Grid, TimeScale, TimeScaleService

# Configuração de logging
logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MeasureKind:
    """Norma base (one-norm | two-norm | inf-norm) e peso opcional P"""

    base: str = TWO_NORM
    weight: Optional[Tuple[Tuple[float, ...], ...]] = None

    def __post_init__(self):
        if self.base not in NORM_BASES:
            raise InvalidSpecError(f"norma desconhecida '{self.base}'", field="base")
        if self.weight is not None:
            P = as_square(self.weight, "weight")
            object.__setattr__(self, "weight", tuple(tuple(float(v) for v in row) for row in P))

    @property
    def weight_matrix(self) -> Optional[np.ndarray]:
        return None if self.weight is None else np.array(self.weight, dtype=float)

    def to_dict(self) -> Dict[str, Any]:
        return {"base": self.base, "weight": None if self.weight is None else [list(r) for r in self.weight]}

    @classmethod
    def from_dict(cls, documento: Dict[str, Any]) -> "MeasureKind":
        if not isinstance(documento, dict):
            raise InvalidSpecError("esperado objeto {base, weight}", field="kind")
        return cls(base=documento.get("base", TWO_NORM), weight=documento.get("weight"))


@dataclass(frozen=True)
class HilgerValue:
    lam: float
    mu: float
    value: float


@dataclass(frozen=True)
class MeasureProfile:
    """Medida m(A(t), μ(t)) ao longo de uma grade"""

    samples: Tuple[Tuple[float, float], ...]

    @property
    def sup(self) -> float:
        return max(v for _, v in self.samples)

    @property
    def inf(self) -> float:
        return min(v for _, v in self.samples)

    @property
    def argsup(self) -> float:
        return max(self.samples, key=lambda s: s[1])[0]

    def __iter__(self):
        return iter(self.samples)

    def __len__(self):
        return len(self.samples)


def hilger_re(lam: float, mu: float) -> HilgerValue:
    """Parte real de Hilger: λ se μ = 0, (|1+μλ|−1)/μ caso contrário"""
    if mu < 0:
        raise DomainError(f"mu negativo ({mu})")
    if mu == 0:
        return HilgerValue(lam, 0.0, float(lam))
    return HilgerValue(lam, mu, (abs(1.0 + mu * lam) - 1.0) / mu)


class MeasureService:
    """
    Medidas matriciais em escalas temporais

    RESPONSABILIDADES:
    =================
    - m(A, μ) = (‖I+μA‖−1)/μ para μ > 0 e formas fechadas em μ = 0
    - Formas fechadas por coluna (norma 1) e por linha (norma ∞)
    - Taxa inicial de crescimento (exata em pontos dispersos, sonda em
      pontos densos)
    - Perfil da medida ao longo de uma grade
    - Predicados das propriedades algébricas da medida, usados pelos
      testes e pelo comando measure
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        self.linalg = LinalgService(self.settings)
        self.timescales = TimeScaleService(self.settings)

    def _prepare(self, A, kind: MeasureKind) -> np.ndarray:
        M = as_square(A)
        if kind.weight is not None:
            M = self.linalg.weighted(M, kind.weight_matrix)
        return M

    def matrix_measure(self, A, mu: float, kind: MeasureKind = MeasureKind()) -> float:
        """
        Medida matricial m(A, μ)

        Args:
            A: matriz quadrada
            mu (float): graininess ≥ 0
            kind (MeasureKind): norma base e peso

        Returns:
            float: (‖I+μA‖−1)/μ, ou a medida clássica em μ = 0
        """
        if mu < 0:
            raise DomainError(f"mu negativo ({mu})")
        M = self._prepare(A, kind)
        if mu == 0:
            if kind.base == TWO_NORM:
                return float(self.linalg.symmetric_eigenvalues(0.5 * (M + M.T))[-1])
            return self._closed_form(M, 0.0, kind.base)
        n = M.shape[0]
        norma = self.linalg.induced_norm(np.eye(n) + mu * M, kind.base)
        return (norma - 1.0) / mu

    def _closed_form(self, M: np.ndarray, mu: float, base: str) -> float:
        diag = np.diag(M)
        if mu == 0:
            hre = diag
        else:
            hre = (np.abs(1.0 + mu * diag) - 1.0) / mu
        fora = np.abs(M - np.diag(diag))
        # coluna j para a norma 1, linha i para a norma ∞
        somas = fora.sum(axis=0) if base == ONE_NORM else fora.sum(axis=1)
        return float(np.max(hre + somas))

    def closed_form_measure(self, A, mu: float, base: str = ONE_NORM) -> float:
        """
        m₁ = max_j [ĤRe{a_jj}(μ) + Σ_{i≠j}|a_ij|]; m∞ análogo por linhas
        """
        if base not in (ONE_NORM, INF_NORM):
            raise InvalidSpecError("forma fechada só para one-norm ou inf-norm", field="base")
        if mu < 0:
            raise DomainError(f"mu negativo ({mu})")
        return self._closed_form(as_square(A), mu, base)

    def hilger_re(self, lam: float, mu: float) -> HilgerValue:
        return hilger_re(lam, mu)

    def vector_norm(self, x, kind: MeasureKind = MeasureKind()) -> float:
        return self.linalg.vector_norm(x, kind.base, kind.weight_matrix)

    def matrix_norm(self, A, kind: MeasureKind = MeasureKind()) -> float:
        return self.linalg.induced_norm(A, kind.base, kind.weight_matrix)

    def initial_growth_rate(self, A, ts: TimeScale, t0: float, kind: MeasureKind = MeasureKind(),
                            h_probe: Optional[float] = None) -> float:
        """
        Taxa inicial de crescimento de A em t0

        Em ponto disperso é exatamente m(A, μ(t0)). Em ponto denso é a
        sonda (‖e^{hA}‖−1)/h, de primeira ordem em h.

        Raises:
            DomainError: se t0 ∉ T ou se t0 + h sai do intervalo denso
        """
        h = h_probe or self.settings.h_probe
        grao = self.timescales.mu(ts, t0)
        if grao.scattered:
            return self.matrix_measure(A, grao.mu, kind)
        k = ts.locate(t0)
        if t0 + h > ts.segments[k][1]:
            raise DomainError(f"sonda t0+h={t0 + h} sai do intervalo denso {ts.segments[k]}")
        M = as_square(A)
        propagador = expm(h * M)
        return (self.matrix_norm(propagador, kind) - 1.0) / h

    def measure_along(self, A_of_t: Callable[[float], Any], ts: TimeScale, grid: Grid,
                      kind: MeasureKind = MeasureKind()) -> MeasureProfile:
        """Avalia m(A(t), μ(t)) em cada instante da grade"""
        amostras = []
        for t in grid:
            grao = self.timescales.mu(ts, t)
            amostras.append((t, self.matrix_measure(A_of_t(t), grao.mu, kind)))
        perfil = MeasureProfile(tuple(amostras))
        logger.debug(f"📊 Perfil da medida: {len(perfil)} pontos, sup={perfil.sup:.6g}, inf={perfil.inf:.6g}")
        return perfil

    # ------------------------------------------------------------------
    # Propriedades verificáveis
    # ------------------------------------------------------------------

    def property_checks(self, A, B, mu: float, kind: MeasureKind = MeasureKind(),
                        rng: Optional[np.random.Generator] = None) -> Dict[str, bool]:
        """
        Avalia as propriedades algébricas da medida num par (A, B)

        Returns:
            Dict[str, bool]: nome da propriedade -> satisfeita
        """
        rng = rng or np.random.default_rng(0)
        A = as_square(A)
        B = as_square(B)
        if A.shape != B.shape:
            raise DimensionError("A e B com dimensões diferentes")
        n = A.shape[0]
        I = np.eye(n)
        m = lambda X, h=mu: self.matrix_measure(X, h, kind)
        norma_A = self.matrix_norm(A, kind)
        mA = m(A)
        resultado: Dict[str, bool] = {}

        esperado_menos_I = -1.0 if mu <= 1.0 else (mu - 2.0) / mu
        resultado["identity"] = abs(m(I) - 1.0) <= 1e-10 and abs(m(-I) - esperado_menos_I) <= 1e-10
        resultado["norm_bounds"] = -norma_A - 1e-10 <= mA <= norma_A + 1e-10
        resultado["convexity"] = all(
            m(a * A + (1 - a) * B) <= a * mA + (1 - a) * m(B) + 1e-10 for a in (0.25, 0.5, 0.75)
        )
        resultado["monotone_in_mu"] = m(A, mu) <= m(A, mu + 0.5) + 1e-12
        simetrica = 0.5 * (A + A.T)
        autovalores = self.linalg.symmetric_eigenvalues(simetrica)
        resultado["eigenvalue_bound"] = all(
            hilger_re(float(lam), mu).value <= m(simetrica) + 1e-10 for lam in autovalores
        )
        x = rng.uniform(-1.0, 1.0, size=n)
        nx = self.vector_norm(x, kind)
        nAx = self.vector_norm(A @ x, kind)
        resultado["lower_bounds"] = (nAx >= -m(-A) * nx - 1e-10) and (nAx >= -mA * nx - 1e-10)
        if kind.weight is not None:
            sem_peso = MeasureKind(kind.base)
            P = kind.weight_matrix
            similar = P @ A @ self.linalg.invert(P)
            resultado["weighted_similarity"] = abs(mA - self.matrix_measure(similar, mu, sem_peso)) <= 1e-9
        resultado["split_subadditivity"] = m(A + B) <= m(A, 2 * mu) + m(B, 2 * mu) + 1e-10
        resultado["scaling"] = all(
            abs(m(c * A) - c * m(A, c * mu)) <= 1e-10 * max(1.0, abs(mA), norma_A) for c in (0.5, 2.0)
        )
        etas = np.linspace(0.0, 1.0, 201)
        integrando = np.array([m(A + eta * B) for eta in etas])
        resultado["jensen"] = m(A + 0.5 * B) <= float(trapezoid(integrando, x=etas)) + 1e-9
        if mu > 0:
            resultado["regressivity"] = (
                abs(1.0 + mu * mA - self.matrix_norm(I + mu * A, kind)) <= 1e-10 * max(1.0, norma_A)
                and 1.0 + mu * mA >= -1e-12
            )
        if kind.weight is None and kind.base in (ONE_NORM, INF_NORM):
            resultado["closed_form"] = abs(self.closed_form_measure(A, mu, kind.base) - mA) <= 1e-10
        delta = 1e-6
        resultado["continuity"] = abs(m(A, mu + delta) - mA) <= 1e-3 * (1.0 + norma_A)
        return resultado
