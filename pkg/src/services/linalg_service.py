import math
import logging
from typing import Optional, Sequence

import numpy as np

from .erros import AsymmetryError, DimensionError, NonSquareError, SingularWeightError
from .settings_service import Settings, get_settings

# Configuração de logging
logger = logging.getLogger(__name__)

ONE_NORM = "one-norm"
TWO_NORM = "two-norm"
INF_NORM = "inf-norm"
NORM_BASES = (ONE_NORM, TWO_NORM, INF_NORM)

SYMMETRY_TOL = 1e-10
SINGULARITY_TOL = 1e-12


def as_matrix(A, name: str = "A") -> np.ndarray:
    """Converte para ndarray 2-D de floats finitos"""
    M = np.array(A, dtype=float)
    if M.ndim == 0:
        M = M.reshape(1, 1)
    if M.ndim != 2 or M.size == 0:
        raise DimensionError(f"{name} deve ser uma matriz 2-D não vazia (shape={M.shape})")
    if not np.all(np.isfinite(M)):
        raise DimensionError(f"{name} tem entradas não finitas")
    return M


def as_square(A, name: str = "A") -> np.ndarray:
    M = as_matrix(A, name)
    if M.shape[0] != M.shape[1]:
        raise NonSquareError(f"{name} não é quadrada (shape={M.shape})")
    return M


class LinalgService:
    """
    Álgebra linear densa para matrizes pequenas

    RESPONSABILIDADES:
    =================
    - Normas induzidas 1, 2 e ∞, com peso opcional P (‖PAP⁻¹‖)
    - Autovalores de matrizes simétricas por Jacobi cíclico
    - Maior valor singular σ_max = √λ_max(AᵀA)
    - Inversão da matriz de peso com teste de singularidade relativo

    Dimensões típicas vão até algumas centenas; tudo é O(n³) denso.
    """

    def __init__(self, settings: Optional[Settings] = None):
        settings = settings or get_settings()
        self.jacobi_tol = settings.jacobi_tol
        self.max_sweeps = settings.jacobi_max_sweeps

    def symmetric_eigenvalues(self, A) -> np.ndarray:
        """
        Autovalores de A simétrica, em ordem crescente

        Jacobi cíclico: varre todos os pares (p, q) zerando a_pq por rotação
        até a norma de Frobenius fora da diagonal ficar abaixo de
        jacobi_tol·‖A‖_F.

        Args:
            A: matriz simétrica (tolerância 1e-10 relativa)

        Returns:
            np.ndarray: autovalores ordenados
        """
        M = as_square(A)
        escala = max(1.0, float(np.max(np.abs(M))))
        if np.max(np.abs(M - M.T)) > SYMMETRY_TOL * escala:
            raise AsymmetryError("matriz não simétrica")
        M = 0.5 * (M + M.T)
        n = M.shape[0]
        if n == 1:
            return M.diagonal().copy()

        limiar = self.jacobi_tol * np.linalg.norm(M)
        for varredura in range(self.max_sweeps):
            fora = math.sqrt(max(0.0, float(np.sum(M * M) - np.sum(M.diagonal() ** 2))))
            if fora <= limiar:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    apq = M[p, q]
                    if apq == 0.0:
                        continue
                    theta = (M[q, q] - M[p, p]) / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    c = 1.0 / math.sqrt(t * t + 1.0)
                    s = t * c
                    col_p = M[:, p].copy()
                    col_q = M[:, q].copy()
                    M[:, p] = c * col_p - s * col_q
                    M[:, q] = s * col_p + c * col_q
                    row_p = M[p, :].copy()
                    row_q = M[q, :].copy()
                    M[p, :] = c * row_p - s * row_q
                    M[q, :] = s * row_p + c * row_q
        else:
            logger.warning(f"⚠️ Jacobi atingiu {self.max_sweeps} varreduras sem convergir (n={n})")
        return np.sort(M.diagonal())

    def sigma_max(self, A) -> float:
        """Maior valor singular, via autovalores de AᵀA"""
        M = as_matrix(A)
        gram = M.T @ M
        lam = self.symmetric_eigenvalues(gram)[-1]
        return math.sqrt(max(0.0, float(lam)))

    def invert(self, P) -> np.ndarray:
        """
        Inversa da matriz de peso

        Raises:
            SingularWeightError: se |det P| / Π‖linha_i‖ < 1e-12
        """
        M = as_square(P, "P")
        normas = np.linalg.norm(M, axis=1)
        if np.any(normas == 0.0):
            raise SingularWeightError("P tem linha nula")
        escala = float(np.prod(normas))
        det = float(np.linalg.det(M))
        if abs(det) < SINGULARITY_TOL * escala:
            raise SingularWeightError(f"P singular (|det|={abs(det):.3e}, escala={escala:.3e})")
        return np.linalg.inv(M)

    def weighted(self, A, weight=None) -> np.ndarray:
        """PAP⁻¹ (ou a própria A sem peso)"""
        M = as_square(A)
        if weight is None:
            return M
        P = as_square(weight, "P")
        if P.shape != M.shape:
            raise DimensionError(f"peso {P.shape} incompatível com A {M.shape}")
        return P @ M @ self.invert(P)

    def induced_norm(self, A, base: str = TWO_NORM, weight=None) -> float:
        """
        Norma de matriz induzida pela norma vetorial escolhida

        Args:
            A: matriz
            base (str): one-norm | two-norm | inf-norm
            weight: matriz P opcional (norma vetorial |Px|)

        Returns:
            float: ‖A‖ (ou ‖PAP⁻¹‖)
        """
        if base not in NORM_BASES:
            raise ValueError(f"norma desconhecida '{base}'")
        M = self.weighted(A, weight) if weight is not None else as_matrix(A)
        if base == ONE_NORM:
            return float(np.max(np.sum(np.abs(M), axis=0)))
        if base == INF_NORM:
            return float(np.max(np.sum(np.abs(M), axis=1)))
        return self.sigma_max(M)

    def vector_norm(self, x: Sequence[float], base: str = TWO_NORM, weight=None) -> float:
        v = np.asarray(x, dtype=float).ravel()
        if weight is not None:
            P = as_square(weight, "P")
            if P.shape[0] != v.size:
                raise DimensionError(f"peso {P.shape} incompatível com vetor de tamanho {v.size}")
            v = P @ v
        if base == ONE_NORM:
            return float(np.sum(np.abs(v)))
        if base == INF_NORM:
            return float(np.max(np.abs(v))) if v.size else 0.0
        if base == TWO_NORM:
            return float(np.linalg.norm(v))
        raise ValueError(f"norma desconhecida '{base}'")
