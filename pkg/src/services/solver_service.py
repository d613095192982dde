"""
Solver híbrido em escalas temporais
===================================

Integra x^Δ = A(t)x + g(t) e x^Δ = f(t, x) alternando RK4 de passo fixo nos
intervalos densos com o passo exato x(σ(t)) = x(t) + μ(t)·x^Δ(t) em cada
ponto disperso. Também avalia o limite de Coppel, o envelope de contração e
o decremento da candidata de Lyapunov V(x) = |f(x)|.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .erros import BlowUpError, CertificateMissingError, DimensionError, DomainError
from .linalg_service import as_square
from .measure_service import MeasureKind, MeasureService
from .settings_service import Settings, get_settings
from .timescale_service import Grid, TimeScale, TimeScaleService

# Configuração de logging
logger = logging.getLogger(__name__)

FD_STEP = 1e-6


def phi1(z: float) -> float:
    """(e^z − 1)/z com continuidade em 0"""
    if abs(z) < 1e-8:
        return 1.0 + 0.5 * z
    return math.expm1(z) / z


@dataclass(frozen=True)
class LinearSystem:
    """x^Δ = A(t)x + g(t), com ḡ ≥ |g(t)| opcional"""

    A_of_t: Callable[[float], Any]
    g_of_t: Optional[Callable[[float], Any]] = None
    g_bar: Optional[float] = None
    name: str = "linear"
    is_constant: bool = False

    @classmethod
    def constant(cls, A, g=None, name: str = "linear") -> "LinearSystem":
        M = as_square(A)
        if g is None:
            return cls(lambda t: M, None, 0.0, name, is_constant=True)
        v = np.asarray(g, dtype=float).ravel()
        if v.size != M.shape[0]:
            raise DimensionError(f"g de tamanho {v.size} incompatível com A {M.shape}")
        return cls(lambda t: M, lambda t: v, float(np.linalg.norm(v, ord=np.inf)), name, is_constant=True)

    def matrix(self, t: float) -> np.ndarray:
        return as_square(self.A_of_t(t))

    def forcing(self, t: float, n: int) -> np.ndarray:
        if self.g_of_t is None:
            return np.zeros(n)
        g = np.asarray(self.g_of_t(t), dtype=float).ravel()
        if g.size != n:
            raise DimensionError(f"g(t) de tamanho {g.size} para sistema de ordem {n}")
        return g

    def rhs(self, t: float, x: np.ndarray) -> np.ndarray:
        A = self.matrix(t)
        return A @ x + self.forcing(t, A.shape[0])

    def jump(self, t: float, mu: float, x: np.ndarray) -> np.ndarray:
        A = self.matrix(t)
        n = A.shape[0]
        return (np.eye(n) + mu * A) @ x + mu * self.forcing(t, n)

    def as_vector_field(self) -> "VectorField":
        return VectorField(self.rhs, lambda t, x: self.matrix(t), autonomous=self.is_constant, name=self.name)


@dataclass(frozen=True)
class VectorField:
    """
    Campo x^Δ = f(t, x) com jacobiana analítica ou por diferenças centrais
    """

    f: Callable[[float, np.ndarray], Any]
    jacobian_fn: Optional[Callable[[float, np.ndarray], Any]] = None
    autonomous: bool = False
    name: str = "campo"

    def __call__(self, t: float, x) -> np.ndarray:
        return np.asarray(self.f(t, np.asarray(x, dtype=float)), dtype=float)

    def rhs(self, t: float, x: np.ndarray) -> np.ndarray:
        return self(t, x)

    def jump(self, t: float, mu: float, x: np.ndarray) -> np.ndarray:
        return x + mu * self(t, x)

    def jacobian(self, t: float, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.jacobian_fn is not None:
            return np.atleast_2d(np.asarray(self.jacobian_fn(t, x), dtype=float))
        return finite_difference_jacobian(self, t, x)


def finite_difference_jacobian(vf: Callable, t: float, x: np.ndarray, step: float = FD_STEP) -> np.ndarray:
    """Jacobiana por diferenças centrais com passo relativo"""
    x = np.asarray(x, dtype=float)
    n = x.size
    colunas = []
    for j in range(n):
        h = step * max(1.0, abs(x[j]))
        e = np.zeros(n)
        e[j] = h
        colunas.append((np.asarray(vf(t, x + e), dtype=float) - np.asarray(vf(t, x - e), dtype=float)) / (2.0 * h))
    return np.column_stack(colunas)


@dataclass(frozen=True)
class Trajectory:
    samples: Tuple[Tuple[float, np.ndarray, float], ...]
    meta: Dict[str, Any] = field(default_factory=dict)

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _, _ in self.samples])

    @property
    def states(self) -> np.ndarray:
        return np.array([x for _, x, _ in self.samples])

    @property
    def mus(self) -> np.ndarray:
        return np.array([m for _, _, m in self.samples])

    @property
    def final(self) -> np.ndarray:
        return self.samples[-1][1]

    def __len__(self):
        return len(self.samples)


@dataclass(frozen=True)
class CoppelBound:
    """Lado direito do limite de Coppel ao longo de uma grade"""

    times: Tuple[float, ...]
    bound: Tuple[float, ...]
    e_m: Tuple[float, ...]
    chi: Tuple[float, ...]

    def __iter__(self):
        return iter(zip(self.times, self.bound))

    def __len__(self):
        return len(self.times)


class SolverService:
    """
    Integração de dinâmicas lineares e não lineares em escalas temporais

    RESPONSABILIDADES:
    =================
    - Passo exato em pontos dispersos
    - RK4 de passo fixo nos intervalos densos
    - Operador de transição Φ_A(t, t0)
    - Limite de Coppel |x0|e_m(t,t0) + χ(t,t0) e a versão monotônica
    - Distância entre pares de trajetórias contra o envelope de contração
    - Decremento D⁺V^Δ de V(x) = |f(x)|
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        self.timescales = TimeScaleService(self.settings)
        self.measures = MeasureService(self.settings)
        self.blowup_threshold = self.settings.blowup_threshold

    # ------------------------------------------------------------------
    # Núcleo de integração
    # ------------------------------------------------------------------

    def step_scattered(self, sys, t: float, mu: float, x) -> np.ndarray:
        """
        Passo exato de t para σ(t) = t + μ

        Linear: (I+μA(t))x + μg(t); não linear: x + μf(t, x).
        """
        if not mu > 0:
            raise DomainError(f"passo disperso exige mu > 0 (mu={mu})")
        return sys.jump(t, mu, np.asarray(x, dtype=float))

    @staticmethod
    def _rk4(rhs: Callable, t: float, x: np.ndarray, h: float) -> np.ndarray:
        k1 = rhs(t, x)
        k2 = rhs(t + 0.5 * h, x + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, x + 0.5 * h * k2)
        k4 = rhs(t + h, x + h * k3)
        return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def _check_finite(self, t: float, x: np.ndarray):
        if not np.all(np.isfinite(x)):
            raise BlowUpError(t, "estado não finito")
        if np.max(np.abs(x)) > self.blowup_threshold:
            raise BlowUpError(t, f"|x| > {self.blowup_threshold:g}")

    def _propagate(self, ts: TimeScale, rhs: Callable, jump: Callable, t0: float, x0: np.ndarray,
                   t_end: float, dense_step: float) -> List[Tuple[float, np.ndarray, float]]:
        _, t0 = self.timescales.require(ts, t0)
        _, t_end = self.timescales.require(ts, t_end)
        if t0 > t_end:
            raise DomainError(f"t0={t0} posterior a t_end={t_end}")
        x = np.array(x0, dtype=float)
        self._check_finite(t0, x)
        amostras: List[Tuple[float, np.ndarray, float]] = []
        k0 = ts.locate(t0)
        ultimo = len(ts.segments) - 1
        t = t0
        for k in range(k0, ultimo + 1):
            l, r = ts.segments[k]
            fim = min(r, t_end)
            if fim > t:
                n = max(1, math.ceil((fim - t) / dense_step - 1e-12))
                nos = np.linspace(t, fim, n + 1)
                for i in range(n):
                    amostras.append((float(nos[i]), x.copy(), 0.0))
                    x = self._rk4(rhs, float(nos[i]), x, float(nos[i + 1] - nos[i]))
                    self._check_finite(float(nos[i + 1]), x)
                t = fim
            if t >= t_end or k == ultimo:
                break
            # t = r_k, ponto disperso
            mu = ts.segments[k + 1][0] - r
            amostras.append((t, x.copy(), mu))
            x = jump(t, mu, x)
            t = ts.segments[k + 1][0]
            self._check_finite(t, x)
        amostras.append((t, x.copy(), self.timescales.mu(ts, t).mu))
        return amostras

    def integrate(self, ts: TimeScale, sys, t0: float, x0, t_end: float,
                  dense_step: Optional[float] = None) -> Trajectory:
        """
        Integra o sistema de t0 a t_end sobre a escala

        Args:
            ts (TimeScale): escala temporal
            sys (LinearSystem | VectorField): dinâmica
            t0, t_end (float): instantes em T
            x0: estado inicial
            dense_step (float): passo máximo do RK4

        Returns:
            Trajectory: amostras (t, x, μ) e metadados do solver

        Raises:
            BlowUpError: estado não finito ou acima do limiar
        """
        h = dense_step or self.settings.dense_step
        x0 = np.asarray(x0, dtype=float).ravel()
        try:
            amostras = self._propagate(ts, sys.rhs, sys.jump, t0, x0, t_end, h)
        except BlowUpError as e:
            logger.error(f"❌ Explosão numérica em t={e.time:.6g} ({getattr(sys, 'name', 'sistema')})")
            raise
        logger.debug(f"Integração concluída: {len(amostras)} amostras em [{t0}, {t_end}]")
        meta = {
            "solver": "rk4+exact-jump",
            "dense_step": h,
            "t0": float(t0),
            "t_end": float(t_end),
            "blowup_threshold": self.blowup_threshold,
            "system": getattr(sys, "name", "sistema"),
        }
        return Trajectory(tuple(amostras), meta)

    def transition_path(self, ts: TimeScale, A_of_t: Callable, t0: float, t: float,
                        dense_step: Optional[float] = None) -> List[Tuple[float, np.ndarray]]:
        """Φ_A(τ, t0) em todos os instantes visitados pelo integrador"""
        h = dense_step or self.settings.dense_step
        n = as_square(A_of_t(t0)).shape[0]
        rhs = lambda tau, Y: as_square(A_of_t(tau)) @ Y
        jump = lambda tau, mu, Y: (np.eye(n) + mu * as_square(A_of_t(tau))) @ Y
        amostras = self._propagate(ts, rhs, jump, t0, np.eye(n), t, h)
        return [(tau, Y) for tau, Y, _ in amostras]

    def transition_operator(self, ts: TimeScale, A_of_t: Callable, t0: float, t: float,
                            dense_step: Optional[float] = None) -> np.ndarray:
        """Φ_A(t, t0), solução de Y^Δ = A(t)Y com Y(t0) = I"""
        return self.transition_path(ts, A_of_t, t0, t, dense_step)[-1][1]

    # ------------------------------------------------------------------
    # Limite de Coppel
    # ------------------------------------------------------------------

    def _merged_times(self, ts: TimeScale, grid: Grid, t0: float) -> List[float]:
        fina = self.timescales.make_grid(ts, t0, grid.times[-1], min(grid.dense_step, self.settings.dense_step))
        return sorted(set(fina.times) | set(grid.times))

    def coppel_bound(self, ts: TimeScale, A_of_t: Callable, kind: MeasureKind, g_bar: float, t0: float,
                     x0_norm: float, grid: Grid, method: str = "recursive") -> CoppelBound:
        """
        |x0|·e_m(t,t0) + ḡ·∫ e_m(t,σ(τ))Δτ com m(τ) = m(A(τ), μ(τ))

        method="recursive" percorre uma grade fina com
        e ← (1+μm)e, χ ← (1+μm)χ + μḡ nos saltos e o integrador exponencial
        nos trechos densos. method="direct" avalia e_m e χ pelas primitivas
        ts_exponential/delta_integral em cada instante (custo quadrático).
        """
        if grid.times[0] != t0 and abs(grid.times[0] - t0) > 1e-9:
            raise DomainError(f"grade deve começar em t0={t0}")
        if g_bar < 0 or x0_norm < 0:
            raise DomainError("g_bar e |x0| devem ser não negativos")
        if method == "direct":
            return self._coppel_direct(ts, A_of_t, kind, g_bar, t0, x0_norm, grid)
        if method != "recursive":
            raise ValueError(f"método desconhecido '{method}'")

        pedidos = set(grid.times)
        tempos = self._merged_times(ts, grid, t0)
        m_dense = lambda tau: self.measures.matrix_measure(A_of_t(tau), 0.0, kind)
        e, chi = 1.0, 0.0
        saida_t, saida_e, saida_chi = [], [], []
        for i, t in enumerate(tempos):
            if t in pedidos:
                saida_t.append(t)
                saida_e.append(e)
                saida_chi.append(chi)
            if i == len(tempos) - 1:
                break
            proximo = tempos[i + 1]
            grao = self.timescales.mu(ts, t)
            if grao.scattered:
                fator = 1.0 + grao.mu * self.measures.matrix_measure(A_of_t(t), grao.mu, kind)
                e *= fator
                chi = fator * chi + grao.mu * g_bar
            else:
                h = proximo - t
                integral = h / 6.0 * (m_dense(t) + 4.0 * m_dense(t + 0.5 * h) + m_dense(proximo))
                e *= math.exp(integral)
                chi = math.exp(integral) * chi + g_bar * h * phi1(integral)
        limite = tuple(x0_norm * ev + cv for ev, cv in zip(saida_e, saida_chi))
        return CoppelBound(tuple(saida_t), limite, tuple(saida_e), tuple(saida_chi))

    def _coppel_direct(self, ts, A_of_t, kind, g_bar, t0, x0_norm, grid) -> CoppelBound:
        def p(tau):
            return self.measures.matrix_measure(A_of_t(tau), self.timescales.mu(ts, tau).mu, kind)

        def p_dense(tau):
            return self.measures.matrix_measure(A_of_t(tau), 0.0, kind)

        step = grid.dense_step
        es, chis = [], []
        for t in grid.times:
            e = self.timescales.ts_exponential(ts, p, t, t0, step, dense_f=p_dense)
            if g_bar > 0:
                integrando = lambda tau: self.timescales.ts_exponential(
                    ts, p, t, self.timescales.sigma(ts, tau), step, dense_f=p_dense)
                denso = lambda tau: self.timescales.ts_exponential(ts, p, t, tau, step, dense_f=p_dense)
                chi = g_bar * self.timescales.delta_integral(ts, integrando, t0, t, step, dense_f=denso)
            else:
                chi = 0.0
            es.append(e)
            chis.append(chi)
        limite = tuple(x0_norm * e + c for e, c in zip(es, chis))
        return CoppelBound(tuple(grid.times), limite, tuple(es), tuple(chis))

    def monotone_bound(self, ts: TimeScale, A_of_t: Callable, kind: MeasureKind, g_bar: float, t0: float,
                       x0_norm: float, grid: Grid, c_d: float, c_s: float) -> List[Tuple[float, float]]:
        """
        χ(t,t0) + |x0|·exp(c_d λ_d(t) + c_s λ_s(t)), válido com c_d, c_s < 0

        c_d e c_s são limitantes da medida nos pontos densos e dispersos
        (ver check_dense_scattered).
        """
        if not (c_d < 0 and c_s < 0):
            raise DomainError(f"limite monotônico exige c_d, c_s < 0 (c_d={c_d}, c_s={c_s})")
        coppel = self.coppel_bound(ts, A_of_t, kind, g_bar, t0, 0.0, grid)
        saida = []
        for t, chi in zip(coppel.times, coppel.chi):
            lam_d, lam_s = self.timescales.measure_split(ts, t0, t)
            saida.append((t, chi + x0_norm * math.exp(c_d * lam_d + c_s * lam_s)))
        return saida

    # ------------------------------------------------------------------
    # Pares de soluções
    # ------------------------------------------------------------------

    def envelope(self, traj: Trajectory, rate: float) -> List[float]:
        """e_{−rate}(t, t0) ao longo das amostras de uma trajetória"""
        valores = [1.0]
        for (t, _, mu), (t_prox, _, _) in zip(traj.samples[:-1], traj.samples[1:]):
            if mu > 0:
                valores.append(valores[-1] * (1.0 - mu * rate))
            else:
                valores.append(valores[-1] * math.exp(-rate * (t_prox - t)))
        return valores

    def pair_distance(self, ts: TimeScale, vf: VectorField, t0: float, x0, y0, t_end: float,
                      kind: MeasureKind, dense_step: Optional[float] = None,
                      certificate=None) -> List[Tuple[float, float, float]]:
        """
        |x(t) − y(t)| contra |x0 − y0|·e_{−c̄²}(t, t0)

        Raises:
            CertificateMissingError: sem certificado de contração válido
        """
        if certificate is None or getattr(certificate, "verdict", None) != "holds" \
                or "c_bar_sq" not in getattr(certificate, "constants", {}):
            raise CertificateMissingError("pair_distance exige um certificado de contração com veredito 'holds'")
        c2 = float(certificate.constants["c_bar_sq"])
        tx = self.integrate(ts, vf, t0, x0, t_end, dense_step)
        ty = self.integrate(ts, vf, t0, y0, t_end, dense_step)
        d0 = self.measures.vector_norm(np.asarray(x0, float) - np.asarray(y0, float), kind)
        env = self.envelope(tx, c2)
        return [
            (t, self.measures.vector_norm(x - y, kind), d0 * e)
            for (t, x, _), (_, y, _), e in zip(tx.samples, ty.samples, env)
        ]

    def linear_pair_bound(self, ts: TimeScale, sys: LinearSystem, kind: MeasureKind, t0: float, x0, x1,
                          t_end: float, dense_step: Optional[float] = None) -> List[Tuple[float, float, float]]:
        """|x(t,x0) − x(t,x1)| contra |x0 − x1|·e_m(t, t0) para sistemas lineares forçados"""
        tx = self.integrate(ts, sys, t0, x0, t_end, dense_step)
        ty = self.integrate(ts, sys, t0, x1, t_end, dense_step)
        d0 = self.measures.vector_norm(np.asarray(x0, float) - np.asarray(x1, float), kind)
        grid = Grid(tuple(float(t) for t in tx.times), dense_step or self.settings.dense_step)
        coppel = self.coppel_bound(ts, sys.A_of_t, kind, 0.0, t0, d0, grid)
        return [
            (t, self.measures.vector_norm(x - y, kind), b)
            for (t, x, _), (_, y, _), b in zip(tx.samples, ty.samples, coppel.bound)
        ]

    # ------------------------------------------------------------------
    # Lyapunov
    # ------------------------------------------------------------------

    def lyapunov_decrement(self, vf: VectorField, x, mu: float, kind: MeasureKind = MeasureKind(),
                           h_probe: Optional[float] = None) -> Tuple[float, float]:
        """
        V(x) = |f(x)| e D⁺V^Δ = (V(x + μf(x)) − V(x))/μ

        Em μ = 0 usa diferença progressiva com h_probe.
        """
        x = np.asarray(x, dtype=float)
        fx = vf(0.0, x)
        V = self.measures.vector_norm(fx, kind)
        h = mu if mu > 0 else (h_probe or self.settings.h_probe)
        V_next = self.measures.vector_norm(vf(0.0, x + h * fx), kind)
        return V, (V_next - V) / h
