import math
import logging
import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .erros import DimensionError, DomainError, EmptyBoxError, InvalidSpecError
from .linalg_service import LinalgService, TWO_NORM, as_square
from .measure_service import MeasureKind, MeasureService
from .model_service import NetworkSpec, SIQRParams, check_siqr_assumptions
from .settings_service import Settings, get_settings
from .solver_service import SolverService, VectorField
from .timescale_service import Grid, TimeScale, TimeScaleService

# Configuração de logging
logger = logging.getLogger(__name__)

HOLDS = "holds"
FAILS = "fails"
INCONCLUSIVE = "inconclusive"

TWO = MeasureKind(TWO_NORM)


@dataclass
class CertificateReport:
    """
    Resultado auditável de uma verificação

    verdict ∈ {holds, fails, inconclusive}; constants guarda as constantes
    encontradas (c_d, c_s, c_bar_sq, c_f, mu_bar, epsilon, K); witness é o
    ponto onde a condição é mais apertada ou violada.
    """

    name: str
    verdict: str
    constants: Dict[str, float]
    witness: Dict[str, Any]
    samples_used: int
    evidence: str = "sampled"
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def to_dict(self) -> Dict[str, Any]:
        return {
            "certificate": self.name,
            "verdict": self.verdict,
            "constants": dict(self.constants),
            "witness": dict(self.witness),
            "samples_used": self.samples_used,
            "evidence": self.evidence,
            "details": dict(self.details),
        }


@dataclass(frozen=True)
class StateBox:
    """
    Caixa de estados amostrada por grade (counts por eixo) ou por sorteio
    uniforme com semente (n_samples)
    """

    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    counts: Optional[Tuple[int, ...]] = None
    n_samples: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lower) == 0 or len(lower) != len(upper):
            raise EmptyBoxError("limites inferior e superior com tamanhos diferentes ou vazios")
        if not all(math.isfinite(v) for v in lower + upper):
            raise EmptyBoxError("limites não finitos")
        if any(lo > hi for lo, hi in zip(lower, upper)):
            raise EmptyBoxError("caixa vazia (lower > upper)")
        if (self.counts is None) == (self.n_samples is None):
            raise EmptyBoxError("informe exatamente um modo de amostragem: counts ou n_samples")
        if self.counts is not None:
            counts = tuple(int(c) for c in np.broadcast_to(np.atleast_1d(self.counts), (len(lower),)))
            if any(c < 1 for c in counts):
                raise EmptyBoxError("contagem por eixo deve ser ≥ 1")
            object.__setattr__(self, "counts", counts)
        elif int(self.n_samples) < 1:
            raise EmptyBoxError("n_samples deve ser ≥ 1")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dim(self) -> int:
        return len(self.lower)

    def samples(self) -> np.ndarray:
        if self.counts is not None:
            eixos = [
                np.linspace(lo, hi, c) if c > 1 else np.array([0.5 * (lo + hi)])
                for lo, hi, c in zip(self.lower, self.upper, self.counts)
            ]
            return np.array(list(itertools.product(*eixos)), dtype=float)
        return self.fresh_samples(int(self.n_samples), self.seed)

    def fresh_samples(self, n: int, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        return rng.uniform(np.array(self.lower), np.array(self.upper), size=(n, self.dim))

    def contains(self, x, tol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= np.array(self.lower) - tol) and np.all(x <= np.array(self.upper) + tol))

    def to_dict(self) -> Dict[str, Any]:
        documento: Dict[str, Any] = {"lower": list(self.lower), "upper": list(self.upper)}
        if self.counts is not None:
            documento["counts"] = list(self.counts)
        else:
            documento["n_samples"] = int(self.n_samples)
            documento["seed"] = self.seed
        return documento

    @classmethod
    def from_dict(cls, documento: Dict[str, Any], seed: Optional[int] = None) -> "StateBox":
        for campo in ("lower", "upper"):
            if campo not in documento:
                raise InvalidSpecError("campo obrigatório da caixa", field=f"box.{campo}")
        try:
            return cls(
                tuple(documento["lower"]),
                tuple(documento["upper"]),
                counts=documento.get("counts"),
                n_samples=documento.get("n_samples"),
                seed=int(seed if seed is not None else documento.get("seed", 0)),
            )
        except (TypeError, ValueError) as e:
            raise InvalidSpecError(f"caixa inválida: {e}", field="box")


class CertificateService:
    """
    Avaliação das condições suficientes de estabilidade, contração e pinning

    RESPONSABILIDADES:
    =================
    - Estabilidade exponencial uniforme (faixa (−2/μ̄ + ε, −ε))
    - Decomposição densa/dispersa com constantes c_d e c_s
    - Contração por amostragem da jacobiana numa caixa
    - Condições (C1)/(C2) do SIQR nas duas convenções de x̄ e R₀
    - Pinning por espectro completo de L̃, atalho contínuo e μ_max admissível
    - Limite do modelo de opiniões e verificação de Lyapunov

    Toda desigualdade "para todo x" é certificada por amostragem; os
    relatórios trazem o número de amostras e evidence = "sampled".
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        self.slack = self.settings.cert_slack
        self.linalg = LinalgService(self.settings)
        self.measures = MeasureService(self.settings)
        self.timescales = TimeScaleService(self.settings)
        self.solver = SolverService(self.settings)

    def _sample_points(self, ts: TimeScale, grid: Grid) -> List[Tuple[float, float]]:
        """(t, μ(t)) da grade, sem o ponto isolado final cuja graininess a janela trunca"""
        pontos = []
        ultimo_isolado = len(ts.segments) > 1 and ts.segments[-1][0] == ts.segments[-1][1]
        for t in grid:
            if ultimo_isolado and t == ts.end:
                continue
            pontos.append((t, self.timescales.mu(ts, t).mu))
        return pontos

    @staticmethod
    def critical_mus(ts: TimeScale) -> List[float]:
        """
        {0 se há parte densa} ∪ {μ̄}

        m(A, μ) é não decrescente em μ, então o supremo sobre os μ da
        janela é atingido em μ̄; o 0 entra só para identificar a testemunha.
        """
        mus = []
        if any(r > l for l, r in ts.segments):
            mus.append(0.0)
        if ts.mu_bar() > 0:
            mus.append(ts.mu_bar())
        return mus

    def _log(self, report: CertificateReport) -> CertificateReport:
        icone = {HOLDS: "✅", FAILS: "❌", INCONCLUSIVE: "⚠️"}[report.verdict]
        logger.info(f"{icone} {report.name}: {report.verdict} {report.constants}")
        return report

    # ------------------------------------------------------------------
    # Sistemas lineares
    # ------------------------------------------------------------------

    def check_uniform_exp_stability(self, ts: TimeScale, A_of_t: Callable, kind: MeasureKind,
                                    grid: Grid) -> CertificateReport:
        """
        Maior ε com m(A(t), μ(t)) ∈ (−2/μ̄ + ε, −ε) em todas as amostras

        Em escalas sem saltos (μ̄ = 0) o limite inferior é −∞.
        """
        mu_bar = ts.mu_bar()
        pontos = self._sample_points(ts, grid)
        if not pontos:
            raise EmptyBoxError("grade sem amostras")
        epsilon = math.inf
        witness: Dict[str, Any] = {}
        for t, mu in pontos:
            valor = self.measures.matrix_measure(A_of_t(t), mu, kind)
            superior = -valor
            inferior = valor + 2.0 / mu_bar if mu_bar > 0 else math.inf
            folga, lado = (superior, "upper") if superior <= inferior else (inferior, "lower")
            if folga < epsilon:
                epsilon = folga
                witness = {"t": t, "mu": mu, "value": valor, "side": lado}
        verdict = HOLDS if epsilon >= self.slack else FAILS
        return self._log(CertificateReport(
            "uniform_exp_stability", verdict, {"epsilon": epsilon, "mu_bar": mu_bar}, witness, len(pontos),
        ))

    def check_dense_scattered(self, ts: TimeScale, A_of_t: Callable, kind: MeasureKind, t0: float,
                              horizon: float, grid: Grid) -> CertificateReport:
        """
        c_d = sup m nos pontos densos, c_s = sup m nos dispersos e a
        tendência de c_d·λ_d(t) + c_s·λ_s(t) ao longo da grade
        """
        pontos = [(t, mu) for t, mu in self._sample_points(ts, grid) if t0 <= t <= horizon]
        if len(pontos) < 2:
            raise EmptyBoxError("grade com menos de duas amostras em [t0, horizon]")
        densos, dispersos = [], []
        for t, mu in pontos:
            valor = self.measures.matrix_measure(A_of_t(t), mu, kind)
            (dispersos if mu > 0 else densos).append((valor, t, mu))
        constants: Dict[str, float] = {}
        c_d = max(densos)[0] if densos else 0.0
        c_s = max(dispersos)[0] if dispersos else 0.0
        if densos:
            constants["c_d"] = c_d
        if dispersos:
            constants["c_s"] = c_s
        tempos = np.array([t for t, _ in pontos])
        expoente = []
        for t in tempos:
            lam_d, lam_s = self.timescales.measure_split(ts, t0, float(t))
            expoente.append(c_d * lam_d + c_s * lam_s)
        expoente = np.array(expoente)
        inclinacao = float(np.polyfit(tempos, expoente, 1)[0])
        constants["slope"] = inclinacao
        constants["rate"] = float(expoente[-1] / (tempos[-1] - tempos[0])) if tempos[-1] > tempos[0] else 0.0
        verdict = HOLDS if inclinacao < -self.slack and expoente[-1] < 0 else FAILS
        pior = max(densos + dispersos)
        witness = {"t": pior[1], "mu": pior[2], "value": pior[0], "exponent_end": float(expoente[-1])}
        return self._log(CertificateReport("dense_scattered", verdict, constants, witness, len(pontos)))

    # ------------------------------------------------------------------
    # Contração
    # ------------------------------------------------------------------

    def jacobian_times(self, vf: VectorField, times: Optional[Sequence[float]] = None,
                       ts: Optional[TimeScale] = None) -> Tuple[float, ...]:
        """
        Instantes em que a jacobiana é amostrada

        Campo autônomo: um único instante. Caso contrário, os instantes
        dados ou a grade da janela (passo ≥ 0.05, bordas e pontos dispersos
        sempre incluídos).

        Raises:
            InvalidSpecError: campo dependente do tempo sem instantes nem escala
        """
        if times is not None:
            tempos = tuple(float(t) for t in times)
        elif vf.autonomous:
            tempos = (ts.start if ts is not None else 0.0,)
        elif ts is not None:
            tempos = self.timescales.make_grid(ts, dense_step=max(0.05, self.timescales.dense_step)).times
        else:
            raise InvalidSpecError("campo dependente do tempo exige os instantes ou a escala", field="times")
        if not tempos:
            raise EmptyBoxError("nenhum instante para amostrar a jacobiana")
        return tempos

    def check_contraction(self, ts_mu_range: Iterable[float], vf: VectorField, box: StateBox,
                          kind: MeasureKind, times: Optional[Sequence[float]] = None,
                          ts: Optional[TimeScale] = None) -> CertificateReport:
        """
        c̄² = −sup m(f_x(t, ξ), μ) sobre as amostras da caixa, os instantes e os μ dados

        Args:
            ts_mu_range: {0} ∪ valores de μ da janela
            vf (VectorField): campo com jacobiana
            box (StateBox): caixa de estados
            kind (MeasureKind): norma da medida
            times: instantes em que a jacobiana é avaliada
            ts (TimeScale): escala da janela, usada quando times não é dado

        Returns:
            CertificateReport: holds se c̄² ≥ slack
        """
        mus = sorted(set(float(m) for m in ts_mu_range))
        if not mus:
            raise EmptyBoxError("conjunto de graininess vazio")
        times = self.jacobian_times(vf, times, ts)
        amostras = box.samples()
        if amostras.shape[1] != box.dim:
            raise DimensionError("amostras com dimensão incompatível")
        sup = -math.inf
        witness: Dict[str, Any] = {}
        contagem = 0
        for xi in amostras:
            for t in times:
                J = vf.jacobian(t, xi)
                if J.shape != (box.dim, box.dim):
                    raise DimensionError(f"jacobiana {J.shape} para caixa de dimensão {box.dim}")
                for mu in mus:
                    valor = self.measures.matrix_measure(J, mu, kind)
                    contagem += 1
                    if valor > sup:
                        sup = valor
                        witness = {"x": xi.tolist(), "t": t, "mu": mu, "value": valor}
        c2 = -sup
        verdict = HOLDS if c2 >= self.slack else FAILS
        logger.debug(f"Contração: {contagem} avaliações em {len(amostras)} estados e {len(times)} instantes")
        return self._log(CertificateReport(
            "contraction", verdict, {"c_bar_sq": c2, "mu_bar": max(mus)}, witness, contagem,
            details={"mu_values": mus, "times": list(times), "box": box.to_dict(), "kind": kind.to_dict()},
        ))

    def revalidate_contraction(self, report: CertificateReport, vf: VectorField, box: StateBox,
                               kind: MeasureKind, n: int = 20, seed: int = 1,
                               times: Optional[Sequence[float]] = None) -> float:
        """
        Maior excesso m(f_x(t, ξ), μ) − (−c̄²) em n amostras novas da caixa

        Por padrão usa os instantes gravados no relatório. Um valor ≤ 1e-9
        confirma a estabilidade da amostragem.
        """
        c2 = report.constants["c_bar_sq"]
        mus = report.details.get("mu_values", [0.0])
        if times is None:
            times = report.details.get("times", (0.0,))
        pior = -math.inf
        for xi in box.fresh_samples(n, seed):
            for t in times:
                J = vf.jacobian(t, xi)
                for mu in mus:
                    pior = max(pior, self.measures.matrix_measure(J, mu, kind) + c2)
        return pior

    # ------------------------------------------------------------------
    # SIQR
    # ------------------------------------------------------------------

    def check_siqr_conditions(self, params: SIQRParams, ts: TimeScale, t0: float, C0: float,
                              times: Optional[Sequence[float]] = None) -> CertificateReport:
        """
        (C1) μ(t) < 2/(d + 2βx̄) e (C2) 2βx̄ < d + α₁ + γ nas duas convenções

        x̄ = C0 + Λ̄ (limite a partir da população inicial) e x̄ = Λ̄/d_min
        (limite assintótico). O veredito geral é holds só se ambas valem,
        fails se nenhuma vale e inconclusive se discordam.

        Raises:
            AssumptionViolationError: hipótese de trabalho violada
        """
        if times is None:
            times = self.timescales.make_grid(ts, t0, dense_step=max(0.05, self.timescales.dense_step)).times
        check_siqr_assumptions(params, ts, times, self.timescales)
        lam_bar = params.bound("Lambda", times, max)
        d_min = params.bound("d", times, min)
        convencoes = {"initial_bound": C0 + lam_bar, "asymptotic_bound": lam_bar / d_min}
        mus = [self.timescales.mu(ts, t).mu for t in times]

        detalhes: Dict[str, Any] = {}
        witness: Dict[str, Any] = {}
        aprovadas = []
        for nome, xbar in convencoes.items():
            limiares, margens_c1, margens_c2 = [], [], []
            for t, mu in zip(times, mus):
                c = params.at(t)
                limiar = 2.0 / (c["d"] + 2.0 * c["beta"] * xbar)
                limiares.append(limiar)
                margens_c1.append((limiar - mu, t))
                margens_c2.append((c["d"] + c["alpha1"] + c["gamma"] - 2.0 * c["beta"] * xbar, t))
            m1, t1 = min(margens_c1)
            m2, t2 = min(margens_c2)
            c1_ok, c2_ok = m1 >= self.slack, m2 >= self.slack
            detalhes[nome] = {
                "xbar": xbar,
                "C1": HOLDS if c1_ok else FAILS,
                "C1_threshold": min(limiares),
                "C1_margin": m1,
                "C2": HOLDS if c2_ok else FAILS,
                "C2_margin": m2,
            }
            aprovadas.append(c1_ok and c2_ok)
            if not witness and not (c1_ok and c2_ok):
                condicao, t_pior, margem = ("C1", t1, m1) if not c1_ok else ("C2", t2, m2)
                witness = {"convention": nome, "condition": condicao, "t": t_pior, "value": margem}

        if all(aprovadas):
            verdict = HOLDS
        elif not any(aprovadas):
            verdict = FAILS
        else:
            verdict = INCONCLUSIVE
        constants = {"mu_bar": max(mus), "Lambda_bar": lam_bar, "d_min": d_min}
        return self._log(CertificateReport(
            "siqr_conditions", verdict, constants, witness, len(times), evidence="exact",
            details={"conventions": detalhes},
        ))

    def reproduction_number(self, params: SIQRParams, N: float,
                            times: Optional[Sequence[float]] = None) -> Tuple[float, bool]:
        """
        R₀ = β(N + Λ̄)/(γ + ζ + d + α₁), no pior instante quando variável

        Returns:
            Tuple[float, bool]: (R₀, R₀ < 0.5)
        """
        times = list(times) if times is not None else [0.0]
        lam_bar = params.bound("Lambda", times, max)
        r0 = -math.inf
        for t in times:
            c = params.at(t)
            denominador = c["gamma"] + c["zeta"] + c["d"] + c["alpha1"]
            if denominador <= 0:
                raise DomainError(f"denominador de R₀ nulo em t={t}")
            r0 = max(r0, c["beta"] * (N + lam_bar) / denominador)
        return r0, r0 < 0.5

    # ------------------------------------------------------------------
    # Pinning
    # ------------------------------------------------------------------

    def _node_cf(self, vf: VectorField, box: StateBox, mu_values: Sequence[float],
                 n: int) -> Tuple[float, Dict[str, Any], int]:
        if not vf.autonomous:
            raise DomainError("dinâmica do nó deve ser autônoma")
        c_f = -math.inf
        witness: Dict[str, Any] = {}
        contagem = 0
        for xi in box.samples():
            J = vf.jacobian(0.0, xi)
            if J.shape != (n, n):
                raise DimensionError(f"jacobiana do nó {J.shape} incompatível com Γ {n}×{n}")
            for mu in mu_values:
                valor = self.measures.matrix_measure(J, 2.0 * mu, TWO)
                contagem += 1
                if valor > c_f:
                    c_f = valor
                    witness = {"x": xi.tolist(), "mu": mu, "value": valor}
        return c_f, witness, contagem

    def check_pinning(self, net: NetworkSpec, vf: VectorField, box: StateBox,
                      mu_values: Iterable[float]) -> CertificateReport:
        """
        Condições de sincronização por pinning sobre o espectro completo de L̃

        (1) c_f = sup m₂(f_x(x), 2μ) na caixa;
        (2) c_f + max_{i, μ} m₂(−λ̃_i Γ, 2μ) ≤ −c̄².
        K = 1 (transformação ortogonal).
        """
        mus = sorted(set(float(m) for m in mu_values))
        if not mus:
            raise EmptyBoxError("conjunto de graininess vazio")
        Gamma = net.gamma_matrix
        n = Gamma.shape[0]
        if box.dim != n:
            raise DimensionError(f"caixa de dimensão {box.dim} para nós de dimensão {n}")
        espectro = self.linalg.symmetric_eigenvalues(net.l_tilde())
        c_f, witness_cf, contagem = self._node_cf(vf, box, mus, n)

        pior = -math.inf
        witness: Dict[str, Any] = {}
        for i, lam in enumerate(espectro):
            for mu in mus:
                valor = c_f + self.measures.matrix_measure(-lam * Gamma, 2.0 * mu, TWO)
                contagem += 1
                if valor > pior:
                    pior = valor
                    witness = {"eigen_index": i, "lambda": float(lam), "mu": mu, "value": valor}
        c2 = -pior
        verdict = HOLDS if c2 >= self.slack else FAILS
        detalhes = {
            "spectrum": [float(v) for v in espectro],
            "lambda_min": float(espectro[0]),
            "lambda_max": float(espectro[-1]),
            "mu_values": mus,
            "pinned": sorted(net.pinned),
            "c_f_witness": witness_cf,
        }
        if n == 1:
            detalhes["mu_max_admissible"] = self.admissible_mu_max(espectro, c_f, float(Gamma[0, 0]))
        return self._log(CertificateReport(
            "pinning", verdict, {"c_f": c_f, "c_bar_sq": c2, "K": 1.0, "mu_bar": max(mus)}, witness, contagem,
            details=detalhes,
        ))

    def pinning_shortcut(self, net: NetworkSpec, c_f: float) -> float:
        """
        Atalho em μ = 0: c_f + λ̃_min·m₂(−Γ, 0)

        Para Γ = I vale c_f − λ̃_min; só é válido em tempo contínuo.
        """
        espectro = self.linalg.symmetric_eigenvalues(net.l_tilde())
        return c_f + float(espectro[0]) * self.measures.matrix_measure(-net.gamma_matrix, 0.0, TWO)

    def admissible_mu_max(self, spectrum: Sequence[float], c_f: float, gamma: float = 1.0) -> float:
        """
        Maior μ_max para o qual a condição (2) ainda pode valer com Γ escalar

        Exige γλ̃_min > c_f; então μ_max = 1/(γλ̃_max + c_f). Devolve 0
        quando nenhuma graininess positiva é admissível.
        """
        if gamma <= 0:
            raise DomainError("Γ escalar deve ser positivo")
        lam_min, lam_max = gamma * min(spectrum), gamma * max(spectrum)
        if lam_min <= c_f or lam_max + c_f <= 0:
            return 0.0
        return 1.0 / (lam_max + c_f)

    def check_opinion_bound(self, d: float, S_bar: float, mu_max: float) -> float:
        """max{−d + S̄, −1/μ_max + d}, usado como c_f no modelo de opiniões"""
        if not mu_max > 0:
            raise DomainError(f"mu_max deve ser positivo ({mu_max})")
        return max(-d + S_bar, -1.0 / mu_max + d)

    # ------------------------------------------------------------------
    # Lyapunov
    # ------------------------------------------------------------------

    def check_lyapunov(self, vf: VectorField, box: StateBox, mu_values: Iterable[float],
                       kind: MeasureKind, equilibrium: Optional[Sequence[float]] = None,
                       n_states: int = 100, seed: int = 0) -> CertificateReport:
        """
        Verifica D⁺V^Δ ≤ −c̄²V para V(x) = |f(x)| em estados sorteados

        c̄² vem de check_contraction no mesmo conjunto de μ, acrescido da
        sonda h_probe quando há pontos densos. Com equilíbrio x*, verifica
        também o limite inferior V(x) ≥ c̄²|x − x*|. Violações do limite
        −(c̄²/μ)V nos pontos dispersos são contadas em details.
        """
        if not vf.autonomous:
            raise DomainError("V(x) = |f(x)| exige campo autônomo")
        mus = sorted(set(float(m) for m in mu_values))
        h_probe = self.settings.h_probe
        mus_cert = set(mus) | ({h_probe} if 0.0 in mus else set())
        contracao = self.check_contraction(mus_cert, vf, box, kind)
        if not contracao.holds:
            return self._log(CertificateReport(
                "lyapunov", INCONCLUSIVE, dict(contracao.constants), dict(contracao.witness),
                contracao.samples_used, details={"reason": "contraction certificate fails"},
            ))
        c2 = contracao.constants["c_bar_sq"]
        pior = -math.inf
        witness: Dict[str, Any] = {}
        violacoes_literais = 0
        violacoes_inferiores = 0
        contagem = 0
        for x in box.fresh_samples(n_states, seed):
            for mu in mus:
                V, D = self.solver.lyapunov_decrement(vf, x, mu, kind, h_probe)
                tol = 1e-6 if mu == 0 else self.slack * max(1.0, V)
                excesso = D - (-c2 * V) - tol
                contagem += 1
                if excesso > pior:
                    pior = excesso
                    witness = {"x": x.tolist(), "mu": mu, "V": V, "DplusV": D, "bound": -c2 * V}
                if mu > 0 and D > -(c2 / mu) * V + self.slack * max(1.0, V):
                    violacoes_literais += 1
            if equilibrium is not None:
                V = self.measures.vector_norm(vf(0.0, x), kind)
                distancia = self.measures.vector_norm(x - np.asarray(equilibrium, float), kind)
                if V < c2 * distancia - self.slack * max(1.0, V):
                    violacoes_inferiores += 1
        verdict = HOLDS if pior <= 0 and violacoes_inferiores == 0 else FAILS
        return self._log(CertificateReport(
            "lyapunov", verdict, {"c_bar_sq": c2, "max_excess": pior}, witness, contagem,
            details={
                "mu_values": mus,
                "literal_scattered_bound_violations": violacoes_literais,
                "lower_bound_violations": violacoes_inferiores,
            },
        ))
