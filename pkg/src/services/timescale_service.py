import math
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import simpson

from .erros import DomainError, InvalidSpecError
from .settings_service import Settings, get_settings

# Configuração de logging
logger = logging.getLogger(__name__)

# Tolerância absoluta de pertinência: instantes a menos disso de uma borda
# são identificados com a borda.
MEMBERSHIP_TOL = 1e-9

RIGHT_DENSE = "right-dense"
RIGHT_SCATTERED = "right-scattered"


@dataclass(frozen=True)
class TimeScale:
    """
    Escala temporal finita: união disjunta e ordenada de intervalos fechados

    Intervalos degenerados (l == r) representam pontos isolados. O campo spec
    guarda o gerador que produziu a escala, quando houver, apenas para
    serialização.
    """

    segments: Tuple[Tuple[float, float], ...]
    window_end: float
    spec: Optional[Dict[str, Any]] = field(default=None, compare=False)

    def __post_init__(self):
        segs = tuple((float(l), float(r)) for l, r in self.segments)
        if not segs:
            raise InvalidSpecError("escala temporal sem segmentos", field="segments")
        for k, (l, r) in enumerate(segs):
            if not (math.isfinite(l) and math.isfinite(r)):
                raise InvalidSpecError(f"segmento {k} não finito", field="segments")
            if l > r:
                raise InvalidSpecError(f"segmento {k} com l > r ({l} > {r})", field="segments")
            if k and segs[k - 1][1] >= l:
                raise InvalidSpecError(f"segmentos {k - 1} e {k} se sobrepõem ou não estão ordenados", field="segments")
        if self.window_end < segs[-1][1]:
            raise InvalidSpecError("window_end anterior ao último segmento", field="window_end")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "window_end", float(self.window_end))
        object.__setattr__(self, "_lefts", np.array([l for l, _ in segs]))

    @property
    def start(self) -> float:
        return self.segments[0][0]

    @property
    def end(self) -> float:
        return self.segments[-1][1]

    def __contains__(self, t: float) -> bool:
        return self.locate(t) is not None

    def locate(self, t: float) -> Optional[int]:
        """Índice do segmento que contém t (com tolerância), ou None"""
        k = int(np.searchsorted(self._lefts, t + MEMBERSHIP_TOL, side="right")) - 1
        if k < 0:
            return None
        l, r = self.segments[k]
        if l - MEMBERSHIP_TOL <= t <= r + MEMBERSHIP_TOL:
            return k
        return None

    def mu_bar(self) -> float:
        """Maior graininess na janela (0 para escalas sem saltos)"""
        gaps = [self.segments[k + 1][0] - self.segments[k][1] for k in range(len(self.segments) - 1)]
        return max(gaps, default=0.0)

    def distinct_mus(self) -> List[float]:
        """Valores distintos de μ presentes na janela, incluindo 0 se houver parte densa"""
        valores = set()
        if any(r > l for l, r in self.segments):
            valores.add(0.0)
        for k in range(len(self.segments) - 1):
            valores.add(self.segments[k + 1][0] - self.segments[k][1])
        return sorted(valores)


@dataclass(frozen=True)
class GrainClass:
    tag: str
    mu: float

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError("mu negativo")
        if (self.tag == RIGHT_DENSE) != (self.mu == 0.0):
            raise ValueError(f"classe inconsistente: {self.tag} com mu={self.mu}")

    @property
    def scattered(self) -> bool:
        return self.tag == RIGHT_SCATTERED


@dataclass(frozen=True)
class Grid:
    times: Tuple[float, ...]
    dense_step: float

    def __len__(self):
        return len(self.times)

    def __iter__(self):
        return iter(self.times)


class TimeScaleService:
    """
    Serviço de cálculo Δ em escalas temporais

    RESPONSABILIDADES:
    =================
    - Salto para frente σ(t) e graininess μ(t)
    - Integral Δ (Simpson nas partes densas + soma nos pontos isolados)
    - Exponencial generalizada e_p(t, s)
    - Decomposição da medida em parte densa e parte dispersa
    - Geradores de escalas (intervalo, hZ, P_ab, alternada, não homogênea,
      discreta aleatória, lista explícita) e serialização JSON
    - Grades de amostragem para o solver e os certificados
    """

    def __init__(self, settings: Optional[Settings] = None, dense_step: Optional[float] = None):
        self.settings = settings or get_settings()
        self.dense_step = dense_step or self.settings.dense_step
        logger.debug(f"TimeScaleService inicializado (dense_step={self.dense_step})")

    # ------------------------------------------------------------------
    # Primitivas pontuais
    # ------------------------------------------------------------------

    def require(self, ts: TimeScale, t: float) -> Tuple[int, float]:
        k = ts.locate(t)
        if k is None:
            raise DomainError(f"t={t!r} não pertence à escala temporal")
        l, r = ts.segments[k]
        # encaixa nas bordas
        if abs(t - l) <= MEMBERSHIP_TOL:
            t = l
        elif abs(t - r) <= MEMBERSHIP_TOL:
            t = r
        return k, t

    def sigma(self, ts: TimeScale, t: float) -> float:
        """
        Salto para frente σ(t) = inf{s ∈ T : s > t}

        No último ponto da janela devolve o próprio t.
        """
        k, t = self.require(ts, t)
        l, r = ts.segments[k]
        if t < r:
            return t
        if k == len(ts.segments) - 1:
            return t
        return ts.segments[k + 1][0]

    def mu(self, ts: TimeScale, t: float) -> GrainClass:
        k, t = self.require(ts, t)
        gap = self.sigma(ts, t) - t
        if gap > 0:
            return GrainClass(RIGHT_SCATTERED, gap)
        return GrainClass(RIGHT_DENSE, 0.0)

    # ------------------------------------------------------------------
    # Decomposição de [a, b)
    # ------------------------------------------------------------------

    def dense_pieces(self, ts: TimeScale, a: float, b: float) -> List[Tuple[float, float]]:
        """Subintervalos densos de T ∩ [a, b) com comprimento positivo"""
        pecas = []
        for l, r in ts.segments:
            lo, hi = max(l, a), min(r, b)
            if hi > lo:
                pecas.append((lo, hi))
        return pecas

    def scattered_points(self, ts: TimeScale, a: float, b: float) -> List[Tuple[float, float]]:
        """Pontos à direita dispersos τ ∈ [a, b) com respectivo μ(τ)"""
        pontos = []
        for k in range(len(ts.segments) - 1):
            r = ts.segments[k][1]
            if a <= r < b:
                pontos.append((r, ts.segments[k + 1][0] - r))
        return pontos

    def _check_range(self, ts: TimeScale, a: float, b: float) -> Tuple[float, float]:
        _, a = self.require(ts, a)
        _, b = self.require(ts, b)
        if a > b:
            raise DomainError(f"intervalo invertido: {a} > {b}")
        return a, b

    def measure_split(self, ts: TimeScale, t0: float, t: float) -> Tuple[float, float]:
        """
        Medida Δ de [t0, t) separada em parte densa e parte dispersa

        Returns:
            Tuple[float, float]: (λ(T_d), λ(T_s))
        """
        t0, t = self._check_range(ts, t0, t)
        denso = sum(hi - lo for lo, hi in self.dense_pieces(ts, t0, t))
        disperso = sum(m for _, m in self.scattered_points(ts, t0, t))
        return denso, disperso

    # ------------------------------------------------------------------
    # Integração
    # ------------------------------------------------------------------

    def simpson_nodes(self, lo: float, hi: float, dense_step: Optional[float] = None) -> np.ndarray:
        """Nós de Simpson composto: número par de subintervalos, cada um ≤ dense_step"""
        h = dense_step or self.dense_step
        n = max(2, 2 * math.ceil((hi - lo) / (2.0 * h)))
        return np.linspace(lo, hi, n + 1)

    def dense_integral(self, f: Callable[[float], float], lo: float, hi: float,
                       dense_step: Optional[float] = None) -> float:
        nos = self.simpson_nodes(lo, hi, dense_step)
        valores = np.array([f(float(s)) for s in nos], dtype=float)
        return float(simpson(valores, x=nos))

    def delta_integral(self, ts: TimeScale, f: Callable[[float], float], a: float, b: float,
                       dense_step: Optional[float] = None,
                       dense_f: Optional[Callable[[float], float]] = None) -> float:
        """
        Integral Δ de f sobre [a, b)

        Args:
            ts (TimeScale): escala temporal
            f (Callable): integrando real
            a, b (float): limites, ambos em T, a ≤ b
            dense_f (Callable, optional): integrando usado na quadratura das
                partes densas quando f salta na borda direita de um intervalo
                (por exemplo f(τ) dependente de μ(τ)); padrão f

        Returns:
            float: quadratura nas partes densas + Σ μ(τ) f(τ) nos pontos dispersos
        """
        a, b = self._check_range(ts, a, b)
        g = dense_f or f
        total = 0.0
        for lo, hi in self.dense_pieces(ts, a, b):
            total += self.dense_integral(g, lo, hi, dense_step)
        for tau, m in self.scattered_points(ts, a, b):
            total += m * f(tau)
        return total

    def ts_exponential(self, ts: TimeScale, p: Callable[[float], float], t: float, s: float,
                       dense_step: Optional[float] = None,
                       dense_f: Optional[Callable[[float], float]] = None) -> float:
        """
        Exponencial generalizada e_p(t, s) restrita aos reais

        Nas partes densas vale exp(∫p); nos pontos dispersos o fator é o
        produto exato Π(1 + μp), com sinal. Se algum fator zera, o
        resultado é exatamente 0.
        """
        s, t = self._check_range(ts, s, t)
        fatores = np.array([1.0 + m * p(tau) for tau, m in self.scattered_points(ts, s, t)])
        if fatores.size and np.any(fatores == 0.0):
            return 0.0
        g = dense_f or p
        expoente = sum(self.dense_integral(g, lo, hi, dense_step) for lo, hi in self.dense_pieces(ts, s, t))
        return float(np.prod(fatores)) * math.exp(expoente)

    # ------------------------------------------------------------------
    # Grades
    # ------------------------------------------------------------------

    def make_grid(self, ts: TimeScale, t0: Optional[float] = None, t_end: Optional[float] = None,
                  dense_step: Optional[float] = None) -> Grid:
        """
        Grade de instantes de T ∩ [t0, t_end]

        Cada parte densa é subdividida uniformemente com passo ≤ dense_step;
        bordas dos segmentos sempre entram, de modo que todo ponto disperso
        aparece junto com σ(t) (salvo quando é o próprio t_end).
        """
        h = dense_step or self.dense_step
        t0 = ts.start if t0 is None else self.require(ts, t0)[1]
        t_end = ts.end if t_end is None else self.require(ts, t_end)[1]
        if t0 > t_end:
            raise DomainError(f"grade invertida: {t0} > {t_end}")
        tempos: List[float] = []
        for l, r in ts.segments:
            lo, hi = max(l, t0), min(r, t_end)
            if hi < lo:
                continue
            if hi == lo:
                tempos.append(lo)
                continue
            n = max(1, math.ceil((hi - lo) / h - 1e-12))
            nos = np.linspace(lo, hi, n + 1)
            tempos.extend(float(x) for x in nos)
        return Grid(times=tuple(tempos), dense_step=h)

    # ------------------------------------------------------------------
    # Geradores
    # ------------------------------------------------------------------

    def make_timescale(self, spec: Dict[str, Any]) -> TimeScale:
        """
        Constrói uma escala a partir de uma descrição JSON com campo "kind"

        Tipos aceitos: interval, hz, p_ab, alternating, nonhomogeneous,
        random_discrete, segments.
        """
        if not isinstance(spec, dict) or "kind" not in spec:
            raise InvalidSpecError("descrição sem 'kind'", field="kind")
        kind = spec["kind"]
        construtores = {
            "interval": self._interval,
            "hz": self._hz,
            "p_ab": self._p_ab,
            "alternating": self._alternating,
            "nonhomogeneous": self._nonhomogeneous,
            "random_discrete": self._random_discrete,
            "segments": self._explicit,
        }
        if kind not in construtores:
            raise InvalidSpecError(f"tipo desconhecido '{kind}'", field="kind")
        try:
            ts = construtores[kind](spec)
        except KeyError as e:
            raise InvalidSpecError("parâmetro obrigatório ausente", field=str(e.args[0]))
        except (TypeError, ValueError) as e:
            raise InvalidSpecError(f"parâmetro inválido: {e}", field="timescale")
        logger.debug(f"Escala '{kind}' criada com {len(ts.segments)} segmentos até {ts.end}")
        return ts

    @staticmethod
    def _positive(spec: Dict[str, Any], name: str) -> float:
        valor = float(spec[name])
        if not valor > 0:
            raise InvalidSpecError("deve ser positivo", field=name)
        return valor

    def _interval(self, spec):
        start = float(spec.get("start", 0.0))
        end = float(spec["end"])
        if end < start:
            raise InvalidSpecError("end < start", field="end")
        return TimeScale(((start, end),), end, spec=dict(spec))

    def _hz(self, spec):
        h = self._positive(spec, "h")
        start = float(spec.get("start", 0.0))
        window_end = float(spec["window_end"])
        n = int(math.floor((window_end - start) / h + 1e-9))
        pontos = tuple((start + k * h, start + k * h) for k in range(n + 1))
        return TimeScale(pontos, pontos[-1][1], spec=dict(spec))

    def _periodic(self, a: float, b: float, window_end: float, spec) -> TimeScale:
        segs = []
        k = 0
        while k * (a + b) <= window_end + MEMBERSHIP_TOL:
            l = k * (a + b)
            segs.append((l, min(l + a, window_end)))
            k += 1
        return TimeScale(tuple(segs), segs[-1][1], spec=dict(spec))

    def _p_ab(self, spec):
        return self._periodic(self._positive(spec, "a"), self._positive(spec, "b"),
                              float(spec["window_end"]), spec)

    def _alternating(self, spec):
        return self._periodic(self._positive(spec, "c"), self._positive(spec, "h"),
                              float(spec["window_end"]), spec)

    def _nonhomogeneous(self, spec):
        """
        União de [t_σk, t_{k+1}] com comprimentos e lacunas sorteados

        Comprimentos uniformes em [length_min, length_max] (0 gera ponto
        isolado) e lacunas uniformes em [gap_min, mu_max]. Termina sempre em
        window_end. Determinístico dada a semente.
        """
        mu_max = self._positive(spec, "mu_max")
        seed = int(spec["seed"])
        window_end = float(spec["window_end"])
        length_min = float(spec.get("length_min", 0.5))
        length_max = float(spec.get("length_max", 1.5))
        gap_min = float(spec.get("gap_min", 0.5 * mu_max))
        if length_min < 0 or length_max < length_min:
            raise InvalidSpecError("faixa de comprimentos inválida", field="length_min")
        if not 0 < gap_min <= mu_max:
            raise InvalidSpecError("deve estar em (0, mu_max]", field="gap_min")
        rng = np.random.default_rng(seed)
        segs = []
        t = float(spec.get("start", 0.0))
        while t <= window_end:
            comprimento = rng.uniform(length_min, length_max)
            fim = min(t + comprimento, window_end)
            segs.append((t, fim))
            t = fim + rng.uniform(gap_min, mu_max)
        if segs[-1][1] < window_end:
            # lacuna sorteada passou da janela: fecha com ponto isolado em window_end
            segs.append((window_end, window_end))
        return TimeScale(tuple(segs), segs[-1][1], spec=dict(spec))

    def _random_discrete(self, spec):
        """Escala totalmente dispersa com lacunas uniformes em (0, c)"""
        c = self._positive(spec, "c")
        seed = int(spec["seed"])
        window_end = float(spec["window_end"])
        rng = np.random.default_rng(seed)
        pontos = []
        t = float(spec.get("start", 0.0))
        while t <= window_end:
            pontos.append((t, t))
            gap = 0.0
            while gap <= 0.0:
                gap = rng.uniform(0.0, c)
            t += gap
        return TimeScale(tuple(pontos), pontos[-1][1], spec=dict(spec))

    def _explicit(self, spec):
        segs = [tuple(s) for s in spec["segments"]]
        if any(len(s) != 2 for s in segs):
            raise InvalidSpecError("cada segmento deve ser [l, r]", field="segments")
        window_end = float(spec.get("window_end", segs[-1][1] if segs else 0.0))
        return TimeScale(tuple(segs), window_end)

    # ------------------------------------------------------------------
    # Serialização
    # ------------------------------------------------------------------

    def to_json(self, ts: TimeScale) -> str:
        documento = {"segments": [[l, r] for l, r in ts.segments], "window_end": ts.window_end}
        if ts.spec is not None:
            documento["generator"] = ts.spec
        return json.dumps(documento)

    def from_json(self, texto: str) -> TimeScale:
        try:
            documento = json.loads(texto)
        except json.JSONDecodeError as e:
            raise InvalidSpecError(f"JSON inválido: {e}")
        if not isinstance(documento, dict):
            raise InvalidSpecError("esperado objeto JSON", field="timescale")
        if "kind" in documento:
            return self.make_timescale(documento)
        if "segments" not in documento:
            raise InvalidSpecError("documento sem 'segments'", field="segments")
        return self.make_timescale(dict(documento, kind="segments"))
