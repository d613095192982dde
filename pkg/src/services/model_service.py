"""
Modelos concretos: SIQR, rede de opiniões com agente teimoso e exemplos lineares
================================================================================

Cada construtor devolve objetos prontos para o SolverService e o
CertificateService (VectorField, LinearSystem, NetworkSpec).
"""

import math
import json
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import bisect

from .erros import AssumptionViolationError, DimensionError, InvalidSpecError
from .linalg_service import as_square
from .settings_service import Settings, as_float, get_settings
from .solver_service import LinearSystem, SolverService, Trajectory, VectorField
from .timescale_service import TimeScale, TimeScaleService

# Configuração de logging
logger = logging.getLogger(__name__)

Coefficient = Union[float, Callable[[float], float]]

SIQR_FIELDS = ("Lambda", "beta", "d", "zeta", "eps", "gamma", "alpha1", "alpha2")


# ----------------------------------------------------------------------
# SIQR
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SIQRParams:
    """
    Parâmetros do modelo SIQR, constantes ou funções de t

    Λ recrutamento, β contato, d morte natural, ζ remoção para quarentena,
    ε recuperação na quarentena, γ recuperação, α₁/α₂ mortes pela doença.
    """

    Lambda: Coefficient
    beta: Coefficient
    d: Coefficient
    zeta: Coefficient
    eps: Coefficient
    gamma: Coefficient
    alpha1: Coefficient = 0.0
    alpha2: Coefficient = 0.0

    def __post_init__(self):
        for nome in SIQR_FIELDS:
            valor = getattr(self, nome)
            if callable(valor):
                continue
            if not (isinstance(valor, (int, float)) and math.isfinite(valor)) or valor < 0:
                raise InvalidSpecError("deve ser real não negativo", field=nome)
            object.__setattr__(self, nome, float(valor))
        if not callable(self.d) and self.d <= 0:
            raise AssumptionViolationError("d_min > 0", f"d = {self.d}")
        if not callable(self.Lambda) and self.Lambda <= 0:
            raise AssumptionViolationError("Lambda_min > 0", f"Λ = {self.Lambda}")

    @property
    def is_constant(self) -> bool:
        return not any(callable(getattr(self, nome)) for nome in SIQR_FIELDS)

    def at(self, t: float) -> Dict[str, float]:
        valores = {}
        for nome in SIQR_FIELDS:
            v = getattr(self, nome)
            valores[nome] = float(v(t)) if callable(v) else v
        return valores

    def a1(self, t: float) -> float:
        p = self.at(t)
        return p["gamma"] + p["zeta"] + p["d"] + p["alpha1"]

    def a2(self, t: float) -> float:
        p = self.at(t)
        return p["d"] + p["alpha2"] + p["eps"]

    def bound(self, nome: str, times: Iterable[float], worst=max) -> float:
        """sup (ou inf) de um coeficiente sobre os instantes dados"""
        return worst(self.at(t)[nome] for t in times)

    def to_dict(self) -> Dict[str, float]:
        if not self.is_constant:
            raise InvalidSpecError("parâmetros dependentes do tempo não são serializáveis")
        return {nome: getattr(self, nome) for nome in SIQR_FIELDS}

    @classmethod
    def from_dict(cls, documento: Dict[str, Any]) -> "SIQRParams":
        if not isinstance(documento, dict):
            raise InvalidSpecError("esperado objeto com os parâmetros", field="params")
        faltando = [nome for nome in SIQR_FIELDS[:6] if nome not in documento]
        if faltando:
            raise InvalidSpecError("parâmetro SIQR ausente", field=faltando[0])
        extras = set(documento) - set(SIQR_FIELDS)
        if extras:
            raise InvalidSpecError("parâmetro SIQR desconhecido", field=sorted(extras)[0])
        return cls(**{k: as_float(v, f"params.{k}") for k, v in documento.items()})


def representative_params() -> SIQRParams:
    """Conjunto representativo: α₁=α₂=1, Λ=10, β=0.1, d=1, ζ=1, ε=0.1, γ=0.1"""
    return SIQRParams(Lambda=10.0, beta=0.1, d=1.0, zeta=1.0, eps=0.1, gamma=0.1, alpha1=1.0, alpha2=1.0)


def lockdown_params(N: float = 6e7, k_d: float = 1.0, k_lambda: Optional[float] = None,
                    lockdown: bool = True) -> SIQRParams:
    """
    Parâmetros de literatura com d = k_d·β e Λ = k_Λ·β

    β = 0.373/N, descontado em 90% no lock-down; k_Λ padrão = N.
    """
    if k_d <= 0:
        raise InvalidSpecError("deve ser positivo", field="k_d")
    k_lambda = N if k_lambda is None else k_lambda
    if k_lambda <= 0:
        raise InvalidSpecError("deve ser positivo", field="k_lambda")
    beta = (0.0373 if lockdown else 0.373) / N
    return SIQRParams(Lambda=k_lambda * beta, beta=beta, d=k_d * beta, zeta=0.067, eps=0.036,
                      gamma=0.067, alpha1=0.0, alpha2=0.0)


def lockdown_closed_condition(k_d: float, lockdown: bool = True) -> Tuple[float, bool]:
    """Forma fechada (2 − k_d)·βN < 0.067; devolve o lado esquerdo e o veredito"""
    lado = (2.0 - k_d) * (0.0373 if lockdown else 0.373)
    return lado, lado < 0.067


def check_siqr_assumptions(p: SIQRParams, ts: TimeScale, times: Optional[Sequence[float]] = None,
                           timescales: Optional[TimeScaleService] = None):
    """
    Hipóteses de trabalho sobre a escala: sup μ·a₁ < 1, sup μ·a₂ < 1,
    d ≥ d_min > 0 e Λ ≥ Λ_min > 0

    Raises:
        AssumptionViolationError: nomeando a hipótese violada
    """
    timescales = timescales or TimeScaleService()
    if times is None:
        times = timescales.make_grid(ts, dense_step=max(0.05, timescales.dense_step)).times
    d_min = p.bound("d", times, min)
    if not d_min > 0:
        raise AssumptionViolationError("d_min > 0", f"inf d = {d_min}")
    lam_min = p.bound("Lambda", times, min)
    if not lam_min > 0:
        raise AssumptionViolationError("Lambda_min > 0", f"inf Λ = {lam_min}")
    for t in times:
        mu = timescales.mu(ts, t).mu
        if mu == 0:
            continue
        if not mu * p.a1(t) < 1:
            raise AssumptionViolationError("mu*a1 < 1", f"μ·a₁ = {mu * p.a1(t):.6g} em t={t}")
        if not mu * p.a2(t) < 1:
            raise AssumptionViolationError("mu*a2 < 1", f"μ·a₂ = {mu * p.a2(t):.6g} em t={t}")


def siqr_field(p: SIQRParams, ts: Optional[TimeScale] = None) -> VectorField:
    """
    Campo SIQR de 4 estados (S, I, Q, R) com jacobiana analítica

    Se a escala for informada, as hipóteses de trabalho são verificadas.
    """
    if ts is not None:
        check_siqr_assumptions(p, ts)

    def f(t, x):
        c = p.at(t)
        S, I, Q, R = x
        a1 = c["gamma"] + c["zeta"] + c["d"] + c["alpha1"]
        a2 = c["d"] + c["alpha2"] + c["eps"]
        return np.array([
            c["Lambda"] - c["beta"] * S * I - c["d"] * S,
            c["beta"] * S * I - a1 * I,
            c["zeta"] * I - a2 * Q,
            c["gamma"] * I + c["eps"] * Q - c["d"] * R,
        ])

    def jac(t, x):
        c = p.at(t)
        S, I, _, _ = x
        a1 = c["gamma"] + c["zeta"] + c["d"] + c["alpha1"]
        a2 = c["d"] + c["alpha2"] + c["eps"]
        return np.array([
            [-c["d"] - c["beta"] * I, -c["beta"] * S, 0.0, 0.0],
            [c["beta"] * I, c["beta"] * S - a1, 0.0, 0.0],
            [0.0, c["zeta"], -a2, 0.0],
            [0.0, c["gamma"], c["eps"], -c["d"]],
        ])

    return VectorField(f, jac, autonomous=p.is_constant, name="siqr")


def disease_free_solution(p: SIQRParams, t: float) -> np.ndarray:
    """x_d(t) = (Λ(t)/d(t), 0, 0, 0)"""
    c = p.at(t)
    if not c["d"] > 0:
        raise AssumptionViolationError("d_min > 0", f"d({t}) = {c['d']}")
    return np.array([c["Lambda"] / c["d"], 0.0, 0.0, 0.0])


# ----------------------------------------------------------------------
# Redes
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class NetworkSpec:
    """Grafo não direcionado com acoplamento σΓ e controle de pinning σ_r"""

    n_nodes: int
    edges: Tuple[Tuple[int, int], ...]
    sigma: float
    sigma_r: float
    pinned: FrozenSet[int] = frozenset()
    Gamma: Tuple[Tuple[float, ...], ...] = ((1.0,),)

    def __post_init__(self):
        if self.n_nodes < 1:
            raise InvalidSpecError("deve ser positivo", field="n_nodes")
        if not self.sigma > 0:
            raise InvalidSpecError("deve ser positivo", field="sigma")
        if not self.sigma_r > 0:
            raise InvalidSpecError("deve ser positivo", field="sigma_r")
        arestas = set()
        for u, v in self.edges:
            u, v = int(u), int(v)
            if not (0 <= u < self.n_nodes and 0 <= v < self.n_nodes):
                raise DimensionError(f"aresta ({u}, {v}) fora de 0..{self.n_nodes - 1}")
            if u == v:
                raise InvalidSpecError(f"laço no nó {u}", field="edges")
            arestas.add((min(u, v), max(u, v)))
        pinned = frozenset(int(i) for i in self.pinned)
        if any(not 0 <= i < self.n_nodes for i in pinned):
            raise DimensionError("nó fixado fora do intervalo")
        Gamma = as_square(self.Gamma, "Gamma")
        object.__setattr__(self, "edges", tuple(sorted(arestas)))
        object.__setattr__(self, "pinned", pinned)
        object.__setattr__(self, "Gamma", tuple(tuple(float(v) for v in row) for row in Gamma))

    @property
    def gamma_matrix(self) -> np.ndarray:
        return np.array(self.Gamma, dtype=float)

    def graph(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(range(self.n_nodes))
        G.add_edges_from(self.edges)
        return G

    def laplacian(self) -> np.ndarray:
        return nx.laplacian_matrix(self.graph(), nodelist=range(self.n_nodes)).toarray().astype(float)

    def pin_vector(self) -> np.ndarray:
        p = np.zeros(self.n_nodes)
        p[list(self.pinned)] = 1.0
        return p

    def l_tilde(self) -> np.ndarray:
        """L̃ = σL + σ_r·diag(p)"""
        return self.sigma * self.laplacian() + self.sigma_r * np.diag(self.pin_vector())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "n_nodes": self.n_nodes,
            "edges": [list(e) for e in self.edges],
            "sigma": self.sigma,
            "sigma_r": self.sigma_r,
            "pinned": sorted(self.pinned),
            "Gamma": [list(r) for r in self.Gamma],
        }


def watts_strogatz(n: int, mean_degree: int, rewire_p: float, seed: int) -> Tuple[Tuple[int, int], ...]:
    """
    Arestas de um grafo Watts–Strogatz (anel com k/2 vizinhos por lado e
    religação de uma ponta por aresta com probabilidade p)
    """
    if mean_degree < 2 or mean_degree % 2:
        raise InvalidSpecError("grau médio deve ser par e ≥ 2", field="mean_degree")
    if n <= mean_degree:
        raise InvalidSpecError("n deve exceder o grau médio", field="n")
    if not 0.0 <= rewire_p <= 1.0:
        raise InvalidSpecError("probabilidade fora de [0, 1]", field="rewire_p")
    G = nx.watts_strogatz_graph(n, mean_degree, rewire_p, seed=seed)
    return tuple(sorted((min(u, v), max(u, v)) for u, v in G.edges()))


def select_pinned_nodes(n_nodes: int, edges: Sequence[Tuple[int, int]], count: int) -> FrozenSet[int]:
    """
    Escolha gulosa dos nós fixados

    1. cada componente conexa recebe seu nó de maior grau;
    2. enquanto houver nós não dominados, fixa o nó que cobre mais nós não
       dominados (desempate por grau e depois por índice);
    3. completa até `count` pelos nós de maior grau.
    """
    G = nx.Graph()
    G.add_nodes_from(range(n_nodes))
    G.add_edges_from(edges)
    grau = dict(G.degree())
    ordem: List[int] = []

    for componente in sorted(nx.connected_components(G), key=min):
        ordem.append(max(sorted(componente), key=lambda i: grau[i]))

    dominados = set()
    for i in ordem:
        dominados.add(i)
        dominados.update(G.neighbors(i))
    while len(dominados) < n_nodes:
        def ganho(i):
            cobertos = ({i} | set(G.neighbors(i))) - dominados
            return (len(cobertos), grau[i], -i)
        candidato = max((i for i in range(n_nodes) if i not in ordem), key=ganho)
        ordem.append(candidato)
        dominados.add(candidato)
        dominados.update(G.neighbors(candidato))

    if len(ordem) > count:
        logger.warning(f"⚠️ Conjunto dominante guloso tem {len(ordem)} nós; cortando para {count}")
        ordem = ordem[:count]
    restantes = sorted((i for i in range(n_nodes) if i not in ordem), key=lambda i: (-grau[i], i))
    ordem.extend(restantes[: max(0, count - len(ordem))])
    return frozenset(ordem)


def load_edge_list(path: Union[str, Path]) -> Tuple[Tuple[int, int], ...]:
    """Lê arquivo texto com um par `u v` por linha, índices a partir de 0"""
    caminho = Path(path)
    if not caminho.exists():
        raise InvalidSpecError(f"arquivo não encontrado: {caminho}", field="edge_list")
    try:
        G = nx.read_edgelist(caminho, nodetype=int, data=False)
    except (TypeError, ValueError) as e:
        raise InvalidSpecError(f"lista de arestas inválida: {e}", field="edge_list")
    return tuple(sorted((min(u, v), max(u, v)) for u, v in G.edges()))


# ----------------------------------------------------------------------
# Opiniões com agente teimoso
# ----------------------------------------------------------------------

SIGMOIDS: Dict[str, Tuple[Callable[[np.ndarray], np.ndarray], Callable[[np.ndarray], np.ndarray]]] = {
    "atan": (np.arctan, lambda x: 1.0 / (1.0 + x * x)),
    "tanh": (np.tanh, lambda x: 1.0 / np.cosh(x) ** 2),
}


@dataclass(frozen=True)
class OpinionParams:
    """Dinâmica intrínseca −d·x + S(x) com S sigmoide ímpar, S'(0) = 1"""

    d: float = 0.5
    sigmoid: str = "atan"
    x_r0: float = 1.0

    def __post_init__(self):
        if self.sigmoid not in SIGMOIDS:
            raise InvalidSpecError(f"sigmoide desconhecida '{self.sigmoid}'", field="sigmoid")
        if not -self.d + 1 > 0:
            raise InvalidSpecError("exige −d + 1 > 0", field="d")
        pontos = np.linspace(-5.0, 5.0, 11)
        S, dS = SIGMOIDS[self.sigmoid]
        if not np.allclose(S(-pontos), -S(pontos), atol=1e-12):
            raise InvalidSpecError("S não é ímpar", field="sigmoid")
        if abs(float(S(np.array(0.0)))) > 1e-12 or abs(float(dS(np.array(0.0))) - 1.0) > 1e-12:
            raise InvalidSpecError("exige S(0) = 0 e S'(0) = 1", field="sigmoid")
        if np.any(dS(pontos) < 0):
            raise InvalidSpecError("S' negativa", field="sigmoid")

    def S(self, x):
        return SIGMOIDS[self.sigmoid][0](x)

    def dS(self, x):
        return SIGMOIDS[self.sigmoid][1](x)

    @property
    def S_bar(self) -> float:
        """sup S'(x), atingido em x = 0 para as sigmoides suportadas"""
        return float(np.max(self.dS(np.linspace(-10.0, 10.0, 2001))))

    def intrinsic(self) -> VectorField:
        return VectorField(
            lambda t, x: -self.d * x + self.S(x),
            lambda t, x: np.diag(np.atleast_1d(-self.d + self.dS(x))),
            autonomous=True,
            name=f"opiniao_{self.sigmoid}",
        )


def opinion_equilibrium(op: OpinionParams) -> Tuple[float, float, float]:
    """
    Equilíbrios (−x̄, 0, x̄) da dinâmica intrínseca, x̄ > 0 com d·x̄ = S(x̄)
    """
    if not op.d > 0:
        raise InvalidSpecError("exige d > 0 para equilíbrios isolados", field="d")
    g = lambda x: op.d * x - float(op.S(x))
    a = 1e-6
    b = 1.0
    while g(b) <= 0:
        b *= 2.0
        if b > 1e8:
            raise InvalidSpecError("não foi possível isolar x̄", field="d")
    xbar = bisect(g, a, b, xtol=1e-14, maxiter=400)
    return -xbar, 0.0, xbar


@dataclass
class ReferenceSignal:
    """
    Trajetória x_r(t) do agente teimoso, interpolada por Hermite cúbico
    entre as amostras do integrador
    """

    trajectory: Trajectory
    vf: VectorField

    def __post_init__(self):
        t = self.trajectory.times
        x = self.trajectory.states[:, 0]
        dx = np.array([float(self.vf(0.0, np.array([v]))[0]) for v in x])
        self._exatos = dict(zip(t.tolist(), x.tolist()))
        self._spline = CubicHermiteSpline(t, x, dx) if t.size > 1 else None

    def __call__(self, t: float) -> float:
        if t in self._exatos:
            return self._exatos[t]
        if self._spline is None:
            return float(self.trajectory.states[0, 0])
        return float(self._spline(t))


def stubborn_reference(op: OpinionParams, ts: TimeScale, t0: float, t_end: float,
                       solver: Optional[SolverService] = None,
                       dense_step: Optional[float] = None) -> ReferenceSignal:
    """Integra x_r^Δ = −d·x_r + S(x_r) na mesma escala e com o mesmo passo"""
    solver = solver or SolverService()
    vf = op.intrinsic()
    traj = solver.integrate(ts, vf, t0, [op.x_r0], t_end, dense_step)
    return ReferenceSignal(traj, vf)


def opinion_network_field(net: NetworkSpec, op: OpinionParams, x_r: Callable[[float], float]) -> VectorField:
    """
    x_i^Δ = −d·x_i + S(x_i) − σ(Lx)_i + p_i σ_r (x_r(t) − x_i)

    Jacobiana: diag(−d + S'(x_i)) − σL − σ_r·diag(p).
    """
    if net.gamma_matrix.shape != (1, 1):
        raise DimensionError("o modelo de opiniões exige Γ escalar (1×1)")
    gamma = float(net.gamma_matrix[0, 0])
    L = net.laplacian()
    p = net.pin_vector()
    acoplamento = net.sigma * gamma * L + net.sigma_r * gamma * np.diag(p)
    n = net.n_nodes

    def f(t, x):
        if x.size != n:
            raise DimensionError(f"estado de tamanho {x.size} para rede de {n} nós")
        return -op.d * x + op.S(x) - acoplamento @ x + net.sigma_r * gamma * p * x_r(t)

    def jac(t, x):
        return np.diag(-op.d + op.dS(x)) - acoplamento

    return VectorField(f, jac, autonomous=False, name="rede_opinioes")


def network_from_config(config: Dict[str, Any], seed: Optional[int] = None) -> NetworkSpec:
    """
    Monta a NetworkSpec a partir do JSON de configuração

    Aceita "edges", "edge_list" (arquivo texto) ou "watts_strogatz"
    {n, k, p, seed}; nós fixados por "pinned" ou "n_pinned".
    """
    if "watts_strogatz" in config:
        ws = config["watts_strogatz"]
        for campo in ("n", "k", "p"):
            if campo not in ws:
                raise InvalidSpecError("parâmetro ausente", field=f"watts_strogatz.{campo}")
        n = int(ws["n"])
        edges = watts_strogatz(n, int(ws["k"]), float(ws["p"]), seed if seed is not None else int(ws.get("seed", 0)))
    elif "edge_list" in config:
        edges = load_edge_list(config["edge_list"])
        n = int(config.get("n_nodes", 1 + max((max(e) for e in edges), default=0)))
    elif "edges" in config:
        edges = tuple(tuple(e) for e in config["edges"])
        if "n_nodes" not in config:
            raise InvalidSpecError("obrigatório com 'edges'", field="n_nodes")
        n = int(config["n_nodes"])
    else:
        raise InvalidSpecError("informe 'edges', 'edge_list' ou 'watts_strogatz'", field="network")
    if "pinned" in config:
        pinned = frozenset(int(i) for i in config["pinned"])
    elif "n_pinned" in config:
        pinned = select_pinned_nodes(n, edges, int(config["n_pinned"]))
    else:
        raise InvalidSpecError("informe 'pinned' ou 'n_pinned'", field="pinned")
    for campo in ("sigma", "sigma_r"):
        if campo not in config:
            raise InvalidSpecError("parâmetro ausente", field=campo)
    return NetworkSpec(n, edges, float(config["sigma"]), float(config["sigma_r"]), pinned,
                       config.get("Gamma", ((1.0,),)))


# ----------------------------------------------------------------------
# Exemplos lineares
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ExampleSystem:
    name: str
    system: LinearSystem
    timescale: Dict[str, Any]
    description: str


def example_systems() -> Dict[str, ExampleSystem]:
    """
    Catálogo dos dois exemplos lineares

    example1: A(t) = [[−2, 1], [−1, −a(t)]], a(t) = sin(t) + 2, em R.
    example2: A = [[−5, 2], [2, −2]] em intervalos alternados (c=1, h=0.2).
    """
    def A1(t):
        return np.array([[-2.0, 1.0], [-1.0, -(math.sin(t) + 2.0)]])

    A2 = np.array([[-5.0, 2.0], [2.0, -2.0]])
    return {
        "example1": ExampleSystem(
            "example1",
            LinearSystem(A1, None, 0.0, "example1"),
            {"kind": "interval", "start": 0.0, "end": 2.0 * math.pi},
            "sistema variante no tempo com m₂(A(t), 0) ≤ −1",
        ),
        "example2": ExampleSystem(
            "example2",
            LinearSystem.constant(A2, name="example2"),
            {"kind": "alternating", "c": 1.0, "h": 0.2, "window_end": 10.0},
            "matriz simétrica com autovalores −6 e −1; estável para h ∈ (0, 2/7]",
        ),
    }
