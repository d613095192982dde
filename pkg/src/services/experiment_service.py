"""
Reprodução dos experimentos numéricos
=====================================

Cada experimento monta escala, modelo e certificados, simula, grava CSV,
JSON e script gnuplot e verifica asserções embutidas. Uma asserção que
falha levanta AcceptanceError (código de saída 4).

Experimentos:
- epidemic-pab: SIQR representativo em P_{1,0.24}
- epidemic-random: SIQR representativo em escala discreta aleatória (c = 0.24)
- epidemic-lockdown: SIQR com parâmetros de lock-down em R
- opinion: rede Watts–Strogatz com agente teimoso e 45 nós fixados
- example1: sistema linear variante no tempo em [0, 2π]
- example2: matriz simétrica em intervalos alternados (c = 1, h = 0.2)
"""

import math
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

import numpy as np

from .certificate_service import CertificateService, StateBox
from .erros import AcceptanceError, InvalidSpecError
from .linalg_service import ONE_NORM, TWO_NORM
from .measure_service import MeasureKind
from .model_service import (
    OpinionParams, SIQRParams, disease_free_solution, example_systems, lockdown_closed_condition,
    lockdown_params, network_from_config, opinion_equilibrium, opinion_network_field,
    representative_params, siqr_field, stubborn_reference,
)
from .report_service import ReportService
from .settings_service import Settings, get_settings
from .solver_service import SolverService, Trajectory
from .timescale_service import Grid, TimeScale, TimeScaleService

# Configuração de logging
logger = logging.getLogger(__name__)

EXPERIMENTS = ("epidemic-pab", "epidemic-random", "epidemic-lockdown", "opinion", "example1", "example2")

DEFAULT_SEEDS = {"epidemic-random": 2024, "opinion": 7}

EXPERIMENT_STEP = 1e-2

SIQR_KIND = MeasureKind(ONE_NORM, ((1.0, 0.0, 0.0, 0.0), (0.0, 1.0, 0.0, 0.0),
                                   (0.0, 0.0, 1.0, 0.0), (0.0, 0.0, 0.0, 1e-3)))
TWO = MeasureKind(TWO_NORM)

OPINION_NETWORK = {
    "watts_strogatz": {"n": 100, "k": 2, "p": 0.7},
    "n_pinned": 45,
    "sigma": 5.0,
    "sigma_r": 10.0,
}


@dataclass
class ExperimentResult:
    name: str
    files: List[Path] = field(default_factory=list)
    assertions: Dict[str, bool] = field(default_factory=dict)
    certificates: Dict[str, Any] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": self.name,
            "files": [p.name for p in self.files],
            "assertions": dict(self.assertions),
            "certificates": dict(self.certificates),
            "summary": dict(self.summary),
        }


class ExperimentService:
    """
    Orquestra os experimentos de reprodução

    RESPONSABILIDADES:
    =================
    - Montar escalas, modelos e certificados de cada experimento
    - Simular e gravar trajetórias, certificados e scripts gnuplot
    - Verificar as asserções embutidas (AcceptanceError se falharem)
    """

    def __init__(self, output_dir: Union[str, Path], settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        self.reports = ReportService(output_dir)
        self.timescales = TimeScaleService(self.settings)
        self.solver = SolverService(self.settings)
        self.certificates = CertificateService(self.settings)
        self._runners: Dict[str, Callable[[ExperimentResult, int], None]] = {
            "epidemic-pab": self._epidemic_pab,
            "epidemic-random": self._epidemic_random,
            "epidemic-lockdown": self._epidemic_lockdown,
            "opinion": self._opinion,
            "example1": self._example1,
            "example2": self._example2,
        }

    def run(self, name: str, seed: Optional[int] = None) -> ExperimentResult:
        """
        Executa um experimento e grava seus artefatos

        Args:
            name (str): um de EXPERIMENTS
            seed (int): semente; padrão DEFAULT_SEEDS

        Returns:
            ExperimentResult: arquivos gravados, asserções e certificados

        Raises:
            AcceptanceError: se uma asserção embutida falhar
        """
        if name not in self._runners:
            raise InvalidSpecError(f"experimento desconhecido '{name}'", field="experiment")
        seed = DEFAULT_SEEDS.get(name, 0) if seed is None else int(seed)
        logger.info(f"🚀 Reproduzindo experimento '{name}' (seed={seed})")
        resultado = ExperimentResult(name)
        self._runners[name](resultado, seed)
        falhas = [nome for nome, ok in resultado.assertions.items() if not ok]
        resultado.files.append(self.reports.write_json(f"{self._slug(name)}_summary", resultado.to_dict()))
        if falhas:
            logger.error(f"❌ Asserções falharam em '{name}': {falhas}")
            raise AcceptanceError(f"experimento '{name}': asserções falharam: {', '.join(falhas)}")
        logger.info(f"✅ Experimento '{name}' concluído ({len(resultado.files)} arquivos)")
        return resultado

    @staticmethod
    def _slug(name: str) -> str:
        return name.replace("-", "_")

    def _write_trajectory(self, resultado: ExperimentResult, nome: str, traj: Trajectory,
                          titulo: str, ylabel: str = "x") -> None:
        resultado.files.append(self.reports.write_trajectory(nome, traj, "csv"))
        colunas = self.reports.trajectory_header(traj)[2:]
        resultado.files.append(self.reports.write_gnuplot(nome, titulo, f"{nome}.csv", colunas, ylabel=ylabel))

    @staticmethod
    def _last_point_before(ts: TimeScale, t: float) -> float:
        candidatos = [min(r, t) for l, r in ts.segments if l <= t]
        return max(candidatos)

    # ------------------------------------------------------------------
    # SIQR
    # ------------------------------------------------------------------

    def _siqr_run(self, resultado: ExperimentResult, ts: TimeScale, T: float) -> None:
        params = representative_params()
        vf = siqr_field(params, ts)
        x0 = np.array([5.0, 5.0, 5.0, 5.0])
        traj = self.solver.integrate(ts, vf, ts.start, x0, T, EXPERIMENT_STEP)
        slug = self._slug(resultado.name)
        self._write_trajectory(resultado, slug, traj, f"SIQR ({resultado.name})")

        alvo = disease_free_solution(params, T)
        erro = float(np.sum(np.abs(traj.final - alvo)))
        resultado.summary.update({"T": T, "final_state": traj.final, "l1_error_to_disease_free": erro})
        resultado.assertions["converges_to_disease_free"] = erro < 1e-3
        resultado.assertions["nonnegative"] = bool(np.all(traj.states >= -1e-12))

        box = StateBox((0.0,) * 4, (10.0,) * 4, counts=(6, 6, 6, 6))
        mus = self.certificates.critical_mus(ts)
        contracao = self.certificates.check_contraction(mus, vf, box, SIQR_KIND, ts=ts)
        resultado.assertions["contraction_holds"] = contracao.holds
        grandes = StateBox((0.0,) * 4, (30.0,) * 4, counts=(4, 4, 4, 4))
        contracao_30 = self.certificates.check_contraction(mus, vf, grandes, SIQR_KIND, ts=ts)
        condicoes = self.certificates.check_siqr_conditions(params, ts, ts.start, float(np.sum(x0)))
        r0, pequeno = self.certificates.reproduction_number(params, float(np.sum(x0)))
        resultado.certificates.update({
            "contraction_box_10": contracao.to_dict(),
            "contraction_box_30": contracao_30.to_dict(),
            "siqr_conditions": condicoes.to_dict(),
            "reproduction_number": {"R0": r0, "below_half": pequeno, "N": float(np.sum(x0))},
        })

        if contracao.holds:
            y0 = np.array([8.0, 1.0, 2.0, 3.0])
            pares = self.solver.pair_distance(ts, vf, ts.start, x0, y0, T, SIQR_KIND, EXPERIMENT_STEP, contracao)
            resultado.assertions["pair_distance_within_envelope"] = all(d <= b + 1e-6 for _, d, b in pares)
            nome = f"{slug}_pair"
            resultado.files.append(self.reports.write_table(nome, ["t", "distance", "envelope"], pares))
            resultado.files.append(self.reports.write_gnuplot(
                nome, "distância entre trajetórias", f"{nome}.csv", ["distance", "envelope"],
                ylabel="|x - y|", logscale_y=True))
        resultado.files.append(self.reports.write_json(f"{slug}_cert", resultado.certificates))

    def _epidemic_pab(self, resultado: ExperimentResult, seed: int) -> None:
        ts = self.timescales.make_timescale({"kind": "p_ab", "a": 1.0, "b": 0.24, "window_end": 31.0})
        self._siqr_run(resultado, ts, 30.0)

    def _epidemic_random(self, resultado: ExperimentResult, seed: int) -> None:
        ts = self.timescales.make_timescale({"kind": "random_discrete", "c": 0.24, "seed": seed, "window_end": 31.0})
        self._siqr_run(resultado, ts, self._last_point_before(ts, 30.0))
        resultado.summary["seed"] = seed

    def _epidemic_lockdown(self, resultado: ExperimentResult, seed: int) -> None:
        N = 6e7
        params = lockdown_params(N)
        T = 120.0
        ts = self.timescales.make_timescale({"kind": "interval", "start": 0.0, "end": T})
        vf = siqr_field(params, ts)
        x0 = np.full(4, 0.25 * N)
        traj = self.solver.integrate(ts, vf, 0.0, x0, T, EXPERIMENT_STEP)
        self._write_trajectory(resultado, "epidemic_lockdown", traj, "SIQR com lock-down", ylabel="indivíduos")

        I0, IT = float(x0[1]), float(traj.final[1])
        resultado.summary.update({"T": T, "N": N, "I0": I0, "IT": IT, "final_state": traj.final})
        resultado.assertions["infected_decay"] = IT < 1e-3 * I0
        resultado.assertions["nonnegative"] = bool(np.all(traj.states >= 0.0))

        condicoes = self.certificates.check_siqr_conditions(params, ts, 0.0, float(np.sum(x0)))
        lado, fechada = lockdown_closed_condition(1.0)
        r0, pequeno = self.certificates.reproduction_number(params, N)
        resultado.assertions["R0_below_half"] = pequeno
        resultado.certificates.update({
            "siqr_conditions_literal": condicoes.to_dict(),
            "closed_form_condition": {"lhs": lado, "rhs": 0.067, "holds": fechada},
            "reproduction_number": {"R0": r0, "below_half": pequeno, "N": N},
        })
        if condicoes.verdict != "holds" and fechada:
            logger.warning("⚠️ (C2) literal falha com d = k_d·β; a forma fechada vale com d = k_d·β·N")
        resultado.files.append(self.reports.write_json("epidemic_lockdown_cert", resultado.certificates))

    # ------------------------------------------------------------------
    # Opiniões
    # ------------------------------------------------------------------

    def _opinion(self, resultado: ExperimentResult, seed: int) -> None:
        op = OpinionParams(d=0.5, sigmoid="atan", x_r0=1.0)
        config = dict(OPINION_NETWORK)
        config["watts_strogatz"] = dict(config["watts_strogatz"], seed=seed)
        net = network_from_config(config)
        espectro = self.certificates.linalg.symmetric_eigenvalues(net.l_tilde())
        node_box = StateBox((-5.0,), (5.0,), counts=(201,))
        node_vf = op.intrinsic()

        literal = self.certificates.check_pinning(net, node_vf, node_box, (0.0, 0.25))
        c_f = literal.constants["c_f"]
        cota = self.certificates.check_opinion_bound(op.d, op.S_bar, 0.25)
        mu_max = 0.8 / (float(espectro[-1]) + c_f)
        ts = self.timescales.make_timescale({"kind": "nonhomogeneous", "mu_max": mu_max, "seed": seed,
                                             "window_end": 20.0})
        pinning = self.certificates.check_pinning(net, node_vf, node_box, self.certificates.critical_mus(ts))
        atalho = self.certificates.pinning_shortcut(net, c_f)
        resultado.assertions["c_f_within_opinion_bound"] = c_f <= cota + 1e-9
        resultado.assertions["pinning_holds"] = pinning.holds

        T = ts.end
        referencia = stubborn_reference(op, ts, ts.start, T, self.solver, EXPERIMENT_STEP)
        campo = opinion_network_field(net, op, referencia)
        rng = np.random.default_rng(seed)
        x0 = rng.uniform(0.5, 3.0, size=net.n_nodes)
        traj = self.solver.integrate(ts, campo, ts.start, x0, T, EXPERIMENT_STEP)
        self._write_trajectory(resultado, "opinion", traj, "opiniões na rede", ylabel="x_i")
        resultado.files.append(self.reports.write_trajectory("opinion_reference", referencia.trajectory, "csv"))

        erros = [float(np.linalg.norm(x - referencia(t))) for t, x, _ in traj.samples]
        desvio_final = float(np.max(np.abs(traj.final - referencia(T))))
        resultado.assertions["synchronized_at_T"] = desvio_final < 1e-2
        if pinning.holds:
            env = self.solver.envelope(traj, pinning.constants["c_bar_sq"])
            linhas = [(t, e, erros[0] * v) for (t, _, _), e, v in zip(traj.samples, erros, env)]
            resultado.assertions["error_within_envelope"] = all(e <= b + 1e-6 for _, e, b in linhas)
            resultado.files.append(self.reports.write_table("opinion_error", ["t", "error", "envelope"], linhas))
            resultado.files.append(self.reports.write_gnuplot(
                "opinion_error", "erro de sincronização", "opinion_error.csv", ["error", "envelope"],
                ylabel="|x - x_r|", logscale_y=True))

        resultado.summary.update({
            "T": T,
            "mu_max": mu_max,
            "max_deviation_at_T": desvio_final,
            "equilibria": opinion_equilibrium(op),
            "n_pinned": len(net.pinned),
            "seed": seed,
        })
        resultado.certificates.update({
            "pinning_literal_mu_025": literal.to_dict(),
            "pinning": pinning.to_dict(),
            "opinion_bound_mu_025": cota,
            "continuous_shortcut": atalho,
            "mu_max_admissible": self.certificates.admissible_mu_max(espectro, c_f),
            "network": net.to_dict(),
        })
        resultado.files.append(self.reports.write_json("opinion_cert", resultado.certificates))

    # ------------------------------------------------------------------
    # Exemplos lineares
    # ------------------------------------------------------------------

    def _example1(self, resultado: ExperimentResult, seed: int) -> None:
        ex = example_systems()["example1"]
        ts = self.timescales.make_timescale(ex.timescale)
        A = ex.system.A_of_t
        tempos = np.linspace(ts.start, ts.end, 1000)
        linhas = []
        for t in tempos:
            linhas.append([float(t)] + [self.certificates.measures.matrix_measure(A(float(t)), mu, TWO)
                                        for mu in (0.0, 0.1, 0.25, 0.49)])
        header = ["t", "m_0", "m_0.1", "m_0.25", "m_0.49"]
        resultado.files.append(self.reports.write_table("example1_measure", header, linhas))
        resultado.files.append(self.reports.write_gnuplot(
            "example1_measure", "m2(A(t), mu)", "example1_measure.csv", header[1:], ylabel="m"))
        resultado.assertions["dense_measure_below_minus_one"] = all(l[1] <= -1.0 + 1e-9 for l in linhas)
        resultado.assertions["scattered_measure_negative"] = all(v < 1e-9 for l in linhas for v in l[2:])

        x0 = np.array([1.0, 1.0])
        traj = self.solver.integrate(ts, ex.system, ts.start, x0, ts.end, EXPERIMENT_STEP)
        self._write_trajectory(resultado, "example1", traj, "exemplo 1")
        grid = Grid(tuple(float(t) for t in traj.times), EXPERIMENT_STEP)
        coppel = self.solver.coppel_bound(ts, A, TWO, 0.0, ts.start, float(np.linalg.norm(x0)), grid)
        normas = [float(np.linalg.norm(x)) for x in traj.states]
        resultado.assertions["coppel_bound"] = all(n <= b * (1 + 1e-6) + 1e-12 for n, b in zip(normas, coppel.bound))
        estabilidade = self.certificates.check_uniform_exp_stability(ts, A, TWO, grid)
        resultado.assertions["uniform_exp_stability_holds"] = estabilidade.holds
        resultado.certificates["uniform_exp_stability"] = estabilidade.to_dict()
        resultado.files.append(self.reports.write_json("example1_cert", resultado.certificates))

    def _example2(self, resultado: ExperimentResult, seed: int) -> None:
        ex = example_systems()["example2"]
        ts = self.timescales.make_timescale(ex.timescale)
        A = ex.system.A_of_t
        M = A(0.0)
        medidas = self.certificates.measures
        tabela = [[mu, medidas.matrix_measure(M, mu, TWO)] for mu in (0.0, 0.1, 0.2, 2.0 / 7.0, 0.5)]
        resultado.files.append(self.reports.write_table("example2_measure", ["mu", "m"], tabela))
        resultado.assertions["measure_minus_one_up_to_2_7"] = all(abs(m + 1.0) <= 1e-9 for mu, m in tabela[:4])
        resultado.assertions["measure_two_at_half"] = abs(tabela[4][1] - 2.0) <= 1e-9

        caminho = self.solver.transition_path(ts, A, ts.start, ts.end, EXPERIMENT_STEP)
        tempos = tuple(t for t, _ in caminho)
        normas = [medidas.matrix_norm(Y, TWO) for _, Y in caminho]
        coppel = self.solver.coppel_bound(ts, A, TWO, 0.0, ts.start, 1.0, Grid(tempos, EXPERIMENT_STEP))
        linhas = [(t, n, b) for t, n, b in zip(tempos, normas, coppel.bound)]
        resultado.files.append(self.reports.write_table("example2", ["t", "phi_norm", "bound"], linhas))
        resultado.files.append(self.reports.write_gnuplot(
            "example2", "|Phi(t, 0)|", "example2.csv", ["phi_norm", "bound"], ylabel="norma", logscale_y=True))
        resultado.assertions["transition_within_bound"] = all(n <= b + 1e-6 for _, n, b in linhas)
        resultado.assertions["transition_decays"] = normas[-1] < normas[0]

        grid = self.timescales.make_grid(ts, dense_step=0.05)
        estabilidade = self.certificates.check_uniform_exp_stability(ts, A, TWO, grid)
        decomposicao = self.certificates.check_dense_scattered(ts, A, TWO, ts.start, ts.end, grid)
        resultado.assertions["uniform_exp_stability_holds"] = estabilidade.holds
        resultado.certificates.update({
            "uniform_exp_stability": estabilidade.to_dict(),
            "dense_scattered": decomposicao.to_dict(),
        })
        resultado.files.append(self.reports.write_json("example2_cert", resultado.certificates))
