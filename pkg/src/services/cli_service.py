"""
Interface de linha de comando
=============================

    tsm <comando> --config <arquivo.json> --out <dir> [--format csv|json] [--seed N]
    tsm reproduce --experiment <nome> --out <dir>

Comandos: measure, simulate, certify, pinning, reproduce.

Toda a configuração é validada e todos os cálculos são feitos antes de
qualquer arquivo ser aberto; um veredito "fails" é sucesso (código 0).
Códigos: 2 configuração, 3 domínio matemático, 4 asserção de reprodução,
5 explosão numérica.
"""

import sys
import json
import logging
import argparse
from contextlib import contextmanager
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from .certificate_service import CertificateService, StateBox
from .erros import BlowUpError, ConfigError, InvalidSpecError, TimeScaleMeasureError
from .experiment_service import EXPERIMENTS, ExperimentService
from .linalg_service import as_square
from .measure_service import MeasureKind, MeasureService
from .model_service import OpinionParams, SIQRParams, network_from_config, siqr_field
from .report_service import ReportService, fmt
from .settings_service import Settings, as_float, get_settings
from .solver_service import LinearSystem, SolverService, VectorField
from .timescale_service import TimeScale, TimeScaleService

# Configuração de logging
logger = logging.getLogger(__name__)

COMMANDS = ("measure", "simulate", "certify", "pinning", "reproduce")
CERTIFICATES = ("contraction", "uniform_exp_stability", "dense_scattered", "siqr", "lyapunov")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tsm",
        description="Medidas matriciais em escalas temporais: simulação, certificados e reprodução de experimentos",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for nome in COMMANDS:
        p = sub.add_parser(nome)
        if nome == "reproduce":
            p.add_argument("--experiment", required=True, choices=EXPERIMENTS)
        else:
            p.add_argument("--config", required=True, help="arquivo JSON de configuração")
        p.add_argument("--out", default=None, help="diretório de saída")
        p.add_argument("--format", default="csv", choices=("csv", "json"))
        p.add_argument("--seed", type=int, default=None)
    return parser


def load_config(path: str) -> Dict[str, Any]:
    """Lê o JSON de configuração; erros viram ConfigError nomeando o campo"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            documento = json.load(f)
    except FileNotFoundError:
        raise ConfigError("arquivo não encontrado", field="config")
    except json.JSONDecodeError as e:
        raise ConfigError(f"JSON malformado (linha {e.lineno}, coluna {e.colno}): {e.msg}", field="config")
    if not isinstance(documento, dict):
        raise ConfigError("esperado um objeto JSON", field="config")
    return documento


def require(config: Dict[str, Any], campo: str, prefixo: str = "") -> Any:
    if campo not in config:
        raise InvalidSpecError("campo obrigatório ausente", field=f"{prefixo}{campo}")
    return config[campo]


@contextmanager
def config_field(campo: str):
    """Valores malformados dentro do bloco viram InvalidSpecError nomeando o campo"""
    try:
        yield
    except (TypeError, ValueError) as e:
        raise InvalidSpecError(f"valor inválido: {e}", field=campo)


def as_float_list(valor: Any, campo: str) -> List[float]:
    if not isinstance(valor, list):
        raise InvalidSpecError(f"esperada lista, recebido {valor!r}", field=campo)
    return [as_float(v, campo) for v in valor]


class CLIService:
    """
    Front-end dos comandos

    RESPONSABILIDADES:
    =================
    - Validar a configuração de cada comando antes de qualquer saída
    - Delegar aos serviços de medida, solver, certificados e experimentos
    - Serializar os resultados via ReportService
    - Traduzir exceções em códigos de saída
    """

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        self.timescales = TimeScaleService(self.settings)
        self.measures = MeasureService(self.settings)
        self.solver = SolverService(self.settings)
        self.certificates = CertificateService(self.settings)
        self._handlers: Dict[str, Callable[[argparse.Namespace], int]] = {
            "measure": self.cmd_measure,
            "simulate": self.cmd_simulate,
            "certify": self.cmd_certify,
            "pinning": self.cmd_pinning,
            "reproduce": self.cmd_reproduce,
        }

    def main(self, argv: Optional[Sequence[str]] = None) -> int:
        """
        Ponto de entrada: analisa argv, executa o comando e devolve o código

        Returns:
            int: 0 sucesso (inclusive veredito "fails"), 2/3/4/5 em erro
        """
        parser = build_parser()
        try:
            args = parser.parse_args(argv)
        except SystemExit as e:
            return 2 if e.code else 0
        try:
            return self._handlers[args.command](args)
        except BlowUpError as e:
            logger.error(f"❌ {e}")
            print(f"erro: {e} (t={e.time:.17g})", file=sys.stderr)
            return e.exit_code
        except TimeScaleMeasureError as e:
            logger.error(f"❌ {type(e).__name__}: {e}")
            print(f"erro: {e}", file=sys.stderr)
            return e.exit_code

    def _reports(self, args: argparse.Namespace) -> ReportService:
        return ReportService(args.out or self.settings.output_dir)

    # ------------------------------------------------------------------
    # Construção de objetos a partir do JSON
    # ------------------------------------------------------------------

    def parse_kind(self, config: Dict[str, Any]) -> MeasureKind:
        with config_field("kind"):
            return MeasureKind.from_dict(config.get("kind", {"base": "two-norm"}))

    def parse_timescale(self, config: Dict[str, Any]) -> TimeScale:
        return self.timescales.make_timescale(require(config, "timescale"))

    def parse_system(self, config: Dict[str, Any]):
        """
        Sistema dinâmico do JSON

        {"type": "linear", "A": [[...]], "g": [...]} |
        {"type": "siqr", "params": {...}} |
        {"type": "opinion", "d": 0.5, "sigmoid": "atan"}
        """
        sistema = require(config, "system")
        if not isinstance(sistema, dict):
            raise InvalidSpecError("esperado objeto", field="system")
        tipo = sistema.get("type", "linear")
        if tipo == "linear":
            try:
                A = as_square(require(sistema, "A", "system."), "system.A")
            except (TypeError, ValueError):
                raise InvalidSpecError("matriz inválida", field="system.A")
            with config_field("system.g"):
                return LinearSystem.constant(A, sistema.get("g"), name="linear")
        if tipo == "siqr":
            return siqr_field(SIQRParams.from_dict(require(sistema, "params", "system.")))
        if tipo == "opinion":
            return OpinionParams(d=as_float(sistema.get("d", 0.5), "system.d"),
                                 sigmoid=sistema.get("sigmoid", "atan")).intrinsic()
        raise InvalidSpecError(f"tipo desconhecido '{tipo}'", field="system.type")

    def parse_box(self, config: Dict[str, Any], seed: Optional[int]) -> StateBox:
        caixa = require(config, "box")
        if not isinstance(caixa, dict):
            raise InvalidSpecError("esperado objeto", field="box")
        return StateBox.from_dict(caixa, seed)

    @staticmethod
    def as_field(sistema) -> VectorField:
        return sistema.as_vector_field() if isinstance(sistema, LinearSystem) else sistema

    # ------------------------------------------------------------------
    # Comandos
    # ------------------------------------------------------------------

    def cmd_measure(self, args: argparse.Namespace) -> int:
        """
        Tabela (μ, m(A, μ)) para uma matriz e uma lista de μ ou uma escala

        Configuração: {"matrix": [[...]], "mu": [...] | "timescale": {...}, "kind": {...}}
        """
        config = load_config(args.config)
        try:
            A = as_square(require(config, "matrix"), "matrix")
        except (TypeError, ValueError):
            raise InvalidSpecError("matriz inválida", field="matrix")
        kind = self.parse_kind(config)
        if "mu" in config:
            mus = as_float_list(config["mu"], "mu")
        elif "timescale" in config:
            mus = self.parse_timescale(config).distinct_mus()
        else:
            raise InvalidSpecError("informe 'mu' ou 'timescale'", field="mu")
        if not mus:
            raise InvalidSpecError("lista vazia", field="mu")
        tabela = [(mu, self.measures.matrix_measure(A, mu, kind)) for mu in mus]

        print("mu\tm(A,mu)")
        for mu, valor in tabela:
            print(f"{fmt(mu)}\t{fmt(valor)}")
        destino = self._reports(args).write_table("measure", ["mu", "m"], tabela, args.format)
        logger.info(f"📊 Tabela de medidas gravada em {destino}")
        return 0

    def cmd_simulate(self, args: argparse.Namespace) -> int:
        """
        Integra um sistema sobre uma escala

        Configuração: {"timescale": {...}, "system": {...}, "x0": [...],
        "t0": opcional, "t_end": opcional, "dense_step": opcional}
        """
        config = load_config(args.config)
        ts = self.parse_timescale(config)
        sistema = self.parse_system(config)
        x0 = np.asarray([as_float(v, "x0") for v in np.atleast_1d(require(config, "x0"))])
        t0 = as_float(config.get("t0", ts.start), "t0")
        t_end = as_float(config.get("t_end", ts.end), "t_end")
        passo = config.get("dense_step")
        passo = as_float(passo, "dense_step") if passo is not None else None
        if passo is not None and not passo > 0:
            raise InvalidSpecError("deve ser positivo", field="dense_step")

        traj = self.solver.integrate(ts, sistema, t0, x0, t_end, passo)
        relatorios = self._reports(args)
        destino = relatorios.write_trajectory("trajectory", traj, args.format)
        if args.format == "csv":
            colunas = relatorios.trajectory_header(traj)[2:]
            relatorios.write_gnuplot("trajectory", "trajetória", "trajectory.csv", colunas)
        logger.info(f"✅ Trajetória com {len(traj)} amostras gravada em {destino}")
        return 0

    def cmd_certify(self, args: argparse.Namespace) -> int:
        """
        Avalia um certificado e grava certificate.json

        Configuração: {"certificate": contraction | uniform_exp_stability |
        dense_scattered | siqr | lyapunov, ...campos do certificado}
        """
        config = load_config(args.config)
        tipo = require(config, "certificate")
        if tipo not in CERTIFICATES:
            raise InvalidSpecError(f"certificado desconhecido '{tipo}'", field="certificate")
        ts = self.parse_timescale(config)
        kind = self.parse_kind(config)

        if tipo == "siqr":
            sistema = require(config, "system")
            if not isinstance(sistema, dict):
                raise InvalidSpecError("esperado objeto", field="system")
            params = SIQRParams.from_dict(require(sistema, "params", "system."))
            C0 = as_float(require(config, "C0"), "C0")
            report = self.certificates.check_siqr_conditions(params, ts, ts.start, C0)
            if "N" in config:
                r0, pequeno = self.certificates.reproduction_number(params, as_float(config["N"], "N"))
                report.details["reproduction_number"] = {"R0": r0, "below_half": pequeno}
        elif tipo in ("uniform_exp_stability", "dense_scattered"):
            sistema = self.parse_system(config)
            if not isinstance(sistema, LinearSystem):
                raise InvalidSpecError("exige sistema linear", field="system.type")
            passo = as_float(config.get("grid_step", 0.05), "grid_step")
            grid = self.timescales.make_grid(ts, dense_step=passo)
            if tipo == "uniform_exp_stability":
                report = self.certificates.check_uniform_exp_stability(ts, sistema.A_of_t, kind, grid)
            else:
                report = self.certificates.check_dense_scattered(ts, sistema.A_of_t, kind, ts.start, ts.end, grid)
        else:
            vf = self.as_field(self.parse_system(config))
            box = self.parse_box(config, args.seed)
            mus = config.get("mu_values")
            mus = as_float_list(mus, "mu_values") if mus is not None else self.certificates.critical_mus(ts)
            if tipo == "contraction":
                report = self.certificates.check_contraction(mus, vf, box, kind, ts=ts)
            else:
                equilibrio = config.get("equilibrium")
                if equilibrio is not None:
                    equilibrio = as_float_list(equilibrio, "equilibrium")
                report = self.certificates.check_lyapunov(
                    vf, box, mus, kind, equilibrium=equilibrio,
                    n_states=int(as_float(config.get("n_states", 100), "n_states")), seed=args.seed or 0)

        self._reports(args).write_certificate("certificate", report)
        print(f"{report.name}: {report.verdict}")
        return 0

    def cmd_pinning(self, args: argparse.Namespace) -> int:
        """
        Condições de pinning com o espectro completo de L̃

        Configuração: {"network": {...}, "node": {"type": "opinion", ...},
        "timescale": {...} | "mu_values": [...], "box": {...}}
        """
        config = load_config(args.config)
        with config_field("network"):
            net = network_from_config(require(config, "network"), args.seed)
        no = require(config, "node")
        vf = self.as_field(self.parse_system({"system": no}))
        box = self.parse_box(config, args.seed)
        if "mu_values" in config:
            mus = as_float_list(config["mu_values"], "mu_values")
        else:
            mus = self.certificates.critical_mus(self.parse_timescale(config))
        report = self.certificates.check_pinning(net, vf, box, mus)
        report.details["network"] = net.to_dict()

        self._reports(args).write_certificate("pinning", report)
        print(f"pinning: {report.verdict} (c_bar_sq={fmt(report.constants['c_bar_sq'])})")
        return 0

    def cmd_reproduce(self, args: argparse.Namespace) -> int:
        """Executa um experimento de reprodução com suas asserções"""
        servico = ExperimentService(args.out or self.settings.output_dir, self.settings)
        resultado = servico.run(args.experiment, args.seed)
        print(f"{args.experiment}: {len(resultado.files)} arquivos")
        return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    return CLIService().main(argv)
