"""
Serialização dos resultados: CSV, JSON e scripts gnuplot
========================================================

Todos os arquivos são gravados de forma atômica (arquivo temporário no
mesmo diretório + os.replace) e os números reais saem com 17 dígitos
significativos, de modo que a mesma configuração e a mesma semente
produzem arquivos idênticos byte a byte.
"""

import io
import os
import csv
import json
import math
import logging
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from .solver_service import Trajectory

# Configuração de logging
logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def fmt(valor: float) -> str:
    return FLOAT_FORMAT % float(valor)


def to_jsonable(obj: Any) -> Any:
    """Converte numpy, tuplas e não finitos (→ null) para tipos JSON"""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        itens = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [to_jsonable(v) for v in itens]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        valor = float(obj)
        return valor if math.isfinite(valor) else None
    if hasattr(obj, "to_dict"):
        return to_jsonable(obj.to_dict())
    return obj


class ReportService:
    """
    Gravação dos artefatos de saída

    RESPONSABILIDADES:
    =================
    - Trajetórias em CSV (t,mu,x1..xn) e JSON (mesmos campos + meta)
    - Relatórios de certificado em JSON
    - Tabelas genéricas (medidas, envelopes) em CSV ou JSON
    - Script gnuplot por experimento
    - Escrita atômica dentro do diretório de saída
    """

    def __init__(self, output_dir: Union[str, Path]):
        self.output_dir = Path(output_dir)

    def _ensure_dir(self):
        self.output_dir.mkdir(parents=True, exist_ok=True)

    def write_text(self, nome: str, conteudo: str) -> Path:
        """Escreve conteudo em output_dir/nome atomicamente"""
        self._ensure_dir()
        destino = self.output_dir / nome
        fd, temporario = tempfile.mkstemp(dir=self.output_dir, prefix=f".{nome}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
                f.write(conteudo)
            os.replace(temporario, destino)
        except BaseException:
            if os.path.exists(temporario):
                os.unlink(temporario)
            raise
        logger.debug(f"💾 Arquivo gravado: {destino}")
        return destino

    # ------------------------------------------------------------------
    # Renderização
    # ------------------------------------------------------------------

    @staticmethod
    def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) if isinstance(v, (float, int, np.floating, np.integer))
                             and not isinstance(v, bool) else v for v in row])
        return buffer.getvalue()

    @staticmethod
    def render_json(documento: Any) -> str:
        return json.dumps(to_jsonable(documento), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    @staticmethod
    def trajectory_header(traj: Trajectory) -> List[str]:
        n = traj.states.shape[1] if len(traj) else 0
        return ["t", "mu"] + [f"x{i + 1}" for i in range(n)]

    def trajectory_rows(self, traj: Trajectory) -> List[List[float]]:
        return [[t, mu] + list(map(float, x)) for t, x, mu in traj.samples]

    # ------------------------------------------------------------------
    # Gravação
    # ------------------------------------------------------------------

    def write_trajectory(self, nome: str, traj: Trajectory, formato: str = "csv") -> Path:
        """
        Grava a trajetória como CSV ou JSON

        Args:
            nome (str): nome base, sem extensão
            traj (Trajectory): amostras (t, x, μ)
            formato (str): csv | json

        Returns:
            Path: caminho gravado
        """
        if formato == "json":
            documento = {
                "fields": self.trajectory_header(traj),
                "samples": self.trajectory_rows(traj),
                "meta": traj.meta,
            }
            return self.write_text(f"{nome}.json", self.render_json(documento))
        return self.write_text(f"{nome}.csv", self.render_csv(self.trajectory_header(traj), self.trajectory_rows(traj)))

    def write_table(self, nome: str, header: Sequence[str], rows: Sequence[Sequence[Any]],
                    formato: str = "csv") -> Path:
        if formato == "json":
            documento = {"fields": list(header), "rows": [list(r) for r in rows]}
            return self.write_text(f"{nome}.json", self.render_json(documento))
        return self.write_text(f"{nome}.csv", self.render_csv(header, rows))

    def write_json(self, nome: str, documento: Any) -> Path:
        return self.write_text(f"{nome}.json", self.render_json(documento))

    def write_certificate(self, nome: str, report) -> Path:
        return self.write_json(nome, report.to_dict() if hasattr(report, "to_dict") else report)

    def write_gnuplot(self, nome: str, titulo: str, dados: str, colunas: Sequence[str],
                      xlabel: str = "t", ylabel: str = "x", logscale_y: bool = False) -> Path:
        """
        Script gnuplot que plota as colunas indicadas de um CSV contra a primeira

        O script gera {nome}.png com o terminal pngcairo.
        """
        linhas = [
            "# gerado automaticamente",
            "set datafile separator ','",
            "set key autotitle columnhead",
            "set terminal pngcairo size 900,600",
            f"set output '{nome}.png'",
            f"set title '{titulo}'",
            f"set xlabel '{xlabel}'",
            f"set ylabel '{ylabel}'",
            "set grid",
        ]
        if logscale_y:
            linhas.append("set logscale y")
        curvas = [f"'{dados}' using 1:'{c}' with lines title '{c}'" for c in colunas]
        linhas.append("plot " + ", \\\n     ".join(curvas))
        return self.write_text(f"{nome}.gp", "\n".join(linhas) + "\n")
