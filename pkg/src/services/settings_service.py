import os
import logging
from dataclasses import dataclass, fields
from typing import Any, Optional

from .erros import ConfigError, InvalidSpecError

# Configuração de logging
logger = logging.getLogger(__name__)


def _float_env(name: str, default: float) -> float:
    valor = os.getenv(name)
    if valor is None or valor.strip() == "":
        return default
    try:
        return float(valor)
    except ValueError:
        raise ConfigError(f"valor não numérico '{valor}'", field=name)


def _int_env(name: str, default: int) -> int:
    valor = os.getenv(name)
    if valor is None or valor.strip() == "":
        return default
    try:
        return int(valor)
    except ValueError:
        raise ConfigError(f"valor não inteiro '{valor}'", field=name)


def as_float(valor: Any, campo: str) -> float:
    """Número de um documento de configuração; bool e valores não numéricos viram InvalidSpecError"""
    if isinstance(valor, bool):
        raise InvalidSpecError(f"esperado número, recebido {valor!r}", field=campo)
    try:
        return float(valor)
    except (TypeError, ValueError):
        raise InvalidSpecError(f"esperado número, recebido {valor!r}", field=campo)


@dataclass(frozen=True)
class Settings:
    """
    Parâmetros numéricos globais

    Lidos do ambiente (.env carregado pelo main.py). Cada serviço recebe uma
    instância e pode sobrescrever valores no próprio construtor.
    """

    dense_step: float = 1e-3
    h_probe: float = 1e-6
    blowup_threshold: float = 1e12
    cert_slack: float = 1e-9
    jacobi_tol: float = 1e-12
    jacobi_max_sweeps: int = 100
    output_dir: str = "resultados"
    log_level: str = "INFO"

    def __post_init__(self):
        for nome in ("dense_step", "h_probe", "blowup_threshold", "cert_slack", "jacobi_tol"):
            if not getattr(self, nome) > 0:
                raise ConfigError("deve ser positivo", field=nome)
        if self.jacobi_max_sweeps < 1:
            raise ConfigError("deve ser >= 1", field="jacobi_max_sweeps")

    @classmethod
    def from_env(cls) -> "Settings":
        """Monta as configurações a partir das variáveis TSM_*"""
        settings = cls(
            dense_step=_float_env("TSM_DENSE_STEP", cls.dense_step),
            h_probe=_float_env("TSM_H_PROBE", cls.h_probe),
            blowup_threshold=_float_env("TSM_BLOWUP_THRESHOLD", cls.blowup_threshold),
            cert_slack=_float_env("TSM_CERT_SLACK", cls.cert_slack),
            jacobi_tol=_float_env("TSM_JACOBI_TOL", cls.jacobi_tol),
            jacobi_max_sweeps=_int_env("TSM_JACOBI_MAX_SWEEPS", cls.jacobi_max_sweeps),
            output_dir=os.getenv("TSM_OUTPUT_DIR", cls.output_dir),
            log_level=os.getenv("TSM_LOG_LEVEL", cls.log_level).upper(),
        )
        logger.debug(f"Configurações carregadas: {settings.as_dict()}")
        return settings

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}


_default: Optional[Settings] = None


def get_settings() -> Settings:
    """Instância compartilhada, criada na primeira chamada"""
    global _default
    if _default is None:
        _default = Settings.from_env()
    return _default
