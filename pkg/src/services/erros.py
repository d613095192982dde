"""
Hierarquia de exceções do sistema de medidas matriciais em escalas temporais.

Todas as exceções descendem de TimeScaleMeasureError para que a CLI consiga
traduzi-las em códigos de saída sem capturar erros de programação.
"""

from typing import Optional


class TimeScaleMeasureError(Exception):
    """Erro base do sistema"""

    exit_code = 1


class ConfigError(TimeScaleMeasureError):
    """Configuração inválida (variável de ambiente ou JSON de entrada)"""

    exit_code = 2

    def __init__(self, message: str, field: Optional[str] = None):
        self.field = field
        if field:
            message = f"campo '{field}': {message}"
        super().__init__(message)


class InvalidSpecError(ConfigError):
    """Especificação de escala temporal ou de modelo inválida"""


class MathDomainError(TimeScaleMeasureError):
    """Erros matemáticos de domínio (código de saída 3)"""

    exit_code = 3


class DomainError(MathDomainError):
    """Instante fora da escala temporal, ou sonda saindo de um intervalo denso"""


class SingularWeightError(MathDomainError):
    """Matriz de peso P não invertível"""


class NonSquareError(MathDomainError):
    """Matriz não quadrada onde uma quadrada é exigida"""


class AsymmetryError(MathDomainError):
    """Matriz não simétrica onde uma simétrica é exigida"""


class DimensionError(MathDomainError):
    """Dimensões incompatíveis entre vetores, matrizes ou redes"""


class AssumptionViolationError(MathDomainError):
    """Hipótese de trabalho do modelo SIQR violada"""

    def __init__(self, assumption: str, detail: str):
        self.assumption = assumption
        super().__init__(f"hipótese '{assumption}' violada: {detail}")


class EmptyBoxError(MathDomainError):
    """Caixa de estados vazia ou sem amostras"""


class CertificateMissingError(TimeScaleMeasureError):
    """Operação exige um certificado de contração válido"""

    exit_code = 3


class AcceptanceError(TimeScaleMeasureError):
    """Uma asserção embutida de reprodução falhou"""

    exit_code = 4


class BlowUpError(TimeScaleMeasureError):
    """Estado não finito ou acima do limiar durante a integração"""

    exit_code = 5

    def __init__(self, time: float, detail: str = ""):
        self.time = time
        message = f"explosão numérica em t={time:.17g}"
        if detail:
            message = f"{message} ({detail})"
        super().__init__(message)
