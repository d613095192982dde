#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
📐 MEDIDAS MATRICIAIS EM ESCALAS TEMPORAIS
Linha de comando para simulação, certificados de estabilidade e reprodução
de experimentos

Funcionalidades:
- ✅ measure: tabela de m(A, μ)
- ✅ simulate: integração em escalas temporais (RK4 + saltos exatos)
- ✅ certify: contração, estabilidade uniforme, SIQR, Lyapunov
- ✅ pinning: condições de sincronização com o espectro completo de L̃
- ✅ reproduce: experimentos epidêmicos, de opinião e exemplos lineares

Uso:
    python main.py measure --config exemplo.json --out resultados
    python main.py reproduce --experiment epidemic-pab --out resultados
"""

import os
import sys
import logging

from dotenv import load_dotenv

# Carregar variáveis de ambiente
load_dotenv()

# Configuração de logging
logging.basicConfig(
    level=getattr(logging, os.getenv("TSM_LOG_LEVEL", "INFO").upper(), logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

from src.services.cli_service import main  # noqa: E402

if __name__ == "__main__":
    logger.info("🚀 Iniciando medidas matriciais em escalas temporais...")
    sys.exit(main())
