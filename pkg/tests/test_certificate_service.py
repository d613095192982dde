#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testes dos certificados: estabilidade uniforme, decomposição densa/dispersa,
contração, condições SIQR, R₀, pinning e Lyapunov
"""

import math

import numpy as np
import pytest

from src.services.certificate_service import FAILS, HOLDS, INCONCLUSIVE, StateBox
from src.services.erros import AssumptionViolationError, DomainError, EmptyBoxError, InvalidSpecError
from src.services.experiment_service import OPINION_NETWORK, SIQR_KIND
from src.services.linalg_service import TWO_NORM
from src.services.measure_service import MeasureKind
from src.services.model_service import (
    NetworkSpec, OpinionParams, SIQRParams, lockdown_params, network_from_config, representative_params,
    siqr_field,
)
from src.services.solver_service import LinearSystem, VectorField

from conftest import EXAMPLE2, contracting_matrix

TWO = MeasureKind(TWO_NORM)


def _linear_field(A):
    A = np.asarray(A, dtype=float)
    return VectorField(lambda t, x: A @ x, lambda t, x: A, autonomous=True)


def _siqr_box(lado):
    return StateBox((0.0,) * 4, (lado,) * 4, counts=3)


# ----------------------------------------------------------------------
# Caixa de estados
# ----------------------------------------------------------------------

def test_caixa_invalida():
    with pytest.raises(EmptyBoxError):
        StateBox((1.0,), (0.0,), counts=2)
    with pytest.raises(EmptyBoxError):
        StateBox((0.0,), (1.0,), counts=2, n_samples=5)
    with pytest.raises(EmptyBoxError):
        StateBox((0.0, 0.0), (1.0,), counts=2)


def test_amostragem_da_caixa():
    grade = StateBox((0.0, -1.0), (1.0, 1.0), counts=3)
    assert grade.samples().shape == (9, 2)
    assert grade.contains([0.5, 0.0])
    assert not grade.contains([1.5, 0.0])
    sorteio = StateBox((0.0, 0.0), (1.0, 1.0), n_samples=50, seed=4)
    assert np.array_equal(sorteio.samples(), sorteio.samples())
    assert all(sorteio.contains(x) for x in sorteio.samples())
    assert StateBox.from_dict(grade.to_dict()) == grade


# ----------------------------------------------------------------------
# Sistemas lineares
# ----------------------------------------------------------------------

def test_identidade_nao_e_uniformemente_estavel(certificates, timescales):
    ts = timescales.make_timescale({"kind": "alternating", "c": 1.0, "h": 0.2, "window_end": 5.0})
    grid = timescales.make_grid(ts, dense_step=0.1)
    cert = certificates.check_uniform_exp_stability(ts, lambda t: np.eye(2), TWO, grid)
    assert cert.verdict == FAILS
    assert cert.constants["epsilon"] == pytest.approx(-1.0)


def test_exemplo_simetrico_uniformemente_estavel(certificates, timescales):
    """h = 0.2: m = −1 em todos os pontos, ε = min(1, −1 + 2/0.2) = 1"""
    ts = timescales.make_timescale({"kind": "alternating", "c": 1.0, "h": 0.2, "window_end": 10.0})
    grid = timescales.make_grid(ts, dense_step=0.1)
    cert = certificates.check_uniform_exp_stability(ts, lambda t: EXAMPLE2, TWO, grid)
    assert cert.verdict == HOLDS
    assert cert.constants["epsilon"] == pytest.approx(1.0, abs=1e-9)
    assert cert.constants["mu_bar"] == pytest.approx(0.2)
    assert cert.witness["side"] == "upper"


def test_decomposicao_densa_dispersa_mista(certificates, timescales):
    """x^Δ = −x em [0,5] ∪ [8,13]: c_d = −1 e c_s = (|1 − 3| − 1)/3 = 1/3"""
    ts = timescales.make_timescale({"kind": "segments", "segments": [[0.0, 5.0], [8.0, 13.0]]})
    grid = timescales.make_grid(ts, dense_step=0.5)
    cert = certificates.check_dense_scattered(ts, lambda t: [[-1.0]], TWO, 0.0, 13.0, grid)
    assert cert.constants["c_d"] == pytest.approx(-1.0)
    assert cert.constants["c_s"] == pytest.approx(1.0 / 3.0)
    assert cert.constants["slope"] < 0
    assert cert.witness["exponent_end"] == pytest.approx(-9.0)
    assert cert.verdict == HOLDS


# ----------------------------------------------------------------------
# Contração
# ----------------------------------------------------------------------

def test_contracao_de_campos_lineares(certificates):
    box = StateBox((-1.0, -1.0), (1.0, 1.0), counts=3)
    estavel = certificates.check_contraction([0.0, 0.5], _linear_field(-np.eye(2)), box, TWO)
    assert estavel.verdict == HOLDS
    assert estavel.constants["c_bar_sq"] == pytest.approx(1.0)
    instavel = certificates.check_contraction([0.0], _linear_field(np.eye(2)), box, TWO)
    assert instavel.verdict == FAILS
    assert instavel.constants["c_bar_sq"] == pytest.approx(-1.0)
    assert instavel.samples_used == 9


def test_conjunto_critico_de_graininess(certificates, timescales):
    pab = timescales.make_timescale({"kind": "p_ab", "a": 1.0, "b": 0.24, "window_end": 5.0})
    mus = certificates.critical_mus(pab)
    assert mus[0] == 0.0 and mus[1] == pytest.approx(0.24)
    hz = timescales.make_timescale({"kind": "hz", "h": 0.5, "window_end": 2.0})
    assert certificates.critical_mus(hz) == [0.5]


def test_contracao_siqr_na_caixa_de_lado_10(certificates):
    """Pior coluna em S = 10: 2βS − a₁ + ζ + 10⁻³γ = −0.0999"""
    vf = siqr_field(representative_params())
    box = _siqr_box(10.0)
    cert = certificates.check_contraction([0.0, 0.24], vf, box, SIQR_KIND)
    assert cert.verdict == HOLDS
    assert cert.constants["c_bar_sq"] == pytest.approx(0.0999, abs=1e-9)
    assert cert.witness["x"][0] == pytest.approx(10.0)
    assert certificates.revalidate_contraction(cert, vf, box, SIQR_KIND, n=20, seed=1) <= 1e-9


def test_contracao_siqr_falha_na_caixa_de_lado_30(certificates):
    cert = certificates.check_contraction([0.0, 0.24], siqr_field(representative_params()),
                                          _siqr_box(30.0), SIQR_KIND)
    assert cert.verdict == FAILS
    assert cert.constants["c_bar_sq"] < 0


def test_caixa_menor_da_taxa_maior(certificates):
    vf = siqr_field(representative_params())
    grande = certificates.check_contraction([0.0, 0.24], vf, _siqr_box(10.0), SIQR_KIND)
    pequena = certificates.check_contraction([0.0, 0.24], vf, _siqr_box(5.0), SIQR_KIND)
    assert pequena.constants["c_bar_sq"] > grande.constants["c_bar_sq"]
    assert pequena.constants["c_bar_sq"] == pytest.approx(1.0)


def test_contracao_de_campo_variante_no_tempo(certificates, timescales):
    """A(t) = −1 + 2 sin t: m(A(t), 0) chega a 1 em t = π/2, então a contração falha na janela"""
    sistema = LinearSystem(lambda t: [[-1.0 + 2.0 * math.sin(t)]])
    vf = sistema.as_vector_field()
    assert not vf.autonomous
    ts = timescales.make_timescale({"kind": "interval", "end": 2.0 * math.pi})
    box = StateBox((-1.0,), (1.0,), counts=(3,))
    um = MeasureKind("one-norm")
    cert = certificates.check_contraction([0.0], vf, box, um, ts=ts)
    assert cert.verdict == FAILS
    assert cert.constants["c_bar_sq"] == pytest.approx(-1.0, abs=1e-2)
    assert abs(cert.witness["t"] - math.pi / 2) < 0.05
    assert len(cert.details["times"]) > 100
    assert certificates.revalidate_contraction(cert, vf, box, um) <= 1e-9
    # só t = 0 amostrado: m = −1, resultado restrito a esse instante
    instante = certificates.check_contraction([0.0], vf, box, um, times=[0.0])
    assert instante.verdict == HOLDS
    with pytest.raises(InvalidSpecError):
        certificates.check_contraction([0.0], vf, box, um)


def test_contracao_linear_independe_da_caixa(certificates):
    """f = Ax tem jacobiana constante: c̄² = −m(A, μ̄) em qualquer caixa"""
    vf = _linear_field(EXAMPLE2)
    pequena = certificates.check_contraction([0.0, 0.2], vf, StateBox((-1.0, -1.0), (1.0, 1.0), counts=3), TWO)
    grande = certificates.check_contraction([0.0, 0.2], vf, StateBox((-50.0, 0.0), (50.0, 80.0), counts=4), TWO)
    assert pequena.constants["c_bar_sq"] == pytest.approx(1.0, abs=1e-9)
    assert grande.constants["c_bar_sq"] == pytest.approx(pequena.constants["c_bar_sq"], abs=1e-12)


def test_revalidacao_dos_certificados_validos(certificates):
    """20 amostras novas não excedem −c̄² em nenhum certificado que vale"""
    casos = [
        (siqr_field(representative_params()), _siqr_box(10.0), SIQR_KIND, [0.0, 0.24]),
        (_linear_field(EXAMPLE2), StateBox((-1.0, -1.0), (1.0, 1.0), counts=3), TWO, [0.0, 0.2]),
        (OpinionParams(d=1.5).intrinsic(), _opinion_box(), TWO, [0.0, 0.25]),
    ]
    for vf, box, kind, mus in casos:
        cert = certificates.check_contraction(mus, vf, box, kind)
        assert cert.holds, vf.name
        for seed in (1, 2, 3):
            assert certificates.revalidate_contraction(cert, vf, box, kind, n=20, seed=seed) <= 1e-9, vf.name


# ----------------------------------------------------------------------
# SIQR
# ----------------------------------------------------------------------

def test_condicoes_siqr_nas_duas_convencoes(certificates, timescales):
    """x̄ = 30 satisfaz só (C1) com limiar 2/7; x̄ = 10 satisfaz ambas"""
    ts = timescales.make_timescale({"kind": "p_ab", "a": 1.0, "b": 0.24, "window_end": 31.0})
    cert = certificates.check_siqr_conditions(representative_params(), ts, 0.0, 20.0)
    inicial = cert.details["conventions"]["initial_bound"]
    assintotica = cert.details["conventions"]["asymptotic_bound"]
    assert inicial["xbar"] == pytest.approx(30.0)
    assert inicial["C1_threshold"] == pytest.approx(2.0 / 7.0)
    assert inicial["C1"] == HOLDS and inicial["C2"] == FAILS
    assert assintotica["xbar"] == pytest.approx(10.0)
    assert assintotica["C1"] == HOLDS and assintotica["C2"] == HOLDS
    assert cert.verdict == INCONCLUSIVE
    assert cert.evidence == "exact"
    assert cert.witness["condition"] == "C2"


def test_condicao_c2_falha_com_contato_alto(certificates, timescales):
    """β = 10: 2βx̄ ≥ 200 > d + α₁ + γ = 2.1 nas duas convenções"""
    p = SIQRParams(Lambda=10.0, beta=10.0, d=1.0, zeta=1.0, eps=0.1, gamma=0.1, alpha1=1.0, alpha2=1.0)
    ts = timescales.make_timescale({"kind": "p_ab", "a": 1.0, "b": 0.24, "window_end": 10.0})
    cert = certificates.check_siqr_conditions(p, ts, 0.0, 20.0)
    assert cert.verdict == FAILS
    for convencao in cert.details["conventions"].values():
        assert convencao["C2"] == FAILS
        assert convencao["C2_margin"] < 0


def test_hipotese_de_trabalho_violada(certificates, timescales):
    """Em 0.5Z, μ·a₁ = 1.55 ≥ 1"""
    ts = timescales.make_timescale({"kind": "hz", "h": 0.5, "window_end": 5.0})
    with pytest.raises(AssumptionViolationError) as erro:
        certificates.check_siqr_conditions(representative_params(), ts, 0.0, 20.0)
    assert erro.value.assumption == "mu*a1 < 1"


def test_numero_de_reproducao(certificates):
    r0, abaixo = certificates.reproduction_number(representative_params(), 20.0)
    assert r0 == pytest.approx(3.0 / 3.1)
    assert not abaixo
    r0_lock, abaixo_lock = certificates.reproduction_number(lockdown_params(), 6e7)
    assert r0_lock == pytest.approx(0.0373 / 0.134, rel=1e-6)
    assert abaixo_lock


# ----------------------------------------------------------------------
# Pinning
# ----------------------------------------------------------------------

def _opinion_box():
    return StateBox((-5.0,), (5.0,), counts=201)


def test_pinning_de_no_unico(certificates):
    """c_f = −0.5 + 1 = 0.5 e λ̃ = σ_r = 2: c̄² = 1.5"""
    net = NetworkSpec(1, (), 1.0, 2.0, frozenset({0}))
    vf = OpinionParams(d=0.5).intrinsic()
    cert = certificates.check_pinning(net, vf, _opinion_box(), [0.0])
    assert cert.verdict == HOLDS
    assert cert.constants["c_f"] == pytest.approx(0.5)
    assert cert.constants["c_bar_sq"] == pytest.approx(1.5)
    assert cert.constants["K"] == 1.0
    assert cert.details["spectrum"] == pytest.approx([2.0])
    assert cert.details["mu_max_admissible"] == pytest.approx(0.4)


def test_pinning_com_componente_sem_controle(certificates):
    """Nó isolado sem pinning: λ̃ = 0 e a condição falha"""
    net = NetworkSpec(2, (), 1.0, 2.0, frozenset({0}))
    vf = OpinionParams(d=0.5).intrinsic()
    cert = certificates.check_pinning(net, vf, _opinion_box(), [0.0])
    assert cert.verdict == FAILS
    assert cert.details["lambda_min"] == pytest.approx(0.0, abs=1e-12)


def test_pinning_depende_da_graininess(certificates):
    """Dois nós, λ̃ = 2 ± √2: vale em μ = 0 e falha em μ = 0.5"""
    net = NetworkSpec(2, ((0, 1),), 1.0, 2.0, frozenset({0}))
    vf = OpinionParams(d=0.5).intrinsic()
    continuo = certificates.check_pinning(net, vf, _opinion_box(), [0.0])
    assert continuo.verdict == HOLDS
    assert continuo.constants["c_bar_sq"] == pytest.approx(2.0 - np.sqrt(2.0) - 0.5, abs=1e-9)
    discreto = certificates.check_pinning(net, vf, _opinion_box(), [0.5])
    assert discreto.verdict == FAILS
    assert discreto.witness["lambda"] == pytest.approx(2.0 + np.sqrt(2.0))


def test_espectro_completo_igual_ao_atalho_em_mu_zero(certificates):
    """Γ = I, μ = 0: c̄² = λ̃_min − c_f coincide com −(atalho contínuo) numa rede de vários nós"""
    net = NetworkSpec(6, ((0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (1, 4)), 1.0, 2.0, frozenset({0, 3}))
    vf = OpinionParams(d=0.5).intrinsic()
    cert = certificates.check_pinning(net, vf, _opinion_box(), [0.0])
    atalho = certificates.pinning_shortcut(net, cert.constants["c_f"])
    assert cert.constants["c_bar_sq"] == pytest.approx(-atalho, abs=1e-9)
    assert cert.constants["c_bar_sq"] == pytest.approx(cert.details["lambda_min"] - 0.5, abs=1e-9)
    assert cert.witness["eigen_index"] == 0


def test_pinning_na_rede_watts_strogatz(certificates):
    """Rede de 100 nós com 45 fixados: vale em μ = 0 com c̄² = λ̃_min − c_f"""
    config = dict(OPINION_NETWORK)
    config["watts_strogatz"] = dict(config["watts_strogatz"], seed=7)
    net = network_from_config(config)
    assert len(net.pinned) == 45
    vf = OpinionParams(d=0.5).intrinsic()
    cert = certificates.check_pinning(net, vf, _opinion_box(), [0.0])
    espectro = cert.details["spectrum"]
    assert len(espectro) == 100
    assert espectro == sorted(espectro)
    assert cert.constants["c_f"] == pytest.approx(0.5)
    assert cert.constants["c_bar_sq"] == pytest.approx(espectro[0] - 0.5, abs=1e-9)
    assert cert.verdict == HOLDS
    assert certificates.pinning_shortcut(net, 0.5) == pytest.approx(-cert.constants["c_bar_sq"], abs=1e-9)


def test_atalho_continuo_e_mu_max(certificates):
    net = NetworkSpec(1, (), 1.0, 2.0, frozenset({0}))
    assert certificates.pinning_shortcut(net, 0.5) == pytest.approx(-1.5)
    assert certificates.admissible_mu_max([2.0], 0.5) == pytest.approx(0.4)
    assert certificates.admissible_mu_max([0.3, 2.0], 0.5) == 0.0
    with pytest.raises(DomainError):
        certificates.admissible_mu_max([2.0], 0.5, gamma=0.0)


def test_limite_do_modelo_de_opinioes(certificates):
    assert certificates.check_opinion_bound(0.5, 1.0, 1.0) == pytest.approx(0.5)
    assert certificates.check_opinion_bound(0.5, 1.0, 0.25) == pytest.approx(0.5)
    assert certificates.check_opinion_bound(0.5, 0.2, 0.5) == pytest.approx(-0.3)
    with pytest.raises(DomainError):
        certificates.check_opinion_bound(0.5, 1.0, 0.0)


# ----------------------------------------------------------------------
# Lyapunov
# ----------------------------------------------------------------------

def test_lyapunov_decaimento_linear(certificates):
    """f = −x: D⁺V^Δ = −V vale, mas o limite −(c̄²/μ)V em μ = 0.5 não"""
    box = StateBox((-1.0, -1.0), (1.0, 1.0), counts=3)
    cert = certificates.check_lyapunov(_linear_field(-np.eye(2)), box, [0.0, 0.5], TWO,
                                       equilibrium=[0.0, 0.0], n_states=50)
    assert cert.verdict == HOLDS
    assert cert.constants["c_bar_sq"] == pytest.approx(1.0)
    assert cert.details["literal_scattered_bound_violations"] > 0
    assert cert.details["lower_bound_violations"] == 0


def test_lyapunov_sem_contracao_e_inconclusivo(certificates):
    box = StateBox((-1.0,), (1.0,), counts=3)
    cert = certificates.check_lyapunov(_linear_field([[1.0]]), box, [0.0], TWO)
    assert cert.verdict == INCONCLUSIVE


def test_lyapunov_em_sistemas_contrativos(certificates):
    rng = np.random.default_rng(77)
    for caso in range(20):
        n = int(rng.integers(2, 5))
        vf = LinearSystem.constant(contracting_matrix(rng, n)).as_vector_field()
        box = StateBox((-1.0,) * n, (1.0,) * n, counts=2)
        cert = certificates.check_lyapunov(vf, box, [0.0, 0.1], TWO, equilibrium=np.zeros(n),
                                           n_states=30, seed=caso)
        assert cert.verdict == HOLDS, (caso, cert.witness)


def test_lyapunov_exige_campo_autonomo(certificates):
    vf = LinearSystem(lambda t: [[-1.0 - math.sin(t) ** 2]]).as_vector_field()
    with pytest.raises(DomainError):
        certificates.check_lyapunov(vf, StateBox((-1.0,), (1.0,), counts=3), [0.0], TWO)
    assert LinearSystem.constant([[-1.0]]).as_vector_field().autonomous
