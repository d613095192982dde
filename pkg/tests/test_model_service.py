#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testes dos modelos: SIQR, parâmetros de lock-down, redes, pinning guloso,
dinâmica de opiniões e exemplos lineares
"""

import logging
import math

import numpy as np
import pytest

from src.services.erros import AssumptionViolationError, DimensionError, InvalidSpecError
from src.services.linalg_service import TWO_NORM
from src.services.measure_service import MeasureKind
from src.services.model_service import (
    NetworkSpec, OpinionParams, SIQRParams, disease_free_solution, example_systems,
    load_edge_list, lockdown_closed_condition, lockdown_params, network_from_config,
    opinion_equilibrium, opinion_network_field, representative_params, select_pinned_nodes,
    siqr_field, stubborn_reference, watts_strogatz,
)
from src.services.solver_service import finite_difference_jacobian

PATH9 = tuple((i, i + 1) for i in range(8))


# ----------------------------------------------------------------------
# SIQR
# ----------------------------------------------------------------------

def test_parametros_siqr_invalidos():
    with pytest.raises(InvalidSpecError) as erro:
        SIQRParams(Lambda=10.0, beta=-0.1, d=1.0, zeta=1.0, eps=0.1, gamma=0.1)
    assert erro.value.field == "beta"
    with pytest.raises(AssumptionViolationError):
        SIQRParams(Lambda=10.0, beta=0.1, d=0.0, zeta=1.0, eps=0.1, gamma=0.1)
    with pytest.raises(InvalidSpecError) as erro:
        SIQRParams.from_dict({"Lambda": 10.0, "beta": 0.1})
    assert erro.value.field == "d"
    with pytest.raises(InvalidSpecError):
        SIQRParams.from_dict({**representative_params().to_dict(), "kappa": 1.0})
    with pytest.raises(InvalidSpecError) as erro:
        SIQRParams.from_dict({**representative_params().to_dict(), "Lambda": "abc"})
    assert erro.value.field == "params.Lambda"
    with pytest.raises(InvalidSpecError):
        SIQRParams.from_dict({**representative_params().to_dict(), "beta": True})
    with pytest.raises(InvalidSpecError):
        SIQRParams.from_dict([10.0, 0.1])


def test_parametros_variaveis_no_tempo():
    p = SIQRParams(Lambda=10.0, beta=lambda t: 0.1 + 0.05 * math.sin(t), d=1.0, zeta=1.0, eps=0.1, gamma=0.1)
    assert not p.is_constant
    assert p.at(0.0)["beta"] == pytest.approx(0.1)
    assert p.bound("beta", np.linspace(0, 2 * math.pi, 101), max) == pytest.approx(0.15)
    with pytest.raises(InvalidSpecError):
        p.to_dict()


def test_jacobiana_siqr_confere_com_diferencas(rng):
    vf = siqr_field(representative_params())
    for _ in range(10):
        x = rng.uniform(0.0, 10.0, size=4)
        assert np.allclose(vf.jacobian(0.0, x), finite_difference_jacobian(vf, 0.0, x), atol=1e-6)


def test_solucao_livre_de_doenca():
    p = representative_params()
    x_d = disease_free_solution(p, 0.0)
    assert x_d.tolist() == [10.0, 0.0, 0.0, 0.0]
    assert np.allclose(siqr_field(p)(0.0, x_d), 0.0)


def test_hipoteses_de_trabalho_na_escala(timescales):
    hz = timescales.make_timescale({"kind": "hz", "h": 0.5, "window_end": 3.0})
    with pytest.raises(AssumptionViolationError):
        siqr_field(representative_params(), hz)
    pab = timescales.make_timescale({"kind": "p_ab", "a": 1.0, "b": 0.24, "window_end": 3.0})
    assert siqr_field(representative_params(), pab).name == "siqr"


@pytest.mark.parametrize("spec", [
    {"kind": "p_ab", "a": 1.0, "b": 0.24, "window_end": 31.0},
    {"kind": "random_discrete", "c": 0.24, "seed": 2024, "window_end": 30.0},
])
def test_siqr_converge_para_livre_de_doenca(solver, timescales, spec):
    p = representative_params()
    ts = timescales.make_timescale(spec)
    traj = solver.integrate(ts, siqr_field(p, ts), ts.start, [5.0, 5.0, 0.0, 0.0], ts.end)
    assert np.all(traj.states >= -1e-12)
    assert np.linalg.norm(traj.final - disease_free_solution(p, ts.end)) < 1e-3


def test_parametros_de_lockdown():
    p = lockdown_params()
    assert p.beta == pytest.approx(0.0373 / 6e7)
    assert p.Lambda == pytest.approx(0.0373)
    assert p.d == pytest.approx(p.beta)
    assert lockdown_params(lockdown=False).beta == pytest.approx(0.373 / 6e7)
    with pytest.raises(InvalidSpecError):
        lockdown_params(k_d=0.0)


def test_condicao_fechada_do_lockdown():
    lado, ok = lockdown_closed_condition(1.0)
    assert lado == pytest.approx(0.0373) and ok
    assert not lockdown_closed_condition(0.2)[1]
    assert not lockdown_closed_condition(1.0, lockdown=False)[1]


# ----------------------------------------------------------------------
# Redes e pinning
# ----------------------------------------------------------------------

def test_watts_strogatz_deterministico():
    a = watts_strogatz(100, 2, 0.7, 7)
    assert a == watts_strogatz(100, 2, 0.7, 7)
    assert len(a) == 100
    assert all(u < v for u, v in a)
    with pytest.raises(InvalidSpecError):
        watts_strogatz(100, 3, 0.7, 7)
    with pytest.raises(InvalidSpecError):
        watts_strogatz(100, 2, 1.5, 7)


def test_pinning_guloso_no_caminho():
    """Caminho de 9 nós: {1, 4, 7} domina o grafo"""
    assert select_pinned_nodes(9, PATH9, 3) == frozenset({1, 4, 7})
    assert select_pinned_nodes(9, PATH9, 5) == frozenset({1, 2, 3, 4, 7})


def test_pinning_guloso_cortado_avisa(caplog):
    with caplog.at_level(logging.WARNING):
        escolhidos = select_pinned_nodes(9, PATH9, 2)
    assert escolhidos == frozenset({1, 4})
    assert "cortando" in caplog.text


def test_pinning_cobre_cada_componente():
    escolhidos = select_pinned_nodes(6, ((0, 1), (1, 2), (3, 4)), 3)
    assert 1 in escolhidos
    assert escolhidos & {3, 4}
    assert 5 in escolhidos


def test_l_tilde():
    net = NetworkSpec(3, ((1, 0), (1, 2)), 2.0, 3.0, frozenset({0}))
    esperado = 2.0 * np.array([[1, -1, 0], [-1, 2, -1], [0, -1, 1]]) + np.diag([3.0, 0.0, 0.0])
    assert np.allclose(net.l_tilde(), esperado)
    assert net.edges == ((0, 1), (1, 2))
    assert net.to_dict()["pinned"] == [0]


def test_rede_invalida():
    with pytest.raises(DimensionError):
        NetworkSpec(2, ((0, 2),), 1.0, 1.0)
    with pytest.raises(InvalidSpecError):
        NetworkSpec(2, ((1, 1),), 1.0, 1.0)
    with pytest.raises(InvalidSpecError):
        NetworkSpec(2, ((0, 1),), 0.0, 1.0)
    with pytest.raises(DimensionError):
        NetworkSpec(2, ((0, 1),), 1.0, 1.0, frozenset({5}))


def test_rede_a_partir_da_configuracao():
    config = {"watts_strogatz": {"n": 30, "k": 2, "p": 0.3}, "n_pinned": 10, "sigma": 5.0, "sigma_r": 10.0}
    a = network_from_config(config, seed=3)
    assert a == network_from_config(config, seed=3)
    assert len(a.pinned) == 10
    explicita = network_from_config({"edges": [[0, 1]], "n_nodes": 2, "pinned": [0], "sigma": 1, "sigma_r": 2})
    assert explicita.n_nodes == 2 and explicita.pinned == frozenset({0})


@pytest.mark.parametrize("config, campo", [
    ({"sigma": 1, "sigma_r": 1, "pinned": [0]}, "network"),
    ({"edges": [[0, 1]], "sigma": 1, "sigma_r": 1, "pinned": [0]}, "n_nodes"),
    ({"edges": [[0, 1]], "n_nodes": 2, "sigma": 1, "sigma_r": 1}, "pinned"),
    ({"edges": [[0, 1]], "n_nodes": 2, "pinned": [0], "sigma": 1}, "sigma_r"),
    ({"watts_strogatz": {"n": 10, "k": 2}, "pinned": [0], "sigma": 1, "sigma_r": 1}, "watts_strogatz.p"),
])
def test_configuracao_de_rede_incompleta(config, campo):
    with pytest.raises(InvalidSpecError) as erro:
        network_from_config(config)
    assert erro.value.field == campo


def test_lista_de_arestas(tmp_path):
    arquivo = tmp_path / "rede.txt"
    arquivo.write_text("0 1\n2 1\n")
    assert load_edge_list(arquivo) == ((0, 1), (1, 2))
    with pytest.raises(InvalidSpecError):
        load_edge_list(tmp_path / "inexistente.txt")


# ----------------------------------------------------------------------
# Opiniões
# ----------------------------------------------------------------------

def test_parametros_de_opiniao():
    op = OpinionParams(d=0.5)
    assert op.S_bar == pytest.approx(1.0)
    with pytest.raises(InvalidSpecError):
        OpinionParams(d=1.0)
    with pytest.raises(InvalidSpecError):
        OpinionParams(sigmoid="relu")


def test_equilibrio_da_dinamica_intrinseca():
    """atan(x̄) = 0.5·x̄"""
    menos, zero, mais = opinion_equilibrium(OpinionParams(d=0.5))
    assert mais == pytest.approx(2.3311, abs=1e-4)
    assert menos == -mais and zero == 0.0
    assert math.atan(mais) == pytest.approx(0.5 * mais, abs=1e-12)


def test_referencia_exata_nas_amostras(solver, timescales):
    op = OpinionParams(d=0.5)
    ts = timescales.make_timescale({"kind": "p_ab", "a": 1.0, "b": 0.24, "window_end": 5.0})
    ref = stubborn_reference(op, ts, 0.0, ts.end, solver, 0.1)
    tempos, estados = ref.trajectory.times, ref.trajectory.states[:, 0]
    assert all(ref(float(t)) == float(x) for t, x in zip(tempos, estados))
    meio = 0.5 * (tempos[0] + tempos[1])
    assert min(estados[0], estados[1]) - 1e-9 <= ref(meio) <= max(estados[0], estados[1]) + 1e-9
    assert estados[-1] > estados[0]


def test_campo_da_rede_de_opinioes(rng):
    net = NetworkSpec(4, ((0, 1), (1, 2), (2, 3)), 1.0, 2.0, frozenset({0}))
    vf = opinion_network_field(net, OpinionParams(d=0.5), lambda t: 1.0)
    x = rng.uniform(-2.0, 2.0, size=4)
    assert np.allclose(vf.jacobian(0.0, x), finite_difference_jacobian(vf, 0.0, x), atol=1e-6)
    with pytest.raises(DimensionError):
        vf(0.0, np.zeros(3))
    # sincronizado com a referência no equilíbrio
    xbar = opinion_equilibrium(OpinionParams(d=0.5))[2]
    parado = opinion_network_field(net, OpinionParams(d=0.5), lambda t: xbar)
    assert np.allclose(parado(0.0, np.full(4, xbar)), 0.0, atol=1e-12)


# ----------------------------------------------------------------------
# Exemplos lineares
# ----------------------------------------------------------------------

def test_exemplos_lineares(measures, timescales):
    exemplos = example_systems()
    assert set(exemplos) == {"example1", "example2"}
    A1 = exemplos["example1"].system.A_of_t
    for t in np.linspace(0.0, 2.0 * math.pi, 50):
        assert measures.matrix_measure(A1(t), 0.0, MeasureKind(TWO_NORM)) <= -1.0 + 1e-12
    ts = timescales.make_timescale(exemplos["example2"].timescale)
    assert ts.mu_bar() == pytest.approx(0.2)
    assert ts.end == 10.0
