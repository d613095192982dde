#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Testes da serialização: CSV, JSON, escrita atômica e determinismo
"""

import json
import math

import numpy as np
import pytest

from src.services.report_service import ReportService, fmt, to_jsonable
from src.services.solver_service import LinearSystem


@pytest.fixture
def trajetoria(solver, timescales):
    ts = timescales.make_timescale({"kind": "p_ab", "a": 1.0, "b": 0.24, "window_end": 3.0})
    return solver.integrate(ts, LinearSystem.constant([[-1.0, 0.0], [0.0, -2.0]]), 0.0, [1.0, 1.0], ts.end, 0.1)


def test_csv_da_trajetoria(tmp_path, trajetoria):
    destino = ReportService(tmp_path).write_trajectory("trajectory", trajetoria)
    linhas = destino.read_text(encoding="utf-8").splitlines()
    assert linhas[0] == "t,mu,x1,x2"
    dados = np.genfromtxt(destino, delimiter=",", names=True)
    assert dados["t"] == pytest.approx(trajetoria.times, abs=0)
    assert dados["x2"] == pytest.approx(trajetoria.states[:, 1], abs=0)
    assert dados["mu"][-1] == 0.0


def test_json_da_trajetoria(tmp_path, trajetoria):
    destino = ReportService(tmp_path).write_trajectory("trajectory", trajetoria, "json")
    documento = json.loads(destino.read_text(encoding="utf-8"))
    assert documento["fields"] == ["t", "mu", "x1", "x2"]
    assert len(documento["samples"]) == len(trajetoria)
    assert documento["meta"]["solver"] == "rk4+exact-jump"


def test_escrita_atomica_sem_temporarios(tmp_path):
    relatorios = ReportService(tmp_path / "saida")
    relatorios.write_text("a.txt", "primeiro\n")
    relatorios.write_text("a.txt", "segundo\n")
    assert [p.name for p in (tmp_path / "saida").iterdir()] == ["a.txt"]
    assert (tmp_path / "saida" / "a.txt").read_text(encoding="utf-8") == "segundo\n"


def test_nao_finitos_viram_null(tmp_path):
    destino = ReportService(tmp_path).write_json("c", {"a": math.inf, "b": np.nan, "c": np.float64(0.5)})
    assert json.loads(destino.read_text(encoding="utf-8")) == {"a": None, "b": None, "c": 0.5}


def test_conversao_para_json():
    assert to_jsonable({"s": frozenset({3, 1}), "v": np.array([1.0, 2.0]), "b": np.bool_(True)}) == {
        "s": [1, 3], "v": [1.0, 2.0], "b": True,
    }
    assert fmt(0.1) == "0.10000000000000001"


def test_saida_deterministica(tmp_path, trajetoria):
    a = ReportService(tmp_path / "a").write_trajectory("trajectory", trajetoria)
    b = ReportService(tmp_path / "b").write_trajectory("trajectory", trajetoria)
    assert a.read_bytes() == b.read_bytes()


def test_script_gnuplot(tmp_path):
    destino = ReportService(tmp_path).write_gnuplot("traj", "trajetória", "traj.csv", ["x1", "x2"], logscale_y=True)
    texto = destino.read_text(encoding="utf-8")
    assert destino.name == "traj.gp"
    assert "set logscale y" in texto
    assert "'traj.csv' using 1:'x1'" in texto and "'traj.csv' using 1:'x2'" in texto
