"""Acceptance criteria, one test per criterion.

Each test carries a ``criterion`` marker; ``conftest.py`` prints one
PASS/FAIL line per criterion at the end of the run. Run directly with
``python tests/test_acceptance.py`` for just these checks.
"""
import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from cainlab import bsc, cbnet, ledger, thermal
from cainlab.info import vn_entropy
from cainlab.sampling import random_density_matrix, random_hermitian
from cainlab.szilard import (
    c1_chain,
    c1_time_reversal_crosscheck,
    embed_c1,
    embed_c2,
    random_c1_params,
    random_c2_params,
    random_q1_params,
    random_q2_params,
    table_c1,
    table_c2,
    table_q1,
    table_q2,
    work_report,
)

criterion = pytest.mark.criterion


def _report(label, value):
    print(f"  {label}: {value:.3e}")


@criterion(1, "thermal identity E = TS + F on dims 2/4/8 x 13 betas within 1e-10, < 5 s")
def test_c01_thermal_identity():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for d in (2, 4, 8):
        h = thermal.Hamiltonian(random_hermitian(d, rng))
        for b in np.logspace(-3, 3, 13):
            lhs = thermal.mean_energy(h, b)
            rhs = thermal.thermal_entropy(h, b) / b + thermal.free_energy(h, b)
            worst = max(worst, abs(lhs - rhs))
    elapsed = time.perf_counter() - start
    _report("max |E - TS - F|", worst)
    assert worst <= 1e-10
    assert elapsed < 5.0


@criterion(2, "thermal inequalities hold with slack >= -1e-10 over 1000 pairs each, < 60 s")
def test_c02_inequality_sweep():
    rng = np.random.default_rng(102)
    start = time.perf_counter()
    slacks = {k: math.inf for k in ("pb", "s_cap", "f_cap", "nfl", "lower", "upper", "super")}

    def draw():
        d = int(rng.integers(2, 9))
        return d, random_hermitian(d, rng), random_hermitian(d, rng), float(10 ** rng.uniform(-1, 1))

    for _ in range(1000):
        d, h1, h2, b = draw()
        slacks["pb"] = min(slacks["pb"], thermal.peierls_bogoliubov_check(h1, h2, b))
        s_sl, f_sl = thermal.entropy_bounds_check(h1, b, random_density_matrix(d, rng))
        slacks["s_cap"] = min(slacks["s_cap"], s_sl)
        slacks["f_cap"] = min(slacks["f_cap"], f_sl)
        slacks["nfl"] = min(slacks["nfl"], thermal.no_free_lunch_check(h1, b, random_density_matrix(d, rng)))
        s = thermal.free_energy_sandwich_check(h1, h2, b)
        slacks["lower"] = min(slacks["lower"], s.lower)
        slacks["upper"] = min(slacks["upper"], s.upper)
        slacks["super"] = min(slacks["super"], s.superadditivity)
    elapsed = time.perf_counter() - start
    for k, v in slacks.items():
        _report(f"min slack {k}", v)
    assert min(slacks.values()) >= -1e-10
    assert elapsed < 60.0


@criterion(3, "finite-difference derivatives of S, E, F match the energy variance within 1e-5")
def test_c03_derivatives():
    rng = np.random.default_rng(103)
    worst = 0.0
    for d in (2, 3, 4, 8):
        for _ in range(3):
            rep = thermal.check_energy_entropy_monotone(random_hermitian(d, rng), np.logspace(-1, 1, 13))
            worst = max(worst, rep.max_rel_error)
            assert rep.monotone
    _report("max relative error", worst)
    assert worst <= 1e-5


@criterion(4, "high- and low-temperature limits of S and F")
def test_c04_limits():
    rng = np.random.default_rng(104)
    for d in (2, 4, 8):
        h = thermal.Hamiltonian(random_hermitian(d, rng))
        assert abs(thermal.thermal_entropy(h, 1e-9) - math.log(d)) <= 1e-5
        gaps = rng.uniform(0.2, 1.0, d - 1)
        gapped = thermal.Hamiltonian(np.diag(np.concatenate([[-0.3], -0.3 + np.cumsum(gaps)])))
        assert thermal.thermal_entropy(gapped, 1e6) <= 1e-4
        assert abs(thermal.free_energy(gapped, 1e6) - gapped.ground_energy) <= 1e-4


@criterion(5, "reversal: ratio identity, double reversal and closed-form grid within 1e-12")
def test_c05_reversal():
    rng = np.random.default_rng(105)
    ratio = dbl = 0.0
    for dim in (2, 3):
        for _ in range(200):
            spec = cbnet.random_chain(dim, 2, rng)
            ratio = max(ratio, cbnet.ratio_identity_check(spec))
            dbl = max(dbl, cbnet.double_reversal_error(spec), cbnet.joint_reversal_error(spec))
    grid = np.linspace(0.0, 1.0, 5)
    closed = max(
        c1_time_reversal_crosscheck(bsc.c1_params_bsc(l, a, b)).max_abs_error for l in grid for a in grid for b in grid
    )
    _report("ratio identity", ratio)
    _report("double reversal", dbl)
    _report("closed-form grid", closed)
    assert ratio <= 1e-12 and dbl <= 1e-12 and closed <= 1e-12


@criterion(6, "Sigma-hat mean equals the conditional-entropy change; non-negative on the doubly stochastic family")
def test_c06_sigma_hat():
    rng = np.random.default_rng(106)
    family = [cbnet.random_cain_chain(2, 2, 2, rng) for _ in range(200)]
    generic = [
        cbnet.StructuredChainSpec(cbnet.random_chain(6, 2, rng), (("x", 2), ("theta", 3)), ("theta",))
        for _ in range(50)
    ]
    engine = [c1_chain(bsc.c1_params_bsc(0.5, 0.8, 0.9), th) for th in (("s", "sigma"), ("sigma",), ("s",))]
    worst, family_min, devs = 0.0, math.inf, {}
    for name, specs in (("doubly stochastic", family), ("generic", generic), ("engine", engine)):
        d = []
        for spec in specs:
            rep = cbnet.estimate_sigma(spec)
            worst = max(worst, abs(rep.mean_sigma - cbnet.conditional_entropy_change(spec)))
            d.append(abs(rep.exp_deviation))
            if name == "doubly stochastic":
                family_min = min(family_min, rep.mean_sigma)
        devs[name] = (float(np.mean(d)), float(np.max(d)))
    _report("max |<Sigma> - dH(Theta|X)|", worst)
    _report("min <Sigma> on doubly stochastic family", family_min)
    for name, (mean, mx) in devs.items():
        print(f"  |<exp(-Sigma)> - 1| on {name} chains: mean {mean:.3e}, max {mx:.3e} (reported only)")
    assert worst <= 1e-10
    assert family_min >= -1e-9


@criterion(7, "Szilard tables: cells match closed forms and cycles close within 1e-10, 500 instances per case, < 120 s")
def test_c07_szilard_tables():
    rng = np.random.default_rng(107)
    start = time.perf_counter()
    for name, make, table in (
        ("C1", random_c1_params, table_c1),
        ("Q1", random_q1_params, table_q1),
        ("C2", random_c2_params, table_c2),
        ("Q2", random_q2_params, table_q2),
    ):
        cell = cyc = 0.0
        for _ in range(500):
            t = table(make(rng))
            cell = max(cell, t.max_cell_error())
            cyc = max(cyc, t.max_cycle_sum())
        _report(f"{name} cell error", cell)
        _report(f"{name} cycle sum", cyc)
        assert cell <= 1e-10 and cyc <= 1e-10
    assert time.perf_counter() - start < 120.0


@criterion(8, "quantum nets reproduce the classical tables for embedded kernels within 1e-10")
def test_c08_classical_embedding():
    rng = np.random.default_rng(108)
    e1 = e2 = 0.0
    for _ in range(100):
        p = random_c1_params(rng)
        q, c = table_q1(embed_c1(p)), table_c1(p)
        e1 = max(e1, np.abs(q.direct - c.direct).max(), np.abs(q.closed_form - c.closed_form).max())
        p = random_c2_params(rng)
        q, c = table_q2(embed_c2(p)), table_c2(p)
        e2 = max(e2, np.abs(q.direct - c.direct).max(), np.abs(q.closed_form - c.closed_form).max())
    _report("Q1 vs C1", e1)
    _report("Q2 vs C2", e2)
    assert e1 <= 1e-10 and e2 <= 1e-10


@criterion(9, "binary symmetric channel identities within 1e-14, monotone grid, table equals pipeline, < 30 s")
def test_c09_bsc():
    rng = np.random.default_rng(109)
    start = time.perf_counter()
    sp = bsc.sym_product
    worst = 0.0
    for a, b, c in rng.uniform(0.0, 1.0, size=(10_000, 3)):
        worst = max(
            worst,
            abs(sp(a, b) - sp(b, a)),
            abs(sp(sp(a, b), c) - sp(a, sp(b, c))),
            np.abs(bsc.m_matrix(b) @ bsc.m_matrix(a) - bsc.m_matrix(sp(b, a))).max(),
            np.abs(bsc.m_matrix(a) @ bsc.v_vector(c) - bsc.v_vector(sp(a, c))).max(),
        )
    g = np.linspace(0.0, 1.0, 21)
    mono = min(bsc.h_monotone_check(a, l) for a in g for l in g)
    table = max(bsc.c1_bsc_table(l, a, b).max_cell_error() for l in g for a in g for b in g)
    elapsed = time.perf_counter() - start
    _report("identities", worst)
    _report("min monotone slack", mono)
    _report("table vs pipeline", table)
    assert worst <= 1e-14 and mono >= -1e-12 and table <= 1e-10
    assert elapsed < 30.0


@criterion(10, "ledger: engine example exact, Carnot area within 1e-12, gas-work quadrature within 1e-8")
def test_c10_ledger():
    e = ledger.heat_engine_cycle(400.0, 300.0, 3.0)
    assert e.work == 1.0 and e.efficiency == 1.0 / 3.0 and e.dQ_h == -4.0
    r = ledger.carnot_cycle_check(400.0, 300.0, 0.0, 1.0)
    assert abs(r.net_work - (400.0 - 300.0) * 1.0) <= 1e-12 and r.ok
    rng = np.random.default_rng(110)
    for _ in range(200):
        t_c = rng.uniform(1.0, 50.0)
        t_h = t_c + rng.uniform(0.1, 50.0)
        s0, w = rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)
        r = ledger.carnot_cycle_check(t_h, t_c, s0, s0 + w)
        assert abs(r.net_work - (t_h - t_c) * w) <= 1e-12
    rep = work_report(table_c1(bsc.c1_params_bsc(0.5, 1.0, 1.0)), 1.7)
    bridge = ledger.volume_work_bridge(rep)
    assert bridge and max(err for _, _, err in bridge) <= 1e-8
    assert ledger.ideal_gas_work(1.7, 1.0, 2.0).error <= 1e-8


@criterion(11, "CAIN free-energy bound with slack >= -1e-9 on 200 generated dynamics; counter-dynamics reported")
def test_c11_cain_bound():
    rng = np.random.default_rng(111)
    worst = math.inf
    for _ in range(200):
        split, beta, rho0, rho_t = thermal.random_cain_instance(rng, nx=2, ntheta=3)
        rep = thermal.cain_bound_report(split, beta, rho0, rho_t)
        worst = min(worst, rep.slack)
        assert not rep.violation
    _report("min bound slack", worst)
    assert worst >= -1e-9
    counter = thermal.cain_bound_report(*thermal.counter_dynamics_instance())
    print(f"  counter-dynamics: cain_delta {counter.cain_delta:.4f}, bound slack {counter.slack:.4f}")
    assert counter.cain_delta < 0


@criterion(12, "verify --suite all --seed 42 is byte-identical across two runs")
def test_c12_determinism():
    env = dict(os.environ)
    src = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src")
    env["PYTHONPATH"] = src + os.pathsep + env.get("PYTHONPATH", "")
    cmd = [sys.executable, "-m", "cainlab", "verify", "--suite", "all", "--seed", "42"]
    runs = [subprocess.run(cmd, capture_output=True, env=env, timeout=600) for _ in range(2)]
    for r in runs:
        assert r.returncode == 0, r.stderr.decode()
    assert runs[0].stdout == runs[1].stdout
    assert b'"status": "pass"' in runs[0].stdout


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
