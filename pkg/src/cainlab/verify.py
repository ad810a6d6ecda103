"""Verification suites: seeded sweeps over every module's identities and
inequalities, collected into a deterministic report."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import bsc, cbnet, ledger, thermal
from .config import SAMPLES, TOLERANCES
from .info import vn_entropy
from .sampling import random_density_matrix, random_hermitian
from .szilard import (
    c1_chain,
    c1_time_reversal_crosscheck,
    embed_c1,
    embed_c2,
    random_c1_params,
    random_c2_params,
    random_q1_params,
    random_q2_params,
    rho2_by_contraction,
    rho3_unreduced,
    build_q1,
    build_q2,
    table_c1,
    table_c2,
    table_q1,
    table_q2,
    work_report,
)

SUITES = ("thermal", "cain", "reversal", "szilard", "bsc", "ledger")


@dataclass(frozen=True)
class Check:
    name: str
    anchor: str
    status: str  # "pass", "fail" or "reported"
    value: float
    tolerance: float | None
    kind: str  # "error" (value <= tol), "slack" (value >= -tol) or "reported"

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "status": self.status,
            "kind": self.kind,
            "value": self.value,
            "tolerance": self.tolerance,
        }


@dataclass
class VerificationReport:
    suite: str
    seed: int
    checks: list
    wall_time: float = field(default=0.0, compare=False)

    def __post_init__(self):
        self.checks = sorted(self.checks, key=lambda c: c.name)

    @property
    def totals(self) -> dict:
        out = {"pass": 0, "fail": 0, "reported": 0}
        for c in self.checks:
            out[c.status] += 1
        return out

    @property
    def passed(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self, timing: bool = False) -> dict:
        d = {
            "suite": self.suite,
            "seed": self.seed,
            "status": "pass" if self.passed else "fail",
            "totals": self.totals,
            "checks": [c.to_dict() for c in self.checks],
        }
        if timing:
            d["wall_time"] = self.wall_time
        return d

    def to_markdown(self) -> str:
        lines = [
            f"# Verification: {self.suite} (seed {self.seed}): {'PASS' if self.passed else 'FAIL'}",
            "",
            "| check | status | value | tolerance | anchor |",
            "|---|---|---|---|---|",
        ]
        for c in self.checks:
            tol = "" if c.tolerance is None else f"{c.tolerance:.1e}"
            lines.append(f"| {c.name} | {c.status} | {c.value:.6g} | {tol} | {c.anchor} |")
        t = self.totals
        lines += ["", f"pass {t['pass']}, fail {t['fail']}, reported {t['reported']}"]
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        rows = ["name,status,kind,value,tolerance,anchor"]
        for c in self.checks:
            tol = "" if c.tolerance is None else repr(c.tolerance)
            rows.append(f'{c.name},{c.status},{c.kind},{c.value!r},{tol},"{c.anchor}"')
        return "\n".join(rows) + "\n"


class _Collector:
    def __init__(self, prefix: str, tolerances: dict):
        self.prefix = prefix
        self.tol = tolerances
        self.checks: list[Check] = []

    def error(self, name, anchor, value, tol_key):
        tol = self.tol[tol_key]
        value = float(value)
        ok = value <= tol
        self.checks.append(Check(f"{self.prefix}.{name}", anchor, "pass" if ok else "fail", value, tol, "error"))

    def slack(self, name, anchor, value, tol_key):
        tol = self.tol[tol_key]
        value = float(value)
        ok = value >= -tol
        self.checks.append(Check(f"{self.prefix}.{name}", anchor, "pass" if ok else "fail", value, tol, "slack"))

    def reported(self, name, anchor, value):
        self.checks.append(Check(f"{self.prefix}.{name}", anchor, "reported", float(value), None, "reported"))


# ---------------------------------------------------------------------------


def _thermal(rng, c: _Collector):
    n_pairs = SAMPLES["thermal_pairs"]
    betas = np.logspace(-3, 3, SAMPLES["thermal_betas"])
    err = 0.0
    for d in (2, 4, 8):
        h = thermal.Hamiltonian(random_hermitian(d, rng))
        for b in betas:
            e = thermal.mean_energy(h, b)
            rhs = thermal.thermal_entropy(h, b) / b + thermal.free_energy(h, b)
            err = max(err, abs(e - rhs))
    c.error("energy_equals_ts_plus_f", "internal energy equals T S plus F", err, "thermal_identity")

    def pair(rng):
        d = int(rng.integers(2, 9))
        return d, random_hermitian(d, rng), float(10 ** rng.uniform(-1, 1))

    pb = min(
        thermal.peierls_bogoliubov_check(h1, random_hermitian(d, rng), b)
        for d, h1, b in (pair(rng) for _ in range(n_pairs))
    )
    c.slack("peierls_bogoliubov", "Peierls-Bogoliubov inequality", pb, "thermal_inequality")

    s_caps, f_caps, nfl = [], [], []
    for _ in range(n_pairs):
        d, h, b = pair(rng)
        rho = random_density_matrix(d, rng)
        s_sl, f_sl = thermal.entropy_bounds_check(h, b, rho)
        s_caps.append(s_sl)
        f_caps.append(f_sl)
        nfl.append(thermal.no_free_lunch_check(h, b, random_density_matrix(d, rng)))
    c.slack("entropy_capping_bound", "entropy bounded by its capping function", min(s_caps), "thermal_inequality")
    c.slack("free_energy_capping_bound", "free energy bounded by its capping function", min(f_caps), "thermal_inequality")
    c.slack("no_free_lunch", "free energy bounded by mean energy", min(nfl), "thermal_inequality")

    lower, upper, sup = [], [], []
    for _ in range(n_pairs):
        d, h, b = pair(rng)
        s = thermal.free_energy_sandwich_check(h, random_hermitian(d, rng), b)
        lower.append(s.lower)
        upper.append(s.upper)
        sup.append(s.superadditivity)
    c.slack("sandwich_lower", "free-energy change bounded below by final-state mean", min(lower), "thermal_inequality")
    c.slack("sandwich_upper", "free-energy change bounded above by initial-state mean", min(upper), "thermal_inequality")
    c.slack("superadditivity", "free energy superadditive over Hamiltonian sums", min(sup), "thermal_inequality")

    err, mono = 0.0, True
    for d in (2, 4, 8):
        rep = thermal.check_energy_entropy_monotone(random_hermitian(d, rng), np.logspace(-1, 1, 13))
        err = max(err, rep.max_rel_error)
        mono = mono and rep.monotone
    c.error("derivatives_match_variance", "beta-derivatives of S, E and F versus energy variance", err, "thermal_derivative")
    c.error("monotone_in_beta", "S and E decrease, F increases with beta", 0.0 if mono else 1.0, "thermal_identity")

    hi = lo_s = lo_f = 0.0
    for d in (2, 4, 8):
        h = thermal.Hamiltonian(random_hermitian(d, rng))
        hi = max(hi, abs(thermal.thermal_entropy(h, 1e-9) - math.log(d)))
        gapped = thermal.Hamiltonian(np.diag(np.arange(d, dtype=float)))
        lo_s = max(lo_s, thermal.thermal_entropy(gapped, 1e6))
        lo_f = max(lo_f, abs(thermal.free_energy(gapped, 1e6) - gapped.ground_energy))
    c.error("high_temperature_entropy", "entropy tends to ln N as beta tends to 0", hi, "high_temperature_limit")
    c.error("low_temperature_entropy", "entropy vanishes on a gapped spectrum as beta grows", lo_s, "low_temperature_limit")
    c.error("low_temperature_free_energy", "free energy tends to the ground energy", lo_f, "low_temperature_limit")


def _cain(rng, c: _Collector):
    slacks, deltas, violations = [], [], 0
    for _ in range(SAMPLES["cain_instances"]):
        split, beta, rho0, rho_t = thermal.random_cain_instance(rng)
        rep = thermal.cain_bound_report(split, beta, rho0, rho_t)
        slacks.append(rep.slack)
        deltas.append(rep.cain_delta)
        violations += rep.violation
    c.slack("bound_slack", "free-energy lower bound implied by the CAIN", min(slacks), "cain_bound")
    c.slack("family_conditional_entropy", "conditional entropy of Theta given X never decreases", min(deltas), "cain_bound")
    c.error("violations", "no bound violation when the CAIN premise holds", violations, "cain_bound")
    split, beta, rho0, rho_t = thermal.counter_dynamics_instance()
    rep = thermal.cain_bound_report(split, beta, rho0, rho_t)
    c.reported("counter_dynamics_cain_delta", "feedback dynamics can lower S(Theta|X)", rep.cain_delta)
    c.reported("counter_dynamics_bound_slack", "bound slack for the feedback dynamics", rep.slack)


def _reversal(rng, c: _Collector):
    n = SAMPLES["reversal_chains"]
    ratio = dbl = joint = 0.0
    for dim in (2, 3):
        for _ in range(n):
            spec = cbnet.random_chain(dim, 2, rng)
            ratio = max(ratio, cbnet.ratio_identity_check(spec))
            dbl = max(dbl, cbnet.double_reversal_error(spec))
            joint = max(joint, cbnet.joint_reversal_error(spec))
    c.error("ratio_identity", "forward/reversed path ratio identity", ratio, "reversal")
    c.error("double_reversal", "reversing twice restores the joint", dbl, "reversal")
    c.error("joint_equivalence", "reversed chain reproduces the forward joint", joint, "reversal")

    grid = np.linspace(0.0, 1.0, SAMPLES["reversal_grid"])
    err = max(
        c1_time_reversal_crosscheck(bsc.c1_params_bsc(l, a, b)).max_abs_error
        for l in grid for a in grid for b in grid
    )
    c.error("c1_closed_form_grid", "closed-form reversed kernels of the one-particle engine", err, "reversal")

    families = {
        "doubly_stochastic": [cbnet.random_cain_chain(2, 2, 2, rng) for _ in range(SAMPLES["sigma_chains"])],
        "generic": [
            cbnet.StructuredChainSpec(cbnet.random_chain(6, 2, rng), (("x", 2), ("theta", 3)), ("theta",))
            for _ in range(50)
        ],
        "c1_engine": [
            c1_chain(bsc.c1_params_bsc(l, a, b), theta)
            for l, a, b in ((0.5, 0.8, 0.9), (0.3, 0.6, 0.7), (0.9, 1.0, 1.0))
            for theta in (("s", "sigma"), ("sigma",), ("s",))
        ],
    }
    mean_err = 0.0
    for fam, specs in families.items():
        means, devs = [], []
        for spec in specs:
            rep = cbnet.estimate_sigma(spec)
            mean_err = max(mean_err, abs(rep.mean_sigma - cbnet.conditional_entropy_change(spec)))
            means.append(rep.mean_sigma)
            devs.append(abs(rep.exp_deviation))
        if fam == "doubly_stochastic":
            c.slack("sigma_nonnegative_doubly_stochastic", "mean Sigma-hat non-negative for doubly stochastic conditionals", min(means), "sigma_nonnegative")
        c.reported(f"sigma_exp_deviation.{fam}.max", "mean of exp(-Sigma-hat) versus 1 (conjectured)", max(devs))
        c.reported(f"sigma_exp_deviation.{fam}.mean", "mean of exp(-Sigma-hat) versus 1 (conjectured)", float(np.mean(devs)))
    c.error("sigma_mean_equals_entropy_change", "mean of Sigma-hat equals the conditional-entropy change", mean_err, "sigma_mean")
    mc_spec = families["doubly_stochastic"][0]
    seed = int(rng.integers(2**31))
    mc = cbnet.estimate_sigma(mc_spec, mode="mc", n_samples=20_000, seed=seed)
    exact = cbnet.estimate_sigma(mc_spec)
    z = abs(mc.mean_sigma - exact.mean_sigma) / max(mc.stderr_sigma, 1e-300)
    c.reported("sigma_mc_z_score", "Monte Carlo mean of Sigma-hat against exact enumeration", z)


def _szilard(rng, c: _Collector):
    n = SAMPLES["szilard_instances"]
    cases = (
        ("c1", random_c1_params, table_c1),
        ("c2", random_c2_params, table_c2),
        ("q1", random_q1_params, table_q1),
        ("q2", random_q2_params, table_q2),
    )
    for name, make, table in cases:
        cell = cyc = 0.0
        for _ in range(n):
            t = table(make(rng))
            cell = max(cell, t.max_cell_error())
            cyc = max(cyc, t.max_cycle_sum())
        c.error(f"{name}.cell_agreement", "direct cell equals its closed form", cell, "szilard_cell")
        c.error(f"{name}.cycle_sum", "each column sums to zero over a cycle", cyc, "szilard_cycle")
    e1 = e2 = 0.0
    for _ in range(SAMPLES["embedding_instances"]):
        p1 = random_c1_params(rng)
        q, t = table_q1(embed_c1(p1)), table_c1(p1)
        e1 = max(e1, np.abs(q.direct - t.direct).max(), np.abs(q.closed_form - t.closed_form).max())
        p2 = random_c2_params(rng)
        q, t = table_q2(embed_c2(p2)), table_c2(p2)
        e2 = max(e2, np.abs(q.direct - t.direct).max(), np.abs(q.closed_form - t.closed_form).max())
    c.error("embedding.q1_reproduces_c1", "quantum net with classical kernels reproduces C1", e1, "embedding")
    c.error("embedding.q2_reproduces_c2", "quantum net with classical kernels reproduces C2", e2, "embedding")
    r2 = r3 = 0.0
    for _ in range(50):
        for p, build in ((random_q1_params(rng), build_q1), (random_q2_params(rng), build_q2)):
            st = build(p)
            r2 = max(r2, np.abs(st[2].matrix - rho2_by_contraction(p)).max())
            r3 = max(r3, np.abs(st[3].matrix - rho3_unreduced(p)).max())
    c.error("dual_path.rho2", "post-feedback state by direct contraction", r2, "szilard_cell")
    c.error("dual_path.rho3", "reset state by unreduced contraction", r3, "szilard_cell")
    gap = math.inf
    for _ in range(n // 5):
        p = random_q1_params(rng)
        amp = np.einsum("ysx,xr->ysr", p.a_meas, p.a_init).reshape(p.a_meas.shape[0] * p.n_sigma, -1)
        gap = min(gap, vn_entropy(build_q1(p)[1]) - vn_entropy(amp @ amp.conj().T))
    c.slack("classicalization_raises_entropy", "classicalizing the sensor cannot lower entropy", gap, "szilard_cell")


def _bsc(rng, c: _Collector):
    n = SAMPLES["bsc_triples"]
    abc = rng.uniform(0.0, 1.0, size=(n, 3))
    comm = assoc = hom = act = ident = 0.0
    sp = bsc.sym_product
    for a, b, x in abc:
        comm = max(comm, abs(sp(a, b) - sp(b, a)))
        assoc = max(assoc, abs(sp(sp(a, b), x) - sp(a, sp(b, x))))
        hom = max(hom, np.abs(bsc.m_matrix(b) @ bsc.m_matrix(a) - bsc.m_matrix(sp(b, a))).max())
        act = max(act, np.abs(bsc.m_matrix(a) @ bsc.v_vector(x) - bsc.v_vector(sp(a, x))).max())
        ident = max(ident, abs(sp(a, 1.0) - a), abs(sp(a, 0.0) - (1.0 - a)), abs(sp(a, 0.5) - 0.5))
    c.error("commutativity", "symmetric product commutes", comm, "bsc_identity")
    c.error("associativity", "symmetric product associates", assoc, "bsc_identity")
    c.error("matrix_composition", "M(b) M(a) = M(b * a)", hom, "bsc_identity")
    c.error("vector_action", "M(a) v(l) = v(a * l)", act, "bsc_identity")
    c.error("special_elements", "1 is neutral, 0 complements, 1/2 absorbs", ident, "bsc_identity")
    g = np.linspace(0.0, 1.0, SAMPLES["bsc_monotone_grid"])
    c.slack("h_monotone_grid", "h(a * l) >= h(l)", min(bsc.h_monotone_check(a, l) for a in g for l in g), "bsc_monotone")
    g = np.linspace(0.0, 1.0, SAMPLES["bsc_table_grid"])
    err = cyc = 0.0
    for l in g:
        for a in g:
            for b in g:
                t = bsc.c1_bsc_table(l, a, b)
                err = max(err, t.max_cell_error())
                cyc = max(cyc, t.max_cycle_sum())
    c.error("table_equals_generic_pipeline", "binary-entropy table equals the generic C1 table", err, "bsc_table")
    c.error("table_cycle_sum", "binary-entropy table columns sum to zero", cyc, "bsc_table")


def _ledger(rng, c: _Collector):
    e = ledger.heat_engine_cycle(400.0, 300.0, 3.0)
    c.error("heat_engine_example", "engine work and efficiency per unit cold-bath heat",
            abs(e.work - 1.0) + abs(e.efficiency - 1.0 / 3.0) + abs(e.dQ_h + 4.0), "first_law")
    r = ledger.carnot_cycle_check(400.0, 300.0, 0.0, 1.0)
    err = max(r.max_error, abs(r.net_work - 100.0))
    for _ in range(200):
        t_c = rng.uniform(1.0, 50.0)
        t_h = t_c + rng.uniform(0.1, 50.0)
        s0 = rng.uniform(0.0, 2.0)
        r = ledger.carnot_cycle_check(t_h, t_c, s0, s0 + rng.uniform(0.0, 2.0))
        err = max(err, r.max_error)
    c.error("carnot_rectangle", "Carnot net work equals the (T, S) rectangle area", err, "ledger_area")
    q = 0.0
    for _ in range(100):
        q = max(q, ledger.ideal_gas_work(rng.uniform(0.1, 10.0), rng.uniform(0.1, 5.0), rng.uniform(0.1, 5.0)).error)
    for _ in range(20):
        rep = work_report(table_c1(random_c1_params(rng)), float(rng.uniform(0.1, 10.0)))
        q = max(q, max(err for _, _, err in ledger.volume_work_bridge(rep)))
    c.error("ideal_gas_quadrature", "T ln(V2/V1) equals the integral of T/V", q, "ledger_quadrature")
    fl = max(abs(ledger.check_first_law(ledger.PortLedger(*x)).residual) for x in ((0, 0, 0), (5, 2, 3)))
    c.error("first_law_examples", "heat equals energy change plus work", fl, "first_law")
    sb = ledger.system_bath_bounds(ledger.PortLedger(1.0, 0.0, 1.0, dS=1.5), 1.0)
    c.error("system_bath_example", "entropy and work slacks for an irreversible step",
            abs(sb.entropy_slack - 0.5) + abs(sb.work_slack - 0.5), "first_law")
    flows = [ledger.two_bath_flow(400.0, 300.0, q).valid for q in (1.0, 0.0, -1.0)]
    c.error("two_bath_direction", "heat flows from the hot bath to the cold one",
            0.0 if flows == [True, True, False] else 1.0, "first_law")
    slacks = []
    for _ in range(200):
        t = rng.uniform(0.1, 10.0)
        dq, de = rng.uniform(-5, 5, 2)
        led = ledger.PortLedger(dq, de, dq - de, dS=dq / t + rng.uniform(0.0, 3.0))
        s = ledger.system_bath_bounds(led, t)
        slacks += [s.entropy_slack, s.work_slack]
    c.slack("system_bath_slacks", "dS >= dQ/T and W <= -dF for admissible steps", min(slacks), "first_law")


RUNNERS = {
    "thermal": _thermal,
    "cain": _cain,
    "reversal": _reversal,
    "szilard": _szilard,
    "bsc": _bsc,
    "ledger": _ledger,
}


def verify_suite(name: str, seed: int = 0, tolerances: dict | None = None) -> VerificationReport:
    """Run one suite (or ``"all"``) and return its report.

    Each suite draws from its own child of ``SeedSequence(seed)``, so a
    suite gives the same numbers whether run alone or as part of ``all``.
    """
    if name != "all" and name not in RUNNERS:
        raise ValueError(f"unknown suite {name!r}; choose from all, {', '.join(SUITES)}")
    tol = dict(TOLERANCES)
    tol.update(tolerances or {})
    children = np.random.SeedSequence(int(seed)).spawn(len(SUITES))
    names = SUITES if name == "all" else (name,)
    start = time.perf_counter()
    checks = []
    for s in names:
        col = _Collector(s, tol)
        RUNNERS[s](np.random.default_rng(children[SUITES.index(s)]), col)
        checks += col.checks
    return VerificationReport(name, int(seed), checks, time.perf_counter() - start)
