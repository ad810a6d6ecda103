"""Classical thermodynamic bookkeeping with three-port ledgers.

Every system carries a heat port, an energy store and a work port. Signs:
``dQ`` is heat flowing into the system, ``dW`` is work done by the system, so
the first law reads ``dQ = dE + dW``. Baths obey ``dQ = T dS``. Temperatures
are in energy units and entropies in nats.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from scipy.integrate import quad

FIRST_LAW_TOL = 1e-12
CONTACT_TOL = 1e-12
CLOSURE_TOL = 1e-12
SLACK_TOL = 1e-12


class SecondLawViolation(ValueError):
    """Raised when a step or flow lowers the total entropy."""


class ContactError(ValueError):
    """Raised when a contact edge does not conserve its port quantity."""


class CycleClosureError(ValueError):
    """Raised when a cyclic system does not return to its starting state."""


@dataclass(frozen=True)
class PortLedger:
    dQ: float
    dE: float
    dW: float
    dS: float | None = None


@dataclass(frozen=True)
class FirstLawCheck:
    residual: float
    violation: bool


def check_first_law(ledger: PortLedger, tol: float = FIRST_LAW_TOL) -> FirstLawCheck:
    """Residual ``dQ - dE - dW``; flagged when its magnitude exceeds ``tol``."""
    r = ledger.dQ - ledger.dE - ledger.dW
    return FirstLawCheck(float(r), abs(r) > tol)


@dataclass(frozen=True)
class BathSpec:
    temperature: float
    dS: float

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError("bath temperature must be positive")

    @property
    def dQ(self) -> float:
        return self.temperature * self.dS

    def ledger(self) -> PortLedger:
        # a bath does no work, so all its heat goes into its energy
        return PortLedger(self.dQ, self.dQ, 0.0, self.dS)

    @classmethod
    def receiving(cls, temperature: float, dQ: float) -> "BathSpec":
        return cls(temperature, dQ / temperature)


@dataclass
class ProcessStep:
    """One step: named ledgers plus contact edges.

    A thermal edge joins the heat ports of its systems, so their ``dQ`` sum
    to zero; a mechanical edge does the same for ``dW``.
    """

    ledgers: dict
    thermal_edges: list = field(default_factory=list)
    mechanical_edges: list = field(default_factory=list)
    label: str = ""

    def edge_residuals(self) -> dict:
        out = {}
        for kind, edges, attr in (("thermal", self.thermal_edges, "dQ"), ("mechanical", self.mechanical_edges, "dW")):
            for edge in edges:
                missing = [n for n in edge if n not in self.ledgers]
                if missing:
                    raise KeyError(f"{kind} edge {edge} names unknown systems {missing}")
                out[(kind, tuple(edge))] = math.fsum(getattr(self.ledgers[n], attr) for n in edge)
        return out

    def validate(self, tol: float = CONTACT_TOL) -> None:
        for name, led in self.ledgers.items():
            chk = check_first_law(led)
            if chk.violation:
                raise ValueError(f"step {self.label!r}: first law fails for {name!r} (residual {chk.residual:.3e})")
        for (kind, edge), r in self.edge_residuals().items():
            if abs(r) > tol:
                raise ContactError(f"step {self.label!r}: {kind} edge {edge} leaks {r:.3e}")


@dataclass
class CycleSpec:
    steps: list
    cyclic: tuple = ()

    def totals(self, name: str) -> dict:
        leds = [s.ledgers[name] for s in self.steps if name in s.ledgers]
        if any(l.dS is None for l in leds):
            raise ValueError(f"system {name!r} has a ledger without dS")
        return {k: math.fsum(getattr(l, k) for l in leds) for k in ("dQ", "dE", "dW", "dS")}

    def closure_residuals(self) -> dict:
        """Return ``{name: (total dS, total dE)}`` for every cyclic system."""
        res = {}
        for n in self.cyclic:
            t = self.totals(n)
            res[n] = (t["dS"], t["dE"])
        return res

    def validate(self, tol: float = CLOSURE_TOL) -> None:
        for s in self.steps:
            s.validate()
        for n, (ds, de) in self.closure_residuals().items():
            if abs(ds) > tol or abs(de) > tol:
                raise CycleClosureError(f"cyclic system {n!r} does not close: dS={ds:.3e}, dE={de:.3e}")


@dataclass(frozen=True)
class SystemBathSlacks:
    entropy_slack: float
    work_slack: float
    total_entropy_change: float


def system_bath_bounds(system: PortLedger, temperature: float, tol: float = SLACK_TOL) -> SystemBathSlacks:
    """Entropy and work slacks for a system exchanging heat with one bath.

    The bath receives ``-dQ_s`` so that ``dS_b = -dQ_s / T``. The step is
    rejected when ``dS_s + dS_b < -tol``. Otherwise
    ``entropy_slack = dS_s - dQ_s / T`` and
    ``work_slack = -dF_s - dW_s`` with ``dF_s = dE_s - T dS_s``.
    """
    if system.dS is None:
        raise ValueError("system ledger needs dS")
    chk = check_first_law(system)
    if chk.violation:
        raise ValueError(f"first law fails for the system (residual {chk.residual:.3e})")
    bath = BathSpec.receiving(temperature, -system.dQ)
    total = system.dS + bath.dS
    if total < -tol:
        raise SecondLawViolation(
            f"total entropy change {total:.3e} < 0 (dS_s={system.dS!r}, dS_b={bath.dS!r}, T={temperature!r})"
        )
    d_f = system.dE - temperature * system.dS
    return SystemBathSlacks(system.dS - system.dQ / temperature, -d_f - system.dW, total)


def cycle_heat_check(steps, temperature: float, tol: float = SLACK_TOL) -> float:
    """Net heat absorbed by a system over a cycle in contact with one bath.

    Each step must pass :func:`system_bath_bounds` and the system's entropy
    must close. The returned net heat is then ``<= tol``: a closed cycle
    cannot turn bath heat into net work.
    """
    steps = list(steps)
    for s in steps:
        system_bath_bounds(s, temperature, tol)
    ds = math.fsum(s.dS for s in steps)
    if abs(ds) > CLOSURE_TOL:
        raise CycleClosureError(f"system entropy does not close over the cycle: {ds:.3e}")
    q = math.fsum(s.dQ for s in steps)
    if q > tol:
        raise SecondLawViolation(f"net heat absorbed over a cycle is {q:.3e} > 0")
    return q


def _ordered(t_h: float, t_c: float) -> None:
    if not (t_c > 0 and t_h > t_c):
        raise ValueError(f"need T_h > T_c > 0, got T_h={t_h!r}, T_c={t_c!r}")


@dataclass(frozen=True)
class FlowCheck:
    valid: bool
    entropy_production: float
    dQ_h: float
    dQ_c: float


def two_bath_flow(t_h: float, t_c: float, dQ_c: float, tol: float = SLACK_TOL) -> FlowCheck:
    """Direct heat exchange between a hot and a cold bath.

    ``dQ_c`` is the heat received by the cold bath and ``dQ_h = -dQ_c``. The
    flow is valid when ``dQ_c (T_h - T_c) / (T_h T_c) >= -tol``.
    """
    _ordered(t_h, t_c)
    prod = dQ_c * (t_h - t_c) / (t_h * t_c)
    return FlowCheck(prod >= -tol, float(prod), -float(dQ_c), float(dQ_c))


@dataclass(frozen=True)
class EngineCycle:
    dQ_h: float
    dQ_c: float
    work: float
    efficiency: float  # work per unit heat delivered to the cold bath
    carnot_efficiency: float  # conventional 1 - T_c / T_h

    def to_dict(self) -> dict:
        return asdict(self)


def carnot_efficiency(t_h: float, t_c: float) -> float:
    _ordered(t_h, t_c)
    return 1.0 - t_c / t_h


def heat_engine_cycle(t_h: float, t_c: float, dQ_c: float) -> EngineCycle:
    """Quasi-static engine between two baths.

    Bath heats are the heat received by each bath. Zero total entropy change
    gives ``dQ_c / T_c = -dQ_h / T_h``; the system closes, so it delivers
    ``W = -dQ_h - dQ_c``. ``efficiency`` is ``W / dQ_c = (T_h - T_c) / T_c``.
    """
    _ordered(t_h, t_c)
    dQ_h = -dQ_c * t_h / t_c
    w = -dQ_h - dQ_c
    return EngineCycle(float(dQ_h), float(dQ_c), float(w), (t_h - t_c) / t_c, carnot_efficiency(t_h, t_c))


@dataclass(frozen=True)
class StepRecord:
    label: str
    t_start: float
    t_end: float
    s_start: float
    s_end: float
    dS: float
    dQ: float
    dE: float
    dW: float


@dataclass(frozen=True)
class CarnotReport:
    steps: tuple
    net_work: float
    area: float
    closure_S: float
    closure_E: float
    engine: EngineCycle
    max_error: float

    @property
    def ok(self) -> bool:
        return self.max_error <= CLOSURE_TOL

    def to_dict(self) -> dict:
        d = asdict(self)
        d["steps"] = [asdict(s) for s in self.steps]
        d["ok"] = self.ok
        return d


def carnot_cycle_check(
    t_h: float, t_c: float, s_low: float, s_high: float, heat_capacity: float = 1.0
) -> CarnotReport:
    """Build the four-step rectangle in the (T, S) plane and check it.

    The working system has energy ``E = heat_capacity * T``. Steps 1 (heat
    up at ``s_low``) and 3 (cool down at ``s_high``) are isentropic with no
    heat; steps 2 (at ``T_h``) and 4 (at ``T_c``) are isothermal with
    ``dQ = T dS``. ``max_error`` collects the isentropic, isothermal, first-law,
    closure and area residuals.
    """
    _ordered(t_h, t_c)
    if s_high < s_low:
        raise ValueError(f"need s_high >= s_low, got {s_low!r} > {s_high!r}")
    c = heat_capacity
    corners = [(t_c, s_low, t_h, s_low, "heat up"), (t_h, s_low, t_h, s_high, "hot isotherm"),
               (t_h, s_high, t_c, s_high, "cool down"), (t_c, s_high, t_c, s_low, "cold isotherm")]
    steps = []
    for t0, s0, t1, s1, label in corners:
        ds = s1 - s0
        dq = t0 * ds if t0 == t1 else 0.0
        de = c * (t1 - t0)
        steps.append(StepRecord(label, t0, t1, s0, s1, ds, dq, de, dq - de))
    errs = []
    for i in (0, 2):
        errs += [abs(steps[i].dS), abs(steps[i].dQ)]
    for i in (1, 3):
        errs.append(abs(steps[i].dQ - steps[i].t_start * steps[i].dS))
    errs += [abs(check_first_law(PortLedger(s.dQ, s.dE, s.dW)).residual) for s in steps]
    closure_s = math.fsum(s.dS for s in steps)
    closure_e = math.fsum(s.dE for s in steps)
    net = math.fsum(s.dW for s in steps)
    area = (t_h - t_c) * (s_high - s_low)
    errs += [abs(closure_s), abs(closure_e), abs(net - area)]
    # baths receive minus the system's heat on each isotherm
    engine = heat_engine_cycle(t_h, t_c, -steps[3].dQ)
    errs.append(abs(engine.work - net))
    return CarnotReport(tuple(steps), net, area, closure_s, closure_e, engine, float(max(errs)))


@dataclass(frozen=True)
class GasWorkCheck:
    quadrature: float
    closed_form: float
    error: float


def ideal_gas_work(temperature: float, v1: float, v2: float) -> GasWorkCheck:
    """Isothermal one-particle ideal-gas work ``integral of T / V dV`` against
    the closed form ``T ln(V2 / V1)``."""
    if not (temperature > 0 and v1 > 0 and v2 > 0):
        raise ValueError("temperature and volumes must be positive")
    val, _ = quad(lambda v: temperature / v, v1, v2, epsabs=1e-13, epsrel=1e-13)
    closed = temperature * math.log(v2 / v1)
    return GasWorkCheck(float(val), closed, abs(val - closed))


def volume_work_bridge(report, v1: float = 1.0) -> list:
    """Check every volume entry of a Szilard ``WorkReport`` against gas work.

    An entry with entropy ``dH`` is read as an expansion from ``v1`` to
    ``v1 * exp(dH)``.
    """
    out = []
    for e in report.entries:
        if e.kind != "volume":
            continue
        chk = ideal_gas_work(report.temperature, v1, v1 * math.exp(e.entropy))
        out.append((e.label, chk, abs(chk.quadrature - e.work)))
    return out
