"""Tolerances, sample counts and run configuration shared by the CLI and the
verification suites."""
from __future__ import annotations

from dataclasses import dataclass, field, fields

from . import cbnet, info, ledger, thermal

# Default tolerance per check family. Values are magnitudes: error checks pass
# when error <= tol, slack checks pass when slack >= -tol.
TOLERANCES = {
    "probability": info.PROB_TOL,
    "density": info.DENSITY_TOL,
    "eigen_floor": info.EIG_FLOOR,
    "hermitian": thermal.HERMITIAN_TOL,
    "thermal_identity": 1e-10,
    "thermal_inequality": 1e-10,
    "thermal_derivative": 1e-5,
    "high_temperature_limit": 1e-5,
    "low_temperature_limit": 1e-4,
    "cain_bound": 1e-9,
    "reversal": 1e-12,
    "sigma_mean": 1e-10,
    "sigma_nonnegative": 1e-9,
    "szilard_cell": 1e-10,
    "szilard_cycle": 1e-10,
    "embedding": 1e-10,
    "bsc_identity": 1e-14,
    "bsc_monotone": 1e-12,
    "bsc_table": 1e-10,
    "first_law": ledger.FIRST_LAW_TOL,
    "ledger_area": 1e-12,
    "ledger_quadrature": 1e-8,
}

# Sample counts used by the verification suites.
SAMPLES = {
    "thermal_pairs": 1000,
    "thermal_betas": 13,
    "cain_instances": 200,
    "reversal_chains": 200,
    "sigma_chains": 200,
    "szilard_instances": 500,
    "embedding_instances": 100,
    "bsc_triples": 10_000,
    "bsc_monotone_grid": 21,
    "bsc_table_grid": 21,
    "reversal_grid": 5,
}

MAX_CHAIN_STATES = cbnet.MAX_STATES

FORMATS = ("json", "csv", "markdown")
MODES = ("exact", "mc")


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass
class RunConfig:
    """Validated options for one CLI run.

    Unknown keys are rejected by :meth:`from_dict`, and Monte Carlo mode
    requires an explicit seed.
    """

    command: str
    case: str | None = None
    params_path: str | None = None
    format: str = "json"
    seed: int | None = None
    sweep: dict | None = None
    tolerances: dict = field(default_factory=dict)
    mode: str = "exact"
    samples: int | None = None
    out: str | None = None

    def __post_init__(self):
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}; choose from {', '.join(FORMATS)}")
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; choose from {', '.join(MODES)}")
        if self.mode == "mc":
            if self.seed is None:
                raise ConfigError("Monte Carlo mode needs --seed")
            if self.samples is None or self.samples < 2:
                raise ConfigError("Monte Carlo mode needs --samples >= 2")
        unknown = set(self.tolerances) - set(TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance names: {', '.join(sorted(unknown))}")
        for k, v in self.tolerances.items():
            if not (isinstance(v, (int, float)) and v >= 0):
                raise ConfigError(f"tolerance {k!r} must be a non-negative number")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        allowed = {f.name for f in fields(cls)}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(f"unknown configuration fields: {', '.join(sorted(unknown))}")
        if "command" not in data:
            raise ConfigError("configuration needs a 'command'")
        return cls(**data)

    def tolerance(self, name: str) -> float:
        return float(self.tolerances.get(name, TOLERANCES[name]))
