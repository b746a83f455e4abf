"""Study configuration with a versioned JSON form."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields

__all__ = ["StudyConfig", "ConfigError", "SCHEMA_VERSION", "load_config"]

SCHEMA_VERSION = 1
SOLVERS = ("classical", "quantum-sim", "both")
DELTA_RULES = ("fixed", "scaled")
LEVEL_RULES = ("power", "search")


class ConfigError(ValueError):
    pass


@dataclass
class StudyConfig:
    """Parameters shared by the convergence, conditioning and comparison studies.

    ``delta_rule`` is ``"fixed"`` (use ``delta``) or ``"scaled"``
    (``delta = delta_C * h^(1 - beta/tau)``, clipped to 1).  ``level_rule``
    maps a target fill distance to a point count: ``"power"`` uses
    ``N_I = ceil(h^-d)``, ``"search"`` the smallest set whose measured fill
    distance is at most the target.  ``n_ladder`` (interior counts) replaces
    ``h_ladder`` when given.  ``eps_L = None`` applies ``eps / cond(M)``.
    """

    d: int = 1
    k: int = 2
    beta: float | None = None
    h_ladder: list = field(default_factory=lambda: [0.2, 0.1, 0.05, 0.025])
    n_ladder: list | None = None
    delta_rule: str = "fixed"
    delta: float = 0.9
    delta_C: float = 1.0
    delta_ladder: list | None = None
    level_rule: str = "power"
    eps: float = 1e-3
    eps_L: float | None = None
    solver: str = "classical"
    tol: float = 1e-10
    seed_skip: int = 0
    quantum_max_n: int = 16
    p: float = 1.5
    c_T: float = 10.0
    name: str = "study"
    output_dir: str | None = None
    schema: int = SCHEMA_VERSION

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.schema != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema {self.schema}, expected {SCHEMA_VERSION}")
        if int(self.d) != self.d or self.d < 1:
            raise ConfigError("d must be a positive integer")
        if self.k not in (2, 3):
            raise ConfigError("collocation needs k in {2, 3}")
        if self.beta is not None and not self.beta > 2:
            raise ConfigError("beta must exceed 2")
        if self.delta_rule not in DELTA_RULES:
            raise ConfigError(f"delta_rule must be one of {DELTA_RULES}")
        if self.delta_rule == "scaled" and self.beta is None:
            raise ConfigError("scaled delta rule needs beta")
        if self.delta_rule == "fixed" and not 0 < self.delta <= 1:
            raise ConfigError("delta must lie in (0, 1]")
        if self.level_rule not in LEVEL_RULES:
            raise ConfigError(f"level_rule must be one of {LEVEL_RULES}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {SOLVERS}")
        if not self.h_ladder and not self.n_ladder:
            raise ConfigError("need a nonempty h_ladder or n_ladder")
        if any(h <= 0 for h in self.h_ladder or []):
            raise ConfigError("fill distances must be positive")
        if self.eps_L is not None and not 0 < self.eps_L < 0.5:
            raise ConfigError("eps_L must lie in (0, 1/2)")

    @property
    def tau(self):
        return self.d / 2 + self.k + 0.5

    def delta_for(self, h):
        """Support radius for target fill distance ``h``."""
        if self.delta_rule == "fixed":
            return float(self.delta)
        delta = self.delta_C * h ** (1.0 - self.beta / self.tau)
        return float(min(1.0, delta))

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if "schema" not in data:
            raise ConfigError("config lacks a schema version")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def load_config(path) -> StudyConfig:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: malformed JSON ({exc})") from exc
    return StudyConfig.from_dict(data)
