"""Runtime configuration: budgets, sieve constants, precision knobs.

All values have safe defaults; a JSON file with any subset of the fields can
override them (see ``Config.from_json``).  The schema is flat:

    {
      "r_g": 4,
      "iota": null,
      "c1": 1.0,
      "c2": 1.0,
      "oracle_cell_budget": 1000000000,
      "optimized_row_budget": 10000000,
      "density_order_budget": 100000000,
      "spectral_vertex_budget": 20000,
      "volume_crosscheck_limit": 200000,
      "factor_trial_limit": 1000000,
      "factor_bit_budget": 256,
      "dyadic_bits": 53,
      "gcd_window": 50,
      "word_budget": 1000
    }

``iota = null`` means: derive it from ``r_g`` as 1 when r_g is 2, otherwise
the least even integer >= r_g / 2.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass


@dataclass(frozen=True)
class Config:
    # engine parameters
    r_g: int = 4
    iota: int | None = None
    # sieve constants, advisory defaults
    c1: float = 1.0
    c2: float = 1.0
    # budgets
    oracle_cell_budget: int = 10**9
    optimized_row_budget: int = 10**7
    density_order_budget: int = 10**8
    spectral_vertex_budget: int = 20000
    volume_crosscheck_limit: int = 2 * 10**5
    factor_trial_limit: int = 10**6
    factor_bit_budget: int = 256
    # precision and stabilization
    dyadic_bits: int = 53
    gcd_window: int = 50
    word_budget: int = 1000

    @property
    def derived_iota(self) -> int:
        """Integrability exponent: 1 for r_g = 2, else least even int >= r_g/2."""
        if self.iota is not None:
            return self.iota
        if self.r_g == 2:
            return 1
        e = -(-self.r_g // 2)
        return e if e % 2 == 0 else e + 1

    @classmethod
    def from_json(cls, path: str) -> "Config":
        with open(path) as fp:
            raw = json.load(fp)
        known = {f.name for f in dataclasses.fields(cls)}
        bad = set(raw) - known
        if bad:
            raise ValueError(f"unknown config keys: {sorted(bad)}")
        return cls(**raw)


DEFAULT_CONFIG = Config()
