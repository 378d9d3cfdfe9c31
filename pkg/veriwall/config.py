from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import dotenv_values, load_dotenv
from pydantic import BaseModel, ConfigDict

from veriwall.errors import InputError

load_dotenv()

ROOT = Path(__file__).resolve().parents[1]


class Constants(BaseModel):
    """Theorem constants and desk-scale budgets.

    Defaults are the values of the flat mesh theorem; any override marks the
    table as nonstandard so bounds are reported rather than asserted.
    """

    model_config = ConfigDict(frozen=True)

    kt_mesh_factor: int = 100
    z_factor: int = 16
    ij_factor: int = 96
    margin: int = 5
    budget_vertices: int = 400
    exhaustive_limit: int = 18
    separator_bound: int = 8

    @property
    def nonstandard(self) -> bool:
        return self.model_dump() != DEFAULT_CONSTANTS.model_dump()

    def with_overrides(self, **values: Any) -> "Constants":
        return self.model_copy(update={k: int(v) for k, v in values.items()})

    def mesh_order(self, t: int, n_prime: int) -> int:
        return self.kt_mesh_factor * t**3 * (n_prime + 2 * t + 2)

    def z_bound(self, t: int) -> int:
        return self.z_factor * t**3

    def ij_bound(self, t: int) -> int:
        return self.ij_factor * t**3

    def echo(self) -> Dict[str, Any]:
        data = self.model_dump()
        data["nonstandard"] = self.nonstandard
        return data


DEFAULT_CONSTANTS = Constants()


def load_constants(path: Optional[str | Path] = None) -> Constants:
    """Read a key=value constants file; unknown keys are an input error."""
    if path is None:
        return DEFAULT_CONSTANTS
    raw = dotenv_values(path)
    known = set(Constants.model_fields)
    unknown = sorted(set(raw) - known)
    if unknown:
        raise InputError(f"unknown constants: {', '.join(unknown)}")
    try:
        return DEFAULT_CONSTANTS.with_overrides(**{k: v for k, v in raw.items() if v is not None})
    except ValueError as exc:
        raise InputError(f"bad constants file {path}: {exc}") from exc


def load_config(path: Optional[str | Path] = None) -> Dict[str, Any]:
    """CLI defaults from config.json, with VERIWALL_* environment overrides."""
    path = Path(path) if path else ROOT / "config.json"
    with open(path, "r") as f:
        cfg = json.load(f)
    for key in list(cfg):
        env = os.getenv(f"VERIWALL_{key.upper()}")
        if env is None:
            continue
        try:
            cfg[key] = type(cfg[key])(env) if cfg[key] is not None else env
        except ValueError as exc:
            raise InputError(f"bad VERIWALL_{key.upper()}={env!r}: {exc}") from exc
    return cfg
