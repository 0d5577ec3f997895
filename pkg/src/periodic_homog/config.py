"""Run configuration: a YAML or JSON file validated before any computation.

Unknown keys are rejected everywhere. ``config_hash`` is the SHA-256 of the
canonical JSON form of the validated configuration (after the seed
override), so it identifies a run independently of formatting.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .geometry import constraint_from_dict
from .integrand import Integrand, PeriodicCoefficient, kernel_from_dict
from .solver import SolverConfig


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


MatrixLike = Union[float, list[float], list[list[float]]]


class BallSpec(_Strict):
    shape: Literal["ball"]
    radius: float = Field(1.0, gt=0)
    m: int = Field(1, ge=1, le=3)
    d: int = Field(1, ge=1, le=3)


class BoxSpec(_Strict):
    shape: Literal["box"]
    half_widths: MatrixLike = 1.0
    m: int = Field(1, ge=1, le=3)
    d: int = Field(1, ge=1, le=3)


class PolytopeSpec(_Strict):
    shape: Literal["polytope"]
    normals: list
    offsets: list[float]
    m: int = Field(1, ge=1, le=3)
    d: int = Field(1, ge=1, le=3)


ConstraintSpec = Annotated[Union[BallSpec, BoxSpec, PolytopeSpec], Field(discriminator="shape")]


class QuadraticSpec(_Strict):
    variant: Literal["quadratic"]
    weight: float = Field(1.0, ge=0)
    center: Optional[MatrixLike] = None


class DoubleWellSpec(_Strict):
    variant: Literal["double_well"]


class PowerGaugeSpec(_Strict):
    variant: Literal["power_gauge"]
    p: float = Field(2.0, ge=1)


class BarrierSpec(_Strict):
    variant: Literal["barrier"]
    g: Optional[QuadraticSpec] = None
    cbar: float = Field(1.0, gt=0)
    alpha: float = Field(1.0, gt=0)


class TabulatedSpec(_Strict):
    variant: Literal["tabulated"]
    axes: list[list[float]]
    values: list


KernelSpec = Annotated[
    Union[QuadraticSpec, DoubleWellSpec, PowerGaugeSpec, BarrierSpec, TabulatedSpec],
    Field(discriminator="variant"),
]


class CoefficientSpec(_Strict):
    """Either an explicit ``grid`` (nested list or CSV path) or a named ``kind``."""

    grid: Optional[Union[list, str]] = None
    kind: Optional[Literal["constant", "laminate", "checkerboard"]] = None
    values: list[float] = [1.0, 2.0]
    axis: int = 0

    @model_validator(mode="after")
    def _one_source(self):
        if (self.grid is None) == (self.kind is None):
            raise ValueError("give exactly one of 'grid' or 'kind'")
        return self

    def build(self, d, base_dir: Path | None = None):
        if self.kind == "constant":
            return PeriodicCoefficient.constant(self.values[0], d)
        if self.kind == "laminate":
            return PeriodicCoefficient.laminate(self.values, d, self.axis)
        if self.kind == "checkerboard":
            return PeriodicCoefficient.checkerboard(tuple(self.values[:2]))
        grid = self.grid
        if isinstance(grid, str):
            path = Path(grid)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            grid = np.loadtxt(path, delimiter=",", ndmin=1)
        grid = np.asarray(grid, dtype=float)
        if d == 1:
            grid = grid.ravel()
        return PeriodicCoefficient(grid)


class IntegrandSpec(_Strict):
    constraint: ConstraintSpec
    coefficient: CoefficientSpec = CoefficientSpec(kind="constant", values=[1.0])
    kernel: KernelSpec

    def build(self, base_dir: Path | None = None) -> Integrand:
        domain = constraint_from_dict(self.constraint.model_dump())
        kernel = kernel_from_dict(self.kernel.model_dump(exclude_none=True), domain)
        coef = self.coefficient.build(domain.shape[1], base_dir)
        return Integrand(coef, kernel)


class SolverSpec(_Strict):
    restarts: int = Field(8, ge=0)
    max_iter: int = Field(2000, ge=1)
    gtol: float = Field(1e-8, gt=0)
    tau_max: float = Field(1.0 - 1e-3, gt=0, lt=1)
    armijo: float = Field(1e-4, gt=0, lt=1)
    perturbation: float = Field(0.5, gt=0)

    def build(self, seed: int) -> SolverConfig:
        return SolverConfig(seed=seed, **self.model_dump())


class DensitySection(_Strict):
    xi: list[MatrixLike]
    x: Optional[list[float]] = None
    truncations: list[int] = [1, 2, 4]


class CellSection(_Strict):
    xi: list[MatrixLike]
    n_max: Optional[int] = Field(None, ge=1)
    resolution: Optional[int] = Field(None, ge=1)
    oracle: bool = False


class RadialSection(_Strict):
    directions: list[MatrixLike]
    ladder_depth: int = Field(20, ge=4, le=40)
    threshold: float = 1e6
    tol: float = 1e-4


class EnvelopeSection(_Strict):
    xi: list[MatrixLike]
    resolution: int = Field(64, ge=2)
    depth: int = Field(1, ge=0, le=3)
    radial: Optional[RadialSection] = None


class SweepSection(_Strict):
    F: MatrixLike
    ladder: list[float]
    resolution: int = Field(256, ge=2)
    n_cell: int = Field(1, ge=1)
    cell_resolution: Optional[int] = None
    n_max: Optional[int] = None
    free_mode: bool = True


class HyperSection(_Strict):
    d: int = Field(2, ge=1, le=3)
    cbar: float = Field(1.0, gt=0)
    alpha: float = Field(1.0, ge=1)
    coefficient: CoefficientSpec = CoefficientSpec(kind="checkerboard")
    radii: list[float] = [0.3, 0.6, 0.9]
    n_angles: int = Field(8, ge=1)
    outside_radii: list[float] = [1.1]
    n_directions: int = Field(16, ge=1)
    ladder_depth: int = Field(20, ge=4, le=40)
    threshold: float = 1e6
    n_max: Optional[int] = Field(None, ge=1)
    resolution: Optional[int] = Field(None, ge=1)


class RunConfig(_Strict):
    integrand: Optional[IntegrandSpec] = None
    solver: SolverSpec = SolverSpec()
    seed: int = 0
    output: Optional[str] = None
    density: Optional[DensitySection] = None
    cell: Optional[CellSection] = None
    envelope: Optional[EnvelopeSection] = None
    sweep: Optional[SweepSection] = None
    hyper: Optional[HyperSection] = None

    def config_hash(self) -> str:
        canon = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def load_config(path, seed: int | None = None) -> RunConfig:
    """Parse and validate a YAML/JSON config; ``seed`` overrides the file."""
    text = Path(path).read_text()
    data = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    if not isinstance(data, dict):
        raise ValueError("config must be a mapping")
    cfg = RunConfig.model_validate(data)
    if seed is not None:
        cfg = cfg.model_copy(update={"seed": int(seed)})
    return cfg


__all__ = ["RunConfig", "IntegrandSpec", "SolverSpec", "CoefficientSpec", "load_config"]
