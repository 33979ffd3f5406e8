"""Strict run-configuration schema."""

from __future__ import annotations

import hashlib
import json
from dataclasses import fields
from typing import Annotated, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, create_model, field_validator

from ..tolerances import DEFAULT, Tolerances

COMMANDS = (
    "transport",
    "holonomy",
    "classify",
    "gauss-bonnet",
    "rigid-var",
    "jacobi-check",
    "killing-check",
    "curvature-defect",
)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


# one config key per tolerance, defaults taken from the library
TolerancesModel = create_model(
    "TolerancesModel",
    __base__=_Strict,
    **{f.name: (f.type if isinstance(f.type, type) else eval(f.type), getattr(DEFAULT, f.name)) for f in fields(Tolerances)},
)


class BuiltinSurface(_Strict):
    kind: Literal["builtin"]
    name: str
    params: dict[str, float] = Field(default_factory=dict)


class MetricSurface(_Strict):
    kind: Literal["metric"]
    g11: str
    g12: str = "0"
    g22: str
    domain: list[tuple[float, float]]
    periodic: list[bool] = Field(default_factory=lambda: [False, False])
    period: Optional[list[Optional[float]]] = None
    h: Optional[float] = None
    name: str = "metric"

    @field_validator("domain")
    @classmethod
    def _two_axes(cls, v):
        if len(v) != 2 or any(not b > a for a, b in v):
            raise ValueError("domain needs two increasing [lo, hi] pairs")
        return v


Surface = Annotated[Union[BuiltinSurface, MetricSurface], Field(discriminator="kind")]


class LatitudeCurve(_Strict):
    kind: Literal["latitude"]
    u0: float
    v0: float = 0.0
    turns: int = 1


class GeodesicCurve(_Strict):
    kind: Literal["geodesic"]
    point: list[float]
    direction: list[float]
    length: float = Field(gt=0)


class ParamCurve(_Strict):
    kind: Literal["param"]
    components: list[str]
    t_range: tuple[float, float] = (0.0, 1.0)
    closed: Optional[bool] = None


class CurvatureCurve(_Strict):
    kind: Literal["from_curvature"]
    point: list[float]
    direction: list[float]
    kappa: str = "0"
    length: float = Field(gt=0)


Curve = Annotated[
    Union[LatitudeCurve, GeodesicCurve, ParamCurve, CurvatureCurve], Field(discriminator="kind")
]


class GridModel(_Strict):
    nu: int = Field(20, ge=1)
    nv: int = Field(20, ge=1)
    u_range: Optional[tuple[float, float]] = None
    v_range: Optional[tuple[float, float]] = None


class GridTriangulation(_Strict):
    kind: Literal["grid"]
    nu: int = Field(10, ge=2)
    nv: int = Field(10, ge=2)
    samples: int = Field(32, ge=4)


class FileTriangulation(_Strict):
    kind: Literal["file"]
    path: str
    samples: int = Field(64, ge=4)


TriangulationModel = Annotated[Union[GridTriangulation, FileTriangulation], Field(discriminator="kind")]


class OutputModel(_Strict):
    dir: str = "out"


class RunConfig(_Strict):
    """Everything a run reads; unknown keys are rejected at every level."""

    command: Optional[Literal[COMMANDS]] = None  # type: ignore[valid-type]
    surface: Surface
    curve: Optional[Curve] = None
    samples: int = Field(1000, ge=2)
    jet: tuple[float, float, float] = (1.0, 0.0, 0.0)
    frame: Literal["chart", "tangent"] = "chart"
    tolerances: TolerancesModel = Field(default_factory=TolerancesModel)  # type: ignore[valid-type]
    grid: GridModel = Field(default_factory=GridModel)
    triangulation: TriangulationModel = Field(default_factory=lambda: GridTriangulation(kind="grid"))
    dtau: float = Field(1e-3, gt=0)
    point: Optional[list[float]] = None
    points: Optional[list[list[float]]] = None
    random_points: int = Field(0, ge=0)
    field: Optional[list[str]] = None
    field_basis: Literal["coordinate", "frame"] = "coordinate"
    defect_h: list[float] = Field(default_factory=lambda: [1e-2, 1e-3])
    defect_steps: int = Field(64, ge=2)
    output: OutputModel = Field(default_factory=OutputModel)
    seed: int = 0

    def tolerance_values(self) -> Tolerances:
        return Tolerances(**self.tolerances.model_dump())

    def resolved(self) -> dict:
        """The full configuration with every default filled in."""
        return self.model_dump(mode="json")

    def digest(self) -> str:
        text = json.dumps(self.resolved(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def config_schema() -> dict:
    return RunConfig.model_json_schema()
