# src/experiments/reports.py
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


def plain(value: Any) -> Any:
    """numpy scalars and arrays, tuples and nested containers as JSON-ready Python objects"""
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    return value


class Report(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    @model_validator(mode='before')
    @classmethod
    def _plain_inputs(cls, data):
        return plain(data) if isinstance(data, dict) else data


class IntervalSchema(Report):
    center: float
    length: float


class ProbeSchema(Report):
    x: float = Field(..., description="Sample position closest to the requested probe")
    value: float
    partition: List[float] = Field(default_factory=list, description="Frequencies of the maximizing partition")


class CarlesonReport(Report):
    operator: str
    r: float
    frequency_grid: List[float]
    samples: int
    max_value: float
    probes: List[ProbeSchema] = Field(default_factory=list)
    config: Dict[str, Any]


class FieldReport(Report):
    embedding: str = Field(..., description="F for the energy embedding of f, A for the mass embedding of g")
    linearization: Optional[str] = None
    tile_grid: Dict[str, Any]
    wave_packet: Dict[str, float]
    max_value: float
    total_mass: float
    config: Dict[str, Any]


class SparseReport(Report):
    intervals: List[IntervalSchema]
    witnesses: List[List[IntervalSchema]]
    eta: float
    certificate: Dict[str, Any]
    trace: Dict[str, Any]
    context: Dict[str, Any]
    config: Dict[str, Any]


class VerificationReport(Report):
    lhs: float
    rhs: float
    ratio: float
    certificate: Dict[str, Any]
    maximal_chain: Dict[str, Any]
    config: Dict[str, Any]


class ReconstructionReport(Report):
    xi_minus: float
    xi_plus: float
    scales: int
    scales_per_octave: int
    middle_error: float = Field(..., description="max |m - 1| over the middle half of (xi-, xi+)")
    outside_error: float = Field(..., description="max |m| at distance beyond xi+ - xi-")
    low_confidence: bool
    config: Dict[str, Any]


class WeightsReport(Report):
    slope: float
    intercept: float
    bound: float
    passed: bool = Field(..., alias='pass')
    r: float
    q: float
    t: float
    rows: int
    config: Dict[str, Any]


def write_report(path: Union[str, Path], report: Report):
    Path(path).write_text(report.model_dump_json(indent=2, by_alias=True) + '\n')
