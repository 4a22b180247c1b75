"""
JSON schemas for series, matrices and systems, plus conversions to the library types.
"""

import json
from pathlib import Path
from typing import List, Optional, Type, TypeVar

from pydantic import BaseModel, Field, NonNegativeFloat, PositiveFloat, PositiveInt, model_validator

from linsys import AlgebraMatrix, SystemDef
from series import NcSeries, TruncationPolicy

ModelT = TypeVar("ModelT", bound=BaseModel)


class TruncModel(BaseModel):
    max_len: int = Field(ge=0)
    max_letter: Optional[PositiveInt] = None
    drop_tol: NonNegativeFloat = 0.0
    max_terms: Optional[PositiveInt] = None


class TermModel(BaseModel):
    word: List[PositiveInt]
    re: float
    im: float = 0.0


class SeriesModel(BaseModel):
    trunc: TruncModel
    terms: List[TermModel] = []


class MatrixModel(BaseModel):
    rows: PositiveInt
    cols: PositiveInt
    trunc: TruncModel
    entries: List[List[List[TermModel]]]

    @model_validator(mode="after")
    def check_shape(self):
        if len(self.entries) != self.rows or any(len(row) != self.cols for row in self.entries):
            raise ValueError(f"entries do not form a {self.rows}x{self.cols} grid")
        return self


class SystemModel(BaseModel):
    A: MatrixModel
    B: MatrixModel
    C: MatrixModel
    D: MatrixModel


class SimulationModel(BaseModel):
    h: List[MatrixModel] = Field(min_length=1)
    u: List[MatrixModel] = Field(min_length=1)


class ImpulseResponseModel(BaseModel):
    h: List[MatrixModel]


class TrajectoryModel(BaseModel):
    y: List[MatrixModel]


class CliConfig(BaseModel):
    """Effective settings of one CLI run: argparse flags layered over Config."""

    seed: int = Field(default=0, ge=0, lt=2**64)
    deterministic: bool = False
    trunc_len: int = Field(default=6, ge=0)
    max_letter: PositiveInt = 8
    zero_expectation_tol: Optional[PositiveFloat] = None
    rank_rtol: Optional[PositiveFloat] = None
    residual_tol: Optional[PositiveFloat] = None
    output: Optional[str] = None
    log_level: str = "INFO"


def trunc_to_model(trunc: TruncationPolicy) -> TruncModel:
    return TruncModel(
        max_len=trunc.max_len, max_letter=trunc.max_letter, drop_tol=trunc.drop_tol, max_terms=trunc.max_terms
    )


def trunc_from_model(model: TruncModel) -> TruncationPolicy:
    return TruncationPolicy(**model.model_dump())


def _terms_to_model(f: NcSeries) -> List[TermModel]:
    return [TermModel(word=list(w), re=c.real, im=c.imag) for w, c in f.items()]


def _series_from_terms(terms: List[TermModel], trunc: TruncationPolicy) -> NcSeries:
    return NcSeries.from_terms(((t.word, complex(t.re, t.im)) for t in terms), trunc)


def series_to_model(f: NcSeries) -> SeriesModel:
    return SeriesModel(trunc=trunc_to_model(f.trunc), terms=_terms_to_model(f))


def series_from_model(model: SeriesModel) -> NcSeries:
    """Words outside the declared truncation raise TruncationViolation."""
    return _series_from_terms(model.terms, trunc_from_model(model.trunc))


def matrix_to_model(X: AlgebraMatrix) -> MatrixModel:
    return MatrixModel(
        rows=X.rows,
        cols=X.cols,
        trunc=trunc_to_model(X.trunc),
        entries=[[_terms_to_model(f) for f in row] for row in X.entries],
    )


def matrix_from_model(model: MatrixModel) -> AlgebraMatrix:
    trunc = trunc_from_model(model.trunc)
    return AlgebraMatrix([[_series_from_terms(cell, trunc) for cell in row] for row in model.entries], trunc)


def system_to_model(system: SystemDef) -> SystemModel:
    return SystemModel(
        A=matrix_to_model(system.A),
        B=matrix_to_model(system.B),
        C=matrix_to_model(system.C),
        D=matrix_to_model(system.D),
    )


def system_from_model(model: SystemModel) -> SystemDef:
    return SystemDef(
        A=matrix_from_model(model.A),
        B=matrix_from_model(model.B),
        C=matrix_from_model(model.C),
        D=matrix_from_model(model.D),
    )


def load_json(path: str, model_cls: Type[ModelT]) -> ModelT:
    """Parse and validate a JSON file; raises OSError or pydantic.ValidationError."""
    return model_cls.model_validate_json(Path(path).read_text(encoding="utf-8"))


def dump_json(model: BaseModel, path: Optional[str] = None) -> str:
    """Serialize model; write it to path when given. Floats keep their shortest round-trip repr."""
    text = json.dumps(model.model_dump(mode="json"), indent=2)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
    return text
