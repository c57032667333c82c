"""Rectangular observational data: covariates, exposure, mediators, outcome.

The CSV interchange format is a plain comma-separated file with a header
row, ``.`` as the decimal point, binary columns written as ``0``/``1``, and
floats formatted with 17 significant digits so values round-trip exactly.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass

import numpy as np


class DataError(ValueError):
    """Invalid dataset contents."""


def format_float(value: float) -> str:
    """17-significant-digit decimal form; parses back to the same double."""
    return "%.17g" % float(value)


@dataclass
class Dataset:
    """Observational sample with binary exposure and binary mediators.

    ``covariates`` is n x p (float), ``mediators`` is n x K with columns in
    causal (topological) order; all values must be finite; exposure and
    mediator entries must be 0/1.
    """

    covariates: np.ndarray
    exposure: np.ndarray
    mediators: np.ndarray
    outcome: np.ndarray
    covariate_names: tuple[str, ...]
    mediator_names: tuple[str, ...]
    exposure_name: str = "A"
    outcome_name: str = "Y"

    def __post_init__(self):
        self.covariates = np.asarray(self.covariates, dtype=float)
        self.exposure = np.asarray(self.exposure, dtype=float)
        self.mediators = np.asarray(self.mediators, dtype=float)
        self.outcome = np.asarray(self.outcome, dtype=float)
        if self.covariates.ndim != 2:
            raise DataError("covariate matrix must be 2-dimensional")
        if self.mediators.ndim != 2:
            raise DataError("mediator matrix must be 2-dimensional")
        n = self.covariates.shape[0]
        if n < 1:
            raise DataError("dataset must contain at least one row")
        for name, arr in (
            ("exposure", self.exposure),
            ("mediators", self.mediators),
            ("outcome", self.outcome),
        ):
            if arr.shape[0] != n:
                raise DataError(f"{name} has {arr.shape[0]} rows, expected {n}")
        if self.covariates.shape[1] != len(self.covariate_names):
            raise DataError("covariate_names must match covariate columns")
        if self.mediators.shape[1] != len(self.mediator_names):
            raise DataError("mediator_names must match mediator columns")
        if self.mediators.shape[1] < 1:
            raise DataError("at least one mediator column required")
        for name, arr in (
            ("covariates", self.covariates),
            ("exposure", self.exposure),
            ("mediators", self.mediators),
            ("outcome", self.outcome),
        ):
            if not np.all(np.isfinite(arr)):
                raise DataError(f"non-finite value in {name}")
        for name, arr in (("exposure", self.exposure), ("mediators", self.mediators)):
            if not np.all((arr == 0.0) | (arr == 1.0)):
                raise DataError(f"{name} values must be 0 or 1")

    # -- shape helpers -----------------------------------------------------

    @property
    def n(self) -> int:
        return self.covariates.shape[0]

    @property
    def n_mediators(self) -> int:
        return self.mediators.shape[1]

    @property
    def column_names(self) -> tuple[str, ...]:
        return (
            *self.covariate_names,
            self.exposure_name,
            *self.mediator_names,
            self.outcome_name,
        )

    def column(self, name: str) -> np.ndarray:
        if name == self.exposure_name:
            return self.exposure
        if name == self.outcome_name:
            return self.outcome
        if name in self.covariate_names:
            return self.covariates[:, self.covariate_names.index(name)]
        if name in self.mediator_names:
            return self.mediators[:, self.mediator_names.index(name)]
        raise DataError(f"unknown column {name!r}")

    def columns(self) -> dict[str, np.ndarray]:
        return {name: self.column(name) for name in self.column_names}

    def mediator(self, k: int) -> np.ndarray:
        """Mediator column by 1-based causal index."""
        if not 1 <= k <= self.n_mediators:
            raise DataError(f"mediator index {k} out of range 1..{self.n_mediators}")
        return self.mediators[:, k - 1]

    def require_both_exposure_levels(self):
        if not (np.any(self.exposure == 0.0) and np.any(self.exposure == 1.0)):
            raise DataError("both exposure levels must be present")

    def take(self, idx: np.ndarray) -> "Dataset":
        """Row subset / resample; shares names, copies rows."""
        return Dataset(
            self.covariates[idx],
            self.exposure[idx],
            self.mediators[idx],
            self.outcome[idx],
            self.covariate_names,
            self.mediator_names,
            self.exposure_name,
            self.outcome_name,
        )

    # -- CSV ---------------------------------------------------------------

    def to_csv_text(self) -> str:
        binary = {self.exposure_name, *self.mediator_names}
        buf = io.StringIO()
        buf.write(",".join(self.column_names) + "\n")
        cols = [self.column(name) for name in self.column_names]
        for i in range(self.n):
            cells = []
            for name, col in zip(self.column_names, cols):
                if name in binary:
                    cells.append(str(int(col[i])))
                else:
                    cells.append(format_float(col[i]))
            buf.write(",".join(cells) + "\n")
        return buf.getvalue()

    def to_csv(self, path: str):
        write_text_atomic(path, self.to_csv_text())


def write_text_atomic(path: str, text: str):
    """Write + rename so failures never leave partial files behind."""
    directory = os.path.dirname(os.path.abspath(path))
    tmp = os.path.join(directory, f".{os.path.basename(path)}.tmp.{os.getpid()}")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def read_csv_columns(path: str) -> dict[str, np.ndarray]:
    """Read a CSV into named float columns, rejecting missing/bad cells."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise DataError(f"{path}: duplicate column in header")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) != len(header):
                raise DataError(
                    f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}"
                )
            parsed = []
            for name, cell in zip(header, row):
                cell = cell.strip()
                if cell == "":
                    raise DataError(f"{path}: line {lineno}: missing value in {name!r}")
                try:
                    parsed.append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: line {lineno}: bad value {cell!r} in {name!r}"
                    ) from None
            rows.append(parsed)
    if not rows:
        raise DataError(f"{path}: no data rows")
    matrix = np.asarray(rows, dtype=float)
    return {name: matrix[:, j] for j, name in enumerate(header)}
