"""Schema-checked reader for sweep result CSV files.

The producer contract is a fixed 13-column header; anything else is
rejected up front so a stale or hand-edited file fails loudly instead of
rendering an empty or mislabeled figure.
"""

import csv
from dataclasses import dataclass
from typing import Optional

from .errors import SchemaError

# Verbatim producer header; column order is part of the contract.
CSV_HEADER = ("scenario,precoder,normalization,M,K,D,rho_db,estimator,"
              "sinr_db,sinr_db_stderr,trials,seed,flags")

_COLUMNS = CSV_HEADER.split(",")


@dataclass(frozen=True)
class SweepRow:
    """One result cell; empty numeric fields come through as None."""

    scenario: str
    precoder: str
    normalization: str
    M: int
    K: int
    D: int
    rho_db: float
    estimator: str
    sinr_db: Optional[float]
    sinr_db_stderr: Optional[float]
    trials: Optional[int]
    seed: Optional[int]
    flags: str

    @property
    def plottable(self) -> bool:
        """True when the cell carries a value (not singular/infeasible)."""
        return self.sinr_db is not None


def _opt_float(text, lineno, column):
    if text == "":
        return None
    try:
        return float(text)
    except ValueError:
        raise SchemaError(f"line {lineno}: column '{column}' "
                          f"is not a number: {text!r}") from None


def _opt_int(text, lineno, column):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        raise SchemaError(f"line {lineno}: column '{column}' "
                          f"is not an integer: {text!r}") from None


def _req_int(text, lineno, column):
    value = _opt_int(text, lineno, column)
    if value is None:
        raise SchemaError(f"line {lineno}: column '{column}' is empty")
    return value


def _req_float(text, lineno, column):
    value = _opt_float(text, lineno, column)
    if value is None:
        raise SchemaError(f"line {lineno}: column '{column}' is empty")
    return value


def read_sweep(path):
    """Parse a sweep CSV into a list of SweepRow.

    Raises SchemaError if the header differs from the producer contract
    or any data row is malformed.
    """
    with open(path, "r", newline="") as fh:
        header = fh.readline().rstrip("\r\n")
        if header != CSV_HEADER:
            raise SchemaError(
                f"{path}: header mismatch\n  expected: {CSV_HEADER}\n"
                f"  got:      {header}")
        rows = []
        for lineno, rec in enumerate(csv.reader(fh), start=2):
            if not rec:
                continue  # tolerate a trailing blank line
            if len(rec) != len(_COLUMNS):
                raise SchemaError(f"line {lineno}: expected "
                                  f"{len(_COLUMNS)} fields, got {len(rec)}")
            rows.append(SweepRow(
                scenario=rec[0],
                precoder=rec[1],
                normalization=rec[2],
                M=_req_int(rec[3], lineno, "M"),
                K=_req_int(rec[4], lineno, "K"),
                D=_req_int(rec[5], lineno, "D"),
                rho_db=_req_float(rec[6], lineno, "rho_db"),
                estimator=rec[7],
                sinr_db=_opt_float(rec[8], lineno, "sinr_db"),
                sinr_db_stderr=_opt_float(rec[9], lineno, "sinr_db_stderr"),
                trials=_opt_int(rec[10], lineno, "trials"),
                seed=_opt_int(rec[11], lineno, "seed"),
                flags=rec[12],
            ))
    return rows
