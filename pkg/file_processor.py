"""
File processing module for measure CSV files and inline argument lists
"""

import logging
import re
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from config import Config
from errors import InvalidArgument, InvalidMeasure
from measures import make_measure
from schemas import DiscreteMeasure

class FileProcessor:
    """Reads and writes measures in the `atom,weight` CSV format"""

    def __init__(self, config: Config):
        self.config = config
        self.logger = logging.getLogger(__name__)

    def read_measure(self, file_path: str) -> DiscreteMeasure:
        """
        Load a measure from CSV

        Args:
            file_path: CSV with header `atom,weight` or `atom` only (uniform weights);
                lines starting with `#` are ignored

        Returns:
            Normalized DiscreteMeasure
        """
        frame = self._read_frame(file_path)
        atoms = _numeric_column(frame, "atom", file_path)
        weights = _numeric_column(frame, "weight", file_path) if "weight" in frame.columns else None

        rho = make_measure(atoms, weights)
        self.logger.info(f"Loaded measure with {rho.size} atoms from {file_path}")
        return rho

    def _read_frame(self, file_path: str) -> pd.DataFrame:
        """Validated CSV frame with lower-case column names and an `atom` column"""
        self.config.validate_file(file_path)
        try:
            frame = pd.read_csv(file_path, comment="#", encoding="utf-8", skipinitialspace=True)
        except (pd.errors.EmptyDataError, pd.errors.ParserError) as e:
            raise InvalidMeasure(f"Cannot parse measure file {file_path}: {e}")

        frame.columns = [str(c).strip().lower() for c in frame.columns]
        if "atom" not in frame.columns:
            raise InvalidMeasure(f"Measure file {file_path} has no `atom` column")
        return frame

    def write_measure(self, rho: DiscreteMeasure, file_path: str) -> str:
        path = Path(file_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame = pd.DataFrame({"atom": rho.atoms, "weight": rho.weights})
        frame.to_csv(path, index=False, encoding="utf-8", float_format="%.17g", lineterminator="\n")
        self.logger.debug(f"Wrote measure with {rho.size} atoms to {path}")
        return str(path)

    def resolve_measure(self, points: Optional[str] = None, base: Optional[str] = None) -> DiscreteMeasure:
        """Measure from exactly one of an inline list or a CSV path"""
        if points is not None and base is not None:
            raise InvalidArgument("give either an inline atom list or a measure file, not both")
        if base is not None:
            return self.read_measure(base)
        if points is not None:
            return make_measure(parse_real_list(points))
        raise InvalidArgument("a measure is required (inline atom list or CSV file)")

    def resolve_points(self, points: Optional[str] = None, base: Optional[str] = None) -> np.ndarray:
        """Raw atom list (duplicates kept) for the symmetric-function evaluators"""
        if points is not None and base is not None:
            raise InvalidArgument("give either an inline atom list or a measure file, not both")
        if base is not None:
            atoms = _numeric_column(self._read_frame(base), "atom", base)
            if atoms.size == 0:
                raise InvalidMeasure(f"Measure file {base} has no atoms")
            return atoms
        if points is not None:
            return np.asarray(parse_real_list(points))
        raise InvalidArgument("points are required (inline list or CSV file)")


def _numeric_column(frame: pd.DataFrame, name: str, file_path: str) -> np.ndarray:
    values = pd.to_numeric(frame[name], errors="coerce").to_numpy(dtype=float)
    if np.isnan(values).any():
        raise InvalidMeasure(f"Measure file {file_path} contains non-numeric entries in column `{name}`")
    return values

def parse_complex(text: str) -> complex:
    """Parse `1`, `-2.5`, `3i`, `1+2i` or `1-0.5j` into a complex number"""
    cleaned = str(text).strip().replace(" ", "").replace("I", "i").replace("i", "j")
    cleaned = re.sub(r"(^|[+-])j", r"\g<1>1j", cleaned)
    try:
        return complex(cleaned)
    except ValueError:
        raise InvalidArgument(f"cannot parse complex number {text!r}")

def parse_real_list(text: str) -> List[float]:
    try:
        values = [float(item) for item in str(text).split(",") if item.strip()]
    except ValueError:
        raise InvalidArgument(f"cannot parse list of reals {text!r}")
    if not values:
        raise InvalidArgument("list must not be empty")
    return values

def parse_complex_list(text: str) -> List[complex]:
    values = [parse_complex(item) for item in str(text).split(",") if item.strip()]
    if not values:
        raise InvalidArgument("list must not be empty")
    return values

def parse_int_list(text: str) -> List[int]:
    try:
        values = [int(item) for item in str(text).split(",") if item.strip()]
    except ValueError:
        raise InvalidArgument(f"cannot parse list of integers {text!r}")
    if not values or min(values) < 1:
        raise InvalidArgument(f"expected positive integers, got {text!r}")
    return values
