"""
File formats

Coefficient CSV: one row per observation, p numeric columns, no header.
Curve CSV:       one row per observation, one column per grid point; an
                 optional first row of ``t=<grid point>`` labels gives the grid,
                 otherwise the grid is uniform on [0, 1].
Reports:         JSON, the infinite statistic written as the string "inf".
"""

import json
import logging
import os
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from fcpd.errors import DataFormatError, DimensionError
from fcpd.hilbert import FOURIER_25, BasisDescriptor, FunctionalSample, evaluate_curve, project_curve
from fcpd.spectral import EigenSystem, explained_variance

logger = logging.getLogger(__name__)

GRID_PREFIX = 't='
INPUT_KINDS = ('auto', 'coeffs', 'curves')


def _read_table(path: str, header: bool) -> pd.DataFrame:
    try:
        df = pd.read_csv(path, header=0 if header else None, dtype=str, skip_blank_lines=False)
    except pd.errors.EmptyDataError:
        raise DataFormatError(f"{path} is empty")
    except pd.errors.ParserError as e:
        raise DataFormatError(f"{path}: {e}")

    # blank rows are kept by the parser so row i sits on physical line i + offset
    offset = 2 if header else 1
    text = df.apply(lambda col: col.str.strip())
    blank = (text.isna() | (text == '')).all(axis=1).values
    lines = np.arange(len(df))[~blank] + offset
    text = text[~blank].reset_index(drop=True)
    if text.empty:
        raise DataFormatError(f"{path} contains no observations")

    numeric = text.apply(lambda col: pd.to_numeric(col, errors='coerce'))
    bad = numeric.isna() | ~np.isfinite(numeric.fillna(0.0))
    if bad.values.any():
        row = int(np.argmax(bad.values.any(axis=1)))
        col = int(np.argmax(bad.values[row]))
        raise DataFormatError(f"non-numeric or missing value in column {col + 1}", line=int(lines[row]))
    return numeric.astype(float)


def _has_grid_header(path: str) -> bool:
    with open(path) as f:
        first = f.readline().strip()
    return first.startswith(GRID_PREFIX)


def _parse_grid(columns: Sequence[str]) -> np.ndarray:
    grid = []
    for col in columns:
        label = str(col).strip()
        if not label.startswith(GRID_PREFIX):
            raise DataFormatError(f"header entry '{label}' is not of the form t=<grid point>", line=1)
        try:
            grid.append(float(label[len(GRID_PREFIX):]))
        except ValueError:
            raise DataFormatError(f"header entry '{label}' has a non-numeric grid point", line=1)
    return np.array(grid)


def read_coefficients(path: str, basis: Optional[BasisDescriptor] = None) -> FunctionalSample:
    """Coefficient CSV to sample; the basis dimension defaults to the column count"""
    df = _read_table(path, header=False)
    p = df.shape[1]
    basis = basis or BasisDescriptor('fourier', p)
    if basis.dimension != p:
        raise DimensionError(f"{path} has {p} columns, basis has dimension {basis.dimension}")
    return FunctionalSample(df.values, basis)


def read_curves(path: str) -> Tuple[np.ndarray, np.ndarray]:
    """
    Curve CSV to (grid, values)

    Returns:
        grid of length m and an (n, m) array of curve values
    """
    header = _has_grid_header(path)
    df = _read_table(path, header=header)
    if header:
        grid = _parse_grid(df.columns)
    else:
        grid = np.linspace(0.0, 1.0, df.shape[1])
    return grid, df.values


def read_sample(path: str, kind: str = 'auto', basis: BasisDescriptor = FOURIER_25) -> FunctionalSample:
    """
    Read either format; curves are projected onto ``basis``

    With kind='auto' a ``t=`` header means curves, a column count equal to the
    basis dimension means coefficients, anything else is read as curves.
    """
    if kind not in INPUT_KINDS:
        raise ValueError(f"Unknown input kind '{kind}', expected one of {INPUT_KINDS}")
    if not os.path.exists(path):
        raise FileNotFoundError(path)

    if kind == 'auto':
        if _has_grid_header(path):
            kind = 'curves'
        else:
            with open(path) as f:
                first = f.readline()
            kind = 'coeffs' if len(first.split(',')) == basis.dimension else 'curves'
        logger.debug(f"Reading {path} as {kind}")

    if kind == 'coeffs':
        return read_coefficients(path, basis)
    grid, values = read_curves(path)
    return FunctionalSample(project_curve(values, grid, basis), basis)


def write_coefficients(sample: FunctionalSample, path: str):
    pd.DataFrame(sample.coeffs).to_csv(path, header=False, index=False, float_format='%.17g')


def write_curves(values: np.ndarray, grid: np.ndarray, path: str):
    columns = [f"{GRID_PREFIX}{t:.10g}" for t in grid]
    pd.DataFrame(np.atleast_2d(values), columns=columns).to_csv(path, index=False, float_format='%.17g')


def sample_to_curves(sample: FunctionalSample, grid: np.ndarray) -> np.ndarray:
    return evaluate_curve(sample.coeffs, grid, sample.basis)


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return 'inf' if np.isinf(obj) else float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def dumps_report(report: Dict) -> str:
    return json.dumps(report, indent=2, default=_json_default)


def write_report(report: Dict, path: Optional[str] = None):
    """JSON report to a file, or stdout when path is None"""
    text = dumps_report(report)
    if path is None:
        print(text)
        return
    with open(path, 'w') as f:
        f.write(text + '\n')
    logger.info(f"Report saved to {path}")


def components_frame(E: EigenSystem, count: int, basis: BasisDescriptor = FOURIER_25,
                     grid: Optional[np.ndarray] = None, aligned: Optional[np.ndarray] = None,
                     deltas: Sequence[np.ndarray] = ()) -> pd.DataFrame:
    """
    Plot-ready table of principal components

    One row per eigenvector v_1..v_count, then one row for the aligned first
    component and one per known change direction. With ``grid`` the vectors are
    evaluated as curves (columns t=...), otherwise coefficients are written
    (columns c1..cp).
    """
    count = min(count, E.p)
    rows, labels, values, shares = [], [], [], []
    for j in range(1, count + 1):
        labels.append(f"v{j}")
        values.append(float(E.values[j - 1]))
        shares.append(explained_variance(E, j))
        rows.append(E.component(j))
    if aligned is not None:
        labels.append('v1_aligned')
        values.append(float(E.values[0]))
        shares.append(np.nan)
        rows.append(np.asarray(aligned))
    for i, delta in enumerate(deltas, start=1):
        labels.append(f"delta{i}")
        values.append(np.nan)
        shares.append(np.nan)
        rows.append(np.asarray(delta))

    M = np.vstack(rows)
    if grid is not None:
        M = evaluate_curve(M, grid, basis)
        columns = [f"{GRID_PREFIX}{t:.10g}" for t in grid]
    else:
        columns = [f"c{k}" for k in range(1, M.shape[1] + 1)]

    frame = pd.DataFrame(M, columns=columns)
    frame.insert(0, 'explained_variance', shares)
    frame.insert(0, 'eigenvalue', values)
    frame.insert(0, 'component', labels)
    return frame
