"""
Input files and report emission.

State files are JSON ({"n", "d", "amplitudes": [[re, im], ...]}), graph files are
plain text (vertex count on the first line, one "u v" edge per following line).
Reports go out as CSV with a fixed column order or as JSON mirroring the same schema.
"""
import json
import logging
import math
import sys
from pathlib import Path
from typing import Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from prodtest.errors import InvalidArgumentError, StateFileError
from prodtest.models.schemas import StateFile
from prodtest.services.measures import Graph
from prodtest.services.tensor_core import PureState

logger = logging.getLogger(__name__)

# states off by less than this are renormalized with a warning, larger drift is rejected
RENORMALIZE_TOL = 1e-6
FLOAT_FORMAT = "%.12g"

PathLike = Union[str, Path]


def load_state_file(path: PathLike) -> PureState:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise StateFileError(f"state file not found: {path}")
    except json.JSONDecodeError as e:
        raise StateFileError(f"{path}: not valid JSON ({e.msg} at line {e.lineno}, column {e.colno})")

    try:
        parsed = StateFile.model_validate(raw)
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
        raise StateFileError(f"{path}: {problems}")

    vec = np.array([complex(re, im) for re, im in parsed.amplitudes], dtype=np.complex128)
    if not np.all(np.isfinite(vec)):
        raise StateFileError(f"{path}: amplitudes must be finite")
    norm = float(np.linalg.norm(vec))
    if abs(norm - 1.0) >= RENORMALIZE_TOL:
        raise StateFileError(f"{path}: state norm {norm:.9g} is not 1")
    if abs(norm - 1.0) > 1e-12:
        logger.warning(f"{path}: norm {norm:.15g} renormalized to 1")
    return PureState(n=parsed.n, d=parsed.d, amplitudes=vec / norm)


def save_state_file(psi: PureState, path: PathLike) -> None:
    payload = StateFile(
        n=psi.n, d=psi.d,
        amplitudes=[(float(a.real), float(a.imag)) for a in psi.amplitudes],
    )
    Path(path).write_text(json.dumps(payload.model_dump(mode="json")) + "\n", encoding="utf-8")


def load_graph_file(path: PathLike) -> Graph:
    """Vertex count, then one edge per line; blank lines and '#' comments are skipped."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise StateFileError(f"graph file not found: {path}")

    lines = [(no, line.split("#", 1)[0].strip()) for no, line in enumerate(text.splitlines(), start=1)]
    lines = [(no, line) for no, line in lines if line]
    if not lines:
        raise StateFileError(f"{path}: empty graph file")

    try:
        n = int(lines[0][1])
    except ValueError:
        raise StateFileError(f"{path}:{lines[0][0]}: expected the vertex count, got {lines[0][1]!r}")

    edges = []
    for no, line in lines[1:]:
        fields = line.split()
        if len(fields) != 2:
            raise StateFileError(f"{path}:{no}: expected 'u v', got {line!r}")
        try:
            edges.append((int(fields[0]), int(fields[1])))
        except ValueError:
            raise StateFileError(f"{path}:{no}: vertex labels must be integers, got {line!r}")

    try:
        return Graph(n, frozenset(edges))
    except InvalidArgumentError as e:
        raise StateFileError(f"{path}: {e.detail}")


def _round_floats(value: object) -> object:
    """12 significant digits for floats, None for NaN and infinities, recursively."""
    """12 significant digits for floats, None for NaN and ±inf, recursively."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(FLOAT_FORMAT % value)
    if isinstance(value, dict):
        return {k: _round_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_floats(v) for v in value]
    return value


def _emit(text: str, out: Optional[PathLike]) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        Path(out).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {out}")


def rows_to_csv(rows: Sequence[Dict[str, object]], columns: Sequence[str]) -> str:
    frame = pd.DataFrame(list(rows), columns=list(columns))
    return frame.to_csv(index=False, float_format=FLOAT_FORMAT, na_rep="", lineterminator="\n")


def rows_to_json(rows: Sequence[Dict[str, object]], columns: Sequence[str]) -> str:
    ordered = [{col: row.get(col) for col in columns} for row in rows]
    return json.dumps(_round_floats(ordered), indent=2, allow_nan=False) + "\n"


def write_rows(rows: Sequence[Dict[str, object]], columns: Sequence[str], fmt: str = "csv",
               out: Optional[PathLike] = None) -> str:
    """Serialize report rows in `fmt` to `out` (stdout when None); returns the text written."""
    if fmt == "csv":
        text = rows_to_csv(rows, columns)
    elif fmt == "json":
        text = rows_to_json(rows, columns)
    else:
        raise InvalidArgumentError(f"unknown output format {fmt!r}")
    _emit(text, out)
    return text


def model_to_json(model: BaseModel) -> str:
    return json.dumps(_round_floats(model.model_dump(mode="json")), indent=2, allow_nan=False) + "\n"


def write_model(model: BaseModel, out: Optional[PathLike] = None) -> str:
    text = model_to_json(model)
    _emit(text, out)
    return text
