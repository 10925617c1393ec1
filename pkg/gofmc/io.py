import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable

from pydantic import ValidationError

from gofmc.data.dataset import Counts, Dataset, RealSamples, RegressionPairs
from gofmc.data.shape import DataShape
from gofmc.exceptions import DatasetParseException

REGRESSION_HEADER = ["x", "y"]


def _numbered_lines(text: str) -> list[tuple[int, str]]:
    return [(number, line.strip()) for number, line in enumerate(text.splitlines(), start=1) if line.strip()]


def _parse_int(token: str, line: int, what: str) -> int:
    try:
        value = int(token.strip())
    except ValueError:
        raise DatasetParseException(f"{what} must be an integer, got '{token.strip()}'", line=line)
    if value < 0:
        raise DatasetParseException(f"{what} must be non-negative, got {value}", line=line)
    return value


def _parse_float(token: str, line: int, what: str) -> float:
    try:
        value = float(token.strip())
    except ValueError:
        raise DatasetParseException(f"{what} must be a real number, got '{token.strip()}'", line=line)
    if not math.isfinite(value):
        raise DatasetParseException(f"{what} must be finite, got {token.strip()}", line=line)
    return value


def _parse_counts(lines: list[tuple[int, str]]) -> Counts:
    if len(lines) == 1 and "," in lines[0][1]:
        number, row = lines[0]
        counts = [_parse_int(token, number, "Bin count") for token in row.split(",")]
    else:
        counts = [_parse_int(row, number, "Bin count") for number, row in lines]
    return Counts(counts=counts)


def _parse_real(lines: list[tuple[int, str]]) -> RealSamples:
    return RealSamples(values=[_parse_float(row, number, "Sample") for number, row in lines])


def _parse_regression(text: str) -> RegressionPairs:
    rows = [(number, row) for number, row in enumerate(csv.reader(text.splitlines()), start=1) if any(c.strip() for c in row)]
    if not rows:
        raise DatasetParseException("Empty data file")
    header_line, header = rows[0]
    if [c.strip() for c in header] != REGRESSION_HEADER:
        raise DatasetParseException(f"Expected header 'x,y', got '{','.join(header)}'", line=header_line)
    if len(rows) == 1:
        raise DatasetParseException("Data file has a header but no pairs")

    x, y = [], []
    for number, row in rows[1:]:
        if len(row) != 2:
            raise DatasetParseException(f"Expected 2 columns, got {len(row)}", line=number)
        x.append(_parse_float(row[0], number, "Covariate x"))
        y.append(_parse_int(row[1], number, "Response y"))
    return RegressionPairs(x=x, y=y)


def parse_dataset(text: str, shape: DataShape) -> Dataset:
    lines = _numbered_lines(text)
    if not lines:
        raise DatasetParseException("Empty data file")
    try:
        match shape:
            case DataShape.COUNTS:
                return _parse_counts(lines)
            case DataShape.REAL:
                return _parse_real(lines)
            case DataShape.REGRESSION:
                return _parse_regression(text)
    except ValidationError as e:
        raise DatasetParseException(f"Invalid {shape.value} data: {e.errors()[0]['msg']}") from e


def ingest_dataset(path: str | Path, shape: DataShape) -> Dataset:
    """
    Reads a dataset from a text file.

    counts:     one integer per line, or a single comma-separated row
    real:       one real number per line
    regression: CSV with header 'x,y'; y a non-negative integer

    Raises:
        DatasetParseException: with the 1-based line number where parsing failed
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise DatasetParseException(f"Cannot read data file '{path}': {str(e)}") from e
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        line = raw.count(b"\n", 0, e.start) + 1
        raise DatasetParseException(f"Data file '{path}' is not valid UTF-8 text: {e.reason}", line=line) from e
    return parse_dataset(text, shape)


def format_real(value: float) -> str:
    """17 significant digits; always recognizable as a real."""
    if not math.isfinite(value):
        raise ValueError(f"Cannot serialize non-finite value {value}")
    text = format(value, ".17g")
    if "." not in text and "e" not in text:
        text += ".0"
    return text


def format_dataset(data: Dataset) -> str:
    match data:
        case Counts():
            return "".join(f"{c}\n" for c in data.counts)
        case RealSamples():
            return "".join(f"{format_real(v)}\n" for v in data.values)
        case RegressionPairs():
            return ",".join(REGRESSION_HEADER) + "\n" + "".join(f"{format_real(x)},{y}\n" for x, y in zip(data.x, data.y))
    raise TypeError(f"Unsupported dataset type {type(data).__name__}")


def _encode(value: Any, level: int, indent: int) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_real(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_encode(v, level + 1, indent) for v in value) + "]"
    if isinstance(value, dict):
        if not value:
            return "{}"
        pad = " " * (indent * (level + 1))
        items = [f"{pad}{json.dumps(str(k), ensure_ascii=False)}: {_encode(v, level + 1, indent)}" for k, v in value.items()]
        return "{\n" + ",\n".join(items) + "\n" + " " * (indent * level) + "}"
    raise TypeError(f"Cannot serialize {type(value).__name__} to JSON")


def dump_json(obj: Any, indent: int = 2) -> str:
    """JSON text with every real written at 17 significant digits, keys in insertion order."""
    return _encode(obj, 0, indent) + "\n"


def format_tsv(rows: Iterable[Iterable[Any]], header: Iterable[str] | None = None) -> str:
    def cell(v: Any) -> str:
        if isinstance(v, float):
            return format_real(v) if math.isfinite(v) else str(v)
        if isinstance(v, (list, tuple)):
            return ",".join(cell(x) for x in v)
        return str(v)

    lines = []
    if header is not None:
        lines.append("\t".join(header))
    lines.extend("\t".join(cell(v) for v in row) for row in rows)
    return "".join(f"{line}\n" for line in lines)
