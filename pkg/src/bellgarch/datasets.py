"""Dataset ingestion: single-column count CSVs and the two bundled
real-data series (when present under ``data/``)."""

import hashlib
import os
from pathlib import Path

import numpy as np

from .ingarch import CountSeries

# summary statistics the two reference series must reproduce
TEX_MEAN, TEX_VAR = 2.4007, 7.5343
SOAP_MEAN, SOAP_VAR = 5.4421, 15.4012


class DataFormatError(ValueError):
    """Input file failed to parse; ``line`` is the 1-based line number."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class DatasetUnavailable(RuntimeError):
    pass


def load_count_csv(path):
    """Parse a single-column CSV of non-negative integers.

    An optional non-numeric header row is skipped; blank lines at the
    end are tolerated.  UTF-8, LF or CRLF.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataFormatError(f"cannot read {path}: {exc}") from exc
    values = []
    lines = text.split("\n")
    for i, raw in enumerate(lines, start=1):
        token = raw.strip().rstrip("\r").strip()
        if token == "":
            if any(l.strip() for l in lines[i:]):
                raise DataFormatError(f"{path}: blank line {i} inside data", line=i)
            continue
        if "," in token:
            raise DataFormatError(
                f"{path}: line {i}: expected a single column, got {token!r}", line=i
            )
        try:
            v = int(token)
        except ValueError:
            if i == 1:
                continue  # header
            raise DataFormatError(
                f"{path}: line {i}: not an integer: {token!r}", line=i
            ) from None
        if v < 0:
            raise DataFormatError(f"{path}: line {i}: negative count {v}", line=i)
        values.append(v)
    if not values:
        raise DataFormatError(f"{path}: no observations found", line=1)
    return CountSeries(np.array(values, dtype=np.int64))


def write_count_csv(series, path, header="count"):
    with open(path, "w", newline="") as fh:
        fh.write(header + "\n")
        for v in series.values:
            fh.write(f"{int(v)}\n")


def sha256_of(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def data_dir():
    env = os.environ.get("BELLGARCH_DATA_DIR")
    if env:
        return Path(env)
    repo = Path(__file__).resolve().parents[2] / "data"
    if repo.is_dir():
        return repo
    return Path.cwd() / "data"


def _checked_series(name, expect_mean, expect_var):
    path = data_dir() / name
    if not path.is_file():
        raise DatasetUnavailable(
            f"{path} is not present; see data/README.md for how to obtain it"
        )
    series = load_count_csv(path)
    x = series.values.astype(float)
    mean = x.mean()
    # the reference variance's denominator convention is not recorded;
    # accept either
    var_ok = min(abs(x.var(ddof=d) - expect_var) for d in (0, 1)) <= 2e-3
    if abs(mean - expect_mean) > 1e-3 or not var_ok:
        raise DatasetUnavailable(
            f"{path} does not match the reference summary statistics "
            f"(mean {mean:.4f} vs {expect_mean}, variance {x.var(ddof=1):.4f} vs "
            f"{expect_var}); refusing to treat it as the reference series"
        )
    return series


def tex_downloads():
    """Daily download counts of a TeX editor (length 267)."""
    return _checked_series("tex_downloads.csv", TEX_MEAN, TEX_VAR)


def soap_sales():
    """Weekly sales of a soap product (length 242); fetched, not bundled."""
    return _checked_series("soap_sales.csv", SOAP_MEAN, SOAP_VAR)
