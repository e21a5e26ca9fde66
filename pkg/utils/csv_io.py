"""
CSV ingestion and emission.

All numbers are written with 17 significant digits so that every file
re-parses to bitwise identical doubles. Files are UTF-8, comma separated,
LF terminated, and written atomically (temporary file, then rename).
"""

import io
import logging
import os
import tempfile

import numpy as np

from core.errors import DataError, FormatError, GridError, OutputError
from engine.model import TimeGrid
from tomography.master_equation import INGESTED, MagnetizationTrace, to_arrays

logger = logging.getLogger(__name__)

# mkstemp creates 0600 files; artifacts get the usual 0666 & ~umask
_UMASK = os.umask(0)
os.umask(_UMASK)
FILE_MODE = 0o666 & ~_UMASK

TRACE_HEADER = 't_s,re_sigma_minus,im_sigma_minus'
WITNESS_HEADER = 't_s,lq,h1,h2,lg,viol_lq,viol_h1,viol_h2,viol_lg'
GENERATOR_HEADER = 't_s,f_hat,g_hat,singular'
NONMARKOV_HEADER = 't_s,total_rate,sigma,negative_rate'

SPACING_TOL = 1e-9
FLOAT_FMT = '%.17g'


def atomic_write_text(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix=os.path.basename(path))
        try:
            with os.fdopen(fd, 'w', encoding='utf-8', newline='\n') as f:
                f.write(text)
            os.chmod(tmp_path, FILE_MODE)
            os.replace(tmp_path, path)
        except BaseException:
            if os.path.exists(tmp_path):
                os.unlink(tmp_path)
            raise
    except OSError as exc:
        raise OutputError(f"cannot write {path}: {exc}") from exc
    logger.debug("wrote %s (%d bytes)", path, len(text))
    return path


def _table_text(header, columns, fmts):
    buffer = io.StringIO()
    data = np.column_stack(columns) if columns else np.empty((0, 0))
    np.savetxt(buffer, data, fmt=fmts, delimiter=',', header=header, comments='', newline='\n')
    return buffer.getvalue()


def read_table(path, header):
    """Columns of a CSV whose first line must equal `header` exactly."""
    try:
        with open(path, 'r', encoding='utf-8', newline='') as f:
            first = f.readline()
            body = f.read()
    except FileNotFoundError as exc:
        raise FormatError(f"no such file: {path}") from exc
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path} is not UTF-8 text") from exc

    if first.rstrip('\n') != header:
        raise FormatError(f"{path}: expected header {header!r}, found {first.rstrip()!r}")
    names = header.split(',')
    if not body.strip():
        return {name: np.empty(0) for name in names}
    try:
        data = np.loadtxt(io.StringIO(body), delimiter=',', ndmin=2)
    except ValueError as exc:
        raise FormatError(f"{path}: malformed row ({exc})") from exc
    if data.shape[1] != len(names):
        raise FormatError(f"{path}: expected {len(names)} columns, found {data.shape[1]}")
    return {name: data[:, i] for i, name in enumerate(names)}


def parse_trace_csv(path) -> MagnetizationTrace:
    columns = read_table(path, TRACE_HEADER)
    t = columns['t_s']
    values = columns['re_sigma_minus'] + 1j * columns['im_sigma_minus']
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(values))):
        raise DataError(f"{path}: NaN or infinite entries")
    if t.size < 2:
        raise GridError(f"{path}: a trace needs at least two samples, found {t.size}")
    steps = np.diff(t)
    if np.any(steps <= 0):
        raise GridError(f"{path}: t_s is not strictly increasing")
    dt = (t[-1] - t[0]) / (t.size - 1)
    if np.max(np.abs(steps - dt)) > SPACING_TOL:
        raise GridError(f"{path}: sample spacing is not uniform within {SPACING_TOL} s")
    logger.info("ingested %d samples from %s", t.size, path)
    return MagnetizationTrace(TimeGrid(float(t[0]), float(dt), int(t.size)), values, INGESTED, times=t)


def write_trace_csv(path, trace: MagnetizationTrace):
    text = _table_text(TRACE_HEADER, [trace.times, trace.values.real, trace.values.imag], FLOAT_FMT)
    return atomic_write_text(path, text)


def write_witness_csv(path, report):
    lg = report.lg if report.lg is not None else np.full(len(report.grid), np.nan)
    columns = [report.times, report.lq, report.h1, report.h2, lg,
               report.viol_lq, report.viol_h1, report.viol_h2, report.viol_lg]
    fmts = [FLOAT_FMT] * 5 + ['%d'] * 4
    return atomic_write_text(path, _table_text(WITNESS_HEADER, columns, fmts))


def write_generator_csv(path, samples):
    """The g_hat column holds the total rate gamma + g(t), as inferred."""
    t, f, g, singular = to_arrays(samples)
    fmts = [FLOAT_FMT] * 3 + ['%d']
    return atomic_write_text(path, _table_text(GENERATOR_HEADER, [t, f, g, singular], fmts))


def write_nonmarkov_csv(path, report):
    columns = [report.times, report.total_rate, report.sigma, report.negative_rate]
    fmts = [FLOAT_FMT] * 3 + ['%d']
    return atomic_write_text(path, _table_text(NONMARKOV_HEADER, columns, fmts))
