"""CSV and JSON writers.

Every file carries the library version and the SHA-256 of the effective run
configuration.  Floats are written with ``repr`` so that identical arrays give
byte-identical files.
"""

from __future__ import annotations

import json
import os

import numpy as np

from . import __version__


def header_line(config_hash):
    return f"# conekit {__version__} config_sha256={config_hash}\n"


def _fmt(v):
    return repr(float(v))


def write_rows(path, columns, rows, config_hash):
    """Write ``rows`` (iterables of already formatted fields) under a header."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(header_line(config_hash))
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(row) + "\n")


def sample_rows(samples):
    """Rows ``replica,index,c0..`` for an ``(N, dim)`` sample (index 0)."""
    for i, x in enumerate(np.asarray(samples)):
        yield [str(i), "0", *map(_fmt, x)]


def labelled_rows(times, blocks, time_fmt=str):
    """Rows ``replica,time,which,c0..`` from ``{which: (records, reps, dim)}``."""
    names = list(blocks)
    records, reps = next(iter(blocks.values())).shape[:2]
    for r in range(reps):
        for k in range(records):
            for name in names:
                yield [str(r), time_fmt(times[k]), name, *map(_fmt, blocks[name][k, r])]


def coord_columns(dim):
    return [f"c{i}" for i in range(dim)]


def write_samples_csv(path, samples, config_hash):
    samples = np.asarray(samples)
    write_rows(path, ["replica", "index", *coord_columns(samples.shape[1])],
               sample_rows(samples), config_hash)


def write_trajectory_csv(path, steps, blocks, config_hash):
    dim = next(iter(blocks.values())).shape[-1]
    write_rows(path, ["replica", "step", "which", *coord_columns(dim)],
               labelled_rows(steps, blocks), config_hash)


def write_path_csv(path, times, blocks, config_hash):
    dim = max(v.shape[-1] for v in blocks.values())
    cols = ["replica", "t", "which", *coord_columns(dim)]
    write_rows(path, cols, labelled_rows(times, blocks, _fmt), config_hash)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else str(v)
    return obj


def write_json(path, payload, config, config_hash):
    """Write ``payload`` with ``version``, ``config`` and ``config_sha256`` keys."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    doc = {"version": __version__, "config_sha256": config_hash, "config": config}
    doc.update(_jsonable(payload))
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return doc


def read_csv(path):
    """Return ``(header_comment, columns, rows)`` of a file written here."""
    with open(path) as fh:
        comment = fh.readline().rstrip("\n")
        cols = fh.readline().rstrip("\n").split(",")
        rows = [line.rstrip("\n").split(",") for line in fh]
    return comment, cols, rows
