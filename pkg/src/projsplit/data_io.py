"""LIBSVM dataset parsing, trace CSV persistence, and run manifests."""

import io
import json
import os
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .errors import ManifestError, ParseError
from .sps import TraceRecord

TRACE_COLUMNS = ("solver", "seed", "iteration", "wall_time_s", "residual_R", "residual_O")


@dataclass(frozen=True, eq=False)
class SparseDataset:
    """Row-sparse design matrix with +/-1 labels.

    Feature indices are 1-based in LIBSVM files and 0-based here; d is the
    largest feature index seen in the source.
    """

    features: sparse.csr_matrix
    labels: np.ndarray

    def __post_init__(self):
        if self.features.shape[0] != self.labels.shape[0]:
            raise ValueError("row/label count mismatch")
        if not np.isin(self.labels, (-1.0, 1.0)).all():
            raise ValueError("labels must be -1 or +1")

    @property
    def m(self):
        return self.features.shape[0]

    @property
    def d(self):
        return self.features.shape[1]


def _map_label(raw, line_number):
    if raw == 1.0:
        return 1.0
    if raw == 0.0 or raw == -1.0:
        return -1.0
    raise ParseError(f"label {raw!r} is not in {{0, 1, -1, +1}}", line_number)


def parse_libsvm(source):
    """Parse LIBSVM text into a SparseDataset, streaming line by line.

    source may be a path or a text stream. Labels 0/-1 map to -1 and 1/+1 to
    +1; indices within a row must be strictly increasing.
    """
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as handle:
            return parse_libsvm(handle)
    data, indices, indptr, labels = [], [], [0], []
    max_index = 0
    for line_number, line in enumerate(source, start=1):
        line = line.strip()
        if not line:
            continue
        tokens = line.split()
        try:
            raw_label = float(tokens[0])
        except ValueError:
            raise ParseError(f"label {tokens[0]!r} is not numeric", line_number) from None
        labels.append(_map_label(raw_label, line_number))
        previous = 0
        for token in tokens[1:]:
            index_text, sep, value_text = token.partition(":")
            if not sep:
                raise ParseError(f"malformed token {token!r}", line_number)
            try:
                index = int(index_text)
            except ValueError:
                raise ParseError(f"index {index_text!r} is not an integer", line_number) from None
            if index < 1:
                raise ParseError(f"index {index} must be >= 1", line_number)
            if index <= previous:
                raise ParseError(f"index {index} not ascending after {previous}", line_number)
            try:
                value = float(value_text)
            except ValueError:
                raise ParseError(f"value {value_text!r} is not numeric", line_number) from None
            if not np.isfinite(value):
                raise ParseError(f"value {value!r} is not finite", line_number)
            indices.append(index - 1)
            data.append(value)
            previous = index
        indptr.append(len(data))
        max_index = max(max_index, previous)
    features = sparse.csr_matrix(
        (np.asarray(data), np.asarray(indices, dtype=np.int64), np.asarray(indptr, dtype=np.int64)),
        shape=(len(labels), max_index),
    )
    return SparseDataset(features=features, labels=np.asarray(labels))


def serialize_libsvm(dataset, sink):
    """Write a dataset back to LIBSVM text; parse(serialize(ds)) is exact."""
    close = False
    if isinstance(sink, (str, os.PathLike)):
        sink = open(sink, "w", encoding="utf-8")
        close = True
    try:
        csr = dataset.features
        for i in range(dataset.m):
            start, stop = csr.indptr[i], csr.indptr[i + 1]
            parts = [f"{int(dataset.labels[i]):+d}"]
            for j, v in zip(csr.indices[start:stop], csr.data[start:stop]):
                parts.append(f"{j + 1}:{v!r}")
            sink.write(" ".join(parts) + "\n")
    finally:
        if close:
            sink.close()


def _format_float(x):
    return format(float(x), ".17g")


def write_trace_csv(traces, sink):
    """Write trace rows with the fixed schema; floats keep 17 significant digits."""
    close = False
    if isinstance(sink, (str, os.PathLike)):
        sink = open(sink, "w", encoding="utf-8", newline="")
        close = True
    try:
        sink.write(",".join(TRACE_COLUMNS) + "\n")
        for rec in traces:
            o_text = "" if rec.residual_O is None else _format_float(rec.residual_O)
            sink.write(
                f"{rec.solver},{rec.seed},{rec.iteration},"
                f"{_format_float(rec.wall_time_s)},{_format_float(rec.residual_R)},{o_text}\n"
            )
    finally:
        if close:
            sink.close()


def read_trace_csv(source):
    """Parse a trace CSV back into TraceRecord rows, bit-exact for the floats."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8", newline="") as handle:
            return read_trace_csv(handle)
    header = source.readline().strip()
    if header.split(",") != list(TRACE_COLUMNS):
        raise ParseError(f"unexpected trace header {header!r}", 1)
    records = []
    for line_number, line in enumerate(source, start=2):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if len(parts) != len(TRACE_COLUMNS):
            raise ParseError(f"expected {len(TRACE_COLUMNS)} fields, got {len(parts)}", line_number)
        solver, seed, iteration, wall, r_val, o_val = parts
        try:
            records.append(
                TraceRecord(
                    solver=solver,
                    seed=int(seed),
                    iteration=int(iteration),
                    wall_time_s=float(wall),
                    residual_R=float(r_val),
                    residual_O=None if o_val == "" else float(o_val),
                )
            )
        except ValueError as err:
            raise ParseError(str(err), line_number) from None
    return records


MANIFEST_REQUIRED = (
    "problem",
    "solvers",
    "schedule",
    "tau",
    "delta",
    "kappa",
    "c",
    "batch_size",
    "seeds",
    "data",
    "iterations",
    "trace_every",
    "out",
)


def write_manifest(config, sink):
    """Persist a run configuration as JSON; every required field must be present.

    Defaults are recorded explicitly by the caller, never omitted.
    """
    missing = [key for key in MANIFEST_REQUIRED if key not in config]
    if missing:
        raise ManifestError(f"manifest missing required fields: {', '.join(missing)}")
    text = json.dumps(config, indent=2, sort_keys=True)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
    else:
        sink.write(text + "\n")


def read_manifest(source):
    if isinstance(source, (str, os.PathLike)):
        with open(source, "r", encoding="utf-8") as handle:
            return read_manifest(handle)
    config = json.load(source)
    missing = [key for key in MANIFEST_REQUIRED if key not in config]
    if missing:
        raise ManifestError(f"manifest missing required fields: {', '.join(missing)}")
    return config
