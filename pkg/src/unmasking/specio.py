"""Readers and writers for every file format the command line speaks.

Formats:

* distribution specs (JSON): {"kind": ...} with kinds "explicit", "uniform",
  "affine_code", "rs", "mixture", and "elevated" (which nests a base spec and
  a code spec).
* schedules (JSON): {"steps": [s_1, ..., s_k]}; readers also accept a plan
  report, whose schedule sits under the "schedule" key.
* fixed reveal blocks (JSON): {"blocks": [[0, 1], [2], ...]} with 0-based
  positions.
* curves (CSV): header j,Z_bits,H_bits plus an optional Z_stderr column,
  one row per level j = 1..n.
* samples: one string per line, symbols comma-separated.
* lower-bound experiments (CSV): header n,eps,k,best_error,ratio.

Numbers are written with repr (shortest exact round-trip form, '.' decimal),
and JSON objects with sorted keys, so equal inputs produce byte-identical
files.
"""

from __future__ import annotations

import csv
import io
import json
from typing import Any

import numpy as np

from .curves import EntropyCurve, InfoCurve
from .dist import JointPMF
from .errors import DimensionMismatch
from .sampler import SubsetSchedule
from .schedules import Schedule
from .stepfit import ExperimentRow
from .zoo import (
    AffineCode,
    ProductMixtureSpec,
    code_dist,
    elevated_family,
    product_mixture,
    random_balanced_rs,
    rs_code,
    uniform_dist,
)


def _require(spec: dict, kind: str, *keys: str) -> list[Any]:
    missing = [key for key in keys if key not in spec]
    if missing:
        raise ValueError(f"{kind!r} spec is missing fields: {', '.join(missing)}")
    return [spec[key] for key in keys]


def dist_from_spec(spec: dict) -> JointPMF:
    """Build a distribution from a JSON-style spec dict (recursively)."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ValueError("distribution spec must be an object with a 'kind' field")
    kind = spec["kind"]
    if kind == "explicit":
        q, n, pmf = _require(spec, kind, "q", "n", "pmf")
        return JointPMF(int(n), int(q), np.asarray(pmf, dtype=float))
    if kind == "uniform":
        q, n = _require(spec, kind, "q", "n")
        return uniform_dist(int(q), int(n))
    if kind == "affine_code":
        q, generator = _require(spec, kind, "q", "generator")
        G = np.asarray(generator, dtype=np.int64)
        shift = spec.get("shift")
        if shift is None:
            shift = np.zeros(np.atleast_2d(G).shape[1], dtype=np.int64)
        return code_dist(AffineCode(q=int(q), generator=G, shift=np.asarray(shift)))
    if kind == "rs":
        q, n, k = (int(v) for v in _require(spec, kind, "q", "n", "k"))
        points = spec.get("eval_points")
        if "shift" in spec:
            shift = np.asarray(spec["shift"], dtype=np.int64)
            code = rs_code(q, k, points if points is not None else range(n), shift)
        elif "seed" in spec:
            if points is None:
                code = random_balanced_rs(q, k, n, int(spec["seed"]))
            else:
                rng = np.random.default_rng(int(spec["seed"]))
                code = rs_code(q, k, points, rng.integers(0, q, size=n))
        else:
            code = rs_code(q, k, points if points is not None else range(n))
        if code.n != n:
            raise ValueError(f"'rs' spec says n = {n} but has {code.n} evaluation points")
        return code_dist(code)
    if kind == "mixture":
        weights, components = _require(spec, kind, "weights", "components")
        return product_mixture(
            ProductMixtureSpec(
                weights=np.asarray(weights, dtype=float),
                components=np.asarray(components, dtype=float),
            )
        )
    if kind == "elevated":
        base, code = _require(spec, kind, "base", "code")
        return elevated_family(dist_from_spec(base), dist_from_spec(code))
    raise ValueError(f"unknown distribution kind {kind!r}")


def load_dist(path: str) -> JointPMF:
    with open(path, encoding="utf-8") as fp:
        return dist_from_spec(json.load(fp))


def schedule_from_obj(obj: dict) -> Schedule:
    if isinstance(obj, dict) and "steps" not in obj and isinstance(obj.get("schedule"), dict):
        obj = obj["schedule"]
    if not isinstance(obj, dict) or "steps" not in obj:
        raise ValueError("schedule object must contain a 'steps' list")
    return Schedule(tuple(int(s) for s in obj["steps"]))


def schedule_to_obj(s: Schedule) -> dict:
    return {"steps": list(s.steps)}


def load_schedule(path: str) -> Schedule:
    with open(path, encoding="utf-8") as fp:
        return schedule_from_obj(json.load(fp))


def blocks_from_obj(obj: dict) -> SubsetSchedule:
    if not isinstance(obj, dict) or "blocks" not in obj:
        raise ValueError("blocks object must contain a 'blocks' list of position lists")
    return SubsetSchedule(tuple(tuple(int(v) for v in b) for b in obj["blocks"]))


def load_blocks(path: str) -> SubsetSchedule:
    with open(path, encoding="utf-8") as fp:
        return blocks_from_obj(json.load(fp))


def _fmt(x: float) -> str:
    return repr(float(x))


def dump_json(obj: Any) -> str:
    """Canonical JSON text: sorted keys, 2-space indent, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def load_json(path: str) -> Any:
    with open(path, encoding="utf-8") as fp:
        return json.load(fp)


def curve_csv_text(info: InfoCurve, entropy: EntropyCurve) -> str:
    """CSV for a curve pair: j,Z_bits,H_bits[,Z_stderr], rows j = 1..n."""
    if entropy.n != info.n:
        raise DimensionMismatch(
            f"entropy curve has {entropy.n} levels, information curve has {info.n}"
        )
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    with_err = info.stderr is not None
    writer.writerow(["j", "Z_bits", "H_bits"] + (["Z_stderr"] if with_err else []))
    for j in range(1, info.n + 1):
        row = [str(j), _fmt(info.values[j - 1]), _fmt(entropy.values[j])]
        if with_err:
            row.append(_fmt(info.stderr[j - 1]))
        writer.writerow(row)
    return out.getvalue()


def read_curve_csv(path: str) -> tuple[InfoCurve, EntropyCurve]:
    """Parse a curve CSV back into (InfoCurve, EntropyCurve)."""
    with open(path, encoding="utf-8", newline="") as fp:
        rows = list(csv.reader(fp))
    if not rows or rows[0][:3] != ["j", "Z_bits", "H_bits"]:
        raise ValueError(f"{path}: not a curve CSV (header {rows[0] if rows else 'missing'})")
    with_err = len(rows[0]) > 3 and rows[0][3] == "Z_stderr"
    body = [r for r in rows[1:] if r]
    expect = [str(j) for j in range(1, len(body) + 1)]
    if [r[0] for r in body] != expect:
        raise ValueError(f"{path}: level column must run 1..n")
    Z = np.array([float(r[1]) for r in body])
    H = np.concatenate(([0.0], [float(r[2]) for r in body]))
    se = np.array([float(r[3]) for r in body]) if with_err else None
    method = "monte_carlo" if with_err else "exact"
    entropy = EntropyCurve(H, method=method)
    return InfoCurve(Z, stderr=se), entropy


def samples_text(samples) -> str:
    """Newline-delimited samples, symbols comma-separated."""
    return "".join(",".join(str(int(v)) for v in row) + "\n" for row in samples)


def read_samples(path: str) -> list[tuple[int, ...]]:
    with open(path, encoding="utf-8") as fp:
        lines = [ln.strip() for ln in fp if ln.strip()]
    return [tuple(int(v) for v in ln.split(",")) for ln in lines]


def experiment_csv_text(rows: list[ExperimentRow]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["n", "eps", "k", "best_error", "ratio"])
    for row in rows:
        writer.writerow(
            [str(row.n), _fmt(row.eps), str(row.k), _fmt(row.best_error), _fmt(row.ratio)]
        )
    return out.getvalue()


def read_experiment_csv(path: str) -> list[ExperimentRow]:
    with open(path, encoding="utf-8", newline="") as fp:
        rows = list(csv.reader(fp))
    if not rows or rows[0] != ["n", "eps", "k", "best_error", "ratio"]:
        raise ValueError(f"{path}: not an experiment CSV")
    out = []
    for r in rows[1:]:
        if not r:
            continue
        out.append(
            ExperimentRow(
                n=int(r[0]),
                eps=float(r[1]),
                k=int(r[2]),
                best_error=float(r[3]),
                ratio=float(r[4]),
            )
        )
    return out
