"""JSON and CSV serialization of artifacts.

Every artifact is a JSON object with ``schema_version``, ``type`` and the
resolved ``config`` that produced it. Complex numbers are ``[re, im]`` pairs;
reals are JSON numbers written in Python's shortest round-trip form, so a
write/read cycle reproduces every float bit for bit. Exact Runge
coefficients are stored as ``[[mantissa, exponent], [mantissa, exponent]]``
with the mantissa as a decimal string (value ``mantissa * 2**exponent``).
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
from flint import acb, arb

from .harmonic import HarmonicCertificate, RealSensingTable
from .identity import SensingIdentity
from .runge import RationalApproximant

SCHEMA_VERSION = 1


class ArtifactError(ValueError):
    """Malformed or unsupported artifact file."""


def cpair(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def from_pair(p) -> complex:
    if not (isinstance(p, (list, tuple)) and len(p) == 2):
        raise ArtifactError(f"expected a [re, im] pair, got {p!r}")
    return complex(float(p[0]), float(p[1]))


def jsonable(obj):
    """Convert numpy scalars/arrays and complex numbers to JSON-ready values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return cpair(obj)
    return obj


def _envelope(kind: str, body: dict, config: dict | None) -> dict:
    out = {"schema_version": SCHEMA_VERSION, "type": kind}
    out.update(body)
    out["config"] = jsonable(config or {})
    return out


def _check(d: dict, kind: str) -> None:
    if d.get("schema_version") != SCHEMA_VERSION:
        raise ArtifactError(f"unsupported schema_version {d.get('schema_version')!r}")
    if d.get("type") != kind:
        raise ArtifactError(f"expected a {kind} artifact, got {d.get('type')!r}")


# -- identities ------------------------------------------------------------------

def identity_to_dict(ident: SensingIdentity, config: dict | None = None) -> dict:
    body = {
        "provenance": ident.provenance,
        "domain": jsonable(ident.domain),
        "a": cpair(ident.a),
        "b": cpair(ident.b),
        "order": ident.order,
        "weights": [cpair(w) for w in ident.weights],
        "l2_bound": ident.l2_bound,
        "sup_bound": ident.sup_bound,
        "diagnostics": jsonable(ident.diagnostics),
    }
    return _envelope("identity", body, config)


def identity_from_dict(d: dict) -> SensingIdentity:
    _check(d, "identity")
    try:
        weights = [from_pair(w) for w in d["weights"]]
        return SensingIdentity(d["domain"], from_pair(d["a"]), from_pair(d["b"]), weights,
                               d["l2_bound"], d["provenance"], d.get("sup_bound"),
                               d.get("diagnostics", {}))
    except KeyError as exc:
        raise ArtifactError(f"identity lacks field {exc.args[0]!r}") from exc


# -- tables --------------------------------------------------------------------

def table_to_dict(table: RealSensingTable, config: dict | None = None) -> dict:
    body = {
        "a": cpair(table.a),
        "b": cpair(table.b),
        "entries": [[int(dx), int(dy), float(c)] for dx, dy, c in table.entries],
        "certificate": table.certificate.to_dict() if table.certificate else None,
        "domain": jsonable(table.domain),
    }
    return _envelope("table", body, config)


def table_from_dict(d: dict) -> RealSensingTable:
    _check(d, "table")
    cert = HarmonicCertificate.from_dict(d["certificate"]) if d.get("certificate") else None
    entries = tuple((int(dx), int(dy), float(c)) for dx, dy, c in d["entries"])
    return RealSensingTable(from_pair(d["a"]), from_pair(d["b"]), entries, cert, d.get("domain", {}))


# -- probes ----------------------------------------------------------------------

def probe_to_dict(probe, diagnostics=None, geometry: dict | None = None,
                  config: dict | None = None) -> dict:
    body = {"probe": jsonable(probe.to_dict())}
    if diagnostics is not None:
        body["diagnostics"] = jsonable(diagnostics.to_dict())
    if geometry is not None:
        body["geometry"] = jsonable(geometry)
    return _envelope("probe", body, config)


def probe_from_dict(d: dict):
    from .probe import ProbeDomain

    _check(d, "probe")
    return ProbeDomain.from_dict(d["probe"])


# -- Runge approximants ----------------------------------------------------------

def _exact_pair(x: acb) -> list:
    out = []
    for part in (x.real, x.imag):
        man, exp = part.mid().man_exp()
        out.append([str(man), int(exp)])
    return out


def _exact_value(p) -> acb:
    (mr, er), (mi, ei) = p
    return acb(arb((int(mr), int(er))), arb((int(mi), int(ei))))


def approximant_to_dict(R: RationalApproximant, config: dict | None = None) -> dict:
    body = {
        "pole": cpair(R.pole),
        "target": cpair(R.target),
        "delta": R.delta,
        "eps": R.eps,
        "discarded": R.discarded,
        "degree": R.degree,
        "curve": [cpair(z) for z in R.curve],
        "steps": jsonable(R.steps),
        "coeffs": [cpair(c) if np.isfinite(c) else None for c in R.coeffs],
        "coeffs_exact": [_exact_pair(x) for x in R.exact],
    }
    return _envelope("approximant", body, config)


def approximant_from_dict(d: dict) -> RationalApproximant:
    _check(d, "approximant")
    if "coeffs_exact" in d:
        exact = [_exact_value(p) for p in d["coeffs_exact"]]
    else:
        if any(c is None for c in d["coeffs"]):
            raise ArtifactError("approximant has non-finite float coefficients and no exact block")
        exact = [acb(from_pair(c).real, from_pair(c).imag) for c in d["coeffs"]]
    curve = np.array([from_pair(z) for z in d["curve"]])
    return RationalApproximant(from_pair(d["pole"]), exact, float(d["delta"]), curve,
                               float(d["eps"]), from_pair(d["target"]), d.get("steps", []),
                               float(d.get("discarded", 0.0)))


# -- reports ---------------------------------------------------------------------

def report_to_dict(report: dict, config: dict | None = None) -> dict:
    return _envelope("report", jsonable(report), config)


# -- files -----------------------------------------------------------------------

def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def write_json(path, obj: dict) -> None:
    Path(path).write_text(dumps(obj))


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ArtifactError(f"cannot read {path}: {exc}") from exc


def load_artifact(path):
    """Read a JSON artifact and rebuild the matching object."""
    d = read_json(path)
    loaders = {"identity": identity_from_dict, "table": table_from_dict,
               "probe": probe_from_dict, "approximant": approximant_from_dict}
    kind = d.get("type")
    if kind not in loaders:
        raise ArtifactError(f"unknown artifact type {kind!r}")
    return kind, loaders[kind](d), d


SWEEP_COLUMNS = ("N", "l2_bound", "max_residual")


def write_sweep_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([int(r["N"]), repr(float(r["l2_bound"])), repr(float(r["max_residual"]))])


def read_sweep_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [{"N": int(r["N"]), "l2_bound": float(r["l2_bound"]),
             "max_residual": float(r["max_residual"])} for r in rows]
