"""JSON encoding and decoding of profiles, metrics, sequences, fields and
witnesses, with schema validation.

Schemas ship with the package under planewaves/schemas/. Function-backed
profiles (conversion outputs) serialize through resampling; everything else
round-trips exactly.
"""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

try:
    import jsonschema
except ImportError:  # pragma: no cover - jsonschema is a declared dependency
    jsonschema = None

from .errors import SchemaError
from .metrics import AlekseevskyMetric, BrinkmannMetric, RosenMetric
from .profiles import (ConstantProfile, Interval, MatrixProfile,
                       PowerLawProfile, RotatingConstantProfile,
                       SampledProfile, ScalarTimesFixedProfile,
                       ShiftBumpProfile, SumProfile, sampled_from)
from .sequences import ShiftSequence

_SCHEMA_CACHE = {}


def _schema(name):
    if name not in _SCHEMA_CACHE:
        path = resources.files("planewaves").joinpath(f"schemas/{name}.schema.json")
        _SCHEMA_CACHE[name] = json.loads(path.read_text())
    return _SCHEMA_CACHE[name]


def validate(instance, schema_name):
    if jsonschema is None:
        return
    try:
        jsonschema.validate(instance, _schema(schema_name))
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"{schema_name} document invalid: {exc.message}") from exc


# -- profiles --------------------------------------------------------------------


def profile_to_json(profile: MatrixProfile) -> dict:
    return profile.to_json()


def profile_from_json(data: dict) -> MatrixProfile:
    validate(data, "profile")
    kind = data["type"]
    domain = Interval.from_json(data["domain"]) if "domain" in data else Interval()
    if kind == "constant":
        return ConstantProfile(np.asarray(data["matrix"], dtype=float), domain,
                               symmetry=data.get("symmetry", ""))
    if kind == "rotating_constant":
        return RotatingConstantProfile(np.asarray(data["omega"], dtype=float),
                                       np.asarray(data["base"], dtype=float), domain)
    if kind == "power_law":
        return PowerLawProfile(data["a"], data["b"],
                               np.asarray(data["base"], dtype=float),
                               domain if "domain" in data else None)
    if kind == "scalar_times_fixed":
        return ScalarTimesFixedProfile(profile_from_json(data["scalar"]),
                                       np.asarray(data["matrix"], dtype=float))
    if kind == "shift_bump":
        lo, hi = data["window"]
        return ShiftBumpProfile(ShiftSequence(int(lo), int(hi),
                                              tuple(data["values"])))
    if kind == "sampled":
        return SampledProfile(np.asarray(data["grid"], dtype=float),
                              np.asarray(data["values"], dtype=float),
                              symmetry=data.get("symmetry"))
    if kind == "sum":
        return SumProfile([profile_from_json(t) for t in data["terms"]])
    raise SchemaError(f"unknown profile type {kind!r}")


# -- metrics ---------------------------------------------------------------------


def metric_to_json(metric) -> dict:
    if isinstance(metric, BrinkmannMetric):
        profiles = {"p": _maybe_sampled(metric.p)}
    elif isinstance(metric, RosenMetric):
        profiles = {"h": _maybe_sampled(metric.h),
                    "singular_set": list(metric.singular_set)}
    elif isinstance(metric, AlekseevskyMetric):
        profiles = {"p": _maybe_sampled(metric.p), "omega": _maybe_sampled(metric.omega)}
    else:
        raise SchemaError(f"unsupported metric {type(metric).__name__}")
    return {"form": metric.form, "n": metric.n,
            "domain": metric.domain.to_json(), "profiles": profiles}


def _maybe_sampled(profile):
    try:
        return profile.to_json()
    except Exception:
        return sampled_from(profile).to_json()


def metric_from_json(data: dict):
    validate(data, "metric")
    form = data["form"]
    n = int(data["n"])
    domain = Interval.from_json(data["domain"])
    profs = data["profiles"]
    if form == "brinkmann":
        return BrinkmannMetric(n, domain, profile_from_json(profs["p"]))
    if form == "rosen":
        return RosenMetric(n, domain, profile_from_json(profs["h"]),
                           tuple(profs.get("singular_set", [])))
    if form == "alekseevsky":
        return AlekseevskyMetric(n, domain, profile_from_json(profs["p"]),
                                 profile_from_json(profs["omega"]))
    raise SchemaError(f"unknown metric form {form!r}")


# -- sequences -------------------------------------------------------------------


def sequence_to_json(seq: ShiftSequence) -> dict:
    return {"window": [seq.lo, seq.hi], "values": list(seq.values)}


def sequence_from_json(data: dict) -> ShiftSequence:
    validate(data, "sequence")
    lo, hi = data["window"]
    return ShiftSequence(int(lo), int(hi), tuple(data["values"]))


# -- structured fields -------------------------------------------------------------


def field_from_json(metric: BrinkmannMetric, data: dict, config=None):
    """Build a StructuredVectorField from declarative data, solving the wave
    equations against the metric where initial data is given.

    Returns (field, factor) where factor is the declared conformal factor
    (None means use the field's own w' + 2k).
    """
    from .ode import DEFAULT_CONFIG, solve_jacobi_vector, solve_w_equation
    from .profiles import trace_scalar
    from .symmetries import StructuredVectorField

    validate(data, "field")
    config = config or DEFAULT_CONFIG
    q = None
    if data.get("q") is not None:
        qd = data["q"]
        q = solve_jacobi_vector(metric.p, float(qd.get("u0", 0.0)),
                                np.asarray(qd["q0"], dtype=float),
                                np.asarray(qd["qdot0"], dtype=float), config)
    w = None
    if data.get("w") is not None:
        wd = data["w"]
        w = solve_w_equation(trace_scalar(metric.p), float(wd.get("u0", 0.0)),
                             float(wd["w0"]), float(wd["wdot0"]),
                             float(wd["wddot0"]), config)
    W = None
    if data.get("W") is not None:
        W = np.asarray(data["W"], dtype=float)
    fld = StructuredVectorField(metric, b=float(data.get("b", 0.0)),
                                k=float(data.get("k", 0.0)), q=q, w=w, W=W,
                                label=data.get("label", "field"))
    factor = data.get("S")
    return fld, factor


# -- point maps (declarative subset) -------------------------------------------------


def point_map_from_json(data: dict):
    from .forms import affine_rotation_map, dilation_map, rotation_gauge_map

    kind = data.get("kind")
    if kind == "affine_u":
        return affine_rotation_map(float(data["a"]), float(data["u0"]),
                                   np.asarray(data["gamma"], dtype=float))
    if kind == "rotation_gauge":
        return rotation_gauge_map(np.asarray(data["omega"], dtype=float),
                                  float(data.get("sign", 1.0)))
    if kind == "dilation_scale":
        return dilation_map(float(data["t"]), int(data["n"]))
    raise SchemaError(f"point map kind {kind!r} is not loadable from JSON")


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def dump_json(obj, path=None):
    text = json.dumps(obj, indent=2, sort_keys=True)
    if path is None:
        return text
    with open(path, "w") as fh:
        fh.write(text + "\n")
    return text
