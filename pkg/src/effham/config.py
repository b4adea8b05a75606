"""Run configuration files.

One setting per line, ``section.key = value``; ``#`` starts a comment.  Lists
are comma separated.  Every key must appear in SCHEMA, every value is parsed
and range-checked when the file is loaded.

Environment fields are described under ``env.potential.*``, ``env.diffusion.*``,
``env.coupling.*`` and ``env.term<i>.*`` (general sums), with ``kind`` naming the
field model and the remaining keys its parameters.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field

from .env import MODELS, ClassParams, EnvironmentSpec, FieldModel
from .errors import ConfigError


def _num(lo=None, hi=None, strict_lo=False, integer=False):
    def parse(s):
        try:
            v = int(s) if integer else float(s)
        except ValueError:
            raise ConfigError(f"expected {'an integer' if integer else 'a number'}, got {s!r}") from None
        if lo is not None and (v < lo or (strict_lo and v == lo)):
            raise ConfigError(f"value {v} must be {'>' if strict_lo else '>='} {lo}")
        if hi is not None and v > hi:
            raise ConfigError(f"value {v} must be <= {hi}")
        return v

    return parse


def _list(item, min_len=1, max_len=None, sort=False):
    def parse(s):
        parts = [p.strip() for p in s.split(",") if p.strip()]
        if len(parts) < min_len:
            raise ConfigError(f"expected at least {min_len} value(s), got {len(parts)}")
        if max_len is not None and len(parts) > max_len:
            raise ConfigError(f"expected at most {max_len} value(s), got {len(parts)}")
        out = [item(p) for p in parts]
        return sorted(out) if sort else out

    return parse


def _bool(s):
    t = s.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"expected a boolean, got {s!r}")


def _choice(*opts):
    def parse(s):
        if s not in opts:
            raise ConfigError(f"expected one of {opts}, got {s!r}")
        return s

    return parse


def _str(s):
    return s


def _window(s):
    v = _list(_num(), 2, 2)(s)
    if not v[1] > v[0]:
        raise ConfigError("window needs lo < hi")
    return tuple(v)


# (parser, default); None default means optional with no value
SCHEMA = {
    "run.output_dir": (_str, "out"),
    "run.seeds": (_list(_num(0, integer=True)), [0]),
    "run.workers": (_num(1, integer=True), None),
    "run.plots": (_bool, True),
    "run.label": (_str, ""),
    "env.form": (_choice("separable", "pinned", "double_well", "general_sum"), "separable"),
    "env.momentum": (_str, "p^2"),
    "env.class.alpha0": (_num(0, strict_lo=True), 0.5),
    "env.class.alpha1": (_num(0, strict_lo=True), 8.0),
    "env.class.gamma": (_num(1, strict_lo=True), 2.0),
    "env.class.kappa": (_num(0), 1.0),
    "env.class.a_min": (_num(0, 1, strict_lo=True), 1.0),
    "cell.window": (_window, None),
    "cell.burn": (_num(0), None),
    "cell.h": (_num(0, strict_lo=True), None),
    "cell.tol": (_num(0, strict_lo=True), 1e-6),
    "cell.lambda": (_num(), None),
    "cell.lambda0_window": (_num(1), 1000.0),
    "theta.lambda_grid": (_list(_num(), sort=True), None),
    "theta.n_lambda": (_num(2, integer=True), 20),
    "theta.theta_grid": (_list(_num(), sort=True), None),
    "theta.window": (_window, None),
    "theta.burn": (_num(0), None),
    "theta.theta_res": (_num(0, strict_lo=True), 0.05),
    "theta.label_tol": (_num(0, strict_lo=True), 1e-4),
    "theta.max_refine": (_num(0, 40, integer=True), 12),
    "theta.inner_points": (_num(2, integer=True), 24),
    "theta.max_depth": (_num(0, 5, integer=True), 2),
    "parabolic.theta": (_list(_num()), [0.0]),
    "parabolic.t_end": (_num(0, strict_lo=True), 50.0),
    "parabolic.dx": (_num(0, strict_lo=True), 1 / 64),
    "parabolic.cells": (_num(1, integer=True), 1),
    "parabolic.x_range": (_window, None),
    "parabolic.sigma_mode": (_choice("reduced", "full"), "reduced"),
    "parabolic.cfl": (_num(0, 1, strict_lo=True), 0.9),
    "parabolic.eps_list": (_list(_num(0, strict_lo=True)), [0.25, 0.125, 0.0625, 0.03125]),
    "parabolic.horizon": (_num(0, strict_lo=True), 1.0),
    "parabolic.pairs": (_num(1, integer=True), 100),
    "bridge.lambda": (_num(), None),
    "bridge.mu": (_list(_num(), sort=True), None),
    "bridge.epsilon": (_num(0, strict_lo=True), 0.05),
    "bridge.n_schedule": (_list(_num(0, strict_lo=True), sort=True), None),
    "bridge.r_margin": (_num(0, strict_lo=True), 1.0),
    "bridge.n_cap": (_num(1, integer=True), 1 << 16),
    "validate.suite": (_list(_choice("class", "cell", "bridge", "theta", "parabolic", "end2end")), ["class"]),
    "validate.double_run": (_bool, False),
    "validate.fixtures": (_str, None),
}

FIELD_PARAMS = {
    "constant": {"value": _num()},
    "periodic_cosine": {"amplitudes": _list(_num()), "period": _num(0, strict_lo=True), "random_phase": _bool,
                        "offset": _num()},
    "random_fourier": {"amplitude": _num(), "decay": _num(2), "modes": _num(1, integer=True),
                       "length": _num(0, strict_lo=True), "offset": _num()},
    "poisson_bumps": {"density": _num(0, strict_lo=True), "width": _num(0, strict_lo=True), "height_lo": _num(),
                      "height_hi": _num(), "offset": _num(), "max_per_cell": _num(1, integer=True)},
}
assert set(FIELD_PARAMS) == set(MODELS)

_FIELD_KEY = re.compile(r"^env\.(potential|diffusion|coupling|term\d+)\.([a-z_0-9]+)$")


@dataclass
class RunConfig:
    values: dict
    text: str = ""
    path: str = ""
    fields: dict = field(default_factory=dict)  # block -> {"kind": .., params}

    def __getitem__(self, key):
        if key not in SCHEMA:
            raise KeyError(key)
        return self.values.get(key, SCHEMA[key][1])

    def get(self, key, default=None):
        v = self[key]
        return default if v is None else v

    def is_set(self, key):
        return key in self.values

    @property
    def hash(self):
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    def canonical(self):
        """Sorted, parsed view; two files with the same settings hash equally."""
        d = {k: self.values[k] for k in sorted(self.values)}
        d["_fields"] = {k: self.fields[k] for k in sorted(self.fields)}
        return json.dumps(d, sort_keys=True, default=list)

    @property
    def workers(self):
        return self["run.workers"] or os.cpu_count() or 1

    def field_model(self, block, default=None):
        spec = self.fields.get(block)
        if spec is None:
            return default
        params = {k: v for k, v in spec.items() if k != "kind"}
        return FieldModel(spec["kind"], params)

    def environment(self) -> EnvironmentSpec:
        cls = ClassParams(**{k: self[f"env.class.{k}"] for k in ("alpha0", "alpha1", "gamma", "kappa", "a_min")})
        kw = {}
        for b in ("potential", "diffusion", "coupling"):
            fm = self.field_model(b)
            if fm is not None:
                kw[b] = fm
        terms = []
        for b in sorted((b for b in self.fields if b.startswith("term")), key=lambda s: int(s[4:])):
            mom = self.fields[b].get("momentum")
            if mom is None:
                raise ConfigError(f"env.{b}.momentum is required")
            f = {k: v for k, v in self.fields[b].items() if k != "momentum"}
            terms.append((FieldModel(f.get("kind", "constant"), {k: v for k, v in f.items() if k != "kind"}), mom))
        return EnvironmentSpec(self["env.form"], momentum=self["env.momentum"], cls=cls, terms=tuple(terms), **kw)


def parse_config(text: str, path: str = "") -> RunConfig:
    values = {}
    raw_fields = {}
    for ln, line in enumerate(text.splitlines(), 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" not in s:
            raise ConfigError(f"line {ln}: expected 'section.key = value'")
        key, val = (t.strip() for t in s.split("=", 1))
        if not val:
            raise ConfigError(f"line {ln}: empty value for {key}")
        m = _FIELD_KEY.match(key)
        if m:
            raw_fields.setdefault(m.group(1), {})[m.group(2)] = (ln, val)
            continue
        if key not in SCHEMA:
            raise ConfigError(f"line {ln}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {ln}: duplicate key {key!r}")
        try:
            values[key] = SCHEMA[key][0](val)
        except ConfigError as e:
            raise ConfigError(f"line {ln}: {key}: {e}") from None
    fields = {}
    for block, kv in raw_fields.items():
        is_term = block.startswith("term")
        kind = kv.get("kind", (0, "constant"))[1]
        if kind not in FIELD_PARAMS:
            raise ConfigError(f"line {kv['kind'][0]}: env.{block}.kind: unknown field model {kind!r}")
        out = {"kind": kind}
        for k, (ln, v) in kv.items():
            if k == "kind":
                continue
            if is_term and k == "momentum":
                out[k] = v
                continue
            if k not in FIELD_PARAMS[kind]:
                raise ConfigError(f"line {ln}: unknown key 'env.{block}.{k}' for field model {kind}")
            try:
                out[k] = FIELD_PARAMS[kind][k](v)
            except ConfigError as e:
                raise ConfigError(f"line {ln}: env.{block}.{k}: {e}") from None
        fields[block] = out
    cfg = RunConfig(values, text, path, fields)
    _cross_checks(cfg)
    return cfg


def _cross_checks(cfg: RunConfig):
    if cfg.is_set("theta.lambda_grid") and len(cfg["theta.lambda_grid"]) == 0:
        raise ConfigError("theta.lambda_grid is empty")
    # building the spec validates class parameters and field models
    try:
        cfg.environment()
    except (ValueError, TypeError) as e:
        raise ConfigError(f"environment: {e}") from None


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    return parse_config(text, str(path))


def schema_doc() -> str:
    """Plain-text list of accepted keys and defaults."""
    lines = [f"{k} = {v[1]!r}" for k, v in SCHEMA.items()]
    for kind, ps in FIELD_PARAMS.items():
        lines.append(f"env.<block>.kind = {kind}: " + ", ".join(sorted(ps)))
    return "\n".join(lines)
