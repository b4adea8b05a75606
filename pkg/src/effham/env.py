"""Sampled 1-D environments (a, H) and their evaluators.

A Hamiltonian is stored as a finite sum ``H(x, p) = sum_j c_j(x) phi_j(p)``,
optionally replaced by ``max(H, |p|^4 - n)`` after superquadratic truncation.
Each coefficient c_j and the diffusion a are scalar random fields drawn from a
seed.  Everything downstream (ODE sweeps, parabolic solver) works from the
tabulated coefficients, so one code path serves every form.
"""

from __future__ import annotations

import json
import math
import re
import threading
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import _kernels as K
from .errors import ConfigError, PreconditionError

FORMS = ("separable", "pinned", "double_well", "general_sum")
MODELS = ("constant", "periodic_cosine", "random_fourier", "poisson_bumps")

_BUMP_LIP = 8.0 / (3.0 * math.sqrt(3.0))  # max |psi'| for psi(r) = (1 - r^2)^2


# ---------------------------------------------------------------- class params


@dataclass(frozen=True)
class ClassParams:
    alpha0: float = 0.5
    alpha1: float = 8.0
    gamma: float = 2.0
    kappa: float = 1.0
    a_min: float = 1.0

    def __post_init__(self):
        if not (self.alpha0 > 0 and self.alpha1 > 0):
            raise ConfigError("alpha0 and alpha1 must be positive")
        if not self.gamma > 1:
            raise ConfigError("gamma must exceed 1")
        if not self.kappa > 0:
            raise ConfigError("kappa must be positive")
        if not (0 < self.a_min <= 1):
            raise ConfigError("a_min must lie in (0, 1]")


# ---------------------------------------------------------------- momentum part

_MOMENTUM_NAMES = {K.ONE: "1", K.POW: "|p|^g", K.ABS: "|p|", K.LIN: "p", K.DWELL: "(p^2-1)^2"}


def phi_np(kind: int, g: float, p):
    p = np.asarray(p, dtype=float)
    if kind == K.ONE:
        return np.ones_like(p)
    if kind == K.POW:
        return p * p if g == 2.0 else np.abs(p) ** g
    if kind == K.ABS:
        return np.abs(p)
    if kind == K.LIN:
        return p.copy()
    if kind == K.DWELL:
        return (p * p - 1.0) ** 2
    raise ValueError(kind)


def dphi_np(kind: int, g: float, p):
    p = np.asarray(p, dtype=float)
    if kind == K.ONE:
        return np.zeros_like(p)
    if kind == K.POW:
        return 2.0 * p if g == 2.0 else g * np.abs(p) ** (g - 1.0) * np.sign(p)
    if kind == K.ABS:
        return np.sign(p)
    if kind == K.LIN:
        return np.ones_like(p)
    return 4.0 * p * (p * p - 1.0)


_ATOM = re.compile(
    r"^(?:(?P<num>\d+(?:\.\d*)?(?:e[+-]?\d+)?)\*?)?"
    r"(?P<atom>\(p\^2-1\)\^2|\|p\|\^(?P<g1>\d+(?:\.\d*)?)|p\^(?P<g2>\d+)|\|p\||p)?$"
)


def parse_momentum(text: str) -> list[tuple[float, int, float]]:
    """Parse strings like ``"|p|^3 - 2|p| + 1"`` into (coef, kind, exponent) terms."""
    s = text.replace(" ", "").replace("**", "^")
    if not s:
        raise ConfigError("empty momentum expression")
    parts, depth, cur = [], 0, ""
    for ch in s:
        if ch in "+-" and depth == 0 and cur not in ("", "+", "-"):
            parts.append(cur)
            cur = ch
            continue
        depth += ch == "("
        depth -= ch == ")"
        cur += ch
    parts.append(cur)
    terms = []
    for part in parts:
        sign = -1.0 if part.startswith("-") else 1.0
        body = part.lstrip("+-")
        m = _ATOM.match(body)
        if not m or not body:
            raise ConfigError(f"cannot parse momentum term {part!r} in {text!r}")
        coef = sign * (float(m["num"]) if m["num"] else 1.0)
        atom = m["atom"]
        if atom is None:
            terms.append((coef, K.ONE, 0.0))
        elif atom == "p":
            terms.append((coef, K.LIN, 1.0))
        elif atom == "|p|":
            terms.append((coef, K.ABS, 1.0))
        elif atom.startswith("("):
            terms.append((coef, K.DWELL, 4.0))
        elif m["g1"]:
            g = float(m["g1"])
            terms.append((coef, K.ABS, 1.0) if g == 1.0 else (coef, K.POW, g))
        else:
            g = int(m["g2"])
            if g % 2:
                raise ConfigError(f"odd power p^{g} is ambiguous, write |p|^{g}")
            terms.append((coef, K.POW, float(g)))
    return terms


# ---------------------------------------------------------------- scalar fields


@dataclass(frozen=True)
class FieldModel:
    """A recipe for a scalar random field; ``params`` depend on ``kind``.

    constant:        value
    periodic_cosine: amplitudes (list), period, random_phase (bool), offset
    random_fourier:  amplitude, decay, modes, length, offset
    poisson_bumps:   density (per unit length), width, height_lo, height_hi, offset, max_per_cell
    """

    kind: str = "constant"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in MODELS:
            raise ConfigError(f"unknown field model {self.kind!r}")
        p = self.params
        if self.kind == "periodic_cosine":
            amps = p.get("amplitudes", [1.0])
            if len(amps) == 0:
                raise ConfigError("periodic_cosine needs a non-empty amplitude list")
            if p.get("period", 1.0) <= 0:
                raise ConfigError("period must be positive")
        elif self.kind == "random_fourier":
            if p.get("decay", 2.0) < 2.0:
                raise ConfigError("random_fourier decay must be >= 2 (summable Lipschitz bound)")
            if int(p.get("modes", 64)) < 1 or p.get("length", 1.0) <= 0:
                raise ConfigError("random_fourier needs modes >= 1 and length > 0")
        elif self.kind == "poisson_bumps":
            if p.get("density", 1.0) <= 0 or p.get("width", 0.5) <= 0:
                raise ConfigError("poisson_bumps needs positive density and width")
            if p.get("height_lo", -1.0) > p.get("height_hi", 1.0):
                raise ConfigError("height_lo > height_hi")

    def to_dict(self):
        return {"kind": self.kind, "params": dict(self.params)}

    @classmethod
    def from_dict(cls, d):
        return cls(d["kind"], dict(d.get("params", {})))


def _seed_seq(seed: int, *stream: int):
    return np.random.SeedSequence([int(seed) & (2**64 - 1), *[int(s) & (2**64 - 1) for s in stream]])


class Field:
    """Sampled scalar field: callable on arrays, with a rigorous range and x-Lipschitz bound."""

    lo: float
    hi: float
    lip: float

    def __call__(self, x):
        raise NotImplementedError

    def coeffs(self) -> dict:
        return {}


class ConstantField(Field):
    def __init__(self, value):
        self.value = float(value)
        self.lo = self.hi = self.value
        self.lip = 0.0

    def __call__(self, x):
        return np.full(np.shape(x), self.value)

    def coeffs(self):
        return {"value": self.value}


class CosineSeries(Field):
    """offset + sum_k amp_k cos(2 pi freq_k x + phase_k)."""

    def __init__(self, offset, amps, freqs, phases):
        self.offset = float(offset)
        self.amps = np.asarray(amps, float)
        self.freqs = np.asarray(freqs, float)
        self.phases = np.asarray(phases, float)
        tot = float(np.abs(self.amps).sum())
        self.lo, self.hi = self.offset - tot, self.offset + tot
        self.lip = float(np.sum(np.abs(self.amps) * 2 * np.pi * np.abs(self.freqs)))

    def __call__(self, x):
        x = np.asarray(x, float)
        out = np.full(x.shape, self.offset)
        for A, k, ph in zip(self.amps, self.freqs, self.phases):
            out += A * np.cos(2 * np.pi * k * x + ph)
        return out

    def coeffs(self):
        return {
            "offset": self.offset,
            "amplitudes": self.amps.tolist(),
            "frequencies": self.freqs.tolist(),
            "phases": self.phases.tolist(),
        }


class PoissonBumps(Field):
    """offset + sum_i h_i psi((x - c_i)/w) with psi(r) = (1 - r^2)^2 on |r| < 1.

    Centers are generated per unit cell [m, m+1) from an RNG keyed on
    (seed, stream, m), so any window can be materialized lazily and
    independently of query order.  The count per cell is Poisson(density)
    truncated at ``max_per_cell``, which makes the range and Lipschitz bounds finite.
    """

    def __init__(self, seed, stream, density, width, height_lo, height_hi, offset, max_per_cell):
        self.seed, self.stream = int(seed), int(stream)
        self.density, self.width = float(density), float(width)
        self.hlo, self.hhi = float(height_lo), float(height_hi)
        self.offset = float(offset)
        self.cap = int(max_per_cell)
        self._cells: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._lock = threading.Lock()
        # cells overlapping one point: those within a width on either side
        overlap = self.cap * (2 * math.ceil(self.width) + 1)
        self.lo = self.offset + overlap * min(self.hlo, 0.0)
        self.hi = self.offset + overlap * max(self.hhi, 0.0)
        self.lip = overlap * max(abs(self.hlo), abs(self.hhi)) * _BUMP_LIP / self.width

    def _cell(self, m: int):
        got = self._cells.get(m)
        if got is not None:
            return got
        rng = np.random.default_rng(_seed_seq(self.seed, self.stream, m))
        n = min(int(rng.poisson(self.density)), self.cap)
        c = m + rng.random(n)
        h = self.hlo + (self.hhi - self.hlo) * rng.random(n)
        with self._lock:
            self._cells.setdefault(m, (c, h))
        return self._cells[m]

    def centers(self, x_lo, x_hi):
        m0 = math.floor(x_lo - self.width)
        m1 = math.floor(x_hi + self.width)
        cs, hs = zip(*(self._cell(m) for m in range(m0, m1 + 1)))
        return np.concatenate(cs), np.concatenate(hs)

    def __call__(self, x):
        x = np.asarray(x, float)
        out = np.full(x.shape, self.offset)
        if x.size == 0:
            return out
        flat = x.ravel()
        order = np.argsort(flat, kind="stable")
        xs = flat[order]
        c, h = self.centers(xs[0], xs[-1])
        acc = np.zeros_like(xs)
        i0 = np.searchsorted(xs, c - self.width, "right")
        i1 = np.searchsorted(xs, c + self.width, "left")
        for ci, hi, a, b in zip(c, h, i0, i1):
            if b > a:
                r = (xs[a:b] - ci) / self.width
                acc[a:b] += hi * (1.0 - r * r) ** 2
        res = np.empty_like(flat)
        res[order] = acc
        return out + res.reshape(x.shape)

    def coeffs(self):
        cells = {str(m): {"centers": v[0].tolist(), "heights": v[1].tolist()} for m, v in sorted(self._cells.items())}
        return {"offset": self.offset, "width": self.width, "cells": cells}


def sample_field(model: FieldModel, seed: int, stream: int) -> Field:
    p = model.params
    if model.kind == "constant":
        return ConstantField(p.get("value", 0.0))
    rng = np.random.default_rng(_seed_seq(seed, stream))
    if model.kind == "periodic_cosine":
        amps = np.asarray(p.get("amplitudes", [1.0]), float)
        ell = float(p.get("period", 1.0))
        k = np.arange(1, len(amps) + 1) / ell
        ph = rng.uniform(0, 2 * np.pi, len(amps)) if p.get("random_phase", False) else np.zeros(len(amps))
        return CosineSeries(p.get("offset", 0.0), amps, k, ph)
    if model.kind == "random_fourier":
        nm = int(p.get("modes", 64))
        q = float(p.get("decay", 2.0))
        ell = float(p.get("length", 1.0))
        kk = np.arange(1, nm + 1)
        xi = rng.uniform(-1.0, 1.0, nm)
        jitter = rng.uniform(-0.5, 0.5, nm)
        ph = rng.uniform(0, 2 * np.pi, nm)
        amps = float(p.get("amplitude", 1.0)) * kk ** (-q) * xi
        return CosineSeries(p.get("offset", 0.0), amps, (kk + jitter) / ell, ph)
    dens = float(p.get("density", 1.0))
    cap = int(p.get("max_per_cell", max(4, math.ceil(dens + 6 * math.sqrt(dens)))))
    return PoissonBumps(
        seed, stream, dens, p.get("width", 0.5), p.get("height_lo", -1.0), p.get("height_hi", 1.0),
        p.get("offset", 0.0), cap,
    )


class SqrtDiffusion(Field):
    """a = s^2 with s = mid + half * squash(raw) in [sqrt(a_min), 1].

    The squash is affine (raw / bound) when the raw field has a finite range,
    which is always the case here; tanh is kept for unbounded-looking bump fields
    whose worst-case bound would flatten the profile.
    """

    def __init__(self, raw: Field, a_min: float, squash: str = "affine"):
        self.raw = raw
        self.a_min = a_min
        r = math.sqrt(a_min)
        self.mid, self.half = (1 + r) / 2, (1 - r) / 2
        self.squash = squash
        c = 0.5 * (raw.hi + raw.lo)
        b = 0.5 * (raw.hi - raw.lo)
        self.center, self.scale = c, (b if b > 0 else 1.0)
        self.lo, self.hi = a_min, 1.0
        self.kappa = self.half * raw.lip / self.scale  # Lipschitz constant of s

    def sqrt_a(self, x):
        z = (self.raw(x) - self.center) / self.scale
        if self.squash == "tanh":
            z = np.tanh(z)
        return np.clip(self.mid + self.half * z, math.sqrt(self.a_min), 1.0)

    def __call__(self, x):
        s = self.sqrt_a(x)
        return s * s

    def coeffs(self):
        return {"raw": self.raw.coeffs(), "mid": self.mid, "half": self.half, "squash": self.squash}


class ConstantDiffusion(ConstantField):
    def __init__(self, value):
        super().__init__(value)
        self.kappa = 0.0

    def sqrt_a(self, x):
        return np.sqrt(self(x))


# ---------------------------------------------------------------- environment spec


@dataclass(frozen=True)
class EnvironmentSpec:
    form: str = "separable"
    potential: FieldModel = field(default_factory=FieldModel)
    diffusion: FieldModel = field(default_factory=lambda: FieldModel("constant", {"value": 1.0}))
    cls: ClassParams = field(default_factory=ClassParams)
    momentum: str = "p^2"  # G(p) for the separable form
    coupling: FieldModel = field(default_factory=lambda: FieldModel("constant", {"value": 0.0}))  # c(x), pinned
    terms: tuple = ()  # general_sum: ((FieldModel, momentum string), ...)

    def __post_init__(self):
        if self.form not in FORMS:
            raise ConfigError(f"unknown form {self.form!r}; expected one of {FORMS}")
        if self.form == "general_sum" and not self.terms:
            raise ConfigError("general_sum needs at least one term")
        if self.form == "separable":
            parse_momentum(self.momentum)
        if self.diffusion.kind == "constant":
            v = self.diffusion.params.get("value", 1.0)
            if not (self.cls.a_min <= v <= 1.0):
                raise ConfigError(f"constant diffusion {v} outside [a_min, 1]")

    def to_dict(self):
        return {
            "form": self.form,
            "potential": self.potential.to_dict(),
            "diffusion": self.diffusion.to_dict(),
            "class": self.cls.__dict__.copy(),
            "momentum": self.momentum,
            "coupling": self.coupling.to_dict(),
            "terms": [[fm.to_dict(), mom] for fm, mom in self.terms],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            form=d["form"],
            potential=FieldModel.from_dict(d["potential"]),
            diffusion=FieldModel.from_dict(d["diffusion"]),
            cls=ClassParams(**d["class"]),
            momentum=d.get("momentum", "p^2"),
            coupling=FieldModel.from_dict(d.get("coupling", {"kind": "constant", "params": {"value": 0.0}})),
            terms=tuple((FieldModel.from_dict(a), b) for a, b in d.get("terms", [])),
        )


# ---------------------------------------------------------------- realization


@dataclass
class Realization:
    """One sampled environment.  Treat as immutable; ``shifted`` returns a copy."""

    spec: EnvironmentSpec
    seed: int
    diffusion: Field
    fields: list  # coefficient field per term
    kinds: np.ndarray  # int64 momentum codes
    expos: np.ndarray  # float exponents
    shift: float = 0.0
    trunc: float = float("nan")  # n of max(H, |p|^4 - n); NaN means no truncation
    cls: ClassParams | None = None

    def __post_init__(self):
        if self.cls is None:
            self.cls = self.spec.cls

    # evaluators -------------------------------------------------------
    def eval_a(self, x):
        return self.diffusion(np.asarray(x, float) + self.shift)

    def eval_sqrt_a(self, x):
        return self.diffusion.sqrt_a(np.asarray(x, float) + self.shift)

    def coeff_table(self, x):
        """C[j, i] = c_j(x_i) for a 1-D array x."""
        xs = np.asarray(x, float) + self.shift
        return np.vstack([f(xs) for f in self.fields]) if self.fields else np.zeros((0, xs.size))

    def eval_H(self, x, p):
        x, p = np.broadcast_arrays(np.asarray(x, float), np.asarray(p, float))
        xs = x + self.shift
        out = np.zeros(x.shape)
        for f, kd, g in zip(self.fields, self.kinds, self.expos):
            out += f(xs) * phi_np(int(kd), float(g), p)
        if self.trunc == self.trunc:
            out = np.maximum(out, p**4 - self.trunc)
        return out if out.ndim else float(out)

    def eval_dH(self, x, p):
        x, p = np.broadcast_arrays(np.asarray(x, float), np.asarray(p, float))
        xs = x + self.shift
        h = np.zeros(x.shape)
        d = np.zeros(x.shape)
        for f, kd, g in zip(self.fields, self.kinds, self.expos):
            c = f(xs)
            h += c * phi_np(int(kd), float(g), p)
            d += c * dphi_np(int(kd), float(g), p)
        if self.trunc == self.trunc:
            d = np.where(p**4 - self.trunc > h, 4 * p**3, d)
        return d if d.ndim else float(d)

    def tabulate(self, x):
        """(C, A) arrays for the compiled kernels on the points x."""
        x = np.asarray(x, float)
        return np.ascontiguousarray(self.coeff_table(x)), np.ascontiguousarray(self.eval_a(x))

    # structure --------------------------------------------------------
    @property
    def x_free(self) -> bool:
        return all(isinstance(f, ConstantField) for f in self.fields) and isinstance(self.diffusion, ConstantField)

    @property
    def period(self) -> float | None:
        """Common period of all fields, if they are periodic cosine or constant."""
        periods = []
        for f in [*self.fields, getattr(self.diffusion, "raw", self.diffusion)]:
            if isinstance(f, ConstantField):
                continue
            if isinstance(f, CosineSeries) and self._cos_periodic(f):
                periods.append(1.0 / f.freqs[0])
            else:
                return None
        if not periods:
            return 0.0
        ell = periods[0]
        return ell if all(abs(q - ell) < 1e-12 * ell for q in periods) else None

    @staticmethod
    def _cos_periodic(f: CosineSeries):
        k = f.freqs
        return len(k) > 0 and np.allclose(k / k[0], np.arange(1, len(k) + 1), rtol=0, atol=1e-12)

    @property
    def correlation_length(self) -> float:
        """Length scale of the fields; used to size windows and diagnostics."""
        ells = []
        for f in [*self.fields, getattr(self.diffusion, "raw", self.diffusion)]:
            if isinstance(f, CosineSeries) and np.any(f.amps):
                ells.append(1.0 / float(np.min(np.abs(f.freqs[f.amps != 0]))))
            elif isinstance(f, PoissonBumps):
                ells.append(max(2 * f.width, 1.0 / f.density))
        return max(ells) if ells else 1.0

    @property
    def resolution(self) -> float:
        """Smallest length scale resolved by a sampling grid (for step-size choices)."""
        res = []
        for f in [*self.fields, getattr(self.diffusion, "raw", self.diffusion)]:
            if isinstance(f, CosineSeries) and f.freqs.size:
                res.append(1.0 / float(np.max(np.abs(f.freqs))))
            elif isinstance(f, PoissonBumps):
                res.append(f.width)
        return min(res) if res else 1.0

    def coeff_bounds(self):
        """Rigorous [lo, hi] of each coefficient field over all of R."""
        return [(f.lo, f.hi) for f in self.fields]

    def shifted(self, s: float) -> "Realization":
        return replace(self, shift=self.shift + float(s))

    # serialization ----------------------------------------------------
    def to_manifest(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "seed": int(self.seed),
            "shift": self.shift,
            "truncation": None if self.trunc != self.trunc else self.trunc,
            "class": self.cls.__dict__.copy(),
            "kappa_built": float(getattr(self.diffusion, "kappa", 0.0)),
            "diffusion": self.diffusion.coeffs(),
            "terms": [
                {"momentum": _MOMENTUM_NAMES[int(kd)].replace("g", f"{g:g}"), "coefficient": f.coeffs()}
                for f, kd, g in zip(self.fields, self.kinds, self.expos)
            ],
        }

    def dump_manifest(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_manifest(), fh, indent=2)


def _diffusion_field(spec: EnvironmentSpec, seed: int) -> Field:
    m = spec.diffusion
    if m.kind == "constant":
        return ConstantDiffusion(m.params.get("value", 1.0))
    raw = sample_field(m, seed, 1)
    squash = "tanh" if m.kind == "poisson_bumps" else "affine"
    return SqrtDiffusion(raw, spec.cls.a_min, squash)


def sample_realization(spec: EnvironmentSpec, seed: int = 0) -> Realization:
    """Draw the finitely many random coefficients of one environment."""
    seed = int(seed)
    fields: list[Field] = []
    codes: list[tuple[int, float]] = []

    def add(fld, mom):
        for coef, kd, g in parse_momentum(mom):
            fields.append(fld if coef == 1.0 else _Scaled(fld, coef))
            codes.append((kd, g))

    pot = sample_field(spec.potential, seed, 0)
    if spec.form == "separable":
        for coef, kd, g in parse_momentum(spec.momentum):
            fields.append(ConstantField(coef))
            codes.append((kd, g))
        fields.append(pot)
        codes.append((K.ONE, 0.0))
    elif spec.form == "pinned":
        c = sample_field(spec.coupling, seed, 2)
        if c.lo < 0:
            raise ConfigError("pinned form needs c(x) >= 0 everywhere; raise the coupling offset")
        fields += [ConstantField(1.0), _Scaled(c, -1.0), pot]
        codes += [(K.POW, spec.cls.gamma), (K.ABS, 1.0), (K.ONE, 0.0)]
    elif spec.form == "double_well":
        fields += [ConstantField(1.0), pot]
        codes += [(K.DWELL, 4.0), (K.ONE, 0.0)]
    else:
        for j, (fm, mom) in enumerate(spec.terms):
            add(sample_field(fm, seed, 3 + j), mom)
    kinds = np.array([c[0] for c in codes], dtype=np.int64)
    expos = np.array([c[1] for c in codes], dtype=float)
    return Realization(spec, seed, _diffusion_field(spec, seed), fields, kinds, expos)


class _Scaled(Field):
    def __init__(self, base: Field, k: float):
        self.base, self.k = base, float(k)
        a, b = k * base.lo, k * base.hi
        self.lo, self.hi = min(a, b), max(a, b)
        self.lip = abs(k) * base.lip

    def __call__(self, x):
        return self.k * self.base(x)

    def coeffs(self):
        return {"scale": self.k, "base": self.base.coeffs()}


# ---------------------------------------------------------------- evaluation helpers


def eval_a(r: Realization, x):
    return r.eval_a(x)


def eval_H(r: Realization, x, p):
    return r.eval_H(x, p)


def from_string(expr: str, potential: FieldModel | None = None, **kw) -> EnvironmentSpec:
    """Shorthand: separable spec ``G(p) + V(x)`` with the class parameters guessed loosely."""
    terms = parse_momentum(expr)
    g = max([t[2] for t in terms if t[1] in (K.POW, K.DWELL)] + [1.5 if any(t[1] == K.ABS for t in terms) else 2.0])
    cls = kw.pop("cls", ClassParams(gamma=g))
    return EnvironmentSpec("separable", potential or FieldModel("constant", {"value": 0.0}), momentum=expr, cls=cls, **kw)


# ---------------------------------------------------------------- class verification


@dataclass
class ClassReport:
    passed: bool
    ratios: dict  # worst observed lhs/rhs (<= 1 means satisfied)
    witnesses: dict  # condition -> witnessing (x, p, q) or (x, y, p)
    required: dict  # smallest constants that would pass on this grid

    def summary(self):
        flags = ", ".join(f"{k}={v:.4g}" for k, v in self.ratios.items())
        return ("pass" if self.passed else "FAIL") + f" [{flags}]"


def verify_class(r: Realization, x_window=(-5.0, 5.0), p_window=(-4.0, 4.0), grid=(0.01, 0.05), cls=None, slack=1e-9):
    """Scan (H1)-(H3) and the diffusion bounds on a grid and report worst ratios with witnesses."""
    c = cls or r.cls
    (x0, x1), (p0, p1) = x_window, p_window
    if not (x1 > x0 and p1 > p0):
        raise PreconditionError("empty scan window")
    xs = np.arange(x0, x1 + 0.5 * grid[0], grid[0])
    ps = np.arange(p0, p1 + 0.5 * grid[1], grid[1])
    X, P = np.meshgrid(xs, ps, indexing="ij")
    H = r.eval_H(X, P)
    g, a0, a1 = c.gamma, c.alpha0, c.alpha1
    pg = np.abs(P) ** g
    ratios, wit, req = {}, {}, {}

    lower = a0 * pg - 1.0 / a0
    v = lower - H
    i = np.unravel_index(np.argmax(v), v.shape)
    ratios["H1_lower"] = float(v[i])  # <= 0 ok
    wit["H1_lower"] = (float(xs[i[0]]), float(ps[i[1]]))

    up = a1 * (pg + 1.0)
    q = H / up
    i = np.unravel_index(np.argmax(q), q.shape)
    ratios["H1_upper"] = float(q[i])
    wit["H1_upper"] = (float(xs[i[0]]), float(ps[i[1]]))
    req["alpha1_H1"] = float(np.max(H / (pg + 1.0)))

    # (H2) over all momentum pairs at each x
    dH = np.abs(H[:, :, None] - H[:, None, :])
    pa = np.abs(ps)
    dp = np.abs(ps[:, None] - ps[None, :])
    scale = (pa[:, None] + pa[None, :] + 1.0) ** (g - 1.0) * dp
    with np.errstate(invalid="ignore", divide="ignore"):
        q2 = np.where(dp > 0, dH / (a1 * scale), 0.0)
    i = np.unravel_index(np.argmax(q2), q2.shape)
    ratios["H2"] = float(q2[i])
    wit["H2"] = (float(xs[i[0]]), float(ps[i[1]]), float(ps[i[2]]))
    req["alpha1_H2"] = float(q2[i] * a1)
    del dH, q2

    # (H3) adjacent x differences bound the Lipschitz constant from below exactly
    dx = np.diff(xs)[:, None]
    q3 = np.abs(np.diff(H, axis=0)) / (dx * a1 * (pg[:-1] + 1.0))
    i = np.unravel_index(np.argmax(q3), q3.shape)
    ratios["H3"] = float(q3[i])
    wit["H3"] = (float(xs[i[0]]), float(xs[i[0] + 1]), float(ps[i[1]]))
    req["alpha1_H3"] = float(q3[i] * a1)

    s = r.eval_sqrt_a(xs)
    a = s * s
    lip = np.abs(np.diff(s)) / np.diff(xs)
    j = int(np.argmax(lip)) if lip.size else 0
    ratios["A2"] = float(lip[j] / c.kappa) if lip.size else 0.0
    wit["A2"] = (float(xs[j]), float(xs[min(j + 1, xs.size - 1)]))
    req["kappa"] = float(lip.max()) if lip.size else 0.0
    ratios["a_range"] = float(max(c.a_min - a.min(), a.max() - 1.0))  # <= 0 ok
    wit["a_range"] = (float(xs[int(np.argmin(a))]),)

    ok = (
        ratios["H1_lower"] <= slack
        and ratios["H1_upper"] <= 1 + slack
        and ratios["H2"] <= 1 + slack
        and ratios["H3"] <= 1 + slack
        and ratios["A2"] <= 1 + slack
        and ratios["a_range"] <= slack
    )
    bad = {k: v for k, v in wit.items() if not _ok(k, ratios[k], slack)}
    return ClassReport(ok, ratios, bad if not ok else {}, req)


def _ok(key, val, slack):
    return val <= slack if key in ("H1_lower", "a_range") else val <= 1 + slack


# ---------------------------------------------------------------- truncation


def truncation_level(r: Realization, K_: float) -> float:
    """Smallest integer n with |p|^4 - n <= H(x, p) for all x and |p| <= K_.

    Uses the rigorous coefficient ranges, so the bound holds on all of R in x.
    """
    ps = np.linspace(-K_, K_, 8001)
    worst = np.zeros_like(ps)
    for (lo, hi), kd, g in zip(r.coeff_bounds(), r.kinds, r.expos):
        ph = phi_np(int(kd), float(g), ps)
        worst += np.minimum(lo * ph, hi * ph)
    gap = ps**4 - worst
    i = int(np.argmax(gap))
    # refine around the grid maximizer
    from scipy.optimize import minimize_scalar

    lo_p, hi_p = ps[max(i - 1, 0)], ps[min(i + 1, ps.size - 1)]

    def neg(p):
        w = sum(min(lo * phi_np(int(kd), float(g), p), hi * phi_np(int(kd), float(g), p))
                for (lo, hi), kd, g in zip(r.coeff_bounds(), r.kinds, r.expos))
        return -(p**4 - float(w))

    best = gap[i]
    if hi_p > lo_p:
        res = minimize_scalar(neg, bounds=(lo_p, hi_p), method="bounded", options={"xatol": 1e-12})
        best = max(best, -res.fun)
    return float(math.ceil(best - 1e-9))


def truncate_superquadratic(r: Realization, K_: float) -> Realization:
    """max(H, |p|^4 - n) with n minimal so the two agree on |p| <= K_."""
    if not K_ > 0:
        raise PreconditionError("truncation radius must be positive")
    n = truncation_level(r, K_)
    if r.trunc == r.trunc:
        n = max(n, r.trunc)
    c = r.cls
    if c.gamma >= 4:
        new = replace(c, alpha1=max(c.alpha1, 4.0), alpha0=c.alpha0)
        if n > 0:
            new = replace(new, alpha0=min(c.alpha0, 1.0, 1.0 / n))
    else:
        new = ClassParams(
            alpha0=min(c.alpha0, 1.0, 1.0 / max(n, 1.0)),
            alpha1=max(2.0 * c.alpha1, 4.0),
            gamma=4.0,
            kappa=c.kappa,
            a_min=c.a_min,
        )
    return replace(r, trunc=float(n), cls=new)


def H_min_profile(r: Realization, xs, p_range=None, npts=801):
    """min_p H(x_i, p) at each node, by grid search plus golden refinement."""
    C, _ = r.tabulate(xs)
    P = np.linspace(*(p_range or (-6.0, 6.0)), npts)
    G = K.ham_grid(C, r.kinds, r.expos, r.trunc, P)
    j = np.argmin(G, axis=1)
    return G[np.arange(len(xs)), j], P[j]


def momentum_bound(r: Realization) -> float:
    """A radius outside of which H is certainly increasing in |p| far from the band; heuristic scale."""
    lam_scale = max(abs(r.cls.alpha1), 1.0)
    return (2.0 * lam_scale / r.cls.alpha0 + 2.0 / r.cls.alpha0**2) ** (1.0 / r.cls.gamma) + 1.0


__all__ = [
    "ClassParams", "FieldModel", "EnvironmentSpec", "Realization", "ClassReport",
    "sample_realization", "eval_a", "eval_H", "verify_class", "truncate_superquadratic",
    "truncation_level", "parse_momentum", "from_string", "H_min_profile",
]
