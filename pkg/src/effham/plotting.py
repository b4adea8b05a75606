"""SVG figures that carry their own data.

Each figure embeds the plotted series as a JSON comment right after the XML
prolog, so ``read_embedded`` recovers them without the run that made it.
Output is byte-stable: fixed hash salt, no date metadata.
"""

from __future__ import annotations

import io
import json

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_MARK = "effham-data:"


def _series(d):
    return {k: (np.asarray(v).tolist() if isinstance(v, (np.ndarray, list, tuple)) else v) for k, v in d.items()}


def save_svg(fig, path, data: dict):
    buf = io.StringIO()
    with plt.rc_context({"svg.hashsalt": "effham", "svg.fonttype": "none"}):
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    svg = buf.getvalue()
    blob = json.dumps(_series(data), sort_keys=True).replace("--", "- -")
    head, sep, rest = svg.partition("?>")
    if not sep:
        head, rest = "", svg
    out = f"{head}{sep}\n<!-- {_MARK} {blob} -->{rest}"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(out)
    return path


def read_embedded(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    i = text.find(_MARK)
    if i < 0:
        raise ValueError(f"{path}: no embedded data")
    j = text.find("-->", i)
    return json.loads(text[i + len(_MARK) : j].strip().replace("- -", "--"))


def plot_effective(curve, path, title=""):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(curve.points_theta, curve.points_lambda, ".", ms=3, color="0.6", label="inverted points")
    ax.plot(curve.theta_grid, curve.value, "-o", ms=3, color="C0", label="effective value")
    for a, b, lam in curve.flat_segments:
        ax.plot([a, b], [lam, lam], color="C3", lw=3, label="flat part")
    ax.axhline(curve.lambda0, color="0.4", ls=":", lw=1, label="lambda0")
    ax.set_xlabel("theta")
    ax.set_ylabel("effective Hamiltonian")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    return save_svg(fig, path, {"theta": curve.theta_grid, "value": curve.value, "flat": [list(f) for f in curve.flat_segments],
                                "lambda0": curve.lambda0})


def plot_theta_map(tmap, path, title=""):
    fig, ax = plt.subplots(figsize=(6, 4))
    lam, lo, hi = tmap.lambdas, tmap.theta_min, tmap.theta_max
    ax.plot(lo, lam, "-o", ms=3, label="theta_min")
    ax.plot(hi, lam, "-o", ms=3, label="theta_max")
    if tmap.inner:
        t, l_, _ = zip(*tmap.inner)
        ax.plot(t, l_, ".", ms=3, color="C2", label="inner branches")
    ax.set_xlabel("theta")
    ax.set_ylabel("lambda")
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    inner = [list(p[:2]) for p in tmap.inner]
    return save_svg(fig, path, {"lambda": lam, "theta_min": lo, "theta_max": hi, "inner": inner})


def plot_profile(x, ys: dict, path, xlabel="x", ylabel="", title=""):
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, y in ys.items():
        ax.plot(x, y, lw=1, label=name)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(ys) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    data = {"x": x}
    data.update(ys)
    return save_svg(fig, path, data)


def plot_series(xs, ys, path, xlabel, ylabel, title="", logx=False, logy=False):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, ys, "-o", ms=3)
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return save_svg(fig, path, {xlabel: xs, ylabel: ys})
