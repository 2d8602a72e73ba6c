"""File formats: Gaussian-component CSV datasets, parameter records, histograms.

All writers are atomic (temp file in the target directory, then rename) and
format floats with ``repr``, which round-trips exactly through ``float``.
"""

from __future__ import annotations

import csv
import os
import tempfile

import numpy as np

from .distributions import Gaussian
from .errors import SchemaError
from .fitting import FitResult, ForecastCase
from .pools import BlpSpec, GlpSpec, LinkFunction, PoolSpec, SlpSpec, TlpSpec


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# dataset CSV: header y,mu_1,sd_1,...,mu_k,sd_k; '#' lines are comments


def dataset_header(k: int) -> list[str]:
    cols = ["y"]
    for i in range(1, k + 1):
        cols += [f"mu_{i}", f"sd_{i}"]
    return cols


def read_dataset_csv(path: str) -> list[ForecastCase]:
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise SchemaError(f"{path}: empty dataset file")
    rows = list(csv.reader(lines))
    header = [h.strip() for h in rows[0]]
    if not header or header[0] != "y" or len(header) < 3 or len(header) % 2 == 0:
        raise SchemaError(
            f"{path}: header must be y,mu_1,sd_1,...,mu_k,sd_k; got {','.join(header)}"
        )
    k = (len(header) - 1) // 2
    expected = dataset_header(k)
    for want, got in zip(expected, header):
        if want != got:
            raise SchemaError(f"{path}: missing or misplaced column {want!r} (found {got!r})")
    cases = []
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise SchemaError(f"{path}: row {r} has {len(row)} fields, expected {len(header)}")
        try:
            vals = [float(x) for x in row]
        except ValueError as exc:
            raise SchemaError(f"{path}: row {r}: non-numeric value ({exc})") from exc
        comps = []
        for i in range(k):
            mu, sd = vals[1 + 2 * i], vals[2 + 2 * i]
            if not sd > 0.0:
                raise SchemaError(f"{path}: row {r}: sd_{i + 1} must be positive, got {sd}")
            comps.append(Gaussian(mu, sd))
        cases.append(ForecastCase(components=tuple(comps), y=vals[0]))
    return cases


def write_dataset_csv(path: str, cases) -> None:
    cases = list(cases)
    if not cases:
        raise SchemaError("refusing to write an empty dataset")
    k = len(cases[0].components)
    out = [",".join(dataset_header(k))]
    for case in cases:
        if len(case.components) != k:
            raise SchemaError("all cases must have the same number of components")
        fields = [_fmt(case.y)]
        for c in case.components:
            if not isinstance(c, Gaussian):
                raise SchemaError(
                    "the CSV schema covers Gaussian components only; "
                    f"got {type(c).__name__}"
                )
            fields += [_fmt(c.mu), _fmt(c.sigma)]
        out.append(",".join(fields))
    atomic_write_text(path, "\n".join(out) + "\n")


def write_latents_csv(path: str, latents: dict) -> None:
    names = list(latents.keys())
    if not names:
        raise SchemaError("no latent variables to write")
    n = len(np.asarray(latents[names[0]]))
    cols = [np.asarray(latents[name], dtype=float) for name in names]
    if any(c.size != n for c in cols):
        raise SchemaError("latent arrays must all have the same length")
    out = [",".join(["case"] + names)]
    for j in range(n):
        out.append(",".join([str(j)] + [_fmt(c[j]) for c in cols]))
    atomic_write_text(path, "\n".join(out) + "\n")


# ---------------------------------------------------------------------------
# parameter records: flat "key value" lines


def method_name(spec: PoolSpec) -> str:
    if isinstance(spec, TlpSpec):
        return "tlp"
    if isinstance(spec, SlpSpec):
        return "slp"
    if isinstance(spec, BlpSpec):
        return "blp"
    if isinstance(spec, GlpSpec):
        return f"glp-{spec.link.value}"
    raise SchemaError(f"unknown spec type {type(spec).__name__}")


def params_text(result: FitResult) -> str:
    spec = result.spec
    lines = [f"method {method_name(spec)}", f"k {spec.k}"]
    for i, w in enumerate(spec.w, start=1):
        lines.append(f"w_{i} {_fmt(w)}")
    if isinstance(spec, SlpSpec):
        lines.append(f"c {_fmt(spec.c)}")
    if isinstance(spec, BlpSpec):
        lines.append(f"alpha {_fmt(spec.alpha)}")
        lines.append(f"beta {_fmt(spec.beta)}")
    if result.std_errors:
        for key in sorted(result.std_errors):
            lines.append(f"se_{key} {_fmt(result.std_errors[key])}")
    lines.append(f"converged {'true' if result.converged else 'false'}")
    lines.append(f"iterations {result.iterations}")
    lines.append(f"mean_log_score {_fmt(result.mean_log_score_train)}")
    return "\n".join(lines) + "\n"


def write_params(path: str, result: FitResult) -> None:
    atomic_write_text(path, params_text(result))


def read_params(path: str) -> tuple[PoolSpec, dict]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    kv: dict[str, str] = {}
    for ln in lines:
        parts = ln.split(None, 1)
        if len(parts) != 2:
            raise SchemaError(f"{path}: malformed line {ln!r}")
        kv[parts[0]] = parts[1]
    for required in ("method", "k"):
        if required not in kv:
            raise SchemaError(f"{path}: missing key {required!r}")
    method = kv["method"]
    try:
        k = int(kv["k"])
        w = tuple(float(kv[f"w_{i}"]) for i in range(1, k + 1))
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"{path}: incomplete or non-numeric weights ({exc})") from exc
    try:
        if method == "tlp":
            spec: PoolSpec = TlpSpec(w=w)
        elif method == "slp":
            spec = SlpSpec(w=w, c=float(kv["c"]))
        elif method == "blp":
            spec = BlpSpec(w=w, alpha=float(kv["alpha"]), beta=float(kv["beta"]))
        elif method.startswith("glp-"):
            spec = GlpSpec(w=w, link=LinkFunction(method[4:]))
        else:
            raise SchemaError(f"{path}: unknown method {method!r}")
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"{path}: missing parameter for method {method!r} ({exc})") from exc
    meta = {key: val for key, val in kv.items()}
    return spec, meta


# ---------------------------------------------------------------------------
# diagnostic CSVs and a minimal SVG bar chart


def histogram_csv_text(counts) -> str:
    counts = np.asarray(counts, dtype=int)
    bins = counts.size
    lines = ["bin_lo,bin_hi,count"]
    for b in range(bins):
        lines.append(f"{_fmt(b / bins)},{_fmt((b + 1) / bins)},{int(counts[b])}")
    return "\n".join(lines) + "\n"


def write_histogram_csv(path: str, counts) -> None:
    atomic_write_text(path, histogram_csv_text(counts))


def reliability_csv_text(rows) -> str:
    lines = ["bin_center,freq,count"]
    for center, freq, count in rows:
        lines.append(f"{_fmt(center)},{_fmt(freq)},{int(count)}")
    return "\n".join(lines) + "\n"


def write_reliability_csv(path: str, rows) -> None:
    atomic_write_text(path, reliability_csv_text(rows))


def histogram_svg(counts, width: int = 400, height: int = 240) -> str:
    """Static SVG bar chart of PIT histogram counts."""
    counts = np.asarray(counts, dtype=float)
    bins = counts.size
    top = max(float(counts.max()), 1.0)
    margin = 20
    plot_w = width - 2 * margin
    plot_h = height - 2 * margin
    bar_w = plot_w / bins
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    for b, cnt in enumerate(counts):
        h = plot_h * cnt / top
        x = margin + b * bar_w
        y = margin + plot_h - h
        parts.append(
            f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w - 1:.2f}" '
            f'height="{h:.2f}" fill="steelblue"/>'
        )
    parts.append(
        f'<line x1="{margin}" y1="{margin + plot_h}" x2="{margin + plot_w}" '
        f'y2="{margin + plot_h}" stroke="black"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_histogram_svg(path: str, counts) -> None:
    atomic_write_text(path, histogram_svg(counts))
