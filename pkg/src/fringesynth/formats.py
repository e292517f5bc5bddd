"""Readers and writers for every file the CLI produces or consumes.

CSV files are comma separated with a header row; lines starting with ``#``
are comments. Angles in settings tables are degrees, phases in patterns and
count files are radians, as the column names say.
"""

from __future__ import annotations

import csv
import hashlib
import io as _io
import json
import math
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .compiler import ProjectorSetting, RootSet
from .errors import FormatError, InvalidInputError
from .fourier import CoefficientVector, TargetAmplitude
from .model import Pattern, PhaseGrid
from .simul import CountRecord, NoiseConfig

SETTINGS_FIELDS = ("n", "rho_deg", "theta_deg", "norm")
COUNTS_FIELDS = ("projector_index", "phi_requested_rad", "phi_actual_rad", "counts")


def fmt6(x: float) -> str:
    """Six significant digits, no negative zero."""
    s = format(float(x), ".6g")
    return "0" if s == "-0" else s


def fmt_exact(x: float) -> str:
    """Shortest decimal that round-trips to the same double."""
    return repr(float(x))


# ---------------------------------------------------------------------------
# generic CSV handling


def _read_rows(path) -> List[Tuple[int, List[str]]]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read file: {exc.strerror or exc}", path) from exc
    rows = []
    for lineno, row in enumerate(csv.reader(_io.StringIO(text)), start=1):
        if not row or not "".join(row).strip() or row[0].lstrip().startswith("#"):
            continue
        rows.append((lineno, [c.strip() for c in row]))
    return rows


def _comments(path) -> Dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if line.startswith("#") and "=" in line:
            k, v = line[1:].split("=", 1)
            out[k.strip()] = v.strip()
    return out


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True


def _read_table(path, required: Sequence[str]) -> Tuple[List[str], List[Tuple[int, List[str]]]]:
    rows = _read_rows(path)
    if not rows:
        raise FormatError("file has no data", path)
    lineno, header = rows[0]
    missing = [c for c in required if c not in header]
    if missing:
        raise FormatError(f"missing column(s) {missing}; found {header}", path, lineno)
    for ln, row in rows[1:]:
        if len(row) != len(header):
            raise FormatError(f"expected {len(header)} fields, found {len(row)}", path, ln)
    return header, rows[1:]


def _column(path, header, rows, name, conv=float) -> list:
    j = header.index(name)
    out = []
    for ln, row in rows:
        try:
            out.append(conv(row[j]))
        except ValueError:
            raise FormatError(f"cannot parse {row[j]!r} as {name}", path, ln, j + 1) from None
    return out


def _write_csv(path, header: Sequence[str], rows, comments: Sequence[str] = ()) -> None:
    buf = _io.StringIO()
    for c in comments:
        buf.write(f"# {c}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    Path(path).write_text(buf.getvalue())


# ---------------------------------------------------------------------------
# sampled targets


def read_samples(path) -> TargetAmplitude:
    """Read ``phi, Re g[, Im g]`` rows (radians); a header row is optional."""
    rows = _read_rows(path)
    if rows and not all(_is_number(c) for c in rows[0][1]):
        rows = rows[1:]
    if not rows:
        raise FormatError("no samples found", path)
    phi, g = [], []
    for ln, row in rows:
        if len(row) not in (2, 3):
            raise FormatError(f"expected 2 or 3 columns, found {len(row)}", path, ln)
        vals = []
        for j, c in enumerate(row):
            try:
                vals.append(float(c))
            except ValueError:
                raise FormatError(f"cannot parse {c!r} as a number", path, ln, j + 1) from None
        phi.append(vals[0])
        g.append(complex(vals[1], vals[2] if len(vals) == 3 else 0.0))
    try:
        return TargetAmplitude.sampled(phi, g)
    except InvalidInputError as exc:
        raise FormatError(str(exc), path) from None


# ---------------------------------------------------------------------------
# coefficients and roots


def write_coefficients(path, coeffs: CoefficientVector) -> None:
    rows = [(k, fmt_exact(b.real), fmt_exact(b.imag)) for k, b in enumerate(coeffs.b)]
    _write_csv(path, ("n", "re", "im"), rows, [f"N = {coeffs.N}"])


def read_coefficients(path) -> CoefficientVector:
    header, rows = _read_table(path, ("n", "re", "im"))
    n = _column(path, header, rows, "n", int)
    if n != list(range(len(n))):
        raise FormatError("coefficient indices must run 0..N in order", path)
    re = _column(path, header, rows, "re")
    im = _column(path, header, rows, "im")
    return CoefficientVector(len(n) - 1, np.array(re) + 1j * np.array(im))


def rootset_to_dict(rs: RootSet) -> dict:
    return {
        "N": rs.N,
        "leading": [rs.leading.real, rs.leading.imag],
        "roots": [[z.real, z.imag] for z in rs.roots],
        "roots_at_infinity": rs.roots_at_infinity,
    }


def write_roots(json_path, csv_path, rs: RootSet) -> None:
    Path(json_path).write_text(json.dumps(rootset_to_dict(rs), indent=2) + "\n")
    rows = [(k + 1, fmt_exact(z.real), fmt_exact(z.imag)) for k, z in enumerate(rs.roots)]
    _write_csv(csv_path, ("n", "re", "im"), rows,
               [f"N = {rs.N}", f"roots_at_infinity = {rs.roots_at_infinity}"])


def read_roots(path) -> RootSet:
    try:
        data = json.loads(Path(path).read_text())
        roots = np.array([complex(a, b) for a, b in data["roots"]], dtype=complex)
        lead = complex(*data.get("leading", [1.0, 0.0]))
        rs = RootSet(lead, roots, int(data.get("roots_at_infinity", 0)))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"not a valid roots file: {exc}", path) from None
    if "N" in data and data["N"] != rs.N:
        raise FormatError(f"declared N={data['N']} but file holds {rs.N} roots", path)
    return rs


# ---------------------------------------------------------------------------
# projector settings


def settings_rows(settings: Sequence[ProjectorSetting]) -> List[Tuple[str, str, str, str]]:
    return [(str(k + 1), fmt6(s.rho_deg), fmt6(s.theta_deg), fmt6(s.norm)) for k, s in enumerate(settings)]


def write_settings_csv(path, settings: Sequence[ProjectorSetting]) -> None:
    _write_csv(path, SETTINGS_FIELDS, settings_rows(settings),
               ["rho_deg: polarizer angle, theta_deg: birefringent phase, degrees"])


def write_settings_json(path, settings: Sequence[ProjectorSetting]) -> None:
    rows = [
        {"n": int(n), "rho_deg": float(r), "theta_deg": float(t), "norm": float(m)}
        for n, r, t, m in settings_rows(settings)
    ]
    Path(path).write_text(json.dumps({"N": len(rows), "settings": rows}, indent=2) + "\n")


def read_settings(path) -> List[ProjectorSetting]:
    """Read a settings table written as CSV or JSON."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        try:
            data = json.loads(path.read_text())
            items = data["settings"] if isinstance(data, dict) else data
            return [ProjectorSetting(float(d["theta_deg"]), float(d["rho_deg"]), float(d.get("norm", 1.0)))
                    for d in items]
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise FormatError(f"not a valid settings file: {exc}", path) from None
    header, rows = _read_table(path, ("rho_deg", "theta_deg"))
    rho = _column(path, header, rows, "rho_deg")
    theta = _column(path, header, rows, "theta_deg")
    norm = _column(path, header, rows, "norm") if "norm" in header else [1.0] * len(rho)
    return [ProjectorSetting(t, r, m) for t, r, m in zip(theta, rho, norm)]


# ---------------------------------------------------------------------------
# patterns


def write_pattern(path, pattern: Pattern, extra: Optional[Dict[str, np.ndarray]] = None) -> None:
    header = ["phi_rad", "value"]
    cols = [pattern.grid.phis, pattern.values]
    if pattern.sigma is not None:
        header.append("sigma")
        cols.append(pattern.sigma)
    if pattern.phi_actual is not None:
        header.append("phi_actual_rad")
        cols.append(pattern.phi_actual)
    if pattern.zero_count is not None:
        header.append("zero_count")
        cols.append(pattern.zero_count.astype(int))
    for name, arr in (extra or {}).items():
        header.append(name)
        cols.append(np.asarray(arr))
    rows = []
    for vals in zip(*cols):
        rows.append([str(v) if isinstance(v, (int, np.integer)) else fmt_exact(v) for v in vals])
    comments = ["phi in radians"]
    if pattern.log10_scale:
        comments.append(f"log10_scale = {fmt_exact(pattern.log10_scale)}")
    _write_csv(path, header, rows, comments)


def read_pattern(path) -> Pattern:
    header, rows = _read_table(path, ("phi_rad", "value"))
    phi = _column(path, header, rows, "phi_rad")
    values = _column(path, header, rows, "value")
    sigma = _column(path, header, rows, "sigma") if "sigma" in header else None
    actual = _column(path, header, rows, "phi_actual_rad") if "phi_actual_rad" in header else None
    zero = _column(path, header, rows, "zero_count", int) if "zero_count" in header else None
    try:
        scale = float(_comments(path).get("log10_scale", 0.0))
    except ValueError:
        raise FormatError("bad log10_scale comment", path) from None
    try:
        return Pattern(PhaseGrid(phi), np.array(values), sigma=sigma, log10_scale=scale,
                       phi_actual=actual, zero_count=zero)
    except InvalidInputError as exc:
        raise FormatError(str(exc), path) from None


# ---------------------------------------------------------------------------
# counts


def write_counts(path, records: Sequence[CountRecord]) -> None:
    rows = [(r.projector_index, fmt_exact(r.phi_requested), fmt_exact(r.phi_actual), r.counts) for r in records]
    _write_csv(path, COUNTS_FIELDS, rows)


def read_counts(path) -> List[CountRecord]:
    header, rows = _read_table(path, COUNTS_FIELDS)
    idx = _column(path, header, rows, "projector_index", int)
    req = _column(path, header, rows, "phi_requested_rad")
    act = _column(path, header, rows, "phi_actual_rad")
    cnt = _column(path, header, rows, "counts", int)
    for (ln, _), c in zip(rows, cnt):
        if c < 0:
            raise FormatError("counts must be non-negative", path, ln, header.index("counts") + 1)
    return [CountRecord(*t) for t in zip(idx, req, act, cnt)]


def is_counts_file(path) -> bool:
    rows = _read_rows(path)
    return bool(rows) and all(c in rows[0][1] for c in COUNTS_FIELDS)


# ---------------------------------------------------------------------------
# JSON documents


def read_noise_config(path) -> NoiseConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise FormatError(f"cannot read file: {exc.strerror or exc}", path) from None
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, path, exc.lineno, exc.colno) from None
    if not isinstance(data, dict):
        raise FormatError("noise config must be a JSON object", path)
    return NoiseConfig.from_dict(data)


def canonical_json(data) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), allow_nan=True)


def config_digest(data) -> str:
    """SHA-256 of the canonical JSON form; independent of key order."""
    return hashlib.sha256(canonical_json(data).encode()).hexdigest()


def write_json(path, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2, allow_nan=True) + "\n")
