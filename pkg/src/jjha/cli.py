"""Command-line front end.

    python -m jjha spectrum --t 100 --t-prime 60 --out run/
    python -m jjha compare --config run.cfg --m-count 10

Every command accepts ``--config FILE`` (lines of ``key = value``) and
per-key flags; flags override the file.  Outputs are CSV with one header
line plus JSON sidecars, numbers written with 12 significant digits.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .analysis import (
    compare_spectra,
    deviation_threshold,
    doublet_splittings,
    trial_pair,
)
from .bands import band_gap, band_sweep, bandwidth, branch_width, ha_bandwidth_estimate
from .eigen import junction_spectrum
from .errors import InvalidParameterError, NumericalFailure
from .model import ChargeGrid, JunctionParams, SpinSector, default_n_max

COMMANDS = ("spectrum", "wavefunctions", "bands", "compare")


class ConfigError(InvalidParameterError):
    def __init__(self, key, message):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


@dataclass(frozen=True)
class RunConfig:
    t: float
    t_prime: float = 0.0
    n_max: float | None = None
    sector: int = 1
    k: float = 0.0
    k_count: int = 17
    m_count: int = 8
    frac: float = 0.25
    output_dir: str = "."
    command: str | None = None
    timing: bool = False

    @property
    def params(self) -> JunctionParams:
        return JunctionParams(self.t, self.t_prime)

    @property
    def grid(self) -> ChargeGrid:
        return ChargeGrid(self.n_max, self.k)


def _to_float(key, raw):
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise ConfigError(key, f"malformed number {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(key, f"value must be finite, got {raw!r}")
    return value


def _to_int(key, raw):
    value = _to_float(key, raw)
    if value != int(value):
        raise ConfigError(key, f"expected an integer, got {raw!r}")
    return int(value)


def _to_bool(key, raw):
    if isinstance(raw, bool):
        return raw
    text = str(raw).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(key, f"expected a boolean, got {raw!r}")


def _to_sector(key, raw):
    try:
        return int(SpinSector.parse(raw if not isinstance(raw, float) else int(raw)))
    except InvalidParameterError:
        raise ConfigError(key, f"sector must be +1 or -1, got {raw!r}") from None


def _to_command(key, raw):
    if raw not in COMMANDS:
        raise ConfigError(key, f"unknown command {raw!r}")
    return raw


CONVERTERS = {
    "t": _to_float,
    "t_prime": _to_float,
    "n_max": _to_float,
    "sector": _to_sector,
    "k": _to_float,
    "k_count": _to_int,
    "m_count": _to_int,
    "frac": _to_float,
    "output_dir": lambda key, raw: str(raw),
    "command": _to_command,
    "timing": _to_bool,
}


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; blank lines and ``#`` comments are ignored."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(None, f"{path}:{lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in line.split("=", 1))
        if key not in CONVERTERS:
            raise ConfigError(key, "unknown key")
        values[key] = raw
    return values


def parse_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Merge a config file with flag overrides and validate the result."""
    raw = read_config_file(path) if path is not None else {}
    for key, value in (overrides or {}).items():
        if key not in CONVERTERS:
            raise ConfigError(key, "unknown key")
        if value is not None:
            raw[key] = value
    values = {key: CONVERTERS[key](key, value) for key, value in raw.items()}
    if "t" not in values:
        raise ConfigError("t", "required key is missing")
    t, tp = values["t"], values.get("t_prime", 0.0)
    if t <= 0:
        raise ConfigError("t", f"must be positive, got {t!r}")
    if tp < 0:
        raise ConfigError("t_prime", f"must be non-negative, got {tp!r}")
    if tp >= 4 * t:
        raise ConfigError("t_prime", f"no harmonic well: t_prime={tp!r} >= 4 t = {4 * t!r}")
    values.setdefault("n_max", float(default_n_max(t)))
    cfg = RunConfig(**values)
    twice = 2 * cfg.n_max
    if not (cfg.n_max > 0 and twice == int(twice)):
        raise ConfigError("n_max", f"must be a positive multiple of 1/2, got {cfg.n_max!r}")
    if not 0 <= cfg.k < 0.5:
        raise ConfigError("k", f"must lie in [0, 1/2), got {cfg.k!r}")
    if cfg.k_count < 2:
        raise ConfigError("k_count", f"must be at least 2, got {cfg.k_count!r}")
    if cfg.m_count < 1:
        raise ConfigError("m_count", f"must be at least 1, got {cfg.m_count!r}")
    if cfg.frac < 0:
        raise ConfigError("frac", f"must be non-negative, got {cfg.frac!r}")
    if 2 * cfg.m_count + 2 > cfg.grid.dimension:
        raise ConfigError("n_max", f"grid of dimension {cfg.grid.dimension} is too small for m_count={cfg.m_count}")
    return cfg


def fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return f"{float(x):.12g}"


def _json_ready(obj):
    if isinstance(obj, dict):
        return {str(k): _json_ready(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_json_ready(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)) or obj is None or isinstance(obj, str):
        return obj if not isinstance(obj, np.bool_) else bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    value = float(obj)
    return float(f"{value:.12g}") if math.isfinite(value) else None


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(v if isinstance(v, str) else fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", newline="\n")


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_json_ready(obj), indent=2, sort_keys=True) + "\n", newline="\n")


def _config_record(cfg: RunConfig) -> dict:
    record = asdict(cfg)
    record.pop("output_dir")
    record.pop("timing")
    return record


def _out(cfg: RunConfig) -> Path:
    path = Path(cfg.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_spectrum(cfg: RunConfig) -> dict:
    start = time.perf_counter()
    p = cfg.params
    spec = junction_spectrum(p, cfg.grid, cfg.sector)
    table = compare_spectra(spec, p, cfg.m_count)
    rows = []
    for row in table.rows:
        for i in row.indices:
            rows.append((i, row.m, cfg.k, spec.eigenvalues[i], "numerical"))
    for row in table.rows:
        rows.append((row.m, row.m, cfg.k, row.e_ha, "variational"))
    out = _out(cfg)
    write_csv(out / "spectrum.csv", ["index", "m_pair", "k", "energy", "method"], rows)
    diag = spec.metadata["diagnostics"]
    summary = {
        "command": "spectrum",
        "config": _config_record(cfg),
        "dimension": cfg.grid.dimension,
        "omega": table.omega,
        "diagnostics": {
            "max_residual": diag.max_residual,
            "max_orthonormality_defect": diag.max_orthonormality_defect,
            "matrix_norm": diag.matrix_norm,
            "ql_sweeps": spec.metadata["sweeps"],
        },
        "doublet_splittings": [s for _, s in doublet_splittings(spec)[: cfg.m_count]],
    }
    if cfg.timing:
        summary["runtime_s"] = time.perf_counter() - start
    write_json(out / "summary.json", summary)
    return summary


def aligned_level_states(p, spec, g, m_count, sector=SpinSector.PLUS):
    """Per level: (numerical state, psi_L) with the numerical state chosen
    inside the level's eigenspace as the normalized projection of psi_L,
    phased so that <psi_L|num> is real and positive."""
    table = compare_spectra(spec, p, m_count)
    vectors = spec.charge_vectors
    states = []
    for row in table.rows:
        basis = vectors[:, list(row.indices)]
        psi_l = trial_pair(p, row.m, g, sector)[:, 0]
        num = basis @ (basis.conj().T @ psi_l)
        norm = np.linalg.norm(num)
        if norm == 0:
            num = basis[:, 0]
        else:
            num = num / norm
        overlap = np.vdot(psi_l, num)
        if abs(overlap) > 0:
            num = num * (abs(overlap) / overlap)
        states.append((row.m, num, psi_l))
    return states


def cmd_wavefunctions(cfg: RunConfig) -> list:
    if cfg.k != 0:
        raise ConfigError("k", "wavefunctions require k = 0")
    p, g = cfg.params, cfg.grid
    spec = junction_spectrum(p, g, cfg.sector)
    rows = []
    for m, num, var in aligned_level_states(p, spec, g, cfg.m_count, cfg.sector):
        pn, pv = np.abs(num) ** 2, np.abs(var) ** 2
        for n, a, b, c, d in zip(g.charges, num, pn, var, pv):
            rows.append((m, n, a.real, a.imag, b, c.real, c.imag, d))
    write_csv(
        _out(cfg) / "wavefunctions.csv",
        ["m", "n", "re_num", "im_num", "prob_num", "re_var", "im_var", "prob_var"],
        rows,
    )
    return rows


def cmd_bands(cfg: RunConfig) -> dict:
    p = cfg.params
    b = band_sweep(p, cfg.n_max, cfg.m_count, cfg.k_count, cfg.sector)
    branches = min(2 * cfg.m_count, b.branch_count)
    rows = [(j, k, b.bands[j, i]) for j in range(branches) for i, k in enumerate(b.k_grid)]
    out = _out(cfg)
    write_csv(out / "bands.csv", ["m", "k", "energy"], rows)
    levels = []
    for m in range(cfg.m_count):
        lo, hi = 2 * m, 2 * m + 1
        levels.append(
            {
                "m": m,
                "branches": [lo, hi],
                "width": bandwidth(b, m),
                "gap": band_gap(b, m),
                "branch_widths": [branch_width(b, lo), branch_width(b, hi)],
                "hf_integral": [b.hf_integral[lo], b.hf_integral[hi]],
                "min_tracking_overlap": [b.min_overlap[lo], b.min_overlap[hi]],
            }
        )
    report = {
        "command": "bands",
        "config": _config_record(cfg),
        "k_grid": b.k_grid,
        "ha_estimate": ha_bandwidth_estimate(p, 0, cfg.n_max),
        "levels": levels,
    }
    write_json(out / "bands.json", report)
    return report


def cmd_compare(cfg: RunConfig) -> dict:
    p = cfg.params
    spec = junction_spectrum(p, cfg.grid, cfg.sector)
    table = compare_spectra(spec, p, cfg.m_count)
    out = _out(cfg)
    write_csv(
        out / "deviations.csv",
        ["m", "e_num", "e_ha", "abs_dev", "rel_dev", "splitting"],
        [(r.m, r.e_num, r.e_ha, r.abs_dev, r.rel_dev, r.splitting) for r in table.rows],
    )
    thr = deviation_threshold(table, cfg.frac)
    report = {
        "frac": cfg.frac,
        "omega": table.omega,
        "threshold": None if thr is None else {"m": thr.m, "energy": thr.energy},
    }
    write_json(out / "threshold.json", report)
    return report


HANDLERS = {
    "spectrum": cmd_spectrum,
    "wavefunctions": cmd_wavefunctions,
    "bands": cmd_bands,
    "compare": cmd_compare,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="file of 'key = value' lines")
    common.add_argument("--t", dest="t", help="T = E_J / E_c")
    common.add_argument("--t-prime", dest="t_prime", help="T' = E_J' / E_c")
    common.add_argument("--n-max", dest="n_max", help="charge cutoff (multiple of 1/2)")
    common.add_argument("--sector", help="sigma_3 sector, +1 or -1")
    common.add_argument("--k", dest="k", help="Bloch offset in [0, 1/2)")
    common.add_argument("--k-count", dest="k_count", help="k points for bands")
    common.add_argument("--m-count", dest="m_count", help="number of levels")
    common.add_argument("--frac", help="deviation threshold in units of omega")
    common.add_argument("--out", dest="output_dir", help="output directory")
    common.add_argument("--timing", action="store_const", const="true", help="record runtime in summary.json")
    parser = argparse.ArgumentParser(prog="jjha", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _error_line(kind: str, message: str, key=None) -> str:
    return json.dumps({"error": kind, "key": key, "message": message}, sort_keys=True)


def main(argv=None) -> int:
    parser = build_parser()
    args = vars(parser.parse_args(argv))
    path = args.pop("config")
    try:
        cfg = parse_config(path, args)
        HANDLERS[cfg.command](cfg)
    except ConfigError as exc:
        print(_error_line("usage", str(exc), exc.key), file=sys.stderr)
        return 2
    except InvalidParameterError as exc:
        print(_error_line("usage", str(exc)), file=sys.stderr)
        return 2
    except NumericalFailure as exc:
        print(_error_line("numerical", str(exc), exc.index if isinstance(exc.index, (int, float)) else None), file=sys.stderr)
        return 3
    except OSError as exc:
        print(_error_line("io", str(exc)), file=sys.stderr)
        return 4
    return 0
