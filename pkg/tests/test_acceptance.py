"""Acceptance criteria, each checked at its stated tolerance.

Run with pytest (a PASS/FAIL line per criterion is printed in the terminal
summary) or directly: ``python tests/test_acceptance.py``.
"""

import filecmp
import json
import math
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

from jjha import (
    ChargeGrid,
    JunctionParams,
    SpinSector,
    eigh,
    energy_functional,
    ha_parameters,
    ha_spectrum,
    junction_spectrum,
    optimize_parameters,
    residuals,
)
from jjha.analysis import compare_spectra, deviation_threshold, fidelity_report, refined_splitting
from jjha.bands import _solve_points, band_sweep, bandwidth, hf_integrand
from jjha.cli import main as cli_main

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # direct execution
    ACCEPTANCE_LINES = []


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def criterion_1():
    e0 = ha_spectrum(JunctionParams(100, 0), 0).energy
    e60 = ha_spectrum(JunctionParams(100, 60), 0).energy
    ok = abs(e0 - -92.928932) <= 1e-6 and abs(e60 - -97.508934) <= 1e-6
    return ok, f"E0(T'=0)={e0:.7f}, E0(T'=60)={e60:.7f}"


def criterion_2():
    ok, parts = True, []
    for tp in (0.0, 60.0):
        p = JunctionParams(100, tp)
        start = time.perf_counter()
        spec = junction_spectrum(p, ChargeGrid(40))
        table = compare_spectra(spec, p, 8)
        threshold = deviation_threshold(table)
        elapsed = time.perf_counter() - start
        devs = [r.abs_dev for r in table.rows]
        low = max(devs[:4])
        # narrower reading: the four lowest individual levels, i.e. doublets m = 0, 1
        narrow = max(devs[:2])
        grows = all(b > a for a, b in zip(devs, devs[1:]))
        near_zero = threshold is not None and abs(threshold.energy) <= 2 * table.omega
        ok &= low <= 0.3 and grows and near_zero and elapsed <= 1.0
        e_star = "none" if threshold is None else f"{threshold.energy:.3f}"
        parts.append(
            f"T'={tp:g}: max|dev| m<4 {low:.4f}, m<2 {narrow:.4f} (tol 0.3), grows={grows}, "
            f"E*={e_star} vs 2w={2 * table.omega:.2f}, {elapsed:.2f}s"
        )
    return ok, "; ".join(parts)


def criterion_3():
    p, g = JunctionParams(100, 60), ChargeGrid(40)
    plus = junction_spectrum(p, g, SpinSector.PLUS).eigenvalues
    minus = junction_spectrum(p, g, SpinSector.MINUS).eigenvalues
    diff = float(np.max(np.abs(plus - minus)))
    return diff <= 1e-10, f"max |E+ - E-| = {diff:.2e}"


def criterion_4():
    ok, parts = True, []
    h = 1e-6
    for tp in (0.0, 60.0):
        p = JunctionParams(100, tp)
        closed = ha_parameters(p)
        opt = optimize_parameters(p)
        rel_a = abs(opt.alpha / closed.alpha - 1)
        # beta vanishes at T' = 0, so compare in absolute terms there
        rel_b = abs(opt.beta / closed.beta - 1) if closed.beta else abs(opt.beta)
        grad = max(
            abs(energy_functional(p, 0, opt.alpha + da, opt.beta + db) - energy_functional(p, 0, opt.alpha - da, opt.beta - db)) / (2 * h)
            for da, db in ((h, 0), (0, h))
        )
        ok &= rel_a <= 0.01 and rel_b <= 0.01 and grad <= 1e-6
        parts.append(f"T'={tp:g}: d_alpha {rel_a:.2%}, d_beta {rel_b:.2%}, |grad| {grad:.1e}")
    return ok, "; ".join(parts)


def criterion_5():
    with tempfile.TemporaryDirectory() as tmp:
        code = cli_main(["bands", "--t", "100", "--t-prime", "0", "--k-count", "17", "--m-count", "2", "--out", tmp])
        report = json.loads((Path(tmp) / "bands.json").read_text())
    estimate = report["ha_estimate"]
    width = report["levels"][0]["width"]
    b = band_sweep(JunctionParams(100, 0), 40, 1, k_count=17)
    direct = bandwidth(b, 0)
    p, charges, k, step = JunctionParams(2, 0), ChargeGrid(10).charges, 0.2, 1e-5
    s = _solve_points(p, charges, k, 1)
    up = _solve_points(p, charges, k + step, 1).eigenvalues
    down = _solve_points(p, charges, k - step, 1).eigenvalues
    hf_err = max(
        abs((up[j] - down[j]) / (2 * step) - hf_integrand(s.charge_vectors[:, j], charges + k)) for j in range(6)
    )
    ok = code == 0 and estimate == 0.25 and width < 1e-6 and direct < 1e-6 and hf_err <= 1e-4
    return ok, f"HA integral {estimate!r}, lowest width {width:.1e} (in bands.json), HF identity err {hf_err:.1e}"


def criterion_6():
    ok, parts = True, []
    for tp in (60.0, 0.0):
        p, g = JunctionParams(100, tp), ChargeGrid(40)
        rep = fidelity_report(p, junction_spectrum(p, g), g, 3)
        if tp:
            vals = rep.fidelity
            label = "span fidelity"
        else:
            vals = tuple(v for ov in rep.state_overlaps for v in ov)
            label = "1-D overlaps"
        ok &= min(vals) >= 0.99
        parts.append(f"T'={tp:g} {label} min {min(vals):.5f} ({', '.join(f'{v:.5f}' for v in vals)})")
    return ok, "; ".join(parts)


def criterion_7():
    split_100 = refined_splitting(JunctionParams(100, 60), 40)
    ladder = [refined_splitting(JunctionParams(t, 0.6 * t), math.ceil(4 * math.sqrt(t))) for t in (25, 50)] + [split_100]
    monotone = all(b < a for a, b in zip(ladder, ladder[1:]))
    ok = split_100 < 1e-6 and monotone
    return ok, f"splitting(100, 60) = {split_100:.3e}; T=25,50,100: " + ", ".join(f"{x:.3e}" for x in ladder)


def criterion_8():
    rng = np.random.default_rng(20240601)
    start = time.perf_counter()
    worst = 0.0
    for d in (2, 5, 10, 50, 100, 250, 500):
        a = rng.standard_normal((d, d))
        a = a + a.T
        diag = residuals(a, eigh(a, check=False))
        worst = max(worst, max(diag.max_residual, diag.max_orthonormality_defect) / diag.matrix_norm)
    elapsed = time.perf_counter() - start
    hand = eigh(np.array([[0.25, 2.0, 1.0], [2.0, 0.0, 2.0], [1.0, 2.0, 0.25]])).eigenvalues
    hand_err = float(np.max(np.abs(hand - [-2.27166, -0.75, 3.52166])))
    ok = worst <= 1e-10 and hand_err <= 1e-5 and elapsed <= 10
    return ok, f"worst defect/||M|| {worst:.1e} up to d=500 in {elapsed:.1f}s, 3x3 err {hand_err:.1e}"


def criterion_9():
    p = JunctionParams(100, 60)
    e40 = junction_spectrum(p, ChargeGrid(40)).eigenvalues[:8]
    e80 = junction_spectrum(p, ChargeGrid(80)).eigenvalues[:8]
    drift = float(np.max(np.abs(e80 - e40)))
    return drift < 1e-10, f"max shift of lowest 8 levels {drift:.1e}"


def criterion_10():
    with tempfile.TemporaryDirectory() as tmp:
        dirs = [Path(tmp) / "a", Path(tmp) / "b"]
        cfg = Path(tmp) / "run.cfg"
        cfg.write_text("t = 100\nt_prime = 60\nm_count = 4\nk_count = 9\n")
        codes = []
        for out in dirs:
            for command in ("spectrum", "wavefunctions", "bands", "compare"):
                codes.append(cli_main([command, "--config", str(cfg), "--out", str(out)]))
        names = sorted(f.name for f in dirs[0].iterdir())
        match, mismatch, errors = filecmp.cmpfiles(dirs[0], dirs[1], names, shallow=False)
    ok = all(c == 0 for c in codes) and not mismatch and not errors and len(match) == 7
    return ok, f"{len(match)} identical artifacts ({', '.join(match)}), mismatched {mismatch or 'none'}"


CRITERIA = [
    (1, "HA closed forms", criterion_1),
    (2, "exact spectrum vs HA", criterion_2),
    (3, "sector isospectrality", criterion_3),
    (4, "variational stationarity", criterion_4),
    (5, "band width dichotomy", criterion_5),
    (6, "wavefunction fidelity", criterion_6),
    (7, "tunnel splitting", criterion_7),
    (8, "eigensolver soundness", criterion_8),
    (9, "truncation convergence", criterion_9),
    (10, "CLI determinism", criterion_10),
]


@pytest.mark.parametrize("number, title, check", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_criterion(number, title, check):
    ok, detail = check()
    assert record(number, title, ok, detail), detail


if __name__ == "__main__":
    results = [record(n, title, *check()) for n, title, check in CRITERIA]
    print(f"{sum(results)}/{len(results)} criteria pass")
