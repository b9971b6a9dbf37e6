"""Acceptance criteria, one test each, at fixed tolerances.

Every test reports a PASS/FAIL line (collected in the terminal summary)
before asserting. The ensemble simulations are shared through module-scoped
fixtures; a full run takes roughly a minute.
"""

import math
import time

import mpmath
import numpy as np
import pytest

from cordic_lms.channel import ExperimentConfig, channel_taps_from_factors, gen_symbols, make_source, run_ensemble
from cordic_lms.cli import main
from cordic_lms.cordic import CordicMode, build_angle_table, elementary_angle, rotate_raw, sin_cos, sinh_cosh
from cordic_lms.filters import AlgorithmKind, CordicBackend, ExactBackend

from reference_angles import PRINTED_DEGREES, TYPO_ROW, TYPO_ROW_CORRECTED

SCALE = 2.0**48


def _timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def _db(v):
    return 10 * math.log10(v)


@pytest.fixture(scope="module")
def curves():
    """Default experiment ensembles, computed once: {name: (curve, seconds)}."""
    base = ExperimentConfig()
    configs = {
        "tlms_c32": base,
        "tlms_c16": base.with_(backend=CordicBackend(16)),
        "hlms_c32": base.with_(kind=AlgorithmKind.HLMS),
        "tlms_exact": base.with_(backend=ExactBackend()),
    }
    return {name: _timed(lambda c=c: run_ensemble(c)) for name, c in configs.items()}


def test_01_circular_accuracy(report):
    rng = np.random.default_rng(1)
    th = rng.uniform(-math.pi / 2, math.pi / 2, 10_000)
    ok = True
    details = []
    for M, tol in ((16, 1e-4), (32, 1e-7)):
        (s, c), secs = _timed(lambda: sin_cos(th, M, frac_bits=48))
        err = max(np.abs(s - np.sin(th)).max(), np.abs(c - np.cos(th)).max())
        passed = err <= tol and secs < 1.0
        ok &= passed
        details.append(f"M={M} max err {err:.3e} (<= {tol:g}), {secs:.3f}s")
    report("1 circular accuracy", ok, "; ".join(details))
    assert ok


def test_02_hyperbolic_accuracy(report):
    rng = np.random.default_rng(2)
    th = rng.uniform(-1.1, 1.1, 10_000)
    ok = True
    details = []
    for M, tol in ((16, 5e-4), (32, 1e-6)):
        (s, c), secs = _timed(lambda: sinh_cosh(th, M, "standard"))
        err = max(np.abs(s - np.sinh(th)).max(), np.abs(c - np.cosh(th)).max())
        passed = err <= tol and secs < 1.0
        ok &= passed
        details.append(f"M={M} max err {err:.3e} (<= {tol:g}), {secs:.3f}s")
    report("2 hyperbolic accuracy", ok, "; ".join(details))
    assert ok


def test_03_residual_bound(report):
    rng = np.random.default_rng(3)
    ok = True
    details = []
    for mode in (CordicMode.CIRCULAR, CordicMode.HYPERBOLIC):
        for M in (16, 32):
            t = build_angle_table(mode, M)
            z = rng.integers(-t.domain.raw, t.domain.raw, 10_000, endpoint=True)
            z = np.concatenate([z, [0, t.domain.raw, -t.domain.raw]])
            _, _, zm = rotate_raw(t, np.full_like(z, t.K.raw), np.zeros_like(z), z)
            frac = float(np.mean(np.abs(zm) <= t.alpha_raw[-1]))
            ok &= frac == 1.0
            details.append(f"{mode.name.lower()} M={M}: {frac:.0%}")
    report("3 residual |z_M| <= alpha_last", ok, ", ".join(details))
    assert ok


def test_04_norm_preservation(report):
    rng = np.random.default_rng(4)
    ok = True
    details = []
    for mode in (CordicMode.CIRCULAR, CordicMode.HYPERBOLIC):
        t = build_angle_table(mode, 32)
        x0 = rng.uniform(-1, 1, 10_000)
        y0 = rng.uniform(-1, 1, 10_000)
        z0 = rng.integers(-t.domain.raw, t.domain.raw, 10_000, endpoint=True)
        xr = np.rint(x0 * SCALE).astype(np.int64)
        yr = np.rint(y0 * SCALE).astype(np.int64)
        xm, ym, _ = rotate_raw(t, xr, yr, z0)
        k = t.K.raw / SCALE
        xf, yf = k * xm / SCALE, k * ym / SCALE
        x0q, y0q = xr / SCALE, yr / SCALE
        m = mode.m
        lhs = np.abs(xf**2 + m * yf**2 - (x0q**2 + m * y0q**2))
        rhs = 1e-6 * (x0q**2 + abs(m) * y0q**2)
        worst = float(np.max(lhs / rhs))
        ok &= worst <= 1.0
        details.append(f"{mode.name.lower()} worst ratio {worst:.2e}")
    report("4 norm preservation", ok, ", ".join(details))
    assert ok


def test_05_table_regeneration(report):
    t = build_angle_table(CordicMode.CIRCULAR, 32)
    worst = 0.0
    for i, text in enumerate(PRINTED_DEGREES):
        expected = TYPO_ROW_CORRECTED if i == TYPO_ROW else float(text)
        worst = max(worst, abs(math.degrees(t.alphas[i].raw / SCALE) - expected))
    ok = worst <= 1e-6
    report("5 angle table regeneration", ok, f"max deviation {worst:.2e} deg over 32 rows (row 2 vs atan(0.5))")
    assert ok


def test_06_angle_sequence_inequalities(report):
    bad = []
    with mpmath.workdps(60):
        for i in range(31):
            if not elementary_angle(CordicMode.CIRCULAR, i + 1, exact=True) > elementary_angle(CordicMode.CIRCULAR, i, exact=True) / 2:
                bad.append(("circular", i))
        for i in range(1, 32):
            if not elementary_angle(CordicMode.HYPERBOLIC, i + 1, exact=True) < elementary_angle(CordicMode.HYPERBOLIC, i, exact=True) / 2:
                bad.append(("hyperbolic", i))
    ok = not bad
    report("6 angle-sequence inequalities", ok, f"31+31 adjacent pairs checked, violations: {bad or 'none'}")
    assert ok


def test_07_channel_expansion(report):
    taps = channel_taps_from_factors([2.0, -0.5, 1.1, -0.6])
    err = max(abs(a - b) for a, b in zip(taps, [1, 2.0, -0.91, -1.49, 0.66]))
    ok = len(taps) == 5 and err <= 1e-12
    report("7 channel expansion", ok, f"taps {taps}, max err {err:.1e}")
    assert ok


def test_08_source_calibration(report):
    src = make_source(10.0)
    d_err = abs(src.spacing - math.sqrt(10 / 85))
    a = gen_symbols(src, 1_000_000, 2024)
    power = float(np.mean(a**2))
    ok = d_err <= 1e-12 and abs(power - 10) <= 0.2
    report("8 source calibration", ok, f"spacing err {d_err:.1e}, empirical power {power:.4f}")
    assert ok


@pytest.mark.slow
@pytest.mark.parametrize("name", ["tlms_c32", "tlms_c16"])
def test_09_tlms_convergence(curves, name, report):
    curve, secs = curves[name]
    head, tail = curve.band(0, 99), curve.band(4500, 4999)
    drop = _db(head) - _db(tail)
    ok = drop >= 10.0 and secs < 120
    report(
        f"9 TLMS convergence ({name})",
        ok,
        f"MSE 0-99 {_db(head):.2f} dB, 4500-4999 {_db(tail):.2f} dB, drop {drop:.2f} dB (need >= 10), {secs:.1f}s",
    )
    assert ok


@pytest.mark.slow
def test_10_hlms_vs_tlms(curves, report):
    h = curves["hlms_c32"][0].smoothed[2000]
    t = curves["tlms_c32"][0].smoothed[2000]
    ok = h <= t
    report("10 HLMS <= TLMS at n=2000", ok, f"HLMS {_db(h):.3f} dB vs TLMS {_db(t):.3f} dB")
    assert ok


@pytest.mark.slow
def test_11_backend_equivalence(curves, report):
    c = curves["tlms_c32"][0].band(4500, 4999)
    e = curves["tlms_exact"][0].band(4500, 4999)
    diff = abs(_db(c) - _db(e))
    ok = diff <= 0.5
    report("11 CORDIC(32) vs exact backend", ok, f"final MSE {_db(c):.4f} vs {_db(e):.4f} dB, diff {diff:.2e} dB")
    assert ok


@pytest.mark.slow
def test_12_cli_determinism(tmp_path, report, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    codes = [main(["--output", str(p)]) for p in (a, b)]
    capsys.readouterr()
    rows = a.read_text().count("\n") - 1
    ok = codes == [0, 0] and a.read_bytes() == b.read_bytes() and rows == 5000
    report("12 CLI determinism", ok, f"exit codes {codes}, {rows} rows, identical bytes: {a.read_bytes() == b.read_bytes()}")
    assert ok


def test_13_accuracy_monotonicity(report):
    grid = np.linspace(-math.pi / 2, math.pi / 2, 1000)
    errs = {}
    for M in (16, 32):
        s, c = sin_cos(grid, M)
        errs[M] = max(np.abs(s - np.sin(grid)).max(), np.abs(c - np.cos(grid)).max())
    ok = errs[32] < errs[16]
    report("13 accuracy monotonicity", ok, f"M=16 {errs[16]:.3e}, M=32 {errs[32]:.3e}")
    assert ok
