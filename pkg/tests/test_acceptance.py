"""End-to-end acceptance checks at the reference operating point.

One test per criterion; each prints a single [PASS]/[FAIL] line (visible
with ``pytest -s`` or in the failure report).  The Monte Carlo criteria
share one 2000-trial sweep fixture so the whole file stays desk-scale.
"""

import math
import time

import numpy as np
import pytest

from vrmimo import (ExperimentConfig, Normalization, Placement, PowerAllocation,
                    ScenarioSpec, cb_det_equiv, cb_precoder, closed_form_sinr,
                    epsilon_scaling_study, exponential_correlation,
                    nonnegativity_certificate, run_single, run_sweep_d,
                    scenario_covariances, sinr_cb_closed, sinr_general,
                    sinr_zf_closed, zf_det_equiv_approx, zf_precoder)
from vrmimo.asymptotics import diagonal_approx_report
from vrmimo.experiment import FLAG_SINGULAR, mc_cell_pair
from vrmimo.sampling import RngStream, _complex_unit_noise, draw_noise_block

SEED = 12345
RHO = 10.0
D_GRID = tuple(range(2, 61, 2))

TM = Normalization.TRACE_M
TD = Normalization.TRACE_D


def _report(name, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f" -- {detail}"
    print(line)
    return ok


@pytest.fixture(scope="module")
def sweep_rows():
    cfg = ExperimentConfig(trials=2000, seed=SEED)
    return run_sweep_d(cfg, write=False)


def _cell(rows, **match):
    hits = [r for r in rows
            if all(getattr(r, key) == val for key, val in match.items())]
    assert len(hits) == 1, f"expected one row for {match}, got {len(hits)}"
    return hits[0]


# ---------------------------------------------------------------------------
# 1. stationary baselines


def test_stationary_baselines():
    t0 = time.monotonic()
    rows = run_single(ExperimentConfig(trials=2000, seed=SEED,
                                       placement="stationary",
                                       normalization="trace-m"), write=False)
    elapsed = time.monotonic() - t0
    cf_cb = 10 * math.log10(closed_form_sinr("cb", Placement.STATIONARY, TM,
                                             60, 30, 60, RHO).value)
    cf_zf = 10 * math.log10(closed_form_sinr("zf", Placement.STATIONARY, TM,
                                             60, 30, 60, RHO).value)
    mc_cb = _cell(rows, precoder="cb", estimator="monte-carlo").sinr_db
    mc_zf = _cell(rows, precoder="zf", estimator="monte-carlo").sinr_db
    gap_cb, gap_zf = abs(mc_cb - cf_cb), abs(mc_zf - cf_zf)
    ok = (abs(cf_cb - 2.73) <= 0.005 and abs(cf_zf - 10.14) <= 0.005
          and gap_cb <= 0.5 and gap_zf <= 0.5 and elapsed < 60.0)
    _report("stationary baselines",
            ok, f"CB {cf_cb:.2f} dB (MC gap {gap_cb:.3f}), "
                f"ZF {cf_zf:.2f} dB (MC gap {gap_zf:.3f}), {elapsed:.1f} s")
    assert abs(cf_cb - 2.73) <= 0.005 and abs(cf_zf - 10.14) <= 0.005
    assert gap_cb <= 0.5, f"CB Monte Carlo off by {gap_cb:.3f} dB"
    assert gap_zf <= 0.5, f"ZF Monte Carlo off by {gap_zf:.3f} dB"
    assert elapsed < 60.0


# ---------------------------------------------------------------------------
# 2. closed forms vs deterministic equivalents (oracle equivalence)


def test_closed_forms_equal_det_equivalents():
    worst_rel = 0.0
    checked = 0
    for (M, K, D) in ((60, 30, 30), (60, 30, 4), (60, 2, 30)):
        power = PowerAllocation.equal(1.0, K)
        for norm in (TM, TD):
            for placement in (Placement.WORST_OVERLAP, Placement.BEST_TILING):
                covs = scenario_covariances(ScenarioSpec(placement, norm, M, K, D))
                de = {"cb": cb_det_equiv(covs, power, RHO),
                      "zf": zf_det_equiv_approx(covs, power, RHO)}
                for precoder in ("cb", "zf"):
                    cf = closed_form_sinr(precoder, placement, norm, M, K, D, RHO)
                    rep = de[precoder]
                    if precoder == "zf" and not cf.feasible:
                        # both routes must agree the cell is out of regime
                        assert not rep.valid, (M, K, D, norm, placement)
                        continue
                    assert rep.valid
                    rel = float(np.max(np.abs(rep.gamma_bar - cf.value))) / abs(cf.value)
                    worst_rel = max(worst_rel, rel)
                    checked += 1
    ok = worst_rel <= 1e-9
    _report("closed forms equal deterministic equivalents",
            ok, f"{checked} cells, worst relative error {worst_rel:.2e}")
    assert ok, f"worst relative error {worst_rel:.2e} exceeds 1e-9"


# ---------------------------------------------------------------------------
# 3. region-size sweep, trace-m normalization


def test_sweep_trace_m_curves(sweep_rows):
    rows = [r for r in sweep_rows if r.normalization == "trace-m"]
    clauses = []

    gaps = {}
    for D in D_GRID:
        mc = _cell(rows, scenario="worst", precoder="cb",
                   estimator="monte-carlo", D=D)
        cf = _cell(rows, scenario="worst", precoder="cb",
                   estimator="closed-form", D=D)
        gaps[D] = abs(mc.sinr_db - cf.sinr_db)
    worst_gap = max(gaps.values())
    clauses.append(("worst-case CB within 0.75 dB of closed form",
                    worst_gap <= 0.75, f"max gap {worst_gap:.3f} dB"))

    gaps = {}
    for D in D_GRID:
        mc = _cell(rows, scenario="best", precoder="cb",
                   estimator="monte-carlo", D=D)
        if mc.sinr_db is None:
            continue  # tiling infeasible at this D
        cf = _cell(rows, scenario="best", precoder="cb",
                   estimator="closed-form", D=D)
        gaps[D] = abs(mc.sinr_db - cf.sinr_db)
    worst_gap = max(gaps.values())
    offenders = {D: round(g, 2) for D, g in gaps.items() if g > 0.75}
    clauses.append(("best-case CB within 0.75 dB of closed form",
                    worst_gap <= 0.75,
                    f"max gap {worst_gap:.3f} dB"
                    + (f", over tolerance at D={offenders}" if offenders else "")))

    gaps = {}
    for D in (d for d in D_GRID if d >= 40):
        mc = _cell(rows, scenario="worst", precoder="zf",
                   estimator="monte-carlo", D=D)
        cf = _cell(rows, scenario="worst", precoder="zf",
                   estimator="closed-form", D=D)
        gaps[D] = abs(mc.sinr_db - cf.sinr_db)
    worst_gap = max(gaps.values())
    clauses.append(("worst-case ZF within 1.5 dB of closed form for D >= 40",
                    worst_gap <= 1.5, f"max gap {worst_gap:.3f} dB"))

    singular = all(
        _cell(rows, scenario="worst", precoder="zf",
              estimator="monte-carlo", D=D).flags == FLAG_SINGULAR
        for D in D_GRID if D < 30)
    starts = _cell(rows, scenario="worst", precoder="zf",
                   estimator="monte-carlo", D=30).sinr_db is not None
    clauses.append(("worst-case ZF curve starts at D=30 (singular below)",
                    singular and starts, ""))

    stat_cf = _cell(rows, scenario="stationary", precoder="cb",
                    estimator="closed-form").sinr_db
    worst_cf_d2 = _cell(rows, scenario="worst", precoder="cb",
                        estimator="closed-form", D=2).sinr_db
    loss = stat_cf - worst_cf_d2
    clauses.append(("closed-form CB worst-case loss at D=2 >= 13 dB",
                    loss >= 13.0, f"loss {loss:.1f} dB"))

    failed = []
    for name, ok, detail in clauses:
        _report(f"trace-m sweep: {name}", ok, detail)
        if not ok:
            failed.append(f"{name} ({detail})")
    assert not failed, "; ".join(failed)


# ---------------------------------------------------------------------------
# 4. region-size sweep, trace-d normalization


def test_sweep_trace_d_never_beats_stationary(sweep_rows):
    rows = [r for r in sweep_rows if r.normalization == "trace-d"]
    violations = []
    for precoder in ("cb", "zf"):
        for estimator in ("monte-carlo", "det-equiv", "closed-form"):
            stat = _cell(rows, scenario="stationary", precoder=precoder,
                         estimator=estimator).sinr_db
            for r in rows:
                if (r.scenario == "stationary" or r.precoder != precoder
                        or r.estimator != estimator or r.sinr_db is None):
                    continue
                if r.sinr_db > stat + 1e-9:
                    violations.append((r.scenario, precoder, estimator, r.D))
    ok_order = not violations
    _report("trace-d: non-stationary never beats stationary", ok_order,
            f"{len(violations)} violations" if violations else "all cells")

    stat_cb = _cell(rows, scenario="stationary", precoder="cb",
                    estimator="monte-carlo").sinr_db
    cb_d2 = _cell(rows, scenario="worst", precoder="cb",
                  estimator="monte-carlo", D=2).sinr_db
    cb_loss = stat_cb - cb_d2
    stat_zf = _cell(rows, scenario="stationary", precoder="zf",
                    estimator="monte-carlo").sinr_db
    zf_d30 = _cell(rows, scenario="worst", precoder="zf",
                   estimator="monte-carlo", D=30).sinr_db
    zf_loss = stat_zf - zf_d30
    ok_loss = cb_loss >= 13.0 and zf_loss >= 13.0
    _report("trace-d: worst-case loss at smallest feasible D >= 13 dB", ok_loss,
            f"CB {cb_loss:.1f} dB at D=2, ZF {zf_loss:.1f} dB at D=30")
    assert ok_order, violations[:5]
    assert ok_loss


# ---------------------------------------------------------------------------
# 5. route-equivalence property suite


def test_route_equivalence_random_instances():
    t0 = time.monotonic()
    rng = np.random.default_rng(SEED)
    worst_cb = worst_zf = worst_pow = worst_orth = 0.0
    for _ in range(1000):
        M = int(rng.integers(2, 33))
        K = int(rng.integers(1, min(M, 16) + 1))
        H = (rng.standard_normal((M, K)) + 1j * rng.standard_normal((M, K))) \
            / np.sqrt(2)
        P = float(rng.uniform(0.5, 2.0))
        p = rng.uniform(0.05, 1.0, size=K)
        power = PowerAllocation(p * P / p.sum())
        rho = 10.0 ** (rng.uniform(-5.0, 20.0) / 10.0)
        noise_power = P / rho

        cb = cb_precoder(H, power, P)
        zf = zf_precoder(H, power, P)
        for prec in (cb, zf):
            used = float(np.sum(power.p * np.sum(np.abs(prec.G) ** 2, axis=0)))
            worst_pow = max(worst_pow, abs(used - P) / P)
        gen_cb = sinr_general(H, cb, power, noise_power).gamma
        gen_zf = sinr_general(H, zf, power, noise_power).gamma
        closed_cb = sinr_cb_closed(H, power, rho).gamma
        closed_zf = sinr_zf_closed(H, power, rho).gamma
        worst_cb = max(worst_cb, float(np.max(np.abs(gen_cb - closed_cb) / closed_cb)))
        worst_zf = max(worst_zf, float(np.max(np.abs(gen_zf - closed_zf) / closed_zf)))
        A = H.conj().T @ zf.G
        off = np.abs(A - np.diag(np.diag(A)))
        if K > 1:
            worst_orth = max(worst_orth,
                             float(off.max() / np.min(np.abs(np.diag(A)))))
    elapsed = time.monotonic() - t0
    ok = (worst_cb <= 1e-8 and worst_zf <= 1e-8 and worst_pow <= 1e-10
          and worst_orth <= 1e-8 and elapsed < 60.0)
    _report("route equivalence on 1000 random instances", ok,
            f"CB {worst_cb:.1e}, ZF {worst_zf:.1e}, power {worst_pow:.1e}, "
            f"orthogonality {worst_orth:.1e}, {elapsed:.1f} s")
    assert worst_cb <= 1e-8 and worst_zf <= 1e-8
    assert worst_pow <= 1e-10
    assert worst_orth <= 1e-8
    assert elapsed < 60.0


# ---------------------------------------------------------------------------
# 6. error-scaling of the Gram-diagonal approximation


def test_epsilon_scaling_slope_and_k_dependence():
    t0 = time.monotonic()
    study = epsilon_scaling_study(8, (64, 128, 256, 512, 1024), 200,
                                  master_seed=SEED)
    acc = 0.0
    for t in range(200):
        H = np.empty((512, 16), dtype=complex)
        for k in range(16):
            H[:, k] = np.sqrt(512) * _complex_unit_noise(
                RngStream(SEED, t, k).generator(), 512)
        acc += diagonal_approx_report(H).epsilon.mean()
    ratio = (acc / 200) / study.mean_epsilon[study.M_grid.index(512)]
    elapsed = time.monotonic() - t0
    ok = -0.65 <= study.slope <= -0.35 and 1.5 <= ratio <= 2.5 and elapsed < 300
    _report("error-scaling study", ok,
            f"slope {study.slope:.3f}, K=16/K=8 ratio {ratio:.2f}, {elapsed:.0f} s")
    assert -0.65 <= study.slope <= -0.35, study.slope
    assert 1.5 <= ratio <= 2.5, ratio
    assert elapsed < 300.0


# ---------------------------------------------------------------------------
# 7. convergence of the ZF deterministic equivalent


def test_zf_det_equiv_convergence_in_m():
    K, T = 8, 500
    power = PowerAllocation.equal(1.0, K)
    gaps = []
    for M in (64, 256, 1024):
        covs = scenario_covariances(
            ScenarioSpec(Placement.STATIONARY, TM, M, K, M))
        Z = draw_noise_block(SEED, T, K, M)
        _, zf = mc_cell_pair(Z, covs, power, RHO)
        de_db = 10 * math.log10(
            float(zf_det_equiv_approx(covs, power, RHO).gamma_bar.mean()))
        gaps.append(abs(zf.mean_db - de_db))
    ok = gaps[0] > gaps[1] > gaps[2]
    _report("ZF deterministic equivalent converges in M", ok,
            "gaps " + " > ".join(f"{g:.4f}" for g in gaps) + " dB")
    assert ok, gaps


# ---------------------------------------------------------------------------
# 8. non-negativity certificate


def test_nonnegativity_certificate():
    rng = np.random.default_rng(2025)
    failures = 0
    for _ in range(100):
        K = int(rng.integers(2, 13))
        M = 4 * K + int(rng.integers(0, 2 * K + 1))
        thetas = [exponential_correlation(M, float(rng.uniform(0.0, 0.7))).R
                  for _ in range(K)]
        if not nonnegativity_certificate(thetas).holds:
            failures += 1
    covs = scenario_covariances(
        ScenarioSpec(Placement.WORST_OVERLAP, TM, 60, 30, 20))
    cert = nonnegativity_certificate(covs)
    frozen = np.allclose(cert.t, -27.0, rtol=1e-12)
    ok = failures == 0 and not cert.holds and frozen
    _report("non-negativity certificate", ok,
            f"{100 - failures}/100 random scenarios hold; "
            f"worst-case (60,30,20) t={cert.t[0]:.0f} correctly rejected")
    assert failures == 0
    assert not cert.holds and frozen
