"""Sweep engine, CSV emission, validation suites and the error-scaling study.

The D-sweep evaluates, for each mask normalization, the stationary baseline
plus the worst-overlap and best-tiling placements on a grid of region sizes,
with up to four estimators per (scenario, precoder, D) cell: seeded Monte
Carlo, the deterministic equivalent, the closed form, and an optional
link-level symbol simulation.  All Monte Carlo cells of one sweep share the
same underlying CN(0, I/M) draws (common random numbers), so differences
between cells are never sampling noise on top of placement effects.

Cells that cannot produce a value carry a flag instead: ``singular`` when
zero-forcing is undefined (overlapping regions make H rank deficient) and
``infeasible`` when the best-case tiling does not exist for a D or when an
analytic expression lands at a nonpositive SINR.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import structural_rank

from .asymptotics import cb_det_equiv, epsilon_scaling_study, zf_det_equiv_approx
from .config import ExperimentConfig
from .errors import InvalidScenario, SingularChannel
from .model import Normalization, PowerAllocation, exponential_correlation
from .precoding import (cb_precoder, link_level_validate, sinr_cb_closed,
                        sinr_general, sinr_zf_closed, zf_precoder)
from .sampling import SYMBOL_STREAM, RngStream, draw_noise_block
from .scenarios import (Placement, ScenarioSpec, closed_form_sinr,
                        scenario_covariances)

CSV_HEADER = ("scenario,precoder,normalization,M,K,D,rho_db,estimator,"
              "sinr_db,sinr_db_stderr,trials,seed,flags")

FLAG_SINGULAR = "singular"
FLAG_INFEASIBLE = "infeasible"

# Gram eigenvalue ratio below which a structurally full-rank trial is still
# treated as singular.  Far below round-off noise on a healthy Gram matrix,
# so it only fires on genuinely broken inputs.
GRAM_EIG_RTOL = 1e-20

ESTIMATOR_ORDER = ("monte-carlo", "det-equiv", "closed-form", "link-level")
PRECODER_ORDER = ("cb", "zf")

LN10_OVER_10 = np.log(10.0) / 10.0


def to_db(x: float) -> float:
    return float(10.0 * np.log10(x))


@dataclass(frozen=True)
class ResultRow:
    """One CSV row of a sweep; empty value fields mean 'see flags'."""

    scenario: str
    precoder: str
    normalization: str
    M: int
    K: int
    D: int
    rho_db: float
    estimator: str
    sinr_db: float | None
    sinr_db_stderr: float | None
    trials: int | None
    seed: int | None
    flags: str = ""

    def to_csv(self) -> str:
        def fmt(x):
            if x is None:
                return ""
            if isinstance(x, float):
                return f"{x:.10g}"
            return str(x)

        return ",".join((self.scenario, self.precoder, self.normalization,
                         str(self.M), str(self.K), str(self.D), fmt(self.rho_db),
                         self.estimator, fmt(self.sinr_db), fmt(self.sinr_db_stderr),
                         fmt(self.trials), fmt(self.seed), self.flags))


def write_rows(rows, path: str):
    """Write header + rows; '-' writes to stdout."""
    text = "\n".join([CSV_HEADER] + [r.to_csv() for r in rows]) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# Monte Carlo cell evaluation


@dataclass(frozen=True)
class McCell:
    """Monte Carlo summary of one (scenario, precoder, D) cell."""

    mean_db: float | None
    stderr_db: float | None
    n_trials: int
    flags: str = ""


def _channel_block(Z: np.ndarray, covs) -> np.ndarray:
    """Channels for every (trial, user) as rows: out[t, k, :] = h_k(t).

    Identity-correlation covariances take a diagonal fast path that is
    bit-identical to multiplying by Theta^{1/2}; correlated profiles fall
    back to one matrix product per user against the cached square root.
    """
    T, K, M = Z.shape
    if all(c.corr.kind == "identity" for c in covs):
        d_stack = np.stack([c.mask.d for c in covs])          # (K, M)
        return np.sqrt(M) * np.sqrt(d_stack)[None, :, :] * Z
    H = np.empty_like(Z)
    for k, cov in enumerate(covs):
        # h = S z  =>  row-wise h^T = z^T S^T
        H[:, k, :] = np.sqrt(M) * (Z[:, k, :] @ cov.sqrt.T)
    return H


def _summarize(trial_means: np.ndarray, flags: str = "") -> McCell:
    """Mean over trials in linear scale, reported in dB with a delta-method
    standard error."""
    n = trial_means.size
    if n == 0:
        return McCell(mean_db=None, stderr_db=None, n_trials=0,
                      flags=flags or FLAG_SINGULAR)
    mean = float(trial_means.mean())
    if n > 1:
        se = float(trial_means.std(ddof=1) / np.sqrt(n))
        stderr_db = se / mean / LN10_OVER_10
    else:
        stderr_db = None
    return McCell(mean_db=to_db(mean), stderr_db=stderr_db, n_trials=n, flags=flags)


def mc_cell_pair(Z: np.ndarray, covs, power: PowerAllocation, rho: float):
    """CB and ZF Monte Carlo cells from a shared noise block.

    Works directly on the per-trial Gram matrices: the CB and ZF SINRs both
    reduce to functions of A = H^H H, so neither precoder is materialized.
    Returns (cb, zf) McCells; SINRs are averaged over users per trial and
    then over trials, all in linear scale.
    """
    T, K, M = Z.shape
    p = power.p
    H = _channel_block(Z, covs)
    A = np.einsum("tkm,tjm->tkj", H.conj(), H)
    diag = np.einsum("tkk->tk", A).real                       # ||h_k||^2
    cross = np.abs(A) ** 2
    # CB: p_k rho |A_kk|^2 / (rho sum_{j!=k} p_j |A_kj|^2 + trace(P A))
    interf = np.einsum("tkj,j->tk", cross, p) - p[None, :] * diag ** 2
    tr_pa = diag @ p                                          # (T,)
    cb_gamma = p[None, :] * rho * diag ** 2 / (rho * interf + tr_pa[:, None])
    cb = _summarize(cb_gamma.mean(axis=1))

    # ZF: p_k rho / trace(P (H^H H)^{-1}); only defined on full-rank trials.
    support = csr_matrix(np.stack([c.mask.d for c in covs]).T > 0)    # (M, K)
    if structural_rank(support) < K:
        zf = McCell(mean_db=None, stderr_db=None, n_trials=0, flags=FLAG_SINGULAR)
        return cb, zf
    w = np.linalg.eigvalsh(A)
    ok = (w[:, -1] > 0) & (w[:, 0] > GRAM_EIG_RTOL * w[:, -1])
    if not np.any(ok):
        zf = McCell(mean_db=None, stderr_db=None, n_trials=0, flags=FLAG_SINGULAR)
        return cb, zf
    inv_diag = np.einsum("tkk->tk", np.linalg.inv(A[ok])).real
    tr_p_ainv = inv_diag @ p                                  # (T_ok,)
    zf_gamma = p[None, :] * rho / tr_p_ainv[:, None]
    zf = _summarize(zf_gamma.mean(axis=1))
    return cb, zf


def _link_level_cell(Z: np.ndarray, covs, power: PowerAllocation, cfg: ExperimentConfig,
                     precoder: str) -> McCell:
    """Symbol-level SINR estimate over the first ll_trials realizations."""
    n = min(cfg.ll_trials, Z.shape[0])
    H = _channel_block(Z[:n], covs)
    noise_power = cfg.total_power / cfg.rho
    trial_means = []
    for t in range(n):
        Ht = H[t].T                                           # back to (M, K)
        try:
            prec = (cb_precoder if precoder == "cb" else zf_precoder)(
                Ht, power, cfg.total_power)
        except SingularChannel:
            continue
        rng = RngStream(cfg.seed, trial=t, user=0, kind=SYMBOL_STREAM).generator()
        est = link_level_validate(Ht, prec, power, noise_power, cfg.n_symbols, rng=rng)
        trial_means.append(float(est.gamma.mean()))
    return _summarize(np.asarray(trial_means))


# ---------------------------------------------------------------------------
# Sweep assembly


def _row_base(spec: ScenarioSpec, cfg: ExperimentConfig, estimator: str):
    return dict(scenario=spec.placement.value, normalization=spec.normalization.value,
                M=spec.M, K=spec.K, D=spec.D, rho_db=cfg.snr_db, estimator=estimator)


def _mc_rows(spec, cfg, cells) -> list:
    rows = []
    for precoder in PRECODER_ORDER:
        cell = cells[precoder]
        rows.append(ResultRow(precoder=precoder, sinr_db=cell.mean_db,
                              sinr_db_stderr=cell.stderr_db,
                              trials=cell.n_trials if cell.n_trials else None,
                              seed=cfg.seed, flags=cell.flags,
                              **_row_base(spec, cfg, "monte-carlo")))
    return rows


def _det_equiv_rows(spec, cfg, covs, power) -> list:
    rows = []
    reports = {"cb": cb_det_equiv(covs, power, cfg.rho),
               "zf": zf_det_equiv_approx(covs, power, cfg.rho)}
    for precoder in PRECODER_ORDER:
        rep = reports[precoder]
        if rep.valid:
            value = to_db(float(rep.gamma_bar.mean()))
            flags = ""
        else:
            value, flags = None, FLAG_INFEASIBLE
        rows.append(ResultRow(precoder=precoder, sinr_db=value, sinr_db_stderr=None,
                              trials=None, seed=cfg.seed, flags=flags,
                              **_row_base(spec, cfg, "det-equiv")))
    return rows


def _closed_form_rows(spec, cfg) -> list:
    rows = []
    for precoder in PRECODER_ORDER:
        try:
            cf = closed_form_sinr(precoder, spec.placement, spec.normalization,
                                  spec.M, spec.K, spec.D, cfg.rho)
        except InvalidScenario:
            cf = None
        if cf is None:
            value, flags = None, FLAG_INFEASIBLE
        elif not cf.feasible:
            value, flags = None, FLAG_INFEASIBLE
        else:
            value, flags = to_db(cf.value), ""
        rows.append(ResultRow(precoder=precoder, sinr_db=value, sinr_db_stderr=None,
                              trials=None, seed=cfg.seed, flags=flags,
                              **_row_base(spec, cfg, "closed-form")))
    return rows


def _link_level_rows(spec, cfg, Z, covs, power) -> list:
    rows = []
    for precoder in PRECODER_ORDER:
        cell = _link_level_cell(Z, covs, power, cfg, precoder)
        rows.append(ResultRow(precoder=precoder, sinr_db=cell.mean_db,
                              sinr_db_stderr=cell.stderr_db,
                              trials=cell.n_trials if cell.n_trials else None,
                              seed=cfg.seed, flags=cell.flags,
                              **_row_base(spec, cfg, "link-level")))
    return rows


def _infeasible_cell_rows(spec, cfg) -> list:
    """Placeholder rows for a best-tiling D that does not divide out."""
    rows = []
    for precoder in PRECODER_ORDER:
        for estimator in cfg.estimators:
            rows.append(ResultRow(precoder=precoder, sinr_db=None, sinr_db_stderr=None,
                                  trials=None, seed=cfg.seed, flags=FLAG_INFEASIBLE,
                                  **_row_base(spec, cfg, estimator)))
    # keep estimator-major order consistent with evaluated cells
    rows.sort(key=lambda r: (ESTIMATOR_ORDER.index(r.estimator),
                             PRECODER_ORDER.index(r.precoder)))
    return rows


def _cell_rows(spec: ScenarioSpec, cfg: ExperimentConfig, Z, corr, power) -> list:
    covs = scenario_covariances(spec, corr=corr, seed=cfg.seed)
    rows = []
    for estimator in ESTIMATOR_ORDER:
        if estimator not in cfg.estimators:
            continue
        if estimator == "monte-carlo":
            cb, zf = mc_cell_pair(Z, covs, power, cfg.rho)
            rows.extend(_mc_rows(spec, cfg, {"cb": cb, "zf": zf}))
        elif estimator == "det-equiv":
            rows.extend(_det_equiv_rows(spec, cfg, covs, power))
        elif estimator == "closed-form":
            if spec.placement is not Placement.RANDOM_BLOCKS:
                rows.extend(_closed_form_rows(spec, cfg))
        else:
            rows.extend(_link_level_rows(spec, cfg, Z, covs, power))
    return rows


def run_sweep_d(cfg: ExperimentConfig, write: bool = True) -> list:
    """Sweep the region size D for worst/best placements plus the stationary
    baseline, for each requested normalization.  Returns the rows; writes
    them to cfg.out unless `write` is False.

    Row order is (normalization, scenario, D, estimator, precoder) with
    scenarios ordered stationary, worst, best -- fully deterministic, so a
    rerun of the same config reproduces the file byte for byte.
    """
    cfg.validate()
    corr = None if cfg.corr_r == 0.0 else exponential_correlation(cfg.m, cfg.corr_r)
    power = PowerAllocation.equal(cfg.total_power, cfg.k)
    Z = draw_noise_block(cfg.seed, cfg.trials, cfg.k, cfg.m)
    rows = []
    for norm in cfg.normalizations():
        stationary = ScenarioSpec(Placement.STATIONARY, norm, cfg.m, cfg.k, cfg.m)
        rows.extend(_cell_rows(stationary, cfg, Z, corr, power))
        for placement in (Placement.WORST_OVERLAP, Placement.BEST_TILING):
            for D in cfg.d_grid:
                spec = ScenarioSpec(placement, norm, cfg.m, cfg.k, D)
                try:
                    rows.extend(_cell_rows(spec, cfg, Z, corr, power))
                except InvalidScenario:
                    rows.extend(_infeasible_cell_rows(spec, cfg))
    if write:
        write_rows(rows, cfg.out)
    return rows


def run_single(cfg: ExperimentConfig, write: bool = True) -> list:
    """Evaluate one (placement, normalization, D) cell with all requested
    estimators.  Stationary placement forces D = M; random placement has no
    closed form, so that estimator is skipped for it."""
    cfg.validate()
    if cfg.normalization == "both":
        norms = cfg.normalizations()
    else:
        norms = [Normalization.parse(cfg.normalization)]
    placement = Placement.parse(cfg.placement)
    D = cfg.m if placement is Placement.STATIONARY else cfg.d
    corr = None if cfg.corr_r == 0.0 else exponential_correlation(cfg.m, cfg.corr_r)
    power = PowerAllocation.equal(cfg.total_power, cfg.k)
    Z = draw_noise_block(cfg.seed, cfg.trials, cfg.k, cfg.m)
    rows = []
    for norm in norms:
        spec = ScenarioSpec(placement, norm, cfg.m, cfg.k, D)
        try:
            rows.extend(_cell_rows(spec, cfg, Z, corr, power))
        except InvalidScenario:
            rows.extend(_infeasible_cell_rows(spec, cfg))
    if write:
        write_rows(rows, cfg.out)
    return rows


# ---------------------------------------------------------------------------
# Validation suites


@dataclass(frozen=True)
class SuiteResult:
    name: str
    passed: bool
    worst: float
    tolerance: float
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    suites: tuple

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def format(self) -> str:
        lines = []
        for s in self.suites:
            tag = "PASS" if s.passed else "FAIL"
            lines.append(f"[{tag}] {s.name}: worst {s.worst:.3e} "
                         f"(tolerance {s.tolerance:.0e}){' -- ' + s.detail if s.detail else ''}")
        lines.append(f"validation {'passed' if self.passed else 'FAILED'} "
                     f"({sum(s.passed for s in self.suites)}/{len(self.suites)} suites)")
        return "\n".join(lines)


def _validation_instances(cfg: ExperimentConfig, n: int = 40):
    """Mixed bag of channel matrices: random VR scenarios plus dense Gaussians."""
    from .sampling import draw_noise_block as _dnb  # local alias, cheap draws
    instances = []
    rng_sizes = [(16, 4), (24, 8), (32, 5), (12, 3)]
    idx = 0
    for M, K in rng_sizes:
        Z = _dnb(cfg.seed + 17 + idx, max(1, n // (2 * len(rng_sizes))), K, M)
        for t in range(Z.shape[0]):
            instances.append(np.sqrt(M) * Z[t].T)             # dense CN(0, I)
        idx += 1
    # Structured VR channels on a small array.
    M, K = 24, 6
    for norm in (Normalization.TRACE_M, Normalization.TRACE_D):
        for D in (8, 12, 24):
            spec = ScenarioSpec(Placement.BEST_TILING if (M % D == 0 and (K * D) % M == 0)
                                else Placement.WORST_OVERLAP, norm, M, K, D)
            covs = scenario_covariances(spec, seed=cfg.seed)
            Z = _dnb(cfg.seed + 101, 2, K, M)
            block = _channel_block(Z, covs)
            for t in range(block.shape[0]):
                instances.append(block[t].T)
    return instances


def run_validate(cfg: ExperimentConfig, beta_scale: float = 1.0) -> ValidationReport:
    """Internal consistency suites; `beta_scale != 1` deliberately mis-scales
    every precoder before checking, which must make the report fail (negative
    control used by the test suite)."""
    cfg.validate()
    rho = cfg.rho
    suites = []
    instances = _validation_instances(cfg)

    def scaled(prec):
        return replace(prec, G=beta_scale * prec.G) if beta_scale != 1.0 else prec

    # Suite 1: exact total-power normalization for both precoders.
    worst = 0.0
    for H in instances:
        K = H.shape[1]
        power = PowerAllocation.equal(cfg.total_power, K)
        for factory in (cb_precoder, zf_precoder):
            prec = scaled(factory(H, power, cfg.total_power))
            used = float(np.sum(power.p * np.sum(np.abs(prec.G) ** 2, axis=0)))
            worst = max(worst, abs(used - cfg.total_power) / cfg.total_power)
    suites.append(SuiteResult("power-constraint", worst <= 1e-10, worst, 1e-10))

    # Suite 2: per-realization closed forms agree with the generic SINR route.
    worst = 0.0
    noise_power = cfg.total_power / rho
    for H in instances:
        K = H.shape[1]
        power = PowerAllocation.equal(cfg.total_power, K)
        cb = sinr_general(H, scaled(cb_precoder(H, power, cfg.total_power)),
                          power, noise_power)
        cbc = sinr_cb_closed(H, power, rho)
        zf = sinr_general(H, scaled(zf_precoder(H, power, cfg.total_power)),
                          power, noise_power)
        zfc = sinr_zf_closed(H, power, rho)
        worst = max(worst,
                    float(np.max(np.abs(cb.gamma - cbc.gamma) / cbc.gamma)),
                    float(np.max(np.abs(zf.gamma - zfc.gamma) / zfc.gamma)))
    suites.append(SuiteResult("route-equivalence", worst <= 1e-8, worst, 1e-8))

    # Suite 3: disjoint visibility regions carry zero cross-interference.
    M, K = 24, 4
    spec = ScenarioSpec(Placement.BEST_TILING, Normalization.TRACE_M, M, K, M // K)
    covs = scenario_covariances(spec, seed=cfg.seed)
    Z = draw_noise_block(cfg.seed + 7, 4, K, M)
    block = _channel_block(Z, covs)
    power = PowerAllocation.equal(cfg.total_power, K)
    worst = 0.0
    for t in range(block.shape[0]):
        H = block[t].T
        for factory in (cb_precoder, zf_precoder):
            prec = scaled(factory(H, power, cfg.total_power))
            A = np.abs(H.conj().T @ prec.G) ** 2
            off = A - np.diag(np.diag(A))
            worst = max(worst, float(off.max() / np.diag(A).min()))
    suites.append(SuiteResult("disjoint-zero-interference", worst <= 1e-12, worst, 1e-12))

    # Suite 4: deterministic equivalents reproduce the scenario closed forms.
    worst = 0.0
    for (M, K) in ((60, 30), (40, 8), (36, 12)):
        power = PowerAllocation.equal(cfg.total_power, K)
        for norm in (Normalization.TRACE_M, Normalization.TRACE_D):
            for placement in (Placement.STATIONARY, Placement.WORST_OVERLAP,
                              Placement.BEST_TILING):
                for D in ({M} if placement is Placement.STATIONARY
                          else {M // 2, M // 3, M}):
                    try:
                        spec = ScenarioSpec(placement, norm, M, K, D)
                        covs = scenario_covariances(spec)
                        cf_cb = closed_form_sinr("cb", placement, norm, M, K, D, rho)
                        cf_zf = closed_form_sinr("zf", placement, norm, M, K, D, rho)
                    except InvalidScenario:
                        continue
                    de_cb = cb_det_equiv(covs, power, rho)
                    de_zf = zf_det_equiv_approx(covs, power, rho)
                    worst = max(worst, float(np.max(
                        np.abs(de_cb.gamma_bar - cf_cb.value) / abs(cf_cb.value))))
                    if cf_zf.feasible and de_zf.valid:
                        worst = max(worst, float(np.max(
                            np.abs(de_zf.gamma_bar - cf_zf.value) / abs(cf_zf.value))))
    suites.append(SuiteResult("det-equiv-vs-closed-form", worst <= 1e-9, worst, 1e-9))

    # Suite 5: sample covariance of the channel draws converges to Theta.
    M, K, T = 12, 2, 10000
    spec = ScenarioSpec(Placement.WORST_OVERLAP, Normalization.TRACE_M, M, K, 8)
    covs = scenario_covariances(spec, corr=exponential_correlation(M, 0.5),
                                seed=cfg.seed)
    Z = draw_noise_block(cfg.seed + 23, T, K, M)
    block = _channel_block(Z, covs)
    worst = 0.0
    tol = 5.0 / np.sqrt(T)
    for k, cov in enumerate(covs):
        hk = block[:, k, :]
        sample = (hk.conj().T @ hk) / T                       # E h h^H estimate
        worst = max(worst, float(np.max(np.abs(sample - cov.theta))))
    suites.append(SuiteResult("sample-covariance", worst <= tol, worst, tol,
                              detail=f"T={T}"))

    return ValidationReport(suites=tuple(suites))


# ---------------------------------------------------------------------------
# Error-scaling study driver

EPS_CSV_HEADER = "record,K,M,trials,value,seed"


def run_epsilon_study(cfg: ExperimentConfig, write: bool = True):
    """Run the Gram-diagonal error study from the config and write a small
    CSV: one mean-epsilon row per M plus a slope footer row."""
    cfg.validate()
    study = epsilon_scaling_study(cfg.eps_k, cfg.eps_m_grid, cfg.eps_trials,
                                  master_seed=cfg.seed)
    lines = [EPS_CSV_HEADER]
    for M, mean in zip(study.M_grid, study.mean_epsilon):
        lines.append(f"mean-epsilon,{study.K},{M},{study.trials},{mean:.10g},{cfg.seed}")
    lines.append(f"slope,{study.K},,{study.trials},{study.slope:.10g},{cfg.seed}")
    if write:
        text = "\n".join(lines) + "\n"
        if cfg.out == "-":
            sys.stdout.write(text)
        else:
            with open(cfg.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
    return study
