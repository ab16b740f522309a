"""Shared fixtures: hand-built CSV content in the producer's exact shape."""

import pytest

HEADER = ("scenario,precoder,normalization,M,K,D,rho_db,estimator,"
          "sinr_db,sinr_db_stderr,trials,seed,flags")

# A miniature but structurally faithful sweep: one stationary cell, a
# short worst-case CB curve, a worst-case ZF curve with singular holes
# below D=30, and an infeasible best-tiling placeholder.
SMALL_ROWS = [
    "stationary,cb,trace-m,60,30,60,10,monte-carlo,2.86,0.029,50,7,",
    "stationary,cb,trace-m,60,30,60,10,closed-form,2.7300127,,,7,",
    "stationary,zf,trace-m,60,30,60,10,closed-form,10.142404,,,7,",
    "worst,cb,trace-m,60,30,2,10,monte-carlo,-10.1,0.05,50,7,",
    "worst,cb,trace-m,60,30,30,10,monte-carlo,0.8,0.04,50,7,",
    "worst,cb,trace-m,60,30,60,10,monte-carlo,2.9,0.03,50,7,",
    "worst,cb,trace-m,60,30,2,10,closed-form,-11.7,,,7,",
    "worst,cb,trace-m,60,30,30,10,closed-form,0.75,,,7,",
    "worst,cb,trace-m,60,30,60,10,closed-form,2.73,,,7,",
    "worst,zf,trace-m,60,30,2,10,monte-carlo,,,,7,singular",
    "worst,zf,trace-m,60,30,14,10,monte-carlo,,,,7,singular",
    "worst,zf,trace-m,60,30,30,10,monte-carlo,-1.7,0.06,50,7,",
    "worst,zf,trace-m,60,30,60,10,monte-carlo,10.0,0.04,50,7,",
    "worst,zf,trace-m,60,30,14,10,det-equiv,,,,7,infeasible",
    "worst,zf,trace-m,60,30,60,10,det-equiv,10.142404,,,7,",
    "best,cb,trace-m,60,30,14,10,monte-carlo,,,,7,infeasible",
    "best,cb,trace-m,60,30,30,10,monte-carlo,4.2,0.03,50,7,",
    "worst,cb,trace-d,60,30,2,10,monte-carlo,-12.0,0.05,50,7,",
    "worst,cb,trace-d,60,30,60,10,monte-carlo,2.9,0.03,50,7,",
    "stationary,cb,trace-d,60,30,60,10,closed-form,2.7300127,,,7,",
]


@pytest.fixture
def header():
    return HEADER


@pytest.fixture
def small_rows():
    return list(SMALL_ROWS)


@pytest.fixture
def small_csv(tmp_path):
    path = tmp_path / "sweep.csv"
    path.write_text(HEADER + "\n" + "\n".join(SMALL_ROWS) + "\n")
    return path


@pytest.fixture
def stationary_only_csv(tmp_path):
    path = tmp_path / "stationary.csv"
    rows = [r for r in SMALL_ROWS if r.startswith("stationary")]
    path.write_text(HEADER + "\n" + "\n".join(rows) + "\n")
    return path
