import json

import numpy as np
import pytest

import heisadams as ha

# closed-form reductions of the two defining integrals:
#   V = pi^2/2 (t-slab length 2 sqrt(1-r^4), then polar in z)
#   gamma1 = 3/(4 pi) (inner t-integral 4/3 (r^4+1)^-2, then w = r^4)
V_EXACT = np.pi ** 2 / 2
C0_EXACT = 2 * np.pi ** 2
GAMMA1_EXACT = 3 / (4 * np.pi)
A_EXACT = 32 / 9


def test_closed_forms(constants):
    c = constants
    assert c.unitBallVolume == pytest.approx(V_EXACT, rel=1e-6)
    assert c.c0 == pytest.approx(C0_EXACT, rel=1e-6)
    assert c.gamma1 == pytest.approx(GAMMA1_EXACT, rel=1e-6)
    assert c.bigA == pytest.approx(A_EXACT, rel=1e-6)


def test_defining_relations(constants):
    c = constants
    # bigA = q/(c0 gamma1^2) holds exactly as computed
    assert c.bigA == pytest.approx(c.q / (c.c0 * c.gamma1 ** 2), rel=1e-15)
    assert c.c0 == pytest.approx(c.q * c.unitBallVolume, rel=1e-12)
    assert c.q == 4
    assert c.w3 == c.c0


def test_monte_carlo_agrees_within_3_sigma(constants):
    e = constants.errorEstimates
    assert abs(e["mc_unitBallVolume"] - constants.unitBallVolume) <= 3 * e["mc_unitBallVolume_sigma"]
    assert abs(e["mc_gamma1"] - constants.gamma1) <= 3 * e["mc_gamma1_sigma"]


def test_error_estimates_present_and_small(constants):
    e = constants.errorEstimates
    for key in ("unitBallVolume", "c0", "gamma1", "bigA"):
        assert e[key] >= 0.0
        assert e[key] < 1e-3


def test_json_export(constants):
    doc = json.loads(constants.to_json())
    assert set(doc) == {"q", "c0", "gamma1", "bigA", "unitBallVolume", "errorEstimates"}
    assert doc["q"] == 4
    assert doc["bigA"] == pytest.approx(A_EXACT, rel=1e-5)


def test_weighted_ball_integral(constants):
    # polar formula: int_B(0,1) rho^-2 = c0/2 = pi^2
    assert constants.weighted_ball_integral(2.0) == pytest.approx(np.pi ** 2, rel=1e-6)
    with pytest.raises(ValueError):
        constants.weighted_ball_integral(4.0)


def test_tail_truncation_is_controlled():
    loose = ha.compute_constants(ha.QuadratureOptions(tail_radius=20.0, mc_samples=10_000))
    tight = ha.compute_constants(ha.QuadratureOptions(tail_radius=80.0, mc_samples=10_000))
    assert loose.gamma1 == pytest.approx(tight.gamma1, rel=1e-5)
    # reported error bound covers the actual truncation difference
    assert abs(loose.gamma1 - tight.gamma1) <= loose.errorEstimates["gamma1"] + tight.errorEstimates["gamma1"]


def test_general_n_normalization_matches_n1(constants):
    from heisadams.constants import fundamental_constant_general

    g1 = fundamental_constant_general(1, tol=1e-9)
    assert g1 == pytest.approx(GAMMA1_EXACT, rel=1e-5)
    # documented generalization stays finite and positive for n = 2
    g2 = fundamental_constant_general(2, tol=1e-7)
    assert g2 > 0.0
