import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spdc_bell.analyzer import analyze, port_matrix
from spdc_bell.phase_space import MeasurementSetting, ModeAmplitudes

complexes = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)
angles = st.floats(-10, 10)
modes = st.builds(ModeAmplitudes, complexes, complexes, complexes, complexes)


@given(modes)
def test_zero_angles_identity(m):
    p = analyze(m, MeasurementSetting(0.0, 0.0))
    assert (p.s_plus, p.s_minus, p.i_plus, p.i_minus) == (m.s_h, m.s_v, m.i_h, m.i_v)


@given(modes)
def test_quarter_turn(m):
    p = analyze(m, MeasurementSetting(math.pi / 2, 0.0))
    assert p.s_plus == pytest.approx(m.s_v, abs=1e-12)
    assert p.s_minus == pytest.approx(-m.s_h, abs=1e-12)


def test_diagonal_analyzer():
    p = analyze(ModeAmplitudes(1, 0, 0, 0), MeasurementSetting(math.pi / 4, 0.0))
    assert p.s_plus == pytest.approx(0.70711, abs=1e-5)
    assert p.s_minus == pytest.approx(-0.70711, abs=1e-5)


@given(modes, angles, angles)
def test_intensity_conserved(m, t, f):
    p = analyze(m, MeasurementSetting(t, f))
    assert abs(p.s_plus) ** 2 + abs(p.s_minus) ** 2 == pytest.approx(
        abs(m.s_h) ** 2 + abs(m.s_v) ** 2, abs=1e-12 * (1 + abs(m.s_h) ** 2 + abs(m.s_v) ** 2))
    assert abs(p.i_plus) ** 2 + abs(p.i_minus) ** 2 == pytest.approx(
        abs(m.i_h) ** 2 + abs(m.i_v) ** 2, abs=1e-12 * (1 + abs(m.i_h) ** 2 + abs(m.i_v) ** 2))


@given(angles, angles)
def test_port_matrix_orthogonal(t, f):
    r = port_matrix(MeasurementSetting(t, f))
    assert np.allclose(r @ r.T, np.eye(4), atol=1e-12)


@given(modes, angles)
def test_pi_periodicity(m, t):
    a = analyze(m, MeasurementSetting(t, t)).as_array()
    b = analyze(m, MeasurementSetting(t + math.pi, t + math.pi)).as_array()
    assert np.allclose(a, -b, atol=1e-9)


def test_batch_matches_scalar():
    rng = np.random.default_rng(1)
    arr = rng.normal(size=(4, 7)) + 1j * rng.normal(size=(4, 7))
    setting = MeasurementSetting(0.3, -1.1)
    batch = analyze(ModeAmplitudes.from_array(arr), setting).as_array()
    for k in range(7):
        single = analyze(ModeAmplitudes.from_array(arr[:, k]), setting).as_array()
        assert np.allclose(batch[:, k], single)
