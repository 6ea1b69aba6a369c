import numpy as np
import pytest
from pydantic import ValidationError
from scipy.signal import find_peaks

from spinres.models.cavity import CavityParams, CouplingGeometry, EnsembleTransition
from spinres.services.cavity_model import (
    collective_coupling, cooperativity, detuning, is_strong_coupling, resonance_field, s21_trace,
    single_spin_coupling, spin_frequency, spin_linewidth, spins_needed, total_linewidth, trace_fwhm,
)
from spinres.utils.constants import MU_B_OVER_H_MHZ_PER_T
from spinres.utils.errors import DataError

from tests.conftest import F_R, KAPPA, TABLE1, line


def test_cavity_linewidth_from_quality_factor():
    cavity = CavityParams(f_r=4.4, Q=568)
    assert cavity.kappa == pytest.approx(4400.0 / 568, rel=1e-12)
    assert CavityParams(f_r=4.4, kappa=7.746).Q == pytest.approx(4400.0 / 7.746)


def test_cavity_rejects_inconsistent_or_missing_linewidth():
    with pytest.raises(ValidationError):
        CavityParams(f_r=4.4, Q=568, kappa=9.0)
    with pytest.raises(ValidationError):
        CavityParams(f_r=4.4)
    with pytest.raises(ValidationError):
        CavityParams(f_r=-1.0, kappa=7.0)


def test_ensemble_transition_validation():
    with pytest.raises(ValidationError):
        EnsembleTransition(label="x", g_factor=0.0, gamma=10.0, g_coll=1.0)
    with pytest.raises(ValidationError):
        EnsembleTransition(label="x", g_factor=2.0, gamma=10.0, g_coll=-1.0)


def test_detuning(cavity):
    t = line("1a")
    assert detuning(cavity, t, 0.0) == pytest.approx(4400.0)
    assert detuning(cavity, t, 0.03756) == pytest.approx(0.0, abs=2.0)
    assert detuning(cavity, t, resonance_field(t, F_R)) == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(DataError):
        detuning(cavity, t, -0.01)


def test_resonance_fields_of_measured_lines():
    expected_mt = {"1a": 37.56, "1b": 43.36, "2a": 125.25, "2b": 154.10}
    quoted_mt = {"1a": 37.7, "1b": 43.0, "2a": 125.0, "2b": 154.0}
    for label, value in expected_mt.items():
        field_mt = 1000.0 * resonance_field(line(label), F_R)
        assert field_mt == pytest.approx(value, abs=0.01)
        assert field_mt == pytest.approx(quoted_mt[label], rel=0.01)


def test_spin_frequency():
    t = line("2b")
    assert spin_frequency(t, 0.154103) == pytest.approx(4400.0, rel=1e-4)
    np.testing.assert_allclose(spin_frequency(t, np.array([0.0, 0.1])), [0.0, 2.04 * MU_B_OVER_H_MHZ_PER_T * 0.1])


def test_on_resonance_excess_linewidth():
    t = line("1a")
    assert spin_linewidth(t, 0.0) == pytest.approx(2 * 4.02 ** 2 / 74.9, rel=1e-9)
    assert spin_linewidth(t, 0.0) == pytest.approx(0.4315, abs=1e-4)


def test_spin_linewidth_is_even_lorentzian():
    t = line("1b")
    assert spin_linewidth(t, 50.0) == pytest.approx(spin_linewidth(t, -50.0))
    assert spin_linewidth(t, t.gamma) == pytest.approx(0.5 * spin_linewidth(t, 0.0))


def test_spin_linewidth_falls_off_with_detuning():
    t = line("2a")
    offsets = np.linspace(0.0, 2000.0, 200)
    right = spin_linewidth(t, offsets)
    left = spin_linewidth(t, -offsets)
    assert np.all(np.diff(right) < 0)
    assert np.all(np.diff(left) < 0)


def test_total_linewidth_without_lines_is_kappa(cavity):
    assert total_linewidth(cavity, [], 0.05) == KAPPA
    flat = total_linewidth(cavity, [], np.linspace(0.0, 0.2, 11))
    np.testing.assert_array_equal(flat, np.full(11, KAPPA))


def test_total_linewidth_scalar_and_array(cavity, table1_lines):
    assert isinstance(total_linewidth(cavity, table1_lines, 0.05), float)
    assert total_linewidth(cavity, table1_lines, np.linspace(0.0, 0.2, 7)).shape == (7,)


def test_total_linewidth_peaks_at_the_four_resonances(cavity, table1_lines):
    fields = np.arange(0.0, 0.2, 1e-5)
    curve = total_linewidth(cavity, table1_lines, fields)
    peaks, _ = find_peaks(curve)
    assert len(peaks) == 4
    np.testing.assert_allclose(1000 * fields[peaks], [37.56, 43.36, 125.25, 154.10], atol=0.3)

    heights = curve[peaks] - KAPPA
    for height, label in zip(heights, TABLE1):
        g, gamma, g_coll = TABLE1[label]
        assert height == pytest.approx(2 * g_coll ** 2 / gamma, rel=0.05)


def test_bare_cavity_transmission(cavity):
    probe = np.linspace(F_R - 0.03, F_R + 0.03, 6001)
    trace = s21_trace(cavity, [], 0.0, probe)
    centre = 3000
    assert trace.magnitude_db[centre] == pytest.approx(0.0, abs=1e-12)
    assert trace.phase[centre] == pytest.approx(0.0, abs=1e-8)
    assert trace_fwhm(probe, trace.magnitude_db) == pytest.approx(KAPPA, rel=1e-3)


def test_transmission_offset(cavity):
    probe = np.linspace(F_R - 0.03, F_R + 0.03, 601)
    trace = s21_trace(cavity, [], 0.0, probe, offset_db=-40.0)
    assert trace.magnitude_db.max() == pytest.approx(-40.0, abs=1e-9)


def test_transmission_linewidth_matches_weak_coupling_model(cavity):
    weak = EnsembleTransition(label="1a", g_factor=8.37, gamma=74.9, g_coll=KAPPA / 12)
    B = resonance_field(weak, F_R)
    probe = np.linspace(F_R - 0.03, F_R + 0.03, 6001)
    width = trace_fwhm(probe, s21_trace(cavity, [weak], B, probe).magnitude_db)
    assert width == pytest.approx(total_linewidth(cavity, [weak], B), rel=0.01)


def test_transmission_linewidth_at_measured_coupling(cavity):
    t = line("1a")
    B = resonance_field(t, F_R)
    probe = np.linspace(F_R - 0.03, F_R + 0.03, 6001)
    width = trace_fwhm(probe, s21_trace(cavity, [t], B, probe).magnitude_db)
    assert width == pytest.approx(total_linewidth(cavity, [t], B), rel=0.10)


def test_trace_fwhm_requires_bracketed_peak():
    probe = np.linspace(4.39, 4.41, 11)
    with pytest.raises(DataError):
        trace_fwhm(probe, np.linspace(-10.0, 0.0, 11))
    with pytest.raises(DataError):
        trace_fwhm(probe[:2], np.zeros(2))


def test_single_spin_coupling_order_of_magnitude(cavity):
    geometry = CouplingGeometry.from_g_factor(2.0, mode_volume=1e-12)
    g_c = single_spin_coupling(cavity, geometry)
    assert 37.0 < g_c < 39.0

    n = spins_needed(KAPPA, g_c)
    assert n == pytest.approx((KAPPA * 1e6 / g_c) ** 2)
    assert collective_coupling(g_c, n) == pytest.approx(KAPPA * 1e6)


def test_collective_coupling_scaling():
    for g_c, n in ((38.0, 4.15e10), (1.0, 1.0), (250.0, 3e12)):
        assert collective_coupling(g_c / 2, 4 * n) == pytest.approx(collective_coupling(g_c, n), rel=1e-12)


def test_spins_needed_rejects_nonpositive():
    with pytest.raises(DataError):
        spins_needed(0.0, 38.0)


def test_cooperativity_and_regime():
    t = line("1a")
    c = cooperativity(t, KAPPA)
    assert c == pytest.approx(2 * 4.02 ** 2 / (KAPPA * 74.9))
    assert c == pytest.approx(spin_linewidth(t, 0.0) / KAPPA)
    assert not is_strong_coupling(t, KAPPA)
    assert is_strong_coupling(EnsembleTransition(label="s", g_factor=2.0, gamma=5.0, g_coll=10.0), KAPPA)
