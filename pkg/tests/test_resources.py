import math
import warnings

import pytest
from hypothesis import given, strategies as st

from schwinger_trotter.circuit import count_gates
from schwinger_trotter.lattice import LatticeParams
from schwinger_trotter.mathutil import DegenerateLogWarning
from schwinger_trotter.resources import (T_PER_TOFFOLI, CostReport, adder_toffolis, census_matches_formulas,
                                         cnot_per_trotter_step, cnot_per_trotter_step_parts, ft_qubits,
                                         tcount_electric_ft, tcount_hopping, tcount_mass, tcount_trotter_step,
                                         tcount_trotter_step_direct, toffoli_squarer)
from schwinger_trotter.trotter_circuits import build_squarer


def lat(N, eta):
    return LatticeParams(N, 2 ** (eta - 1), 1.0, 1.0)


def test_cnot_examples():
    assert cnot_per_trotter_step(lat(2, 1)) == 36
    assert cnot_per_trotter_step(lat(4, 2)) == 168
    assert cnot_per_trotter_step(lat(2, 2)) == 56


@given(st.integers(2, 64), st.integers(1, 8))
def test_cnot_parts_sum_to_total(N, eta):
    p = lat(N, eta)
    assert sum(cnot_per_trotter_step_parts(p).values()) == cnot_per_trotter_step(p)


def test_hopping_examples():
    assert tcount_hopping(2, 0.1) == pytest.approx(9.2 * math.log2(160))
    assert tcount_hopping(2, 0.1) == pytest.approx(67.36, abs=0.01)
    assert tcount_hopping(2, 16) == 0.0
    assert tcount_hopping(4, 0.01) - tcount_hopping(2, 0.01) == pytest.approx(8.0)
    with pytest.raises(ValueError):
        tcount_hopping(2, 0.0)


def test_mass_examples():
    assert tcount_mass(2) == 0.0
    assert tcount_mass(0.5) == pytest.approx(2.3)
    assert tcount_mass(0.125) == pytest.approx(4.6)
    with pytest.raises(ValueError):
        tcount_mass(-1.0)


def test_squarer_examples():
    assert toffoli_squarer(1)[0] == 0
    toff, anc = toffoli_squarer(2)
    assert toff == 7 and anc <= 8
    assert toffoli_squarer(4)[0] == 84
    with pytest.raises(ValueError):
        toffoli_squarer(0)


@pytest.mark.parametrize("eta", range(1, 7))
def test_squarer_formula_matches_composition(eta):
    # eta - 1 controlled additions with a copy-in and copy-out of eta - 1 Toffolis each,
    # plus the eta - 1 partial-product Toffolis
    fl = int(math.floor(math.log2(eta)))
    composed = (eta - 1) + (eta - 1) * (adder_toffolis(eta) + 2 * (eta - 1)) if eta > 1 else 0
    assert toffoli_squarer(eta)[0] == composed == (eta - 1) * (12 * eta - 3 * fl - 14)


@pytest.mark.parametrize("eta", range(1, 5))
def test_built_squarer_within_costed(eta):
    assert count_gates(build_squarer(eta)).toffoli <= toffoli_squarer(eta)[0]


def test_electric_examples():
    assert tcount_electric_ft(1, 3) == 0.0
    assert tcount_electric_ft(2, 0.1) == pytest.approx(8.9 * math.log2(60) + 56)
    assert tcount_electric_ft(2, 0.1) == pytest.approx(108.56, abs=0.02)
    assert tcount_electric_ft(3, 0.01) > tcount_electric_ft(2, 0.01)


def test_trotter_step_examples():
    p = lat(2, 1)
    d = 0.1 / 7
    direct = 2 * (tcount_hopping(1, d) + tcount_mass(d) + tcount_electric_ft(1, d)) + tcount_mass(d)
    assert tcount_trotter_step(p, 0.1)[0] == pytest.approx(direct, rel=1e-12)
    assert tcount_trotter_step(p, 0.1)[0] == pytest.approx(263.6, abs=0.05)
    assert ft_qubits(p) == 7
    with pytest.raises(ValueError):
        tcount_trotter_step(p, 0.0)


@pytest.mark.parametrize("N,eta,delta", [(2, 1, 0.1), (4, 2, 0.01), (16, 3, 1e-3), (64, 4, 1e-4), (128, 6, 0.05)])
def test_lambda_form_matches_direct(N, eta, delta):
    total, lam = tcount_trotter_step(lat(N, eta), delta)
    assert lam > 0
    assert total == pytest.approx(tcount_trotter_step_direct(lat(N, eta), delta), rel=1e-9)


@given(st.integers(2, 256), st.integers(1, 8), st.floats(1e-8, 0.5))
def test_counts_monotone(N, eta, delta):
    p = lat(N, eta)
    base = tcount_trotter_step(p, delta)[0]
    assert tcount_trotter_step(lat(N + 1, eta), delta)[0] >= base
    assert tcount_trotter_step(lat(N, eta + 1), delta)[0] >= base
    assert tcount_trotter_step(p, delta / 2)[0] >= base
    assert cnot_per_trotter_step(lat(N + 1, eta)) >= cnot_per_trotter_step(p)
    assert cnot_per_trotter_step(lat(N, eta + 1)) >= cnot_per_trotter_step(p)
    assert ft_qubits(lat(N, eta + 1)) >= ft_qubits(p)
    assert toffoli_squarer(eta + 1)[0] >= toffoli_squarer(eta)[0]
    assert tcount_electric_ft(eta, delta / 2) >= tcount_electric_ft(eta, delta)
    assert tcount_hopping(2 ** eta, delta) >= tcount_hopping(2 ** (eta - 1), delta)


def test_degenerate_log_warns_and_clamps():
    with pytest.warns(DegenerateLogWarning):
        assert tcount_hopping(2, 32) == 0.0
    with pytest.warns(DegenerateLogWarning):
        assert tcount_mass(4) == 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        tcount_mass(0.1)


@pytest.mark.parametrize("N,eta", [(2, 1), (2, 2), (4, 2)])
@pytest.mark.parametrize("mode", ["neg", "ft"])
def test_census_matches_formulas(N, eta, mode):
    report = census_matches_formulas(lat(N, eta), mode)
    if mode == "neg":
        assert report["cnot"] <= report["cnot_bound"]
    else:
        assert report["toffoli"] == report["toffoli_expected"]


def test_cost_report_defaults():
    assert T_PER_TOFFOLI == 4
    rep = CostReport(expected_T=1.5, CNOT=3)
    assert rep.as_dict()["expected_T"] == 1.5
    assert all(v >= 0 for v in rep.as_dict().values())
