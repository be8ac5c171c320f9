import numpy as np
import pytest

from telegate.budget import (
    ComponentErrors,
    binomial_defaults,
    budget_from_simulation,
    compare,
    defaults,
    fock_defaults,
    loss_attribution,
    to_table,
    total_error,
)
from telegate.errors import ConfigError


def test_component_validation():
    with pytest.raises(ConfigError):
        ComponentErrors(p_bell=0.03, p_lo=(0.1,), p_msmt=(0,) * 4, p_ff=(0,) * 4)
    with pytest.raises(ConfigError):
        ComponentErrors(p_bell=1.5, p_lo=(0,) * 4, p_msmt=(0,) * 4, p_ff=(0,) * 4)
    with pytest.raises(ConfigError):
        defaults("gkp")


def test_binomial_totals():
    totals, mean, _ = total_error(binomial_defaults())
    assert [round(100 * t) for t in totals] == [17, 20, 12, 16]
    assert round(100 * mean) == 16


def test_fock_totals():
    totals, mean, _ = total_error(fock_defaults())
    assert [round(100 * t) for t in totals] == [12, 15, 11, 15]
    assert round(100 * mean) == 13


def test_multiplicative_cross_check_is_smaller():
    totals, _, mult = total_error(binomial_defaults())
    for t, m in zip(totals, mult):
        assert m < t


def test_saturation_warning():
    comp = ComponentErrors(
        p_bell=0.5, p_lo=(0.4,) * 4, p_msmt=(0.3,) * 4, p_ff=(0.0,) * 4
    )
    with pytest.warns(UserWarning):
        totals, _, _ = total_error(comp)
    assert totals[0] == 1.0


def test_budget_from_simulation_layout():
    comp = budget_from_simulation(
        bell_infidelity=0.03,
        cnot1_infidelity=0.02,
        cnot2_infidelity=0.05,
        idle_t1_penalty=0.01,
        msmt_infidelity=(0.01, 0.04, 0.02, 0.06),
        ff_x_infidelity=0.03,
    )
    assert comp.p_lo == (0.08,) * 4
    assert comp.p_ff == (0.03, 0.03, 0.0, 0.0)


def test_compare_overlap():
    r = compare(0.16, 0.02, 0.21, 0.02)
    assert not r["consistent"]
    r2 = compare(0.16, 0.03, 0.18, 0.02)
    assert r2["consistent"]


def test_loss_attribution_closes():
    att = loss_attribution()
    assert sum(att.values()) == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        loss_attribution(0.8, 0.3, 0.1)


def test_to_table_round_numbers():
    table = to_table(binomial_defaults())
    assert table["outcomes"]["01"]["total"] == pytest.approx(0.20)
    assert table["mean_total"] == pytest.approx(0.1625)
