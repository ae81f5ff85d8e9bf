import pytest
from hypothesis import given
from hypothesis import strategies as st

from remswitch.actions import all_on, as_mask, is_subset
from remswitch.power import (
    BsPowerProfile,
    PowerParams,
    bs_total_power,
    dbm_to_watts,
    effective_transmitted_power,
    energy_efficiency,
    network_power,
    transceiver_chain_power,
    watts_to_dbm,
)

P = PowerParams()
MBS = BsPowerProfile.from_dbm(128, 46.0)
PBS = BsPowerProfile.from_dbm(32, 30.0)
NETWORK = [MBS] + [PBS] * 5


def test_dbm_conversion():
    assert dbm_to_watts(30.0) == 1.0
    assert dbm_to_watts(46.0) == pytest.approx(39.8107, abs=1e-4)
    assert watts_to_dbm(dbm_to_watts(17.3)) == pytest.approx(17.3, abs=1e-12)


def test_effective_transmitted_power():
    assert effective_transmitted_power(MBS, P) == pytest.approx(79.6214, abs=1e-4)
    assert effective_transmitted_power(BsPowerProfile(4, 0.0), P) == 0.0
    assert effective_transmitted_power(PBS, P) == pytest.approx(2.0, abs=1e-12)


def test_transceiver_chain_power():
    assert transceiver_chain_power(MBS, P) == pytest.approx(51.4, abs=1e-12)
    assert transceiver_chain_power(PBS, P) == pytest.approx(13.0, abs=1e-12)
    zero = PowerParams(per_antenna_power=0.0, oscillator_power=0.0)
    assert transceiver_chain_power(BsPowerProfile(1, 1.0), zero) == 0.0


def test_bs_total_power():
    assert bs_total_power(MBS, P, True) == pytest.approx(141.0214, abs=1e-4)
    assert bs_total_power(PBS, P, False) == 10.0
    assert bs_total_power(PBS, P, True) == pytest.approx(25.0, abs=1e-12)


def test_network_power_examples():
    mbs = bs_total_power(MBS, P, True)
    assert network_power(NETWORK, P, 0) == pytest.approx(mbs + 50.0, abs=1e-9)
    assert network_power(NETWORK, P, 0) == pytest.approx(191.0214, abs=1e-4)
    assert network_power(NETWORK, P, all_on(5)) == pytest.approx(266.0214, abs=1e-4)
    # PBSs {1, 3} on
    action = as_mask([False, True, False, True, False], 5)
    assert network_power(NETWORK, P, action) == pytest.approx(221.0214, abs=1e-4)


def test_network_power_length_mismatch():
    with pytest.raises(ValueError):
        network_power(NETWORK, P, [True] * 4)
    with pytest.raises(ValueError):
        network_power(NETWORK, P, 32)


def test_energy_efficiency_examples():
    assert energy_efficiency(266.0214e6, 266.0214) == pytest.approx(1e6, rel=1e-12)
    assert energy_efficiency(0.0, 200.0) == 0.0
    assert energy_efficiency(1e8, 200.0) == 5e5


@pytest.mark.parametrize("power", [0.0, -1.0])
def test_energy_efficiency_rejects_non_positive_power(power):
    with pytest.raises(ValueError):
        energy_efficiency(1e6, power)


@pytest.mark.parametrize("kwargs", [{"amplifier_efficiency": 0.0}, {"amplifier_efficiency": 1.5},
                                    {"standby_power": -1.0}, {"fix_power": -0.1}])
def test_power_params_validation(kwargs):
    with pytest.raises(ValueError):
        PowerParams(**kwargs)


def test_profile_validation():
    with pytest.raises(ValueError):
        BsPowerProfile(0, 1.0)
    with pytest.raises(ValueError):
        BsPowerProfile(4, -1.0)


actions5 = st.integers(0, 31)


@given(actions5, actions5)
def test_switching_off_never_raises_power(a, b):
    if is_subset(a, b):
        assert network_power(NETWORK, P, a) <= network_power(NETWORK, P, b)
        if a != b:
            assert network_power(NETWORK, P, a) < network_power(NETWORK, P, b)


@given(st.integers(1, 256), st.floats(0, 100), st.booleans())
def test_active_power_at_least_fix_power(m, tx, active):
    p = bs_total_power(BsPowerProfile(m, tx), P, True)
    assert p >= P.fix_power


@given(st.floats(0, 1e10), st.floats(1e-3, 1e4))
def test_energy_efficiency_homogeneous(c50, p):
    ee = energy_efficiency(c50, p)
    assert energy_efficiency(2 * c50, p) == pytest.approx(2 * ee, rel=1e-12)
    assert energy_efficiency(c50, 2 * p) == pytest.approx(ee / 2, rel=1e-12)
