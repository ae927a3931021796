import math

import numpy as np
import pytest

import convblocks as cb
from convblocks import reference as ref
from convblocks.analysis import CHANNELS, unwrap_phase
from convblocks.errors import BadGrid, BadIndex, UnstableBlock, ZeroAdmittance


def _integrator():
    return cb.make_block([[0.0]], [[1.0, 0.0]], [[0.0], [1.0]], np.zeros((2, 2)), (), ("x",))


def test_named_queries_pick_response_matrix_entries():
    sys_ = ref.boost_system()
    s = 2j * math.pi * 250.0
    G = cb.response_matrix(sys_, s)
    for name, (i, o) in CHANNELS.items():
        assert cb.named_transfer(sys_, cb.TransferQuery(name), s) == G[o, i]
    z = cb.named_transfer(sys_, cb.TransferQuery("input_impedance"), s)
    assert z == pytest.approx(1 / G[0, 0], rel=1e-14)


def test_resistor_queries():
    r = cb.resistor(8.0)
    q = lambda name: cb.named_transfer(r, cb.TransferQuery(name), 1j)
    assert q("input_admittance") == pytest.approx(0.125)
    assert q("input_impedance") == pytest.approx(8.0)
    assert q("forward_voltage_gain") == 1.0
    assert q("reverse_current_gain") == -1.0
    assert q("output_impedance") == 0.0


def test_passive_filter_is_reciprocal():
    f = cb.lc_filter(ref.INPUT_FILTER)
    for fk in (1.0, 1e3, 7e4, 1e6):
        s = 2j * math.pi * fk
        g12 = cb.named_transfer(f, cb.TransferQuery("reverse_current_gain"), s)
        g21 = cb.named_transfer(f, cb.TransferQuery("forward_voltage_gain"), s)
        assert g12 == pytest.approx(-g21, rel=1e-12)


def test_ref_to_state_query():
    inner = ref.buck_current_loop()
    q = cb.TransferQuery("ref_to_state", 0, "S.iL")
    assert cb.named_transfer(inner, q, 0.0) == pytest.approx(1.0, rel=1e-12)


def test_query_validation():
    with pytest.raises(BadIndex):
        cb.TransferQuery("gain_margin")
    with pytest.raises(BadIndex):
        cb.named_transfer(cb.resistor(1.0), cb.TransferQuery("control_to_output"), 1j)
    with pytest.raises(BadIndex):
        cb.named_transfer(ref.boost_system(), cb.TransferQuery("control_to_output", k=1), 1j)


def test_zero_admittance():
    open_circuit = cb.make_block(np.zeros((0, 0)), np.zeros((0, 2)), np.zeros((2, 0)),
                                 [[0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(ZeroAdmittance):
        cb.named_transfer(open_circuit, cb.TransferQuery("input_impedance"), 1j)


def test_grid_point_count_and_validation():
    f = cb.FrequencyGrid(1.0, 1e6, 50).frequencies()
    assert f.size == 301
    assert f[0] == pytest.approx(1.0) and f[-1] == pytest.approx(1e6)
    assert np.allclose(np.diff(np.log10(f)), 0.02)
    for args in ((10.0, 1.0, 5), (0.0, 10.0, 5), (1.0, 10.0, 0), (1.0, 10.0, 2.5)):
        with pytest.raises(BadGrid):
            cb.FrequencyGrid(*args)


def test_integrator_bode():
    table = cb.bode_sweep(_integrator(), cb.TransferQuery("forward_voltage_gain"),
                          cb.FrequencyGrid(1.0, 1e4, 10))
    want = -20 * np.log10(2 * np.pi * table.f)
    np.testing.assert_allclose(table.magnitude_db, want, atol=1e-10)
    np.testing.assert_allclose(table.phase_deg, -90.0, atol=1e-10)
    assert not table.singular.any()


def test_sweep_flags_singular_points():
    w = 2 * np.pi * 10.0
    osc = cb.make_block([[0.0, w], [-w, 0.0]], [[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]],
                        np.zeros((2, 2)), (), ("a", "b"))
    table = cb.bode_sweep(osc, cb.TransferQuery("forward_voltage_gain"),
                          cb.FrequencyGrid(1.0, 100.0, 1))
    assert list(table.singular) == [False, True, False]
    assert np.isnan(table.magnitude_db[1]) and np.isnan(table.phase_deg[1])
    assert np.isfinite(table.magnitude_db[[0, 2]]).all()


def test_unwrap_phase():
    out = unwrap_phase(np.array([170.0, -175.0, -160.0, np.nan, 170.0]))
    np.testing.assert_allclose(out[:3], [170.0, 185.0, 200.0])
    assert np.isnan(out[3])
    assert out[4] == pytest.approx(170.0)
    assert unwrap_phase(np.array([-180.0]))[0] == 180.0


def test_third_order_phase_is_continuous():
    plant = cb.make_block(np.diag([-1.0, -10.0, -100.0]) + np.diag([1.0, 1.0], -1),
                          np.column_stack([[1.0, 0, 0], [0, 0, 0]]),
                          [[0, 0, 0], [0, 0, 1.0]], np.zeros((2, 2)), (), ("a", "b", "c"))
    table = cb.bode_sweep(plant, cb.TransferQuery("forward_voltage_gain"),
                          cb.FrequencyGrid(0.01, 1e4, 20))
    assert np.max(np.abs(np.diff(table.phase_deg))) < 30
    assert table.phase_deg[-1] == pytest.approx(-270.0, abs=1.0)


def test_step_study_final_value_and_errors():
    sys_ = ref.boost_system()
    tau = cb.slowest_time_constant(sys_)
    series = cb.step_study(sys_, "L.ref:v_out", 0.1, 30 * tau, 1e-5)
    assert series["v_out"][-1] == pytest.approx(0.1, rel=1e-6)
    assert series["v_out"][0] == 0.0
    with pytest.raises(BadGrid):
        cb.step_study(sys_, "i_out", 1.0, 1.0, -1e-5)
    with pytest.raises(UnstableBlock):
        cb.step_study(_integrator(), "v_in", 1.0, 1.0, 0.1)
    with pytest.raises(BadIndex):
        cb.step_study(sys_, "nope", 1.0, 1e-3, 1e-5)


def test_slowest_time_constant():
    blk = cb.make_block(np.diag([-2.0, -50.0]), np.zeros((2, 2)), np.zeros((2, 2)),
                        np.zeros((2, 2)), (), ("a", "b"))
    assert cb.slowest_time_constant(blk) == 0.5
    assert cb.slowest_time_constant(cb.resistor(1.0)) == 0.0
    assert cb.slowest_time_constant(_integrator()) == math.inf


def test_boost_pipeline_negative_input_resistance_at_low_frequency():
    sys_ = ref.boost_system()
    z = cb.named_transfer(sys_, cb.TransferQuery("input_impedance"), 0.0)
    # a regulated converter draws constant power: dV/dI = -V_in^2 / P_in
    p_in = ref.BOOST["V_out"] * ref.BOOST["I_out"]
    assert z.real == pytest.approx(-ref.BOOST["V_in"] ** 2 / p_in, rel=0.05)


def test_impedance_times_admittance_is_one():
    sys_ = ref.boost_system()
    for fk in (0.0, 1.0, 1e3, 5e4):
        s = 2j * math.pi * fk
        z = cb.named_transfer(sys_, cb.TransferQuery("input_impedance"), s)
        y = cb.named_transfer(sys_, cb.TransferQuery("input_admittance"), s)
        assert abs(z * y - 1.0) <= 1e-12
