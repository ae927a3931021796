"""Reference converter systems: the three example studies and their parameters.

* ``boost_system``: voltage-mode boost, resistive load, Type 3 voltage loop,
  LC input filter (10 V -> 24 V, 1.2 A).
* ``buck_system``: CCM buck with an inner Type 1 average-current loop and an
  outer Type 2 voltage loop (24 V -> 12 V, 2.4 A).  The buck is the averaged
  duty-controlled model from :func:`convblocks.blocks.buck_ccm`.
* ``boost_buck_system``: the boost stage without its load resistor feeding
  the buck stage.
"""

from __future__ import annotations

from .blocks import (
    LcParams,
    ControllerParams,
    boost_ccm,
    buck_ccm,
    controller,
    lc_filter,
    resistor,
    solve_operating_point,
    time_constant_from_frequency as tc,
)
from .compose import (
    OutputVoltage,
    StateTarget,
    attach_controller_open_loop,
    close_loop,
    feedback_gain,
    series_connect,
)
from .model import StateSpaceBlock

BOOST = dict(V_in=10.0, V_out=24.0, I_out=1.2, L=20e-6, C=220e-6, f_sw=100e3)
BOOST_TYPE3 = ControllerParams("type3", K_i=10.0, T_z1=tc(10e3), T_z2=tc(10e3),
                               T_p1=tc(100.0), T_p2=tc(50e3))
INPUT_FILTER = LcParams(L=5e-6, C=1e-6, r_L=50e-3)

BUCK = dict(V_in=24.0, V_out=12.0, I_out=2.4, L=100e-6, C=100e-6, f_sw=50e3)
BUCK_TYPE1 = ControllerParams("type1", K_i=20000.0)
BUCK_TYPE2 = ControllerParams("type2", K_i=3000.0, T_z=tc(300.0), T_p=tc(25e3))


def boost_converter() -> StateSpaceBlock:
    op = solve_operating_point("boost", BOOST["V_in"], BOOST["V_out"], BOOST["I_out"])
    return boost_ccm(LcParams(BOOST["L"], BOOST["C"]), op)


def buck_converter() -> StateSpaceBlock:
    op = solve_operating_point("buck", BUCK["V_in"], BUCK["V_out"], BUCK["I_out"])
    return buck_ccm(LcParams(BUCK["L"], BUCK["C"]), op)


def close_voltage_loop(plant: StateSpaceBlock, params: ControllerParams, ctl, *,
                       name: str, terminal: bool = True) -> StateSpaceBlock:
    ol = attach_controller_open_loop(plant, controller(params, name), ctl)
    k = plant.control_index(ctl)
    return close_loop(ol, feedback_gain(OutputVoltage(), ol, k, terminal=terminal))


def boost_system(*, with_filter: bool = True, with_load: bool = True,
                 terminal: bool = True) -> StateSpaceBlock:
    """Boost (+ load) -> Type 3 voltage loop -> input filter in front."""
    plant = boost_converter()
    ctl = "duty"
    if with_load:
        plant = series_connect(plant, resistor(BOOST["V_out"] / BOOST["I_out"]))
        ctl = "S.duty"
    system = close_voltage_loop(plant, BOOST_TYPE3, ctl, name="Gv3", terminal=terminal)
    if with_filter:
        system = series_connect(lc_filter(INPUT_FILTER), system)
    return system


def buck_current_loop(params: ControllerParams = BUCK_TYPE1) -> StateSpaceBlock:
    """Buck with resistive load and the inner average-current loop closed."""
    plant = series_connect(buck_converter(), resistor(BUCK["V_out"] / BUCK["I_out"]))
    ol = attach_controller_open_loop(plant, controller(params, "Gi"), "S.duty")
    return close_loop(ol, feedback_gain(StateTarget("S.iL"), ol, "err:S.duty"))


def buck_system(*, current: ControllerParams = BUCK_TYPE1,
                voltage: ControllerParams = BUCK_TYPE2,
                terminal: bool = True) -> StateSpaceBlock:
    """Buck with inner current loop and outer voltage loop."""
    inner = buck_current_loop(current)
    return close_voltage_loop(inner, voltage, "ref:S.iL", name="Gv2", terminal=terminal)


def boost_buck_system(*, buck_voltage: ControllerParams = BUCK_TYPE2,
                      terminal: bool = True) -> StateSpaceBlock:
    """Filtered, voltage-controlled boost stage loaded by the buck stage."""
    source = boost_system(with_load=False, terminal=terminal)
    load = buck_system(voltage=buck_voltage, terminal=terminal)
    return series_connect(source, load)
