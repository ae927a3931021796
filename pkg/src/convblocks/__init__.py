"""Composable two-port state-space models of DC-DC converters and their controllers."""

from .analysis import (
    BodeTable,
    FrequencyGrid,
    TransferQuery,
    bode_sweep,
    named_transfer,
    slowest_time_constant,
    step_study,
)
from .blocks import (
    ControllerParams,
    LcParams,
    OperatingPoint,
    boost_ccm,
    buck_ccm,
    controller,
    gain_controller,
    lc_filter,
    resistor,
    solve_operating_point,
    time_constant_from_frequency,
)
from .compose import (
    FeedbackGain,
    OutputVoltage,
    StateTarget,
    attach_controller_open_loop,
    cascade,
    close_loop,
    feedback_gain,
    series_connect,
    series_connect_compact,
)
from .errors import *  # noqa: F401,F403
from .model import (
    ControllerBlock,
    StateSpaceBlock,
    TimeSeries,
    discretize,
    eval_response,
    eval_state_response,
    is_stable,
    make_block,
    poles,
    response_matrix,
    simulate,
)
from .netlist import BlockSpec, LoopSpec, NetlistDoc, build_system, parse_netlist, serialize_netlist

__version__ = "0.1.0"
