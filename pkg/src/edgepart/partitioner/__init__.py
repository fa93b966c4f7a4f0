"""Plan generators for the data, horizontal, sequential and vertical strategies.

The searching planners (genetic, dynamic programming, exhaustive) live in
:mod:`edgepart.partitioner.search`; they evaluate candidates with
:mod:`edgepart.energy`.
"""

from .balanced import (
    comm_height,
    data_comm_heights,
    needed_interval,
    plan_data,
    plan_horizontal,
    produced_interval,
    required_input_height,
    split_heights,
)
from .plans import (
    STRATEGIES,
    DataPlan,
    HorizontalPlan,
    Plan,
    SequentialPlan,
    VerticalPlan,
    decompose_subpartitions,
    parse_plan,
    plan_to_dict,
    serialize_plan,
)
