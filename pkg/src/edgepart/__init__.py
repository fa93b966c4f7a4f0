"""Energy-aware partitioning of CNN inference across edge devices."""

from .energy import (
    EnergyBreakdown,
    FleetSummary,
    LayerCosts,
    battery_lifetime,
    energy_data,
    energy_horizontal,
    energy_sequential,
    energy_vertical,
    evaluate,
)
from .errors import EdgePartError, InfeasibleError, ParseError, SearchSpaceError, ValidationError
from .model import LayerKind, LayerSpec, NetworkModel, TensorShape, build_model, load_model, parse_model
from .partitioner import (
    DataPlan,
    HorizontalPlan,
    SequentialPlan,
    VerticalPlan,
    comm_height,
    plan_data,
    plan_horizontal,
    split_heights,
)
from .partitioner.search import GAConfig, exhaustive_vertical, plan_sequential_dp, plan_sequential_ga, plan_vertical_ga
from .profiles import CommCostModel, DeviceProfile, LayerProfile, load_profile, synthesize_profile

__version__ = "0.1.0"
