"""Multi-robot brick wall construction planning."""
from .baselines import OracleResult, exact_oracle, gap, naive_plan
from .constraints import (
    ConcurrenceRule,
    ConstraintGraph,
    PrecedenceRule,
    build_concurrence,
    build_graph,
    build_precedence,
)
from .engine import (
    BatterySwap,
    Placement,
    Plan,
    PlanContext,
    PlanState,
    Robot,
    RobotState,
    construct_plan,
    make_team,
    mixed_team,
    validate_plan,
)
from .errors import (
    ConfigurationError,
    DimensionError,
    ExportError,
    InfeasibleError,
    UnsupportedBondError,
    WallFormatError,
    WallPlanError,
)
from .grasp import GraspConfig, SolutionRecord, grasp_optimize, replan_from_partial
from .milp import build_milp, write_lp
from .wall import Brick, BrickDimensions, BrickKind, WallBlueprint, generate_wall, load_wall, save_wall, wall_reward_total

__version__ = "0.1.0"
