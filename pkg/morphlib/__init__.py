from .errors import MorphError, ConfigError, NumericalError, DataError, \
    AngleNearPi, NumericallySingular, ConstraintUnsatisfiable, \
    DimensionMismatch, EmptyWindow, UnknownLabel, FormatError
from .chain import ChainDesign, JointSpec, BilateralDesign, \
    anthropomorphic_arm, articulated_base, forward, fk, spatial_jacobian, \
    mirror, tree_forward, tree_fk, tree_jacobian
from .ik import IkSettings, IkResult, solve_ik, weighted_pinv, damped_pinv
from .pipeline import TASK_LABELS, RawTrajectory, PoseCloud, \
    GeneratorSettings, synthesize_task, extract_local_variation, merge, \
    cluster_resample, occupancy_ratio
from .design import DesignVector, AnnealSettings, AnnealTrace, DESIGN_IK, \
    design_cost, anneal, perturb, random_design, random_baseline
from .dexterity import PointReport, DexterityReport, evaluate_point, \
    evaluate_points, evaluate_trace, evaluate_cloud, cloud_points, \
    trace_points, normalize_jointly
from .motion import MotionState, NullSpaceGoal, MassSettings, MotionTrace, \
    TransitionSettings, nullspace_gradient, potential, scaled_mass, \
    resolve_rates, simulate_transition, workspace_transition
