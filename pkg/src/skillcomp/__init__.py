"""skillcomp: a numerical laboratory for compositional skill learning
under uniform vs power-law sampling distributions."""

from .distributions import (
    SkillDistribution,
    apply_ordering,
    binned_zipf_weights,
    dist_from_spec,
    uniform_weights,
    zipf_weights,
)
from .learner import (
    DivergenceError,
    ModelState,
    Sample,
    StepSizeWarning,
    default_step_size,
    generate_sample,
    init_gaussian,
    minibatch_step,
    predict,
    random_sign_vector,
    recovery_error,
    sample_gradient,
    sample_loss,
    stability_step_bound,
)
from .population import (
    TrajectoryLog,
    hessian_opnorm_bound,
    population_gd_trajectory,
    population_gradient,
    population_loss,
    weighted_norm_sq,
    weighted_overlap,
)

__version__ = "0.1.0"
