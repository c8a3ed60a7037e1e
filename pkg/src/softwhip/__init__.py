"""softwhip: passive whip dynamics of tapered soft arms.

Simulates planar whipping of a tapered elastic rod in fluid or air and
quantifies bend propagation from midline data: curvature fields over
normalized arc length, bend-point velocity profiles, and profile-shape
classification (monotonic decay vs bell-shaped).
"""

from .errors import (AmbiguousTopologyError, ConfigError, DegenerateFieldError,
                     DegenerateGeometryError, DegenerateProfileError,
                     EmptyMaskError, EmptySequenceError, InvalidArgumentError,
                     MaskPipelineError, SimulationDivergedError, SoftwhipError)
from .kinematics import (BELL_SHAPED, MONOTONIC_DECAY, OTHER, BendTrack,
                         ClassifierThresholds, CurvatureField, MidlineSequence,
                         PropagationMetrics, bend_point, bend_velocity,
                         classify_profile, curvature_field, normalize_profile,
                         overlay_profile, propagation_metrics)
from .maskio import read_mask, write_mask
from .maskpipe import (BinaryMask, ExtractionResult, GapRecord, SkeletonGraph,
                       apply_exclusion, build_graph, extract_midline,
                       extract_sequence, prune_and_order, thin)
from .midline import (CurvatureProfile, Midline, arc_length, curvature_profile,
                      resample_uniform, smooth)
from .rodsim import (MATERIALS, WATER_DENSITY, DriveProfile, RodModel, RodState,
                     build_rod, energy, material_model, simulate, stability_dt,
                     step)

__version__ = "0.1.0"
