"""mhdlab: a periodic-box laboratory for mild solutions of incompressible MHD.

Construction of mild solutions by successive approximation, analyticity-strip
diagnostics, harmonic-measure estimation, linear sparseness scans, and the
geometric regularity certification chains built from them.
"""

from .analyticity import (
    BAND_LIMITED_CAP,
    ComplexShiftField,
    StripBoundReport,
    analyticity_radius_estimate,
    complex_shift_evaluate,
    rho_lower_bound,
    strip_bound_check,
)
from .errors import (
    CalibrationError,
    ConfigError,
    GridMismatchError,
    HorizonError,
    MhdLabError,
    ParameterError,
    PicardDivergedError,
    ScaleError,
    SnapshotError,
)
from .harmonic import (
    HarmonicMeasureEstimate,
    SlitSet,
    extremal_slits,
    max_principle_bound,
    mc_harmonic_measure,
    solynin_h,
    solynin_lower_bound,
)
from .initial import InitialSpec, generate_initial
from .mild import (
    ConstantsLedger,
    ContractionReport,
    ExistenceTimes,
    MildSolution,
    SolverParams,
    calibrate_constants,
    corollary6_check,
    existence_times,
    lemma4_bound_check,
    picard_solve,
    scheme_step,
)
from .monitor import (
    CriterionParams,
    MonitorConfig,
    MonitorVerdict,
    StepVerdict,
    certify_interval,
    condition_thm13,
    monitor_step,
    threshold_thm11,
    thresholds_thm12,
)
from .rk4 import rk4_reference
from .snapshots import Snapshot, read_snapshot, write_snapshot
from .sparseness import (
    SparsenessReport,
    SuperLevelSet,
    global_sparseness_scan,
    intersection_level_set,
    is_sparse_at,
    segment_occupancy,
    super_level_set,
)
from .spectral import (
    Grid,
    ScalarField,
    SpectralField,
    bmo_norm_estimate,
    divergence,
    heat_propagate,
    leray_project,
    partial_derivative,
    solve_total_pressure,
    sup_norm,
)

__version__ = "0.1.0"
