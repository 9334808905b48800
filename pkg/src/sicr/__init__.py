"""Scale-invariant local descriptors for 1-D sensor signals and the SIC-R classifier."""
from ._backend import BACKEND
from .classifier import (
    ClassificationResult,
    EvalReport,
    Metric,
    Model,
    PipelineParams,
    TrainingSet,
    classify,
    evaluate_all_metrics,
    evaluate_loocv,
    fit,
)
from .descriptor import (
    Descriptor,
    DescriptorParams,
    ShapeExtremum,
    SweepResult,
    build_descriptor,
    closeness_sweep,
    describe_all,
    find_shape_extrema,
)
from .errors import SicrError
from .matching import (
    CandidateMatch,
    LinearTimeMap,
    MatchParams,
    MatchSet,
    ScoreTriple,
    dtw,
    extract_features,
    nn_match,
    ransac_filter,
    score_pair,
)
from .scale_space import (
    DoGStack,
    Keypoint,
    ScaleSpace,
    ScaleSpaceParams,
    build_dog,
    build_scale_space,
    convolve_reflect,
    detect_keypoints,
    gaussian_kernel,
)
from .signal import Signal, SynthSpec, load_signal_csv, resample_linear, synth_event

__version__ = "0.1.0"
