"""Lossless ANN-to-SNN conversion with delay-spike scheduling and tdIF neurons."""

__version__ = "0.1.0"

from .ann import AnnLayer, AnnModel, AnnResult, BnParams, QuantClipParams, ann_forward, quant_clip
from .converter import SnnLayer, SnnModel, convert, fuse_conv_bn
from .energy import (
    DEFAULT_COSTS,
    EnergyLedger,
    InstructionCostTable,
    average_spiking_rate,
    energy_report,
    phase_cost,
    tally_inference,
)
from .engine import (
    InferenceTrace,
    SpikeTrain,
    decode_if,
    decode_tdif,
    encode_input,
    run_snn,
    weighted_rate,
)
from .error_analysis import (
    ErrorReport,
    anchor_lattice_demo,
    compare_models,
    conversion_error,
    find_irregular_patterns,
    pattern_outcomes,
    residual_epsilon,
)
from .model_io import load_model, load_snn, load_tensor, save_model, save_snn, save_tensor
from .neurons import IF, TDIF, NeuronLayerState, delay_spike_run, if_step, tdif_step
from .pipeline import PipelineSchedule, build_schedule, gantt, summarize, validate_schedule
from .tensor import avg_pool2d, conv2d, fully_connected
