"""Road scene-graph extraction and multi-relational graph learning.

The pipeline turns driving observations (ground-truth object states or
per-frame 2D detections) into configurable typed scene-graphs, embeds
graph sequences with from-scratch multi-relational graph neural
networks, and evaluates them on risk assessment, collision prediction,
transfer and explainability tasks.
"""

from .bev import BevCalibration, GroundPoint, fit_homography, project_detection
from .datasets import (
    Clip,
    Dataset,
    Detection,
    FrameRecord,
    ObjectState,
    SplitPlan,
    class_weights,
    downsample,
    kfold_plan,
    load_dataset,
    save_dataset,
    stratified_split,
)
from .extraction import (
    ExtractionConfig,
    SceneGraph,
    SceneGraphClip,
    SceneGraphDataset,
    SceneGraphEdge,
    SceneGraphNode,
    export_dot,
    extract_dataset,
    extract_graph,
    extract_sequence,
    load_scenegraph_dataset,
    save_scenegraph_dataset,
)
from .metrics import Scores, auc, mcc
from .models import (
    ModelConfig,
    SceneGraphModel,
    frame_forward,
    load_model,
    save_model,
    seq_forward,
)
from .synth import ScenarioConfig, generate_dataset
from .training import (
    TrainRun,
    cross_validate,
    evaluate,
    explain,
    train_frame_classifier,
    train_sequence_classifier,
    transfer_evaluate,
    write_attention_csv,
)

__version__ = "0.1.0"

__all__ = [
    "BevCalibration", "GroundPoint", "fit_homography", "project_detection",
    "Clip", "Dataset", "Detection", "FrameRecord", "ObjectState", "SplitPlan",
    "class_weights", "downsample", "kfold_plan", "load_dataset", "save_dataset",
    "stratified_split",
    "ExtractionConfig", "SceneGraph", "SceneGraphClip", "SceneGraphDataset",
    "SceneGraphEdge", "SceneGraphNode", "export_dot", "extract_dataset",
    "extract_graph", "extract_sequence", "load_scenegraph_dataset",
    "save_scenegraph_dataset",
    "Scores", "auc", "mcc",
    "ModelConfig", "SceneGraphModel", "frame_forward", "load_model",
    "save_model", "seq_forward",
    "ScenarioConfig", "generate_dataset",
    "TrainRun", "cross_validate", "evaluate", "explain",
    "train_frame_classifier", "train_sequence_classifier", "transfer_evaluate",
    "write_attention_csv",
    "__version__",
]
