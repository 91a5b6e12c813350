"""Online learning from partially rewarded feedback.

Policies: baseline LinUCB, ROGCN (online GCN), BILINUCB (LinUCB with
bounded reward imputation) and GCNUCB (LinUCB over per-class GCN
embeddings).
"""

from .data import Dataset, MaskedStream, l1_row_normalize, load_dataset, make_blobs, mask_and_order
from .harness import ExperimentConfig, emit_results, run_experiment, run_replica
from .policies import BilinucbPolicy, GcnucbPolicy, LinUCBPolicy, RogcnPolicy

__all__ = [
    "Dataset", "MaskedStream", "load_dataset", "l1_row_normalize", "mask_and_order", "make_blobs",
    "ExperimentConfig", "run_replica", "run_experiment", "emit_results",
    "LinUCBPolicy", "RogcnPolicy", "BilinucbPolicy", "GcnucbPolicy",
]
__version__ = "0.1.0"
