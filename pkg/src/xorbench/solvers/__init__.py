from .common import (
    DauParams,
    FirstPassageRecord,
    PtParams,
    QgParams,
    SbParams,
    best_of_replicas,
    params_hash,
)
from .engines import (
    SuccessVerificationError,
    adapt_temperatures,
    dau_run,
    dau_step,
    metropolis_flip_prob,
    pt_run,
    quasigreedy_run,
    sb_run,
    swap_accept_prob,
)

__all__ = [
    "DauParams",
    "FirstPassageRecord",
    "PtParams",
    "QgParams",
    "SbParams",
    "SuccessVerificationError",
    "adapt_temperatures",
    "best_of_replicas",
    "dau_run",
    "dau_step",
    "metropolis_flip_prob",
    "params_hash",
    "pt_run",
    "quasigreedy_run",
    "sb_run",
    "swap_accept_prob",
]
