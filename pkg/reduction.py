"""
Macro-vertex reduction: each subframe's K subchannel weights collapse to one
weight per (vehicle, subframe), turning the time-orthogonal per-cluster problem
into a plain assignment between vehicles and subframes.
"""

import numpy as np
from scipy.special import logsumexp

from models import ContractViolationError, DomainError, ReducedCostMatrix


def _as_block(costs):
    block = np.asarray(costs, dtype=float)
    if block.ndim != 3:
        raise DomainError(f"cluster cost block must be n x L x K, got shape {block.shape}")
    if block.shape[2] == 0:
        raise DomainError("cluster cost block has an empty subchannel axis")
    return block


def reduce_costs(costs):
    """Best subchannel rate per (vehicle, subframe); ties go to the lowest subchannel"""
    block = _as_block(costs)
    # np.argmax returns the first maximizing index
    argmax = np.argmax(block, axis=2)
    values = np.take_along_axis(block, argmax[..., np.newaxis], axis=2)[..., 0]
    return ReducedCostMatrix(values=values, argmax=argmax)


def smoothed_reduce(costs, beta):
    """(1/beta) log sum_k exp(beta c[i, l, k]), the finite-beta form of the max reduction"""
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    block = _as_block(costs)
    peak = block.max(axis=2)
    # shift by the row max so exp never overflows; the max term contributes exp(0)
    return peak + logsumexp(beta * (block - peak[..., np.newaxis]), axis=2) / beta


def lift_assignment(reduced_grants, rcm):
    """Map row -> subframe grants back to row -> (subframe, subchannel) via the argmax pointers"""
    seen = {}
    for row, l in reduced_grants.items():
        if l in seen:
            raise ContractViolationError(f"rows {seen[l]} and {row} were both given subframe {l}")
        seen[l] = row
    n, num_subframes = rcm.shape
    lifted = {}
    for row, l in reduced_grants.items():
        if not (0 <= row < n and 0 <= l < num_subframes):
            raise DomainError(f"grant {row} -> {l} outside the reduced matrix {rcm.shape}")
        lifted[row] = (int(l), int(rcm.argmax[row, l]))
    return lifted
