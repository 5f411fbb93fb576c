"""Pure numpy implementation of the Monte Carlo kernels.

Mirrors ``_ckernels.pyx`` operation for operation (same products in the
same order, same comparisons), so both backends return identical results
for identical inputs.

Shared layout:

* ``cum[h, b, :]`` is the cumulative outcome distribution of probe ``b``
  under hypothesis ``h``; its last entry is exactly 1.0.
* A trial with ``T`` shots walks a prefix tree. The probe used at shot ``t``
  is ``next_probe[offsets[t] + prefix]`` where ``prefix`` is the base-``n``
  index of the outcomes seen so far (first shot most significant).
* ``ok[h, idx]`` is 1 when the full outcome tuple ``idx`` counts as a
  success under hidden hypothesis ``h``.
"""

import numpy as np


def run_trials(cum, next_probe, offsets, ok, hidden, uniforms):
    """Number of successful trials."""
    n = cum.shape[2]
    shots = uniforms.shape[1]
    idx = np.zeros(hidden.shape[0], dtype=np.int64)
    for t in range(shots):
        b = next_probe[offsets[t] + idx]
        row = cum[hidden, b, :]
        k = (uniforms[:, t, None] >= row).sum(axis=1)
        np.minimum(k, n - 1, out=k)
        idx = idx * n + k
    return int(ok[hidden, idx].sum(dtype=np.int64))


def map_decisions(lik, next_probe, offsets, shots, rel_tie):
    """MAP hypothesis for every outcome tuple.

    Likelihood of ``h`` is the product over shots of ``lik[h, b_t, k_t]``;
    the smallest ``h`` within relative ``rel_tie`` of the best wins.
    Impossible tuples (all likelihoods zero) map to hypothesis 0.
    """
    n = lik.shape[2]
    total = n ** shots
    tuples = np.arange(total, dtype=np.int64)
    like = np.ones((total, lik.shape[0]))
    prefix = np.zeros(total, dtype=np.int64)
    for t in range(shots):
        k = (tuples // n ** (shots - 1 - t)) % n
        b = next_probe[offsets[t] + prefix]
        like = like * lik[:, b, k].T
        prefix = prefix * n + k
    best = like.max(axis=1)
    return np.argmax(like >= (best * (1.0 - rel_tie))[:, None], axis=1).astype(np.int64)
