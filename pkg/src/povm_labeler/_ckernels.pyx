# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo kernels. See ``_pykernels`` for the array layout."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def run_trials(const double[:, :, ::1] cum, const long long[::1] next_probe,
               const long long[::1] offsets, const unsigned char[:, ::1] ok,
               const long long[::1] hidden, const double[:, ::1] uniforms):
    cdef Py_ssize_t m = hidden.shape[0]
    cdef Py_ssize_t shots = uniforms.shape[1]
    cdef Py_ssize_t n = cum.shape[2]
    cdef Py_ssize_t i, t, k, b, h
    cdef long long idx, successes = 0
    cdef double u
    with nogil:
        for i in range(m):
            h = hidden[i]
            idx = 0
            for t in range(shots):
                b = next_probe[offsets[t] + idx]
                u = uniforms[i, t]
                k = 0
                while k < n - 1 and u >= cum[h, b, k]:
                    k += 1
                idx = idx * n + k
            successes += ok[h, idx]
    return int(successes)


def map_decisions(const double[:, :, ::1] lik, const long long[::1] next_probe,
                  const long long[::1] offsets, int shots, double rel_tie):
    cdef Py_ssize_t n = lik.shape[2]
    cdef Py_ssize_t n_hyp = lik.shape[0]
    cdef Py_ssize_t total = 1
    cdef Py_ssize_t t, h, idx, rem, k, b, prefix, place
    for t in range(shots):
        total *= n
    out = np.zeros(total, dtype=np.int64)
    cdef long long[::1] out_v = out
    cdef long long[::1] ks = np.zeros(max(shots, 1), dtype=np.int64)
    cdef long long[::1] bs = np.zeros(max(shots, 1), dtype=np.int64)
    cdef double[::1] like = np.zeros(n_hyp)
    cdef double best, cut, val
    with nogil:
        for idx in range(total):
            rem = idx
            place = total
            prefix = 0
            for t in range(shots):
                place = place // n
                k = rem // place
                rem = rem - k * place
                ks[t] = k
                bs[t] = next_probe[offsets[t] + prefix]
                prefix = prefix * n + k
            best = 0.0
            for h in range(n_hyp):
                val = 1.0
                for t in range(shots):
                    val = val * lik[h, bs[t], ks[t]]
                like[h] = val
                if h == 0 or val > best:
                    best = val
            cut = best * (1.0 - rel_tie)
            for h in range(n_hyp):
                if like[h] >= cut:
                    out_v[idx] = h
                    break
    return out
