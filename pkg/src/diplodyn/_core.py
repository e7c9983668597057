"""Compiled event-loop kernels for the exact stochastic simulations.

The population state is grouped by genotype: counts n[i] with per-genotype
fertility f[i], background death D[i], and competition matrix C[i, j]
(felt by i from j). The genotype support is tiny even when N is large, so
each event costs O(m) with incrementally maintained aggregate rates:

    F  = sum_i n_i f_i          (total fertility)
    Q  = sum_i n_i f_i^2
    SD = sum_i n_i D_i
    L_i = sum_j C_ij n_j        (competition load per genotype)

    birth_total = (F^2 - Q) / F     # ordered mating pairs with j != i
    death_total = SD + <n, L> / K   # competition sums include the focal

Randomness comes from an explicit splitmix64 stream so runs are exactly
reproducible, including when the kernels execute without compilation
(via the .py_func fallback in tests).

The genotype tables cover only realized genotypes. A birth that needs a
genotype row not seen before, or a mutant birth that introduces a new
allele, suspends the kernel so the Python layer can extend the tables.
"""

import numpy as np
from numba import njit

# epoch exit codes
HORIZON = 0
EXTINCT = 1
STOP_LOW = 2
STOP_HIGH = 3
MUTATION = 4
BUDGET = 5
RATE_MISMATCH = 6
NEW_GENOTYPE = 7
STOP2_LOW = 8
STOP2_HIGH = 9

_G = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0  # 2^-53


@njit(cache=True, nogil=True, inline="always")
def _u01(state):
    """Uniform double in [0, 1) from a splitmix64 counter state."""
    state[0] += _G
    z = state[0]
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    z = z ^ (z >> _S31)
    return float(z >> _S11) * _INV53


@njit(cache=True, nogil=True)
def gillespie_epoch(n, f, D, C, gall, pair_idx, K, mu, t, t_end,
                    rec_times, rec_out, rec_pos,
                    stop_w, stop_lo, stop_hi, use_stop,
                    stop_w2, stop_lo2, stop_hi2, use_stop2,
                    death_jitter, max_events, check_every, rng):
    """Run the exact jump chain until the horizon or a structural event.

    Returns (status, t, events, rec_pos, mother, father, allele_m,
    allele_p, slot); the last five are meaningful only for MUTATION, whose
    birth is NOT yet applied to `n`.
    """
    m = n.shape[0]
    nrec = rec_times.shape[0]
    N = 0
    F = 0.0
    Q = 0.0
    SD = 0.0
    L = np.zeros(m)
    for i in range(m):
        N += n[i]
        F += n[i] * f[i]
        Q += n[i] * f[i] * f[i]
        SD += n[i] * D[i]
        for j in range(m):
            L[i] += C[i, j] * n[j]

    events = 0
    since_check = 0
    status = HORIZON
    mother = father = allele_m = allele_p = slot = -1

    while True:
        if N <= 0:
            status = EXTINCT
            break
        dot_nl = 0.0
        for i in range(m):
            dot_nl += n[i] * L[i]
        death_total = SD + dot_nl / K
        xi = 0.0
        if death_jitter > 0.0:
            xi = (2.0 * _u01(rng) - 1.0) * death_jitter
            jit_tot = 0.0
            for i in range(m):
                w = n[i] * (D[i] + L[i] / K + xi)
                if w > 0.0:
                    jit_tot += w
            death_total = jit_tot
        birth_total = 0.0
        if F > 0.0:
            birth_total = (F * F - Q) / F
            if birth_total < 0.0:
                birth_total = 0.0
        total = birth_total + death_total
        if total <= 0.0:
            # frozen state; jump straight to the horizon
            while rec_pos < nrec and rec_times[rec_pos] <= t_end:
                for i in range(m):
                    rec_out[rec_pos, i] = n[i]
                rec_pos += 1
            t = t_end
            status = HORIZON
            break

        wait = -np.log(1.0 - _u01(rng)) / total
        t_next = t + wait
        while rec_pos < nrec and rec_times[rec_pos] <= t_next \
                and rec_times[rec_pos] <= t_end:
            for i in range(m):
                rec_out[rec_pos, i] = n[i]
            rec_pos += 1
        if t_next >= t_end:
            t = t_end
            status = HORIZON
            break
        t = t_next

        if _u01(rng) * total < birth_total:
            # mother ~ n_a f_a (F - f_a); father ~ f_b (n_b - [b == a])
            r = _u01(rng) * (F * F - Q)
            acc = 0.0
            a = m - 1
            for i in range(m):
                acc += n[i] * f[i] * (F - f[i])
                if r < acc:
                    a = i
                    break
            r = _u01(rng) * (F - f[a])
            acc = 0.0
            b = m - 1
            for j in range(m):
                cnt = n[j] - (1 if j == a else 0)
                if cnt > 0:
                    acc += f[j] * cnt
                    if r < acc:
                        b = j
                        break
            am = gall[a, 0] if _u01(rng) < 0.5 else gall[a, 1]
            ap = gall[b, 0] if _u01(rng) < 0.5 else gall[b, 1]
            if mu > 0.0 and _u01(rng) < mu:
                mother, father, allele_m, allele_p = a, b, am, ap
                slot = 0 if _u01(rng) < 0.5 else 1
                status = MUTATION
                break
            c = pair_idx[am, ap]
            if c < 0:
                # first occurrence of this allele pairing: the support
                # tables must grow before the birth can be applied
                mother, father, allele_m, allele_p = a, b, am, ap
                status = NEW_GENOTYPE
                break
            n[c] += 1
            N += 1
            F += f[c]
            Q += f[c] * f[c]
            SD += D[c]
            for i in range(m):
                L[i] += C[i, c]
        else:
            r = _u01(rng) * death_total
            acc = 0.0
            a = m - 1
            for i in range(m):
                w = n[i] * (D[i] + L[i] / K + xi)
                if w > 0.0:
                    acc += w
                    if r < acc:
                        a = i
                        break
            n[a] -= 1
            N -= 1
            F -= f[a]
            Q -= f[a] * f[a]
            SD -= D[a]
            for i in range(m):
                L[i] -= C[i, a]

        events += 1
        since_check += 1

        if N <= 0:
            status = EXTINCT
            break
        if use_stop != 0:
            ws = 0.0
            for i in range(m):
                ws += stop_w[i] * n[i]
            if ws <= stop_lo:
                status = STOP_LOW
                break
            if ws >= stop_hi:
                status = STOP_HIGH
                break
        if use_stop2 != 0:
            ws = 0.0
            for i in range(m):
                ws += stop_w2[i] * n[i]
            if ws <= stop_lo2:
                status = STOP2_LOW
                break
            if ws >= stop_hi2:
                status = STOP2_HIGH
                break
        if events >= max_events:
            status = BUDGET
            break
        if check_every > 0 and since_check >= check_every:
            since_check = 0
            # totals implied by the incrementally maintained aggregates
            dot_inc = 0.0
            for i in range(m):
                dot_inc += n[i] * L[i]
            d_inc = SD + dot_inc / K
            b_inc = (F * F - Q) / F if F > 0.0 else 0.0
            # from-scratch recomputation
            F2 = 0.0
            Q2 = 0.0
            SD2 = 0.0
            for i in range(m):
                F2 += n[i] * f[i]
                Q2 += n[i] * f[i] * f[i]
                SD2 += n[i] * D[i]
            dot2 = 0.0
            for i in range(m):
                Li = 0.0
                for j in range(m):
                    Li += C[i, j] * n[j]
                L[i] = Li
                dot2 += n[i] * Li
            d2 = SD2 + dot2 / K
            b2 = (F2 * F2 - Q2) / F2 if F2 > 0.0 else 0.0
            scale = max(1.0, abs(b2) + abs(d2))
            if abs(b2 - b_inc) + abs(d2 - d_inc) > 1e-9 * scale:
                status = RATE_MISMATCH
                break
            F, Q, SD = F2, Q2, SD2

    return status, t, events, rec_pos, mother, father, allele_m, allele_p, slot


@njit(cache=True, nogil=True)
def m1_scan(ts, xs, delta):
    """Discrete sup over windows [t_i, t_k] with t_k - t_i <= delta of the
    distance from interior samples to the interval [x_i, x_k].

    For each admissible pair the interior extrema are maintained
    incrementally, so a window of w samples costs O(w) instead of O(w^2).
    """
    n = ts.shape[0]
    worst = 0.0
    for i in range(n):
        wmin = xs[i]
        wmax = xs[i]
        for k in range(i, n):
            if ts[k] - ts[i] > delta:
                break
            if xs[k] < wmin:
                wmin = xs[k]
            if xs[k] > wmax:
                wmax = xs[k]
            lo = xs[i] if xs[i] < xs[k] else xs[k]
            hi = xs[i] if xs[i] > xs[k] else xs[k]
            d = lo - wmin
            if wmax - hi > d:
                d = wmax - hi
            if d > worst:
                worst = d
    return worst


@njit(cache=True, nogil=True)
def branching_run(y0, z0, birth_y, birth_z, death_y, death_z,
                  threshold, max_events, rng):
    """Embedded chain of the bi-type linear birth-death process.

    Type y gives birth to y at rate birth_y * y + birth_z * z; type z has
    no births of its own at the reference (epsilon = 0) rates. Returns
    (status, events) with status EXTINCT, STOP_HIGH (threshold reached) or
    BUDGET.
    """
    y = y0
    z = z0
    events = 0
    while events < max_events:
        if y + z <= 0:
            return EXTINCT, events
        if y + z >= threshold:
            return STOP_HIGH, events
        by = birth_y * y + birth_z * z
        dy = death_y * y
        dz = death_z * z
        r = _u01(rng) * (by + dy + dz)
        if r < by:
            y += 1
        elif r < by + dy:
            y -= 1
        else:
            z -= 1
        events += 1
    return BUDGET, events
