"""Compiled jump-process kernels.

All kernels take an explicit ``numpy.random.Generator`` and never touch global
random state.  Status codes shared by the kernels:

    0  stop rule triggered
    1  population extinct / target unreachable before the rule triggered
    2  event cap exceeded
"""

import math

import numpy as np
from numba import njit

STATUS_REACHED = 0
STATUS_UNREACHED = 1
STATUS_CAP = 2

RULE_TIME = 0
RULE_WILDTYPE = 1
RULE_TOTAL = 2


@njit(cache=True)
def _grow_f(arr, n):
    out = np.empty(max(2 * arr.shape[0], n), dtype=arr.dtype)
    out[: arr.shape[0]] = arr
    return out


@njit(cache=True)
def _grow_i(arr, n):
    out = np.empty(max(2 * arr.shape[0], n), dtype=arr.dtype)
    out[: arr.shape[0]] = arr
    return out


@njit(cache=True)
def bd_transition(alpha, beta, t):
    """Return ``(P[Y(t)=0], 1-b)`` for a linear birth-death process from one cell.

    Given survival, Y(t) is geometric on {1, 2, ...} with success probability
    ``1-b``.
    """
    lam = alpha - beta
    x = lam * t
    if abs(x) < 1e-8:
        h = t * (1.0 - 0.5 * x)
        g = t * (1.0 + 0.5 * x)
        ex = 1.0 + x
    else:
        h = -math.expm1(-x) / lam
        g = math.expm1(x) / lam
        ex = math.exp(x) if x < 700.0 else math.inf
    bh = beta * h
    if math.isinf(bh):
        p0 = 1.0
    else:
        p0 = bh / (1.0 + bh)
    one_minus_b = 1.0 / (ex + beta * g)
    return p0, one_minus_b


@njit(cache=True)
def sample_bd_size(rng, alpha, beta, t):
    """Exact draw of Y(t) for a birth-death process with Y(0)=1."""
    if t <= 0.0 or (alpha == 0.0 and beta == 0.0):
        return 1
    p0, s = bd_transition(alpha, beta, t)
    if rng.random() < p0:
        return 0
    if s >= 1.0:
        return 1
    if s <= 0.0:
        # b == 1 only in the t -> infinity limit
        return np.iinfo(np.int64).max
    u = 1.0 - rng.random()
    k = 1.0 + math.floor(math.log(u) / math.log1p(-s))
    if k > 9.0e18:
        return np.iinfo(np.int64).max
    return np.int64(k)


@njit(cache=True)
def bd_path(rng, alpha, beta, init, t_max, n_target, max_events):
    """Exact birth-death path.  ``n_target < 0`` disables the size horizon."""
    cap = 1024
    times = np.empty(cap, dtype=np.float64)
    sizes = np.empty(cap, dtype=np.int64)
    i = init
    t = 0.0
    m = 0
    rate = alpha + beta
    if n_target >= 0 and i >= n_target:
        return STATUS_REACHED, times[:0], sizes[:0], 0.0
    while True:
        if i == 0:
            return STATUS_UNREACHED, times[:m], sizes[:m], t
        total = i * rate
        if total == 0.0:
            if math.isinf(t_max):
                return STATUS_CAP, times[:m], sizes[:m], t
            return STATUS_REACHED, times[:m], sizes[:m], t_max
        dt = rng.exponential(1.0 / total)
        if t + dt > t_max:
            return STATUS_REACHED, times[:m], sizes[:m], t_max
        if m >= max_events:
            return STATUS_CAP, times[:m], sizes[:m], t
        t += dt
        if rng.random() * rate < alpha:
            i += 1
        else:
            i -= 1
        if m >= times.shape[0]:
            times = _grow_f(times, m + 1)
            sizes = _grow_i(sizes, m + 1)
        times[m] = t
        sizes[m] = i
        m += 1
        if n_target >= 0 and i >= n_target:
            return STATUS_REACHED, times[:m], sizes[:m], t


@njit(cache=True)
def two_type(rng, alpha_a, beta_a, nu, alpha_b, beta_b, a0, rule, t_max, n_target, max_events):
    """Exact (A, B) jump simulation with clone attribution.

    Mutant events run on the aggregate clock j*(alpha_b+beta_b); the affected
    clone is the clone of a uniformly chosen mutant cell, i.e. chosen
    proportionally to clone size.

    Returns ``(status, stop_time, A, B, origins, clone_sizes, events)``.
    """
    cell_cap = 256
    cells = np.empty(cell_cap, dtype=np.int64)
    clone_cap = 64
    origins = np.empty(clone_cap, dtype=np.float64)
    csize = np.empty(clone_cap, dtype=np.int64)
    a = np.int64(a0)
    b = np.int64(0)
    k = 0
    t = 0.0
    events = 0
    wa = alpha_a + beta_a + nu
    wb = alpha_b + beta_b
    if rule == RULE_WILDTYPE and a >= n_target:
        return STATUS_REACHED, 0.0, a, b, origins[:0], csize[:0], 0
    if rule == RULE_TOTAL and a + b >= n_target:
        return STATUS_REACHED, 0.0, a, b, origins[:0], csize[:0], 0
    while True:
        if rule == RULE_WILDTYPE and a == 0:
            return STATUS_UNREACHED, t, a, b, origins[:k], csize[:k], events
        if a == 0 and b == 0:
            status = STATUS_REACHED if rule == RULE_TIME else STATUS_UNREACHED
            return status, t_max if rule == RULE_TIME else t, a, b, origins[:k], csize[:k], events
        total = a * wa + b * wb
        if total == 0.0:
            if rule == RULE_TIME:
                return STATUS_REACHED, t_max, a, b, origins[:k], csize[:k], events
            return STATUS_UNREACHED, t, a, b, origins[:k], csize[:k], events
        dt = rng.exponential(1.0 / total)
        if rule == RULE_TIME and t + dt > t_max:
            return STATUS_REACHED, t_max, a, b, origins[:k], csize[:k], events
        if events >= max_events:
            return STATUS_CAP, t, a, b, origins[:k], csize[:k], events
        t += dt
        events += 1
        u = rng.random() * total
        if u < a * alpha_a:
            a += 1
        elif u < a * (alpha_a + beta_a):
            a -= 1
        elif u < a * wa:
            if k >= origins.shape[0]:
                origins = _grow_f(origins, k + 1)
                csize = _grow_i(csize, k + 1)
            origins[k] = t
            csize[k] = 1
            if b >= cells.shape[0]:
                cells = _grow_i(cells, b + 1)
            cells[b] = k
            k += 1
            b += 1
        else:
            idx = np.int64(rng.random() * b)
            if idx >= b:
                idx = b - 1
            c = cells[idx]
            if u < a * wa + b * alpha_b:
                if b >= cells.shape[0]:
                    cells = _grow_i(cells, b + 1)
                cells[b] = c
                b += 1
                csize[c] += 1
            else:
                b -= 1
                cells[idx] = cells[b]
                csize[c] -= 1
        if rule == RULE_WILDTYPE:
            if a >= n_target:
                return STATUS_REACHED, t, a, b, origins[:k], csize[:k], events
        elif rule == RULE_TOTAL:
            if a + b >= n_target:
                return STATUS_REACHED, t, a, b, origins[:k], csize[:k], events


@njit(cache=True)
def yule_b_tau(rng, alpha_a, nu, alpha_b, beta_b, n):
    """B(tau_n) from n-1 exponential cell ages with Poisson mutation counts."""
    total = np.int64(0)
    for _ in range(n - 1):
        xi = rng.exponential(1.0 / alpha_a)
        if nu == 0.0:
            continue
        kk = rng.poisson(nu * xi)
        for _ in range(kk):
            total += sample_bd_size(rng, alpha_b, beta_b, rng.random() * xi)
    return total


@njit(cache=True)
def multisite(rng, a, b, mu, n_sites, c0, rule, t_max, n_target, max_events):
    """Exact multiple-site neutral model over cells labelled by genotype id.

    Returns ``(status, stop_time, cell_genotypes, genotype_table, divisions,
    deaths)``; ``genotype_table`` rows are little-endian bit words.
    """
    n_words = (n_sites + 63) // 64
    gcap = 64
    table = np.zeros((gcap, n_words), dtype=np.uint64)
    n_mut = np.zeros(gcap, dtype=np.int64)
    n_geno = 1
    ccap = max(256, 2 * c0)
    cells = np.zeros(ccap, dtype=np.int64)
    pop = np.int64(c0)
    t = 0.0
    divisions = 0
    deaths = 0
    scratch = np.empty(n_sites, dtype=np.int64)
    rate = a + b
    if rule == RULE_TOTAL and pop >= n_target:
        return STATUS_REACHED, 0.0, cells[:pop], table[:n_geno], 0, 0
    while True:
        if pop == 0:
            status = STATUS_REACHED if rule == RULE_TIME else STATUS_UNREACHED
            return status, t_max if rule == RULE_TIME else t, cells[:0], table[:n_geno], divisions, deaths
        total = pop * rate
        if total == 0.0:
            status = STATUS_REACHED if rule == RULE_TIME else STATUS_UNREACHED
            return status, t_max if rule == RULE_TIME else t, cells[:pop], table[:n_geno], divisions, deaths
        dt = rng.exponential(1.0 / total)
        if rule == RULE_TIME and t + dt > t_max:
            return STATUS_REACHED, t_max, cells[:pop], table[:n_geno], divisions, deaths
        if divisions + deaths >= max_events:
            return STATUS_CAP, t, cells[:pop], table[:n_geno], divisions, deaths
        t += dt
        idx = np.int64(rng.random() * pop)
        if idx >= pop:
            idx = pop - 1
        g = cells[idx]
        if rng.random() * rate < a:
            divisions += 1
            free = n_sites - n_mut[g]
            m = 0
            if mu > 0.0 and free > 0:
                m = rng.binomial(free, mu)
            if pop >= cells.shape[0]:
                cells = _grow_i(cells, pop + 1)
            if m == 0:
                cells[pop] = g
                pop += 1
            else:
                # unmutated sites of the parent, then a partial shuffle
                nf = 0
                for s in range(n_sites):
                    w = s >> 6
                    bit = np.uint64(1) << np.uint64(s & 63)
                    if table[g, w] & bit == 0:
                        scratch[nf] = s
                        nf += 1
                for j in range(m):
                    r = j + np.int64(rng.random() * (nf - j))
                    if r >= nf:
                        r = nf - 1
                    tmp = scratch[j]
                    scratch[j] = scratch[r]
                    scratch[r] = tmp
                if n_geno + 2 > table.shape[0]:
                    new_cap = 2 * table.shape[0]
                    nt = np.zeros((new_cap, n_words), dtype=np.uint64)
                    nt[:n_geno] = table[:n_geno]
                    table = nt
                    nm = np.zeros(new_cap, dtype=np.int64)
                    nm[:n_geno] = n_mut[:n_geno]
                    n_mut = nm
                d1 = n_geno
                d2 = n_geno + 1
                table[d1] = table[g]
                table[d2] = table[g]
                n_mut[d1] = n_mut[g]
                n_mut[d2] = n_mut[g]
                got1 = 0
                got2 = 0
                for j in range(m):
                    s = scratch[j]
                    w = s >> 6
                    bit = np.uint64(1) << np.uint64(s & 63)
                    if rng.random() < 0.5:
                        table[d1, w] |= bit
                        n_mut[d1] += 1
                        got1 += 1
                    else:
                        table[d2, w] |= bit
                        n_mut[d2] += 1
                        got2 += 1
                id1 = g
                id2 = g
                if got1 > 0:
                    id1 = n_geno
                    n_geno += 1
                if got2 > 0:
                    if got1 > 0:
                        id2 = n_geno
                        n_geno += 1
                    else:
                        table[d1] = table[d2]
                        n_mut[d1] = n_mut[d2]
                        id2 = n_geno
                        n_geno += 1
                cells[idx] = id1
                cells[pop] = id2
                pop += 1
        else:
            deaths += 1
            pop -= 1
            cells[idx] = cells[pop]
        if rule == RULE_TOTAL and pop >= n_target:
            return STATUS_REACHED, t, cells[:pop], table[:n_geno], divisions, deaths


@njit(cache=True)
def site_counts(cells, table, n_sites):
    """Number of cells carrying each site's mutation."""
    n_geno = table.shape[0]
    per_geno = np.zeros(n_geno, dtype=np.int64)
    for c in cells:
        per_geno[c] += 1
    out = np.zeros(n_sites, dtype=np.int64)
    for g in range(n_geno):
        if per_geno[g] == 0:
            continue
        for s in range(n_sites):
            if table[g, s >> 6] & (np.uint64(1) << np.uint64(s & 63)):
                out[s] += per_geno[g]
    return out
