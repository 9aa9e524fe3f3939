"""Compiled event loops.

Each kernel seeds numba's generator from a 32-bit seed and then draws, for
every block found, an exponential waiting time followed by a uniform that
decides whether the attacker (probability q) or the honest network found it.
"""

import numpy as np
from numba import njit

HONEST = 0
SELFISH = 1
LEAD_STUBBORN = 2
EQUAL_FORK_STUBBORN = 3
A_TRAILING = 4

# returned by trial kernels when the output buffers are too small
BUFFER_FULL = -1


@njit(cache=True, nogil=True)
def _selfish_cycle(q, g, scale, t):
    # entered after the attacker found the first block of the cycle
    a = 1
    h = 0
    na = 1
    nh = 0
    while True:
        t += np.random.exponential(scale)
        if np.random.random() < q:
            a += 1
            na += 1
        else:
            h += 1
            nh += 1
        if a == 1 and h == 1:
            # one-block tie: the next block decides
            t += np.random.exponential(scale)
            if np.random.random() < q:
                return t, 2, 2, na + 1, nh
            if np.random.random() < g:
                return t, 2, 1, na, nh + 1
            return t, 2, 0, na, nh + 1
        if a >= 2 and a - h == 1:
            return t, a, a, na, nh


@njit(cache=True, nogil=True)
def _stubborn_cycle(kind, A, q, g, scale, t):
    # a, h: private and honest branch lengths beyond the last secured block
    a = 1
    h = 0
    na = 1
    nh = 0
    Z = 0
    L = 0
    while True:
        t += np.random.exponential(scale)
        if np.random.random() < q:
            a += 1
            na += 1
        else:
            nh += 1
            if h >= 1 and np.random.random() < g:
                # honest block on the attacker's published branch secures it
                Z += h
                L += h
                a -= h
                h = 1
            else:
                h += 1
        if kind == EQUAL_FORK_STUBBORN:
            if a == h - 1:
                return t, L + h, Z, na, nh
            continue
        if a == h:
            break

    # final race from a tie; gg is the share of honest power on the attacker's tip
    gg = g
    while True:
        t += np.random.exponential(scale)
        if np.random.random() < q:
            na += 1
            return t, L + a + 1, Z + a + 1, na, nh
        nh += 1
        if gg > 0.0 and np.random.random() < gg:
            return t, L + a + 1, Z + a, na, nh
        h += 1
        if kind == LEAD_STUBBORN or A <= 1:
            return t, L + h, Z, na, nh
        # trailing: keep mining the private branch until A behind or level again
        while True:
            t += np.random.exponential(scale)
            if np.random.random() < q:
                a += 1
                na += 1
                if a == h:
                    break
            else:
                h += 1
                nh += 1
                if h - a >= A:
                    return t, L + h, Z, na, nh
        # a tie reached from behind: honest nodes keep the tip they saw first
        gg = 0.0


@njit(cache=True, nogil=True)
def strategy_cycle(kind, A, q, g, scale):
    """One attack cycle: (duration, official blocks, attacker official blocks, attacker found, honest found)."""
    t = np.random.exponential(scale)
    if np.random.random() >= q:
        return t, 1, 0, 0, 1
    if kind == HONEST:
        return t, 1, 1, 1, 0
    if kind == SELFISH:
        return _selfish_cycle(q, g, scale, t)
    return _stubborn_cycle(kind, A, q, g, scale, t)


@njit(cache=True, nogil=True)
def strategy_trial(kind, A, q, g, tau0, adjust, window, max_cycles, sim_time, seed,
                   dur, off, att, found, epoch):
    """Run cycles until ``max_cycles`` (if > 0) or ``sim_time`` (if > 0) is reached.

    With ``adjust`` the rate scale is retargeted at the first cycle boundary
    after ``window`` official blocks: it is multiplied by measured/target time.
    Returns the number of cycles stored, or BUFFER_FULL.
    """
    np.random.seed(seed)
    rate = 1.0
    now = 0.0
    ep = 0
    ep_blocks = 0
    ep_start = 0.0
    cap = dur.shape[0]
    n = 0
    while max_cycles <= 0 or n < max_cycles:
        d, L, Z, na, nh = strategy_cycle(kind, A, q, g, tau0 / rate)
        if sim_time > 0.0 and now + d > sim_time:
            break
        if n >= cap:
            return BUFFER_FULL
        now += d
        dur[n] = d
        off[n] = L
        att[n] = Z
        found[n] = na + nh
        epoch[n] = ep
        n += 1
        if adjust:
            ep_blocks += L
            if ep_blocks >= window:
                rate *= (now - ep_start) / (ep_blocks * tau0)
                ep += 1
                ep_blocks = 0
                ep_start = now
    return n


@njit(cache=True, nogil=True)
def double_spend_attempt(q, z, A, tau0):
    """One premine-and-race attempt.

    Returns (duration, official blocks, attacker official blocks, blocks found,
    success, hit_cap). ``A`` is the abandonment deficit.
    """
    t = 0.0
    found = 0
    premine_honest = 0
    while True:
        t += np.random.exponential(tau0)
        found += 1
        if np.random.random() < q:
            break
        premine_honest += 1
    x = 0
    hc = 0
    while hc < z:
        t += np.random.exponential(tau0)
        found += 1
        if np.random.random() < q:
            x += 1
        else:
            hc += 1
    if x >= z:
        return t, premine_honest + z + 1, x + 1, found, 1, 0
    # deficit = honest chain + 1 - private chain
    d = z - x
    m = 0
    while 0 < d < A:
        t += np.random.exponential(tau0)
        found += 1
        if np.random.random() < q:
            d -= 1
        else:
            d += 1
            m += 1
    if d == 0:
        return t, premine_honest + z + m + 1, z + m + 1, found, 1, 0
    return t, premine_honest + z + m, 0, found, 0, 1


@njit(cache=True, nogil=True)
def double_spend_trial(q, z, A, tau0, max_cycles, sim_time, seed,
                       dur, off, att, found, success, capped):
    np.random.seed(seed)
    cap = dur.shape[0]
    now = 0.0
    n = 0
    while max_cycles <= 0 or n < max_cycles:
        d, L, Z, nf, ok, hit = double_spend_attempt(q, z, A, tau0)
        if sim_time > 0.0 and now + d > sim_time:
            break
        if n >= cap:
            return BUFFER_FULL
        now += d
        dur[n] = d
        off[n] = L
        att[n] = Z
        found[n] = nf
        success[n] = ok
        capped[n] = hit
        n += 1
    return n


@njit(cache=True, nogil=True)
def poisson_race_chunk(alpha, alpha_prime, count, seed, sigma, n_att, n_hon):
    """Stopping time of N(t) = N'(t) + 1 for ``count`` independent races."""
    np.random.seed(seed)
    total = alpha + alpha_prime
    scale = 1.0 / total
    share = alpha_prime / total
    for i in range(count):
        t = 0.0
        na = 0
        nh = 0
        while nh != na + 1:
            t += np.random.exponential(scale)
            if np.random.random() < share:
                na += 1
            else:
                nh += 1
        sigma[i] = t
        n_att[i] = na
        n_hon[i] = nh
