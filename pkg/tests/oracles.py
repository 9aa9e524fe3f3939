"""Independent reference computations used by the tests.

The strategy oracles solve the expected attacker and official block counts of
one attack cycle as sparse linear systems over the (private, honest) branch
lengths, truncated at a large branch length. With difficulty adjustment the
long-run revenue ratio over honest mining is E[Z] / (q E[L]).
"""

import math

import mpmath
import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spl
from scipy import special
from scipy.special import comb

mpmath.mp.dps = 40


# mpmath's hypergeometric sums give up for very large shapes; scipy (an
# unrelated implementation) is the fallback there


def mp_betainc(x, a, b):
    try:
        return float(mpmath.betainc(a, b, 0, x, regularized=True))
    except (mpmath.libmp.NoConvergence, ValueError):
        return float(special.betainc(a, b, x))


def mp_gammaQ(s, x):
    try:
        return float(mpmath.gammainc(s, x, mpmath.inf, regularized=True))
    except (mpmath.libmp.NoConvergence, ValueError):
        return float(special.gammaincc(s, x))


def mp_loggamma(a):
    return float(mpmath.loggamma(a))


class _Chain:
    """Expected additive rewards until absorption, built transition by transition."""

    def __init__(self):
        self.index = {}
        self.rows, self.cols, self.vals = [], [], []
        self.bz, self.bl = {}, {}

    def state(self, s):
        if s not in self.index:
            self.index[s] = len(self.index)
        return self.index[s]

    def solve(self, start):
        n = len(self.index)
        m = sp.csr_matrix((self.vals, (self.rows, self.cols)), shape=(n, n))
        bz = np.zeros(n)
        bl = np.zeros(n)
        for k, v in self.bz.items():
            bz[k] = v
        for k, v in self.bl.items():
            bl[k] = v
        i = self.index[start]
        return spl.spsolve(m, bz)[i], spl.spsolve(m, bl)[i]


def _explore(start, step, limit):
    ch = _Chain()
    todo = [start]
    seen = set()
    while todo:
        s = todo.pop()
        if s in seen:
            continue
        seen.add(s)
        i = ch.state(s)
        ch.rows.append(i)
        ch.cols.append(i)
        ch.vals.append(1.0)
        for target, pr, z, l in step(s):
            ch.bz[i] = ch.bz.get(i, 0.0) + pr * z
            ch.bl[i] = ch.bl.get(i, 0.0) + pr * l
            if target is None or target[1] > limit:
                continue
            ch.rows.append(i)
            ch.cols.append(ch.state(target))
            ch.vals.append(-pr)
            todo.append(target)
    return ch


def _default_limit(q):
    # branch lengths beyond this are reached with probability below ~lam^limit
    return int(45.0 / -math.log(q / (1.0 - q))) + 20


def _ratio(q, ez_after, el_after):
    p = 1.0 - q
    ez = q * ez_after
    el = p + q * el_after
    return ez / el / q


def selfish_exact(q, g, limit=None):
    """Revenue ratio of selfish mining (equals q'/q)."""
    p = 1.0 - q
    limit = limit or _default_limit(q)

    # state = private lead; every block mined while ahead by >= 2 ends up
    # official, so it is credited when found
    def step(s):
        k = s[1]
        if k == 1:
            return [(("S", 2), q, 2, 2), (None, p * q, 2, 2), (None, p * p * g, 1, 2),
                    (None, p * p * (1 - g), 0, 2)]
        out = [(("S", k + 1), q, 1, 1)]
        out.append((None, p, 0, 0) if k == 2 else (("S", k - 1), p, 0, 0))
        return out

    ch = _explore(("S", 1), step, 4 * limit)
    return _ratio(q, *ch.solve(("S", 1)))


def stubborn_exact(q, g, kind, A=1, limit=None):
    """Lead-stubborn ('LSM'), equal-fork-stubborn ('EFSM') or A-trailing ('ATM')."""
    p = 1.0 - q
    limit = limit or _default_limit(q)

    def lead(a, h, pr, z, l):
        if kind == "EFSM":
            if a == h - 1:
                return (None, pr, z, l + h)
            return (("L", a, h), pr, z, l)
        if a == h:
            return (("T", a, h, 1), pr, z, l)
        return (("L", a, h), pr, z, l)

    def step(s):
        typ, a, h = s[0], s[1], s[2]
        if typ == "L":
            out = [lead(a + 1, h, q, 0, 0)]
            if h >= 1:
                out.append(lead(a - h, 1, p * g, h, h))
                out.append(lead(a, h + 1, p * (1 - g), 0, 0))
            else:
                out.append(lead(a, h + 1, p, 0, 0))
            return out
        if typ == "T":
            gg = g if s[3] == 1 else 0.0
            out = [(None, q, a + 1, a + 1), (None, p * gg, a, a + 1)]
            if kind == "LSM" or A <= 1:
                out.append((None, p * (1 - gg), 0, h + 1))
            else:
                out.append((("R", a, h + 1), p * (1 - gg), 0, 0))
            return out
        # trailing by h - a < A
        out = []
        if a + 1 == h:
            out.append((("T", a + 1, h, 0), q, 0, 0))
        else:
            out.append((("R", a + 1, h), q, 0, 0))
        if h + 1 - a >= A:
            out.append((None, p, 0, h + 1))
        else:
            out.append((("R", a, h + 1), p, 0, 0))
        return out

    start = ("L", 1, 0)
    ch = _explore(start, step, limit)
    return _ratio(q, *ch.solve(start))


def a_nakamoto_exact(q, z, A, v=0.0, kmax=4000):
    """(success probability, E[revenue]/b, E[duration]/tau0) of the premine-and-race attack.

    Revenue counts the private chain's blocks and v (in coinbases) on success.
    """
    p = 1.0 - q
    n = A + 1
    m = np.eye(n)
    b_succ = np.zeros(n)
    b_time = np.zeros(n)
    b_succ[0] = 1.0
    for d in range(1, A):
        m[d, d - 1] -= q
        m[d, d + 1] -= p
        b_time[d] = 1.0
    succ = np.linalg.solve(m, b_succ)
    steps = np.linalg.solve(m, b_time)
    # expected honest blocks added during the deficit walk, on success only
    b_extra = np.zeros(n)
    for d in range(1, A):
        b_extra[d] = p * succ[d + 1]
    extra = np.linalg.solve(m, b_extra)

    prob = 0.0
    revenue = 0.0
    duration = 1.0 / q + z / p
    for k in range(z):
        pk = p**z * q**k * comb(k + z - 1, k)
        d = z - k
        prob += pk * succ[d]
        duration += pk * steps[d]
        revenue += pk * ((z + 1 + v) * succ[d] + extra[d])
    ks = np.arange(z, kmax)
    logs = np.array([math.lgamma(k + z) - math.lgamma(k + 1) - math.lgamma(z) for k in ks])
    pk = np.exp(z * math.log(p) + ks * math.log(q) + logs)
    prob += pk.sum()
    revenue += ((1 + ks + v) * pk).sum()
    return prob, revenue, duration
