"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Same control flow and floating-point operation order as the Cython code, so
both backends agree to rounding on identical inputs.
"""
from math import log

import numpy as np

TINY = 1e-300


def blackwell_filter(E, p0, uniforms, burn_in):
    """Run the Blackwell filter driven by pre-drawn uniforms.

    Returns ``(hvals, restarts, max_mass_dev)``; ``restarts == -1`` flags a
    filter that emits nothing from its initial vector.
    """
    E = np.ascontiguousarray(E, dtype=np.float64)
    n_obs, dh = E.shape[0], E.shape[1]
    Em = E.tolist()
    start = [float(x) for x in p0]
    us = np.asarray(uniforms, dtype=np.float64).tolist()
    steps = len(us)
    burn_in = min(int(burn_in), steps)
    hvals = [0.0] * (steps - burn_in)
    p = list(start)
    restarts = 0
    max_dev = 0.0
    fresh = True
    obs = range(n_obs)
    hid = range(dh)
    t = 0
    while t < steps:
        v = []
        q = []
        qsum = 0.0
        for e in obs:
            Ee = Em[e]
            acc = 0.0
            row = []
            for j in hid:
                x = 0.0
                for i in hid:
                    x = x + p[i] * Ee[i][j]
                row.append(x)
                acc = acc + x
            v.append(row)
            q.append(acc)
            qsum = qsum + acc
        if qsum <= TINY:
            if fresh:
                return np.array(hvals), -1, max_dev
            restarts += 1
            fresh = True
            p = list(start)
            continue
        if t >= burn_in:
            h = 0.0
            for e in obs:
                if q[e] > 0.0:
                    x = q[e] / qsum
                    h = h - x * log(x)
            hvals[t - burn_in] = h
        target = us[t] * qsum
        pick = n_obs - 1
        acc = 0.0
        for e in obs:
            acc = acc + q[e]
            if target < acc:
                pick = e
                break
        while pick > 0 and q[pick] <= 0.0:
            pick -= 1
        mass = q[pick]
        row = v[pick]
        acc = 0.0
        for j in hid:
            p[j] = row[j] / mass
            acc = acc + p[j]
        dev = abs(acc - 1.0)
        if dev > max_dev:
            max_dev = dev
        fresh = False
        t += 1
    return np.array(hvals), restarts, max_dev
