"""Collected reference numbers for the processes implemented in this package."""
from __future__ import annotations

import math

import numpy as np

from .channels import davies_process_condition, davies_validate, qubit_davies
from .classical import entropy_rate_classical
from .fermion import entropy_rate_integral, entropy_rate_truncation, sample_specs
from .su2 import BETHE_BOUND, MODES, optimize_singlet, werner_ppt_threshold

DAVIES_POINTS = ((0.3, 0.1), (0.5, 0.5), (0.8, 0.2), (0.6, 0.0), (0.0, 0.0), (1.0, 0.3))
BOUNDARY_MARGIN = 1e-6


def singlet_table(seed=0) -> dict:
    out = {}
    for mode in MODES:
        r = optimize_singlet(mode, seed=seed)
        out[mode] = {"value": r.value, "argmax": r.argmax}
    return out


def davies_boundary(points=DAVIES_POINTS, margin=BOUNDARY_MARGIN) -> list[dict]:
    """Closed-form qubit boundary ``d**2 = (1 - a)(1 - b) / 2`` probed on both sides."""
    rows = []
    for a, b in points:
        d_star = math.sqrt(0.5 * (1 - a) * (1 - b))
        inside = davies_process_condition(a, b, max(d_star - margin, 0.0))
        outside = davies_process_condition(a, b, d_star + margin)
        # the channel itself is CP up to |d| <= 1 for any valid T
        T, D = qubit_davies(a, b, d_star)
        rows.append(
            {
                "a": a,
                "b": b,
                "d_boundary": d_star,
                "inside_ok": inside,
                "outside_rejected": not outside,
                "channel_cp_at_boundary": davies_validate(T, D).choi_cp,
            }
        )
    return rows


def davies_sdp_comparison(points=DAVIES_POINTS) -> list[dict] | str:
    """Largest compatible damping from a semidefinite program, next to the closed form."""
    try:
        from .channels import max_compatible_damping
        import cvxpy  # noqa: F401
    except ImportError:
        return "cvxpy not installed"
    rows = []
    for a, b in points:
        T, _ = qubit_davies(a, b, 0.0)
        d2 = max_compatible_damping(T) ** 2
        rows.append({"a": a, "b": b, "sdp_d2_max": round(d2, 6), "closed_form_d2": 0.5 * (1 - a) * (1 - b)})
    return rows


def fermion_table(n=300) -> dict:
    out = {}
    for name, spec in sample_specs().items():
        integral = entropy_rate_integral(spec)
        tr = entropy_rate_truncation(spec, [n])
        out[name] = {
            "entropy_rate_integral": integral.value,
            "quadrature_points": integral.points,
            "increment": float(tr.increments[0]),
            "average": float(tr.averages[0]),
            "n": n,
        }
    return out


def full_report(seed=0, include_sdp=False) -> dict:
    T = np.array([[0.7, 0.3], [0.1, 0.9]])
    rate = entropy_rate_classical(T)
    rep = {
        "singlet": singlet_table(seed),
        "singlet_bethe_bound": dict(BETHE_BOUND),
        "werner_ppt_threshold": werner_ppt_threshold(),
        "markov_example": {"T": T.tolist(), "h": rate.h, "h_min": rate.h_min},
        "davies_boundary": davies_boundary(),
        "fermion": fermion_table(),
        "seed": seed,
    }
    if include_sdp:
        rep["davies_sdp"] = davies_sdp_comparison()
    return rep
