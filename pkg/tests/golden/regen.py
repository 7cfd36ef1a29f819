"""Rebuild the expected outputs in this directory from the library functions.

Run from the repository root: ``python tests/golden/regen.py``.
"""
import json
from pathlib import Path

import numpy as np

from qproc.classical import block_entropies, entropy_rate_classical, markov_joint
from qproc.fermion import entropy_rate_integral, entropy_rate_truncation, sample_specs
from qproc.su2 import optimize_singlet

HERE = Path(__file__).parent


def main():
    T = np.array([[0.7, 0.3], [0.1, 0.9]])
    mu = np.array([0.25, 0.75])
    H = block_entropies(markov_joint(T, mu, 4))
    rate = entropy_rate_classical(T, mu)
    markov = {"h": rate.h, "h_min": rate.h_min, "block_entropies": H.tolist()}
    su2 = {}
    for mode in ("exchangeable", "separable", "su2_stationary", "period2", "three_qubit_su2"):
        su2[mode] = optimize_singlet(mode).value
    spec = sample_specs()["non_normal"]
    tr = entropy_rate_truncation(spec, 6)
    fermion = {"integral": entropy_rate_integral(spec).value, "H": tr.H.tolist()}
    out = {"markov": markov, "fcs_su2": su2, "fermion_non_normal": fermion}
    (HERE / "expected.json").write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
