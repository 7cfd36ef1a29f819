"""Hidden Markov processes and their entropy rate.

A process is given by non-negative matrices ``E[e]`` (one per observed symbol
``e``) whose sum ``T`` is stochastic, together with a ``T``-invariant row
vector ``mu``.  Word probabilities are ``mu @ E[e0] @ ... @ E[en] @ 1``.
"""
from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _backend
from .classical import check_stochastic, invariant_measure
from .errors import (
    AbsorbingStateError,
    IncompatibilityError,
    InvalidDistributionError,
    ShapeError,
    SizeError,
    StationarityError,
)
from .mathcore import check_prob_vector, shannon_entropy
from .rng import substream, thread_cap

log = logging.getLogger(__name__)

MAX_WORDS = 2**24


@dataclass
class HmmSpec:
    E: np.ndarray  # shape (d_obs, d_hidden, d_hidden)
    mu: np.ndarray = None
    allow_degenerate: bool = field(default=False, repr=False)

    def __post_init__(self):
        E = np.asarray(self.E, dtype=float)
        if E.ndim != 3 or E.shape[1] != E.shape[2]:
            raise ShapeError(f"E must have shape (d_obs, d, d), got {E.shape}")
        if E.min() < -1e-12:
            raise InvalidDistributionError(f"E has a negative entry {E.min():.3e}")
        self.E = np.ascontiguousarray(np.clip(E, 0.0, None))
        T = check_stochastic(self.E.sum(axis=0))
        if self.mu is None:
            self.mu = invariant_measure(T, allow_degenerate=self.allow_degenerate)
        else:
            self.mu = check_prob_vector(self.mu)
            if self.mu.shape[0] != T.shape[0]:
                raise ShapeError("mu does not match the hidden dimension")
            dev = float(np.abs(self.mu @ T - self.mu).sum())
            if dev > 1e-12 * T.shape[0]:
                raise StationarityError(f"mu is not invariant for sum(E) (deviation {dev:.3e})")

    @property
    def d_obs(self) -> int:
        return self.E.shape[0]

    @property
    def d_hidden(self) -> int:
        return self.E.shape[1]

    @property
    def T(self) -> np.ndarray:
        return self.E.sum(axis=0)


def hmm_from_extension(S, tol=1e-12, allow_degenerate=False) -> HmmSpec:
    """Process generated by a stochastic ``d x d**2`` matrix compatible with ``T``.

    ``S[phi, eta * d + e]`` is the weight of the pair ``(eta, e)``; both partial
    sums must equal the same stochastic ``T``.  ``E[e][phi, eta] = S[phi, (eta, e)]``.
    """
    S = np.asarray(S, dtype=float)
    d = S.shape[0]
    if S.ndim != 2 or S.shape[1] != d * d:
        raise ShapeError(f"S must have shape (d, d*d), got {S.shape}")
    pairs = S.reshape(d, d, d)  # [phi, eta, e]
    left = pairs.sum(axis=2)
    right = pairs.sum(axis=1)
    dev = float(np.abs(left - right).max())
    if dev > tol:
        raise IncompatibilityError(f"partial sums of S differ by {dev:.3e}", deviation=dev)
    E = np.transpose(pairs, (2, 0, 1))
    return HmmSpec(E, allow_degenerate=allow_degenerate)


def markov_embedding(T) -> np.ndarray:
    """The extension ``S[phi, (eta, e)] = delta(eta, e) T[phi, e]``."""
    T = check_stochastic(T)
    d = T.shape[0]
    S = np.zeros((d, d, d))
    for e in range(d):
        S[:, e, e] = T[:, e]
    return S.reshape(d, d * d)


def iid_hmm(p) -> HmmSpec:
    p = check_prob_vector(p)
    return HmmSpec(p.reshape(-1, 1, 1), mu=np.ones(1))


def random_hmm(d_hidden, d_obs, rng, sparsity=0.0) -> HmmSpec:
    K = rng.random((d_obs, d_hidden, d_hidden))
    if sparsity:
        K *= rng.random(K.shape) >= sparsity
    norms = K.sum(axis=(0, 2))
    K[:, norms == 0, 0] = 1.0
    K /= K.sum(axis=(0, 2))[None, :, None]
    return HmmSpec(K)


def hmm_word_probability(spec: HmmSpec, word: Sequence[int]) -> float:
    word = list(word)
    if not word:
        return 1.0
    if min(word) < 0 or max(word) >= spec.d_obs:
        raise ShapeError(f"word {word} uses symbols outside 0..{spec.d_obs - 1}")
    row = spec.mu
    for e in word:
        row = row @ spec.E[e]
    return float(row.sum())


def word_probabilities(spec: HmmSpec, length: int) -> np.ndarray:
    """Probabilities of all words of ``length``, lexicographic order."""
    if spec.d_obs**length > MAX_WORDS:
        raise SizeError(f"{spec.d_obs}**{length} words exceed the enumeration limit {MAX_WORDS}")
    rows = spec.mu[None, :]
    for _ in range(length):
        rows = np.einsum("wi,eij->wej", rows, spec.E).reshape(-1, spec.d_hidden)
    return rows.sum(axis=1)


def hmm_block_entropies(spec: HmmSpec, n: int) -> np.ndarray:
    """``[H_0, ..., H_n]`` where ``H_k`` is the entropy of ``k + 1`` consecutive symbols."""
    if spec.d_obs ** (n + 1) > MAX_WORDS:
        raise SizeError(f"{spec.d_obs}**{n + 1} words exceed the enumeration limit {MAX_WORDS}")
    out = []
    rows = spec.mu[None, :]
    for _ in range(n + 1):
        rows = np.einsum("wi,eij->wej", rows, spec.E).reshape(-1, spec.d_hidden)
        out.append(shannon_entropy(rows.sum(axis=1), tol=1e-10))
    return np.array(out)


def hmm_entropy_increment(spec: HmmSpec, n: int) -> float:
    """``H_n - H_{n-1}`` by exact enumeration (``H_{-1} = 0``)."""
    H = hmm_block_entropies(spec, n)
    return float(H[-1] - (H[-2] if n >= 1 else 0.0))


def hmm_increments(spec: HmmSpec, n: int) -> np.ndarray:
    H = hmm_block_entropies(spec, n)
    return np.diff(np.concatenate([[0.0], H]))


class BlackwellResult(NamedTuple):
    h: float
    std_err: float
    samples: int
    restarts: int
    max_mass_dev: float
    backend: str


def _batch_means(hvals, n_batches):
    n = len(hvals) // n_batches * n_batches
    return hvals[:n].reshape(n_batches, -1).mean(axis=1)


def blackwell_entropy(
    spec: HmmSpec,
    samples: int = 100_000,
    burn_in: int = 1_000,
    seed: int = 0,
    chains: int = 1,
    backend: str | None = None,
) -> BlackwellResult:
    """Monte Carlo entropy rate from the Blackwell filter.

    The filter row vector starts at ``mu``; each step emits ``e`` with
    probability ``q(e) = <p E[e], 1>`` and moves to ``p E[e] / q(e)``.  The
    estimate is the time average of ``H(q)`` after ``burn_in`` steps.  The
    standard error comes from batch means, pooled over ``chains`` independent
    seeded chains that run in parallel threads.
    """
    kern = _backend.get_kernels(backend)
    samples, burn_in, chains = int(samples), int(burn_in), max(1, int(chains))
    per_chain = [samples // chains + (1 if c < samples % chains else 0) for c in range(chains)]
    E = np.ascontiguousarray(spec.E, dtype=np.float64)
    p0 = np.ascontiguousarray(spec.mu, dtype=np.float64)

    def run(c):
        rng = substream(seed, f"blackwell/chain{c}")
        uniforms = rng.random(burn_in + per_chain[c])
        return kern.blackwell_filter(E, p0, uniforms, burn_in)

    if chains == 1:
        results = [run(0)]
    else:
        with ThreadPoolExecutor(max_workers=thread_cap(chains)) as pool:
            results = list(pool.map(run, range(chains)))
    hs, batch, restarts, dev = [], [], 0, 0.0
    for hvals, r, mdev in results:
        if r < 0:
            raise AbsorbingStateError("filter emits no symbol with positive probability")
        restarts += r
        dev = max(dev, mdev)
        hs.append((len(hvals), float(hvals.mean()) if len(hvals) else 0.0))
        if len(hvals) >= 20:
            batch.append(_batch_means(hvals, min(100, len(hvals) // 10)))
    if restarts:
        log.info("blackwell filter restarted %d times after zero-mass updates", restarts)
    total = sum(n for n, _ in hs)
    h = sum(n * m for n, m in hs) / total if total else float("nan")
    if batch:
        means = np.concatenate(batch)
        se = float(means.std(ddof=1) / np.sqrt(len(means))) if len(means) > 1 else float("nan")
    else:
        se = float("nan")
    name = "cython" if kern.__name__.endswith("_kernels") else "python"
    return BlackwellResult(float(h), se, total, restarts, dev, name)


def filter_trajectory(spec: HmmSpec, steps: int, seed: int = 0) -> np.ndarray:
    """Filter vectors ``p_0, ..., p_steps`` of one simulated path (numpy, slow)."""
    rng = substream(seed, "blackwell/trajectory")
    p = spec.mu.copy()
    out = [p]
    for _ in range(steps):
        v = np.einsum("i,eij->ej", p, spec.E)
        q = v.sum(axis=1)
        e = rng.choice(spec.d_obs, p=q / q.sum())
        p = v[e] / q[e]
        out.append(p)
    return np.array(out)


def _sinkhorn_coupling(K, a, b, tol=1e-15, max_iter=100_000):
    K = K * np.outer(a > 0, b > 0)
    for _ in range(max_iter):
        rs = K.sum(axis=1)
        K = K * np.divide(a, rs, out=np.zeros_like(a), where=rs > 0)[:, None]
        cs = K.sum(axis=0)
        K = K * np.divide(b, cs, out=np.zeros_like(b), where=cs > 0)[None, :]
        if np.abs(K.sum(axis=1) - a).max() < tol:
            break
    return K


def random_compatible_extension(T, rng, mix=None) -> np.ndarray:
    """A random ``S`` compatible with ``T``: per row, a self-coupling of ``T[phi]``.

    Mixes the diagonal coupling (the Markov embedding) with a Sinkhorn-scaled
    random coupling; ``mix`` is the weight of the diagonal part.
    """
    T = check_stochastic(T)
    d = T.shape[0]
    lam = rng.random() if mix is None else mix
    S = np.zeros((d, d, d))
    for phi in range(d):
        row = T[phi]
        coup = _sinkhorn_coupling(rng.random((d, d)) + 1e-3, row, row)
        # symmetrize so both partial sums match to rounding
        coup = 0.5 * (coup + coup.T)
        S[phi] = lam * np.diag(row) + (1 - lam) * coup
    return S.reshape(d, d * d)


def extension_entropy_scan(T, n_samples=20, n=8, seed=0) -> dict:
    """Compare the Markov embedding's entropy increment with random compatible extensions.

    Reported as data only: the smallest entropy among all compatible
    extensions is an empirical observation here, not a checked property.
    """
    rng = substream(seed, "hmm/extension-scan")
    markov = hmm_entropy_increment(hmm_from_extension(markov_embedding(T)), n)
    values = []
    for _ in range(n_samples):
        S = random_compatible_extension(T, rng)
        values.append(hmm_entropy_increment(hmm_from_extension(S, tol=1e-10), n))
    values = np.array(values)
    return {
        "n": n,
        "markov_increment": markov,
        "sample_increments": values.tolist(),
        "min_sample": float(values.min()) if len(values) else None,
        "markov_is_smallest": bool(np.all(values >= markov - 1e-12)),
    }


def all_words(d_obs, length):
    return itertools.product(range(d_obs), repeat=length)
