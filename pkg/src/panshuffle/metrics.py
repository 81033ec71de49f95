"""Information-theoretic distances and the brute-force test-function norm.

All divergences use natural logarithms. Inputs are dense probability vectors
or :class:`~panshuffle.distributions.FiniteDistribution` objects; joint
distributions are matrices or higher-dimensional arrays summing to 1.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distributions import FiniteDistribution, binom_sum
from .errors import GuardError

NORM_MAX_DOMAIN = 16

__all__ = [
    "tv_distance",
    "kl_divergence",
    "pinsker_check",
    "JointDistribution",
    "mutual_information",
    "hockey_stick",
    "NormReport",
    "infty_to_2_norm_bruteforce",
    "parity_family_norm_bound_sq",
    "fact_tv_chain_check",
    "fact_markov_check",
]


def _vec(p) -> np.ndarray:
    if isinstance(p, FiniteDistribution):
        return p.probs
    return np.asarray(p, dtype=np.float64)


def tv_distance(p, q) -> float:
    """Total variation distance, half the L1 gap between the pmfs."""
    a, b = _vec(p), _vec(q)
    if a.shape != b.shape:
        raise ValueError(f"domain mismatch: {a.shape} vs {b.shape}")
    return 0.5 * float(np.abs(a - b).sum())


def kl_divergence(p, q) -> float:
    """KL(p || q) in nats; +inf when p puts mass outside q's support."""
    a, b = _vec(p), _vec(q)
    if a.shape != b.shape:
        raise ValueError(f"domain mismatch: {a.shape} vs {b.shape}")
    on = a > 0
    if np.any(b[on] <= 0):
        return math.inf
    val = float(np.sum(a[on] * np.log(a[on] / b[on])))
    return max(0.0, val)


def pinsker_check(p, q, tol: float = 1e-12) -> bool:
    """tv(p,q)^2 <= KL(p||q)/2, up to tol."""
    return tv_distance(p, q) ** 2 <= 0.5 * kl_divergence(p, q) + tol


@dataclass(frozen=True)
class JointDistribution:
    """A joint pmf over two finite variables, rows = first variable."""

    table: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.table, dtype=np.float64).copy()
        if t.ndim != 2:
            raise ValueError("table must be 2-D")
        if np.any(t < -1e-15) or abs(t.sum() - 1.0) > 1e-9:
            raise ValueError("table must be a pmf (nonnegative, sums to 1)")
        np.clip(t, 0.0, None, out=t)
        t /= t.sum()
        t.flags.writeable = False
        object.__setattr__(self, "table", t)

    def row_marginal(self) -> np.ndarray:
        return self.table.sum(axis=1)

    def col_marginal(self) -> np.ndarray:
        return self.table.sum(axis=0)


def mutual_information(joint) -> float:
    """I(A;B) in nats from a joint table (array or JointDistribution)."""
    t = joint.table if isinstance(joint, JointDistribution) else np.asarray(joint, dtype=np.float64)
    if t.ndim != 2:
        raise ValueError("joint must be 2-D")
    r = t.sum(axis=1, keepdims=True)
    c = t.sum(axis=0, keepdims=True)
    prod = r * c
    on = t > 0
    val = float(np.sum(t[on] * np.log(t[on] / prod[on])))
    return max(0.0, val)


def hockey_stick(p, q, eps: float) -> float:
    """The eps-divergence sum_x max(p(x) - e^eps q(x), 0); equals TV at eps=0."""
    a, b = _vec(p), _vec(q)
    if a.shape != b.shape:
        raise ValueError(f"domain mismatch: {a.shape} vs {b.shape}")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return float(np.clip(a - math.exp(eps) * b, 0.0, None).sum())


# ---------------------------------------------------------------------------
# sup over test functions of the family's mean-squared deviation


@dataclass(frozen=True)
class NormReport:
    """Result of the brute-force norm: squared value, optional bound, witness.

    ``witness`` is the +-1 test function attaining the maximum (lowest function
    index on ties). ``value_sq`` is the mean over family members of the squared
    gap between the member's and the reference's expectation of the witness.
    """

    value_sq: float
    bound_sq: float | None
    witness: np.ndarray

    @property
    def value(self) -> float:
        return math.sqrt(self.value_sq)

    def to_json(self) -> str:
        bits = [int((1 - int(w)) // 2) for w in self.witness]
        return json.dumps(
            {"value_sq": self.value_sq, "bound_sq": self.bound_sq, "witness_bits": bits}
        )


def parity_family_norm_bound_sq(d: int, k: int, alpha: float) -> float:
    """Closed-form upper bound 4*alpha^2 / C(d,<=k) for both tilted families."""
    return 4.0 * alpha * alpha / binom_sum(d, k)


def infty_to_2_norm_bruteforce(
    family: Sequence, reference=None, bound_sq: float | None = None,
    chunk_size: int = 1 << 13,
) -> NormReport:
    """Exact sup over +-1-valued test functions by vertex enumeration.

    The objective ``E_v[(E_{P_v} f - E_ref f)^2]`` is a convex quadratic in f,
    so its supremum over [-1,1]-valued functions is attained at a +-1 vertex;
    all ``2^m`` vertices are enumerated (guarded at m <= 16). The reference
    defaults to the family's equal-weight mixture. Enumeration is chunked with
    a deterministic reduction: ties keep the lowest function index, except
    that when the domain is a hypercube (m a power of two) and some signed
    parity character co-attains the maximum, the witness is canonicalized to
    that character (smallest subset first, then lexicographic, sign +1 before
    -1). Maximizers are often non-unique and the characters are the
    structurally meaningful representatives.
    """
    rows = [_vec(p) for p in family]
    if not rows:
        raise ValueError("family must be nonempty")
    pmat = np.stack(rows)
    m = pmat.shape[1]
    if m > NORM_MAX_DOMAIN:
        raise GuardError(f"domain size {m} exceeds brute-force guard {NORM_MAX_DOMAIN}")
    ref = pmat.mean(axis=0) if reference is None else _vec(reference)
    if ref.shape != (m,):
        raise ValueError("reference has wrong domain size")
    diff = pmat - ref[None, :]

    best_val = -1.0
    best_idx = -1
    total = 1 << m
    positions = np.arange(m, dtype=np.int64)
    for start in range(0, total, chunk_size):
        idx = np.arange(start, min(start + chunk_size, total), dtype=np.int64)
        # function j maps point x to +1 iff bit x of j is 0
        bits = (idx[:, None] >> positions[None, :]) & 1
        funcs = (1 - 2 * bits).astype(np.float64)
        gaps = diff @ funcs.T
        vals = np.mean(gaps * gaps, axis=0)
        pos = int(np.argmax(vals))
        if vals[pos] > best_val:
            best_val = float(vals[pos])
            best_idx = start + pos
    bits = (best_idx >> positions) & 1
    witness = (1 - 2 * bits).astype(np.int8)
    char = _character_witness(diff, m, best_val)
    if char is not None:
        witness = char
    return NormReport(value_sq=best_val, bound_sq=bound_sq, witness=witness)


def _character_witness(diff: np.ndarray, m: int, best_val: float,
                       tol: float = 1e-12) -> np.ndarray | None:
    """First signed parity character co-attaining the brute-force maximum.

    Candidate order: subset size, then lexicographic subset, then sign +1
    before -1. Returns None when m is not a power of two or no character
    comes within ``tol`` of ``best_val``. Domain point p has coordinate c
    (1-based, most significant first) equal to +1 iff bit (q - c) of p is 0.
    """
    q = m.bit_length() - 1
    if (1 << q) != m:
        return None
    points = np.arange(m, dtype=np.int64)
    coord_signs = 1 - 2 * ((points[:, None] >> (q - 1 - np.arange(q))[None, :]) & 1)
    subsets = sorted(range(1 << q), key=lambda s: (bin(s).count("1"), s))
    for subset_bits in subsets:
        char = np.ones(m, dtype=np.int64)
        for c in range(q):
            if subset_bits >> c & 1:
                char = char * coord_signs[:, c]
        for sign in (1, -1):
            f = (sign * char).astype(np.float64)
            gaps = diff @ f
            if float(np.mean(gaps * gaps)) >= best_val - tol:
                return (sign * char).astype(np.int8)
    return None


# ---------------------------------------------------------------------------
# supporting facts used by the hybrid argument


def fact_tv_chain_check(joint_ab, joint_ab_prime, tol: float = 1e-9) -> bool:
    """Check tv((A,B),(A,B')) <= E_{a~A}[tv(B|a, B'|a)] for shared-marginal joints."""
    t1 = joint_ab.table if isinstance(joint_ab, JointDistribution) else np.asarray(joint_ab, float)
    t2 = (
        joint_ab_prime.table
        if isinstance(joint_ab_prime, JointDistribution)
        else np.asarray(joint_ab_prime, float)
    )
    if t1.shape != t2.shape:
        raise ValueError("joints must share a domain")
    r1, r2 = t1.sum(axis=1), t2.sum(axis=1)
    if np.abs(r1 - r2).max() > 1e-9:
        raise ValueError("first-variable marginals differ; the fact does not apply")
    lhs = 0.5 * float(np.abs(t1 - t2).sum())
    rhs = 0.0
    for a in range(t1.shape[0]):
        if r1[a] <= 0:
            continue
        rhs += r1[a] * 0.5 * float(np.abs(t1[a] / r1[a] - t2[a] / r2[a]).sum())
    return lhs <= rhs + tol


def fact_markov_check(joint_abc, tol: float = 1e-9, ci_tol: float = 1e-12) -> bool:
    """For A ⟂ B | C: check tv(B|a, B) <= tv(C|a, C) for every a in A's support.

    ``joint_abc`` is a 3-D pmf indexed (a, b, c). Raises ValueError when the
    conditional-independence precondition fails beyond ``ci_tol``.
    """
    t = np.asarray(joint_abc, dtype=np.float64)
    if t.ndim != 3:
        raise ValueError("joint must be 3-D, indexed (a, b, c)")
    if np.any(t < -1e-15) or abs(t.sum() - 1.0) > 1e-9:
        raise ValueError("joint must be a pmf")
    pc = t.sum(axis=(0, 1))
    pac = t.sum(axis=1)
    pbc = t.sum(axis=0)
    for c in range(t.shape[2]):
        if pc[c] <= 0:
            if np.abs(t[:, :, c]).max() > ci_tol:
                raise ValueError("mass on a zero-probability slice")
            continue
        recon = np.outer(pac[:, c], pbc[:, c]) / pc[c]
        if np.abs(t[:, :, c] - recon).max() > ci_tol:
            raise ValueError("A and B are not conditionally independent given C")
    pa = t.sum(axis=(1, 2))
    pb = t.sum(axis=(0, 2))
    pab = t.sum(axis=2)
    ok = True
    for a in range(t.shape[0]):
        if pa[a] <= 0:
            continue
        tv_b = 0.5 * float(np.abs(pab[a] / pa[a] - pb).sum())
        tv_c = 0.5 * float(np.abs(pac[a] / pa[a] - pc).sum())
        ok = ok and (tv_b <= tv_c + tol)
    return ok
