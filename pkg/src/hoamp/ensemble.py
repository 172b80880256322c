"""State store for the register oscillators.

A TrialEnsemble is a sparse table over integer occupation tuples in one of two
layouts:

* explicit: every tuple stored with its complex amplitude (pure mode) or
  probability (diagonal mode).  Tuples are kept in ascending lexicographic
  order, which fixes summation and sampling order across platforms.
* binned: for the big two-factor rectangles (hundreds of millions of pairs)
  only the distinct products v = n*m are stored, with the pair count and the
  total probability mass per bin.  Every conditioning multiplier depends on
  the pair only through v, and all tuples of a bin start with equal real
  amplitudes, so per-member amplitudes stay equal within each bin forever and
  nothing observable is lost by aggregating.  Phases are not tracked across
  bins in this layout; the quantities it serves (Pr, C, fidelity against
  factor targets, sampling) are all phase-free.

Conditioning multiplies each entry by its eps overlap, reports the surviving
mass, and renormalizes.  Sums are accumulated per fixed-size chunk and the
chunk partials combined with math.fsum in index order, so results are
bit-identical no matter how many worker threads run the chunks (pool size
capped by HOAMP_THREADS).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import (
    MarkerAmplitude,
    OscillatorParams,
    epsilon_batch,
    eps_squared_batch,
    phase_delta_batch,
)
from .errors import ConditionedMassVanished, DomainTooLarge, EmptyRange, NoFactorInRange
from .rng import SplitMix64

_CHUNK = 1 << 20
_VANISH = 1e-300
# explicit pair tables get unwieldy beyond this; switch to product bins
_BINNED_THRESHOLD = 1 << 22
_MAX_DENSE_BINS = 4_000_000_000  # dense counts scratch above this would not fit


def _worker_count() -> int:
    raw = os.environ.get("HOAMP_THREADS", "")
    try:
        cap = int(raw)
    except ValueError:
        cap = 0
    if cap <= 0:
        cap = os.cpu_count() or 1
    return max(1, cap)


def _run_chunks(n_items, fn):
    """Run fn(chunk_index, start, stop) over fixed chunks; deterministic order
    of the returned list regardless of pool size."""
    n_chunks = max(1, -(-n_items // _CHUNK))
    results = [None] * n_chunks
    workers = min(_worker_count(), n_chunks)

    def job(ci):
        start = ci * _CHUNK
        results[ci] = fn(ci, start, min(start + _CHUNK, n_items))

    if workers == 1:
        for ci in range(n_chunks):
            job(ci)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(job, range(n_chunks)))
    return results


def ceil_sqrt(n: int) -> int:
    return math.isqrt(n - 1) + 1 if n > 0 else 0


def factoring_ranges(N: int):
    """Trial ranges: n in [3, ceil(sqrt(N))], m in [ceil(sqrt(N+1)), ceil(N/3)]."""
    n_lo, n_hi = 3, ceil_sqrt(N)
    m_lo, m_hi = ceil_sqrt(N + 1), -(-N // 3)
    return n_lo, n_hi, m_lo, m_hi


@dataclass
class TrialEnsemble:
    mode: str                      # 'pure' | 'diagonal'
    arity: int
    # explicit layout
    tuples: np.ndarray = None      # (n_entries, arity) int64, lexicographic
    weights: np.ndarray = None     # complex128 amplitudes | float64 probabilities
    # binned layout (two-factor rectangle states)
    keys: np.ndarray = None        # distinct products, ascending
    counts: np.ndarray = None      # pairs per bin
    mass: np.ndarray = None        # total probability mass per bin
    domain: tuple = None           # (n_lo, n_hi, m_lo, m_hi)

    @property
    def layout(self) -> str:
        return "binned" if self.keys is not None else "explicit"

    @property
    def n_entries(self) -> int:
        if self.layout == "binned":
            return int(self.counts.sum(dtype=np.int64))
        return len(self.tuples)

    def entry_masses(self) -> np.ndarray:
        """Probability mass per stored row (per tuple, or per bin total)."""
        if self.layout == "binned":
            return self.mass
        if self.mode == "pure":
            return (self.weights.real**2 + self.weights.imag**2)
        return self.weights

    def total_mass(self) -> float:
        m = self.entry_masses()
        parts = _run_chunks(len(m), lambda ci, a, b: float(np.sum(m[a:b])))
        return math.fsum(parts)

    def copy(self) -> "TrialEnsemble":
        return TrialEnsemble(
            mode=self.mode,
            arity=self.arity,
            tuples=None if self.tuples is None else self.tuples.copy(),
            weights=None if self.weights is None else self.weights.copy(),
            keys=None if self.keys is None else self.keys.copy(),
            counts=None if self.counts is None else self.counts.copy(),
            mass=None if self.mass is None else self.mass.copy(),
            domain=self.domain,
        )

    def product_keys(self) -> np.ndarray:
        """Product of the tuple components per entry (the coupling argument)."""
        if self.layout == "binned":
            return self.keys
        keys = self.tuples[:, 0].astype(np.int64)
        for j in range(1, self.arity):
            keys = keys * self.tuples[:, j]
        return keys


@dataclass(frozen=True)
class TargetState:
    """The factor/solution states rho_f: members with normalized weights."""

    members: tuple                 # tuple of occupation tuples
    weights: tuple                 # same length, sums to 1

    def __post_init__(self):
        if not self.members:
            raise ValueError("target must have at least one member")
        s = math.fsum(self.weights)
        if abs(s - 1.0) > 1e-12:
            raise ValueError("target weights must sum to 1")

    @classmethod
    def factor_target(cls, N: int) -> "TargetState":
        n_lo, n_hi, m_lo, m_hi = factoring_ranges(N)
        members = [
            (r, N // r)
            for r in range(n_lo, n_hi + 1)
            if N % r == 0 and m_lo <= N // r <= m_hi
        ]
        if not members:
            raise NoFactorInRange(f"no factor pair of {N} inside the trial ranges")
        w = 1.0 / len(members)
        return cls(members=tuple(members), weights=tuple([w] * len(members)))


@dataclass(frozen=True)
class MeasurementOutcome:
    probability: float             # Pr(E_l) = C_l / C_{l-1}
    post_state: TrialEnsemble
    normalization: float           # cumulative C_l (prev_norm * probability)


@dataclass(frozen=True)
class ProductBinTable:
    keys: np.ndarray
    counts: np.ndarray
    mass: np.ndarray
    target_term: int = None
    target_members: tuple = ()

    @property
    def n_bins(self) -> int:
        return len(self.keys)


def init_uniform_factoring(N: int, layout: str = "auto") -> TrialEnsemble:
    """Uniform pure superposition over all trial pairs for factoring N.

    layout 'auto' stores pairs explicitly up to ~4e6 of them and switches to
    product bins beyond that; 'explicit'/'binned' force one representation.
    """
    n_lo, n_hi, m_lo, m_hi = factoring_ranges(N)
    if n_hi < n_lo or m_hi < m_lo:
        raise EmptyRange(
            f"trial ranges for N={N} are empty: n in [{n_lo},{n_hi}], m in [{m_lo},{m_hi}]"
        )
    n_pairs = (n_hi - n_lo + 1) * (m_hi - m_lo + 1)
    if layout == "auto":
        layout = "explicit" if n_pairs <= _BINNED_THRESHOLD else "binned"

    if layout == "explicit":
        n_vals = np.arange(n_lo, n_hi + 1, dtype=np.int64)
        m_vals = np.arange(m_lo, m_hi + 1, dtype=np.int64)
        tuples = np.empty((n_pairs, 2), dtype=np.int64)
        tuples[:, 0] = np.repeat(n_vals, len(m_vals))
        tuples[:, 1] = np.tile(m_vals, len(n_vals))
        weights = np.full(n_pairs, 1.0 / math.sqrt(n_pairs), dtype=np.complex128)
        return TrialEnsemble(mode="pure", arity=2, tuples=tuples, weights=weights)

    if layout != "binned":
        raise ValueError(f"unknown layout {layout!r}")
    vmax = n_hi * m_hi
    if vmax + 1 > _MAX_DENSE_BINS:
        raise DomainTooLarge(f"bin construction for N={N} needs {vmax + 1} slots")
    dense = np.zeros(vmax + 1, dtype=np.int32)
    for n in range(n_lo, n_hi + 1):
        dense[n * m_lo : n * m_hi + 1 : n] += 1
    key_dtype = np.int32 if vmax < 2**31 else np.int64
    # two passes over segments: count nonzero bins, then extract
    n_bins = int(np.count_nonzero(dense))
    keys = np.empty(n_bins, dtype=key_dtype)
    counts = np.empty(n_bins, dtype=np.int32)
    seg = 1 << 24
    out = 0
    for start in range(0, vmax + 1, seg):
        idx = np.flatnonzero(dense[start : start + seg])
        stop = out + len(idx)
        keys[out:stop] = idx + start
        counts[out:stop] = dense[start + idx]
        out = stop
    del dense
    mass = counts.astype(np.float64)
    mass *= 1.0 / n_pairs
    return TrialEnsemble(
        mode="pure", arity=2, keys=keys, counts=counts, mass=mass,
        domain=(n_lo, n_hi, m_lo, m_hi),
    )


def apply_entry_multipliers(state: TrialEnsemble, multipliers, prev_norm: float = 1.0,
                            in_place: bool = False) -> MeasurementOutcome:
    """Multiply each entry by its conditioning factor, renormalize, report Pr.

    `multipliers` is per-row: complex eps for pure explicit states, real
    |eps|^2 for diagonal or binned ones.  This is the single code path every
    algorithm module funnels through, so identical inputs give bit-identical
    outcomes across modules.
    """
    post = state if in_place else state.copy()
    if post.layout == "binned" or post.mode == "diagonal":
        arr = post.mass if post.layout == "binned" else post.weights

        def job(ci, a, b):
            arr[a:b] *= multipliers[a:b]
            return float(np.sum(arr[a:b]))

        c = math.fsum(_run_chunks(len(arr), job))
        if c < _VANISH:
            raise ConditionedMassVanished(f"surviving mass {c:.3e}")
        arr /= c
    else:
        arr = post.weights

        def job(ci, a, b):
            arr[a:b] *= multipliers[a:b]
            seg = arr[a:b]
            return float(np.sum(seg.real**2 + seg.imag**2))

        c = math.fsum(_run_chunks(len(arr), job))
        if c < _VANISH:
            raise ConditionedMassVanished(f"surviving mass {c:.3e}")
        arr /= math.sqrt(c)
    pr = min(c, 1.0) if c <= 1.0 + 1e-9 else c  # guard rounding overshoot only
    return MeasurementOutcome(probability=pr, post_state=post, normalization=prev_norm * pr)


def conditional_update(state: TrialEnsemble, params: OscillatorParams,
                       alpha: MarkerAmplitude, target_term: int, t: float,
                       prev_norm: float = 1.0, in_place: bool = False) -> MeasurementOutcome:
    """One conditional measurement against the target product term.

    Every entry's amplitude (probability) is multiplied by eps (|eps|^2) for
    the phase difference between its product term and the target, the
    surviving mass Pr(E) is recorded, and the state is renormalized.
    """
    if state.layout == "binned":
        amag = alpha.magnitude
        keys, mass = state.keys, state.mass
        post = state if in_place else state.copy()
        pm = post.mass

        def job(ci, a, b):
            ang = phase_delta_batch(params, target_term, keys[a:b], t)
            w = eps_squared_batch(amag, ang, out=ang)
            pm[a:b] *= w
            return float(np.sum(pm[a:b]))

        c = math.fsum(_run_chunks(len(mass), job))
        if c < _VANISH:
            raise ConditionedMassVanished(f"surviving mass {c:.3e}")
        pm /= c
        pr = min(c, 1.0) if c <= 1.0 + 1e-9 else c
        return MeasurementOutcome(probability=pr, post_state=post,
                                  normalization=prev_norm * pr)

    keys = state.product_keys()
    angles = phase_delta_batch(params, target_term, keys, t)
    if state.mode == "pure":
        mult = epsilon_batch(alpha.magnitude, angles)
    else:
        mult = eps_squared_batch(alpha.magnitude, angles, out=angles)
    return apply_entry_multipliers(state, mult, prev_norm=prev_norm, in_place=in_place)


def _bin_members(v: int, domain) -> list:
    """Pairs (n, m) in the rectangle with n*m = v, ascending n."""
    n_lo, n_hi, m_lo, m_hi = domain
    out = []
    for n in range(max(n_lo, -(-v // m_hi)), min(n_hi, v // m_lo) + 1):
        if v % n == 0:
            m = v // n
            if m_lo <= m <= m_hi:
                out.append((n, m))
    return out


def fidelity(state: TrialEnsemble, target: TargetState) -> float:
    """Uhlmann fidelity against the target mixture/superposition.

    Pure state, single-member target: the state's mass on that member.  Pure
    state, several members: |<phi_target|Psi>|^2 with phi_target the
    root-weight superposition.  Diagonal state: (sum_f sqrt(w_f p_f))^2.
    """
    if state.layout == "binned":
        # all supported targets live inside single product bins here
        n_lo, n_hi, m_lo, m_hi = state.domain
        key_of = {}
        for member, w in zip(target.members, target.weights):
            n, m = (int(x) for x in member)
            if n_lo <= n <= n_hi and m_lo <= m <= m_hi:
                key_of.setdefault(n * m, []).append(((n, m), w))
        if not key_of:
            return 0.0
        if state.mode == "pure" and len(key_of) > 1:
            raise ValueError("binned layout does not track phases across bins; "
                             "multi-bin pure targets are not representable")
        total = 0.0
        for v, items in key_of.items():
            i = int(np.searchsorted(state.keys, v))
            if i >= len(state.keys) or int(state.keys[i]) != v:
                continue
            per_member = float(state.mass[i]) / float(state.counts[i])
            members = None
            if state.mode == "pure":
                # equal per-member amplitudes with a common phase within the bin
                amp = math.sqrt(per_member)
                total += sum(math.sqrt(w) for _, w in items) ** 2 * amp * amp
            else:
                total += sum(math.sqrt(w * per_member) for _, w in items) ** 2
        return min(total, 1.0)

    index = {tuple(int(x) for x in row): i for i, row in enumerate(state.tuples)}
    if state.mode == "pure":
        acc = complex(0.0, 0.0)
        for member, w in zip(target.members, target.weights):
            i = index.get(tuple(int(x) for x in member))
            if i is not None:
                acc += math.sqrt(w) * complex(state.weights[i])
        return min(abs(acc) ** 2, 1.0)
    acc = 0.0
    for member, w in zip(target.members, target.weights):
        i = index.get(tuple(int(x) for x in member))
        if i is not None:
            acc += math.sqrt(w * float(state.weights[i]))
    return min(acc * acc, 1.0)


def bin_by_product(state: TrialEnsemble, target_term: int = None) -> ProductBinTable:
    """Group entries by their product value (conditioning multipliers are
    constant on each bin)."""
    if state.layout == "binned":
        members = tuple(_bin_members(target_term, state.domain)) if target_term else ()
        return ProductBinTable(keys=state.keys, counts=state.counts, mass=state.mass,
                               target_term=target_term, target_members=members)
    prods = state.product_keys()
    keys, inverse, counts = np.unique(prods, return_inverse=True, return_counts=True)
    mass = np.bincount(inverse, weights=state.entry_masses(), minlength=len(keys))
    members = ()
    if target_term is not None:
        sel = prods == target_term
        members = tuple(tuple(int(x) for x in row) for row in state.tuples[sel])
    return ProductBinTable(keys=keys, counts=counts.astype(np.int64), mass=mass,
                           target_term=target_term, target_members=members)


def _locate_quantile(mass: np.ndarray, x: float) -> int:
    """Index i with cumsum(mass)[i-1] <= x < cumsum(mass)[i], chunk-scanned."""
    acc = 0.0
    for start in range(0, len(mass), _CHUNK):
        seg = mass[start : start + _CHUNK]
        s = float(np.sum(seg))
        if acc + s > x:
            cum = np.cumsum(seg) + acc
            return start + int(np.searchsorted(cum, x, side="right"))
        acc += s
    return len(mass) - 1


def sample(state: TrialEnsemble, rng_seed) -> tuple:
    """Draw one occupation tuple from the state's probability distribution.

    Deterministic given the seed: cumulative-sum inversion over entries in
    ascending lexicographic order (explicit) or ascending product key with
    ascending first component inside the bin (binned).
    """
    rng = rng_seed if isinstance(rng_seed, SplitMix64) else SplitMix64(int(rng_seed))
    masses = state.entry_masses()
    total = state.total_mass()
    x = rng.uniform() * total
    i = _locate_quantile(masses, x)
    if state.layout == "binned":
        members = _bin_members(int(state.keys[i]), state.domain)
        j = min(int(rng.uniform() * len(members)), len(members) - 1)
        return members[j]
    return tuple(int(v) for v in state.tuples[i])
