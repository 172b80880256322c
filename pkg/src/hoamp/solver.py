"""Generalized amplitude amplification under B integer constraints.

A register of A oscillators holds candidate tuples; each constraint f_k gets
its own marker oscillator rotating at omega_k + f_k(tuple).  Conditioning
compares every tuple's marker against the markers of the accepted values of
f_k (those satisfying the relation), so tuples that satisfy a constraint keep
their amplitude exactly while violators shrink.

The product of coherent projectors over all accepted values, taken literally,
is not a valid measurement element, so the per-constraint multiplier is
defined as either

* max:         max over accepted x of |eps(Delta(x, v))|^2   (default), or
* sum-clipped: min(1, sum over accepted x of |eps|^2)        (sensitivity mode),

both of which equal 1 exactly on satisfying tuples and never exceed 1.  With a
single accepted value (equality constraints) the two coincide with the plain
factoring conditioning, and the factoring embedding f = m1*m2, a = N
reproduces that module's arithmetic bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constraints import ConstraintSystem, relation_accepts
from .dynamics import OscillatorParams, epsilon_batch, phase_delta_batch
from .ensemble import TrialEnsemble, apply_entry_multipliers, sample
from .errors import DomainTooLarge, InfeasibleSystem
from .factoring import sample_times
from .rng import SplitMix64

_ACCEPTED_ENUM_CAP = 1_000_000
_STATE_CAP = 4_000_000
_PAIR_BLOCK = 16_000_000


@dataclass(frozen=True)
class MarkerBank:
    """Per-constraint marker parameters: frequency and amplitude schedule."""

    omegas: tuple
    alpha_schedules: tuple             # one non-decreasing tuple per constraint

    def __post_init__(self):
        object.__setattr__(self, "omegas", tuple(float(w) for w in self.omegas))
        scheds = tuple(
            (float(s),) if isinstance(s, (int, float)) else tuple(float(a) for a in s)
            for s in self.alpha_schedules
        )
        object.__setattr__(self, "alpha_schedules", scheds)
        if len(self.omegas) != len(scheds):
            raise ValueError("need one omega and one alpha schedule per constraint")
        for s in scheds:
            if any(b < a for a, b in zip(s, s[1:])):
                raise ValueError("alpha schedules must be non-decreasing")

    @classmethod
    def uniform(cls, n_constraints: int, alpha: float = 2.0, omega: float = 0.0):
        return cls(omegas=(omega,) * n_constraints,
                   alpha_schedules=((float(alpha),),) * n_constraints)

    def alpha_for(self, k: int, l: int) -> float:
        s = self.alpha_schedules[k]
        return s[min(l - 1, len(s) - 1)]


@dataclass(frozen=True)
class AcceptedSet:
    """Accepted marker values of one constraint over the trial domain.

    `values` is the exact achievable set when the domain is small enough to
    enumerate; otherwise it is None and [lo, hi] is the range-propagated
    envelope intersected with the relation (membership then ignores
    achievability gaps, and the max-mode multiplier uses the nearest accepted
    integer, exact whenever the phase step stays below pi).
    """

    relation: str
    bound: float
    values: np.ndarray = None
    lo: int = None
    hi: int = None

    def contains(self, vals: np.ndarray) -> np.ndarray:
        if self.values is not None:
            return np.isin(vals, self.values)
        return (vals >= self.lo) & (vals <= self.hi)


def build_accepted_sets(system: ConstraintSystem) -> list:
    """Accepted value set per constraint; InfeasibleSystem if any is empty."""
    out = []
    enumerable = system.domain_size() <= _ACCEPTED_ENUM_CAP
    if enumerable:
        grids = np.meshgrid(
            *[np.arange(b + 1, dtype=np.int64) for _, b in system.variables],
            indexing="ij")
        cols = {name: g.ravel() for (name, _), g in zip(system.variables, grids)}
    for expr, relation, bound in system.constraints:
        if enumerable:
            vals = expr.evaluate_batch(cols)
            distinct = np.unique(vals.astype(np.int64)) if vals.dtype != object else \
                np.unique(np.array(sorted({int(v) for v in vals}), dtype=np.int64))
            keep = np.fromiter((relation_accepts(int(v), relation, bound) for v in distinct),
                               dtype=bool, count=len(distinct))
            accepted = distinct[keep]
            if len(accepted) == 0:
                raise InfeasibleSystem(
                    f"no achievable value of {expr.source!r} satisfies {relation} {bound}")
            out.append(AcceptedSet(relation=relation, bound=bound, values=accepted))
        else:
            lo, hi = expr.interval(system.var_bounds())
            if relation == "<=":
                hi = min(hi, math.floor(bound))
            elif relation == ">=":
                lo = max(lo, math.ceil(bound))
            else:
                if not float(bound).is_integer() or not lo <= int(bound) <= hi:
                    raise InfeasibleSystem(
                        f"{expr.source!r} = {bound} unreachable within [{lo}, {hi}]")
                lo = hi = int(bound)
            if lo > hi:
                raise InfeasibleSystem(
                    f"{expr.source!r} {relation} {bound} unreachable")
            out.append(AcceptedSet(relation=relation, bound=bound, lo=lo, hi=hi))
    return out


@dataclass(frozen=True)
class SolverRecord:
    l: int
    t_l: float
    pr_E: float                        # joint over the B markers
    C_l: float
    solution_mass: float


@dataclass
class SolverReport:
    config: dict
    seed: int
    records: list
    solutions: list                    # (tuple, mass), ascending tuple order
    sampled_tuple: tuple
    solution_count: int
    estimated_iterations: int          # A*ln(max range)/ln(measured lambda)


def _constraint_params(bank: MarkerBank, k: int) -> OscillatorParams:
    # identity linear coupling: Omega_k(v) = omega_k + v
    return OscillatorParams(omega=(bank.omegas[k],), couplings=(1.0,))


def _values_int64(vals) -> np.ndarray:
    if vals.dtype == object:
        return np.array([int(v) for v in vals], dtype=np.int64)
    return vals


def _best_angles(params: OscillatorParams, accepted: np.ndarray, vals: np.ndarray,
                 t: float) -> np.ndarray:
    """Per value, the accepted-target angle maximizing cos(Delta)."""
    n = len(vals)
    best = np.empty(n, dtype=np.float64)
    block = max(1, _PAIR_BLOCK // max(1, len(accepted)))
    for start in range(0, n, block):
        chunk = vals[start : start + block]
        angles = np.empty((len(chunk), len(accepted)), dtype=np.float64)
        for j, x in enumerate(accepted):
            angles[:, j] = phase_delta_batch(params, int(x), chunk, t)
        pick = np.argmax(np.cos(angles), axis=1)
        best[start : start + block] = angles[np.arange(len(chunk)), pick]
    return best


def constraint_multipliers(values, accepted: AcceptedSet, params: OscillatorParams,
                           alpha_mag: float, t: float, mode: str, pure: bool):
    """Per-entry multiplier for one constraint: complex eps (pure) or |eps|^2."""
    vals = _values_int64(values)
    ok = accepted.contains(vals)
    if pure:
        mult = np.ones(len(vals), dtype=np.complex128)
    else:
        mult = np.ones(len(vals), dtype=np.float64)
    idx = np.flatnonzero(~ok)
    if len(idx) == 0:
        return mult, ok
    bad = vals[idx]
    if accepted.values is not None:
        targets = accepted.values
    else:
        # nearest accepted integer in [lo, hi]
        targets = None
    a2 = alpha_mag * alpha_mag
    if mode == "max":
        if targets is None:
            nearest = np.clip(bad, accepted.lo, accepted.hi)
            angles = np.empty(len(bad), dtype=np.float64)
            for i, (v, x) in enumerate(zip(bad, nearest)):
                angles[i] = phase_delta_batch(params, int(x), np.array([v]), t)[0]
        else:
            angles = _best_angles(params, targets, bad, t)
        if pure:
            mult[idx] = epsilon_batch(alpha_mag, angles)
        else:
            mult[idx] = np.exp(-2.0 * a2 * (1.0 - np.cos(angles)))
    elif mode == "sum-clipped":
        if targets is None:
            raise DomainTooLarge("sum-clipped mode needs an enumerable accepted set")
        total = np.zeros(len(bad), dtype=np.float64)
        for x in targets:
            ang = phase_delta_batch(params, int(x), bad, t)
            total += np.exp(-2.0 * a2 * (1.0 - np.cos(ang)))
        w = np.minimum(1.0, total)
        mult[idx] = np.sqrt(w) if pure else w
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return mult, ok


def solver_iteration(state: TrialEnsemble, system: ConstraintSystem, bank: MarkerBank,
                     l: int, t_l: float, mode: str = "max", prev_norm: float = 1.0,
                     accepted_sets=None, values_cache=None, in_place: bool = False):
    """One joint conditioning over all B markers; returns (state', SolverRecord)."""
    if accepted_sets is None:
        accepted_sets = build_accepted_sets(system)
    if values_cache is None:
        cols = {name: state.tuples[:, j] for j, name in enumerate(system.names)}
        values_cache = [expr.evaluate_batch(cols) for expr, _, _ in system.constraints]
    pure = state.mode == "pure"
    joint = None
    all_ok = None
    for k, acc in enumerate(accepted_sets):
        params = _constraint_params(bank, k)
        mult, ok = constraint_multipliers(values_cache[k], acc, params,
                                          bank.alpha_for(k, l), t_l, mode, pure)
        joint = mult if joint is None else joint * mult
        all_ok = ok if all_ok is None else (all_ok & ok)
    out = apply_entry_multipliers(state, joint, prev_norm=prev_norm, in_place=in_place)
    sol_mass = float(math.fsum(out.post_state.entry_masses()[all_ok]))
    rec = SolverRecord(l=l, t_l=t_l, pr_E=out.probability, C_l=out.normalization,
                       solution_mass=sol_mass)
    return out.post_state, rec


def uniform_state(system: ConstraintSystem) -> TrialEnsemble:
    """Uniform pure superposition over the whole bounded box."""
    size = system.domain_size()
    if size > _STATE_CAP:
        raise DomainTooLarge(f"{size} tuples exceeds the explicit-state cap {_STATE_CAP}")
    grids = np.meshgrid(*[np.arange(b + 1, dtype=np.int64) for _, b in system.variables],
                        indexing="ij")
    tuples = np.stack([g.ravel() for g in grids], axis=1)
    weights = np.full(size, 1.0 / math.sqrt(size), dtype=np.complex128)
    return TrialEnsemble(mode="pure", arity=system.arity, tuples=tuples, weights=weights)


def run_solver(system: ConstraintSystem, bank: MarkerBank = None, mode: str = "max",
               times="seeded", seed: int = 0, L_max: int = 40,
               stop_mass: float = 0.999999, initial_state: TrialEnsemble = None) -> SolverReport:
    """Amplify the feasible tuples of the system and report them."""
    if bank is None:
        bank = MarkerBank.uniform(len(system.constraints))
    accepted_sets = build_accepted_sets(system)
    state = initial_state if initial_state is not None else uniform_state(system)
    cols = {name: state.tuples[:, j] for j, name in enumerate(system.names)}
    values_cache = [expr.evaluate_batch(cols) for expr, _, _ in system.constraints]

    master = SplitMix64(seed)
    stream = sample_times(times, master.derive(0), 1.0)
    records = []
    c_prev = 1.0
    for l in range(1, L_max + 1):
        t_l = next(stream)
        state, rec = solver_iteration(state, system, bank, l, t_l, mode=mode,
                                      prev_norm=c_prev, accepted_sets=accepted_sets,
                                      values_cache=values_cache)
        records.append(rec)
        c_prev = rec.C_l
        if rec.solution_mass >= stop_mass:
            break

    ok = None
    for vals, (expr, relation, bound) in zip(values_cache, system.constraints):
        v = _values_int64(vals)
        m = np.fromiter((relation_accepts(int(x), relation, bound) for x in v),
                        dtype=bool, count=len(v))
        ok = m if ok is None else (ok & m)
    masses = state.entry_masses()
    solutions = [(tuple(int(x) for x in state.tuples[i]), float(masses[i]))
                 for i in np.flatnonzero(ok)]

    lambdas = [1.0 / r.pr_E for r in records if r.pr_E < 1.0]
    if lambdas:
        lam_bar = math.exp(math.fsum(math.log(x) for x in lambdas) / len(lambdas))
    else:
        lam_bar = 1.0
    max_range = max(b + 1 for _, b in system.variables)
    est = (math.ceil(system.arity * math.log(max_range) / math.log(lam_bar))
           if lam_bar > 1.0 else 0)

    return SolverReport(
        config={"system": system.to_json(), "mode": mode, "seed": seed,
                "L_max": L_max, "stop_mass": stop_mass,
                "bank": {"omegas": list(bank.omegas),
                         "alpha_schedules": [list(s) for s in bank.alpha_schedules]}},
        seed=seed, records=records, solutions=solutions,
        sampled_tuple=sample(state, SplitMix64(master.derive(1))),
        solution_count=len(solutions), estimated_iterations=est,
    )
