"""Iterated conditional measurement that concentrates mass on factor pairs.

One iteration I_l: attach a fresh marker |alpha^(l)>, let the diagonal
Hamiltonian rotate it for a time t_l, then condition on the marker having
rotated at the target frequency Omega_N.  Trial pairs whose product is N are
untouched; everything else is suppressed by |eps|^2 < 1.  Repeating with
random times drives the register onto the factor states.

Times are drawn as t_l = (2*pi/g) * r_l with r_l uniform in [0, 1); the unit
of time throughout is 1/g for the leading coupling g.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

from .dynamics import MarkerAmplitude, OscillatorParams
from .ensemble import (
    TargetState,
    TrialEnsemble,
    conditional_update,
    fidelity,
    init_uniform_factoring,
    sample,
)
from .errors import DomainError
from .rng import SplitMix64

# child-stream indices off the master seed; fixed so reports are reproducible
_STREAM_TIMES = 0
_STREAM_SAMPLE = 1
_STREAM_STATS = 2

# published reference trajectory for the N = 1,030,189 = 1009 x 1021 example
# (|alpha| = 2, g = 1, K = 1): per iteration (fidelity, Pr(E_l), t_l)
TABLE1_N = 1_030_189
TABLE1_ROWS = (
    (2.010e-8, 0.143, 1.704),
    (1.403e-7, 0.143, 1.342),
    (9.782e-7, 0.143, 5.000),
    (6.821e-6, 0.143, 4.610),
    (4.739e-5, 0.144, 0.732),
    (3.259e-4, 0.145, 3.108),
    (2.172e-3, 0.150, 1.635),
    (1.445e-2, 0.150, 4.559),
    (1.045e-1, 0.138, 4.222),
    (5.092e-1, 0.205, 6.046),
    (8.506e-1, 0.599, 2.434),
    (9.919e-1, 0.858, 1.175),
    (9.985e-1, 0.994, 5.089),
    (9.997e-1, 0.999, 5.833),
    (1.000e-1, 1.000, 0.708),  # published fidelity here contradicts rows 13-14
)
TABLE1_TIMES = tuple(r[2] for r in TABLE1_ROWS)
# the final fidelity entry looks like a misprint for 1.000e0; it is reported
# in comparisons but excluded from pass/fail
TABLE1_SUSPECT_FIDELITY_ROWS = (15,)

# The published times carry three decimals, so they all sit on a 1/1000 grid.
# Any product u with u - N near a multiple of 2*pi*1000 is then quasi-resonant
# at EVERY listed time (the residual angle stays small for all fifteen
# conditionings), and those comb bins retain ~1e-5 of the mass that full-
# precision times would have suppressed.  Fidelity consequently stalls near
# 3e-4 from row 5 on.  The reference trajectory itself is sound: re-running
# with full-precision seeded times reproduces its profile, reaching F > 0.999
# within 14-15 iterations.  Only the rounding of the printed times is lossy.
TABLE1_TIME_GRID_NOTE = (
    "note: the reference times are printed with three decimals; on that 1/1000 "
    "grid every product with u - N near a multiple of 2*pi*1000 stays "
    "quasi-resonant at all fifteen times, so rows 5-14 cannot be matched from "
    "the printed values (full-precision seeded times do reach F > 0.999 within "
    "15 iterations)."
)


@dataclass(frozen=True)
class FactoringConfig:
    N: int
    params: OscillatorParams = OscillatorParams()
    alpha_schedule: tuple = (2.0,)     # constant once the list is exhausted
    times: object = "seeded"           # 'seeded' or an explicit sequence
    seed: int = 0
    L_max: int = 30
    stop_fidelity: float = 0.99

    def __post_init__(self):
        sched = self.alpha_schedule
        if isinstance(sched, (int, float)):
            sched = (float(sched),)
        else:
            sched = tuple(float(a) for a in sched)
        object.__setattr__(self, "alpha_schedule", sched)
        if not sched or any(a < 0 for a in sched):
            raise ValueError("alpha schedule must be non-negative")
        if any(b < a for a, b in zip(sched, sched[1:])):
            raise ValueError("alpha schedule must be non-decreasing")
        if self.L_max < 1:
            raise ValueError("L_max must be >= 1")
        if not 0.0 < self.stop_fidelity <= 1.0:
            raise ValueError("stop_fidelity must be in (0, 1]")
        if self.N < 2:
            raise ValueError("N must be >= 2")

    def alpha_for(self, l: int) -> float:
        return self.alpha_schedule[min(l - 1, len(self.alpha_schedule) - 1)]


@dataclass(frozen=True)
class IterationRecord:
    l: int
    t_l: float
    alpha_mag: float
    pr_E: float
    C_l: float
    lambda_l: float
    fidelity: float
    resonant: bool = False     # Pr ~ 1 while fidelity still below target


@dataclass
class RunReport:
    config: dict
    seed: int
    initial_fidelity: float
    records: list
    final_fidelity: float
    sampled_tuple: tuple = None
    sampled_factors: tuple = None      # set only when the product equals N


def sample_times(policy, seed: int, g: float):
    """Stream of evolution times: (2*pi/g) * uniform, or an explicit list."""
    if g <= 0:
        raise DomainError("time scale requires g > 0")
    if isinstance(policy, str):
        if policy != "seeded":
            raise ValueError(f"unknown time policy {policy!r}")
        rng = SplitMix64(seed)
        scale = 2.0 * math.pi / g
        while True:
            yield scale * rng.uniform()
    else:
        yield from policy


def estimate_iterations(pr0: float, lambda_bar: float) -> int:
    """ceil(ln(1/pr0) / ln(lambda_bar)): iterations to amplify pr0 to ~1."""
    if not 0.0 < pr0 < 1.0:
        raise DomainError("pr0 must be in (0, 1)")
    if lambda_bar <= 1.0:
        raise DomainError("lambda_bar must exceed 1")
    return math.ceil(math.log(1.0 / pr0) / math.log(lambda_bar))


def run_iteration(state: TrialEnsemble, config: FactoringConfig, l: int, t_l: float,
                  prev_norm: float = 1.0, target: TargetState = None,
                  in_place: bool = False):
    """One conditioning I_l; returns (post_state, IterationRecord)."""
    if target is None:
        target = TargetState.factor_target(config.N)
    alpha = MarkerAmplitude(config.alpha_for(l))
    out = conditional_update(state, config.params, alpha, config.N, t_l,
                             prev_norm=prev_norm, in_place=in_place)
    f_l = fidelity(out.post_state, target)
    rec = IterationRecord(
        l=l, t_l=t_l, alpha_mag=alpha.magnitude,
        pr_E=out.probability, C_l=out.normalization,
        lambda_l=1.0 / out.probability, fidelity=f_l,
        resonant=(out.probability > 0.999 and f_l < config.stop_fidelity),
    )
    return out.post_state, rec


def run_factoring(config: FactoringConfig, progress: bool = False) -> RunReport:
    """Iterate I_l until stop_fidelity or L_max, then sample the register."""
    state = init_uniform_factoring(config.N)       # DomainTooLarge before any scan
    target = TargetState.factor_target(config.N)   # NoFactorInRange if none
    master = SplitMix64(config.seed)
    g = abs(config.params.couplings[0])
    times = sample_times(config.times, master.derive(_STREAM_TIMES), g)

    f0 = fidelity(state, target)
    records = []
    c_prev = 1.0
    in_place = state.layout == "binned"
    for l in range(1, config.L_max + 1):
        t_l = next(times)
        state, rec = run_iteration(state, config, l, t_l, prev_norm=c_prev,
                                   target=target, in_place=in_place)
        records.append(rec)
        c_prev = rec.C_l
        if progress:
            print(f"  l={rec.l:2d} t={rec.t_l:8.4f} pr={rec.pr_E:10.4e} "
                  f"F={rec.fidelity:10.4e}", file=sys.stderr)
        if rec.fidelity >= config.stop_fidelity:
            break

    drawn = sample(state, SplitMix64(master.derive(_STREAM_SAMPLE)))
    factors = drawn if drawn[0] * drawn[1] == config.N else None
    return RunReport(
        config=config_echo(config), seed=config.seed, initial_fidelity=f0,
        records=records, final_fidelity=records[-1].fidelity if records else f0,
        sampled_tuple=drawn, sampled_factors=factors,
    )


def config_echo(config: FactoringConfig) -> dict:
    return {
        "N": config.N,
        "omega": list(config.params.omega),
        "couplings": list(config.params.couplings),
        "order": config.params.order,
        "alpha_schedule": list(config.alpha_schedule),
        "times": "seeded" if isinstance(config.times, str) else list(config.times),
        "seed": config.seed,
        "L_max": config.L_max,
        "stop_fidelity": config.stop_fidelity,
    }


def replay_table1(progress: bool = False) -> RunReport:
    """Re-run the published 15-iteration reference trajectory.

    Needs ~2 GB of memory for the 123 million product bins of the
    346,833,979 trial pairs; a couple of minutes on one core.
    """
    config = FactoringConfig(
        N=TABLE1_N, alpha_schedule=(2.0,), times=TABLE1_TIMES,
        L_max=len(TABLE1_TIMES), stop_fidelity=1.0,
    )
    return run_factoring(config, progress=progress)


@dataclass(frozen=True)
class ComparisonRow:
    l: int
    t_l: float
    ref_fidelity: float
    computed_fidelity: float
    ref_pr: float
    computed_pr: float
    pr_abs_diff: float
    fidelity_rel_diff: float
    fidelity_checked: bool
    passed: bool


# replay acceptance tolerances
PR_ABS_TOL = 0.002
FID_REL_TOL = 0.02


def table1_comparison(report: RunReport) -> list:
    """Row-by-row diff of a replay report against the reference trajectory."""
    rows = []
    for (ref_f, ref_pr, t_l), rec in zip(TABLE1_ROWS, report.records):
        pr_diff = abs(rec.pr_E - ref_pr)
        f_rel = abs(rec.fidelity - ref_f) / ref_f
        checked = rec.l not in TABLE1_SUSPECT_FIDELITY_ROWS
        ok = pr_diff <= PR_ABS_TOL and (not checked or f_rel <= FID_REL_TOL)
        rows.append(ComparisonRow(
            l=rec.l, t_l=t_l, ref_fidelity=ref_f, computed_fidelity=rec.fidelity,
            ref_pr=ref_pr, computed_pr=rec.pr_E, pr_abs_diff=pr_diff,
            fidelity_rel_diff=f_rel, fidelity_checked=checked, passed=ok,
        ))
    return rows
