"""Brute-force ground truth on a truncated Fock lattice.

Test-only reference implementation: the joint register+marker state is held as
a dense complex array, time evolution applies the diagonal Hamiltonian phases
per basis state, and the conditional measurement projects the marker onto an
explicitly constructed coherent vector.  Deliberately slow and ignorant of the
closed-form overlap used by the fast path, so the two can only agree if both
are right.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .dynamics import MarkerAmplitude, OscillatorParams, rotation_frequency
from .ensemble import TrialEnsemble
from .errors import ConditionedMassVanished, CutoffTooSmall, DimensionTooLarge

_MAX_JOINT_DIM = 1_000_000


def required_cutoff(alpha_mag: float) -> int:
    return int(math.ceil(alpha_mag**2 + 10.0 * alpha_mag + 10.0))


def coherent_vector(alpha, M: int) -> np.ndarray:
    """Fock components of |alpha>: alpha^f e^{-|alpha|^2/2} / sqrt(f!)."""
    a = alpha.value if isinstance(alpha, MarkerAmplitude) else complex(alpha)
    if M < required_cutoff(abs(a)):
        raise CutoffTooSmall(
            f"cutoff {M} < required {required_cutoff(abs(a))} for |alpha|={abs(a):.3g}")
    v = np.empty(M, dtype=np.complex128)
    v[0] = 1.0
    for f in range(1, M):
        v[f] = v[f - 1] * a / math.sqrt(f)
    v *= math.exp(-abs(a) ** 2 / 2.0)
    deficit = abs(1.0 - float(np.vdot(v, v).real))
    if deficit > 1e-12:
        raise CutoffTooSmall(f"truncation deficit {deficit:.2e} at cutoff {M}")
    return v


@dataclass
class DenseJointState:
    """Register entries tensor a marker Fock space: psi[entry, fock_level]."""

    tuples: np.ndarray             # (n_entries, arity) int64
    cutoff: int
    psi: np.ndarray                # (n_entries, cutoff) complex128

    def norm_sq(self) -> float:
        return float(np.vdot(self.psi, self.psi).real)


def _register_phase(params: OscillatorParams, tup) -> float:
    """sum_j omega_j m_j over the register oscillators."""
    if not params.omega:
        return 0.0
    return math.fsum(w * int(m) for w, m in zip(params.omega, tup))


def _product_term(tup) -> int:
    u = 1
    for x in tup:
        u *= int(x)
    return u


def _evolved_marker_rows(state, params, t, alpha, term_fn):
    """Dense joint evolution: each register row's marker picks up per-Fock-level
    phases at its own effective rotation frequency (no coherent closed form)."""
    M = required_cutoff(alpha.magnitude) + 5
    n_entries = len(state.tuples)
    if n_entries * M > _MAX_JOINT_DIM:
        raise DimensionTooLarge(f"joint dimension {n_entries * M} exceeds {_MAX_JOINT_DIM}")
    v0 = coherent_vector(alpha, M)
    levels = np.arange(M, dtype=np.float64)
    rows = np.empty((n_entries, M), dtype=np.complex128)
    for e, tup in enumerate(state.tuples):
        omega_eff = rotation_frequency(params, term_fn(tup)).value
        reg_phase = _register_phase(params, tup)
        rows[e] = v0 * np.exp(-1j * (reg_phase + omega_eff * levels) * t)
    return rows, M


def brute_force_step(state: TrialEnsemble, params: OscillatorParams, t: float,
                     target_term: int, alpha: MarkerAmplitude, term_fn=None):
    """One full measurement cycle, dense: attach |alpha>, evolve, project.

    Returns (post_state, probability).  `term_fn` maps an occupation tuple to
    the marker coupling argument; default is the product of the components.
    """
    if state.layout != "explicit":
        raise ValueError("dense oracle works on explicit states only")
    term_fn = term_fn or _product_term
    rows, M = _evolved_marker_rows(state, params, t, alpha, term_fn)

    # conditioning state: the coherent state the target branch has rotated to
    omega_target = rotation_frequency(params, target_term).value
    v_target = coherent_vector(alpha.value * cmath.exp(-1j * omega_target * t), M)

    if state.mode == "pure":
        joint = DenseJointState(tuples=state.tuples, cutoff=M,
                                psi=state.weights[:, None] * rows)
        if abs(joint.norm_sq() - 1.0) > 1e-10:
            raise ValueError(f"joint norm drifted to {joint.norm_sq()!r}")
        amps = joint.psi @ v_target.conj()
        prob = float(np.vdot(amps, amps).real)
        if prob < 1e-300:
            raise ConditionedMassVanished(f"dense surviving mass {prob:.3e}")
        post = TrialEnsemble(mode="pure", arity=state.arity,
                             tuples=state.tuples.copy(),
                             weights=amps / math.sqrt(prob))
    else:
        o = rows @ v_target.conj()
        o2 = o.real**2 + o.imag**2
        masses = state.weights * o2
        prob = float(np.sum(masses))
        if prob < 1e-300:
            raise ConditionedMassVanished(f"dense surviving mass {prob:.3e}")
        post = TrialEnsemble(mode="diagonal", arity=state.arity,
                             tuples=state.tuples.copy(), weights=masses / prob)
    return post, prob


def dense_marker_overlaps(values, omega_k: float, alpha: MarkerAmplitude, t: float,
                          accepted_values) -> np.ndarray:
    """<target_x(t)|marker_v(t)> for each value v against each accepted x.

    Dense counterpart of the constraint-marker overlap: the marker for value v
    is |alpha> evolved by per-Fock-level phases at omega_k + v, the target for
    accepted value x is the coherent state rotated to omega_k + x.  Shape of
    the result: (len(values), len(accepted_values)).
    """
    M = required_cutoff(alpha.magnitude) + 5
    v0 = coherent_vector(alpha, M)
    levels = np.arange(M, dtype=np.float64)
    targets = [
        coherent_vector(alpha.value * cmath.exp(-1j * (omega_k + float(x)) * t), M)
        for x in accepted_values
    ]
    out = np.empty((len(values), len(accepted_values)), dtype=np.complex128)
    for i, v in enumerate(values):
        marker = v0 * np.exp(-1j * (omega_k + float(v)) * levels * t)
        for j, tv in enumerate(targets):
            out[i, j] = np.vdot(tv, marker)
    return out
