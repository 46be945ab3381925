"""Six-stage quantum linear-system pipeline and its metrics.

The stages: load |b> into the solution register, put the clock register in
a uniform superposition, run the conditional Hamiltonian evolution and a
QFT (phase estimation), rotate an ancilla conditioned on the clock
(eigenvalue inversion), invert the phase estimation (uncompute), and
post-select the ancilla on |1>.

Register layout is [clock | solution | ancilla] with the clock at qubits
0..t-1, so the four-qubit demonstration reads |q1 q2 q3 q4> =
|clock, clock, solution, ancilla> and the solution lives in the |00x1>
subspace.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from . import circuit as qcirc
from . import qcore, reference
from .circuit import Circuit, ControlledUnitary, Gate, Hadamard, Swap
from .errors import (
    EigenvalueNotEncodable,
    NotPositiveDefinite,
    SwapPathUnavailable,
    WidthMismatch,
    ZeroProbabilityBranch,
    ZeroReferenceComponent,
)
from .qcore import DensityMatrix, PureState, Spectrum, basis_state, canonical_phase

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True, eq=False)
class LinearSystem:
    """Hermitian system A x = b with its spectral data.

    ``b`` is a unit vector; all eigenvalues are strictly positive (the
    inversion path rejects anything else).
    """

    a: np.ndarray
    b: np.ndarray
    spectrum: Spectrum
    kappa: float

    @property
    def n_solution_qubits(self) -> int:
        return int(np.log2(len(self.b)))

    def expansion_coefficients(self) -> np.ndarray:
        """Coefficients of b in the eigenbasis, beta_j = <u_j|b>."""
        return self.spectrum.eigenvectors.conj().T @ self.b


def linear_system(a, b, *, normalize: bool = False) -> LinearSystem:
    m = qcore.require_hermitian(a)
    vec = np.asarray(b, dtype=complex).reshape(-1)
    if vec.size != m.shape[0]:
        raise WidthMismatch(f"matrix {m.shape} incompatible with b of length {vec.size}")
    norm = np.linalg.norm(vec)
    if normalize:
        if norm == 0.0:
            raise ValueError("b must be nonzero")
        vec = vec / norm
    elif abs(norm - 1.0) > qcore.ATOL_STRUCTURAL:
        raise ValueError(f"b must be a unit vector (norm {norm!r}); pass normalize=True to rescale")
    spectrum = qcore.eig_hermitian(m)
    lam_min = float(spectrum.eigenvalues.min())
    if lam_min <= 0.0:
        raise NotPositiveDefinite(f"smallest eigenvalue {lam_min:.6g} <= 0")
    kappa = float(spectrum.eigenvalues.max() / lam_min)
    return LinearSystem(a=qcore._freeze(m), b=qcore._freeze(vec), spectrum=spectrum, kappa=kappa)


ROTATION_MODES = ("linear", "exact")


@dataclass(frozen=True)
class SolverConfig:
    """Pipeline knobs.

    ``clock_qubits`` (t) sets the eigenvalue register width, ``t0`` the
    evolution time scale, ``r`` the linear-approximation rotation parameter
    and ``c_tilde`` the inversion normalization (defaults to the smallest
    eigenvalue in exact mode; unused as an input in linear mode).
    """

    clock_qubits: int = 2
    t0: float = TWO_PI
    r: int = 2
    rotation_mode: str = "linear"
    c_tilde: float | None = None

    def __post_init__(self):
        if self.clock_qubits < 1:
            raise ValueError("clock_qubits must be >= 1")
        if self.t0 <= 0.0:
            raise ValueError("t0 must be positive")
        if int(self.r) != self.r or self.r < 1:
            raise ValueError("r must be a positive integer")
        if self.rotation_mode not in ROTATION_MODES:
            raise ValueError(f"rotation_mode must be one of {ROTATION_MODES}")
        if self.c_tilde is not None and self.c_tilde <= 0.0:
            raise ValueError("c_tilde must be positive when given")


def prepare_b(theta: float) -> PureState:
    """Single-qubit input state cos(theta/2)|0> + sin(theta/2)|1>."""
    if not 0.0 <= theta < TWO_PI:
        raise ValueError("theta must lie in [0, 2*pi)")
    return PureState(np.array([np.cos(theta / 2.0), np.sin(theta / 2.0)], dtype=complex))


def encoded_eigenvalues(sys: LinearSystem, cfg: SolverConfig) -> np.ndarray:
    """Clock labels lambda_j * t0 / (2*pi) the phase estimation writes."""
    return sys.spectrum.eigenvalues * cfg.t0 / TWO_PI


def is_exact_encoding(sys: LinearSystem, cfg: SolverConfig, atol: float = 1e-9) -> bool:
    k = encoded_eigenvalues(sys, cfg)
    return bool(np.all(np.abs(k - np.round(k)) <= atol))


def _check_representable(sys: LinearSystem, cfg: SolverConfig) -> None:
    k = encoded_eigenvalues(sys, cfg)
    top = 2**cfg.clock_qubits - 1
    nearest = np.round(k)
    if np.any(nearest < 1) or np.any(nearest > top):
        raise EigenvalueNotEncodable(
            f"encoded eigenvalues {k} must round into 1..{top} on {cfg.clock_qubits} clock qubits"
        )


def _require_exact(sys: LinearSystem, cfg: SolverConfig) -> np.ndarray:
    _check_representable(sys, cfg)
    k = encoded_eigenvalues(sys, cfg)
    if not is_exact_encoding(sys, cfg):
        raise EigenvalueNotEncodable(f"encoded eigenvalues {k} are not integers")
    return np.round(k).astype(int)


def conditional_evolution(sys: LinearSystem, cfg: SolverConfig) -> list[Gate]:
    """Controlled blocks realizing sum_tau |tau><tau| (x) exp(-i A tau t0 / 2^t).

    One block per clock basis value tau, each conditioned on the full clock
    bit pattern of tau; their product is exactly the summed operator
    because the clock projectors are orthogonal.
    """
    t = cfg.clock_qubits
    nb = sys.n_solution_qubits
    big_t = 2**t
    targets = tuple(range(t, t + nb))
    gates: list[Gate] = []
    for tau in range(big_t):
        u = qcore.matrix_exp_hermitian(sys.a, tau * cfg.t0 / big_t)
        controls = tuple((q, (tau >> (t - 1 - q)) & 1) for q in range(t))
        gates.append(ControlledUnitary(controls, targets, u))
    return gates


def _qpe_circuit(sys: LinearSystem, cfg: SolverConfig, n_qubits: int) -> Circuit:
    gates: list[Gate] = [Hadamard(q) for q in range(cfg.clock_qubits)]
    gates.extend(conditional_evolution(sys, cfg))
    gates.extend(qcirc.qft(cfg.clock_qubits).gates)
    return Circuit(n_qubits, tuple(gates))


def phase_estimate(sys: LinearSystem, cfg: SolverConfig, b_state: PureState) -> PureState:
    """Run phase estimation on |0..0>_clock (x) |b>.

    With exactly encodable eigenvalues the output is sum_j beta_j
    |lambda_j t0/2pi>|u_j>; otherwise amplitude leaks to neighboring clock
    labels, which clock_leakage() quantifies.
    """
    if 2**b_state.n_qubits != len(sys.b):
        raise WidthMismatch("b state width does not match the system dimension")
    _check_representable(sys, cfg)
    n = cfg.clock_qubits + b_state.n_qubits
    initial = basis_state(cfg.clock_qubits, 0).tensor(b_state)
    return qcirc.run_circuit(initial, _qpe_circuit(sys, cfg, n))


def clock_leakage(state: PureState, sys: LinearSystem, cfg: SolverConfig) -> float:
    """Probability mass on clock labels other than the nearest-integer encodings."""
    t = cfg.clock_qubits
    expected = {int(k) for k in np.round(encoded_eigenvalues(sys, cfg))}
    probs = state.probabilities().reshape(2**t, -1).sum(axis=1)
    return float(sum(p for label, p in enumerate(probs) if label not in expected))


# ---------------------------------------------------------------------------
# Eigenvalue inversion


def _ry_block(theta: float) -> np.ndarray:
    return qcore.rotation_y(theta)


def eigenvalue_inversion_gates(
    cfg: SolverConfig,
    n_solution_qubits: int = 1,
    encoded_values: Sequence[int] | None = None,
) -> list[Gate]:
    """The swap-based fast path: clock swap, then ancilla rotations.

    Swapping the two clock qubits relabels |k> -> |2/k> for k in {1, 2},
    after which a rotation linear in the clock value implements angles
    proportional to 1/lambda.  Linear mode stacks one controlled Ry per
    clock qubit with theta_j = (2*pi/2^r)/lambda_j in total; exact mode
    rotates each relabeled clock value by 2*arcsin(c_tilde/lambda_j).

    Only a two-qubit clock supports this permutation; pass the integer
    clock labels as ``encoded_values`` to have the relabeling validated
    (anything outside {1, 2} is not inverted by the swap).
    """
    t = cfg.clock_qubits
    if t != 2:
        raise SwapPathUnavailable(f"swap relabeling is defined for 2 clock qubits, not {t}")
    if encoded_values is not None and any(int(k) not in (1, 2) for k in encoded_values):
        raise SwapPathUnavailable(
            f"clock labels {tuple(encoded_values)} are not permuted onto 2/lambda by the swap"
        )
    ancilla = t + n_solution_qubits
    gates: list[Gate] = [Swap(0, 1)]
    if cfg.rotation_mode == "linear":
        base = cfg.t0 / 2 ** (cfg.r + 1)
        for q in range(t):
            place = 2 ** (t - 1 - q)
            gates.append(ControlledUnitary(((q, 1),), (ancilla,), _ry_block(base * place)))
    else:
        if cfg.c_tilde is None:
            raise ValueError("exact mode needs c_tilde (resolve_config fills the default)")
        for m in range(1, 2**t):
            lam = 4.0 * np.pi / (cfg.t0 * m)
            arg = cfg.c_tilde / lam
            if arg > 1.0 + 1e-12:
                continue  # no valid rotation; such labels carry no amplitude
            theta = 2.0 * np.arcsin(min(arg, 1.0))
            controls = tuple((q, (m >> (t - 1 - q)) & 1) for q in range(t))
            gates.append(ControlledUnitary(controls, (ancilla,), _ry_block(theta)))
    return gates


def _general_inversion_gates(cfg: SolverConfig, n_solution_qubits: int) -> list[Gate]:
    """Rotations keyed directly on the clock label |k>, no swap relabeling.

    Works for any encodable spectrum (and approximately encoded ones);
    used whenever the swap fast path does not apply.
    """
    t = cfg.clock_qubits
    ancilla = t + n_solution_qubits
    gates: list[Gate] = []
    for k in range(1, 2**t):
        lam = TWO_PI * k / cfg.t0
        if cfg.rotation_mode == "linear":
            theta = (TWO_PI / 2**cfg.r) / lam
        else:
            if cfg.c_tilde is None:
                raise ValueError("exact mode needs c_tilde (resolve_config fills the default)")
            arg = cfg.c_tilde / lam
            if arg > 1.0 + 1e-12:
                continue
            theta = 2.0 * np.arcsin(min(arg, 1.0))
        controls = tuple((q, (k >> (t - 1 - q)) & 1) for q in range(t))
        gates.append(ControlledUnitary(controls, (ancilla,), _ry_block(theta)))
    return gates


def swap_path_available(sys: LinearSystem, cfg: SolverConfig) -> bool:
    if cfg.clock_qubits != 2 or not is_exact_encoding(sys, cfg):
        return False
    labels = np.round(encoded_eigenvalues(sys, cfg)).astype(int)
    return bool(np.all(np.isin(labels, (1, 2))))


def resolve_config(sys: LinearSystem, cfg: SolverConfig) -> SolverConfig:
    """Fill the c_tilde default and validate it against the spectrum."""
    if cfg.rotation_mode != "exact":
        return cfg
    lam_min = float(sys.spectrum.eigenvalues.min())
    if cfg.c_tilde is None:
        return replace(cfg, c_tilde=lam_min)
    if cfg.c_tilde > lam_min + 1e-9:
        raise ValueError(f"c_tilde {cfg.c_tilde} exceeds the smallest eigenvalue {lam_min}")
    return cfg


def build_circuit(sys: LinearSystem, cfg: SolverConfig, *, use_swap_path: bool | None = None) -> Circuit:
    """Assemble the full pipeline circuit (measurement excluded).

    The uncompute block starts by undoing the inversion-stage clock swap
    (when the fast path is used) and then inverts the phase estimation, so
    the clock returns to |0..0> under exact encoding.
    """
    cfg = resolve_config(sys, cfg)
    _check_representable(sys, cfg)
    t, nb = cfg.clock_qubits, sys.n_solution_qubits
    n = t + nb + 1
    if use_swap_path is None:
        use_swap_path = swap_path_available(sys, cfg)
    qpe = _qpe_circuit(sys, cfg, n)
    if use_swap_path:
        labels = np.round(encoded_eigenvalues(sys, cfg)).astype(int)
        inversion = eigenvalue_inversion_gates(cfg, nb, encoded_values=labels)
        inversion.append(Swap(0, 1))
    else:
        inversion = _general_inversion_gates(cfg, nb)
    gates = tuple(qpe.gates) + tuple(inversion) + tuple(qpe.inverse().gates)
    registers = {
        "clock": tuple(range(t)),
        "b": tuple(range(t, t + nb)),
        "ancilla": (n - 1,),
    }
    return Circuit(n, gates, registers)


# ---------------------------------------------------------------------------
# Ideal final state and metrics


def _branch_amplitudes(sys: LinearSystem, cfg: SolverConfig) -> tuple[np.ndarray, np.ndarray]:
    """Per-eigenvalue ancilla (|0>, |1>) amplitudes of the ideal output."""
    lam = sys.spectrum.eigenvalues
    if cfg.rotation_mode == "linear":
        theta = (TWO_PI / 2**cfg.r) / lam
        sin_part = np.sin(theta / 2.0)
        cos_part = np.cos(theta / 2.0)
    else:
        sin_part = cfg.c_tilde / lam
        cos_part = np.sqrt(1.0 - sin_part**2)
    return cos_part, sin_part


def _ideal_final_state(sys: LinearSystem, cfg: SolverConfig) -> PureState:
    cfg = resolve_config(sys, cfg)
    t, nb = cfg.clock_qubits, sys.n_solution_qubits
    beta = sys.expansion_coefficients()
    cos_part, sin_part = _branch_amplitudes(sys, cfg)
    clock0 = np.zeros(2**t, dtype=complex)
    clock0[0] = 1.0
    amp = np.zeros(2 ** (t + nb + 1), dtype=complex)
    for j in range(len(beta)):
        anc = np.array([cos_part[j], sin_part[j]], dtype=complex)
        amp += beta[j] * np.kron(clock0, np.kron(sys.spectrum.eigenvectors[:, j], anc))
    return PureState(amp)


def theoretical_final_state(sys: LinearSystem, cfg: SolverConfig) -> PureState:
    """Ideal pre-measurement output, the fidelity reference for noisy runs.

    Requires exactly encodable eigenvalues; each branch carries ancilla
    amplitude sin(theta_j/2) in linear mode and c_tilde/lambda_j in exact
    mode.
    """
    _require_exact(sys, cfg)
    return _ideal_final_state(sys, cfg)


def effective_rotation_constant(eigenvalues, r: int) -> float:
    """Mean over j of lambda_j * sin(theta_j / 2) with theta_j = (2*pi/2^r)/lambda_j.

    The derived normalization the linear-approximation rotations realize;
    about 0.736 for the demonstration spectrum (1, 2) at r = 2.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    theta = (TWO_PI / 2**r) / lam
    return float(np.mean(lam * np.sin(theta / 2.0)))


def max_relative_error(x_exp, x_theory) -> float:
    """max_i |x_exp_i - x_theory_i| / |x_theory_i| after phase alignment.

    Both vectors are canonicalized (first significant component made real
    positive) before comparison; no normalization is applied.
    """
    e = canonical_phase(x_exp)
    th = canonical_phase(x_theory)
    if e.size != th.size:
        raise WidthMismatch(f"length mismatch: {e.size} vs {th.size}")
    scale = np.max(np.abs(th))
    if scale == 0.0 or np.any(np.abs(th) < 1e-15 * scale):
        raise ZeroReferenceComponent("reference vector has a zero component")
    return float(np.max(np.abs(e - th) / np.abs(th)))


@dataclass(frozen=True, eq=False)
class SolveReport:
    """Post-selected solution and the run's quality metrics."""

    x_quantum: np.ndarray
    x_classical: np.ndarray
    success_probability: float
    fidelity_4q: float
    max_rel_error: float
    clock_residual: float
    final_state: PureState | None = None
    final_density: DensityMatrix | None = None

    @property
    def solution_ratio_sq(self) -> float:
        """|x_1 / x_2|^2 for two-component solutions (nan otherwise)."""
        if len(self.x_quantum) != 2 or abs(self.x_quantum[1]) == 0.0:
            return float("nan")
        return float(abs(self.x_quantum[0]) ** 2 / abs(self.x_quantum[1]) ** 2)

    def to_dict(self) -> dict:
        out = {
            "x_quantum": _complex_vector_json(self.x_quantum),
            "x_classical": _complex_vector_json(self.x_classical),
            "success_probability": self.success_probability,
            "fidelity_4q": self.fidelity_4q,
            "max_rel_error": self.max_rel_error,
            "clock_residual": self.clock_residual,
            "solution_ratio_sq": self.solution_ratio_sq,
        }
        if self.final_state is not None:
            out["final_amplitudes"] = _complex_vector_json(self.final_state.amplitudes)
        elif self.final_density is not None:
            out["final_populations"] = [float(p) for p in self.final_density.populations()]
        return out


def _complex_vector_json(v: np.ndarray) -> dict:
    return {"re": [float(x) for x in np.real(v)], "im": [float(x) for x in np.imag(v)]}


def _dominant_vector(rho: DensityMatrix) -> np.ndarray:
    w, v = np.linalg.eigh(rho.matrix)
    return v[:, -1]


def run_hhl(
    sys: LinearSystem,
    cfg: SolverConfig,
    *,
    noise: Sequence[qcirc.NoiseEvent] | None = None,
    noise_builder=None,
) -> SolveReport:
    """Run the six-stage pipeline and compare against the direct solve.

    ``noise`` routes the run through the density-matrix engine with the
    given schedule; ``noise_builder`` may instead be a callable mapping the
    assembled circuit to a schedule (so schedules can depend on gate
    count).  x_quantum is the renormalized solution-register state
    conditioned on ancilla = 1 with the clock traced out.
    """
    cfg = resolve_config(sys, cfg)
    c = build_circuit(sys, cfg)
    t, nb = cfg.clock_qubits, sys.n_solution_qubits
    n = c.n_qubits
    ancilla = n - 1
    b_indices = list(range(t, t + nb))
    initial = basis_state(t, 0).tensor(PureState(sys.b)).tensor(basis_state(1, 0))

    if noise_builder is not None:
        noise = noise_builder(c)

    if noise is None:
        final = qcirc.run_circuit(initial, c)
        clock_mass = final.probabilities().reshape(2**t, -1).sum(axis=1)
        clock_residual = float(1.0 - clock_mass[0])
        prob, post = qcirc.measure_qubit(final, ancilla, 1)
        rho_b = qcore.partial_trace(post.density(), b_indices)
        final_density = None
        rho_final = final.density()
    else:
        rho0 = initial.density()
        rho_final = qcirc.evolve_density(rho0, c, noise)
        clock_mass = rho_final.populations().reshape(2**t, -1).sum(axis=1)
        clock_residual = float(1.0 - clock_mass[0])
        prob, post_rho = qcirc.measure_qubit(rho_final, ancilla, 1)
        rho_b = qcore.partial_trace(post_rho, b_indices)
        final = None
        final_density = rho_final

    if prob <= 1e-12:
        raise ZeroProbabilityBranch(f"post-selection probability {prob:.3e} below 1e-12")

    x_quantum = canonical_phase(_dominant_vector(rho_b))
    x_classical = reference.direct_solve(sys.a, sys.b)
    x_classical = canonical_phase(x_classical / np.linalg.norm(x_classical))
    theory = _ideal_final_state(sys, cfg)
    fid = qcore.fidelity(theory.density(), rho_final)
    return SolveReport(
        x_quantum=x_quantum,
        x_classical=x_classical,
        success_probability=float(prob),
        fidelity_4q=float(fid),
        max_rel_error=max_relative_error(x_quantum, x_classical),
        clock_residual=clock_residual,
        final_state=final,
        final_density=final_density,
    )


# ---------------------------------------------------------------------------
# Parameter sweeps


@dataclass(frozen=True)
class SweepRow:
    parameter: str
    value: float
    max_rel_error: float
    success_probability: float


def sweep_r(
    sys: LinearSystem,
    r_values: Sequence[int],
    mode: str = "linear",
    *,
    base_config: SolverConfig | None = None,
) -> list[SweepRow]:
    """One pipeline run per rotation parameter r."""
    cfg0 = base_config if base_config is not None else SolverConfig(rotation_mode=mode)
    rows = []
    for r in r_values:
        cfg = replace(cfg0, r=int(r), rotation_mode=mode)
        report = run_hhl(sys, cfg)
        rows.append(SweepRow("r", float(r), report.max_rel_error, report.success_probability))
    return rows


def sweep_t0(
    sys: LinearSystem,
    t0_values: Sequence[float],
    mode: str = "linear",
    *,
    base_config: SolverConfig | None = None,
) -> list[SweepRow]:
    """One pipeline run per evolution time scale t0 (approximate encodings allowed)."""
    cfg0 = base_config if base_config is not None else SolverConfig(rotation_mode=mode)
    rows = []
    for t0 in t0_values:
        cfg = replace(cfg0, t0=float(t0), rotation_mode=mode)
        report = run_hhl(sys, cfg)
        rows.append(SweepRow("t0", float(t0), report.max_rel_error, report.success_probability))
    return rows


def theta_for_target_ratio(sys: LinearSystem, ratio_sq: float) -> float:
    """Input angle theta whose solution satisfies |x_1/x_2|^2 = ratio_sq.

    Only defined for real 2x2 systems.  Derived by inverting A on
    b(theta) = (cos(theta/2), sin(theta/2)) and solving for tan(theta/2);
    of the two sign branches the one continuous through theta = pi/2 at
    ratio 1 is returned.
    """
    if sys.a.shape != (2, 2):
        raise WidthMismatch("ratio targeting is defined for 2x2 systems")
    if np.max(np.abs(sys.a.imag)) > 1e-12:
        raise ValueError("ratio targeting assumes a real system matrix")
    minv = np.linalg.inv(sys.a.real)
    root = np.sqrt(float(ratio_sq))
    tan_half = (root * minv[1, 0] - minv[0, 0]) / (minv[0, 1] - root * minv[1, 1])
    theta = 2.0 * np.arctan(tan_half)
    return float(theta % TWO_PI)
