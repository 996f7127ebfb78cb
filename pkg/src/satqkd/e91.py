"""E91 downlink: two-qubit statevector, CHSH estimation and noisy "virtual detectors".

Qubit 0 is Alice (spacecraft), qubit 1 is Bob (ground).  Basis index order is
|q0 q1> = |00>, |01>, |10>, |11>.  Angles are polarization angles, so a basis
at angle ``a`` is reached with RY(-2a) and the singlet correlation is
E(a, b) = -cos 2(a - b).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from . import atmosphere as atm
from . import channel as ch
from .errors import DomainError, require
from .orbitpass import PassSample

_ATOL = 1e-12
_I2 = np.eye(2, dtype=complex)
_SINGLE = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
PAIRS = ("a1b1", "a1b3", "a3b1", "a3b3")
_OUTCOMES = ("++", "--", "+-", "-+")


@dataclass(frozen=True)
class TwoQubitState:
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(4)
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > _ATOL:
            raise DomainError(f"state is not normalized (|psi|^2 = {norm!r})")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, index: int) -> "TwoQubitState":
        amps = np.zeros(4, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class Gate:
    name: Literal["H", "X", "Z", "CNOT", "RY"]
    target: int
    control: int | None = None
    theta: float = 0.0
    matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.target not in (0, 1):
            raise DomainError(f"target must be 0 or 1, got {self.target}")
        if self.name == "CNOT":
            if self.control not in (0, 1) or self.control == self.target:
                raise DomainError("CNOT needs a control qubit distinct from the target")
            mat = _cnot(self.control, self.target)
        elif self.name in _SINGLE or self.name == "RY":
            single = _ry(self.theta) if self.name == "RY" else _SINGLE[self.name]
            mat = np.kron(single, _I2) if self.target == 0 else np.kron(_I2, single)
        else:
            raise DomainError(f"unknown gate {self.name!r}")
        if not np.allclose(mat.conj().T @ mat, np.eye(4), rtol=0.0, atol=_ATOL):
            raise DomainError(f"gate {self.name} is not unitary")
        object.__setattr__(self, "matrix", mat)


def _ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _cnot(control: int, target: int) -> np.ndarray:
    mat = np.zeros((4, 4), dtype=complex)
    for i in range(4):
        bits = [(i >> 1) & 1, i & 1]
        if bits[control]:
            bits[target] ^= 1
        mat[bits[0] * 2 + bits[1], i] = 1.0
    return mat


def apply_gate(state: TwoQubitState, gate: Gate) -> TwoQubitState:
    out = gate.matrix @ state.amplitudes
    # renormalize away float drift so chained gates keep the invariant
    return TwoQubitState(out / math.sqrt(float(np.vdot(out, out).real)))


def prepare_singlet() -> TwoQubitState:
    """(|01> - |10>)/sqrt(2) from |00> via X on both qubits, H on qubit 0, then CNOT."""
    state = TwoQubitState.basis(0)
    for gate in (Gate("X", 0), Gate("X", 1), Gate("H", 0), Gate("CNOT", 1, control=0)):
        state = apply_gate(state, gate)
    return state


def outcome_probabilities(state: TwoQubitState, a: float, b: float) -> np.ndarray:
    """Born probabilities of (++, +-, -+, --) after rotating into bases ``a`` and ``b``."""
    rotated = apply_gate(apply_gate(state, Gate("RY", 0, theta=-2.0 * a)),
                         Gate("RY", 1, theta=-2.0 * b))
    p = rotated.probabilities
    return p / p.sum()


_SIGNS_A = np.array([1, 1, -1, -1])
_SIGNS_B = np.array([1, -1, 1, -1])


def sample_outcomes(state: TwoQubitState, a: float, b: float, n: int,
                    rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """``n`` joint measurement outcomes (+1/-1 arrays for Alice and Bob)."""
    idx = rng.choice(4, size=n, p=outcome_probabilities(state, a, b))
    return _SIGNS_A[idx], _SIGNS_B[idx]


def measure_pair(state: TwoQubitState, a: float, b: float, rng: np.random.Generator) -> tuple[int, int]:
    x, y = sample_outcomes(state, a, b, 1, rng)
    return int(x[0]), int(y[0])


def randomize(outcomes: np.ndarray, keep_probability: float, rng: np.random.Generator) -> np.ndarray:
    """Replace each outcome by a fair +/-1 with probability ``1 - keep_probability``."""
    if not 0.0 <= keep_probability <= 1.0:
        raise DomainError(f"keep probability must lie in [0, 1], got {keep_probability}")
    hit = rng.random(outcomes.size) >= keep_probability
    coin = np.where(rng.random(outcomes.size) < 0.5, 1, -1)
    return np.where(hit, coin, outcomes)


def tally(x: np.ndarray, y: np.ndarray) -> dict[str, int]:
    """Coincidence counts N++, N--, N+-, N-+."""
    x, y = np.asarray(x), np.asarray(y)
    return {
        "++": int(np.sum((x == 1) & (y == 1))),
        "--": int(np.sum((x == -1) & (y == -1))),
        "+-": int(np.sum((x == 1) & (y == -1))),
        "-+": int(np.sum((x == -1) & (y == 1))),
    }


def correlation(counts: dict[str, int]) -> float:
    """(N++ + N-- - N+- - N-+) / (N++ + N-- + N+- + N-+)."""
    total = sum(counts[k] for k in _OUTCOMES)
    if total <= 0:
        raise DomainError("correlation undefined for zero coincidences")
    return (counts["++"] + counts["--"] - counts["+-"] - counts["-+"]) / total


@dataclass(frozen=True)
class ChshAngles:
    a1: float = 0.0
    a3: float = math.radians(45.0)
    b1: float = math.radians(22.5)
    b3: float = math.radians(67.5)

    def pair(self, name: str) -> tuple[float, float]:
        return getattr(self, name[:2]), getattr(self, name[2:])


@dataclass(frozen=True)
class ChshResult:
    S: float
    std_error: float
    counts: dict[str, dict[str, int]]
    n_pairs: int
    correlations: dict[str, float]


def chsh_from_counts(counts: dict[str, dict[str, int]]) -> ChshResult:
    """S = E(a1,b1) - E(a1,b3) + E(a3,b1) + E(a3,b3) with binomial error propagation."""
    e = {p: correlation(counts[p]) for p in PAIRS}
    n = {p: sum(counts[p].values()) for p in PAIRS}
    s = e["a1b1"] - e["a1b3"] + e["a3b1"] + e["a3b3"]
    err = math.sqrt(sum((1.0 - e[p] ** 2) / n[p] for p in PAIRS))
    return ChshResult(S=s, std_error=err, counts=counts, n_pairs=sum(n.values()), correlations=e)


def allocate(n_pairs: int) -> dict[str, int]:
    """Split pairs equally over the four basis settings, remainder to the first ones."""
    base, extra = divmod(n_pairs, 4)
    return {p: base + (1 if i < extra else 0) for i, p in enumerate(PAIRS)}


def chsh(state: TwoQubitState, angles: ChshAngles, n_pairs: int, gamma_dop: float,
         gamma_snr: float, rng: np.random.Generator) -> ChshResult:
    """Monte Carlo CHSH estimate with Bob's outcomes passed through two virtual detectors.

    The depolarization detector keeps an outcome with probability
    ``gamma_dop``; the background detector then keeps it with probability
    ``gamma_snr``.  Dropped outcomes become fair coin flips.
    """
    if n_pairs < 4:
        raise DomainError(f"need at least 4 pairs, got {n_pairs}")
    counts = {}
    for pair, n in allocate(n_pairs).items():
        a, b = angles.pair(pair)
        x, y = sample_outcomes(state, a, b, n, rng)
        y = randomize(randomize(y, gamma_dop, rng), gamma_snr, rng)
        counts[pair] = tally(x, y)
    return chsh_from_counts(counts)


@dataclass(frozen=True)
class E91Config:
    n_pairs_per_step: int = 10_000
    angles: ChshAngles = field(default_factory=ChshAngles)
    include_snr: bool = True

    def __post_init__(self):
        require(self.n_pairs_per_step >= 1000, "n_pairs_per_step", "must be >= 1000")


@dataclass(frozen=True)
class ChshSample:
    t: float
    elevation: float
    gamma_dop: float
    gamma_snr: float
    result: ChshResult


def simulate_chsh_over_pass(samples: Sequence[PassSample], m: ch.LinkModels,
                            cfg: E91Config | None = None, seed: int = 0) -> list[ChshSample]:
    """S(t) along the pass with gamma_DoP = DoP(elevation) and gamma_SNR = S_F(elevation)."""
    cfg = cfg or E91Config()
    state = prepare_singlet()
    trace = []
    for i, s in enumerate(samples):
        g_dop = atm.dop(s.elevation, m.atmosphere)
        g_snr = ch.signal_fraction(s.elevation, m) if cfg.include_snr else 1.0
        rng = np.random.default_rng([seed, i, 2])
        res = chsh(state, cfg.angles, cfg.n_pairs_per_step, g_dop, g_snr, rng)
        trace.append(ChshSample(s.t, s.elevation, g_dop, g_snr, res))
    return trace


def validity_window(trace: Sequence[ChshSample]) -> tuple[float, float] | None:
    """(t_start, t_end) of the run around peak elevation where S + 2 std_error < -2."""
    if not trace:
        return None

    def valid(k):
        r = trace[k].result
        return r.S + 2.0 * r.std_error < -2.0

    peak = max(range(len(trace)), key=lambda k: trace[k].elevation)
    if not valid(peak):
        return None
    lo = hi = peak
    while lo > 0 and valid(lo - 1):
        lo -= 1
    while hi < len(trace) - 1 and valid(hi + 1):
        hi += 1
    return trace[lo].t, trace[hi].t
