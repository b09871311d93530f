"""The Metropolis walk: configuration, register-level steps and chain driver.

Register layout for full simulation: system (x) bin register (x) pointer (x)
accept qubit.  The bin register is measured right after the energy
preparation, so internally only system (x) pointer (x) accept is kept as a
vector, indexed ``j * 2N + x * 2 + a`` with ``j`` an eigenvector index.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .hamiltonians import PERescaling
from .linalg import HermitianEigensystem
from .phase_estimation import BinStructure, PEModel, bin_structure, pe_unitary_eigenbasis


class DegenerateBins(ValueError):
    """A bin holds more than one eigen-level; the classical reduction does not apply."""


def make_rng(seed: int, chain: int = 0) -> np.random.Generator:
    """Counter-based stream for chain ``chain`` of master seed ``seed``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(chain)])))


# ---------------------------------------------------------------------------
# acceptance rule


def acceptance(e_new, e_old, beta: float, tol: float = 1e-12) -> np.ndarray:
    """f = min(1, exp(-beta (E_new - E_old))); downhill moves always accepted.

    ``beta = inf`` uses the zero-temperature limit: 1 if E_new <= E_old else 0.
    """
    if beta < 0 or math.isnan(beta):
        raise ValueError("beta must be >= 0")
    de = np.asarray(e_new, dtype=float) - np.asarray(e_old, dtype=float)
    if math.isinf(beta):
        scale = tol * max(1.0, float(np.max(np.abs(de), initial=0.0)))
        return np.where(de <= scale, 1.0, 0.0)
    if beta == 0:
        return np.ones_like(de)
    return np.exp(np.minimum(0.0, -beta * de))


def w_from_f(f: float) -> np.ndarray:
    a = math.sqrt(max(0.0, 1.0 - f))
    b = math.sqrt(min(1.0, max(0.0, f)))
    return np.array([[a, b], [b, -a]])


def w_gate(k_bin: int, i_bin: int, beta: float, resc: PERescaling) -> np.ndarray:
    """Coherent Metropolis rotation for a move from bin ``i_bin`` to ``k_bin``."""
    f = float(acceptance(k_bin * resc.bin_width, i_bin * resc.bin_width, beta))
    return w_from_f(f)


def w_theta(beta: float) -> np.ndarray:
    """R_y(-theta) X R_y(theta) with cos(theta) = exp(-beta)."""
    theta = math.acos(math.exp(-beta)) if not math.isinf(beta) else math.pi / 2
    def ry(a):
        return np.array([[math.cos(a / 2), -math.sin(a / 2)], [math.sin(a / 2), math.cos(a / 2)]])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    return ry(-theta) @ x @ ry(theta)


# ---------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class UpdateSet:
    """Finite update distribution: unitaries ``ops[k]`` drawn with ``weights[k]``."""

    ops: tuple[np.ndarray, ...]
    weights: tuple[float, ...]
    labels: tuple[str, ...] = ()
    check_symmetric: bool = True

    def __post_init__(self):
        ops = tuple(np.asarray(c, dtype=complex) for c in self.ops)
        object.__setattr__(self, "ops", ops)
        w = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", w)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"C{k}" for k in range(len(ops))))
        if len(ops) == 0 or len(ops) != len(w):
            raise ValueError("need one weight per update")
        if any(x <= 0 for x in w) or abs(sum(w) - 1) > 1e-12:
            raise ValueError("weights must be positive and sum to 1")
        d = ops[0].shape[0]
        for c in ops:
            if c.shape != (d, d) or np.abs(c.conj().T @ c - np.eye(d)).max() > 1e-10:
                raise ValueError("updates must be unitaries of equal size")
        if self.check_symmetric and not self.is_symmetric():
            raise ValueError("update set is not closed under adjoints with equal weights")

    @property
    def dim(self) -> int:
        return self.ops[0].shape[0]

    def is_symmetric(self, tol: float = 1e-10) -> bool:
        for c, w in zip(self.ops, self.weights):
            cd = c.conj().T
            if not any(np.abs(cd - c2).max() < tol and abs(w - w2) < 1e-12 for c2, w2 in zip(self.ops, self.weights)):
                return False
        return True

    @classmethod
    def uniform(cls, ops, labels=(), check_symmetric: bool = True) -> "UpdateSet":
        ops = tuple(ops)
        return cls(ops, tuple([1.0 / len(ops)] * len(ops)), tuple(labels), check_symmetric)


def pauli_update_set(n: int, spec: list[tuple[int, str]]) -> UpdateSet:
    """Uniform set of single-site Pauli updates, e.g. ``[(0, "X"), (1, "Z")]``."""
    from .hamiltonians import PauliString

    ops, labels = [], []
    for site, letter in spec:
        letters = "".join(letter if k == site else "I" for k in range(n))
        ops.append(PauliString(1.0, letters).operator())
        labels.append(f"{letter}{site}")
    return UpdateSet.uniform(ops, labels)


def local_pauli_update_set(n: int) -> UpdateSet:
    """All single-site X, Y, Z updates."""
    return pauli_update_set(n, [(k, c) for k in range(n) for c in "XYZ"])


@dataclass(frozen=True)
class MetropolisConfig:
    """Everything that defines one chain.

    ``r_tilde=None`` means r bits for exact phase estimation and r - 1 bits
    for the pointer models.
    """

    beta: float
    pe: PEModel
    updates: UpdateSet
    n_star: int = 50
    r_tilde: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.n_star < 1:
            raise ValueError("n_star must be >= 1")
        if self.beta < 0 or math.isnan(self.beta):
            raise ValueError("beta must be >= 0 (inf allowed)")
        r = self.pe.r
        if self.r_tilde is not None and r is not None and not 1 <= self.r_tilde <= r:
            raise ValueError("need 1 <= r_tilde <= r")

    @property
    def effective_r_tilde(self) -> int | None:
        r = self.pe.r
        if r is None:
            return None
        if self.r_tilde is not None:
            return self.r_tilde
        return r if self.pe.variant == "exact" else max(1, r - 1)


# ---------------------------------------------------------------------------
# register model shared by the walk and the channel assembly


class RegisterModel:
    """Operators of one Metropolis step on system (x) pointer (x) accept.

    All system operators are expressed in the eigenbasis of H.
    """

    def __init__(self, h: HermitianEigensystem, cfg: MetropolisConfig):
        if cfg.pe.variant == "median":
            raise ValueError("median-boosted PE has no unitary pointer model; use exact or realistic")
        if cfg.updates.dim != h.dim:
            raise ValueError(f"update dimension {cfg.updates.dim} != system dimension {h.dim}")
        self.h = h
        self.cfg = cfg
        self.bs: BinStructure = bin_structure(h, cfg.pe)
        self.d = h.dim
        self.N = self.bs.n_bins
        self.D = self.d * self.N * 2
        v = h.eigenvectors
        self.c_eig = [v.conj().T @ c @ v for c in cfg.updates.ops]
        self._cache: dict = {}

    @cached_property
    def phi(self) -> np.ndarray:
        """Phi (x) I_acc on the internal space."""
        return np.kron(pe_unitary_eigenbasis(self.bs), np.eye(2))

    def f_row(self, k1: int) -> np.ndarray:
        """Acceptance f(k1 -> x) for every pointer readout x."""
        e = self.bs.bin_energies
        return acceptance(e, e[k1], self.cfg.beta)

    def w_diag(self, k1: int) -> np.ndarray:
        """W conditioned on the pointer value, as a D x D block-diagonal matrix."""
        f = self.f_row(k1)
        blocks = np.zeros((self.N, 2, 2))
        a = np.sqrt(np.clip(1 - f, 0, None))
        b = np.sqrt(np.clip(f, 0, None))
        blocks[:, 0, 0], blocks[:, 0, 1], blocks[:, 1, 0], blocks[:, 1, 1] = a, b, b, -a
        w = np.zeros((self.D, self.D))
        for j in range(self.d):
            for x in range(self.N):
                s = j * 2 * self.N + 2 * x
                w[s:s + 2, s:s + 2] = blocks[x]
        return w

    def U(self, c: int, k1: int) -> np.ndarray:
        key = ("U", c, k1)
        if key not in self._cache:
            cd = np.kron(self.c_eig[c], np.eye(2 * self.N))
            self._cache[key] = self.w_diag(k1) @ self.phi @ cd
        return self._cache[key]

    def G(self, k1: int) -> np.ndarray:
        """Energy preparation for bin-register outcome k1: system -> internal space."""
        key = ("G", k1)
        if key not in self._cache:
            amps = self.bs.amplitudes
            n = self.N
            g = np.zeros((self.D, self.d), dtype=complex)
            for j in range(self.d):
                for p in range(n):
                    g[j * 2 * n + 2 * p, j] = np.conj(amps[j, (k1 - p) % n]) * amps[j, k1 % n]
            self._cache[key] = g
        return self._cache[key]

    def P1(self, k1: int) -> np.ndarray:
        key = ("P1", k1)
        if key not in self._cache:
            mask = self.bs.match_mask(k1, self.cfg.effective_r_tilde)
            diag = np.kron(np.ones(self.d), np.kron(mask.astype(float), np.ones(2)))
            self._cache[key] = self.phi.conj().T @ (diag[:, None] * self.phi)
        return self._cache[key]

    def acc_mask(self, a: int) -> np.ndarray:
        return (np.arange(self.D) % 2) == a

    def Q1(self, c: int, k1: int) -> np.ndarray:
        key = ("Q1", c, k1)
        if key not in self._cache:
            u = self.U(c, k1)
            m = self.acc_mask(1)
            self._cache[key] = u[m].conj().T @ u[m]
        return self._cache[key]

    def bin_probabilities(self, psi: np.ndarray) -> np.ndarray:
        """Outcome distribution of the bin register for a system state (eigenbasis)."""
        return (np.abs(self.bs.amplitudes) ** 2).T @ (np.abs(psi) ** 2)

    def to_tensor(self, u: np.ndarray) -> np.ndarray:
        return u.reshape(self.d, self.N, 2)


# ---------------------------------------------------------------------------
# walk


@dataclass
class WalkRecord:
    step: int
    level: int | None
    state_hash: str
    energy_bin: int
    outcome: str
    n_reject_used: int
    observables: np.ndarray = field(default_factory=lambda: np.zeros(0))


def _sample(probs: np.ndarray, rng: np.random.Generator) -> int:
    p = np.clip(np.asarray(probs, dtype=float), 0, None)
    c = np.cumsum(p)
    return int(min(np.searchsorted(c, rng.random() * c[-1], side="right"), len(p) - 1))


def _normalize(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _trace_ancillas(model: RegisterModel, u: np.ndarray, rng) -> np.ndarray:
    """Unravel the partial trace: measure pointer and accept qubit, keep the system."""
    t = model.to_tensor(u)
    probs = np.sum(np.abs(t) ** 2, axis=0).ravel()
    k = _sample(probs, rng)
    x, a = divmod(k, 2)
    return _normalize(t[:, x, a])


def _hash_state(psi: np.ndarray) -> str:
    # phase-fix on the largest component so equal rays hash equally
    k = int(np.argmax(np.abs(psi)))
    v = psi * np.exp(-1j * np.angle(psi[k]))
    return hashlib.sha1(np.round(v, 8).tobytes()).hexdigest()[:10]


def step_internal(model: RegisterModel, psi: np.ndarray, rng: np.random.Generator, step: int = 0):
    """One Metropolis step on a system state given in the eigenbasis.

    Returns ``(new_psi, record)``; after an abort the new state is the
    eigenbasis image of |0...0>.
    """
    cfg = model.cfg
    k1 = _sample(model.bin_probabilities(psi), rng)
    v = _normalize(model.G(k1) @ psi)
    c = _sample(np.array(cfg.updates.weights), rng)
    u = model.U(c, k1)
    w = u @ v
    m1 = model.acc_mask(1)
    p_acc = float(np.sum(np.abs(w[m1]) ** 2))
    if rng.random() < p_acc:
        t = model.to_tensor(np.where(m1, w, 0))
        k2 = _sample(np.sum(np.abs(t[:, :, 1]) ** 2, axis=0), rng)
        t2 = np.zeros_like(t)
        t2[:, k2, 1] = t[:, k2, 1]
        back = model.phi.conj().T @ t2.ravel()
        new = _trace_ancillas(model, _normalize(back), rng)
        return new, WalkRecord(step, None, "", k2, "accepted", 0)
    # reject: undo U, then alternate P and Q measurements
    v = _normalize(u.conj().T @ np.where(m1, 0, w))
    p1 = model.P1(k1)
    q1 = model.Q1(c, k1)
    rounds = 0
    while True:
        vp = p1 @ v
        pp = float(np.vdot(vp, vp).real)
        if rng.random() < pp:
            new = _trace_ancillas(model, _normalize(vp), rng)
            return new, WalkRecord(step, None, "", k1, "rejected", rounds)
        if rounds >= cfg.n_star:
            start = model.h.eigenvectors.conj().T[:, 0].copy()
            return start, WalkRecord(step, None, "", k1, "aborted", rounds)
        v = _normalize(v - vp)
        vq = q1 @ v
        pq = float(np.vdot(vq, vq).real)
        v = _normalize(vq if rng.random() < pq else v - vq)
        rounds += 1


def register_dims(model: RegisterModel) -> tuple[int, int, int, int]:
    return model.d, model.N, model.N, 2


def step_full(state: np.ndarray, model: RegisterModel, rng: np.random.Generator, step: int = 0):
    """One step on the full register vector (computational basis).

    The layout is system (x) bin register (x) pointer (x) accept qubit; the
    input must have all ancillas in |0>.  The returned register vector has
    the ancillas re-initialised to |0...0>.
    """
    d, nb, npt, na = register_dims(model)
    t = np.asarray(state, dtype=complex).reshape(d, nb * npt * na)
    if np.linalg.norm(t[:, 1:]) > 1e-10:
        raise ValueError("ancilla registers must start in |0...0>")
    v = model.h.eigenvectors
    psi = v.conj().T @ t[:, 0]
    new, rec = step_internal(model, _normalize(psi), rng, step)
    out = np.zeros((d, nb * npt * na), dtype=complex)
    out[:, 0] = v @ new
    rec.state_hash = _hash_state(out[:, 0])
    return out.ravel(), rec


def initial_register(model: RegisterModel) -> np.ndarray:
    d, nb, npt, na = register_dims(model)
    out = np.zeros(d * nb * npt * na, dtype=complex)
    out[0] = 1.0
    return out


# ---------------------------------------------------------------------------
# classical reduction


@dataclass(frozen=True)
class TransitionMatrix:
    S: np.ndarray
    energies: np.ndarray

    def stationary(self) -> np.ndarray:
        w, vl = np.linalg.eig(self.S.T)
        k = int(np.argmin(np.abs(w - 1)))
        p = np.real(vl[:, k])
        return p / p.sum()

    def gap(self) -> float:
        mods = np.sort(np.abs(np.linalg.eigvals(self.S)))[::-1]
        return float(1 - mods[1]) if len(mods) > 1 else 1.0


def classical_reduction(h: HermitianEigensystem, cfg: MetropolisConfig) -> TransitionMatrix:
    """Level-to-level transition matrix of the walk under projective phase estimation.

    S[i, k] = sum_C w_C |<psi_k|C|psi_i>|^2 f(E_i -> E_k) for k != i, with the
    diagonal filling each row to one.
    """
    if cfg.pe.variant != "exact":
        raise DegenerateBins("classical reduction needs exact phase estimation")
    bs = bin_structure(h, cfg.pe)
    bins = bs.exact_bins
    if len(np.unique(bins)) != len(bins):
        raise DegenerateBins("some energy bin holds more than one eigenvector")
    if cfg.effective_r_tilde is not None and cfg.effective_r_tilde < (bs.r_bits or 0):
        raise DegenerateBins("coarse P comparison merges bins; use the full path")
    e = bs.bin_energies[bins]
    v = h.eigenvectors
    amp2 = np.zeros((h.dim, h.dim))
    for c, w in zip(cfg.updates.ops, cfg.updates.weights):
        ce = v.conj().T @ c @ v
        amp2 += w * np.abs(ce.T) ** 2  # amp2[i, k] = |<k|C|i>|^2
    f = acceptance(e[None, :], e[:, None], cfg.beta)
    s = amp2 * f
    np.fill_diagonal(s, 0.0)
    np.fill_diagonal(s, 1.0 - s.sum(axis=1))
    return TransitionMatrix(s, h.eigenvalues.copy())


# ---------------------------------------------------------------------------
# chains


@dataclass
class ChainResult:
    means: np.ndarray
    stderr: np.ndarray
    m: int
    aborts: int
    path: str
    records: list[WalkRecord]
    samples: np.ndarray

    def to_json(self, names: list[str] | None = None) -> list[dict]:
        names = names or [f"X{k}" for k in range(len(self.means))]
        return [
            {"observable": nm, "mean": float(mu), "stderr": float(se), "m": self.m, "aborts": self.aborts}
            for nm, mu, se in zip(names, self.means, self.stderr)
        ]


def batch_means_stderr(x: np.ndarray, n_batches: int = 20) -> np.ndarray:
    """Standard error of the mean from non-overlapping batch means (per column)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    m = x.shape[0]
    b = min(n_batches, m)
    size = m // b
    if size < 1 or b < 2:
        return np.full(x.shape[1], np.nan)
    bm = x[: b * size].reshape(b, size, -1).mean(axis=1)
    return bm.std(axis=0, ddof=1) / math.sqrt(b)


def classical_applicable(h: HermitianEigensystem, cfg: MetropolisConfig) -> bool:
    try:
        classical_reduction(h, cfg)
    except DegenerateBins:
        return False
    except ValueError:
        return False
    return True


def run_chain(
    cfg: MetropolisConfig,
    h: HermitianEigensystem,
    m: int,
    observables: list[np.ndarray] = (),
    chain: int = 0,
    burn_in: int = 0,
    path: str = "auto",
    keep_records: bool = False,
    n_batches: int = 20,
) -> ChainResult:
    """Run ``burn_in + m`` steps and average ``<phi_j|X|phi_j>`` over the last m.

    ``path="auto"`` uses the classical level chain whenever the walk reduces
    to it (exact PE, one level per bin), and the register simulation
    otherwise.  Aborted steps restart the chain from |0...0> and are not
    counted as samples.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    rng = make_rng(cfg.seed, chain)
    obs = [np.asarray(x, dtype=complex) for x in observables]
    v = h.eigenvectors
    obs_eig = [v.conj().T @ x @ v for x in obs]
    if path == "auto":
        path = "classical" if classical_applicable(h, cfg) else "full"
    samples = np.zeros((m, len(obs)))
    records: list[WalkRecord] = []
    aborts = 0
    if path == "classical":
        tm = classical_reduction(h, cfg)
        cum = np.cumsum(tm.S, axis=1)
        diag_obs = np.array([np.real(np.diag(x)) for x in obs_eig]).reshape(len(obs), h.dim)
        start = np.abs(v[0, :]) ** 2  # measuring |0...0> in the eigenbasis
        level = _sample(start, rng)
        draws = rng.random(burn_in + m)
        for step in range(burn_in + m):
            row = cum[level]
            level = int(min(np.searchsorted(row, draws[step] * row[-1], side="right"), h.dim - 1))
            if step >= burn_in:
                samples[step - burn_in] = diag_obs[:, level]
                if keep_records:
                    records.append(WalkRecord(step, level, "", level, "classical", 0, samples[step - burn_in].copy()))
    elif path == "full":
        model = RegisterModel(h, cfg)
        psi = v.conj().T[:, 0].copy()
        step = 0
        taken = 0
        while taken < m:
            psi, rec = step_internal(model, psi, rng, step)
            step += 1
            if rec.outcome == "aborted":
                aborts += 1
                continue
            if step <= burn_in:
                continue
            vals = np.array([np.real(np.vdot(psi, x @ psi)) for x in obs_eig])
            samples[taken] = vals
            taken += 1
            if keep_records:
                rec.observables = vals
                rec.state_hash = _hash_state(v @ psi)
                records.append(rec)
    else:
        raise ValueError(f"unknown path {path!r}")
    means = samples.mean(axis=0)
    stderr = batch_means_stderr(samples, n_batches) if len(obs) else np.zeros(0)
    return ChainResult(means, stderr, m, aborts, path, records, samples)


def level_occupation(samples_levels: np.ndarray, n_levels: int) -> np.ndarray:
    return np.bincount(samples_levels, minlength=n_levels) / len(samples_levels)


@dataclass(frozen=True)
class MixingBound:
    m_mix: float
    n_star: int


def mixing_time_bound(gap: float, eps: float, c_exp: float = 1.0, c: float = 0.5) -> MixingBound:
    """Steps m = ln(c_exp / eps) / gap and the reject cap n* > m / (2e(1 - c)).

    ``c`` is the target probability that no step of the whole run aborts.
    """
    if gap <= 0:
        raise ValueError("gap must be positive")
    if eps <= 0 or c_exp <= 0:
        raise ValueError("eps and c_exp must be positive")
    if not 0 <= c < 1:
        raise ValueError("c must lie in [0, 1)")
    m = math.log(c_exp / eps) / gap
    n_star = math.floor(m / (2 * math.e * (1 - c))) + 1
    return MixingBound(m, n_star)
