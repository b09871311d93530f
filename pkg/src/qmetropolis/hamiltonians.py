"""Pauli-string Hamiltonians, Jordan-Wigner hopping and phase-estimation rescaling.

Site ``0`` is the leftmost tensor factor (most significant bit of the
computational-basis index).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import HermitianEigensystem, eig_hermitian, kron

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"I": I2, "X": X, "Y": Y, "Z": Z}


class ExactModeIncommensurate(ValueError):
    """Spectrum does not land on integer bins for the requested resolution."""


@dataclass(frozen=True)
class PauliString:
    coefficient: float
    letters: str

    def __post_init__(self):
        if not math.isfinite(self.coefficient):
            raise ValueError("coefficient must be finite")
        bad = set(self.letters) - set(PAULI)
        if bad:
            raise ValueError(f"invalid Pauli letters {sorted(bad)}")

    @property
    def n_sites(self) -> int:
        return len(self.letters)

    @property
    def support(self) -> list[int]:
        return [k for k, c in enumerate(self.letters) if c != "I"]

    def operator(self) -> np.ndarray:
        """Dense matrix of the bare string (without the coefficient)."""
        return kron(*(PAULI[c] for c in self.letters))

    def to_matrix(self) -> np.ndarray:
        return self.coefficient * self.operator()


@dataclass(frozen=True)
class PauliHamiltonian:
    n_sites: int
    terms: tuple[PauliString, ...] = ()
    offset: float = 0.0
    boundary: str = field(default="open", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for s in self.terms:
            if s.n_sites != self.n_sites:
                raise ValueError(f"term {s.letters!r} has length {s.n_sites}, expected {self.n_sites}")

    @property
    def dim(self) -> int:
        return 2 ** self.n_sites

    def to_matrix(self) -> np.ndarray:
        h = self.offset * np.eye(self.dim, dtype=complex)
        for s in self.terms:
            h = h + s.to_matrix()
        return h

    def eigensystem(self) -> HermitianEigensystem:
        return eig_hermitian(self.to_matrix())

    def to_dict(self) -> dict:
        return {
            "n": self.n_sites,
            "terms": [{"coeff": s.coefficient, "letters": s.letters} for s in self.terms],
            "offset": self.offset,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PauliHamiltonian":
        n = int(d["n"])
        terms = [PauliString(float(t["coeff"]), str(t["letters"])) for t in d.get("terms", [])]
        return cls(n, tuple(terms), float(d.get("offset", 0.0)))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2))

    @classmethod
    def load(cls, path: str | Path) -> "PauliHamiltonian":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _letters(n: int, placed: dict[int, str]) -> str:
    return "".join(placed.get(k, "I") for k in range(n))


def build_xx_chain(n: int, g: float, periodic: bool = False) -> PauliHamiltonian:
    """XX chain in a transverse field, sum_k X_k X_{k+1} + Y_k Y_{k+1} + g Z_k.

    Parameters
    ----------
    n : int
        Number of spins, at least 2.
    g : float
        Field strength.  For large positive ``g`` the ground state is |1...1>.
    periodic : bool
        Add the bond (n-1, 0).  Open boundary by default.
    """
    if n < 2:
        raise ValueError("XX chain needs n >= 2")
    bonds = [(k, k + 1) for k in range(n - 1)]
    if periodic and n > 2:
        bonds.append((n - 1, 0))
    terms = []
    for a, b in bonds:
        terms.append(PauliString(1.0, _letters(n, {a: "X", b: "X"})))
        terms.append(PauliString(1.0, _letters(n, {a: "Y", b: "Y"})))
    terms += [PauliString(float(g), _letters(n, {k: "Z"})) for k in range(n)]
    return PauliHamiltonian(n, tuple(terms), 0.0, "periodic" if periodic else "open")


def build_heisenberg_pair() -> PauliHamiltonian:
    """-(XX + YY + ZZ)/2 + I/2 on two spins; spectrum {0, 0, 0, 2}."""
    terms = tuple(PauliString(-0.5, c + c) for c in "XYZ")
    return PauliHamiltonian(2, terms, 0.5)


def jordan_wigner_hopping(i: int, j: int, amp: float, n: int) -> list[PauliString]:
    """Pauli form of a hopping term between fermionic modes ``i < j`` (0-based).

    Returns ``(amp/2)(X_i Z...Z X_j + Y_i Z...Z Y_j)``.  With
    ``c_k^dag = -(Z_0 ... Z_{k-1}) sigma^+_k`` this equals
    ``-amp (c_i^dag c_j + c_j^dag c_i)``.
    """
    if i == j:
        raise ValueError("hopping needs two distinct sites")
    if not 0 <= i < j < n:
        raise ValueError(f"need 0 <= i < j < n, got i={i}, j={j}, n={n}")
    chain = {k: "Z" for k in range(i + 1, j)}
    return [
        PauliString(amp / 2, _letters(n, {**chain, i: "X", j: "X"})),
        PauliString(amp / 2, _letters(n, {**chain, i: "Y", j: "Y"})),
    ]


def fermion_creation_ops(n: int) -> list[np.ndarray]:
    """Dense c_k^dag = -(Z_0 ... Z_{k-1}) sigma^+_k with sigma^+ = (X + iY)/2."""
    sp = (X + 1j * Y) / 2
    out = []
    for k in range(n):
        factors = [Z] * k + [sp] + [I2] * (n - k - 1)
        out.append(-kron(*factors))
    return out


# ---------------------------------------------------------------------------
# string exponentials


@dataclass(frozen=True)
class Gate:
    """A one- or two-qubit gate exp(i * angle * P) with P a Pauli product on ``sites``."""

    label: str
    sites: tuple[int, ...]
    pauli: str
    angle: float

    def local_matrix(self) -> np.ndarray:
        p = kron(*(PAULI[c] for c in self.pauli))
        return math.cos(self.angle) * np.eye(p.shape[0]) + 1j * math.sin(self.angle) * p

    def inverse(self) -> "Gate":
        label = self.label[:-1] if self.label.endswith("+") else self.label + "+"
        return Gate(label, self.sites, self.pauli, -self.angle)

    def full_matrix(self, n: int) -> np.ndarray:
        return embed_operator(self.local_matrix(), self.sites, n)


def embed_operator(op: np.ndarray, sites: tuple[int, ...], n: int) -> np.ndarray:
    """Place a k-qubit operator on ``sites`` (in the given order) of an n-qubit register."""
    rest = [s for s in range(n) if s not in sites]
    full = np.kron(np.asarray(op), np.eye(2 ** len(rest))).reshape((2,) * (2 * n))
    inv = list(np.argsort(list(sites) + rest))
    return full.transpose(inv + [n + q for q in inv]).reshape(2 ** n, 2 ** n)


_PAULI_MUL = {
    ("I", "I"): (1, "I"), ("I", "X"): (1, "X"), ("I", "Y"): (1, "Y"), ("I", "Z"): (1, "Z"),
    ("X", "I"): (1, "X"), ("Y", "I"): (1, "Y"), ("Z", "I"): (1, "Z"),
    ("X", "X"): (1, "I"), ("Y", "Y"): (1, "I"), ("Z", "Z"): (1, "I"),
    ("X", "Y"): (1j, "Z"), ("Y", "Z"): (1j, "X"), ("Z", "X"): (1j, "Y"),
    ("Y", "X"): (-1j, "Z"), ("Z", "Y"): (-1j, "X"), ("X", "Z"): (-1j, "Y"),
}


def _conjugate(letters: list[str], sign: float, gate: Gate) -> float:
    """Update ``letters``/``sign`` in place for P -> G P G^dag; returns the new sign.

    For G = exp(i a A) and A anticommuting with P, a = +-pi/4, G P G^dag = i sin(2a) A P.
    """
    anti = sum(letters[s] != "I" and c != "I" and letters[s] != c for s, c in zip(gate.sites, gate.pauli)) % 2
    if not anti:
        return sign
    phase = 1j * math.sin(2 * gate.angle)
    for s, c in zip(gate.sites, gate.pauli):
        f, out = _PAULI_MUL[(c, letters[s])]
        phase *= f
        letters[s] = out
    val = sign * phase
    assert abs(val.imag) < 1e-12 and abs(abs(val.real) - 1) < 1e-12
    return float(np.sign(val.real))


def decompose_string_exponential(s: PauliString, eps: float) -> list[Gate]:
    """Circuit for exp(-i eps s) from one- and two-qubit pi/4 rotations.

    The string is reduced to a single Z on its last non-identity site using
    V_kl = exp(i pi/4 Z_k Z_l), U_l = exp(i pi/4 Y_l) and, for Y letters,
    exp(i pi/4 X_l).  The rotation exp(-i eps c (+-Z)) is applied there, with
    c the coefficient of ``s``, and the conjugating gates are undone.  Gates
    are listed in time order.
    """
    support = s.support
    if not support:
        raise ValueError("all-identity string has no nontrivial exponential")
    letters = list(s.letters)
    sign = 1.0
    pivot = support[-1]
    pre: list[Gate] = []

    def push(g: Gate):
        nonlocal sign
        pre.append(g)
        sign = _conjugate(letters, sign, g)

    for a in support[:-1]:
        if letters[a] == "X":
            push(Gate("U", (a,), "Y", math.pi / 4))
        elif letters[a] == "Y":
            push(Gate("Rx", (a,), "X", math.pi / 4))
        if letters[pivot] == "Z":
            push(Gate("U", (pivot,), "Y", math.pi / 4))
        push(Gate("V", (a, pivot), "ZZ", math.pi / 4))
    if letters[pivot] == "X":
        push(Gate("U", (pivot,), "Y", math.pi / 4))
    elif letters[pivot] == "Y":
        push(Gate("Rx", (pivot,), "X", math.pi / 4))
    assert [k for k, c in enumerate(letters) if c != "I"] == [pivot] and letters[pivot] == "Z"
    core = Gate("Rz", (pivot,), "Z", -eps * s.coefficient * sign)
    return pre + [core] + [g.inverse() for g in reversed(pre)]


def circuit_unitary(gates: list[Gate], n: int) -> np.ndarray:
    u = np.eye(2 ** n, dtype=complex)
    for g in gates:
        u = g.full_matrix(n) @ u
    return u


def trotter_cost_estimate(s_terms: int, t0: float, n: int, eps_h: float, c: float = 1.0) -> float:
    """Relative gate-count model c s^2 t0 N (log* N)^2 9^sqrt(log2(s^2 t0 / eps)).

    The square-root argument is clipped at zero and ``log* N`` at one, so the
    estimate stays defined for tiny instances.
    """
    if eps_h <= 0:
        raise ValueError("eps_h must be positive")
    ratio = s_terms ** 2 * t0 / eps_h
    expo = math.sqrt(max(0.0, math.log2(ratio))) if ratio > 0 else 0.0
    ls = max(1, log_star(n))
    return c * s_terms ** 2 * t0 * n * ls ** 2 * 9.0 ** expo


def log_star(x: float) -> int:
    """Iterated base-2 logarithm: how many log2 applications bring x to <= 1."""
    k = 0
    while x > 1:
        x = math.log2(x)
        k += 1
    return k


# ---------------------------------------------------------------------------
# phase-estimation rescaling


@dataclass(frozen=True)
class PERescaling:
    """Energy-to-bin map ``phase(E) = (E + shift) * t / (2 pi)`` on 2^r bins.

    ``t`` is measured in bin units, i.e. the controlled evolution on the
    pointer uses time ``tau = t / 2^r`` per unit of the pointer momentum.
    """

    t: float
    shift: float
    r: int

    def __post_init__(self):
        if self.r < 1:
            raise ValueError("need r >= 1")
        if not self.t > 0:
            raise ValueError("t must be positive")

    @property
    def n_bins(self) -> int:
        return 2 ** self.r

    @property
    def tau(self) -> float:
        return self.t / self.n_bins

    @property
    def bin_width(self) -> float:
        """Energy spacing between consecutive bins, 2 pi / t."""
        return 2 * math.pi / self.t

    def phase(self, energy):
        return (np.asarray(energy) + self.shift) * self.t / (2 * math.pi)

    def bin_energy(self, k):
        return np.asarray(k) * self.bin_width - self.shift

    def exact_bins(self, energies, tol: float = 1e-9) -> np.ndarray:
        ph = self.phase(energies)
        k = np.rint(ph)
        if np.any(np.abs(ph - k) > tol) or np.any(k < 0) or np.any(k >= self.n_bins):
            raise ExactModeIncommensurate(
                f"phases {np.round(ph, 6).tolist()} are not integers in [0, {self.n_bins})"
            )
        return k.astype(int)


def _spectrum(h) -> np.ndarray:
    if isinstance(h, HermitianEigensystem):
        return h.eigenvalues
    if isinstance(h, PauliHamiltonian):
        return h.eigensystem().eigenvalues
    return eig_hermitian(h).eigenvalues


def rescale_for_pe(h, r: int, mode: str = "generic", t: float | None = None) -> PERescaling:
    """Choose shift and pointer time so the spectrum fits on 2^r bins.

    The shift moves the ground energy to zero.  By default the top of the
    spectrum lands on bin 2^r - 1, so nothing overflows.  ``mode="exact"``
    additionally requires every level to sit on an integer bin.

    Parameters
    ----------
    h : PauliHamiltonian, HermitianEigensystem or ndarray
    r : int
        Number of pointer bits.
    mode : {"generic", "exact"}
    t : float, optional
        Override the pointer time (bin units).
    """
    if mode not in ("generic", "exact"):
        raise ValueError(f"unknown rescaling mode {mode!r}")
    ev = _spectrum(h)
    shift = -float(ev[0])
    span = float(ev[-1] - ev[0])
    if t is None:
        t = 2 * math.pi * (2 ** r - 1) / span if span > 1e-12 else 2 * math.pi
    resc = PERescaling(float(t), shift, r)
    ph = resc.phase(ev)
    if np.any(ph > resc.n_bins - 0.5 + 1e-9):
        raise ValueError("pointer time too large: spectrum overflows the register")
    if mode == "exact":
        resc.exact_bins(ev)
    return resc
