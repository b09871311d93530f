"""Phase-estimation models: exact projective bins, pointer POVM and median boosting.

Conventions
-----------
Bins are integers modulo ``N = 2^r``.  The pointer amplitude of an energy
``E`` at readout ``x`` given pointer preparation ``y`` is

    f(E, x - y) = (1/N) sum_z exp(2 pi i (x - y - phi) z / N),

with ``phi = (E + shift) t / (2 pi)`` the phase in bin units.  The POVM element
``M^y_x`` is diagonal in the eigenbasis with entries ``f(E_j, x - y)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .hamiltonians import ExactModeIncommensurate, PERescaling
from .linalg import HermitianEigensystem, group_levels

VARIANTS = ("exact", "realistic", "median")


@dataclass(frozen=True)
class PEModel:
    """Phase-estimation semantics.

    Parameters
    ----------
    variant : {"exact", "realistic", "median"}
    rescaling : PERescaling or None
        ``None`` is only allowed for ``"exact"`` and means unlimited
        resolution: each distinct eigenvalue gets its own bin and energies
        are used at full precision.
    eta : int
        Number of pointer copies for the median variant (odd).
    """

    variant: str = "exact"
    rescaling: PERescaling | None = None
    eta: int = 1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown PE variant {self.variant!r}")
        if self.rescaling is None and self.variant != "exact":
            raise ValueError(f"{self.variant} phase estimation needs a rescaling")
        if self.variant == "median" and (self.eta < 1 or self.eta % 2 == 0):
            raise ValueError("median boosting needs an odd eta >= 1")

    @property
    def r(self) -> int | None:
        return None if self.rescaling is None else self.rescaling.r

    def describe(self) -> str:
        if self.rescaling is None:
            return "exact-levels"
        return f"{self.variant}:eta={self.eta}" if self.variant == "median" else self.variant


@dataclass(frozen=True)
class BinStructure:
    """Everything downstream code needs to know about the phase estimation.

    Attributes
    ----------
    amplitudes : ndarray, shape (d, N)
        ``amplitudes[j, delta] = f(E_j, delta)`` for ``delta`` in ``0..N-1``.
    bin_energies : ndarray, shape (N,)
        Energy assigned to each bin readout; only differences matter.
    exact_bins : ndarray of int or None
        Bin of each eigenvector when the measurement is projective.
    """

    amplitudes: np.ndarray
    bin_energies: np.ndarray
    exact_bins: np.ndarray | None
    r_bits: int | None

    @property
    def n_bins(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def povm_diag(self, y: int, x: int) -> np.ndarray:
        """Diagonal of M^y_x in the eigenbasis."""
        return self.amplitudes[:, (x - y) % self.n_bins]

    def match_mask(self, k1: int, r_tilde: int | None) -> np.ndarray:
        """Boolean mask over bins whose top ``r_tilde`` bits agree with ``k1``."""
        ks = np.arange(self.n_bins)
        if self.r_bits is None or r_tilde is None or r_tilde >= self.r_bits:
            return ks == k1
        drop = self.r_bits - r_tilde
        return (ks >> drop) == (k1 >> drop)


def pointer_amplitude(energy: float, x: int, y: int, resc: PERescaling) -> complex:
    """f(E, x - y) for one energy and one pair of bins."""
    return complex(_amplitude_delta(np.asarray(x - y, float) - resc.phase(energy), resc.n_bins))


def _amplitude_delta(delta, n: int) -> np.ndarray:
    """Closed-form geometric sum (1/n) sum_z exp(2 pi i delta z / n)."""
    delta = np.asarray(delta, dtype=float)
    den = np.sin(np.pi * delta / n)
    near = np.abs(den) < 1e-7
    safe = np.where(near, 1.0, den)
    out = np.exp(1j * np.pi * delta * (n - 1) / n) * np.sin(np.pi * delta) / (n * safe)
    if np.any(near):
        z = np.arange(n)
        direct = np.exp(2j * np.pi * np.multiply.outer(delta[near], z) / n).mean(axis=-1)
        out = np.where(near, 0, out)
        out[near] = direct
    return out


def pointer_amplitudes(energies, resc: PERescaling) -> np.ndarray:
    """Array ``A[j, delta] = f(E_j, delta)`` of shape (len(energies), 2^r)."""
    ph = resc.phase(np.atleast_1d(energies))
    deltas = np.arange(resc.n_bins)[None, :] - ph[:, None]
    return _amplitude_delta(deltas, resc.n_bins)


def pointer_distribution(energy: float, resc: PERescaling) -> np.ndarray:
    """Readout probabilities |f(E, x)|^2 for a pointer prepared in |0>."""
    return np.abs(pointer_amplitudes([energy], resc)[0]) ** 2


def pointer_distribution_closed_form(energy: float, resc: PERescaling) -> np.ndarray:
    """sin^2(pi delta) / (N^2 sin^2(pi delta / N)), evaluated independently of the amplitude."""
    n = resc.n_bins
    delta = np.arange(n) - resc.phase(energy)
    num = np.sin(np.pi * delta) ** 2
    den = n ** 2 * np.sin(np.pi * delta / n) ** 2
    hit = np.abs(np.sin(np.pi * delta / n)) < 1e-12
    return np.where(hit, 1.0, num / np.where(hit, 1.0, den))


# ---------------------------------------------------------------------------
# median boosting


def median_boost_distribution(base, eta: int, center: int | None = None) -> np.ndarray:
    """Exact distribution of the median of ``eta`` i.i.d. draws from ``base``.

    Bins are cyclic, so the median is taken after rotating the bins such that
    ``center`` (default: the most likely bin) sits in the middle of the range.
    Uses P(median <= k) = P(Binomial(eta, F_k) >= (eta + 1) / 2).
    """
    base = np.asarray(base, dtype=float)
    if abs(base.sum() - 1) > 1e-10 or np.any(base < -1e-15):
        raise ValueError("base must be a probability vector")
    if eta < 1 or eta % 2 == 0:
        raise ValueError("eta must be odd")
    n = len(base)
    if center is None:
        center = int(np.argmax(base))
    roll = n // 2 - center
    p = np.roll(np.clip(base, 0, None), roll)
    cdf = np.clip(np.cumsum(p), 0, 1)
    cdf[-1] = 1.0
    upper = binom.sf((eta - 1) // 2, eta, cdf)
    out = np.diff(np.concatenate([[0.0], upper]))
    return np.roll(out, -roll)


def median_two_bin_amplitudes(energy: float, resc: PERescaling, eta: int) -> tuple[np.ndarray, float]:
    """Real amplitudes on the two bins bracketing the phase of ``energy``.

    The median-boosted distribution is restricted to floor/ceil of the phase
    and renormalised.  Returns ``(alpha, discarded_mass)`` where ``alpha``
    has length 2^r (index = readout bin for pointer preparation 0).
    """
    n = resc.n_bins
    ph = float(resc.phase(energy))
    lo = math.floor(ph + 1e-12)
    hi = lo + 1 if abs(ph - round(ph)) > 1e-12 else lo
    dist = median_boost_distribution(pointer_distribution(energy, resc), eta, center=int(round(ph)) % n)
    keep = {lo % n, hi % n}
    mass = sum(dist[k] for k in keep)
    alpha = np.zeros(n)
    for k in keep:
        alpha[k] = math.sqrt(dist[k] / mass)
    return alpha, float(1 - mass)


def median_tail_mass(energy: float, resc: PERescaling, eta: int) -> float:
    """Median-boosted probability of reading a bin other than floor/ceil of the phase."""
    return median_two_bin_amplitudes(energy, resc, eta)[1]


# ---------------------------------------------------------------------------
# model -> bins


def bin_structure(h: HermitianEigensystem, model: PEModel) -> BinStructure:
    """Pointer amplitudes and bin energies of ``model`` applied to ``h``."""
    ev = h.eigenvalues
    if model.rescaling is None:
        labels, levels = group_levels(ev)
        amps = np.zeros((len(ev), len(levels)), dtype=complex)
        amps[np.arange(len(ev)), labels] = 1.0
        return BinStructure(amps, levels, labels, None)
    resc = model.rescaling
    energies = resc.bin_energy(np.arange(resc.n_bins))
    if model.variant == "exact":
        bins = resc.exact_bins(ev)
        amps = np.zeros((len(ev), resc.n_bins), dtype=complex)
        amps[np.arange(len(ev)), bins] = 1.0
        return BinStructure(amps, energies, bins, resc.r)
    if model.variant == "realistic":
        return BinStructure(pointer_amplitudes(ev, resc), energies, None, resc.r)
    amps = np.array([median_two_bin_amplitudes(e, resc, model.eta)[0] for e in ev], dtype=complex)
    return BinStructure(amps, energies, None, resc.r)


def median_discarded_mass(h: HermitianEigensystem, model: PEModel) -> float:
    """Largest probability dropped by the two-bin median model over the spectrum."""
    if model.variant != "median":
        return 0.0
    return max(median_two_bin_amplitudes(e, model.rescaling, model.eta)[1] for e in h.eigenvalues)


def povm_operators(h: HermitianEigensystem, model: PEModel) -> np.ndarray:
    """Dense POVM family ``M[y, x]`` (shape (N, N, d, d)) in the computational basis."""
    bs = bin_structure(h, model)
    n = bs.n_bins
    v = h.eigenvectors
    out = np.empty((n, n, bs.dim, bs.dim), dtype=complex)
    for y in range(n):
        for x in range(n):
            out[y, x] = (v * bs.povm_diag(y, x)) @ v.conj().T
    return out


def pe_unitary_eigenbasis(bs: BinStructure) -> np.ndarray:
    """Phi on system (eigenbasis) tensor pointer, index ``j * N + x``."""
    d, n = bs.dim, bs.n_bins
    x = np.arange(n)
    phi = np.zeros((d * n, d * n), dtype=complex)
    for j in range(d):
        circ = bs.amplitudes[j][(x[:, None] - x[None, :]) % n]
        phi[j * n:(j + 1) * n, j * n:(j + 1) * n] = circ
    return phi


def pe_unitary(h: HermitianEigensystem, model: PEModel) -> np.ndarray:
    """Phi = sum_{x,y} M^y_x (x) |x><y| on system (x) pointer, computational basis.

    Raises ``ValueError`` for the median model: its two-bin amplitudes define
    a POVM but not a circulant unitary.
    """
    if model.variant == "median":
        raise ValueError("median-boosted PE is modelled at the distribution level only")
    bs = bin_structure(h, model)
    phi = pe_unitary_eigenbasis(bs)
    w = np.kron(h.eigenvectors, np.eye(bs.n_bins))
    return w @ phi @ w.conj().T


def exact_bin_projectors(h: HermitianEigensystem, resc: PERescaling | None) -> dict[int, np.ndarray]:
    """Projectors onto the energy bins occupied by the spectrum.

    ``resc=None`` gives one projector per distinct level.
    """
    if resc is None:
        bins, _ = group_levels(h.eigenvalues)
    else:
        bins = resc.exact_bins(h.eigenvalues)
    v = h.eigenvectors
    out = {}
    for b in np.unique(bins):
        cols = v[:, bins == b]
        out[int(b)] = cols @ cols.conj().T
    return out


def dephased_product(bs: BinStructure, p: int, q: int, k: int) -> np.ndarray:
    """Diagonal of exp(-i pi (p - q)(N - 1)/N) (M^p_k)^dag M^q_k, which should be real."""
    n = bs.n_bins
    phase = np.exp(-1j * np.pi * (p - q) * (n - 1) / n)
    return phase * np.conj(bs.povm_diag(p, k)) * bs.povm_diag(q, k)


__all__ = [
    "PEModel",
    "BinStructure",
    "ExactModeIncommensurate",
    "pointer_amplitude",
    "pointer_amplitudes",
    "pointer_distribution",
    "pointer_distribution_closed_form",
    "median_boost_distribution",
    "median_two_bin_amplitudes",
    "median_tail_mass",
    "bin_structure",
    "median_discarded_mass",
    "povm_operators",
    "pe_unitary",
    "pe_unitary_eigenbasis",
    "exact_bin_projectors",
    "dephased_product",
]
