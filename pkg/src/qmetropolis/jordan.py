"""Two-projector normal form and the rejection-failure probability.

For projectors ``P1`` (rank p) and ``Q1`` (rank q) with ``p <= q`` and
``p + q <= n`` there is a unitary ``U_J`` such that ``U_J P1 U_J^dag`` is
``diag(I_p, 0)`` and ``U_J Q1 U_J^dag`` is

    [[D, sqrt(D(1-D)), 0, 0],
     [sqrt(D(1-D)), 1-D, 0, 0],
     [0, 0, I_{q-p}, 0],
     [0, 0, 0, 0]]

with ``D = diag(d_1 <= ... <= d_p)`` in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom, norm

from .linalg import complete_basis, is_projector, op_norm, random_projector

# d(1 - d) below this counts as an exact intersection (d = 0 or d = 1)
SNAP = 1e-12


class NotProjector(ValueError):
    pass


class RankConditionViolated(ValueError):
    pass


@dataclass(frozen=True)
class JordanPair:
    """Normal form of a projector pair.

    Attributes
    ----------
    U_J : ndarray
        Unitary on the (possibly embedded) space, rows ordered as
        (e_1..e_p, f_1..f_p, g_1..g_{q-p}, rest).
    d : ndarray
        Principal cosines squared, ascending.
    p, q, n : int
        Ranks and ambient dimension after embedding.
    n_original : int
        Dimension of the caller's space.  When ``n > n_original`` the pair
        was embedded as ``P1 + 0`` and ``Q1 + I_k`` (plus zero padding).
    """

    U_J: np.ndarray
    d: np.ndarray
    p: int
    q: int
    n: int
    n_original: int

    @property
    def embedded(self) -> bool:
        return self.n != self.n_original

    @property
    def e_vectors(self) -> np.ndarray:
        """Columns e_i spanning range(P1), in the caller's space."""
        return self.U_J.conj().T[: self.n_original, : self.p]

    def block_forms(self) -> tuple[np.ndarray, np.ndarray]:
        return jordan_block_forms(self.d, self.q, self.n)

    def reconstruct(self) -> tuple[np.ndarray, np.ndarray]:
        """P1 and Q1 rebuilt from the block forms, in the embedded space."""
        pb, qb = self.block_forms()
        u = self.U_J
        return u.conj().T @ pb @ u, u.conj().T @ qb @ u

    def weights(self, psi: np.ndarray) -> np.ndarray:
        """Squared overlaps |<e_i|psi>|^2 of a caller-space vector."""
        return np.abs(self.e_vectors.conj().T @ psi) ** 2


def jordan_block_forms(d, q: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    d = np.asarray(d, dtype=float)
    p = len(d)
    pb = np.zeros((n, n))
    pb[:p, :p] = np.eye(p)
    qb = np.zeros((n, n))
    s = np.sqrt(np.clip(d * (1 - d), 0, None))
    idx = np.arange(p)
    qb[idx, idx] = d
    qb[idx, p + idx] = s
    qb[p + idx, idx] = s
    qb[p + idx, p + idx] = 1 - d
    qb[2 * p: p + q, 2 * p: p + q] = np.eye(q - p)
    return pb, qb


def _range(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    return v[:, w > 0.5]


def jordan_normal_form(P1: np.ndarray, Q1: np.ndarray, tol: float = 1e-9) -> JordanPair:
    """Constructive two-projector normal form.

    The principal values are the eigenvalues of ``P1 Q1 P1`` on range(P1);
    the partner of each generic ``e_i`` is ``(I - P1) Q1 e_i / sqrt(d_i (1 - d_i))``.
    Exact intersections (d in {0, 1}) get partners from the commuting
    remainder.  Pairs with ``p > q`` or ``p + q > n`` are embedded in a larger
    space first (``JordanPair.n_original`` records the caller's dimension).
    """
    P1 = np.asarray(P1, dtype=complex)
    Q1 = np.asarray(Q1, dtype=complex)
    if P1.shape != Q1.shape or P1.ndim != 2 or P1.shape[0] != P1.shape[1]:
        raise ValueError("P1 and Q1 must be square matrices of equal size")
    if not (is_projector(P1, tol) and is_projector(Q1, tol)):
        raise NotProjector("inputs must be Hermitian projectors")
    n0 = P1.shape[0]
    p = int(round(np.trace(P1).real))
    q = int(round(np.trace(Q1).real))
    # embed so that p <= q and p + q <= n
    extra_q = max(0, p - q)
    extra_z = max(0, p + q + extra_q - (n0 + extra_q))
    n = n0 + extra_q + extra_z
    if n != n0:
        P1e = np.zeros((n, n), dtype=complex)
        Q1e = np.zeros((n, n), dtype=complex)
        P1e[:n0, :n0] = P1
        Q1e[:n0, :n0] = Q1
        Q1e[n0: n0 + extra_q, n0: n0 + extra_q] = np.eye(extra_q)
        P1, Q1 = P1e, Q1e
        q += extra_q

    vp = _range(P1)
    w, a = np.linalg.eigh(vp.conj().T @ Q1 @ vp)
    d = np.clip(w, 0.0, 1.0)
    e = vp @ a
    gen = d * (1 - d) > SNAP
    d = np.where(gen, d, np.rint(d))

    f = np.zeros((n, p), dtype=complex)
    if np.any(gen):
        ge = e[:, gen]
        f[:, gen] = (Q1 @ ge - P1 @ (Q1 @ ge)) / np.sqrt(d[gen] * (1 - d[gen]))
    # commuting remainder inside range(P0): split into Q1 = 1 and Q1 = 0 parts
    taken = np.concatenate([e, f[:, gen]], axis=1)
    rest = complete_basis(taken, n)
    p0_rest = _range(rest.conj().T @ (np.eye(n) - P1) @ rest)
    r0 = rest @ p0_rest
    wq, vq = np.linalg.eigh(r0.conj().T @ Q1 @ r0)
    in_q = r0 @ vq[:, wq > 0.5]
    out_q = r0 @ vq[:, wq <= 0.5]
    need1 = np.flatnonzero(~gen & (d > 0.5))
    need0 = np.flatnonzero(~gen & (d < 0.5))
    if len(need1) > out_q.shape[1] or len(need0) > in_q.shape[1]:
        raise RankConditionViolated("not enough partner vectors; projector ranks inconsistent")
    f[:, need1] = out_q[:, : len(need1)]
    f[:, need0] = in_q[:, : len(need0)]
    g = in_q[:, len(need0):]
    tail = out_q[:, len(need1):]
    if g.shape[1] != q - p:
        raise RankConditionViolated(f"expected {q - p} extra Q1 vectors, found {g.shape[1]}")
    basis = np.concatenate([e, f, g, tail], axis=1)
    return JordanPair(basis.conj().T, d, p, q, n, n0)


def reconstruction_error(pair: JordanPair, P1: np.ndarray, Q1: np.ndarray) -> float:
    """Operator-norm error of the block forms against the caller's projectors."""
    pr, qr = pair.reconstruct()
    n0 = pair.n_original
    err = max(op_norm(pr[:n0, :n0] - P1), op_norm(qr[:n0, :n0] - Q1))
    if pair.embedded:
        pb = np.zeros((pair.n, pair.n), dtype=complex)
        pb[:n0, :n0] = P1
        err = max(err, op_norm(pr - pb))
    return err


def p_fail_exact(d, weights, n: int) -> float:
    """sum_i w_i d_i (1 - d_i) (d_i^2 + (1 - d_i)^2)^n.

    Parameters
    ----------
    d : array_like or JordanPair
        Principal values.
    weights : array_like
        Squared overlaps of the initial (pre-Q) state with the e_i.
    n : int
        Number of (Q, P) rounds after the first failed P measurement.
    """
    if isinstance(d, JordanPair):
        d = d.d
    d = np.asarray(d, dtype=float)
    w = np.asarray(weights, dtype=float)
    if np.any(w < -1e-15):
        raise ValueError("weights must be nonnegative")
    return float(np.sum(w * d * (1 - d) * (d ** 2 + (1 - d) ** 2) ** n))


def p_fail_bound(n: int) -> float:
    """Universal bound (1/(2(n+1))) (n/(n+1))^n; 1/4 at n = 0."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 0.25
    return 1.0 / (2 * (n + 1)) * (n / (n + 1)) ** n


def p_fail_max_single(n: int) -> float:
    """max over d in [0, 1] of d(1-d)(d^2 + (1-d)^2)^n, by dense grid plus refinement."""
    from scipy.optimize import minimize_scalar

    fn = lambda x: -(x * (1 - x) * (x * x + (1 - x) ** 2) ** n)
    grid = np.linspace(0, 0.5, 2001)
    x0 = grid[np.argmin(fn(grid))]
    res = minimize_scalar(fn, bounds=(max(0.0, x0 - 1e-3), min(0.5, x0 + 1e-3)), method="bounded")
    return float(-res.fun)


def rejection_commutator_residual(P1: np.ndarray, Q1: np.ndarray) -> float:
    """max over s, s' of ||[P0 Q_s P0, P0 Q_s' P0]||."""
    eye = np.eye(P1.shape[0])
    P0 = eye - P1
    a = P0 @ Q1 @ P0
    b = P0 @ (eye - Q1) @ P0
    return op_norm(a @ b - b @ a)


def simulate_rejection(
    P1: np.ndarray,
    Q1: np.ndarray,
    psi: np.ndarray,
    n_max: int,
    trials: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Monte Carlo of the reject recursion by sequential projective measurements.

    Each trial starts from ``psi`` (in range(P1)), measures Q, and counts as a
    failure at level ``n`` if that outcome was Q0 and all of the following
    n + 1 P measurements gave P0 (with a Q measurement between consecutive
    P measurements).

    Returns
    -------
    ndarray of int, shape (n_max + 1,)
        ``fail[n]`` = number of trials still failing after round ``n``.
    """
    eye = np.eye(P1.shape[0])
    P0 = eye - P1
    Q0 = eye - Q1
    v = np.repeat(psi[:, None].astype(complex), trials, axis=1)
    fail = np.zeros(n_max + 1, dtype=int)

    def measure(v, proj_a, proj_b):
        va = proj_a @ v
        pa = np.sum(np.abs(va) ** 2, axis=0)
        pick_a = rng.random(v.shape[1]) < pa
        vb = proj_b @ v
        out = np.where(pick_a, va, vb)
        norm = np.sqrt(np.sum(np.abs(out) ** 2, axis=0))
        return out / np.where(norm > 0, norm, 1), pick_a

    v, acc = measure(v, Q1, Q0)
    v = v[:, ~acc]
    v, ok = measure(v, P1, P0)
    v = v[:, ~ok]
    fail[0] = v.shape[1]
    for k in range(1, n_max + 1):
        if v.shape[1] == 0:
            break
        v, _ = measure(v, Q1, Q0)
        v, ok = measure(v, P1, P0)
        v = v[:, ~ok]
        fail[k] = v.shape[1]
    return fail


def failure_stderr(p: float, trials: int) -> float:
    return math.sqrt(max(p * (1 - p), 0.0) / trials)


def binomial_z(count: int, p: float, trials: int) -> float:
    """Two-sided exact binomial deviation of ``count`` from ``trials * p``, in normal sigmas.

    The normal approximation overstates deviations when ``trials * p`` is a
    handful of events, which is where the tail of the reject recursion lives.
    """
    if p <= 0:
        return 0.0 if count == 0 else math.inf
    if p >= 1:
        return 0.0 if count == trials else math.inf
    mean = trials * p
    if count >= mean:
        tail = binom.sf(count - 1, trials, p)
    else:
        tail = binom.cdf(count, trials, p)
    return float(norm.isf(min(1.0, 2 * tail) / 2))


def family_z(z: float, k: int) -> float:
    """Per-test threshold giving k two-sided tests the false-alarm rate of one z-sigma test."""
    alpha = 2 * norm.sf(z)
    return float(norm.isf(alpha / (2 * max(k, 1))))


def rejection_check(cases, n_max: int, trials: int, rng: np.random.Generator, z: float = 3.0) -> dict:
    """Monte Carlo of the reject recursion against the bound and the exact formula.

    Parameters
    ----------
    cases : iterable of (P1, Q1, psi)
        ``psi`` must lie in range(P1).
    n_max, trials : int
    z : float
        Tolerance in standard errors.  The bound test uses ``z`` per point;
        the exact-formula test uses the family-wise equivalent over all
        (case, n) points, since a single 3-sigma cut over thousands of
        nested comparisons would fire by chance.  Its deviations come from
        the exact binomial tail (see ``binomial_z``).

    Returns
    -------
    dict with the worst standardised excesses and pass flags.
    """
    cases = list(cases)
    k = len(cases) * (n_max + 1)
    z_fam = family_z(z, k)
    floor = 1.0 / trials
    worst_bound = -math.inf
    worst_exact = 0.0
    for P1, Q1, psi in cases:
        counts = simulate_rejection(P1, Q1, psi, n_max, trials, rng)
        emp = counts / trials
        pair = jordan_normal_form(P1, Q1)
        w = pair.weights(psi)
        for n in range(n_max + 1):
            ex = p_fail_exact(pair, w, n)
            worst_exact = max(worst_exact, binomial_z(int(counts[n]), ex, trials))
            b = p_fail_bound(n)
            worst_bound = max(worst_bound, (emp[n] - b) / max(failure_stderr(b, trials), floor))
    return {
        "cases": len(cases),
        "trials": trials,
        "n_max": n_max,
        "worst_sigma_above_bound": worst_bound,
        "worst_sigma_from_exact": worst_exact,
        "family_threshold": z_fam,
        "bound_ok": worst_bound <= z,
        "exact_ok": worst_exact <= z_fam,
    }


def random_rejection_case(rng: np.random.Generator, dim_max: int = 16):
    """Random (P1, Q1, psi) with psi a random unit vector in range(P1)."""
    d = int(rng.integers(2, dim_max + 1))
    p = int(rng.integers(1, d))
    q = int(rng.integers(1, d))
    P1 = random_projector(d, p, rng)
    Q1 = random_projector(d, q, rng)
    psi = P1 @ (rng.standard_normal(d) + 1j * rng.standard_normal(d))
    return P1, Q1, psi / np.linalg.norm(psi)
