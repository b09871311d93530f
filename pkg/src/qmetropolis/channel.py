"""One-step Metropolis channel as a superoperator, and its analysis.

Vectorisation is column stacking: ``vec(X)[x + d*y] = X[x, y]``, so that
``vec(K X K^dag) = (conj(K) kron K) vec(X)``.

The reject branch is summed in closed form.  Inside range(P1) let ``e_i``
diagonalise ``P1 Q1 P1`` with eigenvalues ``d_i``.  Starting from ``X``
supported on range(P1), all reject histories ending in P1 with at most
``n`` (Q, P) rounds after the first P0 produce ``E (coef o E^dag X E) E^dag``
with

    coef_ij = (1-d_i)(1-d_j) + 2 s_i^2 s_j^2 sum_{m<n} g_ij^m,
    s_i^2 = d_i (1 - d_i),  g_ij = (1-d_i)(1-d_j) + d_i d_j,

and ``o`` the entrywise product.  ``n = None`` is the infinite sum.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .linalg import HermitianEigensystem, trace_norm
from .phase_estimation import bin_structure
from .walk import MetropolisConfig, RegisterModel, acceptance

DIM_CAP = 64
SNAP = 1e-13


class DimensionCap(ValueError):
    pass


class NoUnitEigenvalue(RuntimeError):
    pass


@dataclass
class BlockKraus:
    """Kraus operator acting from eigen-indices ``inp`` to eigen-indices ``out``."""

    out: np.ndarray
    inp: np.ndarray
    K: np.ndarray


def reject_coefficients(d: np.ndarray, n_max: int | None) -> np.ndarray:
    d = np.clip(np.asarray(d, dtype=float), 0.0, 1.0)
    s2 = d * (1 - d)
    # exact intersections: nothing leaves range(P1) through them
    d = np.where(s2 < SNAP, np.rint(d), d)
    s2 = d * (1 - d)
    a = 1 - d
    base = np.outer(a, a)
    g = base + np.outer(d, d)
    w = 2 * np.outer(s2, s2)
    live = w > 0
    geo = np.zeros_like(g)
    if n_max is None:
        geo[live] = 1.0 / (1.0 - g[live])
    else:
        gl = g[live]
        geo[live] = np.where(np.abs(1 - gl) > 1e-15, (1 - gl ** n_max) / (1 - gl + (np.abs(1 - gl) <= 1e-15)), n_max)
    return base + w * geo


def _psd_factors(coef: np.ndarray, tol: float = 1e-14):
    lam, vec = np.linalg.eigh(0.5 * (coef + coef.conj().T))
    keep = lam > tol * max(1.0, float(lam.max(initial=0.0)))
    return vec[:, keep] * np.sqrt(lam[keep])


# ---------------------------------------------------------------------------
# Kraus assembly


def _exact_kraus(h: HermitianEigensystem, cfg: MetropolisConfig, n_max: int | None) -> list[BlockKraus]:
    """Projective-bin channel on system (x) accept, without the pointer register."""
    bs = bin_structure(h, cfg.pe)
    bins = bs.exact_bins
    occupied = np.unique(bins)
    e_bin = bs.bin_energies
    v = h.eigenvectors
    r_tilde = cfg.effective_r_tilde
    out: list[BlockKraus] = []
    for c, w in zip(cfg.updates.ops, cfg.updates.weights):
        ce = v.conj().T @ c @ v
        for k1 in occupied:
            inp = np.flatnonzero(bins == k1)
            f_all = acceptance(e_bin[bins], e_bin[k1], cfg.beta)
            for k2 in occupied:
                f = float(acceptance(e_bin[k2], e_bin[k1], cfg.beta))
                if f <= 0:
                    continue
                o = np.flatnonzero(bins == k2)
                out.append(BlockKraus(o, inp, math.sqrt(w * f) * ce[np.ix_(o, inp)]))
            # reject branch on range(P1) = (levels matching k1) x accept qubit
            match = bs.match_mask(k1, r_tilde)[bins]
            R = np.flatnonzero(match)
            cr = ce[:, R]
            sq = np.sqrt(np.clip(f_all * (1 - f_all), 0, None))
            blocks = {
                (0, 0): f_all, (0, 1): -sq, (1, 0): -sq, (1, 1): 1 - f_all,
            }
            nr = len(R)
            B = np.zeros((2 * nr, 2 * nr), dtype=complex)
            for (al, be), r in blocks.items():
                B[al::2, be::2] = cr.conj().T @ (r[:, None] * cr)
            dvals, avec = np.linalg.eigh(0.5 * (B + B.conj().T))
            dvals = np.clip(dvals, 0, 1)
            # initial state: system in bin k1, accept qubit |0>
            pos = np.searchsorted(R, inp)
            k0 = avec.conj().T[:, 2 * pos]  # p x |inp|
            fac = _psd_factors(reject_coefficients(dvals, n_max))
            for lcol in fac.T:
                for acc in (0, 1):
                    e_rows = avec[acc::2, :]  # |R| x p
                    K = math.sqrt(w) * (e_rows * lcol[None, :]) @ k0
                    if np.abs(K).max() > 1e-15:
                        out.append(BlockKraus(R, inp, K))
    return out


def _register_kraus(h: HermitianEigensystem, cfg: MetropolisConfig, n_max: int | None) -> list[BlockKraus]:
    """Channel from the full pointer register model (any unitary PE model)."""
    model = RegisterModel(h, cfg)
    d, n = model.d, model.N
    full = np.arange(d)
    amps = model.bs.amplitudes
    out: list[BlockKraus] = []
    for c, w in enumerate(cfg.updates.weights):
        for k1 in range(n):
            g = model.G(k1)
            if np.abs(g).max() < 1e-15:
                continue
            u = model.U(c, k1)
            t = (u @ g).reshape(d, n, 2, d)
            # accept: acc = 1, pointer measured at k2, Phi^dag, pointer traced at p
            for k2 in range(n):
                t1 = t[:, k2, 1, :]
                if np.abs(t1).max() < 1e-15:
                    continue
                for p in range(n):
                    K = math.sqrt(w) * np.conj(amps[:, (k2 - p) % n])[:, None] * t1
                    out.append(BlockKraus(full, full, K))
            # reject
            p1 = model.P1(k1)
            wv, vv = np.linalg.eigh(p1)
            vp = vv[:, wv > 0.5]
            q1 = model.Q1(c, k1)
            B = vp.conj().T @ q1 @ vp
            dvals, avec = np.linalg.eigh(0.5 * (B + B.conj().T))
            dvals = np.clip(dvals, 0, 1)
            emat = vp @ avec
            k0 = emat.conj().T @ g
            fac = _psd_factors(reject_coefficients(dvals, n_max))
            et = emat.reshape(d, n, 2, -1)
            for lcol in fac.T:
                inner = lcol[:, None] * k0
                for x in range(n):
                    for acc in (0, 1):
                        K = math.sqrt(w) * et[:, x, acc, :] @ inner
                        if np.abs(K).max() > 1e-15:
                            out.append(BlockKraus(full, full, K))
    return out


def channel_kraus(h: HermitianEigensystem, cfg: MetropolisConfig, n_max: int | None = None,
                  method: str = "auto") -> list[BlockKraus]:
    """Block Kraus operators (eigenbasis) of the one-step channel.

    ``method="exact"`` uses projective bins on system (x) accept only,
    ``"register"`` simulates the pointer register explicitly; ``"auto"``
    picks ``exact`` for the exact PE variant.
    """
    if cfg.pe.variant == "median":
        raise ValueError("channel assembly needs a unitary PE model (exact or realistic)")
    if method == "auto":
        method = "exact" if cfg.pe.variant == "exact" else "register"
    if method == "exact":
        if cfg.pe.variant != "exact":
            raise ValueError("method='exact' requires exact phase estimation")
        return _exact_kraus(h, cfg, n_max)
    if method == "register":
        return _register_kraus(h, cfg, n_max)
    raise ValueError(f"unknown method {method!r}")


def kraus_superop_eig(kraus: list[BlockKraus], d: int) -> np.ndarray:
    m4 = np.zeros((d, d, d, d), dtype=complex)  # [y, x, b, a]
    for bk in kraus:
        o, i = bk.out, bk.inp
        m4[np.ix_(o, o, i, i)] += np.einsum("xa,yb->yxba", bk.K, bk.K.conj())
    return m4.reshape(d * d, d * d)


def basis_change_superop(v: np.ndarray) -> np.ndarray:
    """Superoperator of X -> V X V^dag under column stacking."""
    return np.kron(v.conj(), v)


# ---------------------------------------------------------------------------
# superoperator type


@dataclass
class Superoperator:
    """Channel on d x d operators.

    Attributes
    ----------
    matrix : ndarray or None
        d^2 x d^2 matrix in the computational basis (column stacking).
    eig_matrix : ndarray or None
        The same map in the eigenbasis of H.
    levels : tuple or None
        ``(index_pairs, restricted_matrix)``: the map restricted to operators
        block diagonal in the energy bins.  Its nonzero spectrum equals the
        full one, because every step first dephases across bins.
    """

    dim: int
    eigenvectors: np.ndarray
    matrix: np.ndarray | None = None
    eig_matrix: np.ndarray | None = None
    levels: tuple | None = None
    truncation_tail: float = 0.0
    meta: dict = field(default_factory=dict)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = self.dim
        out = self.matrix @ np.asarray(rho).reshape(-1, order="F")
        return out.reshape((d, d), order="F")

    def apply_power(self, rho: np.ndarray, m: int) -> np.ndarray:
        for _ in range(m):
            rho = self.apply(rho)
        return rho

    def choi(self) -> np.ndarray:
        """Choi matrix sum_ab |a><b| (x) E(|a><b|)."""
        d = self.dim
        m4 = self.matrix.reshape(d, d, d, d)  # [y, x, b, a]
        return m4.transpose(3, 1, 2, 0).reshape(d * d, d * d)

    def trace_deficit(self) -> np.ndarray:
        """I - E^dag(I): lost trace as a positive operator."""
        d = self.dim
        vec_i = np.eye(d).reshape(-1, order="F")
        adj = self.matrix.conj().T @ vec_i
        return np.eye(d) - adj.reshape((d, d), order="F")


def _levels_restriction(kraus: list[BlockKraus], bins: np.ndarray):
    d = len(bins)
    pairs = [(x, y) for x in range(d) for y in range(d) if bins[x] == bins[y]]
    sidx = -np.ones((d, d), dtype=int)
    for k, (x, y) in enumerate(pairs):
        sidx[x, y] = k
    m = np.zeros((len(pairs), len(pairs)), dtype=complex)
    for bk in kraus:
        o, i = bk.out, bk.inp
        rows = sidx[np.ix_(o, o)].ravel()
        cols = sidx[np.ix_(i, i)].ravel()
        block = np.einsum("xa,yb->xyab", bk.K, bk.K.conj()).reshape(len(o) ** 2, len(i) ** 2)
        r_ok = rows >= 0
        c_ok = cols >= 0
        if not r_ok.any() or not c_ok.any():
            continue
        np.add.at(m, (rows[r_ok][:, None], cols[c_ok][None, :]), block[np.ix_(r_ok, c_ok)])
    return pairs, m


def assemble_channel(
    h: HermitianEigensystem,
    cfg: MetropolisConfig,
    n_max: int | None = None,
    method: str = "auto",
    form: str = "full",
    dim_cap: int = DIM_CAP,
) -> Superoperator:
    """Assemble the one-step channel (accept branch plus all reject branches).

    Parameters
    ----------
    n_max : int or None
        Maximum number of (Q, P) rounds after the first failed P
        measurement.  ``None`` sums the reject series exactly; a finite cap
        leaves a trace deficit reported as ``truncation_tail``.
    method : {"auto", "exact", "register", "propagate"}
        ``"propagate"`` iterates the measurement sequence operator by
        operator (slow; an independent check of the closed form).
    form : {"full", "levels"}
        ``"levels"`` skips the d^2 x d^2 matrix and keeps only the
        restriction to bin-block-diagonal operators (enough for spectra).
    """
    d = h.dim
    if d > dim_cap and form == "full":
        raise DimensionCap(f"dimension {d} exceeds the dense cap {dim_cap}")
    if method == "propagate":
        return _assemble_propagate(h, cfg, n_max if n_max is not None else 200)
    kraus = channel_kraus(h, cfg, n_max, method)
    meta = {"beta": cfg.beta, "mode": cfg.pe.describe(), "r": cfg.pe.r, "n_max": n_max,
            "method": method if method != "auto" else ("exact" if cfg.pe.variant == "exact" else "register")}
    so = Superoperator(d, h.eigenvectors, meta=meta)
    if form == "levels":
        if cfg.pe.variant != "exact":
            raise ValueError("level restriction needs projective bins")
        bins = bin_structure(h, cfg.pe).exact_bins
        so.levels = _levels_restriction(kraus, bins)
        if n_max is not None:
            pairs, m = so.levels
            diag = [k for k, (x, y) in enumerate(pairs) if x == y]
            # deficit on eigen-projectors is the worst case for block-diagonal inputs
            lost = 1 - np.real(m[np.ix_(diag, diag)].sum(axis=0))
            so.truncation_tail = float(max(0.0, lost.max()))
        return so
    m_eig = kraus_superop_eig(kraus, d)
    t = basis_change_superop(h.eigenvectors)
    so.eig_matrix = m_eig
    so.matrix = t @ m_eig @ t.conj().T
    so.truncation_tail = 0.0 if n_max is None else float(max(0.0, np.linalg.eigvalsh(so.trace_deficit()).max()))
    return so


def _assemble_propagate(h: HermitianEigensystem, cfg: MetropolisConfig, n_max: int) -> Superoperator:
    """Brute-force reference: push every matrix unit through the measurement tree."""
    model = RegisterModel(h, cfg)
    d, n, D = model.d, model.N, model.D
    eye = np.eye(D)
    m_eig = np.zeros((d * d, d * d), dtype=complex)
    acc1 = np.diag(model.acc_mask(1).astype(float))
    phid = model.phi.conj().T
    for c, w in enumerate(cfg.updates.weights):
        for k1 in range(n):
            g = model.G(k1)
            if np.abs(g).max() < 1e-15:
                continue
            u = model.U(c, k1)
            p1 = model.P1(k1)
            p0 = eye - p1
            q1 = model.Q1(c, k1)
            q0 = eye - q1
            for a in range(d):
                for b in range(d):
                    x = np.outer(g[:, a], g[:, b].conj())
                    y = np.zeros((D, D), dtype=complex)
                    # accept: measure pointer after W, then Phi^dag
                    ux = acc1 @ u @ x @ u.conj().T @ acc1
                    for k2 in range(n):
                        sel = np.zeros(D)
                        sel[np.arange(D) // 2 % n == k2] = 1
                        y += phid @ (sel[:, None] * ux * sel[None, :]) @ phid.conj().T
                    z = q0 @ x @ q0
                    y += p1 @ z @ p1
                    z = p0 @ z @ p0
                    for _ in range(n_max):
                        z1 = q1 @ z @ q1
                        z0 = q0 @ z @ q0
                        y += p1 @ (z1 + z0) @ p1
                        z = p0 @ (z1 + z0) @ p0
                    red = np.einsum("jxakxa->jk", y.reshape(d, n, 2, d, n, 2))
                    m_eig[:, a + d * b] += w * red.reshape(-1, order="F")
    so = Superoperator(d, h.eigenvectors, meta={"beta": cfg.beta, "mode": cfg.pe.describe(),
                                               "r": cfg.pe.r, "n_max": n_max, "method": "propagate"})
    t = basis_change_superop(h.eigenvectors)
    so.eig_matrix = m_eig
    so.matrix = t @ m_eig @ t.conj().T
    so.truncation_tail = float(max(0.0, np.linalg.eigvalsh(so.trace_deficit()).max()))
    return so


# ---------------------------------------------------------------------------
# analysis


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    moduli: np.ndarray
    gap: float
    fixed_point: np.ndarray
    unique: bool


def _fixed_point_from(vals, vecs, to_operator, d, identity_vec, tol):
    unit = np.flatnonzero(np.abs(vals - 1) < tol)
    if len(unit) == 0:
        raise NoUnitEigenvalue(f"largest eigenvalue {vals[np.argmax(np.abs(vals))]:.3e} is not 1")
    if len(unit) == 1:
        sigma = to_operator(vecs[:, unit[0]])
        unique = True
    else:
        # project I/d onto the unit eigenspace (oblique, along the other eigenvectors)
        coeffs = np.linalg.lstsq(vecs, identity_vec, rcond=None)[0]
        sigma = to_operator(vecs[:, unit] @ coeffs[unit])
        unique = False
    sigma = 0.5 * (sigma + sigma.conj().T)
    tr = np.trace(sigma).real
    if abs(tr) < 1e-14:
        raise NoUnitEigenvalue("unit eigenvector has zero trace")
    return sigma / tr, unique


def channel_spectrum(so: Superoperator, tol: float = 1e-8) -> SpectrumReport:
    """Eigenvalues, gap 1 - |lambda_2| and fixed point (computational basis)."""
    d = so.dim
    v = so.eigenvectors
    if so.eig_matrix is not None:
        vals, vecs = np.linalg.eig(so.eig_matrix)

        def to_op(x):
            return v @ x.reshape((d, d), order="F") @ v.conj().T

        ident = np.eye(d).reshape(-1, order="F") / d
    elif so.levels is not None:
        pairs, m = so.levels
        vals, vecs = np.linalg.eig(m)

        def to_op(x):
            op = np.zeros((d, d), dtype=complex)
            for k, (a, b) in enumerate(pairs):
                op[a, b] = x[k]
            return v @ op @ v.conj().T

        ident = np.array([1.0 / d if a == b else 0.0 for a, b in pairs])
    else:
        raise ValueError("superoperator has no matrix")
    order = np.argsort(-np.abs(vals), kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    sigma, unique = _fixed_point_from(vals, vecs, to_op, d, ident, tol + so.truncation_tail)
    mods = np.abs(vals)
    gap = float(1 - mods[1]) if len(mods) > 1 else 1.0
    return SpectrumReport(vals, mods, gap, sigma, unique)


def gibbs_state(h: HermitianEigensystem, beta: float) -> np.ndarray:
    """exp(-beta H)/Z; beta = inf gives the normalised ground-space projector."""
    return h.from_eigenbasis(np.diag(gibbs_weights(h, beta)))


def gibbs_weights(h: HermitianEigensystem, beta: float) -> np.ndarray:
    e = h.eigenvalues
    if math.isinf(beta):
        labels, _ = h.level_labels()
        p = (labels == labels[0]).astype(float)
    else:
        p = np.exp(-beta * (e - e[0]))
    return p / p.sum()


def transfer_tensor(so: Superoperator) -> np.ndarray:
    """T[i, j, n, m] = <psi_i| E(|psi_n><psi_m|) |psi_j>."""
    d = so.dim
    if so.eig_matrix is None:
        t = basis_change_superop(so.eigenvectors)
        so.eig_matrix = t.conj().T @ so.matrix @ t
    return so.eig_matrix.reshape(d, d, d, d).transpose(1, 0, 3, 2)


def detailed_balance_residual(so: Superoperator, basis: np.ndarray | None = None, p=None,
                              max_exhaustive: int = 16, samples: int = 200_000,
                              rng: np.random.Generator | None = None) -> tuple[float, int]:
    """Largest violation of
    sqrt(p_n p_m) <i|E(|n><m|)|j> = sqrt(p_i p_j) <m|E(|j><i|)|n>.

    Returns ``(residual, n_checked)``.  For d <= ``max_exhaustive`` all d^4
    index tuples are checked; otherwise ``samples`` random tuples.
    """
    d = so.dim
    if basis is None:
        basis = so.eigenvectors
    t_basis = basis_change_superop(basis)
    m = t_basis.conj().T @ so.matrix @ t_basis
    T = m.reshape(d, d, d, d).transpose(1, 0, 3, 2)
    sp = np.sqrt(np.clip(np.asarray(p, dtype=float), 0, None))
    if d <= max_exhaustive:
        lhs = np.einsum("n,m,ijnm->ijnm", sp, sp, T)
        rhs = np.einsum("i,j,ijnm->ijnm", sp, sp, T.transpose(3, 2, 1, 0))
        return float(np.abs(lhs - rhs).max()), d ** 4
    rng = rng or np.random.default_rng(0)
    i, j, n, mm = rng.integers(0, d, size=(4, samples))
    lhs = sp[n] * sp[mm] * T[i, j, n, mm]
    rhs = sp[i] * sp[j] * T[mm, n, j, i]
    return float(np.abs(lhs - rhs).max()), samples


def db_fixed_point_lemma_check(so: Superoperator, basis: np.ndarray, p, db_tol: float = 1e-10,
                               fp_tol: float = 1e-8) -> bool | None:
    """If the detailed-balance residual is below ``db_tol``, check that
    sigma = sum_i p_i |psi_i><psi_i| is fixed.  Returns None when the premise fails."""
    res, _ = detailed_balance_residual(so, basis, p)
    if res > db_tol + so.truncation_tail:
        return None
    sigma = (basis * np.asarray(p)) @ basis.conj().T
    return trace_norm(so.apply(sigma) - sigma) <= fp_tol + so.truncation_tail


def _rank_one_probes(d: int) -> list[np.ndarray]:
    probes = [np.eye(d)[:, a] for a in range(d)]
    for a in range(d):
        for b in range(a + 1, d):
            e = np.zeros(d, dtype=complex)
            e[a], e[b] = 1 / math.sqrt(2), 1 / math.sqrt(2)
            probes.append(e.copy())
            e[b] = 1j / math.sqrt(2)
            probes.append(e)
    return probes


def primitivity_check(so: Superoperator, m_max: int = 50, tol: float = 1e-10) -> int | None:
    """Smallest m such that E^m maps every rank-one probe to a full-rank state.

    Probes are the eigenbasis vectors and their pairwise (1, 1) and (1, i)
    superpositions.  Returns None if no m <= m_max works.
    """
    d = so.dim
    v = so.eigenvectors
    states = [v @ np.outer(x, x.conj()) @ v.conj().T for x in _rank_one_probes(d)]
    for m in range(1, m_max + 1):
        states = [so.apply(s) for s in states]
        if all(np.linalg.eigvalsh(0.5 * (s + s.conj().T)).min() > tol for s in states):
            return m
    return None


def estimate_eta1(so: Superoperator, samples: int = 200, rng: np.random.Generator | None = None) -> float:
    """Sampled trace-norm contraction of E on differences of orthogonal pure states."""
    rng = rng or np.random.default_rng(0)
    d = so.dim
    best = 0.0
    v = so.eigenvectors
    cands = [(v[:, a], v[:, b]) for a in range(d) for b in range(a + 1, d)]
    for _ in range(samples):
        z = rng.standard_normal((d, 2)) + 1j * rng.standard_normal((d, 2))
        q, _ = np.linalg.qr(z)
        cands.append((q[:, 0], q[:, 1]))
    for a, b in cands:
        delta = np.outer(a, a.conj()) - np.outer(b, b.conj())
        best = max(best, trace_norm(so.apply(delta)) / 2.0)
    return best


def contraction_and_error_bound(so: Superoperator, rho_g: np.ndarray, eta1: float | None = None,
                                samples: int = 200, rng: np.random.Generator | None = None) -> dict:
    """eps_sg = ||E(rho_G) - rho_G||_1 and the bound eps_sg / (1 - eta1)."""
    if eta1 is None:
        eta1 = estimate_eta1(so, samples, rng)
    if eta1 >= 1:
        raise ValueError(f"ergodicity coefficient estimate {eta1:.6f} >= 1; no contraction bound")
    eps_sg = trace_norm(so.apply(rho_g) - rho_g)
    return {"eps_sg": eps_sg, "eta1": eta1, "eps_star_bound": eps_sg / (1 - eta1), "eta1_samples": samples}


@dataclass
class ChannelReport:
    d: int
    beta: float
    r: int | None
    mode: str
    gap: float
    top_eigenvalue_moduli: list
    db_residual: float
    gibbs_distance: float
    truncation_tail: float
    fixed_point_unique: bool = True

    def to_json(self) -> str:
        out = asdict(self)
        out["beta"] = "inf" if math.isinf(self.beta) else self.beta
        return json.dumps(out, indent=2)


def channel_report(so: Superoperator, h: HermitianEigensystem, beta: float) -> ChannelReport:
    spec = channel_spectrum(so)
    rho_g = gibbs_state(h, beta)
    p = gibbs_weights(h, beta)
    db = detailed_balance_residual(so, h.eigenvectors, p)[0] if so.matrix is not None else float("nan")
    return ChannelReport(
        d=so.dim,
        beta=beta,
        r=so.meta.get("r"),
        mode=so.meta.get("mode", ""),
        gap=spec.gap,
        top_eigenvalue_moduli=[float(x) for x in spec.moduli[:10]],
        db_residual=db,
        gibbs_distance=0.5 * trace_norm(spec.fixed_point - rho_g),
        truncation_tail=so.truncation_tail,
        fixed_point_unique=spec.unique,
    )
