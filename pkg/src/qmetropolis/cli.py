"""Command-line driver: gap scans, chains, channel reports and verification suites.

Every file written gets a ``<name>.manifest.json`` sidecar with the full
argument echo, seed, version and timestamps.  Data files themselves carry no
timestamps, so the same command line and seed reproduce them byte for byte.

Exit codes: 0 pass, 1 a verification failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
from scipy.sparse.linalg import eigs

from . import __version__
from .channel import (
    assemble_channel,
    channel_report,
    channel_spectrum,
    detailed_balance_residual,
    gibbs_weights,
)
from .hamiltonians import (
    PauliHamiltonian,
    PauliString,
    PERescaling,
    build_heisenberg_pair,
    build_xx_chain,
    circuit_unitary,
    decompose_string_exponential,
    fermion_creation_ops,
    jordan_wigner_hopping,
    rescale_for_pe,
)
from .jordan import jordan_normal_form, random_rejection_case, reconstruction_error, rejection_check
from .linalg import eig_hermitian, expm_hermitian_phase, op_norm, phase_distance, random_projector
from .phase_estimation import (
    PEModel,
    median_boost_distribution,
    pointer_distribution,
    pointer_distribution_closed_form,
)
from .walk import (
    MetropolisConfig,
    UpdateSet,
    local_pauli_update_set,
    make_rng,
    pauli_update_set,
    run_chain,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# argument helpers


def parse_beta(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        b = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"beta must be a number or 'inf', got {text!r}")
    if b < 0 or math.isnan(b) or math.isinf(b):
        raise argparse.ArgumentTypeError("beta must be >= 0; spell zero temperature as 'inf'")
    return b


def parse_mode(text: str) -> tuple[str, int]:
    """'exact', 'realistic' or 'median:ETA'."""
    if text in ("exact", "realistic"):
        return text, 1
    if text.startswith("median:"):
        try:
            eta = int(text.split(":", 1)[1])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad median count in {text!r}")
        return "median", eta
    raise argparse.ArgumentTypeError(f"mode must be exact, realistic or median:ETA, got {text!r}")


def parse_range(text: str) -> list[int]:
    """'4' or '2-6'."""
    try:
        if "-" in text:
            a, b = text.split("-", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or N1-N2, got {text!r}")
    if lo < 2 or hi < lo:
        raise argparse.ArgumentTypeError("need 2 <= N1 <= N2")
    return list(range(lo, hi + 1))


def load_hamiltonian(args) -> PauliHamiltonian:
    src = args.ham
    if src == "h2":
        return build_heisenberg_pair()
    if src == "xx":
        if args.n is None or args.g is None:
            raise UsageError("--ham xx needs --n and --g")
        n = parse_range(args.n)
        if len(n) != 1:
            raise UsageError("--ham xx takes a single --n")
        return build_xx_chain(n[0], args.g)
    path = Path(src)
    if not path.exists():
        raise UsageError(f"Hamiltonian file {src} not found")
    return PauliHamiltonian.load(path)


def build_updates(spec: str, n: int) -> UpdateSet:
    if spec == "x1":
        return pauli_update_set(n, [(0, "X")])
    if spec == "pauli-local":
        return local_pauli_update_set(n)
    path = Path(spec)
    if not path.exists():
        raise UsageError(f"--updates must be x1, pauli-local or a JSON file; {spec} not found")
    items = json.loads(path.read_text())
    return pauli_update_set(n, [(int(site), str(letter)) for site, letter in items])


def build_pe(h, mode: tuple[str, int], r: int | None) -> PEModel:
    variant, eta = mode
    if r is None:
        if variant != "exact":
            raise UsageError(f"{variant} phase estimation needs --r")
        return PEModel("exact", None)
    resc = rescale_for_pe(h, r, mode="exact" if variant == "exact" else "generic")
    return PEModel(variant, resc, eta)


# ---------------------------------------------------------------------------
# output


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _config_echo(args) -> dict:
    out = {}
    for k, v in sorted(vars(args).items()):
        if k == "func":
            continue
        if isinstance(v, float) and math.isinf(v):
            v = "inf"
        elif isinstance(v, tuple):
            v = list(v)
        out[k] = v
    return out


def write_output(path: str | None, text: str, args, started: str) -> None:
    """Write ``text`` to ``path`` (stdout if None) plus its manifest sidecar."""
    if path is None:
        sys.stdout.write(text)
        return
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)
    manifest = {
        "subcommand": args.command,
        "config": _config_echo(args),
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "started": started,
        "finished": _now(),
        "outputs": [str(p)],
    }
    Path(str(p) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2) + "\n"


# ---------------------------------------------------------------------------
# gap scan


def gap_point(n: int, g: float, beta: float, updates: str, r: int | None, iterative: bool) -> dict:
    """Gap of the one-step channel for the open XX chain of n sites."""
    ham = build_xx_chain(n, g)
    h = ham.eigensystem()
    pe = build_pe(h, ("exact", 1), r)
    cfg = MetropolisConfig(beta, pe, build_updates(updates, n))
    so = assemble_channel(h, cfg, form="levels")
    if iterative:
        m = so.levels[1]
        k = min(4, m.shape[0] - 2)
        vals = eigs(m, k=k, which="LM", return_eigenvectors=False, tol=1e-12)
        mods = np.sort(np.abs(vals))[::-1]
        gap = float(1 - mods[1])
    else:
        gap = channel_spectrum(so).gap
    gap = max(gap, 0.0)
    return {
        "N": n,
        "gap": gap,
        "inverse_gap": 1 / gap if gap > 1e-12 else math.inf,
        "dim": h.dim,
        "mode": pe.describe(),
        "truncation_tail": so.truncation_tail,
    }


def gap_scan_rows(ns, g, beta, updates="x1", r=None, iterative=False, workers=1) -> list[dict]:
    jobs = [(n, g, beta, updates, r, iterative or n >= 8) for n in ns]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(gap_point, *zip(*jobs)))
    return [gap_point(*j) for j in jobs]


def rows_to_csv(rows: list[dict], header: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(row[k])) if isinstance(row[k], float) else row[k] for k in header])
    return buf.getvalue()


def cmd_gap_scan(args) -> int:
    started = _now()
    ns = parse_range(args.n)
    if max(ns) > 7 and not args.iterative:
        raise UsageError("N > 7 needs --iterative")
    rows = gap_scan_rows(ns, args.g, args.beta, args.updates, args.r, args.iterative, args.workers)
    text = rows_to_csv(rows, ["N", "gap", "inverse_gap", "dim", "mode", "truncation_tail"])
    write_output(args.out, text, args, started)
    return EXIT_OK


# ---------------------------------------------------------------------------
# two-spin demo


def heisenberg_demo_updates() -> UpdateSet:
    return pauli_update_set(2, [(0, "X"), (1, "X"), (0, "Z"), (1, "Z")])


def heisenberg_demo(beta: float, m: int, seed: int, burn_in: int = 100) -> dict:
    """Full-register walk on the two-spin Heisenberg pair with one pointer bit."""
    ham = build_heisenberg_pair()
    h = ham.eigensystem()
    resc = rescale_for_pe(h, 1, mode="exact")
    cfg = MetropolisConfig(beta, PEModel("exact", resc), heisenberg_demo_updates(), seed=seed)
    v = h.eigenvectors
    projs = [np.outer(v[:, k], v[:, k].conj()) for k in range(4)]
    top = sum(projs[k] for k in range(4) if h.eigenvalues[k] > 1)
    res = run_chain(cfg, h, m, [top] + projs, burn_in=burn_in, path="full")
    target = 0.0 if math.isinf(beta) else math.exp(-2 * beta) / (3 + math.exp(-2 * beta))
    occ, se = float(res.means[0]), float(res.stderr[0])
    return {
        "beta": beta,
        "m": m,
        "seed": seed,
        "pointer_time": resc.tau,
        "excited_occupation": occ,
        "stderr": se,
        "gibbs_prediction": target,
        "z_score": (occ - target) / se if se > 0 else (0.0 if occ == target else math.inf),
        "level_occupations": [float(x) for x in res.means[1:]],
        "level_stderr": [float(x) for x in res.stderr[1:]],
        "level_energies": [float(x) for x in h.eigenvalues],
        "aborts": res.aborts,
    }


def cmd_demo(args) -> int:
    started = _now()
    out = heisenberg_demo(args.beta, args.m, args.seed)
    write_output(args.out, dumps(out), args, started)
    return EXIT_OK


# ---------------------------------------------------------------------------
# verification suites


def verify_db(seed: int) -> dict:
    h = build_heisenberg_pair().eigensystem()
    resc = rescale_for_pe(h, 1, mode="exact")
    worst = 0.0
    for beta in (0.0, 0.5, 1.0, 2.0):
        cfg = MetropolisConfig(beta, PEModel("exact", resc), local_pauli_update_set(2))
        so = assemble_channel(h, cfg)
        res, _ = detailed_balance_residual(so, h.eigenvectors, gibbs_weights(h, beta))
        worst = max(worst, res)
    return {"residual": worst, "tolerance": 1e-10, "passed": worst < 1e-10}


def verify_pfail(seed: int, pairs: int = 20, trials: int = 10_000, n_max: int = 50) -> dict:
    rng = make_rng(seed, 0)
    cases = [random_rejection_case(rng) for _ in range(pairs)]
    out = rejection_check(cases, n_max, trials, rng)
    out["passed"] = out["bound_ok"] and out["exact_ok"]
    return out


def verify_jordan(seed: int, pairs: int = 50) -> dict:
    rng = make_rng(seed, 0)
    worst = 0.0
    for _ in range(pairs):
        d = int(rng.integers(2, 17))
        P1 = random_projector(d, int(rng.integers(1, d)), rng)
        Q1 = random_projector(d, int(rng.integers(1, d)), rng)
        worst = max(worst, reconstruction_error(jordan_normal_form(P1, Q1), P1, Q1))
    return {"pairs": pairs, "reconstruction_error": worst, "passed": worst < 1e-10}


def verify_pe(seed: int) -> dict:
    rng = make_rng(seed, 0)
    worst = 0.0
    norm = 0.0
    for _ in range(50):
        r = int(rng.integers(1, 7))
        resc = PERescaling(2 * math.pi, 0.0, r)
        e = float(rng.uniform(0, 2 ** r - 1))
        a = pointer_distribution(e, resc)
        worst = max(worst, float(np.abs(a - pointer_distribution_closed_form(e, resc)).max()))
        norm = max(norm, abs(a.sum() - 1))
    resc = PERescaling(2 * math.pi, 0.0, 3)
    tail = 0.0
    for e in np.linspace(0, 7, 57):
        boosted = median_boost_distribution(pointer_distribution(float(e), resc), 5)
        lo = int(math.floor(e)) % 8
        tail = max(tail, 1 - boosted[lo] - boosted[(lo + 1) % 8])
    return {
        "closed_form_error": worst,
        "normalization_error": norm,
        "median_tail_r3_eta5": tail,
        "passed": worst < 1e-12 and norm < 1e-12 and tail <= 2 ** -5,
    }


def verify_jw(seed: int) -> dict:
    rng = make_rng(seed, 0)
    s = PauliString(1.0, "XZX")
    worst = 0.0
    for eps in rng.uniform(-math.pi, math.pi, 20):
        u = circuit_unitary(decompose_string_exponential(s, float(eps)), 3)
        target = eig_hermitian(s.to_matrix())
        worst = max(worst, phase_distance(u, expm_hermitian_phase(target, float(eps))))
    hop = 0.0
    for n in range(2, 5):
        for i in range(n):
            for j in range(i + 1, n):
                terms = jordan_wigner_hopping(i, j, 1.0, n)
                mat = sum(t.to_matrix() for t in terms)
                hop = max(hop, op_norm(mat - fermion_hopping_matrix(i, j, n)))
    return {"decomposition_error": worst, "hopping_error": hop, "passed": worst < 1e-10 and hop < 1e-12}


def fermion_hopping_matrix(i: int, j: int, n: int) -> np.ndarray:
    """-(c_i^dag c_j + c_j^dag c_i) from dense creation operators."""
    c = fermion_creation_ops(n)
    t = c[i] @ c[j].conj().T
    return -(t + t.conj().T)


SUITES = {"db": verify_db, "pfail": verify_pfail, "jordan": verify_jordan, "pe": verify_pe, "jw": verify_jw}


def cmd_verify(args) -> int:
    started = _now()
    report = {"suite": args.suite, "seed": args.seed, **SUITES[args.suite](args.seed)}
    write_output(args.out, dumps(report), args, started)
    return EXIT_OK if report["passed"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# pointer histogram, chains, channel reports


def cmd_pe_hist(args) -> int:
    started = _now()
    if args.r is None:
        raise UsageError("pe-hist needs --r")
    resc = PERescaling(2 * math.pi, 0.0, args.r)
    dist = pointer_distribution(args.phase, resc)
    variant, eta = args.mode
    if variant == "median":
        dist = median_boost_distribution(dist, eta)
    elif variant == "exact":
        raise UsageError("pe-hist shows pointer models; use --mode realistic or median:ETA")
    rows = [{"bin": k, "probability": float(p)} for k, p in enumerate(dist)]
    write_output(args.out, rows_to_csv(rows, ["bin", "probability"]), args, started)
    return EXIT_OK


def cmd_run(args) -> int:
    started = _now()
    ham = load_hamiltonian(args)
    h = ham.eigensystem()
    cfg = MetropolisConfig(
        args.beta, build_pe(h, args.mode, args.r), build_updates(args.updates, ham.n_sites),
        n_star=args.n_star, r_tilde=args.r_tilde, seed=args.seed,
    )
    hmat = ham.to_matrix()
    res = run_chain(cfg, h, args.m, [hmat], burn_in=args.burn_in, keep_records=args.trajectory is not None)
    out = {"path": res.path, "estimates": res.to_json(["H"])}
    write_output(args.out, dumps(out), args, started)
    if args.trajectory is not None:
        rows = [
            {
                "step": rec.step,
                "level_or_hash": rec.level if rec.level is not None else rec.state_hash,
                "energy_bin": rec.energy_bin,
                "outcome": rec.outcome,
                "n_reject_used": rec.n_reject_used,
            }
            for rec in res.records
        ]
        text = rows_to_csv(rows, ["step", "level_or_hash", "energy_bin", "outcome", "n_reject_used"])
        write_output(args.trajectory, text, args, started)
    return EXIT_OK


def cmd_channel(args) -> int:
    started = _now()
    ham = load_hamiltonian(args)
    h = ham.eigensystem()
    cfg = MetropolisConfig(
        args.beta, build_pe(h, args.mode, args.r), build_updates(args.updates, ham.n_sites),
        n_star=args.n_star, r_tilde=args.r_tilde,
    )
    so = assemble_channel(h, cfg, n_max=args.n_max)
    write_output(args.out, channel_report(so, h, args.beta).to_json() + "\n", args, started)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default=None, help="output file (stdout if omitted)")

    walk = argparse.ArgumentParser(add_help=False)
    walk.add_argument("--ham", default="h2", help="h2, xx (with --n/--g) or a Hamiltonian JSON file")
    walk.add_argument("--n", default=None)
    walk.add_argument("--g", type=float, default=None)
    walk.add_argument("--beta", type=parse_beta, default=1.0)
    walk.add_argument("--r", type=int, default=None, help="pointer bits (omit for unlimited exact resolution)")
    walk.add_argument("--r-tilde", type=int, default=None)
    walk.add_argument("--n-star", type=int, default=50)
    walk.add_argument("--mode", type=parse_mode, default=("exact", 1))
    walk.add_argument("--updates", default="pauli-local")

    p = argparse.ArgumentParser(prog="qmetropolis", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("gap-scan", parents=[common], help="inverse gap of the XX chain vs N")
    s.add_argument("--n", default="2-6", help="N or N1-N2")
    s.add_argument("--g", type=float, required=True)
    s.add_argument("--beta", type=parse_beta, default=math.inf)
    s.add_argument("--r", type=int, default=None, help="binned exact mode with r bits")
    s.add_argument("--updates", default="x1")
    s.add_argument("--iterative", action="store_true", help="sparse eigensolver for the gap")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_gap_scan)

    s = sub.add_parser("demo-heisenberg", parents=[common], help="two-spin walk on the full register")
    s.add_argument("--beta", type=parse_beta, default=1.0)
    s.add_argument("--m", type=int, default=10_000)
    s.set_defaults(func=cmd_demo)

    s = sub.add_parser("verify", parents=[common], help="run a verification suite")
    s.add_argument("suite", choices=sorted(SUITES))
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("pe-hist", parents=[common], help="pointer distribution as CSV")
    s.add_argument("--phase", type=float, required=True, help="phase in bin units")
    s.add_argument("--r", type=int, default=None)
    s.add_argument("--mode", type=parse_mode, default=("realistic", 1))
    s.set_defaults(func=cmd_pe_hist)

    s = sub.add_parser("run", parents=[common, walk], help="sample a chain and estimate <H>")
    s.add_argument("--m", type=int, default=10_000)
    s.add_argument("--burn-in", type=int, default=0)
    s.add_argument("--trajectory", default=None, help="trajectory CSV path")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("channel", parents=[common, walk], help="assemble the channel and report")
    s.add_argument("--n-max", type=int, default=None, help="cap on reject rounds (exact sum if omitted)")
    s.set_defaults(func=cmd_channel)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (UsageError, ValueError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
