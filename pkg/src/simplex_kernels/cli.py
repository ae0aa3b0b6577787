"""Command-line entry point: ``simplex-kernels {eval,verify,sample,pds}``.

Exit codes: 0 success, 1 a verification check failed, 2 invalid
configuration, 3 a domain error (for example a degree above N).
JSON reports carry the schema id ``simplex-kernels/report/v1`` and embed
every run setting next to the library version.  Rationals are written as
"p/q" strings.
"""
from __future__ import annotations

import argparse
import io
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .numkit import DomainError, PartitionProfile, as_exact, compositions

SCHEMA = "simplex-kernels/report/v1"
THREADS_ENV = "SIMPLEX_KERNELS_THREADS"


class ConfigError(Exception):
    """Invalid command-line configuration (exit code 2)."""


# --- parsing helpers ------------------------------------------------------

def parse_numbers(text: Optional[str], flavor: str = "exact", what: str = "value") -> Optional[tuple]:
    if text is None:
        return None
    try:
        vals = [as_exact(v.strip()) for v in text.split(",") if v.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse {what} {text!r}: {exc}") from exc
    if not vals:
        raise ConfigError(f"{what} is empty")
    return tuple(vals if flavor == "exact" else (float(v) for v in vals))


def parse_ints(text: Optional[str], what: str) -> Optional[tuple]:
    if text is None:
        return None
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse {what} {text!r} as integers") from exc


def thread_cap() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, bool) or v is None or isinstance(v, (str, int)):
        return v
    if isinstance(v, float):
        return v if np.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return jsonable(float(v))
    if isinstance(v, np.ndarray):
        return [jsonable(u) for u in v.tolist()]
    if isinstance(v, dict):
        return {str(k): jsonable(u) for k, u in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(u) for u in v]
    if hasattr(v, "to_json"):
        return jsonable(v.to_json())
    if hasattr(v, "as_dict"):
        return jsonable(v.as_dict())
    return str(v)


@dataclass
class JobConfig:
    command: str
    seed: int
    flavor: str
    truncation: Optional[int]
    grid: int
    out: Optional[str]
    threads: int

    def report(self, body: dict) -> dict:
        return {"schema": SCHEMA, "version": __version__, "command": self.command,
                "seed": self.seed, "flavor": self.flavor, "truncation": self.truncation,
                "grid": self.grid, "threads": self.threads, **body}


def emit(cfg: JobConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def emit_json(cfg: JobConfig, body: dict) -> None:
    emit(cfg, json.dumps(jsonable(cfg.report(body)), indent=2, sort_keys=True) + "\n")


def _require(value, flag: str):
    if value is None:
        raise ConfigError(f"{flag} is required here")
    return value


def _random_rational_points(d: int, count: int, rng, denominator: int = 12) -> list:
    comps = compositions(d, denominator)
    idx = rng.gen.choice(len(comps), size=count, replace=True)
    return [tuple(Fraction(c, denominator) for c in comps[i]) for i in idx]


# --- eval -----------------------------------------------------------------

def cmd_eval(args, cfg: JobConfig) -> int:
    from . import hahn, jacobi, symkern
    from .dist import RankedPoint

    kind = args.kind
    n = args.n
    if kind == "jacobi":
        alpha = _require(parse_numbers(args.alpha, cfg.flavor, "--alpha"), "--alpha")
        x = _require(parse_numbers(args.x, cfg.flavor, "--x"), "--x")
        y = _require(parse_numbers(args.y, cfg.flavor, "--y"), "--y")
        for p in (x, y):
            if len(p) != len(alpha):
                raise ConfigError("points must have the same length as --alpha")
        if args.quantity == "xi":
            value = jacobi.xi(alpha, n, x, y)
        else:
            value = jacobi.q_kernel(alpha, n, x, y)
    elif kind == "hahn":
        alpha = _require(parse_numbers(args.alpha, cfg.flavor, "--alpha"), "--alpha")
        r = _require(parse_ints(args.r, "--r"), "--r")
        s = _require(parse_ints(args.s, "--s"), "--s")
        ctx = hahn.HahnContext(alpha, sum(r))
        if args.quantity == "xi":
            value = hahn.xi_h(ctx, n, r, s)
        elif args.quantity == "chi":
            value = hahn.chi_h(ctx, n, r, s)
        else:
            value = hahn.h_kernel(ctx, n, r, s)
    elif kind in ("ranked", "pd"):
        theta = _require(parse_numbers(args.theta, cfg.flavor, "--theta"), "--theta")[0]
        x = _require(parse_numbers(args.x, "float" if kind == "pd" else cfg.flavor, "--x"), "--x")
        y = _require(parse_numbers(args.y, "float" if kind == "pd" else cfg.flavor, "--y"), "--y")
        if kind == "ranked":
            d = _require(args.d, "--d")
            fn = symkern.xi_ranked if args.quantity == "xi" else symkern.q_kernel_ranked
            value = fn(theta, d, n, x, y)
        else:
            px = RankedPoint(np.array(x, dtype=float), max(0.0, 1.0 - sum(x)))
            py = RankedPoint(np.array(y, dtype=float), max(0.0, 1.0 - sum(y)))
            fn = symkern.xi_pd if args.quantity == "xi" else symkern.q_kernel_pd
            value = fn(theta, n, px, py)
    else:  # esf
        theta = _require(parse_numbers(args.theta, cfg.flavor, "--theta"), "--theta")[0]
        r = PartitionProfile(_require(parse_ints(args.r, "--r"), "--r"))
        s = PartitionProfile(_require(parse_ints(args.s, "--s"), "--s"))
        fn = symkern.xi_h_esf if args.quantity == "xi" else symkern.h_kernel_esf
        value = fn(theta, r.total, n, r, s)
    text = str(jsonable(value))
    print(text)
    if cfg.out:
        emit_json(cfg, {"kind": kind, "quantity": args.quantity, "degree": n, "value": value})
    return 0


# --- verify ---------------------------------------------------------------

def _suite_orthogonality(args, cfg, rng) -> list:
    from .jacobi import kernel_inner_product, q_kernel
    alpha = parse_numbers(args.alpha or "1,1", "exact", "--alpha")
    top = args.N if args.N is not None else 4
    checks = []
    pts = _random_rational_points(len(alpha), 2 * args.points, rng)
    for i in range(args.points):
        x, z = pts[2 * i], pts[2 * i + 1]
        for n in range(top + 1):
            for m in range(top + 1):
                lhs = kernel_inner_product(alpha, n, m, x, z)
                rhs = q_kernel(alpha, n, x, z) if n == m else 0
                checks.append({"check": f"E[Q_{n}(x,Y)Q_{m}(z,Y)]", "x": x, "z": z,
                               "mode": "exact", "passed": lhs == rhs, "lhs": lhs, "rhs": rhs})
    return checks


def _suite_gasper(args, cfg, rng) -> list:
    from .hahn import HahnContext, h_kernel, h_kernel_chi
    alpha = parse_numbers(args.alpha or "1,1", "exact", "--alpha")
    N = args.N if args.N is not None else 4
    ctx = HahnContext(alpha, N)
    comps = compositions(len(alpha), N)
    checks = []
    for n in range(N + 1):
        bad = None
        for r in comps:
            for s in comps:
                if h_kernel(ctx, n, r, s) != h_kernel_chi(ctx, n, r, s):
                    bad = (r, s)
                    break
            if bad:
                break
        checks.append({"check": f"xi-form == chi-form for H_{n}", "mode": "exact",
                       "pairs": len(comps) ** 2, "passed": bad is None, "witness": bad})
    return checks


def _suite_zchain(args, cfg, rng) -> list:
    from .dist import sample_dirichlet
    from .intrep import verify_kernel_representation, verify_xi_moment
    alpha = parse_numbers(args.alpha or "2,2,1", "exact", "--alpha")
    top = args.N if args.N is not None else 4
    checks = []
    X = sample_dirichlet(alpha, rng, args.points)
    Y = sample_dirichlet(alpha, rng, args.points)
    for x, y in zip(X, Y):
        x, y = tuple(float(v) for v in x), tuple(float(v) for v in y)
        for n in range(1, top + 1):
            rep = verify_kernel_representation(alpha, x, y, n, args.draws, rng)
            checks.append({"check": rep.label, "x": x, "y": y, "mode": "mc", **rep.as_dict(),
                           "passed": rep.passed()})
        for m in range(1, min(top, 3) + 1):
            rep = verify_xi_moment(alpha, x, y, m, args.draws, rng)
            checks.append({"check": rep.label, "x": x, "y": y, "mode": "mc", **rep.as_dict(),
                           "passed": rep.passed()})
    return checks


def _suite_hahn_mixture(args, cfg, rng) -> list:
    from .hahn import HahnContext, xi_h, xi_h_posterior
    from .intrep import hahn_mixing_kernel
    alpha = parse_numbers(args.alpha or "2,2,1", "exact", "--alpha")
    N = args.N if args.N is not None else 3
    ctx = HahnContext(alpha, N)
    comps = compositions(len(alpha), N)
    checks = []
    for m in range(N + 1):
        ok = all(xi_h(ctx, m, r, s) == xi_h_posterior(ctx, m, r, s) for r in comps for s in comps)
        checks.append({"check": f"posterior mixture xi^H_{m}", "mode": "exact", "passed": ok})
    if args.draws > 0:
        idx = rng.gen.choice(len(comps), size=(args.points, 2))
        for i, j in idx:
            r, s = comps[i], comps[j]
            for n in range(1, N + 1):
                rep = hahn_mixing_kernel(alpha, r, s, n, args.draws, rng)
                checks.append({"check": rep.label, "r": r, "s": s, "mode": "mc", **rep.as_dict(),
                               "passed": rep.passed()})
    return checks


def _suite_pds_roundtrip(args, cfg, rng) -> list:
    from .jacobi import q_kernel, xi
    from .pds import DegreeSequence, dirac_pmf, jpds_to_hpds, jpds_to_pmf, pmf_to_jpds, scan_hpds, wright_fisher
    alpha = parse_numbers(args.alpha or "1,1", "exact", "--alpha")
    theta = sum(alpha)
    top = args.N if args.N is not None else 8
    checks = []
    pmfs = [dirac_pmf(l) for l in range(top + 1)]
    pmfs.append(DegreeSequence([Fraction(1, top + 1)] * (top + 1), "uniform"))
    x, y = _random_rational_points(len(alpha), 2, rng)
    for d in pmfs:
        rho = pmf_to_jpds(theta, d)
        back = jpds_to_pmf(theta, rho).pmf
        checks.append({"check": f"pmf -> rho -> pmf ({d.provenance or 'pmf'})", "mode": "exact",
                       "passed": back.values == d.values})
        lhs = sum(dm * xi(alpha, m, x, y) for m, dm in enumerate(d.values))
        rhs = sum(rho[n] * q_kernel(alpha, n, x, y) for n in range(len(rho)))
        checks.append({"check": f"sum d_m xi_m == sum rho_n Q_n ({d.provenance or 'pmf'})",
                       "mode": "exact", "passed": lhs == rhs})
    N = min(top, 4)
    rep = scan_hpds(alpha, N, jpds_to_hpds(alpha, N, wright_fisher(theta, 1.0, N)))
    checks.append({"check": f"Wright-Fisher Hahn image certified at N={N}", "mode": "exact",
                   "passed": rep.verdict == "certified-positive", "report": rep})
    return checks


SUITES = {
    "orthogonality": _suite_orthogonality,
    "gasper": _suite_gasper,
    "zchain": _suite_zchain,
    "hahn-mixture": _suite_hahn_mixture,
    "pds-roundtrip": _suite_pds_roundtrip,
}


def cmd_verify(args, cfg: JobConfig) -> int:
    from .dist import RngStream
    rng = RngStream(cfg.seed)
    checks = SUITES[args.suite](args, cfg, rng)
    failed = sum(1 for c in checks if not c["passed"])
    emit_json(cfg, {"suite": args.suite, "checks": checks, "failed": failed,
                    "status": "pass" if failed == 0 else "fail"})
    return 1 if failed else 0


# --- sample ---------------------------------------------------------------

def _pmf_from_args(args) -> "object":
    from .pds import DegreeSequence, dirac_pmf
    if args.pmf is not None:
        return DegreeSequence(list(parse_numbers(args.pmf, "exact", "--pmf")), "pmf")
    return dirac_pmf(_require(args.m, "--m or --pmf"))


def cmd_sample(args, cfg: JobConfig) -> int:
    from .copula import CopulaSpec, sample_pair_pd, sample_pairs, write_pairs_csv
    from .dist import RngStream, sample_dirichlet, sample_dm, sample_pd_batch
    from .intrep import sample_z_chain

    rng = RngStream(cfg.seed)
    count = args.count
    buf = io.StringIO()
    meta = {"seed": cfg.seed}
    target = args.target
    if target in ("dirichlet", "dm"):
        alpha = _require(parse_numbers(args.alpha, "exact", "--alpha"), "--alpha")
        if target == "dirichlet":
            rows = sample_dirichlet(alpha, rng, count)
        else:
            rows = sample_dm(alpha, _require(args.N, "--N"), rng, count)
        header = [f"{'x' if target == 'dirichlet' else 'r'}{i + 1}" for i in range(len(alpha))]
        _write_rows(buf, header, rows, meta)
    elif target == "pd":
        theta = float(_require(parse_numbers(args.theta, "exact", "--theta"), "--theta")[0])
        w, tails = sample_pd_batch(theta, count, rng, args.truncation)
        k = w.shape[1]
        _write_rows(buf, [f"w{i + 1}" for i in range(k)] + ["tail"],
                    np.concatenate([w, tails[:, None]], axis=1), meta)
    elif target == "copula":
        pmf = _pmf_from_args(args)
        if args.theta is not None:
            theta = float(parse_numbers(args.theta, "exact", "--theta")[0])
            pairs = sample_pair_pd(theta, pmf, rng, count, args.truncation)
            X = np.concatenate([pairs.x, pairs.x_tail[:, None]], axis=1)
            Y = np.concatenate([pairs.y, pairs.y_tail[:, None]], axis=1)
        else:
            alpha = _require(parse_numbers(args.alpha, "exact", "--alpha"), "--alpha")
            X, Y = sample_pairs(CopulaSpec(pmf, alpha), rng, count)
        write_pairs_csv(buf, X, Y, meta)
    else:  # zchain
        alpha = _require(parse_numbers(args.alpha, "exact", "--alpha"), "--alpha")
        x = _require(parse_numbers(args.x, "float", "--x"), "--x")
        y = _require(parse_numbers(args.y, "float", "--y"), "--y")
        z = sample_z_chain(alpha, x, y, rng, count)
        _write_rows(buf, ["z"], z[:, None], meta)
    emit(cfg, buf.getvalue())
    return 0


def _write_rows(buf, header: List[str], rows, meta: dict) -> None:
    import csv
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(header) + list(meta))
    tail = [str(v) for v in meta.values()]
    for row in np.atleast_2d(rows):
        w.writerow([repr(v.item()) for v in row] + tail)


# --- pds ------------------------------------------------------------------

def _sequence_from_args(args, theta, cfg: JobConfig):
    from .pds import DegreeSequence, dirac_pmf, poisson_kernel, pmf_to_jpds, wright_fisher
    T = cfg.truncation if cfg.truncation is not None else 20
    given = [v is not None for v in (args.seq, args.wf, args.poisson, args.dirac, args.pmf)]
    if sum(given) != 1:
        raise ConfigError("give exactly one of --seq, --wf, --poisson, --dirac, --pmf")
    if args.seq is not None:
        return DegreeSequence(list(parse_numbers(args.seq, cfg.flavor, "--seq")), "given")
    if args.wf is not None:
        return wright_fisher(theta, float(as_exact(args.wf)), T)
    if args.poisson is not None:
        return poisson_kernel(as_exact(args.poisson), T)
    pmf = dirac_pmf(args.dirac) if args.dirac is not None else \
        DegreeSequence(list(parse_numbers(args.pmf, cfg.flavor, "--pmf")), "pmf")
    return pmf if args.transform == "pmf2rho" else pmf_to_jpds(theta, pmf)


def cmd_pds(args, cfg: JobConfig) -> int:
    from . import pds
    alpha = parse_numbers(args.alpha or "1,1", "exact", "--alpha")
    theta = sum(alpha)
    seq = _sequence_from_args(args, theta, cfg)
    body = {"transform": args.transform, "alpha": alpha, "input": seq}
    t = args.transform
    if t == "pmf2rho":
        body["output"] = pds.pmf_to_jpds(theta, seq, cfg.truncation)
    elif t == "rho2pmf":
        res = pds.jpds_to_pmf(theta, seq)
        body.update(output=res.pmf, derivative_route=res.derivative_route, is_pmf=res.is_pmf,
                    report=res.report)
    elif t == "j2h":
        body["output"] = pds.jpds_to_hpds(alpha, _require(args.N, "--N"), seq)
    elif t == "bernstein":
        body["output"] = pds.bernstein_approx(alpha, seq, _require(args.N, "--N"))
    else:  # scan
        if args.N is not None:
            body["report"] = pds.scan_hpds(alpha, args.N, seq)
            body["kind"] = "hpds"
        else:
            body["report"] = pds.scan_jpds(alpha, seq, cfg.grid, cfg.truncation)
            body["kind"] = "jpds"
    emit_json(cfg, body)
    return 0


# --- argument parser ------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--flavor", choices=("exact", "float"), default="exact")
    common.add_argument("--truncation", type=int, default=None)
    common.add_argument("--grid", type=int, default=20, help="grid resolution 1/grid")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--alpha", default=None, help="comma list, rationals allowed")

    p = argparse.ArgumentParser(prog="simplex-kernels",
                                description="Orthogonal polynomial kernels on the simplex.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("eval", parents=[common], help="evaluate a kernel")
    e.add_argument("kind", choices=("jacobi", "hahn", "ranked", "pd", "esf"))
    e.add_argument("--n", type=int, required=True, help="degree")
    e.add_argument("--quantity", choices=("kernel", "xi", "chi"), default="kernel")
    e.add_argument("--x")
    e.add_argument("--y")
    e.add_argument("--r")
    e.add_argument("--s")
    e.add_argument("--theta")
    e.add_argument("--d", type=int)

    v = sub.add_parser("verify", parents=[common], help="run a verification suite")
    v.add_argument("suite", choices=tuple(SUITES))
    v.add_argument("--N", type=int, default=None, help="sample size or maximal degree")
    v.add_argument("--points", type=int, default=3)
    v.add_argument("--draws", type=int, default=100_000)

    s = sub.add_parser("sample", parents=[common], help="stream samples as CSV")
    s.add_argument("target", choices=("dirichlet", "dm", "pd", "copula", "zchain"))
    s.add_argument("--count", type=int, default=1000)
    s.add_argument("--N", type=int)
    s.add_argument("--m", type=int)
    s.add_argument("--pmf")
    s.add_argument("--theta")
    s.add_argument("--x")
    s.add_argument("--y")

    q = sub.add_parser("pds", parents=[common], help="transform or scan a sequence")
    q.add_argument("transform", choices=("pmf2rho", "rho2pmf", "j2h", "bernstein", "scan"))
    q.add_argument("--N", type=int)
    q.add_argument("--seq")
    q.add_argument("--wf", help="Wright-Fisher time t")
    q.add_argument("--poisson", help="Poisson-kernel parameter z")
    q.add_argument("--dirac", type=int)
    q.add_argument("--pmf")
    return p


COMMANDS = {"eval": cmd_eval, "verify": cmd_verify, "sample": cmd_sample, "pds": cmd_pds}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = JobConfig(args.command, args.seed, args.flavor, args.truncation, args.grid,
                        args.out, thread_cap())
        if args.grid < 1 or (args.truncation is not None and args.truncation < 0):
            raise ConfigError("--grid must be positive and --truncation nonnegative")
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"simplex-kernels: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"simplex-kernels: domain error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
