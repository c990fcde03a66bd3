"""Command-line surface.

Exit codes: 0 success, 1 input/validation error, 2 recovery-hypothesis
violation, 3 unhedgeable basis. All numeric CSV output carries 17 significant
digits; stochastic commands require an explicit seed; every file output is
accompanied by a JSON run manifest.
"""
from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import sys
from importlib.metadata import PackageNotFoundError, version

import numpy as np

from . import pricing, recovery, replication, two_state
from .errors import CtmcRatesError
from .model import RNG_ALGORITHM, simulate_path, simulate_terminal
from .modelfile import load_model
from .pricing import ClaimPayoff

try:
    TOOL_VERSION = version("ctmc-rates")
except PackageNotFoundError:  # running from a source tree
    TOOL_VERSION = "0.1.0+src"


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


class _Parser(argparse.ArgumentParser):
    # argparse defaults to exit code 2 on usage errors; 2 is reserved for
    # recovery-hypothesis violations, so remap usage errors to 1
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _model_hash(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _write_output(args, header: list[str], rows, params: dict, seed=None) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if isinstance(v, (int, float, np.floating)) else str(v) for v in row))
    text = "\n".join(lines) + "\n"
    out = getattr(args, "output", None)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
        manifest = {
            "model": getattr(args, "model", None),
            "model_sha256": _model_hash(args.model) if getattr(args, "model", None) else None,
            "command": args.command,
            "parameters": params,
            "seed": seed,
            "rng": RNG_ALGORITHM if seed is not None else None,
            "tool_version": TOOL_VERSION,
            "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "output": out,
            "output_sha256": hashlib.sha256(text.encode()).hexdigest(),
        }
        with open(out + ".manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2)
            fh.write("\n")
    else:
        sys.stdout.write(text)


def _parse_grid(spec: str) -> np.ndarray:
    try:
        start, stop, step = (float(p) for p in spec.split(":"))
    except ValueError:
        raise CtmcRatesError(f"grid must be start:stop:step, got {spec!r}")
    if step <= 0 or stop < start:
        raise CtmcRatesError(f"empty or invalid grid {spec!r}")
    grid = np.arange(start, stop + 0.5 * step, step)
    grid = grid[grid <= stop + 1e-12]
    if grid.size == 0:
        raise CtmcRatesError(f"grid {spec!r} contains no points")
    return grid


def _parse_payoff(spec: str, n: int, T: float) -> ClaimPayoff:
    values = np.array([float(p) for p in spec.split(",")])
    if values.shape[0] != n:
        raise CtmcRatesError(f"payoff has {values.shape[0]} entries for {n} states")
    return ClaimPayoff(values, T)


def _state_names(spec) -> list[str]:
    return [spec.states.label(i) for i in range(spec.states.n)]


def cmd_price(args) -> int:
    spec = load_model(args.model)
    G, r = spec.generator, spec.rates
    t, T = args.t, args.T
    if args.caplet is not None or args.floorlet is not None:
        if args.Tb is None:
            raise CtmcRatesError("caplet/floorlet pricing requires --Tb")
        if args.caplet is not None:
            pv = pricing.caplet(G, r, t, T, args.Tb, args.caplet)
            kind = "caplet"
        else:
            pv = pricing.floorlet(G, r, t, T, args.Tb, args.floorlet)
            kind = "floorlet"
    elif args.payoff is not None:
        pv = pricing.price_claim(G, r, _parse_payoff(args.payoff, G.n, T), t)
        kind = "claim"
    else:
        pv = pricing.bond_prices(G, r, t, T)
        kind = "bond"
    rows = [(name, v) for name, v in zip(_state_names(spec), pv.values)]
    _write_output(args, ["state", f"{kind}_price"], rows,
                  {"t": t, "T": T, "Tb": args.Tb})
    return 0


def cmd_yield_curve(args) -> int:
    spec = load_model(args.model)
    G, r = spec.generator, spec.rates
    grid = _parse_grid(args.T_grid)
    grid = grid[grid > args.t]
    if grid.size == 0:
        raise CtmcRatesError("yield grid has no maturities after t")
    names = _state_names(spec)
    header = ["T"] + [f"yield_{nm}" for nm in names]
    asym = None
    if G.n == 2:
        rho, _ = recovery.dominant_eigenpair(G, r)
        asym = -rho
        header.append("asymptote")
    rows = []
    for T in grid:
        row = [float(T)] + [pricing.zero_yield(G, r, args.t, float(T), i) for i in range(G.n)]
        if asym is not None:
            row.append(asym)
        rows.append(row)
    _write_output(args, header, rows, {"t": args.t, "T_grid": args.T_grid})
    return 0


def cmd_hedge(args) -> int:
    spec = load_model(args.model)
    G, r = spec.generator, spec.rates
    basis = replication.BondBasis(tuple(float(x) for x in args.basis.split(",")))
    payoff = _parse_payoff(args.payoff, G.n, args.T)
    plan = replication.hedge_for_payoff(G, r, args.T, basis, payoff)
    grid = _parse_grid(args.t_grid)
    grid = grid[grid <= args.T]
    header = (
        ["time", "state"]
        + [f"position_T{_fmt(Tm)}" for Tm in basis.maturities]
        + ["money_market_residual"]
    )
    rows = []
    for t in grid:
        for i in range(G.n):
            D = plan.positions(float(t), i)
            rows.append(
                [float(t), spec.states.label(i)]
                + [float(d) for d in D]
                + [plan.money_market_residual(float(t), i)]
            )
    _write_output(args, header, rows,
                  {"T": args.T, "basis": args.basis, "payoff": args.payoff,
                   "t_grid": args.t_grid})
    return 0


def cmd_recover(args) -> int:
    spec = load_model(args.model)
    G, r = spec.generator, spec.rates
    pair = recovery.perron_pair(G, r)
    rec = recovery.recover_generator(pair, G)
    report = {
        "rho": pair.rho,
        "pi": [float(x) for x in pair.pi],
        "generator_p": [[float(x) for x in row] for row in rec.generator_p.entries],
        "states": _state_names(spec),
        "validation": "ok",
    }
    sys.stdout.write(json.dumps(report, indent=2) + "\n")
    return 0


def cmd_simulate(args) -> int:
    spec = load_model(args.model)
    G, r = spec.generator, spec.rates
    if args.N < 1:
        raise CtmcRatesError(f"need at least one path, got N={args.N}")
    if args.measure == "p":
        pair = recovery.perron_pair(G, r)
        G_sim = recovery.recover_generator(pair, G).generator_p
    else:
        G_sim = G
    states, integ = simulate_terminal(
        G_sim, r, args.initial, args.horizon, args.N, args.seed
    )
    counts = np.bincount(states, minlength=G.n)
    disc = np.exp(-integ)
    rows = [
        ["n_paths", "", args.N],
        ["measure", "", args.measure],
    ]
    for i in range(G.n):
        rows.append(["occupancy_at_horizon", spec.states.label(i), counts[i] / args.N])
    rows.append(["mean_integrated_rate", "", float(integ.mean())])
    rows.append(["se_integrated_rate", "", float(integ.std(ddof=1) / np.sqrt(args.N))])
    rows.append(["mean_discount_factor", "", float(disc.mean())])
    rows.append(["se_discount_factor", "", float(disc.std(ddof=1) / np.sqrt(args.N))])
    _write_output(
        args, ["statistic", "state", "value"], rows,
        {"measure": args.measure, "N": args.N, "horizon": args.horizon,
         "initial": args.initial},
        seed=args.seed,
    )
    return 0


def cmd_replicate(args) -> int:
    spec = load_model(args.model)
    G, r = spec.generator, spec.rates
    if args.N < 1:
        raise CtmcRatesError(f"need at least one path, got N={args.N}")
    basis = replication.BondBasis(tuple(float(x) for x in args.basis.split(",")))
    payoff = _parse_payoff(args.payoff, G.n, args.T)
    horizon = max(args.T, max(basis.maturities))
    rng = np.random.default_rng(args.seed)
    rows = []
    for p in range(args.N):
        path = simulate_path(G, args.initial, horizon, rng, r=r)
        rep = replication.replicate_on_path(G, r, path, args.T, basis, payoff, args.dt)
        rows.append([p, rep.n_jumps, rep.terminal_error, rep.max_tracking_error])
    _write_output(
        args,
        ["path", "n_jumps", "terminal_error", "max_tracking_error"],
        rows,
        {"T": args.T, "basis": args.basis, "payoff": args.payoff, "dt": args.dt,
         "N": args.N, "initial": args.initial},
        seed=args.seed,
    )
    return 0


def cmd_demo(args) -> int:
    m = two_state.TwoStateModel(lam=args.lam, rate=args.rate)
    grid = _parse_grid(args.T_grid)
    grid = grid[grid > 0]
    rows = list(two_state.yield_curve_rows(m, 0.0, grid))
    _write_output(
        args, ["T", "yield_state0", "yield_state1", "asymptote"], rows,
        {"lam": args.lam, "rate": args.rate, "T_grid": args.T_grid},
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ctmc-rates", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, **kw):
        sp = sub.add_parser(name, **kw)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("price", cmd_price, help="price a claim per state")
    sp.add_argument("model")
    sp.add_argument("--t", type=float, default=0.0)
    sp.add_argument("--T", type=float, required=True)
    sp.add_argument("--Tb", type=float, default=None)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--bond", action="store_true")
    g.add_argument("--payoff", type=str, default=None)
    g.add_argument("--caplet", type=float, default=None, metavar="K")
    g.add_argument("--floorlet", type=float, default=None, metavar="K")
    sp.add_argument("--output", default=None)

    sp = add("yield-curve", cmd_yield_curve, help="yield curve CSV over a maturity grid")
    sp.add_argument("model")
    sp.add_argument("--t", type=float, default=0.0)
    sp.add_argument("--T-grid", dest="T_grid", required=True, metavar="START:STOP:STEP")
    sp.add_argument("--output", default=None)

    sp = add("hedge", cmd_hedge, help="hedge schedule CSV")
    sp.add_argument("model")
    sp.add_argument("--T", type=float, required=True)
    sp.add_argument("--basis", required=True, metavar="T1,T2,...")
    sp.add_argument("--payoff", required=True, metavar="v0,v1,...")
    sp.add_argument("--t-grid", dest="t_grid", required=True, metavar="START:STOP:STEP")
    sp.add_argument("--output", default=None)

    sp = add("recover", cmd_recover, help="real-world generator report")
    sp.add_argument("model")

    sp = add("simulate", cmd_simulate, help="path statistics under Q or the recovered P")
    sp.add_argument("model")
    sp.add_argument("--measure", choices=["q", "p"], default="q")
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--horizon", type=float, required=True)
    sp.add_argument("--initial", type=int, default=0)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--output", default=None)

    sp = add("replicate", cmd_replicate, help="pathwise replication error CSV")
    sp.add_argument("model")
    sp.add_argument("--T", type=float, required=True)
    sp.add_argument("--basis", required=True)
    sp.add_argument("--payoff", required=True)
    sp.add_argument("--dt", type=float, required=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--initial", type=int, default=0)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--output", default=None)

    sp = add("demo", cmd_demo, help="two-state yield-curve dataset (closed form)")
    sp.add_argument("--lam", type=float, default=0.5)
    sp.add_argument("--rate", type=float, default=0.1)
    sp.add_argument("--T-grid", dest="T_grid", default="0.1:50:0.1")
    sp.add_argument("--output", default=None)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CtmcRatesError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
