"""Command-line entry point: ``resodecay <subcommand> [flags]``.

Exit codes: 0 success, 1 usage or configuration error, 2 fit
non-convergence, 3 invalid or corrupt input data, 4 numerical failure.
"""
import argparse
import copy
import json
import os
import sys

import numpy as np

from . import battery, decay, fit, gamow, hardy, io, simulate, smatrix
from .errors import (
    BadEdges,
    BadParams,
    BadWeights,
    BadWindow,
    DegenerateData,
    FitError,
    InvalidInput,
    ResodecayError,
)

EXIT_OK, EXIT_USAGE, EXIT_FIT, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3, 4

SUBCOMMANDS = ("synth-xsec", "fit-xsec", "synth-decay", "fit-decay", "ratio",
               "gamow-verify", "survival", "hardy-check", "laurent")

DEFAULTS = {
    "E_R": 2.0,
    "Gamma": 0.2,
    "residues": {"a": [1.0, 0.0]},
    "background": [],
    "norm": 1.0,
    "window": [1.0, 3.0],
    "branching": [1.0, 3.0],
    "rates": None,
    "events_xsec": 100000,
    "events_decay": 100000,
    "xsec_bins": "1:3:100",
    "decay_bins": None,
    "seed": 42,
    "hbar": 1.0,
    "weighting": "poisson",
    "bg_order": None,
    "decay_mode": "joint",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_bins(text):
    """``"lo:hi:n"`` gives ``n`` equal bins; ``"e0,e1,..."`` lists the edges."""
    try:
        if ":" in text:
            lo, hi, n = text.split(":")
            n = int(n)
            if n < 1:
                raise ValueError
            edges = np.linspace(float(lo), float(hi), n + 1)
        else:
            edges = np.array([float(x) for x in text.split(",")])
    except ValueError:
        raise UsageError(f"bad bin spec {text!r}; use lo:hi:n or a comma list") from None
    try:
        return simulate.check_edges(edges)
    except BadEdges as exc:
        raise UsageError(f"bad bin spec {text!r}: {exc}") from None


def _common(p):
    p.add_argument("--config", help="JSON experiment configuration; flags override it")
    p.add_argument("--seed", type=int, help="64-bit generator seed")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--er", type=float, help="resonance energy E_R")
    p.add_argument("--gamma", type=float, help="resonance width Gamma")
    p.add_argument("--events", type=int, help="number of events per dataset")
    p.add_argument("--bins", help="bin edges as lo:hi:n or e0,e1,...")
    p.add_argument("--hbar", type=float, help="value of hbar in the chosen units")


def build_parser():
    parser = _Parser(prog="resodecay", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("synth-xsec", help="generate scattering events")
    _common(p)
    p.add_argument("--window", help="generation window lo:hi")

    p = sub.add_parser("fit-xsec", help="fit a lineshape to an event or binned CSV")
    _common(p)
    p.add_argument("--input", required=True, help="event or binned CSV")
    p.add_argument("--bg-order", type=int, help="degree of the complex background polynomial")
    p.add_argument("--weighting", choices=fit.WEIGHTINGS)

    p = sub.add_parser("synth-decay", help="generate decay events")
    _common(p)
    p.add_argument("--rates", help="comma-separated partial rates R_eta(0)")

    p = sub.add_parser("fit-decay", help="fit the exponential law to an event or binned CSV")
    _common(p)
    p.add_argument("--input", required=True, help="event or binned CSV")
    p.add_argument("--mode", choices=("joint", "per-channel", "total"))
    p.add_argument("--weighting", choices=fit.WEIGHTINGS)

    p = sub.add_parser("ratio", help="generate, fit both datasets and report tau Gamma / hbar")
    _common(p)
    p.add_argument("--xsec-bins", help="energy bins (overrides --bins)")
    p.add_argument("--decay-bins", help="time bins")
    p.add_argument("--weighting", choices=fit.WEIGHTINGS)

    p = sub.add_parser("gamow-verify", help="Gamow-ket pairing, eigenvalue and semigroup checks")
    _common(p)

    p = sub.add_parser("survival", help="survival curve of a truncated Lorentzian")
    _common(p)
    p.add_argument("--lower", type=float, default=0.0, help="spectrum threshold")
    p.add_argument("--t-max", type=float, default=5.0, help="last time in lifetimes")
    p.add_argument("--points", type=int, default=101, help="number of curve points")

    p = sub.add_parser("hardy-check", help="Hardy-class membership of a rational function")
    _common(p)
    p.add_argument("--input", required=True, help="rational-function JSON")
    p.add_argument("--class", dest="hardy_class", choices=(hardy.H2_MINUS, hardy.H2_PLUS))
    p.add_argument("--tol", type=float, default=1e-8)

    p = sub.add_parser("laurent", help="Laurent coefficients of the canonical S-matrix")
    _common(p)
    return parser


# configuration --------------------------------------------------------------


def resolve_config(args):
    """Defaults, then the config file, then flags."""
    cfg = copy.deepcopy(DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"{args.config}: cannot read config: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError(f"{args.config}: config must be a JSON object")
        unknown = set(doc) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"{args.config}: unknown keys {sorted(unknown)}")
        cfg.update(doc)
    overrides = {
        "seed": args.seed, "E_R": args.er, "Gamma": args.gamma, "hbar": args.hbar,
        "weighting": getattr(args, "weighting", None),
        "bg_order": getattr(args, "bg_order", None),
        "decay_mode": getattr(args, "mode", None),
    }
    for k, v in overrides.items():
        if v is not None:
            cfg[k] = v
    if args.events is not None:
        cfg["events_xsec"] = cfg["events_decay"] = args.events
    cmd = args.command
    if getattr(args, "window", None):
        try:
            cfg["window"] = [float(x) for x in args.window.split(":")]
        except ValueError:
            raise UsageError(f"bad window {args.window!r}; use lo:hi") from None
    if getattr(args, "rates", None):
        try:
            cfg["rates"] = [float(x) for x in args.rates.split(",")]
        except ValueError:
            raise UsageError(f"bad rates {args.rates!r}") from None
    if args.bins:
        key = "decay_bins" if cmd in ("synth-decay", "fit-decay") else "xsec_bins"
        cfg[key] = args.bins
    if getattr(args, "xsec_bins", None):
        cfg["xsec_bins"] = args.xsec_bins
    if getattr(args, "decay_bins", None):
        cfg["decay_bins"] = args.decay_bins
    cfg["out"] = args.out
    return validate_config(cfg)


def validate_config(cfg):
    try:
        params, bg, norm = smatrix.model_from_dict(cfg)
        cross_ok = norm > 0
    except (KeyError, TypeError, ValueError, BadParams) as exc:
        raise UsageError(f"invalid model: {exc}") from None
    if not cross_ok:
        raise UsageError("norm must be positive")
    if not (isinstance(cfg["seed"], int) and 0 <= cfg["seed"] < 2 ** 64):
        raise UsageError("seed must be an unsigned 64-bit integer")
    if not (isinstance(cfg["hbar"], (int, float)) and cfg["hbar"] > 0):
        raise UsageError("hbar must be positive")
    for key in ("events_xsec", "events_decay"):
        if not (isinstance(cfg[key], int) and cfg[key] >= 1):
            raise UsageError(f"{key} must be a positive integer")
    try:
        simulate._check_window(cfg["window"])
    except (BadWindow, TypeError, ValueError) as exc:
        raise UsageError(f"invalid window: {exc}") from None
    rates = channel_rates(cfg)
    if cfg["decay_bins"] is None:
        tau = 1.0 / rates.total
        cfg["decay_bins"] = f"0:{fmt_num(10 * tau)}:100"
    parse_bins(cfg["xsec_bins"])
    parse_bins(cfg["decay_bins"])
    if cfg["weighting"] not in fit.WEIGHTINGS:
        raise UsageError(f"weighting must be one of {fit.WEIGHTINGS}")
    if cfg["decay_mode"] not in ("joint", "per-channel", "total"):
        raise UsageError("decay_mode must be joint, per-channel or total")
    return cfg


def fmt_num(x):
    return repr(float(x))


def channel_rates(cfg):
    """Explicit ``rates``, else ``Gamma/hbar`` split by ``branching``."""
    try:
        if cfg.get("rates"):
            return decay.ChannelRates(tuple(cfg["rates"]))
        br = np.asarray(cfg["branching"], dtype=float)
        if br.ndim != 1 or br.size == 0 or np.any(br < 0) or not br.sum() > 0:
            raise BadWeights("branching weights must be nonnegative with a positive sum")
        total = cfg["Gamma"] / cfg["hbar"]
        return decay.ChannelRates(tuple(float(x) for x in total * br / br.sum()))
    except (BadWeights, TypeError, ValueError) as exc:
        raise UsageError(f"invalid channel rates: {exc}") from None


def _outdir(cfg):
    os.makedirs(cfg["out"], exist_ok=True)
    io.write_json(os.path.join(cfg["out"], "config.json"), cfg)
    return cfg["out"]


# subcommands ----------------------------------------------------------------


def _synth_xsec(cfg, out):
    params, bg, norm = smatrix.model_from_dict(cfg)
    ev = simulate.sample_lineshape(cfg["events_xsec"], params, bg, norm, tuple(cfg["window"]), cfg["seed"])
    digest = io.write_events_csv(os.path.join(out, "xsec_events.csv"), ev)
    binned = simulate.bin_counts(ev, parse_bins(cfg["xsec_bins"]))
    io.write_binned_csv(os.path.join(out, "xsec_binned.csv"), binned, cfg["seed"], digest)
    return ev, binned


def _synth_decay(cfg, out):
    ev = simulate.sample_decays(cfg["events_decay"], channel_rates(cfg), cfg["seed"])
    digest = io.write_events_csv(os.path.join(out, "decay_events.csv"), ev)
    binned = simulate.bin_counts(ev, parse_bins(cfg["decay_bins"]))
    io.write_binned_csv(os.path.join(out, "decay_binned.csv"), binned, cfg["seed"], digest)
    return ev, binned


def _load_binned(path, edges, kind):
    data = io.read_csv(path)
    events = None
    if isinstance(data, (simulate.ScatteringEvents, simulate.DecayEvents)):
        events = data
        if len(data) == 0:
            raise InvalidInput(f"{path}: no events")
        data = simulate.bin_counts(data, edges)
    if data.kind != kind:
        raise InvalidInput(f"{path}: expected {kind} data, found {data.kind}")
    return data, events


def _fit_with_input(path, fn):
    try:
        return fn()
    except DegenerateData as exc:
        raise InvalidInput(f"{path}: {exc}") from None


def cmd_synth_xsec(cfg, args, out):
    _synth_xsec(cfg, out)


def cmd_synth_decay(cfg, args, out):
    _synth_decay(cfg, out)


def cmd_fit_xsec(cfg, args, out):
    data, _ = _load_binned(args.input, parse_bins(cfg["xsec_bins"]), "energy")
    lf = _fit_with_input(args.input, lambda: fit.fit_lineshape(
        data, cfg["bg_order"], weighting=cfg["weighting"]))
    io.write_json(os.path.join(out, "fit_xsec.json"), lf.to_dict())


def cmd_fit_decay(cfg, args, out):
    data, events = _load_binned(args.input, parse_bins(cfg["decay_bins"]), "time")
    df = _fit_with_input(args.input, lambda: fit.fit_decay(
        data, cfg["decay_mode"], weighting=cfg["weighting"], events=events))
    io.write_json(os.path.join(out, "fit_decay.json"), df.to_dict())


def cmd_ratio(cfg, args, out):
    _, xb = _synth_xsec(cfg, out)
    dev, db = _synth_decay(cfg, out)
    lf = fit.fit_lineshape(xb, cfg["bg_order"], weighting=cfg["weighting"])
    df = fit.fit_decay(db, cfg["decay_mode"], weighting=cfg["weighting"], events=dev)
    io.write_json(os.path.join(out, "fit_xsec.json"), lf.to_dict())
    io.write_json(os.path.join(out, "fit_decay.json"), df.to_dict())
    report = fit.width_lifetime_ratio(lf, df, cfg["hbar"])
    io.write_json(os.path.join(out, "ratio.json"), report.to_dict())
    print(f"tau*Gamma/hbar = {report.product:.6f} +- {report.se:.6f}  pull = {report.pull:.3f}")


def cmd_gamow_verify(cfg, args, out):
    funcs = battery.standard_wave_functions()
    poles = dict(battery.standard_poles())
    poles["config"] = complex(cfg["E_R"], -0.5 * cfg["Gamma"])
    rows = []
    for gname, g in funcs.items():
        for pname, z in poles.items():
            ket = gamow.GamowKet(z)
            pair = gamow.gamow_pairing(g, ket)
            ev = gamow.eigenvalue_residual(g, ket) if g.decay_order >= 2 else None
            tau_g = 1.0 / ket.gamma
            t1, t2 = 0.7 * tau_g, 1.3 * tau_g
            v1 = gamow.evolved_pairing(g, ket, t1)
            v12 = gamow.evolved_pairing(g, ket, t1 + t2)
            comp = abs(gamow.compose(ket, v1, t2) - v12) / abs(v12)
            ts = np.linspace(0.0, 10.0 * tau_g, 11)
            vals = [gamow.evolved_pairing(g, ket, t) for t in ts]
            tau = gamow.lifetime_from_pairings(ts, vals)
            radii = [r * ket.gamma for r in (10, 25, 50, 100)]
            probe = gamow.catastrophe_probe(g, ket, -tau_g, radii)
            rows.append({
                "function": gname,
                "pole": pname,
                "z_R": [z.real, z.imag],
                "pairing_residue": [pair.residue.real, pair.residue.imag],
                "pairing_quadrature": [pair.quadrature.real, pair.quadrature.imag],
                "pairing_relative_discrepancy": pair.relative_discrepancy,
                "eigenvalue_residual": ev,
                "composition_error": comp,
                "tau_gamma": tau * ket.gamma,
                "catastrophe": {"t": -tau_g, "radii": radii, "magnitude": probe},
            })
    # evolution records of the first function at the configured pole
    g = next(iter(funcs.values()))
    ket = gamow.GamowKet(poles["config"])
    records = []
    for t in np.linspace(0.0, 10.0 / ket.gamma, 21):
        for route in ("closed", "quadrature"):
            v = gamow.evolved_pairing(g, ket, t, route)
            records.append({"t": float(t), "re": v.real, "im": v.imag, "magnitude": abs(v), "route": route})
    io.write_json(os.path.join(out, "gamow_verify.json"), {"checks": rows, "evolution": records})


def cmd_survival(cfg, args, out):
    rho = decay.normalize_density(decay.TRUNCATED, cfg["E_R"], cfg["Gamma"], args.lower)
    tau = 1.0 / rho.gamma
    if args.points < 2 or not args.t_max > 0:
        raise UsageError("need --points >= 2 and --t-max > 0")
    ts = np.linspace(0.0, args.t_max * tau, args.points)
    curve = decay.survival_curve(rho, ts)
    io.write_curve_csv(os.path.join(out, "survival.csv"), curve, cfg["seed"],
                       io.json_digest({"E_R": cfg["E_R"], "Gamma": cfg["Gamma"], "lower": args.lower}))
    slope, late = decay.late_time_slope(rho, 30 * tau, 100 * tau)
    life = decay.mean_lifetime(rho)
    summary = {
        "E_R": cfg["E_R"], "Gamma": cfg["Gamma"], "lower": args.lower,
        "sup_deviation": float(np.max(np.abs(curve.deviation))),
        "loglog_slope_30_100_tau": slope,
        "loglog_slope_points": int(late.size),
        "mean_lifetime": life.tau,
        "tau_gamma_minus_one": life.deviation,
    }
    io.write_json(os.path.join(out, "survival_summary.json"), summary)


def cmd_hardy_check(cfg, args, out):
    try:
        with open(args.input, encoding="utf-8") as fh:
            f = hardy.RationalHardyFunction.from_dict(json.load(fh))
    except OSError as exc:
        raise InvalidInput(f"{args.input}: {exc.strerror}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise InvalidInput(f"{args.input}: malformed rational function: {exc}") from None
    rep = hardy.hardy_membership_check(f, args.hardy_class, args.tol)
    io.write_json(os.path.join(out, "hardy_check.json"), rep.to_dict())
    print(f"{rep.claimed_class}: {rep.verdict} (residual {rep.residual:.3g}, leakage {rep.leakage:.3g})")


def cmd_laurent(cfg, args, out):
    S = smatrix.SMatrix.unitary(cfg["E_R"], cfg["Gamma"])
    lc = smatrix.laurent_coefficients(S, S.pole)
    exact = {-1: -1j * cfg["Gamma"], 0: 1.0 + 0j, 1: 0j}
    doc = {"E_R": cfg["E_R"], "Gamma": cfg["Gamma"], "radius": lc.radius, "nodes": lc.nodes,
           "coefficients": {}}
    for k in (-1, 0, 1):
        v = lc[k]
        doc["coefficients"][str(k)] = {
            "numerical": [v.real, v.imag],
            "closed_form": [exact[k].real, exact[k].imag],
            "abs_error": abs(v - exact[k]),
        }
    io.write_json(os.path.join(out, "laurent.json"), doc)


COMMANDS = {
    "synth-xsec": cmd_synth_xsec,
    "fit-xsec": cmd_fit_xsec,
    "synth-decay": cmd_synth_decay,
    "fit-decay": cmd_fit_decay,
    "ratio": cmd_ratio,
    "gamow-verify": cmd_gamow_verify,
    "survival": cmd_survival,
    "hardy-check": cmd_hardy_check,
    "laurent": cmd_laurent,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = _outdir(cfg)
        COMMANDS[args.command](cfg, args, out)
    except UsageError as exc:
        print(f"resodecay: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InvalidInput, DegenerateData) as exc:
        print(f"resodecay: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FitError as exc:
        print(f"resodecay: fit failed: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (BadParams, BadWindow, BadWeights, BadEdges) as exc:
        print(f"resodecay: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ResodecayError as exc:
        # quadrature non-convergence, tail bounds, envelope failures, ...
        print(f"resodecay: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
