"""Command-line interface.

Subcommands: ``mi-approx``, ``mi-mc``, ``optimize``, ``sweep``, ``figure``,
``selftest``.  Global flags ``--seed``, ``--threads`` and ``--out`` may be
given before or after the subcommand; ``SPLITRX_THREADS`` sets the default
worker count.  Failures exit nonzero after printing a machine-parsable
``ERROR <code>: <message>`` line on stderr.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .model import (ChannelVector, ConfigError, NoiseProfile, ReceiverDesign,
                    TransmitConfig, validate)
from .mi_closed import mi_approx, mi_max
from .mi_mc import EstimationError, McSettings, estimate_mi
from .optimizer import (CheckFailedError, egc_weights, mrc_weights,
                        numeric_optimize, optimal_design)
from .selftest import run_selftest
from .sweep import (DEFAULT_NOISE, build_sweep_spec, figure, parse_config_file,
                    run_sweep)


def _parse_floats(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(",")])


def _global_flags(parser: argparse.ArgumentParser):
    # SUPPRESS keeps a subcommand-level flag from clobbering one given before
    # the subcommand with its default.
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                        help="master seed (default 0)")
    parser.add_argument("--threads", type=int, default=argparse.SUPPRESS,
                        help="worker processes (default $SPLITRX_THREADS or 1)")
    parser.add_argument("--out", default=argparse.SUPPRESS,
                        help="output path (default: print to stdout)")


def _design_flags(parser: argparse.ArgumentParser, modes=True):
    parser.add_argument("--channel", required=True,
                        help="comma-separated channel magnitudes, e.g. 1,3")
    parser.add_argument("--phases", help="comma-separated channel phases (radians)")
    parser.add_argument("--power", type=float, required=True, help="transmit power")
    parser.add_argument("--sigma-a-sq", type=float, default=DEFAULT_NOISE.sigma_a_sq)
    parser.add_argument("--sigma-cov-sq", type=float, default=DEFAULT_NOISE.sigma_cov_sq)
    parser.add_argument("--sigma-rec-sq", type=float, default=DEFAULT_NOISE.sigma_rec_sq)
    parser.add_argument("--rho", help="shared value or comma list of splitting ratios "
                                      "(default: closed-form optimum)")
    parser.add_argument("--scheme", choices=("optimal", "egc", "mrc"), default="optimal",
                        help="combining weights when --alpha/--beta are not given")
    parser.add_argument("--alpha", help="comma-separated CD combining weights")
    parser.add_argument("--beta", help="comma-separated ED combining weights")
    if modes:
        parser.add_argument("--mode", choices=("splitting", "cd-only", "ed-only"),
                            default="splitting")


def _mc_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--n-joint", type=int, default=McSettings.n_joint)
    parser.add_argument("--n-outer", type=int, default=McSettings.n_outer)
    parser.add_argument("--n-inner", type=int, default=McSettings.n_inner)
    parser.add_argument("--bins-per-dim", type=int, default=None,
                        help="joint histogram bins per dimension (default: auto)")


def _noise_from(ns) -> NoiseProfile:
    return NoiseProfile(sigma_a_sq=ns.sigma_a_sq, sigma_cov_sq=ns.sigma_cov_sq,
                        sigma_rec_sq=ns.sigma_rec_sq)


def _config_from(ns):
    channel = ChannelVector(_parse_floats(ns.channel),
                            _parse_floats(ns.phases) if ns.phases else None)
    noise = _noise_from(ns)
    tx = TransmitConfig(ns.power)
    k = channel.n_antennas
    mode = getattr(ns, "mode", "splitting")
    if ns.alpha or ns.beta:
        # degenerate modes use only one weight vector, so the other is optional
        needs_alpha = mode != "ed-only"
        needs_beta = mode != "cd-only"
        if (needs_alpha and not ns.alpha) or (needs_beta and not ns.beta):
            raise ConfigError("zero-weight-sum",
                              "give explicit weights for every branch the mode uses")
        alpha = _parse_floats(ns.alpha) if ns.alpha else None
        beta = _parse_floats(ns.beta) if ns.beta else None
    elif ns.scheme == "egc":
        alpha, beta = egc_weights(k), egc_weights(k)
    elif ns.scheme == "mrc":
        alpha = mrc_weights(channel)
        beta = alpha.copy()
    else:
        opt = optimal_design(channel, noise)
        alpha, beta = opt.alpha_star, opt.beta_star
    if mode == "cd-only":
        design = ReceiverDesign.cd_only(alpha)
    elif mode == "ed-only":
        design = ReceiverDesign.ed_only(beta)
    else:
        if ns.rho:
            rho = _parse_floats(ns.rho)
            rho = np.full(k, rho[0]) if rho.size == 1 else rho
        else:
            rho = np.full(k, optimal_design(channel, noise).rho_star)
        design = ReceiverDesign.splitting(rho, alpha, beta)
    return validate(channel, noise, design, tx)


def _emit(ns, lines):
    text = "\n".join(lines) + "\n"
    out = getattr(ns, "out", None)
    if out:
        with open(out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_table(ns, table):
    out = getattr(ns, "out", None)
    if out:
        table.to_csv(out)
    else:
        sys.stdout.write(table.csv_text())


def _cmd_mi_approx(ns) -> int:
    config = _config_from(ns)
    if config.mode != "splitting":
        raise ConfigError("boundary-rho", "mi-approx needs a splitting-mode design")
    est = mi_approx(config.channel, config.noise, config.design, config.tx)
    _emit(ns, [f"mi_bits = {est.value:.9g}", f"method = {est.method}"])
    return 0


def _cmd_mi_mc(ns) -> int:
    config = _config_from(ns)
    settings = McSettings(n_joint=ns.n_joint, n_outer=ns.n_outer, n_inner=ns.n_inner,
                          bins_per_dim=ns.bins_per_dim, seed=getattr(ns, "seed", 0))
    est = estimate_mi(config, settings, threads=_threads(ns))
    _emit(ns, [f"mi_bits = {est.value:.9g}",
               f"std_error = {est.std_error:.9g}",
               f"method = {est.method}",
               f"bins_used = {est.bins_used}"])
    return 0


def _cmd_optimize(ns) -> int:
    channel = ChannelVector(_parse_floats(ns.channel),
                            _parse_floats(ns.phases) if ns.phases else None)
    noise = _noise_from(ns)
    tx = TransmitConfig(ns.power)
    opt = optimal_design(channel, noise)
    best = mi_max(channel, noise, tx, opt.rho_star)
    lines = [
        f"regime = {opt.regime}",
        f"rho_star = {opt.rho_star:.9g}",
        f"mi_max_bits = {best.value:.9g}",
        "alpha_star = " + ",".join(f"{v:.9g}" for v in opt.alpha_star),
        "beta_star = " + ",".join(f"{v:.9g}" for v in opt.beta_star),
    ]
    if ns.verify:
        result = numeric_optimize(channel, noise, tx, restarts=ns.restarts,
                                  seed=getattr(ns, "seed", 0))
        lines += [
            f"numeric_mi_bits = {result.mi_bits:.9g}",
            f"numeric_rho = " + ",".join(f"{v:.9g}" for v in result.design.rho),
            f"agreement_bits = {abs(result.mi_bits - best.value):.3g}",
            f"converged = {result.converged}",
        ]
    _emit(ns, lines)
    return 0


def _cmd_sweep(ns) -> int:
    mapping = parse_config_file(ns.config) if ns.config else {}
    for item in ns.set or []:
        if "=" not in item:
            raise ConfigError("invalid-config", f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        mapping[key.strip()] = value.strip()
    if hasattr(ns, "seed"):
        mapping["seed"] = str(ns.seed)
    spec = build_sweep_spec(mapping)
    table = run_sweep(spec, threads=_threads(ns))
    out = getattr(ns, "out", None) or spec.out
    if out:
        table.to_csv(out)
        sys.stdout.write(f"wrote {len(table.rows)} rows to {out}\n")
    else:
        sys.stdout.write(table.csv_text())
    return 0


def _cmd_figure(ns) -> int:
    mc = McSettings(n_joint=ns.n_joint, n_outer=ns.n_outer, n_inner=ns.n_inner,
                    bins_per_dim=ns.bins_per_dim)
    table = figure(ns.name, mc=mc, seed=getattr(ns, "seed", 0), threads=_threads(ns))
    _emit_table(ns, table)
    return 0


def _cmd_selftest(ns) -> int:
    return run_selftest()


def _threads(ns) -> int:
    if hasattr(ns, "threads"):
        return max(1, ns.threads)
    env = os.environ.get("SPLITRX_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="splitrx",
        description="MI analysis and simulation for multi-antenna ED-CD splitting receivers")
    _global_flags(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mi-approx", help="closed-form high-SNR MI of a design")
    _design_flags(p, modes=False)
    _global_flags(p)
    p.set_defaults(func=_cmd_mi_approx)

    p = sub.add_parser("mi-mc", help="Monte Carlo MI estimate of a design")
    _design_flags(p)
    _mc_flags(p)
    _global_flags(p)
    p.set_defaults(func=_cmd_mi_mc)

    p = sub.add_parser("optimize", help="closed-form optimal design (optionally verified)")
    p.add_argument("--channel", required=True)
    p.add_argument("--phases")
    p.add_argument("--power", type=float, required=True)
    p.add_argument("--sigma-a-sq", type=float, default=DEFAULT_NOISE.sigma_a_sq)
    p.add_argument("--sigma-cov-sq", type=float, default=DEFAULT_NOISE.sigma_cov_sq)
    p.add_argument("--sigma-rec-sq", type=float, default=DEFAULT_NOISE.sigma_rec_sq)
    p.add_argument("--verify", action="store_true",
                   help="cross-check with the numeric optimizer")
    p.add_argument("--restarts", type=int, default=6)
    _global_flags(p)
    p.set_defaults(func=_cmd_optimize)

    p = sub.add_parser("sweep", help="run a sweep from a key = value config file")
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config entry (repeatable)")
    _global_flags(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("figure", help="reproduce a built-in experiment as CSV")
    p.add_argument("name", help="fig2 | fig3 | fig4 | fig5 | fig6")
    _mc_flags(p)
    _global_flags(p)
    p.set_defaults(func=_cmd_figure)

    p = sub.add_parser("selftest", help="run the fast acceptance property checks")
    _global_flags(p)
    p.set_defaults(func=_cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except (ConfigError, EstimationError) as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return 2
    except CheckFailedError as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"ERROR file-not-found: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"ERROR invalid-value: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
