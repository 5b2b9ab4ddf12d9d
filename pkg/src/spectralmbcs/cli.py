"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 physics precondition
violated (e.g. bin width too coarse, use ``--force`` to override),
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import entanglement as ent
from . import scattershot as sc
from .config import ExperimentConfig
from .correlations import landscape_sweep, validate_bins
from .errors import (
    ConfigError,
    DegeneratePointError,
    DimensionError,
    DomainError,
    NumericalError,
    PreconditionError,
    SizeLimitError,
    UnsupportedKindError,
)
from .network import NetworkUnitary
from .symmetry import check_parity, default_grid, figure_checks

EXIT_OK, EXIT_CONFIG, EXIT_PHYSICS, EXIT_NUMERIC = 0, 2, 3, 4


def _print(obj):
    print(json.dumps(obj, indent=2, sort_keys=True))


def _load_config(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError("--config is required for this subcommand")
    return ExperimentConfig.load(args.config)


def _seed(args, cfg=None) -> int:
    if args.seed is not None:
        return args.seed
    if cfg is not None and cfg.seed is not None:
        return cfg.seed
    return 0


def _out(args, cfg, default) -> Path:
    return Path(args.out or (cfg.out if cfg and cfg.out else default))


def _bin_check(report, force):
    print(json.dumps({"bin_check": report.to_dict()}, sort_keys=True))
    if not force:
        report.raise_if_failed()


def cmd_landscape(args) -> int:
    cfg = _load_config(args)
    photons, net = cfg.build_photons(), cfg.build_network()
    if cfg.bin_width is not None:
        _bin_check(validate_bins(photons, cfg.bin_width, cfg.eps_bin), args.force)
    land = landscape_sweep(
        photons, net, cfg.detector_ports(), cfg.build_grid(), cfg.omega_ref, cfg.bin_width, args.threads
    )
    out = _out(args, cfg, "landscape.csv")
    land.to_csv(out)
    land.to_json(out.with_suffix(".json"))
    print(json.dumps({"written": str(out), "points": int(land.values.size), "max_density": float(land.values.max())}))
    return EXIT_OK


def cmd_symmetry(args) -> int:
    cfg = _load_config(args)
    photons, net = cfg.build_photons(), cfg.build_network()
    opts = cfg.symmetry or {}
    grid = default_grid(int(opts.get("num", 21)), float(opts.get("span", 3.0)), len(photons))
    ports = cfg.detector_ports()
    reports = figure_checks(photons, net, ports, grid, omega_ref=cfg.omega_ref, threads=args.threads)
    reports.append(check_parity(photons, net, ports, grid, omega_ref=cfg.omega_ref, threads=args.threads))
    payload = [r.to_dict() for r in reports]
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return EXIT_OK


def _w_times(cfg):
    photons = cfg.build_photons()
    h = [p.t for p in photons if p.polarization == "H"]
    v = [p.t for p in photons if p.polarization == "V"]
    if len(photons) != 3 or len(h) != 2 or len(v) != 1:
        raise ConfigError("entanglement needs two H-polarized and one V-polarized photon")
    return h[0], h[1], v[0]


def cmd_entanglement(args) -> int:
    cfg = _load_config(args)
    t1, t2, t3 = _w_times(cfg)
    opts = cfg.entanglement or {}

    def axis(name):
        a = opts.get(name, {})
        return np.linspace(float(a.get("start", -2.0)), float(a.get("stop", 2.0)), int(a.get("num", 201)))

    land = ent.entanglement_landscape(t1, t2, t3, axis("delta13"), axis("delta23"))
    out = _out(args, cfg, "entanglement.csv")
    land.to_csv(out)
    e_av = land.e_av
    print(json.dumps({
        "written": str(out),
        "points": int(e_av.size),
        "degenerate_points": int(np.isnan(e_av).sum()),
        "E_av_max": float(np.nanmax(e_av)),
        "E_av_min": float(np.nanmin(e_av)),
    }, sort_keys=True))
    return EXIT_OK


def _read_json(path, what):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"{what} file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None


def _write_jsonl(path, outcomes):
    with open(path, "w") as fh:
        for o in outcomes:
            fh.write(json.dumps(o.to_dict(), sort_keys=True) + "\n")


def cmd_scattershot(args) -> int:
    cfg = ExperimentConfig.load(args.config) if args.config else None
    if args.sources:
        data = _read_json(args.sources, "sources")
        sources = [sc.SpdcSource.from_dict(s) for s in (data["sources"] if isinstance(data, dict) else data)]
    elif cfg is not None:
        sources = cfg.build_sources()
    else:
        raise ConfigError("scattershot needs --sources or a --config with 'sources'")
    if args.network:
        net = NetworkUnitary.from_dict(_read_json(args.network, "network"))
    elif cfg is not None:
        net = cfg.build_network()
    else:
        raise ConfigError("scattershot needs --network or a --config with 'network'")
    n_photons = args.n_photons or (cfg.n_photons if cfg else None)
    trials = args.trials if args.trials is not None else (cfg.trials if cfg else None)
    if not n_photons or trials is None:
        raise ConfigError("scattershot needs the photon number and the number of trials")
    count = args.bins if args.bins is not None else (cfg.bins if cfg else None)
    width = args.bin_width if args.bin_width is not None else (cfg.bin_width if cfg else None)
    if count is None or width is None:
        raise ConfigError("scattershot needs --bins and --bin-width")
    omega_ref = cfg.omega_ref if cfg else 0.0
    eps = cfg.eps_bin if cfg else sc.DEFAULT_EPS_BIN
    bins = sc.FrequencyBins(int(count), float(width), omega_ref)
    _bin_check(sc.worst_case_bin_report(sources, bins.width, eps), args.force)
    result = sc.scattershot_run(
        sources, net, bins, int(trials), _seed(args, cfg), int(n_photons), eps, check_bins=False
    )
    out = _out(args, cfg, "scattershot.jsonl")
    _write_jsonl(out, result.outcomes)
    summary = result.summary()
    out.with_suffix(".summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    _print({"summary": summary})
    return EXIT_OK


def cmd_sample(args) -> int:
    cfg = _load_config(args)
    photons, net = cfg.build_photons(), cfg.build_network()
    bins = cfg.build_bins(args.bins, args.bin_width)
    _bin_check(validate_bins(photons, bins.width, cfg.eps_bin), args.force)
    size = args.samples if args.samples is not None else (cfg.samples or 1)
    outcomes = sc.mbcs_sample(photons, net, bins, _seed(args, cfg), size=int(size), check_bins=False)
    out = _out(args, cfg, "samples.jsonl")
    _write_jsonl(out, outcomes)
    print(json.dumps({"written": str(out), "samples": len(outcomes)}))
    return EXIT_OK


def cmd_prob(args) -> int:
    rows = []
    if args.optimize_gamma:
        if args.k is None:
            raise ConfigError("--optimize-gamma needs --k")
        g, p = sc.optimal_squeezing(args.k)
        rows.append(("optimal gamma2", g))
        rows.append(("max p_tilde", p))
    if args.gamma2 is not None:
        p0, p1 = sc.single_pulse_probs(args.gamma2)
        rows += [("p0", p0), ("p1", p1)]
        if args.k is not None:
            p = sc.multiplexed_prob(args.gamma2, args.k)
            rows.append(("p_tilde", p))
            if args.L is not None and args.N is not None:
                rows.append(("P_success", sc.success_probability(p, args.L, args.N)))
    if args.target_P is not None:
        if args.L is None or args.N is None:
            raise ConfigError("--target-P needs --L and --N")
        rows.append(("p_tilde_min", sc.min_single_photon_prob(args.N, args.L, args.target_P)))
    if not rows:
        raise ConfigError("nothing to compute; pass --gamma2, --optimize-gamma or --target-P")
    width = max(len(name) for name, _ in rows)
    for name, value in rows:
        print(f"{name:<{width}}  {value:.6f}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment configuration (JSON)")
    common.add_argument("--out", help="output path")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int, default=None, help="worker cap; results do not depend on it")
    common.add_argument("--force", action="store_true", help="run even if the bin width is too coarse")

    parser = argparse.ArgumentParser(prog="spectralmbcs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("landscape", parents=[common], help="coincidence density on a frequency grid").set_defaults(
        func=cmd_landscape
    )
    sub.add_parser("symmetry", parents=[common], help="landscape symmetry checks").set_defaults(func=cmd_symmetry)
    sub.add_parser("entanglement", parents=[common], help="W-state entanglement map").set_defaults(
        func=cmd_entanglement
    )

    p = sub.add_parser("scattershot", parents=[common], help="heralded scattershot sampling")
    p.add_argument("--sources", help="JSON list of SPDC sources")
    p.add_argument("--network", help="JSON network descriptor")
    p.add_argument("--trials", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--bin-width", type=float)
    p.add_argument("--n-photons", type=int)
    p.set_defaults(func=cmd_scattershot)

    p = sub.add_parser("sample", parents=[common], help="output samples for a fixed input state")
    p.add_argument("--samples", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--bin-width", type=float)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("prob", parents=[common], help="heralding and success probabilities")
    p.add_argument("--gamma2", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--L", type=int)
    p.add_argument("--N", type=int)
    p.add_argument("--optimize-gamma", action="store_true")
    p.add_argument("--target-P", type=float)
    p.set_defaults(func=cmd_prob)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PreconditionError as exc:
        failed = getattr(exc, "failed", ())
        print(f"error: {exc}" + (f" (failed: {', '.join(failed)})" if failed else ""), file=sys.stderr)
        return EXIT_PHYSICS
    except (ConfigError, DimensionError, UnsupportedKindError, DomainError, SizeLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, DegeneratePointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
