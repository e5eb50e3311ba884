"""AeroMACS OFDMA physical-layer trade-off toolkit, command-line front end.

Subcommands: ``params``, ``coverage``, ``doppler-sweep``, ``max-speed``,
``simulate ici``, ``simulate cp`` and ``plan``. Every subcommand takes
``--config FILE`` (JSON whose keys are the long flag names in snake_case);
flags given on the command line win over the file.

Exit codes: 0 success, 1 invalid input, 2 internal failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

from . import core_params as cp
from . import mobility as mob
from . import propagation as prop
from .ici_simulator import SimulationSpec, simulate_cp_isi, simulate_ici

__all__ = ["main", "build_parser", "RunConfig", "parse_quantity", "SCHEMA"]

SCHEMA = "aeromacs-toolkit/1"
FORMATS = ("csv", "json")


class InputError(Exception):
    """Bad user input; maps to exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------- quantities

_UNITS = {
    "speed": {"": 1.0, "mps": 1.0, "m/s": 1.0, "kmh": 1 / 3.6, "km/h": 1 / 3.6},
    "length": {"": 1.0, "m": 1.0, "km": 1000.0, "ft": 0.3048},
    "frequency": {"": 1.0, "hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9},
    "time": {"": 1.0, "s": 1.0, "ms": 1e-3, "us": 1e-6},
}
_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([a-zA-Z/]*)\s*$")


def parse_quantity(text, kind):
    """Parse ``"100kmh"``, ``"5.1GHz"``, ``"2.5km"`` or a bare SI number."""
    if isinstance(text, (int, float)):
        return float(text)
    m = _QUANTITY.match(str(text))
    if not m:
        raise ValueError(f"cannot parse {kind} {text!r}")
    unit = m.group(2).lower()
    try:
        scale = _UNITS[kind][unit]
    except KeyError:
        allowed = ", ".join(u for u in _UNITS[kind] if u)
        raise ValueError(f"unknown {kind} unit {m.group(2)!r} (use {allowed})") from None
    return float(m.group(1)) * scale


def _quantity(kind):
    def convert(text):
        try:
            return parse_quantity(text, kind)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    convert.__name__ = kind
    return convert


# ---------------------------------------------------------------- config


@dataclass
class RunConfig:
    """Settings shared by the analysis commands."""

    profile: object = "aeromacs-default"
    carrier_freq_hz: float = 5.1e9
    es_dbm: float = mob.DEFAULT_ES_DBM
    alpha_db_per_km: float = 7.5
    format: str = "csv"
    output: str | None = None

    def __post_init__(self):
        if self.format not in FORMATS:
            raise InputError(f"format: must be one of {FORMATS}, got {self.format!r}")
        if not self.carrier_freq_hz > 0:
            raise InputError("carrier_freq_hz: must be positive")

    def ofdma(self, overrides=None) -> cp.OfdmaConfig:
        if isinstance(self.profile, str):
            try:
                base = asdict(cp.get_profile(self.profile))
            except KeyError as exc:
                raise InputError(f"profile: {exc.args[0]}") from None
        elif isinstance(self.profile, dict):
            base = asdict(cp.AEROMACS_DEFAULT)
            unknown = set(self.profile) - set(base)
            if unknown:
                raise InputError(f"profile: unknown field(s) {sorted(unknown)}")
            base.update(self.profile)
        else:
            raise InputError("profile: must be a profile name or an object")
        for key, value in (overrides or {}).items():
            if value is not None:
                base[key] = value
        try:
            return cp.OfdmaConfig(**base)
        except (TypeError, ValueError) as exc:
            raise InputError(f"profile: {exc}") from None


def _run_config(args) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    return RunConfig(**{k: v for k, v in vars(args).items() if k in known})


# ---------------------------------------------------------------- rendering


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.6g}"
    return str(value)


def _jsonable(value):
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def render_csv(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def render_json(doc) -> str:
    return json.dumps(_jsonable({"schema": SCHEMA, **doc}), indent=2) + "\n"


def _emit(text, output):
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report(cfg, command, doc, columns, rows):
    if cfg.format == "json":
        text = render_json({"command": command, **doc})
    else:
        text = render_csv(columns, rows)
    _emit(text, cfg.output)


def _quantity_rows(items):
    return [{"quantity": q, "value": v, "unit": u} for q, v, u in items]


_QCOLS = ["quantity", "value", "unit"]


# ---------------------------------------------------------------- commands


def cmd_params(args):
    cfg = _run_config(args)
    ofdma = cfg.ofdma(
        {
            "bandwidth_hz": args.bandwidth,
            "n_subcarriers": args.n_subcarriers,
            "cp_ratio_log2": args.cp_ratio_log2,
        }
    )
    dl = args.dl_symbols if args.dl_symbols is not None else ofdma.frame_symbols // 2
    ul = ofdma.frame_symbols - dl
    if not 1 <= dl < ofdma.frame_symbols:
        raise InputError(
            f"dl_symbols: must lie in [1, {ofdma.frame_symbols - 1}], got {dl}"
        )

    spacing = cp.subcarrier_spacing(ofdma)
    ts = cp.symbol_time(ofdma)
    cpl = cp.cp_length(ofdma)
    loss = cp.snr_loss_db(ofdma)
    items = [
        ("bandwidth", ofdma.bandwidth_hz, "Hz"),
        ("n_subcarriers", ofdma.n_subcarriers, ""),
        ("subcarrier_spacing", spacing, "Hz"),
        ("symbol_time", ts, "s"),
        ("guard_ratio", str(ofdma.guard_ratio), ""),
        ("cp_length", cpl, "s"),
        ("snr_loss", loss, "dB"),
        ("dl_symbols", dl, ""),
        ("ul_symbols", ul, ""),
    ]
    rates = []
    for bits in (2, 4, 6):
        rate = cp.data_rate(ofdma, bits)
        rates.append({"bits_per_symbol": bits, "raw_rate_bps": rate})
        items.append((f"raw_rate_b{bits}", rate, "bit/s"))
    throughput = []
    for mcs in cp.MCS_TABLE.values():
        for direction, n_sym, ref in (
            ("DL", dl, mcs.reference_dl_kbps),
            ("UL", ul, mcs.reference_ul_kbps),
        ):
            rate = cp.frame_throughput(ofdma, mcs, direction, n_sym)
            throughput.append(
                {
                    "mcs": mcs.name,
                    "direction": direction,
                    "n_symbols": n_sym,
                    "rate_bps": rate,
                    "reference_kbps": ref,
                }
            )
            items.append((f"throughput_{direction}_{mcs.name}", rate, "bit/s"))

    doc = {
        "profile": asdict(ofdma),
        "subcarrier_spacing_hz": spacing,
        "symbol_time_s": ts,
        "guard_ratio": ofdma.guard_ratio,
        "cp_length_s": cpl,
        "snr_loss_db": loss,
        "data_rates": rates,
        "frame_throughput": throughput,
    }
    _report(cfg, "params", doc, _QCOLS, _quantity_rows(items))


def _budget(args, cfg):
    try:
        budget = prop.LinkBudget(
            max_path_loss_db=args.max_path_loss_db,
            carrier_freq_hz=cfg.carrier_freq_hz,
            aeromacs_band=args.aeromacs_band,
        )
        model = prop.ExcessLossModel(
            cfg.alpha_db_per_km, allow_override=args.allow_alpha_override
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None
    return budget, model


def cmd_coverage(args):
    cfg = _run_config(args)
    budget, model = _budget(args, cfg)
    d_los = prop.max_los_coverage_m(budget)
    d_eff = prop.effective_cell_range_m(budget, model)
    spread = prop.delay_spread_s(d_eff)
    items = [
        ("max_path_loss", budget.max_path_loss_db, "dB"),
        ("carrier_freq", budget.carrier_freq_hz, "Hz"),
        ("max_los_coverage", d_los, "m"),
        ("alpha", model.alpha_db_per_km, "dB/km"),
        ("effective_cell_range", d_eff, "m"),
        ("delay_spread_at_range", spread, "s"),
        ("gs_antenna_gain", budget.gs_antenna_gain_dbi, "dBi"),
        ("ms_antenna_gain", budget.ms_antenna_gain_dbi, "dBi"),
        ("tx_power", budget.tx_power_dbm, "dBm"),
    ]
    doc = {
        "max_path_loss_db": budget.max_path_loss_db,
        "carrier_freq_hz": budget.carrier_freq_hz,
        "max_los_coverage_m": d_los,
        "alpha_db_per_km": model.alpha_db_per_km,
        "effective_cell_range_m": d_eff,
        "delay_spread_at_range_s": spread,
        # reported only; the path-loss budget is taken as all-inclusive
        "gs_antenna_gain_dbi": budget.gs_antenna_gain_dbi,
        "ms_antenna_gain_dbi": budget.ms_antenna_gain_dbi,
        "tx_power_dbm": budget.tx_power_dbm,
    }
    _report(cfg, "coverage", doc, _QCOLS, _quantity_rows(items))


SWEEP_COLUMNS = [
    "speed_mps",
    "speed_kmh",
    "doppler_hz",
    "ici_dbm",
    "signal_to_ici_db",
    "coherence_ms",
]


def sweep_speeds(v_min, v_max, step):
    if v_min < 0 or not v_min < v_max:
        raise InputError("v_min/v_max: need 0 <= v_min < v_max")
    if not step > 0:
        raise InputError("step: must be positive")
    count = math.floor((v_max - v_min) / step + 1e-9)
    return [v_min + i * step for i in range(count + 1)]


def doppler_sweep_rows(speeds, cfg, ofdma, mode="sample"):
    ts = cp.symbol_time(ofdma)
    rows = []
    for v in speeds:
        a = mob.analyze_speed(
            v, cfg.carrier_freq_hz, ts, ofdma.n_subcarriers, cfg.es_dbm, mode
        )
        rows.append(
            {
                "speed_mps": v,
                "speed_kmh": v * 3.6,
                "doppler_hz": a.doppler_hz,
                "ici_dbm": a.ici_power_dbm,
                "signal_to_ici_db": a.signal_to_ici_db,
                "coherence_ms": a.coherence_time_s * 1e3,
            }
        )
    return rows


def cmd_doppler_sweep(args):
    cfg = _run_config(args)
    ofdma = cfg.ofdma()
    speeds = sweep_speeds(args.v_min, args.v_max, args.step)
    rows = doppler_sweep_rows(speeds, cfg, ofdma, args.ici_mode)
    doc = {
        "carrier_freq_hz": cfg.carrier_freq_hz,
        "es_dbm": cfg.es_dbm,
        "ici_mode": args.ici_mode,
        "rows": rows,
    }
    _report(cfg, "doppler-sweep", doc, SWEEP_COLUMNS, rows)
    if args.figure_dir:
        from .plotting import render_sweep_figures

        for path in render_sweep_figures(rows, args.figure_dir, args.figure_format):
            print(f"wrote {path}", file=sys.stderr)


def cmd_max_speed(args):
    cfg = _run_config(args)
    if args.spacing_from_profile:
        spacing = cp.subcarrier_spacing(cfg.ofdma())
    else:
        spacing = args.spacing
    if not spacing > 0:
        raise InputError("spacing: must be positive")
    limit = mob.doppler_spread_limit_hz(spacing)
    tc_min = 1.0 / limit
    v_max = mob.max_supported_speed_mps(spacing, cfg.carrier_freq_hz)
    fd_max = mob.doppler_shift_hz(v_max, cfg.carrier_freq_hz)
    items = [
        ("subcarrier_spacing", spacing, "Hz"),
        ("doppler_spread_limit", limit, "Hz"),
        ("min_coherence_time", tc_min, "s"),
        ("max_doppler", fd_max, "Hz"),
        ("max_speed", v_max, "m/s"),
        ("max_speed_kmh", v_max * 3.6, "km/h"),
        ("paper_stated_max_speed (inconsistent with chain)", mob.PUBLISHED_MAX_SPEED_MPS, "m/s"),
    ]
    doc = {
        "subcarrier_spacing_hz": spacing,
        "carrier_freq_hz": cfg.carrier_freq_hz,
        "doppler_spread_limit_hz": limit,
        "min_coherence_time_s": tc_min,
        "max_doppler_hz": fd_max,
        "max_speed_mps": v_max,
        "max_speed_kmh": v_max * 3.6,
        "published_max_speed_mps": mob.PUBLISHED_MAX_SPEED_MPS,
        "published_max_speed_kmh": mob.PUBLISHED_MAX_SPEED_KMH,
        "published_max_speed_note": "paper-stated (inconsistent with chain)",
    }
    _report(cfg, "max-speed", doc, _QCOLS, _quantity_rows(items))


def cmd_simulate_ici(args):
    cfg = _run_config(args)
    try:
        spec = SimulationSpec(
            n_subcarriers=args.n_subcarriers,
            fd_ts=args.fd_ts,
            trials=args.trials,
            seed=args.seed,
            oscillators=args.oscillators,
            constellation=args.constellation,
            fading=args.fading,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None
    result = simulate_ici(spec, workers=args.workers)
    within = abs(result.error_db) <= args.tol_db
    doc = {
        "spec": asdict(spec),
        "result": result.to_dict(),
        "error_db": result.error_db,
        "tolerance_db": args.tol_db,
        "verdict": "pass" if within else "fail",
        "contract_verdict": "pass" if result.agrees() else "fail",
    }
    items = [
        ("empirical_ici_norm", result.empirical_ici_norm, ""),
        ("analytic_ici_norm", result.analytic_ici_norm, ""),
        ("standard_error", result.standard_error, ""),
        ("trials_run", result.trials_run, ""),
        ("error_db", result.error_db, "dB"),
        ("verdict", doc["verdict"], ""),
    ]
    _report(cfg, "simulate ici", doc, _QCOLS, _quantity_rows(items))


def cmd_simulate_cp(args):
    cfg = _run_config(args)
    try:
        ser = simulate_cp_isi(
            args.n_subcarriers,
            args.cp_samples,
            args.echo_delay,
            args.echo_gain,
            args.symbols,
            args.seed,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None
    doc = {
        "n_subcarriers": args.n_subcarriers,
        "cp_samples": args.cp_samples,
        "echo_delay_samples": args.echo_delay,
        "echo_gain": args.echo_gain,
        "symbols": args.symbols,
        "seed": args.seed,
        "symbol_error_rate": ser,
        "echo_within_cp": args.echo_delay <= args.cp_samples,
    }
    items = [("symbol_error_rate", ser, ""), ("echo_within_cp", doc["echo_within_cp"], "")]
    _report(cfg, "simulate cp", doc, _QCOLS, _quantity_rows(items))


def cmd_plan(args):
    cfg = _run_config(args)
    try:
        positions = prop.plan_corridor(args.length, args.radius, args.redundancy)
    except prop.InfeasibleCorridor as exc:
        raise InputError(f"InfeasibleCorridor: {exc}") from None
    except ValueError as exc:
        raise InputError(str(exc)) from None
    min_cov = int(prop.coverage_counts(positions, args.length, args.radius).min())
    rows = [{"station": i, "position_m": p} for i, p in enumerate(positions)]
    doc = {
        "length_m": args.length,
        "cell_radius_m": args.radius,
        "redundancy": args.redundancy,
        "positions_m": positions,
        "n_stations": len(positions),
        "min_coverage": min_cov,
    }
    _report(cfg, "plan", doc, ["station", "position_m"], rows)
    print(
        f"{len(positions)} stations, every point covered at least {min_cov} times",
        file=sys.stderr,
    )


# ---------------------------------------------------------------- parser


def _common(p, analysis=True):
    p.add_argument("--config", help="JSON file with defaults for these flags")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--output", "-o", help="write here instead of stdout")
    if analysis:
        p.add_argument("--profile", default="aeromacs-default")
        p.add_argument(
            "--carrier-freq", dest="carrier_freq_hz", type=_quantity("frequency"),
            default=5.1e9, help="carrier frequency, e.g. 5.1GHz",
        )
        p.add_argument("--es-dbm", type=float, default=mob.DEFAULT_ES_DBM)
        p.add_argument(
            "--alpha", dest="alpha_db_per_km", type=float, default=7.5,
            help="excess loss in dB/km",
        )


def build_parser():
    parser = _Parser(prog="aeromacs", description="AeroMACS OFDMA physical-layer trade-off toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("params", help="numerology, rates and overheads")
    _common(p)
    p.add_argument("--bandwidth", type=_quantity("frequency"))
    p.add_argument("--n-subcarriers", type=int)
    p.add_argument("--cp-ratio-log2", type=int)
    p.add_argument("--dl-symbols", type=int, help="DL share of the frame")
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("coverage", help="LoS and excess-loss cell range")
    _common(p)
    p.add_argument("--max-path-loss", dest="max_path_loss_db", type=float, default=128.0)
    p.add_argument("--aeromacs-band", action="store_true")
    p.add_argument("--allow-alpha-override", action="store_true")
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("doppler-sweep", help="Doppler/ICI/coherence vs speed")
    _common(p)
    p.add_argument("--v-min", type=_quantity("speed"), default=0.0)
    p.add_argument("--v-max", type=_quantity("speed"), default=150 / 3.6)
    p.add_argument("--step", type=_quantity("speed"), default=5 / 3.6)
    p.add_argument("--ici-mode", choices=mob.ICI_MODES, default="sample")
    p.add_argument("--figure-dir", help="also render figures into this directory")
    p.add_argument("--figure-format", default="png")
    p.set_defaults(func=cmd_doppler_sweep)

    p = sub.add_parser("max-speed", help="highest speed the spacing tolerates")
    _common(p)
    p.add_argument("--spacing", type=_quantity("frequency"), default=10e3)
    p.add_argument(
        "--spacing-from-profile", action="store_true",
        help="use BW/(N+1) of the profile instead of --spacing",
    )
    p.set_defaults(func=cmd_max_speed)

    p = sub.add_parser("simulate", help="Monte Carlo experiments")
    simsub = p.add_subparsers(dest="experiment", required=True, parser_class=_Parser)

    q = simsub.add_parser("ici", help="empirical vs analytic ICI")
    _common(q, analysis=False)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--n-subcarriers", type=int, default=64)
    q.add_argument("--fd-ts", type=float, default=0.05)
    q.add_argument("--trials", type=int, default=10_000)
    q.add_argument("--oscillators", type=int, default=64)
    q.add_argument("--constellation", choices=("qpsk", "16qam"), default="qpsk")
    q.add_argument("--fading", choices=("sos", "exact"), default="sos")
    q.add_argument("--workers", type=int, default=1)
    q.add_argument("--tol-db", type=float, default=0.5)
    q.set_defaults(func=cmd_simulate_ici, format="json")

    q = simsub.add_parser("cp", help="cyclic prefix vs two-path echo")
    _common(q, analysis=False)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--n-subcarriers", type=int, default=512)
    q.add_argument("--cp-samples", type=int, default=64)
    q.add_argument("--echo-delay", type=int, default=50)
    q.add_argument("--echo-gain", type=float, default=0.5)
    q.add_argument("--symbols", type=int, default=1000)
    q.set_defaults(func=cmd_simulate_cp, format="json")

    p = sub.add_parser("plan", help="ground stations along a corridor")
    _common(p, analysis=False)
    p.add_argument("--length", type=_quantity("length"), required=True)
    p.add_argument("--radius", type=_quantity("length"), required=True)
    p.add_argument("--redundancy", type=int, default=2)
    p.set_defaults(func=cmd_plan)
    return parser


def _leaf_parser(parser, argv):
    """Subparser that will handle ``argv``, for applying config defaults."""
    current = parser
    for token in argv:
        actions = [a for a in current._actions if isinstance(a, argparse._SubParsersAction)]
        if not actions:
            break
        if token in actions[0].choices:
            current = actions[0].choices[token]
    return current


def _apply_config(parser, argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    try:
        with open(known.config) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"config: cannot read {known.config}: {exc}") from None
    if not isinstance(data, dict):
        raise InputError("config: top level must be a JSON object")
    leaf = _leaf_parser(parser, argv)
    dests = {a.dest: a for a in leaf._actions}
    defaults = {}
    for key, value in data.items():
        if key not in dests or key in ("help", "config", "func"):
            raise InputError(f"config: unknown key {key!r}")
        action = dests[key]
        if action.type is not None and isinstance(value, str):
            try:
                value = action.type(value)
            except (argparse.ArgumentTypeError, ValueError) as exc:
                raise InputError(f"config: {key}: {exc}") from None
        defaults[key] = value
    for action in leaf._actions:
        if action.dest in defaults:
            action.required = False
    leaf.set_defaults(**defaults)


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    except InputError as exc:
        print(f"aeromacs: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001
        print(f"aeromacs: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
