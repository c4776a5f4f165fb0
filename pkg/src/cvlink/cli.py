"""Command-line front end.

Configs are INI files. Physical quantities are SI with the unit in the key
name::

    [scenario]
    kind = downlink
    weather = clear-night
    regime = fast
    squeezing = 1.0

    [beam]
    wavelength_m = 800e-9
    waist_m = 0.20

    [receiver]
    aperture_m = 0.40
    efficiency = 1.0

    [geometry]
    altitude_m = 400e3

Any key can be overridden with ``--set section.key=value``.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import logging
import math
import os
import sys
from dataclasses import dataclass, fields

import numpy as np

from . import gaussian_cv as gcv
from .atmosphere import weather_preset
from .beam_optics import Beam, Receiver
from .errors import ConfigError, CvlinkError, DomainError, NumericalError
from .link_scenarios import LinkResult, ScenarioConfig, ScenarioKind, evaluate, optimize_station
from .thermal_background import mean_thermal_photons_microwave, mode_occupancy

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3

SWEEP_HEADER = ["param", "tau_mean", "sqrt_tau_mean", "tau_max", "negativity", "fidelity", "regime", "flags"]

log = logging.getLogger("cvlink")

# (section, key) -> ScenarioConfig field
_FLOAT_KEYS = {
    ("scenario", "squeezing"): "squeezing",
    ("scenario", "source_photons"): "source_photons",
    ("geometry", "ground_altitude_m"): "ground_altitude",
    ("geometry", "altitude_m"): "altitude",
    ("geometry", "zenith_angle_rad"): "zenith_angle",
    ("geometry", "distance_m"): "distance",
    ("geometry", "station_altitude_m"): "station_altitude",
    ("geometry", "horizontal_altitude_m"): "horizontal_altitude",
    ("noise", "thermal_photons"): "thermal_photons",
    ("noise", "temperature_k"): "temperature",
    ("noise", "pointing_jitter_rad"): "pointing_jitter",
}
_STR_KEYS = {
    ("scenario", "kind"): "kind",
    ("scenario", "weather"): "weather",
    ("scenario", "regime"): "regime",
    ("geometry", "link_direction"): "link_direction",
    ("geometry", "relay"): "relay",
}
_BOOL_KEYS = {("beam", "focused"): "focused"}
_BEAM_KEYS = {"wavelength_m": "wavelength", "waist_m": "waist"}
_RECEIVER_KEYS = {"aperture_m": "aperture", "efficiency": "efficiency", "field_of_view_sr": "field_of_view"}
_SWEEP_KEYS = {"parameter", "start", "stop", "points", "spacing"}


@dataclass(frozen=True)
class SweepSpec:
    parameter: str
    start: float
    stop: float
    points: int
    spacing: str = "linear"

    def __post_init__(self):
        if self.parameter not in ("altitude_m", "distance_m"):
            raise ConfigError(f"sweep.parameter must be altitude_m or distance_m, got {self.parameter!r}")
        if not self.start < self.stop:
            raise ConfigError("sweep.start must be below sweep.stop")
        if self.points < 2:
            raise ConfigError("sweep.points must be at least 2")
        if self.spacing not in ("linear", "log"):
            raise ConfigError("sweep.spacing must be linear or log")
        if self.spacing == "log" and self.start <= 0.0:
            raise ConfigError("log spacing needs sweep.start > 0")

    def grid(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


def _float(section: str, key: str, raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ConfigError(f"{section}.{key}: expected a number, got {raw!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{section}.{key}: must be finite")
    return value


def read_config(path: str | None, overrides: list[str] = ()) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                cp.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from None
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc.message}") from None
    for item in overrides:
        name, sep, value = item.partition("=")
        section, dot, key = name.strip().partition(".")
        if not (sep and dot and section and key):
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        if not cp.has_section(section):
            cp.add_section(section)
        cp.set(section, key, value.strip())
    return cp


def build_scenario(cp: configparser.ConfigParser) -> ScenarioConfig:
    """Turn parsed INI into a :class:`ScenarioConfig`; unknown keys are rejected."""
    kwargs: dict = {}
    beam_kw = {"wavelength": 800e-9, "waist": 0.20}
    rec_kw = {"aperture": 0.40, "efficiency": 1.0}
    for section in cp.sections():
        for key, raw in cp.items(section):
            where = (section, key)
            if where in _FLOAT_KEYS:
                kwargs[_FLOAT_KEYS[where]] = _float(section, key, raw)
            elif where in _STR_KEYS:
                kwargs[_STR_KEYS[where]] = raw.strip()
            elif where in _BOOL_KEYS:
                try:
                    kwargs[_BOOL_KEYS[where]] = cp.getboolean(section, key)
                except ValueError:
                    raise ConfigError(f"{section}.{key}: expected a boolean, got {raw!r}") from None
            elif section == "beam" and key in _BEAM_KEYS:
                beam_kw[_BEAM_KEYS[key]] = _float(section, key, raw)
            elif section == "receiver" and key in _RECEIVER_KEYS:
                rec_kw[_RECEIVER_KEYS[key]] = _float(section, key, raw)
            elif section == "sweep" and key in _SWEEP_KEYS:
                continue
            elif section == "optimize" and key in ("objective", "heights_m"):
                continue
            else:
                raise ConfigError(f"unknown config key {section}.{key}")
    try:
        kwargs["beam"] = Beam(**beam_kw)
        kwargs["receiver"] = Receiver(**rec_kw)
        return ScenarioConfig(**kwargs)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None
    except ValueError as exc:
        raise ConfigError(f"invalid value: {exc}") from None


def build_sweep(cp: configparser.ConfigParser) -> SweepSpec:
    if not cp.has_section("sweep"):
        raise ConfigError("missing [sweep] section")
    s = cp["sweep"]
    for key in ("parameter", "start", "stop", "points"):
        if key not in s:
            raise ConfigError(f"missing sweep.{key}")
    try:
        points = int(s["points"])
    except ValueError:
        raise ConfigError(f"sweep.points: expected an integer, got {s['points']!r}") from None
    return SweepSpec(
        s["parameter"].strip(),
        _float("sweep", "start", s["start"]),
        _float("sweep", "stop", s["stop"]),
        points,
        s.get("spacing", "linear").strip(),
    )


def describe(cfg: ScenarioConfig) -> list[str]:
    """Resolved configuration, presets included, one ``key = value`` per line."""
    lines = []
    for f in fields(cfg):
        value = getattr(cfg, f.name)
        if hasattr(value, "value"):
            value = value.value
        lines.append(f"{f.name} = {value!r}" if not isinstance(value, str) else f"{f.name} = {value}")
    w = weather_preset(cfg.weather)
    lines.append(f"weather.turbulence = {w.turbulence!r}")
    lines.append(f"weather.extinction = {w.extinction!r}")
    lines.append(f"weather.absorption = {w.absorption!r}")
    return lines


def _fmt(x: float) -> str:
    return repr(float(x))


def _result_lines(res: LinkResult) -> list[str]:
    return [
        f"tau_mean={_fmt(res.tau_mean)}",
        f"sqrt_tau_mean={_fmt(res.sqrt_tau_mean)}",
        f"tau_max={_fmt(res.tau_max)}",
        f"negativity={_fmt(res.negativity)}",
        f"fidelity={_fmt(res.fidelity)}",
        f"regime={res.regime.value}",
        f"flags={';'.join(res.flags)}",
    ]


def _row_config(cfg: ScenarioConfig, parameter: str, x: float) -> ScenarioConfig:
    if parameter == "altitude_m":
        return cfg.with_(altitude=float(x), station_altitude=None)
    return cfg.with_(distance=float(x), station_altitude=None)


def sweep_rows(cfg: ScenarioConfig, spec: SweepSpec) -> list[list[str]]:
    rows = []
    for x in spec.grid():
        r = evaluate(_row_config(cfg, spec.parameter, x))
        rows.append(
            [_fmt(x), _fmt(r.tau_mean), _fmt(r.sqrt_tau_mean), _fmt(r.tau_max), _fmt(r.negativity), _fmt(r.fidelity), r.regime.value, ";".join(r.flags)]
        )
    return rows


def _write_atomic(path: str, text: str) -> None:
    """Write ``text`` to ``path``; on any failure no partial file is left behind."""
    tmp = f"{path}.partial"
    try:
        with open(tmp, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def _csv_text(comments: list[str], header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def run_sweep(cfg: ScenarioConfig, spec: SweepSpec, path: str) -> None:
    comments = describe(cfg) + [f"sweep = {spec.parameter} {spec.start!r}..{spec.stop!r} {spec.points} {spec.spacing}"]
    # rows are computed before anything is written, so a failure leaves no file
    text = _csv_text(comments, SWEEP_HEADER, sweep_rows(cfg, spec))
    _write_atomic(path, text)


def cmd_link(args) -> int:
    cfg = build_scenario(read_config(args.config, args.set))
    for line in describe(cfg):
        print(f"# {line}")
    for line in _result_lines(evaluate(cfg)):
        print(line)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cp = read_config(args.config, args.set)
    cfg = build_scenario(cp)
    spec = build_sweep(cp)
    run_sweep(cfg, spec, args.output)
    print(f"wrote {spec.points} rows to {args.output}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    cp = read_config(args.config, args.set)
    cfg = build_scenario(cp)
    opt = cp["optimize"] if cp.has_section("optimize") else {}
    objective = args.objective or opt.get("objective", "fidelity")
    if args.heights:
        raw_heights = args.heights
    elif "heights_m" in opt:
        raw_heights = opt["heights_m"]
    else:
        raw_heights = repr(cfg.altitude)
    heights = [_float("optimize", "heights_m", h) for h in raw_heights.replace(",", " ").split()]
    rows = []
    flagged = []
    for h in heights:
        key = "distance" if cfg.kind is ScenarioKind.MICROWAVE_SLANT else "altitude"
        res = optimize_station(cfg.with_(**{key: h, "station_altitude": None}), objective)
        rows.append([_fmt(h), _fmt(res.position), _fmt(res.value)])
        if res.flags:
            flagged.append(f"total_height {h!r}: {';'.join(res.flags)}")
    text = _csv_text(describe(cfg) + [f"objective = {objective}"] + flagged, ["total_height", "optimal_position", "objective_value"], rows)
    if args.output:
        _write_atomic(args.output, text)
    else:
        sys.stdout.write(text)
    for line in flagged:
        log.warning("degenerate optimum at %s", line)
    return EXIT_OK


def cmd_thresholds(args) -> int:
    st = gcv.tmsv(args.squeezing)
    n_mode = mode_occupancy(args.wavelength_m, args.temperature_k)
    n_rx = mean_thermal_photons_microwave(args.field_of_view_sr, args.aperture_m, args.wavelength_m, args.temperature_k)
    print(f"mode_occupancy={_fmt(n_mode)}")
    print(f"thermal_photons={_fmt(n_rx)}")
    for label, n in (("mode", n_mode), ("receiver", n_rx)):
        m = 1.0 + 2.0 * n
        print(f"threshold_asym_{label}={_fmt(gcv.entanglement_threshold_asym(st.a, st.c, m))}")
        print(f"threshold_sym_{label}={_fmt(gcv.entanglement_threshold_sym(st.a, st.c, m))}")
    return EXIT_OK


def cmd_validate(args) -> int:
    from . import acceptance

    numbers = args.only or [n for n, _, _ in acceptance.CRITERIA]
    ok = True
    for n in numbers:
        check = acceptance.run(n)
        print(check.line(), flush=True)
        ok &= check.passed
    return EXIT_OK if ok else EXIT_VALIDATION


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cvlink", description="Gaussian entanglement and teleportation over free-space links.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("config", nargs="?", help="INI config file")
        sp.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE", help="override a config key")

    sp = sub.add_parser("link", help="evaluate a single link")
    with_config(sp)
    sp.set_defaults(func=cmd_link)

    sp = sub.add_parser("sweep", help="sweep altitude or distance to CSV")
    with_config(sp)
    sp.add_argument("-o", "--output", required=True, help="CSV path")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("optimize", help="optimal intermediate station/lens position")
    with_config(sp)
    sp.add_argument("--objective", choices=["negativity", "fidelity", "tau_mean"])
    sp.add_argument("--heights", help="total heights (m), comma or space separated")
    sp.add_argument("-o", "--output", help="CSV path (stdout if omitted)")
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("thresholds", help="microwave thermal photons and entanglement thresholds")
    sp.add_argument("--wavelength-m", type=float, default=0.06)
    sp.add_argument("--temperature-k", type=float, default=288.0)
    sp.add_argument("--field-of-view-sr", type=float, default=1e-4)
    sp.add_argument("--aperture-m", type=float, default=2.0)
    sp.add_argument("--squeezing", type=float, default=1.0)
    sp.set_defaults(func=cmd_thresholds)

    sp = sub.add_parser("validate", help="run the acceptance checks")
    sp.add_argument("--only", type=int, action="append", metavar="N", help="run criterion N (repeatable)")
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except DomainError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CvlinkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
