"""RunConfig: lettura del file JSON, validazione e precedenza flag > ambiente > file > default.

Formato (tutte le sezioni opzionali):

    {
      "medium":   {"radius": 1, "omega": 5,
                   "eps_m": 1, "mu_m": 1,
                   "eps_c": {"re": -1.04018, "im": 4e-5} | {"drude": {...}},
                   "mu_c": 1},
      "incident": {"kind": "plane_wave", "amplitude": [[4, 0], [-4, 0], [0, 0]], "direction": [1, 1, 0]}
                | {"kind": "closed_form_vortex", "amplitude": 100}
                | {"kind": "spectral_multipole", "channel": 1, "n": 40, "m": 0, "amplitude": {"re": 1, "im": 0}},
      "numerics": {"n_max": 60, "quad_order": null, "delta_min": 0.02, "theta_big": 10, "theta_small": 0.01},
      "scan":     {"mode": "resonance", "channel": 1, "source_channels": [3], "n_range": [1, 60],
                   "sweep": {"re_eps_c": [-1.2, -0.9, 1e-4]}},
      "output":   {"format": "csv", "path": "out/spectrum.csv"}
    }

I numeri complessi si scrivono come numero reale, {"re", "im"} oppure [re, im].
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from plasmon.errors import ConfigError, InadmissibleConfig
from plasmon.tasks.design import SWEEP_KEYS, DrudeParams, drude_forward, sweep_axis
from plasmon.tasks.harmonics import HarmonicIndex
from plasmon.tasks.scattering import IncidentField
from plasmon.tasks.spectrum import MediumConfig
from plasmon.utils import DELTA_MIN, N_MAX, ORDER_LIMIT, THETA_BIG, THETA_SMALL, THREADS, env_overrides

_SECTIONS = {"medium", "incident", "numerics", "scan", "output"}
_MEDIUM_KEYS = {"radius", "omega", "eps_m", "mu_m", "eps_c", "mu_c"}
_NUMERIC_KEYS = {"n_max", "quad_order", "delta_min", "theta_big", "theta_small"}
_SCAN_KEYS = {"mode", "channel", "source_channels", "n_range", "sweep"}
_OUTPUT_KEYS = {"format", "path"}
_DRUDE_KEYS = {"omega_p_sq", "tau_damp", "omega0", "filling", "eps0", "mu0"}
_INCIDENT_KEYS = {
    "plane_wave": {"kind", "amplitude", "direction"},
    "closed_form_vortex": {"kind", "amplitude"},
    "spectral_multipole": {"kind", "channel", "n", "m", "amplitude"},
}

# variabili d'ambiente (PLASMON_*) che entrano nella RunConfig
_ENV_NUMERICS = {"n_max": int, "quad_order": int, "delta_min": float, "theta_big": float, "theta_small": float}


@dataclass(frozen=True)
class NumericsConfig:
    n_max: int = N_MAX
    quad_order: int | None = None
    delta_min: float = DELTA_MIN
    theta_big: float = THETA_BIG
    theta_small: float = THETA_SMALL


@dataclass(frozen=True)
class ScanConfig:
    mode: str = "resonance"
    channel: int = 1
    source_channels: tuple[int, ...] = (3,)
    n_range: tuple[int, int] = (1, 60)
    sweep: dict = field(default_factory=dict)   # asse -> (lo, hi, step)

    def axes(self) -> dict:
        return {k: sweep_axis(*v) for k, v in self.sweep.items()}


@dataclass(frozen=True)
class OutputConfig:
    format: str = "csv"
    path: str | None = None


@dataclass(frozen=True)
class RunConfig:
    medium: MediumConfig = field(default_factory=MediumConfig)
    incident: IncidentField | None = None
    numerics: NumericsConfig = field(default_factory=NumericsConfig)
    scan: ScanConfig = field(default_factory=ScanConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    threads: int = THREADS
    seed: int = 0
    source: str | None = None


# -------------------------
# Helpers di parsing
# -------------------------
class _Locator:
    """Numero di riga di una chiave nel testo sorgente (prima occorrenza)."""

    def __init__(self, text: str):
        self.lines = text.splitlines()

    def line_of(self, key: str) -> int | None:
        pat = re.compile(r'"' + re.escape(key) + r'"\s*:')
        for i, line in enumerate(self.lines, start=1):
            if pat.search(line):
                return i
        return None


def _reject_unknown(obj: dict, allowed: set[str], where: str, loc: _Locator) -> None:
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"chiave sconosciuta '{key}' in {where}", loc.line_of(key))


def _section(raw: dict, name: str, loc: _Locator) -> dict:
    value = raw.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"la sezione '{name}' deve essere un oggetto", loc.line_of(name))
    return value


def _complex(value, key: str, loc: _Locator) -> complex:
    if isinstance(value, bool):
        raise ConfigError(f"'{key}' non e' un numero", loc.line_of(key))
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, dict) and set(value) <= {"re", "im"} and "re" in value:
        return complex(float(value["re"]), float(value.get("im", 0.0)))
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        return complex(value[0], value[1])
    raise ConfigError(f"'{key}' non e' un numero complesso valido", loc.line_of(key))


def _number(value, key: str, loc: _Locator, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"'{key}' deve essere numerico", loc.line_of(key))
    if kind is int and int(value) != value:
        raise ConfigError(f"'{key}' deve essere intero", loc.line_of(key))
    return kind(value)


def _drude(value: dict, loc: _Locator) -> DrudeParams:
    _reject_unknown(value, _DRUDE_KEYS, "drude", loc)
    try:
        return DrudeParams(**{k: float(v) for k, v in value.items()})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"parametri di Drude non validi: {exc}", loc.line_of("drude")) from exc


def _material(value, key: str, omega: float, loc: _Locator) -> complex:
    if isinstance(value, dict) and "drude" in value:
        _reject_unknown(value, {"drude"}, key, loc)
        eps_c, mu_c = drude_forward(_drude(value["drude"], loc), omega)
        return eps_c if key.startswith("eps") else mu_c
    return _complex(value, key, loc)


def _medium(sec: dict, loc: _Locator) -> MediumConfig:
    _reject_unknown(sec, _MEDIUM_KEYS, "medium", loc)
    base = MediumConfig()
    omega = _number(sec.get("omega", base.omega), "omega", loc)
    values = {
        "R": _number(sec.get("radius", base.R), "radius", loc),
        "omega": omega,
    }
    for key in ("eps_m", "mu_m", "eps_c", "mu_c"):
        if key in sec:
            values[key] = _material(sec[key], key, omega, loc)
    try:
        return MediumConfig(**values)
    except InadmissibleConfig:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"mezzo non valido: {exc}", loc.line_of("medium")) from exc


def _incident(sec: dict, loc: _Locator) -> IncidentField | None:
    if not sec:
        return None
    kind = sec.get("kind")
    if kind not in _INCIDENT_KEYS:
        raise ConfigError(f"tipo di campo incidente sconosciuto: {kind!r}", loc.line_of("kind"))
    _reject_unknown(sec, _INCIDENT_KEYS[kind], "incident", loc)
    try:
        if kind == "plane_wave":
            amp = [_complex(v, "amplitude", loc) for v in sec.get("amplitude", [])]
            if len(amp) != 3:
                raise ConfigError("amplitude deve avere 3 componenti", loc.line_of("amplitude"))
            return IncidentField.plane_wave(amp, sec.get("direction", [0, 0, 1]))
        if kind == "closed_form_vortex":
            return IncidentField.closed_form_vortex(_number(sec.get("amplitude", 100.0), "amplitude", loc))
        idx = HarmonicIndex(_number(sec.get("n", 1), "n", loc, int), _number(sec.get("m", 0), "m", loc, int))
        return IncidentField.spectral_multipole(
            _number(sec.get("channel", 1), "channel", loc, int), idx, _complex(sec.get("amplitude", 1.0), "amplitude", loc)
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"campo incidente non valido: {exc}", loc.line_of("incident")) from exc


def _numerics(sec: dict, loc: _Locator) -> NumericsConfig:
    _reject_unknown(sec, _NUMERIC_KEYS, "numerics", loc)
    out = NumericsConfig()
    for key, kind in _ENV_NUMERICS.items():
        if key in sec and sec[key] is not None:
            out = replace(out, **{key: _number(sec[key], key, loc, kind)})
    return out


def _scan(sec: dict, loc: _Locator) -> ScanConfig:
    _reject_unknown(sec, _SCAN_KEYS, "scan", loc)
    out = ScanConfig()
    if "mode" in sec:
        if sec["mode"] not in ("resonance", "cloaking"):
            raise ConfigError(f"modalita' di scansione sconosciuta: {sec['mode']!r}", loc.line_of("mode"))
        out = replace(out, mode=sec["mode"])
    if "channel" in sec:
        out = replace(out, channel=_number(sec["channel"], "channel", loc, int))
    if "source_channels" in sec:
        out = replace(out, source_channels=tuple(_number(c, "source_channels", loc, int) for c in sec["source_channels"]))
    if "n_range" in sec:
        lo, hi = (_number(v, "n_range", loc, int) for v in sec["n_range"])
        out = replace(out, n_range=(lo, hi))
    if "sweep" in sec:
        sweep = {}
        _reject_unknown(sec["sweep"], set(SWEEP_KEYS), "sweep", loc)
        for key, triple in sec["sweep"].items():
            if not isinstance(triple, list) or len(triple) != 3:
                raise ConfigError(f"l'asse '{key}' richiede [lo, hi, step]", loc.line_of(key))
            sweep[key] = tuple(_number(v, key, loc) for v in triple)
            if sweep[key][2] <= 0:
                raise ConfigError(f"passo non positivo per l'asse '{key}'", loc.line_of(key))
        out = replace(out, sweep=sweep)
    return out


def _output(sec: dict, loc: _Locator) -> OutputConfig:
    _reject_unknown(sec, _OUTPUT_KEYS, "output", loc)
    fmt = sec.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"formato di output sconosciuto: {fmt!r}", loc.line_of("format"))
    return OutputConfig(format=fmt, path=sec.get("path"))


# -------------------------
# API
# -------------------------
def parse_run_config(text: str, source: str | None = None) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"JSON non valido: {exc.msg}", exc.lineno) from exc
    if not isinstance(raw, dict):
        raise ConfigError("il file di configurazione deve contenere un oggetto", 1)
    loc = _Locator(text)
    _reject_unknown(raw, _SECTIONS, "radice", loc)
    return RunConfig(
        medium=_medium(_section(raw, "medium", loc), loc),
        incident=_incident(_section(raw, "incident", loc), loc),
        numerics=_numerics(_section(raw, "numerics", loc), loc),
        scan=_scan(_section(raw, "scan", loc), loc),
        output=_output(_section(raw, "output", loc), loc),
        source=source,
    )


def load_run_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"file di configurazione non trovato: {p}")
    return parse_run_config(p.read_text(encoding="utf-8"), source=str(p))


def apply_environment(cfg: RunConfig, env: dict[str, str] | None = None) -> RunConfig:
    """Le variabili PLASMON_* battono il file."""
    env = env_overrides() if env is None else env
    numerics = cfg.numerics
    for key, kind in _ENV_NUMERICS.items():
        if key in env:
            try:
                numerics = replace(numerics, **{key: kind(env[key])})
            except ValueError as exc:
                raise ConfigError(f"PLASMON_{key.upper()} non valido: {env[key]!r}") from exc
    out = replace(cfg, numerics=numerics)
    if "threads" in env:
        out = replace(out, threads=int(env["threads"]))
    if "seed" in env:
        out = replace(out, seed=int(env["seed"]))
    return out


def apply_flags(cfg: RunConfig, **flags) -> RunConfig:
    """Flag della CLI (None = non passato); precedenza massima."""
    numerics = cfg.numerics
    if flags.get("n_max") is not None:
        numerics = replace(numerics, n_max=int(flags["n_max"]))
    out = replace(cfg, numerics=numerics)
    if flags.get("threads") is not None:
        out = replace(out, threads=int(flags["threads"]))
    if flags.get("seed") is not None:
        out = replace(out, seed=int(flags["seed"]))
    if flags.get("out") is not None:
        fmt = "json" if str(flags["out"]).lower().endswith(".json") else out.output.format
        out = replace(out, output=OutputConfig(format=fmt, path=str(flags["out"])))
    if flags.get("mode") is not None:
        out = replace(out, scan=replace(out.scan, mode=flags["mode"]))
    if out.numerics.n_max < 1:
        raise ConfigError(f"n_max deve essere >= 1 (value={out.numerics.n_max})")
    # le tabelle radiali dello spettro arrivano a n_max + 2
    if out.numerics.n_max + 2 > ORDER_LIMIT:
        raise ConfigError(f"n_max oltre il limite delle tabelle radiali PLASMON_ORDER_LIMIT={ORDER_LIMIT} meno 2 (value={out.numerics.n_max})")
    if out.numerics.delta_min < DELTA_MIN:
        raise ConfigError(f"delta_min sotto la fascia esclusa minima {DELTA_MIN} (value={out.numerics.delta_min})")
    return out


def resolve_run_config(path: str | Path | None, **flags) -> RunConfig:
    """default -> file -> ambiente -> flag."""
    return apply_flags(apply_environment(load_run_config(path)), **flags)
