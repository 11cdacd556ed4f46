"""
Scenario configs, named presets, pipeline runs, sweeps and CSV output.

A config is flat INI-style text with three sections::

    [chain]
    n_sites = 2
    heisenberg_GHz = 1.0      # 8J/h for two sites, 6J/h for three
    splitting_GHz = 1.5       # 2B/h

    [bath]
    temperature_GHz = 0.3     # k_B T / h
    radius_m = 10 um
    current_A = 3 uA
    density_kg_m3 = 5 g/cm3
    speed_m_s = 5 km/s
    spacing_over_R = 4

    [run]
    t_max_ns = 3e6
    coupling_mode = auto
    initial_basis = computational
    initial_state = 0, 0, 0, 1

Numbers may carry a unit suffix matching the key's dimension.
"""

import configparser
import csv
import dataclasses
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import dynamics as dyn
from . import entanglement as ent
from . import phonon_bath as pb
from . import redfield as rf
from .spin_chain import (ChainSpec, EigenSystem, eigensystem,
                         interaction_operators_eigen)

NORM_TOL = 1e-6
OUTPUT_SAMPLES = 1000


class ConfigError(ValueError):
    """Invalid scenario config; ``key`` names the offending entry."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


_LENGTH = {"m": "1", "cm": "1e-2", "mm": "1e-3", "um": "1e-6", "µm": "1e-6",
           "μm": "1e-6", "nm": "1e-9"}
_CURRENT = {"A": "1", "mA": "1e-3", "uA": "1e-6", "µA": "1e-6",
            "μA": "1e-6", "nA": "1e-9"}
_DENSITY = {"kg/m3": "1", "kg/m^3": "1", "g/cm3": "1e3", "g/cm^3": "1e3"}
_SPEED = {"m/s": "1", "km/s": "1e3"}
_FREQ = {"GHz": "1", "MHz": "1e-3", "kHz": "1e-6", "Hz": "1e-9"}
_TIME = {"ns": "1", "us": "1e3", "µs": "1e3", "μs": "1e3", "ms": "1e6",
         "s": "1e9"}

# key -> (attribute, kind, units, required)
_SCHEMA = {
    "chain": {
        "n_sites": ("n_sites", "int", None, True),
        "heisenberg_GHz": ("heisenberg_ghz", "float", _FREQ, True),
        "splitting_GHz": ("splitting_ghz", "float", _FREQ, True),
    },
    "bath": {
        "temperature_GHz": ("temperature_ghz", "float", _FREQ, True),
        "radius_m": ("radius_m", "float", _LENGTH, True),
        "current_A": ("current_a", "float", _CURRENT, True),
        "density_kg_m3": ("density_kg_m3", "float", _DENSITY, False),
        "speed_m_s": ("speed_m_s", "float", _SPEED, False),
        "spacing_over_R": ("spacing_over_r", "float", None, False),
    },
    "run": {
        "t_max_ns": ("t_max_ns", "float", _TIME, True),
        "dt_ns": ("dt_ns", "float", _TIME, False),
        "output_stride": ("output_stride", "int", None, False),
        "coupling_mode": ("coupling_mode", "str", None, False),
        "initial_basis": ("initial_basis", "str", None, False),
        "initial_state": ("initial_state", "amplitudes", None, True),
        "coherences": ("coherences", "pairs", None, False),
        "eof_pair": ("eof_pair", "pair", None, False),
    },
}
_SCHEMA_ATTR = {key: attr for sec in _SCHEMA.values()
                for key, (attr, *_rest) in sec.items()}
# zero allowed: B >= 0
_NON_NEGATIVE = {"splitting_ghz"}
SWEEPABLE = ("heisenberg_GHz", "splitting_GHz", "temperature_GHz", "radius_m",
             "current_A", "density_kg_m3", "speed_m_s", "spacing_over_R",
             "t_max_ns")


@dataclass(frozen=True)
class ScenarioConfig:
    """Scenario parameters in config units.

    ``heisenberg_ghz`` is 8J/h (two sites) or 6J/h (three), ``splitting_ghz``
    is 2B/h and ``temperature_ghz`` is k_B T / h.  Bath lengths, currents
    and so on are SI.  Pairs are 1-based eigenstate labels.
    """

    n_sites: int
    heisenberg_ghz: float
    splitting_ghz: float
    temperature_ghz: float
    radius_m: float
    current_a: float
    t_max_ns: float
    initial_state: tuple
    density_kg_m3: float = 5.0e3
    speed_m_s: float = 5.0e3
    spacing_over_r: float = 4.0
    dt_ns: Optional[float] = None
    output_stride: Optional[int] = None
    coupling_mode: str = "auto"
    initial_basis: str = "computational"
    coherences: Optional[tuple] = None
    eof_pair: Optional[tuple] = None

    def chain_spec(self) -> ChainSpec:
        return ChainSpec.from_ghz(self.n_sites, self.heisenberg_ghz,
                                  self.splitting_ghz)

    def bath_spec(self) -> pb.BathSpec:
        return pb.BathSpec(temperature=self.temperature_ghz,
                           ring_radius=self.radius_m,
                           current=self.current_a,
                           mass_density=self.density_kg_m3,
                           sound_speed=self.speed_m_s,
                           spacing=self.spacing_over_r * self.radius_m)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)


def _number(key: str, raw: str, units: Optional[dict]) -> Decimal:
    text = raw.strip()
    parts = text.split(None, 1)
    num, unit = (parts[0], parts[1].strip()) if len(parts) == 2 else (text, "")
    try:
        value = Decimal(num)
    except InvalidOperation:
        raise ConfigError(key, f"cannot parse number {raw!r}") from None
    if unit:
        if units is None or unit not in units:
            raise ConfigError(key, f"unit {unit!r} not valid here")
        value *= Decimal(units[unit])
    return value


def _amplitudes(key: str, raw: str) -> tuple:
    try:
        amps = tuple(complex(tok.replace(" ", ""))
                     for tok in raw.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(key, f"cannot parse amplitudes {raw!r}") from None
    if not amps:
        raise ConfigError(key, "no amplitudes given")
    return tuple(a.real if a.imag == 0 else a for a in amps)


def _pair(key: str, raw: str) -> tuple[int, int]:
    try:
        a, d = (int(x) for x in raw.strip().split("-"))
    except ValueError:
        raise ConfigError(key, f"pair must look like 'a-d', got {raw!r}") \
            from None
    if a == d or a < 1 or d < 1:
        raise ConfigError(key, f"bad pair {raw!r}")
    return (min(a, d), max(a, d))


def _normalize(amps: tuple) -> tuple:
    norm = math.sqrt(sum(abs(a) ** 2 for a in amps))
    if norm == 0:
        raise ConfigError("initial_state", "zero vector")
    off = abs(norm - 1.0)
    if off <= 1e-12:
        return amps
    if off >= NORM_TOL:
        raise ConfigError("initial_state",
                          f"amplitudes have norm {norm:.9g}, not 1")
    warnings.warn(f"initial_state norm {norm:.12g}; renormalized",
                  stacklevel=3)
    return tuple(a / norm for a in amps)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate scenario text.

    Raises
    ------
    ConfigError
        Unknown section or key, missing required key, malformed or
        non-positive value.  The error's ``key`` attribute names the entry.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"),
                                   interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError("<syntax>", str(exc)) from None
    for sec in cp.sections():
        if sec not in _SCHEMA:
            raise ConfigError(sec, "unknown section")
    values = {}
    for sec, keys in _SCHEMA.items():
        present = dict(cp.items(sec)) if cp.has_section(sec) else {}
        for key in present:
            if key not in keys:
                raise ConfigError(key, f"unknown key in [{sec}]")
        for key, (attr, kind, units, required) in keys.items():
            if key not in present:
                if required:
                    raise ConfigError(key, f"missing from [{sec}]")
                continue
            raw = present[key]
            if kind in ("float", "int"):
                num = _number(key, raw, units)
                if kind == "int":
                    if num != num.to_integral_value():
                        raise ConfigError(key, "must be an integer")
                    val = int(num)
                else:
                    val = float(num)
                if not (val >= 0 if attr in _NON_NEGATIVE else val > 0):
                    raise ConfigError(key, f"must be positive, got {raw!r}")
            elif kind == "amplitudes":
                val = _amplitudes(key, raw)
            elif kind == "pairs":
                val = tuple(_pair(key, p) for p in raw.split(",") if p.strip())
            elif kind == "pair":
                val = _pair(key, raw)
            else:
                val = raw.strip()
            values[attr] = val

    n = values["n_sites"]
    if not 1 <= n <= 4:
        raise ConfigError("n_sites", "must be between 1 and 4")
    mode = values.get("coupling_mode", "auto")
    if mode not in rf.COUPLING_MODES:
        raise ConfigError("coupling_mode", f"must be one of {rf.COUPLING_MODES}")
    if values.get("initial_basis", "computational") not in ("eigen",
                                                            "computational"):
        raise ConfigError("initial_basis", "must be eigen or computational")
    dim = 2 ** n
    if len(values["initial_state"]) != dim:
        raise ConfigError("initial_state",
                          f"need {dim} amplitudes, got "
                          f"{len(values['initial_state'])}")
    values["initial_state"] = _normalize(values["initial_state"])
    for key in ("coherences", "eof_pair"):
        pairs = values.get(key)
        if pairs is None:
            continue
        flat = pairs if key == "coherences" else (pairs,)
        if any(d > dim for _, d in flat):
            raise ConfigError(key, f"label beyond {dim}")
    if "eof_pair" in values and n != 2:
        raise ConfigError("eof_pair", "only meaningful for two sites")
    return ScenarioConfig(**values)


def _fmt(v) -> str:
    if isinstance(v, complex):
        return repr(v).strip("()")
    return repr(v)


def emit_config(cfg: ScenarioConfig) -> str:
    """Config text that :func:`parse_config` maps back to ``cfg`` exactly."""
    out = io.StringIO()
    for sec, keys in _SCHEMA.items():
        out.write(f"[{sec}]\n")
        for key, (attr, kind, _units, _req) in keys.items():
            val = getattr(cfg, attr)
            if val is None:
                continue
            if kind == "amplitudes":
                text = ", ".join(_fmt(a) for a in val)
            elif kind == "pairs":
                text = ", ".join(f"{a}-{d}" for a, d in val)
            elif kind == "pair":
                text = f"{val[0]}-{val[1]}"
            elif kind == "str":
                text = val
            else:
                text = _fmt(val)
            out.write(f"{key} = {text}\n")
        out.write("\n")
    return out.getvalue()


_LARGE = "radius_m = 10 um\ncurrent_A = 3 uA\n"
_SMALL = "radius_m = 10 nm\ncurrent_A = 0.1 uA\n"
_R2 = "0.7071067811865476"


def _preset_text(n, heis, split, temp, squid, t_max, state, basis,
                 extra=""):
    return (f"[chain]\nn_sites = {n}\nheisenberg_GHz = {heis}\n"
            f"splitting_GHz = {split}\n\n"
            f"[bath]\ntemperature_GHz = {temp}\n{squid}"
            f"density_kg_m3 = 5 g/cm3\nspeed_m_s = 5 km/s\n"
            f"spacing_over_R = 4\n\n"
            f"[run]\nt_max_ns = {t_max}\ncoupling_mode = auto\n"
            f"initial_basis = {basis}\ninitial_state = {state}\n{extra}")


# t_max gives the slowest rate that shapes each preset >= 3 e-foldings
PRESETS = {
    "fig1": _preset_text(2, 1.0, 1.5, 0.3, _LARGE, "3e6 ns", "0, 0, 0, 1",
                         "computational"),
    "fig2": _preset_text(3, 1.0, 1.5, 0.3, _LARGE, "2e6 ns",
                         f"0, 0, 0, {_R2}, 0, 0, {_R2}, 0", "eigen",
                         "coherences = 1-4, 4-7\n"),
    "fig3": _preset_text(2, 1.0, 1.5, 0.3, _LARGE, "3e6 ns",
                         f"{_R2}, 0, 0, {_R2}", "computational",
                         "eof_pair = 1-4\n"),
    "fig4": _preset_text(2, 1.0, 0.5, 0.1, _LARGE, "1.5e6 ns", "0, 1, 0, 0",
                         "computational", "eof_pair = 2-3\n"),
    "fig5": _preset_text(2, 1.0, 1.5, 0.3, _SMALL, "5e16 ns",
                         "0.5, 0.5, 0.5, 0.5", "eigen"),
    "fig6": _preset_text(2, 1.0, 1.0, 0.2, _LARGE, "2e6 ns",
                         "0.5, 0.5, 0.5, 0.5", "eigen"),
    "fig7": _preset_text(3, 1.0, 1.5, 0.3, _SMALL, "4e17 ns",
                         f"0, 0, 0, 0, {_R2}, {_R2}, 0, 0", "eigen",
                         "coherences = 2-3, 5-6\n"),
    # |up up down> with |up> = (|0> + |1>)/sqrt2, |down> = (|0> - |1>)/sqrt2
    "fig8": _preset_text(3, 1.0, 1.0, 0.1, _LARGE, "1e6 ns",
                         "0.3535533905932738, -0.3535533905932738, "
                         "0.3535533905932738, -0.3535533905932738, "
                         "0.3535533905932738, -0.3535533905932738, "
                         "0.3535533905932738, -0.3535533905932738",
                         "computational"),
}


def preset(name: str) -> ScenarioConfig:
    """Scenario for one of the presets ``fig1`` ... ``fig8``."""
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from "
                       f"{', '.join(PRESETS)}")
    return parse_config(PRESETS[name])


@dataclass
class RunReport:
    """Everything a run produced besides the trajectory itself."""

    label: str
    config: ScenarioConfig
    energies_ghz: np.ndarray
    regimes: dict
    markov: dict
    components: list
    edges: list
    rates: rf.RateTable
    transfer_rates: np.ndarray
    stationary_populations: np.ndarray
    diagnostics: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    csv_path: Optional[Path] = None
    report_path: Optional[Path] = None
    status: str = "ok"

    def key_values(self) -> dict:
        kv = {
            "label": self.label,
            "status": self.status,
            "n_sites": self.config.n_sites,
            "coupling_mode": self.config.coupling_mode,
            "energies_GHz": " ".join(f"{e:.12g}" for e in self.energies_ghz),
        }
        for (j, k, w), tag in sorted(self.regimes.items()):
            kv[f"regime.{j}-{k}@{w / (2 * np.pi):.9g}GHz"] = tag
        kv["markov_min_ratio"] = f"{self.markov.get('min_ratio', 0.0):.6g}"
        kv["markov_valid"] = str(self.markov.get("valid", False)).lower()
        kv["network_components"] = " ".join(
            "(" + ",".join(map(str, c)) + ")" for c in self.components)
        kv["network_edges"] = " ".join(f"{a}-{b}" for a, b in self.edges)
        kv["stationary_populations"] = " ".join(
            f"{p:.12g}" for p in self.stationary_populations)
        for name in ("max_trace_drift", "max_hermiticity_drift",
                     "min_min_eigenvalue"):
            if name in self.diagnostics:
                kv[name] = f"{self.diagnostics[name]:.6g}"
        kv["flags"] = ",".join(self.flags) if self.flags else "none"
        if self.csv_path is not None:
            kv["trajectory_csv"] = str(self.csv_path)
        return kv

    def to_text(self) -> str:
        d = len(self.energies_ghz)
        lines = [f"run {self.label}: {self.status}", "",
                 "eigenenergies (GHz): "
                 + ", ".join(f"psi{i + 1}={e:.6g}"
                             for i, e in enumerate(self.energies_ghz)),
                 "", "population transfer rates (1/ns), row = to, col = from:"]
        for a in range(d):
            lines.append("  " + " ".join(f"{self.transfer_rates[a, b]:11.4e}"
                                         for b in range(d)))
        lines += ["", "coupling regimes:"]
        for (j, k, w), tag in sorted(self.regimes.items()):
            lines.append(f"  sites {j},{k} at {w / (2 * np.pi):.6g} GHz: {tag}")
        lines += ["", "network components: "
                  + " ".join("{" + ",".join(map(str, c)) + "}"
                             for c in self.components)]
        if self.flags:
            lines.append("trajectory flagged: " + ", ".join(self.flags))
        lines += ["", "# key = value"]
        lines += [f"{k} = {v}" for k, v in self.key_values().items()]
        return "\n".join(lines) + "\n"


def _transfer_matrix(es: EigenSystem, rates: rf.RateTable) -> np.ndarray:
    x = interaction_operators_eigen(es)
    d = es.dim
    m = np.zeros((d, d))
    for a in range(d):
        for b in range(d):
            if a != b:
                m[a, b] = rf.transfer_rate(x, rates.rates, a, b)
    return m


def analyse(cfg: ScenarioConfig, label: str = "scenario"
            ) -> tuple[EigenSystem, rf.RateTable, rf.Generator, RunReport]:
    """Chain, bath and generator stages without time integration."""
    es = eigensystem(cfg.chain_spec())
    bath = cfg.bath_spec()
    rates = rf.transition_rates(es, bath, cfg.coupling_mode)
    gen = rf.build_generator(es, rates, rf.secular_filter(es))
    net = rf.rate_network(gen)
    rho0 = dyn.DensityMatrix.from_amplitudes(cfg.initial_state, es,
                                             cfg.initial_basis)
    stat = rf.stationary_state(gen, np.asarray(rho0))
    report = RunReport(
        label=label, config=cfg,
        energies_ghz=es.energies / (2 * np.pi),
        regimes=rates.regimes,
        markov=pb.markov_validity(bath, cfg.n_sites, cfg.t_max_ns),
        components=net.labels(),
        edges=sorted(net.edge_labels()),
        rates=rates,
        transfer_rates=_transfer_matrix(es, rates),
        stationary_populations=np.real(np.diag(stat)))
    return es, rates, gen, report


def _default_eof_pair(states: np.ndarray) -> tuple[int, int]:
    mags = np.abs(states).max(axis=0)
    iu = np.triu_indices(states.shape[1], 1)
    k = int(np.argmax(mags[iu]))
    return int(iu[0][k]), int(iu[1][k])


def trajectory_table(traj: dyn.Trajectory, es: EigenSystem,
                     pairs: Sequence[tuple[int, int]],
                     eof_pair: Optional[tuple[int, int]] = None
                     ) -> tuple[list[str], np.ndarray]:
    """CSV header and rows; pairs are 0-based."""
    d = es.dim
    header = ["time_ns"] + [f"pop_{i + 1}" for i in range(d)]
    cols = [traj.times]
    cols += [np.real(traj.states[:, i, i]) for i in range(d)]
    for a, b in pairs:
        header += [f"re_c_{a + 1}_{b + 1}", f"im_c_{a + 1}_{b + 1}"]
        cols += [np.real(traj.states[:, a, b]), np.imag(traj.states[:, a, b])]
    if d == 4:
        e = es.energies
        phase = np.exp(-1j * (e[:, None] - e[None, :])
                       * traj.times[:, None, None])
        schr = traj.states * phase
        pair = eof_pair if eof_pair is not None \
            else _default_eof_pair(traj.states)
        eof, upper, lower, avg = ent.eof_bounds_batch(schr, es, pair)
        header += ["eof", "eof_upper", "eof_lower", "eof_avg"]
        cols += [eof, upper, lower, avg]
    return header, np.column_stack(cols)


def write_csv(path: Path, header: list[str], rows: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow(["%.17g" % v for v in row])


def run_scenario(cfg: ScenarioConfig, out_dir, label: str = "scenario"
                 ) -> RunReport:
    """Full pipeline; writes ``trajectory.csv`` and ``report.txt``.

    Raises
    ------
    IntermediateRegime
        A transition frequency falls between the collective and independent
        coupling regimes.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    es, rates, gen, report = analyse(cfg, label)
    rho0 = dyn.DensityMatrix.from_amplitudes(cfg.initial_state, es,
                                             cfg.initial_basis)
    traj = dyn.evolve(gen, rho0.data, cfg.t_max_ns, dt=cfg.dt_ns,
                      stride=cfg.output_stride, samples=OUTPUT_SAMPLES)
    if cfg.coherences is not None:
        pairs = [(a - 1, b - 1) for a, b in cfg.coherences]
    else:
        pairs = list(zip(*np.triu_indices(es.dim, 1)))
        pairs = [(int(a), int(b)) for a, b in pairs]
    eof_pair = None if cfg.eof_pair is None \
        else (cfg.eof_pair[0] - 1, cfg.eof_pair[1] - 1)
    header, rows = trajectory_table(traj, es, pairs, eof_pair)
    report.csv_path = out / "trajectory.csv"
    write_csv(report.csv_path, header, rows)
    report.diagnostics = {k: v for k, v in traj.diagnostics.items()
                          if np.isscalar(v)}
    report.flags = list(traj.flags)
    report.report_path = out / "report.txt"
    report.report_path.write_text(report.to_text())
    return report


def sweep(cfg: ScenarioConfig, axis: str, values: Sequence[float], out_dir,
          max_workers: Optional[int] = None) -> list[RunReport]:
    """Independent runs over one scalar key, one subdirectory per value.

    A value that lands in the intermediate coupling regime yields a report
    with ``status`` starting with ``aborted`` instead of stopping the sweep.
    """
    if axis not in SWEEPABLE:
        raise ConfigError(axis, f"not sweepable; choose from {SWEEPABLE}")
    attr = _SCHEMA_ATTR[axis]
    out = Path(out_dir)
    jobs = []
    for i, v in enumerate(values):
        sub = cfg.replace(**{attr: float(v)})
        # re-validate through the text form
        sub = parse_config(emit_config(sub))
        jobs.append((sub, out / f"{i:03d}_{axis}_{float(v):.6g}",
                     f"{axis}={float(v):.6g}"))

    def one(job):
        sub, path, label = job
        try:
            return run_scenario(sub, path, label)
        except pb.IntermediateRegime as exc:
            path.mkdir(parents=True, exist_ok=True)
            (path / "report.txt").write_text(
                f"run {label}: aborted\n{exc}\n\n# key = value\n"
                f"label = {label}\nstatus = aborted\n")
            return RunReport(label, sub, np.array([]), {}, {}, [], [],
                             None, np.zeros((0, 0)), np.array([]),
                             report_path=path / "report.txt",
                             status=f"aborted: {exc}")

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(one, jobs))

