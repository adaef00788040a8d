"""Flat ``key = value`` scenario configuration.

Keys carry dotted section prefixes (``mzm.beta1_pi_units = 0.3``). Angles may
be given in radians (``mzm.beta1``) or in units of pi (``mzm.beta1_pi_units``)
but not both. Numbers accept an SI frequency or time suffix (``7.52 GHz``).
Bands are declared as ``band.<name>.carrier`` etc. and kept in file order.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from .frontend import SAMPLING_MODES, LaserSpec, MzmSpec, PmSpec, ReceiverSpec
from .signals import SimulationGrid, on_grid
from .stimulus import SHAPINGS, SNR_REFERENCES, BandSpec, MultibandSpec

REFERENCE_CONFIG = Path(__file__).with_name("data") / "reference.cfg"


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending key."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


_SUFFIX = {
    "": 1.0, "hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9, "thz": 1e12,
    "s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "ps": 1e-12,
    "db": 1.0, "dbm": 1.0, "dbm/hz": 1.0, "v": 1.0, "rad": 1.0, "sa/s": 1.0,
    "gsa/s": 1e9,
}
_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?|[-+]?inf)\s*([A-Za-z/]*)\s*$")


def parse_number(text: str) -> float:
    m = _NUMBER.match(text)
    if not m:
        raise ValueError(f"not a number: {text!r}")
    unit = m.group(2).lower()
    if unit not in _SUFFIX:
        raise ValueError(f"unknown unit {m.group(2)!r}")
    return float(m.group(1)) * _SUFFIX[unit]


def _parse_int(text: str) -> int:
    v = parse_number(text)
    if v != int(v):
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_optional(text: str, sentinel: str):
    return None if text.strip().lower() == sentinel else parse_number(text)


@dataclass(frozen=True)
class OracleSettings:
    trials: int = 200
    max_sparsity: int = 2
    snr_db: float = 30.0
    seed: int = 7


@dataclass(frozen=True)
class SweepSettings:
    snr_list: Tuple[float, ...] = (-20.0, 0.0, 6.0, 20.0, 61.0)
    seeds: int = 20
    seed: int = 100
    probe_freq: float = 7.52e9
    required_rate: float = 0.9
    snr_reference: str = "span"


@dataclass(frozen=True)
class ScenarioConfig:
    grid: SimulationGrid = SimulationGrid()
    laser: LaserSpec = LaserSpec()
    split_ratio: float = 0.5
    pm: PmSpec = PmSpec()
    mzm: MzmSpec = MzmSpec()
    receiver: ReceiverSpec = ReceiverSpec()
    sampling: str = "literal"
    stimulus: MultibandSpec = MultibandSpec(noise_seed=1)
    k_use: int = 21
    solver: str = "omp"
    max_support: int = 4
    safety_factor: float = 2.0
    threshold: float = -88.0
    resolve_degenerate: bool = True
    oracle: OracleSettings = OracleSettings()
    sweep: SweepSettings = SweepSettings()
    output_dir: Optional[str] = None

    @property
    def compression_ratio(self) -> float:
        """Nyquist rate of the span over the ADC rate."""
        return 2.0 * self.stimulus.span / self.receiver.adc_rate

    def with_seed(self, seed: int) -> "ScenarioConfig":
        bands = tuple(replace(b, bit_seed=seed + i + 1) for i, b in enumerate(self.stimulus.bands))
        return replace(
            self,
            stimulus=replace(self.stimulus, bands=bands, noise_seed=seed),
            receiver=replace(self.receiver, phase_noise_seed=seed),
            oracle=replace(self.oracle, seed=seed),
            sweep=replace(self.sweep, seed=seed),
        )

    def with_quantization(self, enabled: bool) -> "ScenarioConfig":
        bits = self.receiver.adc_bits if enabled else None
        if enabled and bits is None:
            bits = 12
        return replace(self, receiver=replace(self.receiver, adc_bits=bits))


# key -> (parser, default)
_ANGLES = {
    "pm.beta0": 7.25 * math.pi,
    "mzm.beta1": 0.3 * math.pi,
    "mzm.bias": 0.25 * math.pi,
    "mzm.drive_phase": 0.1,
}
_SCALARS = {
    "grid.sim_rate": (parse_number, 160e9),
    "grid.n_samples": (_parse_int, 128_000),
    "laser.power_dbm": (parse_number, 16.0),
    "laser.frequency": (parse_number, 193.1e12),
    "laser.linewidth": (parse_number, 100e3),
    "laser.split_ratio": (parse_number, 0.5),
    "pm.drive_freq": (parse_number, 1e9),
    "mzm.vpi": (parse_number, 4.0),
    "mzm.insertion_loss_db": (parse_number, 5.0),
    "mzm.extinction_ratio_db": (parse_number, 30.0),
    "receiver.pd_bandwidth": (parse_number, 2.5e9),
    "receiver.lpf_cutoff": (parse_number, 2e9),
    "receiver.adc_rate": (parse_number, 4e9),
    "receiver.adc_bits": (lambda t: None if t.strip().lower() == "ideal" else _parse_int(t), 12),
    "receiver.lo_amplitude": (lambda t: _parse_optional(t, "auto"), None),
    "receiver.signal_amplitude_scale": (parse_number, 1.0),
    "receiver.differential_delay": (parse_number, 0.0),
    "receiver.phase_noise_seed": (_parse_int, 0),
    "frontend.sampling": (str.strip, "literal"),
    "stimulus.span": (parse_number, 20e9),
    "stimulus.noise_psd_dbm_hz": (lambda t: -math.inf if t.strip().lower() == "off" else parse_number(t), -146.0),
    "stimulus.target_snr_db": (parse_number, 61.0),
    "stimulus.noise_seed": (_parse_int, 1),
    "stimulus.shaping": (str.strip, "mainlobe"),
    "stimulus.signal_power_dbm": (lambda t: _parse_optional(t, "auto"), None),
    "stimulus.snr_reference": (str.strip, "span"),
    "matrix.k_use": (_parse_int, 21),
    "reconstruction.solver": (str.strip, "omp"),
    "reconstruction.max_support": (_parse_int, 4),
    "reconstruction.safety_factor": (parse_number, 2.0),
    "reconstruction.threshold_dbm": (parse_number, -88.0),
    "reconstruction.resolve_degenerate": (_parse_bool, True),
    "oracle.trials": (_parse_int, 200),
    "oracle.max_sparsity": (_parse_int, 2),
    "oracle.snr_db": (parse_number, 30.0),
    "oracle.seed": (_parse_int, 7),
    "sweep.snr_list": (lambda t: tuple(parse_number(p) for p in t.split(",") if p.strip()), (-20.0, 0.0, 6.0, 20.0, 61.0)),
    "sweep.seeds": (_parse_int, 20),
    "sweep.seed": (_parse_int, 100),
    "sweep.probe_freq": (parse_number, 7.52e9),
    "sweep.required_rate": (parse_number, 0.9),
    "sweep.snr_reference": (str.strip, "span"),
    "output.dir": (str.strip, None),
}
_BAND_FIELDS = {
    "carrier": parse_number,
    "bandwidth": parse_number,
    "relative_power_db": parse_number,
    "bit_seed": _parse_int,
}
_CHOICES = {
    "frontend.sampling": SAMPLING_MODES,
    "stimulus.shaping": SHAPINGS,
    "stimulus.snr_reference": SNR_REFERENCES,
    "sweep.snr_reference": SNR_REFERENCES,
    "reconstruction.solver": ("omp", "exhaustive"),
}
_BAND_KEY = re.compile(r"^band\.([A-Za-z0-9_-]+)\.([a-z_]+)$")


def _read_pairs(text: str) -> List[Tuple[int, str, str]]:
    pairs = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        key, value = (p.strip() for p in line.split("=", 1))
        if key in seen:
            raise ConfigError(key, "duplicate key")
        seen.add(key)
        pairs.append((lineno, key, value))
    return pairs


def parse_config(text: str) -> ScenarioConfig:
    """Build and validate a :class:`ScenarioConfig` from config text."""
    values: Dict[str, object] = {}
    angles: Dict[str, Tuple[str, float]] = {}
    bands: Dict[str, Dict[str, object]] = {}

    for _, key, raw in _read_pairs(text):
        band = _BAND_KEY.match(key)
        try:
            if band:
                name, fld = band.groups()
                if fld not in _BAND_FIELDS:
                    raise ConfigError(key, "unknown key")
                bands.setdefault(name, {})[fld] = _BAND_FIELDS[fld](raw)
            elif key in _SCALARS:
                values[key] = _SCALARS[key][0](raw)
            elif key in _ANGLES or (key.endswith("_pi_units") and key[: -len("_pi_units")] in _ANGLES):
                base = key[: -len("_pi_units")] if key.endswith("_pi_units") else key
                if base in angles:
                    raise ConfigError(key, f"{base} given twice (radians and pi units)")
                v = parse_number(raw)
                angles[base] = (key, v * math.pi if key.endswith("_pi_units") else v)
            else:
                raise ConfigError(key, "unknown key")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(key, str(exc)) from None

    def get(key):
        return values.get(key, _SCALARS[key][1])

    def angle(key):
        return angles[key][1] if key in angles else _ANGLES[key]

    for key, choices in _CHOICES.items():
        if get(key) not in choices:
            raise ConfigError(key, f"must be one of {', '.join(choices)}")

    def build(key, factory, **kw):
        try:
            return factory(**kw)
        except ValueError as exc:
            raise ConfigError(key, str(exc)) from None

    grid = build("grid", SimulationGrid, sim_rate=get("grid.sim_rate"), n_samples=get("grid.n_samples"))
    r = grid.resolution
    for key in ("pm.drive_freq", "sweep.probe_freq"):
        if not on_grid(get(key), r):
            raise ConfigError(key, "frequency not on analysis grid")

    built_bands = []
    for i, (name, fields) in enumerate(bands.items()):
        for fld in ("carrier", "bandwidth"):
            if fld not in fields:
                raise ConfigError(f"band.{name}.{fld}", "missing")
        if not on_grid(fields["carrier"], r):
            raise ConfigError(f"band.{name}.carrier", "carrier not on analysis grid")
        if not on_grid(fields["bandwidth"], r):
            raise ConfigError(f"band.{name}.bandwidth", "bandwidth not on analysis grid")
        built_bands.append(
            build(
                f"band.{name}",
                BandSpec,
                carrier=fields["carrier"],
                bandwidth=fields["bandwidth"],
                relative_power=fields.get("relative_power_db", 0.0),
                bit_seed=fields.get("bit_seed", i + 1),
            )
        )

    laser = build("laser", LaserSpec, power=get("laser.power_dbm"), frequency=get("laser.frequency"), linewidth=get("laser.linewidth"))
    split = get("laser.split_ratio")
    if not 0 < split < 1:
        raise ConfigError("laser.split_ratio", "must lie in (0, 1)")
    pm = build("pm", PmSpec, beta0=angle("pm.beta0"), drive_freq=get("pm.drive_freq"))
    mzm = build(
        "mzm",
        MzmSpec,
        beta1=angle("mzm.beta1"),
        vpi=get("mzm.vpi"),
        bias=angle("mzm.bias"),
        insertion_loss=get("mzm.insertion_loss_db"),
        extinction_ratio=get("mzm.extinction_ratio_db"),
        drive_phase=angle("mzm.drive_phase"),
    )
    receiver = build(
        "receiver",
        ReceiverSpec,
        pd_bandwidth=get("receiver.pd_bandwidth"),
        lpf_cutoff=get("receiver.lpf_cutoff"),
        adc_rate=get("receiver.adc_rate"),
        adc_bits=get("receiver.adc_bits"),
        lo_amplitude=get("receiver.lo_amplitude"),
        signal_amplitude_scale=get("receiver.signal_amplitude_scale"),
        differential_delay=get("receiver.differential_delay"),
        phase_noise_seed=get("receiver.phase_noise_seed"),
    )
    ratio = grid.sim_rate / receiver.adc_rate
    if abs(ratio - round(ratio)) > 1e-9 * ratio or grid.n_samples % int(round(ratio)):
        raise ConfigError("receiver.adc_rate", "simulation rate is not an integer multiple of the ADC rate")
    stim = build(
        "stimulus",
        MultibandSpec,
        bands=tuple(built_bands),
        noise_psd=get("stimulus.noise_psd_dbm_hz"),
        span=get("stimulus.span"),
        target_snr=get("stimulus.target_snr_db"),
        noise_seed=get("stimulus.noise_seed"),
        shaping=get("stimulus.shaping"),
        signal_power_dbm=get("stimulus.signal_power_dbm"),
        snr_reference=get("stimulus.snr_reference"),
    )
    if stim.span >= grid.sim_rate / 2:
        raise ConfigError("stimulus.span", "span must be below half the simulation rate")

    k_use = get("matrix.k_use")
    if k_use < 1 or k_use * pm.drive_freq + pm.drive_freq / 2 < stim.span:
        raise ConfigError("matrix.k_use", "comb lines do not cover the span")
    solver = get("reconstruction.solver")
    max_support = get("reconstruction.max_support")
    rows = 2 * int(round(2 * receiver.lpf_cutoff / pm.drive_freq))
    if not 1 <= max_support <= rows:
        raise ConfigError("reconstruction.max_support", f"must lie in [1, {rows}]")
    if solver == "exhaustive" and max_support > 3:
        raise ConfigError("reconstruction.max_support", "exhaustive search bound exceeded")
    if get("reconstruction.safety_factor") <= 0:
        raise ConfigError("reconstruction.safety_factor", "must be positive")

    oracle = OracleSettings(
        trials=get("oracle.trials"),
        max_sparsity=get("oracle.max_sparsity"),
        snr_db=get("oracle.snr_db"),
        seed=get("oracle.seed"),
    )
    if oracle.trials < 1:
        raise ConfigError("oracle.trials", "must be at least 1")
    if not 0 <= oracle.max_sparsity <= 3:
        raise ConfigError("oracle.max_sparsity", "exhaustive search bound exceeded")
    sweep = SweepSettings(
        snr_list=tuple(get("sweep.snr_list")),
        seeds=get("sweep.seeds"),
        seed=get("sweep.seed"),
        probe_freq=get("sweep.probe_freq"),
        required_rate=get("sweep.required_rate"),
        snr_reference=get("sweep.snr_reference"),
    )
    if not sweep.snr_list:
        raise ConfigError("sweep.snr_list", "empty")
    if sweep.seeds < 1:
        raise ConfigError("sweep.seeds", "must be at least 1")
    if not 0 < sweep.probe_freq < stim.span:
        raise ConfigError("sweep.probe_freq", "outside the span")

    return ScenarioConfig(
        grid=grid,
        laser=laser,
        split_ratio=split,
        pm=pm,
        mzm=mzm,
        receiver=receiver,
        sampling=get("frontend.sampling"),
        stimulus=stim,
        k_use=k_use,
        solver=solver,
        max_support=max_support,
        safety_factor=get("reconstruction.safety_factor"),
        threshold=get("reconstruction.threshold_dbm"),
        resolve_degenerate=get("reconstruction.resolve_degenerate"),
        oracle=oracle,
        sweep=sweep,
        output_dir=get("output.dir"),
    )


def load_config(path: Union[str, Path]) -> ScenarioConfig:
    return parse_config(Path(path).read_text())


def _fmt(v) -> str:
    if v is None:
        return "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    return str(v)


def dump_config(cfg: ScenarioConfig) -> str:
    """Effective configuration as loadable text (angles in radians)."""
    s, rx = cfg.stimulus, cfg.receiver
    lines = [
        ("grid.sim_rate", cfg.grid.sim_rate),
        ("grid.n_samples", cfg.grid.n_samples),
        ("laser.power_dbm", cfg.laser.power),
        ("laser.frequency", cfg.laser.frequency),
        ("laser.linewidth", cfg.laser.linewidth),
        ("laser.split_ratio", cfg.split_ratio),
        ("pm.beta0", cfg.pm.beta0),
        ("pm.drive_freq", cfg.pm.drive_freq),
        ("mzm.beta1", cfg.mzm.beta1),
        ("mzm.vpi", cfg.mzm.vpi),
        ("mzm.bias", cfg.mzm.bias),
        ("mzm.insertion_loss_db", cfg.mzm.insertion_loss),
        ("mzm.extinction_ratio_db", cfg.mzm.extinction_ratio),
        ("mzm.drive_phase", cfg.mzm.drive_phase),
        ("receiver.pd_bandwidth", rx.pd_bandwidth),
        ("receiver.lpf_cutoff", rx.lpf_cutoff),
        ("receiver.adc_rate", rx.adc_rate),
        ("receiver.adc_bits", "ideal" if rx.adc_bits is None else rx.adc_bits),
        ("receiver.lo_amplitude", rx.lo_amplitude),
        ("receiver.signal_amplitude_scale", rx.signal_amplitude_scale),
        ("receiver.differential_delay", rx.differential_delay),
        ("receiver.phase_noise_seed", rx.phase_noise_seed),
        ("frontend.sampling", cfg.sampling),
        ("stimulus.span", s.span),
        ("stimulus.noise_psd_dbm_hz", "off" if not s.noise_enabled else s.noise_psd),
        ("stimulus.target_snr_db", s.target_snr),
        ("stimulus.noise_seed", s.noise_seed),
        ("stimulus.shaping", s.shaping),
        ("stimulus.signal_power_dbm", s.signal_power_dbm),
        ("stimulus.snr_reference", s.snr_reference),
    ]
    for i, b in enumerate(s.bands, 1):
        lines += [
            (f"band.{i}.carrier", b.carrier),
            (f"band.{i}.bandwidth", b.bandwidth),
            (f"band.{i}.relative_power_db", b.relative_power),
            (f"band.{i}.bit_seed", b.bit_seed),
        ]
    lines += [
        ("matrix.k_use", cfg.k_use),
        ("reconstruction.solver", cfg.solver),
        ("reconstruction.max_support", cfg.max_support),
        ("reconstruction.safety_factor", cfg.safety_factor),
        ("reconstruction.threshold_dbm", cfg.threshold),
        ("reconstruction.resolve_degenerate", cfg.resolve_degenerate),
        ("oracle.trials", cfg.oracle.trials),
        ("oracle.max_sparsity", cfg.oracle.max_sparsity),
        ("oracle.snr_db", cfg.oracle.snr_db),
        ("oracle.seed", cfg.oracle.seed),
        ("sweep.snr_list", ",".join(_fmt(float(v)) for v in cfg.sweep.snr_list)),
        ("sweep.seeds", cfg.sweep.seeds),
        ("sweep.seed", cfg.sweep.seed),
        ("sweep.probe_freq", cfg.sweep.probe_freq),
        ("sweep.required_rate", cfg.sweep.required_rate),
        ("sweep.snr_reference", cfg.sweep.snr_reference),
    ]
    if cfg.output_dir is not None:
        lines.append(("output.dir", cfg.output_dir))
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in lines)
