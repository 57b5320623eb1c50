"""Run configuration: YAML ingestion, flag overrides and validation.

Precedence, lowest to highest: built-in defaults, the YAML file, command-line
flags. Everything is validated before any computation starts.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .disorder import DisorderConfig
from .dynamics import InitialStateSpec
from .floquet import Method, PropagatorConfig, SambeConfig, Sampling
from .lattice import Boundary, LatticeParams

__all__ = ["ConfigError", "DynamicsSettings", "RunConfig", "load_config", "parse_grid"]


class ConfigError(ValueError):
    pass


def parse_grid(spec) -> tuple[float, ...]:
    """A list of values or ``{start, stop, step}`` (inclusive of ``stop``)."""
    if isinstance(spec, dict):
        try:
            start, stop, step = (float(spec[k]) for k in ("start", "stop", "step"))
        except KeyError as exc:
            raise ConfigError(f"grid needs start, stop and step (missing {exc})") from None
        if not step > 0 or stop < start:
            raise ConfigError("grid needs step > 0 and stop >= start")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        # rounding keeps grid values identical to their decimal spelling
        return tuple(float(x) for x in np.round(start + step * np.arange(n), 12))
    if isinstance(spec, (list, tuple)):
        return tuple(float(x) for x in spec)
    raise ConfigError("grid must be a list or a {start, stop, step} mapping")


@dataclass(frozen=True)
class DynamicsSettings:
    initial: InitialStateSpec | None = None
    dt: float = 0.1
    t_max: float | None = None  # None: enough for `revival_periods` predicted periods
    substeps: int | None = None  # None: slices no wider than T/128
    sampling: Sampling = Sampling.MIDPOINT
    fidelity: str = "ordinary"  # or "biorthogonal"
    threshold: float = 0.5
    revival_periods: int = 4


@dataclass(frozen=True)
class RunConfig:
    lattice: LatticeParams
    omega: float | None = None
    omega_grid: tuple[float, ...] | None = None
    method: Method = Method.PROPAGATOR
    sambe: SambeConfig = SambeConfig()
    propagator: PropagatorConfig = PropagatorConfig()
    window: tuple[int, int] | None = None
    refine: bool = True
    dynamics: DynamicsSettings = DynamicsSettings()
    disorder: DisorderConfig | None = None
    n_periods: int = 3
    half_width: float = 0.15
    static_threshold: float | None = None
    output_dir: Path = Path("out")
    jobs: int = 1
    plot: bool = False

    def as_dict(self) -> dict[str, Any]:
        """Resolved configuration as plain data (enums as their values)."""
        def clean(x):
            if isinstance(x, dict):
                return {k: clean(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [clean(v) for v in x]
            if isinstance(x, (Method, Sampling, Boundary)):
                return x.value
            if isinstance(x, complex):
                return [x.real, x.imag]
            if isinstance(x, Path):
                return str(x)
            return x

        d = asdict(self)
        d.pop("output_dir")  # where results go does not change them
        d.pop("jobs")
        return clean(d)


_SECTIONS = {"lattice", "drive", "method", "sambe", "propagator", "sweep", "static",
             "dynamics", "disorder", "seed", "output_dir"}


def _section(raw: dict, name: str) -> dict:
    sec = raw.get(name) or {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section '{name}' must be a mapping")
    return sec


def _reject_unknown(sec: dict, allowed: set[str], name: str) -> None:
    unknown = set(sec) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in '{name}': {sorted(unknown)}")


def load_config(
    path: str | Path | None,
    *,
    command: str,
    out: str | None = None,
    jobs: int | None = None,
    seed: int | None = None,
    method: str | None = None,
    boundary: str | None = None,
    plot: bool = False,
) -> RunConfig:
    """Read a YAML file (optional), apply flag overrides and validate.

    The default boundary is open for ``static-spectrum`` and periodic for the
    driven commands; a ``lattice.boundary`` entry or ``--boundary`` wins.
    """
    raw: dict = {}
    if path is not None:
        try:
            raw = yaml.safe_load(Path(path).read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config root must be a mapping")
    _reject_unknown(raw, _SECTIONS, "<root>")

    try:
        return _build(raw, command, out, jobs, seed, method, boundary, plot)
    except ConfigError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from None


def _build(raw, command, out, jobs, seed, method, boundary, plot) -> RunConfig:
    lat = _section(raw, "lattice")
    _reject_unknown(lat, {"L", "J1", "J2", "F0", "boundary"}, "lattice")
    missing = {"L", "J1", "F0"} - set(lat)
    if missing:
        raise ConfigError(f"lattice is missing {sorted(missing)}")
    default_boundary = Boundary.OPEN if command == "static-spectrum" else Boundary.PERIODIC
    lattice = LatticeParams(
        L=lat["L"],
        J1=lat["J1"],
        J2=lat.get("J2", lat["J1"]),
        F0=lat["F0"],
        boundary=boundary or lat.get("boundary", default_boundary),
    )

    drive = _section(raw, "drive")
    _reject_unknown(drive, {"omega", "omega_grid"}, "drive")
    w = drive.get("omega")
    grid = drive.get("omega_grid")
    if command != "static-spectrum":
        if (w is None) == (grid is None):
            raise ConfigError("give exactly one of drive.omega and drive.omega_grid")
    if w is not None:
        w = float(w)
        if not (math.isfinite(w) and w > 0):
            raise ConfigError(f"drive.omega must be positive, got {w}")
    if grid is not None:
        grid = parse_grid(grid)
        if not grid or any(not x > 0 for x in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("omega_grid must be non-empty, positive and strictly increasing")

    sam = _section(raw, "sambe")
    _reject_unknown(sam, {"M"}, "sambe")
    prop = _section(raw, "propagator")
    _reject_unknown(prop, {"Q", "sampling"}, "propagator")
    sw = _section(raw, "sweep")
    _reject_unknown(sw, {"window", "refine"}, "sweep")
    st = _section(raw, "static")
    _reject_unknown(st, {"threshold"}, "static")

    dyn = _section(raw, "dynamics")
    _reject_unknown(dyn, {"mode_indices", "amplitudes", "dt", "t_max", "substeps", "sampling",
                          "fidelity", "threshold", "revival_periods"}, "dynamics")
    initial = None
    if "mode_indices" in dyn:
        amps = dyn.get("amplitudes")
        if amps is not None:
            amps = tuple(complex(a[0], a[1]) if isinstance(a, (list, tuple)) else complex(a)
                         for a in amps)
        initial = InitialStateSpec(tuple(dyn["mode_indices"]), amps)
    elif command in ("evolve", "disorder"):
        raise ConfigError("dynamics.mode_indices is required")
    dt = float(dyn.get("dt", 0.1))
    t_max = dyn.get("t_max")
    if not dt > 0:
        raise ConfigError(f"dynamics.dt must be positive, got {dt}")
    if t_max is not None:
        t_max = float(t_max)
        if not t_max >= dt:
            raise ConfigError(f"dynamics.t_max={t_max} must be at least dt={dt}")
    fid = dyn.get("fidelity", "ordinary")
    if fid not in ("ordinary", "biorthogonal"):
        raise ConfigError("dynamics.fidelity must be 'ordinary' or 'biorthogonal'")
    substeps = dyn.get("substeps")
    if substeps is not None and (int(substeps) != substeps or substeps < 1):
        raise ConfigError("dynamics.substeps must be a positive integer")
    dynamics = DynamicsSettings(
        initial=initial,
        dt=dt,
        t_max=t_max,
        substeps=None if substeps is None else int(substeps),
        sampling=Sampling(dyn.get("sampling", Sampling.MIDPOINT)),
        fidelity=fid,
        threshold=float(dyn.get("threshold", 0.5)),
        revival_periods=int(dyn.get("revival_periods", 4)),
    )

    dis = _section(raw, "disorder")
    _reject_unknown(dis, {"lambda_grid", "n_realizations", "n_periods", "half_width"}, "disorder")
    master = seed if seed is not None else raw.get("seed", 0)
    disorder = None
    if "lambda_grid" in dis:
        disorder = DisorderConfig(parse_grid(dis["lambda_grid"]), dis.get("n_realizations", 20), master)
    elif command == "disorder":
        raise ConfigError("disorder.lambda_grid is required")
    n_periods = int(dis.get("n_periods", 3))
    half_width = float(dis.get("half_width", 0.15))
    if n_periods < 1 or not 0 < half_width < 1:
        raise ConfigError("disorder needs n_periods >= 1 and 0 < half_width < 1")

    if jobs is not None and jobs < 1:
        raise ConfigError("--jobs must be >= 1")

    window = sw.get("window")
    return RunConfig(
        lattice=lattice,
        omega=w,
        omega_grid=grid,
        method=Method(method or raw.get("method", Method.PROPAGATOR)),
        sambe=SambeConfig(sam.get("M")),
        propagator=PropagatorConfig(int(prop.get("Q", 1024)),
                                    Sampling(prop.get("sampling", Sampling.LEFT_ENDPOINT))),
        window=None if window is None else (int(window[0]), int(window[1])),
        refine=bool(sw.get("refine", True)),
        dynamics=dynamics,
        disorder=disorder,
        n_periods=n_periods,
        half_width=half_width,
        static_threshold=None if st.get("threshold") is None else float(st["threshold"]),
        output_dir=Path(out if out is not None else raw.get("output_dir", "out")),
        jobs=jobs or 1,
        plot=plot,
    )
