"""Declarative experiment runner with deterministic dataset emission.

A config (INI text file or :class:`ExperimentConfig`) names one experiment
kind, the model parameters, optional sweeps, and the output location.
Running it expands the sweep into independent jobs, evaluates them (in a
process pool when asked), and writes one flat table per job:

* ``spectrum`` schema: ``N,kappa,h,epsilon,index,re_E,im_E``
* ``bifurcation`` schema: ``epsilon,index,re_E,im_E`` plus an
  ``ep_events.json`` sidecar with ``{eps_lo, eps_hi, energy}`` entries
* ``trace`` schema: ``t,value,log_norm_1,log_norm_2`` preceded by ``#``
  metadata comment lines

Floats are serialized in shortest round-trip form, so a rerun of the same
config produces byte-identical bodies; wall-clock provenance lives in a
``*.prov.json`` sidecar per dataset, which round-trips to the resolved
config that produced it.
"""

from __future__ import annotations

import configparser
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import (
    InitialState,
    TimeGrid,
    fidelity_trace,
    front_trace,
    loschmidt_hamiltonian_echo,
    loschmidt_phase_echo,
    defect_profile,
    measure_front_speed,
    transport_diagnostics,
)
from .errors import ValidationError
from .lattice import LatticeParams, asymmetric_chain, perturbed_ring
from .spectral import chain_spectrum, exact_ring_spectrum, trace_bifurcation
from .linalg import Spectrum

__all__ = [
    "ExperimentConfig",
    "Dataset",
    "EXPERIMENT_KINDS",
    "PRESET_NAMES",
    "preset",
    "parse_config",
    "config_from_dict",
    "run",
    "CONFIG_REFERENCE",
]

EXPERIMENT_KINDS = (
    "spectrum-sweep",
    "bifurcation",
    "fidelity",
    "echo-phase",
    "echo-hamiltonian",
    "transport",
)
PRESET_NAMES = ("fig2", "fig2d", "fig4", "fig5", "fig6")

SCHEMA_COLUMNS = {
    "spectrum": ("N", "kappa", "h", "epsilon", "index", "re_E", "im_E"),
    "bifurcation": ("epsilon", "index", "re_E", "im_E"),
    "trace": ("t", "value", "log_norm_1", "log_norm_2"),
}

# dt must stay at or below this multiple of 1/kappa (integration accuracy floor)
DT_CAP = 0.05

_DYNAMIC_KINDS = {"fidelity", "echo-phase", "echo-hamiltonian", "transport"}

CONFIG_REFERENCE = """\
Config file keys (INI syntax; unknown sections or keys are errors):

[experiment]
  kind            one of: spectrum-sweep | bifurcation | fidelity |
                  echo-phase | echo-hamiltonian | transport

[model]
  n_sites         integer >= 2 (>= 3 when the edge coupling is used)
  kappa           hopping rate > 0 (energy unit); default 1.0
  h               imaginary gauge field >= 0; default 0.0
  epsilon         edge-coupling strength >= 0; default 0.0
  hop_range       hopping range; must be 1; default 1

[sweep]           optional
  h               comma list of gauge values (one dataset per value)
  epsilon         comma list of coupling values
  epsilon_start   }  uniform epsilon grid for `bifurcation`
  epsilon_stop    }  (start < stop, count >= 3); alternatively give an
  epsilon_count   }  explicit `epsilon` list with >= 3 ascending values

[initial_state]   required for fidelity/echo-*/transport
  kind            comma list drawn from: site | eigenstate
  index           comma list of 1-based indices, zipped with `kind`

[time]            required for fidelity/echo-*/transport
  t_max           total evolution time, units 1/kappa
  dt              step, 0 < dt <= 0.05/kappa
  stride          output every `stride` steps; default 1

[defect]          required for echo-phase
  site            comma list of 1-based defect positions
  phase           defect phase in radians; default pi/2

[transport]       optional, transport only
  threshold       front detection threshold in (0, 1); default 1e-3

[output]
  directory       output directory; default "out"
  format          csv | json; default csv

Conventions: closed-form band energies use 2*kappa*cos(pi*n/(N+1)) (the
eigenvectors fix the pi convention; a 2*pi variant seen in some sources
does not solve the eigenproblem), and the closed-form first-order shift is
evaluated with a positive sin^2 prefactor whose sign alternates over the
band in the matrix-element route; compare magnitudes, not signs.
"""


@dataclass
class ExperimentConfig:
    """Fully resolved experiment description."""

    experiment: str
    model: LatticeParams
    sweep_h: list[float] | None = None
    sweep_epsilon: list[float] | None = None
    epsilon_grid: list[float] | None = None
    initial_states: list[InitialState] = field(default_factory=list)
    time: TimeGrid | None = None
    defect_sites: list[int] = field(default_factory=list)
    defect_phase: float = float(np.pi / 2.0)
    threshold: float = 1e-3
    out_dir: str = "out"
    out_format: str = "csv"

    def __post_init__(self):
        if self.experiment not in EXPERIMENT_KINDS:
            raise ValidationError(
                f"experiment.kind must be one of {', '.join(EXPERIMENT_KINDS)}, "
                f"got {self.experiment!r}"
            )
        if self.out_format not in ("csv", "json"):
            raise ValidationError(f"output.format must be csv or json, got {self.out_format!r}")
        if self.sweep_h is not None and not self.sweep_h:
            raise ValidationError("sweep.h must be non-empty when given")
        if self.sweep_epsilon is not None and not self.sweep_epsilon:
            raise ValidationError("sweep.epsilon must be non-empty when given")
        if self.experiment in _DYNAMIC_KINDS:
            if not self.initial_states:
                raise ValidationError(f"{self.experiment} requires an initial_state section")
            if self.time is None:
                raise ValidationError(f"{self.experiment} requires a time section")
            if self.time.dt > DT_CAP / self.model.kappa * (1 + 1e-12):
                raise ValidationError(
                    f"time.dt = {self.time.dt} exceeds the accuracy cap "
                    f"{DT_CAP}/kappa = {DT_CAP / self.model.kappa}"
                )
        if self.experiment == "echo-phase" and not self.defect_sites:
            raise ValidationError("echo-phase requires a defect section (missing key: defect)")
        if self.experiment == "bifurcation":
            grid = self.epsilon_grid
            if not grid or len(grid) < 3:
                raise ValidationError(
                    "bifurcation requires an epsilon grid of >= 3 points "
                    "(sweep.epsilon_start/stop/count or an explicit sweep.epsilon list)"
                )
        if not (0 < self.threshold < 1):
            raise ValidationError(f"transport.threshold must be in (0, 1), got {self.threshold}")
        for site in self.defect_sites:
            if not (1 <= site <= self.model.n_sites):
                raise ValidationError(f"defect.site {site} outside 1..{self.model.n_sites}")

    @property
    def h_values(self) -> list[float]:
        return self.sweep_h if self.sweep_h is not None else [self.model.h]

    @property
    def epsilon_values(self) -> list[float]:
        return self.sweep_epsilon if self.sweep_epsilon is not None else [self.model.epsilon]

    def as_dict(self) -> dict:
        d: dict = {
            "experiment": {"kind": self.experiment},
            "model": {
                "n_sites": self.model.n_sites,
                "kappa": self.model.kappa,
                "h": self.model.h,
                "epsilon": self.model.epsilon,
                "hop_range": self.model.hop_range,
            },
            "output": {"directory": self.out_dir, "format": self.out_format},
        }
        sweep: dict = {}
        if self.sweep_h is not None:
            sweep["h"] = list(self.sweep_h)
        if self.sweep_epsilon is not None:
            sweep["epsilon"] = list(self.sweep_epsilon)
        if self.epsilon_grid is not None:
            sweep["epsilon_grid"] = list(self.epsilon_grid)
        if sweep:
            d["sweep"] = sweep
        if self.initial_states:
            d["initial_state"] = {
                "kind": [s.kind for s in self.initial_states],
                "index": [s.index for s in self.initial_states],
            }
        if self.time is not None:
            d["time"] = {"t_max": self.time.t_max, "dt": self.time.dt, "stride": self.time.stride}
        if self.defect_sites:
            d["defect"] = {"site": list(self.defect_sites), "phase": self.defect_phase}
        if self.experiment == "transport":
            d["transport"] = {"threshold": self.threshold}
        return d


def config_from_dict(d: dict) -> ExperimentConfig:
    """Rebuild a config from its provenance dictionary."""
    model = d["model"]
    params = LatticeParams(
        n_sites=int(model["n_sites"]),
        kappa=float(model["kappa"]),
        h=float(model["h"]),
        epsilon=float(model["epsilon"]),
        hop_range=int(model.get("hop_range", 1)),
    )
    sweep = d.get("sweep", {})
    states = []
    if "initial_state" in d:
        for kind, index in zip(d["initial_state"]["kind"], d["initial_state"]["index"]):
            states.append(InitialState(kind, index=int(index)))
    grid = None
    if "time" in d:
        grid = TimeGrid(
            t_max=float(d["time"]["t_max"]),
            dt=float(d["time"]["dt"]),
            stride=int(d["time"]["stride"]),
        )
    defect = d.get("defect", {})
    return ExperimentConfig(
        experiment=d["experiment"]["kind"],
        model=params,
        sweep_h=[float(x) for x in sweep["h"]] if "h" in sweep else None,
        sweep_epsilon=[float(x) for x in sweep["epsilon"]] if "epsilon" in sweep else None,
        epsilon_grid=[float(x) for x in sweep["epsilon_grid"]] if "epsilon_grid" in sweep else None,
        initial_states=states,
        time=grid,
        defect_sites=[int(x) for x in defect.get("site", [])],
        defect_phase=float(defect.get("phase", np.pi / 2.0)),
        threshold=float(d.get("transport", {}).get("threshold", 1e-3)),
        out_dir=str(d["output"]["directory"]),
        out_format=str(d["output"]["format"]),
    )


# ------------------------------------------------------------------ parsing

_ALLOWED_KEYS = {
    "experiment": {"kind"},
    "model": {"n_sites", "kappa", "h", "epsilon", "hop_range"},
    "sweep": {"h", "epsilon", "epsilon_start", "epsilon_stop", "epsilon_count"},
    "initial_state": {"kind", "index"},
    "time": {"t_max", "dt", "stride"},
    "defect": {"site", "phase"},
    "transport": {"threshold"},
    "output": {"directory", "format"},
}


def _float_list(raw: str, where: str) -> list[float]:
    try:
        return [float(tok) for tok in raw.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValidationError(f"{where}: cannot parse float list from {raw!r}") from exc


def _get(section, key, conv, default, where):
    if key not in section:
        if default is not None:
            return default
        raise ValidationError(f"missing required key: {where}.{key}")
    try:
        return conv(section[key])
    except ValueError as exc:
        raise ValidationError(f"{where}.{key}: cannot parse {section[key]!r}") from exc


def parse_config(path: str | Path) -> ExperimentConfig:
    """Parse and validate an INI experiment config.

    Unknown sections or keys are rejected with the offending path named, so
    a typo cannot silently change a physics run.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ValidationError(f"cannot parse config {path}: {exc}") from exc

    for sec in cp.sections():
        if sec not in _ALLOWED_KEYS:
            raise ValidationError(f"unknown config section: [{sec}]")
        for key in cp[sec]:
            if key not in _ALLOWED_KEYS[sec]:
                raise ValidationError(f"unknown config key: {sec}.{key}")

    if "experiment" not in cp:
        raise ValidationError("missing required section: [experiment]")
    if "model" not in cp:
        raise ValidationError("missing required section: [model]")
    kind = _get(cp["experiment"], "kind", str, None, "experiment").strip()

    model_sec = cp["model"]
    params = LatticeParams(
        n_sites=_get(model_sec, "n_sites", int, None, "model"),
        kappa=_get(model_sec, "kappa", float, 1.0, "model"),
        h=_get(model_sec, "h", float, 0.0, "model"),
        epsilon=_get(model_sec, "epsilon", float, 0.0, "model"),
        hop_range=_get(model_sec, "hop_range", int, 1, "model"),
    )

    sweep_h = sweep_eps = grid = None
    if "sweep" in cp:
        sec = cp["sweep"]
        if "h" in sec:
            sweep_h = _float_list(sec["h"], "sweep.h")
        if "epsilon" in sec:
            sweep_eps = _float_list(sec["epsilon"], "sweep.epsilon")
        has_grid_keys = any(k in sec for k in ("epsilon_start", "epsilon_stop", "epsilon_count"))
        if has_grid_keys:
            start = _get(sec, "epsilon_start", float, None, "sweep")
            stop = _get(sec, "epsilon_stop", float, None, "sweep")
            count = _get(sec, "epsilon_count", int, None, "sweep")
            if not (start < stop) or count < 3:
                raise ValidationError("sweep: need epsilon_start < epsilon_stop and count >= 3")
            grid = np.linspace(start, stop, count).tolist()
    if kind == "bifurcation" and grid is None and sweep_eps is not None:
        grid = sweep_eps
        sweep_eps = None

    states: list[InitialState] = []
    if "initial_state" in cp:
        sec = cp["initial_state"]
        kinds = [tok.strip() for tok in _get(sec, "kind", str, None, "initial_state").split(",")]
        indices = [int(tok) for tok in _get(sec, "index", str, None, "initial_state").split(",")]
        if len(kinds) != len(indices):
            raise ValidationError("initial_state: kind and index lists must have equal length")
        for k, i in zip(kinds, indices):
            if k not in ("site", "eigenstate"):
                raise ValidationError(f"initial_state.kind must be site or eigenstate, got {k!r}")
            states.append(InitialState(k, index=i))

    grid_time = None
    if "time" in cp:
        sec = cp["time"]
        grid_time = TimeGrid(
            t_max=_get(sec, "t_max", float, None, "time"),
            dt=_get(sec, "dt", float, None, "time"),
            stride=_get(sec, "stride", int, 1, "time"),
        )

    defect_sites: list[int] = []
    defect_phase = float(np.pi / 2.0)
    if "defect" in cp:
        sec = cp["defect"]
        defect_sites = [int(tok) for tok in _get(sec, "site", str, None, "defect").split(",")]
        defect_phase = _get(sec, "phase", float, defect_phase, "defect")

    threshold = 1e-3
    if "transport" in cp:
        threshold = _get(cp["transport"], "threshold", float, 1e-3, "transport")

    out_dir, out_format = "out", "csv"
    if "output" in cp:
        out_dir = _get(cp["output"], "directory", str, "out", "output")
        out_format = _get(cp["output"], "format", str, "csv", "output").strip()

    return ExperimentConfig(
        experiment=kind,
        model=params,
        sweep_h=sweep_h,
        sweep_epsilon=sweep_eps,
        epsilon_grid=grid,
        initial_states=states,
        time=grid_time,
        defect_sites=defect_sites,
        defect_phase=defect_phase,
        threshold=threshold,
        out_dir=out_dir,
        out_format=out_format,
    )


# ------------------------------------------------------------------ presets


def preset(name: str, out_dir: str | None = None) -> ExperimentConfig:
    """Fully resolved figure-preset configs.

    fig2   spectra at h in {0, 0.1, 0.2} x eps in {0, 0.001, 0.01, 0.1}
    fig2d  bifurcation sweep, 40 points over [0.007, 0.0078]
    fig4   fidelity decay, eps = 0.3, band-edge eigenstate and site N-1
    fig5   phase-slip echo from the left edge, defect at N and at 1
    fig6   phase-slip echo from the right edge, same defects
    """
    if name not in PRESET_NAMES:
        raise ValidationError(f"unknown preset {name!r}; known: {', '.join(PRESET_NAMES)}")
    out = out_dir if out_dir is not None else f"out/{name}"
    n = 50
    if name == "fig2":
        return ExperimentConfig(
            experiment="spectrum-sweep",
            model=LatticeParams(n_sites=n),
            sweep_h=[0.0, 0.1, 0.2],
            sweep_epsilon=[0.0, 0.001, 0.01, 0.1],
            out_dir=out,
        )
    if name == "fig2d":
        return ExperimentConfig(
            experiment="bifurcation",
            model=LatticeParams(n_sites=n, h=0.1),
            epsilon_grid=np.linspace(0.007, 0.0078, 40).tolist(),
            out_dir=out,
        )
    if name == "fig4":
        return ExperimentConfig(
            experiment="fidelity",
            model=LatticeParams(n_sites=n, epsilon=0.3),
            sweep_h=[0.0, 0.3],
            initial_states=[InitialState.eigenstate(1), InitialState.site(n - 1)],
            time=TimeGrid(t_max=40.0, dt=0.01, stride=10),
            out_dir=out,
        )
    # fig5 / fig6: three transit times at the h = 0 group velocity 2*kappa
    echo_time = TimeGrid(t_max=75.0, dt=0.02, stride=25)
    start = 1 if name == "fig5" else n
    return ExperimentConfig(
        experiment="echo-phase",
        model=LatticeParams(n_sites=n),
        sweep_h=[0.0, 0.3],
        initial_states=[InitialState.site(start)],
        time=echo_time,
        defect_sites=[n, 1],
        out_dir=out,
    )


# ------------------------------------------------------------------ datasets


@dataclass
class Dataset:
    """One flat table plus its provenance."""

    name: str
    schema: str
    columns: tuple[str, ...]
    rows: list[tuple]
    metadata: dict = field(default_factory=dict)
    events: list[dict] | None = None
    provenance: dict = field(default_factory=dict)
    path: Path | None = None


def _fmt(x) -> str:
    """Shortest round-trip serialization; integers stay integers."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    v = float(x)
    if v == 0.0:
        v = 0.0  # normalize -0.0
    return repr(v)


def _g(x: float) -> str:
    return f"{float(x):g}"


@dataclass(frozen=True)
class _Job:
    """Picklable unit of work for the pool."""

    kind: str
    name: str
    params: LatticeParams
    state: InitialState | None = None
    time: TimeGrid | None = None
    defect_site: int | None = None
    defect_phase: float = float(np.pi / 2.0)
    threshold: float = 1e-3
    epsilon_grid: tuple[float, ...] | None = None


def _spectrum_rows(params: LatticeParams, spectrum: Spectrum) -> list[tuple]:
    return [
        (params.n_sites, params.kappa, params.h, params.epsilon, i + 1,
         float(e.real), float(e.imag))
        for i, e in enumerate(spectrum.energies)
    ]


def _model_meta(params: LatticeParams) -> str:
    return (
        f"n_sites={params.n_sites} kappa={_fmt(params.kappa)} h={_fmt(params.h)} "
        f"epsilon={_fmt(params.epsilon)} hop_range={params.hop_range}"
    )


def _trace_dataset(name: str, trace, params: LatticeParams, extra_meta: dict) -> Dataset:
    zeros = np.zeros_like(trace.values)
    l1 = trace.log_norm_1 if trace.log_norm_1 is not None else zeros
    l2 = trace.log_norm_2 if trace.log_norm_2 is not None else zeros
    rows = [
        (float(t), float(v), float(a), float(b))
        for t, v, a, b in zip(trace.times, trace.values, l1, l2)
    ]
    meta = {"observable": trace.observable, "model": _model_meta(params)}
    meta.update(extra_meta)
    return Dataset(name, "trace", SCHEMA_COLUMNS["trace"], rows, metadata=meta)


def _run_job(job: _Job) -> Dataset:
    params = job.params
    if job.kind == "spectrum":
        spec = chain_spectrum(params) if params.epsilon == 0 else exact_ring_spectrum(params)[0]
        return Dataset(job.name, "spectrum", SCHEMA_COLUMNS["spectrum"],
                       _spectrum_rows(params, spec))
    if job.kind == "bifurcation":
        trace = trace_bifurcation(params, np.asarray(job.epsilon_grid))
        rows = [
            (float(eps), i + 1, float(e.real), float(e.imag))
            for eps, spec in zip(trace.epsilon_grid, trace.spectra)
            for i, e in enumerate(spec.energies)
        ]
        events = [
            {"eps_lo": ev.eps_lo, "eps_hi": ev.eps_hi, "energy": ev.energy}
            for ev in trace.events
        ]
        meta = {"model": _model_meta(params)}
        if trace.warnings:
            meta["warnings"] = "; ".join(trace.warnings)
        return Dataset(job.name, "bifurcation", SCHEMA_COLUMNS["bifurcation"], rows,
                       metadata=meta, events=events)

    state, grid = job.state, job.time
    meta = {"initial_state": state.label(),
            "time": f"t_max={_fmt(grid.t_max)} dt={_fmt(grid.dt)} stride={grid.stride}"}
    if job.kind == "fidelity":
        tr = fidelity_trace(asymmetric_chain(params), perturbed_ring(params), state, grid,
                            params=params)
        return _trace_dataset(job.name, tr, params, meta)
    if job.kind == "echo-hamiltonian":
        tr = loschmidt_hamiltonian_echo(asymmetric_chain(params), perturbed_ring(params),
                                        state, grid, params=params)
        return _trace_dataset(job.name, tr, params, meta)
    if job.kind == "echo-phase":
        profile = defect_profile(params.n_sites, job.defect_site)
        profile[job.defect_site - 1] = job.defect_phase
        tr = loschmidt_phase_echo(asymmetric_chain(params), profile, state, grid, params=params)
        v_g, t1 = transport_diagnostics(params)
        meta["defect"] = f"site={job.defect_site} phase={_fmt(job.defect_phase)}"
        meta["transit"] = f"v_g={_fmt(v_g)} t1={_fmt(t1)}"
        return _trace_dataset(job.name, tr, params, meta)
    if job.kind == "transport":
        ham = asymmetric_chain(params)
        tr = front_trace(ham, state, grid, job.threshold, params=params)
        v_g, t1 = transport_diagnostics(params)
        v_meas = measure_front_speed(ham, state, grid, job.threshold, params=params)
        meta["transport"] = (
            f"threshold={_fmt(job.threshold)} v_g={_fmt(v_g)} t1={_fmt(t1)} "
            f"v_measured={_fmt(v_meas)}"
        )
        return _trace_dataset(job.name, tr, params, meta)
    raise ValidationError(f"unknown job kind {job.kind!r}")


def _expand_jobs(config: ExperimentConfig) -> list[_Job]:
    m = config.model

    def with_params(h: float, eps: float) -> LatticeParams:
        return LatticeParams(n_sites=m.n_sites, kappa=m.kappa, h=h, epsilon=eps,
                             hop_range=m.hop_range)

    jobs: list[_Job] = []
    if config.experiment == "spectrum-sweep":
        for h in config.h_values:
            for eps in config.epsilon_values:
                jobs.append(_Job("spectrum", f"spectrum_h{_g(h)}_eps{_g(eps)}",
                                 with_params(h, eps)))
    elif config.experiment == "bifurcation":
        jobs.append(_Job("bifurcation", "bifurcation", with_params(m.h, 0.0),
                         epsilon_grid=tuple(config.epsilon_grid)))
    elif config.experiment == "fidelity":
        for h in config.h_values:
            for eps in config.epsilon_values:
                for state in config.initial_states:
                    jobs.append(_Job("fidelity",
                                     f"fidelity_h{_g(h)}_eps{_g(eps)}_{state.label()}",
                                     with_params(h, eps), state=state, time=config.time))
    elif config.experiment == "echo-hamiltonian":
        for h in config.h_values:
            for eps in config.epsilon_values:
                for state in config.initial_states:
                    jobs.append(_Job("echo-hamiltonian",
                                     f"echo_hamiltonian_h{_g(h)}_eps{_g(eps)}_{state.label()}",
                                     with_params(h, eps), state=state, time=config.time))
    elif config.experiment == "echo-phase":
        for h in config.h_values:
            for state in config.initial_states:
                for n0 in config.defect_sites:
                    jobs.append(_Job("echo-phase",
                                     f"echo_phase_h{_g(h)}_{state.label()}_defect{n0}",
                                     with_params(h, m.epsilon), state=state, time=config.time,
                                     defect_site=n0, defect_phase=config.defect_phase))
    elif config.experiment == "transport":
        for h in config.h_values:
            for state in config.initial_states:
                jobs.append(_Job("transport", f"transport_h{_g(h)}_{state.label()}",
                                 with_params(h, m.epsilon), state=state, time=config.time,
                                 threshold=config.threshold))
    return jobs


def _write_dataset(ds: Dataset, out_dir: Path, fmt: str) -> Path:
    if fmt == "csv":
        lines = []
        if ds.schema == "trace":
            for key in sorted(ds.metadata):
                lines.append(f"# {key}: {ds.metadata[key]}")
        lines.append(",".join(ds.columns))
        for row in ds.rows:
            lines.append(",".join(_fmt(x) for x in row))
        path = out_dir / f"{ds.name}.csv"
        path.write_text("\n".join(lines) + "\n")
    else:
        path = out_dir / f"{ds.name}.json"
        body = {
            "schema": ds.schema,
            "columns": list(ds.columns),
            "rows": [list(r) for r in ds.rows],
            "metadata": ds.metadata,
        }
        if ds.events is not None:
            body["ep_events"] = ds.events
        path.write_text(json.dumps(body, indent=1, sort_keys=True) + "\n")
    if ds.events is not None:
        (out_dir / "ep_events.json").write_text(
            json.dumps(ds.events, indent=1, sort_keys=True) + "\n"
        )
    prov_path = out_dir / f"{ds.name}.prov.json"
    prov_path.write_text(json.dumps(ds.provenance, indent=1, sort_keys=True) + "\n")
    return path


def resolve_threads(cli_threads: int | None = None) -> int:
    """Worker count: SKINLAB_THREADS env overrides the CLI flag overrides cores."""
    env = os.environ.get("SKINLAB_THREADS")
    if env is not None:
        try:
            n = int(env)
        except ValueError as exc:
            raise ValidationError(f"SKINLAB_THREADS must be an integer, got {env!r}") from exc
        if n < 1:
            raise ValidationError("SKINLAB_THREADS must be >= 1")
        return n
    if cli_threads is not None:
        if cli_threads < 1:
            raise ValidationError("--threads must be >= 1")
        return cli_threads
    return os.cpu_count() or 1


def run(config: ExperimentConfig, threads: int | None = None) -> list[Dataset]:
    """Execute a config and write its datasets.

    Sweep points run as independent pure jobs; with ``threads > 1`` they are
    dispatched to a process pool and reassembled in configured order, so
    parallel output is byte-identical to serial output.
    """
    jobs = _expand_jobs(config)
    n_workers = resolve_threads(threads)
    out_dir = Path(config.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ValidationError(f"output directory {out_dir} is not writable: {exc}") from exc

    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(n_workers, len(jobs))) as pool:
            datasets = list(pool.map(_run_job, jobs))
    else:
        datasets = [_run_job(j) for j in jobs]

    stamp = datetime.now(timezone.utc).isoformat()
    for ds in datasets:
        ds.provenance = {
            "tool": "skinlab",
            "version": __version__,
            "wallclock_utc": stamp,
            "config": config.as_dict(),
        }
        ds.path = _write_dataset(ds, out_dir, config.out_format)
    return datasets
