"""
CLI commands for evcs-attack
"""

import logging
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, List, Optional, Tuple

import click
import numpy as np

from evcs_attack import __version__
from evcs_attack.attack import UncertaintySpec, controllability_matrix, synthesize
from evcs_attack.cli.config import RunConfig, default_grid_path
from evcs_attack.dynamics import (
    DEFAULT_DT_S,
    DEFAULT_HORIZON_S,
    GeneratorTrip,
    capture_operating_state,
    detect_overfrequency_trip,
    disturbance_vector,
    least_damped,
    simulate,
    spectrum,
)
from evcs_attack.errors import EvcsAttackError
from evcs_attack.export import ReportBundle, fmt, sha256_of
from evcs_attack.grid import GridSpec, LoadParams, StateSpaceModel, assemble_descriptor, load_grid_spec
from evcs_attack.grid import scale_evcs_demand
from evcs_attack.vulnerability import (
    RegionSpec,
    dominant_states,
    participation_factors,
    perturbed_builder,
    sensitivity,
    sweep,
    targets_from,
)

EXIT_INFEASIBLE = 2
DEFAULT_ERRORS_PCT = (-50.0, -10.0, -7.5, -2.5, 2.5, 7.5, 10.0, 50.0)
DEFAULT_TARGET = (0.5, 5.0)


class UsageExitMixin:
    """Usage errors exit with 1 so that 2 only ever means an infeasible attack"""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):
        if not standalone_mode:
            return super().main(args, prog_name, complete_var, standalone_mode, **extra)
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
        except click.ClickException as e:
            e.show()
            sys.exit(1 if isinstance(e, click.UsageError) else e.exit_code)
        except click.Abort:
            click.echo("Aborted!", err=True)
            sys.exit(1)
        sys.exit(rv if isinstance(rv, int) else 0)


class EvcsCommand(UsageExitMixin, click.Command):
    pass


class EvcsGroup(UsageExitMixin, click.Group):
    command_class = EvcsCommand


def _configure_logging(ctx, param, verbose):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )


def common_options(f):
    """Options shared by every subcommand"""
    options = [
        click.option("--grid", "grid_path", type=click.Path(dir_okay=False), default=None,
                     help="Grid spec JSON (default: manhattan.json from $EVCS_ATTACK_DATA_DIR or bundled)"),
        click.option("--node", "attack_node", default="B4", show_default=True, help="Load node the attacker controls"),
        click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
                     help="Report directory (default: reports/<command>)"),
        click.option("--hour", type=int, default=None, help="Hour of week 0..167 selecting the EVCS cap"),
        click.option("--scale", type=float, default=1.0, show_default=True, help="EVCS demand scale factor"),
        click.option("--cap-mw", type=float, default=None, help="Explicit compromisable demand cap in MW"),
        click.option("--eta", type=float, default=None, help="Chance-constraint tail probability"),
        click.option("--stdev", "stdev_mw", type=float, default=None, help="Demand estimate stdev in MW"),
        click.option("--stdev-from-profile", is_flag=True, help="Take the stdev from the EVCS profile"),
        click.option("--trip-node", default=None, help="Generator whose trip defines the operating state"),
        click.option("--horizon", "horizon_s", type=float, default=DEFAULT_HORIZON_S, show_default=True),
        click.option("--dt", "dt_s", type=float, default=DEFAULT_DT_S, show_default=True),
        click.option("--seed", type=int, default=0, show_default=True),
        click.option("--pu", is_flag=True, help="Print per-unit instead of MW"),
        click.option("-v", "--verbose", is_flag=True, callback=_configure_logging, expose_value=False, is_eager=True),
    ]
    for option in reversed(options):
        f = option(f)
    return f


@contextmanager
def stage(label: str) -> Iterator[None]:
    """Turn library errors into a stage-labelled message and exit status 1"""
    try:
        yield
    except (EvcsAttackError, ValueError, OSError) as e:
        click.echo(f"❌ [{label}] {e}", err=True)
        click.get_current_context().exit(1)


@dataclass
class Run:
    config: RunConfig
    spec: GridSpec
    model: StateSpaceModel
    load: LoadParams
    bundle: ReportBundle
    pu: bool = False
    x: Optional[np.ndarray] = None
    capture_time: Optional[float] = None

    def power(self, value_pu: float) -> str:
        if self.pu:
            return f"{fmt(value_pu)} pu"
        return f"{fmt(value_pu * self.spec.base_mva)} MW"

    def cap_pu(self) -> float:
        if self.config.cap_mw is not None:
            return self.spec.to_pu(self.config.cap_mw)
        return self.load.cap(self.config.hour)

    def uncertainty(self) -> Optional[UncertaintySpec]:
        if self.config.eta is None:
            return None
        if self.config.stdev_from_profile:
            stdev = self.load.stdev_at(self.config.hour)
        else:
            stdev = self.spec.to_pu(self.config.stdev_mw or 0.0)
        return UncertaintySpec(eta=self.config.eta, stdev=stdev)

    def capture(self) -> np.ndarray:
        with stage("simulation"):
            trip = GeneratorTrip.from_spec(self.spec, self.config.trip_node or self.spec.reference_id)
            self.capture_time, self.x = capture_operating_state(
                self.model, trip, horizon=self.config.horizon_s, dt=self.config.dt_s
            )
        return self.x

    def header(self) -> List[str]:
        return [
            f"evcs-attack {__version__} {self.config.command}",
            f"grid: {self.spec.name} ({self.config.grid_path})",
            f"attack node: {self.model.attack_node}, n = {self.model.n}",
            f"config hash: {self.config.config_hash()}",
        ]


def start_run(command: str, options: dict, **fields) -> Run:
    """Build the RunConfig, load the grid and assemble the model"""
    pu = options.pop("pu")
    grid_path = options.pop("grid_path") or str(default_grid_path())
    out_dir = options.pop("out_dir") or str(Path("reports") / command)

    with stage("config"):
        config = RunConfig(command=command, grid_path=grid_path, out_dir=out_dir, **options, **fields)

    with stage("load"):
        spec = load_grid_spec(config.grid_path)
        dataset_hash = sha256_of(Path(config.grid_path))

    with stage("model"):
        if config.scale != 1.0:
            spec = scale_evcs_demand(spec, config.attack_node, config.scale)
        model = assemble_descriptor(spec, config.attack_node)
        load = spec.load(config.attack_node)

    bundle = ReportBundle(Path(config.out_dir), config.config_hash(), dataset_hash, __version__)
    return Run(config=config, spec=spec, model=model, load=load, bundle=bundle, pu=pu)


def finish_run(run: Run, summary: List[str]):
    with stage("export"):
        manifest = run.bundle.finish(run.header() + summary, extra={"config": run.config.to_dict()})
    click.echo(f"\n📁 Reports: {run.bundle.out_dir} ({len(run.bundle.files)} files, {manifest.name})")


def parse_targets(texts: Tuple[str, ...], xi: Optional[float], omega: Optional[float]) -> np.ndarray:
    """Explicit complex targets (conjugates added), else the (xi, omega_n) pair, else 0.5 +/- 5j"""
    if texts:
        values = [complex(t.replace(" ", "").replace("i", "j")) for t in texts]
        closed = list(values)
        for v in values:
            if v.imag != 0 and not any(abs(w - v.conjugate()) < 1e-12 for w in values):
                closed.append(v.conjugate())
        return np.array(closed)
    if xi is not None or omega is not None:
        if xi is None or omega is None:
            raise ValueError("--xi and --omega go together")
        return targets_from(xi, omega)
    re, im = DEFAULT_TARGET
    return np.array([complex(re, im), complex(re, -im)])


@click.group(cls=EvcsGroup)
@click.version_option(__version__, prog_name="evcs-attack")
def cli():
    """EVCS Attack - load-altering attack synthesis and vulnerability analysis for transmission grids"""
    pass


@cli.command()
@common_options
def model(**options):
    """Pre-attack spectrum, controllability and participation report"""
    run = start_run("model", options)

    with stage("model"):
        spec_a = spectrum(run.model.A)
        mc, rank = controllability_matrix(run.model.A, run.model.B)
        singular_values = np.linalg.svd(mc, compute_uv=False)
        participation = participation_factors(run.model.A)

    names = run.model.index_map.state_names()
    slowest = least_damped(spec_a)

    with stage("export"):
        run.bundle.write_spectrum(spec_a)
        run.bundle.write_json(
            "model.json",
            {
                "n": run.model.n,
                "attack_node": run.model.attack_node,
                "state_names": names,
                "stable": spec_a.is_stable,
                "max_real_part": spec_a.max_real,
                "rank_mc": rank,
                "mc_singular_values_relative": [float(s / singular_values[0]) for s in singular_values],
                "model_hash": run.model.fingerprint(),
                "least_damped_mode_participation": dict(dominant_states(participation, names, slowest)),
            },
        )

    click.echo(f"\n📄 Grid: {run.spec.name}")
    click.echo("-" * 40)
    click.echo(f"States: {run.model.n}  (generators {len(run.spec.generators)}, loads {len(run.spec.loads)})")
    click.echo(f"Attack node: {run.model.attack_node}")
    click.echo(f"rank(Mc): {rank}")
    click.echo("\n📊 Eigenvalues:")
    for value in spec_a.eigenvalues:
        click.echo(f"  • {fmt(value.real):>14} {'+' if value.imag >= 0 else '-'} j{fmt(abs(value.imag))}")
    if spec_a.is_stable:
        click.echo("\n✅ Pre-attack model is stable")
    else:
        click.echo("\n⚠️  Pre-attack model has eigenvalues with Re >= 0")

    finish_run(
        run,
        [f"stable: {spec_a.is_stable}", f"rank(Mc): {rank}"] + [f"eig: {fmt(v.real)} {fmt(v.imag)}" for v in spec_a],
    )


@cli.command()
@common_options
@click.option("--xi", type=float, default=None, help="Target damping ratio")
@click.option("--omega", type=float, default=None, help="Target natural frequency (rad/s)")
@click.option("--target", "target_texts", multiple=True, help="Target eigenvalue such as 0.5+5j (conjugate added)")
@click.option("--simulate", "run_simulation", is_flag=True, help="Simulate the compromised grid and detect trips")
def attack(xi, omega, target_texts, run_simulation, **options):
    """Synthesize the least-norm attack moving eigenvalues to the targets"""
    with stage("config"):
        targets = parse_targets(target_texts, xi, omega)
    run = start_run("attack", options, targets=tuple((v.real, v.imag) for v in targets))
    x = run.capture()

    with stage("synthesis"):
        plan = synthesize(run.model, targets, x, run.cap_pu(), uncertainty=run.uncertainty())

    with stage("export"):
        run.bundle.write_plan(plan)
        run.bundle.write_spectrum(plan.achieved, "achieved_spectrum.csv")

    click.echo(f"\n🎯 Targets: {', '.join(f'{fmt(v.real)}{v.imag:+.9g}j' for v in plan.targets)}")
    click.echo(f"Operating state captured at t = {fmt(run.capture_time)} s")
    click.echo(f"Required demand: {run.power(plan.delta_p_pu)}  (cap {run.power(plan.cap_pu)}, "
               f"margin {run.power(plan.alpha_pu)})")
    click.echo(f"Relocation error: {fmt(plan.epsilon)}")

    summary = [
        f"feasible: {plan.feasible}",
        f"delta_p_mw: {fmt(plan.delta_p_mw)}",
        f"cap_mw: {fmt(plan.cap_pu * run.spec.base_mva)}",
        f"alpha_mw: {fmt(plan.alpha_mw)}",
        f"epsilon: {fmt(plan.epsilon)}",
    ]

    if run_simulation and plan.feasible:
        with stage("simulation"):
            trace = simulate(run.model.closed_loop(plan.k_a), x, horizon=run.config.horizon_s, dt=run.config.dt_s)
            events = detect_overfrequency_trip(trace)
        with stage("export"):
            run.bundle.write_trace(trace)
            run.bundle.write_trips(events)
        for event in events:
            click.echo(f"⚡ Trip: {event.node} above {fmt(event.threshold_hz)} Hz from t = {fmt(event.start_time)} s")
        if not events:
            click.echo("No generator trip within the horizon")
        summary.append(f"trip_events: {len(events)}")

    finish_run(run, summary)
    if not plan.feasible:
        if plan.reason == "placement":
            click.echo(f"\n❌ Infeasible: targets missed (eps = {fmt(plan.epsilon)})", err=True)
        else:
            click.echo(f"\n❌ Infeasible: demand exceeds the cap by {run.power(plan.shortfall_pu)}", err=True)
        click.get_current_context().exit(EXIT_INFEASIBLE)
    click.echo("\n✅ Feasible attack")


@cli.command("simulate")
@common_options
def simulate_cmd(**options):
    """Simulate the generator-trip scenario and capture the operating state"""
    run = start_run("simulate", options)
    x = run.capture()

    with stage("simulation"):
        trip = GeneratorTrip.from_spec(run.spec, run.config.trip_node or run.spec.reference_id)
        trace = simulate(
            run.model,
            np.zeros(run.model.n),
            horizon=run.config.horizon_s,
            dt=run.config.dt_s,
            disturbance=disturbance_vector(run.model, trip),
        )
        events = detect_overfrequency_trip(trace)

    with stage("export"):
        run.bundle.write_trace(trace)
        run.bundle.write_trips(events)
        run.bundle.write_json(
            "operating_state.json",
            {
                "trip_node": trip.node,
                "lost_power_pu": trip.lost_power,
                "capture_time_s": run.capture_time,
                "x": dict(zip(run.model.index_map.state_names(), (float(v) for v in x))),
            },
        )

    click.echo(f"\n⚡ Trip of {trip.node}: {run.power(trip.lost_power)} lost")
    click.echo(f"Trip boundary reached at t = {fmt(run.capture_time)} s")
    finish_run(run, [f"trip_node: {trip.node}", f"capture_time_s: {fmt(run.capture_time)}"])


@cli.command("sweep")
@common_options
@click.option("--xi-min", type=float, default=-0.09, show_default=True)
@click.option("--xi-max", type=float, default=0.03, show_default=True)
@click.option("--xi-step", type=float, default=0.003, show_default=True)
@click.option("--omega-min", type=float, default=2.5, show_default=True)
@click.option("--omega-max", type=float, default=12.6, show_default=True)
@click.option("--omega-step", type=float, default=0.1, show_default=True)
@click.option("--workers", type=int, default=1, show_default=True, help="Cells evaluated concurrently")
def sweep_cmd(xi_min, xi_max, xi_step, omega_min, omega_max, omega_step, workers, **options):
    """Minimum demand over the region of vulnerability"""
    bounds = (xi_min, xi_max, xi_step, omega_min, omega_max, omega_step)
    run = start_run("sweep", options, region=bounds, workers=workers)

    with stage("sweep"):
        region = RegionSpec(*bounds)
    x = run.capture()

    with stage("sweep"):
        result = sweep(run.model, x, run.cap_pu(), region, uncertainty=run.uncertainty(), workers=workers)

    with stage("export"):
        run.bundle.write_sweep(result)

    available = [c for c in result.cells if not c.not_available]
    click.echo(f"\n📊 Cells: {len(result.cells)}  (xi {len(result.xi_values)} x omega {len(result.omega_values)})")
    click.echo(f"Feasible: {result.metadata['feasible_cells']}   With epsilon <= 0.1: {len(available)}")
    if available:
        best = min(available, key=lambda c: c.delta_p_mw)
        click.echo(f"Cheapest cell: xi = {fmt(best.xi)}, omega_n = {fmt(best.omega_n)} -> "
                   f"{run.power(best.delta_p_mw / run.spec.base_mva)}")

    finish_run(
        run,
        [
            f"cells: {len(result.cells)}",
            f"feasible_cells: {result.metadata['feasible_cells']}",
            f"available_cells: {len(available)}",
        ],
    )


def _parse_errors(text: str) -> Tuple[float, ...]:
    return tuple(float(v) for v in text.replace(" ", "").split(",") if v)


@cli.command("sensitivity")
@common_options
@click.option("--errors", "errors_text", default=",".join(f"{e:g}" for e in DEFAULT_ERRORS_PCT), show_default=True,
              help="Comma-separated parameter errors in percent")
@click.option("--xi", type=float, default=0.03, show_default=True, help="Target cell damping ratio")
@click.option("--omega", type=float, default=12.6, show_default=True, help="Target cell natural frequency (rad/s)")
def sensitivity_cmd(errors_text, xi, omega, **options):
    """Minimum demand toward one cell under uniform grid-parameter errors"""
    with stage("config"):
        error_pcts = _parse_errors(errors_text)
    run = start_run("sensitivity", options, cell=(xi, omega), error_pcts=error_pcts)
    x = run.capture()

    with stage("sweep"):
        rows = sensitivity(
            perturbed_builder(run.spec, run.config.attack_node),
            error_pcts,
            (xi, omega),
            x,
            run.cap_pu(),
            uncertainty=run.uncertainty(),
        )

    with stage("export"):
        run.bundle.write_sensitivity(rows)

    click.echo(f"\n📊 Sensitivity toward xi = {fmt(xi)}, omega_n = {fmt(omega)}")
    click.echo("-" * 40)
    for row in rows:
        shown = "NA" if row.not_available or row.delta_p_mw is None else run.power(row.delta_p_mw / run.spec.base_mva)
        click.echo(f"  {row.error_pct:+7.1f}%  {shown:>20}  {'feasible' if row.feasible else 'infeasible'}")

    finish_run(run, [f"rows: {len(rows)}", f"feasible_rows: {sum(r.feasible for r in rows)}"])
