"""Operator CLI: project lifecycle, model inspection/export, protocol
simulations, and the HTTP server.

Exit codes: 0 success, 1 domain error (diagnostic on stderr), 2 usage
error. Budget and backend selection live in the run configuration file,
never in flags, so a run is reproducible from one artifact.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .consensus import simulate_consensus, write_simulation_csv
from .devloop import fuzz_dev_loops
from .engine import Engine, ProjectStore, RunConfig, build_gateway
from .engine.api import serve as serve_api
from .errors import RwmError
from .worldmodel import export_graphml, run_query
from .worldmodel import persist as wm_persist

DEFAULT_STORE = "./projects"


def _engine(store: str, config: str | None) -> Engine:
    run_config = RunConfig.load(config) if config else RunConfig()
    gateway = build_gateway(run_config, fixtures_base=Path(config).parent if config else None)
    return Engine(store=ProjectStore(store), config=run_config, gateway=gateway)


def _echo_json(payload) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


@click.group()
def main() -> None:
    """Research world model engine."""


@main.command()
@click.option("--store", default=DEFAULT_STORE, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Run configuration JSON (backends, budget, protocol knobs).")
@click.option("--interest", required=True)
@click.option("--seeds", "seeds_path", type=click.Path(exists=True), default=None,
              help="JSON file with a list of seed papers.")
@click.option("--project-id", default=None)
@click.option("--rwm", "rwm_path", type=click.Path(), default=None,
              help="Shared model file for cross-project carry-over.")
@click.option("--json", "as_json", is_flag=True)
def init(store, config_path, interest, seeds_path, project_id, rwm_path, as_json):
    """Bootstrap a project and print its pending decisions."""
    engine = _engine(store, config_path)
    seeds = json.loads(Path(seeds_path).read_text()) if seeds_path else []
    state = engine.start_project(interest, seeds=seeds, project_id=project_id,
                                 prior_rwm_path=rwm_path)
    if as_json:
        _echo_json({"project": state.project_id, "phase": state.phase.value,
                    "pending": [d.to_dict() for d in state.pending]})
    else:
        click.echo(f"project {state.project_id} at {state.phase.value}")
        for decision in state.pending:
            click.echo(f"pending {decision.kind}: options {decision.option_ids()}")


@main.command()
@click.option("--store", default=DEFAULT_STORE, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--project", "project_id", required=True)
@click.option("--steps", default=1, show_default=True, help="How many advances to run.")
@click.option("--to-done", is_flag=True, help="Advance until Done or blocked.")
@click.option("--json", "as_json", is_flag=True)
def advance(store, config_path, project_id, steps, to_done, as_json):
    """Run the next phase (or several)."""
    engine = _engine(store, config_path)
    state = engine.resume(project_id)
    ran = 0
    while (to_done and state.phase.value != "Done") or (not to_done and ran < steps):
        if state.pending and to_done:
            break
        engine.advance(state)
        ran += 1
        if state.pending and not to_done:
            break
    payload = {"project": project_id, "phase": state.phase.value,
               "advanced": ran, "pending": [d.kind for d in state.pending]}
    _echo_json(payload) if as_json else click.echo(
        f"{project_id} at {state.phase.value} after {ran} step(s); "
        f"pending: {[d.kind for d in state.pending]}")


@main.command()
@click.option("--store", default=DEFAULT_STORE, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--project", "project_id", required=True)
@click.option("--kind", required=True,
              type=click.Choice(["select_direction", "select_track", "approve_gap_slate"]))
@click.option("--option", required=True)
@click.option("--json", "as_json", is_flag=True)
def decide(store, config_path, project_id, kind, option, as_json):
    """Answer a pending decision."""
    engine = _engine(store, config_path)
    state = engine.resume(project_id)
    engine.submit_decision(state, kind, option)
    payload = {"project": project_id, "kind": kind, "option": option,
               "phase": state.phase.value, "pending": [d.kind for d in state.pending]}
    _echo_json(payload) if as_json else click.echo(
        f"recorded {kind}={option}; pending now {[d.kind for d in state.pending]}")


@main.command()
@click.option("--store", default=DEFAULT_STORE, show_default=True)
@click.option("--project", "project_id", required=True)
@click.option("--json", "as_json", is_flag=True)
def status(store, project_id, as_json):
    """Phase, pending decisions, and budget for a project."""
    engine = _engine(store, None)
    state = engine.resume(project_id)
    payload = {
        "project": project_id,
        "phase": state.phase.value,
        "phase_work_done": state.phase_work_done,
        "pending": [d.to_dict() for d in state.pending],
        "budget": state.budget.to_dict(),
        "records": sorted(state.records),
    }
    if as_json:
        _echo_json(payload)
    else:
        click.echo(f"{project_id}: phase {state.phase.value}")
        for decision in state.pending:
            click.echo(f"  pending {decision.kind}: {decision.option_ids()}")
        budget = state.budget
        click.echo(f"  budget: {budget.spent_calls}/{budget.max_calls} calls, "
                   f"{budget.spent_tokens}/{budget.max_tokens} tokens")


@main.group()
def graph() -> None:
    """Inspect or export a project's world model."""


@graph.command("show")
@click.option("--store", default=DEFAULT_STORE, show_default=True)
@click.option("--project", "project_id", required=True)
@click.option("--json", "as_json", is_flag=True)
def graph_show(store, project_id, as_json):
    engine = _engine(store, None)
    state = engine.resume(project_id)
    payload = engine.graph_payload(state)
    if as_json:
        _echo_json(payload)
    else:
        wm = engine.model(state)
        click.echo(f"{wm.node_count()} nodes, {wm.edge_count()} edges")
        verified = sum(1 for u in wm.uncertainty.values() if u == 0)
        click.echo(f"{verified} verified elements")


@graph.command("export")
@click.option("--store", default=DEFAULT_STORE, show_default=True)
@click.option("--project", "project_id", required=True)
@click.option("--format", "fmt", type=click.Choice(["graphml", "json"]), default="graphml",
              show_default=True)
@click.option("--out", "out_path", type=click.Path(), required=True)
def graph_export(store, project_id, fmt, out_path):
    engine = _engine(store, None)
    state = engine.resume(project_id)
    wm = engine.model(state)
    if fmt == "graphml":
        export_graphml(wm, out_path)
    else:
        wm_persist.save(wm, out_path)
    click.echo(f"wrote {fmt} to {out_path}")


@graph.command("query")
@click.option("--store", default=DEFAULT_STORE, show_default=True)
@click.option("--project", "project_id", required=True)
@click.option("--pattern", required=True,
              type=click.Choice(["neighbors", "shared_modules", "limitations_of",
                                 "missing_evaluations", "cross_links"]))
@click.option("--param", "params", multiple=True, metavar="KEY=VALUE",
              help="Query parameters, e.g. --param min_count=3.")
@click.option("--json", "as_json", is_flag=True)
def graph_query(store, project_id, pattern, params, as_json):
    """Run a structural query against the project's model."""
    engine = _engine(store, None)
    state = engine.resume(project_id)
    kwargs = {}
    for entry in params:
        key, _, value = entry.partition("=")
        if not key or not value:
            raise click.UsageError(f"--param needs KEY=VALUE, got {entry!r}")
        kwargs[key] = value
    try:
        results = run_query(engine.model(state), pattern, **kwargs)
    except KeyError as exc:
        raise RwmError(f"query {pattern} is missing parameter {exc}") from exc
    if as_json:
        _echo_json({"pattern": pattern, "results": results})
    else:
        for item in results:
            click.echo(item)
        if not results:
            click.echo("(no results)")


@main.command("simulate-consensus")
@click.option("--agents", default=3, show_default=True)
@click.option("--hit-rate", default=0.3, show_default=True)
@click.option("--round2-hit-rate", default=None, type=float)
@click.option("--noise-rate", default=0.2, show_default=True)
@click.option("--trials", default=1000, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Also write the CSV to this path.")
def simulate_consensus_cmd(agents, hit_rate, round2_hit_rate, noise_rate,
                           trials, seed, out_path):
    """Monte-Carlo recall/precision of the probing protocol (CSV on stdout)."""
    result = simulate_consensus(agents, hit_rate, trials, seed=seed,
                                round2_hit_rate=round2_hit_rate,
                                noise_rate=noise_rate)
    from .consensus import CSV_HEADER
    click.echo(",".join(CSV_HEADER))
    click.echo(",".join(str(v) for v in result.csv_row()))
    if out_path:
        write_simulation_csv([result], out_path)


@main.command("simulate-loop")
@click.option("--runs", default=100, show_default=True)
@click.option("--t-max", default=5, show_default=True)
@click.option("--seed", default=7, show_default=True)
@click.option("--pass-probability", default=0.0, show_default=True,
              help="Per-iteration chance the fuzzed gate passes.")
@click.option("--json", "as_json", is_flag=True)
def simulate_loop_cmd(runs, t_max, seed, pass_probability, as_json):
    """Fuzz the development loop and audit termination plus search dedup."""
    result = fuzz_dev_loops(runs, t_max=t_max, seed=seed,
                            pass_probability=pass_probability)
    if as_json:
        _echo_json(result.to_dict())
    else:
        click.echo(f"{result.runs} runs, t_max {result.t_max}: "
                   f"max iterations {result.max_iterations}, "
                   f"finalized {result.finalized_runs}, "
                   f"duplicate searches {result.duplicate_search_events}")


@main.command()
@click.option("--store", default=DEFAULT_STORE, show_default=True)
@click.option("--config", "config_path", type=click.Path(exists=True), default=None)
@click.option("--bind", default="127.0.0.1:8787", show_default=True)
def serve(store, config_path, bind):
    """Serve the HTTP API (console backend)."""
    engine = _engine(store, config_path)
    click.echo(f"serving on {bind}")
    serve_api(engine, bind)


def entrypoint(argv=None) -> int:
    """Dispatch with the documented exit-code contract."""
    try:
        main.main(args=argv, standalone_mode=False)
        return 0
    except click.exceptions.UsageError as exc:
        click.echo(exc.format_message(), err=True)
        click.echo(exc.ctx.get_usage() if exc.ctx else "", err=True)
        return 2
    except click.exceptions.Abort:
        return 1
    except click.exceptions.ClickException as exc:
        exc.show()
        return 1
    except RwmError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1


def run() -> None:
    sys.exit(entrypoint())


if __name__ == "__main__":
    run()
