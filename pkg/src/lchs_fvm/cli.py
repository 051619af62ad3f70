"""Command-line runner: single experiments, table sweeps, verification suites and circuit dumps.

Exit codes are 0 on success, 1 when a verification check fails and 2 for an
invalid configuration (unknown key, bad value, qubit budget exceeded).
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import click
import numpy as np

from . import analysis, circuits, reference, solver
from .fvm import assemble_multi
from .lchs import EPS_MAX, LchsPlan, make_plan

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG = 0, 1, 2

CSV_COLUMNS = ("experiment", "scheme", "bc", "n", "m", "m_o", "r", "R", "L1", "L2", "Linf", "p_success", "wall_ms")
TABLE_EXTRA = ("paper_L1", "paper_L2", "paper_Linf", "dev_L1", "dev_L2", "dev_Linf")
SUITES = ("commutators", "blocks", "eigen", "bounds")


class ConfigError(ValueError):
    """Raised for any configuration problem; maps to exit code 2."""


@dataclass
class RunConfig:
    """One experiment run.  ``None`` fields fall back to the experiment's defaults."""

    experiment: int = 1
    scheme: str | None = None
    n: int | None = None
    m: int | None = None
    m_o: int | None = None
    r_steps: int | None = None
    R: float | None = None
    eps_lchs: float = reference.EPS_LCHS
    delta: float = reference.DELTA
    record_time: bool = True
    csv: str | None = None
    json: str | None = None
    dump: str | None = None

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a flat JSON object")
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        for key, val in data.items():
            _check_type(key, known[key].type, val)
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(data)

    def validate(self) -> None:
        try:
            case = reference.get_case(self.experiment)
        except KeyError as exc:
            raise ConfigError(str(exc.args[0])) from None
        if self.scheme is not None and self.scheme not in case.schemes:
            raise ConfigError(f"experiment {self.experiment} supports schemes {case.schemes}, not {self.scheme!r}")
        for name, low in (("n", 1), ("m", 1), ("m_o", 0), ("r_steps", 1)):
            val = getattr(self, name)
            if val is not None and val < low:
                raise ConfigError(f"{name} must be at least {low}")
        if self.R is not None and not self.R > 0:
            raise ConfigError("R must be positive")
        if not 0 < self.eps_lchs <= EPS_MAX:
            raise ConfigError(f"eps_lchs must lie in (0, {EPS_MAX}]")
        if not self.delta > 0:
            raise ConfigError("delta must be positive")
        if self.m_o is not None and not case.inhomogeneous:
            raise ConfigError(f"experiment {self.experiment} has no source term; m_o does not apply")


def _check_type(key: str, annotation: str, val) -> None:
    if val is None:
        if "None" not in annotation:
            raise ConfigError(f"{key} may not be null")
        return
    if annotation.startswith("int"):
        ok = isinstance(val, int) and not isinstance(val, bool)
    elif annotation.startswith("float"):
        ok = isinstance(val, (int, float)) and not isinstance(val, bool)
    elif annotation.startswith("bool"):
        ok = isinstance(val, bool)
    else:
        ok = isinstance(val, str)
    if not ok:
        raise ConfigError(f"{key} has the wrong type ({type(val).__name__})")


# ----------------------------------------------------------------------------- running

@dataclass(frozen=True)
class Resolved:
    case: reference.ExperimentCase
    scheme: str
    n: int
    m: int | None
    m_o: int | None
    r_steps: int
    plan: LchsPlan | None

    @property
    def R(self) -> float | None:
        return None if self.plan is None else self.plan.R


def resolve(cfg: RunConfig) -> Resolved:
    """Fill the unset fields from the experiment defaults and check the qubit budget."""
    cfg.validate()
    case = reference.get_case(cfg.experiment)
    scheme = cfg.scheme or case.schemes[0]
    n = case.n if cfg.n is None else cfg.n
    m = case.default_m(scheme) if cfg.m is None else cfg.m
    m_o = (case.m_o if cfg.m_o is None else cfg.m_o) if case.inhomogeneous else None
    r_steps = case.r if cfg.r_steps is None else cfg.r_steps
    plan = None
    if m is not None:
        R = case.R(scheme, m) if cfg.R is None else cfg.R
        plan = make_plan(cfg.eps_lchs, cfg.delta, m, R)
    problem = case.problem(scheme, n)
    params, _ = assemble_multi(problem)
    if not circuits.needs_lchs(params, problem.c):
        # Purely unitary generator: no kernel quadrature, so no ancillas and no R.
        m, plan = None, None
    elif plan is None:
        raise ConfigError(f"experiment {case.id} with the {scheme} scheme needs m (LCHS ancillas)")
    nq = case.d * n + (m or 0) + (m_o or 0)
    if nq > solver.MAX_QUBITS:
        raise ConfigError(f"{nq} qubits exceed the simulation budget of {solver.MAX_QUBITS}")
    return Resolved(case, scheme, n, m, m_o, r_steps, plan)


def run_experiment(cfg: RunConfig) -> tuple[solver.SolveReport, Resolved, np.ndarray]:
    """Solve one configured experiment; returns the report, resolved settings and the exact solution."""
    res = resolve(cfg)
    problem = res.case.problem(res.scheme, res.n)
    u_ref = res.case.reference(problem)
    if res.case.inhomogeneous:
        rep = solver.solve_inhomogeneous(problem, res.plan, res.case.T, res.m_o, res.r_steps, u_ref)
    else:
        rep = solver.solve_homogeneous(problem, res.plan, res.case.T, res.r_steps, u_ref)
    return rep, res, u_ref


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.4e}"
    return str(v)


def bc_label(case: reference.ExperimentCase) -> str:
    kinds = [bc.kind for bc in case.bc]
    return kinds[0] if len(set(kinds)) == 1 else "/".join(kinds)


def result_row(rep: solver.SolveReport, res: Resolved, record_time: bool = True) -> dict:
    err = rep.errors
    return {"experiment": res.case.id, "scheme": res.scheme, "bc": bc_label(res.case), "n": res.n,
            "m": res.m, "m_o": res.m_o, "r": res.r_steps, "R": res.R,
            "L1": err.get("L1"), "L2": err.get("L2"), "Linf": err.get("Linf"),
            "p_success": rep.p_success, "wall_ms": 1e3 * rep.wall_time if record_time else 0.0}


def rows_to_csv(rows: list[dict], columns=CSV_COLUMNS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    return buf.getvalue()


def dump_points(problem, rep: solver.SolveReport, u_ref: np.ndarray) -> str:
    """Per-cell CSV with coordinates, the phase-aligned simulated solution and the exact one."""
    grid = problem.grid()
    names = ["x", "y", "z"][: len(grid)] if len(grid) <= 3 else [f"x{p}" for p in range(len(grid))]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(names + ["u_sim", "u_ref"])
    u_sim = rep.u_real
    for i in range(len(u_ref)):
        w.writerow([f"{g[i]:.10e}" for g in grid] + [f"{u_sim[i]:.10e}", f"{u_ref[i]:.10e}"])
    return buf.getvalue()


def execute(cfg: RunConfig) -> tuple[str, dict]:
    """Run ``cfg`` and write the configured files; returns the CSV text and the JSON report."""
    rep, res, u_ref = run_experiment(cfg)
    row = result_row(rep, res, cfg.record_time)
    text = rows_to_csv([row])
    report = {"config": dataclasses.asdict(cfg), "row": {k: row[k] for k in CSV_COLUMNS},
              "report": rep.to_dict()}
    if cfg.csv:
        Path(cfg.csv).write_text(text)
    if cfg.json:
        Path(cfg.json).write_text(json.dumps(report, indent=2, sort_keys=True, default=float) + "\n")
    if cfg.dump:
        Path(cfg.dump).write_text(dump_points(res.case.problem(res.scheme, res.n), rep, u_ref))
    return text, report


# ----------------------------------------------------------------------------- tables

def table_filename(table: reference.PaperTable) -> str:
    return f"table{table.number:02d}_{table.scheme}.csv"


def _table_row(args) -> dict:
    table, n, m, m_o, paper, record_time = args
    cfg = RunConfig(experiment=table.experiment, scheme=table.scheme, n=n, m=m, m_o=m_o,
                    record_time=record_time)
    rep, res, _ = run_experiment(cfg)
    row = result_row(rep, res, record_time)
    for key, val in zip(("L1", "L2", "Linf"), paper):
        row[f"paper_{key}"] = val
        row[f"dev_{key}"] = abs(row[key] - val) / val
    return row


def run_table(table: reference.PaperTable, record_time: bool = True, jobs: int = 1) -> list[dict]:
    args = [(table, n, m, m_o, vals, record_time) for n, m, m_o, vals in reference.table_runs(table)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_table_row, args))
    return [_table_row(a) for a in args]


# ----------------------------------------------------------------------------- verification

def run_suite(name: str, n: int = 5) -> list[analysis.BoundReport]:
    if name == "commutators":
        return analysis.commutator_suite(n)
    if name == "blocks":
        return analysis.block_suite()
    if name == "eigen":
        return analysis.eigen_suite()
    if name == "bounds":
        return analysis.bound_suite()
    raise ConfigError(f"unknown suite {name!r}")


def classify(report: analysis.BoundReport, strict: bool = False) -> str:
    """``PASS``, ``FAIL`` or ``ERRATUM`` (a failing entry whose printed form is known to be wrong)."""
    if report.ok:
        return "PASS"
    if not strict and analysis.is_erratum(report):
        return "ERRATUM"
    return "FAIL"


# ----------------------------------------------------------------------------- click wiring

def _config_options(f):
    opts = [
        click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                     help="Flat JSON RunConfig; flags given on the command line override it."),
        click.option("--experiment", type=int, help="Experiment id."),
        click.option("--scheme", type=str, help="Spatial scheme (central, exponential or upwind)."),
        click.option("--n", type=int, help="Qubits per spatial dimension."),
        click.option("--m", type=int, help="LCHS ancilla qubits."),
        click.option("--m-o", "m_o", type=int, help="Outer time-quadrature qubits."),
        click.option("--r-steps", "r_steps", type=int, help="Second-order Trotter steps."),
        click.option("--R", "R", type=float, help="Truncation radius of the kernel integral."),
        click.option("--eps-lchs", "eps_lchs", type=float, help="Truncation tolerance used to pick gamma."),
        click.option("--delta", type=float, help="Kernel parameter delta."),
    ]
    for opt in reversed(opts):
        f = opt(f)
    return f


def _build_config(config_path, **flags) -> RunConfig:
    data = {}
    if config_path:
        data = json.loads(RunConfig.from_json(Path(config_path).read_text()).to_json())
    data.update({k: v for k, v in flags.items() if v is not None})
    return RunConfig.from_dict(data)


def _fail_config(exc: Exception) -> None:
    click.echo(f"config error: {exc}", err=True)
    sys.exit(EXIT_CONFIG)


@click.group()
def main() -> None:
    """Simulate advection-diffusion experiments with the LCHS select circuits."""


@main.command()
@_config_options
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), help="CSV output (default: stdout).")
@click.option("--json", "json_path", type=click.Path(dir_okay=False), help="JSON report output.")
@click.option("--dump", "dump_path", type=click.Path(dir_okay=False), help="Per-cell solution dump.")
@click.option("--no-time", is_flag=True, help="Write wall_ms as zero so repeated runs are byte-identical.")
@click.option("--save-config", type=click.Path(dir_okay=False), help="Write the effective config as JSON.")
def run(config_path, csv_path, json_path, dump_path, no_time, save_config, **flags) -> None:
    """Run one experiment and report its relative errors."""
    try:
        cfg = _build_config(config_path, csv=csv_path, json=json_path, dump=dump_path,
                            record_time=False if no_time else None, **flags)
        resolve(cfg)
    except (ConfigError, ValueError, KeyError) as exc:
        _fail_config(exc)
    if save_config:
        Path(save_config).write_text(cfg.to_json())
    text, _ = execute(cfg)
    if not cfg.csv:
        click.echo(text, nl=False)


@main.command()
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="tables", show_default=True)
@click.option("--table", "only", type=int, multiple=True, help="Restrict to these table numbers.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker processes per table.")
@click.option("--no-time", is_flag=True, help="Write wall_ms as zero so repeated runs are byte-identical.")
def tables(out_dir, only, jobs, no_time) -> None:
    """Reproduce the reported error tables, one CSV per table."""
    known = {t.number for t in reference.PAPER_TABLES}
    bad = sorted(set(only) - known)
    if bad:
        _fail_config(ConfigError(f"unknown tables {bad}; known are {sorted(known)}"))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for t in reference.PAPER_TABLES:
        if only and t.number not in only:
            continue
        rows = run_table(t, record_time=not no_time, jobs=jobs)
        path = out / table_filename(t)
        path.write_text(rows_to_csv(rows, CSV_COLUMNS + TABLE_EXTRA))
        worst = max(max(r["dev_L1"], r["dev_L2"], r["dev_Linf"]) for r in rows)
        click.echo(f"table {t.number} ({t.scheme}): {len(rows)} rows, max relative deviation {worst:.3e} -> {path}")


@main.command()
@click.option("--suite", "suites", type=click.Choice(SUITES + ("all",)), multiple=True,
              help="Suites to run (default: all).")
@click.option("--n", type=int, default=5, show_default=True, help="Register size for the commutator suite.")
@click.option("--strict", is_flag=True, help="Count known printed errata as failures.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), help="Write every record as CSV.")
def verify(suites, n, strict, csv_path) -> None:
    """Run the verification suites; exit 1 if any check fails."""
    if not 2 <= n <= 6:
        _fail_config(ConfigError("--n must lie in 2..6"))
    chosen = SUITES if not suites or "all" in suites else tuple(suites)
    failures, records = [], []
    for name in chosen:
        reports = run_suite(name, n)
        counts = {"PASS": 0, "FAIL": 0, "ERRATUM": 0}
        for r in reports:
            status = classify(r, strict)
            counts[status] += 1
            body = r.line().split(" ", 1)[1]
            click.echo(f"{status} [{name}] {body}")
            records.append((name, status, r))
            if status == "FAIL":
                failures.append(f"[{name}] {body}")
        click.echo(f"suite {name}: {counts['PASS']} pass, {counts['FAIL']} fail, {counts['ERRATUM']} known errata")
    if csv_path:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("suite", "status", "name", "measured", "bound", "ratio"))
        for name, status, r in records:
            w.writerow((name, status, r.name, f"{r.measured:.6e}", f"{r.bound:.6e}", f"{r.ratio:.6e}"))
        Path(csv_path).write_text(buf.getvalue())
    for line in failures:
        click.echo(f"FAIL {line}", err=True)
    sys.exit(EXIT_VERIFY if failures else EXIT_OK)


@main.command("dump-circuit")
@_config_options
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Gate list output (default: stdout).")
def dump_circuit(config_path, out_path, **flags) -> None:
    """Print the gate list of the configured select circuit, one gate per line."""
    try:
        cfg = _build_config(config_path, **flags)
        res = resolve(cfg)
    except (ConfigError, ValueError, KeyError) as exc:
        _fail_config(exc)
    problem = res.case.problem(res.scheme, res.n)
    params, _ = assemble_multi(problem)
    plan = res.plan if circuits.needs_lchs(params, problem.c) else None
    if res.case.inhomogeneous:
        spec = circuits.SelectSpec(params, plan, res.case.T, res.r_steps, problem.c, m_o=res.m_o, skip_identity=True)
        circ = circuits.sel_outer(spec, res.m_o, res.case.T)
    else:
        spec = circuits.SelectSpec(params, plan, res.case.T, res.r_steps, problem.c, skip_identity=True)
        circ = circuits.sel_global(spec)
    tally = " ".join(f"{k}={v}" for k, v in circ.tally().items())
    text = f"# qubits={circ.num_qubits} gates={len(circ)} {tally}\n{circ.dump()}\n"
    if out_path:
        Path(out_path).write_text(text)
    else:
        click.echo(text, nl=False)


if __name__ == "__main__":
    main()
