"""Command-line front end.

Exit codes: 0 on success, 2 for invalid input (bad flags, parse errors,
malformed reports), 3 for I/O failures.
"""

from __future__ import annotations

import csv
import io
import json
import sys
import time
from importlib import resources
from pathlib import Path

import click

from . import protocols
from .circuit import Circuit, Measure, ParseError
from .dsl import parse, serialize
from .rng import MAX_SEED
from .simulator import NoiseModel, RunConfig, run_analytic, run_shots

SCHEMA_VERSION = "1.0"
EXIT_USAGE = 2
EXIT_IO = 3

PROTOCOLS = ("prep", "bell", "ghz3", "ghz4", "ghz5")


class IOFailure(click.ClickException):
    exit_code = EXIT_IO


class InputError(click.ClickException):
    exit_code = EXIT_USAGE


def load_schema() -> dict:
    return json.loads(resources.files("qteleport").joinpath("data/report.schema.json").read_text())


def _config(shots, seed, depol, readout, analytic, **extra) -> dict:
    cfg = {
        "shots": None if analytic else shots,
        "seed": seed,
        "noise": {"depolarizing_p": depol, "readout_flip_q": readout},
        "analytic": analytic,
    }
    cfg.update(extra)
    return cfg


def _run_config(shots, seed, depol, readout) -> RunConfig:
    noise = NoiseModel(depol, readout) if (depol or readout) else None
    return RunConfig(shots=shots, seed=seed, noise=noise)


def _with_measurements(circuit: Circuit) -> tuple[Circuit, bool]:
    if circuit.has_measurement:
        return circuit, False
    ins = list(circuit.instructions) + [Measure(q, q) for q in range(circuit.n_qubits)]
    return Circuit(circuit.n_qubits, ins), True


def _circuit_results(circuit: Circuit, analytic: bool, run_cfg: RunConfig | None, workers: int) -> dict:
    circuit, implicit = _with_measurements(circuit)
    results = {
        "circuit": {
            "n_qubits": circuit.n_qubits,
            "n_classical_bits": circuit.n_classical_bits,
            "implicit_measure": implicit,
        },
        "histogram": None,
        "distribution": None,
    }
    if analytic:
        probs = run_analytic(circuit).probabilities
        width = circuit.n_classical_bits
        results["distribution"] = {
            "bitstrings": [format(k, f"0{width}b") if width else "" for k in range(probs.size)],
            "probabilities": [float(p) for p in probs],
        }
    else:
        results["histogram"] = run_shots(circuit, run_cfg, workers=workers).as_dict()
    return results


def _csv(results: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if results.get("distribution") is not None:
        writer.writerow(["bitstring", "probability"])
        dist = results["distribution"]
        writer.writerows(zip(dist["bitstrings"], (repr(p) for p in dist["probabilities"])))
    else:
        hist = results["histogram"]
        writer.writerow(["bitstring", "count", "probability"])
        for key, count in hist["counts"].items():
            writer.writerow([key, count, repr(count / hist["shots"])])
    return buf.getvalue()


def _emit(command: str, config: dict, results: dict, started: float, fmt: str, output) -> None:
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": config,
        "results": results,
        "timing_ms": round((time.perf_counter() - started) * 1000.0, 3),
    }
    if fmt == "csv":
        if results.get("histogram") is None and results.get("distribution") is None:
            raise InputError("CSV output is only available for flat histograms; use --format json")
        text = _csv(results)
    else:
        text = json.dumps(report, indent=2) + "\n"
    _write(text, output)


def _write(text: str, output) -> None:
    if output is None or output == "-":
        click.echo(text, nl=False)
        return
    try:
        Path(output).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot write {output}: {exc.strerror or exc}") from exc


def _common(f):
    options = [
        click.option("--shots", type=click.IntRange(min=1), default=8192, show_default=True,
                     help="Number of shots."),
        click.option("--seed", type=click.IntRange(0, MAX_SEED), default=0, envvar="QTELEPORT_SEED",
                     show_default=True, help="Run seed (falls back to $QTELEPORT_SEED)."),
        click.option("--analytic", is_flag=True, help="Exact probabilities instead of sampling."),
        click.option("--noise-depol", type=click.FloatRange(0, 1), default=0.0,
                     help="Per-gate depolarizing probability."),
        click.option("--noise-readout", type=click.FloatRange(0, 1), default=0.0,
                     help="Per-bit readout flip probability."),
        click.option("--workers", type=click.IntRange(min=0), default=1,
                     help="Threads for shot sampling (0 = one per CPU); results do not depend on it."),
        click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True),
        click.option("-o", "--output", type=click.Path(dir_okay=False), default=None,
                     help="Write the report here instead of stdout."),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _check_analytic_noise(analytic, depol, readout):
    if analytic and (depol or readout):
        raise click.UsageError("--analytic runs are noiseless; drop the --noise-* flags")


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Statevector circuit simulator and teleportation harness."""


@main.command()
@click.argument("path", type=click.Path(dir_okay=False))
@_common
def run(path, shots, seed, analytic, noise_depol, noise_readout, workers, fmt, output):
    """Run a .qc circuit file."""
    started = time.perf_counter()
    _check_analytic_noise(analytic, noise_depol, noise_readout)
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise IOFailure(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        circuit = parse(data)
    except ParseError as exc:
        raise InputError(f"{path}:{exc.line}:{exc.column}: {exc.kind}: {exc.message}") from exc
    run_cfg = None if analytic else _run_config(shots, seed, noise_depol, noise_readout)
    results = _circuit_results(circuit, analytic, run_cfg, workers)
    config = _config(shots, seed, noise_depol, noise_readout, analytic, source=str(path))
    _emit("run", config, results, started, fmt, output)


@main.command()
@click.option("--mode", type=click.Choice(protocols.MODES), default="postselect", show_default=True)
@_common
def teleport(mode, shots, seed, analytic, noise_depol, noise_readout, workers, fmt, output):
    """Run the teleportation experiment and report Bob's conditional populations."""
    started = time.perf_counter()
    _check_analytic_noise(analytic, noise_depol, noise_readout)
    if fmt == "csv":
        raise click.UsageError("teleport reports are nested; use --format json")
    run_cfg = None if analytic else _run_config(shots, seed, noise_depol, noise_readout)
    report = protocols.run_teleport_experiment(mode, run_cfg, workers=workers)
    config = _config(shots, seed, noise_depol, noise_readout, analytic, mode=mode)
    _emit("teleport", config, {"teleport": report.as_dict()}, started, fmt, output)


def protocol_circuit(name: str) -> Circuit:
    if name == "prep":
        return protocols.prep_circuit()
    if name == "bell":
        return protocols.bell_circuit(measure=True)
    return protocols.ghz_circuit(int(name[3:]), measure=True)


@main.command()
@click.argument("name", type=click.Choice(PROTOCOLS))
@click.option("--emit-circuit", is_flag=True, help="Print the circuit program instead of running it.")
@_common
def protocol(name, emit_circuit, shots, seed, analytic, noise_depol, noise_readout, workers, fmt, output):
    """Run a named protocol circuit (prep, bell, ghz3, ghz4, ghz5)."""
    started = time.perf_counter()
    circuit = protocol_circuit(name)
    if emit_circuit:
        _write(serialize(circuit), output)
        return
    _check_analytic_noise(analytic, noise_depol, noise_readout)
    run_cfg = None if analytic else _run_config(shots, seed, noise_depol, noise_readout)
    results = _circuit_results(circuit, analytic, run_cfg, workers)
    if name == "prep":
        results["prep"] = protocols.run_prep_experiment(run_cfg, workers=workers).as_dict()
    config = _config(shots, seed, noise_depol, noise_readout, analytic, protocol=name)
    _emit("protocol", config, results, started, fmt, output)


@main.command()
@click.argument("report_path", type=click.Path(dir_okay=False))
@click.argument("out_path", type=click.Path(dir_okay=False))
def plot(report_path, out_path):
    """Render a JSON report as an SVG bar chart with dotted theory lines."""
    import jsonschema

    from .plotting import render_report

    try:
        text = Path(report_path).read_text(encoding="utf-8")
    except OSError as exc:
        raise IOFailure(f"cannot read {report_path}: {exc.strerror or exc}") from exc
    try:
        report = json.loads(text)
        jsonschema.validate(report, load_schema())
    except (ValueError, jsonschema.ValidationError) as exc:
        detail = exc.message if isinstance(exc, jsonschema.ValidationError) else str(exc)
        raise InputError(f"{report_path} is not a valid report: {detail}") from exc
    try:
        render_report(report, out_path)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    except OSError as exc:
        raise IOFailure(f"cannot write {out_path}: {exc.strerror or exc}") from exc


if __name__ == "__main__":
    sys.exit(main())
