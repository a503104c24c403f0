"""Command-line interface.

Subcommand groups mirror the pipeline: ``noise`` (field generation),
``seed`` (persona-seed extraction), ``analyze`` (text metrics),
``emospace`` (axis projection), ``cycles`` (phase detection) and
``session`` (closed-loop runs, sweeps, export).
"""

from __future__ import annotations

import json
import sys

import click
import numpy as np

from . import cycles as cyc
from . import emospace as es
from . import noise
from . import seedex
from . import session as ss
from . import textmetrics as tm


@click.group()
def main():
    """Reflex-loop text generation and analysis toolkit."""


# ---------------------------------------------------------------------------
# noise
# ---------------------------------------------------------------------------

@main.group()
def noise_group():
    """Noise-field operations."""


main.add_command(noise_group, name="noise")


@noise_group.command("gen")
@click.option("--seed", type=int, default=None, help="Explicit 32-bit seed.")
@click.option("--signals", default=None,
              help="9 comma-separated rates plus a timestamp (10 values).")
@click.option("--length", type=int, default=None, help="Explicit field length.")
@click.option("--cycle", type=int, default=1, help="Cycle index for sizing.")
@click.option("--out", type=click.Path(), default=None)
def noise_gen(seed, signals, length, cycle, out):
    """Generate a noise field from a seed or raw stochastic signals."""
    cfg = noise.NoiseConfig()
    if signals is not None:
        vals = [v.strip() for v in signals.split(",")]
        if len(vals) != 10:
            raise click.UsageError("--signals needs 9 rates + 1 timestamp")
        sig = noise.StochasticSignals(
            rates=tuple(float(v) for v in vals[:9]),
            timestamp_us=int(vals[9]),
        )
        seed = noise.derive_seed(sig)
    if seed is None:
        raise click.UsageError("provide --seed or --signals")
    n = length if length is not None else noise.field_length(cycle, cfg)
    fld = noise.generate_field(seed, n)
    fld = noise.normalize_entropy(fld, cfg)
    fld = noise.inject_bursts(fld, cfg)
    payload = {
        "seed": fld.seed,
        "length": fld.length,
        "entropy_bits": round(fld.entropy_bits, 6),
        "tau_irregularity": round(fld.tau_irregularity, 6),
        "warning": fld.warning,
        "chars": fld.chars,
    }
    _emit(payload, out)


# ---------------------------------------------------------------------------
# seed
# ---------------------------------------------------------------------------

@main.group(name="seed")
def seed_group():
    """Persona-seed extraction from noise fields."""


@seed_group.command("extract")
@click.option("--in", "infile", type=click.Path(exists=True), required=True)
@click.option("--variant", type=click.Choice(["sigmoid", "acf"]),
              default="sigmoid")
@click.option("--out", type=click.Path(), default=None)
def seed_extract(infile, variant, out):
    """Extract a persona seed and phase parameters from a field file."""
    chars = open(infile, encoding="utf-8").read().strip()
    ps = seedex.build_seed(chars)
    if variant == "sigmoid":
        phases = seedex.phase_params(ps, variant="sigmoid-appendixA")
    else:
        rhythm = seedex.rhythm_signal(chars)
        acf = seedex.autocorrelation(rhythm, k_max=max(2, len(rhythm) // 3))
        feats = seedex.extract_rhythm(acf)
        phases = seedex.phase_params(ps, variant="acf-section3",
                                     rhythm_feats=feats)
    payload = {
        "seed": ps.to_dict(),
        "phases": {
            "phi_noise": round(phases.phi_noise, 6),
            "phi_rhythm": round(phases.phi_rhythm, 6),
            "phi_resonance": round(phases.phi_resonance, 6),
            "variant": phases.variant,
        },
    }
    _emit(payload, out)


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

@main.command("analyze")
@click.option("--in", "infile", type=click.Path(exists=True), required=True)
@click.option("--tree", type=click.Path(exists=True), default=None,
              help="Dependency tree TSV (index, surface, parent, relation).")
@click.option("--mode", type=click.Choice(["latin", "cjk"]), default="latin")
@click.option("--out", type=click.Path(), default=None)
def analyze(infile, tree, mode, out):
    """Compute the full metric bundle for a text file."""
    text = open(infile, encoding="utf-8").read()
    stream = tm.tokenize(
        text, "whitespace-latin" if mode == "latin" else "char-cjk"
    )
    dep = tm.DependencyTree.from_tsv(open(tree, encoding="utf-8").read()) \
        if tree else None
    bundle = tm.build_bundle(stream, tree=dep)
    payload = {
        k: (round(v, 6) if isinstance(v, float) else v)
        for k, v in bundle.to_dict().items()
    }
    _emit(payload, out)


# ---------------------------------------------------------------------------
# emospace
# ---------------------------------------------------------------------------

@main.group(name="emospace")
def emospace_group():
    """Emotional-space projection and classification."""


@emospace_group.command("project")
@click.option("--bundle", type=click.Path(exists=True), required=True,
              help="JSON file of axis input features.")
@click.option("--config", "axes_config", type=click.Path(exists=True),
              default=None, help="JSON axis-variant selection.")
@click.option("--out", type=click.Path(), default=None)
def emospace_project(bundle, axes_config, out):
    """Project measured features onto (SC, LE, LR)."""
    features = json.load(open(bundle, encoding="utf-8"))
    axes = json.load(open(axes_config, encoding="utf-8")) if axes_config else None
    vec = es.project(features, axes)
    payload = {
        "SC": round(vec.sc, 6),
        "LE": round(vec.le, 6),
        "LR": round(vec.lr, 6),
        "polarity": vec.polarity,
        "persona": es.classify_persona(vec),
    }
    _emit(payload, out)


# ---------------------------------------------------------------------------
# cycles
# ---------------------------------------------------------------------------

@main.group(name="cycles")
def cycles_group():
    """Phase detection over session logs."""


@cycles_group.command("detect")
@click.option("--log", "logfile", type=click.Path(exists=True), required=True)
@click.option("--variant", type=click.Choice(["threshold", "angular"]),
              default="threshold")
@click.option("--out", type=click.Path(), required=True)
def cycles_detect(logfile, variant, out):
    """Re-classify phases from a JSONL session log into a CSV table."""
    records = [
        json.loads(line)
        for line in open(logfile, encoding="utf-8")
        if line.strip()
    ]
    recs = ss.cycle_records(records)
    for r in recs:
        d = r["deltas"]
        r["phase"] = cyc.classify_phase(
            cyc.CycleObservation(d["dC"], d["dE"], d["dH"], r["resonance"]),
            variant=variant,
        )
    ss.export_phases_csv(recs, out)
    click.echo(f"wrote {len(recs)} rows to {out}")


# ---------------------------------------------------------------------------
# session
# ---------------------------------------------------------------------------

@main.group(name="session")
def session_group():
    """Closed-loop session runs."""


@session_group.command("run")
@click.option("--config", "cfgfile", type=click.Path(exists=True), default=None)
@click.option("--cycles", "n_cycles", type=int, default=100)
@click.option("--generator", type=click.Choice(["mock", "live"]),
              default="mock")
@click.option("--log", "log_path", type=click.Path(), default="session.jsonl")
def session_run(cfgfile, n_cycles, generator, log_path):
    """Run the reflex loop and write a JSONL log."""
    cfg = (
        ss.SessionConfig.from_dict(json.load(open(cfgfile, encoding="utf-8")))
        if cfgfile else ss.SessionConfig()
    )
    if generator == "live":
        raise click.UsageError(
            "live generation needs an adapter; use the library API"
        )
    records = ss.run_session(cfg, n_cycles, generator=generator,
                             log_path=log_path)
    anomalies = ss.anomaly_scan(records)
    period = ss.collapse_period(records)
    click.echo(
        f"ran {n_cycles} cycles -> {log_path}; "
        f"collapse period {period}; {len(anomalies)} anomalies"
    )


@session_group.command("sweep")
@click.option("--phi", required=True,
              help="Comma-separated phi_noise values, e.g. 0.08,0.15,0.30.")
@click.option("--cycles", "n_cycles", type=int, default=300)
@click.option("--seed", type=int, default=1)
def session_sweep(phi, n_cycles, seed):
    """Sweep phi_noise and report the measured collapse period."""
    phis = [float(v) for v in phi.split(",")]
    result = ss.sweep_phi_noise(phis, n_cycles=n_cycles, seed=seed)
    for k in phis:
        expected = 2.0 * np.pi / k
        click.echo(
            f"phi_noise={k}: measured period {result[k]} "
            f"(2*pi/phi = {expected:.1f})"
        )


@session_group.command("export")
@click.option("--log", "logfile", type=click.Path(exists=True), required=True)
@click.option("--fmt", type=click.Choice(["csv", "seedfile", "plotdata"]),
              default="csv")
@click.option("--out", type=click.Path(), required=True)
def session_export(logfile, fmt, out):
    """Convert a JSONL session log into csv / seedfile / plotdata."""
    records = [
        json.loads(line)
        for line in open(logfile, encoding="utf-8")
        if line.strip()
    ]
    ss.export(records, out, fmt=fmt)
    click.echo(f"wrote {out}")


def _emit(payload: dict, out: str | None):
    text = json.dumps(payload, ensure_ascii=False, indent=2)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


if __name__ == "__main__":
    sys.exit(main())
