"""Command-line interface.

Exit codes: 0 on success, 1 for usage or configuration errors, 2 when a
pipeline stage or evaluation fails at run time.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click

from .communities import read_partition
from .config import load_config, render_config, stage_seed
from .errors import ColltocError, ConfigError
from .evaluation import (
    make_intrusion_samples,
    read_annotations,
    read_samples,
    score_intrusion,
    write_samples,
)
from .graph import PROFILES
from .pipeline import STAGES, read_segments, run_eval, run_pipeline
from .synthgen import SynthSpec, generate_collection


def _config_options(required: bool):
    def decorate(fn):
        fn = click.option("--k", "k", type=int, default=None, help="Number of ToC entries.")(fn)
        fn = click.option("--profile", type=click.Choice(sorted(PROFILES)), default=None,
                          help="Similarity weight preset.")(fn)
        fn = click.option("--seed", type=int, default=None, help="Pipeline seed.")(fn)
        fn = click.option("--out", "output_dir", type=click.Path(file_okay=False), default=None,
                          help="Override the config's output directory.")(fn)
        fn = click.option("--config", "config_path", type=click.Path(dir_okay=False), required=required,
                          help="Pipeline config file (TOML).")(fn)
        return fn

    return decorate


def _load(config_path, seed, profile, k, output_dir):
    if config_path is None:
        raise ConfigError("--config is required")
    return load_config(config_path).with_overrides(seed=seed, profile=profile, k=k, output_dir=output_dir)


def _report(result) -> None:
    counts = result.manifest.get("counts", {})
    click.echo(" ".join(f"{name}={value}" for name, value in counts.items()))
    for name, path in sorted(result.artifacts.items()):
        click.echo(f"  {name}: {path}")


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log stage progress.")
def cli(verbose: bool) -> None:
    """Extract a collection-wide table of contents from a directory of documents."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")


def _stage_command(name: str, help_text: str):
    @_config_options(required=True)
    def command(config_path, seed, profile, k, output_dir):
        config = _load(config_path, seed, profile, k, output_dir)
        _report(run_pipeline(config, until=name))

    command.__doc__ = help_text
    cli.command(name)(command)


_stage_command("ingest", "Load and normalize the corpus; writes docs.jsonl.")
_stage_command("detect-headers", "Detect headers and segment documents; writes segments.jsonl.")
_stage_command("build-graph", "Embed segments and build the similarity graph (export with export_graph = true).")
_stage_command("communities", "Run Louvain; writes partition.json.")
_stage_command("extract-toc", "Select the k best-covering communities; writes toc.json.")
_stage_command("ground", "Ground ToC topics to document spans; writes grounding.json.")


@cli.command("run")
@_config_options(required=True)
def run_command(config_path, seed, profile, k, output_dir):
    """Run the full pipeline and write every artifact plus run_manifest.json."""
    config = _load(config_path, seed, profile, k, output_dir)
    _report(run_pipeline(config, until=STAGES[-1]))


@cli.command("evaluate")
@click.option("--pred", "pred_path", required=True, type=click.Path(dir_okay=False), help="Predicted grounding (JSON lines).")
@click.option("--gold", "gold_path", required=True, type=click.Path(dir_okay=False), help="Gold grounding (JSON lines).")
@click.option("--mapping", "mapping_path", required=True, type=click.Path(dir_okay=False),
              help="JSON object mapping predicted topic_id to gold label.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--trials", type=click.IntRange(min=1), default=100, show_default=True, help="Random-baseline trials.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="Write the report here.")
def evaluate_command(pred_path, gold_path, mapping_path, seed, trials, out_path):
    """Score a grounding against gold with exact and partial matches, plus baselines."""
    report = run_eval(pred_path, gold_path, mapping_path, seed=seed, trials=trials)
    text = json.dumps(report, indent=2) + "\n"
    if out_path:
        Path(out_path).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@cli.command("intrusion-sample")
@click.option("--run-dir", required=True, type=click.Path(file_okay=False, exists=True),
              help="Pipeline output directory holding partition.json and segments.jsonl.")
@click.option("--count", type=click.IntRange(min=1), default=50, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
def intrusion_sample_command(run_dir, count, seed, out_path):
    """Draw header-intrusion samples (9 community headers + 1 intruder)."""
    run = Path(run_dir)
    partition = read_partition(run / "partition.json")
    segments = read_segments(run / "segments.jsonl")
    communities = [[segments[v].head_text for v in members] for members in partition.members()]
    samples = make_intrusion_samples(communities, count, seed=stage_seed(seed, "intrusion"))
    write_samples(samples, out_path)
    click.echo(f"wrote {len(samples)} samples to {out_path}")


@cli.command("intrusion-score")
@click.option("--samples", "samples_path", required=True, type=click.Path(dir_okay=False))
@click.option("--annotations", "annotations_path", required=True, type=click.Path(dir_okay=False))
def intrusion_score_command(samples_path, annotations_path):
    """Score intrusion annotations: accuracy and confidence."""
    result = score_intrusion(read_samples(samples_path), read_annotations(annotations_path))
    click.echo(json.dumps(result, indent=2))


@cli.command("synth-gen")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--n-docs", type=int, default=30, show_default=True)
@click.option("--n-topics", type=int, default=6, show_default=True)
@click.option("--paraphrases", type=int, default=3, show_default=True, help="Paraphrases per topic.")
@click.option("--distractor-rate", type=float, default=0.2, show_default=True)
@click.option("--omit-rate", type=float, default=0.1, show_default=True)
@click.option("--jitter", type=int, default=2, show_default=True, help="Maximum adjacent swaps per document.")
@click.option("--seed", type=int, default=0, show_default=True)
def synth_gen_command(out_dir, n_docs, n_topics, paraphrases, distractor_rate, omit_rate, jitter, seed):
    """Generate a synthetic collection with gold ToC and grounding, plus a ready config.toml."""
    spec = SynthSpec(
        n_docs=n_docs,
        n_topics=n_topics,
        paraphrases_per_topic=paraphrases,
        distractor_rate=distractor_rate,
        omit_rate=omit_rate,
        order_jitter=jitter,
        seed=seed,
    )
    collection = generate_collection(spec)
    collection.write(out_dir)
    (Path(out_dir) / "config.toml").write_text(render_config("corpus", "run", k=n_topics, seed=seed), encoding="utf-8")
    click.echo(f"wrote {len(collection.texts)} documents to {Path(out_dir) / 'corpus'}")


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="colltoc", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        return 1
    except ColltocError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
