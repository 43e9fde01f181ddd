"""Operator entry point: ingest, harmonize, match, report, export, serve,
make-fixtures.

Offline-first: the fixture provider directory is the default link source and
live fetching requires --online plus an endpoint template, so acceptance runs
are reproducible. Every output file embeds the config hash and tool version;
every command is rerunnable over its own outputs.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import Optional

import click

from concordia import __version__
from concordia.config import RunConfig
from concordia.fixtures import load_authority_csv, make_fixtures
from concordia.harmonizer import harmonize_cluster, inconsistency_rate
from concordia.matcher import AuthorityIndex, Confidence, MatchCandidate, generate_candidates
from concordia.model import ConcordiaError, ConfigError, DataError, Diagnostic
from concordia.nquads import export_quads, parse_statements
from concordia.providers import CachingHttpProvider, FixtureProvider
from concordia.records import (
    actor_from_json,
    actor_to_json,
    parse_actor_records,
    record_statements,
)
from concordia.review import DecisionLog, apply_decisions, load_rejected_pairs
from concordia.service import read_jsonl, write_jsonl

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


def _load_config(config_path: Optional[str], **overrides) -> RunConfig:
    config = RunConfig.load(config_path) if config_path else RunConfig()
    data_dir = overrides.pop("data_dir", None)
    if data_dir is not None:
        new_data = Path(data_dir)
        # derived paths follow the data dir unless the config pinned them
        if config.fixture_dir == config.data_dir / "provider":
            config.fixture_dir = new_data / "provider"
        if config.cache_dir == config.data_dir / "cache":
            config.cache_dir = new_data / "cache"
        config.data_dir = new_data
    for key, value in overrides.items():
        if value is not None:
            setattr(config, key, value)
    config.validate()
    return config


def _write_diagnostics(path: Path, diagnostics: list[Diagnostic]) -> None:
    if not diagnostics:
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        "".join(d.to_json() + "\n" for d in diagnostics), encoding="utf-8"
    )


def _provider(config: RunConfig):
    if config.offline:
        return FixtureProvider(config.fixture_dir)
    return CachingHttpProvider(config.endpoint_template, config.cache_dir)


common_options = [
    click.option("--config", "config_path", type=click.Path(), help="config file (JSON)"),
    click.option("--data-dir", type=click.Path(), help="override the data directory"),
    click.option("--priority", "priority_spec", help='e.g. "loc,gnd,rkd,ulan,wikidata;exclude=viaf"'),
    click.option("--threshold-confident", type=float),
    click.option("--threshold-review", type=float),
    click.option("--offline/--online", "offline", default=None),
    click.option("--seed", type=int),
]


def with_common_options(fn):
    for option in reversed(common_options):
        fn = option(fn)
    return fn


@click.group()
@click.version_option(version=__version__, prog_name="concordia")
def cli():
    """Reconciliation toolkit for cultural-heritage knowledge graphs."""


@cli.command()
@with_common_options
def ingest(config_path, **overrides):
    """Parse institutional CSV records into the store and statement files."""
    config = _load_config(config_path, **{k: v for k, v in overrides.items() if v is not None})
    data = config.data_dir
    diagnostics: list[Diagnostic] = []
    mapping_path = data / "actor_mapping.json"
    if not mapping_path.exists():
        raise DataError(f"missing mapping file: {mapping_path}")
    mapping = json.loads(mapping_path.read_text(encoding="utf-8"))
    records = []
    for name in ("actors.csv", "match_records.csv"):
        source = data / name
        if source.exists():
            with source.open(encoding="utf-8") as handle:
                records.extend(
                    parse_actor_records(
                        handle, mapping, filename=name, diagnostics=diagnostics
                    )
                )
    statements = []
    for record in records:
        statements.extend(
            record_statements(record, config.namespace, retrieved_at=config.timestamp)
        )
    store = data / "store"
    store.mkdir(parents=True, exist_ok=True)
    (store / "actors.json").write_text(
        json.dumps([actor_to_json(r) for r in records], indent=1, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    artworks_src = data / "artworks.json"
    if artworks_src.exists():
        (store / "artworks.json").write_text(
            artworks_src.read_text(encoding="utf-8"), encoding="utf-8"
        )
    (store / "statements.nq").write_text(
        export_quads(statements, header_lines=config.header_lines()), encoding="utf-8"
    )
    _write_diagnostics(store / "diagnostics.jsonl", diagnostics)
    click.echo(f"ingested {len(records)} records, {len(statements)} statements")


@cli.command()
@with_common_options
@click.option("--depth-limit", type=int)
def harmonize(config_path, depth_limit, **overrides):
    """Run the cross-authority reconciliation pipeline over ingested actors."""
    config = _load_config(config_path, **{k: v for k, v in overrides.items() if v is not None})
    if depth_limit is not None:
        config.depth_limit = depth_limit
    data = config.data_dir
    actors_path = data / "store" / "actors.json"
    if not actors_path.exists():
        raise DataError(f"nothing ingested yet: {actors_path} missing (run ingest first)")
    records = [actor_from_json(r) for r in json.loads(actors_path.read_text(encoding="utf-8"))]
    registry = config.registry()
    for institution in sorted({r.institution for r in records}):
        if registry.get(f"local:{institution}") is None:
            registry.register_institution(institution, config.institution_base(institution))
    priority = config.priority()
    if not priority.institutions:
        priority = type(priority)(
            ranked=priority.ranked,
            excluded=priority.excluded,
            institutions=frozenset(f"local:{r.institution}" for r in records),
        )
    provider = _provider(config)
    diagnostics: list[Diagnostic] = []
    clusters = []
    for record in sorted(records, key=lambda r: (r.institution, r.local_id)):
        clusters.append(
            harmonize_cluster(
                record,
                provider,
                priority,
                config.namespace,
                registry,
                depth_limit=config.depth_limit,
                retrieved_at=config.timestamp,
                diagnostics=diagnostics,
            )
        )
    report = inconsistency_rate(clusters)
    out = data / "clusters"
    out.mkdir(parents=True, exist_ok=True)
    (out / "clusters.json").write_text(
        json.dumps(
            {"header": config.header_json(), "clusters": [c.to_json() for c in clusters]},
            indent=1,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    conflict_report = {
        "header": config.header_json(),
        "inconsistency": report.to_json(),
        "conflicted": [
            {"seed": c.seed.value, "conflicts": [x.to_json() for x in c.conflicts_detected]}
            for c in clusters
            if c.conflicts_detected
        ],
    }
    reports = data / "reports"
    reports.mkdir(parents=True, exist_ok=True)
    (reports / "conflicts.json").write_text(
        json.dumps(conflict_report, indent=1, sort_keys=True) + "\n", encoding="utf-8"
    )
    _write_diagnostics(reports / "harmonize_diagnostics.jsonl", diagnostics)
    rate = "n/a" if report.rate is None else f"{report.rate:.2f}"
    click.echo(
        f"harmonized {len(clusters)} clusters, "
        f"inconsistency_rate {rate} ({report.conflicted}/{report.eligible})"
    )


@cli.command()
@with_common_options
@click.option("--external", "external_path", type=click.Path(exists=True),
              help="externally produced candidates (JSON Lines) to merge in")
def match(config_path, external_path, **overrides):
    """Generate record-to-authority candidates for unresolved records."""
    config = _load_config(config_path, **{k: v for k, v in overrides.items() if v is not None})
    data = config.data_dir
    actors_path = data / "store" / "actors.json"
    if not actors_path.exists():
        raise DataError(f"nothing ingested yet: {actors_path} missing (run ingest first)")
    records = [actor_from_json(r) for r in json.loads(actors_path.read_text(encoding="utf-8"))]
    authority_path = data / "authority.csv"
    index = AuthorityIndex(load_authority_csv(authority_path)) if authority_path.exists() else AuthorityIndex([])
    clusters_path = data / "clusters" / "clusters.json"
    resolved_refs = set()
    if clusters_path.exists():
        doc = json.loads(clusters_path.read_text(encoding="utf-8"))
        for cluster in doc.get("clusters", []):
            if cluster.get("resolved"):
                resolved_refs.add(cluster["seed"])
    log = DecisionLog(data / "decisions" / "decisions.jsonl")
    candidates: dict[str, MatchCandidate] = {}
    if external_path:
        for row in read_jsonl(Path(external_path)):
            candidate = MatchCandidate.from_json_line(json.dumps(row))
            candidates[candidate.id] = candidate
    existing = {
        c["id"]: MatchCandidate.from_json_line(json.dumps(c))
        for c in read_jsonl(data / "matches" / "candidates.jsonl")
    }
    suppressed = load_rejected_pairs(log.load(), {**existing, **candidates})
    matched = 0
    for record in sorted(records, key=lambda r: (r.institution, r.local_id)):
        if record.uri(config.namespace).value in resolved_refs:
            continue
        for candidate in generate_candidates(
            record,
            index,
            thresholds=config.thresholds(),
            slack_years=config.date_slack_years,
            suppressed_pairs=suppressed,
        ):
            candidates[candidate.id] = candidate
            matched += 1
    # drop externally supplied candidates whose pair was rejected earlier
    candidates = {
        cid: c for cid, c in candidates.items() if c.pair_key() not in suppressed
    }
    write_jsonl(
        data / "matches" / "candidates.jsonl",
        [json.loads(c.to_json_line()) for _, c in sorted(candidates.items())],
        header=config.header_json(),
    )
    bands = {"confident": 0, "review": 0, "rejected": 0}
    for candidate in candidates.values():
        bands[candidate.confidence.value] += 1
    click.echo(
        f"matched {matched} generated + {len(candidates) - matched} external candidates; "
        f"bands confident={bands['confident']} review={bands['review']} "
        f"rejected={bands['rejected']}"
    )


@cli.command()
@with_common_options
def report(config_path, **overrides):
    """Print the inconsistency rate and match band counts."""
    config = _load_config(config_path, **{k: v for k, v in overrides.items() if v is not None})
    data = config.data_dir
    for line in config.header_lines():
        click.echo(f"# {line}")
    clusters_path = data / "clusters" / "clusters.json"
    if clusters_path.exists():
        doc = json.loads(clusters_path.read_text(encoding="utf-8"))
        from concordia.harmonizer import Cluster

        clusters = [Cluster.from_json(c) for c in doc.get("clusters", [])]
        rate_report = inconsistency_rate(clusters)
        if rate_report.rate is None:
            click.echo("inconsistency_rate n/a (0 eligible clusters)")
        else:
            click.echo(
                f"inconsistency_rate {rate_report.rate:.2f} "
                f"({rate_report.conflicted}/{rate_report.eligible})"
            )
    else:
        click.echo("inconsistency_rate n/a (no clusters file)")
    candidates_path = data / "matches" / "candidates.jsonl"
    bands = {"confident": 0, "review": 0, "rejected": 0}
    for row in read_jsonl(candidates_path):
        bands[row.get("confidence", "review")] += 1
    click.echo(
        f"match_bands confident={bands['confident']} review={bands['review']} "
        f"rejected={bands['rejected']}"
    )


@cli.command()
@with_common_options
@click.option("--output", "-o", type=click.Path(), help="output file (default stdout)")
def export(config_path, output, **overrides):
    """Write the harmonized graph as canonical N-Quads."""
    config = _load_config(config_path, **{k: v for k, v in overrides.items() if v is not None})
    data = config.data_dir
    statements = []
    for path in (data / "store" / "statements.nq", data / "modeling.nq"):
        if path.exists():
            statements.extend(parse_statements(path.read_text(encoding="utf-8")))
    clusters_path = data / "clusters" / "clusters.json"
    if clusters_path.exists():
        from concordia.harmonizer import Cluster

        doc = json.loads(clusters_path.read_text(encoding="utf-8"))
        clusters = [Cluster.from_json(c) for c in doc.get("clusters", [])]
        log = DecisionLog(data / "decisions" / "decisions.jsonl")
        candidates = {
            c["id"]: MatchCandidate.from_json_line(json.dumps(c))
            for c in read_jsonl(data / "matches" / "candidates.jsonl")
        }
        result = apply_decisions(
            clusters, log.load(), candidates, config.priority(), config.registry(),
            config.namespace,
        )
        statements.extend(result.statements)
    text = export_quads(statements, header_lines=config.header_lines())
    if output:
        Path(output).parent.mkdir(parents=True, exist_ok=True)
        Path(output).write_text(text, encoding="utf-8")
        click.echo(f"exported {len(statements)} statements to {output}")
    else:
        click.echo(text, nl=False)


@cli.command()
@with_common_options
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8321, show_default=True, type=int)
def serve(config_path, host, port, **overrides):
    """Start the review service (HTTP, /v1/...)."""
    config = _load_config(config_path, **{k: v for k, v in overrides.items() if v is not None})
    import uvicorn

    from concordia.service import create_app

    uvicorn.run(create_app(config), host=host, port=port, log_level="info")


@cli.command("make-fixtures")
@with_common_options
@click.option("--clusters", default=100, show_default=True, type=int)
@click.option("--conflicts", default=27, show_default=True, type=int)
@click.option("--match-size", default=200, show_default=True, type=int)
@click.option("--artwork-pairs", default=12, show_default=True, type=int)
def make_fixtures_cmd(config_path, clusters, conflicts, match_size, artwork_pairs, **overrides):
    """Generate the synthetic corpus (records, provider files, ground truth)."""
    config = _load_config(config_path, **{k: v for k, v in overrides.items() if v is not None})
    make_fixtures(
        config.data_dir,
        seed=config.seed,
        clusters=clusters,
        conflicts=conflicts,
        namespace=config.namespace,
        match_size=match_size,
        artwork_pairs=artwork_pairs,
    )
    # the saved copy lives inside the data dir, so its paths are relative to it
    saved = RunConfig.from_json(
        {**config.to_json(), "data_dir": ".", "fixture_dir": "provider", "cache_dir": "cache"}
    )
    saved.save(config.data_dir / "config.json")
    click.echo(
        f"fixtures written to {config.data_dir} "
        f"({clusters} clusters, {conflicts} conflicts, seed {config.seed})"
    )


def main(argv: Optional[list[str]] = None) -> int:
    """Entry point with the documented exit codes: 0 ok, 1 usage, 2 data
    error, 3 internal. Errors print one machine-parseable line on stderr."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.exceptions.Abort:
        print('error\t{"kind": "aborted"}', file=sys.stderr)
        return EXIT_USAGE
    except click.ClickException as exc:
        print(
            "error\t" + json.dumps({"kind": "usage", "message": exc.format_message()}),
            file=sys.stderr,
        )
        return EXIT_USAGE
    except (ConfigError, DataError) as exc:
        print(
            "error\t" + json.dumps({"kind": "data", "message": str(exc)}),
            file=sys.stderr,
        )
        return EXIT_DATA
    except ConcordiaError as exc:
        print(
            "error\t" + json.dumps({"kind": "internal", "message": str(exc)}),
            file=sys.stderr,
        )
        return EXIT_INTERNAL
    except Exception as exc:  # noqa: BLE001 - the CLI boundary reports, not raises
        print(
            "error\t"
            + json.dumps({"kind": "internal", "message": f"{type(exc).__name__}: {exc}"}),
            file=sys.stderr,
        )
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
