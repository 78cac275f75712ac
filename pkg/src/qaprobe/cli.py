"""Command-line entry points: serve, train, skill and kg management."""

from __future__ import annotations

import json
import logging
import os

import click

from .kg import KGStore
from .model import TrainConfig, generate_synthetic_dataset, save_params, template_vocab
from .model import train as train_model
from .service import SkillRegistry, create_app, dumps_canonical, load_config
from .service.wire import subgraph_wire


@click.group()
def main():
    """Workbench for probing QA models over HTTP and from the shell."""


def _registry(data_dir: str) -> SkillRegistry:
    store = KGStore(data_dir)
    return SkillRegistry(os.path.join(data_dir, "skills.json"), store=store)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True),
              default=None, help="JSON config file.")
@click.option("--host", default=None, help="Override the bind address.")
@click.option("--port", default=None, type=int, help="Override the port.")
def serve(config_path, host, port):
    """Run the HTTP service."""
    import uvicorn

    cfg = load_config(config_path)
    if host is not None:
        cfg.host = host
    if port is not None:
        cfg.port = port
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    app = create_app(cfg)
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="warning")


@main.command()
@click.option("--out", required=True, type=click.Path(),
              help="Where to write the trained params file (JSON).")
@click.option("--seed", default=13, show_default=True)
@click.option("--size", default=2200, show_default=True,
              help="Total synthetic items; the dev split comes off the tail.")
@click.option("--dev-count", default=200, show_default=True)
@click.option("--epochs", default=30, show_default=True)
@click.option("--log-every", default=5, show_default=True,
              help="Epochs between progress lines; 0 silences them.")
def train(out, seed, size, dev_count, epochs, log_every):
    """Train the toy model on the synthetic corpus and save its params."""
    examples = generate_synthetic_dataset(seed, size, dev_count)
    vocab = template_vocab()
    config = TrainConfig(epochs=epochs, seed=seed, dev_count=dev_count,
                         log_every=log_every)
    params, report = train_model(examples, vocab, config)
    save_params(out, params, vocab)
    click.echo(json.dumps({
        "params_file": out,
        "dev_exact_match": report.dev_exact_match,
        "train_items": report.train_items,
        "dev_items": report.dev_items,
        "epochs": report.epochs,
        "final_loss": report.final_loss,
    }))


@main.group()
def skill():
    """Manage the skill registry."""


@skill.command("register")
@click.argument("doc_file", type=click.Path(exists=True))
@click.option("--data-dir", default="data", show_default=True)
def skill_register(doc_file, data_dir):
    """Register a skill from a JSON document file."""
    with open(doc_file) as fh:
        doc = json.load(fh)
    registered = _registry(data_dir).register(doc)
    click.echo(dumps_canonical(registered.doc()))


@skill.command("list")
@click.option("--data-dir", default="data", show_default=True)
def skill_list(data_dir):
    """List registered skills."""
    skills = [s.doc() for s in _registry(data_dir).list()]
    click.echo(dumps_canonical({"skills": skills}))


@main.group()
def kg():
    """Manage knowledge-graph datastores."""


@kg.command("create")
@click.argument("name")
@click.option("--data-dir", default="data", show_default=True)
def kg_create(name, data_dir):
    """Create an empty knowledge graph."""
    graph = KGStore(data_dir).create(name)
    click.echo(dumps_canonical({"name": graph.name, "nodes": 0, "edges": 0}))


def _read_docs(path: str) -> list[dict]:
    docs = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                docs.append(json.loads(line))
    return docs


@kg.command("ingest-nodes")
@click.argument("name")
@click.argument("docs_file", type=click.Path(exists=True))
@click.option("--data-dir", default="data", show_default=True)
def kg_ingest_nodes(name, docs_file, data_dir):
    """Upsert node documents from a line-delimited JSON file."""
    graph = KGStore(data_dir).get(name)
    count = graph.upsert_nodes(_read_docs(docs_file))
    click.echo(dumps_canonical({"count": count}))


@kg.command("ingest-edges")
@click.argument("name")
@click.argument("docs_file", type=click.Path(exists=True))
@click.option("--data-dir", default="data", show_default=True)
@click.option("--mode", default="bulk", show_default=True,
              type=click.Choice(["strict", "bulk"]))
def kg_ingest_edges(name, docs_file, data_dir, mode):
    """Upsert edge documents from a line-delimited JSON file."""
    graph = KGStore(data_dir).get(name)
    count = graph.upsert_edges(_read_docs(docs_file), mode=mode)
    click.echo(dumps_canonical({"count": count}))


@kg.command("ingest")
@click.argument("name")
@click.option("--nodes", "nodes_file", type=click.Path(exists=True),
              default=None, help="Line-delimited node documents.")
@click.option("--edges", "edges_file", type=click.Path(exists=True),
              default=None, help="Line-delimited edge documents.")
@click.option("--data-dir", default="data", show_default=True)
def kg_ingest(name, nodes_file, edges_file, data_dir):
    """Upsert nodes and/or edges in one call (nodes first)."""
    graph = KGStore(data_dir).get(name)
    counts = {"nodes": 0, "edges": 0}
    if nodes_file is not None:
        counts["nodes"] = graph.upsert_nodes(_read_docs(nodes_file))
    if edges_file is not None:
        counts["edges"] = graph.upsert_edges(_read_docs(edges_file), mode="bulk")
    click.echo(dumps_canonical(counts))


@kg.command("subgraph")
@click.argument("name")
@click.option("--roots", required=True,
              help="Comma-separated root node ids.")
@click.option("--hops", default=2, show_default=True, type=int)
@click.option("--data-dir", default="data", show_default=True)
def kg_subgraph(name, roots, hops, data_dir):
    """Print the k-hop subgraph around the given roots."""
    graph = KGStore(data_dir).get(name)
    root_ids = [r.strip() for r in roots.split(",") if r.strip()]
    sg = graph.extract_subgraph(root_ids, hops)
    click.echo(dumps_canonical(subgraph_wire(sg)))


if __name__ == "__main__":
    main()
