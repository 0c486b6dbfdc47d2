"""Command-line entry point wiring all the pieces together.

One binary with subcommands so pipelines stay scriptable: synth writes
a transaction table, train consumes it, reliance attributes it, and so
on. Every subcommand takes --seed and reproduces bit-for-bit. Options
can come from an INI config file (one section per subcommand); explicit
flags override file values. Results go to stdout or files, diagnostics
to stderr, and reports carry a version tag in a `schema` field.
"""

import argparse
import configparser
import dataclasses
import json
import sys

import numpy as np

from .graph import build_csr, first_order_tables, read_edge_list
from .hypertune import optimize
from .model import (
    FEATURES,
    ModelConfig,
    chronological_split,
    marginal_baseline,
    read_transactions,
    save_checkpoint,
    train,
    write_transactions,
)
from .razor import razor_entropy_formula, read_pair_distribution
from .reliance import FeatureGameSpec, run_reliance
from .sgns import SgnsParams, save_embeddings, train_embeddings
from .shapley import exact_shapley, read_game_table, topk_shapley
from .synth import (
    DEFAULT_ENTITY_SCALE,
    DEFAULT_PRODUCT_SCALE,
    MarketConfig,
    generate_market,
    one_hot_affinity,
    planted_affinity,
    uniform_affinity,
)
from .walker import WalkParams, walk_stream

REPORT_SCHEMA = "razorkit-report-v1"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


def _features_arg(text):
    if text.strip() == "":
        return ()
    names = tuple(part.strip() for part in text.split(","))
    unknown = set(names) - set(FEATURES)
    if unknown:
        raise argparse.ArgumentTypeError(
            f"unknown features: {sorted(unknown)}; known: {', '.join(FEATURES)}"
        )
    return names


def _hidden_arg(text):
    if text.strip() == "":
        return ()
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad hidden layer list {text!r}")


def _bool_arg(text):
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"bad boolean {text!r}")


_MODEL_OPTIONS = [
    ("entities", int, 0, "entity vocabulary size (0 = infer from data)"),
    ("products", int, 0, "product vocabulary size (0 = infer from data)"),
    ("entity-dim", int, 16, "entity embedding width"),
    ("product-dim", int, 6, "product embedding width"),
    ("day-dim", int, 2, "weekday embedding width"),
    ("hidden", _hidden_arg, (64,), "comma-separated hidden layer sizes"),
    ("dropout", float, 0.0, "dropout probability on hidden activations"),
    ("batch-size", int, 1024, "minibatch size"),
    ("lr", float, 2e-3, "Adam learning rate"),
    ("stop-alpha", float, 0.99, "early-stopping improvement factor"),
    ("patience", int, 40, "early-stopping counter reset value"),
    ("max-epochs", int, 300, "hard epoch cap"),
    ("features", _features_arg, FEATURES, "comma-separated feature subset"),
]


def _add_options(parser, options):
    for name, kind, default, help_text in options:
        if kind is bool:
            parser.add_argument(f"--{name}", nargs="?", const=True,
                                type=_bool_arg, default=argparse.SUPPRESS,
                                help=f"{help_text} (default {default})")
        else:
            parser.add_argument(f"--{name}", type=kind,
                                default=argparse.SUPPRESS,
                                help=f"{help_text} (default {default})")


_SUBCOMMANDS = {}


def _subcommand(name, options):
    def wrap(fn):
        _SUBCOMMANDS[name] = (fn, options)
        return fn
    return wrap


def _model_config(opts, records):
    entities = opts["entities"]
    products = opts["products"]
    if entities == 0:
        entities = 1 + max(max(r.buyer, r.seller) for r in records)
    if products == 0:
        products = 1 + max(r.product for r in records)
    return ModelConfig(
        n_entities=entities,
        n_products=products,
        entity_dim=opts["entity_dim"],
        product_dim=opts["product_dim"],
        day_dim=opts["day_dim"],
        hidden_sizes=opts["hidden"],
        dropout=opts["dropout"],
        batch_size=opts["batch_size"],
        learning_rate=opts["lr"],
        early_stop_alpha=opts["stop_alpha"],
        early_stop_k=opts["patience"],
        max_epochs=opts["max_epochs"],
        seed=opts["seed"],
    )


def _emit(report, out_path):
    text = json.dumps(report, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w") as f:
            f.write(text + "\n")
        print(f"wrote report to {out_path}", file=sys.stderr)
    else:
        print(text)


@_subcommand("synth", [
    ("out", str, "transactions.tsv", "output transaction table path"),
    ("entities", int, 19, "number of entities"),
    ("products", int, 9, "number of products"),
    ("transactions", int, 15_000, "number of transactions"),
    ("affinity", str, "planted", "affinity scheme: planted, onehot or uniform"),
    ("entity-scale", float, DEFAULT_ENTITY_SCALE, "planted entity logit scale"),
    ("product-scale", float, DEFAULT_PRODUCT_SCALE, "planted product logit scale"),
    ("structure-seed", int, 7, "seed of the planted affinity draw"),
    ("volatility", float, 0.05, "daily price walk step size"),
])
def _cmd_synth(opts):
    entities, products = opts["entities"], opts["products"]
    scheme = opts["affinity"]
    if scheme == "planted":
        affinity = planted_affinity(entities, products,
                                    entity_scale=opts["entity_scale"],
                                    product_scale=opts["product_scale"],
                                    seed=opts["structure_seed"])
    elif scheme == "onehot":
        affinity = one_hot_affinity(entities, products)
    elif scheme == "uniform":
        affinity = uniform_affinity(entities, products)
    else:
        raise ValueError(f"unknown affinity scheme {scheme!r}")
    config = MarketConfig(
        n_entities=entities, n_products=products,
        n_transactions=opts["transactions"], affinity=affinity,
        price_volatility=opts["volatility"], seed=opts["seed"],
    )
    records = generate_market(config)
    write_transactions(records, opts["out"])
    print(f"wrote {len(records)} transactions to {opts['out']}", file=sys.stderr)
    return EXIT_OK


def _load_graph(opts):
    edges = read_edge_list(opts["graph"])
    if not edges:
        raise ValueError(f"{opts['graph']}: no edges")
    node_count = 1 + max(max(s, d) for s, d, _ in edges)
    return build_csr(edges, directed=opts["directed"], node_count=node_count)


_WALK_OPTIONS = [
    ("graph", str, "graph.tsv", "edge list path (src dst [weight])"),
    ("directed", bool, False, "treat edges as directed"),
    ("p", float, 1.0, "return parameter"),
    ("q", float, 1.0, "in-out parameter"),
    ("length", int, 80, "nodes per walk"),
    ("walks-per-node", int, 10, "walks started from each node"),
]


@_subcommand("walks", _WALK_OPTIONS + [
    ("out", str, "", "output path (default stdout)"),
])
def _cmd_walks(opts):
    g = _load_graph(opts)
    params = WalkParams(p=opts["p"], q=opts["q"], walk_length=opts["length"],
                        walks_per_node=opts["walks_per_node"], seed=opts["seed"])
    tables = first_order_tables(g)
    sink = open(opts["out"], "w") if opts["out"] else sys.stdout
    try:
        for epoch in range(params.walks_per_node):
            for walk in walk_stream(g, params, epoch, tables):
                sink.write(" ".join(str(v) for v in walk) + "\n")
    finally:
        if sink is not sys.stdout:
            sink.close()
    return EXIT_OK


@_subcommand("embed", _WALK_OPTIONS + [
    ("out", str, "embeddings.txt", "output embedding dump path"),
    ("dim", int, 16, "embedding width"),
    ("window", int, 5, "context window"),
    ("negatives", int, 5, "negative samples per pair"),
    ("epochs", int, 5, "passes over the walk stream"),
    ("sgns-lr", float, 0.025, "initial SGNS learning rate"),
    ("workers", int, 1, "concurrent walk consumers"),
])
def _cmd_embed(opts):
    g = _load_graph(opts)
    walk_params = WalkParams(p=opts["p"], q=opts["q"],
                             walk_length=opts["length"],
                             walks_per_node=opts["walks_per_node"],
                             seed=opts["seed"])
    sgns_params = SgnsParams(dim=opts["dim"], window=opts["window"],
                             negatives=opts["negatives"],
                             learning_rate=opts["sgns_lr"],
                             epochs=opts["epochs"], seed=opts["seed"])
    emb = train_embeddings(g, walk_params, sgns_params, workers=opts["workers"])
    save_embeddings(emb, opts["out"])
    print(f"wrote {g.node_count} x {opts['dim']} embeddings to {opts['out']}",
          file=sys.stderr)
    return EXIT_OK


@_subcommand("train", _MODEL_OPTIONS + [
    ("data", str, "transactions.tsv", "transaction table path"),
    ("checkpoint", str, "", "optional model checkpoint output"),
    ("out", str, "", "report path (default stdout)"),
])
def _cmd_train(opts):
    records = read_transactions(opts["data"])
    config = _model_config(opts, records)
    features = frozenset(opts["features"])
    result = train(records, config, features)
    train_recs, test_recs = chronological_split(records)
    baseline = marginal_baseline(train_recs, test_recs, config.n_entities)
    if opts["checkpoint"]:
        save_checkpoint(opts["checkpoint"], result.params, config,
                        result.features, result.stats)
        print(f"wrote checkpoint to {opts['checkpoint']}", file=sys.stderr)
    _emit({
        "schema": REPORT_SCHEMA,
        "command": "train",
        "config": dataclasses.asdict(config),
        "features": sorted(features),
        "epochs": len(result.test_losses),
        "train_loss": result.train_losses[-1],
        "test_loss": result.test_losses[-1],
        "marginal_baseline": baseline,
        "improvement_over_baseline": 1.0 - result.test_losses[-1] / baseline,
    }, opts["out"])
    return EXIT_OK


@_subcommand("reliance", _MODEL_OPTIONS + [
    ("data", str, "transactions.tsv", "transaction table path"),
    ("runs", int, 5, "trainings averaged per feature subset"),
    ("workers", int, 1, "concurrent subset trainings"),
    ("out", str, "", "report path (default stdout)"),
])
def _cmd_reliance(opts):
    records = read_transactions(opts["data"])
    config = _model_config(opts, records)
    spec = FeatureGameSpec(records=records, config=config,
                           universe=tuple(opts["features"]),
                           runs_per_subset=opts["runs"],
                           base_seed=opts["seed"])
    report = run_reliance(spec, workers=opts["workers"])
    _emit({
        "schema": REPORT_SCHEMA,
        "command": "reliance",
        "universe": list(report.universe),
        "sigma": list(report.sigma),
        "phi": list(report.phi),
        "h_empty": report.h_empty,
        "total_value": report.total_value,
        "evaluations": report.evaluations,
        "subset_losses": {str(mask): loss
                          for mask, loss in report.subset_losses.items()},
        "marginal_gains": [
            {"prefix": list(prefix), "gains": gains}
            for prefix, gains in report.marginal_gains
        ],
        "relaxed_efficiency": [
            {"k": k, "prefix_sum": s, "bound": b, "holds": ok}
            for k, s, b, ok in report.relaxed_efficiency
        ],
    }, opts["out"])
    return EXIT_OK


@_subcommand("shapley", [
    ("game", str, "game.tsv", "subset-value table path"),
    ("exact", bool, False, "also compute exact Shapley values"),
    ("out", str, "", "report path (default stdout)"),
])
def _cmd_shapley(opts):
    game = read_game_table(opts["game"])
    attribution = topk_shapley(game)
    report = {
        "schema": REPORT_SCHEMA,
        "command": "shapley",
        "n": game.n,
        "sigma": list(attribution.sigma),
        "phi": [float(v) for v in attribution.phi],
        "total": float(np.sum(attribution.phi)),
        "evaluations": game.evaluation_count,
    }
    if opts["exact"]:
        report["exact_phi"] = [float(v) for v in exact_shapley(game)]
    _emit(report, opts["out"])
    return EXIT_OK


@_subcommand("razor", [
    ("pairs", str, "pairs.tsv", "pair distribution path (i j p lines)"),
])
def _cmd_razor(opts):
    dist = read_pair_distribution(opts["pairs"])
    print(razor_entropy_formula(dist))
    return EXIT_OK


@_subcommand("tune", _MODEL_OPTIONS + [
    ("data", str, "transactions.tsv", "transaction table path"),
    ("trials", int, 50, "TPE trials"),
    ("history", str, "", "optional per-trial TSV output"),
    ("out", str, "", "report path (default stdout)"),
])
def _cmd_tune(opts):
    records = read_transactions(opts["data"])
    base = _model_config(opts, records)
    features = frozenset(opts["features"])

    def space(trial):
        trial.suggest_int("entity_dim", 1, base.n_entities)
        trial.suggest_int("product_dim", 1, max(2, base.n_products))
        trial.suggest_int("day_dim", 1, 3)
        layers = trial.suggest_int("n_layers", 0, 2)
        for i in range(layers):
            trial.suggest_int(f"layer_{i}", 32, 256, log=True)
        trial.suggest_real("dropout", 0.0, 0.9)
        trial.suggest_real("learning_rate", 1e-4, 1e-2, log=True)

    def objective(assignment):
        hidden = tuple(assignment[f"layer_{i}"]
                       for i in range(assignment["n_layers"]))
        config = dataclasses.replace(
            base,
            entity_dim=assignment["entity_dim"],
            product_dim=assignment["product_dim"],
            day_dim=assignment["day_dim"],
            hidden_sizes=hidden,
            dropout=assignment["dropout"],
            learning_rate=assignment["learning_rate"],
        )
        return train(records, config, features).test_losses[-1]

    result = optimize(objective, space, opts["trials"], seed=opts["seed"])
    if opts["history"]:
        with open(opts["history"], "w") as f:
            f.write("trial\tvalue\tassignment\n")
            for i, (assignment, value) in enumerate(result.history):
                f.write(f"{i}\t{value}\t{json.dumps(assignment, sort_keys=True)}\n")
        print(f"wrote trial history to {opts['history']}", file=sys.stderr)
    _emit({
        "schema": REPORT_SCHEMA,
        "command": "tune",
        "trials": len(result.history),
        "best_value": result.best_value,
        "best_assignment": result.best_assignment,
    }, opts["out"])
    return EXIT_OK


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="razorkit",
        description="Synthetic markets, biased walks, razor models and attributions.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, options) in _SUBCOMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=argparse.SUPPRESS,
                       help="INI file with a section per subcommand")
        p.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                       help="random seed (default 0)")
        _add_options(p, options)
    return parser


def _merge_options(namespace):
    """Defaults, then the INI section, then explicit flags."""
    command = namespace.command
    _, options = _SUBCOMMANDS[command]
    merged = {name.replace("-", "_"): default for name, _, default, _ in options}
    merged["seed"] = 0
    provided = vars(namespace)

    config_path = provided.get("config")
    if config_path:
        ini = configparser.ConfigParser()
        if not ini.read(config_path):
            raise ValueError(f"cannot read config file {config_path}")
        if ini.has_section(command):
            kinds = {name.replace("-", "_"): kind for name, kind, _, _ in options}
            kinds["seed"] = int
            for key, raw in ini.items(command):
                dest = key.replace("-", "_")
                if dest not in kinds:
                    raise ValueError(
                        f"{config_path}: unknown option {key!r} in [{command}]"
                    )
                kind = _bool_arg if kinds[dest] is bool else kinds[dest]
                try:
                    merged[dest] = kind(raw)
                except (TypeError, ValueError, argparse.ArgumentTypeError) as exc:
                    raise ValueError(
                        f"{config_path}: bad value for {key!r} in [{command}]: {exc}"
                    ) from None

    for key, value in provided.items():
        if key not in ("command", "config"):
            merged[key] = value
    return merged


def dispatch(argv) -> int:
    """Run one subcommand; returns the process exit code."""
    parser = _build_parser()
    try:
        namespace = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    handler, _ = _SUBCOMMANDS[namespace.command]
    try:
        opts = _merge_options(namespace)
        return handler(opts)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"razorkit: error: {exc}", file=sys.stderr)
        return EXIT_DATA


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
