"""Command-line front end: ``fiedlerkit {analyze,sweep,synth,energy}``.

Exit codes: 0 success, 2 usage or input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .data_io import (
    Dataset,
    DataFormatError,
    export_dataset,
    load_citation,
    load_generic,
    load_planetoid,
    preprocess_polblogs,
)
from .energy import energy_report
from .gcn import TrainConfig, depth_sweep, reference_fiedler
from .graph import GraphDomainError, laplacian
from .reports import build_manifest, dumps, write_csv, write_json
from .splits import stratified_split
from .spectral import SolverError, component_fiedler_summary, depth_advice, largest_component_bounds
from .synth import DEFAULT_CLASS_PARAMS, SyntheticSpec, generate, remove_edges

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        values = [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _depth_list(text: str) -> list[int]:
    values = _int_list(text)
    if min(values) < 1:
        raise argparse.ArgumentTypeError("depths must be >= 1")
    return values


def _class_params(text: str):
    try:
        pairs = [tuple(float(v) for v in item.split(":")) for item in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected mean:std pairs, got {text!r}")
    if any(len(p) != 2 for p in pairs):
        raise argparse.ArgumentTypeError("each class needs mean:std")
    return tuple(pairs)


def _add_input_flags(p, need_labels=False):
    p.add_argument("--edges", required=True,
                   help="edge list (generic), .cites file (citation), ind.<name> prefix "
                        "(planetoid) or edge file (polblogs)")
    p.add_argument("--features", help="features CSV (generic) or .content file (citation)")
    p.add_argument("--labels", help="labels CSV (generic) or community file (polblogs)")
    p.add_argument("--masks", help="split masks CSV (generic only)")
    p.add_argument("--format", default="generic",
                   choices=["generic", "citation", "planetoid", "polblogs"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fiedlerkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="per-component Fiedler values, bounds and depth advice")
    _add_input_flags(p)
    p.add_argument("--depths", type=_depth_list, default=[1, 2, 3, 4, 5],
                   help="candidate GCN depths to check against the diameter bounds")

    p = sub.add_parser("sweep", help="train GCNs over a range of depths")
    _add_input_flags(p)
    p.add_argument("--depths", type=_depth_list, default=[2, 3, 4, 5])
    p.add_argument("--repeats", type=int, default=1)
    p.add_argument("--config", help="flat key=value TrainConfig file")

    p = sub.add_parser("synth", help="write a planted-class synthetic dataset")
    p.add_argument("--nodes", type=int, default=500)
    p.add_argument("--feature-dim", type=int, default=100)
    p.add_argument("--edge-count", type=int, default=1000)
    p.add_argument("--intra-fraction", type=float, default=0.8)
    p.add_argument("--class-params", type=_class_params, default=DEFAULT_CLASS_PARAMS,
                   help="comma-separated mean:std pairs (std, not variance)")
    p.add_argument("--remove-to", type=_int_list, default=[],
                   help="also write seeded edge-removal variants with these edge counts")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)

    p = sub.add_parser("energy", help="Dirichlet energy of the input features vs the Fiedler bound")
    _add_input_flags(p)
    return parser


def load_dataset(args, need_split: bool = False) -> tuple[Dataset, list]:
    fmt = args.format
    if fmt == "generic":
        split_spec = None
        if args.masks:
            split_spec = args.masks
        elif need_split:
            if not args.labels:
                raise UsageError("a split needs --labels (or --masks)")
            split_spec = ((0.6, 0.2, 0.2), args.seed)
        ds = load_generic(args.edges, args.features, args.labels, split_spec,
                          name=Path(args.edges).stem)
        inputs = [args.edges, args.features, args.labels, args.masks]
    elif fmt == "citation":
        if not args.features:
            raise UsageError("citation format needs --features CONTENT and --edges CITES")
        ds = load_citation(args.features, args.edges, split_seed=args.seed)
        inputs = [args.features, args.edges]
    elif fmt == "planetoid":
        ds = load_planetoid(args.edges)
        inputs = sorted(str(p) for p in Path(args.edges).parent.glob(Path(args.edges).name + ".*"))
    elif fmt == "polblogs":
        if not args.labels:
            raise UsageError("polblogs format needs --labels COMMUNITY_FILE")
        ds = preprocess_polblogs(args.edges, args.labels, split_seed=args.seed)
        inputs = [args.edges, args.labels]
    else:
        raise UsageError(f"unknown format {fmt}")
    return ds, inputs


def _emit(report: dict, args, filename: str) -> None:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_json(report, out / filename)
    else:
        sys.stdout.write(dumps(report))


def _input_config(args) -> dict:
    keys = ("edges", "features", "labels", "masks", "format", "seed")
    return {k: getattr(args, k, None) for k in keys}


def cmd_analyze(args) -> int:
    ds, inputs = load_dataset(args)
    g = ds.graph
    summary = component_fiedler_summary(g)
    bounds = largest_component_bounds(g, summary)
    advice = depth_advice(summary, bounds, args.depths)
    config = _input_config(args) | {"depths": args.depths}
    report = {
        "report": "analyze",
        "dataset": ds.name,
        "provenance_notes": ds.provenance_notes,
        "spectral_summary": summary.to_dict(),
        "bounds": None if bounds is None else bounds.to_dict(),
        "depth_advice": advice.to_dict(),
        "manifest": build_manifest("analyze", config, inputs, [args.seed]),
    }
    _emit(report, args, "analysis.json")
    return EXIT_OK


def cmd_energy(args) -> int:
    ds, inputs = load_dataset(args)
    g = ds.graph
    if g.features is None:
        raise UsageError("energy needs node features (--features)")
    if g.node_count < 2:
        raise GraphDomainError("energy needs at least two nodes")
    summary = component_fiedler_summary(g)
    kind = "fiedler" if summary.component_count == 1 else "weighted_average"
    lam2 = reference_fiedler(g)
    if lam2 <= 0:
        raise GraphDomainError("reference Fiedler value is 0; the Fiedler bound is degenerate")
    lap = laplacian(g, sparse=True)
    report = {
        "report": "energy",
        "dataset": ds.name,
        "provenance_notes": ds.provenance_notes,
        "lambda2_ref": lam2,
        "lambda2_ref_kind": kind,
        "raw": energy_report(lap, lam2, g.features).to_dict(),
        "centered_normalized": energy_report(lap, lam2, g.features, centered_normalized=True).to_dict(),
        "manifest": build_manifest("energy", _input_config(args), inputs, [args.seed]),
    }
    _emit(report, args, "energy.json")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if not args.out:
        raise UsageError("sweep needs --out")
    if args.repeats < 1:
        raise UsageError("--repeats must be >= 1")
    config = TrainConfig.from_file(args.config) if args.config else TrainConfig()
    config = replace(config, seed=args.seed)
    ds, inputs = load_dataset(args, need_split=True)
    if ds.split is None:
        raise UsageError("dataset has no train/val/test split")
    if ds.graph.labels is None or ds.graph.features is None:
        raise UsageError("sweep needs features and labels")
    result = depth_sweep(ds.graph, args.depths, config, args.repeats, ds.split)
    manifest = build_manifest(
        "sweep",
        _input_config(args) | {"depths": args.depths, "repeats": args.repeats,
                               "train_config": config.to_dict()},
        inputs + [args.config],
        [config.seed + r for r in range(args.repeats)],
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(result.to_csv(), out / "sweep.csv", manifest)
    write_csv(result.summary_csv(), out / "sweep_summary.csv", manifest)
    traces = out / "traces"
    traces.mkdir(exist_ok=True)
    for row in result.rows:
        lines = ["layer,energy,rho"]
        lines += [f"{k},{e!r},{r!r}" for k, (e, r) in
                  enumerate(zip(row["energy_trace"], row["rho_trace"]), 1)]
        write_csv("\n".join(lines) + "\n", traces / f"depth{row['depth']}_repeat{row['repeat']}.csv")
    report = {"report": "sweep", "dataset": ds.name, "provenance_notes": ds.provenance_notes,
              **result.to_dict(), "manifest": manifest}
    write_json(report, out / "sweep.json")
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        spec = SyntheticSpec(
            node_count=args.nodes,
            feature_dim=args.feature_dim,
            target_edge_count=args.edge_count,
            class_params=args.class_params,
            intra_class_edge_fraction=args.intra_fraction,
            seed=args.seed,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for target in args.remove_to:
        if not 0 <= target <= spec.target_edge_count:
            raise UsageError(f"--remove-to {target} exceeds the generated edge count")
    g = generate(spec)
    out = Path(args.out)
    variants = [(".", g)] + [(f"e{t}", remove_edges(g, t, args.seed)) for t in args.remove_to]
    split = stratified_split(g.labels, (0.6, 0.2, 0.2), args.seed)
    datasets = []
    for sub, graph in variants:
        paths = export_dataset(graph, out / sub, split)
        reloaded = load_generic(paths["edges"], paths["features"], paths["labels"], paths["masks"])
        if not reloaded.graph.same_as(graph):
            raise RuntimeError(f"reload check failed for {out / sub}")
        datasets.append({
            "dir": sub,
            "edge_count": graph.edge_count,
            "files": {k: str(Path(sub) / Path(v).name) for k, v in paths.items()},
        })
    report = {
        "report": "synth",
        "spec": spec.to_dict(),
        "datasets": datasets,
        "manifest": build_manifest("synth", spec.to_dict() | {"remove_to": args.remove_to},
                                   [], [args.seed]),
    }
    write_json(report, out / "synth.json")
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "sweep": cmd_sweep, "synth": cmd_synth, "energy": cmd_energy}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fiedlerkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SolverError, GraphDomainError, FloatingPointError, RuntimeError) as exc:
        print(f"fiedlerkit: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (OSError, DataFormatError, ValueError, IndexError, KeyError) as exc:
        print(f"fiedlerkit: cannot load input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
