"""Command-line interface: the full pipeline plus one subcommand per stage.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
violation. Every command accepts --seed and --json; batch commands keep
going on per-item failures and exit nonzero if any item failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .dataset_filter import filter_corpus
from .edge_model import KnnHeuristicScorer, ModelScorer, OracleScorer, ToyEdgeModel, train_toy
from .errors import MeshDataError
from .face_builder import AdjacencyMatrix, adjacency_of, mesh_from_adjacency, threshold
from .fidelity import CellCenterEnhancer, SnapOracleEnhancer, apply_enhancer, fidelity_report
from .filtering import filter_pipeline
from .mesh_io import Mesh, load_obj, normalize, save_obj, write_obj
from .metrics import DEFAULT_POINT_COUNT, shape_scores
from .tokenizer import detokenize, lattice_to_points, quantize, token_stats, tokenize
from .edge_model import score_pairs as score_all_pairs

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class PipelineConfig:
    """Everything cmd_pipeline needs; JSON config file keys match fields."""

    scorer: str = "oracle"
    enhancer: str = "snap_oracle"
    bits: int = 7
    margin: int = 0
    points: int = DEFAULT_POINT_COUNT
    temperature: float = 1.2
    top_k: int = 100
    top_p: float = 0.9
    seed: int = 0

    def validate(self):
        if self.bits != 7:
            raise UsageError("quantization is fixed at 7 bits")
        if self.enhancer not in ("cell_center", "snap_oracle"):
            raise UsageError(f"unknown enhancer {self.enhancer!r}")
        if not (self.scorer in ("oracle", "knn") or self.scorer.startswith("toy:")):
            raise UsageError(f"unknown scorer {self.scorer!r}")
        if self.margin < 0:
            raise UsageError("margin must be nonnegative")
        if self.points <= 0:
            raise UsageError("points must be positive")
        if self.temperature <= 0:
            raise UsageError("temperature must be positive")
        if self.top_k <= 0:
            raise UsageError("top_k must be positive")
        if not 0 < self.top_p <= 1:
            raise UsageError("top_p must be in (0, 1]")


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(args, payload: dict, fallback_lines: list[str]):
    if getattr(args, "json", False):
        print(_dump_json(payload), end="")
    else:
        for line in fallback_lines:
            print(line)


def _make_enhancer(name: str, originals: np.ndarray):
    if name == "cell_center":
        return CellCenterEnhancer()
    if name == "snap_oracle":
        return SnapOracleEnhancer(originals)
    raise UsageError(f"unknown enhancer {name!r}")


def _make_scorer(spec: str, vertices: np.ndarray, gt_mesh: Mesh | None):
    """Scorer over a vertex set; 'oracle' needs a mesh carrying the faces."""
    if spec == "oracle":
        if gt_mesh is None or gt_mesh.n_faces == 0:
            raise MeshDataError("oracle scorer needs input faces for ground truth")
        return OracleScorer(adjacency_of(gt_mesh))
    if spec == "knn":
        return KnnHeuristicScorer(vertices)
    if spec.startswith("toy:"):
        path = spec[len("toy:") :]
        return ModelScorer(ToyEdgeModel.from_json(Path(path).read_text()), vertices)
    raise UsageError(f"unknown scorer {spec!r}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_tokenize(args) -> int:
    mesh = load_obj(args.input)
    q = quantize(normalize(mesh))
    tokens = tokenize(q.lattice)
    Path(args.output).write_text("\n".join(str(t) for t in tokens) + "\n")
    _emit(
        args,
        {"n_tokens": len(tokens), "n_vertices": q.n_vertices, "output": str(args.output)},
        [f"wrote {len(tokens)} tokens ({q.n_vertices} vertices) to {args.output}"],
    )
    return EXIT_OK


def cmd_detokenize(args) -> int:
    text = Path(args.input).read_text()
    try:
        tokens = np.array([int(line) for line in text.split()], dtype=np.int64)
    except ValueError:
        raise MeshDataError("token file must hold one decimal id per line") from None
    lattice = detokenize(tokens)
    mesh = Mesh(lattice_to_points(lattice))
    save_obj(mesh, args.output)
    _emit(
        args,
        {"n_vertices": mesh.n_vertices, "output": str(args.output)},
        [f"wrote {mesh.n_vertices} vertices to {args.output}"],
    )
    return EXIT_OK


def cmd_stats(args) -> int:
    mesh = load_obj(args.input)
    stats = token_stats(normalize(mesh))
    print(_dump_json(stats.as_dict()), end="")
    return EXIT_OK


def cmd_fidelity(args) -> int:
    mesh = normalize(load_obj(args.input))
    enhancer = _make_enhancer(args.enhancer, mesh.vertices)
    report = fidelity_report(mesh, enhancer, count=args.points, seed=args.seed)
    if args.out_quantized or args.out_enhanced:
        q = quantize(mesh)
        if args.out_quantized:
            save_obj(Mesh(lattice_to_points(q.lattice), q.faces), args.out_quantized)
        if args.out_enhanced:
            save_obj(Mesh(apply_enhancer(enhancer, q.lattice), q.faces), args.out_enhanced)
    print(_dump_json(report.as_dict()), end="")
    return EXIT_OK


def cmd_train_edge(args) -> int:
    paths = sorted(Path(args.input_dir).glob("*.obj"))
    if not paths:
        raise MeshDataError(f"no .obj files under {args.input_dir}")
    meshes = [normalize(load_obj(p)) for p in paths]
    model, curve = train_toy(
        meshes,
        heads=args.heads,
        dims=args.dims,
        learning_rate=args.learning_rate,
        epochs=args.epochs,
        seed=args.seed,
        gamma_pos=args.gamma_pos,
        gamma_neg=args.gamma_neg,
    )
    Path(args.output).write_text(model.to_json())
    if args.curve:
        lines = ["epoch,loss"] + [f"{i},{v!r}" for i, v in enumerate(curve)]
        Path(args.curve).write_text("\n".join(lines) + "\n")
    _emit(
        args,
        {
            "n_meshes": len(meshes),
            "n_parameters": model.n_parameters,
            "epochs": len(curve),
            "initial_loss": curve[0],
            "final_loss": curve[-1],
            "model": str(args.output),
        },
        [
            f"trained on {len(meshes)} meshes for {len(curve)} epochs "
            f"(loss {curve[0]:.6f} -> {curve[-1]:.6f}), wrote {args.output}"
        ],
    )
    return EXIT_OK


def cmd_score(args) -> int:
    mesh = normalize(load_obj(args.input))
    scorer = ModelScorer(ToyEdgeModel.from_json(Path(args.model).read_text()), mesh.vertices)
    adj = threshold(score_all_pairs(scorer, mesh.n_vertices), mesh.n_vertices)
    Path(args.output).write_text(adj.to_text())
    _emit(
        args,
        {"n_vertices": adj.n, "n_edges": adj.n_edges, "output": str(args.output)},
        [f"wrote adjacency ({adj.n_edges} edges over {adj.n} vertices) to {args.output}"],
    )
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    mesh = load_obj(args.input)
    norm = normalize(mesh)
    scorer = _make_scorer(args.scorer, norm.vertices, norm)
    adj = threshold(score_all_pairs(scorer, norm.n_vertices), norm.n_vertices)
    recon = mesh_from_adjacency(adj, mesh.vertices)
    save_obj(recon, args.output)
    if args.adjacency:
        Path(args.adjacency).write_text(adj.to_text())
    _emit(
        args,
        {"n_vertices": recon.n_vertices, "n_faces": recon.n_faces, "output": str(args.output)},
        [f"reconstructed {recon.n_faces} faces over {recon.n_vertices} vertices -> {args.output}"],
    )
    return EXIT_OK


def cmd_filter(args) -> int:
    mesh = load_obj(args.input)
    norm = normalize(mesh)
    scorer = _make_scorer(args.scorer, norm.vertices, norm)
    final, steps = filter_pipeline(scorer, norm.n_vertices, margin=args.margin)
    recon = mesh_from_adjacency(final, mesh.vertices)
    save_obj(recon, args.output)
    if args.adjacency:
        Path(args.adjacency).write_text(final.to_text())
    step_dicts = [s.as_dict() for s in steps]
    if args.stats:
        Path(args.stats).write_text(_dump_json(step_dicts))
    _emit(
        args,
        {"steps": step_dicts, "n_faces": recon.n_faces, "n_edges": final.n_edges},
        [f"step {d['step']} ({d['mask_kind']}): {d['n_edges']} edges, {d['n_faces']} faces" for d in step_dicts]
        + [f"wrote {recon.n_faces} faces -> {args.output}"],
    )
    return EXIT_OK


def cmd_filter_dataset(args) -> int:
    manifest = [ln.strip() for ln in Path(args.manifest).read_text().splitlines() if ln.strip()]
    entries = filter_corpus(manifest, max_vertices=args.max_vertices)
    report = [e.as_dict() for e in entries]
    Path(args.out).write_text(_dump_json(report))
    n_err = sum(1 for e in entries if e.error is not None)
    n_acc = sum(1 for e in entries if e.verdict is not None and e.verdict.accepted)
    _emit(
        args,
        {"n_files": len(entries), "n_accepted": n_acc, "n_errors": n_err, "report": str(args.out)},
        [f"{n_acc}/{len(entries)} accepted ({n_err} unreadable), report -> {args.out}"],
    )
    return EXIT_OK if n_err == 0 else EXIT_DATA


def cmd_metrics(args) -> int:
    scores = shape_scores(load_obj(args.mesh_a), load_obj(args.mesh_b), count=args.points, seed=args.seed)
    print(_dump_json(scores.as_dict()), end="")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    config = _load_pipeline_config(args)
    config.validate()

    def stage(name, fn):
        try:
            return fn()
        except UsageError:
            raise
        except Exception as exc:
            raise StageError(name, exc) from exc

    mesh = stage("read-input", lambda: load_obj(args.input))
    norm = stage("normalize", lambda: normalize(mesh))
    q = stage("quantize", lambda: quantize(norm))
    tokens = stage("tokenize", lambda: tokenize(q.lattice))
    lattice = stage("detokenize", lambda: detokenize(tokens))
    if not np.array_equal(lattice, q.lattice):
        raise StageError("detokenize", AssertionError("roundtrip mismatch"))
    enhancer = stage("enhance", lambda: _make_enhancer(config.enhancer, norm.vertices))
    points = stage("enhance", lambda: apply_enhancer(enhancer, lattice))
    quant_mesh = Mesh(points, q.faces)
    scorer = stage("score", lambda: _make_scorer(config.scorer, points, quant_mesh))
    final, steps = stage(
        "filter", lambda: filter_pipeline(scorer, quant_mesh.n_vertices, margin=config.margin)
    )
    recon = stage("extract-faces", lambda: mesh_from_adjacency(final, points))
    tstats = stage("stats", lambda: token_stats(norm))
    fid = stage(
        "fidelity", lambda: fidelity_report(norm, enhancer, count=config.points, seed=config.seed)
    )
    scores = stage(
        "metrics", lambda: shape_scores(norm, recon, count=config.points, seed=config.seed)
    )

    summary = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "config": asdict(config),
        "token_stats": tstats.as_dict(),
        "fidelity": fid.as_dict(),
        "shape_scores": scores.as_dict(),
        "counts": {
            "n_vertices_in": mesh.n_vertices,
            "n_faces_in": mesh.n_faces,
            "n_vertices_out": recon.n_vertices,
            "n_faces_out": recon.n_faces,
            "n_tokens": len(tokens),
            "n_edges_final": final.n_edges,
        },
        "filter_steps": [s.as_dict() for s in steps],
    }

    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "tokens.txt").write_text("\n".join(str(t) for t in tokens) + "\n")
    (outdir / "adjacency.txt").write_text(final.to_text())
    (outdir / "reconstructed.obj").write_text(write_obj(recon))
    (outdir / "filter_steps.json").write_text(_dump_json(summary["filter_steps"]))
    (outdir / "summary.json").write_text(_dump_json(summary))
    _emit(
        args,
        summary,
        [
            f"tokens: {len(tokens)} (ratio vs prior tokenizer: {tstats.ratio_vs_bpt})",
            f"reconstructed: {recon.n_vertices} vertices, {recon.n_faces} faces",
            f"cd {scores.cd:.4f}%  hd {scores.hd:.4f}%",
            f"artifacts in {outdir}",
        ],
    )
    return EXIT_OK


def _load_pipeline_config(args) -> PipelineConfig:
    fields = PipelineConfig.__dataclass_fields__
    values: dict = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except json.JSONDecodeError as exc:
            raise MeshDataError(f"config file: {exc}") from None
        unknown = set(raw) - set(fields)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        values.update(raw)
    for name in fields:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    return PipelineConfig(**values)


# ---------------------------------------------------------------------------
# parser


def build_parser() -> _Parser:
    parser = _Parser(prog="meshseq", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=fn)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.add_argument("--seed", type=int, default=0)
        return p

    p = add("tokenize", cmd_tokenize, "OBJ -> token file (one id per line)")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)

    p = add("detokenize", cmd_detokenize, "token file -> OBJ of cell-center vertices")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)

    p = add("stats", cmd_stats, "token-count statistics as JSON")
    p.add_argument("input")

    p = add("fidelity", cmd_fidelity, "quantization damage report (CD/HD)")
    p.add_argument("input")
    p.add_argument("--enhancer", default="snap_oracle", choices=["cell_center", "snap_oracle"])
    p.add_argument("--points", type=int, default=DEFAULT_POINT_COUNT)
    p.add_argument("--out-quantized")
    p.add_argument("--out-enhanced")

    p = add("train-edge", cmd_train_edge, "train the toy edge scorer on an OBJ directory")
    p.add_argument("input_dir")
    p.add_argument("-o", "--output", required=True, help="model JSON path")
    p.add_argument("--curve", help="loss curve CSV path")
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--dims", type=int, default=4)
    p.add_argument("--learning-rate", type=float, default=1.0)
    p.add_argument("--epochs", type=int, default=500)
    p.add_argument("--gamma-pos", type=float, default=0.0)
    p.add_argument("--gamma-neg", type=float, default=3.0)

    p = add("score", cmd_score, "score all pairs with a trained model -> adjacency file")
    p.add_argument("model", help="model JSON from train-edge")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)

    p = add("reconstruct", cmd_reconstruct, "predict edges once and extract faces")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--scorer", default="oracle", help="oracle | knn | toy:<model.json>")
    p.add_argument("--adjacency", help="also write the adjacency file here")

    p = add("filter", cmd_filter, "five-step masked re-prediction, then extract faces")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--scorer", default="oracle", help="oracle | knn | toy:<model.json>")
    p.add_argument("--margin", type=int, default=0)
    p.add_argument("--adjacency")
    p.add_argument("--stats", help="per-step stats JSON path")

    p = add("filter-dataset", cmd_filter_dataset, "corpus curation report")
    p.add_argument("--manifest", required=True, help="newline-separated OBJ paths")
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--max-vertices", type=int, default=4000)

    p = add("metrics", cmd_metrics, "CD/HD between two meshes")
    p.add_argument("mesh_a")
    p.add_argument("mesh_b")
    p.add_argument("--points", type=int, default=DEFAULT_POINT_COUNT)

    p = add("pipeline", cmd_pipeline, "end-to-end: tokenize, enhance, predict, filter, score")
    p.add_argument("input")
    p.add_argument("--outdir", required=True)
    p.add_argument("--config", help="JSON config file (flags override)")
    p.add_argument("--scorer", default=None, help="oracle | knn | toy:<model.json>")
    p.add_argument("--enhancer", default=None, choices=["cell_center", "snap_oracle"])
    p.add_argument("--margin", type=int, default=None)
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--bits", type=int, default=None)
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--top-k", dest="top_k", type=int, default=None)
    p.add_argument("--top-p", dest="top_p", type=float, default=None)
    p.set_defaults(seed=None)  # fall through to the config file unless given

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        kind = EXIT_DATA if isinstance(exc.cause, (MeshDataError, OSError, ValueError)) else EXIT_INTERNAL
        print(f"error: {exc}", file=sys.stderr)
        return kind
    except (MeshDataError, OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - invariant violations
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
