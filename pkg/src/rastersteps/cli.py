"""Batch entry points: ingest, synthesize, select, evaluate, embed, serve.

Exit codes: 0 success, 2 validation/constraint problem, 3 I/O or format
problem. Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import pipeline
from .aggregation import AggregationKind
from .embedding import project_2d, sample_for_display
from .errors import (
    BoundsError,
    ConstraintError,
    EmptyDataError,
    FormatError,
    InvalidCodeError,
    RasterStepsError,
)
from .features import load_latent_codes, structural_cost_matrix
from .grids import (
    SyntheticSpec,
    export_stack,
    ingest_stack,
    parse_range,
    parse_region,
    synthesize,
)
from .reconstruct import evaluate
from .selector import SelectionParams

EXIT_OK = 0
EXIT_CONSTRAINT = 2
EXIT_FORMAT = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rastersteps",
        description="Salient time-step selection for raster time series "
        "(defaults: gamma=0.3, sigma=1.0, descriptor dims=512)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="validate a frame-stack directory")
    p_ingest.add_argument("--dataset", required=True, help="frame-stack directory")

    p_synth = sub.add_parser("synth", help="generate a synthetic frame stack")
    p_synth.add_argument("--family", required=True, choices=["ramp", "burst", "blob", "seasonal"])
    p_synth.add_argument("--t", type=int, required=True, help="number of frames")
    p_synth.add_argument("--size", default="8x8", help="WxH grid size (default 8x8)")
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--bursts", default="", help="comma list of burst frame indices")
    p_synth.add_argument("--drift", type=float, default=0.0,
                         help="burst family: >0 enables the drifting-base variant")
    p_synth.add_argument("--out", required=True, help="output directory")

    p_select = sub.add_parser("select", help="run one salient-step selection")
    p_select.add_argument("--dataset", required=True, help="frame-stack directory")
    p_select.add_argument("--range", required=True, help="inclusive frame range a:b (0-based)")
    p_select.add_argument("--k", type=int, required=True)
    p_select.add_argument("--alpha", type=float, default=1.0, help="structural weight (default 1.0)")
    p_select.add_argument("--beta", type=float, default=0.0, help="statistical weight (default 0.0)")
    p_select.add_argument("--agg", default="avg", choices=["max", "min", "avg"])
    p_select.add_argument("--region", default=None, help="x0,y0,x1,y1 pixel rectangle")
    p_select.add_argument("--pin", default="", help="comma list of pinned frame indices")
    p_select.add_argument("--exclude", default="", help="comma list of excluded frame indices")
    p_select.add_argument("--gamma", type=float, default=0.3, help="distance weight (default 0.3)")
    p_select.add_argument("--sigma", type=float, default=1.0, help="distance decay (default 1.0)")
    p_select.add_argument("--codes", default=None, help="optional latent-code file to use")
    fmt = p_select.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", help="JSON output (default)")
    fmt.add_argument("--csv", action="store_true", help="CSV output")

    p_eval = sub.add_parser("eval", help="method-comparison reconstruction report")
    p_eval.add_argument("--dataset", required=True)
    p_eval.add_argument("--methods", default="dp,even,arc", help="comma list from dp,even,arc")
    p_eval.add_argument("--ks", required=True, help="comma list of k values, e.g. 5,10,20")
    p_eval.add_argument("--range", default=None, help="inclusive a:b (default whole dataset)")
    p_eval.add_argument("--beta-sweep", action="store_true",
                        help="include selections for beta in {0,0.25,0.5,0.75,1}")
    p_eval.add_argument("--out", required=True, help="CSV output path (JSON written alongside)")

    p_embed = sub.add_parser("embed", help="2D embedding of the frame trajectory")
    p_embed.add_argument("--dataset", required=True)
    p_embed.add_argument("--range", default=None, help="inclusive a:b (default whole dataset)")
    p_embed.add_argument("--region", default=None, help="x0,y0,x1,y1 pixel rectangle")
    p_embed.add_argument("--cap", type=int, default=500, help="display cap (default 500)")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--data-root", default=os.environ.get("RASTERSTEPS_DATA_ROOT"),
                         help="directory whose subdirectories are frame stacks "
                              "(env RASTERSTEPS_DATA_ROOT)")
    p_serve.add_argument("--port", type=int,
                         default=int(os.environ.get("RASTERSTEPS_PORT", "8000")))
    p_serve.add_argument("--host", default=os.environ.get("RASTERSTEPS_HOST", "127.0.0.1"))
    p_serve.add_argument("--cache-bytes", type=int,
                         default=int(os.environ.get("RASTERSTEPS_CACHE_BYTES",
                                                    str(256 * 1024 * 1024))))
    p_serve.add_argument("--workers", type=int,
                         default=int(os.environ.get("RASTERSTEPS_WORKERS", "1")))
    return parser


def _parse_index_list(text: str) -> frozenset[int]:
    if not text.strip():
        return frozenset()
    try:
        return frozenset(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise ConstraintError(f"expected a comma list of integers, got {text!r}") from None


def _cmd_ingest(args) -> int:
    ds = ingest_stack(args.dataset)
    print(json.dumps({
        "id": ds.id,
        "variable": ds.variable,
        "t": ds.t,
        "width": ds.width,
        "height": ds.height,
        "vmin": ds.norm.vmin,
        "vmax": ds.norm.vmax,
    }, sort_keys=True))
    return EXIT_OK


def _cmd_synth(args) -> int:
    try:
        w, h = (int(v) for v in args.size.lower().split("x"))
    except ValueError:
        raise FormatError(f"--size must be WxH, got {args.size!r}") from None
    spec = SyntheticSpec(
        family=args.family, t=args.t, width=w, height=h, seed=args.seed,
        bursts=tuple(sorted(_parse_index_list(args.bursts))), drift=args.drift,
    )
    ds = synthesize(spec)
    export_stack(ds, args.out)
    print(json.dumps({"id": ds.id, "out": str(Path(args.out))}, sort_keys=True))
    return EXIT_OK


def _selection_json(result) -> dict:
    params = result.params_echo
    return {
        "steps": list(result.steps),
        "total_cost": result.total_cost,
        "pair_costs": [
            {
                "i": pc.i, "j": pc.j, "combined": pc.combined,
                "structural": pc.structural, "statistical": pc.statistical,
                "distance": pc.distance,
            }
            for pc in result.pair_costs
        ],
        "params": {
            "range": [params.range.start, params.range.end],
            "k": params.k, "alpha": params.alpha, "beta": params.beta,
            "gamma": params.gamma, "sigma": params.sigma,
            "aggregation": params.aggregation.value,
            "pinned": sorted(params.pinned), "excluded": sorted(params.excluded),
        },
    }


def _cmd_select(args) -> int:
    ds = ingest_stack(args.dataset)
    params = SelectionParams(
        range=parse_range(args.range),
        k=args.k,
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        sigma=args.sigma,
        aggregation=AggregationKind.parse(args.agg),
        region=parse_region(args.region) if args.region else None,
        pinned=_parse_index_list(args.pin),
        excluded=_parse_index_list(args.exclude),
    )
    params.range.validate(ds.t)
    struc = None
    if args.codes:
        codes = load_latent_codes(args.codes)
        if len(codes) != ds.t:
            raise FormatError(f"{len(codes)} codes for {ds.t} frames")
        window = codes[params.range.start : params.range.end + 1]
        struc = structural_cost_matrix(window)
    result = pipeline.run_selection(ds, params, struc=struc)
    if args.csv:
        print("step")
        for s in result.steps:
            print(s)
    else:
        print(json.dumps(_selection_json(result), sort_keys=True))
    return EXIT_OK


def _cmd_eval(args) -> int:
    ds = ingest_stack(args.dataset)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    try:
        ks = [int(v) for v in args.ks.split(",") if v.strip()]
    except ValueError:
        raise ConstraintError(f"--ks must be a comma list of integers, got {args.ks!r}") from None
    if not ks:
        raise ConstraintError("--ks must name at least one k")
    range_ = parse_range(args.range) if args.range else None
    if range_ is None:
        from .grids import FocusRange

        range_ = FocusRange(0, ds.t - 1)
    report = evaluate(ds, range_, methods, ks, beta_sweep=args.beta_sweep)
    csv_path = Path(args.out)
    json_path = csv_path.with_suffix(".json")
    report.write(csv_path, json_path)
    print(json.dumps({"csv": str(csv_path), "json": str(json_path),
                      "rows": len(report.rows)}, sort_keys=True))
    return EXIT_OK


def _cmd_embed(args) -> int:
    ds = ingest_stack(args.dataset)
    range_ = parse_range(args.range) if args.range else None
    if range_ is None:
        from .grids import FocusRange

        range_ = FocusRange(0, ds.t - 1)
    range_.validate(ds.t)
    region = parse_region(args.region) if args.region else None
    codes = pipeline.dataset_codes(ds, region)
    points = project_2d(codes[range_.start : range_.end + 1])
    sampled = sample_for_display(points, cap=args.cap)
    print(json.dumps({
        "method": "pca",
        "points": [
            {"index": p.index + range_.start, "x": p.x, "y": p.y,
             "sampled_out": p.sampled_out}
            for p in sampled
        ],
    }, sort_keys=True))
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    if not args.data_root:
        raise ConstraintError("--data-root (or RASTERSTEPS_DATA_ROOT) is required")
    app = create_app(data_root=args.data_root, cache_bytes=args.cache_bytes)
    uvicorn.run(app, host=args.host, port=args.port, workers=args.workers)
    return EXIT_OK


_HANDLERS = {
    "ingest": _cmd_ingest,
    "synth": _cmd_synth,
    "select": _cmd_select,
    "eval": _cmd_eval,
    "embed": _cmd_embed,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (ConstraintError, BoundsError, EmptyDataError, InvalidCodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT
    except (FormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except RasterStepsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSTRAINT


if __name__ == "__main__":
    sys.exit(main())
