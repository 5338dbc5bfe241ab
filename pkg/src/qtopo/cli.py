"""Command-line entry point: ``qtopo {topology,critpoints,certify,pipeline,bubble-check}``.

Reports are JSON documents written with sorted keys, so emitting a parsed
report again reproduces it byte for byte.  Input problems exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .barycenters import (
    BarycenterProvider,
    CircleProvider,
    SphereProvider,
    TopologyDataError,
    builtin_space,
    load_table_file,
)
from .boundary import (
    BoundaryBarycenterInput,
    UnsupportedError,
    builtin_boundary_input,
    euler_boundary,
    topology_report,
)
from .bubbles import Bubble, DomainError, bubble_pde_residual
from .certifier import NDViolationError, CritSummary, certify
from .functional.critical import SearchConfig, search_critical_points, to_summary
from .functional.models import ModelError, model_from_document

log = logging.getLogger("qtopo")

EXIT_INPUT = 2
INPUT_ERRORS = (
    TopologyDataError,
    ModelError,
    NDViolationError,
    UnsupportedError,
    DomainError,
    FileNotFoundError,
    json.JSONDecodeError,
    KeyError,
    ValueError,
)


class InputError(Exception):
    pass


# -- report helpers ----------------------------------------------------------


def _plain(obj):
    """Convert numpy scalars/arrays so json can serialize them."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, list | tuple):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dump_report(report: dict) -> str:
    return json.dumps(_plain(report), sort_keys=True, indent=2) + "\n"


def _text(report, indent: int = 0) -> str:
    pad = "  " * indent
    lines = []
    for key in sorted(report):
        val = report[key]
        if isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.append(_text(val, indent + 1))
        elif isinstance(val, list) and val and isinstance(val[0], dict):
            lines.append(f"{pad}{key}:")
            for item in val:
                lines.append(_text(item, indent + 1))
                lines.append(f"{pad}  --")
        else:
            lines.append(f"{pad}{key}: {val}")
    return "\n".join(line for line in lines if line)


def emit(report: dict, args) -> None:
    report = _plain(report)
    out = dump_report(report) if args.format == "json" else _text(report) + "\n"
    if args.out:
        Path(args.out).write_text(out)
    else:
        sys.stdout.write(out)


def _read_json(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"{path} does not exist")
    return json.loads(path.read_text())


def _config(args) -> dict:
    return _read_json(args.config) if args.config else {}


def _pick(args, cfg: dict, name: str, default=None):
    val = getattr(args, name, None)
    if val is not None:
        return val
    return cfg.get(name, default)


# -- topology ----------------------------------------------------------------


def _provider(name: str, tables) -> BarycenterProvider:
    if tables is not None and name in tables.providers:
        return tables[name]
    key = name.lower()
    if key in ("circle", "s1"):
        return CircleProvider()
    if key.startswith("s") and key[1:].isdigit():
        return SphereProvider(int(key[1:]))
    from .barycenters import TableProvider

    return TableProvider(builtin_space(name))


def _boundary_input(args, cfg: dict) -> BoundaryBarycenterInput:
    manifold = dict(cfg.get("manifold", {}))
    tables_path = _pick(args, manifold, "barycenter_tables")
    tables = load_table_file(tables_path) if tables_path else None
    space = _pick(args, manifold, "space")
    if space:
        try:
            inp = builtin_boundary_input(space)
        except TopologyDataError:
            inp = None
        if inp is not None:
            if tables is None:
                return inp
            # user tables replace built-in providers of the same name
            bd, qu = (
                tables.providers.get(prov.base.name, prov)
                for prov in (inp.boundary_provider, inp.quotient_provider)
            )
            return BoundaryBarycenterInput(bd, qu, inp.chi_M, inp.dim_M)
    boundary = _pick(args, manifold, "boundary")
    quotient = _pick(args, manifold, "quotient")
    chi_m = _pick(args, manifold, "chi_m", manifold.get("chi_M"))
    dim = _pick(args, manifold, "dim", 4)
    if not (boundary and quotient and chi_m is not None):
        raise InputError(
            "need --space disk|annulus, or --boundary, --quotient and --chi-m (with --barycenter-tables)"
        )
    return BoundaryBarycenterInput(
        _provider(boundary, tables), _provider(quotient, tables), int(chi_m), int(dim)
    )


def topology_document(args, cfg: dict) -> dict:
    order = int(_pick(args, cfg, "order", 2))
    if order < 1:
        raise InputError("--order must be >= 1")
    chi = getattr(args, "chi", None)
    has_space = any(
        _pick(args, cfg.get("manifold", {}), k) for k in ("space", "boundary")
    )
    if chi is not None and not has_space:
        # Euler characteristics only, from the closed form
        return {
            "mode": "euler-only",
            "chi_M": chi,
            "orders": [
                {"order": l, "euler": euler_boundary(chi, l, True)} for l in range(1, order + 1)
            ],
            "tolerances": {"exact": True},
        }
    inp = _boundary_input(args, cfg)
    records = list(topology_report(inp, order, getattr(args, "connectivity", None)))
    return {
        "mode": "homology",
        "chi_M": inp.chi_M,
        "dim_M": inp.dim_M,
        "boundary": inp.boundary_provider.base.name,
        "quotient": inp.quotient_provider.base.name,
        "orders": records,
        "consistent": all(r["consistency"] != "fail" for r in records),
        "tolerances": {"exact": True},
    }


def cmd_topology(args) -> int:
    doc = topology_document(args, _config(args))
    emit(doc, args)
    return 0 if doc.get("consistent", True) else EXIT_INPUT


# -- critical points ---------------------------------------------------------


def _search_config(args, cfg: dict) -> SearchConfig:
    s = dict(cfg.get("search", {}))
    seed = args.seed if args.seed is not None else cfg.get("seed", s.pop("seed", 0))
    s.pop("seed", None)
    if getattr(args, "starts", None) is not None:
        s["n_starts"] = args.starts
    if getattr(args, "workers", None) is not None:
        s["workers"] = args.workers
    return SearchConfig(seed=int(seed), **s)


def _model(args, cfg: dict):
    path = getattr(args, "model", None)
    if path:
        doc = _read_json(path)
        return model_from_document(doc.get("model", doc), Path(path).parent)
    if "model" not in cfg:
        raise InputError("no model given (use --model or a config with a 'model' section)")
    base = Path(args.config).parent if args.config else None
    return model_from_document(cfg["model"], base)


def critpoints_document(args, cfg: dict) -> dict:
    k = int(_pick(args, cfg, "k", 1))
    kbar = int(_pick(args, cfg, "kbar", 0))
    if k < 1 or kbar < 0:
        raise InputError("need k >= 1 and kbar >= 0")
    model = _model(args, cfg)
    scfg = _search_config(args, cfg)
    points, diagnostics, degenerate = [], [], []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for p in range(k // 2 + 1):
            q = k - 2 * p
            found, diag = search_critical_points(model, p, q, scfg)
            diagnostics.append(diag)
            points.extend(c for c in found if c.nondegenerate)
            degenerate.extend(c for c in found if not c.nondegenerate)
    if degenerate:
        log.warning("%d degenerate critical point(s) excluded", len(degenerate))
    summary = to_summary(points, k, kbar)
    doc = summary.as_dict()
    chi_m = cfg.get("manifold", {}).get("chi_M")
    if chi_m is not None:
        doc["chi_M"] = chi_m
    doc.update(
        {
            "points": [c.as_dict() for c in points],
            "degenerate": [c.as_dict() for c in degenerate],
            "nd": not degenerate,
            "diagnostics": diagnostics,
            "model": model.spec,
            "tolerances": scfg.as_dict(),
        }
    )
    return doc


def cmd_critpoints(args) -> int:
    emit(critpoints_document(args, _config(args)), args)
    return 0


# -- certification -----------------------------------------------------------


def certify_document(args, cfg: dict, summary_doc: dict, topology: BoundaryBarycenterInput | None) -> dict:
    summary = CritSummary.from_dict(summary_doc)
    c = getattr(args, "c_array", None)
    chi_b = getattr(args, "chi_boundary", None)
    if summary.k >= 2 and topology is None and (c is None or chi_b is None):
        try:
            topology = _boundary_input(args, cfg)
        except InputError as exc:
            raise InputError(f"k >= 2 needs topology: {exc}; or pass --c-array and --chi-boundary") from None
    report = certify(summary, topology, c=c, chi_boundary=chi_b)
    doc = report.as_dict()
    doc["tolerances"] = {"exact": True}
    return doc


def cmd_certify(args) -> int:
    cfg = _config(args)
    summary_path = args.summary or cfg.get("summary")
    if not summary_path:
        raise InputError("certify needs --summary")
    emit(certify_document(args, cfg, _read_json(summary_path), None), args)
    return 0


def cmd_pipeline(args) -> int:
    cfg = _config(args)
    crit = critpoints_document(args, cfg)
    k = crit["k"]
    topo = None
    topo_doc = None
    if k >= 2 or _pick(args, cfg.get("manifold", {}), "space"):
        topology_args = argparse.Namespace(**vars(args))
        topology_args.order = max(k - 1, 1)
        topo_doc = topology_document(topology_args, cfg)
        topo = _boundary_input(args, cfg)
    cert = certify_document(args, cfg, crit, topo)
    emit({"critpoints": crit, "topology": topo_doc, "certify": cert, "verdict": cert["verdict"]}, args)
    return 0


# -- bubbles -----------------------------------------------------------------


def cmd_bubble_check(args) -> int:
    center = tuple(args.center) if args.center else (0.0, 0.0, 0.0, 0.0)
    b = Bubble(center, args.scale)
    r1 = bubble_pde_residual(b, args.h)
    r2 = bubble_pde_residual(b, args.h / 2)
    order = float(np.log2(r1 / r2))
    emit(
        {
            "center": list(center),
            "scale": args.scale,
            "h": args.h,
            "residual_h": r1,
            "residual_h_half": r2,
            "observed_order": order,
            "order_ok": order >= 1.9,
            "tolerances": {"min_order": 1.9, "stencil": "laplacian-composed"},
        },
        args,
    )
    return 0


# -- parser ------------------------------------------------------------------


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="JSON configuration file")
    p.add_argument("--seed", type=int, default=d, help="base random seed")
    p.add_argument("--out", default=d, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "text"), default=argparse.SUPPRESS if suppress else "json")


def _topology_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--space", help="built-in manifold: disk or annulus")
    p.add_argument("--boundary", help="space name for the boundary (table file or built-in)")
    p.add_argument("--quotient", help="space name for M / boundary")
    p.add_argument("--chi-m", dest="chi_m", type=int, help="Euler characteristic of M")
    p.add_argument("--dim", type=int, help="dimension of M (default 4)")
    p.add_argument("--barycenter-tables", dest="barycenter_tables", help="JSON table file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qtopo", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("topology", help="homology and Euler characteristics of boundary barycenter spaces")
    _global_flags(t, suppress=True)
    _topology_flags(t)
    t.add_argument("--chi", type=int, help="Euler characteristic only (closed form)")
    t.add_argument("--order", type=int, help="highest order to report")
    t.add_argument("--connectivity", type=int, help="r such that M and its boundary are r-connected")
    t.set_defaults(func=cmd_topology)

    c = sub.add_parser("critpoints", help="critical points of the reduced functionals")
    _global_flags(c, suppress=True)
    c.add_argument("--model", help="model specification file")
    c.add_argument("--k", type=int)
    c.add_argument("--kbar", type=int)
    c.add_argument("--starts", type=int, help="number of multi-start seeds")
    c.add_argument("--workers", type=int)
    c.set_defaults(func=cmd_critpoints)

    z = sub.add_parser("certify", help="run the existence criteria on a summary document")
    _global_flags(z, suppress=True)
    _topology_flags(z)
    z.add_argument("--summary", help="critical point summary document")
    z.add_argument("--c-array", dest="c_array", type=lambda s: [int(x) for x in s.split(",")])
    z.add_argument("--chi-boundary", dest="chi_boundary", type=int)
    z.set_defaults(func=cmd_certify)

    pl = sub.add_parser("pipeline", help="critpoints, topology and certify in one go")
    _global_flags(pl, suppress=True)
    _topology_flags(pl)
    pl.add_argument("--model")
    pl.add_argument("--k", type=int)
    pl.add_argument("--kbar", type=int)
    pl.add_argument("--starts", type=int)
    pl.add_argument("--workers", type=int)
    pl.add_argument("--c-array", dest="c_array", type=lambda s: [int(x) for x in s.split(",")])
    pl.add_argument("--chi-boundary", dest="chi_boundary", type=int)
    pl.set_defaults(func=cmd_pipeline)

    b = sub.add_parser("bubble-check", help="finite-difference check of the bubble equation")
    _global_flags(b, suppress=True)
    b.add_argument("--scale", type=float, default=1.0)
    b.add_argument("--h", type=float, default=0.02)
    b.add_argument("--center", type=float, nargs=4)
    b.set_defaults(func=cmd_bubble_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (InputError, *INPUT_ERRORS) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
