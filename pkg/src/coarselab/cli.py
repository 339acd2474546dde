"""Command-line front end: fixture loading, operation dispatch, certificate
emission, and cross-module verification pipelines.

Every invocation prints a single JSON report (sorted keys, compact
separators) that is byte-stable for identical inputs and seed; wall time is
only attached under --timing since it would break byte stability. Exit
status: 0 when every verified guarantee passes, 1 on invalid input or a
resource cap, 2 on a contract violation, 64 on usage errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from typing import Optional

import numpy as np

from . import fixtures
from .corona import (CompactificationModel, check_cc_entourage, corona_dim_cover,
                     map_f, map_g, roundtrip_bounds)
from .covers import Cover, stats
from .errors import (ContractViolationError, InternalCheckError,
                     InvalidInputError, ResourceLimitError)
from .hyperbolic import (SphereAtlas, check_contraction, check_radial_lipschitz,
                         hyperbolic_params, lipschitz_gap_bound, sample_disk,
                         sphere_cover_lift)
from .jsonio import (dump_cover, load_cover, load_decomposition,
                     load_entourage, load_operator, load_space, read_json,
                     write_json)
from .prng import SplitMix64
from .spaces import Entourage, Space
from .support import BlockOperator, Decomposition, check_calculus
from .transforms import (ColoredCover, colorize, expand, make_product_entourage,
                         merge_union, product_refine)
from .witnesses import (SimplexGrid, SimplicialComplex, cube_cover,
                        nearest_corner_labeling, pn_sample, ray_cell_cover,
                        simplex_lower_bound_check, sperner_find, star_cover,
                        tree_cover)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CONTRACT = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        h.update(fh.read())
    return h.hexdigest()[:16]


def _space_arg(parser, name="--space"):
    parser.add_argument(name, required=True, help="space JSON file")


def build_parser() -> Parser:
    p = Parser(prog="coarselab", description=__doc__)
    p.add_argument("--format", choices=["json", "summary"], default="json")
    p.add_argument("--out", help="write the produced artifact to this file")
    p.add_argument("--timing", action="store_true",
                   help="attach wall time (breaks byte stability)")
    sub = p.add_subparsers(dest="group", required=True)

    sp = sub.add_parser("space").add_subparsers(dest="op", required=True)
    q = sp.add_parser("info")
    _space_arg(q)

    cv = sub.add_parser("cover").add_subparsers(dest="op", required=True)
    q = cv.add_parser("stats")
    _space_arg(q)
    q.add_argument("--cover", required=True)
    q.add_argument("--entourage")

    tr = sub.add_parser("transform").add_subparsers(dest="op", required=True)
    q = tr.add_parser("colorize")
    _space_arg(q)
    q.add_argument("--cover", required=True)
    q.add_argument("--entourage", required=True)
    q.add_argument("--n", type=int, required=True)
    q = tr.add_parser("expand")
    _space_arg(q)
    q.add_argument("--cover", required=True)
    q.add_argument("--entourage", required=True)
    q = tr.add_parser("union")
    _space_arg(q)
    q.add_argument("--cover", required=True)
    q.add_argument("--cover2", required=True)
    q.add_argument("--entourage", required=True)
    q = tr.add_parser("product")
    _space_arg(q)
    q.add_argument("--space2", required=True)
    q.add_argument("--cover", required=True)
    q.add_argument("--cover2", required=True)
    q.add_argument("--ex", required=True, help="factor entourage on the first space")
    q.add_argument("--ey", required=True, help="factor entourage on the second space")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--m", type=int, required=True)

    wt = sub.add_parser("witness").add_subparsers(dest="op", required=True)
    q = wt.add_parser("cube")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--a", type=float, required=True)
    q.add_argument("--min", type=float, default=0.0)
    q.add_argument("--max", type=float, required=True)
    q.add_argument("--step", type=float, required=True)
    q = wt.add_parser("tree")
    _space_arg(q)
    q.add_argument("--L", type=float, required=True)
    q.add_argument("--root", type=int, default=0)
    q = wt.add_parser("ray")
    _space_arg(q)
    q.add_argument("--entourage", required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--bound", type=float, required=True)
    q = wt.add_parser("hyperbolic")
    q.add_argument("--kappa", type=float, required=True)
    q.add_argument("--lam", type=float, required=True)
    q.add_argument("--mesh-bound", type=float, required=True)
    q.add_argument("--L", type=float, required=True)
    q.add_argument("--n", type=int, default=2)
    q.add_argument("--disk-radius", type=float, required=True)
    q.add_argument("--radial-step", type=float, default=1.0)
    q.add_argument("--angles", type=int, default=48)
    q = wt.add_parser("star")
    q.add_argument("--complex", dest="complex_", required=True)
    q.add_argument("--stability", type=int, required=True)
    q.add_argument("--resolution", type=int, default=12)
    q = wt.add_parser("sperner")
    q.add_argument("--grid", required=True)
    q = wt.add_parser("lowerbound")
    _space_arg(q)
    q.add_argument("--cover", required=True)
    q.add_argument("--n", type=int, required=True)

    su = sub.add_parser("support").add_subparsers(dest="op", required=True)
    q = su.add_parser("verify")
    q.add_argument("--decomposition", required=True)
    q.add_argument("--op", dest="op_t", required=True)
    q.add_argument("--op2", dest="op_s")
    q.add_argument("--vector")

    co = sub.add_parser("corona").add_subparsers(dest="op", required=True)
    q = co.add_parser("equiv")
    q.add_argument("--model", required=True)
    q = co.add_parser("check")
    q.add_argument("--model", required=True)
    q.add_argument("--entourage", required=True)
    q.add_argument("--schedule-constant", type=float)
    q.add_argument("--schedule-power", type=float, default=1.0)
    q = co.add_parser("dimcover")
    q.add_argument("--schedule", required=True)
    q.add_argument("--depth", type=int, required=True)

    pl = sub.add_parser("pipeline")
    pl.add_argument("name", choices=["asdim-upper", "asdim-lower", "hyperbolic-full",
                                     "corona-full", "support-suite"])
    pl.add_argument("--seed", type=int, required=True)
    pl.add_argument("--depth", type=int, default=120)
    pl.add_argument("--trials", type=int, default=100)
    return p


# ---------------------------------------------------------------------------
# Handlers
# ---------------------------------------------------------------------------


def _load_model(path: str, inputs: dict) -> CompactificationModel:
    doc = read_json(path)
    inputs[path] = _digest(path)
    space = load_space(doc["space"])
    return CompactificationModel(space, doc["interior"], doc["corona"])


def _handle(args, inputs: dict):
    """Returns (result, guarantees, artifact)."""
    if args.group == "space":
        doc = read_json(args.space)
        inputs[args.space] = _digest(args.space)
        space = load_space(doc)
        info = {"kind": space.kind, "points": space.n}
        if space.is_metric_backed() and space.n <= 2000:
            info["diameter"] = space.diameter()
        return info, [], None

    if args.group == "cover":
        doc = read_json(args.space)
        inputs[args.space] = _digest(args.space)
        space = load_space(doc)
        cover = load_cover(read_json(args.cover), space)
        inputs[args.cover] = _digest(args.cover)
        ent = None
        if args.entourage:
            ent = load_entourage(read_json(args.entourage), space)
            inputs[args.entourage] = _digest(args.entourage)
        return stats(cover, ent), [], None

    if args.group == "transform":
        space = load_space(read_json(args.space))
        inputs[args.space] = _digest(args.space)
        cover = load_cover(read_json(args.cover), space,
                           require_covering=args.op not in ("union",))
        inputs[args.cover] = _digest(args.cover)
        if args.op == "colorize":
            ent = load_entourage(read_json(args.entourage), space)
            inputs[args.entourage] = _digest(args.entourage)
            out, cert = colorize(cover, ent, args.n)
            return {"families": len(out.families)}, cert, dump_cover(out)
        if args.op == "expand":
            ent = load_entourage(read_json(args.entourage), space)
            inputs[args.entourage] = _digest(args.entourage)
            if cover.families is None:
                raise InvalidInputError("expand needs a cover with families")
            colored = ColoredCover(space, cover.sets, cover.families,
                                   ent, canonicalize=False)
            out, cert = expand(colored, ent)
            return {"sets": len(out.sets)}, cert, dump_cover(out)
        if args.op == "union":
            other = load_cover(read_json(args.cover2), space, require_covering=False)
            inputs[args.cover2] = _digest(args.cover2)
            ent = load_entourage(read_json(args.entourage), space)
            inputs[args.entourage] = _digest(args.entourage)
            if cover.families is None or other.families is None:
                raise InvalidInputError("union needs covers with families")
            ca = ColoredCover(space, cover.sets, cover.families, ent,
                              require_covering=False, canonicalize=False)
            cb = ColoredCover(space, other.sets, other.families, ent,
                              require_covering=False, canonicalize=False)
            out, cert = merge_union(ca, cb, ent)
            return {"sets": len(out.sets)}, cert, dump_cover(out)
        if args.op == "product":
            space2 = load_space(read_json(args.space2))
            inputs[args.space2] = _digest(args.space2)
            cover2 = load_cover(read_json(args.cover2), space2)
            inputs[args.cover2] = _digest(args.cover2)
            ex = load_entourage(read_json(args.ex), space).materialize()
            ey = load_entourage(read_json(args.ey), space2).materialize()
            inputs[args.ex] = _digest(args.ex)
            inputs[args.ey] = _digest(args.ey)
            prod = Space.product(space, space2)
            e = make_product_entourage(prod, ex, ey)
            out, cert = product_refine(cover, cover2, e, args.n, args.m)
            return {"families": len(out.families)}, cert, dump_cover(out)

    if args.group == "witness":
        return _handle_witness(args, inputs)

    if args.group == "support":
        dec = load_decomposition(read_json(args.decomposition))
        inputs[args.decomposition] = _digest(args.decomposition)
        t_op = load_operator(read_json(args.op_t), dec)
        inputs[args.op_t] = _digest(args.op_t)
        s_op = t_op
        if args.op_s:
            s_op = load_operator(read_json(args.op_s), dec)
            inputs[args.op_s] = _digest(args.op_s)
        if args.vector:
            u = np.asarray(read_json(args.vector), dtype=complex)
            inputs[args.vector] = _digest(args.vector)
        else:
            u = np.zeros(dec.total, dtype=complex)
            if dec.total:
                u[0] = 1.0
        report = check_calculus(s_op, t_op, u)
        cert = report.pop("checks")
        return report, cert, None

    if args.group == "corona":
        return _handle_corona(args, inputs)

    raise UsageError(f"unknown group {args.group}")


def _handle_witness(args, inputs: dict):
    if args.op == "cube":
        space = Space.grid(args.n, [args.min] * args.n, [args.max] * args.n,
                           args.step)
        out, cert = cube_cover(space, args.n, args.a)
        return {"sets": len(out.sets), "families": len(out.families)}, cert, dump_cover(out)
    if args.op == "tree":
        space = load_space(read_json(args.space))
        inputs[args.space] = _digest(args.space)
        out, cert = tree_cover(space, args.L, args.root)
        return {"sets": len(out.sets)}, cert, dump_cover(out)
    if args.op == "ray":
        space = load_space(read_json(args.space))
        inputs[args.space] = _digest(args.space)
        ent = load_entourage(read_json(args.entourage), space)
        inputs[args.entourage] = _digest(args.entourage)
        out, cert = ray_cell_cover(args.n, ent, args.bound)
        return {"sets": len(out.sets), "families": len(out.families)}, cert, dump_cover(out)
    if args.op == "hyperbolic":
        rho, N = hyperbolic_params(args.kappa, args.lam, args.mesh_bound,
                                   args.L, args.n)
        atlas = SphereAtlas(args.kappa, rho, args.lam, args.mesh_bound)
        disk = sample_disk(args.kappa, args.disk_radius, args.radial_step,
                           args.angles)
        out, cert, labels = sphere_cover_lift(atlas, rho, N, args.L, disk)
        result = {"rho": rho, "N": N, "sets": len(out.sets),
                  "layers": sorted({k for k, _ in labels})}
        return result, cert, dump_cover(out)
    if args.op == "star":
        doc = read_json(args.complex_)
        inputs[args.complex_] = _digest(args.complex_)
        comp = SimplicialComplex(doc["coordinates"], doc["maximal"])
        out, cert = star_cover(comp, args.stability, args.resolution)
        return {"sets": len(out.sets)}, cert, dump_cover(out)
    if args.op == "sperner":
        doc = read_json(args.grid)
        inputs[args.grid] = _digest(args.grid)
        grid = SimplexGrid(doc["corners"], int(doc["resolution"]))
        if doc.get("labeling"):
            grid.labeling = {i: int(l) for i, l in enumerate(doc["labeling"])}
        else:
            grid.labeling = nearest_corner_labeling(grid)
        found = sperner_find(grid)
        return {"cell": list(found["cell"]), "count": found["count"],
                "odd": found["count"] % 2 == 1}, [], None
    if args.op == "lowerbound":
        space = load_space(read_json(args.space))
        inputs[args.space] = _digest(args.space)
        cover = load_cover(read_json(args.cover), space)
        inputs[args.cover] = _digest(args.cover)
        cert = simplex_lower_bound_check(cover, args.n)
        result = {"certificate": {"point": cert["point"], "sets": cert["sets"]},
                  "fully_labeled_count": cert["fully_labeled_count"],
                  "level": cert["r"]}
        guarantee = [{"id": "lower_bound.certificate", "claimed": args.n + 1,
                      "measured": len(cert["all_containing_sets"]),
                      "pass": len(cert["all_containing_sets"]) >= args.n + 1}]
        return result, guarantee, None
    raise UsageError(f"unknown witness op {args.op}")


def _handle_corona(args, inputs: dict):
    if args.op == "equiv":
        model = _load_model(args.model, inputs)
        out = roundtrip_bounds(model)
        f_table = [map_f(model, ci, min(5, model.depth))
                   for ci in range(len(model.corona))]
        g_table = [list(map_g(model, x)) for x in model.interior]
        guarantees = [
            {"id": "corona.fg_bound", "claimed": "d(f(g(x)),x) <= 2/(i-1)",
             "measured": len(out["fg_failures"]), "pass": not out["fg_failures"]},
            {"id": "corona.gf_bands", "claimed": "n_k+1 <= level <= k",
             "measured": len(out["gf_failures"]), "pass": not out["gf_failures"]},
        ]
        result = {"fg_worst_ratio": out["fg_worst_ratio"],
                  "checked": out["gf_checked"],
                  "f_at_level_5": f_table, "g_table_size": len(g_table)}
        return result, guarantees, None
    if args.op == "check":
        model = _load_model(args.model, inputs)
        ent = load_entourage(read_json(args.entourage), model.ambient)
        inputs[args.entourage] = _digest(args.entourage)
        out = check_cc_entourage(model, ent, args.schedule_constant,
                                 args.schedule_power)
        return out, [], None
    if args.op == "dimcover":
        doc = read_json(args.schedule)
        inputs[args.schedule] = _digest(args.schedule)
        depth = args.depth
        if doc.get("kind") == "point":
            space = Space.cloud(np.zeros((1, 2)))
            sched = fixtures.CoronaCoverSchedule(
                space, 1,
                lambda k: ColoredCover(space, [[0]], [[0]],
                                       Entourage.diagonal(space),
                                       canonicalize=False),
                lambda k: 1.0)
        elif doc.get("kind") == "circle_arcs":
            space = fixtures.circle_space(int(doc.get("points", 720)))
            sched = fixtures.circle_arc_schedule(space,
                                                 float(doc.get("overlap", 0.95)))
        else:
            raise InvalidInputError("schedule kind must be 'point' or 'circle_arcs'")
        delta = doc.get("delta", {})
        deltas = fixtures.power_decay_deltas(depth, float(delta.get("c", 4.0)),
                                             float(delta.get("power", 1.5)))
        window = fixtures.shift_window(depth)
        out, cert, info = corona_dim_cover(sched, deltas, window, depth)
        result = {"sets": len(out.sets), "layers": info["layers"],
                  "d_floor": info["d_sequence"][-1], "d_head": info["d_sequence"][0]}
        return result, cert, dump_cover(out)
    raise UsageError(f"unknown corona op {args.op}")


# ---------------------------------------------------------------------------
# Pipelines
# ---------------------------------------------------------------------------


def _pipeline(args):
    rng = SplitMix64(args.seed)
    name = args.name
    if name == "asdim-upper":
        grid = Space.grid(2, [0, 0], [18, 18], 0.5)
        cov, cert1 = cube_cover(grid, 2, 10.0)
        L = Entourage.radius(grid, 0.6).materialize()
        colored, cert2 = colorize(Cover(grid, cov.sets), L, 2)
        expanded, cert3 = expand(colored, L)
        result = stats(expanded, L)
        return result, cert1 + cert2 + cert3, None
    if name == "asdim-lower":
        space = pn_sample(2, 16.0, 0.5)
        cov, _ = cube_cover(space, 2, 8.0)
        cert = simplex_lower_bound_check(Cover(space, cov.sets), 2)
        guarantee = [{"id": "lower_bound.certificate", "claimed": 3,
                      "measured": len(cert["all_containing_sets"]),
                      "pass": len(cert["all_containing_sets"]) >= 3}]
        return ({"certificate": {"point": cert["point"], "sets": cert["sets"]},
                 "odd_count": cert["fully_labeled_count"] % 2 == 1},
                guarantee, None)
    if name == "hyperbolic-full":
        kappa, lam, mesh_bound, L, n = -1.0, 0.2, 1.0, 5.0, 2
        rho, N = hyperbolic_params(kappa, lam, mesh_bound, L, n)
        atlas = SphereAtlas(kappa, rho, lam, mesh_bound)
        disk = sample_disk(kappa, 30.0, 1.0, 48)
        cov, cert, _ = sphere_cover_lift(atlas, rho, N, L, disk)
        worst = check_contraction(kappa, rho, 1, disk, rng, 2000)
        cert = list(cert)
        cert.append({"id": "hyperbolic.contraction", "claimed": "<= 0",
                     "measured": worst, "pass": worst <= 1e-9})
        delta = 0.5
        gap = lipschitz_gap_bound(kappa, delta) + 0.3
        ratio = check_radial_lipschitz(kappa, rho, 1, gap, delta, 720)
        cert.append({"id": "hyperbolic.radial_lipschitz", "claimed": f"<= {delta}",
                     "measured": ratio, "pass": ratio <= delta + 1e-9})
        return {"rho": rho, "N": N, "stats": stats(cov)}, cert, None
    if name == "corona-full":
        model = fixtures.unit_interval_model(1.0 / 200)
        out1 = roundtrip_bounds(model)
        disk = fixtures.disk_model()
        out2 = roundtrip_bounds(disk)
        space = fixtures.circle_space(720)
        sched = fixtures.circle_arc_schedule(space)
        depth = args.depth
        cov, cert, info = corona_dim_cover(
            sched, fixtures.power_decay_deltas(depth),
            fixtures.shift_window(depth), depth)
        guarantees = list(cert)
        guarantees.append({"id": "corona.fg_bound_interval", "claimed": 0,
                           "measured": len(out1["fg_failures"]),
                           "pass": not out1["fg_failures"]})
        guarantees.append({"id": "corona.fg_bound_disk", "claimed": 0,
                           "measured": len(out2["fg_failures"]),
                           "pass": not out2["fg_failures"]})
        return {"depth": depth, "d_floor": info["d_sequence"][-1]}, guarantees, None
    if name == "support-suite":
        fails = 0
        sensitive = 0
        for _ in range(args.trials):
            sizes = [1] * rng.randint(2, 6)
            dims = [rng.randint(1, 4) for _ in sizes]
            space = Space.discrete(len(sizes))
            blocks = [[i] for i in range(len(sizes))]
            dec = Decomposition(space, blocks, dims)
            mats = []
            for _ in range(2):
                m = np.zeros((dec.total, dec.total), dtype=complex)
                for i in range(dec.total):
                    for j in range(dec.total):
                        if rng.uniform() < 0.4:
                            m[i, j] = rng.uniform() - 0.5 + 1j * (rng.uniform() - 0.5)
                mats.append(BlockOperator(dec, m))
            u = np.array([rng.uniform() - 0.5 if rng.uniform() < 0.6 else 0.0
                          for _ in range(dec.total)], dtype=complex)
            report = check_calculus(mats[0], mats[1], u)
            if not report["all_pass"]:
                fails += 1
            sensitive += len(report["tolerance_sensitive"])
        guarantee = [{"id": "support.calculus_inclusions", "claimed": 0,
                      "measured": fails, "pass": fails == 0}]
        return {"trials": args.trials, "tolerance_sensitive": sensitive}, guarantee, None
    raise UsageError(f"unknown pipeline {name}")


# ---------------------------------------------------------------------------
# Entry points
# ---------------------------------------------------------------------------


def run(argv) -> tuple[int, dict]:
    """Dispatch and build the report; returns (exit_code, report)."""
    report: dict = {"command": list(argv)}
    started = time.monotonic()
    try:
        args = build_parser().parse_args(argv)
    except UsageError as err:
        report["error"] = {"kind": "usage", "message": str(err)}
        return EXIT_USAGE, report
    inputs: dict = {}
    code = EXIT_OK
    try:
        if args.group == "pipeline":
            result, guarantees, artifact = _pipeline(args)
        else:
            result, guarantees, artifact = _handle(args, inputs)
        report["result"] = result
        report["guarantees"] = guarantees
        if guarantees and not all(g["pass"] for g in guarantees):
            code = EXIT_CONTRACT
        if artifact is not None and args.out:
            write_json(args.out, artifact)
            report["artifact"] = args.out
    except UsageError as err:
        report["error"] = {"kind": "usage", "message": str(err)}
        code = EXIT_USAGE
    except ContractViolationError as err:
        report["error"] = {"kind": "contract-violation", "message": str(err),
                           "witness": _jsonable(err.witness)}
        code = EXIT_CONTRACT
    except (InvalidInputError, ResourceLimitError) as err:
        kind = "resource-limit" if isinstance(err, ResourceLimitError) else "invalid-input"
        report["error"] = {"kind": kind, "message": str(err)}
        code = EXIT_INVALID
    except InternalCheckError as err:
        report["error"] = {"kind": "internal", "message": str(err)}
        code = EXIT_CONTRACT
    except FileNotFoundError as err:
        report["error"] = {"kind": "invalid-input", "message": str(err)}
        code = EXIT_INVALID
    report["inputs"] = inputs
    if getattr(args, "timing", False):
        report["wall_time_ms"] = round((time.monotonic() - started) * 1000, 3)
    return code, report


def _jsonable(obj):
    try:
        json.dumps(obj)
        return obj
    except TypeError:
        return repr(obj)


def render(report: dict, fmt: str) -> str:
    if fmt == "summary":
        lines = []
        if "error" in report:
            lines.append(f"error[{report['error']['kind']}]: {report['error']['message']}")
        for g in report.get("guarantees", []):
            status = "pass" if g["pass"] else "FAIL"
            extra = "".join(
                f" {key}={g[key]}" for key in ("claimed", "measured", "witness")
                if g.get(key) is not None)
            lines.append(f"{status} {g['id']}:{extra}" if extra
                         else f"{status} {g['id']}")
        if "result" in report:
            lines.append(json.dumps(report["result"], sort_keys=True, default=str))
        return "\n".join(lines) + "\n"
    return json.dumps(report, sort_keys=True, separators=(",", ":"),
                      default=str) + "\n"


def main(argv: Optional[list] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    fmt = "json"
    if "--format" in argv:
        try:
            fmt = argv[argv.index("--format") + 1]
        except IndexError:
            pass
    code, report = run(argv)
    sys.stdout.write(render(report, fmt))
    return code


if __name__ == "__main__":
    sys.exit(main())
