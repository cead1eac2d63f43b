"""Command-line entry point: charvar / shear / splice / triangle.

One binary, subcommand style.  Global flags --seed, --tol, --step, --out,
--format resolve with precedence flags > environment (PILLOW_ prefix) >
defaults; all randomness flows from the seed, and artifacts are written
atomically (temp file then rename) so identical argv + seed reproduce
byte-identical output.  Exit codes: 0 success, 1 usage error, 2 domain
error (no intersections under --expect-nonempty, fit budget exhausted,
slope window too small, malformed axiom files).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import triangle as tri
from .charvar import NoConvergence, TraceConfig, trace_image
from .geometry import (
    CrossesCutLine,
    DegenerateOverlap,
    HitsForbiddenCorner,
    NotClosed,
    NotEmbedded,
    PillowCurve,
    canonicalize,
    curves_from_json,
    curves_to_json,
    hausdorff_distance,
)
from .knots import NotCoprime, splice as make_splice, torus_knot, trefoil, unknot
from .shear import (
    BudgetExceeded,
    ShearProgram,
    apply_program,
    base_path,
    fit_program_to_path,
    perturbed_critical_set,
    program_from_json,
    program_to_json,
)
from .splice import (
    LiftFailed,
    NoIntersections,
    casson_note,
    find_splice_reps,
    splice_reps_to_json,
    transpose_image,
    transposed_strands,
)
from .svg import emit_svg

_ENV_PREFIX = "PILLOW_"
_DEFAULTS = {"seed": 0, "tol": 1e-12, "step": 0.005, "out": "out", "format": "both"}
_FORMATS = ("json", "svg", "both")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # exit code 1, not argparse's 2
        raise UsageError(f"{self.prog}: error: {message}")


@dataclass(frozen=True)
class RunConfig:
    seed: int
    tol: float
    step: float
    out: Path
    format: str


def _env(name: str, cast, fallback):
    raw = os.environ.get(_ENV_PREFIX + name.upper())
    if raw is None:
        return fallback
    try:
        return cast(raw)
    except ValueError as exc:
        raise UsageError(f"bad {_ENV_PREFIX}{name.upper()} value {raw!r}") from exc


def _resolve(ns: argparse.Namespace) -> RunConfig:
    seed = ns.seed if ns.seed is not None else _env("seed", int, _DEFAULTS["seed"])
    tol = ns.tol if ns.tol is not None else _env("tol", float, _DEFAULTS["tol"])
    step = ns.step if ns.step is not None else _env("step", float, _DEFAULTS["step"])
    out = ns.out if ns.out is not None else _env("out", str, _DEFAULTS["out"])
    fmt = ns.format if ns.format is not None else _env("format", str, _DEFAULTS["format"])
    if fmt not in _FORMATS:
        raise UsageError(f"--format must be one of {'|'.join(_FORMATS)}, got {fmt!r}")
    if step <= 0 or tol <= 0:
        raise UsageError("--step and --tol must be positive")
    return RunConfig(seed=seed, tol=tol, step=step, out=Path(out), format=fmt)


def _trace_config(cfg: RunConfig, restarts: int) -> TraceConfig:
    return TraceConfig(
        alpha_step=cfg.step,
        newton_tol=cfg.tol,
        restarts=restarts,
        rng_seed=cfg.seed,
    )


def _parse_knot(text: str):
    t = text.strip().lower()
    if t == "unknot":
        return unknot()
    if t == "trefoil":
        return trefoil()
    if t.startswith("torus:"):
        parts = t[len("torus:"):].split(",")
        if len(parts) != 2:
            raise UsageError(f"bad knot spec {text!r} (expected torus:p,q)")
        try:
            p, q = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise UsageError(f"bad knot spec {text!r} (expected torus:p,q)") from exc
        return torus_knot(p, q)
    raise UsageError(f"unrecognized knot {text!r} (use torus:p,q | trefoil | unknot)")


def _relabel(c: PillowCurve, label: str) -> PillowCurve:
    return PillowCurve(
        c.points, list(c.lifts), closed=c.closed, label=label, max_step=math.inf
    )


def _load_curve(path: str) -> PillowCurve:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read curve file {path!r}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"curve file {path!r} is not valid JSON: {exc}") from exc
    try:
        if isinstance(doc, list):
            curves = curves_from_json(text)
            if len(curves) != 1:
                raise UsageError(
                    f"curve file {path!r} holds {len(curves)} curves; expected exactly 1"
                )
            return curves[0]
        return PillowCurve.from_json_dict(doc)
    except UsageError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"curve file {path!r} is not a valid curve: {exc}") from exc


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    tmp = out_dir / (name + ".tmp")
    tmp.write_text(text)
    final = out_dir / name
    os.replace(tmp, final)
    return final


def _emit_pair(
    cfg: RunConfig, stem: str, json_text: str | None, svg_text: str | None
) -> None:
    if json_text is not None and cfg.format in ("json", "both"):
        print(_write(cfg.out, stem + ".json", json_text))
    if svg_text is not None and cfg.format in ("svg", "both"):
        print(_write(cfg.out, stem + ".svg", svg_text))


# --- subcommands -------------------------------------------------------------

def _cmd_charvar(ns: argparse.Namespace) -> int:
    cfg = _resolve(ns)
    k = _parse_knot(ns.knot)
    curves = trace_image(k, _trace_config(cfg, ns.restarts))
    _emit_pair(cfg, "charvar_curves", curves_to_json(curves), emit_svg(curves))
    return 0


def _cmd_splice(ns: argparse.Namespace) -> int:
    cfg = _resolve(ns)
    prob = make_splice(_parse_knot(ns.left), _parse_knot(ns.right))
    tc = _trace_config(cfg, ns.restarts)
    left_curves = trace_image(prob.left, tc)
    right_curves = trace_image(prob.right, tc)
    try:
        reps = find_splice_reps(prob, tc, images=(left_curves, right_curves))
    except NoIntersections:
        if ns.expect_nonempty:
            raise
        reps = []
    overlay: list[PillowCurve] = []
    for c in left_curves:
        overlay.append(_relabel(c, c.label if c.label == "abelian" else f"left-{c.label}"))
    for c in right_curves:
        if c.label == "abelian":
            overlay.append(_relabel(transpose_image(c), "right-abelian"))
        else:
            for i, s in enumerate(transposed_strands(c)):
                overlay.append(_relabel(s, f"right-{c.label}.{i}"))
    marks = [r.point for r in reps]
    _emit_pair(
        cfg, "splice_witnesses", splice_reps_to_json(reps), emit_svg(overlay, marks)
    )
    note = casson_note(prob)
    if reps and note:
        print(note)
    return 0


def _cmd_shear_fit(ns: argparse.Namespace) -> int:
    cfg = _resolve(ns)
    target = _load_curve(ns.target)
    code = 0
    try:
        prog = fit_program_to_path(
            target, budget=ns.budget, tol=ns.fit_tol, degree=ns.degree
        )
    except BudgetExceeded as exc:
        prog = exc.program
        code = 2
        print(f"budget exhausted: best distance {exc.distance:.6g}", file=sys.stderr)
    fitted = apply_program(prog, base_path())
    dist = hausdorff_distance(fitted, target)
    report = {
        "budget": ns.budget,
        "converged": code == 0,
        "distance": dist,
        "steps": len(prog.steps),
        "tol": ns.fit_tol,
    }
    if cfg.format in ("json", "both"):
        print(_write(cfg.out, "shear_fit_program.json", program_to_json(prog)))
        print(
            _write(
                cfg.out,
                "shear_fit_report.json",
                json.dumps(report, indent=2, sort_keys=True) + "\n",
            )
        )
    svg = emit_svg([_relabel(target, "target"), _relabel(fitted, "fitted")])
    if cfg.format in ("svg", "both"):
        print(_write(cfg.out, "shear_fit_figure.svg", svg))
    return code


def _cmd_shear_apply(ns: argparse.Namespace) -> int:
    cfg = _resolve(ns)
    try:
        prog = program_from_json(Path(ns.program).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read program file {ns.program!r}: {exc}") from exc
    curve = _load_curve(ns.curve) if ns.curve else base_path()
    image = apply_program(prog, curve)
    _emit_pair(
        cfg,
        "shear_apply_curve",
        curves_to_json([image]),
        emit_svg([_relabel(curve, "input"), _relabel(image, "image")]),
    )
    return 0


def _cmd_shear_critical(ns: argparse.Namespace) -> int:
    cfg = _resolve(ns)
    k = _parse_knot(ns.knot)
    if ns.program:
        try:
            prog = program_from_json(Path(ns.program).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read program file {ns.program!r}: {exc}") from exc
    else:
        prog = ShearProgram(())
    tc = _trace_config(cfg, ns.restarts)
    image = trace_image(k, tc)
    points, c_prime = perturbed_critical_set(k, prog, tc, image=image)
    doc = {
        "count": len(points),
        "points": [
            {
                "alpha": cp.rep.alpha,
                "beta": cp.rep.beta,
                "multiplicity": cp.multiplicity,
                "residual": cp.rep.residual,
            }
            for cp in points
        ],
    }
    overlay = [_relabel(c, c.label) for c in image] + [_relabel(c_prime, "c-prime")]
    _emit_pair(
        cfg,
        "shear_critical",
        json.dumps(doc, indent=2, sort_keys=True) + "\n",
        emit_svg(overlay, [canonicalize(cp.rep.alpha, cp.rep.beta) for cp in points]),
    )
    if ns.expect_nonempty and not points:
        print("critical set is empty", file=sys.stderr)
        return 2
    return 0


def _cmd_triangle_run(ns: argparse.Namespace) -> int:
    cfg = _resolve(ns)
    try:
        text = Path(ns.axioms).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read axioms file {ns.axioms!r}: {exc}") from exc
    try:
        store = tri.run_axioms(text, window=ns.window)
    except json.JSONDecodeError as exc:
        raise tri.Malformed(f"axioms file is not valid JSON: {exc}") from exc
    tri.replay(store)
    lines = [f"# window: {store.window}", f"# facts: {len(store)}", ""]
    lines.extend(tri.fmt_fact(f) for f in store.facts())
    cons = store.contradictions()
    for con in cons:
        lines.append("")
        lines.append("derivation:")
        lines.append(tri.explain(store, con))
    lines.append("")
    if cons:
        lines.append(tri.fmt_fact(cons[-1]))
    else:
        lines.append("NO CONTRADICTION")
    transcript = "\n".join(lines) + "\n"
    print(_write(cfg.out, "triangle_transcript.txt", transcript))
    sys.stdout.write(transcript)
    return 0


# --- parser ------------------------------------------------------------------

def _build_parser() -> _Parser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("global options")
    g.add_argument("--seed", type=int, default=None, help="RNG seed (default 0)")
    g.add_argument("--tol", type=float, default=None, help="solver tolerance (default 1e-12)")
    g.add_argument("--step", type=float, default=None, help="alpha step for tracing (default 0.005)")
    g.add_argument("--out", default=None, help="artifact directory (default ./out)")
    g.add_argument(
        "--format", choices=_FORMATS, default=None, help="artifact formats (default both)"
    )

    trace = _Parser(add_help=False)
    trace.add_argument(
        "--restarts", type=int, default=64, help="multistart count per census solve"
    )

    parser = _Parser(
        prog="pillowcase",
        description="Pillowcase character-variety toolkit: trace images, "
        "shear perturbations, splice witnesses, surgery calculus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_char = sub.add_parser(
        "charvar", parents=[common, trace], help="trace a knot's pillowcase image"
    )
    p_char.add_argument("--knot", required=True, help="torus:p,q | trefoil | unknot")
    p_char.set_defaults(func=_cmd_charvar)

    p_spl = sub.add_parser(
        "splice", parents=[common, trace], help="intersect two knot images (splice witnesses)"
    )
    p_spl.add_argument("--left", required=True, help="left knot (torus:p,q | ...)")
    p_spl.add_argument("--right", required=True, help="right knot")
    p_spl.add_argument(
        "--expect-nonempty",
        action="store_true",
        help="exit 2 if no witnesses are found",
    )
    p_spl.set_defaults(func=_cmd_splice)

    p_shear = sub.add_parser("shear", help="area-preserving shear tools")
    shear_sub = p_shear.add_subparsers(dest="shear_command", required=True)

    p_fit = shear_sub.add_parser(
        "fit", parents=[common], help="fit a shear program to a target path"
    )
    p_fit.add_argument("--target", required=True, help="curve JSON file")
    p_fit.add_argument("--budget", type=int, default=40, help="max program length")
    p_fit.add_argument("--degree", type=int, default=32, help="profile cosine degree")
    p_fit.add_argument(
        "--fit-tol", type=float, default=1e-2, help="target C0 distance"
    )
    p_fit.set_defaults(func=_cmd_shear_fit)

    p_apply = shear_sub.add_parser(
        "apply", parents=[common], help="apply a shear program to a curve"
    )
    p_apply.add_argument("--program", required=True, help="program JSON file")
    p_apply.add_argument(
        "--curve", default=None, help="curve JSON file (default: the path beta = pi)"
    )
    p_apply.set_defaults(func=_cmd_shear_apply)

    p_crit = shear_sub.add_parser(
        "critical",
        parents=[common, trace],
        help="critical points of a knot image against a sheared path",
    )
    p_crit.add_argument("--knot", required=True, help="torus:p,q | trefoil | unknot")
    p_crit.add_argument(
        "--program", default=None, help="program JSON file (default: empty program)"
    )
    p_crit.add_argument(
        "--expect-nonempty",
        action="store_true",
        help="exit 2 if the critical set is empty",
    )
    p_crit.set_defaults(func=_cmd_shear_critical)

    p_tri = sub.add_parser("triangle", help="surgery-term saturation engine")
    tri_sub = p_tri.add_subparsers(dest="triangle_command", required=True)
    p_run = tri_sub.add_parser(
        "run", parents=[common], help="saturate an axiom file and report derivations"
    )
    p_run.add_argument("--axioms", required=True, help="axiom JSON file")
    p_run.add_argument(
        "--window", type=int, default=None, help="slope window (overrides the file)"
    )
    p_run.set_defaults(func=_cmd_triangle_run)

    return parser


_DOMAIN_ERRORS = (
    NoIntersections,
    LiftFailed,
    BudgetExceeded,
    NoConvergence,
    NotCoprime,
    CrossesCutLine,
    DegenerateOverlap,
    HitsForbiddenCorner,
    NotClosed,
    NotEmbedded,
    tri.WindowTooSmall,
    tri.Malformed,
    tri.ReplayFailed,
)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
        return ns.func(ns)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except _DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
