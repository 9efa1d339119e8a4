"""Main entry point for the quiverforge CLI application."""

import json
import logging
import os
from collections.abc import Iterator, Sequence
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import click
import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

from quiverforge import analyze, transform
from quiverforge.config import ForgeConfig
from quiverforge.corpus import list_fixtures, run_corpus
from quiverforge.documents import (
    SUFFIX,
    QuiverDocument,
    dumps,
    export_dot,
    load,
    quiver_from_dict,
    save,
)
from quiverforge.exceptions import (
    BoundExceededError,
    ConfigurationError,
    DocumentError,
    PassError,
    PolynomialSyntaxError,
    QuiverError,
    QuiverForgeError,
    RingError,
)
from quiverforge.extract import equivalent, reextract
from quiverforge.materialize import materialize as materialize_quiver
from quiverforge.quiver import FullQuiver, branches, classical_quiver, primitive_arrows, validate

# Configure logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()
logging.basicConfig(
    level=LOG_LEVEL,
    format="%(message)s",
    datefmt="[%X]",
    handlers=[
        RichHandler(console=Console(stderr=True), rich_tracebacks=True, markup=False)
    ],
)

logger = logging.getLogger(__name__)

app = typer.Typer(
    name="quiverforge",
    help="Exact algebra of full quivers: materialize, extract, transform and analyze.",
    add_completion=False,
)
console = Console()
err_console = Console(stderr=True)

# Exit code for an unknown subcommand or bad usage
USAGE_EXIT = 64

_TITLES: dict[type[QuiverForgeError], str] = {
    ConfigurationError: "Configuration Error",
    RingError: "Ring Error",
    QuiverError: "Quiver Error",
    DocumentError: "Document Error",
    BoundExceededError: "Bound Exceeded",
    PassError: "Pass Error",
    PolynomialSyntaxError: "Polynomial Syntax Error",
}


@dataclass
class _State:
    config: ForgeConfig
    field: tuple[int, int] | None = None
    as_json: bool = False


@contextmanager
def _reporting() -> Iterator[None]:
    """Turn library errors into a red panel and the error's exit code."""
    try:
        yield
    except QuiverForgeError as e:
        title = next((t for cls, t in _TITLES.items() if isinstance(e, cls)), "Application Error")
        logger.error(f"{title}: {e}")
        err_console.print(
            Panel(
                f"[bold red]{title}:[/bold red] {escape(str(e))}\nError Code: {e.error_code}",
                title=title,
                border_style="red",
            )
        )
        raise typer.Exit(e.exit_code) from e


def _parse_field(text: str | None) -> tuple[int, int] | None:
    """
    Read a ``--field`` value, ``p^t`` or ``p``.

    Raises:
        ConfigurationError: If the value is not of that form.
    """
    if text is None:
        return None
    p, _, t = text.strip().partition("^")
    try:
        return int(p), int(t) if t else 1
    except ValueError as e:
        raise ConfigurationError(
            f"--field must look like p^t, got: {text}", "INVALID_FIELD_FLAG"
        ) from e


def _state(ctx: typer.Context) -> _State:
    if isinstance(ctx.obj, _State):
        return ctx.obj
    return _State(ForgeConfig.from_env())


def _load(state: _State, path: Path, check: bool = True) -> QuiverDocument:
    if state.field is None:
        return load(path, state.config, check)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise DocumentError(f"Cannot read {path}: {e.strerror}", "UNREADABLE_DOCUMENT") from e
    except json.JSONDecodeError as e:
        raise DocumentError(
            f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}", "INVALID_JSON"
        ) from e
    if isinstance(data, dict):
        p, t = state.field
        data["base"] = {"p": p, "t": t}
        logger.info(f"Overriding the base field of {path} with GF({p}^{t})")
    return quiver_from_dict(data, state.config, check)


def _echo_json(payload: Any) -> None:
    typer.echo(json.dumps(payload, indent=2, ensure_ascii=False, default=str))


def _write_quiver(q: FullQuiver, output: Path | None) -> None:
    if output is None:
        typer.echo(dumps(q), nl=False)
    else:
        save(q, output)


def _pass_output(state: _State, result: transform.PassResult, output: Path | None) -> None:
    """Write a pass result: the document on stdout or to a file, with a summary."""
    if state.as_json:
        _echo_json(
            {
                "quiver": result.quiver.name,
                "vertices": len(result.quiver.vertices),
                "arrows": len(result.quiver.arrows),
                "changed": result.changed,
                "certificate": result.certificate,
                "trace": result.trace,
            }
        )
        if output is not None:
            save(result.quiver, output)
        return
    _write_quiver(result.quiver, output)
    if output is not None:
        console.print(
            f"[green]{result.quiver.name}[/green]: {len(result.quiver.vertices)} vertices, "
            f"{len(result.quiver.arrows)} arrows, {len(result.trace)} rewrite(s)"
        )
        for line in result.certificate:
            console.print(f"  [dim]✓ {escape(line)}[/dim]")


@app.callback()
def main(
    ctx: typer.Context,
    field: str | None = typer.Option(None, "--field", help="Override the base field, as p^t."),
    kproxy: str | None = typer.Option(
        None, "--kproxy", help="Scalars standing in for K: symbolic or bigprime."
    ),
    degree_bound: int | None = typer.Option(
        None, "--degree-bound", help="Largest q-power degree for relation searches."
    ),
    trials: int | None = typer.Option(None, "--trials", help="Random samples for sampled checks."),
    as_json: bool = typer.Option(False, "--json", help="Print machine-readable reports."),
) -> None:
    """
    Full quivers of representations, computed exactly.
    """
    with _reporting():
        config = ForgeConfig.from_env().with_overrides(
            kproxy_mode=kproxy.strip().lower() if kproxy else None,
            degree_bound=degree_bound,
            trials=trials,
        )
        ctx.obj = _State(config, _parse_field(field), as_json)


@app.command("validate")
def validate_command(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Quiver document to check."),
) -> None:
    """
    Check a quiver document against every full-quiver invariant.
    """
    state = _state(ctx)
    with _reporting():
        q = _load(state, path, check=False).quiver
        report = validate(q)
    if state.as_json:
        _echo_json(
            {
                "quiver": q.name,
                "ok": report.ok,
                "violations": [
                    {"kind": v.kind, "message": v.message, "subject": v.subject}
                    for v in report.violations
                ],
            }
        )
    elif report.ok:
        console.print(f"[green]✓[/green] {q.name} is a valid full quiver")
    else:
        table = Table(title=f"{q.name}: {len(report.violations)} violation(s)")
        table.add_column("Kind", style="red")
        table.add_column("Subject")
        table.add_column("Message")
        for v in report.violations:
            table.add_row(v.kind, v.subject, escape(v.message))
        console.print(table)
    if not report.ok:
        raise typer.Exit(QuiverError.exit_code)


@app.command()
def show(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Quiver document to print."),
) -> None:
    """
    Print vertices, arrows, relations, branches and the primitive arrows.
    """
    state = _state(ctx)
    with _reporting():
        q = _load(state, path).quiver
        primitive, _ = primitive_arrows(q)
        found = branches(q)
    if state.as_json:
        _echo_json(
            {
                "quiver": q.name,
                "vertices": [{"id": v.id, "label": v.label()} for v in q.vertices],
                "arrows": [
                    {"id": a.id, "from": a.src, "to": a.dst, "label": a.label()} for a in q.arrows
                ],
                "relations": q.relations.text_lines(q.field),
                "branches": [list(b.vertices) for b in found],
                "primitive": sorted(primitive, key=lambda x: [a.id for a in q.arrows].index(x)),
            }
        )
        return

    vertices = Table(title=f"{q.name}: vertices")
    vertices.add_column("Id", style="cyan")
    vertices.add_column("Block")
    for v in q.vertices:
        vertices.add_row(v.id, v.label())
    console.print(vertices)

    arrows = Table(title=f"{q.name}: arrows")
    arrows.add_column("Id", style="cyan")
    arrows.add_column("From")
    arrows.add_column("To")
    arrows.add_column("Label")
    arrows.add_column("Primitive")
    for a in q.arrows:
        arrows.add_row(a.id, a.src, a.dst, escape(a.label()), "yes" if a.id in primitive else "no")
    console.print(arrows)

    for line in q.relations.text_lines(q.field):
        console.print(f"relation: {escape(line)}")
    for b in found:
        console.print(f"branch: {' → '.join(b.vertices)}")


@app.command()
def dot(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Quiver document to render."),
    output: Path | None = typer.Option(None, "--output", "-o", help="Write the DOT text here."),
) -> None:
    """
    Export a quiver as Graphviz DOT text.
    """
    state = _state(ctx)
    with _reporting():
        text = export_dot(_load(state, path).quiver)
    if output is None:
        typer.echo(text, nl=False)
    else:
        output.write_text(text, encoding="utf-8")
        logger.info(f"Wrote DOT to {output}")


@app.command()
def classical(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Quiver document."),
) -> None:
    """
    Collapse glue classes into the classical quiver.
    """
    state = _state(ctx)
    with _reporting():
        cq = classical_quiver(_load(state, path).quiver)
    if state.as_json:
        _echo_json(
            {
                "vertices": list(cq.vertices),
                "arrows": [
                    {"from": s, "to": d, "multiplicity": m} for (s, d), m in cq.multiplicities
                ],
                "best_effort": cq.best_effort,
            }
        )
        return
    table = Table(title=f"Classical quiver: {len(cq.vertices)} vertices, {cq.arrow_count} arrows")
    table.add_column("From", style="cyan")
    table.add_column("To", style="cyan")
    table.add_column("Arrows", justify="right")
    for (s, d), m in cq.multiplicities:
        table.add_row(s, d, str(m))
    console.print(table)
    if cq.best_effort:
        console.print("[yellow]Twisted gluing present: multiplicities are best effort[/yellow]")


@app.command()
def compress(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Quiver document."),
    output: Path | None = typer.Option(None, "--output", "-o", help="Write the result here."),
    order: str | None = typer.Option(None, "--order", help="Comma-separated class visiting order."),
    seed: int | None = typer.Option(None, "--seed", help="Shuffle the class order with this seed."),
) -> None:
    """
    Compress glued triangles until the quiver is incompressible.
    """
    state = _state(ctx)
    with _reporting():
        q = _load(state, path).quiver
        classes = [c.strip() for c in order.split(",")] if order else None
        _pass_output(state, transform.compress(q, classes, seed), output)


@app.command()
def decompress(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Quiver document."),
    output: Path | None = typer.Option(None, "--output", "-o", help="Write the result here."),
) -> None:
    """
    Expand every compressed vertex back into its glued triangle.
    """
    state = _state(ctx)
    with _reporting():
        _pass_output(state, transform.decompress(_load(state, path).quiver), output)


@app.command()
def proportionalize(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Quiver document."),
    output: Path | None = typer.Option(None, "--output", "-o", help="Write the result here."),
) -> None:
    """
    Replace linear relations by proportional gluing over a truncated ring.
    """
    state = _state(ctx)
    with _reporting():
        q = _load(state, path).quiver
        _pass_output(state, transform.proportionalize(q, state.config), output)


@app.command()
def frobprop(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Quiver document."),
    output: Path | None = typer.Option(None, "--output", "-o", help="Write the result here."),
) -> None:
    """
    Replace q-polynomial relations by Frobenius-proportional gluing.
    """
    state = _state(ctx)
    with _reporting():
        q = _load(state, path).quiver
        _pass_output(state, transform.frobenius_proportionalize(q, state.config), output)


def _pass_entry(text: str) -> str | tuple[str, dict[str, Any]]:
    """``trade:a1,a2`` names the trade pass with its arrow pattern; anything else is a pass name."""
    name, _, args = text.partition(":")
    if not args:
        return name
    if name != "trade":
        raise PassError(f"Pass {name} takes no arguments", "UNEXPECTED_PASS_ARGUMENTS")
    pattern = [x.strip() for x in args.split(",")]
    if len(pattern) != 2:
        raise PassError(f"trade needs two arrow ids, got: {args}", "INVALID_PASS_ARGUMENTS")
    return name, {"pattern": pattern}


@app.command()
def pipeline(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Quiver document."),
    passes: list[str] = typer.Argument(
        ..., help=f"Passes to run in order: {', '.join(transform.PASS_NAMES)}; trade:a1,a2."
    ),
    output: Path | None = typer.Option(None, "--output", "-o", help="Write the result here."),
) -> None:
    """
    Run several passes in order, each on the previous output.
    """
    state = _state(ctx)
    with _reporting():
        q = _load(state, path).quiver
        entries: Sequence[str | tuple[str, dict[str, Any]]] = [_pass_entry(p) for p in passes]
        _pass_output(state, transform.run_pipeline(q, entries, state.config), output)


@app.command()
def materialize(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Quiver document."),
    dump: bool = typer.Option(False, "--dump", help="Also print the generic element."),
) -> None:
    """
    Build the matrix algebra of a quiver and report its dimensions.
    """
    state = _state(ctx)
    with _reporting():
        mat = materialize_quiver(_load(state, path).quiver, state.config)
    summary = mat.summary()
    if dump:
        summary["generic_element"] = analyze.matrix_text(mat.generic.matrix)
    if state.as_json:
        _echo_json(summary)
        return
    table = Table(title=f"Algebra of {mat.quiver.name}")
    table.add_column("Property", style="cyan")
    table.add_column("Value")
    for key, value in summary.items():
        if key != "generic_element":
            table.add_row(key.replace("_", " "), str(value))
    console.print(table)
    if dump:
        console.print(Panel(escape(str(summary["generic_element"])), title="Generic element"))


@app.command()
def extract(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Quiver document to materialize and extract again."),
    output: Path | None = typer.Option(None, "--output", "-o", help="Write the extracted quiver."),
) -> None:
    """
    Extract a full quiver from the generic element of a quiver's algebra.
    """
    state = _state(ctx)
    with _reporting():
        found, expected = reextract(_load(state, path).quiver, state.config)
        same = equivalent(found.quiver, expected)
    if state.as_json:
        _echo_json(
            {
                "quiver": found.quiver.name,
                "vertices": len(found.quiver.vertices),
                "arrows": len(found.quiver.arrows),
                "relations": found.relations.text_lines(found.quiver.field),
                "symbolic": found.symbolic,
                "matches_source": same,
                "notes": found.notes,
            }
        )
        if output is not None:
            save(found.quiver, output)
        return
    _write_quiver(found.quiver, output)
    style = "green" if same else "yellow"
    err_console.print(
        f"[{style}]Extracted quiver {'matches' if same else 'differs from'} the source[/{style}]"
    )


@app.command("analyze")
def analyze_command(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Quiver document."),
    nilpotence: bool = typer.Option(False, "--nilpotence", help="Nilpotence index and sandwich."),
    commutative: bool = typer.Option(False, "--commutative", help="Commutativity with a witness."),
    gluing: bool = typer.Option(False, "--gluing", help="Classify gluing between branches."),
    pseudo: bool = typer.Option(False, "--pseudo", help="Pseudo-quiver independent form."),
    corner: str | None = typer.Option(None, "--corner", help="Comma-separated vertex subset."),
    cover: list[str] | None = typer.Option(
        None, "--cover", help="Cover as v1,v2 or v1,v2:a1; repeat for each cover."
    ),
) -> None:
    """
    Analyze the algebra of a quiver. Without flags: nilpotence, commutativity and gluing.
    """
    state = _state(ctx)
    if not (nilpotence or commutative or gluing or pseudo or corner or cover):
        nilpotence = commutative = gluing = True
    report: dict[str, Any] = {}
    with _reporting():
        q = _load(state, path).quiver
        report["quiver"] = q.name
        if nilpotence:
            nil = analyze.nilpotence_index(q, state.config)
            report["nilpotence"] = {
                "index": nil.index,
                "max_branch_length": nil.max_branch_length,
                "canonical": nil.canonical,
                "sandwich": nil.witness.text() if nil.witness else None,
                "sandwich_vertex": nil.witness.vertex if nil.witness else None,
            }
        if commutative:
            verdict = analyze.is_commutative(q, state.config)
            report["commutativity"] = {
                "commutative": verdict.commutative,
                "method": verdict.method,
                "witness": verdict.witness_text() or None,
            }
        if gluing:
            glue = analyze.classify_branch_gluing(q)
            report["gluing"] = {
                "kinds": dict(glue.kinds()),
                "complete": glue.complete,
                "cube_dimension": glue.cube_dimension,
                "embeds_in_cube": glue.cube_embedding is not None if glue.complete else None,
            }
        if pseudo:
            form = analyze.pseudo_quiver_form(q)
            report["pseudo"] = {
                "independent": form.independent,
                "arrows": len(form.quiver.arrows),
                "vertex_relations": list(form.vertex_relations),
            }
        if corner:
            found = analyze.convex_corner(q, [v.strip() for v in corner.split(",")], state.config)
            report["corner"] = {
                "convex": found.convex,
                "multiplicative": found.multiplicative,
                "vertices": [v.id for v in found.corner.vertices] if found.corner else None,
            }
        if cover:
            covers = []
            for k, item in enumerate(cover, start=1):
                verts, _, arrows = item.partition(":")
                covers.append(
                    analyze.Cover(
                        tuple(v.strip() for v in verts.split(",")),
                        tuple(a.strip() for a in arrows.split(",")) if arrows else None,
                        f"cover{k}",
                    )
                )
            cv = analyze.subdirect_cover_check(q, covers, state.config)
            report["covers"] = {
                "verdict": cv.verdict,
                "witness": cv.witness or None,
                "dimensions": cv.dimensions,
            }
    if state.as_json:
        _echo_json(report)
        return
    for section, values in report.items():
        if not isinstance(values, dict):
            continue
        table = Table(title=f"{q.name}: {section}")
        table.add_column("Property", style="cyan")
        table.add_column("Value")
        for key, value in values.items():
            table.add_row(key.replace("_", " "), escape(str(value)))
        console.print(table)


@app.command()
def decompose(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Quiver document."),
    output_dir: Path | None = typer.Option(
        None, "--output-dir", "-d", help="Write every part as a document in this directory."
    ),
) -> None:
    """
    Split a quiver into its geometrically indecomposable parts.
    """
    state = _state(ctx)
    with _reporting():
        parts = transform.geometric_decomposition(_load(state, path).quiver)
        if output_dir is not None:
            output_dir.mkdir(parents=True, exist_ok=True)
            for part in parts:
                save(part, output_dir / f"{part.name.replace('/', '-')}{SUFFIX}")
    if state.as_json:
        _echo_json(
            [
                {
                    "name": p.name,
                    "vertices": [v.id for v in p.vertices],
                    "arrows": [a.id for a in p.arrows],
                }
                for p in parts
            ]
        )
        return
    table = Table(title=f"{len(parts)} geometric part(s)")
    table.add_column("Part", style="cyan")
    table.add_column("Vertices")
    table.add_column("Arrows")
    for p in parts:
        table.add_row(
            p.name, ", ".join(v.id for v in p.vertices), ", ".join(a.id for a in p.arrows)
        )
    console.print(table)


@app.command("pi-check")
def pi_check_command(
    ctx: typer.Context,
    path: Path = typer.Argument(..., help="Quiver document."),
    polynomial: str = typer.Argument(..., help='Identity such as "[x1,x2]" or "x1 x2 x3".'),
    mode: str = typer.Option("symbolic", "--mode", help="symbolic (exact) or sampled."),
) -> None:
    """
    Test whether a polynomial identity holds on the algebra of a quiver.
    """
    state = _state(ctx)
    with _reporting():
        verdict = analyze.pi_check(_load(state, path).quiver, polynomial, mode, state.config)
    if state.as_json:
        _echo_json(
            {
                "polynomial": verdict.polynomial,
                "mode": verdict.mode,
                "holds": verdict.holds,
                "counterexample": verdict.counterexample,
            }
        )
    elif verdict.holds:
        console.print(f"[green]✓[/green] {escape(verdict.polynomial)} holds ({verdict.mode})")
    else:
        console.print(
            f"[red]✗[/red] {escape(verdict.polynomial)} fails ({verdict.mode}): "
            f"{escape(str(verdict.counterexample))}"
        )


@app.command()
def corpus(
    ctx: typer.Context,
    names: list[str] | None = typer.Argument(None, help="Fixtures to run; all by default."),
    list_only: bool = typer.Option(False, "--list", help="List the bundled fixtures and exit."),
) -> None:
    """
    Run the bundled fixtures and report every expectation that does not hold.
    """
    state = _state(ctx)
    if list_only:
        fixtures = list_fixtures()
        if state.as_json:
            _echo_json(fixtures)
        else:
            for name in fixtures:
                typer.echo(name)
        return
    with _reporting():
        results = run_corpus(state.config, names or None)
    failed = [r for r in results if not r.ok]
    if state.as_json:
        _echo_json(
            {
                "fixtures": len(results),
                "failed": len(failed),
                "results": [
                    {
                        "name": r.name,
                        "ok": r.ok,
                        "checked": r.checked,
                        "error": r.error or None,
                        "diffs": [d.text() for d in r.diffs],
                    }
                    for r in results
                ],
            }
        )
    else:
        table = Table(title=f"Corpus: {len(results) - len(failed)}/{len(results)} fixtures pass")
        table.add_column("Fixture", style="cyan")
        table.add_column("Checks", justify="right")
        table.add_column("Result")
        for r in results:
            problems = [r.error] if r.error else [d.text() for d in r.diffs]
            outcome = "[green]pass[/green]" if r.ok else f"[red]{escape('; '.join(problems))}[/red]"
            table.add_row(r.name, str(len(r.checked)), outcome)
        console.print(table)
    if failed:
        raise typer.Exit(1)


def run(argv: Sequence[str] | None = None) -> int:
    """
    Run the CLI and return its exit code; usage errors map to 64.
    """
    try:
        code = app(args=list(argv) if argv is not None else None, standalone_mode=False)
    except click.UsageError as e:
        err_console.print(
            Panel(escape(e.format_message()), title="Usage Error", border_style="red")
        )
        return USAGE_EXIT
    except click.Abort:
        return 1
    return code if isinstance(code, int) else 0


if __name__ == "__main__":
    raise SystemExit(run())
