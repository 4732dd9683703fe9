"""
Command-line interface for quadfree.

Every command reads JSON/YAML (or equation text) from files, ``-`` for
standard input, and writes its JSON payload to standard output or
``--output``. Exit codes: 0 SAT/accepted/yes, 1 UNSAT/rejected/no,
2 UNKNOWN, 3 usage or input errors.
"""

import importlib
import logging
import random
import sys
from contextlib import contextmanager
from dataclasses import replace
from typing import Any, Dict, Iterator, Optional, Tuple

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from ..core.equations import (
    DEFAULT_ALPHABET,
    BackMap,
    Equation,
    StandardFormEquation,
    normalize,
    reduced_euler_characteristic,
)
from ..core.errors import QuadfreeError
from ..core.surfaces import SurfaceSummary, build_complex, summarize
from ..core.validators import verify
from ..generators.binpack import (
    INFEASIBLE,
    BinPackingInstance,
    Partition,
    random_instance,
    solve_exact,
    to_equation,
    to_exact,
    validate_partition,
)
from ..generators.ribbons import certificate_to_packing, packing_to_certificate
from ..generators.search import Decision, SearchResult, direct_search, search
from ..io.loader import DocumentLoader, load_budget

EXIT_YES = 0
EXIT_NO = 1
EXIT_UNKNOWN = 2
EXIT_ERROR = 3

# exceptions of the click that typer runs on, bundled or external
click_exceptions = importlib.import_module(typer.BadParameter.__module__)

DECISION_EXIT = {Decision.SAT: EXIT_YES, Decision.UNSAT: EXIT_NO, Decision.UNKNOWN: EXIT_UNKNOWN}

app = typer.Typer(
    name="quadfree",
    help="Quadratic equations over free groups: standard forms, certificates, search and bin packing",
    add_completion=False,
)
binpack_app = typer.Typer(help="Bin packing instances and their genus zero equations")
app.add_typer(binpack_app, name="binpack")

console = Console(stderr=True)
loader = DocumentLoader()
logger = logging.getLogger("quadfree")

OUTPUT_OPTION = typer.Option("-", "--output", "-o", help="Output file (.json or .yaml), '-' for stdout")
ALPHABET_OPTION = typer.Option(DEFAULT_ALPHABET, "--alphabet", "-a", help="Constant generators for equation text")


@app.callback()
def main_options(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging on stderr"),
):
    """Quadratic equations over free groups."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


@contextmanager
def _reported(action: str) -> Iterator[None]:
    """Turn library errors into a red message and exit code 3."""
    try:
        yield
    except (QuadfreeError, ValueError, OSError) as exc:
        console.print(f"[bold red]Error {action}: {exc}[/bold red]")
        raise typer.Exit(EXIT_ERROR)


def _emit(data: Dict[str, Any], output: str) -> None:
    loader.write_document(data, output)


def _standard_form(eq: Equation) -> Tuple[StandardFormEquation, Optional[BackMap]]:
    if isinstance(eq, StandardFormEquation):
        return eq, None
    return normalize(eq)


def _surface_table(summary: SurfaceSummary, title: str) -> Table:
    table = Table(title=title)
    table.add_column("Component", style="cyan")
    table.add_column("Discs", style="magenta")
    table.add_column("chi", style="yellow")
    table.add_column("Surface", style="green")
    for number, component in enumerate(summary.components, start=1):
        table.add_row(
            str(number),
            " ".join(f"C{i + 1}" for i in component.discs),
            str(component.euler_characteristic),
            component.classify(),
        )
    return table


def _report_decision(result: SearchResult) -> None:
    colour = {Decision.SAT: "green", Decision.UNSAT: "red", Decision.UNKNOWN: "yellow"}[result.decision]
    console.print(f"[bold {colour}]{result.decision.value}[/bold {colour}] {result.detail} "
                  f"({result.nodes} nodes, {result.elapsed:.2f}s)")


@app.command("normalize")
def normalize_cmd(
    equation_file: str = typer.Argument(help="File holding equation text or a JSON/YAML equation document"),
    alphabet: str = ALPHABET_OPTION,
    output: str = OUTPUT_OPTION,
):
    """Bring a quadratic equation to standard form."""
    with _reported("normalizing equation"):
        eq = loader.load_equation(equation_file, alphabet)
        sf, back = _standard_form(eq)
        data = loader.standard_form_to_dict(sf)
        if back is not None:
            data["back_map"] = loader.back_map_to_dict(back)
        _emit(data, output)
    kind = "orientable" if sf.orientable else "non-orientable"
    console.print(f"[bold]{sf}[/bold]  ({kind}, g = {sf.genus}, m = {sf.m}, "
                  f"chi = {reduced_euler_characteristic(sf)})")


@app.command("verify")
def verify_cmd(
    equation_file: str = typer.Argument(help="File holding equation text or a JSON/YAML equation document"),
    certificate_file: str = typer.Argument(help="Certificate document"),
    alphabet: str = ALPHABET_OPTION,
    output: str = OUTPUT_OPTION,
):
    """Check a certificate of solvability."""
    with _reported("verifying certificate"):
        sf, _ = _standard_form(loader.load_equation(equation_file, alphabet))
        cert = loader.load_certificate(certificate_file)
        verdict = verify(sf, cert)
        _emit(loader.verdict_to_dict(verdict), output)

    if verdict.surfaces is not None:
        console.print(_surface_table(verdict.surfaces, f"Surfaces of {cert.n} glued edges"))
    if verdict.accepted:
        console.print(f"[bold green]✓ Certificate accepted[/bold green] {verdict.detail}")
        raise typer.Exit(EXIT_YES)
    console.print(f"[bold red]✗ Condition {verdict.failed_condition.value} fails[/bold red] {verdict.detail}")
    raise typer.Exit(EXIT_NO)


@app.command("solve")
def solve_cmd(
    equation_file: str = typer.Argument(help="File holding equation text or a JSON/YAML equation document"),
    max_n: Optional[int] = typer.Option(None, "--max-n", help="Largest certificate variable count to try"),
    timeout: Optional[float] = typer.Option(None, "--timeout", "-t", help="Wall-clock limit in seconds"),
    workers: Optional[int] = typer.Option(None, "--workers", "-w", help="Worker processes for the search"),
    direct: bool = typer.Option(False, "--direct", help="Enumerate assignments instead of certificates"),
    max_len: int = typer.Option(3, "--max-len", help="Longest value tried by --direct"),
    config: Optional[str] = typer.Option(None, "--config", "-c", help="YAML/JSON search budget file"),
    alphabet: str = ALPHABET_OPTION,
    output: str = OUTPUT_OPTION,
):
    """Decide solvability; SAT carries a certificate or an assignment."""
    with _reported("solving equation"):
        budget = load_budget(config, max_n=max_n, timeout=timeout, workers=workers)
        eq = loader.load_equation(equation_file, alphabet)
        if direct:
            result = direct_search(eq, max_len, budget)
            data = loader.search_result_to_dict(result)
        else:
            sf, back = _standard_form(eq)
            result = search(sf, budget)
            if result.assignment is not None and back is not None:
                result = replace(result, assignment=back(result.assignment))
            data = loader.search_result_to_dict(result)
            data["standard_form"] = loader.standard_form_to_dict(sf)
        _emit(data, output)

    _report_decision(result)
    raise typer.Exit(DECISION_EXIT[result.decision])


@app.command("classify")
def classify_cmd(
    boundaries_file: str = typer.Argument(help="Certificate or {\"boundaries\": [...]} document"),
    output: str = OUTPUT_OPTION,
):
    """Glue disc boundaries and name the surfaces they form."""
    with _reported("classifying boundaries"):
        summary = summarize(build_complex(loader.load_boundaries(boundaries_file)))
        _emit(loader.surfaces_to_dict(summary), output)
    console.print(_surface_table(summary, "Glued surfaces"))


@app.command("gen-instance")
def gen_instance_cmd(
    seed: Optional[int] = typer.Option(None, "--seed", "-s", help="Random seed"),
    max_items: int = typer.Option(5, "--max-items", help="Most items drawn"),
    max_size: int = typer.Option(4, "--max-size", help="Largest item size"),
    max_bins: int = typer.Option(3, "--max-bins", help="Most bins"),
    exact: bool = typer.Option(True, "--exact/--loose", help="Pad to an exact instance"),
    output: str = OUTPUT_OPTION,
):
    """Draw a random bin packing instance."""
    rng = random.Random(seed)
    with _reported("generating instance"):
        inst = random_instance(rng, max_items, max_size, max_bins, exact)
        _emit(loader.instance_to_dict(inst), output)
    logger.debug("gen-instance: seed %s gave %s", seed, inst)


def _exact_or_exit(inst: BinPackingInstance, output: str) -> BinPackingInstance:
    padded = to_exact(inst)
    if padded is INFEASIBLE:
        _emit({"feasibility": INFEASIBLE.value, "slack": inst.slack}, output)
        console.print(f"[bold red]✗ Items exceed N B by {-inst.slack}[/bold red]")
        raise typer.Exit(EXIT_NO)
    return padded


@binpack_app.command("to-exact")
def binpack_to_exact(
    instance_file: str = typer.Argument(help="Instance document"),
    output: str = OUTPUT_OPTION,
):
    """Pad an instance with unit items so every bin is filled exactly."""
    with _reported("padding instance"):
        inst = loader.load_instance(instance_file)
    padded = _exact_or_exit(inst, output)
    with _reported("writing instance"):
        _emit(loader.instance_to_dict(padded), output)
    console.print(f"Added {padded.k - inst.k} unit item(s)")


@binpack_app.command("solve")
def binpack_solve(
    instance_file: str = typer.Argument(help="Instance document"),
    output: str = OUTPUT_OPTION,
):
    """Pack the items, or report that no packing exists."""
    with _reported("loading instance"):
        inst = loader.load_instance(instance_file)
    padded = _exact_or_exit(inst, output)
    with _reported("packing instance"):
        found = solve_exact(padded)
        if found is None:
            _emit({"packable": False}, output)
        else:
            # drop the padding items again
            part = Partition(tuple(tuple(j for j in block if j <= inst.k) for block in found.blocks))
            ok, errors = validate_partition(inst, part)
            if not ok:
                raise QuadfreeError("; ".join(errors))
            _emit({"packable": True, **loader.partition_to_dict(part)}, output)

    if found is None:
        console.print("[bold red]✗ No packing[/bold red]")
        raise typer.Exit(EXIT_NO)
    console.print(f"[bold green]✓ Packed into {inst.bins} bin(s)[/bold green] loads {part.loads(inst)}")


@binpack_app.command("to-equation")
def binpack_to_equation(
    instance_file: str = typer.Argument(help="Instance document"),
    output: str = OUTPUT_OPTION,
):
    """Write the genus zero equation solvable iff the instance packs."""
    with _reported("loading instance"):
        inst = loader.load_instance(instance_file)
    padded = _exact_or_exit(inst, output)
    with _reported("building equation"):
        sf = to_equation(padded)
        _emit(loader.standard_form_to_dict(sf), output)
    console.print(f"m = {sf.m}, d = {sf.d}")


@binpack_app.command("to-certificate")
def binpack_to_certificate(
    instance_file: str = typer.Argument(help="Exact instance document"),
    partition_file: str = typer.Argument(help="Partition document"),
    output: str = OUTPUT_OPTION,
):
    """Turn a packing into a certificate for the instance's equation."""
    with _reported("building certificate"):
        inst = loader.load_instance(instance_file)
        cert = packing_to_certificate(inst, loader.load_partition(partition_file))
        _emit(loader.certificate_to_dict(cert), output)
    console.print(f"[bold green]✓ Certificate with n = {cert.n}[/bold green]")


@binpack_app.command("from-certificate")
def binpack_from_certificate(
    instance_file: str = typer.Argument(help="Exact instance document"),
    certificate_file: str = typer.Argument(help="Certificate document"),
    output: str = OUTPUT_OPTION,
):
    """Read a packing off an accepted certificate."""
    with _reported("reading packing"):
        inst = loader.load_instance(instance_file)
        part = certificate_to_packing(inst, loader.load_certificate(certificate_file))
        _emit(loader.partition_to_dict(part), output)
    console.print(f"[bold green]✓ Blocks {[list(b) for b in part.blocks]}[/bold green]")


def main() -> None:
    """Console script entry point; usage errors exit with code 3."""
    try:
        code = app(standalone_mode=False)
    except typer.Abort:
        console.print("[bold red]Aborted[/bold red]")
        sys.exit(EXIT_ERROR)
    except click_exceptions.ClickException as exc:
        exc.show()
        sys.exit(EXIT_ERROR)
    sys.exit(code or 0)


if __name__ == "__main__":
    main()
