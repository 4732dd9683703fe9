"""
Document loader for JSON/YAML serialization.

Converts equations, certificates, verdicts, bin packing instances and
partitions to and from plain dictionaries, and reads or writes them as JSON
(default) or YAML. The path ``-`` means standard input or output.
"""

import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError

from ..core.equations import (
    DEFAULT_ALPHABET,
    BackMap,
    Equation,
    RawQuadraticEquation,
    StandardFormEquation,
    format_equation,
    parse_equation,
)
from ..core.errors import QuadfreeError
from ..core.surfaces import SurfaceSummary
from ..core.validators import Certificate, Verdict
from ..core.words import Alphabet, Letter, Word, cyclic_canon, format_token, parse_token, parse_word
from ..generators.binpack import BinPackingInstance, Partition
from ..generators.search import SearchBudget, SearchResult

PathLike = Union[str, Path]


class LoaderError(QuadfreeError):
    """Raised when a document cannot be read or does not match its schema."""
    pass


class _Doc(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RawEquationDoc(_Doc):
    equation: Optional[str] = None
    body: Optional[List[Tuple[str, int]]] = None
    alphabet: str = DEFAULT_ALPHABET


class StandardFormDoc(_Doc):
    alphabet: str = DEFAULT_ALPHABET
    orientable: bool
    genus: int = Field(ge=0)
    coefficients: List[str] = []
    d: Optional[str] = None
    # written by normalize, not read back
    back_map: Optional[Dict[str, Any]] = None


class CertificateDoc(_Doc):
    variables: int = Field(ge=0)
    images: Dict[str, str]
    boundaries: List[List[str]]


class BoundariesDoc(BaseModel):
    # certificate documents carry extra keys
    boundaries: List[List[str]] = Field(min_length=1)


class InstanceDoc(_Doc):
    items: List[PositiveInt] = Field(min_length=1)
    B: PositiveInt
    N: PositiveInt
    exact: bool = False


class PartitionDoc(_Doc):
    blocks: List[List[PositiveInt]]


class BudgetDoc(_Doc):
    max_n: Optional[PositiveInt] = None
    timeout: Optional[float] = Field(default=60.0, gt=0)
    max_candidates: Optional[PositiveInt] = None
    workers: PositiveInt = 1
    minimize: bool = True


def _validated(model: type, data: Any) -> Any:
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        raise LoaderError(f"invalid {model.__name__}: {exc}") from exc


class DocumentLoader:
    """Handles reading and writing quadfree documents."""

    # -- equations ---------------------------------------------------------

    def raw_equation_to_dict(self, raw: RawQuadraticEquation) -> Dict[str, Any]:
        return {"equation": format_equation(raw), "alphabet": str(raw.alphabet)}

    def dict_to_raw_equation(self, data: Dict[str, Any]) -> RawQuadraticEquation:
        doc = _validated(RawEquationDoc, data)
        if (doc.equation is None) == (doc.body is None):
            raise LoaderError("a raw equation document needs exactly one of 'equation' and 'body'")
        if doc.body is not None:
            return RawQuadraticEquation.from_body(Alphabet.from_string(doc.alphabet), [tuple(t) for t in doc.body])
        return parse_equation(doc.equation, doc.alphabet)

    def standard_form_to_dict(self, sf: StandardFormEquation) -> Dict[str, Any]:
        return {
            "alphabet": str(sf.alphabet),
            "orientable": sf.orientable,
            "genus": sf.genus,
            "coefficients": [str(w) for w in sf.coefficients],
            "d": None if sf.d is None else str(sf.d),
        }

    def dict_to_standard_form(self, data: Dict[str, Any]) -> StandardFormEquation:
        doc = _validated(StandardFormDoc, data)
        alphabet = Alphabet.from_string(doc.alphabet)
        coefficients = tuple(cyclic_canon(parse_word(w, alphabet)) for w in doc.coefficients)
        d = None if doc.d is None else cyclic_canon(parse_word(doc.d, alphabet))
        return StandardFormEquation(alphabet, doc.orientable, doc.genus, coefficients, d)

    def back_map_to_dict(self, back: BackMap) -> Dict[str, Any]:
        return {
            "raw_variables": list(back.raw_variables),
            "standard_variables": list(back.standard_variables),
            "steps": [step.note for step in back.steps],
        }

    def equation_to_dict(self, eq: Equation) -> Dict[str, Any]:
        if isinstance(eq, StandardFormEquation):
            return self.standard_form_to_dict(eq)
        return self.raw_equation_to_dict(eq)

    def dict_to_equation(self, data: Dict[str, Any]) -> Equation:
        if "equation" in data or "body" in data:
            return self.dict_to_raw_equation(data)
        return self.dict_to_standard_form(data)

    # -- certificates ------------------------------------------------------

    def certificate_to_dict(self, cert: Certificate) -> Dict[str, Any]:
        return {
            "variables": cert.n,
            "images": {p: str(cert.images[p]) for p in cert.variables},
            "boundaries": [[format_token(letter) for letter in b] for b in cert.boundaries],
        }

    def dict_to_certificate(self, data: Dict[str, Any]) -> Certificate:
        doc = _validated(CertificateDoc, data)
        if doc.variables != len(doc.images):
            raise LoaderError(f"certificate declares {doc.variables} variables but has {len(doc.images)} images")
        images = {p: parse_word(w) for p, w in doc.images.items()}
        boundaries = tuple(tuple(parse_token(t) for t in b) for b in doc.boundaries)
        return Certificate(images, boundaries)

    def verdict_to_dict(self, verdict: Verdict) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "accepted": verdict.accepted,
            "failed_condition": None if verdict.failed_condition is None else verdict.failed_condition.value,
            "detail": verdict.detail,
            "chi_total": verdict.chi_total,
            "reduced_euler_characteristic": verdict.reduced_euler_characteristic,
            "loose_edge_bound": verdict.loose_edge_bound,
        }
        if verdict.surfaces is not None:
            data["surfaces"] = self.surfaces_to_dict(verdict.surfaces)["components"]
        return data

    def surfaces_to_dict(self, summary: SurfaceSummary) -> Dict[str, Any]:
        return {
            "components": [
                {
                    "discs": [i + 1 for i in c.discs],
                    "euler_characteristic": c.euler_characteristic,
                    "orientable": c.orientable,
                    "name": c.classify(),
                }
                for c in summary.components
            ],
            "total_euler_characteristic": summary.total_euler_characteristic,
        }

    def search_result_to_dict(self, result: SearchResult) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "decision": result.decision.value,
            "detail": result.detail,
            "nodes": result.nodes,
            "elapsed": round(result.elapsed, 3),
        }
        if result.certificate is not None:
            data["certificate"] = self.certificate_to_dict(result.certificate)
        if result.assignment is not None:
            data["assignment"] = {name: str(w) for name, w in sorted(result.assignment.items())}
        return data

    def dict_to_assignment(self, data: Dict[str, Any], alphabet: Alphabet) -> Dict[str, Word]:
        return {name: parse_word(str(w), alphabet) for name, w in data.items()}

    # -- bin packing -------------------------------------------------------

    def instance_to_dict(self, inst: BinPackingInstance) -> Dict[str, Any]:
        return {"items": list(inst.items), "B": inst.capacity, "N": inst.bins, "exact": inst.exact}

    def dict_to_instance(self, data: Dict[str, Any]) -> BinPackingInstance:
        doc = _validated(InstanceDoc, data)
        return BinPackingInstance(tuple(doc.items), doc.B, doc.N, doc.exact)

    def partition_to_dict(self, part: Partition) -> Dict[str, Any]:
        return {"blocks": [list(block) for block in part.blocks]}

    def dict_to_partition(self, data: Dict[str, Any]) -> Partition:
        doc = _validated(PartitionDoc, data)
        return Partition(tuple(tuple(block) for block in doc.blocks))

    # -- files -------------------------------------------------------------

    def read_text(self, path: PathLike) -> str:
        if str(path) == "-":
            return sys.stdin.read()
        try:
            return Path(path).read_text()
        except OSError as exc:
            raise LoaderError(f"cannot read {path}: {exc}") from exc

    def read_document(self, path: PathLike) -> Any:
        """Parse a JSON document, or YAML when the suffix says so or JSON fails."""
        text = self.read_text(path)
        suffix = Path(str(path)).suffix.lower()
        try:
            if suffix in (".yaml", ".yml"):
                return yaml.safe_load(text)
            try:
                return json.loads(text)
            except json.JSONDecodeError:
                return yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise LoaderError(f"cannot parse {path}: {exc}") from exc

    def write_document(self, data: Any, path: PathLike = "-") -> None:
        suffix = Path(str(path)).suffix.lower()
        if suffix in (".yaml", ".yml"):
            text = yaml.dump(data, default_flow_style=False, sort_keys=False)
        else:
            text = json.dumps(data, indent=2) + "\n"
        if str(path) == "-":
            sys.stdout.write(text)
            return
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise LoaderError(f"cannot write {path}: {exc}") from exc

    def load_equation(self, path: PathLike, alphabet: str = DEFAULT_ALPHABET) -> Equation:
        """An equation file is either a JSON/YAML document or a line of equation text."""
        text = self.read_text(path)
        stripped = text.strip()
        if stripped.startswith("{") or Path(str(path)).suffix.lower() in (".json", ".yaml", ".yml"):
            data = self._parse(stripped)
            if not isinstance(data, dict):
                raise LoaderError(f"{path} does not hold an equation document")
            data.setdefault("alphabet", alphabet)
            return self.dict_to_equation(data)
        return parse_equation(stripped, alphabet)

    def _parse(self, text: str) -> Any:
        try:
            return json.loads(text)
        except json.JSONDecodeError:
            try:
                return yaml.safe_load(text)
            except yaml.YAMLError as exc:
                raise LoaderError(f"cannot parse document: {exc}") from exc

    def load_certificate(self, path: PathLike) -> Certificate:
        return self.dict_to_certificate(self._expect_dict(self.read_document(path), path))

    def load_boundaries(self, path: PathLike) -> List[Tuple[Letter, ...]]:
        """Disc boundaries from a certificate or a bare ``{"boundaries": ...}`` document."""
        doc = _validated(BoundariesDoc, self._expect_dict(self.read_document(path), path))
        try:
            return [tuple(parse_token(t) for t in b) for b in doc.boundaries]
        except QuadfreeError as exc:
            raise LoaderError(f"{path}: {exc}") from exc

    def load_instance(self, path: PathLike) -> BinPackingInstance:
        return self.dict_to_instance(self._expect_dict(self.read_document(path), path))

    def load_partition(self, path: PathLike) -> Partition:
        return self.dict_to_partition(self._expect_dict(self.read_document(path), path))

    def _expect_dict(self, data: Any, path: PathLike) -> Dict[str, Any]:
        if not isinstance(data, dict):
            raise LoaderError(f"{path} does not hold a document object")
        return data


def load_budget(path: Optional[PathLike], **overrides: Any) -> SearchBudget:
    """Read a budget file (keys as in BudgetDoc); non-None overrides win."""
    data: Dict[str, Any] = {}
    if path is not None:
        loaded = DocumentLoader().read_document(path) or {}
        if not isinstance(loaded, dict):
            raise LoaderError(f"{path} does not hold a budget document")
        data.update(loaded)
    data.update({k: v for k, v in overrides.items() if v is not None})
    doc = _validated(BudgetDoc, data)
    return SearchBudget(doc.max_n, doc.timeout, doc.max_candidates, doc.workers, doc.minimize)
