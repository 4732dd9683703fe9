"""
Certificates of solvability and their verifier.

A certificate names variables p1..pn, gives each a nonempty image word over
the constants, and writes one disc boundary per coefficient as a word in the
p's. It is accepted when the boundaries read the coefficients without
cancellation and glue into surfaces that are large enough for the equation.
"""

from collections import Counter
from enum import Enum
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .equations import StandardFormEquation, reduced_euler_characteristic
from .errors import QuadfreeError
from .surfaces import SurfaceSummary, build_complex, coherent_clockwise, label_key, summarize
from .words import CyclicWord, Letter, Word, cyclic_match, substitute


class CertificateError(QuadfreeError):
    """Raised when a certificate cannot be checked against the given equation."""
    pass


class Condition(str, Enum):
    """Which acceptance condition a rejected certificate fails."""
    MULTIPLICITY = "ii"
    SURFACES = "iii"
    READING = "iv"
    ORIENTATION = "v"
    BOUND_N = "bound-n"


@dataclass(frozen=True)
class Certificate:
    """Variables with images, and one boundary word per coefficient disc."""
    images: Mapping[str, Word]
    boundaries: Tuple[Tuple[Letter, ...], ...]

    @property
    def variables(self) -> List[str]:
        return sorted(self.images, key=label_key)

    @property
    def n(self) -> int:
        return len(self.images)

    def image_of(self, boundary: Sequence[Letter]) -> Tuple[Word, bool]:
        return substitute(self.images, boundary)

    @classmethod
    def renumbered(cls, boundaries: Sequence[Sequence[Letter]], images: Mapping[str, Word]) -> "Certificate":
        """Rename labels to p1..pn in order of first occurrence."""
        names: Dict[str, str] = {}
        for boundary in boundaries:
            for label, _ in boundary:
                if label not in names:
                    names[label] = f"p{len(names) + 1}"
        renamed = tuple(tuple((names[label], sign) for label, sign in b) for b in boundaries)
        return cls({names[label]: images[label] for label in names}, renamed)


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    failed_condition: Optional[Condition] = None
    detail: str = ""
    surfaces: Optional[SurfaceSummary] = None
    chi_total: Optional[int] = None
    reduced_euler_characteristic: Optional[int] = None
    loose_edge_bound: Optional[bool] = None

    def __post_init__(self) -> None:
        if self.accepted != (self.failed_condition is None):
            raise CertificateError("a verdict is accepted exactly when no condition failed")


def certificate_size(cert: Certificate) -> int:
    """Sum of boundary lengths, image lengths and the variable count."""
    return sum(len(b) for b in cert.boundaries) + sum(len(w) for w in cert.images.values()) + cert.n


def edge_bound(sf: StandardFormEquation) -> int:
    """
    Largest admissible n: 3 (m - reduced Euler characteristic) + m.

    A consolidated complex has E <= 3 (F - chi) + V2, where V2 counts the
    vertices of degree two; only monogons and pp-bigons leave such a vertex,
    at most one per disc.
    """
    return 3 * (sf.m - reduced_euler_characteristic(sf)) + sf.m


def validate_certificate(sf: StandardFormEquation, cert: Certificate) -> Tuple[bool, List[str]]:
    """
    Structural checks: disc count, label multiplicity, image presence.

    Returns (is_valid, list_of_errors).
    """
    errors = []

    if len(cert.boundaries) != sf.m:
        errors.append(f"certificate has {len(cert.boundaries)} discs, equation has m = {sf.m}")

    counts = Counter(label for boundary in cert.boundaries for label, _ in boundary)
    for label, count in sorted(counts.items()):
        if count != 2:
            errors.append(f"variable {label} occurs {count} time(s), expected 2")
        if label not in cert.images:
            errors.append(f"variable {label} has no image")
    for label, image in sorted(cert.images.items()):
        if label not in counts:
            errors.append(f"variable {label} does not occur in any boundary")
        if not image:
            errors.append(f"variable {label} has an empty image")
        for symbol, _ in image:
            if symbol not in sf.alphabet:
                errors.append(f"image of {label} uses {symbol!r} outside alphabet {sf.alphabet}")
                break
    for index, boundary in enumerate(cert.boundaries, start=1):
        if not boundary:
            errors.append(f"boundary C{index} is empty")
        for _, sign in boundary:
            if sign not in (1, -1):
                errors.append(f"boundary C{index} has an exponent {sign}")
                break

    return len(errors) == 0, errors


def _reject(condition: Condition, detail: str, **extra) -> Verdict:
    return Verdict(False, condition, detail, **extra)


def verify(sf: StandardFormEquation, cert: Certificate) -> Verdict:
    """
    Check a certificate against a standard-form equation with m >= 1.

    Conditions are checked in order: label multiplicity (ii), the edge bound,
    graphical reading of each coefficient (iv), orientation compatibility (v)
    and the surface inequality (iii).
    """
    if sf.m == 0:
        raise CertificateError("coefficient-free equations are solved without a certificate")
    chi_bar = reduced_euler_characteristic(sf)
    loose = cert.n < 3 * (2 * sf.genus + sf.m)

    ok, errors = validate_certificate(sf, cert)
    if not ok:
        return _reject(Condition.MULTIPLICITY, "; ".join(errors),
                       reduced_euler_characteristic=chi_bar, loose_edge_bound=loose)

    bound = edge_bound(sf)
    if cert.n > bound:
        return _reject(Condition.BOUND_N, f"n = {cert.n} exceeds 3(m - chi) + m = {bound}",
                       reduced_euler_characteristic=chi_bar, loose_edge_bound=loose)

    targets: List[CyclicWord] = list(sf.coefficients)
    assert sf.d is not None
    targets.append(sf.d)
    for index, (boundary, target) in enumerate(zip(cert.boundaries, targets), start=1):
        image, graphical = cert.image_of(boundary)
        name = "d" if index == sf.m else f"w{index}"
        if not graphical:
            return _reject(Condition.READING, f"C{index} reads {image} with a cancellation",
                           reduced_euler_characteristic=chi_bar, loose_edge_bound=loose)
        if cyclic_match(image, target) is None:
            return _reject(Condition.READING, f"C{index} reads {image}, not a rotation of {name} = {target}",
                           reduced_euler_characteristic=chi_bar, loose_edge_bound=loose)

    cx = build_complex(cert.boundaries)
    surfaces = summarize(cx)
    l = surfaces.component_count - 1
    chi_total = surfaces.total_euler_characteristic - 2 * l
    extra = dict(surfaces=surfaces, chi_total=chi_total,
                 reduced_euler_characteristic=chi_bar, loose_edge_bound=loose)

    all_orientable = all(c.orientable for c in surfaces.components)
    if sf.orientable:
        if not all_orientable:
            bad = next(i for i, c in enumerate(surfaces.components) if not c.orientable)
            return _reject(Condition.ORIENTATION, f"component {bad} is non-orientable", **extra)
        if not coherent_clockwise(cx):
            return _reject(Condition.ORIENTATION, "discs read clockwise are not coherently oriented", **extra)
        needed = chi_bar
    else:
        # one crosscap added to an orientable complex costs one unit of chi
        needed = chi_bar if not all_orientable else chi_bar + 1

    if chi_total < needed:
        return _reject(Condition.SURFACES, f"sum chi - 2l = {chi_total} < {needed}", **extra)

    return Verdict(True, None, f"sum chi - 2l = {chi_total} >= {needed}", **extra)
