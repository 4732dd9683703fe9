"""
Discs tiled by [a, b^n]-discs, ribbons, a-tracks and the witness translations
between exact packings and certificates.

Conventions: [x, y] = x^-1 y^-1 x y, so an [a, b^n]-disc read clockwise from
its bottom-left corner is a^-1 b^-n a b^n. Drawn in the plane, a-edges point
down and b-edges point left; a ribbon is a row of such discs glued along
a-edges and a stack of ribbons fills a rectangle whose boundary reads
[a^N, b^B].
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import permutations
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx

from ..core.errors import QuadfreeError
from ..core.surfaces import build_complex, consolidate_with_images, label_key, summarize
from ..core.validators import Certificate, verify
from ..core.words import Letter, Word, commutator, power
from .binpack import BinPackingInstance, InvalidPartitionError, Partition, to_equation, validate_partition

logger = logging.getLogger(__name__)


class InvalidTilingError(QuadfreeError):
    """Raised when a tiled disc is malformed or cannot be peeled into ribbons."""
    pass


def _flip(boundary: Sequence[Letter]) -> Tuple[Letter, ...]:
    return tuple((label, -sign) for label, sign in reversed(boundary))


def _letters_of(boundary: Sequence[Letter], letters: Mapping[str, str]) -> Tuple[Letter, ...]:
    return tuple((letters[label], sign) for label, sign in boundary)


def _is_rotation(word: Sequence[Letter], target: Sequence[Letter]) -> bool:
    if len(word) != len(target):
        return False
    word = tuple(word)
    return any(word[k:] + word[:k] == tuple(target) for k in range(max(1, len(word))))


@dataclass(frozen=True)
class TiledDisc:
    """
    A disc tiled by [a, b^n]-discs.

    ``faces`` are edge-label boundaries read clockwise, ``letters`` gives the
    generator each edge carries in its positive direction and ``outer`` is the
    boundary of the whole disc read clockwise. Interior edges occur in two
    faces with opposite signs; boundary edges occur in one face and in
    ``outer`` with the same sign.
    """
    faces: Tuple[Tuple[Letter, ...], ...]
    letters: Mapping[str, str]
    outer: Tuple[Letter, ...]
    params: Tuple[int, ...]
    items: Tuple[Optional[int], ...] = ()

    def __post_init__(self) -> None:
        if len(self.params) != len(self.faces):
            raise InvalidTilingError("one parameter n per face is required")
        if self.items and len(self.items) != len(self.faces):
            raise InvalidTilingError("item indices must be given for every face or none")
        for number, (face, n) in enumerate(zip(self.faces, self.params)):
            expected = commutator(Word((("a", 1),), True), power(Word((("b", 1),), True), n)).letters
            if not _is_rotation(_letters_of(face, self.letters), expected):
                raise InvalidTilingError(f"face {number} does not read a rotation of [a,b^{n}]")

        seen: Dict[str, List[int]] = {}
        for face in self.faces:
            for label, sign in face:
                seen.setdefault(label, []).append(sign)
        on_outer = dict(self.outer)
        for label, signs in seen.items():
            if len(signs) == 2 and sorted(signs) == [-1, 1] and label not in on_outer:
                continue
            if len(signs) == 1 and on_outer.get(label) == signs[0]:
                continue
            raise InvalidTilingError(f"edge {label} is not glued coherently")
        for label in on_outer:
            if label not in seen:
                raise InvalidTilingError(f"boundary edge {label} belongs to no face")

    def boundary_word(self) -> Word:
        return Word.of(_letters_of(self.outer, self.letters))

    def face_word(self, face: int) -> Word:
        return Word.of(_letters_of(self.faces[face], self.letters))

    def item_of(self, face: int) -> Optional[int]:
        return self.items[face] if self.items else None


@dataclass(frozen=True)
class Ribbon:
    """A row of [a, b^n_j]-discs glued along their a-edges, listed left to right."""
    params: Tuple[int, ...]
    items: Tuple[Optional[int], ...] = ()

    def __post_init__(self) -> None:
        if not self.params or any(n < 1 for n in self.params):
            raise InvalidTilingError(f"ribbon parameters must be positive, got {list(self.params)}")

    @property
    def width(self) -> int:
        return sum(self.params)

    def boundary_word(self) -> Word:
        return commutator(Word((("a", 1),), True), power(Word((("b", 1),), True), self.width))

    def top(self) -> Word:
        return power(Word((("b", 1),), True), -self.width)

    def bottom(self) -> Word:
        return power(Word((("b", 1),), True), self.width)

    def tiled_disc(self) -> TiledDisc:
        return stack_ribbons([self])


@dataclass(frozen=True)
class ATrack:
    """A component of the a-pattern: a-edges in track order and the faces crossed."""
    edges: Tuple[str, ...]
    faces: Tuple[int, ...] = field(default=())
    circular: bool = False


def build_ribbon(params: Sequence[int], items: Sequence[Optional[int]] = ()) -> Ribbon:
    return Ribbon(tuple(params), tuple(items))


def _h(x: int, y: int) -> str:
    return f"h{x}_{y}"


def _v(x: int, y: int) -> str:
    return f"v{x}_{y}"


def stack_ribbons(rows: Sequence[Union[Ribbon, Sequence[int]]]) -> TiledDisc:
    """
    Glue ribbons of equal width B, listed top to bottom, into a disc reading
    [a^N, b^B].

    Vertices are lattice points (x, y) with y = 0 at the bottom; h{x}_{y}
    runs from (x+1, y) to (x, y) and v{x}_{y} from (x, y+1) to (x, y).
    """
    ribbons = [r if isinstance(r, Ribbon) else build_ribbon(r) for r in rows]
    if not ribbons:
        raise InvalidTilingError("a stack needs at least one ribbon")
    widths = {r.width for r in ribbons}
    if len(widths) != 1:
        raise InvalidTilingError(f"ribbons of a stack must share one width, got {sorted(widths)}")
    width, height = widths.pop(), len(ribbons)

    faces: List[Tuple[Letter, ...]] = []
    params: List[int] = []
    items: List[Optional[int]] = []
    letters: Dict[str, str] = {}
    for index, ribbon in enumerate(ribbons):
        y = height - 1 - index
        x = 0
        for face_index, n in enumerate(ribbon.params):
            left, right = x, x + n
            boundary: List[Letter] = [(_v(left, y), -1)]
            boundary += [(_h(c, y + 1), -1) for c in range(left, right)]
            boundary.append((_v(right, y), 1))
            boundary += [(_h(c, y), 1) for c in reversed(range(left, right))]
            faces.append(tuple(boundary))
            params.append(n)
            items.append(ribbon.items[face_index] if ribbon.items else None)
            letters[_v(left, y)] = letters[_v(right, y)] = "a"
            for c in range(left, right):
                letters[_h(c, y)] = letters[_h(c, y + 1)] = "b"
            x = right

    outer: List[Letter] = [(_v(0, y), -1) for y in range(height)]
    outer += [(_h(c, height), -1) for c in range(width)]
    outer += [(_v(width, y), 1) for y in reversed(range(height))]
    outer += [(_h(c, 0), 1) for c in reversed(range(width))]
    keep_items = tuple(items) if any(i is not None for i in items) else ()
    return TiledDisc(tuple(faces), letters, tuple(outer), tuple(params), keep_items)


def a_pattern_graph(td: TiledDisc) -> nx.MultiGraph:
    """One node per a-edge, one edge per face joining its two a-edges."""
    graph = nx.MultiGraph()
    for label, symbol in td.letters.items():
        if symbol == "a":
            graph.add_node(label)
    for number, face in enumerate(td.faces):
        ends = [label for label, _ in face if td.letters[label] == "a"]
        graph.add_edge(ends[0], ends[1], face=number)
    return graph


def _tracks_from_graph(graph: nx.Graph) -> List[ATrack]:
    tracks = []
    for nodes in sorted(nx.connected_components(graph), key=lambda c: min(map(str, c))):
        sub = graph.subgraph(nodes)
        circular = sub.number_of_edges() >= sub.number_of_nodes()
        ends = [v for v in nodes if sub.degree(v) <= 1]
        start = min(ends or nodes, key=lambda v: label_key(str(v)))
        order = list(nx.dfs_preorder_nodes(sub, source=start))
        crossed: List[int] = []
        for u, v in zip(order, order[1:]):
            data = sub.get_edge_data(u, v) or {}
            for attrs in (data.values() if sub.is_multigraph() else [data]):
                if "face" in attrs:
                    crossed.append(attrs["face"])
                    break
        tracks.append(ATrack(tuple(str(v) for v in order), tuple(crossed), circular))
    return tracks


def a_pattern(td: TiledDisc) -> List[ATrack]:
    """The a-tracks of a tiled disc."""
    return _tracks_from_graph(a_pattern_graph(td))


def find_circular_tracks(tracks: Union[nx.Graph, Sequence[ATrack]]) -> List[ATrack]:
    """Circular a-tracks; a finite tiled disc has none, so anything found means corrupt input."""
    if isinstance(tracks, nx.Graph):
        tracks = _tracks_from_graph(tracks)
    circular = [t for t in tracks if t.circular]
    if circular:
        logger.warning("found %d circular a-track(s)", len(circular))
    return circular


@dataclass
class _Face:
    left: str
    top: List[str]
    right: str
    bottom: List[str]


def _face_sides(face: Sequence[Letter], letters: Mapping[str, str]) -> _Face:
    """Split a face reading a^-1 b^-n a b^n into its four sides."""
    start = next(k for k, (label, sign) in enumerate(face) if letters[label] == "a" and sign < 0)
    rotated = list(face[start:]) + list(face[:start])
    n = (len(rotated) - 2) // 2
    return _Face(
        left=rotated[0][0],
        top=[label for label, _ in rotated[1:1 + n]],
        right=rotated[1 + n][0],
        bottom=[label for label, _ in reversed(rotated[2 + n:])],
    )


def _split_outer(td: TiledDisc) -> Tuple[List[str], List[str], List[str], List[str], int]:
    """Rotate the outer boundary to a^-N b^-B a^N b^B; sides in reading order."""
    word = _letters_of(td.outer, td.letters)
    size = len(word)
    for k in range(size):
        rotated = word[k:] + word[:k]
        n_left = 0
        while n_left < size and rotated[n_left] == ("a", -1):
            n_left += 1
        n_top = 0
        while n_left + n_top < size and rotated[n_left + n_top] == ("b", -1):
            n_top += 1
        expected = [("a", -1)] * n_left + [("b", -1)] * n_top + [("a", 1)] * n_left + [("b", 1)] * n_top
        if n_left and n_top and list(rotated) == expected:
            labels = [label for label, _ in td.outer[k:] + td.outer[:k]]
            return (labels[:n_left], labels[n_left:n_left + n_top],
                    labels[n_left + n_top:2 * n_left + n_top], labels[2 * n_left + n_top:], n_top)
    raise InvalidTilingError(f"boundary {td.boundary_word()} is not of the form [a^N, b^B]")


def peel_decomposition(td: TiledDisc) -> List[Ribbon]:
    """
    Cut a disc reading [a^N, b^B] into N ribbons of width B, top to bottom.

    Each round traces the a-track starting at the left edge next to the
    top-left corner, checks that the faces it crosses form a ribbon whose top
    is the current top side, and removes that ribbon.
    """
    left, top, right, bottom, width = _split_outer(td)
    sides = [_face_sides(face, td.letters) for face in td.faces]
    left_of: Dict[str, int] = {}
    for number, face in enumerate(sides):
        if face.left in left_of:
            raise InvalidTilingError(f"a-edge {face.left} is the left side of two faces")
        left_of[face.left] = number

    remaining = set(range(len(td.faces)))
    ribbons: List[Ribbon] = []
    while left:
        edge = left.pop()
        expected_end = right.pop(0)
        row: List[int] = []
        while True:
            face = left_of.get(edge)
            if face is None or face not in remaining:
                raise InvalidTilingError(f"a-track leaves the disc at edge {edge}")
            if face in row:
                raise InvalidTilingError(f"a-track revisits face {face}")
            row.append(face)
            edge = sides[face].right
            if edge == expected_end:
                break
            if edge not in left_of:
                raise InvalidTilingError(f"a-track from the top-left corner ends at {edge}, not {expected_end}")

        row_top = [label for face in row for label in sides[face].top]
        if row_top != top:
            raise InvalidTilingError("faces crossed by the a-track do not form a ribbon under the top side")
        remaining.difference_update(row)
        top = [label for face in row for label in sides[face].bottom]
        ribbons.append(Ribbon(tuple(td.params[f] for f in row), tuple(td.item_of(f) for f in row)))
        logger.debug("peel: ribbon %s", ribbons[-1].params)

    if remaining:
        raise InvalidTilingError(f"faces {sorted(remaining)} are left after peeling {len(ribbons)} ribbons")
    if top != list(reversed(bottom)):
        raise InvalidTilingError("the last ribbon's bottom is not the bottom side of the disc")
    if any(r.width != width for r in ribbons):
        raise InvalidTilingError("peeled ribbons differ in width")
    return ribbons


def sphere_from_stack(td: TiledDisc) -> Tuple[List[Tuple[Letter, ...]], Dict[str, Word]]:
    """Close a tiled disc with the disc reading its boundary backwards; faces first, closing disc last."""
    boundaries = list(td.faces) + [_flip(td.outer)]
    images = {label: Word(((symbol, 1),), True) for label, symbol in td.letters.items()}
    return boundaries, images


def packing_to_certificate(inst: BinPackingInstance, part: Partition) -> Certificate:
    """Stack one ribbon per block, close the sphere with the d-disc and consolidate."""
    ok, errors = validate_partition(inst, part)
    if not ok or not inst.exact:
        raise InvalidPartitionError("; ".join(errors) or "the instance is not exact")

    rows = [build_ribbon([inst.items[j - 1] for j in block], list(block)) for block in part.blocks]
    td = stack_ribbons(rows)
    boundaries, images = sphere_from_stack(td)
    by_item = {td.items[f]: boundaries[f] for f in range(len(td.faces))}
    ordered = [by_item[j] for j in range(1, inst.k + 1)] + [boundaries[-1]]

    cx, merged = consolidate_with_images(build_complex(ordered), images)
    cert = Certificate.renumbered(cx.boundaries(), merged)
    verdict = verify(to_equation(inst), cert)
    if not verdict.accepted:
        raise InvalidTilingError(f"constructed certificate was rejected: {verdict.detail}")
    logger.debug("packing_to_certificate: n = %d", cert.n)
    return cert


def letter_level(cert: Certificate) -> Tuple[List[Tuple[Letter, ...]], Dict[str, str]]:
    """
    Subdivide every edge into one edge per letter of its image.

    Edges are oriented along their generator, so an image letter b^-1 turns
    into a b-edge traversed backwards.
    """
    letters: Dict[str, str] = {}
    boundaries: List[Tuple[Letter, ...]] = []
    for boundary in cert.boundaries:
        refined: List[Letter] = []
        for label, sign in boundary:
            image = cert.images[label].letters
            pieces = [(f"{label}_{t}", e) for t, (symbol, e) in enumerate(image, start=1)]
            for t, (symbol, _) in enumerate(image, start=1):
                letters[f"{label}_{t}"] = symbol
            refined.extend(pieces if sign > 0 else [(p, -e) for p, e in reversed(pieces)])
        boundaries.append(tuple(refined))
    return boundaries, letters


def certificate_to_packing(inst: BinPackingInstance, cert: Certificate) -> Partition:
    """Remove the d-disc from the sphere, peel the remaining disc and read off the blocks."""
    sf = to_equation(inst)
    verdict = verify(sf, cert)
    if not verdict.accepted:
        raise InvalidTilingError(f"certificate is not accepted: {verdict.detail}")

    boundaries, letters = letter_level(cert)
    surfaces = summarize(build_complex(boundaries))
    if surfaces.component_count != 1 or surfaces.classify() != ["sphere"]:
        raise InvalidTilingError(f"certificate glues into {surfaces.classify()}, not a single sphere")

    td = TiledDisc(
        faces=tuple(boundaries[:-1]),
        letters=letters,
        outer=_flip(boundaries[-1]),
        params=inst.items,
        items=tuple(range(1, inst.k + 1)),
    )
    ribbons = peel_decomposition(td)
    part = Partition.canonical([[j for j in r.items if j is not None] for r in ribbons])
    ok, errors = validate_partition(inst, part)
    if not ok:
        raise InvalidTilingError("; ".join(errors))
    return part


def closes_without_d_disc(params: Sequence[int]) -> bool:
    """
    True iff some coherent letter pairing of the [a, b^n_j]-discs alone glues
    a sphere component. Every pairing of a with A and b with B is tried.
    """
    a, b = Word((("a", 1),), True), Word((("b", 1),), True)
    words = [commutator(a, power(b, n)).letters for n in params]
    slots: Dict[Letter, List[Tuple[int, int]]] = {}
    for disc, word in enumerate(words):
        for position, letter in enumerate(word):
            slots.setdefault(letter, []).append((disc, position))

    def matchings(symbol: str):
        plus, minus = slots.get((symbol, 1), []), slots.get((symbol, -1), [])
        for perm in permutations(minus):
            yield list(zip(plus, perm))

    for a_pairs in matchings("a"):
        for b_pairs in matchings("b"):
            boundaries = [[("", 0)] * len(w) for w in words]
            for number, ((i, k), (j, l)) in enumerate(a_pairs + b_pairs, start=1):
                boundaries[i][k] = (f"p{number}", 1)
                boundaries[j][l] = (f"p{number}", -1)
            summary = summarize(build_complex(boundaries))
            if "sphere" in summary.classify():
                return True
    return False
