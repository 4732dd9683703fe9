"""
Combinatorial surfaces glued from labelled discs.

Each disc has a boundary read clockwise as a sequence of (label, exponent).
Every label occurs exactly twice across all discs; gluing the two occurrences
head-to-head and tail-to-tail yields a closed surface per connected component.
Euler characteristics are computed by combinatorial Gauss-Bonnet in exact
rational arithmetic and cross-checked against V - E + F.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from .errors import QuadfreeError
from .words import Letter, Word, invert

logger = logging.getLogger(__name__)

Corner = Tuple[int, int]          # (disc index, vertex position)
Occurrence = Tuple[int, int]      # (disc index, boundary position)


class ComplexError(QuadfreeError):
    """Raised when boundaries cannot be glued (label multiplicity)."""
    pass


class GaussBonnetError(QuadfreeError):
    """Raised when the curvature total is not an integer multiple of 2 pi."""
    pass


def label_key(label: str) -> Tuple:
    """Natural order: p2 < p10."""
    return tuple(int(part) if part.isdigit() else part for part in re.split(r"(\d+)", label))


@dataclass(frozen=True)
class Disc:
    """A polygon whose boundary is read clockwise."""
    index: int
    boundary: Tuple[Letter, ...]

    def __post_init__(self) -> None:
        if not self.boundary:
            raise ComplexError(f"disc {self.index} has an empty boundary")

    @property
    def sides(self) -> int:
        return len(self.boundary)


class _UnionFind:
    def __init__(self) -> None:
        self.parent: Dict[Corner, Corner] = {}

    def add(self, item: Corner) -> None:
        self.parent.setdefault(item, item)

    def find(self, item: Corner) -> Corner:
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a: Corner, b: Corner) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass(frozen=True)
class GluedComplex:
    """Discs, their edge pairs and the derived vertex classes and components."""
    discs: Tuple[Disc, ...]
    edge_pairs: Mapping[str, Tuple[Occurrence, Occurrence]]
    vertex_classes: Tuple[FrozenSet[Corner], ...]
    components: Tuple[FrozenSet[int], ...]
    graph: nx.MultiGraph = field(compare=False, repr=False)

    def boundaries(self) -> List[Tuple[Letter, ...]]:
        return [disc.boundary for disc in self.discs]

    def labels(self, component: Optional[int] = None) -> List[str]:
        labels = sorted(self.edge_pairs, key=label_key)
        if component is None:
            return labels
        discs = self.components[component]
        return [p for p in labels if self.edge_pairs[p][0][0] in discs]

    def vertex_classes_of(self, component: int) -> List[FrozenSet[Corner]]:
        discs = self.components[component]
        return [vc for vc in self.vertex_classes if next(iter(vc))[0] in discs]

    def component_of(self, disc_index: int) -> int:
        for number, discs in enumerate(self.components):
            if disc_index in discs:
                return number
        raise ComplexError(f"no disc with index {disc_index}")


def _edge_ends(disc: Disc, position: int) -> Tuple[Corner, Corner]:
    """(tail, head) corners of the occurrence at ``position``."""
    here = (disc.index, position)
    there = (disc.index, (position + 1) % disc.sides)
    return (here, there) if disc.boundary[position][1] > 0 else (there, here)


def build_complex(boundaries: Sequence[Sequence[Letter]]) -> GluedComplex:
    """Glue discs by equal labels, respecting edge directions."""
    discs = tuple(Disc(i, tuple(b)) for i, b in enumerate(boundaries))

    occurrences: Dict[str, List[Occurrence]] = {}
    for disc in discs:
        for position, (label, sign) in enumerate(disc.boundary):
            if sign not in (1, -1):
                raise ComplexError(f"label {label!r} on disc {disc.index} has exponent {sign}")
            occurrences.setdefault(label, []).append((disc.index, position))
    wrong = {p: len(occ) for p, occ in occurrences.items() if len(occ) != 2}
    if wrong:
        details = ", ".join(f"{p} occurs {n} time(s)" for p, n in sorted(wrong.items()))
        raise ComplexError(f"every label must occur exactly twice: {details}")
    edge_pairs = {p: (occ[0], occ[1]) for p, occ in occurrences.items()}

    uf = _UnionFind()
    for disc in discs:
        for position in range(disc.sides):
            uf.add((disc.index, position))
    for label in sorted(edge_pairs, key=label_key):
        (i, k), (j, l) = edge_pairs[label]
        tail1, head1 = _edge_ends(discs[i], k)
        tail2, head2 = _edge_ends(discs[j], l)
        uf.union(tail1, tail2)
        uf.union(head1, head2)

    classes: Dict[Corner, List[Corner]] = {}
    for corner in uf.parent:
        classes.setdefault(uf.find(corner), []).append(corner)
    vertex_classes = tuple(frozenset(v) for _, v in sorted(classes.items()))

    # Disc graph: one node per disc, one edge per label, added in label order
    graph = nx.MultiGraph()
    graph.add_nodes_from(range(len(discs)))
    for rank, label in enumerate(sorted(edge_pairs, key=label_key)):
        (i, _), (j, _) = edge_pairs[label]
        graph.add_edge(i, j, key=label, weight=rank)
    components = tuple(sorted((frozenset(c) for c in nx.connected_components(graph)), key=min))

    return GluedComplex(discs, edge_pairs, vertex_classes, components, graph)


@dataclass(frozen=True)
class AngleAssignment:
    """Corner angles as exact multiples of pi."""
    angles: Mapping[Corner, Fraction]

    def face_curvature(self, disc: Disc) -> Fraction:
        total = sum((self.angles[(disc.index, k)] for k in range(disc.sides)), Fraction(0))
        return total - (disc.sides - 2)

    def vertex_curvature(self, vertex_class: FrozenSet[Corner]) -> Fraction:
        return 2 - sum((self.angles[c] for c in vertex_class), Fraction(0))


def angle_assignment(cx: GluedComplex) -> AngleAssignment:
    """Every corner of an N-gon gets (N - 2)/N, so all face curvatures vanish."""
    angles: Dict[Corner, Fraction] = {}
    for disc in cx.discs:
        angle = Fraction(disc.sides - 2, disc.sides)
        for k in range(disc.sides):
            angles[(disc.index, k)] = angle
    return AngleAssignment(angles)


def euler_characteristic_gb(cx: GluedComplex, component: int) -> int:
    """chi = (sum of face curvatures + sum of vertex curvatures) / 2 pi."""
    angles = angle_assignment(cx)
    faces = sum((angles.face_curvature(cx.discs[i]) for i in cx.components[component]), Fraction(0))
    if faces != 0:
        raise GaussBonnetError(f"nonzero face curvature {faces} pi in component {component}")
    vertices = sum((angles.vertex_curvature(v) for v in cx.vertex_classes_of(component)), Fraction(0))
    chi = (faces + vertices) / 2
    if chi.denominator != 1:
        raise GaussBonnetError(f"curvature total {faces + vertices} pi is not a multiple of 2 pi")
    return int(chi)


def euler_characteristic_vef(cx: GluedComplex, component: int) -> int:
    v = len(cx.vertex_classes_of(component))
    e = len(cx.labels(component))
    f = len(cx.components[component])
    return v - e + f


@dataclass(frozen=True)
class Orientability:
    """Either a sign per disc, or the label whose gluing breaks parity."""
    orientable: bool
    signs: Mapping[int, int]
    violating_label: Optional[str] = None


def orientability(cx: GluedComplex, component: int) -> Orientability:
    """
    Parity propagation over a spanning tree of the disc graph.

    Discs i, j glued along a label with exponents e, e' need s_i * e = -s_j * e'.
    """
    discs = cx.components[component]
    sub = cx.graph.subgraph(discs)
    root = min(discs)
    signs: Dict[int, int] = {root: 1}
    tree_labels = set()
    # edge weights are label ranks, so Kruskal takes labels in ascending order
    for i, j, label in nx.minimum_spanning_edges(sub, algorithm="kruskal", keys=True, data=False):
        tree_labels.add(label)
    tree = nx.Graph()
    tree.add_nodes_from(discs)
    for label in tree_labels:
        (i, _), (j, _) = cx.edge_pairs[label]
        tree.add_edge(i, j, label=label)
    for parent, child in nx.bfs_edges(tree, root):
        label = tree.edges[parent, child]["label"]
        (i, k), (j, l) = cx.edge_pairs[label]
        e_parent = cx.discs[i].boundary[k][1] if i == parent else cx.discs[j].boundary[l][1]
        e_child = cx.discs[j].boundary[l][1] if i == parent else cx.discs[i].boundary[k][1]
        signs[child] = -signs[parent] * e_parent * e_child

    for label in cx.labels(component):
        (i, k), (j, l) = cx.edge_pairs[label]
        e1, e2 = cx.discs[i].boundary[k][1], cx.discs[j].boundary[l][1]
        if signs[i] * e1 != -signs[j] * e2:
            return Orientability(False, signs, label)
    return Orientability(True, signs)


def tree_boundary_orientable(cx: GluedComplex, component: int) -> bool:
    """
    Tree-of-discs criterion, kept as an oracle for ``orientability``.

    The discs of a spanning tree are glued in the plane (flipping a disc when
    needed) into one disc; the component is orientable iff every label on the
    resulting boundary occurs with both exponents.
    """
    discs = cx.components[component]
    root = min(discs)
    sub = cx.graph.subgraph(discs)
    tree = nx.Graph()
    tree.add_nodes_from(discs)
    for i, j, label in nx.minimum_spanning_edges(sub, algorithm="kruskal", keys=True, data=False):
        tree.add_edge(i, j, label=label)

    boundary: List[Letter] = list(cx.discs[root].boundary)
    for parent, child in nx.bfs_edges(tree, root):
        label = tree.edges[parent, child]["label"]
        child_word = list(cx.discs[child].boundary)
        at = next(n for n, (p, _) in enumerate(boundary) if p == label)
        sign = boundary[at][1]
        positions = [n for n, (p, _) in enumerate(child_word) if p == label]
        # self-glued discs never carry tree labels, so the label occurs once here
        if child_word[positions[0]][1] == sign:
            child_word = list(invert(Word(tuple(child_word))).letters)
            positions = [n for n, (p, _) in enumerate(child_word) if p == label]
        c = positions[0]
        y = boundary[at + 1:] + boundary[:at]
        z = child_word[c + 1:] + child_word[:c]
        boundary = y + z

    seen: Dict[str, set] = {}
    for p, e in boundary:
        seen.setdefault(p, set()).add(e)
    return all(len(exps) == 2 for exps in seen.values())


def coherent_clockwise(cx: GluedComplex) -> bool:
    """True iff every label occurs once with +1 and once with -1."""
    for (i, k), (j, l) in cx.edge_pairs.values():
        if cx.discs[i].boundary[k][1] == cx.discs[j].boundary[l][1]:
            return False
    return True


@dataclass(frozen=True)
class ComponentSummary:
    discs: Tuple[int, ...]
    euler_characteristic: int
    orientable: bool
    vertices: int
    edges: int

    @property
    def disc_count(self) -> int:
        return len(self.discs)

    def classify(self) -> str:
        chi = self.euler_characteristic
        if self.orientable:
            handles = (2 - chi) // 2
            if handles == 0:
                return "sphere"
            return "torus" if handles == 1 else f"connected sum of {handles} tori"
        crosscaps = 2 - chi
        if crosscaps == 1:
            return "projective plane"
        if crosscaps == 2:
            return "Klein bottle"
        return f"connected sum of {crosscaps} projective planes"


@dataclass(frozen=True)
class SurfaceSummary:
    components: Tuple[ComponentSummary, ...]

    @property
    def component_count(self) -> int:
        return len(self.components)

    @property
    def total_euler_characteristic(self) -> int:
        return sum(c.euler_characteristic for c in self.components)

    def classify(self) -> List[str]:
        return [c.classify() for c in self.components]


def summarize(cx: GluedComplex) -> SurfaceSummary:
    """Classify every component, insisting that both chi computations agree."""
    components = []
    for number, discs in enumerate(cx.components):
        chi = euler_characteristic_gb(cx, number)
        oracle = euler_characteristic_vef(cx, number)
        if chi != oracle:
            raise GaussBonnetError(f"Gauss-Bonnet gives {chi} but V - E + F gives {oracle}")
        components.append(ComponentSummary(
            discs=tuple(sorted(discs)),
            euler_characteristic=chi,
            orientable=orientability(cx, number).orientable,
            vertices=len(cx.vertex_classes_of(number)),
            edges=len(cx.labels(number)),
        ))
    return SurfaceSummary(tuple(components))


def subdivide(cx: GluedComplex, lengths: Mapping[str, int]) -> GluedComplex:
    """Refine label p into ``lengths[p]`` unit edges p_1 .. p_L (default 1)."""
    boundaries: List[List[Letter]] = []
    for disc in cx.discs:
        refined: List[Letter] = []
        for label, sign in disc.boundary:
            count = lengths.get(label, 1)
            if count < 1:
                raise ComplexError(f"label {label!r} cannot be split into {count} pieces")
            pieces = [(f"{label}_{t}", 1) for t in range(1, count + 1)] if count > 1 else [(label, 1)]
            refined.extend(pieces if sign > 0 else [(p, -1) for p, _ in reversed(pieces)])
        boundaries.append(refined)
    return build_complex(boundaries)


def _corner_pair(disc: Disc, k: int) -> Tuple[int, int]:
    """Boundary positions of the two occurrences meeting at corner k."""
    return ((k - 1) % disc.sides, k)


def _splice(boundary: List[Letter], start: int, replacement: Letter) -> List[Letter]:
    """Replace positions start, start+1 (cyclically) by one letter, rotating to start."""
    rotated = boundary[start:] + boundary[:start]
    return [replacement] + rotated[2:]


def consolidate_with_images(
    cx: GluedComplex,
    images: Optional[Mapping[str, Word]] = None,
) -> Tuple[GluedComplex, Dict[str, Word]]:
    """
    Merge the two edges at every vertex of degree 2 into one edge.

    The merged edge keeps the first label's name; when ``images`` are given the
    merged image is the concatenation read along that edge.
    """
    images = dict(images or {})
    current = cx
    while True:
        merged = False
        for vertex_class in current.vertex_classes:
            if len(vertex_class) != 2:
                continue
            (i, k), (j, l) = sorted(vertex_class)
            di, dj = current.discs[i], current.discs[j]
            if di.sides < 2 or dj.sides < 2:
                continue
            pi, pj = _corner_pair(di, k), _corner_pair(dj, l)
            if i == j and set(pi) & set(pj):
                continue
            first, second = di.boundary[pi[0]], di.boundary[pi[1]]
            if first[0] == second[0]:
                continue
            other = [dj.boundary[pj[0]], dj.boundary[pj[1]]]
            if other == [first, second]:
                sign_j = 1
            elif other == [(second[0], -second[1]), (first[0], -first[1])]:
                sign_j = -1
            else:
                continue

            name = first[0]
            if images:
                part1 = images[first[0]] if first[1] > 0 else invert(images[first[0]])
                part2 = images[second[0]] if second[1] > 0 else invert(images[second[0]])
                images.pop(second[0], None)
                images[name] = Word.of(part1.letters + part2.letters)

            boundaries = [list(b) for b in current.boundaries()]
            if i != j:
                boundaries[i] = _splice(boundaries[i], pi[0], (name, 1))
                boundaries[j] = _splice(boundaries[j], pj[0], (name, sign_j))
            else:
                rotated = boundaries[i][pi[0]:] + boundaries[i][:pi[0]]
                at = (pj[0] - pi[0]) % di.sides
                boundaries[i] = [(name, 1)] + rotated[2:at] + [(name, sign_j)] + rotated[at + 2:]
            logger.debug("consolidate: merged %s and %s at a degree-2 vertex", first[0], second[0])
            current = build_complex(boundaries)
            merged = True
            break
        if not merged:
            return current, images


def consolidate(cx: GluedComplex) -> GluedComplex:
    return consolidate_with_images(cx)[0]


def complex_to_dict(cx: GluedComplex) -> Dict:
    """Debug dump: discs as token lists plus per-component chi and orientability."""
    summary = summarize(cx)
    return {
        "discs": [[p if e > 0 else f"{p}^-1" for p, e in disc.boundary] for disc in cx.discs],
        "components": [list(c.discs) for c in summary.components],
        "chi": [c.euler_characteristic for c in summary.components],
        "orientable": [c.orientable for c in summary.components],
    }
