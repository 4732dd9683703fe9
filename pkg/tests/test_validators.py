"""Tests for certificates and the verifier."""

import time
from collections import defaultdict

import networkx as nx
import pytest

from quadfree.core.equations import StandardFormEquation
from quadfree.core.validators import (
    Certificate,
    CertificateError,
    Condition,
    Verdict,
    certificate_size,
    edge_bound,
    validate_certificate,
    verify,
)
from quadfree.core.words import Alphabet, Word, cyclic_canon, parse_word
from quadfree.generators.binpack import BinPackingInstance, solve_exact, to_equation
from quadfree.generators.ribbons import packing_to_certificate

AB = Alphabet.from_string("ab")


class TestAccepted:
    def test_sphere(self, sphere_equation, sphere_certificate):
        verdict = verify(sphere_equation, sphere_certificate)
        assert verdict.accepted, verdict.detail
        assert verdict.failed_condition is None
        assert verdict.surfaces.classify() == ["sphere"]
        assert verdict.chi_total == 2
        assert verdict.reduced_euler_characteristic == 2
        assert verdict.loose_edge_bound

    def test_projective_plane(self, rp2_equation, rp2_certificate):
        verdict = verify(rp2_equation, rp2_certificate)
        assert verdict.accepted, verdict.detail
        assert verdict.surfaces.classify() == ["projective plane"]
        assert verdict.chi_total == 1

    def test_sizes(self, sphere_certificate, rp2_certificate):
        assert certificate_size(sphere_certificate) == 8
        assert certificate_size(rp2_certificate) == 4

    def test_rotated_reading_of_d(self, sphere_equation):
        # reads AB directly, which is the stored rotation of d
        cert = Certificate(
            {"p1": parse_word("a"), "p2": parse_word("b")},
            ((("p1", 1), ("p2", 1)), (("p1", -1), ("p2", -1))),
        )
        assert verify(sphere_equation, cert).accepted

    def test_sphere_serves_one_crosscap(self):
        # x1^2 . ab . BA is solved by x1 = z1 = 1; chi 2 meets chi-bar + 1 = 2
        sf = StandardFormEquation(AB, False, 1, (cyclic_canon("ab"),), cyclic_canon("BA"))
        cert = Certificate(
            {"p1": parse_word("a"), "p2": parse_word("b")},
            ((("p1", 1), ("p2", 1)), (("p2", -1), ("p1", -1))),
        )
        verdict = verify(sf, cert)
        assert verdict.accepted, verdict.detail
        assert verdict.chi_total == 2

    def test_two_monogons_for_a_square(self):
        # x1^2 z1^-1 a z1 a = 1 with x1 = a^-1
        sf = StandardFormEquation(AB, False, 1, (cyclic_canon("a"),), cyclic_canon("a"))
        cert = Certificate({"p1": parse_word("a")}, ((("p1", 1),), (("p1", 1),)))
        verdict = verify(sf, cert)
        assert verdict.accepted, verdict.detail
        assert verdict.surfaces.classify() == ["sphere"]

    def test_longer_images(self):
        sf = StandardFormEquation(AB, True, 0, (cyclic_canon("aab"),), cyclic_canon("BAA"))
        cert = Certificate({"p1": parse_word("aab")}, ((("p1", 1),), (("p1", -1),)))
        assert verify(sf, cert).accepted


class TestRejected:
    def test_wrong_reading(self, sphere_equation):
        cert = Certificate(
            {"p1": parse_word("a"), "p2": parse_word("b")},
            ((("p1", 1), ("p2", 1)), (("p2", -1), ("p1", 1))),
        )
        verdict = verify(sphere_equation, cert)
        assert not verdict.accepted
        assert verdict.failed_condition == Condition.READING
        assert "C2" in verdict.detail

    def test_cancellation_at_seam(self):
        sf = StandardFormEquation(AB, True, 0, (cyclic_canon("a"),), cyclic_canon("A"))
        cert = Certificate(
            {"p1": parse_word("ab"), "p2": parse_word("B")},
            ((("p1", 1), ("p2", 1)), (("p2", -1), ("p1", -1))),
        )
        verdict = verify(sf, cert)
        assert verdict.failed_condition == Condition.READING
        assert "cancellation" in verdict.detail

    def test_label_once(self, sphere_equation):
        cert = Certificate(
            {"p1": parse_word("a"), "p2": parse_word("b")},
            ((("p1", 1), ("p2", 1)), (("p2", -1),)),
        )
        assert verify(sphere_equation, cert).failed_condition == Condition.MULTIPLICITY

    def test_empty_image(self, sphere_equation):
        cert = Certificate(
            {"p1": parse_word(""), "p2": parse_word("ab")},
            ((("p1", 1), ("p2", 1)), (("p2", -1), ("p1", -1))),
        )
        verdict = verify(sphere_equation, cert)
        assert verdict.failed_condition == Condition.MULTIPLICITY
        assert "empty image" in verdict.detail

    def test_wrong_disc_count(self, sphere_equation):
        cert = Certificate({"p1": parse_word("ab")}, ((("p1", 1), ("p1", -1)),))
        assert verify(sphere_equation, cert).failed_condition == Condition.MULTIPLICITY

    def test_too_many_edges(self, rp2_equation):
        # edge bound is 3 (1 - 1) + 1 = 1
        cert = Certificate(
            {"p1": parse_word("A"), "p2": parse_word("A")},
            ((("p1", 1), ("p2", 1), ("p1", 1), ("p2", 1)),),
        )
        assert edge_bound(rp2_equation) == 1
        verdict = verify(rp2_equation, cert)
        assert verdict.failed_condition == Condition.BOUND_N

    def test_incoherent_orientable(self):
        # ab . ab = 1 read with both discs clockwise glues an incoherent sphere
        sf = StandardFormEquation(AB, True, 0, (cyclic_canon("ab"),), cyclic_canon("ab"))
        cert = Certificate(
            {"p1": parse_word("a"), "p2": parse_word("b")},
            ((("p1", 1), ("p2", 1)), (("p1", 1), ("p2", 1))),
        )
        assert verify(sf, cert).failed_condition == Condition.ORIENTATION

    def test_torus_too_small_for_two_crosscaps(self):
        # x1^2 x2^2 . abAB: chi-bar = 0 and an orientable complex needs chi >= 1
        sf = StandardFormEquation(AB, False, 2, (), cyclic_canon("abAB"))
        torus = Certificate(
            {"p1": parse_word("a"), "p2": parse_word("b")},
            ((("p1", 1), ("p2", 1), ("p1", -1), ("p2", -1)),),
        )
        verdict = verify(sf, torus)
        assert verdict.failed_condition == Condition.SURFACES
        assert verdict.chi_total == 0

    def test_bad_exponent_is_a_multiplicity_failure(self, sphere_equation):
        cert = Certificate(
            {"p1": parse_word("a"), "p2": parse_word("b")},
            ((("p1", 2), ("p2", 1)), (("p2", -1), ("p1", -1))),
        )
        verdict = verify(sphere_equation, cert)
        assert verdict.failed_condition == Condition.MULTIPLICITY
        assert "exponent 2" in verdict.detail

    def test_torus_needs_a_handle(self):
        torus = Certificate(
            {"p1": parse_word("a"), "p2": parse_word("b")},
            ((("p1", 1), ("p2", 1), ("p1", -1), ("p2", -1)),),
        )
        genus_one = StandardFormEquation(AB, True, 1, (), cyclic_canon("abAB"))
        verdict = verify(genus_one, torus)
        assert verdict.accepted, verdict.detail
        assert verdict.surfaces.classify() == ["torus"]

        genus_zero = StandardFormEquation(AB, True, 0, (), cyclic_canon("abAB"))
        assert verify(genus_zero, torus).failed_condition == Condition.BOUND_N


class TestStructure:
    def test_coefficient_free_equation(self):
        with pytest.raises(CertificateError):
            verify(StandardFormEquation(AB, True, 1), Certificate({}, ()))

    def test_validate_lists_every_problem(self, sphere_equation):
        cert = Certificate({"p1": parse_word("c")}, ((("p1", 1), ("p3", 1)), (("p3", 1),)))
        ok, errors = validate_certificate(sphere_equation, cert)
        assert not ok
        assert any("p1 occurs 1 time" in e for e in errors)
        assert any("p3 has no image" in e for e in errors)
        assert any("outside alphabet" in e for e in errors)

    def test_verdict_consistency(self):
        with pytest.raises(CertificateError):
            Verdict(True, Condition.READING)

    def test_renumbered(self):
        cert = Certificate.renumbered(
            [[("q", 1), ("r", -1)], [("r", 1), ("q", -1)]],
            {"q": parse_word("a"), "r": parse_word("b")},
        )
        assert cert.variables == ["p1", "p2"]
        assert cert.boundaries == ((("p1", 1), ("p2", -1)), (("p2", 1), ("p1", -1)))
        assert str(cert.images["p2"]) == "b"


SIGNED = [("a", 1), ("a", -1), ("b", 1), ("b", -1)]


def spell(letters):
    return "".join(symbol if sign > 0 else symbol.upper() for symbol, sign in letters)


def surface_totals(boundaries):
    """sum chi - 2(c - 1) and whether every component is orientable, from corner and disc graphs."""
    corners = nx.Graph()
    discs = nx.MultiGraph()
    discs.add_nodes_from(range(len(boundaries)))
    occurrences = defaultdict(list)
    for i, boundary in enumerate(boundaries):
        for k, (label, sign) in enumerate(boundary):
            corners.add_node((i, k))
            occurrences[label].append((i, k, sign))

    def ends(i, k, sign):
        here, there = (i, k), (i, (k + 1) % len(boundaries[i]))
        return (here, there) if sign > 0 else (there, here)

    for (i, k, e1), (j, l, e2) in occurrences.values():
        tail1, head1 = ends(i, k, e1)
        tail2, head2 = ends(j, l, e2)
        corners.add_edge(tail1, tail2)
        corners.add_edge(head1, head2)
        discs.add_edge(i, j, factor=-e1 * e2)

    vertex_discs = [next(iter(cls))[0] for cls in nx.connected_components(corners)]
    components = list(nx.connected_components(discs))
    chi, orientable = 0, True
    for component in components:
        sub = discs.subgraph(component)
        chi += sum(1 for i in vertex_discs if i in component) - sub.number_of_edges() + len(component)
        root = min(component)
        signs = {root: 1}
        for parent, child in nx.bfs_edges(sub, root):
            factor = next(iter(sub.get_edge_data(parent, child).values()))["factor"]
            signs[child] = signs[parent] * factor
        orientable &= all(signs[i] * factor == signs[j] for i, j, factor in sub.edges(data="factor"))
    return chi - 2 * (len(components) - 1), orientable


def expected_condition(sf, cert):
    """The first failing condition, recomputed from strings and graphs; None when accepted."""
    boundaries, images = cert.boundaries, cert.images
    counts = defaultdict(int)
    for boundary in boundaries:
        for label, _ in boundary:
            counts[label] += 1
    if (len(boundaries) != sf.m
            or any(count != 2 for count in counts.values())
            or set(counts) != set(images)
            or any(not boundary for boundary in boundaries)
            or any(sign not in (1, -1) for boundary in boundaries for _, sign in boundary)
            or any(not image or any(s not in "ab" for s, _ in image) for image in images.values())):
        return Condition.MULTIPLICITY

    chi_bar = 2 - 2 * sf.genus if sf.orientable else 2 - sf.genus
    if len(images) > 3 * (sf.m - chi_bar) + sf.m:
        return Condition.BOUND_N

    targets = [spell(w.representative) for w in sf.coefficients] + [spell(sf.d.representative)]
    for boundary, target in zip(boundaries, targets):
        text = "".join(
            spell(images[label]) if sign > 0 else spell(images[label])[::-1].swapcase()
            for label, sign in boundary
        )
        if any(x != y and x.lower() == y.lower() for x, y in zip(text, text[1:])):
            return Condition.READING
        if len(text) != len(target) or text not in target + target:
            return Condition.READING

    chi_total, orientable = surface_totals(boundaries)
    if sf.orientable:
        signs = defaultdict(set)
        for boundary in boundaries:
            for label, sign in boundary:
                signs[label].add(sign)
        if any(len(seen) != 2 for seen in signs.values()):
            return Condition.ORIENTATION
        needed = chi_bar
    else:
        needed = chi_bar + 1 if orientable else chi_bar
    return Condition.SURFACES if chi_total < needed else None


def mutations(cert):
    """Single local edits of a certificate: signs, labels, image letters, disc rotations and reversals."""
    boundaries = [list(b) for b in cert.boundaries]
    labels = sorted(cert.images)

    def with_boundaries(changed):
        return Certificate(dict(cert.images), tuple(tuple(b) for b in changed))

    def with_image(label, letters):
        return Certificate({**cert.images, label: Word.of(letters)}, cert.boundaries)

    for i, boundary in enumerate(boundaries):
        for k, (label, sign) in enumerate(boundary):
            for replacement in [(label, -sign), (label, 2 * sign), ("p0", sign)] + [
                    (other, sign) for other in labels if other != label]:
                changed = [list(b) for b in boundaries]
                changed[i][k] = replacement
                yield with_boundaries(changed)
        if len(boundary) > 1:
            changed = [list(b) for b in boundaries]
            changed[i] = boundary[1:] + boundary[:1]
            yield with_boundaries(changed)
        changed = [list(b) for b in boundaries]
        changed[i] = [(label, -sign) for label, sign in reversed(boundary)]
        yield with_boundaries(changed)

    for label in labels:
        changed = [[(p, -s) if p == label else (p, s) for p, s in b] for b in boundaries]
        yield with_boundaries(changed)
        letters = list(cert.images[label])
        for k, letter in enumerate(letters):
            for other in SIGNED:
                if other != letter:
                    yield with_image(label, letters[:k] + [other] + letters[k + 1:])
            yield with_image(label, letters[:k] + letters[k + 1:])
        for other in SIGNED:
            yield with_image(label, letters + [other])
            yield with_image(label, [other] + letters)

    for first in labels:
        for second in labels:
            if first < second:
                swapped = {**cert.images, first: cert.images[second], second: cert.images[first]}
                yield Certificate(swapped, cert.boundaries)


def packing_pair(items, capacity, bins):
    inst = BinPackingInstance(items, capacity, bins, exact=True)
    return to_equation(inst), packing_to_certificate(inst, solve_exact(inst))


def test_mutated_certificates_match_recomputed_verdicts(sphere_equation, sphere_certificate,
                                                        rp2_equation, rp2_certificate):
    torus = Certificate(
        {"p1": parse_word("a"), "p2": parse_word("b")},
        ((("p1", 1), ("p2", 1), ("p1", -1), ("p2", -1)),),
    )
    pairs = [
        (sphere_equation, sphere_certificate),
        (rp2_equation, rp2_certificate),
        (StandardFormEquation(AB, True, 1, (), cyclic_canon("abAB")), torus),
        (StandardFormEquation(AB, False, 2, (), cyclic_canon("abAB")), torus),
        (StandardFormEquation(AB, False, 1, (cyclic_canon("a"),), cyclic_canon("a")),
         Certificate({"p1": parse_word("a")}, ((("p1", 1),), (("p1", 1),)))),
    ]
    for items, capacity, bins in [((1, 2), 3, 1), ((1, 1, 1), 3, 1), ((2, 1, 1), 2, 2),
                                  ((2, 2, 1, 1), 3, 2), ((1, 1, 1, 1), 2, 2), ((3, 3, 1, 1), 4, 2),
                                  ((2, 2, 2), 2, 3), ((1, 1), 1, 2)]:
        pairs.append(packing_pair(items, capacity, bins))

    checked, disagreements = 0, []
    for sf, cert in pairs:
        assert verify(sf, cert).accepted == (expected_condition(sf, cert) is None)
        for mutant in mutations(cert):
            got = verify(sf, mutant).failed_condition
            want = expected_condition(sf, mutant)
            if got != want:
                disagreements.append((str(sf), mutant, got, want))
            checked += 1
    assert checked >= 500
    assert disagreements == []


def star_sphere(k):
    """d = a^k read by one k-gon, each p_i closed off by a monogon reading A."""
    sf = StandardFormEquation(AB, True, 0, (cyclic_canon("A"),) * k, cyclic_canon("a" * k))
    labels = [f"p{i}" for i in range(1, k + 1)]
    boundaries = tuple(((p, -1),) for p in labels) + (tuple((p, 1) for p in labels),)
    return sf, Certificate({p: parse_word("a") for p in labels}, boundaries)


@pytest.mark.slow
def test_verify_time_grows_polynomially():
    timings = {}
    for k in (125, 250, 500, 1000):
        sf, cert = star_sphere(k)
        start = time.perf_counter()
        verdict = verify(sf, cert)
        timings[k] = time.perf_counter() - start
        assert verdict.accepted, verdict.detail
        assert verdict.surfaces.classify() == ["sphere"]
    # 8x the size within 256x the time, well under cubic
    assert timings[1000] <= 256 * max(timings[125], 1e-3)
