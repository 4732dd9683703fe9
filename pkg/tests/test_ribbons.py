"""Tests for ribbons, a-tracks and the packing/certificate translations."""

from itertools import product

import networkx as nx
import pytest

from quadfree.core.validators import certificate_size, edge_bound, verify
from quadfree.generators.binpack import BinPackingInstance, InvalidPartitionError, Partition, to_equation
from quadfree.generators.ribbons import (
    InvalidTilingError,
    TiledDisc,
    a_pattern,
    build_ribbon,
    certificate_to_packing,
    closes_without_d_disc,
    find_circular_tracks,
    packing_to_certificate,
    peel_decomposition,
    stack_ribbons,
)


def compositions(total):
    """Ordered sequences of positive parts summing to total."""
    if total == 0:
        yield ()
        return
    for first in range(1, total + 1):
        for rest in compositions(total - first):
            yield (first,) + rest


class TestRibbon:
    @pytest.mark.parametrize("params", [(3,), (1, 2), (1, 1, 1)])
    def test_boundary(self, params):
        ribbon = build_ribbon(params)
        assert ribbon.width == 3
        assert str(ribbon.boundary_word()) == "ABBBabbb"
        assert str(ribbon.top()) == "BBB"
        assert str(ribbon.bottom()) == "bbb"
        assert str(ribbon.tiled_disc().boundary_word()) == "ABBBabbb"

    def test_rejects_empty(self):
        with pytest.raises(InvalidTilingError):
            build_ribbon([])

    def test_rejects_zero_width_face(self):
        with pytest.raises(InvalidTilingError):
            build_ribbon([1, 0])


class TestStack:
    def test_two_rows(self):
        td = stack_ribbons([(1, 2), (3,)])
        assert str(td.boundary_word()) == "AABBBaabbb"
        assert len(td.faces) == 3
        assert [str(td.face_word(f)) for f in range(3)] == ["ABab", "ABBabb", "ABBBabbb"]

    def test_widths_must_agree(self):
        with pytest.raises(InvalidTilingError):
            stack_ribbons([(1, 2), (2,)])

    def test_empty(self):
        with pytest.raises(InvalidTilingError):
            stack_ribbons([])

    def test_face_must_read_a_commutator(self):
        with pytest.raises(InvalidTilingError):
            TiledDisc(faces=((("p", 1),),), letters={"p": "a"}, outer=(("p", 1),), params=(1,))

    def test_boundary_edge_needs_a_face(self):
        td = build_ribbon([1]).tiled_disc()
        with pytest.raises(InvalidTilingError):
            TiledDisc(td.faces, {**td.letters, "q": "b"}, td.outer + (("q", 1),), td.params)


class TestTracks:
    def test_single_disc(self):
        tracks = a_pattern(build_ribbon([3]).tiled_disc())
        assert len(tracks) == 1
        assert len(tracks[0].edges) == 2
        assert tracks[0].faces == (0,)
        assert find_circular_tracks(tracks) == []

    def test_one_track_per_row(self):
        tracks = a_pattern(stack_ribbons([(1, 2), (3,)]))
        assert len(tracks) == 2
        assert sorted(sorted(t.faces) for t in tracks) == [[0, 1], [2]]
        assert find_circular_tracks(tracks) == []

    def test_cycle_is_reported(self):
        graph = nx.Graph([("e1", "e2"), ("e2", "e3"), ("e3", "e1")])
        circular = find_circular_tracks(graph)
        assert len(circular) == 1
        assert sorted(circular[0].edges) == ["e1", "e2", "e3"]


class TestPeel:
    def test_two_rows(self):
        ribbons = peel_decomposition(stack_ribbons([(1, 2), (3,)]))
        assert [r.params for r in ribbons] == [(1, 2), (3,)]
        assert all(r.width == 3 for r in ribbons)

    def test_single_ribbon(self):
        ribbons = peel_decomposition(build_ribbon([2, 1]).tiled_disc())
        assert [r.params for r in ribbons] == [(2, 1)]

    def test_items_follow_faces(self):
        rows = [build_ribbon([1, 2], [4, 1]), build_ribbon([3], [2])]
        ribbons = peel_decomposition(stack_ribbons(rows))
        assert [r.items for r in ribbons] == [(4, 1), (2,)]

    @pytest.mark.parametrize("width", [1, 2, 3, 4])
    def test_peel_inverts_stack(self, width):
        rows = list(compositions(width))
        for height in (1, 2, 3):
            for stack in product(rows, repeat=height):
                td = stack_ribbons(stack)
                assert "a" in str(td.boundary_word()).lower()
                assert find_circular_tracks(a_pattern(td)) == []
                assert len(a_pattern(td)) == height
                assert [r.params for r in peel_decomposition(td)] == list(stack)


class TestCertificates:
    @pytest.mark.parametrize("items,capacity,bins,blocks", [
        ((3,), 3, 1, ((1,),)),
        ((1, 2), 3, 1, ((1, 2),)),
        ((2, 2, 1, 1), 3, 2, ((1, 3), (2, 4))),
        ((1, 1, 1, 1), 2, 2, ((1, 4), (2, 3))),
    ])
    def test_round_trip(self, items, capacity, bins, blocks):
        inst = BinPackingInstance(items, capacity, bins, exact=True)
        part = Partition(blocks)
        cert = packing_to_certificate(inst, part)
        sf = to_equation(inst)
        verdict = verify(sf, cert)
        assert verdict.accepted, verdict.detail
        assert verdict.surfaces.classify() == ["sphere"]
        assert cert.n <= edge_bound(sf)
        letters = sum(w.length for w in sf.coefficients) + sf.d.length
        assert certificate_size(cert) <= 2 * (letters + 3 * (2 * sf.genus + sf.m))
        assert certificate_to_packing(inst, cert) == part

    def test_consolidated_size(self):
        inst = BinPackingInstance((2, 2, 1, 1), 3, 2, exact=True)
        cert = packing_to_certificate(inst, Partition(((1, 3), (2, 4))))
        # 3 (m - chi-bar) with m = 5
        assert cert.n <= 9

    def test_two_disc_sphere(self):
        inst = BinPackingInstance((3,), 3, 1, exact=True)
        cert = packing_to_certificate(inst, Partition(((1,),)))
        assert len(cert.boundaries) == 2

    def test_invalid_partition(self):
        inst = BinPackingInstance((2, 2, 1, 1), 3, 2, exact=True)
        with pytest.raises(InvalidPartitionError):
            packing_to_certificate(inst, Partition(((1, 2), (3, 4))))

    def test_loose_instance(self):
        inst = BinPackingInstance((2, 1), 3, 1)
        with pytest.raises(InvalidPartitionError):
            packing_to_certificate(inst, Partition(((1, 2),)))

    def test_certificate_for_another_instance(self):
        cert = packing_to_certificate(BinPackingInstance((3,), 3, 1, exact=True), Partition(((1,),)))
        with pytest.raises(InvalidTilingError):
            certificate_to_packing(BinPackingInstance((1, 2), 3, 1, exact=True), cert)


class TestClosedWithoutDDisc:
    @pytest.mark.parametrize("params", [(1,), (2,), (1, 1), (1, 2), (2, 2)])
    def test_never_closes(self, params):
        assert not closes_without_d_disc(params)

    @pytest.mark.slow
    @pytest.mark.parametrize("params", [p for p in product((1, 2), repeat=3)])
    def test_three_discs_never_close(self, params):
        assert not closes_without_d_disc(params)
