"""Tests for annotation ingestion, pair generation, and hierarchy trees."""

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import hierembed.hierarchy as H
from hierembed.hierarchy import (
    AnnotationError,
    BoundingBox,
    EntailmentPair,
    HierarchyTree,
    build_hierarchy_tree,
    containment,
    cross_image_pairs,
    edge_statistics,
    filter_boxes,
    generate_pairs,
    load_annotations,
    read_pairs_tsv,
    relation_oracle_from_pairs,
    within_image_pairs,
    write_pairs_tsv,
)


def _box(image_id, box_id, box, label="obj", is_group_of=False):
    return BoundingBox(image_id=image_id, box_id=box_id, box=box,
                       label=label, is_group_of=is_group_of)


class TestAnnotations:
    def test_load_valid(self, tmp_path):
        path = tmp_path / "ann.jsonl"
        recs = [
            {"image_id": "im1", "box_id": "b1", "box": [0.1, 0.1, 0.5, 0.5],
             "label": "car"},
            {"image_id": "im1", "box_id": "b2", "box": [0.2, 0.2, 0.4, 0.4],
             "label": "wheel", "is_group_of": True},
        ]
        path.write_text("\n".join(json.dumps(r) for r in recs) + "\n")
        boxes = load_annotations(path)
        assert len(boxes) == 2
        assert boxes[0].label == "car"
        assert boxes[1].is_group_of

    def test_strict_raises_with_line_number(self, tmp_path):
        path = tmp_path / "ann.jsonl"
        good = json.dumps({"image_id": "i", "box_id": "b", "label": "x",
                           "box": [0, 0, 1, 1]})
        path.write_text(good + "\n{not json}\n")
        with pytest.raises(AnnotationError, match="line 2"):
            load_annotations(path, strict=True)

    def test_lenient_skips_bad_lines(self, tmp_path):
        path = tmp_path / "ann.jsonl"
        good = json.dumps({"image_id": "i", "box_id": "b", "label": "x",
                           "box": [0, 0, 1, 1]})
        bad = json.dumps({"image_id": "i", "box_id": "b2", "label": "y",
                          "box": [0.5, 0.5, 0.4, 0.9]})  # xmin >= xmax
        path.write_text(good + "\n" + bad + "\n")
        boxes = load_annotations(path, strict=False)
        assert [b.box_id for b in boxes] == ["b"]

    def test_validate_rejects_out_of_range(self):
        with pytest.raises(AnnotationError):
            _box("i", "b", (-0.1, 0.0, 0.5, 0.5)).validate()
        with pytest.raises(AnnotationError):
            _box("i", "b", (0.0, 0.0, 0.5, 1.5)).validate()

    def test_pair_rejects_self_and_bad_kind(self):
        with pytest.raises(ValueError):
            EntailmentPair("a", "a", "box_to_box")
        with pytest.raises(ValueError):
            EntailmentPair("a", "b", "mystery")


class TestFilterAndContainment:
    def test_min_area_inclusive_boundary(self):
        exact = _box("i", "b1", (0.0, 0.0, 0.1, 0.1))  # area exactly 0.01
        below = _box("i", "b2", (0.0, 0.0, 0.1, 0.09))
        kept = filter_boxes([exact, below])
        assert [b.box_id for b in kept] == ["b1"]

    def test_full_image_contains_everything(self):
        inner = _box("i", "b", (0.9, 0.9, 1.0, 1.0))
        assert containment(None, inner)

    def test_containment_threshold_inclusive(self):
        outer = _box("i", "o", (0.0, 0.0, 0.5, 0.5))
        # overlap is 0.4x0.5 of a 0.5x0.5 inner -> exactly 0.80
        inner = _box("i", "c", (0.1, 0.0, 0.6, 0.5))
        assert containment(outer, inner, threshold=0.80)
        assert not containment(outer, inner, threshold=0.81)

    def test_disjoint_boxes(self):
        outer = _box("i", "o", (0.0, 0.0, 0.3, 0.3))
        inner = _box("i", "c", (0.5, 0.5, 0.7, 0.7))
        assert not containment(outer, inner)

    def test_cross_image_containment_rejected(self):
        outer = _box("i1", "o", (0.0, 0.0, 1.0, 1.0))
        inner = _box("i2", "c", (0.1, 0.1, 0.2, 0.2))
        with pytest.raises(ValueError):
            containment(outer, inner)

    @given(
        overlap=st.floats(0.0, 1.0),
        lo=st.floats(0.0, 1.0),
        hi=st.floats(0.0, 1.0),
    )
    @settings(max_examples=100, deadline=None)
    def test_threshold_monotonicity(self, overlap, lo, hi):
        """If a box is contained at a high threshold, it is at any lower one."""
        lo, hi = min(lo, hi), max(lo, hi)
        outer = _box("i", "o", (0.0, 0.0, 0.5, 1.0))
        width = 0.2 + 0.3 * overlap  # inner slides partly outside
        inner = _box("i", "c", (0.4, 0.0, 0.4 + width, 1.0))
        if containment(outer, inner, threshold=hi):
            assert containment(outer, inner, threshold=lo)


class TestWithinImagePairs:
    def setup_method(self):
        self.scene = _box("im", "big", (0.0, 0.0, 0.8, 0.8), label="car")
        self.child = _box("im", "small", (0.1, 0.1, 0.4, 0.4), label="wheel")
        self.outside = _box("im", "far", (0.85, 0.85, 0.95, 0.95), label="dog")

    def test_scene_and_box_pairs(self):
        pairs = within_image_pairs("im", [self.scene, self.child, self.outside])
        scene_pairs = {(p.parent_id, p.child_id) for p in pairs
                       if p.kind == "scene_to_box"}
        box_pairs = {(p.parent_id, p.child_id) for p in pairs
                     if p.kind == "box_to_box"}
        assert scene_pairs == {("im", "big"), ("im", "small"), ("im", "far")}
        assert box_pairs == {("big", "small")}

    def test_equal_area_tie_dropped(self):
        a = _box("im", "a", (0.0, 0.0, 0.5, 0.5))
        b = _box("im", "b", (0.0, 0.0, 0.5, 0.5))
        pairs = within_image_pairs("im", [a, b])
        assert all(p.kind == "scene_to_box" for p in pairs)

    def test_group_of_child_excluded(self):
        group = _box("im", "grp", (0.1, 0.1, 0.4, 0.4), label="wheel",
                     is_group_of=True)
        pairs = within_image_pairs("im", [self.scene, group])
        assert all(p.kind == "scene_to_box" for p in pairs)
        pairs = within_image_pairs("im", [self.scene, group],
                                   drop_group_of_children=False)
        assert ("big", "grp") in {(p.parent_id, p.child_id) for p in pairs
                                  if p.kind == "box_to_box"}

    def test_group_of_parent_allowed(self):
        group = _box("im", "grp", (0.0, 0.0, 0.8, 0.8), label="cars",
                     is_group_of=True)
        pairs = within_image_pairs("im", [group, self.child])
        assert ("grp", "small") in {(p.parent_id, p.child_id) for p in pairs
                                    if p.kind == "box_to_box"}

    def test_wrong_image_rejected(self):
        with pytest.raises(ValueError):
            within_image_pairs("other", [self.scene])


class TestCrossImagePairs:
    def _dataset(self):
        return [
            _box("im1", "a1", (0.0, 0.0, 0.5, 0.5), label="car"),
            _box("im2", "a2", (0.0, 0.0, 0.5, 0.5), label="car"),
            _box("im3", "a3", (0.0, 0.0, 0.5, 0.5), label="car"),
            _box("im1", "b1", (0.5, 0.5, 0.9, 0.9), label="dog"),
        ]

    def test_same_label_other_image_only(self):
        pairs = cross_image_pairs(self._dataset(), "im1", k=5)
        children = {p.child_id for p in pairs}
        assert children == {"a2", "a3"}  # nothing for dog, never own boxes
        assert all(p.parent_id == "im1" and p.kind == "cross_image"
                   for p in pairs)

    def test_k_limits_samples(self):
        pairs = cross_image_pairs(self._dataset(), "im1", k=1)
        assert len(pairs) == 1
        assert pairs[0].child_id in {"a2", "a3"}

    def test_deterministic_and_seed_sensitive(self):
        data = self._dataset() + [
            _box(f"im{i}", f"x{i}", (0.0, 0.0, 0.5, 0.5), label="car")
            for i in range(4, 20)
        ]
        first = cross_image_pairs(data, "im1", k=3, seed=7)
        second = cross_image_pairs(data, "im1", k=3, seed=7)
        assert first == second
        other = cross_image_pairs(data, "im1", k=3, seed=8)
        assert first != other

    def test_k_zero_and_negative(self):
        assert cross_image_pairs(self._dataset(), "im1", k=0) == []
        with pytest.raises(ValueError):
            cross_image_pairs(self._dataset(), "im1", k=-1)


class TestEdgeStatistics:
    def test_frequency_and_proportion(self):
        boxes = [
            _box("im1", "c1", (0.0, 0.0, 0.6, 0.6), label="car"),
            _box("im1", "w1", (0.1, 0.1, 0.3, 0.3), label="wheel"),
            _box("im1", "w2", (0.3, 0.3, 0.5, 0.5), label="wheel"),
            _box("im2", "c2", (0.0, 0.0, 0.6, 0.6), label="car"),
            _box("im2", "c3", (0.0, 0.0, 0.6, 0.6), label="car"),
            _box("im2", "w3", (0.1, 0.1, 0.3, 0.3), label="wheel"),
        ]
        pairs = [
            EntailmentPair("c1", "w1", "box_to_box"),
            EntailmentPair("c1", "w2", "box_to_box"),
            EntailmentPair("c2", "w3", "box_to_box"),
            EntailmentPair("im1", "c1", "scene_to_box"),  # ignored
        ]
        stats = edge_statistics(pairs, boxes)
        freq, prop = stats[("car", "wheel")]
        assert freq == 3
        # 2 of 3 car boxes contain at least one wheel
        assert prop == pytest.approx(2.0 / 3.0)


class TestHierarchyTree:
    def _stats(self):
        return {
            ("vehicle", "car"): (120, 0.5),
            ("car", "wheel"): (80, 0.25),
            ("car", "mirror"): (49, 0.9),    # below frequency threshold
            ("dog", "tail"): (200, 0.05),    # below proportion threshold
        }

    def test_thresholds_inclusive(self):
        stats = {("a", "b"): (50, 0.10)}
        tree = build_hierarchy_tree(stats)
        assert tree.edges == [("a", "b", 50, 0.10)]

    def test_threshold_filtering(self):
        tree = build_hierarchy_tree(self._stats())
        kept = {(u, v) for u, v, _, _ in tree.edges}
        assert kept == {("vehicle", "car"), ("car", "wheel")}

    def test_cycle_broken_at_weakest_edge(self):
        stats = {
            ("a", "b"): (100, 0.5),
            ("b", "c"): (60, 0.5),
            ("c", "a"): (90, 0.5),
        }
        tree = build_hierarchy_tree(stats)
        kept = {(u, v) for u, v, _, _ in tree.edges}
        assert kept == {("a", "b"), ("c", "a")}

    def test_descendants_and_ancestors(self):
        tree = build_hierarchy_tree(self._stats())
        assert tree.descendants(["vehicle"]) == {"car", "wheel"}
        assert tree.ancestors(["wheel"]) == {"car", "vehicle"}
        assert tree.descendants(["unknown"]) == set()

    def test_json_round_trip(self):
        tree = build_hierarchy_tree(self._stats())
        again = HierarchyTree.from_json(tree.to_json())
        assert again.edges == tree.edges

    def test_bad_thresholds(self):
        with pytest.raises(ValueError):
            build_hierarchy_tree({}, freq_threshold=0)
        with pytest.raises(ValueError):
            build_hierarchy_tree({}, prop_threshold=0.0)


class TestGeneratePairs:
    def _dataset(self):
        boxes = []
        for i in range(1, 4):
            boxes.append(_box(f"im{i}", f"car{i}", (0.0, 0.0, 0.6, 0.6),
                              label="car"))
            boxes.append(_box(f"im{i}", f"wheel{i}", (0.1, 0.1, 0.3, 0.3),
                              label="wheel"))
        boxes.append(_box("im1", "speck", (0.0, 0.0, 0.05, 0.05), label="dust"))
        return boxes

    def test_filtering_and_kinds(self):
        pairs = generate_pairs(self._dataset(), seed=3)
        ids = {p.child_id for p in pairs} | {p.parent_id for p in pairs}
        assert "speck" not in ids
        kinds = {p.kind for p in pairs}
        assert kinds == {"scene_to_box", "box_to_box", "cross_image"}
        box_pairs = {(p.parent_id, p.child_id) for p in pairs
                     if p.kind == "box_to_box"}
        assert box_pairs == {(f"car{i}", f"wheel{i}") for i in range(1, 4)}

    def test_byte_determinism(self, tmp_path):
        a, b = tmp_path / "a.tsv", tmp_path / "b.tsv"
        write_pairs_tsv(generate_pairs(self._dataset(), seed=11), a)
        write_pairs_tsv(generate_pairs(list(self._dataset()), seed=11), b)
        assert a.read_bytes() == b.read_bytes()

    def test_tsv_round_trip(self, tmp_path):
        pairs = generate_pairs(self._dataset())
        path = tmp_path / "pairs.tsv"
        write_pairs_tsv(pairs, path)
        assert read_pairs_tsv(path) == pairs

    def test_tsv_bad_line(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text("a\tb\n")
        with pytest.raises(AnnotationError, match="line 1"):
            read_pairs_tsv(path)

    def test_relation_oracle(self):
        pairs = generate_pairs(self._dataset())
        oracle = relation_oracle_from_pairs(pairs)
        assert oracle("car1", "wheel1")
        assert not oracle("wheel1", "car1")
        assert not oracle("car1", "car2")
