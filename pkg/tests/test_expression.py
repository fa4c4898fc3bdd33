import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atlasburst.anatomy import abstract_view, emapa, staged_view
from atlasburst.expression import (
    Annotation,
    AnnotationError,
    Level,
    annotation_count,
    expression_profile,
    parse_annotations,
    profile_subset,
    propagate_states,
)

from conftest import ann_lines, oracle_profile, oracle_states, random_anatomy, random_annotations, store_of

BRAIN = emapa(31)
DIGIT = emapa(12)
PAW = emapa(11)
LIMB = emapa(10)
ROOT = emapa(1)


# -- parsing -------------------------------------------------------------


def test_parse_future_brain_annotation(mouse_anatomy):
    store, conflicts = parse_annotations(
        ann_lines([("Bmp4", "EMAPA:31", 15, "strong", "EXP:101")]), mouse_anatomy)
    assert conflicts == []
    assert store.direct_level("Bmp4", BRAIN, 15) is Level.STRONG


def test_parse_empty_file(mouse_anatomy):
    store, conflicts = parse_annotations(b"", mouse_anatomy)
    assert conflicts == []
    assert store.total_annotations() == 0


def test_parse_comments_and_blanks(mouse_anatomy):
    text = "# header\n\n" + ann_lines([("Shh", "EMAPA:12", 14, "weak")])
    store, _ = parse_annotations(text, mouse_anatomy)
    assert store.total_annotations() == 1


def test_conflict_resolved_by_precedence(mouse_anatomy):
    text = ann_lines([
        ("g", "EMAPA:12", 13, "weak"),
        ("g", "EMAPA:12", 13, "strong"),
    ])
    store, conflicts = parse_annotations(text, mouse_anatomy)
    assert store.direct_level("g", DIGIT, 13) is Level.STRONG
    assert len(conflicts) == 1
    assert conflicts[0].kept is Level.STRONG
    assert conflicts[0].dropped is Level.WEAK


def test_conflict_keeps_first_on_tie_and_reports(mouse_anatomy):
    text = ann_lines([
        ("g", "EMAPA:12", 13, "strong"),
        ("g", "EMAPA:12", 13, "weak"),
    ])
    store, conflicts = parse_annotations(text, mouse_anatomy)
    assert store.direct_level("g", DIGIT, 13) is Level.STRONG
    assert len(conflicts) == 1


@pytest.mark.parametrize("line,fragment", [
    ('{"gene":"g","structure":"EMAPA:999","stage":12,"level":"weak"}', "unknown structure"),
    ('{"gene":"g","structure":"EMAPA:12","stage":3,"level":"weak"}', "does not exist at stage"),
    ('{"gene":"g","structure":"EMAPA:12","stage":13,"level":"loud"}', "unknown level"),
    ('{"gene":"g","structure":"EMAPA:12","stage":99,"level":"weak"}', "bad stage"),
    ('{"gene":"bad gene","structure":"EMAPA:12","stage":13,"level":"weak"}', "bad gene"),
    ('{not json', "bad JSON"),
])
def test_parse_rejects_bad_records(mouse_anatomy, line, fragment):
    with pytest.raises(AnnotationError) as exc:
        parse_annotations(line, mouse_anatomy)
    assert fragment in str(exc.value)
    assert exc.value.line == 1


def test_parse_reports_offending_line_number(mouse_anatomy):
    text = ann_lines([("a", "EMAPA:12", 13, "weak")]) + '{"gene":"b"}\n'
    with pytest.raises(AnnotationError) as exc:
        parse_annotations(text, mouse_anatomy)
    assert exc.value.line == 2


# -- direct lookup -------------------------------------------------------


def test_direct_level_absent(mouse_anatomy):
    store = store_of(mouse_anatomy, [])
    assert store.direct_level("Bmp4", BRAIN, 15) is None


def test_direct_level_case_insensitive(mouse_anatomy):
    store = store_of(mouse_anatomy, [Annotation("Bmp4", BRAIN, 15, Level.STRONG)])
    assert store.direct_level("bmp4", BRAIN, 15) is Level.STRONG
    assert store.direct_level("BMP4", BRAIN, 15) is Level.STRONG
    assert store.display_symbol("bMP4") == "Bmp4"


# -- propagation ---------------------------------------------------------


def digit_store(mouse_anatomy, level=Level.STRONG):
    return store_of(mouse_anatomy, [Annotation("Shh", DIGIT, 14, level)])


def test_propagation_up_the_chain(mouse_anatomy):
    store = digit_store(mouse_anatomy)
    states = propagate_states(store, mouse_anatomy, "Shh", 14, "staged").states
    assert states[DIGIT].state_class == "strong"
    assert states[PAW].state_class == "propagated"
    assert states[LIMB].state_class == "propagated"
    assert states[ROOT].state_class == "propagated"
    assert states[emapa(13)].state_class == "no_info"  # paw pad untouched


def test_negative_expression_not_propagated(mouse_anatomy):
    store = digit_store(mouse_anatomy, Level.NOT_DETECTED)
    states = propagate_states(store, mouse_anatomy, "Shh", 14, "staged").states
    assert states[DIGIT].state_class == "not_detected"
    for ancestor in (PAW, LIMB, ROOT):
        assert states[ancestor].state_class == "no_info"


def test_direct_annotation_beats_propagated(mouse_anatomy):
    store = store_of(mouse_anatomy, [
        Annotation("g", DIGIT, 14, Level.STRONG),
        Annotation("g", PAW, 14, Level.NOT_DETECTED),
    ])
    states = propagate_states(store, mouse_anatomy, "g", 14, "staged").states
    assert states[PAW].state_class == "not_detected"
    assert states[LIMB].state_class == "propagated"


def test_unknown_gene_yields_no_info_everywhere(mouse_anatomy):
    store = store_of(mouse_anatomy, [])
    state_map = propagate_states(store, mouse_anatomy, "nothere", 14, "staged")
    assert all(s.state_class == "no_info" for s in state_map.states.values())


def test_abstract_mode_marks_absent_structures(mouse_anatomy):
    store = digit_store(mouse_anatomy)
    state_map = propagate_states(store, mouse_anatomy, "Shh", 14, "abstract")
    assert state_map.states[emapa(3)].state_class == "not_present"  # polar body ends at 2
    assert state_map.states[DIGIT].state_class == "strong"
    assert set(state_map.states) == {n.id for n in abstract_view(mouse_anatomy).nodes}


def test_statemap_keys_equal_view_nodes(mouse_anatomy):
    store = digit_store(mouse_anatomy)
    staged = propagate_states(store, mouse_anatomy, "Shh", 14, "staged")
    assert set(staged.states) == {n.id for n in staged_view(mouse_anatomy, 14).nodes}


def test_propagation_matches_oracle_on_random_trees():
    rng = random.Random(99)
    genes = ["a", "b", "c"]
    for _ in range(50):
        anatomy = random_anatomy(rng, rng.randint(1, 50))
        store = store_of(anatomy, random_annotations(rng, anatomy, genes, 30))
        gene = rng.choice(genes)
        stage = rng.randint(1, 26)
        for mode in ("staged", "abstract"):
            view = staged_view(anatomy, stage) if mode == "staged" else abstract_view(anatomy)
            directs = {sid: a.level
                       for sid, a in store.direct_annotations(gene, stage).items()}
            expected = oracle_states(view, directs,
                                     anatomy if mode == "abstract" else None, stage)
            got = propagate_states(store, anatomy, gene, stage, mode).states
            for i, node in enumerate(view.nodes):
                assert got[node.id].state_class == expected[i]


# -- profiles ------------------------------------------------------------


def test_profile_upward_closure_digit(mouse_anatomy):
    store = digit_store(mouse_anatomy)
    assert expression_profile(store, mouse_anatomy, "Shh", 14) == {DIGIT, PAW, LIMB, ROOT}


def test_profile_empty_for_unknown_gene(mouse_anatomy):
    store = store_of(mouse_anatomy, [])
    assert expression_profile(store, mouse_anatomy, "Shh", 14) == set()


def test_profile_matches_ancestor_union_oracle():
    # Positive levels only: a direct negative above a positive descendant is
    # contradictory curation and is displayed as-is rather than closed over.
    rng = random.Random(4)
    for _ in range(40):
        anatomy = random_anatomy(rng, rng.randint(1, 40))
        store = store_of(anatomy, random_annotations(rng, anatomy, ["g"], 15,
                                                     positive_only=True))
        stage = rng.randint(1, 26)
        view = staged_view(anatomy, stage)
        directs = {sid: a.level for sid, a in store.direct_annotations("g", stage).items()}
        assert expression_profile(store, anatomy, "g", stage) == oracle_profile(view, directs)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 100_000))
def test_profile_closed_under_parent(seed):
    rng = random.Random(seed)
    anatomy = random_anatomy(rng, rng.randint(2, 40))
    store = store_of(anatomy, random_annotations(rng, anatomy, ["g"], 10,
                                                 positive_only=True))
    stage = rng.randint(1, 26)
    profile = expression_profile(store, anatomy, "g", stage)
    for sid in profile:
        parent = anatomy.structures[sid].parent
        if parent is not None:
            assert parent in profile


def test_adding_positive_annotation_grows_profiles(mouse_anatomy):
    base = [Annotation("g", DIGIT, 14, Level.WEAK)]
    before = expression_profile(store_of(mouse_anatomy, base), mouse_anatomy, "g", 14)
    after = expression_profile(
        store_of(mouse_anatomy, base + [Annotation("g", emapa(22), 14, Level.PRESENT)]),
        mouse_anatomy, "g", 14)
    assert before <= after


def test_profile_subset_pair(mouse_anatomy):
    store = store_of(mouse_anatomy, [
        Annotation("gA", DIGIT, 14, Level.STRONG),
        Annotation("gB", DIGIT, 14, Level.WEAK),
        Annotation("gB", emapa(13), 14, Level.MODERATE),  # paw pad
    ])
    assert profile_subset(store, mouse_anatomy, "gA", "gB", 14) == (True, None)
    subset, witness = profile_subset(store, mouse_anatomy, "gB", "gA", 14)
    assert subset is False
    assert witness == emapa(13)


def test_profile_subset_reflexive(mouse_anatomy):
    store = digit_store(mouse_anatomy)
    assert profile_subset(store, mouse_anatomy, "Shh", "Shh", 14) == (True, None)
    assert profile_subset(store, mouse_anatomy, "nope", "nope", 14) == (True, None)


# -- counts --------------------------------------------------------------


def test_annotation_count(mouse_anatomy):
    store = store_of(mouse_anatomy, [
        Annotation("g", DIGIT, 12, Level.WEAK),
        Annotation("g", PAW, 12, Level.WEAK),
        Annotation("g", LIMB, 12, Level.WEAK),
        Annotation("g", LIMB, 13, Level.WEAK),
    ])
    assert annotation_count(store, "g", 12) == 3
    assert annotation_count(store, "g", 13) == 1


def test_annotation_count_unknown_gene(mouse_anatomy):
    store = store_of(mouse_anatomy, [])
    assert annotation_count(store, "mystery", 12) == 0


def test_counts_recount_oracle():
    rng = random.Random(12)
    anatomy = random_anatomy(rng, 30)
    genes = ["a", "b", "c", "d"]
    annotations = random_annotations(rng, anatomy, genes, 60)
    store = store_of(anatomy, annotations)
    for stage in range(1, 27):
        total = sum(annotation_count(store, g, stage) for g in genes)
        assert total == sum(1 for a in annotations if a.stage == stage)
