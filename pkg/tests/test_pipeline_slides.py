from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from interviewkit.errors import StageError
from interviewkit.pipeline import (
    AnalysisReport,
    MockLanguageModel,
    PresentationScript,
    Slide,
    SlideDeckSpec,
    TableRow,
    generate_presentation_script,
    generate_slide_content,
    inject_percentages,
    parse_deck,
    render_narration,
    render_slides,
    value_index,
)
from interviewkit.pipeline.records import ThemeAnalysis


@pytest.fixture()
def table2_report():
    return AnalysisReport(
        n_sessions=42,
        distribution={"positive": 69.05, "neutral": 26.19, "negative": 4.76},
        top_reasons={"positive": ("Interaction is engaging", "Interesting human-like robot"),
                     "neutral": ("Interesting but experienced an error",),
                     "negative": ("Questions felt repetitive",)},
        per_theme={"human_likeness": ThemeAnalysis(
            stances={"agree": 50.0, "disagree": 25.0, "unclear": 25.0},
            motivations=("it feels natural",))},
    )


class TestInjection:
    def test_placeholder_substitution(self, table2_report):
        index = value_index(table2_report)
        out = inject_percentages("Positive was {{pct:Positive}} percent.", index)
        assert out == "Positive was 69.05 percent."

    def test_theme_placeholder(self, table2_report):
        index = value_index(table2_report)
        out = inject_percentages("Agreement hit {{pct:human_likeness:agree}}%.", index)
        assert out == "Agreement hit 50.00%."

    def test_fabricated_number_overwritten(self, table2_report):
        index = value_index(table2_report)
        out = inject_percentages("Positive responses reached 42.00% overall.", index)
        assert "69.05%" in out
        assert "42.00" not in out

    def test_fabricated_number_with_percent_word(self, table2_report):
        index = value_index(table2_report)
        out = inject_percentages("Neutral came to 3 percent of answers.", index)
        assert "26.19 percent" in out


class TestGenerateSlideContent:
    def test_mock_deck_contains_table2_values(self, table2_report):
        spec = generate_slide_content(table2_report, MockLanguageModel())
        rendered = render_slides(spec)
        assert "69.05" in rendered
        assert "26.19" in rendered
        assert "4.76" in rendered
        assert spec.slides[0].bullets == () and spec.slides[0].table is None

    def test_wrong_number_mock_is_neutralized(self, table2_report):
        def lying_slides(input: str) -> str:
            return json.dumps({"slides": [
                {"title": "Findings", "bullets": [], "table": None},
                {"title": "Overall Experience",
                 "bullets": ["Positive responses reached 42.00% overall."],
                 "table": [["Positive", "42.00"], ["Neutral", "39.00"], ["Negative", "19.00"]]},
                {"title": "Closing", "bullets": ["bye"], "table": None},
            ]})

        mock = MockLanguageModel(behaviors={"04_slides": lying_slides})
        spec = generate_slide_content(table2_report, mock)
        rendered = render_slides(spec)
        assert "42.00" not in rendered and "39.00" not in rendered and "19.00" not in rendered
        table = {row.label: row.value for row in spec.slides[1].table}
        assert table == {"Positive": 69.05, "Neutral": 26.19, "Negative": 4.76}

    def test_minimal_report_structural_floor(self):
        minimal = AnalysisReport(n_sessions=1,
                                 distribution={"positive": 100.0, "neutral": 0.0, "negative": 0.0},
                                 top_reasons={"positive": (), "neutral": (), "negative": ()},
                                 per_theme={"only_theme": ThemeAnalysis(
                                     stances={"agree": 100.0, "disagree": 0.0, "unclear": 0.0},
                                     motivations=())})
        spec = generate_slide_content(minimal, MockLanguageModel())
        assert len(spec.slides) >= 3

    def test_slide_count_bounds_enforced(self, table2_report):
        def huge_deck(input: str) -> str:
            slides = [{"title": f"S{i}", "bullets": [], "table": None} for i in range(20)]
            return json.dumps({"slides": slides})

        mock = MockLanguageModel(behaviors={"04_slides": huge_deck})
        with pytest.raises(StageError, match="outside the allowed"):
            generate_slide_content(table2_report, mock)

    def test_unknown_table_label_dropped(self, table2_report):
        def odd_table(input: str) -> str:
            return json.dumps({"slides": [
                {"title": "T", "bullets": [], "table": None},
                {"title": "Overall", "bullets": [],
                 "table": [["Positive", "1"], ["Banana", "7"]]},
                {"title": "End", "bullets": [], "table": None},
            ]})

        spec = generate_slide_content(table2_report,
                                      MockLanguageModel(behaviors={"04_slides": odd_table}))
        labels = [row.label for row in spec.slides[1].table]
        assert labels == ["Positive"]


class TestRenderParse:
    def spec(self) -> SlideDeckSpec:
        return SlideDeckSpec(
            slides=(
                Slide(title="Interview Findings"),
                Slide(title="Overall Experience",
                      bullets=("42 sessions", "Mostly positive"),
                      table=(TableRow("Positive", 69.05), TableRow("Neutral", 26.19),
                             TableRow("Negative", 4.76))),
                Slide(title="Closing", bullets=("Thanks!",)),
            ),
            event_name="Dialogue Systems Meetup", date="2026-08-01")

    def test_round_trip(self):
        spec = self.spec()
        assert parse_deck(render_slides(spec)) == spec

    def test_deterministic_bytes(self):
        spec = self.spec()
        assert render_slides(spec).encode() == render_slides(spec).encode()

    def test_fifteen_slides_render_fifteen_sections(self):
        slides = tuple(Slide(title=f"Slide {i}", bullets=(f"point {i}",)) for i in range(15))
        spec = SlideDeckSpec(slides=slides)
        rendered = render_slides(spec)
        assert rendered.count("\n---\n") == 14
        assert len(parse_deck(rendered).slides) == 15

    @given(st.lists(
        st.tuples(st.text(alphabet="abcdefgh XYZ", min_size=1, max_size=20).map(str.strip).filter(bool),
                  st.lists(st.text(alphabet="abcdefgh ", min_size=1, max_size=20)
                           .map(str.strip).filter(bool), max_size=4),
                  st.one_of(st.none(),
                            st.lists(st.tuples(st.sampled_from(["Alpha", "Beta", "Gamma"]),
                                               st.integers(0, 10000)),
                                     min_size=1, max_size=3, unique_by=lambda kv: kv[0]))),
        min_size=1, max_size=8))
    def test_round_trip_property(self, raw_slides):
        slides = []
        for i, (title, bullets, table) in enumerate(raw_slides):
            rows = None if table is None else tuple(
                TableRow(label, value / 100.0) for label, value in table)
            if i == 0:
                slides.append(Slide(title=title))  # title slide carries no body
            else:
                slides.append(Slide(title=title, bullets=tuple(bullets), table=rows))
        spec = SlideDeckSpec(slides=tuple(slides), event_name="E", date="D")
        assert parse_deck(render_slides(spec)) == spec


class TestNarration:
    def test_one_segment_per_slide_with_table2_value(self, table2_report):
        spec = generate_slide_content(table2_report, MockLanguageModel())
        script = generate_presentation_script(table2_report, spec, MockLanguageModel())
        assert len(script.segments) == len(spec.slides)
        narration = render_narration(script, spec)
        assert "69.05" in narration

    def test_wrong_number_in_narration_is_overwritten(self, table2_report):
        spec = generate_slide_content(table2_report, MockLanguageModel())

        def lying_script(input: str) -> str:
            doc = json.loads(input)
            n = len(doc["slides"])
            segments = ["Positive experiences totalled 12.00% here."] * n
            return json.dumps({"segments": segments})

        script = generate_presentation_script(
            table2_report, spec, MockLanguageModel(behaviors={"05_script": lying_script}))
        assert all("69.05%" in s for s in script.segments)

    def test_segment_count_mismatch_repair_then_error(self, table2_report):
        spec = generate_slide_content(table2_report, MockLanguageModel())

        def short_script(input: str) -> str:
            doc = json.loads(input)
            n = max(len(doc["slides"]) - 1, 1)
            return json.dumps({"segments": ["words"] * n})

        mock = MockLanguageModel(behaviors={"05_script": short_script})
        with pytest.raises(StageError, match="one per slide"):
            generate_presentation_script(table2_report, spec, mock)
        assert mock.calls_for_stage("05_script") == 2

    def test_repair_prompt_may_recover(self, table2_report):
        spec = generate_slide_content(table2_report, MockLanguageModel())
        calls = {"n": 0}

        def flaky_script(input: str) -> str:
            calls["n"] += 1
            doc = json.loads(input)
            n = len(doc["slides"]) if calls["n"] > 1 else 1
            return json.dumps({"segments": ["fine words here"] * n})

        script = generate_presentation_script(
            table2_report, spec, MockLanguageModel(behaviors={"05_script": flaky_script}))
        assert len(script.segments) == len(spec.slides)
        assert calls["n"] == 2

    def test_word_budget_enforced(self, table2_report):
        spec = generate_slide_content(table2_report, MockLanguageModel())

        def windy_script(input: str) -> str:
            doc = json.loads(input)
            n = len(doc["slides"])
            return json.dumps({"segments": [" ".join(["word"] * 500)] * n})

        mock = MockLanguageModel(behaviors={"05_script": windy_script})
        with pytest.raises(StageError, match="word budget"):
            generate_presentation_script(table2_report, spec, mock, word_budget=50)

    def test_narration_renders_slide_headers(self, table2_report):
        spec = generate_slide_content(table2_report, MockLanguageModel())
        script = PresentationScript(segments=tuple("seg" for _ in spec.slides))
        narration = render_narration(script, spec)
        assert narration.startswith("Slide 1: ")
