import json

import pytest

from histoagent.interp import InterpreterLimits, run_source
from histoagent.interp.errors import ScriptFault
from histoagent.tools import (
    CATEGORIES,
    ArgumentError,
    DuplicateTool,
    ToolBinding,
    ToolDescriptor,
    ToolError,
    ToolParam,
    ToolRegistry,
    UnknownTool,
    build_default_registry,
)
from histoagent.tools.catalog import all_descriptors
from histoagent.tools.geometry import AREA_DESCRIPTOR, get_contour_area

EXPECTED_COUNTS = {
    "histology_roi": 4,
    "dataset_check": 5,
    "dataset_pipeline": 5,
    "docs_retriever": 3,
    "nuclei_contour": 4,
    "wsi_analysis": 25,
    "wsi_classification": 3,
}

SEGMENTATION_KEYS = {
    "dir_with_geojson_contours",
    "dir_with_tissue_contours_jpg",
    "dir_with_slide_thumbnails",
    "tissue_segmentation_log_file",
    "tissue_segmentation_config_file",
    "number_of_processed_segmentations",
    "operation_log",
}


def _echo_tool(**args):
    return dict(args)


def _simple_descriptor(name="echo_tool", category="testing"):
    return ToolDescriptor(
        name=name,
        category=category,
        description="Echo the arguments back.",
        params=(
            ToolParam("text", "str", "Text to echo."),
            ToolParam("count", "int", "Repeat count.", default=1),
        ),
        returns=(("text", "The echoed text."), ("count", "The echoed count.")),
    )


class TestRegistration:
    def test_register_and_size(self):
        reg = ToolRegistry()
        reg.register(ToolBinding(_simple_descriptor(), _echo_tool))
        assert len(reg) == 1
        assert "echo_tool" in reg

    def test_duplicate_rejected(self):
        reg = ToolRegistry()
        reg.register(ToolBinding(_simple_descriptor(), _echo_tool))
        with pytest.raises(DuplicateTool, match="echo_tool"):
            reg.register(ToolBinding(_simple_descriptor(), _echo_tool))

    def test_frozen_registry_rejects_register(self):
        reg = ToolRegistry()
        reg.freeze()
        with pytest.raises(ToolError, match="frozen"):
            reg.register(ToolBinding(_simple_descriptor(), _echo_tool))

    def test_get_unknown(self):
        reg = ToolRegistry()
        with pytest.raises(UnknownTool, match="nope"):
            reg.get("nope")


class TestValidation:
    @pytest.fixture()
    def reg(self):
        reg = ToolRegistry()
        reg.register(ToolBinding(_simple_descriptor(), _echo_tool))
        return reg

    def test_defaults_filled(self, reg):
        assert reg.invoke("echo_tool", {"text": "hi"}) == {"text": "hi", "count": 1}

    def test_unexpected_argument(self, reg):
        with pytest.raises(ArgumentError, match="unexpected argument 'bogus'"):
            reg.invoke("echo_tool", {"text": "hi", "bogus": 1})

    def test_missing_required(self, reg):
        with pytest.raises(ArgumentError, match="missing required argument 'text'"):
            reg.invoke("echo_tool", {})

    def test_type_mismatch(self, reg):
        with pytest.raises(ArgumentError, match="'count' must be int"):
            reg.invoke("echo_tool", {"text": "hi", "count": "three"})

    def test_optional_accepts_none(self, reg):
        assert reg.invoke("echo_tool", {"text": "hi", "count": None})["count"] is None

    def test_unknown_tool_invoke(self, reg):
        with pytest.raises(UnknownTool):
            reg.invoke("missing_tool", {})

    def test_invoke_area_unit_square(self):
        reg = build_default_registry()
        out = reg.invoke("get_contour_area", {"contour": [[0, 0], [1, 0], [1, 1], [0, 1]]})
        assert out == {"contour_area": 1.0}

    def test_invoke_area_missing_contour(self):
        reg = build_default_registry()
        with pytest.raises(ArgumentError, match="contour"):
            reg.invoke("get_contour_area", {})


@pytest.fixture(scope="module")
def reg():
    return build_default_registry()


@pytest.fixture(scope="module")
def docs(reg):
    return reg.render_docs()


class TestCatalog:
    def test_forty_nine_tools(self, reg):
        assert len(reg) == 49

    def test_names_unique(self, reg):
        names = reg.names()
        assert len(names) == len(set(names))

    def test_seven_categories_in_order(self, reg):
        assert reg.categories() == list(CATEGORIES)

    def test_category_counts(self, reg):
        for category, count in EXPECTED_COUNTS.items():
            assert len(reg.by_category(category)) == count, category

    def test_registration_order_matches_catalog(self, reg):
        assert reg.names() == [d.name for d in all_descriptors()]

    def test_every_param_documented(self, reg):
        for name in reg.names():
            descriptor = reg.get(name).descriptor
            assert descriptor.description.strip(), name
            for param in descriptor.params:
                assert param.doc.strip(), f"{name}.{param.name}"
            for key, doc in descriptor.returns:
                assert doc.strip(), f"{name} -> {key}"

    def test_segmentation_return_keys(self, reg):
        descriptor = reg.get("dataset_of_wsi_tissue_segmentation_tool").descriptor
        assert {key for key, _ in descriptor.returns} == SEGMENTATION_KEYS

    def test_segmentation_job_dir_not_keyed(self, reg):
        descriptor = reg.get("dataset_of_wsi_tissue_segmentation_tool").descriptor
        keyed = {p.name: p.keyed for p in descriptor.params}
        assert keyed["job_dir"] is False
        assert keyed["wsi_source"] is True

    def test_web_search_only_on_request(self, reg):
        assert "web_search_tool" not in reg
        extended = build_default_registry(include_web_search=True)
        assert len(extended) == 50
        out = extended.invoke("web_search_tool", {"query": "mitotic count"})
        assert out["live"] is False
        assert "mitotic count" in out["results"][0]["snippet"]


AREA_GOLDEN = """get_contour_area(contour: list) -> dict

Compute the enclosed area of a closed contour in squared pixel units using the shoelace formula. The contour is treated as a closed polygon; the edge from the last point back to the first is implied.

Notes:
    - Self-intersecting contours are not detected; the shoelace value is returned as-is and can undercount such shapes.

Returns (dict):
    "contour_area": Enclosed area in px^2.

Args:
    contour (list): Closed contour as a list of [x, y] pixel coordinates."""


class TestRendering:
    def test_empty_registry_renders_empty(self):
        assert ToolRegistry().render_docs() == ""

    def test_area_block_golden(self):
        assert AREA_DESCRIPTOR.render() == AREA_GOLDEN

    def test_each_tool_exactly_one_block(self, reg, docs):
        for name in reg.names():
            assert docs.count(f"{name}(") == 1, name

    def test_each_param_once_per_args_section(self, reg):
        for name in reg.names():
            block = reg.get(name).descriptor.render()
            for param in reg.get(name).descriptor.params:
                entries = block.count(f"\n    {param.name} (")
                assert entries == 1, f"{name}.{param.name}"

    def test_category_headers_present(self, docs):
        for category in CATEGORIES:
            assert f"## {category}" in docs

    def test_filter_to_nuclei_contour(self, reg):
        text = reg.render_docs(categories=["nuclei_contour"])
        assert text.startswith("## nuclei_contour")
        assert text.count(") -> dict") == 4
        for unwanted in ("histology_roi", "wsi_classification"):
            assert f"## {unwanted}" not in text

    def test_canonical_block_has_all_sections(self, reg):
        block = reg.get("dataset_of_wsi_tissue_segmentation_tool").descriptor.render()
        for section in ("Notes:", "Prerequisites:", "Returns (dict):", "Args:"):
            assert section in block
        assert block.index("Notes:") < block.index("Prerequisites:")
        assert block.index("Prerequisites:") < block.index("Returns (dict):")
        assert block.index("Returns (dict):") < block.index("Args:")

    def test_signature_shows_defaults(self, reg):
        sig = reg.get("dataset_of_wsi_tissue_segmentation_tool").descriptor.signature()
        assert sig == (
            "dataset_of_wsi_tissue_segmentation_tool(wsi_source: str, "
            "job_dir: str, custom_list_of_wsis: list = None, "
            "batch_size: int = 32) -> dict"
        )

    def test_blocks_render_in_registration_order(self, reg, docs):
        positions = [docs.index(f"{name}(") for name in reg.names()]
        assert positions == sorted(positions)


class TestInterpreterBridge:
    def test_positional_call(self, reg):
        bridge = reg.interpreter_bindings()["get_contour_area"]
        assert bridge([[0, 0], [4, 0], [0, 3]]) == {"contour_area": 6.0}

    def test_too_many_positionals(self, reg):
        bridge = reg.interpreter_bindings()["get_contour_area"]
        with pytest.raises(ScriptFault, match="takes 1 arguments"):
            bridge([[0, 0]], "extra")

    def test_duplicate_argument(self, reg):
        bridge = reg.interpreter_bindings()["get_contour_area"]
        with pytest.raises(ScriptFault, match="multiple values"):
            bridge([[0, 0]], contour=[[1, 1]])

    def test_tool_error_becomes_fault(self, reg):
        bridge = reg.interpreter_bindings()["get_contour_area"]
        with pytest.raises(ScriptFault, match="at least 3 points"):
            bridge([[0, 0], [1, 1]])

    def test_script_calls_tool(self, reg, tmp_path):
        limits = InterpreterLimits(working_dir=tmp_path, max_operations=10_000)
        source = (
            "shape = [[0, 0], [4, 0], [4, 3], [0, 3]]\n"
            "measured = get_contour_area(contour=shape)\n"
            "hull = get_contour_convex_hull(shape)\n"
            "final_answer({\n"
            '    "area": measured["contour_area"],\n'
            '    "corners": len(hull["contour_convex_hull"]),\n'
            "})\n"
        )
        result = run_source(source, limits, bindings=reg.interpreter_bindings())
        assert result.error is None
        assert result.final_answer == {"area": 12.0, "corners": 4}

    def test_script_catches_tool_fault(self, reg, tmp_path):
        limits = InterpreterLimits(working_dir=tmp_path, max_operations=10_000)
        source = (
            "try:\n"
            "    get_contour_area([[0, 0], [1, 1]])\n"
            "except Exception as err:\n"
            '    print("caught: " + err)\n'
        )
        result = run_source(source, limits, bindings=reg.interpreter_bindings())
        assert result.error is None
        assert "caught: get_contour_area needs at least 3 points" in result.stdout

    def test_unconfigured_fixture_tool_faults(self, reg, tmp_path):
        limits = InterpreterLimits(working_dir=tmp_path, max_operations=10_000)
        source = 'caption_single_wsi_tool(path_to_wsi="slides/a.svs")\n'
        result = run_source(source, limits, bindings=reg.interpreter_bindings())
        assert result.error is not None
        assert result.error.kind == "RuntimeFault"
        assert "no fixture store configured" in result.error.message


class TestFixtureDeterminism:
    def test_same_args_same_result(self, tmp_path):
        records = [
            {
                "args": {"path_to_wsi": "{dataset}/slides/S1.svs"},
                "result": {"caption": "clear cell pattern"},
            }
        ]
        tool_dir = tmp_path / "fixtures" / "caption_single_wsi_tool"
        tool_dir.mkdir(parents=True)
        (tool_dir / "records.json").write_text(json.dumps(records), encoding="utf-8")
        dataset = tmp_path / "data"
        dataset.mkdir()
        reg = build_default_registry(
            fixture_root=tmp_path / "fixtures", dataset_root=dataset
        )
        args = {"path_to_wsi": str(dataset / "slides" / "S1.svs")}
        first = reg.invoke("caption_single_wsi_tool", args)
        second = reg.invoke("caption_single_wsi_tool", args)
        assert first == second == {"caption": "clear cell pattern"}
