import json

import numpy as np
import pytest

from hypdecomp.fixtures import NAMES, fixture_path
from hypdecomp.io_cli import (SpecError, emit, load_spec, main, parse_spec,
                              run)


class TestLoadSpec:
    def test_all_fixtures_parse(self):
        for name in NAMES:
            spec = load_spec(fixture_path(name))
            assert spec.group.dimension in (2, 3)
            assert spec.options.algorithm == "both"

    def test_thrice_punctured_is_n2(self, spec_3ps):
        assert spec_3ps.group.dimension == 2
        assert len(spec_3ps.group.cusp_reps) == 3

    def test_unsupported_dimension(self, tmp_path):
        doc = {"dimension": 5, "generators": [], "cusps": []}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(SpecError, match="unsupported dimension"):
            load_spec(path)

    def test_non_involutive_reflection_named(self):
        doc = {
            "dimension": 2,
            "generators": [],
            "reflections": [np.diag([1.0, 2.0, 0.5]).tolist()],
            "cusps": [[1.0, 0.0, 1.0]],
        }
        with pytest.raises(SpecError, match="reflection 0"):
            parse_spec(doc)

    def test_parse_error_reports_line(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"dimension": 2,\n  "generators": [}\n}')
        with pytest.raises(SpecError, match="line 2"):
            load_spec(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(SpecError, match="cannot read"):
            load_spec(tmp_path / "nope.json")

    def test_unknown_option_rejected(self):
        doc = {"dimension": 2, "generators": [], "cusps": [[1.0, 0.0, 1.0]],
               "options": {"wordbound": 3}}
        with pytest.raises(SpecError, match="unknown option"):
            parse_spec(doc)

    def test_decoration_scales_applied(self):
        doc = {"dimension": 2, "generators": [], "cusps": [[1.0, 0.0, 1.0]],
               "decoration_scales": [2.5]}
        spec = parse_spec(doc)
        assert np.allclose(spec.group.cusp_reps[0], [2.5, 0.0, 2.5])


class TestRun:
    def test_figure3_end_to_end(self, report_fig3):
        assert report_fig3.ok
        kinds = [mc.kind for mc in report_fig3.mixed.cells]
        assert kinds == ["truncated", "truncated"]

    def test_both_algorithms_cross_validated(self, all_reports):
        for name, report in all_reports.items():
            assert report.certificates["cross_validation"].ok, name

    def test_word_bound_zero_reports_failure(self, spec_3ps):
        from dataclasses import replace
        opts = replace(spec_3ps.options, word_bound=0, algorithm="ep")
        from hypdecomp.io_cli import ManifoldSpec
        spec = ManifoldSpec(name=spec_3ps.name, group=spec_3ps.group,
                            options=opts)
        report = run(spec)
        assert not report.certificates["ep_stability"].ok
        assert not report.ok

    def test_report_embeds_bounds(self, report_3ps):
        doc = json.loads(emit(report_3ps, "json"))
        assert doc["options"]["word_bound"] == 6
        assert doc["options"]["height_bound"] == 20.0
        assert "tolerances" in doc and doc["tolerances"]["pair_match"] == 1e-6


class TestEmit:
    def test_json_round_trip(self, report_fig3):
        blob = emit(report_fig3, "json")
        doc = json.loads(blob)
        assert doc["schema"] == 1
        assert len(doc["cells"]) == 2
        for cell in doc["cells"]:
            assert cell["kind"] == "truncated"
            assert len(cell["ideal_vertices"]) == 2
            assert cell["external_face"] is not None
        # re-serializing the parsed document is stable
        blob2 = emit(report_fig3, "json")
        assert blob == blob2

    def test_json_deterministic_across_runs(self, spec_torus, report_torus):
        fresh = run(load_and_copy(spec_torus))
        assert emit(fresh, "json") == emit(report_torus, "json")

    def test_empty_decomposition_valid_json(self):
        doc_in = {"name": "empty", "dimension": 2, "generators": [],
                  "cusps": [[1.0, 0.0, 1.0]],
                  "options": {"algorithm": "ep", "word_bound": 1}}
        report = run(parse_spec(doc_in))
        doc = json.loads(emit(report, "json"))
        assert doc["cells"] == [] and doc["pairings"] == []

    def test_svg_structure(self, report_fig3):
        svg = emit(report_fig3, "svg").decode()
        n_lines = svg.count("<line")
        # unique internal + external segments plus wall chords
        mixed = report_fig3.mixed
        segs = set()
        for mc in mixed.cells:
            for facet in mc.internal_facets:
                if len(facet) == 2:
                    key = tuple(sorted(tuple(np.round(p[1:] / p[0], 9))
                                       for p in facet))
                    segs.add(key)
            if mc.kind == "truncated":
                key = tuple(sorted(tuple(np.round(p[1:] / p[0], 9))
                                   for p in mc.external_face))
                segs.add(key)
        n_walls = svg.count('class="wall"')
        assert n_lines == len(segs) + n_walls

    def test_svg_rejected_for_n3(self, report_fig8):
        with pytest.raises(SpecError):
            emit(report_fig8, "svg")


def load_and_copy(spec):
    from hypdecomp.io_cli import load_spec
    from hypdecomp.fixtures import fixture_path
    return load_spec(fixture_path(spec.name))


class TestCli:
    def test_input_error_exit_3(self, tmp_path, capsys):
        missing = tmp_path / "missing.json"
        assert main(["--input", str(missing)]) == 3
        assert "input error" in capsys.readouterr().err

    def test_svg_for_n3_exit_3(self, tmp_path):
        code = main(["--input", str(fixture_path("figure_eight_knot")),
                     "--svg", str(tmp_path / "out.svg")])
        assert code == 3

    def test_certificate_failure_exit_2(self, tmp_path, capsys):
        code = main(["--input", str(fixture_path("thrice_punctured_sphere")),
                     "--algorithm", "ep", "--word-bound", "0"])
        assert code == 2
        assert "FAIL" in capsys.readouterr().out

    def test_full_run_exit_0(self, tmp_path, capsys):
        out_json = tmp_path / "out.json"
        out_svg = tmp_path / "out.svg"
        code = main(["--input", str(fixture_path("thrice_punctured_sphere")),
                     "--json", str(out_json), "--svg", str(out_svg)])
        assert code == 0
        assert out_json.exists() and out_svg.exists()
        doc = json.loads(out_json.read_text())
        assert len(doc["cells"]) == 2

    def test_exact_predicates_same_cells(self, tmp_path, report_3ps):
        out_json = tmp_path / "exact.json"
        code = main(["--input", str(fixture_path("thrice_punctured_sphere")),
                     "--algorithm", "ep", "--exact",
                     "--json", str(out_json)])
        assert code == 0
        doc = json.loads(out_json.read_text())
        ref = json.loads(emit(report_3ps, "json"))
        assert doc["cells"] == ref["cells"]
