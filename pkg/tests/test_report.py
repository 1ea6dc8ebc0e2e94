import csv
import hashlib
import io
import json
import os

import pytest

from mitbench.benchmark import CellResult, CircuitClass, VolumetricGrid, aggregate_cell
from mitbench.errors import InvalidInputError, NothingToRenderError
from mitbench.report import (
    EMPTY_COLOUR,
    MANIFEST,
    ReportSpec,
    colour,
    dumps_csv,
    heatmap_name,
    load_results,
    render_heatmap_svg,
    results_document,
    write_results,
)


def record(i, eps):
    return {
        "circuit_id": f"c{i}", "status": "ok", "ideal": 0.5, "noisy": 0.4, "mitigated": 0.5 - 0.1 * eps,
        "errors": {"eps_n": 0.1, "eps_em": 0.1 * eps, "eps_rel": eps}, "sigma_eps": 0.01,
        "variance": 1e-4, "n_cx": 3,
    }


def make_grid(method="zne", empty=()):
    g = VolumetricGrid(method, CircuitClass("random_su4"))
    for n in (2, 3):
        for d in (2, 3):
            if (n, d) in empty:
                g.cells[(n, d)] = CellResult(n, d, [], aggregate_cell([]), "SamplingExhaustedError: none")
                continue
            eps = [0.1 * n * d, 0.5, 3.0]
            g.cells[(n, d)] = CellResult(n, d, [record(i, e) for i, e in enumerate(eps)], aggregate_cell(eps))
    return g


@pytest.mark.parametrize(
    "eps, want",
    [(0.0, "#1a9850"), (0.5, "#fee08b"), (1.0, "#f46d43"), (1.5, "#921820"), (2.0, "#4d0019"), (7.0, "#4d0019"),
     (-1.0, "#1a9850"), (None, EMPTY_COLOUR)],
)
def test_colour_table(eps, want):
    assert colour(eps) == want


def test_failure_ramp_distinct():
    assert colour(1.0 + 1e-9) != colour(1.0)


def test_heatmap_cells():
    g = VolumetricGrid("zne", CircuitClass("pauli_gadget"))
    g.cells[(2, 2)] = CellResult(2, 2, [record(0, 0.0)], {"status": "ok", "median": 0.0, "worst": 0.0})
    g.cells[(2, 3)] = CellResult(2, 3, [record(0, 0.5)], {"status": "ok", "median": 0.5, "worst": 3.0})
    svg = render_heatmap_svg(g)
    assert svg.count('fill="#1a9850" stroke') == 2
    assert 'fill="#fee08b" stroke' in svg
    assert 'fill="#4d0019" stroke' in svg
    assert 'id="legend"' in svg


def test_heatmap_all_empty():
    with pytest.raises(NothingToRenderError):
        render_heatmap_svg(make_grid(empty=[(2, 2), (2, 3), (3, 2), (3, 3)]))


def test_csv_rows_and_empty_marker():
    text = dumps_csv([make_grid(empty=[(3, 3)])])
    rows = list(csv.DictReader(io.StringIO(text)))
    assert len(rows) == 3 * 3 + 1
    empty = [r for r in rows if r["status"] == "empty"]
    assert len(empty) == 1 and empty[0]["n"] == "3" and empty[0]["d"] == "3"
    assert "SamplingExhaustedError" in empty[0]["error"]


def test_csv_row_count_invariant():
    grids = [make_grid("none"), make_grid("zne"), make_grid("cdr")]
    rows = list(csv.DictReader(io.StringIO(dumps_csv(grids))))
    assert len(rows) == sum(len(c.records) for g in grids for c in g.cells.values())


def test_json_only(tmp_path):
    paths = write_results([make_grid()], ReportSpec(str(tmp_path), ("json",)))
    names = sorted(os.path.basename(p) for p in paths)
    assert names == [MANIFEST, "results.json"]


def test_byte_stable(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    grids = [make_grid("none"), make_grid("zne", empty=[(2, 2)])]
    pa = write_results(grids, ReportSpec(str(a)), {"seed": 1})
    pb = write_results(grids, ReportSpec(str(b)), {"seed": 1})
    for x, y in zip(pa, pb):
        assert open(x, "rb").read() == open(y, "rb").read()


def test_manifest_hashes(tmp_path):
    paths = write_results([make_grid()], ReportSpec(str(tmp_path)))
    lines = (tmp_path / MANIFEST).read_text().splitlines()
    listed = {line.split("  ")[1]: line.split("  ")[0] for line in lines}
    for p in paths:
        name = os.path.basename(p)
        if name == MANIFEST:
            continue
        assert listed[name] == hashlib.sha256(open(p, "rb").read()).hexdigest()
    assert heatmap_name(make_grid()) in listed


def test_svg_skips_empty_grid(tmp_path):
    grids = [make_grid("none"), make_grid("zne", empty=[(2, 2), (2, 3), (3, 2), (3, 3)])]
    paths = write_results(grids, ReportSpec(str(tmp_path), ("svg",)))
    assert sorted(os.path.basename(p) for p in paths) == ["heatmap_random_su4_none.svg", MANIFEST]


def test_json_document_and_reload(tmp_path):
    g = make_grid()
    g.cells[(2, 2)].records[0]["variance"] = float("inf")
    write_results([g], ReportSpec(str(tmp_path), ("json",)), {"seed": 3})
    doc, grids = load_results(tmp_path / "results.json")
    assert doc["schema_version"] == 1
    assert doc["config"] == {"seed": 3}
    assert grids[0].cells[(2, 2)].records[0]["variance"] is None
    assert json.dumps(results_document(grids)["grids"], sort_keys=True) == json.dumps(
        results_document([g])["grids"], sort_keys=True).replace("Infinity", "null")


def test_bad_schema(tmp_path):
    (tmp_path / "r.json").write_text('{"schema_version": 99, "grids": []}')
    with pytest.raises(InvalidInputError):
        load_results(tmp_path / "r.json")


def test_report_spec_formats():
    with pytest.raises(InvalidInputError):
        ReportSpec("x", ())
    with pytest.raises(InvalidInputError):
        ReportSpec("x", ("png",))
