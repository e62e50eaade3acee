import json

import numpy as np
import pytest

from lanepaths.config import ConfigError, ToolConfig, parse_config
from lanepaths.documents import (
    DocumentError,
    ProposalSet,
    document_to_graph,
    document_to_proposalset,
    graph_to_document,
    load_graph,
    load_proposals,
    save_graph,
    save_proposals,
)
from lanepaths.graph import LaneGraph
from lanepaths.matching import PathProposal
from lanepaths.synthetic import SyntheticSpec, generate_synthetic


def test_graph_round_trip(tmp_path, diamond):
    path = tmp_path / "g.json"
    save_graph(diamond, path)
    assert load_graph(path) == diamond
    save_graph(load_graph(path), tmp_path / "g2.json")
    assert path.read_bytes() == (tmp_path / "g2.json").read_bytes()


def test_canonical_form_sorted(tmp_path):
    g = LaneGraph({3: (1, 1), 0: (0, 0)}, [(0, 3)], 0, (10, 10))
    doc = graph_to_document(g)
    assert [n["id"] for n in doc["nodes"]] == [0, 3]


def test_empty_graph_round_trip(tmp_path):
    save_graph(LaneGraph.empty((32, 32)), tmp_path / "e.json")
    assert load_graph(tmp_path / "e.json").is_empty()


def base_doc():
    return {
        "schema_version": "1.0",
        "extent": [100, 100],
        "root": 0,
        "nodes": [{"id": 0, "x": 50, "y": 100}, {"id": 1, "x": 50, "y": 50}],
        "edges": [{"src": 0, "dst": 1}],
    }


def test_duplicate_node_id_named():
    doc = base_doc()
    doc["nodes"].append({"id": 1, "x": 1, "y": 1})
    with pytest.raises(DocumentError, match="duplicate node id 1") as exc:
        document_to_graph(doc)
    assert exc.value.where == "nodes[2].id"


def test_missing_root_is_validation_failure():
    doc = base_doc()
    doc["root"] = 9
    with pytest.raises(DocumentError, match="validation failure") as exc:
        document_to_graph(doc)
    assert exc.value.where == "root"


@pytest.mark.parametrize(
    "mutate,where",
    [
        (lambda d: d.update(schema_version="9"), "schema_version"),
        (lambda d: d["nodes"][1].update(x="a"), "nodes[1].x"),
        (lambda d: d["edges"][0].pop("dst"), "edges[0]"),
        (lambda d: d.update(extent=[0, 1]), "extent"),
    ],
)
def test_schema_errors_name_field(mutate, where):
    doc = base_doc()
    mutate(doc)
    with pytest.raises(DocumentError) as exc:
        document_to_graph(doc)
    assert exc.value.where == where


def test_cycle_rejected():
    doc = base_doc()
    doc["edges"].append({"src": 1, "dst": 0})
    with pytest.raises(DocumentError, match="cycle"):
        document_to_graph(doc)


def test_parse_error_has_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "schema_version": "1.0",\n  oops\n}')
    with pytest.raises(DocumentError, match="line 3"):
        load_graph(p)


def test_proposals_round_trip(tmp_path):
    ps = ProposalSet("polyline", 3, (PathProposal(0.25, [(0, 0), (0.5, 0.5), (1, 1)]),))
    save_proposals(ps, tmp_path / "p.json")
    back = load_proposals(tmp_path / "p.json")
    assert back.n_cp == 3 and back.proposals[0].likelihood == 0.25
    np.testing.assert_array_equal(back.proposals[0].control_points, ps.proposals[0].control_points)


def prop_doc(**kw):
    d = {"schema_version": "1.0", "representation": "polyline", "n_cp": 2,
         "proposals": [{"likelihood": 0.5, "points": [[0, 0], [1, 1]]}]}
    d.update(kw)
    return d


def test_proposal_checks():
    with pytest.raises(DocumentError, match="expected 3 points"):
        document_to_proposalset(prop_doc(n_cp=3))
    with pytest.raises(DocumentError, match="likelihood"):
        document_to_proposalset(prop_doc(proposals=[{"likelihood": 2, "points": [[0, 0], [1, 1]]}]))
    with pytest.raises(DocumentError, match="normalised"):
        document_to_proposalset(prop_doc(proposals=[{"likelihood": 1, "points": [[0, 0], [1, 2]]}]))
    # Bezier control points may leave the unit square
    document_to_proposalset(prop_doc(representation="bezier", proposals=[{"likelihood": 1, "points": [[0, 0], [1, 2]]}]))


def test_atomic_write_leaves_no_partial_file(tmp_path, monkeypatch):
    import lanepaths.documents as docs

    target = tmp_path / "g.json"
    target.write_text("old")

    def boom(*a, **k):
        raise OSError("disk full")

    monkeypatch.setattr(docs.os, "replace", boom)
    with pytest.raises(OSError):
        docs.atomic_write_text(target, "new")
    assert target.read_text() == "old"
    assert list(tmp_path.iterdir()) == [target]


# -- config -----------------------------------------------------------------


def test_config_defaults():
    c = ToolConfig()
    assert (c.bezier_degree, c.polyline_points) == (10, 20)
    assert c.metrics().sda_thresholds == (20.0, 50.0)


def test_config_parse():
    c = parse_config("alpha = 2\nd_max = 4.5\nsda_thresholds = [10, 30]\nraster_extent = [64, 32]\n")
    assert c.alpha == 2.0 and c.d_max == 4.5
    assert c.sda_thresholds == (10.0, 30.0) and c.raster_extent == (64, 32)


@pytest.mark.parametrize(
    "text", ["bogus = 1", "p_min = 3", "bezier_degree = 2.5", "[table]\nx = 1", "alpha = ", "alpha = true"]
)
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


# -- synthetic -----------------------------------------------------------------


def test_synthetic_deterministic():
    spec = SyntheticSpec(n_splits=2, depth=3, jitter=1.0)
    a = json.dumps(graph_to_document(generate_synthetic(7, spec)))
    b = json.dumps(graph_to_document(generate_synthetic(7, spec)))
    assert a == b
    assert a != json.dumps(graph_to_document(generate_synthetic(8, spec)))


def test_synthetic_root_bottom_center():
    g = generate_synthetic(0, SyntheticSpec(extent=(200, 120)))
    assert g.position(g.root) == (100.0, 120.0)


@pytest.mark.parametrize("spec", [SyntheticSpec(n_splits=-1), SyntheticSpec(depth=0),
                                  SyntheticSpec(jitter=1e6), SyntheticSpec(extent=(4, 4))])
def test_synthetic_degenerate(spec):
    with pytest.raises(ValueError):
        generate_synthetic(0, spec)
