import json
import random

import pytest

from citeforge.bibtex import serialize
from citeforge.cli import main
from citeforge.synth import homepage_misc_entry, random_corpus


@pytest.fixture()
def corpus_file(tmp_path):
    rng = random.Random(600)
    entries = random_corpus(rng, 20) + [homepage_misc_entry(rng)]
    path = tmp_path / "corpus.bib"
    path.write_text(serialize(entries), encoding="utf-8")
    return path


def run(*argv):
    return main([str(a) for a in argv])


def test_parse_writes_canonical_output_and_issues(tmp_path, corpus_file, capsys):
    out = tmp_path / "canonical.bib"
    assert run("parse", "--in", corpus_file, "--out", out) == 0
    assert out.exists()
    assert (tmp_path / "canonical.bib.issues.json").exists()
    assert "parsed 21 entries" in capsys.readouterr().out


def test_parse_missing_input_is_domain_error(tmp_path, capsys):
    code = run("parse", "--in", tmp_path / "nope.bib", "--out", tmp_path / "o.bib")
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_missing_required_flag_exits_2(tmp_path, corpus_file, capsys):
    with pytest.raises(SystemExit) as excinfo:
        run("parse", "--in", corpus_file)
    asser = capsys.readouterr().err
    assert excinfo.value.code == 2
    assert "--out" in asser


def test_unknown_flag_exits_2(corpus_file):
    with pytest.raises(SystemExit) as excinfo:
        run("parse", "--in", corpus_file, "--frobnicate")
    assert excinfo.value.code == 2


def test_clean_drops_homepage_misc(tmp_path, corpus_file, capsys):
    out = tmp_path / "clean.bib"
    assert run("clean", "--in", corpus_file, "--out", out) == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["dropped"] == 1
    assert stats["kept"] == 20


def test_stats_prints_tables(corpus_file, capsys):
    assert run("stats", "--in", corpus_file) == 0
    out = capsys.readouterr().out
    assert "field" in out and "article" in out and "corpus" in out


def test_render_and_annotate(tmp_path, corpus_file):
    # 20 renderable entries; the homepage stub has no title and is skipped
    refs = tmp_path / "refs.txt"
    assert run("render", "--in", corpus_file, "--out", refs, "--style", "author-year-compact") == 0
    assert len(refs.read_text().splitlines()) == 20
    annos = tmp_path / "annos.jsonl"
    assert run("annotate", "--in", corpus_file, "--out", annos) == 0
    rows = [json.loads(l) for l in annos.read_text().splitlines()]
    assert len(rows) == 20 * 10
    assert set(rows[0]) == {"id", "style", "bibRef", "annoRef"}


def test_split_is_deterministic_across_runs(tmp_path, corpus_file):
    ds = tmp_path / "ds.jsonl"
    assert run("build", "--in", corpus_file, "--out", ds) == 0
    m1, m2 = tmp_path / "m1.json", tmp_path / "m2.json"
    assert run("split", "--in", ds, "--seed", 42, "--out", m1) == 0
    assert run("split", "--in", ds, "--seed", 42, "--out", m2) == 0
    assert m1.read_text() == m2.read_text()
    manifest = json.loads(m1.read_text())
    assert set(manifest) == {"seed", "train_ids", "eval_ids"}


def test_full_chain_and_manifests(tmp_path, corpus_file, capsys):
    ds = tmp_path / "ds.jsonl"
    split = tmp_path / "split.json"
    model = tmp_path / "model.json"
    tagged = tmp_path / "tagged.jsonl"
    report = tmp_path / "report.json"

    assert run("build", "--in", corpus_file, "--out", ds, "--chunk", 7) == 0
    build_stats = json.loads(capsys.readouterr().out)
    assert build_stats["citations"] == build_stats["records"] * 10

    assert run("split", "--in", ds, "--seed", 42, "--out", split) == 0
    assert run("train", "--in", ds, "--split", split, "--out", model, "--alpha", 0.1) == 0
    assert run("tag", "--in", ds, "--split", split, "--model", model, "--out", tagged) == 0
    capsys.readouterr()
    assert (
        run("evaluate", "--in", tagged, "--dataset", ds, "--split", split, "--out", report)
        == 0
    )
    text = capsys.readouterr().out
    assert "micro" in text
    data = json.loads(report.read_text())
    assert 0.0 <= data["overall"]["f1"] <= 1.0
    assert data["overall"]["f1"] > 0.3  # trained tagger is far above chance

    for produced in (ds, split, model, tagged, report):
        manifest_path = produced.parent / (produced.name + ".manifest.json")
        assert manifest_path.exists(), produced
        manifest = json.loads(manifest_path.read_text())
        assert manifest["subcommand"] in {
            "build", "split", "train", "tag", "evaluate",
        }
        assert manifest["output_digests"]


def test_evaluate_perfect_tags_score_one(tmp_path, corpus_file, capsys):
    # tag the dataset with the ground-truth fields and expect F1 = 1
    from citeforge.dataset import load_jsonl
    from citeforge.evaluate import ground_truth_fields

    ds = tmp_path / "ds.jsonl"
    assert run("build", "--in", corpus_file, "--out", ds) == 0
    tagged = tmp_path / "tagged.jsonl"
    with open(tagged, "w", encoding="utf-8") as fh:
        for record in load_jsonl(ds):
            for cit in record.citations:
                fields = ground_truth_fields(cit["annoRef"])
                fh.write(
                    json.dumps(
                        {
                            "id": record.id,
                            "style": cit["style"],
                            "fields": [
                                {"label": f.label, "value": f.value} for f in fields
                            ],
                        }
                    )
                    + "\n"
                )
    report = tmp_path / "report.json"
    capsys.readouterr()
    assert run("evaluate", "--in", tagged, "--dataset", ds, "--out", report) == 0
    data = json.loads(report.read_text())
    assert data["overall"]["f1"] == pytest.approx(1.0)


def test_tag_plain_text_references(tmp_path, corpus_file):
    ds = tmp_path / "ds.jsonl"
    model = tmp_path / "model.json"
    assert run("build", "--in", corpus_file, "--out", ds) == 0
    assert run("train", "--in", ds, "--out", model) == 0
    refs = tmp_path / "refs.txt"
    refs.write_text("Argon C, McLaughlin SW. 2002. A parallel decoder. IEEE.\n")
    tagged = tmp_path / "tagged.jsonl"
    assert run("tag", "--in", refs, "--model", model, "--out", tagged) == 0
    row = json.loads(tagged.read_text().splitlines()[0])
    assert set(row) == {"reference", "fields", "log_prob"}


def test_env_variable_override(tmp_path, corpus_file, monkeypatch):
    ds = tmp_path / "ds.jsonl"
    assert run("build", "--in", corpus_file, "--out", ds) == 0
    out_env = tmp_path / "m_env.json"
    monkeypatch.setenv("CITEFORGE_SEED", "99")
    assert run("split", "--in", ds, "--out", out_env) == 0
    monkeypatch.delenv("CITEFORGE_SEED")
    out_flag = tmp_path / "m_flag.json"
    assert run("split", "--in", ds, "--seed", 99, "--out", out_flag) == 0
    assert json.loads(out_env.read_text()) == json.loads(out_flag.read_text())


def test_config_file_supplies_flags(tmp_path, corpus_file):
    ds = tmp_path / "ds.jsonl"
    assert run("build", "--in", corpus_file, "--out", ds) == 0
    config = tmp_path / "cfg.json"
    out = tmp_path / "m.json"
    config.write_text(json.dumps({"in": str(ds), "seed": 7, "out": str(out)}))
    assert run("split", "--config", config) == 0
    assert json.loads(out.read_text())["seed"] == 7


def test_flag_beats_env_and_config(tmp_path, corpus_file, monkeypatch):
    ds = tmp_path / "ds.jsonl"
    assert run("build", "--in", corpus_file, "--out", ds) == 0
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"seed": 1}))
    monkeypatch.setenv("CITEFORGE_SEED", "2")
    out = tmp_path / "m.json"
    assert run("split", "--in", ds, "--seed", 3, "--config", config, "--out", out) == 0
    assert json.loads(out.read_text())["seed"] == 3


def test_inputs_never_mutated(tmp_path, corpus_file):
    before = corpus_file.read_bytes()
    ds = tmp_path / "ds.jsonl"
    assert run("build", "--in", corpus_file, "--out", ds) == 0
    assert run("stats", "--in", corpus_file) == 0
    assert corpus_file.read_bytes() == before


def test_harvest_subcommand_with_fixture(tmp_path, capsys):
    from citeforge.fixture import FixtureServer

    with FixtureServer() as server:
        out = tmp_path / "h.bib"
        code = run(
            "harvest",
            "--url-template", server.url_template(),
            "--id-start", 1, "--id-end", 4,
            "--td", 5, "--rid", 0,
            "--out", out,
        )
    assert code == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["entries"] == 4
    assert out.exists()
    assert (tmp_path / "h.bib.checkpoint.json").exists()


def test_harvest_refuses_external_host(tmp_path, capsys):
    code = run(
        "harvest",
        "--url-template", "https://scholar.google.com/{id}",
        "--id-end", 3, "--out", tmp_path / "h.bib",
    )
    assert code == 1
    assert "non-local" in capsys.readouterr().err
