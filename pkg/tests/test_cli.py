import json

import pytest

from lumpkit import cli

SCAFFOLD_111 = """\
node A { sites: b }
node B { sites: a, c }
node C { sites: b }
rule r1: A(b), B(a) -> A(b!1), B(a!1) @ 1.0
rule r2: B(c), C(b) -> B(c!1), C(b!1) @ 1.0
rule r3: A(b!1), B(a!1) -> A(b), B(a) @ 1.0
rule r4: B(c!1), C(b!1) -> B(c), C(b) @ 1.0
init: A*1, B*1, C*1
"""

NO_RULES = "node A { sites: b }\ninit: A*3\n"


@pytest.fixture
def scaffold_files(tmp_path):
    model = tmp_path / "scaffold.model"
    model.write_text(SCAFFOLD_111)
    chain = tmp_path / "chain.json"
    assert cli.main(["explore", str(model), "--out", str(chain)]) == 0
    return model, chain


def scaffold_131(tmp_path):
    model = tmp_path / "s131.model"
    assert cli.main(["casestudy", "scaffold", "--na", "1", "--nb", "3",
                     "--nc", "1", "--out", str(model)]) == 0
    chain = tmp_path / "s131.json"
    assert cli.main(["explore", str(model), "--out", str(chain)]) == 0
    return model, chain


class TestExplore:
    def test_four_states(self, scaffold_files):
        _, chain = scaffold_files
        data = json.loads(chain.read_text())
        assert len(data["states"]) == 4
        assert data["kind"] == "rate"

    def test_single_state_without_rules(self, tmp_path):
        model = tmp_path / "empty.model"
        model.write_text(NO_RULES)
        out = tmp_path / "chain.json"
        assert cli.main(["explore", str(model), "--out", str(out)]) == 0
        assert len(json.loads(out.read_text())["states"]) == 1

    def test_deterministic_output(self, tmp_path):
        model = tmp_path / "scaffold.model"
        model.write_text(SCAFFOLD_111)
        out1 = tmp_path / "a.json"
        out2 = tmp_path / "b.json"
        cli.main(["explore", str(model), "--out", str(out1)])
        cli.main(["explore", str(model), "--out", str(out2)])
        assert out1.read_bytes() == out2.read_bytes()

    def test_cap_exit_code(self, tmp_path, capsys):
        model = tmp_path / "scaffold.model"
        model.write_text(SCAFFOLD_111)
        out = tmp_path / "chain.json"
        code = cli.main(["explore", str(model), "--out", str(out),
                         "--max-states", "2"])
        assert code == 2
        assert "max_states" in capsys.readouterr().err

    def test_cap_from_env(self, tmp_path, monkeypatch):
        monkeypatch.setenv("LUMPKIT_MAX_STATES", "2")
        model = tmp_path / "scaffold.model"
        model.write_text(SCAFFOLD_111)
        out = tmp_path / "chain.json"
        assert cli.main(["explore", str(model), "--out", str(out)]) == 2

    def test_parse_error_exit_code(self, tmp_path, capsys):
        model = tmp_path / "broken.model"
        model.write_text("definitely not a model\n")
        assert cli.main(["explore", str(model), "--out",
                         str(tmp_path / "x.json")]) == 1
        assert "error" in capsys.readouterr().err

    def test_missing_file_exit_code(self, tmp_path):
        assert cli.main(["explore", str(tmp_path / "missing.model"),
                         "--out", str(tmp_path / "x.json")]) == 1

    def test_dot_export(self, scaffold_files, tmp_path):
        model, _ = scaffold_files
        chain = tmp_path / "c2.json"
        dot = tmp_path / "c2.dot"
        assert cli.main(["explore", str(model), "--out", str(chain),
                         "--dot", str(dot)]) == 0
        assert dot.read_text().startswith("digraph")


class TestCheck:
    def test_phi2_holds(self, scaffold_files, capsys):
        model, chain = scaffold_files
        code = cli.main(["check", str(chain), "--phi", "scaffold-phi2",
                         "--model", str(model)])
        assert code == 0
        assert "holds: True" in capsys.readouterr().out

    def test_singleton_partition_holds(self, scaffold_files, tmp_path, capsys):
        _, chain = scaffold_files
        states = json.loads(chain.read_text())["states"]
        part = tmp_path / "part.json"
        part.write_text(json.dumps({"blocks": [[s] for s in states]}))
        code = cli.main(["check", str(chain), "--partition", str(part)])
        assert code == 0
        assert "0.000e+00" in capsys.readouterr().out

    def test_polymer_phi3_violated(self, tmp_path, capsys):
        model = tmp_path / "poly.model"
        assert cli.main(["casestudy", "polymer", "--n", "2", "--rates",
                         "1,1,2,1", "--out", str(model)]) == 0
        chain = tmp_path / "poly.json"
        assert cli.main(["explore", str(model), "--out", str(chain)]) == 0
        code = cli.main(["check", str(chain), "--phi", "polymer-phi3",
                         "--model", str(model)])
        assert code == 3

    def test_phi_without_model_is_input_error(self, scaffold_files):
        _, chain = scaffold_files
        assert cli.main(["check", str(chain), "--phi", "scaffold-phi2"]) == 1


class TestAggregateAndDistributions:
    def test_aggregate_then_stationary(self, tmp_path, capsys):
        model, chain = scaffold_131(tmp_path)
        agg = tmp_path / "agg.json"
        part = tmp_path / "part.json"
        assert cli.main(["aggregate", str(chain), "--phi", "scaffold-phi2",
                         "--model", str(model), "--out", str(agg),
                         "--partition-out", str(part)]) == 0
        mu = tmp_path / "mu.csv"
        assert cli.main(["stationary", str(agg), "--out", str(mu)]) == 0
        weights = [float(line.split(",")[1])
                   for line in mu.read_text().strip().splitlines()]
        assert abs(sum(weights) - 1.0) < 1e-12

    def test_aggregate_violation_exit_code(self, tmp_path):
        model = tmp_path / "poly.model"
        cli.main(["casestudy", "polymer", "--n", "2", "--out", str(model)])
        chain = tmp_path / "poly.json"
        cli.main(["explore", str(model), "--out", str(chain)])
        assert cli.main(["aggregate", str(chain), "--phi", "polymer-phi3",
                         "--model", str(model),
                         "--out", str(tmp_path / "agg.json")]) == 3

    def test_deaggregate_point_mass_on_nine_state_block(self, tmp_path):
        model, chain = scaffold_131(tmp_path)
        agg = tmp_path / "agg.json"
        part = tmp_path / "part.json"
        cli.main(["aggregate", str(chain), "--phi", "scaffold-phi2",
                  "--model", str(model), "--out", str(agg),
                  "--partition-out", str(part)])
        blocks = json.loads(part.read_text())["blocks"]
        nine = next(i for i, b in enumerate(blocks) if len(b) == 9)
        blockdist = tmp_path / "blocks.csv"
        blockdist.write_text("".join(
            f"block{i},{1.0 if i == nine else 0.0}\n"
            for i in range(len(blocks))))
        out = tmp_path / "lifted.csv"
        assert cli.main(["deaggregate", str(blockdist), "--chain", str(chain),
                         "--partition", str(part), "--out", str(out)]) == 0
        weights = sorted(float(line.split(",")[1])
                         for line in out.read_text().strip().splitlines())
        assert weights[-9:] == [pytest.approx(1 / 9)] * 9
        assert all(w == 0.0 for w in weights[:-9])

    def test_transient_t0_respectful_echoes_lift(self, tmp_path):
        model, chain = scaffold_131(tmp_path)
        agg = tmp_path / "agg.json"
        part = tmp_path / "part.json"
        cli.main(["aggregate", str(chain), "--phi", "scaffold-phi2",
                  "--model", str(model), "--out", str(agg),
                  "--partition-out", str(part)])
        blocks = json.loads(part.read_text())["blocks"]
        blockdist = tmp_path / "blocks.csv"
        blockdist.write_text("".join(
            f"block{i},{1.0 if i == 0 else 0.0}\n" for i in range(len(blocks))))
        out = tmp_path / "dist"
        assert cli.main(["transient", str(chain), "--init",
                         f"respectful:{blockdist}", "--partition", str(part),
                         "--t", "0", "--out", str(out)]) == 0
        produced = (tmp_path / "dist_t0.csv").read_text().strip().splitlines()
        by_state = {line.split(",")[0]: float(line.split(",")[1])
                    for line in produced}
        for key in blocks[0]:
            assert by_state[key] == pytest.approx(1.0 / len(blocks[0]))

    def test_transient_uniform_init(self, scaffold_files, tmp_path):
        _, chain = scaffold_files
        out = tmp_path / "dist"
        assert cli.main(["transient", str(chain), "--init", "uniform",
                         "--t", "0.5,2", "--out", str(out)]) == 0
        assert (tmp_path / "dist_t0.5.csv").exists()
        assert (tmp_path / "dist_t2.csv").exists()


class TestCasestudyCommand:
    def test_scaffold_model_parses_back(self, tmp_path):
        model = tmp_path / "m.model"
        assert cli.main(["casestudy", "scaffold", "--na", "2", "--nb", "2",
                         "--nc", "2", "--rates", "1,2,3,4",
                         "--out", str(model)]) == 0
        text = model.read_text()
        assert "rule r1" in text and "init: A*2, B*2, C*2" in text

    def test_bad_rates_rejected(self, tmp_path):
        with pytest.raises(SystemExit):
            cli.main(["casestudy", "polymer", "--n", "1", "--rates", "1,2",
                      "--out", str(tmp_path / "m.model")])
