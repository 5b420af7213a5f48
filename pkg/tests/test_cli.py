import json
from pathlib import Path

import pytest

from querylearn.cli import main

DATA = Path(__file__).resolve().parents[1] / "data"
SCRIPTS = Path(__file__).resolve().parents[1] / "scripts"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestEval:
    RISK = "thr(4; 5*r1, 1*r2, 1*r3, 1*r4, 1*r5, -1*r6)"

    def test_rows(self, capsys, tmp_path):
        scenes = write(tmp_path, "s.txt", "atoms: r1 r2 r3 r4 r5 r6\n1*****\n0****1\n010110\n******\n")
        code, out, _ = run(capsys, "eval", "--query", self.RISK, "--scenes", scenes)
        assert code == 0
        assert out.splitlines() == [
            "1. 1***** witnessed true",
            "2. 0****1 witnessed false",
            "3. 010110 witnessed false",
            f"4. ****** residual {self.RISK}",
        ]

    def test_unknown_atom(self, capsys, tmp_path):
        scenes = write(tmp_path, "s.txt", "atoms: a\n1\n")
        code, _, err = run(capsys, "eval", "--query", "a & b", "--scenes", scenes)
        assert code == 2 and "unknown atom" in err


class TestChain:
    def test_worked_example(self, capsys):
        code, out, _ = run(capsys, "chain", "--kb", DATA / "sculpture.kb", "--query", "broken(sculpture)")
        assert code == 0
        assert out.splitlines()[-1].startswith("3. broken(sculpture) (chaining, 1 & 2,")

    def test_fail(self, capsys):
        code, out, _ = run(capsys, "chain", "--kb", DATA / "sculpture_hit.kb", "--query", "broken(sculpture)")
        assert (code, out) == (1, "Fail\n")

    def test_learning_from_scenes(self, capsys, tmp_path):
        out_file = tmp_path / "r.json"
        code, out, _ = run(
            capsys, "chain", "--kb", DATA / "sculpture_hit.kb", "--query", "broken(sculpture)",
            "--scenes", DATA / "sculpture_hit_scenes.txt", "--mode", "skeptical", "--out", out_file,
        )
        assert code == 0
        assert "hard(floor) (learned)" in out
        payload = json.loads(out_file.read_text())
        assert payload["proof"]["learned"] == ["hard(floor)"]

    def test_sampling_is_seeded(self, capsys, tmp_path):
        dist = write(tmp_path, "d.txt", "atoms: a b g\n1/2 110\n1/2 111\n")
        mask = write(tmp_path, "m.txt", "coin 1/2\n")
        kb = write(tmp_path, "k.kb", "rule a & b => g\n")
        args = ("chain", "--kb", kb, "--query", "g", "--dist", dist, "--mask", mask, "--count", 20, "--seed", 4)
        first = run(capsys, *args)
        assert first[0] == 0 and first == run(capsys, *args)

    def test_unknown_query(self, capsys):
        code, _, err = run(capsys, "chain", "--kb", DATA / "sculpture.kb", "--query", "broken(moon)")
        assert code == 2 and "unknown atom" in err

    def test_conflicting_sources(self, capsys):
        code, _, _ = run(
            capsys, "chain", "--kb", DATA / "sculpture.kb", "--query", "broken(sculpture)",
            "--scenes", DATA / "sculpture_hit_scenes.txt", "--dist", DATA / "small.dist",
        )
        assert code == 2


class TestResolve:
    def test_one_atom(self, capsys):
        code, out, _ = run(capsys, "resolve", "--cnf", DATA / "one_atom.cnf", "--scenes", DATA / "one_atom_scenes.txt")
        assert code == 0
        assert out.splitlines() == ["[]  (cut x)", "  x  (hyp)", "  ~x  (weaken 1)", "learned premises:", "  x"]

    def test_weakening(self, capsys, tmp_path):
        cnf = write(tmp_path, "c.cnf", "c atom 1 a\nc atom 2 b\np cnf 2 1\n1 0\n")
        scenes = write(tmp_path, "s.txt", "atoms: a b\n00\n")
        code, out, _ = run(capsys, "resolve", "--cnf", cnf, "--clause", "a | b", "--scenes", scenes, "--space", 1)
        assert code == 0 and out.startswith("a | b  (weaken 1)")

    def test_none(self, capsys):
        code, out, _ = run(
            capsys, "resolve", "--cnf", DATA / "one_atom.cnf", "--scenes", DATA / "one_atom_scenes.txt", "--space", 1
        )
        assert (code, out) == (1, "none\n")

    def test_json(self, capsys, tmp_path):
        out_file = tmp_path / "p.json"
        run(capsys, "resolve", "--cnf", DATA / "chain3.cnf", "--scenes", DATA / "chain3_scenes.txt", "--out", out_file)
        payload = json.loads(out_file.read_text())
        assert payload["proof"]["root"]["type"] == "cut"
        assert payload["learned"] == ["a", "~a | q"]

    def test_scene_atoms_outside_cnf(self, capsys, tmp_path):
        scenes = write(tmp_path, "s.txt", "atoms: x y\n1 1\n")
        code, _, _ = run(capsys, "resolve", "--cnf", DATA / "one_atom.cnf", "--scenes", scenes)
        assert code == 2


class TestConceal:
    def test_coin(self, capsys):
        code, out, _ = run(
            capsys, "conceal", "--dist", DATA / "small.dist", "--mask", DATA / "coin.mask", "--query", "a | b | c"
        )
        assert code == 0 and out.splitlines()[-1] == "eta = 1/8 (0.125000)"

    def test_nothing_hidden(self, capsys):
        code, out, _ = run(capsys, "conceal", "--dist", DATA / "small.dist", "--mask", DATA / "none.mask", "--query", "a")
        assert out.splitlines()[-1] == "eta = 1 (1.000000)"

    def test_unfalsifiable(self, capsys):
        code, out, _ = run(capsys, "conceal", "--dist", DATA / "small.dist", "--mask", DATA / "coin.mask", "--query", "a | ~a")
        assert "unfalsifiable" in out and "[class never falsified]" in out


class TestSampleSize:
    @pytest.mark.parametrize(
        "argv,m",
        [
            (("chain", "--atoms", 8, "--epsilon", 0.2, "--delta", 0.1, "--eta", 0.5), 190),
            (("res", "--atoms", 4, "--space", 2, "--epsilon", 0.25, "--delta", 0.1, "--eta", "1/4"), 126),
        ],
    )
    def test_values(self, capsys, argv, m):
        code, out, _ = run(capsys, "samplesize", *argv)
        assert code == 0 and out == f"{m}\n"

    def test_bad_range(self, capsys):
        code, _, err = run(capsys, "samplesize", "chain", "--atoms", 4, "--delta", 2)
        assert code == 2 and "delta" in err

    def test_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["samplesize", "lattice"])
        assert exc.value.code == 2


class TestExperiment:
    def spec(self, tmp_path, **extra):
        body = {
            "name": "tiny",
            "fragment": "chain",
            "kb": "rule a & b => g",
            "query": "g",
            "distribution": {"atoms": ["a", "b", "g"], "marginals": [1, 1, "1/2"]},
            "mask": "coin 1/2",
            "trials": 20,
            "samples": 30,
            "seed": 3,
        }
        body.update(extra)
        return write(tmp_path, "e.json", json.dumps(body))

    def test_runs_and_is_deterministic(self, capsys, tmp_path):
        path = self.spec(tmp_path)
        first = run(capsys, "experiment", path, "--summary")
        assert first[0] == 0
        assert "premise guarantee: pass" in first[1]
        assert first == run(capsys, "experiment", path, "--summary")

    def test_bad_spec(self, capsys, tmp_path):
        path = self.spec(tmp_path, fragment="lattice")
        code, _, err = run(capsys, "experiment", path)
        assert code == 2

    def test_shipped_specs_load(self):
        from querylearn.cli import load_trial_spec

        for path in sorted((SCRIPTS / "specs").glob("*.json")):
            spec = load_trial_spec(path)
            assert spec.trials >= 1
