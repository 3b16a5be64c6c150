# SPDX-License-Identifier: Apache-2.0
# Copyright (C) nexB Inc. and others
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
# See https://github.com/aboutcode-org/pyrkha for support or download.
# See https://aboutcode.org for more information about nexB OSS projects.

import json
import os
import unittest

from click.testing import CliRunner

from pyrkha.cli import EXIT_CONFIG_ERROR
from pyrkha.cli import EXIT_RESOURCE_CAP
from pyrkha.cli import ExperimentConfig
from pyrkha.cli import cli
from pyrkha.cli import render_csv
from pyrkha.weight_analysis import CERTIFIED

SMALL_ALGEBRA = dict(window=8, box=4, trials=20, bandwidth=32)


def run(args, config=None):
    """
    Return the click Result of running the ``args`` command line, with a
    ``config`` mapping written to a config file if provided.
    """
    runner = CliRunner()
    with runner.isolated_filesystem():
        if config is not None:
            with open("config.json", "w") as out:
                json.dump(config, out)
            args = list(args) + ["--config", "config.json"]
        return runner.invoke(cli, args, catch_exceptions=False)


def csv_rows(text):
    """
    Return a tuple of (comments, header, rows of floats) from CSV ``text``.
    """
    lines = text.splitlines()
    comments = [line[2:] for line in lines if line.startswith("# ")]
    data = [line for line in lines if not line.startswith("#")]
    header = data[0].split(",")
    rows = [[float(v) for v in line.split(",")] for line in data[1:]]
    return comments, header, rows


class TestConfig(unittest.TestCase):
    def test_defaults(self):
        config = ExperimentConfig.load()
        assert config.window == 32
        assert config.get_weight().to_dict()["family"] == "subexponential"

    def test_overrides_skip_none(self):
        config = ExperimentConfig.load(None, window=None, seed=3)
        assert config.window == 32
        assert config.seed == 3

    def test_explicit_radius(self):
        config = ExperimentConfig.load(None, radius=12)
        assert config.get_radius(config.get_weight()) == 12

    def test_render_csv(self):
        text = render_csv(["a comment"], ["x", "y"], [[0.5, 1.0]])
        assert text == "# a comment\nx,y\n0.5,1\n"


class TestErrors(unittest.TestCase):
    def test_unknown_config_key(self):
        result = run(["weight-report"], config=dict(windwo=8))
        assert result.exit_code == EXIT_CONFIG_ERROR
        assert "windwo" in result.output

    def test_invalid_weight(self):
        result = run(["weight-report"], config=dict(weight=dict(family="gaussian")))
        assert result.exit_code == EXIT_CONFIG_ERROR

    def test_unreadable_config(self):
        runner = CliRunner()
        with runner.isolated_filesystem():
            with open("config.json", "w") as out:
                out.write("{not json")
            result = runner.invoke(cli, ["kernel", "--config", "config.json"])
        assert result.exit_code == EXIT_CONFIG_ERROR

    def test_invalid_settings(self):
        result = run(["kernel"], config=dict(settings=dict(max_grid=10)))
        assert result.exit_code == EXIT_CONFIG_ERROR

    def test_invalid_flag_value(self):
        result = run(["weight-report", "--window", "0"])
        assert result.exit_code == EXIT_CONFIG_ERROR

    def test_resource_cap(self):
        config = dict(window=16, settings=dict(max_lattice_points=10))
        result = run(["weight-report"], config=config)
        assert result.exit_code == EXIT_RESOURCE_CAP

    def test_unwritable_output(self):
        runner = CliRunner()
        with runner.isolated_filesystem():
            result = runner.invoke(cli, ["kernel", "--out", "missing/dir/kernel.csv"])
        assert result.exit_code == EXIT_CONFIG_ERROR
        assert "Cannot write output" in result.output

    def test_help(self):
        result = run(["mmd", "-h"])
        assert result.exit_code == 0
        assert "--trunc-eps" in result.output


class TestWeightReport(unittest.TestCase):
    def test_subexponential_weight_is_certified(self):
        result = run(["weight-report", "--window", "16"])
        assert result.exit_code == 0, result.output
        report = json.loads(result.output)
        assert report["subconvolutivity"]["verdict"] == CERTIFIED
        assert len(report["subadditivity"]) == 2
        assert len(report["submultiplicativity"]) == 1
        assert report["weight"]["p"] == 0.5


class TestAlgebra(unittest.TestCase):
    def test_report(self):
        result = run(["algebra"], config=SMALL_ALGEBRA)
        assert result.exit_code == 0, result.output
        report = json.loads(result.output)
        assert report["verdict"] == CERTIFIED
        assert report["max_pair_ratio"] <= report["banach_constant"]

        inversions = {e["name"]: e for e in report["inversions"]}
        assert inversions["cosine-bump"]["outcome"] == "converged"
        assert inversions["character"]["outcome"] == "converged"
        assert inversions["vanishing-cosine"]["outcome"] == "not-invertible"

        roots = {e["name"]: e for e in report["square_roots"]}
        assert roots["double-cosine"]["outcome"] == "converged"
        assert roots["sign-changing"]["outcome"] == "domain-error"
        assert roots["character"]["outcome"] == "domain-error"

        names = [s["name"] for s in report["spectrum"]]
        assert "character" not in names
        for spectrum in report["spectrum"]:
            *circle, low, high = spectrum["probes"]
            assert all(p["invertible"] for p in circle)
            assert not low["invertible"]
            assert not high["invertible"]

    def test_same_seed_same_output(self):
        first = run(["algebra", "--seed", "7"], config=SMALL_ALGEBRA)
        second = run(["algebra", "--seed", "7"], config=SMALL_ALGEBRA)
        assert first.exit_code == 0
        assert first.output == second.output
        third = run(["algebra", "--seed", "8"], config=SMALL_ALGEBRA)
        assert json.loads(third.output)["max_pair_ratio"] != json.loads(first.output)[
            "max_pair_ratio"
        ]


class TestSpectrum(unittest.TestCase):
    def test_configured_probes(self):
        config = dict(
            bandwidth=64,
            functions=[dict(name="character", coeffs=[dict(gamma=[2], re=1.0)])],
            probes=[dict(re=0.0), dict(re=1.0), dict(re=0.0, im=3.0)],
        )
        result = run(["spectrum"], config=config)
        assert result.exit_code == 0, result.output
        report = json.loads(result.output)
        assert report["function"] == "character"
        assert [p["invertible"] for p in report["probes"]] == [True, False, True]

    def test_default_probes(self):
        result = run(["spectrum"], config=dict(bandwidth=32))
        assert result.exit_code == 0, result.output
        probes = json.loads(result.output)["probes"]
        assert len(probes) == 22


class TestKernel(unittest.TestCase):
    def test_csv(self):
        result = run(["kernel"], config=dict(grid=8, radius=16))
        assert result.exit_code == 0, result.output
        comments, header, rows = csv_rows(result.output)
        assert header == ["x", "l", "err"]
        assert "radius: 16" in comments
        assert len(rows) == 8
        assert [r[0] for r in rows] == [i / 8 for i in range(8)]
        # the shape function is even and largest at 0
        assert abs(rows[1][1] - rows[7][1]) < 1e-13
        assert max(r[1] for r in rows) == rows[0][1]

    def test_truncation_from_the_tail_mass(self):
        result = run(["kernel", "--trunc-eps", "1e-6"], config=dict(grid=4))
        assert result.exit_code == 0, result.output
        _, _, rows = csv_rows(result.output)
        assert all(r[2] <= 1e-6 for r in rows)

    def test_two_dimensions(self):
        weight = dict(family="polynomial", s=3, d=2)
        result = run(["kernel"], config=dict(grid=4, radius=8, weight=weight))
        assert result.exit_code == 0, result.output
        _, header, rows = csv_rows(result.output)
        assert header == ["x1", "x2", "l", "err"]
        assert len(rows) == 16


class TestMarkov(unittest.TestCase):
    def test_csv(self):
        config = dict(taus=[0.5, 1.0, 2.0], window=8, grid=32, radius=16)
        result = run(["markov"], config=config)
        assert result.exit_code == 0, result.output
        _, header, rows = csv_rows(result.output)
        assert header == ["tau", "C_meas", "gridmin", "massdefect", "semigroupdefect"]
        assert [r[0] for r in rows] == [0.5, 1.0, 2.0]
        for _, constant, grid_min, mass_defect, semigroup_defect in rows:
            assert constant >= 1
            assert grid_min > 0
            assert mass_defect == 0
            assert semigroup_defect < 1e-13

    def test_invalid_family(self):
        result = run(["markov"], config=dict(family=dict(q=1)))
        assert result.exit_code == EXIT_CONFIG_ERROR


class TestMmd(unittest.TestCase):
    def test_measures(self):
        dirac = dict(atoms=[dict(x=[0.1], mass=1.0)])
        result = run(["mmd"], config=dict(radius=8, measures=[dirac, dirac]))
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["mmd"] == 0.0

    def test_invalid_measures(self):
        measure = dict(atoms=[dict(x=[0.1], mass=0.5)])
        result = run(["mmd"], config=dict(radius=8, measures=[measure, measure]))
        assert result.exit_code == EXIT_CONFIG_ERROR

    def test_separation_sweep(self):
        result = run(["mmd"])
        assert result.exit_code == 0, result.output
        _, header, rows = csv_rows(result.output)
        assert header == ["separation", "mmd"]
        values = [r[1] for r in rows]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_output_file(self):
        runner = CliRunner()
        with runner.isolated_filesystem():
            result = runner.invoke(cli, ["mmd", "--out", "mmd.csv"], catch_exceptions=False)
            assert result.exit_code == 0
            assert result.output == ""
            assert os.path.exists("mmd.csv")
            with open("mmd.csv") as inp:
                assert inp.readline().startswith("# weight:")
