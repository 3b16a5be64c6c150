# SPDX-License-Identifier: Apache-2.0
# Copyright (C) nexB Inc. and others
# See http://www.apache.org/licenses/LICENSE-2.0 for the license text.
# See https://github.com/aboutcode-org/pyrkha for support or download.
# See https://aboutcode.org for more information about nexB OSS projects.
#

"""
Command line experiments. Each command reads an optional JSON config file,
applies the flag overrides and writes a JSON report or a CSV sweep to
``--out`` or to stdout.

Exit codes are 0 on success, 2 for an invalid config and 3 when a resource
cap is exceeded.
"""

import json
import math
import sys

import attr
import click
import numpy as np

from pyrkha import DEFAULT_SETTINGS
from pyrkha import DomainError
from pyrkha import NotInvertible
from pyrkha import ResourceCapExceeded
from pyrkha import RkhaError
from pyrkha import Settings
from pyrkha import UnsupportedOperation
from pyrkha.algebra import FourierPoly
from pyrkha.algebra import banach_constant
from pyrkha.algebra import hnorm
from pyrkha.algebra import invert
from pyrkha.algebra import multiply
from pyrkha.algebra import solver_grid_size
from pyrkha.algebra import spectrum_probe
from pyrkha.algebra import sqrt_positive
from pyrkha.embedding import AtomicMeasure
from pyrkha.embedding import mmd
from pyrkha.kernel import shape_function_many
from pyrkha.markov import MarkovFamily
from pyrkha.markov import markov_checks
from pyrkha.torus import TorusPoint
from pyrkha.torus import grid_array
from pyrkha.weight_analysis import subadditivity_report
from pyrkha.weight_analysis import subconvolutivity_report
from pyrkha.weight_analysis import submultiplicativity_report
from pyrkha.weights import truncation_radius
from pyrkha.weights import weight_from_dict

EXIT_CONFIG_ERROR = 2
EXIT_RESOURCE_CAP = 3

DEFAULT_WEIGHT = dict(family="subexponential", tau=1.0, p=0.5, d=1, norm="euclidean")

# real functions of the circle used when a config has no "functions"
DEFAULT_FUNCTIONS = (
    dict(name="cosine-bump", coeffs={(0,): 1.0, (1,): 0.25, (-1,): 0.25}),
    dict(name="character", coeffs={(1,): 1.0}),
    dict(
        name="double-cosine",
        coeffs={(0,): 2.0, (1,): 0.5, (-1,): 0.5, (2,): 0.25, (-2,): 0.25},
    ),
    dict(name="vanishing-cosine", coeffs={(1,): 0.5, (-1,): 0.5}),
    dict(name="sign-changing", coeffs={(0,): 0.2, (1,): 0.25, (-1,): 0.25}),
)


class ConfigError(RkhaError, ValueError):
    """
    Raised for an unreadable or invalid experiment config.
    """


@attr.attributes(frozen=True)
class ExperimentConfig:
    """
    The parameters of an experiment. Every command uses the fields it needs
    and ignores the others.
    """

    weight = attr.ib(
        default=attr.Factory(lambda: dict(DEFAULT_WEIGHT)),
        metadata=dict(help="Weight as a JSON object with a family and its parameters."),
    )
    window = attr.ib(
        default=32,
        metadata=dict(help="Radius of the window of frequencies where constants are measured."),
    )
    trunc_eps = attr.ib(
        default=1e-12,
        metadata=dict(help="Tail mass that sets the truncation radius of kernel sums."),
    )
    radius = attr.ib(
        default=None,
        metadata=dict(help="Explicit truncation radius. Overrides trunc_eps."),
    )
    grid = attr.ib(default=64, metadata=dict(help="Grid points per dimension."))
    taus = attr.ib(
        default=(0.5, 1.0, 2.0),
        converter=tuple,
        metadata=dict(help="Markov times of a sweep."),
    )
    family = attr.ib(
        default=attr.Factory(lambda: dict(p=1.0, d=1, norm="euclidean")),
        metadata=dict(help="Markov family as a JSON object with p, d and norm."),
    )
    tolerance = attr.ib(default=1e-6, metadata=dict(help="Stabilization tolerance."))
    seed = attr.ib(default=0, metadata=dict(help="Seed of the random number generator."))
    box = attr.ib(default=8, metadata=dict(help="Box radius of random functions."))
    trials = attr.ib(default=1000, metadata=dict(help="Number of random pairs."))
    bandwidth = attr.ib(default=64, metadata=dict(help="Bandwidth of inverses and roots."))
    solver_tol = attr.ib(default=1e-10, metadata=dict(help="Target residual of solvers."))
    functions = attr.ib(
        default=None,
        metadata=dict(help="List of {name, coeffs: [{gamma, re, im}]} test functions."),
    )
    probes = attr.ib(default=None, metadata=dict(help="List of {re, im} spectrum probes."))
    measures = attr.ib(default=None, metadata=dict(help="Pair of measures {atoms: [{x, mass}]}."))
    separations = attr.ib(default=None, metadata=dict(help="Dirac separations of a sweep."))
    out = attr.ib(default=None, metadata=dict(help="Output file path."))
    settings = attr.ib(
        default=None,
        metadata=dict(help="Numeric settings overrides as a JSON object."),
    )

    @classmethod
    def load(cls, location=None, **overrides):
        """
        Return an ExperimentConfig from the JSON file at ``location`` with
        the not-None ``overrides`` applied.
        """
        data = {}
        if location:
            try:
                with open(location) as inp:
                    data = json.load(inp)
            except (OSError, ValueError) as e:
                raise ConfigError(f"Cannot read config file {location!r}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Config must be a JSON object: {location!r}")
        known = {a.name for a in attr.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown config keys: {', '.join(unknown)}")
        data.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**data)

    def get_settings(self):
        if not self.settings:
            return DEFAULT_SETTINGS
        try:
            return Settings.from_dict(self.settings)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid settings: {e}") from e

    def get_weight(self):
        return weight_from_dict(self.weight)

    def get_radius(self, weight):
        if self.radius is not None:
            return int(self.radius)
        return truncation_radius(weight, self.trunc_eps, settings=self.get_settings())

    def get_functions(self, weight):
        """
        Return a list of (name, FourierPoly) for the configured functions.
        """
        specs = self.functions
        if specs is None:
            if weight.d != 1:
                raise ConfigError("Default test functions are on the circle: set functions")
            return [(s["name"], FourierPoly(s["coeffs"], weight)) for s in DEFAULT_FUNCTIONS]
        functions = []
        for index, spec in enumerate(specs):
            try:
                coeffs = [(c["gamma"], complex(c["re"], c.get("im", 0.0))) for c in spec["coeffs"]]
            except (KeyError, TypeError) as e:
                raise ConfigError(f"Invalid function #{index}: {spec!r}") from e
            functions.append((spec.get("name", f"f{index}"), FourierPoly(coeffs, weight)))
        return functions


def format_float(value):
    """
    Return ``value`` in full double precision for CSV output.

    >>> format_float(0.1)
    '0.10000000000000001'
    """
    return "%.17g" % value


def render_csv(comments, columns, rows):
    """
    Return CSV text with ``comments`` as ``#`` lines, a header of ``columns``
    and ``rows`` of floats.
    """
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(columns))
    lines.extend(",".join(format_float(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def render_json(data):
    return json.dumps(data, indent=2) + "\n"


def emit(text, location):
    if location:
        with open(location, "w") as out:
            out.write(text)
    else:
        click.echo(text, nl=False)


def run_experiment(ctx, config_location, overrides, experiment):
    """
    Load the config, run the ``experiment`` callable with it and map library
    errors to exit codes.
    """
    try:
        config = ExperimentConfig.load(config_location, **overrides)
        text = experiment(config)
    except ResourceCapExceeded as e:
        click.echo(f"Error: resource cap exceeded: {e}", err=True)
        ctx.exit(EXIT_RESOURCE_CAP)
    except (ValueError, TypeError, UnsupportedOperation) as e:
        raise click.UsageError(str(e), ctx=ctx) from e
    try:
        emit(text, config.out)
    except OSError as e:
        raise click.UsageError(f"Cannot write output: {e}", ctx=ctx) from e


def experiment_options(function):
    """
    Decorate a command ``function`` with the options shared by all the
    commands.
    """
    options = [
        click.option(
            "--config",
            "config_location",
            type=click.Path(exists=True, readable=True, path_type=str, dir_okay=False),
            help="Path to a JSON experiment config file.",
        ),
        click.option(
            "--out",
            type=click.Path(path_type=str, dir_okay=False),
            help="Path to the output file. Default to stdout.",
        ),
        click.option("--seed", type=int, help="Seed of the random number generator."),
        click.option("--window", type=click.IntRange(min=1), help="Window radius."),
        click.option(
            "--trunc-eps",
            type=click.FloatRange(min=0, min_open=True),
            help="Tail mass that sets the truncation radius.",
        ),
        click.help_option("-h", "--help"),
    ]
    for option in reversed(options):
        function = option(function)
    return function


@click.group()
@click.help_option("-h", "--help")
def cli():
    """
    Reproducing kernel Hilbert algebra experiments on the d-torus.
    """


@cli.command("weight-report")
@experiment_options
@click.pass_context
def weight_report(ctx, config_location, **overrides):
    """
    Check that a weight is subconvolutive, subadditive and submultiplicative
    on a window and write a JSON report.
    """
    run_experiment(ctx, config_location, overrides, weight_report_experiment)


def weight_report_experiment(config):
    settings = config.get_settings()
    weight = config.get_weight()
    report = subconvolutivity_report(
        weight, config.window, tol=config.tolerance, settings=settings
    )
    pairs = []
    for check, exponent in (
        (subadditivity_report, 1.0),
        (subadditivity_report, 0.5),
        (submultiplicativity_report, 0.5),
    ):
        try:
            pairs.append(check(weight, config.window, exponent=exponent, settings=settings))
        except UnsupportedOperation as e:
            pairs.append(None)
            click.echo(f"Warning: {e}", err=True)
    data = dict(
        weight=weight.to_dict(),
        subconvolutivity=report.to_dict(),
        subadditivity=[p.to_dict() for p in pairs[:2] if p],
        submultiplicativity=[p.to_dict() for p in pairs[2:] if p],
    )
    return render_json(data)


@cli.command("algebra")
@experiment_options
@click.pass_context
def algebra(ctx, config_location, **overrides):
    """
    Measure the Banach algebra constant on random pairs, invert and take
    square roots of test functions and probe their spectrum. Write a JSON
    report.
    """
    run_experiment(ctx, config_location, overrides, algebra_experiment)


def _solver_entry(name, solve, f, config, settings, failure, errors):
    try:
        result = solve(f, config.bandwidth, tol=config.solver_tol, settings=settings)
    except errors as e:
        return dict(name=name, outcome=failure, message=str(e))
    return dict(
        name=name,
        outcome="converged" if result.converged else "not-converged",
        residual=result.residual,
        iterations=result.iterations,
    )


def _circle_probes(f, count, bandwidth, settings):
    """
    Return ``count`` complex probes on the circle of radius ``b - a`` around
    the middle of the range ``[a, b]`` of a real ``f`` sampled on the solver
    grid of ``bandwidth``, and the sampled range ends.
    """
    n = solver_grid_size(bandwidth, f.bandwidth, settings)
    samples = f.sample_on_grid(n, settings).real
    low, high = float(samples.min()), float(samples.max())
    center = (low + high) / 2
    radius = max(high - low, 0.1)
    angles = 2 * math.pi * np.arange(count) / count
    circle = [complex(center + radius * math.cos(a), radius * math.sin(a)) for a in angles]
    return circle + [complex(low), complex(high)]


def algebra_experiment(config):
    settings = config.get_settings()
    weight = config.get_weight()
    rng = np.random.default_rng(config.seed)

    window = max(config.window, 2 * config.box)
    report = subconvolutivity_report(weight, window, tol=config.tolerance, settings=settings)
    constant = banach_constant(weight, report) if report.is_certified else None
    max_ratio = 0.0
    for _ in range(config.trials):
        f = FourierPoly.random(weight, config.box, rng)
        g = FourierPoly.random(weight, config.box, rng)
        max_ratio = max(max_ratio, hnorm(multiply(f, g, settings)) / (hnorm(f) * hnorm(g)))

    inversions = []
    roots = []
    spectra = []
    for name, f in config.get_functions(weight):
        inversions.append(
            _solver_entry(name, invert, f, config, settings, "not-invertible", NotInvertible)
        )
        roots.append(
            _solver_entry(
                name, sqrt_positive, f, config, settings, "domain-error", (DomainError,)
            )
        )
        if f.is_real():
            probes = [
                spectrum_probe(f, z, config.bandwidth, settings=settings).to_dict()
                for z in _circle_probes(f, 8, config.bandwidth, settings)
            ]
            spectra.append(dict(name=name, probes=probes))

    data = dict(
        weight=weight.to_dict(),
        window=window,
        verdict=report.verdict,
        banach_constant=constant,
        random_pairs=config.trials,
        max_pair_ratio=max_ratio,
        inversions=inversions,
        square_roots=roots,
        spectrum=spectra,
    )
    return render_json(data)


@cli.command("spectrum")
@experiment_options
@click.pass_context
def spectrum(ctx, config_location, **overrides):
    """
    Probe whether complex numbers are in the spectrum of the first test
    function and write a JSON report.
    """
    run_experiment(ctx, config_location, overrides, spectrum_experiment)


def spectrum_experiment(config):
    settings = config.get_settings()
    weight = config.get_weight()
    name, f = config.get_functions(weight)[0]
    if config.probes is None:
        probes = _circle_probes(f, 20, config.bandwidth, settings)
    else:
        try:
            probes = [complex(p["re"], p.get("im", 0.0)) for p in config.probes]
        except (KeyError, TypeError) as e:
            raise ConfigError(f"Invalid probes: {config.probes!r}") from e
    results = [spectrum_probe(f, z, config.bandwidth, settings=settings) for z in probes]
    data = dict(
        weight=weight.to_dict(),
        function=name,
        bandwidth=config.bandwidth,
        probes=[r.to_dict() for r in results],
    )
    return render_json(data)


@cli.command("kernel")
@experiment_options
@click.pass_context
def kernel(ctx, config_location, **overrides):
    """
    Write a CSV sweep of the kernel shape function l(x) on a grid with its
    certified truncation error.
    """
    run_experiment(ctx, config_location, overrides, kernel_experiment)


def kernel_experiment(config):
    settings = config.get_settings()
    weight = config.get_weight()
    radius = config.get_radius(weight)
    points = grid_array(config.grid, weight.d, settings)
    values, error = shape_function_many(weight, points, radius, settings)
    axes = ["x"] if weight.d == 1 else [f"x{i + 1}" for i in range(weight.d)]
    comments = [
        f"weight: {json.dumps(weight.to_dict())}",
        f"radius: {radius}",
        "columns: grid point, truncated shape function l(x), certified error",
    ]
    rows = [list(p) + [v, error] for p, v in zip(points.tolist(), values.tolist())]
    return render_csv(comments, axes + ["l", "err"], rows)


@cli.command("markov")
@experiment_options
@click.pass_context
def markov(ctx, config_location, **overrides):
    """
    Write a CSV sweep over Markov times of the subconvolutivity constant, the
    kernel grid min, the mass defect and the semigroup defect.
    """
    run_experiment(ctx, config_location, overrides, markov_experiment)


def markov_experiment(config):
    settings = config.get_settings()
    try:
        family = MarkovFamily(**config.family)
    except TypeError as e:
        raise ConfigError(f"Invalid Markov family: {config.family!r}") from e
    rows = []
    for tau in config.taus:
        weight = family.weight_at(tau)
        radius = config.get_radius(weight)
        report = subconvolutivity_report(
            weight, config.window, tol=config.tolerance, settings=settings
        )
        checks = markov_checks(family, tau, config.grid, radius, settings=settings)
        rows.append(
            [tau, report.constant, checks.grid_min, checks.mass_defect, checks.semigroup_defect]
        )
    comments = [
        f"family: {json.dumps(family.to_dict())}",
        f"window: {config.window}",
        "columns: time, measured subconvolutivity constant, kernel grid min, "
        "mass defect, semigroup defect",
    ]
    columns = ["tau", "C_meas", "gridmin", "massdefect", "semigroupdefect"]
    return render_csv(comments, columns, rows)


@cli.command("mmd")
@experiment_options
@click.pass_context
def mmd_command(ctx, config_location, **overrides):
    """
    Write the maximum mean discrepancy of a configured pair of measures as
    JSON, or else a CSV sweep of the discrepancy of two Dirac measures by
    separation.
    """
    run_experiment(ctx, config_location, overrides, mmd_experiment)


def mmd_experiment(config):
    settings = config.get_settings()
    weight = config.get_weight()
    radius = config.get_radius(weight)
    if config.measures is not None:
        try:
            first, second = (AtomicMeasure.from_dict(m) for m in config.measures)
        except ValueError as e:
            raise ConfigError(f"Invalid measures: {e}") from e
        value = mmd(first, second, weight, radius, settings)
        return render_json(dict(weight=weight.to_dict(), radius=radius, mmd=value))

    separations = config.separations
    if separations is None:
        separations = [2.0**-k for k in range(1, 11)]
    base = TorusPoint.zero(weight.d)
    origin = AtomicMeasure.dirac(base)
    rows = []
    for separation in separations:
        shift = TorusPoint([separation] + [0.0] * (weight.d - 1))
        value = mmd(origin, AtomicMeasure.dirac(base + shift), weight, radius, settings)
        rows.append([separation, value])
    comments = [
        f"weight: {json.dumps(weight.to_dict())}",
        f"radius: {radius}",
        "columns: separation of two Dirac measures along the first axis, mmd",
    ]
    return render_csv(comments, ["separation", "mmd"], rows)


if __name__ == "__main__":
    cli(sys.argv[1:])
