"""Command-line front end: flat `key = value` configs, randomized
verification suites, PDE energy simulations and input/output-map norm
sweeps, with CSV output for external plotting.

Reports are deterministic for a given (config, seed): all randomness
comes from one numpy PCG64 generator whose identity and seed are echoed
in the report body, checks are emitted sorted by name, and floats use
round-trip repr formatting.  Wall time goes to stderr only so report
bodies stay byte-identical across runs.  Exit codes: 0 all checks pass,
1 a check failed, 2 usage or configuration error.
"""

import argparse
import os
import sys
import time
from collections import namedtuple

import numpy as np

from .cayley import (
    AccretiveOperator,
    accretive_of_contraction,
    accretivity_lower_bound,
    cayley_of_accretive,
    s_norm_bound,
    strict_contraction_bound,
)
from .feedback import a_s_via_feedback, internal_loop
from .numkernel import Gram, contraction_certificate, dissipativity_margin, op_norm
from .pdelab import (
    Grid1D,
    PdeCoefficients,
    degenerate_as1,
    energy_gram,
    wave_combined_ext,
    wave_ext,
    wave_structural_ext,
    wave_viscous_ext,
)
from .simkit import io_map_norm, simulate_semigroup
from .sysnode import ExtendedOperator, SystemNode, external_cayley, passivity_check

__all__ = [
    "ExperimentConfig",
    "RunReport",
    "parse_config",
    "run_verify",
    "run_simulate",
    "run_ionorm",
    "main",
]

EXPERIMENTS = ("verify_random", "wave_heat", "viscous", "structural",
               "combined", "degenerate", "ionorm")
FIXTURES = ("wave_cayley", "viscous_cayley", "feedthrough", "integrator")
STEPPERS = ("expm", "crank_nicolson")

# energy may not exceed its start by more than this in any simulate CSV row
ENERGY_BOUND_TOL = 1e-6

Check = namedtuple("Check", ["name", "measured", "threshold", "passed"])
Check.__doc__ = """One named check: measured value vs threshold."""


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


class ExperimentConfig(object):
    """Validated flat configuration for one experiment run.

    Defaults: n = 32, dt = 1e-2, T = 1, seed = 0, tol = 1e-9.  The
    stepper defaults to the exact exponential for the undamped wave and
    Crank-Nicolson otherwise.  Coefficient profiles are strings
    `constant:<v>`, `linear:<a>,<b>` (a + b xi) or `power:<e>` (xi^e),
    sampled per grid point.
    """

    def __init__(self, experiment=None, n=32, dt=1e-2, T=1.0, seed=0,
                 tol=1e-9, alpha_exp=0.5, kappa=0.0, delta_floor=0.05,
                 cases=100, max_dim=8, stepper=None, fixture="wave_cayley",
                 nsteps=128, negative_control=False, out=".",
                 rho="constant:1", young="constant:1", k_v="constant:1",
                 k_s="constant:1", s_fun="constant:1"):
        if experiment is None:
            raise ValueError("missing required key 'experiment'")
        if experiment not in EXPERIMENTS:
            raise ValueError("experiment must be one of %s, got %r"
                             % ("|".join(EXPERIMENTS), experiment))
        _require(2 <= n <= 4096, "n must lie in [2, 4096], got %s" % n)
        _require(dt > 0.0, "dt must be positive, got %s" % dt)
        _require(T >= dt, "T must be at least dt, got T = %s, dt = %s"
                 % (T, dt))
        _require(seed >= 0, "seed must be nonnegative, got %s" % seed)
        _require(tol > 0.0, "tol must be positive, got %s" % tol)
        _require(0.0 < alpha_exp < 1.0,
                 "alpha_exp must lie in (0, 1), got %s" % alpha_exp)
        _require(kappa >= 0.0, "kappa must be nonnegative, got %s" % kappa)
        _require(delta_floor > 0.0,
                 "delta_floor must be positive, got %s" % delta_floor)
        _require(1 <= cases <= 100000,
                 "cases must lie in [1, 100000], got %s" % cases)
        _require(1 <= max_dim <= 64,
                 "max_dim must lie in [1, 64], got %s" % max_dim)
        _require(4 <= nsteps <= 65536,
                 "nsteps must lie in [4, 65536], got %s" % nsteps)
        if stepper is None:
            stepper = "expm" if experiment == "wave_heat" else "crank_nicolson"
        if stepper not in STEPPERS:
            raise ValueError("stepper must be one of %s, got %r"
                             % ("|".join(STEPPERS), stepper))
        if fixture not in FIXTURES:
            raise ValueError("fixture must be one of %s, got %r"
                             % ("|".join(FIXTURES), fixture))
        for key, profile in (("rho", rho), ("young", young),
                             ("k_v", k_v), ("k_s", k_s),
                             ("s_fun", s_fun)):
            _profile_parts(profile, key)
        self.experiment = experiment
        self.n = int(n)
        self.dt = float(dt)
        self.T = float(T)
        self.seed = int(seed)
        self.tol = float(tol)
        self.alpha_exp = float(alpha_exp)
        self.kappa = float(kappa)
        self.delta_floor = float(delta_floor)
        self.cases = int(cases)
        self.max_dim = int(max_dim)
        self.stepper = stepper
        self.fixture = fixture
        self.nsteps = int(nsteps)
        self.negative_control = bool(negative_control)
        self.out = out
        self.rho = rho
        self.young = young
        self.k_v = k_v
        self.k_s = k_s
        self.s_fun = s_fun

    def as_dict(self):
        return {key: getattr(self, key) for key in _CONFIG_KEYS}

    def with_seed(self, seed):
        values = self.as_dict()
        values["seed"] = int(seed)
        return ExperimentConfig(**values)


_CONFIG_KEYS = ("experiment", "n", "dt", "T", "seed", "tol", "alpha_exp",
                "kappa", "delta_floor", "cases", "max_dim", "stepper",
                "fixture", "nsteps", "negative_control", "out", "rho",
                "young", "k_v", "k_s", "s_fun")

# `out` is deliberately not echoed so report bodies do not depend on paths
_ECHO_KEYS = tuple(sorted(k for k in _CONFIG_KEYS if k != "out"))


def _require(condition, message):
    if not condition:
        raise ValueError(message)


def _int_value(key, text):
    try:
        return int(text)
    except ValueError:
        raise ValueError("%s expects an integer, got %r" % (key, text))


def _float_value(key, text):
    try:
        return float(text)
    except ValueError:
        raise ValueError("%s expects a number, got %r" % (key, text))


def _bool_value(key, text):
    lowered = text.lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError("%s expects true or false, got %r" % (key, text))


def _str_value(key, text):
    return text


_KEY_PARSERS = {
    "experiment": _str_value,
    "n": _int_value,
    "dt": _float_value,
    "T": _float_value,
    "seed": _int_value,
    "tol": _float_value,
    "alpha_exp": _float_value,
    "kappa": _float_value,
    "delta_floor": _float_value,
    "cases": _int_value,
    "max_dim": _int_value,
    "stepper": _str_value,
    "fixture": _str_value,
    "nsteps": _int_value,
    "negative_control": _bool_value,
    "out": _str_value,
    "rho": _str_value,
    "young": _str_value,
    "k_v": _str_value,
    "k_s": _str_value,
    "s_fun": _str_value,
}


def parse_config(text):
    """Parse `key = value` lines (with `#` comments) into an ExperimentConfig.

    Unknown and duplicate keys are rejected with their line number;
    values are type-checked per key and range-checked on construction.
    """
    values = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError("line %d: expected `key = value`, got %r"
                             % (lineno, line))
        key = key.strip()
        value = value.strip()
        if key not in _KEY_PARSERS:
            raise ValueError("line %d: unknown key %r" % (lineno, key))
        if key in values:
            raise ValueError("line %d: duplicate key %r (first at line %d)"
                             % (lineno, key, lines[key]))
        if not value:
            raise ValueError("line %d: empty value for %r" % (lineno, key))
        values[key] = value
        lines[key] = lineno
    parsed = {}
    for key, value in values.items():
        try:
            parsed[key] = _KEY_PARSERS[key](key, value)
        except ValueError as exc:
            raise ValueError("line %d: %s" % (lines[key], exc))
    return ExperimentConfig(**parsed)


def _profile_parts(profile, key):
    """Split a coefficient profile string into (kind, numeric args)."""
    if not isinstance(profile, str):
        raise ValueError("%s expects a profile string" % key)
    kind, _, rest = profile.partition(":")
    kind = kind.strip()
    rest = rest.strip()
    try:
        if kind == "constant":
            return "constant", (float(rest),)
        if kind == "linear":
            a, _, b = rest.partition(",")
            return "linear", (float(a), float(b))
        if kind == "power":
            return "power", (float(rest),)
    except ValueError:
        raise ValueError("%s: bad number in profile %r" % (key, profile))
    raise ValueError("%s: unknown profile %r (expected constant:<v>, "
                     "linear:<a>,<b> or power:<e>)" % (key, profile))


def _profile_values(profile, points, key):
    kind, args = _profile_parts(profile, key)
    points = np.asarray(points, dtype=float)
    if kind == "constant":
        return np.full(points.shape, args[0])
    if kind == "linear":
        return args[0] + args[1] * points
    return points ** args[0]


def _coefficients(config, grid):
    return PdeCoefficients(
        grid,
        rho=_profile_values(config.rho, grid.interior_nodes, "rho"),
        young=_profile_values(config.young, grid.midpoints, "young"),
        k_v=_profile_values(config.k_v, grid.interior_nodes, "k_v"),
        k_s=_profile_values(config.k_s, grid.midpoints, "k_s"),
        s_fun=_profile_values(config.s_fun, grid.midpoints, "s_fun"),
        alpha_exp=config.alpha_exp,
        kappa=config.kappa)


class RunReport(object):
    """Config echo plus named checks; overall pass means every check passed.

    body() is the deterministic report text; wall_time is carried on the
    object but never written into the body.
    """

    def __init__(self, command, config, checks, wall_time):
        self.command = command
        self.config = config
        self.checks = sorted(checks, key=lambda c: c.name)
        self.wall_time = float(wall_time)

    @property
    def passed(self):
        return all(check.passed for check in self.checks)

    def body(self):
        lines = ["command: %s" % self.command]
        for key in _ECHO_KEYS:
            lines.append("%s = %s" % (key, _fmt(getattr(self.config, key))))
        lines.append("rng: numpy PCG64, seed=%d" % self.config.seed)
        for check in self.checks:
            lines.append("check %s: measured=%s threshold=%s %s"
                         % (check.name, repr(float(check.measured)),
                            repr(float(check.threshold)),
                            "PASS" if check.passed else "FAIL"))
        lines.append("overall: %s" % ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines) + "\n"


def _random_matrix(rng, n):
    real = rng.standard_normal((n, n))
    imag = rng.standard_normal((n, n))
    return (real + 1j * imag) / np.sqrt(2.0 * n)


def _random_accretive(rng, n, floor):
    m = _random_matrix(rng, n)
    herm = (m + m.conj().T) / 2.0
    shift = floor - np.linalg.eigvalsh(herm).min()
    return m + shift * np.eye(n)


def _random_dissipative(rng, n, gap=0.1):
    m = _random_matrix(rng, n)
    return m - (dissipativity_margin(m) + gap) * np.eye(n)


def _random_dissipative_ext(rng, n1, n2, gap=0.1):
    m = _random_dissipative(rng, n1 + n2, gap)
    return ExtendedOperator(m[:n1, :n1], m[:n1, n1:],
                            m[n1:, :n1], m[n1:, n1:])


def _check(name, measured, threshold):
    measured = float(measured)
    return Check(name, measured, float(threshold), measured <= threshold)


def _check_cayley_bounds(rng, config):
    worst = -np.inf
    for _ in range(config.cases):
        n = int(rng.integers(1, config.max_dim + 1))
        s = AccretiveOperator(_random_accretive(rng, n, config.delta_floor))
        k = cayley_of_accretive(s)
        worst = max(worst, k.norm - strict_contraction_bound(s))
        s_back = accretive_of_contraction(k)
        worst = max(worst, accretivity_lower_bound(k) - s_back.delta)
        worst = max(worst, op_norm(s.matrix) - s_norm_bound(k))
    return _check("cayley_bounds", worst, config.tol)


def _check_cayley_roundtrip(rng, config):
    worst = 0.0
    for _ in range(config.cases):
        n = int(rng.integers(1, config.max_dim + 1))
        s = AccretiveOperator(_random_accretive(rng, n, config.delta_floor))
        s_back = accretive_of_contraction(cayley_of_accretive(s))
        err = op_norm(s_back.matrix - s.matrix) / (1.0 + op_norm(s.matrix))
        worst = max(worst, err)
    return _check("cayley_roundtrip", worst, config.tol)


def _check_contraction_margins(rng, config):
    worst = -np.inf
    for _ in range(config.cases):
        n = int(rng.integers(1, config.max_dim + 1))
        a = _random_dissipative(rng, n)
        report = contraction_certificate(a)
        worst = max(worst, max(report.norms) - 1.0)
    return _check("contraction_margins", worst, config.tol)


def _check_loop_vs_feedback(rng, config):
    worst = 0.0
    for _ in range(config.cases):
        n1 = int(rng.integers(1, config.max_dim + 1))
        n2 = int(rng.integers(1, config.max_dim + 1))
        ext = _random_dissipative_ext(rng, n1, n2)
        s = AccretiveOperator(_random_accretive(rng, n2, config.delta_floor))
        a_f = a_s_via_feedback(ext, s)
        a_l = internal_loop(ext, s).a_s
        err = op_norm(a_f - a_l) / (1.0 + op_norm(a_l))
        worst = max(worst, err)
    return _check("loop_vs_feedback", worst, config.tol)


def _check_passivity_lmi(rng, config):
    if config.negative_control:
        # accretive 1x1 block: the Cayley node must fail the LMI
        one = np.array([[1.0 + 0j]])
        zero = np.zeros((1, 1), dtype=complex)
        node = external_cayley(ExtendedOperator(one, zero, zero, zero))
        return _check("passivity_lmi", passivity_check(node), config.tol)
    worst = -np.inf
    for _ in range(config.cases):
        n1 = int(rng.integers(1, config.max_dim + 1))
        n2 = int(rng.integers(1, config.max_dim + 1))
        node = external_cayley(_random_dissipative_ext(rng, n1, n2))
        worst = max(worst, passivity_check(node))
    return _check("passivity_lmi", worst, config.tol)


def run_verify(config):
    """Randomized verification suites at the configured seed and sizes."""
    if config.experiment != "verify_random":
        raise ValueError("verify requires experiment = verify_random, "
                         "got %r" % config.experiment)
    start = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    checks = [
        _check_cayley_bounds(rng, config),
        _check_cayley_roundtrip(rng, config),
        _check_contraction_margins(rng, config),
        _check_loop_vs_feedback(rng, config),
        _check_passivity_lmi(rng, config),
    ]
    return RunReport("verify", config, checks, time.perf_counter() - start)


def _simulate_setup(config):
    """Generator, Gram and smooth start for the configured PDE experiment."""
    grid = Grid1D(config.n)
    coeffs = _coefficients(config, grid)
    if config.experiment == "degenerate":
        a_s1 = degenerate_as1(grid, coeffs)
        gram = Gram(grid.h * np.eye(config.n, dtype=complex))
        x0 = np.sin(np.pi * grid.midpoints)
        return a_s1, gram, x0
    if config.experiment == "wave_heat":
        ext = wave_ext(grid)
        gram = energy_gram(grid, coeffs)
        generator = ext.matrix @ gram.matrix
    else:
        builder = {"viscous": wave_viscous_ext,
                   "structural": wave_structural_ext,
                   "combined": wave_combined_ext}[config.experiment]
        ext, gram, s_op = builder(grid, coeffs, require_uniform=True)
        loop = internal_loop(ext, s_op)
        generator = loop.a_s @ gram.matrix
    x0 = np.concatenate([np.sin(np.pi * grid.interior_nodes),
                         np.zeros(config.n)])
    return generator, gram, x0


def run_simulate(config):
    """Simulate the configured PDE and return (report, CSV text).

    CSV columns are t, energy, norm_bound_ok; norm_bound_ok flags rows
    whose energy stays within (1 + 1e-6) of the start.
    """
    if config.experiment not in ("wave_heat", "viscous", "structural",
                                 "combined", "degenerate"):
        raise ValueError("simulate requires a PDE experiment, got %r"
                         % config.experiment)
    start = time.perf_counter()
    generator, gram, x0 = _simulate_setup(config)
    traj = simulate_semigroup(generator, gram, x0, config.T, config.dt,
                              config.stepper)
    energy = traj.energy
    checks = []
    ratio = float(energy.max() / energy[0])
    checks.append(_check("max_energy_ratio", ratio, 1.0 + ENERGY_BOUND_TOL))
    if config.experiment == "wave_heat":
        drift = abs(energy[-1] / energy[0] - 1.0)
        checks.append(_check("energy_conservation", drift, ENERGY_BOUND_TOL))
    else:
        increases = np.diff(energy)
        worst = max(0.0, float(increases.max())) / energy[0]
        checks.append(_check("energy_monotone", worst, 1e-10))
    bound = energy[0] * (1.0 + ENERGY_BOUND_TOL)
    lines = ["t,energy,norm_bound_ok"]
    for t, e in zip(traj.times, energy):
        lines.append("%s,%s,%d" % (repr(float(t)), repr(float(e)),
                                   1 if e <= bound else 0))
    csv_text = "\n".join(lines) + "\n"
    report = RunReport("simulate", config, checks,
                       time.perf_counter() - start)
    return report, csv_text


def _fixture_node(config):
    if config.fixture == "wave_cayley":
        return external_cayley(wave_ext(Grid1D(config.n)))
    if config.fixture == "viscous_cayley":
        grid = Grid1D(config.n)
        ext, _, _ = wave_viscous_ext(grid, _coefficients(config, grid))
        return external_cayley(ext)
    if config.fixture == "feedthrough":
        zero = np.zeros((1, 1), dtype=complex)
        return SystemNode(zero, zero, zero, np.array([[0.5 + 0j]]))
    zero = np.zeros((1, 1), dtype=complex)
    one = np.eye(1, dtype=complex)
    return SystemNode(zero, one, one, zero)


def run_ionorm(config):
    """Sweep input/output-map norms over {T/4, T/2, T, 2T}; (report, CSV)."""
    if config.experiment != "ionorm":
        raise ValueError("ionorm requires experiment = ionorm, got %r"
                         % config.experiment)
    start = time.perf_counter()
    node = _fixture_node(config)
    horizons = [config.T * f for f in (0.25, 0.5, 1.0, 2.0)]
    estimates = [io_map_norm(node, horizon, config.nsteps)
                 for horizon in horizons]
    norms = [est.norm_estimate for est in estimates]
    biases = [est.bias for est in estimates]
    checks = []
    worst_drop = max(
        norms[i] - norms[i + 1] - 2.0 * max(biases[i], biases[i + 1])
        for i in range(len(norms) - 1))
    checks.append(_check("monotone_in_t", worst_drop, config.tol))
    if config.fixture == "wave_cayley":
        checks.append(_check("wave_lower_bound", 1.0 - min(norms), 1e-3))
        over = max(norms[i] - 1.0 - biases[i] for i in range(len(norms)))
        checks.append(_check("wave_upper_bound", over, config.tol))
    elif config.fixture == "viscous_cayley":
        checks.append(_check("feedthrough_floor", 1.0 - min(norms), 1e-3))
    elif config.fixture == "feedthrough":
        deviation = max(abs(v - 0.5) for v in norms)
        checks.append(_check("feedthrough_value", deviation, config.tol))
    lines = ["T,norm_estimate,nsteps"]
    for horizon, est in zip(horizons, estimates):
        lines.append("%s,%s,%d" % (repr(float(horizon)),
                                   repr(float(est.norm_estimate)),
                                   est.nsteps))
    csv_text = "\n".join(lines) + "\n"
    report = RunReport("ionorm", config, checks, time.perf_counter() - start)
    return report, csv_text


_CSV_NAMES = {"simulate": "simulate.csv", "ionorm": "ionorm.csv"}
_ALLOWED_EXPERIMENTS = {
    "verify": ("verify_random",),
    "simulate": ("wave_heat", "viscous", "structural", "combined",
                 "degenerate"),
    "ionorm": ("ionorm",),
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="semilab",
        description="contraction-semigroup laboratory: verification suites, "
                    "PDE energy simulations, input/output-map norms")
    sub = parser.add_subparsers(dest="command")
    for name, blurb in (("verify", "run the randomized verification suites"),
                        ("simulate", "simulate a PDE energy trajectory"),
                        ("ionorm", "sweep input/output-map norm estimates")):
        cmd = sub.add_parser(name, help=blurb)
        cmd.add_argument("config", help="path to a key = value config file")
        cmd.add_argument("--out", default=None,
                         help="output directory (default: config `out`)")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the config seed")
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        with open(args.config, "r", encoding="utf-8") as handle:
            text = handle.read()
    except (OSError, UnicodeDecodeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    try:
        config = parse_config(text)
        if args.seed is not None:
            config = config.with_seed(args.seed)
        if config.experiment not in _ALLOWED_EXPERIMENTS[args.command]:
            raise ValueError(
                "experiment %r is not valid for the %s command (expected %s)"
                % (config.experiment, args.command,
                   "|".join(_ALLOWED_EXPERIMENTS[args.command])))
        if args.command == "verify":
            report, csv_text = run_verify(config), None
        elif args.command == "simulate":
            report, csv_text = run_simulate(config)
        else:
            report, csv_text = run_ionorm(config)
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    out_dir = args.out if args.out is not None else config.out
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.txt"), "w", encoding="utf-8",
              newline="\n") as handle:
        handle.write(report.body())
    if csv_text is not None:
        csv_path = os.path.join(out_dir, _CSV_NAMES[args.command])
        with open(csv_path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(csv_text)
    sys.stdout.write(report.body())
    print("wall time: %.3f s" % report.wall_time, file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
