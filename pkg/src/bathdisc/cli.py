"""Command-line front end: ``bathdisc --config run.json [--out prefix]``.

Exit status is 0 on success, 1 on validation errors and 2 on numerical
failures; failures print one JSON object on stderr with ``error`` (a code),
``message`` and, for schema violations, ``path``.
"""

import argparse
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
import json
import logging
import os
from pathlib import Path
import sys

import jsonschema
import numpy as np

from . import io as bio
from .bounds import (bound, bound_curve, bound_inputs, gamma_norm_number_state,
                     plan_modes, L_MAX_DEFAULT)
from .discretize import chain_coefficients, discretize, SCHEMES
from .errors import BathDiscError, NumericalError, ValidationError
from .measures import SpectralDensity
from .simsuite import bound_vs_empirical

log = logging.getLogger("bathdisc")

SCHEMA_FILE = "config.v1.schema.json"
PAULI = {
    "sigma_x": np.array([[0, 1], [1, 0]], dtype=complex),
    "sigma_y": np.array([[0, -1j], [1j, 0]]),
    "sigma_z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def load_schema():
    return json.loads(resources.files("bathdisc").joinpath("schema", SCHEMA_FILE).read_text())


def validate_config(config):
    validator = jsonschema.Draft202012Validator(load_schema())
    err = jsonschema.exceptions.best_match(validator.iter_errors(config))
    if err is not None:
        parts = [str(p) for p in err.absolute_path]
        if err.validator == "additionalProperties" and isinstance(err.instance, dict):
            known = err.schema.get("properties", {})
            parts.append(sorted(k for k in err.instance if k not in known)[0])
        path = "/" + "/".join(parts)
        exc = ValidationError(f"config invalid at {path}: {err.message}")
        exc.path = path
        raise exc


def load_config(path):
    path = Path(path)
    try:
        config = json.loads(path.read_text())
    except FileNotFoundError:
        raise ValidationError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config is not valid JSON: {exc}") from None
    validate_config(config)
    sd = config["spectral_density"]
    if isinstance(sd, str):
        sd_path = (path.parent / sd)
        if not sd_path.is_file():
            raise ValidationError(f"spectral density file not found: {sd_path}")
        try:
            config["spectral_density"] = json.loads(sd_path.read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"spectral density file is not valid JSON: {exc}") from None
        validate_config(config)
    return config


# -- helpers -------------------------------------------------------------------------

def _time_grid(config):
    spec = config.get("times")
    if spec is None:
        raise ValidationError("this command needs a 'times' grid")
    if spec["t_end"] < spec["t_start"]:
        raise ValidationError("times.t_end must be >= times.t_start")
    return [float(t) for t in np.linspace(spec["t_start"], spec["t_end"], spec["steps"])]


def _schemes(config):
    if "schemes" in config:
        return list(config["schemes"])
    return [config.get("scheme", "BC")]


def _Ls(config):
    if "Ls" in config:
        return list(config["Ls"])
    if "L" in config:
        return [config["L"]]
    raise ValidationError("this command needs 'L' or 'Ls'")


def _bound_kwargs(config):
    b = config.get("bound_inputs", {})
    if "gamma_norm" in b and "n0" in b:
        raise ValidationError("give bound_inputs.gamma_norm or bound_inputs.n0, not both")
    gamma = b.get("gamma_norm", gamma_norm_number_state(b.get("n0", 0)))
    return dict(norm_O=b.get("norm_O", 1.0), norm_A=b.get("norm_A", 1.0),
                gamma_norm=gamma, massless=b.get("massless"))


# -- commands ------------------------------------------------------------------------

def cmd_discretize(config, sd, executor):
    scheme = config.get("scheme", "BC")
    L = _Ls(config)[0]
    bath = discretize(sd, scheme, L)
    return {"bath.csv": bio.bath_to_csv(bath), "bath.json": bio.bath_to_json(bath)}


def cmd_chain(config, sd, executor):
    scheme = config.get("scheme", "BC")
    N = config.get("N", config.get("L"))
    if N is None:
        raise ValidationError("chain needs 'N' (or 'L')")
    cc = chain_coefficients(sd, scheme, N)
    meta = {"scheme": scheme, "q": cc.q, "system_coupling": cc.system_coupling,
            "omega_max": cc.omega_max, "source": sd.to_dict()}
    return {"chain.csv": bio.chain_to_csv(cc), "chain.json": bio.dump_json(meta)}


def cmd_bound(config, sd, executor):
    rows = bound_curve(sd, _schemes(config), _time_grid(config), _Ls(config),
                       executor=executor, **_bound_kwargs(config))
    return {"bound.csv": bio.bound_rows_to_csv(rows)}


def cmd_plan(config, sd, executor):
    plan = config.get("plan")
    if plan is None:
        raise ValidationError("plan needs a 'plan' block")
    kw = _bound_kwargs(config)
    t, eps = float(plan["t_horizon"]), float(plan["epsilon"])
    rows = []
    for scheme in _schemes(config):
        L = plan_modes(sd, scheme, t, eps, L_max=plan.get("L_max", L_MAX_DEFAULT), **kw)
        inp = bound_inputs(sd, scheme, t, L, **kw)
        prev = bound(scheme, bound_inputs(sd, scheme, t, L - 1, **kw)) if L > 1 else ""
        rows.append((scheme, t, eps, L, bound(scheme, inp), prev))
    header = ("scheme", "t_horizon", "epsilon", "L", "bound_at_L", "bound_at_L_minus_1")
    summary = "".join(f"{r[3]}\n" for r in rows)
    return {"plan.csv": bio.write_rows(header, rows)}, summary


def cmd_verify(config, sd, executor):
    sim = config.get("simulation", {})
    if "bound_inputs" in config:
        raise ValidationError("verify derives its bound inputs; drop 'bound_inputs'")
    times = _time_grid(config)
    options = dict(L=sim.get("L", 2), L_ref=sim.get("L_ref", 5),
                   splitting=sim.get("splitting", 0.5), fock_cutoff=sim.get("fock_cutoff", 3),
                   n0=sim.get("n0", 0), observable=PAULI[sim.get("observable", "sigma_z")])
    if options["L_ref"] < options["L"]:
        raise ValidationError("simulation.L_ref must be >= simulation.L")
    schemes = _schemes(config)
    mapper = executor.map if executor is not None else map
    tables = list(mapper(lambda s: bound_vs_empirical(sd, s, times, **options), schemes))
    out = {}
    for scheme, rows in zip(schemes, tables):
        key = "compare.csv" if len(schemes) == 1 else f"compare.{scheme}.csv"
        out[key] = bio.comparison_to_csv(rows)
        bad = sum(r.violated for r in rows)
        if bad:
            log.warning("%s: empirical error exceeds the certified ceiling at %d of %d times",
                        scheme, bad, len(rows))
    return out


def cmd_compare(config, sd, executor):
    """Side-by-side BC and S2 bounds on the (L, t) grid plus the knot tables."""
    kw = _bound_kwargs(config)
    Ls, times = _Ls(config), _time_grid(config)
    rows = bound_curve(sd, SCHEMES, times, Ls, executor=executor, **kw)
    n = len(Ls) * len(times)
    by_scheme = rows[:n], rows[n:]
    table = [(a.t, a.L, a.bound, b.bound) for a, b in zip(*by_scheme)]
    bounds_csv = bio.write_rows(("t", "L", "bound_BC", "bound_S2"), table)
    L = max(Ls)
    bc, s2 = discretize(sd, "BC", L), discretize(sd, "S2", L)
    knots = zip(range(1, L + 1), bc.frequencies, bc.couplings, s2.frequencies, s2.couplings)
    knots_csv = bio.write_rows(("n", "frequency_BC", "coupling_BC", "frequency_S2",
                                "coupling_S2"), knots)
    return {"compare_bounds.csv": bounds_csv, "compare_knots.csv": knots_csv}


COMMANDS = {
    "discretize": cmd_discretize,
    "chain": cmd_chain,
    "bound": cmd_bound,
    "plan": cmd_plan,
    "verify": cmd_verify,
    "compare": cmd_compare,
}


def run(config, out=None, threads=1):
    """Execute a validated config; returns {suffix: text} and a stdout summary."""
    sd = SpectralDensity.from_dict(config["spectral_density"])
    workers = (os.cpu_count() or 1) if threads == 0 else threads
    log.info("command=%s family=%s threads=%d", config["command"], sd.family, workers)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            result = COMMANDS[config["command"]](config, sd, executor)
    else:
        result = COMMANDS[config["command"]](config, sd, None)
    files, summary = result if isinstance(result, tuple) else (result, None)
    prefix = out or config.get("output")
    if prefix is None:
        first = next(iter(files.values()))
        return files, summary if summary is not None else first
    for suffix, text in files.items():
        path = Path(f"{prefix}.{suffix}")
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
        log.info("wrote %s", path)
    return files, summary


def _error_payload(exc):
    payload = {"error": getattr(exc, "code", "error"), "message": str(exc)}
    if getattr(exc, "path", None):
        payload["path"] = exc.path
    return json.dumps(payload)


def build_parser():
    p = argparse.ArgumentParser(prog="bathdisc",
                                description="Gauss-quadrature bath discretisation and error bounds")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("--out", help="output path prefix (files are <prefix>.<kind>.csv)")
    p.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto")
    p.add_argument("--seed", type=int, default=0,
                   help="reserved; the pipeline is deterministic and ignores it")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = os.environ.get("BATHDISC_LOG", "error").lower()
    if level not in ("error", "info", "debug"):
        level = "error"
    logging.basicConfig(level=level.upper(), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.threads < 0:
            raise ValidationError("--threads must be >= 0")
        if not 0 <= args.seed < 2**64:
            raise ValidationError("--seed must be an unsigned 64-bit integer")
        config = load_config(args.config)
        _, summary = run(config, args.out, args.threads)
    except ValidationError as exc:
        print(_error_payload(exc), file=sys.stderr)
        return 1
    except (NumericalError, ArithmeticError) as exc:
        print(_error_payload(exc), file=sys.stderr)
        return 2
    except BathDiscError as exc:
        print(_error_payload(exc), file=sys.stderr)
        return 1
    if summary:
        sys.stdout.write(summary)
    return 0
