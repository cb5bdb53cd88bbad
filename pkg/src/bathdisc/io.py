"""CSV and JSON serialisation of the package's tabular results.

Floats are written with ``repr``, the shortest decimal that round-trips,
so reading a file back reproduces every value bit for bit and re-running
the same computation reproduces the same bytes.
"""

import csv
import io
import json
import math

import numpy as np

from .discretize import DiscretizedBath, scheme_of
from .errors import ValidationError
from .measures import SpectralDensity
from .orthopoly import GaussRule, RecurrenceCoefficients


def fmt(value):
    """Shortest round-trip text for a number; bools as true/false."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if not math.isfinite(value):
        raise ValidationError(f"refusing to serialise non-finite value {value!r}")
    return repr(value)


def write_rows(header, rows):
    """CSV text with a header row and '\\n' line endings."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([v if isinstance(v, str) else fmt(v) for v in row])
    return buf.getvalue()


def read_rows(text, header):
    reader = csv.reader(io.StringIO(text))
    got = next(reader, None)
    if got != list(header):
        raise ValidationError(f"expected CSV header {list(header)}, got {got}")
    return [row for row in reader if row]


def dump_json(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


# -- recurrence coefficients and Gauss rules --------------------------------------

RC_HEADER = ("index", "alpha", "beta")
RULE_HEADER = ("index", "knot", "weight")
BATH_HEADER = ("n", "frequency", "coupling")
CHAIN_HEADER = ("n", "site_energy", "hop")
BOUND_HEADER = ("t", "L", "scheme", "massless", "bound")
COMPARISON_HEADER = ("t", "L", "L_ref", "empirical_error", "bound_L", "bound_Lref",
                     "certified_ceiling", "cutoff_delta")


def recurrence_to_csv(rc):
    return write_rows(RC_HEADER, zip(range(len(rc)), rc.alpha, rc.beta))


def recurrence_from_csv(text):
    rows = read_rows(text, RC_HEADER)
    return RecurrenceCoefficients(np.array([float(r[1]) for r in rows]),
                                  np.array([float(r[2]) for r in rows]))


def recurrence_to_json(rc):
    return dump_json({"alpha": [float(a) for a in rc.alpha],
                      "beta": [float(b) for b in rc.beta]})


def recurrence_from_json(text):
    data = json.loads(text)
    return RecurrenceCoefficients(np.array(data["alpha"], float), np.array(data["beta"], float))


def rule_to_csv(rule):
    return write_rows(RULE_HEADER, zip(range(1, rule.L + 1), rule.knots, rule.weights))


def rule_from_csv(text):
    rows = read_rows(text, RULE_HEADER)
    return GaussRule(np.array([float(r[1]) for r in rows]), np.array([float(r[2]) for r in rows]))


def rule_to_json(rule):
    return dump_json({"knots": [float(x) for x in rule.knots],
                      "weights": [float(w) for w in rule.weights]})


def rule_from_json(text):
    data = json.loads(text)
    return GaussRule(np.array(data["knots"], float), np.array(data["weights"], float))


# -- baths ----------------------------------------------------------------------------

def bath_to_csv(bath):
    return write_rows(BATH_HEADER, zip(range(1, bath.L + 1), bath.frequencies, bath.couplings))


def bath_from_csv(text, scheme, source=None):
    rows = read_rows(text, BATH_HEADER)
    return DiscretizedBath(scheme_of(scheme), np.array([float(r[1]) for r in rows]),
                           np.array([float(r[2]) for r in rows]), source)


def bath_to_json(bath):
    return dump_json({
        "scheme": bath.scheme,
        "source": None if bath.source is None else bath.source.to_dict(),
        "frequencies": [float(f) for f in bath.frequencies],
        "couplings": [float(c) for c in bath.couplings],
    })


def bath_from_json(text):
    data = json.loads(text)
    source = None if data.get("source") is None else SpectralDensity.from_dict(data["source"])
    return DiscretizedBath(scheme_of(data["scheme"]), np.array(data["frequencies"], float),
                           np.array(data["couplings"], float), source)


def chain_to_csv(cc):
    """Site n carries its energy and the hop to site n+1 (empty on the last site)."""
    rows = []
    for n in range(cc.N):
        hop = fmt(cc.hops[n]) if n < len(cc.hops) else ""
        rows.append((n + 1, cc.site_energies[n], hop))
    return write_rows(CHAIN_HEADER, rows)


# -- bounds and comparisons -----------------------------------------------------------

def bound_rows_to_csv(rows):
    return write_rows(BOUND_HEADER, ((r.t, r.L, r.scheme, r.massless, r.bound) for r in rows))


def comparison_to_csv(rows):
    return write_rows(COMPARISON_HEADER, (
        (r.t, r.L, r.L_ref, r.empirical_error, r.bound_L, r.bound_Lref,
         r.certified_ceiling, r.cutoff_delta) for r in rows))
