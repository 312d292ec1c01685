"""CSV and JSON serialisation for events, histograms and curves.

Every CSV starts with one comment line ``# seed=<u64> model_digest=<hex>``
followed by a column header.  Floats are written with 17 significant
digits so that values survive a round trip exactly.
"""
import hashlib
import json
import math
import os

import numpy as np

from .decay import ChannelRates
from .errors import InvalidInput
from .simulate import BinnedCounts, DecayEvents, ScatteringEvents


def fmt(x):
    return "%.17g" % x


def json_digest(doc):
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def rates_doc(rates):
    return {"rates": list(rates.rates), "labels": list(rates.labels)}


def event_digest(events):
    if isinstance(events, DecayEvents):
        return json_digest(rates_doc(events.rates))
    return json_digest(events.model)


def _header(seed, digest, extra=""):
    tail = f" {extra}" if extra else ""
    return f"# seed={int(seed)} model_digest={digest}{tail}\n"


def _write(path, text):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)


def write_events_csv(path, events):
    digest = event_digest(events)
    if isinstance(events, DecayEvents):
        labels = ",".join(events.rates.labels)
        rates = ",".join(fmt(r) for r in events.rates.rates)
        lines = [_header(events.seed, digest, f"labels={labels} rates={rates}"), "t,channel\n"]
        lines += [f"{fmt(t)},{events.rates.labels[c]}\n" for t, c in zip(events.times, events.channels)]
    else:
        lo, hi = events.window
        lines = [_header(events.seed, digest, f"window={fmt(lo)}:{fmt(hi)}"), "E\n"]
        lines += [f"{fmt(e)}\n" for e in events.energies]
    _write(path, "".join(lines))
    return digest


def write_binned_csv(path, binned, seed, digest):
    x = "t" if binned.kind == "time" else "E"
    lines = [_header(seed, digest, f"total={binned.total}"), f"{x}_lo,{x}_hi,channel,count\n"]
    for k, lab in enumerate(binned.labels):
        for lo, hi, c in zip(binned.lo, binned.hi, binned.counts[k]):
            lines.append(f"{fmt(lo)},{fmt(hi)},{lab},{int(c)}\n")
    _write(path, "".join(lines))


def write_curve_csv(path, curve, seed=0, digest=""):
    lines = [_header(seed, digest), "t,re_A,im_A,P,P_exp,deviation\n"]
    for t, a, p, pe, d in zip(curve.times, curve.amplitudes, curve.probabilities,
                               curve.exponential, curve.deviation):
        lines.append(",".join(fmt(v) for v in (t, a.real, a.imag, p, pe, d)) + "\n")
    _write(path, "".join(lines))


def write_json(path, doc):
    _write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _parse_header(line):
    meta = {}
    for tok in line.lstrip("#").split():
        if "=" in tok:
            k, v = tok.split("=", 1)
            meta[k] = v
    return meta


def _read_lines(path):
    if not os.path.isfile(path):
        raise InvalidInput(f"{path}: no such file")
    with open(path, encoding="ascii", errors="strict") as fh:
        try:
            lines = [ln.strip() for ln in fh if ln.strip()]
        except UnicodeDecodeError as exc:
            raise InvalidInput(f"{path}: not an ASCII CSV file") from exc
    if not lines:
        raise InvalidInput(f"{path}: file is empty")
    meta = {}
    while lines and lines[0].startswith("#"):
        meta.update(_parse_header(lines.pop(0)))
    if not lines:
        raise InvalidInput(f"{path}: no column header")
    return meta, lines[0].split(","), lines[1:]


def _float(path, n, text):
    try:
        v = float(text)
    except ValueError:
        raise InvalidInput(f"{path}: line {n}: not a number: {text!r}") from None
    if not math.isfinite(v):
        raise InvalidInput(f"{path}: line {n}: non-finite value")
    return v


def read_csv(path):
    """Read an event or binned CSV written by this package.

    Returns a :class:`ScatteringEvents`, :class:`DecayEvents` or
    :class:`BinnedCounts`; raises :class:`InvalidInput` naming the file
    when it is missing, empty or malformed.
    """
    meta, cols, rows = _read_lines(path)
    seed = int(meta.get("seed", 0))
    if not rows:
        raise InvalidInput(f"{path}: no data rows")
    if cols == ["E"]:
        e = np.array([_float(path, i + 2, r) for i, r in enumerate(rows)])
        if np.any(e < 0):
            raise InvalidInput(f"{path}: negative energy")
        if "window" in meta:
            lo, hi = (float(x) for x in meta["window"].split(":"))
        else:
            lo, hi = float(e.min()), float(e.max())
        return ScatteringEvents(e, (lo, hi), seed, {})
    if cols == ["t", "channel"]:
        labels = meta["labels"].split(",") if "labels" in meta else None
        times, chans = [], []
        for i, r in enumerate(rows):
            parts = r.split(",")
            if len(parts) != 2:
                raise InvalidInput(f"{path}: line {i + 2}: expected 2 columns")
            times.append(_float(path, i + 2, parts[0]))
            chans.append(parts[1])
        if labels is None:
            labels = sorted(set(chans))
        index = {lab: k for k, lab in enumerate(labels)}
        try:
            ch = np.array([index[c] for c in chans], dtype=np.int64)
        except KeyError as exc:
            raise InvalidInput(f"{path}: unknown channel {exc.args[0]!r}") from None
        t = np.array(times)
        if np.any(t < 0):
            raise InvalidInput(f"{path}: negative decay time")
        if "rates" in meta:
            rates = ChannelRates(tuple(float(x) for x in meta["rates"].split(",")), tuple(labels))
        else:
            counts = np.bincount(ch, minlength=len(labels)).astype(float)
            rates = ChannelRates(tuple(np.maximum(counts, 1.0)), tuple(labels))
        return DecayEvents(t, ch, seed, rates)
    if len(cols) == 4 and cols[2:] == ["channel", "count"] and cols[0] in ("t_lo", "E_lo"):
        kind = "time" if cols[0] == "t_lo" else "energy"
        table = {}
        order = []
        for i, r in enumerate(rows):
            parts = r.split(",")
            if len(parts) != 4:
                raise InvalidInput(f"{path}: line {i + 2}: expected 4 columns")
            lo, hi = _float(path, i + 2, parts[0]), _float(path, i + 2, parts[1])
            cnt = _float(path, i + 2, parts[3])
            if cnt < 0 or cnt != int(cnt):
                raise InvalidInput(f"{path}: line {i + 2}: count must be a nonnegative integer")
            if parts[2] not in table:
                table[parts[2]] = []
                order.append(parts[2])
            table[parts[2]].append((lo, hi, int(cnt)))
        first = table[order[0]]
        edges = np.array([b[0] for b in first] + [first[-1][1]])
        counts = []
        for lab in order:
            bins = table[lab]
            if [b[:2] for b in bins] != [b[:2] for b in first]:
                raise InvalidInput(f"{path}: channels use different bin edges")
            counts.append([b[2] for b in bins])
        counts = np.array(counts, dtype=np.int64)
        total = int(meta.get("total", counts.sum()))
        zeros = np.zeros(len(order), dtype=np.int64)
        return BinnedCounts(edges, counts, zeros, zeros, total, tuple(order), kind)
    raise InvalidInput(f"{path}: unrecognised columns {cols}")
