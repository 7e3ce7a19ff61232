"""CSV writers for BER tables and constellation dumps.

Files open with '#'-prefixed metadata lines that carry everything needed to
reproduce them, followed by a plain CSV header row. Output is byte-stable for
identical inputs: floats are written with repr() and rows are sorted.
"""

from __future__ import annotations

import os
import sys
from dataclasses import asdict
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .lp import DEFAULT_TOLERANCES
from .model import SystemConfig, safety_margin
from .sim import BerTable, ConstellationDump

BER_COLUMNS = ("method", "snr_db", "bit_errors", "bits_total", "ber", "ci95_halfwidth")
LSWEEP_COLUMNS = ("method", "taps") + BER_COLUMNS[1:]
CONSTELLATION_COLUMNS = ("method", "t", "user", "re_z", "im_z", "margin")


def _num(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def metadata_lines(config: SystemConfig, extra: dict | None = None) -> list[str]:
    lines = [f"onebit-mimo v{__version__}"]
    for key, value in asdict(config).items():
        if key == "noise_variance":
            continue  # set per SNR point
        lines.append(f"{key}={value!r}")
    lines += [
        f"gamma=sqrt(total_power/(2*n_antennas))={config.gamma!r}",
        "gamma_convention=gamma scales every W and u block, including look-ahead slots",
        "snr_convention=SNR=total_power/noise_variance; total_power fixed, noise_variance varied",
        "bit_mapping=Gray code g=d^(d>>1) on PSK index d, symbol exp(j*pi*(2d+1)/D)",
        "history=transmit vectors before slot 1 are zero",
        "ci95=normal approximation 1.96*sqrt(p(1-p)/bits_total); unreliable when bit_errors<20",
    ]
    tol = DEFAULT_TOLERANCES
    lines.append(
        f"lp_tolerances=feasibility:{tol.feasibility!r},optimality:{tol.optimality!r},"
        f"pivot:{tol.pivot!r},pivot_rule:{tol.pivot_rule}")
    for key, value in (extra or {}).items():
        lines.append(f"{key}={value}")
    return ["# " + line for line in lines]


def _write(path, lines: Iterable[str]) -> None:
    """Atomic write via a sibling temp file; ``None`` or "-" means stdout."""
    text = "\n".join(lines) + "\n"
    if path is None or os.fspath(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    tmp = f"{os.fspath(path)}.tmp"
    with open(tmp, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def ber_rows(table: BerTable, taps: int | None = None) -> list[str]:
    rows = []
    for method, snr, out in table.rows():
        cells = [method] + ([str(taps)] if taps is not None else [])
        cells += [_num(snr), str(out.bit_errors), str(out.bits_total),
                  _num(out.ber), _num(out.ci95_halfwidth)]
        rows.append(",".join(cells))
    return rows


def emit_ber_csv(table: BerTable, path, extra_meta: dict | None = None) -> None:
    if not table.counts:
        raise ValueError("empty BER table")
    meta = {
        "methods": ",".join(k.value for k in table.kinds),
        "snr_db": ",".join(_num(s) for s in table.snr_db),
        "trials": table.n_trials,
    }
    meta.update(extra_meta or {})
    _write(path, metadata_lines(table.config, meta) + [",".join(BER_COLUMNS)]
           + ber_rows(table))


def emit_lsweep_csv(tables: Sequence[BerTable], path, extra_meta: dict | None = None) -> None:
    """BER tables from an L sweep, one block of rows per tap count."""
    if not tables:
        raise ValueError("empty L sweep")
    tables = sorted(tables, key=lambda tb: tb.config.n_taps)
    first = tables[0]
    meta = {
        "taps_list": ",".join(str(tb.config.n_taps) for tb in tables),
        "methods": ",".join(k.value for k in first.kinds),
        "snr_db": ",".join(_num(s) for s in first.snr_db),
        "trials": first.n_trials,
        "n_taps_note": "n_taps above is the first sweep value; see the taps column",
    }
    meta.update(extra_meta or {})
    rows = []
    for tb in tables:
        rows += ber_rows(tb, taps=tb.config.n_taps)
    rows.sort(key=lambda r: (r.split(",")[0], int(r.split(",")[1]), float(r.split(",")[2])))
    _write(path, metadata_lines(first.config, meta) + [",".join(LSWEEP_COLUMNS)] + rows)


def constellation_rows(dump: ConstellationDump, theta: float) -> list[str]:
    margins = safety_margin(dump.rotated, theta)
    return [
        ",".join([dump.method, str(int(t)), str(int(k)), _num(z.real), _num(z.imag), _num(mg)])
        for t, k, z, mg in zip(dump.slots, dump.users, dump.rotated, margins)
    ]


def emit_constellation_csv(dumps, path, config: SystemConfig,
                           extra_meta: dict | None = None) -> None:
    """Rotated noiseless points z (gamma included) with their safety margins."""
    if isinstance(dumps, ConstellationDump):
        dumps = [dumps]
    meta = {
        "methods": ",".join(d.method for d in dumps),
        "z_note": "z=conj(s_t,k)*gamma*sum_l H_l x_(t-l), noiseless",
    }
    meta.update(extra_meta or {})
    rows = []
    for dump in sorted(dumps, key=lambda d: d.method):
        rows += constellation_rows(dump, config.theta)
    _write(path, metadata_lines(config, meta) + [",".join(CONSTELLATION_COLUMNS)] + rows)


def read_csv_rows(path) -> list[dict]:
    """Parse a file written by this module back into dicts (string values)."""
    import csv

    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))
