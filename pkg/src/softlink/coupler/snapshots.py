"""Per-iteration CSV snapshots and the run manifest."""

from __future__ import annotations

import json
from pathlib import Path

import pandas as pd

from ..power import summary_frame
from ..rtn import write_heat_mix_csv, write_plan_csvs
from ..timeslice import SLICE_LABELS
from .loop import CouplingState, IterationRecord


def slice_price_frame(record: IterationRecord) -> pd.DataFrame:
    rows = []
    for p in sorted(record.slice_prices):
        for r in sorted(record.slice_prices[p]):
            for s, label in enumerate(SLICE_LABELS):
                rows.append((p, r, s, label, float(record.slice_prices[p][r][s]), float(record.retail_prices[p][r][s])))
    return pd.DataFrame(rows, columns=["period", "region", "slice", "label", "wholesale", "retail"])


def demand_frame(record: IterationRecord) -> pd.DataFrame:
    rows = []
    for p in sorted(record.power):
        for key, twh in record.power[p].demand_twh.items():
            rows.append((p, key, twh))
    return pd.DataFrame(rows, columns=["period", "component", "twh"])


def write_snapshot(record: IterationRecord, directory: str | Path) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    path = directory / "slice_prices.csv"
    slice_price_frame(record).to_csv(path, index=False, float_format="%.6f")
    out.append(path)
    caps = pd.concat([summary_frame(record.power[p]) for p in sorted(record.power)], ignore_index=True)
    path = directory / "power_capacity.csv"
    caps.to_csv(path, index=False, float_format="%.6f")
    out.append(path)
    path = directory / "power_demand.csv"
    demand_frame(record).to_csv(path, index=False, float_format="%.6f")
    out.append(path)
    if record.mix is not None:
        out.append(write_heat_mix_csv(record.mix, directory / "heat_mix.csv"))
    if record.plan is not None:
        out.extend(write_plan_csvs(record.plan, directory))
    return out


def record_summary(record: IterationRecord) -> dict:
    def num(x):
        x = float(x)
        return x if x == x and abs(x) != float("inf") else None

    return {
        "iteration": record.iteration,
        "rtn_objective_gbp_m": num(record.rtn_objective),
        "rtn_gap": num(record.rtn_gap),
        "rtn_flagged": record.rtn_flagged,
        "max_share_change": num(record.max_share_change),
        "max_price_change": num(record.max_price_change),
        "periods": {
            str(p): {
                "mean_wholesale_price": round(s.mean_price, 6),
                "time_mean_wholesale_price": round(s.time_mean_price, 6),
                "heat_electric_twh": round(s.heat_electric_twh, 6),
                "emissions_mt": round(s.emissions_mt, 6),
                "capacity_gw": {k: round(v, 6) for k, v in sorted(s.capacity_gw.items())},
            } for p, s in sorted(record.power.items())
        },
    }


def write_manifest(state: CouplingState, directory: str | Path, files: list[Path], extra: dict | None = None) -> Path:
    directory = Path(directory)
    manifest = {
        "status": state.status,
        "failure": state.failure,
        "iterations": [record_summary(r) for r in state.history],
        "files": sorted(str(Path(f).relative_to(directory)) for f in files),
    }
    if extra:
        manifest.update(extra)
    path = directory / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path
