"""Cut-down variants of the gb-desk fixture for fast end-to-end tests."""

from __future__ import annotations

import copy

from softlink.scenario import Scenario, gb_desk

FIXTURE = "fixtures/gb-desk"


def variant(conversion=None, cells=None, manifest=None, **tables) -> Scenario:
    """gb-desk with a subset of production routes / cells and optional table or manifest overrides."""
    base = gb_desk()
    t = {k: v.copy() for k, v in base.tables.items()}
    if conversion is not None:
        t["h2_production"] = t["h2_production"][t["h2_production"].name.isin(conversion)].reset_index(drop=True)
    if cells is not None:
        keep = set(cells)
        t["cells"] = t["cells"][t["cells"].id.isin(keep)].reset_index(drop=True)
        onshore = ~t["cells"].offshore.astype(bool)
        t["cells"].loc[onshore, "heat_share"] /= t["cells"].loc[onshore, "heat_share"].sum()
        t["edges"] = t["edges"][t["edges"].a.isin(keep) & t["edges"].b.isin(keep)].reset_index(drop=True)
    t.update(tables)
    m = copy.deepcopy(base.manifest)
    for key, value in (manifest or {}).items():
        m[key] = {**m[key], **value} if isinstance(value, dict) and isinstance(m.get(key), dict) else value
    return Scenario(m, t)


def mini() -> Scenario:
    """Three cells (one per region plus the CO2 store) and three production routes."""
    return variant(conversion=("smr_syngas", "pem_low", "biomass_gasification_ccs"), cells=("N1", "S1", "X1"))
