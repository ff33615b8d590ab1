#!/usr/bin/env python3
"""Rebuild data/ from the public RCMIP/CMIP6 tables and the HadCRUT4 series.

Inputs (not redistributed here, pass their locations):
  --rcmip-dir   directory holding rcmip-emissions-annual-means-5-1-0-ssp-only.csv
                and rcmip-concentrations-annual-means-5-1-0-ssp-only.csv
  --ancil-dir   directory holding cmip6_solar.csv and cmip6_volcanic.csv
  --tgav        tgav_historical.csv (HadCRUT4 annual global mean, smoothed)

Both RCMIP tables and the CMIP6 forcing files ship inside the fair 1.6.4 wheel
(fair/SSPs/data and fair/ancil). The temperature series ships with pyhector's
test data.
"""
import argparse
import json
import os

import numpy as np
import pandas as pd

FIRST, LAST = 1765, 2100
BRANCH = 2020
HISTORY_SOURCE = "ssp245"

SCENARIOS = [
    ("ssp119", "SSP1-RCP1.9"),
    ("ssp126", "SSP1-RCP2.6"),
    ("ssp245", "SSP2-RCP4.5"),
    ("ssp370", "SSP3-RCP7.0"),
    ("ssp585", "SSP5-RCP8.5"),
]

MW = {"C": 12.011, "CO2": 44.009, "N2": 28.013, "N2O": 44.013,
      "S": 32.065, "SO2": 64.064, "N": 14.007, "NO2": 46.005}

# column, RCMIP variable, factor from RCMIP unit to the CSV unit, CSV unit
GASES = [
    ("CO2_FOSSIL", "Emissions|CO2|MAGICC Fossil and Industrial", 1e-3, "GtCO2/yr"),
    ("CO2_LAND", "Emissions|CO2|MAGICC AFOLU", 1e-3, "GtCO2/yr"),
    ("CH4", "Emissions|CH4", 1.0, "MtCH4/yr"),
    ("N2O", "Emissions|N2O", 1e-3 * MW["N2"] / MW["N2O"], "MtN2/yr"),
    ("SOX", "Emissions|Sulfur", MW["S"] / MW["SO2"], "MtS/yr"),
    ("CO", "Emissions|CO", 1.0, "MtCO/yr"),
    ("NMVOC", "Emissions|VOC", 1.0, "MtNMVOC/yr"),
    ("NOX", "Emissions|NOx", MW["N"] / MW["NO2"], "MtN/yr"),
    ("BC", "Emissions|BC", 1.0, "MtBC/yr"),
    ("OC", "Emissions|OC", 1.0, "MtOC/yr"),
    ("NH3", "Emissions|NH3", 1.0, "MtNH3/yr"),
    ("CF4", "Emissions|F-Gases|PFC|CF4", 1.0, "kt/yr"),
    ("C2F6", "Emissions|F-Gases|PFC|C2F6", 1.0, "kt/yr"),
    ("C6F14", "Emissions|F-Gases|PFC|C6F14", 1.0, "kt/yr"),
    ("HFC23", "Emissions|F-Gases|HFC|HFC23", 1.0, "kt/yr"),
    ("HFC32", "Emissions|F-Gases|HFC|HFC32", 1.0, "kt/yr"),
    ("HFC43_10", "Emissions|F-Gases|HFC|HFC4310mee", 1.0, "kt/yr"),
    ("HFC125", "Emissions|F-Gases|HFC|HFC125", 1.0, "kt/yr"),
    ("HFC134A", "Emissions|F-Gases|HFC|HFC134a", 1.0, "kt/yr"),
    ("HFC143A", "Emissions|F-Gases|HFC|HFC143a", 1.0, "kt/yr"),
    ("HFC227EA", "Emissions|F-Gases|HFC|HFC227ea", 1.0, "kt/yr"),
    ("HFC245FA", "Emissions|F-Gases|HFC|HFC245fa", 1.0, "kt/yr"),
    ("SF6", "Emissions|F-Gases|SF6", 1.0, "kt/yr"),
    ("CFC11", "Emissions|Montreal Gases|CFC|CFC11", 1.0, "kt/yr"),
    ("CFC12", "Emissions|Montreal Gases|CFC|CFC12", 1.0, "kt/yr"),
    ("CFC113", "Emissions|Montreal Gases|CFC|CFC113", 1.0, "kt/yr"),
    ("CFC114", "Emissions|Montreal Gases|CFC|CFC114", 1.0, "kt/yr"),
    ("CFC115", "Emissions|Montreal Gases|CFC|CFC115", 1.0, "kt/yr"),
    ("CCL4", "Emissions|Montreal Gases|CCl4", 1.0, "kt/yr"),
    ("CH3CCL3", "Emissions|Montreal Gases|CH3CCl3", 1.0, "kt/yr"),
    ("HCFC22", "Emissions|Montreal Gases|HCFC22", 1.0, "kt/yr"),
    ("HCFC141B", "Emissions|Montreal Gases|HCFC141b", 1.0, "kt/yr"),
    ("HCFC142B", "Emissions|Montreal Gases|HCFC142b", 1.0, "kt/yr"),
    ("HALON1211", "Emissions|Montreal Gases|Halon1211", 1.0, "kt/yr"),
    ("HALON1202", "Emissions|Montreal Gases|Halon1202", 1.0, "kt/yr"),
    ("HALON1301", "Emissions|Montreal Gases|Halon1301", 1.0, "kt/yr"),
    ("HALON2402", "Emissions|Montreal Gases|Halon2402", 1.0, "kt/yr"),
    ("CH3BR", "Emissions|Montreal Gases|CH3Br", 1.0, "kt/yr"),
    ("CH3CL", "Emissions|Montreal Gases|CH3Cl", 1.0, "kt/yr"),
]


def year_columns(df):
    return [c for c in df.columns if c.isdigit()]


def scenario_table(raw, scen):
    sub = raw[(raw["Scenario"] == scen) & (raw["Region"] == "World")]
    cols = year_columns(sub)
    out = {}
    for name, var, factor, _ in GASES:
        row = sub[sub["Variable"] == var]
        if len(row) != 1:
            raise SystemExit(f"{scen}: expected one row for {var}, got {len(row)}")
        s = row[cols].astype(float).iloc[0]
        s.index = s.index.astype(int)
        s = s.interpolate().fillna(0.0) * factor
        out[name] = s.loc[FIRST:LAST]
    return pd.DataFrame(out)


def write_csv(df, path):
    df.index.name = "year"
    df.to_csv(path, float_format="%.10g")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--rcmip-dir", required=True)
    ap.add_argument("--ancil-dir", required=True)
    ap.add_argument("--tgav", required=True)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    args = ap.parse_args()

    emis = pd.read_csv(os.path.join(args.rcmip_dir, "rcmip-emissions-annual-means-5-1-0-ssp-only.csv"))
    conc = pd.read_csv(os.path.join(args.rcmip_dir, "rcmip-concentrations-annual-means-5-1-0-ssp-only.csv"))

    scen_dir = os.path.join(args.out, "scenarios")
    os.makedirs(scen_dir, exist_ok=True)
    history = scenario_table(emis, HISTORY_SOURCE)
    units = {name: unit for name, _, _, unit in GASES}
    for code, label in SCENARIOS:
        table = scenario_table(emis, code)
        table.loc[:BRANCH - 1] = history.loc[:BRANCH - 1].values
        write_csv(table, os.path.join(scen_dir, f"{label}.csv"))
        meta = {
            "id": label,
            "source": f"RCMIP v5.1.0 {code}, World",
            "history": f"{HISTORY_SOURCE} up to {BRANCH - 1}",
            "branch_year": BRANCH,
            "units": units,
        }
        with open(os.path.join(scen_dir, f"{label}.units.json"), "w") as f:
            json.dump(meta, f, indent=2)
            f.write("\n")

    def ancil(name):
        path = os.path.join(args.ancil_dir, name)
        with open(path) as f:
            skip = next(i for i, line in enumerate(f) if line.startswith("Year,"))
        d = pd.read_csv(path, skiprows=skip + 1, header=None, names=["year", "v"]).dropna()
        d["year"] = d["year"].astype(int)
        return d.set_index("year")["v"].reindex(range(FIRST, LAST + 1)).fillna(0.0)

    forcing_dir = os.path.join(args.out, "forcing")
    os.makedirs(forcing_dir, exist_ok=True)
    exo = pd.DataFrame({"solar": ancil("cmip6_solar.csv"), "volcanic": ancil("cmip6_volcanic.csv")})
    write_csv(exo, os.path.join(forcing_dir, "exogenous.csv"))

    tg = pd.read_csv(args.tgav, skiprows=1)
    tg.columns = ["year", "temperature"]
    tg = tg.set_index("year")["temperature"].astype(float)
    tg = tg - tg.loc[1850:1900].mean()
    c = conc[(conc["Scenario"] == HISTORY_SOURCE) & (conc["Region"] == "World")
             & (conc["Variable"] == "Atmospheric Concentrations|CO2")]
    co2 = c[year_columns(c)].astype(float).iloc[0]
    co2.index = co2.index.astype(int)
    obs = pd.DataFrame({"temperature": tg, "co2_ppm": co2.reindex(tg.index)})
    if obs.isna().any().any():
        raise SystemExit("observation gaps")
    obs_dir = os.path.join(args.out, "observations")
    os.makedirs(obs_dir, exist_ok=True)
    write_csv(obs, os.path.join(obs_dir, "historical.csv"))
    with open(os.path.join(obs_dir, "historical.meta.json"), "w") as f:
        json.dump({
            "temperature_source": "HadCRUT4 global mean (smoothed annual series from pyhector test data)",
            "co2_source": "RCMIP v5.1.0 historical CO2 concentration",
            "reference_period": [1850, 1900],
            "noise_sd_temperature": 0.1,
            "noise_sd_co2": 1.0,
        }, f, indent=2)
        f.write("\n")


if __name__ == "__main__":
    main()
