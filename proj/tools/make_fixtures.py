#!/usr/bin/env python3
"""Regenerate the synthetic fixture data under data/.

Weather is a seasonal + diurnal cycle with AR(1) noise and one synoptic
cold (or hot) spell; everything else is small hand-made tables.
"""

import argparse
import datetime as dt
import math
import random
from pathlib import Path

YEAR = 2021


def weather(path, seed, mean, seasonal, diurnal, noise_sd, phi, spell_day, spell_depth, spell_days):
    rng = random.Random(seed)
    start = dt.datetime(YEAR, 1, 1)
    ar = 0.0
    innov = noise_sd * math.sqrt(1.0 - phi * phi)
    rows = []
    for h in range(8760):
        t = start + dt.timedelta(hours=h)
        doy = h / 24.0
        season = -seasonal * math.cos(2 * math.pi * (doy - 20.0) / 365.0)
        day = -diurnal * math.cos(2 * math.pi * (t.hour - 3.0) / 24.0)
        ar = phi * ar + rng.gauss(0.0, innov)
        x = (doy - spell_day) / (spell_days / 2.0)
        spell = spell_depth * math.exp(-x * x * 2.0)
        rows.append((t, mean + season + day + ar + spell))
    with open(path, "w") as f:
        f.write("timestamp,outdoor_temp_C\n")
        for t, v in rows:
            f.write(f"{t:%Y-%m-%d %H:%M},{v:.2f}\n")


def daily(path, values):
    with open(path, "w") as f:
        f.write("timestamp,value_kW\n")
        for h, v in enumerate(values):
            f.write(f"{YEAR}-01-01 {h:02d}:00,{v:.3f}\n")


def table(path, header, rows):
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for r in rows:
            f.write(",".join(str(x) for x in r) + "\n")


def curve(path, nodes):
    table(path, ["outdoor_temp_C", "capacity_kW", "cop"], nodes)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "data"))
    out = Path(ap.parse_args().out)
    (out / "curves").mkdir(parents=True, exist_ok=True)
    (out / "counties").mkdir(parents=True, exist_ok=True)
    (out / "weather").mkdir(parents=True, exist_ok=True)
    (out / "profiles").mkdir(parents=True, exist_ok=True)

    weather(out / "weather" / "cold.csv", 11, 7.0, 16.5, 5.0, 4.5, 0.97, 28.0, -12.0, 6.0)
    weather(out / "weather" / "hot_humid.csv", 12, 25.0, 3.8, 3.5, 1.6, 0.96, 200.0, 3.0, 6.0)

    curve(out / "curves" / "hp_today_heating.csv", [
        (-30, 3.2, 1.2), (-25, 4.2, 1.35), (-20, 5.3, 1.55), (-15, 6.3, 1.75), (-8.3, 7.5, 2.1),
        (0, 8.9, 2.6), (8.33, 10.5, 3.4), (15, 11.6, 4.0), (25, 12.5, 4.6)])
    curve(out / "curves" / "hp_cold_climate_heating.csv", [
        (-30, 7.4, 1.45), (-25, 8.4, 1.6), (-20, 9.5, 1.85), (-15, 10.5, 2.1), (-8.3, 10.8, 2.4),
        (0, 11.0, 2.8), (8.33, 11.5, 3.6), (15, 12.0, 4.2), (25, 12.5, 4.8)])
    curve(out / "curves" / "hp_today_cooling.csv", [
        (20, 11.6, 5.0), (25, 11.2, 4.4), (30, 10.9, 3.8), (35, 10.55, 3.3), (40, 10.0, 2.8), (45, 9.4, 2.4)])
    curve(out / "curves" / "hp_cold_climate_cooling.csv", [
        (20, 11.6, 5.3), (25, 11.2, 4.7), (30, 10.9, 4.1), (35, 10.55, 3.5), (40, 10.0, 3.0), (45, 9.4, 2.6)])
    table(out / "curves" / "ev_consumption.csv", ["outdoor_temp_C", "multiplier"], [
        (-30, 1.55), (-20, 1.45), (-10, 1.3), (0, 1.15), (10, 1.05), (20, 1.0), (25, 1.0),
        (30, 1.08), (35, 1.15), (40, 1.22)])

    daily(out / "profiles" / "misc_load.csv", [
        0.55, 0.50, 0.48, 0.47, 0.48, 0.55, 0.75, 0.95, 0.90, 0.80, 0.75, 0.75,
        0.78, 0.75, 0.75, 0.80, 0.95, 1.20, 1.45, 1.50, 1.40, 1.20, 0.95, 0.70])
    daily(out / "profiles" / "hot_water_draw.csv", [
        0.05, 0.03, 0.02, 0.02, 0.05, 0.30, 0.95, 1.15, 0.80, 0.50, 0.35, 0.30,
        0.30, 0.25, 0.25, 0.30, 0.40, 0.60, 0.80, 0.75, 0.60, 0.45, 0.25, 0.10])

    table(out / "counties" / "housing_cold.csv",
          ["type", "weight", "floor_area_m2", "resistance_C_per_kW", "capacitance_kWh_per_C"], [
              ("single_family_detached", 0.68, 190, 2.3, 5.0),
              ("single_family_attached", 0.07, 130, 3.6, 3.2),
              ("multifamily_small", 0.12, 85, 5.5, 2.0),
              ("multifamily_large", 0.10, 75, 7.0, 1.6),
              ("mobile_home", 0.03, 80, 2.6, 1.2)])
    table(out / "counties" / "housing_hot_humid.csv",
          ["type", "weight", "floor_area_m2", "resistance_C_per_kW", "capacitance_kWh_per_C"], [
              ("single_family_detached", 0.52, 170, 2.6, 4.2),
              ("single_family_attached", 0.10, 120, 4.0, 2.8),
              ("multifamily_small", 0.14, 80, 6.0, 1.8),
              ("multifamily_large", 0.20, 70, 7.5, 1.5),
              ("mobile_home", 0.04, 75, 3.0, 1.1)])
    table(out / "counties" / "vehicles_cold.csv", ["vehicles", "probability"],
          [(0, 0.06), (1, 0.32), (2, 0.40), (3, 0.22)])
    table(out / "counties" / "vehicles_hot_humid.csv", ["vehicles", "probability"],
          [(0, 0.08), (1, 0.40), (2, 0.38), (3, 0.14)])


if __name__ == "__main__":
    main()
