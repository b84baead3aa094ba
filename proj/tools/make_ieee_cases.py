#!/usr/bin/env python3
"""Builds the bundled IEEE 39+9 study cases.

Writes two case files into cases/:

  ieee39_9_ac.json      New England 39-bus system plus the WSCC 9-bus system
                        (renumbered 40-48) joined by a weak 30 MVA tie between
                        bus 6 (39 side) and bus 46 (9-bus side, original 7).
  ieee39_9_hybrid.json  The same AC network with an 8-terminal DC grid overlay
                        collecting 700 MW of offshore wind; five AC/DC
                        converters feed load centers on both AC subsystems.

Data sources are the widely published IEEE test case tables. Deviations,
chosen to fit the network model here (no transformer taps, no bus shunts):
  - off-nominal transformer ratios are set to 1.0,
  - lossless branches get a 1e-4 pu resistance floor and the two positive
    reactive-power floors are relaxed to zero; both changes keep the
    semidefinite relaxation tight,
  - branch ratings use a uniform generous 1200 / 1500 MVA so the study
    isolates DC-side congestion,
  - 39-bus generator costs use a spread of quadratic coefficients instead of
    the uniform placeholder polynomial of the reference tables.
"""

import json
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "cases")

# ---------------------------------------------------------------- 39-bus AC
# bus: id -> (Pd, Qd)
LOAD39 = {
    1: (97.6, 44.2), 3: (322.0, 2.4), 4: (500.0, 184.0), 7: (233.8, 84.0),
    8: (522.0, 176.6), 9: (6.5, -66.6), 12: (8.53, 88.0), 15: (320.0, 153.0),
    16: (329.0, 32.3), 18: (158.0, 30.0), 20: (680.0, 103.0),
    21: (274.0, 115.0), 23: (247.5, 84.6), 24: (308.6, -92.2),
    25: (224.0, 47.2), 26: (139.0, 17.0), 27: (281.0, 75.5),
    28: (206.0, 27.6), 29: (283.5, 26.9), 31: (9.2, 4.6), 39: (1104.0, 250.0),
}

# branch: (from, to, r, x, b, step_up)
BRANCH39 = [
    (1, 2, 0.0035, 0.0411, 0.6987, False),
    (1, 39, 0.0010, 0.0250, 0.7500, False),
    (2, 3, 0.0013, 0.0151, 0.2572, False),
    (2, 25, 0.0070, 0.0086, 0.1460, False),
    (2, 30, 0.0000, 0.0181, 0.0000, True),
    (3, 4, 0.0013, 0.0213, 0.2214, False),
    (3, 18, 0.0011, 0.0133, 0.2138, False),
    (4, 5, 0.0008, 0.0128, 0.1342, False),
    (4, 14, 0.0008, 0.0129, 0.1382, False),
    (5, 6, 0.0002, 0.0026, 0.0434, False),
    (5, 8, 0.0008, 0.0112, 0.1476, False),
    (6, 7, 0.0006, 0.0092, 0.1130, False),
    (6, 11, 0.0007, 0.0082, 0.1389, False),
    (6, 31, 0.0000, 0.0250, 0.0000, True),
    (7, 8, 0.0004, 0.0046, 0.0780, False),
    (8, 9, 0.0023, 0.0363, 0.3804, False),
    (9, 39, 0.0010, 0.0250, 1.2000, False),
    (10, 11, 0.0004, 0.0043, 0.0729, False),
    (10, 13, 0.0004, 0.0043, 0.0729, False),
    (10, 32, 0.0000, 0.0200, 0.0000, True),
    (12, 11, 0.0016, 0.0435, 0.0000, False),
    (12, 13, 0.0016, 0.0435, 0.0000, False),
    (13, 14, 0.0009, 0.0101, 0.1723, False),
    (14, 15, 0.0018, 0.0217, 0.3660, False),
    (15, 16, 0.0009, 0.0094, 0.1710, False),
    (16, 17, 0.0007, 0.0089, 0.1342, False),
    (16, 19, 0.0016, 0.0195, 0.3040, False),
    (16, 21, 0.0008, 0.0135, 0.2548, False),
    (16, 24, 0.0003, 0.0059, 0.0680, False),
    (17, 18, 0.0007, 0.0082, 0.1319, False),
    (17, 27, 0.0013, 0.0173, 0.3216, False),
    (19, 20, 0.0007, 0.0138, 0.0000, False),
    (19, 33, 0.0007, 0.0142, 0.0000, True),
    (20, 34, 0.0009, 0.0180, 0.0000, True),
    (21, 22, 0.0008, 0.0140, 0.2565, False),
    (22, 23, 0.0006, 0.0096, 0.1846, False),
    (22, 35, 0.0000, 0.0143, 0.0000, True),
    (23, 24, 0.0022, 0.0350, 0.3610, False),
    (23, 36, 0.0005, 0.0272, 0.0000, True),
    (25, 26, 0.0032, 0.0323, 0.5310, False),
    (25, 37, 0.0006, 0.0232, 0.0000, True),
    (26, 27, 0.0014, 0.0147, 0.2396, False),
    (26, 28, 0.0043, 0.0474, 0.7802, False),
    (26, 29, 0.0057, 0.0625, 1.0290, False),
    (28, 29, 0.0014, 0.0151, 0.2490, False),
    (29, 38, 0.0008, 0.0156, 0.0000, True),
]

# gen: bus -> (Pmax, Qmin, Qmax, c2, c1)   Pmin = 0, c0 = 0
GEN39 = {
    30: (1040.0, -100.0, 400.0, 0.020, 30.0),
    31: (850.0, -100.0, 300.0, 0.015, 25.0),
    32: (725.0, -100.0, 300.0, 0.018, 28.0),
    33: (652.0, 0.0, 250.0, 0.021, 32.0),
    34: (508.0, 0.0, 167.0, 0.025, 35.0),
    35: (687.0, -100.0, 300.0, 0.017, 27.0),
    36: (580.0, 0.0, 240.0, 0.022, 33.0),
    37: (564.0, 0.0, 250.0, 0.019, 29.0),
    38: (865.0, -150.0, 300.0, 0.016, 26.0),
    39: (1100.0, -100.0, 300.0, 0.014, 24.0),
}

# ----------------------------------------------------------------- 9-bus AC
# original WSCC numbering; renumbered by +39 when merged
LOAD9 = {5: (90.0, 30.0), 7: (100.0, 35.0), 9: (125.0, 50.0)}
BRANCH9 = [
    (1, 4, 0.0000, 0.0576, 0.0000, True),
    (4, 5, 0.0170, 0.0920, 0.1580, False),
    (5, 6, 0.0390, 0.1700, 0.3580, False),
    (3, 6, 0.0000, 0.0586, 0.0000, True),
    (6, 7, 0.0119, 0.1008, 0.2090, False),
    (7, 8, 0.0085, 0.0720, 0.1490, False),
    (8, 2, 0.0000, 0.0625, 0.0000, True),
    (8, 9, 0.0320, 0.1610, 0.3060, False),
    (9, 4, 0.0100, 0.0850, 0.1760, False),
]
# bus -> (Pmin, Pmax, Qmin, Qmax, c2, c1, c0)
GEN9 = {
    1: (10.0, 250.0, -300.0, 300.0, 0.1100, 5.0, 150.0),
    2: (10.0, 300.0, -300.0, 300.0, 0.0850, 1.2, 600.0),
    3: (10.0, 270.0, -300.0, 300.0, 0.1225, 1.0, 335.0),
}

TIE = (6, 46, 0.0020, 0.0200, 0.0000, 600.0)  # interconnection tie

V_MIN, V_MAX = 0.94, 1.06
# controlled buses (generator and converter terminals) are held slightly
# below the band ceiling so passive buses settle strictly inside it
V_MAX_CTRL = 1.05
RATE_LINE, RATE_STEP_UP = 1200.0, 1500.0
R_FLOOR = 1e-4


def ac_network():
    buses, gens, lines = [], [], []
    for b in range(1, 40):
        pd, qd = LOAD39.get(b, (0.0, 0.0))
        buses.append({"id": b, "v_min": V_MIN, "v_max": V_MAX,
                      "p_load": pd, "q_load": qd, "is_slack": b == 31})
    for b, (pmax, qmin, qmax, c2, c1) in sorted(GEN39.items()):
        gens.append({"bus": b, "p_min": 0.0, "p_max": pmax,
                     "q_min": qmin, "q_max": qmax, "c2": c2, "c1": c1, "c0": 0.0})
    for f, t, r, x, b, step_up in BRANCH39:
        lines.append({"from": f, "to": t, "r": max(r, R_FLOOR), "x": x, "b": b,
                      "s_max": RATE_STEP_UP if step_up else RATE_LINE})

    for b in range(1, 10):
        pd, qd = LOAD9.get(b, (0.0, 0.0))
        buses.append({"id": b + 39, "v_min": V_MIN, "v_max": V_MAX,
                      "p_load": pd, "q_load": qd, "is_slack": False})
    for b, (pmin, pmax, qmin, qmax, c2, c1, c0) in sorted(GEN9.items()):
        gens.append({"bus": b + 39, "p_min": pmin, "p_max": pmax,
                     "q_min": qmin, "q_max": qmax, "c2": c2, "c1": c1, "c0": c0})
    for f, t, r, x, b, step_up in BRANCH9:
        lines.append({"from": f + 39, "to": t + 39, "r": max(r, R_FLOOR), "x": x,
                      "b": b, "s_max": RATE_STEP_UP if step_up else RATE_LINE})

    f, t, r, x, b, rate = TIE
    lines.append({"from": f, "to": t, "r": r, "x": x, "b": b, "s_max": rate})

    gen_buses = {g["bus"] for g in gens}
    for bus in buses:
        if bus["id"] in gen_buses:
            bus["v_max"] = V_MAX_CTRL
    return buses, gens, lines


def dc_overlay():
    """8-terminal DC grid: wind at bus 6, converters on both AC subsystems."""
    dc_buses = [
        {"id": 1, "v_min": 0.9, "v_max": 1.1, "p_min": -300, "p_max": 300,
         "is_master": True, "v_master": 0.98},
        {"id": 2, "v_min": 0.9, "v_max": 1.1, "p_min": -300, "p_max": 300},
        {"id": 3, "v_min": 0.9, "v_max": 1.1, "p_min": -300, "p_max": 300},
        {"id": 4, "v_min": 0.9, "v_max": 1.1, "p_min": -200, "p_max": 200},
        {"id": 5, "v_min": 0.9, "v_max": 1.1, "p_min": -200, "p_max": 200},
        {"id": 6, "v_min": 0.9, "v_max": 1.1, "p_min": 0, "p_max": 700},
        {"id": 7, "v_min": 0.9, "v_max": 1.1, "p_min": -40, "p_max": -40},
        {"id": 8, "v_min": 0.9, "v_max": 1.1, "p_min": 0, "p_max": 0},
    ]
    dc_lines = [
        {"from": 2, "to": 6, "conductance": 60, "p_max": 300},
        {"from": 2, "to": 6, "conductance": 60, "p_max": 300},
        {"from": 1, "to": 6, "conductance": 50, "p_max": 300},
        {"from": 1, "to": 6, "conductance": 50, "p_max": 300},
        {"from": 6, "to": 3, "conductance": 110, "p_max": 300},
        {"from": 1, "to": 3, "conductance": 90, "p_max": 300},
        {"from": 1, "to": 4, "conductance": 186, "p_max": 90},
        {"from": 4, "to": 5, "conductance": 2, "p_max": 300},
        {"from": 5, "to": 7, "conductance": 5, "p_max": 300},
        {"from": 8, "to": 7, "conductance": 75, "p_max": 300},
    ]
    # converter 6 is the offshore collector; the others land on load buses
    converters = [
        {"ac_bus": 8, "dc_bus": 1, "efficiency": 0.98, "s_conv": 500},
        {"ac_bus": 4, "dc_bus": 2, "efficiency": 0.98, "s_conv": 360.55},
        {"ac_bus": 16, "dc_bus": 3, "efficiency": 0.98, "s_conv": 224},
        {"ac_bus": 20, "dc_bus": 4, "efficiency": 0.98, "s_conv": 283},
        {"ac_bus": 44, "dc_bus": 5, "efficiency": 0.98, "s_conv": 283},
        {"ac_bus": None, "dc_bus": 6, "efficiency": 0.98, "s_conv": 1000},
    ]
    dcdc = [{"bus_k": 3, "bus_m": 8, "delta": 0.0, "beta": 0.05,
             "gamma": 0.03, "q_max": 200}]
    wind = [{"dc_bus": 6, "p_wind": 700}]
    return dc_buses, dc_lines, converters, dcdc, wind


def write(name, case):
    path = os.path.join(OUT, name)
    with open(path, "w") as f:
        json.dump(case, f, indent=1)
        f.write("\n")
    print("wrote", path)


def main():
    buses, gens, lines = ac_network()
    ac_only = {"name": "ieee39_9_ac", "base_mva": 100.0,
               "ac_buses": buses, "generators": gens, "ac_lines": lines}
    write("ieee39_9_ac.json", ac_only)

    dc_buses, dc_lines, converters, dcdc, wind = dc_overlay()
    conv_terms = {c["ac_bus"] for c in converters if c["ac_bus"] is not None}
    hyb_buses = [dict(b) for b in buses]
    for bus in hyb_buses:
        if bus["id"] in conv_terms:
            bus["v_max"] = min(bus["v_max"], V_MAX_CTRL)
    hybrid = dict(ac_only)
    hybrid["ac_buses"] = hyb_buses
    hybrid["name"] = "ieee39_9_hybrid"
    hybrid["dc_buses"] = dc_buses
    hybrid["dc_lines"] = dc_lines
    hybrid["acdc_converters"] = converters
    hybrid["dcdc_converters"] = dcdc
    hybrid["wind"] = wind
    write("ieee39_9_hybrid.json", hybrid)


if __name__ == "__main__":
    main()
