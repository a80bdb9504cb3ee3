"""Author data/gameday_scenario.json and verify its target properties."""

import json
import time

from intersafe import analytics, classify, ingest, pet, synth, ttc
from intersafe.params import AnalysisParams

T5_WBT = 26
T5_OTHER = [("EBT", "E"), ("NBT", "N"), ("SBT", "S"), ("EBT", "E")]
T1 = [("NBR", "E"), ("SBR", "W"), ("EBR", "S"), ("WBR", "N")] * 8  # 32 scripts
T2 = [("NBR", "S"), ("SBR", "N"), ("EBR", "W"), ("WBR", "E"), ("NBR", "S")]
T6 = [("NBT", "S"), ("SBT", "N"), ("EBT", "W"), ("WBT", "E")]
DELTAS = [0.30, 0.35, 0.40, 0.45, 0.50]


def build_spec() -> dict:
    scripts = []
    for k in range(T5_WBT):
        scripts.append({"kind": "ttc3", "t": 0, "value": DELTAS[k % len(DELTAS)],
                        "movement": "WBT", "ped_leg": "W",
                        "ped_signal": "dont_walk", "speed_a": 8.0, "speed_b": 1.4})
    for mv, leg in T5_OTHER:
        scripts.append({"kind": "ttc3", "t": 0, "value": 0.4, "movement": mv,
                        "ped_leg": leg, "ped_signal": "dont_walk",
                        "speed_a": 8.0, "speed_b": 1.4})
    for k, (mv, leg) in enumerate(T1):
        scripts.append({"kind": "ttc3", "t": 0, "value": DELTAS[k % len(DELTAS)] * 0.8,
                        "movement": mv, "ped_leg": leg, "ped_signal": "walk",
                        "speed_a": 6.5, "speed_b": 1.5})
    for mv, leg in T2:
        scripts.append({"kind": "ttc3", "t": 0, "value": 0.35, "movement": mv,
                        "ped_leg": leg, "ped_signal": "walk",
                        "speed_a": 6.5, "speed_b": 1.5})
    for mv, leg in T6:
        scripts.append({"kind": "ttc3", "t": 0, "value": 0.4, "movement": mv,
                        "ped_leg": leg, "ped_signal": "walk",
                        "speed_a": 8.0, "speed_b": 1.5})
    for mv, val in [("NBT", 2.0), ("SBT", 1.8), ("WBT", 2.2)]:
        scripts.append({"kind": "ttc1", "t": 0, "value": val, "movement": mv,
                        "speed_a": 4.0})
    for mv, val in [("NBT", 2.0), ("SBT", 1.5), ("EBT", 2.5), ("WBT", 3.0),
                    ("NBT", 1.2)]:
        scripts.append({"kind": "ttc2", "t": 0, "value": val, "movement": mv,
                        "cls_b": "car", "speed_a": 5.5, "speed_b": 8.0})
    for val in [2.5, 2.0, 3.5, 5.0, 1.5, 2.8]:
        scripts.append({"kind": "pet", "t": 0, "value": val, "movement": "WBT",
                        "ped_leg": "W", "ped_signal": "dont_walk",
                        "speed_a": 8.0, "speed_b": 1.4})
    # spread requested times over 09:30..18:30, interleaved deterministically
    t0, t1 = 34200.0, 66600.0
    step = (t1 - t0) / len(scripts)
    order = sorted(range(len(scripts)), key=lambda i: (i * 37) % len(scripts))
    for slot, idx in enumerate(order):
        scripts[idx]["t"] = round(t0 + slot * step, 1)

    return {
        "seed": 20221015,
        "t_start": 28800.0,
        "t_end": 75600.0,
        "ped_rate_per_hour": {"N": 12.0, "E": 12.0, "S": 12.0, "W": 12.0},
        "vehicle_rate_per_hour": {
            "NBT": 6.0, "SBT": 6.0, "EBT": 6.0, "WBT": 6.0,
            "NBR": 3.0, "SBR": 3.0, "EBR": 3.0, "WBR": 3.0,
            "NBL": 3.0, "SBL": 3.0, "EBL": 3.0, "WBL": 3.0,
        },
        "jaywalk_rate_per_hour": 2.0,
        "surges": [{"start": 61200.0, "end": 68400.0, "multiplier": 3.0,
                    "mode": "pedestrian"}],
        "scripts": scripts,
        "signal": {"cycle": 90.0, "walk": 20.0},
    }


def main():
    raw = build_spec()
    spec = synth.ScenarioSpec.from_dict(raw)
    t0 = time.time()
    result = synth.generate(spec)
    print(f"generate: {time.time()-t0:.1f}s, {len(result.trajectories)} objects, "
          f"{len(result.manifest)} scripted")
    params = AnalysisParams()
    t0 = time.time()
    trajs = [ingest.estimate_velocities(t) for t in result.trajectories]
    print(f"velocities: {time.time()-t0:.1f}s")
    t0 = time.time()
    events = ttc.detect_ttc_conflicts(trajs, params)
    print(f"ttc: {time.time()-t0:.1f}s, {len(events)} events")
    t0 = time.time()
    pevents = pet.detect_pet_from_trajectories(trajs, result.cfg, params)
    print(f"pet: {time.time()-t0:.1f}s, {len(pevents)} events")
    t0 = time.time()
    index = classify.TrajectoryIndex(trajs, result.cfg, result.signal_log, params)
    all_events = classify.classify_events(events + pevents, index)
    print(f"classify: {time.time()-t0:.1f}s")

    # manifest match
    detected = {}
    for ev in all_events:
        detected.setdefault((ev.metric, ev.id_a, ev.id_b), []).append(ev)
    missing = []
    for row in result.manifest:
        evs = detected.get((row.metric, row.id_a, row.id_b), [])
        match = [e for e in evs if abs(e.value - row.value) <= 0.05]
        if not match:
            missing.append((row, [round(e.value, 3) for e in evs]))
    print(f"manifest rows matched: {len(result.manifest) - len(missing)}"
          f"/{len(result.manifest)}")
    for row, vals in missing[:10]:
        print("  MISSING", row.script, row.metric, row.value, "got", vals)

    # (a) volume surge ratio
    matrix = analytics.volume_matrix(trajs, result.cfg, "pedestrian", params)
    totals = matrix.hour_totals()
    surge = totals[17:19].mean()
    base = totals[8:17].mean()
    print(f"(a) surge ratio: {surge/base:.2f} (surge {totals[17:19]}, "
          f"base mean {base:.1f})")

    # (b) type histogram
    types = classify.type_histogram(all_events)
    print(f"(b) types: {types}")

    # (c) jaywalk movements
    jw = classify.jaywalk_p2v(all_events)
    hist = classify.movement_histogram(jw)
    print(f"(c) jaywalk P2V: {len(jw)}, top movements {hist[:5]}")


if __name__ == "__main__":
    main()
