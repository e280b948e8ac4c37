#!/usr/bin/env python3
"""Regenerate the bundled scenario and run-config files."""

import json
import math
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
LANE_W = 3.5


def dump(path, obj):
    path.write_text(json.dumps(obj, indent=1) + "\n")


def rnd(p):
    return [round(p[0], 4), round(p[1], 4)]


def offset_polyline(pts, offset):
    """Shift a polyline along its left normal by `offset` meters."""
    out = []
    for i, (x, y) in enumerate(pts):
        a = pts[max(i - 1, 0)]
        b = pts[min(i + 1, len(pts) - 1)]
        tx, ty = b[0] - a[0], b[1] - a[1]
        n = math.hypot(tx, ty)
        out.append(rnd((x - ty / n * offset, y + tx / n * offset)))
    return out


def lane(lid, pts, successors=()):
    return {"id": lid, "width": LANE_W, "centerline": pts, "successors": list(successors)}


def three_lane_road(center, name):
    """Lanes R (right), C (center), L (left) around `center`."""
    return {
        "meta": {"name": name, "grid_resolution": 0.5},
        "lanes": [
            lane("C", offset_polyline(center, 0.0)),
            lane("L", offset_polyline(center, LANE_W)),
            lane("R", offset_polyline(center, -LANE_W)),
        ],
    }


def curvy_center():
    return [rnd((x, 15.0 * math.sin(2.0 * math.pi * x / 150.0))) for x in range(0, 301, 2)]


def straight_center(length):
    return [[float(x), 0.0] for x in range(0, length + 1, 10)]


def arc(c, r, a0, a1, n=12):
    return [rnd((c[0] + r * math.cos(a0 + (a1 - a0) * k / n), c[1] + r * math.sin(a0 + (a1 - a0) * k / n)))
            for k in range(n + 1)]


def intersection():
    """Two four-lane roads crossing at the origin; right-hand traffic."""
    box, far = 12.0, 100.0
    lanes = []
    # Unit travel direction and right normal per approach.
    approaches = {"E": (1, 0), "N": (0, 1), "W": (-1, 0), "S": (0, -1)}
    right = {k: (d[1], -d[0]) for k, d in approaches.items()}
    turn_right = {"E": "S", "S": "W", "W": "N", "N": "E"}
    turn_left = {"E": "N", "N": "W", "W": "S", "S": "E"}

    def line(k, off, a, b):
        dx, dy = approaches[k]
        rx, ry = right[k]
        return [rnd((dx * t + rx * off, dy * t + ry * off)) for t in (a, b)]

    for k in approaches:
        for idx, off in (("1", 0.5 * LANE_W), ("2", 1.5 * LANE_W)):
            succ = [f"{k}{idx}_straight"]
            if idx == "2":
                succ.append(f"{k}{idx}_right")
            else:
                succ.append(f"{k}{idx}_left")
            lanes.append(lane(f"{k}{idx}_in", line(k, off, -far, -box), succ))
            lanes.append(lane(f"{k}{idx}_straight", line(k, off, -box, box), [f"{k}{idx}_out"]))
            lanes.append(lane(f"{k}{idx}_out", line(k, off, box, far)))

        # Right turn from the outer lane into the outer lane of the road to the right.
        dx, dy = approaches[k]
        rx, ry = right[k]
        k2 = turn_right[k]
        start = (-dx * box + rx * 1.5 * LANE_W, -dy * box + ry * 1.5 * LANE_W)
        d2, r2 = approaches[k2], right[k2]
        end = (d2[0] * box + r2[0] * 1.5 * LANE_W, d2[1] * box + r2[1] * 1.5 * LANE_W)
        center = (start[0] + rx * (box - 1.5 * LANE_W), start[1] + ry * (box - 1.5 * LANE_W))
        a0 = math.atan2(start[1] - center[1], start[0] - center[0])
        a1 = math.atan2(end[1] - center[1], end[0] - center[0])
        if a1 - a0 > math.pi:
            a1 -= 2 * math.pi
        if a0 - a1 > math.pi:
            a1 += 2 * math.pi
        lanes.append(lane(f"{k}2_right", arc(center, box - 1.5 * LANE_W, a0, a1), [f"{k2}2_out"]))

        # Left turn from the inner lane into the inner lane of the road to the left.
        k3 = turn_left[k]
        start = (-dx * box + rx * 0.5 * LANE_W, -dy * box + ry * 0.5 * LANE_W)
        d3, r3 = approaches[k3], right[k3]
        end = (d3[0] * box + r3[0] * 0.5 * LANE_W, d3[1] * box + r3[1] * 0.5 * LANE_W)
        radius = box + 0.5 * LANE_W
        center = (start[0] - rx * radius, start[1] - ry * radius)
        a0 = math.atan2(start[1] - center[1], start[0] - center[0])
        a1 = math.atan2(end[1] - center[1], end[0] - center[0])
        if a1 - a0 > math.pi:
            a1 -= 2 * math.pi
        if a0 - a1 > math.pi:
            a1 += 2 * math.pi
        lanes.append(lane(f"{k}1_left", arc(center, radius, a0, a1), [f"{k3}1_out"]))

    vehicles = [
        {"id": 0, "path": ["E2_in", "E2_straight"], "s": 20.0, "speed": 8.0, "desired_speed": 10.0},
        {"id": 1, "path": ["E1_in", "E1_left"], "s": 35.0, "speed": 8.0, "desired_speed": 9.0},
        {"id": 2, "path": ["N2_in", "N2_straight"], "s": 30.0, "speed": 8.0, "desired_speed": 10.0},
        {"id": 3, "path": ["W2_in", "W2_right"], "s": 25.0, "speed": 8.0, "desired_speed": 8.0},
        {"id": 4, "path": ["S1_in", "S1_straight"], "s": 10.0, "speed": 8.0, "desired_speed": 11.0},
        {"id": 5, "path": ["W1_in", "W1_straight"], "s": 50.0, "speed": 6.0, "desired_speed": 9.0},
    ]
    return {"meta": {"name": "intersection", "grid_resolution": 0.5}, "lanes": lanes, "vehicles": vehicles}


def main():
    sc = ROOT / "scenarios"
    cf = ROOT / "configs"
    sc.mkdir(exist_ok=True)
    cf.mkdir(exist_ok=True)

    straight = three_lane_road(straight_center(200), "straight_road")
    straight["vehicles"] = [
        {"id": 0, "path": ["R"], "s": 0.0, "speed": 0.0, "desired_speed": 10.0},
        {"id": 1, "path": ["C"], "s": 30.0, "speed": 8.0, "desired_speed": 8.0},
        {"id": 2, "path": ["L"], "s": 60.0, "speed": 10.0, "desired_speed": 12.0},
    ]
    dump(sc / "straight_road.json", straight)

    curvy = three_lane_road(curvy_center(), "curvy_road")
    curvy["vehicles"] = [
        {"id": 0, "path": ["R"], "s": 10.0, "speed": 8.0, "desired_speed": 8.0},
        {"id": 1, "path": ["R"], "s": 45.0, "speed": 8.0, "desired_speed": 8.0},
        {"id": 2, "path": ["C"], "s": 30.0, "speed": 10.0, "desired_speed": 10.0},
        {"id": 3, "path": ["C"], "s": 75.0, "speed": 10.0, "desired_speed": 10.0},
        {"id": 4, "path": ["L"], "s": 20.0, "speed": 12.0, "desired_speed": 12.0},
        {"id": 5, "path": ["L"], "s": 70.0, "speed": 12.0, "desired_speed": 12.0},
    ]
    dump(sc / "curvy_road.json", curvy)

    crosswalk = three_lane_road(straight_center(250), "crosswalk")
    crosswalk["stop_lines"] = [
        {"id": f"stop_{k}", "point": [120.0, off], "red": [0.0, 12.0]} for k, off in (("R", -LANE_W), ("C", 0.0), ("L", LANE_W))
    ]
    crosswalk["vehicles"] = [
        {"id": 0, "path": ["R"], "s": 40.0, "speed": 10.0, "desired_speed": 10.0},
        {"id": 1, "path": ["C"], "s": 60.0, "speed": 10.0, "desired_speed": 10.0},
        {"id": 2, "path": ["C"], "s": 20.0, "speed": 10.0, "desired_speed": 10.0},
        {"id": 3, "path": ["L"], "s": 50.0, "speed": 11.0, "desired_speed": 11.0},
    ]
    dump(sc / "crosswalk.json", crosswalk)

    dump(sc / "intersection.json", intersection())

    congestion = {
        "meta": {"name": "congestion", "grid_resolution": 0.5},
        "lanes": [lane("A", straight_center(300))],
        "vehicles": [
            {"id": 0, "path": ["A"], "s": 0.0, "speed": 10.0, "desired_speed": 10.0},
            {"id": 1, "path": ["A"], "s": 30.0, "speed": 3.0, "desired_speed": 3.0},
        ],
    }
    dump(sc / "congestion.json", congestion)

    # Teaser: the right-lane vehicle must be in the center lane at t = 8 s.
    kx = 100.0
    center_pt = rnd((kx, 15.0 * math.sin(2.0 * math.pi * kx / 150.0)))
    dump(cf / "teaser.json", {
        "scenario": "../scenarios/curvy_road.json",
        "duration": 12.0,
        "dt": 0.01,
        "dtt": 0.5,
        "seed": 7,
        "output": "out/teaser",
        "edits": [{"vehicle": 1, "time": 8.0, "point": center_pt}],
    })
    dump(cf / "benchmark.json", {
        "scenario": "../scenarios/straight_road.json",
        "duration": 12.0,
        "vehicles": [{"id": 0, "path": ["C"], "s": 0.0, "speed": 0.0, "desired_speed": 10.0}],
        "output": "out/benchmark",
        "edits": [{"vehicle": 0, "time": 10.0, "s": 100.0, "speed": 0.0}],
    })
    dump(cf / "crosswalk.json", {
        "scenario": "../scenarios/crosswalk.json",
        "duration": 16.0,
        "output": "out/crosswalk",
    })
    dump(cf / "congestion_unmet.json", {
        "scenario": "../scenarios/congestion.json",
        "duration": 12.0,
        "output": "out/congestion_unmet",
        "edits": [{"vehicle": 0, "time": 10.0, "s": 110.0}],
    })
    dump(cf / "congestion_yield.json", {
        "scenario": "../scenarios/congestion.json",
        "duration": 12.0,
        "output": "out/congestion_yield",
        "edits": [
            {"vehicle": 1, "time": 10.0, "s": 150.0},
            {"vehicle": 0, "time": 10.0, "s": 110.0},
        ],
    })
    dump(cf / "intersection_lane_change.json", {
        "scenario": "../scenarios/intersection.json",
        "duration": 12.0,
        "output": "out/intersection",
        "paths": [{"vehicle": 0, "waypoints": [[-80.0, -5.25], [-40.0, -1.75], [60.0, -1.75]]}],
    })


if __name__ == "__main__":
    main()
