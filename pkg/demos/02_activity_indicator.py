"""From raw accelerometer samples to an activity indicator.

Builds a day of synthetic triaxial data by hand, then runs the stream
through session segmentation, per-minute activity counts and the final
counts/min indicator, plus night-time residence inference from GPS.
"""

import numpy as np

import geobehave as gb
from geobehave.sensing import GpsFix, SensorSample

cfg = gb.ActivityConfig()
rng = np.random.default_rng(8)

# One evening of recording: quiet phone on a table, a brisk half hour,
# then a gap (phone left behind), then light activity before midnight.
samples = []


def add_block(t0_min, minutes, wobble_g):
    for m in range(minutes):
        for s in range(60):  # 1 Hz
            t = (t0_min + m) * 60_000 + s * 1000
            mag = 1.0 + wobble_g * float(rng.standard_normal())
            samples.append(SensorSample(t, 0.0, 0.0, mag))


add_block(18 * 60, 40, 0.005)   # 18:00, nearly stationary
add_block(19 * 60, 30, 0.35)    # 19:00, vigorous movement
add_block(21 * 60, 50, 0.08)    # 21:00, light movement after a gap

sessions = gb.segment_sessions(samples, cfg)
print(f"{len(samples)} samples -> {len(sessions)} sessions")
for s in sessions:
    print(f"  session {s.start // 60000}m .. {s.end // 60000}m "
          f"({(s.end - s.start) / 60000:.0f} min, {len(s.samples)} samples)")

# Per-minute counts: zero while stationary, hundreds while moving.
minutes = gb.activity_counts_per_minute(sessions[0], cfg)
print("\nfirst session minute counts (first 5):")
for start, counts in minutes[:5]:
    print(f"  minute {start // 60000}: {counts:7.1f} counts/min")

for i, s in enumerate(sessions):
    values = [c for _, c in gb.activity_counts_per_minute(s, cfg)]
    print(f"session {i}: mean {np.mean(values):7.1f} counts/min over "
          f"{len(values)} minutes")

print(f"\nindicator (all sessions): "
      f"{gb.indicator(sessions, cfg):.1f} counts/min")

# Residence: the modal night-time (23:00-07:00) cell.
home = gb.GeoPoint(40.6401, 22.9444)
fixes = [
    GpsFix(int((day * 24 + 1.5) * 3_600_000 + k * 600_000), home, 10.0)
    for day in range(3)
    for k in range(4)
]
fixes.append(GpsFix(12 * 3_600_000, gb.GeoPoint(40.60, 23.02), 10.0))  # daytime
print(f"residence: {gb.infer_residence(fixes, cfg, 6)} "
      f"(true cell {gb.encode(home, 6)})")

# Eligibility needs more than 20 recorded hours across 3 days plus a
# residence; tonight's two hours are not enough.
rec = gb.sensing.build_individual_record("demo", samples, fixes, cfg, 6)
print(f"hours={rec.active_hours:.1f} days={rec.active_days} "
      f"residence={rec.residence} -> eligible={gb.eligible(rec, cfg)}")
