//! Deterministic fixture data used by tests, examples and the CLI.

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::events::{DeviceGroup, Event, EventLog, Symbol};

/// Symbol `a` of the alternation fixture.
pub const A: Symbol = Symbol(0);
/// Symbol `b` of the alternation fixture.
pub const B: Symbol = Symbol(1);

/// A home dominated by two alternating scenes `a` and `b`, with a handful of
/// other scenes that briefly interrupt the alternation and mostly return to
/// `a`. Mined, it has the shape of a frequent-pattern table headed by
/// `(a, b)` and `(b, a)`, with `(a, *, a)` above `(a, b, a)`.
pub fn alternating_home(event_count: usize, seed: u64) -> (Vec<Symbol>, Vec<i64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gaps = Exp::new(1.0 / 120.0).expect("positive rate");
    let others = 2..10u32;
    let mut symbols = Vec::with_capacity(event_count);
    let mut timestamps = Vec::with_capacity(event_count);
    let mut t = super::synthetic::EPOCH;
    let mut cur = A.0;
    for _ in 0..event_count {
        symbols.push(Symbol(cur));
        timestamps.push(t);
        t += 1 + gaps.sample(&mut rng) as i64;
        let roll: f64 = rng.gen();
        cur = match cur {
            0 if roll < 0.80 => 1,
            0 if roll < 0.86 => 2,
            0 if roll < 0.92 => 3,
            1 if roll < 0.85 => 0,
            2 | 3 if roll < 0.70 => 0,
            c if c >= 4 && roll < 0.30 => 0,
            c if c >= 4 && roll < 0.50 => 1,
            _ => rng.gen_range(others.clone()),
        };
    }
    (symbols, timestamps)
}

struct Device {
    id: &'static str,
    zone: &'static str,
    zone_name: &'static str,
    group: DeviceGroup,
}

const LIVING_LIGHT: Device = Device {
    id: "D17",
    zone: "Z3",
    zone_name: "living room",
    group: DeviceGroup::Lighting,
};
const TV: Device = Device {
    id: "D20",
    zone: "Z3",
    zone_name: "living room",
    group: DeviceGroup::Video,
};
const KITCHEN_LIGHT: Device = Device {
    id: "D30",
    zone: "Z4",
    zone_name: "kitchen",
    group: DeviceGroup::Lighting,
};
const RADIO: Device = Device {
    id: "D31",
    zone: "Z4",
    zone_name: "kitchen",
    group: DeviceGroup::Audio,
};
const BEDROOM_LIGHT: Device = Device {
    id: "D40",
    zone: "Z5",
    zone_name: "bedroom",
    group: DeviceGroup::Lighting,
};
const BEDROOM_SHADES: Device = Device {
    id: "D41",
    zone: "Z5",
    zone_name: "bedroom",
    group: DeviceGroup::Shades,
};
const BATH_LIGHT: Device = Device {
    id: "D50",
    zone: "Z6",
    zone_name: "bathroom",
    group: DeviceGroup::Lighting,
};
const OFFICE_LIGHT: Device = Device {
    id: "D60",
    zone: "Z7",
    zone_name: "office",
    group: DeviceGroup::Lighting,
};
const OFFICE_HEATER: Device = Device {
    id: "D61",
    zone: "Z7",
    zone_name: "office",
    group: DeviceGroup::Heating,
};

/// Source id used for user-initiated events in the demo home.
pub const USER_SOURCE: u32 = 381;
/// Source id of the demo home's shade timer.
pub const TIMER_SOURCE: u32 = 900;

type Step = (&'static Device, u32);

const MORNING: &[Step] = &[
    (&BATH_LIGHT, 5),
    (&BATH_LIGHT, 0),
    (&KITCHEN_LIGHT, 5),
    (&RADIO, 5),
    (&RADIO, 0),
    (&KITCHEN_LIGHT, 0),
];
const OFFICE: &[Step] = &[
    (&OFFICE_LIGHT, 5),
    (&OFFICE_HEATER, 5),
    (&OFFICE_HEATER, 0),
    (&OFFICE_LIGHT, 0),
];
const EVENING: &[Step] = &[
    (&LIVING_LIGHT, 434),
    (&LIVING_LIGHT, 424),
    (&LIVING_LIGHT, 422),
    (&BEDROOM_LIGHT, 5),
    (&BEDROOM_LIGHT, 0),
];
const TV_NIGHT: &[Step] = &[
    (&LIVING_LIGHT, 434),
    (&TV, 5),
    (&TV, 0),
    (&LIVING_LIGHT, 422),
];
const NOISE: &[Step] = &[
    (&KITCHEN_LIGHT, 5),
    (&KITCHEN_LIGHT, 0),
    (&BATH_LIGHT, 5),
    (&BATH_LIGHT, 0),
    (&LIVING_LIGHT, 424),
    (&BEDROOM_LIGHT, 5),
    (&RADIO, 5),
];

fn event(home: &str, at: DateTime<Utc>, step: Step, source: u32) -> Event {
    let (d, scene) = step;
    Event {
        timestamp: at,
        home_id: home.to_string(),
        zone_id: d.zone.to_string(),
        zone_name: d.zone_name.to_string(),
        device_id: d.id.to_string(),
        scene_id: scene,
        source_id: source,
        group: d.group,
    }
}

/// A few months of a plausible household: morning, office, evening and TV
/// routines at roughly fixed times, random interruptions, a shade timer, and
/// routines whose final switch-off is sometimes forgotten.
pub fn demo_home(home: &str, days: u32, seed: u64) -> EventLog {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Utc
        .with_ymd_and_hms(2014, 3, 1, 0, 0, 0)
        .single()
        .expect("valid start date");
    let mut events = Vec::new();
    for day in 0..days {
        let midnight = start + Duration::days(day as i64);
        let routines: [(&[Step], i64, f64); 4] = [
            (MORNING, 7 * 60, 0.9),
            (OFFICE, 9 * 60, if day % 7 < 5 { 0.8 } else { 0.1 }),
            (EVENING, 19 * 60, 0.75),
            (TV_NIGHT, 21 * 60, 0.6),
        ];
        let mut blocks: Vec<(i64, Vec<Step>)> = Vec::new();
        for (steps, minute, p) in routines {
            if rng.gen_bool(p) {
                let mut steps = steps.to_vec();
                if rng.gen_bool(0.15) {
                    steps.pop();
                }
                blocks.push((minute + rng.gen_range(-20..=20), steps));
            }
        }
        for _ in 0..rng.gen_range(2..6) {
            let step = NOISE[rng.gen_range(0..NOISE.len())];
            blocks.push((rng.gen_range(6 * 60..23 * 60), vec![step]));
        }
        blocks.sort_by_key(|b| b.0);
        let mut t = midnight + Duration::minutes(6 * 60);
        for (minute, steps) in blocks {
            t = t.max(midnight + Duration::minutes(minute));
            for step in steps {
                events.push(event(home, t, step, USER_SOURCE));
                t += Duration::seconds(rng.gen_range(30..600));
            }
        }
        let shades_up = midnight + Duration::minutes(6 * 60 + 45);
        events.push(event(home, shades_up, (&BEDROOM_SHADES, 5), TIMER_SOURCE));
    }
    EventLog::from_events(home, events)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alternating_home_is_deterministic_and_ab_heavy() {
        let (s1, t1) = alternating_home(5_000, 11);
        let (s2, t2) = alternating_home(5_000, 11);
        assert_eq!((s1.clone(), t1.clone()), (s2, t2));
        let ab = s1.windows(2).filter(|w| w == &[A, B]).count();
        assert!(ab as f64 > 0.25 * s1.len() as f64);
        assert!(t1.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn demo_home_is_sorted_and_tagged() {
        let log = demo_home("H1", 30, 1);
        assert!(log.len() > 300);
        assert!(log.events().windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
        assert!(log.events().iter().any(|e| e.source_id == TIMER_SOURCE));
        assert!(log.events().iter().any(|e| e.scene_id == 422));
    }
}
