use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::cipher::{aes_round1_intermediates, speck_key_schedule, speck_round1_values,
    speck_round2_target, Block128, LimbWidth};
use crate::rng::Xorshift64Star;
use crate::{Error, Result};

/// Which cipher and attack phase a trace set belongs to. The discriminant is
/// the on-disk cipher id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum CipherId {
    Aes128 = 0,
    SpeckPhase1 = 1,
    SpeckPhase2 = 2,
}

impl CipherId {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(CipherId::Aes128),
            1 => Some(CipherId::SpeckPhase1),
            2 => Some(CipherId::SpeckPhase2),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CipherId::Aes128 => "aes128",
            CipherId::SpeckPhase1 => "speck128-phase1",
            CipherId::SpeckPhase2 => "speck128-phase2",
        }
    }
}

impl fmt::Display for CipherId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EventTag {
    PlaintextLoad,
    ArkStore,
    SboxLoad,
    SboxStore,
    SpeckTStore,
    SpeckR1Store,
    SpeckR1LoadM1,
    SpeckY1Store,
    SpeckR2Store,
    SpeckR2LoadM2,
    RandomFiller,
}

impl EventTag {
    pub const ALL: [EventTag; 11] = [
        EventTag::PlaintextLoad,
        EventTag::ArkStore,
        EventTag::SboxLoad,
        EventTag::SboxStore,
        EventTag::SpeckTStore,
        EventTag::SpeckR1Store,
        EventTag::SpeckR1LoadM1,
        EventTag::SpeckY1Store,
        EventTag::SpeckR2Store,
        EventTag::SpeckR2LoadM2,
        EventTag::RandomFiller,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EventTag::PlaintextLoad => "plaintext_load",
            EventTag::ArkStore => "ark_store",
            EventTag::SboxLoad => "sbox_load",
            EventTag::SboxStore => "sbox_store",
            EventTag::SpeckTStore => "speck_t_store",
            EventTag::SpeckR1Store => "speck_r1_store",
            EventTag::SpeckR1LoadM1 => "speck_r1_load_m1",
            EventTag::SpeckY1Store => "speck_y1_store",
            EventTag::SpeckR2Store => "speck_r2_store",
            EventTag::SpeckR2LoadM2 => "speck_r2_load_m2",
            EventTag::RandomFiller => "random_filler",
        }
    }
}

impl FromStr for EventTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        EventTag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::config(format!("unknown event tag {s:?}")))
    }
}

/// One leaking bus access.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LeakageEvent {
    /// Bus word, 8 or 16 bits wide.
    pub value: u16,
    pub tag: EventTag,
    /// Byte (AES) or limb (Speck) index; limb 0 is least significant.
    pub lane: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpeckWindow {
    /// Trigger around the M1 xor: only the round-2 reload of R1.
    M1,
    /// Trigger around the M2 xor: only the round-3 reload of R2.
    M2,
    /// Trigger around the K2 xor itself: operand store and R1 store. Exposes
    /// the guess-zero pathology.
    R1Operands,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScheduleProfile {
    Aes { plaintext_loads: bool, sbox: bool },
    Speck { limb_width: LimbWidth, window: SpeckWindow },
}

impl ScheduleProfile {
    pub const AES_FULL: ScheduleProfile = ScheduleProfile::Aes { plaintext_loads: true, sbox: true };

    pub fn speck(window: SpeckWindow) -> Self {
        ScheduleProfile::Speck { limb_width: LimbWidth::W8, window }
    }

    /// The cipher id a trace set built from this profile carries.
    pub fn cipher_id(&self) -> CipherId {
        match self {
            ScheduleProfile::Aes { .. } => CipherId::Aes128,
            ScheduleProfile::Speck { window: SpeckWindow::M2, .. } => CipherId::SpeckPhase2,
            ScheduleProfile::Speck { .. } => CipherId::SpeckPhase1,
        }
    }

    pub fn name(&self) -> String {
        match *self {
            ScheduleProfile::Aes { plaintext_loads, sbox } => match (plaintext_loads, sbox) {
                (true, true) => "aes-full".into(),
                (false, true) => "aes-no-loads".into(),
                (true, false) => "aes-xor-only".into(),
                (false, false) => "aes-ark-only".into(),
            },
            ScheduleProfile::Speck { limb_width, window } => {
                let w = match window {
                    SpeckWindow::M1 => "m1",
                    SpeckWindow::M2 => "m2",
                    SpeckWindow::R1Operands => "r1-operands",
                };
                match limb_width {
                    LimbWidth::W8 => format!("speck-{w}"),
                    LimbWidth::W16 => format!("speck16-{w}"),
                }
            }
        }
    }
}

impl FromStr for ScheduleProfile {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let aes = |plaintext_loads, sbox| Ok(ScheduleProfile::Aes { plaintext_loads, sbox });
        match s {
            "aes" | "aes-full" => aes(true, true),
            "aes-no-loads" => aes(false, true),
            "aes-xor-only" => aes(true, false),
            "aes-ark-only" => aes(false, false),
            _ => {
                let (limb_width, rest) = if let Some(r) = s.strip_prefix("speck16-") {
                    (LimbWidth::W16, r)
                } else if let Some(r) = s.strip_prefix("speck-") {
                    (LimbWidth::W8, r)
                } else {
                    return Err(Error::config(format!("unknown schedule profile {s:?}")));
                };
                let window = match rest {
                    "m1" => SpeckWindow::M1,
                    "m2" => SpeckWindow::M2,
                    "r1-operands" => SpeckWindow::R1Operands,
                    _ => return Err(Error::config(format!("unknown schedule profile {s:?}"))),
                };
                Ok(ScheduleProfile::Speck { limb_width, window })
            }
        }
    }
}

/// Ordered leakage events of one encryption plus the trigger window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventSchedule {
    plaintext: Block128,
    events: Vec<LeakageEvent>,
    window: Range<usize>,
    /// Largest number of in-window events any schedule of this
    /// configuration can have; fixes the rendered trace length.
    capacity: usize,
}

impl EventSchedule {
    fn new(plaintext: Block128, events: Vec<LeakageEvent>, window: Range<usize>) -> Self {
        let capacity = window.len();
        Self { plaintext, events, window, capacity }
    }

    pub fn plaintext(&self) -> &Block128 {
        &self.plaintext
    }

    pub fn events(&self) -> &[LeakageEvent] {
        &self.events
    }

    pub fn window_events(&self) -> &[LeakageEvent] {
        &self.events[self.window.clone()]
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Slot indices (positions inside the rendered window) spanned by the
    /// in-window events carrying `tag`.
    pub fn slot_range(&self, tag: EventTag) -> Option<Range<usize>> {
        let evs = self.window_events();
        let first = evs.iter().position(|e| e.tag == tag)?;
        let last = evs.iter().rposition(|e| e.tag == tag)?;
        Some(first..last + 1)
    }
}

fn limb_events(word: u64, width: LimbWidth, tag: EventTag) -> impl Iterator<Item = LeakageEvent> {
    let bits = width.bits();
    (0..width.limbs_per_word()).map(move |lane| LeakageEvent {
        value: ((word >> (bits * lane as u32)) as u16) & width.mask(),
        tag,
        lane: lane as u8,
    })
}

fn tag_span(events: &[LeakageEvent], first: EventTag, last: EventTag) -> Range<usize> {
    let start = events.iter().position(|e| e.tag == first).unwrap_or(0);
    let end = events.iter().rposition(|e| e.tag == last).map_or(events.len(), |i| i + 1);
    start..end
}

/// Expands one encryption into its leakage events.
///
/// AES emits 16 plaintext loads, 16 AddRoundKey stores, then 16 adjacent
/// (S-box input load, S-box output store) pairs; the flags drop the loads or
/// the S-box pairs. Speck emits, per 64-bit word and least significant limb
/// first: T store, R1 store, R1 reload for M1, Y1 store, R2 store, R2 reload
/// for M2. The profile's window selects which of them the trigger covers.
pub fn build_event_schedule(
    cipher: CipherId,
    plaintext: &Block128,
    key: &Block128,
    profile: &ScheduleProfile,
) -> Result<EventSchedule> {
    if profile.cipher_id() != cipher {
        return Err(Error::config(format!(
            "profile {} does not apply to cipher {cipher}",
            profile.name()
        )));
    }
    match *profile {
        ScheduleProfile::Aes { plaintext_loads, sbox } => {
            let r1 = aes_round1_intermediates(plaintext, key);
            let mut events = Vec::with_capacity(64);
            let ev = |value: u8, tag, lane: usize| LeakageEvent { value: value as u16, tag, lane: lane as u8 };
            if plaintext_loads {
                events.extend((0..16).map(|i| ev(plaintext.0[i], EventTag::PlaintextLoad, i)));
            }
            events.extend((0..16).map(|i| ev(r1.ark[i], EventTag::ArkStore, i)));
            if sbox {
                for i in 0..16 {
                    events.push(ev(r1.ark[i], EventTag::SboxLoad, i));
                    events.push(ev(r1.sbox_out[i], EventTag::SboxStore, i));
                }
            }
            let window = 0..events.len();
            Ok(EventSchedule::new(*plaintext, events, window))
        }
        ScheduleProfile::Speck { limb_width, window } => {
            let (pt1, pt2) = plaintext.words();
            let (k1, k2) = key.words();
            let r = speck_round1_values(pt1, pt2, k2);
            let k_prime = speck_key_schedule(k1, k2).round_keys[1];
            let r2 = speck_round2_target(r.r1, r.y1) ^ k_prime;
            let groups = [
                (r.t, EventTag::SpeckTStore),
                (r.r1, EventTag::SpeckR1Store),
                (r.r1, EventTag::SpeckR1LoadM1),
                (r.y1, EventTag::SpeckY1Store),
                (r2, EventTag::SpeckR2Store),
                (r2, EventTag::SpeckR2LoadM2),
            ];
            let events: Vec<_> = groups
                .into_iter()
                .flat_map(|(w, tag)| limb_events(w, limb_width, tag))
                .collect();
            let span = match window {
                SpeckWindow::M1 => tag_span(&events, EventTag::SpeckR1LoadM1, EventTag::SpeckR1LoadM1),
                SpeckWindow::M2 => tag_span(&events, EventTag::SpeckR2LoadM2, EventTag::SpeckR2LoadM2),
                SpeckWindow::R1Operands => tag_span(&events, EventTag::SpeckTStore, EventTag::SpeckR1Store),
            };
            Ok(EventSchedule::new(*plaintext, events, span))
        }
    }
}

/// Inserts `u ~ Uniform{0..=n_max}` random filler events immediately before
/// the first event tagged `position`. Capacity grows by `n_max` so every
/// trace of a set renders to the same length.
pub fn inject_random_instructions(
    mut schedule: EventSchedule,
    n_max: usize,
    position: EventTag,
    rng: &mut Xorshift64Star,
) -> Result<EventSchedule> {
    let at = schedule
        .events
        .iter()
        .position(|e| e.tag == position)
        .ok_or_else(|| Error::config(format!("no {} event to inject before", position.name())))?;
    if n_max == 0 {
        return Ok(schedule);
    }
    let count = rng.below(n_max as u64 + 1) as usize;
    let fillers = (0..count).map(|_| LeakageEvent {
        value: rng.next_u8() as u16,
        tag: EventTag::RandomFiller,
        lane: 0,
    });
    let fillers: Vec<_> = fillers.collect();
    schedule.events.splice(at..at, fillers);
    let w = schedule.window.clone();
    if at < w.start {
        schedule.window = w.start + count..w.end + count;
    } else if at <= w.end {
        schedule.window.end += count;
        schedule.capacity += n_max;
    }
    Ok(schedule)
}

/// Applies one uniformly random lane permutation to the 16 adjacent
/// (S-box load, S-box store) pairs.
pub fn shuffle_sbox_events(
    mut schedule: EventSchedule,
    rng: &mut Xorshift64Star,
) -> Result<EventSchedule> {
    let missing = || Error::config("schedule has no S-box load/store pairs to shuffle");
    let start = schedule
        .events
        .iter()
        .position(|e| e.tag == EventTag::SboxLoad)
        .ok_or_else(missing)?;
    let block = schedule.events.get(start..start + 32).ok_or_else(missing)?;
    let pairs_ok = block.chunks_exact(2).all(|p| {
        p[0].tag == EventTag::SboxLoad && p[1].tag == EventTag::SboxStore && p[0].lane == p[1].lane
    });
    if !pairs_ok {
        return Err(missing());
    }
    let pairs: Vec<[LeakageEvent; 2]> = block.chunks_exact(2).map(|p| [p[0], p[1]]).collect();
    let mut order: Vec<usize> = (0..16).collect();
    rng.shuffle(&mut order);
    for (slot, &src) in order.iter().enumerate() {
        schedule.events[start + 2 * slot] = pairs[src][0];
        schedule.events[start + 2 * slot + 1] = pairs[src][1];
    }
    Ok(schedule)
}
