//! Hamming-weight leakage simulator standing in for the oscilloscope.
//!
//! A cipher execution becomes an [`EventSchedule`]: the ordered bus accesses
//! whose values leak. Countermeasures rewrite the schedule (injection,
//! shuffling) or the rendered trace (low-pass filter), and
//! [`synthesize_trace`] turns the schedule into noisy samples.

mod schedule;
mod synth;

pub use schedule::{
    build_event_schedule, inject_random_instructions, shuffle_sbox_events, CipherId,
    EventSchedule, EventTag, LeakageEvent, ScheduleProfile, SpeckWindow,
};
pub use synth::{
    lowpass_filter, random_plaintexts, synthesize_trace, synthesize_trace_set,
    synthesize_trace_set_with, Countermeasures, Injection, NoiseConfig, PowerTrace, SynthConfig,
    TraceSet, TraceSetMeta,
};

#[inline]
pub fn hamming_weight(v: u64) -> u32 {
    v.count_ones()
}

#[inline]
pub fn hamming_distance(v0: u64, v1: u64) -> u32 {
    hamming_weight(v0 ^ v1)
}
