use proptest::prelude::*;
use tracelab_core::cipher::Block128;
use tracelab_core::leakage::{
    build_event_schedule, inject_random_instructions, lowpass_filter, random_plaintexts, shuffle_sbox_events,
    synthesize_trace_set, synthesize_trace_set_with, CipherId, EventTag, PowerTrace, ScheduleProfile, SynthConfig,
};
use tracelab_core::rng::Xorshift64Star;
use tracelab_core::Execution;

fn trace(v: Vec<f32>) -> PowerTrace {
    PowerTrace { samples: v, plaintext: Block128::ZERO }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lowpass_is_linear(
        x in prop::collection::vec(-10.0f32..10.0, 1..64),
        seed in any::<u64>(),
        a in -3.0f32..3.0,
        b in -3.0f32..3.0,
        lambda in 0.0f64..0.99,
    ) {
        let mut g = Xorshift64Star::new(seed);
        let y: Vec<f32> = x.iter().map(|_| g.gaussian() as f32).collect();
        let mix: Vec<f32> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let fx = lowpass_filter(&trace(x.clone()), lambda).unwrap();
        let fy = lowpass_filter(&trace(y), lambda).unwrap();
        let fm = lowpass_filter(&trace(mix), lambda).unwrap();
        prop_assert_eq!(fm.samples.len(), x.len());
        for i in 0..x.len() {
            let lin = a * fx.samples[i] + b * fy.samples[i];
            prop_assert!((fm.samples[i] - lin).abs() < 1e-3, "{} vs {}", fm.samples[i], lin);
        }
    }

    #[test]
    fn injection_keeps_events_and_order(seed in any::<u64>(), n_max in 0usize..12) {
        let key = Block128([0x5a; 16]);
        let pt = random_plaintexts(seed, 1)[0];
        let s = build_event_schedule(CipherId::Aes128, &pt, &key, &ScheduleProfile::AES_FULL).unwrap();
        let injected = inject_random_instructions(
            s.clone(), n_max, EventTag::SboxLoad, &mut Xorshift64Star::new(seed)).unwrap();
        let kept: Vec<_> = injected.events().iter().filter(|e| e.tag != EventTag::RandomFiller).copied().collect();
        prop_assert_eq!(kept.as_slice(), s.events());
        prop_assert_eq!(injected.capacity(), s.capacity() + n_max);
        let fillers = injected.events().len() - s.events().len();
        prop_assert!(fillers <= n_max);
    }

    #[test]
    fn shuffle_keeps_pairs(seed in any::<u64>()) {
        let pt = random_plaintexts(seed, 1)[0];
        let s = build_event_schedule(CipherId::Aes128, &pt, &Block128([3; 16]), &ScheduleProfile::AES_FULL).unwrap();
        let sh = shuffle_sbox_events(s.clone(), &mut Xorshift64Star::new(seed)).unwrap();
        prop_assert_eq!(&sh.events()[..32], &s.events()[..32]);
        let mut lanes = Vec::new();
        for pair in sh.events()[32..].chunks(2) {
            prop_assert_eq!(pair[0].tag, EventTag::SboxLoad);
            prop_assert_eq!(pair[1].tag, EventTag::SboxStore);
            prop_assert_eq!(pair[0].lane, pair[1].lane);
            lanes.push(pair[0].lane);
        }
        lanes.sort_unstable();
        prop_assert_eq!(lanes, (0..16).collect::<Vec<u8>>());
    }
}

#[test]
fn parallel_synthesis_matches_sequential() {
    let mut cfg = SynthConfig::new(ScheduleProfile::AES_FULL, Block128([7; 16]));
    cfg.countermeasures.shuffle_sbox = true;
    cfg.countermeasures.lowpass = Some(0.4);
    let pts = random_plaintexts(9, 200);
    let a = synthesize_trace_set_with(&cfg, &pts, 9, Execution::Sequential).unwrap();
    let b = synthesize_trace_set_with(&cfg, &pts, 9, Execution::Parallel).unwrap();
    assert_eq!(a, b);
}

#[test]
fn prefix_of_a_set_is_the_smaller_set() {
    let cfg = SynthConfig::new(ScheduleProfile::AES_FULL, Block128([1; 16]));
    let pts = random_plaintexts(3, 50);
    let big = synthesize_trace_set(&cfg, &pts, 3).unwrap();
    let small = synthesize_trace_set(&cfg, &pts[..20], 3).unwrap();
    assert_eq!(&big.traces[..20], small.traces.as_slice());
}
