use tracelab_core::attack::{
    attack_aes, attack_aes_with, attack_speck_full, speck_phase2_with, AttackOptions,
};
use tracelab_core::cipher::{speck_key_schedule, speck_round1_values, Block128, LimbWidth};
use tracelab_core::cpa::{attack_byte, build_hypotheses, geometric_grid, sweep_traces, SelectionKind, SelectionModel};
use tracelab_core::leakage::{
    build_event_schedule, random_plaintexts, synthesize_trace_set, CipherId, EventTag, ScheduleProfile, SpeckWindow,
    SynthConfig, TraceSet,
};
use tracelab_core::rng::Xorshift64Star;

fn set(profile: ScheduleProfile, key: Block128, n: usize, seed: u64) -> TraceSet {
    synthesize_trace_set(&SynthConfig::new(profile, key), &random_plaintexts(seed, n), seed).unwrap()
}

fn random_key(seed: u64) -> Block128 {
    let mut g = Xorshift64Star::new(seed);
    Block128(std::array::from_fn(|_| g.next_u8()))
}

fn speck16(window: SpeckWindow) -> ScheduleProfile {
    ScheduleProfile::Speck { limb_width: LimbWidth::W16, window }
}

/// Traces needed until every lane of K2 ranks first from then on.
fn k2_traces(profile: ScheduleProfile, key: Block128, seed: u64, budget: usize) -> Option<usize> {
    let ts = set(profile, key, budget, seed);
    let grid = geometric_grid(2, budget, 1.1).unwrap();
    let k2 = key.words().1;
    let mut worst = 0;
    for lane in 0..8 {
        let t = sweep_traces(&ts, &SelectionModel::speck_r1(), lane, &grid).unwrap();
        worst = worst.max(t.minimal_stable(((k2 >> (8 * lane)) & 0xff) as usize)?);
    }
    Some(worst)
}

#[test]
fn sixteen_bit_speck_succeeds_with_more_traces() {
    let key = random_key(1);
    let ts1 = set(speck16(SpeckWindow::M1), key, 1500, 2);
    let ts2 = set(speck16(SpeckWindow::M2), key, 1500, 3);
    assert_eq!(attack_speck_full(&ts1, &ts2).unwrap().recovered_key, key);

    let mut narrow = Vec::new();
    let mut wide = Vec::new();
    for seed in 10..15 {
        narrow.push(k2_traces(ScheduleProfile::speck(SpeckWindow::M1), key, seed, 1500).unwrap_or(usize::MAX));
        wide.push(k2_traces(speck16(SpeckWindow::M1), key, seed, 1500).unwrap_or(usize::MAX));
    }
    narrow.sort_unstable();
    wide.sort_unstable();
    assert!(wide[2] >= narrow[2], "16-bit median {} < 8-bit median {}", wide[2], narrow[2]);
    assert!(wide[2] < usize::MAX);
}

#[test]
fn shuffled_pairing_defeats_the_attack() {
    let key = Block128::from_hex("677689798898a65765f765775b87688c").unwrap();
    let mut ts = set(ScheduleProfile::AES_FULL, key, 500, 4);
    let mut pts: Vec<Block128> = ts.plaintexts().copied().collect();
    Xorshift64Star::new(99).shuffle(&mut pts);
    for (t, p) in ts.traces.iter_mut().zip(pts) {
        t.plaintext = p;
    }
    let recovered = attack_aes(&ts).unwrap().recovered_key;
    let hits = (0..16).filter(|&i| recovered.0[i] == key.0[i]).count();
    assert!(hits <= 1, "{hits} lanes survived a broken pairing");
}

#[test]
fn wrong_k2_is_flagged_low_confidence() {
    let mut flagged = 0;
    for seed in 0..10u64 {
        let key = random_key(100 + seed);
        let ts2 = set(ScheduleProfile::speck(SpeckWindow::M2), key, 500, 200 + seed);
        let wrong_k2 = Xorshift64Star::new(300 + seed).next_u64();
        let r = speck_phase2_with(&ts2, wrong_k2, &AttackOptions::default()).unwrap();
        flagged += r.low_confidence as usize;
        let right = speck_phase2_with(&ts2, key.words().1, &AttackOptions::default()).unwrap();
        assert!(!right.low_confidence, "seed {seed}: true K2 flagged");
    }
    assert!(flagged >= 6, "only {flagged}/10 wrong-K2 runs flagged");
}

#[test]
fn sbox_selection_separates_better_than_xor() {
    let key = Block128::from_hex("677689798898a65765f765775b87688c").unwrap();
    let ts = set(ScheduleProfile::AES_FULL, key, 500, 5);
    let sbox = attack_aes_with(&ts, SelectionKind::AesSbox, &AttackOptions::default()).unwrap();
    let xor = attack_aes_with(&ts, SelectionKind::AesXor, &AttackOptions::default()).unwrap();
    let better = (0..16)
        .filter(|&i| {
            let s = sbox.phases[0].lanes[i].margin_of(key.0[i] as usize).unwrap();
            let x = xor.phases[0].lanes[i].margin_of(key.0[i] as usize).unwrap();
            s > x
        })
        .count();
    assert!(better >= 14, "{better}/16");
}

#[test]
fn phase2_hypotheses_match_instrumented_cipher() {
    let key = random_key(7);
    let (k1, k2) = key.words();
    let k_prime = speck_key_schedule(k1, k2).round_keys[1];
    let ts = set(ScheduleProfile::speck(SpeckWindow::M2), key, 50, 8);
    let model = SelectionModel::speck_r2(k2);
    for lane in 0..8 {
        let h = build_hypotheses(&ts.traces, &model, lane).unwrap();
        let guess = ((k_prime >> (8 * lane)) & 0xff) as usize;
        for (i, t) in ts.traces.iter().enumerate() {
            // The R2 limb as the cipher writes it to the bus.
            let s = build_event_schedule(CipherId::SpeckPhase2, &t.plaintext, &key, &ScheduleProfile::speck(SpeckWindow::M2))
                .unwrap();
            let bus = s.events().iter().find(|e| e.tag == EventTag::SpeckR2Store && e.lane as usize == lane).unwrap();
            assert_eq!(h.get(i, guess), (bus.value as u8).count_ones() as f32);
        }
    }
    let (p1, p2) = ts.traces[0].plaintext.words();
    assert_eq!(speck_round1_values(p1, p2, k2).r1, speck_round1_values(p1, p2, 0).t ^ k2);
}

#[test]
fn random_keys_recover_at_default_noise() {
    for seed in 0..3u64 {
        let key = random_key(500 + seed);
        let ts = set(ScheduleProfile::AES_FULL, key, 200, 600 + seed);
        assert_eq!(attack_aes(&ts).unwrap().recovered_key, key);
        let r = attack_byte(&ts, &SelectionModel::aes_sbox(), 0).unwrap();
        assert!(r.gap() > 0.0);
    }
}
