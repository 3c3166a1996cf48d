use std::fs;
use std::io::Write;
use std::ops::Range;
use std::path::Path;

use tracelab_core::attack::{
    attack_aes_with, attack_speck_full_with, countermeasure_experiment, expected_lane_byte, zero_key_diagnostic,
    AnalysisWindow, AttackOptions, AttackReport, CountermeasureAxis, ExperimentConfig,
};
use tracelab_core::cipher::{aes128_encrypt, speck128_encrypt, speck_key_schedule, Block128, LimbWidth};
use tracelab_core::cpa::{
    correlate_byte, geometric_grid, sweep_traces_with, CpaOptions, Polarity, SelectionKind, SelectionModel,
};
use tracelab_core::leakage::{
    random_plaintexts, synthesize_trace_set, CipherId, Injection, NoiseConfig, ScheduleProfile, SpeckWindow,
    SynthConfig, TraceSet,
};
use tracelab_core::randomness::{
    assemble_seed_from_adc, assemble_seed_from_bits, chi_square_uniformity, spectral_flatness_with, AdcProfile,
    SeedSource, DEFAULT_ADC_FOLDS, DEFAULT_BIT_FOLDS,
};
use tracelab_core::rng::Xorshift64Star;

use crate::args::*;
use crate::tracefile::{read_trace_set, write_trace_set};
use crate::{CliError, CliResult};

pub fn dispatch<W: Write>(cli: Cli, invocation: &str, out: &mut W) -> CliResult {
    match cli.command {
        Command::Synth(a) => synth(a, out),
        Command::Attack(a) => attack(a, invocation, out),
        Command::SpeckAttack(a) => speck_attack(a, invocation, out),
        Command::Sweep(a) => sweep(a, invocation, out),
        Command::ZeroKeyDemo(a) => zero_key_demo(a, invocation, out),
        Command::CounterExperiment(a) => counter_experiment(a, invocation, out),
        Command::Randtest(a) => randtest(a, invocation, out),
        Command::Cipher(a) => cipher(a, out),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_key(s: &str) -> CliResult<Block128> {
    Ok(s.parse::<Block128>()?)
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| usage(format!("bad {what} {x:?}"))))
        .collect()
}

fn parse_window(s: &str) -> CliResult<Range<usize>> {
    let (a, b) = s.split_once("..").ok_or_else(|| usage(format!("window {s:?} is not START..END")))?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|_| usage(format!("bad window bound {x:?}")));
    Ok(parse(a)?..parse(b)?)
}

/// "10,20,50", "lin:START:END:STEP" or "geom:START:END:RATIO".
pub(crate) fn parse_grid(spec: &str) -> CliResult<Vec<usize>> {
    let bad = || usage(format!("bad grid spec {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        ["lin", a, b, step] => {
            let (a, b, step): (usize, usize, usize) =
                (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?, step.parse().map_err(|_| bad())?);
            if step == 0 || a == 0 || a > b {
                return Err(bad());
            }
            let mut g: Vec<usize> = (a..=b).step_by(step).collect();
            if *g.last().unwrap() != b {
                g.push(b);
            }
            Ok(g)
        }
        ["geom", a, b, r] => {
            Ok(geometric_grid(a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?, r.parse().map_err(|_| bad())?)?)
        }
        [list] => parse_list(list, "grid count"),
        _ => Err(bad()),
    }
}

fn load(path: &Path) -> CliResult<TraceSet> {
    Ok(read_trace_set(path)?)
}

fn emit<W: Write>(out: &mut W, text: &str, copy: Option<&Path>) -> CliResult {
    out.write_all(text.as_bytes())?;
    if let Some(p) = copy {
        fs::write(p, text)?;
    }
    Ok(())
}

fn write_file(path: &Path, write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> CliResult {
    let mut buf = Vec::new();
    write(&mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

fn synth_profile(a: &SynthArgs) -> CliResult<ScheduleProfile> {
    if let Some(p) = &a.profile {
        let profile: ScheduleProfile = p.parse()?;
        let matches = matches!(
            (a.cipher, profile),
            (CipherArg::Aes, ScheduleProfile::Aes { .. }) | (CipherArg::Speck, ScheduleProfile::Speck { .. })
        );
        if !matches {
            return Err(usage(format!("profile {p} does not belong to cipher {:?}", a.cipher)));
        }
        return Ok(profile);
    }
    match a.cipher {
        CipherArg::Aes => Ok(ScheduleProfile::AES_FULL),
        CipherArg::Speck => {
            let window = match a.phase {
                1 => SpeckWindow::M1,
                2 => SpeckWindow::M2,
                p => return Err(usage(format!("Speck phase must be 1 or 2, got {p}"))),
            };
            let limb_width = LimbWidth::from_bits(a.limb_bits)?;
            Ok(ScheduleProfile::Speck { limb_width, window })
        }
    }
}

fn synth<W: Write>(a: SynthArgs, out: &mut W) -> CliResult {
    let profile = synth_profile(&a)?;
    let mut cfg = SynthConfig::new(profile, parse_key(&a.key)?);
    cfg.noise = NoiseConfig {
        alpha: a.noise.alpha,
        baseline: a.noise.baseline,
        sigma: a.noise.sigma,
        filler_gap: a.noise.filler_gap,
        samples_per_event: a.noise.samples_per_event,
    };
    cfg.countermeasures.injection = (a.countermeasures.inject > 0).then(|| Injection::before_sbox(a.countermeasures.inject));
    cfg.countermeasures.shuffle_sbox = a.countermeasures.shuffle;
    cfg.countermeasures.lowpass = a.countermeasures.lowpass;
    if a.traces == 0 {
        return Err(usage("need at least one trace"));
    }
    let set = synthesize_trace_set(&cfg, &random_plaintexts(a.seed, a.traces), a.seed)?;
    write_trace_set(&set, &a.output)?;
    writeln!(
        out,
        "wrote {} traces x {} samples ({}, {}) to {}",
        set.len(),
        set.samples_per_trace(),
        set.cipher,
        profile.name(),
        a.output.display()
    )?;
    Ok(())
}

fn attack_options(r: &ReportArgs, window: Option<Range<usize>>) -> CliResult<AttackOptions> {
    let polarity: Polarity = r.polarity.parse()?;
    Ok(AttackOptions {
        cpa: CpaOptions { polarity, samples: window, ..CpaOptions::default() },
        low_confidence_gap: r.low_confidence_gap,
    })
}

fn finish_report<W: Write>(mut report: AttackReport, r: &ReportArgs, invocation: &str, out: &mut W) -> CliResult {
    report.notes.push(invocation.to_string());
    if let Some(k) = &r.true_key {
        report.grade(&parse_key(k)?);
    }
    emit(out, &report.render_table(r.rows), r.report.as_deref())?;
    if let Some(p) = &r.csv {
        write_file(p, |b| report.write_csv(b))?;
    }
    Ok(())
}

fn expect_cipher(set: &TraceSet, want: CipherId, path: &Path) -> CliResult {
    if set.cipher != want {
        return Err(usage(format!("{} holds {} traces, expected {want}", path.display(), set.cipher)));
    }
    Ok(())
}

fn attack<W: Write>(a: AttackArgs, invocation: &str, out: &mut W) -> CliResult {
    let selection: SelectionKind = a.selection.parse()?;
    let window = a.window.as_deref().map(parse_window).transpose()?;
    let opts = attack_options(&a.report, window)?;
    let set = load(&a.input)?;
    expect_cipher(&set, CipherId::Aes128, &a.input)?;
    let report = attack_aes_with(&set, selection, &opts)?;
    if let Some(p) = &a.correlation_csv {
        let c = correlate_byte(&set.traces, &SelectionModel::new(selection), a.lane, opts.cpa.exec)?;
        write_file(p, |b| c.write_csv(b))?;
    }
    finish_report(report, &a.report, invocation, out)
}

fn speck_attack<W: Write>(a: SpeckAttackArgs, invocation: &str, out: &mut W) -> CliResult {
    let opts = attack_options(&a.report, None)?;
    let ts1 = load(&a.phase1)?;
    let ts2 = load(&a.phase2)?;
    expect_cipher(&ts1, CipherId::SpeckPhase1, &a.phase1)?;
    expect_cipher(&ts2, CipherId::SpeckPhase2, &a.phase2)?;
    let report = attack_speck_full_with(&ts1, &ts2, &opts)?;
    finish_report(report, &a.report, invocation, out)
}

fn sweep<W: Write>(a: SweepArgs, invocation: &str, out: &mut W) -> CliResult {
    let kind: SelectionKind = a.selection.parse()?;
    let model = match kind {
        SelectionKind::SpeckR2 => {
            let k2 = a.k2.as_deref().ok_or_else(|| usage("speck-r2 needs --k2"))?;
            let k2 = u64::from_str_radix(k2.trim_start_matches("0x"), 16).map_err(|_| usage(format!("bad --k2 {k2:?}")))?;
            SelectionModel::speck_r2(k2)
        }
        k => SelectionModel::new(k),
    };
    let set = load(&a.input)?;
    let want = match kind {
        SelectionKind::AesSbox | SelectionKind::AesXor => CipherId::Aes128,
        SelectionKind::SpeckR1 => CipherId::SpeckPhase1,
        SelectionKind::SpeckR2 => CipherId::SpeckPhase2,
    };
    expect_cipher(&set, want, &a.input)?;
    let grid = match &a.grid {
        Some(g) => parse_grid(g)?,
        None => geometric_grid(2, set.len(), 1.1)?,
    };
    let opts = CpaOptions {
        polarity: a.polarity.parse()?,
        samples: a.window.as_deref().map(parse_window).transpose()?,
        ..CpaOptions::default()
    };
    let traj = sweep_traces_with(&set.traces, &model, a.lane, &grid, &opts)?;
    let mut text = format!("# {invocation}\n{:>8} {:>6} {:>10} {:>10}\n", "traces", "top", "score", "gap");
    for p in &traj.points {
        match &p.ranking {
            Some(r) => {
                text += &format!("{:>8} {:>6} {:>10.4} {:>10.4}\n", p.count, format!("{:02x}", r.best().guess), r.best().score, r.gap())
            }
            None => text += &format!("{:>8} {:>6} {:>10} {:>10}\n", p.count, "-", "-", "-"),
        }
    }
    let mut not_reached = None;
    if let Some(k) = &a.true_key {
        let truth = expected_lane_byte(&model, &parse_key(k)?, a.lane);
        match traj.minimal_stable(truth as usize) {
            Some(n) => text += &format!("minimal stable traces for {truth:02x}: {n}\n"),
            None => {
                text += &format!("minimal stable traces for {truth:02x}: not reached\n");
                not_reached = Some(truth);
            }
        }
    }
    emit(out, &text, None)?;
    if let Some(p) = &a.output {
        write_file(p, |b| traj.write_csv(b))?;
    }
    match not_reached {
        Some(t) => Err(CliError::NotReached(format!("guess {t:02x} not stably first within {} traces", set.len()))),
        None => Ok(()),
    }
}

fn zero_key_demo<W: Write>(a: ZeroKeyArgs, invocation: &str, out: &mut W) -> CliResult {
    let key = parse_key(&a.key)?;
    let pts = random_plaintexts(a.seed, a.traces);
    let mut with = SynthConfig::new(ScheduleProfile::Aes { plaintext_loads: true, sbox: true }, key);
    with.noise.sigma = a.sigma;
    let mut without = with;
    without.profile = ScheduleProfile::Aes { plaintext_loads: false, sbox: true };
    let ts_with = synthesize_trace_set(&with, &pts, a.seed)?;
    let ts_without = synthesize_trace_set(&without, &pts, a.seed)?;
    let diag = zero_key_diagnostic(&ts_with, &ts_without)?;
    let text = format!("# {invocation}\n{}", diag.render());
    emit(out, &text, a.report.as_deref())?;
    if let Some(p) = &a.curves_csv {
        let c = correlate_byte(&ts_with.traces, &SelectionModel::aes_xor(), a.lane, Default::default())?;
        write_file(p, |b| c.write_csv(b))?;
    }
    if let Some(p) = &a.save_with {
        write_trace_set(&ts_with, p)?;
    }
    if let Some(p) = &a.save_without {
        write_trace_set(&ts_without, p)?;
    }
    Ok(())
}

fn counter_experiment<W: Write>(a: ExperimentArgs, invocation: &str, out: &mut W) -> CliResult {
    let axis: CountermeasureAxis = a.axis.parse()?;
    let profile: ScheduleProfile = a.profile.parse()?;
    let mut base = SynthConfig::new(profile, parse_key(&a.key)?);
    base.noise.sigma = a.sigma;
    let mut cfg = ExperimentConfig::new(
        base,
        axis,
        parse_list(&a.levels, "level")?,
        parse_list(&a.seeds, "seed")?,
        0,
    );
    cfg.budgets = parse_list(&a.budget, "budget")?;
    cfg.grid_ratio = a.grid_ratio;
    cfg.target_byte = a.lane;
    cfg.model = SelectionModel::new(a.selection.parse()?);
    if let Some(w) = &a.window {
        cfg.window = match w.as_str() {
            "full" => AnalysisWindow::Full,
            "sbox" => AnalysisWindow::SboxRegion,
            _ => return Err(usage(format!("window must be full or sbox, got {w:?}"))),
        };
    }
    let table = countermeasure_experiment(&cfg)?;
    emit(out, &format!("# {invocation}\n{}", table.render()), a.report.as_deref())?;
    if let Some(p) = &a.output {
        write_file(p, |b| table.write_csv(b))?;
    }
    let missing: Vec<String> =
        table.outcomes.iter().filter(|o| o.median.is_infinite()).map(|o| o.level.to_string()).collect();
    if missing.is_empty() {
        Ok(())
    } else {
        Err(CliError::NotReached(format!("median not reached within budget at level(s) {}", missing.join(", "))))
    }
}

fn randtest<W: Write>(a: RandArgs, invocation: &str, out: &mut W) -> CliResult {
    if !(1..=64).contains(&a.bits) {
        return Err(usage(format!("seed width {} outside 1..=64", a.bits)));
    }
    let tests: Vec<String> = parse_list(&a.tests, "test")?;
    if let Some(t) = tests.iter().find(|t| !matches!(t.as_str(), "chi" | "spectral")) {
        return Err(usage(format!("unknown test {t:?}")));
    }
    let (values, label): (Vec<u64>, String) = if a.source == "prng" {
        let mut g = Xorshift64Star::new(a.seed);
        ((0..a.count).map(|_| g.next_u64() >> (64 - a.bits)).collect(), "prng".into())
    } else if let Some(p) = a.source.strip_prefix("bits:") {
        let p: f64 = p.parse().map_err(|_| usage(format!("bad bit probability {p:?}")))?;
        let m = a.folds.unwrap_or(DEFAULT_BIT_FOLDS);
        let mut s = SeedSource::biased_bits(p, a.seed)?;
        let v = (0..a.count).map(|_| assemble_seed_from_bits(&mut s, a.bits, m)).collect::<Result<_, _>>()?;
        (v, format!("biased bits p={p}, m={m}"))
    } else if let Some(k) = a.source.strip_prefix("adc:") {
        let k: u32 = k.parse().map_err(|_| usage(format!("bad ADC width {k:?}")))?;
        let m = a.folds.unwrap_or(DEFAULT_ADC_FOLDS);
        let profile = AdcProfile { mean: a.adc_mean, sigma: a.adc_sigma };
        let mut s = SeedSource::adc_words(k, profile, a.seed)?;
        let v = (0..a.count).map(|_| assemble_seed_from_adc(&mut s, a.bits, m)).collect::<Result<_, _>>()?;
        (v, format!("adc k={k}, m={m}"))
    } else {
        return Err(usage(format!("unknown source {:?}; use prng, bits:P or adc:K", a.source)));
    };
    let samples: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    let hi = 2f64.powi(a.bits as i32);
    let mut text = format!("# {invocation}\nsource: {label}, {} seeds of {} bits\n", samples.len(), a.bits);
    if tests.iter().any(|t| t == "chi") {
        let r = chi_square_uniformity(&samples, a.bins, 0.0, hi, a.significance)?;
        text += &format!("{r}\n");
        if let Some(p) = &a.histogram_csv {
            write_file(p, |b| r.histogram.write_csv(b))?;
        }
    }
    if tests.iter().any(|t| t == "spectral") {
        let n = a.spectral_samples.min(samples.len());
        let r = spectral_flatness_with(&samples[..n], a.flatness_threshold)?;
        text += &format!("{r}\n");
        if let Some(p) = &a.spectrum_csv {
            write_file(p, |b| r.write_csv(b))?;
        }
    }
    emit(out, &text, None)
}

fn cipher<W: Write>(a: CipherArgs, out: &mut W) -> CliResult {
    let key = parse_key(&a.key)?;
    let pt = parse_key(&a.pt)?;
    let ct = match a.alg {
        CipherArg::Aes => aes128_encrypt(&pt, &key),
        CipherArg::Speck => {
            let (k1, k2) = key.words();
            let (p1, p2) = pt.words();
            let (c1, c2) = speck128_encrypt(p1, p2, &speck_key_schedule(k1, k2));
            Block128::from_words(c1, c2)
        }
    };
    writeln!(out, "{ct}")?;
    Ok(())
}
