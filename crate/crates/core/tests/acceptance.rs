//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Seeds, sample sizes, tolerances and time limits are fixed
//! here and were not tuned against the outcome.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scismm::bits::BitVector;
use scismm::harness::{exact_distribution, uniformity_of, uniformity_test};
use scismm::keygen::{derive_strategy_triple, Key, PlcmParameter, SeedMode, UnitFraction};
use scismm::media::{pgm_read, pgm_write, PgmImage};
use scismm::scheme::{embed, extract, first_decodable_length, ScismmInput};
use scismm::strategy::Strategy;
use scismm::topology::{
    construct_periodic_point, construct_transit_point, d1, d2, random_point, scismm_iterate, scismm_step,
    sensitivity_probe, PointX1, PointX2, TruncationDepth,
};
use scismm::Error;

/// Rounding slack allowed in triangle inequalities.
const METRIC_SLACK: f64 = 1e-12;
/// Largest N and P of random phase-space points.
const MAX_SIZE: usize = 4;
/// Uniform strategy terms before the cycle of a random point.
const PREFIX: usize = 80;

type Criterion = (&'static str, u64, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let o = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= limit;
    let detail = format!("{}; {:.2} s of {} s", o.detail, elapsed.as_secs_f64(), limit.as_secs());
    outcome(
        o.pass && in_time,
        if in_time {
            detail
        } else {
            format!("{detail} (too slow)")
        },
    )
}

fn random_shape(rng: &mut ChaCha8Rng) -> (usize, usize) {
    (rng.random_range(1..=MAX_SIZE), rng.random_range(1..=MAX_SIZE))
}

fn exact_uniformity() -> Outcome {
    let mut failing = Vec::new();
    for (n, p, t) in [(2, 1, 1), (2, 2, 2), (3, 2, 2), (2, 1, 3)] {
        match exact_distribution(n, p, t) {
            Ok(d) if d.is_uniform() => {}
            Ok(d) => {
                let probs: Vec<String> = d.probabilities().iter().map(|r| r.to_string()).collect();
                failing.push(format!("({n},{p},{t}) -> [{}]", probs.join(" ")));
            }
            Err(e) => failing.push(format!("({n},{p},{t}): {e}")),
        }
    }
    if failing.is_empty() {
        outcome(true, "all four triples exactly uniform")
    } else {
        outcome(false, format!("non-uniform: {}", failing.join(", ")))
    }
}

fn monte_carlo_uniformity() -> Outcome {
    let run = match uniformity_test(8, 4, 4, 65536, 20240601) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let control = match uniformity_of(8, 65536, 20240601, |_| Ok(0)) {
        Ok(r) => r,
        Err(e) => return outcome(false, e.to_string()),
    };
    let in_band = (0.001..=0.999).contains(&run.p_value);
    let control_rejected = control.p_value < 1e-9;
    outcome(
        in_band && control_rejected,
        format!(
            "p_value={:.3e} (band [0.001, 0.999]), chi2={:.1}, dof={}, tv={:.4}; control p_value={:.1e}",
            run.p_value,
            run.statistic,
            run.dof,
            run.total_variation(),
            control.p_value
        ),
    )
}

fn random_key(rng: &mut ChaCha8Rng) -> Key {
    Key {
        seed: UnitFraction(rng.random_range(1..=u64::MAX)),
        p: PlcmParameter::new(UnitFraction(rng.random_range(1..(1u64 << 63)))).unwrap(),
    }
}

/// Fewest cells for which a P-bit message is decodable in practice. A bit is
/// the last write of none of N cells with probability about exp(-N/P), so
/// `N >= P ln(10 P)` leaves under 0.1 uncovered bits on average and the 64·P
/// cap is not reached.
fn capacity(p: usize) -> usize {
    (p as f64 * (10.0 * p as f64).ln()).ceil() as usize
}

/// Keyed blind embedding of a random message into a random LSC vector,
/// extending `T` until decodable, then extraction with the re-derived streams.
/// A cap refusal counts as a failure.
fn synthetic_cycle(rng: &mut ChaCha8Rng) -> Result<bool, String> {
    let p = rng.random_range(1..=32);
    let n = rng.random_range(capacity(p)..=256);
    let key = random_key(rng);
    let x0 = BitVector::new((0..n).map(|_| rng.random_bool(0.5)).collect()).unwrap();
    let m0 = BitVector::new((0..p).map(|_| rng.random_bool(0.5)).collect()).unwrap();
    let cap = 64 * p;
    let full = derive_strategy_triple(&key, n, p, cap, SeedMode::Blind).map_err(|e| e.to_string())?;
    let t = first_decodable_length(&full.place, &full.choice, n, p, p, cap)
        .map_err(|e| e.to_string())?
        .ok_or_else(|| format!("N={n} P={p}: not decodable within {cap} steps"))?;
    let input = ScismmInput::new(x0, m0.clone(), full.place, full.choice, full.mixing, t).map_err(|e| e.to_string())?;
    let (y, _) = embed(&input).map_err(|e| e.to_string())?;
    let again = derive_strategy_triple(&key, n, p, t, SeedMode::Blind).map_err(|e| e.to_string())?;
    let got = extract(&y, &again.place, &again.choice, &again.mixing, p, t).map_err(|e| e.to_string())?;
    Ok(got == m0)
}

fn file_cycle(rng: &mut ChaCha8Rng, dir: &std::path::Path) -> Result<bool, String> {
    let len = rng.random_range(1..=32);
    let w = rng.random_range(8..=64);
    let h = capacity(8 * len).div_ceil(w).max(8) + rng.random_range(0..8);
    let img = PgmImage::new(w, h, (0..w * h).map(|_| rng.random()).collect()).unwrap();
    let message: Vec<u8> = (0..len).map(|_| rng.random()).collect();
    let key = format!(
        "{:016x}:{:016x}",
        rng.random_range(1..=u64::MAX),
        rng.random_range(1..(1u64 << 63))
    );
    let path = |name: &str| dir.join(name).to_str().unwrap().to_owned();
    std::fs::write(path("cover.pgm"), pgm_write(&img)).map_err(|e| e.to_string())?;
    std::fs::write(path("message.bin"), &message).map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_scismm");
    let run = |args: &[String]| Command::new(bin).args(args).output().map_err(|e| e.to_string());
    let args = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let (cover, msg, out, side) = (
        path("cover.pgm"),
        path("message.bin"),
        path("stego.pgm"),
        path("stego.sidecar"),
    );
    let e = run(&args(&[
        "embed",
        "--cover",
        &cover,
        "--message",
        &msg,
        "--key",
        &key,
        "--out",
        &out,
        "--sidecar",
        &side,
    ]))?;
    if !e.status.success() {
        return Err(format!(
            "embed exited {:?}: {}",
            e.status.code(),
            String::from_utf8_lossy(&e.stderr).trim()
        ));
    }
    let x = run(&args(&["extract", "--stego", &out, "--sidecar", &side, "--key", &key]))?;
    if !x.status.success() {
        return Err(format!("extract exited {:?}", x.status.code()));
    }
    Ok(x.stdout == message)
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3003);
    let mut problems = Vec::new();
    let mut synthetic_ok = 0;
    for _ in 0..1000 {
        match synthetic_cycle(&mut rng) {
            Ok(true) => synthetic_ok += 1,
            Ok(false) => problems.push("wrong synthetic recovery".to_owned()),
            Err(e) => problems.push(e),
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let mut files_ok = 0;
    for _ in 0..100 {
        match file_cycle(&mut rng, dir.path()) {
            Ok(true) => files_ok += 1,
            Ok(false) => problems.push("wrong file recovery".to_owned()),
            Err(e) => problems.push(e),
        }
    }
    let mut detail = format!("synthetic {synthetic_ok}/1000, files {files_ok}/100");
    if let Some(first) = problems.first() {
        detail.push_str(&format!("; first problem: {first}"));
    }
    outcome(synthetic_ok == 1000 && files_ok == 100, detail)
}

/// Tally of construction results over 100 random targets.
#[derive(Default)]
struct Tally {
    verified: usize,
    unreachable: usize,
    /// Unreachable targets with a single message bit and every cell equal to it.
    single_bit_uniform: usize,
    other: Vec<String>,
}

impl Tally {
    fn record(&mut self, target: &PointX2, r: Result<bool, Error>) {
        match r {
            Ok(true) => self.verified += 1,
            Ok(false) => self.other.push("verification mismatch".into()),
            Err(Error::Unreachable(_)) => {
                self.unreachable += 1;
                if target.message_bits() == 1 && target.x.iter().all(|b| b == target.m[0]) {
                    self.single_bit_uniform += 1;
                }
            }
            Err(e) => self.other.push(e.to_string()),
        }
    }

    fn summary(&self, label: &str) -> String {
        format!(
            "{label}: {}/100 (no preimage {}, of which P=1 with x uniform and equal to m {}; other failures {})",
            self.verified,
            self.unreachable,
            self.single_bit_uniform,
            self.other.len()
        )
    }
}

fn periodic_points() -> Outcome {
    let depth = TruncationDepth::default();
    let mut parts = Vec::new();
    let mut pass = true;
    for (eps, seed) in [(0.3, 4003u64), (0.03, 4004)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut tally = Tally::default();
        for _ in 0..100 {
            let (n, p) = random_shape(&mut rng);
            let target = random_point(&mut rng, n, p, PREFIX);
            tally.record(
                &target,
                construct_periodic_point(&target, eps, depth).and_then(|(point, period)| {
                    Ok(d2(&point, &target, depth)? < eps && scismm_iterate(&point, period)? == point)
                }),
            );
        }
        pass &= tally.verified == 100;
        parts.push(tally.summary(&format!("eps={eps}")));
    }
    outcome(pass, parts.join("; "))
}

fn transitivity() -> Outcome {
    let depth = TruncationDepth::default();
    let mut rng = ChaCha8Rng::seed_from_u64(5005);
    let mut tally = Tally::default();
    for i in 0..100 {
        let radius = [0.3, 0.03, 0.003][i % 3];
        let (n, p) = random_shape(&mut rng);
        let a = random_point(&mut rng, n, p, PREFIX);
        let b = random_point(&mut rng, n, p, PREFIX);
        tally.record(
            &b,
            construct_transit_point(&a, radius, &b, depth).and_then(|(point, n0)| {
                let landed = scismm_iterate(&point, n0)?;
                Ok(d2(&point, &a, depth)? < radius && landed.agrees_to_depth(&b, depth.get()) && landed == b)
            }),
        );
    }
    outcome(tally.verified == 100, tally.summary("radius 0.3/0.03/0.003"))
}

fn sensitivity() -> Outcome {
    let depth = TruncationDepth::default();
    let mut parts = Vec::new();
    let mut pass = true;
    for (k, seed) in [(2usize, 6002u64), (4, 6004)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut found, mut exhausted, mut exhausted_trivial, mut other) = (0, 0, 0, 0);
        for _ in 0..100 {
            let (n, p) = random_shape(&mut rng);
            let x = random_point(&mut rng, n, p, PREFIX);
            match sensitivity_probe(&x, k, 1000, depth) {
                Ok((y, steps)) => {
                    let close = d2(&x, &y, depth).unwrap() < 10f64.powi(-(k as i32));
                    let fx = scismm_iterate(&x, steps).unwrap();
                    let fy = scismm_iterate(&y, steps).unwrap();
                    if close && d2(&fx, &fy, depth).unwrap() >= 1.0 {
                        found += 1;
                    } else {
                        other += 1;
                    }
                }
                Err(Error::ProbeExhausted { .. }) => {
                    exhausted += 1;
                    if n == 1 && p == 1 {
                        exhausted_trivial += 1;
                    }
                }
                Err(_) => other += 1,
            }
        }
        pass &= found >= 95;
        parts.push(format!(
            "k={k}: {found}/100 (exhausted {exhausted}, of which N=P=1 {exhausted_trivial}; other {other})"
        ));
    }
    outcome(pass, parts.join("; "))
}

fn metrics_and_continuity() -> Outcome {
    let depth = TruncationDepth::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7007);
    let mut violations = 0usize;
    for _ in 0..10_000 {
        let (n, p) = random_shape(&mut rng);
        let [a, b, c] = [0; 3].map(|_| random_point(&mut rng, n, p, PREFIX));
        let (ab, ba) = (d2(&a, &b, depth).unwrap(), d2(&b, &a, depth).unwrap());
        let (ac, cb) = (d2(&a, &c, depth).unwrap(), d2(&c, &b, depth).unwrap());
        if d2(&a, &a, depth).unwrap() != 0.0 || ab != ba || ab > ac + cb + METRIC_SLACK || ab < 0.0 {
            violations += 1;
        }
        if (ab == 0.0) != a.agrees_to_depth(&b, depth.get()) {
            violations += 1;
        }
        let [u, v, w] = [a, b, c].map(|q| PointX1::new(q.place, q.x).unwrap());
        let uv = d1(&u, &v, depth).unwrap();
        if d1(&u, &u, depth).unwrap() != 0.0
            || uv != d1(&v, &u, depth).unwrap()
            || uv > d1(&u, &w, depth).unwrap() + d1(&w, &v, depth).unwrap() + METRIC_SLACK
        {
            violations += 1;
        }
    }
    // continuity witness: sharing states and k strategy terms puts two points
    // within 3·10^-k, and their images share states and k - 1 terms
    let mut continuity_violations = 0usize;
    for _ in 0..10_000 {
        let (n, p) = random_shape(&mut rng);
        let k = rng.random_range(1..=12);
        let x = random_point(&mut rng, n, p, PREFIX);
        let other = random_point(&mut rng, n, p, PREFIX);
        let splice =
            |s: &Strategy, o: &Strategy| Strategy::concat(s.prefix(k).unwrap(), &o.shifted(k).unwrap()).unwrap();
        let y = PointX2::new(
            splice(&x.place, &other.place),
            x.x.clone(),
            splice(&x.choice, &other.choice),
            x.m.clone(),
            splice(&x.mixing, &other.mixing),
        )
        .unwrap();
        let close = d2(&x, &y, depth).unwrap() < 3.0 * 10f64.powi(-(k as i32));
        let (gx, gy) = (scismm_step(&x).unwrap(), scismm_step(&y).unwrap());
        let image_close =
            gx.agrees_to_depth(&gy, k - 1) && d2(&gx, &gy, depth).unwrap() < 3.0 * 10f64.powi(1 - k as i32);
        if close && !image_close {
            continuity_violations += 1;
        }
        if !close {
            continuity_violations += 1;
        }
    }
    outcome(
        violations == 0 && continuity_violations == 0,
        format!(
            "metric violations {violations}/10000 triples, continuity violations {continuity_violations}/10000 pairs"
        ),
    )
}

fn cross_module() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8008);
    let mut mismatches = 0usize;
    for _ in 0..100 {
        let n = rng.random_range(1..=64);
        let p = rng.random_range(1..=16);
        let t = rng.random_range(0..=200);
        let bits =
            |rng: &mut ChaCha8Rng, len| BitVector::new((0..len).map(|_| rng.random_bool(0.5)).collect()).unwrap();
        let terms =
            |rng: &mut ChaCha8Rng, k| Strategy::new(k, (0..t).map(|_| rng.random_range(0..k)).collect()).unwrap();
        let (x0, m0) = (bits(&mut rng, n), bits(&mut rng, p));
        let (sp, sc, sm) = (terms(&mut rng, n), terms(&mut rng, p), terms(&mut rng, p));
        let input = ScismmInput::new(x0.clone(), m0.clone(), sp.clone(), sc.clone(), sm.clone(), t).unwrap();
        let (y, trace) = embed(&input).unwrap();
        let mut point = PointX2::new(sp, x0.clone(), sc, m0.clone(), sm).unwrap();
        let (mut x, mut m) = (x0.into_vec(), m0.into_vec());
        for step in &trace.steps {
            x[step.place] = step.written;
            m[step.mix] = !m[step.mix];
            point = scismm_step(&point).unwrap();
            if point.x.as_slice() != x.as_slice() || point.m.as_slice() != m.as_slice() {
                mismatches += 1;
            }
        }
        if point.x != y {
            mismatches += 1;
        }
    }
    let mut pgm_failures = 0usize;
    for _ in 0..100 {
        let (w, h) = (rng.random_range(1..=64), rng.random_range(1..=64));
        let img = PgmImage::new(w, h, (0..w * h).map(|_| rng.random()).collect()).unwrap();
        let bytes = pgm_write(&img);
        match pgm_read(&bytes) {
            Ok(back) if back == img && pgm_write(&back) == bytes => {}
            _ => pgm_failures += 1,
        }
    }
    outcome(
        mismatches == 0 && pgm_failures == 0,
        format!("trace/orbit mismatches {mismatches} over 100 instances, PGM round-trip failures {pgm_failures}/100"),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("exact stego-security oracle", 10, exact_uniformity),
        ("Monte-Carlo uniformity", 30, monte_carlo_uniformity),
        ("keyed round trip", 60, round_trip),
        ("periodic points near random targets", 10, periodic_points),
        ("transitivity construction", 10, transitivity),
        ("sensitivity probe", 60, sensitivity),
        ("metric axioms and continuity", 60, metrics_and_continuity),
        ("cross-module consistency", 60, cross_module),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.into_iter().enumerate() {
        let o = timed(Duration::from_secs(limit), run);
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {}: {} {name}: {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("acceptance: {}/8 criteria pass", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
