//! Acceptance run: one line per criterion, nonzero exit if any fails.

mod common;

use std::time::{Duration, Instant};

use common::{binary_entropy, oracle_shapley};
use keyshare::game::{clearance_level_games, core_bounds, value_function};
use keyshare::polar::{
    build_index_sets, entropy_profile_exact, entropy_profile_mc, polar_transform, BitBlock, ProfileCache,
};
use keyshare::protocol::{empirical_secrecy_check, run_protocol_with, ProtocolConfig, TinyInstance, ToeplitzHash};
use keyshare::{
    brute_force_nucleolus, build_degraded_source, nucleolus, shapley_closed_form, shapley_permutation, Allocation,
    Coalition, DegradedSourceSpec, Game,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    ok: bool,
    detail: String,
}

fn check(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome { ok, detail: detail.into() }
}

fn example_game() -> Game {
    value_function(&build_degraded_source(&DegradedSourceSpec::example()).unwrap()).unwrap()
}

fn in_intervals(rates: &[f64], iv: &[(f64, f64)]) -> bool {
    rates.iter().zip(iv).all(|(r, (lo, hi))| lo <= r && r <= hi)
}

fn value_table() -> Outcome {
    let g = example_game();
    let expected = [0.17134, 0.08205, 0.28771, 0.10142, 0.31679, 0.20155, 0.46921];
    let worst = (1..8).map(|s| (g.value(Coalition(s)) - expected[s as usize - 1]).abs()).fold(0.0, f64::max);
    check(worst <= 1e-5, format!("max deviation {worst:.2e}"))
}

fn shapley() -> Outcome {
    let src = build_degraded_source(&DegradedSourceSpec::example()).unwrap();
    let g = value_function(&src).unwrap();
    let a = shapley_permutation(&g);
    let b = shapley_closed_form(&src).unwrap();
    let gap = a.max_abs_diff(&b);
    let iv = [(0.2165, 0.2166), (0.1142, 0.1143), (0.1384, 0.1385)];
    check(in_intervals(&a.rates, &iv) && gap <= 1e-9, format!("{:.6?}, routes differ by {gap:.1e}", a.rates))
}

fn nucleolus_check() -> Outcome {
    let g = example_game();
    let (a, _) = nucleolus(&g).unwrap();
    let oracle = brute_force_nucleolus(&g, 2.5e-4).unwrap();
    let gap = a.max_abs_diff(&oracle);
    let iv = [(0.2109, 0.2110), (0.1172, 0.1173), (0.1410, 0.1411)];
    check(
        in_intervals(&a.rates, &iv) && gap <= 2e-3,
        format!("{:.6?}, oracle {:.4?} (gap {gap:.1e})", a.rates, oracle.rates),
    )
}

fn property_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0A117);
    let mut failures = Vec::new();
    for case in 0..100 {
        let l = rng.random_range(2..=4usize);
        let q = rng.random_range(0.05..0.95);
        let p: Vec<f64> = (0..l).map(|_| rng.random_range(0.01..0.99)).collect();
        let src = build_degraded_source(&DegradedSourceSpec::new(q, p).unwrap()).unwrap();
        let g = value_function(&src).unwrap();
        if !g.is_superadditive(1e-10).unwrap() || !g.is_supermodular(1e-10).unwrap() {
            failures.push(format!("case {case}: not convex"));
        }
        let sh = shapley_permutation(&g);
        let oracle = oracle_shapley(l, |s| g.value(Coalition(s)));
        if sh.rates.iter().zip(&oracle).any(|(a, b)| (a - b).abs() > 1e-9) {
            failures.push(format!("case {case}: Shapley oracle mismatch"));
        }
        let (nu, _) = nucleolus(&g).unwrap();
        if !g.core_contains(&sh, 1e-9).unwrap() || !g.core_contains(&nu, 1e-9).unwrap() {
            failures.push(format!("case {case}: allocation outside core"));
        }
        let bounds: Vec<_> =
            Coalition::all(l).filter(|s| !s.is_empty()).map(|s| core_bounds(&src, s).unwrap()).collect();
        for _ in 0..1000 {
            // random efficient point, pulled towards the Shapley value half the time
            let w: Vec<f64> = (0..l).map(|_| rng.random::<f64>()).collect();
            let ws: f64 = w.iter().sum();
            let mix = if rng.random::<bool>() { rng.random::<f64>() } else { 0.0 };
            let rates = (0..l).map(|i| mix * sh.rates[i] + (1.0 - mix) * g.grand_value() * w[i] / ws).collect();
            let a = Allocation { rates };
            let by_bounds = bounds.iter().all(|b| {
                let s = a.coalition_sum(b.coalition);
                b.lower - 1e-9 <= s && s <= b.upper + 1e-9
            });
            if by_bounds != g.core_contains(&a, 1e-9).unwrap() {
                failures.push(format!("case {case}: bounds disagree at {:?}", a.rates));
                break;
            }
        }
    }
    check(failures.is_empty(), if failures.is_empty() { "100 games".into() } else { failures.join("; ") })
}

fn polar_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut notes = Vec::new();
    let mut ok = true;
    for k in 0..=10 {
        let n = 1 << k;
        for _ in 0..20 {
            let a = BitBlock::random(n, 0.5, &mut rng).unwrap();
            let b = BitBlock::random(n, 0.5, &mut rng).unwrap();
            ok &= polar_transform(&polar_transform(&a)) == a;
            ok &= polar_transform(&a.xor(&b).unwrap()) == polar_transform(&a).xor(&polar_transform(&b)).unwrap();
        }
    }
    if !ok {
        notes.push("transform identity failed".to_string());
    }
    let mut worst: f64 = 0.0;
    for &(p, n) in &[(0.11, 4), (0.2, 8), (0.3, 16)] {
        let exact = entropy_profile_exact(p, n).unwrap();
        let mc = entropy_profile_mc(p, n, 100_000, 1).unwrap();
        worst = exact.h.iter().zip(&mc.h).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
    }
    ok &= worst <= 0.02;
    notes.push(format!("exact vs MC {worst:.4}"));
    // |H|/N approaches H_b(p) as N doubles, up to a 0.03 noise band
    for &p in &[0.2, 0.25, 0.27] {
        let dist: Vec<f64> = (6..=10)
            .map(|k| {
                let n = 1usize << k;
                let prof = entropy_profile_mc(p, n, 10_000, 2).unwrap();
                let sets = build_index_sets(&prof, 0.3).unwrap();
                (sets.h_set.len() as f64 / n as f64 - binary_entropy(p)).abs()
            })
            .collect();
        let trend = dist.windows(2).all(|w| w[1] <= w[0] + 0.03) && dist[4] <= dist[0];
        ok &= trend;
        notes.push(format!("p={p}: |H|/N gap {:.3?}", dist));
    }
    check(ok, notes.join("; "))
}

fn protocol_desk_scale() -> Outcome {
    let cfg = ProtocolConfig::new(DegradedSourceSpec::example(), 1024, 4);
    let rep = run_protocol_with(&cfg, &ProfileCache::from_env()).unwrap();
    let floor = 0.9 * (0.46921 - 3.0 * 0.05);
    let chi2 = rep.chi2_p.unwrap_or(0.0);
    check(
        rep.agreement_failure_rate <= 0.1 && rep.sum_rate >= floor && chi2 >= 0.01,
        format!(
            "failure rate {:.2}, sum rate {:.4} (floor {floor:.4}), χ² p = {chi2:.3}, leakage bound {:.1e}",
            rep.agreement_failure_rate, rep.sum_rate, rep.leakage_bound
        ),
    )
}

fn leftover_hash() -> Outcome {
    let mut cells = 0;
    let mut bad = Vec::new();
    for n in [2usize, 4] {
        for l in 1..=2usize {
            let combos = 1usize << l;
            for pmask in 0..combos {
                let p: Vec<f64> = (0..l).map(|i| if pmask >> i & 1 == 1 { 0.3 } else { 0.1 }).collect();
                for rcode in 0..3usize.pow(l as u32) {
                    let r: Vec<usize> = (0..l).map(|i| rcode / 3usize.pow(i as u32) % 3).collect();
                    let c = empirical_secrecy_check(&TinyInstance { n, q: 0.4, p: p.clone(), r: r.clone(), beta: 0.3 })
                        .unwrap();
                    cells += 1;
                    if !c.holds() {
                        bad.push(format!("N={n} p={p:?} r={r:?}: {:.4} > {:.4}", c.distance, c.bound));
                    }
                }
            }
        }
    }
    // two-universality of the n = 4, r = 2 Toeplitz family
    let (n, r) = (4usize, 2usize);
    let mut worst = 0;
    for x in 0u32..16 {
        for y in x + 1..16 {
            let bits = |v: u32| (0..n).map(|j| (v >> j & 1) as u8).collect::<Vec<u8>>();
            let hits = (0u32..1 << (n + r - 1))
                .filter(|s| {
                    let t: Vec<u8> = (0..n + r - 1).map(|k| (s >> k & 1) as u8).collect();
                    let h = ToeplitzHash::from_bits(n, r, &t).unwrap();
                    h.apply(&bits(x)).unwrap() == h.apply(&bits(y)).unwrap()
                })
                .count();
            worst = worst.max(hits);
        }
    }
    let universal = worst * 4 <= 32;
    check(
        bad.is_empty() && universal,
        format!("{cells} cells, {} violations{}; worst collisions {worst}/32", bad.len(), bad.first().map(|b| format!(" ({b})")).unwrap_or_default()),
    )
}

fn clearance() -> Outcome {
    let spec = DegradedSourceSpec::example().with_levels(vec![vec![1], vec![2, 3]]).unwrap();
    let src = build_degraded_source::<f64>(&spec).unwrap();
    let games = clearance_level_games(&src, spec.levels.as_ref().unwrap()).unwrap();
    let v = games[0].grand_value();
    check((v - 0.17134).abs() <= 1e-5, format!("level-1 value {v:.6}"))
}

fn main() {
    type Criterion = (&'static str, Duration, fn() -> Outcome);
    let criteria: [Criterion; 8] = [
        ("value table", Duration::from_secs(1), value_table),
        ("Shapley value", Duration::from_secs(1), shapley),
        ("nucleolus", Duration::from_secs(30), nucleolus_check),
        ("property suite", Duration::from_secs(120), property_suite),
        ("polar suite", Duration::from_secs(300), polar_suite),
        ("protocol desk scale", Duration::from_secs(600), protocol_desk_scale),
        ("leftover hash exactness", Duration::from_secs(300), leftover_hash),
        ("clearance levels", Duration::from_secs(1), clearance),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let ok = out.ok && took <= *limit;
        failed += !ok as usize;
        println!(
            "criterion {} ({name}): {} in {:.2?} (limit {:?}): {}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            took,
            limit,
            out.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
