mod common;

use keyshare::game::{core_vertices, value_function};
use keyshare::polar::{build_index_sets, entropy_profile_mc, BitBlock, PolarIndexSets, ProfileCache};
use keyshare::protocol::*;
use keyshare::{build_degraded_source, nucleolus, shapley_permutation, Allocation, Coalition, DegradedSourceSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_config(seed: u64) -> ProtocolConfig {
    let mut cfg = ProtocolConfig::new(DegradedSourceSpec::example(), 64, 2);
    cfg.runs = 12;
    cfg.calibration_runs = 10;
    cfg.profile_samples = 2000;
    cfg.seed = seed;
    cfg
}

#[test]
fn key_lengths_follow_floor_rule() {
    for &(n, b, r, eps) in &[(1024, 4, 0.2165, 0.05), (256, 2, 0.3, 0.1), (64, 1, 0.04, 0.05)] {
        let lengths = key_lengths_from_allocation(&Allocation { rates: vec![r] }, n, b, eps).unwrap();
        let expected = ((n * b) as f64 * (r - eps)).floor().max(0.0) as usize;
        assert_eq!(lengths, vec![expected]);
    }
}

#[test]
fn min_entropy_floor_of_example() {
    let src = build_degraded_source(&DegradedSourceSpec::example()).unwrap();
    let f = min_entropy_floor(1024, 4, 0.05, &src, Coalition::grand(3)).unwrap();
    assert!((f - 1825.786).abs() < 0.01, "{f}");
}

#[test]
fn leakage_bound_examples() {
    assert!((leakage_bound(&[0], |_| 2.0) - 0.5).abs() < 1e-15);
    assert!((leakage_bound(&[1], |_| 2.0) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    assert!(leakage_bound(&[40, 40], |_| 10.0) > 1.0);
}

#[test]
fn perfect_channels_always_agree() {
    let n = 64;
    let sets = PolarIndexSets { h_set: vec![], v_set: vec![], delta: 0.0, beta: 0.3 };
    let links: Vec<AgentLink> = (1..=2).map(|a| AgentLink { agent: a, p: 0.0, sets: sets.clone() }).collect();
    let plans = vec![FinalRoundPlan::empty(); 2];
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for run in 0..20u64 {
        let x0 = BitBlock::random(n * 4, 0.4, &mut rng).unwrap();
        let xs = vec![x0.clone(), x0.clone()];
        let rec = reconcile(&x0, &xs, &links, Some(&plans), n, 4).unwrap();
        assert_eq!(rec.estimates, xs);
        let mut t = rec.transcript;
        let km = privacy_amplify(&[1, 2], &xs, &rec.estimates, &[100, 50], &[run, run + 100], &mut t).unwrap();
        assert!(km.mismatches().is_empty());
        assert_eq!(km.keys, km.reconstructed);
    }
}

#[test]
fn transcript_replays_and_has_set_sized_messages() {
    let setup = prepare(&small_config(5), &ProfileCache::disabled()).unwrap();
    let again = prepare(&small_config(5), &ProfileCache::disabled()).unwrap();
    assert_eq!(setup.final_round, again.final_round);
    for k in 0..3 {
        let a = simulate_run(&setup, k).unwrap();
        let b = simulate_run(&again, k).unwrap();
        assert_eq!(a, b);
        for m in &a.transcript.blocks {
            let link = setup.links.iter().find(|l| l.agent == m.agent as usize).unwrap();
            assert_eq!(m.bits.len(), link.sets.h_set.len());
        }
        assert_eq!(a.transcript.hash_seeds.len(), 3);
        for (key, &r) in a.keys.keys.iter().zip(&setup.lengths) {
            assert_eq!(key.len(), r);
        }
        assert_eq!(Transcript::from_frames(&a.transcript.to_frames()).unwrap(), a.transcript);
    }
}

#[test]
fn reports_are_reproducible() {
    let cfg = small_config(7);
    let mut a = run_protocol_with(&cfg, &ProfileCache::disabled()).unwrap();
    let mut b = run_protocol_with(&cfg, &ProfileCache::disabled()).unwrap();
    a.runtime_secs = 0.0;
    b.runtime_secs = 0.0;
    assert_eq!(a, b);
    assert!(a.target_in_region);
    assert_eq!(a.agents.len(), 3);
}

#[test]
fn key_rates_stay_below_upper_bounds_for_core_targets() {
    let src = build_degraded_source(&DegradedSourceSpec::example()).unwrap();
    let g = value_function(&src).unwrap();
    let mut targets = vec![shapley_permutation(&g), nucleolus(&g).unwrap().0];
    targets.extend(core_vertices(&g, 1e-9).unwrap());
    let (n, b, eps) = (1024, 4, 0.05);
    for t in &targets {
        let r = key_lengths_from_allocation(t, n, b, eps).unwrap();
        for s in Coalition::all(3).filter(|s| !s.is_empty()) {
            let rs: usize = s.members().map(|i| r[i - 1]).sum();
            let upper = common::cond_mi(
                &common::degraded_joint(0.4, &[0.2, 0.27, 0.25]),
                common::agents_mask(s.bits()),
                1,
                0,
            );
            assert!(rs as f64 / (n * b) as f64 <= upper + 1e-9, "{s}: {rs}");
        }
    }
}

#[test]
fn coalition_targets_grow_with_the_coalition() {
    let src = build_degraded_source(&DegradedSourceSpec::example()).unwrap();
    let mut sums = std::collections::HashMap::new();
    for s in Coalition::all(3).filter(|s| !s.is_empty()) {
        let game = induced_game(&src, s).unwrap();
        sums.insert(s, shapley_permutation(&game).total());
    }
    for (&s, &vs) in &sums {
        for (&t, &vt) in &sums {
            if s.is_subset_of(t) {
                assert!(vs <= vt + 1e-12, "{s} {t}");
            }
        }
    }
    assert!((sums[&Coalition::from_agents([1, 2])] - 0.28771).abs() < 1e-5);
}

#[test]
fn coalition_mode_run() {
    let mut cfg = small_config(3);
    cfg.coalition = Some(vec![1, 2]);
    let rep = run_protocol_with(&cfg, &ProfileCache::disabled()).unwrap();
    assert_eq!(rep.agents.iter().map(|a| a.agent).collect::<Vec<_>>(), vec![1, 2]);
    let target: f64 = rep.agents.iter().map(|a| a.target_rate).sum();
    assert!(target <= 0.28771 + 1e-5);
    assert!(rep.target_in_region);
}

#[test]
fn useless_observations_give_empty_keys() {
    let mut cfg = small_config(1);
    cfg.source = DegradedSourceSpec::new(0.4, vec![0.5, 0.5]).unwrap();
    let rep = run_protocol_with(&cfg, &ProfileCache::disabled()).unwrap();
    assert!(rep.agents.iter().all(|a| a.r == 0));
    assert_eq!(rep.agreement_failure_rate, 0.0);
}

#[test]
fn target_outside_core_is_flagged_not_rejected() {
    let mut cfg = small_config(2);
    cfg.target = Some(vec![0.4, 0.0, 0.0]);
    let rep = run_protocol_with(&cfg, &ProfileCache::disabled()).unwrap();
    assert!(!rep.target_in_region);
}

#[test]
fn longer_blocks_fail_less_often() {
    let p = 0.05;
    let mut rates = Vec::new();
    for (n, blocks) in [(256usize, 400usize), (4096, 400)] {
        let sets = build_index_sets(&entropy_profile_mc(p, n, 2000, 21).unwrap(), 0.3).unwrap();
        let links = vec![AgentLink { agent: 1, p, sets }];
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut failures = 0;
        for _ in 0..blocks {
            let x0 = BitBlock::random(n, 0.4, &mut rng).unwrap();
            let x = x0.xor(&BitBlock::random(n, p, &mut rng).unwrap()).unwrap();
            let rec = reconcile(&x0, &[x.clone()], &links, None, n, 1).unwrap();
            failures += (rec.first_pass[0] != x) as usize;
        }
        rates.push(failures as f64 / blocks as f64);
    }
    assert!(rates[1] < rates[0], "{rates:?}");
}

#[test]
fn secrecy_grid() {
    for n in [2usize, 4] {
        for (p, r) in [
            (vec![0.1], vec![0]),
            (vec![0.3], vec![2]),
            (vec![0.1, 0.3], vec![1, 2]),
            (vec![0.3, 0.3], vec![2, 0]),
        ] {
            let c = empirical_secrecy_check(&TinyInstance { n, q: 0.4, p: p.clone(), r: r.clone(), beta: 0.3 })
                .unwrap();
            assert!(c.holds(), "N={n} p={p:?} r={r:?}: {c:?}");
        }
    }
}
