//! Invariant suites behind `keyshare verify`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use keyshare::game::{check_w_submodular, core_bounds, value_function};
use keyshare::polar::transform::polar_transform_reference;
use keyshare::polar::{entropy_profile_exact, entropy_profile_mc, polar_transform, BitBlock};
use keyshare::protocol::{empirical_secrecy_check, TinyInstance, ToeplitzHash};
use keyshare::{
    brute_force_nucleolus, build_degraded_source, closed_form_coalition_value, nucleolus, shapley_closed_form,
    shapley_permutation, Coalition, DegradedSourceSpec, Rates, Source,
};

use crate::commands::{emit, load_spec, VERDICT_TOL};
use crate::error::{CliError, Result};
use crate::manifest::RunManifest;
use crate::{Suite, VerifyArgs};

#[derive(Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub pass: bool,
    pub witness: Option<String>,
}

struct Checks {
    suite: &'static str,
    out: Vec<Check>,
}

impl Checks {
    fn push(&mut self, name: &'static str, witness: Option<String>) {
        self.out.push(Check { suite: self.suite, name, pass: witness.is_none(), witness });
    }
}

fn game_suite(src: &Source, c: &mut Checks) -> Result<()> {
    let l = src.num_agents();
    let game = value_function(src)?;
    c.push("superadditive", game.superadditivity_violation(VERDICT_TOL)?.map(|(s, t)| format!("S = {s}, T = {t}")));
    c.push("supermodular", game.supermodularity_violation(VERDICT_TOL)?.map(|(s, t)| format!("S = {s}, T = {t}")));
    let mut bad = None;
    for s in Coalition::all(l).filter(|s| !s.is_empty()) {
        let b = core_bounds(src, s)?;
        if (b.lower - game.value(s)).abs() > 1e-9 || b.upper + 1e-12 < b.lower {
            bad = Some(format!("{s}: lower {}, upper {}, v {}", b.lower, b.upper, game.value(s)));
            break;
        }
    }
    c.push("core lower bound is v", bad);
    c.push(
        "w submodular on the grand coalition",
        (!check_w_submodular(src, src.grand(), VERDICT_TOL)?).then(|| "grand coalition".to_string()),
    );
    Ok(())
}

fn closed_form_check(spec: &DegradedSourceSpec, src: &Source, c: &mut Checks) -> Result<()> {
    let game = value_function(src)?;
    let mut bad = None;
    for s in Coalition::all(spec.num_agents()).filter(|s| !s.is_empty()) {
        let v: f64 = closed_form_coalition_value(spec, s)?;
        if (v - game.value(s)).abs() > 1e-9 {
            bad = Some(format!("{s}: table {}, closed form {v}", game.value(s)));
            break;
        }
    }
    c.push("closed form matches the table", bad);
    Ok(())
}

fn allocation_suite(src: &Source, c: &mut Checks) -> Result<()> {
    let game = value_function(src)?;
    let sh = shapley_permutation(&game);
    let gap = sh.max_abs_diff(&shapley_closed_form(src)?);
    c.push("Shapley routes agree", (gap > 1e-9).then(|| format!("{:?} differ by {gap:e}", sh.rates)));
    c.push("Shapley in core", game.core_violation(&sh, VERDICT_TOL)?.map(|s| format!("{s} at {:?}", sh.rates)));
    let (nu, _) = nucleolus(&game)?;
    c.push("nucleolus in core", game.core_violation(&nu, VERDICT_TOL)?.map(|s| format!("{s} at {:?}", nu.rates)));
    let slack = (nu.total() - game.grand_value()).abs();
    c.push("nucleolus efficient", (slack > 1e-9).then(|| format!("sum {} vs v = {}", nu.total(), game.grand_value())));
    if (2..=3).contains(&game.num_agents()) {
        let oracle = brute_force_nucleolus(&game, 1e-3)?;
        let gap = nu.max_abs_diff(&oracle);
        c.push(
            "nucleolus matches grid oracle",
            (gap > 2e-3).then(|| format!("{:?} vs oracle {:?}", nu.rates, oracle.rates)),
        );
    }
    Ok(())
}

fn core_equivalence(src: &Source, rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<()> {
    let game = value_function(src)?;
    let l = game.num_agents();
    let bounds: Vec<_> = Coalition::all(l).filter(|s| !s.is_empty()).map(|s| core_bounds(src, s)).collect::<keyshare::Result<_>>()?;
    let sh = shapley_permutation(&game);
    let mut bad = None;
    for _ in 0..1000 {
        let w: Vec<f64> = (0..l).map(|_| rng.random::<f64>()).collect();
        let ws: f64 = w.iter().sum();
        let mix: f64 = if rng.random::<bool>() { rng.random() } else { 0.0 };
        let a = Rates::new((0..l).map(|i| mix * sh.rates[i] + (1.0 - mix) * game.grand_value() * w[i] / ws).collect())?;
        let by_bounds = bounds.iter().all(|b| {
            let s = a.coalition_sum(b.coalition);
            b.lower - 1e-9 <= s && s <= b.upper + 1e-9
        });
        if by_bounds != game.core_contains(&a, 1e-9)? {
            bad = Some(format!("{:?}", a.rates));
            break;
        }
    }
    c.push("core bounds characterise the core", bad);
    Ok(())
}

fn polar_suite(rng: &mut ChaCha8Rng, c: &mut Checks) -> Result<()> {
    let (mut involution, mut linearity, mut reference) = (None, None, None);
    for k in 0..=10 {
        let n = 1usize << k;
        for _ in 0..10 {
            let a = BitBlock::random(n, 0.5, rng)?;
            let b = BitBlock::random(n, 0.5, rng)?;
            if involution.is_none() && polar_transform(&polar_transform(&a)) != a {
                involution = Some(format!("N = {n}, x = {:?}", a.to_bits()));
            }
            if linearity.is_none() && polar_transform(&a.xor(&b)?) != polar_transform(&a).xor(&polar_transform(&b))? {
                linearity = Some(format!("N = {n}, x = {:?}, y = {:?}", a.to_bits(), b.to_bits()));
            }
            if reference.is_none() && n <= 64 && polar_transform(&a).to_bits() != polar_transform_reference(&a.to_bits()) {
                reference = Some(format!("N = {n}, x = {:?}", a.to_bits()));
            }
        }
    }
    c.push("transform is an involution", involution);
    c.push("transform is linear", linearity);
    c.push("fast transform matches the recursive one", reference);
    let mut worst = (0.0f64, 0.0, 0);
    for &(p, n) in &[(0.11, 4), (0.2, 8), (0.3, 16)] {
        let exact = entropy_profile_exact(p, n)?;
        let mc = entropy_profile_mc(p, n, 100_000, rng.random())?;
        let d = exact.h.iter().zip(&mc.h).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if d > worst.0 {
            worst = (d, p, n);
        }
    }
    c.push(
        "exact and Monte Carlo profiles agree",
        (worst.0 > 0.02).then(|| format!("p = {}, N = {}: max gap {:.4}", worst.1, worst.2, worst.0)),
    );
    Ok(())
}

fn secrecy_suite(c: &mut Checks) -> Result<()> {
    let mut bad = None;
    for n in [2usize, 4] {
        for l in 1..=2usize {
            for pmask in 0..1usize << l {
                let p: Vec<f64> = (0..l).map(|i| if pmask >> i & 1 == 1 { 0.3 } else { 0.1 }).collect();
                for code in 0..3usize.pow(l as u32) {
                    let r: Vec<usize> = (0..l).map(|i| code / 3usize.pow(i as u32) % 3).collect();
                    let inst = TinyInstance { n, q: 0.4, p: p.clone(), r: r.clone(), beta: 0.3 };
                    let chk = empirical_secrecy_check(&inst)?;
                    if bad.is_none() && !chk.holds() {
                        bad = Some(format!("N = {n}, p = {p:?}, r = {r:?}: distance {} > bound {}", chk.distance, chk.bound));
                    }
                }
            }
        }
    }
    c.push("leftover-hash bound on the tiny grid", bad);
    let (n, r) = (4usize, 2usize);
    let seeds = 1u32 << (n + r - 1);
    let bits = |v: u32, len: usize| (0..len).map(|j| (v >> j & 1) as u8).collect::<Vec<u8>>();
    let mut bad = None;
    'pairs: for x in 0u32..16 {
        for y in x + 1..16 {
            let mut hits = 0;
            for s in 0..seeds {
                let h = ToeplitzHash::from_bits(n, r, &bits(s, n + r - 1))?;
                hits += (h.apply(&bits(x, n))? == h.apply(&bits(y, n))?) as u32;
            }
            if hits << r > seeds {
                bad = Some(format!("x = {x:04b}, y = {y:04b} collide under {hits}/{seeds} seeds"));
                break 'pairs;
            }
        }
    }
    c.push("Toeplitz family is two-universal", bad);
    Ok(())
}

pub fn run(args: &VerifyArgs) -> Result<()> {
    let spec = match &args.spec {
        Some(path) => load_spec(path)?,
        None => DegradedSourceSpec::example(),
    };
    let src: Source = build_degraded_source(&spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.common.seed);
    let wants = |s: Suite| args.suite == s || args.suite == Suite::All;
    let mut checks = Vec::new();
    if wants(Suite::Game) {
        let mut c = Checks { suite: "game", out: Vec::new() };
        closed_form_check(&spec, &src, &mut c)?;
        game_suite(&src, &mut c)?;
        core_equivalence(&src, &mut rng, &mut c)?;
        checks.extend(c.out);
    }
    if wants(Suite::Allocation) {
        let mut c = Checks { suite: "allocation", out: Vec::new() };
        allocation_suite(&src, &mut c)?;
        checks.extend(c.out);
    }
    if wants(Suite::Polar) {
        let mut c = Checks { suite: "polar", out: Vec::new() };
        polar_suite(&mut rng, &mut c)?;
        checks.extend(c.out);
    }
    if wants(Suite::Secrecy) {
        let mut c = Checks { suite: "secrecy", out: Vec::new() };
        secrecy_suite(&mut c)?;
        checks.extend(c.out);
    }
    for chk in &checks {
        match &chk.witness {
            None => eprintln!("PASS {}: {}", chk.suite, chk.name),
            Some(w) => eprintln!("FAIL {}: {}: {w}", chk.suite, chk.name),
        }
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    let mut manifest = RunManifest::new("verify", args.common.seed);
    manifest.spec = args.spec.clone();
    manifest.set("suite", format!("{:?}", args.suite).to_lowercase());
    let text = serde_json::to_string_pretty(&serde_json::json!({ "failed": failed, "checks": checks })).expect("serializes");
    emit(&args.common, &(text + "\n"), manifest)?;
    if failed > 0 {
        return Err(CliError::Verify(failed));
    }
    Ok(())
}
