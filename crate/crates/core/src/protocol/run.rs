//! End-to-end simulation: sample, reconcile, amplify, aggregate.

use std::time::Instant;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::coalition::Coalition;
use crate::error::{Error, Result};
use crate::game::{value_function, Allocation, CoalitionGame};
use crate::polar::{
    build_index_sets, entropy_profile_exact, profile::EXACT_MAX_N, BitBlock, EntropyProfile, ProfileCache,
    ScDecoder, DEFAULT_BETA,
};
use crate::scalar::{binary_entropy, Scalar};
use crate::solvers::shapley_permutation;
use crate::source::{build_degraded_source, DegradedSourceSpec, EntropyQuery, JointSource, VarSet};

use super::amplify::{privacy_amplify, KeyMaterial};
use super::keylen::{key_lengths_from_allocation, leakage_bound, min_entropy_floor_given};
use super::reconcile::{reconcile, redecode_with_residual, AgentLink, FinalRoundPlan};
use super::transcript::Transcript;

pub const DEFAULT_SEED: u64 = 0xC0A117;
pub const CALIBRATION_RUNS: usize = 50;
pub const DEFAULT_PROFILE_SAMPLES: usize = 4000;
/// Modelled per-block failure probability the residual set aims for.
pub const RESIDUAL_BLOCK_TARGET: f64 = 1e-3;

// stream offsets keeping the RNG uses of a configuration apart
const CALIBRATION_STREAM: u64 = 1 << 32;
const DERIVED_STREAM: u64 = 1 << 33;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub source: DegradedSourceSpec,
    pub n: usize,
    pub b: usize,
    /// Rates for the agents of the coalition, in ascending agent order.
    /// `None` picks the Shapley value of the induced game.
    #[serde(default)]
    pub target: Option<Vec<f64>>,
    pub eps: f64,
    pub beta: f64,
    pub seed: u64,
    /// Key-generating agents (1-based); `None` is the grand coalition.
    #[serde(default)]
    pub coalition: Option<Vec<usize>>,
    pub runs: usize,
    pub calibration_runs: usize,
    pub profile_samples: usize,
}

impl ProtocolConfig {
    pub fn new(source: DegradedSourceSpec, n: usize, b: usize) -> Self {
        ProtocolConfig {
            source,
            n,
            b,
            target: None,
            eps: 0.05,
            beta: DEFAULT_BETA,
            seed: DEFAULT_SEED,
            coalition: None,
            runs: 100,
            calibration_runs: CALIBRATION_RUNS,
            profile_samples: DEFAULT_PROFILE_SAMPLES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        for (name, v) in [("N", self.n), ("B", self.b)] {
            if v == 0 || !v.is_power_of_two() {
                return Err(Error::validation(name, format!("{v} is not a power of two")));
            }
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(Error::validation("eps", format!("{} is not in (0,1)", self.eps)));
        }
        if !(self.beta > 0.0 && self.beta < 0.5) {
            return Err(Error::validation("beta", format!("{} is not in (0, 1/2)", self.beta)));
        }
        if self.runs == 0 {
            return Err(Error::validation("runs", "at least one run is required"));
        }
        if self.profile_samples == 0 {
            return Err(Error::validation("profile_samples", "at least one sample is required"));
        }
        if self.b >= super::transcript::SEED_BLOCK as usize {
            return Err(Error::validation("B", "too many blocks for the transcript format"));
        }
        let l = self.source.num_agents();
        if let Some(c) = &self.coalition {
            if c.is_empty() || c.iter().any(|&a| a == 0 || a > l) {
                return Err(Error::validation("coalition", format!("{c:?} is not a nonempty set of agents 1…{l}")));
            }
        }
        if let Some(t) = &self.target {
            let k = self.coalition.as_ref().map_or(l, |c| Coalition::from_agents(c.iter().copied()).len());
            if t.len() != k {
                return Err(Error::validation("target", format!("{} rates for {k} agents", t.len())));
            }
            if t.iter().any(|r| !r.is_finite() || *r < 0.0) {
                return Err(Error::validation("target", "rates must be finite and nonnegative"));
            }
        }
        Ok(())
    }

    fn coalition_set(&self) -> Coalition {
        match &self.coalition {
            Some(c) => Coalition::from_agents(c.iter().copied()),
            None => Coalition::grand(self.source.num_agents()),
        }
    }

    fn derived_seed(&self, tag: u64) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(DERIVED_STREAM + tag);
        rng.next_u64()
    }
}

/// The induced game of a coalition `S`: `T ↦ I(X_T; X₀ | X_{S^c})` over the
/// members of `S`, renumbered 1…|S|. For the grand coalition this is `v`.
pub fn induced_game(src: &JointSource<f64>, s: Coalition) -> Result<CoalitionGame<f64>> {
    let l = src.num_agents();
    if s == Coalition::grand(l) {
        return value_function(src);
    }
    let proj = src.project(s, s.complement(l))?;
    let mut err = None;
    let game = CoalitionGame::from_fn(s.len(), |t| {
        if t.is_empty() {
            return 0.0;
        }
        match proj.mutual_information(&EntropyQuery::mutual(VarSet::agents(t), VarSet::X0).given(VarSet::Z)) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                0.0
            }
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(game),
    }
}

/// Everything a run needs that does not depend on the run index.
#[derive(Debug, Clone)]
pub struct ProtocolSetup {
    pub config: ProtocolConfig,
    /// Key-generating agents, ascending, 1-based.
    pub agents: Vec<usize>,
    pub game: CoalitionGame<f64>,
    pub target: Allocation<f64>,
    /// Whether the target satisfies the achievable-region inequalities.
    pub target_in_region: bool,
    pub lengths: Vec<usize>,
    pub links: Vec<AgentLink>,
    pub final_round: Vec<FinalRoundPlan>,
    pub leakage_bound: f64,
}

/// Outcome of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolRun {
    pub index: usize,
    pub transcript: Transcript,
    pub keys: KeyMaterial,
    /// Per agent: `X̆ ≠ X` after the per-block pass.
    pub first_pass_errors: Vec<bool>,
    /// Per agent: `X̂ ≠ X` after the final round.
    pub reconciliation_errors: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentReport {
    pub agent: usize,
    pub target_rate: f64,
    pub r: usize,
    pub achieved_rate: f64,
    pub agreement_failures: usize,
    pub reconciliation_failures: usize,
    pub first_pass_failures: usize,
    pub h_set_size: usize,
    pub p_hat: f64,
    pub final_set_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ProtocolConfig,
    pub agents: Vec<AgentReport>,
    pub runs: usize,
    /// Fraction of runs in which some agent's key was not reconstructed.
    pub agreement_failure_rate: f64,
    pub sum_rate: f64,
    pub target_in_region: bool,
    pub leakage_bound: f64,
    pub leakage_bound_vacuous: bool,
    /// χ² p-value for uniformity of 4-bit groups of the pooled key bits;
    /// `None` when fewer than 80 groups exist.
    pub chi2_p: Option<f64>,
    /// The final-round sets come from a calibration pre-run, not from the
    /// source statistics.
    pub final_round_calibrated: bool,
    pub runtime_secs: f64,
}

fn profile_for(cache: &ProfileCache, p: f64, n: usize, samples: usize, seed: u64) -> Result<EntropyProfile> {
    if n <= EXACT_MAX_N {
        entropy_profile_exact(p, n)
    } else {
        cache.monte_carlo(p, n, samples, seed)
    }
}

pub fn prepare(cfg: &ProtocolConfig, cache: &ProfileCache) -> Result<ProtocolSetup> {
    cfg.validate()?;
    let src = build_degraded_source::<f64>(&cfg.source)?;
    let l = src.num_agents();
    let s = cfg.coalition_set();
    let agents: Vec<usize> = s.members().collect();
    let game = induced_game(&src, s)?;
    let target = match &cfg.target {
        Some(t) => Allocation::new(t.clone())?,
        None => shapley_permutation(&game),
    };
    let target_in_region = if s == Coalition::grand(l) {
        game.core_contains(&target, f64::GAME_TOL)?
    } else {
        // achievable region for a coalition: R_T ≤ I(X_T; X₀ | X_{S^c})
        Coalition::grand(agents.len()).subsets().all(|t| target.coalition_sum(t) <= game.value(t) + f64::GAME_TOL)
    };
    if !target_in_region {
        log::warn!("target {:?} is outside the region of the induced game", target.rates);
    }
    let lengths = key_lengths_from_allocation(&target, cfg.n, cfg.b, cfg.eps)?;
    let nb = cfg.n * cfg.b;
    if let Some(&r) = lengths.iter().find(|&&r| r > nb) {
        return Err(Error::Domain(format!("key length {r} exceeds N·B = {nb}")));
    }

    let profiles: Vec<EntropyProfile> = agents
        .iter()
        .map(|&a| profile_for(cache, cfg.source.p[a - 1], cfg.n, cfg.profile_samples, cfg.derived_seed(a as u64)))
        .collect::<Result<_>>()?;
    let links: Vec<AgentLink> = agents
        .iter()
        .zip(&profiles)
        .map(|(&a, prof)| Ok(AgentLink { agent: a, p: cfg.source.p[a - 1], sets: build_index_sets(prof, cfg.beta)? }))
        .collect::<Result<_>>()?;

    let mut setup = ProtocolSetup {
        config: cfg.clone(),
        agents,
        game,
        target,
        target_in_region,
        lengths,
        links,
        final_round: Vec::new(),
        leakage_bound: 0.0,
    };
    setup.final_round = calibrate(&setup, &profiles)?;

    let given = s.complement(l);
    let members = setup.agents.clone();
    let mut floors = vec![0.0; 1 << members.len()];
    for t in Coalition::grand(members.len()).subsets().filter(|t| !t.is_empty()) {
        let orig = Coalition::from_agents(t.members().map(|i| members[i - 1]));
        // every final-round bit may lower the min-entropy by one
        let disclosed: usize = t.members().map(|i| setup.final_round[i - 1].residual.len() * cfg.b).sum();
        floors[t.index()] = min_entropy_floor_given(cfg.n, cfg.b, cfg.eps, &src, orig, given)? - disclosed as f64;
    }
    setup.leakage_bound = leakage_bound(&setup.lengths, |t| floors[t.index()]);
    Ok(setup)
}

/// Sizes each agent's residual set from a calibration pre-run. Candidates
/// outside `H` are taken in decreasing order of `h_i` and the set is the
/// longer of two prefixes:
/// - the shortest one that repairs every failed calibration block;
/// - the shortest one whose leftover error mass, `Σ H_b⁻¹(h_i)` over the
///   positions still undisclosed, scaled so that the full mass matches the
///   observed block failure rate (upper confidence bound, `(f + 3)/blocks`),
///   drops below [`RESIDUAL_BLOCK_TARGET`].
fn calibrate(setup: &ProtocolSetup, profiles: &[EntropyProfile]) -> Result<Vec<FinalRoundPlan>> {
    let cfg = &setup.config;
    let nb = cfg.n * cfg.b;
    let runs = cfg.calibration_runs;
    // per run, per agent: (bit errors, failed (X₀ block, X_l block) pairs)
    type Failures = Vec<(usize, Vec<(BitBlock, BitBlock)>)>;
    let stats: Vec<Failures> = (0..runs)
        .into_par_iter()
        .map(|k| {
            let mut rng = run_rng(cfg.seed, CALIBRATION_STREAM + k as u64);
            let (x0, xs) = sample_source(setup, &mut rng)?;
            let rec = reconcile(&x0, &xs, &setup.links, None, cfg.n, cfg.b)?;
            let y_blocks = x0.split(cfg.b)?;
            rec.first_pass
                .iter()
                .zip(&xs)
                .map(|(e, x)| {
                    let errs = e.xor(x)?.count_ones();
                    let mut failed = Vec::new();
                    if errs > 0 {
                        for ((eb, xb), yb) in e.split(cfg.b)?.iter().zip(x.split(cfg.b)?).zip(&y_blocks) {
                            if *eb != xb {
                                failed.push((yb.clone(), xb));
                            }
                        }
                    }
                    Ok((errs, failed))
                })
                .collect::<Result<Failures>>()
        })
        .collect::<Result<_>>()?;
    let mut dec = ScDecoder::<f64>::new(cfg.n)?;
    let mut plans = Vec::with_capacity(setup.agents.len());
    for (i, link) in setup.links.iter().enumerate() {
        let bit_errors: usize = stats.iter().map(|r| r[i].0).sum();
        let failed: Vec<&(BitBlock, BitBlock)> = stats.iter().flat_map(|r| r[i].1.iter()).collect();
        let p_hat = if runs == 0 { 0.0 } else { bit_errors as f64 / (runs * nb) as f64 };
        let h = &profiles[i].h;
        let mut cand: Vec<usize> = (0..cfg.n).filter(|j| link.sets.h_set.binary_search(j).is_err()).collect();
        cand.sort_by(|&a, &b| h[b].total_cmp(&h[a]).then(a.cmp(&b)));
        let mut repairs = |k: usize| -> Result<bool> {
            for (y, x) in &failed {
                if redecode_with_residual(&mut dec, y, link, x, &cand[..k])? != *x {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        let blocks = (runs * cfg.b).max(1) as f64;
        let pi_upper = ((failed.len() + 3) as f64 / blocks).min(1.0);
        let pe: Vec<f64> = cand.iter().map(|&j| inverse_binary_entropy(h[j])).collect();
        let total: f64 = pe.iter().sum();
        let mut k_model = 0;
        let mut left = total;
        while k_model < cand.len() && total > 0.0 && pi_upper * left / total > RESIDUAL_BLOCK_TARGET {
            left -= pe[k_model];
            k_model += 1;
        }
        let k_repair = if failed.is_empty() {
            0
        } else {
            // doubling, then bisection on the prefix length
            let mut hi = 1.min(cand.len());
            while hi < cand.len() && !repairs(hi)? {
                hi = (2 * hi).min(cand.len());
            }
            let mut lo = hi / 2;
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if repairs(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            hi
        };
        let k = k_repair.max(k_model);
        log::debug!(
            "agent {}: {} failed calibration blocks, p̂ = {p_hat:.3e}, residual set of {k}",
            link.agent,
            failed.len()
        );
        plans.push(FinalRoundPlan { residual: cand[..k].to_vec(), p_hat });
    }
    Ok(plans)
}

/// The smaller `x ∈ [0, ½]` with `H_b(x) = h`.
fn inverse_binary_entropy(h: f64) -> f64 {
    if h <= 0.0 {
        return 0.0;
    }
    if h >= 1.0 {
        return 0.5;
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < h {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn run_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Samples `X₀^{NB}` and every agent's sequence; returns those of the
/// key-generating agents. Outsiders are sampled too so that the draws of a
/// given run do not depend on the coalition.
fn sample_source(setup: &ProtocolSetup, rng: &mut ChaCha8Rng) -> Result<(BitBlock, Vec<BitBlock>)> {
    let cfg = &setup.config;
    let nb = cfg.n * cfg.b;
    let x0 = BitBlock::random(nb, cfg.source.q, rng)?;
    let mut all = Vec::with_capacity(cfg.source.num_agents());
    for &p in &cfg.source.p {
        all.push(x0.xor(&BitBlock::random(nb, p, rng)?)?);
    }
    Ok((x0, setup.agents.iter().map(|&a| all[a - 1].clone()).collect()))
}

/// Run `index` of the configuration, reproducible on its own.
pub fn simulate_run(setup: &ProtocolSetup, index: usize) -> Result<ProtocolRun> {
    let cfg = &setup.config;
    let mut rng = run_rng(cfg.seed, index as u64);
    let (x0, xs) = sample_source(setup, &mut rng)?;
    let seeds: Vec<u64> = setup.agents.iter().map(|_| rng.random()).collect();
    let rec = reconcile(&x0, &xs, &setup.links, Some(&setup.final_round), cfg.n, cfg.b)?;
    let mut transcript = rec.transcript;
    let keys = privacy_amplify(&setup.agents, &xs, &rec.estimates, &setup.lengths, &seeds, &mut transcript)?;
    Ok(ProtocolRun {
        index,
        transcript,
        keys,
        first_pass_errors: rec.first_pass.iter().zip(&xs).map(|(e, x)| e != x).collect(),
        reconciliation_errors: rec.estimates.iter().zip(&xs).map(|(e, x)| e != x).collect(),
    })
}

/// χ² uniformity p-value over 4-bit groups (15 degrees of freedom).
pub fn chi2_uniformity(bits: &[u8]) -> Option<f64> {
    let groups = bits.len() / 4;
    if groups < 80 {
        return None;
    }
    let mut counts = [0usize; 16];
    for g in bits.chunks_exact(4) {
        counts[(g[0] | g[1] << 1 | g[2] << 2 | g[3] << 3) as usize] += 1;
    }
    let e = groups as f64 / 16.0;
    let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    Some(ChiSquared::new(15.0).expect("positive dof").sf(stat))
}

pub fn run_protocol(cfg: &ProtocolConfig) -> Result<RunReport> {
    run_protocol_with(cfg, &ProfileCache::from_env())
}

pub fn run_protocol_with(cfg: &ProtocolConfig, cache: &ProfileCache) -> Result<RunReport> {
    let start = Instant::now();
    let setup = prepare(cfg, cache)?;
    let runs = execute(&setup)?;
    Ok(aggregate(&setup, &runs, start.elapsed().as_secs_f64()))
}

/// All configured runs, in index order.
pub fn execute(setup: &ProtocolSetup) -> Result<Vec<ProtocolRun>> {
    (0..setup.config.runs).into_par_iter().map(|k| simulate_run(setup, k)).collect()
}

/// Folds runs, in index order, into the report.
pub fn aggregate(setup: &ProtocolSetup, runs: &[ProtocolRun], runtime_secs: f64) -> RunReport {
    let cfg = &setup.config;
    let nb = (cfg.n * cfg.b) as f64;
    let mut agents: Vec<AgentReport> = setup
        .agents
        .iter()
        .enumerate()
        .map(|(i, &a)| AgentReport {
            agent: a,
            target_rate: setup.target.rates[i],
            r: setup.lengths[i],
            achieved_rate: setup.lengths[i] as f64 / nb,
            agreement_failures: 0,
            reconciliation_failures: 0,
            first_pass_failures: 0,
            h_set_size: setup.links[i].sets.h_set.len(),
            p_hat: setup.final_round[i].p_hat,
            final_set_size: setup.final_round[i].residual.len() * cfg.b,
        })
        .collect();
    let mut failed_runs = 0;
    let mut pooled = Vec::new();
    for run in runs {
        let bad = run.keys.mismatches();
        if !bad.is_empty() {
            failed_runs += 1;
        }
        for (i, rep) in agents.iter_mut().enumerate() {
            rep.agreement_failures += bad.contains(&rep.agent) as usize;
            rep.reconciliation_failures += run.reconciliation_errors[i] as usize;
            rep.first_pass_failures += run.first_pass_errors[i] as usize;
            pooled.extend_from_slice(&run.keys.keys[i]);
        }
    }
    let sum_rate = agents.iter().map(|a| a.achieved_rate).sum();
    RunReport {
        config: cfg.clone(),
        agents,
        runs: runs.len(),
        agreement_failure_rate: failed_runs as f64 / runs.len().max(1) as f64,
        sum_rate,
        target_in_region: setup.target_in_region,
        leakage_bound: setup.leakage_bound,
        leakage_bound_vacuous: setup.leakage_bound > 1.0,
        chi2_p: chi2_uniformity(&pooled),
        final_round_calibrated: true,
        runtime_secs,
    }
}
