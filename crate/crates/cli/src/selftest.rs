//! Acceptance criteria as runnable checks, shared by `zrp selftest` and the
//! `acceptance` test target. Every criterion uses fixed seeds.

use crate::analysis::{
    fitness_statistics, median, normal_scale, rank_statistics, scaled_fluctuations, stable_tail, CheckResult,
};
use crate::commands::{diagnostics_rows, probability_scaling};
use crate::config::{Density, ExactConfig, ExperimentConfig, Sampler};
use crate::error::Result;
use crate::experiment::{run_size, SizeRun};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;
use zrp_core::disorder::{sample_disorder, DisorderSample, FitnessLaw};
use zrp_core::dynamics::{Horizon, ProcessState};
use zrp_core::ensemble::{
    enumerate_canonical, log_partition, nu_n, Enumeration, GrandCanonical, McmcChain, OccupancyVector,
    PartitionOptions,
};
use zrp_core::rng::{stream, Purpose, SeedRecord};
use zrp_core::stats::{
    chi_square_gof, chi_square_two_sample, gamma_function, kappa, ks_distance, normal_cdf, theorem_laws, u_diag,
    v_diag,
};
use zrp_core::weights::{WeightSeq, WeightSpec};

pub const SEED: u64 = 0x5eed_2016;

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "exactness at small sizes"),
    (2, "critical density and nu_n"),
    (3, "condensation"),
    (4, "explicit symmetry breaking"),
    (5, "intermediate symmetry breaking"),
    (6, "fitness gamma law"),
    (7, "normal fluctuations"),
    (8, "stable fluctuations"),
    (9, "P(S_n = m) scaling"),
    (10, "grand-canonical CLT and appendix diagnostics"),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
}

impl Outcome {
    fn new(id: u8, checks: Vec<CheckResult>) -> Self {
        let name = CRITERIA.iter().find(|c| c.0 == id).map_or("", |c| c.1).to_string();
        Self { id, name, pass: checks.iter().all(|c| c.pass), checks }
    }

    /// `PASS [n] name: check stat vs threshold; ...`
    #[must_use]
    pub fn line(&self) -> String {
        let parts: Vec<String> = self
            .checks
            .iter()
            .map(|c| format!("{} {} {:.6} (threshold {:.6})", if c.pass { "ok" } else { "FAIL" }, c.name, c.statistic, c.threshold))
            .collect();
        format!("{} [{}] {}: {}", if self.pass { "PASS" } else { "FAIL" }, self.id, self.name, parts.join("; "))
    }
}

fn at_most(name: &str, statistic: f64, threshold: f64, note: impl Into<String>) -> CheckResult {
    CheckResult { name: name.into(), statistic, threshold, pass: statistic <= threshold, note: note.into() }
}

fn at_least(name: &str, statistic: f64, threshold: f64, note: impl Into<String>) -> CheckResult {
    CheckResult { name: name.into(), statistic, threshold, pass: statistic >= threshold, note: note.into() }
}

fn errored(name: &str, e: &crate::error::CliError) -> CheckResult {
    CheckResult { name: name.into(), statistic: f64::NAN, threshold: f64::NAN, pass: false, note: e.to_string() }
}

/// Quenched canonical config with `ρ = ρ★ + 1`.
#[must_use]
pub fn condensed_config(beta: f64, law: FitnessLaw, sampler: Sampler, n: usize, replicas: usize) -> ExperimentConfig {
    ExperimentConfig {
        seed: SEED,
        sampler,
        quenched: true,
        n_values: vec![n],
        replicas,
        replicas_per_disorder: None,
        threads: None,
        tolerance: 1e-10,
        disorder: law,
        weights: WeightSpec::ZetaTail { beta },
        density: Density { rho: None, rho_offset: Some(1.0) },
        mcmc: Default::default(),
        dynamics: Default::default(),
        exact: ExactConfig::default(),
        rejection: Default::default(),
        output: Default::default(),
        phase: None,
    }
}

/// Shared runs for criteria that use the same ensemble.
#[derive(Default)]
pub struct Selftest {
    intermediate: OnceLock<Result<SizeRun>>,
}

impl Selftest {
    #[must_use]
    pub fn new() -> Self {
        Self::default()
    }

    fn intermediate(&self) -> &Result<SizeRun> {
        self.intermediate.get_or_init(|| {
            let cfg = condensed_config(3.0, power_tail(0.5, 1.0), Sampler::Exact, 4000, 2000);
            run_size(&cfg, 0, false)
        })
    }

    pub fn run(&self, id: u8) -> Outcome {
        let checks = match id {
            1 => exactness(),
            2 => critical_density(),
            3 => condensation(),
            4 => explicit_breaking(),
            5 => self.intermediate_rank(),
            6 => self.fitness_law(),
            7 => self.normal_fluctuations(),
            8 => stable_fluctuations(),
            9 => probability_scaling_check(),
            10 => grand_canonical_clt(),
            _ => vec![CheckResult { name: "unknown criterion".into(), statistic: f64::NAN, threshold: f64::NAN, pass: false, note: String::new() }],
        };
        Outcome::new(id, checks)
    }

    fn intermediate_rank(&self) -> Vec<CheckResult> {
        match self.intermediate() {
            Ok(run) => {
                let laws = theorem_laws(0.5, 1.0, 3.0, 1.0).expect("valid parameters");
                vec![ks_check("rank KS", &rank_statistics(&run.rows, 0.5), laws.rank_cdf(), "(n^(γ−1)K_n)^(1/γ) vs Gamma(0.5, 1)")]
            }
            Err(e) => vec![errored("rank KS", e)],
        }
    }

    fn fitness_law(&self) -> Vec<CheckResult> {
        let laws = theorem_laws(0.5, 1.0, 3.0, 1.0).expect("valid parameters");
        let mut out = vec![match self.intermediate() {
            Ok(run) => ks_check("power-tail fitness KS", &fitness_statistics(&run.rows), laws.fitness_cdf(), "n(1−F_n) vs Gamma(0.5, 1)"),
            Err(e) => errored("power-tail fitness KS", e),
        }];
        // Beta(2, 1/2) has the same γ; its α₁ = 1.5 does not enter the fitness law.
        let cfg = condensed_config(3.0, FitnessLaw::beta(2.0, 0.5).expect("valid"), Sampler::Exact, 4000, 2000);
        out.push(match run_size(&cfg, 0, false) {
            Ok(run) => {
                let rs = cfg.rho_star().ok().flatten().unwrap_or(f64::NAN);
                let laws = theorem_laws(0.5, cfg.disorder.alpha1(), 3.0, cfg.rho().unwrap_or(f64::NAN) - rs).expect("valid");
                ks_check("beta fitness KS", &fitness_statistics(&run.rows), laws.fitness_cdf(), "Beta(2, 0.5) disorder")
            }
            Err(e) => errored("beta fitness KS", &e),
        });
        out
    }

    fn normal_fluctuations(&self) -> Vec<CheckResult> {
        let cfg = condensed_config(3.0, power_tail(0.5, 1.0), Sampler::Exact, 4000, 2000);
        match (self.intermediate(), normal_scale(&cfg)) {
            (Ok(run), Ok(sd)) => {
                let mut v = scaled_fluctuations(&run.rows, 0.5);
                v.sort_by(f64::total_cmp);
                vec![ks_check("fluctuation KS", &v, |x| normal_cdf(x, 0.0, sd), format!("vs N(0, {:.6})", sd * sd))]
            }
            (Err(e), _) => vec![errored("fluctuation KS", e)],
            (_, Err(e)) => vec![errored("fluctuation KS", &e)],
        }
    }
}

fn power_tail(gamma: f64, alpha1: f64) -> FitnessLaw {
    FitnessLaw::power_tail(gamma, alpha1).expect("valid law")
}

fn ks_check(name: &str, sorted: &[f64], cdf: impl Fn(f64) -> f64, note: impl Into<String>) -> CheckResult {
    let d = ks_distance(sorted, cdf).unwrap_or(f64::NAN);
    at_most(name, d, 0.05, note)
}

fn histogram(e: &Enumeration, samples: impl Iterator<Item = Vec<u32>>) -> Vec<u64> {
    let mut h = vec![0u64; e.configs.len()];
    for s in samples {
        h[e.index_of(&s).expect("configuration in the enumeration")] += 1;
    }
    h
}

fn exactness() -> Vec<CheckResult> {
    let cases: [(f64, Vec<f64>, u32); 2] = [(2.0, vec![0.9, 0.5, 0.1], 3), (2.5, vec![0.85, 0.4, 0.65, 0.2], 6)];
    let draws = 1_000_000usize;
    let mut out = Vec::new();
    for (ci, (beta, x, m)) in cases.into_iter().enumerate() {
        let n = x.len();
        let tag = format!("(n,m)=({n},{m})");
        let seq = WeightSeq::zeta_tail(beta).expect("valid");
        let d = DisorderSample::from_fitnesses(x.clone()).expect("valid");
        let e = enumerate_canonical(&seq, &x, m);
        let index = |k: u64| (ci as u64) << 8 | k;

        let table = log_partition(&seq, &d, m as usize, PartitionOptions::default()).expect("small table");
        let mut rng = stream(SEED, Purpose::Test, index(1));
        let exact = histogram(&e, (0..draws).map(|_| table.sample(&mut rng).expect("normalizable").counts));

        let init = OccupancyVector::concentrated(n, 0, m);
        let mut chain = McmcChain::new(&seq, &d, &init, stream(SEED, Purpose::Chain, index(2))).expect("valid chain");
        chain.run(1000 * n as u64);
        let thin = 20 * n as u64;
        let mcmc = histogram(
            &e,
            (0..draws).map(|_| {
                chain.run(thin);
                chain.counts().to_vec()
            }),
        );

        let mut state = ProcessState::new(&seq, &d, &init).expect("positive fitness");
        let mut rng = stream(SEED, Purpose::Dynamics, index(3));
        state.run_with(Horizon::Events(100_000), &mut rng, |_, _| {}).expect("events");
        let spacing = 20.0 * state.time() / state.events() as f64;
        let mut samples = Vec::with_capacity(draws);
        state.sample_on_grid(spacing, draws as u64, &mut rng, |c| samples.push(c.to_vec())).expect("grid");
        let dynamics = histogram(&e, samples.into_iter());

        for (name, h) in [("exact", &exact), ("mcmc", &mcmc), ("dynamics", &dynamics)] {
            out.push(match chi_square_gof(h, &e.probs, 5.0) {
                Ok(c) => at_least(&format!("{name} {tag} chi2 p"), c.p_value, 1e-3, format!("χ² = {:.2}, df = {}", c.statistic, c.df)),
                Err(err) => errored(name, &err.into()),
            });
        }
        out.push(match chi_square_two_sample(&exact, &mcmc, 10) {
            Ok(c) => at_least(&format!("exact vs mcmc {tag} p"), c.p_value, 1e-3, format!("χ² = {:.2}, df = {}", c.statistic, c.df)),
            Err(err) => errored("exact vs mcmc", &err.into()),
        });
    }
    out
}

fn critical_density() -> Vec<CheckResult> {
    let mut out = Vec::new();
    for (k, (beta, gamma)) in [(3.0, 0.5), (4.0, 1.5), (2.5, 0.8)].into_iter().enumerate() {
        let seq = WeightSeq::zeta_tail(beta).expect("valid");
        let law = power_tail(gamma, 1.0);
        let rho = match seq.critical_density(&law, 1e-11) {
            Ok(r) => r,
            Err(e) => {
                out.push(errored("critical density", &e.into()));
                continue;
            }
        };
        let mut rng = stream(SEED, Purpose::Test, 200 + k as u64);
        let draws = 10_000_000u64;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..draws {
            let g = seq.g_of_x(law.draw(&mut rng)).expect("x < 1");
            s += g;
            s2 += g * g;
        }
        let mean = s / draws as f64;
        let sd = (s2 / draws as f64 - mean * mean).sqrt();
        let se = sd / (draws as f64).sqrt();
        out.push(at_most(
            &format!("rho* (β={beta}, γ={gamma}) |quad − MC| / se"),
            (rho - mean).abs() / se,
            3.0,
            format!("ρ★ = {rho:.8}, MC mean = {mean:.8}"),
        ));
        let n = 100_000;
        let d = sample_disorder(&law, n, SeedRecord::new(SEED, Purpose::Disorder, 200 + k as u64)).expect("valid");
        let nu = nu_n(&seq, &d).expect("x < 1");
        out.push(at_most(
            &format!("nu_n (β={beta}, γ={gamma}) |ν_n − ρ★| / σ"),
            (nu - rho).abs() / (sd / (n as f64).sqrt()),
            3.0,
            format!("ν_n = {nu:.8} at n = {n}"),
        ));
    }
    out
}

fn condensation() -> Vec<CheckResult> {
    let cfg = condensed_config(3.0, power_tail(0.5, 1.0), Sampler::Mcmc, 2000, 500);
    match run_size(&cfg, 0, false) {
        Ok(run) => {
            let nf = run.n as f64;
            let q1: Vec<f64> = run.rows.iter().map(|r| f64::from(r.q1) / nf).collect();
            let q2: Vec<f64> = run.rows.iter().map(|r| f64::from(r.q2) / nf).collect();
            vec![
                at_most("|median Q1/n − (ρ−ρ★)|", (median(&q1) - 1.0).abs(), 0.1, format!("median Q1/n = {:.4}", median(&q1))),
                at_most("median Q2/n", median(&q2), 0.05, "quenched MCMC, n = 2000"),
            ]
        }
        Err(e) => vec![errored("condensation", &e)],
    }
}

fn explicit_breaking() -> Vec<CheckResult> {
    let mut cfg = condensed_config(3.0, power_tail(1.5, 1.0), Sampler::Exact, 2000, 500);
    cfg.replicas_per_disorder = Some(10);
    match run_size(&cfg, 0, false) {
        Ok(run) => {
            let f = run.rows.iter().filter(|r| r.k_n == 1).count() as f64 / run.rows.len() as f64;
            vec![at_least("K_n = 1 frequency", f, 0.9, "50 disorders × 10 replicas")]
        }
        Err(e) => vec![errored("K_n = 1 frequency", &e)],
    }
}

fn stable_fluctuations() -> Vec<CheckResult> {
    let cfg = condensed_config(2.0, power_tail(0.6, 1.0), Sampler::Exact, 4000, 2000);
    let k = kappa(2.0, 0.6).expect("stable regime");
    match run_size(&cfg, 0, false) {
        Ok(run) => match stable_tail(&scaled_fluctuations(&run.rows, k), k) {
            Ok(t) => vec![
                at_most(
                    "|Hill − 1.6|",
                    (t.hill_index - 1.6).abs(),
                    0.3,
                    format!("Hill = {:.4} over the {} largest bulk excesses", t.hill_index, t.hill_k),
                ),
                at_most("light-side q99/q90", t.light_ratio, t.power_ratio, format!("heavy side {:.3}", t.heavy_ratio)),
            ],
            Err(e) => vec![errored("Hill", &e.into())],
        },
        Err(e) => vec![errored("stable fluctuations", &e)],
    }
}

fn probability_scaling_check() -> Vec<CheckResult> {
    let mut cfg = condensed_config(3.0, power_tail(0.5, 1.0), Sampler::Exact, 64, 1);
    cfg.n_values = vec![64, 128, 256, 512];
    let res = diagnostics_rows(&cfg, 16, true).and_then(|rows| probability_scaling(&cfg, &rows));
    match res {
        Ok(Some((_, fit))) => vec![at_most(
            "|slope − (1−β−γ)|",
            (fit.slope - fit.predicted_slope).abs(),
            0.3,
            format!("slope = {:.4}, predicted {:.4}", fit.slope, fit.predicted_slope),
        )],
        Ok(None) => vec![errored("slope", &crate::error::CliError::Runtime("no feasible sizes".into()))],
        Err(e) => vec![errored("slope", &e)],
    }
}

/// `(S_n − ν_n n)` over grand-canonical replicas on one disorder draw.
fn grand_canonical_excess(beta: f64, gamma: f64, n: usize, replicas: u64, tag: u64) -> zrp_core::Result<Vec<f64>> {
    let seq = WeightSeq::zeta_tail(beta)?;
    let d = sample_disorder(&power_tail(gamma, 1.0), n, SeedRecord::new(SEED, Purpose::Disorder, tag))?;
    let nu = nu_n(&seq, &d)?;
    let gc = GrandCanonical::new(&seq, &d)?;
    Ok((0..replicas)
        .map(|r| {
            let occ = gc.sample(&mut stream(SEED, Purpose::Replica, (tag << 32) | r));
            occ.total as f64 - nu * n as f64
        })
        .collect())
}

fn grand_canonical_clt() -> Vec<CheckResult> {
    let n = 10_000;
    let mut out = Vec::new();
    let seq = WeightSeq::zeta_tail(3.0).expect("valid");
    out.push(
        match (grand_canonical_excess(3.0, 0.5, n, 2000, 1000), seq.mean_variance(&power_tail(0.5, 1.0), 1e-10)) {
            (Ok(v), Ok(var)) => {
                let mut s: Vec<f64> = v.iter().map(|x| x / (n as f64).sqrt()).collect();
                s.sort_by(f64::total_cmp);
                ks_check("GC normal KS", &s, |x| normal_cdf(x, 0.0, var.sqrt()), format!("vs N(0, {var:.6})"))
            }
            (Err(e), _) | (_, Err(e)) => errored("GC normal KS", &e.into()),
        },
    );
    let k = kappa(2.0, 0.6).expect("stable regime");
    out.push(match grand_canonical_excess(2.0, 0.6, n, 2000, 1001) {
        Ok(v) => {
            let s: Vec<f64> = v.iter().map(|x| x / (n as f64).powf(k)).collect();
            // In the grand-canonical ensemble the heavy tail is the upper one.
            let neg: Vec<f64> = s.iter().map(|x| -x).collect();
            match stable_tail(&neg, k) {
                Ok(t) => at_most("|GC Hill − 1.6|", (t.hill_index - 1.6).abs(), 0.3, format!("Hill = {:.4}, k = {}", t.hill_index, t.hill_k)),
                Err(e) => errored("GC Hill", &e.into()),
            }
        }
        Err(e) => errored("GC Hill", &e.into()),
    });
    let nd = 100_000;
    let rel = |name: &str, vals: Vec<f64>, target: f64| {
        let med = median(&vals);
        at_most(name, (med / target - 1.0).abs(), 0.1, format!("median {med:.5}, limit {target:.5}"))
    };
    let draws = |gamma: f64, tag: u64| -> Vec<DisorderSample> {
        (0..50)
            .map(|r| sample_disorder(&power_tail(gamma, 1.0), nd, SeedRecord::new(SEED, Purpose::Disorder, (tag << 32) | r)).expect("valid"))
            .collect()
    };
    let k_small = (nd as f64).sqrt();
    let uniform = draws(1.0, 1002);
    out.push(rel("U (γ=1, Ψ≡1) relative error", uniform.iter().map(|d| u_diag(d, 1.0, &|_| 1.0, k_small)).collect(), 1.0));
    let half = draws(0.5, 1003);
    let phi = |x: f64| seq.phi(x, 1e-14).map_or(f64::NAN, |e| e.value);
    out.push(rel("U (γ=0.5, Ψ=Φ) relative error", half.iter().map(|d| u_diag(d, 0.5, &phi, k_small)).collect(), gamma_function(1.5)));
    let lnn = (nd as f64).ln();
    out.push(rel("V (γ=1, k=n(ln n)²) relative error", uniform.iter().map(|d| v_diag(d, nd as f64 * lnn * lnn)).collect(), 1.0));
    out.push(rel("V (γ=0.5, k=n²(ln n)²) relative error", half.iter().map(|d| v_diag(d, (nd as f64).powi(2) * lnn * lnn)).collect(), 1.0));
    out
}
