//! Distributional checks with independent oracles.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use subsim::math::{Purpose, RngStream};
use subsim::mma::{run_chain, ChainState, ComponentProposal, Prior, ProposalSpec};
use subsim::model::{analytic_intermediate_thresholds, ball_problem, linear_problem, PerformanceModel, ProblemKind};
use subsim::sss::{estimate_gamma, isolated_level, run_subset_simulation, SsConfig};

fn ks(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

fn ks_critical(n: usize) -> f64 {
    1.63 / (n as f64).sqrt()
}

/// Twenty independent streams: at alpha = 0.01 at most three rejections,
/// and the mean of sqrt(n) D near its null value 0.8687.
#[test]
fn normal_streams_pass_ks() {
    let n = 100_000;
    let phi = Normal::new(0.0, 1.0).unwrap();
    let scaled: Vec<f64> = (0..20)
        .map(|seed| {
            let mut s = RngStream::at(seed, 0, 0, Purpose::Prior);
            ks(s.sample_std_normal(n), |x| phi.cdf(x)) * (n as f64).sqrt()
        })
        .collect();
    let rejections = scaled.iter().filter(|d| **d > 1.63).count();
    let mean = scaled.iter().sum::<f64>() / scaled.len() as f64;
    assert!(rejections <= 3, "{scaled:?}");
    assert!((mean - 0.8687).abs() < 0.25, "{scaled:?}");
}

#[test]
fn benchmark_levels_have_the_stated_probabilities() {
    let n = 100_000;
    for (kind, d) in [(ProblemKind::Linear, 10), (ProblemKind::Ball, 10)] {
        let model = match kind {
            ProblemKind::Linear => linear_problem(d, 1e-3).unwrap(),
            ProblemKind::Ball => ball_problem(d, 1e-3).unwrap(),
        };
        let t = analytic_intermediate_thresholds(kind, d, 0.1, 2).unwrap();
        let mut s = RngStream::at(2, 0, 0, Purpose::Prior);
        let g: Vec<f64> = (0..n)
            .map(|_| model.evaluate(&s.sample_std_normal(d)).unwrap())
            .collect();
        for (j, tj) in t.iter().enumerate() {
            let p = 0.1f64.powi(j as i32 + 1);
            let hits = g.iter().filter(|v| *v > tj).count() as f64 / n as f64;
            let se = (p * (1.0 - p) / n as f64).sqrt();
            assert!((hits - p).abs() < 4.0 * se, "{kind:?} level {}: {hits}", j + 1);
        }
    }
}

#[test]
fn exact_conditional_samples_follow_the_tail_law() {
    let d = 5;
    let model = ball_problem(d, 1e-2).unwrap();
    let lvl = isolated_level(&model, 1, 0.1, 20_000, 4).unwrap();
    let chi = ChiSquared::new(d as f64).unwrap();
    let tail = chi.sf(lvl.condition);
    let xs: Vec<f64> = lvl.seeds.iter().map(|s| s.g).collect();
    let d_stat = ks(xs, |x| 1.0 - chi.sf(x) / tail);
    assert!(d_stat < ks_critical(20_000), "{d_stat}");
}

/// Shifted uniform `ξ ~ U(θ − 0.5, θ + 1)`: not symmetric, so the
/// acceptance ratio needs the proposal-density correction.
struct ShiftedUniform;

impl ComponentProposal for ShiftedUniform {
    fn sample(&self, center: f64, stream: &mut RngStream) -> f64 {
        center - 0.5 + 1.5 * stream.uniform()
    }
    fn density(&self, x: f64, center: f64) -> f64 {
        if (center - 0.5..=center + 1.0).contains(&x) {
            1.0 / 1.5
        } else {
            0.0
        }
    }
    fn is_symmetric(&self) -> bool {
        false
    }
}

fn truncated_normal_sample(
    proposal: &(impl ComponentProposal + ?Sized),
    chains: u64,
    steps: usize,
    seed: u64,
) -> Vec<f64> {
    let model = PerformanceModel::new("x", 1, 1.0, |t: &[f64]| t[0]).unwrap();
    let prior = Prior::standard_normal(1);
    (0..chains)
        .map(|c| {
            let mut init = RngStream::at(seed, 0, c, Purpose::ExactSeed);
            let x0 = loop {
                let z = init.std_normal();
                if z > 1.0 {
                    break z;
                }
            };
            let mut s = RngStream::at(seed, 1, c, Purpose::Proposal);
            let start = ChainState::evaluate(vec![x0], &model).unwrap();
            let (states, _) = run_chain(start, steps + 1, proposal, &prior, 1.0, &model, &mut s).unwrap();
            states.last().unwrap().g
        })
        .collect()
}

fn truncated_cdf(x: f64) -> f64 {
    let phi = Normal::new(0.0, 1.0).unwrap();
    if x <= 1.0 {
        0.0
    } else {
        1.0 - phi.sf(x) / phi.sf(1.0)
    }
}

#[test]
fn asymmetric_proposal_keeps_the_conditional_law() {
    let n = 40_000;
    let xs = truncated_normal_sample(&ShiftedUniform, n as u64, 20, 6);
    assert!(ks(xs, truncated_cdf) < ks_critical(n));
}

#[test]
fn uniform_proposal_keeps_the_conditional_law() {
    let n = 40_000;
    let xs = truncated_normal_sample(&ProposalSpec::uniform(1.5).unwrap(), n as u64, 20, 7);
    assert!(ks(xs, truncated_cdf) < ks_critical(n));
}

#[test]
fn independent_indicators_have_small_gamma() {
    let mut s = RngStream::at(8, 0, 0, Purpose::User(0));
    let ind: Vec<bool> = (0..50_000).map(|_| s.uniform() < 0.1).collect();
    let g = estimate_gamma(&ind, 5000, 10).unwrap();
    assert!(g.abs() < 0.2, "{g}");
}

#[test]
fn repeated_runs_are_close_to_the_truth() {
    let model = linear_problem(20, 1e-3).unwrap();
    let est: Vec<f64> = (0..40)
        .map(|i| {
            run_subset_simulation(&model, &SsConfig::new(0.1, 1000).with_seed(i))
                .unwrap()
                .p_hat
        })
        .collect();
    let n = est.len() as f64;
    let mean = est.iter().sum::<f64>() / n;
    let sd = (est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((mean - 1e-3).abs() < 4.0 * sd / n.sqrt(), "{mean} {sd}");
}
