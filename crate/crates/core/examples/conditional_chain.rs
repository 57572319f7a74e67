//! A single Modified Metropolis chain on a one-dimensional standard normal
//! restricted to theta > 1. The chain should reproduce the truncated law.

use subsim::math::{std_normal_sf, RngStream, Purpose};
use subsim::mma::{run_chain, ChainState, Prior, ProposalSpec};
use subsim::model::PerformanceModel;

fn main() -> subsim::Result<()> {
    let model = PerformanceModel::new("x", 1, f64::NEG_INFINITY, |t: &[f64]| t[0])?;
    let prior = Prior::standard_normal(1);
    let proposal = ProposalSpec::gaussian(1.0)?;
    let mut stream = RngStream::at(3, 1, 0, Purpose::Proposal);
    let seed = ChainState::evaluate(vec![1.5], &model)?;
    let (states, stats) = run_chain(seed, 20_000, &proposal, &prior, 1.0, &model, &mut stream)?;

    let mean = states.iter().map(|s| s.g).sum::<f64>() / states.len() as f64;
    let exact = subsim::math::std_normal_pdf(1.0) / std_normal_sf(1.0);
    println!("chain mean {mean:.4}, exact {exact:.4}");
    println!("acceptance {:.3}", stats.acceptance_rate().unwrap());
    Ok(())
}
