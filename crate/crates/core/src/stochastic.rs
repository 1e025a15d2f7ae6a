//! Continuous-time jump-process estimator for populations and heat currents.
//!
//! Used as an independent check on the linear solve: it never forms the
//! generator, only samples jumps channel by channel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rates::RateMatrix;
use crate::spectrum::QutritSpectrum;
use crate::steady::{check_irreducible, SolveError};

pub const MIN_JUMPS: u64 = 10_000;
const BATCHES: u64 = 100;
const BURN_IN: u64 = 1_000;

/// Time-averaged estimates with batch-means standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticEstimate {
    pub p_hat: [f64; 3],
    pub sigma_p: [f64; 3],
    /// Heat out of each channel's bath per unit time, same sign convention as
    /// [`crate::transport::HeatCurrents`].
    pub j_hat: [f64; 3],
    pub sigma_j: [f64; 3],
    pub n_jumps: u64,
    pub seed: u64,
}

#[derive(Default, Clone, Copy)]
struct Batch {
    time: f64,
    occupation: [f64; 3],
    energy: [f64; 3],
}

/// Ratio estimate `Σy / Σt` and its delta-method standard error over batches.
fn ratio_with_error(batches: &[Batch], pick: impl Fn(&Batch) -> f64) -> (f64, f64) {
    let total_t: f64 = batches.iter().map(|b| b.time).sum();
    let total_y: f64 = batches.iter().map(&pick).sum();
    let r = total_y / total_t;
    let k = batches.len() as f64;
    let mean_t = total_t / k;
    let ss: f64 = batches
        .iter()
        .map(|b| {
            let d = pick(b) - r * b.time;
            d * d
        })
        .sum();
    let var = ss / (k * (k - 1.0)) / (mean_t * mean_t);
    (r, var.sqrt())
}

/// Simulate `n_jumps` transitions of the jump process defined by `rates`.
///
/// Every jump `i → j` caused by channel `l` deposits `E_j − E_i` into the
/// energy drawn from bath `l`. The run is split into 100 equal batches of
/// jumps for the error estimate, after a short burn-in from the ground state.
pub fn gillespie_estimate(
    rates: &RateMatrix,
    spectrum: &QutritSpectrum,
    n_jumps: u64,
    seed: u64,
) -> Result<StochasticEstimate, SolveError> {
    if n_jumps < MIN_JUMPS {
        return Err(SolveError::TooFewJumps { min: MIN_JUMPS, got: n_jumps });
    }
    check_irreducible(&rates.total)?;

    let energies = spectrum.energies();
    // Outgoing events per state: (channel, target, rate).
    let mut events: [Vec<(usize, usize, f64)>; 3] = Default::default();
    let mut exit_rate = [0.0; 3];
    for i in 0..3 {
        for (l, per) in rates.per_channel.iter().enumerate() {
            for j in 0..3 {
                if j != i && per[j][i] > 0.0 {
                    events[i].push((l, j, per[j][i]));
                    exit_rate[i] += per[j][i];
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = 0usize;
    let step = |state: usize, rng: &mut ChaCha8Rng| -> (f64, usize, usize) {
        // 1 - u lies in (0, 1], so the log is finite.
        let u: f64 = rng.random();
        let dwell = -(1.0 - u).ln() / exit_rate[state];
        let mut target = rng.random::<f64>() * exit_rate[state];
        let list = &events[state];
        let mut chosen = list[list.len() - 1];
        for &ev in list {
            if target < ev.2 {
                chosen = ev;
                break;
            }
            target -= ev.2;
        }
        (dwell, chosen.0, chosen.1)
    };

    for _ in 0..BURN_IN {
        let (_, _, next) = step(state, &mut rng);
        state = next;
    }

    let per_batch = n_jumps / BATCHES;
    let mut batches = vec![Batch::default(); BATCHES as usize];
    for batch in batches.iter_mut() {
        for _ in 0..per_batch {
            let (dwell, channel, next) = step(state, &mut rng);
            batch.time += dwell;
            batch.occupation[state] += dwell;
            batch.energy[channel] += energies[next] - energies[state];
            state = next;
        }
    }

    let mut est = StochasticEstimate {
        p_hat: [0.0; 3],
        sigma_p: [0.0; 3],
        j_hat: [0.0; 3],
        sigma_j: [0.0; 3],
        n_jumps: per_batch * BATCHES,
        seed,
    };
    for k in 0..3 {
        (est.p_hat[k], est.sigma_p[k]) = ratio_with_error(&batches, |b| b.occupation[k]);
        (est.j_hat[k], est.sigma_j[k]) = ratio_with_error(&batches, |b| b.energy[k]);
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::{assemble_rate_matrix, BathChannel, Channel};
    use crate::spectrum::{derive_spectrum, CircuitParams};
    use std::f64::consts::PI;

    fn setup(temps: [f64; 3]) -> (RateMatrix, QutritSpectrum) {
        let s = derive_spectrum(&CircuitParams::new(5.0, 0.5, PI / 2.0).unwrap()).unwrap();
        let chans: Vec<BathChannel> = Channel::ALL
            .iter()
            .map(|&c| BathChannel {
                id: c,
                omega: c.resonant_transition().frequency(&s),
                q: 100.0,
                lambda_res: 1.0,
                lambda_off: 1.0,
                temperature: temps[c.index()],
                bath: c,
            })
            .collect();
        (assemble_rate_matrix(&s, &chans).unwrap(), s)
    }

    #[test]
    fn too_few_jumps() {
        let (r, s) = setup([1.0; 3]);
        assert_eq!(
            gillespie_estimate(&r, &s, 10, 1),
            Err(SolveError::TooFewJumps { min: MIN_JUMPS, got: 10 })
        );
    }

    #[test]
    fn deterministic_per_seed() {
        let (r, s) = setup([2.5, 1.5, 2.0]);
        let a = gillespie_estimate(&r, &s, 20_000, 42).unwrap();
        let b = gillespie_estimate(&r, &s, 20_000, 42).unwrap();
        let c = gillespie_estimate(&r, &s, 20_000, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.p_hat, c.p_hat);
    }

    #[test]
    fn populations_sum_to_one_and_sigmas_positive() {
        let (r, s) = setup([2.5, 1.5, 2.0]);
        let e = gillespie_estimate(&r, &s, 20_000, 7).unwrap();
        assert!((e.p_hat.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(e.sigma_p.iter().chain(e.sigma_j.iter()).all(|&x| x > 0.0));
    }

    #[test]
    fn reducible_rejected() {
        let (r, s) = setup([0.0; 3]);
        assert!(matches!(
            gillespie_estimate(&r, &s, 20_000, 1),
            Err(SolveError::ReducibleChain { .. })
        ));
    }
}
