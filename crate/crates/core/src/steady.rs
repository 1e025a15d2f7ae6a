//! Stationary populations of the three-state rate equations.

use thiserror::Error;
use twofloat::TwoFloat;

use crate::rates::{RateMatrix, Rates3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("rate matrix is reducible: state {from} cannot reach state {to}")]
    ReducibleChain { from: usize, to: usize },
    #[error("normalized system is singular")]
    Singular,
    #[error("at least {min} jumps are required, got {got}")]
    TooFewJumps { min: u64, got: u64 },
}

/// Stationary populations `(p0, p1, p2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    pub p: [f64; 3],
    /// Low-order parts: `p[i] + p_lo[i]` carries about 32 significant digits.
    pub p_lo: [f64; 3],
    /// Max-norm residual of the rate equations, relative to the largest rate.
    pub residual: f64,
}

impl SteadyState {
    /// Populations in double-double precision.
    pub fn precise(&self) -> [TwoFloat; 3] {
        std::array::from_fn(|i| TwoFloat::new_add(self.p[i], self.p_lo[i]))
    }
}

/// Generator `W` with `W[i][j] = Γ_{ij}` (rate `j → i`) off the diagonal and
/// `W[i][i] = −Σ_j Γ_{ji}`, so that `dp/dt = W p`.
pub fn generator(total: &Rates3) -> Rates3 {
    let mut w = *total;
    for i in 0..3 {
        w[i][i] = 0.0;
        let out: f64 = (0..3).filter(|&j| j != i).map(|j| total[j][i]).sum();
        w[i][i] = -out;
    }
    w
}

/// Strong connectivity of the nonzero-rate digraph.
pub fn check_irreducible(total: &Rates3) -> Result<(), SolveError> {
    // reach[i][j]: j reachable from i
    let mut reach = [[false; 3]; 3];
    for i in 0..3 {
        reach[i][i] = true;
        for j in 0..3 {
            if i != j && total[j][i] > 0.0 {
                reach[i][j] = true;
            }
        }
    }
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                reach[i][j] |= reach[i][k] && reach[k][j];
            }
        }
    }
    for from in 0..3 {
        for to in 0..3 {
            if !reach[from][to] {
                return Err(SolveError::ReducibleChain { from, to });
            }
        }
    }
    Ok(())
}

/// Sum of the spanning trees directed into state `root`, i.e. the
/// unnormalized stationary weight of `root`.
fn tree_weight(rates: &RateMatrix, root: usize) -> TwoFloat {
    // k(a, b): rate a → b, summed over channels without rounding so that the
    // weights are stationary for exactly the per-channel rates.
    let k = |a: usize, b: usize| {
        rates.per_channel.iter().fold(TwoFloat::from(0.0), |acc, per| acc + per[b][a])
    };
    let (s, u) = ((root + 1) % 3, (root + 2) % 3);
    k(s, root) * k(u, root) + k(s, root) * k(u, s) + k(s, u) * k(u, root)
}

/// Solve `W p = 0, Σ p = 1` through the matrix-tree theorem.
///
/// Each weight is a sum of products of non-negative rates, so every
/// population keeps full relative precision however small it is. The
/// arithmetic is double-double; heat currents are formed from the same
/// extended values.
pub fn solve_steady(rates: &RateMatrix) -> Result<SteadyState, SolveError> {
    check_irreducible(&rates.total)?;
    let weights: [TwoFloat; 3] = std::array::from_fn(|r| tree_weight(rates, r));
    let norm = weights[0] + weights[1] + weights[2];
    if !(norm.hi() > 0.0 && norm.hi().is_finite()) {
        return Err(SolveError::Singular);
    }
    let precise = weights.map(|w| w / norm);
    let p = precise.map(|x| x.hi());
    let p_lo = precise.map(|x| x.lo());

    let w = generator(&rates.total);
    let scale = rates.max_rate();
    let residual = (0..3)
        .map(|i| (0..3).map(|j| w[i][j] * p[j]).sum::<f64>().abs())
        .fold(0.0, f64::max)
        / scale;
    Ok(SteadyState { p, p_lo, residual })
}

/// Net probability flux through each link of the basic cycle
/// `0 → 1 → 2 → 0`: `[F01, F12, F20]`.
pub fn cycle_fluxes(steady: &SteadyState, total: &Rates3) -> [f64; 3] {
    let p = steady.p;
    [
        total[1][0] * p[0] - total[0][1] * p[1],
        total[2][1] * p[1] - total[1][2] * p[2],
        total[0][2] * p[2] - total[2][0] * p[0],
    ]
}

/// Closed-form cycle amplitude `A` for perfectly filtered, symmetric
/// couplings `κ`, with `θ_l = ħω_l / k_B T_l`.
///
/// `A = κ (e^{θa+θb} − e^{θc}) / (2 + 2e^{θb} + e^{θc} − e^{θa+θb} − 2e^{θb+θc} − 2e^{θa+θb+θc})`.
///
/// The heat currents are `J_a = ω_a A`, `J_b = ω_b A`, `J_c = −ω_c A`. The
/// expression is evaluated after dividing through by `e^{θa+θb+θc}` so that
/// large θ (cold baths) does not overflow.
pub fn ideal_current_amplitude(theta_a: f64, theta_b: f64, theta_c: f64, kappa: f64) -> f64 {
    let sum = theta_a + theta_b + theta_c;
    let ab = theta_a + theta_b;
    let numerator = (-theta_c).exp() - (-ab).exp();
    let denominator = 2.0 * (-sum).exp() + 2.0 * (theta_b - sum).exp() + (theta_c - sum).exp()
        - (ab - sum).exp()
        - 2.0 * (theta_b + theta_c - sum).exp()
        - 2.0;
    if numerator == 0.0 {
        return 0.0;
    }
    kappa * numerator / denominator
}
