//! Thermal-state functionals: Gibbs states, free energies, entropies, mutual
//! information, the imaginary-time average map, and the generalized
//! (Kubo-Mori) covariance.
//!
//! Units: k_B = 1 and hbar = 1, entropies in nats, temperatures in energy
//! units (T = 1/beta).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::{pairing, partial_trace, CMatrix, HermitianOperator, Side};

/// Eigenvalues of a reference state below this floor count as outside its
/// support; distinguishes genuine divergence from roundoff.
pub const SUPPORT_FLOOR: f64 = 1e-14;

/// Relative eigenvalue-gap threshold below which the imaginary-time filter
/// takes its analytic limit value 1 (removable singularity).
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Inverse temperature of the single shared bath, `beta > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalContext {
    beta: f64,
}

impl ThermalContext {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "beta",
                reason: format!("inverse temperature must be finite and > 0, got {beta}"),
            });
        }
        Ok(Self { beta })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }
}

/// Energy, entropy and free energy of a state against a Hamiltonian, plus the
/// log-partition function of that Hamiltonian at the same temperature.
/// `free_energy - (-partition_log / beta)` is the extractable free-energy
/// surplus `T·S(rho‖omega_beta(H))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeEnergyReport {
    pub energy: f64,
    pub entropy: f64,
    pub free_energy: f64,
    pub partition_log: f64,
}

/// `omega_beta(H) = exp(-beta H) / tr(exp(-beta H))`, computed in the
/// eigenbasis with the spectrum shifted by its minimum so that no exponential
/// overflows.
pub fn gibbs_state(h: &HermitianOperator, ctx: &ThermalContext) -> HermitianOperator {
    let eig = h.eigen();
    let min = eig.values[0];
    let weights: Vec<f64> = eig
        .values
        .iter()
        .map(|&e| (-ctx.beta() * (e - min)).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let probs: Vec<f64> = weights.iter().map(|w| w / z).collect();
    crate::operators::reassemble(&eig.vectors, &probs)
}

/// `ln tr(exp(-beta H))`, overflow-guarded like [`gibbs_state`].
pub fn partition_log(h: &HermitianOperator, ctx: &ThermalContext) -> f64 {
    let eig = h.eigen();
    let min = eig.values[0];
    let sum: f64 = eig
        .values
        .iter()
        .map(|&e| (-ctx.beta() * (e - min)).exp())
        .sum();
    sum.ln() - ctx.beta() * min
}

/// Equilibrium free energy `-T ln Z` of `h`.
pub fn equilibrium_free_energy(h: &HermitianOperator, ctx: &ThermalContext) -> f64 {
    -ctx.temperature() * partition_log(h, ctx)
}

/// Von Neumann entropy `-tr(rho ln rho)` in nats. Eigenvalues at or below the
/// support floor contribute zero (the `p ln p -> 0` limit).
pub fn von_neumann_entropy(rho: &HermitianOperator) -> f64 {
    let eig = rho.eigen();
    -eig.values
        .iter()
        .filter(|&&p| p > SUPPORT_FLOOR)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Free-energy bookkeeping `F(rho, H) = tr(rho H) - T S(rho)` for an arbitrary
/// state, together with the log-partition function of `h`.
pub fn free_energy_report(
    rho: &HermitianOperator,
    h: &HermitianOperator,
    ctx: &ThermalContext,
) -> FreeEnergyReport {
    let energy = rho.pairing(h);
    let entropy = von_neumann_entropy(rho);
    FreeEnergyReport {
        energy,
        entropy,
        free_energy: energy - entropy / ctx.beta(),
        partition_log: partition_log(h, ctx),
    }
}

/// `F(rho, H)` alone.
pub fn free_energy(rho: &HermitianOperator, h: &HermitianOperator, ctx: &ThermalContext) -> f64 {
    rho.pairing(h) - von_neumann_entropy(rho) / ctx.beta()
}

/// Quantum relative entropy `S(rho‖sigma) = tr(rho (ln rho - ln sigma))`.
///
/// Returns `+∞` when `rho` carries more than negligible weight outside the
/// support of `sigma` (eigenvalues of `sigma` below [`SUPPORT_FLOOR`]).
/// Small negative roundoff is clamped to zero.
pub fn relative_entropy(rho: &HermitianOperator, sigma: &HermitianOperator) -> f64 {
    assert_eq!(rho.dim(), sigma.dim(), "state dimensions differ");
    let eig_s = sigma.eigen();

    // Weight of rho on sigma's deficient directions decides divergence.
    let mut escaped = 0.0;
    for (j, &q) in eig_s.values.iter().enumerate() {
        if q <= SUPPORT_FLOOR {
            let v = eig_s.vectors.column(j);
            let overlap = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
            escaped += overlap.max(0.0);
        }
    }
    if escaped > 1e-12 {
        return f64::INFINITY;
    }

    let log_q: Vec<f64> = eig_s
        .values
        .iter()
        .map(|&q| q.max(SUPPORT_FLOOR).ln())
        .collect();
    let log_sigma = crate::operators::reassemble(&eig_s.vectors, &log_q);

    let eig_r = rho.eigen();
    let tr_rho_log_rho: f64 = eig_r
        .values
        .iter()
        .filter(|&&p| p > SUPPORT_FLOOR)
        .map(|&p| p * p.ln())
        .sum();

    let value = tr_rho_log_rho - rho.pairing(&log_sigma);
    if value > -1e-12 && value < 0.0 {
        0.0
    } else {
        value
    }
}

/// Mutual information `I(S:B) = S(rho_S) + S(rho_B) - S(rho_SB)` of a
/// bipartite state, in nats.
pub fn mutual_information(
    rho_sb: &HermitianOperator,
    dim_s: usize,
    dim_b: usize,
) -> Result<f64> {
    let rho_s = partial_trace(rho_sb, Side::S, dim_s, dim_b)?;
    let rho_b = partial_trace(rho_sb, Side::B, dim_s, dim_b)?;
    let i = von_neumann_entropy(&rho_s) + von_neumann_entropy(&rho_b)
        - von_neumann_entropy(rho_sb);
    Ok(if i > -1e-12 && i < 0.0 { 0.0 } else { i })
}

/// The filter `(e^x - 1)/x` with its removable singularity at `x = 0`.
fn phi(x: f64) -> f64 {
    if x.abs() < 1e-14 {
        1.0
    } else {
        x.exp_m1() / x
    }
}

/// Imaginary-time average `Y_{H,beta} = ∫_0^1 dτ e^{beta τ H} Y e^{-beta τ H}`.
///
/// Computed exactly in the eigenbasis of `h`: element `(j,k)` of `Y` is
/// multiplied by `(e^{beta(E_j - E_k)} - 1)/(beta(E_j - E_k))`, with the limit
/// value 1 whenever `|E_j - E_k|` falls below [`DEGENERACY_TOL`]·max|E|.
///
/// The result is generally *not* Hermitian (the integrand is a non-unitary
/// similarity transform), so a raw complex matrix is returned.
pub fn kubo_mori_map(
    y: &HermitianOperator,
    h: &HermitianOperator,
    ctx: &ThermalContext,
) -> CMatrix {
    assert_eq!(y.dim(), h.dim(), "operator dimensions differ");
    let eig = h.eigen();
    let scale = eig.values[0].abs().max(eig.values[eig.values.len() - 1].abs());
    let gap_tol = DEGENERACY_TOL * scale.max(1e-300);
    let y_tilde = eig.vectors.adjoint() * y.matrix() * &eig.vectors;
    let n = y.dim();
    let mut filtered = y_tilde;
    for j in 0..n {
        for k in 0..n {
            let gap = eig.values[j] - eig.values[k];
            let f = if gap.abs() < gap_tol {
                1.0
            } else {
                phi(ctx.beta() * gap)
            };
            filtered[(j, k)] *= Complex64::new(f, 0.0);
        }
    }
    &eig.vectors * filtered * eig.vectors.adjoint()
}

/// Generalized (Kubo-Mori) covariance of two observables in the thermal state
/// of `h`:
/// `cov(A,B) = tr(omega A_{H,beta} B) - tr(omega A) tr(omega B)`.
///
/// Symmetric in `(a, b)`; `cov(a, a) >= 0`; vanishes when either argument is
/// a multiple of the identity.
pub fn generalized_covariance(
    a: &HermitianOperator,
    b: &HermitianOperator,
    h: &HermitianOperator,
    ctx: &ThermalContext,
) -> f64 {
    assert_eq!(a.dim(), h.dim(), "operator dimensions differ");
    assert_eq!(b.dim(), h.dim(), "operator dimensions differ");
    let eig = h.eigen();
    let n = h.dim();
    let beta = ctx.beta();
    let min = eig.values[0];
    let weights: Vec<f64> = eig
        .values
        .iter()
        .map(|&e| (-beta * (e - min)).exp())
        .collect();
    let z: f64 = weights.iter().sum();
    let scale = eig.values[0].abs().max(eig.values[n - 1].abs());
    let gap_tol = DEGENERACY_TOL * scale.max(1e-300);

    let a_tilde = eig.vectors.adjoint() * a.matrix() * &eig.vectors;
    let b_tilde = eig.vectors.adjoint() * b.matrix() * &eig.vectors;

    let mut cross = 0.0;
    for j in 0..n {
        for k in 0..n {
            let gap = eig.values[j] - eig.values[k];
            let f = if gap.abs() < gap_tol {
                1.0
            } else {
                phi(beta * gap)
            };
            // s_jk = w_j/Z · phi(beta(E_j - E_k)) is symmetric and positive.
            let s = weights[j] / z * f;
            cross += s * (a_tilde[(j, k)] * b_tilde[(k, j)]).re;
        }
    }
    let mean_a: f64 = (0..n).map(|j| weights[j] / z * a_tilde[(j, j)].re).sum();
    let mean_b: f64 = (0..n).map(|j| weights[j] / z * b_tilde[(j, j)].re).sum();
    cross - mean_a * mean_b
}

/// Asymmetry gap of the relative entropy between thermal states along a
/// Hamiltonian ray: `Δ_t = S(ω(h0)‖ω(h0 + t·dir)) - S(ω(h0 + t·dir)‖ω(h0))`.
/// Vanishes to third order in `t`.
pub fn lemma1_gap(
    h0: &HermitianOperator,
    direction: &HermitianOperator,
    t: f64,
    ctx: &ThermalContext,
) -> f64 {
    let ht = h0 + &direction.scale(t);
    let w0 = gibbs_state(h0, ctx);
    let wt = gibbs_state(&ht, ctx);
    relative_entropy(&w0, &wt) - relative_entropy(&wt, &w0)
}

/// `tr(rho h)` for a raw density matrix against a Hermitian operator.
pub fn expectation(rho: &CMatrix, h: &HermitianOperator) -> f64 {
    pairing(rho, h.matrix())
}

/// `T·S(rho‖omega_beta(h))`: the free-energy surplus of `rho` over the thermal
/// state of `h` (always >= 0 where finite).
pub fn free_energy_surplus(
    rho: &HermitianOperator,
    h: &HermitianOperator,
    ctx: &ThermalContext,
) -> f64 {
    free_energy(rho, h, ctx) - equilibrium_free_energy(h, ctx)
}
