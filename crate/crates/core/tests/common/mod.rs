//! Shared oracle helpers for the integration tests. Every routine here takes
//! an independent numerical route from the library implementation it checks
//! (Taylor series instead of eigendecompositions, quadrature instead of
//! closed-form filters, explicit double sums instead of matrix logs).

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sctherm::{CMatrix, HermitianOperator};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn sigma_x() -> HermitianOperator {
    HermitianOperator::from_real(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]))
}

pub fn sigma_y() -> HermitianOperator {
    HermitianOperator::new(CMatrix::from_row_slice(
        2,
        2,
        &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
    ))
}

pub fn sigma_z() -> HermitianOperator {
    HermitianOperator::from_diagonal(&[1.0, -1.0])
}

/// Dense complex Kronecker product, independent of the library's embedding.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Random Hermitian operator with entries of magnitude ~`scale`.
pub fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> HermitianOperator {
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = c(rng.gen_range(-scale..scale), 0.0);
        for j in (i + 1)..dim {
            let z = c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    HermitianOperator::new(m)
}

/// Random full-rank density operator via a Ginibre-style square root.
pub fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> HermitianOperator {
    let mut g = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            g[(i, j)] = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    let p = &g * g.adjoint() + CMatrix::identity(dim, dim).scale(1e-3);
    let tr: Complex64 = p.diagonal().sum();
    HermitianOperator::new(p / tr)
}

/// Matrix exponential by scaling and squaring of a Taylor series. Deliberately
/// avoids any eigendecomposition so it can vouch for the library's
/// spectral-calculus route.
pub fn expm_series(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let norm = m
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max)
        * n as f64;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m / c(2f64.powi(squarings as i32), 0.0);
    let mut term = CMatrix::identity(n, n);
    let mut sum = CMatrix::identity(n, n);
    for k in 1..200 {
        term = &term * &scaled / c(k as f64, 0.0);
        sum += &term;
        if term.iter().map(|z| z.norm()).sum::<f64>() < 1e-18 {
            break;
        }
    }
    let mut result = sum;
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Thermal state by series exponential: `e^{-beta h} / tr`, spectrum-shifted
/// by the largest diagonal entry for overflow safety.
pub fn gibbs_series(h: &HermitianOperator, beta: f64) -> CMatrix {
    let n = h.dim();
    let shift = h
        .matrix()
        .diagonal()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let shifted = h.matrix() - CMatrix::identity(n, n).scale(shift);
    let e = expm_series(&(shifted.scale(-beta)));
    let tr: Complex64 = e.diagonal().sum();
    e / tr
}

/// Composite-Simpson quadrature of the imaginary-time average
/// `∫_0^1 dτ e^{beta τ h} y e^{-beta τ h}` with `panels` subintervals (must
/// be even), each exponential evaluated by the series route. Fourth-order
/// accurate, so 200 panels resolve qubit-scale integrands to ~1e-10.
pub fn km_quadrature(
    y: &HermitianOperator,
    h: &HermitianOperator,
    beta: f64,
    panels: usize,
) -> CMatrix {
    assert!(panels % 2 == 0, "Simpson rule needs an even panel count");
    let n = y.dim();
    let mut acc = CMatrix::zeros(n, n);
    for i in 0..=panels {
        let tau = i as f64 / panels as f64;
        let left = expm_series(&h.matrix().scale(beta * tau));
        let right = expm_series(&h.matrix().scale(-beta * tau));
        let term = &left * y.matrix() * &right;
        let weight = if i == 0 || i == panels {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += term.scale(weight);
    }
    acc / c(3.0 * panels as f64, 0.0)
}

/// Relative entropy by explicit double-sum eigen-expansion:
/// `Σ_i p_i ln p_i − Σ_{ij} |⟨u_i|v_j⟩|² p_i ln q_j`.
pub fn relative_entropy_expansion(rho: &HermitianOperator, sigma: &HermitianOperator) -> f64 {
    let er = rho.eigen();
    let es = sigma.eigen();
    let n = rho.dim();
    let mut total = 0.0;
    for i in 0..n {
        let p = er.values[i];
        if p <= 1e-14 {
            continue;
        }
        total += p * p.ln();
        for j in 0..n {
            let overlap = (er.vectors.column(i).adjoint() * es.vectors.column(j))[(0, 0)]
                .norm_sqr();
            total -= overlap * p * es.values[j].max(1e-300).ln();
        }
    }
    total
}

/// Least-squares slope and R² of `ys` against `xs`.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, r2)
}

/// Slope of `ln |ys|` against `ln xs`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.abs().ln()).collect();
    fit_slope(&lx, &ly).0
}

/// Central finite difference of a scalar function.
pub fn central_diff(f: impl Fn(f64) -> f64, x0: f64, step: f64) -> f64 {
    (f(x0 + step) - f(x0 - step)) / (2.0 * step)
}

/// Max entrywise modulus distance between two complex matrices.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Frobenius distance between two complex matrices.
pub fn frob_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm()
}

/// Two-qubit interacting testbed shared across test files: qubit system and
/// qubit bath with `h = sigma_z/2` on each side and `v = sigma_x ⊗ sigma_x`.
pub fn qubit_testbed(g: f64) -> sctherm::CompositeSystem {
    sctherm::CompositeSystem::new(
        sigma_z().scale(0.5),
        sigma_z().scale(0.5),
        HermitianOperator::new(kron(sigma_x().matrix(), sigma_x().matrix())),
        g,
    )
    .expect("testbed dimensions are consistent")
}

/// Random traceless Hermitian operator (useful as a quench direction).
pub fn random_traceless(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> HermitianOperator {
    random_hermitian(rng, dim, scale).traceless()
}

/// Uniform probability simplex sample of length `n` (for diagonal states).
pub fn random_probs(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -f64::ln(rng.gen_range(1e-12..1.0))).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / s).collect()
}

/// Sorted copy of a vector of eigenvalues.
pub fn sorted(v: &DVector<f64>) -> Vec<f64> {
    let mut out: Vec<f64> = v.iter().copied().collect();
    out.sort_by(f64::total_cmp);
    out
}
