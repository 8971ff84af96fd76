//! Dense Hermitian-operator arithmetic on finite tensor-product Hilbert spaces.
//!
//! Tensor index convention, used everywhere in this crate: the composite index
//! is S-factor-major, `index = s * dim_b + b`, matching row-major Kronecker
//! products. Partial traces over B are therefore contiguous block sums.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative asymmetry above which construction of a [`HermitianOperator`]
/// prints a warning before symmetrizing.
pub const HERMITICITY_TOL: f64 = 1e-12;

pub type CMatrix = DMatrix<Complex64>;

/// A dense Hermitian operator. Construction symmetrizes `(op + op†)/2` so that
/// floating-point drift from repeated products cannot accumulate into the
/// spectral routines.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    entries: CMatrix,
}

/// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: DVector<f64>,
    /// Unitary matrix whose k-th column is the eigenvector of `values[k]`.
    pub vectors: CMatrix,
}

impl HermitianOperator {
    /// Wraps a square complex matrix, enforcing Hermiticity by symmetrization.
    /// Asymmetry beyond [`HERMITICITY_TOL`] (relative Frobenius) is reported on
    /// stderr; the symmetrized operator is returned either way.
    pub fn new(entries: CMatrix) -> Self {
        assert_eq!(
            entries.nrows(),
            entries.ncols(),
            "HermitianOperator requires a square matrix"
        );
        let dim = entries.nrows();
        assert!(dim >= 1, "HermitianOperator requires dim >= 1");
        let adjoint = entries.adjoint();
        let asym = (&entries - &adjoint).norm() / entries.norm().max(1.0);
        if asym > HERMITICITY_TOL {
            eprintln!("warning: symmetrizing operator with relative asymmetry {asym:.3e}");
        }
        let entries = (entries + adjoint).scale(0.5);
        Self { dim, entries }
    }

    /// Builds from a real matrix (symmetrized like [`Self::new`]).
    pub fn from_real(entries: &DMatrix<f64>) -> Self {
        Self::new(entries.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = CMatrix::zeros(dim, dim);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        Self { dim, entries: m }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            entries: CMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: CMatrix::zeros(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn into_matrix(self) -> CMatrix {
        self.entries
    }

    /// Real trace (the imaginary part of a Hermitian trace is zero).
    pub fn trace(&self) -> f64 {
        self.entries.trace().re
    }

    /// `Re tr(self · other)`, the Hilbert-Schmidt pairing of two Hermitian
    /// operators (always real).
    pub fn pairing(&self, other: &HermitianOperator) -> f64 {
        pairing(&self.entries, &other.entries)
    }

    /// Frobenius norm.
    pub fn frobenius_norm(&self) -> f64 {
        self.entries.norm()
    }

    /// Hermitian eigendecomposition with eigenvalues sorted ascending.
    pub fn eigen(&self) -> Eigen {
        let se = self.entries.clone().symmetric_eigen();
        let n = self.dim;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
        let values = DVector::from_iterator(n, order.iter().map(|&i| se.eigenvalues[i]));
        let mut vectors = CMatrix::zeros(n, n);
        for (k, &i) in order.iter().enumerate() {
            vectors.set_column(k, &se.eigenvectors.column(i));
        }
        Eigen { values, vectors }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.scale(factor),
        }
    }

    /// `self + factor · 1`.
    pub fn shift(&self, factor: f64) -> Self {
        let mut entries = self.entries.clone();
        for i in 0..self.dim {
            entries[(i, i)] += Complex64::new(factor, 0.0);
        }
        Self {
            dim: self.dim,
            entries,
        }
    }

    /// Traceless part, `self - (tr/dim) · 1`.
    pub fn traceless(&self) -> Self {
        self.shift(-self.trace() / self.dim as f64)
    }
}

impl std::ops::Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.dim, rhs.dim, "operator dimensions differ");
        HermitianOperator {
            dim: self.dim,
            entries: &self.entries + &rhs.entries,
        }
    }
}

impl std::ops::Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: &HermitianOperator) -> HermitianOperator {
        assert_eq!(self.dim, rhs.dim, "operator dimensions differ");
        HermitianOperator {
            dim: self.dim,
            entries: &self.entries - &rhs.entries,
        }
    }
}

/// `Re tr(a · b)` for two Hermitian matrices, computed without forming the
/// product matrix.
pub fn pairing(a: &CMatrix, b: &CMatrix) -> f64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    acc
}

/// Which tensor factor an operator lives on (or is kept by a partial trace).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    S,
    B,
}

/// A bipartite system S⊗B with local Hamiltonians, an interaction `v`, and a
/// dimensionless coupling strength `g`. The full Hamiltonian while coupled is
/// `h_s⊗1 + 1⊗h_b + g·v`.
#[derive(Debug, Clone)]
pub struct CompositeSystem {
    pub dim_s: usize,
    pub dim_b: usize,
    pub h_s: HermitianOperator,
    pub h_b: HermitianOperator,
    pub v: HermitianOperator,
    pub g: f64,
}

impl CompositeSystem {
    pub fn new(
        h_s: HermitianOperator,
        h_b: HermitianOperator,
        v: HermitianOperator,
        g: f64,
    ) -> Result<Self> {
        let dim_s = h_s.dim();
        let dim_b = h_b.dim();
        if v.dim() != dim_s * dim_b {
            return Err(Error::DimensionMismatch {
                context: "CompositeSystem interaction",
                expected: dim_s * dim_b,
                found: v.dim(),
            });
        }
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "g",
                reason: format!("coupling strength must be finite and >= 0, got {g}"),
            });
        }
        Ok(Self {
            dim_s,
            dim_b,
            h_s,
            h_b,
            v,
            g,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim_s * self.dim_b
    }

    /// `h_s⊗1 + 1⊗h_b` (interaction off).
    pub fn decoupled_hamiltonian(&self) -> HermitianOperator {
        let hs = embed(&self.h_s, Side::S, self).expect("h_s dimension checked at construction");
        let hb = embed(&self.h_b, Side::B, self).expect("h_b dimension checked at construction");
        &hs + &hb
    }

    /// `h_s⊗1 + 1⊗h_b + g·v` (interaction on).
    pub fn coupled_hamiltonian(&self) -> HermitianOperator {
        &self.decoupled_hamiltonian() + &self.v.scale(self.g)
    }

    /// Same system with a replaced system Hamiltonian.
    pub fn with_h_s(&self, h_s: HermitianOperator) -> Self {
        assert_eq!(h_s.dim(), self.dim_s, "replacement h_s has wrong dimension");
        Self {
            h_s,
            ..self.clone()
        }
    }

    /// Same system with a replaced coupling strength.
    pub fn with_g(&self, g: f64) -> Self {
        assert!(g >= 0.0 && g.is_finite());
        Self { g, ..self.clone() }
    }
}

/// Lifts a local operator to the full space: `op⊗1` for [`Side::S`], `1⊗op`
/// for [`Side::B`].
pub fn embed(
    op: &HermitianOperator,
    side: Side,
    sys: &CompositeSystem,
) -> Result<HermitianOperator> {
    let (expected, result) = match side {
        Side::S => (
            sys.dim_s,
            op.matrix()
                .kronecker(&CMatrix::identity(sys.dim_b, sys.dim_b)),
        ),
        Side::B => (
            sys.dim_b,
            CMatrix::identity(sys.dim_s, sys.dim_s).kronecker(op.matrix()),
        ),
    };
    if op.dim() != expected {
        return Err(Error::DimensionMismatch {
            context: "embed",
            expected,
            found: op.dim(),
        });
    }
    Ok(HermitianOperator {
        dim: sys.dim(),
        entries: result,
    })
}

/// Partial trace of a full-space operator, keeping the requested factor.
/// Linear, trace-preserving, and Hermiticity-preserving.
pub fn partial_trace(
    op: &HermitianOperator,
    keep: Side,
    dim_s: usize,
    dim_b: usize,
) -> Result<HermitianOperator> {
    if op.dim() != dim_s * dim_b {
        return Err(Error::DimensionMismatch {
            context: "partial_trace",
            expected: dim_s * dim_b,
            found: op.dim(),
        });
    }
    Ok(HermitianOperator::new(partial_trace_matrix(
        op.matrix(),
        keep,
        dim_s,
        dim_b,
    )))
}

/// Partial trace of a raw (not necessarily Hermitian) full-space matrix.
/// Callers are responsible for the dimension check.
pub(crate) fn partial_trace_matrix(
    m: &CMatrix,
    keep: Side,
    dim_s: usize,
    dim_b: usize,
) -> CMatrix {
    match keep {
        Side::S => {
            let mut out = CMatrix::zeros(dim_s, dim_s);
            for s in 0..dim_s {
                for sp in 0..dim_s {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for b in 0..dim_b {
                        acc += m[(s * dim_b + b, sp * dim_b + b)];
                    }
                    out[(s, sp)] = acc;
                }
            }
            out
        }
        Side::B => {
            let mut out = CMatrix::zeros(dim_b, dim_b);
            for b in 0..dim_b {
                for bp in 0..dim_b {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for s in 0..dim_s {
                        acc += m[(s * dim_b + b, s * dim_b + bp)];
                    }
                    out[(b, bp)] = acc;
                }
            }
            out
        }
    }
}

/// Spectral functions applied through the eigendecomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MatrixFunction {
    Exp,
    Log,
    /// Real matrix power `op^p` (requires a strictly positive spectrum for
    /// non-integer `p`).
    Power(f64),
}

/// Applies `f` to the eigenvalues of `op` in its eigenbasis. The systems
/// handled here stay below dimension ~200, where the full eigendecomposition
/// is both cheap and unconditionally accurate.
pub fn matrix_function(op: &HermitianOperator, f: MatrixFunction) -> Result<HermitianOperator> {
    let eig = op.eigen();
    let min = eig.values[0];
    let mapped: Vec<f64> = match f {
        MatrixFunction::Exp => eig.values.iter().map(|&x| x.exp()).collect(),
        MatrixFunction::Log => {
            if min <= 0.0 {
                return Err(Error::NonPositiveSpectrum {
                    min_eigenvalue: min,
                });
            }
            eig.values.iter().map(|&x| x.ln()).collect()
        }
        MatrixFunction::Power(p) => {
            if min <= 0.0 && p.fract() != 0.0 {
                return Err(Error::NonPositiveSpectrum {
                    min_eigenvalue: min,
                });
            }
            eig.values.iter().map(|&x| x.powf(p)).collect()
        }
    };
    Ok(reassemble(&eig.vectors, &mapped))
}

/// Rebuilds `U diag(values) U†` as a Hermitian operator.
pub fn reassemble(vectors: &CMatrix, values: &[f64]) -> HermitianOperator {
    let n = vectors.nrows();
    let mut scaled = vectors.clone();
    for (k, &v) in values.iter().enumerate() {
        let mut col = scaled.column_mut(k);
        col *= Complex64::new(v, 0.0);
    }
    let entries = &scaled * vectors.adjoint();
    // Exactly Hermitian up to roundoff; symmetrize without the warning path.
    let entries = (&entries + entries.adjoint()).scale(0.5);
    HermitianOperator { dim: n, entries }
}

/// Operator norm of a Hermitian operator: the largest `|eigenvalue|`.
pub fn operator_norm(op: &HermitianOperator) -> f64 {
    let eig = op.eigen();
    eig.values
        .iter()
        .fold(0.0f64, |acc, &x| acc.max(x.abs()))
}

/// `‖[a, b]‖` for Hermitian `a`, `b`. The commutator is anti-Hermitian, so the
/// norm is taken through the Hermitian operator `i[a, b]`.
pub fn commutator_norm(a: &HermitianOperator, b: &HermitianOperator) -> f64 {
    assert_eq!(a.dim(), b.dim(), "operator dimensions differ");
    let c = a.matrix() * b.matrix() - b.matrix() * a.matrix();
    let herm = c.map(|z| z * Complex64::new(0.0, 1.0));
    operator_norm(&HermitianOperator::new(herm))
}
