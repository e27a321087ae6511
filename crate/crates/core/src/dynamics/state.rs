use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::{hermitian_eigen_tol, CMatrix, Tolerances, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    Computational,
    Eigen,
}

impl Basis {
    pub fn name(self) -> &'static str {
        match self {
            Basis::Computational => "computational",
            Basis::Eigen => "eigen",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Deviations of a matrix from the density-matrix invariants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateReport {
    pub trace_error: f64,
    pub hermiticity: f64,
    pub min_eigenvalue: f64,
}

impl StateReport {
    pub fn of(m: &CMatrix) -> Self {
        let hermiticity = m.hermiticity_defect();
        // eigenvalues of the Hermitian part; the anti-Hermitian residue is
        // reported separately
        let sym = CMatrix::from_fn(m.dim(), |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
        let min_eigenvalue = hermitian_eigen_tol(&sym, f64::INFINITY)
            .map(|e| e.values[0])
            .unwrap_or(f64::NEG_INFINITY);
        Self { trace_error: (m.trace() - C64::new(1.0, 0.0)).norm(), hermiticity, min_eigenvalue }
    }

    pub fn satisfies(&self, tol: &Tolerances) -> bool {
        self.trace_error <= tol.trace && self.hermiticity <= tol.hermiticity && self.min_eigenvalue >= tol.positivity
    }
}

/// Two-qubit state with a declared basis.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
    basis: Basis,
}

impl DensityMatrix {
    pub fn new(m: CMatrix, basis: Basis) -> Result<Self> {
        Self::new_with(m, basis, &Tolerances::default())
    }

    pub fn new_with(m: CMatrix, basis: Basis, tol: &Tolerances) -> Result<Self> {
        if m.dim() != 4 {
            return Err(Error::InvalidState(format!("expected 4x4, got {}x{}", m.dim(), m.dim())));
        }
        if !m.is_finite() {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let report = StateReport::of(&m);
        if !report.satisfies(tol) {
            return Err(Error::InvalidState(format!(
                "trace error {:.2e}, hermiticity {:.2e}, min eigenvalue {:.2e}",
                report.trace_error, report.hermiticity, report.min_eigenvalue
            )));
        }
        Ok(Self { m, basis })
    }

    /// |ψ⟩⟨ψ| for a normalized ket.
    pub fn pure(ket: &[C64], basis: Basis) -> Result<Self> {
        if ket.len() != 4 {
            return Err(Error::InvalidState(format!("ket needs 4 amplitudes, got {}", ket.len())));
        }
        let norm: f64 = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("ket norm {norm} is not 1")));
        }
        Self::new(CMatrix::outer(ket, ket), basis)
    }

    /// Diagonal state with the given populations.
    pub fn diagonal(pops: [f64; 4], basis: Basis) -> Result<Self> {
        Self::new(CMatrix::diag_real(&pops), basis)
    }

    pub(crate) fn from_matrix_unchecked(m: CMatrix, basis: Basis) -> Self {
        Self { m, basis }
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn expect_basis(&self, want: Basis) -> Result<()> {
        if self.basis == want {
            Ok(())
        } else {
            Err(Error::BasisMismatch { expected: want.name(), found: self.basis.name() })
        }
    }

    /// Real parts of the diagonal.
    pub fn populations(&self) -> [f64; 4] {
        [self.m[(0, 0)].re, self.m[(1, 1)].re, self.m[(2, 2)].re, self.m[(3, 3)].re]
    }

    pub fn report(&self) -> StateReport {
        StateReport::of(&self.m)
    }
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DensityMatrix[{}] {:?}", self.basis, self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::ONE;

    #[test]
    fn accepts_valid_and_rejects_invalid() {
        assert!(DensityMatrix::diagonal([0.25; 4], Basis::Computational).is_ok());
        assert!(DensityMatrix::diagonal([0.5, 0.5, 0.5, 0.0], Basis::Computational).is_err());
        assert!(DensityMatrix::diagonal([1.1, -0.1, 0.0, 0.0], Basis::Computational).is_err());
        let mut m = CMatrix::diag_real(&[0.5, 0.5, 0.0, 0.0]);
        m[(0, 1)] = C64::new(0.0, 0.1);
        assert!(DensityMatrix::new(m, Basis::Eigen).is_err());
        assert!(DensityMatrix::new(CMatrix::identity(16).scale_real(1.0 / 16.0), Basis::Eigen).is_err());
    }

    #[test]
    fn pure_requires_normalization() {
        let ket = [ONE, ONE, C64::default(), C64::default()];
        assert!(DensityMatrix::pure(&ket, Basis::Computational).is_err());
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let ket = [C64::new(s, 0.0), C64::new(0.0, s), C64::default(), C64::default()];
        let rho = DensityMatrix::pure(&ket, Basis::Computational).unwrap();
        let r = rho.report();
        assert!(r.trace_error < 1e-15 && r.hermiticity == 0.0 && r.min_eigenvalue > -1e-15);
    }

    #[test]
    fn basis_tag_checked() {
        let rho = DensityMatrix::diagonal([1.0, 0.0, 0.0, 0.0], Basis::Eigen).unwrap();
        assert!(rho.expect_basis(Basis::Eigen).is_ok());
        assert_eq!(
            rho.expect_basis(Basis::Computational),
            Err(Error::BasisMismatch { expected: "computational", found: "eigen" })
        );
    }
}
