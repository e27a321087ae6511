//! Wootters concurrence.

use crate::dynamics::{build_liouvillian, steady_state, Basis, DensityMatrix};
use crate::error::{Error, Result};
use crate::model::{to_computational, SystemParams};
use crate::numerics::{general_eigenvalues, hermitian_eigen_tol, CMatrix, Tolerances, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConcurrenceResult {
    pub value: f64,
    /// Square roots of the ρρ̃ spectrum, descending.
    pub lambdas: [f64; 4],
}

/// σy⊗σy, which is real: ±1 on the anti-diagonal.
fn spin_flip() -> CMatrix {
    CMatrix::from_real(4, &[
        0.0, 0.0, 0.0, -1.0, //
        0.0, 0.0, 1.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0,
    ])
}

fn sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    let herm = CMatrix::from_fn(4, |i, j| 0.5 * (m[(i, j)] + m[(j, i)].conj()));
    let e = hermitian_eigen_tol(&herm, f64::INFINITY)?;
    let roots: Vec<f64> = e.values.iter().map(|&v| v.max(0.0).sqrt()).collect();
    let v = &e.vectors;
    Ok(&(v * &CMatrix::diag_real(&roots)) * &v.adjoint())
}

pub fn concurrence(rho: &DensityMatrix) -> Result<ConcurrenceResult> {
    concurrence_with(rho, &Tolerances::default())
}

pub fn concurrence_with(rho: &DensityMatrix, tol: &Tolerances) -> Result<ConcurrenceResult> {
    rho.expect_basis(Basis::Computational)?;
    let m = rho.matrix();
    let flip = spin_flip();
    let tilde = &(&flip * &m.conj()) * &flip;
    let product = m * &tilde;
    let floor = 64.0 * f64::EPSILON * product.norm_1().max(1.0);

    let mut spectrum: Vec<f64> = {
        let eig = general_eigenvalues(&product)?;
        if eig.iter().all(|z| z.im.abs() <= tol.concurrence_imag) {
            eig.iter().map(|z| z.re).collect()
        } else {
            // near-defective product: use the Hermitian similar matrix
            let s = sqrt_psd(m)?;
            let sim = &(&s * &tilde) * &s;
            let sim = CMatrix::from_fn(4, |i, j| 0.5 * (sim[(i, j)] + sim[(j, i)].conj()));
            hermitian_eigen_tol(&sim, f64::INFINITY)?.values
        }
    };

    for mu in &mut spectrum {
        if mu.abs() < floor {
            *mu = 0.0;
        } else if *mu < tol.concurrence_error {
            return Err(Error::Concurrence(format!("rho*rho~ has eigenvalue {mu:.3e}")));
        } else if *mu < 0.0 {
            *mu = 0.0;
        }
    }
    let mut lambdas: Vec<f64> = spectrum.iter().map(|mu| mu.sqrt()).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let lambdas = [lambdas[0], lambdas[1], lambdas[2], lambdas[3]];
    let value = (lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).clamp(0.0, 1.0);
    Ok(ConcurrenceResult { value, lambdas })
}

/// 2|c₀₀c₁₁ − c₀₁c₁₀| for a normalized ket.
pub fn concurrence_pure(ket: &[C64]) -> Result<f64> {
    if ket.len() != 4 {
        return Err(Error::InvalidState(format!("ket needs 4 amplitudes, got {}", ket.len())));
    }
    let norm = ket.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("ket norm {norm} is not 1")));
    }
    Ok((2.0 * (ket[0] * ket[3] - ket[1] * ket[2]).norm()).min(1.0))
}

/// Concurrence of the t → ∞ state.
pub fn stationary_concurrence(p: &SystemParams) -> Result<f64> {
    let l = build_liouvillian(p)?;
    let ss = steady_state(&l)?;
    let comp = to_computational(&ss, l.eigensystem())?;
    Ok(concurrence(&comp)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::eigensystem;
    use crate::numerics::{expm, ONE, ZERO};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn pure(ket: &[C64]) -> DensityMatrix {
        DensityMatrix::pure(ket, Basis::Computational).unwrap()
    }

    fn random_state(rng: &mut impl Rng) -> DensityMatrix {
        let a = CMatrix::from_fn(4, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let m = &a * &a.adjoint();
        let tr = m.trace().re;
        DensityMatrix::new(m.scale_real(1.0 / tr), Basis::Computational).unwrap()
    }

    fn random_ket(rng: &mut impl Rng) -> Vec<C64> {
        let v: Vec<C64> = (0..4).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter().map(|z| z / n).collect()
    }

    fn random_su2(rng: &mut impl Rng) -> CMatrix {
        let (x, y, z) = (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
        let h = CMatrix::from_rows(2, vec![c(z), C64::new(x, -y), C64::new(x, y), c(-z)]);
        expm(&h.scale(C64::new(0.0, 1.0))).unwrap()
    }

    #[test]
    fn bell_and_product_states() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = concurrence(&pure(&[c(s), ZERO, ZERO, c(s)])).unwrap();
        assert!((bell.value - 1.0).abs() < 1e-12);
        assert_eq!(concurrence(&pure(&[ZERO, ONE, ZERO, ZERO])).unwrap().value, 0.0);
        assert_eq!(concurrence_pure(&[ZERO, ZERO, ZERO, ONE]).unwrap(), 0.0);
    }

    #[test]
    fn ground_state_concurrence_is_sin_theta_i() {
        let es = eigensystem(&SystemParams::preset()).unwrap();
        let got = concurrence(&pure(&es.ket(crate::model::Level::A))).unwrap().value;
        assert!((got - 1.0 / 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn state_families() {
        for p in [0.0f64, 0.1, 0.5, 0.77, 1.0] {
            let onebit = [ZERO, c(p.sqrt()), c((1.0 - p).sqrt()), ZERO];
            let want = 2.0 * (p * (1.0 - p)).sqrt();
            assert!((concurrence_pure(&onebit).unwrap() - want).abs() < 1e-12);
            assert!((concurrence(&pure(&onebit)).unwrap().value - want).abs() < 1e-10);
        }
        let twobit = [c(0.2f64.sqrt()), ZERO, ZERO, c(0.8f64.sqrt())];
        assert!((concurrence_pure(&twobit).unwrap() - 0.8).abs() < 1e-12);
    }

    #[test]
    fn x_state_matches_hand_formula() {
        // 2·max(0, |ρ03| − √(ρ11ρ22), |ρ12| − √(ρ00ρ33))
        let mut m = CMatrix::diag_real(&[0.5, 0.1, 0.15, 0.25]);
        m[(0, 3)] = C64::new(0.2, 0.1);
        m[(3, 0)] = C64::new(0.2, -0.1);
        m[(1, 2)] = c(0.05);
        m[(2, 1)] = c(0.05);
        let rho = DensityMatrix::new(m, Basis::Computational).unwrap();
        let want = 2.0 * ((0.05f64).sqrt() - (0.015f64).sqrt()).max(0.05 - (0.125f64).sqrt()).max(0.0);
        assert!((concurrence(&rho).unwrap().value - want).abs() < 1e-12);
    }

    #[test]
    fn pure_states_agree_with_general_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let ket = random_ket(&mut rng);
            let a = concurrence(&pure(&ket)).unwrap().value;
            let b = concurrence_pure(&ket).unwrap();
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn bounded_on_random_mixed_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let r = concurrence(&random_state(&mut rng)).unwrap();
            assert!((0.0..=1.0).contains(&r.value));
            assert!(r.lambdas.windows(2).all(|w| w[0] >= w[1]) && r.lambdas[3] >= 0.0);
        }
    }

    #[test]
    fn local_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let rho = random_state(&mut rng);
            let u = random_su2(&mut rng).kron(&random_su2(&mut rng));
            let rotated = &(&u * rho.matrix()) * &u.adjoint();
            let rotated = DensityMatrix::new(rotated, Basis::Computational).unwrap();
            let a = concurrence(&rho).unwrap().value;
            let b = concurrence(&rotated).unwrap().value;
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_eigenbasis_input() {
        let rho = DensityMatrix::diagonal([1.0, 0.0, 0.0, 0.0], Basis::Eigen).unwrap();
        assert!(matches!(concurrence(&rho), Err(Error::BasisMismatch { .. })));
    }

    #[test]
    fn pure_requires_normalization() {
        assert!(concurrence_pure(&[ONE, ONE, ZERO, ZERO]).is_err());
        assert!(concurrence_pure(&[ONE, ZERO, ZERO]).is_err());
    }

    #[test]
    fn stationary_values() {
        let p = SystemParams::preset();
        assert!((stationary_concurrence(&p).unwrap() - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        let strong = p.with_lambda(500.0);
        let want = 500.0 / (100.0f64 + 250_000.0).sqrt();
        let got = stationary_concurrence(&strong).unwrap();
        assert!((got - want).abs() < 1e-12);
        assert!((got - 0.99980).abs() < 1e-5);
    }
}
