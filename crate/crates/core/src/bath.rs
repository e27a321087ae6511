//! Thermal reservoirs: Ohmic spectral densities, Bose occupations and the
//! decay / excitation coefficients entering the master equation.

use crate::error::{Error, Result};
use crate::model::{EigenSystem, SystemParams, UnitSystem};

/// Which of the two Bohr frequencies a channel belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Transition {
    /// ω_I: b→a and d→c
    One,
    /// ω_II: c→a and d→b
    Two,
}

impl Transition {
    pub const ALL: [Transition; 2] = [Transition::One, Transition::Two];

    pub fn index(self) -> usize {
        match self {
            Transition::One => 0,
            Transition::Two => 1,
        }
    }

    pub fn frequency(self, es: &EigenSystem) -> f64 {
        match self {
            Transition::One => es.omega_i,
            Transition::Two => es.omega_ii,
        }
    }
}

/// Zero-temperature spectral density of one reservoir.
pub trait SpectralDensity {
    fn value(&self, omega: f64) -> f64;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ohmic {
    pub alpha: f64,
}

impl SpectralDensity for Ohmic {
    fn value(&self, omega: f64) -> f64 {
        self.alpha * omega
    }
}

/// Mean photon number 1/(e^{Θω/T} − 1); zero at T = 0.
pub fn bose_occupation(omega: f64, t_mk: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::InvalidArgument(format!("bose occupation needs omega > 0, got {omega}")));
    }
    if t_mk < 0.0 || !t_mk.is_finite() {
        return Err(Error::InvalidArgument(format!("temperature must be finite and >= 0, got {t_mk}")));
    }
    if t_mk == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / UnitSystem::thermal_exponent(omega, t_mk).exp_m1())
}

/// Decay and excitation rates of one reservoir at one Bohr frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GammaPair {
    pub decay: f64,
    pub excitation: f64,
}

/// γ = J(ω)(1 + N), γ̄ = J(ω)·N for reservoir `l` (1 or 2, user labels).
pub fn gamma(transition: Transition, l: usize, p: &SystemParams, es: &EigenSystem) -> Result<GammaPair> {
    let (alpha, t) = match l {
        1 => (p.alpha1, p.t1_mk),
        2 => (p.alpha2, p.t2_mk),
        _ => return Err(Error::InvalidArgument(format!("reservoir index must be 1 or 2, got {l}"))),
    };
    gamma_with(&Ohmic { alpha }, transition.frequency(es), t)
}

pub fn gamma_with(j: &impl SpectralDensity, omega: f64, t_mk: f64) -> Result<GammaPair> {
    let n = bose_occupation(omega, t_mk)?;
    let jw = j.value(omega);
    Ok(GammaPair { decay: jw * (1.0 + n), excitation: jw * n })
}

/// All coefficients of the master equation. Barred quantities are
/// excitation rates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateSet {
    pub c_i: f64,
    pub c_ii: f64,
    pub cbar_i: f64,
    pub cbar_ii: f64,
    pub c_cr_i: f64,
    pub c_cr_ii: f64,
    pub cbar_cr_i: f64,
    pub cbar_cr_ii: f64,
    /// γ_{i,ll} indexed `[transition][reservoir − 1]`, user reservoir labels.
    pub gamma: [[f64; 2]; 2],
    pub gamma_bar: [[f64; 2]; 2],
}

impl RateSet {
    pub fn decay(&self, t: Transition) -> f64 {
        match t {
            Transition::One => self.c_i,
            Transition::Two => self.c_ii,
        }
    }

    pub fn excitation(&self, t: Transition) -> f64 {
        match t {
            Transition::One => self.cbar_i,
            Transition::Two => self.cbar_ii,
        }
    }

    /// The 4×4 population rate matrix acting on (ϱ_aa, ϱ_bb, ϱ_cc, ϱ_dd).
    pub fn population_matrix(&self) -> [[f64; 4]; 4] {
        let (c1, c2, b1, b2) = (self.c_i, self.c_ii, self.cbar_i, self.cbar_ii);
        [
            [-(b1 + b2), c1, c2, 0.0],
            [b1, -(c1 + b2), 0.0, c2],
            [b2, 0.0, -(b1 + c2), c1],
            [0.0, b2, b1, -(c1 + c2)],
        ]
    }
}

/// The four squared brackets of the rate formulas:
/// (cos·cos + sin·sin)², (cos·sin + sin·cos)², (cos·sin − sin·cos)², (cos·cos − sin·sin)².
fn brackets(es: &EigenSystem) -> [f64; 4] {
    let (ca, sa, cb, sb) = es.half_angles();
    [
        (ca * cb + sa * sb).powi(2),
        (ca * sb + sa * cb).powi(2),
        (ca * sb - sa * cb).powi(2),
        (ca * cb - sa * sb).powi(2),
    ]
}

pub fn rate_set(p: &SystemParams, es: &EigenSystem) -> Result<RateSet> {
    let mut gamma = [[0.0; 2]; 2];
    let mut gamma_bar = [[0.0; 2]; 2];
    for tr in Transition::ALL {
        for l in 1..=2 {
            let g = self::gamma(tr, l, p, es)?;
            gamma[tr.index()][l - 1] = g.decay;
            gamma_bar[tr.index()][l - 1] = g.excitation;
        }
    }

    // The closed forms assume ω₂ ≥ ω₁; under relabeling the canonical
    // reservoir 1 is the user's reservoir 2.
    let (r1, r2) = if es.swapped { (1, 0) } else { (0, 1) };
    let [b1, b2, b3, b4] = brackets(es);
    let coeffs = |g: &[[f64; 2]; 2]| {
        let (g1_1, g1_2) = (g[0][r1], g[0][r2]);
        let (g2_1, g2_2) = (g[1][r1], g[1][r2]);
        (
            g1_1 * b1 + g1_2 * b2,
            g2_1 * b3 + g2_2 * b4,
            g1_1 * b1 - g1_2 * b2,
            -g2_1 * b3 + g2_2 * b4,
        )
    };
    let (c_i, c_ii, c_cr_i, c_cr_ii) = coeffs(&gamma);
    let (cbar_i, cbar_ii, cbar_cr_i, cbar_cr_ii) = coeffs(&gamma_bar);

    Ok(RateSet { c_i, c_ii, cbar_i, cbar_ii, c_cr_i, c_cr_ii, cbar_cr_i, cbar_cr_ii, gamma, gamma_bar })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{eigensystem, Variant};

    fn preset_alpha(alpha: f64) -> SystemParams {
        SystemParams::preset().with_alphas(alpha, alpha)
    }

    #[test]
    fn zero_temperature_occupation() {
        assert_eq!(bose_occupation(3.0902, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn occupation_at_ten_millikelvin() {
        // x = 7.6382·3.0902/10 = 2.36036, N = 1/(e^x − 1)
        let x = UnitSystem::thermal_exponent(3.0902, 10.0);
        assert!((x - 2.3604).abs() < 1e-4);
        let n = bose_occupation(3.0902, 10.0).unwrap();
        assert!((n - 0.1042).abs() < 1e-4, "{n}");
    }

    #[test]
    fn occupation_monotonicity() {
        let temps = [1.0, 5.0, 10.0, 20.0, 50.0, 200.0];
        let omegas = [0.5, 1.0, 3.0, 8.0, 20.0];
        for w in omegas {
            let ns: Vec<f64> = temps.iter().map(|&t| bose_occupation(w, t).unwrap()).collect();
            assert!(ns.windows(2).all(|p| p[1] > p[0]));
        }
        for t in temps {
            let ns: Vec<f64> = omegas.iter().map(|&w| bose_occupation(w, t).unwrap()).collect();
            assert!(ns.windows(2).all(|p| p[1] < p[0]));
        }
    }

    #[test]
    fn occupation_rejects_bad_frequency() {
        assert!(bose_occupation(0.0, 10.0).is_err());
        assert!(bose_occupation(-1.0, 10.0).is_err());
    }

    #[test]
    fn zero_temperature_gammas() {
        let p = preset_alpha(1e-3);
        let es = eigensystem(&p).unwrap();
        let g = gamma(Transition::One, 1, &p, &es).unwrap();
        assert_eq!(g.excitation, 0.0);
        assert!((g.decay - 1e-3 * es.omega_i).abs() < 1e-18);
        assert!((g.decay - 3.090e-3).abs() < 1e-6);
        assert!((es.omega_i - 3.0902).abs() < 1e-4);
    }

    #[test]
    fn detailed_balance_ratio() {
        let p = preset_alpha(1e-3).with_temperatures(10.0, 10.0);
        let es = eigensystem(&p).unwrap();
        let g = gamma(Transition::One, 2, &p, &es).unwrap();
        let ratio = g.excitation / g.decay;
        let x = UnitSystem::thermal_exponent(es.omega_i, 10.0);
        assert!((ratio - (-x).exp()).abs() < 1e-15);
        assert!((ratio - (-2.3604f64).exp()).abs() < 1e-5, "{ratio}");
        assert!((ratio - 0.09435).abs() < 5e-5, "{ratio}");
    }

    #[test]
    fn symmetric_preset_rates() {
        // ω₁ = ω₂: each bracket pair collapses to (1 ± sin θ_I)/2.
        let p = preset_alpha(1e-3);
        let es = eigensystem(&p).unwrap();
        let r = rate_set(&p, &es).unwrap();
        let s = es.theta_i.sin();
        assert!((r.c_i - 1e-3 * es.omega_i * (1.0 + s)).abs() < 1e-15);
        assert!((r.c_ii - 1e-3 * es.omega_ii * (1.0 - s)).abs() < 1e-15);
        assert!(r.c_cr_i.abs() < 1e-18);
        assert!(r.c_cr_ii.abs() < 1e-16);
        assert!((r.c_i - 4.4721e-3).abs() < 1e-6);
    }

    #[test]
    fn uncoupled_limit_rates() {
        let p = SystemParams { omega1: 3.0, omega2: 5.0, lambda: 0.0, ..preset_alpha(2e-3) };
        let es = eigensystem(&p).unwrap();
        let r = rate_set(&p, &es).unwrap();
        assert_eq!(r.c_i, r.gamma[0][0]);
        assert_eq!(r.c_ii, r.gamma[1][1]);
        assert!((r.c_i - 2e-3 * 3.0).abs() < 1e-15);
        assert!((r.c_ii - 2e-3 * 5.0).abs() < 1e-15);
    }

    #[test]
    fn rate_invariants() {
        for &(w1, w2, lam, a1, a2, t1, t2) in &[
            (5.0, 5.0, 5.0, 5e-3, 5e-3, 10.0, 30.0),
            (3.0, 7.0, 1.0, 1e-2, 1e-3, 0.0, 20.0),
            (7.0, 3.0, 12.0, 2e-3, 4e-3, 15.0, 5.0),
            (2.0, 9.0, -4.0, 0.0, 1e-3, 50.0, 50.0),
        ] {
            let p = SystemParams {
                omega1: w1,
                omega2: w2,
                lambda: lam,
                alpha1: a1,
                alpha2: a2,
                t1_mk: t1,
                t2_mk: t2,
                variant: Variant::Full,
            };
            let es = eigensystem(&p).unwrap();
            let r = rate_set(&p, &es).unwrap();
            assert!(r.c_i >= 0.0 && r.c_ii >= 0.0 && r.cbar_i >= 0.0 && r.cbar_ii >= 0.0);
            assert!(r.c_cr_i.abs() <= r.c_i + 1e-18);
            assert!(r.c_cr_ii.abs() <= r.c_ii + 1e-18);
            assert!(r.cbar_cr_i.abs() <= r.cbar_i + 1e-18);
            for tr in 0..2 {
                let w = if tr == 0 { es.omega_i } else { es.omega_ii };
                for (l, t) in [(0, t1), (1, t2)] {
                    let g = r.gamma[tr][l];
                    let gb = r.gamma_bar[tr][l];
                    assert!(g >= 0.0 && gb >= 0.0);
                    if t == 0.0 {
                        assert_eq!(gb, 0.0);
                    } else if g > 0.0 {
                        let want = (-UnitSystem::thermal_exponent(w, t)).exp();
                        assert!((gb / g - want).abs() <= 1e-14 * want.max(1e-300) + 1e-300);
                    }
                }
            }
            let m = r.population_matrix();
            for j in 0..4 {
                let col: f64 = (0..4).map(|i| m[i][j]).sum();
                assert!(col.abs() < 1e-17);
            }
        }
    }

    #[test]
    fn equal_temperatures_scale_identically() {
        let p = SystemParams { omega1: 4.0, omega2: 6.0, lambda: 3.0, ..SystemParams::preset() }
            .with_alphas(3e-3, 8e-3)
            .with_temperatures(12.0, 12.0);
        let es = eigensystem(&p).unwrap();
        let r = rate_set(&p, &es).unwrap();
        let f1 = (-UnitSystem::thermal_exponent(es.omega_i, 12.0)).exp();
        let f2 = (-UnitSystem::thermal_exponent(es.omega_ii, 12.0)).exp();
        assert!((r.cbar_i / r.c_i - f1).abs() < 1e-15);
        assert!((r.cbar_ii / r.c_ii - f2).abs() < 1e-15);
    }

    #[test]
    fn relabeling_qubits_leaves_rates_unchanged() {
        let p = SystemParams {
            omega1: 3.0,
            omega2: 7.0,
            lambda: 2.5,
            alpha1: 1e-2,
            alpha2: 2e-3,
            t1_mk: 8.0,
            t2_mk: 25.0,
            variant: Variant::Full,
        };
        let q = SystemParams {
            omega1: 7.0,
            omega2: 3.0,
            alpha1: 2e-3,
            alpha2: 1e-2,
            t1_mk: 25.0,
            t2_mk: 8.0,
            ..p
        };
        let rp = rate_set(&p, &eigensystem(&p).unwrap()).unwrap();
        let rq = rate_set(&q, &eigensystem(&q).unwrap()).unwrap();
        for (a, b) in [
            (rp.c_i, rq.c_i),
            (rp.c_ii, rq.c_ii),
            (rp.cbar_i, rq.cbar_i),
            (rp.cbar_ii, rq.cbar_ii),
            (rp.c_cr_i, rq.c_cr_i),
            (rp.c_cr_ii, rq.c_cr_ii),
        ] {
            assert!((a - b).abs() < 1e-15, "{a} vs {b}");
        }
    }
}
