//! The coupled-qubit Hamiltonian and its closed-form eigensystem.
//!
//! Computational basis order is |00⟩, |01⟩, |10⟩, |11⟩ with the first
//! digit belonging to qubit 1, so the basis index is `2·q1 + q2`.
//! Frequencies are angular, in rad/ns; temperatures are in mK.

use std::fmt;
use std::str::FromStr;

use crate::dynamics::{Basis, DensityMatrix};
use crate::error::{Error, Result};
use crate::numerics::{CMatrix, C64, ONE};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.0545718e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380649e-23;

/// Conversion between angular frequencies in rad/ns and temperatures in mK.
///
/// Bath exponents are `x = Θ·ω / T` with Θ = ħ·10⁹/k_B expressed in
/// mK per (rad/ns). This is the single place where the frequency reading
/// is fixed.
pub struct UnitSystem;

impl UnitSystem {
    /// Θ ≈ 7.6382 mK·(rad/ns)⁻¹
    pub const THETA: f64 = HBAR * 1e9 / K_B * 1e3;

    /// ħω / k_B T for ω in rad/ns and T in mK. Infinite at T = 0.
    pub fn thermal_exponent(omega: f64, t_mk: f64) -> f64 {
        if t_mk == 0.0 {
            f64::INFINITY
        } else {
            Self::THETA * omega / t_mk
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Variant {
    /// (λ/2)·σx⊗σx coupling including counter-rotating terms.
    #[default]
    Full,
    /// Excitation-conserving flip-flop coupling only.
    Rwa,
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(Self::Full),
            "rwa" => Ok(Self::Rwa),
            other => Err(Error::InvalidArgument(format!("unknown variant '{other}' (expected full|rwa)"))),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Full => "full",
            Self::Rwa => "rwa",
        })
    }
}

/// Physical inputs of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    pub omega1: f64,
    pub omega2: f64,
    pub lambda: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub t1_mk: f64,
    pub t2_mk: f64,
    pub variant: Variant,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self::preset()
    }
}

impl SystemParams {
    /// ω₁ = ω₂ = λ = 5 rad/ns, α₁ = α₂ = 10⁻³·ω₁, both baths at 0 mK.
    pub fn preset() -> Self {
        Self {
            omega1: 5.0,
            omega2: 5.0,
            lambda: 5.0,
            alpha1: 1e-3 * 5.0,
            alpha2: 1e-3 * 5.0,
            t1_mk: 0.0,
            t2_mk: 0.0,
            variant: Variant::Full,
        }
    }

    pub fn with_temperatures(mut self, t1_mk: f64, t2_mk: f64) -> Self {
        self.t1_mk = t1_mk;
        self.t2_mk = t2_mk;
        self
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_alphas(mut self, alpha1: f64, alpha2: f64) -> Self {
        self.alpha1 = alpha1;
        self.alpha2 = alpha2;
        self
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega1", self.omega1),
            ("omega2", self.omega2),
            ("lambda", self.lambda),
            ("alpha1", self.alpha1),
            ("alpha2", self.alpha2),
            ("t1_mk", self.t1_mk),
            ("t2_mk", self.t2_mk),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite, got {v}")));
            }
        }
        if self.omega1 <= 0.0 || self.omega2 <= 0.0 {
            return Err(Error::InvalidParams("qubit frequencies must be positive".into()));
        }
        if self.alpha1 < 0.0 || self.alpha2 < 0.0 {
            return Err(Error::InvalidParams("bath strengths must be non-negative".into()));
        }
        if self.t1_mk < 0.0 || self.t2_mk < 0.0 {
            return Err(Error::InvalidParams("temperatures must be non-negative".into()));
        }
        if self.lambda == 0.0 && self.omega1 == self.omega2 {
            return Err(Error::Degenerate);
        }
        if self.variant == Variant::Rwa && self.lambda * self.lambda >= 4.0 * self.omega1 * self.omega2 {
            return Err(Error::InvalidParams(format!(
                "rwa variant requires |lambda| < 2*sqrt(omega1*omega2) = {:.6} so that |00> stays the ground state",
                2.0 * (self.omega1 * self.omega2).sqrt()
            )));
        }
        Ok(())
    }

    /// Qubit labels swapped together with their baths when ω₁ > ω₂, so that
    /// the returned parameters satisfy ω₂ ≥ ω₁.
    fn canonical(&self) -> (SystemParams, bool) {
        if self.omega1 > self.omega2 {
            let mut c = *self;
            std::mem::swap(&mut c.omega1, &mut c.omega2);
            std::mem::swap(&mut c.alpha1, &mut c.alpha2);
            std::mem::swap(&mut c.t1_mk, &mut c.t2_mk);
            (c, true)
        } else {
            (*self, false)
        }
    }
}

/// Pauli raising operator σ₊ = |1⟩⟨0| on qubit `which` (1 or 2).
pub fn sigma_plus(which: usize) -> CMatrix {
    let mut m = CMatrix::zeros(4);
    for idx in 0..4 {
        let (q1, q2) = (idx >> 1, idx & 1);
        match which {
            1 if q1 == 0 => m[(idx | 2, idx)] = ONE,
            2 if q2 == 0 => m[(idx | 1, idx)] = ONE,
            1 | 2 => {}
            _ => panic!("qubit index must be 1 or 2"),
        }
    }
    m
}

pub fn sigma_minus(which: usize) -> CMatrix {
    sigma_plus(which).adjoint()
}

pub fn sigma_x(which: usize) -> CMatrix {
    &sigma_plus(which) + &sigma_minus(which)
}

/// SWAP of the two qubit labels.
pub fn swap_qubits() -> CMatrix {
    CMatrix::from_real(
        4,
        &[1., 0., 0., 0., 0., 0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1.],
    )
}

pub fn build_hamiltonian(p: &SystemParams) -> Result<CMatrix> {
    p.validate()?;
    let n1 = &sigma_plus(1) * &sigma_minus(1);
    let n2 = &sigma_plus(2) * &sigma_minus(2);
    let coupling = match p.variant {
        Variant::Full => &sigma_x(1) * &sigma_x(2),
        Variant::Rwa => {
            &(&sigma_plus(1) * &sigma_minus(2)) + &(&sigma_minus(1) * &sigma_plus(2))
        }
    };
    let h = &(&n1.scale_real(p.omega1) + &n2.scale_real(p.omega2)) + &coupling.scale_real(p.lambda / 2.0);
    Ok(h)
}

/// Eigenstate labels ordered by increasing energy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    A,
    B,
    C,
    D,
}

impl Level {
    pub const ALL: [Level; 4] = [Level::A, Level::B, Level::C, Level::D];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Level::A => "a",
            Level::B => "b",
            Level::C => "c",
            Level::D => "d",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenSystem {
    /// E_a ≤ E_b ≤ E_c ≤ E_d, rad/ns.
    pub energies: [f64; 4],
    pub theta_i: f64,
    pub theta_ii: f64,
    /// Computational-basis amplitudes of |a⟩, |b⟩, |c⟩, |d⟩.
    pub kets: [[f64; 4]; 4],
    /// E_b − E_a = E_d − E_c
    pub omega_i: f64,
    /// E_c − E_a = E_d − E_b
    pub omega_ii: f64,
    pub variant: Variant,
    /// True when the input had ω₁ > ω₂ and the closed forms were evaluated
    /// with the qubit labels exchanged.
    pub swapped: bool,
}

impl EigenSystem {
    pub fn energy(&self, level: Level) -> f64 {
        self.energies[level.index()]
    }

    pub fn ket(&self, level: Level) -> Vec<C64> {
        self.kets[level.index()].iter().map(|&x| C64::new(x, 0.0)).collect()
    }

    /// Unitary whose columns are |a⟩, |b⟩, |c⟩, |d⟩.
    pub fn unitary(&self) -> CMatrix {
        CMatrix::from_fn(4, |i, k| C64::new(self.kets[k][i], 0.0))
    }

    /// Matrix of an operator in the eigenbasis, ⟨k|op|l⟩.
    pub fn in_eigenbasis(&self, op: &CMatrix) -> CMatrix {
        let u = self.unitary();
        &(&u.adjoint() * op) * &u
    }

    /// cos(θ_I/2), sin(θ_I/2), cos(θ_II/2), sin(θ_II/2)
    pub fn half_angles(&self) -> (f64, f64, f64, f64) {
        let (a, b) = (self.theta_i / 2.0, self.theta_ii / 2.0);
        (a.cos(), a.sin(), b.cos(), b.sin())
    }
}

pub fn eigensystem(p: &SystemParams) -> Result<EigenSystem> {
    p.validate()?;
    let (c, swapped) = p.canonical();
    let (w1, w2) = (c.omega1, c.omega2);
    let lam = c.lambda.abs();
    let mean = 0.5 * (w1 + w2);
    let r_sum = (w1 + w2).hypot(lam);
    let r_diff = (w2 - w1).hypot(lam);

    let theta_ii = lam.atan2(w2 - w1);
    let (theta_i, energies) = match c.variant {
        Variant::Full => (
            lam.atan2(w1 + w2),
            [mean - 0.5 * r_sum, mean - 0.5 * r_diff, mean + 0.5 * r_diff, mean + 0.5 * r_sum],
        ),
        Variant::Rwa => (0.0, [0.0, mean - 0.5 * r_diff, mean + 0.5 * r_diff, w1 + w2]),
    };

    let (ca, sa) = ((theta_i / 2.0).cos(), (theta_i / 2.0).sin());
    let (cb, sb) = ((theta_ii / 2.0).cos(), (theta_ii / 2.0).sin());
    // amplitudes on |00⟩, |01⟩, |10⟩, |11⟩
    let mut kets = [
        [ca, 0.0, 0.0, -sa],
        [0.0, -sb, cb, 0.0],
        [0.0, cb, sb, 0.0],
        [sa, 0.0, 0.0, ca],
    ];
    if swapped {
        for k in &mut kets {
            k.swap(1, 2);
        }
    }
    if c.lambda < 0.0 {
        // σz on qubit 1 maps λ → −λ
        for k in &mut kets {
            k[2] = -k[2];
            k[3] = -k[3];
        }
    }

    Ok(EigenSystem {
        energies,
        theta_i,
        theta_ii,
        kets,
        omega_i: energies[1] - energies[0],
        omega_ii: energies[2] - energies[0],
        variant: c.variant,
        swapped,
    })
}

pub fn to_eigenbasis(rho: &DensityMatrix, es: &EigenSystem) -> Result<DensityMatrix> {
    rho.expect_basis(Basis::Computational)?;
    let u = es.unitary();
    let m = &(&u.adjoint() * rho.matrix()) * &u;
    Ok(DensityMatrix::from_matrix_unchecked(m, Basis::Eigen))
}

pub fn to_computational(rho: &DensityMatrix, es: &EigenSystem) -> Result<DensityMatrix> {
    rho.expect_basis(Basis::Eigen)?;
    let u = es.unitary();
    let m = &(&u * rho.matrix()) * &u.adjoint();
    Ok(DensityMatrix::from_matrix_unchecked(m, Basis::Computational))
}
