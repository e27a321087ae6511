//! Secular Markovian generator, numerical propagation, the closed-form
//! population solution and the stationary state.
//!
//! The generator is assembled from eigenoperators of σx on each qubit:
//! for a reservoir `l` and Bohr frequency ω, A_l(ω) collects every
//! transition |n⟩⟨m| with E_m − E_n = ω weighted by ⟨n|σx⁽ˡ⁾|m⟩, and
//! contributes γ·D[A_l(ω)] + γ̄·D[A_l(ω)†]. Everything is expressed in the
//! energy eigenbasis, where the Hamiltonian part is diagonal.

pub mod integrator;
mod state;

pub use state::{Basis, DensityMatrix, StateReport};

use crate::bath::{rate_set, RateSet, Transition};
use crate::entanglement::concurrence_with;
use crate::error::{Error, Result};
use crate::model::{eigensystem, sigma_x, to_computational, to_eigenbasis, EigenSystem, Level, SystemParams};
use crate::numerics::{sandwich_superop, vectorize, CMatrix, Tolerances, C64, I, ZERO};

use integrator::{dopri5, Dopri5Options, IntegrationStats};

/// The pairs (lower, upper) sharing a Bohr frequency.
pub fn transition_pairs(t: Transition) -> [(Level, Level); 2] {
    match t {
        Transition::One => [(Level::A, Level::B), (Level::C, Level::D)],
        Transition::Two => [(Level::A, Level::C), (Level::B, Level::D)],
    }
}

/// |k⟩⟨l| in the eigenbasis.
fn ket_bra(k: Level, l: Level) -> CMatrix {
    let mut m = CMatrix::zeros(4);
    m[(k.index(), l.index())] = C64::new(1.0, 0.0);
    m
}

/// Superoperator of γ·(AρA† − ½{A†A, ρ}).
fn dissipator(a: &CMatrix, rate: f64) -> CMatrix {
    let id = CMatrix::identity(4);
    let ada = &a.adjoint() * a;
    let jump = sandwich_superop(a, &a.adjoint());
    let left = sandwich_superop(&ada, &id);
    let right = sandwich_superop(&id, &ada);
    let anti = (&left + &right).scale_real(0.5);
    (&jump - &anti).scale_real(rate)
}

fn hamiltonian_superop(es: &EigenSystem) -> CMatrix {
    let h = CMatrix::diag_real(&es.energies);
    let id = CMatrix::identity(4);
    (&sandwich_superop(&h, &id) - &sandwich_superop(&id, &h)).scale(-I)
}

#[derive(Clone, Debug)]
pub struct Liouvillian {
    generator: CMatrix,
    nonzeros: Vec<(usize, usize, C64)>,
    /// Nonzeros of the dissipative part alone; it commutes with the
    /// Hamiltonian superoperator, so it generates the interaction-picture
    /// evolution.
    dissipative: Vec<(usize, usize, C64)>,
    population: [[f64; 4]; 4],
    rates: RateSet,
    eigen: EigenSystem,
    params: SystemParams,
}

impl Liouvillian {
    /// 16×16 generator on column-stacked eigenbasis density matrices.
    pub fn matrix(&self) -> &CMatrix {
        &self.generator
    }

    /// Coefficient matrix of the population rate equations.
    pub fn population_matrix(&self) -> [[f64; 4]; 4] {
        self.population
    }

    pub fn rates(&self) -> &RateSet {
        &self.rates
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        &self.eigen
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// L acting on an eigenbasis matrix.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let v = vectorize(rho);
        let mut out = vec![ZERO; 16];
        self.apply_vec(&v, &mut out);
        crate::numerics::devectorize(&out)
    }

    fn apply_vec(&self, v: &[C64], out: &mut [C64]) {
        apply_sparse(&self.nonzeros, v, out);
    }

    /// The generator with the Hamiltonian part removed.
    pub fn dissipator(&self) -> CMatrix {
        &self.generator - &hamiltonian_superop(&self.eigen)
    }

    /// Set when the dissipative rates are not small compared to the
    /// spacing of the Bohr frequencies the secular construction separates.
    pub fn secular_warning(&self) -> Option<String> {
        let r = &self.rates;
        let es = &self.eigen;
        let widest = (r.c_i + r.cbar_i).max(r.c_ii + r.cbar_ii);
        let spacing = es.omega_i.min(es.omega_ii - es.omega_i);
        (widest > 0.1 * spacing).then(|| {
            format!(
                "secular approximation questionable: largest rate {widest:.4e} rad/ns exceeds 0.1 x Bohr spacing {spacing:.4e} rad/ns"
            )
        })
    }
}

fn apply_sparse(nonzeros: &[(usize, usize, C64)], v: &[C64], out: &mut [C64]) {
    out.iter_mut().for_each(|z| *z = ZERO);
    for &(i, j, a) in nonzeros {
        out[i] += a * v[j];
    }
}

fn sparse(m: &CMatrix) -> Vec<(usize, usize, C64)> {
    (0..m.dim())
        .flat_map(|i| (0..m.dim()).map(move |j| (i, j)))
        .filter_map(|(i, j)| {
            let a = m[(i, j)];
            (a != ZERO).then_some((i, j, a))
        })
        .collect()
}

pub fn build_liouvillian(p: &SystemParams) -> Result<Liouvillian> {
    let es = eigensystem(p)?;
    let rates = rate_set(p, &es)?;
    let mut dissipative = CMatrix::zeros(16);
    for l in 1..=2 {
        let sx = es.in_eigenbasis(&sigma_x(l));
        for tr in Transition::ALL {
            let mut a = CMatrix::zeros(4);
            for (lower, upper) in transition_pairs(tr) {
                a[(lower.index(), upper.index())] = sx[(lower.index(), upper.index())];
            }
            let down = rates.gamma[tr.index()][l - 1];
            let up = rates.gamma_bar[tr.index()][l - 1];
            if down != 0.0 {
                dissipative = &dissipative + &dissipator(&a, down);
            }
            if up != 0.0 {
                dissipative = &dissipative + &dissipator(&a.adjoint(), up);
            }
        }
    }
    let generator = &hamiltonian_superop(&es) + &dissipative;
    Ok(Liouvillian {
        nonzeros: sparse(&generator),
        dissipative: sparse(&dissipative),
        generator,
        population: rates.population_matrix(),
        rates,
        eigen: es,
        params: *p,
    })
}

/// Labeling of the d→b and d→c channels (and their reverses).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateLabeling {
    /// d→b carries c_II and d→c carries c_I, as in the population rate
    /// equations; this is what the eigenoperator generator produces.
    RateEquations,
    /// d→b carries c_I and d→c carries c_II, as the dissipator is printed.
    AsPrinted,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelRate {
    pub from: Level,
    pub to: Level,
    pub symbol: &'static str,
    pub rate: f64,
}

pub fn channel_rates(r: &RateSet, labeling: RateLabeling) -> Vec<ChannelRate> {
    use Level::*;
    let (db, dc, bd, cd) = match labeling {
        RateLabeling::RateEquations => (("c_II", r.c_ii), ("c_I", r.c_i), ("cbar_II", r.cbar_ii), ("cbar_I", r.cbar_i)),
        RateLabeling::AsPrinted => (("c_I", r.c_i), ("c_II", r.c_ii), ("cbar_I", r.cbar_i), ("cbar_II", r.cbar_ii)),
    };
    let ch = |from, to, (symbol, rate): (&'static str, f64)| ChannelRate { from, to, symbol, rate };
    vec![
        ch(B, A, ("c_I", r.c_i)),
        ch(C, A, ("c_II", r.c_ii)),
        ch(D, B, db),
        ch(D, C, dc),
        ch(A, B, ("cbar_I", r.cbar_i)),
        ch(A, C, ("cbar_II", r.cbar_ii)),
        ch(B, D, bd),
        ch(C, D, cd),
    ]
}

/// Generator written out term by term from the dissipator and cross-term
/// list, under either rate labeling.
pub fn transcribed_generator(es: &EigenSystem, r: &RateSet, labeling: RateLabeling) -> CMatrix {
    use Level::*;
    let mut g = hamiltonian_superop(es);
    for c in channel_rates(r, labeling) {
        if c.rate != 0.0 {
            g = &g + &dissipator(&ket_bra(c.to, c.from), c.rate);
        }
    }
    let cross = |x: (Level, Level), y: (Level, Level), u: (Level, Level), v: (Level, Level), rate: f64| {
        let t1 = sandwich_superop(&ket_bra(x.0, x.1), &ket_bra(y.0, y.1));
        let t2 = sandwich_superop(&ket_bra(u.0, u.1), &ket_bra(v.0, v.1));
        (&t1 + &t2).scale_real(rate)
    };
    g = &g + &cross((A, B), (D, C), (C, D), (B, A), r.c_cr_i);
    g = &g + &cross((A, C), (D, B), (B, D), (C, A), r.c_cr_ii);
    g = &g + &cross((D, C), (A, B), (B, A), (C, D), r.cbar_cr_i);
    g = &g + &cross((D, B), (A, C), (C, A), (B, D), r.cbar_cr_ii);
    g
}

/// Sampled solution. States are in the computational basis; populations
/// are eigenbasis populations (a, b, c, d).
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub populations: Vec<[f64; 4]>,
    pub concurrence: Vec<f64>,
    /// Worst invariant deviations seen over all samples.
    pub worst: Option<StateReport>,
    pub stats: IntegrationStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

pub fn evolve(l: &Liouvillian, rho0: &DensityMatrix, times: &[f64]) -> Result<Trajectory> {
    evolve_with(l, rho0, times, &Tolerances::default())
}

/// Adaptive Dormand–Prince integration, sampled at `times` (increasing,
/// starting at or after t = 0).
///
/// The integration runs in the interaction picture: only the dissipator is
/// integrated and the Bohr phases e^{−i(E_k − E_l)t} are applied exactly at
/// each output time.
pub fn evolve_with(l: &Liouvillian, rho0: &DensityMatrix, times: &[f64], tol: &Tolerances) -> Result<Trajectory> {
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("sample times must be strictly increasing".into()));
    }
    if times.first().is_some_and(|&t| !(t >= 0.0)) {
        return Err(Error::InvalidArgument("sample times must be >= 0".into()));
    }
    let start = match rho0.basis() {
        Basis::Eigen => rho0.clone(),
        Basis::Computational => to_eigenbasis(rho0, &l.eigen)?,
    };
    let y0 = vectorize(start.matrix());

    let mut traj = Trajectory {
        times: Vec::with_capacity(times.len()),
        states: Vec::with_capacity(times.len()),
        populations: Vec::with_capacity(times.len()),
        concurrence: Vec::with_capacity(times.len()),
        worst: None,
        stats: IntegrationStats::default(),
    };
    let opts = Dopri5Options { rtol: tol.rtol, atol: tol.atol, ..Default::default() };
    let stats = dopri5(
        |_, y, dy| apply_sparse(&l.dissipative, y, dy),
        0.0,
        &y0,
        times,
        &opts,
        |_, t, y| {
            let e = &l.eigen.energies;
            let m = CMatrix::from_fn(4, |k, j| {
                y[k + 4 * j] * C64::from_polar(1.0, -(e[k] - e[j]) * t)
            });
            let report = StateReport::of(&m);
            if !m.is_finite() {
                return Err(Error::IntegrationFailure(format!("non-finite state at t = {t}")));
            }
            if report.trace_error > tol.trace_failure
                || report.hermiticity > tol.hermiticity
                || report.min_eigenvalue < tol.positivity
            {
                return Err(Error::IntegrationFailure(format!(
                    "state invariants violated at t = {t}: trace error {:.2e}, hermiticity {:.2e}, min eigenvalue {:.2e}",
                    report.trace_error, report.hermiticity, report.min_eigenvalue
                )));
            }
            traj.worst = Some(match traj.worst {
                None => report,
                Some(w) => StateReport {
                    trace_error: w.trace_error.max(report.trace_error),
                    hermiticity: w.hermiticity.max(report.hermiticity),
                    min_eigenvalue: w.min_eigenvalue.min(report.min_eigenvalue),
                },
            });
            let eig = DensityMatrix::from_matrix_unchecked(m, Basis::Eigen);
            let comp = to_computational(&eig, &l.eigen)?;
            traj.populations.push(eig.populations());
            traj.concurrence.push(concurrence_with(&comp, tol)?.value);
            traj.states.push(comp);
            traj.times.push(t);
            Ok(())
        },
    )?;
    traj.stats = stats;
    Ok(traj)
}

/// Closed-form populations (ϱ_aa, ϱ_bb, ϱ_cc, ϱ_dd) at time `t`.
pub fn propagate_populations_analytic(r: &RateSet, pops0: [f64; 4], t: f64) -> [f64; 4] {
    let (c1, c2, b1, b2) = (r.c_i, r.c_ii, r.cbar_i, r.cbar_ii);
    let [a, b, c, d] = pops0;
    let den = (c1 + b1) * (c2 + b2);
    let e_all = (-(c1 + c2 + b1 + b2) * t).exp();
    let e_two = (-(c2 + b2) * t).exp();
    let e_one = (-(c1 + b1) * t).exp();
    let mixed = b1 * b2 * a - c1 * b2 * b - b1 * c2 * c + c1 * c2 * d;
    [
        (c1 * c2
            + mixed * e_all
            + (c1 * b2 * (a + b) - c1 * c2 * (c + d)) * e_two
            + (b1 * c2 * (a + c) - c1 * c2 * (b + d)) * e_one)
            / den,
        (b1 * c2 - mixed * e_all
            + (b1 * b2 * (a + b) - b1 * c2 * (c + d)) * e_two
            + (-b1 * c2 * (a + c) + c1 * c2 * (b + d)) * e_one)
            / den,
        (c1 * b2 - mixed * e_all
            + (-c1 * b2 * (a + b) + c1 * c2 * (c + d)) * e_two
            + (b1 * b2 * (a + c) - c1 * b2 * (b + d)) * e_one)
            / den,
        (b1 * b2
            + mixed * e_all
            + (-b1 * b2 * (a + b) + b1 * c2 * (c + d)) * e_two
            + (-b1 * b2 * (a + c) + c1 * b2 * (b + d)) * e_one)
            / den,
    ]
}

/// t → ∞ limit of the population solution.
pub fn stationary_populations(r: &RateSet) -> Result<[f64; 4]> {
    let (c1, c2, b1, b2) = (r.c_i, r.c_ii, r.cbar_i, r.cbar_ii);
    let den = (c1 + b1) * (c2 + b2);
    if !(den > 0.0) {
        return Err(Error::InvalidParams(
            "no unique stationary state: a transition has zero total rate (is alpha zero?)".into(),
        ));
    }
    Ok([c1 * c2 / den, b1 * c2 / den, c1 * b2 / den, b1 * b2 / den])
}

/// Stationary state in the eigenbasis.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let pops = stationary_populations(&l.rates)?;
    let m = CMatrix::diag_real(&pops);
    let residual = l.apply(&m).max_abs();
    let scale = l.rates.c_i + l.rates.c_ii + l.rates.cbar_i + l.rates.cbar_ii;
    if residual > 1e-10 * scale.max(1.0) {
        return Err(Error::IntegrationFailure(format!("stationary residual {residual:.3e} too large")));
    }
    DensityMatrix::new(m, Basis::Eigen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Variant;

    fn sample_params() -> Vec<SystemParams> {
        vec![
            SystemParams::preset(),
            SystemParams::preset().with_temperatures(10.0, 25.0),
            SystemParams { omega1: 3.0, omega2: 7.0, lambda: 2.0, ..SystemParams::preset() }
                .with_alphas(1e-2, 2e-3)
                .with_temperatures(15.0, 5.0),
            SystemParams { omega1: 8.0, omega2: 2.5, lambda: -6.0, ..SystemParams::preset() }
                .with_temperatures(30.0, 0.0),
            SystemParams::preset().with_variant(Variant::Rwa).with_temperatures(12.0, 12.0),
        ]
    }

    #[test]
    fn population_block_matches_rate_equations() {
        for p in sample_params() {
            let l = build_liouvillian(&p).unwrap();
            let m = l.population_matrix();
            for i in 0..4 {
                for j in 0..4 {
                    let g = l.matrix()[(5 * i, 5 * j)];
                    assert!((g.re - m[i][j]).abs() < 1e-15 && g.im.abs() < 1e-15, "{p:?} ({i},{j})");
                }
            }
            // columns sum to zero, off-diagonals non-negative
            for j in 0..4 {
                assert!((0..4).map(|i| m[i][j]).sum::<f64>().abs() < 1e-16);
                for i in 0..4 {
                    if i != j {
                        assert!(m[i][j] >= 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn bbdot_row_reads_as_expected() {
        let p = SystemParams::preset().with_temperatures(10.0, 20.0);
        let l = build_liouvillian(&p).unwrap();
        let r = l.rates();
        let row = l.population_matrix()[1];
        assert_eq!(row, [r.cbar_i, -(r.c_i + r.cbar_ii), 0.0, r.c_ii]);
    }

    #[test]
    fn populations_decouple_from_coherences() {
        for p in sample_params() {
            let l = build_liouvillian(&p).unwrap();
            for i in 0..4 {
                for col in 0..16 {
                    if col % 5 != 0 {
                        assert_eq!(l.matrix()[(5 * i, col)], ZERO);
                    }
                }
            }
        }
    }

    #[test]
    fn eigenoperator_generator_equals_transcription_under_rate_equation_labels() {
        for p in sample_params() {
            let l = build_liouvillian(&p).unwrap();
            let t = transcribed_generator(l.eigensystem(), l.rates(), RateLabeling::RateEquations);
            assert!(l.matrix().max_abs_diff(&t) < 1e-15, "{p:?}");
        }
    }

    #[test]
    fn printed_labeling_differs_when_rates_differ() {
        let p = SystemParams { omega1: 3.0, omega2: 7.0, lambda: 2.0, ..SystemParams::preset() };
        let l = build_liouvillian(&p).unwrap();
        assert!((l.rates().c_i - l.rates().c_ii).abs() > 1e-4);
        let t = transcribed_generator(l.eigensystem(), l.rates(), RateLabeling::AsPrinted);
        assert!(l.matrix().max_abs_diff(&t) > 1e-4);
    }

    #[test]
    fn ad_coherence_is_pure_decay_plus_phase() {
        let p = SystemParams::preset().with_temperatures(10.0, 20.0);
        let l = build_liouvillian(&p).unwrap();
        let es = l.eigensystem();
        let idx = 0 + 4 * 3; // ϱ_ad under column stacking
        let row: Vec<C64> = (0..16).map(|j| l.matrix()[(idx, j)]).collect();
        for (j, z) in row.iter().enumerate() {
            if j != idx {
                assert_eq!(*z, ZERO, "coupling to component {j}");
            }
        }
        let diag = row[idx];
        assert!((diag.im + (es.energies[0] - es.energies[3])).abs() < 1e-12);
        assert!(diag.re < 0.0);
    }

    #[test]
    fn dissipator_commutes_with_hamiltonian_part() {
        for p in sample_params() {
            let l = build_liouvillian(&p).unwrap();
            let d = l.dissipator();
            let h = hamiltonian_superop(l.eigensystem());
            let scale = d.max_abs() * h.max_abs();
            assert!((&(&d * &h) - &(&h * &d)).max_abs() <= 1e-14 * scale.max(1e-300), "{p:?}");
        }
    }

    #[test]
    fn preserves_hermiticity_as_superoperator() {
        let p = SystemParams::preset().with_temperatures(7.0, 3.0);
        let l = build_liouvillian(&p).unwrap();
        let x = CMatrix::from_fn(4, |i, j| C64::new((i * 3 + j) as f64 * 0.1, (i as f64) - 0.5 * j as f64));
        let lhs = l.apply(&x.adjoint());
        let rhs = l.apply(&x).adjoint();
        assert!(lhs.max_abs_diff(&rhs) < 1e-15);
    }

    #[test]
    fn zero_temperature_ground_state_is_fixed() {
        let p = SystemParams::preset().with_lambda(0.3);
        let l = build_liouvillian(&p).unwrap();
        let ground = CMatrix::diag_real(&[1.0, 0.0, 0.0, 0.0]);
        assert!(l.apply(&ground).max_abs() < 1e-18);
    }

    #[test]
    fn analytic_propagator_identities() {
        let p = SystemParams::preset().with_temperatures(12.0, 30.0);
        let l = build_liouvillian(&p).unwrap();
        let pops0 = [0.1, 0.2, 0.3, 0.4];
        let at0 = propagate_populations_analytic(l.rates(), pops0, 0.0);
        for k in 0..4 {
            assert!((at0[k] - pops0[k]).abs() < 1e-15);
        }
        for t in [0.5, 10.0, 300.0] {
            let s: f64 = propagate_populations_analytic(l.rates(), pops0, t).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        let late = propagate_populations_analytic(l.rates(), pops0, 1e6);
        let stat = stationary_populations(l.rates()).unwrap();
        for k in 0..4 {
            assert!((late[k] - stat[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_temperature_relaxes_to_ground() {
        let l = build_liouvillian(&SystemParams::preset()).unwrap();
        let late = propagate_populations_analytic(l.rates(), [0.0, 0.3, 0.3, 0.4], 1e5);
        assert!((late[0] - 1.0).abs() < 1e-14);
        let ss = steady_state(&l).unwrap();
        assert_eq!(ss.populations(), [1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn asymmetric_temperatures_ratio() {
        let p = SystemParams::preset().with_temperatures(5.0, 40.0);
        let l = build_liouvillian(&p).unwrap();
        let ss = steady_state(&l).unwrap().populations();
        let r = l.rates();
        assert!((ss[1] / ss[0] - r.cbar_i / r.c_i).abs() < 1e-14);
    }

    #[test]
    fn steady_state_needs_damping() {
        let p = SystemParams::preset().with_alphas(0.0, 0.0);
        let l = build_liouvillian(&p).unwrap();
        assert!(steady_state(&l).is_err());
    }

    #[test]
    fn evolve_from_excited_state_matches_single_exponential() {
        let l = build_liouvillian(&SystemParams::preset()).unwrap();
        let rho0 = DensityMatrix::diagonal([0.0, 0.0, 0.0, 1.0], Basis::Eigen).unwrap();
        let times: Vec<f64> = (0..=20).map(|k| k as f64 * 5.0).collect();
        let traj = evolve(&l, &rho0, &times).unwrap();
        let rate = l.rates().c_i + l.rates().c_ii;
        for (t, pops) in traj.times.iter().zip(&traj.populations) {
            assert!((pops[3] - (-rate * t).exp()).abs() < 1e-8);
            let an = propagate_populations_analytic(l.rates(), [0.0, 0.0, 0.0, 1.0], *t);
            for k in 0..4 {
                assert!((pops[k] - an[k]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn steady_state_is_a_fixed_point_of_evolve() {
        let p = SystemParams::preset().with_temperatures(10.0, 20.0);
        let l = build_liouvillian(&p).unwrap();
        let ss = steady_state(&l).unwrap();
        let traj = evolve(&l, &ss, &[0.0, 1.0, 50.0, 200.0]).unwrap();
        let ss_comp = to_computational(&ss, l.eigensystem()).unwrap();
        for st in &traj.states {
            assert!(st.matrix().max_abs_diff(ss_comp.matrix()) < 1e-9);
        }
    }

    #[test]
    fn unitary_limit_rotates_coherences() {
        let p = SystemParams::preset().with_alphas(0.0, 0.0);
        let l = build_liouvillian(&p).unwrap();
        let h = 0.5;
        let ket: Vec<C64> = [h, h, h, h].iter().map(|&x| C64::new(x, 0.0)).collect();
        let rho0 = DensityMatrix::pure(&ket, Basis::Eigen).unwrap();
        let times = [0.0, 0.7, 3.0, 11.0];
        let traj = evolve(&l, &rho0, &times).unwrap();
        let es = l.eigensystem();
        for (t, st) in traj.times.iter().zip(&traj.states) {
            let eig = to_eigenbasis(st, es).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    let z = eig.matrix()[(i, j)];
                    assert!((z.norm() - 0.25).abs() < 1e-9, "t={t} ({i},{j}) {z}");
                    let want = (C64::new(0.0, -(es.energies[i] - es.energies[j]) * t)).exp() * 0.25;
                    assert!((z - want).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn secular_warning_triggers_for_strong_damping() {
        let weak = build_liouvillian(&SystemParams::preset()).unwrap();
        assert!(weak.secular_warning().is_none());
        let strong = build_liouvillian(&SystemParams::preset().with_alphas(0.2, 0.2)).unwrap();
        assert!(strong.secular_warning().is_some());
    }

    #[test]
    fn rejects_bad_time_grid() {
        let l = build_liouvillian(&SystemParams::preset()).unwrap();
        let rho0 = DensityMatrix::diagonal([1.0, 0.0, 0.0, 0.0], Basis::Eigen).unwrap();
        assert!(evolve(&l, &rho0, &[1.0, 1.0]).is_err());
        assert!(evolve(&l, &rho0, &[-1.0, 1.0]).is_err());
        assert!(evolve(&l, &rho0, &[]).unwrap().is_empty());
    }
}
