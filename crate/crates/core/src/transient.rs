//! Method-of-lines solver for `u_t + eps u_xx + lambda u = 0` with homogeneous
//! Dirichlet ends.
//!
//! Every element carries the same quadratic bubble in both nodal shapes,
//! `w_0 = (l - x)/l + c x(l - x)` and `w_1 = x/l + c x(l - x)`, which gives
//! the element mass `[[L, M], [M, L]]` and stiffness `[[N, P], [P, N]]`. The
//! semi-discrete system over interior nodes is
//! `Mg a' + (lambda Mg + Kg) a = 0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::bubble::ls_bubble_weights;
use crate::error::{Error, Result};
use crate::linalg::{solve_tridiagonal, Tridiagonal, TridiagonalSystem};
use crate::problem::{
    uniform_mesh, EnrichmentKind, Mesh1D, SolutionField, TransientProblem, TransportCoefficients,
};

/// Entries of the element mass and stiffness matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientElementMatrices {
    pub mass_diag: f64,
    pub mass_off: f64,
    pub stiff_diag: f64,
    pub stiff_off: f64,
}

impl TransientElementMatrices {
    pub fn mass(&self) -> [[f64; 2]; 2] {
        [[self.mass_diag, self.mass_off], [self.mass_off, self.mass_diag]]
    }

    pub fn stiffness(&self) -> [[f64; 2]; 2] {
        [[self.stiff_diag, self.stiff_off], [self.stiff_off, self.stiff_diag]]
    }
}

/// `L = (c^2 l^6 + 5c l^4 + 10 l^2)/(30 l)`, `M = (c^2 l^6 + 5c l^4 + 5 l^2)/(30 l)`,
/// `N = -eps (10 c^2 l^4 + 30)/(30 l)`, `P = -eps (10 c^2 l^4 - 30)/(30 l)`.
pub fn transient_element_matrices(epsilon: f64, l: f64, c: f64) -> TransientElementMatrices {
    let l2 = l * l;
    let l4 = l2 * l2;
    let l6 = l4 * l2;
    let bubble = c * c * l6 + 5.0 * c * l4;
    TransientElementMatrices {
        mass_diag: (bubble + 10.0 * l2) / (30.0 * l),
        mass_off: (bubble + 5.0 * l2) / (30.0 * l),
        stiff_diag: -epsilon * (10.0 * c * c * l4 + 30.0) / (30.0 * l),
        stiff_off: -epsilon * (10.0 * c * c * l4 - 30.0) / (30.0 * l),
    }
}

/// Bubble coefficient for one element, normalised to `u0 + ul = 1`.
///
/// Least-squares value for `eps u'' + lambda u = 0`; with `sign_compat` the
/// sign is flipped to the positive value behind the tabulated two-element
/// reference profile.
pub fn element_bubble(epsilon: f64, lambda: f64, l: f64, sign_compat: bool) -> Result<f64> {
    let coeffs = TransportCoefficients::new(epsilon, 0.0, lambda)?;
    let w = ls_bubble_weights(&coeffs, l, 2)?;
    let c = w.right[0];
    Ok(if sign_compat { -c } else { c })
}

/// Global mass and stiffness over the interior nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TransientSystem {
    pub mass: Tridiagonal,
    pub stiffness: Tridiagonal,
    pub lambda: f64,
    pub mesh: Mesh1D,
    pub enrichment: EnrichmentKind,
    /// Bubble coefficient `c` of each element.
    pub bubble: Vec<f64>,
}

impl TransientSystem {
    pub fn dim(&self) -> usize {
        self.mass.dim()
    }

    /// `lambda Mg + Kg`
    pub fn operator(&self) -> Tridiagonal {
        self.mass.combine(self.lambda, &self.stiffness, 1.0)
    }

    /// `a^T Mg a`
    pub fn energy(&self, interior: &[f64]) -> f64 {
        self.mass.mul_vec(interior).iter().zip(interior).map(|(m, a)| m * a).sum()
    }

    /// Nodal vector with the boundary zeros added.
    pub fn with_boundary(&self, interior: &[f64]) -> Vec<f64> {
        let mut u = vec![0.0; interior.len() + 2];
        u[1..=interior.len()].copy_from_slice(interior);
        u
    }

    /// Field for a full nodal vector (boundary entries included).
    pub fn field(&self, nodal: Vec<f64>) -> Result<SolutionField> {
        let bubbles = if self.enrichment == EnrichmentKind::Linear {
            Vec::new()
        } else {
            self.bubble
                .iter()
                .enumerate()
                .map(|(j, c)| vec![c * (nodal[j] + nodal[j + 1])])
                .collect()
        };
        SolutionField::new(self.mesh.clone(), nodal, self.enrichment, bubbles)
    }
}

pub fn assemble_transient(
    problem: &TransientProblem,
    mesh: &Mesh1D,
    enrichment: EnrichmentKind,
    sign_compat: bool,
) -> Result<TransientSystem> {
    let (a, b) = problem.domain();
    if !mesh.covers(a, b) {
        return Err(Error::Argument("mesh does not span the problem domain"));
    }
    let kind = enrichment.normalized()?;
    if kind.order() > 2 {
        return Err(Error::Argument(
            "transient elements support linear and quadratic-bubble enrichment only",
        ));
    }
    let n_nodes = mesh.node_count();
    let mut mass = Tridiagonal::zeros(n_nodes);
    let mut stiffness = Tridiagonal::zeros(n_nodes);
    let mut bubble = Vec::with_capacity(mesh.element_count());
    for j in 0..mesh.element_count() {
        let l = mesh.element_length(j);
        let c = match kind {
            EnrichmentKind::Linear => 0.0,
            _ => element_bubble(problem.epsilon(), problem.lambda(), l, sign_compat)?,
        };
        let m = transient_element_matrices(problem.epsilon(), l, c);
        mass.add_block(j, &m.mass());
        stiffness.add_block(j, &m.stiffness());
        bubble.push(c);
    }
    let interior = (1, n_nodes - 1);
    let mass = mass.principal_block(interior.0, interior.1);
    let stiffness = stiffness.principal_block(interior.0, interior.1);
    if mass.dim() > 0 && !mass.is_positive_definite() {
        return Err(Error::Assembly("global mass matrix is not positive definite"));
    }
    Ok(TransientSystem {
        mass,
        stiffness,
        lambda: problem.lambda(),
        mesh: mesh.clone(),
        enrichment: kind,
        bubble,
    })
}

/// Number of generalized eigenvalues of `(A, M)` below `sigma` (Sylvester
/// inertia of `A - sigma M`).
fn count_below(op: &Tridiagonal, mass: &Tridiagonal, sigma: f64) -> usize {
    let shifted = op.combine(1.0, mass, -sigma);
    shifted.ldl_pivots().iter().filter(|&&p| p < 0.0 || p.is_nan()).count()
}

/// Smallest `w` with `(lambda Mg + Kg) v = w Mg v`: the slowest mode decays
/// like `exp(-w t)`. Found by Sturm-count bisection to `1e-12` relative.
pub fn slowest_decay_rate(system: &TransientSystem) -> Result<f64> {
    let n = system.dim();
    if n == 0 {
        return Err(Error::Argument("decay rate needs at least one interior node"));
    }
    if !system.mass.is_positive_definite() {
        return Err(Error::Assembly("global mass matrix is not positive definite"));
    }
    let op = system.operator();
    if n == 1 {
        return Ok(op.diag[0] / system.mass.diag[0]);
    }
    let mut lo = -1.0;
    while count_below(&op, &system.mass, lo) > 0 {
        lo *= 2.0;
        if lo < -1e300 {
            return Err(Error::Assembly("could not bracket the spectrum"));
        }
    }
    let mut hi = 1.0;
    while count_below(&op, &system.mass, hi) == 0 {
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::Assembly("could not bracket the spectrum"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(&op, &system.mass, mid) > 0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(1e-300) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Precomputed trapezoidal (Crank-Nicolson) step
/// `(Mg + dt/2 A) a_{n+1} = (Mg - dt/2 A) a_n`, `A = lambda Mg + Kg`.
#[derive(Debug, Clone)]
pub struct TrapezoidalStepper {
    lhs: Tridiagonal,
    rhs: Tridiagonal,
    dt: f64,
}

impl TrapezoidalStepper {
    pub fn new(system: &TransientSystem, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Argument("time step must be positive"));
        }
        let op = system.operator();
        Ok(TrapezoidalStepper {
            lhs: system.mass.combine(1.0, &op, 0.5 * dt),
            rhs: system.mass.combine(1.0, &op, -0.5 * dt),
            dt,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, state: &[f64]) -> Result<Vec<f64>> {
        if state.len() != self.lhs.dim() {
            return Err(Error::Argument("state dimension does not match the system"));
        }
        let system = TridiagonalSystem { matrix: self.lhs.clone(), rhs: self.rhs.mul_vec(state) };
        solve_tridiagonal(&system)
    }
}

pub fn step_trapezoidal(system: &TransientSystem, state: &[f64], dt: f64) -> Result<Vec<f64>> {
    TrapezoidalStepper::new(system, dt)?.step(state)
}

/// Stored time levels of a transient run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// Full nodal vectors, boundary zeros included.
    pub states: Vec<Vec<f64>>,
    system: TransientSystem,
}

impl Trajectory {
    pub fn system(&self) -> &TransientSystem {
        &self.system
    }

    /// Index of the stored time closest to `t`.
    pub fn nearest(&self, t: f64) -> usize {
        let i = self.times.partition_point(|&s| s < t);
        if i == 0 {
            0
        } else if i == self.times.len() || t - self.times[i - 1] <= self.times[i] - t {
            i - 1
        } else {
            i
        }
    }

    pub fn field_at(&self, index: usize) -> Result<SolutionField> {
        self.system.field(self.states[index].clone())
    }

    /// Enriched field at the stored time nearest to `t`.
    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        let (lo, hi) = (self.times[0], self.times[self.times.len() - 1]);
        if !(t >= lo - 1e-12 && t <= hi + 1e-12) {
            return Err(Error::Domain { value: t, lo, hi });
        }
        self.field_at(self.nearest(t))?.eval(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransientOptions {
    /// Store every `stride`-th step (the first and last are always kept).
    pub stride: usize,
}

impl Default for TransientOptions {
    fn default() -> Self {
        TransientOptions { stride: 1 }
    }
}

pub fn solve_transient(
    problem: &TransientProblem,
    mesh: &Mesh1D,
    enrichment: EnrichmentKind,
    dt: f64,
    t_end: f64,
    sign_compat: bool,
) -> Result<Trajectory> {
    solve_transient_with(problem, mesh, enrichment, dt, t_end, sign_compat, TransientOptions::default())
}

/// `t_end` is reached with `ceil(t_end / dt)` equal steps, so the step used
/// never exceeds `dt`.
pub fn solve_transient_with(
    problem: &TransientProblem,
    mesh: &Mesh1D,
    enrichment: EnrichmentKind,
    dt: f64,
    t_end: f64,
    sign_compat: bool,
    options: TransientOptions,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Argument("time step must be positive"));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(Error::Argument("end time must be non-negative"));
    }
    let stride = options.stride.max(1);
    let system = assemble_transient(problem, mesh, enrichment, sign_compat)?;
    let nodes = mesh.nodes();
    let mut state: Vec<f64> = nodes[1..nodes.len() - 1].iter().map(|&x| problem.initial(x)).collect();
    let mut times = vec![0.0];
    let mut states = vec![system.with_boundary(&state)];
    if t_end > 0.0 {
        let n_steps = libm::ceil(t_end / dt - 1e-9).max(1.0) as usize;
        let h = t_end / n_steps as f64;
        let stepper = TrapezoidalStepper::new(&system, h)?;
        for k in 1..=n_steps {
            state = stepper.step(&state)?;
            if k % stride == 0 || k == n_steps {
                times.push(if k == n_steps { t_end } else { k as f64 * h });
                states.push(system.with_boundary(&state));
            }
        }
    }
    Ok(Trajectory { times, states, system })
}

/// Exact-in-time solution of the two-element semi-discrete system: a single
/// interior mode `a(0) exp(-w t)` spread through the (enriched) basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleModeSolution {
    pub amplitude: f64,
    pub rate: f64,
    profile: SolutionField,
}

impl SingleModeSolution {
    pub fn profile(&self) -> &SolutionField {
        &self.profile
    }

    pub fn eval(&self, x: f64, t: f64) -> Result<f64> {
        Ok(self.profile.eval(x)? * libm::exp(-self.rate * t))
    }
}

pub fn semi_analytic_two_element(
    problem: &TransientProblem,
    enrichment: EnrichmentKind,
    sign_compat: bool,
) -> Result<SingleModeSolution> {
    let (a, b) = problem.domain();
    let mesh = uniform_mesh(a, b, 2)?;
    let system = assemble_transient(problem, &mesh, enrichment, sign_compat)?;
    let rate = slowest_decay_rate(&system)?;
    let amplitude = problem.initial(mesh.nodes()[1]);
    let profile = system.field(vec![0.0, amplitude, 0.0])?;
    Ok(SingleModeSolution { amplitude, rate, profile })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::sync::Arc;
    use core::f64::consts::PI;

    fn benchmark() -> TransientProblem {
        TransientProblem::new(-1.0, 1.0, 0.0, PI, Arc::new(libm::sin)).unwrap()
    }

    #[test]
    fn hat_function_matrices() {
        let m = transient_element_matrices(-1.0, 1.0, 0.0);
        assert!((m.mass_diag - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.mass_off - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(m.stiff_diag, 1.0);
        assert_eq!(m.stiff_off, -1.0);
    }

    #[test]
    fn two_linear_elements() {
        let mesh = uniform_mesh(0.0, PI, 2).unwrap();
        let s = assemble_transient(&benchmark(), &mesh, EnrichmentKind::Linear, false).unwrap();
        assert_eq!(s.dim(), 1);
        assert!((s.mass.diag[0] - PI / 3.0).abs() < 1e-14);
        assert!((s.stiffness.diag[0] - 4.0 / PI).abs() < 1e-14);
        let w = slowest_decay_rate(&s).unwrap();
        assert!((w - (1.0 + 12.0 / (PI * PI))).abs() < 1e-14);
        assert!((w - 2.216).abs() < 1e-3);
    }

    #[test]
    fn two_bubble_elements_sign_compat() {
        let mesh = uniform_mesh(0.0, PI, 2).unwrap();
        let s =
            assemble_transient(&benchmark(), &mesh, EnrichmentKind::QuadraticBubble, true).unwrap();
        let c = s.bubble[0];
        assert!((c - 0.2062).abs() < 5e-4);
        let m = transient_element_matrices(-1.0, PI / 2.0, c);
        assert!((s.mass.diag[0] - 2.0 * m.mass_diag).abs() < 1e-14);
        assert!((s.stiffness.diag[0] - 2.0 * m.stiff_diag).abs() < 1e-14);
        let w = slowest_decay_rate(&s).unwrap();
        assert!((w - 2.031).abs() < 1e-3, "{w}");
        let raw = assemble_transient(&benchmark(), &mesh, EnrichmentKind::QuadraticBubble, false)
            .unwrap();
        assert_eq!(raw.bubble[0], -c);
    }

    #[test]
    fn structure_on_finer_meshes() {
        let mesh = uniform_mesh(0.0, PI, 7).unwrap();
        let s =
            assemble_transient(&benchmark(), &mesh, EnrichmentKind::QuadraticBubble, false).unwrap();
        assert_eq!(s.dim(), 6);
        assert!(s.mass.is_symmetric(1e-15) && s.stiffness.is_symmetric(1e-15));
        assert!(s.mass.is_positive_definite());
        let w = slowest_decay_rate(&s).unwrap();
        assert!(w > 2.0 && w < 2.1, "{w}");
    }

    #[test]
    fn zero_state_stays_zero() {
        let mesh = uniform_mesh(0.0, PI, 4).unwrap();
        let s = assemble_transient(&benchmark(), &mesh, EnrichmentKind::Linear, false).unwrap();
        assert_eq!(step_trapezoidal(&s, &[0.0; 3], 0.1).unwrap(), vec![0.0; 3]);
        assert!(step_trapezoidal(&s, &[0.0; 3], 0.0).is_err());
    }

    #[test]
    fn scalar_recurrence() {
        let mesh = uniform_mesh(0.0, PI, 2).unwrap();
        let s = assemble_transient(&benchmark(), &mesh, EnrichmentKind::Linear, false).unwrap();
        let w = slowest_decay_rate(&s).unwrap();
        let dt = 0.05;
        let g = (1.0 - w * dt / 2.0) / (1.0 + w * dt / 2.0);
        let mut a = vec![1.0];
        for n in 1..=20 {
            a = step_trapezoidal(&s, &a, dt).unwrap();
            assert!((a[0] - libm::pow(g, n as f64)).abs() < 1e-14);
        }
    }

    #[test]
    fn cubic_transient_is_rejected() {
        let mesh = uniform_mesh(0.0, PI, 2).unwrap();
        assert!(assemble_transient(&benchmark(), &mesh, EnrichmentKind::CubicBubble, false).is_err());
    }

    #[test]
    fn trajectory_time_lookup() {
        let mesh = uniform_mesh(0.0, PI, 2).unwrap();
        let tr = solve_transient(&benchmark(), &mesh, EnrichmentKind::Linear, 0.3, 1.0, false)
            .unwrap();
        assert_eq!(tr.times.len(), 5);
        assert_eq!(*tr.times.last().unwrap(), 1.0);
        assert_eq!(tr.nearest(0.26), 1);
        assert!(tr.eval(1.0, 2.0).is_err());
        let thin = solve_transient_with(
            &benchmark(),
            &mesh,
            EnrichmentKind::Linear,
            0.01,
            1.0,
            false,
            TransientOptions { stride: 10 },
        )
        .unwrap();
        assert_eq!(thin.times.len(), 11);
    }
}
