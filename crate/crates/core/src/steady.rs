//! Enriched shape functions, element stiffness matrices, global assembly and
//! the steady solve.
//!
//! With Galerkin weights equal to the enriched trials, the element matrix is
//!
//! ```text
//! K_ij = -eps int N_i' N_j' + kappa int N_i N_j' + lambda int N_i N_j
//! ```
//!
//! and the only boundary contribution is `-eps [w u']` at the domain ends.

use alloc::vec;
use alloc::vec::Vec;

use crate::bubble::{ls_bubble_weights, BubbleWeights, EnrichmentAB};
use crate::error::{Error, Result};
use crate::linalg::{solve_tridiagonal, Tridiagonal, TridiagonalSystem};
use crate::poly::Polynomial;
use crate::problem::{
    BoundaryCondition, EnrichmentKind, Mesh1D, SolutionField, SteadyProblem,
    TransportCoefficients,
};
use crate::quadrature::{gauss_rule, CUBIC_ASSEMBLY_POINTS, MAX_POINTS, QUADRATIC_ASSEMBLY_POINTS};

/// Enriched nodal shapes on `[0, l]`.
///
/// `N_I = (l - x)/l + sum_k left_k x^k (l - x)` and
/// `N_II = x/l + sum_k right_k x^k (l - x)`. For the quadratic bubble
/// `left_1 = A - B` and `right_1 = A + B`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeFunctions {
    weights: BubbleWeights,
    left: Polynomial,
    right: Polynomial,
    left_d: Polynomial,
    right_d: Polynomial,
}

impl ShapeFunctions {
    pub fn from_weights(weights: BubbleWeights) -> Self {
        let l = weights.length;
        let enrich = |hat: Polynomial, cs: &[f64]| {
            cs.iter()
                .enumerate()
                .fold(hat, |acc, (k, &c)| &acc + &Polynomial::bubble(k + 1, l).scale(c))
        };
        let left = enrich(Polynomial::hat_left(l), &weights.left);
        let right = enrich(Polynomial::hat_right(l), &weights.right);
        ShapeFunctions {
            left_d: left.derivative(),
            right_d: right.derivative(),
            left,
            right,
            weights,
        }
    }

    /// Plain hat functions.
    pub fn linear(l: f64) -> Self {
        ShapeFunctions::from_weights(BubbleWeights::linear(l))
    }

    pub fn length(&self) -> f64 {
        self.weights.length
    }

    pub fn weights(&self) -> &BubbleWeights {
        &self.weights
    }

    /// `A` (zero for linear elements).
    pub fn a_coef(&self) -> f64 {
        self.ab().map_or(0.0, |ab| ab.a_coef)
    }

    /// `B` (zero for linear elements).
    pub fn b_coef(&self) -> f64 {
        self.ab().map_or(0.0, |ab| ab.b_coef)
    }

    fn ab(&self) -> Option<EnrichmentAB> {
        EnrichmentAB::from_weights(&self.weights).ok()
    }

    pub fn n_left(&self, x: f64) -> f64 {
        self.left.eval(x)
    }

    pub fn n_right(&self, x: f64) -> f64 {
        self.right.eval(x)
    }

    pub fn dn_left(&self, x: f64) -> f64 {
        self.left_d.eval(x)
    }

    pub fn dn_right(&self, x: f64) -> f64 {
        self.right_d.eval(x)
    }

    pub fn left_polynomial(&self) -> &Polynomial {
        &self.left
    }

    pub fn right_polynomial(&self) -> &Polynomial {
        &self.right
    }

    /// Bubble coefficients for nodal data `(u0, ul)`.
    pub fn bubble_coeffs(&self, u0: f64, ul: f64) -> Vec<f64> {
        self.weights.coefficients(u0, ul)
    }
}

/// Enriched shapes for one element.
pub fn shape_functions(
    coeffs: &TransportCoefficients,
    l: f64,
    enrichment: EnrichmentKind,
) -> Result<ShapeFunctions> {
    if !(l > 0.0) {
        return Err(Error::Argument("element length must be positive"));
    }
    match enrichment.normalized()? {
        EnrichmentKind::Linear => Ok(ShapeFunctions::linear(l)),
        kind => Ok(ShapeFunctions::from_weights(ls_bubble_weights(coeffs, l, kind.order())?)),
    }
}

/// Element matrix `[[E, F], [G, H]]`; row = weight, column = trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementStiffness {
    pub entries: [[f64; 2]; 2],
}

impl ElementStiffness {
    pub fn e(&self) -> f64 {
        self.entries[0][0]
    }
    pub fn f(&self) -> f64 {
        self.entries[0][1]
    }
    pub fn g(&self) -> f64 {
        self.entries[1][0]
    }
    pub fn h(&self) -> f64 {
        self.entries[1][1]
    }
}

/// Gauss points that integrate the element products exactly.
pub fn default_quad_points(enrichment: EnrichmentKind) -> usize {
    match enrichment.order() {
        1 => 2,
        2 => QUADRATIC_ASSEMBLY_POINTS,
        3 => CUBIC_ASSEMBLY_POINTS,
        p => (p + 2).min(MAX_POINTS),
    }
}

/// Element matrix by Gauss quadrature of the weak-form integrals.
pub fn element_stiffness_quadrature(
    coeffs: &TransportCoefficients,
    shapes: &ShapeFunctions,
    n_quad: usize,
) -> Result<ElementStiffness> {
    let rule = gauss_rule(n_quad)?;
    let (e, k, lam) = (coeffs.epsilon(), coeffs.kappa(), coeffs.lambda());
    let mut m = [[0.0; 2]; 2];
    for (x, w) in rule.mapped(0.0, shapes.length()) {
        let n = [shapes.n_left(x), shapes.n_right(x)];
        let dn = [shapes.dn_left(x), shapes.dn_right(x)];
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += w * (-e * dn[i] * dn[j] + k * n[i] * dn[j] + lam * n[i] * n[j]);
            }
        }
    }
    Ok(ElementStiffness { entries: m })
}

/// Closed-form quadratic-bubble element matrix in terms of `A` and `B`.
pub fn element_stiffness_closed(
    coeffs: &TransportCoefficients,
    l: f64,
    a: f64,
    b: f64,
) -> ElementStiffness {
    let (e, k, lam) = (coeffs.epsilon(), coeffs.kappa(), coeffs.lambda());
    let l2 = l * l;
    let l3 = l2 * l;
    let l4 = l2 * l2;
    let l6 = l4 * l2;
    let (amb, apb, a2b2) = (a - b, a + b, a * a - b * b);
    let ee = (-30.0 * e + 10.0 * lam * l2 - 15.0 * k * l + lam * l6 * amb * amb
        + 5.0 * lam * l4 * amb
        - 10.0 * e * l4 * amb * amb)
        / (30.0 * l);
    let ff = (60.0 * e + 10.0 * lam * l2 + 30.0 * k * l + 2.0 * lam * l6 * a2b2
        + 10.0 * lam * l4 * a
        + 20.0 * k * l3 * a
        - 20.0 * e * l4 * a2b2)
        / (60.0 * l);
    let gg = (60.0 * e + 10.0 * lam * l2 - 30.0 * k * l + 2.0 * lam * l6 * a2b2
        + 10.0 * lam * l4 * a
        - 20.0 * k * l3 * a
        - 20.0 * e * l4 * a2b2)
        / (60.0 * l);
    let hh = (-30.0 * e + 10.0 * lam * l2 + 15.0 * k * l + lam * l6 * apb * apb
        + 5.0 * lam * l4 * apb
        - 10.0 * e * l4 * apb * apb)
        / (30.0 * l);
    ElementStiffness { entries: [[ee, ff], [gg, hh]] }
}

/// Reduced global system over the non-Dirichlet nodes.
///
/// Dirichlet rows are replaced by the prescribed value and their columns moved
/// into the neighbours' right-hand side; the trivial rows are then dropped, so
/// `system` covers nodes `free.0 .. free.1` only.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyAssembly {
    pub system: TridiagonalSystem,
    pub free: (usize, usize),
    pub dirichlet: [Option<f64>; 2],
    pub shapes: Vec<ShapeFunctions>,
    /// Elements whose enrichment degenerated and fell back to linear shapes.
    pub fallbacks: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SteadyOptions {
    /// Gauss points per element; `None` picks [`default_quad_points`].
    pub quad_points: Option<usize>,
}

pub fn assemble_steady(
    problem: &SteadyProblem,
    mesh: &Mesh1D,
    enrichment: EnrichmentKind,
) -> Result<SteadyAssembly> {
    assemble_steady_with(problem, mesh, enrichment, SteadyOptions::default())
}

pub fn assemble_steady_with(
    problem: &SteadyProblem,
    mesh: &Mesh1D,
    enrichment: EnrichmentKind,
    options: SteadyOptions,
) -> Result<SteadyAssembly> {
    if !problem.bc_left.is_dirichlet() && !problem.bc_right.is_dirichlet() {
        return Err(Error::IllPosed("at least one boundary condition must be Dirichlet"));
    }
    if !mesh.covers(problem.a, problem.b) {
        return Err(Error::Argument("mesh does not span the problem domain"));
    }
    let coeffs = &problem.coefficients;
    let n_quad = options.quad_points.unwrap_or_else(|| default_quad_points(enrichment));
    let n_nodes = mesh.node_count();
    let mut full = Tridiagonal::zeros(n_nodes);
    let mut rhs = vec![0.0; n_nodes];
    let mut shapes = Vec::with_capacity(mesh.element_count());
    let mut fallbacks = Vec::new();

    for j in 0..mesh.element_count() {
        let l = mesh.element_length(j);
        let s = match shape_functions(coeffs, l, enrichment) {
            Ok(s) => s,
            Err(Error::DegenerateOperator { .. }) => {
                fallbacks.push(j);
                ShapeFunctions::linear(l)
            }
            Err(e) => return Err(e),
        };
        let k = element_stiffness_quadrature(coeffs, &s, n_quad)?;
        full.add_block(j, &k.entries);
        shapes.push(s);
    }

    let eps = coeffs.epsilon();
    let last = n_nodes - 1;
    let mut dirichlet = [None, None];
    match problem.bc_left {
        BoundaryCondition::Dirichlet(v) => dirichlet[0] = Some(v),
        BoundaryCondition::NeumannFlux(g) => rhs[0] += eps * g,
    }
    match problem.bc_right {
        BoundaryCondition::Dirichlet(v) => dirichlet[1] = Some(v),
        BoundaryCondition::NeumannFlux(g) => rhs[last] -= eps * g,
    }
    if let Some(v) = dirichlet[0] {
        rhs[1] -= full.sub[0] * v;
    }
    if let Some(v) = dirichlet[1] {
        rhs[last - 1] -= full.sup[last - 1] * v;
    }
    let start = usize::from(dirichlet[0].is_some());
    let end = n_nodes - usize::from(dirichlet[1].is_some());
    let (start, end) = if start > end { (start, start) } else { (start, end) };
    let system =
        TridiagonalSystem { matrix: full.principal_block(start, end), rhs: rhs[start..end].to_vec() };
    Ok(SteadyAssembly { system, free: (start, end), dirichlet, shapes, fallbacks })
}

/// Solved steady field plus any elements that fell back to linear shapes.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadySolution {
    pub field: SolutionField,
    pub fallbacks: Vec<usize>,
}

pub fn solve_steady(
    problem: &SteadyProblem,
    mesh: &Mesh1D,
    enrichment: EnrichmentKind,
) -> Result<SolutionField> {
    Ok(solve_steady_with(problem, mesh, enrichment, SteadyOptions::default())?.field)
}

pub fn solve_steady_with(
    problem: &SteadyProblem,
    mesh: &Mesh1D,
    enrichment: EnrichmentKind,
    options: SteadyOptions,
) -> Result<SteadySolution> {
    let asm = assemble_steady_with(problem, mesh, enrichment, options)?;
    let free = solve_tridiagonal(&asm.system)?;
    let mut u = vec![0.0; mesh.node_count()];
    u[asm.free.0..asm.free.1].copy_from_slice(&free);
    if let Some(v) = asm.dirichlet[0] {
        u[0] = v;
    }
    if let Some(v) = asm.dirichlet[1] {
        u[mesh.node_count() - 1] = v;
    }
    let kind = enrichment.normalized()?;
    let bubbles = if kind == EnrichmentKind::Linear {
        Vec::new()
    } else {
        asm.shapes
            .iter()
            .enumerate()
            .map(|(j, s)| {
                let mut c = s.bubble_coeffs(u[j], u[j + 1]);
                c.resize(kind.bubble_count(), 0.0);
                c
            })
            .collect()
    };
    let field = SolutionField::new(mesh.clone(), u, kind, bubbles)?;
    Ok(SteadySolution { field, fallbacks: asm.fallbacks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::uniform_mesh;

    fn tc(e: f64, k: f64, lam: f64) -> TransportCoefficients {
        TransportCoefficients::new(e, k, lam).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn shapes_interpolate_nodes() {
        let s = shape_functions(&tc(-0.3, 2.0, 1.5), 0.8, EnrichmentKind::QuadraticBubble).unwrap();
        assert_eq!(s.n_left(0.0), 1.0);
        assert_eq!(s.n_right(0.0), 0.0);
        assert!(s.n_left(0.8).abs() < 1e-15);
        assert!((s.n_right(0.8) - 1.0).abs() < 1e-15);
        let l: f64 = 0.8;
        let mid = s.n_left(l / 2.0) + s.n_right(l / 2.0);
        assert!(close(mid, 1.0 + 2.0 * s.a_coef() * l * l / 4.0, 1e-14));
    }

    #[test]
    fn linear_shapes_are_hats() {
        let s = shape_functions(&tc(-1.0, 0.0, 1.0), 2.0, EnrichmentKind::Linear).unwrap();
        assert_eq!(s.n_left(1.0), 0.5);
        assert_eq!(s.n_right(1.0), 0.5);
        assert_eq!((s.a_coef(), s.b_coef()), (0.0, 0.0));
    }

    #[test]
    fn reaction_diffusion_shape_midpoint() {
        let c = tc(-0.01, 0.0, 1.0);
        let s = shape_functions(&c, 0.2, EnrichmentKind::QuadraticBubble).unwrap();
        let a = crate::bubble::quadratic_ab(&c, 0.2).unwrap().a_coef;
        assert!(close(s.n_left(0.1), 0.5 + a * 0.01, 1e-12));
    }

    #[test]
    fn linear_textbook_matrices() {
        let d = ShapeFunctions::linear(1.0);
        let k = element_stiffness_quadrature(&tc(-1.0, 0.0, 0.0), &d, 2).unwrap();
        for (got, want) in k.entries.iter().flatten().zip([1.0, -1.0, -1.0, 1.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        let k = element_stiffness_quadrature(&tc(0.0, 1.0, 0.0), &d, 2).unwrap();
        for (got, want) in k.entries.iter().flatten().zip([-0.5, 0.5, -0.5, 0.5]) {
            assert!((got - want).abs() < 1e-15);
        }
        let c = element_stiffness_closed(&tc(-1.0, 0.0, 0.0), 1.0, 0.0, 0.0);
        assert_eq!(c.entries, [[1.0, -1.0], [-1.0, 1.0]]);
        let (e, kap, lam, l) = (-0.3, 0.9, 2.0, 0.4);
        let c = element_stiffness_closed(&tc(e, kap, lam), l, 0.0, 0.0);
        assert!(close(c.e(), -e / l + lam * l / 3.0 - kap / 2.0, 1e-14));
    }

    #[test]
    fn closed_form_matches_quadrature() {
        for &(e, k, lam, l) in
            &[(-0.01, 0.0, 1.0, 0.2), (-1.0, 0.0, 1.0, core::f64::consts::FRAC_PI_2), (-0.5, 3.0, 2.0, 0.7)]
        {
            let c = tc(e, k, lam);
            let s = shape_functions(&c, l, EnrichmentKind::QuadraticBubble).unwrap();
            let q = element_stiffness_quadrature(&c, &s, 4).unwrap();
            let cf = element_stiffness_closed(&c, l, s.a_coef(), s.b_coef());
            for (a, b) in q.entries.iter().flatten().zip(cf.entries.iter().flatten()) {
                assert!(close(*a, *b, 1e-12), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn both_dirichlet_two_elements_is_scalar() {
        let p = SteadyProblem::new(
            tc(-1.0, 0.0, 1.0),
            0.0,
            1.0,
            BoundaryCondition::Dirichlet(1.0),
            BoundaryCondition::Dirichlet(2.0),
        )
        .unwrap();
        let asm = assemble_steady(&p, &uniform_mesh(0.0, 1.0, 2).unwrap(), EnrichmentKind::Linear)
            .unwrap();
        assert_eq!(asm.system.dim(), 1);
        assert_eq!(asm.free, (1, 2));
    }

    #[test]
    fn pure_diffusion_is_exact() {
        let p = SteadyProblem::new(
            tc(-2.0, 0.0, 0.0),
            1.0,
            3.0,
            BoundaryCondition::Dirichlet(0.5),
            BoundaryCondition::Dirichlet(-1.5),
        )
        .unwrap();
        for kind in [EnrichmentKind::Linear, EnrichmentKind::QuadraticBubble, EnrichmentKind::CubicBubble] {
            let mesh = Mesh1D::new(vec![1.0, 1.3, 1.35, 2.2, 3.0]).unwrap();
            let f = solve_steady(&p, &mesh, kind).unwrap();
            for (x, u) in mesh.nodes().iter().zip(f.nodal_values()) {
                let exact = 0.5 + (-2.0) * (x - 1.0) / 2.0;
                assert!((u - exact).abs() < 1e-12);
            }
            assert_eq!(f.nodal_values()[0], 0.5);
            assert_eq!(f.nodal_values()[4], -1.5);
        }
    }

    #[test]
    fn neumann_flux_enters_rhs() {
        // -u'' = 0, u(0) = 1, u'(1) = 2  ->  u = 1 + 2x
        let p = SteadyProblem::new(
            tc(-1.0, 0.0, 0.0),
            0.0,
            1.0,
            BoundaryCondition::Dirichlet(1.0),
            BoundaryCondition::NeumannFlux(2.0),
        )
        .unwrap();
        let mesh = uniform_mesh(0.0, 1.0, 4).unwrap();
        let f = solve_steady(&p, &mesh, EnrichmentKind::Linear).unwrap();
        for (x, u) in mesh.nodes().iter().zip(f.nodal_values()) {
            assert!((u - (1.0 + 2.0 * x)).abs() < 1e-12);
        }
        // mirrored: flux on the left
        let p = SteadyProblem::new(
            tc(-1.0, 0.0, 0.0),
            0.0,
            1.0,
            BoundaryCondition::NeumannFlux(2.0),
            BoundaryCondition::Dirichlet(3.0),
        )
        .unwrap();
        let f = solve_steady(&p, &mesh, EnrichmentKind::Linear).unwrap();
        for (x, u) in mesh.nodes().iter().zip(f.nodal_values()) {
            assert!((u - (1.0 + 2.0 * x)).abs() < 1e-12);
        }
    }

    #[test]
    fn mesh_must_cover_domain() {
        let p = SteadyProblem::new(
            tc(-1.0, 0.0, 1.0),
            0.0,
            2.0,
            BoundaryCondition::Dirichlet(1.0),
            BoundaryCondition::Dirichlet(0.0),
        )
        .unwrap();
        let mesh = uniform_mesh(0.0, 1.0, 3).unwrap();
        assert!(assemble_steady(&p, &mesh, EnrichmentKind::Linear).is_err());
    }
}
