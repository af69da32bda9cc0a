//! Shared domain types: operator coefficients, meshes, boundary conditions,
//! problem definitions and the evaluable solution field.

use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::poly::Polynomial;

/// Coefficients of `eps * u'' + kappa * u' + lambda * u = 0`.
///
/// Signs are stored as given. The benchmark problems use a negative `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportCoefficients {
    epsilon: f64,
    kappa: f64,
    lambda: f64,
}

impl TransportCoefficients {
    pub fn new(epsilon: f64, kappa: f64, lambda: f64) -> Result<Self> {
        if !(epsilon.is_finite() && kappa.is_finite() && lambda.is_finite()) {
            return Err(Error::Argument("transport coefficients must be finite"));
        }
        if epsilon == 0.0 && kappa == 0.0 && lambda == 0.0 {
            return Err(Error::Argument("at least one transport coefficient must be nonzero"));
        }
        Ok(TransportCoefficients { epsilon, kappa, lambda })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Strictly increasing node coordinates `x_0 < x_1 < ... < x_N`, `N >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
}

impl Mesh1D {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Argument("a mesh needs at least two nodes"));
        }
        if nodes.iter().any(|x| !x.is_finite()) {
            return Err(Error::Argument("mesh nodes must be finite"));
        }
        if nodes.windows(2).any(|w| w[1] - w[0] <= 0.0) {
            return Err(Error::Argument("mesh nodes must be strictly increasing"));
        }
        Ok(Mesh1D { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// `l_j = x_{j+1} - x_j`
    pub fn element_length(&self, j: usize) -> f64 {
        self.nodes[j + 1] - self.nodes[j]
    }

    pub fn start(&self) -> f64 {
        self.nodes[0]
    }

    pub fn end(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Index of the element containing `x`; interior nodes belong to the
    /// element on their right, the last node to the last element.
    pub fn locate(&self, x: f64) -> Result<usize> {
        if !(x >= self.start() && x <= self.end()) {
            return Err(Error::Domain { value: x, lo: self.start(), hi: self.end() });
        }
        let upper = self.nodes.partition_point(|&node| node <= x);
        Ok(upper.saturating_sub(1).min(self.element_count() - 1))
    }

    /// True when the mesh spans `[a, b]` up to rounding.
    pub fn covers(&self, a: f64, b: f64) -> bool {
        let tol = 1e-12 * (b - a).abs().max(a.abs()).max(b.abs()).max(1.0);
        (self.start() - a).abs() <= tol && (self.end() - b).abs() <= tol
    }
}

/// `n_elements + 1` equally spaced nodes on `[a, b]`.
pub fn uniform_mesh(a: f64, b: f64, n_elements: usize) -> Result<Mesh1D> {
    if n_elements < 1 {
        return Err(Error::Argument("a uniform mesh needs at least one element"));
    }
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::Argument("uniform mesh needs finite a < b"));
    }
    let h = (b - a) / n_elements as f64;
    let nodes = (0..=n_elements)
        .map(|j| if j == n_elements { b } else { a + j as f64 * h })
        .collect();
    Mesh1D::new(nodes)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryCondition {
    Dirichlet(f64),
    /// Prescribed `du/dx` at the boundary.
    NeumannFlux(f64),
}

impl BoundaryCondition {
    pub fn value(&self) -> f64 {
        match *self {
            BoundaryCondition::Dirichlet(v) | BoundaryCondition::NeumannFlux(v) => v,
        }
    }

    pub fn is_dirichlet(&self) -> bool {
        matches!(self, BoundaryCondition::Dirichlet(_))
    }
}

/// Which bubble space enriches the linear element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnrichmentKind {
    Linear,
    QuadraticBubble,
    CubicBubble,
    /// Bubbles `x^k (l - x)` for `k = 1..order`.
    PolynomialBubble(usize),
}

impl EnrichmentKind {
    /// Polynomial order of the enriched trial (1 for plain linear elements).
    pub fn order(&self) -> usize {
        match *self {
            EnrichmentKind::Linear => 1,
            EnrichmentKind::QuadraticBubble => 2,
            EnrichmentKind::CubicBubble => 3,
            EnrichmentKind::PolynomialBubble(p) => p,
        }
    }

    /// Number of bubble coefficients per element.
    pub fn bubble_count(&self) -> usize {
        self.order() - 1
    }

    /// Collapses aliases: `PolynomialBubble(2)` becomes `QuadraticBubble`, and so on.
    pub fn normalized(&self) -> Result<Self> {
        match self.order() {
            0 => Err(Error::Argument("bubble order must be at least 2")),
            1 => Ok(EnrichmentKind::Linear),
            2 => Ok(EnrichmentKind::QuadraticBubble),
            3 => Ok(EnrichmentKind::CubicBubble),
            p => Ok(EnrichmentKind::PolynomialBubble(p)),
        }
    }

    pub fn label(&self) -> &'static str {
        match self.order() {
            1 => "linear",
            2 => "quadratic",
            3 => "cubic",
            _ => "polynomial",
        }
    }
}

impl fmt::Display for EnrichmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.order() {
            p if p > 3 => write!(f, "polynomial({p})"),
            _ => f.write_str(self.label()),
        }
    }
}

/// Steady problem on `[a, b]` with `f = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyProblem {
    pub coefficients: TransportCoefficients,
    pub a: f64,
    pub b: f64,
    pub bc_left: BoundaryCondition,
    pub bc_right: BoundaryCondition,
}

impl SteadyProblem {
    pub fn new(
        coefficients: TransportCoefficients,
        a: f64,
        b: f64,
        bc_left: BoundaryCondition,
        bc_right: BoundaryCondition,
    ) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::Argument("steady domain needs finite a < b"));
        }
        if !(bc_left.value().is_finite() && bc_right.value().is_finite()) {
            return Err(Error::Argument("boundary values must be finite"));
        }
        if !bc_left.is_dirichlet() && !bc_right.is_dirichlet() {
            return Err(Error::IllPosed("at least one boundary condition must be Dirichlet"));
        }
        Ok(SteadyProblem { coefficients, a, b, bc_left, bc_right })
    }
}

pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `u_t + eps * u_xx + lambda * u = 0` on `[a, b]`, `u = 0` at both ends,
/// `u(x, 0) = initial(x)`. There is no convection term.
#[derive(Clone)]
pub struct TransientProblem {
    epsilon: f64,
    lambda: f64,
    a: f64,
    b: f64,
    initial: Profile,
}

impl TransientProblem {
    pub fn new(epsilon: f64, lambda: f64, a: f64, b: f64, initial: Profile) -> Result<Self> {
        if !(epsilon.is_finite() && lambda.is_finite()) {
            return Err(Error::Argument("transient coefficients must be finite"));
        }
        if epsilon == 0.0 && lambda == 0.0 {
            return Err(Error::Argument("at least one transient coefficient must be nonzero"));
        }
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::Argument("transient domain needs finite a < b"));
        }
        let scale = (1..8)
            .map(|k| initial(a + (b - a) * k as f64 / 8.0).abs())
            .fold(1.0, f64::max);
        let tol = 1e-9 * scale;
        if initial(a).abs() > tol || initial(b).abs() > tol {
            return Err(Error::Argument(
                "initial profile must vanish at both ends (homogeneous Dirichlet)",
            ));
        }
        Ok(TransientProblem { epsilon, lambda, a, b, initial })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn initial(&self, x: f64) -> f64 {
        (self.initial)(x)
    }
}

impl fmt::Debug for TransientProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransientProblem")
            .field("epsilon", &self.epsilon)
            .field("lambda", &self.lambda)
            .field("a", &self.a)
            .field("b", &self.b)
            .finish_non_exhaustive()
    }
}

/// Nodal values plus per-element bubble coefficients.
///
/// On element `j` the field is the linear interpolant of `u_j`, `u_{j+1}` plus
/// `sum_k c_{j,k} s^k (l_j - s)` with `s = x - x_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    mesh: Mesh1D,
    nodal_values: Vec<f64>,
    enrichment: EnrichmentKind,
    bubble_coeffs: Vec<Vec<f64>>,
}

impl SolutionField {
    /// `bubble_coeffs` may be empty for a linear field; otherwise it holds one
    /// coefficient vector per element.
    pub fn new(
        mesh: Mesh1D,
        nodal_values: Vec<f64>,
        enrichment: EnrichmentKind,
        bubble_coeffs: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if nodal_values.len() != mesh.node_count() {
            return Err(Error::Argument("one nodal value per mesh node is required"));
        }
        if !bubble_coeffs.is_empty() && bubble_coeffs.len() != mesh.element_count() {
            return Err(Error::Argument("one bubble coefficient vector per element is required"));
        }
        Ok(SolutionField { mesh, nodal_values, enrichment, bubble_coeffs })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn nodal_values(&self) -> &[f64] {
        &self.nodal_values
    }

    pub fn enrichment(&self) -> EnrichmentKind {
        self.enrichment
    }

    pub fn bubble_coeffs(&self, element: usize) -> &[f64] {
        self.bubble_coeffs.get(element).map_or(&[], |c| c.as_slice())
    }

    /// Field value at `x`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let j = self.mesh.locate(x)?;
        Ok(self.eval_in_element(j, x))
    }

    /// Field value at `x` using element `j`'s representation.
    pub fn eval_in_element(&self, j: usize, x: f64) -> f64 {
        let x0 = self.mesh.nodes()[j];
        let l = self.mesh.element_length(j);
        let s = x - x0;
        let u0 = self.nodal_values[j];
        let ul = self.nodal_values[j + 1];
        let linear = (l - s) / l * u0 + s / l * ul;
        linear + bubble_sum(self.bubble_coeffs(j), s, l)
    }

    /// Local polynomial of element `j` in `s = x - x_j`.
    pub fn element_polynomial(&self, j: usize) -> Polynomial {
        let l = self.mesh.element_length(j);
        let mut p = &Polynomial::hat_left(l).scale(self.nodal_values[j])
            + &Polynomial::hat_right(l).scale(self.nodal_values[j + 1]);
        for (k, &c) in self.bubble_coeffs(j).iter().enumerate() {
            p = &p + &Polynomial::bubble(k + 1, l).scale(c);
        }
        p
    }
}

/// `sum_k c_k s^(k+1) (l - s)`
pub(crate) fn bubble_sum(coeffs: &[f64], s: f64, l: f64) -> f64 {
    let mut power = s;
    let mut sum = 0.0;
    for &c in coeffs {
        sum += c * power;
        power *= s;
    }
    sum * (l - s)
}
