//! The acceptance criteria as runnable checks. Randomised criteria draw from a
//! seeded ChaCha stream so every run sees the same parameters.

use std::f64::consts::PI;

use bubblefem_core::bench::{
    convergence_study, exact_steady_benchmark, steady_benchmark_problem, table1, table2,
    transient_benchmark_problem, TableRow,
};
use bubblefem_core::bubble::{
    ls_bubble, quadratic_ab, reaction_diffusion_coefficient, residual_functional,
};
use bubblefem_core::bubble2d::{bubble_2d_coefficient, residual_functional_2d, Corners};
use bubblefem_core::poly::Polynomial;
use bubblefem_core::quadrature::gauss_rule;
use bubblefem_core::steady::{
    element_stiffness_closed, element_stiffness_quadrature, shape_functions, solve_steady,
};
use bubblefem_core::transient::{
    assemble_transient, element_bubble, semi_analytic_two_element, slowest_decay_rate,
    solve_transient, transient_element_matrices, TrapezoidalStepper,
};
use bubblefem_core::{
    uniform_mesh, BoundaryCondition, EnrichmentKind, Mesh1D, SolutionField, SteadyProblem,
    TransportCoefficients,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 0x5eed_b0bb1e;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{status}] {}. {}: {}", self.id, self.name, self.detail)
    }
}

type Check = Result<String, String>;

fn finish(id: u32, name: &'static str, check: Check) -> CriterionResult {
    match check {
        Ok(detail) => CriterionResult { id, name, passed: true, detail },
        Err(detail) => CriterionResult { id, name, passed: false, detail },
    }
}

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn core<T>(r: bubblefem_core::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn draw_coefficients(rng: &mut ChaCha8Rng) -> TransportCoefficients {
    TransportCoefficients::new(
        rng.gen_range(-10.0..-1e-3),
        rng.gen_range(-10.0..=10.0),
        rng.gen_range(0.0..=10.0),
    )
    .expect("nonzero epsilon")
}

pub fn run_all(seed: u64) -> Vec<CriterionResult> {
    vec![
        finish(1, "closed-form coefficients", closed_form_coefficients(seed)),
        finish(2, "transient coefficient magnitude", transient_magnitude()),
        finish(3, "two-element decay rates", decay_rates()),
        finish(4, "table reproduction", tables()),
        finish(5, "element-matrix oracle", element_matrices(seed.wrapping_add(5))),
        finish(6, "boundary-layer benchmark", boundary_layer()),
        finish(7, "2D coefficient", two_d(seed.wrapping_add(7))),
        finish(8, "property suite", properties(seed.wrapping_add(8))),
        finish(9, "figure data scope", figure_scope()),
    ]
}

/// Quadratic `A`/`B` closed form against the normal-equation minimiser, with
/// the error measured against `(|A| + |B|)(|u0| + |ul|)` so that draws with
/// `c` near zero are not amplified; plus the reaction-diffusion
/// specialisation.
fn closed_form_coefficients(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let c = draw_coefficients(&mut rng);
        let l = rng.gen_range(0.01..=5.0);
        let (u0, ul) = (rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0));
        let ab = core(quadratic_ab(&c, l))?;
        let ls = core(ls_bubble(&c, l, u0, ul, 2))?.coeffs[0];
        let scale = (ab.a_coef.abs() + ab.b_coef.abs()) * (u0.abs() + ul.abs());
        if scale > 0.0 {
            worst = worst.max((ab.coefficient(u0, ul) - ls).abs() / scale);
        }
    }
    let rd = TransportCoefficients::new(-0.01, 0.0, 1.0).expect("valid");
    let mut worst_rd = 0.0_f64;
    for _ in 0..1000 {
        let l = rng.gen_range(0.01..=5.0);
        let ls = core(ls_bubble(&rd, l, 0.0, 1.0, 2))?.coeffs[0];
        worst_rd = worst_rd.max(rel(reaction_diffusion_coefficient(l), ls));
    }
    let detail = format!("A/B worst rel {worst:.2e} (tol 1e-10); reaction-diffusion worst rel {worst_rd:.2e} (tol 1e-12)");
    if worst <= 1e-10 && worst_rd <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn transient_magnitude() -> Check {
    let c = TransportCoefficients::new(-1.0, 0.0, 1.0).expect("valid");
    let l = PI / 2.0;
    let canonical = core(ls_bubble(&c, l, 0.0, 1.0, 2))?.coeffs[0];
    let compat = core(element_bubble(-1.0, 1.0, l, true))?;
    let detail = format!("canonical {canonical:.4}, sign-compat {compat:+.4}");
    let ok = (canonical.abs() - 0.206).abs() <= 5e-4
        && (canonical - (-0.2062)).abs() < 5e-5
        && (compat - 0.2062).abs() < 5e-5;
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn decay_rates() -> Check {
    let problem = transient_benchmark_problem();
    let linear = core(semi_analytic_two_element(&problem, EnrichmentKind::Linear, false))?.rate;
    let bubble =
        core(semi_analytic_two_element(&problem, EnrichmentKind::QuadraticBubble, true))?.rate;
    let detail = format!("linear {linear:.4} (2.216), bubble {bubble:.4} (2.031), exact 2");
    let ok = (linear - 2.216).abs() <= 1e-3
        && (bubble - 2.031).abs() <= 1e-3
        && (bubble - 2.0).abs() < (linear - 2.0).abs();
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn tables() -> Check {
    let rows: Vec<TableRow> = core(table1())?.into_iter().chain(core(table2())?).collect();
    let failing: Vec<String> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.passes())
        .map(|(i, r)| format!("row {i} at {:.4}", r.coordinate))
        .collect();
    let detail = format!("{} of {} rows within 0.001", rows.len() - failing.len(), rows.len());
    if failing.is_empty() && rows.len() == 28 {
        Ok(detail)
    } else {
        Err(format!("{detail}; failing: {}", failing.join(", ")))
    }
}

fn element_matrices(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_steady = 0.0_f64;
    for _ in 0..1000 {
        let c = draw_coefficients(&mut rng);
        let l = rng.gen_range(0.01..=5.0);
        let shapes = core(shape_functions(&c, l, EnrichmentKind::QuadraticBubble))?;
        let q = core(element_stiffness_quadrature(&c, &shapes, 4))?;
        let cf = element_stiffness_closed(&c, l, shapes.a_coef(), shapes.b_coef());
        let scale = q.entries.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (a, b) in q.entries.iter().flatten().zip(cf.entries.iter().flatten()) {
            worst_steady = worst_steady.max((a - b).abs() / scale);
        }
    }
    let rule = core(gauss_rule(4))?;
    let mut worst_transient = 0.0_f64;
    for _ in 0..1000 {
        let e = rng.gen_range(-10.0..-1e-3);
        let l = rng.gen_range(0.01..=5.0);
        let c = rng.gen_range(-5.0..=5.0);
        let m = transient_element_matrices(e, l, c);
        let b = Polynomial::bubble(1, l).scale(c);
        let w0 = &Polynomial::hat_left(l) + &b;
        let w1 = &Polynomial::hat_right(l) + &b;
        let (d0, d1) = (w0.derivative(), w1.derivative());
        let q = |f: &dyn Fn(f64) -> f64| rule.integrate(f, 0.0, l);
        let mass = [q(&|x| w0.eval(x) * w0.eval(x)), q(&|x| w0.eval(x) * w1.eval(x))];
        let stiff = [q(&|x| -e * d0.eval(x) * d0.eval(x)), q(&|x| -e * d0.eval(x) * d1.eval(x))];
        let ms = mass[0].abs().max(mass[1].abs());
        let ss = stiff[0].abs().max(stiff[1].abs());
        worst_transient = worst_transient
            .max((m.mass_diag - mass[0]).abs() / ms)
            .max((m.mass_off - mass[1]).abs() / ms)
            .max((m.stiff_diag - stiff[0]).abs() / ss)
            .max((m.stiff_off - stiff[1]).abs() / ss);
    }
    let detail = format!(
        "steady E/F/G/H worst rel {worst_steady:.2e}, transient L/M/N/P worst rel {worst_transient:.2e} (tol 1e-12)"
    );
    if worst_steady <= 1e-12 && worst_transient <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn boundary_layer() -> Check {
    let problem = steady_benchmark_problem();
    let exact = |x: f64| exact_steady_benchmark(x).unwrap_or(f64::NAN);
    let kinds = [EnrichmentKind::Linear, EnrichmentKind::QuadraticBubble];
    let reports = core(convergence_study(&problem, &kinds, &[30, 50], exact))?;
    let (lin30, lin50, bub30, bub50) =
        (reports[0].nodal_linf, reports[1].nodal_linf, reports[2].nodal_linf, reports[3].nodal_linf);
    let ratio = bub50 / lin50;
    let detail = format!(
        "nodal max error: 30 el linear {lin30:.3e} bubble {bub30:.3e}; 50 el linear {lin50:.3e} bubble {bub50:.3e} (ratio {:.1}%, bound 10%)",
        100.0 * ratio
    );
    if bub30 < lin30 && bub50 < lin50 && ratio <= 0.10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn two_d(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let l = rng.gen_range(0.1..=5.0);
        let h = rng.gen_range(0.1..=5.0);
        let mut v = || rng.gen_range(-2.0..=2.0);
        let corners = Corners::new(v(), v(), v(), v());
        let c = core(bubble_2d_coefficient(l, h, corners))?;
        // J is quadratic in c: three samples around c fix the parabola
        let d = c.abs().max(1.0);
        let j = |x: f64| residual_functional_2d(l, h, corners, x);
        let (jm, j0, jp) = (core(j(c - d))?, core(j(c))?, core(j(c + d))?);
        let vertex = c - d * (0.5 * (jp - jm)) / (jp + jm - 2.0 * j0);
        worst = worst.max((vertex - c).abs() / c.abs().max(vertex.abs()).max(1e-300));
    }
    let equal = core(bubble_2d_coefficient(1.3, 0.7, Corners::new(0.4, 0.4, 0.4, 0.4)))?;
    let detail = format!("worst rel {worst:.2e} over 100 draws (tol 1e-10); equal corners give {equal}");
    if worst <= 1e-10 && equal == 0.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn properties(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    let mut parts = Vec::new();

    // bubble vanishes at the element ends
    let mut endpoint_misses = 0;
    for _ in 0..200 {
        let n = rng.gen_range(1..8);
        let mesh = core(uniform_mesh(rng.gen_range(-3.0..0.0), rng.gen_range(0.5..4.0), n))?;
        let vals: Vec<f64> = (0..=n).map(|_| rng.gen_range(-2.0..=2.0)).collect();
        let bubbles = (0..n).map(|_| (0..3).map(|_| rng.gen_range(-5.0..=5.0)).collect()).collect();
        let f = core(SolutionField::new(
            mesh.clone(),
            vals.clone(),
            EnrichmentKind::PolynomialBubble(4),
            bubbles,
        ))?;
        for j in 0..n {
            let (x0, x1) = (mesh.nodes()[j], mesh.nodes()[j + 1]);
            if f.eval_in_element(j, x0) != vals[j] || f.eval_in_element(j, x1) != vals[j + 1] {
                endpoint_misses += 1;
            }
        }
    }
    parts.push(format!("endpoint misses {endpoint_misses}"));
    if endpoint_misses > 0 {
        failures.push("bubble nonzero at an element end");
    }

    // gradient of J at the minimiser, relative to the curvature scale
    let mut worst_grad = 0.0_f64;
    let mut monotone_ok = true;
    for _ in 0..200 {
        let c = draw_coefficients(&mut rng);
        let l = rng.gen_range(0.01..=5.0);
        let (u0, ul) = (rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0));
        let order = rng.gen_range(2..5);
        let s = core(ls_bubble(&c, l, u0, ul, order))?;
        let j = |v: &[f64]| residual_functional(&c, l, u0, ul, v);
        let j0 = core(j(&s.coeffs))?;
        for k in 0..s.coeffs.len() {
            let h = 1e-4 * (1.0 + s.coeffs[k].abs());
            let mut p = s.coeffs.clone();
            let mut m = s.coeffs.clone();
            p[k] += h;
            m[k] -= h;
            let (jp, jm) = (core(j(&p))?, core(j(&m))?);
            let grad = (jp - jm) / (2.0 * h);
            let curv = (jp - 2.0 * j0 + jm) / (h * h);
            let scale = (curv.abs() * (1.0 + s.coeffs[k].abs())).max(j0).max(1e-300);
            worst_grad = worst_grad.max(grad.abs() / scale);
        }
        let zero = core(j(&[]))?;
        let q = core(ls_bubble(&c, l, u0, ul, 2))?.residual_value;
        let cu = core(ls_bubble(&c, l, u0, ul, 3))?.residual_value;
        let slack = 1e-12 * zero;
        monotone_ok &= cu <= q + slack && q <= zero + slack;
    }
    parts.push(format!("scaled gradient {worst_grad:.1e}"));
    if worst_grad > 1e-8 {
        failures.push("gradient at the minimiser above 1e-8");
    }
    if !monotone_ok {
        failures.push("J(cubic) <= J(quadratic) <= J(0) violated");
    }

    // pure diffusion reproduces the linear exact solution at the nodes
    let mut worst_pd = 0.0_f64;
    for _ in 0..100 {
        let e = rng.gen_range(-5.0..-0.1);
        let (alpha, beta) = (rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0));
        let mut nodes: Vec<f64> = (0..rng.gen_range(1..8)).map(|_| rng.gen_range(0.01..0.99)).collect();
        nodes.extend([0.0, 1.0]);
        nodes.sort_by(f64::total_cmp);
        nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let mesh = core(Mesh1D::new(nodes))?;
        let p = core(SteadyProblem::new(
            TransportCoefficients::new(e, 0.0, 0.0).expect("nonzero"),
            0.0,
            1.0,
            BoundaryCondition::Dirichlet(alpha),
            BoundaryCondition::Dirichlet(beta),
        ))?;
        let f = core(solve_steady(&p, &mesh, EnrichmentKind::QuadraticBubble))?;
        for (x, u) in mesh.nodes().iter().zip(f.nodal_values()) {
            worst_pd = worst_pd.max((u - (alpha + (beta - alpha) * x)).abs());
        }
    }
    parts.push(format!("pure diffusion {worst_pd:.1e}"));
    if worst_pd > 1e-12 {
        failures.push("pure-diffusion nodal error above 1e-12");
    }

    let orders = core(trapezoidal_orders())?;
    let observed = orders.last().copied().unwrap_or(f64::NAN);
    parts.push(format!(
        "trapezoidal orders [{}]",
        orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>().join(", ")
    ));
    if !(1.9..=2.1).contains(&observed) {
        failures.push("trapezoidal order outside [1.9, 2.1]");
    }

    let mut energy_ok = true;
    for _ in 0..50 {
        let n = rng.gen_range(2..12);
        let dt = rng.gen_range(1e-3..2.0);
        let sign = rng.gen_bool(0.5);
        let problem = transient_benchmark_problem();
        let mesh = core(uniform_mesh(0.0, PI, n))?;
        let s = core(assemble_transient(&problem, &mesh, EnrichmentKind::QuadraticBubble, sign))?;
        let stepper = core(TrapezoidalStepper::new(&s, dt))?;
        let mut a: Vec<f64> = mesh.nodes()[1..n].iter().map(|x| x.sin()).collect();
        let mut energy = s.energy(&a);
        for _ in 0..20 {
            a = core(stepper.step(&a))?;
            let next = s.energy(&a);
            energy_ok &= next <= energy * (1.0 + 1e-12);
            energy = next;
        }
    }
    if !energy_ok {
        failures.push("discrete energy increased");
    }

    let detail = parts.join("; ");
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}; {detail}", failures.join(", ")))
    }
}

/// Observed orders of the trapezoidal rule at `t = 1` on the two-element
/// bubble system, against its exact single-mode solution, for
/// `dt = 0.1, 0.05, ..., 0.1/32`.
pub fn trapezoidal_orders() -> bubblefem_core::Result<Vec<f64>> {
    let problem = transient_benchmark_problem();
    let mesh = uniform_mesh(0.0, PI, 2)?;
    let system = assemble_transient(&problem, &mesh, EnrichmentKind::QuadraticBubble, true)?;
    let rate = slowest_decay_rate(&system)?;
    let a0 = problem.initial(mesh.nodes()[1]);
    let exact = a0 * (-rate).exp();
    let mut errors = Vec::new();
    for k in 0..6 {
        let dt = 0.1 / f64::from(1u32 << k);
        let traj = solve_transient(&problem, &mesh, EnrichmentKind::QuadraticBubble, dt, 1.0, true)?;
        let last = &traj.states[traj.states.len() - 1];
        errors.push((last[1] - exact).abs());
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}

/// Figure magnitudes are not printed, so they are not targets. This checks
/// that the point sets behind both figures can be produced and are finite.
fn figure_scope() -> Check {
    let problem = steady_benchmark_problem();
    let mut points = 0;
    for kind in [EnrichmentKind::Linear, EnrichmentKind::QuadraticBubble] {
        for n in [30, 50] {
            let mesh = core(uniform_mesh(0.0, 10.0, n))?;
            let f = core(solve_steady(&problem, &mesh, kind))?;
            for i in 0..=200 {
                let v = core(f.eval(10.0 * f64::from(i) / 200.0))?;
                if !v.is_finite() {
                    return Err(format!("non-finite steady sample for {kind} at {n} elements"));
                }
                points += 1;
            }
        }
    }
    let tp = transient_benchmark_problem();
    for (kind, compat) in [(EnrichmentKind::Linear, false), (EnrichmentKind::QuadraticBubble, true)] {
        let m = core(semi_analytic_two_element(&tp, kind, compat))?;
        for i in 0..=10 {
            let v = core(m.eval(7.0 * PI / 8.0, f64::from(i) / 10.0))?;
            if !v.is_finite() {
                return Err("non-finite transient sample".into());
            }
            points += 1;
        }
    }
    Ok(format!(
        "{points} figure points produced; figure magnitudes are informational only, comparisons are covered by criteria 4 and 6"
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_line() {
        let r = CriterionResult { id: 2, name: "x", passed: false, detail: "d".into() };
        assert_eq!(r.to_string(), "[FAIL] 2. x: d");
    }

    #[test]
    fn cheap_criteria_pass() {
        assert!(transient_magnitude().is_ok());
        assert!(decay_rates().is_ok());
        assert!(tables().is_ok());
    }
}
