use std::f64::consts::PI;

use proptest::prelude::*;

use bubblefem_core::bubble::{
    apply_operator, ls_bubble, quadratic_ab, residual, residual_functional, transient_coefficient,
};
use bubblefem_core::bubble2d::{bubble_2d_coefficient, residual_functional_2d, Corners};
use bubblefem_core::bench::transient_benchmark_problem;
use bubblefem_core::poly::Polynomial;
use bubblefem_core::steady::{
    element_stiffness_closed, element_stiffness_quadrature, shape_functions, solve_steady,
};
use bubblefem_core::transient::{assemble_transient, transient_element_matrices, TrapezoidalStepper};
use bubblefem_core::{
    uniform_mesh, BoundaryCondition, EnrichmentKind, Mesh1D, SolutionField, SteadyProblem,
    TransportCoefficients,
};

fn rel(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}

fn coefficients() -> impl Strategy<Value = TransportCoefficients> {
    (-10.0..-1e-3f64, -10.0..10.0f64, 0.0..10.0f64)
        .prop_map(|(e, k, l)| TransportCoefficients::new(e, k, l).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gradient_vanishes_at_minimiser(
        c in coefficients(), l in 0.01..10.0f64, u0 in -2.0..2.0f64, ul in -2.0..2.0f64,
        order in 2usize..5,
    ) {
        let s = ls_bubble(&c, l, u0, ul, order).unwrap();
        let j = |v: &[f64]| residual_functional(&c, l, u0, ul, v).unwrap();
        let j0 = j(&s.coeffs);
        for k in 0..s.coeffs.len() {
            // scale-aware central difference of dJ/dc_k relative to the
            // curvature scale d2J/dc_k2 * h
            let h = 1e-4 * (1.0 + s.coeffs[k].abs());
            let mut p = s.coeffs.clone();
            let mut m = s.coeffs.clone();
            p[k] += h;
            m[k] -= h;
            let (jp, jm) = (j(&p), j(&m));
            let grad = (jp - jm) / (2.0 * h);
            let curv = (jp - 2.0 * j0 + jm) / (h * h);
            prop_assert!(grad.abs() <= 1e-8 * (curv.abs() * (1.0 + s.coeffs[k].abs())).max(j0).max(1e-300) + 1e-12,
                "k={} grad={} curv={} j0={}", k, grad, curv, j0);
        }
    }

    #[test]
    fn residual_is_orthogonal_to_bubble_images(
        c in coefficients(), l in 0.01..5.0f64, u0 in -2.0..2.0f64, ul in -2.0..2.0f64,
        order in 2usize..5,
    ) {
        let s = ls_bubble(&c, l, u0, ul, order).unwrap();
        let r = residual(&c, l, u0, ul, &s.coeffs);
        // rounding in the normal equations scales with the right-hand side
        // L(u_lin), which can dwarf a well-fitted residual
        let lin = residual(&c, l, u0, ul, &[]);
        let lin_sq = (&lin * &lin).integrate(0.0, l).max((&r * &r).integrate(0.0, l));
        for k in 1..order {
            let lb = apply_operator(&c, &Polynomial::bubble(k, l));
            let ip = (&r * &lb).integrate(0.0, l);
            let scale = (lin_sq * (&lb * &lb).integrate(0.0, l)).sqrt();
            prop_assert!(ip.abs() <= 1e-9 * scale.max(1e-300) + 1e-14, "k={} ip={} scale={}", k, ip, scale);
        }
    }

    #[test]
    fn ab_closed_form_matches_normal_equations(
        c in coefficients(), l in 0.01..5.0f64, u0 in -2.0..2.0f64, ul in -2.0..2.0f64,
    ) {
        let ab = quadratic_ab(&c, l).unwrap();
        let ls = ls_bubble(&c, l, u0, ul, 2).unwrap().coeffs[0];
        let scale = (ab.a_coef.abs() + ab.b_coef.abs()) * (u0.abs() + ul.abs());
        prop_assert!((ab.coefficient(u0, ul) - ls).abs() <= 1e-12 * scale.max(1e-300) + 1e-300);
    }

    #[test]
    fn richer_bubbles_never_increase_the_functional(
        c in coefficients(), l in 0.01..5.0f64, u0 in -2.0..2.0f64, ul in -2.0..2.0f64,
    ) {
        let zero = residual_functional(&c, l, u0, ul, &[]).unwrap();
        let q = ls_bubble(&c, l, u0, ul, 2).unwrap().residual_value;
        let cu = ls_bubble(&c, l, u0, ul, 3).unwrap().residual_value;
        let slack = 1e-12 * zero;
        prop_assert!(cu <= q + slack && q <= zero + slack);
    }

    #[test]
    fn transient_coefficient_magnitude_matches_ls(e in -10.0..-1e-3f64, l in 0.01..5.0f64) {
        let c = TransportCoefficients::new(e, 0.0, 1.0).unwrap();
        let ls = ls_bubble(&c, l, 0.0, 1.0, 2).unwrap().coeffs[0];
        let closed = transient_coefficient(e, l).unwrap();
        prop_assert!(rel(closed.abs(), ls.abs()) <= 1e-12);
        prop_assert!(rel(closed, ls) <= 1e-12);
    }

    #[test]
    fn two_d_formula_is_the_parabola_vertex(
        l in 0.1..5.0f64, h in 0.1..5.0f64,
        a in -2.0..2.0f64, b in -2.0..2.0f64, cc in -2.0..2.0f64, d in -2.0..2.0f64,
    ) {
        let corners = Corners::new(a, b, cc, d);
        let c = bubble_2d_coefficient(l, h, corners).unwrap();
        let j = |x: f64| residual_functional_2d(l, h, corners, x).unwrap();
        // sample around c so the fit does not lose digits when |c| is large
        let d = c.abs().max(1.0);
        let (jm, j0, jp) = (j(c - d), j(c), j(c + d));
        let vertex = c - d * (0.5 * (jp - jm)) / (jp + jm - 2.0 * j0);
        prop_assert!((vertex - c).abs() <= 1e-10 * c.abs().max(1.0));
        let jc = j(c);
        prop_assert!(jc <= j(c + 0.01) && jc <= j(c - 0.01));
    }

    #[test]
    fn element_matrix_closed_form_matches_quadrature(
        c in coefficients(), l in 0.01..5.0f64,
    ) {
        let s = shape_functions(&c, l, EnrichmentKind::QuadraticBubble).unwrap();
        let q = element_stiffness_quadrature(&c, &s, 4).unwrap();
        let cf = element_stiffness_closed(&c, l, s.a_coef(), s.b_coef());
        let scale = q.entries.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in q.entries.iter().flatten().zip(cf.entries.iter().flatten()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale, "{} vs {}", a, b);
        }
    }

    #[test]
    fn transient_matrices_match_quadrature(e in -10.0..-1e-3f64, l in 0.01..5.0f64, c in -5.0..5.0f64) {
        let m = transient_element_matrices(e, l, c);
        let w0 = &Polynomial::hat_left(l) + &Polynomial::bubble(1, l).scale(c);
        let w1 = &Polynomial::hat_right(l) + &Polynomial::bubble(1, l).scale(c);
        let (d0, d1) = (w0.derivative(), w1.derivative());
        let rule = bubblefem_core::quadrature::gauss_rule(4).unwrap();
        let mass_d = rule.integrate(|x| w0.eval(x) * w0.eval(x), 0.0, l);
        let mass_o = rule.integrate(|x| w0.eval(x) * w1.eval(x), 0.0, l);
        let st_d = rule.integrate(|x| -e * d0.eval(x) * d0.eval(x), 0.0, l);
        let st_o = rule.integrate(|x| -e * d0.eval(x) * d1.eval(x), 0.0, l);
        let ms = mass_d.abs().max(mass_o.abs());
        let ss = st_d.abs().max(st_o.abs());
        prop_assert!((m.mass_diag - mass_d).abs() <= 1e-12 * ms);
        prop_assert!((m.mass_off - mass_o).abs() <= 1e-12 * ms);
        prop_assert!((m.stiff_diag - st_d).abs() <= 1e-12 * ss);
        prop_assert!((m.stiff_off - st_o).abs() <= 1e-12 * ss);
        prop_assert!(m.mass_diag > m.mass_off.abs());
    }

    #[test]
    fn energy_never_grows(n in 2usize..12, dt in 1e-3..2.0f64, sign in any::<bool>()) {
        let problem = transient_benchmark_problem();
        let mesh = uniform_mesh(0.0, PI, n).unwrap();
        let s = assemble_transient(&problem, &mesh, EnrichmentKind::QuadraticBubble, sign).unwrap();
        prop_assert!(s.mass.is_positive_definite());
        let stepper = TrapezoidalStepper::new(&s, dt).unwrap();
        let mut a: Vec<f64> = mesh.nodes()[1..n].iter().map(|x| x.sin()).collect();
        let mut energy = s.energy(&a);
        for _ in 0..20 {
            a = stepper.step(&a).unwrap();
            let next = s.energy(&a);
            prop_assert!(next <= energy * (1.0 + 1e-12));
            energy = next;
        }
    }

    #[test]
    fn field_is_continuous_and_interpolates(
        n in 1usize..8, c in -3.0..3.0f64, seed in 0u64..1000,
    ) {
        let mesh = uniform_mesh(-1.0, 2.0, n).unwrap();
        let vals: Vec<f64> = (0..=n).map(|i| ((i as u64 * 7919 + seed) % 97) as f64 / 13.0).collect();
        let bubbles = (0..n).map(|j| vec![c * (j as f64 + 1.0), -c]).collect();
        let f = SolutionField::new(mesh.clone(), vals.clone(), EnrichmentKind::CubicBubble, bubbles).unwrap();
        for (x, u) in mesh.nodes().iter().zip(&vals) {
            prop_assert_eq!(f.eval(*x).unwrap(), *u);
        }
        for j in 1..n {
            let x = mesh.nodes()[j];
            let left = f.eval_in_element(j - 1, x);
            let right = f.eval_in_element(j, x);
            prop_assert!((left - right).abs() <= 1e-14 * left.abs().max(1.0));
        }
    }

    #[test]
    fn uniform_lengths_are_equal(a in -5.0..5.0f64, w in 0.1..20.0f64, n in 1usize..200) {
        let mesh = uniform_mesh(a, a + w, n).unwrap();
        let h = w / n as f64;
        for j in 0..n {
            prop_assert!((mesh.element_length(j) - h).abs() <= 1e-12 * w);
        }
    }

    #[test]
    fn pure_diffusion_flux_is_constant(
        e in -5.0..-0.1f64, alpha in -2.0..2.0f64, beta in -2.0..2.0f64,
        cuts in proptest::collection::vec(0.01..0.99f64, 1..8),
    ) {
        let mut nodes = vec![0.0, 1.0];
        nodes.extend(cuts);
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let mesh = Mesh1D::new(nodes).unwrap();
        let p = SteadyProblem::new(
            TransportCoefficients::new(e, 0.0, 0.0).unwrap(), 0.0, 1.0,
            BoundaryCondition::Dirichlet(alpha), BoundaryCondition::Dirichlet(beta),
        ).unwrap();
        let f = solve_steady(&p, &mesh, EnrichmentKind::QuadraticBubble).unwrap();
        let u = f.nodal_values();
        prop_assert_eq!(u[0], alpha);
        prop_assert_eq!(u[u.len() - 1], beta);
        let flux0 = -e * (u[1] - u[0]) / mesh.element_length(0);
        for j in 0..mesh.element_count() {
            let flux = -e * (u[j + 1] - u[j]) / mesh.element_length(j);
            prop_assert!((flux - flux0).abs() <= 1e-10);
            let x = mesh.nodes()[j];
            prop_assert!((u[j] - (alpha + (beta - alpha) * x)).abs() <= 1e-12);
        }
    }
}
