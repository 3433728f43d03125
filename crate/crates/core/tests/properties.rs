//! Randomized structural properties: inner-product axioms, algebraic
//! curvature symmetries, exact scaling laws, weight selection, and the
//! energy-audit machinery on synthetic series.

use std::f64::consts::PI;
use std::sync::Arc;

use curveflow_core::field::sym2_from_coords;
use curveflow_core::grid::FdOrder;
use curveflow_core::prolongation::{
    build_differences, choose_weights, gronwall_audit, Verdict,
};
use curveflow_core::tensor::kn_pair;
use curveflow_core::{ChartGrid, MetricField, TensorField};
use proptest::prelude::*;

fn grid2(n: usize) -> Arc<ChartGrid> {
    Arc::new(ChartGrid::new(&[n, n], &[1.0, 1.0], FdOrder::Four).unwrap())
}

/// Positive-definite 2×2 metric from three bounded parameters.
fn metric2(n: usize, p: [f64; 3]) -> MetricField {
    let g = sym2_from_coords(grid2(n), move |x, i, j| {
        let tau = 2.0 * PI;
        let bump = 0.05 * (tau * (x[0] + p[2] * x[1])).sin();
        match (i.min(j), i.max(j)) {
            (0, 0) => 1.0 + 0.3 * p[0] + bump,
            (1, 1) => 1.0 + 0.3 * p[1] - bump,
            _ => 0.2 * p[2],
        }
    });
    MetricField::new(g).unwrap()
}

/// Smooth symmetric field parametrized by bounded reals.
fn sym_field(n: usize, p: [f64; 3]) -> TensorField {
    sym2_from_coords(grid2(n), move |x, i, j| {
        let (a, b) = (i.min(j), i.max(j));
        let tau = 2.0 * PI;
        p[(a + b) % 3] * (tau * (x[0] * (1.0 + a as f64) - x[1] * (1.0 + 0.5 * b as f64))).cos()
            + 0.3 * p[2] * (tau * x[1]).sin()
    })
}

fn unit3(v: f64) -> impl Strategy<Value = [f64; 3]> {
    let _ = v;
    [(-1.0..1.0f64), (-1.0..1.0f64), (-1.0..1.0f64)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    /// ⟨u,v⟩ = ⟨v,u⟩ and ⟨au+w,v⟩ = a⟨u,v⟩+⟨w,v⟩ up to roundoff.
    #[test]
    fn l2_inner_is_symmetric_and_bilinear(
        pm in unit3(0.0),
        pu in unit3(0.0),
        pv in unit3(0.0),
        pw in unit3(0.0),
        a in -2.0..2.0f64,
    ) {
        let n = 8;
        let g = metric2(n, pm);
        let u = sym_field(n, pu);
        let v = sym_field(n, pv);
        let w = sym_field(n, pw);

        let uv = g.l2_inner(&u, &v).unwrap();
        let vu = g.l2_inner(&v, &u).unwrap();
        prop_assert!((uv - vu).abs() <= 1e-12 * uv.abs().max(1.0));

        let mut au_w = u.scaled(a);
        au_w.add_scaled(1.0, &w).unwrap();
        let lhs = g.l2_inner(&au_w, &v).unwrap();
        let rhs = a * uv + g.l2_inner(&w, &v).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));

        // positivity of the squared norm
        prop_assert!(g.norm_sq(&u).unwrap() >= 0.0);
    }

    /// The product of two symmetric 2-tensors has all algebraic curvature
    /// symmetries exactly (they hold term by term, so only roundoff remains).
    #[test]
    fn tensor_product_curvature_symmetries(
        pm in unit3(0.0),
        pb in unit3(0.0),
        pk in unit3(0.0),
    ) {
        let n = 8;
        let dim = 2;
        let g = metric2(n, pm);
        let b = sym_field(n, pb);
        let k = sym_field(n, pk);
        let q = kn_pair(&b, &k).unwrap();
        let scale = q.max_abs().max(1.0);
        let grid = g.grid().clone();
        for node in (0..grid.node_count()).step_by(7) {
            for i in 0..dim {
                for j in 0..dim {
                    for l in 0..dim {
                        for m in 0..dim {
                            let v = q.get(node, &[i, j, l, m]);
                            let anti01 = q.get(node, &[j, i, l, m]);
                            let anti23 = q.get(node, &[i, j, m, l]);
                            let swap = q.get(node, &[l, m, i, j]);
                            prop_assert!((v + anti01).abs() <= 1e-13 * scale);
                            prop_assert!((v + anti23).abs() <= 1e-13 * scale);
                            prop_assert!((v - swap).abs() <= 1e-13 * scale);
                            // first Bianchi for the product
                            let cyc = v
                                + q.get(node, &[j, l, i, m])
                                + q.get(node, &[l, i, j, m]);
                            prop_assert!(cyc.abs() <= 1e-13 * scale);
                        }
                    }
                }
            }
        }
    }

    /// Scaling g → c·g by a power of two leaves Γ untouched and multiplies
    /// the (0,4) curvature by c, bitwise: every float op involved is exact.
    #[test]
    fn curvature_scaling_is_bitwise_for_powers_of_two(
        pm in unit3(0.0),
        log_c in -2i32..3,
    ) {
        let n = 8;
        let c = (2.0f64).powi(log_c);
        let g = metric2(n, pm);
        let gc = MetricField::new(g.value().scaled(c)).unwrap();
        let rm = g.curvature().rm().clone();
        let rm_c = gc.curvature().rm().clone();
        for (a, b) in rm.components().iter().zip(rm_c.components()) {
            prop_assert_eq!(c * a, *b);
        }
        let rc = g.curvature().rc().clone();
        let rc_c = gc.curvature().rc().clone();
        for (a, b) in rc.components().iter().zip(rc_c.components()) {
            prop_assert_eq!(*a, *b);
        }
    }

    /// Weight selection: inside the admissible region the returned weights
    /// satisfy the strict inequalities and the closed-form expressions.
    #[test]
    fn weight_selection_formulas(
        n in 3usize..8,
        t in 0.02..0.98f64,
        scale in 0.0..4.0f64,
    ) {
        // admissible alpha: alpha > -1/(2(n-1)); sweep a band around 0
        let lo = -1.0 / (2.0 * (n as f64 - 1.0));
        let alpha = lo * (1.0 - t) * 0.98 + t * scale; // in (0.98·lo, 4)
        let w = choose_weights(alpha, n).unwrap();
        let denom = 1.0 + 2.0 * alpha * (n as f64 - 1.0);
        let r_expect = (-4.0 * alpha / denom).max(0.0);
        prop_assert!((w.r - r_expect).abs() <= 1e-12 * (1.0 + r_expect));
        prop_assert!((w.eps - 1.0 / (2.0 * (w.r + 2.0))).abs() <= 1e-12);
        prop_assert!((w.a - -2.0 * (1.0 - w.eps * (w.r + 2.0))).abs() <= 1e-12);
        prop_assert!((w.b - -2.0 * (2.0 * alpha + w.r * denom)).abs() <= 1e-12 * (1.0 + w.b.abs()));
        prop_assert!(w.satisfies_inequalities(alpha, n));
    }

    /// On a clean exponential series the audit recovers the exponent and
    /// reports no violation.
    #[test]
    fn gronwall_recovers_synthetic_exponent(
        c in -5.0..5.0f64,
        e0 in 1e-6..1.0f64,
        samples in 8usize..40,
    ) {
        let times: Vec<f64> = (0..samples).map(|i| i as f64 / samples as f64).collect();
        let energy: Vec<f64> = times.iter().map(|t| e0 * (c * t).exp()).collect();
        let report = gronwall_audit(&times, &energy, 1e-30).unwrap();
        prop_assert!(matches!(report.verdict, Verdict::Pass | Verdict::PassWithFloor));
        prop_assert!((report.c_fit - c).abs() <= 1e-6 * (1.0 + c.abs()),
            "c_fit {} vs {}", report.c_fit, c);
        prop_assert!(report.max_violation <= 1e-9);
    }

    /// A rising-then-flat series that starts at the floor must fail.
    #[test]
    fn gronwall_rejects_rise_off_floor(bump in 1e-3..1.0f64) {
        let times: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let mut energy = vec![1e-40; 10];
        for e in energy.iter_mut().skip(5) {
            *e = bump;
        }
        let report = gronwall_audit(&times, &energy, 1e-30).unwrap();
        prop_assert_eq!(report.verdict, Verdict::Fail);
    }

    /// Differences of a pair with itself vanish identically: every finite
    /// difference subtracts equal floats.
    #[test]
    fn self_differences_vanish(pm in unit3(0.0), k in 0usize..2) {
        let g = metric2(8, pm);
        let pack = build_differences(&g, &g, k).unwrap();
        prop_assert_eq!(pack.max_abs(), 0.0);
        let (gg, hh, kk, ee) = pack.energies(0.0).unwrap();
        prop_assert_eq!(gg, 0.0);
        prop_assert_eq!(hh, 0.0);
        prop_assert_eq!(kk, 0.0);
        prop_assert_eq!(ee, 0.0);
    }

    /// For g̃ = c·g with c a power of two: Γ is scale-invariant so A = 0
    /// bitwise, h = (1−c)·g, and X⁽⁰⁾ = (1−c)·Rm.
    #[test]
    fn scaled_pair_laws(pm in unit3(0.0), log_c in -1i32..3) {
        let c = (2.0f64).powi(log_c);
        if c == 1.0 {
            return Ok(());
        }
        let g = metric2(8, pm);
        let gt = MetricField::new(g.value().scaled(c)).unwrap();
        let pack = build_differences(&g, &gt, 0).unwrap();
        prop_assert_eq!(pack.conn_diff().max_abs(), 0.0);
        let h_expect = g.value().scaled(1.0 - c);
        for (a, b) in pack.h().components().iter().zip(h_expect.components()) {
            prop_assert_eq!(*a, *b);
        }
        let x_expect = g.curvature().rm().scaled(1.0 - c);
        for (a, b) in pack.x_list()[0].components().iter().zip(x_expect.components()) {
            prop_assert_eq!(*a, *b);
        }
    }

    /// Symmetrizing a slot pair is idempotent and leaves already-symmetric
    /// fields bitwise unchanged.
    #[test]
    fn symmetrize_pair_idempotent(pb in unit3(0.0), pk in unit3(0.0)) {
        let b = sym_field(8, pb);
        let k = sym_field(8, pk);
        // a genuinely asymmetric rank-2 field: b with its (0,1) entry skewed
        let mut asym = b.clone();
        let grid = asym.grid().clone();
        for node in 0..grid.node_count() {
            let v = asym.get(node, &[0, 1]);
            asym.set(node, &[0, 1], v + 0.5);
        }
        let mut once = asym.clone();
        once.symmetrize_pair(0, 1);
        let mut twice = once.clone();
        twice.symmetrize_pair(0, 1);
        for (a, b) in once.components().iter().zip(twice.components()) {
            prop_assert_eq!(*a, *b);
        }
        // symmetric input is a fixed point
        let mut k2 = k.clone();
        k2.symmetrize_pair(0, 1);
        for (a, b) in k.components().iter().zip(k2.components()) {
            prop_assert_eq!(*a, *b);
        }
    }
}
