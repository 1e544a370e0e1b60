use qgeo::ambient::{ambient_cov_deriv, christoffel, curvature_pack, CurvaturePack, JT};
use qgeo::field::{Expr, Poly};
use qgeo::identities::{ambient_identities, space_form_residual};
use qgeo::metric::MetricField;
use qgeo::random::{random_point, random_polynomial_metric, rng};
use qgeo::tensor::{for_each_index, LabeledTensor};
use qgeo::GeoError;

const TOL: f64 = 1e-7;

fn val(t: &JT<f64>) -> LabeledTensor<f64> {
    t.map(|j| j.value())
}

/// Appendix-style diagonal metric `Σ e^{2f_a}(dx^a)²` with quadratic `f_a`
/// (so `f_a(0) = 0`, `df_a(0) = 0`).
fn diagonal_quadratic(n: usize, seed: u64) -> (MetricField, Vec<Vec<Vec<f64>>>) {
    use rand::Rng;
    let mut r = rng(seed);
    let mut hess = vec![vec![vec![0.0; n]; n]; n];
    let f = (0..n)
        .map(|a| {
            let mut p = Poly::zero(n);
            for i in 0..n {
                for j in i..n {
                    let c: f64 = r.gen_range(-0.5..0.5);
                    p = p.plus(Poly::monomial(n, c, &[i, j]));
                    let h = if i == j { 2.0 * c } else { c };
                    hess[a][i][j] = h;
                    hess[a][j][i] = h;
                }
            }
            p
        })
        .collect();
    (MetricField::DiagonalExp { f }, hess)
}

#[test]
fn flat_metric_has_no_curvature() {
    let pk = curvature_pack::<f64>(&MetricField::Flat { n: 5 }, &[0.3; 5], 4).unwrap();
    for t in [&pk.rm, &pk.ric, pk.p(), pk.w(), pk.c(), pk.b(), pk.dw(), pk.dc(), pk.ddp()] {
        assert_eq!(val(t).max_abs(), 0.0);
    }
    assert_eq!(pk.scal.value(), 0.0);
}

#[test]
fn christoffel_vanishes_for_flat_and_sphere_origin() {
    assert_eq!(val(&christoffel::<f64>(&MetricField::Flat { n: 3 }, &[1.0, 2.0, 3.0]).unwrap()).max_abs(), 0.0);
    let s = christoffel::<f64>(&MetricField::RoundSphere { n: 4 }, &[0.0; 4]).unwrap();
    assert!(val(&s).max_abs() < 1e-15);
}

fn check_space_form(pk: &CurvaturePack<f64>, lambda: f64, n: usize) {
    assert_eq!(pk.n(), n);
    let r = space_form_residual(pk, lambda);
    assert!(r < TOL, "space form residual {r:e}");
}

#[test]
fn round_s4_chart() {
    let s4 = MetricField::RoundSphere { n: 4 };
    let pk = curvature_pack::<f64>(&s4, &[0.0; 4], 4).unwrap();
    assert!((pk.scal.value() - 12.0).abs() < 1e-12);
    check_space_form(&pk, 1.0, 4);
    let p = [0.3, -0.2, 0.1, 0.25];
    check_space_form(&curvature_pack::<f64>(&s4, &p, 4).unwrap(), 1.0, 4);
}

#[test]
fn hyperbolic_half_space() {
    let h = MetricField::HyperbolicHalfSpace { n: 5 };
    check_space_form(&curvature_pack::<f64>(&h, &[0.1, 0.2, -0.3, 0.4, 1.5], 4).unwrap(), -1.0, 5);
}

#[test]
fn dimension_two_is_usage_error() {
    assert!(matches!(curvature_pack::<f64>(&MetricField::Flat { n: 2 }, &[0.0; 2], 2), Err(GeoError::Usage(_))));
}

#[test]
fn appendix_christoffel_closed_forms() {
    let n = 5;
    let (g, _) = diagonal_quadratic(n, 7);
    let MetricField::DiagonalExp { f } = &g else { unreachable!() };
    let p = [0.2, -0.1, 0.3, 0.05, -0.25];
    let gam = val(&christoffel::<f64>(&g, &p).unwrap());
    let fv: Vec<f64> = f.iter().map(|fa| fa.eval(&p)).collect();
    let df = |a: usize, b: usize| {
        let j = qgeo::field::jet_eval(&Expr::poly(f[a].clone()), &p, 1).unwrap();
        j.d_value(b)
    };
    for_each_index(&[n; 3], |i| {
        let (c, a, b) = (i[0], i[1], i[2]);
        let exact = if a == b && b == c {
            df(a, a)
        } else if c == a && a != b {
            df(a, b)
        } else if c == b && a != b {
            df(b, a)
        } else if a == b {
            -(2.0 * (fv[a] - fv[c])).exp() * df(a, c)
        } else {
            0.0
        };
        assert!((gam.get(i) - exact).abs() < 1e-13, "Γ^{c}_{a}{b}");
    });
}

#[test]
fn appendix_riemann_and_schouten_at_p() {
    for (n, seed) in [(5, 1), (6, 2), (7, 3)] {
        let (g, hs) = diagonal_quadratic(n, seed);
        let pk = curvature_pack::<f64>(&g, &vec![0.0; n], 4).unwrap();
        let rm = val(&pk.rm);
        // hs[c][a][b] = ∂²_{ab} f_c
        for_each_index(&[n; 4], |i| {
            let (a, b, c, d) = (i[0], i[1], i[2], i[3]);
            let exact = if a == b || c == d {
                0.0
            } else if (a, b) == (c, d) {
                -hs[b][a][a] - hs[a][b][b]
            } else if (a, b) == (d, c) {
                hs[b][a][a] + hs[a][b][b]
            } else if b == d {
                -hs[b][a][c]
            } else if a == c {
                -hs[a][b][d]
            } else if a == d {
                hs[a][b][c]
            } else if b == c {
                hs[b][a][d]
            } else {
                0.0
            };
            assert!((rm.get(i) - exact).abs() < 1e-12, "R_{a}{b}{c}{d}: {} vs {exact}", rm.get(i));
        });
        let pp = val(pk.p());
        let nf = n as f64;
        for a in 0..n {
            for b in 0..n {
                let exact = if a == b {
                    let mut s1 = 0.0;
                    for c in (0..n).filter(|&c| c != a) {
                        s1 += hs[c][a][a] + hs[a][c][c];
                    }
                    let mut s2 = 0.0;
                    for c in (0..n).filter(|&c| c != a) {
                        for d in (0..n).filter(|&d| d != a && d != c) {
                            s2 += hs[d][c][c];
                        }
                    }
                    -s1 / (nf - 1.0) + s2 / ((nf - 1.0) * (nf - 2.0))
                } else {
                    -(0..n).filter(|&c| c != a && c != b).map(|c| hs[c][a][b]).sum::<f64>() / (nf - 2.0)
                };
                assert!((pp.get(&[a, b]) - exact).abs() < 1e-12);
            }
        }
        // Christoffels vanish at p, so ∇𝖩 = ∂𝖩.
        let dj = val(pk.dj());
        for a in 0..n {
            assert!((dj.get(&[a]) - pk.jtrace.d_value(a)).abs() < 1e-14);
        }
    }
}

#[test]
fn curvature_identities_on_random_polynomial_metrics() {
    let dims = [3, 4, 5, 6, 7, 3, 4, 5, 6, 8];
    for (s, &n) in dims.iter().enumerate() {
        let g = random_polynomial_metric(n, 1000 + s as u64);
        let p = random_point(&mut rng(s as u64), n, 0.5);
        for r in ambient_identities(&g, &p).unwrap() {
            assert!(r.value < TOL, "n={n} seed={s}: {r:?}");
        }
    }
}

#[test]
fn curvature_identities_on_appendix_metric_and_sphere() {
    let (g, _) = diagonal_quadratic(6, 11);
    for r in ambient_identities(&g, &[0.1, 0.05, -0.1, 0.2, 0.0, -0.15]).unwrap() {
        assert!(r.value < TOL, "appendix: {r:?}");
    }
    for r in ambient_identities(&MetricField::RoundSphere { n: 5 }, &[0.1, 0.2, 0.3, -0.1, 0.0]).unwrap() {
        assert!(r.value < TOL, "sphere: {r:?}");
    }
}

#[test]
fn metric_is_parallel() {
    let g = random_polynomial_metric(5, 5);
    let p = [0.2, 0.1, -0.3, 0.4, 0.0];
    let dg = ambient_cov_deriv::<f64>(&g, &p, 2, |x| {
        let gj = g.jets::<f64>(&p, 2).unwrap();
        assert_eq!(x.len(), 5);
        gj
    })
    .unwrap();
    assert!(val(&dg).max_abs() < 1e-14);
}

#[test]
fn cov_deriv_needs_spare_order() {
    let g = MetricField::Flat { n: 3 };
    let r = ambient_cov_deriv::<f64>(&g, &[0.0; 3], 1, |x| {
        LabeledTensor::from_fn(qgeo::ambient::metric_slots(3), |i| x[i[0]].truncate(0))
    });
    assert!(matches!(r, Err(GeoError::Config(_))));
}
