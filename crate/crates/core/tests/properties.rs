use std::f64::consts::PI;
use std::sync::OnceLock;

use latlab::arith::{correlation_r, Abscissa, SieveTable};
use latlab::funceq::{f_value, ratio_integrand, verify_theorem3, SolutionParams};
use latlab::laplace::{laplace_delta_square, laplace_p_square};
use latlab::quad::QuadratureConfig;
use latlab::report::fmt_num;
use latlab::special::{bessel_j0, bessel_j1, bessel_y1, chi};
use latlab::zeta::{zeta_critical, zeta_em};
use num_complex::Complex64;
use proptest::prelude::*;

fn table() -> &'static SieveTable {
    static T: OnceLock<SieveTable> = OnceLock::new();
    T.get_or_init(|| SieveTable::build(250_000).unwrap())
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn r_is_a_multiple_of_four(n in 1usize..250_000) {
        prop_assert_eq!(table().r(n) % 4, 0);
    }

    #[test]
    fn d_is_two_exactly_at_primes(n in 1usize..250_000) {
        prop_assert_eq!(table().d(n) == 2, is_prime(n as u64));
        if n == 1 {
            prop_assert_eq!(table().d(1), 1);
        }
    }

    #[test]
    fn hyperbola_identity(n in 1u64..250_000) {
        let rhs: u64 = (1..=n).map(|k| n / k).sum();
        prop_assert_eq!(table().d_prefix(n as usize), rhs);
    }

    #[test]
    fn summatory_r_is_monotone_with_midpoints(a in 1.0f64..5e4, gap in 0.0f64..50.0) {
        let t = table();
        let x = Abscissa::non_integral(a + 0.5).unwrap();
        let y = Abscissa::non_integral(a + 0.5 + gap.floor() + 0.25).unwrap();
        prop_assert!(t.summatory_r(x).unwrap() <= t.summatory_r(y).unwrap());
        let n = a.floor() as u64 + 1;
        let mid = t.summatory_r(Abscissa::Integer(n)).unwrap();
        let left = t.summatory_r(Abscissa::NonIntegral(n as f64 - 0.5)).unwrap();
        let right = t.summatory_r(Abscissa::NonIntegral(n as f64 + 0.5)).unwrap();
        prop_assert_eq!(mid, 0.5 * (left + right));
    }

    #[test]
    fn correlation_residual_is_exact_minus_main(x in 10.0f64..1e5, h in 1u64..9) {
        let c = correlation_r(x, h, table()).unwrap();
        prop_assert_eq!(c.residual, c.exact_sum - c.main_term);
    }

    #[test]
    fn bessel_wronskian(x in 0.5f64..300.0) {
        // J₁Y₁′ − J₁′Y₁ = 2/(πx), J₁′ = J₀ − J₁/x, Y₁′ by a five-point stencil
        let h = 1e-3 * x.min(1.0);
        let j1 = bessel_j1(x).unwrap();
        let dj = bessel_j0(x).unwrap() - j1 / x;
        let y1 = bessel_y1(x).unwrap();
        let y = |u: f64| bessel_y1(u).unwrap();
        let dy = (8.0 * (y(x + h) - y(x - h)) - (y(x + 2.0 * h) - y(x - 2.0 * h))) / (12.0 * h);
        let w = j1 * dy - dj * y1;
        prop_assert!((w - 2.0 / (PI * x)).abs() < 1e-8, "x={} w={}", x, w);
    }

    #[test]
    fn chi_reflection(re in -2.0f64..3.0, im in 1.0f64..50.0, neg in any::<bool>()) {
        let s = Complex64::new(re, if neg { -im } else { im });
        prop_assert!((chi(s).unwrap() * chi(1.0 - s).unwrap() - 1.0).norm() < 1e-9);
    }

    #[test]
    fn fmt_num_round_trips(v in prop_oneof![-1e12f64..1e12, -1e-3f64..1e-3]) {
        let s = fmt_num(v);
        let back: f64 = s.parse().unwrap();
        prop_assert!((back - v).abs() <= 5e-12 * v.abs(), "{} -> {}", v, s);
        prop_assert_eq!(s, fmt_num(v));
    }

    #[test]
    fn ratio_ignores_constant_factors(c in 0.0f64..3.0, w in 0.05f64..0.95, h in 0.1f64..5.0,
                                      k in 1e-6f64..1e6, t in 0.0f64..5.0) {
        let p = SolutionParams::new(c, w, h).unwrap();
        let direct = f_value(w * t, &p, k) / f_value(t, &p, k);
        let r = ratio_integrand(t, &p).unwrap();
        prop_assert!((direct - r).abs() <= 1e-12 * r, "{} vs {}", direct, r);
    }

    #[test]
    fn theorem3_scales_linearly_in_h(c in 0.0f64..3.0, w in 0.1f64..2.5, h in 0.2f64..4.0,
                                     lambda in 0.25f64..4.0) {
        prop_assume!((w - 1.0).abs() > 0.05);
        let sign = if w < 1.0 { 1.0 } else { -1.0 };
        let q = QuadratureConfig::default();
        let a = verify_theorem3(&SolutionParams::new(c, w, sign * h).unwrap(), &q).unwrap();
        let b = verify_theorem3(&SolutionParams::new(c, w, sign * h * lambda).unwrap(), &q).unwrap();
        prop_assert!(a.residual <= 1e-8 * a.target.abs().max(1.0));
        prop_assert!(b.residual <= 1e-8 * b.target.abs().max(1.0));
        prop_assert!((b.target - lambda * a.target).abs() <= 1e-12 * b.target.abs());
        prop_assert!((b.integral - lambda * a.integral).abs() <= 1e-9 * b.integral.abs());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn euler_maclaurin_and_riemann_siegel_agree(t in 50.0f64..2000.0) {
        let em = zeta_em(Complex64::new(0.5, t), 1e-10).unwrap().norm();
        let (rs, _) = zeta_critical(t).unwrap();
        prop_assert!((em - rs.norm()).abs() < 1e-4, "t={} {} vs {}", t, em, rs.norm());
    }

    #[test]
    fn laplace_tail_bounds_are_conservative(t in 20.0f64..3000.0) {
        let tab = table();
        let a = laplace_p_square(t, tab, 40.0).unwrap();
        let b = laplace_p_square(t, tab, 80.0).unwrap();
        prop_assert!(a.tail_bound >= 0.0 && (a.value - b.value).abs() <= a.tail_bound.max(1e-12 * a.value));
        let a = laplace_delta_square(t, tab, 40.0).unwrap();
        let b = laplace_delta_square(t, tab, 80.0).unwrap();
        prop_assert!(a.tail_bound >= 0.0 && (a.value - b.value).abs() <= a.tail_bound.max(1e-12 * a.value));
    }
}
