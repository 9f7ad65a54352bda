//! Property tests for the structural invariants: grid closure, eigenvector
//! relations, factor unitarity, closed-form reductions, and agreement with
//! the numerical matrix exponential.

use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::TAU;

use twistz::oracle::exp_factor_oracle;
use twistz::{
    check_twist_symmetry, mode_angles, mode_factor, principal_angle, BlochVector, ModeCouplings,
    ModelSpec, Momentum, MomentumGrid,
};

fn dims_strategy() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(2usize..=256, 1..=3)
}

fn coupling_strategy() -> impl Strategy<Value = (ModeCouplings, usize)> {
    (
        -10.0f64..10.0,
        0.0f64..10.0,
        0.0f64..TAU,
        prop_oneof![Just(2usize), 2usize..1000, 1000usize..=1_000_000],
    )
        .prop_map(|(a, r, phase, n)| {
            (
                ModeCouplings::new(Complex64::new(0.0, a), Complex64::from_polar(r, phase)),
                n,
            )
        })
}

proptest! {
    #[test]
    fn grid_count_and_closure(dims in dims_strategy()) {
        // cap the total so the 256^3 corner cannot blow up the test
        prop_assume!(dims.iter().product::<usize>() <= 1 << 16);
        let grid = MomentumGrid::build(&dims).unwrap();
        prop_assert_eq!(grid.total_modes(), dims.iter().product::<usize>());
        for (i, k) in grid.points().iter().enumerate() {
            for &c in k.components() {
                prop_assert!(c > 0.0 && c <= TAU + 1e-12);
            }
            let j = grid.partner_index(i);
            prop_assert_eq!(grid.partner_index(j), i);
            let p = grid.point(j);
            for a in 0..dims.len() {
                let wrapped = (k.get(a) + p.get(a)).rem_euclid(TAU);
                let dist = wrapped.min(TAU - wrapped);
                prop_assert!(dist < 1e-9, "k + (-k) not ≡ 0 (axis {}): {}", a, dist);
            }
        }
    }

    #[test]
    fn eigenvectors_diagonalize(r0 in -2.0f64..2.0, rx in -3.0f64..3.0,
                                ry in -3.0f64..3.0, rz in -3.0f64..3.0) {
        let r = BlochVector::new(r0, rx, ry, rz);
        prop_assume!(r.xy_norm() > 1e-6 && r.magnitude() > 1e-6);
        let g = mode_angles(&r).unwrap();
        let mag = r.magnitude();
        // (R·σ) ν± = ±R ν±, orthogonality, reconstruction from angles
        let apply = |v: &[Complex64; 2]| {
            [
                Complex64::new(rz, 0.0) * v[0] + Complex64::new(rx, -ry) * v[1],
                Complex64::new(rx, ry) * v[0] + Complex64::new(-rz, 0.0) * v[1],
            ]
        };
        let mv = apply(&g.nu_minus);
        let pv = apply(&g.nu_plus);
        for i in 0..2 {
            prop_assert!((mv[i] + mag * g.nu_minus[i]).norm() <= 1e-12 * mag.max(1.0));
            prop_assert!((pv[i] - mag * g.nu_plus[i]).norm() <= 1e-12 * mag.max(1.0));
        }
        let dot = g.nu_minus[0].conj() * g.nu_plus[0] + g.nu_minus[1].conj() * g.nu_plus[1];
        prop_assert!(dot.norm() <= 1e-12);
        prop_assert!((mag * g.theta.sin() * g.gamma_angle.cos() - rx).abs() <= 1e-12 * mag);
        prop_assert!((mag * g.theta.sin() * g.gamma_angle.sin() - ry).abs() <= 1e-12 * mag);
        prop_assert!((mag * g.theta.cos() - rz).abs() <= 1e-12 * mag);
        prop_assert!((g.e_plus - g.e_minus - 2.0 * mag).abs() <= 1e-12 * mag);
    }

    #[test]
    fn factor_unitarity_bound((c, n) in coupling_strategy()) {
        let f = mode_factor(&c, n, Momentum::new(&[0.0]));
        prop_assert!(f.value.norm() <= 1.0 + 1e-12, "|f| = {}", f.value.norm());
        // log/arg fields stay consistent with the value
        prop_assert!((f.log_abs - f.value.norm().ln()).abs() <= 1e-12);
        prop_assert!((f.arg - f.value.arg()).abs() <= 1e-12);
    }

    #[test]
    fn factor_closed_form_reductions((c, n) in coupling_strategy()) {
        let step = TAU / n as f64;
        // K = 0: pure phase exp(-2πK'/N), modulus 1
        let phase_only = ModeCouplings::new(c.kprime, Complex64::new(0.0, 0.0));
        if phase_only.omega() > 1e-12 {
            let f = mode_factor(&phase_only, n, Momentum::new(&[0.0]));
            let want = (-step * c.kprime).exp();
            prop_assert!((f.value - want).norm() <= 1e-12);
            prop_assert!((f.value.norm() - 1.0).abs() <= 1e-12);
        }
        // K' = 0: cos(2π|K|/N), exactly real
        let mixing_only = ModeCouplings::new(Complex64::new(0.0, 0.0), c.kbig);
        let f = mode_factor(&mixing_only, n, Momentum::new(&[0.0]));
        prop_assert_eq!(f.value.im, 0.0);
        prop_assert!((f.value.re - (step * c.kbig.norm()).cos()).abs() <= 1e-12);
    }

    #[test]
    fn factor_agrees_with_exponential_oracle((c, n) in coupling_strategy()) {
        let closed = mode_factor(&c, n, Momentum::new(&[0.0])).value;
        let oracle = exp_factor_oracle(&c, n);
        prop_assert!((closed - oracle).norm() <= 1e-12,
            "closed {} vs oracle {}", closed, oracle);
        prop_assert!(oracle.norm() <= 1.0 + 1e-13);
    }

    #[test]
    fn principal_angle_lands_on_branch(x in -1e4f64..1e4) {
        let y = principal_angle(x);
        prop_assert!(y > -std::f64::consts::PI && y <= std::f64::consts::PI);
        // same angle modulo 2π
        let diff = (x - y).rem_euclid(TAU);
        prop_assert!(diff < 1e-9 || (TAU - diff) < 1e-9);
    }

    #[test]
    fn builtin_models_satisfy_twist_symmetry(
        phi in -1.0f64..=1.0,
        lambda in -4.0f64..4.0,
        gamma in 0.05f64..3.0,
        d in 1usize..=3,
        l in 2usize..40,
    ) {
        let chain = ModelSpec::ssh(phi).unwrap();
        let grid = MomentumGrid::build(&[l * 3]).unwrap();
        prop_assert!(check_twist_symmetry(&chain, &grid).unwrap().pass);

        let ff = ModelSpec::free_fermion(d, lambda, gamma).unwrap();
        let grid = MomentumGrid::build(&vec![l.clamp(2, 12); d]).unwrap();
        prop_assert!(check_twist_symmetry(&ff, &grid).unwrap().pass);
    }
}
