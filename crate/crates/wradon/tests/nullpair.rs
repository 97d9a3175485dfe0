use std::io::Cursor;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wradon::fields::{default_f0, unbalanced_f0, ScalarField, Smoothness};
use wradon::geometry::{alpha_of_theta, Direction};
use wradon::nullpair::{
    build_null_pair_2d, lift_to_dimension, line_coordinates, verify_null_pair_2d, BuildOptions, LineFamily2D,
    NullPair2D, PATH_FAMILY, PATH_OFFGRID,
};
use wradon::Error;

// sup|λ f₀| at 64 × 64 lines, 128 nodes, recomputed with numpy Gauss–Legendre
const SUP_LAMBDA_F0_64: f64 = 1.3574650855885022;

fn unchecked() -> BuildOptions {
    BuildOptions {
        weight_bound_limit: None,
        ..Default::default()
    }
}

fn pair(n: usize) -> NullPair2D {
    build_null_pair_2d(&default_f0(), "default", &LineFamily2D::new(n, n, 1.0, 128).unwrap(), unchecked()).unwrap()
}

#[test]
fn default_f0_exceeds_weight_bound() {
    let fam = LineFamily2D::new(64, 64, 1.0, 128).unwrap();
    match build_null_pair_2d(&default_f0(), "default", &fam, BuildOptions::default()) {
        Err(Error::WeightBoundViolation { ratio, limit }) => {
            assert!((ratio - SUP_LAMBDA_F0_64).abs() < 1e-9, "{ratio}");
            assert_eq!(limit, 2.0 / 3.0);
        }
        other => panic!("expected a bound violation, got {:?}", other.map(|p| p.sup_lambda_f0)),
    }
    let p = pair(64);
    assert!((p.sup_lambda_f0 - SUP_LAMBDA_F0_64).abs() < 1e-9);
    assert_eq!(p.bounds.1, 1.0);
}

#[test]
fn unbalanced_rejected() {
    let fam = LineFamily2D::new(16, 16, 1.0, 64).unwrap();
    assert!(build_null_pair_2d(&unbalanced_f0(), "unbalanced", &fam, BuildOptions::default()).is_err());
}

#[test]
fn family_lines_annihilated() {
    let p = pair(32);
    let rep = verify_null_pair_2d(&p, 0, 0);
    assert!(rep.max_for(PATH_FAMILY) <= 1e-13);
    // the end offsets s = ±1 only touch the zero set of f₀
    for r in rep.records.iter().filter(|r| r.s.abs() == 1.0) {
        assert_eq!(r.value, 0.0);
    }
}

#[test]
fn annihilation_scale_invariant() {
    let fam = LineFamily2D::new(24, 24, 1.0, 96).unwrap();
    let a = build_null_pair_2d(&default_f0(), "a", &fam, unchecked()).unwrap();
    let b = build_null_pair_2d(&default_f0().scaled(3.0), "b", &fam, unchecked()).unwrap();
    assert!((a.sup_lambda_f0 - b.sup_lambda_f0).abs() < 1e-12);
    assert!(verify_null_pair_2d(&b, 0, 0).max_for(PATH_FAMILY) <= 1e-13);
}

#[test]
fn offgrid_residual_converges() {
    let coarse = verify_null_pair_2d(&pair(64), 400, 9).max_for(PATH_OFFGRID);
    let fine = verify_null_pair_2d(&pair(128), 400, 9).max_for(PATH_OFFGRID);
    assert!(coarse / fine >= 4.0, "{coarse:e} -> {fine:e}");
}

#[test]
fn export_import_bit_exact() {
    let p = pair(16);
    let (mut h, mut t) = (Vec::new(), Vec::new());
    p.export(&mut h, &mut t).unwrap();
    let q = NullPair2D::import(&p.f0, Cursor::new(h.clone()), Cursor::new(t.clone())).unwrap();
    assert!(p.lambda.iter().zip(&q.lambda).all(|(a, b)| a.to_bits() == b.to_bits()));
    assert_eq!(p.rescale.to_bits(), q.rescale.to_bits());
    assert_eq!(p.h_min.to_bits(), q.h_min.to_bits());
    assert_eq!(p.bounds, q.bounds);
    assert_eq!(p.sampled_bounds, q.sampled_bounds);
    assert_eq!(p.family, q.family);
    assert_eq!(verify_null_pair_2d(&p, 50, 1).records, verify_null_pair_2d(&q, 50, 1).records);
    // truncated table
    let short = &t[..t.len() / 2];
    assert!(NullPair2D::import(&p.f0, Cursor::new(h), Cursor::new(short.to_vec())).is_err());
}

#[test]
fn line_coordinates_fold_orientation() {
    let x = [0.3, -0.2];
    let u = [0.6, 0.8];
    let (s1, p1) = line_coordinates(&x, &u);
    let (s2, p2) = line_coordinates(&x, &[-0.6, -0.8]);
    assert_eq!(p1, p2);
    assert_eq!(s1, s2);
    assert!((s1 - (-0.3 * 0.8 + -0.2 * 0.6)).abs() < 1e-15);
    assert!((0.0..std::f64::consts::PI).contains(&p1));
}

#[test]
fn lifted_weight_matches_projection() {
    let p = Arc::new(pair(32));
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for d in [3usize, 4] {
        let lp = lift_to_dimension(p.clone(), d).unwrap();
        for _ in 0..10_000 {
            let t = Direction::random(d, &mut rng);
            let x: Vec<f64> = (0..d).map(|_| 2.4 * rng.gen::<f64>() - 1.2).collect();
            let a = alpha_of_theta(&t).unwrap();
            let n = a.as_slice()[0].hypot(a.as_slice()[1]);
            let want = p.eval_w0(&x[..2], &[a.as_slice()[0] / n, a.as_slice()[1] / n]);
            assert_eq!(lp.big_w.evaluate(&x, t.as_slice()).to_bits(), want.to_bits());
        }
        let fmax = (0..1000)
            .map(|_| {
                let x: Vec<f64> = (0..d).map(|_| 2.0 * rng.gen::<f64>() - 1.0).collect();
                lp.f.evaluate(&x).abs()
            })
            .fold(0.0, f64::max);
        assert!(fmax > 0.0);
    }
}

#[test]
fn lifted_weight_smooth_off_degenerate_set() {
    let p = Arc::new(pair(32));
    let lp = lift_to_dimension(p, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..200 {
        let x: Vec<f64> = (0..3).map(|_| 1.6 * rng.gen::<f64>() - 0.8).collect();
        // great circle in the (e₁, e₂) plane tilted towards e₃, far from ±e₃
        let tilt = 0.5 * rng.gen::<f64>();
        let t0 = rng.gen::<f64>() * std::f64::consts::TAU;
        let w = |t: f64| {
            let th = [tilt.cos() * t.cos(), tilt.cos() * t.sin(), tilt.sin()];
            lp.big_w.evaluate(&x, &th)
        };
        let second = |h: f64| ((w(t0 + h) - 2.0 * w(t0) + w(t0 - h)) / (h * h)).abs();
        let coarse = second(1e-2).max(second(3e-2));
        for h in [1e-3, 1e-4] {
            assert!(second(h) <= 10.0 * coarse + 50.0, "h={h}: {} vs {coarse}", second(h));
        }
    }
}

#[test]
fn odd_field_gives_zero_lambda_through_origin() {
    let odd = ScalarField::new(2, 1.0, Smoothness::Smooth, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if r2 >= 1.0 {
            0.0
        } else {
            x[0] * (-1.0 / (1.0 - r2)).exp()
        }
    });
    let fam = LineFamily2D::new(16, 17, 1.0, 64).unwrap();
    let p = build_null_pair_2d(&odd, "odd", &fam, unchecked()).unwrap();
    for j in 0..16 {
        assert!(p.lambda_node(j, 8).abs() < 1e-12);
    }
}
