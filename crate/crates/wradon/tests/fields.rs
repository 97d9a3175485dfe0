use std::io::Cursor;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wradon::fields::{bump_psi, default_f0, gaussian_oracle, lift_field, unbalanced_f0, GridField2D, ScalarField, Smoothness};

fn random_outside(d: usize, radius: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let dir: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() - 0.5).collect();
    let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    let r = radius * (1.0 + 1e-9 + 2.0 * rng.gen::<f64>());
    dir.iter().map(|v| v / n * r).collect()
}

#[test]
fn vanishes_outside_support() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let psi = bump_psi(2).unwrap();
    let fields: Vec<ScalarField> = vec![
        default_f0(),
        unbalanced_f0(),
        psi.clone(),
        lift_field(&default_f0(), &psi, 4).unwrap(),
        gaussian_oracle(3, 6.0).unwrap(),
    ];
    for f in &fields {
        for _ in 0..10_000 {
            let x = random_outside(f.dim(), f.support_radius(), &mut rng);
            assert_eq!(f.evaluate(&x), 0.0);
        }
    }
}

#[test]
fn f0_values() {
    let f = default_f0();
    assert!((f.evaluate(&[0.0, 0.0]) - (-1f64).exp()).abs() < 1e-16);
    // sign change on the ring r² = 1/2
    assert!(f.evaluate(&[0.7, 0.0]) > 0.0 && f.evaluate(&[0.71, 0.0]) < 0.0);
    assert_eq!(f.evaluate(&[1.0, 0.0]), 0.0);
    assert_eq!(f.smoothness(), Smoothness::Smooth);
}

#[test]
fn f0_rotation_symmetric() {
    let f = default_f0();
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    for _ in 0..10_000 {
        let x = [2.0 * rng.gen::<f64>() - 1.0, 2.0 * rng.gen::<f64>() - 1.0];
        let a = rng.gen::<f64>() * std::f64::consts::TAU;
        let y = [a.cos() * x[0] - a.sin() * x[1], a.sin() * x[0] + a.cos() * x[1]];
        assert!((f.evaluate(&x) - f.evaluate(&y)).abs() <= 1e-15);
    }
}

#[test]
fn lift_is_product_and_linear() {
    let f0 = default_f0();
    let psi = bump_psi(1).unwrap();
    let lifted = lift_field(&f0, &psi, 3).unwrap();
    let halved = lift_field(&f0.scaled(-0.5), &psi, 3).unwrap();
    let scaled = lift_field(&f0.scaled(-2.5), &psi, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..10_000 {
        let x: Vec<f64> = (0..3).map(|_| 2.4 * rng.gen::<f64>() - 1.2).collect();
        let v = lifted.evaluate(&x);
        assert_eq!(v, f0.evaluate(&x[..2]) * psi.evaluate(&x[2..]));
        // exact for power-of-two factors, within two roundings otherwise
        assert_eq!(halved.evaluate(&x), -0.5 * v);
        assert!((scaled.evaluate(&x) + 2.5 * v).abs() <= 5.0 * v.abs() * f64::EPSILON + f64::MIN_POSITIVE);
    }
    assert!(lifted.evaluate(&[0.0, 0.0, 0.0]) > 0.0);
}

#[test]
fn psi_normalized() {
    for m in 1..=4 {
        let p = bump_psi(m).unwrap();
        assert_eq!(p.evaluate(&vec![0.0; m]), 1.0);
        let mut x = vec![0.0; m];
        x[0] = 0.5;
        assert!((p.evaluate(&x) - (1.0 - 1.0 / 0.75f64).exp()).abs() < 1e-15);
    }
}

#[test]
fn grid_interpolation_at_nodes_and_constants() {
    let n = 21;
    let mut values = vec![0.0; n * n];
    for r in 2..n - 2 {
        for c in 2..n - 2 {
            values[r * n + c] = 0.75;
        }
    }
    values[10 * n + 10] = 2.5;
    let g = GridField2D::new(1.0, n, values.clone()).unwrap();
    for r in 0..n {
        for c in 0..n {
            let x = [-1.0 + c as f64 * g.spacing(), -1.0 + r as f64 * g.spacing()];
            assert_eq!(g.interpolate(&x), values[r * n + c], "node ({r}, {c})");
        }
    }
    // away from the ring and the spike the cubic stencil sees only the constant
    let v = g.interpolate(&[-0.43, 0.37]);
    assert!((v - 0.75).abs() < 1e-15);
}

#[test]
fn grid_rejects_nonzero_ring() {
    let mut values = vec![0.0; 25];
    values[0] = 1.0;
    assert!(GridField2D::new(1.0, 5, values).is_err());
}

#[test]
fn grid_csv_roundtrip() {
    let g = GridField2D::sample(&default_f0(), 1.0, 33).unwrap();
    let mut buf = Vec::new();
    g.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("L,h,n\n"));
    let back = GridField2D::read_csv(Cursor::new(buf)).unwrap();
    assert_eq!(back, g);
    assert!(GridField2D::read_csv(Cursor::new(b"L,h,n\n1,0.5,3\n0,0\n".to_vec())).is_err());
}
