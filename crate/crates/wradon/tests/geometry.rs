use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wradon::geometry::{
    alpha_3d_legacy, alpha_hodge, alpha_of_theta, classify_intersection, dot, frame_on_hyperplane, gram_deviation,
    orientation_det, Direction, Hyperplane, IntersectionKind, Ray,
};

// 3x3 determinant by cofactor expansion along the first row
fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[test]
fn alpha_hand_computed() {
    let t = Direction::new(vec![0.6, 0.8, 0.0]).unwrap();
    let a = alpha_of_theta(&t).unwrap();
    assert!((a.as_slice()[0] - 0.8).abs() < 1e-15);
    assert!((a.as_slice()[1] + 0.6).abs() < 1e-15);
    assert_eq!(a.as_slice()[2], 0.0);
    let m = [[0.8, -0.6, 0.0], [0.6, 0.8, 0.0], [0.0, 0.0, 1.0]];
    assert!((det3(m) - 1.0).abs() < 1e-15);
}

#[test]
fn alpha_of_e1_is_minus_e2() {
    let a = alpha_of_theta(&Direction::basis(4, 0)).unwrap();
    assert_eq!(a.as_slice(), &[0.0, -1.0, 0.0, 0.0]);
}

#[test]
fn legacy_matches_hand_cross_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let eta = Direction::new(vec![0.0, 0.0, -1.0]).unwrap();
    for _ in 0..1000 {
        let t = Direction::random(3, &mut rng);
        let p = t.as_slice();
        let c = cross([0.0, 0.0, -1.0], [p[0], p[1], p[2]]);
        let n = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2]).sqrt();
        let l = alpha_3d_legacy(&t, &eta).unwrap();
        for k in 0..3 {
            assert!((l.as_slice()[k] - c[k] / n).abs() < 1e-14);
        }
    }
}

#[test]
fn orientation_det_against_cofactor_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..1000 {
        let a = Direction::random(3, &mut rng);
        let t = Direction::random(3, &mut rng);
        let (a, t) = (a.as_slice(), t.as_slice());
        let m = [[a[0], a[1], a[2]], [t[0], t[1], t[2]], [0.0, 0.0, 1.0]];
        assert!((orientation_det(a, t) - det3(m)).abs() < 1e-13);
    }
}

#[test]
fn degenerate_directions_rejected() {
    let t = Direction::basis(3, 2);
    assert!(alpha_of_theta(&t).is_err());
    assert!(alpha_hodge(&t).is_err());
    assert!(alpha_of_theta(&Direction::basis(2, 0)).is_err());
}

#[test]
fn constructors_validate() {
    assert!(Direction::new(vec![1.0, 1.0, 0.0]).is_err());
    assert!(Direction::normalized(vec![0.0, 0.0]).is_err());
    let t = Direction::basis(3, 0);
    assert!(Ray::new(vec![0.0, 1.0, 0.0], t.clone()).is_ok());
    assert!(Ray::new(vec![0.5, 1.0, 0.0], t).is_err());
}

#[test]
fn classification_examples() {
    let e3 = Direction::basis(3, 2);
    let e1 = Direction::basis(3, 0);
    assert_eq!(classify_intersection(&Hyperplane::new(0.0, e3.clone())).unwrap(), IntersectionKind::Plane);
    assert_eq!(classify_intersection(&Hyperplane::new(0.3, e3)).unwrap(), IntersectionKind::Empty);
    assert_eq!(classify_intersection(&Hyperplane::new(0.3, e1)).unwrap(), IntersectionKind::Line);
}

#[test]
fn frames_are_orthonormal_and_tangent() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for d in 3..=6 {
        for seed in [0u64, 1, 7] {
            for _ in 0..50 {
                let t = Direction::random(d, &mut rng);
                let fr = frame_on_hyperplane(&t, seed).unwrap();
                let vs: Vec<&[f64]> = fr.vectors().map(|v| v.as_slice()).collect();
                assert_eq!(vs.len(), d - 1);
                assert!(gram_deviation(&vs) < 1e-12);
                for v in &vs {
                    assert!(dot(v, t.as_slice()).abs() < 1e-12);
                }
                assert_eq!(fr.alpha, alpha_of_theta(&t).unwrap());
            }
        }
    }
}

#[test]
fn frame_is_seed_deterministic() {
    let t = Direction::normalized(vec![0.3, -0.2, 0.5, 0.7]).unwrap();
    assert_eq!(frame_on_hyperplane(&t, 5).unwrap(), frame_on_hyperplane(&t, 5).unwrap());
}

fn unit_vec(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, d).prop_filter("non-degenerate", |v| v[0].hypot(v[1]) > 1e-3)
}

proptest! {
    #[test]
    fn alpha_unit_tangent_positive(v in (3usize..=6).prop_flat_map(unit_vec)) {
        let t = Direction::normalized(v).unwrap();
        let a = alpha_of_theta(&t).unwrap();
        prop_assert!((dot(a.as_slice(), a.as_slice()) - 1.0).abs() < 1e-14);
        prop_assert!(dot(a.as_slice(), t.as_slice()).abs() < 1e-14);
        prop_assert!(orientation_det(a.as_slice(), t.as_slice()) > 0.0);
        prop_assert!(a.as_slice()[2..].iter().all(|&c| c == 0.0));
        let h = alpha_hodge(&t).unwrap();
        for (x, y) in a.as_slice().iter().zip(h.as_slice()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn antipodal_alpha_flips(v in (3usize..=5).prop_flat_map(unit_vec)) {
        let t = Direction::normalized(v).unwrap();
        let a = alpha_of_theta(&t).unwrap();
        let b = alpha_of_theta(&t.neg()).unwrap();
        for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!((x + y).abs() < 1e-15);
        }
    }

    #[test]
    fn classification_sign_symmetric(v in (3usize..=5).prop_flat_map(unit_vec), s in -2.0f64..2.0) {
        let t = Direction::normalized(v).unwrap();
        let a = classify_intersection(&Hyperplane::new(s, t.clone())).unwrap();
        let b = classify_intersection(&Hyperplane::new(-s, t.neg())).unwrap();
        prop_assert_eq!(a, b);
    }
}
