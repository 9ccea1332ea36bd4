mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::mean_and_se;
use rapid_dim::path::{
    decode, decode_dyadic, encode, generate_brownian, shift_origin, uniform_distance, BitCode,
    DyadicPath,
};

#[test]
fn terminal_variance_is_one() {
    let seeds = 10_000u64;
    let ends: Vec<f64> = (0..seeds)
        .map(|s| *generate_brownian(16, s).unwrap().values().last().unwrap())
        .collect();
    let (mean, _) = mean_and_se(&ends);
    let var = ends.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (seeds as f64 - 1.0);
    // sampling sd of a Gaussian sample variance is sqrt(2 / (n - 1))
    let se = (2.0 / (seeds as f64 - 1.0)).sqrt();
    assert!((var - 1.0).abs() < 3.0 * se, "var {var}, se {se}");
}

#[test]
fn disjoint_increments_are_uncorrelated_and_scale_with_span() {
    let seeds = 4_000u64;
    let big_n = 10;
    let mut products = Vec::new();
    let mut first = Vec::new();
    let mut short = Vec::new();
    for s in 0..seeds {
        let p = generate_brownian(big_n, 1_000_000 + s).unwrap();
        let v = p.values();
        // [0, 1/4] against [1/2, 1]
        let a = v[256] - v[0];
        let b = v[1024] - v[512];
        products.push(a * b);
        first.push(a * a);
        // span h = 2^-7
        short.push((v[600 + 8] - v[600]).powi(2));
    }
    let (mean_prod, se_prod) = mean_and_se(&products);
    assert!(mean_prod.abs() < 4.0 * se_prod, "cov {mean_prod} se {se_prod}");

    let (var_a, se_a) = mean_and_se(&first);
    assert!((var_a - 0.25).abs() < 4.0 * se_a, "var {var_a}");
    let (var_h, se_h) = mean_and_se(&short);
    assert!((var_h - 1.0 / 128.0).abs() < 4.0 * se_h, "var {var_h}");
}

#[test]
fn decode_hits_knots_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for len in [1usize, 2, 3, 7, 31, 100] {
        let code = BitCode::random(len, &mut rng).unwrap();
        let m = 3;
        let p = decode(&code, m).unwrap();
        assert_eq!(p.steps(), len * m);
        let mut partial = 0i64;
        for (i, &b) in code.bits().iter().enumerate() {
            partial += i64::from(b);
            let expected = partial as f64 / (len as f64).sqrt();
            assert!((p.values()[(i + 1) * m] - expected).abs() < 1e-12);
        }
        // slope inside each cell is bits[i] * sqrt(n)
        let dt = 1.0 / (len * m) as f64;
        for (s, w) in p.values().windows(2).enumerate() {
            let slope = (w[1] - w[0]) / dt;
            let b = f64::from(code.bits()[s / m]);
            assert!((slope - b * (len as f64).sqrt()).abs() < 1e-9);
        }
    }
}

#[test]
fn sign_code_approximants_keep_the_code() {
    for seed in 0..20 {
        let x = generate_brownian(14, seed).unwrap();
        for m in [1u32, 4, 9] {
            let code = encode(&x, 1 << m).unwrap();
            let approx = decode_dyadic(&code, 14).unwrap();
            assert_eq!(encode(&approx, 1 << m).unwrap(), code);
        }
    }
}

#[test]
fn sign_code_approximants_do_not_converge_uniformly() {
    // The knot values n^-1/2 * sum sign(dX) differ from X(i/n) by a walk whose
    // variance stays near 1 - 2/pi, so the uniform distance is of order one at every m.
    let mut at_ten = Vec::new();
    for seed in 0..40 {
        let x = generate_brownian(20, seed).unwrap();
        let code = encode(&x, 1 << 10).unwrap();
        at_ten.push(uniform_distance(&x, &decode_dyadic(&code, 20).unwrap()).unwrap());
    }
    let (mean, _) = mean_and_se(&at_ten);
    assert!(mean > 0.3, "mean distance at m = 10 is {mean}");
}

#[test]
fn shifted_paths_are_brownian_at_the_finer_scale() {
    let seeds = 3_000u64;
    let ends: Vec<f64> = (0..seeds)
        .map(|s| {
            let p = generate_brownian(12, 77_000 + s).unwrap();
            let y = shift_origin(&p, 3, 2).unwrap();
            assert_eq!(y.values()[0], 0.0);
            *y.values().last().unwrap()
        })
        .collect();
    let sq: Vec<f64> = ends.iter().map(|x| x * x).collect();
    let (var, se) = mean_and_se(&sq);
    assert!((var - 0.25).abs() < 4.0 * se, "var {var}");
}

#[test]
fn distance_is_a_metric_on_shared_grids() {
    let a = generate_brownian(8, 1).unwrap();
    let b = generate_brownian(8, 2).unwrap();
    let c = generate_brownian(6, 3).unwrap();
    let ab = uniform_distance(&a, &b).unwrap();
    assert_eq!(ab, uniform_distance(&b, &a).unwrap());
    assert!(ab > 0.0);
    // c lives on a coarser grid, so every comparison with it happens on c's points
    let ac = uniform_distance(&a, &c).unwrap();
    let bc = uniform_distance(&b, &c).unwrap();
    let a_coarse = DyadicPath::from_values(6, a.values().iter().step_by(4).copied().collect()).unwrap();
    let b_coarse = DyadicPath::from_values(6, b.values().iter().step_by(4).copied().collect()).unwrap();
    assert!(uniform_distance(&a_coarse, &b_coarse).unwrap() <= ac + bc);
    let restricted = DyadicPath::from_values(6, a.values().iter().step_by(4).copied().collect()).unwrap();
    assert_eq!(uniform_distance(&a, &restricted).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn roundtrip_beyond_exhaustive_lengths(len in 15usize..400, seed in any::<u64>(), m in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let code = BitCode::random(len, &mut rng).unwrap();
        let p = decode(&code, m).unwrap();
        prop_assert_eq!(encode(&p, len).unwrap(), code);
    }

    #[test]
    fn generation_is_deterministic(n in 1u32..12, seed in any::<u64>()) {
        let a = generate_brownian(n, seed).unwrap();
        prop_assert_eq!(a.values().len(), (1usize << n) + 1);
        prop_assert_eq!(a.values()[0], 0.0);
        prop_assert!(a.values().iter().all(|v| v.is_finite()));
        prop_assert_eq!(a, generate_brownian(n, seed).unwrap());
    }

    #[test]
    fn flipped_code_mirrors_the_path(len in 1usize..64, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let code = BitCode::random(len, &mut rng).unwrap();
        let up = decode(&code, 2).unwrap();
        let down = decode(&code.flipped(), 2).unwrap();
        for (u, d) in up.values().iter().zip(down.values()) {
            prop_assert!((u + d).abs() < 1e-12);
        }
    }
}
