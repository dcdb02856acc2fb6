use explain_core::eval::pearson;
use num_rational::Ratio;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Textbook covariance over product of standard deviations, in f64.
fn oracle(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum::<f64>().sqrt();
    let sy: f64 = y.iter().map(|b| (b - my).powi(2)).sum::<f64>().sqrt();
    cov / (sx * sy)
}

fn ratios(v: &[i64]) -> Vec<Ratio<i64>> {
    v.iter().map(|&i| Ratio::from_integer(i)).collect()
}

#[test]
fn matches_definition_on_random_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut done = 0;
    while done < 1000 {
        let n = rng.gen_range(2..40);
        let x: Vec<Ratio<i64>> = (0..n).map(|_| Ratio::new(rng.gen_range(-500..500), rng.gen_range(1..7))).collect();
        let y: Vec<Ratio<i64>> = (0..n).map(|_| Ratio::new(rng.gen_range(-500..500), rng.gen_range(1..7))).collect();
        let fx: Vec<f64> = x.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect();
        let fy: Vec<f64> = y.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect();
        let Ok(r) = pearson(&x, &y) else { continue };
        assert!((r - oracle(&fx, &fy)).abs() < 1e-9, "{r} vs {}", oracle(&fx, &fy));
        done += 1;
    }
}

#[test]
fn exact_unit_correlations() {
    let x = ratios(&[1, 2, 3, 4, 5, 6]);
    assert_eq!(pearson(&x, &ratios(&[3, 5, 7, 9, 11, 13])).unwrap(), 1.0);
    assert_eq!(pearson(&x, &ratios(&[-2, -4, -6, -8, -10, -12])).unwrap(), -1.0);
    assert_eq!(pearson(&ratios(&[4, 2, 6]), &ratios(&[5, 6, 4])).unwrap(), -1.0);
}

#[test]
fn degenerate_inputs() {
    assert!(pearson(&ratios(&[1, 1, 1]), &ratios(&[1, 2, 3])).is_err());
    assert!(pearson(&ratios(&[1, 2]), &ratios(&[1, 2, 3])).is_err());
    assert!(pearson(&ratios(&[1]), &ratios(&[1])).is_err());
}

fn vec_pair() -> impl Strategy<Value = (Vec<i64>, Vec<i64>)> {
    (3usize..20).prop_flat_map(|n| (prop::collection::vec(-50i64..50, n), prop::collection::vec(-50i64..50, n)))
}

proptest! {
    #[test]
    fn symmetric_bounded_and_affine_invariant((x, y) in vec_pair(), a in 1i64..9, b in -20i64..20) {
        let (rx, ry) = (ratios(&x), ratios(&y));
        if let Ok(r) = pearson(&rx, &ry) {
            prop_assert!((-1.0..=1.0).contains(&r));
            prop_assert_eq!(r, pearson(&ry, &rx).unwrap());
            let scaled: Vec<i64> = x.iter().map(|v| a * v + b).collect();
            prop_assert!((pearson(&ratios(&scaled), &ry).unwrap() - r).abs() < 1e-12);
            let negated: Vec<i64> = x.iter().map(|v| -v).collect();
            prop_assert_eq!(pearson(&ratios(&negated), &ry).unwrap(), -r);
        }
    }
}
