use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, ToPrimitive, Zero};

use super::EvalError;
use crate::model::{RATING_BASE, RATING_FLOOR};

/// Prefix rating plus the mean annotation rating, exactly.
pub fn q_e(prefix_rating: u8, annotation_ratings: &[u8]) -> Result<Ratio<i64>, EvalError> {
    if annotation_ratings.is_empty() {
        return Err(EvalError::EmptyAnnotationList);
    }
    let valid = RATING_FLOOR..=RATING_BASE;
    if let Some(bad) = std::iter::once(&prefix_rating).chain(annotation_ratings).find(|r| !valid.contains(r)) {
        return Err(EvalError::InvalidRating(*bad));
    }
    let sum: i64 = annotation_ratings.iter().map(|&r| i64::from(r)).sum();
    Ok(Ratio::from_integer(i64::from(prefix_rating)) + Ratio::new(sum, annotation_ratings.len() as i64))
}

fn big(r: &Ratio<i64>) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Sample Pearson correlation coefficient.
///
/// Sums are accumulated exactly; the final square root is the only rounding
/// step, and perfectly (anti)correlated inputs come out as exactly ±1.
pub fn pearson(x: &[Ratio<i64>], y: &[Ratio<i64>]) -> Result<f64, EvalError> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(EvalError::LengthMismatch { left: x.len(), right: y.len() });
    }
    let n = BigRational::from_integer(BigInt::from(x.len()));
    let xs: Vec<BigRational> = x.iter().map(big).collect();
    let ys: Vec<BigRational> = y.iter().map(big).collect();
    let mean_x = xs.iter().fold(BigRational::zero(), |a, b| a + b) / &n;
    let mean_y = ys.iter().fold(BigRational::zero(), |a, b| a + b) / &n;

    let (mut sxy, mut sxx, mut syy) = (BigRational::zero(), BigRational::zero(), BigRational::zero());
    for (a, b) in xs.iter().zip(&ys) {
        let dx = a - &mean_x;
        let dy = b - &mean_y;
        sxy += &dx * &dy;
        sxx += &dx * &dx;
        syy += &dy * &dy;
    }
    if sxx.is_zero() || syy.is_zero() {
        return Err(EvalError::ConstantVector);
    }
    let denom_sq = &sxx * &syy;
    let num_sq = &sxy * &sxy;
    if num_sq == denom_sq {
        return Ok(if sxy.is_negative() { -1.0 } else { 1.0 });
    }
    // r^2 is exact; only the square root is taken in floating point.
    let r_sq = (num_sq / denom_sq).to_f64().ok_or(EvalError::ConstantVector)?;
    let r = r_sq.sqrt().min(1.0);
    Ok(if sxy.is_negative() { -r } else { r })
}
