// SPDX-License-Identifier: Apache-2.0

//! Independent oracles shared by the integration tests. Nothing here calls
//! into the code paths it is used to check.

#![allow(dead_code)]

use std::cell::RefCell;
use std::collections::BTreeMap;

use astro_float::{BigFloat, Consts, RoundingMode};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Shannon entropy in bits, `-Σ p·log2 p` evaluated with 128-bit
/// mantissas and rounded to f64 once at the end.
pub fn entropy_oracle(counts: &[u64]) -> f64 {
    thread_local! {
        static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
    }
    CONSTS.with(|cc| entropy_with(counts, &mut cc.borrow_mut()))
}

fn entropy_with(counts: &[u64], cc: &mut Consts) -> f64 {
    const P: usize = 128;
    const RM: RoundingMode = RoundingMode::ToEven;
    let total = BigFloat::from_u64(counts.iter().sum(), P);
    let mut h = BigFloat::from_u64(0, P);
    for &c in counts.iter().filter(|&&c| c > 0) {
        let p = BigFloat::from_u64(c, P).div(&total, P, RM);
        h = h.sub(&p.mul(&p.ln(P, RM, cc), P, RM), P, RM);
    }
    let bits = h.div(&BigFloat::from_u64(2, P).ln(P, RM, cc), P, RM);
    if bits.is_zero() {
        return 0.0;
    }
    bits.to_string().parse().expect("decimal rendering")
}

/// 1..=200 distinct tokens with counts 1..=50.
pub fn random_histograms(seed: u64, n: usize) -> Vec<Vec<u64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let distinct = rng.gen_range(1..=200);
            (0..distinct).map(|_| rng.gen_range(1..=50)).collect()
        })
        .collect()
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite")
}

/// Pearson r of paired samples: covariance and variances exact in
/// rationals, one square root at the end.
pub fn pearson_oracle(xs: &[f64], ys: &[BigRational]) -> f64 {
    let n = BigRational::from_integer(BigInt::from(xs.len()));
    let xs: Vec<BigRational> = xs.iter().map(|&x| exact(x)).collect();
    let mx = xs.iter().fold(BigRational::zero(), |a, b| a + b) / &n;
    let my = ys.iter().fold(BigRational::zero(), |a, b| a + b) / &n;
    let mut sxy = BigRational::zero();
    let mut sxx = BigRational::zero();
    let mut syy = BigRational::zero();
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - &mx;
        let dy = y - &my;
        sxy += &dx * &dy;
        sxx += &dx * &dx;
        syy += &dy * &dy;
    }
    let r2 = (&sxy * &sxy) / (sxx * syy);
    let r = r2.to_f64().expect("finite").sqrt();
    if sxy.is_negative() {
        -r
    } else {
        r
    }
}

/// Per-image mean rating as an exact rational.
pub fn mean_ratings(ratings: &[(String, i32)]) -> BTreeMap<String, BigRational> {
    let mut sums: BTreeMap<String, (i64, i64)> = BTreeMap::new();
    for (id, score) in ratings {
        let e = sums.entry(id.clone()).or_default();
        e.0 += i64::from(*score);
        e.1 += 1;
    }
    sums.into_iter()
        .map(|(id, (s, n))| (id, BigRational::new(BigInt::from(s), BigInt::from(n))))
        .collect()
}

/// Prints one acceptance line and fails the test when `ok` is false.
pub fn criterion(name: &str, ok: bool, detail: impl AsRef<str>) {
    let status = if ok { "PASS" } else { "FAIL" };
    println!("[{status}] {name}: {}", detail.as_ref());
    assert!(ok, "acceptance criterion failed: {name}: {}", detail.as_ref());
}
