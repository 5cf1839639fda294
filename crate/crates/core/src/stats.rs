//! Small numeric helpers: logit transforms, the normal quantile, and the
//! line fits used by the bias correction and persistence forecasts.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn logit<F: Scalar>(p: F) -> F {
    (p / (F::one() - p)).ln()
}

/// `logit(clamp(p, eps, 1 - eps))`.
pub fn logit_clamped<F: Scalar>(p: F, eps: F) -> F {
    logit(p.max(eps).min(F::one() - eps))
}

/// Inverse logit, evaluated without overflow for large `|x|`.
pub fn ilogit<F: Scalar>(x: F) -> F {
    if x >= F::zero() {
        F::one() / (F::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (F::one() + e)
    }
}

/// Standard normal quantile `Phi^{-1}(p)` (Wichura's AS 241, about 1e-16
/// relative accuracy).
#[allow(clippy::inconsistent_digit_grouping, clippy::excessive_precision)]
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2509.080_928_730_122_7 * r + 33430.575_583_588_128) * r + 67265.770_927_008_7) * r
                + 45921.953_931_549_87)
                * r
                + 13731.693_765_509_461)
                * r
                + 1971.590_950_306_551_3)
                * r
                + 133.141_667_891_784_38)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((5226.495_278_852_545 * r + 28729.085_735_721_943) * r + 39307.895_800_092_71) * r
                + 21213.794_301_586_597)
                * r
                + 5394.196_021_424_751)
                * r
                + 687.187_007_492_057_9)
                * r
                + 42.313_330_701_600_91)
                * r
                + 1.0);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let val = if r <= 5.0 {
        r -= 1.6;
        (((((((7.745_450_142_783_414e-4 * r + 0.022_723_844_989_269_184) * r + 0.241_780_725_177_450_6) * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((1.050_750_071_644_416_9e-9 * r + 5.475_938_084_995_345e-4) * r
                + 0.015_198_666_563_616_457)
                * r
                + 0.148_103_976_427_480_08)
                * r
                + 0.689_767_334_985_1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 0.026_532_189_526_576_124)
            * r
            + 0.296_560_571_828_504_9)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103)
            / (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
                + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 0.014_875_361_290_850_615)
                * r
                + 0.136_929_880_922_735_8)
                * r
                + 0.599_832_206_555_888)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -val
    } else {
        val
    }
}

/// Standard deviation of a centred normal putting mass `gamma` on the
/// interval `[m, big_m]`.
pub fn sigma_for_mass<F: Scalar>(m: F, big_m: F, gamma: F) -> Result<F> {
    if !(big_m > m) {
        return Err(Error::domain(format!("upper bound {big_m} must exceed lower bound {m}")));
    }
    if !(gamma > F::zero() && gamma < F::one()) {
        return Err(Error::domain(format!("mass {gamma} outside (0, 1)")));
    }
    let z = normal_quantile((1.0 + gamma.as_f64()) / 2.0);
    Ok((big_m - m) / F::lit(2.0) / F::lit(z))
}

pub fn mean<F: Scalar>(v: &[F]) -> F {
    v.iter().copied().sum::<F>() / F::from_usize_lossy(v.len())
}

/// Median of a non-empty slice (average of the middle pair for even length).
pub fn median<F: Scalar>(v: &[F]) -> F {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / F::lit(2.0)
    }
}

fn weighted_line<F: Scalar>(x: &[F], y: &[F], w: &[F]) -> Result<(F, F)> {
    let sw: F = w.iter().copied().sum();
    let xm = x.iter().zip(w).map(|(&a, &b)| a * b).sum::<F>() / sw;
    let ym = y.iter().zip(w).map(|(&a, &b)| a * b).sum::<F>() / sw;
    let (mut sxx, mut sxy) = (F::zero(), F::zero());
    for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
        sxx += wi * (xi - xm) * (xi - xm);
        sxy += wi * (xi - xm) * (yi - ym);
    }
    if !(sxx > F::zero()) {
        return Err(Error::SingularDesign("predictor has no spread".into()));
    }
    let beta = sxy / sxx;
    Ok((ym - beta * xm, beta))
}

fn check_xy<F: Scalar>(x: &[F], y: &[F], min: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::structural(format!("{} predictors for {} responses", x.len(), y.len())));
    }
    if x.len() < min {
        return Err(Error::domain(format!("need at least {min} points, got {}", x.len())));
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(Error::SingularDesign("all predictor values are identical".into()));
    }
    Ok(())
}

/// Ordinary least squares line `y = alpha + beta x`.
pub fn ols<F: Scalar>(x: &[F], y: &[F]) -> Result<(F, F)> {
    check_xy(x, y, 2)?;
    weighted_line(x, y, &vec![F::one(); x.len()])
}

/// Huber M-estimate of `y = alpha + beta x` by iteratively reweighted least
/// squares, starting from OLS. The residual scale is re-estimated each
/// iteration as `median|r| / 0.6745`.
pub fn huber_fit<F: Scalar>(x: &[F], y: &[F], tuning: F) -> Result<(F, F)> {
    check_xy(x, y, 3)?;
    if !(tuning > F::zero()) {
        return Err(Error::domain("Huber tuning constant must be positive"));
    }
    // centre the predictor so year-sized values stay well conditioned
    let xm = mean(x);
    let xc: Vec<F> = x.iter().map(|&v| v - xm).collect();
    let magnitude = y.iter().fold(F::zero(), |m, v| m.max(v.abs()));
    let floor = F::epsilon() * F::lit(16.0) * (F::one() + magnitude);
    let (mut a, mut b) = weighted_line(&xc, y, &vec![F::one(); x.len()])?;
    let mut w = vec![F::one(); x.len()];
    for _ in 0..100 {
        let r: Vec<F> = xc.iter().zip(y).map(|(&xi, &yi)| yi - a - b * xi).collect();
        let abs: Vec<F> = r.iter().map(|v| v.abs()).collect();
        let scale = (median(&abs) / F::lit(0.6745)).max(floor);
        for (wi, ri) in w.iter_mut().zip(&abs) {
            let u = *ri / scale;
            *wi = if u <= tuning { F::one() } else { tuning / u };
        }
        let (na, nb) = weighted_line(&xc, y, &w)?;
        let tol = |v: F| F::lit(1e-8).max(F::epsilon() * F::lit(4.0) * (F::one() + v.abs()));
        let done = (na - a).abs() < tol(na) && (nb - b).abs() < tol(nb);
        a = na;
        b = nb;
        if done {
            break;
        }
    }
    Ok((a - b * xm, b))
}

/// Pearson correlation; zero when either series is constant.
pub fn pearson<F: Scalar>(a: &[F], b: &[F]) -> F {
    let (am, bm) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (F::zero(), F::zero(), F::zero());
    for (&x, &y) in a.iter().zip(b) {
        sab += (x - am) * (y - bm);
        saa += (x - am) * (x - am);
        sbb += (y - bm) * (y - bm);
    }
    if saa == F::zero() || sbb == F::zero() {
        return F::zero();
    }
    (sab / (saa.sqrt() * sbb.sqrt())).max(-F::one()).min(F::one())
}
