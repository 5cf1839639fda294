//! Reference forecasts: binary climatology, binary ensemble median, and
//! damped persistence of the initialization-month concentration anomaly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{BinaryField, ConcentrationField, Field, GridSpec, Stamp};
use crate::scalar::Scalar;
use crate::stats::{ols, pearson};

/// Concentration at or above which a cell counts as ice.
pub const ICE_THRESHOLD: f64 = 0.15;

fn count_threshold(fields: &[BinaryField], what: &str, ice: impl Fn(usize) -> bool) -> Result<BinaryField> {
    let first = fields.first().ok_or_else(|| Error::domain(format!("{what} needs at least one field")))?;
    for f in &fields[1..] {
        first.ensure_compatible(f, what)?;
    }
    let values = (0..first.len())
        .map(|i| first.values[i].map(|_| ice(fields.iter().filter(|f| f.values[i] == Some(true)).count())))
        .collect();
    Ok(Field { grid: first.grid.clone(), stamp: first.stamp, values })
}

/// Ice where it was present in at least `ceil(P/2)` of the `P` years.
pub fn climatology_binary(fields: &[BinaryField]) -> Result<BinaryField> {
    let need = fields.len().div_ceil(2);
    count_threshold(fields, "climatology_binary", |k| k >= need)
}

/// Ice where at least half the members have it; ties go to ice.
pub fn ensemble_binary(members: &[BinaryField]) -> Result<BinaryField> {
    let n = members.len();
    count_threshold(members, "ensemble_binary", |k| 2 * k >= n)
}

/// Year of the initialization month for target year `t`.
pub fn init_year(target_month: u8, init_month: u8, t: i32) -> i32 {
    if init_month <= target_month {
        t
    } else {
        t - 1
    }
}

/// Per-cell coefficients. Trend levels are stored at the fit's reference
/// years, so `trend(t) = level + slope (t - ref)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellPersistence<F> {
    pub level_m: F,
    pub slope_m: F,
    pub level_i: F,
    pub slope_i: F,
    pub rho: F,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PersistenceFit<F> {
    pub grid: GridSpec,
    pub target_month: u8,
    pub init_month: u8,
    pub ref_year_m: i32,
    pub ref_year_i: i32,
    pub years_m: (i32, i32),
    pub years_i: (i32, i32),
    pub cells: Vec<Option<CellPersistence<F>>>,
}

impl<F: Scalar> PersistenceFit<F> {
    pub fn trend_m(&self, c: &CellPersistence<F>, t: i32) -> F {
        c.level_m + c.slope_m * F::lit(f64::from(t - self.ref_year_m))
    }

    pub fn trend_i(&self, c: &CellPersistence<F>, t: i32) -> F {
        c.level_i + c.slope_i * F::lit(f64::from(t - self.ref_year_i))
    }

    /// Coefficient rasters named `level_m`, `slope_m`, `level_i`, `slope_i`
    /// and `rho`, for dumping.
    pub fn coefficient_fields(&self) -> Vec<(&'static str, Field<F>)> {
        let pick = |f: fn(&CellPersistence<F>) -> F| Field {
            grid: self.grid.clone(),
            stamp: Stamp::default(),
            values: self.cells.iter().map(|c| c.as_ref().map(f)).collect(),
        };
        vec![
            ("level_m", pick(|c| c.level_m)),
            ("slope_m", pick(|c| c.slope_m)),
            ("level_i", pick(|c| c.level_i)),
            ("slope_i", pick(|c| c.slope_i)),
            ("rho", pick(|c| c.rho)),
        ]
    }
}

fn check_series<F: Scalar>(series: &[(i32, ConcentrationField<F>)], what: &str) -> Result<(i32, i32)> {
    if series.len() < 3 {
        return Err(Error::InsufficientData(format!("{what} has {} years, need 3", series.len())));
    }
    let first = &series[0].1;
    for w in series.windows(2) {
        if w[1].0 <= w[0].0 {
            return Err(Error::domain(format!("{what} years must be strictly increasing")));
        }
        first.grid.ensure_same(&w[1].1.grid, what)?;
    }
    Ok((series[0].0, series[series.len() - 1].0))
}

fn is_constant<F: Scalar>(v: &[F]) -> bool {
    v.iter().all(|&x| x == v[0])
}

/// Residuals this small relative to the data carry no correlation signal.
fn negligible<F: Scalar>(r: &[F], y: &[F]) -> bool {
    let scale = y.iter().fold(F::one(), |m, v| m.max(v.abs()));
    let tol = F::epsilon() * F::lit(64.0) * scale;
    r.iter().all(|v| v.abs() <= tol)
}

fn fit_cell<F: Scalar>(ym: &[F], tm: &[F], yi: &[F], ti: &[F], pairs: &[(usize, usize)]) -> Result<CellPersistence<F>> {
    let (am, bm) = ols(tm, ym)?;
    let (ai, bi) = ols(ti, yi)?;
    let rm: Vec<F> = pairs.iter().map(|&(a, _)| ym[a] - am - bm * tm[a]).collect();
    let ri: Vec<F> = pairs.iter().map(|&(_, b)| yi[b] - ai - bi * ti[b]).collect();
    let undefined = is_constant(ym) || is_constant(yi) || negligible(&rm, ym) || negligible(&ri, yi);
    let rho = if undefined { F::zero() } else { pearson(&rm, &ri) };
    Ok(CellPersistence { level_m: am, slope_m: bm, level_i: ai, slope_i: bi, rho })
}

/// Per-cell affine trends of the target-month and initialization-month
/// concentrations, and the correlation of their detrended values paired by
/// [`init_year`]. A cell is fitted only if it is scored in every year.
pub fn fit_persistence<F: Scalar>(
    target: &[(i32, ConcentrationField<F>)],
    init: &[(i32, ConcentrationField<F>)],
    target_month: u8,
    init_month: u8,
) -> Result<PersistenceFit<F>> {
    if !(1..=12).contains(&target_month) || !(1..=12).contains(&init_month) {
        return Err(Error::domain("months must be in 1..=12"));
    }
    let years_m = check_series(target, "target-month series")?;
    let years_i = check_series(init, "initialization-month series")?;
    let grid = target[0].1.grid.clone();
    grid.ensure_same(&init[0].1.grid, "persistence series")?;
    let pairs: Vec<(usize, usize)> = target
        .iter()
        .enumerate()
        .filter_map(|(a, (t, _))| {
            let ti = init_year(target_month, init_month, *t);
            init.iter().position(|(y, _)| *y == ti).map(|b| (a, b))
        })
        .collect();
    if pairs.len() < 3 {
        return Err(Error::InsufficientData(format!("{} paired years, need 3", pairs.len())));
    }
    let (ref_year_m, ref_year_i) = (years_m.1, years_i.1);
    let tm: Vec<F> = target.iter().map(|(y, _)| F::lit(f64::from(y - ref_year_m))).collect();
    let ti: Vec<F> = init.iter().map(|(y, _)| F::lit(f64::from(y - ref_year_i))).collect();
    let cells = (0..grid.len())
        .into_par_iter()
        .map(|s| {
            let ym: Option<Vec<F>> = target.iter().map(|(_, f)| f.values[s]).collect();
            let yi: Option<Vec<F>> = init.iter().map(|(_, f)| f.values[s]).collect();
            match (ym, yi) {
                (Some(ym), Some(yi)) => fit_cell(&ym, &tm, &yi, &ti, &pairs).map(Some),
                _ => Ok(None),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PersistenceFit { grid, target_month, init_month, ref_year_m, ref_year_i, years_m, years_i, cells })
}

/// `trend_m(t) + (C_init - trend_i(t_i)) rho`, clamped to `[0, 1]`.
/// `obs_init` is the initialization-month concentration in year `t_i`.
pub fn predict_persistence_concentration<F: Scalar>(
    fit: &PersistenceFit<F>,
    obs_init: &ConcentrationField<F>,
    t: i32,
) -> Result<ConcentrationField<F>> {
    fit.grid.ensure_same(&obs_init.grid, "persistence prediction")?;
    let ti = init_year(fit.target_month, fit.init_month, t);
    let values = fit
        .cells
        .iter()
        .zip(&obs_init.values)
        .map(|(c, o)| match (c, o) {
            (Some(c), Some(o)) => {
                let v = fit.trend_m(c, t) + (*o - fit.trend_i(c, ti)) * c.rho;
                Some(v.max(F::zero()).min(F::one()))
            }
            _ => None,
        })
        .collect();
    Ok(Field { grid: fit.grid.clone(), stamp: Stamp::new(t, fit.target_month, None), values })
}

/// Ice where the damped-persistence concentration is at least 0.15.
pub fn predict_persistence<F: Scalar>(fit: &PersistenceFit<F>, obs_init: &ConcentrationField<F>, t: i32) -> Result<BinaryField> {
    let c = predict_persistence_concentration(fit, obs_init, t)?;
    Ok(c.map(|v| v >= F::lit(ICE_THRESHOLD)))
}
