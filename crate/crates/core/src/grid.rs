//! The raster world: grid layout, land/ocean/region masks, per-cell areas and
//! the field containers used throughout the pipeline.
//!
//! Cells are stored row-major with row 0 at the bottom (smallest `y`). Planar
//! coordinates are nominal kilometres; cell `(row, col)` spans
//! `[origin.x + col*dx, origin.x + (col+1)*dx) x [origin.y + row*dy, ...)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nrows: usize,
    pub ncols: usize,
    pub dx_km: f64,
    pub dy_km: f64,
    /// Lower-left corner of cell (0, 0).
    pub origin: [f64; 2],
}

impl GridSpec {
    pub fn new(nrows: usize, ncols: usize, dx_km: f64, dy_km: f64, origin: [f64; 2]) -> Result<Self> {
        let g = GridSpec { nrows, ncols, dx_km, dy_km, origin };
        g.validate()?;
        Ok(g)
    }

    /// Square cells of side `cell_km` with the origin at (0, 0).
    pub fn square(nrows: usize, ncols: usize, cell_km: f64) -> Result<Self> {
        Self::new(nrows, ncols, cell_km, cell_km, [0.0, 0.0])
    }

    pub fn validate(&self) -> Result<()> {
        if self.nrows == 0 || self.ncols == 0 {
            return Err(Error::domain("grid must have at least one row and column"));
        }
        if !(self.dx_km > 0.0 && self.dy_km > 0.0) || !self.dx_km.is_finite() || !self.dy_km.is_finite() {
            return Err(Error::domain("cell sizes must be positive and finite"));
        }
        if !self.origin.iter().all(|v| v.is_finite()) {
            return Err(Error::domain("grid origin must be finite"));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nrows * self.ncols
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.ncols + col
    }

    #[inline]
    pub fn row_col(&self, idx: usize) -> (usize, usize) {
        (idx / self.ncols, idx % self.ncols)
    }

    pub fn center(&self, idx: usize) -> [f64; 2] {
        let (r, c) = self.row_col(idx);
        [
            self.origin[0] + (c as f64 + 0.5) * self.dx_km,
            self.origin[1] + (r as f64 + 0.5) * self.dy_km,
        ]
    }

    /// Cell containing the point, if it lies on the grid.
    pub fn cell_at(&self, x: f64, y: f64) -> Option<usize> {
        let fx = (x - self.origin[0]) / self.dx_km;
        let fy = (y - self.origin[1]) / self.dy_km;
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let (c, r) = (fx.floor() as usize, fy.floor() as usize);
        (c < self.ncols && r < self.nrows).then(|| self.index(r, c))
    }

    pub fn min_cell_km(&self) -> f64 {
        self.dx_km.min(self.dy_km)
    }

    /// `[xmin, ymin, xmax, ymax]` of the whole grid.
    pub fn bounds(&self) -> [f64; 4] {
        [
            self.origin[0],
            self.origin[1],
            self.origin[0] + self.ncols as f64 * self.dx_km,
            self.origin[1] + self.nrows as f64 * self.dy_km,
        ]
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec, what: &str) -> Result<()> {
        if self != other {
            return Err(Error::structural(format!("{what}: grid specifications differ")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellLabel {
    Ocean,
    Land,
    /// Beyond the modelled domain; never scored.
    Outside,
}

/// Which ocean cells an operation looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scope {
    Global,
    Region(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellMask {
    grid: GridSpec,
    labels: Vec<CellLabel>,
    regions: Vec<Option<u32>>,
    /// Physical cell areas (km^2).
    areas: Vec<f64>,
}

impl CellMask {
    /// Mask with uniform physical areas `dx * dy`.
    pub fn new(grid: GridSpec, labels: Vec<CellLabel>, regions: Vec<Option<u32>>) -> Result<Self> {
        let areas = vec![grid.dx_km * grid.dy_km; grid.len()];
        Self::with_areas(grid, labels, regions, areas)
    }

    /// Mask with an explicit per-cell area raster (e.g. polar grids).
    pub fn with_areas(
        grid: GridSpec,
        labels: Vec<CellLabel>,
        regions: Vec<Option<u32>>,
        areas: Vec<f64>,
    ) -> Result<Self> {
        grid.validate()?;
        let n = grid.len();
        if labels.len() != n || regions.len() != n || areas.len() != n {
            return Err(Error::structural(format!(
                "mask layers must have {n} cells (labels {}, regions {}, areas {})",
                labels.len(),
                regions.len(),
                areas.len()
            )));
        }
        for (i, (l, r)) in labels.iter().zip(&regions).enumerate() {
            if r.is_some() && *l != CellLabel::Ocean {
                return Err(Error::structural(format!("cell {i}: region id on a non-ocean cell")));
            }
        }
        if let Some(i) = areas.iter().position(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::domain(format!("cell {i}: area must be finite and nonnegative")));
        }
        Ok(CellMask { grid, labels, regions, areas })
    }

    /// All-ocean mask of a single region.
    pub fn all_ocean(grid: GridSpec, region: u32) -> Result<Self> {
        let n = grid.len();
        Self::new(grid, vec![CellLabel::Ocean; n], vec![Some(region); n])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn labels(&self) -> &[CellLabel] {
        &self.labels
    }

    pub fn regions(&self) -> &[Option<u32>] {
        &self.regions
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    #[inline]
    pub fn label(&self, idx: usize) -> CellLabel {
        self.labels[idx]
    }

    #[inline]
    pub fn region(&self, idx: usize) -> Option<u32> {
        self.regions[idx]
    }

    #[inline]
    pub fn is_ocean(&self, idx: usize) -> bool {
        self.labels[idx] == CellLabel::Ocean
    }

    #[inline]
    pub fn in_scope(&self, idx: usize, scope: Scope) -> bool {
        match scope {
            Scope::Global => self.is_ocean(idx),
            Scope::Region(r) => self.regions[idx] == Some(r),
        }
    }

    /// Distinct region ids in ascending order.
    pub fn region_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.regions.iter().flatten().copied().collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn scope_cells(&self, scope: Scope) -> impl Iterator<Item = usize> + '_ {
        (0..self.grid.len()).filter(move |&i| self.in_scope(i, scope))
    }
}

/// Per-cell area weights `a_s`, `None` outside the scored scope.
#[derive(Clone, Debug, PartialEq)]
pub struct AreaWeights<F> {
    values: Vec<Option<F>>,
}

impl<F: Scalar> AreaWeights<F> {
    pub fn values(&self) -> &[Option<F>] {
        &self.values
    }

    pub fn get(&self, idx: usize) -> Option<F> {
        self.values[idx]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scored(&self) -> impl Iterator<Item = (usize, F)> + '_ {
        self.values.iter().enumerate().filter_map(|(i, w)| w.map(|w| (i, w)))
    }

    /// Every scored cell gets the same weight (equal-cell weighting).
    pub fn equalized(&self) -> Self {
        let n = self.values.iter().flatten().count();
        let w = F::one() / F::from_usize_lossy(n.max(1));
        AreaWeights { values: self.values.iter().map(|v| v.map(|_| w)).collect() }
    }
}

/// Weights proportional to physical cell area, normalized to sum to one over
/// the scope.
pub fn area_weights<F: Scalar>(mask: &CellMask, scope: Scope) -> Result<AreaWeights<F>> {
    let total: f64 = mask.scope_cells(scope).map(|i| mask.areas[i]).sum();
    if mask.scope_cells(scope).next().is_none() {
        return Err(Error::domain(format!("no ocean cells in scope {scope:?}")));
    }
    if total <= 0.0 {
        return Err(Error::domain(format!("scope {scope:?} has zero total area")));
    }
    let values = (0..mask.grid.len())
        .map(|i| mask.in_scope(i, scope).then(|| F::lit(mask.areas[i] / total)))
        .collect();
    Ok(AreaWeights { values })
}

/// Time labels carried by a field. Masks have none of them.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Stamp {
    pub year: Option<i32>,
    pub month: Option<u8>,
    pub lead: Option<f64>,
}

impl Stamp {
    pub fn new(year: i32, month: u8, lead: Option<f64>) -> Self {
        Stamp { year: Some(year), month: Some(month), lead }
    }
}

/// A per-cell raster. `None` marks cells that are not scored (land, outside).
#[derive(Clone, Debug, PartialEq)]
pub struct Field<T> {
    pub grid: GridSpec,
    pub stamp: Stamp,
    pub values: Vec<Option<T>>,
}

/// Observations `gamma_{s,t}` and binary forecasts.
pub type BinaryField = Field<bool>;
/// Probabilities of ice presence: `g_p`, `g_c`, mixture output.
pub type ProbabilityField<F> = Field<F>;
/// Sea ice concentration in `[0, 1]`.
pub type ConcentrationField<F> = Field<F>;

impl<T: Copy> Field<T> {
    pub fn new(grid: GridSpec, stamp: Stamp, values: Vec<Option<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::structural(format!(
                "field has {} values for a {}x{} grid",
                values.len(),
                grid.nrows,
                grid.ncols
            )));
        }
        Ok(Field { grid, stamp, values })
    }

    /// Field defined on the ocean cells of `mask` (all ocean cells, regardless
    /// of region) with values from `f`.
    pub fn from_mask(mask: &CellMask, stamp: Stamp, mut f: impl FnMut(usize) -> T) -> Self {
        let values = (0..mask.grid().len()).map(|i| mask.is_ocean(i).then(|| f(i))).collect();
        Field { grid: mask.grid().clone(), stamp, values }
    }

    pub fn get(&self, idx: usize) -> Option<T> {
        self.values[idx]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map<U>(&self, mut f: impl FnMut(T) -> U) -> Field<U> {
        Field {
            grid: self.grid.clone(),
            stamp: self.stamp,
            values: self.values.iter().map(|v| v.map(&mut f)).collect(),
        }
    }

    pub fn with_stamp(mut self, stamp: Stamp) -> Self {
        self.stamp = stamp;
        self
    }

    /// Same grid and same set of scored cells.
    pub fn ensure_compatible<U>(&self, other: &Field<U>, what: &str) -> Result<()> {
        self.grid.ensure_same(&other.grid, what)?;
        if let Some(i) = self
            .values
            .iter()
            .zip(&other.values)
            .position(|(a, b)| a.is_some() != b.is_some())
        {
            return Err(Error::structural(format!("{what}: scored cells differ at cell {i}")));
        }
        Ok(())
    }
}

impl<F: Scalar> Field<F> {
    /// Validating constructor for probability or concentration rasters.
    pub fn unit_interval(grid: GridSpec, stamp: Stamp, values: Vec<Option<F>>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| matches!(v, Some(p) if !(*p >= F::zero() && *p <= F::one()))) {
            return Err(Error::domain(format!("cell {i}: value outside [0, 1]")));
        }
        Self::new(grid, stamp, values)
    }
}

impl BinaryField {
    pub fn count_ones(&self) -> usize {
        self.values.iter().filter(|v| **v == Some(true)).count()
    }

    pub fn to_probability<F: Scalar>(&self) -> ProbabilityField<F> {
        self.map(|b| if b { F::one() } else { F::zero() })
    }
}

/// Binary ice presence: a cell is ice-covered iff its concentration is at
/// least `tau` (inclusive). Unscored cells stay unscored.
pub fn threshold_concentration<F: Scalar>(c: &ConcentrationField<F>, tau: F) -> Result<BinaryField> {
    if !(tau > F::zero() && tau < F::one()) {
        return Err(Error::domain(format!("threshold {tau} must lie in (0, 1)")));
    }
    Ok(c.map(|v| v >= tau))
}

/// Fraction of members predicting ice, per cell.
pub fn ensemble_probability<F: Scalar>(members: &[BinaryField]) -> Result<ProbabilityField<F>> {
    let first = members.first().ok_or_else(|| Error::domain("ensemble has no members"))?;
    for m in &members[1..] {
        first.ensure_compatible(m, "ensemble member")?;
    }
    let n = F::from_usize_lossy(members.len());
    let values = (0..first.len())
        .map(|i| {
            first.values[i].map(|_| {
                let count = members.iter().filter(|m| m.values[i] == Some(true)).count();
                F::from_usize_lossy(count) / n
            })
        })
        .collect();
    Ok(Field { grid: first.grid.clone(), stamp: first.stamp, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> GridSpec {
        GridSpec::square(n, n, 25.0).unwrap()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(GridSpec::square(0, 3, 25.0).is_err());
        assert!(GridSpec::new(2, 2, 0.0, 1.0, [0.0, 0.0]).is_err());
    }

    #[test]
    fn cell_lookup_matches_centers() {
        let g = GridSpec::new(3, 4, 2.0, 5.0, [10.0, -5.0]).unwrap();
        for i in 0..g.len() {
            let [x, y] = g.center(i);
            assert_eq!(g.cell_at(x, y), Some(i));
        }
        assert_eq!(g.cell_at(9.99, 0.0), None);
        assert_eq!(g.cell_at(18.0, 0.0), None);
    }

    #[test]
    fn threshold_is_inclusive() {
        let g = grid(1);
        let c = Field::new(g.clone(), Stamp::default(), vec![Some(0.15f64)]).unwrap();
        assert_eq!(threshold_concentration(&c, 0.15).unwrap().values, vec![Some(true)]);
        let c = Field::new(g, Stamp::default(), vec![Some(0.0f64)]).unwrap();
        assert_eq!(threshold_concentration(&c, 0.15).unwrap().values, vec![Some(false)]);
    }

    #[test]
    fn threshold_below_everywhere_is_all_zero() {
        let g = grid(4);
        let c = Field::new(g, Stamp::default(), vec![Some(0.149f64); 16]).unwrap();
        let b = threshold_concentration(&c, 0.15).unwrap();
        assert_eq!(b.count_ones(), 0);
    }

    #[test]
    fn threshold_leaves_land_unscored() {
        let g = grid(1);
        let c: ConcentrationField<f64> = Field::new(g, Stamp::default(), vec![None]).unwrap();
        assert_eq!(threshold_concentration(&c, 0.15).unwrap().values, vec![None]);
        assert!(threshold_concentration(&c, 1.0).is_err());
    }

    #[test]
    fn equal_area_weights() {
        let m = CellMask::all_ocean(GridSpec::square(2, 2, 25.0).unwrap(), 1).unwrap();
        let w = area_weights::<f64>(&m, Scope::Global).unwrap();
        assert!(w.values().iter().all(|v| *v == Some(0.25)));
    }

    #[test]
    fn weights_follow_physical_area() {
        let g = GridSpec::square(1, 2, 1.0).unwrap();
        let m = CellMask::with_areas(g, vec![CellLabel::Ocean; 2], vec![None; 2], vec![1.0, 3.0]).unwrap();
        let w = area_weights::<f64>(&m, Scope::Global).unwrap();
        assert_eq!(w.values(), &[Some(0.25), Some(0.75)]);
    }

    #[test]
    fn weights_sum_to_one_on_mixed_mask() {
        let g = grid(7);
        let labels: Vec<_> = (0..49)
            .map(|i| match i % 5 {
                0 => CellLabel::Land,
                1 => CellLabel::Outside,
                _ => CellLabel::Ocean,
            })
            .collect();
        let regions = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (*l == CellLabel::Ocean).then_some((i % 2) as u32))
            .collect();
        let areas = (0..49).map(|i| 1.0 + (i as f64).sin().abs()).collect();
        let m = CellMask::with_areas(g, labels, regions, areas).unwrap();
        for scope in [Scope::Global, Scope::Region(0), Scope::Region(1)] {
            let w = area_weights::<f64>(&m, scope).unwrap();
            let mut total = 0.0;
            for v in w.values().iter().flatten() {
                total += v;
            }
            assert!((total - 1.0).abs() < 1e-12, "{scope:?}: {total}");
        }
        assert!(area_weights::<f64>(&m, Scope::Region(9)).is_err());
    }

    #[test]
    fn region_ids_require_ocean() {
        let g = grid(1);
        assert!(CellMask::new(g, vec![CellLabel::Land], vec![Some(1)]).is_err());
    }

    #[test]
    fn ensemble_fraction() {
        let g = grid(1);
        let mk = |b| Field::new(g.clone(), Stamp::default(), vec![Some(b)]).unwrap();
        let members = vec![mk(true), mk(false), mk(false), mk(false)];
        let p = ensemble_probability::<f64>(&members).unwrap();
        assert_eq!(p.values, vec![Some(0.25)]);
        let all: Vec<_> = (0..25).map(|_| mk(true)).collect();
        assert_eq!(ensemble_probability::<f64>(&all).unwrap().values, vec![Some(1.0)]);
        assert!(ensemble_probability::<f64>(&[]).is_err());
    }
}
