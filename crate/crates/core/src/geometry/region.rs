use serde::{Deserialize, Serialize};

use super::{repair_self_intersections, Contour, Point};
use crate::error::{Error, Result};
use crate::grid::{BinaryField, CellMask, GridSpec};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryKind {
    /// Parallel lines running off the coast from boundary points on land.
    Coastal,
    /// Lines fanning out from one central point at evenly spaced angles.
    Radial,
}

/// How to lay lines over a region.
#[derive(Clone, Debug, PartialEq)]
pub enum LineLayout<F> {
    Coastal {
        /// Direction the ice grows off the land, radians.
        angle: F,
        n_lines: usize,
        /// Explicit trace origins; when absent lines are spread evenly across
        /// the region perpendicular to `angle`.
        anchors: Option<Vec<Point<F>>>,
    },
    Radial {
        center: Point<F>,
        n_lines: usize,
    },
}

/// Distances `[start, end]` along a line, measured from its boundary point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Span<F> {
    pub start: F,
    pub end: F,
}

impl<F: Scalar> Span<F> {
    pub fn len(&self) -> F {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

/// Part of an ocean span lying inside a single grid cell.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Piece<F> {
    pub start: F,
    pub end: F,
    pub cell: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Line<F> {
    /// Boundary point `B_i`.
    pub anchor: Point<F>,
    /// Angle `theta_i`, radians.
    pub angle: F,
    ocean: Vec<Span<F>>,
    pieces: Vec<Piece<F>>,
    ocean_len: F,
}

impl<F: Scalar> Line<F> {
    /// A line from explicit ocean spans; the first span must start at the
    /// boundary point. Such lines carry no raster pieces.
    pub fn from_spans(anchor: Point<F>, angle: F, ocean: Vec<Span<F>>) -> Result<Self> {
        Self::build(anchor, angle, ocean, Vec::new())
    }

    fn build(anchor: Point<F>, angle: F, ocean: Vec<Span<F>>, pieces: Vec<Piece<F>>) -> Result<Self> {
        let first = ocean.first().ok_or_else(|| Error::domain("line has no ocean span"))?;
        if first.start != F::zero() {
            return Err(Error::domain("first ocean span must start at the boundary point"));
        }
        for (k, s) in ocean.iter().enumerate() {
            if !(s.end > s.start) {
                return Err(Error::domain(format!("ocean span {k} is empty")));
            }
            if k > 0 && !(s.start > ocean[k - 1].end) {
                return Err(Error::domain(format!("ocean spans {} and {k} overlap or touch", k - 1)));
            }
        }
        let ocean_len = ocean.iter().map(Span::len).sum();
        Ok(Line { anchor, angle, ocean, pieces, ocean_len })
    }

    /// `R_{i,1..K}`.
    pub fn ocean_spans(&self) -> &[Span<F>] {
        &self.ocean
    }

    pub fn pieces(&self) -> &[Piece<F>] {
        &self.pieces
    }

    /// Lengths `||R_{i,k}||`.
    pub fn ocean_lengths(&self) -> Vec<F> {
        self.ocean.iter().map(Span::len).collect()
    }

    /// Lengths `||H_{i,k}||` of the land crossings between ocean spans.
    pub fn land_lengths(&self) -> Vec<F> {
        self.ocean.windows(2).map(|w| w[1].start - w[0].end).collect()
    }

    /// `||R_i||`.
    pub fn ocean_length(&self) -> F {
        self.ocean_len
    }

    /// `||L_i||`.
    pub fn length(&self) -> F {
        self.ocean.last().map_or(F::zero(), |s| s.end)
    }

    pub fn point_at(&self, t: F) -> Point<F> {
        self.anchor.offset(self.angle, t)
    }

    /// Length `||y||` reaching a fraction `pi` of the ocean part: the edge
    /// lands in the first span whose cumulative ocean fraction reaches `pi`,
    /// after crossing every land gap before it.
    pub fn length_from_proportion(&self, pi: F) -> Result<F> {
        if !(pi >= F::zero() && pi <= F::one()) {
            return Err(Error::domain(format!("proportion {pi} outside [0, 1]")));
        }
        if pi == F::one() {
            return Ok(self.length());
        }
        let target = pi * self.ocean_len;
        let mut before = F::zero();
        let last = self.ocean.len() - 1;
        for (k, span) in self.ocean.iter().enumerate() {
            let len = span.len();
            if before + len >= target || k == last {
                let into = (target - before).max(F::zero()).min(len);
                return Ok(span.start + into);
            }
            before += len;
        }
        unreachable!("line has at least one span")
    }

    /// Fraction of the ocean part covered by a segment of length `len` from
    /// the boundary point.
    pub fn proportion_from_length(&self, len: F) -> F {
        let covered: F = self
            .ocean
            .iter()
            .map(|s| (len - s.start).max(F::zero()).min(s.len()))
            .sum();
        (covered / self.ocean_len).min(F::one())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionGeometry<F> {
    pub region: u32,
    pub kind: GeometryKind,
    pub lines: Vec<Line<F>>,
    /// Grid the lines were traced on; absent for hand-built geometry.
    pub grid: Option<GridSpec>,
    /// Nominal cell length, the unit for the repair tolerance.
    pub cell_km: F,
    diameter: F,
}

impl<F: Scalar> RegionGeometry<F> {
    pub fn new(region: u32, kind: GeometryKind, lines: Vec<Line<F>>, cell_km: F) -> Result<Self> {
        if lines.len() < 2 {
            return Err(Error::Construction { region, reason: "need at least two lines".into() });
        }
        if kind == GeometryKind::Radial && lines.len() < 3 {
            return Err(Error::Construction { region, reason: "radial layout needs at least three lines".into() });
        }
        let (mut lo, mut hi) = (Point::new(F::infinity(), F::infinity()), Point::new(F::neg_infinity(), F::neg_infinity()));
        for l in &lines {
            for p in [l.anchor, l.point_at(l.length())] {
                lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
                hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
            }
        }
        let diameter = lo.distance(hi).max(cell_km);
        Ok(RegionGeometry { region, kind, lines, grid: None, cell_km, diameter })
    }

    pub fn n_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn line(&self, i: usize) -> &Line<F> {
        &self.lines[i]
    }

    pub fn angles(&self) -> Vec<F> {
        self.lines.iter().map(|l| l.angle).collect()
    }

    pub fn line_lengths(&self) -> Vec<F> {
        self.lines.iter().map(Line::length).collect()
    }

    /// Bounding-box diagonal of the line system.
    pub fn diameter(&self) -> F {
        self.diameter
    }

    /// Default initial Douglas-Peucker tolerance: a tenth of a cell.
    pub fn default_eta0(&self) -> F {
        self.cell_km * F::lit(0.1)
    }
}

/// Cells crossed by the ray `start + t * (cos a, sin a)`, `t >= 0`, in order.
fn trace<F: Scalar>(grid: &GridSpec, start: Point<F>, angle: F) -> Vec<Piece<F>> {
    let (dir_x, dir_y) = (angle.cos(), angle.sin());
    let [bx0, by0, bx1, by1] = grid.bounds().map(F::lit);
    let tiny = F::lit(1e-12);
    let mut t_lo = F::zero();
    let mut t_hi = F::infinity();
    for (s, d, lo, hi) in [(start.x, dir_x, bx0, bx1), (start.y, dir_y, by0, by1)] {
        if d.abs() < tiny {
            if s < lo || s > hi {
                return Vec::new();
            }
        } else {
            let (a, b) = ((lo - s) / d, (hi - s) / d);
            t_lo = t_lo.max(a.min(b));
            t_hi = t_hi.min(a.max(b));
        }
    }
    if !(t_hi > t_lo) {
        return Vec::new();
    }
    let mut ts = vec![t_lo, t_hi];
    let (cdx, cdy) = (F::lit(grid.dx_km), F::lit(grid.dy_km));
    if dir_x.abs() >= tiny {
        for k in 0..=grid.ncols {
            let t = (bx0 + F::from_usize_lossy(k) * cdx - start.x) / dir_x;
            if t > t_lo && t < t_hi {
                ts.push(t);
            }
        }
    }
    if dir_y.abs() >= tiny {
        for k in 0..=grid.nrows {
            let t = (by0 + F::from_usize_lossy(k) * cdy - start.y) / dir_y;
            if t > t_lo && t < t_hi {
                ts.push(t);
            }
        }
    }
    ts.sort_by(|a, b| a.partial_cmp(b).expect("finite crossing"));
    let eps = F::epsilon() * F::lit(64.0) * cdx.max(cdy);
    let mut pieces: Vec<Piece<F>> = Vec::with_capacity(ts.len());
    for w in ts.windows(2) {
        if w[1] - w[0] <= eps {
            continue;
        }
        let mid = start.offset(angle, (w[0] + w[1]) / F::lit(2.0));
        if let Some(cell) = grid.cell_at(mid.x.as_f64(), mid.y.as_f64()) {
            match pieces.last_mut() {
                Some(p) if p.cell == cell => p.end = w[1],
                _ => pieces.push(Piece { start: w[0], end: w[1], cell }),
            }
        }
    }
    pieces
}

/// Splits a traced ray into ocean spans of `region`, rebased so the first
/// ocean span starts at zero. Returns the offset of that first span.
fn line_from_trace<F: Scalar>(
    mask: &CellMask,
    region: u32,
    start: Point<F>,
    angle: F,
    index: usize,
) -> Result<(Line<F>, F)> {
    let pieces: Vec<Piece<F>> = trace(mask.grid(), start, angle)
        .into_iter()
        .filter(|p| mask.region(p.cell) == Some(region))
        .collect();
    let first = pieces.first().ok_or(Error::EmptyLine { region, line: index })?;
    let offset = first.start;
    let gap = F::lit(1e-9) * F::lit(mask.grid().min_cell_km());
    let mut spans: Vec<Span<F>> = Vec::new();
    for p in &pieces {
        match spans.last_mut() {
            Some(s) if p.start - s.end <= gap => s.end = p.end,
            _ => spans.push(Span { start: p.start, end: p.end }),
        }
    }
    let rebase = |t: F| t - offset;
    let spans = spans.into_iter().map(|s| Span { start: rebase(s.start), end: rebase(s.end) }).collect();
    let pieces = pieces
        .into_iter()
        .map(|p| Piece { start: rebase(p.start), end: rebase(p.end), cell: p.cell })
        .collect();
    let line = Line::build(start.offset(angle, offset), angle, spans, pieces)
        .map_err(|e| Error::Construction { region, reason: format!("line {index}: {e}") })?;
    Ok((line, offset))
}

/// Lays lines over `region` and decomposes each into ocean spans and land
/// gaps by tracing the mask outward from its boundary point.
pub fn build_region_geometry<F: Scalar>(
    mask: &CellMask,
    region: u32,
    layout: &LineLayout<F>,
) -> Result<RegionGeometry<F>> {
    let grid = mask.grid();
    let cells: Vec<usize> = mask.scope_cells(crate::grid::Scope::Region(region)).collect();
    if cells.is_empty() {
        return Err(Error::Construction { region, reason: "region has no ocean cells".into() });
    }
    let cell_km = F::lit(grid.min_cell_km());
    let (kind, lines) = match layout {
        LineLayout::Radial { center, n_lines } => {
            if *n_lines < 3 {
                return Err(Error::Construction { region, reason: "radial layout needs at least three lines".into() });
            }
            let step = F::TAU() / F::from_usize_lossy(*n_lines);
            let mut lines = Vec::with_capacity(*n_lines);
            for i in 0..*n_lines {
                let angle = step * F::from_usize_lossy(i);
                let (line, offset) = line_from_trace(mask, region, *center, angle, i)?;
                if offset > cell_km * F::lit(1e-6) {
                    return Err(Error::Construction {
                        region,
                        reason: "radial center must lie on an ocean cell of the region".into(),
                    });
                }
                lines.push(line);
            }
            (GeometryKind::Radial, lines)
        }
        LineLayout::Coastal { angle, n_lines, anchors } => {
            if *n_lines < 2 {
                return Err(Error::Construction { region, reason: "need at least two lines".into() });
            }
            let starts = match anchors {
                Some(a) if a.len() != *n_lines => {
                    return Err(Error::Construction {
                        region,
                        reason: format!("{} anchors for {} lines", a.len(), n_lines),
                    })
                }
                Some(a) => a.clone(),
                None => spread_starts(grid, &cells, *angle, *n_lines),
            };
            let lines = starts
                .iter()
                .enumerate()
                .map(|(i, s)| line_from_trace(mask, region, *s, *angle, i).map(|(l, _)| l))
                .collect::<Result<Vec<_>>>()?;
            (GeometryKind::Coastal, lines)
        }
    };
    let mut geom = RegionGeometry::new(region, kind, lines, cell_km)?;
    geom.grid = Some(grid.clone());
    Ok(geom)
}

/// Evenly spaced trace origins behind the region, across its extent
/// perpendicular to `angle`.
fn spread_starts<F: Scalar>(grid: &GridSpec, cells: &[usize], angle: F, n: usize) -> Vec<Point<F>> {
    let (along_x, along_y) = (angle.cos(), angle.sin());
    let (across_x, across_y) = (-along_y, along_x);
    let (hx, hy) = (F::lit(grid.dx_km / 2.0), F::lit(grid.dy_km / 2.0));
    let (mut u_lo, mut u_hi, mut v_lo) = (F::infinity(), F::neg_infinity(), F::infinity());
    for &c in cells {
        let [cx, cy] = grid.center(c).map(F::lit);
        for (sx, sy) in [(-F::one(), -F::one()), (F::one(), -F::one()), (-F::one(), F::one()), (F::one(), F::one())] {
            let (x, y) = (cx + sx * hx, cy + sy * hy);
            let u = x * across_x + y * across_y;
            let v = x * along_x + y * along_y;
            u_lo = u_lo.min(u);
            u_hi = u_hi.max(u);
            v_lo = v_lo.min(v);
        }
    }
    let back = v_lo - F::lit(grid.min_cell_km());
    let width = (u_hi - u_lo) / F::from_usize_lossy(n);
    (0..n)
        .map(|k| {
            let u = u_lo + width * (F::from_usize_lossy(k) + F::lit(0.5));
            Point::new(u * across_x + back * along_x, u * across_y + back * along_y)
        })
        .collect()
}

/// Ice-covered fraction of each line's ocean part in `field`: total covered
/// ocean length over `||R_i||`, so non-contiguous ice counts in full.
pub fn proportion_from_field<F: Scalar>(geom: &RegionGeometry<F>, field: &BinaryField) -> Result<Vec<F>> {
    match &geom.grid {
        Some(g) => g.ensure_same(&field.grid, "proportion_from_field")?,
        None => return Err(Error::structural("geometry was not traced on a grid")),
    }
    Ok(geom
        .lines
        .iter()
        .map(|line| {
            let mut covered = F::zero();
            let mut all = true;
            let mut any = false;
            for p in line.pieces() {
                if field.values[p.cell] == Some(true) {
                    covered += p.end - p.start;
                    any = true;
                } else {
                    all = false;
                }
            }
            if all {
                F::one()
            } else if !any {
                F::zero()
            } else {
                (covered / line.ocean_length()).min(F::one())
            }
        })
        .collect())
}

pub fn length_from_proportion<F: Scalar>(geom: &RegionGeometry<F>, i: usize, pi: F) -> Result<F> {
    geom.lines[i].length_from_proportion(pi)
}

pub fn proportion_from_length<F: Scalar>(geom: &RegionGeometry<F>, i: usize, len: F) -> F {
    geom.lines[i].proportion_from_length(len)
}

/// The raw polygon for the given per-line lengths, before repair.
///
/// Coastal regions give `B_1..B_n, S_n..S_1`; radial regions `S_1..S_n`.
pub fn outline_from_lengths<F: Scalar>(geom: &RegionGeometry<F>, lengths: &[F]) -> Result<Contour<F>> {
    if lengths.len() != geom.n_lines() {
        return Err(Error::structural(format!("{} lengths for {} lines", lengths.len(), geom.n_lines())));
    }
    let edge: Vec<Point<F>> = geom
        .lines
        .iter()
        .zip(lengths)
        .map(|(l, &len)| l.point_at(len.max(F::zero()).min(l.length())))
        .collect();
    let points = match geom.kind {
        GeometryKind::Radial => edge,
        GeometryKind::Coastal => geom.lines.iter().map(|l| l.anchor).chain(edge.into_iter().rev()).collect(),
    };
    Contour::new(points)
}

/// Contour through the line endpoints, with self-intersections repaired
/// using the region's default tolerances.
pub fn contour_from_lengths<F: Scalar>(geom: &RegionGeometry<F>, lengths: &[F]) -> Result<Contour<F>> {
    let raw = outline_from_lengths(geom, lengths)?;
    repair_self_intersections(&raw, geom.default_eta0(), F::lit(2.0), geom.diameter())
}

/// Moves any endpoint lying within `snap` of the far end of its ocean span
/// (land or the region boundary) onto that end.
pub fn snap_to_boundary<F: Scalar>(geom: &RegionGeometry<F>, lengths: &[F], snap: F) -> Vec<F> {
    geom.lines
        .iter()
        .zip(lengths)
        .map(|(line, &t)| {
            match line.ocean_spans().iter().find(|s| t >= s.start && t <= s.end) {
                Some(s) if s.end - t <= snap => s.end,
                _ => t,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{CellLabel, CellMask, GridSpec};

    fn island_line() -> Line<f64> {
        Line::from_spans(
            Point::new(0.0, 0.0),
            0.0,
            vec![Span { start: 0.0, end: 4.0 }, Span { start: 6.0, end: 12.0 }],
        )
        .unwrap()
    }

    #[test]
    fn island_length_from_half_proportion() {
        let l = island_line();
        assert_eq!(l.ocean_lengths(), vec![4.0, 6.0]);
        assert_eq!(l.land_lengths(), vec![2.0]);
        assert_eq!(l.length_from_proportion(0.5).unwrap(), 7.0);
        assert_eq!(l.length_from_proportion(0.0).unwrap(), 0.0);
        assert_eq!(l.length_from_proportion(1.0).unwrap(), 12.0);
        assert!(l.length_from_proportion(1.2).is_err());
        assert!(l.length_from_proportion(-0.1).is_err());
    }

    #[test]
    fn island_edge_never_inside_land() {
        let l = island_line();
        // exactly the first span: stays at its end rather than jumping the gap
        assert_eq!(l.length_from_proportion(0.4).unwrap(), 4.0);
        assert_eq!(l.length_from_proportion(0.400001).unwrap(), 6.00001);
    }

    #[test]
    fn proportion_from_hand_geometry() {
        // R = (4, 6): ice over all of R1 and one unit of R2
        let l = island_line();
        assert_eq!(l.proportion_from_length(7.0), 0.5);
        assert_eq!(l.proportion_from_length(5.0), 0.4);
    }

    #[test]
    fn rejects_malformed_spans() {
        let a = Point::new(0.0, 0.0);
        assert!(Line::from_spans(a, 0.0, vec![]).is_err());
        assert!(Line::from_spans(a, 0.0, vec![Span { start: 1.0, end: 2.0 }]).is_err());
        assert!(Line::from_spans(a, 0.0, vec![Span { start: 0.0, end: 2.0 }, Span { start: 2.0, end: 3.0 }]).is_err());
    }

    fn open_water(n: usize) -> CellMask {
        CellMask::all_ocean(GridSpec::square(n, n, 1.0).unwrap(), 0).unwrap()
    }

    #[test]
    fn all_ocean_region_has_single_spans() {
        let mask = open_water(20);
        let layout = LineLayout::Coastal { angle: std::f64::consts::FRAC_PI_2, n_lines: 10, anchors: None };
        let g = build_region_geometry(&mask, 0, &layout).unwrap();
        assert_eq!(g.n_lines(), 10);
        for l in &g.lines {
            assert_eq!(l.ocean_spans().len(), 1);
            assert!(l.land_lengths().is_empty());
            assert!((l.length() - 20.0).abs() < 1e-9);
            assert!(l.anchor.y.abs() < 1e-9);
        }
    }

    #[test]
    fn island_splits_line() {
        let grid = GridSpec::square(10, 10, 1.0).unwrap();
        let mut labels = vec![CellLabel::Ocean; 100];
        let mut regions = vec![Some(0); 100];
        // island covering rows 4..6 of column 5
        for r in 4..6 {
            let i = grid.index(r, 5);
            labels[i] = CellLabel::Land;
            regions[i] = None;
        }
        let mask = CellMask::new(grid, labels, regions).unwrap();
        let layout = LineLayout::Coastal {
            angle: std::f64::consts::FRAC_PI_2,
            n_lines: 2,
            anchors: Some(vec![Point::new(5.5, 0.0), Point::new(2.5, 0.0)]),
        };
        let g = build_region_geometry(&mask, 0, &layout).unwrap();
        let l = &g.lines[0];
        assert_eq!(l.ocean_spans().len(), 2);
        let r = l.ocean_lengths();
        let h = l.land_lengths();
        assert!((r[0] - 4.0).abs() < 1e-12 && (r[1] - 4.0).abs() < 1e-12);
        assert!((h[0] - 2.0).abs() < 1e-12);
        let total: f64 = r.iter().sum::<f64>() + h.iter().sum::<f64>();
        assert!((total - l.length()).abs() < 1e-9);
        assert_eq!(g.lines[1].ocean_spans().len(), 1);
    }

    #[test]
    fn leading_land_moves_boundary_point() {
        let grid = GridSpec::square(6, 1, 1.0).unwrap();
        let mut labels = vec![CellLabel::Ocean; 6];
        let mut regions = vec![Some(0); 6];
        labels[0] = CellLabel::Land;
        regions[0] = None;
        let mask = CellMask::new(grid, labels, regions).unwrap();
        let layout = LineLayout::Coastal {
            angle: std::f64::consts::FRAC_PI_2,
            n_lines: 2,
            anchors: Some(vec![Point::new(0.5, -3.0), Point::new(0.25, 0.2)]),
        };
        let g = build_region_geometry(&mask, 0, &layout).unwrap();
        assert!((g.lines[0].anchor.y - 1.0).abs() < 1e-12);
        assert!((g.lines[0].length() - 5.0).abs() < 1e-12);
    }

    #[test]
    fn line_missing_region_is_named() {
        let mask = open_water(4);
        let layout = LineLayout::Coastal {
            angle: 0.0,
            n_lines: 2,
            anchors: Some(vec![Point::new(0.0, 1.0), Point::new(0.0, 50.0)]),
        };
        match build_region_geometry(&mask, 0, &layout) {
            Err(Error::EmptyLine { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
        assert!(build_region_geometry(&mask, 7, &layout).is_err());
    }

    #[test]
    fn radial_angles_evenly_spaced() {
        let mask = open_water(20);
        let layout = LineLayout::Radial { center: Point::new(10.0, 10.0), n_lines: 8 };
        let g = build_region_geometry(&mask, 0, &layout).unwrap();
        for (k, a) in g.angles().iter().enumerate() {
            assert!((a - k as f64 * std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        }
        assert!((g.lines[0].length() - 10.0).abs() < 1e-9);
        assert!((g.lines[1].length() - 10.0 * 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn proportions_full_and_half() {
        let mask = open_water(8);
        let layout = LineLayout::Coastal { angle: std::f64::consts::FRAC_PI_2, n_lines: 4, anchors: None };
        let g = build_region_geometry(&mask, 0, &layout).unwrap();
        let full = crate::grid::Field::from_mask(&mask, Default::default(), |_| true);
        assert!(proportion_from_field(&g, &full).unwrap().iter().all(|&p| p == 1.0));
        let grid = mask.grid().clone();
        let half = crate::grid::Field::from_mask(&mask, Default::default(), |i| grid.row_col(i).0 < 4);
        for p in proportion_from_field(&g, &half).unwrap() {
            assert!((p - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn snapping() {
        let l = Line::from_spans(
            Point::new(0.0, 0.0),
            0.0,
            vec![Span { start: 0.0, end: 100.0 }, Span { start: 150.0, end: 300.0 }],
        )
        .unwrap();
        let g = RegionGeometry::new(0, GeometryKind::Coastal, vec![l.clone(), l], 25.0).unwrap();
        assert_eq!(snap_to_boundary(&g, &[95.0, 80.0], 12.5), vec![100.0, 80.0]);
        assert_eq!(snap_to_boundary(&g, &[290.0, 160.0], 12.5), vec![300.0, 160.0]);
        assert_eq!(snap_to_boundary(&g, &[95.0, 80.0], 0.0), vec![95.0, 80.0]);
    }

    #[test]
    fn outline_orders() {
        let mk = |x: f64| {
            Line::from_spans(Point::new(x, 0.0), std::f64::consts::FRAC_PI_2, vec![Span { start: 0.0, end: 10.0 }])
                .unwrap()
        };
        let g = RegionGeometry::new(0, GeometryKind::Coastal, vec![mk(0.0), mk(1.0), mk(2.0)], 1.0).unwrap();
        let c = outline_from_lengths(&g, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(c.len(), 6);
        assert_eq!(c.area(), 0.0);
        let c = outline_from_lengths(&g, &[5.0, 5.0, 5.0]).unwrap();
        assert!((c.points()[3].y - 5.0).abs() < 1e-12 && (c.points()[3].x - 2.0).abs() < 1e-12);
        assert!((c.area() - 10.0).abs() < 1e-9);
    }
}
