use super::{contour_from_lengths, proportion_from_field, Contour, Point, RegionGeometry};
use crate::error::{Error, Result};
use crate::grid::{BinaryField, CellMask, Field, Scope, Stamp};
use crate::scalar::Scalar;

/// Signed shoelace area; positive for counter-clockwise order.
pub fn signed_area<F: Scalar>(pts: &[Point<F>]) -> F {
    let n = pts.len();
    let mut twice = F::zero();
    for i in 0..n {
        let (a, b) = (pts[i], pts[(i + 1) % n]);
        twice += a.x * b.y - b.x * a.y;
    }
    twice / F::lit(2.0)
}

pub fn shoelace_area<F: Scalar>(pts: &[Point<F>]) -> F {
    signed_area(pts).abs()
}

/// Even-odd test over the given edges; points on an edge count as inside.
fn inside_edges<F: Scalar>(p: Point<F>, edges: &[(Point<F>, Point<F>)]) -> bool {
    let mut inside = false;
    for &(a, b) in edges {
        let cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
        if cross == F::zero()
            && p.x >= a.x.min(b.x)
            && p.x <= a.x.max(b.x)
            && p.y >= a.y.min(b.y)
            && p.y <= a.y.max(b.y)
        {
            return true;
        }
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// Even-odd point-in-polygon test, boundary inclusive.
pub fn point_in_polygon<F: Scalar>(p: Point<F>, pts: &[Point<F>]) -> bool {
    let n = pts.len();
    let edges: Vec<_> = (0..n).map(|i| (pts[i], pts[(i + 1) % n])).collect();
    inside_edges(p, &edges)
}

/// Ice field enclosed by `contour`: in-scope ocean cells are set when their
/// center lies inside, other ocean cells are clear, land is unscored.
pub fn rasterize<F: Scalar>(contour: &Contour<F>, mask: &CellMask, scope: Scope) -> BinaryField {
    let grid = mask.grid();
    let pts = contour.points();
    let n = pts.len();
    let edges: Vec<_> = (0..n).map(|i| (pts[i], pts[(i + 1) % n])).collect();
    let mut values = vec![None; grid.len()];
    let mut row_edges = Vec::with_capacity(n);
    for r in 0..grid.nrows {
        let y = F::lit(grid.center(grid.index(r, 0))[1]);
        row_edges.clear();
        row_edges.extend(edges.iter().copied().filter(|(a, b)| y >= a.y.min(b.y) && y <= a.y.max(b.y)));
        for c in 0..grid.ncols {
            let i = grid.index(r, c);
            if !mask.is_ocean(i) {
                continue;
            }
            let inside = mask.in_scope(i, scope) && !row_edges.is_empty() && {
                let [cx, _] = grid.center(i);
                inside_edges(Point::new(F::lit(cx), y), &row_edges)
            };
            values[i] = Some(inside);
        }
    }
    Field { grid: grid.clone(), stamp: Stamp::default(), values }
}

/// Mean area mismatch between each observed field and its reconstruction
/// through the line system, for each candidate geometry.
///
/// A field is reduced to per-line proportions, turned back into a contour and
/// rasterized; the symmetric-difference area within the region is divided by
/// the observed ice area. Fields with no ice in the region are skipped.
pub fn discretization_error<F: Scalar>(
    observed: &[BinaryField],
    mask: &CellMask,
    geoms: &[RegionGeometry<F>],
) -> Result<Vec<F>> {
    if observed.is_empty() {
        return Err(Error::domain("need at least one observed field"));
    }
    geoms
        .iter()
        .map(|geom| {
            let scope = Scope::Region(geom.region);
            let mut total = F::zero();
            let mut used = 0usize;
            for field in observed {
                let ice: f64 = mask
                    .scope_cells(scope)
                    .filter(|&i| field.values[i] == Some(true))
                    .map(|i| mask.areas()[i])
                    .sum();
                if ice == 0.0 {
                    continue;
                }
                let pis = proportion_from_field(geom, field)?;
                let lengths = pis
                    .iter()
                    .enumerate()
                    .map(|(i, &p)| geom.line(i).length_from_proportion(p))
                    .collect::<Result<Vec<F>>>()?;
                let contour = contour_from_lengths(geom, &lengths)?;
                let approx = rasterize(&contour, mask, scope);
                let diff: f64 = mask
                    .scope_cells(scope)
                    .filter(|&i| (field.values[i] == Some(true)) != (approx.values[i] == Some(true)))
                    .map(|i| mask.areas()[i])
                    .sum();
                total += F::lit(diff / ice);
                used += 1;
            }
            Ok(if used == 0 { F::zero() } else { total / F::from_usize_lossy(used) })
        })
        .collect()
}
