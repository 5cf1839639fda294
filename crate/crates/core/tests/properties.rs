use icecontour::geometry::{has_self_intersection, repair_self_intersections, Contour, Line, Point, Span};
use icecontour::grid::{area_weights, ensemble_probability, CellMask, Field, GridSpec, Scope, Stamp};
use icecontour::mixture::{fit_weight, mcf_binary, mcf_probability, EmConfig, TrainingTriple};
use icecontour::reference::ensemble_binary;
use icecontour::stats::{ilogit, logit};
use icecontour::verify::{brier, reliability, Weighting};
use icecontour::BinaryField;
use proptest::prelude::*;

fn spans() -> impl Strategy<Value = Vec<Span<f64>>> {
    prop::collection::vec((0.1f64..20.0, 0.1f64..10.0), 1..5).prop_map(|parts| {
        let mut out = Vec::new();
        let mut t = 0.0;
        for (k, (ocean, land)) in parts.into_iter().enumerate() {
            if k > 0 {
                t += land;
            }
            out.push(Span { start: t, end: t + ocean });
            t += ocean;
        }
        out
    })
}

fn field(n: usize, v: Vec<Option<bool>>) -> BinaryField {
    Field::new(GridSpec::square(1, n, 1.0).unwrap(), Stamp::default(), v).unwrap()
}

proptest! {
    #[test]
    fn proportion_length_round_trip(s in spans(), pi in 0.0f64..=1.0) {
        let line = Line::from_spans(Point::new(0.0, 0.0), 0.3, s).unwrap();
        let len = line.length_from_proportion(pi).unwrap();
        prop_assert!(len >= 0.0 && len <= line.length() + 1e-12);
        prop_assert!((line.proportion_from_length(len) - pi).abs() < 1e-9);
    }

    #[test]
    fn length_is_monotone_in_proportion(s in spans(), a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
        let line = Line::from_spans(Point::new(1.0, 2.0), -1.0, s).unwrap();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(line.length_from_proportion(lo).unwrap() <= line.length_from_proportion(hi).unwrap());
    }

    #[test]
    fn logit_inverse(p in 1e-6f64..(1.0 - 1e-6)) {
        prop_assert!((ilogit(logit(p)) - p).abs() < 1e-12);
    }

    #[test]
    fn repaired_star_is_simple(radii in prop::collection::vec(0.5f64..10.0, 8..40), jitter in prop::collection::vec(-0.4f64..0.4, 40)) {
        let n = radii.len();
        let pts: Vec<Point<f64>> = (0..n)
            .map(|i| {
                let a = std::f64::consts::TAU * (i as f64 + jitter[i]) / n as f64;
                Point::new(radii[i] * a.cos(), radii[i] * a.sin())
            })
            .collect();
        let c = Contour::new(pts).unwrap();
        let fixed = repair_self_intersections(&c, 0.01, 2.0, 40.0).unwrap();
        prop_assert!(!has_self_intersection(&fixed));
        if !has_self_intersection(&c) {
            prop_assert_eq!(fixed.points(), c.points());
        }
    }

    #[test]
    fn em_log_likelihood_monotone(
        raw in prop::collection::vec((any::<bool>(), 0.0f64..=1.0, 0.0f64..=1.0, 0.1f64..2.0), 1..200),
        w0 in 0.01f64..0.99,
    ) {
        let triples: Vec<TrainingTriple<f64>> =
            raw.into_iter().map(|(o, gp, gc, area)| TrainingTriple { observed: o, gp, gc, area }).collect();
        if let Ok(fit) = fit_weight(&triples, &EmConfig { w0, ..Default::default() }) {
            prop_assert!((0.0..=1.0).contains(&fit.w));
            for w in fit.log_likelihood.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-12);
            }
        }
    }

    #[test]
    fn mixture_is_bounded(gp in prop::collection::vec(0.0f64..=1.0, 16), gc in prop::collection::vec(0.0f64..=1.0, 16), w in 0.0f64..=1.0) {
        let g = GridSpec::square(4, 4, 1.0).unwrap();
        let a = Field::new(g.clone(), Stamp::default(), gp.iter().map(|&v| Some(v)).collect()).unwrap();
        let b = Field::new(g, Stamp::default(), gc.iter().map(|&v| Some(v)).collect()).unwrap();
        let m = mcf_probability(&a, &b, w).unwrap();
        for i in 0..16 {
            let v = m.values[i].unwrap();
            prop_assert!(v >= gp[i].min(gc[i]) - 1e-15 && v <= gp[i].max(gc[i]) + 1e-15);
        }
    }

    #[test]
    fn ensemble_binary_is_thresholded_probability(members in prop::collection::vec(prop::collection::vec(any::<bool>(), 6), 1..12)) {
        let fields: Vec<BinaryField> = members.into_iter().map(|m| field(6, m.into_iter().map(Some).collect())).collect();
        let p = ensemble_probability::<f64>(&fields).unwrap();
        prop_assert_eq!(ensemble_binary(&fields).unwrap(), mcf_binary(&p));
    }

    #[test]
    fn brier_complement_symmetry(f in prop::collection::vec(0.0f64..=1.0, 9), o in prop::collection::vec(any::<bool>(), 9)) {
        let g = GridSpec::square(3, 3, 1.0).unwrap();
        let w = area_weights::<f64>(&CellMask::all_ocean(g.clone(), 0).unwrap(), Scope::Global).unwrap();
        let fa = Field::new(g.clone(), Stamp::default(), f.iter().map(|&v| Some(v)).collect()).unwrap();
        let fb = fa.map(|v| 1.0 - v);
        let oa = Field::new(g, Stamp::default(), o.iter().map(|&v| Some(v)).collect()).unwrap();
        let ob = oa.map(|v| !v);
        let (x, y) = (brier(&fa, &oa, &w).unwrap(), brier(&fb, &ob, &w).unwrap());
        prop_assert!((x - y).abs() < 1e-14);
        prop_assert!((0.0..=1.0).contains(&x));
    }

    #[test]
    fn reliability_partitions_cells(f in prop::collection::vec(0.0f64..=1.0, 25), o in prop::collection::vec(any::<bool>(), 25), bins in 2usize..15) {
        let g = GridSpec::square(5, 5, 1.0).unwrap();
        let w = area_weights::<f64>(&CellMask::all_ocean(g.clone(), 0).unwrap(), Scope::Global).unwrap();
        let fa = Field::new(g.clone(), Stamp::default(), f.iter().map(|&v| Some(v)).collect()).unwrap();
        let oa = Field::new(g, Stamp::default(), o.iter().map(|&v| Some(v)).collect()).unwrap();
        let area = reliability(&[(&fa, &oa)], &w, bins, Weighting::Area).unwrap();
        let equal = reliability(&[(&fa, &oa)], &w, bins, Weighting::Equal).unwrap();
        prop_assert_eq!(area.bins.iter().map(|b| b.count).sum::<usize>(), 25);
        for (a, e) in area.bins.iter().zip(&equal.bins) {
            prop_assert_eq!(a.count, e.count);
            if let (Some(x), Some(y)) = (a.observed_freq, e.observed_freq) {
                prop_assert!((0.0..=1.0).contains(&x));
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }
}
