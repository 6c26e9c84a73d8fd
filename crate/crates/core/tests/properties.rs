//! Invariants checked over generated inputs.

use approx::assert_abs_diff_eq;
use dfst::cft::{gaussian_kernel_correlation, update_projection, Fft2, ProjectionState, Spectrum};
use dfst::featselect::{
    build_adjacency, fisher_scores, fuse_scores, inffs_energies, pearson_scores, rank_order, select_top_k,
    ttest_scores, ClassSamples, Decay,
};
use dfst::harness::iou;
use dfst::imaging::hann_window;
use dfst::scale::{generate_candidates, soft_threshold, Dictionary};
use dfst::{BoundingBox, FeatureMap};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn feature_map(h: usize, w: usize, c: usize) -> impl Strategy<Value = FeatureMap> {
    prop::collection::vec(-1.0f64..1.0, h * w * c).prop_map(move |v| {
        let planes = v.chunks(h * w).map(<[f64]>::to_vec).collect();
        FeatureMap::from_planes(h, w, planes).unwrap()
    })
}

fn sized_map() -> impl Strategy<Value = FeatureMap> {
    (1usize..7, 1usize..7, 1usize..4).prop_flat_map(|(h, w, c)| feature_map(h, w, c))
}

/// Feature count and row-major positive / negative samples.
fn raw_samples() -> impl Strategy<Value = (usize, Vec<f64>, Vec<f64>)> {
    (1usize..6, 2usize..20, 2usize..20).prop_flat_map(|(f, n1, n2)| {
        (
            Just(f),
            prop::collection::vec(-3.0f64..3.0, f * n1),
            prop::collection::vec(-3.0f64..3.0, f * n2),
        )
    })
}

fn samples() -> impl Strategy<Value = ClassSamples> {
    raw_samples().prop_map(|(f, p, n)| ClassSamples::new(f, p, n).unwrap())
}

fn bbox() -> impl Strategy<Value = BoundingBox> {
    (0.0f64..200.0, 0.0f64..200.0, 1.0f64..80.0, 1.0f64..80.0)
        .prop_map(|(cx, cy, w, h)| BoundingBox::new(cx, cy, w, h))
}

proptest! {
    #[test]
    fn shift_then_unshift_is_identity(map in sized_map(), dy in -9isize..9, dx in -9isize..9) {
        prop_assert_eq!(map.circular_shift(dy, dx).circular_shift(-dy, -dx), map);
    }

    #[test]
    fn fft_round_trip(values in prop::collection::vec(-5.0f64..5.0, 1..64)) {
        let w = values.len();
        let fft = Fft2::new(1, w);
        let back = fft.inverse(&fft.forward(&Spectrum::from_real(1, w, &values)));
        for (a, b) in back.real().iter().zip(&values) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn kernel_is_bounded_and_peaks_at_zero_shift(x in sized_map()) {
        let fft = Fft2::new(x.height(), x.width());
        let k = gaussian_kernel_correlation(&fft, &x, &x, 0.2).unwrap();
        prop_assert!((k[0] - 1.0).abs() < 1e-9);
        for v in &k {
            prop_assert!(*v > -1e-12 && *v <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn metric_ranges(s in samples()) {
        let f = fisher_scores(&s).unwrap();
        let p = ttest_scores(&s).unwrap();
        let c = pearson_scores(&s);
        prop_assert!(f.iter().all(|v| *v >= 0.0));
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!(c.iter().all(|v| (-1.0 - 1e-12..=1.0 + 1e-12).contains(v)));
        let fused = fuse_scores(&f, &p, &c).unwrap();
        prop_assert!(fused.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn swapping_classes_flips_correlation_only((f, pos, neg) in raw_samples()) {
        let s = ClassSamples::new(f, pos.clone(), neg.clone()).unwrap();
        let swapped = ClassSamples::new(f, neg, pos).unwrap();
        let (fa, fb) = (fisher_scores(&s).unwrap(), fisher_scores(&swapped).unwrap());
        let (pa, pb) = (ttest_scores(&s).unwrap(), ttest_scores(&swapped).unwrap());
        let (ca, cb) = (pearson_scores(&s), pearson_scores(&swapped));
        for i in 0..f {
            prop_assert!((fa[i] - fb[i]).abs() <= 1e-9 * fa[i].max(1.0));
            prop_assert!((pa[i] - pb[i]).abs() <= 1e-9);
            prop_assert!((ca[i] + cb[i]).abs() <= 1e-9);
        }
    }

    #[test]
    fn rank_one_graph_keeps_score_order(s in prop::collection::vec(0.01f64..1.0, 1..11)) {
        let e = inffs_energies(&build_adjacency(&s).unwrap(), Decay::Auto).unwrap();
        prop_assert_eq!(rank_order(&e), rank_order(&s));
    }

    #[test]
    fn top_k_is_sorted_prefix(e in prop::collection::vec(prop::sample::select(vec![0.0, 0.5, 1.0, 2.0]), 1..12), k in 1usize..12) {
        prop_assume!(k <= e.len());
        let top = select_top_k(&e, k).unwrap();
        prop_assert_eq!(top.len(), k);
        for pair in top.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            prop_assert!(e[a] > e[b] || (e[a] == e[b] && a < b));
        }
        let floor = e[*top.last().unwrap()];
        for i in (0..e.len()).filter(|i| !top.contains(i)) {
            prop_assert!(e[i] <= floor);
        }
    }

    #[test]
    fn projection_stays_orthonormal(
        rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 6), 2..20),
        steps in 1usize..5,
    ) {
        let x = DMatrix::from_fn(rows.len(), 6, |r, c| rows[r][c]);
        let cov = x.transpose() * &x / rows.len() as f64;
        let mut state = ProjectionState::new(6, 3);
        for _ in 0..steps {
            state = update_projection(&state, &cov, 0.1, 3).unwrap();
            prop_assert!(state.orthonormality_error() < 1e-9);
            prop_assert!(state.weights.iter().all(|w| *w >= 0.0));
            prop_assert!(state.weights.windows(2).all(|p| p[0] >= p[1]));
        }
    }

    #[test]
    fn soft_threshold_shrinks(v in -10.0f64..10.0, t in 0.0f64..5.0) {
        let s = soft_threshold(v, t);
        prop_assert!(s.abs() <= v.abs());
        prop_assert!(s == 0.0 || s.signum() == v.signum());
        prop_assert!((v - s).abs() <= t + 1e-12);
    }

    #[test]
    fn dictionary_atoms_stay_unit(patches in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 8), 1..6), seed in 0u64..50) {
        let atoms = DMatrix::from_fn(8, 5, |r, c| ((r * 7 + c * 3) as f64 + seed as f64).sin());
        let mut dict = Dictionary::from_atoms(atoms, 0.05, 50).unwrap();
        for p in patches {
            let x = DVector::from_vec(p);
            prop_assume!(x.norm() > 1e-3);
            dict.update(&(&x / x.norm())).unwrap();
            prop_assert!(dict.max_column_norm_error() < 1e-9);
        }
    }

    #[test]
    fn iou_symmetric_and_bounded(a in bbox(), b in bbox()) {
        let (ab, ba) = (iou(&a, &b), iou(&b, &a));
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clipped_box_lies_in_frame(b in bbox(), w in 1usize..300, h in 1usize..300) {
        if let Some(c) = b.clip_to(w, h) {
            let (x0, y0, cw, ch) = c.top_left();
            prop_assert!(x0 >= -1e-9 && y0 >= -1e-9);
            prop_assert!(x0 + cw <= w as f64 + 1e-9 && y0 + ch <= h as f64 + 1e-9);
        }
    }

    #[test]
    fn hann_window_symmetric(h in 1usize..20, w in 1usize..20) {
        let win = hann_window(h, w);
        for r in 0..h {
            for c in 0..w {
                let v = win[r * w + c];
                prop_assert!((0.0..=1.0).contains(&v));
                assert_abs_diff_eq!(v, win[(h - 1 - r) * w + (w - 1 - c)], epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn candidate_grid_size(b in bbox()) {
        let set = generate_candidates(&b, &[0.95, 1.0, 1.05], &[-2.0, 0.0, 2.0]).unwrap();
        prop_assert_eq!(set.len(), 27);
        prop_assert!(set.boxes().any(|c| c == b));
    }
}
