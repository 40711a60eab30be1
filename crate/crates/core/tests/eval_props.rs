use cslbp::detect::{nms, BBox, Detection};
use cslbp::eval::{
    fppi_curve, iou, pascal_match, perwindow_roc, read_curve_csv, score_thresholds,
    write_curve_csv, CurvePoint, ImageResult,
};
use proptest::prelude::*;

fn bbox() -> impl Strategy<Value = BBox> {
    (0.0f64..200.0, 0.0f64..200.0, 1.0f64..80.0, 1.0f64..160.0)
        .prop_map(|(x, y, w, h)| BBox::new(x, y, w, h))
}

fn detection() -> impl Strategy<Value = Detection> {
    (bbox(), -2.0f64..2.0).prop_map(|(bbox, score)| Detection {
        bbox,
        score,
        scale_index: 0,
    })
}

fn image_result() -> impl Strategy<Value = ImageResult> {
    (
        prop::collection::vec(detection(), 0..8),
        prop::collection::vec(bbox(), 0..4),
    )
        .prop_map(|(detections, ground_truth)| ImageResult {
            detections,
            ground_truth,
        })
}

proptest! {
    #[test]
    fn iou_symmetric_and_bounded(a in bbox(), b in bbox()) {
        let v = iou(&a, &b);
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert_eq!(v, iou(&b, &a));
        prop_assert!((iou(&a, &a) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pascal_counts_balance(r in image_result()) {
        let m = pascal_match(&r.detections, &r.ground_truth);
        prop_assert_eq!(m.true_positives + m.missed, r.ground_truth.len());
        prop_assert_eq!(m.true_positives + m.false_positives, r.detections.len());
    }

    #[test]
    fn fppi_curve_is_monotone(images in prop::collection::vec(image_result(), 1..5)) {
        prop_assume!(images.iter().any(|r| !r.ground_truth.is_empty()));
        let curve = fppi_curve(&images, &score_thresholds(&images)).unwrap();
        for w in curve.windows(2) {
            prop_assert!(w[0].threshold > w[1].threshold);
            prop_assert!(w[0].detection_rate <= w[1].detection_rate);
            prop_assert!(w[0].fppi <= w[1].fppi);
        }
    }

    #[test]
    fn roc_invariant_under_monotone_transform(
        pos in prop::collection::vec(-3.0f64..3.0, 1..20),
        neg in prop::collection::vec(-3.0f64..3.0, 1..20),
    ) {
        let f = |v: &Vec<f64>| v.iter().map(|s| (2.0 * s).exp() + 1.0).collect::<Vec<_>>();
        let a = perwindow_roc(&pos, &neg).unwrap();
        let b = perwindow_roc(&f(&pos), &f(&neg)).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            prop_assert_eq!(p.false_positive_rate, q.false_positive_rate);
            prop_assert_eq!(p.classification_rate, q.classification_rate);
        }
    }

    #[test]
    fn curve_csv_round_trips(raw in prop::collection::vec((-1e3f64..1e3, 0.0f64..1.0, 0.0f64..50.0), 1..10)) {
        let points: Vec<CurvePoint> = raw
            .into_iter()
            .map(|(threshold, detection_rate, fppi)| CurvePoint { threshold, detection_rate, fppi })
            .collect();
        let mut buf = Vec::new();
        write_curve_csv(&mut buf, &points).unwrap();
        let back = read_curve_csv(&buf[..], std::path::Path::new("mem.csv")).unwrap();
        prop_assert_eq!(back.len(), points.len());
        for (p, q) in points.iter().zip(&back) {
            for (a, b) in [(p.threshold, q.threshold), (p.detection_rate, q.detection_rate), (p.fppi, q.fppi)] {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
            }
        }
    }

    #[test]
    fn nms_properties(dets in prop::collection::vec(detection(), 0..25), overlap in 0.05f64..0.95) {
        let kept = nms(&dets, overlap);
        prop_assert_eq!(nms(&kept, overlap), kept.clone());
        for k in &kept {
            prop_assert!(dets.contains(k));
        }
        for (i, a) in kept.iter().enumerate() {
            for b in &kept[i + 1..] {
                prop_assert!(a.bbox.iou(&b.bbox) <= overlap);
            }
        }
    }
}
