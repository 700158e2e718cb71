use std::collections::BTreeSet;

use chemanchor::coco::normalize_box;
use chemanchor::reaction::{crop, parse_layout, reading_order, DiagramElement, Role};
use chemanchor::BBox;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn frame_box() -> impl Strategy<Value = BBox> {
    (0.0..990.0f64, 0.0..990.0f64, 1.0..400.0f64, 1.0..400.0f64)
        .prop_map(|(x, y, w, h)| BBox::new(x, y, (x + w).min(1000.0), (y + h).min(1000.0)).unwrap())
}

/// Boxes with pairwise distinct centers.
fn distinct_boxes() -> impl Strategy<Value = Vec<BBox>> {
    prop::collection::vec(frame_box(), 0..24).prop_map(|boxes| {
        let mut seen = BTreeSet::new();
        boxes
            .into_iter()
            .filter(|b| seen.insert((b.center().x.to_bits(), b.center().y.to_bits())))
            .collect()
    })
}

fn role() -> impl Strategy<Value = Role> {
    prop::sample::select(Role::ALL.to_vec())
}

fn element() -> impl Strategy<Value = DiagramElement> {
    (0u32..4, role(), frame_box()).prop_map(|(reaction_id, role, bbox)| DiagramElement { reaction_id, role, bbox })
}

proptest! {
    #[test]
    fn crop_recovers_pixel_boxes(w in 16u32..4000, h in 16u32..4000, fx in 0.0..1.0f64, fy in 0.0..1.0f64, fw in 0.0..1.0f64, fh in 0.0..1.0f64) {
        let (x1, y1) = (fx * f64::from(w - 1), fy * f64::from(h - 1));
        let x2 = x1 + 1.0 + fw * (f64::from(w) - x1 - 1.0);
        let y2 = y1 + 1.0 + fh * (f64::from(h) - y1 - 1.0);
        let px = BBox::new_unchecked(x1, y1, x2, y2);
        let r = crop(&normalize_box(px, w, h), w, h);
        prop_assert!((f64::from(r.x1) - x1).abs() <= 1.0);
        prop_assert!((f64::from(r.y1) - y1).abs() <= 1.0);
        prop_assert!((f64::from(r.x2) - x2).abs() <= 1.0);
        prop_assert!((f64::from(r.y2) - y2).abs() <= 1.0);
        prop_assert!(r.x2 <= w && r.y2 <= h && r.width() >= 1 && r.height() >= 1);
    }

    #[test]
    fn reading_order_is_a_stable_permutation(boxes in distinct_boxes(), seed in any::<u64>()) {
        let order = reading_order(&boxes);
        let mut sorted = order.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..boxes.len()).collect::<Vec<_>>());
        prop_assert_eq!(&order, &reading_order(&boxes));

        let mut perm: Vec<usize> = (0..boxes.len()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled: Vec<BBox> = perm.iter().map(|&i| boxes[i]).collect();
        let back: Vec<usize> = reading_order(&shuffled).into_iter().map(|j| perm[j]).collect();
        prop_assert_eq!(order, back);
    }

    #[test]
    fn layout_places_each_element_once(elements in prop::collection::vec(element(), 0..30)) {
        let layout = parse_layout(&elements);
        let mut count = vec![0usize; elements.len()];
        for g in &layout.reactions {
            for r in Role::ALL {
                for &i in g.role(r) {
                    count[i] += 1;
                    prop_assert_eq!(elements[i].reaction_id, g.reaction_id);
                    prop_assert_eq!(elements[i].role, r);
                }
            }
        }
        prop_assert!(count.iter().all(|&c| c == 1));
        let ids: Vec<u32> = layout.reactions.iter().map(|g| g.reaction_id).collect();
        prop_assert!(ids.windows(2).all(|w| w[0] < w[1]));
    }
}
