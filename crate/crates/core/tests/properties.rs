//! Property tests for the module invariants.

use proptest::prelude::*;

use planar_homotopy_core::dyadic::Dyadic;
use planar_homotopy_core::raster::{
    diameter_of_cells, hausdorff_distance, label_components, Adjacency, Raster,
};
use planar_homotopy_core::sequences::{
    lim_inf_lim_sup, null_sequence_verdict, SetSequence, Verdict,
};

fn raster_strategy(k: u8) -> impl Strategy<Value = Raster> {
    let side = 1u32 << k;
    let cells = (side * side) as usize;
    prop::collection::vec(prop::bool::weighted(0.35), cells).prop_map(move |bits| {
        let mut r = Raster::empty(k);
        for (i, b) in bits.iter().enumerate() {
            if *b {
                r.set(i as u32 % side, i as u32 / side, true);
            }
        }
        r
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eight_components_never_exceed_four(r in raster_strategy(4)) {
        let four = label_components(&r, Adjacency::Four).members.len();
        let eight = label_components(&r, Adjacency::Eight).members.len();
        prop_assert!(eight <= four);
    }

    #[test]
    fn raster_text_round_trips(r in raster_strategy(3)) {
        let text = r.to_text();
        let back = Raster::from_text(&text).unwrap();
        prop_assert_eq!(r, back);
    }

    #[test]
    fn hausdorff_triangle_inequality(
        a in raster_strategy(3),
        b in raster_strategy(3),
        c in raster_strategy(3),
    ) {
        prop_assume!(!a.is_empty() && !b.is_empty() && !c.is_empty());
        let ab = hausdorff_distance(&a, &b).unwrap();
        let bc = hausdorff_distance(&b, &c).unwrap();
        let ac = hausdorff_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn lim_inf_subset_of_lim_sup(
        rs in prop::collection::vec(raster_strategy(3), 2..6),
        tail in 0usize..2,
    ) {
        let seq = SetSequence::new(rs, "prop").unwrap();
        prop_assume!(tail < seq.len());
        let (inf, sup) = lim_inf_lim_sup(&seq, tail).unwrap();
        let mut probe = inf.clone();
        probe.subtract(&sup);
        prop_assert!(probe.is_empty());
    }

    #[test]
    fn merged_components_have_larger_diameter(
        r in raster_strategy(4),
    ) {
        // bridge the first two 4-components with a straight cell path and
        // verify the merged diameter dominates both originals
        let fam = label_components(&r, Adjacency::Four);
        prop_assume!(fam.members.len() >= 2);
        let a = &fam.members[0];
        let b = &fam.members[1];
        let side = fam.side;
        let (ac, ar) = (a.cells[0] % side, a.cells[0] / side);
        let (bc, br) = (b.cells[0] % side, b.cells[0] / side);
        let mut bridged = r.clone();
        let (mut c, mut row) = (ac, ar);
        while c != bc {
            c = if c < bc { c + 1 } else { c - 1 };
            bridged.set(c, row, true);
        }
        while row != br {
            row = if row < br { row + 1 } else { row - 1 };
            bridged.set(c, row, true);
        }
        let merged = label_components(&bridged, Adjacency::Four);
        let host = merged
            .members
            .iter()
            .find(|m| m.contains_cell(merged.side, ac, ar))
            .unwrap();
        prop_assert!(host.contains_cell(merged.side, bc, br));
        prop_assert!(host.diameter >= a.diameter - 1e-12);
        prop_assert!(host.diameter >= b.diameter - 1e-12);
    }
}

/// Scale-coherent member model: a member may be absent at a prefix of
/// coarse scales (structure emerging under refinement), then carries a
/// diameter that never shrinks with resolution.
#[derive(Debug, Clone)]
struct Member {
    appears_at: usize,
    diam: f64,
}

fn member_strategy(scales: usize) -> impl Strategy<Value = Member> {
    (0..scales, 0.01f64..1.0).prop_map(|(appears_at, diam)| Member { appears_at, diam })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn null_verdict_monotone_under_member_removal(
        members in prop::collection::vec(member_strategy(3), 1..24),
        removals in prop::collection::vec(any::<prop::sample::Index>(), 1..6),
    ) {
        let schedule: Vec<Dyadic> =
            vec![Dyadic::new(1, 1), Dyadic::new(1, 2), Dyadic::new(1, 3)];
        let families = |ms: &[Member]| -> Vec<Vec<f64>> {
            (0..3)
                .map(|s| {
                    ms.iter()
                        .filter(|m| m.appears_at <= s)
                        .map(|m| m.diam)
                        .collect()
                })
                .collect()
        };
        let before = null_sequence_verdict(&families(&members), &schedule).unwrap();
        let mut remaining = members.clone();
        for idx in &removals {
            if remaining.is_empty() {
                break;
            }
            remaining.remove(idx.index(remaining.len()));
        }
        prop_assume!(!remaining.is_empty());
        let after = null_sequence_verdict(&families(&remaining), &schedule).unwrap();
        if before.verdict == Verdict::NullConsistent {
            prop_assert_ne!(after.verdict, Verdict::NotNull);
        }
    }
}

#[test]
fn diameter_of_line_grows_with_length() {
    for len in 2..30u32 {
        let cells: Vec<(u32, u32)> = (0..len).map(|i| (i, 0)).collect();
        let shorter: Vec<(u32, u32)> = (0..len - 1).map(|i| (i, 0)).collect();
        let d1 = diameter_of_cells(&cells, 32).unwrap();
        let d0 = diameter_of_cells(&shorter, 32).unwrap();
        assert!(d1 > d0);
    }
}
