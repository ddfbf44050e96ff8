use num_bigint::BigUint;
use num_rational::BigRational;
use proptest::prelude::*;
use tpz_core::rotation::{self, geometry};
use tpz_core::separator::{SeparatorParams, SeparatorSequence};
use tpz_core::{Materialized, Psi, RotationVector, Symbol, SymbolicSequence};

fn word() -> impl Strategy<Value = Vec<Symbol>> {
    prop::collection::vec(0u8..3, 1..400).prop_map(|v| v.into_iter().map(|i| Symbol::from_index(i).unwrap()).collect())
}

fn separator() -> &'static SeparatorSequence {
    static SEQ: std::sync::OnceLock<SeparatorSequence> = std::sync::OnceLock::new();
    SEQ.get_or_init(|| SeparatorSequence::new(SeparatorParams::with_pow2(17, 64, 5, 6, false).unwrap()).unwrap())
}

proptest! {
    #[test]
    fn sliding_windows_match_scratch(w in word(), n in 1u64..50, stride in 1u64..20) {
        let seq = Materialized::new(None, w.clone());
        let len = w.len() as u64;
        let cloud = rotation::window_cloud(&seq, n, 1, len, stride, u64::MAX).unwrap();
        let expected = if n > len { 0 } else { (len - n) / stride + 1 };
        prop_assert_eq!(cloud.points.len() as u64, expected);
        for (i, r) in &cloud.points {
            let scratch = tpz_core::symbol::psi(&w[(*i - 1) as usize..(*i - 1 + n) as usize]);
            prop_assert_eq!(r.psi, scratch);
            prop_assert!(r.in_simplex());
        }
    }

    #[test]
    fn filtered_band_membership_is_exact(len in 1u64..1_000_000, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let x = (a * len as f64) as u64;
        let y = ((b * (len - x) as f64) as u64).min(len - x);
        let r = RotationVector::new(Psi::new(x, y), len).unwrap();
        prop_assert_eq!(geometry::in_s_rho(&r), geometry::in_s(&geometry::point(&r)));
    }

    #[test]
    fn hull_area_is_bounded_by_the_simplex(pts in prop::collection::vec((0u64..=64, 0u64..=64), 1..60)) {
        let cloud: Vec<RotationVector> = pts
            .iter()
            .map(|&(x, y)| RotationVector::new(Psi::new(x.min(64), y.min(64 - x.min(64))), 64).unwrap())
            .collect();
        let area = geometry::cloud_area(&cloud);
        let exact: Vec<geometry::Point> = cloud.iter().map(geometry::point).collect();
        prop_assert_eq!(&area, &geometry::area(&geometry::hull(&exact)));
        prop_assert!(area <= BigRational::new(1.into(), 2.into()));
    }

    #[test]
    fn separator_prefix_counts_match_symbols(j in 1u64..u64::MAX) {
        let seq = separator();
        let j = BigUint::from(j);
        let (x1, y1) = seq.psi_prefix(&j).unwrap();
        let (x0, y0) = seq.psi_prefix(&(&j - 1u32)).unwrap();
        let d = seq.evaluate(&j).unwrap().displacement();
        prop_assert_eq!((x1 - x0, y1 - y0), (BigUint::from(d.0 as u64), BigUint::from(d.1 as u64)));
    }

    #[test]
    fn separator_repeats_with_its_fill_period(j in 1u128..(1u128 << 100)) {
        let seq = separator();
        let sched = seq.params().schedule();
        let j = BigUint::from(j);
        if let Some(m) = sched.fill_level(&j) {
            let p = sched.period(m);
            prop_assert_eq!(seq.evaluate(&j).unwrap(), seq.evaluate(&(&j + p)).unwrap());
            if &j > p {
                prop_assert_eq!(seq.evaluate(&j).unwrap(), seq.evaluate(&(&j - p)).unwrap());
            }
        }
    }
}

#[test]
fn separator_symbols_agree_with_u64_access() {
    let seq = separator();
    for j in [1u64, 3332, 3333, 213_248, 999_999, 710_545_668] {
        assert_eq!(seq.symbol(j).unwrap(), seq.evaluate(&BigUint::from(j)).unwrap());
    }
}
