//! Property tests for the parsing, scoring and counting invariants.

use chrono::TimeZone;
use proptest::prelude::*;

use notimind_core::enrich::{count_emojis, EmojiTable};
use notimind_core::ingest::{
    event_to_json_line, parse_event_line, parse_event_log, EventState, NotificationEvent,
    RingerMode,
};
use notimind_core::learn::stratified_kfold;
use notimind_core::panas::{entropy, AffectClass, DiscretizationModel};
use notimind_core::segment::{feature_vector, RawCounts, SegmentConfig};
use notimind_core::stats::{paired_t_test, pearson};

fn arb_state() -> impl Strategy<Value = EventState> {
    prop::sample::select(EventState::ALL.to_vec())
}

fn arb_volume() -> impl Strategy<Value = RingerMode> {
    prop::sample::select(RingerMode::ALL.to_vec())
}

prop_compose! {
    fn arb_event()(
        secs in 0i64..4_000_000_000,
        millis in 0u32..1000,
        user in "[a-z][a-z0-9]{0,8}",
        name in "[ -~]{0,40}",
        msg in ".{0,40}",
        state in arb_state(),
        volume in arb_volume(),
    ) -> NotificationEvent {
        NotificationEvent {
            timestamp: chrono::Utc.timestamp_opt(secs, millis * 1_000_000).unwrap(),
            user_id: user,
            event_name: name,
            state,
            message: msg,
            volume,
        }
    }
}

proptest! {
    #[test]
    fn event_json_round_trip(event in arb_event()) {
        let line = event_to_json_line(&event);
        let reparsed = parse_event_line(&line).expect("serialized event parses");
        prop_assert_eq!(event, reparsed);
    }

    #[test]
    fn event_log_is_a_function_of_the_line_multiset(
        events in prop::collection::vec(arb_event(), 1..20),
        seed in 0u64..1000,
    ) {
        use rand::seq::SliceRandom;
        let mut lines: Vec<String> = events.iter().map(event_to_json_line).collect();
        let baseline = {
            let text = lines.join("\n");
            parse_event_log(text.as_bytes()).unwrap().0
        };
        let mut rng = notimind_core::seeding::rng(seed, &[1]);
        lines.shuffle(&mut rng);
        let shuffled = {
            let text = lines.join("\n");
            parse_event_log(text.as_bytes()).unwrap().0
        };
        prop_assert_eq!(baseline, shuffled);
    }

    #[test]
    fn emoji_counting_is_additive_over_concatenation(a in ".{0,30}", b in ".{0,30}") {
        let table = EmojiTable::bundled();
        let combined = format!("{a}{b}");
        let (ca, _) = count_emojis(&a, table);
        let (cb, _) = count_emojis(&b, table);
        let (cc, descriptions) = count_emojis(&combined, table);
        prop_assert_eq!(cc, ca + cb);
        prop_assert_eq!(descriptions.len() as u32, cc);
    }

    #[test]
    fn entropy_stays_in_bounds_and_ignores_order(
        mut counts in prop::collection::vec(0u64..200, 1..12),
    ) {
        prop_assume!(counts.iter().any(|&c| c > 0));
        let h = entropy(&counts).unwrap();
        let k = counts.iter().filter(|&&c| c > 0).count() as f64;
        prop_assert!(h >= -1e-12);
        prop_assert!(h <= k.log2() + 1e-12);
        counts.reverse();
        let reversed = entropy(&counts).unwrap();
        prop_assert!((h - reversed).abs() < 1e-12);
        let scaled: Vec<u64> = counts.iter().map(|&c| c * 3).collect();
        prop_assert!((entropy(&scaled).unwrap() - h).abs() < 1e-12);
    }

    #[test]
    fn classification_is_total_and_monotone(c1 in -19.0f64..18.0, width in 0.5f64..10.0) {
        let model = DiscretizationModel::new(c1, c1 + width).unwrap();
        let mut last = model.classify(-25);
        for s in -25..=25 {
            let class = model.classify(s);
            prop_assert!(class >= last);
            last = class;
        }
    }

    #[test]
    fn state_shares_always_sum_to_100(
        p in 0u32..500, r in 0u32..500, o in 0u32..500,
        f in 0u32..500, u in 0u32..500, k in 0u32..500,
    ) {
        prop_assume!(p + r + o + f + u + k > 0);
        let counts = RawCounts { p, r, o, f, u, k, n: p + r + o + f + u + k, ..RawCounts::default() };
        let t0 = chrono::Utc.with_ymd_and_hms(2016, 4, 12, 9, 0, 0).unwrap();
        let fv = feature_vector(&counts, t0, &[], &SegmentConfig::default());
        let sum = fv.p_a + fv.r_a + fv.o_a + fv.f_a + fv.u_a + fv.k_a;
        prop_assert!((sum - 100.0).abs() < 1e-9);
    }

    #[test]
    fn subrates_stay_in_percentage_bounds(
        p in 1u32..300, m_frac in 0.0f64..1.0, g_frac in 0.0f64..1.0,
        w_frac in 0.0f64..1.0, s_frac in 0.0f64..1.0, e in 0u32..900,
    ) {
        let m = (p as f64 * m_frac) as u32;
        let g = (p as f64 * g_frac) as u32;
        let s = (p as f64 * s_frac) as u32;
        let w = (p as f64 * w_frac) as u32;
        let counts = RawCounts { p, m, g, w, s, e, n: p, ..RawCounts::default() };
        let t0 = chrono::Utc.with_ymd_and_hms(2016, 4, 12, 9, 0, 0).unwrap();
        let fv = feature_vector(&counts, t0, &[], &SegmentConfig::default());
        prop_assert!((0.0..=100.0).contains(&fv.s_a));
        prop_assert!((0.0..=100.0).contains(&fv.m_a));
        prop_assert!((0.0..=100.0).contains(&fv.g_a));
        prop_assert!((0.0..=100.0).contains(&fv.w_a));
        prop_assert!((0.0..=500.0).contains(&fv.e_a));
    }

    #[test]
    fn pearson_of_affine_image_is_the_slope_sign(
        xs in prop::collection::vec(-100.0f64..100.0, 3..30),
        a in prop::sample::select(vec![-3.0f64, -0.5, 0.7, 2.0]),
        b in -10.0f64..10.0,
    ) {
        let distinct = xs.iter().any(|&v| (v - xs[0]).abs() > 1e-9);
        prop_assume!(distinct);
        let ys: Vec<f64> = xs.iter().map(|&x| a * x + b).collect();
        let r = pearson(&xs, &ys).unwrap();
        prop_assert!((r - a.signum()).abs() < 1e-9);
        let symmetric = pearson(&ys, &xs).unwrap();
        prop_assert!((r - symmetric).abs() < 1e-12);
    }

    #[test]
    fn paired_t_test_is_two_sided_symmetric(
        pairs in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3..20),
    ) {
        let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let ab = paired_t_test(&a, &b).unwrap();
        let ba = paired_t_test(&b, &a).unwrap();
        prop_assert!((ab.p - ba.p).abs() < 1e-12);
        prop_assert!((ab.t + ba.t).abs() < 1e-9);
    }

    #[test]
    fn stratified_folds_satisfy_partition_laws(
        labels in prop::collection::vec(0usize..3, 6..60),
        k in 2usize..6,
        seed in 0u64..500,
    ) {
        prop_assume!(labels.len() >= k);
        let classes: Vec<AffectClass> =
            labels.iter().map(|&i| AffectClass::from_index(i).unwrap()).collect();
        let assignment = stratified_kfold(&classes, k, seed).unwrap();
        let mut seen = vec![0usize; classes.len()];
        for fold in 0..k {
            for i in assignment.test_indices(fold) {
                seen[i] += 1;
            }
        }
        prop_assert!(seen.iter().all(|&s| s == 1));
        for class in AffectClass::ALL {
            let total = classes.iter().filter(|&&c| c == class).count() as f64;
            for fold in 0..k {
                let in_fold = assignment
                    .test_indices(fold)
                    .iter()
                    .filter(|&&i| classes[i] == class)
                    .count() as f64;
                prop_assert!((in_fold - total / k as f64).abs() <= 1.0 + 1e-9);
            }
        }
    }
}
