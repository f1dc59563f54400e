mod common;

use common::{center_in_square, dims, random_map, random_point, rng};
use proptest::prelude::*;
use rand::Rng;
use vsearch_core::world::{deplete, detects, sample_segment, scenario_from_elevation, sensed_cells, update_found};
use vsearch_core::{generate_scenario, ProbabilityMap, SensorModel, TargetSet, Vec2};

/// Cells depleted by a set of sweep positions, by scanning every cell.
fn brute_swept(d: &vsearch_core::GridDims, swept: &[Vec2], half: f64) -> Vec<usize> {
    (0..d.len())
        .filter(|&i| swept.iter().any(|&p| center_in_square(d, i, p, half)))
        .collect()
}

#[test]
fn sensed_cells_for_off_centre_position() {
    let d = dims(20, 20);
    let map = ProbabilityMap::uniform(d, 1.0).unwrap();
    let sensor = SensorModel::default();
    let p = Vec2::new(7.3, 11.8);
    let mut got = sensed_cells(p, &sensor, &map);
    got.sort_unstable();
    let want: Vec<usize> = (0..d.len()).filter(|&i| center_in_square(&d, i, p, 2.5)).collect();
    assert_eq!(got, want);
    // columns 5..=9 (centers 5.5..9.5), rows 9..=13 (centers 9.5..13.5)
    assert_eq!(got.len(), 25);
}

#[test]
fn diagonal_sweep_finds_exactly_the_brute_force_targets() {
    let d = dims(40, 40);
    let sensor = SensorModel::default();
    let mut r = rng(10);
    let positions: Vec<Vec2> = (0..10)
        .map(|i| {
            // half near the diagonal, half anywhere
            if i % 2 == 0 {
                let s = r.gen_range(2.0..38.0);
                Vec2::new(s + r.gen_range(-4.0..4.0), s)
            } else {
                random_point(&mut r, &d)
            }
        })
        .collect();
    let swept = sample_segment(Vec2::new(1.0, 1.0), Vec2::new(39.0, 39.0), sensor.sweep_interval(1.0));
    let mut targets = TargetSet::new(positions.clone());
    let mut newly = update_found(&mut targets, &swept, &sensor, &d);
    newly.sort_unstable();
    let want: Vec<usize> = (0..positions.len())
        .filter(|&t| {
            let cell = d.cell_of(positions[t]);
            swept.iter().any(|&p| center_in_square(&d, cell, p, 2.5))
        })
        .collect();
    assert_eq!(newly, want);
    assert!(!want.is_empty() && want.len() < positions.len());
}

#[test]
fn segment_depletion_matches_brute_union() {
    let d = dims(30, 30);
    let sensor = SensorModel::default();
    let mut map = random_map(d, 3);
    let before = map.clone();
    let swept = sample_segment(Vec2::new(4.2, 5.1), Vec2::new(20.2, 17.1), sensor.sweep_interval(1.0));
    assert!((swept[0].distance(swept[swept.len() - 1]) - 20.0).abs() < 1e-9);
    deplete(&mut map, &swept, &sensor);
    let zeroed = brute_swept(&d, &swept, 2.5);
    for i in 0..d.len() {
        if zeroed.contains(&i) {
            assert_eq!(map.value(i), 0.0, "cell {i}");
        } else {
            assert_eq!(map.value(i), before.value(i), "cell {i}");
        }
    }
}

#[test]
fn sweep_interval_misses_only_boundary_slivers() {
    // A cell grazed by the continuous footprint between two samples can be
    // missed, but only when its center sits within interval/2 of the edge.
    let d = dims(30, 30);
    let sensor = SensorModel::default();
    let mut r = rng(4);
    for _ in 0..50 {
        let a = random_point(&mut r, &d);
        let b = random_point(&mut r, &d);
        let h = sensor.sweep_interval(1.0);
        let swept = sample_segment(a, b, h);
        let dense = sample_segment(a, b, 1e-3);
        let coarse = brute_swept(&d, &swept, 2.5);
        let fine = brute_swept(&d, &dense, 2.5);
        assert!(coarse.iter().all(|c| fine.contains(c)));
        for &c in fine.iter().filter(|c| !coarse.contains(c)) {
            let near = swept.iter().any(|&p| center_in_square(&d, c, p, 2.5 + h / 2.0));
            assert!(near, "{a:?} -> {b:?}: cell {c}");
            assert!(!swept.iter().any(|&p| center_in_square(&d, c, p, 2.5)));
        }
    }
}

#[test]
fn single_target_draws_follow_the_rate_field() {
    // one target per draw is an exact λ-weighted categorical draw; group the
    // cells into ten bins of equal rate mass and run a chi-square test
    let base = generate_scenario(7, 100, 100, 1.0, 20).unwrap();
    let rates = base.elevation.rate_field();
    let total: f64 = rates.iter().sum();
    let mut order: Vec<usize> = (0..rates.len()).collect();
    order.sort_by(|&a, &b| rates[a].total_cmp(&rates[b]));
    let mut bin = vec![0usize; rates.len()];
    let mut bin_mass = [0.0f64; 10];
    let mut acc = 0.0;
    for &i in &order {
        let k = ((acc / total * 10.0) as usize).min(9);
        bin[i] = k;
        bin_mass[k] += rates[i] / total;
        acc += rates[i];
    }
    let draws = 20_000;
    let mut counts = [0usize; 10];
    for s in 0..draws {
        let sc = scenario_from_elevation(
            base.elevation.dims,
            base.elevation.elevation.clone(),
            base.elevation.rate_params,
            1_000 + s,
            1,
        )
        .unwrap();
        counts[bin[base.map.dims().cell_of(sc.targets.positions()[0])]] += 1;
    }
    let chi2: f64 = (0..10)
        .map(|k| {
            let e = bin_mass[k] * draws as f64;
            (counts[k] as f64 - e).powi(2) / e
        })
        .sum();
    // 0.1% critical value with 9 degrees of freedom
    assert!(chi2 < 27.88, "chi2 {chi2}, counts {counts:?}, mass {bin_mass:?}");
}

#[test]
fn redrawn_targets_track_the_rate_field() {
    let base = generate_scenario(7, 100, 100, 1.0, 20).unwrap();
    let d = *base.map.dims();
    let mut hits = vec![0.0f64; d.len()];
    for s in 0..1000 {
        let sc =
            scenario_from_elevation(d, base.elevation.elevation.clone(), base.elevation.rate_params, s, 20).unwrap();
        let cells: Vec<usize> = sc.targets.positions().iter().map(|&p| d.cell_of(p)).collect();
        let mut dedup = cells.clone();
        dedup.sort_unstable();
        dedup.dedup();
        assert_eq!(dedup.len(), 20, "targets occupy distinct cells");
        for c in cells {
            hits[c] += 1.0;
        }
    }
    let lam = base.map.values();
    let n = d.len() as f64;
    let (mh, ml) = (hits.iter().sum::<f64>() / n, lam.iter().sum::<f64>() / n);
    let cov: f64 = hits.iter().zip(lam).map(|(h, l)| (h - mh) * (l - ml)).sum();
    let sh = hits.iter().map(|h| (h - mh).powi(2)).sum::<f64>().sqrt();
    let sl = lam.iter().map(|l| (l - ml).powi(2)).sum::<f64>().sqrt();
    let corr = cov / (sh * sl);
    assert!(corr > 0.9, "correlation {corr}");
}

#[test]
fn scenario_prior_is_normalized_and_seeded() {
    let a = generate_scenario(3, 60, 40, 2.0, 15).unwrap();
    let b = generate_scenario(3, 60, 40, 2.0, 15).unwrap();
    assert_eq!(a, b);
    assert!((a.map.total_mass() - 1.0).abs() <= 1e-12);
    let e = a.map.dims().extent();
    assert!(a
        .targets
        .positions()
        .iter()
        .all(|p| p.x >= 0.0 && p.x < e.x && p.y >= 0.0 && p.y < e.y));
    assert_ne!(a.targets, generate_scenario(4, 60, 40, 2.0, 15).unwrap().targets);
}

#[test]
fn detection_is_cell_based() {
    let d = dims(10, 10);
    let sensor = SensorModel::default();
    // target in cell (7, 5), whose center is 2.5 away in x from 5.0
    assert!(detects(Vec2::new(5.0, 5.5), Vec2::new(7.9, 5.2), &sensor, &d));
    assert!(!detects(Vec2::new(4.9, 5.5), Vec2::new(7.1, 5.2), &sensor, &d));
}

proptest! {
    #[test]
    fn depletion_never_adds_mass_and_is_idempotent(seed in 0u64..10_000, n in 1usize..6) {
        let d = dims(25, 25);
        let sensor = SensorModel::new(1.5).unwrap();
        let mut map = random_map(d, seed);
        let mut r = rng(seed);
        let swept: Vec<Vec2> = (0..n).map(|_| random_point(&mut r, &d)).collect();
        let before = map.clone();
        deplete(&mut map, &swept, &sensor);
        prop_assert!(map.values().iter().zip(before.values()).all(|(a, b)| a <= b));
        prop_assert!(map.total_mass() <= before.total_mass());
        let once = map.clone();
        deplete(&mut map, &swept, &sensor);
        prop_assert_eq!(map, once);
    }

    #[test]
    fn found_targets_sit_in_depleted_cells(seed in 0u64..10_000) {
        let d = dims(25, 25);
        let sensor = SensorModel::default();
        let mut r = rng(seed);
        let positions: Vec<Vec2> = (0..8).map(|_| random_point(&mut r, &d)).collect();
        let swept = sample_segment(random_point(&mut r, &d), random_point(&mut r, &d), sensor.sweep_interval(1.0));
        let mut targets = TargetSet::new(positions.clone());
        let newly = update_found(&mut targets, &swept, &sensor, &d);
        let mut map = ProbabilityMap::uniform(d, 1.0).unwrap();
        deplete(&mut map, &swept, &sensor);
        for i in newly {
            prop_assert_eq!(map.value(d.cell_of(positions[i])), 0.0);
        }
    }

    #[test]
    fn update_found_does_not_touch_its_inputs_beyond_flags(seed in 0u64..10_000) {
        let d = dims(20, 20);
        let sensor = SensorModel::default();
        let mut r = rng(seed);
        let positions: Vec<Vec2> = (0..5).map(|_| random_point(&mut r, &d)).collect();
        let swept = vec![random_point(&mut r, &d)];
        let mut a = TargetSet::new(positions.clone());
        let first = update_found(&mut a, &swept, &sensor, &d);
        let again = update_found(&mut a, &swept, &sensor, &d);
        prop_assert!(again.is_empty());
        prop_assert_eq!(a.positions(), positions.as_slice());
        prop_assert_eq!(a.found_count(), first.len());
    }
}
