use mealsynth::asset::NutritionFacts;
use mealsynth::nutrition::{aggregate_items, class_stats_by_ids, CatalogEntry};
use mealsynth::rng::{seeded, SeededRng};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeMap;

const REL: f64 = 1e-9;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn close_facts(a: &NutritionFacts, b: &NutritionFacts) -> bool {
    a.to_array().iter().zip(b.to_array()).all(|(x, y)| close(*x, y))
}

/// Field-wise sum in f64, smallest magnitudes first.
fn reference_sum(ids: &[String], catalog: &BTreeMap<String, CatalogEntry>) -> NutritionFacts {
    let mut out = [0.0; 5];
    for (k, slot) in out.iter_mut().enumerate() {
        let mut vals: Vec<f64> = ids.iter().map(|id| catalog[id].nutrition.to_array()[k]).collect();
        vals.sort_by(f64::total_cmp);
        *slot = vals.iter().sum();
    }
    NutritionFacts::from_array(out)
}

/// Runs randomized additivity, permutation and conservation cases; returns a description of
/// each failing case.
pub fn nutrition_property_cases(cases: usize, seed: u64) -> Vec<String> {
    let mut rng = seeded(seed);
    let mut failures = Vec::new();
    for case in 0..cases {
        let n_assets = rng.gen_range(1..12);
        let catalog: BTreeMap<String, CatalogEntry> = (0..n_assets)
            .map(|i| {
                let scale = 10f64.powi(rng.gen_range(-2..4));
                let facts = NutritionFacts::from_array(std::array::from_fn(|_| rng.gen_range(0.0..1.0) * scale));
                (format!("a{i}"), CatalogEntry { semantic_class: format!("c{}", i % 4), nutrition: facts })
            })
            .collect();
        let ids: Vec<String> = catalog.keys().cloned().collect();
        let draw = |rng: &mut SeededRng| -> Vec<String> {
            (0..rng.gen_range(0..10)).map(|_| ids[rng.gen_range(0..ids.len())].clone()).collect()
        };
        let a = draw(&mut rng);
        let b = draw(&mut rng);
        let ab: Vec<String> = a.iter().chain(&b).cloned().collect();
        let mut shuffled = ab.clone();
        shuffled.shuffle(&mut rng);

        let agg = |v: &[String]| aggregate_items(v.iter().map(String::as_str), &catalog).unwrap();
        let (na, nb, nab, nsh) = (agg(&a), agg(&b), agg(&ab), agg(&shuffled));
        if !close_facts(&nab.totals, &(na.totals + nb.totals)) {
            failures.push(format!("case {case}: additivity {:?} vs {:?} + {:?}", nab.totals, na.totals, nb.totals));
        }
        if !close_facts(&nab.totals, &reference_sum(&ab, &catalog)) {
            failures.push(format!("case {case}: totals differ from reference sum"));
        }
        if !close_facts(&nab.totals, &nsh.totals) || nab.ingredient_count != nsh.ingredient_count {
            failures.push(format!("case {case}: permutation changed totals"));
        }
        let stats = class_stats_by_ids([&a, &b].map(|s| s.iter().map(String::as_str)), &catalog).unwrap();
        if stats.total_instances() != ab.len() || stats.total_scenes != 2 {
            failures.push(format!("case {case}: class stats count {} of {}", stats.total_instances(), ab.len()));
        }
    }
    failures
}
