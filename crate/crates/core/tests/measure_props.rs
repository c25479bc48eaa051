use proptest::prelude::*;

use lpsens::exact::{self, ratio, Decimal};
use lpsens::measure::{Bound, BorelMeasure, Interval, IntervalUnion};
use lpsens::parser::parse_measure;

const MEASURES: [&str; 5] = [
    "uniform(0,1)",
    "normal(0,1)",
    "mix(0.5*atom(0), 0.5*uniform(0,1))",
    "mix(0.2*atom(0.5), 0.3*exponential(2), 0.5*normal(-1,0.5))",
    "mix(1.5*uniform(-1,1), 0.5*atom(-0.25)); mass=2",
];

fn measure(text: &str) -> BorelMeasure {
    BorelMeasure::from_spec(&parse_measure(text).unwrap()).unwrap()
}

fn bound(k: i64) -> Bound {
    match k {
        i64::MIN => Bound::NegInf,
        i64::MAX => Bound::PosInf,
        k => Bound::Finite(ratio(k, 16)),
    }
}

/// Intervals on the 1/16 grid in [-4, 4], sometimes unbounded.
fn interval() -> impl Strategy<Value = Interval> {
    (-64i64..64, 0i64..48, any::<bool>(), any::<bool>(), 0u8..10).prop_map(|(a, len, lc, hc, tail)| {
        let (lo, hi) = match tail {
            0 => (i64::MIN, a),
            1 => (a, i64::MAX),
            _ => (a, a + len),
        };
        if lo == hi {
            return Interval::point(ratio(lo, 16));
        }
        let lc = lc && lo != i64::MIN;
        let hc = hc && hi != i64::MAX;
        Interval::new(bound(lo), lc, bound(hi), hc).unwrap()
    })
}

fn union() -> impl Strategy<Value = IntervalUnion> {
    prop::collection::vec(interval(), 0..5).prop_map(IntervalUnion::from_intervals)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn additivity_on_disjoint_unions(mi in 0usize..MEASURES.len(), s1 in union(), t in union()) {
        let mu = measure(MEASURES[mi]);
        let s2 = t.difference(&s1);
        prop_assert!(s1.intersection(&s2).is_empty());
        let whole = mu.measure_of(&s1.union(&s2));
        let parts = mu.measure_of(&s1) + mu.measure_of(&s2);
        prop_assert!((whole - parts).abs() <= 1e-12, "{} vs {}", whole, parts);
    }

    #[test]
    fn complement_fills_the_total(mi in 0usize..MEASURES.len(), s in union()) {
        let mu = measure(MEASURES[mi]);
        let sum = mu.measure_of(&s) + mu.measure_of(&s.complement());
        prop_assert!((sum - mu.total_mass_f64()).abs() <= 1e-12);
        prop_assert_eq!(mu.measure_of(&IntervalUnion::empty()), 0.0);
        prop_assert!((mu.measure_of(&IntervalUnion::single(Interval::real_line())) - mu.total_mass_f64()).abs() <= 1e-12);
    }

    #[test]
    fn normal_form_is_sorted_and_disjoint(s in union()) {
        let ivs = s.intervals();
        for w in ivs.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let gap_ok = match (&a.hi, &b.lo) {
                (Bound::Finite(x), Bound::Finite(y)) => x < y || (x == y && !a.hi_closed && !b.lo_closed),
                _ => false,
            };
            prop_assert!(gap_ok, "{:?} then {:?}", a, b);
        }
    }

    #[test]
    fn cdf_is_monotone_with_atom_jumps(mi in 0usize..MEASURES.len(), xs in prop::collection::vec(-5.0f64..5.0, 2..40)) {
        let mu = measure(MEASURES[mi]);
        let mut xs = xs;
        xs.sort_by(f64::total_cmp);
        for w in xs.windows(2) {
            prop_assert!(mu.cdf(w[0]) <= mu.cdf(w[1]));
        }
        for a in mu.atoms() {
            let x = a.location_f64();
            prop_assert!((mu.cdf(x) - mu.cdf_left(x) - a.mass_f64()).abs() <= 1e-12);
        }
    }

    #[test]
    fn total_mass_is_exact_sum(w in prop::collection::vec(1i64..1000, 1..4)) {
        let kinds = ["atom(0.5)", "uniform(0,2)", "normal(1,3)"];
        let parts: Vec<String> = w
            .iter()
            .zip(kinds)
            .map(|(k, kind)| format!("{}*{kind}", Decimal(&ratio(*k, 100))))
            .collect();
        let total = ratio(w.iter().sum::<i64>(), 100);
        let text = format!("mix({}); mass={}", parts.join(", "), Decimal(&total));
        let mu = measure(&text);
        prop_assert_eq!(mu.total_mass(), &total);
        prop_assert!((mu.total_mass_f64() - exact::to_f64(&total)).abs() <= 1e-12 * mu.total_mass_f64());
    }
}

/// Largest gap between the empirical and true CDF over the sample points,
/// taking left limits into account for atoms.
fn ks_distance(mu: &BorelMeasure, mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < xs.len() {
        let mut j = i;
        while j < xs.len() && xs[j] == xs[i] {
            j += 1;
        }
        let below = i as f64 / n;
        let upto = j as f64 / n;
        worst = worst.max((upto - mu.cdf(xs[i])).abs());
        worst = worst.max((below - mu.cdf_left(xs[i])).abs());
        i = j;
    }
    worst
}

#[test]
fn samples_lie_in_the_dkw_band() {
    let n = 1_000_000;
    let alpha: f64 = 1e-3;
    let band = ((2.0 / alpha).ln() / (2.0 * n as f64)).sqrt();
    for (i, text) in MEASURES[..4].iter().enumerate() {
        let mu = measure(text);
        let d = ks_distance(&mu, mu.sample(n, 11 + i as u64).unwrap());
        assert!(d < band, "{text}: {d} >= {band}");
    }
}
