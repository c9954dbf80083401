//! EDA routines against brute-force reimplementations.

use std::collections::BTreeMap;

use darkwatch_core::dataset::{parse_threat_csv, ThreatRecord, ThreatTable};
use darkwatch_core::eda::{self, box_stats_by_threat, correlation, impact_histogram, sector_shares, summarize_by_threat};
use darkwatch_core::synth::{SECTORS, THREAT_TYPES};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

const NINE_ROWS: &str = "\
Type of Threat,Targeted Sector,Number of Attempts,Impact Level,Target
Malware,Data Breach,85,26,0
Data Breach,Data Breach,86,32,0
Ransomware,Ransomware,99,55,0
Data Breach,Ransomware,9,78,0
Social Engineering,Phishing,21,92,0
Social Engineering,Social Engineering,71,47,0
Phishing,Ransomware,35,74,0
Malware,Malware,53,92,1
Ransomware,Ransomware,95,91,0
";

fn random_table(rng: &mut ChaCha8Rng) -> ThreatTable {
    let rows = rng.gen_range(2..=64);
    // a narrow pool of types makes repeated groups likely
    let types = rng.gen_range(1..=THREAT_TYPES.len());
    let records = (0..rows)
        .map(|_| {
            ThreatRecord::new(
                THREAT_TYPES[rng.gen_range(0..types)],
                SECTORS[rng.gen_range(0..SECTORS.len())],
                rng.gen_range(0..=200),
                rng.gen_range(0..=100),
                rng.gen_range(0..=1),
            )
        })
        .collect();
    ThreatTable::new("random", records)
}

fn by_type(table: &ThreatTable) -> BTreeMap<String, Vec<&ThreatRecord>> {
    let mut groups: BTreeMap<String, Vec<&ThreatRecord>> = BTreeMap::new();
    for r in &table.records {
        groups.entry(r.threat_type.clone()).or_default().push(r);
    }
    groups
}

/// Quantile by the textbook formula on a freshly sorted copy.
fn oracle_quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (v.len() - 1) as f64 * q;
    let i = h as usize;
    if i + 1 >= v.len() {
        return v[i];
    }
    v[i] + (h - i as f64) * (v[i + 1] - v[i])
}

/// Σ(x−x̄)(y−ȳ) / √(Σ(x−x̄)² Σ(y−ȳ)²) via the raw-moment form.
fn oracle_pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let vx = n * sxx - sx * sx;
    let vy = n * syy - sy * sy;
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some((n * sxy - sx * sy) / (vx * vy).sqrt())
}

#[test]
fn thousand_random_tables_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for case in 0..1000 {
        let table = random_table(&mut rng);
        let groups = by_type(&table);

        let summaries = summarize_by_threat(&table).unwrap();
        assert_eq!(summaries.len(), groups.len(), "case {case}");
        for (s, (key, members)) in summaries.iter().zip(&groups) {
            assert_eq!(&s.group_key, key);
            assert_eq!(s.count, members.len());
            let total: u64 = members.iter().map(|r| r.num_attempts).sum();
            assert_eq!(s.attempt_total, total);
            assert!((s.attempt_mean - total as f64 / members.len() as f64).abs() < TOL);
            let impact: f64 = members.iter().map(|r| r.impact_level as f64).sum::<f64>() / members.len() as f64;
            assert!((s.impact_mean - impact).abs() < TOL);
        }

        let bins = rng.gen_range(1..=20);
        let hist = impact_histogram(&table, bins).unwrap();
        for b in 0..bins {
            let lo = 100.0 * b as f64 / bins as f64;
            let hi = 100.0 * (b + 1) as f64 / bins as f64;
            let expected = table
                .records
                .iter()
                .filter(|r| {
                    let v = r.impact_level as f64;
                    v >= lo && (v < hi || (b == bins - 1 && v <= hi))
                })
                .count();
            assert_eq!(hist.counts[b], expected, "case {case}, bin {b} of {bins}");
        }

        let boxes = box_stats_by_threat(&table).unwrap();
        for (b, (key, members)) in boxes.iter().zip(&groups) {
            assert_eq!(&b.group_key, key);
            let values: Vec<f64> = members.iter().map(|r| r.num_attempts as f64).collect();
            for (got, q) in [(b.min, 0.0), (b.q1, 0.25), (b.median, 0.5), (b.q3, 0.75), (b.max, 1.0)] {
                assert!((got - oracle_quantile(&values, q)).abs() < TOL, "case {case}, q {q}");
            }
            assert!((b.iqr - (b.q3 - b.q1)).abs() < TOL);
        }

        let corr = correlation(&table).unwrap();
        let cols: [Vec<f64>; 3] = [
            table.records.iter().map(|r| r.num_attempts as f64).collect(),
            table.records.iter().map(|r| r.impact_level as f64).collect(),
            table.records.iter().map(|r| r.target as f64).collect(),
        ];
        for i in 0..3 {
            assert_eq!(corr.cells[i][i], 1.0);
            for j in 0..3 {
                assert_eq!(corr.cells[i][j], corr.cells[j][i]);
                if i == j {
                    continue;
                }
                match oracle_pearson(&cols[i], &cols[j]) {
                    Some(r) => assert!((corr.cells[i][j] - r).abs() < TOL, "case {case} ({i},{j})"),
                    None => {
                        assert_eq!(corr.cells[i][j], 0.0);
                        assert!(corr.zero_variance[i] || corr.zero_variance[j]);
                    }
                }
            }
        }
    }
}

#[test]
fn nine_row_table_hand_values() {
    let t = parse_threat_csv(NINE_ROWS, "nine").unwrap();

    let hist = impact_histogram(&t, 10).unwrap();
    assert_eq!(hist.counts, vec![0, 0, 1, 1, 1, 1, 0, 2, 0, 3]);

    let shares = sector_shares(&t).unwrap();
    let got: Vec<(&str, f64)> = shares.iter().map(|s| (s.sector.as_str(), s.proportion)).collect();
    let ninth = |k: f64| k / 9.0;
    let expected = [
        ("Ransomware", ninth(4.0)),
        ("Data Breach", ninth(2.0)),
        ("Malware", ninth(1.0)),
        ("Phishing", ninth(1.0)),
        ("Social Engineering", ninth(1.0)),
    ];
    assert_eq!(got.len(), expected.len());
    for ((gs, gp), (es, ep)) in got.iter().zip(expected) {
        assert_eq!(*gs, es);
        assert!((gp - ep).abs() < 1e-12);
    }

    let ransomware = summarize_by_threat(&t)
        .unwrap()
        .into_iter()
        .find(|g| g.group_key == "Ransomware")
        .unwrap();
    assert_eq!(ransomware.attempt_total, 194);
    assert_eq!(ransomware.attempt_mean, 97.0);
    assert_eq!(ransomware.impact_mean, 73.0);
    assert_eq!(ransomware.count, 2);
}

#[test]
fn quartiles_of_one_to_four() {
    let b = eda::box_stats("g", &[4.0, 1.0, 3.0, 2.0]);
    assert_eq!((b.q1, b.median, b.q3, b.iqr), (1.75, 2.5, 3.25, 1.5));
}

#[test]
fn four_point_pearson() {
    let r = eda::pearson(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 6.0, 9.0]).unwrap();
    let oracle = oracle_pearson(&[1.0, 2.0, 3.0, 4.0], &[2.0, 4.0, 6.0, 9.0]).unwrap();
    assert!((r - oracle).abs() < 1e-12);
    // 11.5 / sqrt(5 · 26.75)
    assert!((r - 0.994_377).abs() < 1e-6, "{r}");
}
