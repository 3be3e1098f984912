//! Acceptance suite. Runs every criterion, prints one line per criterion and
//! exits non-zero if any of them fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use sparsenorm::analysis::{estimate, prepare, AnalysisConfig};
use sparsenorm::bootstrap::{bootstrap_ci, BootstrapConfig};
use sparsenorm::cohort::{FilterConfig, PublicationRecord, QualityGroup};
use sparsenorm::indicator::{
    emnpc, mh_auxiliaries, mhq, mnpc, mnpc_scores, mnpc_weighted, world_proportions,
    IndicatorEstimate, Method, PaperMention, StratifiedTable, StratumCounts, StratumKey, WorldMode,
    ZeroPolicy, Z_95,
};
use sparsenorm::ingest::{write_dataset, MentionSource};
use sparsenorm::report::{run_compute, run_simulate, ComputeRequest, GroupSpec};
use sparsenorm::synth::{
    calibration, expected_mhq, generate, SynthConfig, SynthStratum, TierProbabilities, TierSizes,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn table(world: WorldMode, strata: &[(u64, u64, u64, u64)]) -> StratifiedTable {
    StratifiedTable::from_strata(
        world,
        strata.iter().enumerate().map(|(i, &(sg, ng, sw, nw))| {
            (
                StratumKey::new(format!("F{i}"), 2010),
                StratumCounts::new(sg, ng, sw, nw).unwrap(),
            )
        }),
    )
    .unwrap()
}

fn per_paper_mnpc(t: &StratifiedTable) -> f64 {
    let papers: Vec<PaperMention> = t
        .iter()
        .flat_map(|(k, c)| {
            let (s, n) = (c.s_g() as u64, c.n_g() as u64);
            (0..n).map(move |i| PaperMention {
                stratum: k.clone(),
                mention_count: (i < s) as u64 * (1 + i % 3),
            })
        })
        .collect();
    mnpc(&mnpc_scores(&papers, &world_proportions(t)).unwrap())
        .unwrap()
        .value
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn odds_ratio_oracle() -> Outcome {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst: f64 = 0.0;
    let trials = 5000;
    for _ in 0..trials {
        // group and complement cells, all >= 1
        let (a, b, c, d) = (
            r.gen_range(1..400u64),
            r.gen_range(1..400u64),
            r.gen_range(1..4000u64),
            r.gen_range(1..4000u64),
        );
        let t = table(WorldMode::Exclusive, &[(a, a + b, c, c + d)]);
        let classical = (a as f64 * d as f64) / (b as f64 * c as f64);
        worst = worst.max(rel_err(mhq(&t, Z_95).unwrap().value, classical));
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-12 && elapsed < Duration::from_secs(1),
        format!("{trials} tables, max relative error {worst:.2e}, {elapsed:.2?}"),
    )
}

fn identity_suite() -> Outcome {
    let mut r = rng(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let strata: Vec<_> = (0..r.gen_range(1..8))
            .map(|_| {
                let n = r.gen_range(2..60u64);
                let s = r.gen_range(1..n);
                let k = r.gen_range(1..30u64);
                (s, n, k * s, k * n)
            })
            .collect();
        let t = table(WorldMode::Inclusive, &strata);
        for v in [
            emnpc(&t, Z_95).unwrap().value,
            mhq(&t, Z_95).unwrap().value,
            per_paper_mnpc(&t),
            mnpc_weighted(&t).unwrap(),
        ] {
            worst = worst.max((v - 1.0).abs());
        }
    }
    outcome(
        worst <= 1e-12,
        format!("1000 tables, max |indicator - 1| {worst:.2e}"),
    )
}

fn mnpc_dual_form() -> Outcome {
    let mut r = rng(3);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let strata: Vec<_> = (0..r.gen_range(1..10))
            .map(|_| {
                let ng = r.gen_range(1..80u64);
                let sg = r.gen_range(0..=ng);
                let extra = r.gen_range(1..500u64);
                let nw = ng + extra;
                let sw = sg + r.gen_range(1..=extra);
                (sg, ng, sw, nw)
            })
            .collect();
        let t = table(WorldMode::Inclusive, &strata);
        worst = worst.max((per_paper_mnpc(&t) - mnpc_weighted(&t).unwrap()).abs());
    }
    outcome(
        worst <= 1e-12,
        format!("100 datasets, max difference {worst:.2e}"),
    )
}

fn hand_worked_fixture() -> Outcome {
    let t = table(WorldMode::Inclusive, &[(1, 2, 2, 4), (3, 4, 4, 8)]);
    let est = mhq(&t, Z_95).unwrap();
    let var = mh_auxiliaries(&t).unwrap().ln_variance();
    let pass = est.value == 2.0
        && (var - 1.08594).abs() <= 1e-5
        && (est.ci_lower - 0.2594).abs() <= 1e-3
        && (est.ci_upper - 15.42).abs() <= 1e-3;
    outcome(
        pass,
        format!(
            "MHq = {}, Var[ln MHq] = {var}, CI [{}, {}]",
            est.value, est.ci_lower, est.ci_upper
        ),
    )
}

fn ci_geometry() -> Outcome {
    let mut r = rng(5);
    let mut worst: f64 = 0.0;
    let mut contained = true;
    let mut checked = 0;
    for _ in 0..2000 {
        let strata: Vec<_> = (0..r.gen_range(1..6))
            .map(|_| {
                let ng = r.gen_range(1..50u64);
                let sg = r.gen_range(0..=ng);
                let extra = r.gen_range(0..300u64);
                let sw = sg + r.gen_range(0..=extra);
                (sg, ng, sw, ng + extra)
            })
            .collect();
        let raw = table(WorldMode::Inclusive, &strata);
        let Ok((t, _)) = ZeroPolicy::Continuity.apply(&raw) else {
            continue;
        };
        for est in [emnpc(&t, Z_95), mhq(&t, Z_95)].into_iter().flatten() {
            checked += 1;
            contained &= est.ci_lower <= est.value && est.value <= est.ci_upper;
            let asym = ((est.value / est.ci_lower).ln() - (est.ci_upper / est.value).ln()).abs();
            worst = worst.max(asym);
        }
    }
    outcome(
        contained && worst <= 1e-10 && checked > 3000,
        format!("{checked} intervals, contained = {contained}, max log asymmetry {worst:.2e}"),
    )
}

fn yearly_mhq(
    records: &[PublicationRecord],
    year: i32,
    tier: QualityGroup,
    source: MentionSource,
) -> IndicatorEstimate {
    let in_group =
        |r: &PublicationRecord| r.year == year && r.quality_group().is_ok_and(|q| q == tier);
    let year_records: Vec<PublicationRecord> =
        records.iter().filter(|r| r.year == year).cloned().collect();
    let prepared = prepare(&year_records, in_group, source, &AnalysisConfig::default()).unwrap();
    estimate(&prepared, Method::Mhq, Z_95).unwrap()
}

fn fmt_ci(e: &IndicatorEstimate) -> String {
    format!("{:.2} [{:.2}, {:.2}]", e.value, e.ci_lower, e.ci_upper)
}

fn qualitative_replication() -> Outcome {
    let start = Instant::now();
    let config = calibration::calibrated_config(100_000, 1, 6).unwrap();
    let records = generate(&config).unwrap();
    let tiers = QualityGroup::ALL;
    let mut lines = Vec::new();
    let mut citation_ordered = true;
    let mut citation_separated = true;
    let mut twitter_weaker = true;
    let mut twitter_separated = true;
    for year in calibration::YEARS {
        let cit: Vec<_> = tiers
            .iter()
            .map(|&q| yearly_mhq(&records, year, q, MentionSource::Citations))
            .collect();
        let tw: Vec<_> = tiers
            .iter()
            .map(|&q| yearly_mhq(&records, year, q, MentionSource::TwitterAll))
            .collect();
        citation_ordered &= cit[0].value < cit[1].value && cit[1].value < cit[2].value;
        let cit_sep = !cit[0].overlaps(&cit[1]) && !cit[1].overlaps(&cit[2]);
        citation_separated &= cit_sep;
        twitter_separated &= tw[0].value < tw[1].value
            && tw[1].value < tw[2].value
            && !tw[0].overlaps(&tw[1])
            && !tw[1].overlaps(&tw[2]);
        twitter_weaker &= tw[1].value < cit[1].value && tw[2].value < cit[2].value;
        lines.push(format!(
            "      {year} citations Q0 {} Q1 {} Q2 {}{}; twitter Q1 {} Q2 {}",
            fmt_ci(&cit[0]),
            fmt_ci(&cit[1]),
            fmt_ci(&cit[2]),
            if cit_sep { "" } else { " (Q1/Q2 overlap)" },
            fmt_ci(&tw[1]),
            fmt_ci(&tw[2]),
        ));
    }
    let elapsed = start.elapsed();
    let pass = citation_ordered
        && citation_separated
        && twitter_weaker
        && elapsed < Duration::from_secs(60);
    outcome(
        pass,
        format!(
            "citation order {citation_ordered}, citation CIs disjoint {citation_separated}, \
             twitter weaker {twitter_weaker}, twitter order+disjoint {twitter_separated}, {elapsed:.2?}\n{}",
            lines.join("\n")
        ),
    )
}

#[derive(Deserialize)]
struct Scenario {
    compare: [QualityGroup; 2],
    source: MentionSource,
    expected: BTreeMap<String, bool>,
    synth: SynthConfig,
}

fn discrimination_contrast() -> Outcome {
    let path =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/heterogeneous_strata.json");
    let scenario: Scenario = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    let span = scenario
        .synth
        .strata
        .iter()
        .filter_map(|s| s.probabilities.get(&scenario.source).map(|p| p.q0))
        .fold((f64::MAX, f64::MIN), |(lo, hi), p| (lo.min(p), hi.max(p)));
    let records = generate(&scenario.synth).unwrap();
    let mut observed = BTreeMap::new();
    let mut shown = Vec::new();
    for (method, flag) in [
        (Method::Mhq, "mhq_overlaps"),
        (Method::Emnpc, "emnpc_overlaps"),
        (Method::Mnpc, "mnpc_overlaps"),
    ] {
        let [a, b] = scenario.compare.map(|tier| {
            let in_group = |r: &PublicationRecord| r.quality_group().is_ok_and(|q| q == tier);
            let prepared = prepare(
                &records,
                in_group,
                scenario.source,
                &AnalysisConfig::default(),
            )
            .unwrap();
            estimate(&prepared, method, Z_95).unwrap()
        });
        observed.insert(flag.to_string(), a.overlaps(&b));
        shown.push(format!("{method} {} vs {}", fmt_ci(&a), fmt_ci(&b)));
    }
    let pass = observed == scenario.expected
        && !observed["mhq_overlaps"]
        && (observed["emnpc_overlaps"] || observed["mnpc_overlaps"])
        && span.0 <= 0.05
        && span.1 >= 0.9;
    outcome(
        pass,
        format!(
            "world proportions {:.2}..{:.2}; {}; flags {:?}",
            span.0,
            span.1,
            shown.join("; "),
            observed
        ),
    )
}

/// One stratum: 500 Q1 papers in an inclusive world of 5,500 papers, with
/// the Q1 mention probability chosen so that the population odds ratio is 3.
fn coverage_config(seed: u64) -> SynthConfig {
    let build = |p1: f64| SynthConfig {
        seed,
        strata: vec![SynthStratum {
            category: "A".into(),
            year: 2010,
            world_size: 5500,
            tiers: TierSizes {
                q0: 0,
                q1: 500,
                q2: 0,
            },
            probabilities: [(
                MentionSource::Citations,
                TierProbabilities {
                    q0: 0.3,
                    q1: p1,
                    q2: 0.0,
                },
            )]
            .into(),
        }],
        extra_category_probability: 0.0,
    };
    let (mut lo, mut hi) = (0.3, 0.99);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if expected_mhq(&build(mid), QualityGroup::Q1, MentionSource::Citations).unwrap() < 3.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    build(0.5 * (lo + hi))
}

fn bootstrap_coverage() -> Outcome {
    let start = Instant::now();
    let truth = expected_mhq(
        &coverage_config(0),
        QualityGroup::Q1,
        MentionSource::Citations,
    )
    .unwrap();
    let trials = 200;
    let mut covered = 0;
    for trial in 0..trials {
        let records = generate(&coverage_config(trial)).unwrap();
        let res = bootstrap_ci(
            &records,
            |r| r.is_recommended(),
            MentionSource::Citations,
            Method::Mhq,
            &AnalysisConfig::default(),
            &BootstrapConfig {
                seed: trial,
                ..Default::default()
            },
        )
        .unwrap();
        covered += res.estimate.contains(3.0) as u32;
    }
    let rate = covered as f64 / trials as f64;
    let elapsed = start.elapsed();
    outcome(
        (0.90..=0.99).contains(&rate)
            && (truth - 3.0).abs() < 1e-9
            && elapsed < Duration::from_secs(120),
        format!(
            "true odds ratio {truth:.6}, coverage {covered}/{trials} = {:.1}%, {elapsed:.2?}",
            rate * 100.0
        ),
    )
}

fn pipeline_determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let config = calibration::calibrated_config(20_000, 3, 9).unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_simulate(&config, &a).unwrap();
    run_simulate(&config, &b).unwrap();
    let mut same_data = true;
    let mut files = 0;
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        same_data &= fs::read(a.join(&name)).unwrap() == fs::read(b.join(&name)).unwrap();
        files += 1;
    }
    let request = ComputeRequest {
        manifest: a.join("manifest.json"),
        groups: QualityGroup::ALL.map(GroupSpec::Quality).to_vec(),
        sources: None,
        indicators: vec![Method::Emnpc, Method::Mnpc, Method::Mhq],
        analysis: AnalysisConfig::default(),
        bootstrap: None,
    };
    let (r1, r2) = (
        run_compute(&request).unwrap(),
        run_compute(&request).unwrap(),
    );
    let (o1, o2) = (tmp.path().join("r1"), tmp.path().join("r2"));
    r1.write(&o1).unwrap();
    r2.write(&o2).unwrap();
    let same_report = ["report.csv", "report.json", "filter_log.csv"]
        .iter()
        .all(|n| fs::read(o1.join(n)).unwrap() == fs::read(o2.join(n)).unwrap());
    outcome(
        same_data && same_report && files >= 9,
        format!(
            "{files} dataset files identical: {same_data}; {} report rows identical: {same_report}",
            r1.estimates.len()
        ),
    )
}

fn filter_rules() -> Outcome {
    // One Q1 paper per stratum; the rest of each world is unrecommended.
    let spec = [
        ("NINE", 9, 4),
        ("TEN", 10, 4),
        ("ALLCITED", 20, 20),
        ("NONECITED", 20, 0),
    ];
    let mut records = Vec::new();
    for (cat, n_w, cited) in spec {
        for i in 0..n_w {
            let mut r = PublicationRecord::new(format!("{cat}-{i}"), 2010, vec![cat.to_string()]);
            r.mentions
                .insert(MentionSource::Citations, (i < cited) as u64);
            if i == 0 {
                r.recommendation_scores.push(1);
            }
            records.push(r);
        }
    }
    let tmp = tempfile::tempdir().unwrap();
    write_dataset(&records, &[MentionSource::Citations], tmp.path()).unwrap();
    let report = run_compute(&ComputeRequest {
        manifest: tmp.path().join("manifest.json"),
        groups: vec![GroupSpec::Quality(QualityGroup::Q1)],
        sources: None,
        indicators: vec![Method::Mhq],
        analysis: AnalysisConfig {
            filter: FilterConfig::default(),
            ..Default::default()
        },
        bootstrap: None,
    })
    .unwrap();
    let logged: BTreeMap<&str, &str> = report
        .filter_log
        .iter()
        .map(|e| (e.category.as_str(), e.rule.as_str()))
        .collect();
    let expected: BTreeMap<&str, &str> = [
        ("NINE", "min_stratum_papers"),
        ("ALLCITED", "require_mixed_outcomes"),
        ("NONECITED", "require_mixed_outcomes"),
    ]
    .into();
    let kept = report.estimates.first().map(|e| e.strata);
    outcome(
        logged == expected && kept == Some(1),
        format!("removed {logged:?}, strata kept {kept:?}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("odds-ratio oracle", odds_ratio_oracle),
        ("identity suite", identity_suite),
        ("MNPC dual form", mnpc_dual_form),
        ("hand-worked fixture", hand_worked_fixture),
        ("CI geometry", ci_geometry),
        ("qualitative replication", qualitative_replication),
        ("discrimination contrast", discrimination_contrast),
        ("bootstrap coverage", bootstrap_coverage),
        ("pipeline determinism", pipeline_determinism),
        ("filter rules", filter_rules),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        failed += !o.pass as usize;
        println!(
            "criterion {:>2} {:<24} {}  {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
