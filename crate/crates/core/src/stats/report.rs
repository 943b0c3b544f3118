use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::correlation::{duration_agreement, AgreementSample, DurationAgreement};
use super::protocol::{
    filter_records, flatline_annotators, item_scores, system_scores, ItemKey, Removal, SystemScore,
};
use super::wilcoxon::{bonferroni, wilcoxon_signed_rank, WilcoxonMethod};
use crate::model::{Aspect, RatingRecord};

#[derive(Debug, Clone, Default)]
pub struct ScoreOptions {
    /// Audio duration per `pair_id`, enabling the duration/agreement analysis.
    pub durations: Option<BTreeMap<String, f64>>,
    /// System pairs to test. `None` tests every unordered pair of systems.
    pub comparisons: Option<Vec<(String, String)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestRow {
    pub aspect: Aspect,
    pub system_a: String,
    pub system_b: String,
    pub w: f64,
    pub p: f64,
    pub p_bonferroni: f64,
    pub n: usize,
    pub method: WilcoxonMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub system_scores: Vec<SystemScore>,
    pub tests: Vec<TestRow>,
    pub removals: Vec<Removal>,
    pub flagged_annotators: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_agreement: Option<DurationAgreement>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Runs the whole scoring protocol. Flatlining annotators are dropped before
/// the item filters so their votes cannot remove or rescue an item. The
/// Bonferroni family is every test in the report.
pub fn score_campaign(records: &[RatingRecord], opts: &ScoreOptions) -> ScoreReport {
    let mut warnings = Vec::new();
    let flagged = flatline_annotators(records);
    let flagged_set: BTreeSet<&str> = flagged.iter().map(String::as_str).collect();
    let trusted: Vec<RatingRecord> = records
        .iter()
        .filter(|r| !flagged_set.contains(r.annotator_id.as_str()))
        .cloned()
        .collect();
    let (kept, removals) = filter_records(&trusted);
    let items = item_scores(&kept);
    let scores = system_scores(&items);

    let lookup: BTreeMap<(Aspect, &str, &str), f64> = items
        .iter()
        .map(|i| ((i.aspect, i.system_id.as_str(), i.pair_id.as_str()), i.score))
        .collect();
    let systems: BTreeSet<&str> = items.iter().map(|i| i.system_id.as_str()).collect();
    let comparisons: Vec<(String, String)> = match &opts.comparisons {
        Some(c) => c.clone(),
        None => {
            let sys: Vec<&str> = systems.iter().copied().collect();
            let mut out = Vec::new();
            for (i, a) in sys.iter().enumerate() {
                for b in &sys[i + 1..] {
                    out.push((a.to_string(), b.to_string()));
                }
            }
            out
        }
    };

    let mut tests = Vec::new();
    for aspect in Aspect::ORDER {
        for (a, b) in &comparisons {
            let pairs: Vec<(f64, f64)> = lookup
                .range((aspect, a.as_str(), "")..)
                .take_while(|((asp, sys, _), _)| *asp == aspect && sys == a)
                .filter_map(|((_, _, pair), &xa)| {
                    lookup.get(&(aspect, b.as_str(), *pair)).map(|&xb| (xa, xb))
                })
                .collect();
            if pairs.is_empty() {
                warnings.push(format!("{aspect}: no shared items for {a} vs {b}; test skipped"));
                continue;
            }
            let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let r = wilcoxon_signed_rank(&x, &y).expect("paired vectors have equal length");
            tests.push(TestRow {
                aspect,
                system_a: a.clone(),
                system_b: b.clone(),
                w: r.w_statistic,
                p: r.p_two_sided,
                p_bonferroni: r.p_two_sided,
                n: r.n_effective,
                method: r.method,
            });
        }
    }
    let raw: Vec<f64> = tests.iter().map(|t| t.p).collect();
    let adjusted = bonferroni(&raw).expect("p-values lie in [0, 1]");
    for (t, p) in tests.iter_mut().zip(adjusted) {
        t.p_bonferroni = p;
    }

    let duration_agreement = opts.durations.as_ref().and_then(|durations| {
        let samples = agreement_samples(&kept, durations, &mut warnings);
        match duration_agreement(&samples) {
            Ok(d) => Some(d),
            Err(e) => {
                warnings.push(format!("duration agreement skipped: {e}"));
                None
            }
        }
    });

    ScoreReport {
        system_scores: scores,
        tests,
        removals,
        flagged_annotators: flagged,
        duration_agreement,
        warnings,
    }
}

/// One sample per item and aspect: the ratings it received, at the pair's
/// duration.
fn agreement_samples(
    kept: &[RatingRecord],
    durations: &BTreeMap<String, f64>,
    warnings: &mut Vec<String>,
) -> Vec<AgreementSample> {
    let mut grouped: BTreeMap<(ItemKey, Aspect), Vec<u8>> = BTreeMap::new();
    for r in kept {
        for (&aspect, &v) in &r.ratings {
            grouped.entry((ItemKey::of(r), aspect)).or_default().push(v);
        }
    }
    let mut missing = BTreeSet::new();
    let samples = grouped
        .into_iter()
        .filter_map(|((key, _), ratings)| match durations.get(&key.pair_id) {
            Some(&duration_s) => Some(AgreementSample { duration_s, ratings }),
            None => {
                missing.insert(key.pair_id);
                None
            }
        })
        .collect();
    if !missing.is_empty() {
        warnings.push(format!(
            "no duration for {} pair(s), excluded from duration agreement",
            missing.len()
        ));
    }
    samples
}

/// Tab-separated summary: system scores, then tests.
pub fn write_tsv(report: &ScoreReport) -> String {
    let mut out = String::from("system\taspect\tmean\tn_items\n");
    for s in &report.system_scores {
        let _ = writeln!(out, "{}\t{}\t{:.4}\t{}", s.system_id, s.aspect, s.mean, s.n_items);
    }
    out.push_str("\naspect\tsystem_a\tsystem_b\tw\tp\tp_bonferroni\tn\n");
    for t in &report.tests {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.6}\t{:.6}\t{}",
            t.aspect, t.system_a, t.system_b, t.w, t.p, t.p_bonferroni, t.n
        );
    }
    out
}
