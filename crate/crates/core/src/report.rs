//! Mergeable records of exhaustive runs.
//!
//! Shards of one run are merged with [`VerificationReport::merge`]; counters
//! add, extrema keep the better value, and witness lists are kept in a fixed
//! order so the merged record does not depend on how the work was split.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::zn::ZnSeq;
use crate::{Error, Result};

pub const REPORT_SCHEMA: &str = "zslab.report/1";

/// Failure witnesses kept per report.
pub const MAX_FAILURES_KEPT: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Characterization,
    Multiplicities,
    Gnk,
    Boundary,
}

impl Task {
    pub fn tag(self) -> &'static str {
        match self {
            Task::Characterization => "characterization",
            Task::Multiplicities => "multiplicities",
            Task::Gnk => "gnk",
            Task::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub k: Option<usize>,
    pub min_len: usize,
    pub max_len: usize,
}

/// Which shards of a partition a report covers. Absent on complete runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShardCoverage {
    pub total: usize,
    pub indices: BTreeSet<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counters {
    /// Complete multiplicity vectors that reached the canonicity test.
    pub scanned: u64,
    /// Canonical classes visited.
    pub classes: u64,
    pub failures: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthCounts {
    pub classes: u64,
    pub n_zero_free: u64,
    pub separable: u64,
    pub n_zero_free_not_separable: u64,
}

impl LengthCounts {
    fn add(&mut self, other: &LengthCounts) {
        self.classes += other.classes;
        self.n_zero_free += other.n_zero_free;
        self.separable += other.separable;
        self.n_zero_free_not_separable += other.n_zero_free_not_separable;
    }
}

/// An extreme value with the first class (in enumeration order) attaining it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extremum {
    pub value: usize,
    pub witness: ZnSeq,
}

/// Enumeration order: shorter first, then lexicographically greater vector first.
pub fn enumeration_order(a: &ZnSeq, b: &ZnSeq) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| b.cmp_vector(a))
}

fn pick(a: Option<Extremum>, b: Option<Extremum>, prefer_small: bool) -> Option<Extremum> {
    match (a, b) {
        (None, x) | (x, None) => x,
        (Some(x), Some(y)) => {
            let by_value = if prefer_small {
                x.value.cmp(&y.value)
            } else {
                y.value.cmp(&x.value)
            };
            match by_value.then_with(|| enumeration_order(&x.witness, &y.witness)) {
                Ordering::Greater => Some(y),
                _ => Some(x),
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Extrema {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub min_top1: Option<Extremum>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub min_top2sum: Option<Extremum>,
    /// Longest n-zero-free class with at least `k` distinct terms.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_zero_free_len: Option<Extremum>,
}

impl Extrema {
    pub fn offer_min_top1(&mut self, value: usize, witness: &ZnSeq) {
        self.min_top1 = pick(self.min_top1.take(), Some(Extremum { value, witness: witness.clone() }), true);
    }

    pub fn offer_min_top2sum(&mut self, value: usize, witness: &ZnSeq) {
        self.min_top2sum =
            pick(self.min_top2sum.take(), Some(Extremum { value, witness: witness.clone() }), true);
    }

    pub fn offer_max_len(&mut self, value: usize, witness: &ZnSeq) {
        self.max_zero_free_len =
            pick(self.max_zero_free_len.take(), Some(Extremum { value, witness: witness.clone() }), false);
    }

    fn merge(&mut self, other: Extrema) {
        self.min_top1 = pick(self.min_top1.take(), other.min_top1, true);
        self.min_top2sum = pick(self.min_top2sum.take(), other.min_top2sum, true);
        self.max_zero_free_len = pick(self.max_zero_free_len.take(), other.max_zero_free_len, false);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub seq: ZnSeq,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GnkRow {
    pub k: usize,
    pub brute_force: usize,
    pub expected: usize,
    pub source: String,
}

/// An assertion evaluated on a complete run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub observed: String,
    pub pass: bool,
}

impl Check {
    pub fn eq<T: ToString + PartialEq>(name: impl Into<String>, expected: T, observed: T) -> Self {
        Check {
            name: name.into(),
            pass: expected == observed,
            expected: expected.to_string(),
            observed: observed.to_string(),
        }
    }

    pub fn holds(name: impl Into<String>, pass: bool) -> Self {
        Check {
            name: name.into(),
            expected: "true".into(),
            observed: pass.to_string(),
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: String,
    pub task: Task,
    pub params: Params,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shard: Option<ShardCoverage>,
    pub counters: Counters,
    pub lengths: BTreeMap<usize, LengthCounts>,
    pub extrema: Extrema,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub gnk: Vec<GnkRow>,
    pub failures: Vec<Failure>,
    pub checks: Vec<Check>,
    /// Wall time; the only field that differs between identical runs.
    #[serde(default)]
    pub elapsed_ms: Option<u64>,
}

impl VerificationReport {
    pub fn new(task: Task, params: Params) -> Self {
        VerificationReport {
            schema: REPORT_SCHEMA.to_string(),
            task,
            params,
            shard: None,
            counters: Counters::default(),
            lengths: BTreeMap::new(),
            extrema: Extrema::default(),
            gnk: Vec::new(),
            failures: Vec::new(),
            checks: Vec::new(),
            elapsed_ms: None,
        }
    }

    pub fn for_shard(mut self, index: usize, total: usize) -> Self {
        if total > 1 {
            self.shard = Some(ShardCoverage {
                total,
                indices: BTreeSet::from([index]),
            });
        }
        self
    }

    pub fn length_mut(&mut self, len: usize) -> &mut LengthCounts {
        self.lengths.entry(len).or_default()
    }

    pub fn record_failure(&mut self, seq: &ZnSeq, reason: impl Into<String>) {
        self.counters.failures += 1;
        self.failures.push(Failure {
            seq: seq.clone(),
            reason: reason.into(),
        });
        self.trim_failures();
    }

    fn trim_failures(&mut self) {
        self.failures
            .sort_by(|a, b| enumeration_order(&a.seq, &b.seq).then_with(|| a.reason.cmp(&b.reason)));
        self.failures.truncate(MAX_FAILURES_KEPT);
    }

    /// No recorded failures and every check passed.
    pub fn passed(&self) -> bool {
        self.counters.failures == 0 && self.checks.iter().all(|c| c.pass)
    }

    /// Combine reports over disjoint shards of the same run.
    pub fn merge(mut self, other: VerificationReport) -> Result<Self> {
        if self.task != other.task || self.params != other.params {
            return Err(Error::Merge(format!(
                "different runs: {} {:?} vs {} {:?}",
                self.task.tag(),
                self.params,
                other.task.tag(),
                other.params
            )));
        }
        self.shard = match (self.shard.take(), other.shard) {
            (Some(mut a), Some(b)) if a.total == b.total => {
                if !a.indices.is_disjoint(&b.indices) {
                    return Err(Error::Merge(format!(
                        "overlapping shards {:?} and {:?}",
                        a.indices, b.indices
                    )));
                }
                a.indices.extend(b.indices);
                (a.indices.len() < a.total).then_some(a)
            }
            (a, b) => {
                return Err(Error::Merge(format!(
                    "incompatible shard coverage {a:?} and {b:?}"
                )))
            }
        };
        self.counters.scanned += other.counters.scanned;
        self.counters.classes += other.counters.classes;
        self.counters.failures += other.counters.failures;
        for (len, counts) in other.lengths {
            self.lengths.entry(len).or_default().add(&counts);
        }
        self.extrema.merge(other.extrema);
        self.gnk.extend(other.gnk);
        self.gnk.sort_by_key(|r| r.k);
        self.failures.extend(other.failures);
        self.trim_failures();
        self.checks.extend(other.checks);
        self.elapsed_ms = match (self.elapsed_ms, other.elapsed_ms) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        Ok(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// JSON with the timing field cleared, for comparing runs.
    pub fn to_json_untimed(&self) -> String {
        let mut r = self.clone();
        r.elapsed_ms = None;
        r.to_json()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let p = &self.params;
        let _ = write!(out, "task {}  n={}", self.task.tag(), p.n);
        if let Some(k) = p.k {
            let _ = write!(out, " k={k}");
        }
        let _ = writeln!(out, "  lengths {}..={}", p.min_len, p.max_len);
        if let Some(s) = &self.shard {
            let _ = writeln!(out, "shards {:?} of {}", s.indices, s.total);
        }
        let c = &self.counters;
        let _ = writeln!(
            out,
            "scanned {}  classes {}  failures {}",
            c.scanned, c.classes, c.failures
        );
        if !self.lengths.is_empty() {
            let _ = writeln!(
                out,
                "{:>6} {:>10} {:>12} {:>10} {:>14}",
                "length", "classes", "n-zero-free", "separable", "zf-not-split"
            );
            for (len, l) in &self.lengths {
                let _ = writeln!(
                    out,
                    "{:>6} {:>10} {:>12} {:>10} {:>14}",
                    len, l.classes, l.n_zero_free, l.separable, l.n_zero_free_not_separable
                );
            }
        }
        let e = &self.extrema;
        for (label, ex) in [
            ("min top1", &e.min_top1),
            ("min top2sum", &e.min_top2sum),
            ("max zero-free length", &e.max_zero_free_len),
        ] {
            if let Some(ex) = ex {
                let _ = writeln!(out, "{label}: {}  ({})", ex.value, ex.witness);
            }
        }
        if !self.gnk.is_empty() {
            let _ = writeln!(out, "{:>4} {:>12} {:>9}  source", "k", "brute-force", "expected");
            for row in &self.gnk {
                let _ = writeln!(
                    out,
                    "{:>4} {:>12} {:>9}  {}",
                    row.k, row.brute_force, row.expected, row.source
                );
            }
        }
        for f in &self.failures {
            let _ = writeln!(out, "FAIL {}: {}", f.seq, f.reason);
        }
        for ch in &self.checks {
            let _ = writeln!(
                out,
                "[{}] {}: expected {}, observed {}",
                if ch.pass { "ok" } else { "FAIL" },
                ch.name,
                ch.expected,
                ch.observed
            );
        }
        if let Some(ms) = self.elapsed_ms {
            let _ = writeln!(out, "elapsed {ms} ms");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> Params {
        Params {
            n: 5,
            k: Some(3),
            min_len: 7,
            max_len: 7,
        }
    }

    fn shard(i: usize, total: usize, seqs: &[&str]) -> VerificationReport {
        let mut r = VerificationReport::new(Task::Multiplicities, params()).for_shard(i, total);
        for s in seqs {
            let s: ZnSeq = s.parse().unwrap();
            r.counters.classes += 1;
            r.length_mut(s.len()).classes += 1;
            r.extrema.offer_min_top1(s.max_mult(), &s);
        }
        r
    }

    #[test]
    fn merge_is_order_independent() {
        let a = shard(0, 3, &["n=5: 0^3 1^3 2", "n=5: 0^4 1^3"]);
        let b = shard(1, 3, &["n=5: 0^3 1^2 2^2"]);
        let c = shard(2, 3, &["n=5: 0^3 1^3 3", "n=5: 0^5 1^2"]);
        let abc = a.clone().merge(b.clone()).unwrap().merge(c.clone()).unwrap();
        let cab = c.clone().merge(a.clone().merge(b.clone()).unwrap()).unwrap();
        let bca = b.merge(c).unwrap().merge(a).unwrap();
        assert_eq!(abc, cab);
        assert_eq!(abc, bca);
        assert!(abc.shard.is_none());
        assert_eq!(abc.counters.classes, 5);
        // ties on value 3 go to the lexicographically greater vector
        assert_eq!(abc.extrema.min_top1.unwrap().witness.to_string(), "n=5: 0^3 1^3 2");
    }

    #[test]
    fn merge_rejects_overlap_and_mismatch() {
        let a = shard(0, 2, &[]);
        assert!(a.clone().merge(shard(0, 2, &[])).is_err());
        let mut other = shard(1, 2, &[]);
        other.params.n = 6;
        assert!(a.clone().merge(other).is_err());
        assert!(a.merge(shard(0, 1, &[])).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut r = shard(0, 1, &["n=5: 0^3 1^3 2"]);
        r.record_failure(&"n=5: 0^7".parse().unwrap(), "example");
        r.checks.push(Check::eq("min top1", 3usize, 3usize));
        r.elapsed_ms = Some(12);
        let back: VerificationReport = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(!r.to_json_untimed().contains("12"));
        assert!(r.to_text().contains("min top1: 3"));
    }
}
