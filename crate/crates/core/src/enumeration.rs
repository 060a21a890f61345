//! Canonical enumeration of multisets over `Z_n` and the exhaustive drivers
//! built on it.
//!
//! Candidates are multiplicity vectors generated in lexicographically
//! decreasing order with `mult[0]` as the largest entry. A candidate is
//! emitted only if no affine image beats it, so every similitude orbit is
//! visited exactly once and nothing has to be remembered between branches.
//!
//! Work is split by the multiplicities of the first two residues: the
//! `i`-th such prefix (in generation order) belongs to shard `i mod total`.

use std::ops::ControlFlow;
use std::time::Instant;

use rayon::prelude::*;

use crate::engine::{self, ZeroSumTracker};
use crate::extremal::{self, floor_half_square};
use crate::report::{Check, GnkRow, Params, Task, VerificationReport};
use crate::separability::{self, is_long, mult_stats};
use crate::zn::{is_canonical_vector, units, ZnSeq};
use crate::{Error, Result};

/// Largest `n` the CLI sweeps without an explicit override.
pub const DESK_SCALE_MAX_N: usize = 10;

const PREFIX_DEPTH: usize = 2;

/// Incremental pruning of partial multisets.
pub trait PruneHook: Sync {
    type State: Clone;

    fn root(&self, n: usize, len: usize) -> Self::State;

    /// Add `m` copies of residue `r`. `placed` counts terms placed so far
    /// including these. Returning `None` abandons the branch.
    fn extend(&self, state: &Self::State, r: usize, m: usize, placed: usize) -> Option<Self::State>;
}

/// Visit everything.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoPrune;

impl PruneHook for NoPrune {
    type State = ();

    fn root(&self, _n: usize, _len: usize) {}

    fn extend(&self, _: &(), _: usize, _: usize, _: usize) -> Option<()> {
        Some(())
    }
}

/// Abandon any partial multiset that already has an n-term zero sum, and
/// optionally any that can no longer reach `min_distinct` distinct terms.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroFreePrune {
    pub min_distinct: usize,
}

#[derive(Debug, Clone)]
pub struct ZeroFreeState {
    n: usize,
    len: usize,
    distinct: usize,
    tracker: ZeroSumTracker,
}

impl PruneHook for ZeroFreePrune {
    type State = ZeroFreeState;

    fn root(&self, n: usize, len: usize) -> ZeroFreeState {
        ZeroFreeState {
            n,
            len,
            distinct: 0,
            tracker: ZeroSumTracker::new(n, n),
        }
    }

    fn extend(&self, state: &ZeroFreeState, r: usize, m: usize, placed: usize) -> Option<ZeroFreeState> {
        let distinct = state.distinct + usize::from(m > 0);
        let open_residues = state.n - 1 - r;
        let open_terms = state.len - placed;
        if distinct + open_residues.min(open_terms) < self.min_distinct {
            return None;
        }
        let mut next = ZeroFreeState {
            distinct,
            ..state.clone()
        };
        if m > 0 {
            next.tracker.add(r, m);
            if placed >= state.n && next.tracker.zero_at(state.n) {
                return None;
            }
        }
        Some(next)
    }
}

/// Which part of the prefix partition to visit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Shard {
    pub index: usize,
    pub total: usize,
}

impl Shard {
    pub const ALL: Shard = Shard { index: 0, total: 1 };

    pub fn new(index: usize, total: usize) -> Result<Self> {
        if total == 0 || index >= total {
            return Err(Error::Precondition(format!(
                "shard index {index} must be below shard total {total}"
            )));
        }
        Ok(Shard { index, total })
    }
}

/// Counts from one enumeration pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EnumStats {
    pub scanned: u64,
    pub emitted: u64,
}

struct Walker<'a, H: PruneHook, F> {
    n: usize,
    len: usize,
    units: Vec<usize>,
    hook: &'a H,
    shard: Shard,
    prefix_depth: usize,
    prefix_counter: usize,
    mult: Vec<usize>,
    stats: EnumStats,
    visit: F,
}

impl<H, F> Walker<'_, H, F>
where
    H: PruneHook,
    F: FnMut(&ZnSeq) -> ControlFlow<()>,
{
    fn walk(&mut self, r: usize, placed: usize, state: &H::State) -> ControlFlow<()> {
        if r == self.prefix_depth {
            let idx = self.prefix_counter;
            self.prefix_counter += 1;
            if idx % self.shard.total != self.shard.index {
                return ControlFlow::Continue(());
            }
        }
        let remaining = self.len - placed;
        if r == self.n || (remaining == 0 && r >= self.prefix_depth) {
            if remaining > 0 {
                return ControlFlow::Continue(());
            }
            return self.leaf();
        }
        let (hi, lo) = if r == 0 {
            (self.len, self.len.div_ceil(self.n))
        } else {
            let cap = self.mult[0];
            let rest_cap = cap * (self.n - 1 - r);
            (cap.min(remaining), remaining.saturating_sub(rest_cap))
        };
        for m in (lo..=hi).rev() {
            let Some(next) = self.hook.extend(state, r, m, placed + m) else {
                continue;
            };
            self.mult[r] = m;
            let flow = self.walk(r + 1, placed + m, &next);
            self.mult[r] = 0;
            flow?;
        }
        ControlFlow::Continue(())
    }

    fn leaf(&mut self) -> ControlFlow<()> {
        self.stats.scanned += 1;
        if !is_canonical_vector(&self.mult, &self.units) {
            return ControlFlow::Continue(());
        }
        self.stats.emitted += 1;
        let seq = ZnSeq::from_mults(self.n, self.mult.clone()).expect("valid modulus");
        (self.visit)(&seq)
    }
}

/// Visit one representative of every similitude orbit of length-`len`
/// multisets over `Z_n` that survives `hook`, within `shard`. The visitor
/// may stop the walk early by returning `Break`.
pub fn enumerate_canonical<H, F>(n: usize, len: usize, hook: &H, shard: Shard, visit: F) -> EnumStats
where
    H: PruneHook,
    F: FnMut(&ZnSeq) -> ControlFlow<()>,
{
    assert!(n >= 1, "modulus must be positive");
    let mut walker = Walker {
        n,
        len,
        units: units(n),
        hook,
        shard,
        prefix_depth: PREFIX_DEPTH.min(n),
        prefix_counter: 0,
        mult: vec![0; n],
        stats: EnumStats::default(),
        visit,
    };
    let root = hook.root(n, len);
    let _ = walker.walk(0, 0, &root);
    walker.stats
}

/// All canonical classes of length `len`.
pub fn canonical_classes(n: usize, len: usize) -> Vec<ZnSeq> {
    let mut out = Vec::new();
    enumerate_canonical(n, len, &NoPrune, Shard::ALL, |s| {
        out.push(s.clone());
        ControlFlow::Continue(())
    });
    out
}

/// Canonical classes of length `len` with no n-term zero sum.
pub fn zero_free_classes(n: usize, len: usize) -> Vec<ZnSeq> {
    let mut out = Vec::new();
    enumerate_canonical(n, len, &ZeroFreePrune::default(), Shard::ALL, |s| {
        if engine::is_n_zero_free(s) {
            out.push(s.clone());
        }
        ControlFlow::Continue(())
    });
    out
}

/// How a driver splits and schedules its work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunOptions {
    /// Size of the prefix partition.
    pub shards: usize,
    /// Run just this shard and return a partial report.
    pub only_shard: Option<usize>,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            shards: 1,
            only_shard: None,
            jobs: 0,
        }
    }
}

impl RunOptions {
    pub fn sharded(shards: usize) -> Self {
        RunOptions {
            shards,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.shards == 0 {
            return Err(Error::Precondition("shard total must be positive".into()));
        }
        if let Some(i) = self.only_shard {
            Shard::new(i, self.shards)?;
        }
        Ok(())
    }

    fn selected(&self) -> Vec<Shard> {
        match self.only_shard {
            Some(index) => vec![Shard {
                index,
                total: self.shards,
            }],
            None => (0..self.shards)
                .map(|index| Shard {
                    index,
                    total: self.shards,
                })
                .collect(),
        }
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs)
            .build()
            .map_err(|e| Error::Precondition(format!("cannot start worker pool: {e}")))
    }
}

fn run_shards<S>(opts: &RunOptions, scan: S) -> Result<VerificationReport>
where
    S: Fn(Shard) -> VerificationReport + Sync,
{
    opts.validate()?;
    let shards = opts.selected();
    let parts: Vec<VerificationReport> = opts
        .pool()?
        .install(|| shards.par_iter().map(|&s| scan(s)).collect());
    let mut parts = parts.into_iter();
    let first = parts.next().expect("at least one shard");
    parts.try_fold(first, VerificationReport::merge)
}

fn finish(
    mut report: VerificationReport,
    started: Instant,
    finalize: impl FnOnce(&mut VerificationReport),
) -> VerificationReport {
    if report.shard.is_none() {
        finalize(&mut report);
    }
    report.elapsed_ms = Some(started.elapsed().as_millis() as u64);
    report
}

/// Lengths covered by the characterization sweep: `(3n/2 − 1, 2n − 2]`,
/// widened to include `2n − 2` itself when that interval is empty (`n = 2`).
pub fn characterization_lengths(n: usize) -> (usize, usize) {
    let hi = 2 * n - 2;
    let first_long = (3 * n).saturating_sub(2) / 2 + 1;
    (first_long.min(hi), hi)
}

fn check_class(report: &mut VerificationReport, s: &ZnSeq) {
    let n = s.modulus();
    let len = s.len();
    let nzf = engine::is_n_zero_free(s);
    let split = separability::is_separable(s);
    let counts = report.length_mut(len);
    counts.classes += 1;
    counts.n_zero_free += u64::from(nzf);
    counts.separable += u64::from(split.is_some());
    counts.n_zero_free_not_separable += u64::from(nzf && split.is_none());

    if nzf != split.is_some() {
        report.record_failure(
            s,
            format!("n-zero-free = {nzf} but separable = {}", split.is_some()),
        );
    }
    if let Some(d) = &split {
        if let Err(e) = d.validate(s) {
            report.record_failure(s, format!("orbit split invalid: {e}"));
        }
        if len >= n && len <= 2 * n - 2 {
            match separability::verify_split_structure(d, len + 1 - n) {
                Ok(p) if p.all_pass() => {}
                Ok(p) => report.record_failure(s, format!("split properties fail: {:?}", p.failed())),
                Err(e) => report.record_failure(s, format!("split properties: {e}")),
            }
        }
        let flipped = d.normalized();
        let st = mult_stats(&flipped.union());
        if flipped.validate(s).is_err() || st.u > st.v {
            report.record_failure(s, "normalized split (u <= v) invalid");
        }
    }
    if nzf && is_long(len, n) {
        if let Err(e) = separability::decompose_via_proof(s) {
            report.record_failure(s, format!("constructive split failed: {e}"));
        }
    }
}

/// For every canonical class in the long range, n-zero-free must coincide
/// with having a split, and the constructive split must succeed.
pub fn verify_characterization(n: usize, opts: &RunOptions) -> Result<VerificationReport> {
    if n < 2 {
        return Err(Error::Precondition(format!("n >= 2 required, got {n}")));
    }
    let started = Instant::now();
    let (lo, hi) = characterization_lengths(n);
    let params = Params {
        n,
        k: None,
        min_len: lo,
        max_len: hi,
    };
    let report = run_shards(opts, |shard| {
        let mut report = VerificationReport::new(Task::Characterization, params.clone())
            .for_shard(shard.index, shard.total);
        for len in lo..=hi {
            let mut classes = Vec::new();
            let stats = enumerate_canonical(n, len, &NoPrune, shard, |s| {
                classes.push(s.clone());
                ControlFlow::Continue(())
            });
            report.counters.scanned += stats.scanned;
            report.counters.classes += stats.emitted;
            report.length_mut(len);
            for s in &classes {
                check_class(&mut report, s);
            }
        }
        report
    })?;
    Ok(finish(report, started, |r| {
        let mut checks = vec![Check::eq("failures", 0, r.counters.failures)];
        for (len, c) in &r.lengths {
            checks.push(Check::holds(format!("length {len} has classes"), c.classes > 0));
        }
        r.checks.extend(checks);
    }))
}

/// Expected minimum of the top multiplicity at length `n − 1 + k`.
pub fn expected_min_top1(n: usize, k: usize) -> usize {
    if (n - k) % 2 == 1 {
        k
    } else {
        k + 1
    }
}

/// Minimum of the top multiplicity and of the top-two sum over all
/// n-zero-free classes of length `n − 1 + k`, for `n/2 < k < n`.
pub fn min_multiplicities(n: usize, k: usize, opts: &RunOptions) -> Result<VerificationReport> {
    if !(2 * k > n && k < n) {
        return Err(Error::Precondition(format!("n/2 < k < n required (n={n}, k={k})")));
    }
    let started = Instant::now();
    let len = n - 1 + k;
    let params = Params {
        n,
        k: Some(k),
        min_len: len,
        max_len: len,
    };
    let report = run_shards(opts, |shard| {
        let mut report = VerificationReport::new(Task::Multiplicities, params.clone())
            .for_shard(shard.index, shard.total);
        report.length_mut(len);
        let mut found = Vec::new();
        let stats = enumerate_canonical(n, len, &ZeroFreePrune::default(), shard, |s| {
            if engine::is_n_zero_free(s) {
                found.push(s.clone());
            }
            ControlFlow::Continue(())
        });
        report.counters.scanned += stats.scanned;
        report.counters.classes += stats.emitted;
        for s in &found {
            let st = mult_stats(s);
            let c = report.length_mut(len);
            c.classes += 1;
            c.n_zero_free += 1;
            report.extrema.offer_min_top1(st.top1, s);
            report.extrema.offer_min_top2sum(st.top2sum, s);
        }
        report
    })?;
    Ok(finish(report, started, |r| {
        let observed = |e: &Option<crate::report::Extremum>| {
            e.as_ref().map_or("none".to_string(), |x| x.value.to_string())
        };
        r.checks.push(Check::eq(
            "min top1",
            expected_min_top1(n, k).to_string(),
            observed(&r.extrema.min_top1),
        ));
        r.checks.push(Check::eq(
            "min top2sum",
            (2 * k).to_string(),
            observed(&r.extrema.min_top2sum),
        ));
    }))
}

/// `2n − 1 − ⌊((k − 1)/2)²⌋` for `n >= k` and `4 <= k <= sqrt(2n − 1) + 1`.
pub fn gnk_formula(n: usize, k: usize) -> Result<usize> {
    if k > n {
        return Err(Error::Precondition(format!("n >= k required (n={n}, k={k})")));
    }
    if k < 4 {
        return Err(Error::Precondition(format!("k >= 4 required (k={k})")));
    }
    if (k - 1) * (k - 1) > 2 * n - 1 {
        return Err(Error::Precondition(format!(
            "k <= sqrt(2n-1) + 1 required (n={n}, k={k})"
        )));
    }
    Ok(2 * n - 1 - floor_half_square(k))
}

/// Largest `k` covered by the closed formula for this `n`.
pub fn gnk_formula_max_k(n: usize) -> usize {
    (1..=n).take_while(|&k| (k - 1) * (k - 1) <= 2 * n - 1).last().unwrap_or(0)
}

struct GnkSearch {
    value: usize,
    scanned: u64,
    classes: u64,
    witness: Option<ZnSeq>,
}

fn gnk_search(n: usize, k: usize, opts: &RunOptions) -> Result<GnkSearch> {
    if n < 1 || k < 1 || k > n {
        return Err(Error::Precondition(format!("1 <= k <= n required (n={n}, k={k})")));
    }
    opts.validate()?;
    let hook = ZeroFreePrune { min_distinct: k };
    let pool = opts.pool()?;
    let (mut scanned, mut classes) = (0, 0);
    for len in (k..=2 * n - 2).rev() {
        let hits: Vec<(EnumStats, Option<ZnSeq>)> = pool.install(|| {
            opts.selected()
                .into_par_iter()
                .map(|shard| {
                    let mut hit = None;
                    let stats = enumerate_canonical(n, len, &hook, shard, |s| {
                        if s.distinct_count() >= k && engine::is_n_zero_free(s) {
                            hit = Some(s.clone());
                            ControlFlow::Break(())
                        } else {
                            ControlFlow::Continue(())
                        }
                    });
                    (stats, hit)
                })
                .collect()
        });
        scanned += hits.iter().map(|h| h.0.scanned).sum::<u64>();
        classes += hits.iter().map(|h| h.0.emitted).sum::<u64>();
        let witness = hits
            .into_iter()
            .filter_map(|h| h.1)
            .max_by(|a, b| a.cmp_vector(b));
        if witness.is_some() {
            return Ok(GnkSearch {
                value: len + 1,
                scanned,
                classes,
                witness,
            });
        }
    }
    Ok(GnkSearch {
        value: k,
        scanned,
        classes,
        witness: None,
    })
}

/// `g(n, k)` by exhaustive search: one more than the longest n-zero-free
/// sequence with at least `k` distinct terms, and never below `k`.
pub fn gnk_bruteforce(n: usize, k: usize) -> Result<usize> {
    gnk_search(n, k, &RunOptions::default()).map(|s| s.value)
}

pub fn gnk_bruteforce_with(n: usize, k: usize, opts: &RunOptions) -> Result<usize> {
    gnk_search(n, k, opts).map(|s| s.value)
}

/// Brute-force `g(n, k)` against every known value for this `n`, and check
/// the lower-bound families.
pub fn verify_gnk(n: usize, opts: &RunOptions) -> Result<VerificationReport> {
    if n < 2 {
        return Err(Error::Precondition(format!("n >= 2 required, got {n}")));
    }
    if opts.only_shard.is_some() {
        return Err(Error::Precondition(
            "the g(n,k) search runs its shards internally; --shard is not supported".into(),
        ));
    }
    let started = Instant::now();
    let mut report = VerificationReport::new(
        Task::Gnk,
        Params {
            n,
            k: None,
            min_len: 0,
            max_len: 2 * n - 2,
        },
    );
    let mut targets = vec![(2, 2 * n - 1, "2n-1")];
    if n >= 4 {
        targets.push((3, 2 * n - 2, "2n-2"));
    } else if n == 3 {
        targets.push((3, 3, "g(3,3)=3"));
    }
    for k in 4..=gnk_formula_max_k(n) {
        targets.push((k, gnk_formula(n, k)?, "formula"));
    }
    for (k, expected, source) in targets {
        let found = gnk_search(n, k, opts)?;
        report.counters.scanned += found.scanned;
        report.counters.classes += found.classes;
        if let Some(w) = &found.witness {
            report.extrema.offer_max_len(w.len(), w);
        }
        report.gnk.push(GnkRow {
            k,
            brute_force: found.value,
            expected,
            source: source.to_string(),
        });
        report
            .checks
            .push(Check::eq(format!("g({n},{k}) [{source}]"), expected, found.value));
        if let Ok(fam) = extremal::gen_gnk_lower_bound(n, k) {
            let s = &fam.seq;
            let ok = engine::is_n_zero_free(s)
                && s.distinct_count() == k
                && s.len() + 1 == expected;
            report
                .checks
                .push(Check::holds(format!("lower-bound family k={k}: {s}"), ok));
        }
    }
    Ok(finish(report, started, |_| {}))
}

/// At length `n − 1 + ⌊n/2⌋`, count n-zero-free classes with and without a split.
pub fn boundary_survey(n: usize, opts: &RunOptions) -> Result<VerificationReport> {
    if n < 3 {
        return Err(Error::Precondition(format!("n >= 3 required, got {n}")));
    }
    let started = Instant::now();
    let len = n - 1 + n / 2;
    let params = Params {
        n,
        k: None,
        min_len: len,
        max_len: len,
    };
    let report = run_shards(opts, |shard| {
        let mut report = VerificationReport::new(Task::Boundary, params.clone())
            .for_shard(shard.index, shard.total);
        report.length_mut(len);
        let mut found = Vec::new();
        let stats = enumerate_canonical(n, len, &ZeroFreePrune::default(), shard, |s| {
            if engine::is_n_zero_free(s) {
                found.push(s.clone());
            }
            ControlFlow::Continue(())
        });
        report.counters.scanned += stats.scanned;
        report.counters.classes += stats.emitted;
        for s in &found {
            let split = separability::is_separable(s);
            let c = report.length_mut(len);
            c.classes += 1;
            c.n_zero_free += 1;
            c.separable += u64::from(split.is_some());
            c.n_zero_free_not_separable += u64::from(split.is_none());
        }
        report
    })?;
    Ok(finish(report, started, |r| {
        let Ok(example) = extremal::gen_boundary_counterexample(n) else {
            return;
        };
        let count = r.lengths.get(&len).map_or(0, |c| c.n_zero_free_not_separable);
        r.checks.push(Check::holds("some n-zero-free class has no split", count >= 1));
        let s = &example.seq;
        r.checks.push(Check::holds(
            format!("{s} is n-zero-free and has no split"),
            engine::is_n_zero_free(s) && separability::is_separable(s).is_none(),
        ));
    }))
}
