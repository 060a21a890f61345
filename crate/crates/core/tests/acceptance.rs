//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zslab::engine::{self, SumLenTable, SumsByLength};
use zslab::enumeration::{
    self, canonical_classes, gnk_bruteforce, min_multiplicities, verify_characterization,
    RunOptions,
};
use zslab::extremal::gen_boundary_counterexample;
use zslab::separability::{decompose_via_proof, is_long, is_separable, mult_stats, verify_split_structure};
use zslab::zn::{units, AffineMap, ZnSeq};

type Outcome = Result<String, String>;

const RANDOM_CASES: usize = 10_000;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn n_zero_free_classes(n: usize, len: usize) -> Vec<ZnSeq> {
    canonical_classes(n, len)
        .into_iter()
        .filter(engine::is_n_zero_free)
        .collect()
}

fn ac1_egz() -> Outcome {
    let mut scanned = 0;
    for n in 2..=8 {
        let classes = canonical_classes(n, 2 * n - 1);
        scanned += classes.len();
        let bad: Vec<_> = classes.iter().filter(|s| engine::is_n_zero_free(s)).collect();
        ensure(bad.is_empty(), || format!("n={n}: {} has no n-term zero sum", bad[0]))?;
        let pruned = enumeration::zero_free_classes(n, 2 * n - 1);
        ensure(pruned.is_empty(), || format!("n={n}: pruned walk found {}", pruned[0]))?;
    }
    Ok(format!("{scanned} classes at length 2n-1, n=2..8, all contain an n-term zero sum"))
}

fn ac2_characterization() -> Outcome {
    let mut checked = 0;
    let mut zero_free = 0;
    let mut proof_checked = 0;
    for n in 2..=9 {
        let (lo, hi) = enumeration::characterization_lengths(n);
        ensure(hi == 2 * n - 2, || format!("n={n}: top length {hi}"))?;
        for len in lo..=hi {
            for s in canonical_classes(n, len) {
                checked += 1;
                let nzf = engine::is_n_zero_free(&s);
                let split = is_separable(&s);
                ensure(nzf == split.is_some(), || {
                    format!("{s}: n-zero-free {nzf}, separable {}", split.is_some())
                })?;
                let Some(d) = split else { continue };
                zero_free += 1;
                d.validate(&s).map_err(|e| format!("{s}: orbit split: {e}"))?;
                if !is_long(len, n) {
                    continue;
                }
                proof_checked += 1;
                let p = decompose_via_proof(&s).map_err(|e| format!("{s}: proof route: {e}"))?;
                p.validate(&s).map_err(|e| format!("{s}: proof split: {e}"))?;
                let (la, lb) = p.costs();
                ensure(la < n && lb < n, || format!("{s}: costs ({la}, {lb})"))?;
                let k = len + 1 - n;
                let rep = verify_split_structure(&p.normalized(), k).map_err(|e| format!("{s}: {e}"))?;
                ensure(rep.all_pass(), || format!("{s}: failed {:?}", rep.failed()))?;
            }
        }
        let report = verify_characterization(n, &RunOptions::default())
            .map_err(|e| format!("n={n}: {e}"))?;
        ensure(report.passed() && report.counters.failures == 0, || {
            format!("n={n}: driver report failed: {:?}", report.failures)
        })?;
    }
    Ok(format!("{checked} classes, {zero_free} n-zero-free, {proof_checked} constructive splits"))
}

fn ac3_boundary() -> Outcome {
    let mut seen = Vec::new();
    for n in [6, 8, 9, 10, 11] {
        let inst = gen_boundary_counterexample(n).map_err(|e| format!("n={n}: {e}"))?;
        let s = &inst.seq;
        ensure(s.len() == n - 1 + n / 2, || format!("{s}: length {}", s.len()))?;
        ensure(engine::is_n_zero_free(s), || format!("{s} has an n-term zero sum"))?;
        ensure(is_separable(s).is_none(), || format!("{s} splits"))?;
        seen.push(s.to_string());
    }
    Ok(seen.join("; "))
}

fn min_over_classes(n: usize, k: usize) -> Result<(usize, usize), String> {
    let classes = n_zero_free_classes(n, n - 1 + k);
    ensure(!classes.is_empty(), || format!("n={n} k={k}: no n-zero-free class"))?;
    let top1 = classes.iter().map(|s| mult_stats(s).top1).min().unwrap();
    let top2 = classes.iter().map(|s| mult_stats(s).top2sum).min().unwrap();
    Ok((top1, top2))
}

fn ks(n: usize) -> impl Iterator<Item = usize> {
    n / 2 + 1..n
}

fn ac4_min_top1() -> Outcome {
    let mut rows = 0;
    for n in 5..=9 {
        for k in ks(n) {
            let want = if (n + k) % 2 == 1 { k } else { k + 1 };
            let (top1, _) = min_over_classes(n, k)?;
            ensure(top1 == want, || format!("n={n} k={k}: min top1 {top1}, want {want}"))?;
            let r = min_multiplicities(n, k, &RunOptions::default())
                .map_err(|e| format!("n={n} k={k}: {e}"))?;
            let got = r.extrema.min_top1.as_ref().map(|e| e.value);
            ensure(got == Some(want) && r.passed(), || {
                format!("n={n} k={k}: driver min top1 {got:?}")
            })?;
            rows += 1;
        }
    }
    Ok(format!("{rows} (n, k) pairs, exact"))
}

fn ac5_min_top2sum() -> Outcome {
    let mut rows = 0;
    for n in 5..=9 {
        for k in ks(n) {
            let (_, top2) = min_over_classes(n, k)?;
            ensure(top2 == 2 * k, || format!("n={n} k={k}: min top2sum {top2}, want {}", 2 * k))?;
            let r = min_multiplicities(n, k, &RunOptions::default())
                .map_err(|e| format!("n={n} k={k}: {e}"))?;
            let got = r.extrema.min_top2sum.as_ref().map(|e| e.value);
            ensure(got == Some(2 * k), || format!("n={n} k={k}: driver min top2sum {got:?}"))?;
            rows += 1;
        }
    }
    Ok(format!("{rows} (n, k) pairs, exact"))
}

fn ac6_structure() -> Outcome {
    for n in 2..=9 {
        let classes = n_zero_free_classes(n, 2 * n - 2);
        let target = ZnSeq::from_powers(n, &[(0, n - 1), (1, n - 1)]).unwrap();
        ensure(classes.len() == 1, || format!("n={n}: {} classes at 2n-2", classes.len()))?;
        ensure(classes[0].is_similar_to(&target), || format!("n={n}: {}", classes[0]))?;
    }
    for n in 5..=9 {
        let classes = n_zero_free_classes(n, 2 * n - 3);
        let a = ZnSeq::from_powers(n, &[(0, n - 1), (1, n - 2)]).unwrap();
        let b = ZnSeq::from_powers(n, &[(0, n - 1), (1, n - 3), (2, 1)]).unwrap();
        ensure(classes.len() == 2, || format!("n={n}: {} classes at 2n-3", classes.len()))?;
        let hits_a = classes.iter().filter(|s| s.is_similar_to(&a)).count();
        let hits_b = classes.iter().filter(|s| s.is_similar_to(&b)).count();
        ensure(hits_a == 1 && hits_b == 1, || {
            format!("n={n}: classes {classes:?} do not match the two expected shapes")
        })?;
    }
    Ok("one class at 2n-2 (n=2..9), two classes at 2n-3 (n=5..9)".into())
}

fn ac7_gnk() -> Outcome {
    let mut cells = Vec::new();
    for n in 3..=9 {
        let mut expect = vec![(2, 2 * n - 1)];
        expect.push((3, if n == 3 { 3 } else { 2 * n - 2 }));
        let mut k = 4;
        while (k - 1) * (k - 1) <= 2 * n - 1 {
            expect.push((k, 2 * n - 1 - (k - 1) * (k - 1) / 4));
            k += 1;
        }
        for (k, want) in expect {
            let got = gnk_bruteforce(n, k).map_err(|e| format!("g({n},{k}): {e}"))?;
            ensure(got == want, || format!("g({n},{k}) = {got}, want {want}"))?;
            cells.push((n, k, got));
        }
    }
    let spot = |n, k| cells.iter().find(|c| c.0 == n && c.1 == k).map(|c| c.2);
    ensure(spot(9, 4) == Some(15) && spot(9, 5) == Some(13), || "spot values".into())?;
    Ok(format!("{} table cells, g(9,4)=15, g(9,5)=13", cells.len()))
}

fn random_seq(rng: &mut ChaCha8Rng, n: usize, len: usize) -> ZnSeq {
    ZnSeq::from_terms(n, (0..len).map(|_| rng.gen_range(0..n as i64))).unwrap()
}

fn random_map(rng: &mut ChaCha8Rng, n: usize) -> AffineMap {
    let us = units(n);
    let a = us[rng.gen_range(0..us.len())];
    AffineMap::new(a as i64, rng.gen_range(0..n as i64), n).unwrap()
}

/// Every (length, sum) pair reached by an index subset, as bitmasks per length.
fn naive_sums(s: &ZnSeq) -> Vec<u32> {
    let n = s.modulus();
    let terms: Vec<usize> = s.terms().collect();
    let mut reach = vec![0u32; terms.len() + 1];
    let mut sums = vec![0usize; 1 << terms.len()];
    reach[0] = 1;
    for mask in 1usize..1 << terms.len() {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = (sums[mask & (mask - 1)] + terms[low]) % n;
        reach[mask.count_ones() as usize] |= 1 << sums[mask];
    }
    reach
}

fn ac8_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut suite = 0;

    for _ in 0..RANDOM_CASES {
        let l = rng.gen_range(1..=16);
        let terms: Vec<usize> = loop {
            let t: Vec<usize> =
                (0..l).map(|_| if rng.gen_bool(0.6) { 1 } else { rng.gen_range(2..=5) }).collect();
            if 2 * l > t.iter().sum() {
                break t;
            }
        };
        let table = SumLenTable::build(&terms).map_err(|e| e.to_string())?;
        let floor = 2 * l - table.total();
        ensure(table.ones() >= floor, || format!("{terms:?}: {} ones < {floor}", table.ones()))?;
        for x in floor..=table.total() {
            ensure(table.query(x, floor), || format!("{terms:?}: {x} not reached with {floor} terms"))?;
        }
    }
    suite += 1;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    for _ in 0..RANDOM_CASES {
        let n = rng.gen_range(2..=8);
        let raw = { let len = rng.gen_range(0..=2 * n + 4); random_seq(&mut rng, n, len) };
        let (top, _) = raw.mults().iter().enumerate().fold((0, 0), |best, (r, &m)| {
            if m > best.1 { (r, m) } else { best }
        });
        let s = raw.apply_affine(&AffineMap::translation(-(top as i64), n)).unwrap();
        let ok = engine::gao_property_holds(&s).map_err(|e| format!("{s}: {e}"))?;
        ensure(ok, || format!("{s}: some long sum has no length-n partner"))?;
    }
    suite += 1;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    for _ in 0..RANDOM_CASES {
        let n = rng.gen_range(2..=12);
        let s = { let len = rng.gen_range(0..=2 * n); random_seq(&mut rng, n, len) };
        let m = random_map(&mut rng, n);
        let t = s.apply_affine(&m).unwrap();
        ensure(engine::is_n_zero_free(&s) == engine::is_n_zero_free(&t), || {
            format!("{s} vs {t} under {m}")
        })?;
        let u = s.scaled(m.a());
        ensure(engine::is_zero_free(&s) == engine::is_zero_free(&u), || {
            format!("{s} vs {u}: zero-freeness changed under scaling")
        })?;
        for len in 0..=s.len().min(n + 2) {
            let a = engine::has_zero_sum_of_length(&s, len).unwrap().is_some();
            let b = engine::has_zero_sum_of_length(&u, len).unwrap().is_some();
            ensure(a == b, || format!("{s} vs {u}: length {len}"))?;
        }
    }
    suite += 1;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0004);
    for _ in 0..RANDOM_CASES {
        let n = rng.gen_range(1..=12);
        let s = { let len = rng.gen_range(0..=2 * n); random_seq(&mut rng, n, len) };
        let (c, map) = s.canonical_similitude();
        ensure(s.apply_affine(&map).unwrap() == c, || format!("{s}: map {map} misses {c}"))?;
        ensure(c.canonical_similitude().0 == c, || format!("{s}: {c} not a fixed point"))?;
        ensure(c.is_canonical(), || format!("{c} not flagged canonical"))?;
        let t = s.apply_affine(&random_map(&mut rng, n)).unwrap();
        ensure(t.canonical_similitude().0 == c, || format!("{s} and {t} disagree"))?;
        ensure(s.is_similar_to(&t), || format!("{s} vs {t}"))?;
    }
    suite += 1;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    for _ in 0..RANDOM_CASES {
        let n = rng.gen_range(1..=8);
        let s = { let len = rng.gen_range(0..=18); random_seq(&mut rng, n, len) };
        let naive = naive_sums(&s);
        let dp = SumsByLength::new(&s);
        for (len, &mask) in naive.iter().enumerate() {
            for r in 0..n {
                let want = mask >> r & 1 == 1;
                ensure(dp.contains(len, r) == want, || format!("{s}: length {len} sum {r}"))?;
            }
            let w = engine::has_zero_sum_of_length(&s, len).unwrap();
            ensure(w.is_some() == (mask & 1 == 1), || format!("{s}: zero sum length {len}"))?;
            if let Some(w) = w {
                let sub = &w.subsequence;
                ensure(sub.len() == len && sub.sum_mod() == 0 && sub.is_subsequence_of(&s), || {
                    format!("{s}: bad witness {sub}")
                })?;
            }
        }
        let zf = naive.iter().skip(1).all(|&m| m & 1 == 0);
        ensure(engine::is_zero_free(&s) == zf, || format!("{s}: zero-free"))?;
        let nzf = naive.get(n).is_none_or(|&m| m & 1 == 0);
        ensure(engine::is_n_zero_free(&s) == nzf, || format!("{s}: n-zero-free"))?;
    }
    suite += 1;

    Ok(format!("{suite} suites x {RANDOM_CASES} cases"))
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_zslab"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.code() == Some(0), || {
        format!("{args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr))
    })?;
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn untimed(json: &str) -> String {
    json.lines()
        .filter(|l| !l.trim_start().starts_with("\"elapsed_ms\""))
        .collect::<Vec<_>>()
        .join("\n")
}

fn ac9_sharding() -> Outcome {
    let base = ["verify", "characterization", "--n", "8", "--format", "json"];
    let one = run_cli(&[&base[..], &["--shards", "1"]].concat())?;
    let four = run_cli(&[&base[..], &["--shards", "4"]].concat())?;
    let four_serial = run_cli(&[&base[..], &["--shards", "4", "--jobs", "1"]].concat())?;
    ensure(one.contains("\"elapsed_ms\""), || "report lacks a timing field".into())?;
    ensure(untimed(&one) == untimed(&four), || "1 vs 4 shards differ".into())?;
    ensure(untimed(&four) == untimed(&four_serial), || "4 shards differ by job count".into())?;
    Ok(format!("{} bytes identical across 1 and 4 shards", untimed(&one).len()))
}

fn main() {
    let criteria: [(&str, &str, fn() -> Outcome); 9] = [
        ("AC1", "no n-zero-free class at length 2n-1", ac1_egz),
        ("AC2", "n-zero-free iff separable; constructive split valid", ac2_characterization),
        ("AC3", "boundary class is n-zero-free and not separable", ac3_boundary),
        ("AC4", "exact minimum of the top multiplicity", ac4_min_top1),
        ("AC5", "exact minimum of the top two multiplicities", ac5_min_top2sum),
        ("AC6", "class structure at lengths 2n-2 and 2n-3", ac6_structure),
        ("AC7", "g(n,k) table against brute force", ac7_gnk),
        ("AC8", "randomized property suites", ac8_properties),
        ("AC9", "sharded reports are byte-identical", ac9_sharding),
    ];
    let mut failed = 0;
    for (id, title, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("{id} PASS  {title}  [{detail}]  ({secs:.1}s)"),
            Err(reason) => {
                failed += 1;
                println!("{id} FAIL  {title}  [{reason}]  ({secs:.1}s)");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
