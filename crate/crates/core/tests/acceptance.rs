//! The twelve acceptance criteria, each printed as one pass/fail line.
//!
//! Run with `cargo test -p boxing-core --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use boxing_core::cascade::AuditReport;
use boxing_core::content::{cover_ball_dyadic, hc_dyadic, hc_dyadic_bruteforce, ContentParams};
use boxing_core::cover::{build_collar_cover, build_qp_cover, choose_epsilon, CalibratedConstants, EpsilonMode};
use boxing_core::dyadic::{DyadicScalar, LinfBall, VoxelSet};
use boxing_core::experiment::{
    ball_configuration, boxing_ratio, connected_domain, point_clusters, random_cells, rng, run_pipeline,
    run_selection, two_scale_cells, PipelineReport, PipelineSpec, SelectionSpec,
};
use boxing_core::goodballs::{constants_at, constants_table, finite_dim_reduce};
use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn grid8() -> Vec<Vec<i64>> {
    (0..64).map(|k| vec![k % 8, k / 8]).collect()
}

fn oracle_equivalence() -> Outcome {
    let ms = [0.5, 1.0, 1.5, 2.0];
    let all = grid8();
    let mut sets = Vec::new();
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            sets.push(vec![all[i].clone(), all[j].clone()]);
        }
    }
    let mut r = rng(101);
    for _ in 0..200 {
        let k = r.gen_range(1..=6);
        sets.push(all.choose_multiple(&mut r, k).cloned().collect());
    }
    let bad: usize = sets
        .par_iter()
        .map(|cells| {
            let x = VoxelSet::new(2, 0, cells.clone()).unwrap();
            ms.iter()
                .filter(|&&m| {
                    let p = ContentParams::new(m, 2).unwrap();
                    let dp = hc_dyadic(&x, &p).value;
                    let bf = hc_dyadic_bruteforce(&x, &p, 4).unwrap();
                    !rel_eq(dp, bf, 1e-12)
                })
                .count()
        })
        .sum();
    ok(bad == 0, format!("{} sets x {} exponents, {bad} mismatches", sets.len(), ms.len()))
}

fn ball_cover() -> Outcome {
    let mut r = rng(202);
    let mut worst_count = 0usize;
    let mut bad = 0;
    for t in 0..1000 {
        let n = 1 + t % 3;
        let center: Vec<DyadicScalar> = (0..n).map(|_| DyadicScalar::new(r.gen_range(-256..=256), -4)).collect();
        let radius = DyadicScalar::new(r.gen_range(1..=256), -4);
        let ball = LinfBall::new(center, radius);
        let cubes = cover_ball_dyadic(&ball).unwrap();
        worst_count = worst_count.max(cubes.len());
        let s = ball.diameter().to_f64();
        let sizes_ok = cubes.iter().all(|c| c.size().to_f64() <= 2.0 * s);
        let disjoint = cubes
            .iter()
            .enumerate()
            .all(|(i, a)| cubes[i + 1..].iter().all(|b| a.interiors_disjoint(b)));
        // dyadic coordinates with small numerators: these products are exact
        let covered: f64 = cubes
            .iter()
            .map(|c| {
                (0..n)
                    .map(|i| {
                        let (lo, hi) = (c.lower_corner()[i].to_f64(), c.lower_corner()[i].to_f64() + c.size().to_f64());
                        (hi.min(ball.hi(i).to_f64()) - lo.max(ball.lo(i).to_f64())).max(0.0)
                    })
                    .product::<f64>()
            })
            .sum();
        let volume = s.powi(n as i32);
        if cubes.len() > 4usize.pow(n as u32) || !sizes_ok || !disjoint || covered != volume {
            bad += 1;
        }
    }
    ok(bad == 0, format!("1000 balls, max {worst_count} cubes, {bad} failures"))
}

fn random_set(r: &mut impl Rng, n: usize, side: i64, max_cells: usize) -> VoxelSet {
    let k = r.gen_range(1..=max_cells);
    let cells: Vec<Vec<i64>> = (0..k).map(|_| (0..n).map(|_| r.gen_range(0..side)).collect()).collect();
    VoxelSet::new(n, 0, cells).unwrap()
}

fn content_properties() -> Outcome {
    let mut r = rng(303);
    let (mut mono, mut sub, mut scale, mut power) = (0, 0, 0, 0);
    let ms = [0.5, 1.0, 1.5, 2.0, 2.5, 3.0];
    for _ in 0..500 {
        let n = r.gen_range(1..=3);
        let side = [64, 16, 8][n - 1];
        let m = *ms[..(2 * n)].choose(&mut r).unwrap();
        let p = ContentParams::new(m, n).unwrap();
        let a = random_set(&mut r, n, side, 20);
        let b = random_set(&mut r, n, side, 20);
        let ab = a.union(&b).unwrap();
        let (ha, hb, hab) = (hc_dyadic(&a, &p).value, hc_dyadic(&b, &p).value, hc_dyadic(&ab, &p).value);
        if hab < ha * (1.0 - 1e-12) || hab < hb * (1.0 - 1e-12) {
            mono += 1;
        }
        if hab > (ha + hb) * (1.0 + 1e-12) {
            sub += 1;
        }
        let k = r.gen_range(-3..=3);
        let scaled = hc_dyadic(&a.scaled(k), &p).value;
        let refined = hc_dyadic(&a.refined(-2), &p).value;
        if !rel_eq(scaled, 2f64.powf(k as f64 * m) * ha, 1e-12) || !rel_eq(refined, ha, 1e-12) {
            scale += 1;
        }
        let mut prev = f64::INFINITY;
        for t in [0.5, 1.0, 1.5, 2.0, 2.5, 3.0] {
            if t > n as f64 {
                break;
            }
            let v = hc_dyadic(&a, &ContentParams::new(t, n).unwrap()).value.powf(1.0 / t);
            if v > prev * (1.0 + 1e-12) {
                power += 1;
            }
            prev = v;
        }
    }
    let total = mono + sub + scale + power;
    ok(
        total == 0,
        format!("500 cases: monotone {mono}, subadditive {sub}, scaling {scale}, root-decreasing {power} violations"),
    )
}

/// Mixed generators on 16² and 8³: sparse, medium and two-scale.
fn cover_inputs(count2: usize, count3: usize, seed: u64) -> Vec<(f64, VoxelSet)> {
    let mut out = Vec::new();
    for i in 0..count2 as u64 {
        let x = match i % 4 {
            0 => two_scale_cells(2, 16, seed + i),
            k => random_cells(2, 16, [0.0, 0.03, 0.08, 0.25][k as usize], seed + i),
        };
        out.push((1.5, x.unwrap()));
    }
    for i in 0..count3 as u64 {
        let x = match i % 3 {
            0 => two_scale_cells(3, 8, seed + i),
            k => random_cells(3, 8, [0.0, 0.03, 0.15][k as usize], seed + i),
        };
        out.push((2.0, x.unwrap()));
    }
    out
}

/// A dense block with a few far cells, so that collar separation is exercised.
fn spread_inputs(count: usize, seed: u64) -> Vec<(f64, VoxelSet)> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let side = r.gen_range(4..=8);
            let mut cells: Vec<Vec<i64>> = (0..side * side).map(|k| vec![k % side, k / side]).collect();
            for _ in 0..r.gen_range(1..=4) {
                cells.push(vec![r.gen_range(20..200), r.gen_range(0..200)]);
            }
            (1.5, VoxelSet::new(2, 0, cells).unwrap())
        })
        .collect()
}

struct CoverStats {
    chain_violations: usize,
    collar_violations: usize,
    pairs: usize,
    runs: usize,
}

fn cover_runs() -> CoverStats {
    let mut inputs = cover_inputs(50, 50, 4000);
    inputs.extend(spread_inputs(20, 4500));
    let stats: Vec<(bool, bool, usize)> = inputs
        .par_iter()
        .map(|(m, x)| {
            let p = ContentParams::new(*m, x.n()).unwrap();
            let eps = choose_epsilon(x.n(), *m, EpsilonMode::Practical, &CalibratedConstants::default()).unwrap();
            assert_eq!(eps.epsilon, 0.3);
            let (qp, qpp, chain) = build_qp_cover(x, &eps, &p).unwrap();
            let (_, checks) = build_collar_cover(&qp, &qpp, x, &eps, &p).unwrap();
            (chain.holds, checks.all_hold(), checks.separation_pairs_checked)
        })
        .collect();
    CoverStats {
        chain_violations: stats.iter().filter(|s| !s.0).count(),
        collar_violations: stats.iter().filter(|s| !s.1).count(),
        pairs: stats.iter().map(|s| s.2).sum(),
        runs: stats.len(),
    }
}

fn cascade_runs() -> Vec<PipelineReport<f64>> {
    let inputs = cover_inputs(50, 20, 6000);
    inputs
        .par_iter()
        .enumerate()
        .map(|(i, (m, x))| {
            let mut spec = PipelineSpec::new(*m);
            spec.cascade.seed = i as u64;
            run_pipeline(x, &spec).unwrap()
        })
        .collect()
}

fn cascade_suite(reports: &[PipelineReport<f64>]) -> Outcome {
    let within_budget = reports.iter().filter(|r| r.cascade.steps <= r.cascade.budget).count();
    let on_traces = reports.iter().filter(|r| r.cascade.all_on_traces).count();
    let displacement = reports.iter().filter(|r| r.cascade.trajectory_bound_holds).count();
    let monotone = reports.iter().filter(|r| r.cascade.monotonicity_violations == 0).count();
    let steps: usize = reports.iter().map(|r| r.cascade.steps).sum();
    let worst = reports
        .iter()
        .map(|r| r.cascade.max_trajectory_length / r.cascade.trajectory_bound)
        .fold(0.0, f64::max);
    let n = reports.len();
    ok(
        [within_budget, on_traces, displacement, monotone].iter().all(|&c| c == n),
        format!(
            "{n} runs, {steps} steps; budget {within_budget}/{n}, on traces {on_traces}/{n}, displacement {displacement}/{n} (worst ratio {worst:.3}), monotone {monotone}/{n}"
        ),
    )
}

fn admissible_sets(reports: &[PipelineReport<f64>]) -> Outcome {
    let faces: usize = reports.iter().map(|r| r.admissible.faces).sum();
    let failures: usize = reports
        .iter()
        .map(|r| r.admissible.size_failures + r.admissible.distance_failures)
        .sum();
    let c_adm = reports.iter().map(|r| r.admissible.c_adm_max).max().unwrap_or(0);
    let dist = reports.iter().map(|r| r.admissible.largest_distance_ratio).fold(0.0, f64::max);
    ok(
        failures == 0 && c_adm > 0,
        format!("{faces} faces, {failures} failures, observed C_adm = {c_adm}, largest distance ratio {dist:.3}"),
    )
}

fn density_audit(reports: &[PipelineReport<f64>]) -> Outcome {
    let audits: Vec<&AuditReport> = reports.iter().map(|r| &r.audit).collect();
    let growth: usize = audits.iter().map(|a| a.count("growth")).sum();
    let count: usize = audits.iter().map(|a| a.count("change_count")).sum();
    let outside: usize = audits.iter().map(|a| a.count("change_outside_admissible_set")).sum();
    let final_density: usize = audits.iter().map(|a| a.count("final_density")).sum();
    let max_growth = audits.iter().map(|a| a.max_growth).fold(0.0, f64::max);
    let faces: usize = audits.iter().map(|a| a.faces_audited).sum();
    ok(
        growth == 0 && count == 0,
        format!(
            "{faces} faces audited; growth {growth}, change count {count} violations (max growth {max_growth:.3}); also outside-set {outside}, final density {final_density}"
        ),
    )
}

fn selection_suite() -> Outcome {
    let mut r = rng(909);
    let specs: Vec<(usize, f64, Vec<Vec<f64>>)> = (0..50)
        .map(|i| {
            let n = 2 + i % 2;
            let m = *[1.0, 1.5, 2.0, 2.5][..2 + n - 1].choose(&mut r).unwrap();
            let clusters = r.gen_range(1..=4);
            let per = r.gen_range(1..=60 / clusters).min(15);
            let spread = r.gen_range(2..=8);
            (n, m, point_clusters(n, clusters, per, spread, 20_000, 9000 + i as u64).unwrap())
        })
        .collect();
    let runs: Vec<_> = specs
        .par_iter()
        .map(|(n, m, pts)| run_selection(pts.clone(), *n, &SelectionSpec::new(*m)))
        .collect();
    let mut failed = Vec::new();
    let mut selected = 0;
    let mut max_balls = 0;
    for (i, run) in runs.iter().enumerate() {
        match run {
            Ok(r) => {
                selected += r.selected.len();
                max_balls = max_balls.max(r.collection_size);
                if !r.passed() || r.collection_size > 15 || r.points > 60 {
                    failed.push(format!("#{i}"));
                }
            }
            Err(e) => failed.push(format!("#{i}: {e}")),
        }
    }
    ok(
        failed.is_empty(),
        format!(
            "50 clouds, {selected} balls selected, families up to {max_balls} balls, failures: {failed:?}"
        ),
    )
}

/// The recurrences evaluated by hand, independently of the engine.
fn oracle_constants(m: u32) -> (f64, f64) {
    let (mut c1, mut c2) = (1.0f64, 1.0f64);
    for k in 2..=m {
        let m = k as f64;
        let tail = 3.0 * c1 / (15.0 * c2).powf(1.0 / (m - 1.0));
        let n1 = 1.0 + 20.0 * m * 3f64.powf(m) * (180.0 * m * c2 + tail);
        let n2 = 1.0 + 20.0 * 3f64.powf(m) * (90.0 * m * c2 + tail).powf(m);
        c1 = n1;
        c2 = n2;
    }
    (c1, c2)
}

fn constants_check() -> Outcome {
    let (o1, o2) = oracle_constants(2);
    let row = constants_at(2.0).unwrap();
    let c1 = row.c1.unwrap();
    let c2 = row.c2.unwrap();
    let table = constants_table(6).unwrap();
    let windows = table.rows.iter().all(|r| r.window_hi.powf(r.m) < 10.0 && r.window_pow_below_10);
    let rows3 = constants_at(3.0).unwrap();
    let (o13, o23) = oracle_constants(3);
    let pass = rel_eq(c1, 129673.0, 1e-6)
        && rel_eq(c2, 5844968.2, 1e-6)
        && rel_eq(o1, 129673.0, 1e-6)
        && rel_eq(o2, 5844968.2, 1e-6)
        && rel_eq(rows3.c1.unwrap(), o13, 1e-12)
        && rel_eq(rows3.c2.unwrap(), o23, 1e-12)
        && row.a == Some(60.0)
        && windows;
    ok(
        pass,
        format!("c1(2) = {c1}, c2(2) = {c2} (oracle {o1}, {o2}), A(2) = {:?}, C2^m < 10 on {} rows", row.a, table.rows.len()),
    )
}

fn boxing_study() -> Outcome {
    let c2 = constants_at(2.0).unwrap().c2.unwrap();
    let mut r = rng(1111);
    let domains: Vec<VoxelSet> = (0..20)
        .map(|i| connected_domain(3, 8, r.gen_range(8..=400), 1100 + i).unwrap())
        .collect();
    let reports: Vec<_> = domains.par_iter().map(|d| boxing_ratio(d, &[2.0]).unwrap()).collect();
    let ratios: Vec<f64> = reports.iter().map(|b| b.rows[0].ratio).collect();
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    let pass = reports.iter().all(|b| b.all_hold()) && worst <= c2;
    let shown: Vec<String> = ratios.iter().map(|v| format!("{v:.3}")).collect();
    ok(pass, format!("20 domains, max ratio {worst:.4} vs c2(2) = {c2}; ratios [{}]", shown.join(", ")))
}

fn reduction() -> Outcome {
    let mut r = rng(1212);
    let ms = [0.5, 1.0, 1.5, 2.0, 3.0];
    let mut bad = 0;
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = 1 + i % 3;
        let (balls, pts) = ball_configuration(n, r.gen_range(1..=6), r.gen_range(1..=40), 1200 + i as u64).unwrap();
        let m = *ms.choose(&mut r).unwrap();
        let rep = finite_dim_reduce(&pts, &balls, 0.25, m).unwrap();
        worst = worst.max(rep.content_factor / 2f64.powf(m));
        if !(rep.images_in_double && rep.segments_in_double && rep.content_holds && rep.content_factor <= 2f64.powf(m) * (1.0 + 1e-12)) {
            bad += 1;
        }
    }
    ok(bad == 0, format!("100 configurations, {bad} failures, content factor / 2^m at most {worst:.6}"))
}

fn timed(name: &str, limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let out = f();
    let elapsed = t.elapsed();
    let in_time = limit.is_none_or(|l| elapsed <= l);
    let pass = out.pass && in_time;
    let budget = limit.map(|l| format!(" / {} s", l.as_secs())).unwrap_or_default();
    println!(
        "[{}] {name} ({:.2} s{budget}): {}",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        out.detail
    );
    pass
}

#[test]
fn acceptance_criteria() {
    let secs = Duration::from_secs;
    let mut results = Vec::new();
    results.push(timed("1 oracle equivalence", Some(secs(60)), oracle_equivalence));
    results.push(timed("2 ball cover by dyadic cubes", Some(secs(10)), ball_cover));
    results.push(timed("3 content properties", Some(secs(60)), content_properties));
    let t = Instant::now();
    let covers = cover_runs();
    let cover_time = t.elapsed();
    results.push(timed("4 cover-size chain", None, || {
        ok(
            covers.chain_violations == 0,
            format!("{} inputs at eps = 0.3, {} violations ({:.2} s)", covers.runs, covers.chain_violations, cover_time.as_secs_f64()),
        )
    }));
    results.push(timed("5 collar properties", None, || {
        ok(
            covers.collar_violations == 0,
            format!(
                "{} covers, {} violations, {} separation pairs checked",
                covers.runs, covers.collar_violations, covers.pairs
            ),
        )
    }));
    let t = Instant::now();
    let reports = cascade_runs();
    let cascade_time = t.elapsed();
    results.push(timed("6 cascade suite", Some(secs(600)), || {
        let mut o = cascade_suite(&reports);
        o.pass &= cascade_time <= secs(600);
        o.detail = format!("{} in {:.2} s", o.detail, cascade_time.as_secs_f64());
        o
    }));
    results.push(timed("7 admissible sets", None, || admissible_sets(&reports)));
    results.push(timed("8 density-evolution audit", None, || density_audit(&reports)));
    results.push(timed("9 good-ball selection suite", Some(secs(300)), selection_suite));
    results.push(timed("10 constants", None, constants_check));
    results.push(timed("11 boxing-ratio study", Some(secs(120)), boxing_study));
    results.push(timed("12 finite-dimensional reduction", None, reduction));
    let passed = results.iter().filter(|p| **p).count();
    println!("{passed}/{} criteria passed", results.len());
    assert_eq!(passed, results.len());
}
