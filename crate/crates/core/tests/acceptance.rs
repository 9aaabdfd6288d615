//! Acceptance criteria 1 to 9, one line each.

use std::collections::VecDeque;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use coarselab::cobounded::{check_witness, parity_decomposition, quotient_decomposition};
use coarselab::embeddings::{
    ad_map, random_isometry, reconstruct_isometry, verify_spatial, EmbeddingTable,
};
use coarselab::maps::{
    closeness_transfer, cococoarse_witness_with, composition_constant, folding, halving,
    injective_quotient_m_bound, n_to_1_witness, projection, quotient_certificate, reflection,
    shift, strip_projection, Interior, PointMap,
};
use coarselab::operators::{
    operator_norm, random_band, random_rational_band, BandOperator, ComplexQ,
};
use coarselab::spaces::{build_graph_space, naturals_window, Dist, PointId};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bfs_distances(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<u64>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    (0..n)
        .map(|s| {
            let mut d = vec![u64::MAX; n];
            d[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                for &w in &adj[v] {
                    if d[w] == u64::MAX {
                        d[w] = d[v] + 1;
                        q.push_back(w);
                    }
                }
            }
            d
        })
        .collect()
}

fn random_edges(n: usize, extra: usize, rng: &mut ChaCha8Rng) -> Vec<(usize, usize)> {
    let mut edges: Vec<(usize, usize)> = (1..n).map(|i| (rng.random_range(0..i), i)).collect();
    for _ in 0..extra {
        edges.push((rng.random_range(0..n), rng.random_range(0..n)));
    }
    edges
}

/// Least number of colors for the graph joining points at distance below `k`, by subset DP.
fn chromatic_number(d: &[Vec<u64>], k: u64) -> usize {
    let n = d.len();
    let full = (1usize << n) - 1;
    let independent: Vec<bool> = (0..=full)
        .map(|m| {
            (0..n).all(|a| m >> a & 1 == 0 || (a + 1..n).all(|b| m >> b & 1 == 0 || d[a][b] >= k))
        })
        .collect();
    let mut colors = vec![usize::MAX; full + 1];
    colors[0] = 0;
    for m in 1..=full {
        let low = m & m.wrapping_neg();
        let rest = m ^ low;
        // Subsets of `m` containing its lowest point.
        let mut sub = rest;
        loop {
            let s = sub | low;
            if independent[s] && colors[m ^ s] != usize::MAX {
                colors[m] = colors[m].min(colors[m ^ s] + 1);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    colors[full]
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (mut small, mut elapsed) = (0, 0.0);
    for i in 0..50 {
        let n = if i < 15 {
            rng.random_range(4..=12)
        } else {
            rng.random_range(13..=500)
        };
        let edges = random_edges(n, rng.random_range(0..=n / 2), &mut rng);
        let start = Instant::now();
        let space = build_graph_space(n, &edges).map_err(|e| e.to_string())?;
        elapsed += start.elapsed().as_secs_f64();
        let d = bfs_distances(n, &edges);
        for k in [2u64, 3, 5] {
            let start = Instant::now();
            let p = space.separated_partition(k);
            elapsed += start.elapsed().as_secs_f64();
            let mut seen = vec![0usize; n];
            for class in &p.classes {
                for (a, &x) in class.iter().enumerate() {
                    seen[x.0] += 1;
                    for &y in &class[a + 1..] {
                        ensure(d[x.0][y.0] >= k, || {
                            format!("graph {i} K={k}: {x} and {y} share a class")
                        })?;
                    }
                }
            }
            ensure(seen.iter().all(|&c| c == 1), || {
                format!("graph {i} K={k}: not a partition")
            })?;
            let bound = (0..n)
                .map(|x| d[x].iter().filter(|&&v| v < k).count())
                .max()
                .unwrap();
            ensure(p.class_count() <= bound, || {
                format!(
                    "graph {i} K={k}: {} classes > bound {bound}",
                    p.class_count()
                )
            })?;
            if n <= 12 {
                let chi = chromatic_number(&d, k);
                ensure(chromatic_number(&d, u64::MAX) == n && chi >= 1, || {
                    format!("graph {i}: chromatic oracle is off")
                })?;
                ensure(p.class_count() >= chi, || {
                    format!("graph {i} K={k}: fewer classes than chromatic number")
                })?;
                small += 1;
            }
        }
    }
    ensure(elapsed < 10.0, || format!("took {elapsed:.2}s"))?;
    Ok(format!(
        "150 partitions valid, {small} checked against the chromatic oracle, {elapsed:.2}s building and partitioning"
    ))
}

fn composable_pair(kind: usize, rng: &mut ChaCha8Rng) -> coarselab::Result<(PointMap, PointMap)> {
    Ok(match kind {
        0 => {
            let m = rng.random_range(20..=99);
            (reflection(-m, m)?, folding(2 * m as usize + 1)?)
        }
        1 => {
            let (lo, len, t) = (
                rng.random_range(-50..=0),
                rng.random_range(40..=150),
                rng.random_range(-20..=20),
            );
            (shift(lo, lo + len, t)?, halving(lo + t, lo + len + t)?)
        }
        2 => {
            let (lo, len, t) = (
                rng.random_range(-30..=0),
                rng.random_range(30..=60),
                rng.random_range(-9..=9),
            );
            (strip_projection(lo, lo + len, 3)?, shift(lo, lo + len, t)?)
        }
        3 => {
            let (lo, len) = (rng.random_range(-40..=0), rng.random_range(30..=90));
            (
                strip_projection(lo, lo + len, 2)?,
                reflection(lo, lo + len)?,
            )
        }
        _ => {
            let m = rng.random_range(12..=49);
            (halving(-2 * m, 2 * m + 1)?, folding(2 * m as usize + 1)?)
        }
    })
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let scales = [1, 2, 4];
    for i in 0..20 {
        let (f, g) = composable_pair(i % 5, &mut rng).map_err(|e| e.to_string())?;
        ensure(f.domain().len() <= 200 && g.domain().len() <= 200, || {
            format!("pair {i} too large")
        })?;
        let (k_f, k_g) = (rng.random_range(1..=2), rng.random_range(1..=2));
        for (name, h, k) in [("f", &f, k_f), ("g", &g, k_g)] {
            let c = quotient_certificate(h, k, &scales).map_err(|e| e.to_string())?;
            ensure(c.passed(), || format!("pair {i}: {name} is not certified"))?;
        }
        let r = composition_constant(k_f, k_g, &f, &g, &scales).map_err(|e| e.to_string())?;
        let l = k_g + g.modulus(k_f);
        ensure(r.l == l && r.certificate.k == l, || {
            format!("pair {i}: L={} expected {l}", r.l)
        })?;
        ensure(r.passed(), || {
            format!(
                "pair {i}: composition fails at L={l}: {:?}",
                r.certificate.first_failure()
            )
        })?;
    }
    Ok("20 composed pairs pass at L = K_g + modulus(g, K_f)".into())
}

/// Moves each value of `f` by at most `m` along the first coordinate, staying in the window.
fn nudge(f: &PointMap, m: i64, rng: &mut ChaCha8Rng) -> PointMap {
    let cod = f.codomain().clone();
    let values = f
        .values()
        .iter()
        .map(|&y| {
            let mut c = cod.coords(y).unwrap().to_vec();
            let base = c[0];
            for _ in 0..8 {
                c[0] = base + rng.random_range(-m..=m);
                if let Some(p) = cod.point_at(&c) {
                    return p;
                }
            }
            y
        })
        .collect();
    PointMap::new(f.domain().clone(), cod, values).unwrap()
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let scales = [1, 2, 4];
    let mut witnesses = 0;
    for i in 0..20 {
        let f = match i % 4 {
            0 => folding(rng.random_range(60..=120)),
            1 => halving(-60, rng.random_range(40..=80)),
            2 => strip_projection(-25, rng.random_range(20..=40), 2),
            _ => projection(2, 1, 16),
        }
        .map_err(|e| e.to_string())?;
        let g = nudge(&f, rng.random_range(1..=2), &mut rng);
        let m = f.closeness(&g).map_err(|e| e.to_string())?;
        let k = 1;
        let cert = quotient_certificate(&f, k, &scales).map_err(|e| e.to_string())?;
        ensure(cert.passed(), || format!("pair {i}: f is not certified"))?;
        let t = closeness_transfer(&f, &g, k, &scales).map_err(|e| e.to_string())?;
        ensure(t.holds(), || {
            format!("pair {i}: transfer to K+m={} fails: {:?}", k + m, t.scales)
        })?;
        let s = 2;
        // The projection has whole columns as fibers, so it is not finite-to-one.
        let finite_to_one = i % 4 != 3;
        if let Some(w) = n_to_1_witness(&f, s + 2 * m, 8) {
            let moved = w
                .transfer(&f, &g, s)
                .map_err(|e| format!("pair {i}: {e}"))?;
            moved.validate(&g).map_err(|e| format!("pair {i}: {e}"))?;
            witnesses += 1;
        } else {
            ensure(!finite_to_one, || {
                format!("pair {i}: no n-to-1 witness for a finite-to-one map")
            })?;
        }
    }
    Ok(format!(
        "20 certificate transfers and {witnesses} n-to-1 transfers hold"
    ))
}

/// Least `δ` covering `B(f(x), eps)` by the `K`-neighborhood of `f(B(x, δ))` at every interior point.
fn brute_delta(f: &PointMap, k: Dist, eps: Dist, interior: &[PointId]) -> Option<Dist> {
    let (dom, cod) = (f.domain(), f.codomain());
    (0..=dom.diameter()).find(|&delta| {
        interior.iter().all(|&x| {
            cod.points()
                .filter(|&y| cod.dist(f.apply(x), y) <= eps)
                .all(|y| {
                    dom.points()
                        .any(|z| dom.dist(x, z) <= delta && cod.dist(f.apply(z), y) <= k)
                })
        })
    })
}

fn criterion_4() -> Outcome {
    let f = folding(40).map_err(|e| e.to_string())?;
    let scales = [1, 2, 4];
    let cert = quotient_certificate(&f, 1, &scales).map_err(|e| e.to_string())?;
    ensure(cert.passed(), || "folding certificate fails".into())?;
    // Interior: images at least max eps + K + 1 = 6 away from the cut at 40.
    let interior: Vec<PointId> = f.domain().points().filter(|&x| f.apply(x).0 < 34).collect();
    ensure(cert.interior == interior, || {
        "interior differs from the oracle".into()
    })?;
    let deltas: Vec<Option<Dist>> = scales.iter().map(|&e| cert.delta(e)).collect();
    let oracle: Vec<Option<Dist>> = scales
        .iter()
        .map(|&e| brute_delta(&f, 1, e, &interior))
        .collect();
    ensure(deltas == oracle, || {
        format!("deltas {deltas:?} but oracle {oracle:?}")
    })?;
    ensure(deltas == [Some(0), Some(1), Some(2)], || {
        format!("deltas {deltas:?} moved from the fixture")
    })?;

    let w = n_to_1_witness(&f, 4, 8).ok_or("no n-to-1 witness")?;
    ensure(w.n == 2, || format!("n = {}", w.n))?;
    let dom = f.domain();
    for ball in &w.balls {
        let pre: Vec<PointId> = dom
            .points()
            .filter(|&x| f.codomain().dist(f.apply(x), ball.center) <= 4)
            .collect();
        let mut covered: Vec<PointId> = ball.pieces.concat();
        covered.sort();
        ensure(covered == pre, || {
            format!("pieces at {} miss the preimage", ball.center)
        })?;
        for piece in &ball.pieces {
            for &a in piece {
                for &b in piece {
                    ensure(dom.dist(a, b) <= w.r, || {
                        format!("piece at {} wider than r", ball.center)
                    })?;
                }
            }
        }
    }
    ensure(n_to_1_witness(&f, 4, 1).is_none(), || {
        "folding is not 1-to-1 at s=4".into()
    })?;

    let mb = injective_quotient_m_bound(&f, 1, &scales).map_err(|e| e.to_string())?;
    let cod = f.codomain();
    let oracle_m = cod
        .points()
        .map(|y| cod.points().filter(|&z| cod.dist(y, z) <= 1).count())
        .max()
        .unwrap();
    ensure(mb.m == 3 && oracle_m == 3, || {
        format!("m = {}, oracle {oracle_m}", mb.m)
    })?;
    let steps = mb.scales.iter().map(|s| s.max_steps).max().unwrap_or(0);
    ensure(steps <= mb.m, || format!("greedy net reached {steps}"))?;
    Ok(format!(
        "deltas {{0,1,2}} match brute force, n=2 (r={}), m=3, largest net {steps}",
        w.r
    ))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut max_blocks = 0;
    for i in 0..30 {
        let n = rng.random_range(20..=60);
        let f = folding(n).map_err(|e| e.to_string())?;
        let r: Dist = rng.random_range(1..=3);
        let a = random_rational_band(
            f.codomain().clone(),
            r,
            rng.random_range(0.3..=1.0),
            &mut rng,
        );
        let eps = r.max(2);
        let delta = cococoarse_witness_with(&f, 1, 2 * eps, &Interior::All).ok_or("no witness")?;
        let dec = quotient_decomposition(&f, 1, delta, &a, eps)
            .map_err(|e| format!("instance {i}: {e}"))?;
        let mut sum = BandOperator::<ComplexQ>::zero(f.codomain().clone());
        let mut blocks = BandOperator::<ComplexQ>::zero(f.codomain().clone());
        for b in &dec.blocks {
            let term =
                b.d.compose(&ad_map(&f, &b.c).map_err(|e| e.to_string())?)
                    .map_err(|e| e.to_string())?;
            ensure(term == b.block, || {
                format!("instance {i}: block ({}, {}) not reproduced", b.i, b.j)
            })?;
            sum = sum.add(&term).map_err(|e| e.to_string())?;
            blocks = blocks.add(&b.block).map_err(|e| e.to_string())?;
            ensure(b.c.propagation() <= delta, || {
                format!("instance {i}: propagation(c) > δ={delta}")
            })?;
            ensure(b.d.propagation() <= 1, || {
                format!("instance {i}: propagation(d) > 1")
            })?;
        }
        ensure(sum == a && blocks == a, || {
            format!("instance {i}: reassembly is not exact")
        })?;
        let classes = dec.partition.class_count();
        ensure(dec.blocks.len() <= classes * classes, || {
            format!("instance {i}: too many blocks")
        })?;
        max_blocks = max_blocks.max(dec.blocks.len());
    }
    Ok(format!(
        "30 exact reassemblies, at most {max_blocks} blocks"
    ))
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let space = Arc::new(naturals_window(40).map_err(|e| e.to_string())?);
    let mut worst: f64 = 0.0;
    for i in 0..30 {
        let a = random_band(
            space.clone(),
            rng.random_range(1..=3),
            rng.random_range(0.3..=1.0),
            &mut rng,
        );
        let w = parity_decomposition(&a, 1e-12).map_err(|e| format!("instance {i}: {e}"))?;
        let check = check_witness(&w, 1e-12).map_err(|e| e.to_string())?;
        ensure(w.k == 1, || format!("instance {i}: k = {}", w.k))?;
        ensure(check.passed && check.residual <= 1e-12, || {
            format!(
                "instance {i}: residual {:.3e}, {:?}",
                check.residual, check.violations
            )
        })?;
        worst = worst.max(check.residual);
    }
    Ok(format!("30 parity witnesses, largest residual {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        for i in 0..10 {
            let k = rng.random_range(3..=8);
            let size = rng.random_range(k * n..=50);
            let base = Arc::new(naturals_window(k).map_err(|e| e.to_string())?);
            let cod = Arc::new(naturals_window(size).map_err(|e| e.to_string())?);
            let w = random_isometry(base, n, cod, &mut rng).map_err(|e| e.to_string())?;
            let phi = EmbeddingTable::from_isometry(&w).map_err(|e| e.to_string())?;
            let profile = phi.rank_profile().map_err(|e| e.to_string())?;
            ensure(profile.fiber() == Some(n), || {
                format!("n={n} #{i}: profile {profile:?}")
            })?;
            let x0 = PointId(rng.random_range(0..k));
            let u = reconstruct_isometry(&phi, x0, None).map_err(|e| format!("n={n} #{i}: {e}"))?;
            let v = verify_spatial(&phi, &u, 1e-12).map_err(|e| e.to_string())?;
            ensure(v.passed && v.residual <= 1e-12, || {
                format!("n={n} #{i}: residual {:.3e}", v.residual)
            })?;
            worst = worst.max(v.residual);
        }
    }
    Ok(format!("30 round trips, largest residual {worst:.1e}"))
}

fn random_injection(rng: &mut ChaCha8Rng) -> PointMap {
    let a = rng.random_range(4..=12);
    let b = rng.random_range(a..=2 * a + 5);
    let mut targets: Vec<usize> = (0..b).collect();
    targets.shuffle(rng);
    PointMap::new(
        Arc::new(naturals_window(a).unwrap()),
        Arc::new(naturals_window(b).unwrap()),
        targets[..a].iter().copied().map(PointId).collect(),
    )
    .unwrap()
}

fn dense_norm(a: &BandOperator<Complex64>) -> f64 {
    let m: DMatrix<Complex64> = a.to_dense();
    m.svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let e = |e: coarselab::Error| e.to_string();
    for i in 0..100 {
        let f = random_injection(&mut rng);
        let dom = f.domain().clone();
        let a = random_rational_band(dom.clone(), rng.random_range(0..=3), 0.6, &mut rng);
        let b = random_rational_band(dom.clone(), rng.random_range(0..=3), 0.6, &mut rng);
        let ad = |x: &BandOperator<ComplexQ>| ad_map(&f, x);
        for (x, y, v) in a.entries() {
            ensure(ad(&a).map_err(e)?.get(f.apply(x), f.apply(y)) == *v, || {
                format!("pair {i}: entry moved")
            })?;
        }
        ensure(ad(&a).map_err(e)?.nnz() == a.nnz(), || {
            format!("pair {i}: support grew")
        })?;
        ensure(
            ad(&a.add(&b).map_err(e)?).map_err(e)?
                == ad(&a).map_err(e)?.add(&ad(&b).map_err(e)?).map_err(e)?,
            || format!("pair {i}: not additive"),
        )?;
        ensure(
            ad(&a.compose(&b).map_err(e)?).map_err(e)?
                == ad(&a).map_err(e)?.compose(&ad(&b).map_err(e)?).map_err(e)?,
            || format!("pair {i}: not multiplicative"),
        )?;
        ensure(
            ad(&a.adjoint()).map_err(e)? == ad(&a).map_err(e)?.adjoint(),
            || format!("pair {i}: not *-preserving"),
        )?;
        let p = ad(&a).map_err(e)?.propagation();
        ensure(p <= f.modulus(a.propagation()), || {
            format!("pair {i}: propagation {p} above modulus")
        })?;
    }
    let tol = 1e-9;
    for i in 0..100 {
        let n = rng.random_range(2..=32);
        let space = Arc::new(naturals_window(n).map_err(e)?);
        let a = random_band(space, rng.random_range(0..=3), 0.7, &mut rng);
        let s = dense_norm(&a);
        let na = operator_norm(&a, tol).map_err(e)?;
        let nstar = operator_norm(&a.adjoint().compose(&a).map_err(e)?, tol).map_err(e)?;
        ensure((na - s).abs() <= 2.0 * tol * s.max(1.0), || {
            format!("op {i}: norm {na} vs dense {s}")
        })?;
        ensure(
            (nstar - s * s).abs() <= 2.0 * tol * (s * s).max(1.0),
            || format!("op {i}: |a*a| = {nstar} but |a|^2 = {}", s * s),
        )?;
    }
    Ok(
        "100 exact homomorphism pairs, propagation law holds, 100 C*-identities within 2 tol"
            .into(),
    )
}

fn criterion_9() -> Outcome {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let list =
        std::fs::read_to_string(root.join("corpus/commands.txt")).map_err(|e| e.to_string())?;
    let mut count = 0;
    for line in list
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
    {
        let args: Vec<&str> = line.split_whitespace().skip(1).collect();
        let run = || {
            Command::new(env!("CARGO_BIN_EXE_coarselab"))
                .current_dir(&root)
                .args(&args)
                .output()
                .unwrap()
        };
        let (a, b) = (run(), run());
        ensure(!a.stdout.is_empty() && a.stdout == b.stdout, || {
            format!("reports differ for {line}")
        })?;
        ensure(a.status == b.status, || {
            format!("exit codes differ for {line}")
        })?;
        count += 1;
    }
    Ok(format!(
        "{count} corpus commands byte-identical across two runs"
    ))
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut failed = 0;
    for (n, run) in criteria {
        let start = Instant::now();
        match run() {
            Ok(detail) => println!(
                "criterion {n}: PASS ({detail}) [{:.2}s]",
                start.elapsed().as_secs_f64()
            ),
            Err(why) => {
                failed += 1;
                println!("criterion {n}: FAIL ({why})");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
