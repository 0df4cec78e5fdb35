//! Acceptance suite: one pass/fail line per criterion.

mod common;

use std::process::Command;
use std::time::Instant;

use indefinite::canonical::canonical_pair_form;
use indefinite::cayley::{cayley_to_selfadjoint, cayley_to_unitary, densify_g, CayleyParams};
use indefinite::classes::{self, classify, StructureClass};
use indefinite::cli::{generate_pair, GenKind};
use indefinite::densify_jl::{densify_j, densify_l, sum_of_four, sum_of_two};
use indefinite::densify_n::densify_n;
use indefinite::generate::{self, canonical_pair, jordan_pair, random_congruence, random_synth_blocks, Pair, SynthBlock};
use indefinite::linalg;
use indefinite::matrix::{c64, jordan_block, times_i};
use indefinite::rng::{random_complex, stream};
use indefinite::spectral;
use indefinite::{ComplexMatrix, SearchConfig};
use rand::Rng;

use common::*;

struct Outcome {
    passed: usize,
    total: usize,
    failures: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            passed: 0,
            total: 0,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else if self.failures.len() < 5 {
            self.failures.push(what());
        }
    }

    fn ok(&self) -> bool {
        self.passed == self.total
    }
}

fn scaled(tol: f64, a: &ComplexMatrix) -> f64 {
    tol * (1.0 + norm2(a)).powi(2)
}

/// Jordan corpus `(J_k(lambda), +-R_k)` plus `extra` congruence-scrambled
/// variants.
fn jordan_corpus(extra: usize) -> Vec<Pair> {
    let mut out = Vec::new();
    for k in 2..=6 {
        for lambda in [0.0, 1.0, -2.0] {
            for sign in [1.0, -1.0] {
                out.push(jordan_pair(k, lambda, sign).unwrap());
            }
        }
    }
    let mut rng = stream(101);
    for i in 0..extra {
        let base = out[i % 30].clone();
        out.push(random_congruence(&mut rng, &base, 100.0, &cfg()).unwrap());
    }
    out
}

fn criterion_1() -> Outcome {
    let mut o = Outcome::new();
    let corpus = jordan_corpus(30);
    for (i, pair) in corpus.iter().enumerate() {
        let p = product(pair.b.clone());
        for (class, a) in [(StructureClass::J, pair.a.clone()), (StructureClass::L, times_i(&pair.a))] {
            for eps in [1e-1, 1e-3, 1e-6] {
                let search = SearchConfig::with_seed(i as u64);
                let r = match class {
                    StructureClass::J => densify_j(&a, &p, eps, &cfg(), &search),
                    _ => densify_l(&a, &p, eps, &cfg(), &search),
                };
                match r {
                    Ok(r) => {
                        let res = classes::class_residual(&r.perturbed, &p, class).unwrap();
                        let dist = norm2(&(&a - &r.perturbed));
                        let diag = spectral::is_diagonalizable(&r.perturbed, &cfg()).unwrap();
                        let gap = spectral::min_eig_gap(&r.perturbed).unwrap();
                        o.check(
                            dist < eps && res <= scaled(1e-8, &r.perturbed) && gap > 1e-8 && diag,
                            || format!("pair {i} {class} eps {eps}: dist {dist:.2e} res {res:.2e} gap {gap:.2e} diag {diag}"),
                        );
                    }
                    Err(e) => o.check(false, || format!("pair {i} {class} eps {eps}: {e}")),
                }
            }
        }
    }
    o
}

fn criterion_2() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = stream(202);
    let prm = CayleyParams::default();
    for i in 0..50 {
        let n = rng.gen_range(1..=8);
        let b = unitary_form(i, n);
        let p = product(b.clone());
        let a = random_selfadjoint(&mut rng, &b);
        let outcome = cayley_to_unitary(&a, &p, &prm, &cfg())
            .and_then(|u| Ok((cayley_to_selfadjoint(&u, &p, &prm, &cfg())?, u)));
        match outcome {
            Ok((back, u)) => {
                let err = norm2(&(&back - &a));
                let res_g = norm2(&(u.adjoint() * &b * &u - &b));
                let bound_g = 1e-8 * norm2(&b) * (1.0 + norm2(&u)).powi(2);
                o.check(err <= 1e-9 * (1.0 + norm2(&a)) && res_g <= bound_g, || {
                    format!("case {i}: round trip {err:.2e}, res_G {res_g:.2e}")
                });
            }
            Err(e) => o.check(false, || format!("case {i}: {e}")),
        }
    }
    o
}

fn criterion_3() -> Outcome {
    let mut o = Outcome::new();
    for i in 0..20u64 {
        let n = 2 + (i as usize % 5);
        let sign = if i % 2 == 0 { 1 } else { -1 };
        let pair = generate_pair(GenKind::UnitaryExample, n, None, sign, GenKind::JordanPair, i, &cfg()).unwrap();
        let p = product(pair.b.clone());
        for eps in [1e-1, 1e-3] {
            match densify_g(&pair.a, &p, eps, &cfg(), &SearchConfig::with_seed(i)) {
                Ok(r) => {
                    let g = &r.perturbed;
                    let res_g = norm2(&(g.adjoint() * &pair.b * g - &pair.b));
                    let bound_g = 1e-8 * norm2(&pair.b) * (1.0 + norm2(g)).powi(2);
                    let dist = norm2(&(&pair.a - g));
                    let diag = spectral::is_diagonalizable(g, &cfg()).unwrap();
                    let gap = spectral::min_eig_gap(g).unwrap();
                    o.check(dist < eps && res_g <= bound_g && diag && gap > 1e-8, || {
                        format!("example {i} eps {eps}: dist {dist:.2e} res_G {res_g:.2e} gap {gap:.2e}")
                    });
                }
                Err(e) => o.check(false, || format!("example {i} eps {eps}: {e}")),
            }
        }
    }
    o
}

fn criterion_4() -> Outcome {
    let mut o = Outcome::new();
    for i in 0..20u64 {
        let n = 2 + (i as usize % 7);
        let mut pair = generate_pair(GenKind::NormalExample, n, None, 1, GenKind::JordanPair, i, &cfg()).unwrap();
        if i == 0 {
            pair = generate::skew_variant(&pair);
        }
        let p = product(pair.b.clone());
        let defective = !spectral::is_diagonalizable(&pair.a, &cfg()).unwrap();
        for eps in [1e-1, 1e-2] {
            match densify_n(&pair.a, &p, eps, &cfg(), &SearchConfig::with_seed(i)) {
                Ok(r) => {
                    let m = &r.perturbed;
                    let m_star = adjoint(m, &pair.b);
                    let res_n = norm2(&(m * &m_star - &m_star * m));
                    let dist = norm2(&(&pair.a - m));
                    let diag = spectral::is_diagonalizable(m, &cfg()).unwrap();
                    let fit_ok = r.fit.as_ref().is_some_and(|f| f.residual <= f.bound);
                    o.check(
                        defective && dist <= eps && res_n <= scaled(1e-8, m) && diag && fit_ok,
                        || format!("example {i} eps {eps}: dist {dist:.2e} res_N {res_n:.2e} diag {diag} fit {fit_ok}"),
                    );
                }
                Err(e) => o.check(false, || format!("example {i} eps {eps}: {e}")),
            }
        }
    }
    o
}

fn criterion_5() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = stream(505);
    for i in 0..200 {
        let n = rng.gen_range(1..=8);
        let b = if i % 4 == 3 {
            // Hermitian unitary: U diag(+-1) U^H.
            let u = random_complex(&mut rng, n, n).qr().q();
            let d: Vec<_> = (0..n).map(|k| c64(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
            &u * ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)) * u.adjoint()
        } else {
            unitary_form(i, n)
        };
        let p = product(b.clone());
        let a = random_complex(&mut rng, n, n);
        let proj = classes::project_j(&a, &p).unwrap();
        // Competitors both far away and near the projection.
        let t: f64 = if i % 2 == 0 { rng.gen_range(0.0..1e-3) } else { rng.gen_range(0.0..2.0) };
        let c = &proj + random_selfadjoint(&mut rng, &b) * c64(t, 0.0);
        let lhs = norm2(&(&a - &proj));
        let rhs = norm2(&(&a - &c));
        o.check(lhs <= rhs + 1e-12, || format!("pair {i}: {lhs:.6e} > {rhs:.6e}"));
    }
    o
}

fn criterion_6() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = stream(606);
    for i in 0..30u64 {
        let n = rng.gen_range(1..=8);
        let b = if i % 4 == 3 { random_hermitian_form(&mut rng, n) } else { unitary_form(i as usize, n) };
        let p = product(b.clone());
        let search = SearchConfig::with_seed(i);

        let a = random_selfadjoint(&mut rng, &b);
        match sum_of_two(&a, &p, StructureClass::J, &cfg(), &search) {
            Ok(s) => {
                let rel = norm2(&(&s.x + &s.y - &a)) / norm2(&a);
                let parts_ok = [&s.x, &s.y].iter().all(|m| {
                    classes::is_member(m, &p, StructureClass::J, &cfg()).unwrap()
                        && spectral::min_eig_gap(m).unwrap() > 1e-8
                });
                o.check(rel <= 1e-12 && parts_ok, || format!("two-sum {i}: rel {rel:.2e} parts {parts_ok}"));
            }
            Err(e) => o.check(false, || format!("two-sum {i}: {e}")),
        }

        let a = random_complex(&mut rng, n, n);
        match sum_of_four(&a, &p, &cfg(), &search) {
            Ok(s) => {
                let rel = norm2(&(s.sum() - &a)) / norm2(&a);
                let classes = [StructureClass::J, StructureClass::J, StructureClass::L, StructureClass::L];
                let parts_ok = s.parts().iter().zip(classes).all(|(m, class)| {
                    classes::is_member(m, &p, class, &cfg()).unwrap()
                        && classes::is_member(m, &p, StructureClass::N, &cfg()).unwrap()
                        && spectral::min_eig_gap(m).unwrap() > 1e-8
                });
                o.check(rel <= 1e-12 && parts_ok, || format!("four-sum {i}: rel {rel:.2e} parts {parts_ok}"));
            }
            Err(e) => o.check(false, || format!("four-sum {i}: {e}")),
        }
    }
    o
}

fn one_regular_oracle(blocks: &[SynthBlock]) -> bool {
    let mut eigs: Vec<(i64, i64)> = Vec::new();
    for b in blocks {
        match *b {
            SynthBlock::Real { lambda, .. } => eigs.push((lambda as i64, 0)),
            SynthBlock::Pair { z, .. } => {
                eigs.push((z.re as i64, z.im as i64));
                eigs.push((z.re as i64, -z.im as i64));
            }
        }
    }
    let total = eigs.len();
    eigs.sort();
    eigs.dedup();
    eigs.len() == total
}

fn synth_corpus(count: usize, seed: u64) -> Vec<(Vec<SynthBlock>, Pair)> {
    let mut rng = stream(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=8);
            let blocks = random_synth_blocks(&mut rng, n, 3, true);
            let base = canonical_pair(&blocks).unwrap();
            let pair = random_congruence(&mut rng, &base, 100.0, &cfg()).unwrap();
            (blocks, pair)
        })
        .collect()
}

fn criterion_7() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = stream(707);
    for i in 0..100 {
        let n = rng.gen_range(1..=6);
        let a = random_complex(&mut rng, n, n);
        let lib = spectral::discriminant(&a).unwrap();
        let oracle = discriminant_by_resultant(&a);
        let rel = (lib - oracle).norm() / oracle.norm().max(f64::MIN_POSITIVE);
        o.check(rel <= 1e-8, || format!("matrix {i} (n={n}): relative difference {rel:.2e}"));
    }
    for (i, (blocks, pair)) in synth_corpus(50, 808).iter().enumerate() {
        let lib = spectral::is_one_regular(&pair.a, &cfg()).unwrap();
        o.check(lib == one_regular_oracle(blocks), || format!("synthesized pair {i}: 1-regular {lib}"));
    }
    for (i, pair) in jordan_corpus(30).iter().enumerate() {
        let lib = spectral::is_one_regular(&pair.a, &cfg()).unwrap();
        o.check(lib, || format!("Jordan pair {i}: not 1-regular"));
    }
    for n in 1..=8 {
        let id = spectral::krylov_rank(&ComplexMatrix::identity(n, n), &cfg()).unwrap();
        let jn = spectral::krylov_rank(&jordan_block(n, c64(0.0, 0.0)), &cfg()).unwrap();
        o.check(id == 1 && jn == n, || format!("n={n}: rank(I) {id}, rank(J_n(0)) {jn}"));
    }
    o
}

fn criterion_8() -> Outcome {
    let mut o = Outcome::new();
    for (i, (blocks, pair)) in synth_corpus(50, 808).iter().enumerate() {
        let p = product(pair.b.clone());
        let want_sizes: Vec<usize> = blocks
            .iter()
            .map(|b| match *b {
                SynthBlock::Real { size, .. } => size,
                SynthBlock::Pair { size, .. } => 2 * size,
            })
            .collect();
        let want_eta: Vec<i8> = blocks
            .iter()
            .filter_map(|b| match *b {
                SynthBlock::Real { eta, .. } => Some(eta),
                SynthBlock::Pair { .. } => None,
            })
            .collect();
        match canonical_pair_form(&pair.a, &p, &cfg()) {
            Ok(f) => {
                let t_inv = f.t.clone().try_inverse().unwrap();
                let sim = norm2(&(&t_inv * &pair.a * &f.t - &f.j));
                let cong = norm2(&(f.t.adjoint() * &pair.b * &f.t - &f.b_tilde));
                let cond = linalg::cond(&f.t);
                let tol = cfg().cluster_tol;
                let invariants = sim <= tol * (1.0 + norm2(&pair.a)) * cond
                    && cong <= tol * norm2(&pair.b) * cond * cond
                    && classes::res_j(&f.j, &product(f.b_tilde.clone())).unwrap() <= 1e-12;
                o.check(f.block_sizes == want_sizes && f.eta == want_eta && invariants, || {
                    format!(
                        "pair {i}: sizes {:?} vs {want_sizes:?}, eta {:?} vs {want_eta:?}, residuals {sim:.2e} {cong:.2e}",
                        f.block_sizes, f.eta
                    )
                });
            }
            Err(e) => o.check(false, || format!("pair {i}: {e}")),
        }
    }
    o
}

fn criterion_9() -> Outcome {
    let mut o = Outcome::new();
    let mut rng = stream(909);
    let prm = CayleyParams::default();
    for i in 0..50 {
        let n = rng.gen_range(1..=6);
        let b = random_skew_form(&mut rng, n);
        let ib = &b * c64(0.0, 1.0);
        // Members of each class for the skew form, plus unstructured matrices.
        let a = match i % 5 {
            0 => random_selfadjoint(&mut rng, &b),
            1 => times_i(&random_selfadjoint(&mut rng, &b)),
            2 => {
                let s = random_selfadjoint(&mut rng, &b) * c64(0.3, 0.0);
                cayley_to_unitary(&s, &product(b.clone()), &prm, &cfg()).unwrap_or(s)
            }
            3 => {
                let s = random_selfadjoint(&mut rng, &b);
                &s + &s * &s * c64(0.0, 1.0)
            }
            _ => random_complex(&mut rng, n, n),
        };
        let lhs = classify(&a, &product(b.clone()), &cfg()).unwrap().memberships;
        let rhs = classify(&a, &product(ib), &cfg()).unwrap().memberships;
        o.check(lhs == rhs, || format!("pair {i}: {lhs:?} vs {rhs:?}"));
    }
    o
}

fn criterion_10() -> Outcome {
    let mut o = Outcome::new();
    let bin = env!("CARGO_BIN_EXE_indefinite");
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let run = |args: &[&str]| -> (Vec<u8>, i32) {
        let out = Command::new(bin).args(args).current_dir(d).output().expect("binary runs");
        (out.stdout, out.status.code().unwrap_or(-1))
    };
    for (kind, n) in [("jordan_pair", "4"), ("unitary_example", "3"), ("normal_example", "4")] {
        let args = ["generate", kind, "--n", n, "--seed", "7", "--no-timing"];
        let first = run(&args);
        o.check(first.1 == 0 && first == run(&args), || format!("generate {kind} not reproducible"));
    }
    let runs: [(&str, &[&str]); 5] = [
        ("densify J", &["densify", "jordan_pair_A.json", "jordan_pair_B.json", "--class", "J", "--eps", "1e-3"]),
        ("project L", &["project", "jordan_pair_A.json", "jordan_pair_B.json", "--class", "L"]),
        ("densify G", &["densify", "unitary_example_A.json", "unitary_example_B.json", "--class", "G", "--eps", "1e-2"]),
        ("densify N", &["densify", "normal_example_A.json", "normal_example_B.json", "--class", "N", "--eps", "1e-2"]),
        ("sum4", &["sum4", "normal_example_A.json", "normal_example_B.json"]),
    ];
    for (name, args) in runs {
        let mut full: Vec<&str> = args.to_vec();
        full.extend(["--seed", "11", "--no-timing"]);
        let first = run(&full);
        let second = run(&full);
        let mut threaded = full.clone();
        threaded.extend(["--threads", "4"]);
        let third = run(&threaded);
        o.check(first.1 == 0 && first == second && first == third, || {
            format!("{name}: exit {} / {} / {}, identical {} {}", first.1, second.1, third.1, first == second, first == third)
        });
    }
    o
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("density in J/L", criterion_1),
        ("Cayley round trip", criterion_2),
        ("density in G", criterion_3),
        ("density in N", criterion_4),
        ("projection optimality", criterion_5),
        ("sum decompositions", criterion_6),
        ("spectral oracles", criterion_7),
        ("canonical recovery", criterion_8),
        ("skew-Hermitian equivalence", criterion_9),
        ("CLI determinism", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let label = format!("criterion {:>2}: {name}", k + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let status = if o.ok() && secs < 60.0 { "PASS" } else { "FAIL" };
        println!("{status} {label} ({}/{} checks, {secs:.2}s)", o.passed, o.total);
        for f in &o.failures {
            println!("       {f}");
        }
        if status == "FAIL" {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
