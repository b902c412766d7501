//! End-to-end acceptance checks. Each test writes one `criterion N: PASS|FAIL`
//! line straight to stderr so the lines survive output capture.

use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use unitlat::buchmann_pohst::{bp_reduce, exact_basis, forget_rows, relation_norm_check, relations_vanish, BPParams};
use unitlat::cyclotomic::period::alt_period_check;
use unitlat::cyclotomic::{basis_norm_profile, euler_phi, unit_lattice, CyclotomicField};
use unitlat::estimator::{generic_cyclotomic_ratio, log_log_slope, qubit_count_generic, FieldProfile};
use unitlat::interval::{self, Interval};
use unitlat::linalg::{self, rat, ratio};
use unitlat::recovery::{self, default_sigma, planted_instance, recover_with_sublattice, verify_recovery};
use unitlat::reduction::lll::{self, ok_rows_to_field};
use unitlat::reduction::{canonical_hnf, default_delta, hnf_basis, lll_reduce, lll_reduce_ok, lll_reduce_rows};
use unitlat::ring::{OKMatrix, RingDescriptor, RingElem, RingKind};
use unitlat::sampler::{babai_bdd, bdd_radius, sample_dual, verify_sampler_contract, SamplerConfig};
use unitlat::{BasisMatrix, FixedPointVector};

fn report(n: u32, ok: bool, detail: &str) {
    let line = format!("criterion {n}: {} ({detail})\n", if ok { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(ok, "criterion {n} failed: {detail}");
}

fn random_int_basis(rng: &mut ChaCha20Rng, m: usize, spread: i64) -> Vec<Vec<BigInt>> {
    loop {
        let rows: Vec<Vec<BigInt>> =
            (0..m).map(|_| (0..m).map(|_| BigInt::from(rng.random_range(-spread..=spread))).collect()).collect();
        if linalg::det_int(&rows) != BigInt::from(0) {
            return rows;
        }
    }
}

#[test]
fn criterion_01_planted_recovery() {
    let start = Instant::now();
    let (mut ok, mut total) = (0, 0);
    for i in 0..200u64 {
        let dim = 2 + (i % 5) as usize;
        let index = 1 + (i / 5) % 12;
        total += 1;
        let inst = planted_instance(dim, index, 1000 + i).expect("instance");
        if let Ok(r) = recover_with_sublattice(&inst.problem) {
            if verify_recovery(&inst.problem, &r) && r.index == BigInt::from(index) {
                ok += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = ok * 100 >= total * 99 && secs < 60.0;
    report(1, pass, &format!("{ok}/{total} exact recoveries in {secs:.1}s"));
}

#[test]
fn criterion_02_bdd_guarantee() {
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    let (mut ok, trials) = (0, 10_000);
    for t in 0..trials {
        let m = 1 + t % 8;
        let b_m = BasisMatrix::from_integers(&random_int_basis(&mut rng, m, 4)).unwrap();
        let dual = b_m.dual_basis();
        let z: Vec<BigInt> = (0..m).map(|_| BigInt::from(rng.random_range(-20i64..=20))).collect();
        let point = dual.point(&z);
        // error of norm at most 0.99 of the radius, plus the 2^-64 quantization
        let dir: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-12);
        let radius = linalg::rat_to_f64(&bdd_radius(&b_m));
        let scale = 0.99 * radius * rng.random_range(0.0..1.0) / norm;
        let noisy: Vec<BigRational> = point
            .iter()
            .zip(&dir)
            .map(|(p, d)| p + BigRational::from_float(d * scale).unwrap_or_else(|| rat(0)))
            .collect();
        let y = FixedPointVector::from_rationals(&noisy, 64);
        let out = babai_bdd(&y, &b_m).unwrap();
        if out.z == z && out.y == point {
            ok += 1;
        }
    }
    report(2, ok == trials, &format!("{ok}/{trials} exact decodings, dims 1-8"));
}

fn bp_trial(rng: &mut ChaCha20Rng, kind: RingKind) -> bool {
    let m = rng.random_range(1..=3usize);
    let k = m + 2;
    let width = kind.z_rank();
    // basis rows in the generator layout: m entries, each with `width` coordinates
    let basis: Vec<Vec<BigRational>> = loop {
        let rows = random_int_basis(rng, m * width, 3);
        let rows: Vec<Vec<BigRational>> = rows[..m].iter().map(|r| r.iter().map(|x| BigRational::from_integer(x.clone())).collect()).collect();
        let full = forget_rows(&rows, kind);
        if linalg::rank_rat(&full) == m * width {
            break rows;
        }
    };
    let coeff = |rng: &mut ChaCha20Rng| RingElem::from_i64(rng.random_range(-3..=3), if width == 2 { rng.random_range(-3..=3) } else { 0 });
    let combine = |c: &[RingElem]| -> Vec<BigRational> {
        let mut out = vec![rat(0); m * width];
        for (ci, b) in c.iter().zip(&basis) {
            for e in 0..m {
                let x = if width == 2 {
                    let be = RingElem::new(b[2 * e].to_integer(), b[2 * e + 1].to_integer());
                    ci.mul(&be, kind)
                } else {
                    RingElem::from_int(ci.a.clone() * b[e].to_integer())
                };
                if width == 2 {
                    out[2 * e] += BigRational::from_integer(x.a);
                    out[2 * e + 1] += BigRational::from_integer(x.b);
                } else {
                    out[e] += BigRational::from_integer(x.a);
                }
            }
        }
        out
    };
    let mut gens = basis.clone();
    for _ in m..k {
        let c: Vec<RingElem> = (0..m).map(|_| coeff(rng)).collect();
        gens.push(combine(&c));
    }
    let d = linalg::det_rat(&forget_rows(&basis, kind)).abs();
    let params = match BPParams::new(m, k, rat(1), d, default_delta(), RingDescriptor::new(kind)) {
        Ok(p) => p,
        Err(_) => return false,
    };
    let bits = params.q() + 8;
    let noisy: Vec<FixedPointVector> = gens
        .iter()
        .map(|g| {
            let e: Vec<BigRational> =
                g.iter().map(|x| x + BigRational::new(BigInt::from(rng.random_range(-15i64..=15)), linalg::pow2(params.q() + 8))).collect();
            FixedPointVector::from_rationals(&e, bits)
        })
        .collect();
    let Ok(out) = bp_reduce(&noisy, &params) else { return false };
    let rec = exact_basis(&out, &gens);
    relation_norm_check(&out, &params)
        && relations_vanish(&out, &gens)
        && canonical_hnf(&forget_rows(&rec, kind)) == canonical_hnf(&forget_rows(&basis, kind))
}

#[test]
fn criterion_03_buchmann_pohst_separation() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let z = (0..100).filter(|_| bp_trial(&mut rng, RingKind::Integers)).count();
    let g = (0..50).filter(|_| bp_trial(&mut rng, RingKind::Gaussian)).count();
    report(3, z == 100 && g == 50, &format!("Z {z}/100, Z[i] {g}/50"));
}

#[test]
fn criterion_04_ok_lll_contract() {
    let mut rng = ChaCha20Rng::seed_from_u64(4);
    let d = default_delta();
    let mut ok = 0;
    for _ in 0..100 {
        let n = rng.random_range(2..=4usize);
        let m = loop {
            let rows: Vec<Vec<RingElem>> = (0..n)
                .map(|_| (0..n).map(|_| RingElem::from_i64(rng.random_range(-30..=30), rng.random_range(-30..=30))).collect())
                .collect();
            let m = OKMatrix::new(RingKind::Gaussian, rows).unwrap();
            if !lll::ok_det(&m).is_zero() {
                break m;
            }
        };
        let (r, t) = lll_reduce_ok(&m, &d).unwrap();
        let field = ok_rows_to_field(&r);
        let conditions = lll::is_lll_reduced(&field, &d, RingDescriptor::GAUSSIAN)
            && lll::check_reduced_bound(&field, &d, RingDescriptor::GAUSSIAN)
            && t.mul(&m) == r;
        let forgot = m.forget_to_z();
        let (zr, _) = lll_reduce_rows(&linalg::int_to_rat(&forgot), &d).unwrap();
        let zr = linalg::to_int(&zr).unwrap();
        if conditions && hnf_basis(&r.forget_to_z()) == hnf_basis(&zr) {
            ok += 1;
        }
    }
    report(4, ok == 100, &format!("{ok}/100 Z[i] reductions meet both conditions and match Z-LLL"));
}

#[test]
fn criterion_05_cyclotomic_ground_truth() {
    let (problem, _) = recovery::cyclotomic_problem(5, 128, 5).unwrap();
    let r = recover_with_sublattice(&problem).unwrap();
    let reg = linalg::rat_to_f64(&r.abs_det());
    let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
    let reg_ok = (reg - golden).abs() < 1e-10;
    let mut ranks = Vec::new();
    let mut ranks_ok = true;
    for m in [5u64, 7, 8, 9, 11, 12] {
        let lat = unit_lattice(&CyclotomicField::new(m).unwrap(), 128).unwrap();
        let want = (euler_phi(m) / 2 - 1) as usize;
        ranks_ok &= lat.rank == want;
        ranks.push(format!("{m}:{}", lat.rank));
    }
    report(5, reg_ok && ranks_ok, &format!("regulator {reg:.15} vs {golden:.15}; ranks {}", ranks.join(" ")));
}

#[test]
fn criterion_06_log_growth() {
    let mut table = String::from("m,unit_rank,max_log_norm,argmax_j,growth_ratio\n");
    let mut worst = (0.0f64, 0u64);
    for m in 3..=100u64 {
        if m % 4 == 2 {
            continue;
        }
        let field = CyclotomicField::new(m).unwrap();
        let lat = unit_lattice(&field, 96).unwrap();
        let p = basis_norm_profile(&lat);
        table.push_str(&format!("{m},{},{:.6},{},{:.6}\n", field.unit_rank(), p.max_log_norm, p.argmax_j, p.growth_ratio));
        if p.growth_ratio > worst.0 {
            worst = (p.growth_ratio, m);
        }
    }
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("log_growth.csv");
    std::fs::write(&path, &table).unwrap();
    report(6, worst.0 <= 2.0, &format!("max ratio {:.4} at m = {}; table at {}", worst.0, worst.1, path.display()));
}

#[test]
fn criterion_07_estimator() {
    let e = qubit_count_generic(&FieldProfile::cyclotomic_shaped(10_000).unwrap(), -64.0).unwrap();
    let lead = e.leading_term.log10();
    let lead_ok = (lead - 20.0).abs() <= 1.0;
    let ms = [100u64, 200, 500, 1000, 2000, 5000, 10_000];
    let xs: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    let ys: Vec<f64> = ms.iter().map(|&m| generic_cyclotomic_ratio(m, -64.0).unwrap()).collect();
    let slope = log_log_slope(&xs, &ys);
    let slope_ok = (2.7..=3.3).contains(&slope);
    report(
        7,
        lead_ok && slope_ok,
        &format!("leading term 10^{lead:.2}, total 10^{:.2}; ratio slope {slope:.3}", e.total_log10),
    );
}

#[test]
fn criterion_08_sampler_contract() {
    let mut rng = ChaCha20Rng::seed_from_u64(8);
    let mut bases = vec![BasisMatrix::identity(2)];
    for m in [3usize, 4] {
        let b = BasisMatrix::from_integers(&random_int_basis(&mut rng, m, 3)).unwrap();
        bases.push(lll_reduce(&b, &default_delta()).unwrap().0.dual_basis());
    }
    let mut lines = Vec::new();
    let mut all = true;
    for (i, b) in bases.iter().enumerate() {
        let sigma = default_sigma(b).unwrap();
        let cfg = SamplerConfig::new(ratio(1, 10), rat(3) * &sigma, rat(0), sigma, 80 + i as u64);
        let samples = sample_dual(b, &cfg, 10_000).unwrap();
        let rep = verify_sampler_contract(&samples, b, &cfg).unwrap();
        all &= rep.passed();
        lines.push(format!("dim {}: uniformity {:.3} tail {:.4}", b.dim(), rep.uniformity_max_mass, rep.concentration_mass));
    }
    report(8, all, &lines.join("; "));
}

#[test]
fn criterion_09_period_check() {
    let poly = vec![BigInt::from(-1), BigInt::from(-1), BigInt::from(1)];
    let zero = vec![rat(0), rat(0)];
    let p = 256;
    let s_lo = linalg::sqrt_lower(&rat(5));
    let s_hi = linalg::sqrt_upper(&rat(5));
    let small = Interval::from_rational_bounds(&((&s_lo - rat(1)) / rat(2)), &((&s_hi - rat(1)) / rat(2)), p);
    let large = Interval::from_rational_bounds(&((&s_lo + rat(1)) / rat(2)), &((&s_hi + rat(1)) / rat(2)), p);
    let period = vec![interval::ln(&small).unwrap().mul_int(2), interval::ln(&large).unwrap().mul_int(2)];
    let planted = alt_period_check(&poly, &zero, &period, 128).unwrap().residual;
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    let mut min_non = f64::INFINITY;
    for _ in 0..100 {
        let c: Vec<Interval> = (0..2)
            .map(|_| Interval::from_rational(&BigRational::new(BigInt::from(rng.random_range(-4000i64..=4000)), BigInt::from(1000)), 128))
            .collect();
        min_non = min_non.min(alt_period_check(&poly, &zero, &c, 128).unwrap().residual);
    }
    let ok = planted < 2f64.powi(-32) && min_non > 0.1;
    report(9, ok, &format!("planted residual {planted:.3e}, smallest non-period residual {min_non:.4}"));
}

fn run_cli(args: &[&str]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_unitlat")).args(args).env_remove("UNITLAT_PRECISION_BITS").output().unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

#[test]
fn criterion_10_cli_replay() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("replay");
    std::fs::create_dir_all(&dir).unwrap();
    let ident = dir.join("identity.json");
    std::fs::write(&ident, r#"{"m":3,"rows":[["1","0","0"],["0","1","0"],["0","0","1"]]}"#).unwrap();
    let gcd = dir.join("gcd.json");
    std::fs::write(
        &gcd,
        r#"{"m":1,"mu":"1","d":"1","generators":[{"exponent":64,"mantissas":["36893488147419103232"]},{"exponent":64,"mantissas":["55340232221128654848"]}]}"#,
    )
    .unwrap();
    let (ident, gcd) = (ident.to_str().unwrap(), gcd.to_str().unwrap());
    let runs: Vec<Vec<&str>> = vec![
        vec!["recover", "--synthetic", "--dim", "2", "--index", "2", "--seed", "7"],
        vec!["recover", "--cyclotomic", "5"],
        vec!["recover", "--synthetic", "--dim", "3", "--index", "4", "--mode", "baseline", "--available-bits", "64"],
        vec!["estimate", "--cyclotomic", "10000", "--compare"],
        vec!["estimate", "--m", "2", "--logD", "3", "--format", "csv"],
        vec!["reduce", "--input", ident, "--verify"],
        vec!["bp", "--input", gcd, "--verify"],
        vec!["sample", "--basis", ident, "--delta", "0", "--count", "50", "--verify", "--seed", "11"],
    ];
    let mut bad = Vec::new();
    for args in &runs {
        let (c1, o1) = run_cli(args);
        let (c2, o2) = run_cli(args);
        if c1 != 0 || c1 != c2 || o1 != o2 || o1.is_empty() {
            bad.push(args.join(" "));
        }
    }
    report(10, bad.is_empty(), &format!("{}/{} examples replay byte-identically{}", runs.len() - bad.len(), runs.len(), if bad.is_empty() { String::new() } else { format!("; failing: {}", bad.join(" | ")) }));
}
