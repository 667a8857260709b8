//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! reports a PASS/FAIL line even when an earlier one fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use itertools::Itertools;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use succinct_pit::circuit::{coefficient_arena, Circuit, CircuitBuilder, ClassDescriptor};
use succinct_pit::field::{FieldElem, PrimeField};
use succinct_pit::generators::{GeneratorError, GeneratorSpec};
use succinct_pit::harness::{
    image_samples, interpolation_hitting_set, jacobian_rank, natural_proof_audit, run_experiment,
    AuditOutcome, Execution, ExperimentConfig, Guarantee, Mode,
};
use succinct_pit::poly::{
    subset_index, Monomial, SparsePoly, UniPoly, VarArena, VarId, DEFAULT_TERM_BUDGET,
};
use succinct_pit::witness::{witness_for, witness_fs_roabp, witness_verify, WitnessBody};

const B: usize = DEFAULT_TERM_BUDGET;

fn gold() -> PrimeField {
    PrimeField::goldilocks()
}

fn spec_in(f: &PrimeField, text: &str) -> GeneratorSpec {
    GeneratorSpec::build(&text.parse().unwrap(), f).unwrap()
}

fn distinguisher(f: &PrimeField, coords: usize, text: &str) -> Circuit {
    let arena = coefficient_arena(coords);
    let p = SparsePoly::parse(f, &arena, text).unwrap();
    let mut b = CircuitBuilder::new(f, &arena);
    let out = b.sparse(&p);
    b.finish(out).unwrap()
}

fn random_alpha(g: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Vec<FieldElem> {
    (0..g.seed_arity()).map(|_| g.field().random(rng)).collect()
}

fn experiment(
    f: &PrimeField,
    class: &str,
    gen: &str,
    trials: usize,
    seed: u64,
) -> succinct_pit::harness::ExperimentReport {
    run_experiment(
        &ExperimentConfig::new(class.parse().unwrap(), gen.parse().unwrap(), trials, seed),
        f,
    )
    .unwrap()
}

fn c1_rc_vandermonde() {
    let f = gold();
    for n in 1..=4 {
        for r in 1..=3 {
            let g = spec_in(&f, &format!("rc:n={n},r={r},vdm=true"));
            let image = g.symbolic_image(B).unwrap();
            let t = g.arena().lookup("t").unwrap();
            for i in 1..=g.coordinates() {
                let mut want = SparsePoly::zero(&f, g.arena());
                for j in 1..=r {
                    let y = g.arena().lookup(&format!("y{j}")).unwrap();
                    want.add_term(
                        Monomial::from_pairs([(y, 1), (t, (i * j) as u32)]),
                        FieldElem::ONE,
                    );
                }
                assert_eq!(*image.at(i), want, "n={n} r={r} coordinate {i}");
            }
        }
    }
}

fn c2_spsk_hitting() {
    let f = gold();
    let report = experiment(&f, "spsk:k=2,d=4", "rc:n=4,r=5", 100, 2);
    assert_eq!(report.hits, 100);
    assert!(report.rows.iter().all(|r| r.outcome == "nonzero-witness"));
    assert!(report
        .rows
        .iter()
        .all(|r| r.failure_bound_log2.unwrap() <= -40.0));
}

fn c3_ssv_planting() {
    let f = gold();
    let g = spec_in(&f, "ssv:n=4,k=3");
    let subsets: Vec<Vec<usize>> = (0..16usize)
        .map(|m| (1..=4).filter(|&i| m >> (i - 1) & 1 == 1).collect())
        .collect();
    let mut count = 0;
    for size in 0..=3 {
        for planted in subsets.iter().cloned().combinations(size) {
            let v = g.fixed_image(&g.ssv_plant(&planted).unwrap(), B).unwrap();
            for coord in 1..=16 {
                let want = match planted.iter().position(|s| subset_index(s) == coord) {
                    Some(j) => SparsePoly::var(
                        &f,
                        g.arena(),
                        g.arena().lookup(&format!("y{}", j + 1)).unwrap(),
                    ),
                    None => SparsePoly::zero(&f, g.arena()),
                };
                assert_eq!(
                    *v.at(coord),
                    want,
                    "planted {planted:?}, coordinate {coord}"
                );
            }
            count += 1;
        }
    }
    assert_eq!(count, 1 + 16 + 120 + 560);
}

fn c4_sparse_hitting() {
    // (a) every nonzero multilinear D over F_5 with <= 4 terms in c1..c4
    let f5 = PrimeField::small(5).unwrap();
    let g = spec_in(&f5, "sssv:n=2,k=2");
    let ell = g.seed_arity();
    assert_eq!(ell, 6);
    let points = 5usize.pow(ell as u32);
    // tables[mask][point] = Π_{i ∈ mask} G_i(point)
    let mut tables = vec![vec![0u8; points]; 16];
    for pt in 0..points {
        let alpha: Vec<FieldElem> = (0..ell)
            .map(|i| f5.elem((pt / 5usize.pow(i as u32) % 5) as u64))
            .collect();
        let image = g.image(&alpha).unwrap().values();
        for (mask, table) in tables.iter_mut().enumerate() {
            table[pt] = (0..4)
                .filter(|&i| mask >> i & 1 == 1)
                .map(|i| image[i])
                .product::<u64>()
                .rem_euclid(5) as u8;
        }
    }
    let image = g.symbolic_image(B).unwrap();
    let (mut checked, mut symbolic) = (0u64, 0u64);
    for terms in 1..=4 {
        for masks in (0..16usize).combinations(terms) {
            // D and c·D vanish together, so the first coefficient is fixed to 1
            for rest in (0..terms - 1).map(|_| 1u8..5).multi_cartesian_product() {
                let coeffs: Vec<u8> = std::iter::once(1).chain(rest).collect();
                let hit = (0..points).any(|pt| {
                    masks
                        .iter()
                        .zip(&coeffs)
                        .map(|(&m, &c)| c as u32 * tables[m][pt] as u32)
                        .sum::<u32>()
                        % 5
                        != 0
                });
                if !hit {
                    let text = masks
                        .iter()
                        .zip(&coeffs)
                        .map(|(&m, &c)| {
                            let vars: Vec<String> = (0..4)
                                .filter(|&i| m >> i & 1 == 1)
                                .map(|i| format!("c{}", i + 1))
                                .collect();
                            format!(
                                "{c}*{}",
                                if vars.is_empty() {
                                    "1".into()
                                } else {
                                    vars.join("*")
                                }
                            )
                        })
                        .join(" + ");
                    let d = distinguisher(&f5, 4, &text);
                    assert!(
                        !g.compose_with(&d, &image, B).unwrap().is_zero(),
                        "D = {text}"
                    );
                    symbolic += 1;
                }
                checked += 4;
            }
        }
    }
    assert_eq!(checked, 64 + 120 * 16 + 560 * 64 + 1820 * 256);
    println!("    (a) {checked} distinguishers, {symbolic} settled symbolically");

    // (b) shifting an s-sparse polynomial by 1 leaves a monomial of support <= ceil(log2 s)
    let f = gold();
    let arena = VarArena::numbered("x", 6);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ones = vec![FieldElem::ONE; 6];
    for _ in 0..1000 {
        let s = rng.gen_range(1..=16usize);
        let mut p = SparsePoly::zero(&f, &arena);
        while p.sparsity() < s {
            let deg = rng.gen_range(0..=3);
            let m = Monomial::from_pairs((0..deg).map(|_| (VarId(rng.gen_range(0..6)), 1)));
            if p.coefficient(&m).is_zero() {
                p.add_term(m, f.random_nonzero(&mut rng));
            }
        }
        let bound = (s as f64).log2().ceil() as usize;
        assert!(
            p.shift_by(&ones).unwrap().min_support_monomial().unwrap() <= bound,
            "{p}"
        );
    }
}

fn c5_comm_roabp() {
    let f = gold();
    for (w, k) in [(2, 5), (3, 9)] {
        let report = experiment(
            &f,
            &format!("comm-roabp:w={w},d=2"),
            &format!("ssv:n=4,k={k}"),
            100,
            5,
        );
        assert_eq!(report.hits, 100, "w = {w}");
        assert_eq!(report.guarantee, Guarantee::Guaranteed);
        assert!(
            report.notes.contains(&"p > N d = 32: holds".to_string()),
            "{:?}",
            report.notes
        );
    }
}

/// `p(t) = Π_{j≠ℓ} (t - β_j) / (β_ℓ - β_j)` with `β_j = j`.
fn lagrange(f: &PrimeField, count: usize, l: usize) -> UniPoly {
    let mut p = UniPoly::constant(FieldElem::ONE);
    for j in 1..=count {
        if j != l {
            let denom = f.inv(f.sub(f.elem(l as u64), f.elem(j as u64))).unwrap();
            p = p.mul(
                f,
                &UniPoly::linear(f.mul(f.neg(f.elem(j as u64)), denom), denom),
            );
        }
    }
    p
}

/// `p(u)` by Horner's rule.
fn apply(
    f: &PrimeField,
    arena: &std::sync::Arc<VarArena>,
    p: &UniPoly,
    u: &SparsePoly,
) -> SparsePoly {
    let mut acc = SparsePoly::zero(f, arena);
    for &c in p.coeffs().iter().rev() {
        acc = acc.mul(u).unwrap();
        acc.add_term(Monomial::one(), c);
    }
    acc
}

fn c6_fs_identities() {
    let f = gold();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for (n, w, d) in itertools::iproduct!(1..=3usize, 1..=2usize, 1..=2usize) {
        let g = spec_in(&f, &format!("fs:n={n},w={w},d={d}"));
        let fs = g.fs().unwrap();
        let w2 = w * w;
        let arena = g.arena();
        let y = |i: usize| VarId((n + i - 1) as u32);
        let p: Vec<UniPoly> = (1..=w2).map(|l| lagrange(&f, w2, l)).collect();
        let image = g.symbolic_image(B).unwrap();
        // the literal sum over ℓ_1..ℓ_n ∈ [w²]
        for b in 0..1usize << n {
            let mut want = SparsePoly::zero(&f, arena);
            for ls in (0..n).map(|_| 1..=w2).multi_cartesian_product() {
                let mut term = apply(
                    &f,
                    arena,
                    &p[ls[n - 1] - 1],
                    &SparsePoly::var(&f, arena, y(n + 1)),
                );
                for i in 1..=n {
                    let c = f.pow(fs.omega, ls[i - 1] as u64);
                    let e = if b >> (i - 1) & 1 == 1 {
                        (1u32 << (i - 1)) * (d * w2) as u32
                    } else {
                        1
                    };
                    let u = SparsePoly::monomial(
                        &f,
                        arena,
                        Monomial::power(y(i), e),
                        f.pow(c, e as u64),
                    );
                    let factor = if i == 1 {
                        u
                    } else {
                        apply(&f, arena, &p[ls[i - 2] - 1], &u)
                    };
                    term = term.mul(&factor).unwrap();
                }
                want = want.add(&term).unwrap();
            }
            assert_eq!(*image.at(b + 1), want, "n={n} w={w} d={d} b={b}");
        }
        for _ in 0..20 {
            let a = witness_fs_roabp(&g, &random_alpha(&g, &mut rng)).unwrap();
            assert!(witness_verify(&a, &g, B).unwrap(), "fs n={n} w={w} d={d}");
        }
    }
    let report = experiment(&f, "roabp:w=2,d=2", "fs:n=3,w=2,d=2", 100, 6);
    assert_eq!(report.hits, 100);
    assert_eq!(report.guarantee, Guarantee::Guaranteed);
}

fn c7_interpolation() {
    let f5 = PrimeField::small(5).unwrap();
    let g = spec_in(&f5, "ssv:n=1,k=1");
    // the image is (y1 - y1 z1_1, y1 z1_1): seed degree 2 over 2 seeds
    let delta = 1;
    let h = interpolation_hitting_set(&g, delta).unwrap();
    assert_eq!(h.seed_degree, 2);
    assert_eq!(
        h.vectors.len() as u64,
        (h.seed_degree * delta + 1).pow(g.seed_arity() as u32)
    );
    assert_eq!(h.vectors.len(), 9);
    let mut count = 0;
    for (a, b) in itertools::iproduct!(0..5u64, 0..5u64) {
        if (a, b) == (0, 0) {
            continue;
        }
        let d = distinguisher(&f5, 2, &format!("{a}*c1 + {b}*c2"));
        assert!(
            h.vectors
                .iter()
                .any(|v| !d.eval(v.entries()).unwrap().is_zero()),
            "{a} c1 + {b} c2"
        );
        count += 1;
    }
    assert_eq!(count, 24);
}

fn c8_jacobian_and_bms() {
    let f = gold();
    let arena = VarArena::numbered("X", 2);
    let p = |t: &str| SparsePoly::parse(&f, &arena, t).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let r = jacobian_rank(&[p("X1^2"), p("X1*X2")], &mut rng).unwrap();
    assert!(r.rank == 2 && r.characteristic_ok);
    let r = jacobian_rank(&[p("X1"), p("X1^2")], &mut rng).unwrap();
    assert!(r.rank == 1 && r.characteristic_ok);
    let report = experiment(&f, "sparse-compose:m=1,s=2", "bms:n=3,r=1,s=2", 100, 8);
    assert_eq!(report.hits, 100);
    assert_eq!(report.guarantee, Guarantee::Guaranteed);
}

fn c9_asss() {
    let f = gold();
    let g = spec_in(&f, "asss:n=3,k=1,D=3,s=32");
    assert_eq!(g.asss_r().unwrap().to_string(), (1u64 << 48).to_string());
    assert!(matches!(
        g.image(&vec![FieldElem::ZERO; g.seed_arity()]),
        Err(GeneratorError::RequiresOverride { .. })
    ));
    let g = spec_in(&f, "asss:n=3,k=1,D=3,s=32,R=2");
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..5 {
        assert!(witness_verify(
            &witness_for(&g, &random_alpha(&g, &mut rng)).unwrap(),
            &g,
            B
        )
        .unwrap());
    }
    let report = experiment(&f, "occur:D=3,k=1,s=32", "asss:n=3,k=1,D=3,s=32,R=2", 50, 9);
    assert_eq!(report.hits, 50);
    assert_eq!(report.guarantee, Guarantee::Heuristic);
    assert!(serde_json::to_string(&g.to_json_value())
        .unwrap()
        .contains("\"parameters\":\"heuristic\""));
}

fn c10_succinctness() {
    let f = gold();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for text in [
        "rc:n=2,r=2",
        "rc:n=2,r=2,vdm=true",
        "ssv:n=2,k=2",
        "sssv:n=2,k=2",
        "trdeg:n=2,k=1",
        "asss:n=2,k=1,D=3,s=4,R=2",
        "bms:n=2,r=1,s=2",
        "fs:n=2,w=2,d=1",
        "fs:n=3,w=2,d=2",
    ] {
        let g = spec_in(&f, text);
        for _ in 0..25 {
            let a = witness_for(&g, &random_alpha(&g, &mut rng)).unwrap();
            assert!(witness_verify(&a, &g, B).unwrap(), "{text}");
            if let (WitnessBody::RoAbp(r), Some(fs)) = (&a.body, g.fs()) {
                assert_eq!(r.width(), fs.w2);
                assert_eq!(r.layers().len(), g.n() + 1);
            }
        }
    }
}

fn c11_audit() {
    let f = gold();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let minor = distinguisher(&f, 4, "c1*c4 - c2*c3");
    let ssv1 = spec_in(&f, "ssv:n=2,k=1");
    assert!(ssv1.compose(&minor, B).unwrap().is_zero());
    let samples = image_samples(&ssv1, 100, &mut rng).unwrap();
    assert_eq!(
        natural_proof_audit(&minor, &samples, &mut rng).unwrap(),
        AuditOutcome::IsDistinguisher { samples: 100 }
    );
    let ssv2 = spec_in(&f, "ssv:n=2,k=2");
    assert!(!ssv2.compose(&minor, B).unwrap().is_zero());
    let samples = image_samples(&ssv2, 100, &mut rng).unwrap();
    let AuditOutcome::HitWitness { index, value } =
        natural_proof_audit(&minor, &samples, &mut rng).unwrap()
    else {
        panic!("SSV(2,2) images are not all rank one")
    };
    assert_eq!(minor.eval(samples[index].entries()).unwrap().value(), value);
}

fn run_cli(args: &[&str], dir: &std::path::Path) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_succinct-pit"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn c12_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let runs: &[&[&str]] = &[
        &[
            "pit",
            "--class",
            "sparse:s=8",
            "--gen",
            "sssv:n=4,k=3",
            "--trials",
            "200",
            "--seed",
            "7",
        ],
        &[
            "pit",
            "--class",
            "spsk:k=2,d=4",
            "--gen",
            "rc:n=4,r=5",
            "--trials",
            "50",
            "--seed",
            "2",
            "--format",
            "csv",
        ],
        &[
            "pit",
            "--class",
            "sparse:s=4",
            "--gen",
            "sssv:n=2,k=2",
            "--trials",
            "20",
            "--seed",
            "6",
            "--mode",
            "symbolic",
        ],
        &[
            "pit",
            "--class",
            "roabp:w=2,d=2",
            "--gen",
            "fs:n=3,w=2,d=2",
            "--trials",
            "20",
            "--seed",
            "6",
        ],
        &[
            "gen",
            "--gen",
            "fs:n=3,w=2,d=2",
            "--seed",
            "3",
            "--images",
            "4",
            "--witness",
        ],
        &[
            "hitset",
            "--gen",
            "ssv:n=1,k=1",
            "--delta",
            "1",
            "--field-prime",
            "5",
        ],
    ];
    for args in runs {
        let (code_a, a) = run_cli(args, dir.path());
        let (code_b, b) = run_cli(args, dir.path());
        assert_eq!((code_a, code_b), (0, 0), "{args:?}");
        assert!(!a.is_empty());
        assert_eq!(a, b, "{args:?}");
    }
    let mut cfg = ExperimentConfig::new(
        "comm-roabp:w=2,d=2".parse::<ClassDescriptor>().unwrap(),
        "ssv:n=4,k=5".parse().unwrap(),
        40,
        12,
    );
    cfg.mode = Mode::default();
    cfg.execution = Execution::Sequential;
    let seq = run_experiment(&cfg, &gold()).unwrap().to_json();
    cfg.execution = Execution::Parallel;
    assert_eq!(seq, run_experiment(&cfg, &gold()).unwrap().to_json());
}

type Criterion = (u32, &'static str, u64, fn());

fn main() {
    let criteria: &[Criterion] = &[
        (1, "RC-Vandermonde identity", 10, c1_rc_vandermonde),
        (
            2,
            "sum of 2 products of linear forms hit by RC(r = 5)",
            60,
            c2_spsk_hitting,
        ),
        (3, "SSV planting", 10, c3_ssv_planting),
        (
            4,
            "sparse hitting and the shift lemma",
            120,
            c4_sparse_hitting,
        ),
        (5, "commutative roABPs hit by SSV", 120, c5_comm_roabp),
        (6, "FS identities and roABP hitting", 180, c6_fs_identities),
        (7, "interpolation hitting set", 10, c7_interpolation),
        (8, "Jacobian rank and BMS hitting", 30, c8_jacobian_and_bms),
        (9, "ASSS structure with R overridden", 60, c9_asss),
        (
            10,
            "witness verification on every kind",
            60,
            c10_succinctness,
        ),
        (11, "natural-proof audit in both directions", 10, c11_audit),
        (12, "byte-identical reruns", 120, c12_determinism),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    panic::set_hook(Box::new(|info| eprintln!("    {info}")));
    let mut failed = 0;
    for &(id, name, limit, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == &id.to_string()) {
            continue;
        }
        let start = Instant::now();
        let ok = panic::catch_unwind(AssertUnwindSafe(check)).is_ok();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let verdict = if ok && in_time { "PASS" } else { "FAIL" };
        let late = if ok && !in_time {
            format!(", over the {limit} s limit")
        } else {
            String::new()
        };
        println!(
            "criterion {id:>2} {verdict}: {name} ({:.2} s{late})",
            elapsed.as_secs_f64()
        );
        if verdict == "FAIL" {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
