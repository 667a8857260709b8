use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::circuit::{coefficient_arena, CircuitBuilder};
use crate::poly::{subset_from_index, subset_index, DEFAULT_TERM_BUDGET};

const B: usize = DEFAULT_TERM_BUDGET;

fn gl() -> PrimeField {
    PrimeField::goldilocks()
}

fn spec(text: &str) -> GeneratorSpec {
    GeneratorSpec::build(&text.parse().unwrap(), &gl()).unwrap()
}

fn poly(g: &GeneratorSpec, text: &str) -> SparsePoly {
    SparsePoly::parse(g.field(), g.arena(), text).unwrap()
}

fn sym(g: &GeneratorSpec) -> Vec<SparsePoly> {
    g.symbolic_image(B).unwrap().into_entries()
}

fn random_seed(g: &GeneratorSpec, rng: &mut ChaCha8Rng) -> Vec<FieldElem> {
    (0..g.seed_arity()).map(|_| g.field().random(rng)).collect()
}

/// `D = Σ w_i c_{idx_i}` over `N` coefficient variables.
fn linear_d(f: &PrimeField, n: usize, terms: &[(usize, i64)]) -> Circuit {
    let a = coefficient_arena(n);
    let mut b = CircuitBuilder::new(f, &a);
    let kids = terms
        .iter()
        .map(|&(i, _)| b.input(VarId(i as u32 - 1)))
        .collect();
    let weights = terms.iter().map(|&(_, w)| f.from_i64(w)).collect();
    let out = b.linear(kids, weights, f.zero());
    b.finish(out).unwrap()
}

#[test]
fn rc_examples() {
    let g = spec("rc:n=1,r=1");
    assert_eq!(g.seed_names(), ["y1", "t0", "t1"]);
    assert_eq!(
        g.witness_polynomial(B).unwrap(),
        poly(&g, "y1*t0 + y1*t0*t1*x1")
    );
    assert_eq!(sym(&g), vec![poly(&g, "y1*t0"), poly(&g, "y1*t0*t1")]);

    let g = spec("rc:n=1,r=0");
    assert!(g.witness_polynomial(B).unwrap().is_zero());

    let g = spec("rc:n=2,r=1");
    assert_eq!(
        *g.symbolic_image(B).unwrap().at_subset(&[1, 2]),
        poly(&g, "y1*t0*t1*t2")
    );
    assert_eq!(g.seed_arity(), 1 + 3);
}

#[test]
fn rc_specialization_examples() {
    let g = spec("rc:n=1,r=1,vdm=true");
    assert_eq!(sym(&g), vec![poly(&g, "y1*t"), poly(&g, "y1*t^2")]);
    let g = spec("rc:n=2,r=1,vdm=true");
    assert_eq!(*g.symbolic_image(B).unwrap().at(3), poly(&g, "y1*t^3"));
    let g = spec("rc:n=2,r=2,vdm=true");
    assert_eq!(
        *g.symbolic_image(B).unwrap().at(1),
        poly(&g, "y1*t + y2*t^2")
    );
}

#[test]
fn rc_is_vandermonde() {
    for n in 1..=3 {
        for r in 1..=3 {
            let g = spec(&format!("rc:n={n},r={r},vdm=true"));
            let image = g.symbolic_image(B).unwrap();
            for i in 1..=g.coordinates() {
                let want: Vec<String> = (1..=r).map(|j| format!("y{j}*t^{}", i * j)).collect();
                assert_eq!(
                    *image.at(i),
                    poly(&g, &want.join(" + ")),
                    "n={n} r={r} i={i}"
                );
            }
        }
    }
}

#[test]
fn ssv_examples() {
    let g = spec("ssv:n=1,k=1");
    assert_eq!(sym(&g), vec![poly(&g, "y1 - y1*z1_1"), poly(&g, "y1*z1_1")]);

    let g = spec("ssv:n=2,k=2");
    let ones: Vec<FieldElem> = vec![3, 5, 1, 1, 1, 1]
        .into_iter()
        .map(|v| g.field().elem(v))
        .collect();
    assert_eq!(g.image(&ones).unwrap().values(), vec![0, 0, 0, 8]);
    let zeros: Vec<FieldElem> = vec![3, 5, 0, 0, 0, 0]
        .into_iter()
        .map(|v| g.field().elem(v))
        .collect();
    assert_eq!(g.image(&zeros).unwrap().values(), vec![8, 0, 0, 0]);
}

#[test]
fn planting_examples() {
    let g = spec("ssv:n=2,k=1");
    let v = g.fixed_image(&g.ssv_plant(&[vec![1]]).unwrap(), B).unwrap();
    let y1 = poly(&g, "y1");
    let zero = SparsePoly::zero(g.field(), g.arena());
    assert_eq!(
        v.into_entries(),
        vec![zero.clone(), y1.clone(), zero.clone(), zero.clone()]
    );
    let v = g.fixed_image(&g.ssv_plant(&[vec![]]).unwrap(), B).unwrap();
    assert_eq!(*v.at(1), y1);

    let g = spec("ssv:n=2,k=2");
    let v = g
        .fixed_image(&g.ssv_plant(&[vec![1], vec![2]]).unwrap(), B)
        .unwrap();
    let zero = SparsePoly::zero(g.field(), g.arena());
    assert_eq!(
        v.into_entries(),
        vec![zero.clone(), poly(&g, "y1"), poly(&g, "y2"), zero]
    );
    assert!(g.ssv_plant(&[vec![1], vec![2], vec![1, 2]]).is_err());
    assert!(g.ssv_plant(&[vec![1], vec![1]]).is_err());
}

#[test]
fn planting_hits_exactly_the_planted_support() {
    for n in 1..=3 {
        for k in 1..=3 {
            let g = spec(&format!("ssv:n={n},k={k}"));
            let image = g.symbolic_image(B).unwrap();
            let subsets: Vec<Vec<usize>> = (1..=g.coordinates())
                .map(|i| subset_from_index(i, n))
                .collect();
            let mut stack: Vec<Vec<usize>> = vec![vec![]];
            while let Some(picked) = stack.pop() {
                let planted: Vec<Vec<usize>> = picked.iter().map(|&i| subsets[i].clone()).collect();
                let fixing = g.ssv_plant(&planted).unwrap();
                for (i, entry) in image.entries().iter().enumerate() {
                    let got = entry.partial_eval(&fixing);
                    let want = match planted.iter().position(|s| subset_index(s) == i + 1) {
                        Some(j) => poly(&g, &format!("y{}", j + 1)),
                        None => SparsePoly::zero(g.field(), g.arena()),
                    };
                    assert_eq!(got, want, "n={n} k={k} T={planted:?}");
                }
                if picked.len() < k {
                    let start = picked.last().map_or(0, |&l| l + 1);
                    for next in start..subsets.len() {
                        let mut more = picked.clone();
                        more.push(next);
                        stack.push(more);
                    }
                }
            }
        }
    }
}

#[test]
fn ssv_is_additive() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (n, k1, k2) in [(1, 1, 1), (2, 1, 2), (3, 2, 1)] {
        let g1 = spec(&format!("ssv:n={n},k={k1}"));
        let g2 = spec(&format!("ssv:n={n},k={k2}"));
        let g = spec(&format!("ssv:n={n},k={}", k1 + k2));
        let mut rename = HashMap::new();
        for i in 1..=k2 {
            let target = |name: String| {
                SparsePoly::var(g.field(), g.arena(), g.arena().lookup(&name).unwrap())
            };
            rename.insert(
                g2.arena().lookup(&format!("y{i}")).unwrap(),
                target(format!("y{}", i + k1)),
            );
            for j in 1..=n {
                rename.insert(
                    g2.arena().lookup(&format!("z{i}_{j}")).unwrap(),
                    target(format!("z{}_{j}", i + k1)),
                );
            }
        }
        let (s1, s2, s) = (sym(&g1), sym(&g2), sym(&g));
        for i in 0..g.coordinates() {
            let a = s1[i].substitute(&HashMap::new(), g.arena(), B).unwrap();
            let b = s2[i].substitute(&rename, g.arena(), B).unwrap();
            assert_eq!(a.add(&b).unwrap(), s[i]);
        }
        for _ in 0..10 {
            let (a1, a2) = (random_seed(&g1, &mut rng), random_seed(&g2, &mut rng));
            let alpha: Vec<FieldElem> = [&a1[..k1], &a2[..k2], &a1[k1..], &a2[k2..]]
                .into_iter()
                .flatten()
                .copied()
                .collect();
            let f = g.field();
            let sum: Vec<u64> = g1
                .image(&a1)
                .unwrap()
                .entries()
                .iter()
                .zip(g2.image(&a2).unwrap().entries())
                .map(|(&x, &y)| f.add(x, y).value())
                .collect();
            assert_eq!(g.image(&alpha).unwrap().values(), sum);
        }
    }
}

#[test]
fn sssv_examples() {
    let g = spec("sssv:n=1,k=1");
    assert_eq!(
        sym(&g),
        vec![poly(&g, "y1 - y1*z1_1 + 1"), poly(&g, "y1*z1_1 + 1")]
    );
    let zero = vec![FieldElem::ZERO; g.seed_arity()];
    assert_eq!(g.image(&zero).unwrap().values(), vec![1, 1]);
    let d = linear_d(g.field(), 2, &[(1, 1), (2, -1)]);
    assert_eq!(g.compose(&d, B).unwrap(), poly(&g, "y1 - 2*y1*z1_1"));
}

#[test]
fn sssv_is_shifted_ssv() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let f = gl();
    for (n, k) in [(1, 1), (3, 2), (4, 3)] {
        let shifted = spec(&format!("sssv:n={n},k={k}"));
        let plain = spec(&format!("ssv:n={n},k={k}"));
        for _ in 0..10 {
            let alpha = random_seed(&plain, &mut rng);
            let a = shifted.image(&alpha).unwrap();
            let b = plain.image(&alpha).unwrap();
            assert!(a
                .entries()
                .iter()
                .zip(b.entries())
                .all(|(&x, &y)| f.sub(x, y) == f.one()));
        }
    }
}

#[test]
fn trdeg_examples() {
    let g = spec("trdeg:n=1,k=1,vdm=true");
    assert_eq!(
        *g.symbolic_image(B).unwrap().at(1),
        poly(&g, "z1*s + z2*s^2 + y1*t")
    );
    let g = spec("trdeg:n=2,k=2");
    assert_eq!(g.seed_arity(), (2 + 1) + 2 + 2 * (2 + 1));

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rc = spec("rc:n=2,r=3");
    let mut alpha = random_seed(&g, &mut rng);
    for v in &mut alpha[3 + 3..] {
        *v = FieldElem::ZERO;
    }
    let rc_alpha: Vec<FieldElem> = alpha[..6].to_vec();
    assert_eq!(g.image(&alpha).unwrap(), rc.image(&rc_alpha).unwrap());
}

#[test]
fn trdeg_matches_its_target_map() {
    for n in 1..=2 {
        for k in 1..=2 {
            let g = spec(&format!("trdeg:n={n},k={k},vdm=true"));
            let image = g.symbolic_image(B).unwrap();
            for i in 1..=g.coordinates() {
                let mut want: Vec<String> =
                    (1..=k + 1).map(|j| format!("z{j}*s^{}", i * j)).collect();
                want.extend((1..=k).map(|j| format!("y{j}*t^{}", i * j)));
                assert_eq!(*image.at(i), poly(&g, &want.join(" + ")));
            }
        }
    }
}

#[test]
fn asss_examples() {
    let g = spec("asss:n=2,k=1,D=3,s=4");
    assert_eq!(g.asss_r().unwrap(), &BigUint::from(1u64 << 48));
    assert!(matches!(
        g.image(&[]),
        Err(GeneratorError::RequiresOverride { .. })
    ));
    assert!(matches!(
        g.symbolic_image(B),
        Err(GeneratorError::RequiresOverride { .. })
    ));
    assert_eq!(g.to_json_value()["R"], "281474976710656");

    assert_eq!(asss_support(2, 4), 6);
    let g = spec("asss:n=2,k=1,D=3,s=4,R=2");
    assert!(g.heuristic_parameters());
    let names = g.seed_names();
    assert!(names.iter().any(|s| s == "y1_2") && !names.iter().any(|s| s.starts_with("y2_")));
    assert_eq!(g.seed_arity(), (2 + 3) + 6 * (1 + 2));
    let g = spec("asss:n=2,k=1,D=4,s=4,R=2");
    assert!(g.seed_names().iter().any(|s| s == "t2_2"));
}

#[test]
fn bms_examples() {
    assert_eq!(bms_support(1, 2), 1);
    assert_eq!(bms_support(2, 4), 6);
    let g = spec("bms:n=2,r=2,s=4");
    assert_eq!(g.seed_arity(), (2 + 3) + 6 * 3);
    let rc = spec("rc:n=2,r=2");
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let f = gl();
    for _ in 0..5 {
        let mut alpha = random_seed(&g, &mut rng);
        for v in &mut alpha[5..11] {
            *v = FieldElem::ZERO;
        }
        let a = g.image(&alpha).unwrap();
        let b = rc.image(&alpha[..5]).unwrap();
        assert!(a
            .entries()
            .iter()
            .zip(b.entries())
            .all(|(&x, &y)| f.sub(x, y) == f.one()));
    }
}

#[test]
fn fs_examples() {
    let g = spec("fs:n=1,w=1,d=1");
    let omega = g.fs().unwrap().omega;
    assert_eq!(g.fs().unwrap().omega_order, 4);
    let w = omega.value();
    assert_eq!(
        sym(&g),
        vec![poly(&g, &format!("{w}*y1")), poly(&g, &format!("{w}*y1"))]
    );

    let g = spec("fs:n=1,w=1,d=2");
    let f = g.field();
    let omega = g.fs().unwrap().omega;
    let (w, w2) = (omega.value(), f.mul(omega, omega).value());
    assert_eq!(
        sym(&g),
        vec![
            poly(&g, &format!("{w}*y1")),
            poly(&g, &format!("{w2}*y1^2"))
        ]
    );

    let g = spec("fs:n=4,w=2,d=2");
    assert_eq!(g.fs().unwrap().omega_order, 16384);
    assert_eq!(g.seed_arity(), 5);
}

#[test]
fn fs_numeric_matches_symbolic() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for text in [
        "fs:n=2,w=2,d=1",
        "fs:n=3,w=1,d=2",
        "fs:n=2,w=2,d=2,order=2-1",
    ] {
        let g = spec(text);
        let image = g.symbolic_image(B).unwrap();
        for _ in 0..10 {
            let alpha = random_seed(&g, &mut rng);
            let mut point = vec![FieldElem::ZERO; g.n()];
            point.extend(&alpha);
            let want: Vec<u64> = image
                .entries()
                .iter()
                .map(|e| e.eval(&point).unwrap().value())
                .collect();
            assert_eq!(g.image(&alpha).unwrap().values(), want, "{text}");
        }
    }
}

#[test]
fn order_variants() {
    let g = spec("fs:n=2,w=2,d=1");
    assert_eq!(
        g.order_variant(&[1, 2]).unwrap().descriptor(),
        g.descriptor()
    );
    let swapped = g.order_variant(&[2, 1]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..5 {
        let alpha = random_seed(&g, &mut rng);
        let a = g.image(&alpha).unwrap();
        let b = swapped.image(&alpha).unwrap();
        assert_eq!(a.at_subset(&[1]), b.at_subset(&[2]));
        assert_eq!(a.at_subset(&[2]), b.at_subset(&[1]));
        assert_eq!(a.at(1), b.at(1));
        assert_eq!(a.at(4), b.at(4));
    }
    assert_eq!(monomial_compatible_order(&[1, 2]), vec![1, 2, 3, 4]);
    assert_eq!(monomial_compatible_order(&[2, 1]), vec![1, 3, 2, 4]);
    let all = all_monomial_compatible_orders(3);
    assert_eq!(all.len(), 6);
    let mut distinct: Vec<_> = all.iter().map(|(_, o)| o.clone()).collect();
    distinct.sort();
    distinct.dedup();
    assert_eq!(distinct.len(), 6);
    assert!(spec("rc:n=2,r=1").order_variant(&[2, 1]).is_err());
}

#[test]
fn compose_examples() {
    let g = spec("sssv:n=2,k=2");
    let d = linear_d(g.field(), 4, &[(1, 1)]);
    let c1 = g.compose(&d, B).unwrap();
    assert_eq!(c1.constant_term(), g.field().one());
    let ys = [
        g.arena().lookup("y1").unwrap(),
        g.arena().lookup("y2").unwrap(),
    ];
    assert_eq!(c1.degree_in(&ys), 1);

    let zero = Circuit::zero(g.field(), &coefficient_arena(4));
    assert!(g.compose(&zero, B).unwrap().is_zero());

    let g = spec("rc:n=1,r=1");
    let d = linear_d(g.field(), 2, &[(2, 1), (1, -1)]);
    assert_eq!(g.compose(&d, B).unwrap(), poly(&g, "y1*t0*t1 - y1*t0"));
    assert!(g.compose(&linear_d(g.field(), 4, &[(1, 1)]), B).is_err());
}

#[test]
fn seed_degree_bounds_hold() {
    for text in [
        "rc:n=3,r=2",
        "ssv:n=3,k=2",
        "sssv:n=2,k=1",
        "trdeg:n=2,k=1",
        "bms:n=2,r=1,s=2",
        "fs:n=2,w=2,d=1",
    ] {
        let g = spec(text);
        assert!(
            g.seed_degree(B).unwrap() <= g.seed_degree_bound().unwrap(),
            "{text}"
        );
    }
    assert_eq!(spec("ssv:n=1,k=1").seed_degree(B).unwrap(), 2);
    assert_eq!(spec("rc:n=2,r=3").seed_degree_bound().unwrap(), 1 + 3 * 3);
}

#[test]
fn descriptors_round_trip() {
    for text in [
        "rc:n=2,r=1",
        "rc:n=2,r=1,vdm=true",
        "ssv:n=3,k=2",
        "sssv:n=4,k=3",
        "trdeg:n=2,k=1",
        "asss:n=3,k=1,D=3,s=32,R=2",
        "bms:n=3,r=1,s=2",
        "fs:n=3,w=2,d=2,order=3-1-2",
    ] {
        let desc: GeneratorDescriptor = text.parse().unwrap();
        assert_eq!(desc.to_string(), text);
        let g = GeneratorSpec::build(&desc, &gl()).unwrap();
        let back = GeneratorSpec::from_json(&g.to_json_value().to_string()).unwrap();
        assert_eq!(back.descriptor(), &desc);
        assert_eq!(back.seed_names(), g.seed_names());
    }
    assert_eq!(
        "fs:n=2,w=1,d=1,order=1-2"
            .parse::<GeneratorDescriptor>()
            .unwrap()
            .to_string(),
        "fs:n=2,w=1,d=1"
    );
    assert!("ks:n=2"
        .parse::<GeneratorDescriptor>()
        .unwrap_err()
        .contains("valid kinds"));
    assert!("ssv:n=2".parse::<GeneratorDescriptor>().is_err());
    assert!("ssv:n=0,k=1".parse::<GeneratorDescriptor>().is_err());
    assert!("fs:n=2,w=1,d=1,order=1-1"
        .parse::<GeneratorDescriptor>()
        .is_err());
    assert!("asss:n=2,k=1,D=2,s=4"
        .parse::<GeneratorDescriptor>()
        .is_err());
}

#[test]
fn fs_needs_a_large_enough_order() {
    let small = PrimeField::small(97).unwrap();
    let desc: GeneratorDescriptor = "fs:n=2,w=2,d=1".parse().unwrap();
    assert!(matches!(
        GeneratorSpec::build(&desc, &small),
        Err(GeneratorError::Field(_))
    ));
}
