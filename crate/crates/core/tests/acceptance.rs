//! Acceptance suite: one test per criterion, each printing a pass line.
//! Every expected value is either frozen from an independent oracle
//! implemented here or asserted exactly against the dual formula.

// index loops keep the symmetric fills and the F2 elimination readable
#![allow(clippy::needless_range_loop)]

use std::time::Instant;

use num::{BigInt, One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use resint_core::bundle::{Bundle, VirtualBundle};
use resint_core::family::{
    dimension_triple, localized_class, main_theorem_expansion, rank_omega, rank_omega_symbolic,
    stabilize, tau_class, ExpansionInputs, KuranishiModel,
};
use resint_core::lattice::{Febd, LatticeClass, SurfaceGeometry, TypeTag};
use resint_core::ring::{ratio, Ctx, GradedClass, RingContext};
use resint_core::scheme::{cone_partial_order, enumerate_collections, in_cone};
use resint_core::series::yau_zaslow_series;

fn test_ctx() -> Ctx {
    RingContext::new(&[("z", 1), ("g1", 1), ("g2", 2), ("g3", 3), ("w1", 1)], 6).unwrap()
}

fn random_chern(rng: &mut ChaCha8Rng, ctx: &Ctx, rank: u32) -> GradedClass {
    let g1 = ctx.variable("g1").unwrap();
    let g2 = ctx.variable("g2").unwrap();
    let g3 = ctx.variable("g3").unwrap();
    let mut c = GradedClass::one(ctx);
    let degrees: [(u32, &[(resint_core::ring::Variable, u32)]); 3] =
        [(1, &[(g1, 1)]), (2, &[(g2, 1)]), (3, &[(g3, 1)])];
    for (deg, powers) in degrees {
        if deg > rank {
            break;
        }
        let coeff = ratio(rng.gen_range(-9..=9), rng.gen_range(1..=5));
        c = c.add(&GradedClass::monomial(ctx, powers, coeff)).unwrap();
    }
    c
}

fn random_bundle(rng: &mut ChaCha8Rng, ctx: &Ctx, max_rank: u32) -> Bundle {
    let rank = rng.gen_range(1..=max_rank);
    Bundle::new(rank, random_chern(rng, ctx, rank)).unwrap()
}

fn random_segre(rng: &mut ChaCha8Rng, ctx: &Ctx) -> GradedClass {
    let g1 = ctx.variable("g1").unwrap();
    let g2 = ctx.variable("g2").unwrap();
    let w1 = ctx.variable("w1").unwrap();
    let mut s = GradedClass::one(ctx);
    for _ in 0..rng.gen_range(1..5) {
        let coeff = ratio(rng.gen_range(-9..=9), rng.gen_range(1..=5));
        let mono = GradedClass::monomial(
            ctx,
            &[
                (g1, rng.gen_range(0..=2)),
                (g2, rng.gen_range(0..=1)),
                (w1, rng.gen_range(0..=1)),
            ],
            coeff,
        );
        s = s.add(&mono).unwrap();
    }
    s
}

#[test]
fn criterion_1_stabilization_invariance() {
    let start = Instant::now();
    let ctx = test_ctx();
    let z = ctx.variable("z").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut checked = 0;
    while checked < 200 {
        let v = VirtualBundle::from_bundle(random_bundle(&mut rng, &ctx, 4));
        let w = if rng.gen_bool(0.25) {
            VirtualBundle::zero()
        } else {
            VirtualBundle::from_bundle(random_bundle(&mut rng, &ctx, 3))
        };
        let base_dim = rng.gen_range(0..4);
        let ed = base_dim as i64 + v.vrank() - 1 - w.vrank();
        if !(0..=6).contains(&ed) {
            continue;
        }
        let model = KuranishiModel::new(v, w, base_dim, random_segre(&mut rng, &ctx)).unwrap();
        let g = VirtualBundle::from_bundle(random_bundle(&mut rng, &ctx, 3));
        let stabilized = stabilize(&model, &g, z).unwrap();
        assert_eq!(
            localized_class(&stabilized, z).unwrap(),
            localized_class(&model, z).unwrap(),
            "stabilization changed the localized class (instance {checked})"
        );
        checked += 1;
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 10,
        "criterion 1 exceeded 10 s: {elapsed:?}"
    );
    println!(
        "[acceptance] criterion 1 stabilization invariance: PASS (200/200 exact, {:.2?})",
        elapsed
    );
}

#[test]
fn criterion_2_whitney_segre_product_law() {
    let ctx = test_ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    for i in 0..200 {
        let e = VirtualBundle::from_bundle(random_bundle(&mut rng, &ctx, 4));
        let f = VirtualBundle::from_bundle(random_bundle(&mut rng, &ctx, 4));
        let sum = e.whitney_sum(&f);
        let lhs = sum.segre_total().unwrap();
        let rhs = e
            .segre_total()
            .unwrap()
            .mul(&f.segre_total().unwrap())
            .unwrap();
        assert_eq!(lhs, rhs, "Segre product law failed (pair {i})");
    }
    println!("[acceptance] criterion 2 Whitney/Segre product law: PASS (200/200 exact)");
}

fn random_geometry(rng: &mut ChaCha8Rng) -> SurfaceGeometry {
    let rank = rng.gen_range(1..=5usize);
    let mut gram = vec![vec![0i64; rank]; rank];
    for i in 0..rank {
        for j in i..rank {
            let v = rng.gen_range(-3..=3);
            gram[i][j] = v;
            gram[j][i] = v;
        }
    }
    let canonical = (0..rank).map(|_| rng.gen_range(-2..=2)).collect();
    SurfaceGeometry::new(
        gram,
        canonical,
        rng.gen_range(0..3),
        rng.gen_range(0..3),
        rng.gen_range(-6..=6),
        rng.gen_range(0..3),
    )
    .unwrap()
}

fn random_vector(rng: &mut ChaCha8Rng, rank: usize) -> Vec<i64> {
    (0..rank).map(|_| rng.gen_range(-3..=3)).collect()
}

#[test]
fn criterion_3_rank_omega_dual_computation() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    for i in 0..100 {
        let g = random_geometry(&mut rng);
        let rank = g.rank();
        let c = LatticeClass::ordinary(random_vector(&mut rng, rank), 3);
        let p = rng.gen_range(1..=3usize);
        let es: Vec<LatticeClass> = (0..p)
            .map(|_| LatticeClass::new(random_vector(&mut rng, rank), 1, Febd::Pg, TypeTag::TypeII))
            .collect();
        // rank_omega runs the dual symbolic route internally against the
        // basis divisors; re-run it against fresh random divisors too.
        let value = rank_omega(&c, &es, &g).unwrap();
        for _ in 0..3 {
            let d = random_vector(&mut rng, rank);
            let sym = rank_omega_symbolic(&c, &es, &d, &g).unwrap();
            assert!(sym[1].is_zero(), "n coefficient survived (instance {i})");
            assert!(sym[2].is_zero(), "n^2 coefficient survived (instance {i})");
            assert_eq!(
                sym[0],
                ratio(value, 1),
                "constant term mismatch (instance {i})"
            );
        }
    }
    println!("[acceptance] criterion 3 rank(omega) dual computation: PASS (100/100 exact, n-free)");
}

/// Solve G K = diag(G) over F2 so that v^2 - K.v is even for every
/// integer vector v; returns None when no characteristic vector exists.
fn characteristic_mod_two(gram: &[Vec<i64>]) -> Option<Vec<i64>> {
    let n = gram.len();
    let mut a: Vec<Vec<u8>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (gram[i][j].rem_euclid(2)) as u8)
                .chain(std::iter::once((gram[i][i].rem_euclid(2)) as u8))
                .collect()
        })
        .collect();
    let mut row = 0;
    let mut pivots = Vec::new();
    for col in 0..n {
        if let Some(r) = (row..n).find(|&r| a[r][col] == 1) {
            a.swap(row, r);
            for rr in 0..n {
                if rr != row && a[rr][col] == 1 {
                    for cc in col..=n {
                        a[rr][cc] ^= a[row][cc];
                    }
                }
            }
            pivots.push((row, col));
            row += 1;
        }
    }
    for r in row..n {
        if a[r][n] == 1 {
            return None;
        }
    }
    let mut k = vec![0i64; n];
    for &(r, c) in &pivots {
        k[c] = a[r][n] as i64;
    }
    Some(k)
}

#[test]
fn criterion_4_dimension_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut checked = 0;
    while checked < 100 {
        let rank = rng.gen_range(1..=5usize);
        let mut gram = vec![vec![0i64; rank]; rank];
        for i in 0..rank {
            for j in i..rank {
                let v = rng.gen_range(-3..=3);
                gram[i][j] = v;
                gram[j][i] = v;
            }
        }
        let Some(canonical) = characteristic_mod_two(&gram) else {
            continue;
        };
        let g = SurfaceGeometry::new(
            gram,
            canonical,
            rng.gen_range(0..3),
            rng.gen_range(0..3),
            0,
            rng.gen_range(0..3),
        )
        .unwrap();
        let c = LatticeClass::ordinary(random_vector(&mut rng, rank), 3);
        let p = rng.gen_range(0..=3usize);
        let es: Vec<LatticeClass> = (0..p)
            .map(|_| LatticeClass::new(random_vector(&mut rng, rank), 1, Febd::Pg, TypeTag::TypeII))
            .collect();
        // dimension_triple asserts a1 + a2 - a3 against the right-hand
        // side internally and errors on any mismatch.
        dimension_triple(&c, &es, &g).unwrap();
        checked += 1;
    }
    println!("[acceptance] criterion 4 dimension identity a1+a2-a3: PASS (100/100 exact)");
}

/// Brute-force oracle: expand prod_{i>=1}(1 - q^i)^(-c2) by multiplying
/// the geometric series for each factor one at a time.
fn product_expansion_oracle(c2: usize, delta_max: usize) -> Vec<BigInt> {
    let mut coeffs = vec![BigInt::zero(); delta_max + 1];
    coeffs[0] = BigInt::one();
    for i in 1..=delta_max {
        for _ in 0..c2 {
            // multiply by 1 + q^i + q^(2i) + ...
            let mut next = coeffs.clone();
            for m in i..=delta_max {
                let add = next[m - i].clone();
                next[m] += add;
            }
            coeffs = next;
        }
    }
    coeffs
}

/// Pentagonal-number recurrence for the partition numbers.
fn partition_oracle(n_max: usize) -> Vec<BigInt> {
    let mut p = vec![BigInt::zero(); n_max + 1];
    p[0] = BigInt::one();
    for n in 1..=n_max {
        let mut acc = BigInt::zero();
        let mut k = 1i64;
        loop {
            let g1 = (k * (3 * k - 1) / 2) as usize;
            if g1 > n {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc += BigInt::from(sign) * &p[n - g1];
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g2 <= n {
                acc += BigInt::from(sign) * &p[n - g2];
            }
            k += 1;
        }
        p[n] = acc;
    }
    p
}

#[test]
fn criterion_5_yau_zaslow_coefficients() {
    let start = Instant::now();
    let s24 = yau_zaslow_series(24, 10);
    let oracle = product_expansion_oracle(24, 10);
    assert_eq!(s24.coeffs(), &oracle[..], "c2 = 24 disagrees with oracle");
    assert_eq!(s24.coeff(1).to_i64(), Some(24));
    assert_eq!(s24.coeff(2).to_i64(), Some(324));
    assert_eq!(s24.coeff(3).to_i64(), Some(3200));

    let s1 = yau_zaslow_series(1, 50);
    let partitions = partition_oracle(50);
    assert_eq!(
        s1.coeffs(),
        &partitions[..],
        "c2 = 1 is not the partition function"
    );
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_millis() < 1000,
        "criterion 5 exceeded 1 s: {elapsed:?}"
    );
    println!(
        "[acceptance] criterion 5 Yau-Zaslow coefficients: PASS (q^10 oracle match, partitions to q^50, {:.2?})",
        elapsed
    );
}

fn vanishing_inputs(
    p: usize,
    p_g: u32,
    r2_trivial: bool,
) -> (
    SurfaceGeometry,
    LatticeClass,
    Vec<LatticeClass>,
    Ctx,
    ExpansionInputs,
) {
    // p orthogonal (-1)-classes with K.e_i = -1, C.e_i = -2:
    // a3 = p, rank omega = p.
    let rank = p + 1;
    let mut diag = vec![-1i64; rank];
    diag[p] = 1;
    let gram: Vec<Vec<i64>> = (0..rank)
        .map(|i| {
            (0..rank)
                .map(|j| if i == j { diag[i] } else { 0 })
                .collect()
        })
        .collect();
    let mut canonical = vec![1i64; rank];
    canonical[p] = 0;
    let g = SurfaceGeometry::new(gram, canonical, p_g, 0, 0, 0).unwrap();
    let es: Vec<LatticeClass> = (0..p)
        .map(|i| {
            let mut coords = vec![0i64; rank];
            coords[i] = 1;
            LatticeClass::new(coords, 1, Febd::Pg, TypeTag::TypeII)
        })
        .collect();
    let mut c_coords = vec![2i64; rank];
    c_coords[p] = 0;
    let c = LatticeClass::ordinary(c_coords, 5);

    let mut vars: Vec<(String, u32)> = vec![
        ("z".to_string(), 1),
        ("nd".to_string(), 1),
        ("g1".to_string(), 1),
        ("g2".to_string(), 2),
        ("cpg".to_string(), p_g.max(1)),
    ];
    for i in 0..p {
        vars.push((format!("h{}", i + 1), 1));
    }
    let var_refs: Vec<(&str, u32)> = vars.iter().map(|(n, d)| (n.as_str(), *d)).collect();
    let ctx = RingContext::new(&var_refs, 8).unwrap();
    let z = ctx.variable("z").unwrap();
    let twist_vars = (0..p)
        .map(|i| ctx.variable(&format!("h{}", i + 1)).unwrap())
        .collect();
    // each deformation bundle has rank 2 so omega has rank 2p - 0 - p = p
    let deformation = (0..p)
        .map(|_| {
            Bundle::new(
                2,
                GradedClass::parse(&ctx, "1 + 1*g1 + 2*nd + 1*g2").unwrap(),
            )
            .unwrap()
        })
        .collect();
    let residual = KuranishiModel::new(
        VirtualBundle::from_bundle(Bundle::trivial(&ctx, 1)),
        VirtualBundle::zero(),
        0,
        GradedClass::one(&ctx),
    )
    .unwrap();
    let inputs = ExpansionInputs {
        hyperplane: z,
        nd_marker: ctx.variable("nd").unwrap(),
        twist_vars,
        deformation,
        v_prime: Bundle::trivial(&ctx, 0),
        w_prime: Bundle::new(1, GradedClass::parse(&ctx, "1 + 1*g1").unwrap()).unwrap(),
        nd_sections: Bundle::trivial(&ctx, 0),
        residual,
        coexist_segre: GradedClass::one(&ctx),
        coexist_vclass: GradedClass::one(&ctx),
        pg_insertion: GradedClass::variable(&ctx, ctx.variable("cpg").unwrap()),
        r2_trivial,
        r1_top: GradedClass::one(&ctx),
        special_assumption: true,
    };
    (g, c, es, ctx, inputs)
}

#[test]
fn criterion_6_k3_type2_vanishing() {
    // a2 = dim B + sum (e^2 - K.e)/2 = 0 for this family of instances.
    for p in 1..=3usize {
        let (g, c, es, _ctx, inputs) = vanishing_inputs(p, 1, true);
        let report = main_theorem_expansion(&c, &es, &g, &inputs).unwrap();
        assert!(
            report.dominating.is_zero(),
            "dominating term did not vanish for p = {p}"
        );
        assert!(report.reassembles());
    }
    // without the genus shift the insertion is absent and the dominating
    // term is generically nonzero
    let (g, c, es, _ctx, inputs) = vanishing_inputs(1, 0, false);
    let report = main_theorem_expansion(&c, &es, &g, &inputs).unwrap();
    assert!(!report.dominating.is_zero());
    println!(
        "[acceptance] criterion 6 K3 type II vanishing: PASS (p = 1..3 vanish; p_g = 0 nonzero)"
    );
}

/// Quotient-expansion oracle independent of `GradedClass::inverse`: solves
/// c * s = 1 degree by degree.
fn inverse_oracle(c: &GradedClass) -> GradedClass {
    let ctx = c.ctx().clone();
    let mut s = GradedClass::one(&ctx);
    for d in 1..=ctx.truncation() {
        // s_d = -sum_{k=1..d} c_k s_{d-k}
        let mut acc = GradedClass::zero(&ctx);
        for k in 1..=d {
            let ck = c.degree_part(k).unwrap();
            let sdk = s.degree_part(d - k).unwrap();
            acc = acc.add(&ck.mul(&sdk).unwrap()).unwrap();
        }
        s = s.sub(&acc).unwrap();
    }
    s
}

#[test]
fn criterion_7_tau_class_twist_independence() {
    let vars: &[(&str, u32)] = &[("z", 1), ("nd", 1), ("g1", 1), ("g2", 2)];
    let ctx = RingContext::new(vars, 6).unwrap();
    let z = ctx.variable("z").unwrap();
    let nd = ctx.variable("nd").unwrap();
    let g1 = ctx.variable("g1").unwrap();
    let g2 = ctx.variable("g2").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(707);

    let random_nd_bundle = |rng: &mut ChaCha8Rng, nd_coeff: i64, rank: u32| {
        let mut c = GradedClass::one(&ctx)
            .add(&GradedClass::monomial(
                &ctx,
                &[(g1, 1)],
                ratio(rng.gen_range(-5..=5), rng.gen_range(1..=3)),
            ))
            .unwrap()
            .add(&GradedClass::monomial(&ctx, &[(nd, 1)], ratio(nd_coeff, 1)))
            .unwrap();
        if rank >= 2 {
            c = c
                .add(&GradedClass::monomial(
                    &ctx,
                    &[(g2, 1)],
                    ratio(rng.gen_range(-5..=5), rng.gen_range(1..=3)),
                ))
                .unwrap()
                .add(&GradedClass::monomial(
                    &ctx,
                    &[(nd, 1), (g1, 1)],
                    ratio(rng.gen_range(-5..=5), 1),
                ))
                .unwrap();
        }
        Bundle::new(rank, c).unwrap()
    };

    let mut checked = 0;
    while checked < 50 {
        let plus_rank = rng.gen_range(1..=3u32);
        let minus_rank = rng.gen_range(0..=plus_rank);
        let seeds: Vec<i64> = (0..4).map(|_| rng.gen_range(-5..=5)).collect();
        let build = |rng: &mut ChaCha8Rng, shift: &[i64]| {
            let plus = vec![
                random_nd_bundle(rng, shift[0], plus_rank),
                random_nd_bundle(rng, shift[1], 1),
            ];
            let minus = if minus_rank == 0 {
                vec![
                    Bundle::line(&GradedClass::monomial(&ctx, &[(nd, 1)], ratio(shift[2], 1)))
                        .unwrap(),
                ]
            } else {
                vec![
                    random_nd_bundle(rng, shift[2], minus_rank),
                    Bundle::line(&GradedClass::monomial(&ctx, &[(nd, 1)], ratio(shift[3], 1)))
                        .unwrap(),
                ]
            };
            VirtualBundle::difference(plus, minus)
        };
        // two draws share every twist-free coefficient stream but carry
        // different nd data
        let mut rng_a = ChaCha8Rng::seed_from_u64(rng.gen());
        let mut rng_b = rng_a.clone();
        let shifted: Vec<i64> = (0..4).map(|_| rng.gen_range(-5..=5)).collect();
        let omega_a = build(&mut rng_a, &seeds);
        let omega_b = build(&mut rng_b, &shifted);
        if omega_a.vrank() < 0 || omega_a.vrank() > 6 {
            continue;
        }
        let tau_a = tau_class(&omega_a, z, nd).unwrap();
        let tau_b = tau_class(&omega_b, z, nd).unwrap();
        assert_eq!(
            tau_a, tau_b,
            "tau changed under a shift of the nd-dependent summands"
        );

        // Lemma-9-style representative: zero the marker in every summand
        // first, then expand the quotient with the degree-by-degree oracle.
        let (plus, minus) = omega_a.summands();
        let strip = |b: &Bundle| Bundle::new(b.rank(), b.ctotal().substitute_zero(nd)).unwrap();
        let mut num = GradedClass::one(&ctx);
        for b in plus {
            num = num.mul(strip(b).ctotal()).unwrap();
        }
        let mut den = GradedClass::one(&ctx);
        for b in minus {
            den = den.mul(strip(b).ctotal()).unwrap();
        }
        let oracle_total = num.mul(&inverse_oracle(&den)).unwrap();
        let oracle_tau = oracle_total
            .degree_part(omega_a.vrank() as u32)
            .unwrap()
            .substitute_one(z);
        assert_eq!(tau_a.tau, oracle_tau, "tau disagrees with the n = 0 oracle");
        checked += 1;
    }
    println!("[acceptance] criterion 7 tau-class twist independence: PASS (50/50 exact)");
}

#[test]
fn criterion_8_combinatorics_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for _ in 0..40 {
        let rank = rng.gen_range(2..=4usize);
        let mut gram = vec![vec![0i64; rank]; rank];
        for i in 0..rank {
            for j in i..rank {
                let v = rng.gen_range(-2..=1);
                gram[i][j] = v;
                gram[j][i] = v;
            }
        }
        let g = SurfaceGeometry::new(gram, vec![0; rank], 0, 0, 0, 0).unwrap();
        let c = LatticeClass::ordinary(random_vector(&mut rng, rank), 3);
        let n = rng.gen_range(1..=8usize);
        let candidates: Vec<LatticeClass> = (0..n)
            .map(|_| {
                LatticeClass::new(
                    random_vector(&mut rng, rank),
                    rng.gen_range(0..=2),
                    Febd::Pg,
                    TypeTag::TypeII,
                )
            })
            .collect();
        let max_size = rng.gen_range(1..=n);
        let fast = enumerate_collections(&c, &candidates, &g, max_size).unwrap();

        // Naive oracle: filter every subset by the defining conditions.
        let mut oracle: Vec<Vec<usize>> = Vec::new();
        for mask in 1u32..(1 << n) {
            let subset: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
            if subset.len() > max_size {
                continue;
            }
            let ok = subset.iter().all(|&i| {
                let e = &candidates[i];
                resint_core::lattice::is_exceptional(e, &g).unwrap()
                    && resint_core::lattice::pair(&c, e, &g).unwrap() < 0
            }) && subset.iter().enumerate().all(|(a, &i)| {
                subset[a + 1..].iter().all(|&j| {
                    resint_core::lattice::pair(&candidates[i], &candidates[j], &g).unwrap() >= 0
                })
            });
            if ok {
                oracle.push(subset);
            }
        }
        oracle.sort();
        let got: Vec<Vec<usize>> = fast.iter().map(|c| c.member_indices.clone()).collect();
        assert_eq!(got, oracle, "enumeration diverged from the subset oracle");

        // partial order sanity on the first few collections
        let head: Vec<_> = fast.into_iter().take(10).collect();
        let edges = cone_partial_order(&head);
        for &(a, b) in &edges {
            assert!(!edges.contains(&(b, a)), "antisymmetry violated");
            for &(x, y) in &edges {
                if x == b {
                    assert!(edges.contains(&(a, y)), "transitivity violated");
                }
            }
        }
    }
    // spot-check the bounded cone membership used by the partial order
    assert!(in_cone(&[2, 3], &[&[1, 0], &[0, 1]]));
    assert!(!in_cone(&[1, 1], &[&[2, 0], &[0, 2]]));
    println!(
        "[acceptance] criterion 8 combinatorics oracle equivalence: PASS (subsets <= 8 exhaustive)"
    );
}
