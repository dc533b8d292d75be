//! Task execution. Every task produces a deterministic block of report
//! lines and a pass/fail flag; randomized property tasks draw from a
//! stream derived from the job seed and the task index.

use num::{BigRational, One};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use resint_core::bundle::{Bundle, VirtualBundle};
use resint_core::family::{
    chi_line, dimension_triple, fiber_product_vclass, localized_class, main_theorem_expansion,
    rank_omega, stabilize, tau_class, ExpansionInputs, KuranishiModel,
};
use resint_core::lattice::{
    adjunction_delta, expected_dimension, is_exceptional, pair, type1_codimension,
};
use resint_core::ring::{ratio, Ctx, GradedClass, RingContext};
use resint_core::scheme::{cone_partial_order, enumerate_collections, linearize};
use resint_core::series::{k3_type2_vanishing, virtual_count_report, yau_zaslow_series};

use crate::config::{BundleDecl, ModelDecl, ResolvedJob, TaskDecl};

pub struct TaskOutcome {
    pub lines: Vec<String>,
    pub pass: bool,
}

struct Block {
    lines: Vec<String>,
    pass: bool,
}

impl Block {
    fn new() -> Self {
        Block {
            lines: Vec::new(),
            pass: true,
        }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.lines.push(msg.into());
        self.pass = false;
    }

    /// Prints a class in canonical form and self-checks the round-trip.
    fn class(&mut self, ctx: &Ctx, label: &str, class: &GradedClass) {
        let rendered = class.to_string();
        self.line(format!("class {label} = {rendered}"));
        match GradedClass::parse(ctx, &rendered) {
            Ok(back) if back == *class => {}
            _ => self.fail(format!("check roundtrip({label}) fail")),
        }
    }

    fn expect(&mut self, got: &str, expect: &Option<String>) {
        if let Some(want) = expect {
            if want == got {
                self.line("check expect pass");
            } else {
                self.fail(format!("check expect fail: got {got}, expected {want}"));
            }
        }
    }

    fn done(self) -> TaskOutcome {
        TaskOutcome {
            lines: self.lines,
            pass: self.pass,
        }
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        format!("{}", r.numer())
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn build_bundle(ctx: &Ctx, decl: &BundleDecl) -> Result<Bundle, String> {
    let ctotal = GradedClass::parse(ctx, &decl.ctotal).map_err(|e| e.to_string())?;
    Bundle::new(decl.rank, ctotal).map_err(|e| e.to_string())
}

fn build_model(ctx: &Ctx, decl: &ModelDecl) -> Result<KuranishiModel, String> {
    let mut v = VirtualBundle::zero();
    for b in &decl.v {
        v = v.whitney_sum(&VirtualBundle::from_bundle(build_bundle(ctx, b)?));
    }
    let mut w = VirtualBundle::zero();
    for b in &decl.w {
        w = w.whitney_sum(&VirtualBundle::from_bundle(build_bundle(ctx, b)?));
    }
    let segre = GradedClass::parse(ctx, &decl.moduli_segre).map_err(|e| e.to_string())?;
    KuranishiModel::new(v, w, decl.base_dim, segre).map_err(|e| e.to_string())
}

fn task_rng(seed: u64, index: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn check_ctx() -> Ctx {
    RingContext::new(&[("z", 1), ("g1", 1), ("g2", 2), ("g3", 3), ("w1", 1)], 6).unwrap()
}

fn random_bundle(rng: &mut ChaCha8Rng, ctx: &Ctx, max_rank: u32) -> Bundle {
    let rank = rng.gen_range(1..=max_rank);
    let g1 = ctx.variable("g1").unwrap();
    let g2 = ctx.variable("g2").unwrap();
    let g3 = ctx.variable("g3").unwrap();
    let mut c = GradedClass::one(ctx);
    for (deg, var) in [(1u32, g1), (2, g2), (3, g3)] {
        if deg > rank {
            break;
        }
        let coeff = ratio(rng.gen_range(-9..=9), rng.gen_range(1..=5));
        c = c
            .add(&GradedClass::monomial(ctx, &[(var, 1)], coeff))
            .unwrap();
    }
    Bundle::new(rank, c).unwrap()
}

fn random_segre(rng: &mut ChaCha8Rng, ctx: &Ctx) -> GradedClass {
    let g1 = ctx.variable("g1").unwrap();
    let w1 = ctx.variable("w1").unwrap();
    let mut s = GradedClass::one(ctx);
    for _ in 0..rng.gen_range(1..4) {
        let coeff = ratio(rng.gen_range(-9..=9), rng.gen_range(1..=5));
        let mono = GradedClass::monomial(
            ctx,
            &[(g1, rng.gen_range(0..=2)), (w1, rng.gen_range(0..=1))],
            coeff,
        );
        s = s.add(&mono).unwrap();
    }
    s
}

pub fn execute(job: &ResolvedJob, task: &TaskDecl, index: usize, seed: u64) -> TaskOutcome {
    let mut b = Block::new();
    let g = &job.geometry;
    match task {
        TaskDecl::Pair { a, b: rhs, expect } => {
            b.line(format!("param a = {a}"));
            b.line(format!("param b = {rhs}"));
            match pair(job.class(a), job.class(rhs), g) {
                Ok(v) => {
                    b.line(format!("result = {v}"));
                    b.expect(&v.to_string(), expect);
                }
                Err(e) => b.fail(format!("error = {e}")),
            }
        }
        TaskDecl::IsExceptional { e, expect } => {
            b.line(format!("param e = {e}"));
            match is_exceptional(job.class(e), g) {
                Ok(v) => {
                    b.line(format!("result = {v}"));
                    b.expect(&v.to_string(), expect);
                }
                Err(err) => b.fail(format!("error = {err}")),
            }
        }
        TaskDecl::ExpectedDimension { e, expect } => {
            b.line(format!("param e = {e}"));
            match expected_dimension(job.class(e), g) {
                Ok(v) => {
                    b.line(format!("result = {v}"));
                    b.expect(&v.to_string(), expect);
                }
                Err(err) => b.fail(format!("error = {err}")),
            }
        }
        TaskDecl::Type1Codimension { e, expect } => {
            b.line(format!("param e = {e}"));
            match type1_codimension(job.class(e), g) {
                Ok(v) => {
                    b.line(format!("result = {v}"));
                    b.expect(&v.to_string(), expect);
                }
                Err(err) => b.fail(format!("error = {err}")),
            }
        }
        TaskDecl::AdjunctionDelta { l_sq, expect } => {
            b.line(format!("param l_sq = {l_sq}"));
            match adjunction_delta(*l_sq) {
                Ok(v) => {
                    b.line(format!("result = {v}"));
                    b.expect(&v.to_string(), expect);
                }
                Err(err) => b.fail(format!("error = {err}")),
            }
        }
        TaskDecl::ChiLine { c, expect } => {
            b.line(format!("param c = {c}"));
            match chi_line(job.class(c), g) {
                Ok(v) => {
                    let s = fmt_rational(&v);
                    b.line(format!("result = {s}"));
                    b.expect(&s, expect);
                }
                Err(err) => b.fail(format!("error = {err}")),
            }
        }
        TaskDecl::RankOmega { c, es, expect } => {
            b.line(format!("param c = {c}"));
            b.line(format!("param es = [{}]", es.join(", ")));
            let classes: Vec<_> = es.iter().map(|e| job.class(e).clone()).collect();
            match rank_omega(job.class(c), &classes, g) {
                Ok(v) => {
                    b.line(format!("result = {v}"));
                    b.line("check n_independence pass");
                    b.expect(&v.to_string(), expect);
                }
                Err(err) => b.fail(format!("error = {err}")),
            }
        }
        TaskDecl::DimensionTriple { c, es } => {
            b.line(format!("param c = {c}"));
            b.line(format!("param es = [{}]", es.join(", ")));
            let classes: Vec<_> = es.iter().map(|e| job.class(e).clone()).collect();
            match dimension_triple(job.class(c), &classes, g) {
                Ok((a1, a2, a3)) => {
                    b.line(format!("a1 = {a1}"));
                    b.line(format!("a2 = {a2}"));
                    b.line(format!("a3 = {a3}"));
                    b.line("check identity pass");
                }
                Err(err) => b.fail(format!("error = {err}")),
            }
        }
        TaskDecl::YauZaslow {
            c2,
            delta_max,
            table_path,
        } => {
            b.line(format!("param c2 = {c2}"));
            b.line(format!("param delta_max = {delta_max}"));
            let series = yau_zaslow_series(*c2, *delta_max);
            for (delta, n) in series.coeffs().iter().enumerate() {
                b.line(format!("coeff {delta} = {n}"));
            }
            if let Some(path) = table_path {
                match std::fs::write(path, series.to_table()) {
                    Ok(()) => b.line(format!("table = {path}")),
                    Err(e) => b.fail(format!("error = cannot write {path}: {e}")),
                }
            }
        }
        TaskDecl::VirtualCount { l_sq, c2, expect } => {
            b.line(format!("param l_sq = {l_sq}"));
            b.line(format!("param c2 = {c2}"));
            match virtual_count_report(*l_sq, *c2) {
                Ok((delta, n)) => {
                    b.line(format!("delta = {delta}"));
                    b.line(format!("n_delta = {n}"));
                    b.expect(&format!("{delta} {n}"), expect);
                }
                Err(err) => b.fail(format!("error = {err}")),
            }
        }
        TaskDecl::K3Vanishing {
            p_g,
            r2_trivial,
            p,
            expect,
        } => {
            b.line(format!("param p_g = {p_g}"));
            b.line(format!("param r2_trivial = {r2_trivial}"));
            b.line(format!("param p = {p}"));
            let v = k3_type2_vanishing(*p_g, *r2_trivial, *p);
            b.line(format!("vanishes = {v}"));
            b.expect(&v.to_string(), expect);
        }
        TaskDecl::EnumerateCollections {
            c,
            candidates,
            max_size,
        } => {
            b.line(format!("param c = {c}"));
            b.line(format!("param candidates = [{}]", candidates.join(", ")));
            b.line(format!("param max_size = {max_size}"));
            let cand: Vec<_> = candidates.iter().map(|e| job.class(e).clone()).collect();
            match enumerate_collections(job.class(c), &cand, g, *max_size) {
                Ok(cols) => {
                    b.line(format!("count = {}", cols.len()));
                    for (k, col) in cols.iter().enumerate() {
                        b.line(format!("collection {k} = {:?}", col.member_indices));
                    }
                }
                Err(err) => b.fail(format!("error = {err}")),
            }
        }
        TaskDecl::Schedule {
            c,
            candidates,
            max_size,
        } => {
            b.line(format!("param c = {c}"));
            b.line(format!("param candidates = [{}]", candidates.join(", ")));
            b.line(format!("param max_size = {max_size}"));
            let cand: Vec<_> = candidates.iter().map(|e| job.class(e).clone()).collect();
            match enumerate_collections(job.class(c), &cand, g, *max_size) {
                Ok(cols) => {
                    let edges = cone_partial_order(&cols);
                    b.line(format!("edges = {edges:?}"));
                    match linearize(&cols, &edges) {
                        Ok(schedule) => {
                            for (k, col) in schedule.ordered.iter().enumerate() {
                                b.line(format!("order {k} = {:?}", col.member_indices));
                            }
                            for (k, col) in schedule.blowup_order().iter().enumerate() {
                                b.line(format!("blowup {k} = {:?}", col.member_indices));
                            }
                            if !schedule.is_linear_extension() {
                                b.fail("check linear_extension fail");
                            } else {
                                b.line("check linear_extension pass");
                            }
                        }
                        Err(err) => b.fail(format!("error = {err}")),
                    }
                }
                Err(err) => b.fail(format!("error = {err}")),
            }
        }
        TaskDecl::LocalizedClass { model, hyperplane } => {
            b.line(format!("param hyperplane = {hyperplane}"));
            match build_model(&job.ctx, model) {
                Ok(k) => {
                    b.line(format!("ed = {}", k.expected_dimension()));
                    match localized_class(&k, job.variable(hyperplane)) {
                        Ok(class) => b.class(&job.ctx, "localized", &class),
                        Err(err) => b.fail(format!("error = {err}")),
                    }
                }
                Err(err) => b.fail(format!("error = {err}")),
            }
        }
        TaskDecl::FiberProduct {
            a,
            b: rhs,
            insertion,
        } => {
            let ca = job.parse_class(a);
            let cb = job.parse_class(rhs);
            let ci = job.parse_class(insertion);
            match fiber_product_vclass(&ca, &cb, &ci) {
                Ok(v) => b.class(&job.ctx, "product", &v),
                Err(err) => b.fail(format!("error = {err}")),
            }
        }
        TaskDecl::DegreePart { class, degree } => {
            b.line(format!("param degree = {degree}"));
            let c = job.parse_class(class);
            match c.degree_part(*degree) {
                Ok(v) => b.class(&job.ctx, "part", &v),
                Err(err) => b.fail(format!("error = {err}")),
            }
        }
        TaskDecl::StabilizationCheck { trials } => {
            b.line(format!("param trials = {trials}"));
            let ctx = check_ctx();
            let z = ctx.variable("z").unwrap();
            let mut rng = task_rng(seed, index);
            let mut done = 0;
            while done < *trials {
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
                let k = KuranishiModel::new(v, w, base_dim, random_segre(&mut rng, &ctx)).unwrap();
                let gb = VirtualBundle::from_bundle(random_bundle(&mut rng, &ctx, 3));
                let left = localized_class(&stabilize(&k, &gb, z).unwrap(), z).unwrap();
                let right = localized_class(&k, z).unwrap();
                if left != right {
                    b.fail(format!(
                        "check stabilization fail at trial {done}: stabilized {left} != original {right}"
                    ));
                    return b.done();
                }
                done += 1;
            }
            b.line("check stabilization pass");
        }
        TaskDecl::WhitneyCheck { trials } => {
            b.line(format!("param trials = {trials}"));
            let ctx = check_ctx();
            let mut rng = task_rng(seed, index);
            for t in 0..*trials {
                let e = VirtualBundle::from_bundle(random_bundle(&mut rng, &ctx, 4));
                let f = VirtualBundle::from_bundle(random_bundle(&mut rng, &ctx, 4));
                let lhs = e.whitney_sum(&f).segre_total().unwrap();
                let rhs = e
                    .segre_total()
                    .unwrap()
                    .mul(&f.segre_total().unwrap())
                    .unwrap();
                if lhs != rhs {
                    b.fail(format!(
                        "check whitney fail at trial {t}: sum {lhs} != product {rhs}"
                    ));
                    return b.done();
                }
            }
            b.line("check whitney pass");
        }
        TaskDecl::TauCheck { trials } => {
            b.line(format!("param trials = {trials}"));
            let ctx = RingContext::new(&[("z", 1), ("nd", 1), ("g1", 1), ("g2", 2)], 6).unwrap();
            let z = ctx.variable("z").unwrap();
            let nd = ctx.variable("nd").unwrap();
            let g1 = ctx.variable("g1").unwrap();
            let mut rng = task_rng(seed, index);
            let mut done = 0;
            while done < *trials {
                let base = ratio(rng.gen_range(-5..=5), rng.gen_range(1..=3));
                let rank = rng.gen_range(1..=3u32);
                let with_nd = |nd_coeff: i64| {
                    let c = GradedClass::one(&ctx)
                        .add(&GradedClass::monomial(&ctx, &[(g1, 1)], base.clone()))
                        .unwrap()
                        .add(&GradedClass::monomial(&ctx, &[(nd, 1)], ratio(nd_coeff, 1)))
                        .unwrap();
                    Bundle::new(rank, c).unwrap()
                };
                let omega_a = VirtualBundle::from_bundle(with_nd(rng.gen_range(-5..=5)));
                let omega_b = VirtualBundle::from_bundle(with_nd(rng.gen_range(-5..=5)));
                let ta = tau_class(&omega_a, z, nd).unwrap();
                let tb = tau_class(&omega_b, z, nd).unwrap();
                if ta != tb {
                    b.fail(format!(
                        "check tau fail at trial {done}: {} != {}",
                        ta.tau, tb.tau
                    ));
                    return b.done();
                }
                done += 1;
            }
            b.line("check tau pass");
        }
        TaskDecl::Expansion(t) => {
            b.line(format!("param c = {}", t.c));
            b.line(format!("param es = [{}]", t.es.join(", ")));
            let classes: Vec<_> = t.es.iter().map(|e| job.class(e).clone()).collect();
            let build = || -> Result<ExpansionInputs, String> {
                Ok(ExpansionInputs {
                    hyperplane: job.variable(&t.hyperplane),
                    nd_marker: job.variable(&t.nd_marker),
                    twist_vars: t.twist_vars.iter().map(|v| job.variable(v)).collect(),
                    deformation: t
                        .deformation
                        .iter()
                        .map(|d| build_bundle(&job.ctx, d))
                        .collect::<Result<_, _>>()?,
                    v_prime: build_bundle(&job.ctx, &t.v_prime)?,
                    w_prime: build_bundle(&job.ctx, &t.w_prime)?,
                    nd_sections: build_bundle(&job.ctx, &t.nd_sections)?,
                    residual: build_model(&job.ctx, &t.residual)?,
                    coexist_segre: job.parse_class(&t.coexist_segre),
                    coexist_vclass: job.parse_class(&t.coexist_vclass),
                    pg_insertion: job.parse_class(&t.pg_insertion),
                    r2_trivial: t.r2_trivial,
                    r1_top: job.parse_class(&t.r1_top),
                    special_assumption: t.special_assumption,
                })
            };
            match build() {
                Ok(inputs) => match main_theorem_expansion(job.class(&t.c), &classes, g, &inputs) {
                    Ok(report) => {
                        b.line(format!("a1 = {}", report.a1));
                        b.line(format!("a2 = {}", report.a2));
                        b.line(format!("a3 = {}", report.a3));
                        b.line(format!("rank_omega = {}", report.rank_omega));
                        b.line(format!("conditional = {}", report.conditional));
                        b.class(&job.ctx, "dominating", &report.dominating);
                        for (r, t) in &report.tau_by_power {
                            b.class(&job.ctx, &format!("tau_{r}"), t);
                        }
                        for (label, class) in &report.corrections {
                            b.class(&job.ctx, &format!("correction({label})"), class);
                        }
                        if report.reassembles() {
                            b.line("check reassembly pass");
                        } else {
                            b.fail("check reassembly fail");
                        }
                        let clean = inputs
                            .twist_vars
                            .iter()
                            .all(|&h| report.dominating.is_free_of(h));
                        if clean {
                            b.line("check dominating_twist_free pass");
                        } else {
                            b.fail("check dominating_twist_free fail");
                        }
                    }
                    Err(err) => b.fail(format!("error = {err}")),
                },
                Err(err) => b.fail(format!("error = {err}")),
            }
        }
    }
    b.done()
}
