//! Job configuration: a single JSON document declaring the ring context,
//! the surface geometry, named lattice classes, and an ordered task list.
//! Rationals inside class strings are written "p/q" to stay exact.

use std::collections::BTreeMap;

use serde::Deserialize;

use resint_core::lattice::{Febd, LatticeClass, SurfaceGeometry, TypeTag};
use resint_core::ring::{Ctx, GradedClass, RingContext, Variable};

#[derive(Debug)]
pub struct ValidationError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ValidationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid field `{}`: {}", self.field, self.message)
    }
}

impl std::error::Error for ValidationError {}

fn invalid(field: impl Into<String>, message: impl ToString) -> ValidationError {
    ValidationError {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub truncation: u32,
    #[serde(default)]
    pub variables: Vec<VarDecl>,
    pub geometry: GeometryDecl,
    #[serde(default)]
    pub classes: BTreeMap<String, ClassDecl>,
    pub tasks: Vec<TaskDecl>,
    #[serde(default)]
    pub output_path: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarDecl {
    pub name: String,
    pub degree: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryDecl {
    pub gram: Vec<Vec<i64>>,
    pub canonical: Vec<i64>,
    pub p_g: u32,
    pub q: u32,
    pub c2: i64,
    pub dim_base: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassDecl {
    pub coords: Vec<i64>,
    pub degree_rel: i64,
    #[serde(default = "default_febd")]
    pub febd: String,
    #[serde(default = "default_tag")]
    pub type_tag: String,
}

fn default_febd() -> String {
    "pg".to_string()
}

fn default_tag() -> String {
    "ordinary".to_string()
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct BundleDecl {
    pub rank: u32,
    pub ctotal: String,
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct ModelDecl {
    pub v: Vec<BundleDecl>,
    #[serde(default)]
    pub w: Vec<BundleDecl>,
    pub base_dim: u32,
    pub moduli_segre: String,
}

#[derive(Debug, Deserialize, Clone)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TaskDecl {
    Pair {
        a: String,
        b: String,
        #[serde(default)]
        expect: Option<String>,
    },
    IsExceptional {
        e: String,
        #[serde(default)]
        expect: Option<String>,
    },
    ExpectedDimension {
        e: String,
        #[serde(default)]
        expect: Option<String>,
    },
    Type1Codimension {
        e: String,
        #[serde(default)]
        expect: Option<String>,
    },
    AdjunctionDelta {
        l_sq: i64,
        #[serde(default)]
        expect: Option<String>,
    },
    ChiLine {
        c: String,
        #[serde(default)]
        expect: Option<String>,
    },
    RankOmega {
        c: String,
        es: Vec<String>,
        #[serde(default)]
        expect: Option<String>,
    },
    DimensionTriple {
        c: String,
        es: Vec<String>,
    },
    YauZaslow {
        c2: u32,
        delta_max: usize,
        /// Optional destination for the newline-delimited "delta n_delta"
        /// table.
        #[serde(default)]
        table_path: Option<String>,
    },
    VirtualCount {
        l_sq: i64,
        c2: u32,
        #[serde(default)]
        expect: Option<String>,
    },
    K3Vanishing {
        p_g: u32,
        r2_trivial: bool,
        p: u32,
        #[serde(default)]
        expect: Option<String>,
    },
    EnumerateCollections {
        c: String,
        candidates: Vec<String>,
        max_size: usize,
    },
    Schedule {
        c: String,
        candidates: Vec<String>,
        max_size: usize,
    },
    LocalizedClass {
        model: ModelDecl,
        hyperplane: String,
    },
    FiberProduct {
        a: String,
        b: String,
        insertion: String,
    },
    DegreePart {
        class: String,
        degree: u32,
    },
    StabilizationCheck {
        trials: u32,
    },
    WhitneyCheck {
        trials: u32,
    },
    TauCheck {
        trials: u32,
    },
    Expansion(Box<ExpansionTask>),
}

#[derive(Debug, Deserialize, Clone)]
#[serde(deny_unknown_fields)]
pub struct ExpansionTask {
    pub c: String,
    pub es: Vec<String>,
    pub hyperplane: String,
    pub nd_marker: String,
    pub twist_vars: Vec<String>,
    pub deformation: Vec<BundleDecl>,
    pub v_prime: BundleDecl,
    pub w_prime: BundleDecl,
    pub nd_sections: BundleDecl,
    pub residual: ModelDecl,
    pub coexist_segre: String,
    pub coexist_vclass: String,
    pub pg_insertion: String,
    pub r2_trivial: bool,
    pub r1_top: String,
    pub special_assumption: bool,
}

impl TaskDecl {
    pub fn kind_name(&self) -> &'static str {
        match self {
            TaskDecl::Pair { .. } => "pair",
            TaskDecl::IsExceptional { .. } => "is_exceptional",
            TaskDecl::ExpectedDimension { .. } => "expected_dimension",
            TaskDecl::Type1Codimension { .. } => "type1_codimension",
            TaskDecl::AdjunctionDelta { .. } => "adjunction_delta",
            TaskDecl::ChiLine { .. } => "chi_line",
            TaskDecl::RankOmega { .. } => "rank_omega",
            TaskDecl::DimensionTriple { .. } => "dimension_triple",
            TaskDecl::YauZaslow { .. } => "yau_zaslow",
            TaskDecl::VirtualCount { .. } => "virtual_count",
            TaskDecl::K3Vanishing { .. } => "k3_vanishing",
            TaskDecl::EnumerateCollections { .. } => "enumerate_collections",
            TaskDecl::Schedule { .. } => "schedule",
            TaskDecl::LocalizedClass { .. } => "localized_class",
            TaskDecl::FiberProduct { .. } => "fiber_product",
            TaskDecl::DegreePart { .. } => "degree_part",
            TaskDecl::StabilizationCheck { .. } => "stabilization_check",
            TaskDecl::WhitneyCheck { .. } => "whitney_check",
            TaskDecl::TauCheck { .. } => "tau_check",
            TaskDecl::Expansion { .. } => "expansion",
        }
    }
}

/// Fully validated job: the ring context is built, every named class is
/// resolved, and every task argument is known to refer to declared data.
pub struct ResolvedJob {
    pub ctx: Ctx,
    pub geometry: SurfaceGeometry,
    pub classes: BTreeMap<String, LatticeClass>,
    pub tasks: Vec<TaskDecl>,
    pub output_path: Option<String>,
    pub truncation: u32,
}

impl ResolvedJob {
    pub fn class(&self, name: &str) -> &LatticeClass {
        &self.classes[name]
    }

    pub fn variable(&self, name: &str) -> Variable {
        self.ctx.variable(name).expect("validated variable")
    }

    pub fn parse_class(&self, s: &str) -> GradedClass {
        GradedClass::parse(&self.ctx, s).expect("validated class string")
    }
}

pub fn validate(config: JobConfig) -> Result<ResolvedJob, ValidationError> {
    let vars: Vec<(&str, u32)> = config
        .variables
        .iter()
        .map(|v| (v.name.as_str(), v.degree))
        .collect();
    let ctx = RingContext::new(&vars, config.truncation).map_err(|e| invalid("variables", e))?;

    let geometry = SurfaceGeometry::new(
        config.geometry.gram,
        config.geometry.canonical,
        config.geometry.p_g,
        config.geometry.q,
        config.geometry.c2,
        config.geometry.dim_base,
    )
    .map_err(|e| invalid("geometry", e))?;

    let mut classes = BTreeMap::new();
    for (name, decl) in &config.classes {
        if decl.coords.len() != geometry.rank() {
            return Err(invalid(
                format!("classes.{name}.coords"),
                format!(
                    "length {} does not match lattice rank {}",
                    decl.coords.len(),
                    geometry.rank()
                ),
            ));
        }
        let febd = match decl.febd.as_str() {
            "zero" => Febd::Zero,
            "pg" => Febd::Pg,
            other => {
                return Err(invalid(
                    format!("classes.{name}.febd"),
                    format!("unknown mode `{other}` (expected `zero` or `pg`)"),
                ))
            }
        };
        let type_tag = match decl.type_tag.as_str() {
            "type1" => TypeTag::TypeI,
            "type2" => TypeTag::TypeII,
            "ordinary" => TypeTag::Ordinary,
            other => {
                return Err(invalid(
                    format!("classes.{name}.type_tag"),
                    format!("unknown tag `{other}`"),
                ))
            }
        };
        classes.insert(
            name.clone(),
            LatticeClass::new(decl.coords.clone(), decl.degree_rel, febd, type_tag),
        );
    }

    for (i, task) in config.tasks.iter().enumerate() {
        validate_task(i, task, &classes, &ctx, config.truncation)?;
    }

    Ok(ResolvedJob {
        ctx,
        geometry,
        classes,
        tasks: config.tasks,
        output_path: config.output_path,
        truncation: config.truncation,
    })
}

fn check_class_name(
    task: usize,
    field: &str,
    name: &str,
    classes: &BTreeMap<String, LatticeClass>,
) -> Result<(), ValidationError> {
    if classes.contains_key(name) {
        Ok(())
    } else {
        Err(invalid(
            format!("tasks[{task}].{field}"),
            format!("undeclared class `{name}`"),
        ))
    }
}

fn check_class_string(task: usize, field: &str, s: &str, ctx: &Ctx) -> Result<(), ValidationError> {
    GradedClass::parse(ctx, s)
        .map(|_| ())
        .map_err(|e| invalid(format!("tasks[{task}].{field}"), e))
}

fn check_variable(task: usize, field: &str, name: &str, ctx: &Ctx) -> Result<(), ValidationError> {
    if ctx.variable(name).is_some() {
        Ok(())
    } else {
        Err(invalid(
            format!("tasks[{task}].{field}"),
            format!("undeclared variable `{name}`"),
        ))
    }
}

fn check_bundle(
    task: usize,
    field: &str,
    decl: &BundleDecl,
    ctx: &Ctx,
) -> Result<(), ValidationError> {
    check_class_string(task, &format!("{field}.ctotal"), &decl.ctotal, ctx)
}

fn check_model(
    task: usize,
    field: &str,
    decl: &ModelDecl,
    ctx: &Ctx,
) -> Result<(), ValidationError> {
    for (i, b) in decl.v.iter().enumerate() {
        check_bundle(task, &format!("{field}.v[{i}]"), b, ctx)?;
    }
    for (i, b) in decl.w.iter().enumerate() {
        check_bundle(task, &format!("{field}.w[{i}]"), b, ctx)?;
    }
    check_class_string(
        task,
        &format!("{field}.moduli_segre"),
        &decl.moduli_segre,
        ctx,
    )
}

fn validate_task(
    i: usize,
    task: &TaskDecl,
    classes: &BTreeMap<String, LatticeClass>,
    ctx: &Ctx,
    truncation: u32,
) -> Result<(), ValidationError> {
    match task {
        TaskDecl::Pair { a, b, .. } => {
            check_class_name(i, "a", a, classes)?;
            check_class_name(i, "b", b, classes)
        }
        TaskDecl::IsExceptional { e, .. }
        | TaskDecl::ExpectedDimension { e, .. }
        | TaskDecl::Type1Codimension { e, .. } => check_class_name(i, "e", e, classes),
        TaskDecl::AdjunctionDelta { .. }
        | TaskDecl::YauZaslow { .. }
        | TaskDecl::VirtualCount { .. }
        | TaskDecl::K3Vanishing { .. }
        | TaskDecl::StabilizationCheck { .. }
        | TaskDecl::WhitneyCheck { .. }
        | TaskDecl::TauCheck { .. } => Ok(()),
        TaskDecl::ChiLine { c, .. } => check_class_name(i, "c", c, classes),
        TaskDecl::RankOmega { c, es, .. } | TaskDecl::DimensionTriple { c, es } => {
            check_class_name(i, "c", c, classes)?;
            for (j, e) in es.iter().enumerate() {
                check_class_name(i, &format!("es[{j}]"), e, classes)?;
            }
            Ok(())
        }
        TaskDecl::EnumerateCollections { c, candidates, .. }
        | TaskDecl::Schedule { c, candidates, .. } => {
            check_class_name(i, "c", c, classes)?;
            for (j, e) in candidates.iter().enumerate() {
                check_class_name(i, &format!("candidates[{j}]"), e, classes)?;
            }
            Ok(())
        }
        TaskDecl::LocalizedClass { model, hyperplane } => {
            check_model(i, "model", model, ctx)?;
            check_variable(i, "hyperplane", hyperplane, ctx)
        }
        TaskDecl::FiberProduct { a, b, insertion } => {
            check_class_string(i, "a", a, ctx)?;
            check_class_string(i, "b", b, ctx)?;
            check_class_string(i, "insertion", insertion, ctx)
        }
        TaskDecl::DegreePart { class, degree } => {
            check_class_string(i, "class", class, ctx)?;
            if *degree > truncation {
                return Err(invalid(
                    format!("tasks[{i}].degree"),
                    format!("degree {degree} exceeds truncation {truncation}"),
                ));
            }
            Ok(())
        }
        TaskDecl::Expansion(t) => {
            check_class_name(i, "c", &t.c, classes)?;
            for (j, e) in t.es.iter().enumerate() {
                check_class_name(i, &format!("es[{j}]"), e, classes)?;
            }
            check_variable(i, "hyperplane", &t.hyperplane, ctx)?;
            check_variable(i, "nd_marker", &t.nd_marker, ctx)?;
            for (j, v) in t.twist_vars.iter().enumerate() {
                check_variable(i, &format!("twist_vars[{j}]"), v, ctx)?;
            }
            for (j, b) in t.deformation.iter().enumerate() {
                check_bundle(i, &format!("deformation[{j}]"), b, ctx)?;
            }
            check_bundle(i, "v_prime", &t.v_prime, ctx)?;
            check_bundle(i, "w_prime", &t.w_prime, ctx)?;
            check_bundle(i, "nd_sections", &t.nd_sections, ctx)?;
            check_model(i, "residual", &t.residual, ctx)?;
            check_class_string(i, "coexist_segre", &t.coexist_segre, ctx)?;
            check_class_string(i, "coexist_vclass", &t.coexist_vclass, ctx)?;
            check_class_string(i, "pg_insertion", &t.pg_insertion, ctx)?;
            check_class_string(i, "r1_top", &t.r1_top, ctx)
        }
    }
}
