//! Exact symbolic calculus for residual-intersection bookkeeping of
//! exceptional curve families on surface fibrations.
//!
//! The crate is organized around five layers:
//!
//! - [`lattice`]: integer intersection-lattice arithmetic, exceptionality
//!   tests, and dimension formulas;
//! - [`ring`]: truncated graded polynomial algebra over exact rationals;
//! - [`bundle`]: virtual bundles with Chern/Segre calculus, twists, and
//!   projective pushforward;
//! - [`family`]: localized top Chern classes of Kuranishi models,
//!   stabilization, rank identities, the tau class, and the
//!   dominating-term expansion;
//! - [`scheme`] and [`series`]: exceptional-collection combinatorics and
//!   the nodal-curve generating series.
//!
//! All values are immutable after construction and all arithmetic is
//! exact.

pub mod bundle;
pub mod family;
pub mod lattice;
pub mod ring;
pub mod scheme;
pub mod series;

pub use bundle::{projective_pushforward, Bundle, BundleError, VirtualBundle};
pub use family::{
    chi_line, dimension_triple, fiber_product_vclass, intersection_sections_rank, localized_class,
    main_theorem_expansion, rank_omega, rank_omega_symbolic, stabilize, tau_class, ExpansionInputs,
    ExpansionReport, FamilyError, KuranishiModel, TauClass,
};
pub use lattice::{
    adjunction_delta, degree_assumption_holds, expected_dimension, is_exceptional, pair,
    type1_codimension, Febd, LatticeClass, LatticeError, SurfaceGeometry, TypeTag,
};
pub use ring::{Ctx, GradedClass, RingContext, RingError, Variable};
pub use scheme::{
    cone_partial_order, enumerate_collections, in_cone, linearize, Collection, Schedule,
    SchemeError,
};
pub use series::{k3_type2_vanishing, virtual_count_report, yau_zaslow_series, CoeffSeries};
