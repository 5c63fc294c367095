//! Annular SL(2) arc algebras and annular SL(3) web combinatorics.
//!
//! The crate is organised bottom-up:
//!
//! - [`ring`]: exact coefficient arithmetic (`Z[a1,a2]`, Laurent polynomials
//!   in `q` and `A`) and bidegrees;
//! - [`matching`]: crossingless matchings in the punctured disk;
//! - [`tangle`]: flat annular tangles and gluing into circle configurations;
//! - [`tqft`]: state spaces of circle configurations and saddle maps;
//! - [`algebra`]: the arc algebras, their structure and verification suites;
//! - [`bimodule`]: bimodules of flat tangles and tensor composition;
//! - [`snf`]: Smith normal form and integer homology;
//! - [`complex`]: cubes of resolutions, specialization and homology;
//! - [`khovanov`]: a self-contained planar homology oracle for disk links;
//! - [`sl3`]: sign/state strings, lattice paths, webs, growth and min-cut.

pub mod algebra;
pub mod bimodule;
pub mod complex;
pub mod config;
pub mod khovanov;
pub mod matching;
pub mod ring;
pub mod sl3;
pub mod snf;
pub mod tangle;
pub mod tqft;

pub use matching::{Matching, SurgeryArc};
pub use tangle::{FlatTangle, Pt};
pub use ring::{Bidegree, LaurentQA, PolyAlpha};
