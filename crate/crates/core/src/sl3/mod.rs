//! Annular SL(3) webs: sign and state strings, lattice paths, web maps,
//! the growth algorithm, the minimal cut path map, and skein reduction of
//! elliptic webs.

pub mod grow;
pub mod path;
pub mod reduce;
pub mod web;
