//! Invariant differential forms of finite matrix groups over finite fields
//! of odd characteristic.

pub mod arrgt;
pub mod cli;
pub mod crit;
pub mod extalg;
pub mod ff;
pub mod gens;
pub mod grp;
pub mod linalg;
pub mod mpoly;
