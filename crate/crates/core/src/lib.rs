//! Exact arithmetic for special functions, residues, periods and pole-order
//! filtrations of Anderson `F_q[t]`-modules over a truncated model of `C_inf`.

pub mod cinf;
pub mod exp;
pub mod field;
pub mod fqpoly;
pub mod matrix;
pub mod mero;
pub mod special;
pub mod suite;
pub mod tate;
pub mod tmodule;

pub use cinf::{Cinf, CinfError, CinfNum, FieldParams, Prec};
pub use field::{Fe, Gf};
